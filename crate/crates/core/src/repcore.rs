//! Matrix representations of presented groups.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::freewords::{GroupRingElem, Presentation, Word, WordError};
use crate::ratlin::{rat, LinalgError, Rational, RationalMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("quadratic form is not symmetric")]
    FormNotSymmetric,
    #[error("quadratic form is singular")]
    FormSingular,
    #[error("no image given for generator {0:?}")]
    MissingImage(String),
    #[error("image given for unknown generator {0:?}")]
    ExtraImage(String),
    #[error("image of {generator:?} is {rows}x{cols}, expected {expected}x{expected}")]
    BadImageShape {
        generator: String,
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("image of {0:?} is not invertible")]
    SingularImage(String),
    #[error("form is {found}x{found}, images are {expected}x{expected}")]
    FormSize { expected: usize, found: usize },
}

/// A symmetric invertible bilinear form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    matrix: RationalMatrix,
    inverse: RationalMatrix,
}

impl QuadraticForm {
    pub fn new(matrix: RationalMatrix) -> Result<Self, RepError> {
        if !matrix.is_square() {
            return Err(LinalgError::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            }
            .into());
        }
        if matrix.transpose() != matrix {
            return Err(RepError::FormNotSymmetric);
        }
        let inverse = matrix.inverse().map_err(|_| RepError::FormSingular)?;
        Ok(Self { matrix, inverse })
    }

    pub fn diagonal(entries: &[i64]) -> Result<Self, RepError> {
        let d: Vec<Rational> = entries.iter().map(|&e| rat(e)).collect();
        Self::new(RationalMatrix::diagonal(&d))
    }

    /// The anti-diagonal form with a single `-1` corner, as used for
    /// `Q_n`-style models.
    pub fn anti_diagonal(size: usize) -> Result<Self, RepError> {
        let m = RationalMatrix::from_fn(size, size, |i, j| {
            if i + j + 1 == size {
                if i == 0 || j == 0 {
                    rat(-1)
                } else {
                    rat(1)
                }
            } else {
                Rational::zero()
            }
        });
        Self::new(m)
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    pub fn inverse_matrix(&self) -> &RationalMatrix {
        &self.inverse
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    /// `Mᵀ Q M == Q`.
    pub fn preserved_by(&self, m: &RationalMatrix) -> bool {
        m.rows() == self.size() && m.is_square() && &(&m.transpose() * &self.matrix) * m == self.matrix
    }

    /// `Q ⊕ (1)`.
    pub fn extended(&self) -> Self {
        let n = self.size();
        let mut m = RationalMatrix::zeros(n + 1, n + 1);
        m.set_block(0, 0, &self.matrix);
        m[(n, n)] = Rational::one();
        Self::new(m).expect("extension of a valid form is valid")
    }
}

/// Images of the generators of a presentation, with a form they should preserve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representation {
    presentation: Presentation,
    images: BTreeMap<String, RationalMatrix>,
    inverses: BTreeMap<String, RationalMatrix>,
    form: QuadraticForm,
}

impl Representation {
    /// Checks shapes and invertibility only; algebraic checks live in
    /// [`validate_representation`].
    pub fn new(
        presentation: Presentation,
        images: BTreeMap<String, RationalMatrix>,
        form: QuadraticForm,
    ) -> Result<Self, RepError> {
        let size = form.size();
        for name in images.keys() {
            if presentation.generator_index(name).is_none() {
                return Err(RepError::ExtraImage(name.clone()));
            }
        }
        let mut inverses = BTreeMap::new();
        for g in presentation.generators() {
            let m = images.get(g).ok_or_else(|| RepError::MissingImage(g.clone()))?;
            if m.rows() != size || m.cols() != size {
                return Err(RepError::BadImageShape {
                    generator: g.clone(),
                    rows: m.rows(),
                    cols: m.cols(),
                    expected: size,
                });
            }
            let inv = m.inverse().map_err(|_| RepError::SingularImage(g.clone()))?;
            inverses.insert(g.clone(), inv);
        }
        Ok(Self {
            presentation,
            images,
            inverses,
            form,
        })
    }

    /// Every generator sent to the identity.
    pub fn trivial(presentation: Presentation, form: QuadraticForm) -> Result<Self, RepError> {
        let id = RationalMatrix::identity(form.size());
        let images = presentation.generators().iter().map(|g| (g.clone(), id.clone())).collect();
        Self::new(presentation, images, form)
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn form(&self) -> &QuadraticForm {
        &self.form
    }

    /// Matrix size `n + 1`.
    pub fn size(&self) -> usize {
        self.form.size()
    }

    /// The `n` in `SO(n,1)`.
    pub fn ambient_dimension(&self) -> usize {
        self.size() - 1
    }

    pub fn image(&self, generator: &str) -> Option<&RationalMatrix> {
        self.images.get(generator)
    }

    pub fn image_inverse(&self, generator: &str) -> Option<&RationalMatrix> {
        self.inverses.get(generator)
    }

    pub fn images(&self) -> &BTreeMap<String, RationalMatrix> {
        &self.images
    }

    pub fn evaluate(&self, w: &Word) -> Result<RationalMatrix, RepError> {
        let mut acc = RationalMatrix::identity(self.size());
        for l in w.letters() {
            let table = if l.exponent > 0 { &self.images } else { &self.inverses };
            let m = table.get(&l.generator).ok_or_else(|| WordError::UnknownGenerator {
                name: l.generator.clone(),
                offset: 0,
            })?;
            acc = &acc * m;
        }
        Ok(acc)
    }

    /// Linear extension of [`Self::evaluate`] to the group ring.
    pub fn evaluate_ring(&self, e: &GroupRingElem) -> Result<RationalMatrix, RepError> {
        let mut acc = RationalMatrix::zeros(self.size(), self.size());
        for (w, c) in e.terms() {
            let m = self.evaluate(w)?;
            acc = &acc + &m.scale(&Rational::from_integer(c.clone()));
        }
        Ok(acc)
    }

    /// `g ↦ h ρ(g) h⁻¹`, with the form transported to `h⁻ᵀ Q h⁻¹` so that it is
    /// still preserved.
    pub fn conjugate(&self, h: &RationalMatrix) -> Result<Self, RepError> {
        let hinv = h.inverse()?;
        let images = self
            .images
            .iter()
            .map(|(g, m)| (g.clone(), &(h * m) * &hinv))
            .collect();
        let form = QuadraticForm::new(&(&hinv.transpose() * self.form.matrix()) * &hinv)?;
        Self::new(self.presentation.clone(), images, form)
    }

    /// Block embedding `diag(ρ(g), 1)` preserving `Q ⊕ (1)`.
    pub fn embed_so_ext(&self) -> Self {
        let n = self.size();
        let images = self
            .images
            .iter()
            .map(|(g, m)| (g.clone(), embed_block(m, n)))
            .collect();
        Self::new(self.presentation.clone(), images, self.form.extended()).expect("block embedding stays valid")
    }

    /// Same images over a different presentation on the same generators.
    pub fn with_presentation(&self, presentation: Presentation) -> Result<Self, RepError> {
        Self::new(presentation, self.images.clone(), self.form.clone())
    }

    /// Same images, different form.
    pub fn with_form(&self, form: QuadraticForm) -> Result<Self, RepError> {
        Self::new(self.presentation.clone(), self.images.clone(), form)
    }
}

fn embed_block(m: &RationalMatrix, n: usize) -> RationalMatrix {
    let mut out = RationalMatrix::zeros(n + 1, n + 1);
    out.set_block(0, 0, m);
    out[(n, n)] = Rational::one();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorCheck {
    pub generator: String,
    pub preserves_form: bool,
    pub determinant: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelatorCheck {
    pub index: usize,
    pub label: String,
    pub is_identity: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub generators: Vec<GeneratorCheck>,
    pub relators: Vec<RelatorCheck>,
    pub passed: bool,
}

impl ValidationReport {
    /// Human-readable descriptions of every failed check.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for g in &self.generators {
            if !g.preserves_form {
                out.push(format!("generator {} does not preserve the form", g.generator));
            }
            if !(g.determinant.is_one() || (-&g.determinant).is_one()) {
                out.push(format!("generator {} has determinant {}", g.generator, g.determinant));
            }
        }
        for r in &self.relators {
            if !r.is_identity {
                out.push(format!("relator {} ({}) does not evaluate to the identity", r.index + 1, r.label));
            }
        }
        out
    }
}

/// Form preservation and determinant per generator, identity check per relator.
pub fn validate_representation(rep: &Representation) -> ValidationReport {
    let generators: Vec<GeneratorCheck> = rep
        .presentation
        .generators()
        .iter()
        .map(|g| {
            let m = &rep.images[g];
            GeneratorCheck {
                generator: g.clone(),
                preserves_form: rep.form.preserved_by(m),
                determinant: m.determinant().expect("images are square"),
            }
        })
        .collect();
    let relators: Vec<RelatorCheck> = rep
        .presentation
        .relators()
        .iter()
        .zip(rep.presentation.relator_labels())
        .enumerate()
        .map(|(index, (r, label))| RelatorCheck {
            index,
            label: label.clone(),
            is_identity: rep.evaluate(r).map(|m| m.is_identity()).unwrap_or(false),
        })
        .collect();
    let mut report = ValidationReport {
        generators,
        relators,
        passed: false,
    };
    report.passed = report.failures().is_empty();
    report
}

/// `M ≠ I` and `(M − I)^k = 0` for `k = size(M)`.
pub fn is_parabolic(m: &RationalMatrix) -> Result<bool, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.is_identity() {
        return Ok(false);
    }
    let n = m.rows();
    let nil = m - &RationalMatrix::identity(n);
    Ok(nil.pow(n as u32)?.is_zero())
}

/// A representation with a tangent direction: `g ↦ M_g + t·E_g` modulo `t²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstOrderRep {
    base: Representation,
    derivative: BTreeMap<String, RationalMatrix>,
}

impl FirstOrderRep {
    /// Generators missing from `derivative` get zero.
    pub fn new(base: Representation, mut derivative: BTreeMap<String, RationalMatrix>) -> Result<Self, RepError> {
        let size = base.size();
        for (g, e) in &derivative {
            if base.presentation.generator_index(g).is_none() {
                return Err(RepError::ExtraImage(g.clone()));
            }
            if e.rows() != size || e.cols() != size {
                return Err(RepError::BadImageShape {
                    generator: g.clone(),
                    rows: e.rows(),
                    cols: e.cols(),
                    expected: size,
                });
            }
        }
        for g in base.presentation.generators() {
            derivative
                .entry(g.clone())
                .or_insert_with(|| RationalMatrix::zeros(size, size));
        }
        Ok(Self { base, derivative })
    }

    pub fn base(&self) -> &Representation {
        &self.base
    }

    pub fn derivative(&self, generator: &str) -> Option<&RationalMatrix> {
        self.derivative.get(generator)
    }

    pub fn is_trivial(&self) -> bool {
        self.derivative.values().all(RationalMatrix::is_zero)
    }
}

/// Dual-number evaluation of a word, returning the value and its first-order part.
pub fn first_order_evaluate(fo: &FirstOrderRep, w: &Word) -> Result<(RationalMatrix, RationalMatrix), RepError> {
    let n = fo.base.size();
    let mut m = RationalMatrix::identity(n);
    let mut e = RationalMatrix::zeros(n, n);
    for l in w.letters() {
        let unknown = || WordError::UnknownGenerator {
            name: l.generator.clone(),
            offset: 0,
        };
        let eg = fo.derivative.get(&l.generator).ok_or_else(unknown)?;
        let (mg, eg) = if l.exponent > 0 {
            (fo.base.images[&l.generator].clone(), eg.clone())
        } else {
            let mi = &fo.base.inverses[&l.generator];
            (mi.clone(), -&(&(mi * eg) * mi))
        };
        e = &(&m * &eg) + &(&e * &mg);
        m = &m * &mg;
    }
    Ok((m, e))
}
