//! First cohomology of a finitely presented group with twisted coefficients.
//!
//! A cochain is a list of `g` vectors of length `d`, the values on the
//! generators, stacked into one vector of length `g·d`. It extends to a
//! cocycle exactly when every relator evaluates to zero, which is the kernel
//! of the Fox Jacobian. Everything below is kernels and ranks over ℚ.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::coeffs::{CoeffError, CoefficientModule};
use crate::freewords::{Cusp, Presentation, Word, WordError};
use crate::ratlin::{span_rank, LinalgError, Rational, RationalMatrix, RationalVector};
use crate::repcore::is_parabolic;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CohomError {
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("cochain has length {found}, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("vector {index} is not a cocycle")]
    NotACocycle { index: usize },
    #[error("per-subgroup mode needs cusp data, but the presentation has none")]
    NoCusps,
    #[error("unknown parabolic mode {0:?} (expected per-element, per-subgroup or none)")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParabolicMode {
    None,
    PerElement,
    PerSubgroup,
}

impl fmt::Display for ParabolicMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParabolicMode::None => "none",
            ParabolicMode::PerElement => "per-element",
            ParabolicMode::PerSubgroup => "per-subgroup",
        })
    }
}

impl FromStr for ParabolicMode {
    type Err = CohomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(ParabolicMode::None),
            "per-element" => Ok(ParabolicMode::PerElement),
            "per-subgroup" => Ok(ParabolicMode::PerSubgroup),
            other => Err(CohomError::UnknownMode(other.to_string())),
        }
    }
}

/// Cocycles and coboundaries for one presentation and module.
#[derive(Debug, Clone)]
pub struct CocycleSpace {
    module: CoefficientModule,
    jacobian: RationalMatrix,
    z1_basis: Vec<RationalVector>,
    b1_basis: Vec<RationalVector>,
    dim_h0: usize,
}

impl CocycleSpace {
    pub fn new(module: CoefficientModule) -> Result<Self, CohomError> {
        let presentation = module.representation().presentation().clone();
        let rows = presentation
            .relators()
            .iter()
            .map(|r| fox_row(&module, &presentation, r))
            .collect::<Result<Vec<_>, _>>()?;
        let g = presentation.generators().len();
        let d = module.dim();
        let jacobian = if rows.is_empty() {
            RationalMatrix::zeros(0, g * d)
        } else {
            RationalMatrix::vstack(&rows.iter().collect::<Vec<_>>())?
        };
        let z1_basis = jacobian.nullspace();

        // Column k of D is the coboundary of the k-th unit vector.
        let id = RationalMatrix::identity(d);
        let blocks: Vec<RationalMatrix> = presentation
            .generators()
            .iter()
            .map(|x| &id - module.generator_action(x).expect("module covers every generator"))
            .collect();
        let d_matrix = if blocks.is_empty() {
            RationalMatrix::zeros(0, d)
        } else {
            RationalMatrix::vstack(&blocks.iter().collect::<Vec<_>>())?
        };
        let rref = d_matrix.rref_rank();
        let b1_basis = rref.pivot_columns.iter().map(|&k| d_matrix.column(k)).collect();
        let dim_h0 = d - rref.rank;
        Ok(Self {
            module,
            jacobian,
            z1_basis,
            b1_basis,
            dim_h0,
        })
    }

    pub fn module(&self) -> &CoefficientModule {
        &self.module
    }

    pub fn presentation(&self) -> &Presentation {
        self.module.representation().presentation()
    }

    pub fn jacobian(&self) -> &RationalMatrix {
        &self.jacobian
    }

    pub fn z1_basis(&self) -> &[RationalVector] {
        &self.z1_basis
    }

    pub fn b1_basis(&self) -> &[RationalVector] {
        &self.b1_basis
    }

    /// Length `g·d` of a cochain.
    pub fn cochain_len(&self) -> usize {
        self.presentation().generators().len() * self.module.dim()
    }

    pub fn dim_z1(&self) -> usize {
        self.z1_basis.len()
    }

    pub fn dim_b1(&self) -> usize {
        self.b1_basis.len()
    }

    pub fn dim_h1(&self) -> usize {
        self.dim_z1() - self.dim_b1()
    }

    pub fn dim_h0(&self) -> usize {
        self.dim_h0
    }

    fn check_len(&self, c: &[Rational]) -> Result<(), CohomError> {
        if c.len() == self.cochain_len() {
            Ok(())
        } else {
            Err(CohomError::Length {
                expected: self.cochain_len(),
                found: c.len(),
            })
        }
    }

    /// The `d × g·d` matrix of `c ↦ c(w)`.
    pub fn evaluation_matrix(&self, w: &Word) -> Result<RationalMatrix, CohomError> {
        fox_row(&self.module, self.presentation(), w)
    }

    /// Value at `w` of the cocycle extension of `c`.
    pub fn cocycle_eval(&self, c: &[Rational], w: &Word) -> Result<RationalVector, CohomError> {
        self.check_len(c)?;
        let d = self.module.dim();
        let presentation = self.presentation();
        let mut prefix = RationalMatrix::identity(d);
        let mut value = vec![Rational::zero(); d];
        for l in w.letters() {
            let i = presentation
                .generator_index(&l.generator)
                .ok_or_else(|| unknown(&l.generator))?;
            let ci = &c[i * d..(i + 1) * d];
            if l.exponent > 0 {
                add_into(&mut value, &prefix.mul_vec(ci)?, 1);
                prefix = &prefix * self.module.generator_action(&l.generator).expect("known generator");
            } else {
                prefix = &prefix * self.module.generator_inverse_action(&l.generator).expect("known generator");
                add_into(&mut value, &prefix.mul_vec(ci)?, -1);
            }
        }
        Ok(value)
    }

    pub fn is_cocycle(&self, c: &[Rational]) -> Result<bool, CohomError> {
        self.check_len(c)?;
        Ok(self.jacobian.mul_vec(c)?.iter().all(Zero::is_zero))
    }

    /// `((I − action(xᵢ))·α)ᵢ`.
    pub fn coboundary(&self, alpha: &[Rational]) -> Result<RationalVector, CohomError> {
        let d = self.module.dim();
        if alpha.len() != d {
            return Err(CohomError::Length {
                expected: d,
                found: alpha.len(),
            });
        }
        let mut out = Vec::with_capacity(self.cochain_len());
        for x in self.presentation().generators() {
            let ax = self.module.generator_action(x).expect("known generator").mul_vec(alpha)?;
            out.extend(alpha.iter().zip(ax).map(|(a, b)| a - b));
        }
        Ok(out)
    }

    /// Whether `c` is a coboundary.
    pub fn is_coboundary(&self, c: &[Rational]) -> Result<bool, CohomError> {
        self.check_len(c)?;
        if self.b1_basis.is_empty() {
            return Ok(c.iter().all(Zero::is_zero));
        }
        let b = RationalMatrix::from_columns(self.cochain_len(), &self.b1_basis)?;
        Ok(b.in_column_space(c)?.is_some())
    }

    /// Basis of cochains satisfying the cocycle condition and, for each group
    /// of words, `c(w) = (I − action(w))·α` for one `α` shared by the group.
    ///
    /// The stacked values `(c(w))_w` must lie in the column space of the stacked
    /// `I − action(w)`, which is imposed through the left kernel of that matrix.
    pub fn constrained_cocycles(&self, groups: &[Vec<Word>]) -> Result<Vec<RationalVector>, CohomError> {
        let d = self.module.dim();
        let id = RationalMatrix::identity(d);
        let mut rows = vec![self.jacobian.clone()];
        for group in groups {
            if group.is_empty() {
                continue;
            }
            let moves = group
                .iter()
                .map(|w| Ok(&id - &self.module.action(w)?))
                .collect::<Result<Vec<_>, CohomError>>()?;
            let evals = group
                .iter()
                .map(|w| self.evaluation_matrix(w))
                .collect::<Result<Vec<_>, _>>()?;
            let moves = RationalMatrix::vstack(&moves.iter().collect::<Vec<_>>())?;
            let annihilator = moves.transpose().nullspace();
            if annihilator.is_empty() {
                continue;
            }
            let annihilator = RationalMatrix::from_rows(annihilator)?;
            let evals = RationalMatrix::vstack(&evals.iter().collect::<Vec<_>>())?;
            rows.push(annihilator.checked_mul(&evals)?);
        }
        let system = RationalMatrix::vstack(&rows.iter().collect::<Vec<_>>())?;
        Ok(system.nullspace())
    }

    /// Per-element parabolic cocycles for the given words.
    pub fn parabolic_cocycles(&self, words: &[Word]) -> Result<Vec<RationalVector>, CohomError> {
        let groups: Vec<Vec<Word>> = words.iter().map(|w| vec![w.clone()]).collect();
        self.constrained_cocycles(&groups)
    }

    /// Cocycles whose restriction to every cusp subgroup is a coboundary.
    pub fn cuspidal_cocycles(&self) -> Result<Vec<RationalVector>, CohomError> {
        if self.presentation().cusps().is_empty() {
            return Err(CohomError::NoCusps);
        }
        let groups: Vec<Vec<Word>> = self
            .presentation()
            .cusps()
            .iter()
            .map(|c| vec![c.meridian.clone(), c.longitude.clone()])
            .collect();
        self.constrained_cocycles(&groups)
    }

    /// Whether the restriction of `c` to the subgroup generated by `cusp` is a
    /// coboundary there: one `α` with `c(μ) = (I − μ)α` and `c(λ) = (I − λ)α`.
    pub fn restricts_trivially(&self, c: &[Rational], cusp: &Cusp) -> Result<bool, CohomError> {
        let d = self.module.dim();
        let id = RationalMatrix::identity(d);
        let a = RationalMatrix::vstack(&[
            &(&id - &self.module.action(&cusp.meridian)?),
            &(&id - &self.module.action(&cusp.longitude)?),
        ])?;
        let mut b = self.cocycle_eval(c, &cusp.meridian)?;
        b.extend(self.cocycle_eval(c, &cusp.longitude)?);
        Ok(a.in_column_space(&b)?.is_some())
    }

    pub fn is_cuspidal(&self, c: &[Rational]) -> Result<bool, CohomError> {
        for cusp in self.presentation().cusps() {
            if !self.restricts_trivially(c, cusp)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Dimension of the joint invariants of `{action(μ), action(λ)}`, per cusp.
    pub fn peripheral_h0(&self) -> Result<Vec<usize>, CohomError> {
        let id = RationalMatrix::identity(self.module.dim());
        self.presentation()
            .cusps()
            .iter()
            .map(|c| {
                let m = RationalMatrix::vstack(&[
                    &(&self.module.action(&c.meridian)? - &id),
                    &(&self.module.action(&c.longitude)? - &id),
                ])?;
                Ok(m.nullspace().len())
            })
            .collect()
    }

    /// Dimension of the span of the classes of `cocycles` in H¹.
    pub fn class_span_dim(&self, cocycles: &[RationalVector]) -> Result<usize, CohomError> {
        for (index, c) in cocycles.iter().enumerate() {
            if !self.is_cocycle(c)? {
                return Err(CohomError::NotACocycle { index });
            }
        }
        let mut all: Vec<RationalVector> = cocycles.to_vec();
        all.extend(self.b1_basis.iter().cloned());
        let rank = RationalMatrix::from_columns(self.cochain_len(), &all)?.rank();
        Ok(rank - self.dim_b1())
    }
}

fn unknown(name: &str) -> CohomError {
    CohomError::Word(WordError::UnknownGenerator {
        name: name.to_string(),
        offset: 0,
    })
}

fn add_into(acc: &mut [Rational], v: &[Rational], sign: i8) {
    for (a, b) in acc.iter_mut().zip(v) {
        if sign > 0 {
            *a += b;
        } else {
            *a -= b;
        }
    }
}

/// Row `w` of the Fox Jacobian: blocks `action(∂w/∂xᵢ)`, computed by one pass
/// over the letters instead of expanding the group-ring elements.
fn fox_row(module: &CoefficientModule, presentation: &Presentation, w: &Word) -> Result<RationalMatrix, CohomError> {
    let d = module.dim();
    let g = presentation.generators().len();
    let mut out = RationalMatrix::zeros(d, g * d);
    let mut prefix = RationalMatrix::identity(d);
    for l in w.letters() {
        let i = presentation
            .generator_index(&l.generator)
            .ok_or_else(|| unknown(&l.generator))?;
        let mut block = out.submatrix(0, i * d, d, d);
        if l.exponent > 0 {
            block = &block + &prefix;
            prefix = &prefix * module.generator_action(&l.generator).expect("known generator");
        } else {
            prefix = &prefix * module.generator_inverse_action(&l.generator).expect("known generator");
            block = &block - &prefix;
        }
        out.set_block(0, i * d, &block);
    }
    Ok(out)
}

/// Default words for the per-element condition: `μ`, `λ` and `μλ` per cusp.
///
/// `μλ` is included because when both generators act as translations along
/// orthogonal directions, the per-element conditions on `μ` and `λ` alone do
/// not force a shared `α`.
pub fn default_parabolic_words(presentation: &Presentation) -> Vec<Word> {
    presentation
        .cusps()
        .iter()
        .flat_map(|c| [c.meridian.clone(), c.longitude.clone(), c.meridian.concat(&c.longitude)])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CohomologyReport {
    pub mode: ParabolicMode,
    pub module_dim: usize,
    pub dim_z1: usize,
    pub dim_b1: usize,
    pub dim_h1: usize,
    pub dim_h0: usize,
    pub dim_pz1: Option<usize>,
    pub dim_ph1: Option<usize>,
    pub parabolic_words: Vec<String>,
    pub warnings: Vec<String>,
    /// `dimH1 = dimZ1 − dimB1`, `dimB1 = d − dimH0`, and `B¹ ⊆ PZ¹ ⊆ Z¹` when present.
    pub identities_hold: bool,
}

/// Computes Z¹, B¹, H¹, H⁰ and, unless `mode` is `None`, the parabolic
/// subspace. `parabolic_words` overrides the per-element word list.
pub fn h1_report(
    space: &CocycleSpace,
    mode: ParabolicMode,
    parabolic_words: Option<&[Word]>,
) -> Result<CohomologyReport, CohomError> {
    let mut warnings = Vec::new();
    let mut listed = Vec::new();
    let pz1 = match mode {
        ParabolicMode::None => None,
        ParabolicMode::PerElement => {
            let words = match parabolic_words {
                Some(w) => w.to_vec(),
                None => default_parabolic_words(space.presentation()),
            };
            let rep = space.module().representation();
            for w in &words {
                space.presentation().check_word(w)?;
                let m = rep.evaluate(w).map_err(CoeffError::from)?;
                if !is_parabolic(&m)? {
                    warnings.push(format!("word {w} is not parabolic under the representation"));
                }
                listed.push(w.to_string());
            }
            Some(space.parabolic_cocycles(&words)?)
        }
        ParabolicMode::PerSubgroup => {
            for c in space.presentation().cusps() {
                listed.push(c.meridian.to_string());
                listed.push(c.longitude.to_string());
            }
            Some(space.cuspidal_cocycles()?)
        }
    };
    let dim_b1 = space.dim_b1();
    let mut identities_hold = space.dim_h1() + dim_b1 == space.dim_z1() && dim_b1 + space.dim_h0() == space.module().dim();
    if let Some(basis) = &pz1 {
        identities_hold &= contains_all(space.cochain_len(), basis, space.b1_basis())?;
        for v in basis {
            identities_hold &= space.is_cocycle(v)?;
        }
    }
    Ok(CohomologyReport {
        mode,
        module_dim: space.module().dim(),
        dim_z1: space.dim_z1(),
        dim_b1,
        dim_h1: space.dim_h1(),
        dim_h0: space.dim_h0(),
        dim_pz1: pz1.as_ref().map(Vec::len),
        dim_ph1: pz1.as_ref().map(|b| b.len() - dim_b1),
        parabolic_words: listed,
        warnings,
        identities_hold,
    })
}

/// Whether every vector of `vs` lies in the span of `basis`.
fn contains_all(len: usize, basis: &[RationalVector], vs: &[RationalVector]) -> Result<bool, CohomError> {
    let mut all = basis.to_vec();
    all.extend(vs.iter().cloned());
    Ok(span_rank(len, &all)? == span_rank(len, basis)?)
}

/// `dimH¹ − dimPH¹ = peripheral_h0`. False when the report has no parabolic part.
pub fn scannell_check(report: &CohomologyReport, peripheral_h0: usize) -> bool {
    report
        .dim_ph1
        .is_some_and(|ph1| report.dim_h1 >= ph1 && report.dim_h1 - ph1 == peripheral_h0)
}
