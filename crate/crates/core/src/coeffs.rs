//! Coefficient modules for twisted cohomology and the Ad-invariant splitting.
//!
//! Three modules are supported: the standard representation `ℝ^{n,1}`, the
//! complement `ν_{n+1}` of `𝔰𝔬(Q)` inside `𝔰𝔩_{n+1}`, and the adjoint module
//! `𝔰𝔬(Q)` itself.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use thiserror::Error;

use crate::freewords::{GroupRingElem, Word, WordError};
use crate::ratlin::{ratio, LinalgError, Rational, RationalMatrix, RationalVector};
use crate::repcore::{QuadraticForm, RepError, Representation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoeffError {
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("{kind} module has dimension {found}, expected {expected}; the form may be degenerate")]
    DegenerateForm {
        kind: ModuleKind,
        expected: usize,
        found: usize,
    },
    #[error("matrix has trace {0}, expected 0")]
    NotTraceless(Rational),
    #[error("matrix does not lie in the extended orthogonal algebra")]
    NotInExtendedAlgebra,
    #[error("matrix is {found}x{found}, expected {expected}x{expected}")]
    Size { expected: usize, found: usize },
    #[error("matrix is not in the span of the module basis")]
    NotInModule,
    #[error("unknown coefficient kind {0:?} (expected r31, nu or adjoint)")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModuleKind {
    Standard,
    Nu,
    Adjoint,
}

impl ModuleKind {
    pub const ALL: [ModuleKind; 3] = [ModuleKind::Standard, ModuleKind::Nu, ModuleKind::Adjoint];

    /// Command-line spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            ModuleKind::Standard => "r31",
            ModuleKind::Nu => "nu",
            ModuleKind::Adjoint => "adjoint",
        }
    }
}

impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModuleKind {
    type Err = CoeffError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "r31" | "standard" => Ok(ModuleKind::Standard),
            "nu" => Ok(ModuleKind::Nu),
            "adjoint" | "so" => Ok(ModuleKind::Adjoint),
            other => Err(CoeffError::UnknownKind(other.to_string())),
        }
    }
}

/// A finite-dimensional module over the group, given by action matrices on
/// the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientModule {
    kind: ModuleKind,
    rep: Representation,
    dim: usize,
    basis: Vec<RationalMatrix>,
    // Flattened index at which each basis matrix has its 1; every other basis
    // matrix is zero there, so coordinates can be read off directly.
    coordinate_positions: Vec<usize>,
    actions: BTreeMap<String, RationalMatrix>,
    inverse_actions: BTreeMap<String, RationalMatrix>,
}

pub fn build_module(rep: &Representation, kind: ModuleKind) -> Result<CoefficientModule, CoeffError> {
    CoefficientModule::new(rep, kind)
}

impl CoefficientModule {
    pub fn new(rep: &Representation, kind: ModuleKind) -> Result<Self, CoeffError> {
        let s = rep.size();
        let n = rep.ambient_dimension();
        let (basis, coordinate_positions) = match kind {
            ModuleKind::Standard => (Vec::new(), Vec::new()),
            ModuleKind::Nu => subspace_basis(s, &linear_conditions(rep.form(), false)),
            ModuleKind::Adjoint => subspace_basis(s, &linear_conditions(rep.form(), true)),
        };
        let (dim, expected) = match kind {
            ModuleKind::Standard => (s, s),
            ModuleKind::Nu => (basis.len(), n * (n + 3) / 2),
            ModuleKind::Adjoint => (basis.len(), n * (n + 1) / 2),
        };
        if dim != expected {
            return Err(CoeffError::DegenerateForm {
                kind,
                expected,
                found: dim,
            });
        }
        let mut module = Self {
            kind,
            rep: rep.clone(),
            dim,
            basis,
            coordinate_positions,
            actions: BTreeMap::new(),
            inverse_actions: BTreeMap::new(),
        };
        for g in rep.presentation().generators() {
            let m = rep.image(g).expect("validated representation");
            let mi = rep.image_inverse(g).expect("validated representation");
            let a = module.act_by_matrix(m, mi)?;
            let ai = module.act_by_matrix(mi, m)?;
            module.actions.insert(g.clone(), a);
            module.inverse_actions.insert(g.clone(), ai);
        }
        Ok(module)
    }

    fn act_by_matrix(&self, m: &RationalMatrix, mi: &RationalMatrix) -> Result<RationalMatrix, CoeffError> {
        match self.kind {
            ModuleKind::Standard => Ok(m.clone()),
            ModuleKind::Nu | ModuleKind::Adjoint => {
                let cols = self
                    .basis
                    .iter()
                    .map(|b| self.coordinates(&(&(m * b) * mi)))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(RationalMatrix::from_columns(self.dim, &cols)?)
            }
        }
    }

    pub fn kind(&self) -> ModuleKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    /// Basis matrices; empty for the standard module.
    pub fn basis(&self) -> &[RationalMatrix] {
        &self.basis
    }

    pub fn generator_action(&self, g: &str) -> Option<&RationalMatrix> {
        self.actions.get(g)
    }

    pub fn generator_inverse_action(&self, g: &str) -> Option<&RationalMatrix> {
        self.inverse_actions.get(g)
    }

    pub fn action(&self, w: &Word) -> Result<RationalMatrix, CoeffError> {
        let mut acc = RationalMatrix::identity(self.dim);
        for l in w.letters() {
            let table = if l.exponent > 0 { &self.actions } else { &self.inverse_actions };
            let a = table.get(&l.generator).ok_or_else(|| WordError::UnknownGenerator {
                name: l.generator.clone(),
                offset: 0,
            })?;
            acc = &acc * a;
        }
        Ok(acc)
    }

    /// Linear extension of [`Self::action`] to the group ring.
    pub fn action_ring(&self, e: &GroupRingElem) -> Result<RationalMatrix, CoeffError> {
        let mut acc = RationalMatrix::zeros(self.dim, self.dim);
        for (w, c) in e.terms() {
            acc = &acc + &self.action(w)?.scale(&Rational::from_integer(c.clone()));
        }
        Ok(acc)
    }

    /// Coordinates of a matrix in the module basis (nu/adjoint only).
    pub fn coordinates(&self, v: &RationalMatrix) -> Result<RationalVector, CoeffError> {
        let s = self.rep.size();
        if v.rows() != s || v.cols() != s {
            return Err(CoeffError::Size {
                expected: s,
                found: v.rows(),
            });
        }
        let flat = v.as_slice();
        let coords: RationalVector = self.coordinate_positions.iter().map(|&p| flat[p].clone()).collect();
        if self.from_coordinates(&coords)? != *v {
            return Err(CoeffError::NotInModule);
        }
        Ok(coords)
    }

    /// The matrix with the given coordinates (nu/adjoint only).
    pub fn from_coordinates(&self, coords: &[Rational]) -> Result<RationalMatrix, CoeffError> {
        if coords.len() != self.basis.len() {
            return Err(LinalgError::DimensionMismatch {
                context: "module coordinates",
                expected: self.basis.len(),
                found: coords.len(),
            }
            .into());
        }
        let s = self.rep.size();
        let mut acc = RationalMatrix::zeros(s, s);
        for (c, b) in coords.iter().zip(&self.basis) {
            if !c.is_zero() {
                acc = &acc + &b.scale(c);
            }
        }
        Ok(acc)
    }
}

/// Row `i*s + j` of the returned list encodes entry `(i, j)` of `VᵀQ − QV`
/// (or `VᵀQ + QV` when `skew`), as a linear form in the flattened `V`. For the
/// symmetric case a trace row is appended.
fn linear_conditions(form: &QuadraticForm, skew: bool) -> RationalMatrix {
    let q = form.matrix();
    let s = q.rows();
    let mut rows = Vec::new();
    for i in 0..s {
        for j in 0..s {
            let mut row = vec![Rational::zero(); s * s];
            // (VᵀQ)_{ij} = Σ_k V_{ki} Q_{kj}
            for k in 0..s {
                row[k * s + i] += &q[(k, j)];
            }
            // (QV)_{ij} = Σ_k Q_{ik} V_{kj}
            for k in 0..s {
                if skew {
                    row[k * s + j] += &q[(i, k)];
                } else {
                    row[k * s + j] -= &q[(i, k)];
                }
            }
            rows.push(row);
        }
    }
    if !skew {
        let mut row = vec![Rational::zero(); s * s];
        for i in 0..s {
            row[i * s + i] = Rational::from_integer(1.into());
        }
        rows.push(row);
    }
    RationalMatrix::from_rows(rows).expect("rows have equal length")
}

fn subspace_basis(s: usize, conditions: &RationalMatrix) -> (Vec<RationalMatrix>, Vec<usize>) {
    let rref = conditions.rref_rank();
    let mut is_pivot = vec![false; s * s];
    for &p in &rref.pivot_columns {
        is_pivot[p] = true;
    }
    let free: Vec<usize> = (0..s * s).filter(|&c| !is_pivot[c]).collect();
    let basis = conditions
        .nullspace()
        .into_iter()
        .map(|v| RationalMatrix::from_flat(s, s, v).expect("length s*s"))
        .collect();
    (basis, free)
}

/// `X* = Q⁻¹ Xᵀ Q`, the adjoint of `X` with respect to the form.
pub fn form_adjoint(x: &RationalMatrix, form: &QuadraticForm) -> RationalMatrix {
    &(form.inverse_matrix() * &x.transpose()) * form.matrix()
}

/// `XᵀQ + QX = 0`.
pub fn in_so(x: &RationalMatrix, form: &QuadraticForm) -> bool {
    x.is_square() && x.rows() == form.size() && (&(&x.transpose() * form.matrix()) + &(form.matrix() * x)).is_zero()
}

/// `XᵀQ = QX` and `tr X = 0`.
pub fn in_nu(x: &RationalMatrix, form: &QuadraticForm) -> bool {
    x.is_square()
        && x.rows() == form.size()
        && &x.transpose() * form.matrix() == form.matrix() * x
        && x.trace().is_ok_and(|t| t.is_zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    /// `𝔰𝔩_{n+1} = 𝔰𝔬(Q) ⊕ ν`.
    Sl,
    /// `𝔰𝔬(Q ⊕ 1) = 𝔰𝔬(Q) ⊕ ℝ^{n,1}`.
    SoExt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Complement {
    Matrix(RationalMatrix),
    Vector(RationalVector),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    pub so_part: RationalMatrix,
    pub complement: Complement,
}

/// Splits `X` into its `𝔰𝔬(Q)` part and the invariant complement.
///
/// For [`Ambient::Sl`], `X` is `(n+1)×(n+1)` and traceless; the parts are
/// `(X − X*)/2` and `(X + X*)/2`. For [`Ambient::SoExt`], `X` is `(n+2)×(n+2)`
/// in `𝔰𝔬(Q ⊕ 1)`; the parts are its top-left block and the top of its last
/// column.
pub fn split_components(x: &RationalMatrix, form: &QuadraticForm, ambient: Ambient) -> Result<SplitResult, CoeffError> {
    let s = form.size();
    match ambient {
        Ambient::Sl => {
            if !x.is_square() || x.rows() != s {
                return Err(CoeffError::Size {
                    expected: s,
                    found: x.rows(),
                });
            }
            let t = x.trace()?;
            if !t.is_zero() {
                return Err(CoeffError::NotTraceless(t));
            }
            let half = ratio(1, 2);
            let star = form_adjoint(x, form);
            Ok(SplitResult {
                so_part: (x - &star).scale(&half),
                complement: Complement::Matrix((x + &star).scale(&half)),
            })
        }
        Ambient::SoExt => {
            if !x.is_square() || x.rows() != s + 1 {
                return Err(CoeffError::Size {
                    expected: s + 1,
                    found: x.rows(),
                });
            }
            if !in_so(x, &form.extended()) {
                return Err(CoeffError::NotInExtendedAlgebra);
            }
            Ok(SplitResult {
                so_part: x.submatrix(0, 0, s, s),
                complement: Complement::Vector((0..s).map(|i| x[(i, s)].clone()).collect()),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freewords::parse_word;
    use crate::ratlin::rat;
    use crate::repcore::tests::borromean;
    use proptest::prelude::*;

    #[test]
    fn dimensions() {
        let rep = borromean();
        let std = build_module(&rep, ModuleKind::Standard).unwrap();
        assert_eq!(std.dim(), 4);
        assert_eq!(std.generator_action("x"), rep.image("x"));
        assert_eq!(build_module(&rep, ModuleKind::Nu).unwrap().dim(), 9);
        assert_eq!(build_module(&rep, ModuleKind::Adjoint).unwrap().dim(), 6);
    }

    #[test]
    fn bases_lie_in_their_subspaces() {
        let rep = borromean();
        let q = rep.form();
        for b in build_module(&rep, ModuleKind::Nu).unwrap().basis() {
            assert!(in_nu(b, q));
        }
        for b in build_module(&rep, ModuleKind::Adjoint).unwrap().basis() {
            assert!(in_so(b, q));
        }
    }

    #[test]
    fn anti_diagonal_form_is_supported() {
        let p = crate::freewords::Presentation::parse::<&str>(&["x"], &[], &[]).unwrap();
        let rep = Representation::trivial(p, QuadraticForm::anti_diagonal(4).unwrap()).unwrap();
        assert_eq!(build_module(&rep, ModuleKind::Nu).unwrap().dim(), 9);
        assert_eq!(build_module(&rep, ModuleKind::Adjoint).unwrap().dim(), 6);
    }

    #[test]
    fn action_matches_conjugation() {
        let rep = borromean();
        for kind in [ModuleKind::Nu, ModuleKind::Adjoint] {
            let m = build_module(&rep, kind).unwrap();
            for g in ["x", "y", "z"] {
                let a = m.generator_action(g).unwrap();
                let rho = rep.image(g).unwrap();
                let rho_inv = rep.image_inverse(g).unwrap();
                for (i, b) in m.basis().iter().enumerate() {
                    let image = &(rho * b) * rho_inv;
                    assert_eq!(m.coordinates(&image).unwrap(), a.column(i));
                }
            }
        }
    }

    #[test]
    fn standard_h0_vanishes() {
        let rep = borromean();
        let m = build_module(&rep, ModuleKind::Standard).unwrap();
        let id = RationalMatrix::identity(4);
        let blocks: Vec<RationalMatrix> = ["x", "y", "z"]
            .iter()
            .map(|g| m.generator_action(g).unwrap() - &id)
            .collect();
        let refs: Vec<&RationalMatrix> = blocks.iter().collect();
        assert_eq!(RationalMatrix::vstack(&refs).unwrap().nullspace().len(), 0);
    }

    #[test]
    fn split_examples() {
        let q = QuadraticForm::diagonal(&[-1, 1, 1, 1]).unwrap();
        let d = RationalMatrix::diagonal(&[rat(-3), rat(1), rat(1), rat(1)]);
        let s = split_components(&d, &q, Ambient::Sl).unwrap();
        assert!(s.so_part.is_zero());
        assert_eq!(s.complement, Complement::Matrix(d));
        let skew = RationalMatrix::from_i64(&[[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]);
        assert!(in_so(&skew, &q));
        let s = split_components(&skew, &q, Ambient::Sl).unwrap();
        assert_eq!(s.complement, Complement::Matrix(RationalMatrix::zeros(4, 4)));
        assert!(matches!(
            split_components(&RationalMatrix::identity(4), &q, Ambient::Sl),
            Err(CoeffError::NotTraceless(_))
        ));
    }

    #[test]
    fn split_so_ext_reads_last_column() {
        let q = QuadraticForm::diagonal(&[-1, 1, 1, 1]).unwrap();
        // Infinitesimal translation in the direction (1, 2, 0, 0) of Q ⊕ 1.
        let mut x = RationalMatrix::zeros(5, 5);
        x[(0, 4)] = rat(1);
        x[(4, 0)] = rat(1);
        x[(1, 4)] = rat(2);
        x[(4, 1)] = rat(-2);
        let s = split_components(&x, &q, Ambient::SoExt).unwrap();
        assert!(s.so_part.is_zero());
        assert_eq!(s.complement, Complement::Vector(vec![rat(1), rat(2), rat(0), rat(0)]));
        assert!(split_components(&RationalMatrix::identity(5), &q, Ambient::SoExt).is_err());
    }

    fn traceless() -> impl Strategy<Value = RationalMatrix> {
        prop::collection::vec(-9i64..10, 16).prop_map(|v| {
            let mut m = RationalMatrix::from_fn(4, 4, |i, j| rat(v[i * 4 + j]));
            let t = m.trace().unwrap();
            m[(3, 3)] -= t;
            m
        })
    }

    fn word() -> impl Strategy<Value = Word> {
        prop::collection::vec((0usize..3, prop::bool::ANY), 0..8).prop_map(|v| {
            let text: Vec<String> = v
                .iter()
                .map(|&(g, inv)| format!("{}{}", ["x", "y", "z"][g], if inv { "^-1" } else { "" }))
                .collect();
            if text.is_empty() {
                Word::identity()
            } else {
                parse_word(&text.join(" "), &["x", "y", "z"]).unwrap()
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn split_reassembles(x in traceless()) {
            let q = QuadraticForm::diagonal(&[-1, 1, 1, 1]).unwrap();
            let s = split_components(&x, &q, Ambient::Sl).unwrap();
            let Complement::Matrix(c) = &s.complement else { unreachable!() };
            prop_assert_eq!(&(&s.so_part + c), &x);
            prop_assert!(in_so(&s.so_part, &q));
            prop_assert!(in_nu(c, &q));
            let again = split_components(c, &q, Ambient::Sl).unwrap();
            prop_assert!(again.so_part.is_zero());
            let again = split_components(&s.so_part, &q, Ambient::Sl).unwrap();
            prop_assert_eq!(again.complement, Complement::Matrix(RationalMatrix::zeros(4, 4)));
        }

        #[test]
        fn action_inverse(w in word()) {
            let m = build_module(&borromean(), ModuleKind::Nu).unwrap();
            let a = m.action(&w).unwrap();
            let ai = m.action(&w.inverse()).unwrap();
            prop_assert!((&a * &ai).is_identity());
        }
    }
}
