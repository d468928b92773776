//! Bending along totally geodesic surfaces, at first order.
//!
//! For a wall with surface group `S` and HNN stable letter `g`, the bending
//! generator `v` spans the centralizer of `ρ(S)` in the ambient Lie algebra,
//! and the first-order deformation changes only the image of `g`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::coeffs::{split_components, Ambient, CoeffError, CoefficientModule, Complement, ModuleKind};
use crate::freewords::{Word, WordError};
use crate::ratlin::{rat, LinalgError, Rational, RationalMatrix, RationalVector};
use crate::repcore::{first_order_evaluate, FirstOrderRep, RepError, Representation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BendError {
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("centralizer dimension {found} != 1")]
    CentralizerDimension { found: usize },
    #[error("stable letter {0} is not a single generator")]
    StableLetterNotGenerator(String),
    #[error("bending generator cannot be normalized: {0}")]
    NotNormalizable(String),
    #[error("{datum}: neither v·ρ(g) nor ρ(g)·v kills every relator at first order")]
    NoHomomorphicSide { datum: String },
    #[error("{what} needs {expected} geometry")]
    GeometryMismatch { what: String, expected: Geometry },
    #[error("matrices have different shapes ({0})")]
    Shape(String),
    #[error("unknown geometry {0:?} (expected sl or so)")]
    UnknownGeometry(String),
    #[error("unknown side {0:?} (expected left, right or auto)")]
    UnknownSide(String),
}

/// Ambient algebra for the bending generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// `𝔰𝔬(Q ⊕ 1)`, with `ρ` embedded block-diagonally.
    SoExt,
    /// `𝔰𝔩_{n+1}`.
    Sl,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::SoExt => "so",
            Geometry::Sl => "sl",
        })
    }
}

impl FromStr for Geometry {
    type Err = BendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "so" | "so_ext" => Ok(Geometry::SoExt),
            "sl" => Ok(Geometry::Sl),
            other => Err(BendError::UnknownGeometry(other.to_string())),
        }
    }
}

/// Which side of `ρ(g)` the generator multiplies on. `Auto` picks the first
/// of left, right that is a homomorphism at first order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HnnSide {
    Left,
    Right,
    Auto,
}

impl FromStr for HnnSide {
    type Err = BendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => Ok(HnnSide::Left),
            "right" => Ok(HnnSide::Right),
            "auto" => Ok(HnnSide::Auto),
            other => Err(BendError::UnknownSide(other.to_string())),
        }
    }
}

impl fmt::Display for HnnSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HnnSide::Left => "left",
            HnnSide::Right => "right",
            HnnSide::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BendingDatum {
    pub name: String,
    pub surface_subgroup: Vec<Word>,
    pub stable_letter: Word,
    pub geometry: Geometry,
    pub side: HnnSide,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BendingGenerator {
    pub v: RationalMatrix,
    pub geometry: Geometry,
}

/// Base representation in the ambient group of `geometry`.
pub fn ambient_representation(rep: &Representation, geometry: Geometry) -> Representation {
    match geometry {
        Geometry::Sl => rep.clone(),
        Geometry::SoExt => rep.embed_so_ext(),
    }
}

/// Coefficients of `det(λI − A)`, constant term first (Faddeev–LeVerrier).
pub fn characteristic_polynomial(a: &RationalMatrix) -> Result<Vec<Rational>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let id = RationalMatrix::identity(n);
    let mut m = RationalMatrix::zeros(n, n);
    for k in 1..=n {
        m = &(a * &m) + &id.scale(&coeffs[n - k + 1]);
        let am = a * &m;
        coeffs[n - k] = -am.trace()? / rat(k as i64);
    }
    Ok(coeffs)
}

/// Product of polynomials given constant term first.
pub fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `(λ + n)(λ − 1)ⁿ`, constant term first.
pub fn sl_bending_char_poly(n: usize) -> Vec<Rational> {
    let mut p = vec![rat(n as i64), rat(1)];
    for _ in 0..n {
        p = poly_mul(&p, &[rat(-1), rat(1)]);
    }
    p
}

// Row encoding of X·M − M·X = 0 in the flattened unknown X.
fn commutation_rows(m: &RationalMatrix) -> Vec<Vec<Rational>> {
    let s = m.rows();
    let mut rows = Vec::with_capacity(s * s);
    for i in 0..s {
        for j in 0..s {
            let mut row = vec![Rational::zero(); s * s];
            for k in 0..s {
                // (XM)_{ij} = Σ_k X_{ik} M_{kj}
                row[i * s + k] += &m[(k, j)];
                // (MX)_{ij} = Σ_k M_{ik} X_{kj}
                row[k * s + j] -= &m[(i, k)];
            }
            rows.push(row);
        }
    }
    rows
}

// Row encoding of XᵀQ + QX = 0.
fn skew_rows(q: &RationalMatrix) -> Vec<Vec<Rational>> {
    let s = q.rows();
    let mut rows = Vec::with_capacity(s * s);
    for i in 0..s {
        for j in 0..s {
            let mut row = vec![Rational::zero(); s * s];
            for k in 0..s {
                row[k * s + i] += &q[(k, j)];
                row[k * s + j] += &q[(i, k)];
            }
            rows.push(row);
        }
    }
    rows
}

/// Solution space of the centralizer equations, before normalization.
pub fn centralizer_basis(rep: &Representation, subgroup: &[Word], geometry: Geometry) -> Result<Vec<RationalMatrix>, BendError> {
    let base = ambient_representation(rep, geometry);
    let s = base.size();
    let mut rows = match geometry {
        Geometry::Sl => vec![(0..s * s)
            .map(|p| if p % (s + 1) == 0 { Rational::one() } else { Rational::zero() })
            .collect::<Vec<_>>()],
        Geometry::SoExt => skew_rows(base.form().matrix()),
    };
    for w in subgroup {
        rows.extend(commutation_rows(&base.evaluate(w)?));
    }
    let system = RationalMatrix::from_rows(rows)?;
    Ok(system
        .nullspace()
        .into_iter()
        .map(|v| RationalMatrix::from_flat(s, s, v).expect("s*s entries"))
        .collect())
}

/// The normalized generator of the one-dimensional centralizer.
///
/// In `𝔰𝔩` the scale is fixed by the spectrum `(−n, 1, …, 1)`, which also
/// fixes the sign. In `𝔰𝔬(Q ⊕ 1)` the scale is fixed by `v³ = −v` and the sign
/// by making the first nonzero entry positive.
pub fn centralizer_generator(rep: &Representation, datum: &BendingDatum) -> Result<BendingGenerator, BendError> {
    let basis = centralizer_basis(rep, &datum.surface_subgroup, datum.geometry)?;
    if basis.len() != 1 {
        return Err(BendError::CentralizerDimension { found: basis.len() });
    }
    let v0 = basis.into_iter().next().expect("one vector");
    let v = match datum.geometry {
        Geometry::Sl => normalize_sl(&v0, rep.ambient_dimension())?,
        Geometry::SoExt => normalize_so_ext(&v0)?,
    };
    Ok(BendingGenerator {
        v,
        geometry: datum.geometry,
    })
}

/// Solves `target = Σ coeffs[k]·basis[k]` entrywise.
fn solve_combination(basis: &[&RationalMatrix], target: &RationalMatrix) -> Result<Option<RationalVector>, LinalgError> {
    let len = target.rows() * target.cols();
    let cols: Vec<RationalVector> = basis.iter().map(|b| b.as_slice().to_vec()).collect();
    RationalMatrix::from_columns(len, &cols)?.in_column_space(target.as_slice())
}

fn normalize_sl(v0: &RationalMatrix, n: usize) -> Result<RationalMatrix, BendError> {
    if n < 2 {
        return Err(BendError::NotNormalizable("sl normalization needs n >= 2".into()));
    }
    // A generator c·v with v² = (1 − n)v + nI satisfies (cv)² = c(1 − n)(cv) + c²n I.
    let id = RationalMatrix::identity(v0.rows());
    let sq = v0 * v0;
    let ab = solve_combination(&[v0, &id], &sq)?
        .ok_or_else(|| BendError::NotNormalizable("v has more than two eigenvalues".into()))?;
    let c = &ab[0] / rat(1 - n as i64);
    if c.is_zero() {
        return Err(BendError::NotNormalizable("v is nilpotent".into()));
    }
    let v = v0.scale(&c.recip());
    if characteristic_polynomial(&v)? != sl_bending_char_poly(n) {
        return Err(BendError::NotNormalizable("spectrum is not (-n, 1, ..., 1)".into()));
    }
    Ok(v)
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd): (BigInt, BigInt) = (n.sqrt(), d.sqrt());
    (&sn * &sn == *n && &sd * &sd == *d).then(|| Rational::new(sn, sd))
}

fn normalize_so_ext(v0: &RationalMatrix) -> Result<RationalMatrix, BendError> {
    let cube = &(v0 * v0) * v0;
    let x = solve_combination(&[v0], &cube)?
        .ok_or_else(|| BendError::NotNormalizable("v^3 is not a multiple of v".into()))?;
    let k = -x[0].clone();
    if !k.is_positive() {
        return Err(BendError::NotNormalizable(format!("v^3 = -k v with k = {k} <= 0")));
    }
    let root = rational_sqrt(&k)
        .ok_or_else(|| BendError::NotNormalizable(format!("k = {k} is not the square of a rational")))?;
    let mut v = v0.scale(&root.recip());
    if v.as_slice().iter().find(|e| !e.is_zero()).is_some_and(Signed::is_negative) {
        v = -&v;
    }
    if v.rank() != 2 {
        return Err(BendError::NotNormalizable(format!("rank {} != 2", v.rank())));
    }
    Ok(v)
}

fn stable_generator(datum: &BendingDatum) -> Result<String, BendError> {
    match datum.stable_letter.letters() {
        [l] if l.exponent == 1 => Ok(l.generator.clone()),
        _ => Err(BendError::StableLetterNotGenerator(datum.stable_letter.to_string())),
    }
}

fn first_order_on_side(base: &Representation, g: &str, v: &RationalMatrix, side: HnnSide) -> Result<FirstOrderRep, BendError> {
    let m = base
        .image(g)
        .ok_or_else(|| BendError::StableLetterNotGenerator(g.to_string()))?;
    if v.rows() != m.rows() || v.cols() != m.cols() {
        return Err(BendError::Shape(format!("v is {}x{}, images are {}x{}", v.rows(), v.cols(), m.rows(), m.cols())));
    }
    let e = match side {
        HnnSide::Right => m * v,
        _ => v * m,
    };
    Ok(FirstOrderRep::new(base.clone(), BTreeMap::from([(g.to_string(), e)]))?)
}

/// Whether every relator has zero first-order part.
pub fn relators_vanish(fo: &FirstOrderRep) -> Result<bool, BendError> {
    for r in fo.base().presentation().relators() {
        if !first_order_evaluate(fo, r)?.1.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The concrete side `hnn_first_order` uses for this datum.
pub fn resolve_side(rep: &Representation, datum: &BendingDatum, v: &BendingGenerator) -> Result<HnnSide, BendError> {
    if datum.side != HnnSide::Auto {
        return Ok(datum.side);
    }
    let g = stable_generator(datum)?;
    let base = ambient_representation(rep, datum.geometry);
    for side in [HnnSide::Left, HnnSide::Right] {
        if relators_vanish(&first_order_on_side(&base, &g, &v.v, side)?)? {
            return Ok(side);
        }
    }
    Err(BendError::NoHomomorphicSide {
        datum: datum.name.clone(),
    })
}

/// First-order bending: the stable letter `g` gets derivative `v·ρ(g)` (left)
/// or `ρ(g)·v` (right); every other generator gets zero.
pub fn hnn_first_order(rep: &Representation, datum: &BendingDatum, v: &BendingGenerator) -> Result<FirstOrderRep, BendError> {
    let g = stable_generator(datum)?;
    let side = resolve_side(rep, datum, v)?;
    let base = ambient_representation(rep, datum.geometry);
    first_order_on_side(&base, &g, &v.v, side)
}

/// `c(g) = E_g·M_g⁻¹` per generator, projected to the invariant complement and
/// written in module coordinates.
pub fn tangent_cocycle(fo: &FirstOrderRep, module: &CoefficientModule) -> Result<RationalVector, BendError> {
    let module_size = module.representation().size();
    let base_size = fo.base().size();
    let (ambient, form) = match module.kind() {
        ModuleKind::Nu if base_size == module_size => (Ambient::Sl, module.representation().form()),
        ModuleKind::Standard if base_size == module_size + 1 => (Ambient::SoExt, module.representation().form()),
        ModuleKind::Nu => {
            return Err(BendError::GeometryMismatch {
                what: "nu coefficients".into(),
                expected: Geometry::Sl,
            })
        }
        _ => {
            return Err(BendError::GeometryMismatch {
                what: format!("{} coefficients", module.kind()),
                expected: Geometry::SoExt,
            })
        }
    };
    let mut out = Vec::with_capacity(module.dim() * fo.base().presentation().generators().len());
    for g in fo.base().presentation().generators() {
        let e = fo.derivative(g).expect("every generator has a derivative");
        let minv = fo.base().image_inverse(g).expect("every generator has an image");
        let c = e * minv;
        match split_components(&c, form, ambient)?.complement {
            Complement::Matrix(x) => out.extend(module.coordinates(&x)?),
            Complement::Vector(u) => out.extend(u),
        }
    }
    Ok(out)
}

/// Entry `(i, j)`: derivative at `t = 0` of `tr ρ_t(words[i])` under the
/// bending for `data[j]`.
pub fn trace_derivative_matrix(rep: &Representation, data: &[BendingDatum], words: &[Word]) -> Result<RationalMatrix, BendError> {
    let mut f = RationalMatrix::zeros(words.len(), data.len());
    for (j, datum) in data.iter().enumerate() {
        if datum.geometry != Geometry::Sl {
            return Err(BendError::GeometryMismatch {
                what: "trace derivative matrix".into(),
                expected: Geometry::Sl,
            });
        }
        let v = centralizer_generator(rep, datum)?;
        let fo = hnn_first_order(rep, datum, &v)?;
        for (i, w) in words.iter().enumerate() {
            f[(i, j)] = first_order_evaluate(&fo, w)?.1.trace()?;
        }
    }
    Ok(f)
}

/// Everything computed for one wall.
#[derive(Debug, Clone)]
pub struct Bending {
    pub datum: BendingDatum,
    pub generator: BendingGenerator,
    pub side: HnnSide,
    pub first_order: FirstOrderRep,
}

pub fn bend(rep: &Representation, datum: &BendingDatum) -> Result<Bending, BendError> {
    let generator = centralizer_generator(rep, datum)?;
    let side = resolve_side(rep, datum, &generator)?;
    let first_order = hnn_first_order(rep, datum, &generator)?;
    Ok(Bending {
        datum: datum.clone(),
        generator,
        side,
        first_order,
    })
}

/// Outcome of comparing a computed matrix with a reference one up to a sign
/// per column and one global scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixComparison {
    pub matches: bool,
    /// `computed = scale · reference · diag(signs)` when `matches`.
    pub scale: Option<Rational>,
    pub column_signs: Vec<Option<i8>>,
    /// `computed[:, j] = ratio · reference[:, j]`, when the columns are proportional.
    pub column_ratios: Vec<Option<Rational>>,
    /// For each computed column, every reference column it is proportional to.
    pub proportional_reference_columns: Vec<Vec<(usize, Rational)>>,
}

fn proportionality(a: &[Rational], b: &[Rational]) -> Option<Rational> {
    let k = b.iter().position(|e| !e.is_zero())?;
    let r = &a[k] / &b[k];
    if r.is_zero() {
        return None;
    }
    a.iter().zip(b).all(|(x, y)| *x == &r * y).then_some(r)
}

pub fn compare_up_to_signs_and_scale(computed: &RationalMatrix, reference: &RationalMatrix) -> Result<MatrixComparison, BendError> {
    if computed.rows() != reference.rows() || computed.cols() != reference.cols() {
        return Err(BendError::Shape(format!(
            "{}x{} vs {}x{}",
            computed.rows(),
            computed.cols(),
            reference.rows(),
            reference.cols()
        )));
    }
    let cols = computed.cols();
    let column_ratios: Vec<Option<Rational>> = (0..cols)
        .map(|j| proportionality(&computed.column(j), &reference.column(j)))
        .collect();
    let scale = column_ratios.first().cloned().flatten().map(|r| r.abs());
    let matches = scale.as_ref().is_some_and(|s| {
        column_ratios
            .iter()
            .all(|r| r.as_ref().is_some_and(|r| &r.abs() == s))
    });
    let column_signs = column_ratios
        .iter()
        .map(|r| r.as_ref().map(|r| if r.is_negative() { -1 } else { 1 }))
        .collect();
    let proportional_reference_columns = (0..cols)
        .map(|j| {
            let cj = computed.column(j);
            (0..cols)
                .filter_map(|k| proportionality(&cj, &reference.column(k)).map(|r| (k, r)))
                .collect()
        })
        .collect();
    Ok(MatrixComparison {
        matches,
        scale: if matches { scale } else { None },
        column_signs,
        column_ratios,
        proportional_reference_columns,
    })
}
