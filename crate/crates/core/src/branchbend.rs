//! Branched bending complexes and their per-binding linear systems.
//!
//! Each wall carries one unknown weight. Around each binding the weights of
//! the incident walls must balance: two equations per binding in hyperbolic
//! geometry, three in projective geometry.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::ratlin::{rat, ratio, rational_to_f64, FloatMatrix, LinalgError, Rational, RationalMatrix, DEFAULT_RANK_TOLERANCE};

/// Environment variable overriding the float rank tolerance.
pub const FLOAT_TOL_ENV: &str = "BENDLAB_FLOAT_TOL";

const UNIT_CIRCLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BranchError {
    #[error("angle ({cos}, {sin}) is not on the unit circle")]
    OffCircle { cos: String, sin: String },
    #[error("cannot parse angle {0:?}")]
    BadAngle(String),
    #[error("duplicate wall {0:?}")]
    DuplicateWall(String),
    #[error("binding {binding:?} references undeclared wall {wall:?}")]
    UnknownWall { binding: String, wall: String },
    #[error("binding {0:?} has no incidences")]
    EmptyBinding(String),
    #[error("binding {0:?}: the first incidence must have angle 0 and sign +1")]
    NotNormalized(String),
    #[error("binding {binding:?}: sign must be +1 or -1, got {sign}")]
    BadSign { binding: String, sign: i64 },
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("invalid float tolerance {0:?}")]
    BadTolerance(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("unknown geometry {0:?} (expected so or sl)")]
    UnknownGeometry(String),
}

/// An angle stored as its cosine and sine.
#[derive(Debug, Clone, PartialEq)]
pub enum Angle {
    Exact { cos: Rational, sin: Rational },
    Float { cos: f64, sin: f64 },
}

impl Angle {
    pub fn zero() -> Self {
        Angle::Exact {
            cos: Rational::one(),
            sin: Rational::zero(),
        }
    }

    pub fn exact(cos: Rational, sin: Rational) -> Result<Self, BranchError> {
        if &cos * &cos + &sin * &sin != Rational::one() {
            return Err(BranchError::OffCircle {
                cos: cos.to_string(),
                sin: sin.to_string(),
            });
        }
        Ok(Angle::Exact { cos, sin })
    }

    pub fn float(cos: f64, sin: f64) -> Result<Self, BranchError> {
        if !((cos * cos + sin * sin - 1.0).abs() <= UNIT_CIRCLE_SLACK) {
            return Err(BranchError::OffCircle {
                cos: cos.to_string(),
                sin: sin.to_string(),
            });
        }
        Ok(Angle::Float { cos, sin })
    }

    /// `k·π/q`; exact when it is a multiple of `π/2`.
    pub fn pi_fraction(k: i64, q: i64) -> Result<Self, BranchError> {
        if q == 0 {
            return Err(BranchError::BadAngle(format!("{k}pi/{q}")));
        }
        // Multiple of π/2 iff 2k/q is an integer.
        if (2 * k) % q == 0 {
            let quarter = ((2 * k / q) % 4 + 4) % 4;
            let (c, s) = [(1, 0), (0, 1), (-1, 0), (0, -1)][quarter as usize];
            return Ok(Angle::Exact {
                cos: rat(c),
                sin: rat(s),
            });
        }
        Ok(Self::from_radians(k as f64 * PI / q as f64))
    }

    pub fn from_radians(theta: f64) -> Self {
        Angle::Float {
            cos: theta.cos(),
            sin: theta.sin(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Angle::Exact { .. })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Angle::Exact { cos, sin } => cos.is_one() && sin.is_zero(),
            Angle::Float { cos, sin } => *cos == 1.0 && *sin == 0.0,
        }
    }

    pub fn cos_sin_f64(&self) -> (f64, f64) {
        match self {
            Angle::Exact { cos, sin } => (rational_to_f64(cos), rational_to_f64(sin)),
            Angle::Float { cos, sin } => (*cos, *sin),
        }
    }

    /// The angle `2θ`.
    pub fn doubled(&self) -> Self {
        match self {
            Angle::Exact { cos, sin } => Angle::Exact {
                cos: cos * cos - sin * sin,
                sin: rat(2) * cos * sin,
            },
            Angle::Float { cos, sin } => Angle::Float {
                cos: cos * cos - sin * sin,
                sin: 2.0 * cos * sin,
            },
        }
    }
}

impl FromStr for Angle {
    type Err = BranchError;

    /// Accepts `0`, `pi`, `pi/2`, `3pi/2`, `2*pi/5`, `-pi/3` and the like.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || BranchError::BadAngle(text.to_string());
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "0" {
            return Ok(Angle::zero());
        }
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (n, d.parse::<i64>().map_err(|_| bad())?),
            None => (t.as_str(), 1),
        };
        let coeff = num.strip_suffix("pi").ok_or_else(bad)?;
        let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
        let k = match coeff {
            "" | "+" => 1,
            "-" => -1,
            c => c.parse::<i64>().map_err(|_| bad())?,
        };
        Self::pi_fraction(k, den)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Exact { cos, sin } => write!(f, "(cos {cos}, sin {sin})"),
            Angle::Float { cos, sin } => write!(f, "(cos {cos:.12}, sin {sin:.12})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Incidence {
    pub wall: String,
    pub angle: Angle,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binding {
    pub name: String,
    pub incidences: Vec<Incidence>,
}

/// Walls and bindings of a branched complex in dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BendingComplex {
    dimension: usize,
    walls: Vec<String>,
    bindings: Vec<Binding>,
}

impl BendingComplex {
    pub fn new(dimension: usize, walls: Vec<String>, bindings: Vec<Binding>) -> Result<Self, BranchError> {
        if dimension < 2 {
            return Err(BranchError::BadDimension(dimension));
        }
        for (i, w) in walls.iter().enumerate() {
            if walls[..i].contains(w) {
                return Err(BranchError::DuplicateWall(w.clone()));
            }
        }
        for b in &bindings {
            let first = b.incidences.first().ok_or_else(|| BranchError::EmptyBinding(b.name.clone()))?;
            if !first.angle.is_zero() || first.sign != 1 {
                return Err(BranchError::NotNormalized(b.name.clone()));
            }
            for inc in &b.incidences {
                if !walls.contains(&inc.wall) {
                    return Err(BranchError::UnknownWall {
                        binding: b.name.clone(),
                        wall: inc.wall.clone(),
                    });
                }
                if inc.sign != 1 && inc.sign != -1 {
                    return Err(BranchError::BadSign {
                        binding: b.name.clone(),
                        sign: inc.sign.into(),
                    });
                }
            }
        }
        Ok(Self {
            dimension,
            walls,
            bindings,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn walls(&self) -> &[String] {
        &self.walls
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }

    pub fn is_exact(&self) -> bool {
        self.bindings.iter().flat_map(|b| &b.incidences).all(|i| i.angle.is_exact())
    }

    /// Copy with an extra wall that meets no binding.
    pub fn with_free_wall(&self, name: impl Into<String>) -> Result<Self, BranchError> {
        let mut walls = self.walls.clone();
        walls.push(name.into());
        Self::new(self.dimension, walls, self.bindings.clone())
    }

    fn wall_index(&self) -> BTreeMap<&str, usize> {
        self.walls.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchGeometry {
    So,
    Sl,
}

impl BranchGeometry {
    /// Equations per binding.
    pub fn equations_per_binding(self) -> i64 {
        match self {
            BranchGeometry::So => 2,
            BranchGeometry::Sl => 3,
        }
    }
}

impl FromStr for BranchGeometry {
    type Err = BranchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "so" => Ok(BranchGeometry::So),
            "sl" => Ok(BranchGeometry::Sl),
            other => Err(BranchError::UnknownGeometry(other.to_string())),
        }
    }
}

impl fmt::Display for BranchGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchGeometry::So => "so",
            BranchGeometry::Sl => "sl",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemMatrix {
    Exact(RationalMatrix),
    Float(FloatMatrix),
}

impl SystemMatrix {
    pub fn rows(&self) -> usize {
        match self {
            SystemMatrix::Exact(m) => m.rows(),
            SystemMatrix::Float(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            SystemMatrix::Exact(m) => m.cols(),
            SystemMatrix::Float(m) => m.cols(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            SystemMatrix::Exact(m) => m.rank(),
            SystemMatrix::Float(m) => m.rank(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BendingSystem {
    pub matrix: SystemMatrix,
    pub warnings: Vec<String>,
}

/// Reads [`FLOAT_TOL_ENV`], falling back to the default tolerance.
pub fn float_tolerance_from_env() -> Result<f64, BranchError> {
    match std::env::var(FLOAT_TOL_ENV) {
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(BranchError::BadTolerance(v)),
        },
        Err(_) => Ok(DEFAULT_RANK_TOLERANCE),
    }
}

pub fn build_system(complex: &BendingComplex, geometry: BranchGeometry) -> Result<BendingSystem, BranchError> {
    build_system_with_tolerance(complex, geometry, DEFAULT_RANK_TOLERANCE)
}

/// One block of rows per binding, one column per wall. Repeated incidences of
/// a wall add into its column. The `so` rows ignore signs.
pub fn build_system_with_tolerance(
    complex: &BendingComplex,
    geometry: BranchGeometry,
    tolerance: f64,
) -> Result<BendingSystem, BranchError> {
    let per = geometry.equations_per_binding() as usize;
    let rows = per * complex.bindings.len();
    let cols = complex.walls.len();
    let index = complex.wall_index();
    let n = complex.dimension as i64;
    let incidences = || complex.bindings.iter().flat_map(|b| &b.incidences);
    let any_exact = incidences().any(|i| i.angle.is_exact());
    let any_float = incidences().any(|i| !i.angle.is_exact());
    let mut warnings = Vec::new();

    if !any_float {
        let (alpha, beta) = (ratio(1 - n, 2), ratio(1 + n, 2));
        let mut m = RationalMatrix::zeros(rows, cols);
        for (bi, b) in complex.bindings.iter().enumerate() {
            for inc in &b.incidences {
                let Angle::Exact { cos, sin } = &inc.angle else { unreachable!() };
                let j = index[inc.wall.as_str()];
                let r0 = bi * per;
                match geometry {
                    BranchGeometry::So => {
                        m[(r0, j)] += cos;
                        m[(r0 + 1, j)] += sin;
                    }
                    BranchGeometry::Sl => {
                        let Angle::Exact { cos: c2, sin: s2 } = inc.angle.doubled() else { unreachable!() };
                        let sign = rat(inc.sign.into());
                        m[(r0, j)] += &sign * (&alpha + &beta * &c2);
                        m[(r0 + 1, j)] += &sign * (&alpha - &beta * &c2);
                        m[(r0 + 2, j)] += &sign * &beta * &s2;
                    }
                }
            }
        }
        return Ok(BendingSystem {
            matrix: SystemMatrix::Exact(m),
            warnings,
        });
    }

    if any_exact {
        warnings.push("mixed exact and float angles; using the float backend".to_string());
    }
    warnings.push(format!("float backend: ranks are approximate (relative tolerance {tolerance:e})"));
    let (alpha, beta) = ((1 - n) as f64 / 2.0, (1 + n) as f64 / 2.0);
    let mut data = vec![0.0; rows * cols];
    for (bi, b) in complex.bindings.iter().enumerate() {
        for inc in &b.incidences {
            let j = index[inc.wall.as_str()];
            let r0 = bi * per;
            let (c, s) = inc.angle.cos_sin_f64();
            match geometry {
                BranchGeometry::So => {
                    data[r0 * cols + j] += c;
                    data[(r0 + 1) * cols + j] += s;
                }
                BranchGeometry::Sl => {
                    let (c2, s2) = (c * c - s * s, 2.0 * c * s);
                    let sign = f64::from(inc.sign);
                    data[r0 * cols + j] += sign * (alpha + beta * c2);
                    data[(r0 + 1) * cols + j] += sign * (alpha - beta * c2);
                    data[(r0 + 2) * cols + j] += sign * beta * s2;
                }
            }
        }
    }
    Ok(BendingSystem {
        matrix: SystemMatrix::Float(FloatMatrix::new(rows, cols, data, tolerance)?),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BendingDimension {
    pub nullity: usize,
    pub rank: usize,
    /// `c_{n−1} − A·c_{n−2}` with `A` equations per binding.
    pub naive_bound: i64,
    pub equal_weights_solve: bool,
    pub exact: bool,
    pub tolerance: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn bending_dimension(complex: &BendingComplex, geometry: BranchGeometry) -> Result<BendingDimension, BranchError> {
    bending_dimension_with_tolerance(complex, geometry, DEFAULT_RANK_TOLERANCE)
}

pub fn bending_dimension_with_tolerance(
    complex: &BendingComplex,
    geometry: BranchGeometry,
    tolerance: f64,
) -> Result<BendingDimension, BranchError> {
    let system = build_system_with_tolerance(complex, geometry, tolerance)?;
    let cols = system.matrix.cols();
    let rank = system.matrix.rank();
    let (equal_weights_solve, exact, tol) = match &system.matrix {
        SystemMatrix::Exact(m) => {
            let ones = vec![Rational::one(); cols];
            (m.mul_vec(&ones)?.iter().all(Zero::is_zero), true, None)
        }
        SystemMatrix::Float(m) => {
            let residual = m.mul_vec(&vec![1.0; cols]).iter().fold(0.0f64, |a, r| a.max(r.abs()));
            (residual <= tolerance * m.max_abs().max(1.0), false, Some(tolerance))
        }
    };
    let walls = complex.walls.len() as i64;
    let bindings = complex.bindings.len() as i64;
    Ok(BendingDimension {
        nullity: cols - rank,
        rank,
        naive_bound: walls - geometry.equations_per_binding() * bindings,
        equal_weights_solve,
        exact,
        tolerance: tol,
        warnings: system.warnings,
    })
}

/// The nonzero rows of the reduced system, each scaled so that its first
/// nonzero entry is positive and all entries are coprime integers. `None` for
/// float systems.
pub fn reduced_relations(complex: &BendingComplex, geometry: BranchGeometry) -> Result<Option<Vec<Vec<i64>>>, BranchError> {
    let system = build_system(complex, geometry)?;
    let SystemMatrix::Exact(m) = system.matrix else {
        return Ok(None);
    };
    let rref = m.rref_rank();
    let mut out = Vec::new();
    for i in 0..rref.rank {
        let row = rref.reduced.row(i);
        let lcm = row.iter().fold(num_bigint::BigInt::one(), |acc, e| num_integer::Integer::lcm(&acc, e.denom()));
        let ints: Vec<num_bigint::BigInt> = row.iter().map(|e| (e * Rational::from_integer(lcm.clone())).to_integer()).collect();
        let g = ints.iter().fold(num_bigint::BigInt::zero(), |acc, e| num_integer::Integer::gcd(&acc, e));
        let lead_negative = ints.iter().find(|e| !e.is_zero()).is_some_and(|e| e.is_negative());
        let scaled: Option<Vec<i64>> = ints
            .iter()
            .map(|e| {
                let v = e / &g;
                (if lead_negative { -v } else { v }).to_i64()
            })
            .collect();
        out.push(scaled.ok_or_else(|| BranchError::BadAngle("relation coefficients overflow".into()))?);
    }
    Ok(Some(out))
}

/// Single binding with `k` distinct walls at angles `2πj/k`, all signs +1.
pub fn regular_binding_complex(k: usize, dimension: usize) -> Result<BendingComplex, BranchError> {
    let walls: Vec<String> = (1..=k).map(|j| format!("w{j}")).collect();
    let incidences = (0..k)
        .map(|j| {
            Ok(Incidence {
                wall: walls[j].clone(),
                angle: Angle::pi_fraction(2 * j as i64, k as i64)?,
                sign: 1,
            })
        })
        .collect::<Result<Vec<_>, BranchError>>()?;
    BendingComplex::new(
        dimension,
        walls,
        vec![Binding {
            name: "B".into(),
            incidences,
        }],
    )
}

/// Angles with rational cosine and sine, as `(hypotenuse, cos·h, sin·h)`.
pub const PYTHAGOREAN_ANGLES: [(i64, i64, i64); 8] =
    [(1, 1, 0), (5, 3, 4), (5, -4, 3), (5, -3, -4), (5, 4, -3), (13, 5, 12), (13, -12, 5), (17, 8, 15)];

/// Single binding with `k ≤ 8` distinct walls at the first `k`
/// [`PYTHAGOREAN_ANGLES`], all signs +1.
pub fn pythagorean_binding_complex(k: usize, dimension: usize) -> Result<BendingComplex, BranchError> {
    if k > PYTHAGOREAN_ANGLES.len() {
        return Err(BranchError::BadAngle(format!("only {} Pythagorean angles are tabulated", PYTHAGOREAN_ANGLES.len())));
    }
    let walls: Vec<String> = (1..=k).map(|j| format!("w{j}")).collect();
    let incidences = PYTHAGOREAN_ANGLES[..k]
        .iter()
        .zip(&walls)
        .map(|(&(h, c, s), wall)| {
            Ok(Incidence {
                wall: wall.clone(),
                angle: Angle::exact(ratio(c, h), ratio(s, h))?,
                sign: 1,
            })
        })
        .collect::<Result<Vec<_>, BranchError>>()?;
    BendingComplex::new(
        dimension,
        walls,
        vec![Binding {
            name: "P".into(),
            incidences,
        }],
    )
}
