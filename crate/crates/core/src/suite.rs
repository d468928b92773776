//! One-shot verification of the Borromean case study.

use serde::Serialize;
use thiserror::Error;

use crate::bender::{bend, compare_up_to_signs_and_scale, tangent_cocycle, trace_derivative_matrix, BendError, Geometry};
use crate::branchbend::{
    bending_dimension, pythagorean_binding_complex, reduced_relations, regular_binding_complex, BranchError,
    BranchGeometry,
};
use crate::coeffs::{build_module, CoeffError, ModuleKind};
use crate::cohomo::{h1_report, scannell_check, CocycleSpace, CohomError, ParabolicMode};
use crate::fixture::FixtureBundle;
use crate::formats::FormatError;
use crate::ratlin::{format_rational, RationalMatrix, RationalVector};
use crate::repcore::validate_representation;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("representation failed validation: {}", .failures.join("; "))]
    InvalidRepresentation { failures: Vec<String> },
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Cohom(#[from] CohomError),
    #[error(transparent)]
    Bend(#[from] BendError),
    #[error(transparent)]
    Branch(#[from] BranchError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub description: String,
    pub expected: String,
    pub computed: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    /// Restrict to the cohomology checks of one coefficient module.
    pub coefficients: Option<ModuleKind>,
}

struct Checks(Vec<CheckResult>);

impl Checks {
    fn push(&mut self, id: &str, description: &str, expected: impl ToString, computed: impl ToString) {
        let (expected, computed) = (expected.to_string(), computed.to_string());
        self.0.push(CheckResult {
            id: id.into(),
            description: description.into(),
            passed: expected == computed,
            expected,
            computed,
        });
    }
}

/// Expected `(H¹, PH¹)` for each module on the fixture; `None` where no value is checked.
fn expected_dims(kind: ModuleKind) -> (Option<usize>, usize) {
    match kind {
        ModuleKind::Standard => (Some(3), 0),
        ModuleKind::Nu => (Some(6), 3),
        ModuleKind::Adjoint => (None, 0),
    }
}

pub fn run_fixture_suite(options: &SuiteOptions) -> Result<SuiteReport, SuiteError> {
    run_suite(&FixtureBundle::bundled()?, options)
}

/// Runs every check on `bundle`. Fails early, before any check, when the
/// representation does not validate.
pub fn run_suite(bundle: &FixtureBundle, options: &SuiteOptions) -> Result<SuiteReport, SuiteError> {
    let rep = &bundle.representation;
    let validation = validate_representation(rep);
    if !validation.passed {
        return Err(SuiteError::InvalidRepresentation {
            failures: validation.failures(),
        });
    }
    let mut checks = Checks(Vec::new());
    let kinds: Vec<ModuleKind> = match options.coefficients {
        Some(k) => vec![k],
        None => ModuleKind::ALL.to_vec(),
    };
    for kind in kinds {
        let space = CocycleSpace::new(build_module(rep, kind)?)?;
        let sub = h1_report(&space, ParabolicMode::PerSubgroup, None)?;
        let elem = h1_report(&space, ParabolicMode::PerElement, None)?;
        let (h1, ph1) = expected_dims(kind);
        let k = kind.as_str();
        if let Some(h1) = h1 {
            checks.push(&format!("h1.{k}"), &format!("dim H1 with {k} coefficients"), h1, sub.dim_h1);
        }
        checks.push(
            &format!("ph1.{k}"),
            &format!("dim PH1 (per-subgroup) with {k} coefficients"),
            ph1,
            sub.dim_ph1.unwrap_or_default(),
        );
        checks.push(
            &format!("modes_agree.{k}"),
            &format!("per-element and per-subgroup PH1 agree with {k} coefficients"),
            sub.dim_ph1.unwrap_or_default(),
            elem.dim_ph1.unwrap_or_default(),
        );
        checks.push(&format!("identities.{k}"), "internal dimension identities", true, sub.identities_hold && elem.identities_hold);
        if kind != ModuleKind::Adjoint {
            let per_cusp = space.peripheral_h0()?;
            checks.push(&format!("peripheral.{k}"), "peripheral invariants per cusp", "[1, 1, 1]", format!("{per_cusp:?}"));
            let total: usize = per_cusp.iter().sum();
            checks.push(&format!("scannell.{k}"), "dim H1 - dim PH1 = peripheral invariants", true, scannell_check(&sub, total));
        }
    }
    if options.coefficients.is_none() {
        branched_checks(bundle, &mut checks)?;
        bending_checks(bundle, &mut checks)?;
    }
    let passed = checks.0.iter().all(|c| c.passed);
    Ok(SuiteReport { checks: checks.0, passed })
}

fn branched_checks(bundle: &FixtureBundle, checks: &mut Checks) -> Result<(), SuiteError> {
    let relations = reduced_relations(&bundle.complex, BranchGeometry::So)?;
    let relations = relations.map_or_else(|| "none".to_string(), |r| format!("{r:?}"));
    checks.push("complex.relations", "reduced so-system of the subcomplex", "[[0, 1, -1, 0]]", relations);
    let d = bending_dimension(&bundle.complex, BranchGeometry::So)?;
    checks.push("complex.nullity", "nullity of the subcomplex so-system", 3, d.nullity);
    checks.push("complex.naive_bound", "naive bound c2 - 2 c1", -2, d.naive_bound);
    let failures: Vec<usize> = (3..=12)
        .filter(|&k| {
            regular_binding_complex(k, 3)
                .and_then(|c| bending_dimension(&c, BranchGeometry::So))
                .map(|d| !d.equal_weights_solve)
                .unwrap_or(true)
        })
        .collect();
    checks.push("roots_of_unity", "equal weights solve k-valent regular bindings, k = 3..12", "[]", format!("{failures:?}"));
    let mut got = Vec::new();
    for k in 4..=8 {
        let c = pythagorean_binding_complex(k, 3)?;
        got.push((bending_dimension(&c, BranchGeometry::So)?.nullity, bending_dimension(&c, BranchGeometry::Sl)?.nullity));
    }
    let expected: Vec<(usize, usize)> = (4..=8).map(|k| (k - 2, k - 3)).collect();
    checks.push("generic_rank", "(so, sl) nullities for k = 4..8 Pythagorean walls", format!("{expected:?}"), format!("{got:?}"));
    Ok(())
}

/// Tangent cocycles of every pants bending in `geometry`, in pants order.
pub fn pants_cocycles(bundle: &FixtureBundle, geometry: Geometry, space: &CocycleSpace) -> Result<Vec<RationalVector>, SuiteError> {
    bundle
        .pants_data(geometry)?
        .iter()
        .map(|d| {
            let b = bend(&bundle.representation, d)?;
            Ok(tangent_cocycle(&b.first_order, space.module())?)
        })
        .collect()
}

/// `c₀ − c₁`, `c₂ − c₃`, `c₄ − c₅`: pants sharing a stable letter, paired in order.
pub fn beta_combinations(cocycles: &[RationalVector]) -> Vec<RationalVector> {
    cocycles
        .chunks(2)
        .filter(|p| p.len() == 2)
        .map(|p| p[0].iter().zip(&p[1]).map(|(a, b)| a - b).collect())
        .collect()
}

pub fn format_matrix(m: &RationalMatrix) -> String {
    let rows: Vec<String> = m.to_string_rows().iter().map(|r| format!("[{}]", r.join(", "))).collect();
    format!("[{}]", rows.join(", "))
}

fn bending_checks(bundle: &FixtureBundle, checks: &mut Checks) -> Result<(), SuiteError> {
    let rep = &bundle.representation;
    let data = bundle.pants_data(Geometry::Sl)?;
    let f = trace_derivative_matrix(rep, &data, &bundle.words)?;
    checks.push("f.rank", "rank of the trace-derivative matrix", 6, f.rank());
    let cmp = compare_up_to_signs_and_scale(&f, &bundle.reference_f)?;
    let computed = if cmp.matches {
        format!(
            "match with scale {} and signs {:?}",
            cmp.scale.as_ref().map(format_rational).unwrap_or_default(),
            cmp.column_signs
        )
    } else {
        let ratios: Vec<String> = cmp
            .column_ratios
            .iter()
            .map(|r| r.as_ref().map(format_rational).unwrap_or_else(|| "-".into()))
            .collect();
        format!("no match; F = {}; column ratios [{}]", format_matrix(&f), ratios.join(", "))
    };
    checks.push("f.reference", "F equals the reference matrix up to column signs and one scale", "match", if cmp.matches { "match".to_string() } else { computed });

    let nu = CocycleSpace::new(build_module(rep, ModuleKind::Nu)?)?;
    let nu_cocycles = pants_cocycles(bundle, Geometry::Sl, &nu)?;
    checks.push("span.nu", "class span of the six nu bending cocycles", 6, nu.class_span_dim(&nu_cocycles)?);
    let std = CocycleSpace::new(build_module(rep, ModuleKind::Standard)?)?;
    let std_cocycles = pants_cocycles(bundle, Geometry::SoExt, &std)?;
    checks.push("span.r31", "class span of the six r31 bending cocycles", 3, std.class_span_dim(&std_cocycles)?);

    let betas = beta_combinations(&nu_cocycles);
    let cuspidal = betas.iter().map(|b| nu.is_cuspidal(b)).collect::<Result<Vec<_>, _>>()?;
    checks.push("beta.cuspidal", "beta combinations are cuspidal", "[true, true, true]", format!("{cuspidal:?}"));
    checks.push("beta.span", "class span of the beta combinations", 3, nu.class_span_dim(&betas)?);
    Ok(())
}
