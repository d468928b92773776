//! Acceptance run on the bundled Borromean fixture. Prints one PASS/FAIL line
//! per criterion and exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use bendlab_core::bender::{bend, compare_up_to_signs_and_scale, trace_derivative_matrix, Bending, Geometry};
use bendlab_core::branchbend::{
    bending_dimension, pythagorean_binding_complex, reduced_relations, regular_binding_complex, BranchGeometry,
};
use bendlab_core::coeffs::{build_module, ModuleKind};
use bendlab_core::cohomo::{h1_report, CocycleSpace, CohomologyReport, ParabolicMode};
use bendlab_core::fixture::FixtureBundle;
use bendlab_core::freewords::{fox_derivative, GroupRingElem, Letter, Word};
use bendlab_core::ratlin::{format_rational, Rational, RationalMatrix};
use bendlab_core::repcore::{first_order_evaluate, validate_representation, FirstOrderRep, Representation};
use bendlab_core::suite::{beta_combinations, format_matrix, pants_cocycles};
use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn(&Ctx) -> Outcome);

const CASES: u32 = 1000;

struct Ctx {
    bundle: FixtureBundle,
    spaces: BTreeMap<&'static str, CocycleSpace>,
}

impl Ctx {
    fn space(&self, kind: ModuleKind) -> &CocycleSpace {
        &self.spaces[kind.as_str()]
    }

    fn report(&self, kind: ModuleKind, mode: ParabolicMode) -> Result<CohomologyReport, String> {
        h1_report(self.space(kind), mode, None).map_err(|e| e.to_string())
    }

    fn bendings(&self, geometry: Geometry) -> Result<Vec<Bending>, String> {
        let data = self.bundle.pants_data(geometry).map_err(|e| e.to_string())?;
        data.iter()
            .map(|d| bend(&self.bundle.representation, d).map_err(|e| e.to_string()))
            .collect()
    }
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn c1(ctx: &Ctx) -> Outcome {
    let r = ctx.report(ModuleKind::Standard, ParabolicMode::PerSubgroup)?;
    let ph1 = r.dim_ph1.unwrap_or(usize::MAX);
    Ok((r.dim_h1 == 3 && ph1 == 0, format!("H1 = {}, PH1 = {ph1}", r.dim_h1)))
}

fn c2(ctx: &Ctx) -> Outcome {
    let r = ctx.report(ModuleKind::Nu, ParabolicMode::PerSubgroup)?;
    let ph1 = r.dim_ph1.unwrap_or(usize::MAX);
    Ok((r.dim_h1 == 6 && ph1 == 3, format!("H1 = {}, PH1 = {ph1}", r.dim_h1)))
}

fn c3(ctx: &Ctx) -> Outcome {
    let r = ctx.report(ModuleKind::Adjoint, ParabolicMode::PerSubgroup)?;
    let ph1 = r.dim_ph1.unwrap_or(usize::MAX);
    Ok((ph1 == 0, format!("PH1 = {ph1} (H1 = {})", r.dim_h1)))
}

fn c4(ctx: &Ctx) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in [ModuleKind::Standard, ModuleKind::Nu] {
        let r = ctx.report(kind, ParabolicMode::PerSubgroup)?;
        let per_cusp = ctx.space(kind).peripheral_h0().map_err(err)?;
        let diff = r.dim_h1 - r.dim_ph1.unwrap_or(r.dim_h1);
        ok &= diff == 3 && per_cusp == [1, 1, 1];
        parts.push(format!("{}: H1 - PH1 = {diff}, per cusp {per_cusp:?}", kind.as_str()));
    }
    Ok((ok, parts.join("; ")))
}

fn c5(ctx: &Ctx) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in ModuleKind::ALL {
        let a = ctx.report(kind, ParabolicMode::PerElement)?.dim_ph1;
        let b = ctx.report(kind, ParabolicMode::PerSubgroup)?.dim_ph1;
        ok &= a == b && a.is_some();
        parts.push(format!("{}: {a:?} vs {b:?}", kind.as_str()));
    }
    Ok((ok, parts.join("; ")))
}

fn c6(ctx: &Ctx) -> Outcome {
    let complex = &ctx.bundle.complex;
    let relations = reduced_relations(complex, BranchGeometry::So).map_err(err)?;
    let d = bending_dimension(complex, BranchGeometry::So).map_err(err)?;
    let ok = relations == Some(vec![vec![0, 1, -1, 0]]) && d.nullity == 3 && d.naive_bound == -2;
    Ok((ok, format!("relations {relations:?} over {:?}, nullity {}, naive bound {}", complex.walls(), d.nullity, d.naive_bound)))
}

fn c7(_: &Ctx) -> Outcome {
    let mut ok = true;
    let mut backends = Vec::new();
    for k in 3..=12 {
        let c = regular_binding_complex(k, 3).map_err(err)?;
        let d = bending_dimension(&c, BranchGeometry::So).map_err(err)?;
        ok &= d.equal_weights_solve;
        backends.push(format!("{k}:{}", if d.exact { "exact" } else { "float" }));
    }
    Ok((ok, format!("equal weights in kernel for k = 3..12 [{}]", backends.join(" "))))
}

fn c8(_: &Ctx) -> Outcome {
    let mut ok = true;
    let mut got = Vec::new();
    for k in 4..=8 {
        let c = pythagorean_binding_complex(k, 3).map_err(err)?;
        let so = bending_dimension(&c, BranchGeometry::So).map_err(err)?.nullity;
        let sl = bending_dimension(&c, BranchGeometry::Sl).map_err(err)?.nullity;
        ok &= so == k - 2 && sl == k - 3 && c.is_exact();
        got.push(format!("k={k}: so {so}, sl {sl}"));
    }
    Ok((ok, got.join("; ")))
}

fn f_matrix(ctx: &Ctx) -> Result<RationalMatrix, String> {
    let data = ctx.bundle.pants_data(Geometry::Sl).map_err(err)?;
    trace_derivative_matrix(&ctx.bundle.representation, &data, &ctx.bundle.words).map_err(err)
}

fn c9(ctx: &Ctx) -> Outcome {
    let f = f_matrix(ctx)?;
    let rank = f.rank();
    let det = f.determinant().map_err(err)?;
    Ok((rank == 6, format!("rank {rank}, det {}", format_rational(&det))))
}

fn c10(ctx: &Ctx) -> Outcome {
    let f = f_matrix(ctx)?;
    let cmp = compare_up_to_signs_and_scale(&f, &ctx.bundle.reference_f).map_err(err)?;
    let show = |r: &Option<Rational>| r.as_ref().map(format_rational).unwrap_or_else(|| "none".into());
    let ratios: Vec<String> = cmp.column_ratios.iter().map(show).collect();
    let cross: Vec<String> = cmp
        .proportional_reference_columns
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let hits: Vec<String> = v.iter().map(|(k, r)| format!("ref{k}*{}", format_rational(r))).collect();
            format!("col{j}->[{}]", hits.join(","))
        })
        .collect();
    let detail = format!(
        "scale {}, signs {:?}, column ratios [{}], proportional columns {}, computed F = {}",
        show(&cmp.scale),
        cmp.column_signs,
        ratios.join(", "),
        cross.join(" "),
        format_matrix(&f)
    );
    Ok((cmp.matches, detail))
}

fn c11(ctx: &Ctx) -> Outcome {
    let nu = ctx.space(ModuleKind::Nu);
    let std = ctx.space(ModuleKind::Standard);
    let nu_c = pants_cocycles(&ctx.bundle, Geometry::Sl, nu).map_err(err)?;
    let std_c = pants_cocycles(&ctx.bundle, Geometry::SoExt, std).map_err(err)?;
    let a = nu.class_span_dim(&nu_c).map_err(err)?;
    let b = std.class_span_dim(&std_c).map_err(err)?;
    Ok((a == 6 && b == 3, format!("nu span {a}, r31 span {b}")))
}

fn c12(ctx: &Ctx) -> Outcome {
    let nu = ctx.space(ModuleKind::Nu);
    let betas = beta_combinations(&pants_cocycles(&ctx.bundle, Geometry::Sl, nu).map_err(err)?);
    let cuspidal = betas.iter().map(|b| nu.is_cuspidal(b)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let span = nu.class_span_dim(&betas).map_err(err)?;
    Ok((cuspidal.iter().all(|&c| c) && span == 3, format!("cuspidal {cuspidal:?}, span {span}")))
}

fn word_strategy(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0usize..3, prop::bool::ANY), 0..=max_len).prop_map(|ls| {
        Word::from_letters(ls.into_iter().map(|(g, pos)| Letter::new(["x", "y", "z"][g], if pos { 1 } else { -1 })))
    })
}

fn small_rationals(len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-4i64..=4, 1i64..=3), len)
        .prop_map(|v| v.into_iter().map(|(n, d)| Rational::new(n.into(), d.into())).collect())
}

fn run<S: Strategy>(name: &str, strategy: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<String, String> {
    let start = Instant::now();
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, f).map_err(|e| format!("{name}: {e}"))?;
    Ok(format!("{name} {CASES} cases {:.1}s", start.elapsed().as_secs_f64()))
}

fn fox_identity() -> Result<String, String> {
    run("fox", word_strategy(14), |w: Word| {
        let mut rhs = GroupRingElem::zero();
        for g in ["x", "y", "z"] {
            let xg = &GroupRingElem::from_word(Word::generator(g)) - &GroupRingElem::one();
            rhs = &rhs + &(&fox_derivative(&w, g) * &xg);
        }
        let lhs = &GroupRingElem::from_word(w.clone()) - &GroupRingElem::one();
        prop_assert_eq!(lhs, rhs);
        Ok(())
    })
}

fn coboundary_extension(ctx: &Ctx) -> Result<String, String> {
    let kinds = prop::sample::select(vec![ModuleKind::Standard, ModuleKind::Nu, ModuleKind::Adjoint]);
    let strategy = (kinds, word_strategy(10), small_rationals(9));
    run("coboundary", strategy, |(kind, w, alpha): (ModuleKind, Word, Vec<Rational>)| {
        let space = ctx.space(kind);
        let alpha = &alpha[..space.module().dim()];
        let c = space.coboundary(alpha).unwrap();
        prop_assert!(space.is_cocycle(&c).unwrap());
        prop_assert!(space.is_coboundary(&c).unwrap());
        let value = space.cocycle_eval(&c, &w).unwrap();
        let moved = space.module().action(&w).unwrap().mul_vec(alpha).unwrap();
        let expected: Vec<Rational> = alpha.iter().zip(&moved).map(|(a, b)| a - b).collect();
        prop_assert_eq!(value, expected);
        Ok(())
    })
}

fn rank_nullity() -> Result<String, String> {
    let strategy = (1usize..=7, 1usize..=7).prop_flat_map(|(r, c)| (Just(r), Just(c), small_rationals(r * c)));
    run("rank-nullity", strategy, |(r, c, data): (usize, usize, Vec<Rational>)| {
        let m = RationalMatrix::from_flat(r, c, data).unwrap();
        let kernel = m.nullspace();
        prop_assert_eq!(m.rank() + kernel.len(), c);
        prop_assert_eq!(m.transpose().rank(), m.rank());
        for v in &kernel {
            prop_assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
        Ok(())
    })
}

fn scaled(fo: &FirstOrderRep, s: &Rational) -> FirstOrderRep {
    let gens = fo.base().presentation().generators();
    let d = gens.iter().map(|g| (g.clone(), fo.derivative(g).unwrap().scale(s))).collect();
    FirstOrderRep::new(fo.base().clone(), d).unwrap()
}

fn relator_vanishing(ctx: &Ctx) -> Result<String, String> {
    let mut all = ctx.bendings(Geometry::Sl)?;
    all.extend(ctx.bendings(Geometry::SoExt)?);
    let relators = ctx.bundle.presentation.relators().to_vec();
    let strategy = (0..all.len(), 0..relators.len(), prop::bool::ANY, word_strategy(6), -5i64..=5);
    run(
        "relator E-part",
        strategy,
        |(b, r, invert, u, s): (usize, usize, bool, Word, i64)| {
            let fo = scaled(&all[b].first_order, &Rational::from_integer(BigInt::from(s)));
            let rel = if invert { relators[r].inverse() } else { relators[r].clone() };
            let w = u.concat(&rel).concat(&u.inverse());
            let (m, e) = first_order_evaluate(&fo, &w).unwrap();
            prop_assert!(m.is_identity());
            prop_assert!(e.is_zero());
            Ok(())
        },
    )
}

/// Product of elementary matrices `I ± E_ij`: integral with integral inverse,
/// which keeps the conjugated data small. The form is transported along.
fn unimodular(n: usize, moves: &[(usize, usize, bool)]) -> RationalMatrix {
    let mut h = RationalMatrix::identity(n);
    for &(i, j, plus) in moves {
        let (i, j) = (i % n, j % n);
        if i == j {
            continue;
        }
        let mut e = RationalMatrix::identity(n);
        e[(i, j)] = Rational::from_integer(BigInt::from(if plus { 1 } else { -1 }));
        h = &h * &e;
    }
    h
}

fn dims(space: &CocycleSpace) -> Vec<Option<usize>> {
    let sub = h1_report(space, ParabolicMode::PerSubgroup, None).unwrap();
    let elem = h1_report(space, ParabolicMode::PerElement, None).unwrap();
    vec![
        Some(sub.dim_z1),
        Some(sub.dim_b1),
        Some(sub.dim_h1),
        Some(sub.dim_h0),
        sub.dim_ph1,
        elem.dim_ph1,
    ]
}

fn conjugation_invariance(ctx: &Ctx) -> Result<String, String> {
    let rep: &Representation = &ctx.bundle.representation;
    let n = rep.size();
    let baseline: BTreeMap<&str, Vec<Option<usize>>> = ctx.spaces.iter().map(|(k, s)| (*k, dims(s))).collect();
    let kinds = prop::sample::select(vec![ModuleKind::Standard, ModuleKind::Nu, ModuleKind::Adjoint]);
    let strategy = (kinds, prop::collection::vec((0..n, 0..n, prop::bool::ANY), 1..=4));
    run("conjugation", strategy, |(kind, moves): (ModuleKind, Vec<(usize, usize, bool)>)| {
        let h = unimodular(n, &moves);
        let conj = rep.conjugate(&h).unwrap();
        prop_assert!(validate_representation(&conj).passed);
        let space = CocycleSpace::new(build_module(&conj, kind).unwrap()).unwrap();
        prop_assert_eq!(&dims(&space), &baseline[kind.as_str()]);
        Ok(())
    })
}

fn c13(ctx: &Ctx) -> Outcome {
    let results = [
        fox_identity(),
        coboundary_extension(ctx),
        rank_nullity(),
        relator_vanishing(ctx),
        conjugation_invariance(ctx),
    ];
    let ok = results.iter().all(Result::is_ok);
    let parts: Vec<String> = results.into_iter().map(|r| r.unwrap_or_else(|e| format!("FAILED {e}"))).collect();
    Ok((ok, parts.join("; ")))
}

fn main() -> ExitCode {
    let bundle = match FixtureBundle::bundled() {
        Ok(b) => b,
        Err(e) => {
            println!("fixture failed to load: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut spaces = BTreeMap::new();
    for kind in ModuleKind::ALL {
        let space = build_module(&bundle.representation, kind)
            .map_err(err)
            .and_then(|m| CocycleSpace::new(m).map_err(err));
        match space {
            Ok(s) => {
                spaces.insert(kind.as_str(), s);
            }
            Err(e) => {
                println!("{} module failed: {e}", kind.as_str());
                return ExitCode::FAILURE;
            }
        }
    }
    let ctx = Ctx { bundle, spaces };
    let criteria: [Criterion; 13] = [
        ("H1/PH1 with r31 coefficients", c1),
        ("H1/PH1 with nu coefficients", c2),
        ("PH1 with adjoint coefficients", c3),
        ("peripheral identity", c4),
        ("per-element vs per-subgroup", c5),
        ("Borromean branched complex", c6),
        ("roots of unity", c7),
        ("generic-angle rank", c8),
        ("rank of F", c9),
        ("F against the reference matrix", c10),
        ("bending class spans", c11),
        ("cuspidal beta combinations", c12),
        ("property suites", c13),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check(&ctx).unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!(
            "criterion {:>2} {}: {name}: {detail} ({:.2}s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
