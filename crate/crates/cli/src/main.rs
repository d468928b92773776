use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bendlab_core::bender::{bend, relators_vanish, tangent_cocycle, trace_derivative_matrix, Geometry};
use bendlab_core::branchbend::{bending_dimension_with_tolerance, float_tolerance_from_env, BranchGeometry};
use bendlab_core::coeffs::{build_module, ModuleKind};
use bendlab_core::cohomo::{h1_report, CocycleSpace, ParabolicMode};
use bendlab_core::fixture::{FixtureBundle, FixtureSources};
use bendlab_core::formats::{parse_pants, parse_words, pants_to_data, ComplexFile, PresentationFile, RepresentationFile};
use bendlab_core::freewords::Presentation;
use bendlab_core::ratlin::format_rational;
use bendlab_core::repcore::{validate_representation, Representation, ValidationReport};
use bendlab_core::suite::{run_suite, SuiteError, SuiteOptions};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bendlab", version, about = "Twisted cohomology and bending deformations, in exact arithmetic")]
struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensions of Z1, B1, H1, H0 and the parabolic subspace.
    Cohomology {
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long)]
        rep: PathBuf,
        /// r31, nu or adjoint.
        #[arg(long, default_value = "r31")]
        coefficients: ModuleKind,
        /// per-element, per-subgroup or none.
        #[arg(long, default_value = "per-subgroup")]
        parabolic: ParabolicMode,
    },
    /// Dimension of the branched bending system of a complex.
    BranchedSystem {
        complex: PathBuf,
        /// so or sl.
        #[arg(long, default_value = "so")]
        geometry: BranchGeometry,
    },
    /// Bend along every pants of a table and report the trace derivatives.
    Bend {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long)]
        pants: PathBuf,
        #[arg(long)]
        words: PathBuf,
        /// sl or so.
        #[arg(long, default_value = "sl")]
        geometry: Geometry,
    },
    /// Run every check on the bundled Borromean rings data.
    Borromean {
        /// Only run the cohomology checks for one module.
        #[arg(long)]
        coefficients: Option<ModuleKind>,
        /// Replace the bundled presentation.
        #[arg(long)]
        presentation: Option<PathBuf>,
        /// Replace the bundled representation.
        #[arg(long)]
        rep: Option<PathBuf>,
    },
    /// Check that a representation preserves its form and kills every relator.
    Validate {
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long)]
        rep: PathBuf,
    },
}

/// A finished report and whether its checks passed.
struct Report {
    doc: Value,
    ok: bool,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_presentation(path: &Path) -> Result<Presentation> {
    let text = read(path)?;
    let file = PresentationFile::parse(&text).with_context(|| path.display().to_string())?;
    file.to_presentation().with_context(|| path.display().to_string())
}

fn load_representation(path: &Path, presentation: Presentation) -> Result<Representation> {
    let text = read(path)?;
    let file = RepresentationFile::parse(&text).with_context(|| path.display().to_string())?;
    file.to_representation(presentation)
        .with_context(|| path.display().to_string())
}

fn validation_json(v: &ValidationReport) -> Value {
    json!({
        "generators": v.generators.iter().map(|g| json!({
            "generator": g.generator,
            "preserves_form": g.preserves_form,
            "determinant": format_rational(&g.determinant),
        })).collect::<Vec<_>>(),
        "relators": v.relators.iter().map(|r| json!({
            "index": r.index + 1,
            "relator": r.label,
            "is_identity": r.is_identity,
        })).collect::<Vec<_>>(),
        "failures": v.failures(),
        "passed": v.passed,
    })
}

fn to_value(x: impl Serialize) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn cohomology(presentation: &Path, rep: &Path, kind: ModuleKind, mode: ParabolicMode) -> Result<Report> {
    let rep = load_representation(rep, load_presentation(presentation)?)?;
    let validation = validate_representation(&rep);
    if !validation.passed {
        return Ok(Report {
            doc: json!({ "validation": validation_json(&validation) }),
            ok: false,
        });
    }
    let space = CocycleSpace::new(build_module(&rep, kind)?)?;
    let report = h1_report(&space, mode, None)?;
    let ok = report.identities_hold;
    let mut doc = to_value(&report)?;
    doc["coefficients"] = json!(kind.as_str());
    if mode != ParabolicMode::None {
        doc["peripheral_h0"] = json!(space.peripheral_h0()?);
    }
    Ok(Report { doc, ok })
}

fn branched_system(complex: &Path, geometry: BranchGeometry) -> Result<Report> {
    let text = read(complex)?;
    let complex = ComplexFile::parse(&text)
        .and_then(|f| f.to_complex())
        .with_context(|| complex.display().to_string())?;
    let tol = float_tolerance_from_env()?;
    let d = bending_dimension_with_tolerance(&complex, geometry, tol)?;
    let mut doc = to_value(&d)?;
    doc["geometry"] = json!(geometry);
    doc["approximate"] = json!(!d.exact);
    Ok(Report { doc, ok: true })
}

fn bend_command(rep: &Path, presentation: &Path, pants: &Path, words: &Path, geometry: Geometry) -> Result<Report> {
    let presentation = load_presentation(presentation)?;
    let rep = load_representation(rep, presentation.clone())?;
    let validation = validate_representation(&rep);
    if !validation.passed {
        return Ok(Report {
            doc: json!({ "validation": validation_json(&validation) }),
            ok: false,
        });
    }
    let entries = parse_pants(&read(pants)?).with_context(|| pants.display().to_string())?;
    let data = pants_to_data(&entries, &presentation, geometry).with_context(|| pants.display().to_string())?;
    let words = parse_words(&read(words)?, &presentation).with_context(|| words.display().to_string())?;

    let kind = match geometry {
        Geometry::Sl => ModuleKind::Nu,
        Geometry::SoExt => ModuleKind::Standard,
    };
    let space = CocycleSpace::new(build_module(&rep, kind)?)?;
    let mut ok = true;
    let mut bendings = Vec::new();
    let mut cocycles = Vec::new();
    for d in &data {
        let b = bend(&rep, d)?;
        let homomorphism = relators_vanish(&b.first_order)?;
        ok &= homomorphism;
        cocycles.push(tangent_cocycle(&b.first_order, space.module())?);
        bendings.push(json!({
            "name": d.name,
            "stable_letter": d.stable_letter.to_string(),
            "side": b.side,
            "v": b.generator.v.to_string_rows(),
            "relators_vanish": homomorphism,
        }));
    }
    // Trace derivatives are only defined for the sl bendings.
    let f = match geometry {
        Geometry::Sl => Some(trace_derivative_matrix(&rep, &data, &words)?),
        Geometry::SoExt => None,
    };
    let doc = json!({
        "geometry": geometry.to_string(),
        "bendings": bendings,
        "words": words.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "trace_derivative_matrix": f.as_ref().map(|f| f.to_string_rows()),
        "trace_derivative_rank": f.as_ref().map(|f| f.rank()),
        "coefficients": kind.as_str(),
        "dim_h1": space.dim_h1(),
        "class_span": space.class_span_dim(&cocycles)?,
    });
    Ok(Report { doc, ok })
}

fn borromean(coefficients: Option<ModuleKind>, presentation: Option<&Path>, rep: Option<&Path>) -> Result<Report> {
    let mut sources = FixtureSources::default();
    if let Some(p) = presentation {
        sources.presentation = read(p)?;
    }
    if let Some(r) = rep {
        sources.representation = read(r)?;
    }
    let bundle = FixtureBundle::from_sources(&sources)?;
    match run_suite(&bundle, &SuiteOptions { coefficients }) {
        Ok(report) => Ok(Report {
            ok: report.passed,
            doc: to_value(&report)?,
        }),
        Err(SuiteError::InvalidRepresentation { failures }) => {
            for f in &failures {
                eprintln!("bendlab: {f}");
            }
            Ok(Report {
                doc: json!({
                    "aborted": "representation failed validation",
                    "validation": validation_json(&validate_representation(&bundle.representation)),
                    "passed": false,
                }),
                ok: false,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn validate(presentation: &Path, rep: &Path) -> Result<Report> {
    let rep = load_representation(rep, load_presentation(presentation)?)?;
    let v = validate_representation(&rep);
    Ok(Report {
        doc: validation_json(&v),
        ok: v.passed,
    })
}

fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Cohomology {
            presentation,
            rep,
            coefficients,
            parabolic,
        } => cohomology(presentation, rep, *coefficients, *parabolic),
        Command::BranchedSystem { complex, geometry } => branched_system(complex, *geometry),
        Command::Bend {
            rep,
            presentation,
            pants,
            words,
            geometry,
        } => bend_command(rep, presentation, pants, words, *geometry),
        Command::Borromean {
            coefficients,
            presentation,
            rep,
        } => borromean(*coefficients, presentation.as_deref(), rep.as_deref()),
        Command::Validate { presentation, rep } => validate(presentation, rep),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("bendlab: {e:#}");
            return ExitCode::from(2);
        }
    };
    let mut text = serde_json::to_string_pretty(&report.doc).expect("JSON values always serialize");
    text.push('\n');
    if let Some(path) = &cli.output {
        if let Err(e) = fs::write(path, &text) {
            eprintln!("bendlab: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    // A closed stdout (e.g. piped into `head`) is not an error worth reporting.
    let _ = std::io::stdout().write_all(text.as_bytes());
    if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
