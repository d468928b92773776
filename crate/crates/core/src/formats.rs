//! JSON and text file formats. Rationals are always written as strings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bender::{BendError, BendingDatum, Geometry, HnnSide};
use crate::branchbend::{Angle, BendingComplex, Binding, BranchError, Incidence};
use crate::freewords::{Presentation, Word, WordError};
use crate::ratlin::{parse_rational, MatrixParseError, ParseRationalError, RationalMatrix};
use crate::repcore::{QuadraticForm, RepError, Representation};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error("{what}: {source}")]
    Matrix {
        what: String,
        #[source]
        source: MatrixParseError,
    },
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error(transparent)]
    Bend(#[from] BendError),
    #[error("{0}")]
    Invalid(String),
}

fn matrix(rows: &[Vec<String>], what: impl Into<String>) -> Result<RationalMatrix, FormatError> {
    RationalMatrix::from_string_rows(rows).map_err(|source| FormatError::Matrix {
        what: what.into(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspFile {
    pub meridian: String,
    pub longitude: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationFile {
    pub generators: Vec<String>,
    pub relators: Vec<String>,
    #[serde(default)]
    pub cusps: Vec<CuspFile>,
}

impl PresentationFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_presentation(&self) -> Result<Presentation, FormatError> {
        let cusps: Vec<(&str, &str)> = self
            .cusps
            .iter()
            .map(|c| (c.meridian.as_str(), c.longitude.as_str()))
            .collect();
        let gens: Vec<&str> = self.generators.iter().map(String::as_str).collect();
        let rels: Vec<&str> = self.relators.iter().map(String::as_str).collect();
        Ok(Presentation::parse(&gens, &rels, &cusps)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentationFile {
    pub form: Vec<Vec<String>>,
    pub images: BTreeMap<String, Vec<Vec<String>>>,
}

impl RepresentationFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_representation(&self, presentation: Presentation) -> Result<Representation, FormatError> {
        let form = QuadraticForm::new(matrix(&self.form, "form")?)?;
        let images = self
            .images
            .iter()
            .map(|(g, rows)| Ok((g.clone(), matrix(rows, format!("image of {g}"))?)))
            .collect::<Result<BTreeMap<_, _>, FormatError>>()?;
        Ok(Representation::new(presentation, images, form)?)
    }

    pub fn from_representation(rep: &Representation) -> Self {
        Self {
            form: rep.form().matrix().to_string_rows(),
            images: rep.images().iter().map(|(g, m)| (g.clone(), m.to_string_rows())).collect(),
        }
    }
}

/// A number given either as an exact string (`"3/5"`) or as a JSON float.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Exact(String),
    Float(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Name(String),
    Pair { cos: Scalar, sin: Scalar },
}

impl AngleSpec {
    pub fn to_angle(&self) -> Result<Angle, FormatError> {
        match self {
            AngleSpec::Name(n) => Ok(n.parse()?),
            AngleSpec::Pair {
                cos: Scalar::Exact(c),
                sin: Scalar::Exact(s),
            } => Ok(Angle::exact(parse_rational(c)?, parse_rational(s)?)?),
            AngleSpec::Pair { cos, sin } => {
                let f = |x: &Scalar| -> Result<f64, FormatError> {
                    match x {
                        Scalar::Float(v) => Ok(*v),
                        Scalar::Exact(s) => Ok(crate::ratlin::rational_to_f64(&parse_rational(s)?)),
                    }
                };
                Ok(Angle::float(f(cos)?, f(sin)?)?)
            }
        }
    }
}

fn default_sign() -> i64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceFile {
    pub wall: String,
    pub angle: AngleSpec,
    #[serde(default = "default_sign")]
    pub sign: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BindingFile {
    pub name: String,
    pub incidences: Vec<IncidenceFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub dimension: usize,
    pub walls: Vec<String>,
    pub bindings: Vec<BindingFile>,
}

impl ComplexFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_complex(&self) -> Result<BendingComplex, FormatError> {
        let bindings = self
            .bindings
            .iter()
            .map(|b| {
                let incidences = b
                    .incidences
                    .iter()
                    .map(|i| {
                        let sign = match i.sign {
                            1 => 1,
                            -1 => -1,
                            other => {
                                return Err(BranchError::BadSign {
                                    binding: b.name.clone(),
                                    sign: other,
                                }
                                .into())
                            }
                        };
                        Ok(Incidence {
                            wall: i.wall.clone(),
                            angle: i.angle.to_angle()?,
                            sign,
                        })
                    })
                    .collect::<Result<Vec<_>, FormatError>>()?;
                Ok(Binding {
                    name: b.name.clone(),
                    incidences,
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok(BendingComplex::new(self.dimension, self.walls.clone(), bindings)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PantsEntry {
    pub name: String,
    pub subgroup: Vec<String>,
    pub stable: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
}

pub fn parse_pants(text: &str) -> Result<Vec<PantsEntry>, FormatError> {
    Ok(serde_json::from_str(text)?)
}

/// Turns pants entries into bending data over `presentation`.
pub fn pants_to_data(entries: &[PantsEntry], presentation: &Presentation, geometry: Geometry) -> Result<Vec<BendingDatum>, FormatError> {
    entries
        .iter()
        .map(|e| {
            let surface_subgroup = e
                .subgroup
                .iter()
                .map(|s| presentation.parse_word(s))
                .collect::<Result<Vec<_>, _>>()?;
            let side = match &e.side {
                Some(s) => s.parse::<HnnSide>()?,
                None => HnnSide::Auto,
            };
            Ok(BendingDatum {
                name: e.name.clone(),
                surface_subgroup,
                stable_letter: presentation.parse_word(&e.stable)?,
                geometry,
                side,
            })
        })
        .collect()
}

/// One word per non-empty line; `#` starts a comment line.
pub fn parse_words(text: &str, presentation: &Presentation) -> Result<Vec<Word>, FormatError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| Ok(presentation.parse_word(l)?))
        .collect()
}

/// A matrix written as rows of rational strings.
pub fn parse_matrix(text: &str, what: &str) -> Result<RationalMatrix, FormatError> {
    let rows: Vec<Vec<String>> = serde_json::from_str(text)?;
    matrix(&rows, what)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presentation_roundtrip() {
        let text = r#"{"generators":["x","y"],"relators":["[x,y]"],"cusps":[{"meridian":"x","longitude":"y"}]}"#;
        let f = PresentationFile::parse(text).unwrap();
        let p = f.to_presentation().unwrap();
        assert_eq!(p.relators()[0].len(), 4);
        assert_eq!(p.cusps().len(), 1);
    }

    #[test]
    fn angle_specs() {
        let exact: AngleSpec = serde_json::from_str(r#"{"cos":"3/5","sin":"4/5"}"#).unwrap();
        assert!(exact.to_angle().unwrap().is_exact());
        let float: AngleSpec = serde_json::from_str(r#"{"cos":0.6,"sin":0.8}"#).unwrap();
        assert!(!float.to_angle().unwrap().is_exact());
        let bad: AngleSpec = serde_json::from_str(r#"{"cos":"1","sin":"1"}"#).unwrap();
        assert!(bad.to_angle().is_err());
        let named: AngleSpec = serde_json::from_str(r#""pi/2""#).unwrap();
        assert!(named.to_angle().unwrap().is_exact());
    }

    #[test]
    fn bad_matrix_entry_is_reported() {
        let err = parse_matrix(r#"[["1","x"]]"#, "F").unwrap_err();
        assert!(err.to_string().contains("F"));
    }

    #[test]
    fn bad_sign_is_rejected() {
        let text = r#"{"dimension":3,"walls":["w1"],"bindings":[{"name":"A","incidences":[{"wall":"w1","angle":"0","sign":2}]}]}"#;
        assert!(ComplexFile::parse(text).unwrap().to_complex().is_err());
    }
}
