//! The bundled Borromean rings data set.

use crate::bender::{BendingDatum, Geometry};
use crate::branchbend::BendingComplex;
use crate::formats::{
    parse_matrix, parse_pants, parse_words, pants_to_data, ComplexFile, FormatError, PantsEntry, PresentationFile,
    RepresentationFile,
};
use crate::freewords::{Presentation, Word};
use crate::ratlin::RationalMatrix;
use crate::repcore::Representation;

pub const PRESENTATION_JSON: &str = include_str!("../fixtures/borromean/presentation.json");
pub const REPRESENTATION_JSON: &str = include_str!("../fixtures/borromean/representation.json");
pub const PANTS_JSON: &str = include_str!("../fixtures/borromean/pants.json");
pub const COMPLEX_JSON: &str = include_str!("../fixtures/borromean/complex.json");
pub const WORDS_TXT: &str = include_str!("../fixtures/borromean/words.txt");
pub const REFERENCE_F_JSON: &str = include_str!("../fixtures/borromean/reference_f.json");

/// Raw text of every fixture file, so that callers can swap one out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureSources {
    pub presentation: String,
    pub representation: String,
    pub pants: String,
    pub complex: String,
    pub words: String,
    pub reference_f: String,
}

impl Default for FixtureSources {
    fn default() -> Self {
        Self {
            presentation: PRESENTATION_JSON.into(),
            representation: REPRESENTATION_JSON.into(),
            pants: PANTS_JSON.into(),
            complex: COMPLEX_JSON.into(),
            words: WORDS_TXT.into(),
            reference_f: REFERENCE_F_JSON.into(),
        }
    }
}

/// Parsed fixture. Loading checks syntax and shapes only; call
/// [`crate::repcore::validate_representation`] for the algebraic checks.
#[derive(Debug, Clone)]
pub struct FixtureBundle {
    pub presentation: Presentation,
    pub representation: Representation,
    pub pants: Vec<PantsEntry>,
    pub complex: BendingComplex,
    pub words: Vec<Word>,
    /// Reference trace-derivative matrix, rows indexed by `words`.
    pub reference_f: RationalMatrix,
}

impl FixtureBundle {
    pub fn bundled() -> Result<Self, FormatError> {
        Self::from_sources(&FixtureSources::default())
    }

    pub fn from_sources(src: &FixtureSources) -> Result<Self, FormatError> {
        let presentation = PresentationFile::parse(&src.presentation)?.to_presentation()?;
        let representation = RepresentationFile::parse(&src.representation)?.to_representation(presentation.clone())?;
        Ok(Self {
            pants: parse_pants(&src.pants)?,
            complex: ComplexFile::parse(&src.complex)?.to_complex()?,
            words: parse_words(&src.words, &presentation)?,
            reference_f: parse_matrix(&src.reference_f, "reference F")?,
            presentation,
            representation,
        })
    }

    pub fn pants_data(&self, geometry: Geometry) -> Result<Vec<BendingDatum>, FormatError> {
        pants_to_data(&self.pants, &self.presentation, geometry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repcore::validate_representation;

    #[test]
    fn bundled_fixture_loads_and_validates() {
        let b = FixtureBundle::bundled().unwrap();
        assert_eq!(b.presentation.generators().len(), 3);
        assert_eq!(b.presentation.relators().len(), 2);
        assert_eq!(b.presentation.cusps().len(), 3);
        assert_eq!(b.pants.len(), 6);
        assert_eq!(b.words.len(), 6);
        assert_eq!(b.complex.walls().len(), 4);
        assert_eq!((b.reference_f.rows(), b.reference_f.cols()), (6, 6));
        assert!(validate_representation(&b.representation).passed);
    }
}
