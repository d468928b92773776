//! Free-group words, a small text grammar for them, the integral group ring,
//! and Fox derivatives.
//!
//! Grammar accepted by [`parse_word`]:
//!
//! ```text
//! word := term+
//! term := atom ('^' integer)?
//! atom := generator | '(' word ')' | '[' word ',' word ']'
//! ```
//!
//! `[a,b]` expands to `a b a^-1 b^-1`. Whitespace and `*` separate terms and
//! are otherwise ignored. Generator names are matched greedily, so with
//! generators `x` and `x1` the text `x1` is the single letter `x1`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("unknown generator {name:?} at offset {offset}")]
    UnknownGenerator { name: String, offset: usize },
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { message: String, offset: usize },
    #[error("duplicate generator name {0:?}")]
    DuplicateGenerator(String),
    #[error("invalid generator name {0:?}")]
    InvalidGeneratorName(String),
    #[error("{what}: {source}")]
    InWord {
        what: String,
        #[source]
        source: Box<WordError>,
    },
}

impl WordError {
    fn context(self, what: impl Into<String>) -> Self {
        WordError::InWord {
            what: what.into(),
            source: Box::new(self),
        }
    }
}

/// One generator raised to ±1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: String,
    pub exponent: i8,
}

impl Letter {
    pub fn new(generator: impl Into<String>, exponent: i8) -> Self {
        assert!(exponent == 1 || exponent == -1, "letter exponent must be ±1");
        Self {
            generator: generator.into(),
            exponent,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            generator: self.generator.clone(),
            exponent: -self.exponent,
        }
    }

    fn cancels(&self, other: &Letter) -> bool {
        self.generator == other.generator && self.exponent == -other.exponent
    }
}

/// A freely reduced word.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn generator(name: impl Into<String>) -> Self {
        Self {
            letters: vec![Letter::new(name, 1)],
        }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last().is_some_and(|t| t.cancels(&l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().map(Letter::inverse).collect(),
        }
    }

    /// Reduced product `self · other`.
    pub fn concat(&self, other: &Word) -> Self {
        let mut left = self.letters.clone();
        let mut rest = other.letters.iter().peekable();
        while let (Some(a), Some(b)) = (left.last(), rest.peek()) {
            if a.cancels(b) {
                left.pop();
                rest.next();
            } else {
                break;
            }
        }
        left.extend(rest.cloned());
        Self { letters: left }
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = Word::identity();
        for _ in 0..k.unsigned_abs() {
            acc = acc.concat(&base);
        }
        acc
    }

    /// `a b a^-1 b^-1`.
    pub fn commutator(a: &Word, b: &Word) -> Self {
        a.concat(b).concat(&a.inverse()).concat(&b.inverse())
    }

    pub fn generators_used(&self) -> impl Iterator<Item = &str> {
        self.letters.iter().map(|l| l.generator.as_str())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&l.generator)?;
            if l.exponent < 0 {
                f.write_str("^-1")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// Parses a word over the given generator names. The literal `1` denotes the
/// empty word when no generator is named `1`.
pub fn parse_word<S: AsRef<str>>(text: &str, generators: &[S]) -> Result<Word, WordError> {
    let mut names: Vec<&str> = generators.iter().map(AsRef::as_ref).collect();
    // Longest first, so greedy matching prefers `x1` over `x`.
    names.sort_by_key(|n| std::cmp::Reverse(n.len()));
    let mut p = Parser {
        src: text,
        pos: 0,
        names,
    };
    let w = p.word()?;
    p.skip_separators();
    if !p.at_end() {
        return Err(p.syntax(format!("unexpected {:?}", p.peek().unwrap())));
    }
    Ok(w)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    names: Vec<&'a str>,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn syntax(&self, message: impl Into<String>) -> WordError {
        WordError::Syntax {
            message: message.into(),
            offset: self.pos,
        }
    }

    fn skip_separators(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == '*' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn skip_whitespace(&mut self) {
        while let Some(c) = self.peek().filter(|c| c.is_whitespace()) {
            self.pos += c.len_utf8();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> Result<Word, WordError> {
        let mut acc = Word::identity();
        let mut terms = 0;
        loop {
            self.skip_separators();
            match self.peek() {
                None | Some(')') | Some(']') | Some(',') => break,
                _ => {
                    let t = self.term()?;
                    acc = acc.concat(&t);
                    terms += 1;
                }
            }
        }
        if terms == 0 {
            return Err(self.syntax("expected a word"));
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Word, WordError> {
        let atom = self.atom()?;
        self.skip_whitespace();
        if self.eat('^') {
            self.skip_whitespace();
            let k = self.integer()?;
            Ok(atom.pow(k))
        } else {
            Ok(atom)
        }
    }

    fn integer(&mut self) -> Result<i64, WordError> {
        let start = self.pos;
        if matches!(self.peek(), Some('-') | Some('+')) {
            self.pos += 1;
        }
        let digits = self.rest().chars().take_while(char::is_ascii_digit).count();
        if digits == 0 {
            self.pos = start;
            return Err(self.syntax("expected integer exponent"));
        }
        self.pos += digits;
        self.src[start..self.pos]
            .parse()
            .map_err(|_| WordError::Syntax {
                message: "exponent out of range".into(),
                offset: start,
            })
    }

    fn atom(&mut self) -> Result<Word, WordError> {
        let start = self.pos;
        if self.eat('(') {
            let w = self.word()?;
            self.skip_separators();
            if !self.eat(')') {
                return Err(self.syntax("expected ')'"));
            }
            return Ok(w);
        }
        if self.eat('[') {
            let a = self.word()?;
            self.skip_separators();
            if !self.eat(',') {
                return Err(self.syntax("expected ',' in commutator"));
            }
            let b = self.word()?;
            self.skip_separators();
            if !self.eat(']') {
                return Err(self.syntax("expected ']'"));
            }
            return Ok(Word::commutator(&a, &b));
        }
        let rest = self.rest();
        if let Some(name) = self.names.iter().find(|n| !n.is_empty() && rest.starts_with(**n)) {
            self.pos += name.len();
            return Ok(Word::generator(*name));
        }
        if rest.starts_with('1') {
            self.pos += 1;
            return Ok(Word::identity());
        }
        let ident: String = rest
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        if ident.is_empty() {
            Err(self.syntax(format!("unexpected {:?}", self.peek().unwrap_or(' '))))
        } else {
            Err(WordError::UnknownGenerator {
                name: ident,
                offset: start,
            })
        }
    }
}

/// Finite integer combination of words, with no zero coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct GroupRingElem {
    terms: BTreeMap<Word, BigInt>,
}

impl GroupRingElem {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_word(Word::identity())
    }

    pub fn from_word(w: Word) -> Self {
        Self::from_term(w, BigInt::one())
    }

    pub fn from_term(w: Word, coeff: BigInt) -> Self {
        let mut e = Self::zero();
        e.add_term(w, coeff);
        e
    }

    pub fn add_term(&mut self, w: Word, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &Word) -> BigInt {
        self.terms.get(w).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c * k);
        }
        out
    }

    /// Left multiplication by a single word.
    pub fn left_mul_word(&self, w: &Word) -> Self {
        let mut out = Self::zero();
        for (u, c) in &self.terms {
            out.add_term(w.concat(u), c.clone());
        }
        out
    }
}

impl Add for &GroupRingElem {
    type Output = GroupRingElem;

    fn add(self, rhs: &GroupRingElem) -> GroupRingElem {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }
}

impl Sub for &GroupRingElem {
    type Output = GroupRingElem;

    fn sub(self, rhs: &GroupRingElem) -> GroupRingElem {
        self + &(-rhs)
    }
}

impl Neg for &GroupRingElem {
    type Output = GroupRingElem;

    fn neg(self) -> GroupRingElem {
        GroupRingElem {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }
}

impl Mul for &GroupRingElem {
    type Output = GroupRingElem;

    fn mul(self, rhs: &GroupRingElem) -> GroupRingElem {
        let mut out = GroupRingElem::zero();
        for (u, a) in &self.terms {
            for (v, b) in &rhs.terms {
                out.add_term(u.concat(v), a * b);
            }
        }
        out
    }
}

impl fmt::Display for GroupRingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*({w})")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GroupRingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupRingElem({self})")
    }
}

/// Fox derivative `∂w/∂g`. A name that does not occur in `w` gives zero.
pub fn fox_derivative(w: &Word, g: &str) -> GroupRingElem {
    let mut out = GroupRingElem::zero();
    let mut prefix = Word::identity();
    for l in w.letters() {
        if l.generator == g {
            if l.exponent > 0 {
                out.add_term(prefix.clone(), BigInt::one());
            } else {
                out.add_term(prefix.concat(&Word::from_letters([l.clone()])), -BigInt::one());
            }
        }
        prefix = prefix.concat(&Word::from_letters([l.clone()]));
    }
    out
}

/// A peripheral pair: meridian and longitude words of one cusp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cusp {
    pub meridian: Word,
    pub longitude: Word,
}

/// Finite presentation with optional cusp data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    generators: Vec<String>,
    relators: Vec<Word>,
    relator_labels: Vec<String>,
    cusps: Vec<Cusp>,
}

impl Presentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>, cusps: Vec<Cusp>) -> Result<Self, WordError> {
        let labels = relators.iter().map(ToString::to_string).collect();
        Self::with_labels(generators, relators, labels, cusps)
    }

    /// Builds from text. A relator of the form `lhs = rhs` is stored as
    /// `lhs · rhs^-1`.
    pub fn parse<S: AsRef<str>>(
        generators: &[S],
        relators: &[S],
        cusps: &[(S, S)],
    ) -> Result<Self, WordError> {
        let gens: Vec<String> = generators.iter().map(|g| g.as_ref().to_string()).collect();
        let mut rels = Vec::new();
        let mut labels = Vec::new();
        for (i, text) in relators.iter().enumerate() {
            let text = text.as_ref();
            let what = format!("relator {} {:?}", i + 1, text);
            let w = parse_relator(text, &gens).map_err(|e| e.context(what))?;
            rels.push(w);
            labels.push(text.trim().to_string());
        }
        let mut cs = Vec::new();
        for (i, (m, l)) in cusps.iter().enumerate() {
            let meridian = parse_word(m.as_ref(), &gens).map_err(|e| e.context(format!("cusp {} meridian", i + 1)))?;
            let longitude =
                parse_word(l.as_ref(), &gens).map_err(|e| e.context(format!("cusp {} longitude", i + 1)))?;
            cs.push(Cusp { meridian, longitude });
        }
        Self::with_labels(gens, rels, labels, cs)
    }

    fn with_labels(
        generators: Vec<String>,
        relators: Vec<Word>,
        relator_labels: Vec<String>,
        cusps: Vec<Cusp>,
    ) -> Result<Self, WordError> {
        for (i, g) in generators.iter().enumerate() {
            let valid = !g.is_empty()
                && g.chars().all(|c| c.is_alphanumeric() || c == '_')
                && !g.chars().next().unwrap().is_ascii_digit();
            if !valid {
                return Err(WordError::InvalidGeneratorName(g.clone()));
            }
            if generators[..i].contains(g) {
                return Err(WordError::DuplicateGenerator(g.clone()));
            }
        }
        let p = Self {
            generators,
            relators,
            relator_labels,
            cusps,
        };
        for w in p.relators.iter().chain(p.cusps.iter().flat_map(|c| [&c.meridian, &c.longitude])) {
            p.check_word(w)?;
        }
        Ok(p)
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// The text each relator was given as (or its printed form).
    pub fn relator_labels(&self) -> &[String] {
        &self.relator_labels
    }

    pub fn cusps(&self) -> &[Cusp] {
        &self.cusps
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        parse_word(text, &self.generators)
    }

    /// Errors if `w` mentions a name outside the generator list.
    pub fn check_word(&self, w: &Word) -> Result<(), WordError> {
        match w.generators_used().find(|g| self.generator_index(g).is_none()) {
            Some(g) => Err(WordError::UnknownGenerator {
                name: g.to_string(),
                offset: 0,
            }),
            None => Ok(()),
        }
    }

    /// Fox derivative with generator validation.
    pub fn fox_derivative(&self, w: &Word, g: &str) -> Result<GroupRingElem, WordError> {
        if self.generator_index(g).is_none() {
            return Err(WordError::UnknownGenerator {
                name: g.to_string(),
                offset: 0,
            });
        }
        self.check_word(w)?;
        Ok(fox_derivative(w, g))
    }

    /// Copy with one more relator appended.
    pub fn with_relator(&self, relator: Word, label: impl Into<String>) -> Result<Self, WordError> {
        self.check_word(&relator)?;
        let mut p = self.clone();
        p.relators.push(relator);
        p.relator_labels.push(label.into());
        Ok(p)
    }

    /// Copy with the relator list replaced.
    pub fn with_relators(&self, relators: Vec<Word>) -> Result<Self, WordError> {
        Self::new(self.generators.clone(), relators, self.cusps.clone())
    }

    /// Copy with the cusp list replaced.
    pub fn with_cusps(&self, cusps: Vec<Cusp>) -> Result<Self, WordError> {
        Self::with_labels(self.generators.clone(), self.relators.clone(), self.relator_labels.clone(), cusps)
    }
}

fn parse_relator(text: &str, gens: &[String]) -> Result<Word, WordError> {
    match text.split_once('=') {
        Some((lhs, rhs)) => {
            let l = parse_word(lhs, gens)?;
            let r = parse_word(rhs, gens)?;
            Ok(l.concat(&r.inverse()))
        }
        None => parse_word(text, gens),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const XYZ: [&str; 3] = ["x", "y", "z"];

    fn w(s: &str) -> Word {
        parse_word(s, &XYZ).unwrap()
    }

    fn letter_strategy() -> impl Strategy<Value = Letter> {
        (0usize..3, prop::bool::ANY).prop_map(|(g, inv)| Letter::new(XYZ[g], if inv { -1 } else { 1 }))
    }

    fn raw_word() -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec(letter_strategy(), 0..30)
    }

    #[test]
    fn simple_parse() {
        assert_eq!(w("x^-1 y").letters(), &[Letter::new("x", -1), Letter::new("y", 1)]);
        assert_eq!(w("x*y^2").len(), 3);
        assert_eq!(w("(x y)^-1"), w("y^-1 x^-1"));
        assert_eq!(w("x x^-1"), Word::identity());
        assert_eq!(w("x^0 y"), w("y"));
    }

    #[test]
    fn commutators() {
        assert_eq!(w("[x,y]"), w("x y x^-1 y^-1"));
        let nested = w("[x,[y^-1,z]]");
        assert_eq!(nested.len(), 10);
        assert_eq!(nested, w("x y^-1 z y z^-1 x^-1 z y^-1 z^-1 y"));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_word("x q", &XYZ), Err(WordError::UnknownGenerator { name, .. }) if name == "q"));
        assert!(matches!(parse_word("[x,y", &XYZ), Err(WordError::Syntax { .. })));
        assert!(matches!(parse_word("x^", &XYZ), Err(WordError::Syntax { .. })));
        assert!(matches!(parse_word("", &XYZ), Err(WordError::Syntax { .. })));
        assert!(matches!(parse_word("x)", &XYZ), Err(WordError::Syntax { .. })));
    }

    #[test]
    fn greedy_generator_names() {
        let gens = ["x", "x1", "y"];
        let parsed = parse_word("x1x y", &gens).unwrap();
        assert_eq!(parsed.letters(), &[Letter::new("x1", 1), Letter::new("x", 1), Letter::new("y", 1)]);
    }

    #[test]
    fn fox_examples() {
        assert_eq!(fox_derivative(&w("x"), "x"), GroupRingElem::one());
        assert_eq!(fox_derivative(&w("x y"), "y"), GroupRingElem::from_word(w("x")));
        let expected = &GroupRingElem::one() - &GroupRingElem::from_word(w("x y x^-1"));
        assert_eq!(fox_derivative(&w("[x,y]"), "x"), expected);
        assert!(fox_derivative(&w("y"), "x").is_zero());
    }

    #[test]
    fn presentation_checks() {
        let p = Presentation::parse(&["x", "y"], &["x y = y x"], &[]).unwrap();
        assert_eq!(p.relators()[0], w("[x,y]"));
        assert!(Presentation::parse(&["x", "x"], &[], &[]).is_err());
        let err = Presentation::parse(&["x", "y"], &["x q"], &[]).unwrap_err();
        assert!(err.to_string().contains("relator 1"));
        assert!(p.fox_derivative(&w("x"), "q").is_err());
    }

    fn fundamental_identity_holds(word: &Word) -> bool {
        let mut lhs = GroupRingElem::zero();
        for g in XYZ {
            let xg = &GroupRingElem::from_word(Word::generator(g)) - &GroupRingElem::one();
            lhs = &lhs + &(&fox_derivative(word, g) * &xg);
        }
        lhs == &GroupRingElem::from_word(word.clone()) - &GroupRingElem::one()
    }

    #[test]
    fn fundamental_identity_on_borromean_relators() {
        assert!(fundamental_identity_holds(&w("[x,[y^-1,z]]")));
        assert!(fundamental_identity_holds(&w("[y,[z^-1,x]]")));
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent(raw in raw_word()) {
            let once = Word::from_letters(raw);
            let twice = Word::from_letters(once.letters().to_vec());
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.letters().windows(2).all(|p| !p[0].cancels(&p[1])));
        }

        #[test]
        fn reduction_order_independent(a in raw_word(), b in raw_word()) {
            let whole = Word::from_letters(a.iter().chain(&b).cloned());
            let split = Word::from_letters(a).concat(&Word::from_letters(b));
            prop_assert_eq!(whole, split);
        }

        #[test]
        fn print_parse_roundtrip(raw in raw_word()) {
            let word = Word::from_letters(raw);
            if !word.is_empty() {
                prop_assert_eq!(parse_word(&word.to_string(), &XYZ).unwrap(), word);
            }
        }

        #[test]
        fn fundamental_identity(raw in raw_word()) {
            prop_assert!(fundamental_identity_holds(&Word::from_letters(raw)));
        }

        #[test]
        fn inverse_rule(raw in raw_word(), g in 0usize..3) {
            let word = Word::from_letters(raw);
            let lhs = fox_derivative(&word.inverse(), XYZ[g]);
            let rhs = -&fox_derivative(&word, XYZ[g]).left_mul_word(&word.inverse());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn ring_associative_distributive(a in raw_word(), b in raw_word(), c in raw_word(), k in -3i64..4) {
            let e = |r: Vec<Letter>, k: i64| {
                let mut out = GroupRingElem::from_word(Word::from_letters(r));
                out.add_term(Word::identity(), BigInt::from(k));
                out
            };
            let (a, b, c) = (e(a, k), e(b, 1), e(c, -k));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }
    }
}
