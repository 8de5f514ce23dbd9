//! Core RDF-style data model: IRIs, literals, triples, and the line-oriented
//! Turtle-compatible subset used for ontology and model documents.
//!
//! The subset supports `@prefix` declarations, prefixed names, `<absolute>`
//! IRIs, `a` as shorthand for `rdf:type`, `;`/`,` continuation lists, and
//! string/numeric/boolean literals. Numeric literals may carry a unit
//! annotation written `42^^kWh`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Well-known namespaces used by the shipped ontology subset and fixtures.
pub mod ns {
    pub const BRICK: &str = "https://brickschema.org/schema/Brick#";
    pub const TAG: &str = "https://brickschema.org/schema/BrickTag#";
    pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
    /// Platform vocabulary (entity properties, loader markers).
    pub const BH: &str = "urn:brickhouse:vocab#";

    pub fn rdf_type() -> super::Iri {
        super::Iri::new(format!("{RDF}type")).unwrap()
    }
    pub fn rdfs_label() -> super::Iri {
        super::Iri::new(format!("{RDFS}label")).unwrap()
    }
    pub fn rdfs_subclass_of() -> super::Iri {
        super::Iri::new(format!("{RDFS}subClassOf")).unwrap()
    }
    pub fn owl_inverse_of() -> super::Iri {
        super::Iri::new(format!("{OWL}inverseOf")).unwrap()
    }
    pub fn owl_class() -> super::Iri {
        super::Iri::new(format!("{OWL}Class")).unwrap()
    }
    pub fn owl_object_property() -> super::Iri {
        super::Iri::new(format!("{OWL}ObjectProperty")).unwrap()
    }
    pub fn owl_transitive_property() -> super::Iri {
        super::Iri::new(format!("{OWL}TransitiveProperty")).unwrap()
    }
    pub fn brick(local: &str) -> super::Iri {
        super::Iri::new(format!("{BRICK}{local}")).unwrap()
    }
    pub fn tag(local: &str) -> super::Iri {
        super::Iri::new(format!("{TAG}{local}")).unwrap()
    }
    pub fn bh(local: &str) -> super::Iri {
        super::Iri::new(format!("{BH}{local}")).unwrap()
    }
    pub fn brick_has_associated_tag() -> super::Iri {
        brick("hasAssociatedTag")
    }
    pub fn bh_cycles_allowed() -> super::Iri {
        bh("cyclesAllowed")
    }
}

/// An absolute identifier. Equality and ordering are by the full string.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, RdfError> {
        let value = value.into();
        if value.is_empty() {
            return Err(RdfError::EmptyIri);
        }
        Ok(Iri(value.into()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The fragment of the IRI after the last `#`, `/`, or `:`, used as a
    /// human-oriented short name (e.g. `AHU` for a Brick class IRI).
    pub fn local_name(&self) -> &str {
        let s = self.as_str();
        let cut = s.rfind(['#', '/', ':']).map(|i| i + 1).unwrap_or(0);
        &s[cut..]
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl serde::Serialize for Iri {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> serde::Deserialize<'de> for Iri {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Iri::new(s).map_err(serde::de::Error::custom)
    }
}

/// A typed literal value. Numbers are finite and may carry a unit annotation.
#[derive(Clone, Debug)]
pub enum Literal {
    Str(String),
    Num { value: f64, unit: Option<String> },
    Bool(bool),
}

impl Literal {
    pub fn num(value: f64) -> Self {
        Literal::Num { value, unit: None }
    }

    pub fn str(value: impl Into<String>) -> Self {
        Literal::Str(value.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Literal::Num { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Literal::Str(s) => Some(s),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Literal::Str(_) => 0,
            Literal::Num { .. } => 1,
            Literal::Bool(_) => 2,
        }
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for Literal {}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use Literal::*;
        match (self, other) {
            (Str(a), Str(b)) => a.cmp(b),
            (Num { value: a, unit: ua }, Num { value: b, unit: ub }) => {
                a.total_cmp(b).then_with(|| ua.cmp(ub))
            }
            (Bool(a), Bool(b)) => a.cmp(b),
            (a, b) => a.rank().cmp(&b.rank()),
        }
    }
}
impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::hash::Hash for Literal {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Literal::Str(s) => s.hash(state),
            Literal::Num { value, unit } => {
                value.to_bits().hash(state);
                unit.hash(state);
            }
            Literal::Bool(b) => b.hash(state),
        }
    }
}

impl serde::Serialize for Literal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            Literal::Str(v) => s.serialize_str(v),
            Literal::Num { value, unit: None } => s.serialize_f64(*value),
            Literal::Num {
                value,
                unit: Some(u),
            } => {
                let mut map = s.serialize_map(Some(2))?;
                map.serialize_entry("value", value)?;
                map.serialize_entry("unit", u)?;
                map.end()
            }
            Literal::Bool(v) => s.serialize_bool(*v),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => write!(f, "{s:?}"),
            Literal::Num { value, unit: None } => write!(f, "{value}"),
            Literal::Num {
                value,
                unit: Some(u),
            } => write!(f, "{value}^^{u}"),
            Literal::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// The object position of a triple: another entity or a literal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Object {
    Iri(Iri),
    Literal(Literal),
}

impl Object {
    pub fn iri(&self) -> Option<&Iri> {
        match self {
            Object::Iri(i) => Some(i),
            _ => None,
        }
    }

    pub fn literal(&self) -> Option<&Literal> {
        match self {
            Object::Literal(l) => Some(l),
            _ => None,
        }
    }
}

impl From<Iri> for Object {
    fn from(value: Iri) -> Self {
        Object::Iri(value)
    }
}

impl From<Literal> for Object {
    fn from(value: Literal) -> Self {
        Object::Literal(value)
    }
}

/// A directed edge of a semantic model.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Object,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Object>) -> Self {
        Triple {
            subject,
            predicate,
            object: object.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RdfError {
    #[error("IRI must be non-empty")]
    EmptyIri,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl RdfError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        RdfError::Parse {
            line,
            message: message.into(),
        }
    }

    /// Line number of a parse error, if this is one.
    pub fn line(&self) -> Option<usize> {
        match self {
            RdfError::Parse { line, .. } => Some(*line),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Turtle-subset parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    IriRef(String),
    Prefixed(String, String),
    A,
    PrefixDecl,
    Str(String),
    Num { value: f64, unit: Option<String> },
    Bool(bool),
    Semicolon,
    Comma,
    Dot,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
        }
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == '\n' {
                self.line += 1;
                self.chars.next();
            } else if c.is_whitespace() {
                self.chars.next();
            } else if c == '#' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.chars.next();
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<(usize, Token)>, RdfError> {
        self.skip_ws();
        let line = self.line;
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        let tok = match c {
            ';' => {
                self.chars.next();
                Token::Semicolon
            }
            ',' => {
                self.chars.next();
                Token::Comma
            }
            '.' => {
                self.chars.next();
                Token::Dot
            }
            '<' => {
                self.chars.next();
                let mut s = String::new();
                loop {
                    match self.chars.next() {
                        Some('>') => break,
                        Some('\n') | None => {
                            return Err(RdfError::parse(line, "unterminated IRI reference"))
                        }
                        Some(c) => s.push(c),
                    }
                }
                Token::IriRef(s)
            }
            '"' => {
                self.chars.next();
                let mut s = String::new();
                loop {
                    match self.chars.next() {
                        Some('"') => break,
                        Some('\\') => match self.chars.next() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            other => {
                                return Err(RdfError::parse(
                                    line,
                                    format!("bad string escape {other:?}"),
                                ))
                            }
                        },
                        Some('\n') | None => {
                            return Err(RdfError::parse(line, "unterminated string literal"))
                        }
                        Some(c) => s.push(c),
                    }
                }
                Token::Str(s)
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_digit() || "+-.eE".contains(c) {
                        s.push(c);
                        self.chars.next();
                    } else {
                        break;
                    }
                }
                let value: f64 = s
                    .parse()
                    .map_err(|_| RdfError::parse(line, format!("bad numeric literal `{s}`")))?;
                if !value.is_finite() {
                    return Err(RdfError::parse(line, "numeric literal must be finite"));
                }
                let unit = if self.chars.peek() == Some(&'^') {
                    self.chars.next();
                    if self.chars.next() != Some('^') {
                        return Err(RdfError::parse(line, "expected `^^` unit annotation"));
                    }
                    let mut u = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_alphanumeric() || c == '_' || c == '%' || c == '°' {
                            u.push(c);
                            self.chars.next();
                        } else {
                            break;
                        }
                    }
                    if u.is_empty() {
                        return Err(RdfError::parse(line, "empty unit annotation"));
                    }
                    Some(u)
                } else {
                    None
                };
                Token::Num { value, unit }
            }
            c if c.is_alphabetic() || c == '_' || c == '@' => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_alphanumeric() || "_-:@".contains(c) {
                        s.push(c);
                        self.chars.next();
                    } else {
                        break;
                    }
                }
                match s.as_str() {
                    "a" => Token::A,
                    "@prefix" => Token::PrefixDecl,
                    "true" => Token::Bool(true),
                    "false" => Token::Bool(false),
                    _ => {
                        let Some((prefix, local)) = s.split_once(':') else {
                            return Err(RdfError::parse(
                                line,
                                format!("expected prefixed name, got `{s}`"),
                            ));
                        };
                        Token::Prefixed(prefix.to_string(), local.to_string())
                    }
                }
            }
            other => {
                return Err(RdfError::parse(
                    line,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        Ok(Some((line, tok)))
    }
}

/// Parses a document in the Turtle-compatible subset into triples.
///
/// Errors carry the 1-based line number of the offending token.
pub fn parse_turtle(text: &str) -> Result<Vec<Triple>, RdfError> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    while let Some(tok) = lexer.next_token()? {
        tokens.push(tok);
    }

    let mut prefixes: BTreeMap<String, String> = BTreeMap::new();
    let mut triples = Vec::new();
    let mut pos = 0;

    let resolve = |prefixes: &BTreeMap<String, String>,
                   line: usize,
                   tok: &Token|
     -> Result<Iri, RdfError> {
        match tok {
            Token::IriRef(s) => {
                Iri::new(s.clone()).map_err(|_| RdfError::parse(line, "empty IRI reference"))
            }
            Token::Prefixed(p, local) => {
                let Some(base) = prefixes.get(p) else {
                    return Err(RdfError::parse(line, format!("unknown prefix `{p}:`")));
                };
                Iri::new(format!("{base}{local}"))
                    .map_err(|_| RdfError::parse(line, "empty IRI after prefix expansion"))
            }
            Token::A => Ok(ns::rdf_type()),
            other => Err(RdfError::parse(line, format!("expected IRI, got {other:?}"))),
        }
    };

    while pos < tokens.len() {
        let (line, tok) = &tokens[pos];
        if *tok == Token::PrefixDecl {
            // @prefix name: <iri> .
            let (pl, ptok) = tokens
                .get(pos + 1)
                .ok_or_else(|| RdfError::parse(*line, "truncated @prefix"))?;
            let Token::Prefixed(name, rest) = ptok else {
                return Err(RdfError::parse(*pl, "expected prefix name after @prefix"));
            };
            if !rest.is_empty() {
                return Err(RdfError::parse(*pl, "prefix name must end with `:`"));
            }
            let (il, itok) = tokens
                .get(pos + 2)
                .ok_or_else(|| RdfError::parse(*pl, "truncated @prefix"))?;
            let Token::IriRef(base) = itok else {
                return Err(RdfError::parse(*il, "expected <iri> in @prefix"));
            };
            match tokens.get(pos + 3) {
                Some((_, Token::Dot)) => {}
                _ => return Err(RdfError::parse(*il, "expected `.` after @prefix")),
            }
            prefixes.insert(name.clone(), base.clone());
            pos += 4;
            continue;
        }

        // subject predicate object (, object)* (; predicate object...)* .
        let subject = resolve(&prefixes, *line, tok)?;
        pos += 1;
        loop {
            let (pl, ptok) = tokens
                .get(pos)
                .ok_or_else(|| RdfError::parse(*line, "statement missing predicate"))?;
            let predicate = resolve(&prefixes, *pl, ptok)?;
            pos += 1;
            loop {
                let (ol, otok) = tokens
                    .get(pos)
                    .ok_or_else(|| RdfError::parse(*pl, "statement missing object"))?;
                let object = match otok {
                    Token::Str(s) => Object::Literal(Literal::Str(s.clone())),
                    Token::Num { value, unit } => Object::Literal(Literal::Num {
                        value: *value,
                        unit: unit.clone(),
                    }),
                    Token::Bool(b) => Object::Literal(Literal::Bool(*b)),
                    other => Object::Iri(resolve(&prefixes, *ol, other)?),
                };
                triples.push(Triple::new(subject.clone(), predicate.clone(), object));
                pos += 1;
                match tokens.get(pos) {
                    Some((_, Token::Comma)) => {
                        pos += 1;
                        continue;
                    }
                    _ => break,
                }
            }
            match tokens.get(pos) {
                Some((_, Token::Semicolon)) => {
                    pos += 1;
                    continue;
                }
                Some((_, Token::Dot)) => {
                    pos += 1;
                    break;
                }
                Some((l, other)) => {
                    return Err(RdfError::parse(
                        *l,
                        format!("expected `;`, `,` or `.`, got {other:?}"),
                    ))
                }
                None => return Err(RdfError::parse(*pl, "statement missing terminating `.`")),
            }
        }
    }

    Ok(triples)
}
