//! RDF terms, triple patterns and summary triples.

use std::fmt;

use serde::{Serialize, Serializer};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";

/// The four kinds of term that can occur in a query.
///
/// Declaration order is significant: it is the primary key of the
/// lexicographic term order used by every tie-break (IRIs sort first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Iri,
    Literal,
    Blank,
    Variable,
}

/// Literal annotation: a language tag or a datatype IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Annotation {
    Lang(String),
    Datatype(String),
}

/// An IRI, literal, blank node or variable.
///
/// Equality and ordering are structural over `(kind, lexical, annotation)`.
/// `lexical` holds the IRI without angle brackets, the literal's lexical
/// form, the blank node label, or the variable name without `?`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    kind: TermKind,
    lexical: String,
    annotation: Option<Annotation>,
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        let lexical = iri.into();
        debug_assert!(
            !lexical.is_empty() && !lexical.chars().any(char::is_whitespace),
            "invalid IRI {lexical:?}"
        );
        Term {
            kind: TermKind::Iri,
            lexical,
            annotation: None,
        }
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Literal,
            lexical: lexical.into(),
            annotation: None,
        }
    }

    pub fn lang_literal(lexical: impl Into<String>, lang: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Literal,
            lexical: lexical.into(),
            annotation: Some(Annotation::Lang(lang.into())),
        }
    }

    pub fn typed_literal(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Literal,
            lexical: lexical.into(),
            annotation: Some(Annotation::Datatype(datatype.into())),
        }
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Blank,
            lexical: label.into(),
            annotation: None,
        }
    }

    pub fn variable(name: impl Into<String>) -> Self {
        let lexical = name.into();
        debug_assert!(is_variable_name(&lexical), "invalid variable {lexical:?}");
        Term {
            kind: TermKind::Variable,
            lexical,
            annotation: None,
        }
    }

    pub fn rdf_type() -> Self {
        Term::iri(RDF_TYPE)
    }

    pub fn kind(&self) -> TermKind {
        self.kind
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn annotation(&self) -> Option<&Annotation> {
        self.annotation.as_ref()
    }

    pub fn is_iri(&self) -> bool {
        self.kind == TermKind::Iri
    }

    pub fn is_literal(&self) -> bool {
        self.kind == TermKind::Literal
    }

    pub fn is_variable(&self) -> bool {
        self.kind == TermKind::Variable
    }

    /// IRIs and literals. Blank nodes inside a query are scoped to that
    /// query, so they behave like variables and are not concrete.
    pub fn is_concrete(&self) -> bool {
        matches!(self.kind, TermKind::Iri | TermKind::Literal)
    }
}

pub(crate) fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// N-Triples / SPARQL surface syntax.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TermKind::Iri => write!(f, "<{}>", self.lexical),
            TermKind::Blank => write!(f, "_:{}", self.lexical),
            TermKind::Variable => write!(f, "?{}", self.lexical),
            TermKind::Literal => {
                f.write_str("\"")?;
                for c in self.lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")?;
                match &self.annotation {
                    Some(Annotation::Lang(lang)) => write!(f, "@{lang}"),
                    Some(Annotation::Datatype(dt)) => write!(f, "^^<{dt}>"),
                    None => Ok(()),
                }
            }
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A triple pattern `(subject, predicate, object)` from a query body.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    /// Builds a pattern, rejecting literal subjects and predicates that are
    /// neither IRIs nor variables.
    pub fn new(subject: Term, predicate: Term, object: Term) -> Option<Self> {
        let subject_ok = !subject.is_literal();
        let predicate_ok = matches!(predicate.kind(), TermKind::Iri | TermKind::Variable);
        (subject_ok && predicate_ok).then_some(TriplePattern {
            subject,
            predicate,
            object,
        })
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// A summary triple. Unlike a pattern it never holds variables once
/// variable resolution has run.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        Triple {
            subject,
            predicate,
            object,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

impl Serialize for Triple {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        let mut t = serializer.serialize_tuple(3)?;
        t.serialize_element(&self.subject)?;
        t.serialize_element(&self.predicate)?;
        t.serialize_element(&self.object)?;
        t.end()
    }
}
