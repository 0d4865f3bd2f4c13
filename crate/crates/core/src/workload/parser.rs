//! Recursive-descent parser for the SELECT / basic-graph-pattern subset of
//! SPARQL found in endpoint query logs.
//!
//! OPTIONAL and UNION groups are flattened into the pattern list; FILTER,
//! BIND, MINUS and VALUES are skipped; property paths, subqueries,
//! collections, blank-node property lists, GRAPH and SERVICE are errors.

use std::collections::HashMap;
use std::fmt;

use crate::term::{
    is_variable_name, Term, TriplePattern, RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE,
    XSD_INTEGER,
};

use super::ParsedQuery;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {offset}: {reason}")]
pub struct ParseError {
    pub offset: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Prepended to bare identifiers such as `Person`.
    pub base_prefix: Option<String>,
}

pub fn parse_query(text: &str) -> Result<ParsedQuery, ParseError> {
    parse_query_with(text, &ParseOptions::default())
}

pub fn parse_query_with(text: &str, options: &ParseOptions) -> Result<ParsedQuery, ParseError> {
    let mut parser = Parser {
        src: text,
        pos: 0,
        prefixes: HashMap::new(),
        options,
        patterns: Vec::new(),
        anon: 0,
    };
    parser.query()?;
    if parser.patterns.is_empty() {
        return Err(ParseError {
            offset: 0,
            reason: "empty basic graph pattern".into(),
        });
    }
    Ok(ParsedQuery {
        id: 0,
        patterns: parser.patterns,
        raw: text.to_string(),
        source_line: 0,
    })
}

/// Parses a single term written as in a query: `<iri>`, a prefixed or bare
/// name, a literal, a blank node or a variable.
pub fn parse_term(text: &str, options: &ParseOptions) -> Result<Term, ParseError> {
    let mut parser = Parser {
        src: text,
        pos: 0,
        prefixes: HashMap::new(),
        options,
        patterns: Vec::new(),
        anon: 0,
    };
    parser.skip_ws();
    let term = parser.term(Slot::Object)?;
    parser.skip_ws();
    if parser.peek().is_some() {
        return parser.err("trailing input after term");
    }
    Ok(term)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    prefixes: HashMap<String, String>,
    options: &'a ParseOptions,
    patterns: Vec<TriplePattern>,
    anon: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Subject,
    Object,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '%')
}

impl<'a> Parser<'a> {
    fn err<T>(&self, reason: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.pos,
            reason: reason.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    /// Case-insensitive keyword match at a word boundary. Does not consume.
    fn at_keyword(&self, kw: &str) -> bool {
        let rest = self.rest();
        rest.len() >= kw.len()
            && rest.is_char_boundary(kw.len())
            && rest[..kw.len()].eq_ignore_ascii_case(kw)
            && !rest[kw.len()..]
                .chars()
                .next()
                .is_some_and(|c| c.is_alphanumeric() || c == '_' || c == ':')
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.at_keyword(kw) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn query(&mut self) -> Result<(), ParseError> {
        loop {
            if self.eat_keyword("PREFIX") {
                self.skip_ws();
                let start = self.pos;
                while self.peek().is_some_and(|c| c != ':' && !c.is_whitespace()) {
                    self.bump();
                }
                let name = self.src[start..self.pos].to_string();
                self.expect(':')?;
                self.skip_ws();
                let iri = self.iri_ref()?;
                self.prefixes.insert(name, iri);
            } else if self.eat_keyword("BASE") {
                self.skip_ws();
                self.iri_ref()?;
            } else {
                break;
            }
        }
        if !self.eat_keyword("SELECT") {
            self.skip_ws();
            return self.err("unsupported query form (only SELECT is supported)");
        }
        let _ = self.eat_keyword("DISTINCT") || self.eat_keyword("REDUCED");
        self.projection()?;
        while self.eat_keyword("FROM") {
            self.eat_keyword("NAMED");
            self.skip_ws();
            self.iri_ref()?;
        }
        self.eat_keyword("WHERE");
        self.skip_ws();
        if self.peek() != Some('{') {
            return self.err("expected '{' opening the WHERE clause");
        }
        self.group()?;
        // Solution modifiers (ORDER BY, LIMIT, ...) do not affect the BGP.
        Ok(())
    }

    fn projection(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some('*') {
            self.bump();
            return Ok(());
        }
        let mut any = false;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('?') | Some('$') => {
                    self.variable()?;
                }
                Some('(') => self.skip_balanced('(', ')')?,
                _ => break,
            }
            any = true;
        }
        if any {
            Ok(())
        } else {
            self.err("expected projection variables or '*'")
        }
    }

    fn group(&mut self) -> Result<(), ParseError> {
        self.expect('{')?;
        self.skip_ws();
        if self.at_keyword("SELECT") {
            return self.err("subqueries are not supported");
        }
        loop {
            self.skip_ws();
            match self.peek() {
                None => return self.err("unterminated group"),
                Some('}') => {
                    self.bump();
                    return Ok(());
                }
                Some('{') => self.group()?,
                Some('.') => {
                    self.bump();
                }
                _ => {
                    if self.eat_keyword("UNION") {
                        self.skip_ws();
                        if self.peek() != Some('{') {
                            return self.err("expected '{' after UNION");
                        }
                    } else if self.eat_keyword("OPTIONAL") {
                        self.skip_ws();
                        self.group()?;
                    } else if self.eat_keyword("FILTER") {
                        self.skip_constraint()?;
                    } else if self.eat_keyword("MINUS") {
                        self.skip_ws();
                        self.skip_balanced('{', '}')?;
                    } else if self.eat_keyword("BIND") {
                        self.skip_ws();
                        self.skip_balanced('(', ')')?;
                    } else if self.eat_keyword("VALUES") {
                        self.skip_ws();
                        if self.peek() == Some('(') {
                            self.skip_balanced('(', ')')?;
                        } else {
                            self.variable()?;
                        }
                        self.skip_ws();
                        self.skip_balanced('{', '}')?;
                    } else if self.at_keyword("GRAPH") || self.at_keyword("SERVICE") {
                        return self.err("named graphs and federation are not supported");
                    } else {
                        self.triples_same_subject()?;
                    }
                }
            }
        }
    }

    fn skip_constraint(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.eat_keyword("NOT") {
            self.skip_ws();
        }
        if self.eat_keyword("EXISTS") {
            self.skip_ws();
            return self.skip_balanced('{', '}');
        }
        // Builtin or function call: `regex(...)`, `<fn>(...)`, or a bare `(...)`.
        while self
            .peek()
            .is_some_and(|c| c != '(' && !c.is_whitespace() && c != '}')
        {
            self.bump();
        }
        self.skip_ws();
        self.skip_balanced('(', ')')
    }

    /// Skips a balanced bracketed region, ignoring brackets inside strings.
    fn skip_balanced(&mut self, open: char, close: char) -> Result<(), ParseError> {
        if self.peek() != Some(open) {
            return self.err(format!("expected '{open}'"));
        }
        let mut depth = 0usize;
        while let Some(c) = self.bump() {
            if c == open {
                depth += 1;
            } else if c == close {
                depth -= 1;
                if depth == 0 {
                    return Ok(());
                }
            } else if c == '"' || c == '\'' {
                while let Some(d) = self.bump() {
                    if d == '\\' {
                        self.bump();
                    } else if d == c {
                        break;
                    }
                }
            }
        }
        self.err(format!("unbalanced '{open}'"))
    }

    fn triples_same_subject(&mut self) -> Result<(), ParseError> {
        let subject = self.term(Slot::Subject)?;
        if subject.is_literal() {
            return self.err("literal in subject position");
        }
        loop {
            self.skip_ws();
            let predicate = self.verb()?;
            loop {
                let object = self.term(Slot::Object)?;
                let pattern = TriplePattern::new(subject.clone(), predicate.clone(), object)
                    .expect("subject and predicate kinds already checked");
                self.patterns.push(pattern);
                self.skip_ws();
                if self.peek() == Some(',') {
                    self.bump();
                } else {
                    break;
                }
            }
            self.skip_ws();
            if self.peek() == Some(';') {
                while self.peek() == Some(';') {
                    self.bump();
                    self.skip_ws();
                }
                if matches!(self.peek(), Some('.') | Some('}') | None) {
                    break;
                }
            } else {
                break;
            }
        }
        self.skip_ws();
        match self.peek() {
            Some('.') => {
                self.bump();
                Ok(())
            }
            Some('}') => Ok(()),
            _ => {
                if self.at_keyword("FILTER")
                    || self.at_keyword("OPTIONAL")
                    || self.at_keyword("BIND")
                    || self.at_keyword("MINUS")
                    || self.at_keyword("VALUES")
                    || self.peek() == Some('{')
                {
                    Ok(())
                } else {
                    self.err("expected '.', ';', ',' or '}' after triple")
                }
            }
        }
    }

    fn verb(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('^') | Some('!') | Some('(') => {
                return self.err("property paths are not supported")
            }
            _ => {}
        }
        let predicate = if self.at_keyword("a") {
            self.bump();
            Term::iri(RDF_TYPE)
        } else {
            match self.peek() {
                Some('?') | Some('$') => self.variable()?,
                Some('<') => Term::iri(self.iri_ref()?),
                Some(c) if c.is_alphabetic() || c == ':' => self.name()?,
                _ => return self.err("expected predicate"),
            }
        };
        // Path operators directly after the predicate.
        match (self.peek(), self.peek_at(1)) {
            (Some('?'), next) if !next.is_some_and(|c| c.is_alphanumeric() || c == '_') => {
                return self.err("property paths are not supported")
            }
            (Some('*') | Some('+') | Some('/') | Some('|'), _) => {
                return self.err("property paths are not supported")
            }
            _ => {}
        }
        self.skip_ws();
        if matches!(self.peek(), Some('*') | Some('+') | Some('/') | Some('|')) {
            return self.err("property paths are not supported");
        }
        Ok(predicate)
    }

    fn term(&mut self, slot: Slot) -> Result<Term, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => self.err("unexpected end of query"),
            Some('?') | Some('$') => self.variable(),
            Some('<') => Ok(Term::iri(self.iri_ref()?)),
            Some('"') | Some('\'') if slot == Slot::Object => self.literal(),
            Some('_') if self.peek_at(1) == Some(':') => {
                self.pos += 2;
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_alphanumeric() || matches!(c, '_' | '-'))
                {
                    self.bump();
                }
                if self.pos == start {
                    return self.err("empty blank node label");
                }
                Ok(Term::blank(&self.src[start..self.pos]))
            }
            Some('[') => {
                self.bump();
                self.skip_ws();
                if self.peek() == Some(']') {
                    self.bump();
                    self.anon += 1;
                    Ok(Term::blank(format!("anon{}", self.anon - 1)))
                } else {
                    self.err("blank node property lists are not supported")
                }
            }
            Some('(') => self.err("collections are not supported"),
            Some(c) if slot == Slot::Object && (c.is_ascii_digit() || c == '+' || c == '-') => {
                self.numeric()
            }
            Some(_) if slot == Slot::Object && self.at_keyword("true") => {
                self.pos += 4;
                Ok(Term::typed_literal("true", XSD_BOOLEAN))
            }
            Some(_) if slot == Slot::Object && self.at_keyword("false") => {
                self.pos += 5;
                Ok(Term::typed_literal("false", XSD_BOOLEAN))
            }
            Some(c) if c.is_alphabetic() || c == ':' => self.name(),
            Some(c) => self.err(format!("unexpected character '{c}'")),
        }
    }

    fn variable(&mut self) -> Result<Term, ParseError> {
        self.bump();
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.bump();
        }
        let name = &self.src[start..self.pos];
        if !is_variable_name(name) {
            return self.err("invalid variable name");
        }
        Ok(Term::variable(name))
    }

    fn iri_ref(&mut self) -> Result<String, ParseError> {
        if self.peek() != Some('<') {
            return self.err("expected '<'");
        }
        self.bump();
        let start = self.pos;
        loop {
            match self.bump() {
                Some('>') => break,
                Some(c) if c.is_whitespace() || c == '<' => {
                    return self.err("invalid character in IRI")
                }
                Some(_) => {}
                None => return self.err("unterminated IRI"),
            }
        }
        let iri = &self.src[start..self.pos - 1];
        if iri.is_empty() {
            return self.err("empty IRI");
        }
        Ok(iri.to_string())
    }

    /// Prefixed name or bare identifier.
    fn name(&mut self) -> Result<Term, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(is_name_char) {
            self.bump();
        }
        // A trailing '.' terminates the triple, it is not part of the name.
        while self.pos > start && self.src[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        let token = &self.src[start..self.pos];
        if token.is_empty() {
            return self.err("expected a name");
        }
        if let Some((prefix, local)) = token.split_once(':') {
            match self.prefixes.get(prefix) {
                Some(ns) => Ok(Term::iri(format!("{ns}{local}"))),
                // Endpoint logs rely on server-side prefixes; keep the name verbatim.
                None => Ok(Term::iri(token)),
            }
        } else {
            match &self.options.base_prefix {
                Some(base) => Ok(Term::iri(format!("{base}{token}"))),
                None => Ok(Term::iri(token)),
            }
        }
    }

    fn literal(&mut self) -> Result<Term, ParseError> {
        let quote = self.bump().expect("caller peeked a quote");
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.pos += 2 * quote.len_utf8();
        }
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return self.err("unterminated literal"),
                Some('\\') => match self.bump() {
                    Some('n') => value.push('\n'),
                    Some('t') => value.push('\t'),
                    Some('r') => value.push('\r'),
                    Some('b') => value.push('\u{8}'),
                    Some('f') => value.push('\u{c}'),
                    Some(c @ ('"' | '\'' | '\\')) => value.push(c),
                    Some('u') => value.push(self.unicode_escape(4)?),
                    Some('U') => value.push(self.unicode_escape(8)?),
                    _ => return self.err("invalid escape in literal"),
                },
                Some(c) if c == quote => {
                    if !long {
                        break;
                    }
                    if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                        self.pos += 2 * quote.len_utf8();
                        break;
                    }
                    value.push(c);
                }
                Some('\n') | Some('\r') if !long => return self.err("newline in literal"),
                Some(c) => value.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == '-')
                {
                    self.bump();
                }
                if self.pos == start {
                    return self.err("empty language tag");
                }
                Ok(Term::lang_literal(value, &self.src[start..self.pos]))
            }
            Some('^') if self.peek_at(1) == Some('^') => {
                self.pos += 2;
                let datatype = match self.peek() {
                    Some('<') => self.iri_ref()?,
                    _ => self.name()?.lexical().to_string(),
                };
                Ok(Term::typed_literal(value, datatype))
            }
            _ => Ok(Term::literal(value)),
        }
    }

    fn unicode_escape(&mut self, digits: usize) -> Result<char, ParseError> {
        let hex = self.rest().get(..digits).unwrap_or("");
        let code = u32::from_str_radix(hex, 16).ok().and_then(char::from_u32);
        match code {
            Some(c) if hex.len() == digits => {
                self.pos += digits;
                Ok(c)
            }
            _ => self.err("invalid unicode escape"),
        }
    }

    fn numeric(&mut self) -> Result<Term, ParseError> {
        let start = self.pos;
        if matches!(self.peek(), Some('+') | Some('-')) {
            self.bump();
        }
        let mut datatype = XSD_INTEGER;
        while let Some(c) = self.peek() {
            match c {
                '0'..='9' => {}
                '.' if self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => {
                    datatype = XSD_DECIMAL
                }
                'e' | 'E' => {
                    datatype = XSD_DOUBLE;
                    if matches!(self.peek_at(1), Some('+') | Some('-')) {
                        self.bump();
                    }
                }
                _ => break,
            }
            self.bump();
        }
        let lexical = &self.src[start..self.pos];
        if !lexical.chars().any(|c| c.is_ascii_digit()) {
            return self.err("invalid numeric literal");
        }
        Ok(Term::typed_literal(lexical, datatype))
    }
}

impl fmt::Display for ParsedQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT * WHERE {")?;
        for p in &self.patterns {
            write!(f, " {p}")?;
        }
        f.write_str(" }")
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::testutil;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rendered_patterns_parse_back(patterns in prop::collection::vec(testutil::pattern(), 1..8)) {
            let parsed = parse_query(&testutil::query_text(&patterns)).unwrap();
            prop_assert_eq!(parsed.patterns, patterns);
        }

        #[test]
        fn canonical_form_is_a_fixed_point(q in testutil::query()) {
            let again = parse_query(&q.to_string()).unwrap();
            prop_assert_eq!(&again.patterns, &q.patterns);
            prop_assert_eq!(again.to_string(), q.to_string());
        }
    }
}
