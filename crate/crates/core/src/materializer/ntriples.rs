use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{RdfGraph, Term, Triple};

#[derive(Debug, Error)]
pub enum NTriplesError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn escape_into(out: &mut String, s: &str, iri: bool) {
    for c in s.chars() {
        match c {
            '\\' if !iri => out.push_str("\\\\"),
            '"' if !iri => out.push_str("\\\""),
            '\n' if !iri => out.push_str("\\n"),
            '\r' if !iri => out.push_str("\\r"),
            '\t' if !iri => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7f}' || (iri && matches!(c, '<' | '>' | '"' | '\\' | ' ')) => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

pub(crate) fn write_term(out: &mut String, term: &Term) {
    match term {
        Term::Iri(iri) => {
            out.push('<');
            escape_into(out, iri, true);
            out.push('>');
        }
        Term::Literal { value, datatype, language } => {
            out.push('"');
            escape_into(out, value, false);
            out.push('"');
            if let Some(lang) = language {
                out.push('@');
                out.push_str(lang);
            } else if let Some(dt) = datatype {
                out.push_str("^^<");
                escape_into(out, dt, true);
                out.push('>');
            }
        }
    }
}

pub fn triple_line(t: &Triple) -> String {
    let mut line = String::new();
    write_term(&mut line, &Term::Iri(t.subject.clone()));
    line.push(' ');
    write_term(&mut line, &Term::Iri(t.predicate.clone()));
    line.push(' ');
    write_term(&mut line, &t.object);
    line.push_str(" .");
    line
}

/// Canonical N-Triples: one line per triple, lines sorted bytewise.
pub fn to_ntriples(graph: &RdfGraph) -> String {
    let mut lines: Vec<String> = graph.iter().map(triple_line).collect();
    lines.sort();
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

pub fn write_ntriples(graph: &RdfGraph, path: &Path) -> Result<(), NTriplesError> {
    std::fs::write(path, to_ntriples(graph))
        .map_err(|source| NTriplesError::Io { path: path.display().to_string(), source })
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl Cursor<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, NTriplesError> {
        Err(NTriplesError::Syntax { line: self.line, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.chars.next_if(|c| *c == ' ' || *c == '\t').is_some() {}
    }

    fn expect(&mut self, want: char) -> Result<(), NTriplesError> {
        match self.chars.next() {
            Some(c) if c == want => Ok(()),
            Some(c) => self.err(format!("expected {want:?}, found {c:?}")),
            None => self.err(format!("expected {want:?}, found end of line")),
        }
    }

    fn escape(&mut self) -> Result<char, NTriplesError> {
        let c = match self.chars.next() {
            Some(c) => c,
            None => return self.err("dangling escape"),
        };
        let width = match c {
            'u' => 4,
            'U' => 8,
            't' => return Ok('\t'),
            'n' => return Ok('\n'),
            'r' => return Ok('\r'),
            'b' => return Ok('\u{8}'),
            'f' => return Ok('\u{c}'),
            '"' | '\'' | '\\' => return Ok(c),
            other => return self.err(format!("unknown escape \\{other}")),
        };
        let hex: String = (0..width).filter_map(|_| self.chars.next()).collect();
        match u32::from_str_radix(&hex, 16).ok().filter(|_| hex.len() == width).and_then(char::from_u32) {
            Some(c) => Ok(c),
            None => self.err(format!("bad unicode escape {hex:?}")),
        }
    }

    fn iri(&mut self) -> Result<String, NTriplesError> {
        self.expect('<')?;
        let mut out = String::new();
        loop {
            match self.chars.next() {
                Some('>') => return Ok(out),
                Some('\\') => out.push(self.escape()?),
                Some(c) => out.push(c),
                None => return self.err("unterminated IRI"),
            }
        }
    }

    fn literal(&mut self) -> Result<Term, NTriplesError> {
        self.expect('"')?;
        let mut value = String::new();
        loop {
            match self.chars.next() {
                Some('"') => break,
                Some('\\') => value.push(self.escape()?),
                Some(c) => value.push(c),
                None => return self.err("unterminated literal"),
            }
        }
        let (mut datatype, mut language) = (None, None);
        match self.chars.peek() {
            Some('@') => {
                self.chars.next();
                let mut tag = String::new();
                while let Some(c) = self.chars.next_if(|c| c.is_ascii_alphanumeric() || *c == '-') {
                    tag.push(c);
                }
                if tag.is_empty() {
                    return self.err("empty language tag");
                }
                language = Some(tag);
            }
            Some('^') => {
                self.chars.next();
                self.expect('^')?;
                datatype = Some(self.iri()?);
            }
            _ => {}
        }
        Ok(Term::Literal { value, datatype, language })
    }
}

/// Parses N-Triples. Blank nodes are not supported.
pub fn parse_ntriples(text: &str) -> Result<RdfGraph, NTriplesError> {
    let mut graph = RdfGraph::default();
    for (i, raw) in text.lines().enumerate() {
        let mut cur = Cursor { chars: raw.chars().peekable(), line: i + 1 };
        cur.skip_ws();
        if matches!(cur.chars.peek(), None | Some('#')) {
            continue;
        }
        if cur.chars.peek() == Some(&'_') {
            return cur.err("blank nodes are not supported");
        }
        let subject = cur.iri()?;
        cur.skip_ws();
        let predicate = cur.iri()?;
        cur.skip_ws();
        let object = match cur.chars.peek() {
            Some('<') => Term::Iri(cur.iri()?),
            Some('"') => cur.literal()?,
            Some('_') => return cur.err("blank nodes are not supported"),
            _ => return cur.err("expected IRI or literal object"),
        };
        cur.skip_ws();
        cur.expect('.')?;
        cur.skip_ws();
        if !matches!(cur.chars.peek(), None | Some('#')) {
            return cur.err("trailing content after '.'");
        }
        graph.insert(Triple { subject, predicate, object });
    }
    Ok(graph)
}

pub fn read_ntriples(path: &Path) -> Result<RdfGraph, NTriplesError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| NTriplesError::Io { path: path.display().to_string(), source })?;
    parse_ntriples(&text)
}
