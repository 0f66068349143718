//! A small Turtle reader covering what mapping documents need: prefix and
//! base directives, IRIs, prefixed names, blank node labels and property
//! lists, `a`, and string/numeric/boolean literals. Collections are not
//! supported.

use std::collections::BTreeMap;
use std::fmt;

use super::SyntaxError;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Iri(String),
    Blank(String),
    Literal { value: String, datatype: Option<String>, language: Option<String> },
}

impl Node {
    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Node::Iri(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Iri(i) => write!(f, "<{i}>"),
            Node::Blank(b) => write!(f, "_:{b}"),
            Node::Literal { value, .. } => write!(f, "{value:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub subject: Node,
    pub predicate: String,
    pub object: Node,
}

#[derive(Debug, Default)]
pub struct TurtleGraph {
    pub prefixes: BTreeMap<String, String>,
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Blank(String),
    Str(String),
    Number(String, &'static str),
    Bool(String),
    LangTag(String),
    Carets,
    A,
    PrefixKw { sparql: bool },
    BaseKw { sparql: bool },
    Dot,
    Semi,
    Comma,
    LBracket,
    RBracket,
    LParen,
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), pos: Pos { line: 1, col: 1 } }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn err(&self, pos: Pos, message: impl Into<String>) -> SyntaxError {
        SyntaxError { line: pos.line, column: pos.col, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.peek() {
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

    fn tokens(mut self) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let start = self.pos;
            let Some(&c) = self.chars.peek() else { break };
            let tok = match c {
                '<' => {
                    self.bump();
                    let mut iri = String::new();
                    loop {
                        match self.bump() {
                            Some('>') => break,
                            Some('\\') => iri.push(self.unicode_escape(start)?),
                            Some(c) if c == '\n' || c == ' ' || c == '"' => {
                                return Err(self.err(start, "invalid character in IRI"))
                            }
                            Some(c) => iri.push(c),
                            None => return Err(self.err(start, "unterminated IRI")),
                        }
                    }
                    Tok::Iri(iri)
                }
                '"' | '\'' => Tok::Str(self.string(start)?),
                '@' => {
                    self.bump();
                    let word = self.word();
                    match word.as_str() {
                        "prefix" => Tok::PrefixKw { sparql: false },
                        "base" => Tok::BaseKw { sparql: false },
                        "" => return Err(self.err(start, "expected directive or language tag after '@'")),
                        _ => Tok::LangTag(word),
                    }
                }
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(self.err(start, "expected '^^'"));
                    }
                    Tok::Carets
                }
                '.' => {
                    self.bump();
                    Tok::Dot
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '[' => {
                    self.bump();
                    Tok::LBracket
                }
                ']' => {
                    self.bump();
                    Tok::RBracket
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                '_' => {
                    self.bump();
                    if self.bump() != Some(':') {
                        return Err(self.err(start, "expected ':' after '_' in blank node label"));
                    }
                    let label = self.name_chars();
                    if label.is_empty() {
                        return Err(self.err(start, "empty blank node label"));
                    }
                    Tok::Blank(label)
                }
                c if c.is_ascii_digit() || c == '+' || c == '-' => self.number(start)?,
                _ => {
                    let prefix = self.name_chars();
                    if self.chars.peek() == Some(&':') {
                        self.bump();
                        let local = self.name_chars();
                        Tok::PName(prefix, local)
                    } else {
                        match prefix.as_str() {
                            "a" => Tok::A,
                            "true" | "false" => Tok::Bool(prefix),
                            _ if prefix.eq_ignore_ascii_case("prefix") => Tok::PrefixKw { sparql: true },
                            _ if prefix.eq_ignore_ascii_case("base") => Tok::BaseKw { sparql: true },
                            "" => return Err(self.err(start, format!("unexpected character {c:?}"))),
                            _ => return Err(self.err(start, format!("unexpected token {prefix:?}"))),
                        }
                    }
                }
            };
            out.push((tok, start));
        }
        Ok(out)
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_alphanumeric() || c == '-' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    /// Name characters for prefixes and local names. A trailing '.' is never
    /// part of a name, so `ex:a.` ends a statement.
    fn name_chars(&mut self) -> String {
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '%') {
                s.push(c);
                self.bump();
            } else if c == '.' {
                let mut look = self.chars.clone();
                look.next();
                match look.peek() {
                    Some(&n) if n.is_alphanumeric() || matches!(n, '_' | '-' | '%') => {
                        s.push(c);
                        self.bump();
                    }
                    _ => break,
                }
            } else {
                break;
            }
        }
        s
    }

    fn number(&mut self, start: Pos) -> Result<Tok, SyntaxError> {
        let mut s = String::new();
        if let Some(&c) = self.chars.peek() {
            if c == '+' || c == '-' {
                s.push(c);
                self.bump();
            }
        }
        let mut is_decimal = false;
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.bump();
            } else if c == '.' && !is_decimal {
                let mut look = self.chars.clone();
                look.next();
                if look.peek().is_some_and(|n| n.is_ascii_digit()) {
                    is_decimal = true;
                    s.push(c);
                    self.bump();
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        if !s.chars().any(|c| c.is_ascii_digit()) {
            return Err(self.err(start, "malformed number"));
        }
        Ok(Tok::Number(s, if is_decimal { "decimal" } else { "integer" }))
    }

    fn unicode_escape(&mut self, start: Pos) -> Result<char, SyntaxError> {
        let len = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.err(start, "invalid escape in IRI")),
        };
        let hex: String = (0..len).filter_map(|_| self.bump()).collect();
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.err(start, "invalid unicode escape"))
    }

    fn string(&mut self, start: Pos) -> Result<String, SyntaxError> {
        let quote = self.bump().unwrap();
        let mut long = false;
        {
            let mut look = self.chars.clone();
            if look.next() == Some(quote) && look.next() == Some(quote) {
                long = true;
                self.bump();
                self.bump();
            }
        }
        let mut s = String::new();
        loop {
            let c = self.bump().ok_or_else(|| self.err(start, "unterminated string"))?;
            if c == quote {
                if !long {
                    break;
                }
                let mut look = self.chars.clone();
                if look.next() == Some(quote) && look.next() == Some(quote) {
                    self.bump();
                    self.bump();
                    break;
                }
                s.push(c);
            } else if c == '\\' {
                let e = self.bump().ok_or_else(|| self.err(start, "unterminated escape"))?;
                s.push(match e {
                    't' => '\t',
                    'n' => '\n',
                    'r' => '\r',
                    'b' => '\u{8}',
                    'f' => '\u{c}',
                    '"' => '"',
                    '\'' => '\'',
                    '\\' => '\\',
                    'u' | 'U' => {
                        let len = if e == 'u' { 4 } else { 8 };
                        let hex: String = (0..len).filter_map(|_| self.bump()).collect();
                        u32::from_str_radix(&hex, 16)
                            .ok()
                            .and_then(char::from_u32)
                            .ok_or_else(|| self.err(start, "invalid unicode escape"))?
                    }
                    other => return Err(self.err(start, format!("invalid escape '\\{other}'"))),
                });
            } else if c == '\n' && !long {
                return Err(self.err(start, "newline in single-line string"));
            } else {
                s.push(c);
            }
        }
        Ok(s)
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    idx: usize,
    end: Pos,
    base: Option<String>,
    graph: TurtleGraph,
    blank_counter: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.idx).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        let p = self.pos();
        SyntaxError { line: p.line, column: p.col, message: message.into() }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&tok) {
            self.idx += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn document(&mut self) -> Result<(), SyntaxError> {
        while let Some(tok) = self.peek().cloned() {
            match tok {
                Tok::PrefixKw { sparql: sparql_style } => {
                    self.idx += 1;
                    let prefix = match self.next() {
                        Some(Tok::PName(p, l)) if l.is_empty() => p,
                        _ => {
                            self.idx -= 1;
                            return Err(self.err("expected prefix name ending in ':'"));
                        }
                    };
                    let iri = match self.next() {
                        Some(Tok::Iri(i)) => self.resolve(&i),
                        _ => {
                            self.idx -= 1;
                            return Err(self.err("expected IRI in prefix directive"));
                        }
                    };
                    self.graph.prefixes.insert(prefix, iri);
                    if !sparql_style {
                        self.expect(Tok::Dot, "'.' after prefix directive")?;
                    }
                }
                Tok::BaseKw { sparql: sparql_style } => {
                    self.idx += 1;
                    match self.next() {
                        Some(Tok::Iri(i)) => self.base = Some(self.resolve(&i)),
                        _ => {
                            self.idx -= 1;
                            return Err(self.err("expected IRI in base directive"));
                        }
                    }
                    if !sparql_style {
                        self.expect(Tok::Dot, "'.' after base directive")?;
                    }
                }
                _ => {
                    self.triples()?;
                    self.expect(Tok::Dot, "'.' at end of statement")?;
                }
            }
        }
        Ok(())
    }

    fn resolve(&self, iri: &str) -> String {
        let has_scheme = iri
            .split_once(':')
            .is_some_and(|(s, _)| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "+-.".contains(c)));
        match &self.base {
            Some(base) if !has_scheme => {
                if iri.starts_with('#') {
                    let stem = base.split('#').next().unwrap_or(base);
                    format!("{stem}{iri}")
                } else {
                    let dir = base.rfind('/').map(|i| &base[..=i]).unwrap_or(base);
                    format!("{dir}{iri}")
                }
            }
            _ => iri.to_string(),
        }
    }

    fn fresh_blank(&mut self) -> Node {
        self.blank_counter += 1;
        Node::Blank(format!("genid{}", self.blank_counter))
    }

    fn triples(&mut self) -> Result<(), SyntaxError> {
        if self.peek() == Some(&Tok::LBracket) {
            let subject = self.blank_property_list()?;
            if !matches!(self.peek(), Some(Tok::Dot)) {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> Result<Node, SyntaxError> {
        match self.next() {
            Some(Tok::Iri(i)) => Ok(Node::Iri(self.resolve(&i))),
            Some(Tok::PName(p, l)) => self.expand(&p, &l).map(Node::Iri),
            Some(Tok::Blank(b)) => Ok(Node::Blank(b)),
            _ => {
                self.idx -= 1;
                Err(self.err("expected subject"))
            }
        }
    }

    fn expand(&mut self, prefix: &str, local: &str) -> Result<String, SyntaxError> {
        match self.graph.prefixes.get(prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => {
                self.idx -= 1;
                Err(self.err(format!("undeclared prefix '{prefix}:'")))
            }
        }
    }

    fn predicate(&mut self) -> Result<String, SyntaxError> {
        match self.next() {
            Some(Tok::A) => Ok(RDF_TYPE.to_string()),
            Some(Tok::Iri(i)) => Ok(self.resolve(&i)),
            Some(Tok::PName(p, l)) => self.expand(&p, &l),
            _ => {
                self.idx -= 1;
                Err(self.err("expected predicate"))
            }
        }
    }

    fn predicate_object_list(&mut self, subject: &Node) -> Result<(), SyntaxError> {
        loop {
            let predicate = self.predicate()?;
            loop {
                let object = self.object()?;
                self.graph.statements.push(Statement {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if self.peek() == Some(&Tok::Comma) {
                    self.idx += 1;
                } else {
                    break;
                }
            }
            // One or more ';' may separate pairs, and a trailing ';' is allowed.
            let mut saw_semi = false;
            while self.peek() == Some(&Tok::Semi) {
                self.idx += 1;
                saw_semi = true;
            }
            if !saw_semi || matches!(self.peek(), Some(Tok::Dot) | Some(Tok::RBracket) | None) {
                return Ok(());
            }
        }
    }

    fn blank_property_list(&mut self) -> Result<Node, SyntaxError> {
        self.expect(Tok::LBracket, "'['")?;
        let node = self.fresh_blank();
        if self.peek() != Some(&Tok::RBracket) {
            self.predicate_object_list(&node)?;
        }
        self.expect(Tok::RBracket, "']'")?;
        Ok(node)
    }

    fn object(&mut self) -> Result<Node, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::LBracket) => self.blank_property_list(),
            Some(Tok::LParen) => Err(self.err("RDF collections are not supported")),
            Some(Tok::Iri(i)) => {
                self.idx += 1;
                Ok(Node::Iri(self.resolve(&i)))
            }
            Some(Tok::PName(p, l)) => {
                self.idx += 1;
                self.expand(&p, &l).map(Node::Iri)
            }
            Some(Tok::Blank(b)) => {
                self.idx += 1;
                Ok(Node::Blank(b))
            }
            Some(Tok::Number(n, ty)) => {
                self.idx += 1;
                Ok(Node::Literal { value: n, datatype: Some(format!("{XSD}{ty}")), language: None })
            }
            Some(Tok::Bool(b)) => {
                self.idx += 1;
                Ok(Node::Literal { value: b, datatype: Some(format!("{XSD}boolean")), language: None })
            }
            Some(Tok::Str(s)) => {
                self.idx += 1;
                match self.peek().cloned() {
                    Some(Tok::LangTag(lang)) => {
                        self.idx += 1;
                        Ok(Node::Literal { value: s, datatype: None, language: Some(lang) })
                    }
                    Some(Tok::Carets) => {
                        self.idx += 1;
                        let dt = match self.next() {
                            Some(Tok::Iri(i)) => self.resolve(&i),
                            Some(Tok::PName(p, l)) => self.expand(&p, &l)?,
                            _ => {
                                self.idx -= 1;
                                return Err(self.err("expected datatype IRI after '^^'"));
                            }
                        };
                        Ok(Node::Literal { value: s, datatype: Some(dt), language: None })
                    }
                    _ => Ok(Node::Literal { value: s, datatype: None, language: None }),
                }
            }
            _ => Err(self.err("expected object")),
        }
    }
}

/// Parses Turtle text into prefixes and statements, in document order.
pub fn parse_turtle(text: &str) -> Result<TurtleGraph, SyntaxError> {
    let lexer = Lexer::new(text);
    let mut end = Pos { line: 1, col: 1 };
    for c in text.chars() {
        if c == '\n' {
            end.line += 1;
            end.col = 1;
        } else {
            end.col += 1;
        }
    }
    let toks = lexer.tokens()?;
    let mut parser = Parser { toks, idx: 0, end, base: None, graph: TurtleGraph::default(), blank_counter: 0 };
    parser.document()?;
    Ok(parser.graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_prefixes_and_property_lists() {
        let g = parse_turtle(
            r#"@prefix ex: <http://ex.org/> .
               PREFIX rr: <http://www.w3.org/ns/r2rml#>
               ex:a a ex:C ; ex:p [ ex:q "v"@en, 3 ] ;
                 ex:r "x"^^ex:dt .
               # comment
               <http://ex.org/b> ex:p true ."#,
        )
        .unwrap();
        assert_eq!(g.prefixes.len(), 2);
        assert_eq!(g.statements.len(), 6);
        assert_eq!(g.statements[0].predicate, RDF_TYPE);
        assert!(g.statements.iter().any(|s| matches!(&s.object, Node::Literal { language: Some(l), .. } if l == "en")));
    }

    #[test]
    fn long_strings_and_escapes() {
        let g = parse_turtle("<http://s> <http://p> \"\"\"a \"quoted\"\nline\"\"\" , 'b\\tc' .").unwrap();
        assert_eq!(
            g.statements[0].object,
            Node::Literal { value: "a \"quoted\"\nline".into(), datatype: None, language: None }
        );
        assert_eq!(g.statements[1].object, Node::Literal { value: "b\tc".into(), datatype: None, language: None });
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_turtle("@prefix ex: <http://ex.org/> .\nex:a ex:p .").unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(e.column, 11);
        let e = parse_turtle("ex:a ex:p ex:o .").unwrap_err();
        assert!(e.message.contains("undeclared prefix"));
        assert_eq!((e.line, e.column), (1, 1));
        assert!(parse_turtle("<http://s> <http://p> \"open").is_err());
        assert!(parse_turtle("<http://s> <http://p> ( 1 2 ) .").is_err());
    }

    #[test]
    fn base_resolution() {
        let g = parse_turtle("@base <http://ex.org/doc.ttl> .\n<#a> <p> <#b> .").unwrap();
        assert_eq!(g.statements[0].subject, Node::Iri("http://ex.org/doc.ttl#a".into()));
        assert_eq!(g.statements[0].predicate, "http://ex.org/p");
    }

    #[test]
    fn local_name_trailing_dot_terminates() {
        let g = parse_turtle("@prefix ex: <http://ex.org/> . ex:a ex:p ex:o.").unwrap();
        assert_eq!(g.statements[0].object, Node::Iri("http://ex.org/o".into()));
    }
}
