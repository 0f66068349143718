use std::collections::{HashMap, HashSet};
use std::path::Path;

use thiserror::Error;

use super::{normalize, TargetKg};

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: expected 3 tab-separated fields (label, iri, kg), found {found}")]
    MalformedLine { line: usize, found: usize },
    #[error("line {line}: empty label or IRI")]
    EmptyField { line: usize },
    #[error("line {line}: {message}")]
    UnknownKg { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GazetteerEntry {
    pub label: String,
    pub iri: String,
    pub kg: TargetKg,
}

/// Label-to-IRI lookup table, indexed on normalized labels.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    normalized: Vec<String>,
    index: HashMap<String, Vec<usize>>,
}

impl Gazetteer {
    /// Builds a gazetteer, collapsing entries that agree on normalized label,
    /// IRI and KG (the first spelling is kept).
    pub fn from_entries(entries: impl IntoIterator<Item = GazetteerEntry>) -> Gazetteer {
        let mut g = Gazetteer::default();
        let mut seen = HashSet::new();
        for e in entries {
            let norm = normalize(&e.label);
            if !seen.insert((norm.clone(), e.iri.clone(), e.kg)) {
                continue;
            }
            g.index.entry(norm.clone()).or_default().push(g.entries.len());
            g.normalized.push(norm);
            g.entries.push(e);
        }
        g
    }

    pub fn parse(text: &str) -> Result<Gazetteer, GazetteerError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(GazetteerError::MalformedLine { line: line_no, found: fields.len() });
            }
            let (label, iri) = (fields[0].trim(), fields[1].trim());
            if label.is_empty() || iri.is_empty() {
                return Err(GazetteerError::EmptyField { line: line_no });
            }
            let kg = fields[2]
                .trim()
                .parse::<TargetKg>()
                .map_err(|message| GazetteerError::UnknownKg { line: line_no, message })?;
            entries.push(GazetteerEntry { label: label.to_string(), iri: iri.to_string(), kg });
        }
        Ok(Gazetteer::from_entries(entries))
    }

    pub fn load(path: &Path) -> Result<Gazetteer, GazetteerError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| GazetteerError::Io { path: path.display().to_string(), source })?;
        Gazetteer::parse(&text)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\t{}\n", e.label, e.iri, e.kg));
        }
        out
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries whose normalized label equals `normalized`.
    pub fn exact(&self, normalized: &str) -> impl Iterator<Item = &GazetteerEntry> {
        self.index.get(normalized).into_iter().flatten().map(|&i| &self.entries[i])
    }

    /// (normalized label, entry) pairs.
    pub fn normalized_entries(&self) -> impl Iterator<Item = (&str, &GazetteerEntry)> {
        self.normalized.iter().map(String::as_str).zip(&self.entries)
    }
}
