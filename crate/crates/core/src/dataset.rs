//! Tabular sources: a header plus string rows, read from and written to
//! RFC 4180 CSV.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::rml::MappingDocument;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: duplicate attribute {name:?} in header")]
    DuplicateAttribute { path: String, name: String },
    #[error("{path}: row {row} has {found} fields, header has {expected}")]
    Arity { path: String, row: usize, expected: usize, found: usize },
    #[error("attribute {0:?} not in header")]
    MissingAttribute(String),
    #[error("source {path:?} not found in {searched}")]
    SourceNotFound { path: String, searched: String },
}

/// Sources keyed by the path string used in `rml:source`.
pub type Sources = BTreeMap<String, Dataset>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Dataset {
    pub fn new(header: Vec<String>) -> Self {
        Dataset { header, rows: Vec::new() }
    }

    pub fn with_rows(header: Vec<String>, rows: Vec<Vec<String>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == header.len()));
        Dataset { header, rows }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values of one attribute, in row order.
    pub fn values<'a>(&'a self, name: &str) -> Result<impl Iterator<Item = &'a str> + 'a, DatasetError> {
        let idx = self.column(name).ok_or_else(|| DatasetError::MissingAttribute(name.to_string()))?;
        Ok(self.rows.iter().map(move |r| r[idx].as_str()))
    }

    pub fn from_reader<R: Read>(reader: R, label: &str) -> Result<Dataset, DatasetError> {
        let csv_err = |source| DatasetError::Csv { path: label.to_string(), source };
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
        let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
        let mut names = HashSet::new();
        for h in &header {
            if !names.insert(h) {
                return Err(DatasetError::DuplicateAttribute { path: label.to_string(), name: h.clone() });
            }
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != header.len() {
                return Err(DatasetError::Arity {
                    path: label.to_string(),
                    row: i + 1,
                    expected: header.len(),
                    found: rec.len(),
                });
            }
            rows.push(rec.iter().map(str::to_owned).collect());
        }
        Ok(Dataset { header, rows })
    }

    pub fn read_csv(path: &Path) -> Result<Dataset, DatasetError> {
        let label = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|source| DatasetError::Io { path: label.clone(), source })?;
        Dataset::from_reader(file, &label)
    }

    pub fn write_to<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(writer);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing CSV to memory");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), DatasetError> {
        std::fs::write(path, self.to_csv_string())
            .map_err(|source| DatasetError::Io { path: path.display().to_string(), source })
    }
}

/// Loads every logical source named in `doc`, trying each directory in
/// turn.
pub fn load_sources(doc: &MappingDocument, dirs: &[PathBuf]) -> Result<Sources, DatasetError> {
    let mut sources = Sources::new();
    for tm in &doc.triples_maps {
        let name = &tm.logical_source.source_path;
        if sources.contains_key(name) {
            continue;
        }
        let found = dirs.iter().map(|d| d.join(name)).find(|p| p.is_file());
        match found {
            Some(p) => {
                sources.insert(name.clone(), Dataset::read_csv(&p)?);
            }
            None => {
                return Err(DatasetError::SourceNotFound {
                    path: name.clone(),
                    searched: dirs.iter().map(|d| d.display().to_string()).collect::<Vec<_>>().join(", "),
                })
            }
        }
    }
    Ok(sources)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_quoting_survives() {
        let ds = Dataset::with_rows(
            vec!["attr1".into(), "attr2".into()],
            vec![vec!["a, \"b\"\nc".into(), " x ".into()], vec!["".into(), "y".into()]],
        );
        let text = ds.to_csv_string();
        assert!(text.starts_with("attr1,attr2\r\n"));
        assert_eq!(Dataset::from_reader(text.as_bytes(), "mem").unwrap(), ds);
    }

    #[test]
    fn rejects_bad_arity_and_duplicate_header() {
        assert!(matches!(
            Dataset::from_reader("a,b\n1,2\n3\n".as_bytes(), "m"),
            Err(DatasetError::Arity { row: 2, .. })
        ));
        assert!(matches!(
            Dataset::from_reader("a,a\n1,2\n".as_bytes(), "m"),
            Err(DatasetError::DuplicateAttribute { .. })
        ));
    }
}
