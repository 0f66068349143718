use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use super::normalize::levenshtein_within;
use super::{normalize, AlignmentBackend, EntityLink, Gazetteer, LinkError, TargetKg};
use crate::functions::FunctionCategory;

/// Built-in English stopwords removed from short texts before span matching.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been", "but", "by", "can",
    "could", "did", "do", "does", "for", "from", "had", "has", "have", "he", "her", "his", "in", "into", "is", "it",
    "its", "may", "no", "not", "of", "on", "or", "she", "so", "such", "than", "that", "the", "their", "them", "then",
    "there", "these", "they", "this", "to", "was", "were", "which", "while", "who", "will", "with",
];

#[derive(Debug, Clone)]
pub struct LinkerConfig {
    /// Largest Levenshtein distance accepted for a fuzzy match (at most 2).
    pub max_edit_distance: usize,
    pub stopwords: HashSet<String>,
    /// Longest candidate span, in tokens, tried in short-text mode.
    pub max_span_tokens: usize,
    /// Links scoring below this are dropped.
    pub score_floor: f64,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        LinkerConfig {
            max_edit_distance: 1,
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            max_span_tokens: 3,
            score_floor: 0.0,
        }
    }
}

impl LinkerConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.max_edit_distance > 2 {
            return Err(format!("max_edit_distance must be at most 2, got {}", self.max_edit_distance));
        }
        if self.max_span_tokens == 0 {
            return Err("max_span_tokens must be positive".into());
        }
        Ok(())
    }

    /// Replaces the stopword list with one word per line from `path`.
    pub fn load_stopwords(&mut self, path: &Path) -> std::io::Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.stopwords = text.lines().map(normalize).filter(|w| !w.is_empty()).collect();
        Ok(())
    }
}

struct Candidate {
    chars: Vec<char>,
    iri: String,
}

/// Gazetteer-backed linker: exact match on normalized labels, otherwise the
/// nearest label within `max_edit_distance` edits.
pub struct LocalLinker {
    gazetteer: Gazetteer,
    config: LinkerConfig,
    by_kg: BTreeMap<TargetKg, Vec<Candidate>>,
}

impl LocalLinker {
    pub fn new(gazetteer: Gazetteer, config: LinkerConfig) -> Result<Self, String> {
        config.check()?;
        let mut by_kg: BTreeMap<TargetKg, Vec<Candidate>> = BTreeMap::new();
        for (norm, entry) in gazetteer.normalized_entries() {
            by_kg
                .entry(entry.kg)
                .or_default()
                .push(Candidate { chars: norm.chars().collect(), iri: entry.iri.clone() });
        }
        Ok(LocalLinker { gazetteer, config, by_kg })
    }

    pub fn config(&self) -> &LinkerConfig {
        &self.config
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    /// Best match for an already-normalized string.
    fn best(&self, normalized: &str, kg: TargetKg) -> Option<(String, f64)> {
        if normalized.is_empty() {
            return None;
        }
        let exact = self.gazetteer.exact(normalized).filter(|e| e.kg == kg).map(|e| e.iri.as_str()).min();
        let (iri, score) = if let Some(iri) = exact {
            (iri.to_string(), 1.0)
        } else {
            let query: Vec<char> = normalized.chars().collect();
            let mut best: Option<(usize, &Candidate)> = None;
            for cand in self.by_kg.get(&kg).into_iter().flatten() {
                let Some(d) = levenshtein_within(&query, &cand.chars, self.config.max_edit_distance) else {
                    continue;
                };
                let better = match best {
                    None => true,
                    Some((bd, b)) => (d, cand.iri.as_str()) < (bd, b.iri.as_str()),
                };
                if better {
                    best = Some((d, cand));
                }
            }
            let (d, cand) = best?;
            let len = query.len().max(cand.chars.len()).max(1);
            (cand.iri.clone(), 1.0 - d as f64 / len as f64)
        };
        (score >= self.config.score_floor).then_some((iri, score))
    }

    fn keyword(&self, text: &str, kg: TargetKg) -> Option<EntityLink> {
        self.best(&normalize(text), kg).map(|(iri, score)| EntityLink { surface: text.to_string(), iri, kg, score })
    }

    fn short_text(&self, text: &str, kg: TargetKg) -> Vec<EntityLink> {
        let normalized = normalize(text);
        let tokens: Vec<&str> = normalized.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).collect();
        let usable: Vec<bool> = tokens.iter().map(|t| !self.config.stopwords.contains(*t)).collect();
        let mut consumed = vec![false; tokens.len()];
        let mut found: Vec<(usize, EntityLink)> = Vec::new();
        for len in (1..=self.config.max_span_tokens.min(tokens.len())).rev() {
            for start in 0..=tokens.len() - len {
                let span = start..start + len;
                if span.clone().any(|i| !usable[i] || consumed[i]) {
                    continue;
                }
                let surface = tokens[span.clone()].join(" ");
                if let Some((iri, score)) = self.best(&surface, kg) {
                    span.for_each(|i| consumed[i] = true);
                    found.push((start, EntityLink { surface, iri, kg, score }));
                }
            }
        }
        found.sort_by_key(|(start, _)| *start);
        found.into_iter().map(|(_, l)| l).collect()
    }
}

impl AlignmentBackend for LocalLinker {
    fn align(&self, category: FunctionCategory, text: &str, kg: TargetKg) -> Result<Vec<EntityLink>, LinkError> {
        Ok(match category {
            FunctionCategory::Keyword => self.keyword(text, kg).into_iter().collect(),
            FunctionCategory::ShortText => self.short_text(text, kg),
        })
    }
}
