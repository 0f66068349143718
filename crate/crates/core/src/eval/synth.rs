use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::Dataset;
use crate::linker::{levenshtein_within, Gazetteer, GazetteerEntry, TargetKg};

/// Attempts allowed per label before giving up.
pub const RETRY_BUDGET: usize = 10_000;
pub const SYNTH_KG: TargetKg = TargetKg::Wikidata;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("could only place {placed} of {requested} labels at pairwise distance >= {distance} within the retry budget")]
pub struct SynthError {
    pub placed: usize,
    pub requested: usize,
    pub distance: usize,
}

fn candidate(rng: &mut ChaCha8Rng) -> String {
    let tokens = rng.gen_range(1..=3);
    (0..tokens)
        .map(|_| {
            let len = rng.gen_range(3..=8);
            (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect::<String>()
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Mints `n` labels whose pairwise edit distance is at least `min_distance`,
/// each with its own IRI.
///
/// Labels are 1 to 3 lowercase tokens, so they are already normalized.
/// Returns the gazetteer and a gold dataset with columns `label,iri`.
pub fn synth_gold(n: usize, min_distance: usize, seed: u64) -> Result<(Gazetteer, Dataset), SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<Vec<char>> = Vec::with_capacity(n);
    let bound = min_distance.saturating_sub(1);
    while labels.len() < n {
        let mut placed = false;
        for _ in 0..RETRY_BUDGET {
            let c: Vec<char> = candidate(&mut rng).chars().collect();
            if labels.iter().all(|l| levenshtein_within(l, &c, bound).is_none()) {
                labels.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(SynthError { placed: labels.len(), requested: n, distance: min_distance });
        }
    }
    let mut entries = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for (i, l) in labels.into_iter().enumerate() {
        let label: String = l.into_iter().collect();
        let iri = format!("https://example.org/synth/E{:06}", i + 1);
        entries.push(GazetteerEntry { label: label.clone(), iri: iri.clone(), kg: SYNTH_KG });
        rows.push(vec![label, iri]);
    }
    Ok((Gazetteer::from_entries(entries), Dataset::with_rows(vec!["label".into(), "iri".into()], rows)))
}
