use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError};

/// Identifies the random generator so reports can be reproduced.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3) via seed_from_u64";

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorType {
    Caps,
    Eliminate,
    Replace,
    Insert,
    All,
}

impl ErrorType {
    pub const SINGLE: [ErrorType; 4] = [ErrorType::Caps, ErrorType::Eliminate, ErrorType::Replace, ErrorType::Insert];

    /// Short name used on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            ErrorType::Caps => "caps",
            ErrorType::Eliminate => "del",
            ErrorType::Replace => "sub",
            ErrorType::Insert => "ins",
            ErrorType::All => "all",
        }
    }

    fn min_len(self) -> usize {
        match self {
            ErrorType::Eliminate => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ErrorType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "caps" => ErrorType::Caps,
            "del" | "eliminate" => ErrorType::Eliminate,
            "sub" | "replace" => ErrorType::Replace,
            "ins" | "insert" => ErrorType::Insert,
            "all" => ErrorType::All,
            other => return Err(format!("unknown error type {other:?} (caps, del, sub, ins, all)")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub error_type: ErrorType,
    /// Fraction of rows to perturb; ignored for [`ErrorType::All`].
    pub rate: f64,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn new(error_type: ErrorType, rate: f64, seed: u64) -> Self {
        PerturbationSpec { error_type, rate, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowChange {
    /// 0-based data row.
    pub row: usize,
    pub error: ErrorType,
    pub original: String,
    pub perturbed: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRow {
    pub row: usize,
    pub error: ErrorType,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbReport {
    pub error_type: ErrorType,
    pub rate: f64,
    pub seed: u64,
    pub rng: &'static str,
    pub rows: usize,
    pub perturbed: Vec<RowChange>,
    pub skipped: Vec<SkippedRow>,
}

impl PerturbReport {
    pub fn skipped_rows(&self) -> std::collections::BTreeSet<usize> {
        self.skipped.iter().map(|s| s.row).collect()
    }
}

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("rate must be in [0, 1], got {0}")]
    Rate(f64),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Rounds halves away from zero (for the non-negative values used here, up).
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

fn apply(error: ErrorType, value: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = value.chars().collect();
    match error {
        ErrorType::Caps => return value.to_uppercase(),
        ErrorType::Eliminate => {
            let i = rng.gen_range(0..chars.len());
            chars.remove(i);
        }
        ErrorType::Replace => {
            let i = rng.gen_range(0..chars.len());
            let choices: Vec<char> = ALPHABET.iter().map(|&b| b as char).filter(|&c| c != chars[i]).collect();
            chars[i] = *choices.choose(rng).expect("alphabet has other letters");
        }
        ErrorType::Insert => {
            let i = rng.gen_range(0..=chars.len());
            chars.insert(i, ALPHABET[rng.gen_range(0..ALPHABET.len())] as char);
        }
        ErrorType::All => unreachable!("expanded into single types"),
    }
    chars.into_iter().collect()
}

/// Introduces seeded spelling errors into column `attr`.
///
/// A single error type hits round(rate * N) rows chosen uniformly. `All`
/// shuffles the rows and gives four consecutive blocks of round(0.2 * N)
/// rows one error type each (caps, eliminate, replace, insert); the rest
/// stay untouched. Rows too short for their error are left unchanged and
/// reported as skipped.
pub fn perturb(gold: &Dataset, attr: &str, spec: &PerturbationSpec) -> Result<(Dataset, PerturbReport), PerturbError> {
    if !(0.0..=1.0).contains(&spec.rate) {
        return Err(PerturbError::Rate(spec.rate));
    }
    let col = gold.column(attr).ok_or_else(|| DatasetError::MissingAttribute(attr.to_string()))?;
    let n = gold.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut plan: Vec<(usize, ErrorType)> = Vec::new();
    if spec.error_type == ErrorType::All {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let block = round_half_up(0.2 * n as f64);
        for (b, error) in ErrorType::SINGLE.into_iter().enumerate() {
            let lo = (b * block).min(n);
            let hi = ((b + 1) * block).min(n);
            plan.extend(order[lo..hi].iter().map(|&r| (r, error)));
        }
    } else {
        let k = round_half_up(spec.rate * n as f64).min(n);
        plan.extend(index::sample(&mut rng, n, k).into_iter().map(|r| (r, spec.error_type)));
    }
    plan.sort_unstable();

    let mut out = gold.clone();
    let mut report = PerturbReport {
        error_type: spec.error_type,
        rate: spec.rate,
        seed: spec.seed,
        rng: RNG_ALGORITHM,
        rows: n,
        perturbed: Vec::new(),
        skipped: Vec::new(),
    };
    for (row, error) in plan {
        let value = &gold.rows[row][col];
        if value.chars().count() < error.min_len() {
            report.skipped.push(SkippedRow { row, error, value: value.clone() });
            continue;
        }
        let new = apply(error, value, &mut rng);
        out.rows[row][col] = new.clone();
        report.perturbed.push(RowChange { row, error, original: value.clone(), perturbed: new });
    }
    Ok((out, report))
}
