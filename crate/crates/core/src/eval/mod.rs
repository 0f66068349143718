//! Evaluation harness: seeded spelling-error testbeds, synthetic gold
//! standards, precision/recall scoring and the baseline-vs-eager benchmark.

mod bench;
mod perturb;
mod score;
mod synth;

pub use bench::{
    bench, bench_fixture, AttributeCalls, BenchError, BenchFixture, BenchOptions, BenchReport, LatencyBackend,
    ModeReport,
};
pub use perturb::{
    perturb, round_half_up, ErrorType, PerturbError, PerturbReport, PerturbationSpec, RowChange, SkippedRow,
    RNG_ALGORITHM,
};
pub use score::{score, EvalReport};
pub use synth::{synth_gold, SynthError, RETRY_BUDGET, SYNTH_KG};
