//! Monte-Carlo frequency estimation from several sub-Nyquist sampling
//! lattices: MD DFT, remainder detection and robust reconstruction.

mod dft;
mod experiment;

pub use dft::{detect_remainder, md_dft, md_dft_direct, sinusoid, MdDft};
pub use experiment::{
    noise_sigma, run_sweep, run_trial, summarize, trial_rng, Experiment, ExperimentConfig,
    GridKind, LcrmChoice, LcrmRule, SweepPoint, SweepResult, TrialRecord, CSV_HEADER,
    DEFAULT_TRIALS,
};
