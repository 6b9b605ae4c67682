use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dft::{detect_remainder, sinusoid, MdDft};
use crate::error::{Error, Result};
use crate::intalg::{remainder, IntMatrix, IntVector};
use crate::lattice::Norm;
use crate::mdcrt::{covering_lcrm, CongruenceSystem, RobustOptions, SystemOptions};
use crate::wire::{format_real, Real};

pub const DEFAULT_TRIALS: usize = 200;

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

/// How to pick the representative of `R = lcrm(M_1, …, M_L)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LcrmChoice {
    Matrix(IntMatrix),
    Named(LcrmRule),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LcrmRule {
    /// The computed representative.
    Computed,
    /// A lattice-equal representative whose range contains the true
    /// frequency.
    Cover,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// The `M_i`; the sampling matrices are `M_i⁻ᵀ`.
    pub moduli: Vec<IntMatrix>,
    pub true_frequency: IntVector,
    /// SNR values in dB; `"inf"` means noiseless.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db_grid: Option<Vec<Real>>,
    /// Remainder error bounds; errors are injected directly, no DFT.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_grid: Option<Vec<Real>>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub norm: Norm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial_lcrms: Option<Vec<IntMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lcrm: Option<LcrmChoice>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Snr,
    Tau,
}

/// A validated configuration with its system and transforms built.
#[derive(Debug)]
pub struct Experiment {
    config: ExperimentConfig,
    kind: GridKind,
    grid: Vec<f64>,
    system: CongruenceSystem,
    remainders: Vec<IntVector>,
    /// Per modulus, in SNR mode: the transform and the clean samples.
    channels: Vec<(MdDft, Vec<Complex64>)>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("experiment config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn validate(&self) -> Result<Experiment> {
        Experiment::new(self.clone())
    }
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let (kind, grid) = match (&config.snr_db_grid, &config.tau_grid) {
            (Some(g), None) => (GridKind::Snr, g),
            (None, Some(g)) => (GridKind::Tau, g),
            _ => {
                return Err(Error::Invalid(
                    "exactly one of snr_db_grid and tau_grid must be given".into(),
                ))
            }
        };
        let grid: Vec<f64> = grid.iter().map(|r| r.0).collect();
        if kind == GridKind::Tau && grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Invalid(
                "tau values must be finite and nonnegative".into(),
            ));
        }
        if config.trials == 0 {
            return Err(Error::Invalid("trials must be positive".into()));
        }
        let options = |lcrm: Option<IntMatrix>| SystemOptions {
            norm: config.norm,
            reference: config.reference,
            partial_lcrms: config.partial_lcrms.clone(),
            lcrm,
            ..Default::default()
        };
        let f = &config.true_frequency;
        let system = match &config.lcrm {
            Some(LcrmChoice::Matrix(r)) => {
                CongruenceSystem::new(&config.moduli, options(Some(r.clone())))?
            }
            None | Some(LcrmChoice::Named(LcrmRule::Computed)) => {
                CongruenceSystem::new(&config.moduli, options(None))?
            }
            Some(LcrmChoice::Named(LcrmRule::Cover)) => {
                let s = CongruenceSystem::new(&config.moduli, options(None))?;
                if f.dim() != s.dim() {
                    return Err(Error::DimensionMismatch("true frequency".into()));
                }
                let r =
                    covering_lcrm(&s.moduli()[s.reference()], s.lcrm(), f)?.ok_or_else(|| {
                        Error::OutOfRange(format!("no lcrm representative covers {f}"))
                    })?;
                CongruenceSystem::new(&config.moduli, options(Some(r)))?
            }
        };
        if f.dim() != system.dim() {
            return Err(Error::DimensionMismatch("true frequency".into()));
        }
        if !system.range_check(f)? {
            return Err(Error::OutOfRange(format!(
                "true frequency {f} is outside the reconstruction range"
            )));
        }
        let remainders = config
            .moduli
            .iter()
            .map(|m| remainder(f, m))
            .collect::<Result<Vec<_>>>()?;
        let channels = if kind == GridKind::Snr {
            config
                .moduli
                .iter()
                .map(|m| {
                    let dft = MdDft::new(m)?;
                    let clean = sinusoid(&dft, f)?;
                    Ok((dft, clean))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Experiment {
            config,
            kind,
            grid,
            system,
            remainders,
            channels,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn system(&self) -> &CongruenceSystem {
        &self.system
    }

    /// Error-free remainders of the true frequency.
    pub fn remainders(&self) -> &[IntVector] {
        &self.remainders
    }
}

/// The random stream of one trial: ChaCha8 keyed by the seed, with the
/// stream id carrying the grid and trial indices.
pub fn trial_rng(seed: u64, grid_index: usize, trial_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((grid_index as u64) << 32) | trial_index as u64);
    rng
}

/// `σ` of each real component for `SNR = −10·log10(2σ²)`.
pub fn noise_sigma(snr_db: f64) -> f64 {
    (10f64.powf(-snr_db / 10.0) / 2.0).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub grid_value: f64,
    /// Detected (SNR mode) or perturbed (τ mode) remainders.
    pub remainders: Vec<IntVector>,
    /// `r̃_i − r_i` before any re-reduction; in τ mode the rounded injected
    /// errors.
    pub remainder_errors: Vec<IntVector>,
    /// `m̃`; the zero vector when reconstruction failed.
    pub estimate: Vec<f64>,
    /// `f̃`, componentwise nearest integer of `m̃`.
    pub rounded: IntVector,
    pub error: f64,
    pub relative_error: f64,
    pub detected: bool,
    pub failure: Option<Error>,
}

/// Uniform in the ℓ2 ball of the given radius, then rounded to integers.
fn ball_error<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> IntVector {
    if radius == 0.0 {
        return IntVector::zeros(dim);
    }
    let dir: Vec<f64> = (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let len = Norm::L2.of(&dir).max(f64::MIN_POSITIVE);
    let rho = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    IntVector::from_i64s(
        &dir.iter()
            .map(|x| (x / len * rho).round() as i64)
            .collect::<Vec<_>>(),
    )
}

pub fn run_trial<R: Rng>(experiment: &Experiment, grid_value: f64, rng: &mut R) -> TrialRecord {
    let f = &experiment.config.true_frequency;
    let moduli = &experiment.config.moduli;
    let d = f.dim();
    let (noisy, errors): (Vec<IntVector>, Vec<IntVector>) = match experiment.kind {
        GridKind::Tau => moduli
            .iter()
            .zip(&experiment.remainders)
            .map(|(m, r)| {
                let e = ball_error(rng, d, grid_value);
                let wrapped = remainder(&(r + &e), m).expect("nonsingular modulus");
                (wrapped, e)
            })
            .unzip(),
        GridKind::Snr => {
            let sigma = noise_sigma(grid_value);
            experiment
                .channels
                .iter()
                .zip(&experiment.remainders)
                .map(|((dft, clean), r)| {
                    let samples: Vec<Complex64> = if sigma > 0.0 {
                        clean
                            .iter()
                            .map(|x| {
                                let re: f64 = rng.sample(StandardNormal);
                                let im: f64 = rng.sample(StandardNormal);
                                x + Complex64::new(sigma * re, sigma * im)
                            })
                            .collect()
                    } else {
                        clean.clone()
                    };
                    let spec = dft.transform(&samples).expect("sample count matches");
                    let k = detect_remainder(&spec, dft.bin_points()).expect("nonempty");
                    let e = &k - r;
                    (k, e)
                })
                .unzip()
        }
    };

    let ff = f.to_f64();
    let fnorm = Norm::L2.of(&ff);
    let (estimate, rounded, failure) = match experiment
        .system
        .robust_reconstruct(&noisy, RobustOptions::default())
    {
        Ok(res) => (res.estimate.clone(), res.rounded_estimate(), None),
        Err(e) => (vec![0.0; d], IntVector::zeros(d), Some(e)),
    };
    let diff: Vec<f64> = ff.iter().zip(&estimate).map(|(a, b)| a - b).collect();
    let rdiff = (f - &rounded).to_f64();
    TrialRecord {
        grid_value,
        remainders: noisy,
        remainder_errors: errors,
        error: Norm::L2.of(&diff),
        relative_error: if fnorm > 0.0 {
            Norm::L2.of(&rdiff) / fnorm
        } else {
            Norm::L2.of(&rdiff)
        },
        detected: failure.is_none() && rounded == *f,
        estimate,
        rounded,
        failure,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub grid_value: f64,
    pub mean_error: f64,
    pub mean_relative_error: f64,
    pub detection_probability: f64,
    pub trials: usize,
    /// Trials whose reconstruction raised an error.
    pub failures: usize,
    /// Largest post-rounding remainder error seen at this point.
    pub max_remainder_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: GridKind,
    pub points: Vec<SweepPoint>,
}

pub const CSV_HEADER: &str =
    "grid_value,mean_error,mean_relative_error,detection_probability,trials";

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                format_real(p.grid_value),
                format_real(p.mean_error),
                format_real(p.mean_relative_error),
                format_real(p.detection_probability),
                p.trials
            )
            .expect("writing to a String");
        }
        out
    }
}

pub fn summarize(grid_value: f64, records: &[TrialRecord]) -> SweepPoint {
    let n = records.len();
    let mut err = 0.0;
    let mut rel = 0.0;
    let mut hits = 0usize;
    let mut failures = 0usize;
    let mut max_re: f64 = 0.0;
    // fixed trial order keeps the sums bit-identical across thread counts
    for r in records {
        err += r.error;
        rel += r.relative_error;
        hits += r.detected as usize;
        failures += r.failure.is_some() as usize;
        for e in &r.remainder_errors {
            max_re = max_re.max(Norm::L2.of(&e.to_f64()));
        }
    }
    SweepPoint {
        grid_value,
        mean_error: err / n as f64,
        mean_relative_error: rel / n as f64,
        detection_probability: hits as f64 / n as f64,
        trials: n,
        failures,
        max_remainder_error: max_re,
    }
}

impl Experiment {
    /// All trials of one grid point, in trial order.
    pub fn run_point(&self, grid_index: usize) -> Vec<TrialRecord> {
        let value = self.grid[grid_index];
        let seed = self.config.rng_seed;
        (0..self.config.trials)
            .into_par_iter()
            .map(|t| run_trial(self, value, &mut trial_rng(seed, grid_index, t)))
            .collect()
    }

    pub fn run_sweep(&self) -> SweepResult {
        SweepResult {
            kind: self.kind,
            points: (0..self.grid.len())
                .map(|g| summarize(self.grid[g], &self.run_point(g)))
                .collect(),
        }
    }
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    Ok(config.validate()?.run_sweep())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn im(rows: &[[i64; 2]]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    fn small_config() -> ExperimentConfig {
        let base = im(&[[12, 5], [2, 10]]);
        ExperimentConfig {
            moduli: vec![
                &base * &im(&[[2, 1], [1, 2]]),
                &base * &im(&[[2, 2], [1, 3]]),
            ],
            true_frequency: IntVector::from_i64s(&[40, 31]),
            snr_db_grid: Some(vec![Real(f64::INFINITY), Real(-5.0)]),
            tau_grid: None,
            trials: 20,
            rng_seed: 11,
            norm: Norm::L2,
            reference: None,
            partial_lcrms: None,
            lcrm: Some(LcrmChoice::Named(LcrmRule::Cover)),
        }
    }

    #[test]
    fn noiseless_trial_is_exact() {
        let exp = small_config().validate().unwrap();
        let rec = run_trial(&exp, f64::INFINITY, &mut trial_rng(0, 0, 0));
        assert!(rec.detected);
        assert_eq!(rec.remainders, exp.remainders());
        assert_eq!(rec.error, 0.0);
        let sweep = exp.run_sweep();
        assert_eq!(sweep.points[0].detection_probability, 1.0);
    }

    #[test]
    fn sweep_is_deterministic() {
        let exp = small_config().validate().unwrap();
        let a = exp.run_sweep();
        let b = exp.run_sweep();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        assert_eq!(pool.install(|| exp.run_sweep()), a);
    }

    #[test]
    fn single_trial_sweep_reproduces_run_trial() {
        let mut cfg = small_config();
        cfg.trials = 1;
        cfg.snr_db_grid = Some(vec![Real(-12.0)]);
        let exp = cfg.validate().unwrap();
        let rec = run_trial(&exp, -12.0, &mut trial_rng(cfg.rng_seed, 0, 0));
        let p = &exp.run_sweep().points[0];
        assert_eq!(p.mean_error, rec.error);
        assert_eq!(p.mean_relative_error, rec.relative_error);
        assert_eq!(p.detection_probability, rec.detected as u8 as f64);
    }

    #[test]
    fn tau_zero_is_exact_and_errors_stay_in_ball() {
        let mut cfg = small_config();
        cfg.snr_db_grid = None;
        cfg.tau_grid = Some(vec![Real(0.0), Real(1.5)]);
        let exp = cfg.validate().unwrap();
        let s = exp.run_sweep();
        assert_eq!(s.kind, GridKind::Tau);
        assert_eq!(s.points[0].mean_error, 0.0);
        assert_eq!(s.points[0].detection_probability, 1.0);
        // rounding moves a point by at most √2/2
        assert!(s.points[1].max_remainder_error <= 1.5 + 0.5f64.sqrt());
    }

    #[test]
    fn csv_layout() {
        let exp = small_config().validate().unwrap();
        let csv = exp.run_sweep().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("inf,0.000000,0.000000,1.000000,20"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_config();
        cfg.tau_grid = Some(vec![Real(1.0)]);
        assert!(matches!(cfg.validate(), Err(Error::Invalid(_))));

        let mut cfg = small_config();
        cfg.lcrm = None;
        cfg.true_frequency = IntVector::from_i64s(&[100_000, 3]);
        assert!(matches!(cfg.validate(), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = small_config();
        let text = cfg.to_json();
        assert!(text.contains(r#""lcrm": "cover""#));
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        let minimal = r#"{"moduli":[{"rows":2,"cols":2,"data":[3,1,1,2]},{"rows":2,"cols":2,"data":["2","0","0","2"]}],
            "true_frequency":[1,1],"tau_grid":[0]}"#;
        let cfg = ExperimentConfig::from_json(minimal).unwrap();
        assert_eq!(cfg.trials, DEFAULT_TRIALS);
        assert!(ExperimentConfig::from_json(r#"{"moduli":[],"bogus":1}"#).is_err());
    }

    #[test]
    fn sigma_from_snr() {
        assert!((2.0 * noise_sigma(0.0).powi(2) - 1.0).abs() < 1e-12);
        assert!((2.0 * noise_sigma(10.0).powi(2) - 0.1).abs() < 1e-12);
        assert_eq!(noise_sigma(f64::INFINITY), 0.0);
    }
}
