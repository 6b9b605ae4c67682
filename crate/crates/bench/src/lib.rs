//! Fixtures shared by the criterion benches.

use mdcrt::freqsim::ExperimentConfig;
use mdcrt::{IntMatrix, IntVector};

pub fn m2(rows: [[i64; 2]; 2]) -> IntMatrix {
    IntMatrix::from_rows(&rows)
}

pub fn worked_moduli() -> Vec<IntMatrix> {
    vec![
        m2([[5850, 9000], [2580, 2940]]),
        m2([[28950, 24150], [14140, 11680]]),
        m2([[3440, 3460], [1540, 1160]]),
    ]
}

pub fn worked_noisy() -> Vec<IntVector> {
    vec![
        IntVector::from_i64s(&[52, 36]),
        IntVector::from_i64s(&[37673, 18243]),
        IntVector::from_i64s(&[4446, 1610]),
    ]
}

pub fn sampling_moduli() -> Vec<IntMatrix> {
    vec![
        m2([[1360, 1788], [960, 1728]]),
        m2([[656, 488], [256, 448]]),
        m2([[1532, 1576], [1392, 1656]]),
    ]
}

/// A small SNR sweep: one grid point, a handful of trials.
pub fn small_sweep(trials: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_json(include_str!("../../../configs/snr_small_m.json"))
        .expect("bundled config parses");
    cfg.trials = trials;
    cfg.snr_db_grid = cfg.snr_db_grid.map(|g| g[g.len() - 1..].to_vec());
    cfg
}
