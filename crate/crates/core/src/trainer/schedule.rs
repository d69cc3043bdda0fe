use serde::{Deserialize, Serialize};

/// How many accumulation rounds (`r`) an epoch is split into.
///
/// `r = n_batches` updates after every batch; `r = 1` updates once per
/// epoch on fully accumulated targets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RSchedule {
    /// Linear descent from `n_batches` at epoch 0 to 1 at epoch `⌊E/2⌋`, then 1.
    #[default]
    LinearRamp,
    PerBatch,
    PerEpoch,
    /// Fixed `r`, clamped into `1..=n_batches`.
    Constant(usize),
}

impl RSchedule {
    pub fn value(self, epoch: usize, total_epochs: usize, n_batches: usize) -> usize {
        let n_batches = n_batches.max(1);
        match self {
            RSchedule::LinearRamp => r_schedule_value(epoch, total_epochs, n_batches),
            RSchedule::PerBatch => n_batches,
            RSchedule::PerEpoch => 1,
            RSchedule::Constant(r) => r.clamp(1, n_batches),
        }
    }
}

/// The default ramp: `max(1, round(n_batches · (1 − e/⌊E/2⌋)))` before the
/// midpoint, 1 from the midpoint on.
pub fn r_schedule_value(epoch: usize, total_epochs: usize, n_batches: usize) -> usize {
    let half = total_epochs / 2;
    if epoch >= half {
        return 1;
    }
    let frac = 1.0 - epoch as f64 / half as f64;
    ((n_batches as f64 * frac).round() as usize).clamp(1, n_batches.max(1))
}

/// Batches accumulated between two updates for a given `r`.
pub fn update_interval(r: usize, n_batches: usize) -> usize {
    n_batches.div_ceil(r.max(1)).max(1)
}

/// Geometric interpolation from `lr_initial` at epoch 0 to `lr_final` at
/// the last epoch.
pub fn lr_schedule_value(epoch: usize, total_epochs: usize, lr_initial: f64, lr_final: f64) -> f64 {
    if total_epochs <= 1 {
        return lr_initial;
    }
    let t = epoch as f64 / (total_epochs - 1) as f64;
    lr_initial * (lr_final / lr_initial).powf(t)
}
