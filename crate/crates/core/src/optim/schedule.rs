//! Reduce-on-plateau learning-rate schedule.

/// Divides the learning rate by `1 / factor` once the validation loss has
/// failed to beat its best-so-far value (strict `<`) for `patience`
/// consecutive epochs. After a reduction both the best-so-far value and the
/// counter start over.
#[derive(Clone, Debug, PartialEq)]
pub struct PlateauSchedule {
    pub patience: usize,
    pub factor: f64,
    best: f64,
    wait: usize,
}

impl PlateauSchedule {
    pub fn new(patience: usize, factor: f64) -> Self {
        PlateauSchedule { patience: patience.max(1), factor, best: f64::INFINITY, wait: 0 }
    }

    /// Records one epoch's validation loss; returns the learning rate to use
    /// for the next epoch.
    pub fn observe(&mut self, val_loss: f64, lr: f64) -> f64 {
        if val_loss < self.best {
            self.best = val_loss;
            self.wait = 0;
            return lr;
        }
        self.wait += 1;
        if self.wait >= self.patience {
            self.best = f64::INFINITY;
            self.wait = 0;
            return lr * self.factor;
        }
        lr
    }
}

/// Learning rate after each epoch for a whole validation-loss history.
pub fn plateau_schedule(val_losses: &[f64], initial_lr: f64, patience: usize, factor: f64) -> Vec<f64> {
    let mut schedule = PlateauSchedule::new(patience, factor);
    let mut lr = initial_lr;
    val_losses
        .iter()
        .map(|&v| {
            lr = schedule.observe(v, lr);
            lr
        })
        .collect()
}
