use crate::geometry::FlowScene;
use crate::scene_file::ScheduleOverrides;
use serde::{Deserialize, Serialize};

/// Step size, noise levels and stopping rules of the optimizer.
///
/// `h`, `sigma0` and `grad_tol` act on normalized coordinates: junction
/// positions divided by the domain diameter and costs divided by the cost
/// of crossing that diameter in still water.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IDSchedule {
    pub h: f64,
    pub rounds: usize,
    /// Noisy steps per round.
    pub perturb_duration: usize,
    /// Noise amplitude of the first round. Round `i` of `N` uses
    /// `sigma0 · (1 − (i − 1) / N)`.
    pub sigma0: f64,
    pub grad_tol: f64,
    pub max_descent_steps: usize,
    pub seed: u64,
}

impl Default for IDSchedule {
    fn default() -> Self {
        IDSchedule {
            h: 1e-3,
            rounds: 20,
            perturb_duration: 50,
            sigma0: 0.05,
            grad_tol: 1e-8,
            max_descent_steps: 20_000,
            seed: 0,
        }
    }
}

impl IDSchedule {
    /// Defaults with `sigma0` set to a tenth of the mean normalized boundary
    /// size.
    pub fn default_for(scene: &FlowScene) -> Self {
        let bs = scene.boundaries();
        let sigma0 = if bs.is_empty() {
            0.0
        } else {
            0.1 * bs.iter().map(|b| b.diameter()).sum::<f64>() / (bs.len() as f64 * scene.diameter())
        };
        IDSchedule { sigma0, ..Self::default() }
    }

    /// Plain gradient descent: one round without noise.
    pub fn descent_only(&self) -> Self {
        IDSchedule { rounds: 1, sigma0: 0.0, ..self.clone() }
    }

    pub fn with_overrides(mut self, o: &ScheduleOverrides) -> Self {
        if let Some(v) = o.h {
            self.h = v;
        }
        if let Some(v) = o.rounds {
            self.rounds = v;
        }
        if let Some(v) = o.perturb_duration {
            self.perturb_duration = v;
        }
        if let Some(v) = o.sigma0 {
            self.sigma0 = v;
        }
        if let Some(v) = o.grad_tol {
            self.grad_tol = v;
        }
        if let Some(v) = o.max_descent_steps {
            self.max_descent_steps = v;
        }
        self
    }

    pub fn with_seed(self, seed: u64) -> Self {
        IDSchedule { seed, ..self }
    }

    /// Noise amplitude of round `i` (1-based).
    pub fn sigma(&self, i: usize) -> f64 {
        self.sigma0 * (1.0 - (i as f64 - 1.0) / self.rounds as f64)
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = self.h > 0.0
            && self.h.is_finite()
            && self.rounds >= 1
            && self.sigma0 >= 0.0
            && self.sigma0.is_finite()
            && self.grad_tol > 0.0
            && self.max_descent_steps >= 1;
        if ok {
            Ok(())
        } else {
            Err(format!("invalid schedule {self:?}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_decay() {
        let s = IDSchedule { sigma0: 1.0, rounds: 4, ..IDSchedule::default() };
        assert_eq!(s.sigma(1), 1.0);
        assert_eq!(s.sigma(2), 0.75);
        assert_eq!(s.sigma(4), 0.25);
    }

    #[test]
    fn jet_default_noise() {
        // two boundaries of length 20 in a domain of diameter 20·√2
        let s = IDSchedule::default_for(&crate::fixtures::jet());
        assert!((s.sigma0 - 0.1 / 2f64.sqrt()).abs() < 1e-12);
    }
}
