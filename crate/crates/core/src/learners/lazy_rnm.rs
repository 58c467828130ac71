use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::experts::LossVector;
use crate::learners::{check_loss_len, Learner, Observation, RoundClock};
use crate::mechanisms::{report_noisy_argmin, BudgetLedger, Noise};
use crate::{Error, Result};

/// Lazy learner that only changes expert at rounds `t = 2^l`, `l >= 1`.
///
/// At such a round it runs report-noisy-argmin with `Laplace(2/epsilon)` noise
/// on the per-expert loss sums over rounds `t/2 ..= t-1`. The windows are
/// disjoint, so every loss vector is read by at most one selection. The
/// starting expert is drawn uniformly at random.
#[derive(Debug, Clone)]
pub struct LazyRnm {
    n: usize,
    epsilon: f64,
    current: usize,
    window: Vec<f64>,
    next_update: usize,
    selections: usize,
    clock: RoundClock,
    offset: usize,
    label: String,
    noise: Noise,
    ledger: BudgetLedger,
}

impl LazyRnm {
    pub fn new(n: usize, epsilon: f64, mut rng: ChaCha8Rng, noise: Noise) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("learner needs at least one expert"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::arg(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self {
            n,
            epsilon,
            current: rng.gen_range(0..n),
            window: vec![0.0; n],
            next_update: 2,
            selections: 0,
            clock: RoundClock::default(),
            offset: 0,
            label: "rnm".into(),
            noise,
            ledger: BudgetLedger::default(),
        })
    }

    /// Shifts ledger round indices by `offset` and prefixes mechanism ids,
    /// for use as a sub-learner started mid-stream.
    pub fn with_ledger_offset(mut self, offset: usize, label: impl Into<String>) -> Self {
        self.offset = offset;
        self.label = label.into();
        self
    }

    /// Plays local round `t`, which must be the next round.
    pub fn step(&mut self, t: usize) -> Result<usize> {
        if t != self.clock.completed() + 1 {
            return Err(Error::state(format!(
                "lazy learner expected round {}, got {t}",
                self.clock.completed() + 1
            )));
        }
        self.clock.begin()?;
        if t == self.next_update {
            self.current = report_noisy_argmin(&self.window, self.epsilon, &mut self.noise)?;
            let id = format!("{}{}", self.label, self.selections);
            for round in t / 2..t {
                self.ledger
                    .charge(self.offset + round, id.as_str(), self.epsilon);
            }
            self.selections += 1;
            self.window.iter_mut().for_each(|w| *w = 0.0);
            self.next_update *= 2;
        }
        Ok(self.current)
    }

    pub fn current(&self) -> usize {
        self.current
    }

    /// Per-expert loss sums accumulated since the last update round.
    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Number of report-noisy-argmin calls so far.
    pub fn selections(&self) -> usize {
        self.selections
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Removes and returns the charges recorded so far.
    pub fn take_ledger(&mut self) -> BudgetLedger {
        std::mem::take(&mut self.ledger)
    }
}

impl Learner for LazyRnm {
    fn num_experts(&self) -> usize {
        self.n
    }

    fn select(&mut self) -> Result<usize> {
        self.step(self.clock.completed() + 1)
    }

    fn observe(&mut self, loss: &LossVector) -> Result<Observation> {
        check_loss_len(loss, self.n)?;
        self.clock.end()?;
        for (w, l) in self.window.iter_mut().zip(loss.values()) {
            *w += l;
        }
        Ok(Observation::default())
    }

    fn ledger(&self) -> &BudgetLedger {
        &self.ledger
    }

    fn rounds(&self) -> usize {
        self.clock.completed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn zero_learner(n: usize) -> LazyRnm {
        LazyRnm::new(n, 1.0, ChaCha8Rng::seed_from_u64(0), Noise::zero()).unwrap()
    }

    #[test]
    fn holds_between_powers_of_two() {
        let mut l = zero_learner(3);
        let mut plays = Vec::new();
        for t in 1..=20 {
            plays.push(l.step(t).unwrap());
            let loss = if t % 3 == 0 {
                vec![0.0, 1.0, 1.0]
            } else {
                vec![1.0, 0.0, 1.0]
            };
            l.observe(&LossVector::new(loss).unwrap()).unwrap();
        }
        assert_eq!(plays[2], plays[1]);
        for t in 2..=20usize {
            if !t.is_power_of_two() {
                assert_eq!(plays[t - 1], plays[t - 2], "t={t}");
            }
        }
        assert_eq!(l.selections(), 4);
    }

    #[test]
    fn noiseless_update_picks_window_minimiser() {
        let mut l = zero_learner(3);
        for t in 1..=3 {
            l.step(t).unwrap();
            // Expert 2 (index 1) is strictly best on rounds 2..=3.
            let loss = if t == 1 {
                vec![0.0, 1.0, 1.0]
            } else {
                vec![0.9, 0.1, 0.5]
            };
            l.observe(&LossVector::new(loss).unwrap()).unwrap();
        }
        assert_eq!(l.step(4).unwrap(), 1);
    }

    #[test]
    fn window_accumulates_running_sums() {
        let mut l = zero_learner(2);
        let losses = [[0.5, 0.25], [1.0, 0.0], [0.25, 0.75]];
        l.step(1).unwrap();
        l.observe(&LossVector::new(losses[0].to_vec()).unwrap())
            .unwrap();
        assert_eq!(l.window(), &[0.5, 0.25]);
        // Round 2 is an update round: the window restarts.
        l.step(2).unwrap();
        assert_eq!(l.window(), &[0.0, 0.0]);
        l.observe(&LossVector::new(losses[1].to_vec()).unwrap())
            .unwrap();
        assert_eq!(l.window(), &[1.0, 0.0]);
        l.step(3).unwrap();
        l.observe(&LossVector::new(losses[2].to_vec()).unwrap())
            .unwrap();
        assert_eq!(l.window(), &[1.25, 0.75]);
    }

    #[test]
    fn out_of_order_rounds() {
        let mut l = zero_learner(2);
        assert!(matches!(l.step(2), Err(Error::State(_))));
        l.step(1).unwrap();
        assert!(l.select().is_err());
        l.observe(&LossVector::zeros(2)).unwrap();
        assert!(l.observe(&LossVector::zeros(2)).is_err());
        assert!(l.select().is_ok());
        assert!(l.observe(&LossVector::zeros(3)).is_err());
    }

    #[test]
    fn each_round_charged_at_most_once() {
        let mut l = LazyRnm::new(4, 0.5, ChaCha8Rng::seed_from_u64(1), Noise::zero()).unwrap();
        let horizon = 300;
        for _ in 0..horizon {
            l.select().unwrap();
            l.observe(&LossVector::zeros(4)).unwrap();
        }
        assert_eq!(l.selections(), 8); // floor(log2 300)
        for (round, charges) in l.ledger().by_round() {
            assert!((1..256).contains(&round));
            assert_eq!(charges.len(), 1);
            assert_eq!(charges[0].epsilon, 0.5);
        }
        assert_eq!(l.ledger().len(), 255);
    }
}
