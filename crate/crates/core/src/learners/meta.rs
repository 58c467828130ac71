use crate::experts::{static_comparator, LossMatrix, LossVector};
use crate::learners::{check_loss_len, Learner, Observation, RoundClock};
use crate::mechanisms::BudgetLedger;
use crate::{Error, Result};

pub const DEFAULT_META_CAP: u128 = 1_000_000;

/// A piecewise-constant expert sequence over rounds `1..=T`.
///
/// With switch times `t_1 < ... < t_c` and experts `j_1, ..., j_{c+1}`, the
/// sequence plays `j_1` before `t_1`, `j_i` on `[t_{i-1}, t_i)` and
/// `j_{c+1}` from `t_c` through `T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MetaExpert {
    switch_times: Vec<usize>,
    experts: Vec<usize>,
}

impl MetaExpert {
    pub fn new(switch_times: Vec<usize>, experts: Vec<usize>) -> Result<Self> {
        if experts.len() != switch_times.len() + 1 {
            return Err(Error::arg(format!(
                "{} switch times need {} experts, got {}",
                switch_times.len(),
                switch_times.len() + 1,
                experts.len()
            )));
        }
        if switch_times.first() == Some(&0) || switch_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::arg(
                "switch times must be positive and strictly increasing",
            ));
        }
        Ok(Self {
            switch_times,
            experts,
        })
    }

    pub fn constant(expert: usize) -> Self {
        Self {
            switch_times: Vec::new(),
            experts: vec![expert],
        }
    }

    /// Expert played at round `t` (one-based).
    pub fn expert_at(&self, t: usize) -> usize {
        let i = self.switch_times.partition_point(|&s| s <= t);
        self.experts[i]
    }

    pub fn switch_times(&self) -> &[usize] {
        &self.switch_times
    }

    pub fn experts(&self) -> &[usize] {
        &self.experts
    }
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// `sum_{c=0}^{S} C(T, c) N^{c+1}`, saturating at `u128::MAX`.
pub fn meta_expert_count(horizon: usize, experts: usize, switches: usize) -> u128 {
    let (t, n) = (horizon as u128, experts as u128);
    let mut total: u128 = 0;
    for c in 0..=(switches as u128).min(t) {
        let term =
            binomial(t, c).and_then(|b| n.checked_pow(c as u32 + 1).and_then(|p| b.checked_mul(p)));
        match term.and_then(|x| total.checked_add(x)) {
            Some(x) => total = x,
            None => return u128::MAX,
        }
    }
    total
}

/// All meta-experts with at most `S` switch times in `1..=T`.
///
/// Ordered by switch count, then switch times lexicographically, then expert
/// tuples lexicographically; the constant experts come first.
pub fn enumerate_meta_experts(
    horizon: usize,
    experts: usize,
    switches: usize,
    cap: u128,
) -> Result<Vec<MetaExpert>> {
    if horizon == 0 || experts == 0 {
        return Err(Error::arg("meta-experts need T >= 1 and N >= 1"));
    }
    let count = meta_expert_count(horizon, experts, switches);
    if count > cap {
        return Err(Error::ResourceCap {
            what: "meta-experts",
            count,
            cap,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    for c in 0..=switches.min(horizon) {
        let mut times: Vec<usize> = (1..=c).collect();
        loop {
            let mut js = vec![0usize; c + 1];
            loop {
                out.push(MetaExpert {
                    switch_times: times.clone(),
                    experts: js.clone(),
                });
                if !next_tuple(&mut js, experts) {
                    break;
                }
            }
            if !next_combination(&mut times, horizon) {
                break;
            }
        }
    }
    debug_assert_eq!(out.len() as u128, count);
    Ok(out)
}

/// Advances `js` in base `n`, last digit fastest.
fn next_tuple(js: &mut [usize], n: usize) -> bool {
    for d in js.iter_mut().rev() {
        *d += 1;
        if *d < n {
            return true;
        }
        *d = 0;
    }
    false
}

/// Next strictly increasing tuple over `1..=max` in lexicographic order.
fn next_combination(times: &mut [usize], max: usize) -> bool {
    let c = times.len();
    for i in (0..c).rev() {
        if times[i] < max - (c - 1 - i) {
            times[i] += 1;
            for k in i + 1..c {
                times[k] = times[k - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Reduction from dynamic to static regret: a static learner over the
/// meta-experts, each round playing the expert its chosen meta-expert plays.
///
/// The meta-loss of `e` at round `t` is `l_t(e(t))`, so neighbouring loss
/// streams map to neighbouring meta-loss streams and privacy carries over.
#[derive(Debug, Clone)]
pub struct MetaReduction<B> {
    experts: usize,
    metas: Vec<MetaExpert>,
    base: B,
    clock: RoundClock,
    last_meta: usize,
}

impl<B: Learner> MetaReduction<B> {
    pub fn new(experts: usize, metas: Vec<MetaExpert>, base: B) -> Result<Self> {
        if metas.len() != base.num_experts() {
            return Err(Error::arg(format!(
                "base learner has {} experts but there are {} meta-experts",
                base.num_experts(),
                metas.len()
            )));
        }
        if let Some(bad) = metas
            .iter()
            .flat_map(|m| m.experts())
            .find(|&&j| j >= experts)
        {
            return Err(Error::arg(format!(
                "meta-expert plays unknown expert {bad}"
            )));
        }
        Ok(Self {
            experts,
            metas,
            base,
            clock: RoundClock::default(),
            last_meta: 0,
        })
    }

    pub fn meta_experts(&self) -> &[MetaExpert] {
        &self.metas
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    /// Meta-expert chosen in the latest round.
    pub fn last_meta(&self) -> usize {
        self.last_meta
    }

    /// `l~_t(e) = l_t(e(t))` for every meta-expert.
    pub fn meta_loss(metas: &[MetaExpert], t: usize, loss: &LossVector) -> Result<LossVector> {
        LossVector::new(metas.iter().map(|m| loss[m.expert_at(t)]).collect())
    }

    /// The full `T x |E|` meta-loss matrix of a loss sequence.
    pub fn meta_loss_matrix(metas: &[MetaExpert], losses: &LossMatrix) -> Result<LossMatrix> {
        let rows = (0..losses.rounds())
            .map(|t| Self::meta_loss(metas, t + 1, &losses.loss_vector(t)))
            .collect::<Result<Vec<_>>>()?;
        LossMatrix::from_rows(rows)
    }
}

impl<B: Learner> Learner for MetaReduction<B> {
    fn num_experts(&self) -> usize {
        self.experts
    }

    fn select(&mut self) -> Result<usize> {
        let t = self.clock.begin()?;
        self.last_meta = self.base.select()?;
        Ok(self.metas[self.last_meta].expert_at(t))
    }

    fn observe(&mut self, loss: &LossVector) -> Result<Observation> {
        check_loss_len(loss, self.experts)?;
        let t = self.clock.end()?;
        let meta = Self::meta_loss(&self.metas, t, loss)?;
        self.base.observe(&meta)
    }

    fn ledger(&self) -> &BudgetLedger {
        self.base.ledger()
    }

    fn rounds(&self) -> usize {
        self.clock.completed()
    }
}

/// Non-private follow-the-leader: plays the lowest-index expert with the
/// smallest cumulative loss.
#[derive(Debug, Clone)]
pub struct FollowTheLeader {
    cumulative: Vec<f64>,
    clock: RoundClock,
    ledger: BudgetLedger,
}

impl FollowTheLeader {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("learner needs at least one expert"));
        }
        Ok(Self {
            cumulative: vec![0.0; n],
            clock: RoundClock::default(),
            ledger: BudgetLedger::default(),
        })
    }
}

impl Learner for FollowTheLeader {
    fn num_experts(&self) -> usize {
        self.cumulative.len()
    }

    fn select(&mut self) -> Result<usize> {
        self.clock.begin()?;
        let mut best = 0;
        for (j, v) in self.cumulative.iter().enumerate() {
            if *v < self.cumulative[best] {
                best = j;
            }
        }
        Ok(best)
    }

    fn observe(&mut self, loss: &LossVector) -> Result<Observation> {
        check_loss_len(loss, self.cumulative.len())?;
        self.clock.end()?;
        for (c, l) in self.cumulative.iter_mut().zip(loss.values()) {
            *c += l;
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

/// Greedy base given the whole loss sequence up front: always plays the best
/// fixed expert in hindsight. A test double for exercising reductions, not an
/// online learner.
#[derive(Debug, Clone)]
pub struct HindsightLeader {
    n: usize,
    leader: usize,
    clock: RoundClock,
    ledger: BudgetLedger,
}

impl HindsightLeader {
    pub fn new(losses: &LossMatrix) -> Result<Self> {
        let (_, leader) = static_comparator(losses)?;
        Ok(Self {
            n: losses.experts(),
            leader,
            clock: RoundClock::default(),
            ledger: BudgetLedger::default(),
        })
    }

    pub fn leader(&self) -> usize {
        self.leader
    }
}

impl Learner for HindsightLeader {
    fn num_experts(&self) -> usize {
        self.n
    }

    fn select(&mut self) -> Result<usize> {
        self.clock.begin()?;
        Ok(self.leader)
    }

    fn observe(&mut self, loss: &LossVector) -> Result<Observation> {
        check_loss_len(loss, self.n)?;
        self.clock.end()?;
        Ok(Observation::default())
    }

    fn ledger(&self) -> &BudgetLedger {
        &self.ledger
    }

    fn rounds(&self) -> usize {
        self.clock.completed()
    }
}
