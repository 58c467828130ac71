use serde::{Deserialize, Serialize};

use crate::experts::LossMatrix;
use crate::{Error, Result};

/// A length-`T` expert sequence together with its number of switches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparatorPath {
    experts: Vec<usize>,
    switch_count: usize,
}

impl ComparatorPath {
    pub fn new(experts: Vec<usize>) -> Self {
        let switch_count = experts.windows(2).filter(|w| w[0] != w[1]).count();
        Self {
            experts,
            switch_count,
        }
    }

    pub fn experts(&self) -> &[usize] {
        &self.experts
    }

    pub fn switch_count(&self) -> usize {
        self.switch_count
    }

    /// Membership in the comparator class with budget `switches`.
    pub fn within_budget(&self, switches: usize) -> bool {
        self.switch_count <= switches
    }

    /// Total loss of the path, summed in round order.
    pub fn loss(&self, losses: &LossMatrix) -> f64 {
        let mut total = 0.0;
        for (t, &j) in self.experts.iter().enumerate() {
            total += losses.get(t, j);
        }
        total
    }
}

/// Best single expert in hindsight: `(total loss, expert)`, ties to the lowest index.
pub fn static_comparator(losses: &LossMatrix) -> Result<(f64, usize)> {
    let mut sums = vec![0.0; losses.experts()];
    for row in losses.rows() {
        for (s, l) in sums.iter_mut().zip(row) {
            *s += l;
        }
    }
    let mut best = 0;
    for (j, s) in sums.iter().enumerate() {
        if *s < sums[best] {
            best = j;
        }
    }
    Ok((sums[best], best))
}

#[derive(Clone, Copy)]
struct Top2 {
    best: (f64, usize),
    second: (f64, usize),
}

impl Top2 {
    fn of(layer: &[f64]) -> Self {
        let mut best = (f64::INFINITY, usize::MAX);
        let mut second = (f64::INFINITY, usize::MAX);
        for (j, &v) in layer.iter().enumerate() {
            if v < best.0 {
                second = best;
                best = (v, j);
            } else if v < second.0 {
                second = (v, j);
            }
        }
        Self { best, second }
    }

    /// `min_{j' != j}` with ties to the lowest index.
    fn excluding(&self, j: usize) -> (f64, usize) {
        if j == self.best.1 {
            self.second
        } else {
            self.best
        }
    }
}

const STAY: u32 = u32::MAX;

/// One forward step of the exact-switch recursion.
///
/// `prev[s][j]` is the least loss over rounds `1..t-1` of a path ending at
/// `j` with exactly `s` switches; `next` receives the same for round `t`.
fn advance(prev: &[Vec<f64>], next: &mut [Vec<f64>], row: &[f64], mut back: Option<&mut [u32]>) {
    let n = row.len();
    for s in 0..prev.len() {
        let top = (s > 0).then(|| Top2::of(&prev[s - 1]));
        for j in 0..n {
            let stay = prev[s][j];
            let (mut value, mut from) = (stay, STAY);
            if let Some(top) = &top {
                let (v, jp) = top.excluding(j);
                if v < value {
                    value = v;
                    from = jp as u32;
                }
            }
            next[s][j] = value + row[j];
            if let Some(back) = back.as_deref_mut() {
                back[s * n + j] = from;
            }
        }
    }
}

fn validate(losses: &LossMatrix, switches: i64) -> Result<usize> {
    if switches < 0 {
        return Err(Error::arg(format!(
            "switch budget must be nonnegative, got {switches}"
        )));
    }
    if losses.rounds() == 0 || losses.experts() == 0 {
        return Err(Error::arg("comparator needs a nonempty loss matrix"));
    }
    if losses.experts() >= STAY as usize {
        return Err(Error::arg("too many experts for the comparator"));
    }
    Ok((switches as usize).min(losses.rounds() - 1))
}

fn first_layer(losses: &LossMatrix, budget: usize) -> Vec<Vec<f64>> {
    let mut layer = vec![vec![f64::INFINITY; losses.experts()]; budget + 1];
    layer[0].copy_from_slice(losses.row(0));
    layer
}

/// Exact minimum loss over expert sequences with at most `switches` switches,
/// together with a minimising path.
///
/// Runs in `O(T N S)` time using the best and second-best entry of the
/// previous layer for the switching transition. Ties prefer fewer switches,
/// then staying over switching, then lower expert indices.
pub fn dynamic_comparator(losses: &LossMatrix, switches: i64) -> Result<(f64, ComparatorPath)> {
    let budget = validate(losses, switches)?;
    let n = losses.experts();
    let rounds = losses.rounds();
    let layer_size = (budget + 1) * n;

    let mut back = vec![STAY; rounds * layer_size];
    let mut prev = first_layer(losses, budget);
    let mut next = prev.clone();
    for t in 1..rounds {
        advance(
            &prev,
            &mut next,
            losses.row(t),
            Some(&mut back[t * layer_size..(t + 1) * layer_size]),
        );
        std::mem::swap(&mut prev, &mut next);
    }

    let (mut best, mut best_s, mut best_j) = (f64::INFINITY, 0, 0);
    for (s, layer) in prev.iter().enumerate() {
        for (j, &v) in layer.iter().enumerate() {
            if v < best {
                (best, best_s, best_j) = (v, s, j);
            }
        }
    }

    let mut experts = vec![0; rounds];
    let (mut s, mut j) = (best_s, best_j);
    for t in (0..rounds).rev() {
        experts[t] = j;
        if t == 0 {
            break;
        }
        let from = back[t * layer_size + s * n + j];
        if from != STAY {
            j = from as usize;
            s -= 1;
        }
    }
    debug_assert_eq!(s, 0);
    Ok((best, ComparatorPath::new(experts)))
}

/// Optimal comparator loss of every prefix: entry `t - 1` is the minimum over
/// rounds `1..=t` with at most `switches` switches. Same cost as one
/// [`dynamic_comparator`] pass, without path storage.
pub fn dynamic_comparator_prefix(losses: &LossMatrix, switches: i64) -> Result<Vec<f64>> {
    let budget = validate(losses, switches)?;
    let mut prev = first_layer(losses, budget);
    let mut next = prev.clone();
    let min_of = |layer: &[Vec<f64>]| {
        layer
            .iter()
            .flat_map(|l| l.iter())
            .fold(f64::INFINITY, |a, &b| a.min(b))
    };
    let mut out = Vec::with_capacity(losses.rounds());
    out.push(min_of(&prev));
    for t in 1..losses.rounds() {
        advance(&prev, &mut next, losses.row(t), None);
        std::mem::swap(&mut prev, &mut next);
        out.push(min_of(&prev));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: &[&[f64]]) -> LossMatrix {
        LossMatrix::from_vecs(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    /// Exhaustive enumeration over all `N^T` sequences.
    fn brute_force(losses: &LossMatrix, switches: usize) -> f64 {
        let (t, n) = (losses.rounds(), losses.experts());
        let mut best = f64::INFINITY;
        let mut seq = vec![0usize; t];
        loop {
            let path = ComparatorPath::new(seq.clone());
            if path.switch_count() <= switches {
                best = best.min(path.loss(losses));
            }
            let mut i = 0;
            loop {
                if i == t {
                    return best;
                }
                seq[i] += 1;
                if seq[i] < n {
                    break;
                }
                seq[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn alternating_instance() {
        let m = matrix(&[&[0.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let (loss, path) = dynamic_comparator(&m, 2).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(path.experts(), &[0, 1, 0]);
        let (loss, path) = dynamic_comparator(&m, 0).unwrap();
        assert_eq!(loss, 1.0);
        assert_eq!(path.switch_count(), 0);
    }

    #[test]
    fn static_matches_column_sums() {
        let m = matrix(&[&[0.0, 1.0], &[0.0, 1.0]]);
        assert_eq!(static_comparator(&m).unwrap(), (0.0, 0));
        let m = matrix(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert_eq!(static_comparator(&m).unwrap(), (1.0, 0));
    }

    #[test]
    fn errors() {
        let m = matrix(&[&[0.0, 1.0]]);
        assert!(dynamic_comparator(&m, -1).is_err());
        assert!(dynamic_comparator_prefix(&m, -1).is_err());
        // A single round has no room to switch.
        assert_eq!(dynamic_comparator(&m, 5).unwrap().0, 0.0);
    }

    #[test]
    fn prefix_values_match_full_runs() {
        let m = matrix(&[
            &[0.2, 0.9, 0.4],
            &[0.7, 0.1, 0.3],
            &[0.6, 0.0, 1.0],
            &[0.1, 0.8, 0.2],
            &[0.9, 0.5, 0.0],
        ]);
        let prefix = dynamic_comparator_prefix(&m, 1).unwrap();
        for t in 1..=5 {
            let full = dynamic_comparator(&m.prefix(t).unwrap(), 1).unwrap().0;
            assert_eq!(prefix[t - 1], full);
        }
    }

    fn small_matrix() -> impl Strategy<Value = (LossMatrix, usize)> {
        (1usize..=6, 1usize..=3, 0usize..=3).prop_flat_map(|(t, n, s)| {
            proptest::collection::vec(
                proptest::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64], n),
                t,
            )
            .prop_map(move |rows| (LossMatrix::from_vecs(rows).unwrap(), s))
        })
    }

    proptest! {
        #[test]
        fn matches_enumeration((m, s) in small_matrix()) {
            let (loss, path) = dynamic_comparator(&m, s as i64).unwrap();
            prop_assert_eq!(loss, brute_force(&m, s));
            prop_assert!(path.within_budget(s));
            prop_assert_eq!(path.loss(&m), loss);
        }

        #[test]
        fn monotone_in_budget((m, _s) in small_matrix()) {
            let mut last = f64::INFINITY;
            for s in 0..m.rounds() as i64 + 1 {
                let v = dynamic_comparator(&m, s).unwrap().0;
                prop_assert!(v <= last);
                last = v;
            }
            prop_assert_eq!(dynamic_comparator(&m, 0).unwrap().0, static_comparator(&m).unwrap().0);
            let per_round: f64 = m.rows().map(|r| r.iter().cloned().fold(f64::INFINITY, f64::min)).sum();
            let full = dynamic_comparator(&m, m.rounds() as i64 - 1).unwrap().0;
            prop_assert!((full - per_round).abs() < 1e-12);
        }
    }
}
