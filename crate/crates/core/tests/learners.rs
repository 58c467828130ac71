use privtrack::adversaries::{Adversary, Marginals, WindowPunisher};
use privtrack::harness::{run_trial, AdversaryConfig, LearnerId, RunConfig};
use privtrack::learners::{FollowTheLeader, Learner};

#[test]
fn lazy_rnm_settles_on_the_best_bernoulli_expert() {
    let horizon = 1 << 14;
    let mut c = RunConfig::new(
        horizon,
        3,
        0,
        LearnerId::LazyRnm,
        AdversaryConfig::Stochastic {
            segments: vec![Marginals::Bernoulli(vec![0.2, 0.5, 0.5])],
            change_points: vec![],
        },
    );
    c.epsilon = 1.0;
    for seed in 0..20 {
        let plays = run_trial(&c, seed).unwrap().trace.plays();
        let late = &plays[horizon / 2..];
        let freq = late.iter().filter(|&&j| j == 0).count() as f64 / late.len() as f64;
        assert!(freq >= 0.95, "seed {seed}: {freq}");
    }
}

#[test]
#[ignore = "slow, and does not hold at these constants: the restart threshold needs windows longer than a segment"]
fn svt_restart_counts_track_true_shifts() {
    let c = RunConfig::new(
        20_000,
        10,
        3,
        LearnerId::SvtRestart,
        AdversaryConfig::ShiftingBernoulli {
            gap: 0.4,
            low: None,
            segments: None,
        },
    );
    let mut within = 0;
    for seed in 0..50 {
        let restarts = run_trial(&c, seed).unwrap().trace.restarts();
        if (1..=3).contains(&restarts) {
            within += 1;
        }
    }
    assert!(within >= 40, "{within} of 50 seeds restarted 1..=3 times");
}

#[test]
#[ignore = "does not hold: follow-the-leader moves off the punished expert, losing on about half the rounds"]
fn window_punisher_defeats_follow_the_leader() {
    let (horizon, n, w) = (1000, 3, 5);
    let mut adv = WindowPunisher::new(horizon, n, w).unwrap();
    let mut ftl = FollowTheLeader::new(n).unwrap();
    let mut history = Vec::new();
    let mut total = 0.0;
    for t in 1..=horizon {
        let j = ftl.select().unwrap();
        let loss = adv.next_loss(t, &history).unwrap();
        total += loss[j];
        ftl.observe(&loss).unwrap();
        history.push(j);
    }
    assert!(total >= (horizon - w - n) as f64, "{total}");
}
