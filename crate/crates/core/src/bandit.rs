//! Exponential weights with cooperative importance-weighted loss estimates.
//!
//! Center agents run [`Exp3State`]: an exponential-weights learner whose loss
//! estimate for arm `i` divides the observed loss by the probability that
//! *some* member of the closed neighborhood played `i`. Non-center agents hold
//! a [`DelayedCopy`] that replays whatever their origin neighbor played one
//! round earlier.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arm index in `[0, K)`.
pub type Arm = usize;

/// Slack allowed on `sum(p) == 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BanditError {
    #[error("at least 2 arms are required, got {0}")]
    ArmsTooFew(usize),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("mass must be positive and finite, got {0}")]
    InvalidMass(f64),
    #[error("observation probability must lie in (0, 1], got {0}")]
    ZeroObservationProbability(f64),
    #[error("loss estimate for arm {arm} is not a finite non-negative number: {value}")]
    NonFiniteEstimate { arm: Arm, value: f64 },
    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

/// Checks the global `K >= 2` requirement.
pub fn check_arms(arms: usize) -> Result<(), BanditError> {
    if arms < 2 {
        Err(BanditError::ArmsTooFew(arms))
    } else {
        Ok(())
    }
}

/// `η = ½·sqrt(ln K · M / (K·T))`.
pub fn learning_rate(mass: f64, arms: usize, horizon: u64) -> Result<f64, BanditError> {
    check_arms(arms)?;
    if horizon == 0 {
        return Err(BanditError::ZeroHorizon);
    }
    if !(mass.is_finite() && mass > 0.0) {
        return Err(BanditError::InvalidMass(mass));
    }
    let k = arms as f64;
    Ok(0.5 * (k.ln() * mass / (k * horizon as f64)).sqrt())
}

/// `T >= K² ln K`, the regime in which the regret guarantees apply.
pub fn horizon_in_regime(arms: usize, horizon: u64) -> bool {
    let k = arms as f64;
    horizon as f64 >= k * k * k.ln()
}

/// Probability vector over the `K` arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ActionDistribution(Vec<f64>);

impl ActionDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, BanditError> {
        if probs.is_empty() {
            return Err(BanditError::InvalidDistribution("no arms".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && (0.0..=1.0).contains(*p)))
        {
            return Err(BanditError::InvalidDistribution(format!(
                "p[{i}] = {p} outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(BanditError::InvalidDistribution(format!("sums to {sum}")));
        }
        Ok(ActionDistribution(probs))
    }

    pub fn uniform(arms: usize) -> Self {
        ActionDistribution(vec![1.0 / arms as f64; arms])
    }

    pub fn point_mass(arms: usize, arm: Arm) -> Self {
        let mut probs = vec![0.0; arms];
        probs[arm] = 1.0;
        ActionDistribution(probs)
    }

    pub fn arms(&self) -> usize {
        self.0.len()
    }

    pub fn prob(&self, arm: Arm) -> f64 {
        self.0[arm]
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    /// `Σ_i p(i)·loss(i)`.
    pub fn expected_loss(&self, losses: &[f64]) -> f64 {
        self.0.iter().zip(losses).map(|(p, l)| p * l).sum()
    }

    /// Inverse-CDF sampling in ascending arm order. A draw landing exactly on
    /// a CDF boundary goes to the lower arm; zero-probability arms are never
    /// returned.
    pub fn sample(&self, draw: f64) -> Arm {
        let mut cdf = 0.0;
        let mut last_positive = 0;
        for (arm, &p) in self.0.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            cdf += p;
            last_positive = arm;
            if draw <= cdf {
                return arm;
            }
        }
        last_positive
    }
}

impl TryFrom<Vec<f64>> for ActionDistribution {
    type Error = BanditError;

    fn try_from(probs: Vec<f64>) -> Result<Self, Self::Error> {
        ActionDistribution::new(probs)
    }
}

impl From<ActionDistribution> for Vec<f64> {
    fn from(d: ActionDistribution) -> Self {
        d.0
    }
}

/// Free-function form of [`ActionDistribution::sample`].
pub fn sample_action(dist: &ActionDistribution, draw: f64) -> Arm {
    dist.sample(draw)
}

/// `1 - Π (1 - p_v'(arm))` over the given distributions, i.e. the chance that
/// at least one of the agents plays `arm`.
pub fn observation_probability<'a>(
    neighborhood: impl IntoIterator<Item = &'a ActionDistribution>,
    arm: Arm,
) -> f64 {
    let miss: f64 = neighborhood
        .into_iter()
        .map(|d| 1.0 - d.prob(arm))
        .product();
    1.0 - miss
}

/// One arm's observation at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationEvent {
    pub arm: Arm,
    pub observed: bool,
    pub observe_prob: f64,
    /// Only meaningful when `observed`.
    pub loss: f64,
}

/// `ℓ̂ = ℓ·B / E[B]`.
pub fn estimated_loss(ev: &ObservationEvent) -> Result<f64, BanditError> {
    if !(ev.observe_prob > 0.0 && ev.observe_prob <= 1.0) {
        return Err(BanditError::ZeroObservationProbability(ev.observe_prob));
    }
    Ok(if ev.observed {
        ev.loss / ev.observe_prob
    } else {
        0.0
    })
}

/// Exponential-weights learner. Weights live in log space and are shifted so
/// the largest log-weight is 0 after every update.
#[derive(Debug, Clone, PartialEq)]
pub struct Exp3State {
    log_weights: Vec<f64>,
    learning_rate: f64,
}

impl Exp3State {
    /// Uniform initial weights.
    pub fn new(arms: usize, learning_rate: f64) -> Result<Self, BanditError> {
        check_arms(arms)?;
        Self::from_log_weights(vec![0.0; arms], learning_rate)
    }

    pub fn from_log_weights(log_weights: Vec<f64>, learning_rate: f64) -> Result<Self, BanditError> {
        check_arms(log_weights.len())?;
        if !(learning_rate.is_finite() && learning_rate > 0.0) {
            return Err(BanditError::InvalidMass(learning_rate));
        }
        if let Some((arm, &value)) = log_weights.iter().enumerate().find(|(_, w)| !w.is_finite()) {
            return Err(BanditError::NonFiniteEstimate { arm, value });
        }
        let mut state = Exp3State {
            log_weights,
            learning_rate,
        };
        state.renormalize();
        Ok(state)
    }

    pub fn arms(&self) -> usize {
        self.log_weights.len()
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn distribution(&self) -> ActionDistribution {
        let weights: Vec<f64> = self.log_weights.iter().map(|w| w.exp()).collect();
        let total: f64 = weights.iter().sum();
        ActionDistribution(weights.into_iter().map(|w| w / total).collect())
    }

    /// `w(i) ← w(i)·exp(-η·ℓ̂(i))` for every arm.
    pub fn update(&self, estimates: &[f64]) -> Result<Exp3State, BanditError> {
        if estimates.len() != self.arms() {
            return Err(BanditError::LengthMismatch {
                expected: self.arms(),
                actual: estimates.len(),
            });
        }
        if let Some((arm, &value)) = estimates
            .iter()
            .enumerate()
            .find(|(_, e)| !(e.is_finite() && **e >= 0.0))
        {
            return Err(BanditError::NonFiniteEstimate { arm, value });
        }
        let mut next = Exp3State {
            log_weights: self
                .log_weights
                .iter()
                .zip(estimates)
                .map(|(w, e)| w - self.learning_rate * e)
                .collect(),
            learning_rate: self.learning_rate,
        };
        next.renormalize();
        Ok(next)
    }

    fn renormalize(&mut self) {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        for w in &mut self.log_weights {
            *w -= max;
        }
    }
}

/// Free-function form of [`Exp3State::update`].
pub fn exp3_update(state: &Exp3State, estimates: &[f64]) -> Result<Exp3State, BanditError> {
    state.update(estimates)
}

/// A violated bound from [`check_sandwich`].
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichViolation {
    pub arm: Arm,
    pub before: f64,
    pub after: f64,
    pub estimate: f64,
}

/// Checks `(1 - η·ℓ̂(i))·p(i) <= p₊(i) <= 2·p(i)` for every arm, with
/// `rel_tol` relative slack on both sides.
pub fn check_sandwich(
    before: &ActionDistribution,
    after: &ActionDistribution,
    estimates: &[f64],
    learning_rate: f64,
    rel_tol: f64,
) -> Vec<SandwichViolation> {
    (0..before.arms())
        .filter_map(|arm| {
            let p = before.prob(arm);
            let q = after.prob(arm);
            let lower = (1.0 - learning_rate * estimates[arm]) * p;
            let upper = 2.0 * p;
            let ok = lower <= q + rel_tol * q.abs().max(lower.abs())
                && q <= upper + rel_tol * upper.abs();
            (!ok).then_some(SandwichViolation {
                arm,
                before: p,
                after: q,
                estimate: estimates[arm],
            })
        })
        .collect()
}

/// Relay state of a non-center agent: plays what its origin neighbor played
/// in the previous round, uniform until the first relayed distribution lands.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayedCopy {
    arms: usize,
    staged: Option<ActionDistribution>,
}

impl DelayedCopy {
    pub fn new(arms: usize) -> Self {
        DelayedCopy { arms, staged: None }
    }

    /// Distribution to play this round.
    pub fn current(&self) -> ActionDistribution {
        self.staged
            .clone()
            .unwrap_or_else(|| ActionDistribution::uniform(self.arms))
    }

    /// `true` until the first relayed distribution has been received.
    pub fn is_warming_up(&self) -> bool {
        self.staged.is_none()
    }

    /// Stores the origin's distribution for play next round.
    pub fn stage(&mut self, incoming: ActionDistribution) {
        self.staged = Some(incoming);
    }

    /// Returns this round's distribution and stages `incoming` for the next.
    pub fn advance(&mut self, incoming: ActionDistribution) -> ActionDistribution {
        let now = self.current();
        self.stage(incoming);
        now
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(p: &[f64]) -> ActionDistribution {
        ActionDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn learning_rate_values() {
        for k in [2usize, 5, 10] {
            for t in [1u64, 100, 12345] {
                let expected = 0.5 * ((k as f64).ln() / t as f64).sqrt();
                let got = learning_rate(k as f64, k, t).unwrap();
                assert!((got - expected).abs() < 1e-15);
            }
        }
        // values from a 30-digit evaluation
        assert!((learning_rate(1.0, 2, 1).unwrap() - 0.294352505628868672).abs() < 1e-15);
        assert!((learning_rate(10.0, 10, 100_000).unwrap() - 0.002399262956094040).abs() < 1e-15);
        assert_eq!(learning_rate(1.0, 1, 10), Err(BanditError::ArmsTooFew(1)));
    }

    #[test]
    fn learning_rate_small_in_regime() {
        for k in 2..40usize {
            let t = ((k * k) as f64 * (k as f64).ln()).ceil() as u64;
            assert!(horizon_in_regime(k, t));
            for m in 1..=k {
                assert!(learning_rate(m as f64, k, t).unwrap() <= 1.0 / (2.0 * k as f64));
            }
        }
    }

    #[test]
    fn observation_probabilities() {
        let half = dist(&[0.5, 0.5]);
        assert_eq!(observation_probability([&half], 0), 0.5);
        assert_eq!(observation_probability([&half, &half], 0), 0.75);
        let sure = dist(&[1.0, 0.0]);
        assert_eq!(observation_probability([&half, &sure, &half], 0), 1.0);
    }

    #[test]
    fn estimated_losses() {
        let ev = |loss, prob, observed| ObservationEvent {
            arm: 0,
            observed,
            observe_prob: prob,
            loss,
        };
        assert_eq!(estimated_loss(&ev(1.0, 0.5, true)), Ok(2.0));
        assert_eq!(estimated_loss(&ev(0.7, 0.5, false)), Ok(0.0));
        assert!((estimated_loss(&ev(0.3, 0.75, true)).unwrap() - 0.4).abs() < 1e-15);
        assert!(matches!(
            estimated_loss(&ev(0.3, 0.0, true)),
            Err(BanditError::ZeroObservationProbability(_))
        ));
    }

    #[test]
    fn exp3_updates() {
        let s = Exp3State::new(3, 0.1).unwrap();
        assert_eq!(s.update(&[0.0; 3]).unwrap().distribution(), s.distribution());

        let s = Exp3State::new(2, 0.1).unwrap();
        let next = s.update(&[1.0, 0.0]).unwrap().distribution();
        assert!(next.prob(0) < 0.5 && next.prob(1) > 0.5);
        assert!((next.prob(0) - 0.475020812521060014).abs() < 1e-15);

        assert!(matches!(
            s.update(&[f64::NAN, 0.0]),
            Err(BanditError::NonFiniteEstimate { arm: 0, .. })
        ));
        assert!(matches!(s.update(&[1.0]), Err(BanditError::LengthMismatch { .. })));
    }

    #[test]
    fn log_space_survives_long_runs() {
        let mut s = Exp3State::new(2, 0.5).unwrap();
        for _ in 0..100_000 {
            s = s.update(&[10.0, 0.0]).unwrap();
        }
        let d = s.distribution();
        assert!(d.prob(1) == 1.0 && d.prob(0) >= 0.0);
        assert!(s.log_weights().iter().all(|w| w.is_finite()));
    }

    #[test]
    fn sampling() {
        let point = ActionDistribution::point_mass(5, 3);
        for draw in [0.0, 0.3, 0.999_999] {
            assert_eq!(sample_action(&point, draw), 3);
        }
        let u = ActionDistribution::uniform(4);
        assert_eq!(sample_action(&u, 0.70), 2);
        assert_eq!(sample_action(&u, 0.0), 0);
        assert_eq!(sample_action(&u, 0.25), 0);
        assert_eq!(sample_action(&u, 0.2500001), 1);
    }

    #[test]
    fn delayed_copy() {
        let mut relay = DelayedCopy::new(3);
        assert!(relay.is_warming_up());
        let q = dist(&[0.2, 0.3, 0.5]);
        let first = relay.advance(q.clone());
        assert_eq!(first, ActionDistribution::uniform(3));
        assert_eq!(relay.current(), q);
        assert!(!relay.is_warming_up());
    }

    #[test]
    fn chain_of_relays_delays_by_depth() {
        // center -> r1 -> r2 -> r3; r_d plays the center's round-t distribution at t+d
        let depth = 3;
        let mut relays = vec![DelayedCopy::new(2); depth];
        let center: Vec<ActionDistribution> = (0..10)
            .map(|t| dist(&[t as f64 / 10.0, 1.0 - t as f64 / 10.0]))
            .collect();
        let mut played = vec![Vec::new(); depth];
        for p in &center {
            let now: Vec<_> = relays.iter().map(|r| r.current()).collect();
            for (d, relay) in relays.iter_mut().enumerate() {
                let upstream = if d == 0 { p.clone() } else { now[d - 1].clone() };
                relay.stage(upstream);
                played[d].push(now[d].clone());
            }
        }
        for d in 0..depth {
            for t in (d + 1)..center.len() {
                assert_eq!(played[d][t], center[t - d - 1]);
            }
        }
    }

    #[test]
    fn distribution_validation() {
        assert!(ActionDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ActionDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(ActionDistribution::new(vec![]).is_err());
        let parsed: Result<ActionDistribution, _> = serde_json::from_str("[0.25,0.75]");
        assert_eq!(parsed.unwrap(), dist(&[0.25, 0.75]));
    }

    fn arb_dist(k: usize) -> impl Strategy<Value = ActionDistribution> {
        prop::collection::vec(0.01f64..1.0, k).prop_map(|w| {
            let s: f64 = w.iter().sum();
            let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
            let head: f64 = p[1..].iter().sum();
            p[0] = 1.0 - head;
            ActionDistribution::new(p).unwrap()
        })
    }

    proptest! {
        #[test]
        fn updates_keep_valid_distribution_and_sandwich(
            k in 2usize..8,
            steps in 1usize..40,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let eta = 1.0 / (2.0 * k as f64);
            let mut state = Exp3State::new(k, eta).unwrap();
            for _ in 0..steps {
                let before = state.distribution();
                // own distribution plus a few independent neighbors
                let others: Vec<ActionDistribution> = (0..rng.gen_range(0..4))
                    .map(|_| ActionDistribution::uniform(k))
                    .collect();
                let mut estimates = vec![0.0; k];
                for (arm, est) in estimates.iter_mut().enumerate() {
                    let q = observation_probability(
                        std::iter::once(&before).chain(others.iter()), arm);
                    let observed = rng.gen_bool(q.min(1.0));
                    *est = estimated_loss(&ObservationEvent {
                        arm, observed, observe_prob: q, loss: rng.gen::<f64>(),
                    }).unwrap();
                    prop_assert!(before.prob(arm) * *est <= 1.0 + 1e-12);
                }
                let next = state.update(&estimates).unwrap();
                let after = next.distribution();
                let sum: f64 = after.probs().iter().sum();
                prop_assert!((sum - 1.0).abs() <= SUM_TOLERANCE);
                prop_assert!(check_sandwich(&before, &after, &estimates, eta, 1e-9).is_empty());
                // W_{t+1} <= W_t, both measured before the shift
                let w_now: f64 = state.log_weights().iter().map(|w| w.exp()).sum();
                let w_next: f64 = state.log_weights().iter().zip(&estimates)
                    .map(|(w, e)| (w - eta * e).exp()).sum();
                prop_assert!(w_next <= w_now * (1.0 + 1e-12));
                state = next;
            }
        }

        #[test]
        fn sampling_respects_cdf(d in arb_dist(5), draw in 0.0f64..1.0) {
            let arm = d.sample(draw);
            prop_assert!(d.prob(arm) > 0.0);
            let below: f64 = d.probs()[..arm].iter().sum();
            prop_assert!(draw >= below - 1e-12);
        }
    }
}
