//! Oblivious loss sequences.
//!
//! Every loss is a pure function of `(seed, t, arm)`: random adversaries seek
//! a counter-mode generator to a position derived from `t`, so nothing an
//! agent does can influence the sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversaryError {
    #[error("adversary needs at least one arm")]
    NoArms,
    #[error("loss {value} at row {row}, arm {arm} is outside [0, 1]")]
    LossOutOfRange { row: usize, arm: usize, value: f64 },
    #[error("matrix row {row} has {actual} entries, expected {expected}")]
    RaggedMatrix { row: usize, expected: usize, actual: usize },
    #[error("switching schedule must start at step 0 and be strictly increasing")]
    BadSchedule,
    #[error("arm {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LossKind {
    /// Independent Bernoulli losses with the given means.
    Bernoulli { means: Vec<f64> },
    /// Fixed `rows × K` table; step `t` uses row `t mod rows`.
    Matrix { rows: Vec<Vec<f64>> },
    /// Piecewise-constant best arm: from each `(start, arm)` onward the given
    /// arm has loss 0 and every other arm loss 1.
    Switching { arms: usize, schedule: Vec<(u64, usize)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossOracle {
    kind: LossKind,
    seed: u64,
}

impl LossOracle {
    pub fn bernoulli(means: Vec<f64>, seed: u64) -> Result<Self, AdversaryError> {
        if means.is_empty() {
            return Err(AdversaryError::NoArms);
        }
        if let Some((arm, &value)) = means
            .iter()
            .enumerate()
            .find(|(_, m)| !(0.0..=1.0).contains(*m))
        {
            return Err(AdversaryError::LossOutOfRange { row: 0, arm, value });
        }
        Ok(LossOracle {
            kind: LossKind::Bernoulli { means },
            seed,
        })
    }

    pub fn matrix(rows: Vec<Vec<f64>>) -> Result<Self, AdversaryError> {
        let arms = rows.first().map(Vec::len).unwrap_or(0);
        if arms == 0 {
            return Err(AdversaryError::NoArms);
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != arms {
                return Err(AdversaryError::RaggedMatrix {
                    row: r,
                    expected: arms,
                    actual: row.len(),
                });
            }
            if let Some((arm, &value)) = row
                .iter()
                .enumerate()
                .find(|(_, l)| !(0.0..=1.0).contains(*l))
            {
                return Err(AdversaryError::LossOutOfRange { row: r, arm, value });
            }
        }
        Ok(LossOracle {
            kind: LossKind::Matrix { rows },
            seed: 0,
        })
    }

    /// Every arm has loss 0 at every step.
    pub fn zeros(arms: usize) -> Self {
        LossOracle {
            kind: LossKind::Matrix {
                rows: vec![vec![0.0; arms]],
            },
            seed: 0,
        }
    }

    pub fn switching(arms: usize, schedule: Vec<(u64, usize)>) -> Result<Self, AdversaryError> {
        if arms == 0 {
            return Err(AdversaryError::NoArms);
        }
        if schedule.first().map(|s| s.0) != Some(0)
            || schedule.windows(2).any(|w| w[0].0 >= w[1].0)
        {
            return Err(AdversaryError::BadSchedule);
        }
        if let Some(&(_, arm)) = schedule.iter().find(|(_, a)| *a >= arms) {
            return Err(AdversaryError::ArmOutOfRange { arm, arms });
        }
        Ok(LossOracle {
            kind: LossKind::Switching { arms, schedule },
            seed: 0,
        })
    }

    pub fn kind(&self) -> &LossKind {
        &self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same sequence family under a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        LossOracle {
            kind: self.kind.clone(),
            seed,
        }
    }

    pub fn arms(&self) -> usize {
        match &self.kind {
            LossKind::Bernoulli { means } => means.len(),
            LossKind::Matrix { rows } => rows[0].len(),
            LossKind::Switching { arms, .. } => *arms,
        }
    }

    /// Writes `ℓ_t(i)` for every arm into `out`.
    pub fn losses_into(&self, t: u64, out: &mut [f64]) {
        match &self.kind {
            LossKind::Bernoulli { means } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                // two 32-bit words per f64 draw
                rng.set_word_pos(t as u128 * means.len() as u128 * 2);
                for (slot, &mean) in out.iter_mut().zip(means) {
                    let u: f64 = rng.gen();
                    *slot = if u < mean { 1.0 } else { 0.0 };
                }
            }
            LossKind::Matrix { rows } => {
                out.copy_from_slice(&rows[(t % rows.len() as u64) as usize]);
            }
            LossKind::Switching { schedule, .. } => {
                let idx = schedule.partition_point(|&(start, _)| start <= t) - 1;
                let best = schedule[idx].1;
                for (arm, slot) in out.iter_mut().enumerate() {
                    *slot = if arm == best { 0.0 } else { 1.0 };
                }
            }
        }
    }

    pub fn losses_at(&self, t: u64) -> Vec<f64> {
        let mut out = vec![0.0; self.arms()];
        self.losses_into(t, &mut out);
        out
    }

    pub fn loss(&self, t: u64, arm: usize) -> f64 {
        self.losses_at(t)[arm]
    }
}
