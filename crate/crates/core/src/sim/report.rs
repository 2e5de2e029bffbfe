//! Regret bounds and per-agent comparison against a finished run.

use serde::Serialize;

use crate::graph::{Graph, NodeId, BRUTE_FORCE_LIMIT};

use super::run::{RunResult, Setting};

/// `4·sqrt(ln K · K/M · T)`, the regret bound of a center of mass `M`.
pub fn center_bound(arms: usize, mass: f64, horizon: u64) -> f64 {
    let k = arms as f64;
    4.0 * (k.ln() * k / mass * horizon as f64).sqrt()
}

/// `7·sqrt(ln K · K/M(v) · T)`, the bound of any agent of mass `M(v)`.
pub fn individual_bound(arms: usize, mass: f64, horizon: u64) -> f64 {
    let k = arms as f64;
    7.0 * (k.ln() * k / mass * horizon as f64).sqrt()
}

/// `12·sqrt(ln K · (1 + K/|N(v)|) · T)`.
pub fn neighborhood_bound(arms: usize, closed_degree: usize, horizon: u64) -> f64 {
    let k = arms as f64;
    12.0 * (k.ln() * (1.0 + k / closed_degree as f64) * horizon as f64).sqrt()
}

/// `12·(K·ln(K²·n̄·T) + sqrt(ln K · (1 + K/|N(v)|) · T)) + 1`, the
/// neighborhood bound with the uninformed setup cost folded in.
pub fn uninformed_bound(arms: usize, closed_degree: usize, n_bar: usize, horizon: u64) -> f64 {
    let k = arms as f64;
    let setup = k * (k * k * n_bar as f64 * horizon as f64).ln();
    let learning = (k.ln() * (1.0 + k / closed_degree as f64) * horizon as f64).sqrt();
    12.0 * (setup + learning) + 1.0
}

/// The bound in the `bound_corollary` column for the given setting.
pub fn corollary_bound(setting: Setting, arms: usize, closed_degree: usize, horizon: u64) -> f64 {
    match setting {
        Setting::Informed => neighborhood_bound(arms, closed_degree, horizon),
        Setting::Uninformed { n_bar } => uninformed_bound(arms, closed_degree, n_bar, horizon),
    }
}

/// `sqrt((1 + (K/N)·α)·T)`, the shape of the average-regret bound.
pub fn average_regret_scale(arms: usize, node_count: usize, alpha: usize, horizon: u64) -> f64 {
    ((1.0 + arms as f64 / node_count as f64 * alpha as f64) * horizon as f64).sqrt()
}

fn ratio(value: f64, bound: f64) -> f64 {
    if value <= 0.0 {
        0.0
    } else {
        value / bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentReport {
    pub agent: NodeId,
    pub closed_degree: usize,
    pub mass_m: u32,
    pub mass_d: u32,
    pub delay: usize,
    pub is_center: bool,
    pub regret: f64,
    pub regret_semi: f64,
    pub policy_regret: f64,
    pub policy_regret_semi: f64,
    pub bound_individual: f64,
    pub bound_corollary: f64,
    /// Semi-expected regret over each bound; 0 when the regret is not positive.
    pub ratio_individual: f64,
    pub ratio_corollary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageReport {
    pub alpha: usize,
    /// `Σ_v 1/|N(v)|`, which never exceeds `alpha`.
    pub inverse_degree_sum: f64,
    pub inverse_degree_sum_within_alpha: bool,
    pub mean_regret_semi: f64,
    /// `sqrt((1 + (K/N)·α)·T)`.
    pub scale: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub arms: usize,
    pub horizon: u64,
    pub setup_steps: u64,
    pub bounds_applicable: bool,
    pub agents: Vec<AgentReport>,
    /// Present when the graph is small enough for an exact `α(G)`.
    pub average: Option<AverageReport>,
}

pub fn regret_report(g: &Graph, result: &RunResult) -> RegretReport {
    let p = &result.partition;
    let agents: Vec<AgentReport> = g
        .nodes()
        .map(|v| {
            let mass = p.mass[v];
            let bound_individual = individual_bound(result.arms, mass.value(), result.horizon);
            let bound_corollary =
                corollary_bound(result.setting, result.arms, g.closed_degree(v), result.horizon);
            let regret_semi = result.semi_regret(v);
            AgentReport {
                agent: v,
                closed_degree: g.closed_degree(v),
                mass_m: mass.center_mass,
                mass_d: mass.depth,
                delay: p.delay[v],
                is_center: p.is_center(v),
                regret: result.regret(v),
                regret_semi,
                policy_regret: result.policy_regret(v),
                policy_regret_semi: result.policy_semi_regret(v),
                bound_individual,
                bound_corollary,
                ratio_individual: ratio(regret_semi, bound_individual),
                ratio_corollary: ratio(regret_semi, bound_corollary),
            }
        })
        .collect();

    let average = (g.node_count() <= BRUTE_FORCE_LIMIT).then(|| {
        let alpha = g.independence_number().expect("size checked above");
        let inverse_degree_sum: f64 = g.nodes().map(|v| 1.0 / g.closed_degree(v) as f64).sum();
        let mean_regret_semi =
            agents.iter().map(|a| a.regret_semi).sum::<f64>() / agents.len() as f64;
        let scale = average_regret_scale(result.arms, g.node_count(), alpha, result.horizon);
        AverageReport {
            alpha,
            inverse_degree_sum,
            inverse_degree_sum_within_alpha: inverse_degree_sum <= alpha as f64 + 1e-12,
            mean_regret_semi,
            scale,
            ratio: ratio(mean_regret_semi, scale),
        }
    });

    RegretReport {
        arms: result.arms,
        horizon: result.horizon,
        setup_steps: result.setup_steps,
        bounds_applicable: result.bounds_applicable,
        agents,
        average,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::sim::{run_informed, LossOracle, RunOptions};

    #[test]
    fn bound_values() {
        // 4·sqrt(ln 10 · 10/10 · 1e5) and 7·sqrt(ln 10 · 10/6 · 1e5)
        assert!((center_bound(10, 10.0, 100_000) - 1919.4103648752).abs() < 1e-6);
        assert!((individual_bound(10, 6.0, 100_000) - 4336.4092203248).abs() < 1e-6);
        // 12·sqrt(ln 10 · (1 + 10/2) · 1e5)
        assert!((neighborhood_bound(10, 2, 100_000) - 14104.7280028608).abs() < 1e-6);
        assert!((average_regret_scale(10, 11, 10, 100_000) - 1004.5351706590).abs() < 1e-6);
    }

    #[test]
    fn zero_loss_report() {
        let g = gen::star(4);
        let r = run_informed(&g, 2, 100, &LossOracle::zeros(2), 0, RunOptions::default()).unwrap();
        let rep = regret_report(&g, &r);
        assert!(rep.agents.iter().all(|a| a.regret == 0.0 && a.ratio_corollary == 0.0));
        let avg = rep.average.unwrap();
        assert_eq!(avg.alpha, 4);
        assert!(avg.inverse_degree_sum_within_alpha);
        assert_eq!(avg.ratio, 0.0);
    }
}
