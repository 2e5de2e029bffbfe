//! Per-(seed, agent) results table and the sweep summary.

use std::io::{self, Write};

use coopbandit::sim::report::{regret_report, AverageReport};
use coopbandit::sim::{RunResult, Setting};
use coopbandit::Graph;
use serde::Serialize;

pub const CSV_HEADER: &str = "seed,agent,degree,mass_m,mass_d,delay,regret,regret_semi,\
bound_individual,bound_corollary,setup_steps";

/// One CSV row. `degree` is the closed neighborhood size `|N(v)|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub seed: u64,
    pub agent: usize,
    pub degree: usize,
    pub mass_m: u32,
    pub mass_d: u32,
    pub delay: usize,
    pub regret: f64,
    pub regret_semi: f64,
    pub bound_individual: f64,
    pub bound_corollary: f64,
    pub setup_steps: u64,
}

impl ResultRow {
    /// Floats use Rust's shortest round-trip form, so a reader recovers the
    /// exact values.
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.agent,
            self.degree,
            self.mass_m,
            self.mass_d,
            self.delay,
            self.regret,
            self.regret_semi,
            self.bound_individual,
            self.bound_corollary,
            self.setup_steps
        )
    }
}

/// Rows for one finished run, labelled with `seed`.
pub fn rows_for_run(g: &Graph, seed: u64, result: &RunResult) -> Vec<ResultRow> {
    regret_report(g, result)
        .agents
        .into_iter()
        .map(|a| ResultRow {
            seed,
            agent: a.agent,
            degree: a.closed_degree,
            mass_m: a.mass_m,
            mass_d: a.mass_d,
            delay: a.delay,
            regret: a.regret,
            regret_semi: a.regret_semi,
            bound_individual: a.bound_individual,
            bound_corollary: a.bound_corollary,
            setup_steps: result.setup_steps,
        })
        .collect()
}

/// Writes the header and `rows` sorted by `(seed, agent)`.
pub fn write_csv<W: Write>(out: &mut W, rows: &[ResultRow]) -> io::Result<()> {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by_key(|r| (r.seed, r.agent));
    writeln!(out, "{CSV_HEADER}")?;
    for row in sorted {
        writeln!(out, "{}", row.to_csv())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub adversary_seed: u64,
    /// Hex form of the 64-bit transcript digest.
    pub digest: String,
    pub setup_steps: u64,
    pub best_arm: usize,
    pub center_updates_checked: u64,
    pub sandwich_violations: u64,
    pub estimate_violations: u64,
    pub luby_calls: usize,
    pub luby_nonmaximal: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentSummary {
    pub agent: usize,
    pub degree: usize,
    pub mean_regret: f64,
    pub mean_regret_semi: f64,
    pub mean_policy_regret_semi: f64,
    pub mean_bound_individual: f64,
    pub mean_bound_corollary: f64,
    pub within_individual: bool,
    pub within_corollary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub arms: usize,
    pub horizon: u64,
    pub setting: &'static str,
    pub n_bar: Option<usize>,
    pub adversary: String,
    pub seeds: usize,
    pub bounds_applicable: bool,
    /// Every agent's mean semi-expected regret is within both mean bounds.
    pub all_within_bounds: bool,
    pub invariants_clean: bool,
    pub runs: Vec<RunSummary>,
    pub agents: Vec<AgentSummary>,
    /// Average-regret comparison for the first seed, when `N` is small
    /// enough for an exact independence number.
    pub average: Option<AverageReport>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    sum / count as f64
}

/// Summarizes runs given in sweep order together with their rows.
pub fn summarize(
    g: &Graph,
    adversary: String,
    runs: &[(u64, RunResult)],
    rows: &[ResultRow],
) -> SweepSummary {
    let first = &runs[0].1;
    let (setting, n_bar) = match first.setting {
        Setting::Informed => ("informed", None),
        Setting::Uninformed { n_bar } => ("uninformed", Some(n_bar)),
    };
    let agents: Vec<AgentSummary> = g
        .nodes()
        .map(|v| {
            let mine = || rows.iter().filter(move |r| r.agent == v);
            let mean_regret_semi = mean(mine().map(|r| r.regret_semi));
            let mean_bound_individual = mean(mine().map(|r| r.bound_individual));
            let mean_bound_corollary = mean(mine().map(|r| r.bound_corollary));
            AgentSummary {
                agent: v,
                degree: g.closed_degree(v),
                mean_regret: mean(mine().map(|r| r.regret)),
                mean_regret_semi,
                mean_policy_regret_semi: mean(runs.iter().map(|(_, r)| r.policy_semi_regret(v))),
                mean_bound_individual,
                mean_bound_corollary,
                within_individual: mean_regret_semi <= mean_bound_individual,
                within_corollary: mean_regret_semi <= mean_bound_corollary,
            }
        })
        .collect();
    let run_summaries: Vec<RunSummary> = runs
        .iter()
        .map(|(seed, r)| RunSummary {
            seed: *seed,
            adversary_seed: r.adversary_seed,
            digest: format!("{:016x}", r.digest),
            setup_steps: r.setup_steps,
            best_arm: r.best_arm,
            center_updates_checked: r.invariants.updates_checked,
            sandwich_violations: r.invariants.sandwich_violations,
            estimate_violations: r.invariants.estimate_violations,
            luby_calls: r.luby_calls,
            luby_nonmaximal: r.luby_nonmaximal,
        })
        .collect();
    SweepSummary {
        arms: first.arms,
        horizon: first.horizon,
        setting,
        n_bar,
        adversary,
        seeds: runs.len(),
        bounds_applicable: first.bounds_applicable,
        all_within_bounds: agents
            .iter()
            .all(|a| a.within_individual && a.within_corollary),
        invariants_clean: runs.iter().all(|(_, r)| r.invariants.clean()),
        runs: run_summaries,
        agents,
        average: regret_report(g, first).average,
    }
}
