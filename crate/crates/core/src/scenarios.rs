//! The worked examples and counterexamples, run end to end: hypotheses
//! through the condition checkers, conclusions through the order verifiers.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::archimedean::Generator;
use crate::error::{Error, Result};
use crate::ew::EwParams;
use crate::extremes::{CoupledSystem, CountDistribution, Statistic};
use crate::lifetime::Lifetime;
use crate::orders::{check, find_crossing, Crossing, Order, OrderVerdict};
use crate::theorems::{self, assemble, Counts, EvalConfig, Hypothesis, Instance, TheoremCheck, TheoremId};
use crate::verdict::Status;

/// Both sides of a crossing must differ by more than this in probability.
pub const CROSSING_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expected {
    Holds,
    Crosses,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: &'static str,
    /// The theorem whose side conditions are checked.
    pub theorem: TheoremId,
    pub statistic: Statistic,
    pub order: Order,
    pub expected: Expected,
    pub x: CoupledSystem,
    pub y: CoupledSystem,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Counts>,
}

impl Scenario {
    pub fn instance(&self) -> Instance {
        Instance {
            x: self.x.clone(),
            y: self.y.clone(),
            counts: self.counts.clone(),
        }
    }
}

fn parallel_system(
    marginals: impl IntoIterator<Item = (f64, f64, f64)>,
    generator: Result<Generator>,
) -> Result<CoupledSystem> {
    let m = marginals
        .into_iter()
        .map(|(a, l, k)| EwParams::new(a, l, k))
        .collect::<Result<Vec<_>>>()?;
    CoupledSystem::new(m, generator?, Statistic::Max.coupling())
}

fn scale_pair(
    alpha: f64,
    lam: &[f64],
    mu: &[f64],
    k: f64,
    g: (Result<Generator>, Result<Generator>),
) -> Result<(CoupledSystem, CoupledSystem)> {
    Ok((
        parallel_system(lam.iter().map(|&l| (alpha, l, k)), g.0)?,
        parallel_system(mu.iter().map(|&m| (alpha, m, k)), g.1)?,
    ))
}

fn shape_pair(
    alpha: f64,
    lambda: f64,
    k: &[f64],
    l: &[f64],
    g: (Result<Generator>, Result<Generator>),
) -> Result<(CoupledSystem, CoupledSystem)> {
    Ok((
        parallel_system(k.iter().map(|&s| (alpha, lambda, s)), g.0)?,
        parallel_system(l.iter().map(|&s| (alpha, lambda, s)), g.1)?,
    ))
}

fn tilt_pair(
    lambda: f64,
    k: f64,
    a: &[f64],
    b: &[f64],
    g: (Result<Generator>, Result<Generator>),
) -> Result<(CoupledSystem, CoupledSystem)> {
    Ok((
        parallel_system(a.iter().map(|&t| (t, lambda, k)), g.0)?,
        parallel_system(b.iter().map(|&t| (t, lambda, k)), g.1)?,
    ))
}

fn gumbel(t1: f64, t2: f64) -> (Result<Generator>, Result<Generator>) {
    (Generator::gumbel_variant(t1), Generator::gumbel_variant(t2))
}

fn exp_reciprocal(t1: f64, t2: f64) -> (Result<Generator>, Result<Generator>) {
    (Generator::exp_reciprocal(t1), Generator::exp_reciprocal(t2))
}

fn scenario(
    name: &'static str,
    theorem: TheoremId,
    expected: Expected,
    pair: Result<(CoupledSystem, CoupledSystem)>,
) -> Scenario {
    let (x, y) = pair.expect("builtin parameters are valid");
    Scenario {
        name,
        theorem,
        statistic: Statistic::Max,
        order: Order::St,
        expected,
        x,
        y,
        counts: None,
    }
}

/// The seven parallel-system comparisons. Each claims `F_X ≤ F_Y`
/// everywhere (`Holds`) or that the two cdfs cross (`Crosses`).
pub fn builtin_scenarios() -> Vec<Scenario> {
    use Expected::*;
    use TheoremId::*;
    vec![
        scenario(
            "ex1",
            StMaxScale,
            Holds,
            scale_pair(0.6, &[0.46, 0.5], &[1.7, 0.43], 0.9, gumbel(8.9, 3.05)),
        ),
        scenario(
            "cex1",
            StMaxScale,
            Crosses,
            scale_pair(0.6, &[0.46, 0.5], &[1.7, 0.43], 8.06, gumbel(8.9, 3.05)),
        ),
        scenario(
            "cex1_1",
            StMinScale,
            Crosses,
            scale_pair(
                0.55,
                &[2.14, 1.4, 1.0],
                &[0.77, 0.8, 0.8],
                1.63,
                gumbel(3.0, 0.6),
            ),
        ),
        scenario(
            "ex2",
            StMaxShape,
            Holds,
            shape_pair(0.5, 4.83, &[3.0, 0.5, 1.0], &[2.0, 1.5, 1.0], exp_reciprocal(2.2, 2.45)),
        ),
        scenario(
            "cex2",
            StMaxShape,
            Crosses,
            shape_pair(0.5, 4.83, &[0.5, 1.0, 3.0], &[1.0, 1.5, 2.0], exp_reciprocal(2.48, 2.24)),
        ),
        scenario(
            "ex3",
            StMaxTilt,
            Holds,
            tilt_pair(5.37, 5.67, &[0.4, 0.9, 0.1], &[0.5, 0.8, 0.1], exp_reciprocal(2.4, 3.7)),
        ),
        scenario(
            "cex3",
            StMaxTilt,
            Crosses,
            tilt_pair(
                12.5,
                3.16,
                &[0.82, 0.85, 0.95],
                &[0.4, 0.84, 0.87],
                exp_reciprocal(22.6, 10.7),
            ),
        ),
    ]
}

/// Random sample size versions of ex1 and ex2.
pub fn random_n_scenarios() -> Vec<Scenario> {
    let counts = |n1: Vec<(usize, f64)>, n2: usize| Counts {
        n1: CountDistribution::new(n1).expect("valid pmf"),
        n2: CountDistribution::degenerate(n2).expect("valid pmf"),
    };
    let base = builtin_scenarios();
    let find = |name: &str| base.iter().find(|s| s.name == name).cloned().expect("builtin");
    let mut ex1 = find("ex1");
    ex1.name = "ex1_random_n";
    ex1.theorem = TheoremId::RandomMaxScale;
    ex1.counts = Some(counts(vec![(1, 0.5), (2, 0.5)], 2));
    let mut ex2 = find("ex2");
    ex2.name = "ex2_random_n";
    ex2.theorem = TheoremId::RandomMaxShape;
    ex2.counts = Some(counts(vec![(2, 0.5), (3, 0.5)], 3));
    vec![ex1, ex2]
}

pub fn scenario_names() -> Vec<&'static str> {
    builtin_scenarios()
        .iter()
        .chain(random_n_scenarios().iter())
        .map(|s| s.name)
        .collect()
}

pub fn scenario_by_name(name: &str) -> Option<Scenario> {
    builtin_scenarios()
        .into_iter()
        .chain(random_n_scenarios())
        .find(|s| s.name == name)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRun {
    pub name: String,
    pub check: TheoremCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossing: Option<Crossing>,
    pub matches_expected: bool,
}

/// Both claimed distributions: `(X side, Y side)`.
fn sides(s: &Scenario) -> Result<(Box<dyn Lifetime>, Box<dyn Lifetime>)> {
    Ok(match &s.counts {
        None => (
            Box::new(s.x.extreme(s.statistic)?),
            Box::new(s.y.extreme(s.statistic)?),
        ),
        Some(c) => (
            Box::new(s.x.mixture(s.statistic, &c.n1)?),
            Box::new(s.y.mixture(s.statistic, &c.n2)?),
        ),
    })
}

fn conclusion(s: &Scenario, cfg: &EvalConfig) -> Result<OrderVerdict> {
    if s.counts.is_some() {
        return theorems::conclusion(s.theorem, &s.instance(), &cfg.orders);
    }
    let (x, y) = sides(s)?;
    Ok(check(s.order, y.as_ref(), x.as_ref(), &cfg.orders))
}

/// Runs the hypothesis checks and the claimed comparison. A `Crosses`
/// scenario matches when `F_X − F_Y` changes sign with a gap above
/// [`CROSSING_GAP`] on both sides.
pub fn run_scenario(s: &Scenario, cfg: &EvalConfig) -> Result<ScenarioRun> {
    let hyps = theorems::hypotheses(s.theorem, &s.instance(), &cfg.conditions)?;
    let verdict = conclusion(s, cfg)?;
    let check = assemble(s.theorem.name(), hyps, verdict);
    let (x, y) = sides(s)?;
    let crossing = match s.expected {
        Expected::Crosses => find_crossing(x.as_ref(), y.as_ref(), &cfg.orders)?,
        Expected::Holds => None,
    };
    let matches_expected = match s.expected {
        Expected::Holds => check.conclusion.status == Status::Holds,
        Expected::Crosses => crossing.is_some_and(|c| {
            c.gap_before.abs() > CROSSING_GAP && c.gap_after.abs() > CROSSING_GAP
        }),
    };
    Ok(ScenarioRun {
        name: s.name.into(),
        check,
        crossing,
        matches_expected,
    })
}

/// As [`run_scenario`] for a scenario with sample size distributions, which
/// must satisfy `N1 ≤_st N2`.
pub fn run_random_n_scenario(s: &Scenario, cfg: &EvalConfig) -> Result<ScenarioRun> {
    let counts = s
        .counts
        .as_ref()
        .ok_or_else(|| Error::Contract(format!("scenario {} has no sample sizes", s.name)))?;
    if !counts.n1.st_below(&counts.n2) {
        return Err(Error::Contract(format!(
            "scenario {}: N1 ≤_st N2 does not hold",
            s.name
        )));
    }
    run_scenario(s, cfg)
}

/// `x,F_X,F_Y` rows over the pooled quantile range of the two sides.
pub fn curves_csv(s: &Scenario, cfg: &EvalConfig) -> Result<String> {
    let (x, y) = sides(s)?;
    let xs = cfg.orders.x_points(x.as_ref(), y.as_ref())?;
    let mut out = String::from("x,F_X,F_Y\n");
    for t in xs {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", t, x.cdf(t), y.cdf(t)).expect("string write");
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictSummary {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossing: Option<Crossing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBlock {
    pub name: String,
    pub theorem: TheoremId,
    pub statistic: Statistic,
    pub order: Order,
    pub expected: Expected,
    pub verdict: VerdictSummary,
    pub hypotheses: Vec<Hypothesis>,
    pub consistent: bool,
    pub matches_expected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curves_csv: Option<String>,
}

impl ReportBlock {
    pub fn new(s: &Scenario, run: ScenarioRun, curves_csv: Option<String>) -> Self {
        let c = &run.check.conclusion;
        let witness_x = run
            .crossing
            .map(|c| c.x)
            .or_else(|| c.witness.map(|w| w.crossing.unwrap_or(w.at)));
        ReportBlock {
            name: run.name,
            theorem: s.theorem,
            statistic: s.statistic,
            order: s.order,
            expected: s.expected,
            verdict: VerdictSummary {
                status: c.status,
                witness_x,
                gap: c.witness.map(|w| w.gap),
                crossing: run.crossing,
                reason: c.reason.clone(),
            },
            hypotheses: run.check.hypotheses,
            consistent: run.check.consistent,
            matches_expected: run.matches_expected,
            curves_csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenarios: Vec<ReportBlock>,
    pub all_consistent: bool,
    pub all_match_expected: bool,
}

/// Runs `scenarios` in parallel; blocks keep the input order. With
/// `curves` set, each block names a CSV file `<dir>/<scenario>.csv`, which
/// is written as well.
pub fn run_all(
    scenarios: &[Scenario],
    cfg: &EvalConfig,
    curves: Option<&std::path::Path>,
) -> Result<Report> {
    let blocks: Vec<ReportBlock> = scenarios
        .par_iter()
        .map(|s| {
            let run = if s.counts.is_some() {
                run_random_n_scenario(s, cfg)?
            } else {
                run_scenario(s, cfg)?
            };
            let csv = match curves {
                None => None,
                Some(dir) => {
                    let path = dir.join(format!("{}.csv", s.name));
                    std::fs::write(&path, curves_csv(s, cfg)?).map_err(|e| {
                        Error::Contract(format!("cannot write {}: {e}", path.display()))
                    })?;
                    Some(path.display().to_string())
                }
            };
            Ok(ReportBlock::new(s, run, csv))
        })
        .collect::<Result<_>>()?;
    Ok(Report {
        all_consistent: blocks.iter().all(|b| b.consistent),
        all_match_expected: blocks.iter().all(|b| b.matches_expected),
        scenarios: blocks,
    })
}
