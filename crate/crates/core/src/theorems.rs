//! Ordering theorems for extremes: side conditions, conclusions, and seeded
//! random instances drawn inside each theorem's parameter region.
//!
//! Vector relations are written `c ⪯ d` and checked with both sort
//! conventions. One convention is adopted per theorem and only that one gates
//! consistency; the other is reported for comparison.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::archimedean::{
    check_log_concave_psi, check_phi_condition, check_psi_ratio, check_star_condition_max,
    check_star_condition_min, check_superadditive, CheckGrid, Family,
    Generator,
};
use crate::error::{Error, Result};
use crate::ew::EwParams;
use crate::extremes::{CoupledSystem, CountDistribution, Statistic};
use crate::majorization::{relation_verdict, Convention, RealVector, Relation};
use crate::orders::{check, GridSpec, Order, OrderVerdict};
use crate::verdict::{ConditionVerdict, Status, Worst};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    StMinScale,
    StMaxScale,
    StMaxShape,
    StMinShape,
    StMaxTilt,
    StMinTilt,
    HrMinScale,
    HrMinTilt,
    RhMaxTilt,
    DispMin,
    StarMax,
    StarMin,
    LorenzMax,
    LorenzMin,
    RandomMinScale,
    RandomMaxScale,
    RandomMaxShape,
    RandomMinShape,
    RandomMaxTilt,
    RandomMinTilt,
}

/// Which of the two systems the conclusion says is smaller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Smaller {
    X,
    Y,
}

/// Which parameter vector a relation compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Param {
    LogScale,
    Scale,
    Shape,
    Tilt,
}

impl Param {
    fn label(self) -> &'static str {
        match self {
            Param::LogScale => "log_scale",
            Param::Scale => "scale",
            Param::Shape => "shape",
            Param::Tilt => "tilt",
        }
    }
}

/// `c ⪯ d` between the parameter vectors of the two systems.
#[derive(Debug, Clone, Copy)]
struct VectorHypothesis {
    param: Param,
    rel: Relation,
    adopted: Convention,
    /// `c` is taken from X (and `d` from Y) rather than the other way round.
    c_from_x: bool,
}

impl TheoremId {
    pub const ALL: [TheoremId; 20] = [
        TheoremId::StMinScale,
        TheoremId::StMaxScale,
        TheoremId::StMaxShape,
        TheoremId::StMinShape,
        TheoremId::StMaxTilt,
        TheoremId::StMinTilt,
        TheoremId::HrMinScale,
        TheoremId::HrMinTilt,
        TheoremId::RhMaxTilt,
        TheoremId::DispMin,
        TheoremId::StarMax,
        TheoremId::StarMin,
        TheoremId::LorenzMax,
        TheoremId::LorenzMin,
        TheoremId::RandomMinScale,
        TheoremId::RandomMaxScale,
        TheoremId::RandomMaxShape,
        TheoremId::RandomMinShape,
        TheoremId::RandomMaxTilt,
        TheoremId::RandomMinTilt,
    ];

    pub fn name(self) -> &'static str {
        use TheoremId::*;
        match self {
            StMinScale => "st_min_scale",
            StMaxScale => "st_max_scale",
            StMaxShape => "st_max_shape",
            StMinShape => "st_min_shape",
            StMaxTilt => "st_max_tilt",
            StMinTilt => "st_min_tilt",
            HrMinScale => "hr_min_scale",
            HrMinTilt => "hr_min_tilt",
            RhMaxTilt => "rh_max_tilt",
            DispMin => "disp_min",
            StarMax => "star_max",
            StarMin => "star_min",
            LorenzMax => "lorenz_max",
            LorenzMin => "lorenz_min",
            RandomMinScale => "random_min_scale",
            RandomMaxScale => "random_max_scale",
            RandomMaxShape => "random_max_shape",
            RandomMinShape => "random_min_shape",
            RandomMaxTilt => "random_max_tilt",
            RandomMinTilt => "random_min_tilt",
        }
    }

    pub fn parse(name: &str) -> Option<TheoremId> {
        TheoremId::ALL.into_iter().find(|t| t.name() == name)
    }

    /// The statement being verified, in the orientation actually checked.
    pub fn statement(self) -> &'static str {
        use TheoremId::*;
        match self {
            StMinScale => "log λ ⪰_w log μ ⇒ Y_1:n ⪰_st X_1:n",
            StMaxScale => "λ ⪰^w μ, k ≤ 1 ⇒ X_n:n ⪰_st Y_n:n",
            StMaxShape => "l ⪰^m k ⇒ X_n:n ⪰_st Y_n:n",
            StMinShape => "l ⪰^m k, common λ ⇒ Y_1:n ⪰_st X_1:n",
            StMaxTilt => "α ⪰_w β ⇒ X_n:n ⪰_st Y_n:n",
            StMinTilt => "α ⪰^w β ⇒ X_1:n ⪯_st Y_1:n",
            HrMinScale => "λ ⪰^m μ, k ≥ 1, independence ⇒ Y_1:n ⪰_hr X_1:n",
            HrMinTilt => "α ⪰^w β, independence ⇒ Y_1:n ⪰_hr X_1:n",
            RhMaxTilt => "α ⪰^w β, independence ⇒ Y_n:n ⪰_rh X_n:n",
            DispMin => "common λ ≤ GM(λ_i), ψ/ψ′ decreasing concave ⇒ Y_1:n ⪰_disp X_1:n",
            StarMax => "two groups, (λ1−λ2)(μ1−μ2) ≥ 0, λ ratio ≥ μ ratio ⇒ Y_n:n ≤_* X_n:n",
            StarMin => "two groups, (λ1−λ2)(μ1−μ2) ≥ 0, λ ratio ≥ μ ratio ⇒ Y_1:n ≤_* X_1:n",
            LorenzMax => "star conditions for maxima ⇒ Y_n:n ≤_Lorenz X_n:n",
            LorenzMin => "star conditions for minima ⇒ Y_1:n ≤_Lorenz X_1:n",
            RandomMinScale => "N1 ≤_st N2, log λ ⪰_w log μ ⇒ Y_1:N2 ⪰_st X_1:N1",
            RandomMaxScale => "N1 ≤_st N2, λ ⪰^w μ, k ≤ 1 ⇒ X_N1:N1 ⪰_st Y_N2:N2",
            RandomMaxShape => "N1 ≤_st N2, l ⪰^m k ⇒ X_N1:N1 ⪰_st Y_N2:N2",
            RandomMinShape => "N1 ≤_st N2, l ⪰^m k ⇒ Y_1:N2 ⪰_st X_1:N1",
            RandomMaxTilt => "N1 ≤_st N2, α ⪰_w β ⇒ X_N1:N1 ⪰_st Y_N2:N2",
            RandomMinTilt => "N1 ≤_st N2, α ⪰^w β ⇒ X_1:N1 ⪰_st Y_1:N2",
        }
    }

    pub fn statistic(self) -> Statistic {
        use TheoremId::*;
        match self {
            StMaxScale | StMaxShape | StMaxTilt | RhMaxTilt | StarMax | LorenzMax
            | RandomMaxScale | RandomMaxShape | RandomMaxTilt => Statistic::Max,
            _ => Statistic::Min,
        }
    }

    pub fn order(self) -> Order {
        use TheoremId::*;
        match self {
            HrMinScale | HrMinTilt => Order::Hr,
            RhMaxTilt => Order::Rh,
            DispMin => Order::Disp,
            StarMax | StarMin => Order::Star,
            LorenzMax | LorenzMin => Order::Lorenz,
            _ => Order::St,
        }
    }

    pub fn is_random(self) -> bool {
        use TheoremId::*;
        matches!(
            self,
            RandomMinScale
                | RandomMaxScale
                | RandomMaxShape
                | RandomMinShape
                | RandomMaxTilt
                | RandomMinTilt
        )
    }

    /// The fixed sample size counterpart of a random sample size theorem.
    pub fn fixed(self) -> TheoremId {
        use TheoremId::*;
        match self {
            RandomMinScale => StMinScale,
            RandomMaxScale => StMaxScale,
            RandomMaxShape => StMaxShape,
            RandomMinShape => StMinShape,
            RandomMaxTilt => StMaxTilt,
            RandomMinTilt => StMinTilt,
            other => other,
        }
    }

    fn smaller(self) -> Smaller {
        use TheoremId::*;
        match self {
            StMaxScale | StMaxShape | StMaxTilt | StarMax | StarMin | LorenzMax | LorenzMin
            | RandomMaxScale | RandomMaxShape | RandomMaxTilt | RandomMinTilt => Smaller::Y,
            _ => Smaller::X,
        }
    }

    fn vector_hypothesis(self) -> Option<VectorHypothesis> {
        use TheoremId::*;
        let (param, rel, adopted) = match self.fixed() {
            StMinScale => (Param::LogScale, Relation::WeakSub, Convention::Ascending),
            StMaxScale => (Param::Scale, Relation::WeakSuper, Convention::Ascending),
            StMaxShape | StMinShape => {
                (Param::Shape, Relation::Majorization, Convention::Descending)
            }
            StMaxTilt => (Param::Tilt, Relation::WeakSub, Convention::Ascending),
            StMinTilt | HrMinTilt | RhMaxTilt => {
                (Param::Tilt, Relation::WeakSuper, Convention::Ascending)
            }
            HrMinScale => (Param::Scale, Relation::Majorization, Convention::Ascending),
            _ => return None,
        };
        Some(VectorHypothesis {
            param,
            rel,
            adopted,
            c_from_x: param == Param::Shape,
        })
    }

    /// Parameters shared by every component of both systems, and parameters
    /// shared only within each system.
    fn layout(self) -> (&'static [Param], &'static [Param]) {
        use TheoremId::*;
        match self.fixed() {
            StMinScale | StMaxScale | HrMinScale | DispMin | StarMax | StarMin | LorenzMax
            | LorenzMin => (&[Param::Tilt, Param::Shape], &[]),
            StMaxShape | StMinShape => (&[Param::Tilt, Param::Scale], &[]),
            StMaxTilt | StMinTilt | HrMinTilt | RhMaxTilt => (&[Param::Scale, Param::Shape], &[]),
            _ => (&[], &[]),
        }
    }
}

impl std::fmt::Display for TheoremId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counts {
    pub n1: CountDistribution,
    pub n2: CountDistribution,
}

/// Two systems (and, for random sample sizes, their counts).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub x: CoupledSystem,
    pub y: CoupledSystem,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Counts>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub id: String,
    #[serde(flatten)]
    pub verdict: ConditionVerdict,
    /// Whether this check is part of the theorem's premise. Non-gating
    /// entries are reported for comparison only.
    pub gating: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremCheck {
    pub theorem_id: String,
    pub hypotheses: Vec<Hypothesis>,
    pub conclusion: OrderVerdict,
    pub hypotheses_hold: bool,
    /// All gating hypotheses hold ⇒ the conclusion holds.
    pub consistent: bool,
}

/// Grids used when evaluating a theorem.
#[derive(Debug, Clone, Copy, Default)]
pub struct EvalConfig {
    pub conditions: CheckGrid,
    pub orders: GridSpec,
}

impl EvalConfig {
    /// Coarser grids for randomized runs.
    pub fn fuzzing() -> Self {
        EvalConfig {
            conditions: CheckGrid::with_points(128),
            orders: GridSpec::with_points(512).expect("valid grid"),
        }
    }
}

fn from_bool(holds: bool, margin: f64, reason: &str) -> ConditionVerdict {
    ConditionVerdict {
        status: if holds { Status::Holds } else { Status::FailsAt },
        witness: Vec::new(),
        margin,
        reason: if holds { None } else { Some(reason.into()) },
    }
}

fn graded(margin: f64, at: &[f64]) -> ConditionVerdict {
    let mut w = Worst::new();
    w.push(margin, at);
    w.finish(0.0)
}

fn values(s: &CoupledSystem, p: Param) -> Vec<f64> {
    s.marginals()
        .iter()
        .map(|m| match p {
            Param::LogScale => m.lambda().ln(),
            Param::Scale => m.lambda(),
            Param::Shape => m.k(),
            Param::Tilt => m.alpha(),
        })
        .collect()
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Every component of both systems shares the listed parameters.
fn layout(id: TheoremId, inst: &Instance) -> ConditionVerdict {
    let mut bad = Vec::new();
    let (across, within) = id.layout();
    let uneven = |v: &[f64]| spread(v) > 1e-12 * (1.0 + v[0].abs());
    for &p in across {
        let mut all = values(&inst.x, p);
        all.extend(values(&inst.y, p));
        if uneven(&all) {
            bad.push(format!("{} differs across components", p.label()));
        }
    }
    for &p in within {
        if uneven(&values(&inst.x, p)) || uneven(&values(&inst.y, p)) {
            bad.push(format!("{} differs within a system", p.label()));
        }
    }
    if inst.x.n() != inst.y.n() {
        bad.push("systems have different sizes".into());
    }
    if bad.is_empty() {
        from_bool(true, 0.0, "")
    } else {
        from_bool(false, f64::NAN, &bad.join("; "))
    }
}

fn common_value(s: &CoupledSystem, p: Param) -> f64 {
    values(s, p)[0]
}

/// `lo < v ≤ hi` for every component value, margin is the distance to the
/// violated end.
fn range_check(vals: &[f64], lo: f64, hi: f64) -> ConditionVerdict {
    let mut w = Worst::new();
    for &v in vals {
        w.push((hi - v).min(v - lo), &[v]);
    }
    let mut out = w.finish(0.0);
    if vals.iter().any(|&v| v <= lo) {
        out.status = Status::FailsAt;
    }
    out
}

fn vector_checks(
    vh: VectorHypothesis,
    inst: &Instance,
    prefixes: &[usize],
) -> Result<Vec<Hypothesis>> {
    let mut out = Vec::new();
    for conv in [Convention::Ascending, Convention::Descending] {
        let mut worst: Option<ConditionVerdict> = None;
        let mut all_hold = true;
        for &m in prefixes {
            let (mut d, mut c) = (&inst.x, &inst.y);
            if vh.c_from_x {
                std::mem::swap(&mut d, &mut c);
            }
            let d = RealVector::new(values(d, vh.param)[..m].to_vec())?;
            let c = RealVector::new(values(c, vh.param)[..m].to_vec())?;
            let mut v = relation_verdict(vh.rel, conv, &d, &c)?;
            all_hold &= v.holds();
            if prefixes.len() > 1 {
                v.witness.insert(0, m as f64);
            }
            if worst.as_ref().is_none_or(|w| v.margin < w.margin) {
                worst = Some(v);
            }
        }
        let mut v = worst.expect("at least one prefix");
        v.status = if all_hold { Status::Holds } else { Status::FailsAt };
        let rel = match vh.rel {
            Relation::Majorization => "majorization",
            Relation::WeakSub => "weak_sub",
            Relation::WeakSuper => "weak_super",
        };
        let conv_name = match conv {
            Convention::Ascending => "ascending",
            Convention::Descending => "descending",
        };
        out.push(Hypothesis {
            id: format!("{}_{}_{}", vh.param.label(), rel, conv_name),
            verdict: v,
            gating: conv == vh.adopted,
        });
    }
    Ok(out)
}

fn same_generator(inst: &Instance) -> ConditionVerdict {
    let same = inst.x.generator() == inst.y.generator();
    from_bool(same, 0.0, "systems use different generators")
}

fn independent(inst: &Instance) -> ConditionVerdict {
    let ok = inst.x.generator().family() == Family::Independence
        && inst.y.generator().family() == Family::Independence;
    from_bool(ok, 0.0, "a generator is not the independence generator")
}

/// Two scale groups: the first `p` components share one scale, the rest
/// another, with the same split in both systems.
fn two_groups(inst: &Instance) -> Option<(usize, [f64; 2], [f64; 2])> {
    let lx = values(&inst.x, Param::Scale);
    let ly = values(&inst.y, Param::Scale);
    let n = lx.len();
    if n < 2 || ly.len() != n {
        return None;
    }
    let mut p = 1;
    while p < n && lx[p] == lx[0] && ly[p] == ly[0] {
        p += 1;
    }
    if p == n {
        p = n - 1;
    }
    let rest_x = lx[p..].iter().all(|&v| v == lx[p]);
    let rest_y = ly[p..].iter().all(|&v| v == ly[p]);
    let head = lx[..p].iter().all(|&v| v == lx[0]) && ly[..p].iter().all(|&v| v == ly[0]);
    (rest_x && rest_y && head).then_some((p, [lx[0], lx[p]], [ly[0], ly[p]]))
}

fn star_hypotheses(inst: &Instance, which: Statistic, grid: &CheckGrid) -> Vec<Hypothesis> {
    let g = inst.x.generator();
    let alpha = common_value(&inst.x, Param::Tilt);
    let mut out = vec![Hypothesis {
        id: "common_generator".into(),
        verdict: same_generator(inst),
        gating: true,
    }];
    let cond = match which {
        Statistic::Max => check_star_condition_max(&g, alpha, grid),
        Statistic::Min => check_star_condition_min(&g, alpha, grid),
    };
    out.push(Hypothesis {
        id: match which {
            Statistic::Max => "star_function_increasing".into(),
            Statistic::Min => "star_function_decreasing".into(),
        },
        verdict: cond,
        gating: true,
    });
    out.push(Hypothesis {
        id: "shape_at_most_one".into(),
        verdict: range_check(&values(&inst.x, Param::Shape), 0.0, 1.0),
        gating: true,
    });
    match two_groups(inst) {
        None => out.push(Hypothesis {
            id: "two_scale_groups".into(),
            verdict: from_bool(false, f64::NAN, "scales do not form two matching groups"),
            gating: true,
        }),
        Some((_, l, m)) => {
            out.push(Hypothesis {
                id: "scales_similarly_ordered".into(),
                verdict: graded((l[0] - l[1]) * (m[0] - m[1]), &[]),
                gating: true,
            });
            let rl = l[0].max(l[1]) / l[0].min(l[1]);
            let rm = m[0].max(m[1]) / m[0].min(m[1]);
            let mut v = graded(rl - rm, &[rl, rm]);
            // equal ratios are admissible; absorb rounding in the quotients
            if v.status == Status::FailsAt && rl - rm >= -1e-12 * rm {
                v.status = Status::Holds;
            }
            out.push(Hypothesis {
                id: "scale_ratio_dominates".into(),
                verdict: v,
                gating: true,
            });
        }
    }
    out
}

/// Side conditions of `id` evaluated on `inst`.
pub fn hypotheses(id: TheoremId, inst: &Instance, grid: &CheckGrid) -> Result<Vec<Hypothesis>> {
    use TheoremId::*;
    let mut out = vec![Hypothesis {
        id: "parameter_layout".into(),
        verdict: layout(id, inst),
        gating: true,
    }];
    let push = |out: &mut Vec<Hypothesis>, id: &str, v: ConditionVerdict| {
        out.push(Hypothesis {
            id: id.into(),
            verdict: v,
            gating: true,
        })
    };
    let (g1, g2) = (inst.x.generator(), inst.y.generator());
    let fixed = id.fixed();

    if id.is_random() {
        let counts = inst.counts.as_ref().ok_or_else(|| {
            Error::Contract(format!("{id} needs sample size distributions"))
        })?;
        let ordered = counts.n1.st_below(&counts.n2);
        push(
            &mut out,
            "counts_st_ordered",
            from_bool(ordered, 0.0, "N1 ≤_st N2 fails"),
        );
    }

    if matches!(
        fixed,
        StMinScale | StMaxScale | StMaxShape | StMinShape | StMaxTilt | StMinTilt
    ) {
        push(&mut out, "superadditive", check_superadditive(&g1, &g2, grid));
    }
    match fixed {
        StMinScale => push(&mut out, "log_concave_psi", check_log_concave_psi(&g1, grid)),
        StMaxShape => {
            let alpha = common_value(&inst.x, Param::Tilt);
            push(&mut out, "phi_condition", check_phi_condition(&g1, 1.0, alpha, grid));
        }
        StMinShape => push(&mut out, "phi_condition", check_phi_condition(&g1, 1.0, 1.0, grid)),
        StMaxTilt => push(&mut out, "phi_condition", check_phi_condition(&g1, 2.0, 1.0, grid)),
        HrMinScale | HrMinTilt | RhMaxTilt => push(&mut out, "independence", independent(inst)),
        _ => {}
    }
    if matches!(
        fixed,
        StMinScale | StMaxScale | StMaxShape | StMinShape | HrMinScale | DispMin
    ) {
        let mut tilts = values(&inst.x, Param::Tilt);
        tilts.extend(values(&inst.y, Param::Tilt));
        push(&mut out, "tilt_at_most_one", range_check(&tilts, 0.0, 1.0));
    }
    if matches!(fixed, StMaxScale | DispMin) {
        let mut shapes = values(&inst.x, Param::Shape);
        shapes.extend(values(&inst.y, Param::Shape));
        push(&mut out, "shape_at_most_one", range_check(&shapes, 0.0, 1.0));
    }
    if fixed == HrMinScale {
        let k = values(&inst.x, Param::Shape);
        let mut w = Worst::new();
        for v in k {
            w.push(v - 1.0, &[v]);
        }
        push(&mut out, "shape_at_least_one", w.finish(0.0));
    }
    if fixed == DispMin {
        push(&mut out, "common_generator", same_generator(inst));
        let gm = values(&inst.x, Param::LogScale).iter().sum::<f64>() / inst.x.n() as f64;
        let gm = gm.exp();
        let common = common_value(&inst.y, Param::Scale);
        let spread_y = spread(&values(&inst.y, Param::Scale));
        let mut v = graded(gm - common, &[common, gm]);
        if v.status == Status::FailsAt && gm - common >= -1e-12 * gm {
            v.status = Status::Holds;
        }
        if spread_y > 0.0 {
            v = from_bool(false, f64::NAN, "Y components do not share one scale");
        }
        push(&mut out, "scale_below_geometric_mean", v);
        push(&mut out, "psi_ratio_decreasing_concave", check_psi_ratio(&g1, grid));
    }
    match fixed {
        StarMax | LorenzMax => out.extend(star_hypotheses(inst, Statistic::Max, grid)),
        StarMin | LorenzMin => out.extend(star_hypotheses(inst, Statistic::Min, grid)),
        _ => {}
    }

    if let Some(vh) = id.vector_hypothesis() {
        let prefixes: Vec<usize> = match &inst.counts {
            Some(c) if id.is_random() => {
                let mut m: Vec<usize> = c
                    .n1
                    .pmf()
                    .iter()
                    .chain(c.n2.pmf())
                    .filter(|(_, p)| *p > 0.0)
                    .map(|(m, _)| *m)
                    .collect();
                m.sort_unstable();
                m.dedup();
                m
            }
            _ => vec![inst.x.n().min(inst.y.n())],
        };
        if prefixes.iter().any(|&m| m > inst.x.n() || m > inst.y.n()) {
            return Err(Error::Contract("count support exceeds the system size".into()));
        }
        out.extend(vector_checks(vh, inst, &prefixes)?);
    }
    Ok(out)
}

/// The conclusion of `id`: the order check with the claimed smaller system
/// first.
pub fn conclusion(id: TheoremId, inst: &Instance, grid: &GridSpec) -> Result<OrderVerdict> {
    let which = id.statistic();
    let order = id.order();
    let (a, b) = match id.smaller() {
        Smaller::X => (&inst.x, &inst.y),
        Smaller::Y => (&inst.y, &inst.x),
    };
    if id.is_random() {
        let counts = inst
            .counts
            .as_ref()
            .ok_or_else(|| Error::Contract(format!("{id} needs sample size distributions")))?;
        let (na, nb) = match id.smaller() {
            Smaller::X => (&counts.n1, &counts.n2),
            Smaller::Y => (&counts.n2, &counts.n1),
        };
        let ma = a.mixture(which, na)?;
        let mb = b.mixture(which, nb)?;
        Ok(check(order, &ma, &mb, grid))
    } else {
        let ea = a.extreme(which)?;
        let eb = b.extreme(which)?;
        Ok(check(order, &ea, &eb, grid))
    }
}

/// Hypotheses and conclusion together.
pub fn evaluate(id: TheoremId, inst: &Instance, cfg: &EvalConfig) -> Result<TheoremCheck> {
    let hyps = hypotheses(id, inst, &cfg.conditions)?;
    let conclusion = conclusion(id, inst, &cfg.orders)?;
    Ok(assemble(id.name(), hyps, conclusion))
}

/// Combines hypothesis verdicts with a conclusion; only gating hypotheses
/// enter the premise.
pub fn assemble(name: &str, hyps: Vec<Hypothesis>, conclusion: OrderVerdict) -> TheoremCheck {
    let hypotheses_hold = hyps.iter().filter(|h| h.gating).all(|h| h.verdict.holds());
    TheoremCheck {
        theorem_id: name.into(),
        consistent: !hypotheses_hold || conclusion.holds(),
        hypotheses: hyps,
        conclusion,
        hypotheses_hold,
    }
}

// ---------------------------------------------------------------------------
// random instances

fn random_generator(rng: &mut ChaCha8Rng) -> Generator {
    match rng.gen_range(0..3) {
        0 => Generator::independence(),
        1 => Generator::gumbel_variant(rng.gen_range(1.0..6.0)).expect("positive"),
        _ => Generator::exp_reciprocal(rng.gen_range(0.3..6.0)).expect("positive"),
    }
}

/// `c` obtained from `d` by partial averaging within each block (so every
/// prefix ending on a block boundary satisfies `c ⪯^m d`), then moved so that
/// `rel` holds in the usual ascending sense, then shuffled within blocks.
fn related_vector(
    rng: &mut ChaCha8Rng,
    d: &[f64],
    rel: Relation,
    additive: bool,
    bounds: &[usize],
) -> Vec<f64> {
    let s: f64 = rng.gen_range(0.0..1.0);
    let shift: f64 = rng.gen_range(0.0..0.3);
    let mut c = Vec::with_capacity(d.len());
    let mut start = 0;
    for &end in bounds.iter().chain(std::iter::once(&d.len())) {
        if end <= start {
            continue;
        }
        let block = &d[start..end];
        let mean = block.iter().sum::<f64>() / block.len() as f64;
        let mut b: Vec<f64> = block.iter().map(|v| (1.0 - s) * v + s * mean).collect();
        for v in b.iter_mut() {
            match (rel, additive) {
                (Relation::Majorization, _) => {}
                (Relation::WeakSuper, true) => *v += shift,
                (Relation::WeakSuper, false) => *v *= 1.0 + shift,
                (Relation::WeakSub, true) => *v -= shift,
                (Relation::WeakSub, false) => *v *= 1.0 - shift,
            }
        }
        b.shuffle(rng);
        c.extend(b);
        start = end;
    }
    c
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn system(
    marginals: Vec<EwParams>,
    generator: Generator,
    which: Statistic,
) -> Result<CoupledSystem> {
    CoupledSystem::new(marginals, generator, which.coupling())
}

fn ew(alpha: f64, lambda: f64, k: f64) -> Result<EwParams> {
    EwParams::new(alpha, lambda, k)
}

fn random_counts(rng: &mut ChaCha8Rng, n: usize) -> Result<Counts> {
    loop {
        let mut draw = || -> Result<CountDistribution> {
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0f64..1.0).powi(2)).collect();
            let total: f64 = w.iter().sum();
            let mut pmf: Vec<(usize, f64)> = w
                .iter()
                .enumerate()
                .filter(|(_, &p)| p / total > 1e-3)
                .map(|(i, &p)| (i + 1, p))
                .collect();
            let kept: f64 = pmf.iter().map(|p| p.1).sum();
            for p in pmf.iter_mut() {
                p.1 /= kept;
            }
            let last = pmf.len() - 1;
            let head: f64 = pmf[..last].iter().map(|p| p.1).sum();
            pmf[last].1 = 1.0 - head;
            CountDistribution::new(pmf)
        };
        let (a, b) = (draw()?, draw()?);
        if a.st_below(&b) {
            return Ok(Counts { n1: a, n2: b });
        }
        if b.st_below(&a) {
            return Ok(Counts { n1: b, n2: a });
        }
    }
}

/// Draws one candidate instance for `id`. Candidates are built to make the
/// theorem's side conditions likely but are not guaranteed to satisfy them.
pub fn sample_instance(id: TheoremId, rng: &mut ChaCha8Rng) -> Result<Instance> {
    use TheoremId::*;
    let fixed = id.fixed();
    let which = id.statistic();
    let n: usize = rng.gen_range(2..=4);
    let counts = if id.is_random() {
        Some(random_counts(rng, n)?)
    } else {
        None
    };
    let bounds: Vec<usize> = match &counts {
        Some(c) => {
            let mut b: Vec<usize> = c.n1.pmf().iter().chain(c.n2.pmf()).map(|p| p.0).collect();
            b.sort_unstable();
            b.dedup();
            b
        }
        None => vec![n],
    };
    let (mut gx, mut gy) = (random_generator(rng), random_generator(rng));
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    match fixed {
        StMinScale | StMaxScale | HrMinScale => {
            let alpha = rng.gen_range(0.05..1.0);
            let k = match fixed {
                StMaxScale => rng.gen_range(0.1..1.0),
                HrMinScale => rng.gen_range(1.0..4.0),
                _ => rng.gen_range(0.2..4.0),
            };
            let vh = fixed.vector_hypothesis().expect("scale theorem");
            let lam = uniform_vec(rng, n, 0.2, 3.0);
            let mu = if fixed == StMinScale {
                let logs: Vec<f64> = lam.iter().map(|v| v.ln()).collect();
                related_vector(rng, &logs, vh.rel, true, &bounds)
                    .into_iter()
                    .map(f64::exp)
                    .collect()
            } else {
                related_vector(rng, &lam, vh.rel, false, &bounds)
            };
            for i in 0..n {
                xs.push(ew(alpha, lam[i], k)?);
                ys.push(ew(alpha, mu[i], k)?);
            }
            if fixed == HrMinScale {
                gx = Generator::independence();
                gy = Generator::independence();
            }
        }
        StMaxShape | StMinShape => {
            let alpha = rng.gen_range(0.05..1.0);
            let lambda = rng.gen_range(0.2..5.0);
            let k = uniform_vec(rng, n, 0.2, 4.0);
            let l = related_vector(rng, &k, Relation::Majorization, false, &bounds);
            for i in 0..n {
                xs.push(ew(alpha, lambda, k[i])?);
                ys.push(ew(alpha, lambda, l[i])?);
            }
        }
        StMaxTilt | StMinTilt | HrMinTilt | RhMaxTilt => {
            let lambda = rng.gen_range(0.2..3.0);
            let k = rng.gen_range(0.2..4.0);
            let vh = fixed.vector_hypothesis().expect("tilt theorem");
            let a = uniform_vec(rng, n, 0.05, 2.0);
            let b: Vec<f64> = related_vector(rng, &a, vh.rel, false, &bounds)
                .into_iter()
                .map(|v| v.max(0.01))
                .collect();
            for i in 0..n {
                xs.push(ew(a[i], lambda, k)?);
                ys.push(ew(b[i], lambda, k)?);
            }
            if matches!(fixed, HrMinTilt | RhMaxTilt) {
                gx = Generator::independence();
                gy = Generator::independence();
            }
        }
        DispMin => {
            let alpha = rng.gen_range(0.05..1.0);
            let k = rng.gen_range(0.1..1.0);
            let lam = uniform_vec(rng, n, 0.2, 4.0);
            let gm = (lam.iter().map(|v| v.ln()).sum::<f64>() / n as f64).exp();
            let common = gm * rng.gen_range(0.3..1.0);
            for &l in &lam {
                xs.push(ew(alpha, l, k)?);
                ys.push(ew(alpha, common, k)?);
            }
            gy = gx;
        }
        StarMax | StarMin | LorenzMax | LorenzMin => {
            let alpha = rng.gen_range(0.05..1.0);
            let k = rng.gen_range(0.1..1.0);
            let p = rng.gen_range(1..n);
            let l1 = rng.gen_range(0.2..4.0);
            let rl: f64 = rng.gen_range(1.0..4.0);
            let m1 = rng.gen_range(0.2..4.0);
            let rm = rng.gen_range(1.0..=rl);
            let (mut l, mut m) = ([l1, l1 * rl], [m1, m1 * rm]);
            if rng.gen_bool(0.5) {
                l.reverse();
                m.reverse();
            }
            for i in 0..n {
                let g = usize::from(i >= p);
                xs.push(ew(alpha, l[g], k)?);
                ys.push(ew(alpha, m[g], k)?);
            }
            gy = gx;
        }
        _ => unreachable!("random theorems map to fixed ones"),
    }
    Ok(Instance {
        x: system(xs, gx, which)?,
        y: system(ys, gy, which)?,
        counts,
    })
}

/// One accepted instance whose conclusion failed.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub instance: Instance,
    pub check: TheoremCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzReport {
    pub theorem: TheoremId,
    pub seed: u64,
    pub accepted: usize,
    pub attempts: usize,
    /// Accepted instances whose conclusion check was inconclusive.
    pub inconclusive: usize,
    pub violations: Vec<Violation>,
}

/// Draws candidates until `count` of them satisfy every gating hypothesis,
/// and checks the conclusion on each. Candidates are drawn sequentially from
/// one seeded stream and evaluated in parallel batches, so the outcome does
/// not depend on the thread count.
pub fn fuzz(id: TheoremId, count: usize, seed: u64, cfg: &EvalConfig) -> Result<FuzzReport> {
    fuzz_with(id, count, seed, |inst| evaluate(id, inst, cfg))
}

/// As [`fuzz`], with a caller-supplied evaluation of each candidate.
pub fn fuzz_with<F>(
    id: TheoremId,
    count: usize,
    seed: u64,
    eval: F,
) -> Result<FuzzReport>
where
    F: Fn(&Instance) -> Result<TheoremCheck> + Sync,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let max_attempts = 200 * count.max(1);
    let mut report = FuzzReport {
        theorem: id,
        seed,
        accepted: 0,
        attempts: 0,
        inconclusive: 0,
        violations: Vec::new(),
    };
    while report.accepted < count && report.attempts < max_attempts {
        let batch: Vec<Instance> = (0..64)
            .map(|_| sample_instance(id, &mut rng))
            .collect::<Result<_>>()?;
        let checks: Vec<Result<Option<TheoremCheck>>> = batch
            .par_iter()
            .map(|inst| {
                let check = eval(inst)?;
                Ok(check.hypotheses_hold.then_some(check))
            })
            .collect();
        for (inst, check) in batch.into_iter().zip(checks) {
            if report.accepted >= count {
                break;
            }
            report.attempts += 1;
            let Some(check) = check? else { continue };
            report.accepted += 1;
            match check.conclusion.status {
                Status::Holds => {}
                Status::Inconclusive => report.inconclusive += 1,
                Status::FailsAt => report.violations.push(Violation {
                    instance: inst,
                    check,
                }),
            }
        }
    }
    Ok(report)
}
