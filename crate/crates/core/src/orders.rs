//! Grid verifiers for the usual stochastic, hazard rate, reversed hazard
//! rate, dispersive, star and Lorenz orders.
//!
//! Every `check_*` function tests `a ≤ b` in the named order.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lifetime::Lifetime;
use crate::quadrature::integrate8;
use crate::verdict::Status;

pub const GRID_POINTS_ENV: &str = "EOC_GRID_POINTS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

/// Where "for all x" is checked.
///
/// x-grids span the pooled `[lo_quantile, hi_quantile]` range of both
/// distributions; u-grids span `[lo_quantile, hi_quantile]` directly. `Log`
/// spacing is geometric in x and even in logit(u).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub points: usize,
    pub lo_quantile: f64,
    pub hi_quantile: f64,
    pub spacing: Spacing,
    /// Absolute tolerance on probabilities and Lorenz ordinates.
    pub prob_tol: f64,
    /// Relative tolerance on hazards, quantile differences and ratios.
    pub rel_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 2048,
            lo_quantile: 1e-6,
            hi_quantile: 1.0 - 1e-6,
            spacing: Spacing::Log,
            prob_tol: 1e-9,
            rel_tol: 1e-8,
        }
    }
}

impl GridSpec {
    pub fn new(points: usize, lo_quantile: f64, hi_quantile: f64, spacing: Spacing) -> Result<Self> {
        let g = GridSpec {
            points,
            lo_quantile,
            hi_quantile,
            spacing,
            ..Self::default()
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_points(points: usize) -> Result<Self> {
        Self::new(points, 1e-6, 1.0 - 1e-6, Spacing::Log)
    }

    /// The default grid, with the point count taken from `EOC_GRID_POINTS`
    /// when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(GRID_POINTS_ENV) {
            Ok(v) => {
                let n: usize = v.trim().parse().map_err(|_| {
                    Error::Contract(format!("{GRID_POINTS_ENV}={v:?} is not a point count"))
                })?;
                Self::with_points(n)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 16 {
            return Err(Error::InvalidParameter {
                name: "points",
                value: self.points as f64,
                reason: "need at least 16 grid points",
            });
        }
        if !(self.lo_quantile > 0.0
            && self.lo_quantile < self.hi_quantile
            && self.hi_quantile < 1.0)
        {
            return Err(Error::Contract(format!(
                "quantile range must satisfy 0 < lo < hi < 1, got [{}, {}]",
                self.lo_quantile, self.hi_quantile
            )));
        }
        if !(self.prob_tol >= 0.0 && self.rel_tol >= 0.0) {
            return Err(Error::Contract("tolerances must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn u_points(&self) -> Vec<f64> {
        let n = self.points;
        match self.spacing {
            Spacing::Linear => (0..n)
                .map(|i| {
                    self.lo_quantile
                        + (self.hi_quantile - self.lo_quantile) * i as f64 / (n - 1) as f64
                })
                .collect(),
            Spacing::Log => {
                let logit = |u: f64| (u / (1.0 - u)).ln();
                let (a, b) = (logit(self.lo_quantile), logit(self.hi_quantile));
                (0..n)
                    .map(|i| 1.0 / (1.0 + (-(a + (b - a) * i as f64 / (n - 1) as f64)).exp()))
                    .collect()
            }
        }
    }

    fn x_points_between(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = self.points;
        match self.spacing {
            Spacing::Linear => (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect(),
            Spacing::Log => {
                let (a, b) = (lo.ln(), hi.ln());
                (0..n)
                    .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        }
    }

    /// x-grid over the pooled quantile range of `a` and `b`.
    pub fn x_points<A: Lifetime + ?Sized, B: Lifetime + ?Sized>(
        &self,
        a: &A,
        b: &B,
    ) -> Result<Vec<f64>> {
        let lo = a.quantile(self.lo_quantile)?.min(b.quantile(self.lo_quantile)?);
        let hi = a.quantile(self.hi_quantile)?.max(b.quantile(self.hi_quantile)?);
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::NonFinite(format!("grid range [{lo}, {hi}]")));
        }
        Ok(self.x_points_between(lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    St,
    Hr,
    Rh,
    Disp,
    Star,
    Lorenz,
}

impl Order {
    pub const ALL: [Order; 6] = [
        Order::St,
        Order::Hr,
        Order::Rh,
        Order::Disp,
        Order::Star,
        Order::Lorenz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Order::St => "st",
            Order::Hr => "hr",
            Order::Rh => "rh",
            Order::Disp => "disp",
            Order::Star => "star",
            Order::Lorenz => "lorenz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub axis: Axis,
    pub at: f64,
    /// Size of the violation in the units of the check.
    pub gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub grid: GridSpec,
}

impl OrderVerdict {
    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    fn holds_on(grid: &GridSpec) -> Self {
        OrderVerdict {
            status: Status::Holds,
            witness: None,
            reason: None,
            grid: *grid,
        }
    }

    fn fails(grid: &GridSpec, w: Witness) -> Self {
        OrderVerdict {
            status: Status::FailsAt,
            witness: Some(w),
            reason: None,
            grid: *grid,
        }
    }

    fn inconclusive(grid: &GridSpec, reason: impl Into<String>, w: Option<Witness>) -> Self {
        OrderVerdict {
            status: Status::Inconclusive,
            witness: w,
            reason: Some(reason.into()),
            grid: *grid,
        }
    }
}

/// A sign change of `F_a − F_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub x: f64,
    /// Largest-magnitude gap on the left of the crossing.
    pub gap_before: f64,
    /// Largest-magnitude gap on the right of the crossing.
    pub gap_after: f64,
}

/// Dispatches to the verifier of `order`.
pub fn check<A, B>(order: Order, a: &A, b: &B, grid: &GridSpec) -> OrderVerdict
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    match order {
        Order::St => check_usual_st(a, b, grid),
        Order::Hr => check_hazard_rate(a, b, grid),
        Order::Rh => check_reversed_hazard(a, b, grid),
        Order::Disp => check_dispersive(a, b, grid),
        Order::Star => check_star(a, b, grid),
        Order::Lorenz => check_lorenz(a, b, grid),
    }
}

fn or_inconclusive<T>(grid: &GridSpec, r: Result<T>) -> std::result::Result<T, OrderVerdict> {
    r.map_err(|e| OrderVerdict::inconclusive(grid, e.to_string(), None))
}

/// The largest violation in a scan, if any exceeds `tol`.
fn worst_violation(points: &[f64], violation: &[f64]) -> Option<(f64, f64)> {
    points
        .iter()
        .zip(violation)
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(&x, &v)| (x, v))
}

/// `a ≤_st b`: `F̄_a ≤ F̄_b` everywhere.
pub fn check_usual_st<A, B>(a: &A, b: &B, grid: &GridSpec) -> OrderVerdict
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    let xs = match or_inconclusive(grid, grid.x_points(a, b)) {
        Ok(v) => v,
        Err(v) => return v,
    };
    let gaps: Vec<f64> = xs.par_iter().map(|&x| sf_gap(a, b, x)).collect();
    match worst_violation(&xs, &gaps) {
        Some((at, gap)) if gap > grid.prob_tol => {
            let crossing = first_crossing(a, b, &xs, &gaps, grid.prob_tol).map(|c| c.x);
            OrderVerdict::fails(
                grid,
                Witness {
                    axis: Axis::X,
                    at,
                    gap,
                    crossing,
                },
            )
        }
        _ => OrderVerdict::holds_on(grid),
    }
}

/// `F̄_a(x) − F̄_b(x)`, which equals `F_b(x) − F_a(x)`.
fn sf_gap<A: Lifetime + ?Sized, B: Lifetime + ?Sized>(a: &A, b: &B, x: f64) -> f64 {
    let (pa, pb) = (a.prob(x), b.prob(x));
    if pa.p < 0.5 && pb.p < 0.5 {
        pb.p - pa.p
    } else {
        pa.q - pb.q
    }
}

/// Locates the first sign change of `F_a − F_b` between gaps exceeding the
/// probability tolerance and bisects it to 1e-10.
pub fn find_crossing<A, B>(a: &A, b: &B, grid: &GridSpec) -> Result<Option<Crossing>>
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    let xs = grid.x_points(a, b)?;
    let gaps: Vec<f64> = xs.par_iter().map(|&x| sf_gap(a, b, x)).collect();
    Ok(first_crossing(a, b, &xs, &gaps, grid.prob_tol))
}

fn first_crossing<A, B>(a: &A, b: &B, xs: &[f64], gaps: &[f64], tol: f64) -> Option<Crossing>
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    let mut run_sign = 0.0;
    let mut run_last = 0;
    let mut run_extreme = 0.0f64;
    for (j, &g) in gaps.iter().enumerate() {
        if g.is_nan() || g.abs() <= tol {
            continue;
        }
        let s = g.signum();
        if run_sign == 0.0 || s == run_sign {
            run_sign = s;
            run_last = j;
            if g.abs() > run_extreme.abs() {
                run_extreme = g;
            }
            continue;
        }
        let (mut lo, mut hi) = (xs[run_last], xs[j]);
        let lo_sign = run_sign;
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sf_gap(a, b, mid) * lo_sign > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut after = g;
        for &h in &gaps[j..] {
            if h.abs() > tol && h.signum() != s {
                break;
            }
            if h.abs() > after.abs() {
                after = h;
            }
        }
        // gaps are F_b − F_a; report F_a − F_b
        return Some(Crossing {
            x: 0.5 * (lo + hi),
            gap_before: -run_extreme,
            gap_after: -after,
        });
    }
    None
}

/// Primary pointwise scan plus the log-ratio confirmation shared by the
/// hazard and reversed hazard checks.
fn rate_check(
    grid: &GridSpec,
    xs: &[f64],
    rate_lo: &[f64],
    rate_hi: &[f64],
    log_ratio: &[f64],
) -> OrderVerdict {
    let slack: Vec<f64> = rate_lo
        .iter()
        .zip(rate_hi)
        .map(|(&l, &h)| {
            let scale = l.abs().max(h.abs());
            if scale == 0.0 {
                0.0
            } else {
                (h - l) / scale
            }
        })
        .collect();
    let viol: Vec<f64> = slack.iter().map(|s| -s).collect();
    if viol.iter().all(|v| !v.is_finite()) {
        return OrderVerdict::inconclusive(grid, "no finite rates on the grid", None);
    }
    let mut ratio_drop = f64::INFINITY;
    for j in 1..log_ratio.len() {
        let d = log_ratio[j] - log_ratio[j - 1];
        if d.is_finite() {
            ratio_drop = ratio_drop.min(d);
        }
    }
    match worst_violation(xs, &viol) {
        Some((at, gap)) if gap > grid.rel_tol => {
            let w = Witness {
                axis: Axis::X,
                at,
                gap,
                crossing: None,
            };
            if ratio_drop >= 0.0 {
                OrderVerdict::inconclusive(
                    grid,
                    "pointwise rates violate the order but the survival ratio never decreases",
                    Some(w),
                )
            } else {
                OrderVerdict::fails(grid, w)
            }
        }
        _ => {
            if ratio_drop < -1e-7 {
                OrderVerdict::inconclusive(
                    grid,
                    "pointwise rates satisfy the order but the survival ratio decreases",
                    None,
                )
            } else {
                OrderVerdict::holds_on(grid)
            }
        }
    }
}

/// `a ≤_hr b`: `r_a ≥ r_b`, confirmed by `F̄_b/F̄_a` being nondecreasing.
pub fn check_hazard_rate<A, B>(a: &A, b: &B, grid: &GridSpec) -> OrderVerdict
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    let xs = match or_inconclusive(grid, grid.x_points(a, b)) {
        Ok(v) => v,
        Err(v) => return v,
    };
    let rows: Vec<(f64, f64, f64)> = xs
        .par_iter()
        .map(|&x| {
            let lr = b.sf(x).ln() - a.sf(x).ln();
            (b.hazard(x), a.hazard(x), lr)
        })
        .collect();
    let lo: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let hi: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let lr: Vec<f64> = rows.iter().map(|r| r.2).collect();
    // F̄_b/F̄_a equals 1 at the origin, so it cannot rise unless F̄_a ≤ F̄_b
    // already holds at the first grid point.
    let first = xs[0];
    endpoint(rate_check(grid, &xs, &lo, &hi, &lr), grid, first, sf_gap(a, b, first))
}

/// A violation of the order implied at an end of the support, which the
/// ratio takes to be 1 beyond the grid.
fn endpoint(v: OrderVerdict, grid: &GridSpec, at: f64, gap: f64) -> OrderVerdict {
    if v.status == Status::FailsAt || gap <= grid.prob_tol {
        return v;
    }
    let mut f = OrderVerdict::fails(
        grid,
        Witness {
            axis: Axis::X,
            at,
            gap,
            crossing: None,
        },
    );
    f.reason = Some("the survival functions are misordered at the end of the grid".into());
    f
}

/// `a ≤_rh b`: `r̃_a ≤ r̃_b`, confirmed by `F_b/F_a` being nondecreasing.
pub fn check_reversed_hazard<A, B>(a: &A, b: &B, grid: &GridSpec) -> OrderVerdict
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    let xs = match or_inconclusive(grid, grid.x_points(a, b)) {
        Ok(v) => v,
        Err(v) => return v,
    };
    let rows: Vec<(f64, f64, f64)> = xs
        .par_iter()
        .map(|&x| {
            let lr = b.cdf(x).ln() - a.cdf(x).ln();
            (a.rev_hazard(x), b.rev_hazard(x), lr)
        })
        .collect();
    let lo: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let hi: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let lr: Vec<f64> = rows.iter().map(|r| r.2).collect();
    // F_b/F_a tends to 1 at infinity, so it cannot rise unless F_b ≤ F_a at
    // the last grid point.
    let last = xs[xs.len() - 1];
    endpoint(rate_check(grid, &xs, &lo, &hi, &lr), grid, last, sf_gap(a, b, last))
}

fn quantiles<L: Lifetime + ?Sized>(d: &L, us: &[f64]) -> Result<Vec<f64>> {
    us.par_iter().map(|&u| d.quantile(u)).collect()
}

fn both_quantiles<A, B>(a: &A, b: &B, grid: &GridSpec) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)>
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    let us = grid.u_points();
    let qa = quantiles(a, &us)?;
    let qb = quantiles(b, &us)?;
    Ok((us, qa, qb))
}

fn monotone_verdict(grid: &GridSpec, us: &[f64], drops: &[f64]) -> OrderVerdict {
    match worst_violation(&us[1..], drops) {
        Some((at, gap)) if gap > grid.rel_tol => OrderVerdict::fails(
            grid,
            Witness {
                axis: Axis::U,
                at,
                gap,
                crossing: None,
            },
        ),
        _ => OrderVerdict::holds_on(grid),
    }
}

/// `a ≤_disp b`: `Q_b − Q_a` nondecreasing on the u-grid. Drops are measured
/// relative to the larger quantile at the right end of each step.
pub fn check_dispersive<A, B>(a: &A, b: &B, grid: &GridSpec) -> OrderVerdict
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    let (us, qa, qb) = match or_inconclusive(grid, both_quantiles(a, b, grid)) {
        Ok(v) => v,
        Err(v) => return v,
    };
    let drops: Vec<f64> = (1..us.len())
        .map(|j| {
            let d = (qb[j] - qa[j]) - (qb[j - 1] - qa[j - 1]);
            -d / qa[j].max(qb[j])
        })
        .collect();
    monotone_verdict(grid, &us, &drops)
}

/// `a ≤_* b`: `Q_b(F_a(x))/x` nondecreasing, evaluated at `x = Q_a(u)` on the
/// u-grid so that points below the lower quantile are skipped.
pub fn check_star<A, B>(a: &A, b: &B, grid: &GridSpec) -> OrderVerdict
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    let (us, qa, qb) = match or_inconclusive(grid, both_quantiles(a, b, grid)) {
        Ok(v) => v,
        Err(v) => return v,
    };
    let ratio: Vec<f64> = qa.iter().zip(&qb).map(|(a, b)| b / a).collect();
    let drops: Vec<f64> = (1..us.len())
        .map(|j| (ratio[j - 1] - ratio[j]) / ratio[j - 1])
        .collect();
    monotone_verdict(grid, &us, &drops)
}

/// Normalized Lorenz ordinates at `us` (ascending, inside (0, 1)) and the mean.
///
/// `∫₀ᵘ Q(p) dp` is accumulated as `∫ x f(x) dx` between consecutive grid
/// quantiles with an 8-point Gauss–Legendre rule per step (in log x for wide
/// steps). The piece below the first quantile uses the same rule in p, and the
/// part above the last quantile `x*` is `x* F̄(x*) + ∫_{x*}^∞ F̄`, integrated in
/// log x until the remaining tail is negligible.
pub fn lorenz_curve<L: Lifetime + ?Sized>(d: &L, us: &[f64]) -> Result<(Vec<f64>, f64)> {
    if us.is_empty() {
        return Err(Error::Contract("empty u-grid".into()));
    }
    let xs = quantiles(d, us)?;
    let first = integrate8(|p| d.quantile(p).unwrap_or(f64::NAN), 0.0, us[0]);
    let pieces: Vec<f64> = (1..xs.len())
        .into_par_iter()
        .map(|j| partial_mean(d, xs[j - 1], xs[j]))
        .collect();
    let mut cum = Vec::with_capacity(xs.len());
    let mut acc = first;
    cum.push(acc);
    for p in pieces {
        acc += p;
        cum.push(acc);
    }
    let last = *xs.last().unwrap();
    let tail = last * d.sf(last) + sf_integral(d, last);
    let mean = acc + tail;
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::NonFinite(format!("mean {mean}")));
    }
    Ok((cum.iter().map(|c| c / mean).collect(), mean))
}

fn partial_mean<L: Lifetime + ?Sized>(d: &L, x0: f64, x1: f64) -> f64 {
    if x0 > 0.0 && x1 / x0 > 2.0 {
        integrate8(
            |t| {
                let x = t.exp();
                x * x * d.pdf(x)
            },
            x0.ln(),
            x1.ln(),
        )
    } else {
        integrate8(|x| x * d.pdf(x), x0, x1)
    }
}

fn sf_integral<L: Lifetime + ?Sized>(d: &L, from: f64) -> f64 {
    let mut total = 0.0;
    let mut t0 = from.ln();
    let step = 0.25;
    for _ in 0..4000 {
        let t1 = t0 + step;
        let piece = integrate8(
            |t| {
                let x = t.exp();
                x * d.sf(x)
            },
            t0,
            t1,
        );
        total += piece;
        let x1 = t1.exp();
        if x1 * d.sf(x1) <= 1e-18 * total.max(f64::MIN_POSITIVE) || d.sf(x1) == 0.0 {
            break;
        }
        t0 = t1;
    }
    total
}

/// Mean of a lifetime by the Lorenz quadrature on a 256-point u-grid.
pub fn mean<L: Lifetime + ?Sized>(d: &L) -> Result<f64> {
    let g = GridSpec::with_points(256)?;
    Ok(lorenz_curve(d, &g.u_points())?.1)
}

/// `a ≤_Lorenz b`: `L_a(u) ≥ L_b(u)` on the u-grid.
pub fn check_lorenz<A, B>(a: &A, b: &B, grid: &GridSpec) -> OrderVerdict
where
    A: Lifetime + ?Sized,
    B: Lifetime + ?Sized,
{
    let us = grid.u_points();
    let (la, lb) = match (lorenz_curve(a, &us), lorenz_curve(b, &us)) {
        (Ok(a), Ok(b)) => (a.0, b.0),
        (Err(e), _) | (_, Err(e)) => {
            return OrderVerdict::inconclusive(grid, format!("mean did not converge: {e}"), None)
        }
    };
    let viol: Vec<f64> = la.iter().zip(&lb).map(|(a, b)| b - a).collect();
    match worst_violation(&us, &viol) {
        Some((at, gap)) if gap > grid.prob_tol => OrderVerdict::fails(
            grid,
            Witness {
                axis: Axis::U,
                at,
                gap,
                crossing: None,
            },
        ),
        _ => OrderVerdict::holds_on(grid),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ew::EwParams;

    fn expo(rate: f64) -> EwParams {
        EwParams::exponential(rate).unwrap()
    }

    fn grid() -> GridSpec {
        GridSpec::with_points(256).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::with_points(15).is_err());
        assert!(GridSpec::new(64, 0.5, 0.4, Spacing::Log).is_err());
        let us = GridSpec::new(64, 0.1, 0.9, Spacing::Linear).unwrap().u_points();
        assert!((us[0] - 0.1).abs() < 1e-15 && (us[63] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn identical_distributions_hold_everywhere() {
        let a = EwParams::new(0.4, 1.3, 0.7).unwrap();
        for order in Order::ALL {
            assert!(check(order, &a, &a, &grid()).holds(), "{order:?}");
        }
        assert!(find_crossing(&a, &a, &grid()).unwrap().is_none());
    }

    #[test]
    fn faster_exponential_is_smaller() {
        let (fast, slow) = (expo(2.0), expo(1.0));
        assert!(check_usual_st(&fast, &slow, &grid()).holds());
        assert!(check_hazard_rate(&fast, &slow, &grid()).holds());
        assert!(check_dispersive(&fast, &slow, &grid()).holds());
        let v = check_usual_st(&slow, &fast, &grid());
        assert_eq!(v.status, Status::FailsAt);
        assert!(v.witness.unwrap().gap > 0.2);
        assert_eq!(check_dispersive(&slow, &fast, &grid()).status, Status::FailsAt);
    }

    #[test]
    fn scale_changes_are_invisible_to_star_and_lorenz() {
        let a = EwParams::new(0.6, 1.0, 1.7).unwrap();
        let b = a.with_lambda(3.5).unwrap();
        for v in [
            check_star(&a, &b, &grid()),
            check_star(&b, &a, &grid()),
            check_lorenz(&a, &b, &grid()),
            check_lorenz(&b, &a, &grid()),
        ] {
            assert!(v.holds(), "{v:?}");
        }
    }

    #[test]
    fn crossing_is_located() {
        // same median scale, different shapes: the cdfs cross once
        let a = EwParams::new(1.0, 1.0, 0.5).unwrap();
        let b = EwParams::new(1.0, 1.0, 3.0).unwrap();
        let c = find_crossing(&a, &b, &grid()).unwrap().unwrap();
        assert!((c.x - 1.0).abs() < 1e-9, "{c:?}");
        assert!(c.gap_before > 0.0 && c.gap_after < 0.0);
        let v = check_usual_st(&a, &b, &grid());
        assert_eq!(v.status, Status::FailsAt);
        assert!((v.witness.unwrap().crossing.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn means_match_closed_forms() {
        let cases = [
            (1.0, 1.0),
            (0.5, 2.0),
            (1.0 / 3.0, 6.0),
            (2.0, std::f64::consts::PI.sqrt() / 2.0),
        ];
        for (k, unit_mean) in cases {
            for lambda in [0.3, 2.0] {
                let p = EwParams::new(1.0, lambda, k).unwrap();
                let m = mean(&p).unwrap();
                let want = unit_mean / lambda;
                assert!((m - want).abs() <= 1e-9 * want, "k={k} λ={lambda}: {m} vs {want}");
            }
        }
    }

    #[test]
    fn lorenz_of_exponential() {
        // L(u) = u + (1 − u) ln(1 − u)
        let us = grid().u_points();
        let (l, _) = lorenz_curve(&expo(1.7), &us).unwrap();
        for (u, l) in us.iter().zip(l) {
            let want = u + (1.0 - u) * (-u).ln_1p();
            assert!((l - want).abs() < 1e-10, "u={u}: {l} vs {want}");
        }
    }

    #[test]
    fn reversed_hazard_of_tilts() {
        // a smaller tilt makes the marginal stochastically smaller in rh
        let a = EwParams::new(0.3, 1.0, 1.0).unwrap();
        let b = EwParams::new(0.9, 1.0, 1.0).unwrap();
        assert!(check_reversed_hazard(&a, &b, &grid()).holds());
        assert_eq!(check_reversed_hazard(&b, &a, &grid()).status, Status::FailsAt);
    }
}
