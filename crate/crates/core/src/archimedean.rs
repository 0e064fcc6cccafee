//! Archimedean generators and the side-condition checkers built on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::lifetime::Prob;
use crate::verdict::{ConditionVerdict, Worst};

/// Arguments below this are treated as 0 by the coupling.
pub const CLAMP_MIN: f64 = 1e-300;

/// The generator calculus used by couplings and checkers.
///
/// Only `psi`, `phi` and their first two derivatives are required; the
/// remaining methods have generic defaults that families may override with
/// forms that stay finite where the plain composition overflows.
pub trait ArchimedeanGenerator: Sync {
    fn psi(&self, x: f64) -> f64;
    fn psi_d1(&self, x: f64) -> f64;
    fn psi_d2(&self, x: f64) -> f64;
    fn phi(&self, t: f64) -> f64;
    fn phi_d1(&self, t: f64) -> f64;
    fn phi_d2(&self, t: f64) -> f64;

    fn is_valid(&self) -> bool {
        true
    }

    fn ln_psi(&self, x: f64) -> f64 {
        self.psi(x).ln()
    }

    /// `(ln ψ)′(x)`, i.e. `ψ′/ψ`.
    fn ln_psi_d1(&self, x: f64) -> f64 {
        self.psi_d1(x) / self.psi(x)
    }

    /// `(ln ψ)″(x)`.
    fn ln_psi_d2(&self, x: f64) -> f64 {
        let p = self.psi(x);
        let r = self.psi_d1(x) / p;
        self.psi_d2(x) / p - r * r
    }

    /// `φ(e^l)`.
    fn phi_of_ln(&self, l: f64) -> f64 {
        self.phi(l.exp())
    }

    /// `φ″(t)/φ′(t)`.
    fn phi_d2_over_d1(&self, t: f64) -> f64 {
        self.phi_d2(t) / self.phi_d1(t)
    }

    /// `ψ(Σ φ(uᵢ))` together with its complement.
    fn couple(&self, u: &[Prob]) -> Prob {
        if u.iter().any(|p| p.p < CLAMP_MIN) {
            return Prob::ZERO;
        }
        let s: f64 = u.iter().map(|p| self.phi_of_ln(ln_prob(*p))).sum();
        Prob::from_p(self.psi(s))
    }

    /// `Σᵢ ∂C/∂uᵢ · wᵢ`, the chain-rule derivative of the coupling.
    fn couple_density(&self, u: &[Prob], w: &[f64]) -> f64 {
        let s: f64 = u
            .iter()
            .map(|p| self.phi_of_ln(ln_prob(clamped(*p))))
            .sum();
        let outer = self.psi_d1(s);
        u.iter()
            .zip(w)
            .filter(|(_, &wi)| wi != 0.0)
            .map(|(p, &wi)| outer * self.phi_d1(clamped(*p).p) * wi)
            .sum()
    }
}

/// `ln p`, using the complement where that is more accurate.
pub(crate) fn ln_prob(p: Prob) -> f64 {
    if p.p > 0.5 {
        (-p.q).ln_1p()
    } else {
        p.p.ln()
    }
}

fn clamped(p: Prob) -> Prob {
    if p.p < CLAMP_MIN {
        Prob::new(CLAMP_MIN, 1.0)
    } else {
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Independence,
    GumbelVariant,
    ExpReciprocal,
}

/// One of the three implemented generator families.
///
/// * `Independence`: ψ(t) = e^{−t}
/// * `GumbelVariant`: ψ(t) = e^{1−(1+t)^θ}, a proper generator for θ ≥ 1
/// * `ExpReciprocal`: ψ(t) = θ / ln(t + e^θ), θ > 0
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGenerator", into = "RawGenerator")]
pub struct Generator {
    family: Family,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGenerator {
    family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

impl TryFrom<RawGenerator> for Generator {
    type Error = Error;
    fn try_from(r: RawGenerator) -> Result<Self> {
        match r.family {
            Family::Independence => Ok(Generator::independence()),
            Family::GumbelVariant => Generator::gumbel_variant(r.theta.unwrap_or(f64::NAN)),
            Family::ExpReciprocal => Generator::exp_reciprocal(r.theta.unwrap_or(f64::NAN)),
        }
    }
}

impl From<Generator> for RawGenerator {
    fn from(g: Generator) -> Self {
        RawGenerator {
            family: g.family,
            theta: match g.family {
                Family::Independence => None,
                _ => Some(g.theta),
            },
        }
    }
}

fn domain(name: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        domain,
    }
}

impl Generator {
    pub fn independence() -> Self {
        Generator {
            family: Family::Independence,
            theta: 1.0,
        }
    }

    /// Accepts any θ > 0; θ < 1 is usable for evaluation but flagged invalid.
    pub fn gumbel_variant(theta: f64) -> Result<Self> {
        Ok(Generator {
            family: Family::GumbelVariant,
            theta: positive("theta", theta)?,
        })
    }

    pub fn exp_reciprocal(theta: f64) -> Result<Self> {
        Ok(Generator {
            family: Family::ExpReciprocal,
            theta: positive("theta", theta)?,
        })
    }

    pub fn new(family: Family, theta: f64) -> Result<Self> {
        match family {
            Family::Independence => Ok(Self::independence()),
            Family::GumbelVariant => Self::gumbel_variant(theta),
            Family::ExpReciprocal => Self::exp_reciprocal(theta),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn try_psi(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.psi(x))
    }

    pub fn try_psi_d1(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.psi_d1(x))
    }

    pub fn try_psi_d2(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.psi_d2(x))
    }

    pub fn try_phi(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.phi(t))
    }

    pub fn try_phi_d1(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.phi_d1(t))
    }

    pub fn try_phi_d2(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.phi_d2(t))
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if x.is_nan() || x < 0.0 {
            Err(domain("x", x, "[0, ∞)"))
        } else {
            Ok(())
        }
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if t.is_nan() || t <= 0.0 || t > 1.0 {
            Err(domain("t", t, "(0, 1]"))
        } else {
            Ok(())
        }
    }

    /// `ln(x + e^θ)` for the exp-reciprocal family.
    fn er_log(&self, x: f64) -> f64 {
        self.theta + (x * (-self.theta).exp()).ln_1p()
    }
}

impl ArchimedeanGenerator for Generator {
    fn psi(&self, x: f64) -> f64 {
        match self.family {
            Family::Independence => (-x).exp(),
            Family::GumbelVariant | Family::ExpReciprocal => self.ln_psi(x).exp(),
        }
    }

    fn psi_d1(&self, x: f64) -> f64 {
        match self.family {
            Family::Independence => -(-x).exp(),
            Family::GumbelVariant => {
                let th = self.theta;
                -th * ((th - 1.0) * x.ln_1p()).exp() * self.psi(x)
            }
            Family::ExpReciprocal => {
                let l = self.er_log(x);
                let s = x + self.theta.exp();
                -self.theta / (l * l * s)
            }
        }
    }

    fn psi_d2(&self, x: f64) -> f64 {
        match self.family {
            Family::Independence => (-x).exp(),
            Family::GumbelVariant => {
                let th = self.theta;
                let lp = x.ln_1p();
                let a = th * th * ((2.0 * th - 2.0) * lp).exp();
                let b = th * (th - 1.0) * ((th - 2.0) * lp).exp();
                (a - b) * self.psi(x)
            }
            Family::ExpReciprocal => {
                let l = self.er_log(x);
                let s = x + self.theta.exp();
                self.theta * (2.0 + l) / (l * l * l * s * s)
            }
        }
    }

    fn phi(&self, t: f64) -> f64 {
        self.phi_of_ln(t.ln())
    }

    fn phi_d1(&self, t: f64) -> f64 {
        match self.family {
            Family::Independence => -1.0 / t,
            Family::GumbelVariant => {
                let g = 1.0 - t.ln();
                -(((1.0 / self.theta - 1.0) * g.ln()).exp()) / (self.theta * t)
            }
            Family::ExpReciprocal => -(self.theta / (t * t)) * (self.theta / t).exp(),
        }
    }

    fn phi_d2(&self, t: f64) -> f64 {
        match self.family {
            Family::Independence => 1.0 / (t * t),
            Family::GumbelVariant => {
                let g = 1.0 - t.ln();
                let inv = 1.0 / self.theta;
                inv * ((inv - 2.0) * g.ln()).exp() * ((inv - 1.0) + g) / (t * t)
            }
            Family::ExpReciprocal => {
                let th = self.theta;
                th * (th / t).exp() * (2.0 + th / t) / (t * t * t)
            }
        }
    }

    fn is_valid(&self) -> bool {
        match self.family {
            Family::GumbelVariant => self.theta >= 1.0,
            _ => true,
        }
    }

    fn ln_psi(&self, x: f64) -> f64 {
        match self.family {
            Family::Independence => -x,
            Family::GumbelVariant => -(self.theta * x.ln_1p()).exp_m1(),
            Family::ExpReciprocal => {
                -((x * (-self.theta).exp()).ln_1p() / self.theta).ln_1p()
            }
        }
    }

    fn ln_psi_d1(&self, x: f64) -> f64 {
        match self.family {
            Family::Independence => -1.0,
            Family::GumbelVariant => -self.theta * ((self.theta - 1.0) * x.ln_1p()).exp(),
            Family::ExpReciprocal => {
                let l = self.er_log(x);
                -1.0 / (l * (x + self.theta.exp()))
            }
        }
    }

    fn ln_psi_d2(&self, x: f64) -> f64 {
        match self.family {
            Family::Independence => 0.0,
            Family::GumbelVariant => {
                let th = self.theta;
                -th * (th - 1.0) * ((th - 2.0) * x.ln_1p()).exp()
            }
            Family::ExpReciprocal => {
                let l = self.er_log(x);
                let ls = l * (x + self.theta.exp());
                (1.0 + l) / (ls * ls)
            }
        }
    }

    fn phi_of_ln(&self, l: f64) -> f64 {
        match self.family {
            Family::Independence => -l,
            Family::GumbelVariant => ((-l).ln_1p() / self.theta).exp_m1(),
            Family::ExpReciprocal => {
                let a = self.theta * (-l).exp_m1();
                self.theta.exp() * a.exp_m1()
            }
        }
    }

    fn phi_d2_over_d1(&self, t: f64) -> f64 {
        match self.family {
            Family::Independence => -1.0 / t,
            Family::GumbelVariant => {
                let g = 1.0 - t.ln();
                -((1.0 / self.theta - 1.0) + g) / (g * t)
            }
            Family::ExpReciprocal => -(2.0 + self.theta / t) / t,
        }
    }

    fn couple(&self, u: &[Prob]) -> Prob {
        if u.iter().any(|p| p.p < CLAMP_MIN) {
            return Prob::ZERO;
        }
        match self.family {
            Family::Independence => {
                let s: f64 = u.iter().map(|p| ln_prob(*p)).sum();
                Prob::new(s.exp(), -s.exp_m1())
            }
            Family::GumbelVariant => {
                let s: f64 = u.iter().map(|p| self.phi_of_ln(ln_prob(*p))).sum();
                let l = -(self.theta * s.ln_1p()).exp_m1();
                Prob::new(l.exp(), -l.exp_m1())
            }
            Family::ExpReciprocal => {
                let ln_s = self.er_ln_sum(u);
                let den = self.theta + ln_s;
                Prob::new(self.theta / den, ln_s / den)
            }
        }
    }

    fn couple_density(&self, u: &[Prob], w: &[f64]) -> f64 {
        match self.family {
            Family::Independence => {
                let lns: Vec<f64> = u.iter().map(|p| ln_prob(clamped(*p))).collect();
                let total: f64 = lns.iter().sum();
                lns.iter()
                    .zip(w)
                    .filter(|(_, &wi)| wi != 0.0)
                    .map(|(l, &wi)| (total - l).exp() * wi)
                    .sum()
            }
            Family::GumbelVariant => {
                let th = self.theta;
                let lns: Vec<f64> = u.iter().map(|p| ln_prob(clamped(*p))).collect();
                let s: f64 = lns.iter().map(|&l| self.phi_of_ln(l)).sum();
                let ln_c = -(th * s.ln_1p()).exp_m1();
                let head = (th - 1.0) * s.ln_1p() + ln_c;
                lns.iter()
                    .zip(w)
                    .filter(|(_, &wi)| wi != 0.0)
                    .map(|(&l, &wi)| (head + (1.0 / th - 1.0) * (-l).ln_1p() - l).exp() * wi)
                    .sum()
            }
            Family::ExpReciprocal => {
                let th = self.theta;
                let cl: Vec<Prob> = u.iter().map(|p| clamped(*p)).collect();
                let ln_s = self.er_ln_sum(&cl);
                let big = th + ln_s;
                cl.iter()
                    .zip(w)
                    .filter(|(_, &wi)| wi != 0.0)
                    .map(|(p, &wi)| {
                        let a = th * p.q / p.p;
                        th * th / (p.p * p.p * big * big) * (a - ln_s).exp() * wi
                    })
                    .sum()
            }
        }
    }
}

impl Generator {
    /// `ln(1 + Σ (e^{aᵢ} − 1))` with `aᵢ = θ(1 − uᵢ)/uᵢ`, evaluated without overflow.
    fn er_ln_sum(&self, u: &[Prob]) -> f64 {
        let a: Vec<f64> = u.iter().map(|p| self.theta * p.q / p.p).collect();
        let top = a.iter().cloned().fold(0.0, f64::max);
        if top < 600.0 {
            a.iter().map(|&ai| ai.exp_m1()).sum::<f64>().ln_1p()
        } else {
            let n = a.len() as f64;
            let rest: f64 = a.iter().map(|&ai| (ai - top).exp()).sum();
            top + (rest - (n - 1.0) * (-top).exp()).ln()
        }
    }
}

/// Grids and tolerance for the condition checkers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckGrid {
    pub points: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub tol: f64,
}

impl Default for CheckGrid {
    fn default() -> Self {
        CheckGrid {
            points: 1024,
            t_lo: 1e-6,
            t_hi: 1.0 - 1e-6,
            x_lo: 1e-6,
            x_hi: 40.0,
            tol: 1e-9,
        }
    }
}

impl CheckGrid {
    pub fn with_points(points: usize) -> Self {
        CheckGrid {
            points,
            ..Self::default()
        }
    }

    /// Points of (0, 1) spaced evenly in logit, as `(t, 1 − t)` pairs.
    pub fn unit_points(&self) -> Vec<(f64, f64)> {
        let logit = |t: f64| (t / (1.0 - t)).ln();
        let (a, b) = (logit(self.t_lo), logit(self.t_hi));
        let n = self.points.max(2);
        (0..n)
            .map(|i| {
                let z = a + (b - a) * i as f64 / (n - 1) as f64;
                (1.0 / (1.0 + (-z).exp()), 1.0 / (1.0 + z.exp()))
            })
            .collect()
    }

    pub fn log_points(&self) -> Vec<f64> {
        self.log_points_to(self.x_hi)
    }

    /// Log-spaced points on `[x_lo, hi]`.
    pub fn log_points_to(&self, hi: f64) -> Vec<f64> {
        let (a, b) = (self.x_lo.ln(), hi.ln());
        let n = self.points.max(2);
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    pub fn linear_points(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n)
            .map(|i| self.x_lo + (self.x_hi - self.x_lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

fn flag_invalid(mut v: ConditionVerdict, valid: bool) -> ConditionVerdict {
    if !valid {
        v.status = crate::verdict::Status::Inconclusive;
        v.reason = Some("generator outside its validity range".into());
    }
    v
}

const SUPERADDITIVE_X_CAP: f64 = 1e300;

/// Super-additivity of `φ₂∘ψ₁`: `f(x) + f(y) ≤ f(x + y)`.
///
/// The slack is scaled by `max(1, |f(x+y)|)`, and pairs where `f(x+y)` is
/// infinite count as satisfied.
pub fn check_superadditive<A, B>(g1: &A, g2: &B, grid: &CheckGrid) -> ConditionVerdict
where
    A: ArchimedeanGenerator + ?Sized,
    B: ArchimedeanGenerator + ?Sized,
{
    let f = |x: f64| g2.phi_of_ln(g1.ln_psi(x));
    // Arguments reach φ₁(t_lo), which for steep generators dwarfs x_hi.
    let reach = g1.phi(grid.t_lo);
    let hi = if reach.is_finite() { reach } else { SUPERADDITIVE_X_CAP };
    let xs = grid.log_points_to(grid.x_hi.max(hi.min(SUPERADDITIVE_X_CAP)));
    let fx: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let worst = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let mut w = Worst::new();
            for j in i..xs.len() {
                let sum = f(xs[i] + xs[j]);
                if sum == f64::INFINITY {
                    continue;
                }
                let slack = (sum - fx[i] - fx[j]) / sum.abs().max(1.0);
                w.push(slack, &[xs[i], xs[j]]);
            }
            w
        })
        .reduce(Worst::new, Worst::merge);
    flag_invalid(worst.finish(grid.tol), g1.is_valid() && g2.is_valid())
}

/// Log-concavity of ψ: `(ln ψ)″ ≤ tol`.
pub fn check_log_concave_psi<G: ArchimedeanGenerator + ?Sized>(
    g: &G,
    grid: &CheckGrid,
) -> ConditionVerdict {
    let mut w = Worst::new();
    for x in grid.log_points() {
        w.push(-g.ln_psi_d2(x), &[x]);
    }
    flag_invalid(w.finish(grid.tol), g.is_valid())
}

/// `α t φ″(t) + c φ′(t) ≥ 0` on (0, 1).
///
/// Since φ′ < 0 the scan evaluates the equivalent, scale-free form
/// `−(α t φ″/φ′ + c) ≥ 0`, which stays finite where φ′ overflows.
pub fn check_phi_condition<G: ArchimedeanGenerator + ?Sized>(
    g: &G,
    c: f64,
    alpha: f64,
    grid: &CheckGrid,
) -> ConditionVerdict {
    let mut w = Worst::new();
    for (t, _) in grid.unit_points() {
        w.push(-(alpha * t * g.phi_d2_over_d1(t) + c), &[t]);
    }
    flag_invalid(w.finish(grid.tol), g.is_valid())
}

/// `ψ/ψ′` decreasing and concave, by first and second differences on an
/// evenly spaced grid. Both slacks are scaled by `max(1, |ψ/ψ′|)`.
pub fn check_psi_ratio<G: ArchimedeanGenerator + ?Sized>(
    g: &G,
    grid: &CheckGrid,
) -> ConditionVerdict {
    let xs = grid.linear_points();
    let r: Vec<f64> = xs.iter().map(|&x| 1.0 / g.ln_psi_d1(x)).collect();
    let mut w = Worst::new();
    for j in 1..r.len() {
        let scale = r[j].abs().max(r[j - 1].abs()).max(1.0);
        w.push((r[j - 1] - r[j]) / scale, &[xs[j]]);
        if j + 1 < r.len() {
            let scale = scale.max(r[j + 1].abs());
            w.push(-(r[j + 1] - 2.0 * r[j] + r[j - 1]) / scale, &[xs[j]]);
        }
    }
    flag_invalid(w.finish(grid.tol), g.is_valid())
}

/// The t-function whose monotonicity governs the star order of maxima.
pub fn star_function_max<G: ArchimedeanGenerator + ?Sized>(
    g: &G,
    alpha: f64,
    t: f64,
    one_minus_t: f64,
) -> f64 {
    let ab = 1.0 - alpha;
    let m = alpha + ab * t;
    m * (t / m).ln() * (alpha + 2.0 * ab * t - m * t * g.phi_d2_over_d1(one_minus_t))
}

/// The t-function whose monotonicity governs the star order of minima.
pub fn star_function_min<G: ArchimedeanGenerator + ?Sized>(g: &G, alpha: f64, t: f64) -> f64 {
    let ab = 1.0 - alpha;
    let m = alpha + ab * t;
    m * (t / m).ln() * ((alpha + 2.0 * ab * t) + (alpha * t + ab * t * t) * g.phi_d2_over_d1(t))
}

fn monotone_scan(ts: &[f64], vals: &[f64], increasing: bool) -> Worst {
    let mut w = Worst::new();
    for j in 1..vals.len() {
        let d = vals[j] - vals[j - 1];
        let scale = vals[j].abs().max(vals[j - 1].abs()).max(1.0);
        let slack = if increasing { d } else { -d } / scale;
        w.push(slack, &[ts[j]]);
    }
    w
}

/// Star-order condition for maxima: the t-function must be increasing.
pub fn check_star_condition_max<G: ArchimedeanGenerator + ?Sized>(
    g: &G,
    alpha: f64,
    grid: &CheckGrid,
) -> ConditionVerdict {
    let pts = grid.unit_points();
    let ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let vals: Vec<f64> = pts
        .iter()
        .map(|&(t, s)| star_function_max(g, alpha, t, s))
        .collect();
    flag_invalid(
        monotone_scan(&ts, &vals, true).finish(grid.tol),
        g.is_valid(),
    )
}

/// Star-order condition for minima: the t-function must be decreasing.
pub fn check_star_condition_min<G: ArchimedeanGenerator + ?Sized>(
    g: &G,
    alpha: f64,
    grid: &CheckGrid,
) -> ConditionVerdict {
    let pts = grid.unit_points();
    let ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| star_function_min(g, alpha, t)).collect();
    flag_invalid(
        monotone_scan(&ts, &vals, false).finish(grid.tol),
        g.is_valid(),
    )
}
