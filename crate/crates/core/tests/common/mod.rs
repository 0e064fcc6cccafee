//! Strategies and helper functions shared by the integration suites.

#![allow(dead_code)]

use eoc_core::{CoupledSystem, EwParams, Generator, Statistic};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn ew_params() -> impl Strategy<Value = EwParams> {
    (0.05f64..3.0, 0.2f64..4.0, 0.2f64..4.0)
        .prop_map(|(a, l, k)| EwParams::new(a, l, k).unwrap())
}

pub fn generator() -> impl Strategy<Value = Generator> {
    prop_oneof![
        Just(Generator::independence()),
        (1.0f64..6.0).prop_map(|t| Generator::gumbel_variant(t).unwrap()),
        (0.3f64..6.0).prop_map(|t| Generator::exp_reciprocal(t).unwrap()),
    ]
}

pub fn system(which: Statistic) -> impl Strategy<Value = CoupledSystem> {
    (prop::collection::vec(ew_params(), 1..=4), generator())
        .prop_map(move |(m, g)| CoupledSystem::new(m, g, which.coupling()).unwrap())
}

pub fn random_ew(rng: &mut ChaCha8Rng) -> EwParams {
    EwParams::new(
        rng.gen_range(0.05..3.0),
        rng.gen_range(0.2..4.0),
        rng.gen_range(0.2..4.0),
    )
    .unwrap()
}

pub fn random_generator(rng: &mut ChaCha8Rng) -> Generator {
    match rng.gen_range(0..3) {
        0 => Generator::independence(),
        1 => Generator::gumbel_variant(rng.gen_range(1.0..6.0)).unwrap(),
        _ => Generator::exp_reciprocal(rng.gen_range(0.3..6.0)).unwrap(),
    }
}

pub fn random_system(rng: &mut ChaCha8Rng, which: Statistic) -> CoupledSystem {
    let n = rng.gen_range(1..=4);
    let m = (0..n).map(|_| random_ew(rng)).collect();
    CoupledSystem::new(m, random_generator(rng), which.coupling()).unwrap()
}

/// `n` points from `lo` to `hi`, evenly spaced in log scale.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// `k e^{kx} / (1 − a e^{−b^k e^{kx}})`, increasing in x.
pub fn exp_hazard_ratio(k: f64, a: f64, b: f64, x: f64) -> f64 {
    let e = (k * x).exp();
    k * e / (1.0 - a * (-(b.powf(k) * e)).exp())
}

/// `k x^{k−1} / (1 − a e^{−(bx)^k})`, decreasing in x for k ≤ 1.
pub fn power_hazard_ratio(k: f64, a: f64, b: f64, x: f64) -> f64 {
    k * x.powf(k - 1.0) / (1.0 - a * (-(b * x).powf(k)).exp())
}

/// `e^{e^{kx}} − a(e^{kx} + 1)`, divided by `e^{e^{kx}}` so it stays finite.
/// The sign is unchanged.
pub fn first_exp_polynomial(k: f64, a: f64, x: f64) -> f64 {
    let m = (k * x).exp();
    1.0 - a * (m + 1.0) * (-m).exp()
}

/// `e^{2e^{kx}} + a(e^{2kx} − 3e^{kx} − 2)e^{e^{kx}} + a²(e^{2kx} + 3e^{kx} + 1)`,
/// divided by `e^{2e^{kx}}`.
pub fn second_exp_polynomial(k: f64, a: f64, x: f64) -> f64 {
    let m = (k * x).exp();
    let d = (-m).exp();
    1.0 + a * (m * m - 3.0 * m - 2.0) * d + a * a * (m * m + 3.0 * m + 1.0) * d * d
}

/// `kλ(λx)^{k−1} / (1 − (1−a) e^{−(xλ)^k})` as a function of the scale λ,
/// the hazard of a tilted Weibull with tilt `a`. Claimed convex for k ≥ 1.
pub fn hazard_in_scale(k: f64, a: f64, x: f64, lambda: f64) -> f64 {
    let t = (x * lambda).powf(k);
    k * lambda * (lambda * x).powf(k - 1.0) / (1.0 - (1.0 - a) * (-t).exp())
}

/// Smallest scaled slack of a monotonicity claim over `vals`; negative
/// means violated.
pub fn monotone_slack(vals: &[f64], increasing: bool) -> f64 {
    vals.windows(2)
        .map(|w| {
            let d = if increasing { w[1] - w[0] } else { w[0] - w[1] };
            d / w[0].abs().max(w[1].abs()).max(1.0)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Smallest scaled second difference on an evenly spaced grid.
pub fn convexity_slack(vals: &[f64]) -> f64 {
    vals.windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]) / w[1].abs().max(1.0))
        .fold(f64::INFINITY, f64::min)
}
