//! Common interface for univariate lifetime distributions on `[0, ∞)`.

use crate::error::{Error, Result};

/// A probability together with its complement, each carried at full
/// relative precision so tails near 0 and near 1 stay accurate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prob {
    pub p: f64,
    pub q: f64,
}

impl Prob {
    pub const ZERO: Prob = Prob { p: 0.0, q: 1.0 };
    pub const ONE: Prob = Prob { p: 1.0, q: 0.0 };

    pub fn new(p: f64, q: f64) -> Self {
        Prob { p, q }
    }

    pub fn from_p(p: f64) -> Self {
        Prob { p, q: 1.0 - p }
    }

    pub fn flip(self) -> Self {
        Prob { p: self.q, q: self.p }
    }
}

/// A continuous lifetime distribution. `prob(x)` returns `(F(x), 1 − F(x))`.
///
/// Arguments below zero are treated as lying left of the support.
pub trait Lifetime: Sync {
    fn prob(&self, x: f64) -> Prob;

    fn pdf(&self, x: f64) -> f64;

    fn cdf(&self, x: f64) -> f64 {
        self.prob(x).p
    }

    fn sf(&self, x: f64) -> f64 {
        self.prob(x).q
    }

    fn hazard(&self, x: f64) -> f64 {
        self.pdf(x) / self.sf(x)
    }

    fn rev_hazard(&self, x: f64) -> f64 {
        self.pdf(x) / self.cdf(x)
    }

    /// A starting interval for the quantile search at level `u`. It need not
    /// bracket the root; the solver widens it.
    fn quantile_hint(&self, _u: f64) -> (f64, f64) {
        (0.5, 2.0)
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        solve_quantile(self, u)
    }
}

impl<T: Lifetime + ?Sized> Lifetime for &T {
    fn prob(&self, x: f64) -> Prob {
        (**self).prob(x)
    }
    fn pdf(&self, x: f64) -> f64 {
        (**self).pdf(x)
    }
    fn hazard(&self, x: f64) -> f64 {
        (**self).hazard(x)
    }
    fn rev_hazard(&self, x: f64) -> f64 {
        (**self).rev_hazard(x)
    }
    fn quantile_hint(&self, u: f64) -> (f64, f64) {
        (**self).quantile_hint(u)
    }
    fn quantile(&self, u: f64) -> Result<f64> {
        (**self).quantile(u)
    }
}

pub(crate) fn check_unit_open(name: &'static str, u: f64) -> Result<()> {
    if u.is_finite() && u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: u,
            domain: "(0, 1)",
        })
    }
}

const MAX_ITER: usize = 400;

/// Safeguarded Newton iteration on a monotone CDF.
///
/// The residual is taken on the lower tail for `u ≤ 1/2` and on the upper
/// tail otherwise, which keeps it accurate at both ends.
pub fn solve_quantile<L: Lifetime + ?Sized>(d: &L, u: f64) -> Result<f64> {
    check_unit_open("u", u)?;
    let upper = u > 0.5;
    let v = 1.0 - u;
    let residual = |x: f64| {
        let pr = d.prob(x);
        if upper {
            v - pr.q
        } else {
            pr.p - u
        }
    };

    let (mut lo, mut hi) = d.quantile_hint(u);
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        lo = 0.0;
        hi = 1.0;
    }
    let mut r_hi = residual(hi);
    let mut guard = 0;
    while r_hi < 0.0 {
        lo = hi;
        hi *= 2.0;
        r_hi = residual(hi);
        guard += 1;
        if guard > 2100 || !hi.is_finite() {
            return Err(Error::NoConvergence {
                iterations: guard,
                last: hi,
            });
        }
    }
    let mut r_lo = residual(lo);
    while r_lo > 0.0 {
        hi = lo;
        r_hi = r_lo;
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(0.0);
        }
        r_lo = residual(lo);
    }
    if r_hi == 0.0 {
        return Ok(hi);
    }
    if r_lo == 0.0 {
        return Ok(lo);
    }

    let split = |lo: f64, hi: f64| {
        if lo > 0.0 && hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        }
    };

    let mut x = split(lo, hi);
    for _ in 0..MAX_ITER {
        let r = residual(x);
        if r == 0.0 {
            return Ok(x);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = d.pdf(x);
        let newton = x - r / slope;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            split(lo, hi)
        };
        if (next - x).abs() <= 1e-15 * x.abs() || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    let r = residual(x);
    if r.abs() <= 1e-11 {
        Ok(x)
    } else {
        Err(Error::NoConvergence {
            iterations: MAX_ITER,
            last: x,
        })
    }
}
