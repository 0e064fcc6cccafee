//! The extended Weibull family EW(α, λ, k).
//!
//! `F(x) = (1 − e^{−(λx)^k}) / (1 − ᾱ e^{−(λx)^k})` with `ᾱ = 1 − α`.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::lifetime::{check_unit_open, Lifetime, Prob};

/// Beyond this value of `(λx)^k` the survival function is reported as exactly 0.
pub const TAIL_CUTOFF: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct EwParams {
    alpha: f64,
    lambda: f64,
    k: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alpha: f64,
    lambda: f64,
    k: f64,
}

impl TryFrom<RawParams> for EwParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        EwParams::new(r.alpha, r.lambda, r.k)
    }
}

impl From<EwParams> for RawParams {
    fn from(p: EwParams) -> Self {
        RawParams {
            alpha: p.alpha,
            lambda: p.lambda,
            k: p.k,
        }
    }
}

fn nonneg_x(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        Err(Error::Domain {
            name: "x",
            value: x,
            domain: "[0, ∞)",
        })
    } else {
        Ok(x)
    }
}

impl EwParams {
    pub fn new(alpha: f64, lambda: f64, k: f64) -> Result<Self> {
        Ok(EwParams {
            alpha: positive("alpha", alpha)?,
            lambda: positive("lambda", lambda)?,
            k: positive("k", k)?,
        })
    }

    /// Exponential distribution with the given rate.
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(1.0, rate, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.lambda, self.k)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.alpha, lambda, self.k)
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(self.alpha, self.lambda, k)
    }

    fn alpha_bar(&self) -> f64 {
        1.0 - self.alpha
    }

    /// `(λx)^k`, computed in log space.
    fn z(&self, x: f64) -> f64 {
        let t = x * self.lambda;
        if t <= 0.0 {
            0.0
        } else {
            (self.k * t.ln()).exp()
        }
    }

    /// `(λx)^{k−1}` with the limits at 0 made explicit.
    fn pow_km1(&self, x: f64) -> f64 {
        let t = x * self.lambda;
        if t > 0.0 {
            ((self.k - 1.0) * t.ln()).exp()
        } else if self.k < 1.0 {
            f64::INFINITY
        } else if self.k == 1.0 {
            1.0
        } else {
            0.0
        }
    }

    pub fn try_cdf(&self, x: f64) -> Result<f64> {
        Ok(Lifetime::cdf(self, nonneg_x(x)?))
    }

    pub fn try_sf(&self, x: f64) -> Result<f64> {
        Ok(Lifetime::sf(self, nonneg_x(x)?))
    }

    /// Density; +∞ at the origin when k < 1.
    pub fn try_pdf(&self, x: f64) -> Result<f64> {
        Ok(Lifetime::pdf(self, nonneg_x(x)?))
    }

    pub fn try_hazard(&self, x: f64) -> Result<f64> {
        Ok(Lifetime::hazard(self, nonneg_x(x)?))
    }

    pub fn try_rev_hazard(&self, x: f64) -> Result<f64> {
        Ok(Lifetime::rev_hazard(self, nonneg_x(x)?))
    }

    /// Closed-form inverse; `u = 0` maps to 0.
    pub fn try_quantile(&self, u: f64) -> Result<f64> {
        if u == 0.0 {
            return Ok(0.0);
        }
        check_unit_open("u", u)?;
        Ok(self.quantile_closed(u))
    }

    /// Closed-form quantile at level `1 − v`, accurate for tiny `v`.
    pub fn upper_quantile(&self, v: f64) -> Result<f64> {
        check_unit_open("v", v)?;
        let z = (self.alpha + self.alpha_bar() * v).ln() - v.ln();
        Ok(self.scale_back(z))
    }

    fn scale_back(&self, z: f64) -> f64 {
        if z <= 0.0 {
            0.0
        } else {
            (z.ln() / self.k).exp() / self.lambda
        }
    }

    fn quantile_closed(&self, u: f64) -> f64 {
        if u > 0.5 {
            let z = (self.alpha + self.alpha_bar() * (1.0 - u)).ln() - (1.0 - u).ln();
            self.scale_back(z)
        } else {
            // (1 − ᾱu)/(1 − u) = 1 + αu/(1 − u)
            let z = (self.alpha * u / (1.0 - u)).ln_1p();
            self.scale_back(z)
        }
    }
}

impl Lifetime for EwParams {
    fn prob(&self, x: f64) -> Prob {
        if x <= 0.0 {
            return Prob::ZERO;
        }
        let z = self.z(x);
        if z > TAIL_CUTOFF {
            return Prob::ONE;
        }
        let e = (-z).exp();
        let den = 1.0 - self.alpha_bar() * e;
        Prob::new(-(-z).exp_m1() / den, self.alpha * e / den)
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let z = self.z(x);
        if z > TAIL_CUTOFF {
            return 0.0;
        }
        let e = (-z).exp();
        let den = 1.0 - self.alpha_bar() * e;
        let base = self.k * self.lambda * self.pow_km1(x);
        if base.is_infinite() {
            return f64::INFINITY;
        }
        self.alpha * base * e / (den * den)
    }

    fn hazard(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let z = self.z(x);
        let e = (-z).exp();
        let base = self.k * self.lambda * self.pow_km1(x);
        if base.is_infinite() {
            return f64::INFINITY;
        }
        base / (1.0 - self.alpha_bar() * e)
    }

    fn rev_hazard(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::INFINITY;
        }
        let z = self.z(x);
        let e = (-z).exp();
        let den = 1.0 - self.alpha_bar() * e;
        let base = self.k * self.lambda * self.pow_km1(x);
        self.alpha * base * e / (den * -(-z).exp_m1())
    }

    fn quantile_hint(&self, u: f64) -> (f64, f64) {
        let q = self.quantile_closed(u);
        (q * 0.5, q * 2.0 + f64::MIN_POSITIVE)
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        self.try_quantile(u)
    }
}
