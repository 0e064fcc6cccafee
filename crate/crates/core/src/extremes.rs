//! Lifetimes of series (minimum) and parallel (maximum) systems whose
//! components are coupled by an Archimedean copula.

use serde::{Deserialize, Serialize};

use crate::archimedean::{ArchimedeanGenerator, Generator};
use crate::error::{Error, Result};
use crate::ew::EwParams;
use crate::lifetime::{Lifetime, Prob};

/// Which side of the joint law the copula is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coupling {
    /// Joint CDF = C(F₁, …, Fₙ). Used for maxima.
    #[serde(rename = "copula")]
    Copula,
    /// Joint survival = C(F̄₁, …, F̄ₙ). Used for minima.
    #[serde(rename = "survival")]
    SurvivalCopula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Min,
    Max,
}

impl Statistic {
    /// The coupling under which this statistic has a closed form.
    pub fn coupling(self) -> Coupling {
        match self {
            Statistic::Min => Coupling::SurvivalCopula,
            Statistic::Max => Coupling::Copula,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct CoupledSystem {
    marginals: Vec<EwParams>,
    generator: Generator,
    coupling: Coupling,
}

#[derive(Deserialize)]
struct RawSystem {
    marginals: Vec<EwParams>,
    generator: Generator,
    coupling: Coupling,
}

impl TryFrom<RawSystem> for CoupledSystem {
    type Error = Error;
    fn try_from(r: RawSystem) -> Result<Self> {
        CoupledSystem::new(r.marginals, r.generator, r.coupling)
    }
}

impl CoupledSystem {
    pub fn new(marginals: Vec<EwParams>, generator: Generator, coupling: Coupling) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::Contract("a system needs at least one component".into()));
        }
        Ok(CoupledSystem {
            marginals,
            generator,
            coupling,
        })
    }

    pub fn n(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[EwParams] {
        &self.marginals
    }

    pub fn generator(&self) -> Generator {
        self.generator
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn with_generator(&self, generator: Generator) -> Self {
        CoupledSystem {
            generator,
            ..self.clone()
        }
    }

    pub fn with_coupling(&self, coupling: Coupling) -> Self {
        CoupledSystem {
            coupling,
            ..self.clone()
        }
    }

    /// The system made of the first `m` components.
    pub fn prefix(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.n() {
            return Err(Error::Contract(format!(
                "prefix size {m} outside 1..={}",
                self.n()
            )));
        }
        Ok(CoupledSystem {
            marginals: self.marginals[..m].to_vec(),
            ..self.clone()
        })
    }

    fn require(&self, which: Statistic) -> Result<()> {
        if self.coupling == which.coupling() {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "{which:?} needs the {:?} coupling, system has {:?}",
                which.coupling(),
                self.coupling
            )))
        }
    }

    fn max_prob(&self, x: f64) -> Prob {
        let u: Vec<Prob> = self.marginals.iter().map(|m| m.prob(x)).collect();
        self.generator.couple(&u)
    }

    fn min_prob(&self, x: f64) -> Prob {
        let s: Vec<Prob> = self.marginals.iter().map(|m| m.prob(x).flip()).collect();
        self.generator.couple(&s).flip()
    }

    fn extreme_density(&self, which: Statistic, x: f64) -> f64 {
        let w: Vec<f64> = self.marginals.iter().map(|m| m.pdf(x)).collect();
        let u: Vec<Prob> = match which {
            Statistic::Max => self.marginals.iter().map(|m| m.prob(x)).collect(),
            Statistic::Min => self.marginals.iter().map(|m| m.prob(x).flip()).collect(),
        };
        self.generator.couple_density(&u, &w)
    }

    pub fn max_cdf(&self, x: f64) -> Result<f64> {
        self.require(Statistic::Max)?;
        Ok(self.max_prob(nonneg(x)?).p)
    }

    pub fn min_sf(&self, x: f64) -> Result<f64> {
        self.require(Statistic::Min)?;
        Ok(self.min_prob(nonneg(x)?).q)
    }

    pub fn extreme_pdf(&self, which: Statistic, x: f64) -> Result<f64> {
        self.require(which)?;
        Ok(self.extreme_density(which, nonneg(x)?))
    }

    pub fn extreme_quantile(&self, which: Statistic, u: f64) -> Result<f64> {
        self.extreme(which)?.quantile(u)
    }

    /// The lifetime of the minimum or maximum as a [`Lifetime`].
    pub fn extreme(&self, which: Statistic) -> Result<Extreme> {
        self.require(which)?;
        Ok(Extreme {
            system: self.clone(),
            which,
        })
    }

    pub fn mixture_max_cdf(&self, counts: &CountDistribution, x: f64) -> Result<f64> {
        Ok(self.mixture(Statistic::Max, counts)?.prob(nonneg(x)?).p)
    }

    pub fn mixture_min_sf(&self, counts: &CountDistribution, x: f64) -> Result<f64> {
        Ok(self.mixture(Statistic::Min, counts)?.prob(nonneg(x)?).q)
    }

    /// The extreme of a random number of components. A count value `m` uses
    /// the first `m` components.
    pub fn mixture(&self, which: Statistic, counts: &CountDistribution) -> Result<Mixture> {
        self.require(which)?;
        if counts.max_support() > self.n() {
            return Err(Error::Contract(format!(
                "count support reaches {} but the system has {} components",
                counts.max_support(),
                self.n()
            )));
        }
        let parts = counts
            .pmf()
            .iter()
            .map(|&(m, p)| Ok((p, self.prefix(m)?.extreme(which)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Mixture { parts })
    }
}

fn nonneg(x: f64) -> Result<f64> {
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

/// Sum of the component hazards, the hazard of a series system of
/// independent components.
pub fn min_hazard_independent(params: &[EwParams], x: f64) -> Result<f64> {
    if params.is_empty() {
        return Err(Error::Contract("empty component list".into()));
    }
    let x = nonneg(x)?;
    Ok(params.iter().map(|p| p.hazard(x)).sum())
}

/// Minimum or maximum of a coupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct Extreme {
    system: CoupledSystem,
    which: Statistic,
}

impl Extreme {
    pub fn system(&self) -> &CoupledSystem {
        &self.system
    }

    pub fn statistic(&self) -> Statistic {
        self.which
    }
}

impl Lifetime for Extreme {
    fn prob(&self, x: f64) -> Prob {
        match self.which {
            Statistic::Max => self.system.max_prob(x),
            Statistic::Min => self.system.min_prob(x),
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        self.system.extreme_density(self.which, x)
    }

    fn hazard(&self, x: f64) -> f64 {
        if self.which == Statistic::Min
            && self.system.generator.family() == crate::archimedean::Family::Independence
        {
            return self.system.marginals.iter().map(|m| m.hazard(x)).sum();
        }
        self.pdf(x) / self.sf(x)
    }

    /// Fréchet bounds: the maximum sits above every component quantile and
    /// the minimum below.
    fn quantile_hint(&self, u: f64) -> (f64, f64) {
        let qs = self
            .system
            .marginals
            .iter()
            .map(|m| m.quantile(u).unwrap_or(1.0));
        match self.which {
            Statistic::Max => {
                let lo = qs.fold(0.0, f64::max);
                (lo, lo * 2.0 + f64::MIN_POSITIVE)
            }
            Statistic::Min => {
                let hi = qs.fold(f64::INFINITY, f64::min);
                (hi * 0.5, hi + f64::MIN_POSITIVE)
            }
        }
    }
}

/// Distribution of a positive integer sample size on a finite support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, f64)>", into = "Vec<(usize, f64)>")]
pub struct CountDistribution {
    pmf: Vec<(usize, f64)>,
}

impl TryFrom<Vec<(usize, f64)>> for CountDistribution {
    type Error = Error;
    fn try_from(v: Vec<(usize, f64)>) -> Result<Self> {
        CountDistribution::new(v)
    }
}

impl From<CountDistribution> for Vec<(usize, f64)> {
    fn from(c: CountDistribution) -> Self {
        c.pmf
    }
}

impl CountDistribution {
    pub fn new(pmf: Vec<(usize, f64)>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::Contract("empty count distribution".into()));
        }
        for (i, &(m, p)) in pmf.iter().enumerate() {
            if m == 0 {
                return Err(Error::Contract("count values must be at least 1".into()));
            }
            if i > 0 && m <= pmf[i - 1].0 {
                return Err(Error::Contract(
                    "count values must be distinct and ascending".into(),
                ));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter {
                    name: "probability",
                    value: p,
                    reason: "must lie in [0, 1]",
                });
            }
        }
        let total: f64 = pmf.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "total probability",
                value: total,
                reason: "must equal 1 within 1e-12",
            });
        }
        Ok(CountDistribution { pmf })
    }

    pub fn degenerate(n: usize) -> Result<Self> {
        Self::new(vec![(n, 1.0)])
    }

    /// Uniform on `lo..=hi`.
    pub fn uniform(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(Error::Contract("empty range".into()));
        }
        let w = 1.0 / (hi - lo + 1) as f64;
        Self::new((lo..=hi).map(|m| (m, w)).collect())
    }

    pub fn pmf(&self) -> &[(usize, f64)] {
        &self.pmf
    }

    pub fn max_support(&self) -> usize {
        self.pmf.last().map(|e| e.0).unwrap_or(0)
    }

    /// `P(N > m)`.
    pub fn sf(&self, m: usize) -> f64 {
        self.pmf.iter().filter(|e| e.0 > m).map(|e| e.1).sum()
    }

    /// `self ≤_st other`, compared through the survival functions.
    pub fn st_below(&self, other: &CountDistribution) -> bool {
        let top = self.max_support().max(other.max_support());
        (0..=top).all(|m| self.sf(m) <= other.sf(m) + 1e-12)
    }
}

/// Finite mixture of extremes of prefix systems.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    parts: Vec<(f64, Extreme)>,
}

impl Lifetime for Mixture {
    fn prob(&self, x: f64) -> Prob {
        let mut p = 0.0;
        let mut q = 0.0;
        for (w, e) in &self.parts {
            let pr = e.prob(x);
            p += w * pr.p;
            q += w * pr.q;
        }
        Prob::new(p, q)
    }

    fn pdf(&self, x: f64) -> f64 {
        self.parts.iter().map(|(w, e)| w * e.pdf(x)).sum()
    }

    fn quantile_hint(&self, u: f64) -> (f64, f64) {
        self.parts.iter().fold((f64::INFINITY, 0.0), |(lo, hi), (_, e)| {
            let (a, b) = e.quantile_hint(u);
            (lo.min(a), hi.max(b))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ew(a: f64, l: f64, k: f64) -> EwParams {
        EwParams::new(a, l, k).unwrap()
    }

    fn sys(ms: Vec<EwParams>, g: Generator, c: Coupling) -> CoupledSystem {
        CoupledSystem::new(ms, g, c).unwrap()
    }

    #[test]
    fn contracts() {
        let m = vec![ew(0.5, 1.0, 1.0)];
        assert!(CoupledSystem::new(vec![], Generator::independence(), Coupling::Copula).is_err());
        let s = sys(m, Generator::independence(), Coupling::Copula);
        assert!(s.min_sf(1.0).is_err());
        assert!(s.max_cdf(-1.0).is_err());
        assert!(s.extreme_quantile(Statistic::Max, 1.0).is_err());
        let s = s.with_coupling(Coupling::SurvivalCopula);
        assert!(s.max_cdf(1.0).is_err());
        assert!(min_hazard_independent(&[], 1.0).is_err());
    }

    #[test]
    fn single_component_is_the_marginal() {
        let m = ew(0.6, 1.3, 0.8);
        for g in [
            Generator::independence(),
            Generator::gumbel_variant(2.5).unwrap(),
            Generator::exp_reciprocal(1.7).unwrap(),
        ] {
            let s = sys(vec![m], g, Coupling::Copula);
            let t = s.with_coupling(Coupling::SurvivalCopula);
            for &x in &[0.05, 0.4, 1.0, 3.0] {
                assert!((s.max_cdf(x).unwrap() - m.cdf(x)).abs() < 1e-12);
                assert!((t.min_sf(x).unwrap() - m.sf(x)).abs() < 1e-12);
            }
            let q = s.extreme_quantile(Statistic::Max, 0.3).unwrap();
            assert!((q - m.try_quantile(0.3).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn independent_identical_pair() {
        let m = ew(0.7, 2.0, 1.4);
        let s = sys(vec![m, m], Generator::independence(), Coupling::Copula);
        for &x in &[0.1, 0.5, 1.2] {
            let f = m.cdf(x);
            assert!((s.max_cdf(x).unwrap() - f * f).abs() < 1e-12);
            let d = s.extreme_pdf(Statistic::Max, x).unwrap();
            assert!((d - 2.0 * f * m.pdf(x)).abs() < 1e-12);
        }
        let u = 0.42;
        let q = s.extreme_quantile(Statistic::Max, u).unwrap();
        assert!((q - m.try_quantile(u.sqrt()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn minimum_of_exponentials() {
        let ms = vec![ew(1.0, 0.5, 1.0), ew(1.0, 1.5, 1.0), ew(1.0, 2.0, 1.0)];
        let s = sys(ms.clone(), Generator::independence(), Coupling::SurvivalCopula);
        for &x in &[0.01, 0.3, 1.0, 2.5] {
            assert!((s.min_sf(x).unwrap() - (-4.0 * x).exp()).abs() < 1e-14);
            assert!((min_hazard_independent(&ms, x).unwrap() - 4.0).abs() < 1e-14);
        }
    }

    #[test]
    fn frechet_upper_bound() {
        let ms = vec![ew(0.6, 0.46, 0.9), ew(0.6, 0.5, 0.9), ew(0.3, 2.0, 2.0)];
        for g in [
            Generator::gumbel_variant(8.9).unwrap(),
            Generator::exp_reciprocal(2.2).unwrap(),
        ] {
            let s = sys(ms.clone(), g, Coupling::Copula);
            let t = s.with_coupling(Coupling::SurvivalCopula);
            for i in 1..200 {
                let x = i as f64 * 0.05;
                let fmin = ms.iter().map(|m| m.cdf(x)).fold(1.0, f64::min);
                let smin = ms.iter().map(|m| m.sf(x)).fold(1.0, f64::min);
                assert!(s.max_cdf(x).unwrap() <= fmin + 1e-15);
                assert!(t.min_sf(x).unwrap() <= smin + 1e-15);
            }
        }
    }

    #[test]
    fn counts() {
        assert!(CountDistribution::new(vec![(0, 1.0)]).is_err());
        assert!(CountDistribution::new(vec![(2, 0.5), (1, 0.5)]).is_err());
        assert!(CountDistribution::new(vec![(1, 0.5), (2, 0.4)]).is_err());
        let a = CountDistribution::uniform(1, 2).unwrap();
        let b = CountDistribution::degenerate(2).unwrap();
        assert!(a.st_below(&b));
        assert!(!b.st_below(&a));
        assert_eq!(a.sf(1), 0.5);
    }

    #[test]
    fn mixtures() {
        let m = ew(1.0, 1.3, 1.0);
        let s = sys(vec![m, m], Generator::independence(), Coupling::Copula);
        let t = s.with_coupling(Coupling::SurvivalCopula);
        let n = CountDistribution::uniform(1, 2).unwrap();
        let d = CountDistribution::degenerate(2).unwrap();
        for &x in &[0.2, 0.9, 2.0] {
            let f = m.cdf(x);
            assert!((s.mixture_max_cdf(&n, x).unwrap() - (f + f * f) / 2.0).abs() < 1e-15);
            let e = (-1.3 * x).exp();
            assert!((t.mixture_min_sf(&n, x).unwrap() - (e + e * e) / 2.0).abs() < 1e-15);
            assert_eq!(s.mixture_max_cdf(&d, x).unwrap(), s.max_cdf(x).unwrap());
        }
        let big = CountDistribution::degenerate(3).unwrap();
        assert!(s.mixture_max_cdf(&big, 1.0).is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let text = r#"{"marginals":[{"alpha":0.6,"lambda":0.46,"k":0.9}],
            "generator":{"family":"gumbel_variant","theta":8.9},"coupling":"copula"}"#;
        let s: CoupledSystem = serde_json::from_str(text).unwrap();
        assert_eq!(s.generator(), Generator::gumbel_variant(8.9).unwrap());
        let back: CoupledSystem = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"marginals":[{"alpha":-1,"lambda":1,"k":1}],
            "generator":{"family":"independence"},"coupling":"survival"}"#;
        assert!(serde_json::from_str::<CoupledSystem>(bad).is_err());
    }
}
