//! Majorization preorders on real vectors.
//!
//! Entries are sorted internally. With the ascending sort (the default) the
//! relations are the usual ones: `c ⪯^m d` compares bottom partial sums,
//! `c ⪯_w d` top sums and `c ⪯^w d` bottom sums. The descending convention
//! applies the same partial-sum formulas to the descending sort.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::verdict::{ConditionVerdict, Status, Worst};

/// Absolute tolerance on partial-sum comparisons.
pub const PARTIAL_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Contract("empty vector".into()));
        }
        if let Some(&bad) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("vector entry {bad}")));
        }
        Ok(RealVector(entries))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn sorted(&self, conv: Convention) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(|a, b| a.total_cmp(b));
        if conv == Convention::Descending {
            v.reverse();
        }
        v
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        RealVector::new(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `c ⪯^m d`
    Majorization,
    /// `c ⪯_w d`
    WeakSub,
    /// `c ⪯^w d`
    WeakSuper,
}

fn same_len(d: &RealVector, c: &RealVector) -> Result<()> {
    if d.len() == c.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            left: d.len(),
            right: c.len(),
        })
    }
}

fn prefix_sums(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

fn suffix_sums(v: &[f64]) -> Vec<f64> {
    let mut out = prefix_sums(&v.iter().rev().cloned().collect::<Vec<_>>());
    out.reverse();
    out
}

/// Whether `c` relates to `d` under `rel` with the given sort convention.
pub fn relates(rel: Relation, conv: Convention, d: &RealVector, c: &RealVector) -> Result<bool> {
    same_len(d, c)?;
    let (cs, ds) = (c.sorted(conv), d.sorted(conv));
    let n = cs.len();
    Ok(match rel {
        Relation::Majorization => {
            let (pc, pd) = (prefix_sums(&cs), prefix_sums(&ds));
            let total = pd[n - 1];
            (pc[n - 1] - total).abs() <= 1e-9 * (1.0 + total.abs())
                && (0..n - 1).all(|l| pc[l] >= pd[l] - PARTIAL_SUM_TOL)
        }
        Relation::WeakSub => {
            let (sc, sd) = (suffix_sums(&cs), suffix_sums(&ds));
            (0..n).all(|l| sc[l] <= sd[l] + PARTIAL_SUM_TOL)
        }
        Relation::WeakSuper => {
            let (pc, pd) = (prefix_sums(&cs), prefix_sums(&ds));
            (0..n).all(|l| pc[l] >= pd[l] - PARTIAL_SUM_TOL)
        }
    })
}

/// The relation as a graded verdict. The margin is the smallest partial-sum
/// slack (and, for majorization, minus the gap between totals); the witness
/// is the 1-based partial-sum length where it occurs.
pub fn relation_verdict(
    rel: Relation,
    conv: Convention,
    d: &RealVector,
    c: &RealVector,
) -> Result<ConditionVerdict> {
    let holds = relates(rel, conv, d, c)?;
    let (cs, ds) = (c.sorted(conv), d.sorted(conv));
    let n = cs.len();
    let mut w = Worst::new();
    match rel {
        Relation::Majorization | Relation::WeakSuper => {
            let (pc, pd) = (prefix_sums(&cs), prefix_sums(&ds));
            let last = if rel == Relation::Majorization { n - 1 } else { n };
            for l in 0..last {
                w.push(pc[l] - pd[l], &[(l + 1) as f64]);
            }
            if rel == Relation::Majorization {
                w.push(-(pc[n - 1] - pd[n - 1]).abs(), &[n as f64]);
            }
        }
        Relation::WeakSub => {
            let (sc, sd) = (suffix_sums(&cs), suffix_sums(&ds));
            for l in 0..n {
                w.push(sd[l] - sc[l], &[(n - l) as f64]);
            }
        }
    }
    let mut v = w.finish(f64::INFINITY);
    v.margin += 0.0;
    v.status = if holds { Status::Holds } else { Status::FailsAt };
    Ok(v)
}

/// `c ⪯^m d`.
pub fn majorizes(d: &RealVector, c: &RealVector) -> Result<bool> {
    relates(Relation::Majorization, Convention::Ascending, d, c)
}

/// `c ⪯_w d`.
pub fn weak_submajorizes(d: &RealVector, c: &RealVector) -> Result<bool> {
    relates(Relation::WeakSub, Convention::Ascending, d, c)
}

/// `c ⪯^w d`.
pub fn weak_supermajorizes(d: &RealVector, c: &RealVector) -> Result<bool> {
    relates(Relation::WeakSuper, Convention::Ascending, d, c)
}

pub fn log_vector(v: &RealVector) -> Result<RealVector> {
    if let Some(&bad) = v.entries().iter().find(|&&x| x <= 0.0) {
        return Err(Error::Domain {
            name: "entry",
            value: bad,
            domain: "(0, ∞)",
        });
    }
    RealVector::new(v.entries().iter().map(|x| x.ln()).collect())
}

/// Verdicts of the symmetric-gradient test in both directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurScan {
    pub convex: ConditionVerdict,
    pub concave: ConditionVerdict,
}

/// Samples points of the box `[lo, hi]` and tests
/// `(xᵢ − xⱼ)(∂ᵢf − ∂ⱼf) ≥ 0` (convex) and `≤ 0` (concave) with central
/// differences. The slack is normalized by `|xᵢ − xⱼ|(|∂ᵢf| + |∂ⱼf|)`, so
/// `tol` is relative.
pub fn schur_convexity_scan<F>(
    f: F,
    lo: &[f64],
    hi: &[f64],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<SchurScan>
where
    F: Fn(&[f64]) -> f64,
{
    if lo.len() != hi.len() {
        return Err(Error::LengthMismatch {
            left: lo.len(),
            right: hi.len(),
        });
    }
    let n = lo.len();
    if n < 2 {
        return Err(Error::Contract("need at least two coordinates".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut convex = Worst::new();
    let mut concave = Worst::new();
    let mut x = vec![0.0; n];
    for _ in 0..samples {
        for i in 0..n {
            x[i] = rng.gen_range(lo[i]..hi[i]);
        }
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let gi = partial(&f, &mut x, i, 1e-5 * (hi[i] - lo[i]))?;
        let gj = partial(&f, &mut x, j, 1e-5 * (hi[j] - lo[j]))?;
        let dx = x[i] - x[j];
        let norm = dx.abs() * (gi.abs() + gj.abs());
        if norm == 0.0 {
            continue;
        }
        let s = dx * (gi - gj) / norm;
        convex.push(s, &x);
        concave.push(-s, &x);
    }
    Ok(SchurScan {
        convex: convex.finish(tol),
        concave: concave.finish(tol),
    })
}

fn partial<F: Fn(&[f64]) -> f64>(f: &F, x: &mut [f64], i: usize, h: f64) -> Result<f64> {
    let x0 = x[i];
    x[i] = x0 + h;
    let up = f(x);
    x[i] = x0 - h;
    let dn = f(x);
    x[i] = x0;
    if !(up.is_finite() && dn.is_finite()) {
        return Err(Error::NonFinite(format!("f near {:?}", x)));
    }
    Ok((up - dn) / (2.0 * h))
}
