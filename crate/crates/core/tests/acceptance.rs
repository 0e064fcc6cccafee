//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Details of each failure are printed below its line.

mod common;

use std::time::Instant;

use common::*;
use eoc_core::archimedean::ArchimedeanGenerator;
use eoc_core::extremes::min_hazard_independent;
use eoc_core::orders::check;
use eoc_core::scenarios::{builtin_scenarios, random_n_scenarios, run_all, run_random_n_scenario};
use eoc_core::theorems::{fuzz, sample_instance, EvalConfig, TheoremId};
use eoc_core::{
    CoupledSystem, CountDistribution, EwParams, Family, Generator, GridSpec, Lifetime, Order, Statistic,
    Status,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

/// Violating instances printed per theorem; the rest go to a file.
const SHOWN_VIOLATIONS: usize = 2;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

type Criterion = (&'static str, fn() -> Outcome);

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>, details: Vec<String>) -> Self {
        Outcome {
            pass,
            summary: summary.into(),
            details,
        }
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("scenario fidelity", scenario_fidelity),
        ("independence oracle", independence_oracle),
        ("quantile round trip", quantile_round_trip),
        ("series hazard identity", series_hazard_identity),
        ("lemma properties", lemma_properties),
        ("order hierarchy", order_hierarchy),
        ("theorem fuzzing", theorem_fuzzing),
        ("random sample sizes", random_sample_sizes),
        ("derivatives", derivatives),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {}: {tag} {name}: {} ({:.1} s)",
            i + 1,
            out.summary,
            start.elapsed().as_secs_f64()
        );
        for d in &out.details {
            println!("    {d}");
        }
        if !out.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn scenario_fidelity() -> Outcome {
    let start = Instant::now();
    let report = match run_all(&builtin_scenarios(), &EvalConfig::default(), None) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, format!("run failed: {e}"), vec![]),
    };
    let secs = start.elapsed().as_secs_f64();
    let mut details = Vec::new();
    for b in &report.scenarios {
        if !(b.matches_expected && b.consistent) {
            details.push(format!(
                "{}: expected {:?}, got {:?} (consistent {}), witness x {:?}, gap {:?}",
                b.name, b.expected, b.verdict.status, b.consistent, b.verdict.witness_x, b.verdict.gap
            ));
        }
    }
    let ok = report.scenarios.iter().filter(|b| b.matches_expected && b.consistent).count();
    Outcome::new(
        details.is_empty() && secs < 10.0,
        format!("{ok}/{} scenarios as expected in {secs:.2} s", report.scenarios.len()),
        details,
    )
}

fn scenario_systems() -> Vec<(String, CoupledSystem)> {
    builtin_scenarios()
        .into_iter()
        .flat_map(|s| [(format!("{}.x", s.name), s.x), (format!("{}.y", s.name), s.y)])
        .collect()
}

/// Log grid spanning the bulk of every marginal.
fn marginal_span(m: &[EwParams], n: usize) -> Vec<f64> {
    let lo = m.iter().map(|p| p.quantile(1e-6).unwrap()).fold(f64::INFINITY, f64::min);
    let hi = m.iter().map(|p| p.quantile(1.0 - 1e-6).unwrap()).fold(0.0, f64::max);
    log_grid(lo, hi, n)
}

fn independence_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    let systems = scenario_systems();
    for (name, s) in &systems {
        let ind = s.with_generator(Generator::independence());
        let max = ind.with_coupling(Statistic::Max.coupling());
        let min = ind.with_coupling(Statistic::Min.coupling());
        for x in marginal_span(s.marginals(), 2048) {
            let prod_cdf: f64 = s.marginals().iter().map(|p| p.cdf(x)).product();
            let prod_sf: f64 = s.marginals().iter().map(|p| p.sf(x)).product();
            let e_max = (max.max_cdf(x).unwrap() - prod_cdf).abs();
            let e_min = (min.min_sf(x).unwrap() - prod_sf).abs();
            let e = e_max.max(e_min);
            if e > 1e-12 && details.len() < 10 {
                details.push(format!("{name} at x = {x}: max error {e_max:e}, min error {e_min:e}"));
            }
            worst = worst.max(e);
        }
    }
    Outcome::new(
        worst <= 1e-12,
        format!("{} systems, worst error {worst:e}", systems.len()),
        details,
    )
}

fn unit_grid(n: usize) -> Vec<f64> {
    linear_grid(1e-4, 1.0 - 1e-4, n)
}

fn quantile_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_marginal: f64 = 0.0;
    let mut worst_extreme: f64 = 0.0;
    let mut details = Vec::new();
    for _ in 0..100 {
        let p = random_ew(&mut rng);
        let which = if rng.gen_bool(0.5) { Statistic::Max } else { Statistic::Min };
        let sys = random_system(&mut rng, which);
        let ext = sys.extreme(which).unwrap();
        for u in unit_grid(101) {
            let e = (p.cdf(p.quantile(u).unwrap()) - u).abs();
            if e > 1e-12 && details.len() < 10 {
                details.push(format!("marginal {p:?} at u = {u}: error {e:e}"));
            }
            worst_marginal = worst_marginal.max(e);
            let e = match ext.quantile(u) {
                Ok(x) => (ext.cdf(x) - u).abs(),
                Err(_) => f64::INFINITY,
            };
            if e > 1e-10 && details.len() < 10 {
                details.push(format!("{which:?} of {sys:?} at u = {u}: error {e:e}"));
            }
            worst_extreme = worst_extreme.max(e);
        }
    }
    Outcome::new(
        worst_marginal <= 1e-12 && worst_extreme <= 1e-10,
        format!("worst error marginal {worst_marginal:e}, extreme {worst_extreme:e}"),
        details,
    )
}

fn series_hazard_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for _ in 0..50 {
        let n = rng.gen_range(1..=5);
        let m: Vec<EwParams> = (0..n).map(|_| random_ew(&mut rng)).collect();
        let sys =
            CoupledSystem::new(m.clone(), Generator::independence(), Statistic::Min.coupling()).unwrap();
        let ext = sys.extreme(Statistic::Min).unwrap();
        for _ in 0..50 {
            let x = ext.quantile(rng.gen_range(1e-3..0.999)).unwrap();
            let direct = min_hazard_independent(&m, x).unwrap();
            let ratio = sys.extreme_pdf(Statistic::Min, x).unwrap() / sys.min_sf(x).unwrap();
            let e = (direct - ratio).abs() / direct.abs().max(f64::MIN_POSITIVE);
            if e > 1e-10 && details.len() < 10 {
                details.push(format!("{m:?} at x = {x}: relative error {e:e}"));
            }
            worst = worst.max(e);
        }
    }
    Outcome::new(worst <= 1e-10, format!("worst relative error {worst:e}"), details)
}

/// Runs `draws` parameter draws of one claim; each returns the smallest
/// slack over its grid.
fn lemma(
    name: &str,
    draws: usize,
    rng: &mut ChaCha8Rng,
    claim: impl Fn(&mut ChaCha8Rng) -> (String, f64),
    details: &mut Vec<String>,
) -> usize {
    let mut bad = 0;
    for _ in 0..draws {
        let (params, slack) = claim(rng);
        if slack < -1e-9 {
            bad += 1;
            if bad <= 3 {
                details.push(format!("{name}: {params} slack {slack:e}"));
            }
        }
    }
    if bad > 3 {
        details.push(format!("{name}: {bad} of {draws} draws violated"));
    }
    bad
}

fn lemma_properties() -> Outcome {
    const N: usize = 1024;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut details = Vec::new();
    let mut bad = 0;
    bad += lemma(
        "exp hazard ratio increasing",
        50,
        &mut rng,
        |r| {
            let (k, a, b) = (r.gen_range(0.1..4.0), r.gen_range(0.0..1.0), r.gen_range(0.1..4.0));
            let v: Vec<f64> =
                log_grid(1e-6, 3.0 / k, N).into_iter().map(|x| exp_hazard_ratio(k, a, b, x)).collect();
            (format!("k = {k}, a = {a}, b = {b}"), monotone_slack(&v, true))
        },
        &mut details,
    );
    bad += lemma(
        "power hazard ratio decreasing",
        50,
        &mut rng,
        |r| {
            let (k, a, b) = (r.gen_range(0.05..=1.0), r.gen_range(0.0..1.0), r.gen_range(0.1..4.0));
            let v: Vec<f64> =
                log_grid(1e-6, 50.0, N).into_iter().map(|x| power_hazard_ratio(k, a, b, x)).collect();
            (format!("k = {k}, a = {a}, b = {b}"), monotone_slack(&v, false))
        },
        &mut details,
    );
    bad += lemma(
        "first exponential polynomial nonnegative",
        50,
        &mut rng,
        |r| {
            let (k, a) = (r.gen_range(0.05..5.0), r.gen_range(0.0..1.0));
            let s = log_grid(1e-6, 50.0, N)
                .into_iter()
                .map(|x| first_exp_polynomial(k, a, x))
                .fold(f64::INFINITY, f64::min);
            (format!("k = {k}, a = {a}"), s)
        },
        &mut details,
    );
    bad += lemma(
        "second exponential polynomial nonnegative",
        50,
        &mut rng,
        |r| {
            let (k, a) = (r.gen_range(0.05..5.0), r.gen_range(0.0..1.0));
            let s = log_grid(1e-6, 50.0, N)
                .into_iter()
                .map(|x| second_exp_polynomial(k, a, x))
                .fold(f64::INFINITY, f64::min);
            (format!("k = {k}, a = {a}"), s)
        },
        &mut details,
    );
    bad += lemma(
        "hazard convex in scale",
        50,
        &mut rng,
        |r| {
            let (k, a, x) = (r.gen_range(1.0..4.0), r.gen_range(0.0..1.0), r.gen_range(0.1..3.0));
            let v: Vec<f64> = linear_grid(0.01, 5.0, N)
                .into_iter()
                .map(|l| hazard_in_scale(k, a, x, l))
                .collect();
            (format!("k = {k}, a = {a}, x = {x}"), convexity_slack(&v))
        },
        &mut details,
    );
    Outcome::new(bad == 0, format!("{bad} of 250 draws violated"), details)
}

fn order_hierarchy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let grid = GridSpec::default();
    let mut details = Vec::new();
    let (mut hr_holds, mut rh_holds, mut star_holds) = (0, 0, 0);
    for _ in 0..200 {
        let (a, b) = (random_ew(&mut rng), random_ew(&mut rng));
        let st = check(Order::St, &a, &b, &grid).status;
        for order in [Order::Hr, Order::Rh] {
            if check(order, &a, &b, &grid).status != Status::Holds {
                continue;
            }
            if order == Order::Hr {
                hr_holds += 1;
            } else {
                rh_holds += 1;
            }
            if st != Status::Holds {
                details.push(format!("{} holds but st is {st:?}: {a:?} vs {b:?}", order.name()));
            }
        }
    }
    let grid = GridSpec::with_points(512).unwrap();
    for id in [TheoremId::StarMax, TheoremId::StarMin] {
        for _ in 0..50 {
            let inst = sample_instance(id, &mut rng).unwrap();
            let which = id.statistic();
            let (x, y) = (inst.x.extreme(which).unwrap(), inst.y.extreme(which).unwrap());
            if check(Order::Star, &y, &x, &grid).status != Status::Holds {
                continue;
            }
            star_holds += 1;
            let lorenz = check(Order::Lorenz, &y, &x, &grid);
            if lorenz.status != Status::Holds {
                details.push(format!(
                    "{id}: star holds but Lorenz is {:?}: {}",
                    lorenz.status,
                    serde_json::to_string(&inst).unwrap()
                ));
            }
        }
    }
    Outcome::new(
        details.is_empty(),
        format!(
            "{} violations ({hr_holds} hr, {rh_holds} rh, {star_holds} star pairs held)",
            details.len()
        ),
        details,
    )
}

fn theorem_fuzzing() -> Outcome {
    let cfg = EvalConfig::fuzzing();
    let mut details = Vec::new();
    let mut total = 0;
    let mut all = Vec::new();
    for id in TheoremId::ALL {
        let report = match fuzz(id, 200, SEED, &cfg) {
            Ok(r) => r,
            Err(e) => {
                details.push(format!("{id}: error {e}"));
                total += 1;
                continue;
            }
        };
        let short = report.accepted < 200;
        if short || !report.violations.is_empty() {
            details.push(format!(
                "{id}: {} violations among {} accepted of {} drawn",
                report.violations.len(),
                report.accepted,
                report.attempts
            ));
        }
        if short {
            total += 1;
        }
        for v in report.violations.iter().take(SHOWN_VIOLATIONS) {
            details.push(format!("  instance {}", serde_json::to_string(&v.instance).unwrap()));
            details.push(format!("  conclusion {}", serde_json::to_string(&v.check.conclusion).unwrap()));
        }
        total += report.violations.len();
        all.push(report);
    }
    if total > 0 {
        let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("fuzz_violations.json");
        match std::fs::write(&path, serde_json::to_string_pretty(&all).unwrap()) {
            Ok(()) => details.push(format!("every violating instance is in {}", path.display())),
            Err(e) => details.push(format!("cannot write {}: {e}", path.display())),
        }
    }
    Outcome::new(
        total == 0,
        format!("{total} violations over {} theorems", TheoremId::ALL.len()),
        details,
    )
}

fn random_sample_sizes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for _ in 0..50 {
        let which = if rng.gen_bool(0.5) { Statistic::Max } else { Statistic::Min };
        let sys = random_system(&mut rng, which);
        let m = rng.gen_range(1..=sys.n());
        let mix = sys.mixture(which, &CountDistribution::degenerate(m).unwrap()).unwrap();
        let fixed = sys.prefix(m).unwrap().extreme(which).unwrap();
        for x in marginal_span(sys.marginals(), 256) {
            let (a, b) = (mix.prob(x), fixed.prob(x));
            worst = worst.max((a.p - b.p).abs()).max((a.q - b.q).abs());
        }
    }
    if worst > 1e-14 {
        details.push(format!("degenerate mixture differs by {worst:e}"));
    }
    let cfg = EvalConfig::default();
    for s in random_n_scenarios() {
        match run_random_n_scenario(&s, &cfg) {
            Ok(run) if run.check.consistent => {}
            Ok(run) => details.push(format!(
                "{}: gating hypotheses hold but the conclusion is {:?}, witness {:?}",
                s.name, run.check.conclusion.status, run.check.conclusion.witness
            )),
            Err(e) => details.push(format!("{}: error {e}", s.name)),
        }
    }
    Outcome::new(
        details.is_empty(),
        format!("degenerate error {worst:e}, {} issues", details.len()),
        details,
    )
}

/// Relative error of `analytic` against a central difference of `f` at
/// `x`. The step is a small multiple of the local length scale, the
/// smallest of `scales`.
fn fd_error(f: impl Fn(f64) -> f64, analytic: f64, x: f64, scales: &[f64]) -> f64 {
    let len = scales.iter().map(|s| s.abs()).fold(f64::INFINITY, f64::min);
    let h = 1e-5 * len;
    let fd = (f(x + h) - f(x - h)) / (2.0 * h);
    (fd - analytic).abs() / analytic.abs()
}

/// Distance from `x` to the nearest singularity of the generator's
/// analytic continuation below zero.
fn singularity_distance(g: &Generator, x: f64) -> f64 {
    match g.family() {
        Family::Independence => f64::INFINITY,
        Family::GumbelVariant => 1.0 + x,
        Family::ExpReciprocal => x + g.theta().exp(),
    }
}

fn derivatives() -> Outcome {
    let mut errors: Vec<(f64, String)> = Vec::new();
    let mut generators = vec![Generator::independence()];
    for t in [1.0, 1.5, 3.05, 8.9] {
        generators.push(Generator::gumbel_variant(t).unwrap());
    }
    for t in [0.6, 2.4, 10.7, 22.6] {
        generators.push(Generator::exp_reciprocal(t).unwrap());
    }
    for g in &generators {
        for x in log_grid(1e-3, 1e2, 64) {
            let (p0, p1, p2) = (g.psi(x), g.psi_d1(x), g.psi_d2(x));
            // Values lost to underflow carry no derivative information.
            if p0 < 1e-250 || p1 == 0.0 || p2 == 0.0 {
                continue;
            }
            let scales = [singularity_distance(g, x), p0 / p1, p1 / p2];
            let e = fd_error(|s| g.psi(s), p1, x, &scales);
            errors.push((e, format!("{g:?} ψ′({x})")));
            let e = fd_error(|s| g.psi_d1(s), p2, x, &scales);
            errors.push((e, format!("{g:?} ψ″({x})")));
        }
        for t in linear_grid(0.01, 0.99, 64) {
            let (f0, f1, f2) = (g.phi(t), g.phi_d1(t), g.phi_d2(t));
            if !(f1.is_finite() && f2.is_finite()) || f1 == 0.0 || f2 == 0.0 {
                continue;
            }
            let scales = [t, 1.0 - t, f0 / f1, f1 / f2];
            errors.push((fd_error(|s| g.phi(s), f1, t, &scales), format!("{g:?} φ′({t})")));
            errors.push((fd_error(|s| g.phi_d1(s), f2, t, &scales), format!("{g:?} φ″({t})")));
        }
    }
    // The lower tail is differenced through the CDF and the upper tail
    // through the survival function.
    let pdf_error = |d: &dyn Lifetime, x: f64| {
        let pr = d.prob(x);
        let an = d.pdf(x);
        let tail = pr.p.min(pr.q) / an;
        if pr.p <= 0.5 {
            fd_error(|s| d.cdf(s), an, x, &[x, tail])
        } else {
            fd_error(|s| -d.sf(s), an, x, &[x, tail])
        }
    };
    for (name, s) in scenario_systems() {
        for p in s.marginals() {
            for u in linear_grid(1e-3, 1.0 - 1e-3, 64) {
                let x = p.quantile(u).unwrap();
                errors.push((pdf_error(p, x), format!("{p:?} pdf({x})")));
            }
        }
        for which in [Statistic::Max, Statistic::Min] {
            let ext = s.with_coupling(which.coupling()).extreme(which).unwrap();
            for u in linear_grid(1e-3, 1.0 - 1e-3, 64) {
                let x = ext.quantile(u).unwrap();
                errors.push((pdf_error(&ext, x), format!("{name} {which:?} pdf({x})")));
            }
        }
    }
    errors.sort_by(|a, b| b.0.total_cmp(&a.0));
    let worst = errors.first().map_or(0.0, |e| e.0);
    let off = |e: &(f64, String)| e.0.is_nan() || e.0 > 1e-5;
    let bad = errors.iter().filter(|e| off(e)).count();
    let details = errors
        .iter()
        .take_while(|e| off(e))
        .take(10)
        .map(|(e, what)| format!("{what}: relative error {e:e}"))
        .collect();
    Outcome::new(
        bad == 0,
        format!("{bad} of {} checks off, worst relative error {worst:e}", errors.len()),
        details,
    )
}
