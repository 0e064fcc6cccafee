//! `eoc`: evaluate extreme lifetimes, check stochastic orders between
//! systems, and rerun the built-in scenarios.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use eoc_core::archimedean::{self, CheckGrid};
use eoc_core::majorization::{relation_verdict, Convention, RealVector, Relation};
use eoc_core::orders::{self, GridSpec, Order, OrderVerdict, Spacing};
use eoc_core::scenarios::{self, Report};
use eoc_core::theorems::EvalConfig;
use eoc_core::{ConditionVerdict, CoupledSystem, EwParams, Generator, Lifetime, Statistic, Status};

const EXIT_USAGE: u8 = 2;
const EXIT_FAILS: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Parser)]
#[command(name = "eoc", version, about = "Extremes of dependent extended-Weibull lifetimes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a marginal or the extreme of a coupled system.
    Eval(EvalArgs),
    /// Check whether the first system is smaller than the second in an order.
    Check(CheckArgs),
    /// Run built-in scenarios and report hypotheses and verdicts.
    Scenario(ScenarioArgs),
    /// Compare two vectors under a majorization relation.
    Majorize(MajorizeArgs),
    /// Scan a generator condition.
    Conditions(ConditionsArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("extreme").args(["max", "min"])))]
struct StatisticFlags {
    /// Parallel system (maximum).
    #[arg(long)]
    max: bool,
    /// Series system (minimum).
    #[arg(long)]
    min: bool,
}

impl StatisticFlags {
    fn get(&self) -> Option<Statistic> {
        match (self.max, self.min) {
            (true, _) => Some(Statistic::Max),
            (_, true) => Some(Statistic::Min),
            _ => None,
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["system", "alpha"])))]
struct EvalArgs {
    /// JSON system file.
    #[arg(long, requires = "extreme")]
    system: Option<PathBuf>,
    #[command(flatten)]
    statistic: StatisticFlags,
    /// Marginal tilt.
    #[arg(long, requires_all = ["lambda", "k"], conflicts_with = "system")]
    alpha: Option<f64>,
    /// Marginal scale.
    #[arg(long, requires = "alpha")]
    lambda: Option<f64>,
    /// Marginal shape.
    #[arg(long, requires = "alpha")]
    k: Option<f64>,
    #[arg(long)]
    cdf: bool,
    #[arg(long)]
    sf: bool,
    #[arg(long)]
    pdf: bool,
    #[arg(long)]
    hazard: bool,
    #[arg(long)]
    quantile: bool,
    /// Evaluation points for cdf, sf, pdf and hazard (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x: Vec<f64>,
    /// Probability levels for the quantile (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    u: Vec<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GridFlags {
    /// Grid points (default 2048, or EOC_GRID_POINTS).
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    lo_quantile: Option<f64>,
    #[arg(long)]
    hi_quantile: Option<f64>,
    #[arg(long, value_enum)]
    spacing: Option<SpacingArg>,
    /// Absolute tolerance on probabilities.
    #[arg(long)]
    prob_tol: Option<f64>,
    /// Relative tolerance on hazards, quantiles and ratios.
    #[arg(long)]
    rel_tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    Log,
    Linear,
}

impl GridFlags {
    fn grid(&self) -> anyhow::Result<GridSpec> {
        let mut g = GridSpec::from_env()?;
        if let Some(n) = self.points {
            g.points = n;
        }
        if let Some(v) = self.lo_quantile {
            g.lo_quantile = v;
        }
        if let Some(v) = self.hi_quantile {
            g.hi_quantile = v;
        }
        if let Some(s) = self.spacing {
            g.spacing = match s {
                SpacingArg::Log => Spacing::Log,
                SpacingArg::Linear => Spacing::Linear,
            };
        }
        if let Some(v) = self.prob_tol {
            g.prob_tol = v;
        }
        if let Some(v) = self.rel_tol {
            g.rel_tol = v;
        }
        g.validate()?;
        Ok(g)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    St,
    Hr,
    Rh,
    Disp,
    Star,
    Lorenz,
}

impl From<OrderArg> for Order {
    fn from(o: OrderArg) -> Order {
        match o {
            OrderArg::St => Order::St,
            OrderArg::Hr => Order::Hr,
            OrderArg::Rh => Order::Rh,
            OrderArg::Disp => Order::Disp,
            OrderArg::Star => Order::Star,
            OrderArg::Lorenz => Order::Lorenz,
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_enum)]
    order: OrderArg,
    /// System claimed to be smaller.
    first: PathBuf,
    /// System claimed to be larger.
    second: PathBuf,
    #[command(flatten)]
    statistic: StatisticFlags,
    #[command(flatten)]
    grid: GridFlags,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("which").required(true).args(["name", "all"])))]
struct ScenarioArgs {
    name: Option<String>,
    /// The seven fixed-size scenarios.
    #[arg(long)]
    all: bool,
    /// With --all, also run the random sample size scenarios.
    #[arg(long, requires = "all")]
    random_n: bool,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV curves: a file for one scenario, a directory with --all.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    grid: GridFlags,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    /// c ⪯^m d
    M,
    /// c ⪯_w d
    Subw,
    /// c ⪯^w d
    Superw,
}

#[derive(Args)]
struct MajorizeArgs {
    /// The vector claimed to be smaller.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    c: Vec<f64>,
    /// The vector claimed to be larger.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    d: Vec<f64>,
    #[arg(long, value_enum)]
    rel: RelationArg,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ConditionsArgs {
    #[command(subcommand)]
    check: ConditionKind,
    /// Grid points.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Tolerance on the scaled slack.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    json: bool,
}

/// Generators are written `independence`, `gumbel_variant:θ` or
/// `exp_reciprocal:θ`.
#[derive(Subcommand)]
enum ConditionKind {
    /// φ₂∘ψ₁ is super-additive.
    Superadditive {
        #[arg(long, value_parser = parse_generator)]
        g1: Generator,
        #[arg(long, value_parser = parse_generator)]
        g2: Generator,
    },
    /// ln ψ is concave.
    LogConcavePsi {
        #[arg(long, value_parser = parse_generator)]
        generator: Generator,
    },
    /// α t φ″(t) + c φ′(t) ≥ 0 on (0, 1).
    Phi {
        #[arg(long, value_parser = parse_generator)]
        generator: Generator,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        alpha: f64,
    },
    /// ψ/ψ′ is decreasing and concave.
    PsiRatio {
        #[arg(long, value_parser = parse_generator)]
        generator: Generator,
    },
    /// The star-order t-function for maxima is increasing.
    StarMax {
        #[arg(long, value_parser = parse_generator)]
        generator: Generator,
        #[arg(long)]
        alpha: f64,
    },
    /// The star-order t-function for minima is decreasing.
    StarMin {
        #[arg(long, value_parser = parse_generator)]
        generator: Generator,
        #[arg(long)]
        alpha: f64,
    },
}

fn parse_generator(s: &str) -> Result<Generator, String> {
    let (family, theta) = match s.split_once(':') {
        Some((f, t)) => (
            f,
            Some(t.parse::<f64>().map_err(|e| format!("bad θ {t:?}: {e}"))?),
        ),
        None => (s, None),
    };
    let need = |t: Option<f64>| t.ok_or_else(|| format!("{family} needs a θ, as {family}:θ"));
    match family {
        "independence" => Ok(Generator::independence()),
        "gumbel_variant" => Generator::gumbel_variant(need(theta)?).map_err(|e| e.to_string()),
        "exp_reciprocal" => Generator::exp_reciprocal(need(theta)?).map_err(|e| e.to_string()),
        _ => Err(format!(
            "unknown family {family:?}; use independence, gumbel_variant:θ or exp_reciprocal:θ"
        )),
    }
}

/// Errors that should exit with the usage code.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => cmd_eval(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Scenario(a) => cmd_scenario(&a),
        Command::Majorize(a) => cmd_majorize(&a),
        Command::Conditions(a) => cmd_conditions(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<Usage>().is_some()
                || matches!(
                    e.downcast_ref::<eoc_core::Error>(),
                    Some(
                        eoc_core::Error::InvalidParameter { .. }
                            | eoc_core::Error::Domain { .. }
                            | eoc_core::Error::LengthMismatch { .. }
                            | eoc_core::Error::Contract(_)
                    )
                );
            ExitCode::from(if usage { EXIT_USAGE } else { 1 })
        }
    }
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Holds => 0,
        Status::FailsAt => EXIT_FAILS,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn read_system(path: &Path) -> anyhow::Result<CoupledSystem> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| usage(format!("{}: not a valid system: {e}", path.display())))
}

fn print_json(v: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> anyhow::Result<u8> {
    for &u in &a.u {
        if !(u > 0.0 && u < 1.0) {
            return Err(usage(format!("--u {u}: must lie in (0, 1)")));
        }
    }
    for &x in &a.x {
        if !x.is_finite() {
            return Err(usage(format!("--x {x}: must be finite")));
        }
    }
    let mut funcs: Vec<&str> = Vec::new();
    for (on, name) in [
        (a.cdf, "cdf"),
        (a.sf, "sf"),
        (a.pdf, "pdf"),
        (a.hazard, "hazard"),
    ] {
        if on {
            funcs.push(name);
        }
    }
    if funcs.is_empty() && !a.quantile {
        return Err(usage("choose at least one of --cdf --sf --pdf --hazard --quantile"));
    }
    if !funcs.is_empty() && a.x.is_empty() {
        return Err(usage("--x is required for --cdf, --sf, --pdf and --hazard"));
    }
    if a.quantile && a.u.is_empty() {
        return Err(usage("--u is required for --quantile"));
    }

    let dist: Box<dyn Lifetime> = match &a.system {
        Some(path) => {
            let which = a
                .statistic
                .get()
                .ok_or_else(|| usage("--system needs --max or --min"))?;
            Box::new(read_system(path)?.extreme(which)?)
        }
        None => Box::new(EwParams::new(
            a.alpha.expect("clap requires --alpha"),
            a.lambda.expect("clap requires --lambda"),
            a.k.expect("clap requires --k"),
        )?),
    };

    let mut rows = Vec::new();
    for &x in &a.x {
        for &f in &funcs {
            let v = match f {
                "cdf" => dist.cdf(x),
                "sf" => dist.sf(x),
                "pdf" => dist.pdf(x),
                _ => dist.hazard(x),
            };
            rows.push((f, "x", x, v));
        }
    }
    if a.quantile {
        for &u in &a.u {
            rows.push(("quantile", "u", u, dist.quantile(u)?));
        }
    }

    if a.json {
        let out: Vec<_> = rows
            .iter()
            .map(|&(f, arg, at, v)| json!({ "function": f, arg: at, "value": v }))
            .collect();
        print_json(&out)?;
    } else {
        for (f, _, at, v) in rows {
            println!("{f}({}) = {}", num(at), num(v));
        }
    }
    Ok(0)
}

fn print_order_verdict(v: &OrderVerdict) {
    println!("status: {}", status_name(v.status));
    if let Some(w) = v.witness {
        let axis = match w.axis {
            orders::Axis::X => "x",
            orders::Axis::U => "u",
        };
        println!("witness {axis}: {}", num(w.at));
        println!("gap: {}", num(w.gap));
        if let Some(c) = w.crossing {
            println!("crossing x: {}", num(c));
        }
    }
    if let Some(r) = &v.reason {
        println!("reason: {r}");
    }
}

/// Shortest round-trip form, switching to exponent notation away from 1.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Holds => "Holds",
        Status::FailsAt => "FailsAt",
        Status::Inconclusive => "Inconclusive",
    }
}

fn cmd_check(a: &CheckArgs) -> anyhow::Result<u8> {
    let grid = a.grid.grid()?;
    let which = a
        .statistic
        .get()
        .ok_or_else(|| usage("check needs --max or --min"))?;
    let first = read_system(&a.first)?.extreme(which)?;
    let second = read_system(&a.second)?.extreme(which)?;
    let v = orders::check(a.order.into(), &first, &second, &grid);
    if a.json {
        print_json(&v)?;
    } else {
        println!("order: {}", Order::from(a.order).name());
        print_order_verdict(&v);
    }
    Ok(status_code(v.status))
}

fn cmd_scenario(a: &ScenarioArgs) -> anyhow::Result<u8> {
    let cfg = EvalConfig {
        orders: a.grid.grid()?,
        ..EvalConfig::default()
    };
    let list = match &a.name {
        Some(name) => vec![scenarios::scenario_by_name(name).ok_or_else(|| {
            usage(format!(
                "unknown scenario {name:?}; valid names: {}",
                scenarios::scenario_names().join(", ")
            ))
        })?],
        None => {
            let mut v = scenarios::builtin_scenarios();
            if a.random_n {
                v.extend(scenarios::random_n_scenarios());
            }
            v
        }
    };

    // A single scenario writes its curves to the named file; --all writes
    // one file per scenario into the named directory.
    let report = match (&a.csv, a.all) {
        (Some(dir), true) => {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("creating {}", dir.display()))?;
            scenarios::run_all(&list, &cfg, Some(dir))?
        }
        (Some(file), false) => {
            let mut r = scenarios::run_all(&list, &cfg, None)?;
            std::fs::write(file, scenarios::curves_csv(&list[0], &cfg)?)
                .with_context(|| format!("writing {}", file.display()))?;
            r.scenarios[0].curves_csv = Some(file.display().to_string());
            r
        }
        (None, _) => scenarios::run_all(&list, &cfg, None)?,
    };

    if let Some(out) = &a.out {
        std::fs::write(out, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", out.display()))?;
    }
    if a.json {
        print_json(&report)?;
    } else {
        print_report(&report);
    }
    Ok(if report.all_consistent { 0 } else { EXIT_FAILS })
}

fn print_report(r: &Report) {
    println!(
        "{:<14} {:<18} {:<8} {:<13} {:<12} {:<10} matches",
        "scenario", "theorem", "expected", "verdict", "hypotheses", "consistent"
    );
    for b in &r.scenarios {
        let gating: Vec<_> = b.hypotheses.iter().filter(|h| h.gating).collect();
        let held = gating.iter().filter(|h| h.verdict.holds()).count();
        let expected = match b.expected {
            scenarios::Expected::Holds => "holds",
            scenarios::Expected::Crosses => "crosses",
        };
        println!(
            "{:<14} {:<18} {:<8} {:<13} {:<12} {:<10} {}",
            b.name,
            b.theorem.name(),
            expected,
            status_name(b.verdict.status),
            format!("{held}/{}", gating.len()),
            b.consistent,
            b.matches_expected
        );
        if let Some(x) = b.verdict.witness_x {
            println!("    witness x: {}", num(x));
        }
        if let Some(c) = b.verdict.crossing {
            println!(
                "    crossing at x = {}, gap before {}, gap after {}",
                num(c.x),
                num(c.gap_before),
                num(c.gap_after)
            );
        }
        for h in gating.iter().filter(|h| !h.verdict.holds()) {
            println!(
                "    hypothesis {} {} (margin {})",
                h.id,
                status_name(h.verdict.status),
                num(h.verdict.margin)
            );
        }
    }
    println!("all consistent: {}", r.all_consistent);
    println!("all match expected: {}", r.all_match_expected);
}

fn cmd_majorize(a: &MajorizeArgs) -> anyhow::Result<u8> {
    if a.c.len() != a.d.len() {
        return Err(usage(format!(
            "--c has {} entries but --d has {}",
            a.c.len(),
            a.d.len()
        )));
    }
    let c = RealVector::new(a.c.clone())?;
    let d = RealVector::new(a.d.clone())?;
    let rel = match a.rel {
        RelationArg::M => Relation::Majorization,
        RelationArg::Subw => Relation::WeakSub,
        RelationArg::Superw => Relation::WeakSuper,
    };
    let asc = relation_verdict(rel, Convention::Ascending, &d, &c)?;
    let desc = relation_verdict(rel, Convention::Descending, &d, &c)?;
    if a.json {
        print_json(&json!({ "relation": rel, "ascending": asc, "descending": desc }))?;
    } else {
        for (label, v) in [("ascending", &asc), ("descending", &desc)] {
            println!("{label}: {} (margin {})", v.holds(), num(v.margin));
        }
    }
    Ok(0)
}

fn cmd_conditions(a: &ConditionsArgs) -> anyhow::Result<u8> {
    let mut grid = CheckGrid::default();
    if let Some(n) = a.points {
        if n < 3 {
            bail!(usage("--points must be at least 3"));
        }
        grid.points = n;
    }
    if let Some(t) = a.tol {
        grid.tol = t;
    }
    let v: ConditionVerdict = match &a.check {
        ConditionKind::Superadditive { g1, g2 } => archimedean::check_superadditive(g1, g2, &grid),
        ConditionKind::LogConcavePsi { generator } => {
            archimedean::check_log_concave_psi(generator, &grid)
        }
        ConditionKind::Phi { generator, c, alpha } => {
            archimedean::check_phi_condition(generator, *c, *alpha, &grid)
        }
        ConditionKind::PsiRatio { generator } => archimedean::check_psi_ratio(generator, &grid),
        ConditionKind::StarMax { generator, alpha } => {
            archimedean::check_star_condition_max(generator, *alpha, &grid)
        }
        ConditionKind::StarMin { generator, alpha } => {
            archimedean::check_star_condition_min(generator, *alpha, &grid)
        }
    };
    if a.json {
        print_json(&v)?;
    } else {
        println!("status: {}", status_name(v.status));
        println!("margin: {}", num(v.margin));
        if !v.witness.is_empty() {
            let w: Vec<String> = v.witness.iter().map(|&x| num(x)).collect();
            println!("witness: {}", w.join(", "));
        }
        if let Some(r) = &v.reason {
            println!("reason: {r}");
        }
    }
    Ok(status_code(v.status))
}
