use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use incmax::continuous::{check_competitive, discretize, greedy_scaling, GreedyStatus, PiecewiseLinearValue};
use incmax::incmax_core::{is_accountable, reduce_to_separable, Fixture};
use incmax::io;
use incmax::lower_bounds::{
    self, auto_epsilon_with, build_det_lb_instance, certify_det_lb, chain_exclusions, default_base, greedy_fails,
    ExclusionOutcome, Precision, Variant,
};
use incmax::randomized;
use incmax::scalar::parse_scalar;
use incmax::separable::{self, best_deterministic, competitive_ratio, value_profile, CompetitiveRatio, SolutionClass};
use incmax::yao::{self, AlgReading, YaoCertificate};
use incmax::{Exact, Scalar, PHI_PLUS_ONE};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;

#[derive(Parser)]
#[command(name = "incmax", version, about = "Incremental maximization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Output {
    /// Artifact path; the artifact goes to stdout and the summary to stderr when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    Bounded,
    Generous,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    A,
    B,
}

#[derive(Subcommand)]
enum Command {
    /// Trace GreedyScaling on a piecewise-linear instance.
    Greedy {
        /// PL instance JSON; v(c) = c up to 1 and c^0.9 beyond when omitted.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        rho: String,
        #[arg(long)]
        c1: String,
        #[arg(long, default_value = "1000000")]
        horizon: String,
        /// Rational arithmetic instead of f64.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Check a continuous solution for rho-competitiveness.
    Check {
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        rho: String,
        /// Comma-separated sizes, e.g. "40/57,4,644/57".
        #[arg(long)]
        solution: String,
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Build an instance on which GreedyScaling fails from every given start.
    Exclude {
        /// Base PL instance; a concave power law when omitted.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value = "1,1.5,2,2.5", value_delimiter = ',')]
        starts: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Build the recurrence-B instance and certify that no rho-competitive solution exists.
    Detlb {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        eps: Option<f64>,
        /// Also write the recurrence trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Thresholds: phi + 1, rho*, discriminants.
    Roots {
        #[command(flatten)]
        output: Output,
    },
    /// Iterate recurrence A or B.
    Recur {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = lower_bounds::MAX_RECURRENCE_STEPS)]
        steps: usize,
        #[command(flatten)]
        output: Output,
    },
    /// RandomizedScaling bounds and runs.
    Rand {
        #[command(subcommand)]
        action: RandAction,
    },
    /// Yao-style lower bound certificates.
    Yao {
        #[command(subcommand)]
        action: YaoAction,
    },
    /// Turn an accountable oracle fixture into a separable instance.
    Reduce {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Separable instance with d_i = v(i/n)/i from a PL instance.
    Discretize {
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Granularity n.
        #[arg(long)]
        n: usize,
        /// Number of sets.
        #[arg(long)]
        count: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Value profile of a separable solution, or of the best one when none is given.
    Profile {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_delimiter = ',')]
        solution: Option<Vec<usize>>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum RandAction {
    /// Exact small-size lower bound on the expected ratio.
    Expectation {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, default_value_t = 1)]
        from: u64,
        #[arg(long)]
        to: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Grid of the six-integral bound against g(r).
    Bound {
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, default_value_t = 3)]
        k_min: u32,
        #[arg(long, default_value_t = 12)]
        k_max: u32,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[command(flatten)]
        output: Output,
    },
    /// One seeded run on a separable instance.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        r: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum YaoAction {
    /// Minimum expected ratio over deterministic algorithms.
    Verify {
        /// Certificate JSON; the built-in N = 10 certificate when omitted.
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        class: ClassArg,
        #[command(flatten)]
        output: Output,
    },
    /// Seeded hill climbing for a certificate.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "generous")]
        class: ClassArg,
        #[command(flatten)]
        output: Output,
    },
}

/// A command result: the artifact, a one-line summary and whether verification passed.
struct Report {
    artifact: Artifact,
    summary: String,
    verified: bool,
}

enum Artifact {
    Csv(String),
    Json(String),
}

impl Artifact {
    fn render(self, format: Option<Format>) -> anyhow::Result<String> {
        match (self, format) {
            (Artifact::Csv(s), None | Some(Format::Csv)) | (Artifact::Json(s), None | Some(Format::Json)) => Ok(s),
            (Artifact::Csv(s), Some(Format::Json)) => csv_to_json(&s),
            (Artifact::Json(_), Some(Format::Csv)) => Err(UsageError("this command only writes JSON".into()).into()),
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Rows of a CSV table as a JSON array of objects with string cells.
fn csv_to_json(s: &str) -> anyhow::Result<String> {
    let mut rd = csv::Reader::from_reader(s.as_bytes());
    let header = rd.headers()?.clone();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let obj: serde_json::Map<String, Value> =
            header.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), Value::String(v.to_string()))).collect();
        rows.push(Value::Object(obj));
    }
    Ok(serde_json::to_string_pretty(&rows)? + "\n")
}

fn csv_string(f: impl FnOnce(&mut Vec<u8>) -> incmax::Result<()>) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn scalar<T: Scalar>(s: &str, name: &str) -> anyhow::Result<T> {
    parse_scalar(s).map_err(|e| usage(format!("--{name}: {e}")))
}

fn load_pl<T: Scalar>(path: &Option<PathBuf>) -> anyhow::Result<PiecewiseLinearValue<T>> {
    match path {
        None => Ok(PiecewiseLinearValue::identity()),
        Some(p) => io::parse_pl(&read(p)?).with_context(|| format!("instance {}", p.display())),
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn greedy<T: Scalar>(instance: &Option<PathBuf>, rho: &str, c1: &str, horizon: &str) -> anyhow::Result<Report> {
    // constant density never meets a target below 1, so the default tilts v beyond size 1
    let f: PiecewiseLinearValue<T> = match instance {
        None => io::parse_pl(&io::pl_to_json(&default_base()))?,
        Some(_) => load_pl(instance)?,
    };
    let (rho, c1, horizon) = (scalar::<T>(rho, "rho")?, scalar::<T>(c1, "c1")?, scalar::<T>(horizon, "horizon")?);
    let run = greedy_scaling(&f, &c1, &rho, &horizon).context("greedy")?;
    let artifact = Artifact::Csv(csv_string(|w| io::write_greedy_csv(w, &run))?);
    let (summary, verified) = match &run.status {
        GreedyStatus::HorizonReached => {
            let verdict = check_competitive(&f, &run.sizes, &rho);
            (
                format!(
                    "greedy: {} sizes reach the horizon, competitive check {}",
                    run.sizes.len(),
                    if verdict.ok { "ok" } else { "failed" }
                ),
                verdict.ok,
            )
        }
        GreedyStatus::NotCompetitive(why) => {
            (format!("greedy: not competitive after {} sizes ({why:?})", run.sizes.len()), false)
        }
    };
    Ok(Report { artifact, summary, verified })
}

fn check<T: Scalar>(instance: &Option<PathBuf>, rho: &str, solution: &str) -> anyhow::Result<Report> {
    let f: PiecewiseLinearValue<T> = load_pl(instance)?;
    let rho = scalar::<T>(rho, "rho")?;
    let sizes = solution.split(',').map(|s| scalar::<T>(s, "solution")).collect::<anyhow::Result<Vec<T>>>()?;
    let v = check_competitive(&f, &sizes, &rho);
    let artifact = Artifact::Json(pretty(&json!({
        "ok": v.ok,
        "first_violation": v.first_violation.as_ref().map(|(i, why)| json!({"block": i, "condition": format!("{why:?}")})),
        "covered_up_to": v.covered_up_to.as_ref().map(io::text),
    })));
    let summary = match &v.first_violation {
        None => format!("check: competitive at rho = {rho}"),
        Some((i, why)) => format!("check: block {i} violates {why:?}"),
    };
    Ok(Report { artifact, summary, verified: v.ok })
}

fn exclude(instance: &Option<PathBuf>, rho: f64, starts: &[f64]) -> anyhow::Result<Report> {
    let base = match instance {
        None => default_base(),
        Some(_) => load_pl::<f64>(instance)?,
    };
    let chain = chain_exclusions(&base, starts, rho).context("exclusion")?;
    let far = chain.exclusions.iter().map(|e| e.safe_extension).fold(1.0, f64::max);
    let horizon = (far * 1e4).max(1e6);
    let mut defeated = 0;
    for &c1 in starts {
        if greedy_fails(&chain.instance, c1, rho, horizon)? {
            defeated += 1;
        }
    }
    let attached = chain.exclusions.iter().filter(|e| e.outcome == ExclusionOutcome::Excluded).count();
    Ok(Report {
        artifact: Artifact::Json(io::pl_to_json(&chain.instance)),
        summary: format!("exclude: {defeated} of {} starts defeated, {attached} ladders attached", starts.len()),
        verified: defeated == starts.len(),
    })
}

fn detlb(rho: f64, eps: Option<f64>, trace: &Option<PathBuf>) -> anyhow::Result<Report> {
    let precision = Precision::from_env().map_err(|e| usage(format!("INCMAX_PRECISION: {e}")))?;
    let eps = match eps {
        Some(e) => e,
        None => auto_epsilon_with(rho, precision).context("epsilon")?.epsilon,
    };
    let inst = build_det_lb_instance(rho, Some(eps)).context("instance")?;
    if let Some(path) = trace {
        let t = lower_bounds::recurrence_b_with(rho, eps, lower_bounds::MAX_RECURRENCE_STEPS, precision)?;
        write_file(path, &csv_string(|w| io::write_recurrence_csv(w, &t))?)?;
    }
    let cert = certify_det_lb(&inst);
    Ok(Report {
        artifact: Artifact::Json(io::det_lb_certificate_to_json(&cert)),
        summary: format!(
            "detlb: rho = {rho}, eps = {eps}, ell = {}, {} candidates, {}",
            cert.ell,
            cert.candidates_checked,
            if cert.infeasible { "infeasible" } else { "solution found" }
        ),
        verified: cert.infeasible,
    })
}

fn roots() -> anyhow::Result<Report> {
    let rho_star = lower_bounds::rho_star();
    let v = json!({
        "phi_plus_one": PHI_PLUS_ONE,
        "rho_star": rho_star,
        "rho_star_residual": lower_bounds::rho_star_polynomial(rho_star),
        "discriminant_a_at_phi_plus_one": lower_bounds::discriminant_a(PHI_PLUS_ONE, 0.0),
        "discriminant_b_at_rho_star": lower_bounds::discriminant_b(rho_star, 0.0),
        "randomized_r": randomized::optimal_r(),
    });
    Ok(Report {
        artifact: Artifact::Json(pretty(&v)),
        summary: format!("roots: phi+1 = {PHI_PLUS_ONE}, rho* = {rho_star}"),
        verified: true,
    })
}

fn recur(variant: VariantArg, rho: f64, eps: f64, alpha: f64, beta: f64, steps: usize) -> anyhow::Result<Report> {
    let precision = Precision::from_env().map_err(|e| usage(format!("INCMAX_PRECISION: {e}")))?;
    let (trace, variant) = match variant {
        VariantArg::A => (lower_bounds::recurrence_a_with(alpha, beta, rho, eps, steps, precision)?, Variant::A),
        VariantArg::B => (lower_bounds::recurrence_b_with(rho, eps, steps, precision)?, Variant::B),
    };
    let analysis = lower_bounds::characteristic_analysis(variant, rho, eps)?;
    Ok(Report {
        artifact: Artifact::Csv(csv_string(|w| io::write_recurrence_csv(w, &trace))?),
        summary: format!(
            "recur: {} terms, first negative at {:?}, {:?} roots",
            trace.values.len(),
            trace.first_negative,
            analysis.regime
        ),
        verified: true,
    })
}

fn rand_cmd(action: &RandAction) -> anyhow::Result<Report> {
    let pick_r = |r: Option<f64>| r.unwrap_or_else(randomized::optimal_r);
    match action {
        RandAction::Expectation { r, from, to, .. } => {
            let r = pick_r(*r);
            let to = to.unwrap_or_else(|| randomized::small_c_range(r));
            if *from < 1 || to < *from {
                return Err(usage("need 1 <= --from <= --to"));
            }
            let rows = (*from..=to)
                .map(|c| randomized::expected_ratio_lb_small_c(c, r).map(|x| (c, x)))
                .collect::<incmax::Result<Vec<_>>>()?;
            let (cmin, min) = rows.iter().cloned().fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            Ok(Report {
                artifact: Artifact::Csv(csv_string(|w| io::write_expectation_csv(w, &rows))?),
                summary: format!("rand expectation: r = {r}, minimum {min} at C = {cmin}"),
                verified: true,
            })
        }
        RandAction::Bound { r, k_min, k_max, step, .. } => {
            let r = pick_r(*r);
            if !(*step > 0.0 && *step <= 1.0) || k_min > k_max || *k_min == 0 {
                return Err(usage("need 0 < --step <= 1 and 1 <= --k-min <= --k-max"));
            }
            let g = randomized::g_of(r);
            let count = (1.0 / step).round() as usize;
            let mut rows = Vec::new();
            for k in *k_min..=*k_max {
                for j in 1..=count {
                    let delta = (j as f64 * step).min(1.0);
                    let i = match randomized::integral_bound(k, delta, r) {
                        Ok(b) => Some(b.integral_value),
                        Err(incmax::Error::HypothesisViolated(_)) => None,
                        Err(e) => return Err(e.into()),
                    };
                    rows.push((k, delta, i, g));
                }
            }
            let min = rows.iter().filter_map(|x| x.2).fold(f64::INFINITY, f64::min);
            Ok(Report {
                artifact: Artifact::Csv(csv_string(|w| io::write_bound_grid_csv(w, &rows))?),
                summary: format!("rand bound: min I = {min}, g(r) = {g}, ratio 1/g = {}", 1.0 / g),
                verified: min >= g - 1e-6,
            })
        }
        RandAction::Run { instance, seed, r, .. } => {
            let inst = io::parse_separable::<Exact>(&read(instance)?)?;
            let run = randomized::run_randomized_with(&inst, *seed, pick_r(*r))?;
            Ok(Report {
                artifact: Artifact::Csv(csv_string(|w| io::write_sizes_csv(w, &run.sizes))?),
                summary: format!("rand run: seed {seed}, eps = {}, {} sizes", run.eps, run.sizes.len()),
                verified: true,
            })
        }
    }
}

fn classes(c: ClassArg) -> Vec<SolutionClass> {
    match c {
        ClassArg::Bounded => vec![SolutionClass::Bounded],
        ClassArg::Generous => vec![SolutionClass::Generous],
        ClassArg::Both => vec![SolutionClass::Bounded, SolutionClass::Generous],
    }
}

fn class_name(c: SolutionClass) -> &'static str {
    match c {
        SolutionClass::Bounded => "bounded",
        SolutionClass::Generous => "generous",
    }
}

fn yao_cmd(action: &YaoAction) -> anyhow::Result<Report> {
    match action {
        YaoAction::Verify { cert, class, .. } => {
            let cert: YaoCertificate<Exact> = match cert {
                None => yao::reference_certificate(),
                Some(p) => io::parse_yao_certificate(&read(p)?).with_context(|| format!("certificate {}", p.display()))?,
            };
            let mut out = serde_json::Map::new();
            let mut worst = f64::INFINITY;
            let mut parts = Vec::new();
            for c in classes(*class) {
                let clamped = yao::yao_bound_with(&cert, c, AlgReading::Clamped)?;
                let literal = yao::yao_bound_with(&cert, c, AlgReading::Literal)?;
                worst = worst.min(clamped.rho.as_f64());
                parts.push(format!("{} {:.6}", class_name(c), clamped.rho.as_f64()));
                out.insert(
                    class_name(c).into(),
                    json!({
                        "rho": io::text(&clamped.rho),
                        "rho_f64": clamped.rho.as_f64(),
                        "argmin": clamped.argmin,
                        "algorithms": clamped.algorithms,
                        "literal_rho": literal.rho.as_f64(),
                        "literal_argmin": literal.argmin,
                    }),
                );
            }
            out.insert("claimed_rho".into(), json!(cert.claimed_rho));
            let verified = worst >= cert.claimed_rho - 1e-3;
            Ok(Report {
                artifact: Artifact::Json(pretty(&Value::Object(out))),
                summary: format!("yao verify: {} (claimed {})", parts.join(", "), cert.claimed_rho),
                verified,
            })
        }
        YaoAction::Search { n, budget, seed, class, .. } => {
            let class = match class {
                ClassArg::Bounded => SolutionClass::Bounded,
                ClassArg::Generous => SolutionClass::Generous,
                ClassArg::Both => return Err(usage("search needs a single --class")),
            };
            let opts = yao::SearchOptions { budget: *budget, seed: *seed, class, ..Default::default() };
            let mut cert = yao::search_certificate_with(*n, &opts)?;
            let bound = yao::yao_bound(&cert, class)?;
            cert.claimed_rho = bound.rho.as_f64();
            Ok(Report {
                artifact: Artifact::Json(io::yao_certificate_to_json(&cert)),
                summary: format!("yao search: N = {n}, rho = {} ({})", bound.rho.as_f64(), io::text(&bound.rho)),
                verified: true,
            })
        }
    }
}

fn reduce(instance: &Path) -> anyhow::Result<Report> {
    let oracle: Fixture<Exact> = io::parse_fixture(&read(instance)?)?;
    let report = is_accountable(&oracle)?;
    let sep = reduce_to_separable(&oracle)?;
    Ok(Report {
        artifact: Artifact::Json(io::separable_to_json(&sep)),
        summary: format!("reduce: {} sets, accountable = {}", sep.n(), report.holds),
        verified: report.holds,
    })
}

fn discretize_cmd(instance: &Option<PathBuf>, n: usize, count: usize) -> anyhow::Result<Report> {
    let f: PiecewiseLinearValue<Exact> = load_pl(instance)?;
    let sep = discretize(&f, n, count)?;
    Ok(Report {
        artifact: Artifact::Json(io::separable_to_json(&sep)),
        summary: format!("discretize: {count} sets at granularity {n}"),
        verified: true,
    })
}

fn profile(instance: &Path, solution: &Option<Vec<usize>>) -> anyhow::Result<Report> {
    let inst = separable::normalize(&io::parse_separable::<Exact>(&read(instance)?)?)?;
    let (sol, ratio) = match solution {
        Some(s) => (s.clone(), competitive_ratio(&inst, s)?),
        None => best_deterministic(&inst)?,
    };
    let rows = value_profile(&inst, &sol)?;
    let ratio = match ratio {
        CompetitiveRatio::Finite(r) => format!("{} ({})", io::text(&r), r.as_f64()),
        CompetitiveRatio::Infinite { first_zero } => format!("infinite (zero value at {first_zero})"),
    };
    Ok(Report {
        artifact: Artifact::Csv(csv_string(|w| io::write_profile_csv(w, &rows))?),
        summary: format!("profile: solution {sol:?}, ratio {ratio}"),
        verified: true,
    })
}

fn write_file(path: &Path, content: &str) -> anyhow::Result<()> {
    std::fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

fn dispatch(cmd: &Command) -> anyhow::Result<(Report, Output)> {
    let out = |o: &Output| o.clone();
    Ok(match cmd {
        Command::Greedy { instance, rho, c1, horizon, exact, output } => (
            if *exact { greedy::<Exact>(instance, rho, c1, horizon) } else { greedy::<f64>(instance, rho, c1, horizon) }?,
            out(output),
        ),
        Command::Check { instance, rho, solution, exact, output } => (
            if *exact { check::<Exact>(instance, rho, solution) } else { check::<f64>(instance, rho, solution) }?,
            out(output),
        ),
        Command::Exclude { instance, rho, starts, output } => (exclude(instance, *rho, starts)?, out(output)),
        Command::Detlb { rho, eps, trace, output } => (detlb(*rho, *eps, trace)?, out(output)),
        Command::Roots { output } => (roots()?, out(output)),
        Command::Recur { variant, rho, eps, alpha, beta, steps, output } => {
            (recur(*variant, *rho, *eps, *alpha, *beta, *steps)?, out(output))
        }
        Command::Rand { action } => {
            let o = match action {
                RandAction::Expectation { output, .. } | RandAction::Bound { output, .. } | RandAction::Run { output, .. } => output,
            };
            (rand_cmd(action)?, out(o))
        }
        Command::Yao { action } => {
            let o = match action {
                YaoAction::Verify { output, .. } | YaoAction::Search { output, .. } => output,
            };
            (yao_cmd(action)?, out(o))
        }
        Command::Reduce { instance, output } => (reduce(instance)?, out(output)),
        Command::Discretize { instance, n, count, output } => (discretize_cmd(instance, *n, *count)?, out(output)),
        Command::Profile { instance, solution, output } => (profile(instance, solution)?, out(output)),
    })
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let (report, output) = dispatch(&cli.command)?;
    let text = report.artifact.render(output.format)?;
    match &output.out {
        Some(path) => {
            write_file(path, &text)?;
            println!("{}", report.summary);
        }
        None => {
            print!("{text}");
            eprintln!("{}", report.summary);
        }
    }
    Ok(report.verified)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(e) => {
            // rejected input and failed operations both end here
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
