//! `bertini` — density experiments on hypersurface sections over small
//! finite fields.
//!
//! One verb per capability: `sweep` and `sample` measure statistic
//! densities (exhaustively or by Monte Carlo), `zeta` and `product`
//! evaluate the closed-form point products, `components` decomposes plane
//! and space curves, `antibertini` searches for a surface whose rational
//! plane sections are all reducible, `through-points` finds an irreducible
//! section through prescribed closed points, and `verify` replays a stored
//! certificate.
//!
//! Runs are deterministic: equal configurations produce byte-identical
//! output files (wall-clock timings are only written under `--timings`).
//! Exit codes: 0 success, 1 honest negative outcomes (indeterminate votes,
//! exhausted searches, unverified certificates), 2 usage errors.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num::ToPrimitive;

use bertini_core::antibertini::{
    find_antibertini_surface, section_through_set, verify_certificate, Certificate,
};
use bertini_core::density::{
    eval_statistic, sample_mc, sweep_exhaustive, truncated_zeta_product, DensityReport, Mode,
    Statistic, StatisticKind,
};
use bertini_core::error::Error;
use bertini_core::factor2::{plane_curve_components, Decomposition};
use bertini_core::forms::{parse_elem, parse_form, ProjPoint};
use bertini_core::geom::{space_curve_components, ClosedPoint, VarietySpec};
use bertini_core::gf::{factor_prime_power, FieldCtx};
use bertini_core::Config;

#[derive(Parser)]
#[command(
    name = "bertini",
    about = "Measure irreducibility densities of hypersurface sections over small finite fields",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Field order q = p^k.
    #[arg(long, default_value_t = 2)]
    q: u64,
    /// Master seed for all randomized steps.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = machine parallelism).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for record-shaped results.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Include wall-clock milliseconds in records (off keeps reruns
    /// byte-identical).
    #[arg(long, default_value_t = false)]
    timings: bool,
    /// Optional key=value bounds file (flags still win).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override: max exhaustive sweep classes.
    #[arg(long)]
    sweep_bound: Option<u64>,
    /// Override: max enumerated affine tuples.
    #[arg(long)]
    enum_bound: Option<u64>,
    /// Override: max bivariate factorization degree.
    #[arg(long)]
    degree_bound: Option<usize>,
    /// Override: max extension degree for meets-x searches.
    #[arg(long)]
    meets_emax: Option<usize>,
    /// Override: projection retry budget.
    #[arg(long)]
    retries: Option<usize>,
    /// Override: max extension step for distinctness checks.
    #[arg(long)]
    distinct_emax: Option<usize>,
    /// Override: restriction-plane certification budget.
    #[arg(long)]
    cert_budget: Option<usize>,
    /// Override: max public field order.
    #[arg(long)]
    field_bound: Option<u64>,
}

#[derive(Args, Clone)]
struct VarietyOpts {
    /// Ambient projective dimension n (variables x0..xn).
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Defining forms of X, semicolon-separated (empty = all of P^n).
    #[arg(long, default_value = "")]
    x: String,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive density of a statistic over S_d, exact.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        variety: VarietyOpts,
        /// Statistic id.
        #[arg(long, value_parser = [
            "geom-irred", "component-bijection", "vanishes-on-x",
            "meets-x", "vanishes-at", "squarefree"
        ])]
        stat: String,
        /// Closed points for vanishes-at: "c0:c1:..:cn[@e]" semicolon-separated.
        #[arg(long, default_value = "")]
        points: String,
        /// Degree or inclusive range "a..b".
        #[arg(long)]
        d: String,
    },
    /// Monte Carlo density estimate with a Wilson interval.
    Sample {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        variety: VarietyOpts,
        #[arg(long, value_parser = [
            "geom-irred", "component-bijection", "vanishes-on-x",
            "meets-x", "vanishes-at", "squarefree"
        ])]
        stat: String,
        #[arg(long, default_value = "")]
        points: String,
        #[arg(long)]
        d: String,
        /// Trials per degree.
        #[arg(long, default_value_t = 2000)]
        trials: u64,
    },
    /// Truncated zeta product over the closed points of X of degree < r.
    Zeta {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        variety: VarietyOpts,
        #[arg(long)]
        r: usize,
    },
    /// Point product  prod (1 - q^-deg)  for a list of degrees.
    Product {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated closed-point degrees, e.g. "1,2,2".
        #[arg(long)]
        degs: String,
    },
    /// Component decomposition of a plane curve (--f) or space curve
    /// (--g with --f).
    Components {
        #[command(flatten)]
        common: CommonOpts,
        /// Section form.
        #[arg(long)]
        f: String,
        /// Surface form in P^3; omit for a plane curve in P^2.
        #[arg(long)]
        g: Option<String>,
    },
    /// Search for a surface containing every rational line of P^3.
    Antibertini {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 16)]
        dmax: usize,
        /// Kernel samples per degree.
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Find an irreducible hypersurface section through closed points.
    ThroughPoints {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        variety: VarietyOpts,
        #[arg(long, default_value = "")]
        points: String,
        #[arg(long, default_value_t = 8)]
        dmax: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Replay every claim of a stored certificate.
    Verify {
        #[command(flatten)]
        common: CommonOpts,
        /// Certificate path (JSON, as written by `antibertini`).
        #[arg(long)]
        cert: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.reason());
            if e.is_outcome() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

/// Honest negative outcomes (indeterminate votes, exhausted searches) still
/// write a machine-parsable record and exit 1; usage errors propagate.
fn outcome_record(
    e: Error,
    common: &CommonOpts,
    cfg: &Config,
    detail: &str,
) -> Result<ExitCode, Error> {
    if !e.is_outcome() {
        return Err(e);
    }
    eprintln!("outcome: {}", e.reason());
    let mut sink = Sink::new(common.out.clone());
    if common.format == "csv" {
        sink.line(&format!("# config: {}", run_echo(common, cfg, detail)));
        sink.line(&format!("# error: {}", e.reason()));
    } else {
        sink.line(
            &serde_json::json!({
                "error": e.reason(),
                "run": run_echo(common, cfg, detail),
            })
            .to_string(),
        );
    }
    sink.finish()?;
    Ok(ExitCode::from(1))
}

fn build_config(common: &CommonOpts) -> Result<Config, Error> {
    let mut cfg = Config::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("config file {}: {}", path.display(), e)))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Invalid(format!(
                    "config line {}: expected key=value",
                    lineno + 1
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            let parse_u64 = || {
                value
                    .parse::<u64>()
                    .map_err(|_| Error::Invalid(format!("config {}: bad integer", key)))
            };
            match key {
                "max_field_order" => cfg.max_field_order = parse_u64()?,
                "max_sweep_classes" => cfg.max_sweep_classes = parse_u64()?,
                "max_enum_points" => cfg.max_enum_points = parse_u64()?,
                "max_bivariate_degree" => cfg.max_bivariate_degree = parse_u64()? as usize,
                "meets_extension_max" => cfg.meets_extension_max = parse_u64()? as usize,
                "projection_retries" => cfg.projection_retries = parse_u64()? as usize,
                "distinct_extension_max" => cfg.distinct_extension_max = parse_u64()? as usize,
                "restriction_plane_budget" => {
                    cfg.restriction_plane_budget = parse_u64()? as usize
                }
                _ => return Err(Error::Invalid(format!("config: unknown key {}", key))),
            }
        }
    }
    if let Some(v) = common.sweep_bound {
        cfg.max_sweep_classes = v;
    }
    if let Some(v) = common.enum_bound {
        cfg.max_enum_points = v;
    }
    if let Some(v) = common.degree_bound {
        cfg.max_bivariate_degree = v;
    }
    if let Some(v) = common.meets_emax {
        cfg.meets_extension_max = v;
    }
    if let Some(v) = common.retries {
        cfg.projection_retries = v;
    }
    if let Some(v) = common.distinct_emax {
        cfg.distinct_extension_max = v;
    }
    if let Some(v) = common.cert_budget {
        cfg.restriction_plane_budget = v;
    }
    if let Some(v) = common.field_bound {
        cfg.max_field_order = v;
    }
    Ok(cfg)
}

fn field_for(common: &CommonOpts, cfg: &Config) -> Result<FieldCtx, Error> {
    let (p, k) = factor_prime_power(common.q)
        .ok_or_else(|| Error::Invalid(format!("--q {} is not a prime power", common.q)))?;
    FieldCtx::with_bound(p, k, cfg.max_field_order)
}

fn init_threads(common: &CommonOpts) {
    if common.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build_global();
    }
}

fn parse_variety(v: &VarietyOpts, ctx: &FieldCtx) -> Result<VarietySpec, Error> {
    let texts: Vec<&str> = v
        .x
        .split(';')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .collect();
    match texts.len() {
        0 => Ok(VarietySpec::full_space(ctx, v.n)),
        1 => VarietySpec::hypersurface(parse_form(texts[0], v.n, ctx)?),
        2 => VarietySpec::curve_intersection(
            parse_form(texts[0], v.n, ctx)?,
            parse_form(texts[1], v.n, ctx)?,
        ),
        n => Err(Error::Invalid(format!(
            "--x supports at most 2 defining forms, got {}",
            n
        ))),
    }
}

/// "c0:c1:..:cn[@e]" with coordinates over F_{q^e} in t-syntax.
fn parse_points(text: &str, n: usize, base: &FieldCtx) -> Result<Vec<ClosedPoint>, Error> {
    let mut out = vec![];
    for part in text.split(';').map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let (coords_text, e) = match part.split_once('@') {
            Some((c, e)) => (
                c,
                e.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("point extension in '{}'", part)))?,
            ),
            None => (part, 1),
        };
        if e == 0 {
            return Err(Error::Parse("point extension must be >= 1".into()));
        }
        let ext = FieldCtx::with_bound(
            base.p(),
            base.k() * e,
            u64::MAX >> 1, // representability only; enumeration is not involved
        )?;
        let coords: Vec<_> = coords_text
            .split(':')
            .map(|c| parse_elem(c.trim(), &ext))
            .collect::<Result<_, _>>()?;
        if coords.len() != n + 1 {
            return Err(Error::Parse(format!(
                "point '{}' needs {} coordinates",
                part,
                n + 1
            )));
        }
        out.push(ClosedPoint::new(ProjPoint::new(coords)?, base)?);
    }
    Ok(out)
}

fn parse_degrees(d: &str) -> Result<Vec<usize>, Error> {
    let d = d.trim();
    if let Some((a, b)) = d.split_once("..") {
        let a: usize = a
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("degree range '{}'", d)))?;
        let b: usize = b
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("degree range '{}'", d)))?;
        if a == 0 || b < a {
            return Err(Error::Parse(format!("degree range '{}'", d)))?;
        }
        Ok((a..=b).collect())
    } else {
        let v: usize = d
            .parse()
            .map_err(|_| Error::Parse(format!("degree '{}'", d)))?;
        if v == 0 {
            return Err(Error::Parse("degree must be >= 1".into()));
        }
        Ok(vec![v])
    }
}

fn build_statistic(
    stat: &str,
    variety: VarietySpec,
    points_text: &str,
    ctx: &FieldCtx,
) -> Result<Statistic, Error> {
    let kind = match stat {
        "geom-irred" => StatisticKind::GeomIrreducibleSection,
        "component-bijection" => StatisticKind::ComponentBijection,
        "vanishes-on-x" => StatisticKind::VanishesOnX,
        "meets-x" => StatisticKind::MeetsX,
        "squarefree" => StatisticKind::SquarefreeSection,
        "vanishes-at" => {
            let pts = parse_points(points_text, variety.n(), ctx)?;
            if pts.is_empty() {
                return Err(Error::Invalid(
                    "vanishes-at needs at least one --points entry".into(),
                ));
            }
            StatisticKind::VanishesAtSet(pts)
        }
        other => return Err(Error::Invalid(format!("unknown statistic {}", other))),
    };
    Statistic::new(kind, variety)
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

const CSV_HEADER: &str = "statistic,q,n,d,mode,trials,successes,density_num,density_den,estimate,ci_lo,ci_hi,seed,wall_ms";

struct Sink {
    out: Option<PathBuf>,
    buf: String,
}

impl Sink {
    fn new(out: Option<PathBuf>) -> Sink {
        Sink {
            out,
            buf: String::new(),
        }
    }
    fn line(&mut self, s: &str) {
        self.buf.push_str(s);
        self.buf.push('\n');
    }
    fn finish(self) -> Result<(), Error> {
        match self.out {
            Some(path) => fs::write(&path, self.buf)
                .map_err(|e| Error::Invalid(format!("writing {}: {}", path.display(), e))),
            None => {
                print!("{}", self.buf);
                std::io::stdout().flush().ok();
                Ok(())
            }
        }
    }
}

fn report_csv_row(r: &DensityReport, timings: bool) -> String {
    let (num, den) = match &r.density {
        Some(d) => (d.numer().to_string(), d.denom().to_string()),
        None => (String::new(), String::new()),
    };
    let (lo, hi) = match r.ci {
        Some((lo, hi)) => (lo.to_string(), hi.to_string()),
        None => (String::new(), String::new()),
    };
    let wall = if timings {
        r.wall.as_millis().to_string()
    } else {
        String::new()
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.statistic,
        r.q,
        r.n,
        r.d,
        r.mode,
        r.trials,
        r.successes,
        num,
        den,
        r.estimate,
        lo,
        hi,
        r.seed,
        wall
    )
}

fn report_json(r: &DensityReport, timings: bool, cfg: &Config, extra: &str) -> String {
    let mut obj = serde_json::json!({
        "statistic": r.statistic,
        "variety": r.variety,
        "q": r.q,
        "n": r.n,
        "d": r.d,
        "mode": r.mode.to_string(),
        "trials": r.trials,
        "successes": r.successes,
        "estimate": r.estimate,
        "seed": r.seed,
        "config": cfg.echo(),
        "run": extra,
    });
    if let Some(d) = &r.density {
        obj["density_num"] = serde_json::json!(d.numer().to_string());
        obj["density_den"] = serde_json::json!(d.denom().to_string());
    }
    if let Some((lo, hi)) = r.ci {
        obj["ci_lo"] = serde_json::json!(lo);
        obj["ci_hi"] = serde_json::json!(hi);
    }
    if timings {
        obj["wall_ms"] = serde_json::json!(r.wall.as_millis() as u64);
    }
    obj.to_string()
}

/// The full effective run configuration, echoed into every output so the
/// run can be replayed.
fn run_echo(common: &CommonOpts, cfg: &Config, detail: &str) -> String {
    format!(
        "q={};seed={};format={};{};{}",
        common.q,
        common.seed,
        common.format,
        detail,
        cfg.echo()
    )
}

fn synth_report(statistic: &str, q: u64, n: usize, d: usize, value: num::BigRational) -> DensityReport {
    let estimate = value.to_f64().unwrap_or(f64::NAN);
    DensityReport {
        statistic: statistic.into(),
        variety: String::new(),
        q,
        n,
        d,
        mode: Mode::Exhaustive,
        trials: 0,
        successes: 0,
        density: Some(value),
        estimate,
        ci: None,
        seed: 0,
        wall: std::time::Duration::ZERO,
    }
}

fn emit_reports(
    reports: &[DensityReport],
    common: &CommonOpts,
    cfg: &Config,
    detail: &str,
) -> Result<(), Error> {
    let mut sink = Sink::new(common.out.clone());
    let echo = run_echo(common, cfg, detail);
    if common.format == "csv" {
        sink.line(&format!("# config: {}", echo));
        sink.line(CSV_HEADER);
        for r in reports {
            sink.line(&report_csv_row(r, common.timings));
        }
    } else {
        for r in reports {
            sink.line(&report_json(r, common.timings, cfg, &echo));
        }
    }
    sink.finish()
}

fn decomposition_rows(
    dec: &Decomposition,
    common: &CommonOpts,
    cfg: &Config,
    g: Option<&str>,
    f: &str,
    n: usize,
) -> Result<(), Error> {
    let mut sink = Sink::new(common.out.clone());
    let detail = format!("cmd=components;n={};g={};f={}", n, g.unwrap_or(""), f);
    let echo = run_echo(common, cfg, &detail);
    if common.format == "csv" {
        sink.line(&format!("# config: {}", echo));
        sink.line("q,n,g,f,seed,base_order,rational_components,geometric_components,component,field_degree,field_order,multiplicity,factor");
        for (i, s) in dec.summaries().iter().enumerate() {
            sink.line(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},\"{}\"",
                common.q,
                n,
                g.unwrap_or(""),
                f,
                common.seed,
                dec.base().order(),
                dec.rational_components(),
                dec.geometric_components(),
                i,
                s.field_degree,
                s.field_order,
                s.multiplicity,
                s.factor
            ));
        }
    } else {
        let obj = serde_json::json!({
            "q": common.q,
            "n": n,
            "g": g,
            "f": f,
            "seed": common.seed,
            "base_order": dec.base().order(),
            "rational_components": dec.rational_components(),
            "geometric_components": dec.geometric_components(),
            "components": dec.summaries(),
            "run": echo,
        });
        sink.line(&obj.to_string());
    }
    sink.finish()
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Sweep {
            common,
            variety,
            stat,
            points,
            d,
        } => {
            let cfg = build_config(&common)?;
            init_threads(&common);
            let ctx = field_for(&common, &cfg)?;
            let v = parse_variety(&variety, &ctx)?;
            let statistic = build_statistic(&stat, v, &points, &ctx)?;
            let degrees = parse_degrees(&d)?;
            let detail = format!(
                "cmd=sweep;stat={};n={};x={};points={};d={}",
                stat, variety.n, variety.x, points, d
            );
            let mut reports = vec![];
            for d in &degrees {
                match sweep_exhaustive(&statistic, *d, common.seed, &cfg) {
                    Ok(r) => reports.push(r),
                    Err(e) => return outcome_record(e, &common, &cfg, &detail),
                }
            }
            emit_reports(&reports, &common, &cfg, &detail)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sample {
            common,
            variety,
            stat,
            points,
            d,
            trials,
        } => {
            let cfg = build_config(&common)?;
            init_threads(&common);
            let ctx = field_for(&common, &cfg)?;
            let v = parse_variety(&variety, &ctx)?;
            let statistic = build_statistic(&stat, v, &points, &ctx)?;
            let degrees = parse_degrees(&d)?;
            let detail = format!(
                "cmd=sample;stat={};n={};x={};points={};d={};trials={}",
                stat, variety.n, variety.x, points, d, trials
            );
            let mut reports = vec![];
            for d in &degrees {
                match sample_mc(&statistic, *d, trials, common.seed, &cfg) {
                    Ok(r) => reports.push(r),
                    Err(e) => return outcome_record(e, &common, &cfg, &detail),
                }
            }
            emit_reports(&reports, &common, &cfg, &detail)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Zeta { common, variety, r } => {
            let cfg = build_config(&common)?;
            let ctx = field_for(&common, &cfg)?;
            let v = parse_variety(&variety, &ctx)?;
            let value = truncated_zeta_product(&v, r, &cfg)?;
            let report = synth_report("zeta-truncated", common.q, variety.n, r, value);
            let detail = format!("cmd=zeta;n={};x={};r={}", variety.n, variety.x, r);
            emit_reports(&[report], &common, &cfg, &detail)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Product { common, degs } => {
            let cfg = build_config(&common)?;
            let _ = field_for(&common, &cfg)?;
            let mut value = num::BigRational::from_integer(1.into());
            for part in degs.split(',').map(|s| s.trim()).filter(|s| !s.is_empty()) {
                let e: usize = part
                    .parse()
                    .map_err(|_| Error::Parse(format!("--degs entry '{}'", part)))?;
                if e == 0 {
                    return Err(Error::Parse("point degrees must be >= 1".into()));
                }
                let q = num::BigInt::from(common.q);
                let qe = num::pow::pow(q, e);
                value *= num::BigRational::new(qe.clone() - 1, qe);
            }
            let report = synth_report("point-product", common.q, 0, 0, value);
            let detail = format!("cmd=product;degs={}", degs);
            emit_reports(&[report], &common, &cfg, &detail)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Components { common, f, g } => {
            let cfg = build_config(&common)?;
            init_threads(&common);
            let ctx = field_for(&common, &cfg)?;
            let detail = format!("cmd=components;g={};f={}", g.as_deref().unwrap_or(""), f);
            let run = || -> Result<(Decomposition, usize), Error> {
                match &g {
                    Some(gtext) => {
                        let gform = parse_form(gtext, 3, &ctx)?;
                        let fform = parse_form(&f, 3, &ctx)?;
                        Ok((space_curve_components(&gform, &fform, common.seed, &cfg)?, 3))
                    }
                    None => {
                        let fform = parse_form(&f, 2, &ctx)?;
                        Ok((
                            plane_curve_components(&fform, common.seed, cfg.max_bivariate_degree)?,
                            2,
                        ))
                    }
                }
            };
            let (dec, n) = match run() {
                Ok(v) => v,
                Err(e) => return outcome_record(e, &common, &cfg, &detail),
            };
            decomposition_rows(&dec, &common, &cfg, g.as_deref(), &f, n)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Antibertini {
            common,
            dmax,
            samples,
        } => {
            let cfg = build_config(&common)?;
            init_threads(&common);
            let ctx = field_for(&common, &cfg)?;
            let detail = format!("cmd=antibertini;dmax={};samples={}", dmax, samples);
            let cert = match find_antibertini_surface(&ctx, dmax, samples, common.seed, &cfg) {
                Ok(c) => c,
                Err(e) => return outcome_record(e, &common, &cfg, &detail),
            };
            let mut sink = Sink::new(common.out.clone());
            sink.line(
                &serde_json::to_string_pretty(&cert)
                    .map_err(|e| Error::Invalid(format!("serialize: {}", e)))?,
            );
            sink.finish()?;
            if cert.is_certified() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("note: certificate is unverified (exit 1); transcript written");
                Ok(ExitCode::from(1))
            }
        }
        Command::ThroughPoints {
            common,
            variety,
            points,
            dmax,
            samples,
        } => {
            let cfg = build_config(&common)?;
            init_threads(&common);
            let ctx = field_for(&common, &cfg)?;
            let v = parse_variety(&variety, &ctx)?;
            let pts = parse_points(&points, variety.n, &ctx)?;
            let detail = format!("cmd=through-points;points={};dmax={}", points, dmax);
            let res = match section_through_set(&v, &pts, dmax, samples, common.seed, &cfg) {
                Ok(r) => r,
                Err(e) => return outcome_record(e, &common, &cfg, &detail),
            };
            // Replay before reporting: vanishing plus irreducibility.
            for p in &pts {
                assert!(res.form.evaluate(p.representative())?.is_zero());
            }
            let stat = Statistic::new(
                StatisticKind::GeomIrreducibleSection,
                parse_variety(&variety, &ctx)?,
            )?;
            assert!(eval_statistic(&stat, &res.form, common.seed, &cfg)?);
            let mut sink = Sink::new(common.out.clone());
            let obj = serde_json::json!({
                "q": common.q,
                "n": variety.n,
                "x": variety.x,
                "points": points,
                "d": res.d,
                "form": res.form_text,
                "attempts": res.attempts,
                "seed": common.seed,
                "replayed": true,
                "run": run_echo(&common, &cfg, "cmd=through-points"),
            });
            sink.line(&serde_json::to_string_pretty(&obj).unwrap());
            sink.finish()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { common, cert } => {
            let cfg = build_config(&common)?;
            init_threads(&common);
            let text = fs::read_to_string(&cert)
                .map_err(|e| Error::Invalid(format!("reading {}: {}", cert.display(), e)))?;
            let certificate: Certificate = serde_json::from_str(&text)
                .map_err(|e| Error::Invalid(format!("certificate parse: {}", e)))?;
            let checks = match verify_certificate(&certificate, &cfg) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("verification failed: {}", e.reason());
                    return Ok(ExitCode::from(1));
                }
            };
            let mut sink = Sink::new(common.out.clone());
            for c in &checks {
                sink.line(&format!("ok {}", c));
            }
            sink.line(&format!(
                "certificate replayed: degree={} status={}",
                certificate.degree,
                if certificate.is_certified() {
                    "certified"
                } else {
                    "unverified"
                }
            ));
            sink.finish()?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
