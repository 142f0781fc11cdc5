//! `mlkit`: evaluate, tabulate, verify and bound Mittag-Leffler functions.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mlkit::asymptotics::{estimate_bound, log_grid, Expansion};
use mlkit::crosscheck::{format_sig, reports_to_csv, reports_to_json, run_checks, CheckConfig, DEFAULT_SEED};
use mlkit::{evaluate, MLParams, MethodChoice, MlError, Outcome64, Params64};
use num_complex::Complex;
use rayon::prelude::*;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "mlkit", version, about = "Mittag-Leffler functions t^(β-1) E_{α,β}(λ t^α)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate at a single t
    Eval {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Tabulate over a range of t
    Table {
        #[command(flatten)]
        params: ParamArgs,
        /// start:stop:count, logarithmically spaced
        #[arg(long, value_parser = parse_log_range, conflicts_with = "t_lin", required_unless_present = "t_lin")]
        t_log: Option<TimeGrid>,
        /// start:stop:count, evenly spaced
        #[arg(long, value_parser = parse_lin_range)]
        t_lin: Option<TimeGrid>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run verification checks ("all" for every registered check)
    Verify {
        #[arg(required = true)]
        checks: Vec<String>,
        /// Sample count for the randomized checks
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Estimate the constant of the large-t bound on |value - residue|
    Bounds {
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        lambda: LambdaArgs,
        /// 24: β = 1, weight t^α; 25: β = α, weight t^(α+1)
        #[arg(long, value_parser = ["24", "25"])]
        eq: String,
        /// Upper end of the log-spaced t grid starting at 0.01
        #[arg(long, default_value_t = 1e3)]
        t_max: f64,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(2..))]
        points: u64,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
struct LambdaArgs {
    /// Real λ
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["lambda_re", "lambda_im"])]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda_re: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda_im: Option<f64>,
}

impl LambdaArgs {
    /// Defaults to λ = 1.
    fn value(&self) -> Complex<f64> {
        match self.lambda {
            Some(l) => Complex::new(l, 0.0),
            None if self.lambda_re.is_none() && self.lambda_im.is_none() => Complex::new(1.0, 0.0),
            None => Complex::new(self.lambda_re.unwrap_or(0.0), self.lambda_im.unwrap_or(0.0)),
        }
    }
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    beta: f64,
    #[command(flatten)]
    lambda: LambdaArgs,
}

impl ParamArgs {
    fn params(&self) -> mlkit::Result<Params64> {
        MLParams::new(self.alpha, self.beta, self.lambda.value())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Plain,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Series,
    Repr,
    Asympt,
}

impl From<MethodArg> for MethodChoice {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::Series => MethodChoice::Series,
            MethodArg::Repr => MethodChoice::Repr,
            MethodArg::Asympt => MethodChoice::Asympt,
        }
    }
}

#[derive(Args)]
struct ConfigArgs {
    /// Requested accuracy, in (1e-15, 1e-2)
    #[arg(long, default_value_t = 1e-10, value_parser = parse_tol)]
    tol: f64,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let tol: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(tol > 1e-15 && tol < 1e-2) {
        return Err(format!("tolerance must lie in (1e-15, 1e-2), got {tol}"));
    }
    Ok(tol)
}

/// Parsed `start:stop:count` range.
#[derive(Clone)]
struct TimeGrid(Vec<f64>);

fn parse_range(s: &str, log: bool) -> Result<TimeGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err("expected start:stop:count".into());
    };
    let start: f64 = start.parse().map_err(|_| format!("bad start '{start}'"))?;
    let stop: f64 = stop.parse().map_err(|_| format!("bad stop '{stop}'"))?;
    let count: usize = count.parse().map_err(|_| format!("bad count '{count}'"))?;
    if !(start.is_finite() && stop.is_finite() && start < stop) {
        return Err(format!("need start < stop, got {start}:{stop}"));
    }
    if count < 2 {
        return Err(format!("need count >= 2, got {count}"));
    }
    if log && !(start > 0.0) {
        return Err(format!("logarithmic spacing needs start > 0, got {start}"));
    }
    if !log && start < 0.0 {
        return Err(format!("t must be non-negative, got start {start}"));
    }
    Ok(TimeGrid(if log {
        log_grid(start, stop, count)
    } else {
        let step = (stop - start) / (count - 1) as f64;
        (0..count).map(|i| start + step * i as f64).collect()
    }))
}

fn parse_log_range(s: &str) -> Result<TimeGrid, String> {
    parse_range(s, true)
}

fn parse_lin_range(s: &str) -> Result<TimeGrid, String> {
    parse_range(s, false)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("MLKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("MLKIT_THREADS must be a non-negative integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match cli.command {
        Command::Eval { params, t, config } => cmd_eval(&params, t, &config),
        Command::Table {
            params,
            t_log,
            t_lin,
            config,
        } => cmd_table(&params, &t_log.or(t_lin).map(|g| g.0).unwrap_or_default(), &config),
        Command::Verify { checks, samples, config } => cmd_verify(&checks, samples, &config),
        Command::Bounds {
            alpha,
            lambda,
            eq,
            t_max,
            points,
            config,
        } => cmd_bounds(alpha, lambda.value(), &eq, t_max, points as usize, &config),
    };
    match result {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let status = match e {
                MlError::UnknownCheck { .. } => EXIT_USAGE,
                _ => EXIT_FAILURE,
            };
            ExitCode::from(status)
        }
    }
}

struct Output {
    text: String,
    status: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, status: 0 }
    }
}

const COLUMNS: [&str; 9] = [
    "alpha", "beta", "lambda_re", "lambda_im", "t", "value_re", "value_im", "method", "err_est",
];

struct Row {
    p: Params64,
    t: f64,
    out: Outcome64,
}

impl Row {
    fn numbers(&self) -> [f64; 7] {
        let l = self.p.lambda();
        [
            self.p.alpha(),
            self.p.beta(),
            l.re,
            l.im,
            self.t,
            self.out.value.re,
            self.out.value.im,
        ]
    }
}

fn json_row(row: &Row, with_region: bool) -> String {
    let mut s = String::from("{");
    for (name, x) in COLUMNS.iter().zip(row.numbers()) {
        let _ = write!(s, "\"{name}\":{},", json_number(x));
    }
    let _ = write!(s, "\"method\":\"{}\",", row.out.method.as_str());
    if with_region {
        let _ = write!(s, "\"region\":\"{}\",", row.out.region);
    }
    let _ = write!(s, "\"err_est\":{}}}", json_number(row.out.error_estimate));
    s
}

fn json_number(x: f64) -> String {
    if x.is_finite() {
        format_sig(x, 17)
    } else {
        "null".into()
    }
}

fn csv_row(row: &Row) -> String {
    let mut cells: Vec<String> = row.numbers().iter().map(|&x| format_sig(x, 17)).collect();
    cells.push(row.out.method.as_str().into());
    cells.push(format_sig(row.out.error_estimate, 17));
    cells.join(",")
}

fn plain_value(v: Complex<f64>) -> String {
    if v.im == 0.0 {
        format_sig(v.re, 10)
    } else {
        let sign = if v.im < 0.0 { '-' } else { '+' };
        format!("{} {sign} {}i", format_sig(v.re, 10), format_sig(v.im.abs(), 10))
    }
}

fn cmd_eval(args: &ParamArgs, t: f64, config: &ConfigArgs) -> mlkit::Result<Output> {
    let p = args.params()?;
    let out = evaluate(t, &p, config.method.into(), config.tol)?;
    let row = Row { p, t, out };
    let text = match config.format.unwrap_or(Format::Plain) {
        Format::Plain => format!(
            "value   {}\nmethod  {}\nregion  {}\nerr_est {}\n",
            plain_value(out.value),
            out.method.as_str(),
            out.region,
            format_sig(out.error_estimate, 10)
        ),
        Format::Csv => format!("{}\n{}\n", COLUMNS.join(","), csv_row(&row)),
        Format::Json => format!("{}\n", json_row(&row, true)),
    };
    Ok(Output::ok(text))
}

fn cmd_table(args: &ParamArgs, times: &[f64], config: &ConfigArgs) -> mlkit::Result<Output> {
    let p = args.params()?;
    let method = config.method.into();
    let results: Vec<mlkit::Result<Outcome64>> =
        times.par_iter().map(|&t| evaluate(t, &p, method, config.tol)).collect();
    let mut rows = Vec::with_capacity(times.len());
    for (&t, r) in times.iter().zip(results) {
        match r {
            Ok(out) => rows.push(Row { p, t, out }),
            Err(e) => return Err(MlError::Domain(format!("at t = {t}: {e}"))),
        }
    }
    let mut text = String::new();
    match config.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            text.push_str(&COLUMNS.join(","));
            text.push('\n');
            for row in &rows {
                text.push_str(&csv_row(row));
                text.push('\n');
            }
        }
        Format::Json => {
            let body: Vec<String> = rows.iter().map(|r| json_row(r, false)).collect();
            let _ = writeln!(text, "[{}]", body.join(",\n"));
        }
        Format::Plain => {
            let _ = writeln!(text, "{:>18} {:>36} {:>7} {:>18}", "t", "value", "method", "err_est");
            for row in &rows {
                let _ = writeln!(
                    text,
                    "{:>18} {:>36} {:>7} {:>18}",
                    format_sig(row.t, 10),
                    plain_value(row.out.value),
                    row.out.method.as_str(),
                    format_sig(row.out.error_estimate, 10)
                );
            }
        }
    }
    Ok(Output::ok(text))
}

fn cmd_verify(names: &[String], samples: Option<usize>, config: &ConfigArgs) -> mlkit::Result<Output> {
    let check_config = CheckConfig {
        seed: config.seed,
        samples,
        ..CheckConfig::default()
    };
    let reports = run_checks(names, &check_config)?;
    let passed = reports.iter().all(|r| r.passed);
    let mut text = match config.format.unwrap_or(Format::Json) {
        Format::Csv => reports_to_csv(&reports),
        Format::Json => reports_to_json(&reports),
        Format::Plain => reports
            .iter()
            .map(|r| {
                format!(
                    "{:<20} {} points={} max_rel={} max_abs={} threshold={}\n",
                    r.check_name,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.grid_points,
                    format_sig(r.max_rel_defect, 10),
                    format_sig(r.max_abs_defect, 10),
                    format_sig(r.threshold, 10)
                )
            })
            .collect(),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    Ok(Output {
        text,
        status: if passed { 0 } else { EXIT_FAILURE },
    })
}

fn cmd_bounds(
    alpha: f64,
    lambda: Complex<f64>,
    eq: &str,
    t_max: f64,
    points: usize,
    config: &ConfigArgs,
) -> mlkit::Result<Output> {
    let beta = if eq == "24" { 1.0 } else { alpha };
    let p = MLParams::new(alpha, beta, lambda)?;
    if !(t_max > 1e-2) || !t_max.is_finite() {
        return Err(MlError::ParameterDomain {
            name: "t_max",
            value: t_max,
            bound: "(0.01, ∞)".into(),
        });
    }
    let which = Expansion::for_params(&p)?;
    let b = estimate_bound(&p, &log_grid(1e-2, t_max, points), config.tol)?;
    let weight = match which {
        Expansion::BetaOne => "t^alpha",
        Expansion::BetaAlpha => "t^(alpha+1)",
    };
    let text = match config.format.unwrap_or(Format::Plain) {
        Format::Plain => format!(
            "constant   {}\nt_star     {}\ngrid_size  {}\ngrid_sup   {}\ntail_limit {}\nweight     {weight}\n",
            format_sig(b.constant, 10),
            format_sig(b.t_star, 10),
            b.grid_size,
            format_sig(b.grid_sup, 10),
            format_sig(b.tail_limit, 10)
        ),
        Format::Csv => format!(
            "alpha,lambda_re,lambda_im,eq,constant,t_star,grid_size,grid_sup,tail_limit\n{},{},{},{eq},{},{},{},{},{}\n",
            format_sig(alpha, 17),
            format_sig(lambda.re, 17),
            format_sig(lambda.im, 17),
            format_sig(b.constant, 17),
            format_sig(b.t_star, 17),
            b.grid_size,
            format_sig(b.grid_sup, 17),
            format_sig(b.tail_limit, 17)
        ),
        Format::Json => format!(
            "{{\"alpha\":{},\"lambda_re\":{},\"lambda_im\":{},\"eq\":{eq},\"constant\":{},\"t_star\":{},\"grid_size\":{},\"grid_sup\":{},\"tail_limit\":{}}}\n",
            json_number(alpha),
            json_number(lambda.re),
            json_number(lambda.im),
            json_number(b.constant),
            json_number(b.t_star),
            b.grid_size,
            json_number(b.grid_sup),
            json_number(b.tail_limit)
        ),
    };
    Ok(Output::ok(text))
}
