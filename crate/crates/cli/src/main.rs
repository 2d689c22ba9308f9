//! `qcalc`: evaluate q-special functions, certify q-monotonicity sign
//! patterns and run the theorem harnesses from the command line.
//!
//! Exit status: 0 when everything is consistent, 1 when a certification
//! found a violation (the report is still written), 2 on usage or domain
//! errors.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcalc::certify::{
    bernstein_iff_check, certify_with, classical_log_cm_harness, closure_checks, composition_closure, difference_check,
    gamma_log_cm_harness, gamma_ratio_harness, infinite_divisibility, log_cm_implies_cm, semigroup_harness,
    trigamma_cm_harness, CertSpec, Execution, Grid, HarnessReport, Named, Property, Spacing, CLASSICAL_STEP,
};
use qcalc::format::fmt17;
use qcalc::qcore::{q_binomial, q_factorial, q_number, QParam, SeriesControl};
use qcalc::qmeasure::{q_laplace, semigroup_check, DiscreteMeasure, KernelKind};
use qcalc::qspecial::{q_gamma, GammaParams, RatioParams};
use qcalc::registry::{self, corpus, BoxedFunction, CLASSICAL_CORPUS, CLOSURE_CORPUS};
use qcalc::QError;

use output::{Emitter, Format, Provenance};

#[derive(Parser, Debug)]
#[command(
    name = "qcalc",
    version,
    about = "q-calculus numerics and q-monotonicity certification"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Base q (> 0, != 1)
    #[arg(long, global = true, default_value_t = 0.5)]
    q: f64,
    #[arg(long, global = true, default_value_t = 0.1)]
    grid_min: f64,
    #[arg(long, global = true, default_value_t = 5.0)]
    grid_max: f64,
    #[arg(long, global = true, default_value_t = 64)]
    grid_count: usize,
    #[arg(long, global = true, value_enum, default_value_t = SpacingArg::Log)]
    grid_spacing: SpacingArg,
    /// Highest q-derivative order N (1..=8)
    #[arg(long, global = true, default_value_t = 6)]
    order: usize,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_abs: f64,
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_rel: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; defaults to stdout, or to a file in $QCALC_OUT_DIR when set
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Default output directory when --out is not given
    #[arg(long, global = true, env = "QCALC_OUT_DIR", hide_env_values = true)]
    out_dir: Option<PathBuf>,
    /// Run a harness with hypothesis-violating parameters
    #[arg(long, global = true)]
    negative_control: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SpacingArg {
    Linear,
    Log,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PropertyArg {
    Qcm,
    Qlogcm,
    Qbernstein,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KernelArg {
    /// E_q^(-lambda t) = E_q(1)^(-lambda t)
    Power,
    /// E_q(-lambda t)
    Jackson,
}

impl From<KernelArg> for KernelKind {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Power => KernelKind::PowerE,
            KernelArg::Jackson => KernelKind::JacksonE,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Harness {
    /// f is q-Bernstein iff E_q^(-t f) is q-CM for all t > 0
    BernsteinIff,
    /// f q-CM implies f(x) - f(x + a) q-CM
    Difference,
    /// q-log-CM implies q-CM, over a corpus
    LogCmImpliesCm,
    /// composition of q-Bernstein functions is q-Bernstein, over a corpus
    Composition,
    /// E_q^(-t f) q-CM and E_q^(-f) q-log-CM for q-Bernstein f, over a corpus
    InfiniteDivisibility,
    /// log-cm-implies-cm, composition and infinite-divisibility together
    Closure,
    /// classical log-CM implies q-log-CM, over a corpus
    ClassicalLogCm,
    /// convolution semigroup of measures and its Bernstein exponent
    Semigroup,
    /// f_{alpha,beta,q} is q-log-CM for 2 alpha <= 1 <= beta
    FAbq,
    /// gamma ratio G_q is q-CM under the ordering hypothesis
    GammaRatio,
    /// the first derivative of psi_q is q-CM
    TrigammaCm,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TableKind {
    /// n, Gamma_q(n+1), [n]!
    GammaFactorial,
    /// k, [n choose k]_q for fixed n
    QBinomial,
    /// x, [x] on the grid
    QNumber,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a builtin function on the grid or at given points
    Eval {
        function: String,
        /// Parameter assignment name=value (lists are comma-separated)
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Comma-separated points; the grid is used when omitted
        #[arg(long, value_delimiter = ',')]
        x: Vec<f64>,
    },
    /// Certify a builtin function against a sign pattern
    Certify {
        function: String,
        #[arg(long, value_enum, default_value_t = PropertyArg::Qcm)]
        property: PropertyArg,
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Evaluate grid points sequentially
        #[arg(long)]
        serial: bool,
    },
    /// Run a theorem harness by name
    Theorem {
        #[arg(value_enum)]
        harness: Harness,
        #[command(flatten)]
        opts: TheoremOpts,
    },
    /// q-Laplace transform of a measure file (lines "t w")
    Laplace {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2")]
        lam: Vec<f64>,
        #[arg(long, value_enum, default_value_t = KernelArg::Power)]
        kernel: KernelArg,
    },
    /// Semigroup check for the drift family delta_{rate t}
    Semigroup {
        #[arg(long, default_value_t = 0.7)]
        rate: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        ts: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,3")]
        lams: Vec<f64>,
        #[arg(long, value_enum, default_value_t = KernelArg::Power)]
        kernel: KernelArg,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Print a reference table
    Table {
        #[arg(value_enum)]
        kind: TableKind,
        /// Largest n (gamma-factorial) or the fixed n (q-binomial)
        #[arg(long, default_value_t = 6)]
        n: i64,
    },
    /// List builtin functions and harnesses
    List,
}

#[derive(Args, Debug, Clone)]
struct TheoremOpts {
    /// Builtin for single-function harnesses
    #[arg(long)]
    function: Option<String>,
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Corpus of builtin names for corpus harnesses
    #[arg(long, value_delimiter = ',')]
    corpus: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    ts: Vec<f64>,
    /// Shift a of the difference harness
    #[arg(long, default_value_t = 1.0)]
    shift: f64,
    #[arg(long, default_value_t = CLASSICAL_STEP)]
    step: f64,
    #[arg(long, default_value_t = 0.7)]
    rate: f64,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,3")]
    lams: Vec<f64>,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    a: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    b: Vec<f64>,
}

/// Failure modes mapped onto exit codes.
enum Failure {
    Usage(String),
}

impl From<QError> for Failure {
    fn from(e: QError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("qcalc: error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn spec_from(c: &Common, property: Property) -> Result<CertSpec, Failure> {
    let spacing = match c.grid_spacing {
        SpacingArg::Linear => Spacing::Linear,
        SpacingArg::Log => Spacing::Log,
    };
    let grid = Grid::new(c.grid_min, c.grid_max, c.grid_count, spacing)?;
    let spec = CertSpec::new(property)
        .with_order(c.order)
        .with_grid(grid)
        .with_tolerances(c.tol_abs, c.tol_rel);
    spec.validate()?;
    Ok(spec)
}

fn parse_assignments(raw: &[String]) -> Result<Vec<(String, String)>, Failure> {
    raw.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Failure::Usage(format!("parameter '{}' is not NAME=VALUE", s)))
        })
        .collect()
}

fn builtin(name: &str, q: QParam, raw: &[String]) -> Result<BoxedFunction, Failure> {
    let b = registry::lookup(name)?;
    Ok(b.instantiate(q, &parse_assignments(raw)?)?)
}

fn run(cli: &Cli) -> Outcome {
    let c = &cli.common;
    let q = QParam::new(c.q)?;
    // validate grid, order and tolerances before any computation
    let spec = spec_from(c, Property::QCM)?;
    let prov = Provenance::new(c.q, &spec);
    match &cli.command {
        Command::Eval { function, params, x } => {
            let f = builtin(function, q, params)?;
            let xs: Vec<f64> = if x.is_empty() {
                spec.grid.points().to_vec()
            } else {
                x.clone()
            };
            let rows = xs.iter().map(|&x| vec![fmt17(x), fmt17(f.eval(x))]).collect();
            let em = Emitter::table(&["x", "value"], rows);
            em.write(c, &format!("eval-{}", function), &prov)?;
            Ok(true)
        }
        Command::Certify {
            function,
            property,
            params,
            serial,
        } => {
            let property = match property {
                PropertyArg::Qcm => Property::QCM,
                PropertyArg::Qlogcm => Property::QLogCM,
                PropertyArg::Qbernstein => Property::QBernstein,
            };
            let f = builtin(function, q, params)?;
            let exec = if *serial {
                Execution::Serial
            } else {
                Execution::Parallel
            };
            let spec = spec.with_property(property);
            let r = certify_with(f.as_ref(), q, &spec, exec)?;
            match r.first_counterexample() {
                Some(cx) => eprintln!(
                    "{} {}: violated at x = {}, n = {}, value = {} ({} violations)",
                    function,
                    property.name(),
                    fmt17(cx.x),
                    cx.n,
                    fmt17(cx.value),
                    r.counterexamples.len()
                ),
                None => eprintln!(
                    "{} {}: consistent ({} checks, {} neutral)",
                    function,
                    property.name(),
                    r.checks_run,
                    r.neutral_checks
                ),
            }
            let em = match c.format {
                Format::Csv => Emitter::Text(r.to_csv()),
                Format::Json => Emitter::Json(r.to_json()),
            };
            em.write(c, &format!("certify-{}-{}", function, property.name()), &prov)?;
            Ok(r.is_consistent())
        }
        Command::Theorem { harness, opts } => {
            let h = run_harness(*harness, opts, q, &spec, c.negative_control)?;
            for n in &h.notes {
                eprintln!("note: {}", n);
            }
            eprintln!("{}: {}", h.name, if h.passed { "passed" } else { "failed" });
            let mut prov = prov;
            for (k, v) in &h.values {
                prov.extra.push((k.clone(), fmt17(*v)));
            }
            let em = match c.format {
                Format::Csv => Emitter::Text(h.to_csv()),
                Format::Json => Emitter::Json(h.to_json()),
            };
            em.write(c, &format!("theorem-{}", h.name), &prov)?;
            Ok(h.passed)
        }
        Command::Laplace { measure, lam, kernel } => {
            let text = std::fs::read_to_string(measure)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {}", measure.display(), e)))?;
            let mu = DiscreteMeasure::from_text(&text)?;
            let ctrl = SeriesControl::default();
            let mut rows = Vec::with_capacity(lam.len());
            for &l in lam {
                rows.push(vec![fmt17(l), fmt17(q_laplace(&mu, l, q, (*kernel).into(), &ctrl)?)]);
            }
            Emitter::table(&["lambda", "transform"], rows).write(c, "laplace", &prov)?;
            Ok(true)
        }
        Command::Semigroup {
            rate,
            ts,
            lams,
            kernel,
            tol,
        } => {
            if *rate <= 0.0 || !rate.is_finite() {
                return Err(Failure::Usage(format!("rate must be finite and > 0, got {}", rate)));
            }
            let neg = c.negative_control;
            let family = |t: f64| {
                let shift = if neg && !ts.contains(&t) { 0.1 } else { 0.0 };
                DiscreteMeasure::delta(rate * t + shift).ok()
            };
            let ctrl = SeriesControl::default();
            let r = semigroup_check(family, ts, lams, q, (*kernel).into(), *tol, &ctrl)?;
            let rows = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        fmt17(row.t),
                        fmt17(row.s),
                        fmt17(row.lam),
                        fmt17(row.convolved),
                        fmt17(row.direct),
                        fmt17(row.deviation()),
                    ]
                })
                .collect();
            eprintln!(
                "semigroup: {} (max deviation {})",
                if r.passed { "passed" } else { "failed" },
                fmt17(r.max_deviation)
            );
            Emitter::table(&["t", "s", "lambda", "convolved", "direct", "deviation"], rows).write(
                c,
                "semigroup",
                &prov,
            )?;
            Ok(r.passed)
        }
        Command::Table { kind, n } => {
            let ctrl = SeriesControl::default();
            let em = match kind {
                TableKind::GammaFactorial => {
                    if *n < 0 {
                        return Err(Failure::Usage("n must be >= 0".to_string()));
                    }
                    let mut rows = Vec::new();
                    for k in 0..=*n {
                        let g = q_gamma(k as f64 + 1.0, q, &ctrl)?;
                        let f = q_factorial(k, q)?;
                        rows.push(vec![k.to_string(), fmt17(g), fmt17(f)]);
                    }
                    Emitter::table(&["n", "gamma_q(n+1)", "q_factorial(n)"], rows)
                }
                TableKind::QBinomial => {
                    let mut rows = Vec::new();
                    for k in 0..=*n {
                        rows.push(vec![k.to_string(), fmt17(q_binomial(*n, k, q)?)]);
                    }
                    Emitter::table(&["k", "q_binomial(n,k)"], rows)
                }
                TableKind::QNumber => {
                    let rows = spec
                        .grid
                        .points()
                        .iter()
                        .map(|&x| vec![fmt17(x), fmt17(q_number(x, q))])
                        .collect();
                    Emitter::table(&["x", "q_number(x)"], rows)
                }
            };
            let name = format!(
                "table-{}",
                kind.to_possible_value().expect("no skipped variants").get_name()
            );
            em.write(c, &name, &prov)?;
            Ok(true)
        }
        Command::List => {
            let mut out = String::from("functions:\n");
            for b in registry::builtins() {
                out.push_str(&format!(
                    "  {:<20} {}  [params: {}]\n",
                    b.name,
                    b.summary,
                    b.param_names()
                ));
            }
            out.push_str("harnesses:\n");
            for h in Harness::value_variants() {
                let pv = h.to_possible_value().expect("no skipped variants");
                out.push_str(&format!(
                    "  {:<24} {}\n",
                    pv.get_name(),
                    pv.get_help().map(|s| s.to_string()).unwrap_or_default()
                ));
            }
            print!("{}", out);
            Ok(true)
        }
    }
}

fn corpus_names(opts: &TheoremOpts, default: &[&'static str]) -> Result<Vec<&'static str>, Failure> {
    if opts.corpus.is_empty() {
        return Ok(default.to_vec());
    }
    opts.corpus.iter().map(|n| Ok(registry::lookup(n)?.name)).collect()
}

fn run_harness(
    which: Harness,
    opts: &TheoremOpts,
    q: QParam,
    spec: &CertSpec,
    negative_control: bool,
) -> Result<HarnessReport, Failure> {
    let supports_negative = matches!(which, Harness::FAbq | Harness::GammaRatio | Harness::Semigroup);
    if negative_control && !supports_negative {
        return Err(Failure::Usage(
            "--negative-control applies to the f-abq, gamma-ratio and semigroup harnesses".to_string(),
        ));
    }
    let single = |default: &str| -> Result<BoxedFunction, Failure> {
        let name = opts.function.as_deref().unwrap_or(default);
        builtin(name, q, &opts.params)
    };
    let with_corpus = |default: &[&'static str],
                       run: &dyn Fn(&[Named]) -> qcalc::Result<HarnessReport>|
     -> Result<HarnessReport, Failure> {
        let members = corpus(&corpus_names(opts, default)?, q)?;
        let named: Vec<Named> = members.iter().map(|(n, f)| (*n, f.as_ref() as _)).collect();
        Ok(run(&named)?)
    };
    let h = match which {
        Harness::BernsteinIff => bernstein_iff_check(single("identity")?.as_ref(), &opts.ts, q, spec)?,
        Harness::Difference => difference_check(single("reciprocal_shift")?.as_ref(), opts.shift, q, spec)?,
        Harness::LogCmImpliesCm => with_corpus(&CLOSURE_CORPUS, &|fs| log_cm_implies_cm(fs, q, spec))?,
        Harness::Composition => with_corpus(&CLOSURE_CORPUS, &|fs| composition_closure(fs, q, spec))?,
        Harness::InfiniteDivisibility => with_corpus(&CLOSURE_CORPUS, &|fs| infinite_divisibility(fs, q, spec))?,
        Harness::Closure => with_corpus(&CLOSURE_CORPUS, &|fs| closure_checks(fs, q, spec))?,
        Harness::ClassicalLogCm => with_corpus(&CLASSICAL_CORPUS, &|fs| {
            classical_log_cm_harness(fs, q, spec, opts.step)
        })?,
        Harness::Semigroup => semigroup_harness(opts.rate, &opts.ts, &opts.lams, q, spec, negative_control)?,
        Harness::FAbq => {
            let p = GammaParams::new(opts.alpha, opts.beta, q)?;
            gamma_log_cm_harness(&p, spec, negative_control)?
        }
        Harness::GammaRatio => {
            let rp = if negative_control {
                RatioParams::unchecked(opts.a.clone(), opts.b.clone())?
            } else {
                RatioParams::new(opts.a.clone(), opts.b.clone())?
            };
            gamma_ratio_harness(&rp, q, spec, negative_control)?
        }
        Harness::TrigammaCm => trigamma_cm_harness(q, spec)?,
    };
    Ok(h)
}
