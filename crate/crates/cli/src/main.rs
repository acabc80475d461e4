//! `qfl`: command-line front end for the quadratic family `z² + λ`.
//!
//! Results go to stdout, diagnostics to stderr. Exit codes: 0 success,
//! 1 usage, 2 parse error, 3 budget exceeded, 4 numerical failure.

mod parse;

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qfl::dynamics::{self, DynamicsError, OrbitOutcome, DEFAULT_MAX_STEPS};
use qfl::green::{self, GreenError, DEFAULT_EPS};
use qfl::height::{self, HeightError, DEFAULT_DEGREE_BUDGET};
use qfl::periodic::{self, PeriodicError, DEFAULT_FOLLOW_STEPS};
use qfl::{
    BiPoly, CertifiedValue64, HeightStatus, InKVerdict, PolyError, RatSection, Region, RenderKind,
    ScanVerdict, Verdict,
};

use parse::show_complex;

#[derive(Parser)]
#[command(
    name = "qfl",
    version,
    about = "Exact and certified computations for the quadratic family z^2 + lam"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Image of the curve {P = 0} under f(z, lam) = (z^2 + lam, lam)
    Push(PolyArg),
    /// Reduced pushforwards of a curve as CSV
    Orbit(OrbitArgs),
    /// Decide whether a curve is preperiodic
    Detect(OrbitArgs),
    /// Canonical height of a rational section p(lam)/q(lam)
    Height(HeightArgs),
    /// Certified Green function G(z, lam)
    Green(PointArgs),
    /// Escape test for z in the filled Julia set of lam
    #[command(name = "inK")]
    InK(PointArgs),
    /// Escape test for lam in the Mandelbrot set
    Mandel(ParamArgs),
    /// Roots of f^k(z) - z with exact periods and multipliers, as CSV
    Perpoints(PerpointArgs),
    /// The dynatomic polynomial of exact period k
    Dynatomic(PeriodArg),
    /// Continue a periodic point from --lam to --lam1
    Follow(FollowArgs),
    /// Distance between the period-n potential at --z and G(z, lam)
    Equidist(EquidistArgs),
    /// Escape-time image as binary PGM
    Render(RenderArgs),
    /// Search a curve for points that escape
    Scan(ScanArgs),
}

#[derive(Args)]
struct PolyArg {
    /// Polynomial in z and lam, e.g. "z^2 + lam - z"
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
}

#[derive(Args)]
struct OrbitArgs {
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
    /// Maximum number of pushforwards
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    steps: usize,
    /// Degree budget for deg_sum [default: 64 times that of the input]
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct HeightArgs {
    /// Section p(lam)/q(lam), e.g. "(lam^2+1)/lam"
    #[arg(long, allow_hyphen_values = true)]
    section: String,
    /// Number of exact iterations
    #[arg(long, default_value_t = 6)]
    steps: usize,
    /// Largest allowed degree of an iterate
    #[arg(long, default_value_t = DEFAULT_DEGREE_BUDGET)]
    budget: usize,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    #[arg(long, allow_hyphen_values = true)]
    lam: String,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    lam: String,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
}

#[derive(Args)]
struct PerpointArgs {
    #[arg(long, allow_hyphen_values = true)]
    lam: String,
    #[arg(long)]
    period: usize,
}

#[derive(Args)]
struct PeriodArg {
    #[arg(long)]
    period: usize,
}

#[derive(Args)]
struct FollowArgs {
    /// Starting parameter
    #[arg(long, allow_hyphen_values = true)]
    lam: String,
    /// Periodic point at the starting parameter
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    /// Target parameter
    #[arg(long, allow_hyphen_values = true)]
    lam1: String,
    #[arg(long)]
    period: usize,
    #[arg(long, default_value_t = DEFAULT_FOLLOW_STEPS)]
    steps: usize,
}

#[derive(Args)]
struct EquidistArgs {
    #[arg(long, allow_hyphen_values = true)]
    lam: String,
    /// Escaping point w
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    /// Period n of the sampled points
    #[arg(long)]
    steps: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Parameter,
    Dynamical,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, value_enum, default_value_t = Kind::Parameter)]
    kind: Kind,
    /// Parameter of a dynamical render
    #[arg(long, allow_hyphen_values = true)]
    lam: Option<String>,
    /// re0,re1,im0,im1
    #[arg(long, allow_hyphen_values = true, default_value = "-2.1,0.6,-1.2,1.2")]
    window: String,
    /// WxH
    #[arg(long, default_value = "400x300")]
    px: String,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Worker threads, 0 for all cores
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
    /// Number of sampled parameters
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Parse(String),
    Budget(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Budget(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<PolyError> for Failure {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::ZeroPolynomial => Failure::Usage(e.to_string()),
            _ => Failure::Parse(e.to_string()),
        }
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Poly(p) => p.into(),
            DynamicsError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<HeightError> for Failure {
    fn from(e: HeightError) -> Self {
        match e {
            HeightError::Poly(p) => p.into(),
            HeightError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            HeightError::InvalidArgument(_) => Failure::Usage(e.to_string()),
            HeightError::ZeroDenominator | HeightError::NotASection => {
                Failure::Parse(e.to_string())
            }
        }
    }
}

impl From<GreenError> for Failure {
    fn from(e: GreenError) -> Self {
        match e {
            GreenError::InvalidEps | GreenError::InvalidArgument(_) | GreenError::Io(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<PeriodicError> for Failure {
    fn from(e: PeriodicError) -> Self {
        match e {
            PeriodicError::InvalidArgument(_) => Failure::Usage(e.to_string()),
            PeriodicError::Green(g) => g.into(),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn complex(text: &str) -> Result<Complex64, Failure> {
    parse::complex(text).map_err(Failure::Parse)
}

fn poly(text: &str) -> Result<BiPoly, Failure> {
    Ok(text.parse::<BiPoly>()?)
}

/// Decimal digits matching the requested accuracy.
fn digits(eps: f64) -> usize {
    (-eps.log10()).ceil().clamp(1.0, 17.0) as usize
}

fn show_green(g: &CertifiedValue64, eps: f64) -> String {
    let radius = if g.radius <= eps { eps } else { g.radius };
    let mut out = format!("{:.*} ± {:e}", digits(eps), g.estimate, radius);
    if !g.resolved {
        out.push_str(" (unresolved)");
    }
    out
}

fn show_in_k(verdict: &InKVerdict<f64>, eps: f64) -> String {
    match verdict {
        InKVerdict::Escapes(g) => format!("escapes G={}", show_green(g, eps)),
        InKVerdict::NoEscapeWithin { bound } => format!("no-escape G<={bound:e}"),
    }
}

fn list(values: &[impl Display]) -> String {
    values
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Push(a) => {
            let res = dynamics::pushforward(&poly(&a.poly)?)?;
            println!("raw: {}", res.raw);
            println!("reduced: {}", res.reduced);
            println!("collapsed: {}", res.multiplicity_collapsed);
        }
        Command::Orbit(a) => {
            let p = poly(&a.poly)?;
            let budget = a.budget.map_or_else(|| dynamics::default_budget(&p), Ok)?;
            let orb = dynamics::orbit(&p, a.steps, budget)?;
            print!("{}", orb.to_csv());
            match orb.outcome {
                OrbitOutcome::Preperiodic { preperiod, period } => {
                    eprintln!("preperiodic preperiod={preperiod} period={period}")
                }
                OrbitOutcome::BudgetExceeded { reason } => eprintln!("stopped: {reason}"),
                OrbitOutcome::DegreeGrowth { .. } => {
                    return Err(Failure::Budget(format!("degree budget {budget} exceeded")))
                }
            }
        }
        Command::Detect(a) => {
            let p = poly(&a.poly)?;
            let budget = a.budget.map_or_else(|| dynamics::default_budget(&p), Ok)?;
            match dynamics::detect_preperiodic(&p, a.steps, budget)? {
                Verdict::Preperiodic { preperiod, period } => {
                    println!("preperiodic preperiod={preperiod} period={period}")
                }
                Verdict::NotPreperiodic {
                    height_estimates,
                    cauchy_diff,
                } => println!(
                    "not-preperiodic (heuristic) estimates={} cauchy_diff={cauchy_diff}",
                    list(&height_estimates)
                ),
                Verdict::Inconclusive {
                    height_estimates,
                    reason,
                } => println!(
                    "inconclusive estimates={} reason={reason}",
                    list(&height_estimates)
                ),
            }
        }
        Command::Height(a) => {
            let s: RatSection = a.section.parse()?;
            let report = height::canonical_height_section_with_budget(&s, a.steps, a.budget)?;
            match &report.status {
                HeightStatus::Stabilized { at, height } => {
                    println!("height {height} stabilized at={at}")
                }
                HeightStatus::Unstabilized => println!(
                    "height {} unstabilized cauchy_diff={}",
                    report.height(),
                    report.cauchy_diff
                ),
            }
            println!("degrees {}", list(&report.degrees));
            println!("estimates {}", list(&report.estimates));
        }
        Command::Green(a) => {
            let g = green::green_value(complex(&a.z)?, complex(&a.lam)?, a.eps)?;
            println!("{}", show_green(&g, a.eps));
        }
        Command::InK(a) => {
            let v = green::in_K_test(complex(&a.z)?, complex(&a.lam)?, a.eps)?;
            println!("{}", show_in_k(&v, a.eps));
        }
        Command::Mandel(a) => {
            let v = green::mandelbrot_test(complex(&a.lam)?, a.eps)?;
            println!("{}", show_in_k(&v, a.eps));
        }
        Command::Perpoints(a) => {
            let points = periodic::periodic_points(complex(&a.lam)?, a.period)?;
            print!("{}", periodic::periodic_points_csv(&points));
        }
        Command::Dynatomic(a) => println!("{}", periodic::dynatomic(a.period)?),
        Command::Follow(a) => {
            let z = periodic::follow_periodic(
                complex(&a.lam)?,
                complex(&a.z)?,
                a.period,
                complex(&a.lam1)?,
                a.steps,
            )?;
            println!("{}", show_complex(z));
        }
        Command::Equidist(a) => {
            let d = periodic::equidist_check(complex(&a.lam)?, complex(&a.z)?, a.steps)?;
            println!("{d:e}");
        }
        Command::Render(a) => {
            let [re0, re1, im0, im1] = parse::window(&a.window).map_err(Failure::Parse)?;
            let (w, h) = parse::pixels(&a.px).map_err(Failure::Parse)?;
            let region = Region::new((re0, re1), (im0, im1), w, h)?;
            let kind = match (a.kind, a.lam) {
                (Kind::Parameter, None) => RenderKind::Parameter,
                (Kind::Dynamical, Some(lam)) => RenderKind::Dynamical(complex(&lam)?),
                (Kind::Parameter, Some(_)) => {
                    return Err(Failure::Usage(
                        "--lam only applies to --kind dynamical".into(),
                    ))
                }
                (Kind::Dynamical, None) => {
                    return Err(Failure::Usage("--kind dynamical needs --lam".into()))
                }
            };
            green::render_escape(kind, &region, a.eps, a.workers, &a.out)?;
        }
        Command::Scan(a) => {
            match green::curve_in_K_scan(&poly(&a.poly)?, a.samples, a.eps, a.seed)? {
                ScanVerdict::NotContained {
                    z,
                    lam,
                    green,
                    sample,
                } => println!(
                    "not-contained z={} lam={} sample={sample} G={}",
                    show_complex(z),
                    show_complex(lam),
                    show_green(&green, a.eps)
                ),
                ScanVerdict::NoWitnessFound { tested, skipped } => {
                    for (lam, e) in &skipped {
                        eprintln!("skipped lam={}: {e}", show_complex(*lam));
                    }
                    println!("no-witness tested={tested} skipped={}", skipped.len());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qfl: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
