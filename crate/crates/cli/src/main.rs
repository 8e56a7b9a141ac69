use std::fs::{self, File};
use std::io::BufWriter;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use symsign::asymptotics::{abscissa_probe, partial_summation_check, partial_sums, AsymptoticsReport};
use symsign::forms::cache::{cache_path, load_or_expand, Provenance};
use symsign::forms::{CoefficientSeries, FormDescriptor};
use symsign::hecke::theta_table;
use symsign::report::{self, RunMetadata};
use symsign::stats::{empirical_sign_density, histogram, ks_test, Reference};
use symsign::sympower::{assemble_multiplicative, StreamKind};

mod selftest;

/// Precisions above this need `--large`.
const LARGE_X: usize = 1 << 21;

#[derive(Parser, Debug)]
#[command(name = "symsign", version, about = "Exact newform coefficients and sign/asymptotics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory holding expanded coefficient tables
    #[arg(long, global = true, env = "SYMSIGN_CACHE_DIR", default_value = "symsign-cache")]
    cache_dir: PathBuf,

    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for report files
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        self != Format::Json
    }

    fn json(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Args, Debug, Clone)]
struct FormArgs {
    /// Built-in form: delta, lvl11, lvl27, lvl32
    #[arg(long, default_value = "delta")]
    form: String,

    /// Custom eta-quotient recipe such as `4^2.8^2` (d^e factors of Π η(dz)^e)
    #[arg(long, requires = "level", conflicts_with = "form")]
    recipe: Option<String>,

    /// Level of a custom recipe
    #[arg(long)]
    level: Option<u64>,

    /// Mark a custom recipe as having complex multiplication
    #[arg(long)]
    cm: bool,
}

impl FormArgs {
    fn resolve(&self) -> Result<FormDescriptor, CliError> {
        match &self.recipe {
            None => Ok(FormDescriptor::by_name(&self.form)?),
            Some(text) => {
                let factors = FormDescriptor::parse_recipe(text)?;
                let total: u32 = factors.iter().map(|f| f.exponent).sum();
                let name = format!(
                    "eta{}",
                    factors.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(".")
                );
                Ok(FormDescriptor::new(name, total / 2, self.level.unwrap_or(0), self.cm, factors)?)
            }
        }
    }
}

#[derive(Args, Debug, Clone)]
struct PrecisionArgs {
    /// Coefficient precision X
    #[arg(long = "X", default_value_t = 1_000_000)]
    x: usize,

    /// Allow X above 2^21 (prints a memory estimate first)
    #[arg(long)]
    large: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expand and cache a coefficient table, printing a(n) for n <= 20
    Expand {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        precision: PrecisionArgs,
    },
    /// Sign frequencies of λ_f(p^m) over primes against the closed-form densities
    ///
    /// CSV columns: form,m,X,count_positive,count_negative,count_zero,
    /// freq_positive,freq_negative,freq_zero,pred_positive,pred_negative,pred_zero,
    /// err_positive,err_negative,err_zero
    SignDensity {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        precision: PrecisionArgs,
        /// Powers m, comma separated
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        m: Vec<u32>,
        /// Fail (exit 1) if any frequency misses its prediction by more than this
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Kolmogorov–Smirnov test of the angles θ_p plus a histogram
    ///
    /// CSV columns: form,X,reference,ks_statistic,sample_size and
    /// bin_left,bin_right,count,reference_mass
    Distribution {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        precision: PrecisionArgs,
        /// Reference law; defaults to the Deuring mixture for CM forms and Sato–Tate otherwise
        #[arg(long, value_enum)]
        reference: Option<ReferenceArg>,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Fail (exit 1) if the statistic exceeds this
        #[arg(long)]
        max_ks: Option<f64>,
    },
    /// Partial sums, partial-summation identity and dyadic abscissa probe
    ///
    /// CSV columns: form,m,kind,x,A,R and form,m,kind,sigma,j,T_j,ratio
    Asymptotics {
        #[command(flatten)]
        form: FormArgs,
        /// Stream bound x
        #[arg(long = "x", default_value_t = 1 << 20)]
        x: usize,
        #[arg(long)]
        large: bool,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        m: Vec<u32>,
        #[arg(long, value_enum, default_value_t = KindArg::Sym)]
        kind: KindArg,
        /// Checkpoints for A(x); defaults to powers of ten up to x
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.9,1.1")]
        sigma: Vec<f64>,
        /// Dyadic blocks as `a..b`; defaults to the last six blocks below x
        #[arg(long, value_parser = parse_j_range)]
        j_range: Option<RangeInclusive<u32>>,
        /// Exponents for the partial-summation identity check
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5")]
        beta: Vec<f64>,
    },
    /// Run the invariant suite at X = 10^4
    Selftest {
        #[arg(long, default_value_t = 10_000)]
        x: usize,
        /// Seed for the randomized checks
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReferenceArg {
    SatoTate,
    DeuringMixture,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Sym,
    Power,
}

impl From<KindArg> for StreamKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Sym => StreamKind::Sym,
            KindArg::Power => StreamKind::Power,
        }
    }
}

fn parse_j_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let (a, b) = s
        .split_once("..")
        .or_else(|| s.split_once('-'))
        .ok_or_else(|| format!("expected `a..b`, got `{s}`"))?;
    let a: u32 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: u32 = b.trim_start_matches('=').trim().parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..=b)
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Check(String),
    Internal(anyhow::Error),
}

impl From<symsign::Error> for CliError {
    fn from(e: symsign::Error) -> Self {
        use symsign::Error as E;
        match e {
            E::InvalidArgument(_)
            | E::InvalidRecipe(_)
            | E::UnknownForm(_)
            | E::OutOfRange { .. }
            | E::LevelNotSupported(_) => CliError::Usage(e.to_string()),
            other => CliError::Internal(other.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.into())
    }
}

fn check_precision(x: usize, large: bool, form: &FormDescriptor) -> Result<(), CliError> {
    if x == 0 {
        return Err(CliError::Usage("precision must be positive".into()));
    }
    if x > LARGE_X {
        if !large {
            return Err(CliError::Usage(format!(
                "X = {x} exceeds {LARGE_X}; pass --large to confirm"
            )));
        }
        eprintln!("note: X = {x} needs roughly {} of memory", human_bytes(memory_estimate(x, form)));
    }
    Ok(())
}

/// Coefficient storage plus transform buffers for the widest product.
fn memory_estimate(x: usize, form: &FormDescriptor) -> u64 {
    let bits = (form.weight() as f64 - 1.0) / 2.0 * (x as f64).log2() + 8.0;
    let per_coeff = 32.0 + (bits / 64.0).ceil() * 8.0;
    let size = (2 * x).next_power_of_two() as f64;
    let transform = size * 4.0 * 2.0 * 6.0;
    (x as f64 * per_coeff * 3.0 + transform) as u64
}

fn human_bytes(b: u64) -> String {
    let gib = b as f64 / (1u64 << 30) as f64;
    if gib >= 1.0 {
        format!("{gib:.1} GiB")
    } else {
        format!("{:.0} MiB", b as f64 / (1u64 << 20) as f64)
    }
}

fn load(form: &FormDescriptor, x: usize, cache_dir: &Path) -> Result<CoefficientSeries, CliError> {
    if !cache_path(cache_dir, form, x).exists() {
        eprintln!("no cached table for {} at X = {x}; expanding", form.name());
    }
    let (series, how) = load_or_expand(form, x, cache_dir)?;
    if how == Provenance::Expanded {
        eprintln!("wrote {}", cache_path(cache_dir, form, x).display());
    }
    Ok(series)
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(out)?;
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.into()))?;
    }
    match cli.command {
        Command::Expand { form, precision } => {
            let form = form.resolve()?;
            check_precision(precision.x, precision.large, &form)?;
            let series = load(&form, precision.x, &cli.cache_dir)?;
            for n in 1..=precision.x.min(20) {
                println!("a({n}) = {}", series.a(n)?);
            }
            Ok(())
        }
        Command::SignDensity {
            form,
            precision,
            m,
            tolerance,
        } => {
            let form = form.resolve()?;
            check_precision(precision.x, precision.large, &form)?;
            if m.is_empty() || m.contains(&0) {
                return Err(CliError::Usage("every m must be at least 1".into()));
            }
            let series = load(&form, precision.x, &cli.cache_dir)?;
            let reports = m
                .iter()
                .map(|&m| empirical_sign_density(&series, m, precision.x))
                .collect::<Result<Vec<_>, _>>()?;
            let stem = format!("sign_density_{}_X{}", form.name(), precision.x);
            if cli.format.csv() {
                report::write_sign_density_csv(&reports, create(&cli.out, &format!("{stem}.csv"))?)?;
            }
            if cli.format.json() {
                let mut meta = RunMetadata::new("sign-density", form.name(), precision.x);
                meta.m = m.clone();
                report::write_json(&meta, &reports, create(&cli.out, &format!("{stem}.json"))?)?;
            }
            let mut failures = Vec::new();
            for r in &reports {
                println!(
                    "m={:<3} positive {:.6} (pred {:.6})  negative {:.6} (pred {:.6})  zero {:.6} (pred {:.6})  primes {}",
                    r.m,
                    r.frequencies.positive,
                    r.predicted.positive,
                    r.frequencies.negative,
                    r.predicted.negative,
                    r.frequencies.zero,
                    r.predicted.zero,
                    r.counts.total()
                );
                let e = r.abs_errors;
                if let Some(tol) = tolerance {
                    if e.positive.max(e.negative).max(e.zero) > tol {
                        failures.push(format!("m={} misses its prediction by more than {tol}", r.m));
                    }
                }
            }
            if failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::Check(failures.join("; ")))
            }
        }
        Command::Distribution {
            form,
            precision,
            reference,
            bins,
            max_ks,
        } => {
            let form = form.resolve()?;
            check_precision(precision.x, precision.large, &form)?;
            let reference = match reference {
                Some(ReferenceArg::SatoTate) => Reference::SatoTate,
                Some(ReferenceArg::DeuringMixture) => Reference::DeuringMixture,
                None => Reference::for_cm(form.is_cm()),
            };
            let series = load(&form, precision.x, &cli.cache_dir)?;
            let table = theta_table(&series);
            let ks = ks_test(&table, reference)?;
            let hist = histogram(&table.thetas(), bins, reference)?;
            let stem = format!("{}_X{}", form.name(), precision.x);
            if cli.format.csv() {
                report::write_distribution_csv(
                    std::slice::from_ref(&ks),
                    create(&cli.out, &format!("distribution_{stem}.csv"))?,
                )?;
                report::write_histogram_csv(&hist, create(&cli.out, &format!("histogram_{stem}.csv"))?)?;
            }
            if cli.format.json() {
                let meta = RunMetadata::new("distribution", form.name(), precision.x);
                report::write_json(
                    &meta,
                    &serde_json::json!({ "test": ks, "histogram": hist }),
                    create(&cli.out, &format!("distribution_{stem}.json"))?,
                )?;
            }
            println!(
                "KS statistic {:.6} against {:?} over {} angles",
                ks.ks_statistic, reference, ks.sample_size
            );
            if table.clamp_events() > 0 {
                eprintln!("warning: {} angles were clamped into [-1, 1]", table.clamp_events());
            }
            match max_ks {
                Some(limit) if ks.ks_statistic > limit => {
                    Err(CliError::Check(format!("KS statistic exceeds {limit}")))
                }
                _ => Ok(()),
            }
        }
        Command::Asymptotics {
            form,
            x,
            large,
            m,
            kind,
            checkpoints,
            sigma,
            j_range,
            beta,
        } => {
            let form = form.resolve()?;
            check_precision(x, large, &form)?;
            if m.is_empty() || m.contains(&0) {
                return Err(CliError::Usage("every m must be at least 1".into()));
            }
            let kind: StreamKind = kind.into();
            let checkpoints = if checkpoints.is_empty() {
                std::iter::successors(Some(10usize), |c| c.checked_mul(10))
                    .take_while(|&c| c <= x)
                    .chain(std::iter::once(x))
                    .collect()
            } else {
                checkpoints
            };
            let top = usize::BITS - 1 - x.leading_zeros();
            let j_range = match j_range {
                Some(r) => r,
                None if top >= 2 => top.saturating_sub(6).max(1)..=top - 1,
                None => return Err(CliError::Usage("x is too small for a dyadic probe".into())),
            };
            let series = load(&form, x, &cli.cache_dir)?;
            let table = theta_table(&series);
            let mut reports: Vec<AsymptoticsReport> = Vec::new();
            let mut failures = Vec::new();
            for &m in &m {
                let stream = assemble_multiplicative(&table, m, x, kind)?;
                let mut rep = partial_sums(&stream, &checkpoints)?;
                for &s in &sigma {
                    rep.block_increments.extend(abscissa_probe(&stream, s, j_range.clone())?);
                }
                for &b in &beta {
                    let check = partial_summation_check(&stream, b, x)?;
                    println!(
                        "m={m} beta={b}: partial summation residual {:.3e}",
                        check.residual
                    );
                    if !(check.residual <= 1e-9) {
                        failures.push(format!("m={m} beta={b}: residual {:e}", check.residual));
                    }
                }
                for c in &rep.checkpoints {
                    println!("m={m} x={:<10} A={:.6}  R={:.6}", c.x, c.partial_sum, c.ratio);
                }
                for b in &rep.block_increments {
                    println!(
                        "m={m} sigma={} j={:<3} T_j={:.6}  ratio={}",
                        b.sigma,
                        b.j,
                        b.t_j,
                        b.ratio.map_or("-".into(), |r| format!("{r:.6}"))
                    );
                }
                reports.push(rep);
            }
            let stem = format!("{}_{}_x{}", form.name(), kind, x);
            if cli.format.csv() {
                report::write_partial_sums_csv(&reports, create(&cli.out, &format!("partial_sums_{stem}.csv"))?)?;
                report::write_increments_csv(&reports, create(&cli.out, &format!("increments_{stem}.csv"))?)?;
            }
            if cli.format.json() {
                let mut meta = RunMetadata::new("asymptotics", form.name(), x);
                meta.m = m.clone();
                meta.kind = Some(kind.to_string());
                report::write_json(&meta, &reports, create(&cli.out, &format!("asymptotics_{stem}.json"))?)?;
            }
            if failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::Check(failures.join("; ")))
            }
        }
        Command::Selftest { x, seed } => {
            if x < 1000 {
                return Err(CliError::Usage("selftest needs X >= 1000".into()));
            }
            if selftest::run(x, seed)? {
                Ok(())
            } else {
                Err(CliError::Check("selftest failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(3)
        }
    }
}
