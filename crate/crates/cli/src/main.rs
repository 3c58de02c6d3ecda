use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tempfile::{NamedTempFile, TempDir};

use hpcgi_core::hadamard::{upscale, Convention, ReshapeOrder};
use hpcgi_core::io::{
    read_pgm, write_affine_csv, write_bench_csv, write_metrics_csv, write_patterns, write_pbm,
    write_permutation_csv, write_reconstruction_pgm, write_values_csv, MetricsRow,
};
use hpcgi_core::memory::bench_table;
use hpcgi_core::ordering::{
    index_ordering, natural_sequence, sequence_permutation, thdc_mpcgi_permutation, thdc_rd_permutation,
    OrderingScheme, PatternSequence, Provenance, RowPermutation,
};
use hpcgi_core::pipeline::{generate, generate_levelwise, Traversal};
use hpcgi_core::sim::{acquire, metrics, reconstruct, reconstruct_first_term, NoiseModel, Reconstruction};
use hpcgi_core::{verify, Error};

#[derive(Parser)]
#[command(name = "hpcgi", version, about = "Hadamard pattern generation and ghost-imaging simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a pattern sequence
    Gen {
        #[arg(long)]
        level: u32,
        #[arg(long, value_enum)]
        scheme: Scheme,
        /// Only for the natural scheme
        #[arg(long, value_enum)]
        convention: Option<Conv>,
        /// Only for the mpcgi and rd schemes; the output order is the same either way
        #[arg(long, value_enum)]
        traversal: Option<Walk>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Hpc1)]
        format: Format,
    },
    /// Export a row permutation of H_{2^K} as CSV
    Order {
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum)]
        scheme: OrderScheme,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Conv::Left)]
        convention: Conv,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate acquisition of a PGM object and reconstruct it
    Simulate {
        #[arg(long)]
        object: PathBuf,
        #[arg(long, value_enum)]
        scheme: Scheme,
        #[arg(long)]
        level: u32,
        /// Fraction of the full sequence to use
        #[arg(long, conflicts_with = "milestones")]
        ratio: Option<f64>,
        /// Comma-separated prefix lengths
        #[arg(long, value_delimiter = ',')]
        milestones: Option<Vec<usize>>,
        #[arg(long)]
        noise_sigma: Option<f64>,
        #[arg(long, requires = "noise_sigma")]
        seed: Option<u64>,
        /// Reconstruct with the correlation term only, without the mean subtraction
        #[arg(long)]
        first_term: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Write the memory-model table as CSV
    Bench {
        #[arg(long)]
        max_k: u32,
        /// Largest K that is also measured by running the generators
        #[arg(long, default_value_t = 10)]
        measure_max_k: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the self-check suite
    Verify {
        #[arg(long)]
        level: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Natural,
    Mpcgi,
    Rd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderScheme {
    Mpcgi,
    Rd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Pipeline,
    Thdc,
    Index,
}

#[derive(Clone, Copy, ValueEnum)]
enum Conv {
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum Walk {
    Breadth,
    Depth,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Hpc1,
    PbmDir,
}

impl From<Conv> for Convention {
    fn from(c: Conv) -> Self {
        match c {
            Conv::Left => Convention::LeftExpand,
            Conv::Right => Convention::RightExpand,
        }
    }
}

impl From<OrderScheme> for OrderingScheme {
    fn from(s: OrderScheme) -> Self {
        match s {
            OrderScheme::Mpcgi => OrderingScheme::Mpcgi,
            OrderScheme::Rd => OrderingScheme::RussianDolls,
        }
    }
}

const USAGE: u8 = 1;
const FORMAT: u8 = 2;
const INVARIANT: u8 = 3;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Format { .. } | Error::Csv(_) | Error::Io(_) => FORMAT,
            Error::Inconsistency(_) => INVARIANT,
            Error::Resource { .. } | Error::Shape(_) | Error::Index { .. } | Error::Contract(_) => USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(USAGE);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hpcgi: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Gen {
            level,
            scheme,
            convention,
            traversal,
            out,
            format,
        } => gen(level, scheme, convention, traversal, &out, format),
        Command::Order {
            k,
            scheme,
            method,
            convention,
            out,
        } => order(k, scheme.into(), method, convention.into(), &out),
        Command::Simulate {
            object,
            scheme,
            level,
            ratio,
            milestones,
            noise_sigma,
            seed,
            first_term,
            out_dir,
        } => {
            let noise = match noise_sigma {
                None => NoiseModel::None,
                Some(sigma) if sigma.is_finite() && sigma >= 0.0 => NoiseModel::AdditiveGaussian {
                    sigma,
                    seed: seed.unwrap_or(0),
                },
                Some(sigma) => return Err(Failure::usage(format!("noise sigma {sigma} must be finite and ≥ 0"))),
            };
            let plan = SimPlan {
                scheme,
                level,
                ratio,
                milestones,
                noise,
                first_term,
            };
            simulate(&object, &plan, &out_dir)
        }
        Command::Bench {
            max_k,
            measure_max_k,
            out,
        } => {
            let rows = bench_table(max_k, measure_max_k)?;
            write_file(&out, |w| write_bench_csv(w, &rows))
        }
        Command::Verify { level } => {
            let outcomes = verify::run(level);
            let mut failed = 0;
            for c in &outcomes {
                if c.passed {
                    println!("ok    {}", c.name);
                } else {
                    failed += 1;
                    println!("FAIL  {}: {}", c.name, c.detail);
                }
            }
            if failed > 0 {
                return Err(Failure {
                    code: INVARIANT,
                    message: format!("{failed} of {} checks failed at level {level}", outcomes.len()),
                });
            }
            println!("all {} checks passed at level {level}", outcomes.len());
            Ok(())
        }
    }
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place only when `fill` succeeds.
fn write_file(path: &Path, fill: impl FnOnce(&mut BufWriter<&mut NamedTempFile>) -> hpcgi_core::Result<()>) -> Outcome {
    let mut tmp = NamedTempFile::new_in(parent_dir(path))?;
    {
        let mut w = BufWriter::new(&mut tmp);
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Failure::from(e.error))?;
    Ok(())
}

/// Fills a fresh directory and moves it to `path`, which must not exist or
/// be an empty directory.
fn write_dir(path: &Path, fill: impl FnOnce(&Path) -> Outcome) -> Outcome {
    if path.exists() {
        let empty = path.is_dir() && fs::read_dir(path)?.next().is_none();
        if !empty {
            return Err(Failure::usage(format!("{} exists and is not an empty directory", path.display())));
        }
    }
    let tmp = TempDir::new_in(parent_dir(path))?;
    fill(tmp.path())?;
    if path.exists() {
        fs::remove_dir(path)?;
    }
    fs::rename(tmp.keep(), path)?;
    Ok(())
}

fn pipeline_sequence(level: u32, scheme: OrderingScheme, walk: Walk) -> Outcome<PatternSequence> {
    let side = 1usize << level;
    let lift = |p: hpcgi_core::Result<std::sync::Arc<hpcgi_core::Pattern>>| p.and_then(|p| upscale(&p, side));
    let items = match walk {
        Walk::Breadth => generate(level, Traversal::BreadthFirst)?.map(lift).collect::<Result<Vec<_>, _>>(),
        Walk::Depth => generate_levelwise(level)?.map(lift).collect::<Result<Vec<_>, _>>(),
    }?;
    Ok(PatternSequence::new(scheme, side, Provenance::Pipeline, None, items)?)
}

fn build_sequence(level: u32, scheme: Scheme, convention: Option<Conv>, walk: Option<Walk>) -> Outcome<PatternSequence> {
    if level > 12 {
        return Err(Failure::usage(format!("level {level} is above the supported maximum of 12")));
    }
    match scheme {
        Scheme::Natural => {
            if walk.is_some() {
                return Err(Failure::usage("--traversal applies to the mpcgi and rd schemes only"));
            }
            let conv = convention.map_or(Convention::LeftExpand, Convention::from);
            Ok(natural_sequence(level, conv, ReshapeOrder::RowMajor)?)
        }
        Scheme::Mpcgi | Scheme::Rd => {
            if convention.is_some() {
                return Err(Failure::usage("--convention applies to the natural scheme only"));
            }
            let s = if matches!(scheme, Scheme::Mpcgi) {
                OrderingScheme::Mpcgi
            } else {
                OrderingScheme::RussianDolls
            };
            pipeline_sequence(level, s, walk.unwrap_or(Walk::Breadth))
        }
    }
}

fn gen(level: u32, scheme: Scheme, convention: Option<Conv>, walk: Option<Walk>, out: &Path, format: Format) -> Outcome {
    let seq = build_sequence(level, scheme, convention, walk)?;
    match format {
        Format::Hpc1 => write_file(out, |w| write_patterns(&seq, w)),
        Format::PbmDir => {
            let width = seq.len().to_string().len();
            write_dir(out, |dir| {
                for (i, p) in seq.items.iter().enumerate() {
                    let file = fs::File::create(dir.join(format!("{:0width$}.pbm", i + 1)))?;
                    write_pbm(BufWriter::new(file), p)?;
                }
                Ok(())
            })
        }
    }
}

fn order(k: u32, scheme: OrderingScheme, method: Method, conv: Convention, out: &Path) -> Outcome {
    if k > 16 {
        return Err(Failure::usage(format!("K = {k} is above the supported maximum of 16")));
    }
    let need_even = || {
        if k.is_multiple_of(2) {
            Ok(k / 2)
        } else {
            Err(Failure::usage(format!("this scheme and method need an even K, got {k}")))
        }
    };
    let perm: RowPermutation = match method {
        Method::Index => index_ordering(k, scheme)?,
        Method::Thdc => match scheme {
            OrderingScheme::Mpcgi => thdc_mpcgi_permutation(need_even()?, conv)?.0,
            _ => thdc_rd_permutation(k, conv)?.0,
        },
        Method::Pipeline => {
            let l = need_even()?;
            let seq = pipeline_sequence(l, scheme, Walk::Breadth)?;
            sequence_permutation(&seq, conv)?
        }
    };
    write_file(out, |w| write_permutation_csv(w, &perm))
}

struct SimPlan {
    scheme: Scheme,
    level: u32,
    ratio: Option<f64>,
    milestones: Option<Vec<usize>>,
    noise: NoiseModel,
    first_term: bool,
}

fn prefixes(plan: &SimPlan, seq: &PatternSequence) -> Outcome<Vec<usize>> {
    let n = seq.len();
    let list = match (&plan.milestones, plan.ratio) {
        (Some(list), _) => list.clone(),
        (None, Some(r)) => {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Failure::usage(format!("ratio {r} outside (0, 1]")));
            }
            vec![((r * n as f64).round() as usize).max(1)]
        }
        (None, None) => seq.scheme.milestones(plan.level),
    };
    if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::usage("milestones must be a non-empty, strictly ascending list"));
    }
    if let Some(&bad) = list.iter().find(|&&m| m == 0 || m > n) {
        return Err(Failure::usage(format!("prefix {bad} outside 1..={n}")));
    }
    Ok(list)
}

fn simulate(object: &Path, plan: &SimPlan, out_dir: &Path) -> Outcome {
    let data = fs::read(object)?;
    let o = read_pgm(&data)?;
    if o.side() != 1usize << plan.level.min(31) {
        return Err(Failure::usage(format!(
            "object side {} does not match level {} (side {})",
            o.side(),
            plan.level,
            1u64 << plan.level.min(63)
        )));
    }
    let seq = build_sequence(plan.level, plan.scheme, None, None)?;
    let list = prefixes(plan, &seq)?;
    let records = acquire(&seq, &o, plan.noise)?;
    let mut results: Vec<(Reconstruction, MetricsRow)> = Vec::new();
    for &m in &list {
        let r = if plan.first_term {
            reconstruct_first_term(&records, &seq, m)?
        } else {
            reconstruct(&records, &seq, m)?
        };
        let q = metrics(&r, &o)?;
        let row = MetricsRow {
            prefix_length: m,
            sampling_ratio: m as f64 / seq.len() as f64,
            mse: q.mse,
            psnr_db: q.psnr_db,
            pearson: q.pearson,
        };
        results.push((r, row));
    }
    let width = seq.len().to_string().len();
    write_dir(out_dir, |dir| {
        for (r, _) in &results {
            let stem = format!("recon_{:0width$}", r.used_m);
            let pgm = fs::File::create(dir.join(format!("{stem}.pgm")))?;
            let map = write_reconstruction_pgm(BufWriter::new(pgm), r)?;
            write_affine_csv(fs::File::create(dir.join(format!("{stem}_affine.csv")))?, &map)?;
            write_values_csv(BufWriter::new(fs::File::create(dir.join(format!("{stem}.csv")))?), r)?;
        }
        let rows: Vec<MetricsRow> = results.iter().map(|(_, row)| *row).collect();
        write_metrics_csv(fs::File::create(dir.join("metrics.csv"))?, &rows)?;
        Ok(())
    })
}
