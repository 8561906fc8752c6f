use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;

use unit_fibers::fibration::{
    bialy_locate, locate_fiber, standard_fiber, villarceau_fiber, FibrationSpec, Handedness,
};
use unit_fibers::geometry::{disjointness_certificate, linked, pair_geometry, Verdict};
use unit_fibers::harness::{
    export_fibers, linking_matrix, verify_construction, ExportFormat, SampleGrid,
};
use unit_fibers::hypercomplex::multiplication_table;
use unit_fibers::skew::hurwitz_radon;

/// Construct and verify unit n-sphere fibrations of regions of R^(2n+1).
#[derive(Parser)]
#[command(name = "unit-fibers", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a single fiber and print its JSON record.
    Fiber(FiberArgs),
    /// Full intersection geometry and disjointness certificate for a center pair.
    Pair(PairArgs),
    /// Linkedness verdict for a constructed pair, or a linking matrix for a fiber file.
    Link(LinkArgs),
    /// Find the fiber containing a point.
    Locate(LocateArgs),
    /// Seeded randomized verification campaign over the construction.
    Verify(VerifyArgs),
    /// Table of the Hurwitz-Radon function and admissibility, as CSV.
    Rho(RhoArgs),
    /// Export sampled fibers as OBJ polylines, CSV points, or JSON records.
    Export(ExportArgs),
    /// Dump a composition-algebra multiplication table as CSV.
    AlgebraTable(AlgebraTableArgs),
}

#[derive(Args)]
struct FiberArgs {
    /// Fiber dimension (1, 3 or 7) for the hypercomplex construction.
    #[arg(long)]
    n: Option<usize>,
    /// Center parameter, comma-separated (length n+1).
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    /// Villarceau minor radius in [0, 1); selects the bialy construction.
    #[arg(long)]
    r: Option<f64>,
    /// Villarceau rotation angle.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi: f64,
    /// Villarceau handedness.
    #[arg(long, default_value = "right")]
    handedness: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    y: String,
    #[arg(long, allow_hyphen_values = true)]
    z: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LinkArgs {
    /// Fiber dimension for a constructed pair.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    /// JSON file with a list of fiber records; prints the full linking matrix.
    #[arg(long)]
    fibers: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LocateArgs {
    /// Fiber dimension of the hypercomplex construction.
    #[arg(long)]
    n: Option<usize>,
    /// Locate inside the bialy instead.
    #[arg(long)]
    bialy: bool,
    /// The point, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    p: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    bound: f64,
    /// Write the report JSON here (the human-readable table goes to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RhoArgs {
    /// Largest q to tabulate.
    #[arg(long, default_value_t = 32)]
    max: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Fibration kind: bialy or standard.
    #[arg(long, default_value = "bialy")]
    kind: String,
    /// Fiber dimension for the standard kind.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Points sampled per fiber.
    #[arg(long, default_value_t = 128)]
    density: usize,
    #[arg(long, default_value = "obj")]
    format: ExportFormat,
    /// Bialy grid: number of tori.
    #[arg(long, default_value_t = 9)]
    tori: usize,
    /// Bialy grid: circles per torus.
    #[arg(long, default_value_t = 24)]
    circles: usize,
    /// Standard grid: number of random fibers.
    #[arg(long, default_value_t = 32)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    bound: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AlgebraTableArgs {
    /// Algebra dimension: 2, 4 or 8.
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_vec(s: &str) -> Result<DVector<f64>, String> {
    let coords: Result<Vec<f64>, _> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect();
    Ok(DVector::from_vec(coords?))
}

fn writer_for(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Exit code 2 for usage-level errors, 1 for runtime/verification failures.
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads() {
    if let Ok(v) = std::env::var("UNIT_FIBERS_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads() {}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Fiber(args) => {
            let fiber = match (args.n, &args.y, args.r) {
                (Some(n), Some(y), None) => {
                    let y = parse_vec(y).map_err(CliError::Usage)?;
                    standard_fiber(n, &y, false).map_err(|e| CliError::Runtime(e.to_string()))?
                }
                (None, None, Some(r)) => {
                    let handedness = match args.handedness.as_str() {
                        "right" => Handedness::Right,
                        "left" => Handedness::Left,
                        other => {
                            return Err(CliError::Usage(format!(
                                "unknown handedness '{other}' (expected left|right)"
                            )))
                        }
                    };
                    villarceau_fiber(r, args.phi, handedness)
                        .map_err(|e| CliError::Runtime(e.to_string()))?
                }
                _ => {
                    return Err(CliError::Usage(
                        "pass either --n with --y (standard) or --r [--phi] (villarceau)".into(),
                    ))
                }
            };
            let mut out = writer_for(&args.out)?;
            serde_json::to_writer_pretty(&mut out, &fiber.to_record())
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            writeln!(out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Pair(args) => {
            let y = parse_vec(&args.y).map_err(CliError::Usage)?;
            let z = parse_vec(&args.z).map_err(CliError::Usage)?;
            let g = pair_geometry(args.n, &y, &z).map_err(|e| CliError::Runtime(e.to_string()))?;
            let cert = disjointness_certificate(&g);
            let mut out = writer_for(&args.out)?;
            let doc = serde_json::json!({
                "geometry": g,
                "certificate": cert,
            });
            serde_json::to_writer_pretty(&mut out, &doc)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            writeln!(out)?;
            Ok(if cert.verdict == Verdict::CertifiedDisjoint {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Link(args) => {
            let mut out = writer_for(&args.out)?;
            if let Some(path) = &args.fibers {
                let text = std::fs::read_to_string(path)?;
                let records: Vec<unit_fibers::FiberRecord> =
                    serde_json::from_str(&text).map_err(|e| CliError::Usage(e.to_string()))?;
                let fibers: Result<Vec<_>, _> = records
                    .iter()
                    .map(unit_fibers::Fiber::from_record)
                    .collect();
                let fibers = fibers.map_err(|e| CliError::Usage(e.to_string()))?;
                let m = linking_matrix(&fibers).map_err(|e| CliError::Runtime(e.to_string()))?;
                serde_json::to_writer_pretty(&mut out, &m)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                writeln!(out)?;
                let all_linked = m.iter().enumerate().all(|(i, row)| {
                    row.iter().enumerate().all(|(j, v)| {
                        i == j || *v == unit_fibers::LinkVerdict::Linked
                    })
                });
                return Ok(if all_linked {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                });
            }
            let (Some(n), Some(y), Some(z)) = (args.n, &args.y, &args.z) else {
                return Err(CliError::Usage(
                    "pass --fibers FILE, or --n with --y and --z".into(),
                ));
            };
            let y = parse_vec(y).map_err(CliError::Usage)?;
            let z = parse_vec(z).map_err(CliError::Usage)?;
            let fy = standard_fiber(n, &y, false).map_err(|e| CliError::Runtime(e.to_string()))?;
            let fz = standard_fiber(n, &z, false).map_err(|e| CliError::Runtime(e.to_string()))?;
            let verdict = linked(&fy, &fz).map_err(|e| CliError::Runtime(e.to_string()))?;
            writeln!(out, "{}", if verdict { "linked" } else { "unlinked" })?;
            Ok(if verdict { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Locate(args) => {
            let p = parse_vec(&args.p).map_err(CliError::Usage)?;
            if args.bialy {
                let loc = bialy_locate(&p).map_err(|e| CliError::Runtime(e.to_string()))?;
                println!("r = {}", loc.r);
                println!("phi = {}", loc.phi);
            } else {
                let n = args
                    .n
                    .ok_or_else(|| CliError::Usage("pass --n or --bialy".into()))?;
                let y = locate_fiber(n, &p).map_err(|e| CliError::Runtime(e.to_string()))?;
                let coords: Vec<String> = y.iter().map(|v| v.to_string()).collect();
                println!("y = {}", coords.join(","));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let report = verify_construction(args.n, args.pairs, args.seed, args.bound)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            print!("{}", report.table());
            if let Some(path) = &args.out {
                let mut f = BufWriter::new(File::create(path)?);
                serde_json::to_writer_pretty(&mut f, &report)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                writeln!(f)?;
            }
            Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Rho(args) => {
            if args.max < 1 {
                return Err(CliError::Usage("--max must be at least 1".into()));
            }
            let mut out = writer_for(&args.out)?;
            writeln!(out, "q,rho,admissible")?;
            for q in 1..=args.max {
                let rho = hurwitz_radon(q).map_err(|e| CliError::Usage(e.to_string()))?;
                // q = n + 1 is admissible exactly when rho(q) = q
                writeln!(out, "{q},{rho},{}", rho == q)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Export(args) => {
            let (spec, grid) = match args.kind.as_str() {
                "bialy" => (
                    FibrationSpec::Bialy,
                    SampleGrid::Torus {
                        tori: args.tori,
                        circles: args.circles,
                    },
                ),
                "standard" => (
                    FibrationSpec::standard(args.n).map_err(|e| CliError::Usage(e.to_string()))?,
                    SampleGrid::Random {
                        count: args.count,
                        seed: args.seed,
                        bound: args.bound,
                    },
                ),
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown kind '{other}' (expected bialy|standard)"
                    )))
                }
            };
            let mut out = writer_for(&args.out)?;
            let count = export_fibers(&spec, &grid, args.density, args.format, &mut out)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            out.flush()?;
            eprintln!("exported {count} fibers");
            Ok(ExitCode::SUCCESS)
        }
        Command::AlgebraTable(args) => {
            let table =
                multiplication_table(args.dim).map_err(|e| CliError::Usage(e.to_string()))?;
            let mut out = writer_for(&args.out)?;
            writeln!(out, "a,b,c,sign")?;
            for e in table {
                writeln!(out, "{},{},{},{}", e.a, e.b, e.c, e.sign as i64)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
