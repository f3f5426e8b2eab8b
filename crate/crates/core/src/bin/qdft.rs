use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qdft::bench::{grover_sweep, run_scaling, scaling_csv, ScalingConfig};
use qdft::convolution::{conv_via_qdft_with, ConvolutionOptions};
use qdft::exec::Execution;
use qdft::io::{decode_pgm, parse_signal_csv};
use qdft::qdft1d::{qdft_1d_with, QdftOptions, DEFAULT_BUDGET_MULTIPLIER};
use qdft::qdft2d::{qdft_2d_with, Qdft2dOptions};
use qdft::report::{emit_report, Format, ReportEntry, RunConfig, RunReport};
use qdft::{ComplexVec, Error, QueryLedger, RngStream};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qdft", version, about = "Simulated Grover-search Fourier transforms with classical sparse output")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Stop once the unfound energy fraction drops below this value.
    #[arg(long, global = true, default_value_t = 0.01)]
    epsilon: f64,

    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Input file; `conv` takes two.
    #[arg(long, global = true)]
    input: Vec<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    /// Keep found indices marked and discard repeats after measurement.
    #[arg(long, global = true)]
    literal_oracle: bool,

    /// Compute the first 2D pass exactly instead of searching for it.
    #[arg(long = "exhaustive-2d", global = true)]
    exhaustive_2d: bool,

    /// Per-call search cap, in units of sqrt(N) iterations.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET_MULTIPLIER)]
    budget_multiplier: f64,

    /// Include wall-clock time in the report (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sparse 1D transform of a CSV signal.
    Dft1d,
    /// Sparse 2D transform of a PGM image (center-cropped to a square).
    Dft2d {
        /// Transform independent BxB tiles instead of the whole square.
        #[arg(long)]
        block: Option<usize>,
    },
    /// Periodic convolution of two CSV signals through sparse spectra.
    Conv,
    /// Query-count scaling sweep on planted sparse signals.
    Bench {
        /// Seeds per size.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Comma-separated sizes N.
        #[arg(long, value_delimiter = ',', default_values_t = vec![256usize, 1024, 4096])]
        sizes: Vec<usize>,
        /// Number of planted big coefficients.
        #[arg(long, default_value_t = 4)]
        planted: usize,
        /// Sweep the 2D transform on NxN images.
        #[arg(long = "two-d")]
        two_d: bool,
        /// Run trials one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Compare simulated success probabilities with the closed form.
    GroverCheck {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 4, 8, 16, 32, 64, 128, 256])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        max_iterations: u64,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("qdft: invalid configuration: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("qdft: {e}");
            match e {
                Error::Invariant(_) => ExitCode::from(EXIT_INVARIANT),
                _ => ExitCode::from(EXIT_IO),
            }
        }
    }
}

fn validate(c: &Common) -> Result<(), Failure> {
    if !(c.epsilon > 0.0 && c.epsilon < 1.0) {
        return Err(Failure::Config(format!("--epsilon must lie in (0, 1), got {}", c.epsilon)));
    }
    if !(c.budget_multiplier >= 1.0 && c.budget_multiplier.is_finite()) {
        return Err(Failure::Config(format!(
            "--budget-multiplier must be >= 1, got {}",
            c.budget_multiplier
        )));
    }
    Ok(())
}

fn search_options(c: &Common) -> QdftOptions {
    QdftOptions {
        budget_multiplier: c.budget_multiplier,
        literal_oracle: c.literal_oracle,
    }
}

fn config(c: &Common, subcommand: &str, block: Option<usize>) -> RunConfig {
    RunConfig {
        subcommand: subcommand.to_string(),
        epsilon: c.epsilon,
        seed: c.seed,
        inputs: c.input.iter().map(|p| p.display().to_string()).collect(),
        output: c.output.as_ref().map(|p| p.display().to_string()),
        format: c.format.into(),
        literal_oracle: c.literal_oracle,
        exhaustive_2d: c.exhaustive_2d,
        budget_multiplier: c.budget_multiplier,
        block,
    }
}

fn inputs(c: &Common, want: usize) -> Result<Vec<Vec<u8>>, Failure> {
    if c.input.len() != want {
        return Err(Failure::Config(format!(
            "expected {want} --input file(s), got {}",
            c.input.len()
        )));
    }
    c.input
        .iter()
        .map(|p| fs::read(p).map_err(Failure::from))
        .collect()
}

fn write_out(c: &Common, bytes: &[u8]) -> Result<(), Failure> {
    match &c.output {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    let c = &cli.common;
    validate(c)?;
    let started = Instant::now();
    let elapsed = |r: &mut RunReport| {
        if c.timing {
            r.wall_clock_ms = Some(started.elapsed().as_secs_f64() * 1e3);
        }
    };
    let mut rng = RngStream::new(c.seed);

    match &cli.command {
        Command::Dft1d => {
            let data = inputs(c, 1)?;
            let x = parse_signal_csv(&data[0])?;
            let run = qdft_1d_with(&x, c.epsilon, &mut rng, &search_options(c))?;
            let s = &run.spectrum;
            let mut report = RunReport {
                config: config(c, "dft1d", None),
                entries: s
                    .entries()
                    .iter()
                    .map(|(k, &z)| ReportEntry::new(k.to_string(), z))
                    .collect(),
                found: s.found(),
                residual_energy: s.residual_energy(),
                total_energy: s.total_energy(),
                ledger: run.ledger,
                relative_l2_error: None,
                trace: run.trace,
                wall_clock_ms: None,
            };
            elapsed(&mut report);
            write_out(c, &emit_report(&report, c.format.into()))?;
        }
        Command::Dft2d { block } => {
            let data = inputs(c, 1)?;
            let image = decode_pgm(&data[0])?;
            let side = image.width.min(image.height);
            let tile = block.unwrap_or(side);
            if tile == 0 || tile > side {
                return Err(Failure::Config(format!(
                    "--block must lie in 1..={side}, got {tile}"
                )));
            }
            let x0 = (image.width - side) / 2;
            let y0 = (image.height - side) / 2;
            let opts = Qdft2dOptions {
                search: search_options(c),
                exhaustive_first_pass: c.exhaustive_2d,
                ..Default::default()
            };
            let tiles = side / tile;
            let mut entries = Vec::new();
            let mut ledger = QueryLedger::default();
            let (mut residual, mut total, mut found) = (0.0, 0.0, 0);
            for by in 0..tiles {
                for bx in 0..tiles {
                    let f = image.square_at(x0 + bx * tile, y0 + by * tile, tile)?;
                    let mut tile_rng = rng.fork();
                    let run = qdft_2d_with(&f, c.epsilon, &mut tile_rng, &opts)?;
                    let s = &run.spectrum;
                    for (p, &z) in s.entries() {
                        let (i, j) = (by * tile + p.row, bx * tile + p.col);
                        entries.push(ReportEntry::new(format!("{i}:{j}"), z));
                    }
                    ledger.merge(&run.ledger);
                    residual += s.residual_energy();
                    total += s.total_energy();
                    found += s.found();
                }
            }
            let mut report = RunReport {
                config: config(c, "dft2d", *block),
                entries,
                found,
                residual_energy: residual,
                total_energy: total,
                ledger,
                relative_l2_error: None,
                trace: Vec::new(),
                wall_clock_ms: None,
            };
            elapsed(&mut report);
            write_out(c, &emit_report(&report, c.format.into()))?;
        }
        Command::Conv => {
            let data = inputs(c, 2)?;
            let u = parse_signal_csv(&data[0])?;
            let v = parse_signal_csv(&data[1])?;
            let opts = ConvolutionOptions {
                search: search_options(c),
                ..Default::default()
            };
            let r = conv_via_qdft_with(&u, &v, c.epsilon, &mut rng, &opts)?;
            let w_hat = ComplexVec::new(r.w_hat.clone())?;
            let total = w_hat.iter().map(|z| z.norm_sqr()).sum();
            let mut report = RunReport {
                config: config(c, "conv", None),
                entries: w_hat
                    .iter()
                    .enumerate()
                    .map(|(k, &z)| ReportEntry::new(k.to_string(), z))
                    .collect(),
                found: r.found[0] + r.found[1],
                residual_energy: 0.0,
                total_energy: total,
                ledger: r.ledgers[0].merged(&r.ledgers[1]),
                relative_l2_error: r.relative_l2_error,
                trace: Vec::new(),
                wall_clock_ms: None,
            };
            elapsed(&mut report);
            write_out(c, &emit_report(&report, c.format.into()))?;
        }
        Command::Bench {
            trials,
            sizes,
            planted,
            two_d,
            sequential,
        } => {
            if *trials == 0 || sizes.is_empty() || sizes.contains(&0) {
                return Err(Failure::Config("--trials and --sizes must be positive".into()));
            }
            let cfg = ScalingConfig {
                sizes: sizes.clone(),
                trials: *trials,
                planted: *planted,
                epsilon: c.epsilon,
                base_seed: c.seed,
                two_d: *two_d,
                search: search_options(c),
                exhaustive_2d: c.exhaustive_2d,
                ..Default::default()
            };
            let exec = if *sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let points = run_scaling(&cfg, exec)?;
            let bytes = match c.format {
                FormatArg::Csv => scaling_csv(&points).into_bytes(),
                FormatArg::Json => {
                    let mut v = serde_json::to_vec_pretty(&serde_json::json!({
                        "config": cfg,
                        "points": points,
                    }))
                    .expect("serializable");
                    v.push(b'\n');
                    v
                }
            };
            write_out(c, &bytes)?;
        }
        Command::GroverCheck {
            sizes,
            max_iterations,
        } => {
            if sizes.contains(&0) {
                return Err(Failure::Config("--sizes must be positive".into()));
            }
            let check = grover_sweep(sizes, *max_iterations, Execution::Parallel)?;
            let bytes = match c.format {
                FormatArg::Csv => format!(
                    "cases,max_deviation,worst_n,worst_marked,worst_iterations\n{},{},{},{},{}\n",
                    check.cases,
                    check.max_deviation,
                    check.worst_n,
                    check.worst_marked,
                    check.worst_iterations
                )
                .into_bytes(),
                FormatArg::Json => {
                    let mut v = serde_json::to_vec_pretty(&check).expect("serializable");
                    v.push(b'\n');
                    v
                }
            };
            write_out(c, &bytes)?;
            if check.max_deviation > 1e-12 {
                eprintln!("qdft: max deviation {} exceeds 1e-12", check.max_deviation);
                return Ok(ExitCode::from(EXIT_INVARIANT));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
