use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use levymult::catalogue::{self, CatalogueOptions};
use levymult::matrix_decomp::{decompose, ComplexMatrix};
use levymult::mc_simulator::{
    characteristic_check, pairing_identity, subordination_audit, wang_campaign, Scenario, TestFunction,
};
use levymult::multiplier_apply::{estimate_operator_norm, GridFunction, Multiplier, NormSearch};
use levymult::quadrature::QuadOptions;
use levymult::symbol::{circle_points, SymbolConfig};

const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "levymult", version, about = "Lévy multipliers: symbols, decompositions, norms and Monte Carlo checks")]
struct Cli {
    /// Relative quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-13)]
    abs_tol: f64,
    /// Worker thread cap.
    #[arg(long, global = true, env = "LEVYMULT_THREADS")]
    threads: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// CSV of the symbol over a ξ grid.
    SymbolEval {
        /// Symbol JSON.
        #[arg(long)]
        config: PathBuf,
        /// Equally spaced directions on a circle (d = 2).
        #[arg(long, conflicts_with = "points")]
        angles: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// JSON array of points.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Splits a symmetric matrix into spectral atoms and a modulator.
    Decompose {
        /// Matrix JSON `{"re": [[...]], "im": [[...]]}`.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        bound: f64,
    },
    /// Applies a symbol to a periodic grid function.
    Apply {
        #[arg(long)]
        config: PathBuf,
        /// Grid file, binary or `.csv`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = GridFormat::Binary)]
        format: GridFormat,
    },
    /// Lower bound for the `L^p` operator norm.
    Opnorm {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        length: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo campaigns.
    Simulate {
        #[arg(long, value_enum)]
        check: Campaign,
        /// Scenario JSON: measure, drift, modulator, horizon, point.
        #[arg(long)]
        scenario: PathBuf,
        /// Test function JSON for `f`.
        #[arg(long)]
        f: Option<PathBuf>,
        /// Test function JSON for `g` (pairing).
        #[arg(long)]
        g: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, required = true)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',', default_value = "1.5,3")]
        p: Vec<f64>,
        /// Pairing grid size.
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Pairing grid side.
        #[arg(long, default_value_t = 32.0)]
        length: f64,
        /// JSON array of frequencies for the characteristic check.
        #[arg(long)]
        xi: Option<PathBuf>,
    },
    /// Regenerates every closed-form example and writes a summary.
    Catalogue {
        #[arg(long, default_value_t = 20_000)]
        paths: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GridFormat {
    Binary,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Campaign {
    Wang,
    Pairing,
    Subordination,
    Characteristic,
}

#[derive(Serialize)]
struct Metadata {
    command: &'static str,
    rel_tol: f64,
    abs_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paths: Option<usize>,
}

#[derive(Serialize)]
struct Document<T: Serialize> {
    metadata: Metadata,
    pass: bool,
    result: T,
}

enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<levymult::Error> for Failure {
    fn from(e: levymult::Error) -> Self {
        match e {
            levymult::Error::InvalidInput(_) | levymult::Error::DimensionMismatch { .. } => Failure::Usage(e.into()),
            other => Failure::Numerical(other.into()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("levymult: check failed");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("levymult: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("levymult: numerical failure: {e:#}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    if !(cli.tol > 0.0 && cli.abs_tol > 0.0) {
        return Err(anyhow::anyhow!("tolerances must be positive").into());
    }
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(anyhow::anyhow!("--threads must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("thread pool")?;
    }
    let quad = QuadOptions::with_tolerances(cli.tol, cli.abs_tol);
    let meta = |command, seed, paths| Metadata {
        command,
        rel_tol: cli.tol,
        abs_tol: cli.abs_tol,
        seed,
        paths,
    };

    match &cli.command {
        Command::SymbolEval {
            config,
            angles,
            radius,
            points,
        } => {
            let symbol = read_symbol(config)?.build(&quad)?;
            let xis = match (points, angles) {
                (Some(path), _) => read_json::<Vec<Vec<f64>>>(path)?,
                (None, Some(count)) => circle_points(*count, *radius),
                (None, None) => return Err(anyhow::anyhow!("symbol-eval needs --angles or --points").into()),
            };
            let values = symbol.eval_many(&xis)?;
            let mut text = format!("# rel_tol={:e} abs_tol={:e}\n", cli.tol, cli.abs_tol);
            let names: Vec<String> = (1..=symbol.dim()).map(|k| format!("xi_{k}")).collect();
            text.push_str(&format!("{},re,im\n", names.join(",")));
            for (xi, m) in xis.iter().zip(&values) {
                for x in xi {
                    text.push_str(&format!("{x:e},"));
                }
                text.push_str(&format!("{:e},{:e}\n", m.re, m.im));
            }
            write_output(cli.out.as_deref(), text.as_bytes())?;
            Ok(true)
        }
        Command::Decompose { matrix, bound } => {
            let a = read_json::<ComplexMatrix>(matrix)?;
            let dec = decompose(&a.to_matrix()?, *bound)?;
            emit_json(cli, meta("decompose", None, None), true, &dec)?;
            Ok(true)
        }
        Command::Apply { config, input, format } => {
            let symbol = read_symbol(config)?.build(&quad)?;
            let g = read_grid(input)?;
            let out = Multiplier::for_grid(&symbol, &g)?.apply(&g)?;
            let mut bytes = Vec::new();
            match format {
                GridFormat::Binary => out.write_binary(&mut bytes)?,
                GridFormat::Csv => out.write_csv(&mut bytes)?,
            }
            write_output(cli.out.as_deref(), &bytes)?;
            write_sidecar(cli, &meta("apply", None, None))?;
            Ok(true)
        }
        Command::Opnorm {
            config,
            p,
            n,
            length,
            trials,
            iterations,
            seed,
        } => {
            let symbol = read_symbol(config)?.build(&quad)?;
            let base = NormSearch::for_dim(symbol.dim());
            let search = NormSearch {
                n: n.unwrap_or(base.n),
                length: length.unwrap_or(base.length),
                trials: trials.unwrap_or(base.trials),
                iterations: iterations.unwrap_or(base.iterations),
                seed: *seed,
            };
            let report = estimate_operator_norm(&symbol, *p, &search)?;
            let pass = !report.discretization_suspect;
            emit_json(cli, meta("opnorm", Some(*seed), None), pass, &report)?;
            Ok(pass)
        }
        Command::Simulate {
            check,
            scenario,
            f,
            g,
            paths,
            seed,
            p,
            n,
            length,
            xi,
        } => {
            let seed = seed.ok_or_else(|| anyhow::anyhow!("simulate requires --seed"))?;
            let scenario = read_json::<Scenario>(scenario)?;
            let dim = scenario.measure.dim();
            let load = |path: &Option<PathBuf>, name: &str| -> Result<TestFunction, Failure> {
                match path {
                    Some(path) => Ok(read_json::<TestFunction>(path)?),
                    None => Ok(TestFunction::gaussian(vec![0.0; dim], 1.0).with_context(|| format!("default {name}"))?),
                }
            };
            let metadata = meta("simulate", Some(seed), Some(*paths));
            match check {
                Campaign::Wang => {
                    let f = load(f, "f")?;
                    let reports = wang_campaign(&scenario, &f, p, *paths, seed)?;
                    let rows: Vec<_> = p
                        .iter()
                        .zip(&reports)
                        .map(|(p, r)| serde_json::json!({ "p": p, "report": r }))
                        .collect();
                    let pass = reports.iter().all(|r| r.pass);
                    emit_json(cli, metadata, pass, &rows)?;
                    Ok(pass)
                }
                Campaign::Pairing => {
                    let f = load(f, "f")?;
                    let g = load(g, "g")?;
                    let report = pairing_identity(&scenario, &f, &g, *n, *length, *paths, seed)?;
                    emit_json(cli, metadata, report.pass, &report)?;
                    Ok(report.pass)
                }
                Campaign::Subordination => {
                    let f = load(f, "f")?;
                    let report = subordination_audit(&scenario, &f, *paths, seed)?;
                    emit_json(cli, metadata, report.pass, &report)?;
                    Ok(report.pass)
                }
                Campaign::Characteristic => {
                    let xis = match xi {
                        Some(path) => read_json::<Vec<Vec<f64>>>(path)?,
                        None => (1..=20)
                            .map(|k| {
                                let mut v = vec![0.0; dim];
                                v[0] = 0.25 * k as f64;
                                v
                            })
                            .collect(),
                    };
                    let points = characteristic_check(&scenario, &xis, *paths, seed)?;
                    let pass = points.iter().all(|c| c.pass);
                    emit_json(cli, metadata, pass, &points)?;
                    Ok(pass)
                }
            }
        }
        Command::Catalogue { paths, seed } => {
            let options = CatalogueOptions {
                quad,
                paths: *paths,
                seed: *seed,
                ..CatalogueOptions::default()
            };
            let summary = catalogue::run(&options);
            for entry in &summary.entries {
                eprintln!(
                    "{} {} (error {:e}, tolerance {:e})",
                    if entry.pass { "PASS" } else { "FAIL" },
                    entry.name,
                    entry.error,
                    entry.tolerance
                );
            }
            emit_json(cli, meta("catalogue", Some(*seed), Some(*paths)), summary.pass, &summary)?;
            Ok(summary.pass)
        }
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_symbol(path: &Path) -> anyhow::Result<SymbolConfig> {
    let text = read_text(path)?;
    SymbolConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_grid(path: &Path) -> anyhow::Result<GridFunction> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let grid = if csv {
        GridFunction::read_csv(BufReader::new(file))
    } else {
        let mut bytes = Vec::new();
        BufReader::new(file).read_to_end(&mut bytes)?;
        GridFunction::read_binary(bytes.as_slice())
    };
    grid.with_context(|| format!("reading grid {}", path.display()))
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            w.write_all(bytes)?;
            w.flush()?;
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// Metadata for non-JSON outputs goes next to the output file, or to stderr.
fn write_sidecar(cli: &Cli, metadata: &Metadata) -> anyhow::Result<()> {
    let text = serde_json::to_string(metadata)?;
    match &cli.out {
        Some(path) => {
            let mut name = path.as_os_str().to_owned();
            name.push(".meta.json");
            std::fs::write(PathBuf::from(name), text + "\n")?;
        }
        None => eprintln!("{text}"),
    }
    Ok(())
}

fn emit_json<T: Serialize>(cli: &Cli, metadata: Metadata, pass: bool, result: &T) -> anyhow::Result<()> {
    let doc = Document { metadata, pass, result };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write_output(cli.out.as_deref(), text.as_bytes())
}
