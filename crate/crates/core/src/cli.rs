//! The `quant` command-line tool.
//!
//! Machine-readable output is CSV on stdout; diagnostics go to stderr.
//! Exit codes: 0 success / quantifiable, 1 not quantifiable, 2 usage or I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::harness::{self, Discipline, Mix, Structure, WorkloadSpec};
use crate::history::History;
use crate::oracle;
use crate::tensor::{self, Mode, TensorShape};
use crate::verifier;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "QUANT_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "quant",
    version,
    about = "Quantifiability checking and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a history file; exit 0 if quantifiable, 1 if not.
    Verify { file: PathBuf },
    /// Brute-force check of a small history (at most 10 calls).
    Oracle { file: PathBuf },
    /// Print the item x object matrix or heatmap of a history.
    Tensor {
        file: PathBuf,
        /// Expected dimensions I,O,P,M (items, objects, processes, methods).
        #[arg(long, value_parser = parse_dims)]
        dims: TensorShape,
        #[arg(long, value_enum, default_value_t = Emit::Matrix)]
        emit: Emit,
    },
    /// Run a workload and print a throughput row.
    Bench {
        #[arg(long, value_parser = parse_from_str::<Structure>)]
        structure: Structure,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = 1000)]
        ops: usize,
        #[arg(long, value_parser = parse_from_str::<Mix>, default_value = "50")]
        mix: Mix,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sublists / tail slots; defaults to the thread count.
        #[arg(long)]
        width: Option<usize>,
        #[arg(long, default_value_t = 8)]
        fail_threshold: usize,
        #[arg(long, default_value_t = 0)]
        prefill: usize,
        #[arg(long, value_enum, default_value_t = Workload::Mixed)]
        workload: Workload,
        /// Save the recorded history here.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Inversion-count distribution and entropy of a recorded history.
    Entropy {
        file: PathBuf,
        #[arg(long, value_enum)]
        discipline: DisciplineArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Emit {
    Matrix,
    Heatmap,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Workload {
    /// Random or pairwise producer/consumer mix.
    Mixed,
    /// Every thread produces, then every thread consumes.
    FillDrain,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DisciplineArg {
    Lifo,
    Fifo,
}

fn parse_from_str<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

fn parse_dims(s: &str) -> Result<TensorShape, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("dims must be four positive integers I,O,P,M: {e}"))?;
    match parts[..] {
        [i, o, p, m] if parts.iter().all(|&d| d > 0) => Ok(TensorShape::new(i, o, p, m)),
        _ => Err("dims must be four positive integers I,O,P,M".into()),
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the tool on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "quant: {msg}");
            EXIT_USAGE
        }
    }
}

fn load(path: &PathBuf) -> Result<History, String> {
    History::load(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, String> {
    let io = |e: std::io::Error| e.to_string();
    match command {
        Command::Verify { file } => {
            let history = load(&file)?;
            let verdict = verifier::verify(&history).map_err(|e| e.to_string())?;
            writeln!(out, "quantifiable,calls,pending,configurations,violations").map_err(io)?;
            writeln!(
                out,
                "{},{},{},{},{}",
                verdict.quantifiable,
                verdict.calls,
                verdict.pending,
                verdict.h_floor.len(),
                verdict.violations.len()
            )
            .map_err(io)?;
            if !verdict.violations.is_empty() {
                writeln!(out, "configuration,reason").map_err(io)?;
                for v in &verdict.violations {
                    writeln!(out, "\"{}\",{}", v.config, v.reason).map_err(io)?;
                }
            }
            Ok(if verdict.quantifiable {
                EXIT_OK
            } else {
                EXIT_REJECTED
            })
        }
        Command::Oracle { file } => {
            let history = load(&file)?;
            let ordering =
                oracle::exists_conservative_ordering(&history).map_err(|e| e.to_string())?;
            let literal = oracle::naive_definition2(&history);
            writeln!(out, "conservative_ordering,definition2").map_err(io)?;
            writeln!(out, "{ordering},{literal}").map_err(io)?;
            Ok(if ordering { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Tensor { file, dims, emit } => {
            let history = load(&file)?;
            let v = tensor::vectorize(&history);
            if v.shape != dims {
                return Err(format!(
                    "--dims {dims} does not match the history's dimensions {}",
                    v.shape
                ));
            }
            let t = v.tensor();
            let matrix = match emit {
                Emit::Matrix => tensor::sum_over(&t, &[Mode::Process, Mode::Method])
                    .map_err(|e| e.to_string())?,
                Emit::Heatmap => tensor::heatmap(&t),
            };
            let header: Vec<String> = v.objects.iter().map(|o| o.to_string()).collect();
            writeln!(out, "item,{}", header.join(",")).map_err(io)?;
            let rows = v.shape.items;
            for (r, item) in v.items.iter().enumerate() {
                let label = item.map_or_else(|| "null".to_string(), |i| i.to_string());
                let cells: Vec<String> = (0..v.shape.objects)
                    .map(|c| format!("{}", matrix.data()[r + rows * c] + 0.0))
                    .collect();
                writeln!(out, "{label},{}", cells.join(",")).map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Bench {
            structure,
            threads,
            ops,
            mix,
            seed,
            width,
            fail_threshold,
            prefill,
            workload,
            record,
        } => {
            let seed = match std::env::var(SEED_ENV) {
                Ok(s) => s
                    .trim()
                    .parse()
                    .map_err(|_| format!("{SEED_ENV}={s} is not an unsigned integer"))?,
                Err(_) => seed,
            };
            let spec = WorkloadSpec {
                structure,
                threads,
                ops_per_thread: ops,
                mix,
                seed,
                prefill,
                width: width.unwrap_or(threads.max(1)),
                fail_threshold,
            };
            let (report, history) = match workload {
                Workload::Mixed => harness::run_bench(&spec),
                Workload::FillDrain => harness::run_fill_drain(&spec),
            }
            .map_err(|e| e.to_string())?;
            if let Some(path) = record {
                history
                    .save(&path)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
            writeln!(out, "{}", harness::BenchReport::CSV_HEADER).map_err(io)?;
            writeln!(out, "{}", report.csv_row()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Entropy { file, discipline } => {
            let history = load(&file)?;
            let discipline = match discipline {
                DisciplineArg::Lifo => Discipline::Lifo,
                DisciplineArg::Fifo => Discipline::Fifo,
            };
            let stats =
                harness::history_entropy(&history, discipline).map_err(|e| e.to_string())?;
            write!(out, "{}", stats.to_csv()).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::MethodCall;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("quant").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_capture(&[]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["verify"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["verify", "x.csv", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
        let (code, _, err) = run_capture(&["verify", "/nonexistent/h.csv"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("/nonexistent/h.csv"));
    }

    #[test]
    fn tensor_rejects_wrong_dims() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        History::new(vec![MethodCall::producer(0, 0, 1)])
            .save(&path)
            .unwrap();
        let p = path.to_str().unwrap();
        let (code, out, _) = run_capture(&["tensor", p, "--dims", "1,1,1,1"]);
        assert_eq!((code, out.as_str()), (EXIT_OK, "item,0\n1,1\n"));
        assert_eq!(
            run_capture(&["tensor", p, "--dims", "2,1,1,1"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_capture(&["tensor", p, "--dims", "1,1,1"]).0, EXIT_USAGE);
    }

    #[test]
    fn bench_zero_ops() {
        let (code, out, _) = run_capture(&[
            "bench",
            "--structure",
            "qstack",
            "--threads",
            "1",
            "--ops",
            "0",
        ]);
        assert_eq!(code, EXIT_OK);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some(harness::BenchReport::CSV_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "qstack");
        assert_eq!(row[6].parse::<f64>().unwrap(), 0.0);
    }
}
