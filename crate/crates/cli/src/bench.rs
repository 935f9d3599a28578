//! `meanpay bench`: algorithms x models, one row per cell.

use std::path::PathBuf;

use clap::Args;
use meanpay_core::{solve, Algorithm, GeneratorSpec, Heuristic, ModelSource, Report};
use rayon::prelude::*;
use serde::Serialize;

use crate::{load_model, Failure, Tuning};

#[derive(Args)]
pub struct BenchArgs {
    /// Model file; repeatable.
    #[arg(long = "model", value_name = "PATH")]
    models: Vec<PathBuf>,
    /// Built-in family; repeatable.
    #[arg(long = "generate", value_name = "FAMILY:PARAMS")]
    generated: Vec<GeneratorSpec>,
    /// Comma-separated algorithms.
    #[arg(long = "alg", value_delimiter = ',', default_value = "nvi,local-vi,odv")]
    algorithms: Vec<Algorithm>,
    /// Comma-separated heuristics; `odv` gets one row per heuristic.
    #[arg(long = "heuristic", value_delimiter = ',', default_value = "md")]
    heuristics: Vec<Heuristic>,
    #[command(flatten)]
    tuning: Tuning,
    /// Cells run in parallel. Wall times are only comparable with 1.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// JSON rows instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Serialize)]
struct Row {
    #[serde(flatten)]
    report: Report,
    heuristic: Option<String>,
    error: Option<String>,
}

struct Cell<'a> {
    source: &'a ModelSource,
    algorithm: Algorithm,
    heuristic: Option<Heuristic>,
}

pub fn run(args: &BenchArgs) -> Result<(), Failure> {
    if args.jobs == 0 {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    for &alg in &args.algorithms {
        args.tuning.options(alg, Heuristic::Md).map_err(Failure::usage)?;
    }
    let mut sources = Vec::new();
    for path in &args.models {
        sources.push(load_model(path)?);
    }
    sources.extend(args.generated.iter().map(|&g| ModelSource::Generated(g)));

    let mut cells = Vec::new();
    for source in &sources {
        for &algorithm in &args.algorithms {
            if algorithm == Algorithm::Odv {
                for &h in &args.heuristics {
                    cells.push(Cell {
                        source,
                        algorithm,
                        heuristic: Some(h),
                    });
                }
            } else {
                cells.push(Cell {
                    source,
                    algorithm,
                    heuristic: None,
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let rows: Vec<Row> = pool.install(|| cells.par_iter().map(|c| run_cell(c, &args.tuning)).collect());

    if args.json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialize"));
    } else {
        print!("{}", table(&rows));
    }
    Ok(())
}

fn run_cell(cell: &Cell, tuning: &Tuning) -> Row {
    let options = tuning
        .options(cell.algorithm, cell.heuristic.unwrap_or(Heuristic::Md))
        .expect("validated");
    let (report, error) = match solve(cell.source, &options) {
        Ok(r) => (r, None),
        Err(e) => (Report::new(cell.algorithm, cell.source.name()), Some(e.to_string())),
    };
    Row {
        report,
        heuristic: cell.heuristic.map(|h| h.to_string()),
        error,
    }
}

const COLUMNS: [&str; 11] = [
    "model", "algorithm", "value", "lower", "upper", "iterations", "episodes", "explored_states", "explored_mecs",
    "wall_ms", "flags",
];

fn table(rows: &[Row]) -> String {
    fn opt<T: ToString>(v: &Option<T>) -> String {
        v.as_ref().map_or_else(|| "-".to_owned(), T::to_string)
    }
    let mut cells: Vec<Vec<String>> = vec![COLUMNS.iter().map(|c| c.to_string()).collect()];
    for row in rows {
        let r = &row.report;
        let algorithm = match &row.heuristic {
            Some(h) => format!("{}/{h}", r.algorithm),
            None => r.algorithm.clone(),
        };
        let mut flags = r.flags.join(",");
        if let Some(e) = &row.error {
            flags = format!("error: {e}");
        }
        cells.push(vec![
            r.model.clone(),
            algorithm,
            opt(&r.value),
            opt(&r.lower),
            opt(&r.upper),
            opt(&r.iterations),
            opt(&r.episodes),
            opt(&r.explored_states),
            opt(&r.explored_mecs),
            format!("{:.1}", r.wall_ms),
            flags,
        ]);
    }
    let widths: Vec<usize> = (0..COLUMNS.len())
        .map(|i| cells.iter().map(|row| row[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
