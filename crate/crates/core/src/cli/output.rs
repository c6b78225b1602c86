//! Run artifacts: one trajectory file per run, one summary file, one
//! metadata file.
//!
//! Trajectory and summary bodies hold only seed-deterministic fields, so
//! identical invocations produce bit-identical files. Wall-clock timings and
//! the start timestamp live in `metadata.json` only.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::cli::CliError;
use crate::problem::Orientation;
use crate::result::RunResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Jsonl => "jsonl",
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(body.as_bytes())
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn trajectory_body(run: &RunResult, format: OutputFormat) -> String {
    let mut body = String::new();
    match format {
        OutputFormat::Csv => {
            body.push_str("evaluation,value\n");
            for point in &run.trajectory {
                body.push_str(&format!("{},{}\n", point.evaluation, point.value));
            }
        }
        OutputFormat::Jsonl => {
            for point in &run.trajectory {
                body.push_str(&format!(
                    "{{\"evaluation\":{},\"value\":{}}}\n",
                    point.evaluation, point.value
                ));
            }
        }
    }
    body
}

pub struct SummaryStats {
    pub mean: f64,
    pub std_dev: f64,
    pub best_overall: f64,
}

pub fn summarize(runs: &[RunResult], orientation: Orientation) -> SummaryStats {
    let n = runs.len() as f64;
    let mean = runs.iter().map(|r| r.best_value).sum::<f64>() / n;
    let std_dev = if runs.len() > 1 {
        let ss: f64 = runs
            .iter()
            .map(|r| (r.best_value - mean).powi(2))
            .sum::<f64>();
        (ss / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let best_overall = runs
        .iter()
        .map(|r| r.best_value)
        .fold(
            match orientation {
                Orientation::Maximize => f64::NEG_INFINITY,
                Orientation::Minimize => f64::INFINITY,
            },
            |acc, v| match orientation {
                Orientation::Maximize => acc.max(v),
                Orientation::Minimize => acc.min(v),
            },
        );
    SummaryStats {
        mean,
        std_dev,
        best_overall,
    }
}

pub fn summary_body(
    runs: &[RunResult],
    orientation: Orientation,
    format: OutputFormat,
) -> String {
    let stats = summarize(runs, orientation);
    let mut body = String::new();
    match format {
        OutputFormat::Csv => {
            body.push_str("record,run,seed,best_value,evaluations,iterations\n");
            for (index, run) in runs.iter().enumerate() {
                body.push_str(&format!(
                    "run,{index},{},{},{},{}\n",
                    run.seed, run.best_value, run.evaluations, run.iterations
                ));
            }
            body.push_str(&format!("mean,,,{},,\n", stats.mean));
            body.push_str(&format!("std,,,{},,\n", stats.std_dev));
            body.push_str(&format!("best_overall,,,{},,\n", stats.best_overall));
        }
        OutputFormat::Jsonl => {
            for (index, run) in runs.iter().enumerate() {
                body.push_str(&format!(
                    "{{\"record\":\"run\",\"run\":{index},\"seed\":{},\"best_value\":{},\"evaluations\":{},\"iterations\":{}}}\n",
                    run.seed, run.best_value, run.evaluations, run.iterations
                ));
            }
            body.push_str(&format!(
                "{{\"record\":\"mean\",\"best_value\":{}}}\n",
                stats.mean
            ));
            body.push_str(&format!(
                "{{\"record\":\"std\",\"best_value\":{}}}\n",
                stats.std_dev
            ));
            body.push_str(&format!(
                "{{\"record\":\"best_overall\",\"best_value\":{}}}\n",
                stats.best_overall
            ));
        }
    }
    body
}

/// Write all artifacts; returns the summary path.
pub fn write_run_artifacts(
    out_dir: &Path,
    format: OutputFormat,
    runs: &[RunResult],
    orientation: Orientation,
    command: &str,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let ext = format.extension();
    for (index, run) in runs.iter().enumerate() {
        let path = out_dir.join(format!("run_{index:03}.trajectory.{ext}"));
        write_file(&path, &trajectory_body(run, format))?;
    }
    let summary_path = out_dir.join(format!("summary.{ext}"));
    write_file(&summary_path, &summary_body(runs, orientation, format))?;

    let started = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let metadata = serde_json::json!({
        "command": command,
        "written_unix_seconds": started,
        "runs": runs.iter().enumerate().map(|(index, run)| {
            serde_json::json!({
                "run": index,
                "seed": run.seed,
                "wall_ms": run.wall_time.as_millis() as u64,
                "evaluations": run.evaluations,
                "iterations": run.iterations,
            })
        }).collect::<Vec<_>>(),
    });
    write_file(
        &out_dir.join("metadata.json"),
        &format!("{}\n", serde_json::to_string_pretty(&metadata).expect("metadata serializes")),
    )?;
    Ok(summary_path)
}

pub fn print_summary_table(runs: &[RunResult], orientation: Orientation) {
    let stats = summarize(runs, orientation);
    println!("{:>4} {:>12} {:>16} {:>12} {:>10}", "run", "seed", "best", "evals", "iters");
    for (index, run) in runs.iter().enumerate() {
        println!(
            "{index:>4} {:>12} {:>16.6} {:>12} {:>10}",
            run.seed, run.best_value, run.evaluations, run.iterations
        );
    }
    println!(
        "mean {:.6}  std {:.6}  best_overall {:.6}",
        stats.mean, stats.std_dev, stats.best_overall
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::CompositeSolution;
    use crate::result::TrajectoryPoint;
    use std::time::Duration;

    fn run(seed: u64, best: f64) -> RunResult {
        RunResult {
            best: CompositeSolution::new(vec![]),
            best_value: best,
            trajectory: vec![
                TrajectoryPoint {
                    evaluation: 1,
                    value: best - 1.0,
                },
                TrajectoryPoint {
                    evaluation: 5,
                    value: best,
                },
            ],
            evaluations: 10,
            iterations: 3,
            seed,
            wall_time: Duration::from_millis(12),
        }
    }

    #[test]
    fn csv_bodies_are_deterministic() {
        let runs = vec![run(7, 1.5), run(8, 2.5)];
        let a = summary_body(&runs, Orientation::Maximize, OutputFormat::Csv);
        let b = summary_body(&runs, Orientation::Maximize, OutputFormat::Csv);
        assert_eq!(a, b);
        assert!(a.contains("best_overall,,,2.5,,"));
        let t = trajectory_body(&runs[0], OutputFormat::Csv);
        assert_eq!(t, "evaluation,value\n1,0.5\n5,1.5\n");
    }

    #[test]
    fn jsonl_bodies_are_valid_json_lines() {
        let runs = vec![run(7, 1.5)];
        let body = summary_body(&runs, Orientation::Minimize, OutputFormat::Jsonl);
        for line in body.lines() {
            let value: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(value.get("record").is_some());
        }
        let body = trajectory_body(&runs[0], OutputFormat::Jsonl);
        for line in body.lines() {
            let value: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(value.get("evaluation").is_some());
        }
    }

    #[test]
    fn best_overall_respects_orientation() {
        let runs = vec![run(1, 3.0), run(2, -1.0)];
        assert_eq!(summarize(&runs, Orientation::Maximize).best_overall, 3.0);
        assert_eq!(summarize(&runs, Orientation::Minimize).best_overall, -1.0);
    }
}
