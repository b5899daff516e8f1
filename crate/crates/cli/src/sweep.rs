use std::collections::BTreeMap;
use std::fs;

use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{execute, CommandKind};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// One sweep axis parsed from "key=a,b,c".
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

pub fn parse_axis(entry: &str) -> CliResult<Axis> {
    let (key, values) =
        entry.split_once('=').ok_or_else(|| CliError::Config(format!("sweep entry {entry:?} is not key=a,b,c")))?;
    let values: Vec<String> = values.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    Ok(Axis { key: key.trim().to_string(), values })
}

/// Cross product of the axes, last axis varying fastest.
pub fn sweep_points(axes: &[Axis]) -> Vec<Vec<(String, String)>> {
    if axes.is_empty() || axes.iter().any(|a| a.values.is_empty()) {
        return Vec::new();
    }
    let mut points: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((axis.key.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    points
}

#[derive(Debug, Serialize)]
struct IndexEntry {
    index: usize,
    dir: String,
    assignments: BTreeMap<String, String>,
    error: Option<String>,
    summary: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize)]
struct SweepIndex {
    command: String,
    points: Vec<IndexEntry>,
}

pub const INDEX_NAME: &str = "index.json";

/// Runs `cfg.sweep_command` at every grid point in its own sub-directory,
/// up to `cfg.workers` at a time, then writes an aggregate index.
pub fn cmd_sweep(cfg: &RunConfig) -> CliResult<usize> {
    let kind: CommandKind = cfg.sweep_command.parse()?;
    let axes = cfg.sweep.iter().map(|s| parse_axis(s)).collect::<CliResult<Vec<_>>>()?;
    let points = sweep_points(&axes);
    if points.is_empty() {
        return Err(CliError::Config("no sweep points".into()));
    }
    let width = points.len().saturating_sub(1).to_string().len().max(3);
    let configs = points
        .iter()
        .enumerate()
        .map(|(i, assignment)| {
            let mut c = cfg.clone();
            for (k, v) in assignment {
                c = c.with_assignment(k, v)?;
            }
            c.sweep.clear();
            c.workers = 1;
            c.out_dir = cfg.out_dir.join(format!("point_{i:0width$}"));
            Ok(c)
        })
        .collect::<CliResult<Vec<_>>>()?;
    fs::create_dir_all(&cfg.out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let results: Vec<CliResult<_>> = pool.install(|| configs.par_iter().map(|c| execute(kind, c)).collect());
    let mut entries = Vec::with_capacity(points.len());
    let mut first_error = None;
    for (i, ((assignment, c), r)) in points.iter().zip(&configs).zip(results).enumerate() {
        let dir = c.out_dir.strip_prefix(&cfg.out_dir).unwrap_or(&c.out_dir).display().to_string();
        let (error, summary) = match r {
            Ok(m) => (None, m.summary),
            Err(e) => {
                let msg = e.to_string();
                first_error.get_or_insert(e);
                (Some(msg), BTreeMap::new())
            }
        };
        entries.push(IndexEntry { index: i, dir, assignments: assignment.iter().cloned().collect(), error, summary });
    }
    let index = SweepIndex { command: kind.name().into(), points: entries };
    let mut text = serde_json::to_string_pretty(&index)?;
    text.push('\n');
    fs::write(cfg.out_dir.join(INDEX_NAME), text)?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(points.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_product_order() {
        let axes = vec![parse_axis("v0=1.1,1.3").unwrap(), parse_axis("n_spins=10,20").unwrap()];
        let pts = sweep_points(&axes);
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[1], vec![("v0".into(), "1.1".into()), ("n_spins".into(), "20".into())]);
    }

    #[test]
    fn empty_grids() {
        assert!(sweep_points(&[]).is_empty());
        assert!(sweep_points(&[parse_axis("v0=").unwrap()]).is_empty());
        assert!(parse_axis("v0").is_err());
    }
}
