//! Parameter sweeps: one independent experiment per axis value.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, ExperimentConfig, ExperimentKind};
use crate::experiment::{run_experiment, ResultRecord, RunError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub value: String,
    /// The record, or the error / panic message of this point.
    pub outcome: Result<ResultRecord, String>,
}

fn point_config(base: &ExperimentConfig, axis: &str, value: &str, dir: PathBuf) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = base.with_key(axis, value)?;
    cfg.kind = base.sweep_kind;
    cfg.sweep_kind = None;
    cfg.sweep_axis = None;
    cfg.sweep_values = None;
    cfg.threads = None;
    cfg.out_dir = Some(dir);
    Ok(cfg)
}

/// Runs every point of `base.sweep_values` along `base.sweep_axis` in
/// parallel, each into `out_dir/point_NNNN`. Failures, including panics,
/// stay with their point.
pub fn sweep(base: &ExperimentConfig, base_dir: &Path) -> Result<Vec<SweepPoint>, RunError> {
    base.validate()?;
    if base.kind()? != ExperimentKind::Sweep {
        return Err(ConfigError::InvalidField { field: "kind", reason: "expected `sweep`".into() }.into());
    }
    let axis = base.sweep_axis.clone().expect("validated");
    let values = base.sweep_values.clone().unwrap_or_default();
    let root = base.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let work = || -> Vec<SweepPoint> {
        values
            .par_iter()
            .enumerate()
            .map(|(index, value)| {
                let dir = root.join(format!("point_{index:04}"));
                let outcome = match point_config(base, &axis, value, dir) {
                    Err(e) => Err(e.to_string()),
                    Ok(cfg) => match catch_unwind(AssertUnwindSafe(|| run_experiment(&cfg, base_dir))) {
                        Ok(Ok(record)) => Ok(record),
                        Ok(Err(e)) => Err(e.to_string()),
                        Err(panic) => Err(panic_message(panic.as_ref())),
                    },
                };
                SweepPoint { index, value: value.clone(), outcome }
            })
            .collect()
    };
    let points = match base.threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool").install(work),
        _ => work(),
    };
    write_aggregate(&root, &axis, &points)?;
    Ok(points)
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    let text = payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into());
    format!("panic: {text}")
}

fn write_aggregate(root: &Path, axis: &str, points: &[SweepPoint]) -> Result<(), RunError> {
    std::fs::create_dir_all(root).map_err(|source| RunError::Io { path: root.to_owned(), source })?;
    let path = root.join("sweep.csv");
    let err = |source| RunError::Csv { path: path.clone(), source };
    let mut w = csv::Writer::from_path(&path).map_err(err)?;
    w.write_record(["index", axis, "status", "verdict", "config_digest", "summary"]).map_err(err)?;
    for p in points {
        let row = match &p.outcome {
            Ok(r) => vec![
                p.index.to_string(),
                p.value.clone(),
                "ok".into(),
                serde_json::to_value(r.verdict).expect("serializable").as_str().unwrap_or("").to_owned(),
                r.config_digest.clone(),
                r.summary.to_string(),
            ],
            Err(e) => vec![p.index.to_string(), p.value.clone(), "error".into(), String::new(), String::new(), e.clone()],
        };
        w.write_record(row).map_err(err)?;
    }
    w.flush().map_err(|source| RunError::Io { path: path.clone(), source })
}
