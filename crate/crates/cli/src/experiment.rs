//! Dispatch of one configured experiment and persistence of its outputs.

use std::fs;
use std::path::{Path, PathBuf};

use lyapunov_lab::cycles::{detect_attracting_cycle, CycleError, DEFAULT_TOL};
use lyapunov_lab::exponents::{backward_orbit, forward_exponent_series, slow_recurrence_on_trace};
use lyapunov_lab::hyperbolic::{
    hyperbolic_density_report, hyperbolic_times, shadow_table, DensityOptions,
};
use lyapunov_lab::lab::{
    area_scan, check_return_bound, close_return_campaign, first_entry, fredholm_series, porosity_probe,
    return_bound_campaign, return_time_statistic, Counterexample, ReturnSampling, ReturnTarget,
};
use lyapunov_lab::pliss::{pliss_times, PlissInput};
use lyapunov_lab::{iterate, MapSpec};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, ExperimentKind, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The module rejected the input or could not decide.
    Inconclusive,
    /// Plain computation without a property to check.
    NotApplicable,
}

/// Columns for a plot-ready data file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub config_digest: String,
    pub kind: ExperimentKind,
    pub verdict: Verdict,
    pub summary: Value,
    /// Output files relative to the output directory.
    pub files: Vec<String>,
    #[serde(skip)]
    pub plot: Option<PlotData>,
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.to_owned(), source })?;
        Ok(Outputs { dir: dir.to_owned(), files: Vec::new() })
    }

    fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), RunError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let path = self.dir.join(name);
        let err = |source| RunError::Csv { path: path.clone(), source };
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row).map_err(err)?;
        }
        w.flush().map_err(|source| RunError::Io { path: path.clone(), source })?;
        self.files.push(name.to_owned());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), RunError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| RunError::Io { path: parent.to_owned(), source })?;
        }
        let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
        fs::write(&path, text).map_err(|source| RunError::Io { path: path.clone(), source })?;
        self.files.push(name.to_owned());
        Ok(())
    }
}

fn fmt(x: f64) -> String {
    x.to_string()
}

fn complex_json(z: num_complex::Complex64) -> Value {
    json!([z.re, z.im])
}

struct Outcome {
    verdict: Verdict,
    summary: Value,
    plot: Option<PlotData>,
}

impl Outcome {
    fn plain(summary: Value) -> Self {
        Outcome { verdict: Verdict::NotApplicable, summary, plot: None }
    }

    fn judged(pass: bool, summary: Value) -> Self {
        Outcome { verdict: if pass { Verdict::Pass } else { Verdict::Fail }, summary, plot: None }
    }

    fn inconclusive(error: impl std::fmt::Display) -> Self {
        Outcome { verdict: Verdict::Inconclusive, summary: json!({ "error": error.to_string() }), plot: None }
    }

    fn with_plot(mut self, plot: PlotData) -> Self {
        self.plot = Some(plot);
        self
    }
}

/// Validates `config`, runs it, and writes its CSV files and `results.json`
/// into `out_dir`. Relative `sequence_file` paths resolve against `base`.
pub fn run_experiment(config: &ExperimentConfig, base: &Path) -> Result<ResultRecord, RunError> {
    config.validate()?;
    let kind = config.kind()?;
    if kind == ExperimentKind::Sweep {
        return Err(ConfigError::InvalidField { field: "kind", reason: "use `sweep` for sweeps".into() }.into());
    }
    let out_dir = config.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut out = Outputs::create(&out_dir)?;
    let outcome = match config.threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool");
            pool.install(|| dispatch(kind, config, base, &mut out))?
        }
        _ => dispatch(kind, config, base, &mut out)?,
    };
    let mut record = ResultRecord {
        schema_version: SCHEMA_VERSION,
        config_digest: config.digest(),
        kind,
        verdict: outcome.verdict,
        summary: outcome.summary,
        files: Vec::new(),
        plot: outcome.plot,
    };
    out.files.push("results.json".into());
    record.files = out.files.clone();
    out.files.pop();
    out.json("results.json", &record)?;
    Ok(record)
}

fn dispatch(kind: ExperimentKind, cfg: &ExperimentConfig, base: &Path, out: &mut Outputs) -> Result<Outcome, RunError> {
    if kind == ExperimentKind::Pliss {
        return run_pliss(cfg, base, out);
    }
    let map = cfg.map()?;
    let n_max = cfg.n_max.unwrap_or(1000);
    match kind {
        ExperimentKind::Orbit => {
            let trace = iterate(&map, cfg.point(&map)?, n_max);
            let path = out.dir.join("orbit.csv");
            let file = fs::File::create(&path).map_err(|source| RunError::Io { path: path.clone(), source })?;
            trace.write_csv(file).map_err(|source| RunError::Csv { path, source })?;
            out.files.push("orbit.csv".into());
            let h = trace.horizon();
            Ok(Outcome::plain(json!({
                "horizon": h,
                "escaped_at": trace.escaped_at,
                "hit_critical_at": trace.hit_critical_at,
                "final_point": complex_json(trace.points[h]),
                "chi_final": if h > 0 { Some(trace.chi(h)) } else { None },
            })))
        }
        ExperimentKind::CycleDetect => run_cycle(&map, cfg, out),
        ExperimentKind::Lyapunov => {
            let est = forward_exponent_series(&map, cfg.point(&map)?, n_max);
            out.csv(
                "series.csv",
                &["n", "chi", "inf_tail", "sup_tail"],
                est.samples
                    .iter()
                    .zip(est.running_inf_tail.iter().zip(&est.running_sup_tail))
                    .map(|(&(n, chi), (&lo, &hi))| vec![n.to_string(), fmt(chi), fmt(lo), fmt(hi)]),
            )?;
            let burn_in = cfg.burn_in.unwrap_or(0);
            let lower = est.window_min(burn_in, est.horizon());
            let plot = PlotData {
                name: "chi".into(),
                columns: vec!["n".into(), "chi".into()],
                rows: est.samples.iter().map(|&(n, chi)| vec![n as f64, chi]).collect(),
            };
            Ok(Outcome::plain(json!({
                "chi_final": est.last_chi(),
                "verdict": est.verdict,
                "horizon": est.horizon(),
                "escaped_at": est.escaped_at,
                "burn_in": burn_in,
                "lower_exponent": lower,
                "inf_tail": est.running_inf_tail.get(burn_in.saturating_sub(1)),
                "sup_tail": est.running_sup_tail.get(burn_in.saturating_sub(1)),
            }))
            .with_plot(plot))
        }
        ExperimentKind::Backward => match backward_orbit(&map, cfg.policy()?, n_max) {
            Ok(orbit) => {
                out.csv(
                    "backward.csv",
                    &["n", "re", "im", "log_deriv_sum", "chi"],
                    (0..=orbit.horizon()).map(|n| {
                        let chi = if n == 0 { f64::NAN } else { orbit.chi(n) };
                        let p = orbit.points[n];
                        vec![n.to_string(), fmt(p.re), fmt(p.im), fmt(orbit.cum_logderiv[n]), fmt(chi)]
                    }),
                )?;
                let h = orbit.horizon();
                Ok(Outcome::plain(json!({
                    "policy": orbit.branch_policy,
                    "horizon": h,
                    "chi_final": if h > 0 { Some(orbit.chi(h)) } else { None },
                    "min_chi": (1..=h).map(|n| orbit.chi(n)).fold(f64::INFINITY, f64::min),
                })))
            }
            Err(e) => Ok(Outcome::inconclusive(e)),
        },
        ExperimentKind::Slowrec => {
            let alpha = cfg.alpha.unwrap_or(0.1);
            let trace = iterate(&map, cfg.point(&map)?, n_max);
            match slow_recurrence_on_trace(&map, &trace, alpha, n_max, cfg.reference()?, cfg.burn_in.unwrap_or(0)) {
                Ok(rep) => {
                    out.csv(
                        "violations.csv",
                        &["n", "distance", "threshold"],
                        rep.violations.iter().map(|&n| {
                            let d = (trace.points[n] - reference_point(&map, &rep.reference)).norm();
                            vec![n.to_string(), fmt(d), fmt((-alpha * n as f64).exp())]
                        }),
                    )?;
                    Ok(Outcome::judged(
                        rep.slowly_recurrent_up_to_horizon,
                        json!({
                            "alpha": alpha,
                            "horizon": rep.horizon,
                            "violations": rep.violations.len(),
                            "first_violation": rep.violations.first(),
                            "escaped_at": rep.escaped_at,
                            "slowly_recurrent_up_to_horizon": rep.slowly_recurrent_up_to_horizon,
                        }),
                    ))
                }
                Err(e) => Ok(Outcome::inconclusive(e)),
            }
        }
        ExperimentKind::Hyptimes => {
            let lambda = cfg.lambda.unwrap_or(2.0);
            let trace = iterate(&map, cfg.point(&map)?, n_max);
            match hyperbolic_times(&trace, lambda, n_max) {
                Ok(set) => {
                    let mut flags = vec![false; n_max + 1];
                    set.times.iter().for_each(|&m| flags[m] = true);
                    out.csv(
                        "hyptimes.csv",
                        &["n", "is_hyperbolic"],
                        (1..=n_max).map(|n| vec![n.to_string(), (flags[n] as u8).to_string()]),
                    )?;
                    Ok(Outcome::plain(json!({ "lambda": lambda, "count": set.times.len(), "density": set.density })))
                }
                Err(e) => Ok(Outcome::inconclusive(e)),
            }
        }
        ExperimentKind::Shadows => {
            let trace = iterate(&map, cfg.point(&map)?, n_max);
            let (k, n_cap) = (cfg.k.unwrap_or(1.0), cfg.n_cap.unwrap_or(3));
            match shadow_table(&map, &trace, k, n_cap) {
                Ok(table) => {
                    out.csv(
                        "shadows.csv",
                        &["n", "shadow_cover_count", "in_A"],
                        (1..table.cover.len())
                            .map(|n| vec![n.to_string(), table.cover[n].to_string(), (table.in_a[n] as u8).to_string()]),
                    )?;
                    Ok(Outcome::judged(
                        table.density_bound_holds(),
                        json!({
                            "k": k,
                            "n_cap": n_cap,
                            "horizon": table.horizon(),
                            "shadows": table.shadows.len(),
                            "a_density": table.a_density,
                            "c_g_fit": table.c_g_fit,
                            "density_bound": table.density_bound,
                        }),
                    ))
                }
                Err(e) => Ok(Outcome::inconclusive(e)),
            }
        }
        ExperimentKind::DensityReport => {
            let lambda = cfg.lambda.unwrap_or(1.2);
            let eps0 = cfg.eps0.unwrap_or(0.1);
            let opts = DensityOptions {
                rho: cfg.rho.unwrap_or(0.1),
                k0: cfg.k,
                n_cap: cfg.n_cap,
                mode: cfg.mode()?,
            };
            match hyperbolic_density_report(&map, cfg.point(&map)?, lambda, eps0, n_max, &opts) {
                Ok(rep) => {
                    let mut hyp = vec![false; n_max + 1];
                    rep.hyperbolic_times.iter().for_each(|&m| hyp[m] = true);
                    let mut crit = vec![None; n_max + 1];
                    rep.criticality.iter().for_each(|&(n, c)| crit[n] = Some(c));
                    out.csv(
                        "density.csv",
                        &["n", "is_hyperbolic", "shadow_cover_count", "in_A", "criticality_count"],
                        (1..=n_max).map(|n| {
                            vec![
                                n.to_string(),
                                (hyp[n] as u8).to_string(),
                                rep.cover[n].to_string(),
                                (rep.in_a[n] as u8).to_string(),
                                crit[n].map(|c| c.to_string()).unwrap_or_default(),
                            ]
                        }),
                    )?;
                    let plot = PlotData {
                        name: "density".into(),
                        columns: vec!["n".into(), "in_A".into(), "is_hyperbolic".into()],
                        rows: (1..=n_max).map(|n| vec![n as f64, rep.in_a[n] as u8 as f64, hyp[n] as u8 as f64]).collect(),
                    };
                    let pass = rep.violations.is_empty() && rep.density >= rep.theta / 2.0;
                    Ok(Outcome::judged(
                        pass,
                        json!({
                            "chi_m": rep.chi_m,
                            "required": rep.required,
                            "rate": rep.rate,
                            "theta": rep.theta,
                            "hyperbolic_density": rep.hyperbolic_density,
                            "k0": rep.k0,
                            "n_cap": rep.n_cap,
                            "c_g_fit": rep.c_g_fit,
                            "a_density": rep.a_density,
                            "density": rep.density,
                            "violations": rep.violations.len(),
                            "all_certified": rep.all_certified,
                        }),
                    )
                    .with_plot(plot))
                }
                Err(e) => Ok(Outcome::inconclusive(e)),
            }
        }
        ExperimentKind::ReturnBound => run_return_bound(&map, cfg, out),
        ExperimentKind::CloseReturn => {
            let lambda = cfg.lambda.unwrap_or(1.05);
            let delta0 = cfg.delta0.unwrap_or(0.01);
            let seed = cfg.seed.unwrap_or(0);
            match close_return_campaign(&map, cfg.region()?, lambda, delta0, cfg.samples.unwrap_or(1000), n_max, seed) {
                Ok(rep) => {
                    write_counterexamples(out, "close", &rep.failures)?;
                    Ok(Outcome::judged(
                        rep.failures.is_empty(),
                        json!({
                            "starts": rep.starts,
                            "checks": rep.checks,
                            "failures": rep.failures.len(),
                            "min_slack": finite_or_null(rep.min_slack),
                            "sink_period": rep.sink_period,
                        }),
                    ))
                }
                Err(e) => Ok(Outcome::inconclusive(e)),
            }
        }
        ExperimentKind::Fredholm => run_fredholm(&map, cfg, out),
        ExperimentKind::AreaScan => {
            let alpha = cfg.alpha.unwrap_or(0.1);
            let n_values = cfg.n_values.clone().unwrap_or_else(|| vec![20, 30, 40, 50]);
            let samples = cfg.samples.unwrap_or(100_000);
            let seed = cfg.seed.unwrap_or(0);
            let scan = match area_scan(&map, alpha, &n_values, cfg.window()?, samples, seed) {
                Ok(scan) => scan,
                Err(e) => return Ok(Outcome::inconclusive(e)),
            };
            out.csv(
                "area.csv",
                &["n", "hits", "fraction"],
                scan.n_values
                    .iter()
                    .zip(&scan.hits)
                    .zip(&scan.measures)
                    .map(|((n, h), m)| vec![n.to_string(), h.to_string(), fmt(*m)]),
            )?;
            let mut summary = json!({
                "alpha": alpha,
                "samples": samples,
                "fractions": scan.measures,
                "nonincreasing": scan.is_nonincreasing(),
                "sink_period": scan.sink_period,
            });
            if let Some(eps) = &cfg.eps_values {
                let sampling = if map.marked_point().im == 0.0 && matches!(map, MapSpec::UnicriticalPoly { .. }) {
                    ReturnSampling::RealSegment
                } else {
                    ReturnSampling::Disk
                };
                match return_time_statistic(&map, eps, sampling, samples, seed, n_max) {
                    Ok(stats) => {
                        out.csv(
                            "returns.csv",
                            &["eps", "min_return", "log_inv_eps"],
                            stats.iter().map(|s| {
                                vec![
                                    fmt(s.eps),
                                    s.min_return.map(|m| m.to_string()).unwrap_or_default(),
                                    fmt(s.log_inv_eps),
                                ]
                            }),
                        )?;
                        summary["return_times"] = serde_json::to_value(stats).expect("serializable");
                    }
                    Err(e) => summary["return_times_error"] = Value::String(e.to_string()),
                }
            }
            Ok(Outcome::judged(scan.is_nonincreasing(), summary))
        }
        ExperimentKind::Porosity => {
            let j_values = cfg.j_values.clone().unwrap_or_else(|| vec![2, 3, 4]);
            let probe = match porosity_probe(
                &map,
                cfg.point(&map)?,
                &j_values,
                cfg.grid.unwrap_or(65),
                cfg.escape_budget.unwrap_or(200),
            ) {
                Ok(p) => p,
                Err(e) => return Ok(Outcome::inconclusive(e)),
            };
            out.csv(
                "porosity.csv",
                &["j", "rho"],
                probe.j_values.iter().zip(&probe.hole_radii).map(|(j, r)| vec![j.to_string(), fmt(*r)]),
            )?;
            Ok(Outcome::plain(json!({
                "hole_radii": probe.hole_radii,
                "grid": probe.grid,
                "low_resolution": probe.low_resolution,
            })))
        }
        ExperimentKind::Pliss | ExperimentKind::Sweep => unreachable!("handled above"),
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn reference_point(map: &MapSpec, r: &lyapunov_lab::exponents::RecurrenceReference) -> num_complex::Complex64 {
    match r {
        lyapunov_lab::exponents::RecurrenceReference::CriticalPoint => map.critical_point().unwrap_or_default(),
        lyapunov_lab::exponents::RecurrenceReference::CriticalValue => map.marked_point(),
    }
}

fn run_cycle(map: &MapSpec, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Outcome, RunError> {
    let result = detect_attracting_cycle(
        map,
        cfg.max_period.unwrap_or(16),
        cfg.max_iter.unwrap_or(100_000),
        cfg.tol.unwrap_or(DEFAULT_TOL),
    );
    match result {
        Ok(Some(rec)) => {
            out.csv(
                "cycle.csv",
                &["k", "re", "im"],
                rec.points.iter().enumerate().map(|(k, z)| vec![k.to_string(), fmt(z.re), fmt(z.im)]),
            )?;
            Ok(Outcome::plain(json!({
                "status": "attracting",
                "period": rec.period,
                "multiplier": complex_json(rec.multiplier),
                "multiplier_modulus": rec.multiplier.norm(),
                "exponent": rec.exponent(),
                "residual": rec.residual,
            })))
        }
        Ok(None) => Ok(Outcome::plain(json!({ "status": "none detected" }))),
        Err(CycleError::AmbiguousConvergence { period, modulus }) => Ok(Outcome {
            verdict: Verdict::Inconclusive,
            summary: json!({ "status": "ambiguous", "period": period, "multiplier_modulus": modulus }),
            plot: None,
        }),
        Err(e) => Ok(Outcome::inconclusive(e)),
    }
}

fn run_pliss(cfg: &ExperimentConfig, base: &Path, out: &mut Outputs) -> Result<Outcome, RunError> {
    let a = cfg.sequence_values(base)?;
    let bound = cfg.bound.unwrap_or_else(|| a.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let mean = if a.is_empty() { 0.0 } else { a.iter().sum::<f64>() / a.len() as f64 };
    let b2 = cfg.b2.unwrap_or(mean);
    let b1 = cfg.b1.unwrap_or(b2 / 2.0);
    let input = PlissInput::new(a, bound, b1, b2);
    match pliss_times(&input) {
        Ok(times) => {
            let mut flags = vec![false; input.a.len() + 1];
            times.indices.iter().for_each(|&i| flags[i] = true);
            out.csv(
                "pliss.csv",
                &["index", "a", "is_pliss"],
                input.a.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), fmt(*v), (flags[i + 1] as u8).to_string()]),
            )?;
            let holds = times.violation.is_none();
            let exceeds = times.exceeds_theta_fraction(input.a.len());
            let meets = times.meets_theta_fraction(input.a.len(), 1e-9);
            let outcome = json!({
                "indices": times.indices,
                "theta": times.theta,
                "bound": bound,
                "b1": b1,
                "b2": b2,
                "hypotheses_hold": holds,
                "violation": times.violation,
                "exceeds_theta_fraction": exceeds,
                "meets_theta_fraction": meets,
            });
            Ok(if holds { Outcome::judged(meets, outcome) } else { Outcome::plain(outcome) })
        }
        Err(e) => Ok(Outcome::inconclusive(e)),
    }
}

fn write_counterexamples(out: &mut Outputs, prefix: &str, failures: &[Counterexample]) -> Result<(), RunError> {
    for (i, f) in failures.iter().enumerate() {
        out.json(&format!("counterexamples/{prefix}_{i:05}_task{}.json", f.task), f)?;
    }
    Ok(())
}

fn run_return_bound(map: &MapSpec, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Outcome, RunError> {
    let delta = cfg.delta.unwrap_or(0.01);
    let lambda = cfg.lambda.unwrap_or(1.05);
    let n_max = cfg.n_max.unwrap_or(10_000);
    let seed = cfg.seed.unwrap_or(0);
    if let Some(p) = &cfg.point {
        let z = cfg.point(map)?;
        let target = match cfg.reference()? {
            lyapunov_lab::exponents::RecurrenceReference::CriticalPoint => ReturnTarget::CriticalPoint,
            lyapunov_lab::exponents::RecurrenceReference::CriticalValue => ReturnTarget::CriticalValue,
        };
        let Some(event) = first_entry(map, z, delta, target, n_max) else {
            return Ok(Outcome::plain(json!({ "point": p, "event": Value::Null })));
        };
        let check = check_return_bound(&event, lambda);
        out.csv(
            "return.csv",
            &["n", "log_lhs", "log_rhs", "slack", "passed"],
            [vec![check.n.to_string(), fmt(check.log_lhs), fmt(check.log_rhs), fmt(check.slack), check.passed.to_string()]],
        )?;
        if !check.passed {
            let ce = Counterexample { map: map.clone(), z, delta, lambda, n: check.n, seed, task: 0, target: Some(target), check: check.clone() };
            write_counterexamples(out, "return", &[ce])?;
        }
        return Ok(Outcome::judged(check.passed, json!({ "n": check.n, "slack": check.slack, "kind": check.kind })));
    }
    let events = cfg.events.unwrap_or(10_000);
    let max_tasks = cfg.max_tasks.unwrap_or(100 * events as u64 + 1000);
    match return_bound_campaign(map, cfg.region()?, delta, lambda, events, n_max, seed, max_tasks) {
        Ok(rep) => {
            write_counterexamples(out, "return", &rep.failures)?;
            out.csv(
                "failures.csv",
                &["task", "target", "z_re", "z_im", "n", "slack"],
                rep.failures.iter().map(|f| {
                    vec![
                        f.task.to_string(),
                        format!("{:?}", f.target.expect("campaign target")),
                        fmt(f.z.re),
                        fmt(f.z.im),
                        f.n.to_string(),
                        fmt(f.check.slack),
                    ]
                }),
            )?;
            Ok(Outcome::judged(
                rep.passed(),
                json!({
                    "tasks": rep.tasks,
                    "events_critical_value": rep.events_critical_value,
                    "events_critical_point": rep.events_critical_point,
                    "failures": rep.failures.len(),
                    "min_slack": finite_or_null(rep.min_slack),
                    "sink_period": rep.sink_period,
                }),
            ))
        }
        Err(e) => Ok(Outcome::inconclusive(e)),
    }
}

fn run_fredholm(map: &MapSpec, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Outcome, RunError> {
    let n_cut = cfg.n_cut.unwrap_or(200);
    let series = match fredholm_series(map, n_cut) {
        Ok(s) => s,
        Err(e) => return Ok(Outcome::inconclusive(e)),
    };
    out.csv(
        "fredholm.csv",
        &["n", "re", "im", "abs"],
        series.coeffs.iter().enumerate().map(|(n, u)| vec![n.to_string(), fmt(u.re), fmt(u.im), fmt(u.norm())]),
    )?;
    let radius = cfg.scan_radius.unwrap_or(0.95);
    let scan = series.zero_scan(radius, cfg.grid.unwrap_or(1000));
    let mut summary = json!({
        "n_cut": n_cut,
        "envelope": series.envelope,
        "escaped_at": series.escaped_at,
        "scan_radius": radius,
        "scan_points": scan.points,
        "min_abs": scan.min_abs,
        "argmin": complex_json(scan.argmin),
        "max_tail_bound": scan.max_tail_bound,
        "certified_nonzero": scan.certified_nonzero(),
    });
    if let Some(t) = cfg.complex_t()? {
        let v = series.eval(t);
        summary["t"] = complex_json(t);
        summary["value"] = complex_json(v.value);
        summary["tail_bound"] = json!(v.tail_bound);
    }
    Ok(Outcome::judged(scan.certified_nonzero(), summary))
}
