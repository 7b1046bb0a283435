use std::fs;
use std::path::Path;

use super::config::FileConfig;
use super::CliError;
use crate::analysis::{
    check_appendix, exact_expected_successes, rerendezvous_expected_successes,
    rerendezvous_expected_successes_as_printed, verify_theorem1, verify_theorem2, AccessMatrix,
    OracleMethod,
};
use crate::engine::{
    config_hash, run, run_replication, sweep, MetricsReport, RunOptions, ScenarioConfig,
};
use crate::sensing::detection_curves;

const GAP_TOLERANCE: f64 = 1e-12;

/// What a successful command reports back; `failed_checks > 0` maps to exit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Outcome {
    pub rows: usize,
    pub failed_checks: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failed_checks > 0 {
            1
        } else {
            0
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(header).map_err(|e| io_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

const RUN_HEADER: [&str; 15] = [
    "config_hash",
    "algorithm",
    "M",
    "N",
    "lambda",
    "td_min",
    "td_max",
    "ts",
    "efficiency_mean",
    "efficiency_ci95",
    "e_upper",
    "collisions",
    "false_alarms",
    "miss_detections",
    "seed",
];

fn run_record(cfg: &ScenarioConfig, report: &MetricsReport) -> Result<Vec<String>, CliError> {
    Ok(vec![
        config_hash(cfg)?,
        cfg.mac_algorithm.to_string(),
        cfg.num_sus.to_string(),
        cfg.channel_set()?.len().to_string(),
        cfg.traffic.mean_arrival_interval.to_string(),
        cfg.traffic.packet_size_min.to_string(),
        cfg.traffic.packet_size_max.to_string(),
        cfg.traffic.sensing_slots.to_string(),
        report.efficiency_mean.to_string(),
        report.efficiency_ci95.to_string(),
        report.e_upper.to_string(),
        report.collision_slots.to_string(),
        report.false_alarms.to_string(),
        report.miss_detections.to_string(),
        cfg.seed.to_string(),
    ])
}

/// `simulate`: one scenario, one CSV row.
pub fn simulate(
    cfg: &FileConfig,
    out: &Path,
    event_log: Option<&Path>,
) -> Result<Outcome, CliError> {
    let scenario = &cfg.scenario;
    scenario.validate()?;
    let report = run(scenario)?;
    let path = out.join("simulate.csv");
    write_csv(&path, &RUN_HEADER, &[run_record(scenario, &report)?])?;
    if let Some(log) = event_log {
        let opts = RunOptions {
            event_log: true,
            ..RunOptions::default()
        };
        let rep = run_replication(scenario, 0, opts)?;
        fs::write(log, rep.events).map_err(|e| io_error(log, e))?;
    }
    println!(
        "{} M={} N={} E={:.4} ±{:.4} (95%, {} reps) E_upper={:.4} G={:.4}",
        scenario.mac_algorithm,
        scenario.num_sus,
        scenario.channel_set()?.len(),
        report.efficiency_mean,
        report.efficiency_ci95,
        report.replications.len(),
        report.e_upper,
        report.total_goodput
    );
    println!(
        "collision slots {:.1}  idle channel slots {:.1}  false alarms {:.1}  misses {:.1}",
        report.collision_slots,
        report.idle_channel_slots,
        report.false_alarms,
        report.miss_detections
    );
    println!("wrote {}", path.display());
    Ok(Outcome {
        rows: 1,
        failed_checks: 0,
    })
}

/// `sweep`: the `[sweep]` section over the `[scenario]` base.
pub fn sweep_command(cfg: &FileConfig, out: &Path) -> Result<Outcome, CliError> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Validation("no [sweep] section (or use --preset)".into()))?;
    let rows = sweep(&cfg.scenario, spec)?;
    let records = rows
        .iter()
        .map(|r| run_record(&r.config, &r.report))
        .collect::<Result<Vec<_>, _>>()?;
    let path = out.join("sweep.csv");
    write_csv(&path, &RUN_HEADER, &records)?;
    println!(
        "{:>10} {:>8} {:>8} {:>8} {:>8}",
        spec.parameter, "algo", "E", "ci95", "E_upper"
    );
    for r in &rows {
        println!(
            "{:>10} {:>8} {:>8.4} {:>8.4} {:>8.4}",
            r.value.to_string(),
            r.config.mac_algorithm.as_str(),
            r.report.efficiency_mean,
            r.report.efficiency_ci95,
            r.report.e_upper
        );
    }
    println!("wrote {}", path.display());
    Ok(Outcome {
        rows: rows.len(),
        failed_checks: 0,
    })
}

/// One line of `analyze.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeRow {
    pub check: &'static str,
    pub m: u32,
    pub n: u32,
    pub l: Option<u32>,
    /// `pass`, `fail`, `skipped`, `error` or `info`.
    pub status: &'static str,
    pub value: f64,
    pub reference: f64,
    pub detail: String,
}

impl AnalyzeRow {
    fn new(check: &'static str, m: u32, n: u32) -> Self {
        Self {
            check,
            m,
            n,
            l: None,
            status: "pass",
            value: f64::NAN,
            reference: f64::NAN,
            detail: String::new(),
        }
    }

    fn error(check: &'static str, m: u32, n: u32, e: crate::Error) -> Self {
        Self {
            status: "error",
            detail: e.to_string(),
            ..Self::new(check, m, n)
        }
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.check.to_string(),
            self.m.to_string(),
            self.n.to_string(),
            self.l.map(|l| l.to_string()).unwrap_or_default(),
            self.status.to_string(),
            self.value.to_string(),
            self.reference.to_string(),
            (self.value - self.reference).abs().to_string(),
            self.detail.clone(),
        ]
    }
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn theorem1_row(m: u32, n: u32, step: f64) -> AnalyzeRow {
    match verify_theorem1(m, n, step) {
        Ok(r) => AnalyzeRow {
            status: pass_fail(r.formula_match),
            value: r.max_value,
            reference: r.predicted_value,
            detail: format!("argmax={:.6} predicted={:.6}", r.argmax_p, r.predicted_p),
            ..AnalyzeRow::new("theorem1", m, n)
        },
        Err(e) => AnalyzeRow::error("theorem1", m, n, e),
    }
}

fn theorem2_rows(m: u32, n: u32) -> Vec<AnalyzeRow> {
    if m < 2 || m > n {
        return vec![AnalyzeRow {
            status: "skipped",
            detail: "theorem scope M≤N".into(),
            ..AnalyzeRow::new("theorem2", m, n)
        }];
    }
    let report = match verify_theorem2(m, n) {
        Ok(r) => r,
        Err(e) => return vec![AnalyzeRow::error("theorem2", m, n, e)],
    };
    let method = match report.method {
        OracleMethod::JointActions => "joint-actions",
        OracleMethod::OccupancyStates => "occupancy-states",
    };
    report
        .gaps
        .iter()
        .enumerate()
        .map(|(l, &gap)| {
            let ok = if l <= 1 {
                gap.abs() < GAP_TOLERANCE
            } else {
                gap > GAP_TOLERANCE
            };
            AnalyzeRow {
                l: Some(l as u32),
                status: pass_fail(ok),
                value: gap,
                reference: 0.0,
                detail: format!("gap Y'-Y via {method}"),
                ..AnalyzeRow::new("theorem2", m, n)
            }
        })
        .collect()
}

fn appendix_row(m: u32, n: u32, sec: &super::AnalyzeSection) -> AnalyzeRow {
    match check_appendix(m, n, sec.fd_step, sec.samples_per_unit) {
        Ok(r) => AnalyzeRow {
            status: pass_fail(r.holds(sec.root_tol, sec.derivative_tol)),
            value: r.first_derivative_error.max(r.second_derivative_error),
            reference: 0.0,
            detail: format!(
                "f(0)={:.1e} f(1)={:.1e} d1_err={:.1e} d2_err={:.1e} min_f''(l>=1)={:.3e}",
                r.f_at_0,
                r.f_at_1,
                r.first_derivative_error,
                r.second_derivative_error,
                r.min_curvature_beyond_one
            ),
            ..AnalyzeRow::new("appendix", m, n)
        },
        Err(e) => AnalyzeRow::error("appendix", m, n, e),
    }
}

fn rerendezvous_rows(m: u32, n: u32) -> Vec<AnalyzeRow> {
    (0..=m)
        .map(|l| {
            let forms = rerendezvous_expected_successes(m, n, l).and_then(|c| {
                let printed = rerendezvous_expected_successes_as_printed(m, n, l)?;
                let matrix = AccessMatrix::rerendezvous(m as usize, n as usize, l as usize)?;
                let (exact, _) = exact_expected_successes(&matrix)?;
                Ok((c, printed, exact))
            });
            match forms {
                Ok((corrected, printed, exact)) => AnalyzeRow {
                    l: Some(l),
                    status: pass_fail((corrected - exact).abs() < GAP_TOLERANCE),
                    value: corrected,
                    reference: exact,
                    detail: format!(
                        "printed={printed:.12} printed_delta={:.3e}",
                        printed - exact
                    ),
                    ..AnalyzeRow::new("rerendezvous_form", m, n)
                },
                Err(e) => AnalyzeRow {
                    l: Some(l),
                    ..AnalyzeRow::error("rerendezvous_form", m, n, e)
                },
            }
        })
        .collect()
}

/// Every row `analyze` produces for the configured ranges.
pub fn analyze_rows(sec: &super::AnalyzeSection) -> Vec<AnalyzeRow> {
    let pairs: Vec<(u32, u32)> = sec
        .m_values
        .iter()
        .flat_map(|&m| sec.n_values.iter().map(move |&n| (m, n)))
        .collect();
    let in_scope = |&&(m, n): &&(u32, u32)| m >= 2 && m <= n;
    let mut rows: Vec<AnalyzeRow> = pairs
        .iter()
        .map(|&(m, n)| theorem1_row(m, n, sec.grid_step))
        .collect();
    rows.extend(pairs.iter().flat_map(|&(m, n)| theorem2_rows(m, n)));
    rows.extend(
        pairs
            .iter()
            .filter(in_scope)
            .map(|&(m, n)| appendix_row(m, n, sec)),
    );
    rows.extend(
        pairs
            .iter()
            .filter(in_scope)
            .flat_map(|&(m, n)| rerendezvous_rows(m, n)),
    );
    rows
}

/// `analyze`: theorem checks over the `[analyze]` ranges.
pub fn analyze(cfg: &FileConfig, out: &Path) -> Result<Outcome, CliError> {
    let sec = &cfg.analyze;
    if sec.m_values.is_empty() || sec.n_values.is_empty() {
        return Err(CliError::Validation(
            "analyze needs non-empty m_values and n_values".into(),
        ));
    }
    if !(sec.grid_step > 0.0 && sec.fd_step > 0.0) {
        return Err(CliError::Validation(
            "analyze steps must be positive".into(),
        ));
    }
    let rows = analyze_rows(sec);
    let path = out.join("analyze.csv");
    let records: Vec<_> = rows.iter().map(AnalyzeRow::record).collect();
    write_csv(
        &path,
        &[
            "check",
            "m",
            "n",
            "l",
            "status",
            "value",
            "reference",
            "abs_error",
            "detail",
        ],
        &records,
    )?;

    println!(
        "{:<18} {:>3} {:>3} {:>3} {:<8} {:>16} {:>16}  detail",
        "check", "M", "N", "l", "status", "value", "reference"
    );
    for r in &rows {
        println!(
            "{:<18} {:>3} {:>3} {:>3} {:<8} {:>16.12} {:>16.12}  {}",
            r.check,
            r.m,
            r.n,
            r.l.map(|l| l.to_string()).unwrap_or_default(),
            r.status,
            r.value,
            r.reference,
            r.detail
        );
    }
    let failed = rows
        .iter()
        .filter(|r| matches!(r.status, "fail" | "error"))
        .count();
    let skipped = rows.iter().filter(|r| r.status == "skipped").count();
    println!(
        "{} checks, {failed} failed, {skipped} skipped; wrote {}",
        rows.len(),
        path.display()
    );
    Ok(Outcome {
        rows: rows.len(),
        failed_checks: failed,
    })
}

/// `sense-curves`: detector false-alarm / miss curves.
pub fn sense_curves(cfg: &FileConfig, out: &Path) -> Result<Outcome, CliError> {
    let sec = &cfg.sense_curves;
    let tnr = sec.tnr_values()?;
    if sec.trials < 1000 {
        eprintln!(
            "warning: {} trials per point gives coarse curves (at least 1000 recommended)",
            sec.trials
        );
    }
    let rows = detection_curves(&sec.detector, &tnr, &sec.depths, sec.trials, sec.seed)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let records: Vec<_> = rows
        .iter()
        .map(|r| {
            vec![
                r.tnr_db.to_string(),
                r.scenario.as_str().to_string(),
                r.trials.to_string(),
                opt(r.p_f),
                opt(r.p_m),
                r.k.to_string(),
            ]
        })
        .collect();
    let path = out.join("sense_curves.csv");
    write_csv(
        &path,
        &["tnr_db", "scenario", "trials", "p_f", "p_m", "k"],
        &records,
    )?;
    println!(
        "{} rows ({} TNR points x {} depths x 4 scenarios); wrote {}",
        rows.len(),
        tnr.len(),
        sec.depths.len(),
        path.display()
    );
    Ok(Outcome {
        rows: rows.len(),
        failed_checks: 0,
    })
}
