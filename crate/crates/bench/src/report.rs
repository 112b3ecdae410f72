//! CSV output of an aggregate report.
//!
//! Files written to the output directory:
//!
//! * `{method}_{class}.csv` with columns
//!   `alpha1,alpha2,n_av,incidence_pct,count`; `n_av` is `x` when the class
//!   does not occur in a cell.
//! * `summary.csv` with columns `method,class,count,incidence_pct,n_av`,
//!   one row per class plus an `all` row per method.
//! * `audit.csv` with columns
//!   `instances,audited,audit_failures,audit_max_error,max_residual_primary,max_residual_secondary,defects`.
//! * With baseline data: `mismatch.csv` (rows: proposed class, columns:
//!   baseline class) and `mismatch_cells.csv` with columns
//!   `alpha1,alpha2,compared,mismatches,mismatch_pct`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::experiment::{AggregateReport, CellStats, ClassStats, CLASSES};
use crate::HarnessError;

fn pct(part: usize, whole: usize) -> String {
    if whole == 0 {
        "x".to_string()
    } else {
        format!("{:.4}", 100.0 * part as f64 / whole as f64)
    }
}

fn average(s: &ClassStats) -> String {
    s.average()
        .map_or_else(|| "x".to_string(), |v| format!("{v:.6}"))
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn write(
        &mut self,
        name: &str,
        header: &[&str],
        rows: Vec<Vec<String>>,
    ) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        let io = |e: csv::Error| HarnessError::Output {
            path: path.clone(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(&r).map_err(io)?;
        }
        w.flush().map_err(|e| HarnessError::Output {
            path: path.clone(),
            message: e.to_string(),
        })?;
        self.written.push(path);
        Ok(())
    }
}

/// Writes the CSV files described in the module documentation and returns
/// their paths.
pub fn emit_report(report: &AggregateReport, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::Output {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut w = Writer {
        dir: dir.to_path_buf(),
        written: Vec::new(),
    };

    let has_baseline = report.totals(true).iter().any(|s| s.count > 0);
    let mut methods = Vec::new();
    if report.method.runs_proposed() {
        methods.push(("proposed", false));
    }
    if has_baseline {
        methods.push(("baseline", true));
    }

    let mut summary = Vec::new();
    for &(label, baseline) in &methods {
        let pick = |c: &CellStats| if baseline { c.baseline } else { c.proposed };
        for (k, class) in CLASSES.iter().enumerate() {
            let rows = report
                .cells
                .iter()
                .map(|c| {
                    let stats = pick(c);
                    let total = CellStats::total(&stats).count;
                    vec![
                        c.alpha1.to_string(),
                        c.alpha2.to_string(),
                        average(&stats[k]),
                        pct(stats[k].count, total),
                        stats[k].count.to_string(),
                    ]
                })
                .collect();
            w.write(
                &format!("{label}_{}.csv", class.name()),
                &["alpha1", "alpha2", "n_av", "incidence_pct", "count"],
                rows,
            )?;
        }
        let totals = report.totals(baseline);
        let all = CellStats::total(&totals);
        for (k, class) in CLASSES.iter().enumerate() {
            summary.push(vec![
                label.to_string(),
                class.name().to_string(),
                totals[k].count.to_string(),
                pct(totals[k].count, all.count),
                average(&totals[k]),
            ]);
        }
        summary.push(vec![
            label.to_string(),
            "all".to_string(),
            all.count.to_string(),
            pct(all.count, all.count),
            average(&all),
        ]);
    }
    w.write(
        "summary.csv",
        &["method", "class", "count", "incidence_pct", "n_av"],
        summary,
    )?;

    w.write(
        "audit.csv",
        &[
            "instances",
            "audited",
            "audit_failures",
            "audit_max_error",
            "max_residual_primary",
            "max_residual_secondary",
            "defects",
        ],
        vec![vec![
            report.instances.to_string(),
            report.audit.audited.to_string(),
            report.audit.failures.to_string(),
            format!("{:e}", report.audit.max_error),
            format!("{:e}", report.max_residual_primary),
            format!("{:e}", report.max_residual_secondary),
            report.defects.len().to_string(),
        ]],
    )?;

    if has_baseline && report.method.runs_proposed() {
        let mut header = vec!["proposed"];
        header.extend(CLASSES.iter().map(|c| c.name()));
        let rows = CLASSES
            .iter()
            .enumerate()
            .map(|(p, class)| {
                let mut row = vec![class.name().to_string()];
                row.extend(report.mismatch[p].iter().map(|n| n.to_string()));
                row
            })
            .collect();
        w.write("mismatch.csv", &header, rows)?;

        let rows = report
            .cells
            .iter()
            .map(|c| {
                vec![
                    c.alpha1.to_string(),
                    c.alpha2.to_string(),
                    c.compared.to_string(),
                    c.mismatches.to_string(),
                    pct(c.mismatches, c.compared),
                ]
            })
            .collect();
        w.write(
            "mismatch_cells.csv",
            &["alpha1", "alpha2", "compared", "mismatches", "mismatch_pct"],
            rows,
        )?;
    }
    Ok(w.written)
}
