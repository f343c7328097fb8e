//! CSV output. Money carries 4 decimals, power 6, voltage 6; metrics use
//! the shortest text that parses back to the same number.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::scenario::{ScenarioResult, TrendReport};

#[derive(Debug, Error)]
#[error("cannot write {path}: {source}")]
pub struct OutputUnwritable {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<PathBuf, OutputUnwritable>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let fail = |source: io::Error| OutputUnwritable {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| fail(e.into()))?;
    w.write_record(header).map_err(|e| fail(e.into()))?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(|e| fail(e.into()))?;
    }
    w.flush().map_err(fail)?;
    Ok(path.to_path_buf())
}

fn kw(v: f64) -> String {
    format!("{v:.6}")
}

fn money(v: f64) -> String {
    format!("{v:.4}")
}

/// Full-precision number; NaN (undefined) is written as `NA`.
pub fn exact(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        format!("{v}")
    }
}

/// Writes one scenario's six tables into `dir`.
pub fn emit_reports(result: &ScenarioResult, dir: &Path) -> Result<Vec<PathBuf>, OutputUnwritable> {
    fs::create_dir_all(dir).map_err(|source| OutputUnwritable {
        path: dir.to_path_buf(),
        source,
    })?;
    let horizon = result.power_flow.len();
    let mut paths = Vec::new();

    paths.push(write_csv(
        &dir.join("loads.csv"),
        &["slot", "household", "gross_kw", "billable_kw"],
        (0..horizon).flat_map(|t| {
            result
                .households
                .iter()
                .map(move |h| vec![t.to_string(), h.index.to_string(), kw(h.gross_kw[t]), kw(h.billable_kw[t])])
        }),
    )?);

    paths.push(write_csv(
        &dir.join("voltages.csv"),
        &["slot", "bus", "v_pu"],
        result.power_flow.iter().enumerate().flat_map(|(t, r)| {
            r.v_mag
                .iter()
                .enumerate()
                .map(move |(b, v)| vec![t.to_string(), (b + 1).to_string(), format!("{v:.6}")])
        }),
    )?);

    paths.push(write_csv(
        &dir.join("flows.csv"),
        &["slot", "branch", "p_kw", "q_kvar"],
        result.power_flow.iter().enumerate().flat_map(|(t, r)| {
            r.branch_p_kw
                .iter()
                .zip(&r.branch_q_kvar)
                .enumerate()
                .map(move |(b, (p, q))| vec![t.to_string(), b.to_string(), kw(*p), kw(*q)])
        }),
    )?);

    paths.push(write_csv(
        &dir.join("losses.csv"),
        &["slot", "loss_kw"],
        result
            .power_flow
            .iter()
            .enumerate()
            .map(|(t, r)| vec![t.to_string(), kw(r.total_loss_kw)]),
    )?);

    paths.push(write_csv(
        &dir.join("costs.csv"),
        &["household", "C_e", "C_p", "objective", "ΔT_total"],
        result.households.iter().map(|h| {
            vec![
                h.index.to_string(),
                money(h.costs.electricity_cost),
                money(h.costs.penalty_cost),
                money(h.costs.objective()),
                h.costs.total_shift_slots().to_string(),
            ]
        }),
    )?);

    paths.push(write_csv(
        &dir.join("metrics.csv"),
        &["name", "value"],
        result
            .metrics
            .rows()
            .into_iter()
            .map(|(name, value)| vec![name.to_string(), exact(value)]),
    )?);
    Ok(paths)
}

/// One row per scenario with its headline numbers.
pub fn emit_summary(results: &[ScenarioResult], path: &Path) -> Result<PathBuf, OutputUnwritable> {
    let mut header = vec!["scenario", "participation", "penalty_price", "pv", "dsm", "total_objective"];
    let names: Vec<&str> = results
        .first()
        .map(|r| r.metrics.rows().into_iter().map(|(n, _)| n).collect())
        .unwrap_or_default();
    header.extend(&names);
    write_csv(
        path,
        &header,
        results.iter().map(|r| {
            let total: f64 = r.households.iter().map(|h| h.costs.objective()).sum();
            let mut row = vec![
                r.spec.label(),
                r.spec.participation.to_string(),
                exact(r.spec.penalty_price),
                r.spec.pv_enabled.to_string(),
                r.spec.dsm_enabled.to_string(),
                money(total),
            ];
            row.extend(r.metrics.rows().into_iter().map(|(_, v)| exact(v)));
            row
        }),
    )
}

pub fn emit_trends(report: &TrendReport, path: &Path) -> Result<PathBuf, OutputUnwritable> {
    write_csv(
        path,
        &["id", "subject", "passed", "detail"],
        report
            .checks
            .iter()
            .map(|c| vec![c.id.clone(), c.subject.clone(), c.passed.to_string(), c.detail.clone()]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_numbers_parse_back() {
        for v in [0.1 + 0.2, 1e-17, 123456.789, -0.0, 2.0f64.sqrt()] {
            assert_eq!(exact(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(exact(f64::NAN), "NA");
    }

    #[test]
    fn unwritable_directory_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("taken");
        fs::write(&file, "x").unwrap();
        let err = write_csv(&file.join("a.csv"), &["x"], Vec::<Vec<String>>::new()).unwrap_err();
        assert!(err.to_string().contains("taken"));
    }
}
