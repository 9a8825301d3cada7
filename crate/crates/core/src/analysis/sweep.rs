use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rmse;
use crate::error::{Error, Result};
use crate::experiment::{run_scenario, Estimator};
use crate::scenario::{Scenario, ScenarioConfig};

pub const DEFAULT_GRID: [f64; 7] = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3];

/// Which assumed covariance a sweep scales.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    Q,
    R,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Q" | "q" => Ok(SweepAxis::Q),
            "R" | "r" => Ok(SweepAxis::R),
            other => Err(Error::config("axis", format!("unknown axis `{other}` (expected Q or R)"))),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::Q => "Q",
            SweepAxis::R => "R",
        })
    }
}

/// Parses `lo..hi` (decades from `lo` to `hi`) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::config("grid", format!("`{s}` is not a number")))
    };
    let grid: Vec<f64> = if let Some((lo, hi)) = text.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi)?);
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::config("grid", "range needs 0 < lo ≤ hi"));
        }
        let (a, b) = (lo.log10().round() as i32, hi.log10().round() as i32);
        (a..=b).map(|e| 10f64.powi(e)).collect()
    } else {
        text.split(',').map(num).collect::<Result<_>>()?
    };
    if grid.is_empty() || grid.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::config("grid", "values must be positive"));
    }
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub coefficient: f64,
    pub seed: u64,
    /// Per-channel fault RMSE; `None` when the run failed.
    pub rmse: Option<Vec<f64>>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub coefficient: f64,
    pub mean_rmse: Vec<f64>,
    /// Mean over seeds and channels.
    pub mean: f64,
    pub failures: usize,
}

fn run_cell(base: &ScenarioConfig, axis: SweepAxis, c: f64, seed: u64) -> Result<Vec<f64>> {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::Q => cfg.noise.filter_kq *= c,
        SweepAxis::R => cfg.noise.filter_kr *= c,
    }
    let scn = Scenario::from_config(&cfg)?;
    let log = run_scenario(&scn, Estimator::Dmae, seed)?;
    rmse(&log.fbar, &log.f, cfg.analysis.burn_in)
}

/// DMAE fault RMSE for every `(coefficient, seed)` pair, with the estimator's
/// assumed `Q` or `R` scaled by the coefficient and the simulated plant
/// unchanged. Failed cells are recorded and the sweep continues.
pub fn sensitivity_sweep(base: &ScenarioConfig, axis: SweepAxis, grid: &[f64], seeds: &[u64]) -> Result<Vec<SweepCell>> {
    if grid.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::config("grid", "values must be positive"));
    }
    Scenario::from_config(base)?;
    let jobs: Vec<(f64, u64)> = grid.iter().flat_map(|&c| seeds.iter().map(move |&s| (c, s))).collect();
    Ok(jobs
        .par_iter()
        .map(|&(c, seed)| match run_cell(base, axis, c, seed) {
            Ok(r) => SweepCell { coefficient: c, seed, rmse: Some(r), error: None },
            Err(e) => SweepCell { coefficient: c, seed, rmse: None, error: Some(e.to_string()) },
        })
        .collect())
}

/// Averages cells per coefficient, in order of first appearance.
pub fn summarize_sweep(cells: &[SweepCell]) -> Vec<SweepRow> {
    let mut coefs: Vec<f64> = Vec::new();
    for c in cells {
        if !coefs.contains(&c.coefficient) {
            coefs.push(c.coefficient);
        }
    }
    coefs
        .into_iter()
        .map(|coef| {
            let group: Vec<&SweepCell> = cells.iter().filter(|c| c.coefficient == coef).collect();
            let ok: Vec<&Vec<f64>> = group.iter().filter_map(|c| c.rmse.as_ref()).collect();
            let channels = ok.first().map_or(0, |r| r.len());
            let mean_rmse: Vec<f64> = (0..channels)
                .map(|ch| ok.iter().map(|r| r[ch]).sum::<f64>() / ok.len() as f64)
                .collect();
            let mean = if channels == 0 { f64::NAN } else { mean_rmse.iter().sum::<f64>() / channels as f64 };
            SweepRow { coefficient: coef, mean_rmse, mean, failures: group.len() - ok.len() }
        })
        .collect()
}

fn write_sweep_comment<W: Write>(out: &mut W, cells: &[SweepCell], axis: SweepAxis, base: &ScenarioConfig) -> Result<()> {
    let mut seeds: Vec<u64> = cells.iter().map(|c| c.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let seeds: Vec<String> = seeds.iter().map(u64::to_string).collect();
    writeln!(
        out,
        "# dmae-sweep v1 axis={axis} scenario={} seeds={} config_sha256={}",
        base.name,
        seeds.join(";"),
        base.digest()
    )?;
    Ok(())
}

/// One row per coefficient (`coefficient, mean rmse per channel, mean, failures`).
pub fn write_sweep_summary_csv<W: Write>(mut out: W, cells: &[SweepCell], axis: SweepAxis, base: &ScenarioConfig) -> Result<()> {
    write_sweep_comment(&mut out, cells, axis, base)?;
    let rows = summarize_sweep(cells);
    let channels = rows.iter().map(|r| r.mean_rmse.len()).max().unwrap_or(0);
    let mut header = vec!["coefficient".to_string()];
    header.extend((1..=channels).map(|i| format!("rmse_f{i}")));
    header.extend(["rmse_mean".to_string(), "failures".to_string()]);
    let mut w = csv::Writer::from_writer(out);
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(&header).map_err(ser)?;
    for r in &rows {
        let mut rec = vec![r.coefficient.to_string()];
        rec.extend((0..channels).map(|i| r.mean_rmse.get(i).map(f64::to_string).unwrap_or_default()));
        rec.push(r.mean.to_string());
        rec.push(r.failures.to_string());
        w.write_record(&rec).map_err(ser)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per cell (`coefficient, seed, rmse per channel, mean, error`) under a metadata comment.
pub fn write_sweep_csv<W: Write>(mut out: W, cells: &[SweepCell], axis: SweepAxis, base: &ScenarioConfig) -> Result<()> {
    write_sweep_comment(&mut out, cells, axis, base)?;
    let channels = cells.iter().find_map(|c| c.rmse.as_ref().map(|r| r.len())).unwrap_or(0);
    let mut header = vec!["coefficient".to_string(), "seed".to_string()];
    header.extend((1..=channels).map(|i| format!("rmse_f{i}")));
    header.extend(["rmse_mean".to_string(), "error".to_string()]);
    let mut w = csv::Writer::from_writer(out);
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(&header).map_err(ser)?;
    for c in cells {
        let mut rec = vec![c.coefficient.to_string(), c.seed.to_string()];
        match &c.rmse {
            Some(r) => {
                rec.extend(r.iter().map(|v| v.to_string()));
                rec.push((r.iter().sum::<f64>() / r.len().max(1) as f64).to_string());
            }
            None => rec.extend(std::iter::repeat_n(String::new(), channels + 1)),
        }
        rec.push(c.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(ser)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::reference;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("1e-3..1e3").unwrap(), DEFAULT_GRID.to_vec());
        assert_eq!(parse_grid("0.5, 2").unwrap(), vec![0.5, 2.0]);
        assert!(parse_grid("0..10").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn identity_cell_matches_unswept_run() {
        let mut cfg = reference::example2_case3();
        cfg.horizon = 120;
        cfg.faults.segments.retain(|s| s.end <= 120);
        let cells = sensitivity_sweep(&cfg, SweepAxis::R, &[1.0], &[3]).unwrap();
        let scn = Scenario::from_config(&cfg).unwrap();
        let log = run_scenario(&scn, Estimator::Dmae, 3).unwrap();
        assert_eq!(cells[0].rmse.as_ref().unwrap(), &rmse(&log.fbar, &log.f, 10).unwrap());
    }

    #[test]
    fn summary_averages_and_counts_failures() {
        let cells = vec![
            SweepCell { coefficient: 1.0, seed: 0, rmse: Some(vec![1.0, 3.0]), error: None },
            SweepCell { coefficient: 1.0, seed: 1, rmse: Some(vec![3.0, 5.0]), error: None },
            SweepCell { coefficient: 2.0, seed: 0, rmse: None, error: Some("boom".into()) },
        ];
        let rows = summarize_sweep(&cells);
        assert_eq!(rows[0].mean_rmse, vec![2.0, 4.0]);
        assert_eq!(rows[0].mean, 3.0);
        assert_eq!(rows[1].failures, 1);
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &cells, SweepAxis::Q, &reference::example1()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "coefficient,seed,rmse_f1,rmse_f2,rmse_mean,error");
        assert!(text.starts_with("# dmae-sweep v1 axis=Q scenario=example1 seeds=0;1 config_sha256="));
        assert_eq!(text.lines().nth(4).unwrap(), "2,0,,,,boom");
        let mut buf = Vec::new();
        write_sweep_summary_csv(&mut buf, &cells, SweepAxis::Q, &reference::example1()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().skip(1).collect::<Vec<_>>(), vec!["coefficient,rmse_f1,rmse_f2,rmse_mean,failures", "1,2,4,3,0", "2,,,NaN,1"]);
    }
}
