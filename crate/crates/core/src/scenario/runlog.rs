//! Per-step record of one estimator run, exportable as CSV and JSON.

use std::io::Write;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::rng::{GAUSSIAN_TRANSFORM, GENERATOR};
use crate::error::{Error, Result};

/// Version of the CSV column layout.
pub const CSV_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub format_version: u32,
    pub estimator: String,
    pub scenario: String,
    pub seed: u64,
    pub config_digest: String,
    pub generator: String,
    pub gaussian_transform: String,
}

impl RunMeta {
    pub fn new(estimator: &str, scenario: &str, seed: u64, config_digest: &str) -> Self {
        RunMeta {
            format_version: CSV_FORMAT_VERSION,
            estimator: estimator.into(),
            scenario: scenario.into(),
            seed,
            config_digest: config_digest.into(),
            generator: GENERATOR.into(),
            gaussian_transform: GAUSSIAN_TRANSFORM.into(),
        }
    }
}

/// Truth and estimates, one entry per step in every array.
///
/// Baseline estimators have no model probabilities: their `p_nf`/`p_af` are
/// NaN and `imax` is 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub meta: RunMeta,
    pub k: Vec<usize>,
    pub u: Vec<Vec<f64>>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    pub f: Vec<Vec<f64>>,
    pub xhat: Vec<Vec<f64>>,
    pub dhat: Vec<Vec<f64>>,
    pub fbar: Vec<Vec<f64>>,
    pub p_nf: Vec<f64>,
    pub p_af: Vec<f64>,
    pub imax: Vec<u8>,
    pub innovation: Vec<Vec<f64>>,
    pub qd: Vec<Vec<f64>>,
    /// Smallest eigenvalue over the covariances the estimator holds after each step.
    pub cov_min_eig: Vec<f64>,
}

pub(crate) fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.as_slice().to_vec()
}

impl RunLog {
    pub fn empty(meta: RunMeta) -> Self {
        RunLog {
            meta,
            k: vec![],
            u: vec![],
            x: vec![],
            y: vec![],
            d: vec![],
            f: vec![],
            xhat: vec![],
            dhat: vec![],
            fbar: vec![],
            p_nf: vec![],
            p_af: vec![],
            imax: vec![],
            innovation: vec![],
            qd: vec![],
            cov_min_eig: vec![],
        }
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Checks that every array has one entry per step.
    pub fn check_lengths(&self) -> Result<()> {
        let n = self.len();
        let lens = [
            ("u", self.u.len()),
            ("x", self.x.len()),
            ("y", self.y.len()),
            ("d", self.d.len()),
            ("f", self.f.len()),
            ("xhat", self.xhat.len()),
            ("dhat", self.dhat.len()),
            ("fbar", self.fbar.len()),
            ("p_nf", self.p_nf.len()),
            ("p_af", self.p_af.len()),
            ("imax", self.imax.len()),
            ("innovation", self.innovation.len()),
            ("qd", self.qd.len()),
            ("cov_min_eig", self.cov_min_eig.len()),
        ];
        for (name, len) in lens {
            if len != n {
                return Err(Error::dim(format!("run log column {name}"), n, len));
            }
        }
        Ok(())
    }

    fn width(rows: &[Vec<f64>]) -> usize {
        rows.first().map_or(0, |r| r.len())
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut cols = vec!["k".to_string()];
        let groups: [(&str, &[Vec<f64>]); 8] = [
            ("u", &self.u),
            ("x", &self.x),
            ("y", &self.y),
            ("d", &self.d),
            ("f", &self.f),
            ("xhat", &self.xhat),
            ("dhat", &self.dhat),
            ("fbar", &self.fbar),
        ];
        for (name, rows) in groups {
            cols.extend((1..=Self::width(rows)).map(|i| format!("{name}{i}")));
        }
        cols.extend(["p_nf", "p_af", "imax"].map(String::from));
        cols.extend((1..=Self::width(&self.qd)).map(|i| format!("qd{i}")));
        cols
    }

    /// Comment line carrying the layout version, seed and config digest.
    pub fn csv_comment(&self) -> String {
        let m = &self.meta;
        format!(
            "# dmae-runlog v{} estimator={} scenario={} seed={} config_sha256={} rng={} gaussian={}",
            m.format_version, m.estimator, m.scenario, m.seed, m.config_digest, m.generator, m.gaussian_transform
        )
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        self.check_lengths()?;
        writeln!(out, "{}", self.csv_comment())?;
        let mut w = csv::Writer::from_writer(out);
        let ser = |e: csv::Error| Error::Serialization(e.to_string());
        w.write_record(self.csv_header()).map_err(ser)?;
        for i in 0..self.len() {
            let mut rec = vec![self.k[i].to_string()];
            for group in [&self.u, &self.x, &self.y, &self.d, &self.f, &self.xhat, &self.dhat, &self.fbar] {
                rec.extend(group[i].iter().map(|v| v.to_string()));
            }
            rec.push(self.p_nf[i].to_string());
            rec.push(self.p_af[i].to_string());
            rec.push(self.imax[i].to_string());
            rec.extend(self.qd[i].iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(ser)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`, returning both paths.
    pub fn export(&self, dir: &Path, stem: &str) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(&csv_path)?))?;
        let mut jw = std::io::BufWriter::new(std::fs::File::create(&json_path)?);
        self.write_json(&mut jw)?;
        jw.flush()?;
        Ok((csv_path, json_path))
    }

    pub fn column<'a>(rows: &'a [Vec<f64>], ch: usize) -> impl Iterator<Item = f64> + 'a {
        rows.iter().map(move |r| r[ch])
    }
}
