//! Output bundle: a directory of CSV/text artifacts plus `summary.json`,
//! which records the resolved configuration, every point's results, and the
//! SHA-256 of each artifact. Contents depend only on the configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use shockstab_core::gas::cons_to_prim;
use shockstab_core::{GasModel, MeanField};

use crate::config::{ExperimentConfig, Mode};
use crate::experiment::{LabError, PointOutcome, PointSummary};

pub const SUMMARY: &str = "summary.json";
pub const FIELD_HEADER: &str = "i j rho u v p";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary<'a> {
    pub mode: Mode,
    pub config: String,
    pub points: Vec<&'a PointSummary>,
    pub files: Vec<FileEntry>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Writer {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), LabError> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    fn csv<F>(&mut self, name: &str, header: &[&str], fill: F) -> Result<(), LabError>
    where
        F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        fill(&mut w)?;
        let bytes = w
            .into_inner()
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        self.put(name, &bytes)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes the bundle for `outcomes` into `dir`, creating it if needed.
/// A single point gets unsuffixed artifact names; a sweep gets
/// `sweep.csv` plus `-NNN` suffixed artifacts per point.
pub fn write_bundle(
    dir: &Path,
    cfg: &ExperimentConfig,
    outcomes: &[PointOutcome],
) -> Result<Vec<FileEntry>, LabError> {
    fs::create_dir_all(dir)?;
    let mut w = Writer {
        dir: dir.to_path_buf(),
        files: Vec::new(),
    };
    let single = outcomes.len() == 1;
    if !single {
        write_sweep(&mut w, outcomes)?;
    }
    for (k, o) in outcomes.iter().enumerate() {
        let suffix = if single {
            String::new()
        } else {
            format!("-{k:03}")
        };
        write_point(&mut w, &suffix, cfg.run.dump_matrix, o)?;
    }
    let summary = Summary {
        mode: cfg.run.mode,
        config: cfg.to_text(),
        points: outcomes.iter().map(|o| &o.summary).collect(),
        files: w.files.clone(),
    };
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    fs::write(dir.join(SUMMARY), &json)?;
    Ok(w.files)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_sweep(w: &mut Writer, outcomes: &[PointOutcome]) -> Result<(), LabError> {
    let mut header = vec!["point"];
    let axes: Vec<&str> = outcomes
        .first()
        .map(|o| o.summary.axes.iter().map(|a| a.key.as_str()).collect())
        .unwrap_or_default();
    header.extend(axes.iter());
    header.extend([
        "scheme",
        "max_real",
        "leading_im",
        "normalized",
        "verdict",
        "entropy_increase",
        "argmax_column",
        "lambda_num",
        "gap",
        "agreement",
        "error",
    ]);
    w.csv("sweep.csv", &header, |c| {
        for (k, o) in outcomes.iter().enumerate() {
            let s = &o.summary;
            let a = s.analysis.as_ref();
            let mut row = vec![k.to_string()];
            row.extend(s.axes.iter().map(|a| a.value.clone()));
            row.push(s.scheme.clone());
            row.push(opt(a.map(|a| a.max_real)));
            row.push(opt(a.map(|a| a.leading_im)));
            row.push(opt(a.map(|a| a.normalized_max_real)));
            row.push(
                a.map(|a| format!("{:?}", a.verdict).to_lowercase())
                    .unwrap_or_default(),
            );
            row.push(opt(a.map(|a| a.entropy_increase)));
            row.push(a.map(|a| a.argmax_column.to_string()).unwrap_or_default());
            row.push(opt(s.march.as_ref().and_then(|m| m.lambda_num)));
            row.push(opt(s.validation.and_then(|v| v.gap)));
            row.push(
                s.validation
                    .map(|v| format!("{:?}", v.agreement).to_lowercase())
                    .unwrap_or_default(),
            );
            row.push(s.error.clone().unwrap_or_default());
            c.write_record(&row)?;
        }
        Ok(())
    })
}

fn write_point(
    w: &mut Writer,
    suffix: &str,
    dump_matrix: bool,
    o: &PointOutcome,
) -> Result<(), LabError> {
    if let Some(a) = &o.analysis {
        w.csv(&format!("spectrum{suffix}.csv"), &["re", "im"], |c| {
            for z in &a.spectrum.eigenvalues {
                c.write_record([z.re.to_string(), z.im.to_string()])?;
            }
            Ok(())
        })?;
        let names: [&str; 4] = if a.eigvec_primitive {
            ["rho", "u", "v", "p"]
        } else {
            ["rho", "rho_u", "rho_v", "rho_e"]
        };
        let mut header = vec!["i".to_string(), "j".to_string()];
        for n in names {
            header.push(format!("{n}_re"));
            header.push(format!("{n}_im"));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let nx = a.matrix.nx;
        w.csv(&format!("eigvec{suffix}.csv"), &header, |c| {
            for (k, v) in a.eigvec.iter().enumerate() {
                let mut row = vec![(k % nx + 1).to_string(), (k / nx + 1).to_string()];
                for z in v {
                    row.push(z.re.to_string());
                    row.push(z.im.to_string());
                }
                c.write_record(&row)?;
            }
            Ok(())
        })?;
        if dump_matrix {
            let mut text = format!("# {} x {} row col value\n", a.matrix.dim(), a.matrix.dim());
            for (r, col, x) in a.matrix.triplets() {
                text.push_str(&format!("{r} {col} {x}\n"));
            }
            w.put(&format!("matrix{suffix}.txt"), text.as_bytes())?;
        }
    }
    if let Some(m) = &o.march {
        w.csv(&format!("monitor{suffix}.csv"), &["t", "v_inf"], |c| {
            for (t, v) in m.series.t.iter().zip(&m.series.v) {
                c.write_record([t.to_string(), v.to_string()])?;
            }
            Ok(())
        })?;
    }
    if let Some(base) = &o.base {
        w.put(
            &format!("field{suffix}.txt"),
            field_text(&base.field, &base.problem.gas)?.as_bytes(),
        )?;
    }
    Ok(())
}

/// Interior cells of `field` as whitespace-separated `i j rho u v p` rows.
pub fn field_text(field: &MeanField, gas: &GasModel) -> Result<String, LabError> {
    let mut out = String::new();
    out.push_str(&format!("# {FIELD_HEADER}\n"));
    for c in field.interior() {
        let p = cons_to_prim(&field.get(c.i, c.j), gas)?;
        out.push_str(&format!(
            "{} {} {} {} {} {}\n",
            c.i, c.j, p.rho, p.u, p.v, p.p
        ));
    }
    Ok(out)
}

/// Parses a `field.txt` back into `(i, j, [rho, u, v, p])` rows.
pub fn read_field(text: &str) -> Result<Vec<(isize, isize, [f64; 4])>, std::io::Error> {
    let bad = |line: &str| {
        std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("bad field row `{line}`"),
        )
    };
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 6 {
            return Err(bad(line));
        }
        let i = parts[0].parse().map_err(|_| bad(line))?;
        let j = parts[1].parse().map_err(|_| bad(line))?;
        let mut w = [0.0; 4];
        for (slot, s) in w.iter_mut().zip(&parts[2..]) {
            *slot = s.parse().map_err(|_| bad(line))?;
        }
        rows.push((i, j, w));
    }
    Ok(rows)
}
