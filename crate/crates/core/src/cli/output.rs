use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::analysis::EnsembleResult;
use crate::dynamics::Trajectory;
use crate::error::Result;

/// Round-trip exact, locale-free float formatting.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// CSV text with `#`-prefixed metadata lines ahead of the header.
pub fn csv<I>(meta: &[String], header: &[String], rows: I) -> String
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = String::new();
    for m in meta {
        let _ = writeln!(out, "# {m}");
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn trajectory_csv(meta: &[String], traj: &Trajectory) -> String {
    let n = traj.n_atoms();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|m| format!("P_{m}")));
    header.push("P_tot".into());
    header.push("I_tot".into());
    let mut meta = meta.to_vec();
    if traj.underflow_clamped {
        meta.push("underflow: populations below 1e-300 clamped to 0".into());
    }
    let rows = (0..traj.len()).map(|k| {
        let mut row = Vec::with_capacity(n + 3);
        row.push(traj.times[k]);
        row.extend_from_slice(&traj.populations[k]);
        row.push(traj.p_tot[k]);
        row.push(traj.intensity[k]);
        row
    });
    csv(&meta, &header, rows)
}

#[derive(Serialize)]
struct AmplitudeDump<'a> {
    times: &'a [f64],
    /// `amplitudes[k][m]` as `[re, im]`.
    amplitudes: Vec<Vec<Complex64>>,
}

pub fn trajectory_json(traj: &Trajectory) -> Result<String> {
    let dump = AmplitudeDump {
        times: &traj.times,
        amplitudes: traj
            .amplitudes
            .iter()
            .map(|c| c.iter().copied().collect())
            .collect(),
    };
    Ok(serde_json::to_string(&dump)?)
}

pub fn ensemble_csv(meta: &[String], ens: &EnsembleResult) -> String {
    let header: Vec<String> = ["t", "mean_P_tot", "std_P_tot", "mean_I_tot", "std_I_tot"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = (0..ens.times.len()).map(|k| {
        vec![
            ens.times[k],
            ens.mean_p_tot[k],
            ens.std_p_tot[k],
            ens.mean_i_tot[k],
            ens.std_i_tot[k],
        ]
    });
    csv(meta, &header, rows)
}

/// Destination for one command's outputs: a directory, or stdout for the
/// primary table only.
pub struct Sink {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl Sink {
    pub fn directory(dir: PathBuf) -> Result<Sink> {
        std::fs::create_dir_all(&dir)?;
        Ok(Sink {
            dir: Some(dir),
            written: Vec::new(),
        })
    }

    pub fn stdout() -> Sink {
        Sink {
            dir: None,
            written: Vec::new(),
        }
    }

    pub fn is_stdout(&self) -> bool {
        self.dir.is_none()
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Primary data table; goes to stdout in stdout mode.
    pub fn primary(&mut self, name: &str, contents: &str) -> Result<()> {
        match &self.dir {
            Some(_) => self.file(name, contents),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(contents.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }

    /// Secondary artefact; skipped in stdout mode.
    pub fn file(&mut self, name: &str, contents: &str) -> Result<()> {
        if let Some(dir) = &self.dir {
            std::fs::write(dir.join(name), contents)?;
            self.written.push(name.to_string());
        }
        Ok(())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}
