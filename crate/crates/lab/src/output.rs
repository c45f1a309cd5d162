//! Run directories, result tables and plot data.
//!
//! Each run writes into a fresh `<output_dir>/<command>-<id>` directory. The
//! id is a hash of the command and the canonical configuration, so reruns
//! produce identical files; an existing directory is never touched and the
//! new run gets a numbered suffix instead. Rows are also appended to
//! `<output_dir>/results.csv`.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const CSV_COLUMNS: [&str; 11] = [
    "run_id", "spec", "dist", "n", "h", "reps", "seed", "statistic", "value", "ci_lo", "ci_hi",
];

pub fn short_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// First 12 hex digits of `sha256(command \n canonical config)`.
pub fn run_id(command: &str, canonical: &str) -> String {
    short_hash(&format!("{command}\n{canonical}"))[..12].to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub run_id: String,
    pub spec: String,
    pub dist: String,
    pub n: Option<u32>,
    pub h: Option<f64>,
    pub reps: Option<u64>,
    pub seed: u64,
    pub statistic: String,
    pub value: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

impl ResultRow {
    fn record(&self) -> [String; 11] {
        let opt = |v: Option<String>| v.unwrap_or_default();
        [
            self.run_id.clone(),
            self.spec.clone(),
            self.dist.clone(),
            opt(self.n.map(|v| v.to_string())),
            opt(self.h.map(|v| v.to_string())),
            opt(self.reps.map(|v| v.to_string())),
            self.seed.to_string(),
            self.statistic.clone(),
            self.value.to_string(),
            opt(self.ci_lo.map(|v| v.to_string())),
            opt(self.ci_hi.map(|v| v.to_string())),
        ]
    }
}

/// A newly created run directory.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub id: String,
    pub path: PathBuf,
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path, command: &str, id: &str) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        let base = format!("{command}-{id}");
        let mut suffix = 1;
        loop {
            let name = if suffix == 1 { base.clone() } else { format!("{base}-{suffix}") };
            let path = root.join(name);
            match fs::create_dir(&path) {
                Ok(()) => {
                    return Ok(Self {
                        id: id.to_string(),
                        path,
                        root: root.to_path_buf(),
                    })
                }
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => suffix += 1,
                Err(e) => return Err(e),
            }
        }
    }

    /// Writes `results.csv` in the run directory and appends the rows to the
    /// shared table.
    pub fn write_results(&self, rows: &[ResultRow]) -> io::Result<()> {
        let mut local = csv::Writer::from_path(self.path.join("results.csv"))?;
        local.write_record(CSV_COLUMNS)?;
        for row in rows {
            local.write_record(row.record())?;
        }
        local.flush()?;

        let shared = self.root.join("results.csv");
        let fresh = !shared.exists() || fs::metadata(&shared)?.len() == 0;
        let file = OpenOptions::new().create(true).append(true).open(&shared)?;
        let mut writer = csv::Writer::from_writer(file);
        if fresh {
            writer.write_record(CSV_COLUMNS)?;
        }
        for row in rows {
            writer.write_record(row.record())?;
        }
        writer.flush()
    }

    pub fn write_metadata<T: Serialize>(&self, metadata: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(metadata).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(self.path.join("metadata.json"), text)
    }

    /// Two-column `x\ty` file named `<name>.tsv`.
    pub fn write_plot(&self, name: &str, header: (&str, &str), points: &[(f64, f64)]) -> io::Result<()> {
        let mut out = io::BufWriter::new(fs::File::create(self.path.join(format!("{name}.tsv")))?);
        writeln!(out, "{}\t{}", header.0, header.1)?;
        for (x, y) in points {
            writeln!(out, "{x}\t{y}")?;
        }
        out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(value: f64) -> ResultRow {
        ResultRow {
            run_id: "abc".into(),
            spec: "s".into(),
            dist: "constant:1".into(),
            n: Some(3),
            h: None,
            reps: Some(2),
            seed: 9,
            statistic: "nu".into(),
            value,
            ci_lo: None,
            ci_hi: None,
        }
    }

    #[test]
    fn ids_are_stable() {
        assert_eq!(run_id("verify", "seed = 0\n"), run_id("verify", "seed = 0\n"));
        assert_ne!(run_id("verify", "seed = 0\n"), run_id("verify", "seed = 1\n"));
        assert_eq!(run_id("a", "b").len(), 12);
        assert_eq!(
            short_hash("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn reruns_get_fresh_directories() {
        let tmp = tempfile::tempdir().unwrap();
        let a = RunDir::create(tmp.path(), "estimate-nu", "x").unwrap();
        a.write_results(&[row(1.5)]).unwrap();
        let b = RunDir::create(tmp.path(), "estimate-nu", "x").unwrap();
        b.write_results(&[row(1.5)]).unwrap();
        assert_ne!(a.path, b.path);
        assert!(b.path.ends_with("estimate-nu-x-2"));
        let local_a = fs::read_to_string(a.path.join("results.csv")).unwrap();
        assert_eq!(local_a, fs::read_to_string(b.path.join("results.csv")).unwrap());
        assert_eq!(local_a, "run_id,spec,dist,n,h,reps,seed,statistic,value,ci_lo,ci_hi\nabc,s,constant:1,3,,2,9,nu,1.5,,\n");
        let shared = fs::read_to_string(tmp.path().join("results.csv")).unwrap();
        assert_eq!(shared.lines().count(), 3);
    }
}
