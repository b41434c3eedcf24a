use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use slosh_core::SloshError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes result files into one directory, stamping CSVs with the config hash.
pub struct Sink {
    dir: PathBuf,
    hash: String,
}

impl Sink {
    pub fn new(dir: &Path, hash: String) -> Result<Self, SloshError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), hash })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&self, name: &str, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), SloshError> {
        let mut file = BufWriter::new(File::create(self.path(name))?);
        writeln!(file, "# config_hash={}, version={VERSION}", self.hash)?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), SloshError> {
        let mut file = BufWriter::new(File::create(self.path(name))?);
        serde_json::to_writer_pretty(&mut file, value)?;
        writeln!(file)?;
        file.flush()?;
        Ok(())
    }

    pub fn stamp(&self) -> serde_json::Value {
        serde_json::json!({ "config_hash": self.hash, "version": VERSION })
    }
}

/// Header `prefix,name_1..name_n`.
pub fn indexed_header(first: &[&str], name: &str, n: usize) -> Vec<String> {
    first.iter().map(|s| s.to_string()).chain((1..=n).map(|i| format!("{name}_{i}"))).collect()
}
