//! Command results are buffered and written in one pass at the end.

use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn bytes(&mut self, name: &str, data: Vec<u8>) {
        self.files.push((name.to_string(), data));
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_vec_pretty(value).map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
        text.push(b'\n');
        self.bytes(name, text);
        Ok(())
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let mut buf = Vec::new();
        fleet_cluster::trace::write_csv(&mut buf, rows).map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
        self.bytes(name, buf);
        Ok(())
    }

    /// Header plus rows of plain string records.
    pub fn table(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Runtime(format!("{name}: {e}"));
        w.write_record(header).map_err(fail)?;
        for r in rows {
            w.write_record(r).map_err(fail)?;
        }
        let buf = w.into_inner().map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
        self.bytes(name, buf);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, d)| d.as_slice())
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        for (name, data) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, data).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

/// What a command produced and whether the goals held.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub outputs: Outputs,
    pub goals_met: bool,
    pub summary: String,
}
