use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

#[derive(Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Default, Serialize)]
pub struct Checks {
    pub lines: Vec<CheckLine>,
}

impl Checks {
    pub fn require(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.lines.push(CheckLine {
            name: name.to_owned(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn finish(self) -> CliResult<()> {
        for l in &self.lines {
            eprintln!("{} {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail);
        }
        let failed: Vec<String> = self.lines.into_iter().filter(|l| !l.passed).map(|l| l.name).collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Check(failed))
        }
    }
}

#[derive(Serialize)]
struct Record<'a, C: Serialize, R: Serialize> {
    format_version: u32,
    command: &'a str,
    config: &'a C,
    result: &'a R,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<&'a Checks>,
}

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("out dir {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_owned() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_with(&self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> qneuron::Result<()>) -> CliResult<()> {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_record<C: Serialize, R: Serialize>(
        &self,
        name: &str,
        command: &str,
        config: &C,
        result: &R,
        check: Option<&Checks>,
    ) -> CliResult<()> {
        let record = Record {
            format_version: qneuron::experiments::FORMAT_VERSION,
            command,
            config,
            result,
            check,
        };
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, &record)?;
            writeln!(w)?;
            Ok(())
        })
    }
}
