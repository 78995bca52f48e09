use crate::error::{CliError, CliResult};
use crate::run::RunManifest;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// `runs/table1.csv` → `runs/table1.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

/// CSV goes to `out` with the manifest beside it; JSON is the manifest alone.
/// Without `out` the chosen format is printed to stdout.
pub fn emit(manifest: &RunManifest, out: Option<&Path>, format: Format) -> CliResult<()> {
    let text = match format {
        Format::Csv => manifest.table.to_csv()?,
        Format::Json => manifest.to_json()? + "\n",
    };
    match out {
        Some(path) => {
            write_file(path, &text)?;
            if format == Format::Csv {
                write_file(&manifest_path(path), &(manifest.to_json()? + "\n"))?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io { path: "<stdout>".into(), source: e })?;
        }
    }
    Ok(())
}
