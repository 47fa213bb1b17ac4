//! Result writers and the provenance record.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Version, subcommand, resolved parameters and seed.
pub fn provenance(command: &str, params: &impl Serialize, seed: Option<u64>) -> Value {
    json!({
        "tool": "memwalk",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "parameters": params,
        "seed": seed,
    })
}

fn is_stdout(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn open(path: &Path) -> Result<Box<dyn Write>, Failure> {
    if is_stdout(path) {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let f = File::create(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialise");
    s.push('\n');
    s
}

/// CSV body plus provenance: a `.meta.json` sidecar next to a file, or
/// stderr when writing to stdout.
pub fn write_csv<R: Serialize>(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = R>,
    provenance: &Value,
) -> Result<(), Failure> {
    {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(open(path)?);
        w.write_record(header).map_err(Failure::io)?;
        for row in rows {
            w.serialize(row).map_err(Failure::io)?;
        }
        w.flush().map_err(Failure::io)?;
    }
    if is_stdout(path) {
        eprint!("{}", pretty(provenance));
    } else {
        let meta = sidecar_path(path);
        std::fs::write(&meta, pretty(provenance))
            .map_err(|e| Failure::io(format!("{}: {e}", meta.display())))?;
    }
    Ok(())
}

/// JSON document with the provenance embedded under `"provenance"`.
pub fn write_json(path: &Path, mut body: Value, provenance: Value) -> Result<(), Failure> {
    if let Value::Object(map) = &mut body {
        map.insert("provenance".into(), provenance);
    }
    let mut w = open(path)?;
    w.write_all(pretty(&body).as_bytes()).map_err(Failure::io)?;
    w.flush().map_err(Failure::io)
}
