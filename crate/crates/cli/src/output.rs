use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::commands::CliError;

pub fn command_line() -> String {
    let mut parts = vec!["qnn".to_string()];
    parts.extend(std::env::args().skip(1));
    parts.join(" ")
}

pub fn tool_version() -> String {
    format!("qnn-cli {}", env!("CARGO_PKG_VERSION"))
}

/// `#` comment lines naming the tool version and command line.
pub fn header() -> String {
    format!("# {}\n# command: {}\n", tool_version(), command_line())
}

/// `body` under a header, or a JSON object holding `key: value` plus the
/// same provenance fields.
pub fn render(json: Option<(&str, Value)>, body: &str) -> Result<String, CliError> {
    match json {
        Some((key, value)) => {
            let mut obj = serde_json::Map::new();
            obj.insert("tool".into(), Value::String(tool_version()));
            obj.insert("command".into(), Value::String(command_line()));
            obj.insert(key.into(), value);
            Ok(serde_json::to_string_pretty(&Value::Object(obj))? + "\n")
        }
        None => Ok(header() + body),
    }
}

pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
