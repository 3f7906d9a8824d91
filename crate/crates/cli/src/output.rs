use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use finsler_wps::io::format_float;
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};

pub const TOOL: &str = "finsler-wps";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Compact JSON with every float written to 17 significant digits.
struct FixedFloats;

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json_string(value: &Value) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

pub fn tool_json() -> Value {
    json!({ "name": TOOL, "version": VERSION })
}

/// Adds the tool stamp and resolved config to a JSON object.
pub fn stamp(mut value: Value, config: &Value) -> Value {
    if let Value::Object(map) = &mut value {
        map.insert("tool".into(), tool_json());
        map.insert("config".into(), config.clone());
        value
    } else {
        let mut map = Map::new();
        map.insert("tool".into(), tool_json());
        map.insert("config".into(), config.clone());
        map.insert("result".into(), value);
        Value::Object(map)
    }
}

/// `#` comment lines carrying the tool stamp and config, for CSV outputs.
pub fn csv_header(config: &Value) -> String {
    let text = to_json_string(config).unwrap_or_default();
    format!("# {TOOL} {VERSION}\n# config: {}", text.trim_end())
}

/// A bracketed Newick comment; brackets inside the config are replaced so
/// the comment stays well formed.
pub fn newick_header(config: &Value) -> String {
    let text = to_json_string(config)
        .unwrap_or_default()
        .trim_end()
        .replace('[', "(")
        .replace(']', ")");
    format!("[{TOOL} {VERSION} config: {text}]")
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    let Some(path) = path else {
        let mut out = io::stdout().lock();
        out.write_all(contents.as_bytes())?;
        return Ok(out.flush()?);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}
