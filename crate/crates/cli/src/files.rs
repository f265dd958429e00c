//! On-disk formats: coloring files, layer coloring files, set files and
//! cached solver results.

use std::fs;
use std::path::Path;

use hypervis::{CubeColoring, LayerColoring, VertexSet};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CubeColoringFile {
    schema: u32,
    n: usize,
    g: usize,
    q: usize,
    classes: Vec<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerColoringFile {
    schema: u32,
    n: usize,
    k: usize,
    q: usize,
    colors: Vec<u8>,
}

pub fn coloring_to_string(c: &CubeColoring) -> String {
    let file = CubeColoringFile {
        schema: SCHEMA_VERSION,
        n: c.n,
        g: c.g,
        q: c.q,
        classes: c.classes.clone(),
    };
    let mut text = serde_json::to_string(&file).expect("coloring serializes");
    text.push('\n');
    text
}

pub fn parse_coloring(text: &str) -> Result<CubeColoring, CliError> {
    let file: CubeColoringFile = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("malformed coloring file: {e}")))?;
    if file.schema != SCHEMA_VERSION {
        return Err(CliError::Input(format!(
            "unsupported coloring schema {}",
            file.schema
        )));
    }
    CubeColoring::new(file.n, file.g, file.q, file.classes)
        .map_err(|e| CliError::Input(format!("invalid coloring: {e}")))
}

pub fn layer_coloring_to_string(c: &LayerColoring) -> String {
    let file = LayerColoringFile {
        schema: SCHEMA_VERSION,
        n: c.n(),
        k: c.k(),
        q: c.q(),
        colors: c.colors().to_vec(),
    };
    let mut text = serde_json::to_string(&file).expect("layer coloring serializes");
    text.push('\n');
    text
}

pub fn parse_layer_coloring(text: &str) -> Result<LayerColoring, CliError> {
    let file: LayerColoringFile = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("malformed layer coloring file: {e}")))?;
    LayerColoring::new(file.n, file.k, file.q, file.colors)
        .map_err(|e| CliError::Input(format!("invalid layer coloring: {e}")))
}

/// Layer coloring files carry a `k` field; cube coloring files do not.
pub fn is_layer_file(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .map(|v| v.get("k").is_some())
        .unwrap_or(false)
}

/// One vertex per line, as `0x..` or a sorted element list. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_set(n: usize, text: &str) -> Result<Vec<VertexSet>, CliError> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
        .map(|(i, line)| {
            VertexSet::parse(n, line).map_err(|e| CliError::Input(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn read_set(n: usize, path: &Path) -> Result<Vec<VertexSet>, CliError> {
    parse_set(n, &read(path)?)
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}
