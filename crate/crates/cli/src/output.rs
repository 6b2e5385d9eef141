use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use eri_core::metrics::RegimeLabel;
use serde::Serialize;

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// `foo.bin` -> `foo.bin.<suffix>`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

pub fn require_file(path: &Path) -> Result<()> {
    let meta = std::fs::metadata(path).with_context(|| format!("input {} is not readable", path.display()))?;
    anyhow::ensure!(meta.is_file(), "input {} is not a file", path.display());
    Ok(())
}

pub fn prepare_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating output directory {}", path.display()))
}

/// ANSI colour only on a terminal and only when `ERI_NO_COLOR` is unset.
pub fn color_enabled() -> bool {
    std::env::var_os("ERI_NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

pub fn paint_regime(label: RegimeLabel, color: bool) -> String {
    if !color {
        return label.as_str().to_string();
    }
    let code = match label {
        RegimeLabel::RedFlag => "31",
        RegimeLabel::BenignTransfer => "32",
        RegimeLabel::CueHarmful | RegimeLabel::Ambiguous => "33",
        RegimeLabel::AdUndefined => "90",
    };
    format!("\x1b[{code}m{}\x1b[0m", label.as_str())
}

/// Left-aligned columns separated by two spaces.
pub fn render_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:<width$}", width = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
