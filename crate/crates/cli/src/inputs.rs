//! Input discovery and structure loading for the CLI.

use std::path::{Path, PathBuf};

use perinv_core::geometry::PeriodicSet;
use perinv_core::{cif, native};

use crate::CliError;

/// Expands files and directories into a sorted list of structure files.
pub fn expand_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| {
                    matches!(
                        p.extension().and_then(|e| e.to_str()),
                        Some("cif") | Some("json")
                    )
                })
                .collect();
            entries.sort();
            files.extend(entries);
        } else if path.is_file() {
            files.push(path.clone());
        } else {
            return Err(CliError::usage(format!(
                "input {} does not exist",
                path.display()
            )));
        }
    }
    if files.is_empty() {
        return Err(CliError::usage("no input structure files found"));
    }
    Ok(files)
}

/// Loads every structure in a file; ids fall back to the file stem.
pub fn load_file(path: &Path) -> Result<Vec<PeriodicSet>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("structure");
    let sets = match path.extension().and_then(|e| e.to_str()) {
        Some("cif") => cif::parse_cif(&text)
            .map_err(|e| format!("{}: {e}", path.display()))?
            .into_iter()
            .map(|(set, _)| set)
            .collect::<Vec<_>>(),
        Some("json") => {
            native::read_native(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        other => {
            return Err(format!(
                "{}: unsupported extension {other:?}",
                path.display()
            ))
        }
    };
    Ok(sets
        .into_iter()
        .enumerate()
        .map(|(i, set)| {
            if set.id().is_some() {
                set
            } else if i == 0 {
                set.with_id(stem)
            } else {
                set.with_id(format!("{stem}-{i}"))
            }
        })
        .collect())
}

/// Loads all structures from the expanded inputs, reporting every failing
/// file on stderr. Err(count) carries the number of failures.
pub fn load_all(paths: &[PathBuf]) -> Result<Vec<PeriodicSet>, CliError> {
    let files = expand_inputs(paths)?;
    let mut sets = Vec::new();
    let mut failures = 0usize;
    for file in &files {
        match load_file(file) {
            Ok(mut s) => sets.append(&mut s),
            Err(e) => {
                eprintln!("error: {e}");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        return Err(CliError::computation(format!(
            "{failures} input file(s) failed to parse"
        )));
    }
    if sets.is_empty() {
        return Err(CliError::usage("inputs contained no structures"));
    }
    Ok(sets)
}

/// Files that failed to load, as (path, reason).
pub type LoadFailures = Vec<(String, String)>;

/// Like [`load_all`] but keeps going past failing files, returning them so
/// the caller can list them as quarantined.
pub fn load_lenient(paths: &[PathBuf]) -> Result<(Vec<PeriodicSet>, LoadFailures), CliError> {
    let files = expand_inputs(paths)?;
    let mut sets = Vec::new();
    let mut failed = Vec::new();
    for file in &files {
        match load_file(file) {
            Ok(mut s) => sets.append(&mut s),
            Err(e) => {
                eprintln!("warning: quarantined {e}");
                failed.push((file.display().to_string(), e));
            }
        }
    }
    if sets.is_empty() {
        return Err(CliError::usage("inputs contained no parsable structures"));
    }
    Ok((sets, failed))
}

/// Filesystem-safe version of a structure id.
pub fn sanitize_id(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}
