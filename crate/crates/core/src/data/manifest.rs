use std::path::{Path, PathBuf};

use super::{parse_football_csv, Corpus, DataError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub season: String,
}

/// Reads `path season` lines; `#` starts a comment. Relative paths resolve
/// against the manifest's directory.
pub fn read_manifest(manifest: &Path) -> Result<Vec<ManifestEntry>, DataError> {
    let text = std::fs::read_to_string(manifest).map_err(|source| DataError::Io {
        path: manifest.to_path_buf(),
        source,
    })?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(path), Some(season), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(DataError::Manifest {
                line: i + 1,
                message: "expected `<path> <season>`".into(),
            });
        };
        entries.push(ManifestEntry {
            path: base.join(path),
            season: season.to_string(),
        });
    }
    Ok(entries)
}

/// Loads every file in the manifest, ordered by (season, file name).
pub fn load_corpus(manifest: &Path) -> Result<Corpus, DataError> {
    let mut entries = read_manifest(manifest)?;
    entries.sort_by(|a, b| (&a.season, a.path.file_name()).cmp(&(&b.season, b.path.file_name())));
    let mut corpus = Corpus::default();
    for entry in entries {
        let bytes = std::fs::read(&entry.path).map_err(|source| DataError::Io {
            path: entry.path.clone(),
            source,
        })?;
        let mut part = parse_football_csv(&bytes, &entry.season).map_err(|e| DataError::InFile {
            path: entry.path.clone(),
            source: Box::new(e),
        })?;
        for source in &mut part.provenance {
            source.path = entry.path.display().to_string();
        }
        corpus.extend(part);
    }
    Ok(corpus)
}
