//! Loading knowledge bases from the bundled fixtures or a fixture directory.

use std::path::{Path, PathBuf};

use techdoc_core::fixtures;
use techdoc_core::kb::{Assertion, Kb, KbDocument, KbError};
use thiserror::Error;

/// Environment variable naming a fixture directory to use instead of the bundled one.
pub const FIXTURES_ENV: &str = "TECHDOC_FIXTURES";

pub const MIDDLE_MODEL_FILE: &str = "middle-model.json";

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Kb { path: String, source: KbError },
    #[error("{path}: {message}")]
    Json { path: PathBuf, message: String },
    #[error("unknown domain `{0}` (bundled domains: car, aircraft)")]
    UnknownDomain(String),
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })
}

fn bundled(domain: &str) -> Result<&'static str, LoadError> {
    match domain {
        "car" => Ok(fixtures::CAR),
        "aircraft" => Ok(fixtures::AIRCRAFT),
        _ => Err(LoadError::UnknownDomain(domain.to_string())),
    }
}

/// The middle model plus the named domains, from `dir` if given, else the bundled copies.
pub fn load_kb(dir: Option<&Path>, domains: &[String]) -> Result<Kb, LoadError> {
    let (middle, middle_name) = match dir {
        Some(d) => {
            let p = d.join(MIDDLE_MODEL_FILE);
            (read(&p)?, p.display().to_string())
        }
        None => (fixtures::MIDDLE_MODEL.to_string(), MIDDLE_MODEL_FILE.to_string()),
    };
    let mut kb = Kb::load_str(&middle).map_err(|source| LoadError::Kb { path: middle_name, source })?;
    for domain in domains {
        let (text, name) = match dir {
            Some(d) => {
                let p = d.join(format!("{domain}.json"));
                (read(&p)?, p.display().to_string())
            }
            None => (bundled(domain)?.to_string(), format!("{domain}.json")),
        };
        let doc = KbDocument::parse(&text).map_err(|source| LoadError::Kb { path: name.clone(), source })?;
        kb.extend(&doc).map_err(|source| LoadError::Kb { path: name, source })?;
    }
    Ok(kb)
}

/// Where illustration images live for a fixture directory.
pub fn assets_dir(dir: Option<&Path>) -> PathBuf {
    dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(fixtures::DATA_DIR)).join("assets")
}

/// Reads a JSON list of assertions (a recorded sensor state, for instance).
pub fn read_tells(path: &Path) -> Result<Vec<Assertion>, LoadError> {
    serde_json::from_str(&read(path)?).map_err(|e| LoadError::Json { path: path.to_path_buf(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_and_directory_loading_agree() {
        let a = load_kb(None, &["car".into()]).unwrap();
        let b = load_kb(Some(Path::new(fixtures::DATA_DIR)), &["car".into()]).unwrap();
        assert_eq!(a.snapshot(), b.snapshot());
        assert!(matches!(load_kb(None, &["boat".into()]), Err(LoadError::UnknownDomain(_))));
        assert!(matches!(load_kb(Some(Path::new("/nonexistent")), &[]), Err(LoadError::Io { .. })));
        assert!(assets_dir(None).join("engine-bay.svg").exists());
    }
}
