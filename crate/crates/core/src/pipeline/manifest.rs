use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::classify::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow<L> {
    pub path: PathBuf,
    pub label: L,
    pub split: Split,
}

#[derive(Deserialize)]
struct RawRow {
    path: String,
    label: String,
    split: String,
}

/// Parses a `path,label,split` CSV. Relative paths resolve against `base`.
/// Row numbers in errors are file line numbers (the header is line 1).
pub fn parse_manifest<L: Label, R: std::io::Read>(reader: R, base: &Path) -> Result<Vec<ManifestRow<L>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::ManifestMalformed { row: 1, reason: e.to_string() })?.clone();
    for col in ["path", "label", "split"] {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::ManifestMalformed { row: 1, reason: format!("missing column {col:?}") });
        }
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<RawRow>().enumerate() {
        let line = i + 2;
        let raw = rec.map_err(|e| Error::ManifestMalformed { row: line, reason: e.to_string() })?;
        let label = L::from_str(&raw.label)
            .map_err(|_| Error::ManifestMalformed { row: line, reason: format!("unknown label {:?}", raw.label) })?;
        let split = match raw.split.as_str() {
            "train" => Split::Train,
            "test" => Split::Test,
            other => {
                return Err(Error::ManifestMalformed { row: line, reason: format!("split must be train or test, got {other:?}") })
            }
        };
        if raw.path.is_empty() {
            return Err(Error::ManifestMalformed { row: line, reason: "empty path".into() });
        }
        rows.push(ManifestRow { path: base.join(raw.path), label, split });
    }
    if rows.is_empty() {
        return Err(Error::ManifestMalformed { row: 1, reason: "no rows".into() });
    }
    Ok(rows)
}

pub fn load_manifest<L: Label>(path: &Path) -> Result<Vec<ManifestRow<L>>> {
    let file = std::fs::File::open(path)?;
    parse_manifest(file, path.parent().unwrap_or(Path::new(".")))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{EnvironmentLabel, MoodLabel};

    #[test]
    fn parses_rows() {
        let text = "path,label,split\na.wav,laugh,train\n/abs/b.wav,sigh,test\n";
        let rows: Vec<ManifestRow<MoodLabel>> = parse_manifest(text.as_bytes(), Path::new("/data")).unwrap();
        assert_eq!(rows[0].path, PathBuf::from("/data/a.wav"));
        assert_eq!(rows[1].path, PathBuf::from("/abs/b.wav"));
        assert_eq!((rows[0].label, rows[1].split), (MoodLabel::Laugh, Split::Test));
    }

    #[test]
    fn unknown_label_names_row() {
        let text = "path,label,split\na.wav,laugh,train\nb.wav,shout,train\n";
        match parse_manifest::<MoodLabel, _>(text.as_bytes(), Path::new(".")) {
            Err(Error::ManifestMalformed { row, reason }) => {
                assert_eq!(row, 3);
                assert!(reason.contains("shout"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_split_and_missing_column() {
        let bad = "path,label,split\na.wav,indoor,dev\n";
        assert!(matches!(
            parse_manifest::<EnvironmentLabel, _>(bad.as_bytes(), Path::new(".")),
            Err(Error::ManifestMalformed { row: 2, .. })
        ));
        let missing = "path,label\na.wav,indoor\n";
        assert!(matches!(
            parse_manifest::<EnvironmentLabel, _>(missing.as_bytes(), Path::new(".")),
            Err(Error::ManifestMalformed { row: 1, .. })
        ));
    }
}
