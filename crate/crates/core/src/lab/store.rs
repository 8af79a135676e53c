//! Append-only JSON-lines storage under `results/<experiment>/<timestamp>.jsonl`.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::ExperimentRecord;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: corrupted record before the last line: {message}")]
    Corrupted {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes are serialized through one lock so concurrent experiments never
/// interleave partial lines.
#[derive(Debug)]
pub struct RecordStore {
    root: PathBuf,
    lock: Mutex<()>,
}

#[derive(Debug)]
pub struct LoadedRecords {
    pub records: Vec<ExperimentRecord>,
    /// Where a corrupted trailing line was moved, if there was one.
    pub quarantined: Option<PathBuf>,
}

impl RecordStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RecordStore {
            root: root.into(),
            lock: Mutex::new(()),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Appends `record` as one line and returns the file it went to.
    pub fn append(&self, record: &ExperimentRecord) -> Result<PathBuf, StoreError> {
        let _guard = self.lock.lock().unwrap_or_else(|p| p.into_inner());
        let dir = self.root.join(&record.experiment);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let path = dir.join(format!("{}.jsonl", record.timestamp));
        let mut line = serde_json::to_string(record).expect("records serialize");
        line.push('\n');
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        file.write_all(line.as_bytes()).map_err(io_err(&path))?;
        file.sync_data().map_err(io_err(&path))?;
        Ok(path)
    }

    /// Reads every record of `path`. A trailing line that does not parse
    /// (e.g. a write cut short) is moved to `<path>.quarantine` and the file is
    /// truncated to its valid prefix; corruption anywhere else is an error.
    pub fn load(path: &Path) -> Result<LoadedRecords, StoreError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let lines: Vec<&str> = text.split_inclusive('\n').collect();
        let mut records = Vec::new();
        let mut valid_bytes = 0;
        for (i, raw) in lines.iter().enumerate() {
            let line = raw.trim_end_matches('\n');
            if line.trim().is_empty() {
                valid_bytes += raw.len();
                continue;
            }
            match serde_json::from_str::<ExperimentRecord>(line) {
                Ok(r) => {
                    records.push(r);
                    valid_bytes += raw.len();
                }
                Err(e) if i + 1 < lines.len() => {
                    return Err(StoreError::Corrupted {
                        path: path.to_path_buf(),
                        line: i + 1,
                        message: e.to_string(),
                    })
                }
                Err(_) => {
                    let mut q = path.as_os_str().to_owned();
                    q.push(".quarantine");
                    let q = PathBuf::from(q);
                    let mut qf = OpenOptions::new()
                        .create(true)
                        .append(true)
                        .open(&q)
                        .map_err(io_err(&q))?;
                    qf.write_all(raw.as_bytes()).map_err(io_err(&q))?;
                    if !raw.ends_with('\n') {
                        qf.write_all(b"\n").map_err(io_err(&q))?;
                    }
                    let f = File::options().write(true).open(path).map_err(io_err(path))?;
                    f.set_len(valid_bytes as u64).map_err(io_err(path))?;
                    return Ok(LoadedRecords {
                        records,
                        quarantined: Some(q),
                    });
                }
            }
        }
        Ok(LoadedRecords {
            records,
            quarantined: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Verdict, SCHEMA};
    use super::*;

    fn record(ts: &str) -> ExperimentRecord {
        ExperimentRecord {
            schema: SCHEMA,
            experiment: "demo".into(),
            version: "0".into(),
            parameters: serde_json::json!({"a": 1}),
            witnesses: serde_json::json!([]),
            report: serde_json::json!({}),
            verdict: Verdict::ReportOnly,
            warnings: vec![],
            runtime_ms: 1,
            timestamp: ts.into(),
        }
    }

    #[test]
    fn append_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let store = RecordStore::new(dir.path());
        let p = store.append(&record("1")).unwrap();
        assert_eq!(p, dir.path().join("demo").join("1.jsonl"));
        store.append(&record("1")).unwrap();
        let loaded = RecordStore::load(&p).unwrap();
        assert_eq!(loaded.records.len(), 2);
        assert!(loaded.quarantined.is_none());
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.lines().all(|l| l.contains("\"schema\":1")));
    }

    #[test]
    fn truncated_tail_is_quarantined() {
        let dir = tempfile::tempdir().unwrap();
        let store = RecordStore::new(dir.path());
        let p = store.append(&record("7")).unwrap();
        let mut f = OpenOptions::new().append(true).open(&p).unwrap();
        f.write_all(b"{\"schema\":1,\"experi").unwrap();
        drop(f);
        let loaded = RecordStore::load(&p).unwrap();
        assert_eq!(loaded.records.len(), 1);
        let q = loaded.quarantined.unwrap();
        assert!(fs::read_to_string(q).unwrap().starts_with("{\"schema\":1,\"experi"));
        let again = RecordStore::load(&p).unwrap();
        assert_eq!(again.records.len(), 1);
        assert!(again.quarantined.is_none());
    }

    #[test]
    fn inner_corruption_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.jsonl");
        let good = serde_json::to_string(&record("1")).unwrap();
        fs::write(&p, format!("garbage\n{good}\n")).unwrap();
        assert!(matches!(
            RecordStore::load(&p),
            Err(StoreError::Corrupted { line: 1, .. })
        ));
    }
}
