//! Line-delimited JSON reading and atomic file output.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Lines, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Records of a JSONL file, read lazily. Each item carries its 1-based line
/// number; blank lines are skipped.
pub struct JsonlReader<T> {
    path: PathBuf,
    lines: std::iter::Enumerate<Lines<BufReader<File>>>,
    _record: PhantomData<fn() -> T>,
}

impl<T: DeserializeOwned> JsonlReader<T> {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(JsonlReader {
            path: path.to_path_buf(),
            lines: BufReader::new(file).lines().enumerate(),
            _record: PhantomData,
        })
    }
}

impl<T: DeserializeOwned> Iterator for JsonlReader<T> {
    type Item = Result<(usize, T)>;

    fn next(&mut self) -> Option<Self::Item> {
        for (idx, line) in self.lines.by_ref() {
            let line_no = idx + 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            };
            if line.trim().is_empty() {
                continue;
            }
            return Some(
                serde_json::from_str(&line)
                    .map(|record| (line_no, record))
                    .map_err(|e| Error::Parse {
                        path: self.path.clone(),
                        line: line_no,
                        message: e.to_string(),
                    }),
            );
        }
        None
    }
}

/// Stream a JSONL file, handing each parsed record to `visit` with its
/// 1-based line number. Blank lines are skipped.
pub fn for_each_jsonl<T, F>(path: &Path, mut visit: F) -> Result<()>
where
    T: DeserializeOwned,
    F: FnMut(usize, T) -> Result<()>,
{
    for item in JsonlReader::open(path)? {
        let (line_no, record) = item?;
        visit(line_no, record)?;
    }
    Ok(())
}

/// Write a file by streaming into a temporary sibling and renaming it into
/// place once `fill` succeeds. On error nothing appears at `path`.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        fill(&mut out)?;
        out.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_json_atomic<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)
            .map_err(|e| Error::Invalid(e.to_string()))?;
        writeln!(out).map_err(|e| Error::io(path, e))
    })
}

pub fn write_jsonl_atomic<'a, T, I>(path: &Path, records: I) -> Result<()>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    write_atomic(path, |out| {
        for record in records {
            serde_json::to_writer(&mut *out, record).map_err(|e| Error::Invalid(e.to_string()))?;
            writeln!(out).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    })
}
