//! Line-oriented corpus files: one UTF-8 document per line, optionally gzip
//! compressed (detected by a `.gz` suffix).

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

/// Opens `path`, decompressing on the fly when it ends in `.gz`.
pub fn open(path: &Path) -> Result<Box<dyn Read>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|ext| ext == "gz") {
        Ok(Box::new(GzDecoder::new(file)))
    } else {
        Ok(Box::new(file))
    }
}

/// Reads every non-blank line, trimming the trailing newline and surrounding
/// whitespace.
pub fn read_documents(path: &Path) -> Result<Vec<String>> {
    let reader = BufReader::new(open(path)?);
    let mut docs = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if !line.is_empty() {
            docs.push(line.to_string());
        }
    }
    Ok(docs)
}

pub fn write_documents<'a, I>(path: &Path, docs: I) -> Result<()>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut out = String::new();
    for doc in docs {
        debug_assert!(!doc.contains('\n'));
        out.push_str(doc);
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))
}
