use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Reads `times.txt`: one timestamp in seconds per line.
pub fn load_times(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_times(&text)
}

pub(crate) fn parse_times(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let t = l.trim();
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::TimesParse {
                    line: i + 1,
                    msg: format!("bad timestamp {t:?}"),
                }),
            }
        })
        .collect()
}
