//! `id,current,baseline` state files.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::model::NetworkState;

#[derive(Serialize, Deserialize)]
struct StateRow {
    id: usize,
    current: u32,
    baseline: u32,
}

pub fn write_state<W: Write>(state: &NetworkState, writer: W) -> Result<(), SimError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    for (id, (&current, &baseline)) in state.current.iter().zip(&state.baseline).enumerate() {
        w.serialize(StateRow {
            id,
            current,
            baseline,
        })
        .map_err(|e| SimError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| SimError::Io(e.to_string()))
}

/// Rows must appear in id order starting from 0.
pub fn read_state<R: Read>(reader: R) -> Result<NetworkState, SimError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut current = Vec::new();
    let mut baseline = Vec::new();
    for (expected, row) in rdr.deserialize::<StateRow>().enumerate() {
        let row = row.map_err(|e| SimError::BadStateFile(e.to_string()))?;
        if row.id != expected {
            return Err(SimError::BadStateFile(format!(
                "expected id {expected}, found {}",
                row.id
            )));
        }
        current.push(row.current);
        baseline.push(row.baseline);
    }
    if current.is_empty() {
        return Err(SimError::BadStateFile("no rows".into()));
    }
    Ok(NetworkState { current, baseline })
}

pub fn save_state(state: &NetworkState, path: impl AsRef<Path>) -> Result<(), SimError> {
    let mut buf = Vec::new();
    write_state(state, &mut buf)?;
    std::fs::write(path.as_ref(), buf)
        .map_err(|e| SimError::Io(format!("{}: {e}", path.as_ref().display())))
}

pub fn load_state(path: impl AsRef<Path>) -> Result<NetworkState, SimError> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| SimError::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_state(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_header_and_rows() {
        let s = NetworkState {
            current: vec![3, 12],
            baseline: vec![4, 10],
        };
        let mut buf = Vec::new();
        write_state(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "id,current,baseline\n0,3,4\n1,12,10\n");
        assert_eq!(read_state(text.as_bytes()).unwrap(), s);
    }

    #[test]
    fn rejects_gaps_and_empty() {
        assert!(read_state("id,current,baseline\n0,1,1\n2,1,1\n".as_bytes()).is_err());
        assert!(read_state("id,current,baseline\n".as_bytes()).is_err());
        assert!(read_state("".as_bytes()).is_err());
        assert!(read_state("id,current,baseline\n0,-1,1\n".as_bytes()).is_err());
    }
}
