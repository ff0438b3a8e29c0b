//! Binary dataset files.
//!
//! Little-endian layout:
//!
//! | field | type |
//! |---|---|
//! | magic | `b"TULK1"` |
//! | h | f64 |
//! | N, N', V | u32 each |
//! | M | u64 |
//! | flags | u8: bit 0 network, bit 1 time-invariant truth, bit 2 truth present |
//! | truth | u64 length + params text, if present |
//! | edges | u32 count, then `(from u32, to u32, omega f64, shift f64)` each |
//! | notes | u32 count, then `(u32 length + UTF-8)` key and value each |
//! | body | M records of `ceil((N+N')V / 8)` bytes |
//!
//! A record packs the `(N+N') x V` indicator matrix row-major over `t` then `u`,
//! least significant bit first; padding bits are zero.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::params::{params_from_str, params_to_string};
use crate::error::{Error, Result};
use crate::model::{ModelParams, TimeGrid, Trajectory};
use crate::simulate::EdgeSpec;

pub const DATASET_MAGIC: &[u8; 5] = b"TULK1";

const FLAG_NETWORK: u8 = 1;
const FLAG_INVARIANT: u8 = 2;
const FLAG_TRUTH: u8 = 4;

/// Trajectories on a shared grid with optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub grid: TimeGrid,
    pub nodes: usize,
    pub trajectories: Vec<Trajectory>,
    pub truth: Option<ModelParams>,
    pub edges: Vec<EdgeSpec>,
    /// Free-form provenance such as the preset name, seed and redraw count.
    pub notes: BTreeMap<String, String>,
}

impl DatasetFile {
    pub fn new(grid: TimeGrid, nodes: usize, trajectories: Vec<Trajectory>) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidArgument("dataset needs at least one node".into()));
        }
        if let Some(t) = trajectories.iter().find(|t| *t.grid() != grid || t.nodes() != nodes) {
            return Err(Error::InvalidArgument(format!(
                "trajectory on grid {:?} with {} nodes does not match the dataset",
                t.grid(),
                t.nodes()
            )));
        }
        Ok(Self { grid, nodes, trajectories, truth: None, edges: Vec::new(), notes: BTreeMap::new() })
    }

    pub fn with_truth(mut self, truth: ModelParams) -> Result<Self> {
        if *truth.grid() != self.grid || truth.nodes() != self.nodes {
            return Err(Error::InvalidArgument("truth does not match the dataset grid".into()));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    fn record_bytes(&self) -> usize {
        (self.grid.extended_len() * self.nodes).div_ceil(8)
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let u32_of = |x: usize, what: &str| {
            u32::try_from(x).map_err(|_| Error::InvalidArgument(format!("{what} {x} exceeds u32")))
        };
        w.write_all(DATASET_MAGIC)?;
        w.write_all(&self.grid.h().to_le_bytes())?;
        for x in [self.grid.n(), self.grid.memory(), self.nodes] {
            w.write_all(&u32_of(x, "dimension")?.to_le_bytes())?;
        }
        w.write_all(&(self.trajectories.len() as u64).to_le_bytes())?;
        let mut flags = 0;
        if self.nodes > 1 {
            flags |= FLAG_NETWORK;
        }
        if let Some(t) = &self.truth {
            flags |= FLAG_TRUTH;
            if t.kernel().is_time_invariant() {
                flags |= FLAG_INVARIANT;
            }
        }
        w.write_all(&[flags])?;
        if let Some(t) = &self.truth {
            let text = params_to_string(t);
            w.write_all(&(text.len() as u64).to_le_bytes())?;
            w.write_all(text.as_bytes())?;
        }
        w.write_all(&u32_of(self.edges.len(), "edge count")?.to_le_bytes())?;
        for e in &self.edges {
            w.write_all(&u32_of(e.from, "node")?.to_le_bytes())?;
            w.write_all(&u32_of(e.to, "node")?.to_le_bytes())?;
            w.write_all(&e.omega.to_le_bytes())?;
            w.write_all(&e.shift.to_le_bytes())?;
        }
        w.write_all(&u32_of(self.notes.len(), "note count")?.to_le_bytes())?;
        for (k, v) in &self.notes {
            for s in [k, v] {
                w.write_all(&u32_of(s.len(), "note length")?.to_le_bytes())?;
                w.write_all(s.as_bytes())?;
            }
        }
        let mut buf = vec![0u8; self.record_bytes()];
        for traj in &self.trajectories {
            pack_into(&traj.to_dense(), &mut buf);
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 5];
        read_exact(r, &mut magic)?;
        if &magic != DATASET_MAGIC {
            return Err(Error::Format("not a dataset file (bad magic)".into()));
        }
        let h = f64::from_le_bytes(read_array(r)?);
        let n = read_u32(r)? as usize;
        let memory = read_u32(r)? as usize;
        let nodes = read_u32(r)? as usize;
        let count = u64::from_le_bytes(read_array(r)?);
        let [flags] = read_array(r)?;
        if flags & !(FLAG_NETWORK | FLAG_INVARIANT | FLAG_TRUTH) != 0 {
            return Err(Error::Format(format!("unknown flag bits {flags:#04x}")));
        }
        let grid = TimeGrid::new(h, n, memory).map_err(|e| Error::Format(format!("bad grid: {e}")))?;
        if nodes == 0 {
            return Err(Error::Format("dataset has zero nodes".into()));
        }
        if (flags & FLAG_NETWORK != 0) != (nodes > 1) {
            return Err(Error::Format("network flag disagrees with node count".into()));
        }
        let truth = if flags & FLAG_TRUTH != 0 {
            let len = u64::from_le_bytes(read_array(r)?);
            let text = String::from_utf8(read_vec(r, len)?).map_err(|_| Error::Format("truth is not UTF-8".into()))?;
            let t = params_from_str(&text)?;
            if *t.grid() != grid || t.nodes() != nodes {
                return Err(Error::Format("embedded truth does not match the dataset grid".into()));
            }
            if t.kernel().is_time_invariant() != (flags & FLAG_INVARIANT != 0) {
                return Err(Error::Format("time-invariant flag disagrees with embedded truth".into()));
            }
            Some(t)
        } else if flags & FLAG_INVARIANT != 0 {
            return Err(Error::Format("time-invariant flag set without truth".into()));
        } else {
            None
        };
        let edge_count = read_u32(r)?;
        let mut edges = Vec::new();
        for _ in 0..edge_count {
            let from = read_u32(r)? as usize;
            let to = read_u32(r)? as usize;
            let omega = f64::from_le_bytes(read_array(r)?);
            let shift = f64::from_le_bytes(read_array(r)?);
            if from >= nodes || to >= nodes {
                return Err(Error::Format(format!("edge ({from}, {to}) outside {nodes} nodes")));
            }
            edges.push(EdgeSpec { from, to, omega, shift });
        }
        let note_count = read_u32(r)?;
        let mut notes = BTreeMap::new();
        for _ in 0..note_count {
            let mut kv = [String::new(), String::new()];
            for s in &mut kv {
                let len = read_u32(r)? as u64;
                *s = String::from_utf8(read_vec(r, len)?).map_err(|_| Error::Format("note is not UTF-8".into()))?;
            }
            let [k, v] = kv;
            notes.insert(k, v);
        }
        let mut file = Self { grid, nodes, trajectories: Vec::new(), truth, edges, notes };
        let mut buf = vec![0u8; file.record_bytes()];
        let bits = grid.extended_len() * nodes;
        for m in 0..count {
            read_exact(r, &mut buf)
                .map_err(|_| Error::Format(format!("body ends inside trajectory {m} of {count}")))?;
            let dense = unpack(&buf, bits).map_err(|e| Error::Format(format!("trajectory {m}: {e}")))?;
            let traj = Trajectory::from_dense(grid, nodes, &dense)
                .map_err(|e| Error::Format(format!("trajectory {m}: {e}")))?;
            file.trajectories.push(traj);
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after the last trajectory".into()));
        }
        Ok(file)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        Self::read_from(&mut bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(&mut std::io::BufReader::new(file))
    }
}

/// Packs 0/1 values LSB-first; `out` must hold `ceil(bits.len() / 8)` bytes.
pub fn pack_into(bits: &[u8], out: &mut [u8]) {
    out.fill(0);
    for (k, &b) in bits.iter().enumerate() {
        if b != 0 {
            out[k / 8] |= 1 << (k % 8);
        }
    }
}

/// Inverse of [`pack_into`]; nonzero padding is an error.
pub fn unpack(bytes: &[u8], bits: usize) -> Result<Vec<u8>> {
    if bytes.len() != bits.div_ceil(8) {
        return Err(Error::Format(format!("{} bytes cannot hold exactly {bits} bits", bytes.len())));
    }
    let out: Vec<u8> = (0..bits).map(|k| (bytes[k / 8] >> (k % 8)) & 1).collect();
    if !bits.is_multiple_of(8) && bytes[bits / 8] >> (bits % 8) != 0 {
        return Err(Error::Format("nonzero padding bits".into()));
    }
    Ok(out)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("dataset file is truncated".into()),
        _ => e.into(),
    })
}

fn read_array<R: Read, const K: usize>(r: &mut R) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    read_exact(r, &mut b)?;
    Ok(b)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_vec<R: Read>(r: &mut R, len: u64) -> Result<Vec<u8>> {
    let mut v = Vec::new();
    let got = r.take(len).read_to_end(&mut v)?;
    if got as u64 != len {
        return Err(Error::Format("dataset file is truncated".into()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Event;
    use crate::simulate::{simulate_dataset, Preset};

    #[test]
    fn empty_dataset_has_valid_header() {
        let g = TimeGrid::new(0.5, 32, 8).unwrap();
        let f = DatasetFile::new(g, 1, Vec::new()).unwrap();
        let bytes = f.to_bytes().unwrap();
        // magic, h, three u32, count, flags, edge count, note count
        assert_eq!(bytes.len(), 5 + 8 + 12 + 8 + 1 + 4 + 4);
        assert_eq!(&bytes[..5], b"TULK1");
        assert_eq!(DatasetFile::from_bytes(&bytes).unwrap(), f);
    }

    #[test]
    fn round_trip_with_truth_edges_notes() {
        let truth = Preset::Network.truth(2).unwrap();
        let data = simulate_dataset(&truth.params, 7, 9).unwrap();
        let mut f = DatasetFile::new(*truth.params.grid(), 5, data).unwrap().with_truth(truth.params).unwrap();
        f.edges = truth.edges;
        f.notes.insert("seed".into(), "9".into());
        f.notes.insert("preset".into(), "paper-network".into());
        let bytes = f.to_bytes().unwrap();
        assert_eq!(DatasetFile::from_bytes(&bytes).unwrap(), f);
        assert_eq!(f.to_bytes().unwrap(), bytes);
        // each record holds 40 x 5 bits = 25 bytes
        assert!(matches!(DatasetFile::from_bytes(&bytes[..bytes.len() - 25]), Err(Error::Format(_))));
    }

    #[test]
    fn stationary_flag_round_trips() {
        let truth = Preset::Stationary.truth(0).unwrap();
        let f = DatasetFile::new(*truth.params.grid(), 1, Vec::new()).unwrap().with_truth(truth.params).unwrap();
        let bytes = f.to_bytes().unwrap();
        assert_eq!(bytes[5 + 8 + 12 + 8] & FLAG_INVARIANT, FLAG_INVARIANT);
        assert_eq!(DatasetFile::from_bytes(&bytes).unwrap(), f);
    }

    #[test]
    fn rejects_corruption() {
        let g = TimeGrid::new(0.5, 4, 2).unwrap();
        let t = Trajectory::from_events(g, 2, vec![Event { time: -1, node: 1 }, Event { time: 3, node: 0 }]).unwrap();
        let f = DatasetFile::new(g, 2, vec![t.clone(), t]).unwrap();
        let bytes = f.to_bytes().unwrap();
        let header = bytes.len() - 2 * 2;
        let mut bad_magic = bytes.clone();
        bad_magic[4] = b'2';
        let mut two_events = bytes.clone();
        // slot 0 holds (-1, node 1); setting node 0 as well breaks the one-event rule
        two_events[header] |= 1;
        let mut padding = bytes.clone();
        padding[header + 1] |= 0x80;
        let mut extra = bytes.clone();
        extra.push(0);
        for (k, b) in [bad_magic, two_events, padding, extra, bytes[..bytes.len() - 1].to_vec()].iter().enumerate() {
            assert!(matches!(DatasetFile::from_bytes(b), Err(Error::Format(_))), "case {k}");
        }
    }

    #[test]
    fn pack_layout() {
        let mut out = [0u8; 2];
        pack_into(&[1, 0, 0, 0, 0, 0, 0, 1, 0, 1], &mut out);
        assert_eq!(out, [0b1000_0001, 0b10]);
        assert_eq!(unpack(&out, 10).unwrap(), vec![1, 0, 0, 0, 0, 0, 0, 1, 0, 1]);
        assert!(unpack(&[0, 0b100], 10).is_err());
    }

    #[test]
    fn mismatched_trajectories_are_rejected() {
        let g = TimeGrid::new(0.5, 4, 2).unwrap();
        let other = TimeGrid::new(0.5, 5, 2).unwrap();
        assert!(DatasetFile::new(g, 1, vec![Trajectory::empty(other, 1)]).is_err());
        assert!(DatasetFile::new(g, 1, vec![Trajectory::empty(g, 2)]).is_err());
    }
}
