//! Little-endian binary voxel grid files.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "C3SV"
//!      4     4  version (u32)
//!      8    12  dims nx, ny, nz (u32 each)
//!     20     4  resolution in metres (f32)
//!     24    12  origin x, y, z in metres (f32 each)
//!     36     1  label width in bytes (always 1)
//!     37     1  encoding: 0 dense, 1 run-length
//!     38     …  payload
//! ```
//!
//! Dense payloads hold one label byte per voxel, x fastest, then y, then z.
//! Run-length payloads are `(count: u32, label: u8)` pairs in the same
//! order; the writer never emits two adjacent runs with the same label.

use std::fs;
use std::path::Path;

use crate::annotate::VoxelGrid;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scene::{GridSpec, SemanticLabel};

pub const GRID_MAGIC: [u8; 4] = *b"C3SV";
pub const GRID_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 38;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Encoding {
    Dense = 0,
    #[default]
    Rle = 1,
}

impl Encoding {
    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(Encoding::Dense),
            1 => Ok(Encoding::Rle),
            other => Err(Error::UnknownEncoding(other)),
        }
    }
}

/// Canonical runs of a label sequence.
pub fn rle_runs(labels: &[SemanticLabel]) -> Vec<(u32, u8)> {
    let mut runs: Vec<(u32, u8)> = Vec::new();
    for l in labels {
        match runs.last_mut() {
            Some((n, code)) if *code == l.code() && *n < u32::MAX => *n += 1,
            _ => runs.push((1, l.code())),
        }
    }
    runs
}

pub fn encode_grid(grid: &VoxelGrid, encoding: Encoding) -> Vec<u8> {
    let spec = grid.spec();
    let mut out = Vec::with_capacity(HEADER_LEN + grid.len());
    out.extend_from_slice(&GRID_MAGIC);
    out.extend_from_slice(&GRID_VERSION.to_le_bytes());
    for n in spec.shape() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    out.extend_from_slice(&(spec.resolution() as f32).to_le_bytes());
    for v in spec.min().iter() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out.push(1);
    out.push(encoding as u8);
    match encoding {
        Encoding::Dense => out.extend(grid.codes()),
        Encoding::Rle => {
            for (n, code) in rle_runs(grid.labels()) {
                out.extend_from_slice(&n.to_le_bytes());
                out.push(code);
            }
        }
    }
    out
}

/// Widens a stored `f32` to the shortest decimal that rounds to it, so
/// values such as 0.1 come back exactly as written.
fn widen(v: f32) -> f64 {
    v.to_string().parse().expect("float display parses")
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn read_f32(b: &[u8], at: usize) -> f32 {
    f32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode_grid(bytes: &[u8]) -> Result<VoxelGrid> {
    if bytes.len() < 4 {
        return Err(Error::Truncated(format!(
            "{} bytes, too short for the magic",
            bytes.len()
        )));
    }
    if bytes[..4] != GRID_MAGIC {
        return Err(Error::BadMagic {
            found: bytes[..4].try_into().expect("4 bytes"),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated(format!(
            "header needs {HEADER_LEN} bytes, file has {}",
            bytes.len()
        )));
    }
    let version = read_u32(bytes, 4);
    if version != GRID_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: GRID_VERSION,
        });
    }
    let dims = [read_u32(bytes, 8), read_u32(bytes, 12), read_u32(bytes, 16)];
    let res = widen(read_f32(bytes, 20));
    let origin = Vec3::new(
        widen(read_f32(bytes, 24)),
        widen(read_f32(bytes, 28)),
        widen(read_f32(bytes, 32)),
    );
    if bytes[36] != 1 {
        return Err(Error::LabelWidth(bytes[36]));
    }
    let encoding = Encoding::from_byte(bytes[37])?;
    if dims.contains(&0) {
        return Err(Error::Config(format!("grid dims {dims:?} contain a zero")));
    }
    let extent = Vec3::new(dims[0] as f64 * res, dims[1] as f64 * res, dims[2] as f64 * res);
    let spec = GridSpec::new(origin, extent, res)?;
    let expected = dims.iter().map(|&d| d as u64).product::<u64>();
    let payload = &bytes[HEADER_LEN..];
    let codes = match encoding {
        Encoding::Dense => {
            let found = payload.len() as u64;
            if found < expected {
                return Err(Error::Truncated(format!(
                    "dense payload has {found} of {expected} voxels"
                )));
            }
            if found > expected {
                return Err(Error::PayloadMismatch { expected, found });
            }
            payload.to_vec()
        }
        Encoding::Rle => {
            if !payload.len().is_multiple_of(5) {
                return Err(Error::Truncated(format!(
                    "run-length payload ends inside a run ({} bytes)",
                    payload.len()
                )));
            }
            let mut total = 0u64;
            for run in payload.chunks_exact(5) {
                total += read_u32(run, 0) as u64;
            }
            if total < expected {
                return Err(Error::Truncated(format!(
                    "run-length payload covers {total} of {expected} voxels"
                )));
            }
            if total > expected {
                return Err(Error::PayloadMismatch { expected, found: total });
            }
            let mut codes = Vec::with_capacity(expected as usize);
            for run in payload.chunks_exact(5) {
                codes.extend(std::iter::repeat_n(run[4], read_u32(run, 0) as usize));
            }
            codes
        }
    };
    VoxelGrid::from_codes(spec, &codes)
}

pub fn write_grid(grid: &VoxelGrid, path: impl AsRef<Path>, encoding: Encoding) -> Result<()> {
    fs::write(path, encode_grid(grid, encoding))?;
    Ok(())
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<VoxelGrid> {
    decode_grid(&fs::read(path)?)
}
