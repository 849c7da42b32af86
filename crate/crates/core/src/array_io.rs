//! Binary tensor files.
//!
//! Layout (all little-endian):
//!
//! ```text
//! b"IPFE" | version: u32 | rank: u32 | len: u64 × rank | (re: f64, im: f64) × Π len
//! ```
//!
//! Elements are row-major (last axis fastest). A JSON sidecar with grid
//! metadata and units sits next to each file at `<path>.json`.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::moments::MomentKernel;

pub const MAGIC: &[u8; 4] = b"IPFE";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<Complex64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} holds {len} elements, got {}",
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }
}

/// Header size in bytes for a tensor of the given rank.
pub fn header_len(rank: usize) -> usize {
    4 + 4 + 4 + 8 * rank
}

pub fn encode(t: &Tensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(header_len(t.rank()) + 16 * t.data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(t.rank() as u32).to_le_bytes());
    for &l in &t.shape {
        out.extend_from_slice(&(l as u64).to_le_bytes());
    }
    for v in &t.data {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> Result<&'a [u8]> {
    let end = *pos + n;
    if end > bytes.len() {
        return Err(Error::Format(format!(
            "truncated file: need {end} bytes, have {}",
            bytes.len()
        )));
    }
    let s = &bytes[*pos..end];
    *pos = end;
    Ok(s)
}

pub fn decode(bytes: &[u8]) -> Result<Tensor> {
    let mut pos = 0;
    let magic = take(bytes, &mut pos, 4)?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected \"IPFE\"")));
    }
    let u32_at = |pos: &mut usize| -> Result<u32> {
        Ok(u32::from_le_bytes(take(bytes, pos, 4)?.try_into().unwrap()))
    };
    let version = u32_at(&mut pos)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let rank = u32_at(&mut pos)? as usize;
    let mut shape = Vec::with_capacity(rank);
    for _ in 0..rank {
        let l = u64::from_le_bytes(take(bytes, &mut pos, 8)?.try_into().unwrap());
        shape.push(usize::try_from(l).map_err(|_| Error::Format(format!("axis length {l} too large")))?);
    }
    let len = shape
        .iter()
        .try_fold(1usize, |acc, &l| acc.checked_mul(l))
        .ok_or_else(|| Error::Format("element count overflows".into()))?;
    let payload = take(bytes, &mut pos, len.checked_mul(16).ok_or_else(|| Error::Format("payload size overflows".into()))?)?;
    if pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after payload",
            bytes.len() - pos
        )));
    }
    let data = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(Tensor { shape, data })
}

pub fn write_array(path: &Path, t: &Tensor) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(t))?;
    Ok(())
}

pub fn read_array(path: &Path) -> Result<Tensor> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// Sidecar metadata for a stored kernel or field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub grid: FrequencyGrid,
    pub quantity: String,
    pub units: String,
    /// Kernel order (m, n) when the tensor is a moment kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<[usize; 2]>,
    /// Propagation distance, m.
    #[serde(default)]
    pub z: f64,
    /// Axis convention, e.g. "row-major; frequency a_j = (j - n/2)*delta_a".
    pub layout: String,
}

impl Sidecar {
    pub fn new(grid: FrequencyGrid, quantity: &str, units: &str) -> Self {
        Sidecar {
            grid,
            quantity: quantity.into(),
            units: units.into(),
            order: None,
            z: 0.0,
            layout: format!(
                "row-major, last axis fastest; D = {} axes per site; a_j = (j - n/2)*delta_a cycles/m",
                grid.dim
            ),
        }
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_sidecar(path: &Path, meta: &Sidecar) -> Result<()> {
    let text = serde_json::to_string_pretty(meta).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(sidecar_path(path), text + "\n")?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let text = fs::read_to_string(sidecar_path(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("sidecar {}: {e}", path.display())))
}

/// Tensor shape of a kernel: rank m+n, and D axes per index on 2-D grids.
pub fn kernel_shape(h: &MomentKernel) -> Vec<usize> {
    vec![h.grid.n; h.rank() * h.grid.dim]
}

/// Writes a kernel and its sidecar.
pub fn write_kernel(path: &Path, h: &MomentKernel, quantity: &str) -> Result<()> {
    write_array(path, &Tensor::new(kernel_shape(h), h.values.clone())?)?;
    let mut meta = Sidecar::new(h.grid, quantity, &kernel_units(h));
    meta.order = Some([h.m, h.n]);
    meta.z = h.z;
    write_sidecar(path, &meta)
}

fn kernel_units(h: &MomentKernel) -> String {
    let r = h.rank() * h.grid.dim;
    if r == 0 {
        "1".into()
    } else {
        format!("field^{} per (cycles/m)^{}", h.rank(), r)
    }
}

/// Reads a kernel written by [`write_kernel`]; order and grid come from the sidecar.
pub fn read_kernel(path: &Path) -> Result<MomentKernel> {
    let meta = read_sidecar(path)?;
    let t = read_array(path)?;
    let [m, n] = meta
        .order
        .ok_or_else(|| Error::Format("sidecar has no kernel order".into()))?;
    let mut h = MomentKernel::from_values(m, n, meta.grid, t.data)?;
    let want = kernel_shape(&h);
    if t.shape != want {
        return Err(Error::Format(format!(
            "tensor shape {:?} does not match order ({m},{n}) on {:?} (expected {want:?})",
            t.shape, meta.grid
        )));
    }
    h.z = meta.z;
    Ok(h)
}
