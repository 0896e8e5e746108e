//! CSV and binary checkpoint formats for fields.
//!
//! Radial fields are written as CSV with header `r,u`. Floats use Rust's
//! shortest round-trip formatting, so reading back is exact and repeated
//! writes are byte-identical.
//!
//! Checkpoints hold one field on its grid. Layout, integers and floats
//! little-endian:
//!
//! ```text
//! magic      4 bytes  "HRCK"
//! version    u32      1
//! kind       u8       0 radial, 1 Cartesian
//! radial:    dim u32, nodes u64, r_max f64
//! Cartesian: shape 3 × u64, half_width 3 × f64, scheme u8 (0 spectral, 1 finite difference)
//! meta_len   u64
//! meta       meta_len bytes of UTF-8, one `key=value` per line, keys sorted
//! count      u64
//! payload    count × f64, row-major (last axis fastest)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::fields::{CartesianField, CartesianGrid, DerivativeScheme, RadialField, RadialGrid};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"HRCK";
const VERSION: u32 = 1;

pub fn write_radial_csv<W: Write>(field: &RadialField, mut out: W) -> Result<()> {
    writeln!(out, "r,u")?;
    for (r, u) in field.grid().nodes().iter().zip(field.values()) {
        writeln!(out, "{r:e},{u:e}")?;
    }
    Ok(())
}

pub fn save_radial_csv(field: &RadialField, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_radial_csv(field, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

/// Read `r,u` rows back onto a radial grid of dimension `dim`. The nodes
/// must be the midpoint nodes of some grid.
pub fn read_radial_csv<R: Read>(input: R, dim: usize) -> Result<RadialField> {
    let mut r = Vec::new();
    let mut u = Vec::new();
    for (line_no, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line_no == 0 {
            if line.trim() != "r,u" {
                return Err(Error::Format(format!("line 1: expected header `r,u`, found `{line}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            let text = cols
                .next()
                .ok_or_else(|| Error::Format(format!("line {}: missing column {name}", line_no + 1)))?;
            text.trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad {name} value `{text}`", line_no + 1)))
        };
        r.push(next("r")?);
        u.push(next("u")?);
    }
    if r.is_empty() {
        return Err(Error::Format("no samples".into()));
    }
    let h = 2.0 * r[0];
    let grid = Arc::new(RadialGrid::new(dim, r.len(), h * r.len() as f64)?);
    for (j, (&a, &b)) in r.iter().zip(grid.nodes()).enumerate() {
        if (a - b).abs() > 1e-9 * b.max(1.0) {
            return Err(Error::Format(format!("line {}: node {a} is not on a midpoint grid", j + 2)));
        }
    }
    RadialField::new(grid, u)
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridHeader {
    Radial { dim: usize, nodes: usize, r_max: f64 },
    Cartesian { shape: [usize; 3], half_width: [f64; 3], scheme: DerivativeScheme },
}

impl GridHeader {
    pub fn len(&self) -> usize {
        match self {
            Self::Radial { nodes, .. } => *nodes,
            Self::Cartesian { shape, .. } => shape.iter().product(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub grid: GridHeader,
    pub meta: BTreeMap<String, String>,
    pub values: Vec<f64>,
}

impl Checkpoint {
    pub fn radial(field: &RadialField) -> Self {
        let g = field.grid();
        Self {
            grid: GridHeader::Radial { dim: g.dim(), nodes: g.len(), r_max: g.r_max() },
            meta: BTreeMap::new(),
            values: field.values().to_vec(),
        }
    }

    pub fn cartesian(field: &CartesianField) -> Self {
        let g = field.grid();
        Self {
            grid: GridHeader::Cartesian { shape: g.shape(), half_width: g.half_width(), scheme: g.scheme() },
            meta: BTreeMap::new(),
            values: field.values().to_vec(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn meta_f64(&self, key: &str) -> Result<f64> {
        let text = self.meta.get(key).ok_or_else(|| Error::Format(format!("checkpoint lacks `{key}`")))?;
        text.parse().map_err(|_| Error::Format(format!("checkpoint `{key}` is not a number: `{text}`")))
    }

    pub fn to_radial(&self) -> Result<RadialField> {
        match self.grid {
            GridHeader::Radial { dim, nodes, r_max } => {
                RadialField::new(Arc::new(RadialGrid::new(dim, nodes, r_max)?), self.values.clone())
            }
            _ => Err(Error::Format("checkpoint holds a Cartesian field".into())),
        }
    }

    pub fn to_cartesian(&self) -> Result<CartesianField> {
        match self.grid {
            GridHeader::Cartesian { shape, half_width, scheme } => {
                CartesianField::new(Arc::new(CartesianGrid::new(shape, half_width, scheme)?), self.values.clone())
            }
            _ => Err(Error::Format("checkpoint holds a radial field".into())),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(64 + 8 * self.values.len());
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        match &self.grid {
            GridHeader::Radial { dim, nodes, r_max } => {
                b.push(0);
                b.extend_from_slice(&(*dim as u32).to_le_bytes());
                b.extend_from_slice(&(*nodes as u64).to_le_bytes());
                b.extend_from_slice(&r_max.to_le_bytes());
            }
            GridHeader::Cartesian { shape, half_width, scheme } => {
                b.push(1);
                for n in shape {
                    b.extend_from_slice(&(*n as u64).to_le_bytes());
                }
                for l in half_width {
                    b.extend_from_slice(&l.to_le_bytes());
                }
                b.push(match scheme {
                    DerivativeScheme::Spectral => 0,
                    DerivativeScheme::FiniteDifference => 1,
                });
            }
        }
        let meta: String = self.meta.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        b.extend_from_slice(&(meta.len() as u64).to_le_bytes());
        b.extend_from_slice(meta.as_bytes());
        b.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for v in &self.values {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("not a checkpoint (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        let grid = match r.take(1)?[0] {
            0 => GridHeader::Radial { dim: r.u32()? as usize, nodes: r.u64()? as usize, r_max: r.f64()? },
            1 => {
                let shape = [r.u64()? as usize, r.u64()? as usize, r.u64()? as usize];
                let half_width = [r.f64()?, r.f64()?, r.f64()?];
                let scheme = match r.take(1)?[0] {
                    0 => DerivativeScheme::Spectral,
                    1 => DerivativeScheme::FiniteDifference,
                    s => return Err(Error::Format(format!("unknown derivative scheme {s}"))),
                };
                GridHeader::Cartesian { shape, half_width, scheme }
            }
            k => return Err(Error::Format(format!("unknown grid kind {k}"))),
        };
        let meta_len = r.u64()? as usize;
        let text = std::str::from_utf8(r.take(meta_len)?)
            .map_err(|_| Error::Format("checkpoint metadata is not UTF-8".into()))?;
        let mut meta = BTreeMap::new();
        for line in text.lines() {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("bad metadata line `{line}`")))?;
            meta.insert(k.to_string(), v.to_string());
        }
        let count = r.u64()? as usize;
        if count != grid.len() {
            return Err(Error::Format(format!("payload has {count} samples, grid has {}", grid.len())));
        }
        let values = (0..count).map(|_| r.f64()).collect::<Result<Vec<f64>>>()?;
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes after payload".into()));
        }
        Ok(Self { grid, meta, values })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format("checkpoint truncated".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
