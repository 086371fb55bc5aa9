//! On-disk field container.
//!
//! Binary layout (little-endian):
//!
//! ```text
//! offset  size  content
//! 0       4     magic "KGVF"
//! 4       2     version (u16) = 1
//! 6       1     kind: 0 = complex scalar, 1 = real vector
//! 7       1     dim (number of grid axes)
//! 8       1     time_axis flag (axis 0 is x0 = c t when 1)
//! 9       1     codim (1 for scalars)
//! 10      2     reserved, zero
//! 12      24*d  per axis: lower f64, upper f64, points u64
//! ...           values, row-major over the grid (last axis fastest):
//!               scalars as (re f64, im f64), vectors as codim f64 per point
//! ```
//!
//! The JSON form carries the same header fields with `values` flattened the
//! same way.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid, ScalarField, VectorField};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"KGVF";
const VERSION: u16 = 1;
const FORMAT_TAG: &str = "kgvar-field";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContainerFormat {
    Binary,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldContainer {
    Scalar(ScalarField),
    Vector(VectorField),
}

#[derive(Serialize, Deserialize)]
struct JsonField {
    format: String,
    version: u16,
    kind: String,
    grid: Grid,
    codim: usize,
    values: Vec<f64>,
}

impl FieldContainer {
    fn grid(&self) -> &Grid {
        match self {
            FieldContainer::Scalar(f) => f.grid(),
            FieldContainer::Vector(f) => f.grid(),
        }
    }

    fn flat_values(&self) -> Vec<f64> {
        match self {
            FieldContainer::Scalar(f) => f.values().iter().flat_map(|z| [z.re, z.im]).collect(),
            FieldContainer::Vector(f) => f.values().to_vec(),
        }
    }

    fn codim(&self) -> usize {
        match self {
            FieldContainer::Scalar(_) => 1,
            FieldContainer::Vector(f) => f.codim(),
        }
    }

    fn from_parts(kind: u8, grid: Grid, codim: usize, values: Vec<f64>) -> Result<Self> {
        match kind {
            0 => {
                if values.len() != 2 * grid.len() {
                    return Err(Error::Format("scalar value count does not match grid".into()));
                }
                let vals = values.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
                Ok(FieldContainer::Scalar(ScalarField::new(grid, vals)?))
            }
            1 => Ok(FieldContainer::Vector(VectorField::new(grid, codim, values)?)),
            k => Err(Error::Format(format!("unknown field kind {k}"))),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let grid = self.grid();
        let values = self.flat_values();
        let mut out = Vec::with_capacity(12 + 24 * grid.dim() + 8 * values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(match self {
            FieldContainer::Scalar(_) => 0,
            FieldContainer::Vector(_) => 1,
        });
        out.push(grid.dim() as u8);
        out.push(grid.has_time_axis() as u8);
        out.push(self.codim() as u8);
        out.extend_from_slice(&[0, 0]);
        for a in 0..grid.dim() {
            out.extend_from_slice(&grid.lower()[a].to_le_bytes());
            out.extend_from_slice(&grid.upper()[a].to_le_bytes());
            out.extend_from_slice(&(grid.points()[a] as u64).to_le_bytes());
        }
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let short = || Error::Format("truncated container".into());
        if bytes.len() < 12 || &bytes[..4] != MAGIC {
            return Err(Error::Format("missing KGVF magic".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let (kind, dim, time_axis, codim) = (bytes[6], bytes[7] as usize, bytes[8] != 0, bytes[9] as usize);
        let f64_at = |off: usize| -> Result<f64> {
            let b = bytes.get(off..off + 8).ok_or_else(short)?;
            Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
        };
        let mut lower = Vec::with_capacity(dim);
        let mut upper = Vec::with_capacity(dim);
        let mut points = Vec::with_capacity(dim);
        let mut off = 12;
        for _ in 0..dim {
            lower.push(f64_at(off)?);
            upper.push(f64_at(off + 8)?);
            let b = bytes.get(off + 16..off + 24).ok_or_else(short)?;
            points.push(u64::from_le_bytes(b.try_into().expect("8 bytes")) as usize);
            off += 24;
        }
        let grid = if time_axis {
            let spatial = Grid::new(&lower[1..], &upper[1..], &points[1..])?;
            Grid::space_time(lower[0], upper[0], points[0], &spatial)?
        } else {
            Grid::new(&lower, &upper, &points)?
        };
        let body = &bytes[off..];
        if body.len() % 8 != 0 {
            return Err(short());
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Self::from_parts(kind, grid, codim, values)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = JsonField {
            format: FORMAT_TAG.into(),
            version: VERSION,
            kind: match self {
                FieldContainer::Scalar(_) => "scalar".into(),
                FieldContainer::Vector(_) => "vector".into(),
            },
            grid: self.grid().clone(),
            codim: self.codim(),
            values: self.flat_values(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: JsonField = serde_json::from_str(text)?;
        if doc.format != FORMAT_TAG || doc.version != VERSION {
            return Err(Error::Format(format!("unexpected format {} v{}", doc.format, doc.version)));
        }
        // re-validate through the constructors
        let g = doc.grid;
        let grid = if g.has_time_axis() {
            let spatial = Grid::new(&g.lower()[1..], &g.upper()[1..], &g.points()[1..])?;
            Grid::space_time(g.lower()[0], g.upper()[0], g.points()[0], &spatial)?
        } else {
            Grid::new(g.lower(), g.upper(), g.points())?
        };
        let kind = match doc.kind.as_str() {
            "scalar" => 0,
            "vector" => 1,
            other => return Err(Error::Format(format!("unknown field kind {other}"))),
        };
        Self::from_parts(kind, grid, doc.codim, doc.values)
    }
}

pub fn write_field(path: &Path, field: &FieldContainer, format: ContainerFormat) -> Result<()> {
    match format {
        ContainerFormat::Binary => std::fs::write(path, field.to_bytes())?,
        ContainerFormat::Json => std::fs::write(path, field.to_json()?)?,
    }
    Ok(())
}

/// Reads either encoding, sniffing the binary magic.
pub fn read_field(path: &Path) -> Result<FieldContainer> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        FieldContainer::from_bytes(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?;
        FieldContainer::from_json(&text)
    }
}
