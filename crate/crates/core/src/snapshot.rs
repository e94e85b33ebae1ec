//! Binary snapshot files.
//!
//! Layout (little-endian): `"NLS3"`, u32 version, u32 grid kind, u32 d,
//! u64 N per sampled axis, f64 extent, f64 time, f64 kappa x3, then the three
//! fields as interleaved `(re, im)` f64 pairs.

use std::fs;
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::FieldTriple;
use crate::grid::{Grid, GridKind};
use crate::params::SystemParams;
use crate::scalar::{lit, to_f64, Real};

pub const MAGIC: &[u8; 4] = b"NLS3";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T: Real> {
    pub time: T,
    pub params: SystemParams<T>,
    pub fields: FieldTriple<T>,
}

impl<T: Real> Snapshot<T> {
    pub fn new(time: T, params: SystemParams<T>, fields: FieldTriple<T>) -> Self {
        Self {
            time,
            params,
            fields,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.fields.grid()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let g = self.grid();
        let mut out = Vec::with_capacity(64 + 48 * g.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&g.kind().code().to_le_bytes());
        out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
        for _ in 0..g.axes() {
            out.extend_from_slice(&(g.points() as u64).to_le_bytes());
        }
        let k = self.params.kappa();
        for v in [g.extent(), self.time, k[0], k[1], k[2]] {
            out.extend_from_slice(&to_f64(v).to_le_bytes());
        }
        for c in self.fields.comps() {
            for z in c {
                out.extend_from_slice(&to_f64(z.re).to_le_bytes());
                out.extend_from_slice(&to_f64(z.im).to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut rd = Reader { bytes, pos: 0 };
        if rd.take(4).map(|m| m != MAGIC).unwrap_or(true) {
            return Err(Error::NotASnapshot);
        }
        let version = rd.u32()?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let kind = GridKind::from_code(rd.u32()?).ok_or(Error::NotASnapshot)?;
        let dim = rd.u32()? as usize;
        let axes = match kind {
            GridKind::PeriodicBox => dim,
            GridKind::Radial => 1,
        };
        if axes == 0 || axes > 5 {
            return Err(Error::SnapshotDimension(format!("d = {dim}")));
        }
        let mut counts = Vec::with_capacity(axes);
        for _ in 0..axes {
            counts.push(rd.u64()? as usize);
        }
        if counts.iter().any(|&c| c != counts[0]) {
            return Err(Error::SnapshotDimension(format!(
                "unequal axis lengths {counts:?}"
            )));
        }
        let extent = lit::<T>(rd.f64()?);
        let time = lit::<T>(rd.f64()?);
        let k = [rd.f64()?, rd.f64()?, rd.f64()?].map(lit::<T>);
        let grid = Grid::new(kind, dim, extent, counts[0])
            .map_err(|e| Error::SnapshotDimension(e.to_string()))?;
        let params = SystemParams::from_array(k)?;
        let n = grid.len();
        let expected = rd.pos + 3 * n * 16;
        if bytes.len() < expected {
            return Err(Error::Truncated {
                expected,
                found: bytes.len(),
            });
        }
        let mut comps: [Vec<Complex<T>>; 3] = Default::default();
        for c in comps.iter_mut() {
            c.reserve(n);
            for _ in 0..n {
                let re = rd.f64()?;
                let im = rd.f64()?;
                c.push(Complex::new(lit(re), lit(im)));
            }
        }
        let [u1, u2, u3] = comps;
        let fields = FieldTriple::new(grid, u1, u2, u3)?;
        Ok(Self {
            time,
            params,
            fields,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Truncated {
                expected: end,
                found: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
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

pub fn write_snapshot<T: Real>(s: &Snapshot<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, s.to_bytes())?;
    Ok(())
}

pub fn read_snapshot<T: Real>(path: impl AsRef<Path>) -> Result<Snapshot<T>> {
    Snapshot::from_bytes(&fs::read(path)?)
}
