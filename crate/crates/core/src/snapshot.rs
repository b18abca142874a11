//! Binary field snapshots.
//!
//! Layout (little endian): magic `LLGF`, u32 version (1), u32 dim, u32 N,
//! f64 L, u32 component count, then `N^dim * components` f64 samples in
//! row-major order with the components of one point adjacent.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::field::{ComplexField, Grid, ScalarField, SpinField, VectorField};

pub const MAGIC: &[u8; 4] = b"LLGF";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub dim: u32,
    pub n: u32,
    pub length: f64,
    pub components: u32,
    /// Interleaved samples, `components` per grid point.
    pub data: Vec<f64>,
}

impl Snapshot {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim as usize, self.n as usize, self.length)
    }

    fn from_components(grid: &Grid, comps: &[&[f64]]) -> Snapshot {
        let mut data = Vec::with_capacity(grid.len() * comps.len());
        for i in 0..grid.len() {
            for c in comps {
                data.push(c[i]);
            }
        }
        Snapshot { dim: grid.dim() as u32, n: grid.n() as u32, length: grid.length(), components: comps.len() as u32, data }
    }

    pub fn from_scalar(f: &ScalarField) -> Snapshot {
        use crate::field::SpectralField;
        Snapshot::from_components(f.grid(), &[f.values()])
    }

    pub fn from_vector(v: &VectorField) -> Snapshot {
        let c = v.components();
        Snapshot::from_components(v.grid(), &[&c[0], &c[1], &c[2]])
    }

    pub fn from_spin(m: &SpinField) -> Snapshot {
        Snapshot::from_vector(m.as_vector())
    }

    /// Complex tuples are stored as `re, im` pairs per component.
    pub fn from_complex_tuple(u: &[ComplexField]) -> Result<Snapshot> {
        use crate::field::SpectralField;
        let first = u.first().ok_or_else(|| LabError::Snapshot("empty field tuple".into()))?;
        let grid = first.grid().clone();
        let parts: Vec<Vec<f64>> = u.iter().flat_map(|f| [f.values().iter().map(|c| c.re).collect(), f.values().iter().map(|c| c.im).collect()]).collect();
        let refs: Vec<&[f64]> = parts.iter().map(|p| p.as_slice()).collect();
        Ok(Snapshot::from_components(&grid, &refs))
    }

    fn component(&self, c: usize) -> Vec<f64> {
        let k = self.components as usize;
        self.data.iter().skip(c).step_by(k).copied().collect()
    }

    pub fn to_vector(&self) -> Result<VectorField> {
        if self.components != 3 {
            return Err(LabError::Snapshot(format!("expected 3 components, found {}", self.components)));
        }
        VectorField::new(self.grid()?, [self.component(0), self.component(1), self.component(2)])
    }

    pub fn to_spin(&self) -> Result<SpinField> {
        SpinField::from_vectors(self.to_vector()?)
    }

    pub fn to_complex_tuple(&self) -> Result<Vec<ComplexField>> {
        if self.components == 0 || !self.components.is_multiple_of(2) {
            return Err(LabError::Snapshot(format!("complex tuple needs an even component count, found {}", self.components)));
        }
        let grid = self.grid()?;
        (0..self.components as usize / 2)
            .map(|k| {
                let re = self.component(2 * k);
                let im = self.component(2 * k + 1);
                ComplexField::new(grid.clone(), re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect())
            })
            .collect()
    }

    /// Euclidean norm over the components at each point.
    pub fn magnitude(&self) -> Result<ScalarField> {
        let k = self.components as usize;
        if k == 0 {
            return Err(LabError::Snapshot("no components".into()));
        }
        let v = self.data.chunks(k).map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        ScalarField::new(self.grid()?, v)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.dim.to_le_bytes())?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&self.length.to_le_bytes())?;
        w.write_all(&self.components.to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Snapshot> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(LabError::Snapshot("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(LabError::Snapshot(format!("unsupported version {version}")));
        }
        let dim = read_u32(&mut r)?;
        let n = read_u32(&mut r)?;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let length = f64::from_le_bytes(b8);
        let components = read_u32(&mut r)?;
        // Validates the header before sizing the payload.
        let grid = Grid::new(dim as usize, n as usize, length)?;
        let count = grid.len() * components as usize;
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut b8)?;
            data.push(f64::from_le_bytes(b8));
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(LabError::Snapshot("trailing bytes after payload".into()));
        }
        Ok(Snapshot { dim, n, length, components, data })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Snapshot> {
        let f = std::fs::File::open(path)?;
        Snapshot::read_from(std::io::BufReader::new(f))
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
