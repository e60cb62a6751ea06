//! Complex sampled state on a [`Grid`], plus flat binary/CSV serialisation.
//!
//! Both layouts carry a header `(n, L, M)` followed by row-major interleaved
//! `(re, im)` pairs. The binary layout is little-endian: `u32 n`, `f64 L`,
//! `u32 M`, then `2·M^n` `f64` values.

use std::io::{BufRead, BufReader, Read, Write};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, Vec2};

#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    /// Wrap sampled values, checking length and finiteness.
    pub fn new(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    /// Internal constructor for results of operations that cannot introduce NaN.
    pub(crate) fn from_parts(grid: &Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Field::from_parts(grid, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    /// Sample a function of position on the grid.
    pub fn from_fn(grid: &Grid, f: impl Fn(Vec2) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Field::new(grid, values)
    }

    /// Real field sampled from a real function.
    pub fn from_real_fn(grid: &Grid, f: impl Fn(Vec2) -> f64) -> Result<Self> {
        Field::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub(crate) fn from_real(grid: &Grid, values: &[f64]) -> Self {
        Field::from_parts(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `max |f|` over the samples.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Pointwise `|f|^2`.
    pub fn abs_sq(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn scale(&self, c: Complex64) -> Field {
        Field::from_parts(&self.grid, self.values.iter().map(|v| v * c).collect())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field::from_parts(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Same samples reinterpreted on another grid with the same lattice size.
    pub fn on_grid(&self, grid: &Grid) -> Result<Field> {
        if grid.len() != self.grid.len() || grid.dim() != self.grid.dim() {
            return Err(Error::GridMismatch);
        }
        Ok(Field::from_parts(grid, self.values.clone()))
    }

    pub(crate) fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.grid.dim() as u32).to_le_bytes())?;
        w.write_all(&self.grid.length().to_le_bytes())?;
        w.write_all(&(self.grid.points() as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.values.len() * 16);
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Field> {
        let mut u4 = [0u8; 4];
        let mut f8 = [0u8; 8];
        r.read_exact(&mut u4)?;
        let dim = u32::from_le_bytes(u4) as usize;
        r.read_exact(&mut f8)?;
        let length = f64::from_le_bytes(f8);
        r.read_exact(&mut u4)?;
        let points = u32::from_le_bytes(u4) as usize;
        let grid = Grid::new(dim, length, points)?;
        let mut raw = vec![0u8; grid.len() * 16];
        r.read_exact(&mut raw)?;
        let values = raw
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Field::new(&grid, values)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,L,M")?;
        writeln!(w, "{},{:.16e},{}", self.grid.dim(), self.grid.length(), self.grid.points())?;
        writeln!(w, "re,im")?;
        for v in &self.values {
            writeln!(w, "{:.16e},{:.16e}", v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Field> {
        let mut lines = BufReader::new(r).lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Format("unexpected end of field CSV".into()))?
                .map_err(Error::from)
        };
        let bad = |what: &str| Error::Format(format!("malformed field CSV: {what}"));
        if next()?.trim() != "n,L,M" {
            return Err(bad("header"));
        }
        let head = next()?;
        let parts: Vec<&str> = head.trim().split(',').collect();
        if parts.len() != 3 {
            return Err(bad("grid line"));
        }
        let dim = parts[0].parse().map_err(|_| bad("n"))?;
        let length = parts[1].parse().map_err(|_| bad("L"))?;
        let points = parts[2].parse().map_err(|_| bad("M"))?;
        let grid = Grid::new(dim, length, points)?;
        if next()?.trim() != "re,im" {
            return Err(bad("value header"));
        }
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let line = next()?;
            let (re, im) = line.trim().split_once(',').ok_or_else(|| bad("value row"))?;
            values.push(Complex64::new(
                re.parse().map_err(|_| bad("re"))?,
                im.parse().map_err(|_| bad("im"))?,
            ));
        }
        Field::new(&grid, values)
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        assert!(self.grid == rhs.grid, "grid mismatch");
        Field::from_parts(
            &self.grid,
            self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        )
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        assert!(self.grid == rhs.grid, "grid mismatch");
        Field::from_parts(
            &self.grid,
            self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect(),
        )
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        Field::from_parts(&self.grid, self.values.iter().map(|a| a * rhs).collect())
    }
}
