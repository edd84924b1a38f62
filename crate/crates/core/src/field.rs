//! Spinor-valued sample fields on a [`Grid1D`].

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::text::format_float;

/// Complex `C^r`-valued samples, stored row-major as `N x r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: Grid1D,
    rank: usize,
    values: Vec<Complex64>,
}

impl SpinorField {
    /// Builds a field, rejecting wrong shapes and non-finite samples.
    pub fn new(grid: Grid1D, rank: usize, values: Vec<Complex64>) -> Result<Self> {
        let field = Self::from_parts(grid, rank, values)?;
        field.validate()?;
        Ok(field)
    }

    /// Shape-checked constructor that does not inspect the sample values.
    pub(crate) fn from_parts(grid: Grid1D, rank: usize, values: Vec<Complex64>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidField("rank must be positive".into()));
        }
        if values.len() != grid.n_points() * rank {
            return Err(Error::InvalidField(format!(
                "expected {} values for {} points of rank {rank}, got {}",
                grid.n_points() * rank,
                grid.n_points(),
                values.len()
            )));
        }
        Ok(Self { grid, rank, values })
    }

    pub fn zeros(grid: Grid1D, rank: usize) -> Self {
        assert!(rank > 0, "rank must be positive");
        Self {
            grid,
            rank,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points() * rank],
        }
    }

    /// Samples `f(x, out)` at every node; `out` has length `rank`.
    pub fn from_fn(grid: Grid1D, rank: usize, mut f: impl FnMut(f64, &mut [Complex64])) -> Self {
        let mut field = Self::zeros(grid, rank);
        for j in 0..grid.n_points() {
            let x = grid.node(j);
            f(x, &mut field.values[j * rank..(j + 1) * rank]);
        }
        field
    }

    /// Rank-one field sampled from `f`.
    pub fn scalar(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        Self::from_fn(grid, 1, |x, out| out[0] = f(x))
    }

    /// Field equal to `value` at every node.
    pub fn constant(grid: Grid1D, value: &[Complex64]) -> Self {
        Self::from_fn(grid, value.len(), |_, out| out.copy_from_slice(value))
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Fiber at node `j`.
    pub fn at(&self, j: usize) -> &[Complex64] {
        &self.values[j * self.rank..(j + 1) * self.rank]
    }

    /// Fiberwise Euclidean modulus at node `j`.
    pub fn modulus(&self, j: usize) -> f64 {
        self.at(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        match self
            .values
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            None => Ok(()),
            Some(i) => Err(Error::InvalidField(format!(
                "non-finite sample at node {}, component {}",
                i / self.rank,
                i % self.rank
            ))),
        }
    }

    /// Fails unless `other` lives on the same grid with the same rank.
    pub fn ensure_compatible(&self, other: &SpinorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Mismatch(format!(
                "grids differ: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        if self.rank != other.rank {
            return Err(Error::Mismatch(format!(
                "ranks differ: {} vs {}",
                self.rank, other.rank
            )));
        }
        Ok(())
    }

    pub fn add_field(&self, other: &SpinorField) -> Result<SpinorField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub_field(&self, other: &SpinorField) -> Result<SpinorField> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &SpinorField) -> Result<SpinorField> {
        self.zip_with(other, |a, b| a + c * b)
    }

    fn zip_with(
        &self,
        other: &SpinorField,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<SpinorField> {
        self.ensure_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            grid: self.grid,
            rank: self.rank,
            values,
        })
    }

    pub fn scale(&self, c: Complex64) -> SpinorField {
        Self {
            grid: self.grid,
            rank: self.rank,
            values: self.values.iter().map(|&z| c * z).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> SpinorField {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Quadrature inner product `sum_x w_x <f(x), g(x)>`, antilinear in `self`.
    pub fn inner(&self, other: &SpinorField) -> Result<Complex64> {
        self.ensure_compatible(other)?;
        let r = self.rank;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.grid.n_points() {
            let w = self.grid.weight(j);
            let s: Complex64 = self.values[j * r..(j + 1) * r]
                .iter()
                .zip(&other.values[j * r..(j + 1) * r])
                .map(|(a, b)| a.conj() * b)
                .sum();
            acc += w * s;
        }
        Ok(acc)
    }

    /// Quadrature L^2 norm; does not validate finiteness.
    pub fn l2_norm(&self) -> f64 {
        (0..self.grid.n_points())
            .map(|j| self.grid.weight(j) * self.modulus(j).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Writes the `x,re_0,im_0,...` CSV form.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["x".to_string()];
        for c in 0..self.rank {
            header.push(format!("re_{c}"));
            header.push(format!("im_{c}"));
        }
        w.write_record(&header)?;
        for j in 0..self.grid.n_points() {
            let mut row = vec![format_float(self.grid.node(j))];
            for z in self.at(j) {
                row.push(format_float(z.re));
                row.push(format_float(z.im));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a field written by [`write_csv`](Self::write_csv). The rank is
    /// taken from the header and the `x` column must match the grid nodes.
    pub fn read_csv<R: Read>(grid: Grid1D, reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.is_empty() || &header[0] != "x" || header.len() % 2 != 1 || header.len() < 3 {
            return Err(Error::Csv(format!(
                "expected header x,re_0,im_0,..., got {:?}",
                header.iter().collect::<Vec<_>>()
            )));
        }
        let rank = (header.len() - 1) / 2;
        for c in 0..rank {
            if header[1 + 2 * c] != *format!("re_{c}") || header[2 + 2 * c] != *format!("im_{c}") {
                return Err(Error::Csv(format!("bad header column for component {c}")));
            }
        }
        let tol = 1e-9 * grid.length().max(1.0);
        let mut values = Vec::with_capacity(grid.n_points() * rank);
        let mut rows = 0;
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Csv(format!("row {}: missing column {i}", line + 2)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Csv(format!("row {}: column {i}: {e}", line + 2)))
            };
            if rows >= grid.n_points() {
                return Err(Error::Csv(format!(
                    "more rows than grid points ({})",
                    grid.n_points()
                )));
            }
            let x = parse(0)?;
            if (x - grid.node(rows)).abs() > tol {
                return Err(Error::Csv(format!(
                    "row {}: x = {x} does not match grid node {}",
                    line + 2,
                    grid.node(rows)
                )));
            }
            for c in 0..rank {
                values.push(Complex64::new(parse(1 + 2 * c)?, parse(2 + 2 * c)?));
            }
            rows += 1;
        }
        if rows != grid.n_points() {
            return Err(Error::Csv(format!(
                "expected {} rows, found {rows}",
                grid.n_points()
            )));
        }
        Self::new(grid, rank, values)
    }
}
