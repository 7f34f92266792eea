//! Uniform cell-centered grids on axis-aligned boxes, in one or two
//! dimensions, plus the value containers everything else works with:
//! `GridFunction` for cell data and `FaceField` for face data.
//!
//! Cell `(i, j)` owns the box `[i*h0, (i+1)*h0] x [j*h1, (j+1)*h1]` and its
//! value lives at the center `((i+0.5)*h0, (j+0.5)*h1)`. Faces normal to
//! axis `r` are indexed so that face `i` of a row sits between cells `i-1`
//! and `i`; face `0` and face `n` are the outer boundary.

use std::fmt::Write as _;
use std::io::{self, BufRead, Read, Write};

/// Uniform grid over `(0, extent[0]) x (0, extent[1])` with `n[r]` cells
/// along axis `r`. One-dimensional grids have `dim == 1` and axis 1 unused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub n: [usize; 2],
    pub extent: [f64; 2],
}

impl Grid {
    pub fn new_1d(n: usize, extent: f64) -> Grid {
        Grid { dim: 1, n: [n, 1], extent: [extent, 0.0] }
    }

    pub fn new_2d(nx: usize, ny: usize, ex: f64, ey: f64) -> Grid {
        Grid { dim: 2, n: [nx, ny], extent: [ex, ey] }
    }

    /// Mesh width along axis `r`.
    pub fn h(&self, r: usize) -> f64 {
        self.extent[r] / self.n[r] as f64
    }

    /// Volume (length in 1D, area in 2D) of one cell.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|r| self.h(r)).product()
    }

    pub fn num_cells(&self) -> usize {
        self.n[0] * self.n[1]
    }

    /// Number of faces normal to axis `r`.
    pub fn num_faces(&self, r: usize) -> usize {
        match r {
            0 => (self.n[0] + 1) * self.n[1],
            _ => self.n[0] * (self.n[1] + 1),
        }
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.n[0] + i
    }

    pub fn cell_coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.n[0], idx / self.n[0])
    }

    /// Physical coordinates of a cell center.
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [(i as f64 + 0.5) * self.h(0), if self.dim == 2 { (j as f64 + 0.5) * self.h(1) } else { 0.0 }]
    }

    /// Face index for the face normal to axis `r` with face coordinates
    /// `(i, j)`; along the normal axis the coordinate ranges `0..=n[r]`.
    pub fn face_index(&self, r: usize, i: usize, j: usize) -> usize {
        match r {
            0 => j * (self.n[0] + 1) + i,
            _ => j * self.n[0] + i,
        }
    }

    /// Face area weight: 1 in 1D, the transverse mesh width in 2D.
    pub fn face_area(&self, r: usize) -> f64 {
        if self.dim == 1 { 1.0 } else { self.h(1 - r) }
    }

    /// Volume weight carried by one interior face in face-located sums,
    /// equal to the cell volume.
    pub fn face_volume(&self, r: usize) -> f64 {
        self.face_area(r) * self.h(r)
    }
}

/// Scalar field with one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid) -> GridFunction {
        GridFunction { grid, values: vec![0.0; grid.num_cells()] }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64; 2]) -> f64) -> GridFunction {
        let mut values = Vec::with_capacity(grid.num_cells());
        for j in 0..grid.n[1] {
            for i in 0..grid.n[0] {
                values.push(f(&grid.cell_center(i, j)));
            }
        }
        GridFunction { grid, values }
    }

    /// Samples a time-dependent closure at every cell center.
    pub fn from_fn_t(grid: Grid, t: f64, mut f: impl FnMut(&[f64; 2], f64) -> f64) -> GridFunction {
        GridFunction::from_fn(grid, |x| f(x, t))
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.cell_index(i, j)]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.values[self.grid.cell_index(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + scale * other`, grids must match.
    pub fn add_scaled(&self, scale: f64, other: &GridFunction) -> GridFunction {
        assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + scale * b)
            .collect();
        GridFunction { grid: self.grid, values }
    }

    /// CSV serialization: `i,value` in 1D, `i,j,value` in 2D, with a header
    /// row, `.` decimals, and LF line endings.
    pub fn write_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        let mut text = String::new();
        if self.grid.dim == 1 {
            text.push_str("i,value\n");
            for (idx, v) in self.values.iter().enumerate() {
                let _ = writeln!(text, "{},{}", idx, fmt_f64(*v));
            }
        } else {
            text.push_str("i,j,value\n");
            for (idx, v) in self.values.iter().enumerate() {
                let (i, j) = self.grid.cell_coords(idx);
                let _ = writeln!(text, "{},{},{}", i, j, fmt_f64(*v));
            }
        }
        out.write_all(text.as_bytes())
    }

    /// Raw binary serialization: a single plain-text header line with the
    /// five fields `nx ny extent_x extent_y time`, then `nx*ny` values as
    /// little-endian 64-bit floats in row-major cell order.
    pub fn write_binary(&self, time: f64, out: &mut dyn Write) -> io::Result<()> {
        let header = format!(
            "{} {} {} {} {}\n",
            self.grid.n[0],
            self.grid.n[1],
            fmt_f64(self.grid.extent[0]),
            fmt_f64(self.grid.extent[1]),
            fmt_f64(time)
        );
        out.write_all(header.as_bytes())?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads the format written by [`write_binary`](Self::write_binary);
    /// returns the field and the recorded time.
    pub fn read_binary(input: &mut dyn Read) -> io::Result<(GridFunction, f64)> {
        let mut reader = io::BufReader::new(input);
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("snapshot header needs 5 fields, found {}", fields.len()),
            ));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
        };
        let nx: usize = fields[0]
            .parse()
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("nx: {e}")))?;
        let ny: usize = fields[1]
            .parse()
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("ny: {e}")))?;
        let ex = parse(fields[2])?;
        let ey = parse(fields[3])?;
        let time = parse(fields[4])?;
        let grid = if ny <= 1 && ey == 0.0 {
            Grid::new_1d(nx, ex)
        } else {
            Grid::new_2d(nx, ny, ex, ey)
        };
        let mut values = vec![0.0; nx * ny.max(1)];
        let mut buf = [0u8; 8];
        for v in values.iter_mut() {
            reader.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        Ok((GridFunction { grid, values }, time))
    }
}

/// Face-located data: `comp[r]` holds one value per face normal to axis `r`.
/// Used both for gradients (vector fields) and for face coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    pub grid: Grid,
    pub comp: [Vec<f64>; 2],
}

impl FaceField {
    pub fn zeros(grid: Grid) -> FaceField {
        let comp1 = if grid.dim == 2 { vec![0.0; grid.num_faces(1)] } else { Vec::new() };
        FaceField { grid, comp: [vec![0.0; grid.num_faces(0)], comp1] }
    }

    pub fn at(&self, r: usize, i: usize, j: usize) -> f64 {
        self.comp[r][self.grid.face_index(r, i, j)]
    }

    pub fn at_mut(&mut self, r: usize, i: usize, j: usize) -> &mut f64 {
        let idx = self.grid.face_index(r, i, j);
        &mut self.comp[r][idx]
    }
}

/// Deterministic float formatting for text outputs: plain decimal notation
/// for moderate magnitudes, scientific notation outside `[1e-4, 1e7)`.
/// Shortest round-trip digits in both branches, so equal bit patterns always
/// produce equal bytes.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let a = v.abs();
    if (1e-4..1e7).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_centers_1d() {
        let g = Grid::new_1d(10, 1.0);
        assert!((g.cell_center(0, 0)[0] - 0.05).abs() < 1e-15);
        assert!((g.cell_center(9, 0)[0] - 0.95).abs() < 1e-15);
        assert!((g.cell_volume() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn face_counts_2d() {
        let g = Grid::new_2d(4, 3, 1.0, 1.0);
        assert_eq!(g.num_faces(0), 5 * 3);
        assert_eq!(g.num_faces(1), 4 * 4);
        assert_eq!(g.num_cells(), 12);
    }

    #[test]
    fn binary_roundtrip_preserves_bits() {
        let g = Grid::new_2d(3, 2, 1.0, 0.5);
        let u = GridFunction::from_fn(g, |x| (x[0] * 7.3).sin() + x[1]);
        let mut buf = Vec::new();
        u.write_binary(0.125, &mut buf).unwrap();
        let (v, t) = GridFunction::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(t, 0.125);
        assert_eq!(u, v);
    }

    #[test]
    fn binary_roundtrip_1d() {
        let g = Grid::new_1d(5, 2.0);
        let u = GridFunction::from_fn(g, |x| x[0] * x[0]);
        let mut buf = Vec::new();
        u.write_binary(0.0, &mut buf).unwrap();
        let (v, _) = GridFunction::read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(v.grid, g);
        assert_eq!(u.values, v.values);
    }

    #[test]
    fn csv_has_header_and_lf() {
        let g = Grid::new_1d(2, 1.0);
        let u = GridFunction::from_fn(g, |x| x[0]);
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "i,value\n0,0.25\n1,0.75\n");
    }

    #[test]
    fn float_formatting_switches_to_scientific() {
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(-3.0), "-3");
        assert_eq!(fmt_f64(1.5e-9), "1.5e-9");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(12345678.0), "1.2345678e7");
    }
}
