//! Uniform cell-centered grids with row-major linear indexing.
//!
//! Cell centers sit at origin + (i + 1/2) * spacing per axis; the dual
//! lattice (cell corners, origin + i * spacing) is where kernel singular
//! points are allowed to live, so cell-centered quadrature never evaluates
//! a kernel on its singularity.

use crate::error::{Error, Result};

/// Hard cap on total cell count; desk-scale studies stay far below it.
pub const CELL_BUDGET: usize = 1 << 27;

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    counts: Vec<usize>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        let n = origin.len();
        if n == 0 || spacing.len() != n || counts.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "grid axes: origin {}, spacing {}, counts {}",
                origin.len(),
                spacing.len(),
                counts.len()
            )));
        }
        if spacing.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::Format("grid spacing must be positive and finite".into()));
        }
        if counts.contains(&0) {
            return Err(Error::Format("grid counts must be positive".into()));
        }
        let mut cells = 1usize;
        for &c in &counts {
            cells = cells
                .checked_mul(c)
                .ok_or(Error::GridTooLarge { cells: usize::MAX, budget: CELL_BUDGET })?;
        }
        if cells > CELL_BUDGET {
            return Err(Error::GridTooLarge { cells, budget: CELL_BUDGET });
        }
        // Row-major: the last axis varies fastest.
        let mut strides = vec![1usize; n];
        for k in (0..n - 1).rev() {
            strides[k] = strides[k + 1] * counts[k + 1];
        }
        Ok(Self {
            origin,
            spacing,
            counts,
            strides,
        })
    }

    /// Grid covering the box [lo, hi] with the given cell counts per axis.
    pub fn from_box(lo: &[f64], hi: &[f64], counts: &[usize]) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != counts.len() {
            return Err(Error::DimensionMismatch(format!(
                "box corners of lengths {} and {} with {} counts",
                lo.len(),
                hi.len(),
                counts.len()
            )));
        }
        let spacing = lo
            .iter()
            .zip(hi)
            .zip(counts)
            .map(|((&a, &b), &c)| (b - a) / c as f64)
            .collect();
        Self::new(lo.to_vec(), spacing, counts.to_vec())
    }

    #[inline]
    #[must_use]
    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    #[must_use]
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    #[must_use]
    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    #[must_use]
    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    #[inline]
    #[must_use]
    pub fn cells(&self) -> usize {
        self.counts.iter().product()
    }

    #[must_use]
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Area of a face orthogonal to the given axis.
    #[must_use]
    pub fn face_area(&self, axis: usize) -> f64 {
        self.cell_volume() / self.spacing[axis]
    }

    #[inline]
    #[must_use]
    pub fn linear(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.strides)
            .map(|(&i, &s)| i * s)
            .sum()
    }

    #[inline]
    pub fn multi_into(&self, mut lin: usize, out: &mut [usize]) {
        for (k, &s) in self.strides.iter().enumerate() {
            out[k] = lin / s;
            lin %= s;
        }
    }

    #[must_use]
    pub fn multi(&self, lin: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        self.multi_into(lin, &mut out);
        out
    }

    #[inline]
    pub fn center_into(&self, lin: usize, out: &mut [f64]) {
        let mut rem = lin;
        for (k, &s) in self.strides.iter().enumerate() {
            let i = rem / s;
            rem %= s;
            out[k] = self.origin[k] + (i as f64 + 0.5) * self.spacing[k];
        }
    }

    #[must_use]
    pub fn center(&self, lin: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.center_into(lin, &mut out);
        out
    }

    /// Linear index of the neighbor along an axis, if it stays in the grid.
    #[inline]
    #[must_use]
    pub fn neighbor(&self, lin: usize, axis: usize, step: isize) -> Option<usize> {
        let i = (lin / self.strides[axis]) % self.counts[axis];
        let j = i as isize + step;
        if j < 0 || j as usize >= self.counts[axis] {
            None
        } else {
            Some((lin as isize + step * self.strides[axis] as isize) as usize)
        }
    }

    /// Nearest dual-lattice point (cell corner); the lattice extends beyond
    /// the box so exterior singular points snap consistently too.
    #[must_use]
    pub fn snap_to_dual(&self, p: &[f64]) -> Vec<f64> {
        debug_assert_eq!(p.len(), self.dim());
        p.iter()
            .zip(&self.origin)
            .zip(&self.spacing)
            .map(|((&x, &o), &h)| o + ((x - o) / h).round() * h)
            .collect()
    }

    /// Distance from a point to the nearest cell center.
    #[must_use]
    pub fn distance_to_nearest_center(&self, p: &[f64]) -> f64 {
        let mut d2 = 0.0;
        for k in 0..self.dim() {
            let t = (p[k] - self.origin[k]) / self.spacing[k] - 0.5;
            let i = t.round().clamp(0.0, (self.counts[k] - 1) as f64);
            let c = self.origin[k] + (i + 0.5) * self.spacing[k];
            d2 += (p[k] - c) * (p[k] - c);
        }
        d2.sqrt()
    }

    /// Exact layout equality; fields on byte-identical grids interoperate.
    #[must_use]
    pub fn same_layout(&self, other: &Grid) -> bool {
        self == other
    }

    /// Whether a point lies inside the covered box (half-open on top).
    #[must_use]
    pub fn contains(&self, p: &[f64]) -> bool {
        (0..self.dim()).all(|k| {
            let lo = self.origin[k];
            let hi = self.origin[k] + self.counts[k] as f64 * self.spacing[k];
            p[k] >= lo && p[k] < hi
        })
    }

    /// Fraction of a cell covered by a ball, estimated by supersampling the
    /// cell with a sub^dim tensor midpoint lattice. Used to build
    /// antialiased indicator data whose integrals converge at second order.
    #[must_use]
    pub fn ball_coverage(&self, cell: usize, center: &[f64], radius: f64, sub: usize) -> f64 {
        let n = self.dim();
        let sub = sub.max(1);
        let mut lo = vec![0.0; n];
        self.center_into(cell, &mut lo);
        for k in 0..n {
            lo[k] -= 0.5 * self.spacing[k];
        }
        // Quick accept/reject by cell circumradius around the cell center.
        let mut mid = vec![0.0; n];
        self.center_into(cell, &mut mid);
        let half_diag = 0.5
            * self
                .spacing
                .iter()
                .map(|h| h * h)
                .sum::<f64>()
                .sqrt();
        let dc = mid
            .iter()
            .zip(center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if dc + half_diag <= radius {
            return 1.0;
        }
        if dc - half_diag >= radius {
            return 0.0;
        }
        let r2 = radius * radius;
        let total = (sub as f64).powi(n as i32);
        let mut idx = vec![0usize; n];
        let mut inside = 0usize;
        loop {
            let mut d2 = 0.0;
            for k in 0..n {
                let x = lo[k] + (idx[k] as f64 + 0.5) * self.spacing[k] / sub as f64;
                d2 += (x - center[k]) * (x - center[k]);
            }
            if d2 < r2 {
                inside += 1;
            }
            // Odometer increment over the subsample lattice.
            let mut k = n;
            loop {
                if k == 0 {
                    return inside as f64 / total;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < sub {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    /// Compact metadata string for report rows.
    #[must_use]
    pub fn metadata(&self) -> String {
        let counts = self
            .counts
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join("x");
        let spacing = self
            .spacing
            .iter()
            .map(|h| format!("{h}"))
            .collect::<Vec<_>>()
            .join("/");
        let origin = self
            .origin
            .iter()
            .map(|o| format!("{o}"))
            .collect::<Vec<_>>()
            .join("/");
        format!(
            "n={};counts={};spacing={};origin={}",
            self.dim(),
            counts,
            spacing,
            origin
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trip() {
        let g = Grid::from_box(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0], &[4, 5, 6]).unwrap();
        assert_eq!(g.cells(), 120);
        for lin in 0..g.cells() {
            assert_eq!(g.linear(&g.multi(lin)), lin);
        }
        // Last axis fastest.
        assert_eq!(g.multi(1), vec![0, 0, 1]);
    }

    #[test]
    fn centers_and_volume() {
        let g = Grid::from_box(&[-1.0], &[1.0], &[4]).unwrap();
        assert_eq!(g.spacing(), &[0.5]);
        assert_eq!(g.center(0), vec![-0.75]);
        assert_eq!(g.center(3), vec![0.75]);
        assert!((g.cell_volume() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn neighbors_respect_bounds() {
        let g = Grid::from_box(&[0.0, 0.0], &[1.0, 1.0], &[3, 3]).unwrap();
        let c = g.linear(&[1, 1]);
        assert_eq!(g.neighbor(c, 0, 1), Some(g.linear(&[2, 1])));
        assert_eq!(g.neighbor(c, 1, -1), Some(g.linear(&[1, 0])));
        let edge = g.linear(&[0, 2]);
        assert_eq!(g.neighbor(edge, 0, -1), None);
        assert_eq!(g.neighbor(edge, 1, 1), None);
    }

    #[test]
    fn dual_snap_lands_on_corners() {
        let g = Grid::from_box(&[0.0, 0.0], &[1.0, 1.0], &[4, 4]).unwrap();
        let s = g.snap_to_dual(&[0.49, 0.26]);
        assert!((s[0] - 0.5).abs() < 1e-15);
        assert!((s[1] - 0.25).abs() < 1e-15);
        // Corners are never cell centers on a uniform grid.
        assert!(g.distance_to_nearest_center(&s) > 0.1);
    }

    #[test]
    fn ball_coverage_sums_to_area() {
        let g = Grid::from_box(&[-1.0, -1.0], &[1.0, 1.0], &[64, 64]).unwrap();
        let area: f64 = (0..g.cells())
            .map(|c| g.ball_coverage(c, &[0.0, 0.0], 0.7, 8) * g.cell_volume())
            .sum();
        let exact = std::f64::consts::PI * 0.49;
        assert!((area - exact).abs() < 2e-3 * exact, "area {area} vs {exact}");
    }

    #[test]
    fn budget_enforced() {
        assert!(matches!(
            Grid::from_box(&[0.0, 0.0], &[1.0, 1.0], &[1 << 14, 1 << 14]),
            Err(Error::GridTooLarge { .. })
        ));
    }
}
