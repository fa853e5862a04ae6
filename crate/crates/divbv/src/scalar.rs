//! Scalar BV functions: total variation, singular-kernel convolution
//! bounds, and the classic and time-weighted Gagliardo product forms.
//!
//! The sup over kernel anchors is a dual-lattice descent (coarse to fine)
//! followed by one golden-section pass per axis; off-lattice probes floor
//! the kernel radius at half the smallest cell so the continuum kernel's
//! local integrability is respected at quadrature scale.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::report::{Report, Status};
use std::f64::consts::PI;

/// Cell-centered scalar function with zero extension outside the box.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.cells();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn<F: FnMut(&[f64]) -> f64>(grid: Grid, mut f: F) -> Self {
        let mut out = Self::zeros(grid);
        let mut x = vec![0.0; out.grid.dim()];
        for c in 0..out.grid.cells() {
            out.grid.center_into(c, &mut x);
            out.values[c] = f(&x);
        }
        out
    }

    /// Antialiased ball indicator: covered-volume fraction per cell.
    pub fn ball_indicator(grid: Grid, center: &[f64], radius: f64, subsamples: usize) -> Self {
        let mut out = Self::zeros(grid);
        for c in 0..out.grid.cells() {
            out.values[c] = out.grid.ball_coverage(c, center, radius, subsamples);
        }
        out
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::Format(format!(
                "payload holds {} values, grid wants {}",
                values.len(),
                grid.cells()
            )));
        }
        Ok(Self { grid, values })
    }

    #[must_use]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[must_use]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[must_use]
    pub fn get(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn set(&mut self, cell: usize, v: f64) {
        self.values[cell] = v;
    }

    #[must_use]
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// L^p norm for p >= 1 by midpoint quadrature.
    #[must_use]
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (s * self.grid.cell_volume()).powf(1.0 / p)
    }

    #[must_use]
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    #[must_use]
    pub fn abs(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    #[must_use]
    pub fn has_negative(&self) -> bool {
        self.values.iter().any(|&v| v < 0.0)
    }

    #[must_use]
    pub fn fingerprint(&self) -> String {
        crate::io::fingerprint_scalar(self)
    }
}

/// Discrete total variation: integral of the Euclidean gradient norm
/// (centered inside, one-sided at box faces) plus the boundary sheets of
/// the zero extension. Converges to the perimeter for indicators.
#[must_use]
pub fn total_variation(f: &ScalarField) -> f64 {
    let g = &f.grid;
    let n = g.dim();
    let vol = g.cell_volume();
    let h = g.spacing();
    let mut tv = 0.0;
    for c in 0..g.cells() {
        let mut norm2 = 0.0;
        for axis in 0..n {
            let minus = g.neighbor(c, axis, -1);
            let plus = g.neighbor(c, axis, 1);
            let d = match (minus, plus) {
                (Some(m), Some(p)) => (f.values[p] - f.values[m]) / (2.0 * h[axis]),
                (None, Some(p)) => (f.values[p] - f.values[c]) / h[axis],
                (Some(m), None) => (f.values[c] - f.values[m]) / h[axis],
                (None, None) => 0.0,
            };
            norm2 += d * d;
            // Sheets where nonzero values meet the box boundary.
            for nb in [minus, plus] {
                if nb.is_none() && f.values[c] != 0.0 {
                    tv += f.values[c].abs() * g.face_area(axis);
                }
            }
        }
        tv += norm2.sqrt() * vol;
    }
    tv
}

/// Non-negative directional profile tabulated on sphere quadrature nodes.
/// For n = 2 the nodes are uniform angles (trapezoid rule, spectrally
/// accurate for periodic profiles) and evaluation interpolates linearly in
/// angle; for n = 3 a deterministic Fibonacci lattice with equal weights
/// is used and evaluation takes the nearest node.
#[derive(Clone, Debug)]
pub struct SphereProfile {
    dim: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl SphereProfile {
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(
        dim: usize,
        resolution: usize,
        mut g: F,
    ) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let m = resolution.max(4);
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        match dim {
            2 => {
                for k in 0..m {
                    let th = 2.0 * PI * k as f64 / m as f64;
                    nodes.push(vec![th.cos(), th.sin()]);
                    weights.push(2.0 * PI / m as f64);
                }
            }
            _ => {
                // Fibonacci sphere: evenly distributed deterministic nodes.
                let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
                for k in 0..m {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = 2.0 * PI * k as f64 / golden;
                    nodes.push(vec![r * th.cos(), r * th.sin(), z]);
                    weights.push(4.0 * PI / m as f64);
                }
            }
        }
        let mut values = Vec::with_capacity(m);
        for nd in &nodes {
            let v = g(nd);
            if v < 0.0 {
                return Err(Error::Format("sphere profile must be non-negative".into()));
            }
            values.push(v);
        }
        Ok(Self {
            dim,
            nodes,
            weights,
            values,
        })
    }

    pub fn constant(dim: usize, value: f64, resolution: usize) -> Result<Self> {
        Self::from_fn(dim, resolution, |_| value)
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// integral over the sphere of g^{n-1}, the V-weight of the bound.
    #[must_use]
    pub fn power_integral(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v.powi(self.dim as i32 - 1) * w)
            .sum()
    }

    /// L^{n-1} norm against the unit-mass sphere measure, so the constant
    /// profile g = 1 has norm one and the directional bound degenerates to
    /// the plain inverse-distance bound with an identical ratio.
    #[must_use]
    pub fn norm(&self) -> f64 {
        let area = crate::field::sphere_area(self.dim).expect("dim checked at construction");
        (self.power_integral() / area).powf(1.0 / (self.dim as f64 - 1.0))
    }

    /// Profile value in a given (not necessarily unit) direction.
    #[must_use]
    pub fn eval(&self, dir: &[f64]) -> f64 {
        let r = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r == 0.0 {
            return self.values[0];
        }
        if self.dim == 2 {
            let th = dir[1].atan2(dir[0]).rem_euclid(2.0 * PI);
            let m = self.nodes.len() as f64;
            let s = th / (2.0 * PI) * m;
            let k0 = (s.floor() as usize) % self.nodes.len();
            let k1 = (k0 + 1) % self.nodes.len();
            let frac = s - s.floor();
            self.values[k0] * (1.0 - frac) + self.values[k1] * frac
        } else {
            let mut best = 0usize;
            let mut best_dot = f64::NEG_INFINITY;
            for (k, nd) in self.nodes.iter().enumerate() {
                let dot = nd.iter().zip(dir).map(|(a, b)| a * b).sum::<f64>();
                if dot > best_dot {
                    best_dot = dot;
                    best = k;
                }
            }
            self.values[best]
        }
    }
}

/// Dual-lattice descent for sup_xi of a continuous objective, followed by
/// one golden-section pass per axis. Deterministic given the grid.
fn sup_on_dual_lattice<F: Fn(&[f64]) -> f64>(grid: &Grid, eval: F) -> (f64, Vec<f64>) {
    let n = grid.dim();
    let counts = grid.counts();
    let h = grid.spacing();
    let origin = grid.origin();
    let node = |idx: &[usize]| -> Vec<f64> {
        (0..n).map(|k| origin[k] + idx[k] as f64 * h[k]).collect()
    };

    let mut stride = counts.iter().max().copied().unwrap_or(1) / 8;
    stride = stride.max(1);
    let mut lo = vec![0usize; n];
    let mut hi: Vec<usize> = counts.to_vec();
    let mut best_idx = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        let mut idx = lo.clone();
        loop {
            let v = eval(&node(&idx));
            if v > best {
                best = v;
                best_idx = idx.clone();
            }
            let mut k = n;
            let mut done = true;
            while k > 0 {
                k -= 1;
                idx[k] += stride;
                if idx[k] <= hi[k] {
                    done = false;
                    break;
                }
                idx[k] = lo[k];
            }
            if done {
                break;
            }
        }
        if stride == 1 {
            break;
        }
        for k in 0..n {
            lo[k] = best_idx[k].saturating_sub(stride);
            hi[k] = (best_idx[k] + stride).min(counts[k]);
        }
        stride = (stride / 4).max(1);
    }

    // Local continuous refinement, one golden pass per axis.
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut xi = node(&best_idx);
    for axis in 0..n {
        let mut a = xi[axis] - h[axis];
        let mut b = xi[axis] + h[axis];
        let mut probe = xi.clone();
        for _ in 0..20 {
            let c = b - gr * (b - a);
            let d = a + gr * (b - a);
            probe[axis] = c;
            let fc = eval(&probe);
            probe[axis] = d;
            let fd = eval(&probe);
            if fc > fd {
                b = d;
            } else {
                a = c;
            }
        }
        probe[axis] = 0.5 * (a + b);
        let v = eval(&probe);
        if v > best {
            best = v;
            xi[axis] = probe[axis];
        }
    }
    (best, xi)
}

/// Kernel radius floored at half the smallest spacing: keeps off-lattice
/// probes from diverging while leaving dual-lattice values untouched.
fn floored_distance(x: &[f64], xi: &[f64], min_h: f64) -> f64 {
    let r = x
        .iter()
        .zip(xi)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    r.max(0.5 * min_h)
}

fn convolution_sup(f: &ScalarField, profile: Option<&SphereProfile>) -> (f64, Vec<f64>) {
    let g = &f.grid;
    let n = g.dim();
    let vol = g.cell_volume();
    let min_h = g.spacing().iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let centers: Vec<Vec<f64>> = (0..g.cells()).map(|c| g.center(c)).collect();
    let eval = |xi: &[f64]| -> f64 {
        let mut s = 0.0;
        let mut dir = vec![0.0; n];
        for (c, x) in centers.iter().enumerate() {
            let v = f.values[c];
            if v == 0.0 {
                continue;
            }
            let r = floored_distance(x, xi, min_h);
            let gfac = match profile {
                None => 1.0,
                Some(p) => {
                    for k in 0..n {
                        dir[k] = x[k] - xi[k];
                    }
                    p.eval(&dir)
                }
            };
            s += v * gfac / r * vol;
        }
        s
    };
    sup_on_dual_lattice(g, eval)
}

/// Convolution bound with the inverse-distance kernel: lhs is the sup over
/// anchors of the integral of f(x)/|x - xi|, the rhs scale is TV(f). The
/// benchmark ratio on balls is 1/(n-1).
pub fn conv_ratio(f: &ScalarField) -> Result<Report> {
    conv_with_profile(f, None, "conv")
}

/// Directional-profile variant: kernel g((x-xi)/r)/r, rhs scale
/// TV(f) * ||g||_{L^{n-1}(sphere)}. With g constant 1 this is exactly the
/// plain convolution path.
pub fn conv_kernel_bound(f: &ScalarField, g: &SphereProfile) -> Result<Report> {
    if g.dim() != f.grid.dim() {
        return Err(Error::DimensionMismatch(format!(
            "profile dimension {} on a {}-dimensional field",
            g.dim(),
            f.grid.dim()
        )));
    }
    conv_with_profile(f, Some(g), "conv-kernel")
}

fn conv_with_profile(
    f: &ScalarField,
    profile: Option<&SphereProfile>,
    estimate: &str,
) -> Result<Report> {
    let n = f.grid.dim();
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let substituted = f.has_negative();
    let work = if substituted { f.abs() } else { f.clone() };
    let tv = total_variation(&work);
    let gnorm = profile.map(SphereProfile::norm).unwrap_or(1.0);
    let rhs = tv * gnorm;
    if work.values.iter().all(|&v| v == 0.0) {
        return Ok(Report::new(
            estimate,
            0.0,
            0.0,
            Status::Ok,
            f.fingerprint(),
            f.grid.metadata(),
            "empty-input".into(),
        ));
    }
    let (lhs, xi) = convolution_sup(&work, profile);
    let extra = format!(
        "tv={tv};gnorm={gnorm};xi={}{}",
        xi.iter()
            .map(|v| format!("{v:.6}"))
            .collect::<Vec<_>>()
            .join("|"),
        if substituted { ";signed-input=abs" } else { "" }
    );
    Ok(Report::new(
        estimate,
        lhs,
        rhs,
        Status::Ok,
        f.fingerprint(),
        f.grid.metadata(),
        extra,
    ))
}

/// Check that d fields over R^{d-1} share one cubic layout: equal counts
/// and spacing on every axis, identical origins.
fn common_cubic_layout(fs: &[ScalarField], expect_dim: usize) -> Result<(usize, f64, f64)> {
    let g0 = fs[0].grid();
    if g0.dim() != expect_dim {
        return Err(Error::DimensionMismatch(format!(
            "fields have dimension {}, want {}",
            g0.dim(),
            expect_dim
        )));
    }
    let m = g0.counts()[0];
    let h = g0.spacing()[0];
    let o = g0.origin()[0];
    for f in fs {
        let g = f.grid();
        if g.dim() != expect_dim
            || g.counts().iter().any(|&c| c != m)
            || g.spacing().iter().any(|&s| s != h)
            || g.origin().iter().any(|&x| x != o)
        {
            return Err(Error::GridMismatch(
                "product forms need one shared cubic grid".into(),
            ));
        }
    }
    Ok((m, h, o))
}

/// Product-structure inequality: lhs = L^1 norm over R^d of the product of
/// f_j composed with coordinate deletions, rhs = product of L^{d-1} norms.
/// For d = 2 the two sides agree exactly (iterated-integral identity).
pub fn gagliardo_classic(fs: &[ScalarField]) -> Result<Report> {
    let d = fs.len();
    if d < 2 {
        return Err(Error::DimensionMismatch(
            "need at least two factor fields".into(),
        ));
    }
    let (m, h, _) = common_cubic_layout(fs, d - 1)?;
    let cells: f64 = (m as f64).powi(d as i32);
    if cells > crate::grid::CELL_BUDGET as f64 {
        return Err(Error::GridTooLarge {
            cells: cells as usize,
            budget: crate::grid::CELL_BUDGET,
        });
    }
    // Row-major strides on the local (d-1)-grids.
    let mut stride = vec![1usize; d - 1];
    for k in (0..d.saturating_sub(2)).rev() {
        stride[k] = stride[k + 1] * m;
    }
    let mut idx = vec![0usize; d];
    let mut lhs = 0.0;
    loop {
        let mut prod = 1.0;
        for (j, f) in fs.iter().enumerate() {
            let mut lin = 0usize;
            let mut a = 0usize;
            for k in 0..d {
                if k == j {
                    continue;
                }
                lin += idx[k] * stride[a];
                a += 1;
            }
            prod *= f.values[lin];
            if prod == 0.0 {
                break;
            }
        }
        lhs += prod.abs();
        let mut k = d;
        let mut done = true;
        while k > 0 {
            k -= 1;
            idx[k] += 1;
            if idx[k] < m {
                done = false;
                break;
            }
            idx[k] = 0;
        }
        if done {
            break;
        }
    }
    lhs *= h.powi(d as i32);
    let rhs: f64 = fs.iter().map(|f| f.lp_norm(d as f64 - 1.0)).product();
    let fp: Vec<String> = fs.iter().map(ScalarField::fingerprint).collect();
    Ok(Report::new(
        "gagliardo",
        lhs,
        rhs,
        Status::Ok,
        fp.join("+"),
        fs[0].grid.metadata(),
        format!("d={d}"),
    ))
}

/// Time-weighted product inequality: the factors share the time axis and
/// delete one space coordinate each; the kernel weight
/// (t^2/(t^2+|y|^2)^{1+d/2})^{1/d} is evaluated at cell centers, which the
/// dual-lattice convention keeps away from the kernel's singular point.
pub fn gagliardo_time(fs: &[ScalarField]) -> Result<Report> {
    let d = fs.len();
    if d < 2 {
        return Err(Error::DimensionMismatch(
            "need at least two factor fields".into(),
        ));
    }
    // Each factor lives on (t, y-hat_j): a d-dimensional grid with the
    // time axis first; space axes must share one cubic layout and all
    // factors must share the time layout.
    let g0 = fs[0].grid();
    if g0.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "time factors have dimension {}, want {}",
            g0.dim(),
            d
        )));
    }
    let mt = g0.counts()[0];
    let ht = g0.spacing()[0];
    let ot = g0.origin()[0];
    let m = g0.counts()[1];
    let h = g0.spacing()[1];
    let oy = g0.origin()[1];
    for f in fs {
        let g = f.grid();
        if g.dim() != d
            || g.counts()[0] != mt
            || g.spacing()[0] != ht
            || g.origin()[0] != ot
            || g.counts()[1..].iter().any(|&c| c != m)
            || g.spacing()[1..].iter().any(|&s| s != h)
            || g.origin()[1..].iter().any(|&x| x != oy)
        {
            return Err(Error::GridMismatch(
                "time product form needs one shared layout".into(),
            ));
        }
    }
    let total = mt as f64 * (m as f64).powi(d as i32);
    if total > crate::grid::CELL_BUDGET as f64 {
        return Err(Error::GridTooLarge {
            cells: total as usize,
            budget: crate::grid::CELL_BUDGET,
        });
    }
    // Local strides: axis 0 is time with m^(d-1) block, space axes m each.
    let mut local_stride = vec![1usize; d];
    for k in (0..d - 1).rev() {
        local_stride[k] = local_stride[k + 1] * m;
    }
    let pexp = 1.0 / d as f64;
    let mut idx = vec![0usize; d + 1]; // time + d space coordinates
    let mut lhs = 0.0;
    loop {
        let t = ot + (idx[0] as f64 + 0.5) * ht;
        let mut y2 = 0.0;
        for k in 1..=d {
            let y = oy + (idx[k] as f64 + 0.5) * h;
            y2 += y * y;
        }
        let r2 = t * t + y2;
        if r2 > 0.0 {
            let kern = (t * t / r2.powf(1.0 + d as f64 / 2.0)).powf(pexp);
            if kern > 0.0 {
                let mut prod = 1.0;
                for (j, f) in fs.iter().enumerate() {
                    let mut lin = idx[0] * local_stride[0];
                    let mut a = 1usize;
                    for k in 1..=d {
                        if k == j + 1 {
                            continue;
                        }
                        lin += idx[k] * local_stride[a];
                        a += 1;
                    }
                    prod *= f.values[lin];
                    if prod == 0.0 {
                        break;
                    }
                }
                lhs += kern * prod.abs();
            }
        }
        let mut k = d + 1;
        let mut done = true;
        while k > 0 {
            k -= 1;
            idx[k] += 1;
            let cap = if k == 0 { mt } else { m };
            if idx[k] < cap {
                done = false;
                break;
            }
            idx[k] = 0;
        }
        if done {
            break;
        }
    }
    lhs *= ht * h.powi(d as i32);
    let rhs: f64 = fs.iter().map(|f| f.lp_norm(d as f64)).product();
    let fp: Vec<String> = fs.iter().map(ScalarField::fingerprint).collect();
    Ok(Report::new(
        "gagliardo-time",
        lhs,
        rhs,
        Status::Ok,
        fp.join("+"),
        fs[0].grid.metadata(),
        format!("d={d}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(lo: f64, hi: f64, m: usize) -> Grid {
        Grid::from_box(&[lo, lo], &[hi, hi], &[m, m]).unwrap()
    }

    #[test]
    fn total_variation_scales_exactly_with_the_field() {
        let g = grid2(-1.0, 1.0, 32);
        let f = ScalarField::from_fn(g, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp());
        let tv = total_variation(&f);
        let tv2 = total_variation(&f.scaled(2.0));
        assert!(tv > 0.0);
        assert!((tv2 - 2.0 * tv).abs() <= 1e-12 * tv);
    }

    #[test]
    fn total_variation_of_a_disk_matches_its_perimeter() {
        let g = grid2(-2.0, 2.0, 128);
        let f = ScalarField::ball_indicator(g, &[0.0, 0.0], 1.0, 8);
        let tv = total_variation(&f);
        let perimeter = 2.0 * PI;
        assert!(
            (tv - perimeter).abs() <= 0.03 * perimeter,
            "tv {tv} vs perimeter {perimeter}"
        );
    }

    #[test]
    fn disk_convolution_ratio_approaches_the_planar_benchmark() {
        let g = grid2(-2.0, 2.0, 128);
        let f = ScalarField::ball_indicator(g, &[0.0, 0.0], 1.0, 8);
        let rep = conv_ratio(&f).unwrap();
        assert_eq!(rep.status, Status::Ok);
        assert!(
            (rep.ratio - 1.0).abs() <= 0.04,
            "ratio {} should sit near 1",
            rep.ratio
        );
    }

    #[test]
    fn ball_convolution_ratio_approaches_the_spatial_benchmark() {
        let g = Grid::from_box(&[-2.0; 3], &[2.0; 3], &[48; 3]).unwrap();
        let f = ScalarField::ball_indicator(g, &[0.0, 0.0, 0.0], 1.0, 4);
        let rep = conv_ratio(&f).unwrap();
        assert!(
            (rep.ratio - 0.5).abs() <= 0.08 * 0.5,
            "ratio {} should sit near 1/2",
            rep.ratio
        );
    }

    #[test]
    fn convolution_ratio_is_invariant_under_lattice_translations() {
        let base = conv_ratio(&ScalarField::ball_indicator(
            grid2(-2.0, 2.0, 128),
            &[0.0, 0.0],
            0.75,
            6,
        ))
        .unwrap();
        let moved = conv_ratio(&ScalarField::ball_indicator(
            grid2(-2.0, 2.0, 128),
            &[0.25, -0.5],
            0.75,
            6,
        ))
        .unwrap();
        assert!((base.ratio - moved.ratio).abs() <= 1e-12 * base.ratio.abs());
    }

    #[test]
    fn zero_field_reports_zero_ratio() {
        let rep = conv_ratio(&ScalarField::zeros(grid2(-1.0, 1.0, 16))).unwrap();
        assert_eq!(rep.ratio, 0.0);
        assert_eq!(rep.status, Status::Ok);
    }

    #[test]
    fn constant_profile_reduces_to_the_plain_kernel_path() {
        let g = grid2(-2.0, 2.0, 64);
        let f = ScalarField::ball_indicator(g, &[0.1, -0.2], 0.8, 6);
        let plain = conv_ratio(&f).unwrap();
        let prof = SphereProfile::constant(2, 1.0, 256).unwrap();
        let withg = conv_kernel_bound(&f, &prof).unwrap();
        assert!((plain.lhs - withg.lhs).abs() <= 1e-12 * plain.lhs);
        assert!((plain.ratio - withg.ratio).abs() <= 1e-12 * plain.ratio);
    }

    #[test]
    fn half_sphere_profile_yields_a_finite_positive_ratio() {
        let g = grid2(-2.0, 2.0, 64);
        let f = ScalarField::ball_indicator(g, &[0.0, 0.0], 0.8, 6);
        let prof = SphereProfile::from_fn(2, 256, |nd| if nd[1] > 0.0 { 1.0 } else { 0.0 }).unwrap();
        let rep = conv_kernel_bound(&f, &prof).unwrap();
        assert!(rep.ratio.is_finite() && rep.ratio > 0.0);
    }

    #[test]
    fn sphere_profile_constant_has_unit_norm() {
        for dim in [2usize, 3] {
            let prof = SphereProfile::constant(dim, 1.0, 200).unwrap();
            assert!((prof.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn planar_product_form_is_an_exact_identity() {
        let g = Grid::from_box(&[-1.0], &[1.0], &[40]).unwrap();
        let f1 = ScalarField::from_fn(g.clone(), |x| (1.0 - x[0] * x[0]).max(0.0));
        let f2 = ScalarField::from_fn(g, |x| (-(x[0] - 0.2).powi(2) * 3.0).exp());
        let rep = gagliardo_classic(&[f1, f2]).unwrap();
        assert!((rep.ratio - 1.0).abs() <= 1e-12, "ratio {}", rep.ratio);
    }

    #[test]
    fn aligned_interval_products_reach_equality_in_three_factors() {
        // Each factor is a product of interval indicators in its two
        // coordinates, so both sides evaluate to the box volume product.
        let g = grid2(-1.0, 1.0, 32);
        let chi = |x: f64, lo: f64, hi: f64| -> f64 {
            if x >= lo && x < hi {
                1.0
            } else {
                0.0
            }
        };
        // Global intervals per axis, aligned with the 1/16-spaced lattice.
        let iv = [(-0.5, 0.5), (-0.75, 0.25), (0.0, 0.625)];
        let f1 = ScalarField::from_fn(g.clone(), |x| {
            chi(x[0], iv[1].0, iv[1].1) * chi(x[1], iv[2].0, iv[2].1)
        });
        let f2 = ScalarField::from_fn(g.clone(), |x| {
            chi(x[0], iv[0].0, iv[0].1) * chi(x[1], iv[2].0, iv[2].1)
        });
        let f3 = ScalarField::from_fn(g, |x| {
            chi(x[0], iv[0].0, iv[0].1) * chi(x[1], iv[1].0, iv[1].1)
        });
        let rep = gagliardo_classic(&[f1, f2, f3]).unwrap();
        assert!((rep.ratio - 1.0).abs() <= 1e-12, "ratio {}", rep.ratio);
    }

    #[test]
    fn time_weighted_form_is_exactly_dilation_invariant() {
        let build = |lam: f64| -> Vec<ScalarField> {
            let g = Grid::from_box(&[-1.5 * lam, -1.5 * lam], &[1.5 * lam, 1.5 * lam], &[40, 40])
                .unwrap();
            let fa = ScalarField::from_fn(g.clone(), |z| {
                (-(z[0] * z[0] + 0.5 * z[1] * z[1]) / (lam * lam)).exp() / lam
            });
            let fb = ScalarField::from_fn(g, |z| {
                (-((z[0] - 0.3 * lam).powi(2) + z[1] * z[1]) / (lam * lam)).exp() / lam
            });
            vec![fa, fb]
        };
        let base = gagliardo_time(&build(1.0)).unwrap();
        let dilated = gagliardo_time(&build(2.0)).unwrap();
        assert!(base.ratio > 0.0);
        assert!(
            (base.ratio - dilated.ratio).abs() <= 1e-12 * base.ratio,
            "{} vs {}",
            base.ratio,
            dilated.ratio
        );
    }

    #[test]
    fn time_weighted_form_vanishes_on_zero_input() {
        let g = grid2(-1.0, 1.0, 16);
        let z = ScalarField::zeros(g);
        let rep = gagliardo_time(&[z.clone(), z]).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.ratio, 0.0);
    }

    #[test]
    fn mismatched_layouts_are_rejected() {
        let f1 = ScalarField::zeros(Grid::from_box(&[-1.0], &[1.0], &[16]).unwrap());
        let f2 = ScalarField::zeros(Grid::from_box(&[-1.0], &[1.0], &[24]).unwrap());
        assert!(gagliardo_classic(&[f1, f2]).is_err());
    }
}
