//! Tensor fields on boxes, the discrete Divergence measure, and the
//! determinant-root functionals controlled by it.
//!
//! A field is one symmetric matrix per cell, extended by zero outside the
//! box. Its Divergence is a vector-valued measure with three parts: an
//! absolutely continuous interior part from centered differences, boundary
//! sheets created by the zero extension, and one flux atom per designated
//! kernel singularity. The atom replaces the spurious O(1) mass that
//! difference stencils would manufacture from non-differentiable data near
//! the singular point; for a field that is divergence-free around that
//! point the atom is (numerically) zero and the sheets carry everything.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::mixeddet::mixed_det;
use crate::report::{Report, Status};
use crate::symmat::{packed_index, packed_len, SymMat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Relative threshold below which a negative determinant is treated as
/// rounding noise instead of a clamping event worth counting.
pub const DET_NOISE_REL: f64 = 1e-12;

/// C1 cubic step: 1 for t <= 0, 0 for t >= 1, monotone in between.
#[inline]
#[must_use]
pub fn smoothstep_down(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - t * t * (3.0 - 2.0 * t)
    }
}

/// Surface area of the unit sphere in R^n (n = 2 gives 2 pi).
pub fn sphere_area(n: usize) -> Result<f64> {
    use std::f64::consts::PI;
    Ok(match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        5 => 8.0 * PI * PI / 3.0,
        6 => PI * PI * PI,
        _ => return Err(Error::UnsupportedDimension(n)),
    })
}

/// Volume of the unit ball in R^n.
pub fn ball_volume(n: usize) -> Result<f64> {
    Ok(sphere_area(n)? / n as f64)
}

/// Ratio |B|^? achieved by indicator-times-identity fields on balls:
/// vol(B_1) / area(S_1)^{n/(n-1)}. The scale-invariant benchmark value the
/// ball family converges to (1/(4 pi) for n = 2, 1/(6 sqrt(pi)) for n = 3).
pub fn ball_sharp_ratio(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let s = sphere_area(n)?;
    Ok(ball_volume(n)? / s.powf(n as f64 / (n as f64 - 1.0)))
}

/// A designated kernel singularity with its exclusion radius. Cells whose
/// centers fall inside the ball are dropped from the interior stencil and
/// replaced by one net-flux atom over the surrounding cell faces.
#[derive(Clone, Debug)]
pub struct SingularPoint {
    pub xi: Vec<f64>,
    pub radius: f64,
}

/// Cell-centered field of symmetric matrices with zero extension.
///
/// The matrix dimension usually equals the grid dimension; trailing-block
/// fields (Schur complements) carry matrices one size smaller, and then
/// only the pointwise functionals apply.
#[derive(Clone, Debug)]
pub struct TensorField {
    grid: Grid,
    mdim: usize,
    data: Vec<f64>,
    psd_certified: bool,
    singular: Vec<SingularPoint>,
    time_axis: bool,
}

impl TensorField {
    pub fn zeros(grid: Grid, mdim: usize) -> Result<Self> {
        // Reuse the SymMat dimension guard.
        SymMat::zeros(mdim)?;
        let len = grid.cells() * packed_len(mdim);
        Ok(Self {
            grid,
            mdim,
            data: vec![0.0; len],
            psd_certified: true,
            singular: Vec::new(),
            time_axis: false,
        })
    }

    /// Build by evaluating a matrix-valued function at cell centers.
    pub fn from_fn<F: FnMut(&[f64]) -> SymMat>(grid: Grid, mdim: usize, mut f: F) -> Result<Self> {
        let mut out = Self::zeros(grid, mdim)?;
        let mut x = vec![0.0; out.grid.dim()];
        let plen = packed_len(mdim);
        for c in 0..out.grid.cells() {
            out.grid.center_into(c, &mut x);
            let m = f(&x);
            assert_eq!(m.dim(), mdim, "cell function changed matrix dimension");
            out.data[c * plen..(c + 1) * plen].copy_from_slice(m.packed());
        }
        out.psd_certified = false;
        Ok(out)
    }

    pub(crate) fn from_parts(
        grid: Grid,
        mdim: usize,
        data: Vec<f64>,
        time_axis: bool,
    ) -> Result<Self> {
        SymMat::zeros(mdim)?;
        if data.len() != grid.cells() * packed_len(mdim) {
            return Err(Error::Format(format!(
                "payload holds {} floats, grid wants {}",
                data.len(),
                grid.cells() * packed_len(mdim)
            )));
        }
        Ok(Self {
            grid,
            mdim,
            data,
            psd_certified: false,
            singular: Vec::new(),
            time_axis,
        })
    }

    #[must_use]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[must_use]
    pub fn matrix_dim(&self) -> usize {
        self.mdim
    }

    #[must_use]
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    #[must_use]
    pub fn time_axis(&self) -> bool {
        self.time_axis
    }

    pub fn set_time_axis(&mut self, flag: bool) {
        self.time_axis = flag;
    }

    #[must_use]
    pub fn get(&self, cell: usize) -> SymMat {
        let plen = packed_len(self.mdim);
        SymMat::from_packed(self.mdim, &self.data[cell * plen..(cell + 1) * plen])
            .expect("stored cell is well-formed")
    }

    pub fn set(&mut self, cell: usize, m: &SymMat) {
        assert_eq!(m.dim(), self.mdim, "matrix dimension mismatch");
        let plen = packed_len(self.mdim);
        self.data[cell * plen..(cell + 1) * plen].copy_from_slice(m.packed());
        self.psd_certified = false;
    }

    /// Entry (i, j) of the matrix stored at a cell, without unpacking.
    #[inline]
    #[must_use]
    pub fn entry(&self, cell: usize, i: usize, j: usize) -> f64 {
        self.data[cell * packed_len(self.mdim) + packed_index(self.mdim, i, j)]
    }

    /// Check every cell for positive semi-definiteness and set the flag.
    pub fn certify_psd(&mut self, tol: f64) -> Result<()> {
        for c in 0..self.grid.cells() {
            let m = self.get(c);
            if !m.is_psd(tol) {
                return Err(Error::NotPsdField(format!(
                    "cell {} has min eigenvalue {:.3e}",
                    c,
                    m.eigenvalues()[0]
                )));
            }
        }
        self.psd_certified = true;
        Ok(())
    }

    #[must_use]
    pub fn is_certified_psd(&self) -> bool {
        self.psd_certified
    }

    /// Mark the field as PSD without the cellwise scan. Only constructors
    /// that guarantee semi-definiteness structurally may use this.
    pub(crate) fn mark_psd_by_construction(&mut self) {
        self.psd_certified = true;
    }

    pub fn add_singular_point(&mut self, p: SingularPoint) {
        self.singular.push(p);
    }

    #[must_use]
    pub fn singular_points(&self) -> &[SingularPoint] {
        &self.singular
    }

    /// Content hash of the serialized field; identifies the input of a
    /// report row. Singular-point bookkeeping is runtime-only and not part
    /// of the on-disk format, so it does not enter the hash.
    #[must_use]
    pub fn fingerprint(&self) -> String {
        crate::io::fingerprint_field(self)
    }
}

/// Antialiased indicator of a ball times the identity matrix. Cell values
/// are covered-volume fractions, so integrals of the field converge at
/// second order even though the underlying indicator is discontinuous.
pub fn ball_indicator_tensor(
    grid: &Grid,
    center: &[f64],
    radius: f64,
    subsamples: usize,
) -> Result<TensorField> {
    let n = grid.dim();
    if center.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "ball center has {} coordinates on a {}-dimensional grid",
            center.len(),
            n
        )));
    }
    let mut out = TensorField::zeros(grid.clone(), n)?;
    let plen = packed_len(n);
    for c in 0..grid.cells() {
        let w = grid.ball_coverage(c, center, radius, subsamples);
        if w > 0.0 {
            for i in 0..n {
                out.data[c * plen + packed_index(n, i, i)] = w;
            }
        }
    }
    out.mark_psd_by_construction();
    Ok(out)
}

/// Radially smoothed indicator times identity: value 1 inside radius
/// `r - width`, 0 outside `r`, cubic step in between.
pub fn radial_profile_tensor(grid: &Grid, center: &[f64], r: f64, width: f64) -> Result<TensorField> {
    let n = grid.dim();
    if center.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "profile center has {} coordinates on a {}-dimensional grid",
            center.len(),
            n
        )));
    }
    if !(width > 0.0) || !(r > width) {
        return Err(Error::Format(format!(
            "profile needs 0 < width < radius, got radius {r} width {width}"
        )));
    }
    let mut out = TensorField::zeros(grid.clone(), n)?;
    let plen = packed_len(n);
    let mut x = vec![0.0; n];
    for c in 0..grid.cells() {
        grid.center_into(c, &mut x);
        let d = x
            .iter()
            .zip(center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let w = smoothstep_down((d - (r - width)) / width);
        if w > 0.0 {
            for i in 0..n {
                out.data[c * plen + packed_index(n, i, i)] = w;
            }
        }
    }
    out.mark_psd_by_construction();
    Ok(out)
}

/// The vector-valued Divergence measure of a tensor field.
#[derive(Clone, Debug)]
pub struct DivMeasure {
    dim: usize,
    /// Per-cell divergence vector times cell volume; zero on singular cells.
    interior: Vec<f64>,
    /// Flux vectors through box-boundary faces (value times face area).
    sheets: Vec<Vec<f64>>,
    /// Net flux out of each singular-point cluster.
    atoms: Vec<Vec<f64>>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl DivMeasure {
    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[must_use]
    pub fn interior_at(&self, cell: usize) -> &[f64] {
        &self.interior[cell * self.dim..(cell + 1) * self.dim]
    }

    #[must_use]
    pub fn interior_mass(&self) -> f64 {
        self.interior
            .chunks_exact(self.dim)
            .map(norm)
            .sum()
    }

    #[must_use]
    pub fn sheet_mass(&self) -> f64 {
        self.sheets.iter().map(|f| norm(f)).sum()
    }

    #[must_use]
    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|f| norm(f)).sum()
    }

    /// Total variation of the measure: Euclidean norms, all parts.
    #[must_use]
    pub fn total_mass(&self) -> f64 {
        self.interior_mass() + self.sheet_mass() + self.atom_mass()
    }

    /// Mass of the scalar measure carried by row i alone.
    #[must_use]
    pub fn row_mass(&self, i: usize) -> f64 {
        let mut m = 0.0;
        for chunk in self.interior.chunks_exact(self.dim) {
            m += chunk[i].abs();
        }
        for f in &self.sheets {
            m += f[i].abs();
        }
        for q in &self.atoms {
            m += q[i].abs();
        }
        m
    }

    #[must_use]
    pub fn row_masses(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.row_mass(i)).collect()
    }

    /// Mass of the contraction e . Div A, the divergence of the vector
    /// field A e. Uses the stored vector measure; no re-differencing.
    #[must_use]
    pub fn directional_mass(&self, e: &[f64]) -> f64 {
        debug_assert_eq!(e.len(), self.dim);
        let dot = |v: &[f64]| v.iter().zip(e).map(|(a, b)| a * b).sum::<f64>().abs();
        let mut m = 0.0;
        for chunk in self.interior.chunks_exact(self.dim) {
            m += dot(chunk);
        }
        for f in &self.sheets {
            m += dot(f);
        }
        for q in &self.atoms {
            m += dot(q);
        }
        m
    }

    #[must_use]
    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }
}

/// Discrete Divergence: centered differences inside, one-sided stencils at
/// box faces, explicit boundary sheets from the zero extension, and one
/// net-flux atom per singular-point cluster.
pub fn divergence(a: &TensorField) -> Result<DivMeasure> {
    let grid = &a.grid;
    let n = grid.dim();
    if a.mdim != n {
        return Err(Error::DimensionMismatch(format!(
            "divergence needs matrix dimension {} to match the grid, got {}",
            n, a.mdim
        )));
    }
    let cells = grid.cells();
    let vol = grid.cell_volume();
    let h = grid.spacing().to_vec();

    // Mark singular clusters: cluster id per cell, 0 meaning none.
    let mut cluster = vec![0u32; cells];
    let mut cluster_cells: Vec<Vec<usize>> = vec![Vec::new(); a.singular.len()];
    if !a.singular.is_empty() {
        let mut x = vec![0.0; n];
        for c in 0..cells {
            grid.center_into(c, &mut x);
            for (si, s) in a.singular.iter().enumerate() {
                let d = x
                    .iter()
                    .zip(&s.xi)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt();
                if d < s.radius {
                    if cluster[c] != 0 {
                        return Err(Error::Format(
                            "singular neighborhoods overlap; shrink exclusion radii".into(),
                        ));
                    }
                    cluster[c] = (si + 1) as u32;
                    cluster_cells[si].push(c);
                }
            }
        }
        for (si, s) in a.singular.iter().enumerate() {
            if cluster_cells[si].is_empty() && grid.contains(&s.xi) {
                return Err(Error::Format(format!(
                    "singular neighborhood of radius {} resolves no cells; refine the grid or enlarge it",
                    s.radius
                )));
            }
        }
    }

    let mut interior = vec![0.0; cells * n];
    let mut sheets: Vec<Vec<f64>> = Vec::new();

    for c in 0..cells {
        let excluded = cluster[c] != 0;
        for axis in 0..n {
            let minus = grid.neighbor(c, axis, -1);
            let plus = grid.neighbor(c, axis, 1);
            if !excluded {
                for row in 0..n {
                    let deriv = match (minus, plus) {
                        (Some(m), Some(p)) => {
                            (a.entry(p, row, axis) - a.entry(m, row, axis)) / (2.0 * h[axis])
                        }
                        (None, Some(p)) => {
                            (a.entry(p, row, axis) - a.entry(c, row, axis)) / h[axis]
                        }
                        (Some(m), None) => {
                            (a.entry(c, row, axis) - a.entry(m, row, axis)) / h[axis]
                        }
                        (None, None) => 0.0,
                    };
                    interior[c * n + row] += deriv * vol;
                }
            }
            // Zero extension: the jump to the outside is a flux sheet.
            let area = grid.face_area(axis);
            for (nb, sign) in [(minus, -1.0), (plus, 1.0)] {
                if nb.is_none() {
                    let mut flux = vec![0.0; n];
                    let mut nonzero = false;
                    for (row, f) in flux.iter_mut().enumerate() {
                        *f = sign * a.entry(c, row, axis) * area;
                        nonzero |= *f != 0.0;
                    }
                    if nonzero {
                        sheets.push(flux);
                    }
                }
            }
        }
    }

    // One atom per cluster: net flux through the faces separating the
    // cluster from retained cells, face values averaged across the face.
    let mut atoms = Vec::new();
    for (si, members) in cluster_cells.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let mut q = vec![0.0; n];
        for &cin in members {
            for axis in 0..n {
                let area = grid.face_area(axis);
                for (step, sign) in [(-1isize, -1.0), (1isize, 1.0)] {
                    match grid.neighbor(cin, axis, step) {
                        Some(cout) if cluster[cout] as usize != si + 1 => {
                            for (row, qr) in q.iter_mut().enumerate() {
                                *qr += sign
                                    * 0.5
                                    * (a.entry(cin, row, axis) + a.entry(cout, row, axis))
                                    * area;
                            }
                        }
                        // Box faces of cluster cells are already sheets.
                        _ => {}
                    }
                }
            }
        }
        atoms.push(q);
    }

    Ok(DivMeasure {
        dim: n,
        interior,
        sheets,
        atoms,
    })
}

/// Negative-determinant clamp: values below the rounding-noise threshold
/// count as clamping events, tiny negatives are silently zeroed.
fn clamp_det(det: f64, scale: f64, clamped: &mut usize) -> f64 {
    if det >= 0.0 {
        det
    } else {
        if det < -DET_NOISE_REL * (1.0 + scale) {
            *clamped += 1;
        }
        0.0
    }
}

/// Integral of (det A)^{1/(n-1)} by midpoint quadrature, with a count of
/// cells whose determinant was clamped beyond rounding noise.
pub fn integral_det_root(a: &TensorField) -> Result<(f64, usize)> {
    let n = a.mdim;
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    if !a.psd_certified {
        return Err(Error::NotPsdField(
            "certify_psd before integrating determinant roots".into(),
        ));
    }
    let p = 1.0 / (n as f64 - 1.0);
    let vol = a.grid.cell_volume();
    let mut sum = 0.0;
    let mut clamped = 0usize;
    for c in 0..a.grid.cells() {
        let m = a.get(c);
        let f = m.frobenius();
        let det = clamp_det(m.det(), f.powi(n as i32), &mut clamped);
        if det > 0.0 {
            sum += det.powf(p) * vol;
        }
    }
    Ok((sum, clamped))
}

fn status_from_clamps(clamped: usize) -> Status {
    if clamped > 0 {
        Status::ClampedCells(clamped)
    } else {
        Status::Ok
    }
}

/// Fundamental determinant-mass inequality: lhs = integral of
/// (det A)^{1/(n-1)}, rhs scale = ||Div A||^{n/(n-1)}. The dimensional
/// constant is never asserted; the ratio is the measurement.
pub fn verify_fund(a: &TensorField) -> Result<Report> {
    let n = a.mdim;
    let (lhs, clamped) = integral_det_root(a)?;
    let div = divergence(a)?;
    let mass = div.total_mass();
    if mass == 0.0 {
        if lhs > 0.0 {
            return Err(Error::ZeroDivMass { lhs });
        }
        return Ok(Report::new(
            "fund",
            0.0,
            0.0,
            Status::Ok,
            a.fingerprint(),
            a.grid.metadata(),
            "mass=0".into(),
        ));
    }
    let rhs = mass.powf(n as f64 / (n as f64 - 1.0));
    let extra = format!(
        "div_mass={mass};interior={};sheets={};atoms={}",
        div.interior_mass(),
        div.sheet_mass(),
        div.atom_mass()
    );
    Ok(Report::new(
        "fund",
        lhs,
        rhs,
        status_from_clamps(clamped),
        a.fingerprint(),
        a.grid.metadata(),
        extra,
    ))
}

/// Per-row product refinement: rhs scale = (prod_i ||(Div A)_i||)^{1/(n-1)}.
/// The optimal row scaling mu_i = 1 / ||(Div A)_i|| is recorded in the
/// extras; with equal row masses the rhs matches the fundamental form up to
/// the factor n^{n/(n-1)}, and that consistency gap is recorded too.
pub fn verify_prod(a: &TensorField) -> Result<Report> {
    let n = a.mdim;
    let (lhs, clamped) = integral_det_root(a)?;
    let div = divergence(a)?;
    let rows = div.row_masses();
    for (i, &m) in rows.iter().enumerate() {
        if m == 0.0 {
            return Err(Error::ZeroRowMass(i));
        }
    }
    let nf = n as f64;
    let rhs = rows.iter().product::<f64>().powf(1.0 / (nf - 1.0));
    let mu: Vec<String> = rows.iter().map(|m| format!("{:.6e}", 1.0 / m)).collect();
    let euclid = div.total_mass();
    let consistency = nf.powf(nf / (nf - 1.0)) * rhs - euclid.powf(nf / (nf - 1.0));
    let extra = format!(
        "rows={};mu={};fund_consistency_gap={consistency:.6e}",
        rows.iter()
            .map(|m| format!("{m:.6e}"))
            .collect::<Vec<_>>()
            .join("|"),
        mu.join("|"),
    );
    Ok(Report::new(
        "prod",
        lhs,
        rhs,
        status_from_clamps(clamped),
        a.fingerprint(),
        a.grid.metadata(),
        extra,
    ))
}

/// Multi-field bound: lhs = integral of D_n(A_1,...,A_n)^{1/(n-1)},
/// rhs scale = (prod_j ||Div A_j||)^{1/(n-1)}.
pub fn verify_mulest(fields: &[TensorField]) -> Result<Report> {
    let n = match fields.first() {
        Some(f) => f.mdim,
        None => return Err(Error::DimensionMismatch("no fields given".into())),
    };
    if fields.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} fields of dimension {n}; the bound takes exactly n",
            fields.len()
        )));
    }
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    for f in fields {
        if !f.grid.same_layout(&fields[0].grid) {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        if f.mdim != n {
            return Err(Error::DimensionMismatch(
                "fields mix matrix dimensions".into(),
            ));
        }
        if !f.psd_certified {
            return Err(Error::NotPsdField("all fields must be certified".into()));
        }
    }
    let grid = &fields[0].grid;
    let vol = grid.cell_volume();
    let p = 1.0 / (n as f64 - 1.0);
    let mut lhs = 0.0;
    let mut clamped = 0usize;
    let mut tuple = Vec::with_capacity(n);
    for c in 0..grid.cells() {
        tuple.clear();
        let mut scale = 1.0;
        for f in fields {
            let m = f.get(c);
            scale *= m.frobenius().max(1e-300);
            tuple.push(m);
        }
        let d = clamp_det(mixed_det(&tuple)?, scale, &mut clamped);
        if d > 0.0 {
            lhs += d.powf(p) * vol;
        }
    }
    let mut rhs = 1.0;
    let mut masses = Vec::with_capacity(n);
    for f in fields {
        let m = divergence(f)?.total_mass();
        masses.push(m);
        rhs *= m;
    }
    let rhs = rhs.powf(p);
    let fp: Vec<String> = fields.iter().map(TensorField::fingerprint).collect();
    let extra = format!(
        "masses={}",
        masses
            .iter()
            .map(|m| format!("{m:.6e}"))
            .collect::<Vec<_>>()
            .join("|")
    );
    Ok(Report::new(
        "mulest",
        lhs,
        rhs,
        status_from_clamps(clamped),
        fp.join("+"),
        grid.metadata(),
        extra,
    ))
}

/// Monte-Carlo estimate of the direction-averaged divergence mass.
#[derive(Clone, Debug)]
pub struct DirectionAverage {
    /// exp of the mean log directional mass.
    pub geometric_mean: f64,
    /// The rhs scale (n * geometric_mean)^{n/(n-1)} built from it.
    pub rhs_scale: f64,
    /// Standard error of the log-mean.
    pub log_stderr: f64,
    /// Directions actually used.
    pub samples: usize,
    /// Directions skipped because their mass was zero (log undefined).
    pub skipped: usize,
}

/// Geometric average over random directions e of ||div(A e)||, the scale
/// appearing when the coordinate frame is averaged over the sphere.
pub fn log_avg_direction(a: &TensorField, samples: usize, seed: u64) -> Result<DirectionAverage> {
    let n = a.mdim;
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    if samples == 0 {
        return Err(Error::Format("need at least one direction sample".into()));
    }
    let div = divergence(a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut logs = Vec::with_capacity(samples);
    let mut skipped = 0usize;
    let mut e = vec![0.0; n];
    for _ in 0..samples {
        loop {
            for v in e.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let r = norm(&e);
            if r > 1e-6 {
                for v in e.iter_mut() {
                    *v /= r;
                }
                break;
            }
        }
        let m = div.directional_mass(&e);
        if m > 0.0 {
            logs.push(m.ln());
        } else {
            skipped += 1;
        }
    }
    if logs.is_empty() {
        return Ok(DirectionAverage {
            geometric_mean: 0.0,
            rhs_scale: 0.0,
            log_stderr: 0.0,
            samples: 0,
            skipped,
        });
    }
    let used = logs.len();
    let mean = logs.iter().sum::<f64>() / used as f64;
    let var = logs.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>()
        / (used.max(2) - 1) as f64;
    let stderr = (var / used as f64).sqrt();
    let nf = n as f64;
    let gm = mean.exp();
    Ok(DirectionAverage {
        geometric_mean: gm,
        rhs_scale: (nf * gm).powf(nf / (nf - 1.0)),
        log_stderr: stderr,
        samples: used,
        skipped,
    })
}

/// Kernel families used to weight the determinant functionals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// (omega . z)^2 / (a z_par^2 + b |z_perp|^2)^{(n+1)/2}.
    AnisotropicSchur,
    /// Same with unit weights: (omega . z)^2 / r^{n+1}.
    PlainInverseR,
    /// Directional profile g(z/r)/r; used by the scalar convolution path.
    SphereProfile,
}

/// A homogeneous kernel anchored at a singular point, with an optional
/// radial cutoff (1 up to `cutoff`, cubic step to 0 over one unit beyond)
/// and the exclusion radius used by the divergence accounting.
#[derive(Clone, Debug)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub xi: Vec<f64>,
    pub omega: Option<Vec<f64>>,
    pub weights: (f64, f64),
    pub cutoff: f64,
    /// 0 means: pick 4 * max spacing at divergence time.
    pub exclusion: f64,
}

impl KernelSpec {
    pub fn plain(xi: Vec<f64>) -> Self {
        Self {
            kind: KernelKind::PlainInverseR,
            xi,
            omega: None,
            weights: (1.0, 1.0),
            cutoff: f64::INFINITY,
            exclusion: 0.0,
        }
    }

    pub fn anisotropic(xi: Vec<f64>, omega: Vec<f64>, weights: (f64, f64)) -> Self {
        Self {
            kind: KernelKind::AnisotropicSchur,
            xi,
            omega: Some(omega),
            weights,
            cutoff: f64::INFINITY,
            exclusion: 0.0,
        }
    }

    #[must_use]
    pub fn with_omega(mut self, omega: Vec<f64>) -> Self {
        self.omega = Some(omega);
        self
    }

    #[must_use]
    pub fn with_cutoff(mut self, r: f64) -> Self {
        self.cutoff = r;
        self
    }

    #[must_use]
    pub fn with_exclusion(mut self, r: f64) -> Self {
        self.exclusion = r;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.xi.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "kernel point has {} coordinates in dimension {n}",
                self.xi.len()
            )));
        }
        if !(self.weights.0 > 0.0) || !(self.weights.1 > 0.0) {
            return Err(Error::Format("kernel weights must be positive".into()));
        }
        if !(self.cutoff > 0.0) {
            return Err(Error::Format("kernel cutoff must be positive".into()));
        }
        if let Some(w) = &self.omega {
            if w.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "kernel direction has {} coordinates in dimension {n}",
                    w.len()
                )));
            }
            if norm(w) == 0.0 {
                return Err(Error::Format("kernel direction must be nonzero".into()));
            }
        }
        Ok(())
    }

    /// Unit direction, defaulting to the first axis.
    fn direction(&self, n: usize) -> Vec<f64> {
        match &self.omega {
            Some(w) => {
                let r = norm(w);
                w.iter().map(|x| x / r).collect()
            }
            None => {
                let mut e = vec![0.0; n];
                e[0] = 1.0;
                e
            }
        }
    }

    #[must_use]
    pub fn cutoff_factor(&self, r: f64) -> f64 {
        if self.cutoff.is_infinite() {
            1.0
        } else {
            smoothstep_down(r - self.cutoff)
        }
    }
}

/// The homogeneous degree-(1-n) rank-one field (z tensor z)/r^{n+1},
/// divergence-free away from its anchor, with cutoff. Its divergence mass
/// concentrates on the box sheets (plus the singular atom) and converges
/// to the area of the unit sphere when the box sits inside the cutoff.
pub fn extreme_tensor(grid: &Grid, kern: &KernelSpec) -> Result<TensorField> {
    let n = grid.dim();
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    kern.validate(n)?;
    let xi = grid.snap_to_dual(&kern.xi);
    if grid.distance_to_nearest_center(&xi) < 1e-9 * grid.spacing().iter().fold(f64::INFINITY, |a, &b| a.min(b)) {
        return Err(Error::SingularOnNode);
    }
    let max_h = grid.spacing().iter().fold(0.0f64, |a, &b| a.max(b));
    let radius = if kern.exclusion > 0.0 {
        kern.exclusion
    } else {
        4.0 * max_h
    };
    let mut out = TensorField::zeros(grid.clone(), n)?;
    let plen = packed_len(n);
    let mut x = vec![0.0; n];
    for c in 0..grid.cells() {
        grid.center_into(c, &mut x);
        let mut r2 = 0.0;
        for k in 0..n {
            x[k] -= xi[k];
            r2 += x[k] * x[k];
        }
        let r = r2.sqrt();
        let s = kern.cutoff_factor(r) / r.powi(n as i32 + 1);
        if s > 0.0 {
            for i in 0..n {
                for j in i..n {
                    out.data[c * plen + packed_index(n, i, j)] = s * x[i] * x[j];
                }
            }
        }
    }
    // Rank-one with nonnegative weight at every cell.
    out.mark_psd_by_construction();
    out.add_singular_point(SingularPoint { xi, radius });
    Ok(out)
}

/// Weighted determinant functional with the anchored rank-one kernel:
/// integral of (k(z) * det A / (omega^T A omega))^{1/(n-1)} dx, where
/// k(z) = cutoff * (omega.z)^2 / (a z_par^2 + b |z_perp|^2)^{(n+1)/2}.
/// Returns the value and the count of clamped cells.
pub fn schur_kernel_functional(a: &TensorField, kern: &KernelSpec) -> Result<(f64, usize)> {
    let n = a.mdim;
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    if a.grid.dim() != n {
        return Err(Error::DimensionMismatch(
            "kernel functional needs matrix dimension equal to the grid".into(),
        ));
    }
    if !a.psd_certified {
        return Err(Error::NotPsdField("certify_psd before weighting".into()));
    }
    kern.validate(n)?;
    let xi = a.grid.snap_to_dual(&kern.xi);
    let omega = kern.direction(n);
    let (wa, wb) = match kern.kind {
        KernelKind::AnisotropicSchur => kern.weights,
        _ => (1.0, 1.0),
    };
    let p = 1.0 / (n as f64 - 1.0);
    let vol = a.grid.cell_volume();
    let mut sum = 0.0;
    let mut clamped = 0usize;
    let mut x = vec![0.0; n];
    for c in 0..a.grid.cells() {
        a.grid.center_into(c, &mut x);
        let mut r2 = 0.0;
        let mut z1 = 0.0;
        for k in 0..n {
            let z = x[k] - xi[k];
            r2 += z * z;
            z1 += z * omega[k];
        }
        let phi = kern.cutoff_factor(r2.sqrt());
        if phi == 0.0 {
            continue;
        }
        let denom = (wa * z1 * z1 + wb * (r2 - z1 * z1)).powf((n as f64 + 1.0) / 2.0);
        let k = phi * z1 * z1 / denom;
        if k == 0.0 {
            continue;
        }
        let m = a.get(c);
        let det = clamp_det(m.det(), m.frobenius().powi(n as i32), &mut clamped);
        if det == 0.0 {
            continue;
        }
        let quad = m.quad(&omega);
        if quad <= 0.0 {
            return Err(Error::DegenerateDirection { cell: c });
        }
        sum += (k * det / quad).powf(p) * vol;
    }
    Ok((sum, clamped))
}

/// Trailing-block variant: the kernel weight is read off the stored field
/// K (its omega-quadratic form) and the determinant comes from a supplied
/// field of (n-1)-dimensional blocks. For K the anchored rank-one kernel
/// and sigma the cellwise Schur complement of a positive field A, this
/// equals `schur_kernel_functional` of A with the same direction.
pub fn sigma_schur_functional(
    k_field: &TensorField,
    sigma: &TensorField,
    kern: &KernelSpec,
) -> Result<(f64, usize)> {
    let n = k_field.mdim;
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    if sigma.mdim + 1 != n {
        return Err(Error::DimensionMismatch(format!(
            "trailing blocks have dimension {}, want {}",
            sigma.mdim,
            n - 1
        )));
    }
    if !k_field.grid.same_layout(&sigma.grid) {
        return Err(Error::GridMismatch(
            "kernel field and block field live on different grids".into(),
        ));
    }
    if !k_field.psd_certified || !sigma.psd_certified {
        return Err(Error::NotPsdField("certify both fields first".into()));
    }
    kern.validate(n)?;
    let omega = kern.direction(n);
    let p = 1.0 / (n as f64 - 1.0);
    let vol = k_field.grid.cell_volume();
    let mut sum = 0.0;
    let mut clamped = 0usize;
    for c in 0..k_field.grid.cells() {
        let f11 = k_field.get(c).quad(&omega).max(0.0);
        if f11 == 0.0 {
            continue;
        }
        let s = sigma.get(c);
        let det = if sigma.mdim == 1 {
            clamp_det(s.get(0, 0), s.get(0, 0).abs(), &mut clamped)
        } else {
            clamp_det(
                s.det(),
                s.frobenius().powi(sigma.mdim as i32),
                &mut clamped,
            )
        };
        if det > 0.0 {
            sum += (f11 * det).powf(p) * vol;
        }
    }
    Ok((sum, clamped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmat::PSD_TOL;
    use std::f64::consts::PI;

    fn grid2(lo: f64, hi: f64, m: usize) -> Grid {
        Grid::from_box(&[lo, lo], &[hi, hi], &[m, m]).unwrap()
    }

    /// Smooth strictly positive-definite test field on [-1,1]^2.
    fn bump_field(g: &Grid) -> TensorField {
        let mut a = TensorField::from_fn(g.clone(), 2, |x| {
            let f = (-(x[0] * x[0] + x[1] * x[1]) / 0.5).exp();
            let mut m = SymMat::from_diag(&[0.5 + f, 0.5 + f]).unwrap();
            m.set(0, 0, m.get(0, 0) + f * x[0] * x[0]);
            m.set(0, 1, f * x[0] * x[1]);
            m.set(1, 1, m.get(1, 1) + f * x[1] * x[1]);
            m
        })
        .unwrap();
        a.certify_psd(PSD_TOL).unwrap();
        a
    }

    #[test]
    fn constant_identity_divergence_is_boundary_sheets() {
        let g = Grid::from_box(&[0.0, 0.0], &[1.0, 1.0], &[8, 8]).unwrap();
        let mut a = TensorField::from_fn(g, 2, |_| SymMat::identity(2).unwrap()).unwrap();
        a.certify_psd(PSD_TOL).unwrap();
        let d = divergence(&a).unwrap();
        assert_eq!(d.interior_mass(), 0.0);
        assert!((d.sheet_mass() - 4.0).abs() < 1e-12, "perimeter of the unit box");
        assert_eq!(d.atom_mass(), 0.0);
    }

    #[test]
    fn linear_field_divergence_is_exact() {
        // a11 = 2x+3y, a12 = x-y, a22 = 5x+y: rows diverge to (1, 2).
        let g = grid2(-1.0, 1.0, 10);
        let a = TensorField::from_fn(g.clone(), 2, |x| {
            SymMat::from_packed(
                2,
                &[2.0 * x[0] + 3.0 * x[1], x[0] - x[1], 5.0 * x[0] + x[1]],
            )
            .unwrap()
        })
        .unwrap();
        let d = divergence(&a).unwrap();
        let vol = g.cell_volume();
        for c in 0..g.cells() {
            let v = d.interior_at(c);
            assert!((v[0] - 1.0 * vol).abs() < 1e-12);
            assert!((v[1] - 2.0 * vol).abs() < 1e-12);
        }
    }

    #[test]
    fn directional_mass_on_axes_matches_row_mass() {
        let a = bump_field(&grid2(-1.0, 1.0, 24));
        let d = divergence(&a).unwrap();
        assert_eq!(d.directional_mass(&[1.0, 0.0]), d.row_mass(0));
        assert_eq!(d.directional_mass(&[0.0, 1.0]), d.row_mass(1));
    }

    #[test]
    fn smoothed_disk_ratio_approaches_the_ball_benchmark() {
        let g = Grid::from_box(&[-1.5, -1.5], &[1.5, 1.5], &[96, 96]).unwrap();
        let a = radial_profile_tensor(&g, &[0.0, 0.0], 1.0, 6.0 * 3.0 / 96.0).unwrap();
        let r = verify_fund(&a).unwrap();
        let target = ball_sharp_ratio(2).unwrap();
        assert!(
            (r.ratio - target).abs() < 0.08 * target,
            "ratio {} vs {}",
            r.ratio,
            target
        );
        assert_eq!(r.status, Status::Ok);
        // The benchmark bounds the family from above (up to grid error).
        assert!(r.ratio < target * 1.01);
    }

    #[test]
    fn zero_field_reports_zero_ratio() {
        let a = TensorField::zeros(grid2(-1.0, 1.0, 8), 2).unwrap();
        let r = verify_fund(&a).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.ratio, 0.0);
        assert_eq!(r.status, Status::Ok);
    }

    #[test]
    fn uncertified_field_is_rejected() {
        let g = grid2(-1.0, 1.0, 8);
        let a = TensorField::from_fn(g, 2, |_| SymMat::identity(2).unwrap()).unwrap();
        assert!(matches!(
            integral_det_root(&a),
            Err(Error::NotPsdField(_))
        ));
    }

    #[test]
    fn prod_consistency_gap_is_nonnegative_for_equal_rows() {
        let g = Grid::from_box(&[-1.5, -1.5], &[1.5, 1.5], &[64, 64]).unwrap();
        let a = radial_profile_tensor(&g, &[0.0, 0.0], 1.0, 0.3).unwrap();
        let d = divergence(&a).unwrap();
        let rows = d.row_masses();
        assert!((rows[0] - rows[1]).abs() < 1e-10 * rows[0], "radial symmetry");
        // n^{n/(n-1)} (prod rows)^{1/(n-1)} >= (euclidean mass)^{n/(n-1)}.
        let lhs = 4.0 * rows[0] * rows[1];
        let rhs = d.total_mass().powi(2);
        assert!(lhs >= rhs * (1.0 - 1e-9), "{lhs} vs {rhs}");
    }

    #[test]
    fn prod_ratio_invariant_under_balanced_stretch() {
        let g = grid2(-1.5, 1.5, 48);
        let mut a = TensorField::from_fn(g.clone(), 2, |x| {
            let f = smoothstep_down(((x[0] * x[0] + x[1] * x[1]).sqrt() - 0.7) / 0.3);
            SymMat::from_diag(&[f, 2.0 * f]).unwrap()
        })
        .unwrap();
        a.certify_psd(PSD_TOL).unwrap();
        let (mu0, mu1) = (2.0, 0.5);
        let gs = Grid::new(
            vec![-1.5 * mu0, -1.5 * mu1],
            vec![mu0 * 3.0 / 48.0, mu1 * 3.0 / 48.0],
            vec![48, 48],
        )
        .unwrap();
        let mut b = TensorField::from_fn(gs, 2, |y| {
            let x = [y[0] / mu0, y[1] / mu1];
            let f = smoothstep_down(((x[0] * x[0] + x[1] * x[1]).sqrt() - 0.7) / 0.3);
            SymMat::from_packed(2, &[mu0 * mu0 * f, 0.0, mu1 * mu1 * 2.0 * f]).unwrap()
        })
        .unwrap();
        b.certify_psd(PSD_TOL).unwrap();
        let ra = verify_prod(&a).unwrap();
        let rb = verify_prod(&b).unwrap();
        assert!(
            (ra.ratio - rb.ratio).abs() < 1e-12 * ra.ratio.abs(),
            "{} vs {}",
            ra.ratio,
            rb.ratio
        );
    }

    #[test]
    fn fund_ratio_is_dilation_covariant() {
        let g = Grid::from_box(&[-1.5, -1.5], &[1.5, 1.5], &[48, 48]).unwrap();
        let a = radial_profile_tensor(&g, &[0.0, 0.0], 1.0, 0.25).unwrap();
        let g2 = Grid::from_box(&[-3.0, -3.0], &[3.0, 3.0], &[48, 48]).unwrap();
        let b = radial_profile_tensor(&g2, &[0.0, 0.0], 2.0, 0.5).unwrap();
        let ra = verify_fund(&a).unwrap();
        let rb = verify_fund(&b).unwrap();
        assert!((ra.ratio - rb.ratio).abs() < 1e-9 * ra.ratio);
    }

    #[test]
    fn extreme_tensor_mass_sits_on_sheets_and_converges() {
        let target = sphere_area(2).unwrap();
        let mut errs = Vec::new();
        for m in [48usize, 96] {
            let g = grid2(-1.0, 1.0, m);
            let kern = KernelSpec::plain(vec![0.0, 0.0])
                .with_cutoff(10.0)
                .with_exclusion(0.2);
            let f = extreme_tensor(&g, &kern).unwrap();
            let d = divergence(&f).unwrap();
            assert!(
                d.interior_mass() < 0.12 * target,
                "interior {} at {m}",
                d.interior_mass()
            );
            assert!(d.atom_mass() < 0.05, "atom {}", d.atom_mass());
            errs.push((d.total_mass() - target).abs());
        }
        assert!(errs[1] < errs[0], "refinement shrinks the error: {errs:?}");
        assert!(errs[1] < 0.04 * target, "mass error {} at 96^2", errs[1]);
    }

    #[test]
    fn extreme_tensor_is_rank_one_with_zero_det_mass() {
        let g = grid2(-1.0, 1.0, 32);
        let f = extreme_tensor(&g, &KernelSpec::plain(vec![0.0, 0.0]).with_cutoff(10.0)).unwrap();
        let (v, clamped) = integral_det_root(&f).unwrap();
        assert!(v < 1e-12, "rank-one determinants integrate to {v}");
        assert_eq!(clamped, 0, "tiny rounding negatives are not clamping events");
    }

    #[test]
    fn mulest_with_repeated_argument_reduces_to_fund() {
        let g = Grid::from_box(&[-1.5, -1.5], &[1.5, 1.5], &[32, 32]).unwrap();
        let a = radial_profile_tensor(&g, &[0.0, 0.0], 1.0, 0.3).unwrap();
        let fund = verify_fund(&a).unwrap();
        let mul = verify_mulest(&[a.clone(), a]).unwrap();
        assert!((fund.lhs - mul.lhs).abs() < 1e-12 * fund.lhs);
        assert!((fund.rhs_scale - mul.rhs_scale).abs() < 1e-9 * fund.rhs_scale);
    }

    #[test]
    fn mulest_integrand_with_extreme_and_scalar_matches_closed_form() {
        // D(F, f I) = f * tr(F) / 2 = f * phi / (2 r) in dimension 2.
        let g = grid2(-1.0, 1.0, 16);
        let kern = KernelSpec::plain(vec![0.0, 0.0]).with_cutoff(10.0);
        let fext = extreme_tensor(&g, &kern).unwrap();
        let c = g.linear(&[12, 9]);
        let x = g.center(c);
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let fval = 0.73;
        let d = mixed_det(&[fext.get(c), SymMat::identity(2).unwrap().scale(fval)]).unwrap();
        let expect = fval / (2.0 * r);
        assert!((d - expect).abs() < 1e-12 * expect, "{d} vs {expect}");
    }

    #[test]
    fn schur_kernel_value_decreases_as_the_anchor_leaves_the_mass() {
        let a = bump_field(&grid2(-1.0, 1.0, 48));
        let near = KernelSpec::plain(vec![0.0, 0.0]);
        let far = KernelSpec::plain(vec![6.0, 6.0]);
        let (vn, _) = schur_kernel_functional(&a, &near).unwrap();
        let (vf, _) = schur_kernel_functional(&a, &far).unwrap();
        assert!(vn.is_finite() && vf.is_finite());
        assert!(vf < vn, "near {vn} far {vf}");
    }

    #[test]
    fn schur_kernel_respects_joint_rotation() {
        // Quarter turn: grid symmetric, so rotated cells realign exactly.
        let g = grid2(-1.0, 1.0, 32);
        let field = |rot: bool| {
            let mut a = TensorField::from_fn(g.clone(), 2, move |xy| {
                let (x, y) = if rot { (xy[1], -xy[0]) } else { (xy[0], xy[1]) };
                let f = (-(x * x + y * y) / 0.4).exp();
                let raw = SymMat::from_packed(2, &[0.4 + f + f * x * x, f * x * y, 0.4 + f + f * y * y])
                    .unwrap();
                if rot {
                    // R A R^T for the quarter turn R = [[0,-1],[1,0]].
                    SymMat::from_packed(2, &[raw.get(1, 1), -raw.get(0, 1), raw.get(0, 0)]).unwrap()
                } else {
                    raw
                }
            })
            .unwrap();
            a.certify_psd(PSD_TOL).unwrap();
            a
        };
        let xi = [0.25, 0.125];
        let base = KernelSpec::plain(vec![xi[0], xi[1]]).with_omega(vec![0.6, 0.8]);
        let rotated = KernelSpec::plain(vec![-xi[1], xi[0]]).with_omega(vec![-0.8, 0.6]);
        let (v0, _) = schur_kernel_functional(&field(false), &base).unwrap();
        let (v1, _) = schur_kernel_functional(&field(true), &rotated).unwrap();
        assert!((v0 - v1).abs() < 1e-10 * v0, "{v0} vs {v1}");
    }

    #[test]
    fn sigma_schur_agrees_with_kernel_functional_on_split_fields() {
        let g = grid2(-1.0, 1.0, 40);
        let a = bump_field(&g);
        let mut sigma = TensorField::zeros(g.clone(), 1).unwrap();
        for c in 0..g.cells() {
            let (_, s) = a.get(c).schur_complement().unwrap();
            sigma.set(c, &s);
        }
        sigma.certify_psd(PSD_TOL).unwrap();
        let kern = KernelSpec::plain(vec![0.25, -0.25]).with_cutoff(5.0);
        let k_field = extreme_tensor(&g, &kern).unwrap();
        let (via_kernel, _) = schur_kernel_functional(&a, &kern).unwrap();
        let (via_blocks, _) = sigma_schur_functional(&k_field, &sigma, &kern).unwrap();
        assert!(
            (via_kernel - via_blocks).abs() < 1e-10 * via_kernel,
            "{via_kernel} vs {via_blocks}"
        );
    }

    #[test]
    fn direction_average_is_isotropic_for_radial_fields() {
        let g = Grid::from_box(&[-1.5, -1.5], &[1.5, 1.5], &[48, 48]).unwrap();
        let a = radial_profile_tensor(&g, &[0.0, 0.0], 1.0, 0.3).unwrap();
        let d = divergence(&a).unwrap();
        let avg = log_avg_direction(&a, 200, 7).unwrap();
        assert_eq!(avg.skipped, 0);
        assert!(avg.samples == 200);
        let axis = d.row_mass(0);
        assert!(
            (avg.geometric_mean - axis).abs() < 0.01 * axis,
            "{} vs {axis}",
            avg.geometric_mean
        );
        assert!(avg.log_stderr < 0.01);
        // More samples shrink the standard error roughly like 1/sqrt(k).
        let wide = log_avg_direction(&a, 2000, 7).unwrap();
        assert!(wide.log_stderr < avg.log_stderr);
    }

    #[test]
    fn ball_indicator_integrates_to_the_disk_area() {
        let g = Grid::from_box(&[-1.5, -1.5], &[1.5, 1.5], &[128, 128]).unwrap();
        let a = ball_indicator_tensor(&g, &[0.0, 0.0], 1.0, 8).unwrap();
        let (v, clamped) = integral_det_root(&a).unwrap();
        assert_eq!(clamped, 0);
        // Coverage fractions w contribute w^2 <= w, so the value sits just
        // below the disk area but converges to it.
        assert!((v - PI).abs() < 0.03 * PI, "{v} vs {PI}");
    }

    #[test]
    fn geometry_anchors() {
        assert!((sphere_area(2).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_area(3).unwrap() - 4.0 * PI).abs() < 1e-15);
        assert!((ball_sharp_ratio(2).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!(
            (ball_sharp_ratio(3).unwrap() - 1.0 / (6.0 * PI.sqrt())).abs() < 1e-15,
            "three-dimensional benchmark"
        );
    }
}
