//! Gas-dynamics functionals over discrete flows.
//!
//! A flow is a sequence of snapshots (density, velocity, pressure,
//! specific internal energy) on one spatial grid with compact support.
//! The module assembles the divergence-free space-time stress tensor,
//! evaluates the integral bounds whose scale factors are built from the
//! conserved mass and initial energy, and provides the symmetry
//! transforms (Galilean boost, parabolic scaling) the bounds are tested
//! against.
//!
//! Conservation slack is never an error here: flows that drift in mass or
//! overshoot in energy are still evaluated, and the report row carries an
//! `inadmissible-input` status instead.

use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::grid::Grid;
use crate::report::{Report, Status};
use crate::symmat::{self, SymMat};

/// Cells with density at or below this fraction of the peak density are
/// treated as vacuum: their velocity is set to zero on construction.
pub const VACUUM_REL: f64 = 1e-12;

/// Relative mass drift above which a flow is flagged inadmissible.
pub const MASS_DRIFT_TOL: f64 = 1e-10;

/// Relative energy overshoot above which a flow is flagged inadmissible.
pub const ENERGY_OVERSHOOT_TOL: f64 = 1e-10;

/// One time level of a flow: density, velocity (cell-major, `dim`
/// components per cell), pressure, and specific internal energy.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub e: Vec<f64>,
}

impl Snapshot {
    pub fn zeros(cells: usize, dim: usize) -> Self {
        Self {
            rho: vec![0.0; cells],
            u: vec![0.0; cells * dim],
            p: vec![0.0; cells],
            e: vec![0.0; cells],
        }
    }
}

/// A compactly supported discrete flow on a fixed spatial grid.
#[derive(Clone, Debug)]
pub struct FlowField {
    grid: Grid,
    times: Vec<f64>,
    snaps: Vec<Snapshot>,
}

impl FlowField {
    /// Validates layout and sign structure and applies the vacuum
    /// convention (zero velocity wherever the density is negligible).
    pub fn new(grid: Grid, times: Vec<f64>, mut snaps: Vec<Snapshot>) -> Result<Self> {
        if times.is_empty() || times.len() != snaps.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times for {} snapshots",
                times.len(),
                snaps.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Format("snapshot times must strictly increase".into()));
        }
        let cells = grid.cells();
        let d = grid.dim();
        let mut max_rho = 0.0f64;
        for (k, s) in snaps.iter().enumerate() {
            if s.rho.len() != cells
                || s.u.len() != cells * d
                || s.p.len() != cells
                || s.e.len() != cells
            {
                return Err(Error::DimensionMismatch(format!(
                    "snapshot {k} does not match the grid layout"
                )));
            }
            for (c, (&rho, (&p, &e))) in s.rho.iter().zip(s.p.iter().zip(&s.e)).enumerate() {
                for (name, v) in [("rho", rho), ("p", p), ("e", e)] {
                    if !v.is_finite() {
                        return Err(Error::Format(format!(
                            "non-finite {name} at cell {c}, snapshot {k}"
                        )));
                    }
                    if v < 0.0 {
                        return Err(Error::NegativeState {
                            snapshot: k,
                            cell: c,
                            field: name,
                            value: v,
                        });
                    }
                }
                max_rho = max_rho.max(rho);
            }
        }
        let floor = VACUUM_REL * max_rho;
        for s in &mut snaps {
            for c in 0..cells {
                if s.rho[c] <= floor {
                    for a in 0..d {
                        s.u[c * d + a] = 0.0;
                    }
                }
            }
        }
        Ok(Self { grid, times, snaps })
    }

    #[must_use]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    #[must_use]
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[must_use]
    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snaps
    }

    #[must_use]
    pub fn cells(&self) -> usize {
        self.grid.cells()
    }

    pub fn mass(&self, k: usize) -> f64 {
        self.snaps[k].rho.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn momentum(&self, k: usize) -> Vec<f64> {
        let d = self.dim();
        let s = &self.snaps[k];
        let mut out = vec![0.0; d];
        for c in 0..self.cells() {
            for a in 0..d {
                out[a] += s.rho[c] * s.u[c * d + a];
            }
        }
        for v in &mut out {
            *v *= self.grid.cell_volume();
        }
        out
    }

    /// Total energy: kinetic plus internal.
    pub fn energy(&self, k: usize) -> f64 {
        let d = self.dim();
        let s = &self.snaps[k];
        let mut sum = 0.0;
        for c in 0..self.cells() {
            let u2: f64 = (0..d).map(|a| s.u[c * d + a] * s.u[c * d + a]).sum();
            sum += 0.5 * s.rho[c] * u2 + s.rho[c] * s.e[c];
        }
        sum * self.grid.cell_volume()
    }

    /// Second velocity moment of the mass distribution at one time.
    pub fn velocity_moment(&self, k: usize) -> f64 {
        let d = self.dim();
        let s = &self.snaps[k];
        let mut sum = 0.0;
        for c in 0..self.cells() {
            let u2: f64 = (0..d).map(|a| s.u[c * d + a] * s.u[c * d + a]).sum();
            sum += s.rho[c] * u2;
        }
        sum * self.grid.cell_volume()
    }

    /// Internal energy integral at one time.
    pub fn internal_energy(&self, k: usize) -> f64 {
        let s = &self.snaps[k];
        let sum: f64 = s.rho.iter().zip(&s.e).map(|(r, e)| r * e).sum();
        sum * self.grid.cell_volume()
    }

    /// The shared time step, required where a space-time lattice is built.
    pub fn uniform_dt(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::Format(
                "need at least two snapshots for a time axis".into(),
            ));
        }
        let dt = self.times[1] - self.times[0];
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs() {
                return Err(Error::Format(format!(
                    "snapshot gaps {} and {} are not uniform",
                    dt,
                    w[1] - w[0]
                )));
            }
        }
        Ok(dt)
    }

    /// Trapezoid weights against the snapshot times.
    #[must_use]
    pub fn time_weights(&self) -> Vec<f64> {
        let t = &self.times;
        let k = t.len();
        if k == 1 {
            return vec![0.0];
        }
        let mut w = vec![0.0; k];
        w[0] = 0.5 * (t[1] - t[0]);
        w[k - 1] = 0.5 * (t[k - 1] - t[k - 2]);
        for i in 1..k - 1 {
            w[i] = 0.5 * (t[i + 1] - t[i - 1]);
        }
        w
    }

    /// First `upto + 1` snapshots as a flow of their own.
    pub fn truncated(&self, upto: usize) -> Result<FlowField> {
        if upto >= self.times.len() {
            return Err(Error::DimensionMismatch(format!(
                "snapshot {upto} out of range ({} stored)",
                self.times.len()
            )));
        }
        Ok(FlowField {
            grid: self.grid.clone(),
            times: self.times[..=upto].to_vec(),
            snaps: self.snaps[..=upto].to_vec(),
        })
    }

    #[must_use]
    pub fn fingerprint(&self) -> String {
        crate::io::fingerprint_flow(self)
    }
}

/// Conservation audit of a flow.
#[derive(Clone, Debug)]
pub struct FlowSummary {
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub momentum0: Vec<f64>,
    /// Reference mass (initial snapshot).
    pub m: f64,
    /// Reference total energy (initial snapshot).
    pub e0: f64,
    /// Mean speed |P|/M of the initial snapshot, zero for empty flows.
    pub ubar: f64,
    pub max_mass_drift: f64,
    pub max_energy_overshoot: f64,
    pub admissible: bool,
}

#[must_use]
pub fn summary(w: &FlowField) -> FlowSummary {
    let k = w.times().len();
    let mass: Vec<f64> = (0..k).map(|i| w.mass(i)).collect();
    let energy: Vec<f64> = (0..k).map(|i| w.energy(i)).collect();
    let momentum0 = w.momentum(0);
    let m = mass[0];
    let e0 = energy[0];
    let pnorm = momentum0.iter().map(|x| x * x).sum::<f64>().sqrt();
    let ubar = if m > 0.0 { pnorm / m } else { 0.0 };
    let max_mass_drift = mass
        .iter()
        .map(|x| (x - m).abs())
        .fold(0.0f64, f64::max);
    let max_energy_overshoot = energy
        .iter()
        .map(|x| (x - e0).max(0.0))
        .fold(0.0f64, f64::max);
    let admissible = max_mass_drift <= MASS_DRIFT_TOL * m.max(f64::MIN_POSITIVE)
        && max_energy_overshoot <= ENERGY_OVERSHOOT_TOL * e0.max(f64::MIN_POSITIVE);
    FlowSummary {
        mass,
        energy,
        momentum0,
        m,
        e0,
        ubar,
        max_mass_drift,
        max_energy_overshoot,
        admissible,
    }
}

fn admissibility_status(s: &FlowSummary) -> Status {
    if s.admissible {
        Status::Ok
    } else {
        Status::InadmissibleInput
    }
}

/// Conservation audit as a report row: the worst relative mass drift
/// against its tolerance, with the energy audit in the extra column.
#[must_use]
pub fn summary_report(w: &FlowField) -> Report {
    let s = summary(w);
    let drift = s.max_mass_drift / s.m.max(f64::MIN_POSITIVE);
    Report::new(
        "flow-summary",
        drift,
        MASS_DRIFT_TOL,
        admissibility_status(&s),
        w.fingerprint(),
        w.grid().metadata(),
        summary_extra(&s),
    )
}

fn summary_extra(s: &FlowSummary) -> String {
    format!(
        "m={};e0={};ubar={};mass_drift={:e};energy_overshoot={:e}",
        s.m, s.e0, s.ubar, s.max_mass_drift, s.max_energy_overshoot
    )
}

/// Space-time stress tensor of the flow on the (1 + d)-dimensional grid
/// whose first axis is time. Blockwise per cell: mass density, momentum,
/// and the momentum flux rho u (x) u + p I. Positive semidefinite by
/// construction for non-negative density and pressure.
pub fn euler_tensor(w: &FlowField) -> Result<TensorField> {
    let dt = w.uniform_dt()?;
    let d = w.dim();
    let g = w.grid();
    let mut origin = vec![w.times()[0] - 0.5 * dt];
    origin.extend_from_slice(g.origin());
    let mut spacing = vec![dt];
    spacing.extend_from_slice(g.spacing());
    let mut counts = vec![w.times().len()];
    counts.extend_from_slice(g.counts());
    let st = Grid::new(origin, spacing, counts)?;
    let cells = g.cells();
    let mut out = TensorField::zeros(st, d + 1)?;
    let mut b = SymMat::zeros(d)?;
    for (k, snap) in w.snapshots().iter().enumerate() {
        for c in 0..cells {
            let rho = snap.rho[c];
            let p = snap.p[c];
            let u = &snap.u[c * d..(c + 1) * d];
            for i in 0..d {
                for j in i..d {
                    let v = rho * u[i] * u[j] + if i == j { p } else { 0.0 };
                    b.set(i, j, v);
                }
            }
            let m: Vec<f64> = u.iter().map(|ui| rho * ui).collect();
            let cell = SymMat::from_blocks(rho, &m, &b)?;
            out.set(k * cells + c, &cell);
        }
    }
    out.mark_psd_by_construction();
    out.set_time_axis(true);
    Ok(out)
}

/// Signed volume spanned by d + 1 velocity points in R^d, computed from
/// the differences against the first point so that a common shift of all
/// arguments leaves the value exactly unchanged.
pub fn cor(us: &[&[f64]]) -> Result<f64> {
    if us.is_empty() {
        return Err(Error::DimensionMismatch("empty velocity tuple".into()));
    }
    let d = us[0].len();
    if d == 0 || d > symmat::MAX_DIM - 1 {
        return Err(Error::UnsupportedDimension(d));
    }
    if us.len() != d + 1 || us.iter().any(|u| u.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "need {} velocities of dimension {}",
            d + 1,
            d
        )));
    }
    let mut rows = vec![vec![0.0; d]; d];
    for (j, u) in us.iter().enumerate().skip(1) {
        for i in 0..d {
            rows[i][j - 1] = u[i] - us[0][i];
        }
    }
    let row_refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    Ok(symmat::general_det(&row_refs))
}

/// A tuple of d + 1 spatial shifts with the first normalized to zero.
#[derive(Clone, Debug)]
pub struct ShiftSet {
    shifts: Vec<Vec<f64>>,
}

impl ShiftSet {
    /// Builds from the d nonzero shifts; the zero shift is prepended.
    pub fn new(dim: usize, others: Vec<Vec<f64>>) -> Result<Self> {
        if others.len() != dim || others.iter().any(|h| h.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "want {dim} shifts of dimension {dim}"
            )));
        }
        let mut shifts = vec![vec![0.0; dim]];
        shifts.extend(others);
        Ok(Self { shifts })
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.shifts[0].len()
    }

    #[must_use]
    pub fn shifts(&self) -> &[Vec<f64>] {
        &self.shifts
    }

    /// Whether the d + 1 shift points span a nondegenerate simplex.
    #[must_use]
    pub fn affinely_independent(&self) -> bool {
        let d = self.dim();
        let mut rows = vec![vec![0.0; d]; d];
        let mut scale = 1.0f64;
        for j in 1..=d {
            let norm = self.shifts[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            scale *= norm.max(f64::MIN_POSITIVE);
            for i in 0..d {
                rows[i][j - 1] = self.shifts[j][i];
            }
        }
        let row_refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        symmat::general_det(&row_refs).abs() > 1e-12 * scale
    }

    /// Shifts snapped to whole cells; returns the offsets and the largest
    /// snap distance relative to the spacing.
    pub(crate) fn cell_offsets(&self, grid: &Grid) -> (Vec<Vec<isize>>, f64) {
        let d = self.dim();
        let h = grid.spacing();
        let mut max_snap = 0.0f64;
        let offsets = self
            .shifts
            .iter()
            .map(|s| {
                (0..d)
                    .map(|a| {
                        let frac = s[a] / h[a];
                        let cell = frac.round();
                        max_snap = max_snap.max((frac - cell).abs());
                        cell as isize
                    })
                    .collect()
            })
            .collect();
        (offsets, max_snap)
    }
}

/// Velocity-spread integrand at one snapshot: the cell sum of
/// (prod_j rho(y + h_j) * cor(u(y + h_0), .., u(y + h_d))^2)^{1/d} with
/// zero extension outside the box.
pub fn functional_h(w: &FlowField, k: usize, shifts: &ShiftSet) -> Result<f64> {
    let d = w.dim();
    if shifts.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "shift dimension {} on a {d}-dimensional flow",
            shifts.dim()
        )));
    }
    if k >= w.times().len() {
        return Err(Error::DimensionMismatch(format!(
            "snapshot {k} out of range"
        )));
    }
    let g = w.grid();
    let snap = &w.snapshots()[k];
    let (offsets, _) = shifts.cell_offsets(g);
    let counts = g.counts();
    let mut multi = vec![0usize; d];
    let mut shifted = vec![0usize; d];
    let mut sum = 0.0;
    let inv_d = 1.0 / d as f64;
    'cells: for c in 0..g.cells() {
        g.multi_into(c, &mut multi);
        let mut rho_prod = 1.0;
        let mut vels: Vec<&[f64]> = Vec::with_capacity(d + 1);
        for off in &offsets {
            for a in 0..d {
                let t = multi[a] as isize + off[a];
                if t < 0 || t as usize >= counts[a] {
                    continue 'cells;
                }
                shifted[a] = t as usize;
            }
            let lin = g.linear(&shifted);
            let rho = snap.rho[lin];
            if rho == 0.0 {
                continue 'cells;
            }
            rho_prod *= rho;
            vels.push(&snap.u[lin * d..(lin + 1) * d]);
        }
        let volume = cor(&vels)?;
        sum += (rho_prod * volume * volume).powf(inv_d);
    }
    Ok(sum * g.cell_volume())
}

/// Time integral of the velocity-spread integrand against the trapezoid
/// weights, scaled by M^{1/d} sqrt(M E0).
pub fn functional_estuu(w: &FlowField, shifts: &ShiftSet) -> Result<Report> {
    let d = w.dim();
    let wt = w.time_weights();
    let mut lhs = 0.0;
    for k in 0..w.times().len() {
        lhs += wt[k] * functional_h(w, k, shifts)?;
    }
    let s = summary(w);
    let rhs = s.m.powf(1.0 / d as f64) * (s.m * s.e0).sqrt();
    let (_, snap_dist) = shifts.cell_offsets(w.grid());
    let extra = format!(
        "{};affine={};snap={:e};ge={}",
        summary_extra(&s),
        shifts.affinely_independent(),
        snap_dist,
        galilean_energy(w)
    );
    Ok(Report::new(
        "gas-estuu",
        lhs,
        rhs,
        admissibility_status(&s),
        w.fingerprint(),
        w.grid().metadata(),
        extra,
    ))
}

/// Pressure-density bound: time-trapezoid, space-midpoint integral of
/// rho^{1/d} p against the scale M^{1/d} sqrt(M E0).
pub fn functional_pgd(w: &FlowField) -> Result<Report> {
    let d = w.dim();
    let wt = w.time_weights();
    let vol = w.grid().cell_volume();
    let inv_d = 1.0 / d as f64;
    let mut lhs = 0.0;
    for (k, snap) in w.snapshots().iter().enumerate() {
        let mut slice = 0.0;
        for c in 0..w.cells() {
            if snap.rho[c] > 0.0 && snap.p[c] != 0.0 {
                slice += snap.rho[c].powf(inv_d) * snap.p[c];
            }
        }
        lhs += wt[k] * slice * vol;
    }
    let s = summary(w);
    let rhs = s.m.powf(inv_d) * (s.m * s.e0).sqrt();
    Ok(Report::new(
        "gas-pgd",
        lhs,
        rhs,
        admissibility_status(&s),
        w.fingerprint(),
        w.grid().metadata(),
        summary_extra(&s),
    ))
}

/// Interaction energy in the center-of-momentum sense: the pairwise
/// velocity spread plus mass times internal energy,
/// GE = 1/2 (M K2 - |P|^2) + M U with K2 the second velocity moment.
/// It never exceeds M E0 and is exactly invariant under Galilean boosts,
/// which makes it the natural boost-proof substitute for M E0 in scale
/// factors.
#[must_use]
pub fn galilean_energy(w: &FlowField) -> f64 {
    let m = w.mass(0);
    let k2 = w.velocity_moment(0);
    let p: f64 = w.momentum(0).iter().map(|x| x * x).sum();
    let u = w.internal_energy(0);
    0.5 * (m * k2 - p) + m * u
}

/// Pairwise form of [`galilean_energy`]; quadratic in the cell count and
/// used to cross-check the moment identity.
#[must_use]
pub fn galilean_energy_pairwise(w: &FlowField) -> f64 {
    let d = w.dim();
    let s = &w.snapshots()[0];
    let vol = w.grid().cell_volume();
    let occupied: Vec<usize> = (0..w.cells()).filter(|&c| s.rho[c] > 0.0).collect();
    let mut pair = 0.0;
    for &a in &occupied {
        for &b in &occupied {
            let mut du2 = 0.0;
            for i in 0..d {
                let du = s.u[a * d + i] - s.u[b * d + i];
                du2 += du * du;
            }
            pair += s.rho[a] * s.rho[b] * du2;
        }
    }
    0.25 * pair * vol * vol + w.mass(0) * w.internal_energy(0)
}

/// Anisotropic space-time kernel bound on the pressure. The kernel
/// (t - tau)^2 / (E0 (t - tau)^2 + M |y - eta(t)|^2)^{(d+2)/2}, taken to
/// the power 1/d, weights the pressure integral; the anchor is snapped to
/// the space-time dual lattice and may drift with a covariant velocity so
/// the bound can be exercised in boosted frames. The scale factor
/// E0^{(d-2)/(2d)} makes the ratio invariant under the parabolic scaling.
pub fn functional_schurp(
    w: &FlowField,
    tau: f64,
    eta: &[f64],
    drift: Option<&[f64]>,
) -> Result<Report> {
    let s = summary(w);
    if s.e0 <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    kernel_pressure_bound(w, &s, tau, eta, drift, KernelScale::Homogeneous)
}

/// Inhomogeneous variant: kernel (t-tau)^2/((t-tau)^2+|y-eta|^2)^{(d+2)/2}
/// without conserved weights inside, scaled by M + sqrt(M E0). Rescaling
/// the flow so that mass and energy coincide turns this into the
/// homogeneous kernel up to the factor M^{(d+2)/(2d)}.
pub fn functional_schurp_nonhom(w: &FlowField, tau: f64, eta: &[f64]) -> Result<Report> {
    let s = summary(w);
    kernel_pressure_bound(w, &s, tau, eta, None, KernelScale::Inhomogeneous)
}

enum KernelScale {
    Homogeneous,
    Inhomogeneous,
}

fn kernel_pressure_bound(
    w: &FlowField,
    s: &FlowSummary,
    tau: f64,
    eta: &[f64],
    drift: Option<&[f64]>,
    scale: KernelScale,
) -> Result<Report> {
    let d = w.dim();
    if eta.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "anchor dimension {} on a {d}-dimensional flow",
            eta.len()
        )));
    }
    if let Some(v) = drift {
        if v.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "drift dimension {} on a {d}-dimensional flow",
                v.len()
            )));
        }
    }
    let g = w.grid();
    // Anchor snapping: time onto the midpoint lattice between snapshots,
    // space onto the dual lattice, keeping the kernel singularity off the
    // quadrature nodes.
    let tau = if w.times().len() >= 2 {
        let dt = w.times()[1] - w.times()[0];
        let t0 = w.times()[0] - 0.5 * dt;
        t0 + ((tau - t0) / dt).round() * dt
    } else {
        tau
    };
    let eta = g.snap_to_dual(eta);
    let (ew, mw) = match scale {
        KernelScale::Homogeneous => (s.e0, s.m),
        KernelScale::Inhomogeneous => (1.0, 1.0),
    };
    let wt = w.time_weights();
    let vol = g.cell_volume();
    let inv_d = 1.0 / d as f64;
    let inner_pow = (d as f64 + 2.0) / 2.0;
    let mut lhs = 0.0;
    let mut x = vec![0.0; d];
    for (k, snap) in w.snapshots().iter().enumerate() {
        let t = w.times()[k] - tau;
        let t2 = t * t;
        let mut slice = 0.0;
        for c in 0..w.cells() {
            if snap.p[c] == 0.0 {
                continue;
            }
            g.center_into(c, &mut x);
            let mut y2 = 0.0;
            for a in 0..d {
                let anchor = eta[a] + drift.map_or(0.0, |v| w.times()[k] * v[a]);
                let dy = x[a] - anchor;
                y2 += dy * dy;
            }
            let denom = ew * t2 + mw * y2;
            if denom <= 0.0 {
                // Kernel singularity met a node despite snapping; the
                // integrand limit along t = tau is zero, so skip.
                continue;
            }
            let kern = (t2 / denom.powf(inner_pow)).powf(inv_d);
            slice += kern * snap.p[c];
        }
        lhs += wt[k] * slice * vol;
    }
    let (name, rhs) = match scale {
        KernelScale::Homogeneous => (
            "gas-schurp",
            s.e0.powf((d as f64 - 2.0) / (2.0 * d as f64)),
        ),
        KernelScale::Inhomogeneous => ("gas-schurp-nonhom", s.m + (s.m * s.e0).sqrt()),
    };
    let extra = format!(
        "{};tau={};eta={}{}",
        summary_extra(s),
        tau,
        eta.iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join("|"),
        drift.map_or(String::new(), |v| format!(
            ";drift={}",
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join("|")
        ))
    );
    Ok(Report::new(
        name,
        lhs,
        rhs,
        admissibility_status(s),
        w.fingerprint(),
        g.metadata(),
        extra,
    ))
}

/// One-time direct bound: the velocity-spread integrand, completed with a
/// final shift swept over the difference lattice of the support and
/// raised to the d-th power, integrates against M E0^d.
pub fn direct_bound(w: &FlowField, k: usize, partial: &[Vec<f64>]) -> Result<Report> {
    let d = w.dim();
    if partial.len() + 1 != d {
        return Err(Error::DimensionMismatch(format!(
            "want {} partial shifts for dimension {d}",
            d - 1
        )));
    }
    if k >= w.times().len() {
        return Err(Error::DimensionMismatch(format!(
            "snapshot {k} out of range"
        )));
    }
    let g = w.grid();
    let counts = g.counts();
    let h = g.spacing();
    // Sweep the free shift across every lattice offset that can connect
    // two support cells; outside that range the integrand is identically
    // zero, so the lattice sum is the exact integral over all shifts.
    let reach: Vec<isize> = counts.iter().map(|&c| c as isize).collect();
    let sweep: usize = reach.iter().map(|&r| (2 * r - 1) as usize).product();
    let budget = sweep * g.cells() * (d + 1);
    if budget > crate::grid::CELL_BUDGET {
        return Err(Error::GridTooLarge {
            cells: budget,
            budget: crate::grid::CELL_BUDGET,
        });
    }
    let measure = g.cell_volume();
    let mut lhs = 0.0;
    let mut off: Vec<isize> = reach.iter().map(|&r| -(r - 1)).collect();
    loop {
        let shift: Vec<f64> = (0..d).map(|a| off[a] as f64 * h[a]).collect();
        let mut others = partial.to_vec();
        others.push(shift);
        let set = ShiftSet::new(d, others)?;
        let hval = functional_h(w, k, &set)?;
        lhs += hval.powi(d as i32) * measure;
        let mut a = d;
        let mut done = true;
        while a > 0 {
            a -= 1;
            off[a] += 1;
            if off[a] < reach[a] {
                done = false;
                break;
            }
            off[a] = -(reach[a] - 1);
        }
        if done {
            break;
        }
    }
    let s = summary(w);
    let rhs = s.m * s.e0.powi(d as i32);
    let extra = format!("{};t={};sweep={}", summary_extra(&s), w.times()[k], sweep);
    Ok(Report::new(
        "gas-direct",
        lhs,
        rhs,
        admissibility_status(&s),
        w.fingerprint(),
        g.metadata(),
        extra,
    ))
}

/// Galilean boost: each snapshot is advected by t * boost and the boost
/// velocity is added on occupied cells. Lattice-aligned advections are
/// applied as exact cell rolls; anything else is deposited with a
/// conservative linear (cloud-in-cell) split of mass, momentum, and
/// internal energy, with pressure carried as a mass-weighted average.
/// Mass advected outside the box is dropped, which the summary will then
/// flag as inadmissible.
pub fn galilean_boost(w: &FlowField, boost: &[f64]) -> Result<FlowField> {
    let d = w.dim();
    if boost.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "boost dimension {} on a {d}-dimensional flow",
            boost.len()
        )));
    }
    let g = w.grid();
    let h = g.spacing();
    let counts = g.counts();
    let cells = g.cells();
    let mut snaps = Vec::with_capacity(w.times().len());
    let mut multi = vec![0usize; d];
    for (k, snap) in w.snapshots().iter().enumerate() {
        let t = w.times()[k];
        let frac: Vec<f64> = (0..d).map(|a| t * boost[a] / h[a]).collect();
        let aligned = frac.iter().all(|f| (f - f.round()).abs() <= 1e-9);
        let mut out = Snapshot::zeros(cells, d);
        if aligned {
            let off: Vec<isize> = frac.iter().map(|f| f.round() as isize).collect();
            'roll: for c in 0..cells {
                if snap.rho[c] == 0.0 {
                    continue;
                }
                g.multi_into(c, &mut multi);
                let mut target = vec![0usize; d];
                for a in 0..d {
                    let s = multi[a] as isize + off[a];
                    if s < 0 || s as usize >= counts[a] {
                        continue 'roll;
                    }
                    target[a] = s as usize;
                }
                let tc = g.linear(&target);
                out.rho[tc] = snap.rho[c];
                out.p[tc] = snap.p[c];
                out.e[tc] = snap.e[c];
                for a in 0..d {
                    out.u[tc * d + a] = snap.u[c * d + a] + boost[a];
                }
            }
        } else {
            // Conservative deposit of rho, rho u, rho e; pressure is
            // averaged with mass weights.
            let mut rho_p = vec![0.0; cells];
            for c in 0..cells {
                let rho = snap.rho[c];
                if rho == 0.0 {
                    continue;
                }
                g.multi_into(c, &mut multi);
                // Position in fractional cell coordinates after advection.
                let pos: Vec<f64> = (0..d).map(|a| multi[a] as f64 + frac[a]).collect();
                let base: Vec<isize> = pos.iter().map(|p| p.floor() as isize).collect();
                let fw: Vec<f64> = (0..d).map(|a| pos[a] - base[a] as f64).collect();
                for corner in 0..(1usize << d) {
                    let mut weight = 1.0;
                    let mut target = vec![0usize; d];
                    let mut inside = true;
                    for a in 0..d {
                        let hi = (corner >> a) & 1 == 1;
                        weight *= if hi { fw[a] } else { 1.0 - fw[a] };
                        let idx = base[a] + if hi { 1 } else { 0 };
                        if idx < 0 || idx as usize >= counts[a] {
                            inside = false;
                            break;
                        }
                        target[a] = idx as usize;
                    }
                    if !inside || weight == 0.0 {
                        continue;
                    }
                    let tc = g.linear(&target);
                    out.rho[tc] += weight * rho;
                    rho_p[tc] += weight * rho * snap.p[c];
                    out.e[tc] += weight * rho * snap.e[c];
                    for a in 0..d {
                        out.u[tc * d + a] += weight * rho * (snap.u[c * d + a] + boost[a]);
                    }
                }
            }
            for c in 0..cells {
                if out.rho[c] > 0.0 {
                    for a in 0..d {
                        out.u[c * d + a] /= out.rho[c];
                    }
                    out.e[c] /= out.rho[c];
                    out.p[c] = rho_p[c] / out.rho[c];
                }
            }
        }
        snaps.push(out);
    }
    FlowField::new(g.clone(), w.times().to_vec(), snaps)
}

/// Parabolic scaling: positions and velocities scale with mu, pressure
/// and specific internal energy with mu^2, density and times unchanged.
pub fn scaling_transform(w: &FlowField, mu: f64) -> Result<FlowField> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Format(format!("scale factor {mu} must be positive")));
    }
    let g = w.grid();
    let origin: Vec<f64> = g.origin().iter().map(|x| x * mu).collect();
    let spacing: Vec<f64> = g.spacing().iter().map(|x| x * mu).collect();
    let scaled = Grid::new(origin, spacing, g.counts().to_vec())?;
    let mu2 = mu * mu;
    let snaps = w
        .snapshots()
        .iter()
        .map(|s| Snapshot {
            rho: s.rho.clone(),
            u: s.u.iter().map(|v| v * mu).collect(),
            p: s.p.iter().map(|v| v * mu2).collect(),
            e: s.e.iter().map(|v| v * mu2).collect(),
        })
        .collect();
    FlowField::new(scaled, w.times().to_vec(), snaps)
}

/// Space-time tensor of defect corrections: a positive semidefinite d x d
/// matrix per space-time cell, stored with the time axis first like the
/// stress tensor itself.
pub type DefectField = TensorField;

/// Builds a defect field on the space-time lattice of a flow from a
/// pointwise matrix function of (t, y).
pub fn defect_from_fn<F: FnMut(f64, &[f64]) -> SymMat>(
    w: &FlowField,
    mut f: F,
) -> Result<DefectField> {
    let dt = w.uniform_dt()?;
    let d = w.dim();
    let g = w.grid();
    let mut origin = vec![w.times()[0] - 0.5 * dt];
    origin.extend_from_slice(g.origin());
    let mut spacing = vec![dt];
    spacing.extend_from_slice(g.spacing());
    let mut counts = vec![w.times().len()];
    counts.extend_from_slice(g.counts());
    let st = Grid::new(origin, spacing, counts)?;
    let cells = g.cells();
    let mut out = TensorField::zeros(st, d)?;
    let mut x = vec![0.0; d];
    for (k, &t) in w.times().iter().enumerate() {
        for c in 0..cells {
            g.center_into(c, &mut x);
            let m = f(t, &x);
            out.set(k * cells + c, &m);
        }
    }
    out.set_time_axis(true);
    Ok(out)
}

/// Kernel bound on the defect determinant: the anisotropic kernel of the
/// pressure bound weighs (det Sigma)^{1/d} instead, with the reference
/// energy augmented by half the initial trace integral of Sigma. Energy
/// admissibility is audited with the same augmented budget.
pub fn functional_defect(
    w: &FlowField,
    sigma: &DefectField,
    tau: f64,
    eta: &[f64],
) -> Result<Report> {
    let d = w.dim();
    if eta.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "anchor dimension {} on a {d}-dimensional flow",
            eta.len()
        )));
    }
    if sigma.matrix_dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "defect blocks have dimension {}, want {d}",
            sigma.matrix_dim()
        )));
    }
    if !sigma.is_certified_psd() {
        return Err(Error::NotPsdField("defect field".into()));
    }
    let dt = w.uniform_dt()?;
    let g = w.grid();
    let sg = sigma.grid();
    if sg.dim() != d + 1
        || sg.counts()[0] != w.times().len()
        || sg.counts()[1..] != *g.counts()
        || (sg.spacing()[0] - dt).abs() > 1e-9 * dt
    {
        return Err(Error::GridMismatch(
            "defect field does not live on the flow's space-time lattice".into(),
        ));
    }
    let cells = g.cells();
    let vol = g.cell_volume();
    // Augmented energy budget: flow energy plus half the trace integral.
    let trace_slice = |k: usize| -> f64 {
        let mut tr = 0.0;
        for c in 0..cells {
            tr += sigma.get(k * cells + c).trace();
        }
        0.5 * tr * vol
    };
    let s = summary(w);
    let e_aug0 = s.e0 + trace_slice(0);
    if e_aug0 <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let mut overshoot = 0.0f64;
    for k in 0..w.times().len() {
        overshoot = overshoot.max(s.energy[k] + trace_slice(k) - e_aug0);
    }
    let admissible =
        s.admissible || overshoot <= ENERGY_OVERSHOOT_TOL * e_aug0.max(f64::MIN_POSITIVE);
    // Snap the anchor like the pressure kernel does.
    let t0 = w.times()[0] - 0.5 * dt;
    let tau = t0 + ((tau - t0) / dt).round() * dt;
    let eta = g.snap_to_dual(eta);
    let wt = w.time_weights();
    let inv_d = 1.0 / d as f64;
    let inner_pow = (d as f64 + 2.0) / 2.0;
    let mut lhs = 0.0;
    let mut clamped = 0usize;
    let mut x = vec![0.0; d];
    for k in 0..w.times().len() {
        let t = w.times()[k] - tau;
        let t2 = t * t;
        let mut slice = 0.0;
        for c in 0..cells {
            let m = sigma.get(k * cells + c);
            let det = m.det();
            let det = if det < 0.0 {
                if det < -crate::field::DET_NOISE_REL * (1.0 + m.frobenius().powi(d as i32)) {
                    clamped += 1;
                }
                0.0
            } else {
                det
            };
            if det == 0.0 {
                continue;
            }
            g.center_into(c, &mut x);
            let mut y2 = 0.0;
            for a in 0..d {
                let dy = x[a] - eta[a];
                y2 += dy * dy;
            }
            let denom = e_aug0 * t2 + s.m * y2;
            if denom <= 0.0 {
                continue;
            }
            slice += (t2 / denom.powf(inner_pow)).powf(inv_d) * det.powf(inv_d);
        }
        lhs += wt[k] * slice * vol;
    }
    let rhs = e_aug0.powf((d as f64 - 2.0) / (2.0 * d as f64));
    let status = if !admissible {
        Status::InadmissibleInput
    } else if clamped > 0 {
        Status::ClampedCells(clamped)
    } else {
        Status::Ok
    };
    let extra = format!(
        "{};e_aug={};overshoot={:e};tau={}",
        summary_extra(&s),
        e_aug0,
        overshoot,
        tau
    );
    Ok(Report::new(
        "gas-defect",
        lhs,
        rhs,
        status,
        w.fingerprint(),
        g.metadata(),
        extra,
    ))
}
