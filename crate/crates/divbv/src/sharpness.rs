//! Sharpness probes: maximize the fundamental-bound ratio over small
//! parametric families of PSD tensor fields.
//!
//! The continuum optimizer of the bound is the sharp ball indicator, so
//! well-behaved families should climb toward the ball benchmark from
//! below. Feature sizes are clamped to at least two cells; a probe whose
//! optimum pins against that floor is reported with a `below-resolution`
//! status since the true optimum sits beneath the resolvable scale.

use crate::error::{Error, Result};
use crate::field::{radial_profile_tensor, smoothstep_down, verify_fund, TensorField};
use crate::grid::Grid;
use crate::report::{Report, Status};
use crate::symmat::SymMat;

/// Parametric families the probe can search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Radially smoothed ball indicator times the identity:
    /// parameters (radius, ramp width).
    RadialSmoothedIndicator,
    /// Isotropic Gaussian profile times the identity: parameter (sigma).
    GaussianProfiles,
    /// Smoothed indicator of an axis-aligned ellipsoid: parameters
    /// (radius, ramp width, aspect_1..aspect_{n-1}) with the last axis
    /// fixed to one.
    AnisotropicEllipsoids,
}

impl Family {
    #[must_use]
    pub fn name(&self) -> &'static str {
        match self {
            Family::RadialSmoothedIndicator => "radial-smoothed-indicator",
            Family::GaussianProfiles => "gaussian-profiles",
            Family::AnisotropicEllipsoids => "anisotropic-ellipsoids",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "radial-smoothed-indicator" => Ok(Family::RadialSmoothedIndicator),
            "gaussian-profiles" => Ok(Family::GaussianProfiles),
            "anisotropic-ellipsoids" => Ok(Family::AnisotropicEllipsoids),
            _ => Err(Error::Format(format!("unknown family `{name}`"))),
        }
    }

    #[must_use]
    pub fn param_names(&self, dim: usize) -> Vec<String> {
        match self {
            Family::RadialSmoothedIndicator => vec!["radius".into(), "width".into()],
            Family::GaussianProfiles => vec!["sigma".into()],
            Family::AnisotropicEllipsoids => {
                let mut names = vec!["radius".into(), "width".into()];
                for a in 0..dim - 1 {
                    names.push(format!("aspect{}", a + 1));
                }
                names
            }
        }
    }

    /// Reasonable center-of-box starting parameters.
    #[must_use]
    pub fn start(&self, grid: &Grid) -> Vec<f64> {
        let half = half_extent(grid);
        match self {
            Family::RadialSmoothedIndicator => vec![0.5 * half, 0.12 * half],
            Family::GaussianProfiles => vec![0.25 * half],
            Family::AnisotropicEllipsoids => {
                let mut p = vec![0.45 * half, 0.12 * half];
                p.extend(std::iter::repeat_n(0.8, grid.dim() - 1));
                p
            }
        }
    }

    /// Projects raw optimizer coordinates into the feasible box: feature
    /// sizes at least two cells, supports inside the box.
    #[must_use]
    pub fn clamp(&self, grid: &Grid, params: &[f64]) -> Vec<f64> {
        let half = half_extent(grid);
        let floor = resolution_floor(grid);
        let mut p = params.to_vec();
        match self {
            Family::RadialSmoothedIndicator | Family::AnisotropicEllipsoids => {
                p[0] = p[0].clamp(3.0 * floor, 0.9 * half);
                p[1] = p[1].clamp(floor, 0.9 * p[0]);
                for a in &mut p[2..] {
                    *a = a.clamp(0.25, 1.0);
                }
            }
            Family::GaussianProfiles => {
                p[0] = p[0].clamp(floor, 0.3 * half);
            }
        }
        p
    }

    /// Builds the field at (already clamped) parameters, centered at the
    /// box center.
    pub fn build(&self, grid: &Grid, params: &[f64]) -> Result<TensorField> {
        let n = grid.dim();
        let names = self.param_names(n);
        if params.len() != names.len() {
            return Err(Error::DimensionMismatch(format!(
                "family {} wants {} parameters, got {}",
                self.name(),
                names.len(),
                params.len()
            )));
        }
        let center = box_center(grid);
        match self {
            Family::RadialSmoothedIndicator => {
                radial_profile_tensor(grid, &center, params[0], params[1])
            }
            Family::GaussianProfiles => {
                let s2 = 2.0 * params[0] * params[0];
                let mut out = TensorField::from_fn(grid.clone(), n, |x| {
                    let r2: f64 = x
                        .iter()
                        .zip(&center)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    SymMat::identity(n)
                        .expect("dimension checked")
                        .scale((-r2 / s2).exp())
                })?;
                out.certify_psd(0.0)?;
                Ok(out)
            }
            Family::AnisotropicEllipsoids => {
                let r = params[0];
                let w = params[1];
                let mut aspects = params[2..].to_vec();
                aspects.push(1.0);
                let mut out = TensorField::from_fn(grid.clone(), n, |x| {
                    let q: f64 = x
                        .iter()
                        .zip(&center)
                        .zip(&aspects)
                        .map(|((a, b), s)| {
                            let d = (a - b) / s;
                            d * d
                        })
                        .sum::<f64>()
                        .sqrt();
                    let f = smoothstep_down((q - (r - w)) / w);
                    SymMat::identity(n).expect("dimension checked").scale(f)
                })?;
                out.certify_psd(0.0)?;
                Ok(out)
            }
        }
    }
}

fn half_extent(grid: &Grid) -> f64 {
    (0..grid.dim())
        .map(|a| 0.5 * grid.spacing()[a] * grid.counts()[a] as f64)
        .fold(f64::INFINITY, f64::min)
}

fn resolution_floor(grid: &Grid) -> f64 {
    2.0 * grid.spacing().iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

fn box_center(grid: &Grid) -> Vec<f64> {
    (0..grid.dim())
        .map(|a| grid.origin()[a] + 0.5 * grid.spacing()[a] * grid.counts()[a] as f64)
        .collect()
}

/// One objective evaluation along the probe.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub params: Vec<f64>,
    pub lhs: f64,
    pub rhs_scale: f64,
    pub ratio: f64,
}

/// Outcome of a sharpness probe.
#[derive(Clone, Debug)]
pub struct ProbeResult {
    pub family: Family,
    pub params: Vec<f64>,
    pub report: Report,
    pub trace: Vec<TraceRow>,
}

/// CSV rendering of a probe trace: the parameter columns, then the two
/// sides and their ratio, then the grid stamp.
#[must_use]
pub fn trace_csv(family: Family, grid: &Grid, trace: &[TraceRow]) -> String {
    let mut out = String::from("family");
    for name in family.param_names(grid.dim()) {
        out.push(',');
        out.push_str(&name);
    }
    out.push_str(",lhs,rhs_scale,ratio,grid\n");
    let stamp = grid.metadata().replace(',', ";");
    for row in trace {
        out.push_str(family.name());
        for p in &row.params {
            out.push_str(&format!(",{p}"));
        }
        out.push_str(&format!(
            ",{},{},{},{}\n",
            row.lhs, row.rhs_scale, row.ratio, stamp
        ));
    }
    out
}

/// Maximizes the fundamental-bound ratio over the family with a
/// Nelder-Mead simplex, restarted once around the incumbent. Every
/// evaluation lands in the trace. Deterministic for a given start.
pub fn probe(grid: &Grid, family: Family, max_evals: usize) -> Result<ProbeResult> {
    let start = family.start(grid);
    probe_from(grid, family, &start, max_evals)
}

pub fn probe_from(
    grid: &Grid,
    family: Family,
    start: &[f64],
    max_evals: usize,
) -> Result<ProbeResult> {
    let mut trace: Vec<TraceRow> = Vec::new();
    let budget = max_evals.max(20);
    {
        let mut objective = |params: &[f64]| -> Result<f64> {
            let p = family.clamp(grid, params);
            let field = family.build(grid, &p)?;
            let rep = verify_fund(&field)?;
            trace.push(TraceRow {
                params: p,
                lhs: rep.lhs,
                rhs_scale: rep.rhs_scale,
                ratio: rep.ratio,
            });
            Ok(rep.ratio)
        };
        let step: Vec<f64> = start.iter().map(|p| 0.25 * p.abs().max(1e-3)).collect();
        let first = nelder_mead(&mut objective, start, &step, budget / 2)?;
        // Restart around the incumbent with a tighter simplex.
        let tight: Vec<f64> = step.iter().map(|s| 0.25 * s).collect();
        nelder_mead(&mut objective, &first, &tight, budget / 2)?;
    }
    let best = trace
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.ratio.total_cmp(&b.1.ratio))
        .map(|(i, _)| i)
        .expect("at least one evaluation");
    let best_params = trace[best].params.clone();
    let field = family.build(grid, &best_params)?;
    let mut report = verify_fund(&field)?;
    report.estimate = format!("sharpness-{}", family.name());
    if pinned_below_resolution(family, grid, &best_params) && report.status == Status::Ok {
        report.status = Status::BelowResolution;
    }
    report.extra = format!(
        "{};params={}",
        report.extra,
        best_params
            .iter()
            .map(|p| format!("{p}"))
            .collect::<Vec<_>>()
            .join("|")
    );
    Ok(ProbeResult {
        family,
        params: best_params,
        report,
        trace,
    })
}

/// True when the optimum sits against the two-cell feature floor, so the
/// family's true maximizer is sharper than the grid can represent.
fn pinned_below_resolution(family: Family, grid: &Grid, params: &[f64]) -> bool {
    let floor = resolution_floor(grid);
    let feature = match family {
        Family::RadialSmoothedIndicator | Family::AnisotropicEllipsoids => params[1],
        Family::GaussianProfiles => params[0],
    };
    feature <= floor * (1.0 + 1e-9)
}

/// Samples the ratio on a 2-d parameter slice; returns CSV rows
/// `pa,pb,lhs,rhs_scale,ratio`.
pub fn ratio_surface(
    grid: &Grid,
    family: Family,
    base: &[f64],
    axis_a: (usize, f64, f64),
    axis_b: (usize, f64, f64),
    steps: usize,
) -> Result<String> {
    let names = family.param_names(grid.dim());
    let (ia, a_lo, a_hi) = axis_a;
    let (ib, b_lo, b_hi) = axis_b;
    if ia >= names.len() || ib >= names.len() || ia == ib {
        return Err(Error::DimensionMismatch(format!(
            "surface axes {ia}/{ib} out of range for {} parameters",
            names.len()
        )));
    }
    if steps < 2 {
        return Err(Error::Format("surface wants at least two steps".into()));
    }
    let mut out = format!("{},{},lhs,rhs_scale,ratio\n", names[ia], names[ib]);
    for i in 0..steps {
        for j in 0..steps {
            let mut p = base.to_vec();
            p[ia] = a_lo + (a_hi - a_lo) * i as f64 / (steps - 1) as f64;
            p[ib] = b_lo + (b_hi - b_lo) * j as f64 / (steps - 1) as f64;
            let p = family.clamp(grid, &p);
            let field = family.build(grid, &p)?;
            let rep = verify_fund(&field)?;
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p[ia], p[ib], rep.lhs, rep.rhs_scale, rep.ratio
            ));
        }
    }
    Ok(out)
}

/// Simplex maximization with standard coefficients; returns the best
/// point seen. The objective is fallible so build errors abort cleanly.
fn nelder_mead<F>(f: &mut F, start: &[f64], step: &[f64], max_evals: usize) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let q = start.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(q + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(q + 1);
    pts.push(start.to_vec());
    vals.push(f(start)?);
    let mut evals = 1usize;
    for k in 0..q {
        let mut p = start.to_vec();
        p[k] += step[k];
        vals.push(f(&p)?);
        pts.push(p);
        evals += 1;
    }
    while evals < max_evals {
        // Order descending by value (we maximize).
        let mut order: Vec<usize> = (0..=q).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        let best = order[0];
        let worst = order[q];
        let second_worst = order[q - 1];
        // Centroid of all but the worst.
        let mut centroid = vec![0.0; q];
        for (i, p) in pts.iter().enumerate() {
            if i == worst {
                continue;
            }
            for a in 0..q {
                centroid[a] += p[a] / q as f64;
            }
        }
        let blend = |t: f64| -> Vec<f64> {
            (0..q)
                .map(|a| centroid[a] + t * (centroid[a] - pts[worst][a]))
                .collect()
        };
        let reflected = blend(1.0);
        let fr = f(&reflected)?;
        evals += 1;
        if fr > vals[best] {
            let expanded = blend(2.0);
            let fe = f(&expanded)?;
            evals += 1;
            if fe > fr {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
        } else if fr > vals[second_worst] {
            pts[worst] = reflected;
            vals[worst] = fr;
        } else {
            let contracted = blend(-0.5);
            let fc = f(&contracted)?;
            evals += 1;
            if fc > vals[worst] {
                pts[worst] = contracted;
                vals[worst] = fc;
            } else {
                // Shrink toward the best point.
                let anchor = pts[best].clone();
                for i in 0..=q {
                    if i == best {
                        continue;
                    }
                    for a in 0..q {
                        pts[i][a] = 0.5 * (pts[i][a] + anchor[a]);
                    }
                    vals[i] = f(&pts[i])?;
                    evals += 1;
                    if evals >= max_evals {
                        break;
                    }
                }
            }
        }
        // Converged simplices stop early.
        let spread = vals.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
            - vals.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        if spread.abs() < 1e-12 {
            break;
        }
    }
    let best = (0..=q).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    Ok(pts[best].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ball_sharp_ratio;

    fn grid2(m: usize) -> Grid {
        Grid::from_box(&[-1.0, -1.0], &[1.0, 1.0], &[m, m]).unwrap()
    }

    #[test]
    fn disk_probe_climbs_to_the_ball_benchmark() {
        let g = grid2(96);
        let result = probe(&g, Family::RadialSmoothedIndicator, 120).unwrap();
        let target = ball_sharp_ratio(2).unwrap();
        assert!(
            (result.report.ratio - target).abs() <= 0.08 * target,
            "probe ratio {} vs benchmark {target}",
            result.report.ratio
        );
        assert!(!result.trace.is_empty());
        // The probe must do at least as well as the starting point.
        assert!(result.report.ratio >= result.trace[0].ratio - 1e-12);
    }

    #[test]
    fn gaussian_family_stays_below_the_sharp_benchmark() {
        let g = grid2(64);
        let result = probe(&g, Family::GaussianProfiles, 60).unwrap();
        let target = ball_sharp_ratio(2).unwrap();
        assert!(
            result.report.ratio < target,
            "smooth profiles must not reach the sharp optimum: {} vs {target}",
            result.report.ratio
        );
    }

    #[test]
    fn unit_aspect_ellipsoid_is_the_disk_family() {
        let g = grid2(48);
        let disk = Family::RadialSmoothedIndicator
            .build(&g, &[0.6, 0.1])
            .unwrap();
        let ell = Family::AnisotropicEllipsoids
            .build(&g, &[0.6, 0.1, 1.0])
            .unwrap();
        for (a, b) in disk.values().iter().zip(ell.values()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn squeezed_ellipsoids_lose_ratio() {
        let g = grid2(64);
        let round = verify_fund(
            &Family::AnisotropicEllipsoids
                .build(&g, &[0.55, 0.08, 1.0])
                .unwrap(),
        )
        .unwrap();
        let squeezed = verify_fund(
            &Family::AnisotropicEllipsoids
                .build(&g, &[0.55, 0.08, 0.4])
                .unwrap(),
        )
        .unwrap();
        assert!(squeezed.ratio < round.ratio);
    }

    #[test]
    fn trace_csv_has_one_row_per_evaluation() {
        let g = grid2(32);
        let result = probe(&g, Family::GaussianProfiles, 25).unwrap();
        let csv = trace_csv(result.family, &g, &result.trace);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), result.trace.len() + 1);
        assert!(lines[0].starts_with("family,sigma,lhs"));
        let best = result
            .trace
            .iter()
            .map(|r| r.ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best, result.report.ratio);
    }

    #[test]
    fn ratio_surface_samples_the_requested_slice() {
        let g = grid2(32);
        let csv = ratio_surface(
            &g,
            Family::RadialSmoothedIndicator,
            &[0.5, 0.1],
            (0, 0.3, 0.7),
            (1, 0.06, 0.2),
            4,
        )
        .unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 16);
        assert!(lines[0].starts_with("radius,width"));
    }
}
