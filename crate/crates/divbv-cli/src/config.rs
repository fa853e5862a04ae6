//! Flat key=value run configurations for the flow generators.
//!
//! Lines are `key = value`, `#` starts a comment, later keys win, and
//! every key can be overridden from the command line with `--set`.

use anyhow::{anyhow, bail, Context, Result};
use divbv::flows::{dust_flow, fv_solve, sod_tube, FvConfig};
use divbv::gas::FlowField;
use divbv::grid::Grid;
use divbv::scalar::ScalarField;
use std::collections::BTreeMap;
use std::path::Path;

pub struct Config {
    map: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected key = value", lineno + 1))?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("--set wants key=value, got {item:?}"))?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { map })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| anyhow!("config key `{key}` is required"))
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .with_context(|| format!("config key `{key}`: bad number {s:?}")),
        }
    }

    fn number_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn integer_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<usize>()
                .with_context(|| format!("config key `{key}`: bad integer {s:?}")),
        }
    }

    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => parse_floats(s)
                .map(Some)
                .with_context(|| format!("config key `{key}`")),
        }
    }

    pub fn out(&self) -> Option<&str> {
        self.get("out")
    }
}

pub fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {t:?}"))
        })
        .collect()
}

/// Finite-volume run: the only built-in initial state is the two-state
/// membrane tube surrounded by vacuum.
pub fn run_fv(cfg: &Config) -> Result<FlowField> {
    match cfg.require("init")? {
        "sod" => {}
        other => bail!("unknown fv init {other:?} (supported: sod)"),
    }
    let cells = cfg.integer_or("cells", 1024)?;
    let box_half = cfg.number_or("box_half", 3.0)?;
    let init = sod_tube(cells, box_half)?;
    let fvcfg = FvConfig {
        gamma: cfg.number_or("gamma", 1.4)?,
        cfl: cfg.number_or("cfl", 0.45)?,
        t_end: cfg.number_or("t_end", 0.15)?,
        fixed_dt: cfg.number("fixed_dt")?,
        snapshot_every: cfg.integer_or("snapshot_every", 300)?,
    };
    Ok(fv_solve(&init, &fvcfg)?)
}

/// Pressureless transport run: a ball of dust with an affine velocity
/// field u(x) = M x + b, sampled at the requested times.
pub fn run_dust(cfg: &Config) -> Result<FlowField> {
    let dim = cfg.integer_or("dim", 1)?;
    let cells = cfg.integer_or("cells", 64)?;
    let box_half = cfg.number_or("box_half", 2.0)?;
    let lo = vec![-box_half; dim];
    let hi = vec![box_half; dim];
    let grid = Grid::from_box(&lo, &hi, &vec![cells; dim])?;
    let center = cfg.floats("center")?.unwrap_or_else(|| vec![0.0; dim]);
    if center.len() != dim {
        bail!("center has {} coordinates in dimension {dim}", center.len());
    }
    let radius = cfg.number_or("radius", 0.5)?;
    let subsamples = cfg.integer_or("subsamples", 4)?;
    let rho0 = ScalarField::ball_indicator(grid, &center, radius, subsamples);

    let matrix = cfg.floats("velocity_matrix")?.unwrap_or_else(|| vec![0.0; dim * dim]);
    if matrix.len() != dim * dim {
        bail!(
            "velocity_matrix has {} entries, want {} (row-major)",
            matrix.len(),
            dim * dim
        );
    }
    let shift = cfg.floats("velocity_const")?.unwrap_or_else(|| vec![0.0; dim]);
    if shift.len() != dim {
        bail!("velocity_const has {} coordinates in dimension {dim}", shift.len());
    }
    let times = cfg
        .floats("times")?
        .ok_or_else(|| anyhow!("config key `times` is required"))?;
    let u0 = move |x: &[f64]| -> Vec<f64> {
        (0..dim)
            .map(|i| {
                shift[i]
                    + (0..dim)
                        .map(|j| matrix[i * dim + j] * x[j])
                        .sum::<f64>()
            })
            .collect()
    };
    Ok(dust_flow(&rho0, u0, &times)?)
}
