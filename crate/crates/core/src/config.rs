//! Flat key-value run configuration.
//!
//! Format: one `key = value` pair per line, `#` starts a comment, arrays are
//! comma lists. `beta` accepts `inf` (or `infinite`) for the
//! zero-temperature path.
//!
//! Documented keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `d`, `L`, `alpha`, `gamma`, `omega_z`, `beta`, `h` | model ([`LatticeSpec`]) |
//! | `alpha_list`, `gamma_grid`, `t_grid`, `l_sequence` | sweep grids |
//! | `gradient_tol`, `max_iterations`, `init_scale`, `hessian_step`, `max_newton` | solver |
//! | `trunc_delta` or `trunc_m` | mode truncation policy |
//! | `task`, `out_dir`, `histogram_bins`, `fd_step`, `ed_sites` | run control |

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::saddle::SolverSettings;
use crate::spectral::TruncationPolicy;

/// Which pipeline the CLI runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    /// Eigenvalue histograms and the tractability scan.
    Spectrum,
    /// Critical line plus the correlation-decay slope map.
    Phase,
    /// Half-chain susceptibility sweep and distance profiles.
    Chi,
    /// Exact-diagonalization cross-checks and the invariant suite.
    Validate,
}

impl Task {
    pub fn parse(s: &str) -> Result<Task> {
        match s {
            "spectrum" => Ok(Task::Spectrum),
            "phase" => Ok(Task::Phase),
            "chi" => Ok(Task::Chi),
            "validate" => Ok(Task::Validate),
            other => Err(Error::Config(format!(
                "unknown task '{other}' (expected spectrum|phase|chi|validate)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Phase => "phase",
            Task::Chi => "chi",
            Task::Validate => "validate",
        }
    }
}

/// Parsed run configuration: model, grids, solver settings and run control.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: LatticeSpec,
    pub alpha_list: Option<Vec<f64>>,
    pub gamma_grid: Option<Vec<f64>>,
    pub t_grid: Option<Vec<f64>>,
    pub l_sequence: Option<Vec<usize>>,
    pub solver: SolverSettings,
    pub truncation: TruncationPolicy,
    pub task: Option<Task>,
    pub out_dir: PathBuf,
    pub histogram_bins: usize,
    /// Central-difference step for numerical susceptibilities, in units of
    /// `ω_z`.
    pub fd_step: f64,
    /// Site counts for the validation task's ED sweep.
    pub ed_sites: Vec<usize>,
}

impl RunConfig {
    /// Parse from config-file text.
    pub fn from_str(text: &str) -> Result<RunConfig> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key '{key}'")));
            }
        }
        Self::from_map(map)
    }

    fn from_map(map: BTreeMap<String, String>) -> Result<RunConfig> {
        let known = [
            "d", "L", "alpha", "gamma", "omega_z", "beta", "h", "alpha_list", "gamma_grid",
            "t_grid", "l_sequence", "gradient_tol", "max_iterations", "init_scale",
            "hessian_step", "max_newton", "trunc_delta", "trunc_m", "task", "out_dir",
            "histogram_bins", "fd_step", "ed_sites",
        ];
        for key in map.keys() {
            if !known.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key '{key}'")));
            }
        }

        let dim = get_usize(&map, "d", 1)?;
        let linear_size = get_usize(&map, "L", 100)?;
        let alpha = get_f64(&map, "alpha", 0.5)?;
        let gamma = get_f64(&map, "gamma", 1.0)?;
        let omega_z = get_f64(&map, "omega_z", 1.0)?;
        let beta = match map.get("beta").map(String::as_str) {
            None => 10.0,
            Some("inf") | Some("infinite") => f64::INFINITY,
            Some(v) => parse_f64("beta", v)?,
        };
        let mut spec = LatticeSpec::new(dim, linear_size, alpha, gamma, omega_z, beta)
            .map_err(|e| Error::Config(e.to_string()))?;
        if let Some(text) = map.get("h") {
            let h = parse_f64_list("h", text)?;
            spec = spec.with_field(h).map_err(|e| Error::Config(e.to_string()))?;
        }

        let alpha_list = parse_opt_grid(&map, "alpha_list")?;
        let gamma_grid = parse_opt_grid(&map, "gamma_grid")?;
        let t_grid = parse_opt_grid(&map, "t_grid")?;
        let l_sequence = match map.get("l_sequence") {
            None => None,
            Some(text) => {
                let seq = parse_usize_list("l_sequence", text)?;
                check_monotone_usize("l_sequence", &seq)?;
                Some(seq)
            }
        };

        let solver = SolverSettings {
            gradient_tol: get_f64(&map, "gradient_tol", 1e-10)?,
            max_iterations: get_usize(&map, "max_iterations", 20_000)?,
            init_scale: get_f64(&map, "init_scale", 0.1)?,
            hessian_step: get_f64(&map, "hessian_step", 1e-5)?,
            max_newton: get_usize(&map, "max_newton", 50)?,
        };

        let truncation = match (map.get("trunc_delta"), map.get("trunc_m")) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either trunc_delta or trunc_m, not both".into()))
            }
            (None, Some(m)) => TruncationPolicy::TargetCount { m: parse_usize("trunc_m", m)? },
            (delta, None) => TruncationPolicy::AbsoluteCutoff {
                delta: match delta {
                    Some(v) => parse_f64("trunc_delta", v)?,
                    None => 1e-3,
                },
            },
        };

        let task = map.get("task").map(|t| Task::parse(t)).transpose()?;
        let out_dir = PathBuf::from(map.get("out_dir").cloned().unwrap_or_else(|| "out".into()));
        let histogram_bins = get_usize(&map, "histogram_bins", 50)?;
        let fd_step = get_f64(&map, "fd_step", 1e-5)?;
        let ed_sites = match map.get("ed_sites") {
            None => vec![8, 10],
            Some(text) => {
                let seq = parse_usize_list("ed_sites", text)?;
                check_monotone_usize("ed_sites", &seq)?;
                seq
            }
        };

        Ok(RunConfig {
            spec,
            alpha_list,
            gamma_grid,
            t_grid,
            l_sequence,
            solver,
            truncation,
            task,
            out_dir,
            histogram_bins,
            fd_step,
            ed_sites,
        })
    }

    /// Interaction decay rates to sweep (defaults to the probe set used in
    /// the figures).
    pub fn alpha_values(&self) -> Vec<f64> {
        self.alpha_list.clone().unwrap_or_else(|| vec![0.1, 0.3, 0.5, 0.7, 0.9])
    }

    /// Interaction strengths to sweep (defaults to a grid around the
    /// transition at `ω_z = 1`, `βω_z = 10`).
    pub fn gamma_values(&self) -> Vec<f64> {
        self.gamma_grid.clone().unwrap_or_else(|| {
            (4..=60).map(|i| i as f64 * 0.01).collect()
        })
    }

    /// Temperatures to sweep.
    pub fn t_values(&self) -> Vec<f64> {
        self.t_grid.clone().unwrap_or_else(|| (1..=30).map(|i| i as f64 * 0.1).collect())
    }

    /// Lattice sizes for the tractability scan.
    pub fn l_values(&self) -> Vec<usize> {
        self.l_sequence.clone().unwrap_or_else(|| vec![50, 100, 200, 400, 800])
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Config(format!("key '{key}': invalid number '{v}'")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>().map_err(|_| Error::Config(format!("key '{key}': invalid integer '{v}'")))
}

fn get_f64(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        Some(v) => parse_f64(key, v),
        None => Ok(default),
    }
}

fn get_usize(map: &BTreeMap<String, String>, key: &str, default: usize) -> Result<usize> {
    match map.get(key) {
        Some(v) => parse_usize(key, v),
        None => Ok(default),
    }
}

fn parse_f64_list(key: &str, text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Err(Error::Config(format!("key '{key}': empty list")));
    }
    text.split(',').map(|v| parse_f64(key, v.trim())).collect()
}

fn parse_usize_list(key: &str, text: &str) -> Result<Vec<usize>> {
    if text.trim().is_empty() {
        return Err(Error::Config(format!("key '{key}': empty list")));
    }
    text.split(',').map(|v| parse_usize(key, v.trim())).collect()
}

fn parse_opt_grid(map: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<f64>>> {
    match map.get(key) {
        None => Ok(None),
        Some(text) => {
            let grid = parse_f64_list(key, text)?;
            if grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config(format!("key '{key}': grid must increase")));
            }
            Ok(Some(grid))
        }
    }
}

fn check_monotone_usize(key: &str, seq: &[usize]) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::Config(format!("key '{key}': empty list")));
    }
    if seq.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("key '{key}': sequence must increase")));
    }
    Ok(())
}
