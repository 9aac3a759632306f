//! Task pipelines: each consumes the parsed config and writes figure-ready
//! data files plus a manifest. Data goes to files only; progress lines go
//! to standard error.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use longrange::config::{RunConfig, Task};
use longrange::lattice::{build_coupling, LatticeSpec};
use longrange::observables::{
    critical_line, decay_fit, half_chain_sweep, magnetization, rescale_gamma, slope_map,
    susceptibility_analytical, susceptibility_numerical, FIT_R_MIN,
};
use longrange::oracle::{ed_free_energy, ed_kubo_chi};
use longrange::saddle::{
    free_energy_per_site, phi, phi_gradient, solve_homogeneous, solve_multivariate,
    SaddleProblem,
};
use longrange::spectral::{eigendecompose, fourier_eigenvalues, tractability, truncate_modes};
use longrange::{Error, Result};
use sha2::{Digest, Sha256};

pub struct RunContext {
    pub config: RunConfig,
    pub task: Task,
    config_sha256: String,
}

impl RunContext {
    pub fn new(config: RunConfig, task: Task, config_text: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_text.as_bytes());
        let config_sha256 = format!("{:x}", hasher.finalize());
        RunContext { config, task, config_sha256 }
    }

    fn out_path(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    fn write_file(&self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.out_path(name), contents)?;
        eprintln!("[{}] wrote {}", self.task.name(), self.out_path(name).display());
        Ok(())
    }

    fn write_manifest(&self, outputs: &[&str]) -> Result<()> {
        let spec = &self.config.spec;
        let beta = if spec.beta.is_infinite() {
            serde_json::Value::String("inf".into())
        } else {
            serde_json::json!(spec.beta)
        };
        let manifest = serde_json::json!({
            "tool": "lrsolve",
            "version": env!("CARGO_PKG_VERSION"),
            "task": self.task.name(),
            "config_sha256": self.config_sha256,
            "spec": {
                "d": spec.dim,
                "L": spec.linear_size,
                "alpha": spec.alpha,
                "gamma": spec.gamma,
                "omega_z": spec.omega_z,
                "beta": beta,
            },
            "outputs": outputs,
        });
        self.write_file("manifest.json", &format!("{:#}\n", manifest))
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

/// Eigenvalue histograms and the trace-ratio scan per configured alpha.
pub fn run_spectrum(ctx: &RunContext) -> Result<()> {
    let config = &ctx.config;
    let l_values = config.l_values();
    let mut outputs: Vec<String> = Vec::new();
    let mut summary = Vec::new();
    for alpha in config.alpha_values() {
        eprintln!("[spectrum] alpha = {alpha}: L in {:?}", l_values);
        let template = LatticeSpec { alpha, h: None, ..config.spec.clone() };
        let report = tractability(&template, &l_values, config.histogram_bins)?;

        let mut hist = String::from("bin_low,bin_high,count,N\n");
        for h in &report.histograms {
            for (lo, hi, count) in &h.bins {
                writeln!(hist, "{},{},{},{}", fmt(*lo), fmt(*hi), count, h.sites).unwrap();
            }
        }
        let hist_name = format!("spectrum_hist_alpha{alpha:.3}.csv");
        ctx.write_file(&hist_name, &hist)?;
        outputs.push(hist_name);

        let mut trace = String::from("L,N,shift_b,kac_ntilde,trace_ratio\n");
        for e in &report.entries {
            writeln!(
                trace,
                "{},{},{},{},{}",
                e.linear_size,
                e.sites,
                fmt(e.shift),
                fmt(e.kac),
                fmt(e.trace_ratio)
            )
            .unwrap();
        }
        let trace_name = format!("spectrum_trace_alpha{alpha:.3}.csv");
        ctx.write_file(&trace_name, &trace)?;
        outputs.push(trace_name);

        summary.push(serde_json::json!({
            "alpha": alpha,
            "fitted_slope": report.fitted_slope,
            "last_doubling_change": report.last_doubling_change,
            "tractable": report.tractable,
        }));
    }
    ctx.write_file("spectrum_summary.json", &format!("{:#}\n", serde_json::json!(summary)))?;
    outputs.push("spectrum_summary.json".into());
    let refs: Vec<&str> = outputs.iter().map(String::as_str).collect();
    ctx.write_manifest(&refs)
}

/// Critical line and the correlation-decay slope map.
pub fn run_phase(ctx: &RunContext) -> Result<()> {
    let config = &ctx.config;
    let spec = &config.spec;

    // (Γ, T_c) line
    let line_grid = config
        .gamma_grid
        .clone()
        .unwrap_or_else(|| (25..=300).map(|i| i as f64 * 0.01).collect());
    eprintln!("[phase] critical line over {} couplings", line_grid.len());
    let mut line = String::from("gamma,t_c\n");
    for point in critical_line(spec, &line_grid) {
        let tc = match point.t_c {
            Some(t) => fmt(t),
            None => "nan".into(),
        };
        writeln!(line, "{},{}", fmt(point.gamma), tc).unwrap();
    }
    ctx.write_file("critical_line.csv", &line)?;

    // a(Γ, T) slope map
    let slope_gammas = config
        .gamma_grid
        .clone()
        .unwrap_or_else(|| (13..=150).map(|i| i as f64 * 0.02).collect());
    let temps = config.t_values();
    let alphas = config.alpha_values();
    eprintln!(
        "[phase] slope map: {} x {} cells, {} decay rates each",
        slope_gammas.len(),
        temps.len(),
        alphas.len()
    );
    let cells = slope_map(&alphas, &slope_gammas, &temps, spec, config.truncation, &config.solver)?;
    let mut map = String::from("gamma,T,a,b_fit\n");
    for (idx, cell) in cells.iter().enumerate() {
        let gamma = slope_gammas[idx / temps.len()];
        let t = temps[idx % temps.len()];
        match cell {
            Some(c) => {
                writeln!(map, "{},{},{},{}", fmt(gamma), fmt(t), fmt(c.slope_a), fmt(c.intercept_b))
                    .unwrap();
            }
            None => writeln!(map, "{},{},nan,nan", fmt(gamma), fmt(t)).unwrap(),
        }
    }
    ctx.write_file("slope_map.csv", &map)?;
    ctx.write_manifest(&["critical_line.csv", "slope_map.csv"])
}

/// Half-chain susceptibility sweep and distance profiles.
pub fn run_chi(ctx: &RunContext) -> Result<()> {
    let config = &ctx.config;
    let spec = &config.spec;
    let alphas = config.alpha_values();
    let gammas = config.gamma_values();
    eprintln!("[chi] half-chain sweep: {} x {} cells", alphas.len(), gammas.len());
    let rows = half_chain_sweep(&alphas, &gammas, spec, config.truncation, &config.solver)?;
    let mut sweep = String::from("gamma,alpha,chi_half\n");
    for r in &rows {
        writeln!(sweep, "{},{},{}", fmt(r.gamma), fmt(r.alpha), fmt(r.chi_half)).unwrap();
    }
    ctx.write_file("chi_half.csv", &sweep)?;

    // distance profiles per (alpha, Γ)
    eprintln!("[chi] distance profiles");
    let temp = if spec.beta.is_infinite() { 0.0 } else { 1.0 / spec.beta };
    let mut profiles = String::from("r,chi_r,alpha,gamma,T\n");
    for &alpha in &alphas {
        let shaped = LatticeSpec { alpha, h: None, ..spec.clone() };
        let coupling = build_coupling(&shaped)?;
        let full = eigendecompose(&coupling)?;
        let spectral = truncate_modes(&full, config.truncation)?;
        for &gamma in &gammas {
            let scaled = rescale_gamma(&spectral, &shaped, gamma);
            let sized = LatticeSpec { gamma, ..shaped.clone() };
            let problem = SaddleProblem::new(scaled, sized)?;
            let sol = solve_homogeneous(&problem, &config.solver)?;
            let profile = match susceptibility_analytical(&problem, &sol) {
                Ok(set) => set.profile(),
                Err(Error::CriticalPole { .. }) => continue,
                Err(e) => return Err(e),
            };
            for (r, chi_r) in profile.iter().enumerate().skip(1).take(spec.sites() / 2) {
                writeln!(
                    profiles,
                    "{},{},{},{},{}",
                    r,
                    fmt(*chi_r),
                    fmt(alpha),
                    fmt(gamma),
                    fmt(temp)
                )
                .unwrap();
            }
        }
    }
    ctx.write_file("chi_profiles.csv", &profiles)?;
    ctx.write_manifest(&["chi_half.csv", "chi_profiles.csv"])
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    eprintln!("[validate] {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    Check { name, pass, detail }
}

/// Deterministic pseudo-random stream for probe points.
struct Lcg(u64);

impl Lcg {
    fn next_unit(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }
}

/// Exact-diagonalization cross-checks and the invariant suite; returns true
/// when every check passes.
pub fn run_validate(ctx: &RunContext) -> Result<bool> {
    let config = &ctx.config;
    let spec = &config.spec;
    let mut checks: Vec<Check> = Vec::new();

    eprintln!("[validate] coupling and spectral invariants at L = {}", spec.linear_size);
    let coupling = build_coupling(spec)?;
    let full = eigendecompose(&coupling)?;
    let n = spec.sites();

    let min_eig = *full.eigenvalues.last().unwrap();
    checks.push(check(
        "coupling_shift_zeroes_minimum_eigenvalue",
        min_eig.abs() <= 1e-10 * spec.gamma,
        format!("min eigenvalue {min_eig:.3e}"),
    ));
    let top = full.top_eigenvalue();
    checks.push(check(
        "top_eigenvalue_equals_gamma",
        (top - spec.gamma).abs() <= 1e-8 * spec.gamma,
        format!("D_0 = {top:.12}"),
    ));

    let gram = full.modes.t().dot(&full.modes) / n as f64;
    let mut gram_err = 0.0_f64;
    for k in 0..n {
        for l in 0..n {
            let want = if k == l { 1.0 } else { 0.0 };
            gram_err = gram_err.max((gram[(k, l)] - want).abs());
        }
    }
    checks.push(check(
        "mode_orthonormality",
        gram_err <= 1e-10,
        format!("max deviation {gram_err:.3e}"),
    ));

    let mut fourier = fourier_eigenvalues(spec, coupling.shift);
    fourier.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let four_err = full
        .eigenvalues
        .iter()
        .zip(&fourier)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    checks.push(check(
        "fourier_matches_dense_multiset",
        four_err <= 1e-8 * spec.gamma,
        format!("max deviation {four_err:.3e}"),
    ));

    let spectral = truncate_modes(&full, config.truncation)?;
    let problem = SaddleProblem::new(spectral, spec.clone())?;
    let m_modes = problem.mode_count();

    if !spec.zero_temperature() {
        let mut rng = Lcg(0x5eed_1234_abcd);
        let mut worst = 0.0_f64;
        for _ in 0..20 {
            let u: Vec<f64> =
                (0..m_modes).map(|_| rng.next_unit() * 0.5 * spec.gamma).collect();
            let grad = phi_gradient(&u, &problem)?;
            let mut fd = vec![0.0; m_modes];
            let step = 1e-6;
            for (k, fd_k) in fd.iter_mut().enumerate() {
                let mut up = u.clone();
                let mut um = u.clone();
                up[k] += step;
                um[k] -= step;
                *fd_k = (phi(&up, &problem)? - phi(&um, &problem)?) / (2.0 * step);
            }
            let dn: f64 =
                grad.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let gn: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            worst = worst.max(dn / gn.max(1.0));
        }
        checks.push(check(
            "gradient_matches_finite_differences",
            worst <= 1e-6,
            format!("worst relative deviation {worst:.3e}"),
        ));

        let mut u = vec![0.0; m_modes];
        u[0] = 0.37 * spec.gamma;
        let plus = phi(&u, &problem)?;
        u[0] = -u[0];
        let minus = phi(&u, &problem)?;
        checks.push(check(
            "phi_symmetric_under_sign_flip",
            (plus - minus).abs() <= 1e-14 * plus.abs().max(1.0),
            format!("|Δφ| = {:.3e}", (plus - minus).abs()),
        ));

        let hom = solve_homogeneous(&problem, &config.solver)?;
        let multi = solve_multivariate(&problem, None, &config.solver)?;
        let mut dev = (multi.u_bar[0] - hom.u_bar[0]).abs();
        for k in 1..m_modes {
            dev = dev.max(multi.u_bar[k].abs());
        }
        checks.push(check(
            "homogeneous_equals_multivariate",
            dev <= 1e-8,
            format!("max deviation {dev:.3e}"),
        ));

        let m = magnetization(&problem, &hom);
        let mut mf_dev = 0.0_f64;
        for i in 0..n {
            let lhs: f64 =
                (0..m_modes).map(|k| problem.spectral.modes[(i, k)] * hom.u_bar[k]).sum();
            let rhs: f64 = (0..n).map(|j| coupling.matrix[(i, j)] * m[j]).sum();
            mf_dev = mf_dev.max((lhs - rhs).abs());
        }
        checks.push(check(
            "mean_field_identity",
            mf_dev <= 1e-8,
            format!("max deviation {mf_dev:.3e}"),
        ));

        match susceptibility_analytical(&problem, &hom) {
            Ok(set) => {
                let col = susceptibility_numerical(
                    &problem,
                    0,
                    config.fd_step * spec.omega_z.max(1e-12),
                    &config.solver,
                )?;
                let dev = col
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v - set.matrix[(i, 0)]).abs())
                    .fold(0.0_f64, f64::max);
                checks.push(check(
                    "chi_analytical_equals_numerical",
                    dev <= 1e-5,
                    format!("max deviation {dev:.3e}"),
                ));
            }
            Err(Error::CriticalPole { mode, value }) => {
                checks.push(check(
                    "chi_analytical_equals_numerical",
                    false,
                    format!("critical pole at mode {mode} ({value:.3e}); move Γ or β off the transition"),
                ));
            }
            Err(e) => return Err(e),
        }

        // solution dump
        ctx.write_file("saddle_solution.json", &format!("{:#}\n", multi.to_json()))?;
    } else {
        eprintln!("[validate] finite-temperature checks skipped at beta = inf");
    }

    // ED cross-check at alpha = 0 (single retained mode): the saddle value
    // is the N -> infinity limit
    let beta_ed = if spec.zero_temperature() { 2.0 } else { spec.beta };
    let ed_sites = &config.ed_sites;
    eprintln!("[validate] ED sweep at alpha = 0, sites {:?}", ed_sites);
    let mut gaps = Vec::new();
    let mut ed_json = Vec::new();
    for &sites in ed_sites {
        let ed_spec = LatticeSpec::new(1, sites, 0.0, spec.gamma, spec.omega_z, beta_ed)?;
        let res = ed_free_energy(&ed_spec)?;
        let ed_coupling = build_coupling(&ed_spec)?;
        let ed_full = eigendecompose(&ed_coupling)?;
        let ed_spectral = truncate_modes(&ed_full, config.truncation)?;
        let ed_problem = SaddleProblem::new(ed_spectral, ed_spec)?;
        let sol = solve_homogeneous(&ed_problem, &config.solver)?;
        let f_saddle = free_energy_per_site(&ed_problem, &sol);
        gaps.push((res.f_per_site - f_saddle).abs());
        ed_json.push(res.to_json());
    }
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let gap_list: Vec<String> = gaps.iter().map(|g| format!("{g:.3e}")).collect();
    checks.push(check(
        "ed_free_energy_approaches_saddle",
        monotone,
        format!("|f_ED - f_saddle| = [{}]", gap_list.join(", ")),
    ));
    ctx.write_file("ed_results.json", &format!("{:#}\n", serde_json::json!(ed_json)))?;

    let kubo_spec =
        LatticeSpec::new(1, ed_sites[0], 0.0, spec.gamma, spec.omega_z, beta_ed)?;
    let kubo = ed_kubo_chi(&kubo_spec)?;
    let chi = kubo.chi_kubo.as_ref().unwrap();
    let mut sym_dev = 0.0_f64;
    let mut diag_ok = true;
    for i in 0..ed_sites[0] {
        diag_ok &= chi[(i, i)] > 0.0;
        for j in 0..ed_sites[0] {
            sym_dev = sym_dev.max((chi[(i, j)] - chi[(j, i)]).abs());
        }
    }
    checks.push(check(
        "ed_kubo_chi_symmetric_positive_diagonal",
        sym_dev <= 1e-12 && diag_ok,
        format!("symmetry deviation {sym_dev:.3e}"),
    ));

    // profile fit sanity on a synthetic power law
    let synth: Vec<f64> =
        (0..64).map(|r| if r == 0 { 0.0 } else { 2.0 * (r as f64).powf(-0.6) }).collect();
    let fit = decay_fit(&synth, FIT_R_MIN, 32)?;
    checks.push(check(
        "decay_fit_recovers_synthetic_exponent",
        (fit.alpha_chi - 0.6).abs() <= 1e-10 && (fit.amplitude - 2.0).abs() <= 1e-10,
        format!("alpha_chi = {:.12}", fit.alpha_chi),
    ));

    let all_passed = checks.iter().all(|c| c.pass);
    let json: Vec<_> = checks
        .iter()
        .map(|c| serde_json::json!({ "name": c.name, "pass": c.pass, "detail": c.detail }))
        .collect();
    let report = serde_json::json!({ "all_passed": all_passed, "checks": json });
    ctx.write_file("validation.json", &format!("{:#}\n", report))?;
    ctx.write_manifest(&["validation.json", "ed_results.json"])?;
    Ok(all_passed)
}
