//! Magnetization, susceptibilities, correlation-decay fits and the phase
//! diagram of the long-range transverse-field Ising chain.
//!
//! Two independent susceptibility routes are provided: the closed Fourier
//! form `χ_k = Y / (1 - 2 Y D_k)` assembled in real space as
//! `χ_ij = Y δ_ij + (1/N) Σ_k λ_ik (χ_k - Y) λ_jk`, and a finite-difference
//! derivative of the magnetization under a single-site field, solved with
//! the multivariate maximizer. Their agreement is a stringent end-to-end
//! check of the whole stack.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{build_coupling, LatticeSpec};
use crate::saddle::{
    fluctuation_y, solve_homogeneous, solve_multivariate, SaddleProblem, SaddleSolution,
    SolverSettings,
};
use crate::spectral::{eigendecompose, truncate_modes, TruncationPolicy};

/// Per-site magnetization `⟨σ^x_i⟩ = tanh(β ε_i) (2 Σ_k λ_ik ū_k + h_i)/ε_i`.
/// At `β = ∞` the thermal factor is 1; sites with vanishing `ε_i` carry no
/// moment.
pub fn magnetization(problem: &SaddleProblem, solution: &SaddleSolution) -> Vec<f64> {
    let beta = problem.spec.beta;
    let (mu, eps) = problem.effective_fields(&solution.u_bar);
    mu.iter()
        .zip(&eps)
        .map(|(&mu_i, &e_i)| {
            if e_i <= 0.0 {
                0.0
            } else if beta.is_infinite() {
                mu_i / e_i
            } else {
                (beta * e_i).tanh() * mu_i / e_i
            }
        })
        .collect()
}

/// Analytical susceptibility: real-space matrix, Fourier modes and the
/// fluctuation weight `Y`.
#[derive(Debug, Clone)]
pub struct ChiSet {
    /// `χ_ij`, `N×N` (1/energy).
    pub matrix: Array2<f64>,
    /// `χ_k` for retained modes (1/energy).
    pub fourier: Vec<f64>,
    /// `Y` at the homogeneous saddle (1/energy).
    pub y: f64,
}

impl ChiSet {
    /// Distance profile `χ_r = χ_{0r}` (valid by translation invariance).
    pub fn profile(&self) -> Vec<f64> {
        self.matrix.row(0).to_vec()
    }
}

/// Closed-form susceptibility at a homogeneous saddle point.
///
/// Fails with [`Error::CriticalPole`] when `1 - 2 Y D_k ≤ 0` for a retained
/// mode, which happens at the transition or past it on an unstable branch.
pub fn susceptibility_analytical(
    problem: &SaddleProblem,
    solution: &SaddleSolution,
) -> Result<ChiSet> {
    if !problem.field_is_uniform() {
        return Err(Error::InvalidSpec(
            "analytical susceptibility requires a uniform field (homogeneous saddle)".into(),
        ));
    }
    let n = problem.sites();
    let m = problem.mode_count();
    let beta = problem.spec.beta;
    let (mu, eps) = problem.effective_fields(&solution.u_bar);
    let y = fluctuation_y(mu[0], eps[0], beta);

    let mut fourier = Vec::with_capacity(m);
    for k in 0..m {
        let d_k = problem.spectral.eigenvalues[k];
        let denom = 1.0 - 2.0 * y * d_k;
        if denom <= 0.0 {
            return Err(Error::CriticalPole { mode: k, value: denom });
        }
        fourier.push(y / denom);
    }

    let lam = &problem.spectral.modes;
    let mut matrix = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for k in 0..m {
                acc += lam[(i, k)] * (fourier[k] - y) * lam[(j, k)];
            }
            let mut v = acc / n as f64;
            if i == j {
                v += y;
            }
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    Ok(ChiSet { matrix, fourier, y })
}

/// Column `j` of the susceptibility by central finite differences:
/// `[m_i(h_j = +δ) - m_i(h_j = -δ)] / 2δ`, each side solved with the
/// multivariate maximizer warm-started from the unperturbed solution
/// (which keeps the broken branch fixed through the transition).
pub fn susceptibility_numerical(
    problem: &SaddleProblem,
    site_j: usize,
    delta_h: f64,
    settings: &SolverSettings,
) -> Result<Vec<f64>> {
    let n = problem.sites();
    if site_j >= n {
        return Err(Error::IndexOutOfRange { index: site_j, sites: n });
    }
    if !(delta_h > 0.0) {
        return Err(Error::InvalidSpec("delta_h must be positive".into()));
    }
    let base = if problem.field_is_uniform() {
        solve_homogeneous(problem, settings)?
    } else {
        solve_multivariate(problem, None, settings)?
    };

    let mut m_plus = None;
    let mut m_minus = None;
    for (sign, out) in [(1.0, &mut m_plus), (-1.0, &mut m_minus)] {
        let mut field = problem.field.clone();
        field[site_j] += sign * delta_h;
        let perturbed = SaddleProblem::with_field(
            problem.spectral.clone(),
            problem.spec.clone(),
            field,
        )?;
        let sol = solve_multivariate(&perturbed, Some(&base.u_bar), settings)?;
        *out = Some(magnetization(&perturbed, &sol));
    }
    let (mp, mm) = (m_plus.unwrap(), m_minus.unwrap());
    Ok(mp
        .iter()
        .zip(&mm)
        .map(|(p, q)| (p - q) / (2.0 * delta_h))
        .collect())
}

/// One cell of the half-chain susceptibility sweep.
#[derive(Debug, Clone)]
pub struct HalfChainPoint {
    pub alpha: f64,
    pub gamma: f64,
    /// `χ_{N/2}`; infinite at a pole cell (exactly critical).
    pub chi_half: f64,
    pub mode_count: usize,
}

/// `χ_{N/2}(Γ; α)` over a grid, from the analytic route at the homogeneous
/// saddle. Pole cells (exactly at criticality) record an infinite value.
pub fn half_chain_sweep(
    alphas: &[f64],
    gammas: &[f64],
    template: &LatticeSpec,
    policy: TruncationPolicy,
    settings: &SolverSettings,
) -> Result<Vec<HalfChainPoint>> {
    if template.dim != 1 || template.linear_size % 2 != 0 {
        return Err(Error::InvalidSpec("half-chain sweep needs d = 1 and even L".into()));
    }
    let half = template.linear_size / 2;
    let mut spectra = Vec::new();
    for &alpha in alphas {
        let shaped = LatticeSpec { alpha, h: None, ..template.clone() };
        let coupling = build_coupling(&shaped)?;
        let full = eigendecompose(&coupling)?;
        spectra.push((shaped, truncate_modes(&full, policy)?));
    }
    // grid cells are independent; order of the collected table is fixed by
    // the cell index
    let cells: Vec<(usize, f64)> = spectra
        .iter()
        .enumerate()
        .flat_map(|(ai, _)| gammas.iter().map(move |&g| (ai, g)))
        .collect();
    cells
        .into_par_iter()
        .map(|(ai, gamma)| {
            let (shaped, spectral) = &spectra[ai];
            // eigenvalues scale linearly in Γ; rescale instead of rebuilding
            let scaled = rescale_gamma(spectral, shaped, gamma);
            let spec = LatticeSpec { gamma, ..shaped.clone() };
            let problem = SaddleProblem::new(scaled, spec)?;
            let sol = solve_homogeneous(&problem, settings)?;
            let chi_half = match susceptibility_analytical(&problem, &sol) {
                Ok(set) => set.matrix[(0, half)],
                Err(Error::CriticalPole { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            Ok(HalfChainPoint {
                alpha: shaped.alpha,
                gamma,
                chi_half,
                mode_count: problem.mode_count(),
            })
        })
        .collect()
}

/// Rescale spectral data from `spec.gamma` to a new interaction strength.
pub fn rescale_gamma(
    spectral: &crate::spectral::SpectralData,
    spec: &LatticeSpec,
    gamma: f64,
) -> crate::spectral::SpectralData {
    let factor = gamma / spec.gamma;
    crate::spectral::SpectralData {
        eigenvalues: spectral.eigenvalues.iter().map(|d| d * factor).collect(),
        mode_count: spectral.mode_count,
        modes: spectral.modes.clone(),
        frequencies: spectral.frequencies.iter().map(|w| w / factor).collect(),
        trace_ratio: spectral.trace_ratio * factor,
    }
}

/// Power-law fit `χ_r = A r^(-α_χ)` over `r ∈ [r_min, r_max]`.
#[derive(Debug, Clone)]
pub struct DecayFit {
    pub alpha_chi: f64,
    pub amplitude: f64,
    pub r_squared: f64,
}

/// Least squares on `ln χ_r` vs `ln r`. The profile is indexed by distance;
/// all values in the window must be positive.
pub fn decay_fit(profile: &[f64], r_min: usize, r_max: usize) -> Result<DecayFit> {
    if r_min < 1 || r_max <= r_min || r_max >= profile.len() {
        return Err(Error::FitDomain(format!(
            "window [{r_min}, {r_max}] invalid for profile of length {}",
            profile.len()
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in r_min..=r_max {
        let v = profile[r];
        if !(v > 0.0) {
            return Err(Error::FitDomain(format!("non-positive χ_r = {v} at r = {r}")));
        }
        xs.push((r as f64).ln());
        ys.push(v.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let p = intercept + slope * x;
            (y - p) * (y - p)
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DecayFit { alpha_chi: -slope, amplitude: intercept.exp(), r_squared })
}

/// Default fit window lower edge: `r < 3` is excluded to suppress lattice
/// effects.
pub const FIT_R_MIN: usize = 3;

/// `α_χ` for one `(α, Γ, β)` cell from the analytic profile fitted over
/// `r ∈ [3, N/2]`.
fn alpha_chi_cell(
    spectral: &crate::spectral::SpectralData,
    shaped: &LatticeSpec,
    gamma: f64,
    settings: &SolverSettings,
) -> Result<DecayFit> {
    let scaled = rescale_gamma(spectral, shaped, gamma);
    let spec = LatticeSpec { gamma, ..shaped.clone() };
    let n = spec.sites();
    let problem = SaddleProblem::new(scaled, spec)?;
    let sol = solve_homogeneous(&problem, settings)?;
    let set = susceptibility_analytical(&problem, &sol)?;
    decay_fit(&set.profile(), FIT_R_MIN, n / 2)
}

/// One `(Γ, T)` cell of the slope map: linear fit `α_χ = a α + b` across
/// the probed interaction decay rates.
#[derive(Debug, Clone)]
pub struct SlopeCell {
    pub gamma: f64,
    pub temperature: f64,
    pub slope_a: f64,
    pub intercept_b: f64,
    /// `α_χ` per probed α (same order as the input list).
    pub alpha_chi: Vec<f64>,
}

/// Fit `α_χ(α)` linearly per `(Γ, T)` cell. Cells where any profile hits a
/// pole or a non-positive fit window are skipped (reported as `None`).
pub fn slope_map(
    alphas: &[f64],
    gammas: &[f64],
    temperatures: &[f64],
    template: &LatticeSpec,
    policy: TruncationPolicy,
    settings: &SolverSettings,
) -> Result<Vec<Option<SlopeCell>>> {
    if alphas.len() < 2 {
        return Err(Error::InvalidSpec("slope map needs at least two alpha values".into()));
    }
    if alphas.iter().any(|&a| a <= 0.0 || a >= template.dim as f64) {
        return Err(Error::InvalidSpec(
            "slope map alphas must lie strictly inside (0, d)".into(),
        ));
    }
    // spectral data per alpha, reused across the (Γ, T) grid
    let mut spectra = Vec::new();
    for &alpha in alphas {
        let shaped = LatticeSpec { alpha, h: None, ..template.clone() };
        let coupling = build_coupling(&shaped)?;
        let full = eigendecompose(&coupling)?;
        spectra.push((shaped, truncate_modes(&full, policy)?));
    }

    let grid: Vec<(f64, f64)> = gammas
        .iter()
        .flat_map(|&g| temperatures.iter().map(move |&t| (g, t)))
        .collect();
    grid.into_par_iter()
        .map(|(gamma, t)| {
            let beta = if t == 0.0 { f64::INFINITY } else { 1.0 / t };
            let mut achi = Vec::with_capacity(alphas.len());
            for (shaped, spectral) in &spectra {
                let adjusted = LatticeSpec { beta, ..shaped.clone() };
                match alpha_chi_cell(spectral, &adjusted, gamma, settings) {
                    Ok(fit) => achi.push(fit.alpha_chi),
                    Err(Error::CriticalPole { .. }) | Err(Error::FitDomain(_)) => {
                        return Ok(None)
                    }
                    Err(e) => return Err(e),
                }
            }
            let (a, b) = linear_fit(alphas, &achi);
            Ok(Some(SlopeCell {
                gamma,
                temperature: t,
                slope_a: a,
                intercept_b: b,
                alpha_chi: achi,
            }))
        })
        .collect()
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

/// A point on the critical line.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub gamma: f64,
    /// `T_c`; `None` when Γ < ω_z/4 (no transition), `Some(0.0)` exactly at
    /// the quantum critical coupling.
    pub t_c: Option<f64>,
}

/// Critical temperature from `ω_z = 4 Γ tanh(β_c ω_z / 2)`, solved by
/// bisection in `β_c` per grid point.
pub fn critical_line(spec: &LatticeSpec, gammas: &[f64]) -> Vec<CriticalPoint> {
    gammas
        .iter()
        .map(|&gamma| CriticalPoint { gamma, t_c: critical_temperature(gamma, spec.omega_z) })
        .collect()
}

/// `T_c(Γ)` for the scalar condition; `None` below the quantum critical
/// coupling `Γ = ω_z/4`, `Some(0.0)` exactly there.
pub fn critical_temperature(gamma: f64, omega_z: f64) -> Option<f64> {
    if gamma < omega_z / 4.0 {
        return None;
    }
    if gamma == omega_z / 4.0 {
        return Some(0.0);
    }
    Some(1.0 / critical_beta(gamma, omega_z))
}

/// `β_c` solving `ω_z = 4 Γ tanh(β_c ω_z / 2)` by bisection (requires
/// `Γ > ω_z/4`).
pub fn critical_beta(gamma: f64, omega_z: f64) -> f64 {
    let g = |beta: f64| 4.0 * gamma * (beta * omega_z / 2.0).tanh() - omega_z;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saddle::SolverSettings;
    use approx::assert_abs_diff_eq;

    fn problem(l: usize, alpha: f64, gamma: f64, omega_z: f64, beta: f64) -> SaddleProblem {
        let spec = LatticeSpec::new(1, l, alpha, gamma, omega_z, beta).unwrap();
        let c = build_coupling(&spec).unwrap();
        let s = eigendecompose(&c).unwrap();
        let s = truncate_modes(&s, TruncationPolicy::default()).unwrap();
        SaddleProblem::new(s, spec).unwrap()
    }

    #[test]
    fn paramagnet_has_zero_magnetization() {
        let p = problem(20, 0.5, 0.2, 1.0, 10.0);
        let sol = solve_homogeneous(&p, &SolverSettings::default()).unwrap();
        for m in magnetization(&p, &sol) {
            assert_eq!(m, 0.0);
        }
    }

    #[test]
    fn zero_temperature_magnetization_matches_mean_field_fixed_point() {
        let p = problem(20, 0.5, 0.5, 1.0, f64::INFINITY);
        let sol = solve_homogeneous(&p, &SolverSettings::default()).unwrap();
        let m = magnetization(&p, &sol);
        // oracle: fixed-point iteration of m = tanh(βε) (4Γm)/(2ε),
        // 2ε = sqrt(ω_z² + 16 Γ² m²), at T = 0
        let gamma = 0.5;
        let wz: f64 = 1.0;
        let mut m_fp: f64 = 0.9;
        for _ in 0..200 {
            let eps = 0.5 * (wz * wz + 16.0 * gamma * gamma * m_fp * m_fp).sqrt();
            m_fp = 4.0 * gamma * m_fp / (2.0 * eps);
        }
        assert_abs_diff_eq!(m[0], m_fp, epsilon = 1e-10);
        // closed form sqrt(1 - ω_z²/(16 Γ²)) = sqrt(3)/2
        assert_abs_diff_eq!(m[0], 0.8660254037844386, epsilon = 1e-8);
        for mi in &m {
            assert_abs_diff_eq!(*mi, m[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn magnetization_vanishes_at_high_temperature() {
        let p = problem(16, 0.5, 1.0, 1.0, 1e-9);
        let sol = solve_homogeneous(&p, &SolverSettings::default()).unwrap();
        for m in magnetization(&p, &sol) {
            assert!(m.abs() < 1e-8);
        }
    }

    #[test]
    fn magnetization_is_bounded() {
        for beta in [0.5, 2.0, 50.0, f64::INFINITY] {
            let p = problem(20, 0.3, 2.0, 1.0, beta);
            let sol = solve_homogeneous(&p, &SolverSettings::default()).unwrap();
            for m in magnetization(&p, &sol) {
                assert!(m.abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn paramagnetic_y_closed_form() {
        // ū = 0: Y = 2 tanh(β ω_z / 2) / ω_z
        let p = problem(20, 0.5, 0.1, 1.3, 2.0);
        let sol = solve_homogeneous(&p, &SolverSettings::default()).unwrap();
        let set = susceptibility_analytical(&p, &sol).unwrap();
        let expect = 2.0 * (2.0_f64 * 1.3 / 2.0).tanh() / 1.3;
        assert_abs_diff_eq!(set.y, expect, epsilon = 1e-14);
    }

    #[test]
    fn chi_matrix_symmetry_positivity_and_sum_rule() {
        let p = problem(30, 0.5, 0.15, 1.0, 10.0);
        let sol = solve_homogeneous(&p, &SolverSettings::default()).unwrap();
        let set = susceptibility_analytical(&p, &sol).unwrap();
        let n = 30;
        for i in 0..n {
            assert!(set.matrix[(i, i)] > 0.0);
            for j in 0..n {
                assert_abs_diff_eq!(set.matrix[(i, j)], set.matrix[(j, i)], epsilon = 1e-10);
            }
        }
        // uniform sum rule: Σ_j χ_ij = χ_{k=0}
        for i in 0..n {
            let s: f64 = (0..n).map(|j| set.matrix[(i, j)]).sum();
            assert_abs_diff_eq!(s, set.fourier[0], epsilon = 1e-8);
        }
        // translation invariance of the profile
        for r in 0..n {
            assert_abs_diff_eq!(
                set.matrix[(0, r)],
                set.matrix[(5, (5 + r) % n)],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn pole_error_on_unstable_branch() {
        // at Γ past Γ_c with the paramagnetic Y forced (ū = 0), the k = 0
        // denominator goes non-positive
        let spec = LatticeSpec::new(1, 20, 0.5, 0.3, 1.0, 10.0).unwrap();
        let c = build_coupling(&spec).unwrap();
        let s = eigendecompose(&c).unwrap();
        let s = truncate_modes(&s, TruncationPolicy::default()).unwrap();
        let p = SaddleProblem::new(s, spec).unwrap();
        let mut sol = solve_homogeneous(&p, &SolverSettings::default()).unwrap();
        assert!(sol.u_bar[0] > 0.0); // broken phase
        sol.u_bar[0] = 0.0; // force the unstable branch
        match susceptibility_analytical(&p, &sol) {
            Err(Error::CriticalPole { mode: 0, value }) => assert!(value <= 0.0),
            other => panic!("expected pole error, got {other:?}"),
        }
    }

    #[test]
    fn chi_zero_mode_grows_toward_criticality() {
        let settings = SolverSettings::default();
        let mut last = 0.0;
        for gamma in [0.10, 0.15, 0.20, 0.24] {
            let p = problem(20, 0.5, gamma, 1.0, 10.0);
            let sol = solve_homogeneous(&p, &settings).unwrap();
            let set = susceptibility_analytical(&p, &sol).unwrap();
            assert!(set.fourier[0] > last);
            last = set.fourier[0];
        }
    }

    #[test]
    fn numerical_chi_matches_analytical_column() {
        let p = problem(30, 0.5, 0.1, 1.0, 10.0);
        let settings = SolverSettings::default();
        let sol = solve_homogeneous(&p, &settings).unwrap();
        let set = susceptibility_analytical(&p, &sol).unwrap();
        let col = susceptibility_numerical(&p, 0, 1e-5, &settings).unwrap();
        for i in 0..30 {
            assert_abs_diff_eq!(col[i], set.matrix[(i, 0)], epsilon = 1e-5);
        }
    }

    #[test]
    fn numerical_chi_respects_translation_invariance() {
        let p = problem(16, 0.5, 0.1, 1.0, 5.0);
        let settings = SolverSettings::default();
        let col0 = susceptibility_numerical(&p, 0, 1e-5, &settings).unwrap();
        let col3 = susceptibility_numerical(&p, 3, 1e-5, &settings).unwrap();
        for i in 0..16 {
            assert_abs_diff_eq!(col3[(i + 3) % 16], col0[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn numerical_chi_central_difference_order() {
        // halving δ changes the quotient by O(δ²)
        let p = problem(12, 0.5, 0.1, 1.0, 5.0);
        let settings = SolverSettings::default();
        let c1 = susceptibility_numerical(&p, 0, 2e-4, &settings).unwrap();
        let c2 = susceptibility_numerical(&p, 0, 1e-4, &settings).unwrap();
        let d: f64 = c1
            .iter()
            .zip(&c2)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-6, "difference {d} not O(δ²)");
    }

    #[test]
    fn decay_fit_recovers_exact_power_law() {
        let n = 64;
        let mut profile = vec![0.0; n];
        for (r, p) in profile.iter_mut().enumerate().skip(1) {
            *p = 3.0 * (r as f64).powf(-0.7);
        }
        let fit = decay_fit(&profile, 3, 32).unwrap();
        assert_abs_diff_eq!(fit.alpha_chi, 0.7, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.amplitude, 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn decay_fit_rejects_bad_windows() {
        let profile = vec![1.0, 0.5, -0.1, 0.2];
        assert!(matches!(decay_fit(&profile, 1, 3), Err(Error::FitDomain(_))));
        assert!(decay_fit(&profile, 0, 3).is_err());
        assert!(decay_fit(&profile, 2, 9).is_err());
    }

    #[test]
    fn half_chain_sweep_peaks_at_critical_coupling_for_all_alphas() {
        let template = LatticeSpec::new(1, 100, 0.5, 1.0, 1.0, 10.0).unwrap();
        let alphas = [0.1, 0.5, 0.9];
        let gammas: Vec<f64> = (5..60).map(|i| i as f64 * 0.01).collect();
        let rows = half_chain_sweep(
            &alphas,
            &gammas,
            &template,
            TruncationPolicy::default(),
            &SolverSettings::default(),
        )
        .unwrap();
        let gamma_c = 0.25 / (5.0_f64).tanh();
        for &alpha in &alphas {
            let peak = rows
                .iter()
                .filter(|r| r.alpha == alpha && r.chi_half.is_finite())
                .max_by(|a, b| a.chi_half.partial_cmp(&b.chi_half).unwrap())
                .unwrap();
            assert!(
                (peak.gamma - gamma_c).abs() <= 0.01,
                "alpha={alpha}: peak at {} vs Γ_c={gamma_c}",
                peak.gamma
            );
        }
        // smaller α carries larger long-distance correlations away from Γ_c
        let chi_at = |alpha: f64| {
            rows.iter()
                .find(|r| r.alpha == alpha && (r.gamma - 0.1).abs() < 1e-12)
                .unwrap()
                .chi_half
        };
        assert!(chi_at(0.1) > chi_at(0.5));
        assert!(chi_at(0.5) > chi_at(0.9));
        // decoupled limit: χ_{N/2} shrinks with Γ
        let tiny = rows
            .iter()
            .find(|r| r.alpha == 0.5 && (r.gamma - 0.05).abs() < 1e-12)
            .unwrap();
        assert!(tiny.chi_half.abs() < 5e-3);
        assert!(tiny.chi_half < chi_at(0.5));
    }

    #[test]
    fn critical_line_values() {
        let spec = LatticeSpec::new(1, 10, 0.5, 1.0, 1.0, 1.0).unwrap();
        let pts = critical_line(&spec, &[0.2, 0.25, 1.0, 100.0]);
        assert!(pts[0].t_c.is_none());
        assert_eq!(pts[1].t_c, Some(0.0));
        // frozen: β_c = 2 atanh(1/4)
        let t1 = pts[2].t_c.unwrap();
        assert_abs_diff_eq!(1.0 / t1, 0.5108256237659907, epsilon = 1e-10);
        // large-Γ asymptote T_c ≈ 2Γ
        let t100 = pts[3].t_c.unwrap();
        assert_abs_diff_eq!(t100, 200.0, epsilon = 0.2);
    }

    #[test]
    fn mean_field_identity_holds_at_solution() {
        // Σ_k λ_ik ū_k = Σ_j J_ij m_j
        let spec = LatticeSpec::new(1, 40, 0.5, 1.0, 1.0, 3.0).unwrap();
        let c = build_coupling(&spec).unwrap();
        let s = eigendecompose(&c).unwrap();
        let s = truncate_modes(&s, TruncationPolicy::default()).unwrap();
        let p = SaddleProblem::new(s, spec).unwrap();
        let sol = solve_homogeneous(&p, &SolverSettings::default()).unwrap();
        let m = magnetization(&p, &sol);
        for i in 0..40 {
            let lhs: f64 = (0..p.mode_count())
                .map(|k| p.spectral.modes[(i, k)] * sol.u_bar[k])
                .sum();
            let rhs: f64 = (0..40).map(|j| c.matrix[(i, j)] * m[j]).sum();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-8);
        }
    }

    #[test]
    fn slope_map_limits() {
        let template = LatticeSpec::new(1, 100, 0.5, 1.0, 1.0, 10.0).unwrap();
        let alphas = [0.1, 0.3, 0.5, 0.7, 0.9];
        let gamma_c = 0.25 / (5.0_f64).tanh();
        let cells = slope_map(
            &alphas,
            &[1.02 * gamma_c, 5.0 * gamma_c],
            &[0.1],
            &template,
            TruncationPolicy::default(),
            &SolverSettings::default(),
        )
        .unwrap();
        let near = cells[0].as_ref().unwrap();
        let far = cells[1].as_ref().unwrap();
        assert!(near.slope_a < 0.2, "near-critical slope {}", near.slope_a);
        assert!(far.slope_a > 0.8, "far slope {}", far.slope_a);
        assert!(near.intercept_b.abs() <= 0.05);
        assert!(far.intercept_b.abs() <= 0.05);
    }

    #[test]
    fn slope_map_rejects_alphas_outside_dimension() {
        let template = LatticeSpec::new(1, 20, 0.5, 1.0, 1.0, 10.0).unwrap();
        assert!(slope_map(
            &[0.5, 1.5],
            &[0.1],
            &[1.0],
            &template,
            TruncationPolicy::default(),
            &SolverSettings::default()
        )
        .is_err());
    }
}
