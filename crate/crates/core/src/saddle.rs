//! Saddle-point exponent for the transverse-field Ising instantiation and
//! its maximizers.
//!
//! The partition function reduces to maximizing
//!
//! `φ[u] = -β Σ_k ω_k u_k² + (1/N) Σ_i ln[2 cosh(β ε_i)]`
//!
//! with `2 ε_i = sqrt(ω_z² + 4 (2 Σ_k λ_ik u_k + h_i)²)`. At uniform fields
//! the maximizer is homogeneous: only the uniform mode `u_0` is non-zero and
//! the problem collapses to one variable. The multivariate path handles
//! site-dependent fields and doubles as a cross-check of the homogeneous
//! reduction.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::lattice::LatticeSpec;
use crate::spectral::SpectralData;

/// A maximization instance: spectral data, model parameters and the
/// longitudinal field vector.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    pub spectral: SpectralData,
    pub spec: LatticeSpec,
    /// Per-site longitudinal field `h_i` (energy), length `N`.
    pub field: Vec<f64>,
}

impl SaddleProblem {
    /// Build a problem from spectral data; the field comes from the spec
    /// (zeros when absent).
    pub fn new(spectral: SpectralData, spec: LatticeSpec) -> Result<Self> {
        let field = spec.field_vector();
        Self::with_field(spectral, spec, field)
    }

    pub fn with_field(spectral: SpectralData, spec: LatticeSpec, field: Vec<f64>) -> Result<Self> {
        if spectral.sites() != spec.sites() {
            return Err(Error::InvalidSpec(format!(
                "spectral data has {} sites, spec has {}",
                spectral.sites(),
                spec.sites()
            )));
        }
        if field.len() != spec.sites() {
            return Err(Error::InvalidSpec(format!(
                "field has length {}, lattice has {} sites",
                field.len(),
                spec.sites()
            )));
        }
        Ok(SaddleProblem { spectral, spec, field })
    }

    pub fn sites(&self) -> usize {
        self.spec.sites()
    }

    pub fn mode_count(&self) -> usize {
        self.spectral.mode_count
    }

    /// True when every field entry equals the first.
    pub fn field_is_uniform(&self) -> bool {
        self.field.windows(2).all(|w| w[1] == w[0])
    }

    /// Per-site `μ_i = 2 Σ_k λ_ik u_k + h_i` and `ε_i`.
    pub fn effective_fields(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.sites();
        let m = self.mode_count();
        let wz2 = self.spec.omega_z * self.spec.omega_z;
        let mut mu = self.field.clone();
        for i in 0..n {
            let mut acc = 0.0;
            for k in 0..m {
                acc += self.spectral.modes[(i, k)] * u[k];
            }
            mu[i] += 2.0 * acc;
        }
        let eps = mu.iter().map(|&m_i| 0.5 * (wz2 + 4.0 * m_i * m_i).sqrt()).collect();
        (mu, eps)
    }
}

/// `ln(2 cosh x)` without overflow: `|x| + ln(1 + e^(-2|x|))`.
pub fn ln_two_cosh(x: f64) -> f64 {
    x.abs() + (-2.0 * x.abs()).exp().ln_1p()
}

/// Saddle-point exponent `φ[u]`. Requires finite `β`; the zero-temperature
/// limit is handled by the dedicated paths in the solvers.
pub fn phi(u: &[f64], problem: &SaddleProblem) -> Result<f64> {
    if problem.spec.zero_temperature() {
        return Err(Error::InfiniteBeta);
    }
    check_u(u, problem)?;
    let beta = problem.spec.beta;
    let (_, eps) = problem.effective_fields(u);
    let quad: f64 =
        (0..problem.mode_count()).map(|k| problem.spectral.frequencies[k] * u[k] * u[k]).sum();
    let matter: f64 = eps.iter().map(|&e| ln_two_cosh(beta * e)).sum::<f64>() / eps.len() as f64;
    Ok(-beta * quad + matter)
}

/// Analytic gradient of `φ`:
/// `∂φ/∂u_k = -2 β ω_k u_k + (2β/N) Σ_i tanh(β ε_i) λ_ik μ_i / ε_i`.
pub fn phi_gradient(u: &[f64], problem: &SaddleProblem) -> Result<Vec<f64>> {
    if problem.spec.zero_temperature() {
        return Err(Error::InfiniteBeta);
    }
    check_u(u, problem)?;
    let (mu, eps) = problem.effective_fields(u);
    Ok(gradient_inner(u, problem, &mu, &eps))
}

fn gradient_inner(u: &[f64], problem: &SaddleProblem, mu: &[f64], eps: &[f64]) -> Vec<f64> {
    let n = problem.sites();
    let m = problem.mode_count();
    let beta = problem.spec.beta;
    let site_factor: Vec<f64> = mu
        .iter()
        .zip(eps)
        .map(|(&mu_i, &e_i)| if e_i > 0.0 { (beta * e_i).tanh() * mu_i / e_i } else { 0.0 })
        .collect();
    (0..m)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                acc += problem.spectral.modes[(i, k)] * site_factor[i];
            }
            -2.0 * beta * problem.spectral.frequencies[k] * u[k] + 2.0 * beta * acc / n as f64
        })
        .collect()
}

fn check_u(u: &[f64], problem: &SaddleProblem) -> Result<()> {
    if u.len() != problem.mode_count() {
        return Err(Error::InvalidSpec(format!(
            "u has length {}, problem retains {} modes",
            u.len(),
            problem.mode_count()
        )));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSpec("u contains non-finite entries".into()));
    }
    Ok(())
}

/// Per-site fluctuation weight `Y_i`, evaluated from the total effective
/// field `μ` (coupling part plus `h_i`) and `ε`. At `β = ∞` the thermal
/// factors collapse to their limits.
pub(crate) fn fluctuation_y(mu: f64, eps: f64, beta: f64) -> f64 {
    let ratio = mu / eps;
    if beta.is_infinite() {
        (1.0 - ratio * ratio) / eps
    } else {
        let t = (beta * eps).tanh();
        beta * (1.0 - t * t) * ratio * ratio + t / eps * (1.0 - ratio * ratio)
    }
}

/// Which solver produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    Homogeneous,
    Multivariate,
}

/// Stability classification from the Hessian spectrum at the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// All Hessian eigenvalues strictly negative.
    Maximum,
    /// Some eigenvalue non-negative: stationary but not a strict maximum.
    SaddleOrDegenerate,
}

/// A maximizer of `φ` with convergence metadata.
///
/// At zero temperature the stored `phi_value` and `hessian_eigs` are the
/// `β`-scaled limits (`φ/β` and its curvature), so the free energy per site
/// is `-phi_value` directly.
#[derive(Debug, Clone)]
pub struct SaddleSolution {
    /// Maximizer, length `M`.
    pub u_bar: Vec<f64>,
    pub phi_value: f64,
    pub hessian_eigs: Vec<f64>,
    pub mode: SolverMode,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub stability: Stability,
}

impl SaddleSolution {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Maximum
    }

    /// Dump for file output: maximizer, value, Hessian spectrum and
    /// convergence metadata.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "u_bar": self.u_bar,
            "phi": self.phi_value,
            "hessian_eigs": self.hessian_eigs,
            "mode": match self.mode {
                SolverMode::Homogeneous => "homogeneous",
                SolverMode::Multivariate => "multivariate",
            },
            "iterations": self.iterations,
            "gradient_norm": self.gradient_norm,
            "stable": self.is_stable(),
        })
    }
}

/// Solver tolerances and limits.
#[derive(Debug, Clone)]
pub struct SolverSettings {
    /// Gradient-norm tolerance; scaled by `β` internally.
    pub gradient_tol: f64,
    /// Ascent iteration cap.
    pub max_iterations: usize,
    /// Symmetry-breaking start `u_0 = init_scale · Γ` at zero field.
    pub init_scale: f64,
    /// Finite-difference step factor for the Hessian
    /// (step = factor · max(Γ, ω_z)).
    pub hessian_step: f64,
    /// Newton polishing iteration cap.
    pub max_newton: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            gradient_tol: 1e-10,
            max_iterations: 20_000,
            init_scale: 0.1,
            hessian_step: 1e-5,
            max_newton: 50,
        }
    }
}

/// Scalar condition pieces for the homogeneous reduction at uniform field.
/// `g(u) = dφ/du = -2βω₀u + 2β tanh(βε) μ/ε` with `μ = 2u + h`.
struct HomogeneousFn {
    omega0: f64,
    wz2: f64,
    h: f64,
    beta: f64,
}

impl HomogeneousFn {
    fn eps(&self, u: f64) -> f64 {
        let mu = 2.0 * u + self.h;
        0.5 * (self.wz2 + 4.0 * mu * mu).sqrt()
    }

    /// `dφ/du` divided by `2β` (finite β) or the T = 0 analogue `dφ∞/du / 2`.
    fn slope(&self, u: f64) -> f64 {
        let mu = 2.0 * u + self.h;
        let eps = self.eps(u);
        let t = if self.beta.is_infinite() { 1.0 } else { (self.beta * eps).tanh() };
        let drive = if eps > 0.0 { t * mu / eps } else { 0.0 };
        -self.omega0 * u + drive
    }

    /// `φ(u)` (finite β) or `φ∞(u) = lim φ/β` (T = 0), uniform lattice.
    fn phi(&self, u: f64) -> f64 {
        let eps = self.eps(u);
        if self.beta.is_infinite() {
            -self.omega0 * u * u + eps
        } else {
            -self.beta * self.omega0 * u * u + ln_two_cosh(self.beta * eps)
        }
    }
}

/// Solve the homogeneous (single-variable) saddle condition at uniform field.
///
/// At `h = 0` the non-trivial branch solves `ε̄ = 2Γ tanh(β ε̄)` by bisection
/// on the bracket `[1e-12, 2Γ]`; the returned solution is the global maximum
/// among `{0, ū}` with ties resolved to `ū = 0`. A uniform non-zero field is
/// handled by locating every root of `dφ/du` and keeping the best.
pub fn solve_homogeneous(
    problem: &SaddleProblem,
    settings: &SolverSettings,
) -> Result<SaddleSolution> {
    if !problem.field_is_uniform() {
        return Err(Error::InvalidSpec(
            "homogeneous solver requires a uniform longitudinal field".into(),
        ));
    }
    let gamma_eff = problem.spectral.top_eigenvalue();
    let beta = problem.spec.beta;
    let hom = HomogeneousFn {
        omega0: 1.0 / gamma_eff,
        wz2: problem.spec.omega_z * problem.spec.omega_z,
        h: problem.field[0],
        beta,
    };

    let u_star = if hom.h == 0.0 {
        let root = if beta.is_infinite() {
            // ε̄ = 2Γ at T = 0 whenever the broken branch exists
            Some(2.0 * gamma_eff)
        } else {
            bisect_epsilon(gamma_eff, beta)
        };
        match root {
            Some(eps_bar) => {
                let disc = eps_bar * eps_bar - 0.25 * hom.wz2;
                if disc > 0.0 {
                    let u = 0.5 * disc.sqrt();
                    // global max among {0, ±u}; ties prefer the paramagnet
                    if hom.phi(u) > hom.phi(0.0) {
                        u
                    } else {
                        0.0
                    }
                } else {
                    0.0
                }
            }
            None => 0.0,
        }
    } else {
        best_uniform_root(&hom, gamma_eff, settings)?
    };

    let m = problem.mode_count();
    let mut u_bar = vec![0.0; m];
    u_bar[0] = u_star;

    let mu = 2.0 * u_star + hom.h;
    let eps = hom.eps(u_star);
    let y = fluctuation_y(mu, eps, beta);
    // closed-form mode Hessian at a homogeneous point:
    // ν_k = 2β (2Y - ω_k)  (β-scaled at T = 0)
    let scale = if beta.is_infinite() { 2.0 } else { 2.0 * beta };
    let hessian_eigs: Vec<f64> =
        problem.spectral.frequencies.iter().map(|&w| scale * (2.0 * y - w)).collect();
    let stability = classify(&hessian_eigs);

    let gradient_norm = (2.0 * if beta.is_infinite() { 1.0 } else { beta } * hom.slope(u_star))
        .abs();
    Ok(SaddleSolution {
        u_bar,
        phi_value: hom.phi(u_star),
        hessian_eigs,
        mode: SolverMode::Homogeneous,
        iterations: 0,
        gradient_norm,
        stability,
    })
}

/// Bisection for the non-trivial root of `ε = 2Γ tanh(βε)` on
/// `[1e-12, 2Γ]`; `None` when the paramagnetic solution is the only one.
fn bisect_epsilon(gamma: f64, beta: f64) -> Option<f64> {
    let g = |e: f64| 2.0 * gamma * (beta * e).tanh() - e;
    let mut lo = 1e-12;
    let mut hi = 2.0 * gamma;
    if g(lo) <= 0.0 {
        return None; // slope at origin below 1: only ε = 0
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Locate all roots of the uniform-field scalar gradient on a bracket grid
/// and return the one maximizing `φ`.
fn best_uniform_root(
    hom: &HomogeneousFn,
    gamma: f64,
    _settings: &SolverSettings,
) -> Result<f64> {
    // |ū| = Γ |m̄| ≤ Γ; pad the scan window
    let span = 1.05 * gamma + 0.5 * hom.h.abs();
    let cells = 512;
    let mut candidates = vec![];
    let mut prev_u = -span;
    let mut prev_g = hom.slope(prev_u);
    for c in 1..=cells {
        let u = -span + 2.0 * span * c as f64 / cells as f64;
        let g = hom.slope(u);
        if prev_g == 0.0 {
            candidates.push(prev_u);
        } else if prev_g * g < 0.0 {
            let (mut lo, mut hi) = (prev_u, u);
            let (mut glo, _) = (prev_g, g);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let gm = hom.slope(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if glo * gm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            candidates.push(0.5 * (lo + hi));
        }
        prev_u = u;
        prev_g = g;
    }
    if candidates.is_empty() {
        return Err(Error::NonConvergence(format!(
            "no stationary point of the uniform-field condition in [{:.3e}, {:.3e}]",
            -span, span
        )));
    }
    let best = candidates
        .into_iter()
        .map(|u| (u, hom.phi(u)))
        .max_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap()
                // tie: prefer the smaller |u| (continuity from the paramagnet)
                .then(b.0.abs().partial_cmp(&a.0.abs()).unwrap())
        })
        .map(|(u, _)| u)
        .unwrap();
    Ok(best)
}

/// Maximize `φ` over all retained modes by gradient ascent in the mode
/// metric (step `∝ D_k/2β`, a unit step being exactly the self-consistent
/// fixed-point update) with a backtracking line search, followed by damped
/// Newton polishing on the analytic gradient to reach the target gradient
/// norm. Requires finite `β`.
pub fn solve_multivariate(
    problem: &SaddleProblem,
    u_init: Option<&[f64]>,
    settings: &SolverSettings,
) -> Result<SaddleSolution> {
    if problem.spec.zero_temperature() {
        return Err(Error::InfiniteBeta);
    }
    let m = problem.mode_count();
    if m == 0 {
        return Err(Error::EmptyTruncation);
    }
    let beta = problem.spec.beta;
    let tol = settings.gradient_tol * beta;
    let nudge = settings.init_scale * problem.spectral.top_eigenvalue();

    let mut u = match u_init {
        Some(v) => {
            check_u(v, problem)?;
            v.to_vec()
        }
        None => {
            // symmetry-broken start on the positive branch
            let mut v = vec![0.0; m];
            v[0] = nudge;
            v
        }
    };

    let mut restarts = 0;
    loop {
        let (iterations, gradient_norm) = ascend(problem, &mut u, settings, tol)?;
        let hessian_eigs = hessian_eigenvalues(problem, &u, settings)?;
        let stability = classify(&hessian_eigs);
        // Ascent can park on the symmetric stationary point (∇φ = 0 makes it
        // a fixed point); restart once from a symmetry-broken nudge.
        if stability == Stability::SaddleOrDegenerate && restarts < 2 {
            restarts += 1;
            let top = hessian_eigs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(k, _)| k)
                .unwrap_or(0);
            u[top] += nudge;
            continue;
        }
        let phi_value = phi(&u, problem)?;
        return Ok(SaddleSolution {
            u_bar: u,
            phi_value,
            hessian_eigs,
            mode: SolverMode::Multivariate,
            iterations,
            gradient_norm,
            stability,
        });
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn ascend(
    problem: &SaddleProblem,
    u: &mut Vec<f64>,
    settings: &SolverSettings,
    tol: f64,
) -> Result<(usize, f64)> {
    let m = problem.mode_count();
    let beta = problem.spec.beta;
    let d = &problem.spectral.eigenvalues[..m];
    let mut step = 1.0;
    let mut iterations = 0;

    let mut phi_cur = phi(u, problem)?;
    let mut grad = phi_gradient(u, problem)?;
    let fp_budget = settings.max_iterations;

    while iterations < fp_budget {
        let gn = norm(&grad);
        if gn <= tol {
            return Ok((iterations, gn));
        }
        let trial: Vec<f64> = (0..m)
            .map(|k| u[k] + step * d[k] / (2.0 * beta) * grad[k])
            .collect();
        let phi_trial = phi(&trial, problem)?;
        if phi_trial >= phi_cur {
            *u = trial;
            phi_cur = phi_trial;
            grad = phi_gradient(u, problem)?;
            step = (step * 1.25).min(4.0);
        } else {
            step *= 0.5;
            if step < 1e-8 {
                break; // line search exhausted: polish with Newton
            }
        }
        iterations += 1;
        // hand over to Newton once the neighborhood is quadratic
        if iterations >= 200 && norm(&grad) < 1e-2 * beta.max(1.0) {
            break;
        }
    }

    // damped Newton on ∇φ = 0
    let mut gn = norm(&grad);
    let mut newton = 0;
    while gn > tol && newton < settings.max_newton {
        let h = fd_hessian(problem, u, settings)?;
        let delta = solve_linear(h, grad.iter().map(|g| -g).collect())?;
        let mut damp = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = (0..m).map(|k| u[k] + damp * delta[k]).collect();
            let g_trial = phi_gradient(&trial, problem)?;
            if norm(&g_trial) < gn {
                *u = trial;
                grad = g_trial;
                gn = norm(&grad);
                improved = true;
                break;
            }
            damp *= 0.5;
        }
        newton += 1;
        iterations += 1;
        if !improved {
            break;
        }
    }
    if gn > tol {
        return Err(Error::NonConvergence(format!(
            "gradient norm {gn:.3e} above tolerance {tol:.3e} after {iterations} iterations"
        )));
    }
    Ok((iterations, gn))
}

/// Dense Hessian by central finite differences of the analytic gradient.
fn fd_hessian(
    problem: &SaddleProblem,
    u: &[f64],
    settings: &SolverSettings,
) -> Result<Array2<f64>> {
    let m = problem.mode_count();
    let step = settings.hessian_step * problem.spec.gamma.max(problem.spec.omega_z);
    let mut h = Array2::zeros((m, m));
    let mut up = u.to_vec();
    let mut um = u.to_vec();
    for k in 0..m {
        up[k] += step;
        um[k] -= step;
        let gp = phi_gradient(&up, problem)?;
        let gm = phi_gradient(&um, problem)?;
        for l in 0..m {
            h[(l, k)] = (gp[l] - gm[l]) / (2.0 * step);
        }
        up[k] = u[k];
        um[k] = u[k];
    }
    // symmetrize
    for k in 0..m {
        for l in 0..k {
            let avg = 0.5 * (h[(k, l)] + h[(l, k)]);
            h[(k, l)] = avg;
            h[(l, k)] = avg;
        }
    }
    Ok(h)
}

/// Eigenvalues of the finite-difference Hessian at `u`, descending.
pub fn hessian_eigenvalues(
    problem: &SaddleProblem,
    u: &[f64],
    settings: &SolverSettings,
) -> Result<Vec<f64>> {
    let h = fd_hessian(problem, u, settings)?;
    let (mut vals, _) = symmetric_eigen(&h, false)
        .map_err(|e| Error::Eigensolver(format!("Hessian eigendecomposition: {e}")))?;
    vals.reverse();
    Ok(vals)
}

fn classify(hessian_eigs: &[f64]) -> Stability {
    if hessian_eigs.iter().all(|&v| v < 0.0) {
        Stability::Maximum
    } else {
        Stability::SaddleOrDegenerate
    }
}

/// Gaussian elimination with partial pivoting (M is small).
fn solve_linear(mut a: Array2<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[(i, col)].abs().partial_cmp(&a[(j, col)].abs()).unwrap())
            .unwrap();
        if a[(pivot, col)].abs() < 1e-300 {
            return Err(Error::NonConvergence("singular Hessian in Newton step".into()));
        }
        if pivot != col {
            for k in 0..n {
                let tmp = a[(col, k)];
                a[(col, k)] = a[(pivot, k)];
                a[(pivot, k)] = tmp;
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = a[(row, col)] / a[(col, col)];
            if f != 0.0 {
                for k in col..n {
                    a[(row, k)] -= f * a[(col, k)];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[(row, k)] * x[k];
        }
        x[row] = acc / a[(row, row)];
    }
    Ok(x)
}

/// Leading saddle-point free energy per site: `-φ[ū]/β`, the `N → ∞` value.
/// The subleading prefactor piece is excluded (see [`prefactor_log`]); at
/// zero temperature this is the ground-state energy per site.
pub fn free_energy_per_site(problem: &SaddleProblem, solution: &SaddleSolution) -> f64 {
    if problem.spec.zero_temperature() {
        -solution.phi_value
    } else {
        -solution.phi_value / problem.spec.beta
    }
}

/// Subleading Gaussian prefactor `(1/2) Σ_k ln(N/(π ω_k))`; vanishes per
/// site as `N → ∞`.
pub fn prefactor_log(problem: &SaddleProblem) -> f64 {
    let n = problem.sites() as f64;
    0.5 * problem
        .spectral
        .frequencies
        .iter()
        .map(|&w| (n / (std::f64::consts::PI * w)).ln())
        .sum::<f64>()
}

/// Full `ln Z = N φ[ū] + (1/2) Σ_k ln(N/(π ω_k))`. Finite `β` only.
pub fn partition_log(problem: &SaddleProblem, solution: &SaddleSolution) -> Result<f64> {
    if problem.spec.zero_temperature() {
        return Err(Error::InfiniteBeta);
    }
    Ok(problem.sites() as f64 * solution.phi_value + prefactor_log(problem))
}

/// Second-order saddle correction diagnostic `(1/N) Σ_k ln|ν_k|` from the
/// Hessian spectrum; scales as `M/N`.
pub fn second_order_correction(
    problem: &SaddleProblem,
    solution: &SaddleSolution,
) -> Result<f64> {
    let n = problem.sites() as f64;
    let mut acc = 0.0;
    for (k, &nu) in solution.hessian_eigs.iter().enumerate() {
        if nu.abs() < 1e-300 {
            return Err(Error::DegenerateHessian(k));
        }
        acc += nu.abs().ln();
    }
    Ok(acc / n)
}
