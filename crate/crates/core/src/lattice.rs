//! Periodic lattices and the power-law coupling matrix.
//!
//! The coupling is `J_ij = Γ J̃(r_ij) / Ñ` with `J̃(r) = |r|^(-α)` off the
//! diagonal and `J̃(0) = b`. Distances follow the nearest-image convention
//! on the torus. The Kac normalizer `Ñ = Σ_i J̃_ij` keeps the total coupling
//! energy extensive for `α < d`, and the diagonal shift `b` is fixed so that
//! the smallest eigenvalue of `J` is zero.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Default cap on dense matrix storage (sites).
pub const DENSE_SITE_CAP: usize = 4096;

/// Relative tolerance (in units of Γ) for the "zero" smallest eigenvalue
/// of the shifted coupling matrix.
pub const SHIFT_EIG_TOL: f64 = 1e-10;

/// Parameters of a model instance: lattice geometry, interaction decay and
/// strength, transverse field, inverse temperature and optional per-site
/// longitudinal fields.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    /// Lattice dimension `d ≥ 1`.
    pub dim: usize,
    /// Sites per dimension; `N = L^d`.
    pub linear_size: usize,
    /// Interaction decay rate `α ≥ 0`.
    pub alpha: f64,
    /// Interaction strength `Γ > 0` (energy).
    pub gamma: f64,
    /// Transverse field `ω_z ≥ 0` (energy).
    pub omega_z: f64,
    /// Inverse temperature (1/energy); `f64::INFINITY` selects the
    /// zero-temperature path.
    pub beta: f64,
    /// Optional per-site longitudinal field (energy), length `N`.
    pub h: Option<Vec<f64>>,
}

impl LatticeSpec {
    pub fn new(
        dim: usize,
        linear_size: usize,
        alpha: f64,
        gamma: f64,
        omega_z: f64,
        beta: f64,
    ) -> Result<Self> {
        let spec = LatticeSpec { dim, linear_size, alpha, gamma, omega_z, beta, h: None };
        spec.validate()?;
        Ok(spec)
    }

    /// Attach a per-site longitudinal field of length `N`.
    pub fn with_field(mut self, h: Vec<f64>) -> Result<Self> {
        if h.len() != self.sites() {
            return Err(Error::InvalidSpec(format!(
                "field has length {}, lattice has {} sites",
                h.len(),
                self.sites()
            )));
        }
        self.h = Some(h);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidSpec("dimension must be >= 1".into()));
        }
        if self.sites() < 2 {
            return Err(Error::InvalidSpec("need at least 2 sites".into()));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidSpec(format!("alpha = {} must be >= 0", self.alpha)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidSpec(format!("gamma = {} must be > 0", self.gamma)));
        }
        if !(self.omega_z >= 0.0) {
            return Err(Error::InvalidSpec(format!("omega_z = {} must be >= 0", self.omega_z)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidSpec(format!("beta = {} must be > 0 or inf", self.beta)));
        }
        Ok(())
    }

    /// Total number of sites `N = L^d`.
    pub fn sites(&self) -> usize {
        self.linear_size.pow(self.dim as u32)
    }

    /// True when `beta` carries the zero-temperature sentinel.
    pub fn zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }

    /// The longitudinal field as a dense vector (zeros when absent).
    pub fn field_vector(&self) -> Vec<f64> {
        self.h.clone().unwrap_or_else(|| vec![0.0; self.sites()])
    }

    /// Row-major coordinates of site `i`.
    pub fn coords(&self, i: usize) -> Vec<usize> {
        let mut c = vec![0usize; self.dim];
        let mut rem = i;
        for a in (0..self.dim).rev() {
            c[a] = rem % self.linear_size;
            rem /= self.linear_size;
        }
        c
    }
}

/// Euclidean length of the minimal-image displacement between sites `i`
/// and `j` on the periodic lattice. Symmetric, zero iff `i == j`.
pub fn nearest_image_distance(i: usize, j: usize, spec: &LatticeSpec) -> Result<f64> {
    let n = spec.sites();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, sites: n });
    }
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, sites: n });
    }
    let (ci, cj) = (spec.coords(i), spec.coords(j));
    let l = spec.linear_size as isize;
    let mut d2 = 0.0;
    for a in 0..spec.dim {
        let mut delta = (cj[a] as isize - ci[a] as isize).rem_euclid(l);
        // minimal image; the tie at L/2 maps to +L/2 (only |r| enters)
        if 2 * delta > l {
            delta -= l;
        }
        d2 += (delta * delta) as f64;
    }
    Ok(d2.sqrt())
}

/// Off-diagonal coupling profile `c_j = J̃(r_0j)` for `j = 1..N`, plus the
/// off-diagonal row sum. `c_0` is left for the shift `b`.
fn raw_profile(spec: &LatticeSpec) -> (Vec<f64>, f64) {
    let n = spec.sites();
    let mut c = vec![0.0; n];
    for (j, cj) in c.iter_mut().enumerate().skip(1) {
        let r = nearest_image_distance(0, j, spec).expect("indices in range");
        *cj = r.powf(-spec.alpha);
    }
    let sum: f64 = c.iter().sum();
    (c, sum)
}

/// Eigenvalues of the unnormalized circulant `J̃` with `J̃(0) = 0`, one per
/// reciprocal vector, via the closed cosine sum. Order follows the row-major
/// enumeration of reciprocal vectors `q = 2π n / L`.
fn raw_fourier_eigenvalues(spec: &LatticeSpec) -> Vec<f64> {
    let n = spec.sites();
    let l = spec.linear_size;
    let (c, _) = raw_profile(spec);
    let two_pi = 2.0 * std::f64::consts::PI;
    (0..n)
        .map(|qi| {
            let qc = spec.coords(qi);
            let mut acc = 0.0;
            for (j, cj) in c.iter().enumerate().skip(1) {
                let jc = spec.coords(j);
                let mut phase = 0.0;
                for a in 0..spec.dim {
                    phase += (qc[a] * jc[a]) as f64;
                }
                acc += cj * (two_pi * phase / l as f64).cos();
            }
            acc
        })
        .collect()
}

/// Diagonal shift that zeroes the smallest eigenvalue of the finite-lattice
/// coupling matrix: `b(L) = -min_q Σ_{r≠0} J̃(r) cos(q·r)`.
///
/// This is the value used by [`build_coupling`]; for `d = 1` it converges to
/// the alternating-series value of [`diagonal_shift_b`] as `L` grows.
pub fn finite_lattice_shift(spec: &LatticeSpec) -> f64 {
    if spec.alpha == 0.0 {
        // J̃ = ones - I: smallest eigenvalue is exactly -1
        return 1.0;
    }
    let ev = raw_fourier_eigenvalues(spec);
    -ev.into_iter().fold(f64::INFINITY, f64::min)
}

/// Diagonal shift `b` in the large-lattice limit.
///
/// For `d = 1`, `α > 0` this is the alternating series
/// `b = -2 Σ_{r≥1} (-1)^r r^(-α)`, evaluated by repeated averaging of
/// partial sums (the plain series converges far too slowly near `α → 0`).
/// For `α = 0` the shift is exactly 1. For `d > 1` no closed form is
/// available and the finite-lattice zeroing value at the given `L` is
/// returned instead.
pub fn diagonal_shift_b(spec: &LatticeSpec) -> f64 {
    if spec.alpha == 0.0 {
        return 1.0;
    }
    if spec.dim == 1 {
        2.0 * alternating_zeta(spec.alpha)
    } else {
        finite_lattice_shift(spec)
    }
}

/// `η(α) = Σ_{r≥1} (-1)^(r+1) r^(-α)` by Euler transformation: partial sums
/// are averaged repeatedly until the triangle collapses. 64 terms give
/// machine precision over the whole range used here.
fn alternating_zeta(alpha: f64) -> f64 {
    const TERMS: usize = 64;
    let mut row: Vec<f64> = Vec::with_capacity(TERMS + 1);
    let mut partial = 0.0;
    for r in 1..=(TERMS + 1) {
        let term = (r as f64).powf(-alpha);
        partial += if r % 2 == 1 { term } else { -term };
        row.push(partial);
    }
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = 0.5 * (row[i] + row[i + 1]);
        }
        row.pop();
    }
    row[0]
}

/// Kac normalizer `Ñ = b + Σ_{j≠i} J̃(r_ij)` for the given shift.
pub fn kac_normalizer(spec: &LatticeSpec, b: f64) -> f64 {
    let (_, off_sum) = raw_profile(spec);
    b + off_sum
}

/// The rescaled coupling matrix with its shift and normalizer.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    /// `J`, dense symmetric `N×N` (energy).
    pub matrix: Array2<f64>,
    /// Diagonal parameter `b` actually used (finite-lattice zeroing value).
    pub shift: f64,
    /// Kac normalizer `Ñ`.
    pub kac: f64,
    pub spec: LatticeSpec,
}

/// Build the dense coupling matrix `J_ij = Γ J̃(r_ij) / Ñ`.
///
/// The shift is the finite-lattice zeroing value, so the smallest eigenvalue
/// of `J` is zero to eigensolver accuracy ([`SHIFT_EIG_TOL`] relative to Γ).
pub fn build_coupling(spec: &LatticeSpec) -> Result<CouplingMatrix> {
    build_coupling_capped(spec, DENSE_SITE_CAP)
}

/// [`build_coupling`] with an explicit dense-storage cap.
pub fn build_coupling_capped(spec: &LatticeSpec, cap: usize) -> Result<CouplingMatrix> {
    spec.validate()?;
    let n = spec.sites();
    if n > cap {
        return Err(Error::ResourceLimit { sites: n, cap });
    }
    let b = finite_lattice_shift(spec);
    let kac = kac_normalizer(spec, b);
    let scale = spec.gamma / kac;
    let mut j = Array2::zeros((n, n));
    for row in 0..n {
        j[(row, row)] = scale * b;
        for col in row + 1..n {
            let r = nearest_image_distance(row, col, spec)?;
            let v = scale * r.powf(-spec.alpha);
            j[(row, col)] = v;
            j[(col, row)] = v;
        }
    }
    Ok(CouplingMatrix { matrix: j, shift: b, kac, spec: spec.clone() })
}

impl CouplingMatrix {
    pub fn sites(&self) -> usize {
        self.matrix.nrows()
    }

    /// Row-major CSV dump of the full matrix (debugging aid).
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let n = self.sites();
        for i in 0..n {
            let row: Vec<String> =
                (0..n).map(|k| format!("{:.17e}", self.matrix[(i, k)])).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}
