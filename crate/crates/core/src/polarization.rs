//! Polarization algebra: Jones vectors and matrices, Stokes decomposition,
//! multi-photon density matrices and state-quality metrics.
//!
//! Stokes components follow the ordering `ρ = S0·I + S1·σz + S2·σx + S3·σy`,
//! so `S1` is the H/V axis, `S2` the diagonal axis and `S3` the circular axis.
//! Multi-photon states live in the ordered-slot basis, e.g. `|HH⟩, |HV⟩, |VH⟩,
//! |VV⟩` for two photons, with slot 0 as the most significant index.

use std::fmt;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const DEFAULT_ROW_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[Complex64; 2]", into = "[Complex64; 2]")]
pub struct JonesVector {
    pub h: Complex64,
    pub v: Complex64,
}

impl From<[Complex64; 2]> for JonesVector {
    fn from(c: [Complex64; 2]) -> Self {
        Self { h: c[0], v: c[1] }
    }
}

impl From<JonesVector> for [Complex64; 2] {
    fn from(j: JonesVector) -> Self {
        [j.h, j.v]
    }
}

impl JonesVector {
    pub fn new(h: Complex64, v: Complex64) -> Self {
        Self { h, v }
    }

    pub fn horizontal() -> Self {
        Self::new(ONE, ZERO)
    }

    pub fn vertical() -> Self {
        Self::new(ZERO, ONE)
    }

    /// Pure state whose Stokes 3-vector points along `(s1, s2, s3)`.
    pub fn from_stokes_direction(s: [f64; 3]) -> Self {
        let r = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        let (s1, s2, s3) = (s[0] / r, s[1] / r, s[2] / r);
        let chi = s1.clamp(-1.0, 1.0).acos();
        let azimuth = s3.atan2(s2);
        Self::new(
            Complex64::from((chi / 2.0).cos()),
            Complex64::from_polar((chi / 2.0).sin(), azimuth),
        )
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.h * s, self.v * s)
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.h.conj() * other.h + self.v.conj() * other.v
    }

    /// `|⟨a|b⟩| / (‖a‖‖b‖)`; 1 for equal rays.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.inner(other).norm() / (self.norm() * other.norm())
    }

    /// Equal up to a unit-modulus global phase.
    pub fn same_ray(&self, other: &Self, tol: f64) -> bool {
        (1.0 - self.overlap(other)).abs() < tol
    }

    /// Bra (conjugated row) used as a transfer-matrix row.
    pub fn bra(&self) -> [Complex64; 2] {
        [self.h.conj(), self.v.conj()]
    }

    pub fn stokes_direction(&self) -> [f64; 3] {
        let s = stokes_from_density(&DensityMatrix::from_jones(self)).expect("single photon");
        let r = (s.s1 * s.s1 + s.s2 * s.s2 + s.s3 * s.s3).sqrt();
        [s.s1 / r, s.s2 / r, s.s3 / r]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix {
    pub m: [[Complex64; 2]; 2],
}

impl JonesMatrix {
    pub fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn apply(&self, v: &JonesVector) -> JonesVector {
        JonesVector::new(
            self.m[0][0] * v.h + self.m[0][1] * v.v,
            self.m[1][0] * v.h + self.m[1][1] * v.v,
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let a = &self.m;
        let b = &other.m;
        let mut c = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self::new(c)
    }

    pub fn adjoint(&self) -> Self {
        let a = &self.m;
        Self::new([
            [a[0][0].conj(), a[1][0].conj()],
            [a[0][1].conj(), a[1][1].conj()],
        ])
    }

    /// `‖U^H U − I‖∞`
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().mul(self);
        let mut worst = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((p.m[i][j] - target).norm());
            }
        }
        worst
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]],
        )
    }
}

/// Birefringent meta-atom: `R(θ)·diag(e^{iφ1}, e^{iφ2})·R(−θ)` with the fast
/// axis at angle `θ`.
pub fn meta_atom_matrix(theta: f64, phi1: f64, phi2: f64) -> JonesMatrix {
    let (s, c) = theta.sin_cos();
    let rot = JonesMatrix::new([[c.into(), (-s).into()], [s.into(), c.into()]]);
    let rot_back = JonesMatrix::new([[c.into(), s.into()], [(-s).into(), c.into()]]);
    let retarder = JonesMatrix::new([
        [Complex64::from_polar(1.0, phi1), ZERO],
        [ZERO, Complex64::from_polar(1.0, phi2)],
    ]);
    rot.mul(&retarder).mul(&rot_back)
}

/// `|ψ⟩ = [cos α, e^{iβ} sin α]` and its orthogonal partner
/// `|ψ̃⟩ = [−sin α, e^{iβ} cos α]`.
pub fn elliptical_pair(alpha: f64, beta: f64) -> (JonesVector, JonesVector) {
    let (sa, ca) = alpha.sin_cos();
    let phase = Complex64::from_polar(1.0, beta);
    (
        JonesVector::new(ca.into(), phase * sa),
        JonesVector::new((-sa).into(), phase * ca),
    )
}

/// `(α, β)` of the elliptical pair whose first member is the ray of `v`.
pub fn pair_parameters(v: &JonesVector) -> (f64, f64) {
    let n = v.normalized();
    // remove the global phase of the H component
    let g = if n.h.norm() > 1e-15 {
        n.h.conj() / n.h.norm()
    } else {
        ONE
    };
    let h = (n.h * g).re;
    let vv = n.v * g;
    let alpha = vv.norm().atan2(h);
    let beta = if vv.norm() > 1e-15 { vv.arg() } else { 0.0 };
    (alpha, beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn new(s0: f64, s1: f64, s2: f64, s3: f64) -> Self {
        Self { s0, s1, s2, s3 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.s0, self.s1, self.s2, self.s3]
    }

    pub fn polarized_norm(&self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt()
    }

    pub fn is_physical(&self) -> bool {
        self.s0 >= 0.0 && self.polarized_norm() <= self.s0 + 1e-12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "crate::io::DensityMatrixFile",
    into = "crate::io::DensityMatrixFile"
)]
pub struct DensityMatrix {
    n_photons: usize,
    data: CMatrix,
}

impl DensityMatrix {
    /// Validates shape and Hermiticity; positivity is checked separately by
    /// [`DensityMatrix::is_physical`] since linear inversion may produce
    /// slightly unphysical estimates.
    pub fn new(n_photons: usize, data: CMatrix) -> Result<Self> {
        if n_photons == 0 {
            return Err(Error::InvalidInput(
                "photon number must be at least 1".into(),
            ));
        }
        let dim = 1usize << n_photons;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{dim}x{dim}"),
                found: format!("{}x{}", data.nrows(), data.ncols()),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(
                "density matrix has non-finite entries".into(),
            ));
        }
        let violation = linalg::hermitian_violation(&data);
        if violation > HERMITIAN_TOL * linalg::max_abs(&data).max(1.0) {
            return Err(Error::NotHermitian { violation });
        }
        Ok(Self {
            n_photons,
            data: linalg::hermitian_part(&data),
        })
    }

    /// Infers the photon number from the matrix size.
    pub fn from_matrix(data: CMatrix) -> Result<Self> {
        let dim = data.nrows();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: "2^N x 2^N".into(),
                found: format!("{}x{}", data.nrows(), data.ncols()),
            });
        }
        Self::new(dim.trailing_zeros() as usize, data)
    }

    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        Self::from_matrix(&v * v.adjoint())
    }

    pub fn from_jones(v: &JonesVector) -> Self {
        Self::from_pure(&[v.h, v.v]).expect("2-dim pure state")
    }

    pub fn maximally_mixed(n_photons: usize) -> Self {
        let dim = 1usize << n_photons;
        Self {
            n_photons,
            data: CMatrix::identity(dim, dim).scale(1.0 / dim as f64),
        }
    }

    /// Cross-polarized photon pair with spectral overlap `η`:
    /// `½[[0,0,0,0],[0,1,η,0],[0,η,1,0],[0,0,0,0]]`.
    pub fn cross_polarized_pair(eta: f64) -> Self {
        let mut m = CMatrix::zeros(4, 4);
        m[(1, 1)] = 0.5.into();
        m[(2, 2)] = 0.5.into();
        m[(1, 2)] = (0.5 * eta).into();
        m[(2, 1)] = (0.5 * eta).into();
        Self {
            n_photons: 2,
            data: m,
        }
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.data)
    }

    pub fn is_trace_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() < 1e-12
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.data).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t.abs() < 1e-300 {
            return Err(Error::ZeroTrace);
        }
        Ok(Self {
            n_photons: self.n_photons,
            data: self.data.unscale(t),
        })
    }

    /// Clips negative eigenvalues to zero and renormalizes the trace.
    pub fn to_physical(&self) -> Result<Self> {
        let clipped = linalg::hermitian_function(&self.data, |l| l.max(0.0));
        Self {
            n_photons: self.n_photons,
            data: clipped,
        }
        .normalized()
    }

    /// `U ρ U^H` with `U` acting on the full `2^N` space.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", self.dim()),
                found: format!("{}x{}", u.nrows(), u.ncols()),
            });
        }
        let data = u * &self.data * u.adjoint();
        Ok(Self {
            n_photons: self.n_photons,
            data: linalg::hermitian_part(&data),
        })
    }

    /// Average over all photon-slot permutations. Keeps trace and positivity.
    pub fn twirled(&self) -> Self {
        let perms = slot_permutations(self.n_photons);
        let dim = self.dim();
        let mut acc = CMatrix::zeros(dim, dim);
        for p in &perms {
            for i in 0..dim {
                for j in 0..dim {
                    acc[(permute_index(i, p), permute_index(j, p))] += self.data[(i, j)];
                }
            }
        }
        Self {
            n_photons: self.n_photons,
            data: acc.unscale(perms.len() as f64),
        }
    }
}

impl fmt::Display for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.data[(i, j)];
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// All permutations of `0..n`, lexicographic.
pub(crate) fn slot_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Basis index after moving slot `s` to slot `perm[s]`.
pub(crate) fn permute_index(idx: usize, perm: &[usize]) -> usize {
    let n = perm.len();
    let mut out = 0;
    for (s, &target) in perm.iter().enumerate() {
        let bit = (idx >> (n - 1 - s)) & 1;
        out |= bit << (n - 1 - target);
    }
    out
}

pub fn stokes_from_density(rho: &DensityMatrix) -> Result<StokesVector> {
    if rho.n_photons() != 1 {
        return Err(Error::InvalidInput(format!(
            "Stokes decomposition needs a single-photon state, got N = {}",
            rho.n_photons()
        )));
    }
    let basis = linalg::stokes_basis();
    let comp = |k: usize| linalg::trace_re(&(rho.matrix() * &basis[k])) / 2.0;
    Ok(StokesVector::new(comp(0), comp(1), comp(2), comp(3)))
}

/// Inverse of [`stokes_from_density`]. Unphysical vectors (from noisy linear
/// inversion) are accepted with a logged warning.
pub fn density_from_stokes(s: &StokesVector) -> DensityMatrix {
    if !s.is_physical() {
        warn!(
            "unphysical Stokes vector: |S| = {:.6} exceeds S0 = {:.6}",
            s.polarized_norm(),
            s.s0
        );
    }
    let basis = linalg::stokes_basis();
    let m = basis
        .iter()
        .zip(s.as_array())
        .fold(CMatrix::zeros(2, 2), |acc, (b, c)| acc + b.scale(c));
    DensityMatrix {
        n_photons: 1,
        data: m,
    }
}

pub fn tensor_power(t: &CMatrix, n: usize) -> Result<CMatrix> {
    tensor_power_capped(t, n, DEFAULT_ROW_CAP)
}

/// `T ⊗ … ⊗ T` with `n` factors; row `(a1, …, aN)` sits at
/// `a1·M^{N−1} + … + aN`.
pub fn tensor_power_capped(t: &CMatrix, n: usize, row_cap: usize) -> Result<CMatrix> {
    if n < 1 {
        return Err(Error::InvalidInput("tensor power needs N >= 1".into()));
    }
    let rows = t
        .nrows()
        .checked_pow(n as u32)
        .filter(|&r| r <= row_cap)
        .ok_or(Error::TooLarge {
            rows: t.nrows().saturating_pow(n as u32),
            cap: row_cap,
        })?;
    let mut out = t.clone();
    for _ in 1..n {
        out = out.kronecker(t);
    }
    debug_assert_eq!(out.nrows(), rows);
    Ok(out)
}

/// `Tr(ρ²)/Tr(ρ)²`
pub fn purity(rho: &DensityMatrix) -> Result<f64> {
    let t = rho.trace();
    if t.abs() < 1e-300 {
        return Err(Error::ZeroTrace);
    }
    Ok(linalg::trace_re(&(rho.matrix() * rho.matrix())) / (t * t))
}

/// Wootters concurrence of a two-photon state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.n_photons() != 2 {
        return Err(Error::InvalidInput(format!(
            "concurrence is defined for N = 2, got N = {}",
            rho.n_photons()
        )));
    }
    let rho = rho.normalized()?;
    let sy = linalg::sigma_y();
    let flip = sy.kronecker(&sy);
    let conj = rho.matrix().map(|z| z.conj());
    let tilde = &flip * conj * &flip;
    // ρ·ρ̃ shares its spectrum with the Hermitian √ρ·ρ̃·√ρ.
    let root = linalg::psd_sqrt(rho.matrix());
    let (values, _) = linalg::hermitian_eigen(&(&root * tilde * &root));
    let mut lambdas: Vec<f64> = values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` between trace-normalized copies of
/// both arguments.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", rho.dim()),
            found: format!("{0}x{0}", sigma.dim()),
        });
    }
    let a = rho.normalized()?;
    let b = sigma.normalized()?;
    let root = linalg::psd_sqrt(a.matrix());
    let inner = &root * b.matrix() * &root;
    let (values, _) = linalg::hermitian_eigen(&inner);
    let s: f64 = values.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((s * s).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    pub max_violation: f64,
}

/// Whether `ρ` commutes with every photon-slot permutation. Adjacent
/// transpositions generate the symmetric group, so only those are checked.
pub fn symmetric_support_check(rho: &DensityMatrix) -> SymmetryCheck {
    let n = rho.n_photons();
    let m = rho.matrix();
    let mut worst = 0.0_f64;
    for s in 0..n.saturating_sub(1) {
        for i in 0..rho.dim() {
            let pi = linalg::swap_bits(i, n, s, s + 1);
            for j in 0..rho.dim() {
                let pj = linalg::swap_bits(j, n, s, s + 1);
                worst = worst.max((m[(pi, pj)] - m[(i, j)]).norm());
            }
        }
    }
    SymmetryCheck {
        symmetric: worst <= 1e-10,
        max_violation: worst,
    }
}

/// Real matrix from a nested slice, handy for literals.
pub fn real_matrix(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, m, |i, j| Complex64::from(rows[i][j]))
}
