//! Geometric-phase metagratings that steer an orthogonal pair of elliptical
//! polarizations into opposite diffraction orders.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polarization::{elliptical_pair, meta_atom_matrix, JonesMatrix, JonesVector};
use crate::simulator::TransferMatrix;

pub const MIN_ATOMS_PER_CELL: usize = 8;
pub const DEFAULT_LATTICE_NM: f64 = 800.0;
const DEGENERACY_TOL: f64 = 1e-12;
const OVERLAP_TOL: f64 = 1e-10;
const PHASE_TOL: f64 = 1e-8;
const SCAN_POINTS: usize = 4096;
const MAX_BISECTIONS: usize = 200;

/// Birefringent nano-pillar: orientation `θ` and the phases picked up along
/// its two axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetaAtom {
    pub theta: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl MetaAtom {
    pub fn matrix(&self) -> JonesMatrix {
        meta_atom_matrix(self.theta, self.phi1, self.phi2)
    }

    pub fn retardance(&self) -> f64 {
        self.phi2 - self.phi1
    }
}

/// Wraps into `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn check_pair(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && beta.is_finite()) {
        return Err(Error::InvalidInput("pair parameters must be finite".into()));
    }
    if (beta.sin() * (2.0 * alpha).sin()).abs() < DEGENERACY_TOL {
        return Err(Error::DegeneratePair { alpha, beta });
    }
    Ok(())
}

fn stokes(alpha: f64, beta: f64) -> [f64; 3] {
    let (s2a, c2a) = (2.0 * alpha).sin_cos();
    [c2a, s2a * beta.cos(), s2a * beta.sin()]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Atom at orientation `θ` in the `φ1 = −φ2` gauge that maps `|ψ(α,β)⟩` onto
/// `e^{iγ}|ψ(α,−β)⟩`, together with `γ`.
///
/// In that gauge the atom is a rotation of the Poincaré sphere by `2φ2`
/// about the equatorial axis at longitude `2θ`, so `φ2` is half the signed
/// angle carrying the projection of `ψ` onto the projection of `ψ'`.
pub fn solve_meta_atom(alpha: f64, beta: f64, theta: f64) -> Result<(MetaAtom, f64)> {
    check_pair(alpha, beta)?;
    if !theta.is_finite() {
        return Err(Error::InvalidInput("orientation must be finite".into()));
    }
    let axis = [(2.0 * theta).cos(), (2.0 * theta).sin(), 0.0];
    let s = stokes(alpha, beta);
    let s_target = stokes(alpha, -beta);
    let project = |v: [f64; 3]| {
        let d = dot(v, axis);
        [v[0] - d * axis[0], v[1] - d * axis[1], v[2] - d * axis[2]]
    };
    let (p, q) = (project(s), project(s_target));
    let angle = dot(axis, cross(p, q)).atan2(dot(p, q)).rem_euclid(TAU);
    let phi = angle / 2.0;
    let atom = MetaAtom {
        theta,
        phi1: -phi,
        phi2: phi,
    };

    let (psi, _) = elliptical_pair(alpha, beta);
    let (target, _) = elliptical_pair(alpha, -beta);
    let amp = target.inner(&atom.matrix().apply(&psi));
    let residual = (1.0 - amp.norm()).abs();
    if residual >= OVERLAP_TOL {
        return Err(Error::NoSolution { residual });
    }
    Ok((atom, amp.arg()))
}

fn gamma_at(alpha: f64, beta: f64, theta: f64) -> Result<f64> {
    solve_meta_atom(alpha, beta, theta).map(|(_, g)| g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisOptions {
    /// Phase of atom 0.
    pub c1: f64,
    pub lattice_constant_nm: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            c1: 0.0,
            lattice_constant_nm: DEFAULT_LATTICE_NM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GratingAtom {
    pub n: usize,
    pub theta: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub gamma: f64,
}

impl GratingAtom {
    pub fn atom(&self) -> MetaAtom {
        MetaAtom {
            theta: self.theta,
            phi1: self.phi1,
            phi2: self.phi2,
        }
    }
}

/// One super-cell of `m` atoms imposing `γ(n) = −2πn/m + C1` on `ψ(α,β)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GratingDesign {
    pub alpha: f64,
    pub beta: f64,
    pub m: usize,
    pub c1: f64,
    pub lattice_constant_nm: f64,
    pub atoms: Vec<GratingAtom>,
}

impl GratingDesign {
    pub fn pair(&self) -> (JonesVector, JonesVector) {
        elliptical_pair(self.alpha, self.beta)
    }

    pub fn period_nm(&self) -> f64 {
        self.m as f64 * self.lattice_constant_nm
    }

    pub fn validate(&self) -> Result<()> {
        check_pair(self.alpha, self.beta)?;
        if self.m < MIN_ATOMS_PER_CELL {
            return Err(Error::InvalidInput(format!(
                "super-cell needs at least {MIN_ATOMS_PER_CELL} atoms, got {}",
                self.m
            )));
        }
        if self.atoms.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: format!("{} atoms", self.m),
                found: format!("{} atoms", self.atoms.len()),
            });
        }
        if !(self.lattice_constant_nm > 0.0 && self.lattice_constant_nm.is_finite()) {
            return Err(Error::InvalidInput(
                "lattice constant must be positive".into(),
            ));
        }
        for (k, a) in self.atoms.iter().enumerate() {
            if a.n != k {
                return Err(Error::InvalidInput(format!(
                    "atom {k} is labelled n = {}",
                    a.n
                )));
            }
            if ![a.theta, a.phi1, a.phi2, a.gamma]
                .iter()
                .all(|x| x.is_finite())
            {
                return Err(Error::InvalidInput(format!(
                    "atom {k} has non-finite parameters"
                )));
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "theta", "phi1", "phi2", "gamma"])?;
        for a in &self.atoms {
            out.write_record([
                a.n.to_string(),
                format!("{:.15e}", a.theta),
                format!("{:.15e}", a.phi1),
                format!("{:.15e}", a.phi2),
                format!("{:.15e}", a.gamma),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Smallest `θ ∈ [0, π)` whose phase equals `target` modulo 2π.
fn orientation_for_phase(alpha: f64, beta: f64, target: f64, grid: &[(f64, f64)]) -> Result<f64> {
    let miss = |g: f64| wrap_phase(g - target);
    for w in grid.windows(2) {
        let ((t0, g0), (t1, g1)) = (w[0], w[1]);
        let (d0, d1) = (miss(g0), miss(g1));
        if d0 == 0.0 {
            return Ok(t0);
        }
        // a sign change across the ±π branch cut is not a root
        if d0.signum() == d1.signum() || (d1 - d0).abs() > PI {
            continue;
        }
        let (mut lo, mut hi, mut dlo) = (t0, t1, d0);
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let dm = miss(gamma_at(alpha, beta, mid)?);
            if dm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if dm.signum() == dlo.signum() {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
        }
        let theta =
            if miss(gamma_at(alpha, beta, lo)?).abs() <= miss(gamma_at(alpha, beta, hi)?).abs() {
                lo
            } else {
                hi
            };
        if miss(gamma_at(alpha, beta, theta)?).abs() < PHASE_TOL {
            return Ok(theta % PI);
        }
    }
    Err(Error::UnreachablePhase { target })
}

pub fn synthesize_grating(alpha: f64, beta: f64, m: usize) -> Result<GratingDesign> {
    synthesize_grating_with(alpha, beta, m, &SynthesisOptions::default())
}

pub fn synthesize_grating_with(
    alpha: f64,
    beta: f64,
    m: usize,
    opts: &SynthesisOptions,
) -> Result<GratingDesign> {
    if m < MIN_ATOMS_PER_CELL {
        return Err(Error::InvalidInput(format!(
            "super-cell needs at least {MIN_ATOMS_PER_CELL} atoms, got {m}"
        )));
    }
    if !opts.c1.is_finite() {
        return Err(Error::InvalidInput("C1 must be finite".into()));
    }
    if !(opts.lattice_constant_nm > 0.0 && opts.lattice_constant_nm.is_finite()) {
        return Err(Error::InvalidInput(
            "lattice constant must be positive".into(),
        ));
    }
    check_pair(alpha, beta)?;
    let grid = (0..=SCAN_POINTS)
        .map(|k| {
            let t = PI * k as f64 / SCAN_POINTS as f64;
            gamma_at(alpha, beta, t).map(|g| (t, g))
        })
        .collect::<Result<Vec<_>>>()?;
    let atoms = (0..m)
        .map(|n| {
            let target = wrap_phase(opts.c1 - TAU * n as f64 / m as f64);
            let theta = orientation_for_phase(alpha, beta, target, &grid)?;
            let (atom, gamma) = solve_meta_atom(alpha, beta, theta)?;
            Ok(GratingAtom {
                n,
                theta,
                phi1: atom.phi1,
                phi2: atom.phi2,
                gamma,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GratingDesign {
        alpha,
        beta,
        m,
        c1: opts.c1,
        lattice_constant_nm: opts.lattice_constant_nm,
        atoms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffractionOrder {
    pub order: i64,
    pub efficiency: f64,
}

/// Power fractions in each super-cell Fourier order, `−⌊(m−1)/2⌋ ..= ⌊m/2⌋`.
/// A field ramp `e^{−2πin/m}` lands in order −1.
pub fn diffraction_spectrum(design: &GratingDesign, input: &JonesVector) -> Vec<DiffractionOrder> {
    let m = design.atoms.len();
    let fields: Vec<JonesVector> = design
        .atoms
        .iter()
        .map(|a| a.atom().matrix().apply(input))
        .collect();
    let total: f64 = fields.iter().map(JonesVector::norm_sqr).sum::<f64>() / m as f64;
    let lo = -(((m as i64) - 1) / 2);
    let hi = m as i64 / 2;
    (lo..=hi)
        .map(|q| {
            let mut amp = [Complex64::new(0.0, 0.0); 2];
            for (n, f) in fields.iter().enumerate() {
                let w =
                    Complex64::from_polar(1.0 / m as f64, -TAU * (q * n as i64) as f64 / m as f64);
                amp[0] += f.h * w;
                amp[1] += f.v * w;
            }
            let power = amp[0].norm_sqr() + amp[1].norm_sqr();
            DiffractionOrder {
                order: q,
                efficiency: if total > 0.0 { power / total } else { 0.0 },
            }
        })
        .collect()
}

pub fn order_efficiency(spectrum: &[DiffractionOrder], order: i64) -> f64 {
    spectrum
        .iter()
        .find(|o| o.order == order)
        .map_or(0.0, |o| o.efficiency)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleaveCapacity {
    pub x_limit: u64,
    pub y_limit: u64,
    pub capacity: u64,
}

/// Largest integer strictly below `ratio`.
fn strictly_below(ratio: f64) -> u64 {
    let r = ratio.round();
    if (ratio - r).abs() <= 1e-9 * ratio.max(1.0) {
        (r as u64).saturating_sub(1)
    } else {
        ratio.floor() as u64
    }
}

/// Gratings that fit an `Lx × Ly` aperture when each needs `Qg` lattice
/// sites horizontally and `Qi1·Qi2` vertically. Both limits use the strict
/// inequality.
pub fn interleave_capacity(
    lx_mm: f64,
    ly_mm: f64,
    qg: u64,
    qi1: u64,
    qi2: u64,
    dr_nm: f64,
) -> Result<InterleaveCapacity> {
    if !(lx_mm > 0.0 && ly_mm > 0.0 && dr_nm > 0.0)
        || !(lx_mm.is_finite() && ly_mm.is_finite() && dr_nm.is_finite())
    {
        return Err(Error::InvalidInput(
            "aperture and lattice constant must be positive".into(),
        ));
    }
    if qg == 0 || qi1 == 0 || qi2 == 0 {
        return Err(Error::InvalidInput("repeat counts must be positive".into()));
    }
    let x_limit = strictly_below(lx_mm * 1e6 / (qg as f64 * dr_nm));
    let y_limit = strictly_below(ly_mm * 1e6 / ((qi1 * qi2) as f64 * dr_nm));
    Ok(InterleaveCapacity {
        x_limit,
        y_limit,
        capacity: x_limit.min(y_limit),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetasurfaceLayout {
    pub gratings: Vec<GratingDesign>,
    pub lx_mm: f64,
    pub ly_mm: f64,
    pub qg: u64,
    pub qi1: u64,
    pub qi2: u64,
    pub lattice_constant_nm: f64,
}

impl MetasurfaceLayout {
    pub fn new(
        gratings: Vec<GratingDesign>,
        lx_mm: f64,
        ly_mm: f64,
        qg: u64,
        qi1: u64,
        qi2: u64,
        lattice_constant_nm: f64,
    ) -> Result<Self> {
        let layout = Self {
            gratings,
            lx_mm,
            ly_mm,
            qg,
            qi1,
            qi2,
            lattice_constant_nm,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn capacity(&self) -> Result<InterleaveCapacity> {
        interleave_capacity(
            self.lx_mm,
            self.ly_mm,
            self.qg,
            self.qi1,
            self.qi2,
            self.lattice_constant_nm,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.gratings.is_empty() {
            return Err(Error::InvalidInput("layout has no gratings".into()));
        }
        for g in &self.gratings {
            g.validate()?;
        }
        let cap = self.capacity()?;
        if self.gratings.len() as u64 > cap.capacity {
            return Err(Error::InvalidInput(format!(
                "{} gratings exceed the interleaving capacity {} (x limit {}, y limit {})",
                self.gratings.len(),
                cap.capacity,
                cap.x_limit,
                cap.y_limit
            )));
        }
        Ok(())
    }
}

/// Lossless equal-area model of an interleaved layout: grating `k` feeds
/// ports `2k` (its `ψ`) and `2k+1` (its `ψ̃`), each row scaled by `1/√G`.
pub fn ideal_transfer_matrix(layout: &MetasurfaceLayout) -> Result<TransferMatrix> {
    layout.validate()?;
    let g = layout.gratings.len() as f64;
    let w = 1.0 / g.sqrt();
    let mut rows = Vec::with_capacity(2 * layout.gratings.len());
    for grating in &layout.gratings {
        let (psi, psi_perp) = grating.pair();
        rows.push(psi.scale(w).bra());
        rows.push(psi_perp.scale(w).bra());
    }
    TransferMatrix::new(rows, 1.0)
}
