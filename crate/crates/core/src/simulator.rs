//! Forward model: port probabilities, N-fold correlations through a
//! metasurface transfer matrix, two-photon delay scans, QWP-prepared states
//! and Poisson shot noise.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use log::warn;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{InstrumentMatrix, PortRows};
use crate::linalg::{self, CMatrix};
use crate::polarization::{self, meta_atom_matrix, DensityMatrix, JonesVector};

/// Spectral overlap of the characterized photon-pair source.
pub const PUBLISHED_ETA: f64 = 0.58;

/// Rows `u_a^H` of an `M×2` metasurface transfer matrix, times a real
/// scale `ξ`. Each row is only defined up to a phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "crate::io::TransferMatrixFile",
    into = "crate::io::TransferMatrixFile"
)]
pub struct TransferMatrix {
    rows: Vec<[Complex64; 2]>,
    scale: f64,
}

impl TransferMatrix {
    pub fn new(rows: Vec<[Complex64; 2]>, scale: f64) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "transfer matrix needs at least 2 ports, got {}",
                rows.len()
            )));
        }
        if !(scale.is_finite() && scale != 0.0) {
            return Err(Error::InvalidInput(
                "transfer-matrix scale must be finite and nonzero".into(),
            ));
        }
        for (a, r) in rows.iter().enumerate() {
            if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "port {} has non-finite entries",
                    a + 1
                )));
            }
            if r[0].norm_sqr() + r[1].norm_sqr() == 0.0 {
                return Err(Error::InvalidInput(format!(
                    "port {} is an all-zero row",
                    a + 1
                )));
            }
        }
        Ok(Self { rows, scale })
    }

    pub fn from_frame(ports: &[JonesVector]) -> Result<Self> {
        Self::new(ports.iter().map(JonesVector::bra).collect(), 1.0)
    }

    /// On-site characterized six-port metasurface at 1570.6 nm, `ξ = 1`.
    pub fn published() -> Self {
        let c = Complex64::new;
        let rows = vec![
            [c(1.000, 0.0), c(-0.3227, -0.7070)],
            [c(1.2022, 0.2874), c(0.6484, 0.0)],
            [c(0.1781, 0.1282), c(0.7935, 0.0)],
            [c(-0.2692, -0.8502), c(0.2683, 0.0)],
            [c(-0.6830, 0.0063), c(0.8625, 0.0)],
            [c(0.1971, -0.5392), c(1.1189, 0.0)],
        ];
        Self { rows, scale: 1.0 }
    }

    pub fn n_ports(&self) -> usize {
        self.rows.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Rows without the scale factor.
    pub fn raw_rows(&self) -> &[[Complex64; 2]] {
        &self.rows
    }

    /// Row `a` including the scale factor.
    pub fn row(&self, a: usize) -> [Complex64; 2] {
        [self.rows[a][0] * self.scale, self.rows[a][1] * self.scale]
    }

    pub fn rows(&self) -> Vec<[Complex64; 2]> {
        (0..self.n_ports()).map(|a| self.row(a)).collect()
    }

    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        Self::new(self.rows.clone(), scale)
    }

    /// Multiplies each row by `e^{iχ_a}`.
    pub fn with_row_phases(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.n_ports() {
            return Err(Error::DimensionMismatch {
                expected: self.n_ports().to_string(),
                found: phases.len().to_string(),
            });
        }
        let rows = self
            .rows
            .iter()
            .zip(phases)
            .map(|(r, &chi)| {
                let g = Complex64::from_polar(1.0, chi);
                [r[0] * g, r[1] * g]
            })
            .collect();
        Self::new(rows, self.scale)
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.n_ports(), 2, |a, k| self.row(a)[k])
    }

    pub fn instrument_matrix(&self) -> InstrumentMatrix {
        InstrumentMatrix::from_rows(&self.rows())
    }

    pub fn check_port(&self, a: usize) -> Result<()> {
        if a >= self.n_ports() {
            return Err(Error::InvalidInput(format!(
                "port {} out of range 1..={}",
                a + 1,
                self.n_ports()
            )));
        }
        Ok(())
    }
}

impl PortRows for TransferMatrix {
    fn port_rows(&self) -> Vec<[Complex64; 2]> {
        self.rows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Expected,
    Counts,
}

/// N-fold correlations indexed by strictly increasing 0-based port tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "crate::io::CorrelationSetFile",
    into = "crate::io::CorrelationSetFile"
)]
pub struct CorrelationSet {
    n_photons: usize,
    units: Units,
    entries: BTreeMap<Vec<usize>, f64>,
}

impl CorrelationSet {
    pub fn new(n_photons: usize, units: Units, entries: BTreeMap<Vec<usize>, f64>) -> Result<Self> {
        if n_photons == 0 {
            return Err(Error::InvalidInput(
                "photon number must be at least 1".into(),
            ));
        }
        for (ports, &value) in &entries {
            if ports.len() != n_photons {
                return Err(Error::InvalidInput(format!(
                    "tuple {ports:?} does not have {n_photons} ports"
                )));
            }
            if ports.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(format!(
                    "tuple {ports:?} is not strictly increasing"
                )));
            }
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "value {value} at {ports:?} is negative or non-finite"
                )));
            }
            if units == Units::Counts && value.fract() != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "count {value} at {ports:?} is not an integer"
                )));
            }
        }
        Ok(Self {
            n_photons,
            units,
            entries,
        })
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.entries
    }

    pub fn get(&self, ports: &[usize]) -> Option<f64> {
        self.entries.get(ports).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Rescaled so the values sum to one (unchanged when the total is zero).
    pub fn normalized(&self) -> Self {
        let total = self.total();
        let mut out = self.clone();
        if total > 0.0 {
            out.units = Units::Expected;
            out.entries.values_mut().for_each(|v| *v /= total);
        }
        out
    }

    /// Largest port index referenced, plus one.
    pub fn min_port_count(&self) -> usize {
        self.entries
            .keys()
            .filter_map(|k| k.last())
            .max()
            .map_or(0, |m| m + 1)
    }
}

/// All strictly increasing `n`-tuples from `0..m`, lexicographic.
pub fn increasing_tuples(m: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for a in start..m {
            cur.push(a);
            rec(a + 1, m, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n <= m {
        rec(0, m, n, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `p_a = u_a^H ρ u_a` for a single photon.
pub fn port_probabilities(t: &TransferMatrix, rho: &DensityMatrix) -> Result<Vec<f64>> {
    if rho.n_photons() != 1 {
        return Err(Error::InvalidInput(format!(
            "port probabilities need N = 1, got N = {}",
            rho.n_photons()
        )));
    }
    Ok((0..t.n_ports())
        .map(|a| linalg::sandwich(&t.row(a), rho.matrix()).re.max(0.0))
        .collect())
}

/// Unclipped `N!·[u_{a1}⊗…⊗u_{aN}]^H ρ [u_{a1}⊗…⊗u_{aN}]`.
pub fn correlation_value(t: &TransferMatrix, rho: &DensityMatrix, ports: &[usize]) -> Result<f64> {
    if ports.len() != rho.n_photons() {
        return Err(Error::DimensionMismatch {
            expected: rho.n_photons().to_string(),
            found: ports.len().to_string(),
        });
    }
    for &a in ports {
        t.check_port(a)?;
    }
    let rows: Vec<[Complex64; 2]> = ports.iter().map(|&a| t.row(a)).collect();
    let v = linalg::kron_rows(&rows);
    Ok(factorial(ports.len()) * linalg::sandwich(&v, rho.matrix()).re)
}

/// Expected N-fold coincidences for every strictly increasing port tuple.
/// Bunched tuples (two photons in one port) are not recorded by click
/// detectors and are omitted.
pub fn correlation_tensor(
    t: &TransferMatrix,
    rho: &DensityMatrix,
    n: usize,
) -> Result<CorrelationSet> {
    if rho.n_photons() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}-photon state"),
            found: format!("{}-photon state", rho.n_photons()),
        });
    }
    if n > t.n_ports() {
        return Err(Error::InvalidInput(format!(
            "{n} photons need at least {n} ports, have {}",
            t.n_ports()
        )));
    }
    let sym = polarization::symmetric_support_check(rho);
    if !sym.symmetric {
        warn!(
            "state is not permutation-symmetric (max violation {:.3e}); indistinguishable-detection predictions assume it is",
            sym.max_violation
        );
    }
    let scale_ref = rho.trace().abs().max(1e-300)
        * t.rows()
            .iter()
            .map(|r| r[0].norm_sqr() + r[1].norm_sqr())
            .fold(0.0, f64::max)
            .powi(n as i32);
    let mut entries = BTreeMap::new();
    for ports in increasing_tuples(t.n_ports(), n) {
        let v = correlation_value(t, rho, &ports)?;
        if v < -1e-12 * scale_ref {
            warn!("negative expected correlation {v:.3e} at {ports:?} clipped to zero");
        }
        entries.insert(ports, v.max(0.0));
    }
    CorrelationSet::new(n, Units::Expected, entries)
}

/// Pair source with Gaussian temporal overlap `η(τ) = η0·exp(−τ²/(2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub eta0: f64,
    pub sigma_tau: f64,
}

impl SourceModel {
    pub fn new(eta0: f64, sigma_tau: f64) -> Result<Self> {
        if eta0.is_nan() || eta0.abs() > 1.0 {
            return Err(Error::InvalidInput(format!(
                "|eta0| must be <= 1, got {eta0}"
            )));
        }
        if !(sigma_tau > 0.0 && sigma_tau.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "delay width must be positive, got {sigma_tau}"
            )));
        }
        Ok(Self { eta0, sigma_tau })
    }

    pub fn eta_at(&self, delay: f64) -> f64 {
        self.eta0 * (-delay * delay / (2.0 * self.sigma_tau * self.sigma_tau)).exp()
    }

    pub fn state_at(&self, delay: f64) -> DensityMatrix {
        DensityMatrix::cross_polarized_pair(self.eta_at(delay))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomPoint {
    pub delay: f64,
    pub expected: f64,
}

/// Two-fold coincidence between ports `a` and `b` (0-based) as the pair delay
/// is scanned.
pub fn hom_scan(
    t: &TransferMatrix,
    ports: (usize, usize),
    source: &SourceModel,
    delays: &[f64],
) -> Result<Vec<HomPoint>> {
    let (a, b) = ports;
    t.check_port(a)?;
    t.check_port(b)?;
    if a == b {
        return Err(Error::InvalidInput(
            "HOM scan needs two distinct ports".into(),
        ));
    }
    let tuple = [a.min(b), a.max(b)];
    delays
        .iter()
        .map(|&delay| {
            let c = correlation_value(t, &source.state_at(delay), &tuple)?;
            Ok(HomPoint {
                delay,
                expected: c.max(0.0),
            })
        })
        .collect()
}

/// `(C(η=0) − C(η0)) / C(η=0)`: positive for a dip, negative for a peak.
pub fn hom_relative_depth(t: &TransferMatrix, ports: (usize, usize), eta0: f64) -> Result<f64> {
    let tuple = [ports.0.min(ports.1), ports.0.max(ports.1)];
    let matched = correlation_value(t, &DensityMatrix::cross_polarized_pair(eta0), &tuple)?;
    let mismatched = correlation_value(t, &DensityMatrix::cross_polarized_pair(0.0), &tuple)?;
    if mismatched <= 0.0 {
        return Err(Error::InvalidInput(
            "ports see no coincidences for distinguishable photons".into(),
        ));
    }
    Ok((mismatched - matched) / mismatched)
}

/// Quarter-wave plate with its fast axis at `θ`.
pub fn quarter_wave_plate(theta: f64) -> CMatrix {
    meta_atom_matrix(theta, 0.0, FRAC_PI_2).to_matrix()
}

/// QWP-transformed state. Defaults: `|V⟩` for one photon, the
/// cross-polarized pair with `η = 0.58` for two. The plate acts on every
/// photon of the collinear beam.
pub fn qwp_state(theta: f64, n: usize, base: Option<&DensityMatrix>) -> Result<DensityMatrix> {
    let default;
    let base = match (base, n) {
        (Some(b), _) => b,
        (None, 1) => {
            default = DensityMatrix::from_jones(&JonesVector::vertical());
            &default
        }
        (None, 2) => {
            default = DensityMatrix::cross_polarized_pair(PUBLISHED_ETA);
            &default
        }
        (None, _) => {
            return Err(Error::InvalidInput(format!(
                "QWP states are modeled for N = 1 or 2, got {n}"
            )))
        }
    };
    if n == 0 || n > 2 {
        return Err(Error::InvalidInput(format!(
            "QWP states are modeled for N = 1 or 2, got {n}"
        )));
    }
    if base.n_photons() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}-photon base"),
            found: format!("{}-photon base", base.n_photons()),
        });
    }
    let q = quarter_wave_plate(theta);
    let full = if n == 1 { q } else { q.kronecker(&q) };
    base.conjugate_by(&full)
}

/// Deterministic per-tuple stream id.
fn tuple_stream(ports: &[usize]) -> u64 {
    // splitmix64 finalizer folded over the tuple
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15 ^ ports.len() as u64;
    for &p in ports {
        h = h.wrapping_add(p as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

/// Poisson counts with mean `shots · expected` per tuple. Each tuple draws
/// from its own ChaCha stream keyed by `(seed, tuple)`, so results do not
/// depend on evaluation order.
pub fn sample_counts(expected: &CorrelationSet, shots: f64, seed: u64) -> Result<CorrelationSet> {
    if expected.units() != Units::Expected {
        return Err(Error::InvalidInput(
            "sampling needs expected values, not counts".into(),
        ));
    }
    if !(shots > 0.0 && shots.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "shots must be positive, got {shots}"
        )));
    }
    let mut entries = BTreeMap::new();
    for (ports, &mean) in expected.entries() {
        let lambda = shots * mean;
        let k = if lambda > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(tuple_stream(ports));
            let dist = Poisson::new(lambda)
                .map_err(|e| Error::InvalidInput(format!("Poisson mean {lambda}: {e}")))?;
            dist.sample(&mut rng)
        } else {
            0.0
        };
        entries.insert(ports.clone(), k);
    }
    CorrelationSet::new(expected.n_photons(), Units::Counts, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};
    use crate::polarization::{elliptical_pair, fidelity};

    #[test]
    fn published_pair_values() {
        let t = TransferMatrix::published();
        let rho = DensityMatrix::cross_polarized_pair(0.58);
        let rho0 = DensityMatrix::cross_polarized_pair(0.0);
        let c = correlation_tensor(&t, &rho, 2).unwrap();
        let c0 = correlation_tensor(&t, &rho0, 2).unwrap();
        assert!((c.get(&[0, 5]).unwrap() - 0.8737).abs() < 5e-4);
        assert!((c0.get(&[0, 4]).unwrap() - 1.0256).abs() < 5e-4);
        assert_eq!(c.len(), 15);
    }

    #[test]
    fn orthonormal_pair_matches_permutation_sum() {
        // T = {H, V}; ρ = |Ψ+⟩⟨Ψ+|. Oracle: the click probability for
        // (port 1, port 2) is the sum over both photon orderings,
        // |⟨H V|Ψ+⟩|² + |⟨V H|Ψ+⟩|² = 1/2 + 1/2.
        let t = TransferMatrix::new(vec![[ONE, ZERO], [ZERO, ONE]], 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [ZERO, s.into(), s.into(), ZERO];
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let brute: f64 = [1usize, 2].iter().map(|&k| psi[k].norm_sqr()).sum();
        let c = correlation_tensor(&t, &rho, 2).unwrap();
        assert!((c.get(&[0, 1]).unwrap() - brute).abs() < 1e-15);
    }

    #[test]
    fn port_probability_examples() {
        let t = TransferMatrix::new(vec![[ONE, ZERO], [ZERO, ONE]], 1.0).unwrap();
        let h = DensityMatrix::from_jones(&JonesVector::horizontal());
        assert_eq!(port_probabilities(&t, &h).unwrap(), vec![1.0, 0.0]);

        let p = TransferMatrix::published();
        let probs = port_probabilities(&p, &DensityMatrix::maximally_mixed(1)).unwrap();
        for (a, pa) in probs.iter().enumerate() {
            let r = p.row(a);
            assert!((pa - (r[0].norm_sqr() + r[1].norm_sqr()) / 2.0).abs() < 1e-14);
        }
        assert!(port_probabilities(&p, &DensityMatrix::maximally_mixed(2)).is_err());
    }

    #[test]
    fn qwp_sweep_matches_instrument_path() {
        let t = TransferMatrix::published();
        let a = t.instrument_matrix();
        for k in 0..36 {
            let theta = k as f64 * std::f64::consts::PI / 36.0;
            let rho = qwp_state(theta, 1, None).unwrap();
            let s = polarization::stokes_from_density(&rho).unwrap().as_array();
            let direct = port_probabilities(&t, &rho).unwrap();
            for (m, d) in direct.iter().enumerate() {
                let via: f64 = (0..4).map(|c| a.row(m)[c] * s[c]).sum();
                assert!((d - via).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qwp_examples() {
        let v = qwp_state(0.0, 1, None).unwrap();
        assert!((v.matrix()[(1, 1)].re - 1.0).abs() < 1e-15);
        let pair = qwp_state(0.0, 2, None).unwrap();
        let base = DensityMatrix::cross_polarized_pair(PUBLISHED_ETA);
        assert!(linalg::max_abs(&(pair.matrix() - base.matrix())) < 1e-15);
        assert!(qwp_state(0.1, 3, None).is_err());
        let tilted = qwp_state(37.5_f64.to_radians(), 2, None).unwrap();
        assert!(tilted.matrix().iter().any(|z| z.im.abs() > 1e-3));
        assert!((tilted.trace() - 1.0).abs() < 1e-14);
        assert!(polarization::symmetric_support_check(&tilted).symmetric);
    }

    #[test]
    fn qwp_two_photon_matches_direct_conjugation() {
        let theta = 37.5_f64.to_radians();
        let (s, c) = theta.sin_cos();
        // Oracle: Q = R(θ) diag(1, i) R(−θ) multiplied out entrywise.
        let i = linalg::I;
        let q = CMatrix::from_row_slice(
            2,
            2,
            &[
                c * c + i * s * s,
                c * s - i * c * s,
                s * c - i * s * c,
                s * s + i * c * c,
            ],
        );
        let qq = q.kronecker(&q);
        let base = DensityMatrix::cross_polarized_pair(PUBLISHED_ETA);
        let want = &qq * base.matrix() * qq.adjoint();
        let got = qwp_state(theta, 2, None).unwrap();
        assert!(linalg::max_abs(&(got.matrix() - want)) < 1e-14);
    }

    #[test]
    fn hom_scan_examples() {
        let t = TransferMatrix::published();
        let src = SourceModel::new(0.58, 1.0).unwrap();
        let dip = hom_relative_depth(&t, (0, 5), 0.58).unwrap();
        assert!((dip - 0.3979).abs() < 5e-4);
        let peak = hom_relative_depth(&t, (0, 4), 0.58).unwrap();
        assert!((-peak - 0.2193).abs() < 5e-4);

        let flat = SourceModel::new(0.0, 1.0).unwrap();
        let delays: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.5).collect();
        let scan = hom_scan(&t, (0, 5), &flat, &delays).unwrap();
        for p in &scan {
            assert!((p.expected - scan[0].expected).abs() < 1e-12);
        }

        assert!(hom_scan(&t, (0, 0), &src, &delays).is_err());
        assert!(hom_scan(&t, (0, 6), &src, &delays).is_err());
        assert!(SourceModel::new(1.5, 1.0).is_err());
    }

    #[test]
    fn sampling_determinism_and_zeros() {
        let t = TransferMatrix::published();
        let mut c = correlation_tensor(&t, &DensityMatrix::cross_polarized_pair(0.58), 2).unwrap();
        c.entries.insert(vec![0, 1], 0.0);
        let a = sample_counts(&c, 1e4, 42).unwrap();
        let b = sample_counts(&c, 1e4, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.get(&[0, 1]), Some(0.0));
        assert_eq!(a.units(), Units::Counts);
        assert!(sample_counts(&a, 1.0, 1).is_err());
        assert!(sample_counts(&c, 0.0, 1).is_err());
        let other = sample_counts(&c, 1e4, 43).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn correlation_set_validation() {
        let mut e = BTreeMap::new();
        e.insert(vec![1, 0], 1.0);
        assert!(CorrelationSet::new(2, Units::Expected, e).is_err());
        let mut e = BTreeMap::new();
        e.insert(vec![0, 1], -1.0);
        assert!(CorrelationSet::new(2, Units::Expected, e).is_err());
        let mut e = BTreeMap::new();
        e.insert(vec![0, 1], 1.5);
        assert!(CorrelationSet::new(2, Units::Counts, e).is_err());
    }

    #[test]
    fn tuples_are_lexicographic() {
        let t = increasing_tuples(4, 2);
        assert_eq!(
            t,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(increasing_tuples(6, 3).len(), 20);
        assert!(increasing_tuples(2, 3).is_empty());
    }

    #[test]
    fn transfer_matrix_validation() {
        assert!(TransferMatrix::new(vec![[ONE, ZERO]], 1.0).is_err());
        assert!(TransferMatrix::new(vec![[ONE, ZERO], [ZERO, ZERO]], 1.0).is_err());
        let t =
            TransferMatrix::from_frame(&[elliptical_pair(0.2, 0.3).0, elliptical_pair(0.2, 0.3).1])
                .unwrap();
        assert_eq!(t.n_ports(), 2);
        let _ = fidelity;
    }
}
