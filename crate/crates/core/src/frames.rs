//! Measurement frames: Platonic projective bases on the Poincaré sphere,
//! instrument matrices, condition numbers and port-count formulas.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ONE};
use crate::polarization::{JonesMatrix, JonesVector};

pub const SUPPORTED_PLATONIC: &[usize] = &[6, 8, 12, 20];

/// Singular values below this fraction of the largest are treated as zero
/// when deciding rank.
pub const RANK_CUTOFF: f64 = 1e-12;
/// Below this ratio the condition number is reported as infinite.
pub const SINGULAR_CUTOFF: f64 = 1e-14;

/// Anything that exposes per-port projective rows `u_a^H`.
pub trait PortRows {
    fn port_rows(&self) -> Vec<[Complex64; 2]>;
}

/// Ordered list of port bases `u_a`. Serializes as a plain JSON list of
/// Jones vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frame {
    ports: Vec<JonesVector>,
}

impl Frame {
    pub fn new(ports: Vec<JonesVector>) -> Result<Self> {
        if ports.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a frame needs at least 2 ports, got {}",
                ports.len()
            )));
        }
        if let Some(k) = ports
            .iter()
            .position(|p| !(p.norm_sqr() > 0.0 && p.norm_sqr().is_finite()))
        {
            return Err(Error::InvalidInput(format!(
                "port {} has zero or non-finite norm",
                k + 1
            )));
        }
        Ok(Self { ports })
    }

    pub fn ports(&self) -> &[JonesVector] {
        &self.ports
    }

    pub fn len(&self) -> usize {
        self.ports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty()
    }

    /// Same unitary applied to every port; the frame geometry is unchanged.
    pub fn rotated(&self, u: &JonesMatrix) -> Self {
        Self {
            ports: self.ports.iter().map(|p| u.apply(p)).collect(),
        }
    }

    pub fn instrument_matrix(&self) -> InstrumentMatrix {
        instrument_matrix(self)
    }
}

impl PortRows for Frame {
    fn port_rows(&self) -> Vec<[Complex64; 2]> {
        self.ports.iter().map(JonesVector::bra).collect()
    }
}

/// SU(2) element for a unit quaternion `(w, x, y, z)`, rotating Stokes
/// 3-vectors about `(x, y, z)` in `(S1, S2, S3)` coordinates.
pub fn su2_from_quaternion(q: [f64; 4]) -> Result<JonesMatrix> {
    let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidInput(
            "rotation quaternion must be nonzero and finite".into(),
        ));
    }
    let [w, x, y, z] = q.map(|c| c / n);
    // w·I − i(x·σz + y·σx + z·σy)
    let i = linalg::I;
    Ok(JonesMatrix::new([
        [ONE * w - i * x, -i * y - ONE * z],
        [-i * y + ONE * z, ONE * w + i * x],
    ]))
}

fn golden() -> f64 {
    (1.0 + 5.0_f64.sqrt()) / 2.0
}

fn platonic_vertices(m: usize) -> Result<Vec<[f64; 3]>> {
    let phi = golden();
    let mut v: Vec<[f64; 3]> = Vec::new();
    match m {
        6 => {
            for axis in 0..3 {
                let mut p = [0.0; 3];
                p[axis] = 1.0;
                v.push(p);
            }
        }
        8 => {
            for &a in &[1.0, -1.0] {
                for &b in &[1.0, -1.0] {
                    v.push([1.0, a, b]);
                }
            }
        }
        12 => {
            for &a in &[1.0, -1.0] {
                v.push([0.0, 1.0, a * phi]);
                v.push([1.0, a * phi, 0.0]);
                v.push([a * phi, 0.0, 1.0]);
            }
        }
        20 => {
            for &a in &[1.0, -1.0] {
                for &b in &[1.0, -1.0] {
                    v.push([1.0, a, b]);
                }
            }
            for &a in &[1.0, -1.0] {
                v.push([0.0, 1.0 / phi, a * phi]);
                v.push([1.0 / phi, a * phi, 0.0]);
                v.push([a * phi, 0.0, 1.0 / phi]);
            }
        }
        _ => {
            return Err(Error::UnsupportedPortCount {
                ports: m,
                supported: SUPPORTED_PLATONIC,
            })
        }
    }
    // each listed vertex is followed by its antipode
    let mut out = Vec::with_capacity(m);
    for p in v {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let p = p.map(|c| c / r);
        out.push(p);
        out.push(p.map(|c| -c));
    }
    debug_assert_eq!(out.len(), m);
    Ok(out)
}

/// Canonical axis-aligned Platonic frame. For `M = 6` the ports are
/// H, V, D, A and the two circular states. Ports `2k` and `2k+1` are
/// antipodal on the sphere, i.e. orthogonal Jones vectors.
pub fn platonic_frame(m: usize) -> Result<Frame> {
    let ports = platonic_vertices(m)?
        .into_iter()
        .map(JonesVector::from_stokes_direction)
        .collect();
    Frame::new(ports)
}

pub fn platonic_frame_rotated(m: usize, quaternion: [f64; 4]) -> Result<Frame> {
    Ok(platonic_frame(m)?.rotated(&su2_from_quaternion(quaternion)?))
}

/// `M×4` real map from Stokes vectors to port probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentMatrix {
    entries: DMatrix<f64>,
}

impl InstrumentMatrix {
    pub fn from_rows(rows: &[[Complex64; 2]]) -> Self {
        let basis = linalg::stokes_basis();
        let entries = DMatrix::from_fn(rows.len(), 4, |a, k| {
            let t = rows[a];
            linalg::sandwich(&t, &basis[k]).re
        });
        Self { entries }
    }

    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        if entries.ncols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: "M x 4".into(),
                found: format!("{}x{}", entries.nrows(), entries.ncols()),
            });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn n_ports(&self) -> usize {
        self.entries.nrows()
    }

    pub fn row(&self, a: usize) -> [f64; 4] {
        [
            self.entries[(a, 0)],
            self.entries[(a, 1)],
            self.entries[(a, 2)],
            self.entries[(a, 3)],
        ]
    }

    pub fn condition_number(&self) -> f64 {
        condition_number(&self.entries)
    }
}

pub fn instrument_matrix(source: &impl PortRows) -> InstrumentMatrix {
    InstrumentMatrix::from_rows(&source.port_rows())
}

/// Spectral condition number `σ_max/σ_min`; infinite when singular.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if max.is_nan() || max <= 0.0 || min < SINGULAR_CUTOFF * max {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Numerical rank with the [`RANK_CUTOFF`] threshold.
pub fn numerical_rank(a: &DMatrix<f64>) -> usize {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.max();
    sv.iter().filter(|&&s| s > RANK_CUTOFF * max).count()
}

/// How port efficiencies are treated before computing a condition number.
#[derive(Debug, Clone, PartialEq)]
pub enum RowNormalization {
    /// Rows as measured, including diffraction-efficiency imbalance.
    Raw,
    /// Every row scaled to unit norm.
    PerPort,
    /// Each grating's pair of rows scaled to a common total power, keeping
    /// the imbalance inside a pair.
    PerPair(Vec<(usize, usize)>),
}

pub fn normalize_rows(
    rows: &[[Complex64; 2]],
    norm: &RowNormalization,
) -> Result<Vec<[Complex64; 2]>> {
    let power = |r: &[Complex64; 2]| r[0].norm_sqr() + r[1].norm_sqr();
    let scale = |r: &[Complex64; 2], s: f64| [r[0] * s, r[1] * s];
    match norm {
        RowNormalization::Raw => Ok(rows.to_vec()),
        RowNormalization::PerPort => Ok(rows
            .iter()
            .map(|r| scale(r, 1.0 / power(r).sqrt()))
            .collect()),
        RowNormalization::PerPair(pairs) => {
            let mut seen = vec![false; rows.len()];
            let mut out = rows.to_vec();
            for &(a, b) in pairs {
                if a >= rows.len() || b >= rows.len() || a == b || seen[a] || seen[b] {
                    return Err(Error::InvalidInput(format!(
                        "invalid port pairing ({}, {})",
                        a + 1,
                        b + 1
                    )));
                }
                seen[a] = true;
                seen[b] = true;
                let s = (2.0 / (power(&rows[a]) + power(&rows[b]))).sqrt();
                out[a] = scale(&rows[a], s);
                out[b] = scale(&rows[b], s);
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::InvalidInput(
                    "port pairing does not cover every port".into(),
                ));
            }
            Ok(out)
        }
    }
}

/// Groups ports into the orthogonal pairs produced by each grating, by
/// minimizing the summed normalized overlap. Exhaustive up to 12 ports,
/// greedy beyond.
pub fn grating_pairs(rows: &[[Complex64; 2]]) -> Result<Vec<(usize, usize)>> {
    let m = rows.len();
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "cannot pair an odd number of ports ({m})"
        )));
    }
    let vecs: Vec<JonesVector> = rows.iter().map(|r| JonesVector::new(r[0], r[1])).collect();
    let cost = |a: usize, b: usize| vecs[a].overlap(&vecs[b]);

    if m <= 12 {
        fn search(
            used: &mut Vec<bool>,
            cost: &dyn Fn(usize, usize) -> f64,
            current: &mut Vec<(usize, usize)>,
            acc: f64,
            best: &mut (f64, Vec<(usize, usize)>),
        ) {
            if acc >= best.0 {
                return;
            }
            let Some(a) = used.iter().position(|u| !u) else {
                *best = (acc, current.clone());
                return;
            };
            used[a] = true;
            for b in a + 1..used.len() {
                if !used[b] {
                    used[b] = true;
                    current.push((a, b));
                    search(used, cost, current, acc + cost(a, b), best);
                    current.pop();
                    used[b] = false;
                }
            }
            used[a] = false;
        }
        let mut best = (f64::INFINITY, Vec::new());
        search(&mut vec![false; m], &cost, &mut Vec::new(), 0.0, &mut best);
        return Ok(best.1);
    }

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            candidates.push((cost(a, b), a, b));
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut used = vec![false; m];
    let mut pairs = Vec::new();
    for (_, a, b) in candidates {
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            pairs.push((a, b));
        }
    }
    pairs.sort();
    Ok(pairs)
}

/// Condition numbers of one transfer matrix under the three row treatments.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub raw: f64,
    pub per_port: f64,
    pub per_pair: Option<f64>,
    /// 0-based port pairs used for `per_pair`.
    pub pairs: Option<Vec<(usize, usize)>>,
}

impl ConditionReport {
    pub fn variants(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![("raw", self.raw), ("per-port", self.per_port)];
        if let Some(k) = self.per_pair {
            v.push(("per-pair", k));
        }
        v
    }
}

pub fn condition_report(source: &impl PortRows) -> Result<ConditionReport> {
    let rows = source.port_rows();
    let kappa = |norm: &RowNormalization| -> Result<f64> {
        Ok(InstrumentMatrix::from_rows(&normalize_rows(&rows, norm)?).condition_number())
    };
    let raw = kappa(&RowNormalization::Raw)?;
    let per_port = kappa(&RowNormalization::PerPort)?;
    let (per_pair, pairs) = if rows.len().is_multiple_of(2) {
        let pairs = grating_pairs(&rows)?;
        (
            Some(kappa(&RowNormalization::PerPair(pairs.clone()))?),
            Some(pairs),
        )
    } else {
        (None, None)
    };
    Ok(ConditionReport {
        raw,
        per_port,
        per_pair,
        pairs,
    })
}

/// Lower bound `(√3)^N` on the N-photon condition number.
pub fn multiphoton_condition_bound(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidInput(
            "photon number must be at least 1".into(),
        ));
    }
    Ok(3.0_f64.powf(n as f64 / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionScheme {
    /// Click detectors cannot tell which photon arrived where.
    Indistinguishable,
    /// Photons carry a label (path, frequency) the detectors resolve.
    Distinguishable,
}

fn falling_factorial(m: usize, n: usize) -> BigUint {
    (m - n + 1..=m).fold(BigUint::from(1u32), |acc, k| acc * BigUint::from(k))
}

fn binomial(m: usize, n: usize) -> BigUint {
    let n = n.min(m - n);
    let mut acc = BigUint::from(1u32);
    for k in 0..n {
        acc = acc * BigUint::from(m - k) / BigUint::from(k + 1);
    }
    acc
}

/// Smallest port count that can reconstruct an N-photon state.
///
/// Indistinguishable detection needs `M ≥ N + 3`; distinguishable detection
/// needs `M!/(M−N)! ≥ 4^N`.
pub fn min_ports(n: usize, scheme: DetectionScheme) -> Result<usize> {
    if n < 1 {
        return Err(Error::InvalidInput(
            "photon number must be at least 1".into(),
        ));
    }
    Ok(match scheme {
        DetectionScheme::Indistinguishable => n + 3,
        DetectionScheme::Distinguishable => {
            let need = BigUint::from(4u32).pow(n as u32);
            (n..)
                .find(|&m| falling_factorial(m, n) >= need)
                .expect("falling factorial grows without bound")
        }
    })
}

/// Largest photon number reconstructable with `m` ports.
pub fn max_photons(m: usize, scheme: DetectionScheme) -> usize {
    (1..=m)
        .take_while(|&n| min_ports(n, scheme).map(|need| need <= m).unwrap_or(false))
        .last()
        .unwrap_or(0)
}

/// Number of independent N-fold correlation elements from `m` ports.
pub fn correlation_element_count(m: usize, n: usize, scheme: DetectionScheme) -> Result<BigUint> {
    if n < 1 || n > m {
        return Err(Error::InvalidInput(format!(
            "need 1 <= N <= M, got N = {n}, M = {m}"
        )));
    }
    Ok(match scheme {
        DetectionScheme::Indistinguishable => binomial(m, n),
        DetectionScheme::Distinguishable => falling_factorial(m, n),
    })
}

/// Polarization labels of the canonical six-port frame, in port order.
pub fn six_port_labels() -> [&'static str; 6] {
    ["H", "V", "D", "A", "R", "L"]
}
