//! Density-matrix estimation from correlation data: linear inversion,
//! Poisson maximum likelihood, coincidence-histogram fitting and metrics.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use log::{debug, warn};
use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{numerical_rank, InstrumentMatrix};
use crate::linalg::{self, CMatrix};
use crate::polarization::{self, DensityMatrix};
use crate::simulator::{factorial, CorrelationSet, TransferMatrix, Units};

pub const MIN_HISTOGRAM_BINS: usize = 8;
const LM_MAX_ITERATIONS: usize = 500;

/// Permutation-invariant Hermitian operators on `N` photons, spanned by
/// symmetrized Pauli strings: one element per multiset of Stokes indices,
/// `C(N+3, 3)` in total.
#[derive(Debug, Clone)]
pub struct SymmetricBasis {
    n_photons: usize,
    /// Distinct index orderings for each multiset.
    orbits: Vec<Vec<Vec<usize>>>,
    weights: Vec<f64>,
}

impl SymmetricBasis {
    pub fn new(n_photons: usize) -> Self {
        let mut orbits = Vec::new();
        let mut weights = Vec::new();
        for multiset in multisets(n_photons, 4) {
            let mut seen = BTreeSet::new();
            for perm in polarization::slot_permutations(n_photons) {
                seen.insert(perm.iter().map(|&p| multiset[p]).collect::<Vec<_>>());
            }
            let orbit: Vec<Vec<usize>> = seen.into_iter().collect();
            // unit Hilbert-Schmidt norm
            weights.push(1.0 / ((orbit.len() as f64) * (1u64 << n_photons) as f64).sqrt());
            orbits.push(orbit);
        }
        Self {
            n_photons,
            orbits,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    /// Row of the design matrix for one port tuple: the `N!`-weighted
    /// correlation each basis element would produce.
    fn design_row(&self, a: &InstrumentMatrix, ports: &[usize]) -> Vec<f64> {
        let nf = factorial(self.n_photons);
        self.orbits
            .iter()
            .zip(&self.weights)
            .map(|(orbit, w)| {
                let s: f64 = orbit
                    .iter()
                    .map(|ks| {
                        ports
                            .iter()
                            .zip(ks)
                            .map(|(&p, &k)| a.row(p)[k])
                            .product::<f64>()
                    })
                    .sum();
                nf * w * s
            })
            .collect()
    }

    pub fn design_matrix(&self, t: &TransferMatrix, tuples: &[Vec<usize>]) -> DMatrix<f64> {
        let a = t.instrument_matrix();
        let rows: Vec<Vec<f64>> = tuples.iter().map(|p| self.design_row(&a, p)).collect();
        DMatrix::from_fn(rows.len(), self.len(), |i, j| rows[i][j])
    }

    pub fn operator(&self, coeffs: &[f64]) -> CMatrix {
        let paulis = linalg::stokes_basis();
        let dim = 1usize << self.n_photons;
        let mut acc = CMatrix::zeros(dim, dim);
        for ((orbit, w), &c) in self.orbits.iter().zip(&self.weights).zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            for ks in orbit {
                let mut op = CMatrix::identity(1, 1);
                for &k in ks {
                    op = op.kronecker(&paulis[k]);
                }
                acc += op.scale(c * w);
            }
        }
        acc
    }
}

/// Nondecreasing length-`n` sequences over `0..k`.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for x in start..k {
            cur.push(x);
            rec(x, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn check_inputs(t: &TransferMatrix, corr: &CorrelationSet) -> Result<()> {
    let n = corr.n_photons();
    if corr.min_port_count() > t.n_ports() {
        return Err(Error::DimensionMismatch {
            expected: format!("ports within 1..={}", t.n_ports()),
            found: format!("port {}", corr.min_port_count()),
        });
    }
    if corr.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no {n}-fold correlations given"
        )));
    }
    Ok(())
}

/// Coefficients of the least-squares solution in the symmetric basis,
/// without trace normalization.
pub fn linear_solve(
    t: &TransferMatrix,
    corr: &CorrelationSet,
) -> Result<(SymmetricBasis, Vec<f64>)> {
    check_inputs(t, corr)?;
    let basis = SymmetricBasis::new(corr.n_photons());
    let tuples: Vec<Vec<usize>> = corr.entries().keys().cloned().collect();
    let d = basis.design_matrix(t, &tuples);
    let rank = numerical_rank(&d);
    if rank < basis.len() {
        return Err(Error::UnderdeterminedSystem {
            rank,
            parameters: basis.len(),
        });
    }
    let b = DVector::from_iterator(tuples.len(), corr.entries().values().copied());
    let pinv = d
        .pseudo_inverse(1e-14)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let c = pinv * b;
    Ok((basis, c.iter().copied().collect()))
}

/// Pseudo-inverse estimate, trace-normalized. Hermitian by construction and
/// permutation-invariant; positivity is not enforced.
pub fn linear_reconstruct(t: &TransferMatrix, corr: &CorrelationSet) -> Result<DensityMatrix> {
    let (basis, c) = linear_solve(t, corr)?;
    let rho = DensityMatrix::new(corr.n_photons(), basis.operator(&c))?;
    let est = rho.normalized()?;
    if !est.is_physical() {
        debug!(
            "linear estimate is unphysical (min eigenvalue {:.3e})",
            est.min_eigenvalue()
        );
    }
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Linear,
    Mle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop when the relative log-likelihood change falls below this.
    pub tolerance: f64,
    /// Relative central-difference step.
    pub gradient_step: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tolerance: 1e-10,
            gradient_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleResult {
    pub rho: DensityMatrix,
    pub log_likelihood: f64,
    /// Log-likelihood after each accepted step, starting at the initial point.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Fitted `Σk / Σμ`.
    pub scale: f64,
}

/// Maps `4^N` reals to the lower-triangular `L` of `ρ ∝ L L^H`: the diagonal
/// first, then (re, im) of each sub-diagonal entry row by row.
fn cholesky_from_params(x: &[f64], dim: usize) -> CMatrix {
    let mut l = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        l[(i, i)] = x[i].into();
    }
    let mut k = dim;
    for i in 0..dim {
        for j in 0..i {
            l[(i, j)] = Complex64::new(x[k], x[k + 1]);
            k += 2;
        }
    }
    l
}

fn params_from_cholesky(l: &CMatrix) -> Vec<f64> {
    let dim = l.nrows();
    let mut x: Vec<f64> = (0..dim).map(|i| l[(i, i)].re).collect();
    for i in 0..dim {
        for j in 0..i {
            x.push(l[(i, j)].re);
            x.push(l[(i, j)].im);
        }
    }
    x
}

struct Likelihood<'a> {
    n_photons: usize,
    vectors: Vec<Vec<Complex64>>,
    counts: Vec<f64>,
    total: f64,
    _t: &'a TransferMatrix,
}

impl<'a> Likelihood<'a> {
    fn new(t: &'a TransferMatrix, corr: &CorrelationSet) -> Self {
        let nf = factorial(corr.n_photons()).sqrt();
        let vectors = corr
            .entries()
            .keys()
            .map(|ports| {
                let rows: Vec<[Complex64; 2]> = ports.iter().map(|&a| t.row(a)).collect();
                linalg::kron_rows(&rows)
                    .into_iter()
                    .map(|z| z * nf)
                    .collect()
            })
            .collect();
        let counts: Vec<f64> = corr.entries().values().copied().collect();
        let total = counts.iter().sum();
        Self {
            n_photons: corr.n_photons(),
            vectors,
            counts,
            total,
            _t: t,
        }
    }

    fn state(&self, x: &[f64]) -> Option<DensityMatrix> {
        let dim = 1usize << self.n_photons;
        let l = cholesky_from_params(x, dim);
        let raw = &l * l.adjoint();
        let tr = raw.trace().re;
        if !(tr > 0.0 && tr.is_finite()) {
            return None;
        }
        DensityMatrix::new(self.n_photons, raw.unscale(tr))
            .ok()
            .map(|r| r.twirled())
    }

    /// Poisson log-likelihood with the scale profiled out; the `log k!`
    /// terms are dropped.
    fn evaluate_state(&self, rho: &DensityMatrix) -> (f64, f64) {
        let mu: Vec<f64> = self
            .vectors
            .iter()
            .map(|v| linalg::sandwich(v, rho.matrix()).re.max(1e-300))
            .collect();
        let mu_total: f64 = mu.iter().sum();
        let s = self.total / mu_total;
        let ll = self
            .counts
            .iter()
            .zip(&mu)
            .map(|(&k, &m)| {
                if k > 0.0 {
                    k * (s * m).ln() - s * m
                } else {
                    -s * m
                }
            })
            .sum();
        (ll, s)
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self.state(x) {
            Some(rho) => self.evaluate_state(&rho).0,
            None => f64::NEG_INFINITY,
        }
    }
}

fn numeric_gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64], rel_step: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = rel_step * x[i].abs().max(1.0);
            let orig = xp[i];
            xp[i] = orig + h;
            let fp = f(&xp);
            xp[i] = orig - h;
            let fm = f(&xp);
            xp[i] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Maximizes `f` by BFGS with Armijo backtracking. Returns the best point,
/// the value history, iterations used and whether the tolerance was met.
fn bfgs_maximize(
    f: impl Fn(&[f64]) -> f64,
    x0: Vec<f64>,
    opts: &MleOptions,
) -> (Vec<f64>, Vec<f64>, usize, bool) {
    let n = x0.len();
    let neg = |x: &[f64]| -f(x);
    let mut x = DVector::from_vec(x0);
    let mut fx = neg(x.as_slice());
    let mut g = DVector::from_vec(numeric_gradient(&neg, x.as_slice(), opts.gradient_step));
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut history = vec![-fx];
    let mut reset = false;
    for iter in 1..=opts.max_iterations {
        let mut dir = -(&h * &g);
        let mut slope = g.dot(&dir);
        if slope.is_nan() || slope >= 0.0 {
            h = DMatrix::identity(n, n);
            dir = -g.clone();
            slope = -g.norm_squared();
        }
        if slope == 0.0 {
            return (x.as_slice().to_vec(), history, iter - 1, true);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn = &x + &dir * step;
            let fn_ = neg(xn.as_slice());
            if fn_.is_finite() && fn_ <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fn_));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            if reset {
                // no descent along the steepest direction either: stationary
                return (x.as_slice().to_vec(), history, iter - 1, true);
            }
            h = DMatrix::identity(n, n);
            reset = true;
            continue;
        };
        reset = false;
        let gn = DVector::from_vec(numeric_gradient(&neg, xn.as_slice(), opts.gradient_step));
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (&s * s.transpose()) * (rho * rho * yhy + rho)
                - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let change = (fx - fn_).abs() / fx.abs().max(1.0);
        x = xn;
        fx = fn_;
        g = gn;
        history.push(-fx);
        if change < opts.tolerance {
            return (x.as_slice().to_vec(), history, iter, true);
        }
    }
    (x.as_slice().to_vec(), history, opts.max_iterations, false)
}

/// Physical estimate maximizing the Poisson likelihood over
/// permutation-invariant states `ρ = twirl(L L^H)/Tr`.
pub fn mle_reconstruct(
    t: &TransferMatrix,
    corr: &CorrelationSet,
    opts: &MleOptions,
) -> Result<MleResult> {
    check_inputs(t, corr)?;
    let n = corr.n_photons();
    if corr.total() == 0.0 {
        return Ok(MleResult {
            rho: DensityMatrix::maximally_mixed(n),
            log_likelihood: 0.0,
            history: vec![0.0],
            iterations: 0,
            converged: true,
            scale: 0.0,
        });
    }
    let start = match linear_reconstruct(t, corr) {
        Ok(rho) => rho.to_physical()?,
        Err(Error::ZeroTrace) => DensityMatrix::maximally_mixed(n),
        Err(e) => return Err(e),
    };
    let dim = start.dim();
    let eps = 1e-6;
    let mixed =
        start.matrix().scale(1.0 - eps) + CMatrix::identity(dim, dim).scale(eps / dim as f64);
    let l0 = Cholesky::new(linalg::hermitian_part(&mixed))
        .map(|c| c.l())
        .unwrap_or_else(|| CMatrix::identity(dim, dim).scale((1.0 / dim as f64).sqrt()));
    let lik = Likelihood::new(t, corr);
    let (x, history, iterations, converged) =
        bfgs_maximize(|x| lik.value(x), params_from_cholesky(&l0), opts);
    let rho = lik.state(&x).ok_or(Error::ZeroTrace)?;
    let (log_likelihood, scale) = lik.evaluate_state(&rho);
    if !converged {
        warn!("MLE stopped after {iterations} iterations without meeting the tolerance");
    }
    Ok(MleResult {
        rho,
        log_likelihood,
        history,
        iterations,
        converged,
        scale,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub method: Method,
    pub n_photons: usize,
    pub rho: Vec<Vec<Complex64>>,
    pub physical: bool,
    pub min_eigenvalue: f64,
    pub purity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concurrence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_vs_reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_likelihood: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ReconstructionReport {
    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        crate::io::density_from_nested(self.n_photons, &self.rho)
    }
}

/// Metrics for an estimate. Concurrence is reported for two photons when the
/// estimate is physical.
pub fn report(
    rho: &DensityMatrix,
    reference: Option<&DensityMatrix>,
    method: Method,
) -> Result<ReconstructionReport> {
    let concurrence = if rho.n_photons() == 2 && rho.is_physical() {
        Some(polarization::concurrence(rho)?)
    } else {
        None
    };
    let fidelity_vs_reference = match reference {
        Some(r) if r.n_photons() != rho.n_photons() => {
            return Err(Error::DimensionMismatch {
                expected: format!("{}-photon reference", rho.n_photons()),
                found: format!("{}-photon reference", r.n_photons()),
            })
        }
        Some(r) => Some(polarization::fidelity(rho, r)?),
        None => None,
    };
    Ok(ReconstructionReport {
        method,
        n_photons: rho.n_photons(),
        rho: crate::io::nested_from_matrix(rho.matrix()),
        physical: rho.is_physical(),
        min_eigenvalue: rho.min_eigenvalue(),
        purity: polarization::purity(rho)?,
        concurrence,
        fidelity_vs_reference,
        log_likelihood: None,
        iterations: 0,
        converged: true,
    })
}

pub fn mle_report(
    result: &MleResult,
    reference: Option<&DensityMatrix>,
) -> Result<ReconstructionReport> {
    let mut r = report(&result.rho, reference, Method::Mle)?;
    r.log_likelihood = Some(result.log_likelihood);
    r.iterations = result.iterations;
    r.converged = result.converged;
    Ok(r)
}

/// Coincidence histogram: counts against bin-center delay.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramData {
    bin_centers: Vec<f64>,
    counts: Vec<f64>,
}

impl HistogramData {
    pub fn new(bin_centers: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        if bin_centers.len() != counts.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} counts", bin_centers.len()),
                found: counts.len().to_string(),
            });
        }
        if bin_centers.iter().any(|t| !t.is_finite())
            || bin_centers.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidInput(
                "bin centers must be finite and strictly increasing".into(),
            ));
        }
        if counts.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
            return Err(Error::InvalidInput("counts must be nonnegative".into()));
        }
        Ok(Self {
            bin_centers,
            counts,
        })
    }

    /// Reads CSV with header `time_ns,counts`.
    pub fn from_csv_reader<R: Read>(r: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            time_ns: f64,
            counts: f64,
        }
        let mut times = Vec::new();
        let mut counts = Vec::new();
        for row in csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(r)
            .deserialize::<Row>()
        {
            let row = row?;
            times.push(row.time_ns);
            counts.push(row.counts);
        }
        Self::new(times, counts)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn bin_centers(&self) -> &[f64] {
        &self.bin_centers
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Median spacing of bin centers.
    pub fn bin_width(&self) -> f64 {
        let mut d: Vec<f64> = self.bin_centers.windows(2).map(|w| w[1] - w[0]).collect();
        d.sort_by(f64::total_cmp);
        d.get(d.len() / 2).copied().unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramFit {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub offset: f64,
    /// Background-free peak area in counts.
    pub extracted_counts: f64,
    pub residual: f64,
    /// Standard errors of (amplitude, center, width, offset).
    pub std_errors: [f64; 4],
    pub iterations: usize,
}

fn gaussian_model(p: &[f64; 4], t: f64) -> (f64, [f64; 4]) {
    let [a, t0, w, b] = *p;
    let z = (t - t0) / w;
    let e = (-0.5 * z * z).exp();
    (a * e + b, [e, a * e * z / w, a * e * z * z / w, 1.0])
}

fn sum_sq(p: &[f64; 4], h: &HistogramData) -> f64 {
    h.bin_centers
        .iter()
        .zip(&h.counts)
        .map(|(&t, &k)| (gaussian_model(p, t).0 - k).powi(2))
        .sum()
}

/// Levenberg–Marquardt fit of `A·exp(−(t−t0)²/(2w²)) + B`.
pub fn fit_histogram(h: &HistogramData) -> Result<HistogramFit> {
    if h.len() < MIN_HISTOGRAM_BINS {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_HISTOGRAM_BINS} bins, got {}",
            h.len()
        )));
    }
    let mut sorted = h.counts.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let (peak_idx, &peak) = h
        .counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let contrast = peak - median;
    let noise = median.max(1.0).sqrt();
    if contrast < 2.0 * noise {
        return Err(Error::DegenerateHistogram { contrast, noise });
    }
    let quarter = (sorted.len() / 4).max(1);
    let b0 = sorted[..quarter].iter().sum::<f64>() / quarter as f64;
    let half = b0 + 0.5 * (peak - b0);
    let above = h.counts.iter().filter(|&&k| k >= half).count().max(1);
    let bw = h.bin_width();
    let mut p = [
        peak - b0,
        h.bin_centers[peak_idx],
        (above as f64 * bw / 2.3548).max(bw / 2.0),
        b0,
    ];
    let mut cost = sum_sq(&p, h);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < LM_MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = nalgebra::Matrix4::<f64>::zeros();
        let mut jtr = nalgebra::Vector4::<f64>::zeros();
        for (&t, &k) in h.bin_centers.iter().zip(&h.counts) {
            let (m, d) = gaussian_model(&p, t);
            let j = nalgebra::Vector4::from(d);
            jtj += j * j.transpose();
            jtr += j * (k - m);
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut lhs = jtj;
            for i in 0..4 {
                lhs[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(delta) = lhs.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = [
                p[0] + delta[0],
                p[1] + delta[1],
                (p[2] + delta[2]).abs(),
                (p[3] + delta[3]).max(0.0),
            ];
            trial[0] = trial[0].max(f64::MIN_POSITIVE);
            let c = sum_sq(&trial, h);
            if c.is_finite() && c <= cost {
                let small_step =
                    (0..4).all(|i| (trial[i] - p[i]).abs() <= 1e-12 * (p[i].abs() + 1e-12));
                let rel = (cost - c) / cost.max(f64::MIN_POSITIVE);
                p = trial;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if small_step || rel < 1e-15 || cost == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no step reduces the residual: a local minimum
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(Error::FitDiverged { iterations });
    }
    let mut jtj = nalgebra::Matrix4::<f64>::zeros();
    for &t in &h.bin_centers {
        let j = nalgebra::Vector4::from(gaussian_model(&p, t).1);
        jtj += j * j.transpose();
    }
    let dof = (h.len() - 4).max(1) as f64;
    let std_errors = match jtj.try_inverse() {
        Some(cov) => std::array::from_fn(|i| (cov[(i, i)] * cost / dof).max(0.0).sqrt()),
        None => [f64::NAN; 4],
    };
    Ok(HistogramFit {
        amplitude: p[0],
        center: p[1],
        width: p[2],
        offset: p[3],
        extracted_counts: p[0] * p[2] * (2.0 * std::f64::consts::PI).sqrt() / bw,
        residual: cost,
        std_errors,
        iterations,
    })
}

/// Which fitted quantity stands in for a tuple's coincidence count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMeasure {
    /// Background-free Gaussian area, in counts.
    #[default]
    Area,
    /// Fitted peak height above the offset, in counts per bin.
    Peak,
}

impl HistogramFit {
    pub fn measure(&self, m: CountMeasure) -> f64 {
        match m {
            CountMeasure::Area => self.extracted_counts,
            CountMeasure::Peak => self.amplitude,
        }
    }
}

/// Turns fitted histograms into a count set; useful when the raw data are
/// per-tuple histograms.
pub fn counts_from_fits(
    n_photons: usize,
    fits: &[(Vec<usize>, HistogramFit)],
    measure: CountMeasure,
) -> Result<CorrelationSet> {
    let entries = fits
        .iter()
        .map(|(ports, f)| (ports.clone(), f.measure(measure).max(0.0).round()))
        .collect();
    CorrelationSet::new(n_photons, Units::Counts, entries)
}
