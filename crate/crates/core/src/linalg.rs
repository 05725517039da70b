//! Small dense linear-algebra helpers shared by the physics modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Identity, σz, σx, σy in that order: the Stokes ordering used throughout
/// the crate (`ρ = S0·I + S1·σz + S2·σx + S3·σy`).
pub fn stokes_basis() -> [CMatrix; 4] {
    [
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
    ]
}

pub fn sigma_y() -> CMatrix {
    stokes_basis()[3].clone()
}

/// Largest entry of `|A - A^H|`.
pub fn hermitian_violation(m: &CMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Rebuild `V·diag(f(λ))·V^H`.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let diag = DVector::from_iterator(values.len(), values.iter().map(|&l| Complex64::from(f(l))));
    &vectors * CMatrix::from_diagonal(&diag) * vectors.adjoint()
}

/// Principal square root of a positive-semidefinite matrix; negative rounding
/// noise in the spectrum is clipped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_function(m, |l| l.max(0.0).sqrt())
}

pub fn trace_re(m: &CMatrix) -> f64 {
    m.trace().re
}

/// Permutation matrix on `(C^2)^{⊗n}` that swaps photon slots `i` and `j`.
pub fn slot_swap(n: usize, i: usize, j: usize) -> CMatrix {
    let dim = 1usize << n;
    let mut p = CMatrix::zeros(dim, dim);
    for idx in 0..dim {
        p[(swap_bits(idx, n, i, j), idx)] = ONE;
    }
    p
}

/// Basis index after exchanging slots `i` and `j`; slot 0 is the most
/// significant bit (`|HV⟩` = index 1 for two photons).
pub fn swap_bits(idx: usize, n: usize, i: usize, j: usize) -> usize {
    let bi = n - 1 - i;
    let bj = n - 1 - j;
    let a = (idx >> bi) & 1;
    let b = (idx >> bj) & 1;
    if a == b {
        idx
    } else {
        idx ^ ((1 << bi) | (1 << bj))
    }
}

/// Kronecker product of row vectors, first factor most significant.
pub fn kron_rows(rows: &[[Complex64; 2]]) -> Vec<Complex64> {
    let mut out = vec![ONE];
    for r in rows {
        let mut next = Vec::with_capacity(out.len() * 2);
        for &x in &out {
            next.push(x * r[0]);
            next.push(x * r[1]);
        }
        out = next;
    }
    out
}

/// `v · M · v^H` for a row vector `v`.
pub fn sandwich(v: &[Complex64], m: &CMatrix) -> Complex64 {
    let mut acc = ZERO;
    for (i, vi) in v.iter().enumerate() {
        if *vi == ZERO {
            continue;
        }
        let mut row = ZERO;
        for (j, vj) in v.iter().enumerate() {
            row += m[(i, j)] * vj.conj();
        }
        acc += vi * row;
    }
    acc
}
