//! Small dense linear-algebra helpers over `DMatrix<C64>`.

use nalgebra::{DMatrix, DVector, Dim, Matrix, RawStorage};

use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest absolute entry; zero for empty matrices.
pub fn max_abs<R: Dim, K: Dim, S: RawStorage<C64, R, K>>(m: &Matrix<C64, R, K, S>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_slice(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Deviation of `m` from being Hermitian.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are returned in descending order. Each eigenvector is scaled so
/// that its first entry of (near) maximal modulus is real and positive; ties
/// between equal eigenvalues are broken lexicographically on the real parts of
/// the normalized entries. The output is therefore a deterministic function of
/// the input matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut pairs: Vec<(f64, CVector)> = (0..n)
        .map(|k| {
            let v = eig.eigenvectors.column(k).into_owned();
            (eig.eigenvalues[k], normalize_phase(v))
        })
        .collect();
    pairs.sort_by(|(la, va), (lb, vb)| {
        lb.partial_cmp(la)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                let key = |v: &CVector| v.iter().map(|z| z.re).collect::<Vec<_>>();
                key(va)
                    .partial_cmp(&key(vb))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    let values = pairs.iter().map(|(l, _)| *l).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, (_, v)) in pairs.iter().enumerate() {
        vectors.set_column(k, v);
    }
    (values, vectors)
}

/// Rotates `v` by a global phase so that its first entry of maximal modulus
/// (up to a relative 1e-8 slack) is real and positive.
pub fn normalize_phase(v: CVector) -> CVector {
    let top = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return v;
    }
    let pivot = v
        .iter()
        .find(|z| z.norm() >= top * (1.0 - 1e-8))
        .copied()
        .unwrap_or(c(1.0));
    let phase = pivot.conj() / pivot.norm();
    v * phase
}

/// Rotates `v` so that its first entry with modulus above `tol` is real and
/// positive.
pub fn first_nonzero_phase(v: &CVector, tol: f64) -> C64 {
    v.iter()
        .find(|z| z.norm() > tol)
        .map_or(c(1.0), |z| z.conj() / z.norm())
}

/// Smallest eigenvalue of the Hermitian part of `m`; `+inf` when empty.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Operator (spectral) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Numerical rank with a relative singular-value cut.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Moore-Penrose pseudo-inverse with a relative singular-value cut.
pub fn pinv(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let (r, cdim) = (m.nrows(), m.ncols());
    if r == 0 || cdim == 0 {
        return CMatrix::zeros(cdim, r);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut out = CMatrix::zeros(cdim, r);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if top > 0.0 && s > rel_tol * top {
            let uk = u.column(k);
            let vk = v_t.row(k).adjoint();
            out += vk * uk.adjoint() * c(1.0 / s);
        }
    }
    out
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let n = m.ncols();
    if m.nrows() == 0 {
        return identity(n);
    }
    // Pad to a square matrix so the SVD returns a full set of right vectors.
    let mut padded = CMatrix::zeros(m.nrows().max(n), n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cols: Vec<CVector> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| top == 0.0 || s <= rel_tol * top)
        .map(|(k, _)| v_t.row(k).adjoint())
        .collect();
    if cols.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}

/// Dense matrix exponential (Padé approximation with scaling and squaring).
pub fn expm(m: &CMatrix) -> CMatrix {
    if m.nrows() == 0 {
        return m.clone();
    }
    m.clone().exp()
}

/// Direct sum `a ⊕ b`.
pub fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// `I_left ⊗ m ⊗ I_right`.
pub fn embed(m: &CMatrix, left: usize, right: usize) -> CMatrix {
    identity(left).kronecker(m).kronecker(&identity(right))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_is_descending_and_phase_fixed() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(2.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), c(2.0)],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        for k in 0..2 {
            let v = vecs.column(k);
            let pivot = v.iter().find(|z| z.norm() > 0.7).unwrap();
            assert!(pivot.im.abs() < 1e-12 && pivot.re > 0.0);
            let mv = &m * v;
            assert!(max_abs(&(mv - v * c(vals[k]))) < 1e-12);
        }
    }

    #[test]
    fn pinv_of_rank_one() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(1.0)]);
        let p = pinv(&m, 1e-12);
        assert!(max_abs(&(&m * &p * &m - &m)) < 1e-12);
        assert!(max_abs(&(p - CMatrix::from_element(2, 2, c(0.25)))) < 1e-12);
    }

    #[test]
    fn null_space_of_row() {
        let m = CMatrix::from_row_slice(1, 3, &[c(1.0), c(0.0), c(0.0)]);
        let ns = null_space(&m, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!(max_abs(&(&m * &ns)) < 1e-12);
        assert!(max_abs(&(ns.adjoint() * &ns - identity(2))) < 1e-12);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 0.7_f64;
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(t), c(-t), c(0.0)]);
        let e = expm(&m);
        let want = CMatrix::from_row_slice(
            2,
            2,
            &[c(t.cos()), c(t.sin()), c(-t.sin()), c(t.cos())],
        );
        assert!(max_abs(&(e - want)) < 1e-14);
    }
}
