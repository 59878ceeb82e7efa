//! Small dense linear-algebra helpers on complex matrices.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// e^{A} by nalgebra's scaling-and-squaring Padé approximant.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    a.clone().exp()
}

/// e^{-i H t} for a Hermitian H, via its eigendecomposition.
pub fn unitary_propagator(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let (vals, vecs) = eigh(h);
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&e| C64::from_polar(1.0, -e * t)),
    ));
    &vecs * phases * vecs.adjoint()
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
/// Columns of the returned matrix are the eigenvectors.
pub fn eigh(h: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

/// Real symmetric eigendecomposition, ascending.
pub fn eigh_real(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

/// Moore–Penrose pseudo-inverse of a real matrix; singular values at or below
/// `cutoff · σ_max` are treated as zero.
pub fn pinv_real(m: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    if m.is_empty() {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let thresh = cutoff * smax.max(f64::MIN_POSITIVE);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > thresh {
            out += vt.row(k).transpose() * u.column(k).transpose() / s;
        }
    }
    out
}

/// 2-norm condition number σ_max/σ_min (infinite when singular).
pub fn condition_number(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn condition_number_real(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().max()
}

/// max |U†U − I| over entries.
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let prod = u.adjoint() * u;
    let id = DMatrix::<C64>::identity(u.nrows(), u.ncols());
    (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_matches_pade_exponential() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.3, -0.2),
                C64::new(0.3, 0.2),
                C64::new(-0.5, 0.0),
            ],
        );
        let a = unitary_propagator(&h, 0.7);
        let b = expm(&(h * C64::new(0.0, -0.7)));
        assert!((a - b).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn pinv_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let p = pinv_real(&m, 1e-8);
        assert!((p[(0, 0)] - 0.25).abs() < 1e-14);
        let back = &m * &p * &m;
        assert!((back - m).norm() < 1e-12);
    }
}
