//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_traits::Float;

/// Determinant split into a sign-carrying mantissa and a log scale:
/// `det = value · exp(log_scale)`. Rows are divided by their max-abs entry
/// before elimination, which only multiplies the determinant by a positive
/// constant.
pub(crate) fn scaled_det(mut m: DMatrix<f64>) -> (f64, f64) {
    let mut log_scale = 0.0;
    for mut row in m.row_iter_mut() {
        let s = row.amax();
        if s > 0.0 && s.is_finite() {
            row /= s;
            log_scale += s.ln();
        }
    }
    (m.lu().determinant(), log_scale)
}

/// Rescales a matrix by its max-abs entry, returning the log of the factor.
pub(crate) fn normalize(m: &mut DMatrix<f64>) -> f64 {
    let s = m.amax();
    if s > 0.0 && s.is_finite() {
        *m /= s;
        s.ln()
    } else {
        0.0
    }
}

/// Moore-Penrose pseudo-inverse through the SVD.
/// Non-finite input yields a NaN matrix instead of an SVD that never
/// converges.
pub(crate) fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    if !m.iter().all(|x| x.is_finite()) {
        return DMatrix::from_element(m.ncols(), m.nrows(), f64::NAN);
    }
    let svd = m.clone().svd(true, true);
    let tol = svd.singular_values.max() * 1e-14 * m.nrows().max(m.ncols()) as f64;
    svd.pseudo_inverse(tol).unwrap_or_else(|_| DMatrix::zeros(m.ncols(), m.nrows()))
}

/// Singular values and right singular vectors, ascending by singular value.
pub(crate) fn null_direction(m: &DMatrix<f64>) -> (DVector<f64>, f64, f64) {
    if !m.iter().all(|x| x.is_finite()) {
        return (DVector::from_element(m.ncols(), f64::NAN), f64::NAN, f64::NAN);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let s = &svd.singular_values;
    let mut order: alloc::vec::Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let smallest = order[0];
    let second = order.get(1).map(|&i| s[i]).unwrap_or(f64::INFINITY);
    (v_t.row(smallest).transpose(), s[smallest], second)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_det_matches_plain_determinant() {
        let m = DMatrix::from_row_slice(3, 3, &[1e8, 2.0, 3.0, -4.0, 5e-6, 6.0, 7.0, 8.0, -9e3]);
        let (v, ls) = scaled_det(m.clone());
        let d = m.determinant();
        assert!((v * ls.exp() / d - 1.0).abs() < 1e-12);
        assert_eq!(v.signum(), d.signum());
    }

    #[test]
    fn pinv_inverts_full_column_rank() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 1.0, 1.0, -1.0]);
        let p = pinv(&m);
        let id = &p * &m;
        assert!((id - DMatrix::identity(2, 2)).amax() < 1e-14);
    }
}
