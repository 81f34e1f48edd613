//! Matrix elements of the real displacement operator in the Fock basis.

use nalgebra::DMatrix;
use num_traits::Float;

/// `⟨l|D(α)|n⟩` for l = 0..rows, n = 0..cols, with `D(α) = exp(α(d† − d))`
/// and real α.
pub fn displacement_matrix(alpha: f64, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(rows, cols);
    if rows == 0 || cols == 0 {
        return d;
    }
    let mut v = (-0.5 * alpha * alpha).exp();
    for l in 0..rows {
        d[(l, 0)] = v;
        v *= alpha / ((l + 1) as f64).sqrt();
    }
    // ⟨l|D|n+1⟩ = [√l ⟨l−1|D|n⟩ − α ⟨l|D|n⟩] / √(n+1)
    for n in 0..cols - 1 {
        let s = ((n + 1) as f64).sqrt();
        for l in 0..rows {
            let down = if l > 0 { (l as f64).sqrt() * d[(l - 1, n)] } else { 0.0 };
            d[(l, n + 1)] = (down - alpha * d[(l, n)]) / s;
        }
    }
    d
}
