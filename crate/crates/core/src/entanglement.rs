//! Bipartite negativity and the genuine-multipartite-entanglement monotone
//! given by fully decomposable witnesses.
//!
//! Qubit basis states are indexed by bit strings, qubit 0 being the most
//! significant bit. Witnesses are normalized by 0 ⪯ P_M, Q_M ⪯ I, which
//! gives 1/2 for Bell and GHZ states.

use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::{Complex, DMatrix, SymmetricEigen};
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::sdp::{self, SdpOptions};

pub type C64 = Complex<f64>;

pub const DEFAULT_SDP_TOLERANCE: f64 = 1e-7;

/// A split of the qubits into a nonempty proper subset and its complement.
/// The subset never contains qubit 0, which identifies a cut with its
/// complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    n_qubits: u32,
    mask: usize,
}

impl Bipartition {
    /// Cut with the given qubits on one side.
    pub fn new(n_qubits: u32, qubits: &[u32]) -> Result<Self> {
        if n_qubits < 2 || n_qubits > 16 {
            return Err(domain("bipartitions need 2 to 16 qubits"));
        }
        let mut mask = 0usize;
        for &q in qubits {
            if q >= n_qubits {
                return Err(domain("qubit index out of range"));
            }
            mask |= 1 << (n_qubits - 1 - q);
        }
        Self::from_mask(n_qubits, mask)
    }

    /// Cut from a bit mask over basis-index bits.
    pub fn from_mask(n_qubits: u32, mask: usize) -> Result<Self> {
        let full = (1usize << n_qubits) - 1;
        if mask == 0 || mask & full == full || mask > full {
            return Err(domain("a bipartition needs a nonempty proper subset"));
        }
        let top = 1usize << (n_qubits - 1);
        let mask = if mask & top != 0 { full ^ mask } else { mask };
        Ok(Self { n_qubits, mask })
    }

    /// All 2^(N−1) − 1 cuts, ascending by mask.
    pub fn all(n_qubits: u32) -> Result<Vec<Self>> {
        if n_qubits < 2 || n_qubits > 16 {
            return Err(domain("bipartitions need 2 to 16 qubits"));
        }
        Ok((1..1usize << (n_qubits - 1)).map(|mask| Self { n_qubits, mask }).collect())
    }

    pub fn mask(&self) -> usize {
        self.mask
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    /// Qubits on the side not containing qubit 0.
    pub fn qubits(&self) -> Vec<u32> {
        (0..self.n_qubits).filter(|q| self.mask & (1 << (self.n_qubits - 1 - q)) != 0).collect()
    }
}

fn check_state(rho: &DMatrix<C64>, n_qubits: u32) -> Result<()> {
    let d = 1usize << n_qubits;
    if rho.nrows() != d || rho.ncols() != d {
        return Err(domain("density matrix dimension must be 2^N"));
    }
    Ok(())
}

/// ρ^{T_M}: transposes the qubits of the cut's subset.
pub fn partial_transpose(rho: &DMatrix<C64>, part: Bipartition) -> Result<DMatrix<C64>> {
    check_state(rho, part.n_qubits)?;
    Ok(sdp::partial_transpose(rho, part.mask))
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Sum of |negative eigenvalues| of ρ^{T_M}.
pub fn negativity(rho: &DMatrix<C64>, part: Bipartition) -> Result<f64> {
    let pt = partial_transpose(rho, part)?;
    Ok(hermitian_eigenvalues(&pt).into_iter().filter(|&e| e < 0.0).map(|e| -e).sum())
}

/// Smallest negativity over all cuts.
pub fn min_negativity(rho: &DMatrix<C64>, n_qubits: u32) -> Result<f64> {
    let mut best = f64::INFINITY;
    for part in Bipartition::all(n_qubits)? {
        best = best.min(negativity(rho, part)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    NearOptimal,
    Failed,
}

impl SolverStatus {
    pub fn label(self) -> &'static str {
        match self {
            SolverStatus::Optimal => "optimal",
            SolverStatus::NearOptimal => "near_optimal",
            SolverStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmeResult {
    /// max(0, −min Tr(Wρ)).
    pub value: f64,
    pub witness: DMatrix<C64>,
    pub solver_status: SolverStatus,
    pub duality_gap: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmeOptions {
    pub tolerance: f64,
    /// Gap up to which a stalled solve still counts as near optimal.
    pub near_optimal_tolerance: f64,
    pub max_iterations: usize,
    pub max_qubits: u32,
}

impl Default for GmeOptions {
    fn default() -> Self {
        Self { tolerance: DEFAULT_SDP_TOLERANCE, near_optimal_tolerance: 1e-5, max_iterations: 100, max_qubits: 4 }
    }
}

/// The PPT-mixture monotone of an N-qubit state.
pub fn gme_monotone(rho: &DMatrix<C64>, n_qubits: u32, opts: &GmeOptions) -> Result<GmeResult> {
    if n_qubits > opts.max_qubits {
        return Err(domain("too many qubits for the witness program"));
    }
    check_state(rho, n_qubits)?;
    let masks: Vec<usize> = Bipartition::all(n_qubits)?.iter().map(|b| b.mask).collect();
    let rho = (rho + rho.adjoint()) * Complex::new(0.5, 0.0);
    let sol = sdp::solve(&rho, &masks, &SdpOptions { tolerance: opts.tolerance, max_iterations: opts.max_iterations });
    let gap = (sol.primal_objective - sol.dual_objective).abs();
    let worst = gap.max(sol.primal_infeasibility);
    let status = if sol.stalled.is_none() {
        SolverStatus::Optimal
    } else if worst < opts.near_optimal_tolerance {
        SolverStatus::NearOptimal
    } else {
        SolverStatus::Failed
    };
    if status == SolverStatus::Failed {
        let mut reason = String::from(sol.stalled.as_deref().unwrap_or("unknown"));
        reason.push_str(" (duality gap not closed)");
        return Err(Error::SolverFailure { iterations: sol.iterations, reason });
    }
    Ok(GmeResult {
        value: sol.dual_objective.max(0.0),
        witness: sol.witness,
        solver_status: status,
        duality_gap: gap,
        iterations: sol.iterations,
    })
}

/// |ψ⟩⟨ψ| for a pure state.
pub fn pure_state(psi: &[C64]) -> DMatrix<C64> {
    let n = psi.len();
    DMatrix::from_fn(n, n, |a, b| psi[a] * psi[b].conj())
}

/// (|0…0⟩ + |1…1⟩)/√2.
pub fn ghz_state(n_qubits: u32) -> DMatrix<C64> {
    let d = 1usize << n_qubits;
    let mut psi = alloc::vec![Complex::new(0.0, 0.0); d];
    let h = core::f64::consts::FRAC_1_SQRT_2;
    psi[0] = Complex::new(h, 0.0);
    psi[d - 1] = Complex::new(h, 0.0);
    pure_state(&psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cut_count_and_canonical_form() {
        assert_eq!(Bipartition::all(4).unwrap().len(), 7);
        let a = Bipartition::new(3, &[0]).unwrap();
        let b = Bipartition::new(3, &[1, 2]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.qubits(), [1, 2]);
        assert!(Bipartition::from_mask(3, 7).is_err());
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let rho = ghz_state(2);
        let part = Bipartition::new(2, &[1]).unwrap();
        let ev = hermitian_eigenvalues(&partial_transpose(&rho, part).unwrap());
        let want = [-0.5, 0.5, 0.5, 0.5];
        assert!(ev.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let rho = DMatrix::from_fn(8, 8, |a, b| Complex::new((a * 3 + b) as f64, a as f64 - b as f64));
        for part in Bipartition::all(3).unwrap() {
            let back = partial_transpose(&partial_transpose(&rho, part).unwrap(), part).unwrap();
            assert_eq!(back, rho);
        }
    }
}
