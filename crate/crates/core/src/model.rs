//! Physical parameters, Dicke-state indexing and Hamiltonian matrix elements.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = -Δ J_x + ω d†d + 2g (d† + d) J_z,      g = λ / √N
//! ```
//!
//! restricted to the maximal-spin sector j = N/2. Dicke states |j, m⟩ are
//! addressed by the integer `2m` so that odd N never needs half-integer keys.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::{domain, Result};
use num_traits::Float;

/// Physical configuration of one Dicke model instance.
///
/// `g` (coupling per qubit) is the canonical coupling; `lambda = g √N` is
/// derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    n_qubits: u32,
    delta: f64,
    omega: f64,
    g: f64,
}

impl ModelParams {
    /// Builds a model with cavity frequency ω = 1.
    pub fn new(n_qubits: u32, delta: f64, g: f64) -> Result<Self> {
        Self::with_omega(n_qubits, delta, 1.0, g)
    }

    /// Builds a model from the collective coupling λ (g = λ/√N).
    pub fn from_lambda(n_qubits: u32, delta: f64, lambda: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(domain("n_qubits must be at least 1"));
        }
        Self::new(n_qubits, delta, lambda / f64::from(n_qubits).sqrt())
    }

    pub fn with_omega(n_qubits: u32, delta: f64, omega: f64, g: f64) -> Result<Self> {
        if n_qubits == 0 {
            return Err(domain("n_qubits must be at least 1"));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(domain("delta must be finite and non-negative"));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(domain("omega must be finite and positive"));
        }
        if !(g.is_finite() && g >= 0.0) {
            return Err(domain("coupling must be finite and non-negative"));
        }
        Ok(Self { n_qubits, delta, omega, g })
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn lambda(&self) -> f64 {
        self.g * f64::from(self.n_qubits).sqrt()
    }

    /// Total spin j = N/2.
    pub fn spin(&self) -> f64 {
        0.5 * f64::from(self.n_qubits)
    }

    /// Dimension k = ceil(N/2) of the G-function determinant.
    pub fn k(&self) -> usize {
        (self.n_qubits as usize + 1) / 2
    }

    /// Number of Dicke states, N + 1.
    pub fn dicke_dim(&self) -> usize {
        self.n_qubits as usize + 1
    }

    /// Same model in units of ω (Δ/ω, g/ω, ω = 1). Energies of the reduced
    /// model multiply by ω to give physical energies.
    pub fn reduced(&self) -> Self {
        Self { n_qubits: self.n_qubits, delta: self.delta / self.omega, omega: 1.0, g: self.g / self.omega }
    }

    pub fn with_coupling(&self, g: f64) -> Result<Self> {
        Self::with_omega(self.n_qubits, self.delta, self.omega, g)
    }

    /// Off-diagonal element H_{m, m±1} with the boundary cutoff, no validation.
    pub(crate) fn hop(&self, two_m: i32, dir: Ladder) -> f64 {
        -0.5 * self.delta * ladder_raw(self.n_qubits, two_m, dir)
    }
}

/// Dicke state |N/2, m⟩ stored as the integer 2m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DickeIndex {
    two_m: i32,
}

impl DickeIndex {
    pub fn new(n_qubits: u32, two_m: i32) -> Result<Self> {
        let n = n_qubits as i32;
        if two_m < -n || two_m > n || (two_m - n).rem_euclid(2) != 0 {
            return Err(domain("2m must lie in {-N, -N+2, ..., N}"));
        }
        Ok(Self { two_m })
    }

    /// Index 0..=N with 0 ↔ m = -N/2.
    pub fn from_position(n_qubits: u32, pos: usize) -> Result<Self> {
        Self::new(n_qubits, 2 * pos as i32 - n_qubits as i32)
    }

    pub fn two_m(&self) -> i32 {
        self.two_m
    }

    pub fn m(&self) -> f64 {
        0.5 * f64::from(self.two_m)
    }

    pub fn position(&self, n_qubits: u32) -> usize {
        ((self.two_m + n_qubits as i32) / 2) as usize
    }

    pub fn mirrored(&self) -> Self {
        Self { two_m: -self.two_m }
    }

    /// All Dicke indices in ascending m.
    pub fn all(n_qubits: u32) -> impl Iterator<Item = DickeIndex> {
        let n = n_qubits as i32;
        (0..=n).map(move |p| DickeIndex { two_m: 2 * p - n })
    }

    /// The k indices with m > 0, ascending. These label the displaced frames.
    pub fn positive(n_qubits: u32) -> Vec<DickeIndex> {
        Self::all(n_qubits).filter(|d| d.two_m > 0).collect()
    }
}

/// Conserved Z₂ parity, Π = e^{iπ d†d} e^{iπ(J_x + j)}: it maps
/// |m⟩|n⟩ to (-1)^n |-m⟩|n⟩ up to a global phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Positive,
    Negative,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Positive => 1.0,
            Parity::Negative => -1.0,
        }
    }

    pub fn both() -> [Parity; 2] {
        [Parity::Positive, Parity::Negative]
    }

    /// Sign picked up by the amplitude pair (m, n) ↔ (-m, n): s·(-1)^n.
    pub fn mirror_factor(self, n: usize) -> f64 {
        if n % 2 == 0 {
            self.sign()
        } else {
            -self.sign()
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Positive => "+",
            Parity::Negative => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Raise,
    Lower,
}

fn ladder_raw(n_qubits: u32, two_m: i32, dir: Ladder) -> f64 {
    let n = n_qubits as i32;
    let target = match dir {
        Ladder::Raise => two_m + 2,
        Ladder::Lower => two_m - 2,
    };
    if target > n || target < -n {
        return 0.0;
    }
    // j(j+1) - m(m±1) scaled by 4 to stay in integers.
    let four = n * (n + 2) - two_m * target;
    0.5 * f64::from(four).sqrt()
}

/// j_m^± = √(j(j+1) − m(m±1)), zero where the target leaves the multiplet.
pub fn ladder_element(params: &ModelParams, idx: DickeIndex, dir: Ladder) -> Result<f64> {
    DickeIndex::new(params.n_qubits, idx.two_m)?;
    Ok(ladder_raw(params.n_qubits, idx.two_m, dir))
}

/// H_{m, m±1} = −(Δ/2) j_m^±.
pub fn offdiag_element(params: &ModelParams, idx: DickeIndex, dir: Ladder) -> Result<f64> {
    Ok(-0.5 * params.delta * ladder_element(params, idx, dir)?)
}

/// Diagonal element H_{m′m′} rewritten with the displaced operator
/// A = d + 2mg/ω of the frame `m_frame`:
///
/// `number · A†A + linear · (A† + A) + constant`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacedDiagonal {
    pub number: f64,
    pub linear: f64,
    pub constant: f64,
}

pub fn diag_element_displaced(
    params: &ModelParams,
    m_prime: DickeIndex,
    m_frame: DickeIndex,
    n: usize,
) -> Result<DisplacedDiagonal> {
    DickeIndex::new(params.n_qubits, m_prime.two_m)?;
    if m_frame.two_m != 0 {
        DickeIndex::new(params.n_qubits, m_frame.two_m)?;
    }
    let (mp, m) = (m_prime.m(), m_frame.m());
    let g = params.g;
    Ok(DisplacedDiagonal {
        number: params.omega * n as f64,
        linear: 2.0 * (mp - m) * g,
        constant: -4.0 * m * (2.0 * mp - m) * g * g / params.omega,
    })
}

/// Collective spin matrices (J_x, J_z) on the N+1 Dicke states, ascending m.
pub fn collective_spin(n_qubits: u32) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = n_qubits as usize + 1;
    let mut jx = DMatrix::zeros(d, d);
    let mut jz = DMatrix::zeros(d, d);
    for idx in DickeIndex::all(n_qubits) {
        let p = idx.position(n_qubits);
        jz[(p, p)] = idx.m();
        if p + 1 < d {
            let v = 0.5 * ladder_raw(n_qubits, idx.two_m, Ladder::Raise);
            jx[(p, p + 1)] = v;
            jx[(p + 1, p)] = v;
        }
    }
    (jx, jz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn idx(n: u32, two_m: i32) -> DickeIndex {
        DickeIndex::new(n, two_m).unwrap()
    }

    #[test]
    fn ladder_examples() {
        let p1 = ModelParams::new(1, 0.7, 0.25).unwrap();
        assert_eq!(ladder_element(&p1, idx(1, -1), Ladder::Raise).unwrap(), 1.0);
        let p3 = ModelParams::new(3, 0.7, 0.25).unwrap();
        assert_eq!(ladder_element(&p3, idx(3, 3), Ladder::Raise).unwrap(), 0.0);
        let v = ladder_element(&p3, idx(3, 1), Ladder::Raise).unwrap();
        assert!((v - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ladder_matches_explicit_raising_operator() {
        // J+ built from the ladder definition: <m+1|J+|m> = sqrt(j(j+1) - m(m+1)).
        for n in 1..=8u32 {
            let j = 0.5 * f64::from(n);
            let p = ModelParams::new(n, 1.0, 0.1).unwrap();
            for d in DickeIndex::all(n) {
                let m = d.m();
                let expect = if d.two_m() == n as i32 { 0.0 } else { (j * (j + 1.0) - m * (m + 1.0)).sqrt() };
                let got = ladder_element(&p, d, Ladder::Raise).unwrap();
                assert!((got - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn offdiag_examples() {
        let p1 = ModelParams::new(1, 0.7, 0.25).unwrap();
        assert!((offdiag_element(&p1, idx(1, -1), Ladder::Raise).unwrap() + 0.35).abs() < 1e-15);
        let p3 = ModelParams::new(3, 0.7, 0.25).unwrap();
        assert_eq!(offdiag_element(&p3, idx(3, 3), Ladder::Raise).unwrap(), 0.0);
        let p2 = ModelParams::new(2, 1.0, 0.25).unwrap();
        let v = offdiag_element(&p2, idx(2, 0), Ladder::Raise).unwrap();
        assert!((v + 2f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_index_is_a_domain_error() {
        assert!(DickeIndex::new(3, 2).is_err());
        assert!(DickeIndex::new(3, 5).is_err());
        assert!(DickeIndex::new(2, 0).is_ok());
    }

    #[test]
    fn hermiticity_of_offdiagonal_elements() {
        for n in 1..=12u32 {
            let p = ModelParams::new(n, 0.83, 0.2).unwrap();
            for d in DickeIndex::all(n).filter(|d| d.two_m() < n as i32) {
                let up = offdiag_element(&p, d, Ladder::Raise).unwrap();
                let down = offdiag_element(&p, idx(n, d.two_m() + 2), Ladder::Lower).unwrap();
                assert_eq!(up, down);
            }
        }
    }

    #[test]
    fn exactly_two_boundary_cutoffs() {
        for n in 1..=12u32 {
            let p = ModelParams::new(n, 1.0, 0.2).unwrap();
            let zeros = DickeIndex::all(n)
                .flat_map(|d| [Ladder::Raise, Ladder::Lower].map(|l| ladder_element(&p, d, l).unwrap()))
                .filter(|v| *v == 0.0)
                .count();
            assert_eq!(zeros, 2);
        }
    }

    #[test]
    fn jx_spectrum_is_the_m_ladder() {
        for n in 1..=12u32 {
            let (jx, _) = collective_spin(n);
            let mut ev: Vec<f64> = SymmetricEigen::new(jx).eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (i, e) in ev.iter().enumerate() {
                assert!((e - (i as f64 - 0.5 * f64::from(n))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn displaced_diagonal_examples() {
        let p = ModelParams::new(3, 0.7, 0.25).unwrap();
        let d = diag_element_displaced(&p, idx(3, 3), idx(3, 3), 0).unwrap();
        assert_eq!(d.linear, 0.0);
        assert!((d.constant + 4.0 * 2.25 * 0.0625).abs() < 1e-15);
        let d = diag_element_displaced(&p, idx(3, 1), idx(3, 3), 0).unwrap();
        assert!((d.constant - 0.1875).abs() < 1e-15);
        let p0 = ModelParams::new(3, 0.7, 0.0).unwrap();
        for a in DickeIndex::all(3) {
            for b in DickeIndex::positive(3) {
                let d = diag_element_displaced(&p0, a, b, 2).unwrap();
                assert_eq!((d.linear, d.constant), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn lambda_round_trip() {
        for n in 1..=20u32 {
            let p = ModelParams::from_lambda(n, 0.7, 0.35).unwrap();
            assert!((p.lambda() - 0.35).abs() / 0.35 < 1e-15);
            let q = ModelParams::new(n, 0.7, p.g()).unwrap();
            assert!((q.lambda() / p.lambda() - 1.0).abs() < 1e-15);
        }
    }
}
