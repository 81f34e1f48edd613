//! Reference spectra from dense diagonalization of the truncated Hamiltonian.
//!
//! Two product bases are supported. [`Basis::Fock`] truncates the ordinary
//! photon number at `cutoff`; [`Basis::Ecs`] attaches to every Dicke state
//! |m⟩ the displaced number states `D(−2mg)|n⟩`, n ≤ cutoff, which diagonalize
//! the coupling term exactly. Vectors in either basis are indexed by
//! `position(m) · (cutoff + 1) + n`.
//!
//! Diagonalization is done per parity sector in the symmetry-adapted basis
//! `(|m,n⟩ + p(−1)ⁿ|−m,n⟩)/√2` (plus |0,n⟩ when p(−1)ⁿ = 1).

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{domain, Error, Result};
use crate::fock::displacement_matrix;
use crate::model::{DickeIndex, Ladder, ModelParams, Parity};
use num_traits::Float;

pub const DEFAULT_DIMENSION_CAP: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Fock,
    Ecs,
}

/// Eigenpairs of the truncated Hamiltonian, ascending in energy.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpectrum {
    pub eigenvalues: Vec<f64>,
    pub parities: Vec<Parity>,
    /// Columns are eigenvectors in the product basis of `basis`.
    pub eigenvectors: DMatrix<f64>,
    pub fock_cutoff: usize,
    pub basis: Basis,
}

impl OracleSpectrum {
    pub fn sector(&self, parity: Parity) -> Vec<f64> {
        self.eigenvalues.iter().zip(&self.parities).filter(|(_, p)| **p == parity).map(|(e, _)| *e).collect()
    }
}

/// Symmetry-adapted sector basis: each member has one or two product-basis
/// components.
struct Sector {
    members: Vec<[(usize, f64); 2]>,
    lookup: Vec<Option<(usize, f64)>>,
}

fn sector(n_qubits: u32, cutoff: usize, parity: Parity) -> Sector {
    let stride = cutoff + 1;
    let full = (n_qubits as usize + 1) * stride;
    let mut members = Vec::new();
    let mut lookup = alloc::vec![None; full];
    let h = core::f64::consts::FRAC_1_SQRT_2;
    for d in DickeIndex::all(n_qubits).filter(|d| d.two_m() >= 0) {
        let a = d.position(n_qubits);
        let b = d.mirrored().position(n_qubits);
        for n in 0..=cutoff {
            let f = parity.mirror_factor(n);
            if a == b {
                if f > 0.0 {
                    lookup[a * stride + n] = Some((members.len(), 1.0));
                    members.push([(a * stride + n, 1.0), (a * stride + n, 0.0)]);
                }
            } else {
                lookup[a * stride + n] = Some((members.len(), h));
                lookup[b * stride + n] = Some((members.len(), f * h));
                members.push([(a * stride + n, h), (b * stride + n, f * h)]);
            }
        }
    }
    Sector { members, lookup }
}

/// Applies H (reduced units) to one product-basis state.
struct Applier {
    reduced: ModelParams,
    cutoff: usize,
    basis: Basis,
    up: DMatrix<f64>,
    down: DMatrix<f64>,
}

impl Applier {
    fn new(params: &ModelParams, basis: Basis, cutoff: usize) -> Self {
        let reduced = params.reduced();
        let (up, down) = match basis {
            Basis::Fock => (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)),
            Basis::Ecs => {
                let g = reduced.g();
                (displacement_matrix(2.0 * g, cutoff + 1, cutoff + 1), displacement_matrix(-2.0 * g, cutoff + 1, cutoff + 1))
            }
        };
        Self { reduced, cutoff, basis, up, down }
    }

    fn apply(&self, idx: usize, out: &mut Vec<(usize, f64)>) {
        let stride = self.cutoff + 1;
        let n_q = self.reduced.n_qubits();
        let (pos, n) = (idx / stride, idx % stride);
        let two_m = 2 * pos as i32 - n_q as i32;
        let m = 0.5 * f64::from(two_m);
        let g = self.reduced.g();
        let nf = n as f64;
        let hu = self.reduced.hop(two_m, Ladder::Raise);
        let hd = self.reduced.hop(two_m, Ladder::Lower);
        match self.basis {
            Basis::Fock => {
                out.push((idx, nf));
                if n < self.cutoff {
                    out.push((idx + 1, 2.0 * m * g * (nf + 1.0).sqrt()));
                }
                if n > 0 {
                    out.push((idx - 1, 2.0 * m * g * nf.sqrt()));
                }
                if hu != 0.0 {
                    out.push((idx + stride, hu));
                }
                if hd != 0.0 {
                    out.push((idx - stride, hd));
                }
            }
            Basis::Ecs => {
                out.push((idx, nf - 4.0 * m * m * g * g));
                for l in 0..stride {
                    if hu != 0.0 {
                        out.push(((pos + 1) * stride + l, hu * self.up[(l, n)]));
                    }
                    if hd != 0.0 {
                        out.push(((pos - 1) * stride + l, hd * self.down[(l, n)]));
                    }
                }
            }
        }
    }
}

fn check_dim(params: &ModelParams, cutoff: usize, cap: usize) -> Result<()> {
    let dim = params.dicke_dim() * (cutoff + 1);
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    Ok(())
}

fn sector_block(params: &ModelParams, basis: Basis, cutoff: usize, parity: Parity) -> (Sector, DMatrix<f64>) {
    let s = sector(params.n_qubits(), cutoff, parity);
    let ap = Applier::new(params, basis, cutoff);
    let dim = s.members.len();
    let mut h = DMatrix::zeros(dim, dim);
    let mut buf = Vec::new();
    for (j, member) in s.members.iter().enumerate() {
        for &(idx, cj) in member.iter().filter(|(_, c)| *c != 0.0) {
            buf.clear();
            ap.apply(idx, &mut buf);
            for &(k, v) in &buf {
                if let Some((i, ci)) = s.lookup[k] {
                    h[(i, j)] += ci * cj * v;
                }
            }
        }
    }
    let h = (&h + h.transpose()) * (0.5 * params.omega());
    (s, h)
}

/// The full Hamiltonian matrix in a product basis (physical units).
pub fn hamiltonian_matrix(params: &ModelParams, basis: Basis, cutoff: usize) -> DMatrix<f64> {
    let ap = Applier::new(params, basis, cutoff);
    let dim = params.dicke_dim() * (cutoff + 1);
    let mut h = DMatrix::zeros(dim, dim);
    let mut buf = Vec::new();
    for j in 0..dim {
        buf.clear();
        ap.apply(j, &mut buf);
        for &(i, v) in &buf {
            h[(i, j)] += v * params.omega();
        }
    }
    h
}

/// H·ψ in the truncated Fock product basis without forming the matrix.
pub fn apply_hamiltonian(params: &ModelParams, cutoff: usize, psi: &DVector<f64>) -> DVector<f64> {
    let ap = Applier::new(params, Basis::Fock, cutoff);
    let mut out = DVector::zeros(psi.len());
    let mut buf = Vec::new();
    for (j, &a) in psi.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        buf.clear();
        ap.apply(j, &mut buf);
        for &(i, v) in &buf {
            out[i] += v * a * params.omega();
        }
    }
    out
}

/// ⟨ψ|Π|ψ⟩ with (Πψ)_{m,n} = (−1)ⁿ ψ_{−m,n}; valid in both bases.
pub fn parity_expectation(n_qubits: u32, cutoff: usize, psi: &[f64]) -> f64 {
    let stride = cutoff + 1;
    let dim = n_qubits as usize + 1;
    let mut s = 0.0;
    for pos in 0..dim {
        let mirror = dim - 1 - pos;
        for n in 0..stride {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            s += psi[pos * stride + n] * sign * psi[mirror * stride + n];
        }
    }
    s
}

/// Ascending eigenvalues of one parity sector.
pub fn sector_eigenvalues(params: &ModelParams, parity: Parity, basis: Basis, cutoff: usize) -> Result<Vec<f64>> {
    check_dim(params, cutoff, DEFAULT_DIMENSION_CAP)?;
    let (_, h) = sector_block(params, basis, cutoff, parity);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Full eigendecomposition in the truncated ordinary Fock basis.
pub fn diagonalize_fock(params: &ModelParams, m_fock: usize) -> Result<OracleSpectrum> {
    diagonalize(params, Basis::Fock, m_fock, DEFAULT_DIMENSION_CAP)
}

pub fn diagonalize(params: &ModelParams, basis: Basis, cutoff: usize, cap: usize) -> Result<OracleSpectrum> {
    check_dim(params, cutoff, cap)?;
    let full = params.dicke_dim() * (cutoff + 1);
    let mut pairs: Vec<(f64, Parity, DVector<f64>)> = Vec::with_capacity(full);
    for parity in Parity::both() {
        let (s, h) = sector_block(params, basis, cutoff, parity);
        let eig = SymmetricEigen::new(h);
        for (c, &e) in eig.eigenvalues.iter().enumerate() {
            let mut v = DVector::zeros(full);
            for (i, member) in s.members.iter().enumerate() {
                let a = eig.eigenvectors[(i, c)];
                for &(idx, ci) in member.iter().filter(|(_, ci)| *ci != 0.0) {
                    v[idx] += ci * a;
                }
            }
            pairs.push((e, parity, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let eigenvalues = pairs.iter().map(|p| p.0).collect();
    let parities = pairs.iter().map(|p| p.1).collect();
    let cols: Vec<DVector<f64>> = pairs.into_iter().map(|p| p.2).collect();
    Ok(OracleSpectrum { eigenvalues, parities, eigenvectors: DMatrix::from_columns(&cols), fock_cutoff: cutoff, basis })
}

/// Decoupled spectrum (g = 0): `n′ω + Δm′`, ascending, up to `e_max`.
pub fn limit_spectrum_weak(params: &ModelParams, e_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for d in DickeIndex::all(params.n_qubits()) {
        let base = params.delta() * d.m();
        let mut n = 0usize;
        while base + params.omega() * n as f64 <= e_max {
            out.push(base + params.omega() * n as f64);
            n += 1;
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Δ = 0 spectrum: `nω − 4m²g²/ω` for every Dicke m, ascending, up to `e_max`.
pub fn limit_spectrum_strong(params: &ModelParams, e_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let (w, g) = (params.omega(), params.g());
    for d in DickeIndex::all(params.n_qubits()) {
        let base = -4.0 * d.m() * d.m() * g * g / w;
        let mut n = 0usize;
        while base + w * n as f64 <= e_max {
            out.push(base + w * n as f64);
            n += 1;
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Relative change η(c) = |(E(c) − E(c−1)) / E(c)| of the `state_index`-th
/// level of one parity sector as the basis cutoff grows.
pub fn convergence_curve(
    params: &ModelParams,
    parity: Parity,
    state_index: usize,
    basis: Basis,
    cutoffs: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(cutoffs.len());
    for &c in cutoffs {
        if c == 0 {
            return Err(domain("cutoff must be at least 1"));
        }
        let level = |cut: usize| -> Result<f64> {
            sector_eigenvalues(params, parity, basis, cut)?
                .get(state_index)
                .copied()
                .ok_or_else(|| domain("state index beyond the truncated spectrum"))
        };
        let (e1, e0) = (level(c)?, level(c - 1)?);
        let eta = if e1 == e0 { 0.0 } else { ((e1 - e0) / e1).abs() };
        out.push((c, eta));
    }
    Ok(out)
}
