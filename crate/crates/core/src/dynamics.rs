//! Unitary evolution from the maximally entangled qubit state times the
//! photon vacuum, and the qubits' reduced density matrix.
//!
//! States live in the truncated ordinary Fock product basis, indexed
//! `position(m)·(cutoff+1)+n`. Qubit basis states are bit strings with the
//! first qubit as the most significant bit and bit 1 meaning spin up; the
//! Dicke state with N/2+m up spins is the normalized sum of all such strings.

use alloc::vec::Vec;
use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::model::{DickeIndex, ModelParams, Parity};
use crate::oracle;
use crate::spectrum::{self, ReconstructOptions, ScanOptions};

pub type C64 = Complex<f64>;

/// `(|N/2⟩ + |−N/2⟩)/√2 ⊗ |0⟩`.
pub fn initial_state(params: &ModelParams, cutoff: usize) -> DVector<f64> {
    let n_q = params.n_qubits();
    let stride = cutoff + 1;
    let mut psi = DVector::zeros(params.dicke_dim() * stride);
    let h = core::f64::consts::FRAC_1_SQRT_2;
    for two_m in [n_q as i32, -(n_q as i32)] {
        let pos = DickeIndex::new(n_q, two_m).expect("extremal Dicke index").position(n_q);
        psi[pos * stride] = h;
    }
    psi
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisSource {
    /// Eigenvectors of the truncated Fock Hamiltonian.
    Oracle,
    /// Stable zeros of G_± with reconstructed eigenvectors.
    GFunction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsOptions {
    pub source: BasisSource,
    /// Starting photon cutoff; raised until the kept states are converged.
    pub photon_cutoff: usize,
    pub max_photon_cutoff: usize,
    pub completeness_tolerance: f64,
    /// Largest weight a kept state may have on its top `tail_levels` photon
    /// numbers.
    pub tail_tolerance: f64,
    pub tail_levels: usize,
    pub dimension_cap: usize,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        Self {
            source: BasisSource::Oracle,
            photon_cutoff: 40,
            max_photon_cutoff: 400,
            completeness_tolerance: 1e-8,
            tail_tolerance: 1e-12,
            tail_levels: 8,
            dimension_cap: oracle::DEFAULT_DIMENSION_CAP,
        }
    }
}

/// Eigenstates below an energy cutoff, enough to expand the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    pub energies: Vec<f64>,
    pub parities: Vec<Parity>,
    /// Columns are normalized eigenvectors in the Fock product basis.
    pub vectors: DMatrix<f64>,
    pub fock_cutoff: usize,
    pub e_max: f64,
    /// 1 − Σ|f_n|² for the initial state.
    pub completeness_defect: f64,
}

impl EigenBasis {
    /// Eigenbasis for [`initial_state`] with the completeness defect below
    /// tolerance.
    pub fn for_initial_state(params: &ModelParams, opts: &DynamicsOptions) -> Result<Self> {
        match opts.source {
            BasisSource::Oracle => oracle_basis(params, opts),
            BasisSource::GFunction => gfunction_basis(params, opts),
        }
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

fn tail_weight(v: &[f64], dicke_dim: usize, cutoff: usize, levels: usize) -> f64 {
    let stride = cutoff + 1;
    let from = stride.saturating_sub(levels);
    (0..dicke_dim).map(|p| (from..stride).map(|n| v[p * stride + n].powi(2)).sum::<f64>()).sum()
}

/// Smallest energy-ordered prefix whose weight reaches 1 − tolerance.
fn prefix_for(weights: &[f64], tol: f64) -> Option<(usize, f64)> {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if 1.0 - acc < tol {
            return Some((i + 1, 1.0 - acc));
        }
    }
    None
}

fn oracle_basis(params: &ModelParams, opts: &DynamicsOptions) -> Result<EigenBasis> {
    let mut cutoff = opts.photon_cutoff.max(opts.tail_levels + 1);
    let dim = params.dicke_dim();
    loop {
        let spec = oracle::diagonalize(params, oracle::Basis::Fock, cutoff, opts.dimension_cap)?;
        let psi0 = initial_state(params, cutoff);
        let f = spec.eigenvectors.tr_mul(&psi0);
        let weights: Vec<f64> = f.iter().map(|x| x * x).collect();
        if let Some((keep, defect)) = prefix_for(&weights, opts.completeness_tolerance) {
            let converged = (0..keep).all(|c| {
                let col = spec.eigenvectors.column(c);
                weights[c] == 0.0 || tail_weight(col.as_slice(), dim, cutoff, opts.tail_levels) < opts.tail_tolerance
            });
            if converged {
                return Ok(EigenBasis {
                    energies: spec.eigenvalues[..keep].to_vec(),
                    parities: spec.parities[..keep].to_vec(),
                    vectors: spec.eigenvectors.columns(0, keep).into_owned(),
                    fock_cutoff: cutoff,
                    e_max: spec.eigenvalues[keep - 1],
                    completeness_defect: defect,
                });
            }
        }
        if cutoff >= opts.max_photon_cutoff {
            let defect = prefix_for(&weights, f64::INFINITY).map_or(1.0, |p| p.1);
            return Err(Error::Completeness { defect: defect.max(opts.completeness_tolerance) });
        }
        cutoff = (cutoff + cutoff / 2).min(opts.max_photon_cutoff);
    }
}

fn gfunction_basis(params: &ModelParams, opts: &DynamicsOptions) -> Result<EigenBasis> {
    let ropts = ReconstructOptions { fock_cutoff: opts.photon_cutoff.max(opts.tail_levels + 1), ..Default::default() };
    let cutoff = ropts.fock_cutoff;
    let psi0 = initial_state(params, cutoff);
    let lo = spectrum::energy_lower_bound(params) - 1.0;
    let sopts = ScanOptions::default();
    let mut e_max = lo + 4.0 * params.omega();
    let mut done_to = lo;
    let mut energies = Vec::new();
    let mut parities = Vec::new();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut acc = 0.0;
    let limit = lo + 2.0 * params.omega() * opts.max_photon_cutoff as f64;
    while e_max <= limit {
        let scan = spectrum::scan_spectrum(params, done_to, e_max, &sopts)?;
        for rec in scan.records.iter().filter(|r| r.energy > done_to) {
            let st = spectrum::reconstruct_eigenstate(params, rec, &ropts)?;
            acc += st.fock_amplitudes.dot(&psi0).powi(2);
            energies.push(rec.energy);
            parities.push(rec.parity);
            cols.push(st.fock_amplitudes);
        }
        let defect = 1.0 - acc;
        if defect < opts.completeness_tolerance {
            return Ok(EigenBasis {
                energies,
                parities,
                vectors: DMatrix::from_columns(&cols),
                fock_cutoff: cutoff,
                e_max,
                completeness_defect: defect,
            });
        }
        done_to = e_max;
        e_max += 2.0 * params.omega();
    }
    Err(Error::Completeness { defect: 1.0 - acc })
}

/// f_n = ⟨n|ψ⟩ for a real state on the basis' Fock layout.
pub fn expand_in_eigenbasis(basis: &EigenBasis, psi: &DVector<f64>) -> Result<DVector<f64>> {
    if psi.len() != basis.vectors.nrows() {
        return Err(domain("state and eigenbasis use different truncations"));
    }
    Ok(basis.vectors.tr_mul(psi))
}

/// Σ e^{−iE_n t} f_n |n⟩ for complex coefficients.
pub fn evolve_complex(basis: &EigenBasis, f: &DVector<C64>, t: f64) -> DVector<C64> {
    let phased = DVector::from_fn(f.len(), |i, _| {
        let ph = -basis.energies[i] * t;
        f[i] * Complex::new(ph.cos(), ph.sin())
    });
    let mut out = DVector::from_element(basis.vectors.nrows(), Complex::new(0.0, 0.0));
    for (c, a) in phased.iter().enumerate() {
        if *a == Complex::new(0.0, 0.0) {
            continue;
        }
        for (r, v) in basis.vectors.column(c).iter().enumerate() {
            out[r] += a * *v;
        }
    }
    out
}

/// |ψ(t)⟩ for every t, from real initial coefficients.
pub fn evolve(basis: &EigenBasis, f: &DVector<f64>, times: &[f64]) -> Vec<DVector<C64>> {
    let fc = f.map(|x| Complex::new(x, 0.0));
    times.iter().map(|&t| evolve_complex(basis, &fc, t)).collect()
}

/// Coefficients of a complex state in the eigenbasis.
pub fn project_complex(basis: &EigenBasis, psi: &DVector<C64>) -> DVector<C64> {
    DVector::from_fn(basis.len(), |c, _| {
        basis.vectors.column(c).iter().zip(psi.iter()).map(|(v, a)| a * *v).sum()
    })
}

/// ⟨ψ|H|ψ⟩ in the truncated Fock product basis.
pub fn energy_expectation(params: &ModelParams, cutoff: usize, psi: &DVector<C64>) -> f64 {
    let re = psi.map(|z| z.re);
    let im = psi.map(|z| z.im);
    re.dot(&oracle::apply_hamiltonian(params, cutoff, &re)) + im.dot(&oracle::apply_hamiltonian(params, cutoff, &im))
}

/// Photon trace in the Dicke basis: ρ_{ab} = Σ_n ψ_{a,n} ψ*_{b,n}.
pub fn reduce_to_dicke(n_qubits: u32, cutoff: usize, psi: &DVector<C64>) -> DMatrix<C64> {
    let dim = n_qubits as usize + 1;
    let stride = cutoff + 1;
    DMatrix::from_fn(dim, dim, |a, b| (0..stride).map(|n| psi[a * stride + n] * psi[b * stride + n].conj()).sum())
}

/// Isometry from the Dicke states into the 2^N qubit space; column
/// `position(m)` is the normalized sum of strings with N/2+m up spins.
pub fn symmetric_embedding(n_qubits: u32) -> DMatrix<f64> {
    let n = n_qubits as usize;
    let mut s = DMatrix::zeros(1usize << n, n + 1);
    let mut binom = alloc::vec![1.0f64; n + 1];
    for k in 1..=n {
        binom[k] = binom[k - 1] * (n + 1 - k) as f64 / k as f64;
    }
    for idx in 0..(1usize << n) {
        let ups = idx.count_ones() as usize;
        s[(idx, ups)] = 1.0 / binom[ups].sqrt();
    }
    s
}

/// Reduced qubit state at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitDensityMatrix {
    pub t: f64,
    pub rho: DMatrix<C64>,
}

impl QubitDensityMatrix {
    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest |ρ − ρ†| entry.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm_sqr().sqrt()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * Complex::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.min()
    }
}

pub fn reduce_to_qubits(n_qubits: u32, cutoff: usize, t: f64, psi: &DVector<C64>) -> QubitDensityMatrix {
    let rd = reduce_to_dicke(n_qubits, cutoff, psi);
    let s = symmetric_embedding(n_qubits).map(|x| Complex::new(x, 0.0));
    QubitDensityMatrix { t, rho: &s * rd * s.transpose() }
}

/// One sample of a dynamics run.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: QubitDensityMatrix,
    pub energy: f64,
    pub norm: f64,
}

/// Worst violations of the conservation laws over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Conservation {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub energy_drift: f64,
    pub min_eigenvalue: f64,
    pub norm_defect: f64,
}

impl Conservation {
    /// Trace within 1e-10, Hermitian within 1e-12, ⟨H⟩ drift and norm defect
    /// below 1e-8, no eigenvalue below −1e-10.
    pub fn holds(&self) -> bool {
        self.trace_error < 1e-10
            && self.hermiticity_error < 1e-12
            && self.energy_drift < 1e-8
            && self.norm_defect < 1e-8
            && self.min_eigenvalue >= -1e-10
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsRun {
    pub basis: EigenBasis,
    pub coefficients: DVector<f64>,
    pub samples: Vec<Sample>,
    pub conservation: Conservation,
}

/// Evolves the initial state on `times` and collects the reduced states.
pub fn run(params: &ModelParams, times: &[f64], opts: &DynamicsOptions) -> Result<DynamicsRun> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(domain("times must be finite"));
    }
    let basis = EigenBasis::for_initial_state(params, opts)?;
    let cutoff = basis.fock_cutoff;
    let psi0 = initial_state(params, cutoff);
    let f = expand_in_eigenbasis(&basis, &psi0)?;
    // Reference energy of the projected initial state, so that the drift
    // measures the evolution rather than the completeness defect.
    let e0 = {
        let w: f64 = f.iter().map(|x| x * x).sum();
        f.iter().zip(&basis.energies).map(|(x, e)| x * x * e).sum::<f64>() / w
    };
    let mut c = Conservation::default();
    let mut samples = Vec::with_capacity(times.len());
    for (&t, psi) in times.iter().zip(evolve(&basis, &f, times)) {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let energy = energy_expectation(params, cutoff, &psi) / norm;
        let state = reduce_to_qubits(params.n_qubits(), cutoff, t, &psi);
        c.trace_error = c.trace_error.max((state.trace() - norm).abs());
        c.hermiticity_error = c.hermiticity_error.max(state.hermiticity_error());
        c.energy_drift = c.energy_drift.max((energy - e0).abs());
        c.norm_defect = c.norm_defect.max((1.0 - norm).abs());
        c.min_eigenvalue = c.min_eigenvalue.min(state.min_eigenvalue());
        samples.push(Sample { state, energy, norm });
    }
    Ok(DynamicsRun { basis, coefficients: f, samples, conservation: c })
}

/// `0, dt, 2dt, …` up to and including `t_max` (within rounding).
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && t_max >= 0.0 && t_max.is_finite()) {
        return Err(domain("time grid needs dt > 0 and finite t_max ≥ 0"));
    }
    let steps = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| i as f64 * dt).collect())
}
