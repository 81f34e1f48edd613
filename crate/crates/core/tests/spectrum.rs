mod frozen;

use dicke_core::gfunction::{g_value, GOptions, GScheme};
use dicke_core::oracle::{apply_hamiltonian, limit_spectrum_strong, limit_spectrum_weak, sector_eigenvalues, Basis};
use dicke_core::spectrum::{
    find_exceptional, reconstruct_eigenstate, scan_spectrum, scan_zeros, ExceptionalOptions, ReconstructOptions,
    ScanOptions,
};
use dicke_core::{DickeIndex, Error, ModelParams, Parity};
use nalgebra::DVector;

fn zeros(p: &ModelParams, parity: Parity, lo: f64, hi: f64) -> Vec<f64> {
    scan_zeros(p, parity, lo, hi, &ScanOptions::default()).unwrap().records.iter().map(|r| r.energy).collect()
}

fn assert_levels(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
    for (a, b) in got.iter().zip(want) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }
}

#[test]
fn three_qubits_match_frozen_levels() {
    let p = ModelParams::new(3, 0.7, 0.25).unwrap();
    assert_levels(&zeros(&p, Parity::Positive, -1.0, 3.0), &frozen::N3_PLUS, 1e-8);
    assert_levels(&zeros(&p, Parity::Negative, -1.0, 3.0), &frozen::N3_MINUS, 1e-8);
}

#[test]
fn single_qubit_reduces_to_rabi() {
    let p = ModelParams::new(1, 0.7, 0.25).unwrap();
    assert_levels(&zeros(&p, Parity::Positive, -2.0, 2.0), &frozen::RABI_PLUS, 1e-8);
    assert_levels(&zeros(&p, Parity::Negative, -2.0, 2.0), &frozen::RABI_MINUS, 1e-8);
}

#[test]
fn two_qubits_with_fock_poles() {
    let p = ModelParams::new(2, 1.0, 0.2).unwrap();
    assert_levels(&zeros(&p, Parity::Positive, -2.0, 2.0), &frozen::N2_PLUS, 1e-8);
    assert_levels(&zeros(&p, Parity::Negative, -2.0, 2.0), &frozen::N2_MINUS, 1e-8);
}

#[test]
fn five_qubits_complete_from_the_ground_state() {
    let p = ModelParams::new(5, 0.7, 0.3).unwrap();
    assert_levels(&zeros(&p, Parity::Positive, -3.0, 1.5), &frozen::N5_PLUS, 1e-8);
    assert_levels(&zeros(&p, Parity::Negative, -3.0, 1.5), &frozen::N5_MINUS, 1e-8);
}

#[test]
fn records_are_sorted_and_stable() {
    let p = ModelParams::new(4, 0.7, 0.3).unwrap();
    let s = scan_spectrum(&p, -3.0, 2.0, &ScanOptions::default()).unwrap();
    assert!(s.records.windows(2).all(|w| w[0].energy <= w[1].energy));
    assert!(s.records.iter().all(|r| r.residual < 1e-8));
}

#[test]
fn zero_splitting_gives_the_displaced_ladders() {
    for n in [2u32, 3] {
        let p = ModelParams::new(n, 0.0, 0.3).unwrap();
        let mut got: Vec<f64> = scan_spectrum(&p, -3.0, 2.0, &ScanOptions::default())
            .unwrap()
            .records
            .iter()
            .map(|r| r.energy)
            .collect();
        got.sort_by(f64::total_cmp);
        let want: Vec<f64> = limit_spectrum_strong(&p, 2.0).into_iter().filter(|e| *e >= -3.0).collect();
        assert_levels(&got, &want, 1e-8);
    }
}

#[test]
fn weak_coupling_approaches_bare_levels() {
    let p = ModelParams::new(3, 0.7, 1e-3).unwrap();
    let got: Vec<f64> = scan_spectrum(&p, -1.3, 2.5, &ScanOptions::default()).unwrap().records.iter().map(|r| r.energy).collect();
    assert_levels(&got, &limit_spectrum_weak(&p, 2.5), 1e-4);
}

#[test]
fn evaluation_at_a_pole_is_an_error() {
    // N = 3, g = 0.25: the m = 3/2 family has a pole at 1 − 9/16.
    let p = ModelParams::new(3, 0.7, 0.25).unwrap();
    let r = g_value(&p, 1.0 - 0.5625, Parity::Positive, &GOptions::default());
    assert!(matches!(r, Err(Error::Pole { .. })));
}

#[test]
fn direct_series_rejects_its_spurious_zeros() {
    let p = ModelParams::new(3, 0.7, 0.25).unwrap();
    let opts = ScanOptions {
        g: GOptions::default().with_truncation(8).with_scheme(GScheme::DirectSeries),
        escalate: false,
        ..Default::default()
    };
    for parity in Parity::both() {
        let oracle = sector_eigenvalues(&p, parity, Basis::Fock, 200).unwrap();
        let s = scan_zeros(&p, parity, -1.0, 3.0, &opts).unwrap();
        for r in &s.records {
            assert!(oracle.iter().any(|o| (o - r.energy).abs() < 1e-6), "emitted {}", r.energy);
        }
    }
}

#[test]
fn reconstructed_states_are_eigenvectors() {
    let p = ModelParams::new(3, 0.7, 0.25).unwrap();
    let opts = ReconstructOptions::default();
    let s = scan_spectrum(&p, -1.0, 1.5, &ScanOptions::default()).unwrap();
    assert!(!s.records.is_empty());
    for r in &s.records {
        let st = reconstruct_eigenstate(&p, r, &opts).unwrap();
        let psi = DVector::from_column_slice(st.fock_amplitudes.as_slice());
        assert!((psi.norm() - 1.0).abs() < 1e-10);
        let h_psi = apply_hamiltonian(&p, st.fock_cutoff, &psi);
        assert!((h_psi - &psi * r.energy).norm() < 1e-7, "E = {}", r.energy);
    }
}

#[test]
fn exceptional_couplings_are_eigenvalues() {
    let p = ModelParams::new(3, 0.7, 0.25).unwrap();
    let m = DickeIndex::new(3, 3).unwrap();
    let mut total = 0;
    for parity in Parity::both() {
        let found = find_exceptional(&p, parity, m, 1, (0.0, 0.6), &ExceptionalOptions::default()).unwrap();
        total += found.len();
        for ep in found {
            let at = p.with_coupling(ep.g).unwrap();
            let e = 1.0 - 4.0 * 2.25 * ep.g * ep.g;
            let levels = sector_eigenvalues(&at, parity, Basis::Fock, 200).unwrap();
            assert!(levels.iter().any(|x| (x - e).abs() < 1e-6), "g = {}", ep.g);
        }
    }
    assert!(total > 0);
}
