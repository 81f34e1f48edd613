//! Pole and level-distribution diagnostics: the crossover coupling, zero
//! counts per pole-free subinterval and nearest-neighbour spacing histograms.

use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{domain, Result};
use crate::gfunction::{pole_set, Pole};
use crate::model::{DickeIndex, ModelParams, Parity};

/// λ_c = ½√(N/(N−1)), the coupling at which the two lowest pole families,
/// E = n − N²g² and E = n − (N−2)²g², separate by one photon energy.
pub fn crossover_lambda(n_qubits: u32) -> Result<f64> {
    if n_qubits < 2 {
        return Err(domain("crossover coupling needs at least two qubits"));
    }
    let n = f64::from(n_qubits);
    Ok(0.5 * (n / (n - 1.0)).sqrt())
}

/// Gap (N² − (N−2)²)g²/ω between the two outermost pole families, in units
/// of ω. Equals 1 at λ = λ_c.
pub fn family_gap(params: &ModelParams) -> f64 {
    let n = f64::from(params.n_qubits());
    let g = params.reduced().g();
    4.0 * (n - 1.0) * g * g
}

/// One open interval between adjacent poles (or a range end).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subinterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_pole: Option<Pole>,
    pub hi_pole: Option<Pole>,
    pub zeros: usize,
}

impl Subinterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Splits `[lo, hi]` at the poles of one parity sector and counts the given
/// energies in each piece. Energies outside the range are ignored.
pub fn subinterval_counts(params: &ModelParams, parity: Parity, lo: f64, hi: f64, energies: &[f64]) -> Vec<Subinterval> {
    let mut cuts: Vec<(f64, Option<Pole>)> = alloc::vec![(lo, None)];
    for p in pole_set(params, parity, hi).poles() {
        if p.energy > lo && p.energy < hi {
            cuts.push((p.energy, Some(*p)));
        }
    }
    cuts.push((hi, None));
    cuts.dedup_by(|b, a| b.0 == a.0);
    cuts.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let zeros = energies.iter().filter(|&&e| e > a.0 && e < b.0).count();
            Subinterval { lo: a.0, hi: b.0, lo_pole: a.1, hi_pole: b.1, zeros }
        })
        .collect()
}

/// Number of levels in each unit-ω window `[lo + iω, lo + (i+1)ω)` below `hi`.
pub fn unit_window_counts(params: &ModelParams, lo: f64, hi: f64, energies: &[f64]) -> Vec<usize> {
    let w = params.omega();
    let windows = ((hi - lo) / w).floor().max(0.0) as usize;
    let mut out = alloc::vec![0; windows];
    for &e in energies {
        if e >= lo {
            let i = ((e - lo) / w).floor() as usize;
            if i < windows {
                out[i] += 1;
            }
        }
    }
    out
}

/// Nearest-neighbour spacings of the sorted levels.
pub fn level_spacings(energies: &[f64]) -> Vec<f64> {
    let mut e = energies.to_vec();
    e.sort_by(f64::total_cmp);
    e.windows(2).map(|w| w[1] - w[0]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingHistogram {
    /// Bin edges in units of the mean spacing; `counts.len() + 1` entries.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub mean_spacing: f64,
    /// Spacings beyond the last edge.
    pub overflow: usize,
}

impl SpacingHistogram {
    /// Bin heights normalized to a probability density in s.
    pub fn density(&self) -> Vec<f64> {
        let total: usize = self.counts.iter().sum::<usize>() + self.overflow;
        if total == 0 {
            return alloc::vec![0.0; self.counts.len()];
        }
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| c as f64 / (total as f64 * (w[1] - w[0])))
            .collect()
    }
}

/// Histogram of spacings s/⟨s⟩ over `[0, s_max)` with `bins` equal bins.
pub fn spacing_histogram(energies: &[f64], bins: usize, s_max: f64) -> Result<SpacingHistogram> {
    if bins == 0 || !(s_max > 0.0) {
        return Err(domain("histogram needs a positive bin count and range"));
    }
    let s = level_spacings(energies);
    if s.is_empty() {
        return Err(domain("need at least two levels"));
    }
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    let width = s_max / bins as f64;
    let edges = (0..=bins).map(|i| width * i as f64).collect();
    let mut counts = alloc::vec![0; bins];
    let mut overflow = 0;
    for v in s {
        let r = if mean > 0.0 { v / mean } else { 0.0 };
        let i = (r / width).floor() as usize;
        if i < bins {
            counts[i] += 1;
        } else {
            overflow += 1;
        }
    }
    Ok(SpacingHistogram { edges, counts, mean_spacing: mean, overflow })
}

/// Pole family index m of a pole, if it is exceptional.
pub fn pole_family(p: &Pole) -> Option<DickeIndex> {
    match p.kind {
        crate::gfunction::PoleKind::Exceptional { m, .. } => Some(m),
        crate::gfunction::PoleKind::FockSector { .. } => None,
    }
}
