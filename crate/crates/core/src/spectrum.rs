//! Regular spectrum from the zeros of G_±, exceptional solutions, and
//! eigenstate reconstruction.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::fock::displacement_matrix;
use crate::gfunction::{g_value, matching_points, nearest_pole_distance, pole_set, GOptions, GScheme, MatchedChain};
use crate::linalg::{null_direction, pinv};
use crate::model::{DickeIndex, ModelParams, Parity};
use crate::oracle::{self, Basis};
use crate::recurrence::{eval_rows, Engine};
use num_traits::Float;

/// Where an eigenvalue comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    /// Stable zero of G_±.
    Regular,
    /// E = n − 4m²g² (exceptional solutions and the Δ = 0 spectrum).
    Exceptional,
    /// n′ω + Δm′ returned for g below `g_min`.
    Decoupled,
}

impl RecordKind {
    pub fn label(self) -> &'static str {
        match self {
            RecordKind::Regular => "regular",
            RecordKind::Exceptional => "exceptional",
            RecordKind::Decoupled => "decoupled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    /// Zero located with truncation `n_c_used + 1`.
    pub energy: f64,
    pub parity: Parity,
    pub kind: RecordKind,
    /// |E(N_c) − E(N_c+1)| / max(|E(N_c+1)|, 1).
    pub residual: f64,
    pub n_c_used: usize,
}

/// A zero seen at some truncation that did not survive the stability test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectedZero {
    pub energy: f64,
    pub parity: Parity,
    pub n_c: usize,
    /// Position of the nearest zero at `n_c + 1` minus `energy`; `None` if
    /// the subinterval has no zero at all at `n_c + 1`.
    pub shift: Option<f64>,
    /// True when a stable record later appeared within 1e-4 of this zero:
    /// an under-converged regular zero rather than a truncation artifact.
    pub superseded: bool,
}

/// A sign-preserving near-touch of G with zero, reported without a claim
/// about multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangencyFlag {
    pub energy: f64,
    pub parity: Parity,
    pub relative_value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanResult {
    pub records: Vec<SpectrumRecord>,
    pub rejected: Vec<RejectedZero>,
    pub tangencies: Vec<TangencyFlag>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Base truncation, escalation cap and evaluation scheme.
    pub g: GOptions,
    pub max_truncation: usize,
    pub stability_tolerance: f64,
    pub root_tolerance: f64,
    /// Smallest grid spacing Δx_min; a subinterval of length L gets
    /// max(`min_grid`, ceil(L/Δx_min)) samples.
    pub grid_spacing: f64,
    pub min_grid: usize,
    pub tangency_threshold: f64,
    /// Disable N_c escalation: test once at (N_c, N_c+1) and reject what fails.
    pub escalate: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            g: GOptions::default(),
            max_truncation: 160,
            stability_tolerance: 1e-8,
            root_tolerance: 1e-12,
            grid_spacing: 1e-3,
            min_grid: 8,
            tangency_threshold: 1e-6,
            escalate: true,
        }
    }
}

/// Lower bound of the spectrum, −(ΔN/2 + N²g²/ω).
pub fn energy_lower_bound(params: &ModelParams) -> f64 {
    let n = f64::from(params.n_qubits());
    -(0.5 * params.delta() * n + n * n * params.g() * params.g() / params.omega())
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

struct Sampler<'a> {
    params: &'a ModelParams,
    parity: Parity,
    opts: GOptions,
}

impl Sampler<'_> {
    fn value(&self, e: f64) -> Option<f64> {
        match g_value(self.params, e, self.parity, &self.opts) {
            Ok(v) if v.value.is_finite() => Some(v.value),
            _ => None,
        }
    }

    /// Sign and ln|G|.
    fn log_value(&self, e: f64) -> Option<(i8, f64)> {
        match g_value(self.params, e, self.parity, &self.opts) {
            Ok(v) if v.value.is_finite() && v.value != 0.0 => Some((sign_of(v.value), v.value.abs().ln() + v.log_scale)),
            _ => None,
        }
    }

    /// True when G crosses zero linearly at `r`: the sign flips on either
    /// side and |G| scales with the distance. Rounding noise in G can flip
    /// the sign at isolated energies without either property holding.
    fn simple_crossing(&self, r: f64, left: i8, right: i8, room: f64) -> bool {
        let (pole_gap, _) = nearest_pole_distance(self.params, self.parity, r);
        let h1 = (1e-7 * r.abs().max(1.0)).min(0.01 * room).min(0.005 * pole_gap);
        let h2 = 100.0 * h1;
        let side = |dir: f64, sign: i8| match (self.log_value(r + dir * h1), self.log_value(r + dir * h2)) {
            (Some((s1, l1)), Some((s2, l2))) => s1 == sign && s2 == sign && (l2 - l1 - 100f64.ln()).abs() < 3f64.ln(),
            _ => false,
        };
        side(-1.0, left) && side(1.0, right)
    }

    fn bisect(&self, mut a: f64, mut fa: f64, mut b: f64, tol: f64) -> f64 {
        while b - a > tol {
            let c = 0.5 * (a + b);
            if c <= a || c >= b {
                break;
            }
            match self.value(c) {
                Some(fc) if fc == 0.0 => return c,
                Some(fc) if sign_of(fc) == sign_of(fa) => {
                    a = c;
                    fa = fc;
                }
                Some(_) => b = c,
                None => break,
            }
        }
        0.5 * (a + b)
    }
}

/// Sample energies of one subinterval, denser next to pole endpoints.
fn grid(a: f64, b: f64, a_is_pole: bool, b_is_pole: bool, opts: &ScanOptions) -> Vec<f64> {
    let len = b - a;
    let count = opts.min_grid.max((len / opts.grid_spacing).ceil() as usize);
    let guard = (opts.g.pole_epsilon * 10.0).max(1e-12);
    let mut pts = Vec::with_capacity(count + 16);
    if !a_is_pole {
        pts.push(a);
    }
    for i in 0..count {
        pts.push(a + len * (i as f64 + 0.5) / count as f64);
    }
    if !b_is_pole {
        pts.push(b);
    }
    let near = [1e-7, 1e-6, 1e-5, 1e-4];
    for d in near {
        let d = (d * len.max(1.0)).max(guard);
        if d < 0.5 * len / count as f64 {
            if a_is_pole {
                pts.push(a + d);
            }
            if b_is_pole {
                pts.push(b - d);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn zeros_in(
    params: &ModelParams,
    parity: Parity,
    pts: &[f64],
    n_c: usize,
    opts: &ScanOptions,
    tangencies: Option<&mut Vec<TangencyFlag>>,
) -> Vec<f64> {
    let s = Sampler { params, parity, opts: opts.g.with_truncation(n_c) };
    let vals: Vec<(f64, f64)> = pts.iter().filter_map(|&e| s.value(e).map(|v| (e, v))).collect();
    let mut out = Vec::new();
    for w in vals.windows(2) {
        let ((e0, v0), (e1, v1)) = (w[0], w[1]);
        if v0 == 0.0 {
            out.push(e0);
        } else if sign_of(v0) * sign_of(v1) < 0 {
            let r = s.bisect(e0, v0, e1, opts.root_tolerance);
            let room = (r - e0).min(e1 - r).max(opts.grid_spacing.min(e1 - e0));
            if s.simple_crossing(r, sign_of(v0), sign_of(v1), room) {
                out.push(r);
            }
        }
    }
    if let Some(&(e, v)) = vals.last() {
        if v == 0.0 && out.last() != Some(&e) {
            out.push(e);
        }
    }
    if let Some(t) = tangencies {
        let scale = vals.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        for w in vals.windows(3) {
            let (a, b, c) = (w[0].1, w[1].1, w[2].1);
            let same = sign_of(a) == sign_of(b) && sign_of(b) == sign_of(c);
            if same && b.abs() < a.abs() && b.abs() < c.abs() && b.abs() < opts.tangency_threshold * scale {
                t.push(TangencyFlag { energy: w[1].0, parity, relative_value: b.abs() / scale });
            }
        }
    }
    out
}

fn relative_shift(e0: f64, e1: f64) -> f64 {
    (e0 - e1).abs() / e1.abs().max(1.0)
}

/// Nearest-neighbour pairing of zeros at N_c with zeros at N_c+1.
fn pair(z0: &[f64], z1: &[f64]) -> Vec<Option<f64>> {
    if z0.len() == z1.len() {
        return z1.iter().map(|&e| Some(e)).collect();
    }
    z0.iter()
        .map(|&e| z1.iter().copied().min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs())))
        .collect()
}

/// Records for couplings below `g_min`: n′ω + Δm′ with parity (−1)^{n′+j+m′}.
fn decoupled_records(params: &ModelParams, parity: Parity, lo: f64, hi: f64) -> Vec<SpectrumRecord> {
    let mut out = Vec::new();
    let n_q = params.n_qubits() as i32;
    for d in DickeIndex::all(params.n_qubits()) {
        for n in 0.. {
            let e = params.omega() * n as f64 + params.delta() * d.m();
            if e > hi {
                break;
            }
            let exponent = n as i32 + (n_q + d.two_m()) / 2;
            let p = if exponent % 2 == 0 { Parity::Positive } else { Parity::Negative };
            if e >= lo && p == parity {
                out.push(SpectrumRecord { energy: e, parity, kind: RecordKind::Decoupled, residual: 0.0, n_c_used: 0 });
            }
        }
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    out
}

/// Δ = 0: nω − 4m²g²/ω, one state per parity for m > 0, parity (−1)ⁿ for m = 0.
fn uncoupled_spin_records(params: &ModelParams, parity: Parity, lo: f64, hi: f64) -> Vec<SpectrumRecord> {
    let mut out = Vec::new();
    let (w, g) = (params.omega(), params.g());
    for d in DickeIndex::all(params.n_qubits()).filter(|d| d.two_m() >= 0) {
        for n in 0.. {
            let e = w * n as f64 - 4.0 * d.m() * d.m() * g * g / w;
            if e > hi {
                break;
            }
            let allowed = d.two_m() > 0 || parity.mirror_factor(n) > 0.0;
            if e >= lo && allowed {
                out.push(SpectrumRecord { energy: e, parity, kind: RecordKind::Exceptional, residual: 0.0, n_c_used: 0 });
            }
        }
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    out
}

/// All stable zeros of G_± in `[lo, hi]`, scanning each pole-free
/// subinterval independently with N_c escalation.
pub fn scan_zeros(params: &ModelParams, parity: Parity, lo: f64, hi: f64, opts: &ScanOptions) -> Result<ScanResult> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(domain("energy range must be finite"));
    }
    if hi < lo {
        return Ok(ScanResult::default());
    }
    if params.reduced().g() < opts.g.g_min {
        return Ok(ScanResult { records: decoupled_records(params, parity, lo, hi), ..Default::default() });
    }
    if params.delta() == 0.0 {
        return Ok(ScanResult { records: uncoupled_spin_records(params, parity, lo, hi), ..Default::default() });
    }
    let eps = opts.g.pole_epsilon * params.omega();
    let mut edges: Vec<(f64, bool)> = alloc::vec![(lo, false)];
    for p in pole_set(params, parity, hi).energies() {
        if p > lo + eps && p < hi - eps {
            if edges.last().map(|(e, _)| (p - e).abs() > eps).unwrap_or(true) {
                edges.push((p, true));
            }
        } else if (p - lo).abs() <= eps {
            edges[0].1 = true;
        }
    }
    edges.push((hi, pole_set(params, parity, hi).energies().iter().any(|p| (p - hi).abs() <= eps)));

    let mut result = ScanResult::default();
    let mut pending: Vec<RejectedZero> = Vec::new();
    for w in edges.windows(2) {
        let ((a, a_pole), (b, b_pole)) = (w[0], w[1]);
        if b - a <= 2.0 * eps {
            continue;
        }
        let pts = grid(a, b, a_pole, b_pole, opts);
        let mut n_c = opts.g.n_c;
        let mut first = true;
        loop {
            let tang = if first { Some(&mut result.tangencies) } else { None };
            let z0 = zeros_in(params, parity, &pts, n_c, opts, tang);
            let z1 = zeros_in(params, parity, &pts, n_c + 1, opts, None);
            first = false;
            let partners = pair(&z0, &z1);
            let stable: Vec<bool> = z0
                .iter()
                .zip(&partners)
                .map(|(e, p)| p.map(|p| relative_shift(*e, p) < opts.stability_tolerance).unwrap_or(false))
                .collect();
            let all_stable = stable.iter().all(|s| *s) && z0.len() == z1.len();
            let last = !opts.escalate || 2 * n_c > opts.max_truncation;
            if all_stable || last {
                for ((e, p), ok) in z0.iter().zip(&partners).zip(&stable) {
                    if *ok {
                        let p = p.expect("stable zeros have partners");
                        result.records.push(SpectrumRecord {
                            energy: p,
                            parity,
                            kind: RecordKind::Regular,
                            residual: relative_shift(*e, p),
                            n_c_used: n_c,
                        });
                    } else {
                        pending.push(RejectedZero { energy: *e, parity, n_c, shift: p.map(|p| p - e), superseded: false });
                    }
                }
                break;
            }
            for ((e, p), ok) in z0.iter().zip(&partners).zip(&stable) {
                if !ok {
                    pending.push(RejectedZero { energy: *e, parity, n_c, shift: p.map(|p| p - e), superseded: false });
                }
            }
            n_c *= 2;
        }
    }
    for r in &mut pending {
        r.superseded = result.records.iter().any(|s| (s.energy - r.energy).abs() < 1e-4);
    }
    result.rejected = pending;
    result.records.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(result)
}

/// Both parity sectors merged and sorted by energy.
pub fn scan_spectrum(params: &ModelParams, lo: f64, hi: f64, opts: &ScanOptions) -> Result<ScanResult> {
    let mut out = ScanResult::default();
    for parity in Parity::both() {
        let r = scan_zeros(params, parity, lo, hi, opts)?;
        out.records.extend(r.records);
        out.rejected.extend(r.rejected);
        out.tangencies.extend(r.tangencies);
    }
    out.records.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.parity.cmp(&b.parity)));
    Ok(out)
}

/// Reconstructed eigenvector of a regular eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenState {
    pub energy: f64,
    pub parity: Parity,
    /// Null vector of the G-matrix: the free values a_{m′>0,0}.
    pub seed: DVector<f64>,
    /// Smallest over second-smallest singular value of the G-matrix.
    pub singular_ratio: f64,
    pub ecs_cutoff: usize,
    /// Amplitudes on |m⟩ ⊗ D(−2mg)|n⟩, indexed `position(m)·(ecs_cutoff+1)+n`.
    pub ecs_amplitudes: DVector<f64>,
    pub fock_cutoff: usize,
    /// Amplitudes on |m⟩ ⊗ |n⟩, indexed `position(m)·(fock_cutoff+1)+n`.
    pub fock_amplitudes: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    pub n_c: usize,
    pub ecs_cutoff: usize,
    pub fock_cutoff: usize,
    /// Second singular value below this fraction of the largest one makes
    /// the null space ambiguous.
    pub degeneracy_threshold: f64,
    pub refinement_steps: usize,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self { n_c: 40, ecs_cutoff: 60, fock_cutoff: 120, degeneracy_threshold: 1e-7, refinement_steps: 3 }
    }
}

/// Null vector of the G-matrix, propagated into ECS amplitudes and refined
/// by inverse iteration at the zero in the parity-adapted ECS basis, then
/// mapped to the ordinary Fock basis.
pub fn reconstruct_eigenstate(
    params: &ModelParams,
    record: &SpectrumRecord,
    opts: &ReconstructOptions,
) -> Result<EigenState> {
    if record.kind != RecordKind::Regular {
        return Err(domain("only regular zeros can be reconstructed from the G-matrix"));
    }
    let gopts = GOptions::default().with_truncation(opts.n_c.max(record.n_c_used + 1));
    let chain = MatchedChain::new(params, record.energy, record.parity, &gopts)?;
    let (gm, _) = chain.g_matrix();
    if !gm.iter().all(|x| x.is_finite()) {
        return Err(Error::SolverFailure { iterations: 0, reason: "non-finite G matrix".into() });
    }
    let (seed, s_min, s_second) = null_direction(&gm);
    let s_max = gm.norm();
    if gm.ncols() > 1 && s_second < opts.degeneracy_threshold * s_max {
        return Err(Error::DegenerateNullSpace { energy: record.energy, ratio: s_second / s_max });
    }
    let n_q = params.n_qubits();
    let dim = params.dicke_dim();
    let cut = opts.ecs_cutoff;
    let stride = cut + 1;
    let r = params.reduced();
    let g = r.g();

    // Starting vector: Fock-frame amplitudes √n!·a_{m′,n} up to the point
    // where the (asymptotic) recurrence starts to grow, carried into each
    // ECS frame by ⟨l|D(2mg)|n⟩.
    let engine = Engine::new(params, record.energy, gopts.pole_epsilon, gopts.g_min)?;
    let a = engine.a_table(record.parity, seed.as_slice(), gopts.n_c)?;
    let mut fock0 = DMatrix::zeros(dim, a.ncols());
    let mut fact = 1.0f64;
    let mut best = f64::INFINITY;
    for n in 0..a.ncols() {
        if n > 0 {
            fact *= (n as f64).sqrt();
        }
        let col = a.column(n) * fact;
        let mag = col.amax();
        if n > 4 && mag > best * 4.0 {
            break;
        }
        best = best.min(mag.max(1e-300));
        fock0.set_column(n, &col);
    }
    let mut start = DVector::zeros(dim * stride);
    for d in DickeIndex::all(n_q) {
        let pos = d.position(n_q);
        let disp = displacement_matrix(2.0 * d.m() * g, stride, fock0.ncols());
        let v = disp * fock0.row(pos).transpose();
        start.rows_mut(pos * stride, stride).copy_from(&v);
    }

    let h = oracle::hamiltonian_matrix(params, Basis::Ecs, cut);
    let shift = record.energy * (1.0 + 1e-13) + 1e-13;
    let mut lu_mat = h;
    for i in 0..lu_mat.nrows() {
        lu_mat[(i, i)] -= shift;
    }
    let lu = lu_mat.lu();
    let mut v = start;
    if v.norm() == 0.0 || !v.norm().is_finite() {
        v = DVector::from_element(dim * stride, 1.0);
    }
    symmetrize(&mut v, n_q, stride, record.parity);
    v /= v.norm();
    for _ in 0..opts.refinement_steps.max(1) {
        let Some(next) = lu.solve(&v) else { break };
        v = next;
        symmetrize(&mut v, n_q, stride, record.parity);
        v /= v.norm();
    }

    let mcut = opts.fock_cutoff;
    let mut fock = DVector::zeros(dim * (mcut + 1));
    for d in DickeIndex::all(n_q) {
        let pos = d.position(n_q);
        let disp = displacement_matrix(-2.0 * d.m() * g, mcut + 1, stride);
        let part = disp * v.rows(pos * stride, stride);
        fock.rows_mut(pos * (mcut + 1), mcut + 1).copy_from(&part);
    }
    let norm = fock.norm();
    fock /= norm;
    let sign = fix_sign(&fock);
    fock *= sign;
    v *= sign;
    Ok(EigenState {
        energy: record.energy,
        parity: record.parity,
        seed,
        singular_ratio: s_min / s_second,
        ecs_cutoff: cut,
        ecs_amplitudes: v,
        fock_cutoff: mcut,
        fock_amplitudes: fock,
    })
}

/// Projects onto the parity sector: ψ_{−m,n} = p(−1)ⁿ ψ_{m,n}.
fn symmetrize(v: &mut DVector<f64>, n_qubits: u32, stride: usize, parity: Parity) {
    let dim = n_qubits as usize + 1;
    for pos in 0..dim {
        let mirror = dim - 1 - pos;
        if mirror < pos {
            continue;
        }
        for n in 0..stride {
            let f = parity.mirror_factor(n);
            let (i, j) = (pos * stride + n, mirror * stride + n);
            if i == j {
                if f < 0.0 {
                    v[i] = 0.0;
                }
            } else {
                let avg = 0.5 * (v[i] + f * v[j]);
                v[i] = avg;
                v[j] = f * avg;
            }
        }
    }
}

fn fix_sign(v: &DVector<f64>) -> f64 {
    let mut best = 0.0f64;
    for &x in v.iter() {
        if x.abs() > best.abs() * (1.0 + 1e-9) {
            best = x;
        }
    }
    if best < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Couplings at which E = n − 4m²g² is an eigenvalue of the given parity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalPoint {
    pub g: f64,
    pub energy: f64,
    pub parity: Parity,
    pub m: DickeIndex,
    pub n: usize,
    /// Distance from E to the closest oracle eigenvalue at this coupling.
    pub oracle_deviation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalOptions {
    pub g_step: f64,
    pub n_c: usize,
    pub root_tolerance: f64,
    pub oracle_cutoff: usize,
    pub oracle_tolerance: f64,
}

impl Default for ExceptionalOptions {
    fn default() -> Self {
        Self { g_step: 1e-3, n_c: 40, root_tolerance: 1e-13, oracle_cutoff: 200, oracle_tolerance: 1e-6 }
    }
}

/// Determinant whose zeros in g are the exceptional couplings g_±^{n,m}.
///
/// Row `m` of the G-matrix is replaced by the resonant frame: its solution
/// space gains the free center coefficient c_{m,n} and loses one dimension
/// through the requirement that the numerator at level n vanishes.
pub fn exceptional_determinant(
    params: &ModelParams,
    parity: Parity,
    m: DickeIndex,
    n: usize,
    n_c: usize,
) -> Result<f64> {
    let m = DickeIndex::new(params.n_qubits(), m.two_m())?;
    if m.two_m() <= 0 {
        return Err(domain("exceptional frames need m > 0"));
    }
    if n_c < n + 1 {
        return Err(domain("truncation must exceed the exceptional level"));
    }
    let r = params.reduced();
    let g = r.g();
    let energy = params.omega() * (n as f64 - 4.0 * m.m() * m.m() * g * g);
    let gopts = GOptions { n_c, pole_epsilon: 0.0, tail_tolerance: f64::INFINITY, scheme: GScheme::Matched, ..GOptions::default() };
    let engine = Engine::new(params, energy, 0.0, gopts.g_min)?;
    let n_q = params.n_qubits();
    let dim = params.dicke_dim();
    let (frames, points) = matching_points(n_q, g);
    let k = frames.len();
    let target = frames.iter().position(|&f| f == m.two_m()).expect("positive frame");

    let mut a_cols = Vec::with_capacity(k);
    for s in 0..k {
        let mut seed = alloc::vec![0.0; k];
        seed[s] = 1.0;
        let t = engine.a_table(parity, &seed, n_c)?;
        a_cols.push(eval_rows(&t, 0, g, points[0]));
    }
    let mut w = DMatrix::from_columns(&a_cols);
    let mut gm = DMatrix::zeros(k, k);
    let hop_up = r.hop(m.two_m(), crate::model::Ladder::Raise);
    let hop_down = r.hop(m.two_m(), crate::model::Ladder::Lower);
    for (i, &f) in frames.iter().enumerate() {
        let ci = ((f + n_q as i32) / 2) as usize;
        let (basis, resonant) = if i == target {
            // Unit initial values; at the resonant level the center is set
            // to 0 so that the extra column carries it alone.
            let mut cols = Vec::with_capacity(dim);
            for j in (0..dim).filter(|&j| j != ci) {
                let mut c = DMatrix::zeros(dim, n_c + 1);
                c[(j, 0)] = 1.0;
                engine.fill(&mut c, f, None, Some((n, 0.0)))?;
                cols.push(c);
            }
            let mut c = DMatrix::zeros(dim, n_c + 1);
            engine.fill(&mut c, f, None, Some((n, 1.0)))?;
            cols.push(c);
            (cols, true)
        } else {
            (engine.frame_basis(f, n_c)?, false)
        };
        let eval = |z: f64| {
            let cols: Vec<DVector<f64>> = basis.iter().map(|t| eval_rows(t, f, g, z)).collect();
            DMatrix::from_columns(&cols)
        };
        let v = eval(points[i]);
        let nb = v.ncols();
        for s in 0..k {
            let aug = if resonant {
                let mut a = DMatrix::zeros(dim + 1, nb + 1);
                a.view_mut((0, 0), (dim, nb)).copy_from(&v);
                a.view_mut((0, nb), (dim, 1)).copy_from(&w.column(s));
                for (j, t) in basis.iter().enumerate().take(nb - 1) {
                    let mut off = 0.0;
                    if ci + 1 < dim {
                        off += hop_up * t[(ci + 1, n)];
                    }
                    if ci > 0 {
                        off += hop_down * t[(ci - 1, n)];
                    }
                    a[(dim, j)] = off;
                }
                a
            } else {
                let mut a = v.clone().insert_column(nb, 0.0);
                a.set_column(nb, &w.column(s));
                a
            };
            gm[(i, s)] = aug.lu().determinant();
        }
        if i + 1 < k {
            // Carry w through the frame's solution space. In the resonant
            // frame that space is {x : ℓ·x = 0}, the limit of the regular
            // space as E approaches the pole.
            let q = if resonant {
                let mut l = DVector::zeros(nb);
                for (j, t) in basis.iter().enumerate().take(nb - 1) {
                    l[j] = hop_up * t.get((ci + 1, n)).copied().unwrap_or(0.0)
                        + if ci > 0 { hop_down * t[(ci - 1, n)] } else { 0.0 };
                }
                constraint_kernel(&l)
            } else {
                DMatrix::identity(nb, nb)
            };
            w = eval(points[i + 1]) * &q * pinv(&(&v * &q)) * w;
            let s = w.amax();
            if s > 0.0 {
                w /= s;
            }
        }
    }
    Ok(crate::linalg::scaled_det(gm).0)
}

/// Orthonormal basis of the hyperplane orthogonal to `l`.
fn constraint_kernel(l: &DVector<f64>) -> DMatrix<f64> {
    let n = l.len();
    let norm2 = l.norm_squared();
    if norm2 == 0.0 {
        return DMatrix::identity(n, n);
    }
    let proj = DMatrix::identity(n, n) - l * l.transpose() / norm2;
    let eig = proj.symmetric_eigen();
    let cols: Vec<DVector<f64>> =
        (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).map(|i| eig.eigenvectors.column(i).into_owned()).collect();
    DMatrix::from_columns(&cols)
}

/// Sweeps g over `[g_lo, g_hi]`, brackets sign changes of the replaced
/// determinant, bisects, and keeps only couplings confirmed by the oracle.
pub fn find_exceptional(
    params: &ModelParams,
    parity: Parity,
    m: DickeIndex,
    n: usize,
    g_range: (f64, f64),
    opts: &ExceptionalOptions,
) -> Result<Vec<ExceptionalPoint>> {
    let (lo, hi) = g_range;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
        return Err(domain("invalid coupling range"));
    }
    let f = |g: f64| -> Option<f64> {
        let p = params.with_coupling(g).ok()?;
        exceptional_determinant(&p, parity, m, n, opts.n_c).ok().filter(|v| v.is_finite())
    };
    let steps = ((hi - lo) / opts.g_step).ceil().max(1.0) as usize;
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let g = (lo + opts.g_step * i as f64).min(hi);
        if g <= 0.0 {
            continue;
        }
        if let Some(v) = f(g) {
            samples.push((g, v));
        }
    }
    let mut out = Vec::new();
    for w in samples.windows(2) {
        let ((mut a, mut fa), (mut b, fb)) = (w[0], w[1]);
        if sign_of(fa) * sign_of(fb) >= 0 {
            continue;
        }
        let _ = fb;
        while b - a > opts.root_tolerance {
            let c = 0.5 * (a + b);
            if c <= a || c >= b {
                break;
            }
            let Some(fc) = f(c) else { break };
            if sign_of(fc) == sign_of(fa) {
                a = c;
                fa = fc;
            } else {
                b = c;
            }
        }
        let g = 0.5 * (a + b);
        let p = params.with_coupling(g)?;
        let energy = params.omega() * (n as f64 - 4.0 * m.m() * m.m() * (g / params.omega()).powi(2));
        let ev = oracle::sector_eigenvalues(&p, parity, Basis::Fock, opts.oracle_cutoff)?;
        let dev = ev.iter().map(|e| (e - energy).abs()).fold(f64::INFINITY, f64::min);
        if dev < opts.oracle_tolerance {
            out.push(ExceptionalPoint { g, energy, parity, m, n, oracle_deviation: dev });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_is_below_ground_state() {
        let p = ModelParams::new(3, 0.7, 0.25).unwrap();
        let ev = oracle::sector_eigenvalues(&p, Parity::Positive, Basis::Fock, 60).unwrap();
        assert!(energy_lower_bound(&p) < ev[0]);
    }

    #[test]
    fn grid_respects_minimum_density() {
        let o = ScanOptions::default();
        assert!(grid(0.0, 1e-5, true, true, &o).len() >= 8);
        let g = grid(0.0, 1.0, true, false, &o);
        assert!(g.len() >= 1000);
        assert!(g[0] > 0.0 && *g.last().unwrap() == 1.0);
    }

    #[test]
    fn symmetrize_projects() {
        let mut v = DVector::from_fn(6, |i, _| i as f64 + 1.0);
        symmetrize(&mut v, 2, 2, Parity::Positive);
        assert_eq!(v[0], v[4]);
        assert_eq!(v[1], -v[5]);
        assert_eq!(v[3], 0.0);
    }
}
