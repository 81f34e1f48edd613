//! The parity-resolved G-function: a k×k determinant whose zeros are the
//! regular eigenvalues.
//!
//! Column `s` of the matrix belongs to the Fock-frame solution seeded by
//! a_{m_s,0} = 1 (all other free values 0); row `i` tests whether that
//! solution also solves the equations of the frame displaced by `2m_i g`.
//!
//! Two evaluation schemes are provided.
//!
//! * [`GScheme::Matched`] (default) compares the Fock-frame solution with the
//!   frame-`m_i` solutions at interior points of the Bargmann plane, hopping
//!   from frame to frame through points where both series converge
//!   geometrically. Row `i` is `det[V_i | w_i]`, where the columns of `V_i` are
//!   the frame-`m_i` solutions with unit initial values and `w_i` is the
//!   Fock-frame solution carried to the matching point.
//! * [`GScheme::DirectSeries`] sums the textbook series: initial ECS values
//!   from `Σ a_{m′,n}(−2mg)ⁿ` and matrix elements
//!   `Σ (c_{m,n} ∓ c_{−m,n})(2mg)ⁿ`. These sums sit on the boundary of their
//!   disc of convergence, so they are only asymptotic: accurate for small
//!   `N_c`, divergent as `N_c` grows. Kept for curve plots and diagnostics.
//!
//! Both schemes share the same pole set and the same zeros in the limit of
//! convergence.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::linalg::{normalize, pinv, scaled_det};
use crate::model::{DickeIndex, ModelParams, Parity};
use crate::recurrence::{eval_rows, Engine, DEFAULT_G_MIN, DEFAULT_POLE_EPSILON};
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GScheme {
    #[default]
    Matched,
    DirectSeries,
}

/// Numerical settings of one G evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GOptions {
    pub n_c: usize,
    pub pole_epsilon: f64,
    pub g_min: f64,
    /// A series is rejected when its last term exceeds this fraction of its
    /// largest term. `f64::INFINITY` disables the check.
    pub tail_tolerance: f64,
    pub scheme: GScheme,
}

impl Default for GOptions {
    fn default() -> Self {
        Self {
            n_c: 20,
            pole_epsilon: DEFAULT_POLE_EPSILON,
            g_min: DEFAULT_G_MIN,
            tail_tolerance: 1e-2,
            scheme: GScheme::Matched,
        }
    }
}

impl GOptions {
    pub fn with_truncation(mut self, n_c: usize) -> Self {
        self.n_c = n_c;
        self
    }

    pub fn with_scheme(mut self, scheme: GScheme) -> Self {
        self.scheme = scheme;
        self
    }
}

/// One sample of G_±(E).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GEvaluation {
    pub energy: f64,
    /// x = E + N²g², which puts the lowest pole at x = 0.
    pub shifted_energy: f64,
    pub parity: Parity,
    /// Determinant after positive rescalings; its sign is that of G.
    pub value: f64,
    /// G = value · exp(log_scale).
    pub log_scale: f64,
    pub nearest_pole_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoleKind {
    /// E = n − 4m²g², divergence of the frame-m center coefficient.
    Exceptional { m: DickeIndex, n: usize },
    /// E = n from the m′ = 0 component (even N only).
    FockSector { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub energy: f64,
    pub kind: PoleKind,
}

/// All poles of one parity sector up to an energy bound, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    poles: Vec<Pole>,
}

impl PoleSet {
    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn energies(&self) -> Vec<f64> {
        self.poles.iter().map(|p| p.energy).collect()
    }

    pub fn exceptional(&self) -> impl Iterator<Item = &Pole> {
        self.poles.iter().filter(|p| matches!(p.kind, PoleKind::Exceptional { .. }))
    }

    pub fn fock_sector(&self) -> impl Iterator<Item = &Pole> {
        self.poles.iter().filter(|p| matches!(p.kind, PoleKind::FockSector { .. }))
    }
}

/// Poles of G_± with energy ≤ `e_max` (physical units).
pub fn pole_set(params: &ModelParams, parity: Parity, e_max: f64) -> PoleSet {
    let w = params.omega();
    let r = params.reduced();
    let g2 = r.g() * r.g();
    let x_max = e_max / w;
    let mut poles = Vec::new();
    for m in DickeIndex::positive(params.n_qubits()) {
        let shift = 4.0 * m.m() * m.m() * g2;
        let mut n = 0usize;
        while n as f64 - shift <= x_max {
            poles.push(Pole { energy: w * (n as f64 - shift), kind: PoleKind::Exceptional { m, n } });
            n += 1;
        }
    }
    if params.n_qubits() % 2 == 0 {
        let mut n = match parity {
            Parity::Positive => 0usize,
            Parity::Negative => 1,
        };
        while n as f64 <= x_max {
            poles.push(Pole { energy: w * n as f64, kind: PoleKind::FockSector { n } });
            n += 2;
        }
    }
    poles.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    PoleSet { poles }
}

/// Distance (physical units) from `energy` to the closest pole of the sector.
pub fn nearest_pole_distance(params: &ModelParams, parity: Parity, energy: f64) -> (f64, f64) {
    let w = params.omega();
    let r = params.reduced();
    let x = energy / w;
    let g2 = r.g() * r.g();
    let mut best = (f64::INFINITY, f64::NAN);
    let mut consider = |pole: f64| {
        let d = (x - pole).abs();
        if d < best.0 {
            best = (d, pole);
        }
    };
    for m in DickeIndex::positive(params.n_qubits()) {
        let shift = 4.0 * m.m() * m.m() * g2;
        let n = (x + shift).round().max(0.0);
        consider(n - shift);
    }
    if params.n_qubits() % 2 == 0 {
        let offset = match parity {
            Parity::Positive => 0.0,
            Parity::Negative => 1.0,
        };
        let n = (2.0 * ((x - offset) / 2.0).round() + offset).max(offset);
        consider(n);
    }
    (best.0 * w, best.1 * w)
}

/// Everything the matched scheme computes at one energy; reused by the
/// exceptional finder and the eigenstate reconstruction.
pub(crate) struct MatchedChain {
    pub engine: Engine,
    pub frames: Vec<i32>,
    pub points: Vec<f64>,
    /// Unit-seed Fock-frame tables, one per column.
    pub a_tables: Vec<DMatrix<f64>>,
    /// Frame basis values at its own matching point, (N+1)×N.
    pub v_at: Vec<DMatrix<f64>>,
    /// Frame basis values at the following matching point.
    pub v_next: Vec<DMatrix<f64>>,
}

pub(crate) fn matching_points(n_qubits: u32, g: f64) -> (Vec<i32>, Vec<f64>) {
    let frames: Vec<i32> = DickeIndex::positive(n_qubits).iter().map(|d| d.two_m()).collect();
    let r0 = if n_qubits % 2 == 1 { g } else { 2.0 * g };
    let d = f64::from(frames[0]) * g;
    let mut points = alloc::vec![-d * r0 / (r0 + 2.0 * g)];
    for w in frames.windows(2) {
        points.push(-0.5 * f64::from(w[0] + w[1]) * g);
    }
    (frames, points)
}

fn tail_ok(values: &DMatrix<f64>, frame_two_m: i32, g: f64, z: f64, tol: f64) -> Result<()> {
    if !tol.is_finite() {
        return Ok(());
    }
    let u = (z + f64::from(frame_two_m) * g).abs();
    let nc = values.ncols() - 1;
    let mut biggest = 0.0f64;
    let mut pw = 1.0;
    for n in 0..=nc {
        biggest = biggest.max(values.column(n).amax() * pw);
        if n < nc {
            pw *= u;
        }
    }
    let last = values.column(nc).amax() * pw;
    if !(last <= tol * biggest) {
        return Err(Error::Convergence { last_term: last, partial_sum: biggest });
    }
    Ok(())
}

impl MatchedChain {
    pub fn new(params: &ModelParams, energy: f64, parity: Parity, opts: &GOptions) -> Result<Self> {
        let engine = Engine::new(params, energy, opts.pole_epsilon, opts.g_min)?;
        let g = engine.g;
        let (frames, points) = matching_points(params.n_qubits(), g);
        let k = frames.len();
        let mut a_tables = Vec::with_capacity(k);
        for s in 0..k {
            let mut seed = alloc::vec![0.0; k];
            seed[s] = 1.0;
            let t = engine.a_table(parity, &seed, opts.n_c)?;
            tail_ok(&t, 0, g, points[0], opts.tail_tolerance)?;
            a_tables.push(t);
        }
        let mut v_at = Vec::with_capacity(k);
        let mut v_next = Vec::with_capacity(k);
        for (i, &f) in frames.iter().enumerate() {
            let basis = engine.frame_basis(f, opts.n_c)?;
            let eval = |z: f64| {
                let cols: Vec<DVector<f64>> = basis.iter().map(|t| eval_rows(t, f, g, z)).collect();
                DMatrix::from_columns(&cols)
            };
            for t in &basis {
                tail_ok(t, f, g, points[i], opts.tail_tolerance)?;
            }
            v_at.push(eval(points[i]));
            if i + 1 < k {
                for t in &basis {
                    tail_ok(t, f, g, points[i + 1], opts.tail_tolerance)?;
                }
                v_next.push(eval(points[i + 1]));
            }
        }
        Ok(Self { engine, frames, points, a_tables, v_at, v_next })
    }

    /// Fock-frame columns at the first matching point.
    pub fn initial_w(&self) -> DMatrix<f64> {
        let g = self.engine.g;
        let cols: Vec<DVector<f64>> = self.a_tables.iter().map(|t| eval_rows(t, 0, g, self.points[0])).collect();
        DMatrix::from_columns(&cols)
    }

    /// The k×k matrix and the log of the positive factor removed from each row.
    pub fn g_matrix(&self) -> (DMatrix<f64>, f64) {
        let k = self.frames.len();
        let mut w = self.initial_w();
        let mut log_scale = normalize(&mut w) * k as f64;
        let mut g = DMatrix::zeros(k, k);
        for i in 0..k {
            let v = &self.v_at[i];
            let n = v.ncols();
            let mut aug = v.clone().insert_column(n, 0.0);
            for s in 0..k {
                aug.set_column(n, &w.column(s));
                g[(i, s)] = aug.clone().lu().determinant();
            }
            if i + 1 < k {
                w = &self.v_next[i] * pinv(v) * w;
                log_scale += normalize(&mut w) * (k - 1 - i) as f64;
            }
        }
        (g, log_scale)
    }
}

fn direct_series_matrix(params: &ModelParams, energy: f64, parity: Parity, opts: &GOptions) -> Result<DMatrix<f64>> {
    let engine = Engine::new(params, energy, opts.pole_epsilon, opts.g_min)?;
    let n_q = params.n_qubits();
    let dim = params.dicke_dim();
    let g = engine.g;
    let frames = DickeIndex::positive(n_q);
    let k = frames.len();
    let mut out = DMatrix::zeros(k, k);
    for s in 0..k {
        let mut seed = alloc::vec![0.0; k];
        seed[s] = 1.0;
        let a = engine.a_table(parity, &seed, opts.n_c)?;
        for (i, f) in frames.iter().enumerate() {
            let ci = f.position(n_q);
            let x = -f64::from(f.two_m()) * g;
            let mut c = DMatrix::zeros(dim, opts.n_c + 1);
            for r in (0..dim).filter(|&r| r != ci) {
                let row = a.row(r);
                let (mut sum, mut pw, mut last, mut big) = (0.0, 1.0, 0.0f64, 0.0f64);
                for v in row.iter() {
                    last = (v * pw).abs();
                    big = big.max(last);
                    sum += v * pw;
                    pw *= x;
                }
                if opts.tail_tolerance.is_finite() && !(last <= opts.tail_tolerance * big) {
                    return Err(Error::Convergence { last_term: last, partial_sum: sum });
                }
                c[(r, 0)] = sum;
            }
            engine.fill(&mut c, f.two_m(), None, None)?;
            let mirror = f.mirrored().position(n_q);
            let y = -x;
            let (mut sum, mut pw) = (0.0, 1.0);
            for n in 0..=opts.n_c {
                sum += (c[(ci, n)] - parity.sign() * c[(mirror, n)]) * pw;
                pw *= y;
            }
            out[(i, s)] = sum;
        }
    }
    Ok(out)
}

fn check_energy(params: &ModelParams, energy: f64, parity: Parity, opts: &GOptions) -> Result<f64> {
    if opts.n_c == 0 {
        return Err(domain("truncation N_c must be at least 1"));
    }
    let (d, pole) = nearest_pole_distance(params, parity, energy);
    if d < opts.pole_epsilon * params.omega() {
        return Err(Error::Pole { energy, pole, distance: d });
    }
    Ok(d)
}

/// The k×k matrix G_±(m′, m) at energy E.
pub fn g_matrix(params: &ModelParams, energy: f64, parity: Parity, opts: &GOptions) -> Result<DMatrix<f64>> {
    check_energy(params, energy, parity, opts)?;
    match opts.scheme {
        GScheme::Matched => Ok(MatchedChain::new(params, energy, parity, opts)?.g_matrix().0),
        GScheme::DirectSeries => direct_series_matrix(params, energy, parity, opts),
    }
}

/// G_±(E) = det G_±(m′, m), with positive row rescaling.
pub fn g_value(params: &ModelParams, energy: f64, parity: Parity, opts: &GOptions) -> Result<GEvaluation> {
    let distance = check_energy(params, energy, parity, opts)?;
    let (m, mut log_scale) = match opts.scheme {
        GScheme::Matched => MatchedChain::new(params, energy, parity, opts)?.g_matrix(),
        GScheme::DirectSeries => (direct_series_matrix(params, energy, parity, opts)?, 0.0),
    };
    let (value, ls) = scaled_det(m);
    log_scale += ls;
    let r = params.reduced();
    let n = f64::from(params.n_qubits());
    Ok(GEvaluation {
        energy,
        shifted_energy: energy + params.omega() * n * n * r.g() * r.g(),
        parity,
        value,
        log_scale,
        nearest_pole_distance: distance,
    })
}
