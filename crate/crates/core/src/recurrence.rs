//! Expansion coefficients of an energy-E solution of the Schrödinger equation.
//!
//! In the frame displaced by `2mg` (operator `A = d + 2mg`) the component
//! along |m′⟩ is `Σ_n c_{m′,n} A†ⁿ|0_A⟩`. Projecting the eigenvalue equation
//! on (m′, n) gives, for m′ ≠ m,
//!
//! ```text
//! c_{m′,n+1} = [(E − n + κ) c_{m′,n} − off_{m′,n}] / (2(m′−m)g(n+1)) − c_{m′,n−1}/(n+1)
//! κ = 4m(2m′−m)g²,   off_{m′,n} = H_{m′,m′+1} c_{m′+1,n} + H_{m′,m′−1} c_{m′−1,n}
//! ```
//!
//! and, for the component m′ = m itself (no linear term),
//! `c_{m,n} = off_{m,n} / (E − n + 4m²g²)`. The undisplaced frame (m = 0)
//! gives the ordinary Fock coefficients a_{m′,n}.
//!
//! Coefficients are stored without the `√n!` factor. All energies and
//! couplings passed in are physical; internally everything is measured in
//! units of ω.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::model::{DickeIndex, Ladder, ModelParams, Parity};
use num_traits::Float;

pub const DEFAULT_POLE_EPSILON: f64 = 1e-8;
pub const DEFAULT_G_MIN: f64 = 1e-10;

/// Which displaced boson the expansion uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Ordinary Fock states of `d`.
    Fock,
    /// Extended coherent states of `A = d + 2mg`, m > 0.
    Displaced(DickeIndex),
}

impl Frame {
    pub fn two_m(&self) -> i32 {
        match self {
            Frame::Fock => 0,
            Frame::Displaced(d) => d.two_m(),
        }
    }
}

/// The k free initial values a_{m′,0}, m′ > 0, ascending in m′.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedVector {
    entries: Vec<f64>,
}

impl SeedVector {
    pub fn new(params: &ModelParams, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != params.k() {
            return Err(domain("seed must have exactly k = ceil(N/2) entries"));
        }
        Ok(Self { entries })
    }

    /// Seed with a single 1 in slot `i`.
    pub fn unit(params: &ModelParams, i: usize) -> Result<Self> {
        let mut entries = alloc::vec![0.0; params.k()];
        *entries.get_mut(i).ok_or_else(|| domain("unit seed index out of range"))? = 1.0;
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Coefficients c_{m′,n} for all N+1 Dicke components and n = 0..=N_c.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    frame: Frame,
    energy: f64,
    parity: Option<Parity>,
    n_qubits: u32,
    values: DMatrix<f64>,
}

impl CoefficientTable {
    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn truncation(&self) -> usize {
        self.values.ncols() - 1
    }

    /// Parity used to mirror the table, if any.
    pub fn parity(&self) -> Option<Parity> {
        self.parity
    }

    pub fn get(&self, idx: DickeIndex, n: usize) -> f64 {
        self.values[(idx.position(self.n_qubits), n)]
    }

    /// Rows are Dicke components in ascending m′, columns are n.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Bargmann-space component values at real `z` (units of ω):
    /// `e^{−2mgu} Σ_n c_{m′,n} uⁿ` with `u = z + 2mg`.
    pub fn evaluate(&self, params: &ModelParams, z: f64) -> DVector<f64> {
        let g = params.reduced().g();
        eval_rows(&self.values, self.frame.two_m(), g, z)
    }
}

pub(crate) fn eval_rows(values: &DMatrix<f64>, frame_two_m: i32, g: f64, z: f64) -> DVector<f64> {
    let shift = f64::from(frame_two_m) * g;
    let u = z + shift;
    let mut out = DVector::zeros(values.nrows());
    let mut pw = 1.0;
    for n in 0..values.ncols() {
        out.axpy(pw, &values.column(n), 1.0);
        pw *= u;
    }
    if frame_two_m != 0 {
        out *= (-shift * u).exp();
    }
    out
}

/// Settings shared by every recurrence run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Engine {
    pub n_qubits: u32,
    pub delta: f64,
    pub g: f64,
    pub energy: f64,
    pub pole_epsilon: f64,
}

impl Engine {
    /// Reduced-unit engine for a physical model and physical energy.
    pub fn new(params: &ModelParams, energy: f64, pole_epsilon: f64, g_min: f64) -> Result<Self> {
        if !energy.is_finite() {
            return Err(domain("energy must be finite"));
        }
        let r = params.reduced();
        if r.g() < g_min {
            return Err(domain("coupling below g_min: use the decoupled spectrum instead"));
        }
        Ok(Self {
            n_qubits: r.n_qubits(),
            delta: r.delta(),
            g: r.g(),
            energy: energy / params.omega(),
            pole_epsilon,
        })
    }

    fn params(&self) -> ModelParams {
        ModelParams::new(self.n_qubits, self.delta, self.g).expect("validated")
    }

    /// Fills `c` (rows = Dicke positions) from the level-0 values already
    /// stored in every non-center row.
    ///
    /// `mirror` imposes c_{−m′,n} = p(−1)ⁿ c_{m′,n} (only meaningful in the
    /// undisplaced frame). `resonance = Some((n₀, v))` frees the center
    /// component at level n₀ and sets it to `v` instead of dividing by the
    /// vanishing denominator.
    pub fn fill(
        &self,
        c: &mut DMatrix<f64>,
        frame_two_m: i32,
        mirror: Option<Parity>,
        resonance: Option<(usize, f64)>,
    ) -> Result<()> {
        let p = self.params();
        let n_q = self.n_qubits as i32;
        let nc = c.ncols() - 1;
        let m = 0.5 * f64::from(frame_two_m);
        let g = self.g;
        let has_center = (frame_two_m - n_q).rem_euclid(2) == 0 && frame_two_m.abs() <= n_q;
        let center = if has_center { Some(((frame_two_m + n_q) / 2) as usize) } else { None };
        let dim = self.n_qubits as usize + 1;
        let two_ms: Vec<i32> = (0..dim as i32).map(|i| 2 * i - n_q).collect();
        let hop_up: Vec<f64> = two_ms.iter().map(|&t| p.hop(t, Ladder::Raise)).collect();
        let hop_down: Vec<f64> = two_ms.iter().map(|&t| p.hop(t, Ladder::Lower)).collect();
        let off = |c: &DMatrix<f64>, i: usize, n: usize| {
            let mut s = 0.0;
            if i + 1 < dim {
                s += hop_up[i] * c[(i + 1, n)];
            }
            if i > 0 {
                s += hop_down[i] * c[(i - 1, n)];
            }
            s
        };

        let apply_mirror = |c: &mut DMatrix<f64>, n: usize| {
            if let Some(par) = mirror {
                let f = par.mirror_factor(n);
                for i in 0..dim / 2 {
                    c[(i, n)] = f * c[(dim - 1 - i, n)];
                }
            }
        };

        let set_center = |c: &mut DMatrix<f64>, n: usize| -> Result<()> {
            let Some(ci) = center else { return Ok(()) };
            if let Some((n0, v)) = resonance {
                if n0 == n {
                    c[(ci, n)] = v;
                    return Ok(());
                }
            }
            // In the mirrored Fock frame the numerator vanishes identically
            // for one parity of n, and so does the pole.
            if let Some(par) = mirror {
                if frame_two_m == 0 && par.mirror_factor(n) < 0.0 {
                    c[(ci, n)] = 0.0;
                    return Ok(());
                }
            }
            let pole = n as f64 - 4.0 * m * m * g * g;
            let den = self.energy - pole;
            if den.abs() < self.pole_epsilon {
                return Err(Error::Pole { energy: self.energy, pole, distance: den.abs() });
            }
            c[(ci, n)] = off(c, ci, n) / den;
            Ok(())
        };

        apply_mirror(c, 0);
        set_center(c, 0)?;
        for n in 0..nc {
            let nf = n as f64;
            for i in 0..dim {
                if Some(i) == center {
                    continue;
                }
                let mp = 0.5 * f64::from(two_ms[i]);
                let kappa = 4.0 * m * (2.0 * mp - m) * g * g;
                let prev = if n > 0 { c[(i, n - 1)] } else { 0.0 };
                let num = (self.energy - nf + kappa) * c[(i, n)] - off(c, i, n);
                c[(i, n + 1)] = num / (2.0 * (mp - m) * g * (nf + 1.0)) - prev / (nf + 1.0);
            }
            apply_mirror(c, n + 1);
            set_center(c, n + 1)?;
        }
        Ok(())
    }

    /// Basis tables of frame `frame_two_m`: one per non-center component,
    /// each with a unit initial value there and zeros elsewhere.
    pub fn frame_basis(&self, frame_two_m: i32, n_c: usize) -> Result<Vec<DMatrix<f64>>> {
        let dim = self.n_qubits as usize + 1;
        let ci = ((frame_two_m + self.n_qubits as i32) / 2) as usize;
        let mut out = Vec::with_capacity(dim - 1);
        for i in (0..dim).filter(|&i| i != ci) {
            let mut c = DMatrix::zeros(dim, n_c + 1);
            c[(i, 0)] = 1.0;
            self.fill(&mut c, frame_two_m, None, None)?;
            out.push(c);
        }
        Ok(out)
    }

    /// Fock-frame table for a seed on the positive components.
    pub fn a_table(&self, parity: Parity, seed: &[f64], n_c: usize) -> Result<DMatrix<f64>> {
        let dim = self.n_qubits as usize + 1;
        let mut c = DMatrix::zeros(dim, n_c + 1);
        let first_pos = dim - seed.len();
        for (s, v) in seed.iter().enumerate() {
            c[(first_pos + s, 0)] = *v;
        }
        self.fill(&mut c, 0, Some(parity), None)?;
        Ok(c)
    }
}

fn check_truncation(n_c: usize) -> Result<()> {
    if n_c == 0 {
        return Err(domain("truncation N_c must be at least 1"));
    }
    Ok(())
}

/// Ordinary-Fock coefficients a_{m′,n} generated from the k free values
/// a_{m′>0,0}, with the parity mirror a_{−m′,n} = p(−1)ⁿ a_{m′,n}.
pub fn generate_a_table(
    params: &ModelParams,
    energy: f64,
    parity: Parity,
    seed: &SeedVector,
    n_c: usize,
) -> Result<CoefficientTable> {
    generate_a_table_with(params, energy, parity, seed, n_c, DEFAULT_POLE_EPSILON, DEFAULT_G_MIN)
}

pub fn generate_a_table_with(
    params: &ModelParams,
    energy: f64,
    parity: Parity,
    seed: &SeedVector,
    n_c: usize,
    pole_epsilon: f64,
    g_min: f64,
) -> Result<CoefficientTable> {
    check_truncation(n_c)?;
    if seed.entries.len() != params.k() {
        return Err(domain("seed length does not match k"));
    }
    let engine = Engine::new(params, energy, pole_epsilon, g_min)?;
    let values = engine.a_table(parity, &seed.entries, n_c)?;
    Ok(CoefficientTable { frame: Frame::Fock, energy, parity: Some(parity), n_qubits: params.n_qubits(), values })
}

/// Initial ECS coefficients of frame `m_frame` from the Fock-frame series,
/// `c_{m′,0} = Σ_n a_{m′,n} (−2mg)ⁿ` for every m′ ≠ m (ascending m′).
/// The overall proportionality constant is fixed to 1; zero locations of
/// the G-function do not depend on it.
pub fn project_initial_c(
    params: &ModelParams,
    a_table: &CoefficientTable,
    m_frame: DickeIndex,
    tail_tolerance: f64,
) -> Result<Vec<f64>> {
    if a_table.frame != Frame::Fock {
        return Err(domain("projection needs a Fock-frame table"));
    }
    let m_frame = DickeIndex::new(params.n_qubits(), m_frame.two_m())?;
    let x = -f64::from(m_frame.two_m()) * params.reduced().g();
    let ci = m_frame.position(params.n_qubits());
    let mut out = Vec::with_capacity(params.n_qubits() as usize);
    for (i, row) in a_table.values.row_iter().enumerate() {
        if i == ci {
            continue;
        }
        let (mut sum, mut pw, mut last, mut scale) = (0.0, 1.0, 0.0, 0.0f64);
        for v in row.iter() {
            last = v * pw;
            sum += last;
            scale = scale.max(last.abs());
            pw *= x;
        }
        if last.abs() > tail_tolerance * sum.abs().max(f64::MIN_POSITIVE) && last.abs() > 1e-300 {
            return Err(Error::Convergence { last_term: last, partial_sum: sum });
        }
        let _ = scale;
        out.push(sum);
    }
    Ok(out)
}

/// ECS coefficients in frame `m_frame` (m > 0) from the N initial values
/// c_{m′≠m,0}, ascending in m′.
pub fn generate_c_table(
    params: &ModelParams,
    energy: f64,
    parity: Option<Parity>,
    initial_c: &[f64],
    m_frame: DickeIndex,
    n_c: usize,
) -> Result<CoefficientTable> {
    generate_c_table_with(params, energy, parity, initial_c, m_frame, n_c, DEFAULT_POLE_EPSILON, DEFAULT_G_MIN)
}

#[allow(clippy::too_many_arguments)]
pub fn generate_c_table_with(
    params: &ModelParams,
    energy: f64,
    parity: Option<Parity>,
    initial_c: &[f64],
    m_frame: DickeIndex,
    n_c: usize,
    pole_epsilon: f64,
    g_min: f64,
) -> Result<CoefficientTable> {
    check_truncation(n_c)?;
    let m_frame = DickeIndex::new(params.n_qubits(), m_frame.two_m())?;
    if m_frame.two_m() <= 0 {
        return Err(domain("displaced frames need m > 0"));
    }
    let dim = params.dicke_dim();
    if initial_c.len() != dim - 1 {
        return Err(domain("need one initial value per component m' != m"));
    }
    let engine = Engine::new(params, energy, pole_epsilon, g_min)?;
    let ci = m_frame.position(params.n_qubits());
    let mut c = DMatrix::zeros(dim, n_c + 1);
    for (slot, i) in (0..dim).filter(|&i| i != ci).enumerate() {
        c[(i, 0)] = initial_c[slot];
    }
    engine.fill(&mut c, m_frame.two_m(), None, None)?;
    Ok(CoefficientTable {
        frame: Frame::Displaced(m_frame),
        energy,
        parity,
        n_qubits: params.n_qubits(),
        values: c,
    })
}

/// Largest violation of the defining recurrences over interior entries,
/// relative to the largest coefficient of the table.
pub fn recurrence_residual(params: &ModelParams, table: &CoefficientTable) -> f64 {
    let r = params.reduced();
    let e = table.energy / params.omega();
    let g = r.g();
    let n_q = r.n_qubits() as i32;
    let v = &table.values;
    let dim = v.nrows();
    let nc = v.ncols() - 1;
    let frame_two_m = table.frame.two_m();
    let m = 0.5 * f64::from(frame_two_m);
    let scale = v.amax().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for i in 0..dim {
        let two_mp = 2 * i as i32 - n_q;
        let mp = 0.5 * f64::from(two_mp);
        for n in 0..=nc {
            let mut off = 0.0;
            if i + 1 < dim {
                off += r.hop(two_mp, Ladder::Raise) * v[(i + 1, n)];
            }
            if i > 0 {
                off += r.hop(two_mp, Ladder::Lower) * v[(i - 1, n)];
            }
            let nf = n as f64;
            // ⟨n|(H − E)|ψ⟩ on component m′ in the A frame.
            let diag = (nf - 4.0 * m * (2.0 * mp - m) * g * g - e) * v[(i, n)];
            let lin = 2.0 * (mp - m) * g;
            let up = if n + 1 <= nc { (nf + 1.0) * v[(i, n + 1)] } else if lin == 0.0 { 0.0 } else { continue };
            let down = if n > 0 { v[(i, n - 1)] } else { 0.0 };
            let res = diag + lin * (up + down) + off;
            worst = worst.max(res.abs() / scale);
        }
    }
    worst
}
