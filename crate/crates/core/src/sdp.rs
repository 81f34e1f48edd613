//! Primal-dual interior-point solver for the fully decomposable witness
//! program
//!
//! ```text
//! maximize  −Tr(Wρ)
//! subject to, for every cut M:  0 ⪯ P_M ⪯ I,  0 ⪯ (W − P_M)^{T_M} ⪯ I
//! ```
//!
//! written as a dual-form SDP in the Hermitian variables (W, P_1..P_B). Each
//! cut contributes four slack blocks. The Schur complement has arrow shape
//! (W couples to every P_M, the P_M do not couple to each other), so it is
//! solved by eliminating each P_M block. Search direction: Nesterov-Todd with a
//! Mehrotra predictor-corrector.

use alloc::string::String;
use alloc::vec::Vec;
use nalgebra::{Cholesky, Complex, DMatrix, DVector, Dyn, SymmetricEigen, LU};
use num_traits::Float;

use crate::error::{Error, Result};

type C64 = Complex<f64>;
type HMat = DMatrix<C64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SdpOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SdpSolution {
    pub witness: HMat,
    /// −Tr(Wρ) at the returned witness.
    pub dual_objective: f64,
    pub primal_objective: f64,
    pub primal_infeasibility: f64,
    pub iterations: usize,
    /// Why the iteration stopped short of the tolerance, if it did.
    pub stalled: Option<String>,
}

/// Swaps the bits selected by `mask` between row and column index.
pub(crate) fn pt_index(r: usize, s: usize, mask: usize) -> (usize, usize) {
    ((r & !mask) | (s & mask), (s & !mask) | (r & mask))
}

pub(crate) fn partial_transpose(m: &HMat, mask: usize) -> HMat {
    let d = m.nrows();
    let mut out = HMat::zeros(d, d);
    for r in 0..d {
        for s in 0..d {
            let (a, b) = pt_index(r, s, mask);
            out[(a, b)] = m[(r, s)];
        }
    }
    out
}

/// Orthonormal basis of the Hermitian d×d matrices under Re Tr(AB): each
/// element is a list of (row, col, coefficient) terms.
struct HermitianBasis {
    dim: usize,
    terms: Vec<[(usize, usize, C64); 2]>,
}

impl HermitianBasis {
    fn new(d: usize) -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let zero = (0, 0, Complex::new(0.0, 0.0));
        let mut terms = Vec::with_capacity(d * d);
        for a in 0..d {
            terms.push([(a, a, Complex::new(1.0, 0.0)), zero]);
        }
        for a in 0..d {
            for b in a + 1..d {
                terms.push([(a, b, Complex::new(h, 0.0)), (b, a, Complex::new(h, 0.0))]);
            }
        }
        for a in 0..d {
            for b in a + 1..d {
                terms.push([(a, b, Complex::new(0.0, h)), (b, a, Complex::new(0.0, -h))]);
            }
        }
        Self { dim: d, terms }
    }

    fn len(&self) -> usize {
        self.terms.len()
    }

    fn transposed(&self, mask: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let f = |(r, s, c): (usize, usize, C64)| {
                    let (a, b) = pt_index(r, s, mask);
                    (a, b, c)
                };
                [f(t[0]), f(t[1])]
            })
            .collect();
        Self { dim: self.dim, terms }
    }

    fn coords(&self, m: &HMat) -> DVector<f64> {
        DVector::from_fn(self.len(), |i, _| {
            self.terms[i].iter().map(|&(r, s, c)| (c * m[(s, r)]).re).sum()
        })
    }

    fn matrix(&self, y: &DVector<f64>) -> HMat {
        let mut m = HMat::zeros(self.dim, self.dim);
        for (i, t) in self.terms.iter().enumerate() {
            for &(r, s, c) in t {
                m[(r, s)] += c * y[i];
            }
        }
        m
    }

    /// Adds Re Tr(A_i X A_j Z) for all i, j.
    fn accumulate_schur(&self, x: &HMat, z: &HMat, out: &mut DMatrix<f64>) {
        let n = self.len();
        for i in 0..n {
            let ti = &self.terms[i];
            for j in i..n {
                let tj = &self.terms[j];
                let mut v = Complex::new(0.0, 0.0);
                for &(ri, si, ci) in ti {
                    if ci.re == 0.0 && ci.im == 0.0 {
                        continue;
                    }
                    for &(rj, sj, cj) in tj {
                        if cj.re == 0.0 && cj.im == 0.0 {
                            continue;
                        }
                        v += ci * cj * x[(si, rj)] * z[(sj, ri)];
                    }
                }
                out[(i, j)] += v.re;
                if i != j {
                    out[(j, i)] += v.re;
                }
            }
        }
    }
}

fn herm(m: &HMat) -> HMat {
    (m + m.adjoint()) * Complex::new(0.5, 0.0)
}

fn inner(a: &HMat, b: &HMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn identity(d: usize) -> HMat {
    HMat::identity(d, d)
}

/// Largest step α ≤ 1 with m + α·dm ⪰ 0, damped by `frac`.
fn step_length(m: &HMat, dm: &HMat, frac: f64) -> Option<f64> {
    let l = Cholesky::new(m.clone())?.l();
    let li = l.clone().try_inverse()?;
    let t = herm(&(&li * dm * li.adjoint()));
    let lmin = SymmetricEigen::new(t).eigenvalues.min();
    Some(if lmin < 0.0 { (frac / -lmin).min(1.0) } else { 1.0 })
}

/// Nesterov-Todd scaling point W with W S W = X.
fn nt_scaling(x: &HMat, s: &HMat) -> Option<HMat> {
    let lx = Cholesky::new(x.clone())?.l();
    let ls = Cholesky::new(s.clone())?.l();
    let svd = (ls.adjoint() * &lx).svd(false, true);
    let v = svd.v_t?.adjoint();
    let mut g = lx * v;
    for (j, d) in svd.singular_values.iter().enumerate() {
        if !(*d > 0.0) {
            return None;
        }
        g.column_mut(j).scale_mut(1.0 / d.sqrt());
    }
    Some(herm(&(&g * g.adjoint())))
}

/// Variables in matrix form: W and one P per cut.
#[derive(Clone)]
struct Vars {
    w: HMat,
    p: Vec<HMat>,
}

/// Slack or primal blocks: four per cut.
type Blocks = Vec<[HMat; 4]>;

struct Problem<'a> {
    rho: &'a HMat,
    masks: &'a [usize],
    d: usize,
}

impl Problem<'_> {
    /// 𝒜*(y) blocks.
    fn adjoint(&self, v: &Vars) -> Blocks {
        self.masks
            .iter()
            .zip(&v.p)
            .map(|(&mask, p)| {
                let q = partial_transpose(&(&v.w - p), mask);
                [-p, p.clone(), -&q, q]
            })
            .collect()
    }

    /// 𝒜(Y) for Hermitian blocks.
    fn forward(&self, y: &Blocks) -> Vars {
        let mut w = HMat::zeros(self.d, self.d);
        let mut p = Vec::with_capacity(y.len());
        for (&mask, blk) in self.masks.iter().zip(y) {
            let t = partial_transpose(&(&blk[2] - &blk[3]), mask);
            w -= &t;
            p.push(&blk[1] - &blk[0] + t);
        }
        Vars { w, p }
    }

    fn c_block(&self, k: usize) -> HMat {
        if k % 2 == 1 {
            identity(self.d)
        } else {
            HMat::zeros(self.d, self.d)
        }
    }

    fn b(&self) -> Vars {
        Vars { w: -self.rho.clone(), p: alloc::vec![HMat::zeros(self.d, self.d); self.masks.len()] }
    }
}

fn sub_vars(a: &Vars, b: &Vars) -> Vars {
    Vars { w: &a.w - &b.w, p: a.p.iter().zip(&b.p).map(|(x, y)| x - y).collect() }
}

fn vars_norm(v: &Vars) -> f64 {
    (inner(&v.w, &v.w) + v.p.iter().map(|p| inner(p, p)).sum::<f64>()).sqrt()
}

fn blocks_norm(b: &Blocks) -> f64 {
    b.iter().flat_map(|x| x.iter()).map(|m| inner(m, m)).sum::<f64>().sqrt()
}

enum Factor {
    Chol(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
}

impl Factor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        match Cholesky::new(m.clone()) {
            Some(c) => Some(Factor::Chol(c)),
            None => {
                let lu = m.lu();
                lu.is_invertible().then_some(Factor::Lu(lu))
            }
        }
    }

    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        match self {
            Factor::Chol(c) => c.solve(b),
            Factor::Lu(l) => l.solve(b).unwrap_or_else(|| DVector::from_element(b.len(), f64::NAN)),
        }
    }

    fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Factor::Chol(c) => c.solve(b),
            Factor::Lu(l) => l.solve(b).unwrap_or_else(|| DMatrix::from_element(b.nrows(), b.ncols(), f64::NAN)),
        }
    }
}

pub(crate) fn solve(rho: &HMat, masks: &[usize], opts: &SdpOptions) -> SdpSolution {
    let d = rho.nrows();
    let prob = Problem { rho, masks, d };
    let basis = HermitianBasis::new(d);
    let pt_basis: Vec<HermitianBasis> = masks.iter().map(|&m| basis.transposed(m)).collect();
    let nh = basis.len();
    let nb = masks.len();
    let n_total = (4 * nb * d) as f64;

    // Strictly feasible dual start: W = I, P = I/2, every slack block I/2.
    let half = identity(d) * Complex::new(0.5, 0.0);
    let mut y = Vars { w: identity(d), p: alloc::vec![half.clone(); nb] };
    let mut s: Blocks = (0..nb).map(|_| [half.clone(), half.clone(), half.clone(), half.clone()]).collect();
    let mut x: Blocks = (0..nb).map(|_| [identity(d), identity(d), identity(d), identity(d)]).collect();
    let b = prob.b();
    let b_norm = vars_norm(&b);
    let mut last = SdpSolution {
        witness: y.w.clone(),
        dual_objective: -inner(rho, &y.w),
        primal_objective: f64::INFINITY,
        primal_infeasibility: f64::INFINITY,
        iterations: 0,
        stalled: None,
    };
    // Best iterate by max(gap, infeasibilities); returned when the solve
    // stops early, since late iterates can drift once precision runs out.
    let mut best = last.clone();
    let mut best_score = f64::INFINITY;
    let mut collapsed = 0;

    for iter in 0..opts.max_iterations {
        let ax = prob.forward(&x);
        let rp = sub_vars(&b, &ax);
        let aty = prob.adjoint(&y);
        let rd: Blocks = (0..nb)
            .map(|m| core::array::from_fn(|k| herm(&(prob.c_block(k) - &s[m][k] - &aty[m][k]))))
            .collect();
        let pobj: f64 = x.iter().map(|blk| blk[1].trace().re + blk[3].trace().re).sum();
        let dobj = -inner(rho, &y.w);
        let mu: f64 = x.iter().zip(&s).flat_map(|(a, b)| a.iter().zip(b.iter())).map(|(a, b)| inner(a, b)).sum::<f64>() / n_total;
        let pinf = vars_norm(&rp) / (1.0 + b_norm);
        let dinf = blocks_norm(&rd) / (1.0 + (n_total / 2.0).sqrt());
        let gap = (pobj - dobj).abs();
        let done = gap < opts.tolerance && pinf < opts.tolerance && dinf < opts.tolerance;
        last = SdpSolution {
            witness: y.w.clone(),
            dual_objective: dobj,
            primal_objective: pobj,
            primal_infeasibility: pinf,
            iterations: iter,
            stalled: None,
        };
        if done {
            return last;
        }
        let score = gap.max(pinf).max(dinf);
        if score < best_score {
            best_score = score;
            best = last.clone();
        }

        let attempt = (|| -> Result<(Vars, Blocks, Blocks, f64, f64)> {
        let mut z: Blocks = Vec::with_capacity(nb);
        for blk in &s {
            let mut zi: [HMat; 4] = core::array::from_fn(|_| HMat::zeros(0, 0));
            for k in 0..4 {
                zi[k] = herm(&blk[k].clone().try_inverse().ok_or_else(|| failure(iter, "singular slack"))?);
            }
            z.push(zi);
        }
        let mut sc: Blocks = Vec::with_capacity(nb);
        for m in 0..nb {
            let mut wi: [HMat; 4] = core::array::from_fn(|_| HMat::zeros(0, 0));
            for k in 0..4 {
                wi[k] = nt_scaling(&x[m][k], &s[m][k]).ok_or_else(|| failure(iter, "lost definiteness"))?;
            }
            sc.push(wi);
        }

        // Arrow Schur complement: K_M from the transposed blocks, J_M from
        // the P blocks.
        let mut k_mats = Vec::with_capacity(nb);
        let mut l_fac = Vec::with_capacity(nb);
        let mut reduced = DMatrix::zeros(nh, nh);
        for m in 0..nb {
            let mut km = DMatrix::zeros(nh, nh);
            pt_basis[m].accumulate_schur(&sc[m][2], &sc[m][2], &mut km);
            pt_basis[m].accumulate_schur(&sc[m][3], &sc[m][3], &mut km);
            let mut jm = DMatrix::zeros(nh, nh);
            basis.accumulate_schur(&sc[m][0], &sc[m][0], &mut jm);
            basis.accumulate_schur(&sc[m][1], &sc[m][1], &mut jm);
            let lf = Factor::new(&km + &jm).ok_or_else(|| failure(iter, "singular Schur block"))?;
            // K − K(K+J)⁻¹K written as K(K+J)⁻¹J to avoid cancellation.
            let r = &km * lf.solve_matrix(&jm);
            reduced += (&r + r.transpose()) * 0.5;
            k_mats.push(km);
            l_fac.push(lf);
        }
        let red_fac = Factor::new(reduced).ok_or_else(|| failure(iter, "singular reduced Schur matrix"))?;

        let solve_coords = |rw: DVector<f64>, rps: Vec<DVector<f64>>| -> (DVector<f64>, Vec<DVector<f64>>) {
            let mut total = rw;
            let mut sols = Vec::with_capacity(nb);
            for m in 0..nb {
                let v = l_fac[m].solve(&rps[m]);
                total += &k_mats[m] * &v;
                sols.push(v);
            }
            let dw = red_fac.solve(&total);
            let dp = (0..nb).map(|m| &sols[m] + l_fac[m].solve(&(&k_mats[m] * &dw))).collect();
            (dw, dp)
        };
        // Schur operator applied in matrix form: 𝒜(X 𝒜*(Δy) Z).
        let apply_schur = |dy: &Vars| -> Vars {
            let ady = prob.adjoint(dy);
            let t: Blocks = (0..nb).map(|m| core::array::from_fn(|k| &sc[m][k] * &ady[m][k] * &sc[m][k])).collect();
            prob.forward(&t)
        };
        let newton = |rhs: &Vars| -> Result<Vars> {
            let rw = basis.coords(&rhs.w);
            let rps: Vec<DVector<f64>> = rhs.p.iter().map(|p| basis.coords(p)).collect();
            let (mut dw, mut dp) = solve_coords(rw.clone(), rps.clone());
            // Iterative refinement against the operator form.
            for _ in 0..2 {
                let cur = Vars { w: basis.matrix(&dw), p: dp.iter().map(|v| basis.matrix(v)).collect() };
                let got = apply_schur(&cur);
                let ew = &rw - basis.coords(&got.w);
                let eps: Vec<DVector<f64>> = rps.iter().zip(&got.p).map(|(r, g)| r - basis.coords(g)).collect();
                let (cw, cp) = solve_coords(ew, eps);
                dw += cw;
                for (a, c) in dp.iter_mut().zip(cp) {
                    *a += c;
                }
            }
            if !dw.iter().chain(dp.iter().flat_map(|v| v.iter())).all(|v| v.is_finite()) {
                return Err(failure(iter, "non-finite search direction"));
            }
            Ok(Vars { w: basis.matrix(&dw), p: dp.iter().map(|v| basis.matrix(v)).collect() })
        };

        // Direction for a given complementarity target and corrector term.
        let direction = |sigma_mu: f64, corr: Option<&Blocks>| -> Result<(Vars, Blocks, Blocks)> {
            // rhs = b − σμ𝒜(Z) + 𝒜(X R_d Z) + 𝒜(corr)
            let mut t: Blocks = Vec::with_capacity(nb);
            for m in 0..nb {
                t.push(core::array::from_fn(|k| {
                    let mut v = herm(&(&sc[m][k] * &rd[m][k] * &sc[m][k])) - &z[m][k] * Complex::new(sigma_mu, 0.0);
                    if let Some(c) = corr {
                        v += &c[m][k];
                    }
                    v
                }));
            }
            let at = prob.forward(&t);
            let rhs = Vars { w: &b.w + &at.w, p: b.p.iter().zip(&at.p).map(|(a, c)| a + c).collect() };
            let dy = newton(&rhs)?;
            let ady = prob.adjoint(&dy);
            let ds: Blocks = (0..nb).map(|m| core::array::from_fn(|k| &rd[m][k] - &ady[m][k])).collect();
            let dx: Blocks = (0..nb)
                .map(|m| {
                    core::array::from_fn(|k| {
                        let mut v = &z[m][k] * Complex::new(sigma_mu, 0.0) - &x[m][k] - &sc[m][k] * &ds[m][k] * &sc[m][k];
                        if let Some(c) = corr {
                            v -= &c[m][k];
                        }
                        herm(&v)
                    })
                })
                .collect();
            Ok((dy, ds, dx))
        };

        let steps = |dx: &Blocks, ds: &Blocks, frac: f64| -> Result<(f64, f64)> {
            let mut ap = 1.0f64;
            let mut ad = 1.0f64;
            for m in 0..nb {
                for k in 0..4 {
                    ap = ap.min(step_length(&x[m][k], &dx[m][k], frac).ok_or_else(|| failure(iter, "lost definiteness"))?);
                    ad = ad.min(step_length(&s[m][k], &ds[m][k], frac).ok_or_else(|| failure(iter, "lost definiteness"))?);
                }
            }
            Ok((ap, ad))
        };

        let (_, ds_a, dx_a) = direction(0.0, None)?;
        let (ap, ad) = steps(&dx_a, &ds_a, 1.0)?;
        let mu_aff: f64 = (0..nb)
            .flat_map(|m| (0..4).map(move |k| (m, k)))
            .map(|(m, k)| inner(&(&x[m][k] + &dx_a[m][k] * Complex::new(ap, 0.0)), &(&s[m][k] + &ds_a[m][k] * Complex::new(ad, 0.0))))
            .sum::<f64>()
            / n_total;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let corr: Blocks = (0..nb).map(|m| core::array::from_fn(|k| herm(&(&dx_a[m][k] * &ds_a[m][k] * &z[m][k])))).collect();
        let (dy, ds, dx) = direction(sigma * mu, Some(&corr))?;
        let (ap, ad) = steps(&dx, &ds, 0.95)?;
        Ok((dy, ds, dx, ap, ad))
        })();
        let (dy, ds, dx, ap, ad) = match attempt {
            Ok(v) => v,
            Err(Error::SolverFailure { reason, .. }) => {
                best.stalled = Some(reason);
                return best;
            }
            Err(_) => {
                best.stalled = Some(String::from("numerical breakdown"));
                return best;
            }
        };
        collapsed = if ap.max(ad) < 1e-3 { collapsed + 1 } else { 0 };
        if collapsed == 3 {
            best.stalled = Some(String::from("step length collapsed"));
            return best;
        }
        let (cp, cd) = (Complex::new(ap, 0.0), Complex::new(ad, 0.0));
        for m in 0..nb {
            for k in 0..4 {
                x[m][k] = herm(&(&x[m][k] + &dx[m][k] * cp));
                s[m][k] = herm(&(&s[m][k] + &ds[m][k] * cd));
            }
        }
        y.w += &dy.w * cd;
        for (p, dp) in y.p.iter_mut().zip(&dy.p) {
            *p += dp * cd;
        }
    }
    best.stalled = Some(String::from("iteration limit reached"));
    best
}

fn failure(iterations: usize, reason: &str) -> Error {
    Error::SolverFailure { iterations, reason: String::from(reason) }
}
