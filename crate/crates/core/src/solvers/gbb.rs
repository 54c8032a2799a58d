use std::time::Instant;

use super::prepare;
use crate::error::{Error, Result};
use crate::manifolds::Manifold;
use crate::mat::{inner, Mat};
use crate::objective::Objective;
use crate::options::{BbVariant, SolverOptions};
use crate::report::{IterRecord, ReportBuilder, SolverReport, Status};

/// Reference value `C_k` and weight `Q_k` of the nonmonotone line search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonmonotoneState {
    c: f64,
    q: f64,
    varrho: f64,
}

impl NonmonotoneState {
    pub fn new(f0: f64, varrho: f64) -> Self {
        Self {
            c: f0,
            q: 1.0,
            varrho,
        }
    }

    pub fn reference(&self) -> f64 {
        self.c
    }

    pub fn weight(&self) -> f64 {
        self.q
    }

    /// `Q ← ϱQ + 1`, `C ← (ϱQ_old C + f)/Q`. When `f < C` the new reference
    /// is rounded downward if needed, so that `f ≤ C_new < C_old` survives
    /// rounding.
    pub fn accept(&mut self, f_next: f64) {
        let q_next = self.varrho * self.q + 1.0;
        let mut c = (self.varrho * self.q * self.c + f_next) / q_next;
        if f_next < self.c {
            c = c.min(self.c.next_down()).max(f_next);
        }
        self.c = c;
        self.q = q_next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbQuotient {
    /// `⟨s,s⟩ / |⟨s,v⟩|`.
    Long,
    /// `|⟨s,v⟩| / ⟨v,v⟩`.
    Short,
}

impl BbQuotient {
    pub fn for_iteration(variant: BbVariant, k: usize) -> Self {
        match variant {
            BbVariant::Long => BbQuotient::Long,
            BbVariant::Short => BbQuotient::Short,
            BbVariant::Alternate if k % 2 == 0 => BbQuotient::Long,
            BbVariant::Alternate => BbQuotient::Short,
        }
    }
}

/// Clamped Barzilai-Borwein step from the secant pair `(s, v)`; degenerate
/// pairs return the (clamped) fallback.
pub fn bb_step(s: &Mat, v: &Mat, quotient: BbQuotient, fallback: f64, gamma_min: f64, gamma_max: f64) -> f64 {
    let sv = inner(s, v).abs();
    let raw = match quotient {
        BbQuotient::Long => inner(s, s) / sv,
        BbQuotient::Short => sv / inner(v, v),
    };
    let step = if sv > 0.0 && raw.is_finite() && raw > 0.0 {
        raw
    } else {
        fallback
    };
    step.max(gamma_min).min(gamma_max)
}

/// Last secant pair; empty before the first step.
#[derive(Debug, Clone, Default)]
pub struct BbMemory {
    pair: Option<(Mat, Mat)>,
}

impl BbMemory {
    pub fn clear(&mut self) {
        self.pair = None;
    }

    pub fn record(&mut self, s: Mat, v: Mat) {
        self.pair = Some((s, v));
    }

    pub fn step(&self, quotient: BbQuotient, fallback: f64, gamma_min: f64, gamma_max: f64) -> f64 {
        match &self.pair {
            Some((s, v)) => bb_step(s, v, quotient, fallback, gamma_min, gamma_max),
            None => fallback.max(gamma_min).min(gamma_max),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    pub t: f64,
    pub x: Mat,
    pub f: f64,
    pub backtracks: usize,
    /// `C_k + ρt⟨grad f, η⟩ − f(x_next)`.
    pub margin: f64,
}

/// Backtracking `t = γδʰ` until `f(R_x(tη)) ≤ C_k + ρt⟨grad f(x), η⟩`;
/// on success the reference state absorbs the new value.
#[allow(clippy::too_many_arguments)]
pub fn nonmonotone_armijo<M, O>(
    m: &M,
    obj: &O,
    x: &Mat,
    rgrad: &Mat,
    eta: &Mat,
    gamma_init: f64,
    rho: f64,
    delta: f64,
    state: &mut NonmonotoneState,
    cap: usize,
) -> Result<LineSearchOutcome>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    let slope = inner(rgrad, eta);
    if !(slope < 0.0) {
        return Err(Error::Contract(format!(
            "line search direction is not a descent direction (slope {slope:e})"
        )));
    }
    let c = state.reference();
    let mut t = gamma_init;
    for h in 0..=cap {
        let x_next = m.retr(x, &(eta * t))?;
        let f_next = obj.eval(&x_next);
        // Difference form: `c + ρtσ` would absorb a decrease below one ulp of `c`.
        let required = rho * t * slope;
        let decrease = f_next - c;
        if decrease <= required {
            state.accept(f_next);
            return Ok(LineSearchOutcome {
                t,
                x: x_next,
                f: f_next,
                backtracks: h,
                margin: required - decrease,
            });
        }
        t *= delta;
    }
    Err(Error::LineSearchFailure { backtracks: cap })
}

pub(crate) struct GbbRun {
    pub x: Mat,
    pub f: f64,
    pub grad_norm: f64,
    pub iters: usize,
    pub status: Status,
    pub trace: Vec<IterRecord>,
}

/// The gradient iteration shared by the stand-alone solver, the warm start
/// and the TRQH inner solve.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gbb_loop<M, O>(
    m: &M,
    obj: &O,
    x0: Mat,
    f0: f64,
    egrad0: Mat,
    opts: &SolverOptions,
    tol: f64,
    max_iter: usize,
    record: bool,
) -> Result<GbbRun>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    let mut x = x0;
    let mut f = f0;
    let mut rgrad = m.proj(&x, &egrad0);
    let mut gn = rgrad.norm();
    let mut state = NonmonotoneState::new(f, opts.nonmonotone);
    let mut mem = BbMemory::default();
    let mut trace = Vec::new();
    let mut k = 0;
    let status = loop {
        if gn <= tol {
            break Status::Converged;
        }
        if !(f.is_finite() && gn.is_finite()) {
            break Status::NumericalFailure;
        }
        if k >= max_iter {
            break Status::MaxIters;
        }
        let fallback = if k == 0 { opts.initial_step / gn } else { 1.0 / gn };
        let quotient = BbQuotient::for_iteration(opts.bb_variant, k);
        let gamma = mem.step(quotient, fallback, opts.gamma_min, opts.gamma_max);
        let eta = -&rgrad;
        let ls = match nonmonotone_armijo(
            m,
            obj,
            &x,
            &rgrad,
            &eta,
            gamma,
            opts.ls_rho,
            opts.ls_delta,
            &mut state,
            opts.backtrack_cap,
        ) {
            Ok(ls) => ls,
            Err(Error::LineSearchFailure { .. }) => break Status::LineSearchFailure,
            Err(e) => return Err(e),
        };
        let rgrad_next = m.proj(&ls.x, &obj.euclid_grad(&ls.x));
        mem.record(&ls.x - &x, &rgrad_next - &rgrad);
        x = ls.x;
        f = ls.f;
        rgrad = rgrad_next;
        gn = rgrad.norm();
        if record {
            trace.push(IterRecord {
                k,
                f,
                grad_norm: gn,
                step: Some(ls.t),
                accepted: true,
                inner_iters: ls.backtracks,
                ref_value: Some(state.reference()),
                ref_weight: Some(state.weight()),
                armijo_margin: Some(ls.margin),
                ..Default::default()
            });
        }
        k += 1;
    };
    Ok(GbbRun {
        x,
        f,
        grad_norm: gn,
        iters: k,
        status,
        trace,
    })
}

/// Gradient run used to improve the starting point of the second-order
/// solvers. Returns the new point and the number of iterations spent.
pub fn warm_start<M, O>(m: &M, obj: &O, x0: &Mat, opts: &SolverOptions) -> Result<(Mat, usize)>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    match opts.warm_start {
        None => Ok((x0.clone(), 0)),
        Some(ws) => {
            let (f, g) = obj.eval_grad(x0);
            let run = gbb_loop(m, obj, x0.clone(), f, g, opts, ws.grad_tol, ws.max_iter, false)?;
            Ok((run.x, run.iters))
        }
    }
}

/// Riemannian gradient method with BB steps and nonmonotone Armijo search.
pub fn solve_gbb<M, O>(m: &M, obj: &O, x0: &Mat, opts: &SolverOptions) -> Result<SolverReport>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    prepare(m, obj, x0, opts)?;
    let start = Instant::now();
    let (f0, g0) = obj.eval_grad(x0);
    let gn0 = m.proj(x0, &g0).norm();
    let mut builder = ReportBuilder::new("GBB", start, x0, f0, gn0);
    let run = gbb_loop(m, obj, x0.clone(), f0, g0, opts, opts.grad_tol, opts.gbb_max_iter, true)?;
    for r in run.trace {
        builder.push(r);
    }
    Ok(builder.finish(run.status, run.x, run.f, run.grad_norm))
}

/// One projected Adagrad update; `acc` accumulates squared gradients.
pub fn adagrad_step<M: Manifold + ?Sized>(
    m: &M,
    x: &Mat,
    rgrad: &Mat,
    acc: &mut Mat,
    lr: f64,
    eps: f64,
) -> Result<Mat> {
    acc.zip_apply(rgrad, |a, g| *a += g * g);
    if rgrad.iter().all(|g| *g == 0.0) {
        return Ok(x.clone());
    }
    let mut y = x.clone();
    for ((yi, gi), ai) in y.iter_mut().zip(rgrad.iter()).zip(acc.iter()) {
        *yi -= lr * gi / (ai + eps).sqrt();
    }
    m.project_point(&y)
}

/// Elementwise-scaled gradient steps followed by metric projection.
pub fn solve_adagrad<M, O>(m: &M, obj: &O, x0: &Mat, lr: f64, eps: f64, opts: &SolverOptions) -> Result<SolverReport>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    prepare(m, obj, x0, opts)?;
    if !(lr > 0.0 && eps > 0.0) {
        return Err(Error::InvalidOptions("Adagrad needs positive lr and eps".into()));
    }
    let start = Instant::now();
    let mut x = x0.clone();
    let (mut f, g) = obj.eval_grad(&x);
    let mut rgrad = m.proj(&x, &g);
    let mut gn = rgrad.norm();
    let mut builder = ReportBuilder::new("Adagrad", start, &x, f, gn);
    let mut acc = Mat::zeros(x.nrows(), x.ncols());
    let mut k = 0;
    let status = loop {
        if gn <= opts.grad_tol {
            break Status::Converged;
        }
        if !(f.is_finite() && gn.is_finite()) {
            break Status::NumericalFailure;
        }
        if k >= opts.gbb_max_iter {
            break Status::MaxIters;
        }
        x = match adagrad_step(m, &x, &rgrad, &mut acc, lr, eps) {
            Ok(y) => y,
            Err(Error::DegenerateRetraction { .. }) => break Status::NumericalFailure,
            Err(e) => return Err(e),
        };
        let (fx, g) = obj.eval_grad(&x);
        f = fx;
        rgrad = m.proj(&x, &g);
        gn = rgrad.norm();
        builder.push(IterRecord {
            k,
            f,
            grad_norm: gn,
            step: Some(lr),
            accepted: true,
            ..Default::default()
        });
        k += 1;
    };
    Ok(builder.finish(status, x, f, gn))
}
