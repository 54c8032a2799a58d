use std::time::Instant;

use super::cg::{combine_direction, modified_cg, CgOutcome, CgParams};
use super::gbb::{gbb_loop, warm_start};
use super::model::ModelState;
use super::{prepare, reduction_ratio};
use crate::diagnostics::{certify_descent_angle, DescentCertificate};
use crate::error::{Error, Result};
use crate::manifolds::Manifold;
use crate::mat::{fingerprint, inner, Mat};
use crate::objective::Objective;
use crate::options::SolverOptions;
use crate::report::{IterRecord, ReportBuilder, SolverReport, Status};

/// Result of the curvilinear backtracking on the model.
#[derive(Debug, Clone)]
pub struct ModelStep {
    pub alpha: f64,
    pub z: Mat,
    pub model_value: f64,
    pub backtracks: usize,
}

/// `α = α₀δʰ` with the smallest `h` such that
/// `m(R_x(αξ)) ≤ ρα⟨grad m(x), ξ⟩`. The model is evaluated on the
/// retraction displacement rather than on the rounded trial point.
pub fn model_armijo<M: Manifold + ?Sized>(
    ms: &ModelState<'_, M>,
    xi: &Mat,
    alpha0: f64,
    rho: f64,
    delta: f64,
    cap: usize,
) -> Result<ModelStep> {
    let slope = inner(ms.rgrad(), xi);
    if !(slope < 0.0) {
        return Err(Error::Contract(format!(
            "model search direction is not a descent direction (slope {slope:e})"
        )));
    }
    let mut alpha = alpha0;
    for h in 0..=cap {
        let step = xi * alpha;
        let d = ms.manifold().retraction_displacement(ms.anchor(), &step)?;
        let value = ms.model_at_displacement(&d);
        if value <= rho * alpha * slope {
            return Ok(ModelStep {
                alpha,
                z: ms.manifold().retr(ms.anchor(), &step)?,
                model_value: value,
                backtracks: h,
            });
        }
        alpha *= delta;
    }
    Err(Error::LineSearchFailure { backtracks: cap })
}

/// Regularization update from the reduction ratio: shrink on very
/// successful steps, keep on successful ones, grow otherwise (including NaN).
pub fn sigma_hat_update(sigma_hat: f64, rho: f64, opts: &SolverOptions) -> f64 {
    if rho >= opts.eta2 {
        sigma_hat * opts.gamma0
    } else if rho >= opts.eta1 {
        sigma_hat * opts.gamma1
    } else {
        sigma_hat * opts.gamma2
    }
}

/// Raise `σ̂` so that `σ̂ ‖grad‖ ≥ σ_est + margin` after negative curvature.
pub fn sigma_hat_reset(sigma_hat: f64, sigma_est: Option<f64>, grad_norm: f64, margin: f64) -> f64 {
    match sigma_est {
        Some(est) => sigma_hat.max((est + margin) / grad_norm),
        None => sigma_hat,
    }
}

/// One Newton-CG subproblem solve as seen by an observer.
pub struct InnerSolve<'s> {
    pub outer: usize,
    /// Riemannian gradient of the model at the anchor.
    pub grad: &'s Mat,
    pub xi: &'s Mat,
    pub cg: &'s CgOutcome,
    /// Model Hessian action on the tangent space.
    pub hess: &'s dyn Fn(&Mat) -> Mat,
    pub eps: f64,
    pub ambient_dim: usize,
}

impl InnerSolve<'_> {
    pub fn certify(&self) -> DescentCertificate {
        certify_descent_angle(self.hess, self.grad, self.xi, self.eps, self.ambient_dim)
    }
}

type Observer<'o> = &'o mut dyn for<'s> FnMut(&InnerSolve<'s>);

enum InnerMethod<'o> {
    NewtonCg(Option<Observer<'o>>),
    Gbb { abs_tol: f64 },
}

struct Trial {
    z: Mat,
    model_value: f64,
    step: Option<f64>,
    inner_iters: usize,
    sigma_est: Option<f64>,
    negative_curvature: bool,
    descent_cos: Option<f64>,
}

enum InnerResult {
    Trial(Trial),
    Stop(Status),
}

#[allow(clippy::too_many_arguments)]
fn newton_cg_trial<M: Manifold + ?Sized>(
    ms: &ModelState<'_, M>,
    grad_norm: f64,
    k: usize,
    opts: &SolverOptions,
    observer: &mut Option<Observer<'_>>,
) -> Result<InnerResult> {
    let m = ms.manifold();
    let params = CgParams {
        eps: opts.cg_eps,
        theta: opts.cg_theta,
        t: opts.cg_t,
        rule: opts.cg_rule,
        max_iter: opts.inner_cap.cap(grad_norm).min(m.dim()).max(1),
        record: false,
    };
    let hv = |v: &Mat| ms.hess_vec(v);
    let cg = modified_cg(&hv, ms.rgrad(), &params)?;
    // CG recurrences drift off the tangent space at rounding level.
    let xi = match combine_direction(&cg, ms.rgrad()) {
        Ok(xi) => m.proj(ms.anchor(), &xi),
        Err(Error::Numerical(_)) => return Ok(InnerResult::Stop(Status::NumericalFailure)),
        Err(e) => return Err(e),
    };
    let slope = inner(ms.rgrad(), &xi);
    if let Some(obs) = observer.as_mut() {
        let (r, c) = m.shape();
        obs(&InnerSolve {
            outer: k,
            grad: ms.rgrad(),
            xi: &xi,
            cg: &cg,
            hess: &hv,
            eps: opts.cg_eps,
            ambient_dim: r * c,
        });
    }
    let step = match model_armijo(ms, &xi, opts.alpha0, opts.ls_rho, opts.ls_delta, opts.backtrack_cap) {
        Ok(s) => s,
        Err(Error::LineSearchFailure { .. }) | Err(Error::Contract(_)) => {
            return Ok(InnerResult::Stop(Status::LineSearchFailure))
        }
        Err(e) => return Err(e),
    };
    Ok(InnerResult::Trial(Trial {
        z: step.z,
        model_value: step.model_value,
        step: Some(step.alpha),
        inner_iters: cg.inner_iters,
        sigma_est: cg.sigma_est,
        negative_curvature: cg.d.is_some(),
        descent_cos: Some(slope / (grad_norm * xi.norm())),
    }))
}

/// Gradient-method solve of the model subproblem used by TRQH.
pub struct ModelGbbSolve {
    pub z: Mat,
    pub model_value: f64,
    pub iters: usize,
    pub status: Status,
}

pub fn trqh_inner<M: Manifold + ?Sized>(
    ms: &ModelState<'_, M>,
    tol: f64,
    max_iter: usize,
    opts: &SolverOptions,
) -> Result<ModelGbbSolve> {
    let m = ms.manifold();
    let run = gbb_loop(m, ms, ms.anchor().clone(), 0.0, ms.egrad().clone(), opts, tol, max_iter, false)?;
    Ok(ModelGbbSolve {
        z: run.x,
        model_value: run.f,
        iters: run.iters,
        status: run.status,
    })
}

fn gbb_trial<M: Manifold + ?Sized>(
    ms: &ModelState<'_, M>,
    grad_norm: f64,
    abs_tol: f64,
    opts: &SolverOptions,
) -> Result<InnerResult> {
    let tol = (opts.trqh_inner_rel_tol * grad_norm).min(abs_tol);
    let run = trqh_inner(ms, tol, opts.trqh_inner_max_iter, opts)?;
    if run.iters == 0 {
        return Ok(InnerResult::Stop(match run.status {
            Status::NumericalFailure => Status::NumericalFailure,
            _ => Status::LineSearchFailure,
        }));
    }
    Ok(InnerResult::Trial(Trial {
        z: run.z,
        model_value: run.model_value,
        step: None,
        inner_iters: run.iters,
        sigma_est: None,
        negative_curvature: false,
        descent_cos: None,
    }))
}

fn regularized_newton<M, O>(
    name: &'static str,
    m: &M,
    obj: &O,
    x0: &Mat,
    opts: &SolverOptions,
    mut method: InnerMethod<'_>,
) -> Result<SolverReport>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    prepare(m, obj, x0, opts)?;
    let start = Instant::now();
    let (mut x, ws_iters) = warm_start(m, obj, x0, opts)?;
    let (mut f, mut egrad) = obj.eval_grad(&x);
    let mut gn = m.proj(&x, &egrad).norm();
    let mut builder = ReportBuilder::new(name, start, &x, f, gn).warm_start_iters(ws_iters);
    if let InnerMethod::Gbb { abs_tol } = &mut method {
        *abs_tol *= gn;
    }
    let mut sigma_hat = opts.sigma_hat0;
    let mut model: Option<ModelState<'_, M>> = None;
    let mut k = 0;
    let status = loop {
        if gn <= opts.grad_tol {
            break Status::Converged;
        }
        if !(f.is_finite() && gn.is_finite()) {
            break Status::NumericalFailure;
        }
        if k >= opts.max_outer {
            break Status::MaxIters;
        }
        let sigma = sigma_hat * gn;
        if !(sigma.is_finite() && sigma > 0.0) {
            break Status::NumericalFailure;
        }
        let ms = model.get_or_insert_with(|| ModelState::new(m, obj, &x, egrad.clone(), sigma));
        ms.set_sigma(sigma);

        let inner_result = match &mut method {
            InnerMethod::NewtonCg(observer) => newton_cg_trial(ms, gn, k, opts, observer)?,
            InnerMethod::Gbb { abs_tol } => gbb_trial(ms, gn, *abs_tol, opts)?,
        };
        let trial = match inner_result {
            InnerResult::Trial(t) => t,
            InnerResult::Stop(s) => break s,
        };
        if !(trial.model_value < 0.0) {
            break Status::NumericalFailure;
        }

        let fz = obj.eval(&trial.z);
        let rho = reduction_ratio(f, fz, trial.model_value, opts.ratio_guard);
        let accepted = rho >= opts.eta1;
        let mut sigma_hat_next = sigma_hat_update(sigma_hat, rho, opts);
        if accepted {
            let (fz2, g) = obj.eval_grad(&trial.z);
            x = trial.z;
            f = fz2;
            egrad = g;
            gn = m.proj(&x, &egrad).norm();
            model = None;
        }
        sigma_hat_next = sigma_hat_reset(sigma_hat_next, trial.sigma_est, gn, opts.sigma_margin);
        builder.push(IterRecord {
            k,
            f,
            grad_norm: gn,
            sigma: Some(sigma),
            sigma_hat: Some(sigma_hat),
            sigma_hat_next: Some(sigma_hat_next),
            step: trial.step,
            rho: Some(rho),
            accepted,
            inner_iters: trial.inner_iters,
            negative_curvature: trial.negative_curvature,
            sigma_est: trial.sigma_est,
            descent_cos: trial.descent_cos,
            fingerprint: Some(fingerprint(&x)),
            ..Default::default()
        });
        sigma_hat = sigma_hat_next;
        k += 1;
    };
    Ok(builder.finish(status, x, f, gn))
}

/// Adaptive regularized Newton method with a GBB warm start.
pub fn solve_arnt<M, O>(m: &M, obj: &O, x0: &Mat, opts: &SolverOptions) -> Result<SolverReport>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    regularized_newton("ARNT", m, obj, x0, opts, InnerMethod::NewtonCg(None))
}

/// [`solve_arnt`], calling `observer` after every subproblem solve.
pub fn solve_arnt_observed<M, O>(
    m: &M,
    obj: &O,
    x0: &Mat,
    opts: &SolverOptions,
    observer: &mut dyn FnMut(&InnerSolve<'_>),
) -> Result<SolverReport>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    regularized_newton("ARNT", m, obj, x0, opts, InnerMethod::NewtonCg(Some(observer)))
}

/// ARNT with the subproblem solved by the gradient method instead of
/// Newton-CG.
pub fn solve_trqh<M, O>(m: &M, obj: &O, x0: &Mat, opts: &SolverOptions) -> Result<SolverReport>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    regularized_newton(
        "TRQH",
        m,
        obj,
        x0,
        opts,
        InnerMethod::Gbb {
            abs_tol: opts.trqh_inner_abs_factor,
        },
    )
}
