//! Conjugate gradients on the regularized Newton system
//! `Hess m(x)[ξ] = −grad m(x)`, stopped early on small or negative curvature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{inner, Mat};
use crate::options::CgResidualRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CgTermination {
    Residual,
    SmallCurvature,
    NegativeCurvature,
    IterCap,
}

#[derive(Debug, Clone, Copy)]
pub struct CgParams {
    /// Curvature threshold: exit when `⟨p, Hp⟩/⟨p, p⟩ ≤ eps`.
    pub eps: f64,
    pub theta: f64,
    pub t: f64,
    pub rule: CgResidualRule,
    pub max_iter: usize,
    /// Keep every direction, residual and iterate.
    pub record: bool,
}

/// Recurrence history. `eta[i]` and `r[i]` run from `η₀ = 0`, `r₀ = g` up to
/// the last computed iterate; `p`, `hp`, `pi` hold one entry per curvature
/// evaluation and `alpha` one entry per completed CG step.
#[derive(Debug, Clone, Default)]
pub struct CgHistory {
    pub p: Vec<Mat>,
    pub hp: Vec<Mat>,
    pub pi: Vec<f64>,
    pub alpha: Vec<f64>,
    pub eta: Vec<Mat>,
    pub r: Vec<Mat>,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub s: Mat,
    /// Negative-curvature direction, if one was detected after the first step.
    pub d: Option<Mat>,
    /// `⟨d, Hess m[d]⟩` for the returned `d`.
    pub d_curvature: Option<f64>,
    /// `|⟨d, Hd⟩| / ⟨d, d⟩`.
    pub sigma_est: Option<f64>,
    /// Number of Hessian applications.
    pub inner_iters: usize,
    pub termination: CgTermination,
    pub history: Option<CgHistory>,
}

pub fn modified_cg(hess: &dyn Fn(&Mat) -> Mat, grad: &Mat, params: &CgParams) -> Result<CgOutcome> {
    let r0n = grad.norm();
    if !(r0n > 0.0 && r0n.is_finite()) {
        return Err(Error::Contract(format!(
            "modified CG needs a nonzero finite gradient, got norm {r0n}"
        )));
    }
    let target = match params.rule {
        CgResidualRule::Relative => r0n * r0n.powf(params.theta).min(params.t),
        CgResidualRule::Absolute => r0n.powf(params.theta).min(params.t),
    };
    let mut eta = Mat::zeros(grad.nrows(), grad.ncols());
    let mut r = grad.clone();
    let mut p = -grad;
    let mut rr = r0n * r0n;
    let mut hist = params.record.then(|| CgHistory {
        eta: vec![eta.clone()],
        r: vec![r.clone()],
        ..Default::default()
    });
    let cap = params.max_iter.max(1);

    let finish = |s: Mat, d: Option<(Mat, f64, f64)>, iters, termination, history| {
        let (d, d_curvature, sigma_est) = match d {
            Some((d, pi, pp)) => (Some(d), Some(pi), Some(pi.abs() / pp)),
            None => (None, None, None),
        };
        Ok(CgOutcome {
            s,
            d,
            d_curvature,
            sigma_est,
            inner_iters: iters,
            termination,
            history,
        })
    };

    for i in 0..cap {
        let hp = hess(&p);
        let pi = inner(&p, &hp);
        let pp = inner(&p, &p);
        let curvature = pi / pp;
        if let Some(h) = hist.as_mut() {
            h.p.push(p.clone());
            h.hp.push(hp.clone());
            h.pi.push(pi);
        }
        if !(curvature > params.eps) {
            let negative = curvature <= -params.eps;
            let termination = if negative {
                CgTermination::NegativeCurvature
            } else {
                CgTermination::SmallCurvature
            };
            if i == 0 {
                return finish(-grad, None, 1, termination, hist);
            }
            let d = negative.then_some((p, pi, pp));
            return finish(eta, d, i + 1, termination, hist);
        }
        let alpha = rr / pi;
        eta.zip_apply(&p, |e, pj| *e += alpha * pj);
        r.zip_apply(&hp, |rj, hj| *rj += alpha * hj);
        let rr_next = inner(&r, &r);
        if let Some(h) = hist.as_mut() {
            h.alpha.push(alpha);
            h.eta.push(eta.clone());
            h.r.push(r.clone());
        }
        if rr_next.sqrt() <= target {
            return finish(eta, None, i + 1, CgTermination::Residual, hist);
        }
        let beta = rr_next / rr;
        p.zip_apply(&r, |pj, rj| *pj = beta * *pj - rj);
        rr = rr_next;
    }
    finish(eta, None, cap, CgTermination::IterCap, hist)
}

/// `ξ = s + τ d` with `τ = ⟨d, grad⟩ / ⟨d, Hess m[d]⟩`, or `ξ = s` without `d`.
pub fn combine_direction(out: &CgOutcome, grad: &Mat) -> Result<Mat> {
    let xi = match (&out.d, out.d_curvature) {
        (Some(d), Some(pi)) => {
            if !(pi < 0.0) {
                return Err(Error::Contract(format!(
                    "negative-curvature direction has curvature {pi}"
                )));
            }
            let tau = inner(d, grad) / pi;
            &out.s + d * tau
        }
        _ => out.s.clone(),
    };
    if !(xi.norm() > 0.0) {
        return Err(Error::Numerical("combined search direction vanished".into()));
    }
    Ok(xi)
}
