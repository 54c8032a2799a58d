use std::time::Instant;

use super::gbb::warm_start;
use super::{prepare, reduction_ratio};
use crate::error::Result;
use crate::manifolds::Manifold;
use crate::mat::{fingerprint, inner, Mat};
use crate::objective::Objective;
use crate::options::SolverOptions;
use crate::report::{IterRecord, ReportBuilder, SolverReport, Status};

/// Extra residual rule `‖r‖ ≤ min(c, c‖r₀‖)` used alongside the usual one.
const EXTRA_RESIDUAL: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct TcgOutcome {
    pub eta: Mat,
    /// `⟨g, η⟩ + ½⟨η, Hη⟩`.
    pub model_value: f64,
    pub hit_boundary: bool,
    pub inner_iters: usize,
}

fn to_boundary(eta: &Mat, p: &Mat, radius: f64) -> f64 {
    let a = inner(p, p);
    let b = 2.0 * inner(eta, p);
    let c = inner(eta, eta) - radius * radius;
    let disc = (b * b - 4.0 * a * c).max(0.0);
    (-b + disc.sqrt()) / (2.0 * a)
}

/// Steihaug-Toint truncated CG for `min ⟨g,η⟩ + ½⟨η,Hη⟩` over `‖η‖ ≤ Δ`.
pub fn truncated_cg(
    hess: &dyn Fn(&Mat) -> Mat,
    grad: &Mat,
    radius: f64,
    kappa: f64,
    theta: f64,
    max_iter: usize,
) -> TcgOutcome {
    let r0n = grad.norm();
    let stop = (r0n * r0n.powf(theta).min(kappa)).max(EXTRA_RESIDUAL.min(EXTRA_RESIDUAL * r0n));
    let mut eta = Mat::zeros(grad.nrows(), grad.ncols());
    let mut h_eta = eta.clone();
    let mut r = grad.clone();
    let mut p = -grad;
    let mut rr = r0n * r0n;
    let value = |eta: &Mat, h_eta: &Mat| inner(grad, eta) + 0.5 * inner(eta, h_eta);

    for j in 0..max_iter.max(1) {
        let hp = hess(&p);
        let pi = inner(&p, &hp);
        let alpha = rr / pi;
        let next_norm = if pi > 0.0 { (&eta + &p * alpha).norm() } else { f64::INFINITY };
        if !(pi > 0.0) || next_norm >= radius {
            let tau = to_boundary(&eta, &p, radius);
            eta.zip_apply(&p, |e, pk| *e += tau * pk);
            h_eta.zip_apply(&hp, |e, hk| *e += tau * hk);
            return TcgOutcome {
                model_value: value(&eta, &h_eta),
                eta,
                hit_boundary: true,
                inner_iters: j + 1,
            };
        }
        eta.zip_apply(&p, |e, pk| *e += alpha * pk);
        h_eta.zip_apply(&hp, |e, hk| *e += alpha * hk);
        r.zip_apply(&hp, |rk, hk| *rk += alpha * hk);
        let rr_next = inner(&r, &r);
        if rr_next.sqrt() <= stop || j + 1 == max_iter.max(1) {
            return TcgOutcome {
                model_value: value(&eta, &h_eta),
                eta,
                hit_boundary: false,
                inner_iters: j + 1,
            };
        }
        let beta = rr_next / rr;
        p.zip_apply(&r, |pk, rk| *pk = beta * *pk - rk);
        rr = rr_next;
    }
    unreachable!("loop returns on its last iteration")
}

/// Shrink by ¼ on failure; double (up to `tr_radius_max`) on very successful
/// steps that reached the boundary.
pub fn update_radius(radius: f64, rho: f64, hit_boundary: bool, opts: &SolverOptions) -> f64 {
    if !(rho >= opts.eta1) {
        radius * 0.25
    } else if rho >= opts.eta2 && hit_boundary {
        (2.0 * radius).min(opts.tr_radius_max)
    } else {
        radius
    }
}

/// Riemannian trust-region method with truncated CG.
pub fn solve_rtr<M, O>(m: &M, obj: &O, x0: &Mat, opts: &SolverOptions) -> Result<SolverReport>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    prepare(m, obj, x0, opts)?;
    let start = Instant::now();
    let (mut x, ws_iters) = warm_start(m, obj, x0, opts)?;
    let (mut f, mut egrad) = obj.eval_grad(&x);
    let mut rgrad = m.proj(&x, &egrad);
    let mut gn = rgrad.norm();
    let mut builder = ReportBuilder::new("RTR", start, &x, f, gn).warm_start_iters(ws_iters);
    let mut radius = opts.tr_radius0;
    let mut hess = obj.hessian_at(&x);
    let mut normal = &egrad - &rgrad;
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
        let hv = |v: &Mat| {
            let v = m.proj(&x, v);
            m.hess_with_normal(&x, &hess(&v), &normal, &v, 0.0)
        };
        let tcg = truncated_cg(&hv, &rgrad, radius, opts.rtr_kappa, opts.rtr_theta, m.dim());
        let z = m.retr(&x, &tcg.eta)?;
        let fz = obj.eval(&z);
        let rho = reduction_ratio(f, fz, tcg.model_value, opts.ratio_guard);
        let accepted = rho >= opts.eta1 && tcg.model_value < 0.0;
        let radius_used = radius;
        radius = update_radius(radius, rho, tcg.hit_boundary, opts);
        if accepted {
            let (fz2, g) = obj.eval_grad(&z);
            x = z;
            f = fz2;
            egrad = g;
            rgrad = m.proj(&x, &egrad);
            gn = rgrad.norm();
            normal = &egrad - &rgrad;
            hess = obj.hessian_at(&x);
        }
        builder.push(IterRecord {
            k,
            f,
            grad_norm: gn,
            rho: Some(rho),
            accepted,
            inner_iters: tcg.inner_iters,
            radius: Some(radius_used),
            fingerprint: Some(fingerprint(&x)),
            ..Default::default()
        });
        k += 1;
    };
    Ok(builder.finish(status, x, f, gn))
}
