//! Finite-difference derivative checks and certificates for the inner
//! Newton-CG solves.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::manifolds::Manifold;
use crate::mat::{check_shape, inner, unit_gaussian, Mat};
use crate::objective::Objective;
use crate::solvers::CgOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub h: f64,
    pub probes: usize,
    pub tol: f64,
    pub seed: u64,
}

impl FdConfig {
    pub fn gradient() -> Self {
        Self {
            h: 1e-6,
            probes: 10,
            tol: 1e-5,
            seed: 0,
        }
    }

    pub fn hessian() -> Self {
        Self {
            h: 1e-5,
            probes: 10,
            tol: 1e-4,
            seed: 0,
        }
    }
}

/// Symmetry probes pass when `|⟨u,Hv⟩ − ⟨v,Hu⟩| ≤ SYMMETRY_TOL · max(1, |⟨u,Hv⟩|)`.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub kind: String,
    pub euclidean_max_rel_err: f64,
    pub riemannian_max_rel_err: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub symmetry_max_err: Option<f64>,
    pub tolerance: f64,
    pub probes: usize,
    pub passed: bool,
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1e-300)
}

/// Central differences of `f` along random unit directions, in the ambient
/// space and along retraction curves.
pub fn check_gradient<M, O>(obj: &O, m: &M, x: &Mat, cfg: FdConfig) -> Result<DerivativeCheck>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    m.check_point(x)?;
    check_shape(m.shape(), x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (r, c) = m.shape();
    let h = cfg.h;
    let egrad = obj.euclid_grad(x);
    let rgrad = m.proj(x, &egrad);
    let mut e_worst: f64 = 0.0;
    let mut r_worst: f64 = 0.0;
    for _ in 0..cfg.probes {
        let u = unit_gaussian(&mut rng, r, c);
        let fd = (obj.eval(&(x + &u * h)) - obj.eval(&(x - &u * h))) / (2.0 * h);
        e_worst = e_worst.max(rel((fd - inner(&egrad, &u)).abs(), egrad.norm()));

        let xi = m.random_tangent(x, &mut rng);
        let fp = obj.eval(&m.retr(x, &(&xi * h))?);
        let fm = obj.eval(&m.retr(x, &(&xi * -h))?);
        let fd = (fp - fm) / (2.0 * h);
        r_worst = r_worst.max(rel((fd - inner(&rgrad, &xi)).abs(), rgrad.norm().max(egrad.norm() * 1e-3)));
    }
    Ok(DerivativeCheck {
        kind: "gradient".into(),
        euclidean_max_rel_err: e_worst,
        riemannian_max_rel_err: r_worst,
        symmetry_max_err: None,
        tolerance: cfg.tol,
        probes: cfg.probes,
        passed: e_worst <= cfg.tol && r_worst <= cfg.tol,
    })
}

/// Hessian-vector products against central differences of the gradient,
/// both Euclidean and Riemannian, plus a symmetry probe.
pub fn check_hess_vec<M, O>(obj: &O, m: &M, x: &Mat, cfg: FdConfig) -> Result<DerivativeCheck>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    m.check_point(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (r, c) = m.shape();
    let h = cfg.h;
    let hess = obj.hessian_at(x);
    let egrad = obj.euclid_grad(x);
    let normal = m.normal_part(x, &egrad);
    let riem = |v: &Mat| m.hess_with_normal(x, &hess(v), &normal, v, 0.0);
    let rgrad_at = |y: &Mat| m.proj(y, &obj.euclid_grad(y));

    let mut e_worst: f64 = 0.0;
    let mut r_worst: f64 = 0.0;
    let mut sym_worst: f64 = 0.0;
    for _ in 0..cfg.probes {
        let v = unit_gaussian(&mut rng, r, c);
        let hv = hess(&v);
        let fd = (obj.euclid_grad(&(x + &v * h)) - obj.euclid_grad(&(x - &v * h))) / (2.0 * h);
        e_worst = e_worst.max(rel((&fd - &hv).norm(), hv.norm().max(fd.norm())));

        let u = unit_gaussian(&mut rng, r, c);
        let uhv = inner(&u, &hv);
        sym_worst = sym_worst.max((uhv - inner(&v, &hess(&u))).abs() / uhv.abs().max(1.0));

        let xi = m.random_tangent(x, &mut rng);
        let eta = m.random_tangent(x, &mut rng);
        let h_xi = riem(&xi);
        let gp = rgrad_at(&m.retr(x, &(&xi * h))?);
        let gm = rgrad_at(&m.retr(x, &(&xi * -h))?);
        let fd = m.proj(x, &((gp - gm) / (2.0 * h)));
        r_worst = r_worst.max(rel((&fd - &h_xi).norm(), h_xi.norm().max(fd.norm())));
        let a = inner(&eta, &h_xi);
        sym_worst = sym_worst.max((a - inner(&xi, &riem(&eta))).abs() / a.abs().max(1.0));
    }
    Ok(DerivativeCheck {
        kind: "hessian".into(),
        euclidean_max_rel_err: e_worst,
        riemannian_max_rel_err: r_worst,
        symmetry_max_err: Some(sym_worst),
        tolerance: cfg.tol,
        probes: cfg.probes,
        passed: e_worst <= cfg.tol && r_worst <= cfg.tol && sym_worst <= SYMMETRY_TOL,
    })
}

/// Power-iteration estimate of `‖H‖₂` from the starting vector `v0`.
pub fn power_norm(hess: &dyn Fn(&Mat) -> Mat, v0: &Mat, iters: usize, tol: f64) -> f64 {
    let n0 = v0.norm();
    if !(n0 > 0.0) {
        return 0.0;
    }
    let mut v = v0 / n0;
    let mut est = 0.0;
    for _ in 0..iters {
        let w = hess(&v);
        let lam = w.norm();
        if !(lam > 0.0) {
            return 0.0;
        }
        let done = (lam - est).abs() <= tol * lam;
        est = lam;
        v = w / lam;
        if done {
            break;
        }
    }
    est
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentCertificate {
    pub cos_angle: f64,
    pub kappa_hat: f64,
    /// `0.9 · min(ε/2, 1) / (n(κ̂ + 1))`.
    pub lambda_hat: f64,
    pub passed: bool,
}

/// Check `⟨g, ξ⟩ / (‖g‖‖ξ‖) ≤ −λ̂` for an inner solve with model Hessian
/// `hess`, curvature threshold `eps` and ambient dimension `n`.
pub fn certify_descent_angle(
    hess: &dyn Fn(&Mat) -> Mat,
    grad: &Mat,
    xi: &Mat,
    eps: f64,
    n: usize,
) -> DescentCertificate {
    let kappa_hat = power_norm(hess, grad, 50, 1e-6);
    let lambda_hat = 0.9 * (eps / 2.0).min(1.0) / (n as f64 * (kappa_hat + 1.0));
    let cos_angle = inner(grad, xi) / (grad.norm() * xi.norm());
    DescentCertificate {
        cos_angle,
        kappa_hat,
        lambda_hat,
        passed: cos_angle <= -lambda_hat,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgInvariantReport {
    pub steps: usize,
    /// Worst `|⟨p_j, H p_i⟩| / (‖p_i‖‖p_j‖)` over `i < j`.
    pub conjugacy_max: f64,
    /// Worst `|⟨r_j, r_i⟩|` over `i < j`.
    pub residual_orthogonality_max: f64,
    pub model_strictly_decreasing: bool,
    pub norms_strictly_increasing: bool,
    /// `m̃(ξ) < m̃(η_ℓ)` and `‖ξ‖ ≥ ‖η_ℓ‖`, checked only when `d ≠ 0`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub combination_improves: Option<bool>,
    pub passed: bool,
}

/// Conjugacy, residual orthogonality, monotone model values and growing
/// iterate norms along a recorded modified-CG run.
pub fn cg_invariants(out: &CgOutcome, xi: &Mat, grad: &Mat, hess: &dyn Fn(&Mat) -> Mat, tol: f64) -> Option<CgInvariantReport> {
    let hist = out.history.as_ref()?;
    let model = |eta: &Mat| inner(grad, eta) + 0.5 * inner(eta, &hess(eta));
    let steps = hist.alpha.len();
    let mut conj: f64 = 0.0;
    for j in 0..steps {
        for i in 0..j {
            let scale = hist.p[i].norm() * hist.p[j].norm();
            conj = conj.max(inner(&hist.p[j], &hist.hp[i]).abs() / scale);
        }
    }
    let mut orth: f64 = 0.0;
    for j in 0..hist.r.len() {
        for i in 0..j {
            orth = orth.max(inner(&hist.r[j], &hist.r[i]).abs());
        }
    }
    let values: Vec<f64> = hist.eta.iter().map(model).collect();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let increasing = hist.eta.windows(2).all(|w| w[1].norm() > w[0].norm());
    let combination = out.d.as_ref().map(|_| {
        let last = hist.eta.last().expect("history starts with η₀");
        model(xi) < model(last) && xi.norm() >= last.norm()
    });
    let passed = conj <= tol && orth <= tol && decreasing && increasing && combination.unwrap_or(true);
    Some(CgInvariantReport {
        steps,
        conjugacy_max: conj,
        residual_orthogonality_max: orth,
        model_strictly_decreasing: decreasing,
        norms_strictly_increasing: increasing,
        combination_improves: combination,
        passed,
    })
}

/// Absolute tolerance for the projection checks on unit probes.
pub const PROJECTION_TOL: f64 = 1e-12;

/// Agreement between the retraction and its displacement form.
pub const DISPLACEMENT_TOL: f64 = 1e-12;

/// Minimum log-log slope of the retraction rigidity error.
pub const RIGIDITY_SLOPE: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryCheck {
    pub manifold: String,
    pub points: usize,
    pub tangency_max: f64,
    pub idempotence_max: f64,
    pub self_adjoint_max: f64,
    pub linearity_max: f64,
    /// `R_x(0) == x` bit for bit at every probe point.
    pub retract_zero_exact: bool,
    /// Smallest fitted slope of `‖(R_x(tξ) − x)/t − ξ‖` over `t ∈ {1e-3, 1e-4, 1e-5}`;
    /// `None` when the error is at rounding level throughout.
    pub rigidity_min_slope: Option<f64>,
    pub retractions_feasible: bool,
    /// Worst `‖retraction_displacement(x, ξ) − (R_x(ξ) − x)‖` over unit tangents.
    pub displacement_max: f64,
    pub passed: bool,
}

/// Projection, retraction and feasibility properties at `points` random points.
pub fn check_geometry(m: &dyn Manifold, points: usize, seed: u64) -> Result<GeometryCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (r, c) = m.shape();
    let mut tan: f64 = 0.0;
    let mut idem: f64 = 0.0;
    let mut adj: f64 = 0.0;
    let mut lin: f64 = 0.0;
    let mut zero_exact = true;
    let mut slope: Option<f64> = None;
    let mut feasible = true;
    let mut disp: f64 = 0.0;
    for _ in 0..points {
        let x = m.random_point(&mut rng);
        m.check_point(&x)?;
        let u = unit_gaussian(&mut rng, r, c);
        let w = unit_gaussian(&mut rng, r, c);
        let pu = m.project_tangent(&x, &u)?;
        let pw = m.proj(&x, &w);
        tan = tan.max(m.tangency_residual(&x, &pu));
        idem = idem.max((m.proj(&x, &pu) - &pu).norm());
        adj = adj.max((inner(&pu, &w) - inner(&u, &pw)).abs());
        lin = lin.max((m.proj(&x, &(&u * 1.7 + &w)) - (&pu * 1.7 + &pw)).norm());

        zero_exact &= m.retract(&x, &Mat::zeros(r, c))? == x;

        let xi = m.random_tangent(&x, &mut rng);
        let ts = [1e-3, 1e-4, 1e-5];
        let mut errs = [0.0; 3];
        for (e, &t) in errs.iter_mut().zip(&ts) {
            let y = m.retr(&x, &(&xi * t))?;
            *e = ((y - &x) / t - &xi).norm();
        }
        if errs[0] > 1e-12 {
            let s = (errs[0].ln() - errs[2].ln()) / (ts[0].ln() - ts[2].ln());
            slope = Some(slope.map_or(s, |v: f64| v.min(s)));
        }
        let y = m.retr(&x, &xi)?;
        feasible &= m.check_point(&y).is_ok();
        disp = disp.max((m.retraction_displacement(&x, &xi)? - (y - &x)).norm());
    }
    let passed = tan <= PROJECTION_TOL
        && idem <= PROJECTION_TOL
        && adj <= PROJECTION_TOL
        && lin <= PROJECTION_TOL
        && zero_exact
        && slope.is_none_or(|s| s >= RIGIDITY_SLOPE)
        && feasible
        && disp <= DISPLACEMENT_TOL;
    Ok(GeometryCheck {
        manifold: m.name().to_string(),
        points,
        tangency_max: tan,
        idempotence_max: idem,
        self_adjoint_max: adj,
        linearity_max: lin,
        retract_zero_exact: zero_exact,
        rigidity_min_slope: slope,
        retractions_feasible: feasible,
        displacement_max: disp,
        passed,
    })
}
