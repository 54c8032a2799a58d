use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which Barzilai-Borwein quotient seeds the line search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BbVariant {
    /// `⟨s,s⟩/|⟨s,v⟩|` on even iterations, `|⟨s,v⟩|/⟨v,v⟩` on odd ones.
    Alternate,
    Long,
    Short,
}

/// Residual test of the modified CG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CgResidualRule {
    /// `‖r‖ ≤ ‖r₀‖ · min(‖r₀‖^θ, T)`.
    Relative,
    /// `‖r‖ ≤ min(‖r₀‖^θ, T)`.
    Absolute,
}

/// Gradient-method warm start run before the second-order solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarmStart {
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for WarmStart {
    fn default() -> Self {
        Self {
            grad_tol: 1e-3,
            max_iter: 2000,
        }
    }
}

/// Inner iteration cap of the Newton-CG solver as a function of `‖grad f‖`:
/// `clamp(⌈scale · (−log₁₀ max(‖g‖, 1e-12))⌉, min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerCap {
    pub scale: f64,
    pub min: usize,
    pub max: usize,
}

impl Default for InnerCap {
    fn default() -> Self {
        Self {
            scale: 10.0,
            min: 30,
            max: 500,
        }
    }
}

impl InnerCap {
    pub fn cap(&self, grad_norm: f64) -> usize {
        let digits = -grad_norm.max(1e-12).log10();
        let raw = (self.scale * digits).ceil();
        let raw = if raw.is_finite() && raw > 0.0 { raw as usize } else { 0 };
        raw.clamp(self.min, self.max)
    }
}

/// Options shared by every solver. Each solver reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Stop once `‖grad f(x_k)‖ ≤ grad_tol`.
    pub grad_tol: f64,
    /// Outer iteration cap for ARNT, TRQH and RTR.
    pub max_outer: usize,
    /// Iteration cap for the stand-alone gradient methods.
    pub gbb_max_iter: usize,

    /// Armijo sufficient-decrease constant.
    pub ls_rho: f64,
    /// Backtracking factor.
    pub ls_delta: f64,
    /// Nonmonotone averaging weight; 0 gives the monotone rule.
    pub nonmonotone: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub bb_variant: BbVariant,
    /// Step used before any secant pair exists, divided by `‖grad f(x₀)‖`.
    pub initial_step: f64,
    pub backtrack_cap: usize,

    /// Acceptance and very-successful ratio thresholds.
    pub eta1: f64,
    pub eta2: f64,
    /// Regularization multipliers for very successful, successful and failed steps.
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Initial scale-free regularization `σ̂₀`; `σ_k = σ̂_k ‖grad f(x_k)‖`.
    pub sigma_hat0: f64,
    /// Margin added to the negative-curvature estimate when resetting σ.
    pub sigma_margin: f64,

    /// Curvature threshold of the modified CG.
    pub cg_eps: f64,
    /// Residual exponent θ and cap T of the CG stopping test.
    pub cg_theta: f64,
    pub cg_t: f64,
    pub cg_rule: CgResidualRule,
    pub inner_cap: InnerCap,
    /// Initial model line-search step.
    pub alpha0: f64,

    pub warm_start: Option<WarmStart>,

    /// Rounding guard added to both sides of reduction ratios, in units of
    /// `max(1, |f|) · ε_mach`.
    pub ratio_guard: f64,

    pub tr_radius0: f64,
    pub tr_radius_max: f64,
    /// Truncated-CG residual constants for RTR.
    pub rtr_kappa: f64,
    pub rtr_theta: f64,

    /// Inner gradient-method caps for TRQH.
    pub trqh_inner_max_iter: usize,
    pub trqh_inner_rel_tol: f64,
    pub trqh_inner_abs_factor: f64,

    pub adagrad_lr: f64,
    pub adagrad_eps: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-6,
            max_outer: 500,
            gbb_max_iter: 10_000,
            ls_rho: 1e-4,
            ls_delta: 0.2,
            nonmonotone: 0.85,
            gamma_min: 1e-10,
            gamma_max: 1e10,
            bb_variant: BbVariant::Alternate,
            initial_step: 1e-2,
            backtrack_cap: 50,
            eta1: 0.01,
            eta2: 0.9,
            gamma0: 0.2,
            gamma1: 1.0,
            gamma2: 10.0,
            sigma_hat0: 10.0,
            sigma_margin: 1e-2,
            cg_eps: 1e-10,
            cg_theta: 1.0,
            cg_t: 0.1,
            cg_rule: CgResidualRule::Relative,
            inner_cap: InnerCap::default(),
            alpha0: 1.0,
            warm_start: Some(WarmStart::default()),
            ratio_guard: 1e3,
            tr_radius0: 1.0,
            tr_radius_max: 1e3,
            rtr_kappa: 0.1,
            rtr_theta: 1.0,
            trqh_inner_max_iter: 100,
            trqh_inner_rel_tol: 0.1,
            trqh_inner_abs_factor: 1e-4,
            adagrad_lr: 0.1,
            adagrad_eps: 1e-8,
        }
    }
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidOptions(format!("{name} = {v} must lie in (0, 1)")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidOptions(format!("{name} = {v} must be positive")))
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        positive("grad_tol", self.grad_tol)?;
        open_unit("ls_rho", self.ls_rho)?;
        open_unit("ls_delta", self.ls_delta)?;
        if !(0.0..1.0).contains(&self.nonmonotone) {
            return Err(Error::InvalidOptions(format!(
                "nonmonotone = {} must lie in [0, 1)",
                self.nonmonotone
            )));
        }
        if !(self.gamma_min >= 0.0 && self.gamma_min <= 1.0 && self.gamma_max >= 1.0) {
            return Err(Error::InvalidOptions(
                "need 0 ≤ gamma_min ≤ 1 ≤ gamma_max".into(),
            ));
        }
        positive("initial_step", self.initial_step)?;
        if !(self.eta1 > 0.0 && self.eta1 <= self.eta2 && self.eta2 < 1.0) {
            return Err(Error::InvalidOptions("need 0 < eta1 ≤ eta2 < 1".into()));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 < 1.0 && 1.0 <= self.gamma1 && self.gamma1 <= self.gamma2)
        {
            return Err(Error::InvalidOptions(
                "need 0 < gamma0 < 1 ≤ gamma1 ≤ gamma2".into(),
            ));
        }
        positive("sigma_hat0", self.sigma_hat0)?;
        if self.sigma_margin < 0.0 || self.cg_eps < 0.0 {
            return Err(Error::InvalidOptions(
                "sigma_margin and cg_eps must be nonnegative".into(),
            ));
        }
        positive("cg_theta", self.cg_theta)?;
        positive("cg_t", self.cg_t)?;
        if !(self.alpha0 > 0.0 && self.alpha0 <= 1.0) {
            return Err(Error::InvalidOptions("alpha0 must lie in (0, 1]".into()));
        }
        if self.inner_cap.min == 0 || self.inner_cap.min > self.inner_cap.max {
            return Err(Error::InvalidOptions("inner_cap needs 1 ≤ min ≤ max".into()));
        }
        positive("tr_radius0", self.tr_radius0)?;
        if self.tr_radius_max < self.tr_radius0 {
            return Err(Error::InvalidOptions("tr_radius_max < tr_radius0".into()));
        }
        positive("adagrad_lr", self.adagrad_lr)?;
        positive("adagrad_eps", self.adagrad_eps)?;
        if let Some(ws) = &self.warm_start {
            positive("warm_start.grad_tol", ws.grad_tol)?;
        }
        Ok(())
    }
}
