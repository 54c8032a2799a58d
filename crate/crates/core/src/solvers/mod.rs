//! Gradient, regularized Newton and trust-region solvers.

mod arnt;
mod cg;
mod gbb;
mod model;
mod rtr;

pub use arnt::{
    model_armijo, sigma_hat_reset, sigma_hat_update, solve_arnt, solve_arnt_observed, solve_trqh, trqh_inner,
    InnerSolve, ModelGbbSolve, ModelStep,
};
pub use cg::{combine_direction, modified_cg, CgHistory, CgOutcome, CgParams, CgTermination};
pub use gbb::{
    adagrad_step, bb_step, nonmonotone_armijo, solve_adagrad, solve_gbb, warm_start, BbMemory, BbQuotient,
    LineSearchOutcome, NonmonotoneState,
};
pub use model::ModelState;
pub use rtr::{solve_rtr, truncated_cg, update_radius, TcgOutcome};

use crate::error::{Error, Result};
use crate::manifolds::Manifold;
use crate::mat::Mat;
use crate::objective::Objective;
use crate::options::SolverOptions;

fn prepare<M, O>(m: &M, obj: &O, x0: &Mat, opts: &SolverOptions) -> Result<()>
where
    M: Manifold + ?Sized,
    O: Objective + ?Sized,
{
    opts.validate()?;
    if obj.shape() != m.shape() {
        return Err(Error::Dimension {
            expected: m.shape(),
            got: obj.shape(),
        });
    }
    m.check_point(x0)
}

/// Actual over predicted reduction. Both sides are shifted by
/// `guard · ε · max(1, |f(x)|)` so that rounding noise near a minimizer
/// does not masquerade as model failure. `guard = 0` gives the plain ratio.
pub fn reduction_ratio(f_x: f64, f_z: f64, model_value: f64, guard: f64) -> f64 {
    let shift = guard * f64::EPSILON * f_x.abs().max(1.0);
    (f_x - f_z + shift) / (-model_value + shift)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_without_guard_is_plain_quotient() {
        assert_eq!(reduction_ratio(1.0, 0.5, -1.0, 0.0), 0.5);
        assert!(reduction_ratio(1.0, f64::NAN, -1.0, 1e3).is_nan());
    }

    #[test]
    fn guard_tames_rounding_level_reductions() {
        let r = reduction_ratio(1.0, 1.0 + f64::EPSILON, -1e-20, 1e3);
        assert!(r > 0.9);
        assert!(reduction_ratio(1.0, 1.0 + 1e-6, -1e-20, 1e3) < 0.0);
        assert!(reduction_ratio(1.0, 0.5, -0.5, 1e3) == 1.0);
    }
}
