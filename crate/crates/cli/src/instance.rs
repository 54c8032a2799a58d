use std::sync::Arc;

use arnt::problems::{bec, mtx, ncm, nleig};
use arnt::problems::{BecProblem, DenseSymmetric, NearestCorrelationProblem, NonlinearEigenProblem, Potential};
use arnt::problems::{RayleighProblem, SymmetricOperator, Tridiagonal, Weights};
use arnt::solvers::solve_gbb;
use arnt::{EuclideanManifold, Manifold, Mat, Objective, ObliqueManifold, SolverOptions, SphereManifold, StiefelManifold};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{InstanceSpec, NcmWeights, PotentialKind, RayleighManifold, Spectrum};

pub type SharedObjective = Box<dyn Objective + Send + Sync>;

/// A problem ready to solve: manifold, objective and starting point.
pub struct Instance {
    pub manifold: Box<dyn Manifold>,
    pub objective: SharedObjective,
    pub x0: Mat,
    /// GBB iterations spent on coarse meshes before `x0` (BEC only).
    pub setup_iters: usize,
}

fn rng(seed: Option<u64>) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.unwrap_or(0))
}

/// Build the instance described by `spec`. `opts` supplies the stopping rule
/// for any coarse-mesh solves.
pub fn build(spec: &InstanceSpec, opts: &SolverOptions) -> arnt::Result<Instance> {
    match spec {
        InstanceSpec::Rayleigh {
            n,
            p,
            manifold,
            spectrum,
            seed,
        } => {
            let mut rng = rng(*seed);
            let op: Arc<dyn SymmetricOperator> = match spectrum {
                Spectrum::Linear => Arc::new(DenseSymmetric::diagonal(&(1..=*n).map(|i| i as f64).collect::<Vec<_>>())),
                Spectrum::Random => {
                    let b = arnt::mat::gaussian(&mut rng, *n, *n);
                    Arc::new(DenseSymmetric::new((&b + b.transpose()) * 0.5)?)
                }
                Spectrum::Laplacian => Arc::new(Tridiagonal::laplacian(*n)),
            };
            let manifold: Box<dyn Manifold> = match manifold {
                RayleighManifold::Sphere => Box::new(SphereManifold::new(*n)),
                RayleighManifold::Stiefel => Box::new(StiefelManifold::new(*n, *p)),
                RayleighManifold::Euclidean => Box::new(EuclideanManifold::new(*n, *p)),
            };
            let x0 = manifold.random_point(&mut rng);
            Ok(Instance {
                manifold,
                objective: Box::new(RayleighProblem::new(op, *p)),
                x0,
                setup_iters: 0,
            })
        }
        InstanceSpec::Ncm {
            n,
            p,
            weights,
            c_path,
            seed,
        } => {
            let c = match c_path {
                Some(path) => mtx::read_matrix_market(path)?,
                None => ncm::ex1_target(n.expect("validated: n or c_path")),
            };
            let size = c.nrows();
            if n.is_some_and(|n| n != size) {
                return Err(arnt::Error::InvalidProblem(format!("n = {} but the target matrix is {size} × {size}", n.unwrap())));
            }
            let mut rng = rng(*seed);
            let w = match weights {
                NcmWeights::Ones => Weights::Ones,
                NcmWeights::Random { outliers } => Weights::Matrix(ncm::ex1_weights(&mut rng, size, *outliers)),
                NcmWeights::File { path } => Weights::Matrix(mtx::read_matrix_market(path)?),
            };
            let x0 = ncm::initial_point(&mut rng, *p, size);
            Ok(Instance {
                manifold: Box::new(ObliqueManifold::new(*p, size)),
                objective: Box::new(NearestCorrelationProblem::new(c, w, *p)?),
                x0,
                setup_iters: 0,
            })
        }
        InstanceSpec::Nleig { n, p, alpha, seed } => {
            let x0 = nleig::initial_point(&mut rng(*seed), *n, *p);
            Ok(Instance {
                manifold: Box::new(StiefelManifold::new(*n, *p)),
                objective: Box::new(NonlinearEigenProblem::new(*n, *p, *alpha)?),
                x0,
                setup_iters: 0,
            })
        }
        InstanceSpec::Bec {
            mesh,
            beta,
            potential,
            coarse,
            coarse_tol,
        } => {
            let kind = match potential {
                PotentialKind::V1 => Potential::V1,
                PotentialKind::V2 => Potential::V2,
            };
            let coarse_opts = SolverOptions {
                grad_tol: *coarse_tol,
                ..opts.clone()
            };
            let mut levels = coarse.iter().copied();
            let (x0, setup_iters) = match levels.next() {
                None => (bec::gaussian_initial(*mesh), 0),
                Some(first) => {
                    let mut x = bec::gaussian_initial(first);
                    let mut iters = 0;
                    let mut m = first;
                    for next in levels.chain(std::iter::once(*mesh)) {
                        let prob = BecProblem::on_grid(kind, m, *beta)?;
                        let r = solve_gbb(&SphereManifold::new(m * m), &prob, &x, &coarse_opts)?;
                        iters += r.outer_iters;
                        x = bec::refine(&r.x, m, next)?;
                        m = next;
                    }
                    (x, iters)
                }
            };
            Ok(Instance {
                manifold: Box::new(SphereManifold::new(mesh * mesh)),
                objective: Box::new(BecProblem::on_grid(kind, *mesh, *beta)?),
                x0,
                setup_iters,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starting_points_are_feasible_and_seeded() {
        let specs = [
            InstanceSpec::Rayleigh {
                n: 8,
                p: 3,
                manifold: RayleighManifold::Stiefel,
                spectrum: Spectrum::Random,
                seed: Some(4),
            },
            InstanceSpec::Ncm {
                n: Some(12),
                p: 3,
                weights: NcmWeights::Random { outliers: 5 },
                c_path: None,
                seed: Some(4),
            },
            InstanceSpec::Nleig {
                n: 20,
                p: 2,
                alpha: 1.0,
                seed: Some(4),
            },
            InstanceSpec::Bec {
                mesh: 17,
                beta: 10.0,
                potential: PotentialKind::V1,
                coarse: vec![9],
                coarse_tol: 1e-3,
            },
        ];
        for spec in &specs {
            let a = build(spec, &SolverOptions::default()).unwrap();
            let b = build(spec, &SolverOptions::default()).unwrap();
            assert_eq!(a.x0, b.x0);
            assert!(a.manifold.check_point(&a.x0).is_ok(), "{spec:?}");
            assert_eq!(a.objective.shape(), a.manifold.shape());
        }
    }

    #[test]
    fn ncm_size_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.mtx");
        std::fs::write(&path, "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n").unwrap();
        let spec = InstanceSpec::Ncm {
            n: Some(3),
            p: 1,
            weights: NcmWeights::Ones,
            c_path: Some(path),
            seed: Some(1),
        };
        assert!(build(&spec, &SolverOptions::default()).is_err());
    }
}
