//! Top of the spectrum of `M_R`, linear solves against `I - M_R`, operator
//! norms of the truncated inverse, and Green's-function partial sums.

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm1, norm2, scale};
use crate::measure::ProbabilityMeasure;
use crate::operator::TruncatedConvolutionOperator;
use crate::scalar::FloatScalar;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;
pub const DEFAULT_CG_TOL: f64 = 1e-10;
pub const DEFAULT_POWER_MAX_ITERS: usize = 200_000;
/// Largest ball for which `inverse_lp_norms` runs one solve per column.
/// Admits the rank-2 free group up to R = 8 (13121 nodes), refuses R = 9.
pub const DEFAULT_INVERSE_BUDGET: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Relative size of the random perturbation added to `delta_e`.
    pub perturbation: f64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: DEFAULT_EIGEN_TOL,
            max_iters: DEFAULT_POWER_MAX_ITERS,
            seed: 0,
            perturbation: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub radius: u32,
    pub ball_size: usize,
    pub lambda_max: f64,
    pub gap: f64,
    pub l2_inv_norm: f64,
    #[serde(rename = "iters")]
    pub iterations: usize,
    /// `||M v - lambda v||_2` for the final unit vector.
    pub residual: f64,
    pub converged: bool,
}

/// Largest eigenvalue of `M_R` by power iteration on `(I + M_R) / 2`.
///
/// The Cayley graphs involved are bipartite, so the spectrum of `M_R` is
/// symmetric about 0 and plain power iteration would oscillate between
/// `+lambda` and `-lambda`. After the shift the target `(1 + lambda) / 2` is
/// strictly dominant. Stops when the Rayleigh quotient moves by less than
/// `tol` in one step; running out of iterations is reported, not an error.
pub fn top_eigenvalue<T: FloatScalar>(
    m: &TruncatedConvolutionOperator<T>,
    opts: &PowerOptions,
) -> Result<SpectralReport> {
    let n = m.dim();
    if n < 2 {
        return Err(Error::usage("power iteration needs a ball with at least 2 elements"));
    }
    let half = T::from_f64(0.5).unwrap();
    let tol = T::from_f64(opts.tol).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut noise: Vec<T> = (0..n).map(|_| T::from_f64(rng.gen_range(-1.0..1.0)).unwrap()).collect();
    let noise_norm = norm2(&noise);
    scale(T::from_f64(opts.perturbation).unwrap() / noise_norm, &mut noise);
    let mut v = noise;
    v[0] = v[0] + T::one();
    let vn = norm2(&v);
    scale(T::one() / vn, &mut v);

    let mut mv = vec![T::zero(); n];
    let mut rq_prev: Option<T> = None;
    let mut rq = T::zero();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        m.matvec_into(&v, &mut mv)?;
        // w = (v + Mv) / 2, rq = <v, w>
        rq = (T::one() + dot(&v, &mv)) * half;
        let done = matches!(rq_prev, Some(p) if (rq - p).abs() < tol);
        rq_prev = Some(rq);
        let mut w = mv.clone();
        axpy(T::one(), &v, &mut w);
        scale(half, &mut w);
        let wn = norm2(&w);
        if done {
            converged = true;
            break;
        }
        scale(T::one() / wn, &mut w);
        v = w;
    }
    let lambda = T::from_f64(2.0).unwrap() * rq - T::one();
    // residual of the current v for M itself
    let mut r = mv;
    axpy(-lambda, &v, &mut r);
    let lambda_max = lambda.to_f64().unwrap();
    let gap = 1.0 - lambda_max;
    Ok(SpectralReport {
        radius: m.radius(),
        ball_size: n,
        lambda_max,
        gap,
        l2_inv_norm: 1.0 / gap,
        iterations,
        residual: norm2(&r).to_f64().unwrap(),
        converged,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CgOptions {
    pub tol: f64,
    /// Explicit iteration cap; defaults to `max(200, 10 sqrt(kappa))`.
    pub max_iters: Option<usize>,
    /// Estimate of the condition number of `I - M`; the ball size is used
    /// when absent.
    pub condition_estimate: Option<f64>,
}

impl CgOptions {
    pub fn with_tol(tol: f64) -> Self {
        CgOptions {
            tol,
            ..Default::default()
        }
    }

    fn cap(&self, n: usize) -> usize {
        self.max_iters.unwrap_or_else(|| {
            let kappa = self.condition_estimate.unwrap_or(n as f64).max(1.0);
            ((10.0 * kappa.sqrt()).ceil() as usize).max(200)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// True relative residual `||(I - M) x - b|| / ||b||`.
    pub residual: f64,
}

/// Solves `(I - M_R) x = b` by conjugate gradients.
pub fn solve_shifted<T: FloatScalar>(
    m: &TruncatedConvolutionOperator<T>,
    b: &[T],
    opts: &CgOptions,
) -> Result<Solution<T>> {
    let n = m.dim();
    if b.len() != n {
        return Err(Error::usage(format!("right-hand side has dimension {}, operator has {n}", b.len())));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::usage("CG tolerance must be positive"));
    }
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        return Ok(Solution {
            x: vec![T::zero(); n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let cap = opts.cap(n);
    let tol = T::from_f64(opts.tol).unwrap();
    let true_residual = |x: &[T]| -> Result<T> {
        let mut r = m.laplacian_apply(x)?;
        axpy(-T::one(), b, &mut r);
        Ok(norm2(&r) / bnorm)
    };

    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    let mut ap = vec![T::zero(); n];
    let mut iterations = 0;
    let mut best = T::one();
    while iterations < cap {
        iterations += 1;
        m.laplacian_apply_into(&p, &mut ap)?;
        let alpha = rs / dot(&p, &ap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rs_new = dot(&r, &r);
        if rs_new.sqrt() / bnorm <= tol {
            let res = true_residual(&x)?;
            if res <= tol {
                return Ok(Solution {
                    x,
                    iterations,
                    residual: res.to_f64().unwrap(),
                });
            }
            // recurrence drifted: restart from the true residual
            r = m.laplacian_apply(&x)?;
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri = *bi - *ri;
            }
            p = r.clone();
            rs = dot(&r, &r);
            best = best.min(res);
            continue;
        }
        let beta = rs_new / rs;
        scale(beta, &mut p);
        axpy(T::one(), &r, &mut p);
        rs = rs_new;
        best = best.min(rs.sqrt() / bnorm);
    }
    let res = true_residual(&x)?.min(best);
    Err(Error::NoConvergence {
        iterations,
        residual: res.to_f64().unwrap(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseOptions {
    pub cg_tol: f64,
    pub budget: usize,
    pub power: PowerOptions,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions {
            cg_tol: DEFAULT_CG_TOL,
            budget: DEFAULT_INVERSE_BUDGET,
            power: PowerOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseNormReport {
    pub radius: u32,
    pub ball_size: usize,
    pub l1_inv_norm: f64,
    pub linf_inv_norm: f64,
    pub l2_inv_norm: f64,
    pub lambda_max: f64,
    /// Total CG iterations over all column solves.
    #[serde(rename = "iters")]
    pub iterations: usize,
    /// Largest final relative residual among the column solves.
    pub residual: f64,
}

/// `l1` norms of the columns of `(I - M_R)^-1`, one CG solve per column.
pub fn inverse_column_l1_norms<T: FloatScalar>(
    m: &TruncatedConvolutionOperator<T>,
    opts: &CgOptions,
) -> Result<Vec<(f64, usize, f64)>> {
    let n = m.dim();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut e = vec![T::zero(); n];
            e[i] = T::one();
            let sol = solve_shifted(m, &e, opts)?;
            Ok((norm1(&sol.x).to_f64().unwrap(), sol.iterations, sol.residual))
        })
        .collect()
}

/// `||(I - M_R)^-1||` on `l1`, `l2` and `l-inf`.
///
/// The `l-inf` norm is the largest row `l1` norm; the inverse is symmetric, so
/// this is the largest column `l1` norm, which is also the `l1` operator norm.
pub fn inverse_lp_norms<T: FloatScalar>(
    m: &TruncatedConvolutionOperator<T>,
    opts: &InverseOptions,
) -> Result<InverseNormReport> {
    if m.dim() > opts.budget {
        return Err(Error::Capacity {
            what: format!("inverse norms at R={} (one solve per ball element)", m.radius()),
            needed: m.dim().to_string(),
            budget: opts.budget,
        });
    }
    let spectral = top_eigenvalue(m, &opts.power)?;
    let lambda = spectral.lambda_max;
    let cg = CgOptions {
        tol: opts.cg_tol,
        max_iters: None,
        condition_estimate: Some((1.0 + lambda) / (1.0 - lambda)),
    };
    let columns = inverse_column_l1_norms(m, &cg)?;
    let linf = columns.iter().map(|c| c.0).fold(0.0, f64::max);
    Ok(InverseNormReport {
        radius: m.radius(),
        ball_size: m.dim(),
        l1_inv_norm: linf,
        linf_inv_norm: linf,
        l2_inv_norm: spectral.l2_inv_norm,
        lambda_max: lambda,
        iterations: columns.iter().map(|c| c.1).sum(),
        residual: columns.iter().map(|c| c.2).fold(0.0, f64::max),
    })
}

/// Partial sums `sum_{n=0}^{N} mu^{*n}(e)` of the Green's function at `e`,
/// exact, for every `N` up to `n_max`.
pub fn greens_partial(measure: &ProbabilityMeasure, n_max: u32, budget: usize) -> Result<Vec<BigRational>> {
    let returns = crate::walk::return_probabilities(measure, n_max, budget)?;
    let mut acc = BigRational::from_integer(0.into());
    Ok(returns
        .into_iter()
        .map(|p| {
            acc = &acc + p;
            acc.clone()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::DEFAULT_NODE_BUDGET;
    use crate::group::GroupDescriptor;
    use crate::operator::build_operator;

    fn f2_op(r: u32) -> TruncatedConvolutionOperator<f64> {
        let mu = ProbabilityMeasure::standard(&GroupDescriptor::free_group(2).unwrap());
        build_operator(&mu, r, DEFAULT_NODE_BUDGET).unwrap()
    }

    #[test]
    fn star_graph_eigenvalue() {
        let rep = top_eigenvalue(&f2_op(1), &PowerOptions::default()).unwrap();
        assert!(rep.converged);
        assert!((rep.lambda_max - 0.5).abs() < 1e-9, "{rep:?}");
        assert_eq!(rep.l2_inv_norm, 1.0 / rep.gap);
    }

    #[test]
    fn zero_rhs() {
        let m = f2_op(2);
        let sol = solve_shifted(&m, &vec![0.0; m.dim()], &CgOptions::with_tol(1e-10)).unwrap();
        assert!(sol.x.iter().all(|&v| v == 0.0));
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn radius_one_solve() {
        let m = f2_op(1);
        let sol = solve_shifted(&m, &[1.0, 0.0, 0.0, 0.0, 0.0], &CgOptions::with_tol(1e-12)).unwrap();
        assert!((sol.x[0] - 4.0 / 3.0).abs() < 1e-12);
        for s in 1..5 {
            assert!((sol.x[s] - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn iteration_cap_reports_best_residual() {
        let m = f2_op(5);
        let mut b = vec![0.0; m.dim()];
        b[7] = 1.0;
        let opts = CgOptions {
            tol: 1e-14,
            max_iters: Some(2),
            condition_estimate: None,
        };
        match solve_shifted(&m, &b, &opts) {
            Err(Error::NoConvergence { iterations, residual }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-14 && residual < 1.0);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn bad_inputs() {
        let m = f2_op(1);
        assert!(solve_shifted(&m, &[1.0], &CgOptions::with_tol(1e-10)).is_err());
        assert!(solve_shifted(&m, &[1.0; 5], &CgOptions::with_tol(0.0)).is_err());
    }

    #[test]
    fn inverse_norms_radius_one() {
        let rep = inverse_lp_norms(&f2_op(1), &InverseOptions::default()).unwrap();
        assert!((rep.linf_inv_norm - 8.0 / 3.0).abs() < 1e-10);
        assert_eq!(rep.l1_inv_norm, rep.linf_inv_norm);
        assert!(rep.l2_inv_norm <= rep.l1_inv_norm);
    }

    #[test]
    fn inverse_norm_budget() {
        let opts = InverseOptions {
            budget: 100,
            ..Default::default()
        };
        let err = inverse_lp_norms(&f2_op(4), &opts).unwrap_err();
        assert!(matches!(err, Error::Capacity { budget: 100, .. }));
    }

    #[test]
    fn works_in_single_precision() {
        let mu = ProbabilityMeasure::standard(&GroupDescriptor::free_group(2).unwrap());
        let m: TruncatedConvolutionOperator<f32> = build_operator(&mu, 3, 1000).unwrap();
        let opts = PowerOptions {
            tol: 1e-6,
            ..Default::default()
        };
        let rep = top_eigenvalue(&m, &opts).unwrap();
        let exact = top_eigenvalue(&f2_op(3), &PowerOptions::default()).unwrap();
        assert!((rep.lambda_max - exact.lambda_max).abs() < 1e-4);
    }

    #[test]
    fn greens_small_partial_sums() {
        let mu = ProbabilityMeasure::standard(&GroupDescriptor::free_group(2).unwrap());
        let sums = greens_partial(&mu, 2, DEFAULT_NODE_BUDGET).unwrap();
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(sums, vec![q(1, 1), q(1, 1), q(5, 4)]);
    }
}
