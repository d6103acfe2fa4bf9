//! Test-side oracles. Apart from `top_lambda`, each one is built from group
//! arithmetic or elementary recurrences, never from the library's sparse
//! operator or walk code.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use schurlab::{BallIndex, GroupDescriptor, GroupElement, ProbabilityMeasure};
use std::collections::{HashMap, VecDeque};

pub const KESTEN: f64 = 0.8660254037844386;

pub fn f2() -> GroupDescriptor {
    GroupDescriptor::free_group(2).unwrap()
}

pub fn z2() -> GroupDescriptor {
    GroupDescriptor::free_abelian(2).unwrap()
}

pub fn standard(g: &GroupDescriptor) -> ProbabilityMeasure {
    ProbabilityMeasure::standard(g)
}

/// Dense `M_R` with `m_ij = mu(g_i^-1 g_j)`, entry by entry from group
/// multiplication.
pub fn dense_from_group(ball: &BallIndex, mu: &ProbabilityMeasure) -> DMatrix<f64> {
    let g = ball.group();
    let n = ball.len();
    let elems: Vec<GroupElement> = (0..n).map(|i| ball.element(i)).collect();
    let invs: Vec<GroupElement> = elems.iter().map(|a| g.inverse(a).unwrap()).collect();
    DMatrix::from_fn(n, n, |i, j| {
        let h = g.multiply(&invs[i], &elems[j]).unwrap();
        mu.weight_of(&h).to_f64().unwrap()
    })
}

/// Same matrix with exact entries.
pub fn dense_exact(ball: &BallIndex, mu: &ProbabilityMeasure) -> Vec<Vec<BigRational>> {
    let g = ball.group();
    let n = ball.len();
    let elems: Vec<GroupElement> = (0..n).map(|i| ball.element(i)).collect();
    (0..n)
        .map(|i| {
            let inv = g.inverse(&elems[i]).unwrap();
            (0..n).map(|j| mu.weight_of(&g.multiply(&inv, &elems[j]).unwrap())).collect()
        })
        .collect()
}

pub fn dense_top_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().cloned().fold(f64::MIN, f64::max)
}

/// `(I - M)^-1` by dense LU.
pub fn dense_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let a = DMatrix::identity(n, n) - m;
    a.lu().try_inverse().expect("I - M_R is invertible")
}

/// Largest row `l1` norm.
pub fn dense_linf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Word lengths of `B(e, radius)` by breadth-first search over generator
/// multiplication, keyed by element.
pub fn bfs_lengths(g: &GroupDescriptor, radius: u32) -> HashMap<GroupElement, u32> {
    let gens: Vec<GroupElement> = g.generators().collect();
    let mut dist = HashMap::new();
    dist.insert(g.identity(), 0u32);
    let mut queue = VecDeque::from([g.identity()]);
    while let Some(a) = queue.pop_front() {
        let d = dist[&a];
        if d == radius {
            continue;
        }
        for s in &gens {
            let b = g.multiply(&a, s).unwrap();
            if !dist.contains_key(&b) {
                dist.insert(b.clone(), d + 1);
                queue.push_back(b);
            }
        }
    }
    dist
}

/// `p_k(e,e)` for the simple random walk on the free group of rank `r`,
/// `k = 0..=k_max`, through the distance-from-`e` chain on the naturals:
/// from 0 go to 1; from `d > 0` go to `d + 1` with probability `(2r-1)/2r`.
/// Returned as numerators over `(2r)^k`.
pub fn tree_return_counts(r: u32, k_max: usize) -> Vec<u128> {
    let q = 2 * r as u128 - 1;
    let mut counts = vec![0u128; k_max + 2];
    counts[0] = 1;
    let mut out = vec![1u128];
    for _ in 0..k_max {
        let mut next = vec![0u128; k_max + 2];
        for d in 0..=k_max {
            let c = counts[d];
            if c == 0 {
                continue;
            }
            if d == 0 {
                next[1] += c * (q + 1);
            } else {
                next[d + 1] += c * q;
                next[d - 1] += c;
            }
        }
        counts = next;
        out.push(counts[0]);
    }
    out
}

/// Same chain in `f64`, for long horizons.
pub fn tree_return_probabilities(r: u32, k_max: usize) -> Vec<f64> {
    let up = (2 * r - 1) as f64 / (2 * r) as f64;
    let down = 1.0 / (2 * r) as f64;
    let mut p = vec![0.0; k_max + 2];
    p[0] = 1.0;
    let mut out = vec![1.0];
    for _ in 0..k_max {
        let mut next = vec![0.0; k_max + 2];
        for d in 0..=k_max {
            if p[d] == 0.0 {
                continue;
            }
            if d == 0 {
                next[1] += p[d];
            } else {
                next[d + 1] += p[d] * up;
                next[d - 1] += p[d] * down;
            }
        }
        p = next;
        out.push(p[0]);
    }
    out
}

/// Aitken's delta-squared acceleration of a sequence, applied repeatedly.
pub fn aitken(mut s: Vec<f64>, rounds: usize) -> f64 {
    for _ in 0..rounds {
        if s.len() < 3 {
            break;
        }
        s = s
            .windows(3)
            .map(|w| {
                let d = w[2] - 2.0 * w[1] + w[0];
                if d.abs() < 1e-300 {
                    w[2]
                } else {
                    w[2] - (w[2] - w[1]).powi(2) / d
                }
            })
            .collect();
    }
    *s.last().unwrap()
}

/// Limit of the Green's function partial sums at `e` for the rank-2 walk,
/// extrapolated from the partial sums of the distance chain alone.
pub fn extrapolated_green_limit() -> f64 {
    let p = tree_return_probabilities(2, 400);
    let mut acc = 0.0;
    let partial: Vec<f64> = p
        .iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect();
    // odd steps contribute nothing; accelerate the even partial sums
    let even: Vec<f64> = partial.iter().step_by(2).cloned().collect();
    aitken(even, 3)
}

/// `lambda_max(M_R)` for the standard measure, by the library's power
/// iteration (checked against dense eigensolves in the spectral tests).
pub fn top_lambda(g: &GroupDescriptor, r: u32) -> f64 {
    let m: schurlab::Operator = schurlab::build_operator(&standard(g), r, schurlab::DEFAULT_NODE_BUDGET).unwrap();
    schurlab::top_eigenvalue(&m, &schurlab::PowerOptions::default()).unwrap().lambda_max
}
