//! Lipschitz witnesses against `l-inf` invertibility of `I - M`.
//!
//! `f_n(g)` is the word-metric distance from `g` to `G \ B(e, n)`, which is
//! `max(0, n + 1 - |g|)`. It is 1-Lipschitz, so `|(I - M) f_n| <= 1`
//! pointwise while `||f_n||_inf = n + 1`.

use crate::ball::{ball, BallIndex};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind, Letter};
use crate::measure::ProbabilityMeasure;
use crate::operator::TruncatedConvolutionOperator;
use crate::scalar::Scalar;
use std::sync::Arc;

/// `f_n` sampled on `B(e, R)`.
#[derive(Debug, Clone)]
pub struct WitnessFunction<T> {
    pub n: u32,
    pub ball: Arc<BallIndex>,
    pub values: Vec<T>,
}

fn witness_value(n: u32, len: u64) -> i64 {
    (n as i64 + 1 - len as i64).max(0)
}

/// Builds `f_n` on `B(e, radius)`; requires `radius >= n + 1` so every point
/// of `B(e, n)` sees its full stencil.
pub fn build_witness<T: Scalar>(
    group: &crate::GroupDescriptor,
    n: u32,
    radius: u32,
    budget: usize,
) -> Result<WitnessFunction<T>> {
    if radius < n + 1 {
        return Err(Error::usage(format!("witness f_{n} needs radius >= {}, got {radius}", n + 1)));
    }
    let ball = Arc::new(ball(group, radius, budget)?);
    let values = ball
        .word_lengths()
        .iter()
        .map(|&k| T::from_integer(witness_value(n, k as u64)))
        .collect();
    Ok(WitnessFunction { n, ball, values })
}

impl<T: Scalar> WitnessFunction<T> {
    /// Largest `|f(g) - f(g s)|` over ball edges.
    pub fn lipschitz_constant(&self) -> T {
        let degree = self.ball.group().generator_count();
        let mut worst = T::zero();
        for i in 0..self.ball.len() {
            for slot in 0..degree {
                if let Some(j) = self.ball.neighbor(i, slot) {
                    let d = (self.values[i].clone() - self.values[j].clone()).abs();
                    if d > worst {
                        worst = d;
                    }
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport<T> {
    pub n: u32,
    /// `||f_n||_inf`
    pub sup_f: T,
    /// `sup |(I - M) f_n|` over points with a complete stencil.
    pub sup_laplacian_f: T,
    pub ratio: T,
    /// `1/n`
    pub bound: T,
    /// Word length of the first point attaining `sup_laplacian_f`.
    pub argmax_length: u32,
    /// Number of points (or stencil classes) evaluated.
    pub points_evaluated: usize,
}

fn finish<T: Scalar>(n: u32, sup_f: T, sup_lap: T, argmax_length: u32, points: usize) -> WitnessReport<T> {
    let ratio = sup_lap.clone() / sup_f.clone();
    WitnessReport {
        n,
        sup_f,
        sup_laplacian_f: sup_lap,
        ratio,
        bound: T::one() / T::from_integer(n as i64),
        argmax_length,
        points_evaluated: points,
    }
}

/// Witness report evaluated on the full ball `B(e, n + 2)`, using the
/// truncated operator for `(I - M) f_n` and keeping rows of length `<= n + 1`.
pub fn witness_ratio_on_ball<T: Scalar>(measure: &ProbabilityMeasure, n: u32, budget: usize) -> Result<WitnessReport<T>> {
    if n == 0 {
        return Err(Error::usage("witness ratio needs n >= 1 (bound 1/n)"));
    }
    let radius = n + 2;
    let f: WitnessFunction<T> = build_witness(measure.group(), n, radius, budget)?;
    let op = TruncatedConvolutionOperator::<T>::on_ball(Arc::clone(&f.ball), measure)?;
    let lap = op.laplacian_apply(&f.values)?;
    let mut sup = T::zero();
    let mut argmax = 0;
    let mut points = 0;
    for (i, v) in lap.iter().enumerate() {
        let len = f.ball.word_length(i);
        if len + measure.max_support_length() > radius {
            continue;
        }
        points += 1;
        let a = v.abs();
        if a > sup {
            sup = a;
            argmax = len;
        }
    }
    Ok(finish(n, f.values[0].clone(), sup, argmax, points))
}

/// Witness report for the free group without enumerating the ball.
///
/// For a measure on the generators and a radial `f`, `(Mf)(g)` at `g != e`
/// depends only on `|g|` and the last letter of `g`: that letter's inverse
/// shortens `g`, every other generator lengthens it. The words `l^k` for each
/// letter `l` and `1 <= k <= n + 1`, together with `e`, therefore attain every
/// value `(I - M) f_n` takes on `B(e, n + 1)`.
pub fn witness_ratio_by_classes<T: Scalar>(measure: &ProbabilityMeasure, n: u32) -> Result<WitnessReport<T>> {
    if n == 0 {
        return Err(Error::usage("witness ratio needs n >= 1 (bound 1/n)"));
    }
    let g = measure.group();
    if g.kind() != GroupKind::FreeGroup {
        return Err(Error::usage("stencil classes are only complete for free groups"));
    }
    let f = |el: &GroupElement| -> Result<T> { Ok(T::from_integer(witness_value(n, g.word_length(el)?))) };
    let generators: Vec<GroupElement> = g.generators().collect();
    let laplacian_at = |el: &GroupElement| -> Result<T> {
        let mut mf = T::zero();
        for (slot, s) in generators.iter().enumerate() {
            let w = measure.slot_weight(slot);
            if num_traits::Zero::is_zero(w) {
                continue;
            }
            mf = mf + T::from_rational(w) * f(&g.multiply(el, s)?)?;
        }
        Ok(f(el)? - mf)
    };

    let mut sup = laplacian_at(&g.identity())?.abs();
    let mut argmax = 0;
    let mut points = 1;
    for k in 1..=n + 1 {
        for slot in 0..g.generator_count() {
            let rep = GroupElement::Word(vec![Letter::from_slot(slot); k as usize]);
            points += 1;
            let a = laplacian_at(&rep)?.abs();
            if a > sup {
                sup = a;
                argmax = k;
            }
        }
    }
    Ok(finish(n, T::from_integer(n as i64 + 1), sup, argmax, points))
}

/// Witness report for any supported group: stencil classes on free groups,
/// the full ball otherwise.
pub fn witness_ratio<T: Scalar>(measure: &ProbabilityMeasure, n: u32, budget: usize) -> Result<WitnessReport<T>> {
    match measure.group().kind() {
        GroupKind::FreeGroup => witness_ratio_by_classes(measure, n),
        GroupKind::FreeAbelian => witness_ratio_on_ball(measure, n, budget),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::DEFAULT_NODE_BUDGET;
    use crate::group::GroupDescriptor;
    use num_rational::BigRational;

    fn f2() -> GroupDescriptor {
        GroupDescriptor::free_group(2).unwrap()
    }

    #[test]
    fn witness_values() {
        let w: WitnessFunction<f64> = build_witness(&f2(), 3, 5, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(w.values[0], 4.0);
        for i in 0..w.ball.len() {
            let k = w.ball.word_length(i);
            let expect = match k {
                0..=3 => (4 - k) as f64,
                _ => 0.0,
            };
            assert_eq!(w.values[i], expect);
        }
        assert_eq!(w.lipschitz_constant(), 1.0);
    }

    #[test]
    fn n_zero_is_delta() {
        let w: WitnessFunction<f64> = build_witness(&f2(), 0, 2, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(w.values[0], 1.0);
        assert!(w.values[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn radius_too_small() {
        assert!(matches!(
            build_witness::<f64>(&f2(), 4, 4, DEFAULT_NODE_BUDGET),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn free_group_ratio_is_one_over_n_plus_one() {
        let mu = ProbabilityMeasure::standard(&f2());
        for n in 1..=12 {
            let r: WitnessReport<f64> = witness_ratio(&mu, n, DEFAULT_NODE_BUDGET).unwrap();
            assert_eq!(r.sup_laplacian_f, 1.0);
            assert_eq!(r.argmax_length, 0);
            assert_eq!(r.ratio, 1.0 / (n as f64 + 1.0));
            assert!(r.ratio <= r.bound);
        }
    }

    #[test]
    fn classes_match_full_ball() {
        let g = f2();
        let measures = [
            ProbabilityMeasure::standard(&g),
            ProbabilityMeasure::parse(&g, "x:3/8,x^-1:3/8,y:1/8,y^-1:1/8").unwrap(),
        ];
        for mu in &measures {
            for n in 1..=6 {
                let a: WitnessReport<BigRational> = witness_ratio_by_classes(mu, n).unwrap();
                let b: WitnessReport<BigRational> = witness_ratio_on_ball(mu, n, DEFAULT_NODE_BUDGET).unwrap();
                assert_eq!(a.sup_laplacian_f, b.sup_laplacian_f);
                assert_eq!(a.ratio, b.ratio);
                assert_eq!(a.sup_f, b.sup_f);
            }
        }
    }

    #[test]
    fn abelian_ratio() {
        let mu = ProbabilityMeasure::standard(&GroupDescriptor::free_abelian(2).unwrap());
        for n in 1..=10 {
            let r: WitnessReport<f64> = witness_ratio(&mu, n, DEFAULT_NODE_BUDGET).unwrap();
            assert!(r.ratio <= r.bound);
            assert_eq!(r.sup_laplacian_f, 1.0);
        }
    }

    #[test]
    fn n_zero_ratio_rejected() {
        let mu = ProbabilityMeasure::standard(&f2());
        assert!(witness_ratio::<f64>(&mu, 0, DEFAULT_NODE_BUDGET).is_err());
    }
}
