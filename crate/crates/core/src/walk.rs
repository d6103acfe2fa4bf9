//! Return probabilities of the `mu`-random walk: exact convolution powers
//! `mu^{*n}` and seeded Monte Carlo estimates.
//!
//! Exact powers are kept as integer path weights over a common denominator
//! `D^n`, where `D` is the least common denominator of the weights; no
//! rational normalisation happens until a probability is read out.

use crate::ball::{ball, ball_size, BallIndex};
use crate::error::{Error, Result};
use crate::group::{push_reduced, GroupDescriptor, GroupElement, GroupKind, Letter};
use crate::measure::ProbabilityMeasure;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Ball-size limit for element-level exact powers.
pub const DEFAULT_EXACT_BUDGET: usize = 250_000;
const MC_BATCH: u64 = 1 << 16;

/// How `mu^{*n}` is represented and computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerRoute {
    /// One exact value per element of `B(e, n)`, by repeated convolution.
    Elementwise,
    /// One exact value per sphere. Only valid for the uniform measure on a
    /// free group, where `mu^{*n}` is constant on spheres and word length is
    /// itself a Markov chain (`0 -> 1` surely; `k -> k+1` with probability
    /// `(2r-1)/2r`, `k -> k-1` with probability `1/2r`).
    Radial,
    /// Elementwise when `B(e, n)` fits the budget, otherwise Radial when valid.
    Auto,
}

#[derive(Debug, Clone)]
enum Layout {
    Elementwise { ball: Arc<BallIndex>, weights: Vec<BigUint> },
    Radial { sphere_weights: Vec<BigUint>, sphere_sizes: Vec<BigUint> },
}

/// Exact `mu^{*n}`.
#[derive(Debug, Clone)]
pub struct ConvolutionPower {
    n: u32,
    group: GroupDescriptor,
    denominator: BigUint,
    layout: Layout,
}

fn ratio(num: BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den.clone()))
}

impl ConvolutionPower {
    pub fn steps(&self) -> u32 {
        self.n
    }

    pub fn route(&self) -> PowerRoute {
        match self.layout {
            Layout::Elementwise { .. } => PowerRoute::Elementwise,
            Layout::Radial { .. } => PowerRoute::Radial,
        }
    }

    /// `p_n(e, e)`.
    pub fn return_probability(&self) -> BigRational {
        match &self.layout {
            Layout::Elementwise { weights, .. } => ratio(weights[0].clone(), &self.denominator),
            Layout::Radial { sphere_weights, .. } => ratio(sphere_weights[0].clone(), &self.denominator),
        }
    }

    pub fn probability_of(&self, g: &GroupElement) -> Result<BigRational> {
        let len = self.group.word_length(g)?;
        if len > self.n as u64 {
            return Ok(BigRational::zero());
        }
        Ok(match &self.layout {
            Layout::Elementwise { ball, weights } => {
                let i = ball.index_of(g).expect("element of B(e, n) is indexed");
                ratio(weights[i].clone(), &self.denominator)
            }
            Layout::Radial {
                sphere_weights,
                sphere_sizes,
            } => {
                let k = len as usize;
                ratio(sphere_weights[k].clone(), &(&self.denominator * &sphere_sizes[k]))
            }
        })
    }

    /// Mass of each sphere `S(e, k)`, `k = 0..=n`.
    pub fn mass_by_length(&self) -> Vec<BigRational> {
        match &self.layout {
            Layout::Elementwise { ball, weights } => (0..=self.n)
                .map(|k| {
                    let s: BigUint = weights[ball.layer(k)].iter().sum();
                    ratio(s, &self.denominator)
                })
                .collect(),
            Layout::Radial { sphere_weights, .. } => sphere_weights
                .iter()
                .map(|w| ratio(w.clone(), &self.denominator))
                .collect(),
        }
    }

    pub fn total_mass(&self) -> BigRational {
        self.mass_by_length().into_iter().sum()
    }
}

/// Successive convolution powers `mu^{*0}, mu^{*1}, ...` up to a horizon.
struct Evolution {
    group: GroupDescriptor,
    step: u32,
    denom: BigUint,
    denom_power: BigUint,
    numerators: Vec<BigUint>,
    state: Layout,
}

impl Evolution {
    fn new(measure: &ProbabilityMeasure, horizon: u32, budget: usize, route: PowerRoute) -> Result<Self> {
        let group = measure.group().clone();
        let fits = ball_size(&group, horizon).is_some_and(|s| s <= budget as u64);
        let radial_ok = group.kind() == GroupKind::FreeGroup && measure.is_uniform_on_generators();
        let route = match route {
            PowerRoute::Auto if fits => PowerRoute::Elementwise,
            PowerRoute::Auto if radial_ok => PowerRoute::Radial,
            r => r,
        };
        let (denom, numerators) = measure.integer_weights();
        let state = match route {
            PowerRoute::Radial => {
                if !radial_ok {
                    return Err(Error::usage(
                        "sphere-lumped powers need the uniform measure on a free group",
                    ));
                }
                let mut sphere_weights = vec![BigUint::zero(); horizon as usize + 1];
                sphere_weights[0] = BigUint::from(1u32);
                let degree = BigUint::from(group.generator_count());
                let branching = BigUint::from(group.generator_count() - 1);
                let mut sphere_sizes = vec![BigUint::from(1u32)];
                for k in 1..=horizon as usize {
                    let next = if k == 1 { degree.clone() } else { &sphere_sizes[k - 1] * &branching };
                    sphere_sizes.push(next);
                }
                Layout::Radial {
                    sphere_weights,
                    sphere_sizes,
                }
            }
            _ => {
                let ball = Arc::new(ball(&group, horizon, budget)?);
                let mut weights = vec![BigUint::zero(); ball.len()];
                weights[0] = BigUint::from(1u32);
                Layout::Elementwise { ball, weights }
            }
        };
        Ok(Evolution {
            group,
            step: 0,
            denom_power: BigUint::from(1u32),
            denom,
            numerators,
            state,
        })
    }

    fn current(&self) -> ConvolutionPower {
        let layout = match &self.state {
            Layout::Elementwise { ball, weights } => Layout::Elementwise {
                ball: Arc::clone(ball),
                weights: weights.clone(),
            },
            Layout::Radial {
                sphere_weights,
                sphere_sizes,
            } => Layout::Radial {
                sphere_weights: sphere_weights[..=self.step as usize].to_vec(),
                sphere_sizes: sphere_sizes[..=self.step as usize].to_vec(),
            },
        };
        ConvolutionPower {
            n: self.step,
            group: self.group.clone(),
            denominator: self.denom_power.clone(),
            layout,
        }
    }

    fn return_weight(&self) -> BigRational {
        let w = match &self.state {
            Layout::Elementwise { weights, .. } => weights[0].clone(),
            Layout::Radial { sphere_weights, .. } => sphere_weights[0].clone(),
        };
        ratio(w, &self.denom_power)
    }

    fn advance(&mut self) {
        let k = self.step + 1;
        match &mut self.state {
            Layout::Elementwise { ball, weights } => {
                // (M f)(g) = sum_s mu(s) f(g s); for symmetric mu, M^k delta_e = mu^{*k}
                let active = ball.layer(k.min(ball.radius())).end;
                let mut next = vec![BigUint::zero(); weights.len()];
                for (i, slot_out) in next.iter_mut().enumerate().take(active) {
                    for (slot, a) in self.numerators.iter().enumerate() {
                        if a.is_zero() {
                            continue;
                        }
                        if let Some(j) = ball.neighbor(i, slot) {
                            if !weights[j].is_zero() {
                                *slot_out += a * &weights[j];
                            }
                        }
                    }
                }
                *weights = next;
            }
            Layout::Radial { sphere_weights, .. } => {
                let a = &self.numerators[0];
                let out_degree = BigUint::from(self.group.generator_count() - 1);
                let top = (k as usize).min(sphere_weights.len() - 1);
                let mut next = vec![BigUint::zero(); sphere_weights.len()];
                for len in 0..k as usize {
                    let w = &sphere_weights[len];
                    if w.is_zero() {
                        continue;
                    }
                    if len == 0 {
                        next[1] += w * a * BigUint::from(self.group.generator_count());
                    } else {
                        if len < top {
                            next[len + 1] += w * a * &out_degree;
                        }
                        next[len - 1] += w * a;
                    }
                }
                *sphere_weights = next;
            }
        }
        self.denom_power *= &self.denom;
        self.step = k;
    }
}

/// Exact `mu^{*n}`, choosing the route automatically.
pub fn convolution_power(measure: &ProbabilityMeasure, n: u32, budget: usize) -> Result<ConvolutionPower> {
    convolution_power_via(measure, n, budget, PowerRoute::Auto)
}

pub fn convolution_power_via(
    measure: &ProbabilityMeasure,
    n: u32,
    budget: usize,
    route: PowerRoute,
) -> Result<ConvolutionPower> {
    let mut evo = Evolution::new(measure, n, budget, route)?;
    for _ in 0..n {
        evo.advance();
    }
    Ok(evo.current())
}

/// `[p_0(e,e), p_1(e,e), ..., p_{n_max}(e,e)]`, exact.
pub fn return_probabilities(measure: &ProbabilityMeasure, n_max: u32, budget: usize) -> Result<Vec<BigRational>> {
    return_probabilities_via(measure, n_max, budget, PowerRoute::Auto)
}

pub fn return_probabilities_via(
    measure: &ProbabilityMeasure,
    n_max: u32,
    budget: usize,
    route: PowerRoute,
) -> Result<Vec<BigRational>> {
    let mut evo = Evolution::new(measure, n_max, budget, route)?;
    let mut out = vec![evo.return_weight()];
    for _ in 0..n_max {
        evo.advance();
        out.push(evo.return_weight());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootPoint {
    pub n: u32,
    /// `p_{2n}(e,e)` as an exact fraction string.
    pub p_2n_exact: String,
    pub p_2n: f64,
    /// `p_{2n}(e,e)^{1/(2n)}`.
    pub root_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSweep {
    pub points: Vec<RootPoint>,
    /// Known `||M||_2` for this measure, when available.
    pub kesten_constant: Option<f64>,
    /// `kesten_constant - last root estimate`.
    pub final_gap: Option<f64>,
}

/// `||M||_2` for measures where it has a closed form: `sqrt(2r-1)/r` for the
/// uniform measure on the free group of rank `r`, and 1 on `Z^d`.
pub fn kesten_constant(measure: &ProbabilityMeasure) -> Option<f64> {
    let g = measure.group();
    match g.kind() {
        GroupKind::FreeAbelian => Some(1.0),
        GroupKind::FreeGroup if measure.is_uniform_on_generators() => {
            let r = g.rank() as f64;
            Some((2.0 * r - 1.0).sqrt() / r)
        }
        GroupKind::FreeGroup => None,
    }
}

/// `p_{2n}(e,e)^{1/(2n)}` for `n = 1..=n_max`.
pub fn spectral_radius_estimate(measure: &ProbabilityMeasure, n_max: u32, budget: usize) -> Result<RadiusSweep> {
    if n_max < 1 {
        return Err(Error::usage("spectral radius sweep needs n_max >= 1"));
    }
    let returns = return_probabilities(measure, 2 * n_max, budget)?;
    let points: Vec<RootPoint> = (1..=n_max)
        .map(|n| {
            let p = &returns[2 * n as usize];
            let pf = p.to_f64().unwrap_or(0.0);
            RootPoint {
                n,
                p_2n_exact: p.to_string(),
                p_2n: pf,
                root_estimate: pf.powf(1.0 / (2 * n) as f64),
            }
        })
        .collect();
    let kesten = kesten_constant(measure);
    let final_gap = kesten.zip(points.last()).map(|(k, p)| k - p.root_estimate);
    Ok(RadiusSweep {
        points,
        kesten_constant: kesten,
        final_gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkEstimate {
    pub n: u32,
    pub samples: u64,
    pub returns: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub seed: u64,
}

enum Position {
    Word(Vec<Letter>),
    Vector(Vec<i64>),
}

impl Position {
    fn start(g: &GroupDescriptor) -> Self {
        match g.kind() {
            GroupKind::FreeGroup => Position::Word(Vec::new()),
            GroupKind::FreeAbelian => Position::Vector(vec![0; g.rank()]),
        }
    }

    fn reset(&mut self) {
        match self {
            Position::Word(w) => w.clear(),
            Position::Vector(v) => v.iter_mut().for_each(|c| *c = 0),
        }
    }

    fn step(&mut self, slot: usize) {
        let l = Letter::from_slot(slot);
        match self {
            Position::Word(w) => push_reduced(w, l),
            Position::Vector(v) => v[l.generator()] += if l.is_inverse() { -1 } else { 1 },
        }
    }

    fn at_identity(&self) -> bool {
        match self {
            Position::Word(w) => w.is_empty(),
            Position::Vector(v) => v.iter().all(|&c| c == 0),
        }
    }
}

/// Fraction of `samples` independent `n`-step walks that end at `e`.
///
/// Samples are split into fixed batches; batch `b` draws from ChaCha8 seeded
/// with `seed` on stream `b`, so the result depends only on the arguments.
/// Steps are drawn with the exact integer weights of `mu`.
pub fn monte_carlo_return(measure: &ProbabilityMeasure, n: u32, samples: u64, seed: u64) -> Result<WalkEstimate> {
    if samples == 0 {
        return Err(Error::usage("monte carlo needs at least one sample"));
    }
    let (_, numerators) = measure.integer_weights();
    let weights = numerators
        .iter()
        .map(|w| w.to_u64().ok_or_else(|| Error::usage("measure weights too fine for sampling")))
        .collect::<Result<Vec<u64>>>()?;
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::usage(e.to_string()))?;
    let group = measure.group();
    let batches = samples.div_ceil(MC_BATCH);
    let returns: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let mut pos = Position::start(group);
            let mut hits = 0u64;
            for _ in 0..count {
                pos.reset();
                for _ in 0..n {
                    pos.step(dist.sample(&mut rng));
                }
                hits += u64::from(pos.at_identity());
            }
            hits
        })
        .sum();
    let estimate = returns as f64 / samples as f64;
    Ok(WalkEstimate {
        n,
        samples,
        returns,
        estimate,
        stderr: (estimate * (1.0 - estimate) / samples as f64).sqrt(),
        seed,
    })
}
