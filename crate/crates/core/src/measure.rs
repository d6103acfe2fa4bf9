//! Finite symmetric generating probability measures with exact weights.

use crate::error::{Error, MeasureError, Result};
use crate::group::{GroupDescriptor, GroupElement};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A symmetric probability measure supported on the generators of a group.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMeasure {
    group: GroupDescriptor,
    support: Vec<(GroupElement, BigRational)>,
    // weight per generator slot, zero off the support
    slot_weights: Vec<BigRational>,
}

impl ProbabilityMeasure {
    /// Validates and builds a measure. Support entries are kept in the given order.
    pub fn new(group: &GroupDescriptor, support: Vec<(GroupElement, BigRational)>) -> std::result::Result<Self, MeasureError> {
        if support.is_empty() {
            return Err(MeasureError::EmptySupport);
        }
        let mut slot_weights = vec![BigRational::zero(); group.generator_count()];
        let mut present = vec![false; group.generator_count()];
        for (g, w) in &support {
            if !group.contains(g) {
                return Err(MeasureError::ForeignElement(format!("{g:?}")));
            }
            if *g == group.identity() {
                return Err(MeasureError::IdentityInSupport);
            }
            let slot = group
                .generator_slot(g)
                .ok_or_else(|| MeasureError::NonGeneratorSupport(group.render(g)))?;
            if present[slot] {
                return Err(MeasureError::DuplicateElement(group.render(g)));
            }
            if !w.is_positive() || *w > BigRational::one() {
                return Err(MeasureError::WeightOutOfRange {
                    element: group.render(g),
                    weight: w.to_string(),
                });
            }
            present[slot] = true;
            slot_weights[slot] = w.clone();
        }
        let total: BigRational = slot_weights.iter().sum();
        if !total.is_one() {
            return Err(MeasureError::NotNormalized(total.to_string()));
        }
        for slot in (0..group.generator_count()).step_by(2) {
            if slot_weights[slot] != slot_weights[slot + 1] {
                let (a, b) = if present[slot] { (slot, slot + 1) } else { (slot + 1, slot) };
                return Err(MeasureError::NotSymmetric {
                    element: group.render(&group.generator(a)),
                    inverse: group.render(&group.generator(b)),
                });
            }
            if !present[slot] {
                return Err(MeasureError::NotGenerating(group.labels()[slot / 2].clone()));
            }
        }
        Ok(ProbabilityMeasure {
            group: group.clone(),
            support,
            slot_weights,
        })
    }

    /// Uniform weight `1/(2 rank)` on every generator and inverse.
    pub fn standard(group: &GroupDescriptor) -> Self {
        let w = BigRational::new(BigInt::one(), BigInt::from(group.generator_count()));
        let support = group.generators().map(|g| (g, w.clone())).collect();
        Self::new(group, support).expect("uniform generator measure is admissible")
    }

    /// Parses `element:weight` entries separated by `;` or by commas outside
    /// parentheses, e.g. `x:1/4, x^-1:1/4, y:1/4, y^-1:1/4` or
    /// `(1,0):1/4; (-1,0):1/4; (0,1):1/4; (0,-1):1/4`.
    pub fn parse(group: &GroupDescriptor, text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for item in split_top_level(text) {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (el, w) = item
                .rsplit_once(':')
                .ok_or_else(|| Error::Parse(format!("expected element:weight, got {item:?}")))?;
            let weight: BigRational = w
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad weight {w:?}")))?;
            entries.push((group.parse_element(el)?, weight));
        }
        Ok(Self::new(group, entries)?)
    }

    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn support(&self) -> &[(GroupElement, BigRational)] {
        &self.support
    }

    /// Weight of the generator at `slot` (zero if absent).
    pub fn slot_weight(&self, slot: usize) -> &BigRational {
        &self.slot_weights[slot]
    }

    pub fn slot_weights(&self) -> &[BigRational] {
        &self.slot_weights
    }

    pub fn weight_of(&self, g: &GroupElement) -> BigRational {
        self.group
            .generator_slot(g)
            .map_or_else(BigRational::zero, |s| self.slot_weights[s].clone())
    }

    /// Largest word length among support elements.
    pub fn max_support_length(&self) -> u32 {
        1
    }

    /// True for the uniform measure on all of S, whose convolution powers are
    /// constant on spheres of the free group.
    pub fn is_uniform_on_generators(&self) -> bool {
        self.slot_weights.windows(2).all(|p| p[0] == p[1])
    }

    /// Least common denominator `D` of the weights and the integer numerators
    /// `D * mu(s)` per slot.
    pub fn integer_weights(&self) -> (BigUint, Vec<BigUint>) {
        let denom = self
            .slot_weights
            .iter()
            .filter(|w| !w.is_zero())
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let numerators = self
            .slot_weights
            .iter()
            .map(|w| {
                (w * BigRational::from_integer(denom.clone()))
                    .to_integer()
                    .to_biguint()
                    .expect("weights are nonnegative")
            })
            .collect();
        (denom.to_biguint().expect("denominator is positive"), numerators)
    }

    pub fn render(&self) -> String {
        self.support
            .iter()
            .map(|(g, w)| format!("{}:{}", self.group.render(g), w))
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ';' | ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn standard_measures() {
        let f2 = GroupDescriptor::free_group(2).unwrap();
        let mu = ProbabilityMeasure::standard(&f2);
        assert_eq!(mu.render(), "x:1/4;x^-1:1/4;y:1/4;y^-1:1/4");
        let z2 = GroupDescriptor::free_abelian(2).unwrap();
        let mu = ProbabilityMeasure::standard(&z2);
        assert_eq!(mu.weight_of(&GroupElement::Vector(vec![0, -1])), q(1, 4));
        assert_eq!(mu.weight_of(&GroupElement::Vector(vec![1, 1])), q(0, 1));
        let f1 = GroupDescriptor::free_group(1).unwrap();
        assert_eq!(ProbabilityMeasure::standard(&f1).render(), "x:1/2;x^-1:1/2");
    }

    #[test]
    fn parse_explicit() {
        let f2 = GroupDescriptor::free_group(2).unwrap();
        let mu = ProbabilityMeasure::parse(&f2, "x:1/3, x^-1:1/3, y:1/6, y^-1:1/6").unwrap();
        assert!(!mu.is_uniform_on_generators());
        let (d, nums) = mu.integer_weights();
        assert_eq!(d, BigUint::from(6u32));
        assert_eq!(nums, vec![2u32, 2, 1, 1].into_iter().map(BigUint::from).collect::<Vec<_>>());
        let z2 = GroupDescriptor::free_abelian(2).unwrap();
        let mu = ProbabilityMeasure::parse(&z2, "(1,0):1/4; (-1,0):1/4; (0,1):1/4; (0,-1):1/4").unwrap();
        assert_eq!(mu, ProbabilityMeasure::standard(&z2));
    }

    #[test]
    fn rejects_non_generating() {
        let f2 = GroupDescriptor::free_group(2).unwrap();
        let err = ProbabilityMeasure::parse(&f2, "x:1/2, x^-1:1/2").unwrap_err();
        assert!(matches!(err, Error::Measure(MeasureError::NotGenerating(ref g)) if g == "y"));
        assert!(err.to_string().contains("does not generate"));
    }

    #[test]
    fn rejects_asymmetric() {
        let f2 = GroupDescriptor::free_group(2).unwrap();
        let err = ProbabilityMeasure::parse(&f2, "x:1/2, x^-1:1/4, y:1/8, y^-1:1/8").unwrap_err();
        assert!(matches!(err, Error::Measure(MeasureError::NotSymmetric { .. })));
        let err = ProbabilityMeasure::parse(&f2, "x:1/2, y:1/4, y^-1:1/4").unwrap_err();
        assert!(matches!(err, Error::Measure(MeasureError::NotSymmetric { .. })));
    }

    #[test]
    fn rejects_bad_weights_and_support() {
        let f2 = GroupDescriptor::free_group(2).unwrap();
        let bad = [
            ("x:1/4, x^-1:1/4, y:1/4, y^-1:1/8", "sum"),
            ("x:0, x^-1:0, y:1/2, y^-1:1/2", "range"),
            ("e:1/2, x:1/4, x^-1:1/4", "identity"),
            ("x.y:1/2, y^-1.x^-1:1/2", "non-generator"),
            ("x:1/4, x:1/4, y:1/4, y^-1:1/4", "duplicate"),
        ];
        for (text, why) in bad {
            assert!(ProbabilityMeasure::parse(&f2, text).is_err(), "{why}");
        }
        assert!(matches!(
            ProbabilityMeasure::new(&f2, vec![]),
            Err(MeasureError::EmptySupport)
        ));
    }
}
