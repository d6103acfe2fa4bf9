//! Free groups and free abelian groups of finite rank: canonical elements,
//! the group law, and the word metric for the standard symmetric generating
//! set.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A generator or generator inverse, stored as a nonzero signed byte:
/// `+(k+1)` is generator `k`, `-(k+1)` its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(i8);

impl Letter {
    pub const MAX_RANK: usize = i8::MAX as usize;

    pub fn new(generator: usize, inverse: bool) -> Self {
        assert!(generator < Self::MAX_RANK, "generator index {generator} out of range");
        let v = (generator + 1) as i8;
        Letter(if inverse { -v } else { v })
    }

    /// Position in the fixed generator order `x, x^-1, y, y^-1, ...`.
    pub fn from_slot(slot: usize) -> Self {
        Letter::new(slot / 2, slot % 2 == 1)
    }

    pub fn generator(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    pub fn slot(self) -> usize {
        2 * self.generator() + usize::from(self.is_inverse())
    }

    pub fn raw(self) -> i8 {
        self.0
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    FreeGroup,
    FreeAbelian,
}

/// A canonical group element. Free-group words are freely reduced, so
/// structural equality is group equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Word(Vec<Letter>),
    Vector(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupDescriptor {
    kind: GroupKind,
    rank: usize,
    labels: Vec<String>,
}

fn default_labels(rank: usize) -> Vec<String> {
    const SHORT: [&str; 4] = ["x", "y", "z", "w"];
    if rank <= SHORT.len() {
        SHORT[..rank].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=rank).map(|k| format!("g{k}")).collect()
    }
}

impl GroupDescriptor {
    pub fn new(kind: GroupKind, rank: usize) -> Result<Self> {
        Self::with_labels(kind, default_labels(rank))
    }

    pub fn with_labels(kind: GroupKind, labels: Vec<String>) -> Result<Self> {
        let rank = labels.len();
        if rank == 0 {
            return Err(Error::usage("rank must be at least 1"));
        }
        if rank >= Letter::MAX_RANK {
            return Err(Error::usage(format!("rank {rank} exceeds {}", Letter::MAX_RANK - 1)));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l == "e" || !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::usage(format!("invalid generator label {l:?}")));
            }
            if labels[..i].contains(l) {
                return Err(Error::usage(format!("duplicate generator label {l:?}")));
            }
        }
        Ok(GroupDescriptor { kind, rank, labels })
    }

    /// Free group on `rank` generators.
    pub fn free_group(rank: usize) -> Result<Self> {
        Self::new(GroupKind::FreeGroup, rank)
    }

    /// `Z^rank`.
    pub fn free_abelian(rank: usize) -> Result<Self> {
        Self::new(GroupKind::FreeAbelian, rank)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Size of the symmetric generating set S.
    pub fn generator_count(&self) -> usize {
        2 * self.rank
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            GroupKind::FreeGroup => GroupElement::Word(Vec::new()),
            GroupKind::FreeAbelian => GroupElement::Vector(vec![0; self.rank]),
        }
    }

    /// The element of S at position `slot` in the order `x, x^-1, y, y^-1, ...`.
    pub fn generator(&self, slot: usize) -> GroupElement {
        assert!(slot < self.generator_count());
        let letter = Letter::from_slot(slot);
        match self.kind {
            GroupKind::FreeGroup => GroupElement::Word(vec![letter]),
            GroupKind::FreeAbelian => {
                let mut v = vec![0; self.rank];
                v[letter.generator()] = if letter.is_inverse() { -1 } else { 1 };
                GroupElement::Vector(v)
            }
        }
    }

    pub fn generators(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.generator_count()).map(move |s| self.generator(s))
    }

    /// Slot of `a` if it is a generator or generator inverse.
    pub fn generator_slot(&self, a: &GroupElement) -> Option<usize> {
        match (self.kind, a) {
            (GroupKind::FreeGroup, GroupElement::Word(w)) if w.len() == 1 => {
                (w[0].generator() < self.rank).then(|| w[0].slot())
            }
            (GroupKind::FreeAbelian, GroupElement::Vector(v)) if v.len() == self.rank => {
                let mut nonzero = v.iter().enumerate().filter(|(_, &c)| c != 0);
                match (nonzero.next(), nonzero.next()) {
                    (Some((k, &c)), None) if c.abs() == 1 => Some(2 * k + usize::from(c < 0)),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// Whether `a` is a canonical element of this group.
    pub fn contains(&self, a: &GroupElement) -> bool {
        match (self.kind, a) {
            (GroupKind::FreeGroup, GroupElement::Word(w)) => {
                w.iter().all(|l| l.generator() < self.rank)
                    && w.windows(2).all(|p| p[1] != p[0].inverse())
            }
            (GroupKind::FreeAbelian, GroupElement::Vector(v)) => v.len() == self.rank,
            _ => false,
        }
    }

    fn check(&self, a: &GroupElement) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::usage(format!("element {a:?} is not a canonical element of {self}")))
        }
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (GroupElement::Word(x), GroupElement::Word(y)) => {
                let mut out = x.clone();
                for &l in y {
                    push_reduced(&mut out, l);
                }
                GroupElement::Word(out)
            }
            (GroupElement::Vector(x), GroupElement::Vector(y)) => {
                GroupElement::Vector(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            _ => unreachable!("checked above"),
        })
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(match a {
            GroupElement::Word(w) => GroupElement::Word(w.iter().rev().map(|l| l.inverse()).collect()),
            GroupElement::Vector(v) => GroupElement::Vector(v.iter().map(|c| -c).collect()),
        })
    }

    /// Distance from e in the word metric of S.
    pub fn word_length(&self, a: &GroupElement) -> Result<u64> {
        self.check(a)?;
        Ok(match a {
            GroupElement::Word(w) => w.len() as u64,
            GroupElement::Vector(v) => v.iter().map(|c| c.unsigned_abs()).sum(),
        })
    }

    /// `d_S(g, h) = |g^-1 h|`.
    pub fn distance(&self, g: &GroupElement, h: &GroupElement) -> Result<u64> {
        let gi = self.inverse(g)?;
        self.word_length(&self.multiply(&gi, h)?)
    }

    /// Renders `x.y^-1` for words, `( i, j )` for vectors and `e` for the identity.
    pub fn render(&self, a: &GroupElement) -> String {
        match a {
            GroupElement::Word(w) if w.is_empty() => "e".to_string(),
            GroupElement::Vector(v) if v.iter().all(|&c| c == 0) => "e".to_string(),
            GroupElement::Word(w) => w
                .iter()
                .map(|l| {
                    let label = self.labels.get(l.generator()).map(String::as_str).unwrap_or("?");
                    if l.is_inverse() {
                        format!("{label}^-1")
                    } else {
                        label.to_string()
                    }
                })
                .collect::<Vec<_>>()
                .join("."),
            GroupElement::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
                format!("( {} )", parts.join(", "))
            }
        }
    }

    /// Inverse of [`render`](Self::render). Words may use integer powers
    /// (`x^3`, `y^-2`) and need not be reduced.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement> {
        let text = text.trim();
        if text == "e" {
            return Ok(self.identity());
        }
        match self.kind {
            GroupKind::FreeGroup => {
                let mut word = Vec::new();
                for token in text.split('.') {
                    let token = token.trim();
                    let (label, power) = match token.split_once('^') {
                        Some((l, p)) => (
                            l.trim(),
                            p.trim()
                                .parse::<i64>()
                                .map_err(|_| Error::Parse(format!("bad exponent in {token:?}")))?,
                        ),
                        None => (token, 1),
                    };
                    let generator = self
                        .labels
                        .iter()
                        .position(|l| l == label)
                        .ok_or_else(|| Error::Parse(format!("unknown generator {label:?}")))?;
                    let letter = Letter::new(generator, power < 0);
                    for _ in 0..power.unsigned_abs() {
                        push_reduced(&mut word, letter);
                    }
                }
                Ok(GroupElement::Word(word))
            }
            GroupKind::FreeAbelian => {
                let inner = text
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(|| Error::Parse(format!("expected ( i, j, ... ), got {text:?}")))?;
                let coords = inner
                    .split(',')
                    .map(|c| c.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad coordinate {c:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                if coords.len() != self.rank {
                    return Err(Error::Parse(format!(
                        "expected {} coordinates, got {}",
                        self.rank,
                        coords.len()
                    )));
                }
                Ok(GroupElement::Vector(coords))
            }
        }
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::FreeGroup => write!(f, "F{}<{}>", self.rank, self.labels.join(",")),
            GroupKind::FreeAbelian => write!(f, "Z^{}", self.rank),
        }
    }
}

/// Appends a letter to a reduced word, cancelling against the last letter.
pub(crate) fn push_reduced(word: &mut Vec<Letter>, l: Letter) {
    if word.last() == Some(&l.inverse()) {
        word.pop();
    } else {
        word.push(l);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> GroupDescriptor {
        GroupDescriptor::free_group(2).unwrap()
    }

    fn z2() -> GroupDescriptor {
        GroupDescriptor::free_abelian(2).unwrap()
    }

    #[test]
    fn letter_slots_follow_generator_order() {
        let order: Vec<usize> = [Letter::new(0, false), Letter::new(0, true), Letter::new(1, false), Letter::new(1, true)]
            .iter()
            .map(|l| l.slot())
            .collect();
        assert_eq!(order, vec![0, 1, 2, 3]);
        for s in 0..8 {
            assert_eq!(Letter::from_slot(s).slot(), s);
        }
    }

    #[test]
    fn cancellation_gives_identity() {
        let g = f2();
        let x = g.parse_element("x").unwrap();
        let xi = g.parse_element("x^-1").unwrap();
        assert_eq!(g.multiply(&x, &xi).unwrap(), g.identity());
    }

    #[test]
    fn partial_reduction_then_concatenation() {
        let g = f2();
        let a = g.parse_element("x.y").unwrap();
        let b = g.parse_element("y^-1.x").unwrap();
        assert_eq!(g.render(&g.multiply(&a, &b).unwrap()), "x.x");
    }

    #[test]
    fn abelian_product_is_componentwise() {
        let g = z2();
        let p = g.multiply(&GroupElement::Vector(vec![1, 0]), &GroupElement::Vector(vec![0, 1])).unwrap();
        assert_eq!(p, GroupElement::Vector(vec![1, 1]));
    }

    #[test]
    fn inverses() {
        let g = f2();
        assert_eq!(g.inverse(&g.identity()).unwrap(), g.identity());
        let a = g.parse_element("x.y^-1").unwrap();
        assert_eq!(g.render(&g.inverse(&a).unwrap()), "y.x^-1");
        let z = z2();
        assert_eq!(z.inverse(&GroupElement::Vector(vec![2, -1])).unwrap(), GroupElement::Vector(vec![-2, 1]));
    }

    #[test]
    fn word_lengths() {
        let g = f2();
        assert_eq!(g.word_length(&g.identity()).unwrap(), 0);
        assert_eq!(g.word_length(&g.parse_element("x.y.x^-1").unwrap()).unwrap(), 3);
        assert_eq!(z2().word_length(&GroupElement::Vector(vec![3, -2])).unwrap(), 5);
    }

    #[test]
    fn mismatched_descriptor_is_usage_error() {
        let g = f2();
        let v = GroupElement::Vector(vec![1, 0]);
        assert!(matches!(g.multiply(&g.identity(), &v), Err(Error::Usage(_))));
        let unreduced = GroupElement::Word(vec![Letter::new(0, false), Letter::new(0, true)]);
        assert!(matches!(g.word_length(&unreduced), Err(Error::Usage(_))));
        let z3 = GroupDescriptor::free_abelian(3).unwrap();
        assert!(z3.multiply(&z3.identity(), &v).is_err());
    }

    #[test]
    fn render_parse_roundtrip() {
        let g = f2();
        for text in ["e", "x", "x^-1.y", "y.y.x^-1"] {
            assert_eq!(g.render(&g.parse_element(text).unwrap()), text);
        }
        let z = z2();
        assert_eq!(z.render(&z.parse_element("(3, -1)").unwrap()), "( 3, -1 )");
        assert_eq!(z.render(&z.identity()), "e");
        assert_eq!(g.render(&g.parse_element("x^3.x^-2").unwrap()), "x");
    }

    #[test]
    fn invalid_descriptors() {
        assert!(GroupDescriptor::free_group(0).is_err());
        assert!(GroupDescriptor::with_labels(GroupKind::FreeGroup, vec!["a".into(), "a".into()]).is_err());
        assert!(GroupDescriptor::with_labels(GroupKind::FreeGroup, vec!["e".into()]).is_err());
    }

    #[test]
    fn generator_slots_roundtrip() {
        for g in [f2(), z2(), GroupDescriptor::free_group(3).unwrap()] {
            for s in 0..g.generator_count() {
                assert_eq!(g.generator_slot(&g.generator(s)), Some(s));
            }
            assert_eq!(g.generator_slot(&g.identity()), None);
        }
    }
}
