//! Breadth-first enumeration of word-metric balls `B(e, R)`.
//!
//! Indices are assigned layer by layer. Within a layer, children appear in
//! parent-index order and then in generator order `x, x^-1, y, y^-1, ...`;
//! for free abelian groups an element reached twice keeps its first index.
//! Consequently `B(e, R)` is an index prefix of `B(e, R + 1)`.

use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupElement, GroupKind, Letter};
use std::collections::HashMap;
use std::io::Write;
use std::ops::Range;

pub const DEFAULT_NODE_BUDGET: usize = 4_000_000;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
enum Storage {
    /// Free group: the ball is a tree; a word is its parent's word plus one letter.
    Tree { parent: Vec<u32>, last: Vec<Letter> },
    Lattice { coords: Vec<i64>, lookup: HashMap<Vec<i64>, u32> },
}

/// Bijection between `B(e, R)` and `0..N`, with word lengths and the
/// Cayley-graph adjacency restricted to the ball.
#[derive(Debug, Clone)]
pub struct BallIndex {
    group: GroupDescriptor,
    radius: u32,
    lengths: Vec<u32>,
    layer_starts: Vec<usize>,
    // neighbors[i * |S| + slot] = index of g_i * s, or NONE outside the ball
    neighbors: Vec<u32>,
    storage: Storage,
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Exact `|B(e, R)|`, or `None` on `u64` overflow.
pub fn ball_size(group: &GroupDescriptor, radius: u32) -> Option<u64> {
    let r = radius as u64;
    match group.kind() {
        GroupKind::FreeGroup => {
            let branching = 2 * group.rank() as u64 - 1;
            let mut sphere = 2 * group.rank() as u64;
            let mut total: u64 = 1;
            for _ in 0..r {
                total = total.checked_add(sphere)?;
                sphere = sphere.checked_mul(branching)?;
            }
            Some(total)
        }
        GroupKind::FreeAbelian => {
            // sum_k 2^k C(d, k) C(R, k)
            let d = group.rank() as u64;
            let mut total: u64 = 0;
            for k in 0..=d.min(r) {
                let term = binomial(d, k)?.checked_mul(binomial(r, k)?)?.checked_mul(1u64.checked_shl(k as u32)?)?;
                total = total.checked_add(term)?;
            }
            Some(total)
        }
    }
}

fn capacity_error(group: &GroupDescriptor, radius: u32, budget: usize) -> Error {
    Error::Capacity {
        what: format!("ball B(e,{radius}) in {group}"),
        needed: ball_size(group, radius).map_or_else(|| "more than 2^64".to_string(), |n| n.to_string()),
        budget,
    }
}

/// Enumerates `B(e, radius)`, refusing if it holds more than `budget` elements.
pub fn ball(group: &GroupDescriptor, radius: u32, budget: usize) -> Result<BallIndex> {
    match ball_size(group, radius) {
        Some(n) if n <= budget as u64 && n < NONE as u64 => {}
        _ => return Err(capacity_error(group, radius, budget)),
    }
    Ok(match group.kind() {
        GroupKind::FreeGroup => build_tree(group, radius),
        GroupKind::FreeAbelian => build_lattice(group, radius),
    })
}

fn build_tree(group: &GroupDescriptor, radius: u32) -> BallIndex {
    let degree = group.generator_count();
    let size = ball_size(group, radius).expect("checked by caller") as usize;
    let mut parent = Vec::with_capacity(size);
    let mut last = Vec::with_capacity(size);
    let mut lengths = Vec::with_capacity(size);
    let mut neighbors = vec![NONE; size * degree];
    let mut layer_starts = vec![0usize];

    parent.push(NONE);
    last.push(Letter::new(0, false)); // unused for e
    lengths.push(0);
    let mut layer = 0..1usize;
    for k in 0..radius {
        let next_start = parent.len();
        for p in layer.clone() {
            for slot in 0..degree {
                let l = Letter::from_slot(slot);
                if p != 0 && l == last[p].inverse() {
                    continue;
                }
                let c = parent.len();
                parent.push(p as u32);
                last.push(l);
                lengths.push(k + 1);
                neighbors[p * degree + slot] = c as u32;
                neighbors[c * degree + l.inverse().slot()] = p as u32;
            }
        }
        layer_starts.push(next_start);
        layer = next_start..parent.len();
    }
    layer_starts.push(parent.len());
    debug_assert_eq!(parent.len(), size);
    BallIndex {
        group: group.clone(),
        radius,
        lengths,
        layer_starts,
        neighbors,
        storage: Storage::Tree { parent, last },
    }
}

fn build_lattice(group: &GroupDescriptor, radius: u32) -> BallIndex {
    let d = group.rank();
    let degree = group.generator_count();
    let size = ball_size(group, radius).expect("checked by caller") as usize;
    let mut coords: Vec<i64> = Vec::with_capacity(size * d);
    let mut lookup: HashMap<Vec<i64>, u32> = HashMap::with_capacity(size);
    let mut lengths = Vec::with_capacity(size);
    let mut neighbors = vec![NONE; size * degree];
    let mut layer_starts = vec![0usize];

    coords.extend(std::iter::repeat_n(0, d));
    lookup.insert(vec![0; d], 0);
    lengths.push(0u32);
    let mut layer = 0..1usize;
    for k in 0..radius {
        let next_start = lengths.len();
        for p in layer.clone() {
            for slot in 0..degree {
                let l = Letter::from_slot(slot);
                let mut c: Vec<i64> = coords[p * d..(p + 1) * d].to_vec();
                let axis = l.generator();
                let step = if l.is_inverse() { -1 } else { 1 };
                // only steps that move outward create edges to the next layer
                if c[axis] * step < 0 {
                    continue;
                }
                c[axis] += step;
                let idx = match lookup.get(&c) {
                    Some(&i) => i as usize,
                    None => {
                        let i = lengths.len();
                        coords.extend_from_slice(&c);
                        lookup.insert(c, i as u32);
                        lengths.push(k + 1);
                        i
                    }
                };
                neighbors[p * degree + slot] = idx as u32;
                neighbors[idx * degree + l.inverse().slot()] = p as u32;
            }
        }
        layer_starts.push(next_start);
        layer = next_start..lengths.len();
    }
    layer_starts.push(lengths.len());
    debug_assert_eq!(lengths.len(), size);
    BallIndex {
        group: group.clone(),
        radius,
        lengths,
        layer_starts,
        neighbors,
        storage: Storage::Lattice { coords, lookup },
    }
}

impl BallIndex {
    pub fn group(&self) -> &GroupDescriptor {
        &self.group
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn word_length(&self, i: usize) -> u32 {
        self.lengths[i]
    }

    pub fn word_lengths(&self) -> &[u32] {
        &self.lengths
    }

    /// Index range of the sphere of radius `k` (empty when `k > radius`).
    pub fn layer(&self, k: u32) -> Range<usize> {
        if k > self.radius {
            return self.len()..self.len();
        }
        self.layer_starts[k as usize]..self.layer_starts[k as usize + 1]
    }

    pub fn sphere_sizes(&self) -> Vec<usize> {
        (0..=self.radius).map(|k| self.layer(k).len()).collect()
    }

    /// Index of `g_i * s` where `s` is the generator at `slot`.
    #[inline]
    pub fn neighbor(&self, i: usize, slot: usize) -> Option<usize> {
        let j = self.neighbors[i * self.group.generator_count() + slot];
        (j != NONE).then_some(j as usize)
    }

    pub fn element(&self, i: usize) -> GroupElement {
        match &self.storage {
            Storage::Tree { parent, last } => {
                let mut word = Vec::with_capacity(self.lengths[i] as usize);
                let mut node = i;
                while node != 0 {
                    word.push(last[node]);
                    node = parent[node] as usize;
                }
                word.reverse();
                GroupElement::Word(word)
            }
            Storage::Lattice { coords, .. } => {
                let d = self.group.rank();
                GroupElement::Vector(coords[i * d..(i + 1) * d].to_vec())
            }
        }
    }

    pub fn index_of(&self, a: &GroupElement) -> Option<usize> {
        if !self.group.contains(a) {
            return None;
        }
        match (&self.storage, a) {
            (Storage::Tree { .. }, GroupElement::Word(w)) => {
                if w.len() > self.radius as usize {
                    return None;
                }
                w.iter().try_fold(0usize, |node, l| self.neighbor(node, l.slot()))
            }
            (Storage::Lattice { lookup, .. }, GroupElement::Vector(v)) => lookup.get(v).map(|&i| i as usize),
            _ => None,
        }
    }

    /// Writes the `index,word_length,element` dump.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let io = |e: csv::Error| Error::Io(e.into());
        w.write_record(["index", "word_length", "element"]).map_err(io)?;
        for i in 0..self.len() {
            let el = self.group.render(&self.element(i));
            w.write_record([i.to_string(), self.lengths[i].to_string(), el]).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}
