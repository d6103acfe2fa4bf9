//! Vector kernels with a fixed reduction order, so parallel results do not
//! depend on the thread count.

use crate::scalar::Scalar;
use rayon::prelude::*;

const CHUNK: usize = 8192;
/// Below this length the kernels run on the calling thread; the chunked
/// reduction order is the same either way.
pub(crate) const PAR_THRESHOLD: usize = 1 << 16;

fn chunk_dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (p, q)| acc + p.clone() * q.clone())
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    if a.len() < PAR_THRESHOLD {
        return a
            .chunks(CHUNK)
            .zip(b.chunks(CHUNK))
            .fold(T::zero(), |acc, (x, y)| acc + chunk_dot(x, y));
    }
    let partials: Vec<T> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| chunk_dot(x, y))
        .collect();
    partials.into_iter().fold(T::zero(), |acc, p| acc + p)
}

pub fn norm2<T: Scalar + num_traits::Float>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn norm1<T: Scalar>(a: &[T]) -> T {
    let partials: Vec<T> = a
        .par_chunks(CHUNK)
        .map(|x| x.iter().fold(T::zero(), |acc, p| acc + p.abs()))
        .collect();
    partials.into_iter().fold(T::zero(), |acc, p| acc + p)
}

pub fn norm_inf<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, x| {
        let v = x.abs();
        if v > m {
            v
        } else {
            m
        }
    })
}

/// `y += alpha * x`
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    if y.len() < PAR_THRESHOLD {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = yi.clone() + alpha.clone() * xi.clone();
        }
        return;
    }
    y.par_iter_mut()
        .with_min_len(CHUNK)
        .zip(x.par_iter())
        .for_each(|(yi, xi)| *yi = yi.clone() + alpha.clone() * xi.clone());
}

pub fn scale<T: Scalar>(alpha: T, x: &mut [T]) {
    if x.len() < PAR_THRESHOLD {
        for xi in x.iter_mut() {
            *xi = alpha.clone() * xi.clone();
        }
        return;
    }
    x.par_iter_mut()
        .with_min_len(CHUNK)
        .for_each(|xi| *xi = alpha.clone() * xi.clone());
}
