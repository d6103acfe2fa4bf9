//! The convolution operator `(Mf)(g) = sum_s mu(s) f(g s)` restricted to a
//! ball (Dirichlet truncation: a principal submatrix, no reweighting).

use crate::ball::{ball, BallIndex};
use crate::error::{Error, Result};
use crate::linalg::PAR_THRESHOLD;
use crate::measure::ProbabilityMeasure;
use crate::scalar::{partial_max, Scalar};
use rayon::prelude::*;
use std::io::Write;
use std::sync::Arc;

const PAR_ROWS: usize = 4096;

/// Sparse symmetric matrix `m_ij = mu(g_i^-1 g_j)` over `B(e, R)` in CSR form.
#[derive(Debug, Clone)]
pub struct TruncatedConvolutionOperator<T> {
    ball: Arc<BallIndex>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<T>,
    interior: Vec<bool>,
}

/// Builds `M_R` for `measure` on `B(e, radius)`.
pub fn build_operator<T: Scalar>(
    measure: &ProbabilityMeasure,
    radius: u32,
    budget: usize,
) -> Result<TruncatedConvolutionOperator<T>> {
    if radius < 1 {
        return Err(Error::usage("operator radius must be at least 1"));
    }
    let ball = Arc::new(ball(measure.group(), radius, budget)?);
    TruncatedConvolutionOperator::on_ball(ball, measure)
}

impl<T: Scalar> TruncatedConvolutionOperator<T> {
    pub fn on_ball(ball: Arc<BallIndex>, measure: &ProbabilityMeasure) -> Result<Self> {
        if ball.group() != measure.group() {
            return Err(Error::usage(format!(
                "measure lives on {}, ball on {}",
                measure.group(),
                ball.group()
            )));
        }
        let n = ball.len();
        let degree = ball.group().generator_count();
        let weights: Vec<Option<T>> = measure
            .slot_weights()
            .iter()
            .map(|w| (!num_traits::Zero::is_zero(w)).then(|| T::from_rational(w)))
            .collect();
        let reach = measure.max_support_length();
        let interior_limit = ball.radius().saturating_sub(reach);
        let interior_ok = ball.radius() >= reach;

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(n * degree);
        let mut values = Vec::with_capacity(n * degree);
        let mut interior = Vec::with_capacity(n);
        let mut row: Vec<(u32, T)> = Vec::with_capacity(degree);
        row_ptr.push(0);
        for i in 0..n {
            row.clear();
            for (slot, w) in weights.iter().enumerate() {
                if let (Some(w), Some(j)) = (w, ball.neighbor(i, slot)) {
                    row.push((j as u32, w.clone()));
                }
            }
            row.sort_by_key(|(j, _)| *j);
            for (j, w) in row.drain(..) {
                cols.push(j);
                values.push(w);
            }
            row_ptr.push(cols.len());
            interior.push(interior_ok && ball.word_length(i) <= interior_limit);
        }
        Ok(TruncatedConvolutionOperator {
            ball,
            row_ptr,
            cols,
            values,
            interior,
        })
    }

    pub fn ball(&self) -> &BallIndex {
        &self.ball
    }

    pub fn shared_ball(&self) -> Arc<BallIndex> {
        Arc::clone(&self.ball)
    }

    pub fn radius(&self) -> u32 {
        self.ball.radius()
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.values[r])
    }

    pub fn row_entry_count(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Rows whose full stencil lies inside the ball.
    pub fn is_interior(&self, i: usize) -> bool {
        self.interior[i]
    }

    pub fn interior_flags(&self) -> &[bool] {
        &self.interior
    }

    /// Stored entry `m_ij`, or `None` when it is a structural zero.
    pub fn entry(&self, i: usize, j: usize) -> Option<&T> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&(j as u32)).ok().map(|k| &vals[k])
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::usage(format!(
                "vector has dimension {len}, operator has {}",
                self.dim()
            )));
        }
        Ok(())
    }

    #[inline]
    fn row_dot(&self, i: usize, f: &[T]) -> T {
        let (cols, vals) = self.row(i);
        cols.iter()
            .zip(vals)
            .fold(T::zero(), |acc, (&j, w)| acc + w.clone() * f[j as usize].clone())
    }

    /// `Mf`. Rows are computed independently, so the parallel result is
    /// bitwise identical to the sequential one.
    pub fn matvec(&self, f: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.dim()];
        self.matvec_into(f, &mut out)?;
        Ok(out)
    }

    pub fn matvec_into(&self, f: &[T], out: &mut [T]) -> Result<()> {
        self.check_dim(f.len())?;
        self.check_dim(out.len())?;
        if out.len() < PAR_THRESHOLD {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.row_dot(i, f);
            }
        } else {
            out.par_iter_mut()
                .with_min_len(PAR_ROWS)
                .enumerate()
                .for_each(|(i, o)| *o = self.row_dot(i, f));
        }
        Ok(())
    }

    /// `(I - M) f`, the discrete Laplacian.
    pub fn laplacian_apply(&self, f: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.dim()];
        self.laplacian_apply_into(f, &mut out)?;
        Ok(out)
    }

    pub fn laplacian_apply_into(&self, f: &[T], out: &mut [T]) -> Result<()> {
        self.check_dim(f.len())?;
        self.check_dim(out.len())?;
        let row = |(i, o): (usize, &mut T)| *o = f[i].clone() - self.row_dot(i, f);
        if out.len() < PAR_THRESHOLD {
            out.iter_mut().enumerate().for_each(row);
        } else {
            out.par_iter_mut().with_min_len(PAR_ROWS).enumerate().for_each(row);
        }
        Ok(())
    }

    pub fn schur_audit(&self) -> SchurAudit<T> {
        let n = self.dim();
        let mut col_l1 = vec![T::zero(); n];
        let mut col_support = vec![0usize; n];
        let mut max_row_l1 = T::zero();
        let mut max_row_support = 0;
        let mut interior_support = (usize::MAX, 0usize);
        let mut boundary_support = (usize::MAX, 0usize);
        let mut interior_rows_stochastic = true;
        let mut symmetric = true;
        let mut distinct: Vec<T> = Vec::new();

        for i in 0..n {
            let (cols, vals) = self.row(i);
            let mut row_l1 = T::zero();
            for (&j, v) in cols.iter().zip(vals) {
                row_l1 = row_l1 + v.abs();
                col_l1[j as usize] = col_l1[j as usize].clone() + v.abs();
                col_support[j as usize] += 1;
                if !distinct.contains(v) {
                    distinct.push(v.clone());
                }
                if self.entry(j as usize, i) != Some(v) {
                    symmetric = false;
                }
            }
            let count = cols.len();
            max_row_support = max_row_support.max(count);
            let range = if self.interior[i] {
                if !row_l1.is_one() {
                    interior_rows_stochastic = false;
                }
                &mut interior_support
            } else {
                &mut boundary_support
            };
            range.0 = range.0.min(count);
            range.1 = range.1.max(count);
            if row_l1 > max_row_l1 {
                max_row_l1 = row_l1;
            }
        }
        distinct.sort_by(|a, b| a.partial_cmp(b).expect("entries are comparable"));
        let interior_rows = self.interior.iter().filter(|&&b| b).count();
        let fix = |r: (usize, usize)| if r.0 == usize::MAX { (0, 0) } else { r };
        SchurAudit {
            dim: n,
            nnz: self.nnz(),
            max_row_l1,
            max_col_l1: partial_max(col_l1).unwrap_or_else(T::zero),
            distinct_values: distinct,
            max_row_support,
            max_col_support: col_support.iter().copied().max().unwrap_or(0),
            interior_rows,
            boundary_rows: n - interior_rows,
            interior_support: fix(interior_support),
            boundary_support: fix(boundary_support),
            interior_rows_stochastic,
            symmetric,
        }
    }

    /// Coordinate-list export: header `# n=<size> nnz=<count>`, then `i j value`.
    pub fn write_coo<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# n={} nnz={}", self.dim(), self.nnz())?;
        for i in 0..self.dim() {
            let (cols, vals) = self.row(i);
            for (j, v) in cols.iter().zip(vals) {
                writeln!(out, "{i} {j} {:.16e}", v.to_f64_lossy())?;
            }
        }
        Ok(())
    }
}

/// Schur-algebra membership data for a truncated operator: uniform row and
/// column `l1` bounds, entry values and support sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurAudit<T> {
    pub dim: usize,
    pub nnz: usize,
    pub max_row_l1: T,
    pub max_col_l1: T,
    /// Sorted distinct stored values (structural zeros excluded).
    pub distinct_values: Vec<T>,
    pub max_row_support: usize,
    pub max_col_support: usize,
    pub interior_rows: usize,
    pub boundary_rows: usize,
    /// (min, max) stored entries over interior rows.
    pub interior_support: (usize, usize),
    /// (min, max) stored entries over boundary rows.
    pub boundary_support: (usize, usize),
    pub interior_rows_stochastic: bool,
    pub symmetric: bool,
}

impl<T: Scalar> SchurAudit<T> {
    /// All properties the truncation of an admissible measure must satisfy.
    pub fn failures(&self, measure: &ProbabilityMeasure) -> Vec<String> {
        let mut out = Vec::new();
        let support = measure.support().len();
        if !self.symmetric {
            out.push("matrix is not symmetric".to_string());
        }
        if self.max_row_l1 > T::one() {
            out.push(format!("row l1 norm {:?} exceeds 1", self.max_row_l1));
        }
        if self.max_col_l1 > T::one() {
            out.push(format!("column l1 norm {:?} exceeds 1", self.max_col_l1));
        }
        let weights: Vec<T> = measure.support().iter().map(|(_, w)| T::from_rational(w)).collect();
        if let Some(v) = self.distinct_values.iter().find(|v| !weights.contains(v)) {
            out.push(format!("entry {v:?} is not a support weight"));
        }
        if self.interior_rows > 0 && self.interior_support != (support, support) {
            out.push(format!(
                "interior row support {:?} differs from |supp mu| = {support}",
                self.interior_support
            ));
        }
        if self.max_row_support > support || self.max_col_support > support {
            out.push(format!("some row or column has more than {support} entries"));
        }
        if !self.interior_rows_stochastic {
            out.push("an interior row does not sum to 1".to_string());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::DEFAULT_NODE_BUDGET;
    use crate::group::GroupDescriptor;
    use num_rational::BigRational;

    fn f2_mu() -> ProbabilityMeasure {
        ProbabilityMeasure::standard(&GroupDescriptor::free_group(2).unwrap())
    }

    fn z2_mu() -> ProbabilityMeasure {
        ProbabilityMeasure::standard(&GroupDescriptor::free_abelian(2).unwrap())
    }

    #[test]
    fn radius_one_star() {
        let m: TruncatedConvolutionOperator<f64> = build_operator(&f2_mu(), 1, 100).unwrap();
        assert_eq!(m.dim(), 5);
        assert_eq!(m.row(0), (&[1u32, 2, 3, 4][..], &[0.25; 4][..]));
        for i in 1..5 {
            assert_eq!(m.row(i), (&[0u32][..], &[0.25][..]));
            assert!(!m.is_interior(i));
        }
        assert!(m.is_interior(0));
    }

    #[test]
    fn tree_edge_count() {
        for r in 1..=6 {
            let m: TruncatedConvolutionOperator<f64> = build_operator(&f2_mu(), r, DEFAULT_NODE_BUDGET).unwrap();
            assert_eq!(m.nnz(), 2 * (m.dim() - 1));
        }
    }

    #[test]
    fn lattice_radius_one() {
        let m: TruncatedConvolutionOperator<f64> = build_operator(&z2_mu(), 1, 100).unwrap();
        assert_eq!(m.row_entry_count(0), 4);
        let i = m.ball().index_of(&crate::GroupElement::Vector(vec![1, 0])).unwrap();
        assert_eq!(m.row(i), (&[0u32][..], &[0.25][..]));
    }

    #[test]
    fn matvec_examples() {
        let m: TruncatedConvolutionOperator<f64> = build_operator(&f2_mu(), 3, 1000).unwrap();
        let mut delta = vec![0.0; m.dim()];
        delta[0] = 1.0;
        let out = m.matvec(&delta).unwrap();
        let expected: Vec<f64> = (0..m.dim()).map(|i| if (1..5).contains(&i) { 0.25 } else { 0.0 }).collect();
        assert_eq!(out, expected);

        let ones = vec![1.0; m.dim()];
        let out = m.matvec(&ones).unwrap();
        for i in 0..m.dim() {
            if m.is_interior(i) {
                assert_eq!(out[i], 1.0);
            }
        }

        let m1: TruncatedConvolutionOperator<f64> = build_operator(&f2_mu(), 1, 100).unwrap();
        let out = m1.matvec(&[0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(out, vec![0.25, 0.0, 0.0, 0.0, 0.0]);
        assert!(m1.matvec(&[1.0]).is_err());
    }

    #[test]
    fn audit_standard_free_group() {
        for r in 2..=6 {
            let m: TruncatedConvolutionOperator<f64> = build_operator(&f2_mu(), r, DEFAULT_NODE_BUDGET).unwrap();
            let a = m.schur_audit();
            assert_eq!(a.distinct_values, vec![0.25]);
            assert_eq!(a.interior_support, (4, 4));
            assert_eq!(a.boundary_support, (1, 1));
            assert_eq!(a.max_row_l1, 1.0);
            assert_eq!(a.max_col_l1, 1.0);
            assert!(a.symmetric);
            assert!(a.failures(&f2_mu()).is_empty());
        }
    }

    #[test]
    fn audit_exact_entries() {
        let m: TruncatedConvolutionOperator<BigRational> = build_operator(&z2_mu(), 4, 1000).unwrap();
        let a = m.schur_audit();
        assert_eq!(a.distinct_values, vec![BigRational::new(1.into(), 4.into())]);
        assert_eq!(a.interior_support, (4, 4));
        assert!(a.interior_rows_stochastic);
        assert!(a.failures(&z2_mu()).is_empty());
    }

    #[test]
    fn coo_export() {
        let m: TruncatedConvolutionOperator<f64> = build_operator(&f2_mu(), 1, 100).unwrap();
        let mut buf = Vec::new();
        m.write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# n=5 nnz=8"));
        assert_eq!(lines.next(), Some("0 1 2.5000000000000000e-1"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn radius_zero_rejected() {
        assert!(build_operator::<f64>(&f2_mu(), 0, 100).is_err());
    }
}
