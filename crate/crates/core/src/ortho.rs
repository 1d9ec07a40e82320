//! Incremental Gram-Schmidt factorization of a growing column subset.
//!
//! Columns are appended and removed in stack order, which is exactly what a
//! depth-first subset enumeration or a forward-selection path needs. Each new
//! column is orthogonalized twice against the current basis, and the residual
//! of `y` is updated in place, so RSS never goes through normal equations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative norm below which a column is treated as lying in the span of
/// the current basis.
const RANK_TOL: f64 = 1e-10;

pub(crate) struct OrthoPath<'a> {
    x: &'a DMatrix<f64>,
    cols: Vec<usize>,
    q: Vec<Vec<f64>>,
    /// Column `k` of the triangular factor: projections of the `k`-th
    /// column onto `q[0..k]`, then its residual norm.
    r: Vec<Vec<f64>>,
    /// `resid[k]` is the residual of `y` after projecting on `q[0..k]`.
    resid: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

impl<'a> OrthoPath<'a> {
    pub(crate) fn new(x: &'a DMatrix<f64>, y: &'a DVector<f64>) -> Self {
        Self {
            x,
            cols: Vec::new(),
            q: Vec::new(),
            r: Vec::new(),
            resid: vec![y.as_slice().to_vec()],
        }
    }

    pub(crate) fn columns(&self) -> &[usize] {
        &self.cols
    }

    pub(crate) fn rss(&self) -> f64 {
        let e = self.resid.last().expect("base residual is never popped");
        dot(e, e)
    }

    /// Orthogonalized copy of column `j`, and its relative residual norm.
    fn orthogonalize(&self, j: usize) -> (Vec<f64>, Vec<f64>, f64, f64) {
        let mut v: Vec<f64> = self.x.column(j).iter().copied().collect();
        let orig = dot(&v, &v).sqrt();
        let mut proj = vec![0.0; self.q.len()];
        for _pass in 0..2 {
            for (i, qi) in self.q.iter().enumerate() {
                let c = dot(qi, &v);
                proj[i] += c;
                for (vk, qk) in v.iter_mut().zip(qi) {
                    *vk -= c * qk;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        (v, proj, norm, orig)
    }

    /// RSS after tentatively appending column `j`, without changing state.
    pub(crate) fn rss_with(&self, j: usize) -> Result<f64> {
        let (v, _, norm, orig) = self.orthogonalize(j);
        if orig.is_nan() || orig <= 0.0 || norm <= RANK_TOL * orig {
            return Err(self.singular(j));
        }
        let e = self.resid.last().unwrap();
        let c = dot(&v, e) / norm;
        let new: f64 = e
            .iter()
            .zip(&v)
            .map(|(ek, vk)| {
                let d = ek - c * vk / norm;
                d * d
            })
            .sum();
        Ok(new)
    }

    pub(crate) fn push(&mut self, j: usize) -> Result<f64> {
        if self.cols.len() >= self.x.nrows() {
            return Err(self.singular(j));
        }
        let (mut v, mut proj, norm, orig) = self.orthogonalize(j);
        if orig.is_nan() || orig <= 0.0 || norm <= RANK_TOL * orig {
            return Err(self.singular(j));
        }
        v.iter_mut().for_each(|vk| *vk /= norm);
        proj.push(norm);
        let e = self.resid.last().unwrap();
        let c = dot(&v, e);
        let next: Vec<f64> = e.iter().zip(&v).map(|(ek, qk)| ek - c * qk).collect();
        self.cols.push(j);
        self.q.push(v);
        self.r.push(proj);
        self.resid.push(next);
        Ok(self.rss())
    }

    pub(crate) fn pop(&mut self) {
        if self.cols.pop().is_some() {
            self.q.pop();
            self.r.pop();
            self.resid.pop();
        }
    }

    /// Least-squares coefficients for the current columns, in push order.
    pub(crate) fn coefficients(&self) -> Vec<f64> {
        let k = self.cols.len();
        // Q^T y, taken against the successive residuals (modified Gram-Schmidt).
        let qty: Vec<f64> = (0..k).map(|i| dot(&self.q[i], &self.resid[i])).collect();
        let mut beta = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = qty[i];
            for (j, bj) in beta.iter().enumerate().skip(i + 1) {
                acc -= self.r[j][i] * bj;
            }
            beta[i] = acc / self.r[i][i];
        }
        beta
    }

    fn singular(&self, j: usize) -> Error {
        let mut subset = self.cols.clone();
        subset.push(j);
        subset.sort_unstable();
        Error::Singular { subset }
    }

    pub(crate) fn x_cols(&self) -> usize {
        self.x.ncols()
    }
}

pub(crate) fn validate_subset(p: usize, subset: &[usize]) -> Result<()> {
    let mut seen = vec![false; p];
    for &j in subset {
        if j >= p {
            return Err(Error::domain(format!("column index {j} out of range for p = {p}")));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::domain(format!("column index {j} repeated in subset")));
        }
    }
    Ok(())
}
