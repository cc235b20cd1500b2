//! Sparse symmetric matrices and an up-looking `LDLᵀ` factorization with a
//! geometric nested-dissection ordering.
//!
//! Matrices are stored in compressed-column form with both triangles present.
//! The factorization does not pivot: it handles symmetric positive definite
//! matrices and saddle-point matrices whose multiplier rows are eliminated
//! after the unknowns they couple (pass them as `tail` to
//! [`nested_dissection`]).

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Vec2;
use crate::{Error, Result};

/// Sparsity pattern of a square matrix in compressed-column form with
/// sorted row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

impl Pattern {
    /// Builds a symmetric pattern from `(i, j)` pairs; both `(i, j)` and
    /// `(j, i)` are inserted along with the full diagonal.
    pub fn symmetric<I: IntoIterator<Item = (usize, usize)>>(n: usize, entries: I) -> Self {
        let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        for (i, j) in entries {
            assert!(i < n && j < n, "pattern entry out of range");
            pairs.push((j, i));
            if i != j {
                pairs.push((i, j));
            }
        }
        // sort by (column, row)
        pairs.sort_unstable();
        pairs.dedup();
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(pairs.len());
        for &(c, r) in &pairs {
            col_ptr[c + 1] += 1;
            row_idx.push(r);
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        Pattern {
            n,
            col_ptr,
            row_idx,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    /// Storage position of entry `(i, j)`.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.col_ptr[j];
        self.column(j).binary_search(&i).ok().map(|k| start + k)
    }
}

/// Symmetric sparse matrix sharing a [`Pattern`].
#[derive(Debug, Clone)]
pub struct SymmetricMatrix<'p> {
    pattern: &'p Pattern,
    pub values: Vec<f64>,
}

impl<'p> SymmetricMatrix<'p> {
    pub fn zeros(pattern: &'p Pattern) -> Self {
        SymmetricMatrix {
            pattern,
            values: vec![0.0; pattern.nnz()],
        }
    }

    pub fn pattern(&self) -> &'p Pattern {
        self.pattern
    }

    pub fn dim(&self) -> usize {
        self.pattern.n
    }

    /// Adds `v` to entry `(i, j)` only; callers assembling symmetric element
    /// matrices visit both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self
            .pattern
            .position(i, j)
            .expect("entry outside the sparsity pattern");
        self.values[p] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pattern.position(i, j).map_or(0.0, |p| self.values[p])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        for j in 0..self.dim() {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for p in self.pattern.col_ptr[j]..self.pattern.col_ptr[j + 1] {
                y[self.pattern.row_idx[p]] += self.values[p] * xj;
            }
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            for p in self.pattern.col_ptr[j]..self.pattern.col_ptr[j + 1] {
                out[self.pattern.row_idx[p] * n + j] = self.values[p];
            }
        }
        out
    }
}

/// Fill-reducing ordering by recursive coordinate bisection with one-sided
/// vertex separators. `coords[i]` locates unknown `i`; indices in `tail` are
/// excluded from the dissection and eliminated last, in the given order.
pub fn nested_dissection(pattern: &Pattern, coords: &[Vec2], tail: &[usize]) -> Vec<usize> {
    let n = pattern.dim();
    assert_eq!(coords.len(), n, "one coordinate per unknown");
    let mut excluded = vec![false; n];
    for &t in tail {
        excluded[t] = true;
    }
    let ids: Vec<usize> = (0..n).filter(|&i| !excluded[i]).collect();
    let mut mark = vec![0u8; n];
    let mut order = Vec::with_capacity(n);
    dissect(ids, pattern, coords, &mut mark, &mut order);
    order.extend_from_slice(tail);
    order
}

fn dissect(
    mut ids: Vec<usize>,
    pattern: &Pattern,
    coords: &[Vec2],
    mark: &mut [u8],
    order: &mut Vec<usize>,
) {
    const LEAF: usize = 48;
    if ids.len() <= LEAF {
        order.extend_from_slice(&ids);
        return;
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for &i in &ids {
        for a in 0..2 {
            lo[a] = lo[a].min(coords[i][a]);
            hi[a] = hi[a].max(coords[i][a]);
        }
    }
    let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
    ids.sort_unstable_by(|&a, &b| {
        coords[a][axis]
            .partial_cmp(&coords[b][axis])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mid = ids.len() / 2;
    for &i in &ids[..mid] {
        mark[i] = 1;
    }
    for &i in &ids[mid..] {
        mark[i] = 2;
    }
    let mut left = Vec::with_capacity(mid);
    let mut sep = Vec::new();
    for &i in &ids[..mid] {
        if pattern.column(i).iter().any(|&j| mark[j] == 2) {
            sep.push(i);
        } else {
            left.push(i);
        }
    }
    let right: Vec<usize> = ids[mid..].to_vec();
    for &i in &ids {
        mark[i] = 0;
    }
    if left.is_empty() || right.len() == ids.len() {
        // no progress (e.g. a dense cluster); stop splitting
        order.extend_from_slice(&ids);
        return;
    }
    dissect(left, pattern, coords, mark, order);
    dissect(right, pattern, coords, mark, order);
    order.extend_from_slice(&sep);
}

/// Symbolic `LDLᵀ` analysis: elimination tree and column counts of `P A Pᵀ`.
#[derive(Debug, Clone)]
pub struct LdlSymbolic {
    n: usize,
    perm: Vec<usize>,
    pinv: Vec<usize>,
    parent: Vec<usize>,
    lp: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl LdlSymbolic {
    /// `perm[k]` is the original index eliminated at step `k`.
    pub fn new(pattern: &Pattern, perm: Vec<usize>) -> Self {
        let n = pattern.dim();
        assert_eq!(perm.len(), n, "permutation length");
        let mut pinv = vec![NONE; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }
        assert!(pinv.iter().all(|&p| p != NONE), "not a permutation");
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for &row in pattern.column(perm[k]) {
                let mut i = pinv[row];
                if i < k {
                    while flag[i] != k {
                        if parent[i] == NONE {
                            parent[i] = k;
                        }
                        lnz[i] += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        LdlSymbolic {
            n,
            perm,
            pinv,
            parent,
            lp,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of strictly lower entries of `L`.
    pub fn factor_nnz(&self) -> usize {
        self.lp[self.n]
    }

    /// Numeric factorization. Pivots with `|d| ≤ rel_tol · max|a_ii|` are
    /// reported as singular.
    pub fn factor(&self, a: &SymmetricMatrix<'_>, rel_tol: f64, context: &'static str) -> Result<Ldl> {
        let n = self.n;
        assert_eq!(a.dim(), n, "matrix/analysis size mismatch");
        let pattern = a.pattern();
        let scale = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
        let tol = rel_tol * if scale > 0.0 { scale } else { 1.0 };
        let nnz = self.factor_nnz();
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0; nnz];
        let mut d = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut stack = vec![0usize; n];
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let col = self.perm[k];
            let start = pattern.col_ptr[col];
            for (off, &row) in pattern.column(col).iter().enumerate() {
                let mut i = self.pinv[row];
                if i <= k {
                    y[i] += a.values[start + off];
                    let mut len = 0;
                    while flag[i] != k {
                        stack[len] = i;
                        len += 1;
                        flag[i] = k;
                        i = self.parent[i];
                    }
                    while len > 0 {
                        top -= 1;
                        len -= 1;
                        stack[top] = stack[len];
                    }
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            while top < n {
                let i = stack[top];
                top += 1;
                let yi = y[i];
                y[i] = 0.0;
                let p2 = self.lp[i] + lnz[i];
                for p in self.lp[i]..p2 {
                    y[li[p]] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                li[p2] = k;
                lx[p2] = l_ki;
                lnz[i] += 1;
            }
            if !(d[k].abs() > tol) {
                return Err(Error::SingularMatrix { pivot: k, context });
            }
        }
        Ok(Ldl {
            perm: self.perm.clone(),
            lp: self.lp.clone(),
            li,
            lx,
            d,
        })
    }
}

/// Numeric `LDLᵀ` factors.
#[derive(Debug, Clone)]
pub struct Ldl {
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

impl Ldl {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for j in 0..n {
            x[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p] * x[self.li[p]];
            }
            x[j] = s;
        }
        let mut out = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = x[k];
        }
        out
    }

    /// Number of negative pivots (the inertia's negative count).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }
}
