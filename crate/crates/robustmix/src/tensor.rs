//! Dense tensor algebra over ℝ^d: contraction, outer powers, symmetrization,
//! matrix reshaping and norms.
//!
//! Tensors are immutable dense arrays in row-major order (last index fastest).
//! Storage is uncompressed; at the scales this crate targets (d ≤ 16, order
//! ≤ 6 with d^order kept modest) symmetric compression would be an
//! optimization, not a correctness requirement. All entries are `f64` and no
//! tolerances are applied inside tensor operations themselves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense tensor of a fixed order over ℝ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dim: usize,
    order: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dim: usize, order: usize) -> Self {
        assert!(dim > 0, "tensor dimension must be positive");
        let len = dim.pow(order as u32);
        Tensor {
            dim,
            order,
            data: vec![0.0; len],
        }
    }

    /// Order-0 tensor holding a single value.
    pub fn scalar(dim: usize, value: f64) -> Self {
        assert!(dim > 0);
        Tensor {
            dim,
            order: 0,
            data: vec![value],
        }
    }

    pub fn from_data(dim: usize, order: usize, data: Vec<f64>) -> Result<Self> {
        let expect = dim.pow(order as u32);
        if data.len() != expect {
            return Err(Error::DimensionMismatch(format!(
                "tensor of dim {dim} order {order} needs {expect} entries, got {}",
                data.len()
            )));
        }
        Ok(Tensor { dim, order, data })
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Tensor {
            dim: v.len(),
            order: 1,
            data: v.iter().copied().collect(),
        }
    }

    /// Order-2 tensor from a square matrix (row-major).
    pub fn from_square_matrix(m: &DMatrix<f64>) -> Self {
        assert!(m.is_square(), "order-2 tensor needs a square matrix");
        let d = m.nrows();
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                data.push(m[(i, j)]);
            }
        }
        Tensor {
            dim: d,
            order: 2,
            data,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Flat position of a multi-index (row-major).
    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order);
        let mut p = 0usize;
        for &i in idx {
            debug_assert!(i < self.dim);
            p = p * self.dim + i;
        }
        p
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let p = self.flat(idx);
        self.data[p] = value;
    }

    /// Scalar value of an order-0 tensor.
    pub fn as_scalar(&self) -> f64 {
        assert_eq!(self.order, 0, "as_scalar needs an order-0 tensor");
        self.data[0]
    }

    /// Entry of a dim-1 tensor of any order (a scalar in disguise).
    pub fn as_scalar_entry(&self) -> f64 {
        assert_eq!(self.dim, 1, "as_scalar_entry needs dim 1");
        self.data[0]
    }

    pub fn to_vector(&self) -> DVector<f64> {
        assert_eq!(self.order, 1, "to_vector needs an order-1 tensor");
        DVector::from_vec(self.data.clone())
    }

    pub fn to_square_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.order, 2, "to_square_matrix needs an order-2 tensor");
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn scale(&self, c: f64) -> Tensor {
        Tensor {
            dim: self.dim,
            order: self.order,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        if self.dim != other.dim || self.order != other.order {
            return Err(Error::DimensionMismatch(
                "tensor addition needs equal dim and order".into(),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Tensor {
            dim: self.dim,
            order: self.order,
            data,
        })
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.add(&other.scale(-1.0))
    }

    pub fn dot(&self, other: &Tensor) -> Result<f64> {
        if self.dim != other.dim || self.order != other.order {
            return Err(Error::DimensionMismatch(
                "tensor dot needs equal dim and order".into(),
            ));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Frobenius norm: √(T·T).
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn outer(&self, other: &Tensor) -> Result<Tensor> {
        contract(self, other, &[])
    }

    /// Largest |entry| deviation from full permutation symmetry.
    pub fn symmetry_defect(&self) -> f64 {
        let s = symmetrize(self);
        self.data
            .iter()
            .zip(&s.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Reorder indices: result[i_1..i_m] = self[i_{perm(1)}..i_{perm(m)}].
    pub fn permute_indices(&self, perm: &[usize]) -> Tensor {
        assert_eq!(perm.len(), self.order);
        let mut out = Tensor::zeros(self.dim, self.order);
        let mut idx = vec![0usize; self.order];
        let mut src = vec![0usize; self.order];
        for (flat, slot) in out.data.iter_mut().enumerate() {
            decode_index(flat, self.dim, &mut idx);
            for (k, &p) in perm.iter().enumerate() {
                src[k] = idx[p];
            }
            *slot = self.data[flat_index(&src, self.dim)];
        }
        out
    }
}

pub(crate) fn flat_index(idx: &[usize], dim: usize) -> usize {
    let mut p = 0usize;
    for &i in idx {
        p = p * dim + i;
    }
    p
}

pub(crate) fn decode_index(mut flat: usize, dim: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

/// Partition of `[m]` into parts of size 1 and 2, the index bookkeeping unit
/// for Gaussian moment and Hermite tensor expansions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPartition {
    pairs: Vec<(usize, usize)>,
    singletons: Vec<usize>,
}

impl IndexPartition {
    pub fn new(m: usize, pairs: Vec<(usize, usize)>, singletons: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; m];
        let mut mark = |i: usize| -> Result<()> {
            if i >= m || seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "index {i} repeated or out of range in partition of [{m}]"
                )));
            }
            seen[i] = true;
            Ok(())
        };
        for &(a, b) in &pairs {
            mark(a)?;
            mark(b)?;
        }
        for &c in &singletons {
            mark(c)?;
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidArgument(format!(
                "partition does not cover [{m}]"
            )));
        }
        Ok(IndexPartition { pairs, singletons })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn singletons(&self) -> &[usize] {
        &self.singletons
    }

    /// All partitions of `[m]` into parts of size 1 and 2.
    ///
    /// The count is Σ_ℓ C(m,2ℓ)(2ℓ−1)!!, e.g. 10 for m=4 and 76 for m=6.
    pub fn enumerate(m: usize) -> Vec<IndexPartition> {
        let mut out = Vec::new();
        let mut pairs = Vec::new();
        let mut singles = Vec::new();
        let mut used = vec![false; m];
        enumerate_rec(m, 0, &mut used, &mut pairs, &mut singles, &mut out);
        out
    }
}

fn enumerate_rec(
    m: usize,
    from: usize,
    used: &mut Vec<bool>,
    pairs: &mut Vec<(usize, usize)>,
    singles: &mut Vec<usize>,
    out: &mut Vec<IndexPartition>,
) {
    let first = (from..m).find(|&i| !used[i]);
    let Some(a) = first else {
        out.push(IndexPartition {
            pairs: pairs.clone(),
            singletons: singles.clone(),
        });
        return;
    };
    used[a] = true;
    // a stays a singleton
    singles.push(a);
    enumerate_rec(m, a + 1, used, pairs, singles, out);
    singles.pop();
    // a pairs with a later unused element
    for b in (a + 1)..m {
        if used[b] {
            continue;
        }
        used[b] = true;
        pairs.push((a, b));
        enumerate_rec(m, a + 1, used, pairs, singles, out);
        pairs.pop();
        used[b] = false;
    }
    used[a] = false;
}

/// Contract `a` and `b` over the given index pairs (Einstein convention).
///
/// `pairs[k] = (i, j)` sums index `i` of `a` against index `j` of `b`.
/// With no pairs this is the outer product A ⊗ B. The result keeps the
/// uncontracted indices of `a` first, then those of `b`, each in their
/// original order.
pub fn contract(a: &Tensor, b: &Tensor, pairs: &[(usize, usize)]) -> Result<Tensor> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(format!(
            "contract: dims {} vs {}",
            a.dim, b.dim
        )));
    }
    let d = a.dim;
    let mut a_used = vec![false; a.order];
    let mut b_used = vec![false; b.order];
    for &(i, j) in pairs {
        if i >= a.order || j >= b.order {
            return Err(Error::InvalidArgument(format!(
                "contract: pair ({i},{j}) out of range for orders ({}, {})",
                a.order, b.order
            )));
        }
        if a_used[i] || b_used[j] {
            return Err(Error::InvalidArgument(
                "contract: index repeated within pairs".into(),
            ));
        }
        a_used[i] = true;
        b_used[j] = true;
    }
    let a_free: Vec<usize> = (0..a.order).filter(|&i| !a_used[i]).collect();
    let b_free: Vec<usize> = (0..b.order).filter(|&j| !b_used[j]).collect();
    let out_order = a_free.len() + b_free.len();
    let mut out = Tensor::zeros(d, out_order);

    let k = pairs.len();
    let mut out_idx = vec![0usize; out_order];
    let mut a_idx = vec![0usize; a.order];
    let mut b_idx = vec![0usize; b.order];
    let mut shared = vec![0usize; k];
    for (flat, slot) in out.data.iter_mut().enumerate() {
        decode_index(flat, d, &mut out_idx);
        for (pos, &ai) in a_free.iter().enumerate() {
            a_idx[ai] = out_idx[pos];
        }
        for (pos, &bj) in b_free.iter().enumerate() {
            b_idx[bj] = out_idx[a_free.len() + pos];
        }
        let mut sum = 0.0;
        shared.iter_mut().for_each(|s| *s = 0);
        loop {
            for (s, &(i, j)) in shared.iter().zip(pairs) {
                a_idx[i] = *s;
                b_idx[j] = *s;
            }
            sum += a.data[flat_index(&a_idx, d)] * b.data[flat_index(&b_idx, d)];
            // odometer over the shared indices
            let mut carry = true;
            for s in shared.iter_mut().rev() {
                *s += 1;
                if *s < d {
                    carry = false;
                    break;
                }
                *s = 0;
            }
            if carry {
                break;
            }
        }
        *slot = sum;
    }
    Ok(out)
}

/// t-fold tensor power of an order-1 tensor.
pub fn tensor_power(v: &Tensor, t: usize) -> Tensor {
    assert_eq!(v.order, 1, "tensor_power needs an order-1 tensor");
    assert!(t >= 1, "tensor_power needs t >= 1");
    let d = v.dim;
    let mut out = Tensor::zeros(d, t);
    let mut idx = vec![0usize; t];
    for (flat, slot) in out.data.iter_mut().enumerate() {
        decode_index(flat, d, &mut idx);
        *slot = idx.iter().map(|&i| v.data[i]).product();
    }
    out
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    heap_permute(m, &mut cur, &mut out);
    out
}

fn heap_permute(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, cur, out);
        if k % 2 == 0 {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

/// Average of πT over all permutations π of the indices.
///
/// Iterates the full symmetric group directly; m ≤ 6 keeps this at ≤ 720
/// permutations, which is cheap at the tensor orders used here.
pub fn symmetrize(t: &Tensor) -> Tensor {
    symmetrize_over(t, &permutations(t.order))
}

/// Average of πT over the permutations preserving the partition `parts`,
/// i.e. those mapping every part onto a (same-sized) part.
pub fn symmetrize_partial(t: &Tensor, parts: &[Vec<usize>]) -> Result<Tensor> {
    let m = t.order;
    let mut seen = vec![false; m];
    for part in parts {
        for &i in part {
            if i >= m || seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "symmetrize_partial: index {i} repeated or out of range"
                )));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::InvalidArgument(
            "symmetrize_partial: parts do not cover all indices".into(),
        ));
    }
    let preserved: Vec<Vec<usize>> = permutations(m)
        .into_iter()
        .filter(|p| preserves_partition(p, parts))
        .collect();
    Ok(symmetrize_over(t, &preserved))
}

fn preserves_partition(perm: &[usize], parts: &[Vec<usize>]) -> bool {
    // π preserves P iff the image of every part is again a part.
    for part in parts {
        let image: Vec<usize> = part.iter().map(|&i| perm[i]).collect();
        let hit = parts.iter().any(|other| {
            other.len() == image.len() && image.iter().all(|i| other.contains(i))
        });
        if !hit {
            return false;
        }
    }
    true
}

fn symmetrize_over(t: &Tensor, perms: &[Vec<usize>]) -> Tensor {
    let d = t.dim;
    let m = t.order;
    let mut out = Tensor::zeros(d, m);
    let mut idx = vec![0usize; m];
    let mut src = vec![0usize; m];
    let scale = 1.0 / perms.len() as f64;
    for (flat, slot) in out.data.iter_mut().enumerate() {
        decode_index(flat, d, &mut idx);
        let mut sum = 0.0;
        for perm in perms {
            for (k, &p) in perm.iter().enumerate() {
                src[k] = idx[p];
            }
            sum += t.data[flat_index(&src, d)];
        }
        *slot = sum * scale;
    }
    out
}

/// Frobenius norm of a tensor (free function form).
pub fn frobenius_norm(t: &Tensor) -> f64 {
    t.frobenius_norm()
}

/// View an order-m tensor as a d^k × d^{m−k} matrix.
///
/// Rows are indexed by the tuple of indices listed in `row_indices` (in the
/// given order); columns by the remaining indices in increasing order. The
/// rearrangement is a bijection, so it preserves the Frobenius norm and
/// [`tensor_from_matrix`] inverts it exactly.
pub fn reshape_to_matrix(t: &Tensor, row_indices: &[usize]) -> DMatrix<f64> {
    let (rows, cols, row_pos, col_pos) = reshape_layout(t.dim, t.order, row_indices);
    let mut m = DMatrix::zeros(rows, cols);
    let mut idx = vec![0usize; t.order];
    for (flat, &val) in t.data.iter().enumerate() {
        decode_index(flat, t.dim, &mut idx);
        let mut r = 0usize;
        for &p in &row_pos {
            r = r * t.dim + idx[p];
        }
        let mut c = 0usize;
        for &p in &col_pos {
            c = c * t.dim + idx[p];
        }
        m[(r, c)] = val;
    }
    m
}

/// Inverse of [`reshape_to_matrix`] for the same `(dim, order, row_indices)`.
pub fn tensor_from_matrix(
    m: &DMatrix<f64>,
    dim: usize,
    order: usize,
    row_indices: &[usize],
) -> Result<Tensor> {
    let (rows, cols, row_pos, col_pos) = reshape_layout(dim, order, row_indices);
    if m.nrows() != rows || m.ncols() != cols {
        return Err(Error::DimensionMismatch(format!(
            "tensor_from_matrix: expected {rows}x{cols}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut t = Tensor::zeros(dim, order);
    let mut idx = vec![0usize; order];
    for (flat, slot) in t.data.iter_mut().enumerate() {
        decode_index(flat, dim, &mut idx);
        let mut r = 0usize;
        for &p in &row_pos {
            r = r * dim + idx[p];
        }
        let mut c = 0usize;
        for &p in &col_pos {
            c = c * dim + idx[p];
        }
        *slot = m[(r, c)];
    }
    Ok(t)
}

fn reshape_layout(
    dim: usize,
    order: usize,
    row_indices: &[usize],
) -> (usize, usize, Vec<usize>, Vec<usize>) {
    let mut is_row = vec![false; order];
    for &i in row_indices {
        assert!(i < order, "row index {i} out of range for order {order}");
        assert!(!is_row[i], "row index {i} repeated");
        is_row[i] = true;
    }
    let row_pos: Vec<usize> = row_indices.to_vec();
    let col_pos: Vec<usize> = (0..order).filter(|&i| !is_row[i]).collect();
    let rows = dim.pow(row_pos.len() as u32);
    let cols = dim.pow(col_pos.len() as u32);
    (rows, cols, row_pos, col_pos)
}

/// Largest singular value of a matrix.
///
/// Power iteration on AᵀA (or AAᵀ, whichever is smaller) through
/// matrix-vector products. Converges the Rayleigh quotient to a relative
/// tolerance well below 1e−10; when the top singular values are nearly tied
/// the quotient is pinched between them, so the value stays accurate even
/// though the vector may not settle.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram_small = m.ncols() <= m.nrows();
    let n = if gram_small { m.ncols() } else { m.nrows() };
    let mut v = crate::linalg::deterministic_unit_vector(n);
    let apply = |v: &DVector<f64>| -> DVector<f64> {
        if gram_small {
            m.transpose() * (m * v)
        } else {
            m * (m.transpose() * v)
        }
    };
    let mut lambda = 0.0f64;
    for _ in 0..20_000 {
        let w = apply(&v);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= 1e-14 * next.max(f64::MIN_POSITIVE) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.max(0.0).sqrt()
}
