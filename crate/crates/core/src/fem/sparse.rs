//! Compressed sparse row matrices.

use crate::error::{Error, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Zero matrix whose pattern couples every pair of vertices sharing a triangle.
    pub fn mesh_pattern(mesh: &Mesh) -> Self {
        let n = mesh.num_vertices();
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for tri in &mesh.triangles {
            for &a in tri {
                for &b in tri {
                    rows[a].push(b);
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        SparseMatrix { n, row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    /// Builds a matrix from (row, col, value) triplets; duplicates are summed in input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, _) in triplets {
            let index = i.max(j);
            if index >= n {
                return Err(Error::IndexOutOfRange { index, dim: n });
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (i, j, v) = triplets[k];
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseMatrix { n, row_ptr, col_idx, values })
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    /// Entry (i, j); zero outside the pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` to entry (i, j), which must be in the pattern.
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        match self.position(i, j) {
            Some(k) => self.values[k] += v,
            None => panic!("entry ({i}, {j}) is outside the sparsity pattern"),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `a·A + b·B` over the union of both patterns.
    pub fn lin_comb(a: f64, lhs: &SparseMatrix, b: f64, rhs: &SparseMatrix) -> Result<Self> {
        if lhs.n != rhs.n {
            return Err(Error::LengthMismatch { expected: lhs.n, got: rhs.n });
        }
        if lhs.row_ptr == rhs.row_ptr && lhs.col_idx == rhs.col_idx {
            let values = lhs.values.iter().zip(&rhs.values).map(|(x, y)| a * x + b * y).collect();
            return Ok(SparseMatrix { n: lhs.n, row_ptr: lhs.row_ptr.clone(), col_idx: lhs.col_idx.clone(), values });
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..lhs.n {
            let (mut p, pe) = (lhs.row_ptr[i], lhs.row_ptr[i + 1]);
            let (mut q, qe) = (rhs.row_ptr[i], rhs.row_ptr[i + 1]);
            while p < pe || q < qe {
                let cp = if p < pe { lhs.col_idx[p] } else { usize::MAX };
                let cq = if q < qe { rhs.col_idx[q] } else { usize::MAX };
                if cp == cq {
                    col_idx.push(cp);
                    values.push(a * lhs.values[p] + b * rhs.values[q]);
                    p += 1;
                    q += 1;
                } else if cp < cq {
                    col_idx.push(cp);
                    values.push(a * lhs.values[p]);
                    p += 1;
                } else {
                    col_idx.push(cq);
                    values.push(b * rhs.values[q]);
                    q += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix { n: lhs.n, row_ptr, col_idx, values })
    }

    /// Largest |A_ij − A_ji| over the pattern.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Indices into the value array of row `i`.
    pub(crate) fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Region;

    #[test]
    fn triplets_sum_duplicates() {
        let m = SparseMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, -1.0)]).unwrap();
        assert_eq!(m.to_dense(), vec![vec![4.0, -1.0], vec![2.0, 0.0]]);
        assert!(SparseMatrix::from_triplets(2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn lin_comb_merges_patterns() {
        let a = SparseMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let b = SparseMatrix::from_triplets(2, &[(0, 1, 2.0), (1, 1, 3.0)]).unwrap();
        let c = SparseMatrix::lin_comb(2.0, &a, -1.0, &b).unwrap();
        assert_eq!(c.to_dense(), vec![vec![2.0, -2.0], vec![0.0, -1.0]]);
    }

    #[test]
    fn mesh_pattern_matvec() {
        let mesh = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 2, 2, Region::Air).unwrap();
        let mut m = SparseMatrix::mesh_pattern(&mesh);
        for i in 0..m.dim() {
            m.add_to(i, i, 2.0);
        }
        let x: Vec<f64> = (0..m.dim()).map(|i| i as f64).collect();
        assert_eq!(m.matvec(&x), x.iter().map(|v| 2.0 * v).collect::<Vec<_>>());
        assert_eq!(m.max_asymmetry(), 0.0);
    }
}
