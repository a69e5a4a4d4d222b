//! Compressed sparse row matrices and a banded Cholesky factorization.

use std::fmt::Write as _;

use super::DiscretizeError;

/// CSR matrix with sorted column indices per row and no duplicate entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed in a fixed order, so the result does not depend on how the
    /// triplets were produced beyond their sequence.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v))).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().into_iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t: Vec<_> = self.triplets().into_iter().map(|(r, c, v)| (r, c, a * v)).collect();
        t.extend(other.triplets().into_iter().map(|(r, c, v)| (r, c, b * v)));
        Self::from_triplets(self.nrows, self.ncols, t)
    }

    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols && self.triplets().iter().all(|&(r, c, v)| self.get(c, r) == v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum `|r - c|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets().iter().map(|&(r, c, _)| r.abs_diff(c)).max().unwrap_or(0)
    }

    /// Dense row-major copy, for small diagnostics and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    /// Plain-text triplet dump: a header line `# <kind> <nrows> <ncols> <nnz>`
    /// then one `row col value` line per entry, zero-based, values in
    /// shortest round-trip scientific notation.
    pub fn to_triplet_text(&self, kind: &str) -> String {
        let mut s = format!("# {kind} {} {} {}\n", self.nrows, self.ncols, self.nnz());
        for (r, c, v) in self.triplets() {
            let _ = writeln!(s, "{r} {c} {v:e}");
        }
        s
    }

    /// Inverse of [`SparseMatrix::to_triplet_text`].
    pub fn from_triplet_text(text: &str) -> Result<(String, Self), DiscretizeError> {
        let bad = |m: &str| DiscretizeError::TripletFormat(m.to_string());
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty input"))?.split_whitespace().collect();
        if header.len() != 5 || header[0] != "#" {
            return Err(bad("header must be `# kind nrows ncols nnz`"));
        }
        let parse_usize = |s: &str| s.parse::<usize>().map_err(|_| bad(&format!("bad integer `{s}`")));
        let (nrows, ncols, nnz) = (parse_usize(header[2])?, parse_usize(header[3])?, parse_usize(header[4])?);
        let mut t = Vec::with_capacity(nnz);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad(&format!("bad entry line `{line}`")));
            }
            let v = parts[2].parse::<f64>().map_err(|_| bad(&format!("bad value `{}`", parts[2])))?;
            let (r, c) = (parse_usize(parts[0])?, parse_usize(parts[1])?);
            if r >= nrows || c >= ncols {
                return Err(bad(&format!("entry ({r},{c}) out of range")));
            }
            t.push((r, c, v));
        }
        if t.len() != nnz {
            return Err(bad(&format!("header declares {nnz} entries, found {}", t.len())));
        }
        Ok((header[1].to_string(), Self::from_triplets(nrows, ncols, t)))
    }
}

/// Cholesky factor `A = L Lᵀ` of a symmetric positive definite banded matrix.
#[derive(Clone, Debug)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    /// Row `i` stores `L[i][i-bw..=i]` left to right.
    lower: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &SparseMatrix) -> Result<Self, DiscretizeError> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(DiscretizeError::DimensionMismatch(format!("{}x{} matrix is not square", n, a.ncols())));
        }
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for (r, c, v) in a.triplets() {
            if c <= r {
                l[r * w + (c + bw - r)] = v;
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let mut s = l[i * w + (j + bw - i)];
                for k in k0..j {
                    s -= l[i * w + (k + bw - i)] * l[j * w + (k + bw - j)];
                }
                if j == i {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(DiscretizeError::NotPositiveDefinite { row: i, pivot: s });
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + (j + bw - i)] = s / l[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let (bw, w) = (self.bw, self.bw + 1);
        for i in 0..self.n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.lower[i * w + (k + bw - i)] * b[k];
            }
            b[i] = s / self.lower[i * w + bw];
        }
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + bw + 1).min(self.n) {
                s -= self.lower[k * w + (i + bw - k)] * b[k];
            }
            b[i] = s / self.lower[i * w + bw];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn duplicates_are_summed() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (0, 1, 2.5), (1, 0, -1.0)]);
        assert_eq!(m.get(0, 1), 3.5);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.transpose().get(1, 0), 3.5);
    }

    #[test]
    fn triplet_text_round_trips() {
        let m = laplacian(5).scale(1.0 / 3.0);
        let (kind, back) = SparseMatrix::from_triplet_text(&m.to_triplet_text("mass")).unwrap();
        assert_eq!(kind, "mass");
        assert_eq!(back, m);
        assert!(SparseMatrix::from_triplet_text("# a 2 2 1\n0 0 1\n1 1 1\n").is_err());
    }

    #[test]
    fn cholesky_solves_tridiagonal_and_2d() {
        let a = laplacian(50);
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.mul_vec(&x);
        let sol = BandedCholesky::factor(&a).unwrap().solve(&b);
        for (p, q) in sol.iter().zip(&x) {
            assert!((p - q).abs() < 1e-10);
        }

        // 2D five-point Laplacian on a 6x5 interior grid.
        let (nx, ny) = (6, 5);
        let mut t = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let p = i + nx * j;
                t.push((p, p, 4.0));
                if i > 0 {
                    t.push((p, p - 1, -1.0));
                }
                if i + 1 < nx {
                    t.push((p, p + 1, -1.0));
                }
                if j > 0 {
                    t.push((p, p - nx, -1.0));
                }
                if j + 1 < ny {
                    t.push((p, p + nx, -1.0));
                }
            }
        }
        let a = SparseMatrix::from_triplets(nx * ny, nx * ny, t);
        let x: Vec<f64> = (0..nx * ny).map(|i| 1.0 + (i as f64).cos()).collect();
        let sol = BandedCholesky::factor(&a).unwrap().solve(&a.mul_vec(&x));
        for (p, q) in sol.iter().zip(&x) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = laplacian(4).scale(-1.0);
        assert!(matches!(BandedCholesky::factor(&a), Err(DiscretizeError::NotPositiveDefinite { row: 0, .. })));
    }
}
