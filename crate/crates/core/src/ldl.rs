//! Sparse up-looking `LDLᵀ` factorization for symmetric quasi-definite
//! matrices, with fill-reducing ordering and dynamic pivot regularization.
//!
//! The matrix is given by its upper triangle in compressed-column form. No
//! pivoting is performed: each pivot whose sign disagrees with the expected
//! sign (or whose magnitude falls below `regularize_eps`) is replaced by
//! `±regularize_delta`, and the caller recovers accuracy through iterative
//! refinement against the unmodified matrix.

use crate::{Error, Result};

const UNKNOWN: usize = usize::MAX;

/// Upper triangle of a symmetric matrix in CSC form with sorted row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricCsc {
    n: usize,
    colptr: Vec<usize>,
    rowval: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricCsc {
    /// Builds the matrix from triplets. Entries below the diagonal are
    /// mirrored into the upper triangle; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch(format!("entry ({i}, {j}) outside {n}x{n}")));
            }
            let (r, c) = if i <= j { (i, j) } else { (j, i) };
            entries.push((c, r, v));
        }
        entries.sort_by_key(|a| (a.0, a.1));
        let mut colptr = vec![0; n + 1];
        let mut rowval = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (c, r, v) in entries {
            if last == Some((c, r)) {
                *values.last_mut().expect("entry exists") += v;
                continue;
            }
            last = Some((c, r));
            rowval.push(r);
            values.push(v);
            colptr[c + 1] += 1;
        }
        for c in 0..n {
            colptr[c + 1] += colptr[c];
        }
        Ok(SymmetricCsc { n, colptr, rowval, values })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `y = A x` using both triangles.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            for p in self.colptr[c]..self.colptr[c + 1] {
                let (r, v) = (self.rowval[p], self.values[p]);
                y[r] += v * x[c];
                if r != c {
                    y[c] += v * x[r];
                }
            }
        }
        y
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn abs_row_sum_max(&self) -> f64 {
        let mut rows = vec![0.0; self.n];
        for c in 0..self.n {
            for p in self.colptr[c]..self.colptr[c + 1] {
                let r = self.rowval[p];
                rows[r] += self.values[p].abs();
                if r != c {
                    rows[c] += self.values[p].abs();
                }
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Full (both triangles) dense copy, column-major.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for c in 0..n {
            for p in self.colptr[c]..self.colptr[c + 1] {
                let r = self.rowval[p];
                a[c * n + r] += self.values[p];
                if r != c {
                    a[r * n + c] += self.values[p];
                }
            }
        }
        a
    }

    /// Symmetric permutation `P A Pᵀ`, with `iperm[old] = new`.
    fn permute(&self, iperm: &[usize]) -> SymmetricCsc {
        let trip = (0..self.n).flat_map(|c| {
            (self.colptr[c]..self.colptr[c + 1]).map(move |p| (iperm[self.rowval[p]], iperm[c], self.values[p]))
        });
        SymmetricCsc::from_triplets(self.n, trip.collect::<Vec<_>>()).expect("permutation keeps indices in range")
    }
}

/// Fill-reducing ordering applied before factorization.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Ordering {
    #[default]
    Amd,
    Natural,
    /// Explicit permutation with `perm[new] = old`.
    Custom(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct LdlOptions {
    pub ordering: Ordering,
    /// Expected pivot sign per (unpermuted) row; enables regularization.
    pub signs: Option<Vec<i8>>,
    pub regularize_eps: f64,
    pub regularize_delta: f64,
}

impl Default for LdlOptions {
    fn default() -> Self {
        LdlOptions { ordering: Ordering::Amd, signs: None, regularize_eps: 1e-13, regularize_delta: 1e-7 }
    }
}

#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    regularized: usize,
}

impl LdlFactor {
    pub fn new(a: &SymmetricCsc, options: &LdlOptions) -> Result<Self> {
        let n = a.n;
        let perm = match &options.ordering {
            Ordering::Natural => (0..n).collect(),
            Ordering::Custom(p) => {
                check_permutation(p, n)?;
                p.clone()
            }
            Ordering::Amd => {
                if n == 0 {
                    Vec::new()
                } else {
                    let (p, _, _) = amd::order(n, &a.colptr, &a.rowval, &amd::Control::default())
                        .map_err(|s| Error::Factorization(format!("ordering failed: {s:?}")))?;
                    p
                }
            }
        };
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        if let Some(s) = &options.signs {
            if s.len() != n {
                return Err(Error::DimensionMismatch(format!("{} pivot signs for dimension {n}", s.len())));
            }
        }
        let signs: Option<Vec<i8>> = options.signs.as_ref().map(|s| perm.iter().map(|&old| s[old]).collect());
        let pa = a.permute(&iperm);

        let (etree, lnz) = elimination_tree(&pa);
        let mut lp = vec![0; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let mut f = LdlFactor {
            n,
            perm,
            li: vec![0; lp[n]],
            lx: vec![0.0; lp[n]],
            lp,
            d: vec![0.0; n],
            regularized: 0,
        };
        f.factor(&pa, &etree, signs.as_deref(), options)?;
        Ok(f)
    }

    fn factor(&mut self, a: &SymmetricCsc, etree: &[usize], signs: Option<&[i8]>, options: &LdlOptions) -> Result<()> {
        let n = self.n;
        let mut y_vals = vec![0.0; n];
        let mut y_used = vec![false; n];
        let mut y_idx = Vec::with_capacity(n);
        let mut elim = Vec::with_capacity(n);
        let mut next = self.lp[..n].to_vec();
        let mut dinv = vec![0.0; n];

        for k in 0..n {
            y_idx.clear();
            let mut dk = 0.0;
            for p in a.colptr[k]..a.colptr[k + 1] {
                let b = a.rowval[p];
                if b == k {
                    dk = a.values[p];
                    continue;
                }
                y_vals[b] = a.values[p];
                if y_used[b] {
                    continue;
                }
                // walk the elimination tree up to the first visited node
                elim.clear();
                let mut i = b;
                while i != UNKNOWN && i < k && !y_used[i] {
                    y_used[i] = true;
                    elim.push(i);
                    i = etree[i];
                }
                y_idx.extend(elim.drain(..).rev());
            }
            for &c in y_idx.iter().rev() {
                let yc = y_vals[c];
                for j in self.lp[c]..next[c] {
                    y_vals[self.li[j]] -= self.lx[j] * yc;
                }
                let l = yc * dinv[c];
                self.li[next[c]] = k;
                self.lx[next[c]] = l;
                dk -= yc * l;
                next[c] += 1;
                y_vals[c] = 0.0;
                y_used[c] = false;
            }
            if let Some(s) = signs {
                let sign = s[k] as f64;
                if dk * sign < options.regularize_eps {
                    dk = options.regularize_delta * sign;
                    self.regularized += 1;
                }
            }
            if dk == 0.0 || !dk.is_finite() {
                return Err(Error::Factorization(format!("zero pivot at step {k}")));
            }
            self.d[k] = dk;
            dinv[k] = 1.0 / dk;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of pivots replaced by the regularization.
    pub fn regularized_count(&self) -> usize {
        self.regularized
    }

    pub fn min_abs_pivot(&self) -> f64 {
        self.d.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min)
    }

    /// Number of positive pivots (the positive inertia of the factored matrix).
    pub fn positive_pivots(&self) -> usize {
        self.d.iter().filter(|&&d| d > 0.0).count()
    }

    pub fn nnz_l(&self) -> usize {
        self.lx.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let xi = x[i];
            for p in self.lp[i]..self.lp[i + 1] {
                x[self.li[p]] -= self.lx[p] * xi;
            }
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut s = 0.0;
            for p in self.lp[i]..self.lp[i + 1] {
                s += self.lx[p] * x[self.li[p]];
            }
            x[i] -= s;
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

fn check_permutation(p: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if p.len() != n {
        return Err(Error::InvalidParameter(format!("permutation of length {} for dimension {n}", p.len())));
    }
    for &i in p {
        if i >= n || seen[i] {
            return Err(Error::InvalidParameter("ordering is not a permutation".into()));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Elimination tree and column counts of `L`.
fn elimination_tree(a: &SymmetricCsc) -> (Vec<usize>, Vec<usize>) {
    let n = a.n;
    let mut etree = vec![UNKNOWN; n];
    let mut lnz = vec![0; n];
    let mut work = vec![UNKNOWN; n];
    for j in 0..n {
        work[j] = j;
        for p in a.colptr[j]..a.colptr[j + 1] {
            let mut i = a.rowval[p];
            while i < j && work[i] != j {
                if etree[i] == UNKNOWN {
                    etree[i] = j;
                }
                lnz[i] += 1;
                work[i] = j;
                i = etree[i];
            }
        }
    }
    (etree, lnz)
}
