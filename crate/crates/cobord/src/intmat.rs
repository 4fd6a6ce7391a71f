//! Exact integer linear algebra: row-style Hermite normal form for lattice
//! membership and canonical coset representatives, Smith normal form for
//! ranks and invariant factors.
//!
//! A [`Lattice`] is the row span of a set of integer vectors. The HNF basis
//! is unique for a given span, so every answer derived from it (membership,
//! canonical representative, rank) is deterministic no matter in which order
//! rows were inserted.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Row-lattice in `ZZ^n` kept in reduced row Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    ncols: usize,
    /// Basis rows sorted by strictly increasing pivot column; pivots are
    /// positive and entries above a pivot are reduced into `[0, pivot)`.
    basis: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl Lattice {
    pub fn empty(ncols: usize) -> Lattice {
        Lattice {
            ncols,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn from_rows(ncols: usize, rows: impl IntoIterator<Item = Vec<BigInt>>) -> Lattice {
        let mut lat = Lattice::empty(ncols);
        for row in rows {
            lat.insert(row);
        }
        lat.back_reduce();
        lat
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    /// Adds a row to the span, restoring the triangular shape.
    pub fn insert(&mut self, mut row: Vec<BigInt>) {
        assert_eq!(row.len(), self.ncols, "row width mismatch");
        loop {
            let col = match row.iter().position(|x| !x.is_zero()) {
                Some(c) => c,
                None => return,
            };
            match self.pivots.binary_search(&col) {
                Ok(idx) => {
                    // Combine with the existing pivot row via the extended
                    // gcd so the basis keeps a single row on this column.
                    let a = self.basis[idx][col].clone();
                    let b = row[col].clone();
                    let ext = a.extended_gcd(&b);
                    let (g, s, t) = (ext.gcd, ext.x, ext.y);
                    let au = &a / &g;
                    let bu = &b / &g;
                    let old = std::mem::take(&mut self.basis[idx]);
                    let mut new_pivot = vec![BigInt::zero(); self.ncols];
                    let mut new_row = vec![BigInt::zero(); self.ncols];
                    for c in 0..self.ncols {
                        new_pivot[c] = &s * &old[c] + &t * &row[c];
                        new_row[c] = &au * &row[c] - &bu * &old[c];
                    }
                    self.basis[idx] = new_pivot;
                    row = new_row;
                    debug_assert!(row[col].is_zero());
                }
                Err(idx) => {
                    if row[col].is_negative() {
                        for x in row.iter_mut() {
                            *x = -std::mem::take(x);
                        }
                    }
                    self.pivots.insert(idx, col);
                    self.basis.insert(idx, row);
                    return;
                }
            }
        }
    }

    /// Reduces entries above each pivot into `[0, pivot)`, giving the unique
    /// reduced HNF basis.
    pub fn back_reduce(&mut self) {
        for i in (0..self.basis.len()).rev() {
            let pivot_col = self.pivots[i];
            let pivot_row = self.basis[i].clone();
            let pivot = pivot_row[pivot_col].clone();
            for j in 0..i {
                let q = self.basis[j][pivot_col].div_floor(&pivot);
                if !q.is_zero() {
                    for c in pivot_col..self.ncols {
                        let sub = &q * &pivot_row[c];
                        self.basis[j][c] -= sub;
                    }
                }
            }
        }
    }

    /// Canonical representative of `v`'s coset modulo the lattice.
    pub fn reduce(&self, mut v: Vec<BigInt>) -> Vec<BigInt> {
        assert_eq!(v.len(), self.ncols, "vector width mismatch");
        for (i, &col) in self.pivots.iter().enumerate() {
            if v[col].is_zero() {
                continue;
            }
            let q = v[col].div_floor(&self.basis[i][col]);
            if !q.is_zero() {
                for c in col..self.ncols {
                    let sub = &q * &self.basis[i][c];
                    v[c] -= sub;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.reduce(v.to_vec()).iter().all(|x| x.is_zero())
    }
}

/// Invariant factors (the nonzero diagonal of the Smith normal form).
pub fn smith_invariants(rows: &[Vec<BigInt>]) -> Vec<BigInt> {
    if rows.is_empty() {
        return Vec::new();
    }
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let nrows = m.len();
    let ncols = m[0].len();
    let mut out = Vec::new();
    let mut k = 0;
    while k < nrows.min(ncols) {
        // Locate the entry of smallest absolute value in the trailing block.
        let mut best: Option<(usize, usize)> = None;
        for i in k..nrows {
            for j in k..ncols {
                if m[i][j].is_zero() {
                    continue;
                }
                match best {
                    None => best = Some((i, j)),
                    Some((bi, bj)) => {
                        if m[i][j].abs() < m[bi][bj].abs() {
                            best = Some((i, j));
                        }
                    }
                }
            }
        }
        let (pi, pj) = match best {
            Some(p) => p,
            None => break,
        };
        m.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        // Eliminate the pivot row and column; restart if a remainder pops up.
        let mut dirty = false;
        for i in k + 1..nrows {
            if m[i][k].is_zero() {
                continue;
            }
            let q = m[i][k].div_floor(&m[k][k]);
            for j in k..ncols {
                let sub = &q * &m[k][j];
                m[i][j] -= sub;
            }
            if !m[i][k].is_zero() {
                dirty = true;
            }
        }
        for j in k + 1..ncols {
            if m[k][j].is_zero() {
                continue;
            }
            let q = m[k][j].div_floor(&m[k][k]);
            for row in m.iter_mut().skip(k) {
                let sub = &q * &row[k];
                row[j] -= sub;
            }
            if !m[k][j].is_zero() {
                dirty = true;
            }
        }
        if dirty {
            continue;
        }
        // Divisibility fixup: the pivot must divide the trailing block.
        let mut fixed = true;
        'scan: for i in k + 1..nrows {
            for j in k + 1..ncols {
                if !(&m[i][j] % &m[k][k]).is_zero() {
                    for c in 0..ncols {
                        let add = m[i][c].clone();
                        m[k][c] += add;
                    }
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if !fixed {
            continue;
        }
        out.push(m[k][k].abs());
        k += 1;
    }
    out
}
