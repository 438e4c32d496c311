//! Dense linear algebra over `Z/pZ`: Jacobian evaluation, row reduction and
//! pivot extraction.

use std::fmt;

use crate::algebra::{CoeffRing, MultiPoly, Zp};

/// A rectangular matrix over `Z/pZ` with labelled columns.
#[derive(Clone, PartialEq, Eq)]
pub struct FpMatrix {
    field: Zp,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
    labels: Vec<String>,
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix {}x{} over F_{} [{}]", self.rows, self.cols, self.field.modulus(), self.labels.join(", "))?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl FpMatrix {
    pub fn zeros(field: Zp, rows: usize, cols: usize) -> Self {
        FpMatrix { field, rows, cols, data: vec![0; rows * cols], labels: (0..cols).map(|j| format!("c{j}")).collect() }
    }

    pub fn from_rows(field: Zp, rows: Vec<Vec<u64>>) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(field, rows.len(), cols);
        for (i, r) in rows.into_iter().enumerate() {
            assert_eq!(r.len(), cols, "rectangular rows");
            for (j, v) in r.into_iter().enumerate() {
                m.set(i, j, v % field.modulus());
            }
        }
        m
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.cols, "one label per column");
        self.labels = labels;
        self
    }

    pub fn field(&self) -> Zp {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Keep the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> FpMatrix {
        let mut m = FpMatrix::zeros(self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (k, &c) in cols.iter().enumerate() {
                m.set(r, k, self.get(r, c));
            }
        }
        m.labels = cols.iter().map(|&c| self.labels[c].clone()).collect();
        m
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut m = FpMatrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(c, r, self.get(r, c));
            }
        }
        m
    }

    /// Reduced row-echelon form and its pivot columns. Pivots are taken as the
    /// first nonzero entry scanning columns left to right.
    pub fn rref(&self) -> (FpMatrix, Vec<usize>) {
        let f = self.field;
        let p = f.modulus();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            if pr != row {
                for c in 0..m.cols {
                    m.data.swap(pr * m.cols + c, row * m.cols + c);
                }
            }
            let inv = f.inverse(m.get(row, col)).expect("nonzero pivot");
            for c in col..m.cols {
                let v = m.get(row, c) * inv % p;
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in col..m.cols {
                    let sub = factor * m.get(row, c) % p;
                    let v = f.sub(&m.get(r, c), &sub);
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.rref().1
    }

    pub fn rank(&self) -> usize {
        self.pivot_columns().len()
    }

    /// Basis of the right null space, one vector per non-pivot column.
    pub fn kernel(&self) -> Vec<Vec<u64>> {
        let (r, pivots) = self.rref();
        let f = self.field;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![0u64; self.cols];
                v[fc] = 1;
                for (i, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(&r.get(i, fc));
                }
                v
            })
            .collect()
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        let p = self.field.modulus();
        (0..self.rows).map(|r| self.row(r).iter().zip(v).fold(0u64, |acc, (a, b)| (acc + a * b % p) % p)).collect()
    }
}

/// Gradient of `poly` at `point` as a sparse list of `(variable, value)`.
pub fn gradient_at(poly: &MultiPoly<Zp>, point: &[u64]) -> Vec<(usize, u64)> {
    let f = *poly.coeffs();
    let n = poly.ring().nvars();
    let mut grad = vec![0u64; n];
    let mut touched = vec![false; n];
    for (m, c) in poly.terms() {
        let support: Vec<(usize, u16)> = m.support().collect();
        for (k, &(v, e)) in support.iter().enumerate() {
            let mut t = f.mul(c, &(e as u64 % f.modulus()));
            t = f.mul(&t, &f.pow(point[v], e as u64 - 1));
            for (k2, &(w, e2)) in support.iter().enumerate() {
                if k2 != k {
                    t = f.mul(&t, &f.pow(point[w], e2 as u64));
                }
            }
            grad[v] = f.add(&grad[v], &t);
            touched[v] = true;
        }
    }
    (0..n).filter(|&v| touched[v] && grad[v] != 0).map(|v| (v, grad[v])).collect()
}

/// `M[i][j] = d poly_i / d var_j` evaluated at `point` (which assigns every
/// ring variable).
pub fn jacobian_at(polys: &[MultiPoly<Zp>], vars: &[usize], point: &[u64], field: Zp) -> FpMatrix {
    let mut m = FpMatrix::zeros(field, polys.len(), vars.len());
    let mut col_of = std::collections::HashMap::new();
    for (j, &v) in vars.iter().enumerate() {
        col_of.insert(v, j);
    }
    for (i, p) in polys.iter().enumerate() {
        for (v, val) in gradient_at(p, point) {
            if let Some(&j) = col_of.get(&v) {
                m.set(i, j, val);
            }
        }
    }
    if let Some(first) = polys.first() {
        let names = first.ring().names();
        m = m.with_labels(vars.iter().map(|&v| names[v].clone()).collect());
    }
    m
}
