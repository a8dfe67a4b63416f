//! Dense exact linear algebra over a prime field `F_p`.
//!
//! Everything here is plain Gaussian elimination with deterministic pivoting:
//! the pivot of a column is always the first row (in index order) holding a
//! nonzero entry. Kernel, image and complement bases are therefore
//! reproducible across runs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted; keeps products of two residues inside `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn check_modulus(p: u64) {
    assert!(
        is_prime(p) && p < MAX_MODULUS,
        "modulus {p} is not a supported prime"
    );
}

/// A residue class in `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpScalar {
    value: u64,
    p: u64,
}

impl FpScalar {
    pub fn new(value: i64, p: u64) -> Self {
        check_modulus(p);
        Self {
            value: value.rem_euclid(p as i64) as u64,
            p,
        }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.p
    }

    pub fn add(self, other: Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        Self {
            value: (self.value + other.value) % self.p,
            p: self.p,
        }
    }

    pub fn mul(self, other: Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        Self {
            value: self.value * other.value % self.p,
            p: self.p,
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(self) -> Option<Self> {
        inv_mod(self.value, self.p).map(|value| Self { value, p: self.p })
    }
}

pub(crate) fn inv_mod(x: u64, p: u64) -> Option<u64> {
    if x.is_multiple_of(p) {
        return None;
    }
    Some(pow_mod(x, p - 2, p))
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// A column vector over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpVector {
    p: u64,
    coords: Vec<u64>,
}

impl FpVector {
    pub fn new(p: u64, coords: Vec<u64>) -> Self {
        check_modulus(p);
        let coords = coords.into_iter().map(|c| c % p).collect();
        Self { p, coords }
    }

    pub fn from_i64(p: u64, coords: &[i64]) -> Self {
        check_modulus(p);
        let coords = coords
            .iter()
            .map(|&c| c.rem_euclid(p as i64) as u64)
            .collect();
        Self { p, coords }
    }

    pub fn zero(p: u64, len: usize) -> Self {
        Self::new(p, vec![0; len])
    }

    pub fn unit(p: u64, len: usize, i: usize) -> Self {
        let mut v = Self::zero(p, len);
        v.coords[i] = 1;
        v
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> FpScalar {
        FpScalar {
            value: self.coords[i],
            p: self.p,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a + b) % self.p)
            .collect();
        Self { p: self.p, coords }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(self.p - 1))
    }

    pub fn scale(&self, c: u64) -> Self {
        let c = c % self.p;
        let coords = self.coords.iter().map(|a| a * c % self.p).collect();
        Self { p: self.p, coords }
    }

    /// Index and value of the first nonzero coordinate.
    pub fn leading(&self) -> Option<(usize, u64)> {
        self.coords
            .iter()
            .enumerate()
            .find(|(_, &c)| c != 0)
            .map(|(i, &c)| (i, c))
    }
}

impl fmt::Display for FpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A dense row-major matrix over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpMatrix {
    p: u64,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl FpMatrix {
    pub fn new(p: u64, rows: usize, cols: usize, entries: Vec<u64>) -> Result<Self> {
        check_modulus(p);
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let entries = entries.into_iter().map(|e| e % p).collect();
        Ok(Self {
            p,
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from signed integer rows; all rows must have equal length.
    pub fn from_rows(p: u64, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|&e| e.rem_euclid(p as i64) as u64)
            .collect();
        Self::new(p, rows.len(), cols, entries)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(p: u64, len: usize, columns: &[FpVector]) -> Result<Self> {
        let mut m = Self::zero(p, len, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != len || c.p != p {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has length {} (expected {len})",
                    c.len()
                )));
            }
            for i in 0..len {
                m.set(i, j, c.coords[i]);
            }
        }
        Ok(m)
    }

    pub fn zero(p: u64, rows: usize, cols: usize) -> Self {
        check_modulus(p);
        Self {
            p,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = Self::zero(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.entries[i * self.cols + j] = v % self.p;
    }

    pub fn column(&self, j: usize) -> FpVector {
        FpVector {
            p: self.p,
            coords: (0..self.rows).map(|i| self.get(i, j)).collect(),
        }
    }

    pub fn columns(&self) -> Vec<FpVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn row(&self, i: usize) -> FpVector {
        FpVector {
            p: self.p,
            coords: self.entries[i * self.cols..(i + 1) * self.cols].to_vec(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).coords).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a + b) % self.p)
            .collect();
        Ok(Self {
            entries,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(self.p - 1))
    }

    pub fn scale(&self, c: u64) -> Self {
        let c = c % self.p;
        Self {
            entries: self.entries.iter().map(|e| e * c % self.p).collect(),
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.p;
        let mut out = Self::zero(p, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.entries[idx] = (out.entries[idx] + a * other.get(k, j)) % p;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &FpVector) -> Result<FpVector> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let coords = (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(0, |acc, j| (acc + self.get(i, j) * v.coords[j]) % self.p)
            })
            .collect();
        Ok(FpVector { p: self.p, coords })
    }

    /// `self^e`; the zeroth power is the identity.
    pub fn pow(&self, mut e: u64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("power of a non-square matrix".into()));
        }
        let mut base = self.clone();
        let mut acc = Self::identity(self.p, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            base = base.mul(&base)?;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Reduced row echelon form together with the pivot columns.
    fn rref(&self) -> (Self, Vec<usize>) {
        let p = self.p;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..m.cols {
                    m.entries.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = inv_mod(m.get(r, c), p).expect("pivot is nonzero");
            for j in c..m.cols {
                let v = m.get(r, j) * inv % p;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c);
                if f == 0 {
                    continue;
                }
                for j in c..m.cols {
                    let v = (m.get(i, j) + (p - f) * m.get(r, j)) % p;
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{x : self * x = 0}`, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<FpVector> {
        let p = self.p;
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![0; self.cols];
                x[f] = 1;
                for (i, &pc) in pivots.iter().enumerate() {
                    x[pc] = (p - r.get(i, f)) % p;
                }
                FpVector { p, coords: x }
            })
            .collect()
    }

    /// Basis of the column space, taken from the pivot columns of `self`.
    pub fn image_basis(&self) -> Vec<FpVector> {
        let (_, pivots) = self.rref();
        pivots.iter().map(|&c| self.column(c)).collect()
    }

    /// Some `x` with `self * x = b`, or `None` when `b` is outside the image.
    pub fn solve(&self, b: &FpVector) -> Result<Option<FpVector>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut aug = Self::zero(self.p, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, b.coords[i]);
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![0; self.cols];
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(i, self.cols);
        }
        Ok(Some(FpVector { p: self.p, coords: x }))
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zero(self.p, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, 1);
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zero(self.p, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j));
            }
        }
        Some(inv)
    }
}

impl fmt::Display for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            writeln!(f, "{}", self.row(i))?;
        }
        Ok(())
    }
}

/// Rank of a family of vectors of common length `len`.
pub fn rank_of(p: u64, len: usize, vectors: &[FpVector]) -> usize {
    FpMatrix::from_columns(p, len, vectors)
        .expect("vectors share a length")
        .rank()
}

/// Whether `v` lies in the span of `basis`.
pub fn in_span(basis: &[FpVector], v: &FpVector) -> bool {
    let m = FpMatrix::from_columns(v.p, v.len(), basis).expect("vectors share a length");
    m.solve(v).expect("dimensions agree").is_some()
}

/// Coordinates of `v` with respect to the (independent) family `basis`.
pub fn coordinates(basis: &[FpVector], v: &FpVector) -> Option<FpVector> {
    let m = FpMatrix::from_columns(v.p, v.len(), basis).expect("vectors share a length");
    m.solve(v).expect("dimensions agree")
}

/// Greedily picks, in order, the members of `candidates` that enlarge `start`.
/// The result spans a complement of `span(start)` inside `span(start ∪ candidates)`.
pub fn extend_basis(p: u64, len: usize, start: &[FpVector], candidates: &[FpVector]) -> Vec<FpVector> {
    let mut current: Vec<FpVector> = start.to_vec();
    let mut r = rank_of(p, len, &current);
    let mut picked = Vec::new();
    for c in candidates {
        current.push(c.clone());
        let nr = rank_of(p, len, &current);
        if nr > r {
            r = nr;
            picked.push(c.clone());
        } else {
            current.pop();
        }
    }
    picked
}

/// Basis of `span(a) ∩ span(b)`.
pub fn intersection(p: u64, len: usize, a: &[FpVector], b: &[FpVector]) -> Vec<FpVector> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // Solve sum x_i a_i - sum y_j b_j = 0 and read off sum x_i a_i.
    let mut cols: Vec<FpVector> = a.to_vec();
    cols.extend(b.iter().map(|v| v.scale(p - 1)));
    let m = FpMatrix::from_columns(p, len, &cols).expect("vectors share a length");
    let mut out: Vec<FpVector> = Vec::new();
    for k in m.kernel_basis() {
        let mut v = FpVector::zero(p, len);
        for (i, ai) in a.iter().enumerate() {
            v = v.add(&ai.scale(k.coords[i]));
        }
        out.push(v);
    }
    
    extend_basis(p, len, &[], &out)
}

/// Enumerates all `p^n` vectors of `F_p^n` in lexicographic order
/// (first coordinate varying slowest).
pub fn all_vectors(p: u64, n: usize) -> impl Iterator<Item = FpVector> {
    let total = (p as u128).pow(n as u32);
    (0..total).map(move |mut k| {
        let mut coords = vec![0u64; n];
        for i in (0..n).rev() {
            coords[i] = (k % p as u128) as u64;
            k /= p as u128;
        }
        FpVector { p, coords }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(p: u64, rows: &[Vec<i64>]) -> FpMatrix {
        FpMatrix::from_rows(p, rows).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(FpMatrix::identity(3, 3).rank(), 3);
        assert_eq!(FpMatrix::zero(2, 2, 2).rank(), 0);
        assert_eq!(m(2, &[vec![1, 1], vec![1, 1]]).rank(), 1);
    }

    #[test]
    fn kernel_examples() {
        let k = FpMatrix::zero(3, 2, 2).kernel_basis();
        assert_eq!(k.len(), 2);
        assert_eq!(rank_of(3, 2, &k), 2);
        assert!(FpMatrix::identity(5, 4).kernel_basis().is_empty());
        let k = m(2, &[vec![1, 1], vec![1, 1]]).kernel_basis();
        assert_eq!(k, vec![FpVector::new(2, vec![1, 1])]);
    }

    #[test]
    fn solve_examples() {
        let b = FpVector::new(7, vec![3, 5, 6]);
        assert_eq!(FpMatrix::identity(7, 3).solve(&b).unwrap(), Some(b.clone()));
        assert_eq!(FpMatrix::zero(7, 3, 3).solve(&b).unwrap(), None);
        let a = m(2, &[vec![1, 1], vec![0, 0]]);
        let x = a.solve(&FpVector::new(2, vec![1, 0])).unwrap().unwrap();
        assert!(x == FpVector::new(2, vec![1, 0]) || x == FpVector::new(2, vec![0, 1]));
        assert!(matches!(
            a.solve(&FpVector::new(2, vec![1])),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn power_and_products() {
        let j3 = m(3, &[vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]);
        assert!(j3.pow(3).unwrap().is_zero());
        assert!(!j3.pow(2).unwrap().is_zero());
        assert_eq!(j3.pow(0).unwrap(), FpMatrix::identity(3, 3));
        assert_eq!(FpMatrix::identity(3, 3).mul(&j3).unwrap(), j3);
        assert!(FpMatrix::zero(5, 3, 3).image_basis().is_empty());
        assert!(FpMatrix::zero(5, 2, 3).pow(2).is_err());
        assert!(j3.add(&FpMatrix::zero(3, 2, 2)).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let a = m(5, &[vec![1, 2], vec![3, 4]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv).unwrap(), FpMatrix::identity(5, 2));
        assert!(m(5, &[vec![1, 2], vec![2, 4]]).inverse().is_none());
    }

    #[test]
    fn intersection_of_planes() {
        let p = 3;
        let a = vec![FpVector::new(p, vec![1, 0, 0]), FpVector::new(p, vec![0, 1, 0])];
        let b = vec![FpVector::new(p, vec![0, 1, 0]), FpVector::new(p, vec![0, 0, 1])];
        let i = intersection(p, 3, &a, &b);
        assert_eq!(i.len(), 1);
        assert!(in_span(&i, &FpVector::new(p, vec![0, 1, 0])));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(all_vectors(3, 2).count(), 9);
        assert_eq!(all_vectors(2, 0).count(), 1);
    }

    fn arb_matrix() -> impl Strategy<Value = FpMatrix> {
        (prop::sample::select(vec![2u64, 3, 5, 7]), 1usize..6, 1usize..6).prop_flat_map(
            |(p, r, c)| {
                prop::collection::vec(0..p, r * c)
                    .prop_map(move |e| FpMatrix::new(p, r, c, e).unwrap())
            },
        )
    }

    proptest! {
        #[test]
        fn rank_nullity(a in arb_matrix()) {
            let k = a.kernel_basis();
            prop_assert_eq!(a.rank() + k.len(), a.cols());
            for v in &k {
                prop_assert!(a.mul_vec(v).unwrap().is_zero());
            }
        }

        #[test]
        fn solve_is_sound(a in arb_matrix(), seed in 0u64..1000) {
            let b = FpVector::new(a.p(), (0..a.rows() as u64).map(|i| (i * 31 + seed) % a.p()).collect());
            match a.solve(&b).unwrap() {
                Some(x) => prop_assert_eq!(a.mul_vec(&x).unwrap(), b),
                None => {
                    let img = a.image_basis();
                    let mut with_b = img.clone();
                    with_b.push(b.clone());
                    prop_assert!(rank_of(a.p(), a.rows(), &with_b) > img.len());
                }
            }
        }
    }
}
