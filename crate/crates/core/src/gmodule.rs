//! Finite `F_p[G]`-modules for a cyclic group `G = <σ>` of order `p`.
//!
//! A module is a vector space `F_p^dim` together with the matrix of `σ`.
//! Since `σ^p - 1 = (σ - 1)^p` over `F_p`, the operator `T = σ - 1` is
//! nilpotent of index at most `p`, and the module splits into Jordan blocks
//! of `T` of lengths `1..=p`. Those blocks are exactly the indecomposable
//! `F_p[G]`-modules, and a block of length `p` is free of rank one.
//!
//! This module is the pure linear-algebra side: the socle series, the norm
//! operator `1 + σ + ... + σ^(p-1)`, the multiplicity of each block length
//! from ranks of powers of `T`, and an explicit Jordan basis. The arithmetic
//! constructions in [`crate::structure`] are checked against it.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fplin::{self, FpMatrix, FpVector};

/// An `F_p[G]`-module of finite dimension, given by the matrix of `σ`.
///
/// Construction checks that `σ^p` is the identity, so every value of this
/// type is a genuine module.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GModule {
    p: u64,
    sigma: FpMatrix,
    #[serde(skip)]
    nilpotent: FpMatrix,
}

/// The cyclic submodule generated by one vector, with its chain basis
/// `g, (σ-1)g, ..., (σ-1)^(length-1) g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicSummand {
    pub generator: FpVector,
    pub length: usize,
    pub basis: Vec<FpVector>,
}

/// A list of cyclic summands whose chain bases together form a basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub parts: Vec<CyclicSummand>,
}

/// Number of indecomposable summands of each length `1..=p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiplicityVector {
    counts: Vec<usize>,
}

impl MultiplicityVector {
    pub fn zero(p: u64) -> Self {
        Self {
            counts: vec![0; p as usize],
        }
    }

    /// From `(length, count)` pairs; lengths outside `1..=p` are rejected.
    pub fn from_pairs(p: u64, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut m = Self::zero(p);
        for &(len, count) in pairs {
            if len == 0 || len > p as usize {
                return Err(Error::InvalidModule(format!(
                    "block length {len} outside 1..={p}"
                )));
            }
            m.counts[len - 1] += count;
        }
        Ok(m)
    }

    pub fn p(&self) -> u64 {
        self.counts.len() as u64
    }

    /// Multiplicity of blocks of length `len` (zero outside `1..=p`).
    pub fn get(&self, len: usize) -> usize {
        if len == 0 {
            return 0;
        }
        self.counts.get(len - 1).copied().unwrap_or(0)
    }

    pub fn set(&mut self, len: usize, count: usize) {
        self.counts[len - 1] = count;
    }

    /// `Σ i·m_i`, the dimension of a module with this profile.
    pub fn total_dim(&self) -> usize {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1) * c)
            .sum()
    }

    pub fn summand_count(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn to_map(&self) -> BTreeMap<usize, usize> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (i + 1, c))
            .collect()
    }

    /// Lengths in weakly decreasing order, one entry per summand.
    pub fn lengths(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for len in (1..=self.counts.len()).rev() {
            out.extend(std::iter::repeat_n(len, self.get(len)));
        }
        out
    }

    pub fn from_lengths(p: u64, lengths: &[usize]) -> Result<Self> {
        let pairs: Vec<_> = lengths.iter().map(|&l| (l, 1)).collect();
        Self::from_pairs(p, &pairs)
    }
}

impl Serialize for MultiplicityVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_map().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiplicityVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<usize, usize>::deserialize(d)?;
        let p = map.keys().max().copied().unwrap_or(0);
        let mut counts = vec![0; p];
        for (k, v) in map {
            if k == 0 {
                return Err(serde::de::Error::custom("block length 0"));
            }
            counts[k - 1] = v;
        }
        Ok(Self { counts })
    }
}

impl std::fmt::Display for MultiplicityVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}", i + 1, c)?;
        }
        write!(f, "}}")
    }
}

impl GModule {
    /// Validates `sigma` (square, `sigma^p = I`) and builds the module.
    pub fn new(sigma: FpMatrix) -> Result<Self> {
        let p = sigma.p();
        if !sigma.is_square() {
            return Err(Error::InvalidModule(format!(
                "sigma is {}x{}",
                sigma.rows(),
                sigma.cols()
            )));
        }
        let n = sigma.rows();
        let id = FpMatrix::identity(p, n);
        if sigma.pow(p)? != id {
            return Err(Error::InvalidModule("sigma^p is not the identity".into()));
        }
        let nilpotent = sigma.sub(&id)?;
        Ok(Self {
            p,
            sigma,
            nilpotent,
        })
    }

    /// The trivial module of dimension `dim`.
    pub fn trivial(p: u64, dim: usize) -> Self {
        Self::new(FpMatrix::identity(p, dim)).expect("identity is a valid action")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.sigma.rows()
    }

    pub fn sigma(&self) -> &FpMatrix {
        &self.sigma
    }

    /// The nilpotent operator `σ - 1`.
    pub fn nilpotent(&self) -> &FpMatrix {
        &self.nilpotent
    }

    pub fn apply_sigma(&self, v: &FpVector) -> FpVector {
        self.sigma.mul_vec(v).expect("vector length matches module")
    }

    pub fn apply_nilpotent(&self, v: &FpVector) -> FpVector {
        self.nilpotent.mul_vec(v).expect("vector length matches module")
    }

    fn nilpotent_power(&self, i: usize) -> FpMatrix {
        self.nilpotent.pow(i as u64).expect("square matrix")
    }

    /// `[dim J_1, ..., dim J_p]` with `J_i = ker (σ-1)^i`.
    pub fn socle_series(&self) -> Vec<usize> {
        (1..=self.p as usize)
            .map(|i| self.dim() - self.nilpotent_power(i).rank())
            .collect()
    }

    /// Basis of `J_i = ker (σ-1)^i`.
    pub fn socle_layer(&self, i: usize) -> Vec<FpVector> {
        self.nilpotent_power(i).kernel_basis()
    }

    /// The group-ring norm `N = 1 + σ + ... + σ^(p-1)` as a matrix.
    pub fn norm_operator(&self) -> FpMatrix {
        let n = self.dim();
        let mut acc = FpMatrix::zero(self.p, n, n);
        let mut power = FpMatrix::identity(self.p, n);
        for _ in 0..self.p {
            acc = acc.add(&power).expect("same shape");
            power = power.mul(&self.sigma).expect("same shape");
        }
        acc
    }

    /// Block multiplicities from the ranks `r_j` of `(σ-1)^j`:
    /// `m_i = r_(i-1) - 2 r_i + r_(i+1)`.
    pub fn jordan_multiplicities(&self) -> MultiplicityVector {
        let p = self.p as usize;
        let ranks: Vec<i64> = (0..=p + 1)
            .map(|j| {
                if j == 0 {
                    self.dim() as i64
                } else if j >= p {
                    0
                } else {
                    self.nilpotent_power(j).rank() as i64
                }
            })
            .collect();
        let mut m = MultiplicityVector::zero(self.p);
        for i in 1..=p {
            let v = ranks[i - 1] - 2 * ranks[i] + ranks[i + 1];
            debug_assert!(v >= 0);
            m.set(i, v as usize);
        }
        m
    }

    /// The cyclic submodule `M_v` generated by `v`.
    pub fn cyclic_submodule(&self, v: &FpVector) -> Result<CyclicSummand> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in module of dimension {}",
                v.len(),
                self.dim()
            )));
        }
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        let mut basis = vec![v.clone()];
        loop {
            let next = self.apply_nilpotent(basis.last().unwrap());
            if next.is_zero() {
                break;
            }
            basis.push(next);
        }
        Ok(CyclicSummand {
            generator: v.clone(),
            length: basis.len(),
            basis,
        })
    }

    /// A Jordan basis for `σ - 1`, grouped into cyclic summands.
    ///
    /// Chain tops are chosen from the longest length down. At length `L` the
    /// already committed subspace is `J_(L-1)` plus the level-`L` parts of the
    /// longer chains; new tops extend it to `J_L` in kernel-basis order.
    pub fn decompose_jordan(&self) -> Decomposition {
        let n = self.dim();
        let p = self.p;
        let mut parts: Vec<CyclicSummand> = Vec::new();
        for len in (1..=p as usize).rev() {
            let layer = self.socle_layer(len);
            let mut committed = if len > 1 {
                self.socle_layer(len - 1)
            } else {
                Vec::new()
            };
            for part in &parts {
                // (σ-1)^(part.length - len) g sits at depth len.
                committed.push(part.basis[part.length - len].clone());
            }
            let tops = fplin::extend_basis(p, n, &committed, &layer);
            for g in tops {
                parts.push(self.cyclic_submodule(&g).expect("top vector is nonzero"));
            }
        }
        Decomposition { parts }
    }

    /// Checks that `parts` are cyclic chains closed under `σ` whose bases
    /// stack to a basis of the whole module.
    pub fn verify_direct_sum(&self, parts: &[CyclicSummand]) -> bool {
        let n = self.dim();
        let p = self.p;
        let mut all = Vec::new();
        for part in parts {
            if part.length == 0 || part.basis.len() != part.length || part.generator.len() != n {
                return false;
            }
            if part.basis[0] != part.generator {
                return false;
            }
            for k in 1..part.length {
                if part.basis[k] != self.apply_nilpotent(&part.basis[k - 1]) {
                    return false;
                }
            }
            let last = part.basis.last().unwrap();
            if last.is_zero() || !self.apply_nilpotent(last).is_zero() {
                return false;
            }
            let mut closed = part.basis.clone();
            closed.extend(part.basis.iter().map(|b| self.apply_sigma(b)));
            if fplin::rank_of(p, n, &closed) != part.length {
                return false;
            }
            all.extend(part.basis.iter().cloned());
        }
        let total: usize = parts.iter().map(|s| s.length).sum();
        total == n && fplin::rank_of(p, n, &all) == n
    }

    /// Basis of the fixed submodule `ker(σ - 1)`.
    pub fn fixed_submodule(&self) -> Vec<FpVector> {
        self.nilpotent.kernel_basis()
    }
}

impl Decomposition {
    pub fn profile(&self, p: u64) -> MultiplicityVector {
        let lengths: Vec<usize> = self.parts.iter().map(|s| s.length).collect();
        MultiplicityVector::from_lengths(p, &lengths).expect("lengths are within 1..=p")
    }
}

/// The block-diagonal unipotent matrix with the given block profile.
pub fn normal_form(p: u64, profile: &MultiplicityVector) -> FpMatrix {
    let n = profile.total_dim();
    let mut m = FpMatrix::identity(p, n);
    let mut offset = 0;
    for len in profile.lengths() {
        for k in 0..len.saturating_sub(1) {
            m.set(offset + k, offset + k + 1, 1);
        }
        offset += len;
    }
    m
}

/// A random invertible `n x n` matrix drawn from `rng`.
pub fn random_invertible(p: u64, n: usize, rng: &mut impl Rng) -> (FpMatrix, FpMatrix) {
    loop {
        let entries = (0..n * n).map(|_| rng.gen_range(0..p)).collect();
        let s = FpMatrix::new(p, n, n, entries).expect("shape is consistent");
        if let Some(inv) = s.inverse() {
            return (s, inv);
        }
    }
}

/// The normal form of `profile` conjugated by a seeded random invertible matrix.
pub fn random_module(p: u64, profile: &MultiplicityVector, seed: u64) -> GModule {
    assert_eq!(profile.p(), p, "profile is over a different prime");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = normal_form(p, profile);
    let n = base.rows();
    let (s, s_inv) = random_invertible(p, n, &mut rng);
    let sigma = s.mul(&base).and_then(|m| m.mul(&s_inv)).expect("square");
    GModule::new(sigma).expect("conjugate of a unipotent matrix has order dividing p")
}

/// A random block profile with total dimension exactly `dim`.
pub fn random_profile(p: u64, dim: usize, rng: &mut impl Rng) -> MultiplicityVector {
    let mut m = MultiplicityVector::zero(p);
    let mut left = dim;
    while left > 0 {
        let len = rng.gen_range(1..=left.min(p as usize));
        m.set(len, m.get(len) + 1);
        left -= len;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(p: u64, len: usize) -> GModule {
        let prof = MultiplicityVector::from_pairs(p, &[(len, 1)]).unwrap();
        GModule::new(normal_form(p, &prof)).unwrap()
    }

    fn chain_count(m: &GModule) -> MultiplicityVector {
        // layer i = number of blocks of length >= i
        let s = m.socle_series();
        let p = m.p() as usize;
        let layer = |i: usize| -> usize {
            if i == 0 || i > p {
                return 0;
            }
            s[i - 1] - if i >= 2 { s[i - 2] } else { 0 }
        };
        let mut out = MultiplicityVector::zero(m.p());
        for i in 1..=p {
            out.set(i, layer(i) - layer(i + 1));
        }
        out
    }

    #[test]
    fn rejects_invalid_sigma() {
        let bad = FpMatrix::from_rows(3, &[vec![2, 0], vec![0, 1]]).unwrap();
        // 2^3 = 8 = 2 mod 3, so sigma^3 != I
        assert!(matches!(GModule::new(bad), Err(Error::InvalidModule(_))));
        let rect = FpMatrix::zero(3, 2, 3);
        assert!(GModule::new(rect).is_err());
    }

    #[test]
    fn socle_examples() {
        assert_eq!(GModule::trivial(3, 4).socle_series(), vec![4, 4, 4]);
        assert_eq!(block(3, 3).socle_series(), vec![1, 2, 3]);
        let prof = MultiplicityVector::from_pairs(3, &[(3, 2)]).unwrap();
        assert_eq!(random_module(3, &prof, 11).socle_series(), vec![2, 4, 6]);
    }

    #[test]
    fn norm_examples() {
        assert!(GModule::trivial(2, 3).norm_operator().is_zero());
        assert!(GModule::trivial(3, 3).norm_operator().is_zero());
        assert_eq!(block(3, 3).norm_operator().rank(), 1);
    }

    #[test]
    fn multiplicity_examples() {
        let m = block(3, 3).jordan_multiplicities();
        assert_eq!(m.to_map(), BTreeMap::from([(1, 0), (2, 0), (3, 1)]));
        let m = GModule::trivial(5, 4).jordan_multiplicities();
        assert_eq!(m.get(1), 4);
        assert_eq!(m.total_dim(), 4);
        let prof = MultiplicityVector::from_pairs(3, &[(1, 1), (2, 2)]).unwrap();
        let module = random_module(3, &prof, 5);
        assert_eq!(module.jordan_multiplicities(), prof);
        assert_eq!(chain_count(&module), prof);
    }

    #[test]
    fn cyclic_examples() {
        let b = block(3, 3);
        let top = FpVector::new(3, vec![0, 0, 1]);
        assert_eq!(b.cyclic_submodule(&top).unwrap().length, 3);
        let fixed = FpVector::new(3, vec![1, 0, 0]);
        assert_eq!(b.cyclic_submodule(&fixed).unwrap().length, 1);
        assert_eq!(
            b.cyclic_submodule(&FpVector::zero(3, 3)),
            Err(Error::ZeroVector)
        );
        // fixed vector plus a 2-block generator
        let prof = MultiplicityVector::from_pairs(3, &[(1, 1), (2, 1)]).unwrap();
        let m = GModule::new(normal_form(3, &prof)).unwrap();
        // normal form puts the 2-block first: e0 <- e1, then e2 fixed
        let v = FpVector::new(3, vec![0, 1, 1]);
        let c = m.cyclic_submodule(&v).unwrap();
        assert_eq!(c.length, 2);
        assert!(!m.apply_nilpotent(&v).is_zero());
        assert!(m.apply_nilpotent(&m.apply_nilpotent(&v)).is_zero());
    }

    #[test]
    fn decomposition_examples() {
        let d = GModule::trivial(3, 2).decompose_jordan();
        assert_eq!(d.parts.len(), 2);
        assert!(d.parts.iter().all(|s| s.length == 1));
        let b = block(5, 5);
        let d = b.decompose_jordan();
        assert_eq!(d.parts.len(), 1);
        assert_eq!(d.parts[0].length, 5);
        let top = &d.parts[0].generator;
        assert!(!b.nilpotent().pow(4).unwrap().mul_vec(top).unwrap().is_zero());
    }

    #[test]
    fn direct_sum_negative_controls() {
        let prof = MultiplicityVector::from_pairs(3, &[(1, 1), (2, 1), (3, 1)]).unwrap();
        let m = random_module(3, &prof, 9);
        let d = m.decompose_jordan();
        assert!(m.verify_direct_sum(&d.parts));
        let mut dup = d.parts.clone();
        dup.push(d.parts[0].clone());
        assert!(!m.verify_direct_sum(&dup));
        let dropped = &d.parts[1..];
        assert!(!m.verify_direct_sum(dropped));
    }

    #[test]
    fn fixed_examples() {
        assert_eq!(GModule::trivial(2, 3).fixed_submodule().len(), 3);
        assert_eq!(block(3, 3).fixed_submodule().len(), 1);
        let prof = MultiplicityVector::from_pairs(5, &[(1, 2), (3, 1), (5, 2)]).unwrap();
        assert_eq!(random_module(5, &prof, 3).fixed_submodule().len(), 5);
    }

    #[test]
    fn random_module_examples() {
        let one = MultiplicityVector::from_pairs(3, &[(1, 1)]).unwrap();
        assert_eq!(random_module(3, &one, 77).sigma(), &FpMatrix::identity(3, 1));
        let free = MultiplicityVector::from_pairs(5, &[(5, 1)]).unwrap();
        assert_eq!(random_module(5, &free, 1).jordan_multiplicities(), free);
    }

    #[test]
    fn seeded_roundtrip_and_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for seed in 0..100u64 {
            let p = [2u64, 3, 5][seed as usize % 3];
            let dim = rng.gen_range(1..=12);
            let prof = random_profile(p, dim, &mut rng);
            let m = random_module(p, &prof, seed);
            assert_eq!(m.jordan_multiplicities(), prof);
            assert_eq!(chain_count(&m), prof);
            let s = m.socle_series();
            assert_eq!(*s.last().unwrap(), dim);
            for w in s.windows(2) {
                assert!(w[0] <= w[1]);
            }
            let layers: Vec<usize> = (0..s.len())
                .map(|i| s[i] - if i > 0 { s[i - 1] } else { 0 })
                .collect();
            for w in layers.windows(2) {
                assert!(w[0] >= w[1]);
            }
            let n = m.norm_operator();
            assert_eq!(n, m.nilpotent().pow(p - 1).unwrap());
            assert_eq!(n.rank(), prof.get(p as usize));
            let d = m.decompose_jordan();
            assert!(m.verify_direct_sum(&d.parts));
            assert_eq!(d.profile(p), prof);
            // conjugation invariance
            let (s_mat, s_inv) = random_invertible(p, dim, &mut rng);
            let conj = GModule::new(s_mat.mul(m.sigma()).unwrap().mul(&s_inv).unwrap()).unwrap();
            assert_eq!(conj.jordan_multiplicities(), prof);
        }
    }

    #[test]
    fn decomposition_is_deterministic() {
        let prof = MultiplicityVector::from_pairs(3, &[(2, 2), (3, 1)]).unwrap();
        let m = random_module(3, &prof, 42);
        assert_eq!(m.decompose_jordan(), m.decompose_jordan());
    }
}
