//! The interface between field arithmetic and module theory.
//!
//! A [`KummerTower`] is `F ⊂ K = F(a^(1/p))` with `ζ_p ∈ F`, the generator
//! `σ` normalized by `σ(root_a) = ζ_p · root_a`, the norm and trace to `F`,
//! and `p`-th power tests. Backends where `K^×/K^×p` is finite also implement
//! [`FiniteClasses`], which is enough to build a [`JPresentation`]: an
//! explicit `F_p`-basis of `J = K^×/K^×p` with the matrix of `σ`.

use std::fmt::Debug;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fplin::{self, FpMatrix, FpVector};
use crate::gmodule::GModule;

pub trait KummerTower: Send + Sync {
    type F: Clone + Debug + Send + Sync;
    type K: Clone + Debug + Send + Sync;

    fn p(&self) -> u64;

    // ---- F ----
    fn f_one(&self) -> Self::F;
    fn f_mul(&self, x: &Self::F, y: &Self::F) -> Self::F;
    fn f_inv(&self, x: &Self::F) -> Result<Self::F>;
    fn f_eq(&self, x: &Self::F, y: &Self::F) -> bool;
    fn is_pth_power_in_f(&self, x: &Self::F) -> Result<bool>;
    fn pth_root_in_f(&self, x: &Self::F) -> Result<Option<Self::F>>;
    fn f_text(&self, x: &Self::F) -> String;

    // ---- K ----
    fn k_one(&self) -> Self::K;
    fn k_mul(&self, x: &Self::K, y: &Self::K) -> Self::K;
    fn k_add(&self, x: &Self::K, y: &Self::K) -> Self::K;
    fn k_inv(&self, x: &Self::K) -> Result<Self::K>;
    fn k_eq(&self, x: &Self::K, y: &Self::K) -> bool;
    fn k_is_zero(&self, x: &Self::K) -> bool;
    fn k_text(&self, x: &Self::K) -> String;
    fn embed(&self, x: &Self::F) -> Self::K;

    fn sigma(&self, x: &Self::K) -> Result<Self::K>;
    fn norm(&self, x: &Self::K) -> Result<Self::F>;
    fn trace(&self, x: &Self::K) -> Result<Self::F>;
    fn is_pth_power(&self, x: &Self::K) -> Result<bool>;

    /// The distinguished primitive `p`-th root of unity in `F`.
    fn zeta(&self) -> Self::F;
    fn a(&self) -> Self::F;
    /// `a^(1/p)` with `σ(root_a) = ζ_p root_a`.
    fn root_a(&self) -> Self::K;
    /// A basis of `K` over `F`.
    fn k_basis_over_f(&self) -> Vec<Self::K>;
    /// A pseudo-random nonzero element of `K`, for sampling.
    fn random_k(&self, rng: &mut ChaCha8Rng) -> Self::K;
    /// A pseudo-random nonzero element of `F`, for sampling.
    fn random_f(&self, rng: &mut ChaCha8Rng) -> Self::F;

    /// Whether `K^×/K^×p` is finite for this backend.
    fn is_finite(&self) -> bool {
        false
    }

    fn f_pow(&self, x: &Self::F, e: i64) -> Result<Self::F> {
        let base = if e < 0 { self.f_inv(x)? } else { x.clone() };
        let mut out = self.f_one();
        let mut b = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                out = self.f_mul(&out, &b);
            }
            b = self.f_mul(&b, &b);
            n >>= 1;
        }
        Ok(out)
    }

    fn k_pow(&self, x: &Self::K, e: i64) -> Result<Self::K> {
        let base = if e < 0 { self.k_inv(x)? } else { x.clone() };
        let mut out = self.k_one();
        let mut b = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                out = self.k_mul(&out, &b);
            }
            b = self.k_mul(&b, &b);
            n >>= 1;
        }
        Ok(out)
    }

    fn k_div(&self, x: &Self::K, y: &Self::K) -> Result<Self::K> {
        Ok(self.k_mul(x, &self.k_inv(y)?))
    }

    fn sigma_pow(&self, x: &Self::K, i: u64) -> Result<Self::K> {
        let mut out = x.clone();
        for _ in 0..i % self.p() {
            out = self.sigma(&out)?;
        }
        Ok(out)
    }

    /// `γ^(σ-1) = σ(γ)/γ`.
    fn sigma_minus_one(&self, x: &Self::K) -> Result<Self::K> {
        self.k_div(&self.sigma(x)?, x)
    }
}

/// Backends with finite `K^×/K^×p`: canonical class generators with exact
/// discrete logarithms in `K` and in `F`.
pub trait FiniteClasses: KummerTower {
    fn k_generators(&self) -> &[Self::K];
    fn k_dlog(&self, x: &Self::K) -> Result<FpVector>;
    fn f_generators(&self) -> &[Self::F];
    fn f_dlog(&self, x: &Self::F) -> Result<FpVector>;
}

/// A class of `J` with coordinates in a presentation basis.
#[derive(Debug, Clone)]
pub struct ClassVector<K> {
    pub coords: FpVector,
    pub representative: K,
}

/// An explicit `F_p[G]`-module structure on `J = K^×/K^×p`.
///
/// The basis starts with classes of elements of `F` (spanning `ε(F^×)`) and is
/// completed by canonical generators of `K`.
#[derive(Debug, Clone)]
pub struct JPresentation<K> {
    pub p: u64,
    pub basis_reps: Vec<K>,
    pub labels: Vec<String>,
    pub module: GModule,
    /// Positions of the basis spanning `ε(F^×)`.
    pub epsilon_basis: Vec<usize>,
    /// Class of `a` in `F^×/F^×p`.
    pub a_class: FpVector,
    /// Class of `ζ_p` in `J`.
    pub zeta_class: FpVector,
    /// Class of `ζ_p` in `F^×/F^×p`.
    pub zeta_f_class: FpVector,
    /// `dim F^×/F^×p`.
    pub f_dim: usize,
    /// Norm on classes, `J → F^×/F^×p`.
    pub norm_map: FpMatrix,
    /// `ε: F^×/F^×p → J`.
    pub epsilon_map: FpMatrix,
    /// Canonical generator coordinates to basis coordinates.
    change: FpMatrix,
}

/// Summary of how the presentation was certified.
#[derive(Debug, Clone, Serialize)]
pub struct PresentationCertificate {
    pub dim_j: usize,
    pub dim_f_classes: usize,
    pub k_products_tested: u64,
    pub f_products_tested: u64,
}

impl<K> JPresentation<K> {
    pub fn dim(&self) -> usize {
        self.basis_reps.len()
    }

    /// `ε(F^×)` as vectors of `J`.
    pub fn epsilon_vectors(&self) -> Vec<FpVector> {
        self.epsilon_basis
            .iter()
            .map(|&i| FpVector::unit(self.p, self.dim(), i))
            .collect()
    }
}

/// Keeps the candidates that are independent modulo `p`-th powers, testing
/// every product `c · Π kept_i^(e_i)`. Over all candidates this tests every
/// nontrivial class combination up to scaling. Returns kept indices and the
/// number of products tested.
pub fn prune_independent<E, M, T>(
    p: u64,
    candidates: &[E],
    mul: M,
    is_pth_power: T,
) -> Result<(Vec<usize>, u64)>
where
    E: Clone + Send + Sync,
    M: Fn(&E, &E) -> E + Sync,
    T: Fn(&E) -> Result<bool> + Sync,
{
    let mut kept: Vec<usize> = Vec::new();
    let mut tested = 0u64;
    for (ci, c) in candidates.iter().enumerate() {
        let s = kept.len();
        let vectors: Vec<FpVector> = fplin::all_vectors(p, s).collect();
        tested += vectors.len() as u64;
        let dependent = vectors
            .par_iter()
            .map(|e| -> Result<bool> {
                let mut prod = c.clone();
                for (k, &idx) in kept.iter().enumerate() {
                    for _ in 0..e.coords()[k] {
                        prod = mul(&prod, &candidates[idx]);
                    }
                }
                is_pth_power(&prod)
            })
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .any(|b| b);
        if !dependent {
            kept.push(ci);
        }
    }
    Ok((kept, tested))
}

/// Builds and certifies the presentation of `J`.
pub fn build_j<T: FiniteClasses>(
    tower: &T,
) -> Result<(JPresentation<T::K>, PresentationCertificate)> {
    if !tower.is_finite() {
        return Err(Error::InfiniteJ);
    }
    let p = tower.p();
    let kgens = tower.k_generators().to_vec();
    let fgens = tower.f_generators().to_vec();
    let n = kgens.len();
    let fd = fgens.len();

    let (kept, k_tested) = prune_independent(
        p,
        &kgens,
        |x, y| tower.k_mul(x, y),
        |x| tower.is_pth_power(x),
    )?;
    if kept.len() != n {
        return Err(Error::BackendFailure(format!(
            "K generators are dependent: kept {} of {n}",
            kept.len()
        )));
    }
    let (fkept, f_tested) = prune_independent(
        p,
        &fgens,
        |x, y| tower.f_mul(x, y),
        |x| tower.is_pth_power_in_f(x),
    )?;
    if fkept.len() != fd {
        return Err(Error::BackendFailure(format!(
            "F generators are dependent: kept {} of {fd}",
            fkept.len()
        )));
    }
    for (i, g) in kgens.iter().enumerate() {
        if tower.k_dlog(g)? != FpVector::unit(p, n, i) {
            return Err(Error::BackendFailure(format!("dlog of K generator {i} is wrong")));
        }
    }
    for (i, g) in fgens.iter().enumerate() {
        if tower.f_dlog(g)? != FpVector::unit(p, fd, i) {
            return Err(Error::BackendFailure(format!("dlog of F generator {i} is wrong")));
        }
    }

    // ε-part first, then canonical K generators.
    let embedded: Vec<T::K> = fgens.iter().map(|f| tower.embed(f)).collect();
    let eps_canon: Vec<FpVector> = embedded
        .iter()
        .map(|x| tower.k_dlog(x))
        .collect::<Result<_>>()?;
    let mut chosen: Vec<FpVector> = Vec::new();
    let mut reps: Vec<T::K> = Vec::new();
    let mut labels = Vec::new();
    for (j, v) in eps_canon.iter().enumerate() {
        if !v.is_zero() && !fplin::in_span(&chosen, v) {
            chosen.push(v.clone());
            reps.push(embedded[j].clone());
            labels.push(format!("F-gen {j}"));
        }
    }
    let eps_count = chosen.len();
    for i in 0..n {
        let v = FpVector::unit(p, n, i);
        if !fplin::in_span(&chosen, &v) {
            chosen.push(v);
            reps.push(kgens[i].clone());
            labels.push(format!("K-gen {i}"));
        }
    }
    let basis = FpMatrix::from_columns(p, n, &chosen)?;
    let change = basis
        .inverse()
        .ok_or_else(|| Error::BackendFailure("presentation basis is singular".into()))?;

    let to_basis = |x: &T::K| -> Result<FpVector> { change.mul_vec(&tower.k_dlog(x)?) };
    let sigma_cols: Vec<FpVector> = reps
        .iter()
        .map(|r| to_basis(&tower.sigma(r)?))
        .collect::<Result<_>>()?;
    let module = GModule::new(FpMatrix::from_columns(p, n, &sigma_cols)?)?;

    let norm_cols: Vec<FpVector> = reps
        .iter()
        .map(|r| tower.f_dlog(&tower.norm(r)?))
        .collect::<Result<_>>()?;
    let norm_map = FpMatrix::from_columns(p, fd, &norm_cols)?;
    let eps_cols: Vec<FpVector> = eps_canon
        .iter()
        .map(|v| change.mul_vec(v))
        .collect::<Result<_>>()?;
    let epsilon_map = FpMatrix::from_columns(p, n, &eps_cols)?;

    let zeta = tower.zeta();
    let pres = JPresentation {
        p,
        basis_reps: reps,
        labels,
        module,
        epsilon_basis: (0..eps_count).collect(),
        a_class: tower.f_dlog(&tower.a())?,
        zeta_class: to_basis(&tower.embed(&zeta))?,
        zeta_f_class: tower.f_dlog(&zeta)?,
        f_dim: fd,
        norm_map,
        epsilon_map,
        change,
    };
    let cert = PresentationCertificate {
        dim_j: n,
        dim_f_classes: fd,
        k_products_tested: k_tested,
        f_products_tested: f_tested,
    };
    Ok((pres, cert))
}

/// Coordinates of `[γ]` in the presentation basis.
pub fn reduce<T: FiniteClasses>(
    tower: &T,
    pres: &JPresentation<T::K>,
    gamma: &T::K,
) -> Result<ClassVector<T::K>> {
    let coords = pres.change.mul_vec(&tower.k_dlog(gamma)?)?;
    Ok(ClassVector {
        coords,
        representative: gamma.clone(),
    })
}

/// A representative `Π basis_reps_i^(e_i)` of the class with coordinates `e`.
pub fn lift<T: KummerTower>(tower: &T, pres: &JPresentation<T::K>, e: &FpVector) -> T::K {
    let mut out = tower.k_one();
    for (rep, &c) in pres.basis_reps.iter().zip(e.coords()) {
        for _ in 0..c {
            out = tower.k_mul(&out, rep);
        }
    }
    out
}

/// The norm on classes, `J → F^×/F^×p`.
pub fn norm_class_map<K>(pres: &JPresentation<K>) -> &FpMatrix {
    &pres.norm_map
}

/// Basis of `ε(F^×) ⊂ J`.
pub fn epsilon_image<K>(pres: &JPresentation<K>) -> Vec<FpVector> {
    pres.epsilon_vectors()
}

/// Every class of `J` hit by the norm, by enumeration of all `p^dim` classes.
pub fn norm_classes_hit<K>(pres: &JPresentation<K>) -> Vec<FpVector> {
    let mut seen: Vec<FpVector> = fplin::all_vectors(pres.p, pres.dim())
        .map(|e| pres.norm_map.mul_vec(&e).expect("shape"))
        .collect();
    seen.sort_by(|a, b| a.coords().cmp(b.coords()));
    seen.dedup();
    seen
}
