//! Oracles written independently of the library: plain `Vec<Vec<u64>>`
//! matrices and elementary number theory.

#![allow(dead_code)]

use std::path::PathBuf;

pub fn corpus_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus/local.jsonl")
}

fn inv_mod(a: u64, p: u64) -> u64 {
    (1..p).find(|x| a * x % p == 1).expect("nonzero mod p")
}

pub fn rank_mod(p: u64, m: &[Vec<u64>]) -> usize {
    let mut m: Vec<Vec<u64>> = m.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, piv);
        let inv = inv_mod(m[rank][c], p);
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..rows {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c];
                for k in 0..cols {
                    m[r][k] = (m[r][k] + p * p - f * m[rank][k] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn mat_mul(p: u64, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| (0..n).map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum::<u64>() % p).collect())
        .collect()
}

pub fn minus_identity(p: u64, s: &[Vec<u64>]) -> Vec<Vec<u64>> {
    s.iter()
        .enumerate()
        .map(|(i, r)| r.iter().enumerate().map(|(j, x)| (x + p - u64::from(i == j)) % p).collect())
        .collect()
}

/// Jordan block counts `m_1..m_p` of a unipotent matrix from the ranks of
/// `(σ - 1)^i`.
pub fn jordan_from_ranks(p: u64, sigma: &[Vec<u64>]) -> Vec<usize> {
    let n = sigma.len();
    let t = minus_identity(p, sigma);
    let mut ranks = vec![n];
    let mut power: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
    for _ in 0..=p {
        power = mat_mul(p, &power, &t);
        ranks.push(rank_mod(p, &power));
    }
    // blocks of length >= i: ranks[i-1] - ranks[i]
    let at_least = |i: usize| ranks[i - 1] - ranks[i];
    (1..=p as usize).map(|i| at_least(i) - at_least(i + 1)).collect()
}

pub fn fixed_dim(p: u64, sigma: &[Vec<u64>]) -> usize {
    sigma.len() - rank_mod(p, &minus_identity(p, sigma))
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// `v_ℓ(n)` and the prime-to-`ℓ` part.
pub fn split_val(mut n: i64, ell: i64) -> (u32, i64) {
    let mut v = 0;
    while n % ell == 0 {
        n /= ell;
        v += 1;
    }
    (v, n)
}

/// Whether `ζ_p` is a norm from `Q_ℓ(a^(1/p))`, `ℓ ≠ p`, `a` an integer:
/// the tame symbol `(ζ, a)` is `ζ^(v(a) (ℓ-1)/p)`, trivial iff
/// `p | v(a)` or `p^2 | ℓ - 1`.
pub fn tame_upsilon(ell: u64, p: u64, v_a: u32) -> bool {
    (v_a as u64).is_multiple_of(p) || (ell - 1).is_multiple_of(p * p)
}

/// Whether `-1` is a norm from `Q_2(√a)` for an integer `a = 2^k u`:
/// `(-1, a)_2 = (-1)^((u-1)/2)`.
pub fn dyadic_upsilon(a: i64) -> bool {
    let (_, u) = split_val(a, 2);
    u.rem_euclid(4) == 1
}
