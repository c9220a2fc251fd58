//! Serial and approximate entropy tests over cyclic m-bit patterns.

use super::special::igamc;
use super::Outcome;
use crate::error::{Error, Result};

/// Counts of every cyclic window of length `m`, `m <= 24`.
pub fn cyclic_counts(bits: &[u8], m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << m];
    if m == 0 {
        counts[0] = bits.len() as u64;
        return counts;
    }
    let n = bits.len();
    let mask = (1usize << m) - 1;
    let mut v = 0usize;
    for &b in &bits[..(m - 1).min(n)] {
        v = (v << 1) | usize::from(b);
    }
    for i in 0..n {
        let b = bits[(i + m - 1) % n];
        v = ((v << 1) | usize::from(b)) & mask;
        counts[v] += 1;
    }
    counts
}

/// Collapses counts for length `m` into counts for length `m - 1`.
fn marginal(counts: &[u64]) -> Vec<u64> {
    counts.chunks_exact(2).map(|p| p[0] + p[1]).collect()
}

fn psi_sq(counts: &[u64], n: usize) -> f64 {
    if counts.len() == 1 {
        return 0.0;
    }
    let sum: f64 = counts.iter().map(|&c| (c as f64).powi(2)).sum();
    sum * counts.len() as f64 / n as f64 - n as f64
}

pub fn serial(bits: &[u8], m: usize) -> Result<Outcome> {
    if !(2..=24).contains(&m) {
        return Err(Error::Config(format!("serial block length {m} outside 2..=24")));
    }
    let n = bits.len();
    if n < m {
        return Ok(Outcome::na("serial needs at least m bits"));
    }
    let c0 = cyclic_counts(bits, m);
    let c1 = marginal(&c0);
    let c2 = marginal(&c1);
    let (p0, p1, p2) = (psi_sq(&c0, n), psi_sq(&c1, n), psi_sq(&c2, n));
    let del1 = p0 - p1;
    let del2 = p0 - 2.0 * p1 + p2;
    let a1 = 2f64.powi(m as i32 - 2);
    let a2 = 2f64.powi(m as i32 - 3);
    Ok(Outcome::PValues(vec![igamc(a1, (del1 / 2.0).max(0.0))?, igamc(a2, (del2 / 2.0).max(0.0))?]))
}

fn phi(counts: &[u64], n: usize) -> f64 {
    let nf = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / nf;
            p * p.ln()
        })
        .sum()
}

pub fn approximate_entropy(bits: &[u8], m: usize) -> Result<Outcome> {
    if !(1..=23).contains(&m) {
        return Err(Error::Config(format!("approximate entropy block length {m} outside 1..=23")));
    }
    let n = bits.len();
    if n <= m {
        return Ok(Outcome::na("approximate entropy needs more than m bits"));
    }
    let hi = cyclic_counts(bits, m + 1);
    let lo = marginal(&hi);
    let ap_en = phi(&lo, n) - phi(&hi, n);
    let chi2 = 2.0 * n as f64 * (std::f64::consts::LN_2 - ap_en);
    Ok(Outcome::one(igamc(2f64.powi(m as i32 - 1), (chi2 / 2.0).max(0.0))?))
}
