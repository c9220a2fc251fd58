//! Monobit, block frequency and cumulative sums.

use super::special::{erfc, igamc, normal_cdf};
use super::Outcome;
use crate::error::Result;

pub fn frequency(bits: &[u8]) -> Result<Outcome> {
    if bits.is_empty() {
        return Ok(Outcome::na("empty sequence"));
    }
    let n = bits.len() as f64;
    let ones = bits.iter().filter(|&&b| b == 1).count() as f64;
    let s = 2.0 * ones - n;
    let s_obs = s.abs() / n.sqrt();
    Ok(Outcome::one(erfc(s_obs / std::f64::consts::SQRT_2)))
}

pub fn block_frequency(bits: &[u8], block_len: usize) -> Result<Outcome> {
    if block_len == 0 || bits.len() < block_len {
        return Ok(Outcome::na(format!("needs at least one block of {block_len} bits")));
    }
    let blocks = bits.len() / block_len;
    let m = block_len as f64;
    let chi2: f64 = bits
        .chunks_exact(block_len)
        .map(|blk| {
            let pi = blk.iter().filter(|&&b| b == 1).count() as f64 / m;
            (pi - 0.5).powi(2)
        })
        .sum::<f64>()
        * 4.0
        * m;
    Ok(Outcome::one(igamc(blocks as f64 / 2.0, chi2 / 2.0)?))
}

/// Forward and backward cumulative sums.
pub fn cumulative_sums(bits: &[u8]) -> Result<Outcome> {
    if bits.is_empty() {
        return Ok(Outcome::na("empty sequence"));
    }
    let max_excursion = |it: &mut dyn Iterator<Item = &u8>| {
        let mut s: i64 = 0;
        let mut z: i64 = 0;
        for &b in it {
            s += if b == 1 { 1 } else { -1 };
            z = z.max(s.abs());
        }
        z
    };
    let n = bits.len() as i64;
    let forward = max_excursion(&mut bits.iter());
    let backward = max_excursion(&mut bits.iter().rev());
    Ok(Outcome::PValues(vec![cusum_p(n, forward), cusum_p(n, backward)]))
}

fn cusum_p(n: i64, z: i64) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let zf = z as f64;
    // integer division truncating toward zero, as in the reference code
    let start = (-n / z + 1) / 4;
    let finish = (n / z - 1) / 4;
    let mut sum1 = 0.0;
    for k in start..=finish {
        let k = k as f64;
        sum1 += normal_cdf((4.0 * k + 1.0) * zf / sqrt_n) - normal_cdf((4.0 * k - 1.0) * zf / sqrt_n);
    }
    let start = (-n / z - 3) / 4;
    let mut sum2 = 0.0;
    for k in start..=finish {
        let k = k as f64;
        sum2 += normal_cdf((4.0 * k + 3.0) * zf / sqrt_n) - normal_cdf((4.0 * k + 1.0) * zf / sqrt_n);
    }
    (1.0 - sum1 + sum2).clamp(0.0, 1.0)
}
