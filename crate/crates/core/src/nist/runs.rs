//! Runs and longest run of ones.

use super::special::{erfc, igamc};
use super::Outcome;
use crate::error::Result;

pub fn runs(bits: &[u8]) -> Result<Outcome> {
    let n = bits.len();
    if n < 2 {
        return Ok(Outcome::na("runs needs at least 2 bits"));
    }
    let nf = n as f64;
    let pi = bits.iter().filter(|&&b| b == 1).count() as f64 / nf;
    let tau = 2.0 / nf.sqrt();
    // frequency prerequisite
    if (pi - 0.5).abs() >= tau {
        return Ok(Outcome::one(0.0));
    }
    let v_obs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let num = (v_obs as f64 - 2.0 * nf * pi * (1.0 - pi)).abs();
    let den = 2.0 * (2.0 * nf).sqrt() * pi * (1.0 - pi);
    Ok(Outcome::one(erfc(num / den)))
}

struct LongestRunTable {
    block: usize,
    low: usize,
    pi: &'static [f64],
}

const LONGEST_RUN_8: LongestRunTable = LongestRunTable { block: 8, low: 1, pi: &[0.2148, 0.3672, 0.2305, 0.1875] };
const LONGEST_RUN_128: LongestRunTable =
    LongestRunTable { block: 128, low: 4, pi: &[0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124] };
const LONGEST_RUN_10000: LongestRunTable =
    LongestRunTable { block: 10_000, low: 10, pi: &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727] };

/// Longest run of ones per block, with block size chosen from the length.
pub fn longest_run(bits: &[u8]) -> Result<Outcome> {
    let n = bits.len();
    let table = if n < 128 {
        return Ok(Outcome::na("longest run needs at least 128 bits"));
    } else if n < 6272 {
        &LONGEST_RUN_8
    } else if n < 750_000 {
        &LONGEST_RUN_128
    } else {
        &LONGEST_RUN_10000
    };
    let k = table.pi.len() - 1;
    let blocks = n / table.block;
    let mut nu = vec![0u64; k + 1];
    for blk in bits.chunks_exact(table.block) {
        let mut run = 0usize;
        let mut longest = 0usize;
        for &b in blk {
            if b == 1 {
                run += 1;
                longest = longest.max(run);
            } else {
                run = 0;
            }
        }
        let class = longest.clamp(table.low, table.low + k) - table.low;
        nu[class] += 1;
    }
    let nb = blocks as f64;
    let chi2: f64 = nu.iter().zip(table.pi).map(|(&v, &p)| (v as f64 - nb * p).powi(2) / (nb * p)).sum();
    Ok(Outcome::one(igamc(k as f64 / 2.0, chi2 / 2.0)?))
}
