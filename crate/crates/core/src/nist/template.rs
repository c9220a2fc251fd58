//! Non-overlapping and overlapping template matching.

use super::special::{igamc, ln_gamma};
use super::Outcome;
use crate::error::{Error, Result};

const TEMPLATES_9: &str = include_str!("templates9.txt");

/// A template that cannot overlap a shifted copy of itself.
pub fn is_aperiodic(value: u32, m: u32) -> bool {
    (1..m).all(|shift| {
        let keep = m - shift;
        let mask = (1u32 << keep) - 1;
        // suffix of length `keep` against prefix of length `keep`
        value & mask != value >> shift
    })
}

/// All aperiodic templates of length `m` in increasing order.
pub fn aperiodic_templates(m: u32) -> Vec<u32> {
    (0..1u32 << m).filter(|&v| is_aperiodic(v, m)).collect()
}

/// The embedded template list for m = 9, one binary string per line.
pub fn embedded_templates_9() -> Result<Vec<u32>> {
    TEMPLATES_9
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            if l.len() != 9 {
                return Err(Error::Format(format!("template {l:?} is not 9 bits")));
            }
            u32::from_str_radix(l, 2).map_err(|e| Error::Format(format!("template {l:?}: {e}")))
        })
        .collect()
}

/// Templates used by the suite for length `m`.
pub fn templates_for(m: u32) -> Result<Vec<u32>> {
    if m == 9 {
        embedded_templates_9()
    } else {
        Ok(aperiodic_templates(m))
    }
}

fn window_values(block: &[u8], m: usize) -> impl Iterator<Item = u32> + '_ {
    let mask = (1u32 << m) - 1;
    let mut v = block[..m - 1].iter().fold(0u32, |a, &b| (a << 1) | u32::from(b));
    block[m - 1..].iter().map(move |&b| {
        v = ((v << 1) | u32::from(b)) & mask;
        v
    })
}

fn count_skipping(block: &[u8], template: u32, m: usize) -> u64 {
    let target: Vec<u8> = (0..m).map(|i| ((template >> (m - 1 - i)) & 1) as u8).collect();
    let mut count = 0;
    let mut i = 0;
    while i + m <= block.len() {
        if block[i..i + m] == target[..] {
            count += 1;
            i += m;
        } else {
            i += 1;
        }
    }
    count
}

/// One p-value per template. Occurrences are counted without overlap, the
/// window jumping past each match.
pub fn non_overlapping(bits: &[u8], m: usize, n_blocks: usize, templates: &[u32]) -> Result<Outcome> {
    if !(2..=21).contains(&m) {
        return Err(Error::Config(format!("template length {m} outside 2..=21")));
    }
    let big_m = bits.len().checked_div(n_blocks).unwrap_or(0);
    if big_m < m {
        return Ok(Outcome::na(format!("blocks of {big_m} bits are shorter than the template")));
    }
    let two_m = (1u64 << m) as f64;
    let mu = (big_m - m + 1) as f64 / two_m;
    let var = big_m as f64 * (1.0 / two_m - (2.0 * m as f64 - 1.0) / (two_m * two_m));
    let mut counts = vec![vec![0u64; n_blocks]; templates.len()];
    let periodic: Vec<bool> = templates.iter().map(|&t| !is_aperiodic(t, m as u32)).collect();
    let mut histogram = vec![0u64; 1 << m];
    for (j, block) in bits.chunks_exact(big_m).take(n_blocks).enumerate() {
        // aperiodic matches never overlap, so plain occurrence counts agree
        // with the skipping scan
        histogram.iter_mut().for_each(|h| *h = 0);
        for v in window_values(block, m) {
            histogram[v as usize] += 1;
        }
        for (t, &tpl) in templates.iter().enumerate() {
            counts[t][j] = if periodic[t] { count_skipping(block, tpl, m) } else { histogram[tpl as usize] };
        }
    }
    let p = counts
        .iter()
        .map(|w| {
            let chi2: f64 = w.iter().map(|&c| (c as f64 - mu).powi(2) / var).sum();
            igamc(n_blocks as f64 / 2.0, chi2 / 2.0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome::PValues(p))
}

/// Class probabilities from the series expansion, last class takes the rest.
pub fn overlapping_probabilities(m: usize, block: usize, k: usize) -> Vec<f64> {
    let lambda = (block - m + 1) as f64 / 2f64.powi(m as i32);
    let eta = lambda / 2.0;
    let mut pi: Vec<f64> = (0..k)
        .map(|u| {
            if u == 0 {
                (-eta).exp()
            } else {
                (1..=u)
                    .map(|l| {
                        let (u, l) = (u as f64, l as f64);
                        (-eta - u * std::f64::consts::LN_2 + l * eta.ln() - ln_gamma(l + 1.0) + ln_gamma(u)
                            - ln_gamma(l)
                            - ln_gamma(u - l + 1.0))
                        .exp()
                    })
                    .sum()
            }
        })
        .collect();
    let rest = 1.0 - pi.iter().sum::<f64>();
    pi.push(rest);
    pi
}

/// Corrected class probabilities for m = 9, M = 1032, K = 5.
pub const OVERLAPPING_PI_9_1032: [f64; 6] = [0.364091, 0.185659, 0.139381, 0.100571, 0.0704323, 0.139865];

/// Overlapping occurrences of the all-ones template of length `m`.
pub fn overlapping(bits: &[u8], m: usize, block: usize, k: usize) -> Result<Outcome> {
    if !(2..=21).contains(&m) || k == 0 {
        return Err(Error::Config(format!("overlapping template m={m} K={k} invalid")));
    }
    let n_blocks = bits.len().checked_div(block).unwrap_or(0);
    if block < m || n_blocks == 0 {
        return Ok(Outcome::na("overlapping template needs at least one full block"));
    }
    let pi = if (m, block, k) == (9, 1032, 5) {
        OVERLAPPING_PI_9_1032.to_vec()
    } else {
        overlapping_probabilities(m, block, k)
    };
    let mut nu = vec![0u64; k + 1];
    for blk in bits.chunks_exact(block) {
        let mut run = 0usize;
        let mut hits = 0usize;
        for &b in blk {
            if b == 1 {
                run += 1;
                if run >= m {
                    hits += 1;
                }
            } else {
                run = 0;
            }
        }
        nu[hits.min(k)] += 1;
    }
    let nb = n_blocks as f64;
    let chi2: f64 = nu.iter().zip(&pi).map(|(&v, &p)| (v as f64 - nb * p).powi(2) / (nb * p)).sum();
    Ok(Outcome::one(igamc(k as f64 / 2.0, chi2 / 2.0)?))
}
