//! Binary matrix rank test.

use super::Outcome;
use crate::error::Result;

/// Rank over GF(2) of a matrix whose rows are the low `cols` bits of each word.
pub fn rank_gf2(rows: &mut [u64], cols: u32) -> usize {
    let mut rank = 0;
    for col in (0..cols).rev() {
        let bit = 1u64 << col;
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank];
        for r in &mut rows[rank + 1..] {
            if *r & bit != 0 {
                *r ^= p;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Rank of a 32x32 binary matrix given as rows, MSB = column 0.
pub fn matrix_rank_gf2(matrix: &[u32; 32]) -> usize {
    let mut rows: Vec<u64> = matrix.iter().map(|&r| u64::from(r)).collect();
    rank_gf2(&mut rows, 32)
}

/// Probability that a random `m x q` binary matrix has rank `r`.
pub fn rank_probability(r: usize, m: usize, q: usize) -> f64 {
    if r > m.min(q) {
        return 0.0;
    }
    let exp = (r * (q + m - r)) as f64 - (m * q) as f64;
    let mut prod = 1.0;
    for i in 0..r {
        let i = i as f64;
        let num = (1.0 - 2f64.powf(i - q as f64)) * (1.0 - 2f64.powf(i - m as f64));
        prod *= num / (1.0 - 2f64.powf(i - r as f64));
    }
    2f64.powf(exp) * prod
}

/// Ranks of disjoint `size x size` matrices, compared against the full,
/// full-minus-one and lower classes.
pub fn rank_test(bits: &[u8], size: usize) -> Result<Outcome> {
    let per = size * size;
    let n_mat = bits.len() / per;
    if size == 0 || size > 64 || n_mat < 38 {
        return Ok(Outcome::na(format!("rank needs at least 38 matrices of {size}x{size}")));
    }
    let mut counts = [0u64; 3];
    let mut rows = vec![0u64; size];
    for mat in bits.chunks_exact(per).take(n_mat) {
        for (row, chunk) in rows.iter_mut().zip(mat.chunks_exact(size)) {
            *row = chunk.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
        }
        let r = rank_gf2(&mut rows, size as u32);
        let class = if r == size {
            0
        } else if r == size - 1 {
            1
        } else {
            2
        };
        counts[class] += 1;
    }
    let p_full = rank_probability(size, size, size);
    let p_minus = rank_probability(size - 1, size, size);
    let probs = [p_full, p_minus, 1.0 - p_full - p_minus];
    let nf = n_mat as f64;
    let chi2: f64 = counts.iter().zip(probs).map(|(&c, p)| (c as f64 - nf * p).powi(2) / (nf * p)).sum();
    Ok(Outcome::one((-chi2 / 2.0).exp()))
}
