//! Berlekamp–Massey and the linear complexity test.

use super::special::igamc;
use super::Outcome;
use crate::error::Result;

fn shift_in(window: &mut [u64], bit: u8) {
    let mut carry = u64::from(bit);
    for w in window.iter_mut() {
        let out = *w >> 63;
        *w = (*w << 1) | carry;
        carry = out;
    }
}

/// `dst ^= src << shift`, truncated to the length of `dst`.
fn xor_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let (words, bits) = (shift / 64, shift % 64);
    for i in (words..dst.len()).rev() {
        let j = i - words;
        let mut v = src[j] << bits;
        if bits > 0 && j > 0 {
            v |= src[j - 1] >> (64 - bits);
        }
        dst[i] ^= v;
    }
}

/// Length of the shortest LFSR generating `bits` over GF(2).
pub fn berlekamp_massey(bits: &[u8]) -> usize {
    let n = bits.len();
    let words = n / 64 + 1;
    let mut c = vec![0u64; words];
    let mut b = vec![0u64; words];
    let mut t = vec![0u64; words];
    let mut window = vec![0u64; words];
    c[0] = 1;
    b[0] = 1;
    let mut l = 0usize;
    let mut m = 0usize; // index of the last length change plus one
    for (i, &s) in bits.iter().enumerate() {
        // window bit j holds s[i - j]
        shift_in(&mut window, s);
        let d = c.iter().zip(&window).fold(0, |acc, (x, y)| acc ^ (x & y).count_ones()) & 1;
        if d == 0 {
            continue;
        }
        let shift = i + 1 - m;
        if 2 * l <= i {
            t.copy_from_slice(&c);
            xor_shifted(&mut c, &b, shift);
            l = i + 1 - l;
            m = i + 1;
            std::mem::swap(&mut b, &mut t);
        } else {
            xor_shifted(&mut c, &b, shift);
        }
    }
    l
}

const LC_PI: [f64; 7] = [0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833];

pub fn linear_complexity(bits: &[u8], block: usize) -> Result<Outcome> {
    let n_blocks = bits.len().checked_div(block).unwrap_or(0);
    if n_blocks == 0 {
        return Ok(Outcome::na(format!("linear complexity needs a block of {block} bits")));
    }
    let mf = block as f64;
    let sign = if block.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mu = mf / 2.0 + (9.0 - sign) / 36.0 - (mf / 3.0 + 2.0 / 9.0) / 2f64.powf(mf);
    let mut nu = [0u64; 7];
    for blk in bits.chunks_exact(block) {
        let l = berlekamp_massey(blk) as f64;
        let t = sign * (l - mu) + 2.0 / 9.0;
        let class = if t <= -2.5 {
            0
        } else if t <= -1.5 {
            1
        } else if t <= -0.5 {
            2
        } else if t <= 0.5 {
            3
        } else if t <= 1.5 {
            4
        } else if t <= 2.5 {
            5
        } else {
            6
        };
        nu[class] += 1;
    }
    let nb = n_blocks as f64;
    let chi2: f64 = nu.iter().zip(LC_PI).map(|(&v, p)| (v as f64 - nb * p).powi(2) / (nb * p)).sum();
    Ok(Outcome::one(igamc(3.0, chi2 / 2.0)?))
}
