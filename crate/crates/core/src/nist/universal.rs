//! Maurer's universal statistical test.

use super::special::erfc;
use super::Outcome;
use crate::error::{Error, Result};

const EXPECTED: [f64; 17] = [
    0.0,
    0.732_649_48,
    1.537_438_3,
    2.401_606_81,
    3.311_224_72,
    4.253_426_59,
    5.217_705_2,
    6.196_250_7,
    7.183_665_6,
    8.176_424_8,
    9.172_324_3,
    10.170_032,
    11.168_765,
    12.168_070,
    13.167_693,
    14.167_488,
    15.167_379,
];
const VARIANCE: [f64; 17] = [
    0.0, 0.690, 1.338, 1.901, 2.358, 2.705, 2.954, 3.125, 3.238, 3.311, 3.356, 3.384, 3.401, 3.410, 3.416, 3.419, 3.421,
];

/// Shortest sequence accepted for block length `l` and `q` initialisation blocks.
pub fn universal_min_length(l: usize, q: usize) -> usize {
    l * (q + 1000 * (1 << l))
}

pub fn universal(bits: &[u8], l: usize, q: usize) -> Result<Outcome> {
    if !(1..=16).contains(&l) || q == 0 {
        return Err(Error::Config(format!("universal L={l} Q={q} invalid (L in 1..=16, Q > 0)")));
    }
    let need = universal_min_length(l, q);
    if bits.len() < need {
        return Ok(Outcome::na(format!("universal with L={l} needs {need} bits")));
    }
    let blocks = bits.len() / l;
    let k = blocks - q;
    let mut last = vec![0usize; 1 << l];
    let mut sum = 0.0;
    for (i, blk) in bits.chunks_exact(l).take(blocks).enumerate() {
        let v = blk.iter().fold(0usize, |a, &b| (a << 1) | usize::from(b));
        let pos = i + 1;
        if pos > q {
            sum += ((pos - last[v]) as f64).log2();
        }
        last[v] = pos;
    }
    let kf = k as f64;
    let lf = l as f64;
    let fn_ = sum / kf;
    let c = 0.7 - 0.8 / lf + (4.0 + 32.0 / lf) * kf.powf(-3.0 / lf) / 15.0;
    let sigma = c * (VARIANCE[l] / kf).sqrt();
    let arg = (fn_ - EXPECTED[l]).abs() / (std::f64::consts::SQRT_2 * sigma);
    Ok(Outcome::one(erfc(arg)))
}
