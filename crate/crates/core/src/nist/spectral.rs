//! Discrete Fourier transform (spectral) test.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::special::erfc;
use super::Outcome;
use crate::error::Result;

pub fn dft(bits: &[u8]) -> Result<Outcome> {
    let n = bits.len();
    if n < 2 {
        return Ok(Outcome::na("dft needs at least 2 bits"));
    }
    let mut buf: Vec<Complex<f64>> = bits.iter().map(|&b| Complex::new(if b == 1 { 1.0 } else { -1.0 }, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let nf = n as f64;
    let threshold = ((1.0f64 / 0.05).ln() * nf).sqrt();
    let n0 = 0.95 * nf / 2.0;
    let n1 = buf[..n / 2].iter().filter(|c| c.norm() < threshold).count() as f64;
    let d = (n1 - n0) / (nf * 0.95 * 0.05 / 4.0).sqrt();
    Ok(Outcome::one(erfc(d.abs() / std::f64::consts::SQRT_2)))
}
