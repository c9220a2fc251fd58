//! Post-processing that turns raw device bits into near-uniform output.
//!
//! Two schemes are provided: a parity-of-three corrector ([`xor3`]) and a
//! Toeplitz-matrix extractor evaluated through FFT convolution
//! ([`toeplitz_extract`]). A most-common-value min-entropy estimate helps
//! choose the Toeplitz compression ratio.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::bits::{RawBitstream, Source};
use crate::error::{Error, Result};

/// Largest block length whose integer convolution sums stay exact in f64.
pub const MAX_TOEPLITZ_N: usize = 1 << 20;
const RESIDUE_LIMIT: f64 = 0.25;

/// How the three inputs of each parity are picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XorGrouping {
    /// Bits `3j, 3j+1, 3j+2` of the stream.
    Temporal,
    /// Windows of `3s` bits; output `j` of a window is `w[j] ^ w[j+s] ^ w[j+2s]`.
    /// With `s` equal to the device count this combines one device across
    /// three consecutive cycles. Trailing partial windows are dropped.
    Stride(usize),
}

/// Parity of consecutive bit triples; output length `floor(n_bits / 3)`.
pub fn xor3(input: &RawBitstream) -> Result<RawBitstream> {
    xor3_grouped(input, XorGrouping::Temporal)
}

pub fn xor3_grouped(input: &RawBitstream, grouping: XorGrouping) -> Result<RawBitstream> {
    if input.len() < 3 {
        return Err(Error::EmptyOutput(format!("XOR-3 needs at least 3 input bits, got {}", input.len())));
    }
    let mut out = RawBitstream::with_capacity(input.len() / 3, Source::MtjXor3, input.n_devices(), input.master_seed());
    match grouping {
        XorGrouping::Temporal => {
            // work on unpacked chunks to keep memory flat for long streams
            const CHUNK: usize = 3 * (1 << 16);
            let usable = input.len() - input.len() % 3;
            let mut start = 0;
            while start < usable {
                let len = CHUNK.min(usable - start);
                let bits = input.unpack_range(start, len);
                out.extend(bits.chunks_exact(3).map(|t| t[0] ^ t[1] ^ t[2] == 1));
                start += len;
            }
        }
        XorGrouping::Stride(s) => {
            if s == 0 {
                return Err(Error::Config("XOR-3 stride must be positive".into()));
            }
            let window = 3 * s;
            let windows = input.len() / window;
            if windows == 0 {
                return Err(Error::EmptyOutput(format!(
                    "XOR-3 stride {s} needs at least {window} bits, got {}",
                    input.len()
                )));
            }
            for w in 0..windows {
                let bits = input.unpack_range(w * window, window);
                out.extend((0..s).map(|j| bits[j] ^ bits[j + s] ^ bits[j + 2 * s] == 1));
            }
        }
    }
    Ok(out)
}

/// Toeplitz hash parameters. Row `i`, column `j` of the `m × n` matrix is
/// `seed_bits[i - j + n - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzConfig {
    pub n: usize,
    pub m: usize,
    /// `n + m - 1` entries, each 0 or 1.
    pub seed_bits: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct ToeplitzConfigFile {
    n: usize,
    m: usize,
    /// Bit 0 is the MSB of the first byte.
    seed_hex: String,
}

impl ToeplitzConfig {
    pub const DEFAULT_N: usize = 8192;
    pub const DEFAULT_M: usize = 4096;

    pub fn new(n: usize, m: usize, seed_bits: Vec<u8>) -> Result<Self> {
        let cfg = ToeplitzConfig { n, m, seed_bits };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Takes the seed from the first `n + m - 1` bits of `stream`.
    pub fn from_stream(n: usize, m: usize, stream: &RawBitstream) -> Result<Self> {
        let need = (n + m).saturating_sub(1);
        if stream.len() < need {
            return Err(Error::InsufficientBits { needed: need as u64, available: stream.len() as u64 });
        }
        Self::new(n, m, stream.unpack_range(0, need))
    }

    pub fn validate(&self) -> Result<()> {
        if !(0 < self.m && self.m < self.n) {
            return Err(Error::Config(format!("Toeplitz sizes need 0 < m < n, got n = {}, m = {}", self.n, self.m)));
        }
        if self.seed_bits.len() != self.n + self.m - 1 {
            return Err(Error::Config(format!(
                "Toeplitz seed has {} bits, expected n + m - 1 = {}",
                self.seed_bits.len(),
                self.n + self.m - 1
            )));
        }
        if self.seed_bits.iter().any(|&b| b > 1) {
            return Err(Error::Config("Toeplitz seed entries must be 0 or 1".into()));
        }
        Ok(())
    }

    /// Output-to-input length ratio `m / n`.
    pub fn compression(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    pub fn seed_hex(&self) -> String {
        let mut bytes = vec![0u8; self.seed_bits.len().div_ceil(8)];
        for (k, &b) in self.seed_bits.iter().enumerate() {
            bytes[k >> 3] |= b << (7 - (k & 7));
        }
        hex::encode(bytes)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ToeplitzConfigFile { n: self.n, m: self.m, seed_hex: self.seed_hex() })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ToeplitzConfigFile = serde_json::from_str(text)?;
        let bytes = hex::decode(file.seed_hex.trim()).map_err(|e| Error::Config(format!("seed_hex: {e}")))?;
        let need = (file.n + file.m).saturating_sub(1);
        if bytes.len() != need.div_ceil(8) {
            return Err(Error::Config(format!(
                "seed_hex holds {} bytes, expected {} for n + m - 1 = {need} bits",
                bytes.len(),
                need.div_ceil(8)
            )));
        }
        let bits = (0..need).map(|k| (bytes[k >> 3] >> (7 - (k & 7))) & 1).collect();
        Self::new(file.n, file.m, bits)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path.as_ref())?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), self.to_json()?)?;
        Ok(())
    }
}

/// Toeplitz hashing through circular FFT convolution.
///
/// Output bit `i` is entry `i + n - 1` of the linear convolution of the seed
/// with the input block. A circular transform of length `L >= n + m - 1`
/// leaves those entries untouched by wrap-around, and two real blocks are
/// packed into one complex transform (real and imaginary parts).
pub struct ToeplitzExtractor {
    cfg: ToeplitzConfig,
    len: usize,
    seed_spectrum: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ToeplitzExtractor {
    pub fn new(cfg: ToeplitzConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.n > MAX_TOEPLITZ_N {
            return Err(Error::Precision(format!(
                "block length {} exceeds {MAX_TOEPLITZ_N}; convolution sums would not be exact",
                cfg.n
            )));
        }
        let len = (cfg.n + cfg.m - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut seed_spectrum = vec![Complex::new(0.0, 0.0); len];
        for (dst, &b) in seed_spectrum.iter_mut().zip(&cfg.seed_bits) {
            dst.re = f64::from(b);
        }
        forward.process(&mut seed_spectrum);
        let scale = 1.0 / len as f64;
        for c in &mut seed_spectrum {
            *c *= scale;
        }
        Ok(ToeplitzExtractor { cfg, len, seed_spectrum, forward, inverse })
    }

    pub fn config(&self) -> &ToeplitzConfig {
        &self.cfg
    }

    /// Hashes one or two `n`-bit blocks (entries 0/1) into `m` bits each.
    fn hash_pair(
        &self,
        a: &[u8],
        b: Option<&[u8]>,
        buf: &mut [Complex<f64>],
        scratch: &mut [Complex<f64>],
    ) -> Result<(Vec<u8>, Option<Vec<u8>>)> {
        let (n, m) = (self.cfg.n, self.cfg.m);
        buf.fill(Complex::new(0.0, 0.0));
        for (j, &x) in a.iter().enumerate() {
            buf[j].re = f64::from(x);
        }
        if let Some(b) = b {
            for (j, &x) in b.iter().enumerate() {
                buf[j].im = f64::from(x);
            }
        }
        self.forward.process_with_scratch(buf, scratch);
        for (x, s) in buf.iter_mut().zip(&self.seed_spectrum) {
            *x *= s;
        }
        self.inverse.process_with_scratch(buf, scratch);

        let parity = |v: f64| -> Result<u8> {
            let r = v.round();
            let residue = (v - r).abs();
            if residue > RESIDUE_LIMIT {
                return Err(Error::Precision(format!(
                    "rounding residue {residue:.3} exceeds {RESIDUE_LIMIT} at n = {n}"
                )));
            }
            Ok((r as i64 & 1) as u8)
        };
        let window = &buf[n - 1..n - 1 + m];
        let ya = window.iter().map(|c| parity(c.re)).collect::<Result<Vec<_>>>()?;
        let yb = match b {
            Some(_) => Some(window.iter().map(|c| parity(c.im)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        Ok((ya, yb))
    }

    /// Hashes a single `n`-bit block.
    pub fn hash_block(&self, block: &[u8]) -> Result<Vec<u8>> {
        if block.len() != self.cfg.n {
            return Err(Error::Validation(format!("block has {} bits, expected {}", block.len(), self.cfg.n)));
        }
        let mut buf = vec![Complex::new(0.0, 0.0); self.len];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        Ok(self.hash_pair(block, None, &mut buf, &mut scratch)?.0)
    }

    /// Consumes `input` in consecutive `n`-bit blocks (trailing partial block
    /// dropped) and concatenates the `m`-bit hashes in block order.
    pub fn extract(&self, input: &RawBitstream) -> Result<RawBitstream> {
        let (n, m) = (self.cfg.n, self.cfg.m);
        let blocks = input.len() / n;
        if blocks == 0 {
            return Err(Error::InsufficientBits { needed: n as u64, available: input.len() as u64 });
        }
        let scratch_len = self.forward.get_inplace_scratch_len().max(self.inverse.get_inplace_scratch_len());
        let pairs: Vec<usize> = (0..blocks).step_by(2).collect();
        let hashed: Vec<Vec<u8>> = pairs
            .par_iter()
            .map_init(
                || (vec![Complex::new(0.0, 0.0); self.len], vec![Complex::new(0.0, 0.0); scratch_len]),
                |(buf, scratch), &first| -> Result<Vec<u8>> {
                    let a = input.unpack_range(first * n, n);
                    let b = (first + 1 < blocks).then(|| input.unpack_range((first + 1) * n, n));
                    let (ya, yb) = self.hash_pair(&a, b.as_deref(), buf, scratch)?;
                    let mut bits = ya;
                    if let Some(yb) = yb {
                        bits.extend(yb);
                    }
                    Ok(bits)
                },
            )
            .collect::<Result<_>>()?;
        let mut out =
            RawBitstream::with_capacity(blocks * m, Source::MtjToeplitz, input.n_devices(), input.master_seed());
        for bits in hashed {
            out.extend(bits.into_iter().map(|b| b == 1));
        }
        Ok(out)
    }
}

/// Toeplitz extraction; output length `m * floor(n_bits / n)`.
pub fn toeplitz_extract(input: &RawBitstream, cfg: &ToeplitzConfig) -> Result<RawBitstream> {
    ToeplitzExtractor::new(cfg.clone())?.extract(input)
}

/// Most-common-value min-entropy estimate for a binary source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub h_min_per_bit: f64,
    /// 99% upper confidence bound on the most common value's probability.
    pub p_max_upper: f64,
    pub sample_size: u64,
}

pub const MIN_ENTROPY_SAMPLES: usize = 10_000;

pub fn estimate_min_entropy(input: &RawBitstream) -> Result<EntropyEstimate> {
    let n = input.len();
    if n < MIN_ENTROPY_SAMPLES {
        return Err(Error::InsufficientBits { needed: MIN_ENTROPY_SAMPLES as u64, available: n as u64 });
    }
    let ones: u64 = input.as_bytes().iter().map(|b| u64::from(b.count_ones())).sum();
    let zeros = n as u64 - ones;
    let nf = n as f64;
    let p_hat = ones.max(zeros) as f64 / nf;
    let p_max_upper = (p_hat + 2.576 * (p_hat * (1.0 - p_hat) / nf).sqrt()).min(1.0);
    Ok(EntropyEstimate { h_min_per_bit: -p_max_upper.log2(), p_max_upper, sample_size: n as u64 })
}
