//! Deterministic baselines: a Fibonacci LFSR and Xoroshiro128+.

use crate::bits::{RawBitstream, Source};
use crate::error::{Error, Result};

pub const LFSR32_DEFAULT_TAPS: [u8; 4] = [32, 22, 2, 1];

/// Fibonacci LFSR of up to 32 stages.
///
/// The output is the register's least significant bit; each step shifts right
/// and feeds the parity of the tapped stages into the top stage. Taps are
/// recurrence lags: tap `t` reads stage `width - t`, so the output obeys
/// `b[k] = XOR over taps t of b[k - t]`. The default taps realise the
/// primitive polynomial `x^32 + x^22 + x^2 + x + 1` in reciprocal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lfsr {
    register: u32,
    width: u32,
    tap_mask: u32,
}

impl Lfsr {
    pub fn new(width: u32, taps: &[u8], seed: u32) -> Result<Self> {
        if !(2..=32).contains(&width) {
            return Err(Error::Config(format!("LFSR width {width} outside 2..=32")));
        }
        if taps.is_empty() {
            return Err(Error::Config("LFSR needs at least one tap".into()));
        }
        let mut tap_mask = 0u32;
        for &t in taps {
            let t = u32::from(t);
            if t == 0 || t > width {
                return Err(Error::Config(format!("tap {t} outside 1..={width}")));
            }
            tap_mask |= 1 << (width - t);
        }
        if !taps.iter().any(|&t| u32::from(t) == width) {
            return Err(Error::Config(format!("taps must include the full length {width}")));
        }
        let mask = if width == 32 { u32::MAX } else { (1 << width) - 1 };
        if seed & mask == 0 {
            return Err(Error::InvalidSeed("LFSR register must be nonzero".into()));
        }
        if seed & !mask != 0 {
            return Err(Error::InvalidSeed(format!("seed {seed:#x} wider than {width} bits")));
        }
        Ok(Lfsr { register: seed, width, tap_mask })
    }

    pub fn lfsr32(seed: u32) -> Result<Self> {
        Self::new(32, &LFSR32_DEFAULT_TAPS, seed)
    }

    pub fn register(&self) -> u32 {
        self.register
    }

    #[inline]
    pub fn next_bit(&mut self) -> bool {
        let out = self.register & 1;
        let fb = (self.register & self.tap_mask).count_ones() & 1;
        self.register = (self.register >> 1) | (fb << (self.width - 1));
        out == 1
    }
}

/// `n_bits` successive outputs of a 32-stage LFSR with the given taps.
pub fn lfsr32_stream_with_taps(seed: u32, taps: &[u8], n_bits: usize) -> Result<RawBitstream> {
    let mut lfsr = Lfsr::new(32, taps, seed)?;
    let mut out = RawBitstream::with_capacity(n_bits, Source::Lfsr32, 1, u64::from(seed));
    let whole = n_bits / 8;
    for _ in 0..whole {
        let mut byte = 0u8;
        for _ in 0..8 {
            byte = (byte << 1) | u8::from(lfsr.next_bit());
        }
        out.push_byte(byte);
    }
    for _ in whole * 8..n_bits {
        out.push(lfsr.next_bit());
    }
    Ok(out)
}

pub fn lfsr32_stream(seed: u32, n_bits: usize) -> Result<RawBitstream> {
    lfsr32_stream_with_taps(seed, &LFSR32_DEFAULT_TAPS, n_bits)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Xoroshiro128Plus {
    s0: u64,
    s1: u64,
}

impl Xoroshiro128Plus {
    pub fn new(s0: u64, s1: u64) -> Result<Self> {
        if s0 == 0 && s1 == 0 {
            return Err(Error::InvalidSeed("xoroshiro128+ state must not be all zero".into()));
        }
        Ok(Xoroshiro128Plus { s0, s1 })
    }

    /// Expands a 64-bit seed with SplitMix64.
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = seed;
        let s0 = splitmix64(&mut sm);
        let s1 = splitmix64(&mut sm);
        // SplitMix64 is a bijection on its counter, two consecutive outputs
        // cannot both be zero
        Xoroshiro128Plus { s0, s1 }
    }

    pub fn state(&self) -> (u64, u64) {
        (self.s0, self.s1)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s0 = self.s0;
        let mut s1 = self.s1;
        let result = s0.wrapping_add(s1);
        s1 ^= s0;
        self.s0 = s0.rotate_left(24) ^ s1 ^ (s1 << 16);
        self.s1 = s1.rotate_left(37);
        result
    }
}

pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Bit stream from successive 64-bit outputs, each emitted MSB first.
pub fn xoroshiro128p_stream(rng: &mut Xoroshiro128Plus, n_bits: usize, master_seed: u64) -> RawBitstream {
    let mut out = RawBitstream::with_capacity(n_bits, Source::Xoroshiro128p, 1, master_seed);
    let whole = n_bits / 64;
    for _ in 0..whole {
        for b in rng.next_u64().to_be_bytes() {
            out.push_byte(b);
        }
    }
    let rest = n_bits - whole * 64;
    if rest > 0 {
        let w = rng.next_u64();
        out.push_word(w >> (64 - rest), rest as u32);
    }
    out
}
