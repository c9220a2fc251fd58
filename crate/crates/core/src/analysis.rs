//! Word histograms, bias and autocorrelation, and the throughput and energy
//! scaling models.

use serde::{Deserialize, Serialize};

use crate::bits::RawBitstream;
use crate::conditioning::ToeplitzConfig;
use crate::error::{Error, Result};
use crate::latent::words_from_bits;
use crate::nist::special::igamc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordHistogram {
    pub counts: Vec<u64>,
    pub words: u64,
    pub chi_square: f64,
    pub p_value: f64,
}

/// 32-bit words binned into `bins` equal intervals of [0, 2^32) and tested
/// against the uniform distribution.
pub fn word_histogram(stream: &RawBitstream, bins: usize) -> Result<WordHistogram> {
    if bins < 2 {
        return Err(Error::Config(format!("need at least 2 bins, got {bins}")));
    }
    let needed = 32 * bins as u64;
    if (stream.len() as u64) < needed {
        return Err(Error::InsufficientBits { needed, available: stream.len() as u64 });
    }
    let words = words_from_bits(stream)?;
    let mut counts = vec![0u64; bins];
    for &w in &words {
        counts[((u64::from(w) * bins as u64) >> 32) as usize] += 1;
    }
    let n = words.len() as u64;
    // bins that do not divide 2^32 evenly get slightly different widths
    let chi_square: f64 = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let lo = (i as u64) << 32;
            let hi = (i as u64 + 1) << 32;
            let width = hi.div_ceil(bins as u64) - lo.div_ceil(bins as u64);
            let e = n as f64 * width as f64 / 2f64.powi(32);
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let p_value = igamc((bins - 1) as f64 / 2.0, chi_square / 2.0)?;
    Ok(WordHistogram { counts, words: n, chi_square, p_value })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub n_bits: u64,
    pub mean: f64,
    /// Lags 1..=max_lag. Each is the mean lagged product of deviations over
    /// the bit variance; 0 for a constant stream.
    pub autocorr: Vec<f64>,
}

pub fn bias_and_autocorr(stream: &RawBitstream, max_lag: usize) -> Result<BiasReport> {
    let n = stream.len();
    let needed = (100 * max_lag.max(1)) as u64;
    if (n as u64) < needed {
        return Err(Error::InsufficientBits { needed, available: n as u64 });
    }
    let bits = stream.unpack();
    let ones: u64 = bits.iter().map(|&b| u64::from(b)).sum();
    let mu = ones as f64 / n as f64;
    let var = mu * (1.0 - mu);
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0u64);
    for &b in &bits {
        prefix.push(prefix.last().unwrap() + u64::from(b));
    }
    let autocorr = (1..=max_lag)
        .map(|k| {
            if var == 0.0 {
                return 0.0;
            }
            let both = bits.iter().zip(&bits[k..]).filter(|(&a, &b)| a & b == 1).count() as f64;
            let head = prefix[n - k] as f64;
            let tail = (prefix[n] - prefix[k]) as f64;
            let pairs = (n - k) as f64;
            let cov = (both - mu * (head + tail) + pairs * mu * mu) / pairs;
            cov / var
        })
        .collect();
    Ok(BiasReport { n_bits: n as u64, mean: mu, autocorr })
}

/// Conditioning applied after acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Raw,
    Xor3,
    Toeplitz { n: usize, m: usize },
}

impl Scheme {
    /// Raw bits consumed per output bit.
    pub fn conditioning_factor(self) -> f64 {
        match self {
            Scheme::Raw => 1.0,
            Scheme::Xor3 => 3.0,
            Scheme::Toeplitz { n, m } => n as f64 / m as f64,
        }
    }

    pub fn toeplitz(cfg: &ToeplitzConfig) -> Self {
        Scheme::Toeplitz { n: cfg.n, m: cfg.m }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputModel {
    pub n_cells: f64,
    pub cycle_hz: f64,
    pub conditioning_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    pub raw_bps: f64,
    pub conditioned_bps: f64,
}

impl ThroughputModel {
    pub fn new(n_cells: f64, cycle_hz: f64, scheme: Scheme) -> Result<Self> {
        let m = ThroughputModel { n_cells, cycle_hz, conditioning_factor: scheme.conditioning_factor() };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if ok(self.n_cells) && ok(self.cycle_hz) && ok(self.conditioning_factor) {
            Ok(())
        } else {
            Err(Error::Config(format!("throughput model fields must be positive: {self:?}")))
        }
    }
}

/// One bit per cell per cycle, divided by the conditioning factor.
pub fn throughput(model: &ThroughputModel) -> Throughput {
    let raw_bps = model.n_cells * model.cycle_hz;
    Throughput { raw_bps, conditioned_bps: raw_bps / model.conditioning_factor }
}

/// Energy constants. These are modelling inputs chosen to land near 1 pJ per
/// conditioned bit at 10^6 cells, not measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyModel {
    /// Joules per raw bit per device: switching plus reset.
    pub e_device: f64,
    /// Watts of shared peripheral power spread over all cells.
    pub e_shared: f64,
    /// Joules per bit for a software CSPRNG, low end.
    pub csprng_low: f64,
    /// Joules per bit for a software CSPRNG, high end.
    pub csprng_high: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel { e_device: 3.0e-13, e_shared: 3.0e-3, csprng_low: 1.0e-8, csprng_high: 1.0e-7 }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Result<()> {
        let vals = [self.e_device, self.e_shared, self.csprng_low, self.csprng_high];
        if vals.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Config(format!("energy model fields must be nonnegative: {self:?}")));
        }
        if self.csprng_low > self.csprng_high {
            return Err(Error::Config("csprng_low exceeds csprng_high".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub e_bit: f64,
    pub ratio_low: f64,
    pub ratio_high: f64,
}

/// `factor * (e_device + e_shared / (n_cells * cycle_hz))` per conditioned bit.
pub fn energy_per_bit(
    model: &EnergyModel,
    n_cells: f64,
    cycle_hz: f64,
    conditioning_factor: f64,
) -> Result<EnergyEstimate> {
    model.validate()?;
    ThroughputModel { n_cells, cycle_hz, conditioning_factor }.validate()?;
    let e_bit = conditioning_factor * (model.e_device + model.e_shared / (n_cells * cycle_hz));
    Ok(EnergyEstimate { e_bit, ratio_low: model.csprng_low / e_bit, ratio_high: model.csprng_high / e_bit })
}
