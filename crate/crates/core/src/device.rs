//! Stochastic STT-MTJ array and the reset/perturb acquisition protocol.
//!
//! Each cycle every device is reset to AP (bit 0) by a negative pulse and then
//! hit with a positive perturb pulse whose amplitude sets the AP→P switching
//! probability. The switching probability is a logistic curve in the perturb
//! voltage. Two non-idealities are modelled:
//!
//! * the 50% voltage `v50` performs an Ornstein–Uhlenbeck walk around its
//!   nominal value (slow environmental drift);
//! * the read path repeats the device's previous bit with probability
//!   `corr_rho`.
//!
//! The analog readout against `v_th` is not simulated; bits are emitted
//! directly and `v_th` is carried as metadata.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{RawBitstream, Source};
use crate::error::{Error, Result};

const CALIBRATION_STREAM: u64 = 1 << 32;
const LAYOUT_STREAM: u64 = 1 << 33;

/// Per-device entropy substream derived from `(master_seed, stream)`.
pub fn substream(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub device_id: usize,
    /// Perturb amplitude giving 50% switching, volts.
    pub v50: f64,
    /// Logistic width, volts.
    pub slope_w: f64,
    pub r_p: f64,
    pub r_ap: f64,
    /// Random-walk volatility of `v50`, volts per sqrt(cycle).
    pub drift_sigma: f64,
    /// Mean-reversion rate of `v50`, per cycle.
    pub drift_reversion: f64,
    /// Probability the readout repeats the previous bit.
    pub corr_rho: f64,
}

impl DeviceParams {
    /// A drift-free, correlation-free device.
    pub fn ideal(device_id: usize, v50: f64, slope_w: f64) -> Self {
        DeviceParams {
            device_id,
            v50,
            slope_w,
            r_p: 2.0e3,
            r_ap: 4.5e3,
            drift_sigma: 0.0,
            drift_reversion: 0.0,
            corr_rho: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let id = self.device_id;
        if !(self.slope_w > 0.0) {
            return Err(Error::Config(format!("device {id}: slope_w must be > 0")));
        }
        if !(0.0..1.0).contains(&self.corr_rho) {
            return Err(Error::Config(format!("device {id}: corr_rho must lie in [0, 1)")));
        }
        if !(self.drift_sigma >= 0.0) || !(self.drift_reversion >= 0.0) {
            return Err(Error::Config(format!("device {id}: drift parameters must be >= 0")));
        }
        if !(self.r_p > 0.0 && self.r_ap > self.r_p) {
            return Err(Error::Config(format!("device {id}: need r_ap > r_p > 0")));
        }
        if !self.v50.is_finite() {
            return Err(Error::Config(format!("device {id}: v50 must be finite")));
        }
        Ok(())
    }

    pub fn without_drift(&self) -> Self {
        DeviceParams { drift_sigma: 0.0, drift_reversion: 0.0, ..self.clone() }
    }
}

/// Logistic switching probability `1 / (1 + exp(-(v - v50) / w))`.
#[inline]
pub fn switching_probability(v: f64, params: &DeviceParams) -> f64 {
    logistic(v, params.v50, params.slope_w)
}

#[inline]
fn logistic(v: f64, v50: f64, w: f64) -> f64 {
    1.0 / (1.0 + (-(v - v50) / w).exp())
}

/// Mutable per-device state: the drifted `v50` and the last emitted bit.
#[derive(Debug, Clone)]
pub struct DeviceState {
    v50: f64,
    prev_bit: Option<bool>,
}

impl DeviceState {
    pub fn new(params: &DeviceParams) -> Self {
        DeviceState { v50: params.v50, prev_bit: None }
    }

    pub fn current_v50(&self) -> f64 {
        self.v50
    }

    /// One reset/perturb/readout cycle at perturb amplitude `v`.
    #[inline]
    pub fn sample_switch<R: Rng + ?Sized>(&mut self, params: &DeviceParams, v: f64, rng: &mut R) -> bool {
        let p = logistic(v, self.v50, params.slope_w);
        let mut bit = rng.random::<f64>() < p;
        if params.corr_rho > 0.0 {
            let repeat = rng.random::<f64>() < params.corr_rho;
            if let (true, Some(prev)) = (repeat, self.prev_bit) {
                bit = prev;
            }
        }
        self.prev_bit = Some(bit);
        if params.drift_sigma > 0.0 || params.drift_reversion > 0.0 {
            let g: f64 = rng.sample(StandardNormal);
            self.v50 += params.drift_reversion * (params.v50 - self.v50) + params.drift_sigma * g;
        }
        bit
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationSettings {
    pub target_p: f64,
    pub pulses_per_estimate: u32,
    /// Accepted distance between the estimate and `target_p`.
    pub tolerance: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Bracket width below which the search may stop.
    pub v_resolution: f64,
    pub max_iter: u32,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        CalibrationSettings {
            target_p: 0.5,
            pulses_per_estimate: 1000,
            tolerance: 0.02,
            v_min: 0.0,
            v_max: 1.0,
            v_resolution: 1e-5,
            max_iter: 64,
        }
    }
}

/// Fraction of ones over `pulses` perturb pulses at amplitude `v`, drift off.
pub fn estimate_switching<R: Rng + ?Sized>(params: &DeviceParams, v: f64, pulses: u32, rng: &mut R) -> f64 {
    let frozen = params.without_drift();
    let mut state = DeviceState::new(&frozen);
    let ones = (0..pulses).filter(|_| state.sample_switch(&frozen, v, rng)).count();
    ones as f64 / f64::from(pulses.max(1))
}

/// Finds a perturb voltage whose estimated switching probability is within
/// `tolerance` of `target_p`, by bisection on the monotone response.
pub fn calibrate<R: Rng + ?Sized>(
    params: &DeviceParams,
    target_p: f64,
    pulses_per_estimate: u32,
    rng: &mut R,
) -> Result<f64> {
    let settings = CalibrationSettings { target_p, pulses_per_estimate, ..CalibrationSettings::default() };
    calibrate_with(params, &settings, rng)
}

pub fn calibrate_with<R: Rng + ?Sized>(
    params: &DeviceParams,
    settings: &CalibrationSettings,
    rng: &mut R,
) -> Result<f64> {
    let fail = |reason: String| Error::Calibration { device: params.device_id, reason };
    params.validate()?;
    let target = settings.target_p;
    // p(v) is never exactly 0 or 1 for finite v
    if !(target > 0.0 && target < 1.0) {
        return Err(fail(format!("target probability {target} unreachable with a finite perturb voltage")));
    }
    if settings.pulses_per_estimate == 0 || !(settings.v_max > settings.v_min) {
        return Err(Error::Config("calibration needs pulses > 0 and v_max > v_min".into()));
    }
    let (mut lo, mut hi) = (settings.v_min, settings.v_max);
    for _ in 0..settings.max_iter {
        let mid = 0.5 * (lo + hi);
        let p_hat = estimate_switching(params, mid, settings.pulses_per_estimate, rng);
        if hi - lo <= settings.v_resolution && (p_hat - target).abs() <= settings.tolerance {
            return Ok(mid);
        }
        if p_hat < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(fail(format!(
        "no convergence to p = {target} within {} iterations on [{}, {}] V",
        settings.max_iter, settings.v_min, settings.v_max
    )))
}

/// Pulse timing and amplitudes for one acquisition run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleConfig {
    pub v_reset: f64,
    /// One perturb amplitude per device.
    pub v_perturb: Vec<f64>,
    pub pulse_width: f64,
    /// Readout threshold (metadata only).
    pub v_th: f64,
    pub cycle_hz: f64,
    pub n_devices: usize,
}

impl CycleConfig {
    pub fn new(v_perturb: Vec<f64>) -> Self {
        let timing = CycleTiming::default();
        CycleConfig {
            n_devices: v_perturb.len(),
            v_perturb,
            v_reset: timing.v_reset,
            pulse_width: timing.pulse_width,
            v_th: timing.v_th,
            cycle_hz: timing.cycle_hz,
        }
    }

    pub fn with_timing(v_perturb: Vec<f64>, timing: &CycleTiming) -> Self {
        CycleConfig {
            n_devices: v_perturb.len(),
            v_perturb,
            v_reset: timing.v_reset,
            pulse_width: timing.pulse_width,
            v_th: timing.v_th,
            cycle_hz: timing.cycle_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_perturb.len() != self.n_devices {
            return Err(Error::Config(format!(
                "{} perturb voltages for {} devices",
                self.v_perturb.len(),
                self.n_devices
            )));
        }
        if self.n_devices == 0 || self.n_devices > usize::from(u8::MAX) {
            return Err(Error::Config(format!("device count {} outside 1..=255", self.n_devices)));
        }
        if !(self.v_reset < 0.0) {
            return Err(Error::Config("reset voltage must be negative".into()));
        }
        if let Some((i, v)) = self.v_perturb.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::Config(format!("perturb voltage {v} for device {i} must be positive")));
        }
        if !(self.cycle_hz > 0.0 && self.pulse_width > 0.0) {
            return Err(Error::Config("cycle_hz and pulse_width must be positive".into()));
        }
        Ok(())
    }
}

/// The device-independent part of [`CycleConfig`], as stored in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CycleTiming {
    pub v_reset: f64,
    pub pulse_width: f64,
    pub v_th: f64,
    pub cycle_hz: f64,
}

impl Default for CycleTiming {
    fn default() -> Self {
        CycleTiming { v_reset: -0.6, pulse_width: 5e-6, v_th: 0.2, cycle_hz: 1e5 }
    }
}

/// JSON array configuration. Device parameters are either listed explicitly
/// in `devices` or drawn from `v50_range` with the shared scalar fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArrayConfig {
    pub n_devices: usize,
    pub v50_range: [f64; 2],
    pub slope_w: f64,
    pub r_p: f64,
    pub r_ap: f64,
    pub drift_sigma: f64,
    pub drift_reversion: f64,
    pub corr_rho: f64,
    pub devices: Option<Vec<DeviceParams>>,
    /// Explicit perturb voltages; calibration is skipped when present.
    pub v_perturb: Option<Vec<f64>>,
    pub cycle: CycleTiming,
    pub calibration: CalibrationSettings,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            n_devices: 16,
            v50_range: [0.38, 0.42],
            slope_w: 0.02,
            r_p: 2.0e3,
            r_ap: 4.5e3,
            drift_sigma: 2.0e-5,
            drift_reversion: 2.0e-5,
            corr_rho: 0.02,
            devices: None,
            v_perturb: None,
            cycle: CycleTiming::default(),
            calibration: CalibrationSettings::default(),
        }
    }
}

impl ArrayConfig {
    /// Default device spread with drift and read correlation switched off.
    pub fn ideal() -> Self {
        ArrayConfig { drift_sigma: 0.0, drift_reversion: 0.0, corr_rho: 0.0, ..ArrayConfig::default() }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn device_params(&self, master_seed: u64) -> Result<Vec<DeviceParams>> {
        let devices: Vec<DeviceParams> = match &self.devices {
            Some(list) => {
                if list.len() != self.n_devices {
                    return Err(Error::Config(format!(
                        "config lists {} devices but n_devices = {}",
                        list.len(),
                        self.n_devices
                    )));
                }
                list.iter().enumerate().map(|(i, d)| DeviceParams { device_id: i, ..d.clone() }).collect()
            }
            None => {
                let [lo, hi] = self.v50_range;
                if !(hi >= lo) {
                    return Err(Error::Config("v50_range must be [low, high]".into()));
                }
                let mut rng = substream(master_seed, LAYOUT_STREAM);
                (0..self.n_devices)
                    .map(|i| DeviceParams {
                        device_id: i,
                        v50: lo + (hi - lo) * rng.random::<f64>(),
                        slope_w: self.slope_w,
                        r_p: self.r_p,
                        r_ap: self.r_ap,
                        drift_sigma: self.drift_sigma,
                        drift_reversion: self.drift_reversion,
                        corr_rho: self.corr_rho,
                    })
                    .collect()
            }
        };
        for d in &devices {
            d.validate()?;
        }
        Ok(devices)
    }
}

/// Builds the array for `cfg`, calibrates it unless voltages are given, and
/// generates `n_bits` raw bits.
pub fn simulate(cfg: &ArrayConfig, master_seed: u64, n_bits: usize) -> Result<RawBitstream> {
    let array = MtjArray::from_config(cfg, master_seed)?;
    let cycle = array.cycle_config(cfg)?;
    array.generate(&cycle, n_bits)
}

/// An array of devices bound to a master seed.
#[derive(Debug, Clone)]
pub struct MtjArray {
    devices: Vec<DeviceParams>,
    master_seed: u64,
}

impl MtjArray {
    pub fn new(devices: Vec<DeviceParams>, master_seed: u64) -> Result<Self> {
        if devices.is_empty() || devices.len() > usize::from(u8::MAX) {
            return Err(Error::Config(format!("device count {} outside 1..=255", devices.len())));
        }
        for d in &devices {
            d.validate()?;
        }
        Ok(MtjArray { devices, master_seed })
    }

    pub fn from_config(cfg: &ArrayConfig, master_seed: u64) -> Result<Self> {
        Self::new(cfg.device_params(master_seed)?, master_seed)
    }

    pub fn devices(&self) -> &[DeviceParams] {
        &self.devices
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Calibrates every device independently; device `i` uses its own
    /// calibration substream.
    pub fn calibrate(&self, settings: &CalibrationSettings) -> Result<Vec<f64>> {
        self.devices
            .par_iter()
            .map(|d| {
                let mut rng = substream(self.master_seed, CALIBRATION_STREAM | d.device_id as u64);
                calibrate_with(d, settings, &mut rng)
            })
            .collect()
    }

    /// Builds the cycle configuration for `cfg`: explicit voltages if given,
    /// otherwise a fresh calibration.
    pub fn cycle_config(&self, cfg: &ArrayConfig) -> Result<CycleConfig> {
        let v_perturb = match &cfg.v_perturb {
            Some(v) => v.clone(),
            None => self.calibrate(&cfg.calibration)?,
        };
        Ok(CycleConfig::with_timing(v_perturb, &cfg.cycle))
    }

    /// Runs `ceil(n_bits / n_devices)` reset/perturb cycles and returns the
    /// first `n_bits` bits in cycle-major order. Output depends only on the
    /// seed, device list, cycle configuration and `n_bits`.
    pub fn generate(&self, cycle: &CycleConfig, n_bits: usize) -> Result<RawBitstream> {
        cycle.validate()?;
        if cycle.n_devices != self.devices.len() {
            return Err(Error::Config(format!(
                "cycle config for {} devices, array has {}",
                cycle.n_devices,
                self.devices.len()
            )));
        }
        if n_bits == 0 {
            return Err(Error::Validation("n_bits must be positive".into()));
        }
        let n_dev = self.devices.len();
        let cycles = n_bits.div_ceil(n_dev);

        let per_device: Vec<Vec<u64>> = self
            .devices
            .par_iter()
            .zip(cycle.v_perturb.par_iter())
            .map(|(d, &v)| {
                let mut rng = substream(self.master_seed, d.device_id as u64);
                let mut state = DeviceState::new(d);
                let mut words = vec![0u64; cycles.div_ceil(64)];
                for c in 0..cycles {
                    if state.sample_switch(d, v, &mut rng) {
                        words[c >> 6] |= 1 << (c & 63);
                    }
                }
                words
            })
            .collect();

        let mut out = RawBitstream::with_capacity(n_bits, Source::MtjRaw, n_dev as u8, self.master_seed);
        'outer: for c in 0..cycles {
            for words in &per_device {
                if out.len() == n_bits {
                    break 'outer;
                }
                out.push((words[c >> 6] >> (c & 63)) & 1 == 1);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dev(v50: f64, w: f64) -> DeviceParams {
        DeviceParams::ideal(0, v50, w)
    }

    #[test]
    fn sigmoid_midpoint_and_quartile() {
        let d = dev(0.4, 0.02);
        assert_eq!(switching_probability(0.4, &d), 0.5);
        let p = switching_probability(0.4 + 0.02 * 3f64.ln(), &d);
        assert!((p - 0.75).abs() < 1e-12);
    }

    #[test]
    fn sigmoid_known_value_and_monte_carlo() {
        let d = dev(0.40, 0.02);
        let want = 1.0 / (1.0 + 2f64.exp());
        let p = switching_probability(0.36, &d);
        assert!((p - want).abs() < 1e-12);
        assert!((p - 0.1192).abs() < 1e-4);

        let mut rng = substream(7, 0);
        let mut st = DeviceState::new(&d);
        let n = 1_000_000;
        let ones = (0..n).filter(|_| st.sample_switch(&d, 0.36, &mut rng)).count();
        let freq = ones as f64 / n as f64;
        assert!((freq - want).abs() <= 0.003, "freq {freq}");
    }

    #[test]
    fn unbiased_ideal_device_mean() {
        let d = dev(0.4, 0.02);
        let mut rng = substream(11, 3);
        let mut st = DeviceState::new(&d);
        let n = 1_000_000;
        let ones = (0..n).filter(|_| st.sample_switch(&d, 0.4, &mut rng)).count();
        let mean = ones as f64 / n as f64;
        assert!((0.4985..=0.5015).contains(&mean), "mean {mean}");
    }

    #[test]
    fn repeat_correlation_dominates() {
        let d = DeviceParams { corr_rho: 0.99, ..dev(0.4, 0.02) };
        let mut rng = substream(5, 0);
        let mut st = DeviceState::new(&d);
        let xs: Vec<f64> = (0..1_000_000).map(|_| f64::from(u8::from(st.sample_switch(&d, 0.4, &mut rng)))).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        let cov = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!(cov / var >= 0.97, "lag-1 {}", cov / var);
    }

    #[test]
    fn saturated_low_emits_zeros() {
        let d = dev(0.4, 0.02);
        let mut rng = substream(1, 1);
        let mut st = DeviceState::new(&d);
        let v = 0.4 - 40.0 * 0.02;
        assert!((0..10_000).all(|_| !st.sample_switch(&d, v, &mut rng)));
    }

    #[test]
    fn calibration_hits_target() {
        for (seed, v50) in [(1u64, 0.40), (2, 0.37), (3, 0.45), (4, 0.52)] {
            let d = DeviceParams::ideal(seed as usize, v50, 0.02);
            let mut rng = substream(seed, 99);
            let v = calibrate(&d, 0.5, 1000, &mut rng).unwrap();
            let p = switching_probability(v, &d);
            assert!((p - 0.5).abs() <= 0.02, "v50 {v50}: v {v} p {p}");
        }
    }

    #[test]
    fn calibration_precise_with_many_pulses() {
        let d = dev(0.40, 0.02);
        let mut rng = substream(21, 0);
        let v = calibrate(&d, 0.5, 100_000, &mut rng).unwrap();
        assert!((v - 0.40).abs() <= 0.003, "v = {v}");
    }

    #[test]
    fn calibration_rejects_unreachable_targets() {
        let d = DeviceParams::ideal(7, 0.4, 0.02);
        let mut rng = substream(0, 0);
        for t in [0.0, 1.0, -0.1] {
            match calibrate(&d, t, 1000, &mut rng) {
                Err(Error::Calibration { device, .. }) => assert_eq!(device, 7),
                other => panic!("expected calibration error, got {other:?}"),
            }
        }
    }

    #[test]
    fn calibration_fails_outside_voltage_window() {
        let d = DeviceParams::ideal(3, 1.5, 0.02);
        let mut rng = substream(0, 0);
        let err = calibrate(&d, 0.5, 1000, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Calibration { device: 3, .. }));
    }

    #[test]
    fn generate_cycle_accounting() {
        let array = MtjArray::from_config(&ArrayConfig::ideal(), 9).unwrap();
        let cfg = CycleConfig::new(vec![0.4; 16]);
        let s = array.generate(&cfg, 160).unwrap();
        assert_eq!(s.len(), 160);
        assert_eq!(s.cycles(), 10);
        assert_eq!(s.n_devices(), 16);
        assert_eq!(s.source(), Source::MtjRaw);
        let partial = array.generate(&cfg, 170).unwrap();
        assert_eq!(partial.cycles(), 11);
        assert_eq!(partial.slice(0, 160), s);
    }

    #[test]
    fn generate_all_saturated_low() {
        let array = MtjArray::from_config(&ArrayConfig::ideal(), 1).unwrap();
        let s = array.generate(&CycleConfig::new(vec![0.01; 16]), 4096).unwrap();
        assert!(s.iter().all(|b| !b));
    }

    #[test]
    fn generate_cycle_major_order() {
        // device 0 saturated high, others low: bits at multiples of n_dev
        let mut devs: Vec<DeviceParams> = (0..4).map(|i| DeviceParams::ideal(i, 0.4, 0.02)).collect();
        devs[0].v50 = 0.1;
        let array = MtjArray::new(devs, 3).unwrap();
        let s = array.generate(&CycleConfig::new(vec![0.5, 0.05, 0.05, 0.05]), 40).unwrap();
        for k in 0..40 {
            assert_eq!(s.get(k), k % 4 == 0, "bit {k}");
        }
    }

    #[test]
    fn config_validation() {
        let array = MtjArray::from_config(&ArrayConfig::ideal(), 1).unwrap();
        let mut cfg = CycleConfig::new(vec![0.4; 16]);
        cfg.v_reset = 0.1;
        assert!(matches!(array.generate(&cfg, 16), Err(Error::Config(_))));
        let mut cfg = CycleConfig::new(vec![0.4; 16]);
        cfg.v_perturb[3] = -0.2;
        assert!(matches!(array.generate(&cfg, 16), Err(Error::Config(_))));
        assert!(array.generate(&CycleConfig::new(vec![0.4; 15]), 16).is_err());
        let bad = DeviceParams { corr_rho: 1.0, ..dev(0.4, 0.02) };
        assert!(bad.validate().is_err());
        let bad = DeviceParams { slope_w: 0.0, ..dev(0.4, 0.02) };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn calibrated_ideal_array_is_balanced() {
        let cfg = ArrayConfig {
            calibration: CalibrationSettings {
                pulses_per_estimate: 100_000,
                tolerance: 0.005,
                ..CalibrationSettings::default()
            },
            ..ArrayConfig::ideal()
        };
        let array = MtjArray::from_config(&cfg, 2024).unwrap();
        let cycle = array.cycle_config(&cfg).unwrap();
        let s = array.generate(&cycle, 1_000_000).unwrap();
        let mean = s.iter().filter(|&b| b).count() as f64 / s.len() as f64;
        assert!((mean - 0.5).abs() <= 0.005, "mean {mean}");
    }

    proptest! {
        #[test]
        fn switching_probability_monotone(v50 in -1.0f64..1.0, w in 0.001f64..0.5, a in -15.0f64..15.0, b in -15.0f64..15.0) {
            prop_assume!((a - b).abs() > 1e-3);
            let d = dev(v50, w);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (plo, phi) = (switching_probability(v50 + lo * w, &d), switching_probability(v50 + hi * w, &d));
            prop_assert!(plo < phi, "{plo} !< {phi}");
            prop_assert!((0.0..=1.0).contains(&plo) && (0.0..=1.0).contains(&phi));
        }

        #[test]
        fn generation_reproducible(seed in any::<u64>(), n in 1usize..600) {
            let array = MtjArray::from_config(&ArrayConfig::default(), seed).unwrap();
            let cycle = CycleConfig::new(array.devices().iter().map(|d| d.v50).collect());
            prop_assert_eq!(array.generate(&cycle, n).unwrap(), array.generate(&cycle, n).unwrap());
        }
    }
}
