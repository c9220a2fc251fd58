//! Command-line front end for the MTJ random number pipeline.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mtj_trng::analysis::{
    bias_and_autocorr, energy_per_bit, throughput, word_histogram, EnergyModel, Scheme, ThroughputModel,
};
use mtj_trng::bits::RawBitstream;
use mtj_trng::conditioning::{estimate_min_entropy, toeplitz_extract, xor3, xor3_grouped, ToeplitzConfig, XorGrouping};
use mtj_trng::device::{simulate, ArrayConfig, MtjArray};
use mtj_trng::latent::{build_latent_matrix_with, cyclic_labels, ClassEncoding};
use mtj_trng::nist::{run_suite, SuiteConfig, TestId};
use mtj_trng::prng::{lfsr32_stream_with_taps, xoroshiro128p_stream, Xoroshiro128Plus, LFSR32_DEFAULT_TAPS};
use mtj_trng::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "mtjrng", version, about = "Simulated MTJ-array TRNG pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the device array and write raw bits.
    Simulate {
        /// Array configuration JSON; built-in defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the device count from the configuration.
        #[arg(long)]
        devices: Option<usize>,
        /// Number of reset-perturb cycles.
        #[arg(long, conflicts_with = "bits")]
        cycles: Option<u64>,
        /// Number of bits; the last cycle is truncated to fit.
        #[arg(long)]
        bits: Option<u64>,
        #[arg(long)]
        seed: u64,
        /// Disable drift and read correlation.
        #[arg(long)]
        ideal: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Condition a raw stream with XOR-3 or Toeplitz hashing.
    Condition {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Toeplitz configuration JSON ({n, m, seed_hex}).
        #[arg(long, required_if_eq("scheme", "toeplitz"))]
        toeplitz_config: Option<PathBuf>,
        /// XOR grouping: "temporal" or "stride:S".
        #[arg(long, default_value = "temporal")]
        grouping: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a deterministic baseline stream.
    Prng {
        #[arg(long, value_enum)]
        kind: PrngKind,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        bits: u64,
        /// LFSR taps as a comma list, e.g. 32,22,2,1.
        #[arg(long, value_delimiter = ',')]
        taps: Option<Vec<u8>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Calibrate every device to a target switching probability.
    Calibrate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        target_p: f64,
        #[arg(long)]
        pulses: Option<u32>,
        #[arg(long)]
        seed: u64,
        /// Write the voltages as JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the statistical test suite.
    Nist {
        #[arg(long)]
        input: PathBuf,
        /// Suite configuration JSON; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        sequences: Option<usize>,
        #[arg(long)]
        length: Option<usize>,
        /// Subset of tests, comma separated (e.g. frequency,runs).
        #[arg(long, value_delimiter = ',')]
        tests: Option<Vec<String>>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build a latent-code matrix and write it as LATF.
    Latent {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        images: usize,
        /// Comma list of labels 1..10, or "cyclic".
        #[arg(long, default_value = "cyclic")]
        labels: String,
        #[arg(long, value_enum, default_value = "one-hot")]
        encoding: EncodingArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Histogram, bias, autocorrelation and min-entropy of a stream.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Include the 32-bit word histogram.
        #[arg(long)]
        histogram: bool,
        #[arg(long, default_value_t = 256)]
        bins: usize,
        /// Largest autocorrelation lag.
        #[arg(long, default_value_t = 0)]
        autocorr: usize,
        /// JSON report path; stdout when absent.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Histogram counts as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Throughput and energy per bit for an array size.
    Model {
        #[arg(long, value_delimiter = ',', default_value = "16,1000000")]
        cells: Vec<f64>,
        #[arg(long, default_value_t = 1e5)]
        cycle_hz: f64,
        #[arg(long, value_enum, default_value = "xor3")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 8192)]
        toeplitz_n: usize,
        #[arg(long, default_value_t = 4096)]
        toeplitz_m: usize,
        /// Energy constants JSON.
        #[arg(long)]
        energy_config: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Draw a Toeplitz seed from a simulated XOR-3 conditioned stream.
    ToeplitzSeed {
        #[arg(long, default_value_t = 8192)]
        n: usize,
        #[arg(long, default_value_t = 4096)]
        m: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Raw,
    Xor3,
    Toeplitz,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PrngKind {
    Lfsr32,
    Xoroshiro128p,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EncodingArg {
    OneHot,
    Signed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_array_config(path: Option<&Path>) -> Result<ArrayConfig> {
    match path {
        Some(p) => ArrayConfig::load(p),
        None => Ok(ArrayConfig::default()),
    }
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_grouping(s: &str) -> Result<XorGrouping> {
    if s == "temporal" {
        return Ok(XorGrouping::Temporal);
    }
    s.strip_prefix("stride:")
        .and_then(|v| v.parse().ok())
        .map(XorGrouping::Stride)
        .ok_or_else(|| Error::Config(format!("grouping {s:?}: expected temporal or stride:S")))
}

fn parse_labels(s: &str, n: usize) -> Result<Vec<u8>> {
    if s == "cyclic" {
        return Ok(cyclic_labels(n));
    }
    s.split(',')
        .map(|t| t.trim().parse::<u8>().map_err(|_| Error::Validation(format!("label {t:?} is not an integer"))))
        .collect()
}

fn simulate_stream(cfg: &ArrayConfig, seed: u64, n_bits: u64) -> Result<RawBitstream> {
    let n_bits = usize::try_from(n_bits).map_err(|_| Error::Config("bit count too large".into()))?;
    simulate(cfg, seed, n_bits)
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { config, devices, cycles, bits, seed, ideal, out } => {
            let mut cfg = load_array_config(config.as_deref())?;
            if ideal {
                cfg.drift_sigma = 0.0;
                cfg.drift_reversion = 0.0;
                cfg.corr_rho = 0.0;
                if let Some(list) = cfg.devices.as_mut() {
                    for d in list {
                        *d = d.without_drift();
                    }
                }
            }
            if let Some(n) = devices {
                if cfg.devices.is_some() {
                    return Err(Error::Config("--devices conflicts with an explicit device list".into()));
                }
                cfg.n_devices = n;
            }
            let n_bits = match (cycles, bits) {
                (Some(c), None) => c * cfg.n_devices as u64,
                (None, Some(b)) => b,
                _ => return Err(Error::Config("give exactly one of --cycles or --bits".into())),
            };
            if n_bits == 0 {
                return Err(Error::Config("bit count must be positive".into()));
            }
            let stream = simulate_stream(&cfg, seed, n_bits)?;
            stream.save(&out)?;
            println!(
                "wrote {} bits ({} cycles, {} devices) to {}",
                stream.len(),
                stream.cycles(),
                stream.n_devices(),
                out.display()
            );
        }
        Command::Condition { input, scheme, toeplitz_config, grouping, out } => {
            let raw = RawBitstream::load(&input)?;
            let result = match scheme {
                SchemeArg::Raw => raw,
                SchemeArg::Xor3 => match parse_grouping(&grouping)? {
                    XorGrouping::Temporal => xor3(&raw)?,
                    g => xor3_grouped(&raw, g)?,
                },
                SchemeArg::Toeplitz => {
                    let path = toeplitz_config.ok_or_else(|| Error::Config("--toeplitz-config required".into()))?;
                    toeplitz_extract(&raw, &ToeplitzConfig::load(path)?)?
                }
            };
            result.save(&out)?;
            println!("wrote {} bits ({}) to {}", result.len(), result.source(), out.display());
        }
        Command::Prng { kind, seed, bits, taps, out } => {
            let n = usize::try_from(bits).map_err(|_| Error::Config("bit count too large".into()))?;
            let stream = match kind {
                PrngKind::Lfsr32 => {
                    let seed32 = u32::try_from(seed)
                        .map_err(|_| Error::InvalidSeed(format!("LFSR seed {seed} exceeds 32 bits")))?;
                    let taps = taps.unwrap_or_else(|| LFSR32_DEFAULT_TAPS.to_vec());
                    lfsr32_stream_with_taps(seed32, &taps, n)?
                }
                PrngKind::Xoroshiro128p => {
                    if taps.is_some() {
                        return Err(Error::Config("--taps applies only to lfsr32".into()));
                    }
                    xoroshiro128p_stream(&mut Xoroshiro128Plus::from_seed(seed), n, seed)
                }
            };
            stream.save(&out)?;
            println!("wrote {} bits ({}) to {}", stream.len(), stream.source(), out.display());
        }
        Command::Calibrate { config, target_p, pulses, seed, out } => {
            let cfg = load_array_config(config.as_deref())?;
            let mut settings = cfg.calibration.clone();
            settings.target_p = target_p;
            if let Some(p) = pulses {
                settings.pulses_per_estimate = p;
            }
            let array = MtjArray::from_config(&cfg, seed)?;
            let volts = array.calibrate(&settings)?;
            #[derive(Serialize)]
            struct Calibration<'a> {
                target_p: f64,
                pulses: u32,
                master_seed: u64,
                v50: Vec<f64>,
                v_perturb: &'a [f64],
            }
            let report = Calibration {
                target_p,
                pulses: settings.pulses_per_estimate,
                master_seed: seed,
                v50: array.devices().iter().map(|d| d.v50).collect(),
                v_perturb: &volts,
            };
            write_json(&report, out.as_deref())?;
        }
        Command::Nist { input, config, sequences, length, tests, json, csv } => {
            let mut cfg: SuiteConfig = match config {
                Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
                None => SuiteConfig::default(),
            };
            if let Some(s) = sequences {
                cfg.n_sequences = s;
            }
            if let Some(l) = length {
                cfg.sequence_length = l;
            }
            if let Some(t) = tests {
                cfg.tests = Some(t.iter().map(|s| s.parse::<TestId>()).collect::<Result<_>>()?);
            }
            let stream = RawBitstream::load(&input)?;
            let report = run_suite(&stream, &cfg)?;
            print!("{}", report.render_table());
            if let Some(p) = json {
                fs::write(p, report.to_json()? + "\n")?;
            }
            if let Some(p) = csv {
                report.write_csv(fs::File::create(p)?)?;
            }
        }
        Command::Latent { input, images, labels, encoding, out } => {
            let stream = RawBitstream::load(&input)?;
            let labels = parse_labels(&labels, images)?;
            let enc = match encoding {
                EncodingArg::OneHot => ClassEncoding::OneHot,
                EncodingArg::Signed => ClassEncoding::Signed,
            };
            let m = build_latent_matrix_with(&stream, images, &labels, enc)?;
            m.save(&out)?;
            println!("wrote {} x {} latent matrix to {}", m.rows(), m.dims(), out.display());
        }
        Command::Analyze { input, histogram, bins, autocorr, json, csv } => {
            let stream = RawBitstream::load(&input)?;
            #[derive(Serialize)]
            struct Analysis {
                source: String,
                n_bits: u64,
                bias: mtj_trng::analysis::BiasReport,
                min_entropy: Option<mtj_trng::conditioning::EntropyEstimate>,
                histogram: Option<mtj_trng::analysis::WordHistogram>,
            }
            let hist = if histogram || csv.is_some() { Some(word_histogram(&stream, bins)?) } else { None };
            if let (Some(p), Some(h)) = (&csv, &hist) {
                let mut w = csv::Writer::from_path(p)?;
                w.write_record(["bin", "count"])?;
                for (i, c) in h.counts.iter().enumerate() {
                    w.write_record([i.to_string(), c.to_string()])?;
                }
                w.flush()?;
            }
            let report = Analysis {
                source: stream.source().to_string(),
                n_bits: stream.len() as u64,
                bias: bias_and_autocorr(&stream, autocorr)?,
                min_entropy: estimate_min_entropy(&stream).ok(),
                histogram: hist.filter(|_| histogram),
            };
            write_json(&report, json.as_deref())?;
        }
        Command::Model { cells, cycle_hz, scheme, toeplitz_n, toeplitz_m, energy_config, json } => {
            let energy: EnergyModel = match energy_config {
                Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
                None => EnergyModel::default(),
            };
            let scheme = match scheme {
                SchemeArg::Raw => Scheme::Raw,
                SchemeArg::Xor3 => Scheme::Xor3,
                SchemeArg::Toeplitz => {
                    if toeplitz_m == 0 || toeplitz_m >= toeplitz_n {
                        return Err(Error::Config("Toeplitz sizes need 0 < m < n".into()));
                    }
                    Scheme::Toeplitz { n: toeplitz_n, m: toeplitz_m }
                }
            };
            #[derive(Serialize)]
            struct Row {
                n_cells: f64,
                cycle_hz: f64,
                conditioning_factor: f64,
                raw_bps: f64,
                conditioned_bps: f64,
                e_bit_joules: f64,
                csprng_ratio_low: f64,
                csprng_ratio_high: f64,
            }
            let mut rows = Vec::new();
            println!(
                "{:>12} {:>12} {:>14} {:>14} {:>12} {:>12}",
                "cells", "cycle_hz", "raw_bps", "cond_bps", "e_bit_J", "ratio_high"
            );
            for &n in &cells {
                let model = ThroughputModel::new(n, cycle_hz, scheme)?;
                let t = throughput(&model);
                let e = energy_per_bit(&energy, n, cycle_hz, model.conditioning_factor)?;
                println!(
                    "{:>12} {:>12} {:>14.4e} {:>14.4e} {:>12.4e} {:>12.4e}",
                    n, cycle_hz, t.raw_bps, t.conditioned_bps, e.e_bit, e.ratio_high
                );
                rows.push(Row {
                    n_cells: n,
                    cycle_hz,
                    conditioning_factor: model.conditioning_factor,
                    raw_bps: t.raw_bps,
                    conditioned_bps: t.conditioned_bps,
                    e_bit_joules: e.e_bit,
                    csprng_ratio_low: e.ratio_low,
                    csprng_ratio_high: e.ratio_high,
                });
            }
            if let Some(p) = json {
                write_json(&rows, Some(&p))?;
            }
        }
        Command::ToeplitzSeed { n, m, seed, config, out } => {
            let cfg = load_array_config(config.as_deref())?;
            let need = (n + m - 1) as u64 * 3;
            let raw = simulate_stream(&cfg, seed, need)?;
            let tcfg = ToeplitzConfig::from_stream(n, m, &xor3(&raw)?)?;
            tcfg.save(&out)?;
            println!("wrote Toeplitz config n={n} m={m} to {}", out.display());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping_parse() {
        assert_eq!(parse_grouping("temporal").unwrap(), XorGrouping::Temporal);
        assert_eq!(parse_grouping("stride:16").unwrap(), XorGrouping::Stride(16));
        assert!(parse_grouping("spatial").is_err());
    }

    #[test]
    fn labels_parse() {
        assert_eq!(parse_labels("1,2, 10", 3).unwrap(), vec![1, 2, 10]);
        assert_eq!(parse_labels("cyclic", 12).unwrap()[10], 1);
        assert!(parse_labels("a", 1).is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
