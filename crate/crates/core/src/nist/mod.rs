//! SP 800-22 statistical test suite with two-level evaluation: per-sequence
//! p-values, pass proportion and uniformity of p-values.

pub mod complexity;
pub mod excursions;
pub mod frequency;
pub mod rank;
pub mod runs;
pub mod serial;
pub mod special;
pub mod spectral;
pub mod template;
pub mod universal;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::RawBitstream;
use crate::error::{Error, Result};

pub use complexity::berlekamp_massey;
pub use rank::matrix_rank_gf2;
pub use special::{erfc, igamc};

/// P-values of one test on one sequence, or the reason it did not apply.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    PValues(Vec<f64>),
    NotApplicable(String),
}

impl Outcome {
    pub fn one(p: f64) -> Self {
        Outcome::PValues(vec![p])
    }

    pub fn na(reason: impl Into<String>) -> Self {
        Outcome::NotApplicable(reason.into())
    }

    pub fn is_applicable(&self) -> bool {
        matches!(self, Outcome::PValues(_))
    }

    /// The p-values; empty when not applicable.
    pub fn values(&self) -> &[f64] {
        match self {
            Outcome::PValues(v) => v,
            Outcome::NotApplicable(_) => &[],
        }
    }

    /// The only p-value. Panics if there is not exactly one.
    pub fn single(&self) -> f64 {
        match self.values() {
            [p] => *p,
            other => panic!("expected one p-value, got {other:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestId {
    Frequency,
    BlockFrequency,
    Runs,
    LongestRun,
    Rank,
    Fft,
    NonOverlappingTemplate,
    OverlappingTemplate,
    Universal,
    LinearComplexity,
    Serial,
    ApproximateEntropy,
    CumulativeSums,
    RandomExcursions,
    RandomExcursionsVariant,
}

impl TestId {
    pub const ALL: [TestId; 15] = [
        TestId::Frequency,
        TestId::BlockFrequency,
        TestId::Runs,
        TestId::LongestRun,
        TestId::Rank,
        TestId::Fft,
        TestId::NonOverlappingTemplate,
        TestId::OverlappingTemplate,
        TestId::Universal,
        TestId::LinearComplexity,
        TestId::Serial,
        TestId::ApproximateEntropy,
        TestId::CumulativeSums,
        TestId::RandomExcursions,
        TestId::RandomExcursionsVariant,
    ];

    /// Row label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            TestId::Frequency => "Frequency",
            TestId::BlockFrequency => "Block frequency",
            TestId::Runs => "Runs",
            TestId::LongestRun => "Longest run",
            TestId::Rank => "Rank",
            TestId::Fft => "FFT",
            TestId::NonOverlappingTemplate => "Non-overlapping template",
            TestId::OverlappingTemplate => "Overlapping template",
            TestId::Universal => "Universal",
            TestId::LinearComplexity => "Linear complexity",
            TestId::Serial => "Serial",
            TestId::ApproximateEntropy => "Approximate entropy",
            TestId::CumulativeSums => "Cumulative sum",
            TestId::RandomExcursions => "Random excursions",
            TestId::RandomExcursionsVariant => "Random excursions variant",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            TestId::Frequency => "frequency",
            TestId::BlockFrequency => "block-frequency",
            TestId::Runs => "runs",
            TestId::LongestRun => "longest-run",
            TestId::Rank => "rank",
            TestId::Fft => "fft",
            TestId::NonOverlappingTemplate => "non-overlapping-template",
            TestId::OverlappingTemplate => "overlapping-template",
            TestId::Universal => "universal",
            TestId::LinearComplexity => "linear-complexity",
            TestId::Serial => "serial",
            TestId::ApproximateEntropy => "approximate-entropy",
            TestId::CumulativeSums => "cumulative-sums",
            TestId::RandomExcursions => "random-excursions",
            TestId::RandomExcursionsVariant => "random-excursions-variant",
        }
    }

    /// Names of the p-values the test emits, in order.
    pub fn sub_test_labels(self, cfg: &SuiteConfig) -> Result<Vec<String>> {
        Ok(match self {
            TestId::NonOverlappingTemplate => template::templates_for(cfg.non_overlapping_m as u32)?
                .iter()
                .map(|t| format!("{:0width$b}", t, width = cfg.non_overlapping_m))
                .collect(),
            TestId::Serial => vec!["p1".into(), "p2".into()],
            TestId::CumulativeSums => vec!["forward".into(), "backward".into()],
            TestId::RandomExcursions => excursions::EXCURSION_STATES.iter().map(|x| format!("x={x:+}")).collect(),
            TestId::RandomExcursionsVariant => excursions::VARIANT_STATES.iter().map(|x| format!("x={x:+}")).collect(),
            _ => vec![String::new()],
        })
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TestId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestId::ALL.into_iter().find(|t| t.slug() == s).ok_or_else(|| Error::Config(format!("unknown test {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub sequence_length: usize,
    pub n_sequences: usize,
    pub alpha: f64,
    pub block_frequency_m: usize,
    pub non_overlapping_m: usize,
    pub non_overlapping_blocks: usize,
    pub overlapping_m: usize,
    pub overlapping_block: usize,
    pub overlapping_k: usize,
    pub universal_l: usize,
    pub universal_q: usize,
    pub linear_complexity_m: usize,
    pub serial_m: usize,
    pub approx_entropy_m: usize,
    pub rank_size: usize,
    /// Subset of tests to run; all fifteen when absent.
    pub tests: Option<Vec<TestId>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            sequence_length: 1_000_000,
            n_sequences: 55,
            alpha: 0.01,
            block_frequency_m: 128,
            non_overlapping_m: 9,
            non_overlapping_blocks: 8,
            overlapping_m: 9,
            overlapping_block: 1032,
            overlapping_k: 5,
            universal_l: 7,
            universal_q: 1280,
            linear_complexity_m: 500,
            serial_m: 16,
            approx_entropy_m: 10,
            rank_size: 32,
            tests: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if self.sequence_length == 0 || self.n_sequences == 0 {
            return bad("sequence_length and n_sequences must be positive".into());
        }
        let n = self.sequence_length;
        if self.block_frequency_m == 0 || self.block_frequency_m > n {
            return bad(format!("block_frequency_m {} outside 1..={n}", self.block_frequency_m));
        }
        if !(2..=16).contains(&self.non_overlapping_m) || self.non_overlapping_blocks == 0 {
            return bad("non-overlapping template needs m in 2..=16 and at least one block".into());
        }
        if !(2..=21).contains(&self.overlapping_m) || self.overlapping_k == 0 {
            return bad("overlapping template needs m in 2..=21 and K > 0".into());
        }
        if self.overlapping_block < self.overlapping_m {
            return bad("overlapping block shorter than template".into());
        }
        if !(1..=16).contains(&self.universal_l) || self.universal_q == 0 {
            return bad("universal needs L in 1..=16 and Q > 0".into());
        }
        if self.linear_complexity_m < 2 {
            return bad("linear_complexity_m must be at least 2".into());
        }
        if !(2..=24).contains(&self.serial_m) {
            return bad(format!("serial_m {} outside 2..=24", self.serial_m));
        }
        if !(1..=23).contains(&self.approx_entropy_m) {
            return bad(format!("approx_entropy_m {} outside 1..=23", self.approx_entropy_m));
        }
        if !(2..=64).contains(&self.rank_size) {
            return bad(format!("rank_size {} outside 2..=64", self.rank_size));
        }
        Ok(())
    }

    pub fn selected_tests(&self) -> Vec<TestId> {
        match &self.tests {
            Some(t) => {
                let mut t = t.clone();
                t.sort();
                t.dedup();
                t
            }
            None => TestId::ALL.to_vec(),
        }
    }

    pub fn required_bits(&self) -> u64 {
        self.sequence_length as u64 * self.n_sequences as u64
    }
}

/// P-values of `test` on one sequence of 0/1 values.
pub fn run_single_test(test: TestId, bits: &[u8], cfg: &SuiteConfig) -> Result<Outcome> {
    match test {
        TestId::Frequency => frequency::frequency(bits),
        TestId::BlockFrequency => frequency::block_frequency(bits, cfg.block_frequency_m),
        TestId::Runs => runs::runs(bits),
        TestId::LongestRun => runs::longest_run(bits),
        TestId::Rank => rank::rank_test(bits, cfg.rank_size),
        TestId::Fft => spectral::dft(bits),
        TestId::NonOverlappingTemplate => {
            let templates = template::templates_for(cfg.non_overlapping_m as u32)?;
            template::non_overlapping(bits, cfg.non_overlapping_m, cfg.non_overlapping_blocks, &templates)
        }
        TestId::OverlappingTemplate => {
            template::overlapping(bits, cfg.overlapping_m, cfg.overlapping_block, cfg.overlapping_k)
        }
        TestId::Universal => universal::universal(bits, cfg.universal_l, cfg.universal_q),
        TestId::LinearComplexity => complexity::linear_complexity(bits, cfg.linear_complexity_m),
        TestId::Serial => serial::serial(bits, cfg.serial_m),
        TestId::ApproximateEntropy => serial::approximate_entropy(bits, cfg.approx_entropy_m),
        TestId::CumulativeSums => frequency::cumulative_sums(bits),
        TestId::RandomExcursions => excursions::random_excursions(bits, true),
        TestId::RandomExcursionsVariant => excursions::random_excursions_variant(bits, true),
    }
}

/// Minimum passing proportion for `n` sequences at significance `alpha`.
pub fn proportion_threshold(n: usize, alpha: f64) -> f64 {
    let p = 1.0 - alpha;
    p - 3.0 * (p * alpha / n as f64).sqrt()
}

/// P-values per bin over ten equal bins of [0, 1]; 1.0 lands in the last.
pub fn pvalue_histogram(pvalues: &[f64]) -> [u64; 10] {
    let mut bins = [0u64; 10];
    for &p in pvalues {
        let idx = ((p * 10.0).floor() as usize).min(9);
        bins[idx] += 1;
    }
    bins
}

/// Chi-square uniformity of p-values over ten bins; `None` for an empty list.
pub fn uniformity_of_pvalues(pvalues: &[f64]) -> Result<Option<f64>> {
    if pvalues.is_empty() {
        return Ok(None);
    }
    let expected = pvalues.len() as f64 / 10.0;
    let chi2: f64 = pvalue_histogram(pvalues).iter().map(|&f| (f as f64 - expected).powi(2) / expected).sum();
    Ok(Some(igamc(4.5, chi2 / 2.0)?))
}

/// P_T below this fails.
pub const UNIFORMITY_LEVEL: f64 = 0.0001;

/// Fewer applicable sequences than this trigger a low-sample flag.
pub const RECOMMENDED_SEQUENCES: usize = 55;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "N/A",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubTestSummary {
    pub label: String,
    /// Per-sequence p-values, `None` where the test did not apply.
    pub pvalues: Vec<Option<f64>>,
    pub applicable: usize,
    pub passes: usize,
    pub proportion: Option<f64>,
    pub threshold: Option<f64>,
    pub p_t: Option<f64>,
    pub low_sample: bool,
    pub verdict: Verdict,
}

impl SubTestSummary {
    fn new(label: String, pvalues: Vec<Option<f64>>, alpha: f64) -> Result<Self> {
        let applicable: Vec<f64> = pvalues.iter().flatten().copied().collect();
        let n = applicable.len();
        let passes = applicable.iter().filter(|&&p| p >= alpha).count();
        let (proportion, threshold) =
            if n == 0 { (None, None) } else { (Some(passes as f64 / n as f64), Some(proportion_threshold(n, alpha))) };
        let p_t = uniformity_of_pvalues(&applicable)?;
        let verdict = match (proportion, threshold, p_t) {
            (Some(prop), Some(th), Some(pt)) => {
                if prop >= th && pt >= UNIFORMITY_LEVEL {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            _ => Verdict::NotApplicable,
        };
        Ok(SubTestSummary {
            label,
            pvalues,
            applicable: n,
            passes,
            proportion,
            threshold,
            p_t,
            low_sample: n < RECOMMENDED_SEQUENCES,
            verdict,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestSummary {
    pub test: TestId,
    pub label: String,
    pub sub_tests: Vec<SubTestSummary>,
    pub not_applicable_sequences: usize,
    pub verdict: Verdict,
}

impl TestSummary {
    /// Smallest P_T over sub-tests.
    pub fn min_p_t(&self) -> Option<f64> {
        self.sub_tests.iter().filter_map(|s| s.p_t).reduce(f64::min)
    }

    /// Smallest pass proportion over sub-tests.
    pub fn min_proportion(&self) -> Option<f64> {
        self.sub_tests.iter().filter_map(|s| s.proportion).reduce(f64::min)
    }

    pub fn failed_sub_tests(&self) -> usize {
        self.sub_tests.iter().filter(|s| s.verdict == Verdict::Fail).count()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub source: String,
    pub config: SuiteConfig,
    pub tests: Vec<TestSummary>,
}

impl SuiteReport {
    pub fn test(&self, id: TestId) -> Option<&TestSummary> {
        self.tests.iter().find(|t| t.test == id)
    }

    pub fn verdict(&self, id: TestId) -> Option<Verdict> {
        self.test(id).map(|t| t.verdict)
    }

    pub fn failed(&self) -> Vec<TestId> {
        self.tests.iter().filter(|t| t.verdict == Verdict::Fail).map(|t| t.test).collect()
    }

    /// True iff no test failed and at least one applied.
    pub fn all_pass(&self) -> bool {
        self.tests.iter().all(|t| t.verdict != Verdict::Fail) && self.tests.iter().any(|t| t.verdict == Verdict::Pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per test: label, verdict, min P_T, min proportion, failing
    /// sub-tests.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["test", "source", "verdict", "min_p_t", "min_proportion", "failed_sub_tests", "sub_tests"])?;
        for t in &self.tests {
            let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "NA".into());
            wr.write_record([
                t.label.clone(),
                self.source.clone(),
                t.verdict.to_string(),
                fmt(t.min_p_t()),
                fmt(t.min_proportion()),
                t.failed_sub_tests().to_string(),
                t.sub_tests.len().to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Fixed-width text table.
    pub fn render_table(&self) -> String {
        let mut out = format!("{:<28} {:>8} {:>10} {:>10}  {}\n", "test", "P_T min", "prop min", "failed", "verdict");
        for t in &self.tests {
            let f = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<28} {:>8} {:>10} {:>6}/{:<3}  {}\n",
                t.label,
                f(t.min_p_t()),
                f(t.min_proportion()),
                t.failed_sub_tests(),
                t.sub_tests.len(),
                t.verdict
            ));
        }
        out
    }
}

/// Runs the selected tests on `n_sequences` disjoint leading sequences of the
/// stream.
pub fn run_suite(stream: &RawBitstream, cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let need = cfg.required_bits();
    if (stream.len() as u64) < need {
        return Err(Error::InsufficientBits { needed: need, available: stream.len() as u64 });
    }
    let tests = cfg.selected_tests();
    let labels: Vec<Vec<String>> = tests.iter().map(|t| t.sub_test_labels(cfg)).collect::<Result<_>>()?;
    let per_seq: Vec<Vec<Outcome>> = (0..cfg.n_sequences)
        .into_par_iter()
        .map(|i| {
            let bits = stream.unpack_range(i * cfg.sequence_length, cfg.sequence_length);
            tests.iter().map(|&t| run_single_test(t, &bits, cfg)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut summaries = Vec::with_capacity(tests.len());
    for (ti, &test) in tests.iter().enumerate() {
        let width = labels[ti].len();
        let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(cfg.n_sequences); width];
        let mut na = 0;
        for seq in &per_seq {
            match &seq[ti] {
                Outcome::PValues(v) => {
                    if v.len() != width {
                        return Err(Error::Validation(format!(
                            "{test} produced {} p-values, expected {width}",
                            v.len()
                        )));
                    }
                    for (col, &p) in columns.iter_mut().zip(v) {
                        if !(0.0..=1.0).contains(&p) {
                            return Err(Error::Validation(format!("{test} produced p-value {p}")));
                        }
                        col.push(Some(p));
                    }
                }
                Outcome::NotApplicable(_) => {
                    na += 1;
                    columns.iter_mut().for_each(|c| c.push(None));
                }
            }
        }
        let sub_tests = labels[ti]
            .iter()
            .cloned()
            .zip(columns)
            .map(|(l, c)| SubTestSummary::new(l, c, cfg.alpha))
            .collect::<Result<Vec<_>>>()?;
        let verdict = if sub_tests.iter().any(|s| s.verdict == Verdict::Fail) {
            Verdict::Fail
        } else if sub_tests.iter().all(|s| s.verdict == Verdict::Pass) {
            Verdict::Pass
        } else {
            Verdict::NotApplicable
        };
        summaries.push(TestSummary {
            test,
            label: test.label().to_string(),
            sub_tests,
            not_applicable_sequences: na,
            verdict,
        });
    }
    Ok(SuiteReport { source: stream.source().to_string(), config: cfg.clone(), tests: summaries })
}
