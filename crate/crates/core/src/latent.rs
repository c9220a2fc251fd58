//! Latent-code matrices built from random words, and the LATF file format.
//!
//! LATF layout, little-endian: magic `LATF`, u16 version 1, u32 rows,
//! u32 dims (110), rows x dims f32 values row-major, then rows u8 labels.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::{read_exact_or_format, RawBitstream};
use crate::error::{Error, Result};

pub const LATENT_DIMS: usize = 110;
pub const RANDOM_DIMS: usize = 100;
pub const N_CLASSES: u8 = 10;
pub const BITS_PER_ROW: usize = RANDOM_DIMS * 32;
const MAGIC: &[u8; 4] = b"LATF";
const VERSION: u16 = 1;

/// Consecutive 32-bit words, first bit most significant; a partial tail is
/// dropped.
pub fn words_from_bits(stream: &RawBitstream) -> Result<Vec<u32>> {
    if stream.len() < 32 {
        return Err(Error::EmptyOutput(format!("{} bits make no 32-bit word", stream.len())));
    }
    let n = stream.len() / 32;
    Ok(stream.as_bytes()[..n * 4].chunks_exact(4).map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]])).collect())
}

/// Maps a word onto [-1, 1] with both endpoints reachable, correctly
/// rounded to single precision.
pub fn word_to_unit(word: u32) -> f32 {
    let d = u32::MAX;
    let n = 2 * i64::from(word) - i64::from(d);
    let q = n as f64 / f64::from(d);
    let c = q as f32;
    if f64::from(c) == q || !is_f32_midpoint(q) {
        return c;
    }
    // q fell exactly between two f32 values, so the cast broke a tie that the
    // exact quotient does not have; a few words near the endpoints hit this
    let other = if f64::from(c) < q { next_f32_up(c) } else { next_f32_down(c) };
    let (lo, hi) = if c < other { (c, other) } else { (other, c) };
    match cmp_quotient(n, i64::from(d), q) {
        std::cmp::Ordering::Greater => hi,
        _ => lo,
    }
}

fn is_f32_midpoint(q: f64) -> bool {
    // 29 fraction bits are dropped going to f32
    let frac = q.to_bits() & ((1u64 << 52) - 1);
    frac & ((1u64 << 29) - 1) == 1u64 << 28
}

fn next_f32_up(x: f32) -> f32 {
    if x >= 0.0 {
        f32::from_bits(x.to_bits() + 1)
    } else {
        f32::from_bits(x.to_bits() - 1)
    }
}

fn next_f32_down(x: f32) -> f32 {
    -next_f32_up(-x)
}

/// Exact comparison of `n / d` (d > 0) against a normal double `q`.
fn cmp_quotient(n: i64, d: i64, q: f64) -> std::cmp::Ordering {
    let bits = q.to_bits();
    let sign: i128 = if q < 0.0 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i32 - 1075;
    let mant = sign * i128::from((bits & ((1u64 << 52) - 1)) | (1u64 << 52));
    // q = mant * 2^exp with exp < 0 for |q| <= 1; compare n * 2^-exp with mant * d
    (i128::from(n) << (-exp)).cmp(&(mant * i128::from(d)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassEncoding {
    /// 1.0 at the label's slot, 0.0 elsewhere.
    #[default]
    OneHot,
    /// 1.0 at the label's slot, -1.0 elsewhere.
    Signed,
}

impl ClassEncoding {
    fn off(self) -> f32 {
        match self {
            ClassEncoding::OneHot => 0.0,
            ClassEncoding::Signed => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentMatrix {
    rows: usize,
    values: Vec<f32>,
    labels: Vec<u8>,
}

impl LatentMatrix {
    pub fn new(values: Vec<f32>, labels: Vec<u8>) -> Result<Self> {
        let rows = labels.len();
        if values.len() != rows * LATENT_DIMS {
            return Err(Error::Validation(format!("{} values for {rows} rows of {LATENT_DIMS}", values.len())));
        }
        let m = LatentMatrix { rows, values, labels };
        m.validate()?;
        Ok(m)
    }

    /// Checks value ranges and that class dims are a one-hot or signed
    /// encoding of the label.
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.values.chunks_exact(LATENT_DIMS).enumerate() {
            let label = self.labels[i];
            if !(1..=N_CLASSES).contains(&label) {
                return Err(Error::Validation(format!("row {i}: label {label} outside 1..=10")));
            }
            if let Some(v) = row[..RANDOM_DIMS].iter().find(|v| !(-1.0..=1.0).contains(*v)) {
                return Err(Error::Validation(format!("row {i}: value {v} outside [-1, 1]")));
            }
            let class = &row[RANDOM_DIMS..];
            let hot = usize::from(label) - 1;
            let off = class.iter().enumerate().find(|&(k, _)| k != hot).map(|(_, &v)| v).unwrap_or(0.0);
            let consistent = (off == 0.0 || off == -1.0)
                && class[hot] == 1.0
                && class.iter().enumerate().all(|(k, &v)| k == hot || v == off);
            if !consistent {
                return Err(Error::Validation(format!("row {i}: class dims do not encode label {label}")));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        LATENT_DIMS
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * LATENT_DIMS..(i + 1) * LATENT_DIMS]
    }

    pub fn write_latent<W: Write>(&self, mut w: W) -> Result<()> {
        let rows = u32::try_from(self.rows).map_err(|_| Error::Validation("too many rows for LATF".into()))?;
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&rows.to_le_bytes())?;
        w.write_all(&(LATENT_DIMS as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.values.len() * 4);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        w.write_all(&self.labels)?;
        Ok(())
    }

    pub fn read_latent<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 14];
        read_exact_or_format(&mut r, &mut header, "LATF header")?;
        if &header[..4] != MAGIC {
            return Err(Error::Format(format!("bad magic {:?}, expected \"LATF\"", &header[..4])));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported LATF version {version}")));
        }
        let rows = u32::from_le_bytes(header[6..10].try_into().expect("4 bytes")) as usize;
        let dims = u32::from_le_bytes(header[10..14].try_into().expect("4 bytes")) as usize;
        if dims != LATENT_DIMS {
            return Err(Error::Format(format!("dims {dims}, expected {LATENT_DIMS}")));
        }
        // grow with the data so a corrupt row count cannot force a huge allocation
        let want = rows as u64 * dims as u64 * 4;
        let mut payload = Vec::new();
        r.by_ref().take(want).read_to_end(&mut payload)?;
        if (payload.len() as u64) < want {
            return Err(Error::Format(format!(
                "truncated LATF values: missing {} of {want} bytes",
                want - payload.len() as u64
            )));
        }
        let mut labels = vec![0u8; rows];
        read_exact_or_format(&mut r, &mut labels, "LATF labels")?;
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after LATF labels".into()));
        }
        let values = payload.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        LatentMatrix::new(values, labels).map_err(|e| Error::Format(format!("invalid LATF contents: {e}")))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::new();
        self.write_latent(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_latent(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

pub fn build_latent_matrix(stream: &RawBitstream, n_images: usize, labels: &[u8]) -> Result<LatentMatrix> {
    build_latent_matrix_with(stream, n_images, labels, ClassEncoding::OneHot)
}

/// Row `i` takes words `100 i .. 100 i + 99` for its random dims.
pub fn build_latent_matrix_with(
    stream: &RawBitstream,
    n_images: usize,
    labels: &[u8],
    encoding: ClassEncoding,
) -> Result<LatentMatrix> {
    if labels.len() != n_images {
        return Err(Error::Validation(format!("{} labels for {n_images} images", labels.len())));
    }
    if let Some(l) = labels.iter().find(|l| !(1..=N_CLASSES).contains(*l)) {
        return Err(Error::Validation(format!("label {l} outside 1..=10")));
    }
    let needed = (BITS_PER_ROW * n_images) as u64;
    if (stream.len() as u64) < needed {
        return Err(Error::InsufficientBits { needed, available: stream.len() as u64 });
    }
    let mut values = Vec::with_capacity(n_images * LATENT_DIMS);
    for (i, &label) in labels.iter().enumerate() {
        let bytes = &stream.as_bytes()[i * BITS_PER_ROW / 8..(i + 1) * BITS_PER_ROW / 8];
        values.extend(bytes.chunks_exact(4).map(|c| word_to_unit(u32::from_be_bytes([c[0], c[1], c[2], c[3]]))));
        let hot = usize::from(label) - 1;
        values.extend((0..usize::from(N_CLASSES)).map(|k| if k == hot { 1.0 } else { encoding.off() }));
    }
    LatentMatrix::new(values, labels.to_vec())
}

/// Labels 1..=10 repeated in order.
pub fn cyclic_labels(n: usize) -> Vec<u8> {
    (0..n).map(|i| (i % usize::from(N_CLASSES)) as u8 + 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Source;
    use proptest::prelude::*;

    fn zeros(n: usize) -> RawBitstream {
        RawBitstream::from_bits(std::iter::repeat_n(false, n), Source::External, 1, 0)
    }

    #[test]
    fn words_msb_first() {
        assert_eq!(words_from_bits(&zeros(32)).unwrap(), vec![0]);
        let mut s = RawBitstream::from_bits([true], Source::External, 1, 0);
        s.extend(std::iter::repeat_n(false, 31 + 20));
        assert_eq!(words_from_bits(&s).unwrap(), vec![2_147_483_648]);
        assert!(matches!(words_from_bits(&zeros(31)), Err(Error::EmptyOutput(_))));
    }

    #[test]
    fn unit_map_values() {
        assert_eq!(word_to_unit(0), -1.0);
        assert_eq!(word_to_unit(u32::MAX), 1.0);
        let mid = (2.0 * 2_147_483_648.0 - 4_294_967_295.0) / 4_294_967_295.0;
        assert_eq!(mid, 1.0 / 4_294_967_295.0);
        assert_eq!(word_to_unit(1 << 31), mid as f32);
    }

    #[test]
    fn midpoint_words_round_exactly() {
        // exact rational rounding, tests/oracles/make_data.py
        assert_eq!(word_to_unit(64), -0.999_999_94);
        assert_eq!(word_to_unit(320), -0.999_999_8);
        assert_eq!(word_to_unit(4_294_966_975), 0.999_999_8);
        assert_eq!(word_to_unit(4_294_967_231), 0.999_999_94);
        assert_eq!(word_to_unit(192), (-4_294_966_911.0f64 / 4_294_967_295.0) as f32);
    }

    #[test]
    #[ignore = "walks all 2^32 words"]
    fn symmetric_over_all_words() {
        for w in 0..=u32::MAX {
            assert_eq!(word_to_unit(w), -word_to_unit(u32::MAX - w), "word {w}");
        }
    }

    #[test]
    fn zero_stream_row() {
        let m = build_latent_matrix(&zeros(3200), 1, &[1]).unwrap();
        let row = m.row(0);
        assert!(row[..100].iter().all(|&v| v == -1.0));
        assert_eq!(row[100], 1.0);
        assert!(row[101..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn budget_errors() {
        assert!(matches!(
            build_latent_matrix(&zeros(3199), 1, &[1]),
            Err(Error::InsufficientBits { needed: 3200, available: 3199 })
        ));
        assert!(matches!(build_latent_matrix(&zeros(3200), 1, &[0]), Err(Error::Validation(_))));
        assert!(matches!(build_latent_matrix(&zeros(3200), 1, &[11]), Err(Error::Validation(_))));
        assert!(matches!(build_latent_matrix(&zeros(6400), 2, &[1]), Err(Error::Validation(_))));
    }

    #[test]
    fn signed_encoding() {
        let m = build_latent_matrix_with(&zeros(3200), 1, &[10], ClassEncoding::Signed).unwrap();
        assert_eq!(m.row(0)[109], 1.0);
        assert!(m.row(0)[100..109].iter().all(|&v| v == -1.0));
    }

    #[test]
    fn round_trip_and_truncation() {
        let s = crate::prng::xoroshiro128p_stream(&mut crate::prng::Xoroshiro128Plus::from_seed(5), 3200 * 4, 5);
        let m = build_latent_matrix(&s, 4, &[1, 5, 10, 2]).unwrap();
        let mut buf = Vec::new();
        m.write_latent(&mut buf).unwrap();
        assert_eq!(buf.len(), 14 + 4 * 110 * 4 + 4);
        assert_eq!(LatentMatrix::read_latent(&buf[..]).unwrap(), m);
        let err = LatentMatrix::read_latent(&buf[..buf.len() - 3]).unwrap_err();
        assert!(matches!(err, Error::Format(ref msg) if msg.contains("missing 3")), "{err}");
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(LatentMatrix::read_latent(&bad[..]), Err(Error::Format(_))));
        let mut bad = buf.clone();
        bad[4] = 2;
        assert!(matches!(LatentMatrix::read_latent(&bad[..]), Err(Error::Format(_))));
        let mut bad = buf.clone();
        *bad.last_mut().unwrap() = 0;
        assert!(matches!(LatentMatrix::read_latent(&bad[..]), Err(Error::Format(_))));
    }

    proptest! {
        #[test]
        fn unit_map_monotone(a in any::<u32>(), b in any::<u32>()) {
            let max = f64::from(u32::MAX);
            let x = |w: u32| (2.0 * f64::from(w) - max) / max;
            prop_assume!(a < b);
            prop_assert!(x(a) < x(b));
            prop_assert!(word_to_unit(a) <= word_to_unit(b));
            prop_assert!((-1.0..=1.0).contains(&word_to_unit(a)));
        }
    }
}
