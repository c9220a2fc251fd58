//! Packed bit sequences and the `MTJB` container format.
//!
//! Bit `k` lives in byte `k >> 3` at position `7 - (k & 7)` (MSB-first).
//! Multi-device streams are cycle-major: cycle 0 devices `0..N`, then
//! cycle 1, and so on.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "MTJB"
//! 4       2     version (= 1)
//! 6       1     source tag
//! 7       1     device count
//! 8       8     n_bits
//! 16      8     master seed
//! 24      ...   packed payload, ceil(n_bits / 8) bytes
//! ```
//! All integers little-endian.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MTJB_MAGIC: &[u8; 4] = b"MTJB";
pub const MTJB_VERSION: u16 = 1;
const HEADER_LEN: usize = 24;

/// Where a bitstream came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    MtjRaw,
    MtjXor3,
    MtjToeplitz,
    Lfsr32,
    Xoroshiro128p,
    External,
}

impl Source {
    pub const ALL: [Source; 6] =
        [Source::MtjRaw, Source::MtjXor3, Source::MtjToeplitz, Source::Lfsr32, Source::Xoroshiro128p, Source::External];

    pub fn tag(self) -> u8 {
        match self {
            Source::MtjRaw => 0,
            Source::MtjXor3 => 1,
            Source::MtjToeplitz => 2,
            Source::Lfsr32 => 3,
            Source::Xoroshiro128p => 4,
            Source::External => 5,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Source> {
        Source::ALL.into_iter().find(|s| s.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            Source::MtjRaw => "mtj-raw",
            Source::MtjXor3 => "mtj-xor3",
            Source::MtjToeplitz => "mtj-toeplitz",
            Source::Lfsr32 => "lfsr32",
            Source::Xoroshiro128p => "xoroshiro128p",
            Source::External => "external",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Source::ALL
            .into_iter()
            .find(|src| src.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown source tag {s:?}")))
    }
}

/// A packed binary sequence with provenance metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawBitstream {
    bytes: Vec<u8>,
    n_bits: usize,
    source: Source,
    n_devices: u8,
    master_seed: u64,
}

impl RawBitstream {
    pub fn new(source: Source, n_devices: u8, master_seed: u64) -> Self {
        Self::with_capacity(0, source, n_devices, master_seed)
    }

    pub fn with_capacity(bits: usize, source: Source, n_devices: u8, master_seed: u64) -> Self {
        RawBitstream { bytes: Vec::with_capacity(bits.div_ceil(8)), n_bits: 0, source, n_devices, master_seed }
    }

    /// Wraps an already packed payload. Pad bits past `n_bits` must be zero.
    pub fn from_packed(bytes: Vec<u8>, n_bits: usize, source: Source, n_devices: u8, master_seed: u64) -> Result<Self> {
        if bytes.len() != n_bits.div_ceil(8) {
            return Err(Error::Format(format!("payload of {} bytes does not hold exactly {n_bits} bits", bytes.len())));
        }
        let pad = bytes.len() * 8 - n_bits;
        if pad > 0 {
            let last = bytes[bytes.len() - 1];
            if last & ((1u8 << pad) - 1) != 0 {
                return Err(Error::Format("nonzero pad bits after payload".into()));
            }
        }
        Ok(RawBitstream { bytes, n_bits, source, n_devices, master_seed })
    }

    pub fn from_bits<I>(bits: I, source: Source, n_devices: u8, master_seed: u64) -> Self
    where
        I: IntoIterator<Item = bool>,
    {
        let mut out = Self::new(source, n_devices, master_seed);
        out.extend(bits);
        out
    }

    /// Parses a string of `'0'`/`'1'` characters; other characters are skipped.
    pub fn from_ascii(s: &str, source: Source) -> Self {
        Self::from_bits(
            s.chars().filter_map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            }),
            source,
            1,
            0,
        )
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let k = self.n_bits;
        if k & 7 == 0 {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[k >> 3] |= 0x80 >> (k & 7);
        }
        self.n_bits += 1;
    }

    /// Appends a whole byte; only valid on a byte boundary.
    #[inline]
    pub fn push_byte(&mut self, byte: u8) {
        if self.n_bits & 7 == 0 {
            self.bytes.push(byte);
            self.n_bits += 8;
        } else {
            for i in 0..8 {
                self.push(byte & (0x80 >> i) != 0);
            }
        }
    }

    /// Appends the low `width` bits of `word`, most significant first.
    pub fn push_word(&mut self, word: u64, width: u32) {
        for i in (0..width).rev() {
            self.push((word >> i) & 1 == 1);
        }
    }

    #[inline]
    pub fn get(&self, k: usize) -> bool {
        assert!(k < self.n_bits, "bit index {k} out of range {}", self.n_bits);
        self.bytes[k >> 3] & (0x80 >> (k & 7)) != 0
    }

    pub fn len(&self) -> usize {
        self.n_bits
    }

    pub fn is_empty(&self) -> bool {
        self.n_bits == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn n_devices(&self) -> u8 {
        self.n_devices
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Interleave order; only cycle-major is defined.
    pub fn interleave(&self) -> &'static str {
        "cycle-major"
    }

    /// Number of acquisition cycles the stream spans, `ceil(n_bits / n_devices)`.
    pub fn cycles(&self) -> u64 {
        (self.n_bits as u64).div_ceil(u64::from(self.n_devices.max(1)))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n_bits).map(move |k| self.get(k))
    }

    /// Unpacks `len` bits starting at `start` into one byte (0 or 1) per bit.
    pub fn unpack_range(&self, start: usize, len: usize) -> Vec<u8> {
        assert!(start + len <= self.n_bits);
        let mut out = Vec::with_capacity(len);
        let mut k = start;
        // leading partial byte
        while k < start + len && k & 7 != 0 {
            out.push(u8::from(self.get(k)));
            k += 1;
        }
        while k + 8 <= start + len {
            let b = self.bytes[k >> 3];
            for i in (0..8).rev() {
                out.push((b >> i) & 1);
            }
            k += 8;
        }
        while k < start + len {
            out.push(u8::from(self.get(k)));
            k += 1;
        }
        out
    }

    pub fn unpack(&self) -> Vec<u8> {
        self.unpack_range(0, self.n_bits)
    }

    /// A copy of bits `start..start + len` carrying this stream's metadata.
    pub fn slice(&self, start: usize, len: usize) -> RawBitstream {
        let mut out = RawBitstream::with_capacity(len, self.source, self.n_devices, self.master_seed);
        if start & 7 == 0 {
            let full = len / 8;
            out.bytes.extend_from_slice(&self.bytes[start / 8..start / 8 + full]);
            out.n_bits = full * 8;
            for k in start + full * 8..start + len {
                out.push(self.get(k));
            }
        } else {
            out.extend((start..start + len).map(|k| self.get(k)));
        }
        out
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    pub fn write_mtjb<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = [0u8; HEADER_LEN];
        header[0..4].copy_from_slice(MTJB_MAGIC);
        header[4..6].copy_from_slice(&MTJB_VERSION.to_le_bytes());
        header[6] = self.source.tag();
        header[7] = self.n_devices;
        header[8..16].copy_from_slice(&(self.n_bits as u64).to_le_bytes());
        header[16..24].copy_from_slice(&self.master_seed.to_le_bytes());
        w.write_all(&header)?;
        w.write_all(&self.bytes)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_mtjb<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        read_exact_or_format(&mut r, &mut header, "MTJB header")?;
        if &header[0..4] != MTJB_MAGIC {
            return Err(Error::Format(format!("bad magic {:?}, expected \"MTJB\"", &header[0..4])));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != MTJB_VERSION {
            return Err(Error::Format(format!("unsupported MTJB version {version}")));
        }
        let source =
            Source::from_tag(header[6]).ok_or_else(|| Error::Format(format!("unknown source tag {}", header[6])))?;
        let n_devices = header[7];
        let n_bits = u64::from_le_bytes(header[8..16].try_into().unwrap());
        let master_seed = u64::from_le_bytes(header[16..24].try_into().unwrap());
        let n_bits = usize::try_from(n_bits).map_err(|_| Error::Format(format!("n_bits {n_bits} too large")))?;
        // grow with the data so a corrupt header cannot force a huge allocation
        let want = n_bits.div_ceil(8);
        let mut payload = Vec::new();
        r.by_ref().take(want as u64).read_to_end(&mut payload)?;
        if payload.len() < want {
            return Err(Error::Format(format!(
                "truncated MTJB payload: missing {} of {want} bytes",
                want - payload.len()
            )));
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after MTJB payload".into()));
        }
        Self::from_packed(payload, n_bits, source, n_devices, master_seed)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = File::create(path.as_ref())?;
        self.write_mtjb(BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = File::open(path.as_ref())?;
        Self::read_mtjb(BufReader::new(f))
    }
}

impl Extend<bool> for RawBitstream {
    fn extend<I: IntoIterator<Item = bool>>(&mut self, iter: I) {
        for b in iter {
            self.push(b);
        }
    }
}

/// Like `read_exact`, but a short read becomes a format error naming how
/// many bytes are missing.
pub(crate) fn read_exact_or_format<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => {
                return Err(Error::Format(format!(
                    "truncated {what}: missing {} of {} bytes",
                    buf.len() - filled,
                    buf.len()
                )))
            }
            Ok(k) => filled += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}
