//! FFT Toeplitz hashing against a direct matrix-vector product over GF(2).

use mtj_trng::conditioning::{toeplitz_extract, xor3, xor3_grouped, ToeplitzConfig, ToeplitzExtractor, XorGrouping};
use mtj_trng::{RawBitstream, Source};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `y[i] = XOR_j T[i][j] x[j]` with `T[i][j] = seed[i - j + n - 1]`.
fn naive(seed: &[u8], x: &[u8], m: usize) -> Vec<u8> {
    let n = x.len();
    (0..m).map(|i| (0..n).fold(0u8, |acc, j| acc ^ (seed[i + n - 1 - j] & x[j]))).collect()
}

fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

#[test]
fn exhaustive_small_blocks() {
    let (n, m) = (6, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let seed = random_bits(&mut rng, n + m - 1);
        let ext = ToeplitzExtractor::new(ToeplitzConfig::new(n, m, seed.clone()).unwrap()).unwrap();
        for word in 0u32..64 {
            let x: Vec<u8> = (0..n).map(|j| ((word >> (n - 1 - j)) & 1) as u8).collect();
            assert_eq!(ext.hash_block(&x).unwrap(), naive(&seed, &x, m), "word {word:06b}");
        }
    }
}

#[test]
fn medium_blocks_many_pairs() {
    let (n, m) = (64, 32);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let seed = random_bits(&mut rng, n + m - 1);
        let cfg = ToeplitzConfig::new(n, m, seed.clone()).unwrap();
        // 100 blocks per seed, an odd count so the unpaired tail path runs too
        let x = random_bits(&mut rng, 101 * n);
        let stream = RawBitstream::from_bits(x.iter().map(|&b| b == 1), Source::External, 1, 0);
        let got = toeplitz_extract(&stream, &cfg).unwrap().unpack();
        let want: Vec<u8> = x.chunks_exact(n).flat_map(|blk| naive(&seed, blk, m)).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn trailing_partial_block_is_dropped() {
    let cfg = ToeplitzConfig::new(8, 4, vec![1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1]).unwrap();
    let s = RawBitstream::from_bits((0..8 * 3 + 5).map(|k| k % 3 == 1), Source::External, 1, 0);
    assert_eq!(toeplitz_extract(&s, &cfg).unwrap().len(), 12);
    let short = RawBitstream::from_bits((0..7).map(|_| true), Source::External, 1, 0);
    assert!(toeplitz_extract(&short, &cfg).is_err());
}

#[test]
fn config_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = ToeplitzConfig::new(20, 9, random_bits(&mut rng, 28)).unwrap();
    let back = ToeplitzConfig::from_json(&cfg.to_json().unwrap()).unwrap();
    assert_eq!(back, cfg);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hash_is_linear(seed in any::<u64>(), n in 2usize..200, frac in 0.1f64..1.0) {
        let m = ((n as f64 * frac) as usize).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ext = ToeplitzExtractor::new(ToeplitzConfig::new(n, m, random_bits(&mut rng, n + m - 1)).unwrap()).unwrap();
        let a = random_bits(&mut rng, n);
        let b = random_bits(&mut rng, n);
        let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let ha = ext.hash_block(&a).unwrap();
        let hb = ext.hash_block(&b).unwrap();
        let sum: Vec<u8> = ha.iter().zip(&hb).map(|(x, y)| x ^ y).collect();
        prop_assert_eq!(ext.hash_block(&ab).unwrap(), sum);
        prop_assert!(ext.hash_block(&vec![0; n]).unwrap().iter().all(|&v| v == 0));
    }

    #[test]
    fn xor3_matches_direct_parity(bits in proptest::collection::vec(0u8..2, 3..400), s in 1usize..9) {
        let stream = RawBitstream::from_bits(bits.iter().map(|&b| b == 1), Source::External, 1, 0);
        let t: Vec<u8> = bits.chunks_exact(3).map(|c| c[0] ^ c[1] ^ c[2]).collect();
        prop_assert_eq!(xor3(&stream).unwrap().unpack(), t);
        if bits.len() >= 3 * s {
            let g: Vec<u8> = bits
                .chunks_exact(3 * s)
                .flat_map(|w| (0..s).map(move |j| w[j] ^ w[j + s] ^ w[j + 2 * s]))
                .collect();
            prop_assert_eq!(xor3_grouped(&stream, XorGrouping::Stride(s)).unwrap().unpack(), g);
        }
    }
}
