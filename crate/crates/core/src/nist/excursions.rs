//! Random excursions and random excursions variant.

use super::special::{erfc, igamc};
use super::Outcome;
use crate::error::Result;

pub const EXCURSION_STATES: [i64; 8] = [-4, -3, -2, -1, 1, 2, 3, 4];
pub const VARIANT_STATES: [i64; 18] = [-9, -8, -7, -6, -5, -4, -3, -2, -1, 1, 2, 3, 4, 5, 6, 7, 8, 9];

/// Minimum number of zero-returning cycles for a sequence of length `n`.
pub fn min_cycles(n: usize) -> f64 {
    (0.005 * (n as f64).sqrt()).max(500.0)
}

/// Partial-sum walk split at returns to zero; each cycle records visits to
/// states in -9..=9.
struct Walk {
    cycles: usize,
    /// visits[c][x + 9] for cycle c
    visits: Vec<[u32; 19]>,
}

fn walk(bits: &[u8]) -> Walk {
    let mut s = 0i64;
    let mut visits = Vec::new();
    let mut cur = [0u32; 19];
    for &b in bits {
        s += if b == 1 { 1 } else { -1 };
        if s == 0 {
            visits.push(cur);
            cur = [0; 19];
        } else if s.abs() <= 9 {
            cur[(s + 9) as usize] += 1;
        }
    }
    // the walk is closed by an implicit final zero
    if s != 0 || bits.is_empty() {
        visits.push(cur);
    }
    Walk { cycles: visits.len(), visits }
}

fn excursion_pi(x: i64) -> [f64; 6] {
    let a = 1.0 / (2.0 * x.unsigned_abs() as f64);
    let q = 1.0 - a;
    let mut pi = [0.0; 6];
    pi[0] = q;
    for (k, p) in pi.iter_mut().enumerate().take(5).skip(1) {
        *p = a * a * q.powi(k as i32 - 1);
    }
    pi[5] = a * q.powi(4);
    pi
}

fn too_few(w: &Walk, n: usize, enforce: bool) -> Option<Outcome> {
    let need = min_cycles(n);
    (enforce && (w.cycles as f64) < need).then(|| Outcome::na(format!("{} cycles, need {}", w.cycles, need.ceil())))
}

/// `enforce_min_cycles` applies the usual cycle-count prerequisite.
pub fn random_excursions(bits: &[u8], enforce_min_cycles: bool) -> Result<Outcome> {
    let w = walk(bits);
    if let Some(na) = too_few(&w, bits.len(), enforce_min_cycles) {
        return Ok(na);
    }
    let j = w.cycles as f64;
    let p = EXCURSION_STATES
        .iter()
        .map(|&x| {
            let mut nu = [0u64; 6];
            for c in &w.visits {
                nu[(c[(x + 9) as usize] as usize).min(5)] += 1;
            }
            let chi2: f64 = nu.iter().zip(excursion_pi(x)).map(|(&v, p)| (v as f64 - j * p).powi(2) / (j * p)).sum();
            igamc(2.5, chi2 / 2.0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome::PValues(p))
}

pub fn random_excursions_variant(bits: &[u8], enforce_min_cycles: bool) -> Result<Outcome> {
    let w = walk(bits);
    if let Some(na) = too_few(&w, bits.len(), enforce_min_cycles) {
        return Ok(na);
    }
    let j = w.cycles as f64;
    let p = VARIANT_STATES
        .iter()
        .map(|&x| {
            let xi: u64 = w.visits.iter().map(|c| u64::from(c[(x + 9) as usize])).sum();
            let den = (2.0 * j * (4.0 * x.unsigned_abs() as f64 - 2.0)).sqrt();
            erfc((xi as f64 - j).abs() / den)
        })
        .collect();
    Ok(Outcome::PValues(p))
}
