//! Deterministic synthetic feature pairs at a chosen squared distance.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::protocol::{compute_distance, BiometricVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetDistance {
    Exact(u64),
    /// Uniform in `[0, N·(2^m − 1)²]`.
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthPair {
    pub f0: BiometricVector,
    pub f1: BiometricVector,
    /// Exact `compute_distance(f0, f1)`.
    pub distance: u64,
}

fn isqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// Bounded sums of squares for a handful of slots, memoized.
struct Squares {
    max: u64,
    memo: HashMap<(u64, usize), Option<Vec<u64>>>,
    /// Remaining search nodes; exhaustion reports no split.
    budget: u64,
}

impl Squares {
    fn new(max: u64) -> Self {
        Squares { max, memo: HashMap::new(), budget: 4_000_000 }
    }
}

impl Squares {
    /// `k` roots, each `≤ max`, with `Σ a_i² = r`.
    fn split(&mut self, r: u64, k: usize) -> Option<Vec<u64>> {
        if k == 0 {
            return (r == 0).then(Vec::new);
        }
        if r > k as u64 * self.max * self.max {
            return None;
        }
        if let Some(hit) = self.memo.get(&(r, k)) {
            return hit.clone();
        }
        if self.budget == 0 {
            return None;
        }
        self.budget -= 1;
        let mut found = None;
        let top = self.max.min(isqrt(r));
        // the other k − 1 roots hold at most (k − 1)·max²
        let rest_cap = (k as u64 - 1) * self.max * self.max;
        let floor = r.saturating_sub(rest_cap);
        for a in (0..=top).rev() {
            if a * a < floor {
                break;
            }
            // some root of any solution is at least sqrt(r / k)
            if a * a * (k as u64) < r {
                break;
            }
            if let Some(mut rest) = self.split(r - a * a, k - 1) {
                rest.insert(0, a);
                found = Some(rest);
                break;
            }
        }
        self.memo.insert((r, k), found.clone());
        found
    }
}

/// How the slots before the exhaustive tail pick their root.
#[derive(Clone, Copy)]
enum Strategy {
    /// Largest root first; spends the target quickly.
    High,
    /// Root near `sqrt(rem / slots)`.
    Balanced,
}

/// Targets just under the ceiling: all slots at `max` except the fewest
/// that can absorb the shortfall, found by exhaustive split.
fn top_differences(target: u64, n: usize, max: u64) -> Option<Vec<u64>> {
    let mut sq = Squares::new(max);
    let full = max * max;
    for k in 1..=n {
        let rest = target.checked_sub((n - k) as u64 * full)?;
        if let Some(mut out) = sq.split(rest, k) {
            out.resize(n, max);
            return Some(out);
        }
        if sq.budget == 0 {
            return None;
        }
    }
    None
}

/// Per-index absolute differences with `Σ a_i² = target`, each `≤ max`.
fn differences(target: u64, n: usize, max: u64, strategy: Strategy) -> Option<Vec<u64>> {
    const TAIL: usize = 4;
    let mut sq = Squares::new(max);
    let mut out = Vec::with_capacity(n);
    let mut rem = target;
    while n - out.len() > TAIL {
        let slots = (n - out.len()) as u64;
        let left = n - out.len() - 1;
        let cap = left as u64 * max * max;
        let mut a = match strategy {
            Strategy::High => max.min(isqrt(rem)),
            Strategy::Balanced => max.min(isqrt(rem.div_ceil(slots))),
        };
        // leave a remainder the other slots can still absorb
        while rem - a * a > cap && a < max.min(isqrt(rem)) {
            a += 1;
        }
        if rem - a * a > cap {
            return None;
        }
        if left == TAIL {
            while sq.split(rem - a * a, TAIL).is_none() {
                if a == 0 || rem - (a - 1) * (a - 1) > cap {
                    return None;
                }
                a -= 1;
            }
        }
        out.push(a);
        rem -= a * a;
    }
    out.extend(sq.split(rem, n - out.len())?);
    Some(out)
}

/// Two `n`-entry `bits`-bit vectors at squared distance `target`.
pub fn synth_features(seed: u64, n: usize, bits: u32, target: TargetDistance) -> Result<SynthPair> {
    if n == 0 {
        return Err(Error::EmptyVector);
    }
    if bits == 0 || bits > crate::protocol::MAX_FEATURE_BITS {
        return Err(Error::InvalidFeatureWidth(bits));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let max = (1u64 << bits) - 1;
    let ceiling = n as u64 * max * max;
    let target = match target {
        TargetDistance::Exact(t) => t,
        TargetDistance::Random => rng.gen_range(0..=ceiling),
    };
    let unachievable = Error::UnachievableDistance { target, len: n, bits };
    if target > ceiling {
        return Err(unachievable);
    }
    let mut diffs = differences(target, n, max, Strategy::High)
        .or_else(|| differences(target, n, max, Strategy::Balanced))
        .or_else(|| top_differences(target, n, max))
        .ok_or(unachievable)?;
    diffs.shuffle(&mut rng);

    let mut f0 = Vec::with_capacity(n);
    let mut f1 = Vec::with_capacity(n);
    for a in diffs {
        let lo = rng.gen_range(0..=max - a);
        let (x, y) = if rng.gen::<bool>() { (lo, lo + a) } else { (lo + a, lo) };
        f0.push(x);
        f1.push(y);
    }
    let f0 = BiometricVector::new(f0, bits)?;
    let f1 = BiometricVector::new(f1, bits)?;
    let distance = compute_distance(&f0, &f1)?;
    debug_assert_eq!(distance, target);
    Ok(SynthPair { f0, f1, distance })
}
