//! Water distribution inside one basic partition (a cell and up to six
//! neighbors).
//!
//! The partition's water drains to its lowest cells: with cells sorted by
//! terrain height `h_1 <= ... <= h_n` and `W` the total depth, `k` is the
//! largest index with `W >= sum_{i<=k} (h_k - h_i)`, the common surface is
//! `H = (W + sum_{i<=k} h_i) / k`, and the new depths are `H - h_i` for
//! `i <= k` and zero above.

use crate::error::{Error, Result};

/// Largest partition: a center plus six neighbors.
pub const MAX_PARTITION: usize = 7;

/// Result of redistributing one partition.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOutcome {
    /// New depths in the caller's cell order.
    pub depths: Vec<f64>,
    /// Equilibrium water surface `H`.
    pub level: f64,
    /// Number of cells left wet (`k`).
    pub wet: usize,
}

/// Redistributes `depths` over cells with terrain `heights`.
pub fn distribute_partition(heights: &[f64], depths: &[f64]) -> Result<PartitionOutcome> {
    let n = heights.len();
    if n == 0 || n > MAX_PARTITION {
        return Err(Error::invalid(format!(
            "partition must have 1..={MAX_PARTITION} cells, got {n}"
        )));
    }
    if depths.len() != n {
        return Err(Error::invalid(format!(
            "{n} heights but {} depths",
            depths.len()
        )));
    }
    if let Some(h) = heights.iter().find(|h| !h.is_finite()) {
        return Err(Error::invalid(format!("non-finite terrain height {h}")));
    }
    if let Some(d) = depths.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(Error::invalid(format!(
            "depth must be finite and >= 0, got {d}"
        )));
    }
    let mut out = depths.to_vec();
    let (level, wet) = distribute_in_place(heights, &mut out);
    Ok(PartitionOutcome {
        depths: out,
        level,
        wet,
    })
}

/// Unchecked core of [`distribute_partition`]; returns `(H, k)`.
///
/// Callers guarantee `1 <= n <= 7`, finite heights and non-negative depths.
pub(crate) fn distribute_in_place(heights: &[f64], depths: &mut [f64]) -> (f64, usize) {
    let n = heights.len();
    debug_assert!((1..=MAX_PARTITION).contains(&n) && depths.len() == n);

    // Stable insertion sort of indices by height; ties keep input order.
    let mut order = [0usize; MAX_PARTITION];
    for i in 0..n {
        let mut j = i;
        while j > 0 && heights[order[j - 1]] > heights[i] {
            order[j] = order[j - 1];
            j -= 1;
        }
        order[j] = i;
    }
    let sorted = |i: usize| heights[order[i]];

    let water: f64 = depths.iter().sum();

    // need(k) = sum_{i<k} (h_k - h_i) is non-decreasing in k.
    let need = |k: usize| -> f64 {
        let hk = sorted(k);
        (0..k).map(|i| hk - sorted(i)).sum()
    };
    let mut k = 0;
    let mut need_k = 0.0;
    while k + 1 < n {
        let next = need(k + 1);
        if next > water {
            break;
        }
        k += 1;
        need_k = next;
    }
    let wet = k + 1;
    // H = h_k + excess with excess >= 0, which keeps every wet depth >= 0
    // without cancelling large absolute heights.
    let top = sorted(k);
    let excess = ((water - need_k) / wet as f64).max(0.0);

    for d in depths.iter_mut() {
        *d = 0.0;
    }
    for &idx in &order[..wet] {
        depths[idx] = (top - heights[idx]) + excess;
    }
    // Fold the rounding residual into the lowest cell so the call conserves
    // water to the last bit where possible.
    let residual = water - depths.iter().sum::<f64>();
    let lowest = order[0];
    depths[lowest] = (depths[lowest] + residual).max(0.0);

    (top + excess, wet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Level `l` with `sum max(0, l - h_i) = water`, by bisection.
    fn water_filling_level(heights: &[f64], water: f64) -> f64 {
        let lo0 = heights.iter().cloned().fold(f64::INFINITY, f64::min);
        let filled = |l: f64| heights.iter().map(|h| (l - h).max(0.0)).sum::<f64>();
        let (mut lo, mut hi) = (
            lo0,
            heights.iter().cloned().fold(lo0, f64::max) + water + 1.0,
        );
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if filled(mid) < water {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn dry_partition_stays_dry() {
        let out = distribute_partition(&[3.0, 1.0, 2.0], &[0.0; 3]).unwrap();
        assert_eq!(out.depths, vec![0.0; 3]);
        assert_eq!(out.wet, 1);
        assert_eq!(out.level, 1.0);
    }

    #[test]
    fn flat_partition_splits_evenly() {
        let out = distribute_partition(&[10.0; 7], &[0.7, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_close(&out.depths, &[0.1; 7], 1e-15);
        assert!((out.level - 10.1).abs() < 1e-12);
        assert_eq!(out.wet, 7);
    }

    #[test]
    fn two_wet_cells() {
        let heights = [0.0, 1.0, 5.0, 5.0, 5.0, 5.0, 5.0];
        let out = distribute_partition(&heights, &[3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((water_filling_level(&heights, 3.0) - 2.0).abs() < 1e-12);
        assert_eq!(out.wet, 2);
        assert_eq!(out.level, 2.0);
        assert_close(&out.depths, &[2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn pit_with_uniform_water() {
        let heights = [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let out = distribute_partition(&heights, &[0.5; 7]).unwrap();
        let oracle = water_filling_level(&heights, 3.5);
        assert!((oracle - 9.5 / 7.0).abs() < 1e-12);
        assert_eq!(out.wet, 7);
        assert!((out.level - 1.357_142_857_142_857).abs() < 1e-12);
        assert!((out.depths[0] - 1.357_142_857).abs() < 1e-9);
        for d in &out.depths[1..] {
            assert!((d - 0.357_142_857).abs() < 1e-9);
        }
    }

    #[test]
    fn result_maps_back_to_input_positions() {
        let out = distribute_partition(&[5.0, 0.0, 1.0], &[0.0, 0.0, 3.0]).unwrap();
        assert_close(&out.depths, &[0.0, 2.0, 1.0], 1e-15);
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(distribute_partition(&[], &[]).is_err());
        assert!(distribute_partition(&[0.0; 8], &[0.0; 8]).is_err());
        assert!(distribute_partition(&[0.0, 1.0], &[0.0]).is_err());
        assert!(distribute_partition(&[0.0], &[-1e-3]).is_err());
        assert!(distribute_partition(&[f64::NAN], &[0.0]).is_err());
        assert!(distribute_partition(&[0.0], &[f64::INFINITY]).is_err());
    }

    fn partition() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..=7).prop_flat_map(|n| {
            (
                proptest::collection::vec(0.0f64..100.0, n),
                proptest::collection::vec(0.0f64..10.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn matches_water_filling((h, d) in partition()) {
            let out = distribute_partition(&h, &d).unwrap();
            let w: f64 = d.iter().sum();
            prop_assert!((out.depths.iter().sum::<f64>() - w).abs() <= 1e-12);
            prop_assert!((out.level - water_filling_level(&h, w)).abs() <= 1e-9);
            let filled: f64 = h.iter().map(|hi| (out.level - hi).max(0.0)).sum();
            prop_assert!((filled - w).abs() <= 1e-9);
            for (hi, di) in h.iter().zip(&out.depths) {
                prop_assert!(*di >= 0.0);
                prop_assert!((di - (out.level - hi).max(0.0)).abs() <= 1e-9);
            }
        }

        #[test]
        fn wet_count_is_feasible((h, d) in partition()) {
            let out = distribute_partition(&h, &d).unwrap();
            let mut sorted = h.clone();
            sorted.sort_by(f64::total_cmp);
            prop_assert!(out.level >= sorted[out.wet - 1]);
            if out.wet < h.len() {
                prop_assert!(out.level <= sorted[out.wet] + 1e-12);
            }
        }

        #[test]
        fn permutation_invariant((h, d) in partition(), rot in 0usize..7) {
            let n = h.len();
            let r = rot % n;
            let hr: Vec<f64> = (0..n).map(|i| h[(i + r) % n]).collect();
            let dr: Vec<f64> = (0..n).map(|i| d[(i + r) % n]).collect();
            let a = distribute_partition(&h, &d).unwrap().depths;
            let b = distribute_partition(&hr, &dr).unwrap().depths;
            for i in 0..n {
                prop_assert!((a[(i + r) % n] - b[i]).abs() <= 1e-12);
            }
        }

        #[test]
        fn idempotent((h, d) in partition()) {
            let once = distribute_partition(&h, &d).unwrap().depths;
            let twice = distribute_partition(&h, &once).unwrap().depths;
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
