//! Integer fast paths for pairwise counting.
//!
//! Sets whose elements share a small common denominator are rescaled to
//! machine integers; pair results are then tallied in a dense array when the
//! key range is compact, or by sorting otherwise.

use num_integer::Integer;
use rustc_hash::FxHashMap;

use crate::rational::Rational;
use crate::set::Op;

const MAX_SCALE: i64 = 1 << 20;
const DENSE_RANGE_LIMIT: i64 = 1 << 24;

/// Both operands rescaled by a common denominator: value = key / scale.
pub(crate) struct Scaled {
    pub left: Vec<i64>,
    pub right: Vec<i64>,
    pub scale: i64,
}

pub(crate) fn rescale(left: &[Rational], right: &[Rational], bound: i64) -> Option<Scaled> {
    let mut scale: i64 = 1;
    for x in left.iter().chain(right) {
        let (_, d) = x.as_small()?;
        scale = scale.lcm(&d);
        if scale > MAX_SCALE {
            return None;
        }
    }
    let conv = |xs: &[Rational]| -> Option<Vec<i64>> {
        xs.iter()
            .map(|x| {
                let (n, d) = x.as_small()?;
                let k = (n as i128) * (scale / d) as i128;
                (k.abs() <= bound as i128).then_some(k as i64)
            })
            .collect()
    };
    Some(Scaled {
        left: conv(left)?,
        right: conv(right)?,
        scale,
    })
}

/// Sorted `(key, count)` pairs for `f(l, r)` over all pairs, given bounds on
/// the key range.
pub(crate) fn pair_counts(
    left: &[i64],
    right: &[i64],
    lo: i64,
    hi: i64,
    f: impl Fn(i64, i64) -> i64,
) -> Vec<(i64, u64)> {
    let pairs = left.len() as i64 * right.len() as i64;
    let range = hi - lo + 1;
    if range <= DENSE_RANGE_LIMIT && range <= 8 * pairs.max(512) {
        let mut counts = vec![0u32; range as usize];
        for &l in left {
            for &r in right {
                counts[(f(l, r) - lo) as usize] += 1;
            }
        }
        counts
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c > 0)
            .map(|(i, c)| (lo + i as i64, c as u64))
            .collect()
    } else {
        let mut keys = Vec::with_capacity(pairs as usize);
        for &l in left {
            keys.extend(right.iter().map(|&r| f(l, r)));
        }
        keys.sort_unstable();
        run_lengths(&keys)
    }
}

fn run_lengths(sorted: &[i64]) -> Vec<(i64, u64)> {
    let mut out: Vec<(i64, u64)> = Vec::new();
    for &k in sorted {
        match out.last_mut() {
            Some((last, c)) if *last == k => *c += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

/// Integer-path tally for sum, difference and product. `None` when the
/// operands do not rescale into machine range.
pub(crate) fn integer_counts(left: &[Rational], right: &[Rational], op: Op) -> Option<(Vec<(i64, u64)>, Rational)> {
    if left.is_empty() || right.is_empty() {
        return None;
    }
    match op {
        Op::Sum | Op::Difference => {
            let s = rescale(left, right, 1 << 61)?;
            let (lmin, lmax) = (*s.left.first()?, *s.left.last()?);
            let (rmin, rmax) = (*s.right.first()?, *s.right.last()?);
            let counts = if op == Op::Sum {
                pair_counts(&s.left, &s.right, lmin + rmin, lmax + rmax, |a, b| a + b)
            } else {
                pair_counts(&s.left, &s.right, lmin - rmax, lmax - rmin, |a, b| a - b)
            };
            Some((counts, Rational::from_integer(s.scale)))
        }
        Op::Product => {
            let s = rescale(left, right, 1 << 30)?;
            let (lmin, lmax) = (*s.left.first()?, *s.left.last()?);
            let (rmin, rmax) = (*s.right.first()?, *s.right.last()?);
            let corners = [lmin * rmin, lmin * rmax, lmax * rmin, lmax * rmax];
            let lo = *corners.iter().min()?;
            let hi = *corners.iter().max()?;
            let counts = pair_counts(&s.left, &s.right, lo, hi, |a, b| a * b);
            Some((counts, Rational::from_integer(s.scale) * Rational::from_integer(s.scale)))
        }
        Op::Ratio => None,
    }
}

/// Hash-based tally over exact rationals; works for every operand.
pub(crate) fn hashed_counts(
    left: &[Rational],
    right: &[Rational],
    f: impl Fn(&Rational, &Rational) -> Rational,
) -> Vec<(Rational, u64)> {
    let mut map: FxHashMap<Rational, u64> = FxHashMap::default();
    map.reserve((left.len() * right.len()).min(1 << 22));
    for l in left {
        for r in right {
            *map.entry(f(l, r)).or_insert(0) += 1;
        }
    }
    let mut out: Vec<(Rational, u64)> = map.into_iter().collect();
    out.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn dense_and_sorted_paths_agree() {
        let left: Vec<i64> = (0..40).map(|i| i * i).collect();
        let right: Vec<i64> = (0..30).map(|i| 3 * i).collect();
        let dense = pair_counts(&left, &right, 0, 39 * 39 + 87, |a, b| a + b);
        // an artificially wide range forces the sorting path
        let sorted = pair_counts(&left, &right, -(1 << 40), 1 << 40, |a, b| a + b);
        assert_eq!(dense, sorted);
        assert_eq!(dense.iter().map(|p| p.1).sum::<u64>(), 1200);
    }

    #[test]
    fn rescale_uses_common_denominator() {
        let s = rescale(&[q(1, 2), q(1, 3)], &[q(5, 1)], 1 << 40).unwrap();
        assert_eq!(s.scale, 6);
        assert_eq!(s.left, vec![3, 2]);
        assert_eq!(s.right, vec![30]);
    }

    #[test]
    fn rescale_refuses_out_of_range() {
        let big = Rational::from_integer(1 << 40);
        assert!(rescale(&[big], &[q(1, 1)], 1 << 30).is_none());
    }
}
