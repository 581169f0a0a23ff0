//! Set families: intervals, progressions, convex sets and seeded random subsets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CoreError, Result};
use crate::rational::Rational;
use crate::set::RSet;

/// SplitMix64: a 64-bit counter-based generator. Fixed here so that seeded
/// sets are reproducible anywhere.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, span)` by rejection.
    pub fn below(&mut self, span: u64) -> u64 {
        assert!(span > 0);
        let zone = u64::MAX - u64::MAX % span;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % span;
            }
        }
    }
}

fn need_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(CoreError::BadParams("n must be at least 1".into()));
    }
    Ok(())
}

fn positive(name: &str, x: &Rational) -> Result<()> {
    if !x.is_positive() {
        return Err(CoreError::BadParams(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

/// `{1, …, n}`.
pub fn interval(n: usize) -> Result<RSet> {
    need_n(n)?;
    RSet::from_integers(1..=n as i64)
}

/// `{a, a+d, …, a+(n−1)d}`.
pub fn ap(a: &Rational, d: &Rational, n: usize) -> Result<RSet> {
    need_n(n)?;
    if d.is_zero() && n > 1 {
        return Err(CoreError::DuplicateElements(format!("ap with d = 0 and n = {n}")));
    }
    positive("a", a)?;
    positive("d", d)?;
    Ok(RSet::collect_from((0..n).map(|i| a + d * Rational::from(i))))
}

/// `{a, ar, …, ar^{n−1}}`, `r > 1`.
pub fn gp(a: &Rational, r: &Rational, n: usize) -> Result<RSet> {
    need_n(n)?;
    positive("a", a)?;
    if *r == Rational::ONE && n > 1 {
        return Err(CoreError::DuplicateElements(format!("gp with r = 1 and n = {n}")));
    }
    if *r <= Rational::ONE {
        return Err(CoreError::BadParams(format!("r must exceed 1, got {r}")));
    }
    let mut out = Vec::with_capacity(n);
    let mut x = a.clone();
    for _ in 0..n {
        out.push(x.clone());
        x = &x * r;
    }
    Ok(RSet::collect_from(out))
}

/// `{i^e : 1 ≤ i ≤ n}`, `e ≥ 2`.
pub fn convex_power(n: usize, e: u32) -> Result<RSet> {
    need_n(n)?;
    if e < 2 {
        return Err(CoreError::BadParams(format!("exponent must be at least 2, got {e}")));
    }
    Ok(RSet::collect_from((1..=n as i64).map(|i| Rational::from_integer(i).pow(e as i32).expect("nonzero"))))
}

/// Partial sums `0, g1, g1+g2, …` of strictly increasing positive gaps.
pub fn convex_from_gaps(gaps: &[Rational]) -> Result<RSet> {
    if gaps.first().is_some_and(|g| !g.is_positive()) {
        return Err(CoreError::BadParams("gaps must be positive".into()));
    }
    if gaps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::BadParams("gaps must be strictly increasing".into()));
    }
    let mut acc = Rational::ZERO;
    let mut out = vec![acc.clone()];
    for g in gaps {
        acc = &acc + g;
        out.push(acc.clone());
    }
    Ok(RSet::collect_from(out))
}

/// `n` distinct integers from `[lo, hi]`, drawn by rejection sampling.
pub fn random_subset(lo: i64, hi: i64, n: usize, seed: u64) -> Result<RSet> {
    need_n(n)?;
    if hi < lo {
        return Err(CoreError::BadParams(format!("empty range [{lo}, {hi}]")));
    }
    let span = (hi as i128 - lo as i128 + 1) as u128;
    if n as u128 > span {
        return Err(CoreError::BadParams(format!("cannot draw {n} distinct values from a range of {span}")));
    }
    let span = u64::try_from(span).map_err(|_| CoreError::BadParams("range too wide".into()))?;
    let mut rng = SplitMix64::new(seed);
    let mut seen = rustc_hash::FxHashSet::default();
    while seen.len() < n {
        seen.insert(lo + rng.below(span) as i64);
    }
    RSet::from_integers(seen)
}

pub fn from_file(path: &Path) -> Result<RSet> {
    let text = std::fs::read_to_string(path)?;
    RSet::parse_text(&text)
}

/// A named family with its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "generator", content = "params", rename_all = "snake_case")]
pub enum Family {
    Interval { n: usize },
    Ap { a: Rational, d: Rational, n: usize },
    Gp { a: Rational, r: Rational, n: usize },
    ConvexPower { n: usize, e: u32 },
    ConvexFromGaps { gaps: Vec<Rational> },
    RandomSubset { lo: i64, hi: i64, n: usize, seed: u64 },
    File { path: PathBuf },
}

/// `{"generator": "gp", "params": {...}}` or `{"elements": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSpec {
    Family(Family),
    Elements { elements: Vec<Rational> },
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<RSet> {
        match self {
            GeneratorSpec::Elements { elements } => {
                let set = RSet::collect_from(elements.iter().cloned());
                if set.len() != elements.len() {
                    return Err(CoreError::DuplicateElements("explicit element list".into()));
                }
                RSet::new(set.elements().to_vec())
            }
            GeneratorSpec::Family(f) => match f {
                Family::Interval { n } => interval(*n),
                Family::Ap { a, d, n } => ap(a, d, *n),
                Family::Gp { a, r, n } => gp(a, r, *n),
                Family::ConvexPower { n, e } => convex_power(*n, *e),
                Family::ConvexFromGaps { gaps } => convex_from_gaps(gaps),
                Family::RandomSubset { lo, hi, n, seed } => random_subset(*lo, *hi, *n, *seed),
                Family::File { path } => from_file(path),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorSpec::Elements { .. } => "elements",
            GeneratorSpec::Family(f) => match f {
                Family::Interval { .. } => "interval",
                Family::Ap { .. } => "ap",
                Family::Gp { .. } => "gp",
                Family::ConvexPower { .. } => "convex_power",
                Family::ConvexFromGaps { .. } => "convex_from_gaps",
                Family::RandomSubset { .. } => "random_subset",
                Family::File { .. } => "file",
            },
        }
    }

    pub fn params(&self) -> Value {
        let v = serde_json::to_value(self).expect("spec serialises");
        match self {
            GeneratorSpec::Elements { .. } => v,
            GeneratorSpec::Family(_) => v["params"].clone(),
        }
    }

    pub fn parse(json: &str) -> Result<GeneratorSpec> {
        serde_json::from_str(json).map_err(|e| CoreError::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    #[test]
    fn family_examples() {
        assert_eq!(interval(5).unwrap(), RSet::from_integers(1..=5).unwrap());
        let g = gp(&q(1, 1), &q(2, 1), 4).unwrap();
        assert_eq!(g, RSet::from_integers([1, 2, 4, 8]).unwrap());
        assert_eq!(g.prodset(&g).len(), 7);
        let c = convex_power(4, 2).unwrap();
        assert_eq!(c, RSet::from_integers([1, 4, 9, 16]).unwrap());
        assert!(c.is_convex().unwrap());
        let c = convex_from_gaps(&[q(1, 2), q(1, 1), q(3, 1)]).unwrap();
        assert_eq!(c.elements(), &[q(0, 1), q(1, 2), q(3, 2), q(9, 2)]);
        assert!(c.is_convex().unwrap());
        assert_eq!(ap(&q(1, 2), &q(1, 3), 3).unwrap().elements(), &[q(1, 2), q(5, 6), q(7, 6)]);
    }

    #[test]
    fn bad_parameters() {
        assert!(matches!(interval(0), Err(CoreError::BadParams(_))));
        assert!(matches!(ap(&q(1, 1), &q(0, 1), 3), Err(CoreError::DuplicateElements(_))));
        assert!(matches!(gp(&q(1, 1), &q(1, 1), 3), Err(CoreError::DuplicateElements(_))));
        assert!(matches!(gp(&q(1, 1), &q(1, 2), 3), Err(CoreError::BadParams(_))));
        assert!(matches!(convex_power(3, 1), Err(CoreError::BadParams(_))));
        assert!(matches!(convex_from_gaps(&[q(2, 1), q(2, 1)]), Err(CoreError::BadParams(_))));
        assert!(matches!(random_subset(1, 5, 6, 0), Err(CoreError::BadParams(_))));
    }

    #[test]
    fn structure_counts() {
        for n in 4..=64 {
            let a = interval(n).unwrap();
            assert_eq!(a.sumset(&a).len(), 2 * n - 1);
            let g = gp(&q(1, 1), &q(2, 1), n).unwrap();
            assert_eq!(g.prodset(&g).len(), 2 * n - 1);
        }
    }

    #[test]
    fn splitmix_reference_values() {
        // first outputs for seed 0 from the published reference implementation
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xe220_a839_7b1d_cdaf);
        assert_eq!(r.next_u64(), 0x6e78_9e6a_a1b9_65f4);
        assert_eq!(random_subset(1, 1000, 50, 7).unwrap(), random_subset(1, 1000, 50, 7).unwrap());
        assert_ne!(random_subset(1, 1000, 50, 7).unwrap(), random_subset(1, 1000, 50, 8).unwrap());
        assert_eq!(random_subset(3, 7, 5, 1).unwrap(), RSet::from_integers(3..=7).unwrap());
    }

    #[test]
    fn spec_json() {
        let s = GeneratorSpec::parse(r#"{"generator":"gp","params":{"a":"1","r":"2","n":16}}"#).unwrap();
        assert_eq!(s.name(), "gp");
        assert_eq!(s.build().unwrap().len(), 16);
        assert_eq!(s.params()["n"], 16);
        let e = GeneratorSpec::parse(r#"{"elements":["1","3/2","5"]}"#).unwrap();
        assert_eq!(e.build().unwrap().elements(), &[q(1, 1), q(3, 2), q(5, 1)]);
        assert!(GeneratorSpec::parse(r#"{"elements":["1","1"]}"#).unwrap().build().is_err());
        let back: GeneratorSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(GeneratorSpec::parse(r#"{"generator":"nope","params":{}}"#).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("gen-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("set.txt");
        let a = random_subset(-50, 50, 20, 3).unwrap();
        std::fs::write(&p, a.to_lines()).unwrap();
        assert_eq!(from_file(&p).unwrap(), a);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    proptest! {
        #[test]
        fn random_subsets_have_requested_size(lo in -100i64..100, w in 0i64..200, n in 1usize..50, seed: u64) {
            let hi = lo + w;
            prop_assume!(n as i64 <= w + 1);
            let a = random_subset(lo, hi, n, seed).unwrap();
            prop_assert_eq!(a.len(), n);
            prop_assert!(a.iter().all(|x| *x >= Rational::from(lo) && *x <= Rational::from(hi)));
        }

        #[test]
        fn convex_generators_are_convex(n in 3usize..30, e in 2u32..5) {
            prop_assert!(convex_power(n, e).unwrap().is_convex().unwrap());
        }
    }
}
