//! Finite sets of rationals and their pairwise arithmetic.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::kernel;
use crate::rational::Rational;

/// Binary operation used to combine two sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Sum,
    Difference,
    Product,
    Ratio,
}

impl Op {
    pub fn apply(self, a: &Rational, b: &Rational) -> Rational {
        match self {
            Op::Sum => a + b,
            Op::Difference => a - b,
            Op::Product => a * b,
            Op::Ratio => a / b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Sum => "+",
            Op::Difference => "-",
            Op::Product => "*",
            Op::Ratio => "/",
        }
    }
}

/// A finite, strictly increasing sequence of distinct rationals.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rational>", into = "Vec<Rational>")]
pub struct RSet {
    elems: Vec<Rational>,
}

impl TryFrom<Vec<Rational>> for RSet {
    type Error = CoreError;
    fn try_from(v: Vec<Rational>) -> Result<Self> {
        RSet::new(v)
    }
}

impl From<RSet> for Vec<Rational> {
    fn from(s: RSet) -> Self {
        s.elems
    }
}

impl RSet {
    /// Sorts and deduplicates. Fails on an empty list.
    pub fn new(mut values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(CoreError::EmptySet);
        }
        values.sort_unstable();
        values.dedup();
        Ok(RSet { elems: values })
    }

    pub fn empty() -> Self {
        RSet { elems: Vec::new() }
    }

    /// Builds a set from any collection, allowing the empty set.
    pub fn collect_from(values: impl IntoIterator<Item = Rational>) -> Self {
        let mut elems: Vec<Rational> = values.into_iter().collect();
        elems.sort_unstable();
        elems.dedup();
        RSet { elems }
    }

    pub(crate) fn from_sorted_unchecked(elems: Vec<Rational>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        RSet { elems }
    }

    pub fn from_integers(values: impl IntoIterator<Item = i64>) -> Result<Self> {
        RSet::new(values.into_iter().map(Rational::from_integer).collect())
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elements(&self) -> &[Rational] {
        &self.elems
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.elems.iter()
    }

    pub fn min(&self) -> Option<&Rational> {
        self.elems.first()
    }

    pub fn max(&self) -> Option<&Rational> {
        self.elems.last()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.elems.binary_search(x).is_ok()
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::ZERO)
    }

    pub fn is_positive(&self) -> bool {
        self.min().is_none_or(Rational::is_positive)
    }

    pub fn require_positive(&self) -> Result<()> {
        match self.min() {
            Some(m) if !m.is_positive() => Err(CoreError::NonPositive(m.to_string())),
            _ => Ok(()),
        }
    }

    /// True iff consecutive gaps strictly increase.
    pub fn is_convex(&self) -> Result<bool> {
        if self.len() < 3 {
            return Err(CoreError::TooSmall { len: self.len(), min: 3 });
        }
        let gaps: Vec<Rational> = self.elems.windows(2).map(|w| &w[1] - &w[0]).collect();
        Ok(gaps.windows(2).all(|g| g[0] < g[1]))
    }

    pub fn is_subset(&self, other: &RSet) -> bool {
        self.elems.iter().all(|x| other.contains(x))
    }

    pub fn intersection(&self, other: &RSet) -> RSet {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        RSet::from_sorted_unchecked(small.elems.iter().filter(|x| large.contains(x)).cloned().collect())
    }

    pub fn union(&self, other: &RSet) -> RSet {
        RSet::collect_from(self.elems.iter().chain(&other.elems).cloned())
    }

    pub fn filter(&self, keep: impl Fn(&Rational) -> bool) -> RSet {
        RSet::from_sorted_unchecked(self.elems.iter().filter(|x| keep(x)).cloned().collect())
    }

    pub fn sumset(&self, other: &RSet) -> RSet {
        self.combine(other, Op::Sum).expect("sums never fail")
    }

    pub fn diffset(&self, other: &RSet) -> RSet {
        self.combine(other, Op::Difference).expect("differences never fail")
    }

    pub fn prodset(&self, other: &RSet) -> RSet {
        self.combine(other, Op::Product).expect("products never fail")
    }

    pub fn ratioset(&self, other: &RSet) -> Result<RSet> {
        self.combine(other, Op::Ratio)
    }

    /// The set `{a op b}`.
    pub fn combine(&self, other: &RSet, op: Op) -> Result<RSet> {
        if op == Op::Ratio && other.contains_zero() {
            return Err(CoreError::DivisionByZero);
        }
        if let Some((counts, scale)) = kernel::integer_counts(&self.elems, &other.elems, op) {
            return Ok(RSet::from_sorted_unchecked(
                counts.into_iter().map(|(k, _)| &Rational::from_integer(k) / &scale).collect(),
            ));
        }
        let mut out = Vec::with_capacity(self.len() * other.len());
        for a in &self.elems {
            out.extend(other.elems.iter().map(|b| op.apply(a, b)));
        }
        Ok(RSet::collect_from(out))
    }

    pub fn dilate(&self, c: &Rational) -> Result<RSet> {
        if c.is_zero() {
            return Err(CoreError::DivisionByZero);
        }
        let mut v: Vec<Rational> = self.elems.iter().map(|x| x * c).collect();
        if c.is_negative() {
            v.reverse();
        }
        Ok(RSet::from_sorted_unchecked(v))
    }

    pub fn translate(&self, c: &Rational) -> RSet {
        RSet::from_sorted_unchecked(self.elems.iter().map(|x| x + c).collect())
    }

    pub fn negate(&self) -> RSet {
        RSet::from_sorted_unchecked(self.elems.iter().rev().map(|x| -x).collect())
    }

    pub fn reciprocals(&self) -> Result<RSet> {
        if self.contains_zero() {
            return Err(CoreError::DivisionByZero);
        }
        Ok(RSet::collect_from(self.elems.iter().map(|x| x.recip().expect("nonzero"))))
    }

    /// The multiset of values of `op` over `self × other`.
    pub fn realisations(&self, other: &RSet, op: Op) -> Result<RealisationMap> {
        Ok(RealisationMap {
            op,
            left: self.clone(),
            right: other.clone(),
            entries: self.tally(other, op)?,
        })
    }

    pub(crate) fn tally(&self, other: &RSet, op: Op) -> Result<Vec<(Rational, u64)>> {
        if op == Op::Ratio && other.contains_zero() {
            return Err(CoreError::DivisionByZero);
        }
        if let Some((counts, scale)) = kernel::integer_counts(&self.elems, &other.elems, op) {
            return Ok(counts
                .into_iter()
                .map(|(k, c)| (&Rational::from_integer(k) / &scale, c))
                .collect());
        }
        Ok(kernel::hashed_counts(&self.elems, &other.elems, |a, b| op.apply(a, b)))
    }

    /// Realisation counts without materialising the values.
    pub(crate) fn count_profile(&self, other: &RSet, op: Op) -> Result<Vec<u64>> {
        if op == Op::Ratio && other.contains_zero() {
            return Err(CoreError::DivisionByZero);
        }
        if let Some((counts, _)) = kernel::integer_counts(&self.elems, &other.elems, op) {
            return Ok(counts.into_iter().map(|(_, c)| c).collect());
        }
        Ok(self.tally(other, op)?.into_iter().map(|(_, c)| c).collect())
    }

    /// Parses one element per line (blank lines and `#` comments skipped) or
    /// a JSON array of strings/integers.
    pub fn parse_text(text: &str) -> Result<RSet> {
        let trimmed = text.trim_start();
        let values: Vec<Rational> = if trimmed.starts_with('[') {
            serde_json::from_str(trimmed).map_err(|e| CoreError::Parse(e.to_string()))?
        } else {
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::parse)
                .collect::<Result<_>>()?
        };
        RSet::new(values)
    }

    /// One element per line, the canonical serialisation used for hashing.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for x in &self.elems {
            s.push_str(&x.to_string());
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.elems).expect("rationals serialise")
    }
}

impl fmt::Debug for RSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elems.iter()).finish()
    }
}

impl<'a> IntoIterator for &'a RSet {
    type Item = &'a Rational;
    type IntoIter = std::slice::Iter<'a, Rational>;
    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

/// Exact realisation counts `r_{A∘B}(x)` for one operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealisationMap {
    op: Op,
    left: RSet,
    right: RSet,
    entries: Vec<(Rational, u64)>,
}

impl RealisationMap {
    /// Builds a map from explicit `(value, count)` entries, e.g. for
    /// realisation counts produced outside this crate.
    pub fn from_entries(op: Op, left: RSet, right: RSet, mut entries: Vec<(Rational, u64)>) -> Self {
        entries.retain(|e| e.1 > 0);
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        RealisationMap { op, left, right, entries }
    }

    pub fn op(&self) -> Op {
        self.op
    }

    pub fn operands(&self) -> (&RSet, &RSet) {
        (&self.left, &self.right)
    }

    /// Sorted by value.
    pub fn entries(&self) -> &[(Rational, u64)] {
        &self.entries
    }

    pub fn get(&self, x: &Rational) -> u64 {
        self.entries
            .binary_search_by(|e| e.0.cmp(x))
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Number of distinct values.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> RSet {
        RSet::from_sorted_unchecked(self.entries.iter().map(|e| e.0.clone()).collect())
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn counts(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn max_count(&self) -> u64 {
        self.counts().max().unwrap_or(0)
    }

    /// Σ r(x)^2, exact.
    pub fn sum_of_squares(&self) -> u128 {
        self.counts().map(|c| c as u128 * c as u128).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn ints(v: &[i64]) -> RSet {
        RSet::from_integers(v.iter().copied()).unwrap()
    }

    fn naive(a: &RSet, b: &RSet, op: Op) -> BTreeMap<Rational, u64> {
        let mut m = BTreeMap::new();
        for x in a {
            for y in b {
                *m.entry(op.apply(x, y)).or_insert(0) += 1;
            }
        }
        m
    }

    #[test]
    fn make_set_examples() {
        let s = RSet::new(vec![q(1, 1), q(1, 1), q(2, 1)]).unwrap();
        assert_eq!(s.elements(), &[q(1, 1), q(2, 1)]);
        let s = RSet::new(vec![q(3, 2), q(1, 2)]).unwrap();
        assert_eq!(s.elements(), &[q(1, 2), q(3, 2)]);
        assert_eq!(RSet::new(vec![q(5, 1)]).unwrap().len(), 1);
        assert_eq!(RSet::new(vec![]), Err(CoreError::EmptySet));
    }

    #[test]
    fn set_operation_examples() {
        let a = ints(&[1, 2, 3]);
        assert_eq!(a.sumset(&a), ints(&[2, 3, 4, 5, 6]));
        let b = ints(&[1, 2, 3, 4]);
        assert_eq!(b.prodset(&b).len(), 9);
        let c = ints(&[1, 2]);
        assert_eq!(c.ratioset(&c).unwrap().elements(), &[q(1, 2), q(1, 1), q(2, 1)]);
        assert_eq!(c.ratioset(&ints(&[0, 1])), Err(CoreError::DivisionByZero));
        assert_eq!(c.dilate(&Rational::ZERO), Err(CoreError::DivisionByZero));
    }

    #[test]
    fn realisation_examples() {
        let a = ints(&[1, 2, 3]);
        assert_eq!(a.realisations(&a, Op::Sum).unwrap().get(&q(4, 1)), 3);
        let b = ints(&[1, 2]);
        assert_eq!(b.realisations(&b, Op::Ratio).unwrap().get(&q(1, 1)), 2);
        let z = ints(&[0]);
        assert_eq!(z.realisations(&z, Op::Difference).unwrap().get(&Rational::ZERO), 1);
    }

    #[test]
    fn convexity() {
        assert!(ints(&[1, 2, 4, 8]).is_convex().unwrap());
        assert!(!ints(&[1, 2, 3, 4]).is_convex().unwrap());
        assert!(ints(&[1, 4, 9, 16]).is_convex().unwrap());
        assert_eq!(ints(&[1, 2]).is_convex(), Err(CoreError::TooSmall { len: 2, min: 3 }));
    }

    #[test]
    fn parse_formats() {
        let a = RSet::parse_text("3/2\n# comment\n1\n\n1\n").unwrap();
        assert_eq!(a.elements(), &[q(1, 1), q(3, 2)]);
        let b = RSet::parse_text(r#"["1", "3/2", 5]"#).unwrap();
        assert_eq!(b.len(), 3);
        assert!(RSet::parse_text("").is_err());
        assert_eq!(RSet::parse_text(&b.to_lines()).unwrap(), b);
        assert_eq!(RSet::parse_text(&b.to_json()).unwrap(), b);
    }

    #[test]
    fn mixed_denominators_and_big_values_take_general_path() {
        let a = RSet::new(vec![q(1, 3), q(1, 2), Rational::from_integer(i64::MAX)]).unwrap();
        let m = a.realisations(&a, Op::Sum).unwrap();
        assert_eq!(m.total(), 9);
        assert_eq!(m.entries().iter().map(|e| (e.0.clone(), e.1)).collect::<BTreeMap<_, _>>(), naive(&a, &a, Op::Sum));
    }

    fn arb_set(max: usize) -> impl Strategy<Value = RSet> {
        prop_oneof![
            prop::collection::vec(-50i64..50, 1..max).prop_map(|v| RSet::from_integers(v).unwrap()),
            prop::collection::vec((-30i64..30, 1i64..7), 1..max)
                .prop_map(|v| RSet::new(v.into_iter().map(|(n, d)| q(n, d)).collect()).unwrap()),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fast_paths_match_naive_oracle(a in arb_set(64), b in arb_set(64)) {
            for op in [Op::Sum, Op::Difference, Op::Product] {
                let fast = a.realisations(&b, op).unwrap();
                let slow = naive(&a, &b, op);
                prop_assert_eq!(fast.entries().iter().cloned().collect::<BTreeMap<_, _>>(), slow.clone());
                prop_assert_eq!(a.combine(&b, op).unwrap(), RSet::collect_from(slow.keys().cloned()));
                prop_assert_eq!(fast.total(), (a.len() * b.len()) as u64);
            }
            let bnz = b.filter(|x| !x.is_zero());
            if !bnz.is_empty() {
                let fast = a.realisations(&bnz, Op::Ratio).unwrap();
                prop_assert_eq!(fast.entries().iter().cloned().collect::<BTreeMap<_, _>>(), naive(&a, &bnz, Op::Ratio));
            }
        }

        #[test]
        fn sumset_size_bounds(a in arb_set(40), b in arb_set(40)) {
            let s = a.sumset(&b);
            prop_assert!(s.len() >= a.len() + b.len() - 1);
            prop_assert!(s.len() <= a.len() * b.len());
            prop_assert_eq!(s.len(), a.diffset(&b.negate()).len());
        }

        #[test]
        fn dilation_is_invertible(a in arb_set(30), n in 1i64..20, d in 1i64..20, neg in any::<bool>()) {
            let c = if neg { q(-n, d) } else { q(n, d) };
            let back = a.dilate(&c).unwrap().dilate(&c.recip().unwrap()).unwrap();
            prop_assert_eq!(&back, &a);
            prop_assert_eq!(a.dilate(&c).unwrap().len(), a.len());
        }
    }
}
