//! Additive and multiplicative energies, popular sets and dyadic layers.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rustc_hash::FxHashMap;
use serde::{Serialize, Serializer};

use crate::error::{CoreError, Result};
use crate::numeric::{ceil_log2, frac_pow_floor, pow2_neg, FRAC_BITS};
use crate::rational::Rational;
use crate::report::{InequalityReport, Relation};
use crate::set::{Op, RSet, RealisationMap};

/// Largest set for the `O(|A|^4)` quadruple oracle.
pub const QUADRUPLE_GATE: usize = 32;

/// `Σ r^s`. Exact for integer `s`; for fractional `s` the stored value is a
/// lower bound and the true sum lies in `[value, value + tolerance]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyValue {
    pub s: Rational,
    value: Rational,
    tolerance: Rational,
}

impl EnergyValue {
    fn exact(s: Rational, value: BigUint) -> Self {
        EnergyValue { s, value: Rational::from(value), tolerance: Rational::ZERO }
    }

    pub(crate) fn zero(s: Rational) -> Self {
        EnergyValue { s, value: Rational::ZERO, tolerance: Rational::ZERO }
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn upper(&self) -> Rational {
        &self.value + &self.tolerance
    }

    pub fn tolerance(&self) -> &Rational {
        &self.tolerance
    }

    pub fn is_exact(&self) -> bool {
        self.tolerance.is_zero()
    }

    /// The exact integer value, for integer exponents.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.is_exact().then(|| self.value.numer())
    }

    /// Exact value as `u128` when it fits.
    pub fn as_u128(&self) -> Option<u128> {
        self.as_integer()?.to_u128()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

impl Serialize for EnergyValue {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            s: &'a Rational,
            value: String,
            exact: bool,
            tolerance: f64,
            decimal: f64,
        }
        let value = match self.as_integer() {
            Some(n) => n.to_string(),
            None => self.value.to_string(),
        };
        Repr {
            s: &self.s,
            value,
            exact: self.is_exact(),
            tolerance: self.tolerance.to_f64(),
            decimal: self.to_f64(),
        }
        .serialize(ser)
    }
}

/// `Σ c^s` over a list of realisation counts.
pub fn power_sum(counts: &[u64], s: &Rational) -> Result<EnergyValue> {
    if *s < Rational::ONE {
        return Err(CoreError::InvalidExponent(s.to_string()));
    }
    if let Some(k) = s.as_i64() {
        let k = u32::try_from(k).map_err(|_| CoreError::InvalidExponent(s.to_string()))?;
        return Ok(EnergyValue::exact(s.clone(), integer_power_sum(counts, k)));
    }
    let (p, q) = s
        .as_small()
        .and_then(|(p, q)| Some((u32::try_from(p).ok()?, u32::try_from(q).ok()?)))
        .filter(|&(p, q)| p <= 1024 && q <= 1024)
        .ok_or_else(|| CoreError::InvalidExponent(s.to_string()))?;
    let mut cache: FxHashMap<u64, BigUint> = FxHashMap::default();
    let mut total = BigUint::zero();
    for &c in counts {
        total += &*cache.entry(c).or_insert_with(|| frac_pow_floor(c, p, q));
    }
    let scale = pow2_neg(FRAC_BITS);
    Ok(EnergyValue {
        s: s.clone(),
        value: Rational::from(total) * &scale,
        tolerance: Rational::from(counts.len() as u64) * scale,
    })
}

fn integer_power_sum(counts: &[u64], k: u32) -> BigUint {
    let mut acc: u128 = 0;
    let mut spill = BigUint::zero();
    for &c in counts {
        match (c as u128).checked_pow(k).and_then(|t| acc.checked_add(t)) {
            Some(v) => acc = v,
            None => {
                spill += BigUint::from(acc);
                acc = 0;
                spill += BigUint::from(c).pow(k);
            }
        }
    }
    spill + BigUint::from(acc)
}

/// `E_s(A,B) = Σ_x r_{A−B}(x)^s`.
pub fn energy_s(a: &RSet, b: &RSet, s: &Rational) -> Result<EnergyValue> {
    if *s < Rational::ONE {
        return Err(CoreError::InvalidExponent(s.to_string()));
    }
    power_sum(&a.count_profile(b, Op::Difference)?, s)
}

/// `E(A) = E_2(A,A)`, exact.
pub fn additive_energy(a: &RSet) -> u128 {
    a.count_profile(a, Op::Difference)
        .expect("differences never fail")
        .iter()
        .map(|&c| c as u128 * c as u128)
        .sum()
}

/// `E_3(A,B)`, exact.
pub fn cubic_energy(a: &RSet, b: &RSet) -> BigUint {
    integer_power_sum(&a.count_profile(b, Op::Difference).expect("differences never fail"), 3)
}

fn require_nonzero(a: &RSet) -> Result<()> {
    if a.contains_zero() {
        Err(CoreError::ZeroElement)
    } else {
        Ok(())
    }
}

/// `E^×(A) = Σ_λ r_{A/A}(λ)^2`.
pub fn mult_energy(a: &RSet) -> Result<EnergyValue> {
    require_nonzero(a)?;
    power_sum(&a.count_profile(a, Op::Ratio)?, &Rational::from(2i64))
}

/// `E^×(A)` by counting quadruples with `ad = bc` directly.
pub fn mult_energy_quadruples(a: &RSet) -> Result<u64> {
    require_nonzero(a)?;
    if a.len() > QUADRUPLE_GATE {
        return Err(CoreError::ScaleTooLarge { what: "quadruple oracle", size: a.len(), gate: QUADRUPLE_GATE });
    }
    let xs = a.elements();
    let mut count = 0;
    for x in xs {
        for d in xs {
            let ad = x * d;
            for b in xs {
                for c in xs {
                    if b * c == ad {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// `D_k = {d ∈ A−B : r_{A−B}(d) ≥ k}`.
pub fn popular_differences(a: &RSet, b: &RSet, k: u64) -> Result<RSet> {
    let max = a.len().min(b.len()) as u64;
    if k < 1 || k > max {
        return Err(CoreError::BadThreshold { k, max });
    }
    let map = a.realisations(b, Op::Difference)?;
    Ok(RSet::collect_from(
        map.entries().iter().filter(|e| e.1 >= k).map(|e| e.0.clone()),
    ))
}

fn check_eps(eps: &Rational) -> Result<()> {
    if eps.is_positive() && *eps < Rational::ONE {
        Ok(())
    } else {
        Err(CoreError::BadEps(eps.to_string()))
    }
}

/// Popular sums `P_ε(A)` with their realisation mass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PopularSums {
    pub eps: Rational,
    pub threshold: Rational,
    pub members: RSet,
    /// `Σ_{x ∈ members} r_{A+A}(x)`.
    pub mass: u64,
    pub total: u64,
}

impl PopularSums {
    /// The guaranteed mass bound `mass ≥ (1−ε)|A|^2`, checked exactly.
    pub fn mass_bound_holds(&self) -> bool {
        Rational::from(self.mass) >= (Rational::ONE - &self.eps) * Rational::from(self.total)
    }
}

pub fn popular_sums(a: &RSet, eps: &Rational) -> Result<PopularSums> {
    check_eps(eps)?;
    let map = a.realisations(a, Op::Sum)?;
    Ok(popular_from_map(&map, eps))
}

pub(crate) fn popular_from_map(map: &RealisationMap, eps: &Rational) -> PopularSums {
    let total = map.total();
    let threshold = eps * &Rational::from(total) / Rational::from(map.support_len());
    let mut mass = 0;
    let mut members = Vec::new();
    for (x, c) in map.entries() {
        if Rational::from(*c) >= threshold {
            mass += c;
            members.push(x.clone());
        }
    }
    PopularSums {
        eps: eps.clone(),
        threshold,
        members: RSet::collect_from(members),
        mass,
        total,
    }
}

/// Values whose realisation count lies in `[2^{j−1}, 2^j − 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DyadicLayer {
    pub j: u32,
    pub members: RSet,
    /// Realisation count of each member, aligned with `members`.
    pub counts: Vec<u64>,
}

impl DyadicLayer {
    /// Lower end of the count range: every count lies in `[τ, 2τ)`.
    pub fn tau(&self) -> u64 {
        1 << (self.j - 1)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `|S_j| · 2^{w j}`.
    pub fn weight(&self, w: u32) -> BigUint {
        BigUint::from(self.len()) << (w * self.j) as usize
    }

    pub fn sum_of_squares(&self) -> u128 {
        self.counts.iter().map(|&c| c as u128 * c as u128).sum()
    }

    pub fn counts_in_range(&self) -> bool {
        self.counts.iter().all(|&c| c >= self.tau() && c < 2 * self.tau())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub weight_exponent: u32,
    pub layers: Vec<DyadicLayer>,
    /// Index into `layers` of the layer of largest weight; ties go to the
    /// smallest `j`.
    pub dominant: usize,
}

impl Decomposition {
    pub fn dominant_layer(&self) -> &DyadicLayer {
        &self.layers[self.dominant]
    }

    /// `Σ_layers Σ r^2`, which reconstructs the second moment exactly.
    pub fn sum_of_squares(&self) -> u128 {
        self.layers.iter().map(DyadicLayer::sum_of_squares).sum()
    }

    /// `|S_τ| 2^{2j} ≥ E / (4⌈log₂ n⌉)` for the dominant layer, exactly.
    pub fn dominant_bound_holds(&self, energy: u128, n: usize) -> bool {
        let l = self.dominant_layer();
        let lhs = BigUint::from(l.len()) << (2 * l.j) as usize;
        lhs * 4u32 * ceil_log2(n as u64).max(1) >= BigUint::from(energy)
    }
}

pub fn dyadic_decompose(map: &RealisationMap, weight_exponent: u32) -> Result<Decomposition> {
    dyadic_from_entries(map.entries(), weight_exponent)
}

pub(crate) fn dyadic_from_entries(entries: &[(Rational, u64)], w: u32) -> Result<Decomposition> {
    if entries.is_empty() {
        return Err(CoreError::EmptySet);
    }
    let mut by_j: std::collections::BTreeMap<u32, (Vec<Rational>, Vec<u64>)> = Default::default();
    for (x, c) in entries {
        let j = 64 - c.leading_zeros();
        let slot = by_j.entry(j).or_default();
        slot.0.push(x.clone());
        slot.1.push(*c);
    }
    let layers: Vec<DyadicLayer> = by_j
        .into_iter()
        .map(|(j, (members, counts))| DyadicLayer { j, members: RSet::from_sorted_unchecked(members), counts })
        .collect();
    let mut dominant = 0;
    for (i, l) in layers.iter().enumerate() {
        if l.weight(w) > layers[dominant].weight(w) {
            dominant = i;
        }
    }
    Ok(Decomposition { weight_exponent: w, layers, dominant })
}

fn require_at_least(a: &RSet, min: usize) -> Result<()> {
    if a.len() < min {
        Err(CoreError::TooSmall { len: a.len(), min })
    } else {
        Ok(())
    }
}

/// `E^×(A) ≤ 4|A+A|^2⌈log₂|A|⌉`.
pub fn solymosi_report(a: &RSet) -> Result<InequalityReport> {
    a.require_positive()?;
    require_at_least(a, 2)?;
    let e = mult_energy(a)?;
    let ss = a.sumset(a).len() as u64;
    let log = ceil_log2(a.len() as u64) as u64;
    let rhs = Rational::from(4u64) * Rational::from(ss) * Rational::from(ss) * Rational::from(log);
    let mut r = InequalityReport::exact("solymosi", e.value(), Relation::Le, &rhs, "4|A+A|^2 ceil(log2|A|)")
        .with("sumset", ss)
        .with("log2_ceil", log);
    // the same bound with a natural-log factor, for auditing the base choice
    let ln_bound = 4.0 * (ss as f64).powi(2) * (a.len() as f64).ln().ceil();
    r = r.with("natural_log_margin", ln_bound / e.to_f64());
    Ok(r)
}

/// `E^×(A)·|AA| ≥ |A|^4` and `E^×(A)·|A/A| ≥ |A|^4`.
pub fn cauchy_schwarz_reports(a: &RSet) -> Result<[InequalityReport; 2]> {
    require_nonzero(a)?;
    let e = mult_energy(a)?;
    let n4 = Rational::from(a.len() as u64).pow(4)?;
    let aa = a.prodset(a).len() as u64;
    let ratios = a.ratioset(a)?.len() as u64;
    Ok([
        InequalityReport::exact("cauchy-schwarz-product", e.value(), Relation::Ge, &(&n4 / &Rational::from(aa)), "|A|^4/|AA|")
            .with("product_set", aa),
        InequalityReport::exact("cauchy-schwarz-ratio", e.value(), Relation::Ge, &(&n4 / &Rational::from(ratios)), "|A|^4/|A/A|")
            .with("ratio_set", ratios),
    ])
}

/// Elements of `a` with fewer than `t` realisations in `map`, rendered.
pub(crate) fn hypothesis_witnesses(a: &RSet, map: &RealisationMap, t: u64) -> Vec<String> {
    a.iter()
        .filter_map(|x| {
            let r = map.get(x);
            (r < t).then(|| format!("r({x}) = {r} < {t}"))
        })
        .collect()
}

/// The few-products-many-sums bound `E^×(A) ≪ |Π₁|^3|Π₂|^3 log|Π₁| / T^4`,
/// under `r_{Π₁−Π₂}(a) ≥ T` for every `a ∈ A`.
pub fn fpms_bound_report(a: &RSet, pi1: &RSet, pi2: &RSet, t: u64) -> Result<InequalityReport> {
    require_nonzero(a)?;
    if t < 1 {
        return Err(CoreError::BadParams("T must be at least 1".into()));
    }
    if pi1.len() < a.len() || pi2.len() < a.len() {
        return Err(CoreError::SideConditionFailed("|Pi1|, |Pi2| >= |A|".into()));
    }
    let diffs = pi1.realisations(pi2, Op::Difference)?;
    let witnesses = hypothesis_witnesses(a, &diffs, t);
    if !witnesses.is_empty() {
        return Err(CoreError::HypothesisFailed { witnesses });
    }
    let e = mult_energy(a)?;
    let (p1, p2) = (Rational::from(pi1.len()), Rational::from(pi2.len()));
    let log = Rational::from(ceil_log2(pi1.len() as u64).max(1) as u64);
    let rhs = (&p1 * &p2).pow(3)? * log / Rational::from(t).pow(4)?;
    Ok(InequalityReport::profile_exact(
        "fpms-energy",
        e.value(),
        Relation::Le,
        &rhs,
        "|Pi1|^3|Pi2|^3 ceil(log2|Pi1|)/T^4",
    )
    .with("T", t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::report::Verdict;
    use proptest::prelude::*;

    fn ints(v: impl IntoIterator<Item = i64>) -> RSet {
        RSet::from_integers(v).unwrap()
    }

    fn interval(n: i64) -> RSet {
        ints(1..=n)
    }

    #[test]
    fn energy_examples() {
        let a = ints([0, 1, 2]);
        assert_eq!(energy_s(&a, &a, &q(2, 1)).unwrap().as_u128(), Some(19));
        assert_eq!(energy_s(&a, &a, &q(3, 1)).unwrap().as_u128(), Some(45));
        let z = ints([0]);
        assert_eq!(energy_s(&z, &z, &q(2, 1)).unwrap().as_u128(), Some(1));
        assert!(matches!(energy_s(&a, &a, &q(1, 2)), Err(CoreError::InvalidExponent(_))));
        assert_eq!(additive_energy(&a), 19);
        assert_eq!(cubic_energy(&a, &a), BigUint::from(45u32));
    }

    #[test]
    fn fractional_energy_encloses_truth() {
        let a = interval(20);
        let e = energy_s(&a, &a, &q(3, 2)).unwrap();
        let truth: f64 = (1..=20).map(|c: i32| (c as f64).powf(1.5)).sum::<f64>() * 2.0 - 20f64.powf(1.5);
        assert!(!e.is_exact());
        assert!(e.value().to_f64() <= truth + 1e-9);
        assert!(e.upper().to_f64() >= truth - 1e-9);
        assert!(e.tolerance().to_f64() < 39.0 * 1e-12);
    }

    #[test]
    fn mult_energy_examples() {
        assert_eq!(mult_energy(&ints([1, 2, 4])).unwrap().as_u128(), Some(19));
        assert_eq!(mult_energy(&ints([1])).unwrap().as_u128(), Some(1));
        assert_eq!(mult_energy(&ints([1, 2, 3])).unwrap().as_u128(), Some(15));
        assert_eq!(mult_energy_quadruples(&ints([1, 2, 3])).unwrap(), 15);
        assert_eq!(mult_energy(&ints([0, 1])), Err(CoreError::ZeroElement));
        assert!(matches!(mult_energy_quadruples(&interval(33)), Err(CoreError::ScaleTooLarge { .. })));
    }

    #[test]
    fn popular_difference_examples() {
        let a = interval(4);
        assert_eq!(popular_differences(&a, &a, 3).unwrap(), ints([-1, 0, 1]));
        assert_eq!(popular_differences(&a, &a, 1).unwrap(), a.diffset(&a));
        let z = ints([0]);
        assert_eq!(popular_differences(&z, &z, 1).unwrap(), z);
        assert_eq!(popular_differences(&a, &a, 5), Err(CoreError::BadThreshold { k: 5, max: 4 }));
        assert_eq!(popular_differences(&a, &a, 0), Err(CoreError::BadThreshold { k: 0, max: 4 }));
    }

    #[test]
    fn popular_sum_examples() {
        let a = ints([1, 2, 3]);
        let p = popular_sums(&a, &q(1, 2)).unwrap();
        assert_eq!(p.threshold, q(9, 10));
        assert_eq!(p.members, a.sumset(&a));
        let b = interval(8);
        let p = popular_sums(&b, &q(1, 2)).unwrap();
        assert_eq!(p.threshold, q(32, 15));
        let expected = RSet::collect_from(
            b.realisations(&b, Op::Sum).unwrap().entries().iter().filter(|e| e.1 >= 3).map(|e| e.0.clone()),
        );
        assert_eq!(p.members, expected);
        assert!(p.mass_bound_holds());
        assert!(matches!(popular_sums(&b, &q(1, 1)), Err(CoreError::BadEps(_))));
    }

    #[test]
    fn dyadic_examples() {
        let a = ints([0, 10, 100]);
        let d = dyadic_decompose(&a.realisations(&a, Op::Sum).unwrap(), 2).unwrap();
        // three distinct sums doubled, three diagonal: every count 1 or 2
        assert!(d.layers.iter().all(|l| l.counts_in_range()));

        let counts = [1u64, 1, 2, 4];
        let entries: Vec<(Rational, u64)> = counts.iter().enumerate().map(|(i, &c)| (q(i as i64, 1), c)).collect();
        let d = dyadic_from_entries(&entries, 2).unwrap();
        let shape: Vec<(u32, Vec<u64>)> = d.layers.iter().map(|l| (l.j, l.counts.clone())).collect();
        assert_eq!(shape, vec![(1, vec![1, 1]), (2, vec![2]), (3, vec![4])]);
        // weights 2*4, 1*16, 1*64
        assert_eq!(d.dominant_layer().j, 3);
    }

    #[test]
    fn dominant_layer_of_interval_ratios() {
        let a = interval(16);
        let map = a.realisations(&a, Op::Ratio).unwrap();
        assert_eq!(map.support_len(), 159);
        let d = dyadic_decompose(&map, 2).unwrap();
        let sizes: Vec<(u32, usize)> = d.layers.iter().map(|l| (l.j, l.len())).collect();
        assert_eq!(sizes, vec![(1, 116), (2, 32), (3, 8), (4, 2), (5, 1)]);
        assert_eq!(d.dominant_layer().j, 5);
        let e = mult_energy(&a).unwrap().as_u128().unwrap();
        assert_eq!(e, 832);
        assert_eq!(d.sum_of_squares(), e);
        assert!(d.dominant_bound_holds(e, a.len()));
    }

    #[test]
    fn ties_go_to_smallest_layer() {
        // counts 1 (weight 4 each) versus a single 2 (weight 16): 4 ones tie it
        let entries: Vec<(Rational, u64)> = [1u64, 1, 1, 1, 2].iter().enumerate().map(|(i, &c)| (q(i as i64, 1), c)).collect();
        assert_eq!(dyadic_from_entries(&entries, 2).unwrap().dominant_layer().j, 1);
    }

    #[test]
    fn fpms_examples() {
        let pi = ints(0..=3);
        let r = fpms_bound_report(&ints([1, 2]), &pi, &pi, 2).unwrap();
        assert_eq!(r.verdict, Verdict::ReportOnly);
        assert!(r.ratio > 0.0);
        let r = fpms_bound_report(&interval(4), &interval(8), &interval(8), 4).unwrap();
        // E^x([4]) = 32, rhs = 8^6 * 3 / 4^4
        assert_eq!(r.lhs.exact.as_deref(), Some("32"));
        assert_eq!(r.rhs.exact.as_deref(), Some("3072"));
        let err = fpms_bound_report(&ints([1, 2]), &pi, &pi, 3).unwrap_err();
        assert!(matches!(err, CoreError::HypothesisFailed { ref witnesses } if witnesses.len() == 1));
    }

    #[test]
    fn solymosi_and_cauchy_schwarz_on_structured_sets() {
        for a in [interval(32), ints((0..12).map(|i| 1 << i)), ints((1..=20).map(|i| i * i))] {
            assert_eq!(solymosi_report(&a).unwrap().verdict, Verdict::Pass);
            for r in cauchy_schwarz_reports(&a).unwrap() {
                assert_eq!(r.verdict, Verdict::Pass);
            }
        }
    }

    fn arb_positive(max: usize) -> impl Strategy<Value = RSet> {
        prop::collection::vec(1i64..60, 2..max).prop_map(|v| RSet::from_integers(v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn mult_energy_matches_quadruples(a in arb_positive(14)) {
            prop_assert_eq!(mult_energy(&a).unwrap().as_u128().unwrap(), mult_energy_quadruples(&a).unwrap() as u128);
        }

        #[test]
        fn moment_cauchy_schwarz(a in arb_positive(30), b in arb_positive(30)) {
            let e2 = energy_s(&a, &b, &q(2, 1)).unwrap().as_integer().unwrap();
            let e3 = energy_s(&a, &b, &q(3, 1)).unwrap().as_integer().unwrap();
            prop_assert!(&e2 * &e2 <= e3 * BigInt::from(a.len() * b.len()));
        }

        #[test]
        fn popular_difference_tail_identity(a in arb_positive(30), b in arb_positive(30)) {
            let max = a.len().min(b.len()) as u64;
            let mut sum = 0;
            let mut prev: Option<RSet> = None;
            for k in 1..=max {
                let d = popular_differences(&a, &b, k).unwrap();
                if let Some(p) = &prev {
                    prop_assert!(d.is_subset(p));
                }
                sum += d.len();
                prev = Some(d);
            }
            prop_assert_eq!(sum, a.len() * b.len());
        }

        #[test]
        fn layers_partition_and_reconstruct(a in arb_positive(40)) {
            let map = a.realisations(&a, Op::Difference).unwrap();
            let d = dyadic_decompose(&map, 2).unwrap();
            prop_assert_eq!(d.layers.iter().map(DyadicLayer::len).sum::<usize>(), map.support_len());
            prop_assert!(d.layers.iter().all(DyadicLayer::counts_in_range));
            prop_assert_eq!(d.sum_of_squares(), additive_energy(&a));
        }

        #[test]
        fn solymosi_holds(a in arb_positive(40)) {
            prop_assert_eq!(solymosi_report(&a).unwrap().verdict, Verdict::Pass);
        }

        #[test]
        fn popular_mass(a in arb_positive(40), num in 1i64..8) {
            let p = popular_sums(&a, &q(num, 8)).unwrap();
            prop_assert!(p.mass_bound_holds());
            prop_assert!(p.members.iter().all(|x| Rational::from(a.realisations(&a, Op::Sum).unwrap().get(x)) >= p.threshold));
        }
    }
}
