//! Dot-product sets `AA + AA`: Balog's fixed-vector sums and the two lower
//! bounds they feed.

use serde::{Deserialize, Serialize};

use crate::bunching::{slope_classes, Point};
use crate::energy::energy_s;
use crate::error::{CoreError, Result};
use crate::incidence::{count_difference_solutions, lemma22_bound_report, Lemma22Branch, ProductHypothesis};
use crate::numeric::{ceil_log2, monomial, sig12};
use crate::rational::Rational;
use crate::regularise::dominant_difference_layer;
use crate::report::{InequalityReport, Relation};
use crate::set::RSet;

/// Largest `|A|` for which `AA + AA` is built.
pub const AA_PLUS_AA_GATE: usize = 128;
/// Largest `|A|` for the Balog construction and the difference-layer report.
pub const BALOG_GATE: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DotProductSet {
    pub a: RSet,
    pub aa: RSet,
    pub aa_plus_aa: RSet,
}

pub fn aa_plus_aa(a: &RSet) -> Result<DotProductSet> {
    if a.len() > AA_PLUS_AA_GATE {
        return Err(CoreError::ScaleTooLarge { what: "AA+AA", size: a.len(), gate: AA_PLUS_AA_GATE });
    }
    let aa = a.prodset(a);
    let aa_plus_aa = aa.sumset(&aa);
    Ok(DotProductSet { a: a.clone(), aa, aa_plus_aa })
}

/// Which point of `A × A` on each line through the origin to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VectorSelector {
    #[default]
    Smallest,
    Largest,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BalogReport {
    pub size: usize,
    pub ratio_set: usize,
    pub dot_products: usize,
    /// `(λ, a_λ)` so that `v_λ = (a_λ, λa_λ)`.
    pub vectors: Vec<(Rational, Rational)>,
    pub consecutive_pairs: usize,
    /// Distinct sums `a1 v_λi + a2 v_λ(i+1)` over all consecutive pairs.
    pub distinct_sums: u64,
    pub all_in_square: bool,
    pub slopes_between: bool,
}

impl BalogReport {
    /// `(|A/A| − 1)|A|^2`.
    pub fn baseline(&self) -> u64 {
        self.ratio_set.saturating_sub(1) as u64 * (self.size * self.size) as u64
    }

    /// Sums from different consecutive pairs never coincide.
    pub fn globally_distinct(&self) -> bool {
        self.distinct_sums == self.baseline()
    }

    /// `|AA+AA|^2 ≥ (|A/A| − 1)|A|^2`.
    pub fn report(&self) -> InequalityReport {
        let square = (self.dot_products as u64).pow(2);
        InequalityReport::exact(
            "balog-baseline",
            &Rational::from(square),
            Relation::Ge,
            &Rational::from(self.distinct_sums),
            "distinct consecutive-slope vector sums",
        )
        .with("baseline", self.baseline())
        .with("globally_distinct", self.globally_distinct())
        .with("all_in_square", self.all_in_square)
    }
}

pub fn balog_construction(a: &RSet, selector: VectorSelector) -> Result<BalogReport> {
    a.require_positive()?;
    if a.len() > BALOG_GATE {
        return Err(CoreError::ScaleTooLarge { what: "Balog construction", size: a.len(), gate: BALOG_GATE });
    }
    let dp = aa_plus_aa(a)?;
    let classes = slope_classes(a)?;
    let vectors: Vec<(Rational, Rational)> = classes
        .iter()
        .map(|c| {
            let x = match selector {
                VectorSelector::Smallest => c.members.min(),
                VectorSelector::Largest => c.members.max(),
            };
            (c.lambda.clone(), x.expect("every slope of A/A has a point").clone())
        })
        .collect();
    // x and λx both lie in A, so every coordinate a1·u + a2·v is in AA+AA
    let all_in_square = vectors.iter().all(|(l, x)| a.contains(x) && a.contains(&(l * x)));
    let mut slopes_between = true;
    let mut distinct = 0u64;
    for w in vectors.windows(2) {
        let ((l1, x1), (l2, x2)) = (&w[0], &w[1]);
        let (y1, y2) = (l1 * x1, l2 * x2);
        let scaled = |c: &Rational| -> Vec<Rational> { a.iter().map(|t| t * c).collect() };
        let (ax1, ax2, ay1, ay2) = (scaled(x1), scaled(x2), scaled(&y1), scaled(&y2));
        let mut sums: Vec<Point> = Vec::with_capacity(a.len() * a.len());
        for i in 0..a.len() {
            for j in 0..a.len() {
                let p = (&ax1[i] + &ax2[j], &ay1[i] + &ay2[j]);
                slopes_between &= l1 * &p.0 < p.1 && p.1 < l2 * &p.0;
                sums.push(p);
            }
        }
        sums.sort_unstable();
        sums.dedup();
        distinct += sums.len() as u64;
    }
    // with every slope strictly inside its own gap the pairs are disjoint;
    // otherwise fall back to a global count
    if !slopes_between {
        let mut all: Vec<Point> = Vec::new();
        for w in vectors.windows(2) {
            let ((l1, x1), (l2, x2)) = (&w[0], &w[1]);
            for a1 in a {
                for a2 in a {
                    all.push((a1 * x1 + a2 * x2, a1 * &(l1 * x1) + a2 * &(l2 * x2)));
                }
            }
        }
        all.sort_unstable();
        all.dedup();
        distinct = all.len() as u64;
    }
    Ok(BalogReport {
        size: a.len(),
        ratio_set: classes.len(),
        dot_products: dp.aa_plus_aa.len(),
        consecutive_pairs: vectors.len().saturating_sub(1),
        vectors,
        distinct_sums: distinct,
        all_in_square,
        slopes_between,
    })
}

/// `|AA+AA|^2` against `|A/A|^{2/3}|A|^{5/2}`.
pub fn prop62_report(a: &RSet) -> Result<InequalityReport> {
    let dp = aa_plus_aa(a)?;
    let ratios = a.ratioset(a)?.len();
    let n = a.len();
    let lhs = Rational::from(dp.aa_plus_aa.len()).pow(2)?;
    let rhs = monomial(&[(ratios as f64, 2.0 / 3.0), (n as f64, 2.5)]);
    // N = |AA+AA|^2/(|A|^2|A/A|) with C = 1
    let big_n = &lhs / Rational::from(n * n * ratios);
    Ok(InequalityReport::profile("aa-plus-aa-bunching", &lhs, Relation::Ge, rhs, "|A/A|^(2/3)|A|^(5/2)")
        .with("aa", dp.aa.len())
        .with("ratio_set", ratios)
        .with("aa_plus_aa", dp.aa_plus_aa.len())
        .with("n", sig12(big_n.to_f64())))
}

/// `|AA+AA|^5` against `|A|^13|A/A|^{-5}(log₂|A|)^{-9/2}`, with the
/// difference-layer intermediates attached.
pub fn prop63_report(a: &RSet) -> Result<InequalityReport> {
    if a.len() > BALOG_GATE {
        return Err(CoreError::ScaleTooLarge { what: "A(A+A) report", size: a.len(), gate: BALOG_GATE });
    }
    if a.len() < 2 {
        return Err(CoreError::TooSmall { len: a.len(), min: 2 });
    }
    let dp = aa_plus_aa(a)?;
    let ratios = a.ratioset(a)?.len();
    let n = a.len();
    let log = ceil_log2(n as u64).max(1) as f64;
    let lhs = Rational::from(dp.aa_plus_aa.len()).pow(5)?;
    let rhs = monomial(&[(n as f64, 13.0), (ratios as f64, -5.0), (log, -4.5)]);

    let layer = dominant_difference_layer(a)?;
    let e3 = energy_s(a, a, &Rational::from(3i64))?.as_u128().expect("integer energy");
    let e3_bound = (ratios * ratios * n) as f64 * log;
    let ss = a.sumset(a);
    let hyp = ProductHypothesis::new(a.reciprocals()?, a.prodset(&ss), n as u64);
    let hypothesis_holds = hyp.verify(&ss).is_ok();
    let solutions_report = lemma22_bound_report(&ss, &ss, Some(&hyp), &Lemma22Branch::Solutions { c: layer.d.clone() });
    let solutions = match &solutions_report {
        Ok(r) => r.lhs.exact.as_ref().and_then(|x| x.parse().ok()).expect("integer count"),
        Err(_) => count_difference_solutions(&ss, &ss, &layer.d),
    };
    let e3_report = lemma22_bound_report(a, a, Some(&ProductHypothesis::ratio_certificate(a)?), &Lemma22Branch::ThirdEnergy);
    let mut r = InequalityReport::profile(
        "aa-plus-aa-difference-layer",
        &lhs,
        Relation::Ge,
        rhs,
        "|A|^13 |A/A|^-5 ceil(log2|A|)^(-9/2)",
    )
    .with("aa_plus_aa", dp.aa_plus_aa.len())
    .with("ratio_set", ratios)
    .with("a_times_sumset", hyp.pi2.len())
    .with("d_size", layer.d.len())
    .with("delta", layer.delta)
    .with("layer_constant", layer.constant())
    .with("e3", e3)
    .with("e3_over_bound", sig12(e3 as f64 / e3_bound))
    .with("hypothesis_holds", hypothesis_holds)
    .with("solutions", solutions);
    for (key, rep) in [("solutions_ratio", solutions_report), ("e3_lemma_ratio", e3_report)] {
        r = match rep {
            Ok(x) => r.with(key, x.ratio),
            Err(e) => r.with(key, e.to_string()),
        };
    }
    Ok(r)
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

    fn four_loop(a: &RSet) -> Vec<Rational> {
        let mut out = Vec::new();
        for w in a {
            for x in a {
                for y in a {
                    for z in a {
                        out.push(w * x + y * z);
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn dot_product_examples() {
        let d = aa_plus_aa(&ints([1, 2])).unwrap();
        assert_eq!(d.aa, ints([1, 2, 4]));
        assert_eq!(d.aa_plus_aa, ints([2, 3, 4, 5, 6, 8]));
        assert_eq!(aa_plus_aa(&ints([1])).unwrap().aa_plus_aa, ints([2]));
        let d = aa_plus_aa(&ints(1..=8)).unwrap();
        assert_eq!((d.aa.len(), d.aa_plus_aa.len()), (30, 103));
        assert!(matches!(aa_plus_aa(&ints(1..=129)), Err(CoreError::ScaleTooLarge { .. })));
    }

    #[test]
    fn balog_examples() {
        let b = balog_construction(&ints([1, 2]), VectorSelector::Smallest).unwrap();
        assert_eq!((b.ratio_set, b.consecutive_pairs, b.distinct_sums), (3, 2, 8));
        assert!(b.all_in_square && b.slopes_between && b.globally_distinct());
        let b = balog_construction(&ints(1..=8), VectorSelector::Largest).unwrap();
        assert_eq!(b.ratio_set, 43);
        assert!(b.globally_distinct() && b.all_in_square);
        assert_eq!(b.report().verdict, Verdict::Pass);
        assert!(matches!(balog_construction(&ints([-1, 2]), VectorSelector::Smallest), Err(CoreError::NonPositive(_))));
    }

    #[test]
    fn proposition_reports() {
        let r = prop62_report(&ints([1])).unwrap();
        assert_eq!((r.lhs.decimal, r.rhs.decimal), (1.0, 1.0));
        let gp = ints((0..16).map(|i| 1 << i));
        let r = prop62_report(&gp).unwrap();
        assert_eq!(r.details["ratio_set"], 31);
        let r = prop63_report(&ints(1..=12)).unwrap();
        assert_eq!(r.details["aa_plus_aa"], 239);
        assert_eq!(r.details["hypothesis_holds"], true);
        assert!(r.details["solutions_ratio"].is_f64());
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        let sq = ints((1..=12).map(|i| i * i));
        assert!(prop63_report(&sq).unwrap().ratio > 0.0);
        assert!(matches!(prop63_report(&ints(1..=65)), Err(CoreError::ScaleTooLarge { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn dot_products_match_four_loop(v in prop::collection::vec((-12i64..12, 1i64..4), 1..10)) {
            let a = RSet::collect_from(v.into_iter().map(|(n, d)| q(n, d)));
            let (fast, slow) = (aa_plus_aa(&a).unwrap().aa_plus_aa, four_loop(&a));
            prop_assert_eq!(fast.elements(), slow.as_slice());
        }

        #[test]
        fn balog_sums_stay_in_square(v in prop::collection::vec(1i64..30, 1..12)) {
            let a = RSet::from_integers(v).unwrap();
            let b = balog_construction(&a, VectorSelector::Smallest).unwrap();
            prop_assert!(b.all_in_square && b.slopes_between && b.globally_distinct());
            prop_assert!(b.report().passed());
        }
    }
}
