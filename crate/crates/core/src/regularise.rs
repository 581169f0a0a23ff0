//! Regularisation by rich coordinates, the energy-dominant difference layer,
//! and the truism classes `(r, s, b) ∼ (r+t, s+t, b−t)`.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::energy::{additive_energy, dyadic_decompose, energy_s, popular_sums, EnergyValue, PopularSums};
use crate::error::{CoreError, Result};
use crate::incidence::{lemma22_bound_report, Lemma22Branch, ProductHypothesis};
use crate::numeric::{ceil_log2, exp_lower, floor_log2, monomial, sig12};
use crate::rational::Rational;
use crate::report::{InequalityReport, Relation};
use crate::set::{Op, RSet};

/// Largest `|B|` for the exhaustive truism enumeration.
pub const TRUISM_GATE: usize = 20;

/// `{a ∈ A : |(a+A) ∩ P_ε(A)| ≥ |A|/2}` with each element's partner count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RichCoordinates {
    pub popular: PopularSums,
    pub members: RSet,
    /// `|(a+A) ∩ P_ε(A)|` for every `a ∈ A`, in order.
    pub partners: Vec<u64>,
}

impl RichCoordinates {
    /// `|R(A)| ≥ (1−2ε)|A|`.
    pub fn size_bound_holds(&self) -> bool {
        let n = Rational::from(self.partners.len());
        Rational::from(self.members.len()) >= (Rational::ONE - Rational::from(2i64) * &self.popular.eps) * n
    }
}

pub fn rich_coordinate_counts(a: &RSet, eps: &Rational) -> Result<RichCoordinates> {
    let popular = popular_sums(a, eps)?;
    let partners: Vec<u64> = a
        .iter()
        .map(|x| a.iter().filter(|y| popular.members.contains(&(x + *y))).count() as u64)
        .collect();
    // 2·count ≥ |A|
    let members = RSet::from_sorted_unchecked(
        a.iter()
            .zip(&partners)
            .filter(|(_, &p)| 2 * p as usize >= a.len())
            .map(|(x, _)| x.clone())
            .collect(),
    );
    Ok(RichCoordinates { popular, members, partners })
}

pub fn rich_coordinates(a: &RSet, eps: &Rational) -> Result<RSet> {
    Ok(rich_coordinate_counts(a, eps)?.members)
}

/// How to read the energy-retention constant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum C2Reading {
    /// `(1−2ε)·e^{1−s}`.
    #[default]
    Product,
    /// `1 − 2ε·e^{1−s}`.
    Alternative,
}

/// A rational lower bound for the retention constant.
pub fn c2_lower(s: &Rational, eps: &Rational, reading: C2Reading) -> Rational {
    let e = exp_lower(&(Rational::ONE - s));
    let two_eps = Rational::from(2i64) * eps;
    match reading {
        C2Reading::Product => (Rational::ONE - two_eps) * e,
        // e is a lower bound, so subtracting it errs upwards; step down one ulp
        C2Reading::Alternative => Rational::ONE - two_eps * (e + crate::numeric::pow2_neg(50)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Iterate {
    pub size: usize,
    pub energy: EnergyValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegularisationTrace {
    pub s: Rational,
    pub eps: Rational,
    pub reading: C2Reading,
    pub initial_size: usize,
    /// `ε·⌊log₂|A|⌋`.
    pub c1: Rational,
    /// Lower approximation of the retention constant, used by the loop guard.
    pub c2: Rational,
    pub iterates: Vec<Iterate>,
    pub b: RSet,
    pub rb: RSet,
    pub energy_b: EnergyValue,
    pub energy_rb: EnergyValue,
}

impl RegularisationTrace {
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn within_iteration_cap(&self) -> bool {
        self.iterations() <= floor_log2(self.initial_size as u64) as usize
    }

    pub fn sizes_non_increasing(&self) -> bool {
        self.iterates.windows(2).all(|w| w[1].size <= w[0].size)
    }

    /// `|B| ≥ (1 − 2ε⌊log₂|A|⌋)|A|`.
    pub fn cardinality_bound_holds(&self) -> bool {
        let n = Rational::from(self.initial_size);
        Rational::from(self.b.len()) >= (Rational::ONE - Rational::from(2i64) * &self.c1) * n
    }

    /// `|B| ≥ (1−ε)^I|A|`, the bound stated for a rule losing an `ε` fraction.
    pub fn rule_eps_bound_holds(&self) -> bool {
        self.power_bound(&self.eps)
    }

    /// `|B| ≥ (1−2ε)^I|A|`, the bound for the rule actually used.
    pub fn rule_two_eps_bound_holds(&self) -> bool {
        self.power_bound(&(Rational::from(2i64) * &self.eps))
    }

    fn power_bound(&self, loss: &Rational) -> bool {
        let keep = (Rational::ONE - loss).pow(self.iterations() as i32).expect("nonzero base");
        Rational::from(self.b.len()) >= keep * Rational::from(self.initial_size)
    }

    /// `E_s(R(B)) ≥ c₂E_s(B)` with both enclosures taken pessimistically.
    pub fn energy_bound_holds(&self) -> bool {
        *self.energy_rb.value() >= &self.c2 * &self.energy_b.upper()
    }

    pub fn invariants_hold(&self) -> bool {
        self.within_iteration_cap()
            && self.sizes_non_increasing()
            && self.cardinality_bound_holds()
            && self.energy_bound_holds()
    }
}

/// `ε = 1/(2⌈log₂|A|⌉)`.
pub fn default_eps(n: usize) -> Rational {
    Rational::new(1, 2 * ceil_log2(n as u64).max(1) as i64).expect("nonzero")
}

pub fn regularise(a: &RSet, s: &Rational, eps: &Rational) -> Result<RegularisationTrace> {
    regularise_with(a, s, eps, C2Reading::Product)
}

/// Iterates `A_{i+1} = R(A_i)` while `E_s(R(A_i)) < c₂E_s(A_i)`.
pub fn regularise_with(a: &RSet, s: &Rational, eps: &Rational, reading: C2Reading) -> Result<RegularisationTrace> {
    if *s <= Rational::ONE {
        return Err(CoreError::BadParams(format!("s must exceed 1, got {s}")));
    }
    if a.len() < 2 {
        return Err(CoreError::TooSmall { len: a.len(), min: 2 });
    }
    let c1 = eps * &Rational::from(floor_log2(a.len() as u64) as u64);
    if !eps.is_positive() || Rational::from(2i64) * &c1 > Rational::ONE {
        return Err(CoreError::BadParams(format!("need 0 < eps and eps*floor(log2|A|) <= 1/2, got eps = {eps}")));
    }
    let c2 = c2_lower(s, eps, reading);
    let energy = |x: &RSet| energy_s(x, x, s);
    let mut current = a.clone();
    let mut e_cur = energy(&current)?;
    let mut iterates = vec![Iterate { size: current.len(), energy: e_cur.clone() }];
    loop {
        let next = rich_coordinates(&current, eps)?;
        let e_next = if next.is_empty() { EnergyValue::zero(s.clone()) } else { energy(&next)? };
        if *e_next.value() >= &c2 * &e_cur.upper() {
            return Ok(RegularisationTrace {
                s: s.clone(),
                eps: eps.clone(),
                reading,
                initial_size: a.len(),
                c1,
                c2,
                iterates,
                b: current,
                rb: next,
                energy_b: e_cur,
                energy_rb: e_next,
            });
        }
        if next.len() == current.len() || next.is_empty() {
            // R is the identity here, or has emptied the set; the guard cannot fire again
            return Err(CoreError::BadParams("regularisation stalled".into()));
        }
        iterates.push(Iterate { size: next.len(), energy: e_next.clone() });
        current = next;
        e_cur = e_next;
    }
}

/// The dyadic layer `D` of `X − X` maximising `|D|Δ^2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DifferenceLayer {
    pub host: RSet,
    pub d: RSet,
    pub delta: u64,
    pub counts: Vec<u64>,
    pub energy: u128,
}

impl DifferenceLayer {
    pub fn weight(&self) -> u128 {
        self.d.len() as u128 * self.delta as u128 * self.delta as u128
    }

    pub fn counts_in_range(&self) -> bool {
        self.counts.iter().all(|&c| c >= self.delta && c < 2 * self.delta)
    }

    /// `E₂(X) ≤ 4⌈log₂|X|⌉Δ^2|D|`.
    pub fn support_bound_holds(&self) -> bool {
        self.energy <= 4 * ceil_log2(self.host.len() as u64).max(1) as u128 * self.weight()
    }

    /// `E₂(X) / (Δ^2|D|⌈log₂|X|⌉)`.
    pub fn constant(&self) -> f64 {
        sig12(self.energy as f64 / (self.weight() as f64 * ceil_log2(self.host.len() as u64).max(1) as f64))
    }
}

pub fn dominant_difference_layer(x: &RSet) -> Result<DifferenceLayer> {
    if x.len() < 2 {
        return Err(CoreError::TooSmall { len: x.len(), min: 2 });
    }
    let map = x.realisations(x, Op::Difference)?;
    let dec = dyadic_decompose(&map, 2)?;
    let layer = dec.dominant_layer();
    Ok(DifferenceLayer {
        host: x.clone(),
        d: layer.members.clone(),
        delta: layer.tau(),
        counts: layer.counts.clone(),
        energy: map.sum_of_squares(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruismCount {
    pub triples: u64,
    pub classes: usize,
    /// `Σ_σ r(σ)^2`, the number of ordered pairs of related triples.
    pub q: u128,
    /// `Σ_t r_{B−B}(t)^3`.
    pub e3: u128,
}

impl TruismCount {
    pub fn bound_holds(&self) -> bool {
        self.q <= self.e3
    }
}

/// Groups triples `(r, s, b) ∈ B^3` by `(r−s, b+r, b+s)`, optionally keeping
/// only `r − s ∈ D` and `b + r ∈ P`.
pub fn truism_class_bound(b: &RSet, restrict_to: Option<(&RSet, &RSet)>) -> Result<TruismCount> {
    if b.len() > TRUISM_GATE {
        return Err(CoreError::ScaleTooLarge { what: "truism enumeration", size: b.len(), gate: TRUISM_GATE });
    }
    let mut classes: FxHashMap<(Rational, Rational, Rational), u64> = FxHashMap::default();
    let mut triples = 0u64;
    for r in b {
        for s in b {
            let d = r - s;
            if restrict_to.is_some_and(|(dd, _)| !dd.contains(&d)) {
                continue;
            }
            for t in b {
                let x = t + r;
                if restrict_to.is_some_and(|(_, p)| !p.contains(&x)) {
                    continue;
                }
                triples += 1;
                *classes.entry((d.clone(), x, t + s)).or_insert(0) += 1;
            }
        }
    }
    let q = classes.values().map(|&c| c as u128 * c as u128).sum();
    let e3 = b
        .count_profile(b, Op::Difference)?
        .iter()
        .map(|&c| (c as u128).pow(3))
        .sum();
    Ok(TruismCount { triples, classes: classes.len(), q, e3 })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremBranch {
    General,
    Convex,
}

/// Sum-set lower bound under a product hypothesis, or for convex `A`. The
/// regularised set, its popular sums and its dominant difference layer are
/// attached as details.
pub fn theorem_five_report(a: &RSet, hyp: Option<&ProductHypothesis>, branch: TheoremBranch) -> Result<InequalityReport> {
    if a.len() < 4 {
        return Err(CoreError::TooSmall { len: a.len(), min: 4 });
    }
    let n = a.len();
    let log = ceil_log2(n as u64).max(1) as u64;
    let sumset = a.sumset(a).len();
    let (mut report, p1, p2, t) = match branch {
        TheoremBranch::General => {
            let h = hyp.ok_or_else(|| CoreError::BadParams("general branch needs Pi1, Pi2, T".into()))?;
            if h.pi1.len() < n || h.pi2.len() < n {
                return Err(CoreError::SideConditionFailed("|Pi1|, |Pi2| >= |A|".into()));
            }
            h.verify(a)?;
            let lhs = Rational::from(sumset).pow(19)?
                * Rational::from(h.pi1.len()).pow(22)?
                * Rational::from(h.pi2.len()).pow(22)?;
            let rhs = Rational::from(n).pow(41)? * Rational::from(h.t).pow(33)? / Rational::from(log).pow(23)?;
            let r = InequalityReport::profile_exact(
                "theorem-sumset-product-hypothesis",
                &lhs,
                Relation::Ge,
                &rhs,
                "|A|^41 T^33 ceil(log2|A|)^-23 against |A+A|^19|Pi1|^22|Pi2|^22",
            )
            .with("T", h.t)
            .with("pi1", h.pi1.len())
            .with("pi2", h.pi2.len());
            (r, h.pi1.len() as f64, h.pi2.len() as f64, h.t as f64)
        }
        TheoremBranch::Convex => {
            if !a.is_convex()? {
                return Err(CoreError::HypothesisFailed { witnesses: vec!["A is not convex".into()] });
            }
            let rhs = monomial(&[(n as f64, 30.0 / 19.0), (log as f64, -23.0 / 19.0)]);
            let r = InequalityReport::profile(
                "theorem-sumset-convex",
                &Rational::from(sumset),
                Relation::Ge,
                rhs,
                "|A|^(30/19) ceil(log2|A|)^(-23/19)",
            );
            (r, n as f64, n as f64, n as f64)
        }
    };

    let eps = default_eps(n);
    let trace = regularise(a, &Rational::from(2i64), &eps)?;
    let b = &trace.b;
    let pop = popular_sums(b, &eps)?;
    let layer = dominant_difference_layer(&trace.rb)?;
    let e_b = additive_energy(b);
    let e3_b = energy_s(b, b, &Rational::from(3i64))?;
    let delta_bound = monomial(&[(p1, 2.0), (p2, 2.0), (b.len() as f64, 2.0), (t, -3.0)]) * eps.recip()?.to_f64() / e_b as f64;
    let e3_report = match branch {
        TheoremBranch::General => lemma22_bound_report(b, b, hyp, &Lemma22Branch::ThirdEnergy),
        TheoremBranch::Convex => lemma22_bound_report(a, b, None, &Lemma22Branch::ConvexEnergy { s: Rational::from(3i64) }),
    };
    report = report
        .with("eps", &eps)
        .with("iterations", trace.iterations())
        .with("b_size", b.len())
        .with("rb_size", trace.rb.len())
        .with("popular_sums", pop.members.len())
        .with("popular_mass_ok", pop.mass_bound_holds())
        .with("d_size", layer.d.len())
        .with("delta", layer.delta)
        .with("layer_constant", layer.constant())
        .with("energy_b", e_b)
        .with("e3_b", e3_b.as_u128())
        .with("delta_upper_bound", sig12(delta_bound))
        .with("delta_ratio", sig12(layer.delta as f64 / delta_bound));
    report = match e3_report {
        Ok(r) => report.with("e3_ratio", r.ratio),
        Err(e) => report.with("e3_ratio", e.to_string()),
    };
    Ok(report)
}
