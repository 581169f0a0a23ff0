//! Lines through the origin supporting `A × A`, bunches of consecutive
//! slopes, and the vector-sum collision counts built on them.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::energy::{dyadic_decompose, dyadic_from_entries, mult_energy, DyadicLayer};
use crate::error::{CoreError, Result};
use crate::numeric::{ceil_log2, monomial};
use crate::rational::Rational;
use crate::report::{InequalityReport, Relation};
use crate::set::{Op, RSet};

/// Largest `|A|` for the Katz–Koester check.
pub const KATZ_KOESTER_GATE: usize = 32;

pub type Point = (Rational, Rational);

/// The points of `A × A` on the line `y = λx`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlopeClass {
    pub lambda: Rational,
    /// `A_λ = A ∩ λ^{-1}A`, the x-coordinates.
    pub members: RSet,
}

impl SlopeClass {
    pub fn of(a: &RSet, lambda: &Rational) -> SlopeClass {
        SlopeClass { lambda: lambda.clone(), members: a.filter(|x| a.contains(&(lambda * x))) }
    }

    pub fn tau(&self) -> usize {
        self.members.len()
    }

    pub fn points(&self) -> Vec<Point> {
        self.members.iter().map(|x| (x.clone(), &self.lambda * x)).collect()
    }
}

/// One class per `λ ∈ A/A`, ordered by slope.
pub fn slope_classes(a: &RSet) -> Result<Vec<SlopeClass>> {
    a.require_positive()?;
    let mut by_slope: FxHashMap<Rational, Vec<Rational>> = FxHashMap::default();
    for x in a {
        for y in a {
            by_slope.entry(y / x).or_default().push(x.clone());
        }
    }
    let mut classes: Vec<SlopeClass> = by_slope
        .into_iter()
        .map(|(lambda, xs)| SlopeClass { lambda, members: RSet::from_sorted_unchecked(xs) })
        .collect();
    classes.sort_by(|p, q| p.lambda.cmp(&q.lambda));
    Ok(classes)
}

/// `N` consecutive slopes of a dyadic layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bunch {
    pub classes: Vec<SlopeClass>,
}

impl Bunch {
    pub fn slopes(&self) -> Vec<Rational> {
        self.classes.iter().map(|c| c.lambda.clone()).collect()
    }
}

/// Classes of a layer of the ratio map, ordered by slope.
pub fn layer_classes(a: &RSet, layer: &DyadicLayer) -> Vec<SlopeClass> {
    layer.members.iter().map(|l| SlopeClass::of(a, l)).collect()
}

/// `⌊|S|/N⌋` full bunches in slope order; the remainder is dropped.
pub fn partition_bunches(classes: &[SlopeClass], n: usize) -> Result<Vec<Bunch>> {
    if n < 2 || n > classes.len() {
        return Err(CoreError::BadN { n, layer: classes.len() });
    }
    debug_assert!(classes.windows(2).all(|w| w[0].lambda < w[1].lambda));
    Ok(classes
        .chunks_exact(n)
        .map(|c| Bunch { classes: c.to_vec() })
        .collect())
}

/// `{p + q : p on ℓ_{λi}, q on ℓ_{λj}}`, sorted.
pub fn vector_sums(ci: &SlopeClass, cj: &SlopeClass) -> Result<Vec<Point>> {
    if ci.lambda == cj.lambda {
        return Err(CoreError::SameSlope(ci.lambda.to_string()));
    }
    Ok(pair_sums(ci, cj))
}

fn pair_sums(ci: &SlopeClass, cj: &SlopeClass) -> Vec<Point> {
    let mut out = Vec::with_capacity(ci.tau() * cj.tau());
    for x in &ci.members {
        let y = &ci.lambda * x;
        for u in &cj.members {
            out.push((x + u, &y + &cj.lambda * u));
        }
    }
    out.sort_unstable();
    // distinct slopes make (x, u) ↦ sum injective
    debug_assert!(out.windows(2).all(|w| w[0] != w[1]));
    out
}

fn check_quadruple(c: [&SlopeClass; 4]) -> Result<()> {
    let l = |i: usize| &c[i].lambda;
    if l(2) == l(3) || l(0) == l(1) {
        return Err(CoreError::DegenerateSlopes(format!("{} {} {} {}", l(0), l(1), l(2), l(3))));
    }
    if (l(0) == l(2) && l(1) == l(3)) || (l(0) == l(3) && l(1) == l(2)) {
        return Err(CoreError::DegenerateSlopes("the two slope pairs coincide".into()));
    }
    Ok(())
}

/// `q(λ1,λ2,λ3,λ4)` as the size of the intersection of two vector-sum sets.
pub fn q_count_intersection(c1: &SlopeClass, c2: &SlopeClass, c3: &SlopeClass, c4: &SlopeClass) -> Result<u64> {
    check_quadruple([c1, c2, c3, c4])?;
    let (p, q) = (pair_sums(c1, c2), pair_sums(c3, c4));
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < p.len() && j < q.len() {
        match p[i].cmp(&q[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(n)
}

/// `q(λ1,λ2,λ3,λ4)` as the number of `(a1, a2)` for which
/// `a3 = ((λ1−λ4)a1 + (λ2−λ4)a2)/(λ3−λ4)` lies in `A_{λ3}` and
/// `a4 = a1 + a2 − a3` lies in `A_{λ4}`.
pub fn q_count_solutions(c1: &SlopeClass, c2: &SlopeClass, c3: &SlopeClass, c4: &SlopeClass) -> Result<u64> {
    check_quadruple([c1, c2, c3, c4])?;
    let den = &c3.lambda - &c4.lambda;
    let k1 = (&c1.lambda - &c4.lambda) / &den;
    let k2 = (&c2.lambda - &c4.lambda) / &den;
    let mut n = 0;
    for a1 in &c1.members {
        for a2 in &c2.members {
            let a3 = &k1 * a1 + &k2 * a2;
            if c3.members.contains(&a3) && c4.members.contains(&(a1 + a2 - &a3)) {
                n += 1;
            }
        }
    }
    Ok(n)
}

/// One nonzero entry of the q-table; pairs are unordered slope indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QEntry {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub q: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BunchStats {
    pub slopes: Vec<Rational>,
    pub taus: Vec<usize>,
    pub distinct_sums: u64,
    /// `Σ_{i<j} τ_i τ_j`.
    pub pair_sum_total: u64,
    /// `Σ q` over ordered slope quadruples with distinct unordered pairs.
    pub q_b: u64,
    /// For each `λ3`, `Σ_{λ1,λ2,λ4} q(λ1,λ2,λ3,λ4)` over the same range.
    pub marginals: Vec<u64>,
    pub q_table: Vec<QEntry>,
    /// Every vector sum lies in `(A+A) × (A+A)`; `None` when not checked.
    pub in_sumset_square: Option<bool>,
}

impl BunchStats {
    /// `distinct_sums ≥ Σ τ_iτ_j − Q_B`.
    pub fn inclusion_exclusion_holds(&self) -> bool {
        self.distinct_sums as i128 >= self.pair_sum_total as i128 - self.q_b as i128
    }

    /// The best `(λ1, λ2, λ4)` for a given `λ3` index, with its `q`.
    pub fn best_partners(&self, l3: usize) -> Option<((usize, usize, usize), u64)> {
        let mut best: Option<((usize, usize, usize), u64)> = None;
        for e in &self.q_table {
            for (mine, other) in [(e.first, e.second), (e.second, e.first)] {
                let l4 = if mine.0 == l3 {
                    mine.1
                } else if mine.1 == l3 {
                    mine.0
                } else {
                    continue;
                };
                let cand = ((other.0, other.1, l4), e.q);
                if best.as_ref().is_none_or(|b| cand.1 > b.1 || (cand.1 == b.1 && cand.0 < b.0)) {
                    best = Some(cand);
                }
            }
        }
        best
    }
}

type Pair = (usize, usize);

/// Collision statistics for one bunch. `sumset`, when given, is used to
/// membership-check every vector sum.
pub fn bunch_stats(bunch: &Bunch, sumset: Option<&RSet>) -> BunchStats {
    let cls = &bunch.classes;
    let mut producers: FxHashMap<Point, Vec<(u16, u16)>> = FxHashMap::default();
    let mut pair_sum_total = 0u64;
    for i in 0..cls.len() {
        for j in i + 1..cls.len() {
            pair_sum_total += (cls[i].tau() * cls[j].tau()) as u64;
            for p in pair_sums(&cls[i], &cls[j]) {
                producers.entry(p).or_default().push((i as u16, j as u16));
            }
        }
    }
    let mut q_b = 0u64;
    let mut marginals = vec![0u64; cls.len()];
    let mut table: FxHashMap<(Pair, Pair), u64> = FxHashMap::default();
    let mut in_square = true;
    for (p, pairs) in &producers {
        if let Some(s) = sumset {
            in_square &= s.contains(&p.0) && s.contains(&p.1);
        }
        let m = pairs.len() as u64;
        if m < 2 {
            continue;
        }
        // ordered (λ1,λ2) times ordered (λ3,λ4) with different unordered pairs
        q_b += 4 * m * (m - 1);
        for &(i, j) in pairs {
            marginals[i as usize] += 2 * (m - 1);
            marginals[j as usize] += 2 * (m - 1);
        }
        for (x, &(i, j)) in pairs.iter().enumerate() {
            for &(k, l) in &pairs[x + 1..] {
                let key = if (i, j) < (k, l) {
                    ((i as usize, j as usize), (k as usize, l as usize))
                } else {
                    ((k as usize, l as usize), (i as usize, j as usize))
                };
                *table.entry(key).or_insert(0) += 1;
            }
        }
    }
    let mut q_table: Vec<QEntry> = table
        .into_iter()
        .map(|((first, second), q)| QEntry { first, second, q })
        .collect();
    q_table.sort_by_key(|e| (e.first, e.second));
    BunchStats {
        slopes: bunch.slopes(),
        taus: cls.iter().map(SlopeClass::tau).collect(),
        distinct_sums: producers.len() as u64,
        pair_sum_total,
        q_b,
        marginals,
        q_table,
        in_sumset_square: sumset.map(|_| in_square),
    }
}

/// All vector sums of a list of bunches, deduplicated globally, against the
/// sum of per-bunch distinct counts.
pub fn cross_bunch_counts(bunches: &[Bunch]) -> (u64, u64) {
    let mut all: Vec<Point> = Vec::new();
    let mut per_bunch = 0u64;
    for b in bunches {
        let mut local: Vec<Point> = Vec::new();
        for i in 0..b.classes.len() {
            for j in i + 1..b.classes.len() {
                local.extend(pair_sums(&b.classes[i], &b.classes[j]));
            }
        }
        local.sort_unstable();
        local.dedup();
        per_bunch += local.len() as u64;
        all.extend(local);
    }
    all.sort_unstable();
    all.dedup();
    (all.len() as u64, per_bunch)
}

/// `K = |A+A|/|A|` and `M = |AA|/|A|`.
pub fn doubling_constants(a: &RSet) -> (Rational, Rational) {
    let n = Rational::from(a.len());
    (
        Rational::from(a.sumset(a).len()) / &n,
        Rational::from(a.prodset(a).len()) / &n,
    )
}

/// `N = max(2, ⌈C K^2 M ⌈log₂|A|⌉ / |A|⌉)`.
pub fn choose_n(a: &RSet, c: &Rational) -> Result<u64> {
    if !c.is_positive() {
        return Err(CoreError::BadParams(format!("C must be positive, got {c}")));
    }
    let (k, m) = doubling_constants(a);
    let log = Rational::from(ceil_log2(a.len() as u64) as u64);
    let raw = c * &k * &k * &m * &log / Rational::from(a.len());
    let n = raw.ceil();
    Ok(n.try_into().unwrap_or(u64::MAX).max(2))
}

/// `r_{AA/AA}(λ) = |{y ∈ AA : λy ∈ AA}|`.
pub fn ratio_realisations(aa: &RSet, lambda: &Rational) -> u64 {
    aa.iter().filter(|y| aa.contains(&(lambda * *y))).count() as u64
}

/// `r_{AA/AA}(λ) ≥ |A·A_λ|` for every `λ ∈ A/A`.
pub fn katz_koester_check(a: &RSet) -> Result<InequalityReport> {
    a.require_positive()?;
    if a.len() > KATZ_KOESTER_GATE {
        return Err(CoreError::ScaleTooLarge { what: "Katz-Koester check", size: a.len(), gate: KATZ_KOESTER_GATE });
    }
    let aa = a.prodset(a);
    let classes = slope_classes(a)?;
    let mut passing = 0u64;
    let mut worst: Option<(Rational, u64, u64)> = None;
    for c in &classes {
        let r = ratio_realisations(&aa, &c.lambda);
        let p = a.prodset(&c.members).len() as u64;
        if r >= p {
            passing += 1;
        }
        let slack = r as i64 - p as i64;
        if worst.as_ref().is_none_or(|w| slack < w.1 as i64 - w.2 as i64) {
            worst = Some((c.lambda.clone(), r, p));
        }
    }
    let (wl, wr, wp) = worst.expect("A/A is nonempty");
    Ok(InequalityReport::exact(
        "katz-koester",
        &Rational::from(passing),
        Relation::Eq,
        &Rational::from(classes.len()),
        "|A/A| slopes with r_{AA/AA}(l) >= |A A_l|",
    )
    .with("tightest_slope", wl)
    .with("tightest_r", wr)
    .with("tightest_product", wp))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineParams {
    /// Constant in the choice of `N`.
    pub c: Rational,
    /// `λ3` is rich when its marginal exceeds `eps·τ^2·N`.
    pub eps: Rational,
    pub n_override: Option<u64>,
    /// Use this dyadic layer of the ratio map instead of the dominant one.
    pub layer_override: Option<u32>,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams { c: Rational::ONE, eps: Rational::new(1, 8).expect("nonzero"), n_override: None, layer_override: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineStatus {
    Completed,
    /// The chosen layer has fewer than `N` slopes.
    LayerTooThin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionRegime {
    /// `Q_B ≤ N^2τ^2/8`.
    Few,
    /// `Q_B ≥ N^2τ^2/4`.
    Many,
    Between,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BunchRow {
    pub index: usize,
    pub first_slope: Rational,
    pub last_slope: Rational,
    pub distinct_sums: u64,
    pub pair_sum_total: u64,
    pub q_b: u64,
    pub regime: CollisionRegime,
    pub inclusion_exclusion: bool,
    pub in_sumset_square: bool,
    /// Slopes `λ3` whose marginal exceeds the threshold.
    pub rich: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeRow {
    pub lambda: Rational,
    pub tau: usize,
    /// `(λ1, λ2, λ4)` maximising the solution count.
    pub partners: (Rational, Rational, Rational),
    pub solutions: u64,
    pub popular_size: usize,
    pub popular_min_count: u64,
    /// `S / (2|A'_λ| ⌈log₂|A|⌉)`.
    pub popular_threshold: f64,
    /// `|A·A_λ|`.
    pub product: u64,
    pub popular_product: u64,
    /// `|A|^6 / (M^4 K^8 |S_τ|^{1/2} ⌈log₂|A|⌉^7)`.
    pub lower_bound: f64,
    pub ratio: f64,
    /// `|A A'_λ| · E^×(A, A'_λ) ≥ |A|^2|A'_λ|^2`.
    pub cauchy_schwarz_product: bool,
    /// `E^×(A, A'_λ)^2 ≤ E^×(A) E^×(A'_λ)`.
    pub cauchy_schwarz_energy: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerticalSlice {
    pub a0: Rational,
    /// `{λ a0 : λ ∈ S'_τ, λ a0 ∈ A}`.
    pub b: RSet,
    /// `|B| ≥ τ|S'_τ|/|A|`.
    pub average_bound: bool,
    /// `(λ, r_{AA/AA}(λ), |A·A_λ|)` for the slopes behind `B`.
    pub ratio_counts: Vec<(Rational, u64, u64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub size: usize,
    pub sumset: usize,
    pub product_set: usize,
    pub k: Rational,
    pub m: Rational,
    pub mult_energy: u128,
    pub layer_j: u32,
    pub tau: u64,
    pub layer_size: usize,
    /// `E^×(A) ≤ 4|S_τ|(2τ)^2⌈log₂|A|⌉`.
    pub layer_supports_energy: bool,
    pub n: u64,
    pub params: PipelineParams,
    pub n_below_sqrt: bool,
    pub status: PipelineStatus,
    pub bunches: Vec<BunchRow>,
    /// At least half of the bunches have many collisions.
    pub collision_branch: bool,
    pub s_prime: Vec<Rational>,
    /// `|S'_τ| ≥ |S_τ|/64`; checked only on the collision branch.
    pub s_prime_large: Option<bool>,
    /// `S = τ^2/(2N^2)`.
    pub s_threshold: Rational,
    pub slopes: Vec<SlopeRow>,
    pub slice: Option<VerticalSlice>,
}

fn mult_energy_pair(a: &RSet, b: &RSet) -> u128 {
    a.count_profile(b, Op::Product)
        .expect("products never fail")
        .iter()
        .map(|&c| c as u128 * c as u128)
        .sum()
}

/// Runs the bunching argument on `A` with every intermediate quantity exact.
pub fn proposition_main_pipeline(a: &RSet, params: &PipelineParams) -> Result<PipelineReport> {
    a.require_positive()?;
    if a.len() < 8 {
        return Err(CoreError::TooSmall { len: a.len(), min: 8 });
    }
    let n_a = a.len();
    let log = ceil_log2(n_a as u64) as u64;
    let (k, m) = doubling_constants(a);
    let energy = mult_energy(a)?.as_u128().expect("integer energy");
    let ratio_map = a.realisations(a, Op::Ratio)?;
    let decomposition = dyadic_decompose(&ratio_map, 2)?;
    let layer = match params.layer_override {
        Some(j) => decomposition
            .layers
            .iter()
            .find(|l| l.j == j)
            .ok_or_else(|| CoreError::BadParams(format!("no dyadic layer j = {j}")))?,
        None => decomposition.dominant_layer(),
    };
    let tau = layer.tau();
    let support = 4u128 * layer.len() as u128 * (4 * tau as u128 * tau as u128) * log.max(1) as u128 >= energy;
    let n = match params.n_override {
        Some(n) => n,
        None => choose_n(a, &params.c)?,
    };
    let mut report = PipelineReport {
        size: n_a,
        sumset: a.sumset(a).len(),
        product_set: a.prodset(a).len(),
        k: k.clone(),
        m: m.clone(),
        mult_energy: energy,
        layer_j: layer.j,
        tau,
        layer_size: layer.len(),
        layer_supports_energy: support,
        n,
        params: params.clone(),
        n_below_sqrt: (n as u128) * (n as u128) < n_a as u128,
        status: PipelineStatus::LayerTooThin,
        bunches: Vec::new(),
        collision_branch: false,
        s_prime: Vec::new(),
        s_prime_large: None,
        s_threshold: Rational::from(tau * tau) / Rational::from(2 * n * n),
        slopes: Vec::new(),
        slice: None,
    };
    if (layer.len() as u64) < n || n < 2 {
        return Ok(report);
    }
    report.status = PipelineStatus::Completed;
    let n_us = n as usize;
    let classes = layer_classes(a, layer);
    let bunches = partition_bunches(&classes, n_us)?;
    let sumset = a.sumset(a);
    let t2 = Rational::from(tau * tau);
    let nn = Rational::from(n * n);
    let few = &nn * &t2 / Rational::from(8i64);
    let many = &nn * &t2 / Rational::from(4i64);
    let rich_threshold = &params.eps * &t2 * Rational::from(n);
    let mut stats = Vec::with_capacity(bunches.len());
    for (index, b) in bunches.iter().enumerate() {
        let s = bunch_stats(b, Some(&sumset));
        let qb = Rational::from(s.q_b);
        let regime = if qb <= few {
            CollisionRegime::Few
        } else if qb >= many {
            CollisionRegime::Many
        } else {
            CollisionRegime::Between
        };
        let rich: Vec<Rational> = s
            .marginals
            .iter()
            .zip(&s.slopes)
            .filter(|(mg, _)| Rational::from(**mg) > rich_threshold)
            .map(|(_, l)| l.clone())
            .collect();
        report.bunches.push(BunchRow {
            index,
            first_slope: s.slopes[0].clone(),
            last_slope: s.slopes[s.slopes.len() - 1].clone(),
            distinct_sums: s.distinct_sums,
            pair_sum_total: s.pair_sum_total,
            q_b: s.q_b,
            regime,
            inclusion_exclusion: s.inclusion_exclusion_holds(),
            in_sumset_square: s.in_sumset_square.unwrap_or(false),
            rich,
        });
        stats.push(s);
    }
    let many_count = report.bunches.iter().filter(|b| b.regime == CollisionRegime::Many).count();
    report.collision_branch = 2 * many_count >= report.bunches.len();
    let keep = |row: &BunchRow| !report.collision_branch || row.regime == CollisionRegime::Many;
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    for (bi, row) in report.bunches.iter().enumerate() {
        if !keep(row) {
            continue;
        }
        for l in &row.rich {
            let li = stats[bi].slopes.iter().position(|x| x == l).expect("slope of bunch");
            chosen.push((bi, li));
        }
    }
    report.s_prime = chosen.iter().map(|&(b, l)| stats[b].slopes[l].clone()).collect();
    if report.collision_branch {
        report.s_prime_large = Some(64 * report.s_prime.len() >= layer.len());
    }

    let lower_bound = monomial(&[
        (n_a as f64, 6.0),
        (m.to_f64(), -4.0),
        (k.to_f64(), -8.0),
        (layer.len() as f64, -0.5),
        (log.max(1) as f64, -7.0),
    ]);
    let e_a = energy;
    for &(bi, li) in &chosen {
        let Some(((i1, i2, i4), solutions)) = stats[bi].best_partners(li) else { continue };
        let cls = &bunches[bi].classes;
        let (c1, c2, c3, c4) = (&cls[i1], &cls[i2], &cls[li], &cls[i4]);
        let den = &c3.lambda - &c4.lambda;
        let k1 = (&c1.lambda - &c4.lambda) / &den;
        let k2 = (&c4.lambda - &c2.lambda) / &den;
        // r(a) for a in A_λ as k1·a1 − k2·a2
        let mut counts: FxHashMap<Rational, u64> = FxHashMap::default();
        for a1 in &c1.members {
            for a2 in &c2.members {
                let v = &k1 * a1 - &k2 * a2;
                if c3.members.contains(&v) {
                    *counts.entry(v).or_insert(0) += 1;
                }
            }
        }
        let mut entries: Vec<(Rational, u64)> = counts.into_iter().collect();
        entries.sort();
        let (popular, popular_min) = if entries.is_empty() {
            (RSet::empty(), 0)
        } else {
            let d = dyadic_from_entries(&entries, 0)?;
            // layer with the largest share of solutions
            let best = d
                .layers
                .iter()
                .max_by(|x, y| {
                    let sx: u64 = x.counts.iter().sum();
                    let sy: u64 = y.counts.iter().sum();
                    sx.cmp(&sy).then(y.j.cmp(&x.j))
                })
                .expect("nonempty");
            (best.members.clone(), best.counts.iter().copied().min().unwrap_or(0))
        };
        let s_val = report.s_threshold.to_f64();
        let popular_threshold = if popular.is_empty() {
            f64::INFINITY
        } else {
            s_val / (2.0 * popular.len() as f64 * log.max(1) as f64)
        };
        let product = a.prodset(&c3.members).len() as u64;
        let (popular_product, cs1, cs2) = if popular.is_empty() {
            (0, true, true)
        } else {
            let pp = a.prodset(&popular).len() as u64;
            let e_ap = mult_energy_pair(a, &popular);
            let e_p = mult_energy(&popular)?.as_u128().expect("integer energy");
            let sq = |x: usize| (x as u128) * (x as u128);
            let cs1 = pp as u128 * e_ap >= sq(n_a) * sq(popular.len());
            let cs2 = num_bigint::BigUint::from(e_ap).pow(2) <= num_bigint::BigUint::from(e_a) * e_p;
            (pp, cs1, cs2)
        };
        report.slopes.push(SlopeRow {
            lambda: c3.lambda.clone(),
            tau: c3.tau(),
            partners: (c1.lambda.clone(), c2.lambda.clone(), c4.lambda.clone()),
            solutions,
            popular_size: popular.len(),
            popular_min_count: popular_min,
            popular_threshold,
            product,
            popular_product,
            lower_bound,
            ratio: crate::numeric::sig12(product as f64 / lower_bound),
            cauchy_schwarz_product: cs1,
            cauchy_schwarz_energy: cs2,
        });
    }

    if !report.s_prime.is_empty() {
        let s_prime: Vec<SlopeClass> = chosen.iter().map(|&(b, l)| bunches[b].classes[l].clone()).collect();
        let mut best: Option<(Rational, Vec<&SlopeClass>)> = None;
        for a0 in a {
            let hits: Vec<&SlopeClass> = s_prime.iter().filter(|c| c.members.contains(a0)).collect();
            if best.as_ref().is_none_or(|b| hits.len() > b.1.len()) {
                best = Some((a0.clone(), hits));
            }
        }
        let (a0, hits) = best.expect("A nonempty");
        let aa = a.prodset(a);
        let b = RSet::collect_from(hits.iter().map(|c| &c.lambda * &a0));
        let points: usize = s_prime.iter().map(SlopeClass::tau).sum();
        report.slice = Some(VerticalSlice {
            average_bound: b.len() * n_a >= points,
            ratio_counts: hits
                .iter()
                .map(|c| (c.lambda.clone(), ratio_realisations(&aa, &c.lambda), a.prodset(&c.members).len() as u64))
                .collect(),
            a0,
            b,
        });
    }
    Ok(report)
}
