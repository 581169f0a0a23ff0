//! Named checks: what each one runs, which sets it accepts and whether its
//! verdict is asserted.

use serde::{Deserialize, Serialize};
use sumprodlab_core::aaaa::{self, VectorSelector};
use sumprodlab_core::bunching::{
    self, bunch_stats, layer_classes, partition_bunches, proposition_main_pipeline, PipelineParams, PipelineStatus,
    SlopeClass,
};
use sumprodlab_core::energy::{self, additive_energy, dyadic_decompose, mult_energy, popular_sums};
use sumprodlab_core::error::CoreError;
use sumprodlab_core::exponents::{self, ExponentVector, Symbol};
use sumprodlab_core::incidence::{
    count_difference_solutions, lemma22_bound_report, szemeredi_trotter_report, Lemma22Branch, Line, LineFamily,
    ProductHypothesis,
};
use sumprodlab_core::numeric::ceil_log2;
use sumprodlab_core::regularise::{
    self, default_eps, dominant_difference_layer, rich_coordinate_counts, theorem_five_report, truism_class_bound,
    TheoremBranch,
};
use sumprodlab_core::report::{Relation, Verdict};
use sumprodlab_core::{q, InequalityReport, Op, RSet, Rational};

use crate::corpus::Fixture;

type CoreResult<T> = sumprodlab_core::Result<T>;

/// Whether a check's verdicts can fail a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Asserted,
    ReportOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    PerSet,
    /// Runs once per run, independent of the corpus.
    SetFree,
    /// Runs only on corpus items with recorded values.
    Fixture,
}

/// Tunable constants shared by all checks; part of every cache key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    /// Constant in the bunch size `N`.
    pub c: Rational,
    /// Overrides the per-set default `ε` where a check uses one.
    pub eps: Option<Rational>,
}

impl Default for Params {
    fn default() -> Self {
        Params { c: Rational::ONE, eps: None }
    }
}

impl Params {
    fn eps_for(&self, n: usize) -> Rational {
        self.eps.clone().unwrap_or_else(|| default_eps(n))
    }
}

pub struct Input<'a> {
    pub set: &'a RSet,
    pub expect: Option<&'a Fixture>,
}

pub type RunFn = fn(&Input, &Params) -> CoreResult<Vec<InequalityReport>>;

pub struct Check {
    pub id: &'static str,
    pub policy: Policy,
    pub scope: Scope,
    /// Statements this check covers, from [`IN_SCOPE`].
    pub covers: &'static [&'static str],
    pub min_size: usize,
    pub max_size: Option<usize>,
    pub positive: bool,
    pub run: RunFn,
}

impl std::fmt::Debug for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Check").field("id", &self.id).field("policy", &self.policy).finish()
    }
}

impl Check {
    /// Why `set` falls outside this check's gates, if it does.
    pub fn gate(&self, set: &RSet) -> Option<String> {
        let n = set.len();
        if n < self.min_size {
            return Some(format!("{}: |A| = {n} below minimum {}", self.id, self.min_size));
        }
        if let Some(max) = self.max_size.filter(|&m| n > m) {
            return Some(format!("{}: |A| = {n} exceeds gate {max}", self.id));
        }
        if self.positive && !set.is_positive() {
            return Some(format!("{}: needs a set of positive rationals", self.id));
        }
        None
    }
}

/// Corpus-wide gate for the fixed-vector construction, which enumerates
/// `|A/A|·|A|^2` vector sums.
pub const FIXED_VECTOR_GATE: usize = 32;

/// Every statement the registry must cover, each by exactly one check.
pub const IN_SCOPE: &[&str] = &[
    "mult-energy-vs-sumset",
    "mult-energy-vs-product-set",
    "mult-energy-vs-ratio-set",
    "ratio-count-sum",
    "ratio-count-squares",
    "difference-solution-count",
    "energy-layer-reconstruction",
    "dominant-ratio-layer",
    "katz-koester-inclusion",
    "point-line-incidences",
    "difference-solutions",
    "popular-differences",
    "third-energy",
    "fractional-energy",
    "convex-difference-solutions",
    "convex-energy",
    "few-products-many-sums",
    "popular-sum-mass",
    "rich-coordinates",
    "regularisation",
    "truism",
    "difference-layer-support",
    "sumset-product-hypothesis",
    "sumset-convex",
    "bunch-inclusion-exclusion",
    "bunch-sums-in-sumset-square",
    "popular-slope-subsets",
    "sum-product-pipeline",
    "collision-count",
    "cross-bunch-distinct",
    "fixed-vector-sums",
    "dot-product-bunching",
    "dot-product-difference-layer",
    "sum-product-exponent",
    "dot-product-exponent",
    "sumset-exponents",
    "convex-exponent",
    "prior-comparison",
];

const fn per_set(
    id: &'static str,
    policy: Policy,
    covers: &'static [&'static str],
    min_size: usize,
    max_size: Option<usize>,
    positive: bool,
    run: RunFn,
) -> Check {
    Check { id, policy, scope: Scope::PerSet, covers, min_size, max_size, positive, run }
}

pub const CHECKS: &[Check] = &[
    per_set("solymosi", Policy::Asserted, &["mult-energy-vs-sumset"], 2, None, true, run_solymosi),
    per_set(
        "cauchy-schwarz",
        Policy::Asserted,
        &["mult-energy-vs-product-set", "mult-energy-vs-ratio-set"],
        1,
        None,
        true,
        run_cauchy_schwarz,
    ),
    per_set(
        "realisation-identities",
        Policy::Asserted,
        &["ratio-count-sum", "ratio-count-squares", "difference-solution-count", "energy-layer-reconstruction"],
        1,
        None,
        true,
        run_identities,
    ),
    per_set("dyadic-ratio-layers", Policy::Asserted, &["dominant-ratio-layer"], 2, None, true, run_ratio_layers),
    per_set(
        "katz-koester",
        Policy::Asserted,
        &["katz-koester-inclusion"],
        1,
        Some(bunching::KATZ_KOESTER_GATE),
        true,
        run_katz_koester,
    ),
    per_set("incidence-bound", Policy::ReportOnly, &["point-line-incidences"], 2, Some(64), true, run_incidences),
    per_set(
        "difference-bounds",
        Policy::ReportOnly,
        &[
            "difference-solutions",
            "popular-differences",
            "third-energy",
            "fractional-energy",
            "convex-difference-solutions",
            "convex-energy",
        ],
        2,
        Some(128),
        true,
        run_difference_bounds,
    ),
    per_set("fpms-energy", Policy::ReportOnly, &["few-products-many-sums"], 2, Some(128), true, run_fpms),
    per_set(
        "popular-sums",
        Policy::Asserted,
        &["popular-sum-mass", "rich-coordinates"],
        2,
        None,
        false,
        run_popular_sums,
    ),
    per_set("regularisation", Policy::Asserted, &["regularisation"], 2, Some(128), false, run_regularisation),
    per_set(
        "truism-classes",
        Policy::Asserted,
        &["truism"],
        2,
        Some(regularise::TRUISM_GATE),
        false,
        run_truism,
    ),
    per_set("difference-layer", Policy::Asserted, &["difference-layer-support"], 2, None, false, run_difference_layer),
    per_set(
        "sumset-theorem",
        Policy::ReportOnly,
        &["sumset-product-hypothesis", "sumset-convex"],
        4,
        Some(128),
        true,
        run_sumset_theorem,
    ),
    per_set(
        "bunching-pipeline",
        Policy::Asserted,
        &["bunch-inclusion-exclusion", "bunch-sums-in-sumset-square", "popular-slope-subsets", "sum-product-pipeline"],
        8,
        Some(64),
        true,
        run_pipeline,
    ),
    per_set(
        "collision-counts",
        Policy::Asserted,
        &["collision-count", "cross-bunch-distinct"],
        4,
        Some(12),
        true,
        run_collisions,
    ),
    per_set(
        "fixed-vector-sums",
        Policy::Asserted,
        &["fixed-vector-sums"],
        2,
        Some(FIXED_VECTOR_GATE),
        true,
        run_balog,
    ),
    per_set(
        "dot-products",
        Policy::ReportOnly,
        &["dot-product-bunching", "dot-product-difference-layer"],
        2,
        Some(aaaa::BALOG_GATE),
        true,
        run_dot_products,
    ),
    Check {
        id: "exponent-algebra",
        policy: Policy::Asserted,
        scope: Scope::SetFree,
        covers: &["sum-product-exponent", "dot-product-exponent", "sumset-exponents", "convex-exponent", "prior-comparison"],
        min_size: 0,
        max_size: None,
        positive: false,
        run: run_exponents,
    },
    Check {
        id: "fixture",
        policy: Policy::Asserted,
        scope: Scope::Fixture,
        covers: &[],
        min_size: 1,
        max_size: None,
        positive: false,
        run: run_fixture,
    },
];

pub fn find(id: &str) -> Option<&'static Check> {
    CHECKS.iter().find(|c| c.id == id)
}

/// Resolves a comma-separated filter; `None` or `all` selects everything.
pub fn select(filter: Option<&str>) -> crate::Result<Vec<&'static Check>> {
    match filter {
        None | Some("all") => Ok(CHECKS.iter().collect()),
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|id| find(id).ok_or_else(|| crate::HarnessError::UnknownCheck(id.to_string())))
            .collect(),
    }
}

fn int(n: impl Into<Rational>) -> Rational {
    n.into()
}

/// Side conditions and hypotheses of report-only bounds decide applicability
/// rather than failure.
fn applicable(r: CoreResult<InequalityReport>) -> CoreResult<Option<InequalityReport>> {
    match r {
        Ok(r) => Ok(Some(r)),
        Err(CoreError::SideConditionFailed(_) | CoreError::HypothesisFailed { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn run_solymosi(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    Ok(vec![energy::solymosi_report(i.set)?])
}

fn run_cauchy_schwarz(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    Ok(energy::cauchy_schwarz_reports(i.set)?.to_vec())
}

fn run_identities(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    let a = i.set;
    let n = int(a.len());
    let e = mult_energy(a)?.value().clone();
    let classes = bunching::slope_classes(a)?;
    let tau_sum: u64 = classes.iter().map(|c| c.tau() as u64).sum();
    let tau_sq: u128 = classes.iter().map(|c| (c.tau() as u128).pow(2)).sum();
    let ratio_map = a.realisations(a, Op::Ratio)?;
    let mut out = vec![
        InequalityReport::exact("ratio-count-sum", &int(tau_sum), Relation::Eq, &(&n * &n), "|A|^2"),
        InequalityReport::exact("ratio-count-squares", &wide(tau_sq), Relation::Eq, &e, "E^x(A)")
            .with("ratio_set", classes.len()),
    ];
    if a.len() <= energy::QUADRUPLE_GATE {
        let quad = energy::mult_energy_quadruples(a)?;
        out.push(InequalityReport::exact("mult-energy-dual", &int(quad), Relation::Eq, &e, "E^x(A) from r^2"));
    }
    let ratio_layers = dyadic_decompose(&ratio_map, 2)?.sum_of_squares();
    out.push(InequalityReport::exact("ratio-layer-reconstruction", &wide(ratio_layers), Relation::Eq, &e, "E^x(A)"));
    let diff_map = a.realisations(a, Op::Difference)?;
    let e2 = additive_energy(a);
    out.push(InequalityReport::exact(
        "difference-layer-reconstruction",
        &wide(dyadic_decompose(&diff_map, 2)?.sum_of_squares()),
        Relation::Eq,
        &wide(e2),
        "E(A)",
    ));
    let b = a.dilate(&q(1, 2))?.union(&a.filter(|x| x.is_integer()));
    let c = a.diffset(&b);
    out.push(
        InequalityReport::exact(
            "difference-solution-count",
            &int(count_difference_solutions(a, &b, &c)),
            Relation::Eq,
            &(&n * &int(b.len())),
            "|A||B|",
        )
        .with("B", b.len()),
    );
    Ok(out)
}

fn run_ratio_layers(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    let a = i.set;
    let e = mult_energy(a)?.as_u128().expect("integer energy");
    let dec = dyadic_decompose(&a.realisations(a, Op::Ratio)?, 2)?;
    let l = dec.dominant_layer();
    let log = ceil_log2(a.len() as u64).max(1) as u128;
    let rhs = 4 * log * l.len() as u128 * (1u128 << (2 * l.j));
    Ok(vec![InequalityReport::exact(
        "dominant-ratio-layer",
        &wide(e),
        Relation::Le,
        &wide(rhs),
        "4 ceil(log2|A|) |S_tau| (2 tau)^2",
    )
    .with("j", l.j)
    .with("tau", l.tau())
    .with("layer_size", l.len())
    .with("layers", dec.layers.len())
    .with("counts_in_range", dec.layers.iter().all(|l| l.counts_in_range()))])
}

fn wide(x: u128) -> Rational {
    x.to_string().parse().expect("decimal integer")
}

fn run_katz_koester(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    Ok(vec![bunching::katz_koester_check(i.set)?])
}

/// Lines `y = ax + b` with the first few `a ∈ A` as slopes and all `b ∈ A`.
fn grid_lines_family(a: &RSet) -> CoreResult<LineFamily> {
    let lines = a
        .iter()
        .take(8)
        .flat_map(|m| a.iter().map(move |b| Line::new(m.clone(), b.clone())))
        .collect();
    LineFamily::affine(lines)
}

fn run_incidences(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    let a = i.set;
    let b = a.sumset(a);
    Ok(vec![szemeredi_trotter_report(a, &b, &grid_lines_family(a)?)?])
}

fn run_difference_bounds(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    let a = i.set;
    let hyp = ProductHypothesis::ratio_certificate(a)?;
    let mut branches = vec![
        Lemma22Branch::Solutions { c: a.clone() },
        Lemma22Branch::PopularDifferences { k: 2 },
        Lemma22Branch::ThirdEnergy,
        Lemma22Branch::Energy { s: q(3, 2) },
    ];
    if a.is_convex()? {
        branches.extend([
            Lemma22Branch::ConvexSolutions { c: a.clone() },
            Lemma22Branch::ConvexEnergy { s: q(3, 2) },
            Lemma22Branch::ConvexEnergy { s: int(3i64) },
        ]);
    }
    let mut out = Vec::new();
    for br in &branches {
        if let Some(r) = applicable(lemma22_bound_report(a, a, Some(&hyp), br))? {
            out.push(r);
        }
    }
    Ok(out)
}

fn run_fpms(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    let a = i.set;
    let r = energy::fpms_bound_report(a, &a.sumset(a), a, a.len() as u64)?;
    Ok(vec![r.with("pi1", "A+A").with("pi2", "A")])
}

fn run_popular_sums(i: &Input, p: &Params) -> CoreResult<Vec<InequalityReport>> {
    let a = i.set;
    let n = int(a.len());
    let mut eps_list = vec![q(1, 8), q(1, 4)];
    let own = p.eps_for(a.len());
    if !eps_list.contains(&own) {
        eps_list.push(own);
    }
    let mut out = Vec::new();
    for eps in eps_list {
        let pop = popular_sums(a, &eps)?;
        out.push(
            InequalityReport::exact(
                "popular-sum-mass",
                &int(pop.mass),
                Relation::Ge,
                &((Rational::ONE - &eps) * &n * &n),
                "(1-eps)|A|^2",
            )
            .with("eps", &eps)
            .with("popular", pop.members.len()),
        );
        let rich = rich_coordinate_counts(a, &eps)?;
        out.push(
            InequalityReport::exact(
                "rich-coordinates",
                &int(rich.members.len()),
                Relation::Ge,
                &((Rational::ONE - int(2i64) * &eps) * &n),
                "(1-2eps)|A|",
            )
            .with("eps", &eps),
        );
    }
    Ok(out)
}

fn run_regularisation(i: &Input, p: &Params) -> CoreResult<Vec<InequalityReport>> {
    let a = i.set;
    let eps = p.eps_for(a.len());
    let cap = int(sumprodlab_core::numeric::floor_log2(a.len() as u64) as u64);
    let mut out = Vec::new();
    for s in [q(3, 2), int(2i64), int(3i64)] {
        let t = regularise::regularise(a, &s, &eps)?;
        let tag = |r: InequalityReport| r.with("s", &s).with("eps", &eps);
        out.push(tag(InequalityReport::exact(
            "regularisation-iterations",
            &int(t.iterations()),
            Relation::Le,
            &cap,
            "floor(log2|A|)",
        )));
        out.push(tag(InequalityReport::exact(
            "regularisation-cardinality",
            &int(t.b.len()),
            Relation::Ge,
            &((Rational::ONE - int(2i64) * &t.c1) * int(a.len())),
            "(1 - 2 eps floor(log2|A|))|A|",
        )
        .with("rule_eps_bound", t.rule_eps_bound_holds())
        .with("rule_two_eps_bound", t.rule_two_eps_bound_holds())));
        out.push(tag(InequalityReport::exact(
            "regularisation-energy",
            t.energy_rb.value(),
            Relation::Ge,
            &(&t.c2 * &t.energy_b.upper()),
            "(1-2eps) e^(1-s) E_s(B), e^(1-s) rounded down",
        )
        .with("b", t.b.len())
        .with("rb", t.rb.len())));
    }
    Ok(out)
}

fn run_truism(i: &Input, p: &Params) -> CoreResult<Vec<InequalityReport>> {
    let b = i.set;
    let full = truism_class_bound(b, None)?;
    let d = dominant_difference_layer(b)?.d;
    let pop = popular_sums(b, &p.eps_for(b.len()))?.members;
    let restricted = truism_class_bound(b, Some((&d, &pop)))?;
    Ok(vec![
        InequalityReport::exact("truism", &wide(full.q), Relation::Le, &wide(full.e3), "E_3(B)")
            .with("classes", full.classes)
            .with("triples", full.triples),
        InequalityReport::exact("truism-restricted", &wide(restricted.q), Relation::Le, &wide(restricted.e3), "E_3(B)")
            .with("classes", restricted.classes)
            .with("triples", restricted.triples)
            .with("D", d.len())
            .with("P", pop.len()),
    ])
}

fn run_difference_layer(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    let l = dominant_difference_layer(i.set)?;
    let log = ceil_log2(i.set.len() as u64).max(1) as u128;
    Ok(vec![InequalityReport::exact(
        "difference-layer-support",
        &wide(l.energy),
        Relation::Le,
        &wide(4 * log * l.weight()),
        "4 ceil(log2|X|) Delta^2 |D|",
    )
    .with("D", l.d.len())
    .with("delta", l.delta)
    .with("counts_in_range", l.counts_in_range())
    .with("constant", l.constant())])
}

fn run_sumset_theorem(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    let a = i.set;
    let hyp = ProductHypothesis::ratio_certificate(a)?;
    let mut out = vec![theorem_five_report(a, Some(&hyp), TheoremBranch::General)?];
    if let Some(r) = applicable(theorem_five_report(a, None, TheoremBranch::Convex))? {
        out.push(r);
    }
    Ok(out)
}

/// Layer `j` and bunch size used when the default parameters leave no bunch:
/// the heaviest dyadic layer with at least three slopes, in bunches of three.
fn fallback_layer(a: &RSet) -> CoreResult<Option<u32>> {
    let dec = dyadic_decompose(&a.realisations(a, Op::Ratio)?, 2)?;
    Ok(dec.layers.iter().filter(|l| l.len() >= 3).max_by(|x, y| x.weight(2).cmp(&y.weight(2)).then(y.j.cmp(&x.j))).map(|l| l.j))
}

fn run_pipeline(i: &Input, p: &Params) -> CoreResult<Vec<InequalityReport>> {
    let a = i.set;
    let base = PipelineParams { c: p.c.clone(), ..Default::default() };
    let mut rep = proposition_main_pipeline(a, &base)?;
    let mut overridden = false;
    if rep.status == PipelineStatus::LayerTooThin {
        if let Some(j) = fallback_layer(a)? {
            let params = PipelineParams { n_override: Some(3), layer_override: Some(j), ..base };
            rep = proposition_main_pipeline(a, &params)?;
            overridden = true;
        }
    }
    let ctx = |r: InequalityReport| {
        r.with("status", rep.status)
            .with("overridden", overridden)
            .with("n", rep.n)
            .with("layer_j", rep.layer_j)
            .with("layer_size", rep.layer_size)
    };
    let mut out = vec![ctx(InequalityReport::exact(
        "dominant-layer-supports-energy",
        &int(rep.layer_supports_energy as u64),
        Relation::Eq,
        &Rational::ONE,
        "E^x(A) <= 4|S_tau|(2tau)^2 ceil(log2|A|)",
    ))];
    if rep.status == PipelineStatus::Completed {
        let nb = int(rep.bunches.len());
        let ie = rep.bunches.iter().filter(|b| b.inclusion_exclusion).count();
        let sq = rep.bunches.iter().filter(|b| b.in_sumset_square).count();
        out.push(ctx(InequalityReport::exact(
            "bunch-inclusion-exclusion",
            &int(ie),
            Relation::Eq,
            &nb,
            "bunches with distinct sums >= sum tau_i tau_j - Q_B",
        )));
        out.push(ctx(InequalityReport::exact(
            "bunch-sums-in-sumset-square",
            &int(sq),
            Relation::Eq,
            &nb,
            "bunches whose vector sums lie in (A+A)x(A+A)",
        )));
        if !rep.slopes.is_empty() {
            let cs = rep.slopes.iter().filter(|s| s.cauchy_schwarz_product && s.cauchy_schwarz_energy).count();
            out.push(ctx(InequalityReport::exact(
                "popular-slope-subsets",
                &int(cs),
                Relation::Eq,
                &int(rep.slopes.len()),
                "slopes with both Cauchy-Schwarz relations",
            )));
        }
        let worst = rep.slopes.iter().min_by(|x, y| x.ratio.total_cmp(&y.ratio));
        out.push(ctx(match worst {
            Some(s) => InequalityReport::profile(
                "sum-product-pipeline",
                &int(s.product),
                Relation::Ge,
                s.lower_bound,
                "|A|^6/(M^4 K^8 |S_tau|^(1/2) ceil(log2|A|)^7)",
            )
            .with("lambda", &s.lambda)
            .with("collision_branch", rep.collision_branch),
            None => InequalityReport::profile_exact(
                "sum-product-pipeline",
                &int(rep.bunches.len()),
                Relation::Ge,
                &Rational::ONE,
                "bunches formed",
            )
            .with("collision_branch", rep.collision_branch),
        }));
    } else {
        out.push(ctx(InequalityReport::profile_exact(
            "sum-product-pipeline",
            &int(rep.layer_size),
            Relation::Ge,
            &int(rep.n),
            "N",
        )));
    }
    Ok(out)
}

/// Slopes of the most populous dyadic layer of the ratio map, at most eight.
fn collision_classes(a: &RSet) -> CoreResult<Vec<SlopeClass>> {
    let dec = dyadic_decompose(&a.realisations(a, Op::Ratio)?, 2)?;
    let layer = dec.layers.iter().max_by_key(|l| (l.len(), std::cmp::Reverse(l.j))).expect("nonempty decomposition");
    Ok(layer_classes(a, layer).into_iter().take(8).collect())
}

/// `(agreeing, total)` over ordered quadruples of classes for which `q` is defined.
pub fn q_agreement(classes: &[SlopeClass]) -> CoreResult<(u64, u64)> {
    let (mut agree, mut total) = (0, 0);
    let k = classes.len();
    for i1 in 0..k {
        for i2 in 0..k {
            for i3 in 0..k {
                for i4 in 0..k {
                    let c = [&classes[i1], &classes[i2], &classes[i3], &classes[i4]];
                    match bunching::q_count_intersection(c[0], c[1], c[2], c[3]) {
                        Ok(x) => {
                            total += 1;
                            agree += (bunching::q_count_solutions(c[0], c[1], c[2], c[3])? == x) as u64;
                        }
                        Err(CoreError::DegenerateSlopes(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    Ok((agree, total))
}

fn run_collisions(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    let a = i.set;
    let classes = collision_classes(a)?;
    let (agree, total) = q_agreement(&classes)?;
    let mut out = vec![InequalityReport::exact(
        "collision-count",
        &int(agree),
        Relation::Eq,
        &int(total),
        "quadruples where both counts of q agree",
    )
    .with("slopes", classes.len())];
    if classes.len() >= 2 {
        let n = if classes.len() >= 4 { 2 } else { classes.len() };
        let bunches = partition_bunches(&classes, n)?;
        let sumset = a.sumset(a);
        let ie = bunches.iter().filter(|b| bunch_stats(b, Some(&sumset)).inclusion_exclusion_holds()).count();
        out.push(
            InequalityReport::exact(
                "collision-inclusion-exclusion",
                &int(ie),
                Relation::Eq,
                &int(bunches.len()),
                "bunches with distinct sums >= sum tau_i tau_j - Q_B",
            )
            .with("n", n),
        );
        let (global, per_bunch) = bunching::cross_bunch_counts(&bunches);
        out.push(
            InequalityReport::exact(
                "cross-bunch-distinct",
                &int(global),
                Relation::Eq,
                &int(per_bunch),
                "sum over bunches of distinct vector sums",
            )
            .with("bunches", bunches.len()),
        );
    }
    Ok(out)
}

fn run_balog(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    let b = aaaa::balog_construction(i.set, VectorSelector::Smallest)?;
    let distinct = InequalityReport::exact(
        "balog-distinct",
        &int(b.distinct_sums),
        Relation::Eq,
        &int(b.baseline()),
        "(|A/A| - 1)|A|^2",
    )
    .with("all_in_square", b.all_in_square)
    .with("slopes_between", b.slopes_between);
    Ok(vec![b.report(), distinct])
}

fn run_dot_products(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    Ok(vec![aaaa::prop62_report(i.set)?, aaaa::prop63_report(i.set)?])
}

/// Recorded outcomes of the exponent bookkeeping.
pub struct ExpectedExponents;

impl ExpectedExponents {
    pub fn sum_product() -> Rational {
        q(391, 1167)
    }
    pub fn dot_product() -> Rational {
        q(127, 80)
    }
    pub fn convex() -> Rational {
        q(30, 19)
    }
    /// `|A+A|^19 Π^44 ≳ |A|^41 T^33`.
    pub fn sumset_single_pi() -> ExponentVector {
        use Symbol::*;
        ExponentVector::new(&[(SumSet, int(19i64)), (Pi, int(44i64)), (Size, int(-41i64)), (T, int(-33i64))], Rational::ZERO)
    }
    /// Direction `|A|^{-16} T^{24}`.
    pub fn prior_threshold() -> ExponentVector {
        ExponentVector::new(&[(Symbol::Size, int(-16i64)), (Symbol::T, int(24i64))], Rational::ZERO)
    }
}

fn run_exponents(_: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    let exact_eq = |name: &str, got: &Rational, want: &Rational, formula: &str| {
        InequalityReport::exact(name, got, Relation::Eq, want, formula)
    };
    let sp = exponents::sum_product_derivation()?;
    let sp_exp = exponents::sum_product_exponent()?;
    let dp = exponents::dot_product_derivation()?;
    let dp_exp = dp.result.exponent_of(Symbol::DotProducts, Symbol::Size)?;
    let ss = exponents::sumset_derivation()?;
    let mut single = exponents::theorem14_from_theorem52(true)?.vector;
    single.log = Rational::ZERO;
    let single_ok = single == ExpectedExponents::sumset_single_pi();
    let threshold = exponents::threshold_vs_prior()?;
    let factor = threshold.proportion(&ExpectedExponents::prior_threshold());
    let one = |b: bool| int(b as u64);
    Ok(vec![
        exact_eq("sum-product-exponent", &sp_exp, &ExpectedExponents::sum_product(), "391/1167")
            .with("result", sp.result.vector.to_string())
            .with("rechecked", sp.rechecked)
            .with("excess_over_one_third", (&sp_exp - &q(1, 3)).to_string()),
        exact_eq("dot-product-exponent", &dp_exp, &ExpectedExponents::dot_product(), "127/80")
            .with("result", dp.result.vector.to_string())
            .with("rechecked", dp.rechecked),
        exact_eq("convex-exponent", &exponents::convex_exponent()?, &ExpectedExponents::convex(), "30/19"),
        exact_eq("sumset-exponents", &one(single_ok && ss.rechecked), &Rational::ONE, "(19, 44, 41, 33)")
            .with("result", single.to_string()),
        exact_eq(
            "prior-comparison",
            &one(factor.as_ref().is_some_and(|f| f.is_positive())),
            &Rational::ONE,
            "threshold along |A|^-16 T^24",
        )
        .with("threshold", threshold.to_string()),
    ])
}

fn run_fixture(i: &Input, _: &Params) -> CoreResult<Vec<InequalityReport>> {
    let Some(f) = i.expect else { return Ok(Vec::new()) };
    let a = i.set;
    let mut out = Vec::new();
    let mut cmp = |name: &str, got: Rational, want: Option<Rational>| {
        if let Some(w) = want {
            out.push(InequalityReport::exact(name, &got, Relation::Eq, &w, "recorded value"));
        }
    };
    cmp("fixture-sumset", int(a.sumset(a).len()), f.sumset.map(int));
    cmp("fixture-product-set", int(a.prodset(a).len()), f.product_set.map(int));
    if f.ratio_set.is_some() || f.mult_energy.is_some() {
        cmp("fixture-ratio-set", int(a.ratioset(a)?.len()), f.ratio_set.map(int));
        let e = mult_energy(a)?.value().clone();
        cmp("fixture-mult-energy", e, f.mult_energy.map(wide));
    }
    Ok(out)
}

/// Whether a report can fail a run under its check's policy.
pub fn is_failure(check: &Check, r: &InequalityReport) -> bool {
    check.policy == Policy::Asserted && r.verdict == Verdict::Fail
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use sumprodlab_core::generators;

    #[test]
    fn registry_covers_each_statement_once() {
        let mut seen: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for c in CHECKS {
            for s in c.covers {
                seen.entry(s).or_default().push(c.id);
            }
        }
        for s in IN_SCOPE {
            assert_eq!(seen.get(s).map(Vec::len), Some(1), "{s} covered by {:?}", seen.get(s));
        }
        assert!(seen.keys().all(|s| IN_SCOPE.contains(s)), "unlisted statement in {seen:?}");
        let mut ids: Vec<_> = CHECKS.iter().map(|c| c.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), CHECKS.len());
    }

    #[test]
    fn select_filters() {
        assert_eq!(select(Some("solymosi, katz-koester")).unwrap().len(), 2);
        assert_eq!(select(None).unwrap().len(), CHECKS.len());
        assert!(select(Some("nope")).is_err());
    }

    #[test]
    fn gates() {
        let kk = find("katz-koester").unwrap();
        assert!(kk.gate(&generators::interval(32).unwrap()).is_none());
        assert!(kk.gate(&generators::interval(33).unwrap()).is_some());
        let neg = RSet::from_integers([-1, 2, 3]).unwrap();
        assert!(find("solymosi").unwrap().gate(&neg).is_some());
    }

    fn run(id: &str, a: &RSet) -> Vec<InequalityReport> {
        let c = find(id).unwrap();
        assert!(c.gate(a).is_none());
        (c.run)(&Input { set: a, expect: None }, &Params::default()).unwrap()
    }

    #[test]
    fn asserted_checks_pass_on_small_sets() {
        let sets = [
            generators::interval(12).unwrap(),
            generators::gp(&int(1i64), &int(2i64), 10).unwrap(),
            generators::convex_power(10, 2).unwrap(),
            generators::random_subset(1, 40, 10, 3).unwrap(),
        ];
        for a in &sets {
            for c in CHECKS.iter().filter(|c| c.scope == Scope::PerSet && c.gate(a).is_none()) {
                let reports = (c.run)(&Input { set: a, expect: None }, &Params::default())
                    .unwrap_or_else(|e| panic!("{} on {a:?}: {e}", c.id));
                assert!(!reports.is_empty(), "{}", c.id);
                for r in &reports {
                    assert!(!is_failure(c, r), "{} failed on {a:?}: {r:?}", r.check);
                    if c.policy == Policy::ReportOnly {
                        assert_eq!(r.verdict, Verdict::ReportOnly, "{}", r.check);
                    }
                }
            }
        }
    }

    #[test]
    fn exponent_check_passes() {
        let e = RSet::empty();
        let reports = run_exponents(&Input { set: &e, expect: None }, &Params::default()).unwrap();
        assert_eq!(reports.len(), 5);
        assert!(reports.iter().all(|r| r.verdict == Verdict::Pass), "{reports:?}");
    }

    #[test]
    fn pipeline_falls_back_on_thin_layers() {
        let reports = run("bunching-pipeline", &generators::interval(16).unwrap());
        assert!(reports.iter().any(|r| r.check == "bunch-inclusion-exclusion"));
        assert_eq!(reports[0].details["overridden"], serde_json::json!(true));
    }

    #[test]
    fn fixture_mismatch_fails() {
        let a = generators::interval(4).unwrap();
        let good = Fixture { sumset: Some(7), product_set: Some(9), ratio_set: Some(11), mult_energy: None };
        let c = find("fixture").unwrap();
        let ok = (c.run)(&Input { set: &a, expect: Some(&good) }, &Params::default()).unwrap();
        assert_eq!(ok.len(), 3);
        assert!(ok.iter().all(|r| r.verdict == Verdict::Pass), "{ok:?}");
        let bad = Fixture { sumset: Some(8), ..good };
        let r = (c.run)(&Input { set: &a, expect: Some(&bad) }, &Params::default()).unwrap();
        assert!(r.iter().any(|r| is_failure(c, r)));
    }
}
