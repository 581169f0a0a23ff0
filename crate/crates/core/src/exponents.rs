//! Exponent bookkeeping: monomial inequalities `Π x^{c_x} ≳ 1` over a fixed
//! symbol basis, combined by positive multiples only.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Symbol {
    K,
    M,
    #[serde(rename = "A")]
    Size,
    /// `|S_τ|`
    S,
    #[serde(rename = "tau")]
    Tau,
    T,
    Pi1,
    Pi2,
    Pi,
    #[serde(rename = "AA+AA")]
    DotProducts,
    #[serde(rename = "A/A")]
    RatioSet,
    #[serde(rename = "A+A")]
    SumSet,
    #[serde(rename = "AA")]
    ProductSet,
    /// Multiplicative or additive energy, depending on the chain.
    E,
    /// `|D|`
    D,
    #[serde(rename = "Delta")]
    Delta,
    /// `max(|A+A|, |AA|)`
    X,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("symbol serialises");
        f.write_str(s.as_str().expect("string"))
    }
}

/// Exponents of a monomial, with a separate exponent for `log|A|`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentVector {
    #[serde(default)]
    pub coeffs: BTreeMap<Symbol, Rational>,
    #[serde(default = "zero")]
    pub log: Rational,
}

fn zero() -> Rational {
    Rational::ZERO
}

impl ExponentVector {
    pub fn new(terms: &[(Symbol, Rational)], log: Rational) -> Self {
        let mut v = ExponentVector { coeffs: BTreeMap::new(), log };
        for (s, c) in terms {
            v.add_term(*s, c);
        }
        v
    }

    fn add_term(&mut self, s: Symbol, c: &Rational) {
        let e = self.coeffs.entry(s).or_insert(Rational::ZERO);
        *e = &*e + c;
        if e.is_zero() {
            self.coeffs.remove(&s);
        }
    }

    pub fn get(&self, s: Symbol) -> Rational {
        self.coeffs.get(&s).cloned().unwrap_or(Rational::ZERO)
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let terms: Vec<(Symbol, Rational)> = self.coeffs.iter().map(|(s, x)| (*s, x * c)).collect();
        ExponentVector::new(&terms, &self.log * c)
    }

    pub fn plus(&self, other: &ExponentVector) -> Self {
        let mut v = self.clone();
        for (s, c) in &other.coeffs {
            v.add_term(*s, c);
        }
        v.log = &v.log + &other.log;
        v
    }

    pub fn minus(&self, other: &ExponentVector) -> Self {
        self.plus(&other.scaled(&-Rational::ONE))
    }

    /// The factor `c > 0` with `other = c·self`, if any.
    pub fn proportion(&self, other: &ExponentVector) -> Option<Rational> {
        let (s, x) = self.coeffs.iter().next()?;
        let c = &other.get(*s) / x;
        (c.is_positive() && self.scaled(&c) == *other).then_some(c)
    }

    /// Integer image after multiplying by the lcm of all denominators.
    fn integer_image(vs: &[&ExponentVector]) -> Vec<BTreeMap<Option<Symbol>, BigInt>> {
        let mut l = BigInt::one();
        for v in vs {
            for c in v.coeffs.values().chain(std::iter::once(&v.log)) {
                l = l.lcm(&c.denom());
            }
        }
        let scale = Rational::from_bigint(l);
        vs.iter()
            .map(|v| {
                let mut m: BTreeMap<Option<Symbol>, BigInt> =
                    v.coeffs.iter().map(|(s, c)| (Some(*s), (c * &scale).numer())).collect();
                m.insert(None, (&v.log * &scale).numer());
                m.retain(|_, x| !x.is_zero());
                m
            })
            .collect()
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
        for (s, c) in &self.coeffs {
            if c.is_positive() {
                lhs.push(format!("{s}^{c}"));
            } else {
                rhs.push(format!("{s}^{}", -c));
            }
        }
        if !self.log.is_zero() {
            let t = format!("log^{}", self.log.abs());
            if self.log.is_positive() { lhs.push(t) } else { rhs.push(t) }
        }
        let side = |v: Vec<String>| if v.is_empty() { "1".to_string() } else { v.join(" ") };
        write!(f, "{} >~ {}", side(lhs), side(rhs))
    }
}

/// `Π x^{c_x} ≳ 1`, i.e. the left side dominates the right up to constants
/// and the recorded power of `log|A|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    pub name: String,
    pub vector: ExponentVector,
}

impl Bound {
    /// `lhs ≳ rhs · log^{-log}`; `log` is the power of `log|A|` lost.
    pub fn new(name: &str, lhs: &[(Symbol, Rational)], rhs: &[(Symbol, Rational)], log: Rational) -> Self {
        let l = ExponentVector::new(lhs, Rational::ZERO);
        let r = ExponentVector::new(rhs, Rational::ZERO);
        let mut vector = l.minus(&r);
        vector.log = log;
        Bound { name: name.to_string(), vector }
    }

    pub fn up_to_logs(&self) -> bool {
        !self.vector.log.is_zero()
    }

    /// Renames `from` to `to`, e.g. `K = M` or `Π₁ = Π₂ = Π`.
    pub fn identify(&self, from: Symbol, to: Symbol) -> Bound {
        let c = self.vector.get(from);
        let mut v = self.vector.clone();
        v.coeffs.remove(&from);
        v.add_term(to, &c);
        Bound { name: format!("{} [{from} = {to}]", self.name), vector: v }
    }

    /// Substitutes `sym = Π y^{e_y}` (an identity, so any sign is allowed).
    pub fn substitute(&self, sym: Symbol, value: &ExponentVector) -> Bound {
        let c = self.vector.get(sym);
        let mut v = self.vector.clone();
        v.coeffs.remove(&sym);
        Bound { name: format!("{} [{sym} := ..]", self.name), vector: v.plus(&value.scaled(&c)) }
    }

    /// For a bound in two symbols `x^a y^{-b} ≳ 1` with `a, b > 0`, the
    /// exponent `b/a` in `x ≳ y^{b/a}`.
    pub fn exponent_of(&self, x: Symbol, y: Symbol) -> Result<Rational> {
        let (a, b) = (self.vector.get(x), -self.vector.get(y));
        let others = self.vector.coeffs.keys().any(|s| *s != x && *s != y);
        if others || !a.is_positive() || !b.is_positive() {
            return Err(CoreError::InvalidElimination(format!("{} is not of the form {x}^a >~ {y}^b", self.vector)));
        }
        Ok(b / a)
    }
}

/// One elimination: `after = before + multiplier · using`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub eliminated: Symbol,
    pub using: String,
    pub multiplier: Rational,
    pub before: ExponentVector,
    pub after: ExponentVector,
}

impl Step {
    /// Recomputes the step on integer vectors after clearing denominators.
    pub fn recheck(&self, used: &ExponentVector) -> bool {
        let scaled = used.scaled(&self.multiplier);
        let imgs = ExponentVector::integer_image(&[&self.before, &scaled, &self.after]);
        let mut sum = imgs[0].clone();
        for (k, v) in &imgs[1] {
            let e = sum.entry(*k).or_insert_with(BigInt::zero);
            *e += v;
        }
        sum.retain(|_, x| !x.is_zero());
        self.multiplier.is_positive() && sum == imgs[2] && self.after.get(self.eliminated).is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub result: Bound,
    pub steps: Vec<Step>,
    /// Every step survived the integer re-check.
    pub rechecked: bool,
}

/// Starts from the first bound and eliminates each symbol in turn with the
/// first unused bound in which it has the opposite sign.
pub fn combine(bounds: &[Bound], eliminations: &[Symbol]) -> Result<Derivation> {
    let (first, rest) = bounds
        .split_first()
        .ok_or_else(|| CoreError::InvalidElimination("no bounds to combine".into()))?;
    let mut used = vec![false; rest.len()];
    let mut current = first.vector.clone();
    let mut steps = Vec::new();
    let mut rechecked = true;
    for &sym in eliminations {
        let c = current.get(sym);
        if c.is_zero() {
            continue;
        }
        let pick = rest.iter().enumerate().find(|(i, b)| {
            let d = b.vector.get(sym);
            !used[*i] && !d.is_zero() && d.is_positive() != c.is_positive()
        });
        let Some((i, b)) = pick else {
            return Err(CoreError::InvalidElimination(format!(
                "eliminating {sym} from {current} needs a negative multiple"
            )));
        };
        used[i] = true;
        let multiplier = -(&c / &b.vector.get(sym));
        let after = current.plus(&b.vector.scaled(&multiplier));
        let step = Step { eliminated: sym, using: b.name.clone(), multiplier, before: current, after: after.clone() };
        rechecked &= step.recheck(&b.vector);
        steps.push(step);
        current = after;
    }
    let name = bounds.iter().map(|b| b.name.as_str()).collect::<Vec<_>>().join(" + ");
    Ok(Derivation { result: Bound { name, vector: current }, steps, rechecked })
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d).expect("nonzero denominator")
}

fn i(n: i64) -> Rational {
    Rational::from_integer(n)
}

use Symbol::*;

/// The constituent bounds of the sum-product chain.
pub fn sum_product_bounds() -> Vec<Bound> {
    vec![
        Bound::new("main", &[(K, i(283)), (M, i(176))], &[(Size, i(94)), (Tau, i(41)), (S, r(49, 2))], i(0)),
        Bound::new("energy", &[(S, i(1)), (Tau, i(2)), (M, i(1))], &[(Size, i(3))], i(1)),
        Bound::new("layer-size", &[(S, i(1)), (M, i(10)), (K, i(16))], &[(Size, i(10))], i(0)),
    ]
}

/// `K^694 M^473 ≳ |A|^391`.
pub fn sum_product_derivation() -> Result<Derivation> {
    combine(&sum_product_bounds(), &[Tau, S])
}

/// With `K = M`, the exponent `δ` in `max(K, M) ≳ |A|^δ`.
pub fn sum_product_exponent() -> Result<Rational> {
    let d = sum_product_derivation()?;
    d.result.identify(K, M).exponent_of(M, Size)
}

pub fn dot_product_bounds() -> Vec<Bound> {
    vec![
        Bound::new("bunching", &[(DotProducts, i(2))], &[(RatioSet, r(2, 3)), (Size, r(5, 2))], i(0)),
        Bound::new(
            "difference-layer",
            &[(DotProducts, i(5))],
            &[(Size, i(13)), (RatioSet, i(-5))],
            r(9, 2),
        ),
    ]
}

/// `|AA+AA|^{8/3} ≳ |A|^{127/30}`, equivalently `|AA+AA|^20 ≳ |A|^{127/4}`.
pub fn dot_product_derivation() -> Result<Derivation> {
    combine(&dot_product_bounds(), &[RatioSet])
}

/// The bounds behind the sum-set estimate under a product hypothesis,
/// with `|B| ~ |A|`, `|B+B| ≤ |A+A|` and `ε^{-1} ~ log|A|` already applied.
pub fn sumset_bounds() -> Vec<Bound> {
    vec![
        Bound::new(
            "penultimate",
            &[(Pi1, i(3)), (Pi2, i(3)), (SumSet, r(5, 3))],
            &[(Size, r(3, 2)), (T, r(9, 2)), (D, r(7, 6)), (Delta, i(2))],
            r(7, 3),
        ),
        Bound::new("layer", &[(D, i(1)), (Delta, i(2))], &[(E, i(1))], i(1)),
        Bound::new("delta-upper", &[(Pi1, i(2)), (Pi2, i(2)), (Size, i(2))], &[(T, i(3)), (E, i(1)), (Delta, i(1))], i(1)),
        Bound::new("cauchy-schwarz", &[(E, i(1)), (SumSet, i(1))], &[(Size, i(4))], i(0)),
    ]
}

/// `|A+A|^19|Π₁|^22|Π₂|^22 ≳ |A|^41 T^33 log^{-23}|A|`, scaled to integers.
pub fn sumset_derivation() -> Result<Derivation> {
    let mut d = combine(&sumset_bounds(), &[D, Delta, E])?;
    d.result.vector = d.result.vector.scaled(&i(6));
    Ok(d)
}

/// Merges `Π₁ = Π₂ = Π`.
pub fn theorem14_from_theorem52(single_pi: bool) -> Result<Bound> {
    let b = sumset_derivation()?.result;
    Ok(if single_pi { b.identify(Pi1, Pi).identify(Pi2, Pi) } else { b })
}

/// `Π₁ = Π₂ = T = |A|` gives `|A+A| ≳ |A|^{30/19}`.
pub fn convex_exponent() -> Result<Rational> {
    let b = sumset_derivation()?.result.identify(Pi1, Size).identify(Pi2, Size).identify(T, Size);
    b.exponent_of(SumSet, Size)
}

/// The earlier estimate `|A+A|^37|AA|^84 ≳ |A|^79 T^63`.
pub fn prior_bound() -> Bound {
    Bound::new("prior", &[(SumSet, i(37)), (ProductSet, i(84))], &[(Size, i(79)), (T, i(63))], i(0))
}

/// Exponent vector of `|A|, T` whose positivity decides when the new bound on
/// `X = max(|A+A|, |AA|)` beats the prior one.
pub fn threshold_vs_prior() -> Result<ExponentVector> {
    let to_x = |b: &Bound| b.identify(SumSet, X).identify(ProductSet, X);
    let new = to_x(&theorem14_from_theorem52(true)?.identify(Pi, ProductSet));
    let old = to_x(&prior_bound());
    let (nx, ox) = (new.vector.get(X), old.vector.get(X));
    // X ≳ (A^a T^b)^{1/nx}; compare both lower bounds on a common scale
    let l = nx.numer().lcm(&ox.numer());
    let lr = Rational::from_bigint(l);
    let lhs = new.vector.scaled(&(&lr / &nx));
    let rhs = old.vector.scaled(&(&lr / &ox));
    let mut diff = rhs.minus(&lhs);
    diff.log = Rational::ZERO;
    Ok(diff)
}

/// A derivation read from JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationSpec {
    pub name: String,
    pub relations: Vec<RelationSpec>,
    pub eliminate: Vec<Symbol>,
    #[serde(default)]
    pub identify: Vec<(Symbol, Symbol)>,
    #[serde(default)]
    pub expect: Option<RelationSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSpec {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub lhs: BTreeMap<Symbol, Rational>,
    #[serde(default)]
    pub rhs: BTreeMap<Symbol, Rational>,
    /// Power of `log|A|` lost on the right.
    #[serde(default = "zero")]
    pub log: Rational,
}

impl RelationSpec {
    pub fn to_bound(&self) -> Bound {
        let l: Vec<_> = self.lhs.iter().map(|(s, c)| (*s, c.clone())).collect();
        let r: Vec<_> = self.rhs.iter().map(|(s, c)| (*s, c.clone())).collect();
        Bound::new(&self.name, &l, &r, self.log.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivationOutcome {
    pub name: String,
    pub derivation: Derivation,
    /// Positive factor relating the result to the expected relation.
    pub matches_expected: Option<bool>,
}

pub fn run_spec(spec: &DerivationSpec) -> Result<DerivationOutcome> {
    let bounds: Vec<Bound> = spec.relations.iter().map(RelationSpec::to_bound).collect();
    let mut derivation = combine(&bounds, &spec.eliminate)?;
    for (from, to) in &spec.identify {
        derivation.result = derivation.result.identify(*from, *to);
    }
    let matches_expected = spec.expect.as_ref().map(|e| {
        let mut want = e.to_bound().vector;
        let mut got = derivation.result.vector.clone();
        // log powers are bookkeeping, compared only when given
        if e.log.is_zero() {
            want.log = Rational::ZERO;
            got.log = Rational::ZERO;
        }
        got.proportion(&want).is_some()
    });
    Ok(DerivationOutcome { name: spec.name.clone(), derivation, matches_expected })
}

pub fn load_spec(json: &str) -> Result<DerivationSpec> {
    serde_json::from_str(json).map_err(|e| CoreError::Parse(e.to_string()))
}
