//! Runs selected checks over a loaded corpus on a bounded worker pool.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sumprodlab_core::report::{SetDescriptor, Verdict};
use sumprodlab_core::{CoreError, InequalityReport};

use crate::cache::Cache;
use crate::corpus::LoadedSet;
use crate::error::{HarnessError, Result};
use crate::registry::{Check, Input, Params, Policy, Scope};
use crate::SCHEMA_VERSION;

/// A (check, set) pair outside the check's gates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub check: String,
    pub set: Option<SetDescriptor>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemError {
    pub check: String,
    pub set: Option<SetDescriptor>,
    pub error: String,
    pub asserted: bool,
}

/// Timings and cache counters; the only part of a bundle that varies
/// between identical runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub computed: u64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub schema_version: u32,
    pub params: Params,
    pub reports: Vec<InequalityReport>,
    pub skipped: Vec<Skipped>,
    pub errors: Vec<ItemError>,
    pub envelope: Envelope,
}

impl Bundle {
    /// Failed asserted reports; report-only checks never carry a failing verdict.
    pub fn failures(&self) -> impl Iterator<Item = &InequalityReport> {
        self.reports.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn failed(&self) -> bool {
        self.failures().next().is_some() || self.errors.iter().any(|e| e.asserted)
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.reports.iter().filter(|r| r.verdict == v).count()
    }

    /// The bundle without its envelope, for comparing runs.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut b = self.clone();
        b.envelope = Envelope::default();
        Ok(serde_json::to_string(&b)?)
    }

    /// One CSV row per report.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "generator", "params", "size", "hash", "relation", "lhs", "rhs", "rhs_formula", "ratio", "verdict"])?;
        for r in &self.reports {
            let (g, p, n, h) = match &r.set {
                Some(s) => (s.generator.clone(), s.params.to_string(), s.size.to_string(), s.hash.clone()),
                None => Default::default(),
            };
            let rel = serde_json::to_value(r.relation)?.as_str().unwrap_or_default().to_string();
            let verdict = serde_json::to_value(r.verdict)?.as_str().unwrap_or_default().to_string();
            w.write_record([
                r.check.clone(),
                g,
                p,
                n,
                h,
                rel,
                r.lhs.exact.clone().unwrap_or_else(|| r.lhs.decimal.to_string()),
                r.rhs.exact.clone().unwrap_or_else(|| r.rhs.decimal.to_string()),
                r.rhs.formula.clone().unwrap_or_default(),
                r.ratio.to_string(),
                verdict,
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub struct Runner<'a> {
    pub checks: Vec<&'static Check>,
    pub params: Params,
    pub jobs: usize,
    pub cache: Option<&'a Cache>,
}

enum Outcome {
    Reports(Vec<InequalityReport>, bool),
    Skipped(String),
    Failed(String),
}

/// What the cache stores for a (check, set, params) key.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Cached {
    Reports(Vec<InequalityReport>),
    Skipped(String),
}

struct Task<'s> {
    check: &'static Check,
    set: Option<&'s LoadedSet>,
}

/// Errors that mean "this set is out of scope" rather than a broken check.
fn is_gate_violation(e: &CoreError) -> bool {
    matches!(e, CoreError::ScaleTooLarge { .. } | CoreError::TooSmall { .. } | CoreError::NonPositive(_) | CoreError::ZeroElement)
}

impl Runner<'_> {
    fn tasks<'s>(&self, sets: &'s [LoadedSet]) -> Vec<Task<'s>> {
        let mut out = Vec::new();
        for c in self.checks.iter().filter(|c| c.scope == Scope::SetFree) {
            out.push(Task { check: c, set: None });
        }
        for s in sets {
            for c in &self.checks {
                let wanted = match c.scope {
                    Scope::PerSet => true,
                    Scope::Fixture => s.expect.is_some(),
                    Scope::SetFree => false,
                };
                if wanted {
                    out.push(Task { check: c, set: Some(s) });
                }
            }
        }
        out
    }

    fn execute(&self, t: &Task) -> Outcome {
        let empty = sumprodlab_core::RSet::empty();
        let (set, hash, expect) = match t.set {
            Some(s) => {
                if let Some(reason) = t.check.gate(&s.set) {
                    return Outcome::Skipped(reason);
                }
                (&s.set, s.descriptor.hash.as_str(), s.expect.as_ref())
            }
            None => (&empty, "", None),
        };
        let key = Cache::key(t.check.id, hash, &(&self.params, expect));
        match self.cache.and_then(|c| c.get::<Cached>(&key)) {
            Some(Cached::Reports(rs)) => return Outcome::Reports(rs, false),
            Some(Cached::Skipped(reason)) => return Outcome::Skipped(reason),
            None => {}
        }
        let start = Instant::now();
        let (outcome, entry) = match (t.check.run)(&Input { set, expect }, &self.params) {
            Ok(mut reports) => {
                let entry = Cached::Reports(reports.clone());
                let ms = start.elapsed().as_secs_f64() * 1e3;
                for r in &mut reports {
                    r.wall_time_ms = Some(ms);
                }
                (Outcome::Reports(reports, true), Some(entry))
            }
            Err(e) if is_gate_violation(&e) => {
                let reason = format!("{}: {e}", t.check.id);
                (Outcome::Skipped(reason.clone()), Some(Cached::Skipped(reason)))
            }
            Err(e) => (Outcome::Failed(e.to_string()), None),
        };
        if let (Some(c), Some(entry)) = (self.cache, entry) {
            if let Err(e) = c.put(&key, &entry) {
                return Outcome::Failed(format!("cache write: {e}"));
            }
        }
        outcome
    }

    pub fn run(&self, sets: &[LoadedSet]) -> Result<Bundle> {
        let start = Instant::now();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        let tasks = self.tasks(sets);
        let outcomes: Vec<Outcome> = pool.install(|| tasks.par_iter().map(|t| self.execute(t)).collect());
        let mut bundle = Bundle {
            schema_version: SCHEMA_VERSION,
            params: self.params.clone(),
            reports: Vec::new(),
            skipped: Vec::new(),
            errors: Vec::new(),
            envelope: Envelope::default(),
        };
        for (t, o) in tasks.iter().zip(outcomes) {
            let desc = t.set.map(|s| s.descriptor.clone());
            match o {
                Outcome::Reports(rs, computed) => {
                    bundle.envelope.computed += computed as u64;
                    bundle.reports.extend(rs.into_iter().map(|mut r| {
                        r.set = desc.clone();
                        r
                    }));
                }
                Outcome::Skipped(reason) => {
                    bundle.skipped.push(Skipped { check: t.check.id.to_string(), set: desc, reason })
                }
                Outcome::Failed(error) => bundle.errors.push(ItemError {
                    check: t.check.id.to_string(),
                    set: desc,
                    error,
                    asserted: t.check.policy == Policy::Asserted,
                }),
            }
        }
        if let Some(c) = self.cache {
            bundle.envelope.cache_hits = c.hits();
            bundle.envelope.cache_misses = c.misses();
        }
        bundle.envelope.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        Ok(bundle)
    }
}
