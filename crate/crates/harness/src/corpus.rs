//! Corpora: lists of generator specs, optionally with recorded values.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sumprodlab_core::generators::{Family, GeneratorSpec};
use sumprodlab_core::report::SetDescriptor;
use sumprodlab_core::{q, RSet, Rational};

use crate::error::{HarnessError, Result};

/// Recorded values a run must reproduce.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sumset: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_set: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_set: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mult_energy: Option<u128>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusItem {
    pub spec: GeneratorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Fixture>,
}

impl From<GeneratorSpec> for CorpusItem {
    fn from(spec: GeneratorSpec) -> Self {
        CorpusItem { spec, expect: None }
    }
}

#[derive(Clone, Debug)]
pub struct LoadedSet {
    pub descriptor: SetDescriptor,
    pub set: RSet,
    pub expect: Option<Fixture>,
}

/// SHA-256 of the canonical JSON serialisation.
pub fn content_hash(set: &RSet) -> String {
    hex::encode(Sha256::digest(set.to_json().as_bytes()))
}

pub fn describe(spec: &GeneratorSpec, set: &RSet) -> SetDescriptor {
    SetDescriptor {
        generator: spec.name().to_string(),
        params: spec.params(),
        size: set.len(),
        hash: content_hash(set),
    }
}

impl CorpusItem {
    pub fn load(&self) -> Result<LoadedSet> {
        let set = self.spec.build()?;
        Ok(LoadedSet { descriptor: describe(&self.spec, &set), set, expect: self.expect.clone() })
    }
}

/// Reads a JSON array of items; each item is either a bare generator spec or
/// `{"spec": ..., "expect": ...}`.
pub fn parse_corpus(json: &str) -> Result<Vec<CorpusItem>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Item(CorpusItem),
        Bare(GeneratorSpec),
    }
    let entries: Vec<Entry> = serde_json::from_str(json)?;
    Ok(entries
        .into_iter()
        .map(|e| match e {
            Entry::Item(i) => i,
            Entry::Bare(s) => s.into(),
        })
        .collect())
}

pub fn read_corpus(path: &Path) -> Result<Vec<CorpusItem>> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

fn family(f: Family) -> CorpusItem {
    GeneratorSpec::Family(f).into()
}

/// The built-in corpus: intervals, progressions, convex and random sets with
/// `4 ≤ |A| ≤ 256`.
pub fn default_corpus(seed: u64) -> Vec<CorpusItem> {
    let mut out = Vec::new();
    for n in [4, 5, 6, 8, 10, 12, 16, 20, 24, 32, 48, 64, 96, 128, 192, 256] {
        out.push(family(Family::Interval { n }));
    }
    for (a, d) in [(q(1, 2), q(2, 3)), (q(3, 1), q(5, 1)), (q(1, 1), q(7, 3))] {
        for n in [4, 8, 12, 16, 24, 32, 64, 128] {
            out.push(family(Family::Ap { a: a.clone(), d: d.clone(), n }));
        }
    }
    for (a, r) in [(q(1, 1), q(2, 1)), (q(1, 1), q(3, 1)), (q(5, 1), q(3, 2))] {
        for n in [4, 6, 8, 12, 16, 24, 32, 48, 64] {
            out.push(family(Family::Gp { a: a.clone(), r: r.clone(), n }));
        }
    }
    for n in [4, 8, 12, 16, 20, 24, 32, 48, 64, 96, 128, 256] {
        out.push(family(Family::ConvexPower { n, e: 2 }));
    }
    for n in [4, 8, 16, 32, 64, 128] {
        out.push(family(Family::ConvexPower { n, e: 3 }));
    }
    for n in [8, 16, 32, 64] {
        let gaps = (1..n as i64).map(|i| Rational::from(i * i + 1)).collect();
        out.push(family(Family::ConvexFromGaps { gaps }));
    }
    for n in [4, 6, 8, 10, 12, 16, 20, 24, 32, 48, 64, 96, 128, 256] {
        for k in 0..8 {
            let s = seed.wrapping_mul(1_000_003).wrapping_add(n as u64 * 97 + k);
            out.push(family(Family::RandomSubset { lo: 1, hi: 4 * n as i64, n, seed: s }));
        }
    }
    for n in [16, 32, 64, 128] {
        for k in 0..4 {
            let s = seed.wrapping_mul(1_000_033).wrapping_add(n as u64 * 89 + k);
            out.push(family(Family::RandomSubset { lo: 1, hi: 2 * n as i64, n, seed: s }));
        }
    }
    out
}

/// Loads every item, keeping those with `|A| ≤ max_n`.
pub fn load_all(items: &[CorpusItem], max_n: Option<usize>) -> Result<Vec<LoadedSet>> {
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let loaded = item.load().map_err(|e| match e {
            HarnessError::Core(c) => HarnessError::Parse(format!("{}: {c}", item.spec.name())),
            other => other,
        })?;
        if max_n.is_none_or(|m| loaded.set.len() <= m) {
            out.push(loaded);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_corpus_shape() {
        let sets = load_all(&default_corpus(0), None).unwrap();
        assert!(sets.len() >= 200);
        assert!(sets.iter().all(|s| (4..=256).contains(&s.set.len())));
        for g in ["interval", "ap", "gp", "convex_power", "random_subset"] {
            assert!(sets.iter().any(|s| s.descriptor.generator == g));
        }
        let again = load_all(&default_corpus(0), None).unwrap();
        assert!(sets.iter().zip(&again).all(|(a, b)| a.descriptor == b.descriptor));
    }

    #[test]
    fn corpus_files() {
        let items = parse_corpus(
            r#"[{"generator":"interval","params":{"n":4}},
                {"spec":{"elements":["1","2"]},"expect":{"sumset":3}}]"#,
        )
        .unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[1].expect.as_ref().unwrap().sumset, Some(3));
        let sets = load_all(&items, Some(3)).unwrap();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].descriptor.hash.len(), 64);
        assert!(parse_corpus("[{}]").is_err());
    }
}
