//! Finite-scale exponent tables over a generator family.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use sumprodlab_core::aaaa::{aa_plus_aa, AA_PLUS_AA_GATE};
use sumprodlab_core::generators::{Family, GeneratorSpec};
use sumprodlab_core::{q, Rational};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepFamily {
    Interval,
    /// `{2^i}`.
    Gp,
    ConvexPower { e: u32 },
    /// `n` points of `[1, 4n]`.
    Random { seed: u64 },
}

impl SweepFamily {
    pub fn parse(name: &str, e: u32, seed: u64) -> Result<Self> {
        Ok(match name {
            "interval" => SweepFamily::Interval,
            "gp" => SweepFamily::Gp,
            "convex_power" | "convex" => SweepFamily::ConvexPower { e },
            "random" | "random_subset" => SweepFamily::Random { seed },
            other => return Err(HarnessError::Parse(format!("unknown sweep family {other:?}"))),
        })
    }

    pub fn spec(self, n: usize) -> GeneratorSpec {
        GeneratorSpec::Family(match self {
            SweepFamily::Interval => Family::Interval { n },
            SweepFamily::Gp => Family::Gp { a: Rational::ONE, r: Rational::from(2i64), n },
            SweepFamily::ConvexPower { e } => Family::ConvexPower { n, e },
            SweepFamily::Random { seed } => Family::RandomSubset { lo: 1, hi: 4 * n as i64, n, seed: seed.wrapping_add(n as u64) },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepCheck {
    /// `δ_obs = log max(|A+A|, |AA|) / log|A| − 1` against `391/1167`.
    Exponent,
    /// `log|A+A| / log|A|` against `30/19`.
    Sumset,
}

impl SweepCheck {
    pub fn target(self) -> Rational {
        match self {
            SweepCheck::Exponent => q(391, 1167),
            SweepCheck::Sumset => q(30, 19),
        }
    }
}

impl FromStr for SweepCheck {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponent" => Ok(SweepCheck::Exponent),
            "sumset" => Ok(SweepCheck::Sumset),
            other => Err(HarnessError::Parse(format!("unknown sweep check {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogBase {
    Two,
    E,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
        }
    }
}

impl FromStr for LogBase {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" => Ok(LogBase::Two),
            "e" => Ok(LogBase::E),
            other => Err(HarnessError::Parse(format!("log base must be 2 or e, got {other:?}"))),
        }
    }
}

/// `a..b` doubles from `a` up to `b`; `a..b:s` steps by `s`; `a,b,c` lists.
/// A range with `a > b` is empty.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| HarnessError::Parse(format!("bad n {t:?}: {e}")));
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let Some((lo, rest)) = s.split_once("..") else {
        return s.split(',').map(num).collect();
    };
    let lo = num(lo)?;
    let (hi, step) = match rest.split_once(':') {
        Some((h, st)) => (num(h)?, Some(num(st)?)),
        None => (num(rest)?, None),
    };
    let mut out = Vec::new();
    let mut n = lo;
    while n <= hi {
        out.push(n);
        n = match step {
            Some(0) => return Err(HarnessError::Parse("step must be positive".into())),
            Some(st) => n + st,
            None if n == 0 => 1,
            None => n * 2,
        };
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub size: usize,
    pub sumset: usize,
    pub product_set: usize,
    pub ratio_set: usize,
    /// Only below the `AA+AA` gate.
    pub dot_products: Option<usize>,
    pub log_n: f64,
    pub sumset_exponent: f64,
    pub product_exponent: f64,
    pub delta_obs: f64,
    pub target: f64,
}

fn row(family: SweepFamily, check: SweepCheck, base: LogBase, n: usize) -> Result<SweepRow> {
    let a = family.spec(n).build()?;
    let size = a.len();
    let sumset = a.sumset(&a).len();
    let product_set = a.prodset(&a).len();
    let ratio_set = a.ratioset(&a)?.len();
    let dot_products = if size <= AA_PLUS_AA_GATE { Some(aa_plus_aa(&a)?.aa_plus_aa.len()) } else { None };
    let ln = (size as f64).ln();
    let expo = |x: usize| if size > 1 { (x as f64).ln() / ln } else { f64::NAN };
    Ok(SweepRow {
        n,
        size,
        sumset,
        product_set,
        ratio_set,
        dot_products,
        log_n: base.log(size as f64),
        sumset_exponent: expo(sumset),
        product_exponent: expo(product_set),
        delta_obs: expo(sumset.max(product_set)) - 1.0,
        target: check.target().to_f64(),
    })
}

pub fn sweep(family: SweepFamily, ns: &[usize], check: SweepCheck, base: LogBase) -> Result<Vec<SweepRow>> {
    ns.par_iter().map(|&n| row(family, check, base, n)).collect()
}

pub const HEADER: [&str; 11] = [
    "n",
    "size",
    "sumset",
    "product_set",
    "ratio_set",
    "dot_products",
    "log_n",
    "sumset_exponent",
    "product_exponent",
    "delta_obs",
    "target",
];

/// CSV with a header line even when there are no rows.
pub fn to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.size.to_string(),
            r.sumset.to_string(),
            r.product_set.to_string(),
            r.ratio_set.to_string(),
            r.dot_products.map(|d| d.to_string()).unwrap_or_default(),
            format!("{:.12}", r.log_n),
            format!("{:.12}", r.sumset_exponent),
            format!("{:.12}", r.product_exponent),
            format!("{:.12}", r.delta_obs),
            format!("{:.12}", r.target),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("8..64").unwrap(), [8, 16, 32, 64]);
        assert_eq!(parse_range("8..20:4").unwrap(), [8, 12, 16, 20]);
        assert_eq!(parse_range("5, 7").unwrap(), [5, 7]);
        assert!(parse_range("9..8").unwrap().is_empty());
        assert!(parse_range("").unwrap().is_empty());
        assert!(parse_range("a..8").is_err());
    }

    #[test]
    fn interval_rows() {
        let rows = sweep(SweepFamily::Interval, &[8, 16], SweepCheck::Exponent, LogBase::Two).unwrap();
        assert_eq!(rows[0].sumset, 15);
        assert_eq!(rows[0].log_n, 3.0);
        let want = (rows[0].sumset.max(rows[0].product_set) as f64).ln() / 8f64.ln() - 1.0;
        assert_eq!(rows[0].delta_obs, want);
        assert_eq!(rows[1].n, 16);
    }

    #[test]
    fn empty_sweep_has_header() {
        let csv = to_csv(&[]).unwrap();
        assert_eq!(csv.trim_end(), HEADER.join(","));
    }
}
