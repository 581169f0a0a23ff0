use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sumprodlab::cache::Cache;
use sumprodlab::corpus::{self, CorpusItem};
use sumprodlab::registry::{self, Params};
use sumprodlab::runner::{Bundle, Runner};
use sumprodlab::sweep::{self, LogBase, SweepCheck, SweepFamily};
use sumprodlab::HarnessError;
use sumprodlab_core::bunching::{proposition_main_pipeline, PipelineParams};
use sumprodlab_core::energy::{additive_energy, cubic_energy, mult_energy};
use sumprodlab_core::generators::GeneratorSpec;
use sumprodlab_core::incidence::ProductHypothesis;
use sumprodlab_core::regularise::{theorem_five_report, TheoremBranch};
use sumprodlab_core::report::Verdict;
use sumprodlab_core::{aaaa, CoreError, RSet, Rational};

#[derive(Parser, Debug)]
#[command(name = "sumprodlab", version, about = "Exact sum-product experiments and inequality checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for the default corpus and random families.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = default_jobs())]
    jobs: usize,
    /// Drop corpus sets larger than this.
    #[arg(long = "max-n", global = true)]
    max_n: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Constant in the bunch size N.
    #[arg(long = "constant-C", global = true, default_value = "1")]
    constant_c: Rational,
    /// Overrides the default eps of the popular-sum and regularisation checks.
    #[arg(long, global = true)]
    eps: Option<Rational>,
    #[arg(long = "log-base", global = true, default_value = "2", value_parser = ["2", "e"])]
    log_base: String,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a set from a generator spec, e.g. '{"generator":"interval","params":{"n":8}}'.
    Gen { spec: String },
    /// Sizes and energies of one set.
    Compute { spec: String },
    /// Run registry checks over a corpus.
    Check {
        /// JSON corpus file; the built-in corpus when omitted.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Comma-separated check ids, or `all`.
        #[arg(long)]
        checks: Option<String>,
        #[arg(long)]
        no_cache: bool,
        /// List the registry and exit.
        #[arg(long)]
        list: bool,
    },
    /// Run one of the constructive arguments on a set.
    Pipeline {
        #[arg(value_enum)]
        flow: Flow,
        spec: String,
        /// Bunch size, overriding the computed N.
        #[arg(long)]
        n: Option<u64>,
        /// Dyadic layer j of the ratio map, overriding the dominant one.
        #[arg(long)]
        layer: Option<u32>,
    },
    /// Exponent table over a family.
    Sweep {
        #[arg(long, default_value = "interval")]
        family: String,
        /// `8..256` (doubling), `8..64:8` (step) or a list `8,12,16`.
        #[arg(long, default_value = "8..256")]
        range: String,
        #[arg(long, default_value = "exponent")]
        check: String,
        /// Exponent of the convex_power family.
        #[arg(long, default_value_t = 2)]
        power: u32,
    },
    /// Summarise a report bundle written by `check`.
    Report { bundle: PathBuf },
    /// Delete every cached result.
    PurgeCache,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Flow {
    Bunching,
    Aaaa,
    SumsetTheorem,
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn parse_set(spec: &str) -> anyhow::Result<RSet> {
    let spec = if Path::new(spec).is_file() { std::fs::read_to_string(spec)? } else { spec.to_string() };
    Ok(GeneratorSpec::parse(&spec).map_err(HarnessError::from)?.build().map_err(HarnessError::from)?)
}

fn pretty(v: &impl serde::Serialize) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn compute(a: &RSet) -> anyhow::Result<serde_json::Value> {
    let mut v = json!({
        "size": a.len(),
        "sumset": a.sumset(a).len(),
        "difference_set": a.diffset(a).len(),
        "product_set": a.prodset(a).len(),
        "additive_energy": additive_energy(a).to_string(),
        "cubic_energy": cubic_energy(a, a).to_string(),
        "convex": a.is_convex()?,
    });
    if !a.contains_zero() {
        v["ratio_set"] = json!(a.ratioset(a)?.len());
        v["mult_energy"] = json!(mult_energy(a)?.value().to_string());
    }
    if a.len() <= aaaa::AA_PLUS_AA_GATE {
        v["dot_products"] = json!(aaaa::aa_plus_aa(a)?.aa_plus_aa.len());
    }
    Ok(v)
}

fn summarise(b: &Bundle) -> serde_json::Value {
    let mut by_check: std::collections::BTreeMap<&str, (usize, usize, usize, f64, f64)> = Default::default();
    for r in &b.reports {
        let e = by_check.entry(&r.check).or_insert((0, 0, 0, f64::INFINITY, f64::NEG_INFINITY));
        match r.verdict {
            Verdict::Pass => e.0 += 1,
            Verdict::Fail => e.1 += 1,
            Verdict::ReportOnly => e.2 += 1,
        }
        if r.ratio.is_finite() {
            e.3 = e.3.min(r.ratio);
            e.4 = e.4.max(r.ratio);
        }
    }
    let checks: Vec<_> = by_check
        .into_iter()
        .map(|(c, (p, f, ro, lo, hi))| {
            json!({"check": c, "pass": p, "fail": f, "report_only": ro,
                   "ratio_min": lo.is_finite().then_some(lo), "ratio_max": hi.is_finite().then_some(hi)})
        })
        .collect();
    let failures: Vec<_> = b
        .failures()
        .map(|r| json!({"check": r.check, "set": r.set, "lhs": r.lhs.exact, "rhs": r.rhs.exact}))
        .collect();
    json!({
        "schema_version": b.schema_version,
        "reports": b.reports.len(),
        "pass": b.count(Verdict::Pass),
        "fail": b.count(Verdict::Fail),
        "report_only": b.count(Verdict::ReportOnly),
        "skipped": b.skipped.len(),
        "errors": b.errors,
        "failures": failures,
        "checks": checks,
        "envelope": b.envelope,
    })
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let out = cli.out.as_deref();
    let params = Params { c: cli.constant_c.clone(), eps: cli.eps.clone() };
    match cli.command {
        Command::Gen { spec } => {
            let a = parse_set(&spec)?;
            let text = match cli.format {
                Format::Json => a.to_json(),
                Format::Csv => a.to_lines(),
            };
            emit(out, &text)?;
        }
        Command::Compute { spec } => {
            let v = compute(&parse_set(&spec)?)?;
            let text = match cli.format {
                Format::Json => pretty(&v)?,
                Format::Csv => {
                    let obj = v.as_object().expect("object");
                    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
                    let vals: Vec<String> =
                        obj.values().map(|x| x.as_str().map(str::to_string).unwrap_or_else(|| x.to_string())).collect();
                    format!("{}\n{}\n", keys.join(","), vals.join(","))
                }
            };
            emit(out, &text)?;
        }
        Command::Check { corpus, checks, no_cache, list } => {
            if list {
                let rows: Vec<_> = registry::CHECKS
                    .iter()
                    .map(|c| json!({"id": c.id, "policy": c.policy, "covers": c.covers, "max_size": c.max_size}))
                    .collect();
                emit(out, &pretty(&rows)?)?;
                return Ok(ExitCode::SUCCESS);
            }
            let items: Vec<CorpusItem> = match corpus {
                Some(p) => corpus::read_corpus(&p).with_context(|| format!("reading corpus {}", p.display()))?,
                None => corpus::default_corpus(cli.seed),
            };
            let sets = corpus::load_all(&items, cli.max_n)?;
            let cache = (!no_cache).then(Cache::from_env);
            let runner = Runner { checks: registry::select(checks.as_deref())?, params, jobs: cli.jobs, cache: cache.as_ref() };
            let bundle = runner.run(&sets)?;
            let text = match cli.format {
                Format::Json => pretty(&bundle)?,
                Format::Csv => bundle.to_csv()?,
            };
            emit(out, &text)?;
            eprintln!(
                "{} reports: {} pass, {} fail, {} report-only; {} skipped, {} errors; cache {} hits / {} misses",
                bundle.reports.len(),
                bundle.count(Verdict::Pass),
                bundle.count(Verdict::Fail),
                bundle.count(Verdict::ReportOnly),
                bundle.skipped.len(),
                bundle.errors.len(),
                bundle.envelope.cache_hits,
                bundle.envelope.cache_misses,
            );
            for f in bundle.failures() {
                let set = f.set.as_ref().map(|s| format!("{} {}", s.generator, s.params)).unwrap_or_default();
                eprintln!("FAIL {} on {set}", f.check);
            }
            for e in bundle.errors.iter().filter(|e| e.asserted) {
                eprintln!("ERROR {}: {}", e.check, e.error);
            }
            if bundle.failed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Pipeline { flow, spec, n, layer } => {
            let a = parse_set(&spec)?;
            let text = match flow {
                Flow::Bunching => {
                    let mut p = PipelineParams { c: params.c, n_override: n, layer_override: layer, ..Default::default() };
                    if let Some(e) = params.eps {
                        p.eps = e;
                    }
                    pretty(&proposition_main_pipeline(&a, &p).map_err(HarnessError::from)?)?
                }
                Flow::Aaaa => {
                    let balog = aaaa::balog_construction(&a, Default::default()).map_err(HarnessError::from)?;
                    pretty(&json!({
                        "bunching": aaaa::prop62_report(&a).map_err(HarnessError::from)?,
                        "difference_layer": aaaa::prop63_report(&a).map_err(HarnessError::from)?,
                        "fixed_vectors": balog.report(),
                    }))?
                }
                Flow::SumsetTheorem => {
                    let hyp = ProductHypothesis::ratio_certificate(&a).map_err(HarnessError::from)?;
                    let general = theorem_five_report(&a, Some(&hyp), TheoremBranch::General).map_err(HarnessError::from)?;
                    let convex = theorem_five_report(&a, None, TheoremBranch::Convex).ok();
                    pretty(&json!({"general": general, "convex": convex}))?
                }
            };
            emit(out, &text)?;
        }
        Command::Sweep { family, range, check, power } => {
            let fam = SweepFamily::parse(&family, power, cli.seed)?;
            let check: SweepCheck = check.parse()?;
            let base: LogBase = cli.log_base.parse()?;
            let ns: Vec<usize> = sweep::parse_range(&range)?
                .into_iter()
                .filter(|&n| cli.max_n.is_none_or(|m| n <= m))
                .collect();
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cli.jobs.max(1))
                .build()
                .map_err(|e| HarnessError::Pool(e.to_string()))?;
            let rows = pool.install(|| sweep::sweep(fam, &ns, check, base))?;
            let text = match cli.format {
                Format::Csv => sweep::to_csv(&rows)?,
                Format::Json => pretty(&rows)?,
            };
            emit(out, &text)?;
        }
        Command::Report { bundle } => {
            let text = std::fs::read_to_string(&bundle).with_context(|| format!("reading {}", bundle.display()))?;
            let b: Bundle = serde_json::from_str(&text).map_err(HarnessError::from)?;
            match cli.format {
                Format::Json => emit(out, &pretty(&summarise(&b))?)?,
                Format::Csv => emit(out, &b.to_csv()?)?,
            }
            if b.failed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::PurgeCache => {
            let cache = Cache::from_env();
            let n = cache.purge()?;
            eprintln!("removed {n} entries from {}", cache.dir().display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = matches!(
                e.downcast_ref::<HarnessError>(),
                Some(HarnessError::Parse(_) | HarnessError::UnknownCheck(_) | HarnessError::Core(CoreError::Parse(_)))
            );
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
