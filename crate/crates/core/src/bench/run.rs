use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{generate_instance, three_path_query, GenConfig, JoinSize};
use crate::baseline::{materialize_and_sort_with, sort_before_join_access, topk_heap_access_with, BaselineConfig};
use crate::bind::AnswerTuple;
use crate::data::Instance;
use crate::engine::DirectIndex;
use crate::error::{Error, Result};
use crate::query::{OrderSpec, Query};
use crate::select::select_lex_with_stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Direct access: preprocessing plus one access.
    Da,
    /// Single access by selection.
    Sa,
    FullSort,
    TopkHeap,
    /// Runs under `lex: B`.
    SortBeforeJoin,
}

fn default_seed() -> u64 {
    1
}

fn methods_a() -> Vec<Method> {
    vec![Method::Da, Method::Sa, Method::FullSort]
}

fn methods_b() -> Vec<Method> {
    vec![
        Method::Da,
        Method::Sa,
        Method::TopkHeap,
        Method::SortBeforeJoin,
        Method::FullSort,
    ]
}

/// One experiment descriptor; `kind` selects the variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Experiment {
    /// Median access under `lex: A,B,C,D` for every n and join size.
    A {
        ns: Vec<usize>,
        join_sizes: Vec<JoinSize>,
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "methods_a")]
        methods: Vec<Method>,
    },
    /// Time against k at a fixed instance. Default ks: 1, 10, 100, ... and |J|-1.
    B {
        n: usize,
        join_size: JoinSize,
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default)]
        ks: Option<Vec<u64>>,
        #[serde(default = "methods_b")]
        methods: Vec<Method>,
    },
    /// (DA preprocessing + one access) / (one single access) at the median.
    C {
        ns: Vec<usize>,
        join_sizes: Vec<JoinSize>,
        seeds: Vec<u64>,
    },
}

fn default_verify_cap() -> u64 {
    1_000_000
}

fn default_result_cap() -> u64 {
    crate::baseline::DEFAULT_RESULT_CAP
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub experiments: Vec<Experiment>,
    /// Answers are checked against the materialized oracle when |J| is at most this.
    #[serde(default = "default_verify_cap")]
    pub verify_cap: u64,
    #[serde(default = "default_result_cap")]
    pub result_cap: u64,
    /// Run every measurement once untimed first.
    #[serde(default = "default_true")]
    pub warmup: bool,
    #[serde(default)]
    pub select_seed: u64,
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<BenchConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<BenchConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        BenchConfig::from_json(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verification {
    /// Matched the materialized, sorted result.
    Oracle,
    /// |J| above the verification cap; matched the direct-access answer.
    CrossChecked,
    /// |J| above the verification cap and nothing independent to compare with.
    Capped,
}

/// One report line. Timings are in milliseconds; absent when the run failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub experiment: String,
    pub method: Method,
    pub n: usize,
    pub k: Option<u128>,
    pub join_size: JoinSize,
    pub seed: u64,
    pub wall_ms: Option<f64>,
    pub preprocess_ms: Option<f64>,
    pub access_ms: Option<f64>,
    pub probes: Option<u64>,
    pub comparisons: Option<u64>,
    pub answer_count: Option<u128>,
    pub verification: Option<Verification>,
    pub ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let csv_err = |e: csv::Error| Error::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        for row in &self.rows {
            w.serialize(row).map_err(csv_err)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

struct Measured {
    answer: AnswerTuple,
    preprocess_ms: f64,
    access_ms: f64,
    probes: Option<u64>,
    comparisons: Option<u64>,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn measure(
    method: Method,
    q: &Query,
    db: &Instance,
    order: &OrderSpec,
    k: u128,
    config: &BenchConfig,
) -> Result<Measured> {
    let baseline = BaselineConfig {
        result_cap: config.result_cap,
    };
    let t0 = Instant::now();
    match method {
        Method::Da => {
            let ix = DirectIndex::build(q, db, order)?;
            let preprocess_ms = ms(t0);
            let t1 = Instant::now();
            let (answer, stats) = ix.access_with_stats(k)?;
            Ok(Measured {
                answer,
                preprocess_ms,
                access_ms: ms(t1),
                probes: Some(stats.probes),
                comparisons: Some(ix.preprocess_counters().comparisons),
            })
        }
        Method::Sa => {
            let sel = select_lex_with_stats(q, db, order, k, config.select_seed)?;
            Ok(Measured {
                answer: sel.answer,
                preprocess_ms: 0.0,
                access_ms: ms(t0),
                probes: Some(sel.counters.probes),
                comparisons: Some(sel.counters.comparisons),
            })
        }
        Method::FullSort => {
            let mut all = materialize_and_sort_with(q, db, order, baseline)?;
            let count = all.len() as u128;
            if k >= count {
                return Err(Error::OutOfRange { k, count });
            }
            Ok(Measured {
                answer: all.swap_remove(k as usize),
                preprocess_ms: 0.0,
                access_ms: ms(t0),
                probes: None,
                comparisons: None,
            })
        }
        Method::TopkHeap => {
            let (answer, _) = topk_heap_access_with(q, db, order, k, baseline)?;
            Ok(Measured {
                answer,
                preprocess_ms: 0.0,
                access_ms: ms(t0),
                probes: None,
                comparisons: None,
            })
        }
        Method::SortBeforeJoin => {
            let (answer, _) = sort_before_join_access(q, db, order, k)?;
            Ok(Measured {
                answer,
                preprocess_ms: 0.0,
                access_ms: ms(t0),
                probes: None,
                comparisons: None,
            })
        }
    }
}

/// Reference answers for one instance and order: the sorted oracle when small
/// enough, otherwise a direct-access index.
struct Reference {
    count: u128,
    oracle: Option<Vec<AnswerTuple>>,
    index: DirectIndex,
}

impl Reference {
    fn new(q: &Query, db: &Instance, order: &OrderSpec, config: &BenchConfig) -> Result<Reference> {
        let index = DirectIndex::build(q, db, order)?;
        let count = index.count();
        let oracle = if count <= u128::from(config.verify_cap) {
            let baseline = BaselineConfig {
                result_cap: config.result_cap,
            };
            Some(materialize_and_sort_with(q, db, order, baseline)?)
        } else {
            None
        };
        Ok(Reference { count, oracle, index })
    }

    fn check(&self, method: Method, k: u128, answer: &AnswerTuple) -> Result<Verification> {
        let (expected, verification) = match &self.oracle {
            Some(all) => (all[k as usize].clone(), Verification::Oracle),
            None if method == Method::Da => return Ok(Verification::Capped),
            None => (self.index.access(k)?, Verification::CrossChecked),
        };
        if &expected == answer {
            Ok(verification)
        } else {
            Err(Error::Internal(format!(
                "answer mismatch at k = {k}: got {:?}, expected {:?}",
                answer.values, expected.values
            )))
        }
    }
}

struct InstanceRun<'a> {
    experiment: &'static str,
    gen: GenConfig,
    q: Query,
    db: Instance,
    config: &'a BenchConfig,
    refs: HashMap<String, Reference>,
}

impl InstanceRun<'_> {
    fn order_for(method: Method) -> OrderSpec {
        match method {
            Method::SortBeforeJoin => OrderSpec::lex(&["B"]),
            _ => OrderSpec::lex(&["A", "B", "C", "D"]),
        }
    }

    fn reference(&mut self, order: &OrderSpec) -> Result<&Reference> {
        let key = order.to_string();
        if !self.refs.contains_key(&key) {
            let r = Reference::new(&self.q, &self.db, order, self.config)?;
            self.refs.insert(key.clone(), r);
        }
        Ok(&self.refs[&key])
    }

    fn empty_row(&self, method: Method, k: Option<u128>) -> BenchRow {
        BenchRow {
            experiment: self.experiment.to_string(),
            method,
            n: self.gen.n,
            k,
            join_size: self.gen.join_size,
            seed: self.gen.seed,
            wall_ms: None,
            preprocess_ms: None,
            access_ms: None,
            probes: None,
            comparisons: None,
            answer_count: None,
            verification: None,
            ratio: None,
            error: None,
        }
    }

    /// Position to use; `None` picks the median.
    fn row(&mut self, method: Method, k: Option<u128>) -> BenchRow {
        let order = Self::order_for(method);
        let mut row = self.empty_row(method, k);
        let count = match self.reference(&order) {
            Ok(r) => r.count,
            Err(e) => {
                row.error = Some(e.to_string());
                return row;
            }
        };
        row.answer_count = Some(count);
        if count == 0 {
            row.error = Some("empty join result".into());
            return row;
        }
        let k = k.unwrap_or((count - 1) / 2);
        row.k = Some(k);
        if self.config.warmup {
            let _ = measure(method, &self.q, &self.db, &order, k, self.config);
        }
        let outcome = measure(method, &self.q, &self.db, &order, k, self.config).and_then(|m| {
            let v = self.refs[&order.to_string()].check(method, k, &m.answer)?;
            Ok((m, v))
        });
        match outcome {
            Ok((m, v)) => {
                row.preprocess_ms = Some(m.preprocess_ms);
                row.access_ms = Some(m.access_ms);
                row.wall_ms = Some(m.preprocess_ms + m.access_ms);
                row.probes = m.probes;
                row.comparisons = m.comparisons;
                row.verification = Some(v);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    }
}

fn instance_run<'a>(experiment: &'static str, gen: GenConfig, config: &'a BenchConfig) -> Result<InstanceRun<'a>> {
    Ok(InstanceRun {
        experiment,
        gen,
        q: three_path_query(),
        db: generate_instance(&gen)?,
        config,
        refs: HashMap::new(),
    })
}

/// Runs every experiment sequentially. Failures are recorded per row.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    for exp in &config.experiments {
        match exp {
            Experiment::A {
                ns,
                join_sizes,
                seed,
                methods,
            } => {
                for &n in ns {
                    for &js in join_sizes {
                        let mut run = instance_run("A", GenConfig::new(n, js, *seed), config)?;
                        for &m in methods {
                            report.rows.push(run.row(m, None));
                        }
                    }
                }
            }
            Experiment::B {
                n,
                join_size,
                seed,
                ks,
                methods,
            } => {
                let mut run = instance_run("B", GenConfig::new(*n, *join_size, *seed), config)?;
                let ks = match ks {
                    Some(ks) => ks.iter().map(|&k| u128::from(k)).collect(),
                    None => {
                        let order = InstanceRun::order_for(Method::Da);
                        let count = run.reference(&order)?.count;
                        k_sweep(count)
                    }
                };
                for &k in &ks {
                    for &m in methods {
                        report.rows.push(run.row(m, Some(k)));
                    }
                }
            }
            Experiment::C { ns, join_sizes, seeds } => {
                for &n in ns {
                    for &js in join_sizes {
                        for &seed in seeds {
                            let mut run = instance_run("C", GenConfig::new(n, js, seed), config)?;
                            let mut da = run.row(Method::Da, None);
                            let mut sa = run.row(Method::Sa, None);
                            if let (Some(d), Some(s)) = (da.wall_ms, sa.wall_ms) {
                                let ratio = d / s.max(1e-9);
                                da.ratio = Some(ratio);
                                sa.ratio = Some(ratio);
                            }
                            report.rows.push(da);
                            report.rows.push(sa);
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// 1, 10, 100, ... below |J|-1, then |J|-1.
pub(crate) fn k_sweep(count: u128) -> Vec<u128> {
    if count == 0 {
        return Vec::new();
    }
    let last = count - 1;
    let mut ks = Vec::new();
    let mut k = 1u128;
    while k < last {
        ks.push(k);
        k *= 10;
    }
    ks.push(last);
    ks
}
