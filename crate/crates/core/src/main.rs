use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use cqda::baseline::{
    count_answers, emit_sql, materialize_and_sort, sort_before_join_access, topk_heap_access, BaselineConfig,
    SqlDialect, StrategyKind, StrategyLog,
};
use cqda::bench::{generate_instance, run_benchmark, write_instance, BenchConfig, GenConfig, JoinSize};
use cqda::select::{select_lex_with_stats, select_sum_with_stats};
use cqda::{analyze, parse_order, parse_query, DirectIndex, Error, Instance, OrderKind, OrderSpec, Query};

#[derive(Parser)]
#[command(name = "cqda", version, about = "Ranked access to conjunctive query answers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct QueryArgs {
    /// File holding one query, e.g. `Q(A,B,C) :- R(A,B), S(B,C).`
    #[arg(long)]
    query: PathBuf,
    /// Directory with one `<Relation>.csv` per relation.
    #[arg(long)]
    data: PathBuf,
    /// `lex: A,B,C` or `sum: A,B`.
    #[arg(long)]
    order: String,
    /// Comma-separated zero-based positions.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<u128>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    FullSort,
    TopkHeap,
    SortBeforeJoin,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dialect {
    Offset,
    Cte,
}

#[derive(Clone, Copy, ValueEnum)]
enum JoinSizeArg {
    Large,
    Small,
}

#[derive(Subcommand)]
enum Command {
    /// Print the tractability report as JSON.
    Analyze {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        order: String,
    },
    /// Direct access: preprocess once, then one JSON line per position.
    Access {
        #[command(flatten)]
        args: QueryArgs,
        #[arg(long)]
        stats: bool,
    },
    /// Number of answers.
    Count {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Single access by selection, from scratch for every position.
    Select {
        #[command(flatten)]
        args: QueryArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        stats: bool,
    },
    /// Sort-based reference strategies.
    Baseline {
        #[command(flatten)]
        args: QueryArgs,
        #[arg(long, value_enum)]
        strategy: Strategy,
    },
    /// SQL text retrieving the given positions.
    EmitSql {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        order: String,
        #[arg(long, value_enum)]
        dialect: Dialect,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u128>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic R(A,B), S(B,C), T(C,D) instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        join_size: JoinSizeArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark config; writes CSV to --out and JSON next to it.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_query(path: &Path) -> cqda::Result<Query> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_query(&text)
}

fn load(args: &QueryArgs) -> cqda::Result<(Query, OrderSpec, Instance)> {
    let q = read_query(&args.query)?;
    let order = parse_order(&args.order, &q)?;
    let db = Instance::load_for_query(&args.data, &q)?;
    Ok((q, order, db))
}

fn error_json(e: &Error) -> Json {
    match e {
        Error::NotRouted(reasons) => json!({"error": e.code(), "message": e.to_string(), "reasons": reasons}),
        _ => json!({"error": e.code(), "message": e.to_string()}),
    }
}

fn line(out: &mut impl Write, v: &Json) -> anyhow::Result<()> {
    writeln!(out, "{v}")?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Result<(), Error>> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    macro_rules! tri {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(e) => return Ok(Err(e)),
            }
        };
    }
    match cli.command {
        Command::Analyze { query, order } => {
            let q = tri!(read_query(&query));
            let o = tri!(parse_order(&order, &q));
            line(&mut out, &serde_json::to_value(analyze(&q, &o))?)?;
        }
        Command::Access { args, stats } => {
            let (q, o, db) = tri!(load(&args));
            let t0 = Instant::now();
            let ix = tri!(DirectIndex::build(&q, &db, &o));
            let preprocess_ms = t0.elapsed().as_secs_f64() * 1e3;
            for &k in &args.k {
                let mut v = match ix.access_with_stats(k) {
                    Ok((a, s)) => {
                        let mut v = json!({"k": k, "answer": a});
                        if stats {
                            v["stats"] = json!({
                                "probes": s.probes,
                                "comparisons": ix.preprocess_counters().comparisons,
                                "preprocess_ms": preprocess_ms,
                            });
                        }
                        v
                    }
                    Err(e) => json!({"k": k, "error": e.code()}),
                };
                if v.get("error").is_some() && stats {
                    v["stats"] = json!({"preprocess_ms": preprocess_ms});
                }
                line(&mut out, &v)?;
            }
        }
        Command::Count { query, data } => {
            let q = tri!(read_query(&query));
            let db = tri!(Instance::load_for_query(&data, &q));
            let head: Vec<&str> = q.head.iter().map(String::as_str).collect();
            let count = match DirectIndex::build(&q, &db, &OrderSpec::lex(&head)) {
                Ok(ix) => ix.count(),
                Err(Error::NotRouted(_)) => tri!(count_answers(&q, &db, BaselineConfig::default())),
                Err(e) => return Ok(Err(e)),
            };
            line(&mut out, &json!({"count": count}))?;
        }
        Command::Select { args, seed, stats } => {
            let (q, o, db) = tri!(load(&args));
            for &k in &args.k {
                let t0 = Instant::now();
                let r = match o.kind {
                    OrderKind::Lex => select_lex_with_stats(&q, &db, &o, k, seed),
                    OrderKind::Sum => select_sum_with_stats(&q, &db, &o, k, seed),
                };
                let v = match r {
                    Ok(sel) => {
                        let mut v = json!({"k": k, "answer": sel.answer});
                        if stats {
                            v["stats"] = json!({
                                "probes": sel.counters.probes,
                                "comparisons": sel.counters.comparisons,
                                "rows": sel.counters.rows,
                                "sorts": sel.counters.sorts,
                                "access_ms": t0.elapsed().as_secs_f64() * 1e3,
                            });
                        }
                        v
                    }
                    Err(e @ (Error::OutOfRange { .. } | Error::KOutOfRange { .. })) => {
                        json!({"k": k, "error": e.code()})
                    }
                    Err(e) => return Ok(Err(e)),
                };
                line(&mut out, &v)?;
            }
        }
        Command::Baseline { args, strategy } => {
            let (q, o, db) = tri!(load(&args));
            let sorted = match strategy {
                Strategy::FullSort => Some(tri!(materialize_and_sort(&q, &db, &o))),
                _ => None,
            };
            for &k in &args.k {
                let r = match (strategy, &sorted) {
                    (Strategy::FullSort, Some(all)) => match all.get(k as usize).filter(|_| k < all.len() as u128) {
                        Some(a) => Ok((
                            a.clone(),
                            StrategyLog {
                                requested: StrategyKind::FullSort,
                                ran: StrategyKind::FullSort,
                                switched_to_full_sort: false,
                                emitted: all.len() as u64,
                                answer_count: Some(all.len() as u128),
                                reason: "materialized and sorted every answer".into(),
                            },
                        )),
                        None => Err(Error::OutOfRange {
                            k,
                            count: all.len() as u128,
                        }),
                    },
                    (Strategy::TopkHeap, _) => topk_heap_access(&q, &db, &o, k),
                    (Strategy::SortBeforeJoin, _) => sort_before_join_access(&q, &db, &o, k),
                    (Strategy::FullSort, None) => unreachable!(),
                };
                let v = match r {
                    Ok((a, log)) => json!({"k": k, "answer": a, "strategy_log": log}),
                    Err(e @ Error::OutOfRange { .. }) => json!({"k": k, "error": e.code()}),
                    Err(e) => return Ok(Err(e)),
                };
                line(&mut out, &v)?;
            }
        }
        Command::EmitSql {
            query,
            order,
            dialect,
            k,
            out: path,
        } => {
            let q = tri!(read_query(&query));
            let o = tri!(parse_order(&order, &q));
            let dialect = match dialect {
                Dialect::Offset => SqlDialect::OffsetLimit,
                Dialect::Cte => SqlDialect::CteRowNumber,
            };
            let sql = tri!(emit_sql(&q, &o, &k, dialect));
            match path {
                Some(p) => std::fs::write(&p, sql)?,
                None => out.write_all(sql.as_bytes())?,
            }
        }
        Command::Gen {
            n,
            join_size,
            seed,
            out: dir,
        } => {
            let join_size = match join_size {
                JoinSizeArg::Large => JoinSize::Large,
                JoinSizeArg::Small => JoinSize::Small,
            };
            let config = GenConfig::new(n, join_size, seed);
            let db = tri!(generate_instance(&config));
            tri!(write_instance(&db, &dir));
            line(
                &mut out,
                &json!({"n": n, "join_size": join_size, "seed": seed, "domain": config.domain(), "out": dir}),
            )?;
        }
        Command::Bench { config, out: path } => {
            let config = tri!(BenchConfig::load(&config));
            let report = tri!(run_benchmark(&config));
            tri!(report.write_csv(&path));
            let json_path = path.with_extension("json");
            tri!(report.write_json(&json_path));
            let failed = report.rows.iter().filter(|r| r.error.is_some()).count();
            line(
                &mut out,
                &json!({"rows": report.rows.len(), "failed_rows": failed, "csv": path, "json": json_path}),
            )?;
        }
    }
    Ok(Ok(()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            println!("{}", error_json(&e));
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
