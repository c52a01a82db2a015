//! Synthetic 3-path instances and the experiment driver.

mod run;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use run::{run_benchmark, BenchConfig, BenchReport, BenchRow, Experiment, Method, Verification};

use crate::data::{Instance, Relation};
use crate::error::{Error, Result};
use crate::query::{parse_query, Query};
use crate::value::Value;

/// Controls the sampled domain, and so the join size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JoinSize {
    /// Domain `ceil(2 * sqrt(n))`.
    Large,
    /// Domain `ceil(n / 10)`.
    Small,
}

impl fmt::Display for JoinSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JoinSize::Large => "large",
            JoinSize::Small => "small",
        })
    }
}

impl FromStr for JoinSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<JoinSize> {
        match s.to_ascii_lowercase().as_str() {
            "large" => Ok(JoinSize::Large),
            "small" => Ok(JoinSize::Small),
            _ => Err(Error::Config(format!(
                "unknown join size `{s}` (expected large or small)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n: usize,
    pub join_size: JoinSize,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(n: usize, join_size: JoinSize, seed: u64) -> GenConfig {
        GenConfig { n, join_size, seed }
    }

    pub fn domain(&self) -> u64 {
        let n = self.n as u64;
        match self.join_size {
            JoinSize::Large => {
                // Smallest d with d^2 >= 4n.
                let mut d = ((4 * n) as f64).sqrt() as u64;
                while d * d < 4 * n {
                    d += 1;
                }
                while d > 0 && (d - 1) * (d - 1) >= 4 * n {
                    d -= 1;
                }
                d
            }
            JoinSize::Small => n.div_ceil(10),
        }
    }
}

/// The query all generated instances are built for.
pub fn three_path_query() -> Query {
    parse_query("Q(A,B,C,D) :- R(A,B), S(B,C), T(C,D).").expect("valid query")
}

/// `R(A,B)`, `S(B,C)`, `T(C,D)` with `n` rows each, cells uniform in `[1, domain]`.
pub fn generate_instance(config: &GenConfig) -> Result<Instance> {
    if config.n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    let domain = config.domain() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut db = Instance::new();
    for (name, cols) in [("R", ["A", "B"]), ("S", ["B", "C"]), ("T", ["C", "D"])] {
        let rows = (0..config.n)
            .map(|_| {
                vec![
                    Value::Int(rng.gen_range(1..=domain)),
                    Value::Int(rng.gen_range(1..=domain)),
                ]
            })
            .collect();
        db.insert(Relation::new(name, cols.iter().map(|c| c.to_string()).collect(), rows)?);
    }
    Ok(db)
}

/// Writes `R.csv`, `S.csv` and `T.csv` into `dir`, creating it if needed.
pub fn write_instance(db: &Instance, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for rel in db.relations.values() {
        rel.write_csv(&dir.join(format!("{}.csv", rel.name)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domains() {
        assert_eq!(GenConfig::new(10_000, JoinSize::Large, 0).domain(), 200);
        assert_eq!(GenConfig::new(100, JoinSize::Small, 0).domain(), 10);
        assert_eq!(GenConfig::new(1000, JoinSize::Large, 0).domain(), 64);
        assert_eq!(GenConfig::new(1, JoinSize::Large, 0).domain(), 2);
        assert_eq!(GenConfig::new(1, JoinSize::Small, 0).domain(), 1);
        assert_eq!(GenConfig::new(101, JoinSize::Small, 0).domain(), 11);
    }

    #[test]
    fn generation_is_deterministic_and_in_range() {
        let c = GenConfig::new(500, JoinSize::Small, 7);
        let a = generate_instance(&c).unwrap();
        assert_eq!(a, generate_instance(&c).unwrap());
        assert_ne!(a, generate_instance(&GenConfig { seed: 8, ..c }).unwrap());
        for rel in a.relations.values() {
            assert_eq!(rel.len(), 500);
            for v in rel.rows.iter().flatten() {
                assert!((1..=50).contains(&v.as_int().unwrap()));
            }
        }
        assert!(generate_instance(&GenConfig::new(0, JoinSize::Large, 0)).is_err());
    }
}
