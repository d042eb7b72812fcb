//! Seeded synthetic transaction generators.
//!
//! `Dense`: a small universe and a few item templates; each transaction is a
//! template prefix with occasional noise substitutions, so prefixes are
//! heavily shared. `Sparse`: item popularity follows a Zipf law over a large
//! universe and transactions share little.
//!
//! Transaction lengths are `1 + Poisson(avg - 1)`, capped at the universe
//! size. Items are keyed `1..=n_items`.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::TransactionDb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Dense,
    Sparse,
}

impl std::str::FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(GenKind::Dense),
            "sparse" => Ok(GenKind::Sparse),
            other => Err(Error::Config(format!("unknown generator kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub kind: GenKind,
    pub n_transactions: usize,
    pub n_items: usize,
    pub avg_tr_size: f64,
    pub seed: u64,
    /// Dense only.
    pub n_templates: usize,
    /// Dense only: per-position substitution probability.
    pub noise: f64,
    /// Sparse only: Zipf exponent.
    pub zipf_exponent: f64,
}

impl GenConfig {
    pub fn dense(n_transactions: usize, n_items: usize, avg_tr_size: f64, seed: u64) -> Self {
        Self {
            kind: GenKind::Dense,
            n_transactions,
            n_items,
            avg_tr_size,
            seed,
            n_templates: 4,
            noise: 0.1,
            zipf_exponent: 1.0,
        }
    }

    pub fn sparse(n_transactions: usize, n_items: usize, avg_tr_size: f64, seed: u64) -> Self {
        Self {
            kind: GenKind::Sparse,
            ..Self::dense(n_transactions, n_items, avg_tr_size, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.avg_tr_size >= 1.0 && self.avg_tr_size.is_finite()) {
            return Err(Error::Config(format!("avg_tr_size must be >= 1, got {}", self.avg_tr_size)));
        }
        if self.n_transactions > 0 && self.n_items == 0 {
            return Err(Error::Config("n_items must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::Config(format!("noise must be in [0, 1], got {}", self.noise)));
        }
        if self.n_templates == 0 {
            return Err(Error::Config("n_templates must be positive".into()));
        }
        if self.zipf_exponent < 0.0 {
            return Err(Error::Config("zipf exponent must be non-negative".into()));
        }
        Ok(())
    }
}

fn length(rng: &mut ChaCha8Rng, lengths: Option<&Poisson<f64>>, cap: usize) -> usize {
    let extra = lengths.map_or(0, |p| p.sample(rng) as usize);
    (1 + extra).min(cap)
}

/// Rows of item indices (0-based), deterministic for a given config.
pub fn generate_rows(cfg: &GenConfig) -> Result<Vec<Vec<usize>>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lengths = (cfg.avg_tr_size > 1.0)
        .then(|| Poisson::new(cfg.avg_tr_size - 1.0))
        .transpose()
        .map_err(|e| Error::Config(e.to_string()))?;
    let n = cfg.n_items;
    let mut rows = Vec::with_capacity(cfg.n_transactions);
    match cfg.kind {
        GenKind::Dense => {
            let templates: Vec<Vec<usize>> = (0..cfg.n_templates)
                .map(|_| {
                    let mut t: Vec<usize> = (0..n).collect();
                    t.shuffle(&mut rng);
                    t
                })
                .collect();
            for _ in 0..cfg.n_transactions {
                let len = length(&mut rng, lengths.as_ref(), n);
                let t = &templates[rng.random_range(0..templates.len())];
                let mut row: Vec<usize> = t[..len].to_vec();
                for pos in 0..len {
                    if len < n && rng.random_bool(cfg.noise) {
                        loop {
                            let cand = rng.random_range(0..n);
                            if !row.contains(&cand) {
                                row[pos] = cand;
                                break;
                            }
                        }
                    }
                }
                rows.push(row);
            }
        }
        GenKind::Sparse => {
            let zipf = Zipf::new(n as f64, cfg.zipf_exponent).map_err(|e| Error::Config(e.to_string()))?;
            for _ in 0..cfg.n_transactions {
                let len = length(&mut rng, lengths.as_ref(), n);
                let mut row = BTreeSet::new();
                let mut attempts = 0;
                while row.len() < len && attempts < 64 * len {
                    row.insert(zipf.sample(&mut rng) as usize - 1);
                    attempts += 1;
                }
                while row.len() < len {
                    row.insert(rng.random_range(0..n));
                }
                let mut row: Vec<usize> = row.into_iter().collect();
                row.shuffle(&mut rng);
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// Generates a staged db with items keyed `1..=n_items`.
pub fn generate(cfg: &GenConfig) -> Result<TransactionDb> {
    let rows: Vec<Vec<String>> = generate_rows(cfg)?
        .into_iter()
        .map(|r| r.into_iter().map(|i| (i + 1).to_string()).collect())
        .collect();
    Ok(TransactionDb::from_keyed(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_len(db: &TransactionDb) -> f64 {
        db.avg_transaction_size()
    }

    #[test]
    fn dense_shape() {
        let db = generate(&GenConfig::dense(1200, 38, 7.0, 42)).unwrap();
        assert_eq!(db.len(), 1200);
        assert!((mean_len(&db) - 7.0).abs() <= 0.7, "{}", mean_len(&db));
        assert!(db.n_items() <= 38);
    }

    #[test]
    fn sparse_shape() {
        let db = generate(&GenConfig::sparse(1600, 500, 7.9, 7)).unwrap();
        assert_eq!(db.len(), 1600);
        assert!((mean_len(&db) - 7.9).abs() <= 0.79, "{}", mean_len(&db));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_rows(&GenConfig::sparse(50, 100, 5.0, 3)).unwrap();
        let b = generate_rows(&GenConfig::sparse(50, 100, 5.0, 3)).unwrap();
        let c = generate_rows(&GenConfig::sparse(50, 100, 5.0, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_transactions() {
        assert!(generate(&GenConfig::dense(0, 38, 7.0, 1)).unwrap().is_empty());
    }

    #[test]
    fn dense_shares_more_prefixes_than_sparse() {
        use crate::{StorageConfig, WpsIndex};
        let d = WpsIndex::build(&generate(&GenConfig::dense(500, 40, 6.0, 1)).unwrap(), &StorageConfig::default()).unwrap();
        let s = WpsIndex::build(&generate(&GenConfig::sparse(500, 400, 6.0, 1)).unwrap(), &StorageConfig::default()).unwrap();
        assert!(d.tree().n_nodes() < s.tree().n_nodes());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(generate(&GenConfig::dense(10, 0, 3.0, 1)).is_err());
        assert!(generate(&GenConfig::dense(10, 5, 0.5, 1)).is_err());
    }
}
