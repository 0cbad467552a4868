//! Influence-factor relationship matrix.
//!
//! Cell `(r, c)` counts how often factor `r` was immediately followed by
//! factor `c` in some chain. Row sums are active sums, column sums passive
//! sums.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::model::{
    validate_chain, ChainSet, Factor, FactorCategory, FactorKey, FailureChain, Violation,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidChain {
    /// 0-based position in the chain set.
    pub index: usize,
    pub source_alert: String,
    pub case_label: String,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} invalid chain(s); first is #{} ({}/{}): {}",
    .invalid.len(),
    .invalid[0].index + 1,
    .invalid[0].source_alert,
    .invalid[0].case_label,
    .invalid[0].violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct BuildError {
    pub invalid: Vec<InvalidChain>,
}

/// Dense square count matrix over an ordered factor list. Factor ids are
/// `1..=n` in list order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationshipMatrix {
    factors: Vec<Factor>,
    /// Row-major, `n * n`.
    counts: Vec<u64>,
}

impl RelationshipMatrix {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Count for the transition `row -> col` (0-based indices).
    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.dim() + col]
    }

    pub fn row(&self, row: usize) -> &[u64] {
        let n = self.dim();
        &self.counts[row * n..(row + 1) * n]
    }

    pub fn index_of(&self, key: &FactorKey) -> Option<usize> {
        self.factors
            .iter()
            .position(|f| f.category == key.category && f.canonical_key == key.canonical_key)
    }

    /// Count for a transition between two factors looked up by name.
    pub fn count_between(&self, from: &FactorKey, to: &FactorKey) -> u64 {
        match (self.index_of(from), self.index_of(to)) {
            (Some(r), Some(c)) => self.get(r, c),
            _ => 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Nonzero cells as `(row, col, count)` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        let n = self.dim();
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (i / n, i % n, c))
    }
}

/// Collects factors in first-appearance order, then stable-sorts them by
/// category. Returns the ordered factors with ids assigned.
fn order_factors(mut seen: Vec<(FactorKey, String)>) -> Vec<Factor> {
    seen.sort_by_key(|(key, _)| key.category);
    seen.into_iter()
        .enumerate()
        .map(|(i, (key, display_name))| Factor {
            id: i as u32 + 1,
            category: key.category,
            display_name,
            canonical_key: key.canonical_key,
        })
        .collect()
}

fn chain_keys(chain: &FailureChain) -> Vec<FactorKey> {
    chain
        .steps
        .iter()
        .map(|s| s.key().expect("validated chains have nonempty names"))
        .collect()
}

/// Aggregates every consecutive step pair of every chain into a matrix.
/// All chains are validated first; if any is invalid nothing is built.
pub fn build_matrix(chains: &ChainSet) -> Result<RelationshipMatrix, BuildError> {
    let invalid: Vec<InvalidChain> = chains
        .iter()
        .enumerate()
        .filter_map(|(index, chain)| {
            let violations = validate_chain(chain);
            (!violations.is_empty()).then(|| InvalidChain {
                index,
                source_alert: chain.source_alert.clone(),
                case_label: chain.case_label.clone(),
                violations,
            })
        })
        .collect();
    if !invalid.is_empty() {
        return Err(BuildError { invalid });
    }

    let keyed: Vec<(Vec<FactorKey>, &FailureChain)> =
        chains.iter().map(|c| (chain_keys(c), c)).collect();

    let mut seen: Vec<(FactorKey, String)> = Vec::new();
    let mut known: HashSet<FactorKey> = HashSet::new();
    for (keys, chain) in &keyed {
        for (key, step) in keys.iter().zip(&chain.steps) {
            if known.insert(key.clone()) {
                seen.push((key.clone(), step.name.trim().to_string()));
            }
        }
    }

    let factors = order_factors(seen);
    let index: HashMap<FactorKey, usize> =
        factors.iter().enumerate().map(|(i, f)| (f.key(), i)).collect();
    let n = factors.len();
    let mut counts = vec![0u64; n * n];
    for (keys, _) in &keyed {
        for pair in keys.windows(2) {
            counts[index[&pair[0]] * n + index[&pair[1]]] += 1;
        }
    }
    Ok(RelationshipMatrix { factors, counts })
}

/// Union of the factor sets with cell-wise addition. Factors of `a` keep
/// their precedence (and display names) over novel factors of `b`.
pub fn merge(a: &RelationshipMatrix, b: &RelationshipMatrix) -> RelationshipMatrix {
    let mut seen: Vec<(FactorKey, String)> = a
        .factors
        .iter()
        .map(|f| (f.key(), f.display_name.clone()))
        .collect();
    for f in &b.factors {
        if a.index_of(&f.key()).is_none() {
            seen.push((f.key(), f.display_name.clone()));
        }
    }
    let factors = order_factors(seen);
    let index: HashMap<FactorKey, usize> =
        factors.iter().enumerate().map(|(i, f)| (f.key(), i)).collect();
    let n = factors.len();
    let mut counts = vec![0u64; n * n];
    for m in [a, b] {
        let remap: Vec<usize> = m.factors.iter().map(|f| index[&f.key()]).collect();
        for (r, c, v) in m.edges() {
            counts[remap[r] * n + remap[c]] += v;
        }
    }
    RelationshipMatrix { factors, counts }
}

/// One row of a sums table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorSums {
    pub id: u32,
    pub category: FactorCategory,
    pub name: String,
    pub active: u64,
    pub passive: u64,
}

/// Active and passive sums per factor, in factor order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SumsTable {
    pub rows: Vec<FactorSums>,
}

impl SumsTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn active(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.active).collect()
    }

    pub fn passive(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.passive).collect()
    }

    pub fn total_active(&self) -> u64 {
        self.rows.iter().map(|r| r.active).sum()
    }

    pub fn total_passive(&self) -> u64 {
        self.rows.iter().map(|r| r.passive).sum()
    }

    pub fn by_id(&self, id: u32) -> Option<&FactorSums> {
        self.rows.iter().find(|r| r.id == id)
    }
}

pub fn sums(m: &RelationshipMatrix) -> SumsTable {
    let n = m.dim();
    let rows = m
        .factors
        .iter()
        .enumerate()
        .map(|(i, f)| FactorSums {
            id: f.id,
            category: f.category,
            name: f.display_name.clone(),
            active: m.row(i).iter().sum(),
            passive: (0..n).map(|r| m.get(r, i)).sum(),
        })
        .collect();
    SumsTable { rows }
}

pub mod oracle {
    //! Reference computation of the sums straight from the chains, sharing
    //! nothing with the matrix path beyond name normalization.

    use crate::model::{normalize_name, ChainSet, FactorCategory};

    use super::{FactorSums, SumsTable};

    struct Entry {
        category: FactorCategory,
        key: String,
        name: String,
        active: u64,
        passive: u64,
    }

    fn slot(table: &mut Vec<Entry>, category: FactorCategory, raw: &str) -> usize {
        let key = normalize_name(raw).unwrap_or_default();
        if let Some(i) = table
            .iter()
            .position(|e| e.category == category && e.key == key)
        {
            return i;
        }
        table.push(Entry {
            category,
            key,
            name: raw.trim().to_string(),
            active: 0,
            passive: 0,
        });
        table.len() - 1
    }

    /// Counts every adjacent step pair by direct enumeration over a flat
    /// lookup table. Assumes the chains are valid.
    pub fn brute_force_sums(chains: &ChainSet) -> SumsTable {
        let mut table: Vec<Entry> = Vec::new();
        for chain in chains {
            let steps = &chain.steps;
            for (t, step) in steps.iter().enumerate() {
                let here = slot(&mut table, step.category, &step.name);
                if t + 1 < steps.len() {
                    table[here].active += 1;
                }
                if t > 0 {
                    table[here].passive += 1;
                }
            }
        }

        let mut rows = Vec::with_capacity(table.len());
        for category in FactorCategory::ALL {
            for e in table.iter().filter(|e| e.category == category) {
                rows.push(FactorSums {
                    id: rows.len() as u32 + 1,
                    category: e.category,
                    name: e.name.clone(),
                    active: e.active,
                    passive: e.passive,
                });
            }
        }
        SumsTable { rows }
    }
}

pub use oracle::brute_force_sums;
