//! Normalized scores, competition ranks, region classification and
//! key-factor selection on top of a sums table.

use std::fmt;

use thiserror::Error;

use crate::matrix::{build_matrix, sums, BuildError, SumsTable};
use crate::model::{ChainSet, FactorCategory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    /// `active_norm / passive_norm` at or above this is Dominant.
    pub dominant_ratio: f64,
    /// `active_norm / passive_norm` at or below this is Reactive.
    pub reactive_ratio: f64,
    /// Minimum `active_norm + passive_norm` for a key factor, in `[0, 200]`.
    pub key_threshold: f64,
    pub display_decimals: u32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            dominant_ratio: 2.0,
            reactive_ratio: 0.5,
            key_threshold: 75.0,
            display_decimals: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{name} must be a positive finite number, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("reactive ratio {reactive} must be below dominant ratio {dominant}")]
    RatiosOutOfOrder { reactive: f64, dominant: f64 },
    #[error("key threshold must lie in [0, 200], got {0}")]
    ThresholdOutOfRange(f64),
    #[error("display decimals must be at most 6, got {0}")]
    TooManyDecimals(u32),
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [
            ("dominant ratio", self.dominant_ratio),
            ("reactive ratio", self.reactive_ratio),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::NotPositive { name, value });
            }
        }
        if self.reactive_ratio >= self.dominant_ratio {
            return Err(ConfigError::RatiosOutOfOrder {
                reactive: self.reactive_ratio,
                dominant: self.dominant_ratio,
            });
        }
        if !(0.0..=200.0).contains(&self.key_threshold) {
            return Err(ConfigError::ThresholdOutOfRange(self.key_threshold));
        }
        if self.display_decimals > 6 {
            return Err(ConfigError::TooManyDecimals(self.display_decimals));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Dominant,
    Dynamic,
    Reactive,
    Isolated,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Dominant => "Dominant",
            Region::Dynamic => "Dynamic",
            Region::Reactive => "Reactive",
            Region::Isolated => "Isolated",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("normalized values must lie in [0, 100], got active {active}, passive {passive}")]
    OutOfRange { active: f64, passive: f64 },
}

/// `100 * x / max(values)`; all zeros when the maximum is zero.
pub fn normalize_axis(values: &[u64]) -> Vec<f64> {
    let max = values.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return vec![0.0; values.len()];
    }
    values
        .iter()
        .map(|&v| 100.0 * v as f64 / max as f64)
        .collect()
}

/// Normalized (active, passive) per row of the table.
pub fn normalize_sums(table: &SumsTable) -> Vec<(f64, f64)> {
    let active = normalize_axis(&table.active());
    let passive = normalize_axis(&table.passive());
    active.into_iter().zip(passive).collect()
}

/// Descending competition ranking ("1224"): each value's rank is one plus
/// the number of strictly greater values.
pub fn competition_rank(values: &[u64]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].cmp(&values[a]));
    let mut ranks = vec![0u32; values.len()];
    let mut current = 1u32;
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && values[i] != values[order[pos - 1]] {
            current = pos as u32 + 1;
        }
        ranks[i] = current;
    }
    ranks
}

pub fn classify(active_norm: f64, passive_norm: f64, cfg: &AnalysisConfig) -> Result<Region, AnalysisError> {
    let in_range = |x: f64| (0.0..=100.0).contains(&x);
    if !in_range(active_norm) || !in_range(passive_norm) {
        return Err(AnalysisError::OutOfRange {
            active: active_norm,
            passive: passive_norm,
        });
    }
    let region = match (active_norm > 0.0, passive_norm > 0.0) {
        (false, false) => Region::Isolated,
        (true, false) => Region::Dominant,
        (false, true) => Region::Reactive,
        (true, true) => {
            let ratio = active_norm / passive_norm;
            if ratio >= cfg.dominant_ratio {
                Region::Dominant
            } else if ratio <= cfg.reactive_ratio {
                Region::Reactive
            } else {
                Region::Dynamic
            }
        }
    };
    Ok(region)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorScore {
    pub id: u32,
    pub category: FactorCategory,
    pub name: String,
    pub active_sum: u64,
    pub passive_sum: u64,
    /// Unrounded.
    pub active_norm: f64,
    /// Unrounded.
    pub passive_norm: f64,
    pub active_rank: u32,
    pub passive_rank: u32,
    pub region: Region,
    pub key: bool,
}

impl FactorScore {
    pub fn combined_norm(&self) -> f64 {
        self.active_norm + self.passive_norm
    }
}

pub fn select_key_factors(scores: &[FactorScore], cfg: &AnalysisConfig) -> Vec<bool> {
    scores
        .iter()
        .map(|s| s.combined_norm() >= cfg.key_threshold)
        .collect()
}

pub enum AnalysisInput<'a> {
    Chains(&'a ChainSet),
    Sums(&'a SumsTable),
}

impl<'a> From<&'a ChainSet> for AnalysisInput<'a> {
    fn from(chains: &'a ChainSet) -> Self {
        AnalysisInput::Chains(chains)
    }
}

impl<'a> From<&'a SumsTable> for AnalysisInput<'a> {
    fn from(table: &'a SumsTable) -> Self {
        AnalysisInput::Sums(table)
    }
}

/// Full scoring pipeline. Chains go through the matrix first; a sums table
/// (for instance a published one) enters directly at the normalization step.
pub fn analyze<'a>(input: impl Into<AnalysisInput<'a>>, cfg: &AnalysisConfig) -> Result<Vec<FactorScore>, AnalysisError> {
    cfg.validate()?;
    let built;
    let table = match input.into() {
        AnalysisInput::Chains(chains) => {
            built = sums(&build_matrix(chains)?);
            &built
        }
        AnalysisInput::Sums(table) => table,
    };

    let norms = normalize_sums(table);
    let active_ranks = competition_rank(&table.active());
    let passive_ranks = competition_rank(&table.passive());

    let mut scores = Vec::with_capacity(table.len());
    for (i, row) in table.rows.iter().enumerate() {
        let (active_norm, passive_norm) = norms[i];
        scores.push(FactorScore {
            id: row.id,
            category: row.category,
            name: row.name.clone(),
            active_sum: row.active,
            passive_sum: row.passive,
            active_norm,
            passive_norm,
            active_rank: active_ranks[i],
            passive_rank: passive_ranks[i],
            region: classify(active_norm, passive_norm, cfg)?,
            key: false,
        });
    }
    let keys = select_key_factors(&scores, cfg);
    for (score, key) in scores.iter_mut().zip(keys) {
        score.key = key;
    }
    Ok(scores)
}

/// Rounds half away from zero. A relative tolerance absorbs the binary
/// representation error of values such as `100 * 1 / 8 = 12.5`.
pub fn round_half_away(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = x * scale;
    let floor = scaled.abs().floor();
    let frac = scaled.abs() - floor;
    let magnitude = if frac >= 0.5 - 1e-9 * scaled.abs().max(1.0) {
        floor + 1.0
    } else {
        floor
    };
    magnitude.copysign(x) / scale
}

pub fn format_fixed(x: f64, decimals: u32) -> String {
    let rounded = round_half_away(x, decimals);
    // avoid "-0.0"
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{:.*}", decimals as usize, rounded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::FactorSums;
    use crate::model::{FactorCategory::*, FailureChain, Step};
    use proptest::prelude::*;

    #[test]
    fn normalization_examples() {
        let n = normalize_axis(&[22, 23, 0]);
        assert_eq!(format_fixed(n[0], 1), "95.7");
        assert_eq!(n[1], 100.0);
        assert_eq!(n[2], 0.0);
        assert_eq!(normalize_axis(&[0, 0, 0]), vec![0.0; 3]);
        assert!(normalize_axis(&[]).is_empty());
        assert_eq!(format_fixed(normalize_axis(&[8, 24])[0], 1), "33.3");
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(format_fixed(12.5, 0), "13");
        assert_eq!(format_fixed(-12.5, 0), "-13");
        assert_eq!(format_fixed(100.0 / 16.0, 1), "6.3");
        assert_eq!(format_fixed(0.05, 1), "0.1");
        assert_eq!(format_fixed(0.0, 1), "0.0");
        assert_eq!(format_fixed(4.34, 1), "4.3");
        assert_eq!(format_fixed(100.0, 1), "100.0");
    }

    #[test]
    fn competition_ranking() {
        assert_eq!(competition_rank(&[12, 12, 11, 23]), vec![2, 2, 4, 1]);
        assert_eq!(competition_rank(&[5, 5, 5]), vec![1, 1, 1]);
        assert!(competition_rank(&[]).is_empty());
        assert_eq!(competition_rank(&[0, 3, 1, 3, 0]), vec![4, 1, 3, 1, 4]);
    }

    #[test]
    fn classification_examples() {
        let cfg = AnalysisConfig::default();
        let n = |s: u64, max: u64| 100.0 * s as f64 / max as f64;
        // factor 13: active 8/23, passive 3/24
        assert_eq!(classify(n(8, 23), n(3, 24), &cfg).unwrap(), Region::Dominant);
        // factor 23: active 22/23, passive 20/24
        assert_eq!(classify(n(22, 23), n(20, 24), &cfg).unwrap(), Region::Dynamic);
        assert_eq!(classify(0.0, 0.0, &cfg).unwrap(), Region::Isolated);
        assert_eq!(classify(10.0, 0.0, &cfg).unwrap(), Region::Dominant);
        assert_eq!(classify(0.0, 10.0, &cfg).unwrap(), Region::Reactive);
        assert_eq!(classify(20.0, 10.0, &cfg).unwrap(), Region::Dominant);
        assert_eq!(classify(5.0, 10.0, &cfg).unwrap(), Region::Reactive);
        assert!(matches!(classify(100.5, 0.0, &cfg), Err(AnalysisError::OutOfRange { .. })));
        assert!(classify(-1.0, 0.0, &cfg).is_err());
    }

    fn score(active_norm: f64, passive_norm: f64) -> FactorScore {
        FactorScore {
            id: 1,
            category: Component,
            name: "x".into(),
            active_sum: 0,
            passive_sum: 0,
            active_norm,
            passive_norm,
            active_rank: 1,
            passive_rank: 1,
            region: Region::Isolated,
            key: false,
        }
    }

    #[test]
    fn key_selection() {
        let cfg = AnalysisConfig::default();
        // factor 46: 0 + 100
        assert_eq!(select_key_factors(&[score(0.0, 100.0)], &cfg), vec![true]);
        // factor 25: sums 1 and 1 with maxima 23 and 24
        let f25 = score(100.0 / 23.0, 100.0 / 24.0);
        assert_eq!(format_fixed(f25.combined_norm(), 1), "8.5");
        assert_eq!(select_key_factors(&[f25], &cfg), vec![false]);

        let zero = AnalysisConfig { key_threshold: 0.0, ..cfg };
        assert_eq!(
            select_key_factors(&[score(0.1, 0.0), score(0.0, 3.0), score(0.0, 0.0)], &zero),
            vec![true, true, true]
        );
    }

    #[test]
    fn config_validation() {
        assert!(AnalysisConfig::default().validate().is_ok());
        let bad = AnalysisConfig { reactive_ratio: 2.0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(ConfigError::RatiosOutOfOrder { .. })));
        let bad = AnalysisConfig { dominant_ratio: f64::NAN, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = AnalysisConfig { key_threshold: 200.1, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn analyze_single_chain() {
        let cs = ChainSet::new(vec![FailureChain::new(
            "A",
            "c",
            vec![Step::new(Component, "A"), Step::new(Action, "B"), Step::new(Harm, "H")],
        )]);
        let scores = analyze(&cs, &AnalysisConfig::default()).unwrap();
        let regions: Vec<_> = scores.iter().map(|s| s.region).collect();
        assert_eq!(regions, vec![Region::Dominant, Region::Dynamic, Region::Reactive]);
        assert_eq!(scores[1].active_norm, 100.0);
        assert_eq!(scores[1].passive_norm, 100.0);
        assert!(analyze(&ChainSet::default(), &AnalysisConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn analyze_from_sums_keeps_ids() {
        let table = SumsTable {
            rows: vec![
                FactorSums { id: 7, category: Component, name: "a".into(), active: 2, passive: 0 },
                FactorSums { id: 9, category: Harm, name: "h".into(), active: 0, passive: 2 },
            ],
        };
        let scores = analyze(&table, &AnalysisConfig::default()).unwrap();
        assert_eq!(scores[0].id, 7);
        assert_eq!(scores[1].region, Region::Reactive);
        assert!(scores[1].key);
    }

    proptest! {
        #[test]
        fn ranking_is_scale_invariant(values in prop::collection::vec(0u64..1000, 0..60), k in 1u64..50) {
            let scaled: Vec<u64> = values.iter().map(|v| v * k).collect();
            prop_assert_eq!(competition_rank(&values), competition_rank(&scaled));
        }

        #[test]
        fn ranks_match_definition(values in prop::collection::vec(0u64..20, 0..60)) {
            let ranks = competition_rank(&values);
            for (i, v) in values.iter().enumerate() {
                let greater = values.iter().filter(|w| *w > v).count() as u32;
                prop_assert_eq!(ranks[i], greater + 1);
                prop_assert!(ranks[i] >= 1 && ranks[i] as usize <= values.len());
            }
        }

        #[test]
        fn classification_depends_on_ratio(a in 0.01f64..100.0, p in 0.01f64..100.0, s in 0.01f64..1.0) {
            let cfg = AnalysisConfig::default();
            // keep away from the boundaries, where scaling may flip the float comparison
            let ratio = a / p;
            prop_assume!((ratio - 2.0).abs() > 1e-9 && (ratio - 0.5).abs() > 1e-9);
            prop_assert_eq!(classify(a, p, &cfg).unwrap(), classify(a * s, p * s, &cfg).unwrap());
        }

        #[test]
        fn maximal_factors_normalize_to_100(values in prop::collection::vec(0u64..50, 1..40)) {
            let norms = normalize_axis(&values);
            let max = *values.iter().max().unwrap();
            for (v, n) in values.iter().zip(&norms) {
                prop_assert!((0.0..=100.0).contains(n));
                if max > 0 {
                    prop_assert_eq!(*n == 100.0, *v == max);
                }
            }
        }
    }
}
