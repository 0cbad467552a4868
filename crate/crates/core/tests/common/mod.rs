#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use keyfactors::model::{ChainSet, FactorCategory, FactorKey, FailureChain, Step};
use keyfactors::RelationshipMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

const NON_HARM: [FactorCategory; 6] = [
    FactorCategory::Component,
    FactorCategory::Function,
    FactorCategory::ControlFactor,
    FactorCategory::NoiseFactor,
    FactorCategory::Action,
    FactorCategory::Effect,
];

const STEMS: [&str; 12] = [
    "heating element",
    "power I [A]",
    "Joule-Lenz-Heating",
    "protective grille",
    "user \"pulls\" cable",
    "back\\slash",
    "Wärme Q [J]",
    "tab\there",
    "distance d [mm]",
    "arc, flash",
    "# not a comment",
    "---",
];

/// A pool of distinct factors: at least two non-harm factors and one harm.
pub struct Pool {
    pub non_harm: Vec<(FactorCategory, String)>,
    pub harms: Vec<String>,
}

impl Pool {
    pub fn random(rng: &mut impl Rng, size: usize) -> Pool {
        let size = size.clamp(3, 60);
        let harm_count = rng.gen_range(1..=(size / 3).max(1));
        let mut non_harm = Vec::new();
        for i in 0..size - harm_count {
            let category = *NON_HARM.choose(rng).unwrap();
            let stem = STEMS[i % STEMS.len()];
            non_harm.push((category, format!("{stem} {i}")));
        }
        let harms = (0..harm_count).map(|i| format!("harm {i}")).collect();
        Pool { non_harm, harms }
    }

    pub fn len(&self) -> usize {
        self.non_harm.len() + self.harms.len()
    }
}

/// Re-spells a name without changing its canonical key.
fn respell(rng: &mut impl Rng, name: &str) -> String {
    match rng.gen_range(0..4) {
        0 => name.to_uppercase(),
        1 => format!("  {}", name.replace(' ', "   ")),
        _ => name.to_string(),
    }
}

fn key(category: FactorCategory, name: &str) -> FactorKey {
    FactorKey::new(category, name).unwrap()
}

pub fn random_chain(rng: &mut impl Rng, pool: &Pool, source: &str, max_len: usize) -> FailureChain {
    let len = rng.gen_range(2..=max_len.max(2));
    let mut steps: Vec<Step> = Vec::with_capacity(len);
    while steps.len() < len - 1 {
        let (category, name) = pool.non_harm.choose(rng).unwrap();
        if let Some(prev) = steps.last() {
            if key(prev.category, &prev.name) == key(*category, name) {
                continue;
            }
        }
        steps.push(Step::new(*category, respell(rng, name)));
    }
    let harm = pool.harms.choose(rng).unwrap();
    steps.push(Step::new(FactorCategory::Harm, respell(rng, harm)));
    let case = steps.last().unwrap().name.trim().to_string();
    FailureChain::new(source, case, steps)
}

/// Up to `max_chains` valid chains of length 2..=`max_len` over a pool of
/// at most `max_pool` factors.
pub fn random_chain_set(rng: &mut impl Rng, max_chains: usize, max_len: usize, max_pool: usize) -> ChainSet {
    let pool_size = rng.gen_range(3..=max_pool);
    let pool = Pool::random(rng, pool_size);
    let chains = rng.gen_range(0..=max_chains);
    random_chain_set_from(rng, &pool, chains, max_len)
}

pub fn random_chain_set_from(rng: &mut impl Rng, pool: &Pool, chains: usize, max_len: usize) -> ChainSet {
    (0..chains)
        .map(|i| random_chain(rng, pool, &format!("A{:02}/{:05}/24", i % 13, i), max_len))
        .collect()
}

/// Direct pair enumeration: (from, to) -> count.
pub fn brute_force_cells(chains: &ChainSet) -> HashMap<(FactorKey, FactorKey), u64> {
    let mut cells = HashMap::new();
    for chain in chains {
        for pair in chain.steps.windows(2) {
            let from = key(pair[0].category, &pair[0].name);
            let to = key(pair[1].category, &pair[1].name);
            *cells.entry((from, to)).or_insert(0) += 1;
        }
    }
    cells
}

/// Matrix cells keyed by factor identity, zeros omitted.
pub fn matrix_cells(m: &RelationshipMatrix) -> HashMap<(FactorKey, FactorKey), u64> {
    let f = m.factors();
    m.edges().map(|(r, c, v)| ((f[r].key(), f[c].key()), v)).collect()
}

/// Test-only reader for the matrix CSV: labels, counts, active sums,
/// active ranks, passive sums, passive ranks.
pub struct MatrixCsv {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub active: Vec<u64>,
    pub active_rank: Vec<u32>,
    pub passive: Vec<u64>,
    pub passive_rank: Vec<u32>,
}

pub fn read_matrix_csv(text: &str) -> MatrixCsv {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let header = &records[0];
    let n = header.len() - 3;
    let labels: Vec<String> = header.iter().skip(1).take(n).map(str::to_string).collect();
    let num = |s: &str| if s.is_empty() { 0 } else { s.parse::<u64>().unwrap() };
    let mut out = MatrixCsv {
        labels,
        counts: Vec::new(),
        active: Vec::new(),
        active_rank: Vec::new(),
        passive: Vec::new(),
        passive_rank: Vec::new(),
    };
    if n == 0 {
        assert_eq!(records.len(), 1);
        return out;
    }
    for rec in &records[1..=n] {
        out.counts.push(rec.iter().skip(1).take(n).map(num).collect());
        out.active.push(num(&rec[n + 1]));
        out.active_rank.push(num(&rec[n + 2]) as u32);
    }
    out.passive = records[n + 1].iter().skip(1).take(n).map(num).collect();
    out.passive_rank = records[n + 2].iter().skip(1).take(n).map(|s| num(s) as u32).collect();
    assert_eq!(&records[n + 1][0], "passive_sum");
    assert_eq!(&records[n + 2][0], "passive_rank");
    out
}

/// Randomly damages a document: deletions, insertions of syntax-relevant
/// characters, line duplication and truncation.
pub fn mutate(rng: &mut impl Rng, doc: &str) -> String {
    const NOISE: [char; 12] = ['"', '\\', '#', '-', ':', '\n', 'x', 'é', ' ', '\r', '\t', '\u{2028}'];
    let mut chars: Vec<char> = doc.chars().collect();
    for _ in 0..rng.gen_range(1..=8) {
        match rng.gen_range(0..5) {
            0 if !chars.is_empty() => {
                let i = rng.gen_range(0..chars.len());
                chars.remove(i);
            }
            1 => {
                let i = rng.gen_range(0..=chars.len());
                chars.insert(i, *NOISE.choose(rng).unwrap());
            }
            2 if !chars.is_empty() => {
                let i = rng.gen_range(0..chars.len());
                chars.truncate(i);
            }
            3 => {
                let text: String = chars.iter().collect();
                let mut lines: Vec<&str> = text.split('\n').collect();
                let i = rng.gen_range(0..lines.len());
                let line = lines[i];
                lines.insert(i, line);
                chars = lines.join("\n").chars().collect();
            }
            _ => {
                let text: String = chars.iter().collect();
                let mut lines: Vec<&str> = text.split('\n').collect();
                lines.shuffle(rng);
                chars = lines.join("\n").chars().collect();
            }
        }
    }
    chars.into_iter().collect()
}
