use std::collections::HashSet;

use serde::Deserialize;
use thiserror::Error;

use crate::analytics::{competition_rank, format_fixed, FactorScore};
use crate::matrix::{FactorSums, RelationshipMatrix, SumsTable};
use crate::model::FactorCategory;

/// Active and passive competition ranks, in factor order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ranks {
    pub active: Vec<u32>,
    pub passive: Vec<u32>,
}

impl Ranks {
    pub fn from_sums(table: &SumsTable) -> Self {
        Ranks {
            active: competition_rank(&table.active()),
            passive: competition_rank(&table.passive()),
        }
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .flexible(true)
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("csv writer only emits the UTF-8 it was given")
}

fn cell(count: u64) -> String {
    if count == 0 {
        String::new()
    } else {
        count.to_string()
    }
}

/// Matrix in the familiar cross-impact layout: factor labels on both axes,
/// zero cells left blank, active sum and rank as trailing columns, passive
/// sum and rank as trailing rows.
pub fn export_matrix_csv(m: &RelationshipMatrix, sums: &SumsTable, ranks: &Ranks) -> String {
    let mut w = writer();
    let labels: Vec<String> = m.factors().iter().map(|f| f.label()).collect();

    let mut header = vec![String::new()];
    header.extend(labels.iter().cloned());
    header.push("active_sum".into());
    header.push("active_rank".into());
    w.write_record(&header).expect("in-memory write");

    if m.is_empty() {
        return finish(w);
    }

    for (i, label) in labels.iter().enumerate() {
        let mut record = vec![label.clone()];
        record.extend(m.row(i).iter().map(|&c| cell(c)));
        record.push(sums.rows[i].active.to_string());
        record.push(ranks.active[i].to_string());
        w.write_record(&record).expect("in-memory write");
    }

    let mut passive = vec!["passive_sum".to_string()];
    passive.extend(sums.rows.iter().map(|r| r.passive.to_string()));
    passive.extend([String::new(), String::new()]);
    w.write_record(&passive).expect("in-memory write");

    let mut rank_row = vec!["passive_rank".to_string()];
    rank_row.extend(ranks.passive.iter().map(u32::to_string));
    rank_row.extend([String::new(), String::new()]);
    w.write_record(&rank_row).expect("in-memory write");

    finish(w)
}

pub const REPORT_HEADER: [&str; 11] = [
    "id",
    "category",
    "name",
    "active_sum",
    "active_norm",
    "active_rank",
    "passive_sum",
    "passive_norm",
    "passive_rank",
    "region",
    "key",
];

/// One row per factor in the given order, norms rounded for display.
pub fn export_report_csv(scores: &[FactorScore], display_decimals: u32) -> String {
    let mut w = writer();
    w.write_record(REPORT_HEADER).expect("in-memory write");
    for s in scores {
        w.write_record([
            s.id.to_string(),
            s.category.keyword().to_string(),
            s.name.clone(),
            s.active_sum.to_string(),
            format_fixed(s.active_norm, display_decimals),
            s.active_rank.to_string(),
            s.passive_sum.to_string(),
            format_fixed(s.passive_norm, display_decimals),
            s.passive_rank.to_string(),
            s.region.to_string(),
            s.key.to_string(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

#[derive(Debug, Error)]
pub enum SumsCsvError {
    #[error("malformed sums CSV: {0}")]
    Format(#[from] csv::Error),
    #[error("sums CSV line {line}: {message}")]
    Content { line: u64, message: String },
}

impl SumsCsvError {
    pub fn is_content_error(&self) -> bool {
        matches!(self, SumsCsvError::Content { .. })
    }
}

#[derive(Debug, Deserialize)]
struct SumsRecord {
    id: u32,
    category: String,
    name: String,
    active_sum: u64,
    passive_sum: u64,
}

/// Reads a published sums table with the columns
/// `id, category, name, active_sum, passive_sum`. Extra columns are ignored.
pub fn parse_sums_csv(text: &str) -> Result<SumsTable, SumsCsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut ids = HashSet::new();
    for result in reader.deserialize::<SumsRecord>() {
        let record = result?;
        let line = rows.len() as u64 + 2;
        let content = |message: String| SumsCsvError::Content { line, message };
        if record.id == 0 {
            return Err(content("factor ids start at 1".into()));
        }
        if !ids.insert(record.id) {
            return Err(content(format!("duplicate factor id {}", record.id)));
        }
        let category: FactorCategory = record
            .category
            .parse()
            .map_err(|e: crate::model::UnknownCategory| content(e.to_string()))?;
        if record.name.is_empty() {
            return Err(content("empty factor name".into()));
        }
        rows.push(FactorSums {
            id: record.id,
            category,
            name: record.name,
            active: record.active_sum,
            passive: record.passive_sum,
        });
    }
    Ok(SumsTable { rows })
}
