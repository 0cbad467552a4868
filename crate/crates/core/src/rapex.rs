//! Turns safety-alert records into `.chains` skeletons: one document per
//! (alert, risk type), holding the headers, the alert description as
//! comments and the terminal harm step. The analyst writes the steps that
//! lead up to the harm.

use std::collections::{HashMap, HashSet};

use serde_json::Value;
use thiserror::Error;

use crate::dsl::quote;
use crate::model::normalize_name;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlertRecord {
    pub alert_number: String,
    pub product: String,
    pub risk_types: Vec<String>,
    pub description: String,
}

impl AlertRecord {
    pub fn new(
        alert_number: impl Into<String>,
        product: impl Into<String>,
        risk_types: Vec<String>,
        description: impl Into<String>,
    ) -> Self {
        AlertRecord {
            alert_number: alert_number.into(),
            product: product.into(),
            risk_types,
            description: description.into(),
        }
    }
}

/// Which JSON keys hold which record fields. Export schemas differ between
/// Safety Gate downloads, so every key is configurable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMap {
    pub alert_number: String,
    pub product: String,
    pub risk: String,
    pub description: String,
}

impl Default for FieldMap {
    fn default() -> Self {
        FieldMap {
            alert_number: "alertNumber".to_string(),
            product: "product".to_string(),
            risk: "risk".to_string(),
            description: "description".to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("alert file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("alert file must hold a JSON array of records")]
    NotAnArray,
    #[error("record at index {index}: {reason}")]
    MalformedRecord { index: usize, reason: String },
}

impl ImportError {
    /// Content problems (a bad record) as opposed to an unreadable file.
    pub fn is_content_error(&self) -> bool {
        matches!(self, ImportError::MalformedRecord { .. })
    }
}

/// Reads a JSON array of flat records. `index` in errors is 0-based.
///
/// The risk field may be an array of strings or a single string listing
/// several risks separated by `,` or `;`.
pub fn parse_alert_records(json: &str, fields: &FieldMap) -> Result<Vec<AlertRecord>, ImportError> {
    let value: Value = serde_json::from_str(json)?;
    let Value::Array(items) = value else {
        return Err(ImportError::NotAnArray);
    };
    items
        .iter()
        .enumerate()
        .map(|(index, item)| record_from_value(item, fields).map_err(|reason| ImportError::MalformedRecord { index, reason }))
        .collect()
}

fn record_from_value(item: &Value, fields: &FieldMap) -> Result<AlertRecord, String> {
    let Value::Object(obj) = item else {
        return Err("record is not an object".to_string());
    };
    let text = |key: &str, required: bool| -> Result<String, String> {
        match obj.get(key) {
            Some(Value::String(s)) => Ok(s.trim().to_string()),
            Some(Value::Number(n)) => Ok(n.to_string()),
            None | Some(Value::Null) if !required => Ok(String::new()),
            None | Some(Value::Null) => Err(format!("missing field '{key}'")),
            Some(_) => Err(format!("field '{key}' must be a string")),
        }
    };

    let alert_number = text(&fields.alert_number, true)?;
    if alert_number.is_empty() {
        return Err(format!("field '{}' is empty", fields.alert_number));
    }
    let risk_types = match obj.get(&fields.risk) {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::String(s)) => s
            .split([',', ';'])
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .map(str::to_string)
            .collect(),
        Some(Value::Array(list)) => list
            .iter()
            .map(|v| match v {
                Value::String(s) => Ok(s.trim().to_string()),
                _ => Err(format!("field '{}' must only hold strings", fields.risk)),
            })
            .filter(|r| !matches!(r, Ok(s) if s.is_empty()))
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(format!("field '{}' must be a string or an array of strings", fields.risk)),
    };

    Ok(AlertRecord {
        alert_number,
        product: text(&fields.product, false)?,
        risk_types,
        description: text(&fields.description, false)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub file_name: String,
    pub document: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImportOutput {
    pub documents: Vec<Skeleton>,
    pub warnings: Vec<String>,
}

pub const UNSPECIFIED_CASE: &str = "unspecified";

/// Builds one skeleton per (alert, risk type). Repeated pairs, compared on
/// the normalized risk name, are dropped with a warning.
pub fn import_rapex(records: &[AlertRecord]) -> ImportOutput {
    let mut out = ImportOutput::default();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut used_names: HashMap<String, usize> = HashMap::new();

    for record in records {
        let risks: Vec<Option<&str>> = if record.risk_types.is_empty() {
            vec![None]
        } else {
            record.risk_types.iter().map(|r| Some(r.as_str())).collect()
        };
        for risk in risks {
            let risk_key = risk
                .and_then(|r| normalize_name(r).ok())
                .unwrap_or_else(|| UNSPECIFIED_CASE.to_string());
            if !seen.insert((record.alert_number.clone(), risk_key.clone())) {
                out.warnings.push(format!(
                    "alert {}: duplicate risk '{}' skipped",
                    record.alert_number,
                    risk.unwrap_or(UNSPECIFIED_CASE)
                ));
                continue;
            }
            let stem = format!("{}_{}", slug(&record.alert_number), slug(&risk_key));
            let count = used_names.entry(stem.clone()).or_insert(0);
            *count += 1;
            let file_name = if *count == 1 {
                format!("{stem}.chains")
            } else {
                format!("{stem}_{count}.chains")
            };
            out.documents.push(Skeleton {
                file_name,
                document: skeleton_document(record, risk),
            });
        }
    }
    out
}

fn skeleton_document(record: &AlertRecord, risk: Option<&str>) -> String {
    let mut doc = String::new();
    let product = if record.product.is_empty() { "unknown product" } else { &record.product };
    doc.push_str(&format!("# skeleton for alert {} ({})\n", one_line(&record.alert_number), one_line(product)));
    if !record.description.is_empty() {
        doc.push_str("#\n");
        for line in record.description.lines() {
            let line = line.trim_end();
            if line.is_empty() {
                doc.push_str("#\n");
            } else {
                doc.push_str(&format!("# {line}\n"));
            }
        }
        doc.push_str("#\n");
    }
    doc.push_str(&format!("alert: {}\n", one_line(&record.alert_number)));
    match risk {
        Some(risk) => {
            doc.push_str(&format!("case: {}\n", one_line(risk)));
            doc.push_str("# add the steps leading to the harm above this line\n");
            doc.push_str(&format!("harm {}\n", quote(risk)));
        }
        None => {
            doc.push_str(&format!("case: {UNSPECIFIED_CASE}\n"));
            doc.push_str("# warning: the alert names no risk type; add the steps and a terminal harm\n");
        }
    }
    doc
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// File-system safe stem: ASCII alphanumerics kept, runs of anything else
/// become a single `-`.
fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    let trimmed = out.trim_matches('-');
    if trimmed.is_empty() {
        "x".to_string()
    } else {
        trimmed.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_document;
    use crate::model::FactorCategory;

    fn hair_dryer() -> AlertRecord {
        AlertRecord::new(
            "A12/02261/23",
            "hair dryer",
            vec!["burn".into(), "electric shock".into(), "fire".into()],
            "The protective grille can be removed.\nLive parts become accessible.",
        )
    }

    #[test]
    fn one_skeleton_per_risk() {
        let out = import_rapex(&[hair_dryer()]);
        assert!(out.warnings.is_empty());
        let names: Vec<_> = out.documents.iter().map(|d| d.file_name.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "a12-02261-23_burn.chains",
                "a12-02261-23_electric-shock.chains",
                "a12-02261-23_fire.chains"
            ]
        );
        let doc = &out.documents[1].document;
        assert!(doc.contains("alert: A12/02261/23\n"));
        assert!(doc.contains("case: electric shock\n"));
        assert!(doc.contains("# Live parts become accessible.\n"));
        assert!(doc.ends_with("harm \"electric shock\"\n"));
    }

    #[test]
    fn skeleton_parses_once_a_cause_is_added() {
        let out = import_rapex(&[hair_dryer()]);
        let doc = &out.documents[0].document;

        // Only the harm step so far: the chain is too short.
        let parsed = parse_document(doc);
        assert!(parsed.has_errors());

        let completed = doc.replace("harm \"burn\"", "action \"operation without breaks\"\nharm \"burn\"");
        let parsed = parse_document(&completed);
        assert!(parsed.diagnostics.is_empty(), "{:?}", parsed.diagnostics);
        let steps = &parsed.chains.chains[0].steps;
        assert_eq!(steps.last().unwrap().category, FactorCategory::Harm);
        assert_eq!(parsed.chains.chains[0].case_label, "burn");
    }

    #[test]
    fn no_risk_types() {
        let record = AlertRecord::new("A1", "kettle", vec![], "");
        let out = import_rapex(&[record]);
        assert_eq!(out.documents.len(), 1);
        let doc = &out.documents[0].document;
        assert!(doc.contains("case: unspecified\n"));
        assert!(doc.contains("# warning:"));
        assert!(!doc.contains("harm \""));
    }

    #[test]
    fn duplicates_are_dropped_with_warning() {
        let a = AlertRecord::new("A1", "kettle", vec!["burn".into()], "");
        let b = AlertRecord::new("A1", "kettle", vec!["Burn ".into()], "other text");
        let out = import_rapex(&[a, b]);
        assert_eq!(out.documents.len(), 1);
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn colliding_file_names_get_suffixes() {
        let a = AlertRecord::new("A/1", "x", vec!["burn".into()], "");
        let b = AlertRecord::new("A-1", "x", vec!["burn".into()], "");
        let out = import_rapex(&[a, b]);
        assert_eq!(out.documents[0].file_name, "a-1_burn.chains");
        assert_eq!(out.documents[1].file_name, "a-1_burn_2.chains");
    }

    #[test]
    fn parse_records_with_field_map() {
        let json = r#"[
            {"alertNumber": "A12/02261/23", "product": "hair dryer", "risk": "Burns, Electric shock; Fire", "description": "d"},
            {"alertNumber": "A2", "risk": ["burn", ""]},
            {"alertNumber": "A3"}
        ]"#;
        let recs = parse_alert_records(json, &FieldMap::default()).unwrap();
        assert_eq!(recs[0].risk_types, vec!["Burns", "Electric shock", "Fire"]);
        assert_eq!(recs[1].risk_types, vec!["burn"]);
        assert_eq!(recs[1].product, "");
        assert!(recs[2].risk_types.is_empty());

        let custom = FieldMap {
            alert_number: "reference".into(),
            risk: "riskType".into(),
            ..FieldMap::default()
        };
        let recs = parse_alert_records(r#"[{"reference": "R1", "riskType": ["fire"]}]"#, &custom).unwrap();
        assert_eq!(recs[0].alert_number, "R1");
    }

    #[test]
    fn malformed_records() {
        let err = parse_alert_records(r#"[{"alertNumber": "A1"}, {"product": "x"}]"#, &FieldMap::default()).unwrap_err();
        assert!(matches!(err, ImportError::MalformedRecord { index: 1, .. }));
        assert!(err.is_content_error());

        let err = parse_alert_records(r#"[42]"#, &FieldMap::default()).unwrap_err();
        assert!(matches!(err, ImportError::MalformedRecord { index: 0, .. }));

        assert!(matches!(parse_alert_records("{}", &FieldMap::default()), Err(ImportError::NotAnArray)));
        assert!(matches!(parse_alert_records("[", &FieldMap::default()), Err(ImportError::Json(_))));
        assert!(parse_alert_records("[]", &FieldMap::default()).unwrap().is_empty());
    }
}
