//! Domain types shared by the parser, the matrix engine and the analytics.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// The seven parameter kinds a failure chain is built from.
///
/// The declaration order is the presentation order used for matrix rows
/// and columns. `Harm` is the only terminal category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactorCategory {
    Component,
    Function,
    ControlFactor,
    NoiseFactor,
    Action,
    Effect,
    Harm,
}

impl FactorCategory {
    pub const ALL: [FactorCategory; 7] = [
        FactorCategory::Component,
        FactorCategory::Function,
        FactorCategory::ControlFactor,
        FactorCategory::NoiseFactor,
        FactorCategory::Action,
        FactorCategory::Effect,
        FactorCategory::Harm,
    ];

    /// Keyword used in chain documents and CSV exports.
    pub fn keyword(self) -> &'static str {
        match self {
            FactorCategory::Component => "component",
            FactorCategory::Function => "function",
            FactorCategory::ControlFactor => "control",
            FactorCategory::NoiseFactor => "noise",
            FactorCategory::Action => "action",
            FactorCategory::Effect => "effect",
            FactorCategory::Harm => "harm",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.keyword() == word)
    }

    pub fn is_terminal(self) -> bool {
        self == FactorCategory::Harm
    }
}

impl fmt::Display for FactorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown factor category '{0}'")]
pub struct UnknownCategory(pub String);

impl FromStr for FactorCategory {
    type Err = UnknownCategory;

    /// Accepts the document keyword as well as the long names
    /// (`ControlFactor`, `control factor`, `noise_factor`, ...), case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
            .flat_map(char::to_lowercase)
            .collect();
        let category = match folded.as_str() {
            "component" => FactorCategory::Component,
            "function" => FactorCategory::Function,
            "control" | "controlfactor" => FactorCategory::ControlFactor,
            "noise" | "noisefactor" => FactorCategory::NoiseFactor,
            "action" => FactorCategory::Action,
            "effect" => FactorCategory::Effect,
            "harm" => FactorCategory::Harm,
            _ => return Err(UnknownCategory(s.to_string())),
        };
        Ok(category)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("factor name is empty")]
    EmptyName,
}

/// Canonical form of a factor name: trimmed, inner whitespace runs collapsed
/// to one space, case-folded.
pub fn normalize_name(raw: &str) -> Result<String, NameError> {
    let key = raw
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    if key.is_empty() {
        return Err(NameError::EmptyName);
    }
    Ok(key)
}

/// Identity of a factor. The same name under two categories is two factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorKey {
    pub category: FactorCategory,
    pub canonical_key: String,
}

impl FactorKey {
    pub fn new(category: FactorCategory, name: &str) -> Result<Self, NameError> {
        Ok(FactorKey {
            category,
            canonical_key: normalize_name(name)?,
        })
    }
}

/// An influencing factor as it appears in a matrix or a sums table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub id: u32,
    pub category: FactorCategory,
    /// First-seen spelling, unit annotations included.
    pub display_name: String,
    pub canonical_key: String,
}

impl Factor {
    pub fn key(&self) -> FactorKey {
        FactorKey {
            category: self.category,
            canonical_key: self.canonical_key.clone(),
        }
    }

    /// `<category>:<display_name>`, used as the matrix CSV header label.
    pub fn label(&self) -> String {
        format!("{}:{}", self.category, self.display_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub category: FactorCategory,
    pub name: String,
}

impl Step {
    pub fn new(category: FactorCategory, name: impl Into<String>) -> Self {
        Step {
            category,
            name: name.into(),
        }
    }

    pub fn key(&self) -> Result<FactorKey, NameError> {
        FactorKey::new(self.category, &self.name)
    }
}

/// One documented failure case: a time-ordered sequence of factor
/// occurrences that ends in a harm.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FailureChain {
    pub source_alert: String,
    pub case_label: String,
    pub steps: Vec<Step>,
}

impl FailureChain {
    pub fn new(
        source_alert: impl Into<String>,
        case_label: impl Into<String>,
        steps: Vec<Step>,
    ) -> Self {
        FailureChain {
            source_alert: source_alert.into(),
            case_label: case_label.into(),
            steps,
        }
    }

    /// Number of transitions this chain contributes to a matrix.
    pub fn transitions(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }
}

/// Ordered collection of chains. Duplicates are kept; each one counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainSet {
    pub chains: Vec<FailureChain>,
}

impl ChainSet {
    pub fn new(chains: Vec<FailureChain>) -> Self {
        ChainSet { chains }
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FailureChain> {
        self.chains.iter()
    }

    pub fn total_transitions(&self) -> usize {
        self.chains.iter().map(FailureChain::transitions).sum()
    }

    pub fn concat(mut self, other: ChainSet) -> ChainSet {
        self.chains.extend(other.chains);
        self
    }
}

impl FromIterator<FailureChain> for ChainSet {
    fn from_iter<I: IntoIterator<Item = FailureChain>>(iter: I) -> Self {
        ChainSet::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a ChainSet {
    type Item = &'a FailureChain;
    type IntoIter = std::slice::Iter<'a, FailureChain>;

    fn into_iter(self) -> Self::IntoIter {
        self.chains.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Fewer than two steps.
    TooShort,
    /// A harm step that is not the last step.
    HarmNotTerminal,
    /// The chain contains no harm at all.
    MissingHarm,
    /// Two consecutive steps resolve to the same factor.
    SelfTransition,
    EmptyName,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::TooShort => "TooShort",
            Rule::HarmNotTerminal => "HarmNotTerminal",
            Rule::MissingHarm => "MissingHarm",
            Rule::SelfTransition => "SelfTransition",
            Rule::EmptyName => "EmptyName",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    /// 1-based step index; `None` for chain-level violations.
    pub step: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(step) => write!(f, "{} at step {}: {}", self.rule, step, self.message),
            None => write!(f, "{}: {}", self.rule, self.message),
        }
    }
}

/// Checks the chain invariants. Chain-level violations come first, then
/// step violations in step order. An empty result means the chain is valid.
pub fn validate_chain(chain: &FailureChain) -> Vec<Violation> {
    let mut out = Vec::new();
    let steps = &chain.steps;

    if steps.len() < 2 {
        out.push(Violation {
            rule: Rule::TooShort,
            step: None,
            message: format!(
                "chain has {} step(s); at least 2 are required",
                steps.len()
            ),
        });
    }

    let has_harm = steps.iter().any(|s| s.category.is_terminal());
    if !has_harm && !steps.is_empty() {
        out.push(Violation {
            rule: Rule::MissingHarm,
            step: None,
            message: "chain does not end in a harm".to_string(),
        });
    }

    let keys: Vec<Option<FactorKey>> = steps.iter().map(|s| s.key().ok()).collect();
    let last = steps.len().saturating_sub(1);
    for (i, step) in steps.iter().enumerate() {
        let index = i + 1;
        if keys[i].is_none() {
            out.push(Violation {
                rule: Rule::EmptyName,
                step: Some(index),
                message: format!("{} step has an empty name", step.category),
            });
        }
        if step.category.is_terminal() && i != last {
            out.push(Violation {
                rule: Rule::HarmNotTerminal,
                step: Some(index),
                message: format!("harm \"{}\" is followed by further steps", step.name),
            });
        }
        if i > 0 {
            if let (Some(prev), Some(cur)) = (&keys[i - 1], &keys[i]) {
                if prev == cur {
                    out.push(Violation {
                        rule: Rule::SelfTransition,
                        step: Some(index),
                        message: format!(
                            "{} \"{}\" repeats the previous step",
                            step.category, step.name
                        ),
                    });
                }
            }
        }
    }
    out
}

pub fn is_valid(chain: &FailureChain) -> bool {
    validate_chain(chain).is_empty()
}
