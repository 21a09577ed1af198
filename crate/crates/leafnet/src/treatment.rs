//! Disease-to-treatment lookup backed by a user-editable JSON file.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentType {
    Pesticide,
    Fungicide,
    Bactericide,
    Other,
}

/// One disease-class entry of the treatments file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreatmentRule {
    pub class_name: String,
    pub agent_type: AgentType,
    pub treatment: String,
    #[serde(default)]
    pub notes: Option<String>,
}

/// Parses a JSON array of rules. Duplicate class names are a config error.
pub fn parse_treatments(json: &str) -> Result<Vec<TreatmentRule>> {
    let rules: Vec<TreatmentRule> =
        serde_json::from_str(json).map_err(|e| Error::Config(format!("treatments file: {e}")))?;
    let mut seen = HashSet::new();
    for rule in &rules {
        if !seen.insert(rule.class_name.as_str()) {
            return Err(Error::Config(format!(
                "duplicate class_name {:?} in treatments file",
                rule.class_name
            )));
        }
    }
    Ok(rules)
}

pub fn load_treatments(path: &Path) -> Result<Vec<TreatmentRule>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_treatments(&text)
}

/// Exact, case-sensitive lookup; `None` when the class has no rule.
pub fn recommend<'a>(class_name: &str, rules: &'a [TreatmentRule]) -> Option<&'a TreatmentRule> {
    rules.iter().find(|r| r.class_name == class_name)
}
