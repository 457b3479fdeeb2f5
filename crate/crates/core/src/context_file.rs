//! Selection contexts stored as TOML:
//!
//! ```toml
//! beta = 100.0
//!
//! [[stores]]
//! id = 0
//! cost = 1.0
//! rho = 0.9
//! ```
//!
//! `beta` may be omitted when the caller supplies it. Store ids must be
//! distinct; costs at least 1; ratios in `[0, 1)`.

use std::path::Path;

use serde::Deserialize;

use crate::error::{DssError, Result};
use crate::model::{DatastoreProfile, SelectionContext};
use crate::topology::line_of;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextFile {
    beta: Option<toml::Spanned<f64>>,
    #[serde(default)]
    stores: Vec<toml::Spanned<StoreSpec>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreSpec {
    id: usize,
    cost: f64,
    rho: f64,
}

/// Parses a context document. `beta_override`, when given, replaces the
/// file's `beta`; one of the two must be present.
pub fn parse_context(
    text: &str,
    origin: &str,
    beta_override: Option<f64>,
) -> Result<SelectionContext> {
    let parse_err = |line: usize, message: String| DssError::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let file: ContextFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(1);
        parse_err(line, e.message().to_string())
    })?;

    let mut profiles = Vec::with_capacity(file.stores.len());
    let mut seen = std::collections::HashSet::new();
    for spanned in &file.stores {
        let line = line_of(text, spanned.span().start);
        let s = spanned.get_ref();
        if !seen.insert(s.id) {
            return Err(parse_err(line, format!("duplicate store id {}", s.id)));
        }
        let profile = DatastoreProfile::new(s.id, s.cost, s.rho);
        // validate each store here so the error points at its table
        SelectionContext::new(vec![profile], f64::MAX)
            .map_err(|e| parse_err(line, e.to_string()))?;
        profiles.push(profile);
    }

    let (beta, beta_line) = match (beta_override, &file.beta) {
        (Some(b), _) => (b, 1),
        (None, Some(b)) => (*b.get_ref(), line_of(text, b.span().start)),
        (None, None) => return Err(parse_err(1, "missing 'beta' and no override given".into())),
    };
    SelectionContext::new(profiles, beta).map_err(|e| match e {
        DssError::InvalidMissPenalty(_) if beta_override.is_some() => e,
        other => parse_err(beta_line, other.to_string()),
    })
}

pub fn load_context(path: &Path, beta_override: Option<f64>) -> Result<SelectionContext> {
    let text = std::fs::read_to_string(path).map_err(|e| DssError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_context(&text, &path.display().to_string(), beta_override)
}
