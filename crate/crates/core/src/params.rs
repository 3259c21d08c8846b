//! Parsing of `name:key=value,key=value` descriptors used on the command line
//! and in manifests, e.g. `pareto:alpha=3` or `frechet:alpha=3`.

use crate::error::{Error, Result};

pub(crate) struct Descriptor<'a> {
    pub name: String,
    pairs: Vec<(&'a str, &'a str)>,
    input: &'a str,
    what: &'static str,
}

impl<'a> Descriptor<'a> {
    pub fn parse(input: &'a str, what: &'static str) -> Result<Self> {
        let trimmed = input.trim();
        let (name, rest) = match trimmed.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (trimmed, None),
        };
        if name.is_empty() {
            return Err(Error::Parse {
                what,
                input: input.to_string(),
                reason: "missing name".into(),
            });
        }
        let mut pairs = Vec::new();
        if let Some(rest) = rest {
            for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
                let (k, v) = item.split_once('=').ok_or_else(|| Error::Parse {
                    what,
                    input: input.to_string(),
                    reason: format!("expected key=value, got {item:?}"),
                })?;
                pairs.push((k.trim(), v.trim()));
            }
        }
        Ok(Descriptor {
            name: name.to_ascii_lowercase(),
            pairs,
            input,
            what,
        })
    }

    /// Numeric parameter `key`, or `default` when absent.
    pub fn real(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.pairs.iter().find(|(k, _)| k.eq_ignore_ascii_case(key)) {
            Some((_, v)) => v.parse::<f64>().map_err(|e| Error::Parse {
                what: self.what,
                input: self.input.to_string(),
                reason: format!("{key}: {e}"),
            }),
            None => default.ok_or_else(|| Error::Parse {
                what: self.what,
                input: self.input.to_string(),
                reason: format!("missing parameter {key}"),
            }),
        }
    }

    /// Rejects keys outside `allowed`.
    pub fn only(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.pairs {
            if !allowed.iter().any(|a| a.eq_ignore_ascii_case(k)) {
                return Err(Error::Parse {
                    what: self.what,
                    input: self.input.to_string(),
                    reason: format!("unknown parameter {k:?}"),
                });
            }
        }
        Ok(())
    }

    pub fn unknown_name(&self) -> Error {
        Error::Parse {
            what: self.what,
            input: self.input.to_string(),
            reason: format!("unknown name {:?}", self.name),
        }
    }
}
