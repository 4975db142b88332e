//! JSON configuration: defaults, an optional document and `--set` overrides.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

/// Every problem found while building a configuration.
#[derive(Debug)]
pub struct ConfigError(pub Vec<String>);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for v in &self.0 {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Overlays `patch` on `base`, recording keys that `base` does not have.
fn merge(base: &mut Value, patch: Value, path: &str, errors: &mut Vec<String>) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, &sub, errors),
                    None => errors.push(format!("unknown key `{sub}`")),
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// `key=value`; the value is read as JSON and falls back to a plain string.
fn apply_set(doc: &mut Value, assignment: &str, errors: &mut Vec<String>) {
    let Some((key, raw)) = assignment.split_once('=') else {
        errors.push(format!("`--set {assignment}` is not of the form key=value"));
        return;
    };
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut slot = &mut *doc;
    for part in key.split('.') {
        match slot {
            Value::Object(m) if m.contains_key(part) => slot = m.get_mut(part).unwrap(),
            _ => {
                errors.push(format!("unknown key `{key}` in --set"));
                return;
            }
        }
    }
    // objects are merged so that a partial object only touches named fields
    let mut local = Vec::new();
    merge(slot, value, key, &mut local);
    errors.extend(local);
}

/// Builds a `T` from its defaults, the JSON file at `path` and the `--set`
/// assignments, in that order, then runs `check` on the result.
pub fn resolve<T>(path: Option<&Path>, sets: &[String], check: impl Fn(&T) -> Vec<String>) -> Result<T, ConfigError>
where
    T: Serialize + DeserializeOwned + Default,
{
    let mut errors = Vec::new();
    let mut doc = serde_json::to_value(T::default()).expect("defaults serialise");
    if let Some(p) = path {
        match std::fs::read_to_string(p) {
            Ok(text) => match serde_json::from_str::<Value>(&text) {
                Ok(v @ Value::Object(_)) => merge(&mut doc, v, "", &mut errors),
                Ok(_) => errors.push(format!("{}: the configuration must be a JSON object", p.display())),
                Err(e) => errors.push(format!("{}: {e}", p.display())),
            },
            Err(e) => errors.push(format!("{}: {e}", p.display())),
        }
    }
    for s in sets {
        apply_set(&mut doc, s, &mut errors);
    }
    // unknown keys were not applied, so the remaining document still checks
    match serde_json::from_value::<T>(doc) {
        Ok(cfg) => {
            errors.extend(check(&cfg));
            if errors.is_empty() {
                Ok(cfg)
            } else {
                Err(ConfigError(errors))
            }
        }
        Err(e) => {
            errors.push(e.to_string());
            Err(ConfigError(errors))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
    #[serde(default)]
    struct Inner {
        n: usize,
        x: f64,
    }

    #[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
    #[serde(default)]
    struct Outer {
        name: String,
        inner: Inner,
        list: Vec<f64>,
    }

    #[test]
    fn sets_reach_nested_fields() {
        let sets = vec!["inner.n=5".to_string(), "name=abc".to_string(), "list=[1,2]".to_string()];
        let c: Outer = resolve(None, &sets, |_| vec![]).unwrap();
        assert_eq!(c.inner.n, 5);
        assert_eq!(c.name, "abc");
        assert_eq!(c.list, vec![1.0, 2.0]);
    }

    #[test]
    fn unknown_keys_are_all_reported() {
        let sets = vec!["inner.m=5".to_string(), "nope=1".to_string(), "broken".to_string()];
        let e = resolve::<Outer>(None, &sets, |_| vec![]).unwrap_err();
        assert_eq!(e.0.len(), 3, "{e}");
    }

    #[test]
    fn partial_objects_merge() {
        let sets = vec![r#"inner={"x":2.5}"#.to_string()];
        let c: Outer = resolve(None, &sets, |_| vec![]).unwrap();
        assert_eq!(c.inner, Inner { n: 0, x: 2.5 });
    }

    #[test]
    fn type_errors_surface() {
        let sets = vec!["inner.n=-3".to_string()];
        assert!(resolve::<Outer>(None, &sets, |_| vec![]).is_err());
    }
}
