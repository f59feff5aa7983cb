//! JSON documents with a `{"format": "<TypeName>/1"}` header.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use super::config::{SystemConfiguration, DIGEST_ALGORITHM};
use super::log::LogModel;
use super::package::{PackageModel, Universe};
use crate::error::{Error, Result};

pub trait Document: Serialize + DeserializeOwned {
    const FORMAT: &'static str;
}

impl Document for SystemConfiguration {
    const FORMAT: &'static str = "SystemConfiguration/1";
}

impl Document for PackageModel {
    const FORMAT: &'static str = "PackageModel/1";
}

impl Document for LogModel {
    const FORMAT: &'static str = "LogModel/1";
}

impl Document for Universe {
    const FORMAT: &'static str = "Universe/1";
}

fn header(format: &str) -> Map<String, Value> {
    let mut map = Map::new();
    map.insert("format".into(), Value::String(format.into()));
    map.insert("digest".into(), Value::String(DIGEST_ALGORITHM.into()));
    map
}

/// Serializes `value` with the format header. Map-shaped bodies are
/// inlined next to the header; anything else goes under `"body"`.
pub fn to_document<T: Document>(value: &T) -> Result<Value> {
    let mut map = header(T::FORMAT);
    match serde_json::to_value(value)? {
        Value::Object(fields) if !fields.contains_key("format") => map.extend(fields),
        other => {
            map.insert("body".into(), other);
        }
    }
    Ok(Value::Object(map))
}

pub fn to_document_string<T: Document>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_document(value)?)?)
}

pub fn from_document<T: Document>(value: Value) -> Result<T> {
    let Value::Object(mut map) = value else {
        return Err(Error::Format {
            expected: T::FORMAT.into(),
            found: "non-object".into(),
        });
    };
    let found = map
        .remove("format")
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    if found != T::FORMAT {
        return Err(Error::Format {
            expected: T::FORMAT.into(),
            found,
        });
    }
    if let Some(digest) = map.remove("digest") {
        if digest.as_str() != Some(DIGEST_ALGORITHM) {
            return Err(Error::Format {
                expected: DIGEST_ALGORITHM.into(),
                found: digest.to_string(),
            });
        }
    }
    let body = match map.remove("body") {
        Some(body) if map.is_empty() => body,
        Some(body) => {
            map.insert("body".into(), body);
            Value::Object(map)
        }
        None => Value::Object(map),
    };
    Ok(serde_json::from_value(body)?)
}

pub fn from_document_str<T: Document>(text: &str) -> Result<T> {
    from_document(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PackageId, ServiceState};

    #[test]
    fn configuration_document_round_trip() {
        let mut config = SystemConfiguration::new();
        config
            .environment
            .services
            .insert("apache2".into(), ServiceState::Running);
        let doc = to_document(&config).unwrap();
        assert_eq!(doc["format"], "SystemConfiguration/1");
        assert_eq!(doc["digest"], "sha256");
        let back: SystemConfiguration = from_document(doc).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn wrong_format_is_rejected() {
        let doc = to_document(&SystemConfiguration::new()).unwrap();
        assert!(matches!(
            from_document::<LogModel>(doc),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn universe_document_round_trip() {
        let universe: Universe = [PackageModel::new(
            PackageId::new("apache2", "2.2.9", "amd64").unwrap(),
        )]
        .into_iter()
        .collect();
        let text = to_document_string(&universe).unwrap();
        let back: Universe = from_document_str(&text).unwrap();
        assert_eq!(back, universe);
    }
}
