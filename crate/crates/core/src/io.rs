//! JSON instance documents:
//! `{"setting": "obnoxious", "variant": "sum", "agents": [["1/6", "5/6"], ["0.5"]]}`.
//!
//! Coordinates are strings holding `p`, `p/q` or a decimal; decimals are
//! converted exactly. Bare JSON numbers are accepted the same way.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{AgentProfile, Instance, Setting, Variant};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
}

fn field(path: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError::Field { path: path.into(), message: message.into() }
}

/// Serialized shape of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub setting: Setting,
    pub variant: Variant,
    pub agents: Vec<Vec<String>>,
}

impl From<&Instance> for InstanceDocument {
    fn from(instance: &Instance) -> Self {
        InstanceDocument {
            setting: instance.setting(),
            variant: instance.variant(),
            agents: instance
                .agents()
                .iter()
                .map(|a| a.locations().iter().map(Rational::to_string).collect())
                .collect(),
        }
    }
}

fn keyword<T: std::str::FromStr>(root: &serde_json::Map<String, Value>, key: &str) -> Result<T, ParseError>
where
    T::Err: std::fmt::Display,
{
    match root.get(key) {
        None => Err(field(key, "missing")),
        Some(Value::String(s)) => s.parse().map_err(|e: T::Err| field(key, e.to_string())),
        Some(_) => Err(field(key, "expected a string")),
    }
}

fn coordinate(value: &Value, path: &str) -> Result<Rational, ParseError> {
    let text = match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(field(path, "expected a rational string")),
    };
    let x: Rational = text.trim().parse().map_err(|e| field(path, format!("`{text}`: {e}")))?;
    if !x.in_unit_interval() {
        return Err(field(path, format!("location {x} outside [0, 1]")));
    }
    Ok(x)
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    let Value::Object(root) = value else {
        return Err(field("$", "expected an object"));
    };
    let setting: Setting = keyword(&root, "setting")?;
    let variant: Variant = keyword(&root, "variant")?;
    let Some(Value::Array(agents)) = root.get("agents") else {
        return Err(field("agents", "expected a list of agents"));
    };
    if agents.is_empty() {
        return Err(field("agents", "no agents"));
    }
    let mut profiles = Vec::with_capacity(agents.len());
    for (i, agent) in agents.iter().enumerate() {
        let Value::Array(locations) = agent else {
            return Err(field(format!("agents[{i}]"), "expected a list of locations"));
        };
        if locations.is_empty() {
            return Err(field(format!("agents[{i}]"), "empty location list"));
        }
        let xs = locations
            .iter()
            .enumerate()
            .map(|(j, v)| coordinate(v, &format!("agents[{i}][{j}]")))
            .collect::<Result<Vec<_>, _>>()?;
        profiles.push(AgentProfile::new(xs).map_err(|e| field(format!("agents[{i}]"), e.to_string()))?);
    }
    Instance::new(setting, variant, profiles).map_err(|e| field("agents", e.to_string()))
}

pub fn serialize_instance(instance: &Instance) -> String {
    serde_json::to_string(&InstanceDocument::from(instance)).expect("plain strings serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p, d)
    }

    #[test]
    fn parses_gadget_profile() {
        let inst = parse_instance(r#"{"setting":"obnoxious","variant":"sum","agents":[["1/6","1/6","5/6"],["5/6","5/6","5/6"]]}"#).unwrap();
        let expected = Instance::from_fractions(Setting::Obnoxious, Variant::Sum, &[&[(1, 6), (1, 6), (5, 6)], &[(5, 6), (5, 6), (5, 6)]]);
        assert_eq!(inst, expected);
    }

    #[test]
    fn decimals_and_sorting() {
        let inst = parse_instance(r#"{"setting":"desirable","variant":"max","agents":[["0.5"],["0.75","0.125", 1]]}"#).unwrap();
        assert_eq!(inst.agent(0).locations(), &[q(1, 2)]);
        assert_eq!(inst.agent(1).locations(), &[q(1, 8), q(3, 4), q(1, 1)]);
    }

    #[test]
    fn errors_name_the_path() {
        let cases = [
            (r#"{"setting":"desirable","variant":"sum","agents":[["1/0"]]}"#, "agents[0][0]"),
            (r#"{"setting":"desirable","variant":"sum","agents":[["0"],["1/2","3/2"]]}"#, "agents[1][1]"),
            (r#"{"setting":"desirable","variant":"sum","agents":[["0"],[]]}"#, "agents[1]"),
            (r#"{"setting":"desirable","variant":"sum","agents":[]}"#, "agents"),
            (r#"{"setting":"pleasant","variant":"sum","agents":[["0"]]}"#, "setting"),
            (r#"{"setting":"desirable","agents":[["0"]]}"#, "variant"),
            (r#"{"setting":"desirable","variant":"sum","agents":[["x"]]}"#, "agents[0][0]"),
        ];
        for (text, path) in cases {
            match parse_instance(text) {
                Err(ParseError::Field { path: p, .. }) => assert_eq!(p, path, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(parse_instance("{"), Err(ParseError::Json(_))));
    }

    #[test]
    fn serialized_form() {
        let inst = Instance::from_fractions(Setting::Desirable, Variant::Sum, &[&[(0, 1), (1, 2)], &[(1, 1)]]);
        assert_eq!(serialize_instance(&inst), r#"{"setting":"desirable","variant":"sum","agents":[["0","1/2"],["1"]]}"#);
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        let coordinate = (0i64..=97).prop_map(|k| Rational::new(k, 97));
        let agent = prop::collection::vec(coordinate, 1..5).prop_map(|xs| AgentProfile::new(xs).unwrap());
        (
            prop_oneof![Just(Setting::Desirable), Just(Setting::Obnoxious)],
            prop_oneof![Just(Variant::Sum), Just(Variant::Max)],
            prop::collection::vec(agent, 1..6),
        )
            .prop_map(|(s, v, agents)| Instance::new(s, v, agents).unwrap())
    }

    proptest! {
        #[test]
        fn round_trip(inst in arb_instance()) {
            prop_assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst.clone());
            let doc: InstanceDocument = serde_json::from_str(&serialize_instance(&inst)).unwrap();
            prop_assert_eq!(doc, InstanceDocument::from(&inst));
        }
    }
}
