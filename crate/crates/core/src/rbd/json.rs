use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{RbdNode, SystemSpec};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct JsonNode {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<JsonNode>,
}

fn from_json(node: JsonNode, names: &mut BTreeSet<String>) -> Result<RbdNode> {
    let mut claim = |name: &str| {
        if names.insert(name.to_string()) {
            Ok(())
        } else {
            Err(Error::DuplicateName(name.to_string()))
        }
    };
    match node.kind.as_str() {
        "component" => {
            let id = node
                .id
                .or(node.label)
                .ok_or_else(|| Error::Config("component without an `id`".into()))?;
            claim(&id)?;
            Ok(RbdNode::component(id))
        }
        kind @ ("series" | "parallel") => {
            if node.children.len() < 2 {
                return Err(Error::EmptyGroup(node.children.len()));
            }
            let label = node.label.or(node.id);
            if let Some(l) = &label {
                claim(l)?;
            }
            let children = node
                .children
                .into_iter()
                .map(|c| from_json(c, names))
                .collect::<Result<Vec<_>>>()?;
            Ok(match kind {
                "series" => RbdNode::Series { children, label },
                _ => RbdNode::Parallel { children, label },
            })
        }
        other => Err(Error::Config(format!("unknown node type `{other}`"))),
    }
}

fn to_json_node(node: &RbdNode) -> JsonNode {
    match node {
        RbdNode::Component { id } => JsonNode {
            kind: "component".into(),
            id: Some(id.clone()),
            label: None,
            children: Vec::new(),
        },
        RbdNode::Series { children, label } | RbdNode::Parallel { children, label } => JsonNode {
            kind: if matches!(node, RbdNode::Series { .. }) {
                "series".into()
            } else {
                "parallel".into()
            },
            id: None,
            label: label.clone(),
            children: children.iter().map(to_json_node).collect(),
        },
    }
}

/// Parses the JSON form of a block diagram.
pub fn parse_rbd_json(source: &str) -> Result<SystemSpec> {
    let node: JsonNode =
        serde_json::from_str(source).map_err(|e| Error::Config(format!("rbd json: {e}")))?;
    let root = from_json(node, &mut BTreeSet::new())?;
    Ok(SystemSpec::new(root))
}

pub fn to_json(node: &RbdNode) -> String {
    serde_json::to_string_pretty(&to_json_node(node)).expect("tree serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbd::parse_rbd;

    #[test]
    fn json_matches_dsl() {
        let dsl = parse_rbd("s@series(a, parallel(b, c))").unwrap();
        let json = to_json(&dsl.root);
        assert!(json.contains("\"type\": \"series\""));
        assert_eq!(parse_rbd_json(&json).unwrap(), dsl);
    }

    #[test]
    fn hand_written_json() {
        let src = r#"{"type": "parallel", "label": "p", "children": [
            {"type": "component", "id": "x"}, {"type": "component", "id": "y"}]}"#;
        let spec = parse_rbd_json(src).unwrap();
        assert_eq!(spec.root.to_string(), "p@parallel(x, y)");
        assert!(crate::rbd::parse_system(src).is_ok());
    }

    #[test]
    fn json_errors() {
        let one = r#"{"type": "series", "children": [{"type": "component", "id": "x"}]}"#;
        assert_eq!(parse_rbd_json(one), Err(Error::EmptyGroup(1)));
        assert!(parse_rbd_json(r#"{"type": "bridge"}"#).is_err());
        let dup = r#"{"type": "series", "children": [
            {"type": "component", "id": "x"}, {"type": "component", "id": "x"}]}"#;
        assert_eq!(parse_rbd_json(dup), Err(Error::DuplicateName("x".into())));
    }
}
