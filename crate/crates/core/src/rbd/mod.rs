//! Reliability block diagrams: topology, a small text DSL, and binding of
//! datasets and priors to named nodes.
//!
//! ```text
//! node  := [NAME "@"] group | NAME
//! group := ("series" | "parallel") "(" node ("," node)+ ")"
//! ```
//!
//! A bare `NAME` is a component. `NAME@group` labels a subsystem so that its
//! own test data or prior can be attached. `#` starts a line comment.

mod json;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use json::{parse_rbd_json, to_json};
pub use parse::parse_rbd;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RbdNode {
    Component {
        id: String,
    },
    Series {
        children: Vec<RbdNode>,
        label: Option<String>,
    },
    Parallel {
        children: Vec<RbdNode>,
        label: Option<String>,
    },
}

impl RbdNode {
    pub fn component(id: impl Into<String>) -> Self {
        RbdNode::Component { id: id.into() }
    }

    pub fn series(children: Vec<RbdNode>) -> Self {
        RbdNode::Series {
            children,
            label: None,
        }
    }

    pub fn parallel(children: Vec<RbdNode>) -> Self {
        RbdNode::Parallel {
            children,
            label: None,
        }
    }

    pub fn labeled(self, name: impl Into<String>) -> Self {
        match self {
            RbdNode::Series { children, .. } => RbdNode::Series {
                children,
                label: Some(name.into()),
            },
            RbdNode::Parallel { children, .. } => RbdNode::Parallel {
                children,
                label: Some(name.into()),
            },
            leaf => leaf,
        }
    }

    /// Name data and priors bind to: the id of a component, the label of a group.
    pub fn label(&self) -> Option<&str> {
        match self {
            RbdNode::Component { id } => Some(id),
            RbdNode::Series { label, .. } | RbdNode::Parallel { label, .. } => label.as_deref(),
        }
    }

    pub fn children(&self) -> &[RbdNode] {
        match self {
            RbdNode::Component { .. } => &[],
            RbdNode::Series { children, .. } | RbdNode::Parallel { children, .. } => children,
        }
    }

    pub fn is_component(&self) -> bool {
        matches!(self, RbdNode::Component { .. })
    }

    /// Every named node, children before parents.
    pub fn labels(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if let Some(l) = n.label() {
                out.push(l);
            }
        });
        out
    }

    pub fn component_ids(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if let RbdNode::Component { id } = n {
                out.push(id.as_str());
            }
        });
        out
    }

    pub fn find(&self, name: &str) -> Option<&RbdNode> {
        if self.label() == Some(name) {
            return Some(self);
        }
        self.children().iter().find_map(|c| c.find(name))
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a RbdNode)) {
        for c in self.children() {
            c.walk(f);
        }
        f(self);
    }
}

impl fmt::Display for RbdNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (keyword, children, label) = match self {
            RbdNode::Component { id } => return f.write_str(id),
            RbdNode::Series { children, label } => ("series", children, label),
            RbdNode::Parallel { children, label } => ("parallel", children, label),
        };
        if let Some(l) = label {
            write!(f, "{l}@")?;
        }
        write!(f, "{keyword}(")?;
        for (i, c) in children.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// A parsed diagram plus the datasets and priors attached to its nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub root: RbdNode,
    /// node label -> dataset name
    pub data: BTreeMap<String, String>,
    /// node label -> prior name
    pub priors: BTreeMap<String, String>,
}

impl SystemSpec {
    pub fn new(root: RbdNode) -> Self {
        Self {
            root,
            data: BTreeMap::new(),
            priors: BTreeMap::new(),
        }
    }

    /// Binds every dataset and prior to the node of the same name.
    pub fn bind_by_name<'a>(
        &mut self,
        datasets: impl IntoIterator<Item = &'a str>,
        priors: impl IntoIterator<Item = &'a str>,
    ) {
        for d in datasets {
            self.data.insert(d.to_string(), d.to_string());
        }
        for p in priors {
            self.priors.insert(p.to_string(), p.to_string());
        }
    }
}

/// Parses either the DSL or its JSON form, chosen by the first non-blank character.
pub fn parse_system(source: &str) -> Result<SystemSpec> {
    if source.trim_start().starts_with('{') {
        parse_rbd_json(source)
    } else {
        parse_rbd(source)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Info,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub label: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Info => "info",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}: {}", self.label, self.message)
    }
}

/// Reports dangling bindings and components that carry no information.
pub fn validate_bindings(
    spec: &SystemSpec,
    datasets: &BTreeSet<String>,
    priors: &BTreeSet<String>,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let labels: BTreeSet<&str> = spec.root.labels().into_iter().collect();
    for (kind, bindings, available) in [
        ("dataset", &spec.data, datasets),
        ("prior", &spec.priors, priors),
    ] {
        for (label, reference) in bindings {
            if !labels.contains(label.as_str()) {
                out.push(Diagnostic {
                    severity: Severity::Error,
                    label: label.clone(),
                    message: format!("{kind} `{reference}` is bound to a node that does not exist"),
                });
            }
            if !available.contains(reference) {
                out.push(Diagnostic {
                    severity: Severity::Error,
                    label: label.clone(),
                    message: format!("{kind} `{reference}` was not supplied"),
                });
            }
        }
    }
    for id in spec.root.component_ids() {
        if !spec.data.contains_key(id) && !spec.priors.contains_key(id) {
            out.push(Diagnostic {
                severity: Severity::Info,
                label: id.to_string(),
                message: "no data and no prior; precision set to zero".to_string(),
            });
        }
    }
    out
}
