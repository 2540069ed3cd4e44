//! DOT and JSON renderings of models, extensions and statistics.

use std::fmt::Write;

use serde_json::{json, Value};

use crate::circumscription::GroundedExtension;
use crate::kb_text::{concept_to_string, role_to_string};
use crate::tableau::{ExtractedModel, Stats};

pub fn stats_json(s: &Stats) -> Value {
    json!({
        "nodes": s.nodes,
        "rule_applications": s.rule_applications,
        "branches": s.branches,
        "millis": s.millis,
    })
}

pub fn model_json(m: &ExtractedModel) -> Value {
    let nodes: Vec<Value> = m
        .nodes
        .iter()
        .map(|n| {
            json!({
                "id": n.id,
                "label": n.label.iter().map(concept_to_string).collect::<Vec<_>>(),
                "nominals": n.nominals,
                "blocked_by": n.blocked_by,
                "parent": n.parent,
            })
        })
        .collect();
    let edges: Vec<Value> = m
        .edges
        .iter()
        .map(|e| json!({"from": e.from, "to": e.to, "roles": e.roles.iter().map(role_to_string).collect::<Vec<_>>()}))
        .collect();
    let cnodes: Vec<Value> = m.cnodes.iter().map(|c| json!({"id": c.id, "individual": c.individual})).collect();
    let cedges: Vec<Value> =
        m.cedges.iter().map(|e| json!({"from": e.from, "to": e.to, "roles": e.roles})).collect();
    let scenario: Vec<Value> = m
        .scenario
        .iter()
        .filter(|(c, _, d)| m.constrained.contains(&(*c, *d)))
        .map(|(c, r, d)| json!({"from": c, "relation": r, "to": d}))
        .collect();
    json!({
        "system": m.system,
        "nodes": nodes,
        "edges": edges,
        "cnodes": cnodes,
        "cedges": cedges,
        "network": scenario,
    })
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering: abstract nodes as ellipses, concrete nodes as boxes,
/// network constraints dashed and labelled with the scenario relation.
pub fn model_dot(m: &ExtractedModel) -> String {
    let mut out = String::from("digraph model {\n");
    for n in &m.nodes {
        let mut text = format!("n{}", n.id);
        if !n.nominals.is_empty() {
            let _ = write!(text, " {{{}}}", n.nominals.join(", "));
        }
        let concepts: Vec<String> = n
            .label
            .iter()
            .filter(|c| !matches!(c, crate::kb_model::Concept::Nominal(_)))
            .map(concept_to_string)
            .collect();
        if !concepts.is_empty() {
            let _ = write!(text, "\\n{}", concepts.join("\\n"));
        }
        let style = if n.blocked_by.is_some() { ", style=dotted" } else { "" };
        let _ = writeln!(out, "  n{} [shape=ellipse, label=\"{}\"{style}];", n.id, escape(&text).replace("\\\\n", "\\n"));
        if let Some(b) = n.blocked_by {
            let _ = writeln!(out, "  n{} -> n{} [style=dotted, label=\"blocked by\"];", n.id, b);
        }
    }
    for c in &m.cnodes {
        let text = match &c.individual {
            Some(i) => format!("c{} {i}", c.id),
            None => format!("c{}", c.id),
        };
        let _ = writeln!(out, "  c{} [shape=box, label=\"{}\"];", c.id, escape(&text));
    }
    for e in &m.edges {
        let roles: Vec<String> = e.roles.iter().map(role_to_string).collect();
        let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, escape(&roles.join(", ")));
    }
    for e in &m.cedges {
        let _ = writeln!(out, "  n{} -> c{} [label=\"{}\"];", e.from, e.to, escape(&e.roles.join(", ")));
    }
    for (c, r, d) in &m.scenario {
        if m.constrained.contains(&(*c, *d)) {
            let _ = writeln!(out, "  c{c} -> c{d} [style=dashed, label=\"{}\"];", escape(r));
        }
    }
    out.push_str("}\n");
    out
}

pub fn extension_json(e: &GroundedExtension) -> Value {
    let concepts: serde_json::Map<String, Value> =
        e.concepts.iter().map(|(k, v)| (k.clone(), json!(v.iter().collect::<Vec<_>>()))).collect();
    let roles: serde_json::Map<String, Value> = e
        .roles
        .iter()
        .map(|(k, v)| (k.clone(), json!(v.iter().map(|(a, b)| [a, b]).collect::<Vec<_>>())))
        .collect();
    json!({"concepts": concepts, "roles": roles})
}
