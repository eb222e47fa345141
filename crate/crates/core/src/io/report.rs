//! Machine-readable reports and their text rendering.
//!
//! Every report is built once as a JSON value; the text form is rendered from
//! that value, so each number printed as text also appears in the JSON.

use serde_json::{json, Map, Value};

use crate::blocks::{GraphChoice, SymmetricFramework};
use crate::certify::FlexCertificate;
use crate::error::Result;
use crate::framework::infinitesimal_rigidity_test_with;
use crate::io::document::FrameworkDocument;
use crate::symmetry::{validate_type_map, TypeMapValidation};
use crate::trace::{FlexPath, PathReport};

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

pub fn validation_report(doc: &FrameworkDocument) -> Result<(Value, TypeMapValidation)> {
    let fw = doc.framework()?;
    let opts = doc.analysis_options();
    let tol = opts.symmetry_rtol * fw.config().scale();
    let v = validate_type_map(&fw, &doc.phi, Some(tol))?;
    let zero: Vec<usize> = fw.zero_length_edges().iter().map(|e| e + 1).collect();
    let report = json!({
        "command": "validate",
        "valid": v.valid,
        "vertices": fw.graph().vertex_count(),
        "edges": fw.graph().edge_count(),
        "dimension": fw.dim(),
        "group": doc.group.kind().name(),
        "group_order": doc.group.order(),
        "symmetry_residual": v.max_residual,
        "symmetry_tolerance": v.tolerance,
        "worst_element": v.worst.as_ref().map(|w| w.0.clone()),
        "worst_vertex": v.worst.as_ref().map(|w| w.1),
        "zero_length_edges": zero,
        "affine_span": fw.config().affine_span_dim(),
    });
    Ok((report, v))
}

pub fn analysis_report(sf: &SymmetricFramework) -> Result<Value> {
    let fw = sf.framework();
    let rig = infinitesimal_rigidity_test_with(fw, sf.rank_tol());
    let blocks = sf.block_decomposition()?;
    let maxwell = sf.maxwell_counts()?;
    let dims: Vec<[usize; 2]> = blocks.dims().iter().map(|&(r, c)| [r, c]).collect();
    Ok(json!({
        "command": "analyze",
        "rank_tolerance": sf.rank_tol(),
        "rigidity": {
            "rank": rig.report.rank,
            "expected_rank": rig.expected_rank,
            "infinitesimally_rigid": rig.infinitesimally_rigid,
        },
        "fixed_subspace_dim": sf.fixed_basis().ncols(),
        "restricted_rank": {
            "graph": sf.restricted_rank(GraphChoice::Own).rank,
            "complete": sf.restricted_rank(GraphChoice::Complete).rank,
        },
        "blocks": {
            "irreps": blocks.labels,
            "dims": dims,
            "ranks": blocks.block_ranks,
            "offblock_residual": blocks.offblock_residual,
        },
        "maxwell": to_value(&maxwell.rows),
        "spanning": maxwell.spanning,
        "fully_symmetric_flexes": sf.fully_symmetric_flexes()?.ncols(),
        "fully_symmetric_self_stresses": sf.fully_symmetric_self_stresses()?.ncols(),
    }))
}

pub fn certificate_report(cert: &FlexCertificate) -> Value {
    let mut v = to_value(cert);
    if let Value::Object(map) = &mut v {
        map.insert("command".into(), json!("flex-detect"));
        // 1-based irrep index, matching the command-line option.
        map.insert("irrep".into(), json!(cert.irrep + 1));
    }
    v
}

pub fn trace_report(path: &FlexPath, report: &PathReport, out: &str) -> Value {
    let events: Vec<Value> = path
        .events
        .iter()
        .map(|e| {
            json!({
                "monitor": e.monitor,
                "after_frame": e.after_frame,
                "chord": e.chord,
                "value": e.value,
            })
        })
        .collect();
    let mut rep = to_value(report);
    if let Value::Object(map) = &mut rep {
        if let Some(Value::Object(w)) = map.get_mut("witness") {
            if let Some((a, b)) = report.witness.as_ref().map(|w| w.pair) {
                w.insert("pair".into(), json!([a + 1, b + 1]));
            }
        }
    }
    json!({
        "command": "trace",
        "output": out,
        "steps": path.frames.len() - 1,
        "step_size": path.step_size,
        "certified": path.certified,
        "followed_flex": path.followed_flex,
        "singular_frames": path.diagnostics.iter().enumerate().filter(|(_, d)| d.singular).map(|(i, _)| i).collect::<Vec<_>>(),
        "events": events,
        "path": rep,
    })
}

/// Indented `key: value` rendering of a report. Scalars and arrays of
/// scalars stay on one line.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(map) => render_map(map, 0, &mut out),
        other => {
            out.push_str(&inline(other));
            out.push('\n');
        }
    }
    out
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|x| !x.is_object() && is_flat(x)),
        Value::Object(_) => false,
        _ => true,
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(inline).collect();
            format!("[{}]", parts.join(", "))
        }
        other => other.to_string(),
    }
}

fn render_map(map: &Map<String, Value>, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for (k, v) in map {
        if is_flat(v) {
            out.push_str(&format!("{pad}{k}: {}\n", inline(v)));
            continue;
        }
        out.push_str(&format!("{pad}{k}:\n"));
        match v {
            Value::Object(inner) => render_map(inner, depth + 1, out),
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    match item {
                        Value::Object(inner) => {
                            out.push_str(&format!("{pad}  - [{i}]\n"));
                            render_map(inner, depth + 2, out);
                        }
                        other => out.push_str(&format!("{pad}  - {}\n", inline(other))),
                    }
                }
            }
            _ => unreachable!("flat values handled above"),
        }
    }
}
