//! The `.fw` framework document: canonical JSON with sorted keys, 1-based
//! vertex labels and floats written with 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::blocks::{AnalysisOptions, SymmetricFramework};
use crate::certify::{CertifyPolicy, GENERIC_SAMPLE_TAG};
use crate::error::{Error, Result};
use crate::framework::{Configuration, Framework, Graph};
use crate::symmetry::{
    format_cycles, parse_cycles, Generator, GroupGeometry, GroupKind, Permutation, SymmetryGroup,
    TypeMap,
};

pub const FORMAT_VERSION: u32 = 1;

/// Optional per-document analysis settings; absent fields fall back to the
/// environment and then to built-in defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offblock_rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry_rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_rel: Option<f64>,
}

/// Where the coordinates came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVertices {
    count: usize,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    kind: String,
    #[serde(default)]
    order: Option<usize>,
    #[serde(default)]
    axis: Option<Vec<f64>>,
    #[serde(default)]
    mirror_normal: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    format_version: u32,
    dimension: usize,
    vertices: RawVertices,
    edges: Vec<[usize; 2]>,
    coordinates: Vec<Vec<f64>>,
    group: RawGroup,
    phi: BTreeMap<String, String>,
    #[serde(default)]
    options: Option<DocumentOptions>,
    #[serde(default)]
    provenance: Option<Provenance>,
}

/// A validated framework document. Edges and permutations are 0-based in
/// memory and 1-based on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameworkDocument {
    pub dimension: usize,
    pub labels: Option<Vec<String>>,
    pub graph: Graph,
    pub coordinates: Vec<Vec<f64>>,
    pub group: SymmetryGroup,
    pub phi: TypeMap,
    pub options: Option<DocumentOptions>,
    pub provenance: Option<Provenance>,
}

pub fn parse_group_kind(text: &str) -> Result<GroupKind> {
    let bad = || {
        Error::Document(format!(
            "unknown group kind `{text}` (expected C1, Cs, C<m> or C<m>v)"
        ))
    };
    match text {
        "C1" => return Ok(GroupKind::C1),
        "Cs" => return Ok(GroupKind::Cs),
        _ => {}
    }
    let rest = text.strip_prefix('C').ok_or_else(bad)?;
    let (digits, vertical) = match rest.strip_suffix('v') {
        Some(d) => (d, true),
        None => (rest, false),
    };
    let m: usize = digits.parse().map_err(|_| bad())?;
    if m < 2 {
        return Err(bad());
    }
    Ok(if vertical {
        GroupKind::Cmv(m)
    } else {
        GroupKind::Cm(m)
    })
}

fn group_order(kind: GroupKind) -> usize {
    kind.rotation_order() * if kind.has_reflection() { 2 } else { 1 }
}

impl FrameworkDocument {
    /// Assemble a document from validated parts.
    pub fn new(
        framework: &Framework,
        phi: &TypeMap,
        labels: Option<Vec<String>>,
        provenance: Option<Provenance>,
    ) -> Result<Self> {
        if phi.vertex_count() != framework.graph().vertex_count()
            || phi.group().dim() != framework.dim()
        {
            return Err(Error::DimensionMismatch(
                "type map does not match the framework".into(),
            ));
        }
        Ok(Self {
            dimension: framework.dim(),
            labels,
            graph: framework.graph().clone(),
            coordinates: framework.config().points(),
            group: phi.group().clone(),
            phi: phi.clone(),
            options: None,
            provenance,
        })
    }

    /// Parse and validate a document. Syntax and type errors carry line and
    /// column; semantic errors name the offending element.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if raw.format_version != FORMAT_VERSION {
            return Err(Error::Document(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                raw.format_version
            )));
        }
        let n = raw.vertices.count;
        if let Some(labels) = &raw.vertices.labels {
            if labels.len() != n {
                return Err(Error::Document(format!(
                    "vertices.labels has {} entries, expected {n}",
                    labels.len()
                )));
            }
        }
        let mut edges = Vec::with_capacity(raw.edges.len());
        for (i, [a, b]) in raw.edges.iter().copied().enumerate() {
            if a == 0 || b == 0 || a > n || b > n {
                return Err(Error::Document(format!(
                    "edges[{i}] = [{a}, {b}] references a vertex outside 1..={n}"
                )));
            }
            edges.push((a - 1, b - 1));
        }
        let graph = Graph::new(n, edges)?;
        if raw.coordinates.len() != n {
            return Err(Error::Document(format!(
                "coordinates has {} rows, expected {n}",
                raw.coordinates.len()
            )));
        }
        for (i, row) in raw.coordinates.iter().enumerate() {
            if row.len() != raw.dimension {
                return Err(Error::Document(format!(
                    "coordinates[{i}] has {} entries, expected {}",
                    row.len(),
                    raw.dimension
                )));
            }
        }
        let kind = parse_group_kind(&raw.group.kind)?;
        if let Some(order) = raw.group.order {
            if order != group_order(kind) {
                return Err(Error::Document(format!(
                    "group.order {order} does not match kind {} (order {})",
                    raw.group.kind,
                    group_order(kind)
                )));
            }
        }
        let group = SymmetryGroup::new(
            kind,
            raw.dimension,
            GroupGeometry {
                axis: raw.group.axis,
                mirror_normal: raw.group.mirror_normal,
            },
        )?;
        let mut images: Vec<(Generator, Permutation)> = Vec::new();
        for (name, cycles) in &raw.phi {
            let g = Generator::from_token(name).ok_or_else(|| {
                Error::Document(format!("phi key `{name}` is not a generator (use C or s)"))
            })?;
            let perm = parse_cycles(cycles, n).map_err(|reason| Error::Permutation {
                element: name.clone(),
                reason,
            })?;
            images.push((g, perm));
        }
        let phi = TypeMap::from_generators(group.clone(), &graph, &images)?;
        // Configuration::new rejects non-finite coordinates.
        Configuration::new(raw.dimension, &raw.coordinates)?;
        Ok(Self {
            dimension: raw.dimension,
            labels: raw.vertices.labels,
            graph,
            coordinates: raw.coordinates,
            group,
            phi,
            options: raw.options,
            provenance: raw.provenance,
        })
    }

    pub fn configuration(&self) -> Result<Configuration> {
        Configuration::new(self.dimension, &self.coordinates)
    }

    pub fn framework(&self) -> Result<Framework> {
        Framework::new(self.graph.clone(), self.configuration()?)
    }

    /// Environment defaults overridden by document options.
    pub fn analysis_options(&self) -> AnalysisOptions {
        let mut opts = AnalysisOptions::from_env();
        if let Some(o) = &self.options {
            if let Some(v) = o.rank_rtol {
                opts.rank_rtol = v;
            }
            if let Some(v) = o.offblock_rtol {
                opts.offblock_rtol = v;
            }
            if let Some(v) = o.symmetry_rtol {
                opts.symmetry_rtol = v;
            }
        }
        opts
    }

    pub fn certify_policy(&self) -> CertifyPolicy {
        let mut policy = CertifyPolicy::default();
        if let Some(o) = &self.options {
            if let Some(v) = o.seed {
                policy.seed = v;
            }
            if let Some(v) = o.trials {
                policy.trials = v;
            }
            if let Some(v) = o.radius_rel {
                policy.radius_rel = v;
            }
        }
        policy.generic_seed = self
            .provenance
            .as_ref()
            .filter(|p| p.generator == GENERIC_SAMPLE_TAG)
            .map(|p| p.seed);
        policy
    }

    pub fn symmetric_framework(&self) -> Result<SymmetricFramework> {
        SymmetricFramework::new(self.framework()?, self.phi.clone(), self.analysis_options())
    }

    /// Canonical serialization; `parse` followed by this is the identity on
    /// its own output.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::from("{\n");
        let mut fields: Vec<String> = Vec::new();

        let rows: Vec<String> = self
            .coordinates
            .iter()
            .map(|r| format!("    {}", float_array(r)))
            .collect();
        fields.push(format!("  \"coordinates\": [\n{}\n  ]", rows.join(",\n")));
        fields.push(format!("  \"dimension\": {}", self.dimension));
        let edges: Vec<String> = self
            .graph
            .edges()
            .iter()
            .map(|&(a, b)| format!("    [{}, {}]", a + 1, b + 1))
            .collect();
        if edges.is_empty() {
            fields.push("  \"edges\": []".into());
        } else {
            fields.push(format!("  \"edges\": [\n{}\n  ]", edges.join(",\n")));
        }
        fields.push(format!("  \"format_version\": {FORMAT_VERSION}"));

        let geom = self.group.geometry();
        let mut group = Vec::new();
        if let Some(axis) = &geom.axis {
            group.push(format!("    \"axis\": {}", float_array(axis)));
        }
        group.push(format!(
            "    \"kind\": {}",
            json_string(&self.group.kind().name())
        ));
        if let Some(normal) = &geom.mirror_normal {
            group.push(format!("    \"mirror_normal\": {}", float_array(normal)));
        }
        group.push(format!("    \"order\": {}", self.group.order()));
        fields.push(format!("  \"group\": {{\n{}\n  }}", group.join(",\n")));

        if let Some(o) = &self.options {
            let mut entries = Vec::new();
            if let Some(v) = o.offblock_rtol {
                entries.push(format!("    \"offblock_rtol\": {}", float(v)));
            }
            if let Some(v) = o.radius_rel {
                entries.push(format!("    \"radius_rel\": {}", float(v)));
            }
            if let Some(v) = o.rank_rtol {
                entries.push(format!("    \"rank_rtol\": {}", float(v)));
            }
            if let Some(v) = o.seed {
                entries.push(format!("    \"seed\": {v}"));
            }
            if let Some(v) = o.symmetry_rtol {
                entries.push(format!("    \"symmetry_rtol\": {}", float(v)));
            }
            if let Some(v) = o.trials {
                entries.push(format!("    \"trials\": {v}"));
            }
            if entries.is_empty() {
                fields.push("  \"options\": {}".into());
            } else {
                fields.push(format!("  \"options\": {{\n{}\n  }}", entries.join(",\n")));
            }
        }

        let mut phi: Vec<(&str, String)> = self
            .phi
            .generator_images()
            .into_iter()
            .map(|(g, p)| (g.token(), format_cycles(&p)))
            .collect();
        phi.sort();
        if phi.is_empty() {
            fields.push("  \"phi\": {}".into());
        } else {
            let entries: Vec<String> = phi
                .iter()
                .map(|(k, v)| format!("    {}: {}", json_string(k), json_string(v)))
                .collect();
            fields.push(format!("  \"phi\": {{\n{}\n  }}", entries.join(",\n")));
        }

        if let Some(p) = &self.provenance {
            fields.push(format!(
                "  \"provenance\": {{\n    \"generator\": {},\n    \"seed\": {}\n  }}",
                json_string(&p.generator),
                p.seed
            ));
        }

        let mut vertices = format!(
            "  \"vertices\": {{\n    \"count\": {}",
            self.graph.vertex_count()
        );
        if let Some(labels) = &self.labels {
            let l: Vec<String> = labels.iter().map(|s| json_string(s)).collect();
            let _ = write!(vertices, ",\n    \"labels\": [{}]", l.join(", "));
        }
        vertices.push_str("\n  }");
        fields.push(vertices);

        out.push_str(&fields.join(",\n"));
        out.push_str("\n}\n");
        out
    }
}

/// 17 significant digits in scientific notation; valid JSON and exact on
/// re-read.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn float_array(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| float(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

pub fn parse_framework_file(text: &str) -> Result<FrameworkDocument> {
    FrameworkDocument::parse(text)
}

pub fn write_framework_file(doc: &FrameworkDocument) -> String {
    doc.to_canonical_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = r#"{
  "coordinates": [[-1, 0], [1, 0], [0, 2]],
  "dimension": 2,
  "edges": [[1, 2], [1, 3], [2, 3]],
  "format_version": 1,
  "group": {"kind": "Cs", "mirror_normal": [1, 0]},
  "phi": {"s": "(1 2)(3)"},
  "vertices": {"count": 3}
}"#;

    #[test]
    fn parses_minimal_document() {
        let doc = FrameworkDocument::parse(TRIANGLE).unwrap();
        assert_eq!(doc.graph.edge_count(), 3);
        assert_eq!(doc.phi.perm(1), &vec![1, 0, 2]);
        assert!(doc.symmetric_framework().is_ok());
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let doc = FrameworkDocument::parse(TRIANGLE).unwrap();
        let once = doc.to_canonical_string();
        let twice = FrameworkDocument::parse(&once)
            .unwrap()
            .to_canonical_string();
        assert_eq!(once, twice);
        assert!(once.contains("\"order\": 2"));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = FrameworkDocument::parse("{\n  \"dimension\": 2,\n  oops\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn non_automorphism_is_named() {
        let text = TRIANGLE
            .replace("[2, 3]]", "[1, 4]]")
            .replace("\"count\": 3", "\"count\": 4")
            .replace("[0, 2]]", "[0, 2], [0, 5]]");
        let err = FrameworkDocument::parse(&text).unwrap_err();
        assert!(matches!(err, Error::NotAutomorphism { .. }), "{err:?}");
        assert!(err.to_string().contains("`s`"));
    }

    #[test]
    fn order_mismatch_rejected() {
        let text = TRIANGLE.replace("\"kind\": \"Cs\"", "\"kind\": \"Cs\", \"order\": 4");
        assert!(matches!(
            FrameworkDocument::parse(&text),
            Err(Error::Document(_))
        ));
    }

    #[test]
    fn group_kind_names() {
        assert_eq!(parse_group_kind("C2v").unwrap(), GroupKind::Cmv(2));
        assert_eq!(parse_group_kind("C5").unwrap(), GroupKind::Cm(5));
        assert!(parse_group_kind("D3").is_err());
        assert!(parse_group_kind("C1v").is_err());
    }
}
