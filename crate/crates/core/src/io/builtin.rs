//! Built-in example frameworks.
//!
//! Sampled examples draw coordinates in the fixed subspace from a seed and
//! record that seed as provenance; the rest use fixed coordinates.

use crate::certify::{sample_symmetric_generic, GENERIC_SAMPLE_TAG};
use crate::error::{Error, Result};
use crate::framework::{Configuration, Framework, Graph};
use crate::io::document::{FrameworkDocument, Provenance};
use crate::symmetry::{parse_cycles, Generator, GroupGeometry, GroupKind, SymmetryGroup, TypeMap};

/// Names accepted by [`builtin_example`].
pub const BUILTIN_NAMES: &[&str] = &[
    "triangle-cs",
    "square-4cycle",
    "k33-phi-a",
    "k33-phi-b",
    "k33-hexagon",
    "bricard-c2",
    "bricard-cs",
    "octahedron-c2v",
    "octahedron-cs-isostatic",
    "double-suspension",
];

/// Default polygon half-size for `double-suspension`; `n = 2` is the
/// octahedron.
pub const DEFAULT_SUSPENSION_N: usize = 2;

/// Octahedron: 4-cycle `1-2-3-4` plus cone vertices 5 and 6.
pub fn octahedron_graph() -> Graph {
    double_suspension_graph(2).expect("n = 2 is valid")
}

/// A `2n`-gon `1..2n` with both cone vertices joined to every polygon vertex.
pub fn double_suspension_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Invalid(format!(
            "double-suspension needs n >= 2, got {n}"
        )));
    }
    let k = 2 * n;
    let (a, b) = (k, k + 1);
    let mut edges = Vec::new();
    for i in 0..k {
        let next = (i + 1) % k;
        edges.push((i.min(next), i.max(next)));
        edges.push((i, a));
        edges.push((i, b));
    }
    edges.sort_unstable();
    Graph::new(k + 2, edges)
}

/// `K_{3,3}` with parts `{1, 2, 3}` and `{4, 5, 6}`.
pub fn k33_graph() -> Graph {
    let mut edges = Vec::new();
    for i in 0..3 {
        for j in 3..6 {
            edges.push((i, j));
        }
    }
    Graph::new(6, edges).expect("valid graph")
}

fn z_axis() -> Option<Vec<f64>> {
    Some(vec![0.0, 0.0, 1.0])
}

fn group(kind: GroupKind, dim: usize) -> Result<SymmetryGroup> {
    let mirror = match dim {
        2 => vec![1.0, 0.0],
        _ => vec![1.0, 0.0, 0.0],
    };
    let geometry = GroupGeometry {
        axis: if dim == 3 && kind.rotation_order() > 1 {
            z_axis()
        } else {
            None
        },
        mirror_normal: if kind.has_reflection() {
            Some(mirror)
        } else {
            None
        },
    };
    SymmetryGroup::new(kind, dim, geometry)
}

fn type_map(group: SymmetryGroup, graph: &Graph, images: &[(Generator, &str)]) -> Result<TypeMap> {
    let n = graph.vertex_count();
    let mut parsed = Vec::new();
    for (g, text) in images {
        let perm = parse_cycles(text, n).map_err(|reason| Error::Permutation {
            element: g.token().into(),
            reason,
        })?;
        parsed.push((*g, perm));
    }
    TypeMap::from_generators(group, graph, &parsed)
}

fn sampled(graph: Graph, phi: TypeMap, seed: u64) -> Result<FrameworkDocument> {
    let config = sample_symmetric_generic(&graph, &phi, seed)?;
    let fw = Framework::new(graph, config)?;
    FrameworkDocument::new(
        &fw,
        &phi,
        None,
        Some(Provenance {
            generator: GENERIC_SAMPLE_TAG.into(),
            seed,
        }),
    )
}

fn fixed(graph: Graph, phi: TypeMap, points: &[Vec<f64>]) -> Result<FrameworkDocument> {
    let config = Configuration::new(phi.group().dim(), points)?;
    let fw = Framework::new(graph, config)?;
    FrameworkDocument::new(&fw, &phi, None, None)
}

/// Split `double-suspension(3)` style names into base name and parameter.
fn split_name(name: &str) -> Result<(&str, Option<usize>)> {
    match name.split_once('(') {
        None => Ok((name, None)),
        Some((base, rest)) => {
            let digits = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Invalid(format!("malformed example name `{name}`")))?;
            let n = digits
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("malformed parameter in `{name}`")))?;
            Ok((base, Some(n)))
        }
    }
}

/// Build a named example. `n` only applies to `double-suspension` (also
/// accepted inline as `double-suspension(n)`).
pub fn builtin_example(name: &str, seed: u64, n: Option<usize>) -> Result<FrameworkDocument> {
    let (base, inline_n) = split_name(name)?;
    let n = inline_n.or(n);
    if n.is_some() && base != "double-suspension" {
        return Err(Error::Invalid(format!(
            "example `{base}` takes no parameter"
        )));
    }
    match base {
        "triangle-cs" => {
            let g = Graph::new(3, vec![(0, 1), (0, 2), (1, 2)])?;
            let phi = type_map(
                group(GroupKind::Cs, 2)?,
                &g,
                &[(Generator::Reflection, "(1 2)(3)")],
            )?;
            fixed(g, phi, &[vec![-1.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0]])
        }
        "square-4cycle" => {
            let g = Graph::new(4, vec![(0, 1), (0, 3), (1, 2), (2, 3)])?;
            let phi = type_map(
                group(GroupKind::Cs, 2)?,
                &g,
                &[(Generator::Reflection, "(1 3)(2)(4)")],
            )?;
            fixed(
                g,
                phi,
                &[
                    vec![1.0, 0.0],
                    vec![0.0, 1.0],
                    vec![-1.0, 0.0],
                    vec![0.0, -1.0],
                ],
            )
        }
        "k33-phi-a" => {
            let g = k33_graph();
            let phi = type_map(
                group(GroupKind::Cs, 2)?,
                &g,
                &[(Generator::Reflection, "(1 2)(5 6)(3)(4)")],
            )?;
            sampled(g, phi, seed)
        }
        "k33-phi-b" => {
            let g = k33_graph();
            let phi = type_map(
                group(GroupKind::Cs, 2)?,
                &g,
                &[(Generator::Reflection, "(1 4)(2 5)(3 6)")],
            )?;
            sampled(g, phi, seed)
        }
        "k33-hexagon" => {
            // Six points on the unit circle; the mirror swaps 1,2 and 5,6 and
            // fixes 3,4 on the mirror line.
            let g = k33_graph();
            let phi = type_map(
                group(GroupKind::Cs, 2)?,
                &g,
                &[(Generator::Reflection, "(1 2)(5 6)(3)(4)")],
            )?;
            let pts: Vec<Vec<f64>> = [120.0f64, 60.0, 270.0, 90.0, 200.0, 340.0]
                .iter()
                .map(|deg| {
                    let r = deg.to_radians();
                    vec![r.cos(), r.sin()]
                })
                .collect();
            let mut pts = pts;
            // Snap mirror-fixed points and mirror pairs exactly onto the mirror.
            pts[2][0] = 0.0;
            pts[3][0] = 0.0;
            pts[1] = vec![-pts[0][0], pts[0][1]];
            pts[5] = vec![-pts[4][0], pts[4][1]];
            fixed(g, phi, &pts)
        }
        "bricard-c2" => {
            let g = octahedron_graph();
            let phi = type_map(
                group(GroupKind::Cm(2), 3)?,
                &g,
                &[(Generator::Rotation, "(1 3)(2 4)(5 6)")],
            )?;
            sampled(g, phi, seed)
        }
        "bricard-cs" => {
            let g = octahedron_graph();
            let phi = type_map(
                group(GroupKind::Cs, 3)?,
                &g,
                &[(Generator::Reflection, "(1 3)(2)(4)(5 6)")],
            )?;
            sampled(g, phi, seed)
        }
        "octahedron-c2v" => {
            let g = octahedron_graph();
            let phi = type_map(
                group(GroupKind::Cmv(2), 3)?,
                &g,
                &[
                    (Generator::Rotation, "(1 3)(2 4)(5 6)"),
                    (Generator::Reflection, "(1 3)(2)(4)(5 6)"),
                ],
            )?;
            sampled(g, phi, seed)
        }
        "octahedron-cs-isostatic" => {
            let g = octahedron_graph();
            let phi = type_map(
                group(GroupKind::Cs, 3)?,
                &g,
                &[(Generator::Reflection, "(2 4)(1)(3)(5)(6)")],
            )?;
            sampled(g, phi, seed)
        }
        "double-suspension" => {
            let n = n.unwrap_or(DEFAULT_SUSPENSION_N);
            let g = double_suspension_graph(n)?;
            let k = 2 * n;
            let mut cycles = String::new();
            for i in 0..n {
                cycles.push_str(&format!("({} {})", i + 1, i + n + 1));
            }
            cycles.push_str(&format!("({} {})", k + 1, k + 2));
            let phi = type_map(
                group(GroupKind::Cm(2), 3)?,
                &g,
                &[(Generator::Rotation, &cycles)],
            )?;
            sampled(g, phi, seed)
        }
        _ => Err(Error::Invalid(format!(
            "unknown example `{name}` (known: {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}
