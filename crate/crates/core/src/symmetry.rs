//! Point groups `C_s`, `C_m`, `C_mv` and their action on frameworks.
//!
//! Elements are indexed as `s^a · C^k` with `a ∈ {0, 1}` and `0 ≤ k < m`,
//! stored at position `a·m + k`. The identity is always element 0, rotations
//! follow by increasing power, then the reflections.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::framework::{Framework, Graph};

const UNIT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "order")]
pub enum GroupKind {
    /// The trivial group `{Id}`.
    C1,
    /// A single reflection.
    Cs,
    /// Cyclic rotation group of order `m`.
    Cm(usize),
    /// Rotation of order `m` plus `m` mirrors containing the axis.
    Cmv(usize),
}

impl GroupKind {
    /// Rotation order `m` (1 for `C1` and `Cs`).
    pub fn rotation_order(self) -> usize {
        match self {
            GroupKind::C1 | GroupKind::Cs => 1,
            GroupKind::Cm(m) | GroupKind::Cmv(m) => m,
        }
    }

    pub fn has_reflection(self) -> bool {
        matches!(self, GroupKind::Cs | GroupKind::Cmv(_))
    }

    pub fn name(self) -> String {
        match self {
            GroupKind::C1 => "C1".into(),
            GroupKind::Cs => "Cs".into(),
            GroupKind::Cm(m) => format!("C{m}"),
            GroupKind::Cmv(m) => format!("C{m}v"),
        }
    }
}

/// Geometric placement of a group: rotation axis (3D only) and the normal of
/// the generating mirror.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroupGeometry {
    pub axis: Option<Vec<f64>>,
    pub mirror_normal: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub label: String,
    pub reflection: bool,
    pub power: usize,
    pub matrix: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryGroup {
    dim: usize,
    kind: GroupKind,
    geometry: GroupGeometry,
    elements: Vec<GroupElement>,
}

/// The two generator names accepted by type maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    /// The rotation `C_m` by `2π/m`.
    Rotation,
    /// The mirror `s`.
    Reflection,
}

impl Generator {
    pub fn token(self) -> &'static str {
        match self {
            Generator::Rotation => "C",
            Generator::Reflection => "s",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "C" => Some(Generator::Rotation),
            "s" => Some(Generator::Reflection),
            _ => None,
        }
    }
}

fn check_unit(v: &[f64], dim: usize, what: &str) -> Result<()> {
    if v.len() != dim {
        return Err(Error::Geometry(format!(
            "{what} has {} components, expected {dim}",
            v.len()
        )));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::Geometry(format!(
            "{what} is not a unit vector (norm {norm})"
        )));
    }
    Ok(())
}

fn rotation_matrix(dim: usize, axis: Option<&[f64]>, angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    if dim == 2 {
        return DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    }
    let a = axis.expect("3D rotation needs an axis");
    // Rodrigues: R = c I + s [a]_x + (1 - c) a aᵀ
    let mut r = DMatrix::identity(3, 3) * c;
    let cross = DMatrix::from_row_slice(
        3,
        3,
        &[0.0, -a[2], a[1], a[2], 0.0, -a[0], -a[1], a[0], 0.0],
    );
    r += cross * s;
    for i in 0..3 {
        for j in 0..3 {
            r[(i, j)] += (1.0 - c) * a[i] * a[j];
        }
    }
    r
}

fn mirror_matrix(normal: &[f64]) -> DMatrix<f64> {
    let d = normal.len();
    let mut m = DMatrix::identity(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] -= 2.0 * normal[i] * normal[j];
        }
    }
    m
}

impl SymmetryGroup {
    /// Build a group from its kind and geometric placement.
    pub fn new(kind: GroupKind, dim: usize, geometry: GroupGeometry) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Geometry(format!(
                "dimension {dim} is not supported (2 or 3)"
            )));
        }
        let m = kind.rotation_order();
        if matches!(kind, GroupKind::Cm(_) | GroupKind::Cmv(_)) && m < 2 {
            return Err(Error::Geometry(format!(
                "rotation order must be at least 2, got {m}"
            )));
        }
        let needs_axis = dim == 3 && m > 1;
        if needs_axis {
            let axis = geometry
                .axis
                .as_deref()
                .ok_or_else(|| Error::Geometry("rotation axis required in 3D".into()))?;
            check_unit(axis, 3, "rotation axis")?;
        }
        if kind.has_reflection() {
            let n = geometry
                .mirror_normal
                .as_deref()
                .ok_or_else(|| Error::Geometry("mirror normal required".into()))?;
            check_unit(n, dim, "mirror normal")?;
            if needs_axis {
                let axis = geometry.axis.as_deref().unwrap();
                let dot: f64 = axis.iter().zip(n).map(|(a, b)| a * b).sum();
                if dot.abs() > UNIT_TOL {
                    return Err(Error::Geometry(
                        "mirror plane must contain the rotation axis (normal ⟂ axis)".into(),
                    ));
                }
            }
        }

        let mut elements = Vec::new();
        let rot_label = |k: usize| match k {
            0 => String::new(),
            1 => format!("C{m}"),
            _ => format!("C{m}^{k}"),
        };
        for k in 0..m {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            let matrix = if k == 0 {
                DMatrix::identity(dim, dim)
            } else {
                rotation_matrix(dim, geometry.axis.as_deref(), angle)
            };
            elements.push(GroupElement {
                label: if k == 0 { "Id".into() } else { rot_label(k) },
                reflection: false,
                power: k,
                matrix,
            });
        }
        if kind.has_reflection() {
            let s = mirror_matrix(geometry.mirror_normal.as_deref().unwrap());
            for k in 0..m {
                let matrix = &s * &elements[k].matrix;
                let label = if k == 0 {
                    "s".to_string()
                } else {
                    format!("s·{}", rot_label(k))
                };
                elements.push(GroupElement {
                    label,
                    reflection: true,
                    power: k,
                    matrix,
                });
            }
        }
        Ok(Self {
            dim,
            kind,
            geometry,
            elements,
        })
    }

    pub fn trivial(dim: usize) -> Self {
        Self::new(GroupKind::C1, dim, GroupGeometry::default()).expect("trivial group")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn geometry(&self) -> &GroupGeometry {
        &self.geometry
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Index of `s^a C^k`.
    pub fn index_of(&self, reflection: bool, power: usize) -> usize {
        let m = self.kind.rotation_order();
        (if reflection { m } else { 0 }) + power % m
    }

    /// Index of the product `x · y` (apply `y` first).
    pub fn product(&self, x: usize, y: usize) -> usize {
        let m = self.kind.rotation_order();
        let (ex, ey) = (&self.elements[x], &self.elements[y]);
        // (s^a C^k)(s^b C^l) = s^{a+b} C^{(-1)^b k + l}
        let k = if ey.reflection {
            (m - ex.power % m) % m
        } else {
            ex.power
        };
        self.index_of(ex.reflection ^ ey.reflection, k + ey.power)
    }

    pub fn inverse(&self, x: usize) -> usize {
        let e = &self.elements[x];
        if e.reflection {
            x
        } else {
            self.index_of(
                false,
                (self.kind.rotation_order() - e.power) % self.kind.rotation_order(),
            )
        }
    }

    /// Generators present in this group.
    pub fn generators(&self) -> Vec<Generator> {
        let mut g = Vec::new();
        if self.kind.rotation_order() > 1 {
            g.push(Generator::Rotation);
        }
        if self.kind.has_reflection() {
            g.push(Generator::Reflection);
        }
        g
    }
}

/// A vertex permutation, `perm[v]` = image of `v`.
pub type Permutation = Vec<usize>;

fn compose(a: &[usize], b: &[usize]) -> Permutation {
    b.iter().map(|&v| a[v]).collect()
}

fn identity_perm(n: usize) -> Permutation {
    (0..n).collect()
}

/// Parse cycle notation with 1-based vertex labels, e.g. `(1 2)(3)`.
pub fn parse_cycles(text: &str, n: usize) -> std::result::Result<Permutation, String> {
    let mut perm = identity_perm(n);
    let mut seen = vec![false; n];
    let mut rest = text.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| format!("expected '(' in `{text}`"))?;
        let close = open
            .find(')')
            .ok_or_else(|| format!("unclosed cycle in `{text}`"))?;
        let body = &open[..close];
        let mut cycle = Vec::new();
        for tok in body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
        {
            let v: usize = tok
                .trim_start_matches('v')
                .parse()
                .map_err(|_| format!("bad vertex `{tok}` in `{text}`"))?;
            if v == 0 || v > n {
                return Err(format!("vertex {v} out of range 1..={n}"));
            }
            if seen[v - 1] {
                return Err(format!("vertex {v} appears twice"));
            }
            seen[v - 1] = true;
            cycle.push(v - 1);
        }
        for (i, &v) in cycle.iter().enumerate() {
            perm[v] = cycle[(i + 1) % cycle.len()];
        }
        rest = open[close + 1..].trim_start();
    }
    Ok(perm)
}

/// Canonical cycle notation: 1-based, every vertex listed, cycles ordered by
/// their smallest element.
pub fn format_cycles(perm: &[usize]) -> String {
    let mut seen = vec![false; perm.len()];
    let mut out = String::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            cycle.push((v + 1).to_string());
            v = perm[v];
        }
        out.push('(');
        out.push_str(&cycle.join(" "));
        out.push(')');
    }
    out
}

/// The type `Φ`: one vertex permutation per group element.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeMap {
    group: SymmetryGroup,
    perms: Vec<Permutation>,
}

impl TypeMap {
    /// Complete `Φ` from generator images and verify it is a homomorphism into
    /// `Aut(graph)`.
    pub fn from_generators(
        group: SymmetryGroup,
        graph: &Graph,
        generators: &[(Generator, Permutation)],
    ) -> Result<Self> {
        let n = graph.vertex_count();
        let m = group.kind().rotation_order();
        let mut rot = identity_perm(n);
        let mut refl = identity_perm(n);
        for g in group.generators() {
            let perm = generators
                .iter()
                .find(|(name, _)| *name == g)
                .map(|(_, p)| p.clone())
                .ok_or_else(|| Error::Permutation {
                    element: g.token().into(),
                    reason: "generator image missing".into(),
                })?;
            check_permutation(&perm, n, g.token())?;
            match g {
                Generator::Rotation => rot = perm,
                Generator::Reflection => refl = perm,
            }
        }
        for (g, _) in generators {
            if !group.generators().contains(g) {
                return Err(Error::Permutation {
                    element: g.token().into(),
                    reason: format!("not a generator of {}", group.kind().name()),
                });
            }
        }
        let mut powers = vec![identity_perm(n)];
        for k in 1..m {
            powers.push(compose(&rot, &powers[k - 1]));
        }
        let mut perms = powers.clone();
        if group.kind().has_reflection() {
            for p in &powers {
                perms.push(compose(&refl, p));
            }
        }
        let phi = Self { group, perms };
        phi.check(graph)?;
        Ok(phi)
    }

    /// Build directly from one permutation per element (in element order).
    pub fn from_element_perms(
        group: SymmetryGroup,
        graph: &Graph,
        perms: Vec<Permutation>,
    ) -> Result<Self> {
        if perms.len() != group.order() {
            return Err(Error::Invalid(format!(
                "{} permutations supplied for a group of order {}",
                perms.len(),
                group.order()
            )));
        }
        for (p, e) in perms.iter().zip(group.elements()) {
            check_permutation(p, graph.vertex_count(), &e.label)?;
        }
        let phi = Self { group, perms };
        phi.check(graph)?;
        Ok(phi)
    }

    pub fn trivial(dim: usize, graph: &Graph) -> Self {
        Self {
            group: SymmetryGroup::trivial(dim),
            perms: vec![identity_perm(graph.vertex_count())],
        }
    }

    fn check(&self, graph: &Graph) -> Result<()> {
        let g = &self.group;
        if self.perms[0] != identity_perm(graph.vertex_count()) {
            return Err(Error::NotHomomorphism {
                x: "Id".into(),
                y: "Id".into(),
            });
        }
        for (x, perm) in self.perms.iter().enumerate() {
            for &(a, b) in graph.edges() {
                let (ia, ib) = (perm[a], perm[b]);
                if !graph.has_edge(ia, ib) {
                    return Err(Error::NotAutomorphism {
                        element: g.elements()[x].label.clone(),
                        a: a + 1,
                        b: b + 1,
                        ia: ia + 1,
                        ib: ib + 1,
                    });
                }
            }
        }
        for x in 0..g.order() {
            for y in 0..g.order() {
                if self.perms[g.product(x, y)] != compose(&self.perms[x], &self.perms[y]) {
                    return Err(Error::NotHomomorphism {
                        x: g.elements()[x].label.clone(),
                        y: g.elements()[y].label.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &SymmetryGroup {
        &self.group
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn perm(&self, x: usize) -> &Permutation {
        &self.perms[x]
    }

    pub fn vertex_count(&self) -> usize {
        self.perms[0].len()
    }

    /// Generator images (for serialization).
    pub fn generator_images(&self) -> Vec<(Generator, Permutation)> {
        self.group
            .generators()
            .into_iter()
            .map(|g| {
                let idx = match g {
                    Generator::Rotation => self.group.index_of(false, 1),
                    Generator::Reflection => self.group.index_of(true, 0),
                };
                (g, self.perms[idx].clone())
            })
            .collect()
    }

    /// The induced permutation of edge indices.
    pub fn edge_permutation(&self, x: usize, graph: &Graph) -> Permutation {
        let perm = &self.perms[x];
        graph
            .edges()
            .iter()
            .map(|&(a, b)| {
                graph
                    .edge_index(perm[a], perm[b])
                    .expect("type map elements are automorphisms")
            })
            .collect()
    }

    /// Vertex orbits, each sorted, ordered by smallest member.
    pub fn vertex_orbits(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut orbits = Vec::new();
        for v in 0..n {
            if seen[v] {
                continue;
            }
            let mut orbit: Vec<usize> = self.perms.iter().map(|p| p[v]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &w in &orbit {
                seen[w] = true;
            }
            orbits.push(orbit);
        }
        orbits
    }
}

fn check_permutation(perm: &[usize], n: usize, element: &str) -> Result<()> {
    if perm.len() != n {
        return Err(Error::Permutation {
            element: element.into(),
            reason: format!("length {} does not match {n} vertices", perm.len()),
        });
    }
    let mut seen = vec![false; n];
    for &v in perm {
        if v >= n || seen[v] {
            return Err(Error::Permutation {
                element: element.into(),
                reason: "not a bijection".into(),
            });
        }
        seen[v] = true;
    }
    Ok(())
}

/// Per-element/vertex deviation from `M_x p_v = p_{Φ(x)(v)}`.
#[derive(Clone, Debug, Serialize)]
pub struct TypeMapValidation {
    pub valid: bool,
    pub max_residual: f64,
    /// `(element label, 1-based vertex)` of the largest residual.
    pub worst: Option<(String, usize)>,
    pub tolerance: f64,
    /// `residuals[x][v]`.
    pub residuals: Vec<Vec<f64>>,
}

/// Relative tolerance for the symmetry equation.
pub const SYMMETRY_RTOL: f64 = 1e-9;

/// Check the symmetry equation for every element and vertex. The permutation
/// checks (automorphism, homomorphism) already hold for any constructed
/// [`TypeMap`] on this graph.
pub fn validate_type_map(
    fw: &Framework,
    phi: &TypeMap,
    tol: Option<f64>,
) -> Result<TypeMapValidation> {
    let group = phi.group();
    if group.dim() != fw.dim() {
        return Err(Error::DimensionMismatch(format!(
            "group acts in dimension {} but the framework lives in dimension {}",
            group.dim(),
            fw.dim()
        )));
    }
    if phi.vertex_count() != fw.graph().vertex_count() {
        return Err(Error::DimensionMismatch(format!(
            "type map permutes {} vertices but the graph has {}",
            phi.vertex_count(),
            fw.graph().vertex_count()
        )));
    }
    phi.check(fw.graph())?;
    let tolerance = tol.unwrap_or(SYMMETRY_RTOL * fw.config().scale());
    let cfg = fw.config();
    let d = fw.dim();
    let mut residuals = Vec::with_capacity(group.order());
    let mut max_residual = 0.0;
    let mut worst = None;
    for (x, e) in group.elements().iter().enumerate() {
        let mut row = Vec::with_capacity(cfg.point_count());
        for v in 0..cfg.point_count() {
            let p = nalgebra::DVector::from_column_slice(cfg.point(v));
            let image = &e.matrix * p;
            let target = cfg.point(phi.perm(x)[v]);
            let r = (0..d)
                .map(|k| (image[k] - target[k]).powi(2))
                .sum::<f64>()
                .sqrt();
            if r > max_residual {
                max_residual = r;
                worst = Some((e.label.clone(), v + 1));
            }
            row.push(r);
        }
        residuals.push(row);
    }
    Ok(TypeMapValidation {
        valid: max_residual <= tolerance,
        max_residual,
        worst,
        tolerance,
        residuals,
    })
}

/// A matrix representation of the group, one matrix per element.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    pub degree: usize,
    pub matrices: Vec<DMatrix<f64>>,
}

impl Representation {
    /// Largest `‖H(x)H(y) - H(xy)‖` over all pairs.
    pub fn homomorphism_residual(&self, group: &SymmetryGroup) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..group.order() {
            for y in 0..group.order() {
                let lhs = &self.matrices[x] * &self.matrices[y];
                worst = worst.max((lhs - &self.matrices[group.product(x, y)]).norm());
            }
        }
        worst
    }

    /// Character `tr H(x)` per element.
    pub fn character(&self) -> Vec<f64> {
        self.matrices.iter().map(|m| m.trace()).collect()
    }
}

/// `H_e(x)`: block `(Φ(x)(v), v)` holds `M_x`.
pub fn external_representation(phi: &TypeMap) -> Representation {
    let group = phi.group();
    let d = group.dim();
    let n = phi.vertex_count();
    let matrices = group
        .elements()
        .iter()
        .enumerate()
        .map(|(x, e)| {
            let mut h = DMatrix::zeros(d * n, d * n);
            for v in 0..n {
                let w = phi.perm(x)[v];
                h.view_mut((d * w, d * v), (d, d)).copy_from(&e.matrix);
            }
            h
        })
        .collect();
    Representation {
        degree: d * n,
        matrices,
    }
}

/// `H_i(x)`: the permutation matrix of the induced edge permutation, entry
/// `(Φ(x)(e), e)` equal to 1.
pub fn internal_representation(phi: &TypeMap, graph: &Graph) -> Representation {
    let m = graph.edge_count();
    let matrices = (0..phi.group().order())
        .map(|x| {
            let mut h = DMatrix::zeros(m, m);
            for (e, f) in phi.edge_permutation(x, graph).into_iter().enumerate() {
                h[(f, e)] = 1.0;
            }
            h
        })
        .collect();
    Representation {
        degree: m,
        matrices,
    }
}

/// `M^(x) - P_Φ(x)` for one element: kernel vectors `q` satisfy
/// `M_x q_v = q_{Φ(x)(v)}` for every vertex.
pub(crate) fn symmetry_constraint(phi: &TypeMap, x: usize) -> DMatrix<f64> {
    let group = phi.group();
    let d = group.dim();
    let n = phi.vertex_count();
    let mx = &group.elements()[x].matrix;
    let mut a = DMatrix::zeros(d * n, d * n);
    for v in 0..n {
        a.view_mut((d * v, d * v), (d, d)).copy_from(mx);
        let w = phi.perm(x)[v];
        for k in 0..d {
            a[(d * v + k, d * w + k)] -= 1.0;
        }
    }
    a
}
