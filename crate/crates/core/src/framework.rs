//! Graphs, configurations, the edge function and the rigidity matrix.
//!
//! Vertices are 0-based in the API (`0..n`); the file format uses 1-based
//! indices. A configuration is stored flattened vertex-major: point `i`
//! occupies slots `d·i .. d·i + d`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rank::{self, RankReport};

/// Relative tolerance used when classifying rigidity without an explicit
/// threshold.
pub const DEFAULT_RANK_RTOL: f64 = 1e-10;

/// A simple graph with a fixed edge order.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
}

impl Graph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut normalized = Vec::with_capacity(edges.len());
        let mut index = HashMap::with_capacity(edges.len());
        for (k, &(a, b)) in edges.iter().enumerate() {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        index: k,
                        vertex: v,
                        count: vertex_count,
                    });
                }
            }
            if a == b {
                return Err(Error::Loop {
                    index: k,
                    vertex: a,
                });
            }
            let key = (a.min(b), a.max(b));
            if index.insert(key, k).is_some() {
                return Err(Error::DuplicateEdge { index: k, a, b });
            }
            normalized.push(key);
        }
        Ok(Self {
            vertex_count,
            edges: normalized,
            index,
        })
    }

    /// Complete graph on `n` vertices, edges in lexicographic order.
    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        Self::new(n.max(1), edges).expect("complete graph is simple")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(i, j)` with `i < j`, in construction order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_index(a, b).is_some()
    }

    /// The complete graph on the same vertex set.
    pub fn completion(&self) -> Graph {
        Graph::complete(self.vertex_count)
    }
}

/// Point positions in `d`-space, flattened vertex-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    dim: usize,
    coords: DVector<f64>,
}

impl Configuration {
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "point {} has {} coordinates, expected {dim}",
                    i,
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, DVector::from_vec(coords))
    }

    pub fn from_flat(dim: usize, coords: DVector<f64>) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(k) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("coordinate {k}")));
        }
        Ok(Self { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point_count(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords.as_slice()[self.dim * i..self.dim * (i + 1)]
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.point_count())
            .map(|i| self.point(i).to_vec())
            .collect()
    }

    pub fn flat(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        squared_distance(self.point(i), self.point(j)).sqrt()
    }

    /// Root-mean-square distance of the points from their centroid, or 1 for
    /// a single point / fully coincident configuration.
    pub fn scale(&self) -> f64 {
        let n = self.point_count();
        if n == 0 {
            return 1.0;
        }
        let mut centroid = vec![0.0; self.dim];
        for i in 0..n {
            for (c, x) in centroid.iter_mut().zip(self.point(i)) {
                *c += x / n as f64;
            }
        }
        let ms = (0..n)
            .map(|i| squared_distance(self.point(i), &centroid))
            .sum::<f64>()
            / n as f64;
        if ms > 0.0 {
            ms.sqrt()
        } else {
            1.0
        }
    }

    /// Dimension of the affine hull of the points.
    pub fn affine_span_dim(&self) -> usize {
        let n = self.point_count();
        if n <= 1 {
            return 0;
        }
        let mut diffs = DMatrix::zeros(n - 1, self.dim);
        for i in 1..n {
            for k in 0..self.dim {
                diffs[(i - 1, k)] = self.point(i)[k] - self.point(0)[k];
            }
        }
        let tol = 1e-10 * self.scale().max(f64::MIN_POSITIVE) * (n as f64).sqrt();
        rank::rank(&diffs, tol)
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A graph together with a placement of its vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Framework {
    graph: Graph,
    config: Configuration,
}

impl Framework {
    pub fn new(graph: Graph, config: Configuration) -> Result<Self> {
        if graph.vertex_count() != config.point_count() {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} vertices but the configuration has {} points",
                graph.vertex_count(),
                config.point_count()
            )));
        }
        Ok(Self { graph, config })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    /// Edges whose endpoints coincide; they give zero rows in the rigidity
    /// matrix.
    pub fn zero_length_edges(&self) -> Vec<usize> {
        self.graph
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, &(i, j))| self.config.point(i) == self.config.point(j))
            .map(|(k, _)| k)
            .collect()
    }

    pub fn with_config(&self, config: Configuration) -> Result<Self> {
        Self::new(self.graph.clone(), config)
    }

    pub fn edge_function(&self) -> DVector<f64> {
        edge_values(&self.graph, self.config.dim(), self.config.flat())
    }

    pub fn rigidity_matrix(&self) -> DMatrix<f64> {
        rigidity_rows(&self.graph, self.config.dim(), self.config.flat())
    }
}

fn check_sizes(graph: &Graph, config: &Configuration) -> Result<()> {
    if graph.vertex_count() != config.point_count() {
        return Err(Error::DimensionMismatch(format!(
            "graph has {} vertices but the configuration has {} points",
            graph.vertex_count(),
            config.point_count()
        )));
    }
    Ok(())
}

/// Squared bar lengths, one entry per edge in the graph's order.
pub fn edge_function(graph: &Graph, config: &Configuration) -> Result<DVector<f64>> {
    check_sizes(graph, config)?;
    Ok(edge_values(graph, config.dim(), config.flat()))
}

/// The `m × dn` rigidity matrix: the row of edge `{i, j}` holds `p_i - p_j`
/// in block `i` and `p_j - p_i` in block `j`.
pub fn rigidity_matrix(graph: &Graph, config: &Configuration) -> Result<DMatrix<f64>> {
    check_sizes(graph, config)?;
    Ok(rigidity_rows(graph, config.dim(), config.flat()))
}

pub(crate) fn edge_values(graph: &Graph, dim: usize, p: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        graph.edge_count(),
        graph.edges().iter().map(|&(i, j)| {
            (0..dim)
                .map(|k| {
                    let diff = p[dim * i + k] - p[dim * j + k];
                    diff * diff
                })
                .sum::<f64>()
        }),
    )
}

pub(crate) fn rigidity_rows(graph: &Graph, dim: usize, p: &DVector<f64>) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(graph.edge_count(), dim * graph.vertex_count());
    for (row, &(i, j)) in graph.edges().iter().enumerate() {
        for k in 0..dim {
            let diff = p[dim * i + k] - p[dim * j + k];
            r[(row, dim * i + k)] = diff;
            r[(row, dim * j + k)] = -diff;
        }
    }
    r
}

/// Infinitesimal rigid motions `u_i = S p_i + t`.
#[derive(Clone, Debug)]
pub struct RigidMotions {
    /// `dn × (d + d(d-1)/2)`; translations first, then one rotation per
    /// coordinate plane `(a, b)`, `a < b`.
    pub generators: DMatrix<f64>,
    /// Set when the points span an affine subspace of dimension below `d - 1`;
    /// the generators may then be linearly dependent.
    pub possibly_dependent: bool,
}

pub fn rigid_motion_basis(config: &Configuration) -> RigidMotions {
    let d = config.dim();
    let n = config.point_count();
    let count = d * (d + 1) / 2;
    let mut g = DMatrix::zeros(d * n, count);
    for k in 0..d {
        for i in 0..n {
            g[(d * i + k, k)] = 1.0;
        }
    }
    let mut col = d;
    for a in 0..d {
        for b in a + 1..d {
            for i in 0..n {
                let p = config.point(i);
                g[(d * i + a, col)] = -p[b];
                g[(d * i + b, col)] = p[a];
            }
            col += 1;
        }
    }
    RigidMotions {
        generators: g,
        possibly_dependent: config.affine_span_dim() + 1 < d,
    }
}

/// Result of the classical infinitesimal rigidity test.
#[derive(Clone, Debug, Serialize)]
pub struct RigidityVerdict {
    pub infinitesimally_rigid: bool,
    /// `d·n - d(d+1)/2`, the rank an infinitesimally rigid framework attains
    /// when its points span at least a hyperplane.
    pub expected_rank: usize,
    pub report: RankReport,
}

/// Decide infinitesimal rigidity with the default relative tolerance.
pub fn infinitesimal_rigidity_test(fw: &Framework) -> RigidityVerdict {
    let r = fw.rigidity_matrix();
    let tol = DEFAULT_RANK_RTOL * rank::spectral_norm(&r).max(1.0);
    infinitesimal_rigidity_test_with(fw, tol)
}

pub fn infinitesimal_rigidity_test_with(fw: &Framework, tol: f64) -> RigidityVerdict {
    let d = fw.dim();
    let n = fw.graph().vertex_count();
    let r = fw.rigidity_matrix();
    let report = rank::rank_with_tolerance(&r, Some(tol)).expect("configuration is finite");
    let expected_rank = (d * n).saturating_sub(d * (d + 1) / 2);
    let complete = fw.graph().edge_count() == n * (n - 1) / 2;
    let affinely_independent = fw.config().affine_span_dim() == n - 1;
    let infinitesimally_rigid = report.rank == expected_rank || (complete && affinely_independent);
    RigidityVerdict {
        infinitesimally_rigid,
        expected_rank,
        report,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dim: usize, pts: &[&[f64]]) -> Configuration {
        Configuration::new(dim, &pts.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn k3() -> Graph {
        Graph::new(3, vec![(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    #[test]
    fn graph_rejects_loops_duplicates_and_range() {
        assert!(matches!(
            Graph::new(2, vec![(1, 1)]),
            Err(Error::Loop { .. })
        ));
        assert!(matches!(
            Graph::new(3, vec![(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(matches!(
            Graph::new(2, vec![(0, 2)]),
            Err(Error::VertexOutOfRange { .. })
        ));
        assert!(matches!(Graph::new(0, vec![]), Err(Error::EmptyGraph)));
    }

    #[test]
    fn edge_function_unit_segment() {
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        let p = config(2, &[&[0.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(edge_function(&g, &p).unwrap().as_slice(), &[1.0]);
    }

    #[test]
    fn edge_function_equilateral() {
        let h = 3f64.sqrt() / 2.0;
        let p = config(2, &[&[0.0, 0.0], &[1.0, 0.0], &[0.5, h]]);
        let f = edge_function(&k3(), &p).unwrap();
        for v in f.iter() {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_function_follows_edge_order() {
        let p = config(2, &[&[0.0, 0.0], &[2.0, 0.0], &[1.0, 2.0]]);
        assert_eq!(
            edge_function(&k3(), &p).unwrap().as_slice(),
            &[4.0, 5.0, 5.0]
        );
    }

    #[test]
    fn edge_function_dimension_mismatch() {
        let p = config(2, &[&[0.0, 0.0], &[2.0, 0.0]]);
        assert!(matches!(
            edge_function(&k3(), &p),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn single_edge_row() {
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        let p = config(2, &[&[0.0, 0.0], &[1.0, 0.0]]);
        let r = rigidity_matrix(&g, &p).unwrap();
        assert_eq!(
            r.row(0).iter().copied().collect::<Vec<_>>(),
            vec![-1.0, 0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn triangle_first_row() {
        let p = config(2, &[&[-1.0, 0.0], &[1.0, 0.0], &[0.0, 2.0]]);
        let r = rigidity_matrix(&k3(), &p).unwrap();
        assert_eq!(
            r.row(0).iter().copied().collect::<Vec<_>>(),
            vec![-2.0, 0.0, 2.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn coincident_edge_gives_zero_row() {
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        let fw = Framework::new(g, config(2, &[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert_eq!(fw.zero_length_edges(), vec![0]);
        assert!(fw.rigidity_matrix().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rigid_motions_of_segment_are_in_kernel() {
        let g = Graph::new(2, vec![(0, 1)]).unwrap();
        let p = config(2, &[&[0.3, -1.0], &[1.0, 2.0]]);
        let rm = rigid_motion_basis(&p);
        assert_eq!(rm.generators.ncols(), 3);
        let r = rigidity_matrix(&g, &p).unwrap();
        assert!((r * &rm.generators).norm() < 1e-14);
        assert!(!rm.possibly_dependent);
    }

    #[test]
    fn rigid_motions_octahedron_rank_six() {
        let p = config(
            3,
            &[
                &[1.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0],
                &[-1.0, 0.0, 0.0],
                &[0.0, -1.0, 0.0],
                &[0.0, 0.0, 1.0],
                &[0.0, 0.0, -1.0],
            ],
        );
        let rm = rigid_motion_basis(&p);
        assert_eq!(rm.generators.shape(), (18, 6));
        assert_eq!(rank::rank(&rm.generators, 1e-12), 6);
    }

    #[test]
    fn rigid_motions_coincident_points_flagged() {
        let p = config(2, &[&[0.5, 0.5], &[0.5, 0.5], &[0.5, 0.5]]);
        let rm = rigid_motion_basis(&p);
        assert!(rm.possibly_dependent);
        assert_eq!(rank::rank(&rm.generators, 1e-12), 2);
    }

    #[test]
    fn generic_triangle_rank() {
        let fw =
            Framework::new(k3(), config(2, &[&[0.1, 0.2], &[1.3, -0.2], &[0.4, 1.7]])).unwrap();
        let v = infinitesimal_rigidity_test(&fw);
        assert_eq!(v.report.rank, 3);
        assert_eq!(v.report.nullity, 3);
        assert!(v.infinitesimally_rigid);
    }

    #[test]
    fn square_is_flexible() {
        let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let p = config(2, &[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let v = infinitesimal_rigidity_test(&Framework::new(g, p).unwrap());
        assert_eq!(v.report.rank, 4);
        assert_eq!(v.expected_rank, 5);
        assert!(!v.infinitesimally_rigid);
    }

    #[test]
    fn finite_difference_jacobian() {
        let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]).unwrap();
        let p = config(
            3,
            &[
                &[0.1, 0.2, 0.3],
                &[1.0, -0.5, 0.2],
                &[0.3, 0.9, -0.7],
                &[-0.4, 0.1, 0.8],
            ],
        );
        let u = DVector::from_fn(12, |i, _| ((i * 7 + 3) % 5) as f64 - 2.0);
        let r = rigidity_matrix(&g, &p).unwrap();
        let h = 1e-6;
        let plus = Configuration::from_flat(3, p.flat() + &u * h).unwrap();
        let minus = Configuration::from_flat(3, p.flat() - &u * h).unwrap();
        let fd =
            (edge_function(&g, &plus).unwrap() - edge_function(&g, &minus).unwrap()) / (2.0 * h);
        assert!((r * &u * 2.0 - fd).norm() < 1e-6);
    }
}
