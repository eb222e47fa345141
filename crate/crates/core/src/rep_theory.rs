//! Real irreducible characters, isotypic projectors and symmetry-adapted
//! bases.
//!
//! Complex-conjugate pairs of one-dimensional characters of `C_m` (`m ≥ 3`)
//! are merged into a single real character of degree 2, so every projector is
//! a real orthogonal projector.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::framework::Graph;
use crate::rank;
use crate::symmetry::{symmetry_constraint, GroupKind, Representation, SymmetryGroup, TypeMap};

/// Real irreducible characters of a group; index 0 is always the trivial one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrrepTable {
    pub labels: Vec<String>,
    /// `characters[t][x]`.
    pub characters: Vec<Vec<f64>>,
    pub degrees: Vec<usize>,
    /// 1 for absolutely irreducible characters, 2 for merged conjugate pairs.
    pub real_type: Vec<usize>,
}

impl IrrepTable {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `Σ_x χ_s(x) χ_t(x)`.
    pub fn inner(&self, s: usize, t: usize) -> f64 {
        self.characters[s]
            .iter()
            .zip(&self.characters[t])
            .map(|(a, b)| a * b)
            .sum()
    }
}

pub fn irreducible_characters(group: &SymmetryGroup) -> IrrepTable {
    let mut table = IrrepTable {
        labels: Vec::new(),
        characters: Vec::new(),
        degrees: Vec::new(),
        real_type: Vec::new(),
    };
    let mut push = |label: String, chi: Vec<f64>, degree: usize, real_type: usize| {
        table.labels.push(label);
        table.characters.push(chi);
        table.degrees.push(degree);
        table.real_type.push(real_type);
    };
    let elems = group.elements();
    let cos_char = |k: usize, m: usize| -> Vec<f64> {
        elems
            .iter()
            .map(|e| {
                if e.reflection {
                    0.0
                } else {
                    2.0 * (2.0 * std::f64::consts::PI * (k * e.power) as f64 / m as f64).cos()
                }
            })
            .collect()
    };
    match group.kind() {
        GroupKind::C1 => push("A".into(), vec![1.0], 1, 1),
        GroupKind::Cs => {
            push("A'".into(), vec![1.0, 1.0], 1, 1);
            push("A''".into(), vec![1.0, -1.0], 1, 1);
        }
        GroupKind::Cm(m) => {
            push("A".into(), vec![1.0; m], 1, 1);
            if m % 2 == 0 {
                let chi = elems.iter().map(|e| sign(e.power)).collect();
                push("B".into(), chi, 1, 1);
            }
            for k in 1..m.div_ceil(2) {
                let label = if m <= 4 {
                    "E".to_string()
                } else {
                    format!("E{k}")
                };
                push(label, cos_char(k, m), 2, 2);
            }
        }
        GroupKind::Cmv(m) => {
            push("A1".into(), vec![1.0; 2 * m], 1, 1);
            let a2 = elems
                .iter()
                .map(|e| if e.reflection { -1.0 } else { 1.0 })
                .collect();
            push("A2".into(), a2, 1, 1);
            if m % 2 == 0 {
                let b1 = elems.iter().map(|e| sign(e.power)).collect();
                let b2 = elems
                    .iter()
                    .map(|e| {
                        if e.reflection {
                            -sign(e.power)
                        } else {
                            sign(e.power)
                        }
                    })
                    .collect();
                push("B1".into(), b1, 1, 1);
                push("B2".into(), b2, 1, 1);
            }
            for k in 1..m.div_ceil(2) {
                let label = if m <= 4 {
                    "E".to_string()
                } else {
                    format!("E{k}")
                };
                push(label, cos_char(k, m), 2, 1);
            }
        }
    }
    table
}

fn sign(power: usize) -> f64 {
    if power.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `P_t = d_t / (|S| · κ_t) · Σ_x χ_t(x) H(x)`, with `κ_t` the real-type
/// factor.
pub fn isotypic_projector(
    rep: &Representation,
    table: &IrrepTable,
    t: usize,
) -> Result<DMatrix<f64>> {
    if t >= table.len() {
        return Err(Error::IrrepOutOfRange {
            index: t,
            count: table.len(),
        });
    }
    let order = rep.matrices.len() as f64;
    let coeff = table.degrees[t] as f64 / (order * table.real_type[t] as f64);
    let mut p = DMatrix::zeros(rep.degree, rep.degree);
    for (chi, h) in table.characters[t].iter().zip(&rep.matrices) {
        if *chi != 0.0 {
            p += h * (coeff * chi);
        }
    }
    // Symmetrize away rounding; P_t is an orthogonal projector for orthogonal H.
    Ok((&p + p.transpose()) * 0.5)
}

/// Orthonormal bases of the isotypic components of a representation.
#[derive(Clone, Debug)]
pub struct IsotypicBasis {
    /// `components[t]` is `ambient × dim V^(I_t)`.
    pub components: Vec<DMatrix<f64>>,
    /// Number of copies of `I_t` (dimension / degree).
    pub multiplicities: Vec<usize>,
}

impl IsotypicBasis {
    pub fn dims(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.ncols()).collect()
    }

    pub fn ambient(&self) -> usize {
        self.components.first().map(|c| c.nrows()).unwrap_or(0)
    }

    /// All components side by side: the orthogonal change of basis `T`.
    pub fn transform(&self) -> DMatrix<f64> {
        let refs: Vec<&DMatrix<f64>> = self.components.iter().collect();
        rank::hstack(&refs, self.ambient())
    }
}

/// Eigenvalues of an orthogonal projector are 0 or 1, so the image is read
/// off with a threshold of one half.
const PROJECTOR_CUT: f64 = 0.5;

pub fn symmetry_adapted_basis(rep: &Representation, table: &IrrepTable) -> IsotypicBasis {
    let mut components = Vec::with_capacity(table.len());
    let mut multiplicities = Vec::with_capacity(table.len());
    for t in 0..table.len() {
        let p = isotypic_projector(rep, table, t).expect("index in range");
        let basis = rank::column_space(&p, PROJECTOR_CUT);
        multiplicities.push(basis.ncols() / table.degrees[t]);
        components.push(basis);
    }
    IsotypicBasis {
        components,
        multiplicities,
    }
}

/// Orthonormal basis of `U`, the configurations satisfying the symmetry
/// equation for every element, computed as the common kernel of
/// `M^(x) - P_Φ(x)`.
pub fn fixed_subspace_basis(phi: &TypeMap) -> DMatrix<f64> {
    let group = phi.group();
    let dn = group.dim() * phi.vertex_count();
    let blocks: Vec<DMatrix<f64>> = (1..group.order())
        .map(|x| symmetry_constraint(phi, x))
        .collect();
    if blocks.is_empty() {
        return DMatrix::identity(dn, dn);
    }
    let refs: Vec<&DMatrix<f64>> = blocks.iter().collect();
    let stacked = rank::vstack(&refs, dn);
    // Entries are ±1, 0 and cosines/sines of multiples of 2π/m; nonzero
    // singular values stay far above this cutoff.
    rank::null_space(&stacked, 1e-8)
}

/// The trivial and full set of projectors for the internal representation of
/// `graph`; convenience used by the block module.
pub(crate) fn internal_basis(phi: &TypeMap, graph: &Graph, table: &IrrepTable) -> IsotypicBasis {
    let hi = crate::symmetry::internal_representation(phi, graph);
    symmetry_adapted_basis(&hi, table)
}
