//! Block-diagonalization of the rigidity matrix and symmetry-extended counts.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::framework::{rigid_motion_basis, rigidity_rows, Configuration, Framework, Graph};
use crate::rank::{self, RankReport};
use crate::rep_theory::{
    fixed_subspace_basis, internal_basis, irreducible_characters, symmetry_adapted_basis,
    IrrepTable, IsotypicBasis,
};
use crate::symmetry::{
    external_representation, validate_type_map, Representation, TypeMap, TypeMapValidation,
};

/// Environment variable overriding [`AnalysisOptions::rank_rtol`].
pub const RANK_TOL_ENV: &str = "SYMFLEX_RANK_TOL";

/// Tolerances shared by every rank and residual decision of an analysis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisOptions {
    /// Rank threshold relative to `‖R(K_n, p)‖₂`.
    pub rank_rtol: f64,
    /// Off-block residual threshold relative to `‖R(G, p)‖_F`.
    pub offblock_rtol: f64,
    /// Symmetry-equation threshold relative to the configuration scale.
    pub symmetry_rtol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            rank_rtol: crate::framework::DEFAULT_RANK_RTOL,
            offblock_rtol: 1e-9,
            symmetry_rtol: crate::symmetry::SYMMETRY_RTOL,
        }
    }
}

impl AnalysisOptions {
    /// Defaults, with the rank tolerance taken from `SYMFLEX_RANK_TOL` when it
    /// is set to a positive number.
    pub fn from_env() -> Self {
        let mut opts = Self::default();
        if let Some(v) = std::env::var(RANK_TOL_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| *v > 0.0 && v.is_finite())
        {
            opts.rank_rtol = v;
        }
        opts
    }
}

/// Which graph's rigidity matrix to restrict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GraphChoice {
    /// The framework's own graph.
    Own,
    /// The complete graph on the same vertices.
    Complete,
}

/// A framework together with a validated type map and the symmetry-adapted
/// bases that depend only on the type map.
#[derive(Clone, Debug)]
pub struct SymmetricFramework {
    framework: Framework,
    complete: Graph,
    phi: TypeMap,
    table: IrrepTable,
    external_rep: Representation,
    external: IsotypicBasis,
    internal: IsotypicBasis,
    internal_complete: IsotypicBasis,
    fixed: DMatrix<f64>,
    options: AnalysisOptions,
    rank_tol: f64,
    validation: TypeMapValidation,
}

impl SymmetricFramework {
    /// Validate `(fw, phi)` and precompute the symmetry-adapted bases.
    pub fn new(fw: Framework, phi: TypeMap, options: AnalysisOptions) -> Result<Self> {
        let tol = options.symmetry_rtol * fw.config().scale();
        let validation = validate_type_map(&fw, &phi, Some(tol))?;
        if !validation.valid {
            let (element, vertex) = validation.worst.clone().unwrap_or_default();
            return Err(Error::SymmetryViolated {
                element,
                vertex,
                residual: validation.max_residual,
                tolerance: validation.tolerance,
            });
        }
        let complete = fw.graph().completion();
        let table = irreducible_characters(phi.group());
        let external_rep = external_representation(&phi);
        let external = symmetry_adapted_basis(&external_rep, &table);
        let internal = internal_basis(&phi, fw.graph(), &table);
        let internal_complete = internal_basis(&phi, &complete, &table);
        let fixed = fixed_subspace_basis(&phi);
        let rk = rigidity_rows(&complete, fw.dim(), fw.config().flat());
        let norm = rank::spectral_norm(&rk);
        let rank_tol = options.rank_rtol * if norm > 0.0 { norm } else { 1.0 };
        Ok(Self {
            framework: fw,
            complete,
            phi,
            table,
            external_rep,
            external,
            internal,
            internal_complete,
            fixed,
            options,
            rank_tol,
            validation,
        })
    }

    /// The same analysis at another configuration, keeping bases and the
    /// absolute rank tolerance fixed.
    pub fn at(&self, config: Configuration) -> Result<Self> {
        let fw = self.framework.with_config(config)?;
        let tol = self.options.symmetry_rtol * fw.config().scale();
        let validation = validate_type_map(&fw, &self.phi, Some(tol))?;
        if !validation.valid {
            let (element, vertex) = validation.worst.clone().unwrap_or_default();
            return Err(Error::SymmetryViolated {
                element,
                vertex,
                residual: validation.max_residual,
                tolerance: validation.tolerance,
            });
        }
        Ok(Self {
            framework: fw,
            validation,
            ..self.clone()
        })
    }

    pub fn framework(&self) -> &Framework {
        &self.framework
    }

    pub fn phi(&self) -> &TypeMap {
        &self.phi
    }

    pub fn table(&self) -> &IrrepTable {
        &self.table
    }

    pub fn external_representation(&self) -> &Representation {
        &self.external_rep
    }

    pub fn external_basis(&self) -> &IsotypicBasis {
        &self.external
    }

    pub fn internal_basis(&self) -> &IsotypicBasis {
        &self.internal
    }

    /// Orthonormal basis of the fixed subspace `U`.
    pub fn fixed_basis(&self) -> &DMatrix<f64> {
        &self.fixed
    }

    pub fn options(&self) -> &AnalysisOptions {
        &self.options
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn with_rank_tol(mut self, tol: f64) -> Self {
        self.rank_tol = tol;
        self
    }

    pub fn validation(&self) -> &TypeMapValidation {
        &self.validation
    }

    /// Points affinely span at least a hyperplane, so rigid motions have full
    /// dimension `d(d+1)/2`.
    pub fn spanning(&self) -> bool {
        self.framework.config().affine_span_dim() + 1 >= self.framework.dim()
    }

    pub(crate) fn graph_for(&self, choice: GraphChoice) -> &Graph {
        match choice {
            GraphChoice::Own => self.framework.graph(),
            GraphChoice::Complete => &self.complete,
        }
    }

    fn check_irrep(&self, t: usize) -> Result<()> {
        if t >= self.table.len() {
            return Err(Error::IrrepOutOfRange {
                index: t,
                count: self.table.len(),
            });
        }
        Ok(())
    }

    pub fn block_decomposition(&self) -> Result<BlockDecomposition> {
        self.decompose(GraphChoice::Own)
    }

    /// Blocks of `R(K_n, p)` in the same external basis.
    pub fn complete_block_decomposition(&self) -> Result<BlockDecomposition> {
        self.decompose(GraphChoice::Complete)
    }

    fn decompose(&self, choice: GraphChoice) -> Result<BlockDecomposition> {
        let graph = self.graph_for(choice);
        let internal = match choice {
            GraphChoice::Own => &self.internal,
            GraphChoice::Complete => &self.internal_complete,
        };
        let r = rigidity_rows(graph, self.framework.dim(), self.framework.config().flat());
        let te = self.external.transform();
        let ti = internal.transform();
        let full = ti.transpose() * &r * &te;
        let mut blocks = Vec::with_capacity(self.table.len());
        let mut masked = full.clone();
        let (mut row, mut col) = (0, 0);
        for t in 0..self.table.len() {
            let (h, w) = (
                internal.components[t].ncols(),
                self.external.components[t].ncols(),
            );
            blocks.push(full.view((row, col), (h, w)).into_owned());
            masked.view_mut((row, col), (h, w)).fill(0.0);
            row += h;
            col += w;
        }
        let norm = r.norm();
        let offblock_residual = masked.norm();
        let tolerance = self.options.offblock_rtol * norm.max(f64::MIN_POSITIVE);
        if offblock_residual > tolerance {
            return Err(Error::OffBlockResidual {
                residual: offblock_residual,
                tolerance,
            });
        }
        let block_ranks = blocks
            .iter()
            .map(|b| rank::rank(b, self.rank_tol))
            .collect();
        Ok(BlockDecomposition {
            labels: self.table.labels.clone(),
            blocks,
            block_ranks,
            t_external: te,
            t_internal: ti,
            offblock_residual,
            rigidity_norm: norm,
        })
    }

    /// Orthonormal basis of the infinitesimal rigid motions lying in
    /// `V_e^(I_t)`.
    pub fn symmetric_rigid_motions(&self, t: usize) -> Result<SymmetricRigidMotions> {
        self.check_irrep(t)?;
        let rm = rigid_motion_basis(self.framework.config());
        let gens = &rm.generators;
        let q = rank::column_space(gens, 1e-10 * rank::spectral_norm(gens).max(1.0));
        let bt = &self.external.components[t];
        // The rigid-motion space is invariant under H_e, so (I - P_t) restricted
        // to it is an orthogonal projector with singular values 0 or 1.
        let outside = &q - bt * (bt.transpose() * &q);
        let coeffs = rank::null_space(&outside, 0.5);
        Ok(SymmetricRigidMotions {
            basis: &q * coeffs,
            spanning: !rm.possibly_dependent,
        })
    }

    pub fn maxwell_counts(&self) -> Result<MaxwellTable> {
        let mut rows = Vec::with_capacity(self.table.len());
        for t in 0..self.table.len() {
            let dim_ve = self.external.components[t].ncols();
            let dim_vi = self.internal.components[t].ncols();
            let dim_we = self.symmetric_rigid_motions(t)?.basis.ncols();
            rows.push(MaxwellRow {
                irrep: self.table.labels[t].clone(),
                dim_vi,
                dim_ve,
                dim_we,
                slack: dim_ve as i64 - dim_we as i64 - dim_vi as i64,
            });
        }
        Ok(MaxwellTable {
            rows,
            spanning: self.spanning(),
        })
    }

    /// Orthonormal basis (as `dn`-vectors) of the fully symmetric infinitesimal
    /// motions orthogonal to the fully symmetric rigid motions.
    pub fn fully_symmetric_flexes(&self) -> Result<DMatrix<f64>> {
        self.flexes_in(0)
    }

    pub(crate) fn flexes_in(&self, t: usize) -> Result<DMatrix<f64>> {
        let b = &self.external.components[t];
        let w = self.symmetric_rigid_motions(t)?.basis;
        let r = self.framework.rigidity_matrix();
        let rb = &r * b;
        let wb = w.transpose() * b;
        let stacked = rank::vstack(&[&rb, &wb], b.ncols());
        let k = rank::null_space(&stacked, self.rank_tol);
        Ok(b * k)
    }

    /// Orthonormal basis (as `m`-vectors) of the fully symmetric self-stresses.
    pub fn fully_symmetric_self_stresses(&self) -> Result<DMatrix<f64>> {
        let bi = &self.internal.components[0];
        let be = &self.external.components[0];
        let block = bi.transpose() * self.framework.rigidity_matrix() * be;
        let coeffs = rank::left_null_space(&block, self.rank_tol);
        Ok(bi * coeffs)
    }

    /// Rank of `R(graph, p) · B_U`, computed without block-diagonalizing.
    pub fn restricted_rank(&self, choice: GraphChoice) -> RankReport {
        let j = self.restricted_jacobian(choice, self.framework.config().flat(), &self.fixed);
        rank::rank_with_tolerance(&j, Some(self.rank_tol)).expect("finite configuration")
    }

    pub(crate) fn restricted_jacobian(
        &self,
        choice: GraphChoice,
        q: &nalgebra::DVector<f64>,
        basis: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        rigidity_rows(self.graph_for(choice), self.framework.dim(), q) * basis
    }
}

/// `R̃(G, p) = T_iᵀ R(G, p) T_e` split into one block per irrep.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub labels: Vec<String>,
    /// `blocks[t]` is `dim V_i^(I_t) × dim V_e^(I_t)`.
    pub blocks: Vec<DMatrix<f64>>,
    pub block_ranks: Vec<usize>,
    pub t_external: DMatrix<f64>,
    pub t_internal: DMatrix<f64>,
    /// Frobenius norm of everything outside the diagonal blocks.
    pub offblock_residual: f64,
    pub rigidity_norm: f64,
}

impl BlockDecomposition {
    /// `(rows, cols)` per block.
    pub fn dims(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| b.shape()).collect()
    }

    pub fn total_rank(&self) -> usize {
        self.block_ranks.iter().sum()
    }
}

#[derive(Clone, Debug)]
pub struct SymmetricRigidMotions {
    pub basis: DMatrix<f64>,
    /// False when the rigid-motion generators may be dependent.
    pub spanning: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaxwellRow {
    pub irrep: String,
    pub dim_vi: usize,
    pub dim_ve: usize,
    pub dim_we: usize,
    /// `dim_ve - dim_we - dim_vi`: positive guarantees a flex of this
    /// symmetry, negative a self-stress.
    pub slack: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaxwellTable {
    pub rows: Vec<MaxwellRow>,
    pub spanning: bool,
}

pub fn block_diagonalize(fw: &Framework, phi: &TypeMap) -> Result<BlockDecomposition> {
    SymmetricFramework::new(fw.clone(), phi.clone(), AnalysisOptions::default())?
        .block_decomposition()
}

pub fn maxwell_counts(fw: &Framework, phi: &TypeMap) -> Result<MaxwellTable> {
    SymmetricFramework::new(fw.clone(), phi.clone(), AnalysisOptions::default())?.maxwell_counts()
}

pub fn fully_symmetric_flexes(fw: &Framework, phi: &TypeMap) -> Result<DMatrix<f64>> {
    SymmetricFramework::new(fw.clone(), phi.clone(), AnalysisOptions::default())?
        .fully_symmetric_flexes()
}

pub fn fully_symmetric_self_stresses(fw: &Framework, phi: &TypeMap) -> Result<DMatrix<f64>> {
    SymmetricFramework::new(fw.clone(), phi.clone(), AnalysisOptions::default())?
        .fully_symmetric_self_stresses()
}

pub fn restricted_rank(fw: &Framework, phi: &TypeMap, choice: GraphChoice) -> Result<RankReport> {
    Ok(
        SymmetricFramework::new(fw.clone(), phi.clone(), AnalysisOptions::default())?
            .restricted_rank(choice),
    )
}

pub fn symmetric_rigid_motions(
    fw: &Framework,
    phi: &TypeMap,
    t: usize,
) -> Result<SymmetricRigidMotions> {
    SymmetricFramework::new(fw.clone(), phi.clone(), AnalysisOptions::default())?
        .symmetric_rigid_motions(t)
}
