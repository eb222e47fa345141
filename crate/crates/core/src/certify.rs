//! Regular-point tests, symmetric generic sampling and finite-flex
//! certificates.
//!
//! A certificate compares the rank of the rigidity matrix of `G` with that of
//! `K_n`, both restricted to a symmetry-adapted subspace, and only claims a
//! verdict when both configurations are regular points of that subspace.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::blocks::{GraphChoice, SymmetricFramework};
use crate::error::{Error, Result};
use crate::framework::{Configuration, Graph};
use crate::rank;
use crate::rep_theory::fixed_subspace_basis;
use crate::symmetry::TypeMap;

/// Name recorded in document provenance for samples from
/// [`sample_symmetric_generic`].
pub const GENERIC_SAMPLE_TAG: &str = "symmetric-generic-sample";

const SAMPLE_ATTEMPTS: usize = 200;

/// Random configuration in the fixed subspace `U`, standing in for a
/// symmetric-generic one.
///
/// A standard Gaussian vector in `R^{dn}` is projected orthogonally onto
/// `U`, so the sample depends on `U` but not on the basis chosen for it.
/// Samples are redrawn until vertices are distinct and, when some sample
/// achieves it, span at least a hyperplane.
pub fn sample_symmetric_generic(graph: &Graph, phi: &TypeMap, seed: u64) -> Result<Configuration> {
    let dim = phi.group().dim();
    let basis = fixed_subspace_basis(phi);
    if basis.ncols() == 0 {
        return Err(Error::EmptyFixedSpace);
    }
    if phi.vertex_count() != graph.vertex_count() {
        return Err(Error::DimensionMismatch(format!(
            "type map acts on {} vertices, graph has {}",
            phi.vertex_count(),
            graph.vertex_count()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fallback = None;
    for _ in 0..SAMPLE_ATTEMPTS {
        let g = DVector::from_fn(basis.nrows(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let config = Configuration::from_flat(dim, &basis * (basis.transpose() * g))?;
        if !injective(&config) {
            continue;
        }
        if config.affine_span_dim() + 1 >= dim {
            return Ok(config);
        }
        fallback.get_or_insert(config);
    }
    fallback.ok_or_else(|| {
        Error::Geometry("no injective configuration found in the fixed subspace".into())
    })
}

fn injective(config: &Configuration) -> bool {
    let tol = 1e-6 * config.scale();
    let n = config.point_count();
    (0..n).all(|i| (i + 1..n).all(|j| config.distance(i, j) > tol))
}

/// Knobs for the sampling regularity tests.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertifyPolicy {
    pub trials: usize,
    /// Neighbourhood radius relative to the configuration scale.
    pub radius_rel: f64,
    pub seed: u64,
    /// Seed the configuration was produced from by
    /// [`sample_symmetric_generic`], if any. Honoured only when resampling
    /// reproduces the coordinates.
    pub generic_seed: Option<u64>,
}

impl Default for CertifyPolicy {
    fn default() -> Self {
        Self {
            trials: 32,
            radius_rel: 1e-3,
            seed: 0,
            generic_seed: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    #[serde(rename = "finite-symmetry-preserving-flex")]
    FiniteFlex,
    #[serde(rename = "no-symmetry-preserving-flex")]
    NoSymmetryPreservingFlex,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::FiniteFlex => "finite-symmetry-preserving-flex",
            Verdict::NoSymmetryPreservingFlex => "no-symmetry-preserving-flex",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The decision rule a verdict rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// Symmetric-generic configuration with a fully symmetric infinitesimal
    /// flex.
    GenericSymmetricFlex,
    /// Fully symmetric block with independent rows and a fully symmetric
    /// infinitesimal flex.
    IndependentRowsSymmetricFlex,
    /// Sampled regular point with a fully symmetric infinitesimal flex.
    RegularWithSymmetricFlex,
    /// Regular point of `G` and `K_n` in `U` with equal restricted ranks.
    RegularRankComparison,
    /// Regular point of `G` and `K_n` in an affine slice with equal ranks.
    SliceRankComparison,
    /// Regular point of `G` and `K_n` in an affine slice with a rank gap.
    SliceWithFlex,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::GenericSymmetricFlex => "generic-symmetric-flex",
            Criterion::IndependentRowsSymmetricFlex => "independent-rows-symmetric-flex",
            Criterion::RegularWithSymmetricFlex => "regular-with-symmetric-flex",
            Criterion::RegularRankComparison => "regular-rank-comparison",
            Criterion::SliceRankComparison => "slice-rank-comparison",
            Criterion::SliceWithFlex => "slice-with-flex",
        }
    }
}

/// How a regularity claim was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularityRoute {
    /// Points span: `K_n` is regular in `U` automatically.
    Spanning,
    /// Configuration reproduced by the generic sampler.
    GenericSample,
    /// Fully symmetric block has independent rows.
    IndependentRows,
    /// Rank compared against randomly sampled neighbours.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityEvidence {
    pub passed: bool,
    pub route: RegularityRoute,
    pub base_rank: usize,
    pub samples: usize,
    pub max_sampled_rank: Option<usize>,
    /// Absolute neighbourhood radius.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateTolerances {
    pub rank_tol: f64,
    pub radius: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlexCertificate {
    pub verdict: Verdict,
    pub criterion: Option<Criterion>,
    /// 0-based irrep index of the slice (0 is the fully symmetric one).
    pub irrep: usize,
    pub irrep_label: String,
    pub rank_graph: usize,
    pub rank_complete: usize,
    /// Infinitesimal flexes in the slice, modulo rigid motions.
    pub infinitesimal_flexes: usize,
    /// Fully symmetric self-stresses (only computed for the trivial irrep).
    pub self_stresses: Option<usize>,
    pub spanning: bool,
    pub graph_regularity: RegularityEvidence,
    pub complete_regularity: RegularityEvidence,
    pub tolerances: CertificateTolerances,
}

impl FlexCertificate {
    pub fn criterion_name(&self) -> Option<&'static str> {
        self.criterion.map(Criterion::as_str)
    }
}

/// Basis of the slice directions for irrep `t`: `U` itself for the trivial
/// irrep, otherwise the isotypic component.
fn slice_basis(sf: &SymmetricFramework, t: usize) -> &DMatrix<f64> {
    if t == 0 {
        sf.fixed_basis()
    } else {
        &sf.external_basis().components[t]
    }
}

/// Sampling test: `p` passes when no neighbour `q = p + B z` with
/// `‖z‖ ≤ radius` has a larger restricted rank.
pub fn regularity_test(
    sf: &SymmetricFramework,
    choice: GraphChoice,
    t: usize,
    policy: &CertifyPolicy,
) -> Result<RegularityEvidence> {
    if t >= sf.table().len() {
        return Err(Error::IrrepOutOfRange {
            index: t,
            count: sf.table().len(),
        });
    }
    let basis = slice_basis(sf, t);
    let p = sf.framework().config().flat();
    let radius = policy.radius_rel * sf.framework().config().scale();
    let base_rank = rank::rank(&sf.restricted_jacobian(choice, p, basis), sf.rank_tol());
    let k = basis.ncols();
    let mut max_rank = None;
    if k > 0 {
        // Per-choice streams keep G and K_n samples independent of each other.
        let stream = (t as u64) << 1 | (choice == GraphChoice::Complete) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
        rng.set_stream(stream);
        for _ in 0..policy.trials {
            let q = p + ball_sample(&mut rng, basis, radius);
            let r = rank::rank(&sf.restricted_jacobian(choice, &q, basis), sf.rank_tol());
            max_rank = Some(max_rank.map_or(r, |m: usize| m.max(r)));
        }
    }
    Ok(RegularityEvidence {
        passed: max_rank.is_none_or(|m| base_rank >= m),
        route: RegularityRoute::Sampled,
        base_rank,
        samples: if k > 0 { policy.trials } else { 0 },
        max_sampled_rank: max_rank,
        radius,
    })
}

/// Uniform sample from the radius-`r` ball of the span of `basis`
/// (orthonormal columns), returned in ambient coordinates. The direction is
/// a projected ambient Gaussian, so the law and the draw are basis-free.
fn ball_sample(rng: &mut ChaCha8Rng, basis: &DMatrix<f64>, r: f64) -> DVector<f64> {
    let g = DVector::from_fn(basis.nrows(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let dir = basis * (basis.transpose() * g);
    let norm = dir.norm();
    let u: f64 = rng.random();
    if norm == 0.0 {
        return dir;
    }
    dir * (r * u.powf(1.0 / basis.ncols() as f64) / norm)
}

/// Regular-point test for `G` in the fixed subspace.
pub fn regular_in_fixed_space_test(
    sf: &SymmetricFramework,
    policy: &CertifyPolicy,
) -> Result<RegularityEvidence> {
    regularity_test(sf, GraphChoice::Own, 0, policy)
}

/// True when `policy.generic_seed` reproduces the framework's coordinates.
fn generic_provenance_holds(sf: &SymmetricFramework, policy: &CertifyPolicy) -> bool {
    let Some(seed) = policy.generic_seed else {
        return false;
    };
    let fw = sf.framework();
    match sample_symmetric_generic(fw.graph(), sf.phi(), seed) {
        Ok(q) => (q.flat() - fw.config().flat()).amax() <= 1e-12 * fw.config().scale(),
        Err(_) => false,
    }
}

/// Decide whether `(G, p)` has a finite flex that keeps the full symmetry.
pub fn finite_flex_decision(
    sf: &SymmetricFramework,
    policy: &CertifyPolicy,
) -> Result<FlexCertificate> {
    let spanning = sf.spanning();
    let radius = policy.radius_rel * sf.framework().config().scale();
    let rank_graph = sf.restricted_rank(GraphChoice::Own).rank;
    let rank_complete = sf.restricted_rank(GraphChoice::Complete).rank;
    let flexes = sf.fully_symmetric_flexes()?.ncols();
    let stresses = sf.fully_symmetric_self_stresses()?.ncols();

    let complete_regularity = if spanning {
        RegularityEvidence {
            passed: true,
            route: RegularityRoute::Spanning,
            base_rank: rank_complete,
            samples: 0,
            max_sampled_rank: None,
            radius,
        }
    } else {
        regularity_test(sf, GraphChoice::Complete, 0, policy)?
    };

    let shortcut = |route| RegularityEvidence {
        passed: true,
        route,
        base_rank: rank_graph,
        samples: 0,
        max_sampled_rank: None,
        radius,
    };
    let graph_regularity = if generic_provenance_holds(sf, policy) {
        shortcut(RegularityRoute::GenericSample)
    } else if stresses == 0 {
        shortcut(RegularityRoute::IndependentRows)
    } else {
        regularity_test(sf, GraphChoice::Own, 0, policy)?
    };

    let regular = graph_regularity.passed && complete_regularity.passed;
    let (verdict, criterion) = if !regular {
        (Verdict::Inconclusive, None)
    } else if rank_graph < rank_complete {
        let c = match graph_regularity.route {
            RegularityRoute::GenericSample => Criterion::GenericSymmetricFlex,
            RegularityRoute::IndependentRows => Criterion::IndependentRowsSymmetricFlex,
            _ => Criterion::RegularWithSymmetricFlex,
        };
        (Verdict::FiniteFlex, Some(c))
    } else if rank_graph == rank_complete {
        (
            Verdict::NoSymmetryPreservingFlex,
            Some(Criterion::RegularRankComparison),
        )
    } else {
        (Verdict::Inconclusive, None)
    };

    Ok(FlexCertificate {
        verdict,
        criterion,
        irrep: 0,
        irrep_label: sf.table().labels[0].clone(),
        rank_graph,
        rank_complete,
        infinitesimal_flexes: flexes,
        self_stresses: Some(stresses),
        spanning,
        graph_regularity,
        complete_regularity,
        tolerances: CertificateTolerances {
            rank_tol: sf.rank_tol(),
            radius,
            trials: policy.trials,
            seed: policy.seed,
        },
    })
}

/// Decide whether `(G, p)` has a finite flex inside the affine slice
/// `p + V_e^(I_t)`, which preserves the symmetry of the kernel of `I_t`.
///
/// Both regularity claims are sampled for `t > 0`; `t = 0` delegates to
/// [`finite_flex_decision`].
pub fn subrep_flex_decision(
    sf: &SymmetricFramework,
    t: usize,
    policy: &CertifyPolicy,
) -> Result<FlexCertificate> {
    if t >= sf.table().len() {
        return Err(Error::IrrepOutOfRange {
            index: t,
            count: sf.table().len(),
        });
    }
    if t == 0 {
        return finite_flex_decision(sf, policy);
    }
    let basis = slice_basis(sf, t);
    let p = sf.framework().config().flat();
    let rank_graph = rank::rank(
        &sf.restricted_jacobian(GraphChoice::Own, p, basis),
        sf.rank_tol(),
    );
    let rank_complete = rank::rank(
        &sf.restricted_jacobian(GraphChoice::Complete, p, basis),
        sf.rank_tol(),
    );
    let flexes = sf.flexes_in(t)?.ncols();
    let graph_regularity = regularity_test(sf, GraphChoice::Own, t, policy)?;
    let complete_regularity = regularity_test(sf, GraphChoice::Complete, t, policy)?;
    let regular = graph_regularity.passed && complete_regularity.passed;
    let (verdict, criterion) = if !regular {
        (Verdict::Inconclusive, None)
    } else if rank_graph < rank_complete {
        (Verdict::FiniteFlex, Some(Criterion::SliceWithFlex))
    } else if rank_graph == rank_complete {
        (
            Verdict::NoSymmetryPreservingFlex,
            Some(Criterion::SliceRankComparison),
        )
    } else {
        (Verdict::Inconclusive, None)
    };
    Ok(FlexCertificate {
        verdict,
        criterion,
        irrep: t,
        irrep_label: sf.table().labels[t].clone(),
        rank_graph,
        rank_complete,
        infinitesimal_flexes: flexes,
        self_stresses: None,
        spanning: sf.spanning(),
        graph_regularity,
        complete_regularity,
        tolerances: CertificateTolerances {
            rank_tol: sf.rank_tol(),
            radius: policy.radius_rel * sf.framework().config().scale(),
            trials: policy.trials,
            seed: policy.seed,
        },
    })
}
