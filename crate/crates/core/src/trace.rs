//! Predictor-corrector continuation of a fully symmetric flex inside the
//! fixed subspace `U`, and validation of traced paths.
//!
//! Unknowns are coordinates on an orthonormal basis `B` of `U`, so every frame
//! is symmetric by construction. Each step solves, from the previous frame
//! `q₀` with tangent `τ`,
//!
//! ```text
//! f_G(q₀ + BΔ) = f_G(p),   ‖Δ‖ = h,   W(q₀)ᵀ BΔ = 0,
//! ```
//!
//! where `W(q₀)` spans the fully symmetric rigid motions at `q₀`. The chord
//! condition fixes progress along the path; the gauge condition removes
//! symmetric rigid motions.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::blocks::SymmetricFramework;
use crate::certify::{finite_flex_decision, CertifyPolicy, Verdict};
use crate::error::{Error, Result};
use crate::framework::{edge_values, rigidity_rows, Configuration};
use crate::rank;
use crate::symmetry::validate_type_map;

/// Scalar functions of a configuration whose sign changes are located along
/// a path.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Monitor {
    /// `det[q_b − q_a, q_c − q_a, q_d − q_a] / scale³` (3D only); zero when
    /// the four joints are coplanar.
    Coplanarity { vertices: [usize; 4] },
}

impl Monitor {
    pub fn name(&self) -> String {
        match self {
            Monitor::Coplanarity { vertices } => {
                let v: Vec<String> = vertices.iter().map(|i| (i + 1).to_string()).collect();
                format!("coplanarity({})", v.join(","))
            }
        }
    }

    pub fn evaluate(&self, config: &Configuration) -> f64 {
        match self {
            Monitor::Coplanarity {
                vertices: [a, b, c, d],
            } => {
                if config.dim() != 3 {
                    return f64::NAN;
                }
                let pa = config.point(*a);
                let col = |v: usize| {
                    let pv = config.point(v);
                    nalgebra::Vector3::new(pv[0] - pa[0], pv[1] - pa[1], pv[2] - pa[2])
                };
                let m = nalgebra::Matrix3::from_columns(&[col(*b), col(*c), col(*d)]);
                m.determinant() / config.scale().powi(3)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceOptions {
    pub steps: usize,
    pub step_size: f64,
    pub max_iterations: usize,
    /// Corrector convergence threshold relative to `scale²` (squared lengths).
    pub tolerance_rel: f64,
    /// Smallest step tried, as a fraction of `step_size`.
    pub min_step_fraction: f64,
    /// Trace even without a finite-flex certificate.
    pub allow_uncertified: bool,
    /// Start along the negated initial tangent.
    pub reverse: bool,
    pub monitors: Vec<Monitor>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            steps: 50,
            step_size: 0.02,
            max_iterations: 25,
            tolerance_rel: 1e-12,
            min_step_fraction: 1.0 / 64.0,
            allow_uncertified: false,
            reverse: false,
            monitors: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameDiagnostics {
    /// Largest `|‖q_i − q_j‖² − ‖p_i − p_j‖²|` over edges.
    pub edge_drift: f64,
    pub symmetry_residual: f64,
    /// Largest `|wᵀ(q − q_prev)|` over fully symmetric rigid motions at the
    /// previous frame.
    pub gauge_drift: f64,
    pub iterations: usize,
    /// Chord length actually used (after any halving).
    pub step: f64,
    /// Smallest and second-smallest singular values of the tangent system.
    pub sigma_min: f64,
    pub sigma_second: f64,
    /// The tangent system has a multi-dimensional kernel here.
    pub singular: bool,
}

/// A located sign change of a monitor between two frames.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEvent {
    pub monitor: String,
    /// The event lies between `after_frame` and `after_frame + 1`.
    pub after_frame: usize,
    pub chord: f64,
    pub value: f64,
    pub config: Configuration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlexPath {
    pub frames: Vec<Configuration>,
    /// Unit tangents (full coordinates), one per frame.
    pub tangents: Vec<DVector<f64>>,
    pub step_size: f64,
    pub diagnostics: Vec<FrameDiagnostics>,
    pub events: Vec<PathEvent>,
    /// The start carried a finite-flex certificate.
    pub certified: bool,
    /// Tracing followed a genuine fully symmetric infinitesimal flex.
    pub followed_flex: bool,
}

/// Pick a unit fully symmetric infinitesimal flex orthogonal to the symmetric
/// rigid motions: the direction of smallest singular value of the tangent
/// system, first nonzero coordinate positive.
pub fn tangent_flex(sf: &SymmetricFramework) -> Result<DVector<f64>> {
    let flexes = sf.fully_symmetric_flexes()?;
    if flexes.ncols() == 0 {
        return Err(Error::NoSymmetricFlex);
    }
    let sys = TangentSystem::at(sf, sf.framework().config())?;
    let mut t = sf.fixed_basis() * sys.direction(None);
    let pivot = t.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
    if pivot < 0.0 {
        t = -t;
    }
    Ok(t)
}

/// `[R(q)B; W(q)ᵀB]` and its SVD, in `U` coordinates.
struct TangentSystem {
    v: DMatrix<f64>,
    sigma: Vec<f64>,
    w_u: DMatrix<f64>,
}

impl TangentSystem {
    fn at(sf: &SymmetricFramework, config: &Configuration) -> Result<Self> {
        let b = sf.fixed_basis();
        let w = sf.at(config.clone())?.symmetric_rigid_motions(0)?.basis;
        let w_u = b.transpose() * &w;
        let r = rigidity_rows(sf.framework().graph(), config.dim(), config.flat()) * b;
        let stacked = rank::vstack(&[&r, &w_u.transpose()], b.ncols());
        let svd = rank::full_svd(&stacked);
        // Pad with zeros when the system has fewer rows than unknowns.
        let mut sigma = svd.sigma;
        sigma.resize(b.ncols(), 0.0);
        Ok(Self {
            v: svd.v,
            sigma,
            w_u,
        })
    }

    fn sigma_min(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }

    fn sigma_second(&self) -> f64 {
        let n = self.sigma.len();
        if n >= 2 {
            self.sigma[n - 2]
        } else {
            f64::INFINITY
        }
    }

    /// Kernel directions: singular values within `gap` of the smallest.
    fn near_kernel(&self, gap: f64) -> DMatrix<f64> {
        let n = self.sigma.len();
        let smin = self.sigma_min();
        let count = self
            .sigma
            .iter()
            .filter(|&&s| s <= smin + gap)
            .count()
            .max(1);
        self.v.columns(n - count, count).into_owned()
    }

    /// Unit tangent in `U` coordinates, continuing `previous` when given.
    fn direction(&self, previous: Option<&DVector<f64>>) -> DVector<f64> {
        let n = self.sigma.len();
        let smallest = self.v.column(n - 1).into_owned();
        let Some(prev) = previous else {
            return smallest;
        };
        let smax = self.sigma.first().copied().unwrap_or(1.0).max(1e-300);
        let kernel = self.near_kernel(1e-6 * smax);
        let mut t = if kernel.ncols() > 1 {
            // Branch point: keep going straight through it.
            let proj = &kernel * (kernel.transpose() * prev);
            if proj.norm() > 1e-12 {
                proj.normalize()
            } else {
                smallest
            }
        } else {
            smallest
        };
        if t.dot(prev) < 0.0 {
            t = -t;
        }
        t
    }
}

struct StepOutcome {
    coords: DVector<f64>,
    iterations: usize,
}

/// Context shared by every corrector solve of one trace.
struct Corrector<'a> {
    sf: &'a SymmetricFramework,
    target: DVector<f64>,
    tol: f64,
    max_iterations: usize,
    chord: bool,
}

impl Corrector<'_> {
    /// Solve for `Δ` from `q0` along `tau` with chord length `h`.
    fn solve(
        &self,
        q0: &DVector<f64>,
        w_u: &DMatrix<f64>,
        tau: &DVector<f64>,
        h: f64,
    ) -> Option<StepOutcome> {
        let b = self.sf.fixed_basis();
        let graph = self.sf.framework().graph();
        let dim = self.sf.framework().dim();
        let k = b.ncols();
        let m = self.target.len();
        let wc = w_u.ncols();
        let rows = m + wc + usize::from(self.chord);
        let mut delta = tau * h;
        for iter in 0..=self.max_iterations {
            let q = q0 + b * &delta;
            let mut f = DVector::zeros(rows);
            f.rows_mut(0, m)
                .copy_from(&(edge_values(graph, dim, &q) - &self.target));
            f.rows_mut(m, wc).copy_from(&(w_u.transpose() * &delta));
            if self.chord {
                f[m + wc] = (delta.norm_squared() - h * h) / (2.0 * h);
            }
            if !f.iter().all(|x| x.is_finite()) {
                return None;
            }
            if f.amax() <= self.tol {
                return Some(StepOutcome {
                    coords: q,
                    iterations: iter,
                });
            }
            if iter == self.max_iterations {
                break;
            }
            let mut j = DMatrix::zeros(rows, k);
            j.rows_mut(0, m)
                .copy_from(&(rigidity_rows(graph, dim, &q) * b * 2.0));
            j.rows_mut(m, wc).copy_from(&w_u.transpose());
            if self.chord {
                j.row_mut(m + wc).copy_from(&(delta.transpose() / h));
            }
            let smax = rank::spectral_norm(&j);
            let step = rank::svd_solve(&j, &f, 1e-12 * smax.max(1e-300));
            delta -= step;
        }
        None
    }
}

fn edge_drift(target: &DVector<f64>, sf: &SymmetricFramework, q: &DVector<f64>) -> f64 {
    (edge_values(sf.framework().graph(), sf.framework().dim(), q) - target).amax()
}

fn symmetry_residual(sf: &SymmetricFramework, config: &Configuration) -> Result<f64> {
    let fw = sf.framework().with_config(config.clone())?;
    Ok(validate_type_map(&fw, sf.phi(), None)?.max_residual)
}

/// Trace the fully symmetric flex from the framework's configuration.
///
/// Refuses uncertified starts unless `allow_uncertified` is set; without a
/// fully symmetric infinitesimal flex the corrector then only pulls steps back
/// onto the constraint set.
pub fn trace_flex(sf: &SymmetricFramework, opts: &TraceOptions) -> Result<FlexPath> {
    trace_flex_from(sf, opts, &CertifyPolicy::default(), None)
}

/// As [`trace_flex`], with an explicit certification policy and an optional
/// initial tangent (full coordinates) overriding the default choice.
pub fn trace_flex_from(
    sf: &SymmetricFramework,
    opts: &TraceOptions,
    policy: &CertifyPolicy,
    initial_tangent: Option<&DVector<f64>>,
) -> Result<FlexPath> {
    if !(opts.step_size > 0.0 && opts.step_size.is_finite()) {
        return Err(Error::Invalid(format!(
            "step size must be positive, got {}",
            opts.step_size
        )));
    }
    let cert = finite_flex_decision(sf, policy)?;
    let certified = cert.verdict == Verdict::FiniteFlex;
    if !certified && !opts.allow_uncertified {
        return Err(Error::NotCertified(cert.verdict.to_string()));
    }
    let b = sf.fixed_basis();
    let p = sf.framework().config().clone();
    let dim = p.dim();
    let scale = p.scale();
    let followed_flex = sf.fully_symmetric_flexes()?.ncols() > 0;
    let target = sf.framework().edge_function();
    let corrector = Corrector {
        sf,
        target: target.clone(),
        tol: opts.tolerance_rel * scale * scale,
        max_iterations: opts.max_iterations,
        chord: followed_flex,
    };

    let mut sys = TangentSystem::at(sf, &p)?;
    let mut tau = match initial_tangent {
        Some(t) => {
            let u = b.transpose() * t;
            if u.norm() == 0.0 {
                return Err(Error::Invalid(
                    "initial tangent has no component in the fixed subspace".into(),
                ));
            }
            u.normalize()
        }
        None if followed_flex => b.transpose() * tangent_flex(sf)?,
        None => sys.direction(None),
    };
    if opts.reverse {
        tau = -tau;
    }

    let mut frames = vec![p.clone()];
    let mut tangents = vec![b * &tau];
    let mut diagnostics = vec![FrameDiagnostics {
        edge_drift: 0.0,
        symmetry_residual: symmetry_residual(sf, &p)?,
        gauge_drift: 0.0,
        iterations: 0,
        step: 0.0,
        sigma_min: sys.sigma_min(),
        sigma_second: sys.sigma_second(),
        singular: false,
    }];
    let mut events = Vec::new();

    for k in 1..=opts.steps {
        let q0 = frames[k - 1].flat().clone();
        let floor = opts.step_size * opts.min_step_fraction;
        let mut h = opts.step_size;
        let outcome = loop {
            if let Some(o) = corrector.solve(&q0, &sys.w_u, &tau, h) {
                break o;
            }
            h *= 0.5;
            if h < floor * (1.0 - 1e-12) {
                return Err(Error::CorrectorDiverged {
                    frame: k,
                    step: h * 2.0,
                });
            }
        };
        let q = Configuration::from_flat(dim, outcome.coords.clone())?;
        let gauge_drift = (sys.w_u.transpose() * (b.transpose() * (&outcome.coords - &q0))).amax();

        for mon in &opts.monitors {
            let (a, z) = (mon.evaluate(&frames[k - 1]), mon.evaluate(&q));
            if a.is_finite() && z.is_finite() && a * z < 0.0 {
                if let Some(ev) = locate_event(&corrector, &q0, &sys.w_u, &tau, h, mon, a, z) {
                    events.push(PathEvent {
                        after_frame: k - 1,
                        ..ev
                    });
                }
            } else if z == 0.0 {
                events.push(PathEvent {
                    monitor: mon.name(),
                    after_frame: k - 1,
                    chord: h,
                    value: 0.0,
                    config: q.clone(),
                });
            }
        }

        let next = TangentSystem::at(sf, &q)?;
        let smax = next.sigma.first().copied().unwrap_or(1.0).max(1e-300);
        let singular = followed_flex && next.sigma_second() <= 1e-6 * smax;
        let new_tau = if followed_flex {
            next.direction(Some(&tau))
        } else {
            let t = next.direction(None);
            if t.dot(&tau) < 0.0 {
                -t
            } else {
                t
            }
        };
        diagnostics.push(FrameDiagnostics {
            edge_drift: edge_drift(&target, sf, &outcome.coords),
            symmetry_residual: symmetry_residual(sf, &q)?,
            gauge_drift,
            iterations: outcome.iterations,
            step: h,
            sigma_min: next.sigma_min(),
            sigma_second: next.sigma_second(),
            singular,
        });
        tangents.push(b * &new_tau);
        frames.push(q);
        tau = new_tau;
        sys = next;
    }

    Ok(FlexPath {
        frames,
        tangents,
        step_size: opts.step_size,
        diagnostics,
        events,
        certified,
        followed_flex,
    })
}

/// Regula falsi on the chord length between a bracketing pair of frames.
#[allow(clippy::too_many_arguments)]
fn locate_event(
    corrector: &Corrector<'_>,
    q0: &DVector<f64>,
    w_u: &DMatrix<f64>,
    tau: &DVector<f64>,
    h: f64,
    mon: &Monitor,
    f_lo: f64,
    f_hi: f64,
) -> Option<PathEvent> {
    let dim = corrector.sf.framework().dim();
    let (mut lo, mut hi) = (0.0, h);
    let (mut flo, mut fhi) = (f_lo, f_hi);
    let mut best: Option<(f64, f64, Configuration)> = None;
    let mut side = 0i8;
    for _ in 0..60 {
        let s = (lo * fhi - hi * flo) / (fhi - flo);
        let s = if s > lo && s < hi { s } else { 0.5 * (lo + hi) };
        let q = corrector.solve(q0, w_u, tau, s)?;
        let config = Configuration::from_flat(dim, q.coords).ok()?;
        let val = mon.evaluate(&config);
        if best.as_ref().is_none_or(|(_, v, _)| val.abs() < v.abs()) {
            best = Some((s, val, config));
        }
        if val.abs() <= 1e-14 || hi - lo <= 1e-15 * h {
            break;
        }
        // Illinois modification keeps both ends moving.
        if val * flo < 0.0 {
            hi = s;
            fhi = val;
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        } else {
            lo = s;
            flo = val;
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        }
    }
    best.map(|(chord, value, config)| PathEvent {
        monitor: mon.name(),
        after_frame: 0,
        chord,
        value,
        config,
    })
}

/// A vertex pair whose distance changes along the path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CongruenceWitness {
    /// 0-based vertices.
    pub pair: (usize, usize),
    pub frame: usize,
    pub change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathReport {
    pub frames: usize,
    pub max_edge_drift: f64,
    pub edge_tolerance: f64,
    /// Frames whose edge drift exceeds the tolerance.
    pub drifting_frames: Vec<usize>,
    pub max_symmetry_residual: f64,
    pub witness: Option<CongruenceWitness>,
    pub witness_threshold: f64,
    /// Largest displacement of any frame from the first.
    pub max_displacement: f64,
    /// Frames move but stay congruent: a rigid motion, not a flex.
    pub rigid_motion_only: bool,
    pub flex_realized: bool,
}

/// Check edge lengths, symmetry and non-congruence along `frames`, relative to
/// the first frame.
pub fn path_validate(frames: &[Configuration], sf: &SymmetricFramework) -> Result<PathReport> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Invalid("path has no frames".into()))?;
    let graph = sf.framework().graph();
    let scale = first.scale();
    let edge_tolerance = 1e-8 * scale;
    let witness_threshold = 1e-6 * scale;
    let target = edge_values(graph, first.dim(), first.flat());
    let n = first.point_count();
    let mut max_edge_drift: f64 = 0.0;
    let mut drifting_frames = Vec::new();
    let mut max_symmetry_residual: f64 = 0.0;
    let mut witness: Option<CongruenceWitness> = None;
    let mut max_displacement: f64 = 0.0;
    for (f, q) in frames.iter().enumerate() {
        if q.dim() != first.dim() || q.point_count() != n {
            return Err(Error::DimensionMismatch(format!(
                "frame {f} has a different shape"
            )));
        }
        let drift = (edge_values(graph, q.dim(), q.flat()) - &target).amax();
        if drift > edge_tolerance {
            drifting_frames.push(f);
        }
        max_edge_drift = max_edge_drift.max(drift);
        max_symmetry_residual = max_symmetry_residual.max(symmetry_residual(sf, q)?);
        max_displacement = max_displacement.max((q.flat() - first.flat()).amax());
        for i in 0..n {
            for j in i + 1..n {
                let change = (q.distance(i, j) - first.distance(i, j)).abs();
                if witness.as_ref().is_none_or(|w| change > w.change) {
                    witness = Some(CongruenceWitness {
                        pair: (i, j),
                        frame: f,
                        change,
                    });
                }
            }
        }
    }
    let witness = witness.filter(|w| w.change > witness_threshold);
    let edges_ok = drifting_frames.is_empty();
    Ok(PathReport {
        frames: frames.len(),
        max_edge_drift,
        edge_tolerance,
        drifting_frames,
        max_symmetry_residual,
        rigid_motion_only: edges_ok && witness.is_none() && max_displacement > witness_threshold,
        flex_realized: edges_ok && witness.is_some(),
        witness,
        witness_threshold,
        max_displacement,
    })
}
