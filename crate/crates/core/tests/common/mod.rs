//! Random symmetric frameworks and the structural checks run on them.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symflex::certify::{finite_flex_decision, sample_symmetric_generic, CertifyPolicy, Verdict};
use symflex::framework::rigid_motion_basis;
use symflex::rep_theory::{irreducible_characters, isotypic_projector, symmetry_adapted_basis};
use symflex::symmetry::{external_representation, internal_representation};
use symflex::{
    AnalysisOptions, Framework, Graph, GraphChoice, GroupGeometry, GroupKind, SymmetricFramework,
    SymmetryGroup, TypeMap,
};

pub struct Instance {
    pub description: String,
    pub sf: SymmetricFramework,
}

const KINDS: &[(GroupKind, usize)] = &[
    (GroupKind::C1, 2),
    (GroupKind::C1, 3),
    (GroupKind::Cs, 2),
    (GroupKind::Cs, 3),
    (GroupKind::Cm(2), 2),
    (GroupKind::Cm(3), 2),
    (GroupKind::Cm(4), 2),
    (GroupKind::Cm(2), 3),
    (GroupKind::Cm(3), 3),
    (GroupKind::Cm(4), 3),
    (GroupKind::Cmv(2), 2),
    (GroupKind::Cmv(3), 2),
    (GroupKind::Cmv(2), 3),
    (GroupKind::Cmv(3), 3),
];

fn unit(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        if v.norm() > 0.2 {
            return v.normalize();
        }
    }
}

fn random_group(rng: &mut ChaCha8Rng) -> SymmetryGroup {
    let (kind, dim) = KINDS[rng.random_range(0..KINDS.len())];
    let axis = unit(rng, 3);
    let normal = if dim == 3 {
        let v = unit(rng, 3);
        (&v - &axis * axis.dot(&v)).normalize()
    } else {
        unit(rng, 2)
    };
    let geometry = GroupGeometry {
        axis: (dim == 3 && kind.rotation_order() > 1).then(|| axis.iter().copied().collect()),
        mirror_normal: kind
            .has_reflection()
            .then(|| normal.iter().copied().collect()),
    };
    SymmetryGroup::new(kind, dim, geometry).expect("valid random group")
}

/// Left cosets of `h` in the group, each as a sorted element list.
fn cosets(group: &SymmetryGroup, h: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for g in 0..group.order() {
        let mut c: Vec<usize> = h.iter().map(|&k| group.product(g, k)).collect();
        c.sort_unstable();
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Build a random `(graph, group, Φ, configuration)` from `seed`. Vertex
/// orbits are coset spaces of point stabilizers; edges come in full orbits.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(inst) = try_instance(&mut rng, seed) {
            return inst;
        }
    }
}

fn try_instance(rng: &mut ChaCha8Rng, seed: u64) -> Option<Instance> {
    let group = random_group(rng);
    let kind = group.kind();
    let dim = group.dim();
    let whole: Vec<usize> = (0..group.order()).collect();
    let mut stabilizers: Vec<Vec<usize>> = vec![vec![0]];
    if kind.has_reflection() {
        stabilizers.push(vec![0, group.index_of(true, 0)]);
    }
    // A point fixed by the whole group exists on the axis (3D) or at the
    // origin; only one such vertex fits at the origin.
    let fixed_ok = dim == 3 || kind.rotation_order() == 1;
    let mut orbits: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut used_origin = false;
    let orbit_count = rng.random_range(1..=3);
    for _ in 0..orbit_count {
        let choice = rng.random_range(0..stabilizers.len() + 1);
        let h = if choice < stabilizers.len() {
            stabilizers[choice].clone()
        } else if fixed_ok || !used_origin {
            used_origin |= !fixed_ok;
            whole.clone()
        } else {
            vec![0]
        };
        orbits.push(cosets(&group, &h));
    }
    let n: usize = orbits.iter().map(|o| o.len()).sum();
    if !(2..=14).contains(&n) {
        return None;
    }
    // perms[x][v]: vertex v = (orbit, coset); x maps coset gH to xgH.
    let mut index = Vec::new();
    for (o, cs) in orbits.iter().enumerate() {
        for c in 0..cs.len() {
            index.push((o, c));
        }
    }
    let offset: Vec<usize> = orbits
        .iter()
        .scan(0, |acc, o| {
            let start = *acc;
            *acc += o.len();
            Some(start)
        })
        .collect();
    let perms: Vec<Vec<usize>> = (0..group.order())
        .map(|x| {
            index
                .iter()
                .map(|&(o, c)| {
                    let g = orbits[o][c][0];
                    let xg = group.product(x, g);
                    let target = orbits[o]
                        .iter()
                        .position(|cs| cs.contains(&xg))
                        .expect("coset exists");
                    offset[o] + target
                })
                .collect()
        })
        .collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let edge_orbits = rng.random_range(1..=n.min(5));
    for _ in 0..edge_orbits {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        for p in &perms {
            let (u, v) = (p[a], p[b]);
            if u == v {
                continue;
            }
            let e = (u.min(v), u.max(v));
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
    }
    if edges.is_empty() {
        return None;
    }
    edges.sort_unstable();
    let graph = Graph::new(n, edges).ok()?;
    let phi = TypeMap::from_element_perms(group, &graph, perms).ok()?;
    let config = sample_symmetric_generic(&graph, &phi, seed).ok()?;
    let fw = Framework::new(graph, config).ok()?;
    let description = format!(
        "seed {seed}: {} in {dim}D, {n} vertices, {} edges",
        kind.name(),
        fw.graph().edge_count()
    );
    let sf = SymmetricFramework::new(fw, phi, AnalysisOptions::default()).ok()?;
    Some(Instance { description, sf })
}

fn rank(a: &DMatrix<f64>, tol: f64) -> usize {
    symflex::rank_with_tolerance(a, Some(tol)).unwrap().rank
}

/// Every structural invariant of the symmetry-adapted analysis; returns the
/// first violation.
pub fn check_instance(inst: &Instance) -> Result<(), String> {
    let sf = &inst.sf;
    let fw = sf.framework();
    let phi = sf.phi();
    let group = phi.group();
    let fail = |what: &str| Err(format!("{}: {what}", inst.description));

    // Representation axioms: homomorphism, orthogonality, identity first.
    let he = external_representation(phi);
    let hi = internal_representation(phi, fw.graph());
    for rep in [&he, &hi] {
        if rep.homomorphism_residual(group) > 1e-12 {
            return fail("representation is not a homomorphism");
        }
        for h in &rep.matrices {
            if (h.transpose() * h - DMatrix::identity(rep.degree, rep.degree)).amax() > 1e-12 {
                return fail("representation matrix not orthogonal");
            }
        }
        if (&rep.matrices[0] - DMatrix::identity(rep.degree, rep.degree)).amax() != 0.0 {
            return fail("identity not represented by I");
        }
    }

    // Projector laws and dimension count.
    let table = irreducible_characters(group);
    for rep in [&he, &hi] {
        let projectors: Vec<DMatrix<f64>> = (0..table.len())
            .map(|t| isotypic_projector(rep, &table, t).unwrap())
            .collect();
        let mut sum = DMatrix::zeros(rep.degree, rep.degree);
        for (s, ps) in projectors.iter().enumerate() {
            if (ps * ps - ps).amax() > 1e-10 || (ps - ps.transpose()).amax() > 1e-12 {
                return fail("projector not idempotent and symmetric");
            }
            for (t, pt) in projectors.iter().enumerate() {
                if s != t && (ps * pt).amax() > 1e-10 {
                    return fail("projectors not mutually orthogonal");
                }
            }
            sum += ps;
        }
        if (sum - DMatrix::identity(rep.degree, rep.degree)).amax() > 1e-10 {
            return fail("projectors do not sum to identity");
        }
        let basis = symmetry_adapted_basis(rep, &table);
        if basis.dims().iter().sum::<usize>() != rep.degree {
            return fail("isotypic dimensions do not sum to the ambient dimension");
        }
    }

    // Intertwining: R maps each external component into the matching internal one.
    let r = fw.rigidity_matrix();
    let rnorm = r.norm();
    let ext = sf.external_basis();
    let int = sf.internal_basis();
    for t in 0..table.len() {
        let image = &r * &ext.components[t];
        let bi = &int.components[t];
        let outside = &image - bi * (bi.transpose() * &image);
        for c in 0..outside.ncols() {
            if outside.column(c).norm() > 1e-9 * rnorm.max(1e-300) {
                return fail("rigidity matrix does not intertwine the representations");
            }
        }
    }

    // Rank additivity and the restricted-rank cross-check.
    let tol = sf.rank_tol();
    let blocks = sf
        .block_decomposition()
        .map_err(|e| format!("{}: {e}", inst.description))?;
    if blocks.total_rank() != rank(&r, tol) {
        return fail("block ranks do not add up to the rank of R");
    }
    if blocks.block_ranks[0] != sf.restricted_rank(GraphChoice::Own).rank {
        return fail("fully symmetric block rank differs from the restricted rank");
    }
    let complete = sf
        .complete_block_decomposition()
        .map_err(|e| format!("{}: {e}", inst.description))?;
    for t in 0..table.len() {
        if blocks.block_ranks[t] > complete.block_ranks[t] {
            return fail("block of G has larger rank than block of K_n");
        }
    }
    if sf.restricted_rank(GraphChoice::Own).rank > sf.restricted_rank(GraphChoice::Complete).rank {
        return fail("restricted rank of G exceeds that of K_n");
    }

    // Symmetry-extended counts bound the flex space from below.
    let counts = sf.maxwell_counts().unwrap();
    let flexes = sf.fully_symmetric_flexes().unwrap().ncols() as i64;
    if counts.spanning && counts.rows[0].slack > flexes {
        return fail("positive slack without matching fully symmetric flexes");
    }

    // Rigid motions lie in the kernel.
    let rm = rigid_motion_basis(fw.config());
    let scale = fw.config().scale();
    if (&r * &rm.generators).amax() > 1e-10 * scale * scale.max(1.0) {
        return fail("rigid motions are not in the kernel of R");
    }

    // Central differences of the edge function agree with 2R.
    let p = fw.config().flat().clone();
    let v = DVector::from_fn(p.len(), |i, _| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.5);
    let eps = 1e-6 * scale;
    let f = |q: DVector<f64>| {
        let c = symflex::Configuration::from_flat(fw.dim(), q).unwrap();
        symflex::framework::edge_function(fw.graph(), &c).unwrap()
    };
    let fd = (f(&p + &v * eps) - f(&p - &v * eps)) / (2.0 * eps);
    let exact = &r * &v * 2.0;
    if (fd - &exact).amax() > 1e-6 * (1.0 + exact.amax()) {
        return fail("finite differences disagree with the rigidity matrix");
    }
    Ok(())
}

/// Certificate soundness: verdicts agree with the rank comparison, sampling
/// is deterministic, and no self-stress plus a flex at a spanning
/// configuration always yields a finite flex.
pub fn check_certificate(inst: &Instance) -> Result<(), String> {
    let sf = &inst.sf;
    let policy = CertifyPolicy::default();
    let cert = finite_flex_decision(sf, &policy).map_err(|e| e.to_string())?;
    let again = finite_flex_decision(sf, &policy).map_err(|e| e.to_string())?;
    let fail = |what: &str| Err(format!("{}: {what}", inst.description));
    if cert != again {
        return fail("certificate is not deterministic");
    }
    match cert.verdict {
        Verdict::FiniteFlex if cert.rank_graph >= cert.rank_complete => {
            return fail("finite flex without a rank gap")
        }
        Verdict::NoSymmetryPreservingFlex if cert.rank_graph != cert.rank_complete => {
            return fail("no-flex verdict with unequal ranks")
        }
        Verdict::FiniteFlex | Verdict::NoSymmetryPreservingFlex
            if !(cert.graph_regularity.passed && cert.complete_regularity.passed) =>
        {
            return fail("verdict without regularity")
        }
        _ => {}
    }
    if cert.self_stresses == Some(0)
        && cert.infinitesimal_flexes > 0
        && cert.spanning
        && cert.verdict != Verdict::FiniteFlex
    {
        return fail("independent rows with a flex did not certify a finite flex");
    }
    Ok(())
}
