//! Acceptance suite. Each test prints one `PASS`/`FAIL` line (written straight
//! to stdout so it shows up without `--nocapture`) and fails on `FAIL`.

mod common;

use std::io::Write;

use nalgebra::DMatrix;

use symflex::builtin::builtin_example;
use symflex::certify::{
    finite_flex_decision, regular_in_fixed_space_test, CertifyPolicy, Criterion, Verdict,
};
use symflex::framework::infinitesimal_rigidity_test_with;
use symflex::rep_theory::{irreducible_characters, symmetry_adapted_basis};
use symflex::symmetry::{external_representation, internal_representation};
use symflex::trace::{path_validate, trace_flex_from, Monitor, TraceOptions};
use symflex::{GraphChoice, SymmetricFramework};

type Outcome = Result<String, String>;

fn report(n: usize, title: &str, outcome: Outcome) {
    let line = match &outcome {
        Ok(detail) => format!("criterion {n:>2} PASS  {title}: {detail}\n"),
        Err(detail) => format!("criterion {n:>2} FAIL  {title}: {detail}\n"),
    };
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    if let Err(detail) = outcome {
        panic!("criterion {n} failed: {detail}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn load(name: &str, seed: u64) -> Result<(SymmetricFramework, CertifyPolicy), String> {
    let doc = builtin_example(name, seed, None).map_err(|e| e.to_string())?;
    let sf = doc.symmetric_framework().map_err(|e| e.to_string())?;
    Ok((sf, doc.certify_policy()))
}

fn counts(sf: &SymmetricFramework, t: usize) -> (usize, usize, usize) {
    let row = &sf.maxwell_counts().unwrap().rows[t];
    (row.dim_vi, row.dim_ve, row.dim_we)
}

fn triangle_phi() -> (symflex::TypeMap, symflex::Graph) {
    let doc = builtin_example("triangle-cs", 0, None).unwrap();
    (doc.phi.clone(), doc.graph.clone())
}

#[test]
fn criterion_01_golden_representation_matrices() {
    let outcome = (|| -> Outcome {
        let (phi, graph) = triangle_phi();
        let he = external_representation(&phi);
        let hi = internal_representation(&phi, &graph);
        #[rustfmt::skip]
        let he_s = DMatrix::from_row_slice(6, 6, &[
            0., 0., -1., 0., 0., 0.,
            0., 0., 0., 1., 0., 0.,
            -1., 0., 0., 0., 0., 0.,
            0., 1., 0., 0., 0., 0.,
            0., 0., 0., 0., -1., 0.,
            0., 0., 0., 0., 0., 1.,
        ]);
        let hi_s = DMatrix::from_row_slice(3, 3, &[1., 0., 0., 0., 0., 1., 0., 1., 0.]);
        ensure(he.matrices[0] == DMatrix::identity(6, 6), || {
            "H_e(Id) differs".into()
        })?;
        ensure(he.matrices[1] == he_s, || {
            format!("H_e(s) differs: {}", he.matrices[1])
        })?;
        ensure(hi.matrices[0] == DMatrix::identity(3, 3), || {
            "H_i(Id) differs".into()
        })?;
        ensure(hi.matrices[1] == hi_s, || {
            format!("H_i(s) differs: {}", hi.matrices[1])
        })?;
        Ok("H_e(Id), H_e(s), H_i(Id), H_i(s) equal entry-wise".into())
    })();
    report(1, "golden representation matrices (triangle)", outcome);
}

#[test]
fn criterion_02_golden_isotypic_dimensions() {
    let outcome = (|| -> Outcome {
        let (phi, graph) = triangle_phi();
        let table = irreducible_characters(phi.group());
        let ext = symmetry_adapted_basis(&external_representation(&phi), &table).dims();
        let int = symmetry_adapted_basis(&internal_representation(&phi, &graph), &table).dims();
        ensure(ext == vec![3, 3], || format!("external dims {ext:?}"))?;
        ensure(int == vec![2, 1], || format!("internal dims {int:?}"))?;
        Ok(format!("external {ext:?}, internal {int:?}"))
    })();
    report(2, "golden isotypic dimensions (triangle)", outcome);
}

#[test]
fn criterion_03_k33_type_contrast() {
    let outcome = (|| -> Outcome {
        for seed in 0..10 {
            let (sf, _) = load("k33-phi-a", seed)?;
            for factor in [1.0, 10.0, 0.1] {
                let s = sf.clone().with_rank_tol(sf.rank_tol() * factor);
                let rig = infinitesimal_rigidity_test_with(s.framework(), s.rank_tol());
                ensure(rig.infinitesimally_rigid && rig.report.rank == 9, || {
                    format!(
                        "k33-phi-a seed {seed} tol x{factor}: rank {}",
                        rig.report.rank
                    )
                })?;
                let flexes = s.fully_symmetric_flexes().unwrap().ncols();
                ensure(flexes == 0, || {
                    format!("k33-phi-a seed {seed} tol x{factor}: {flexes} symmetric flexes")
                })?;
            }
        }
        let (sf, policy) = load("k33-hexagon", 0)?;
        for factor in [1.0, 10.0, 0.1] {
            let s = sf.clone().with_rank_tol(sf.rank_tol() * factor);
            let flexes = s.fully_symmetric_flexes().unwrap().ncols();
            let stresses = s.fully_symmetric_self_stresses().unwrap().ncols();
            let reg = regular_in_fixed_space_test(&s, &policy).unwrap();
            let cert = finite_flex_decision(&s, &policy).unwrap();
            ensure(flexes >= 1, || {
                format!("hexagon tol x{factor}: no symmetric flex")
            })?;
            ensure(stresses >= 1, || {
                format!("hexagon tol x{factor}: no symmetric self-stress")
            })?;
            ensure(!reg.passed, || {
                format!("hexagon tol x{factor}: regularity passed")
            })?;
            ensure(cert.verdict == Verdict::Inconclusive, || {
                format!("hexagon tol x{factor}: verdict {}", cert.verdict)
            })?;
        }
        Ok("k33-phi-a rigid (rank 9, no symmetric flex) for 10 seeds; hexagon flex+stress, regularity FAIL, inconclusive; stable at tol x10 and /10".into())
    })();
    report(3, "K33 type contrast", outcome);
}

fn flexible_octahedron(name: &str, expected: (usize, usize, usize), seeds: u64) -> Outcome {
    for seed in 0..seeds {
        let (sf, policy) = load(name, seed)?;
        let c = counts(&sf, 0);
        ensure(c == expected, || format!("seed {seed}: counts {c:?}"))?;
        let flexes = sf.fully_symmetric_flexes().unwrap().ncols();
        let stresses = sf.fully_symmetric_self_stresses().unwrap().ncols();
        ensure(flexes == 1, || {
            format!("seed {seed}: {flexes} symmetric flexes")
        })?;
        ensure(stresses == 0, || {
            format!("seed {seed}: {stresses} symmetric self-stresses")
        })?;
        let cert = finite_flex_decision(&sf, &policy).unwrap();
        ensure(cert.verdict == Verdict::FiniteFlex, || {
            format!("seed {seed}: verdict {}", cert.verdict)
        })?;
        ensure(
            cert.criterion == Some(Criterion::GenericSymmetricFlex),
            || format!("seed {seed}: criterion {:?}", cert.criterion),
        )?;
    }
    Ok(format!(
        "counts {expected:?}, 1 flex, 0 self-stresses, finite flex (generic-symmetric-flex) for {seeds} seeds"
    ))
}

#[test]
fn criterion_04_bricard_c2() {
    report(
        4,
        "Bricard C2 octahedron",
        flexible_octahedron("bricard-c2", (6, 9, 2), 10),
    );
}

#[test]
fn criterion_05_bricard_cs() {
    report(
        5,
        "Bricard Cs octahedron",
        flexible_octahedron("bricard-cs", (6, 10, 3), 10),
    );
}

#[test]
fn criterion_06_octahedron_c2v() {
    report(
        6,
        "C2v octahedron",
        flexible_octahedron("octahedron-c2v", (4, 6, 1), 10),
    );
}

#[test]
fn criterion_07_isostatic_contrast() {
    let outcome = (|| -> Outcome {
        for seed in 0..10 {
            let (sf, policy) = load("octahedron-cs-isostatic", seed)?;
            let table = sf.maxwell_counts().unwrap();
            let got: Vec<(usize, usize, usize, i64)> = table
                .rows
                .iter()
                .map(|r| (r.dim_vi, r.dim_ve, r.dim_we, r.slack))
                .collect();
            ensure(got == vec![(8, 11, 3, 0), (4, 7, 3, 0)], || {
                format!("seed {seed}: counts {got:?}")
            })?;
            let rig = infinitesimal_rigidity_test_with(sf.framework(), sf.rank_tol());
            ensure(rig.infinitesimally_rigid && rig.report.rank == 12, || {
                format!("seed {seed}: rank {}", rig.report.rank)
            })?;
            let cert = finite_flex_decision(&sf, &policy).unwrap();
            ensure(cert.verdict == Verdict::NoSymmetryPreservingFlex, || {
                format!("seed {seed}: verdict {}", cert.verdict)
            })?;
        }
        Ok("counts (8,11,3) and (4,7,3), slack 0, rank 12, no symmetry-preserving flex for 10 seeds".into())
    })();
    report(7, "isostatic Cs octahedron", outcome);
}

fn bricard_trace(
    monitors: Vec<Monitor>,
    reverse: bool,
) -> Result<(SymmetricFramework, symflex::FlexPath), String> {
    let (sf, policy) = load("bricard-c2", 0)?;
    let opts = TraceOptions {
        steps: 50,
        step_size: 0.02,
        reverse,
        monitors,
        ..Default::default()
    };
    let path = trace_flex_from(&sf, &opts, &policy, None).map_err(|e| e.to_string())?;
    Ok((sf, path))
}

#[test]
fn criterion_08_tracer_conservation() {
    let outcome = (|| -> Outcome {
        let (sf, path) = bricard_trace(Vec::new(), false)?;
        let scale = sf.framework().config().scale();
        let rep = path_validate(&path.frames, &sf).map_err(|e| e.to_string())?;
        ensure(path.frames.len() == 51, || {
            format!("{} frames", path.frames.len())
        })?;
        ensure(rep.max_edge_drift <= 1e-8 * scale, || {
            format!("edge drift {:.3e}", rep.max_edge_drift)
        })?;
        ensure(rep.max_symmetry_residual <= 1e-10, || {
            format!("symmetry residual {:.3e}", rep.max_symmetry_residual)
        })?;
        let w = rep.witness.clone().ok_or("no non-congruence witness")?;
        ensure(w.change > 1e-3, || {
            format!("witness change {:.3e}", w.change)
        })?;
        Ok(format!(
            "50 steps of 0.02: edge drift {:.2e}, symmetry residual {:.2e}, witness (v{}, v{}) changes by {:.4}",
            rep.max_edge_drift,
            rep.max_symmetry_residual,
            w.pair.0 + 1,
            w.pair.1 + 1,
            w.change
        ))
    })();
    report(8, "tracer conservation (Bricard C2)", outcome);
}

#[test]
fn criterion_09_singular_frame_traversal() {
    let outcome = (|| -> Outcome {
        // The path runs both ways from the start; either half may reach the
        // coplanar configuration first.
        let monitor = Monitor::Coplanarity {
            vertices: [0, 1, 2, 3],
        };
        let mut found = None;
        for reverse in [false, true] {
            let (sf, path) = bricard_trace(vec![monitor.clone()], reverse)?;
            if !path.events.is_empty() {
                found = Some((sf, path, reverse));
                break;
            }
        }
        let (sf, path, reverse) =
            found.ok_or("neither direction made joints 1-4 coplanar within 50 steps")?;
        let ev = &path.events[0];
        ensure(ev.value.abs() <= 1e-6, || {
            format!("coplanarity residual {:.3e}", ev.value)
        })?;
        ensure(
            path.frames.len() == 51 && ev.after_frame + 1 < path.frames.len() - 1,
            || "tracing stopped at the coplanar frame".into(),
        )?;
        let scale = sf.framework().config().scale();
        let check =
            path_validate(std::slice::from_ref(&ev.config), &sf).map_err(|e| e.to_string())?;
        let drift = (ev.config.flat().clone() - sf.framework().config().flat()).amax();
        let edge = symflex::framework::edge_function(sf.framework().graph(), &ev.config).unwrap()
            - sf.framework().edge_function();
        ensure(edge.amax() <= 1e-8 * scale, || {
            format!("event frame edge drift {:.3e}", edge.amax())
        })?;
        ensure(check.max_symmetry_residual <= 1e-10, || {
            "event frame not symmetric".into()
        })?;
        let at = sf.at(ev.config.clone()).map_err(|e| e.to_string())?;
        let rank_q = at.restricted_rank(GraphChoice::Own).rank;
        let rank_p = sf.restricted_rank(GraphChoice::Own).rank;
        ensure(rank_q == rank_p, || {
            format!("restricted rank {rank_q} at the coplanar frame, {rank_p} at start")
        })?;
        Ok(format!(
            "joints 1-4 coplanar (|det|/scale^3 = {:.1e}) between {} frames {} and {}, displaced {:.3} from start, restricted rank {} as at start; all 50 steps completed",
            ev.value.abs(),
            if reverse { "reverse" } else { "forward" },
            ev.after_frame,
            ev.after_frame + 1,
            drift,
            rank_q
        ))
    })();
    report(9, "singular-frame traversal (Bricard C2)", outcome);
}

#[test]
fn criterion_10_property_suites() {
    let outcome = (|| -> Outcome {
        let mut kinds = std::collections::BTreeSet::new();
        for seed in 0..100 {
            let inst = common::random_instance(seed);
            kinds.insert(inst.sf.phi().group().kind().name());
            common::check_instance(&inst)?;
            common::check_certificate(&inst)?;
        }
        Ok(format!(
            "100 random instances over groups {:?}: representation axioms, projector laws, dimension sums, intertwining, rank additivity, restricted-rank cross-check, rigid-motion kernel, finite differences",
            kinds
        ))
    })();
    report(10, "property suites on random instances", outcome);
}
