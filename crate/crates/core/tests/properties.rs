mod common;

use proptest::prelude::*;

use symflex::builtin::builtin_example;
use symflex::certify::CertifyPolicy;
use symflex::trace::{path_validate, trace_flex, trace_flex_from, TraceOptions};
use symflex::{Configuration, SymmetricFramework};

fn bricard(seed: u64) -> SymmetricFramework {
    builtin_example("bricard-c2", seed, None)
        .unwrap()
        .symmetric_framework()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn structural_invariants_hold(seed in any::<u64>()) {
        let inst = common::random_instance(seed);
        if let Err(msg) = common::check_instance(&inst) {
            prop_assert!(false, "{}", msg);
        }
    }

    #[test]
    fn certificates_are_sound(seed in any::<u64>()) {
        let inst = common::random_instance(seed);
        if let Err(msg) = common::check_certificate(&inst) {
            prop_assert!(false, "{}", msg);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn traced_frames_stay_symmetric_and_on_the_constraints(seed in 0u64..1000) {
        let sf = bricard(seed);
        let path = trace_flex(&sf, &TraceOptions { steps: 20, ..Default::default() }).unwrap();
        let report = path_validate(&path.frames, &sf).unwrap();
        prop_assert!(report.max_symmetry_residual <= 1e-10);
        prop_assert!(report.max_edge_drift <= 1e-8 * sf.framework().config().scale());
        prop_assert!(report.witness.is_some());
        for w in path.frames.windows(2) {
            let gap = (w[1].flat() - w[0].flat()).norm();
            prop_assert!(gap <= 2.0 * path.step_size);
        }
    }

    #[test]
    fn tangents_lie_in_the_kernel(seed in 0u64..1000) {
        let sf = bricard(seed);
        let path = trace_flex(&sf, &TraceOptions { steps: 10, ..Default::default() }).unwrap();
        let graph = sf.framework().graph();
        for (frame, t) in path.frames.iter().zip(&path.tangents) {
            let r = symflex::framework::rigidity_matrix(graph, frame).unwrap();
            prop_assert!((r * t).amax() <= 1e-7);
        }
    }

    #[test]
    fn tracing_back_returns_to_the_start(seed in 0u64..1000) {
        let sf = bricard(seed);
        let opts = TraceOptions { steps: 10, ..Default::default() };
        let forward = trace_flex(&sf, &opts).unwrap();
        let last: &Configuration = forward.frames.last().unwrap();
        let back_tangent = -forward.tangents.last().unwrap();
        let sf_last = sf.at(last.clone()).unwrap();
        let back = trace_flex_from(&sf_last, &opts, &CertifyPolicy::default(), Some(&back_tangent)).unwrap();
        let end = back.frames.last().unwrap();
        prop_assert!((end.flat() - sf.framework().config().flat()).amax() <= 1e-6);
    }

    #[test]
    fn generic_samples_are_symmetric(seed in any::<u64>()) {
        let doc = builtin_example("bricard-c2", seed, None).unwrap();
        let sf = doc.symmetric_framework().unwrap();
        prop_assert!(sf.validation().max_residual <= 1e-12);
    }

    #[test]
    fn canonical_documents_round_trip(seed in any::<u64>(), which in 0usize..10) {
        let name = symflex::builtin::BUILTIN_NAMES[which];
        let doc = builtin_example(name, seed, None).unwrap();
        let text = doc.to_canonical_string();
        let again = symflex::document::FrameworkDocument::parse(&text).unwrap();
        prop_assert_eq!(&again, &doc);
        prop_assert_eq!(again.to_canonical_string(), text);
    }
}
