//! Follow the symmetric flex of a Bricard octahedron in both directions,
//! locating frames where joints 1-4 become coplanar.

use symflex::builtin::builtin_example;
use symflex::trace::{path_validate, trace_flex_from, Monitor, TraceOptions};

fn main() -> symflex::Result<()> {
    let doc = builtin_example("bricard-c2", 0, None)?;
    let sf = doc.symmetric_framework()?;
    for reverse in [false, true] {
        let opts = TraceOptions {
            steps: 100,
            step_size: 0.02,
            reverse,
            monitors: vec![Monitor::Coplanarity {
                vertices: [0, 1, 2, 3],
            }],
            ..Default::default()
        };
        let path = trace_flex_from(&sf, &opts, &doc.certify_policy(), None)?;
        let report = path_validate(&path.frames, &sf)?;
        println!("{} direction", if reverse { "reverse" } else { "forward" });
        println!(
            "  {} frames, edge drift {:.1e}, symmetry residual {:.1e}",
            path.frames.len(),
            report.max_edge_drift,
            report.max_symmetry_residual
        );
        if let Some(w) = &report.witness {
            println!(
                "  |v{} - v{}| changes by {:.4}",
                w.pair.0 + 1,
                w.pair.1 + 1,
                w.change
            );
        }
        for e in &path.events {
            println!(
                "  {} = {:.1e} between frames {} and {}",
                e.monitor,
                e.value,
                e.after_frame,
                e.after_frame + 1
            );
        }
    }
    Ok(())
}
