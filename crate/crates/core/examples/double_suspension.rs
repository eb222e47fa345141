//! Double suspensions of even polygons under a half-turn: counts and
//! certificates as the polygon grows.

use symflex::builtin::builtin_example;
use symflex::certify::finite_flex_decision;

fn main() -> symflex::Result<()> {
    for n in 2..=5 {
        let doc = builtin_example("double-suspension", 0, Some(n))?;
        let sf = doc.symmetric_framework()?;
        let row = &sf.maxwell_counts()?.rows[0];
        let cert = finite_flex_decision(&sf, &doc.certify_policy())?;
        println!(
            "n = {n}: {} joints, {} bars, counts ({}, {}, {}), flexes {} -> {}",
            doc.graph.vertex_count(),
            doc.graph.edge_count(),
            row.dim_vi,
            row.dim_ve,
            row.dim_we,
            cert.infinitesimal_flexes,
            cert.verdict
        );
    }
    Ok(())
}
