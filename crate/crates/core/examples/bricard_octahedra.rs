//! Finite-flex certificates for the symmetric octahedra: three flexible
//! Bricard-type classes and one isostatic contrast.

use symflex::builtin::builtin_example;
use symflex::certify::finite_flex_decision;

fn main() -> symflex::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    for name in [
        "bricard-c2",
        "bricard-cs",
        "octahedron-c2v",
        "octahedron-cs-isostatic",
    ] {
        let doc = builtin_example(name, seed, None)?;
        let sf = doc.symmetric_framework()?;
        let row = &sf.maxwell_counts()?.rows[0];
        let cert = finite_flex_decision(&sf, &doc.certify_policy())?;
        println!(
            "{name:<24} counts ({}, {}, {}) flexes {} ranks G {} / K6 {} -> {} [{}]",
            row.dim_vi,
            row.dim_ve,
            row.dim_we,
            cert.infinitesimal_flexes,
            cert.rank_graph,
            cert.rank_complete,
            cert.verdict,
            cert.criterion_name().unwrap_or("-")
        );
    }
    Ok(())
}
