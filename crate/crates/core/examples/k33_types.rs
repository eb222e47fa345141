//! Two symmetry types of K3,3 under a mirror: one forces rigidity, the other
//! admits a symmetric realization (the hexagon) with a flex and a stress.

use symflex::builtin::builtin_example;
use symflex::certify::finite_flex_decision;
use symflex::framework::infinitesimal_rigidity_test_with;

fn main() -> symflex::Result<()> {
    for name in ["k33-phi-a", "k33-phi-b", "k33-hexagon"] {
        let doc = builtin_example(name, 0, None)?;
        let sf = doc.symmetric_framework()?;
        let rig = infinitesimal_rigidity_test_with(sf.framework(), sf.rank_tol());
        let counts = sf.maxwell_counts()?;
        let cert = finite_flex_decision(&sf, &doc.certify_policy())?;
        println!("{name}");
        println!("  rank {} of {}", rig.report.rank, rig.expected_rank);
        for row in &counts.rows {
            println!(
                "  {}: vi {} ve {} we {} slack {}",
                row.irrep, row.dim_vi, row.dim_ve, row.dim_we, row.slack
            );
        }
        println!(
            "  symmetric flexes {}, symmetric self-stresses {}",
            sf.fully_symmetric_flexes()?.ncols(),
            sf.fully_symmetric_self_stresses()?.ncols()
        );
        println!(
            "  verdict {} (regularity of G {})",
            cert.verdict,
            if cert.graph_regularity.passed {
                "passed"
            } else {
                "failed"
            }
        );
    }
    Ok(())
}
