//! A framework built by hand: a planar triangle with a centre joint under a
//! threefold rotation. The two-dimensional irrep `E` gets its own block.

use symflex::certify::sample_symmetric_generic;
use symflex::symmetry::{parse_cycles, Generator};
use symflex::{
    AnalysisOptions, Framework, Graph, GroupGeometry, GroupKind, SymmetricFramework, SymmetryGroup,
    TypeMap,
};

fn main() -> symflex::Result<()> {
    let graph = Graph::new(4, vec![(0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3)])?;
    let group = SymmetryGroup::new(GroupKind::Cm(3), 2, GroupGeometry::default())?;
    let rotation = parse_cycles("(1 2 3)", 4).map_err(symflex::Error::Invalid)?;
    let phi = TypeMap::from_generators(group, &graph, &[(Generator::Rotation, rotation)])?;
    let config = sample_symmetric_generic(&graph, &phi, 3)?;
    let sf = SymmetricFramework::new(
        Framework::new(graph, config)?,
        phi,
        AnalysisOptions::default(),
    )?;

    let blocks = sf.block_decomposition()?;
    for (t, label) in blocks.labels.iter().enumerate() {
        println!(
            "{label}: block {:?}, rank {}",
            blocks.dims()[t],
            blocks.block_ranks[t]
        );
    }
    for row in &sf.maxwell_counts()?.rows {
        println!("{}: slack {}", row.irrep, row.slack);
    }
    Ok(())
}
