//! External and internal representations of a mirror-symmetric triangle and
//! the block-diagonal rigidity matrix they induce.

use symflex::builtin::builtin_example;
use symflex::symmetry::{external_representation, internal_representation};

fn main() -> symflex::Result<()> {
    let doc = builtin_example("triangle-cs", 0, None)?;
    let sf = doc.symmetric_framework()?;
    let he = external_representation(sf.phi());
    let hi = internal_representation(sf.phi(), sf.framework().graph());
    println!("H_e(s) ={}", he.matrices[1]);
    println!("H_i(s) ={}", hi.matrices[1]);

    let table = sf.table();
    for (t, label) in table.labels.iter().enumerate() {
        println!(
            "{label}: external dim {}, internal dim {}",
            sf.external_basis().components[t].ncols(),
            sf.internal_basis().components[t].ncols()
        );
    }
    let blocks = sf.block_decomposition()?;
    println!(
        "block sizes {:?}, ranks {:?}, off-block residual {:.1e}",
        blocks.dims(),
        blocks.block_ranks,
        blocks.offblock_residual
    );
    Ok(())
}
