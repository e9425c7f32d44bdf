//! Walsh packet coefficients of an image for a chosen tree, and back.

use wpbayes::tree::QuadTreeModel;
use wpbayes::wavelet::{analyze_full, pack_leaf_blocks, synthesize_tree};
use wpbayes::{NodeId, Signal2D};

fn main() -> wpbayes::Result<()> {
    let x = Signal2D::from_fn(3, |r, c| if (r / 2 + c / 2) % 2 == 0 { 10.0 } else { 2.0 })?;
    let table = analyze_full(&x);

    // root split once, then the last child split again
    let m = QuadTreeModel::from_bitstring(3, "100010000")?;
    println!("tree {m}, leaves {}", m.leaves().len());
    for s in m.leaves_dfs() {
        let energy: f64 = table.block(s).iter().map(|v| v * v).sum();
        println!("  {s}: energy {energy:.2}");
    }

    let packed = pack_leaf_blocks(&m, &table)?;
    println!("packed coefficient energy {:.2}, signal energy {:.2}", packed.norm_sq(), x.norm_sq());

    let back = synthesize_tree(&m, &table)?;
    println!("max reconstruction error {:.2e}", back.max_abs_diff(&x));
    println!("lowpass block at depth 1: {:?}", table.block(NodeId::new(1, 0, 0)?));
    Ok(())
}
