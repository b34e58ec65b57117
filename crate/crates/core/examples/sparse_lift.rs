//! Sparse lifts: block partition, lattice sets and Hankel pencils.
//!
//! ```bash
//! cargo run --example sparse_lift
//! ```

use sdplift::fixtures::{example3, example4, example4_stated_aux, EXAMPLE3_STATED_AUX};
use sdplift::lift::{block_lattice, build_dense_lift, build_sparse_lift, detect_partition};

fn main() {
    let s = example3(false);
    let part = detect_partition(&s);
    let f = block_lattice(&s, &part.blocks[0]);
    let pts: Vec<String> = f.points().map(|e| format!("{:?}", e.entries())).collect();
    println!("example 3: partition {}, F = {{{}}}", part.display(), pts.join(", "));
    let rep = build_sparse_lift(&s);
    println!(
        "  sparse pencils {:?}, aux {} (stated {EXAMPLE3_STATED_AUX}): {}",
        rep.pencil_dims(),
        rep.aux_count(),
        rep.aux_labels().join(" ")
    );

    for (n, d) in [(2, 2), (3, 3)] {
        let s = example4(n, d);
        let sparse = build_sparse_lift(&s);
        let dense = build_dense_lift(&s);
        println!(
            "example 4 n={n} d={d}: partition {}, sparse {:?} aux {} (stated {}), dense {:?} aux {}",
            detect_partition(&s).display(),
            sparse.pencil_dims(),
            sparse.aux_count(),
            example4_stated_aux(n, d as usize),
            dense.pencil_dims(),
            dense.aux_count()
        );
    }
}
