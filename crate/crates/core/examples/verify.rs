//! Sample-based projection check, including a deliberately truncated lift.
//!
//! ```bash
//! cargo run --release --example verify
//! ```

use sdplift::fixtures::{example1, example4};
use sdplift::lift::{build_dense_lift, build_sparse_lift};
use sdplift::verify::projection_equivalence;

fn main() {
    let s = example1();
    let bbox = vec![(-1.5, 1.5); 2];
    let rep = build_dense_lift(&s);
    println!("example 1, dense lift");
    print!("{}", projection_equivalence(&rep, &s, &bbox, 100, 0.05, 0).unwrap().table());

    println!("\nexample 1, dense lift without the linearized constraint");
    let r = projection_equivalence(&rep.without_inequalities(), &s, &bbox, 20, 0.05, 0).unwrap();
    println!("exactness failures {}, pass {}", r.exactness_failures, r.pass);

    let s = example4(2, 2);
    let r = projection_equivalence(&build_sparse_lift(&s), &s, &[(-4.0, 2.0); 2], 100, 0.05, 1).unwrap();
    println!("\nexample 4 (n=2, d=2), sparse lift: pass {}, max |diff| {:.2e}", r.pass, r.max_delta);
}
