//! Minimize linear functionals over lifts and compare them.
//!
//! ```bash
//! cargo run --release --example optimize
//! ```

use sdplift::fixtures::{example3, example4, intro_hand_lift, intro_set};
use sdplift::lift::{build_dense_lift, build_sparse_lift};
use sdplift::verify::{compare_lifts, ell_panel};

fn main() {
    let s = example4(1, 1);
    let opt = build_sparse_lift(&s).minimize(&[1.0]).unwrap();
    println!("min x over 1 - x - x^2/2 >= 0: {:.10} (-1 - sqrt 3 = {:.10})", opt.value, -1.0 - 3f64.sqrt());

    let s = intro_set();
    let bbox = vec![(-1.5, 1.5); 2];
    let cmp = compare_lifts(&intro_hand_lift(), &build_dense_lift(&s), &s, &bbox, &ell_panel(2, 0)).unwrap();
    println!("hand lift vs dense lift on 1 - x1^4 - x2^4 >= 0");
    print!("{}", cmp.table());

    let s = example3(true);
    let cmp = compare_lifts(&build_sparse_lift(&s), &build_dense_lift(&s), &s, &bbox, &ell_panel(2, 0)).unwrap();
    println!("example 3: max |sparse - dense| = {:.2e}, max vs oracle = {:.2e}", cmp.max_ab(), cmp.max_oracle());
}
