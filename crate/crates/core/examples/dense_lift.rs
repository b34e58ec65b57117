//! The dense moment lift of `{1 - x1^4 - x2^4 - x1^2 x2^2 ≥ 0}`.
//!
//! ```bash
//! cargo run --example dense_lift
//! ```

use sdplift::fixtures::{example1, EXAMPLE1_STATED_AUX};
use sdplift::lift::{build_dense_lift, Var};

fn main() {
    let s = example1();
    let rep = build_dense_lift(&s);
    println!("pencils {:?}, aux {} (stated {EXAMPLE1_STATED_AUX})", rep.pencil_dims(), rep.aux_count());
    println!("aux: {}", rep.aux_labels().join(" "));

    // the moment matrix with symbolic entries
    let m = &rep.pencils[0];
    let name = |v: Var| match v {
        Var::One => "1".to_string(),
        Var::X(i) => rep.names[i].clone(),
        Var::Y(k) => rep.aux[k].label.clone(),
    };
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim())
            .map(|j| {
                let e = m.entry_vars(i, j);
                let parts: Vec<String> = e.iter().map(|&(v, c)| if c == 1 { name(v) } else { format!("{c}{}", name(v)) }).collect();
                format!("{:>4}", parts.join("+"))
            })
            .collect();
        println!("  [{}]", row.join(" "));
    }

    // a point of the set lifts through y_α = x^α
    let x = [0.6, -0.5];
    let y = rep.moment_substitution(&x).unwrap();
    println!("g(x) = {:.4}, lift margin at (x, x^α) = {:.4}", s.min_value(&x), rep.margin_at(&x, &y));
}
