//! Parse a constraint, differentiate it and enumerate the half Newton polytope.
//!
//! ```bash
//! cargo run --example polynomials
//! ```

use sdplift::poly::{canonical_names, half_hull_lattice, parse_polynomial};

fn main() {
    let names = canonical_names(2);
    let g = parse_polynomial("1 - x1^8 - x1^2 - x1*x2 - x2^2", &names).unwrap();
    println!("g        = {}", g.display_with(&names));
    println!("degree   = {}", g.degree());
    for (i, d) in g.gradient().iter().enumerate() {
        println!("dg/d{}   = {}", names[i], d.display_with(&names));
    }
    println!("g(0.5, -0.25) = {}", g.eval(&[0.5, -0.25]));

    let support = g.support();
    let half = half_hull_lattice(&support);
    let pts: Vec<String> = half.points().map(|e| e.label()).collect();
    println!("support    {}", support.len());
    println!("half hull  {}", pts.join(" "));
}
