//! Boundary curvature of `{x1 x2 x3 ≥ 1}` in a box, and of a half-plane.
//!
//! ```bash
//! cargo run --example curvature
//! ```

use sdplift::fixtures::example5;
use sdplift::geometry::{curvature_check, example5_inequality_check, sample_boundary};
use sdplift::poly::{canonical_names, SemialgebraicSet};

fn main() {
    for n in [2, 3] {
        let (s, bbox) = example5(n);
        let samples = sample_boundary(&s, 0, 64, 7, &bbox, None).unwrap();
        let r = curvature_check(&s, &samples);
        let points: Vec<Vec<f64>> = samples.samples.iter().map(|b| b.point.clone()).collect();
        let ineq = example5_inequality_check(n, &points).unwrap();
        let worst = ineq.iter().map(|q| q.min_eig).fold(f64::INFINITY, f64::min);
        println!(
            "n={n}: {} samples, min sff {:.4e}, verdict {:?}, product inequality min eig {worst:.3e}",
            r.samples, r.min_sff, r.verdict
        );
    }

    let flat = SemialgebraicSet::parse(&canonical_names(2), &["1 - x1 >= 0"]).unwrap();
    let samples = sample_boundary(&flat, 0, 16, 0, &[(-2.0, 2.0); 2], None).unwrap();
    println!("half-plane: verdict {:?}", curvature_check(&flat, &samples).verdict);
}
