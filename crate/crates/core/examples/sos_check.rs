//! Sos-concavity certificates and refutation witnesses.
//!
//! ```bash
//! cargo run --example sos_check
//! ```

use sdplift::fixtures::{example1, example1_printed, example3};
use sdplift::poly::{canonical_names, parse_polynomial};
use sdplift::sos::{is_sos_concave, is_sos_convex, sos_certificate, SosOutcome};

fn show(label: &str, o: &SosOutcome) {
    match o {
        SosOutcome::Certified(c) => println!(
            "{label}: certified, basis {}, residual {:.1e}, min eig {:.3}",
            c.basis.len(),
            c.residual,
            c.min_eig
        ),
        SosOutcome::Refuted(r) => println!(
            "{label}: refuted ({:?}) at {:?} dir {:?}, value {:.4}",
            r.kind, r.point, r.direction, r.value
        ),
        SosOutcome::Indeterminate { reason, .. } => println!("{label}: indeterminate ({reason})"),
    }
}

fn main() {
    let names = canonical_names(2);
    for (label, s) in [("example 1", example1()), ("example 1 as printed", example1_printed()), ("example 3", example3(false))] {
        show(label, &is_sos_concave(&s.constraints()[0]).unwrap());
    }

    let motzkin = parse_polynomial("x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1", &names).unwrap();
    show("motzkin sos", &sos_certificate(&motzkin).unwrap());

    let p = parse_polynomial("x1^4 - 2*x1^2*x2^2 + x2^4", &names).unwrap();
    show("(x1^2 - x2^2)^2 sos-convex", &is_sos_convex(&p).unwrap());
    let p = parse_polynomial("x1^4 + 2*x1^2*x2^2 + x2^4", &names).unwrap();
    show("(x1^2 + x2^2)^2 sos-convex", &is_sos_convex(&p).unwrap());
}
