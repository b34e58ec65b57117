//! Worked example sets and the hand-built lift of `{1 - x1^4 - x2^4 ≥ 0}`.

use crate::lift::{AuxVar, LinearPencil, Provenance, SdpRepresentation, Var};
use crate::poly::{canonical_names, int, rational, Exponent, Polynomial, SemialgebraicSet};

/// Auxiliary-variable counts stated alongside the worked examples; the
/// constructions here may differ, and reports print both.
pub const EXAMPLE1_STATED_AUX: usize = 12;
pub const EXAMPLE3_STATED_AUX: usize = 11;
pub fn example4_stated_aux(n: usize, d: usize) -> usize {
    2 * n * (d.saturating_sub(1))
}

fn parse(n: usize, cons: &[&str]) -> SemialgebraicSet {
    SemialgebraicSet::parse(&canonical_names(n), cons).expect("fixture parses")
}

/// `1 - x1^4 - x2^4 + x1^2*x2^2`, the constraint as printed. Not concave.
pub fn example1_printed() -> SemialgebraicSet {
    parse(2, &["1 - x1^4 - x2^4 + x1^2*x2^2"])
}

/// `1 - x1^4 - x2^4 - x1^2*x2^2`, the sign-corrected constraint.
pub fn example1() -> SemialgebraicSet {
    parse(2, &["1 - x1^4 - x2^4 - x1^2*x2^2"])
}

/// `p = [x^d]ᵀ B [x^d]` with `[x^d] = (x_1^d, …, x_n^d)`.
pub fn example2_polynomial(d: u32, b: &[Vec<i64>]) -> Polynomial {
    let n = b.len();
    let mut p = Polynomial::zero(n);
    for (i, row) in b.iter().enumerate() {
        for (j, &bij) in row.iter().enumerate() {
            let mut e = vec![0u32; n];
            e[i] += d;
            e[j] += d;
            p.add_term(Exponent::new(e), int(bij));
        }
    }
    p
}

/// `W = d²B + (3d² - 2d) diag(B)`, the matrix claimed to factor the Hessian.
pub fn example2_w(d: u32, b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let d = d as i64;
    (0..b.len())
        .map(|i| {
            (0..b.len())
                .map(|j| d * d * b[i][j] + if i == j { (3 * d * d - 2 * d) * b[i][i] } else { 0 })
                .collect()
        })
        .collect()
}

/// `diag([x^{d-1}]) · W · diag([x^{d-1}])` as a polynomial matrix.
pub fn example2_claimed_hessian(d: u32, b: &[Vec<i64>]) -> Vec<Vec<Polynomial>> {
    let n = b.len();
    let w = example2_w(d, b);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut e = vec![0u32; n];
                    e[i] += d - 1;
                    e[j] += d - 1;
                    Polynomial::monomial(Exponent::new(e), int(w[i][j]))
                })
                .collect()
        })
        .collect()
}

/// `1 - x1^8 - x1^2 - x1*x2 - x2^2`, with `x ≥ 0` appended when `orthant`.
pub fn example3(orthant: bool) -> SemialgebraicSet {
    let s = parse(2, &["1 - x1^8 - x1^2 - x1*x2 - x2^2"]);
    if orthant {
        s.with_nonnegative_orthant()
    } else {
        s
    }
}

/// `1 - Σ_i Σ_{k=1}^{2d} x_i^k / k!`.
pub fn example4(n: usize, d: u32) -> SemialgebraicSet {
    let mut g = Polynomial::constant(n, int(1));
    for i in 0..n {
        let mut fact: i64 = 1;
        for k in 1..=2 * d {
            fact *= k as i64;
            let mut e = vec![0u32; n];
            e[i] = k;
            g.add_term(Exponent::new(e), -rational(1, fact));
        }
    }
    SemialgebraicSet::new(vec![g]).expect("fixture is valid")
}

/// `x1⋯xn - 1 ≥ 0` inside the box `[0.1, 10]^n`, box constraints included.
pub fn example5(n: usize) -> (SemialgebraicSet, Vec<(f64, f64)>) {
    let names = canonical_names(n);
    let product = names.join("*");
    let mut cons = vec![format!("{product} - 1")];
    for v in &names {
        cons.push(format!("{v} - 1/10"));
        cons.push(format!("10 - {v}"));
    }
    let refs: Vec<&str> = cons.iter().map(String::as_str).collect();
    (parse(n, &refs), vec![(0.1, 10.0); n])
}

/// The three-block lift of `{1 - x1^4 - x2^4 ≥ 0}` with auxiliaries `w1, w2`:
/// `[[1, x2], [x2, w2]]`, `[[1 + w1, w2], [w2, 1 - w1]]`, `[[1, x1], [x1, w1]]`.
pub fn intro_hand_lift() -> SdpRepresentation {
    let (w1, w2) = (Var::Y(0), Var::Y(1));
    let mut a = LinearPencil::new(2);
    a.add(Var::One, 0, 0, 1);
    a.add(Var::X(1), 0, 1, 1);
    a.add(w2, 1, 1, 1);
    let mut b = LinearPencil::new(2);
    b.add(Var::One, 0, 0, 1);
    b.add(w1, 0, 0, 1);
    b.add(w2, 0, 1, 1);
    b.add(Var::One, 1, 1, 1);
    b.add(w1, 1, 1, -1);
    let mut c = LinearPencil::new(2);
    c.add(Var::One, 0, 0, 1);
    c.add(Var::X(0), 0, 1, 1);
    c.add(w1, 1, 1, 1);
    SdpRepresentation {
        nvars: 2,
        names: canonical_names(2),
        degree_bound: 4,
        aux: vec![
            AuxVar {
                label: "w1".into(),
                exponent: Some(Exponent::from([2, 0])),
            },
            AuxVar {
                label: "w2".into(),
                exponent: Some(Exponent::from([0, 2])),
            },
        ],
        pencils: vec![a, b, c],
        linear_ineqs: Vec::new(),
        provenance: Provenance::Custom,
        blocks: Vec::new(),
    }
}

/// The set the hand lift represents.
pub fn intro_set() -> SemialgebraicSet {
    parse(2, &["1 - x1^4 - x2^4"])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_four_coefficients() {
        let s = example4(1, 2);
        let want = Polynomial::from_terms(
            1,
            [
                (Exponent::from([0]), int(1)),
                (Exponent::from([1]), int(-1)),
                (Exponent::from([2]), rational(-1, 2)),
                (Exponent::from([3]), rational(-1, 6)),
                (Exponent::from([4]), rational(-1, 24)),
            ],
        );
        assert_eq!(s.constraints()[0], want);
        assert_eq!(example4_stated_aux(2, 2), 4);
    }

    #[test]
    fn example_two_polynomial() {
        let p = example2_polynomial(2, &[vec![1, 1], vec![1, 1]]);
        assert_eq!(p, Polynomial::from_int_terms(2, &[(&[4, 0], 1), (&[2, 2], 2), (&[0, 4], 1)]));
        assert_eq!(example2_w(1, &[vec![1, 1], vec![1, 1]]), vec![vec![2, 1], vec![1, 2]]);
    }

    #[test]
    fn example_five_box() {
        let (s, bx) = example5(3);
        assert_eq!(s.constraints().len(), 7);
        assert!(s.contains(&[1.0, 2.0, 0.5]));
        assert!(!s.contains(&[1.0, 1.0, 0.5]));
        assert_eq!(bx.len(), 3);
    }

    #[test]
    fn hand_lift_moment_point() {
        let rep = intro_hand_lift();
        let x = [0.6, -0.7];
        let y = rep.moment_substitution(&x).unwrap();
        assert!(rep.margin_at(&x, &y) >= -1e-12);
        let x = [0.9, 0.9];
        let y = rep.moment_substitution(&x).unwrap();
        assert!(rep.margin_at(&x, &y) < 0.0);
    }
}
