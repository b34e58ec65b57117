use crate::poly::{monomial_basis, Polynomial, SemialgebraicSet};

use super::{LiftError, LinearForm, LinearPencil, Provenance, SdpRepresentation, VariableIndex};

/// Index for the smallest even degree bound `2d ≥ max deg g_k` (at least 2).
pub fn build_index(s: &SemialgebraicSet) -> VariableIndex {
    let deg = s.degree().max(1);
    let bound = deg + deg % 2;
    VariableIndex::new(s.nvars(), bound)
}

/// `M_d(x, y)`, rows and columns labeled by all monomials of degree `≤ d`.
pub fn moment_pencil(index: &VariableIndex) -> LinearPencil {
    let d = index.degree_bound() / 2;
    LinearPencil::moment(monomial_basis(index.nvars(), d), index)
}

/// Replaces every `x^α` with `|α| ≥ 2` by its auxiliary variable.
pub fn linearize(g: &Polynomial, index: &VariableIndex) -> Result<LinearForm, LiftError> {
    if g.degree() > index.degree_bound() {
        return Err(LiftError::DegreeOverflow {
            degree: g.degree(),
            bound: index.degree_bound(),
        });
    }
    let mut f = LinearForm::default();
    for (alpha, c) in g.terms() {
        let v = index.var(alpha).expect("degree checked against the bound");
        f.add(v, c.clone());
    }
    Ok(f)
}

/// The moment relaxation: one pencil `M_d ⪰ 0` and one linearized row per constraint.
pub fn build_dense_lift(s: &SemialgebraicSet) -> SdpRepresentation {
    let index = build_index(s);
    let pencil = moment_pencil(&index);
    let linear_ineqs = s
        .constraints()
        .iter()
        .map(|g| linearize(g, &index).expect("index covers the set's degree"))
        .collect();
    SdpRepresentation {
        nvars: s.nvars(),
        names: s.names().to_vec(),
        degree_bound: index.degree_bound(),
        aux: index.aux_table(),
        pencils: vec![pencil],
        linear_ineqs,
        provenance: Provenance::Dense,
        blocks: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::Var;
    use crate::poly::{canonical_names, int, Exponent};

    fn set(names: usize, cons: &[&str]) -> SemialgebraicSet {
        SemialgebraicSet::parse(&canonical_names(names), cons).unwrap()
    }

    fn binom(n: usize, k: usize) -> usize {
        (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
    }

    #[test]
    fn index_degree_bounds() {
        let s = set(2, &["1 - x1^4 - x2^4 - x1^2*x2^2"]);
        let idx = build_index(&s);
        assert_eq!(idx.degree_bound(), 4);
        assert_eq!(idx.len(), 12);
        let lin = set(2, &["1 - x1", "x2"]);
        assert_eq!(build_index(&lin).degree_bound(), 2);
        let s3 = set(2, &["1 - x1^8 - x1^2 - x1*x2 - x2^2"]);
        let idx3 = build_index(&s3);
        assert_eq!(idx3.degree_bound(), 8);
        assert_eq!(idx3.len(), binom(10, 8) - 3);
        let odd = set(1, &["1 - x1^3"]);
        assert_eq!(build_index(&odd).degree_bound(), 4);
    }

    #[test]
    fn smallest_hankel() {
        let idx = VariableIndex::new(1, 2);
        let p = moment_pencil(&idx);
        assert_eq!(p.dim(), 2);
        assert_eq!(p.entry_vars(0, 0), vec![(Var::One, 1)]);
        assert_eq!(p.entry_vars(0, 1), vec![(Var::X(0), 1)]);
        assert_eq!(p.entry_vars(1, 1), vec![(Var::Y(0), 1)]);
    }

    #[test]
    fn example_one_layout() {
        let idx = VariableIndex::new(2, 4);
        let p = moment_pencil(&idx);
        assert_eq!(p.dim(), 6);
        assert!(p.has_partition_property());
        let y = |e: [u32; 2]| Var::Y(idx.slot(&Exponent::from(e)).unwrap());
        // row/col labels (1, x1, x2, y20, y11, y02); 0-based positions
        assert_eq!(p.entry_vars(2, 2), vec![(y([0, 2]), 1)]);
        assert_eq!(p.entry_vars(2, 5), vec![(y([0, 3]), 1)]);
        assert_eq!(p.entry_vars(5, 2), vec![(y([0, 3]), 1)]);
        assert_eq!(p.entry_vars(3, 5), vec![(y([2, 2]), 1)]);
        assert_eq!(p.entry_vars(5, 5), vec![(y([0, 4]), 1)]);
    }

    #[test]
    fn rank_one_substitution() {
        let s = set(2, &["1 - x1^4 - x2^4 - x1^2*x2^2"]);
        let rep = build_dense_lift(&s);
        let u = [1.0, 2.0];
        let y = rep.moment_substitution(&u).unwrap();
        let value = |v: Var| match v {
            Var::One => 1.0,
            Var::X(i) => u[i],
            Var::Y(k) => y[k],
        };
        let m = rep.pencils[0].eval(value);
        let basis = crate::poly::monomial_basis(2, 2);
        let mv: Vec<f64> = basis.iter().map(|e| e.eval(&u)).collect();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(m[(i, j)], mv[i] * mv[j]);
            }
        }
        let eig = nalgebra::SymmetricEigen::new(m).eigenvalues;
        let mut e: Vec<f64> = eig.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        assert!(e[..5].iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn linearize_examples() {
        let s = set(2, &["1 - x1^4 - x2^4 - x1^2*x2^2"]);
        let idx = build_index(&s);
        let f = linearize(&s.constraints()[0], &idx).unwrap();
        let y = |e: [u32; 2]| Var::Y(idx.slot(&Exponent::from(e)).unwrap());
        assert_eq!(f.coefs.len(), 4);
        assert_eq!(f.coef(Var::One), int(1));
        assert_eq!(f.coef(y([4, 0])), int(-1));
        assert_eq!(f.coef(y([0, 4])), int(-1));
        assert_eq!(f.coef(y([2, 2])), int(-1));

        let s3 = set(2, &["1 - x1^8 - x1^2 - x1*x2 - x2^2"]);
        let idx3 = build_index(&s3);
        let f3 = linearize(&s3.constraints()[0], &idx3).unwrap();
        let y3 = |e: [u32; 2]| Var::Y(idx3.slot(&Exponent::from(e)).unwrap());
        for e in [[8, 0], [2, 0], [1, 1], [0, 2]] {
            assert_eq!(f3.coef(y3(e)), int(-1));
        }
        assert_eq!(f3.coefs.len(), 5);

        let lin = set(1, &["x1"]);
        let f = linearize(&lin.constraints()[0], &build_index(&lin)).unwrap();
        assert_eq!(f.coefs.len(), 1);
        assert_eq!(f.coef(Var::X(0)), int(1));
    }

    #[test]
    fn linearize_rejects_overflow() {
        let idx = VariableIndex::new(1, 2);
        let g = Polynomial::from_int_terms(1, &[(&[4], 1)]);
        assert_eq!(
            linearize(&g, &idx),
            Err(LiftError::DegreeOverflow { degree: 4, bound: 2 })
        );
    }

    #[test]
    fn dense_lift_sizes() {
        let s = set(2, &["1 - x1^4 - x2^4 - x1^2*x2^2"]);
        let rep = build_dense_lift(&s);
        assert_eq!(rep.pencil_dims(), vec![6]);
        assert_eq!(rep.linear_ineqs.len(), 1);
        assert_eq!(rep.aux_count(), 12);
        assert_eq!(rep.provenance, Provenance::Dense);

        // Example 2 family with B = I, d = 2: 1 - y40 - y04
        let s2 = set(2, &["1 - x1^4 - x2^4"]);
        let rep2 = build_dense_lift(&s2);
        let idx = build_index(&s2);
        let f = &rep2.linear_ineqs[0];
        assert_eq!(f.coefs.len(), 3);
        assert_eq!(f.coef(Var::Y(idx.slot(&Exponent::from([4, 0])).unwrap())), int(-1));
        assert_eq!(f.coef(Var::Y(idx.slot(&Exponent::from([0, 4])).unwrap())), int(-1));
        assert_eq!(rep2.pencil_dims(), vec![6]);

        let s1 = set(1, &["1 - x1^2"]);
        let rep1 = build_dense_lift(&s1);
        assert_eq!(rep1.pencil_dims(), vec![2]);
        assert_eq!(rep1.aux_count(), 1);
        assert_eq!(rep1.aux[0].label, "y2");
    }

    #[test]
    fn aux_count_is_binomial() {
        for n in 1..=3usize {
            for half in 1..=3u32 {
                let g = Polynomial::monomial(Exponent::unit(n, 0), int(1)).pow(2 * half);
                let s = SemialgebraicSet::new(vec![g]).unwrap();
                let rep = build_dense_lift(&s);
                let d2 = 2 * half as usize;
                assert_eq!(rep.aux_count(), binom(n + d2, d2) - n - 1);
                assert_eq!(rep.pencil_dims()[0], binom(n + half as usize, half as usize));
            }
        }
    }
}
