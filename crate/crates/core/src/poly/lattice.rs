use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use super::exponent::Exponent;
use super::polynomial::{int, Rational};

/// A finite, deduplicated set of exponents of a common length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSet {
    nvars: usize,
    points: BTreeSet<Exponent>,
}

impl LatticeSet {
    pub fn new(nvars: usize) -> Self {
        LatticeSet {
            nvars,
            points: BTreeSet::new(),
        }
    }

    pub fn from_points<I: IntoIterator<Item = Exponent>>(nvars: usize, points: I) -> Self {
        let mut s = LatticeSet::new(nvars);
        for p in points {
            s.insert(p);
        }
        s
    }

    pub fn insert(&mut self, p: Exponent) -> bool {
        assert_eq!(p.nvars(), self.nvars, "lattice point length mismatch");
        self.points.insert(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &Exponent) -> bool {
        self.points.contains(p)
    }

    /// Points in graded-lex order.
    pub fn points(&self) -> impl Iterator<Item = &Exponent> {
        self.points.iter()
    }

    pub fn to_vec(&self) -> Vec<Exponent> {
        self.points.iter().cloned().collect()
    }

    pub fn union(&self, other: &LatticeSet) -> LatticeSet {
        let mut s = self.clone();
        for p in other.points() {
            s.insert(p.clone());
        }
        s
    }

    pub fn is_subset(&self, other: &LatticeSet) -> bool {
        self.points.is_subset(&other.points)
    }
}

/// Integer points of `conv(s / 2)`, boundary included, decided exactly.
///
/// A candidate `β` from the integer bounding box is kept when `2β` is a
/// convex combination of the points of `s`, which is checked by an exact
/// rational phase-one simplex.
pub fn half_hull_lattice(s: &LatticeSet) -> LatticeSet {
    let n = s.nvars();
    let mut out = LatticeSet::new(n);
    if s.is_empty() {
        return out;
    }
    let pts: Vec<Vec<Rational>> = s
        .points()
        .map(|p| p.entries().iter().map(|&a| int(a as i64)).collect())
        .collect();
    let lo: Vec<u32> = (0..n)
        .map(|j| s.points().map(|p| p.get(j)).min().unwrap_or(0).div_ceil(2))
        .collect();
    let hi: Vec<u32> = (0..n)
        .map(|j| s.points().map(|p| p.get(j)).max().unwrap_or(0) / 2)
        .collect();
    let mut cur = lo.clone();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return out;
    }
    loop {
        let target: Vec<Rational> = cur.iter().map(|&a| int(2 * a as i64)).collect();
        if in_convex_hull(&pts, &target) {
            out.insert(Exponent::new(cur.clone()));
        }
        // odometer over the box
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            if cur[k] < hi[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = lo[k];
            k += 1;
        }
    }
}

/// Exact test of `target ∈ conv(points)`.
pub fn in_convex_hull(points: &[Vec<Rational>], target: &[Rational]) -> bool {
    if points.is_empty() {
        return false;
    }
    let n = target.len();
    // rows: one per coordinate plus the convexity row
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(n + 1);
    let mut rhs: Vec<Rational> = Vec::with_capacity(n + 1);
    for j in 0..n {
        rows.push(points.iter().map(|p| p[j].clone()).collect());
        rhs.push(target[j].clone());
    }
    rows.push(vec![Rational::one(); points.len()]);
    rhs.push(Rational::one());
    phase_one_feasible(rows, rhs)
}

/// Is `{λ ≥ 0 : Aλ = b}` nonempty? Dense tableau, Bland's rule, exact.
fn phase_one_feasible(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> bool {
    let m = a.len();
    let nv = a.first().map_or(0, Vec::len);
    for i in 0..m {
        if b[i].is_negative() {
            b[i] = -b[i].clone();
            for v in a[i].iter_mut() {
                *v = -v.clone();
            }
        }
    }
    // tableau columns: original vars, then artificials, then rhs
    let width = nv + m + 1;
    let mut t: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
            row.push(b[i].clone());
            row
        })
        .collect();
    let mut basis: Vec<usize> = (nv..nv + m).collect();
    // objective: minimize sum of artificials, reduced costs over all columns
    let mut cost = vec![Rational::zero(); width];
    for row in &t {
        for (c, v) in cost.iter_mut().zip(row) {
            *c -= v;
        }
    }
    for k in nv..nv + m {
        cost[k] = Rational::zero();
    }
    loop {
        // Bland: smallest index with negative reduced cost
        let Some(enter) = (0..nv + m).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            // unbounded phase-one objective cannot happen (bounded below by 0)
            break;
        };
        let piv = t[r][enter].clone();
        for v in t[r].iter_mut() {
            *v /= &piv;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r || row[enter].is_zero() {
                continue;
            }
            let f = row[enter].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * p;
            }
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for (v, p) in cost.iter_mut().zip(&pivot_row) {
                *v -= &f * p;
            }
        }
        basis[r] = enter;
    }
    // remaining infeasibility = sum of artificial values in the basis
    basis
        .iter()
        .zip(&t)
        .filter(|(&bv, _)| bv >= nv)
        .all(|(_, row)| row[width - 1].is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(points: &[[u32; 2]]) -> LatticeSet {
        LatticeSet::from_points(2, points.iter().map(|p| Exponent::from(*p)))
    }

    /// Brute force over the bounding box: `β` is kept iff `2β` lies in the
    /// triangle/polygon given by explicit half-planes.
    fn brute_triangle(hull: &[(i64, i64)], bound: i64) -> Vec<[u32; 2]> {
        let mut out = Vec::new();
        for a in 0..=bound {
            for b in 0..=bound {
                let (px, py) = (2 * a, 2 * b);
                // counter-clockwise polygon: cross products all >= 0
                let inside = (0..hull.len()).all(|k| {
                    let (x0, y0) = hull[k];
                    let (x1, y1) = hull[(k + 1) % hull.len()];
                    (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0) >= 0
                });
                if inside {
                    out.push([a as u32, b as u32]);
                }
            }
        }
        out
    }

    #[test]
    fn example_three_support() {
        let s = set(&[[0, 0], [8, 0], [2, 0], [1, 1], [0, 2]]);
        let f = half_hull_lattice(&s);
        assert_eq!(f, set(&[[0, 0], [1, 0], [2, 0], [3, 0], [4, 0], [0, 1]]));
    }

    #[test]
    fn simplex_halving() {
        let s = set(&[[0, 0], [2, 0], [0, 2]]);
        assert_eq!(half_hull_lattice(&s), set(&[[0, 0], [1, 0], [0, 1]]));
    }

    #[test]
    fn quartic_with_cross_term_matches_brute_force() {
        let s = set(&[[0, 0], [4, 0], [0, 4], [2, 2]]);
        // hull of {(0,0),(4,0),(0,4)} (2,2 lies on the edge)
        let want = brute_triangle(&[(0, 0), (4, 0), (0, 4)], 4);
        assert_eq!(half_hull_lattice(&s), set(&want));
        assert_eq!(
            half_hull_lattice(&s),
            set(&[[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]])
        );
    }

    #[test]
    fn odd_only_support_has_no_lattice_points_off_hull() {
        let s = set(&[[1, 1]]);
        assert!(half_hull_lattice(&s).is_empty());
        let s = set(&[[2, 2]]);
        assert_eq!(half_hull_lattice(&s), set(&[[1, 1]]));
    }

    #[test]
    fn motzkin_newton_polytope() {
        let s = set(&[[4, 2], [2, 4], [2, 2], [0, 0]]);
        assert_eq!(
            half_hull_lattice(&s),
            set(&[[0, 0], [1, 1], [2, 1], [1, 2]])
        );
    }

    #[test]
    fn hull_membership_exact() {
        let pts: Vec<Vec<Rational>> = vec![
            vec![int(0), int(0)],
            vec![int(3), int(0)],
            vec![int(0), int(3)],
        ];
        assert!(in_convex_hull(&pts, &[int(1), int(2)]));
        assert!(!in_convex_hull(&pts, &[int(2), int(2)]));
        assert!(in_convex_hull(&pts, &[int(0), int(3)]));
    }
}
