use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

/// A multi-index `α`, standing for the monomial `x^α = x_1^{α_1} ⋯ x_n^{α_n}`.
///
/// Ordering is graded lexicographic: lower total degree first, and within a
/// degree the exponent with the larger leading entry first, so that for two
/// variables the degree-2 monomials come out as `x1^2, x1*x2, x2^2`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(entries: Vec<u32>) -> Self {
        Exponent(entries)
    }

    pub fn zero(nvars: usize) -> Self {
        Exponent(vec![0; nvars])
    }

    /// The unit exponent `e_i`.
    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Exponent(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Index of the variable when this is a unit exponent `e_i`.
    pub fn as_unit(&self) -> Option<usize> {
        if self.degree() != 1 {
            return None;
        }
        self.0.iter().position(|&a| a == 1)
    }

    /// Indices of the variables that occur with a positive power.
    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, _)| i)
    }

    /// True when every positive entry lies in `block`.
    pub fn supported_in(&self, block: &[usize]) -> bool {
        self.variables().all(|i| block.contains(&i))
    }

    /// `x^α` in floating point.
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(point)
            .map(|(&a, &x)| x.powi(a as i32))
            .product()
    }

    /// Exponent with entry `i` lowered by one, or `None` if it is zero.
    pub fn lowered(&self, i: usize) -> Option<Exponent> {
        if self.0[i] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[i] -= 1;
        Some(Exponent(e))
    }

    /// Embed into a larger variable space by appending zeros.
    pub fn extended(&self, nvars: usize) -> Exponent {
        let mut e = self.0.clone();
        e.resize(nvars, 0);
        Exponent(e)
    }

    /// Compact `y`-style label such as `22` or `8,0` for wide exponents.
    pub fn label(&self) -> String {
        if self.0.iter().all(|&a| a < 10) {
            self.0.iter().map(|a| a.to_string()).collect()
        } else {
            self.0
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }
}

impl Add for &Exponent {
    type Output = Exponent;

    fn add(self, rhs: &Exponent) -> Exponent {
        assert_eq!(self.nvars(), rhs.nvars(), "exponent length mismatch");
        Exponent(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Exponent(v)
    }
}

impl<const N: usize> From<[u32; N]> for Exponent {
    fn from(v: [u32; N]) -> Self {
        Exponent(v.to_vec())
    }
}

/// All exponents of `nvars` variables with degree at most `maxdeg`, graded-lex.
///
/// The length is `C(nvars + maxdeg, maxdeg)`.
pub fn monomial_basis(nvars: usize, maxdeg: u32) -> Vec<Exponent> {
    let mut out = Vec::new();
    for d in 0..=maxdeg {
        exponents_of_degree(nvars, d, &mut out);
    }
    out
}

/// Exponents of exact degree `d`, appended in graded-lex order.
pub fn exponents_of_degree(nvars: usize, d: u32, out: &mut Vec<Exponent>) {
    fn rec(prefix: &mut Vec<u32>, remaining: u32, slots: usize, out: &mut Vec<Exponent>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(Exponent(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in (0..=remaining).rev() {
            prefix.push(a);
            rec(prefix, remaining - a, slots - 1, out);
            prefix.pop();
        }
    }
    if nvars == 0 {
        if d == 0 {
            out.push(Exponent(Vec::new()));
        }
        return;
    }
    rec(&mut Vec::with_capacity(nvars), d, nvars, out);
}
