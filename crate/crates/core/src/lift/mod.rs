//! Lifted LMI representations: linear pencils, linearized inequalities and
//! the representation bundle, plus the dense and block-sparse constructions.

mod dense;
pub mod json;
mod sparse;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use num_traits::{ToPrimitive, Zero};

use crate::poly::{Exponent, Polynomial, Rational};
use crate::sdp::{self, AffineRow, LmiBlock, OptResult, SdpError, SdpProblem, SolverOptions};

pub use dense::{build_dense_lift, build_index, linearize, moment_pencil};
pub use sparse::{
    block_generator_support, block_lattice, build_sparse_lift, detect_partition,
    sparse_moment_pencil, Partition, SparseBlock,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LiftError {
    #[error("constraint degree {degree} exceeds the degree bound {bound}")]
    DegreeOverflow { degree: u32, bound: u32 },
    #[error("point has {got} coordinates, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Solver(#[from] SdpError),
}

/// A variable of a lifted problem: the constant `1`, an original
/// coordinate `x_i`, or an auxiliary variable (an index into the
/// representation's auxiliary table).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    One,
    X(usize),
    Y(usize),
}

/// Bijection between exponents `2 ≤ |α| ≤ 2d` and auxiliary slots.
///
/// Exponents of degree 0 and 1 are not slots: they map to the constant
/// and to the coordinates `x_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableIndex {
    nvars: usize,
    degree_bound: u32,
    slots: Vec<Exponent>,
    lookup: HashMap<Exponent, usize>,
}

impl VariableIndex {
    pub fn new(nvars: usize, degree_bound: u32) -> Self {
        let mut slots = Vec::new();
        for d in 2..=degree_bound {
            crate::poly::exponents_of_degree(nvars, d, &mut slots);
        }
        let lookup = slots.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        VariableIndex {
            nvars,
            degree_bound,
            slots,
            lookup,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    /// Number of auxiliary slots `M`.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Exponent] {
        &self.slots
    }

    pub fn slot(&self, alpha: &Exponent) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// The lifted variable standing for `x^α`.
    pub fn var(&self, alpha: &Exponent) -> Option<Var> {
        match alpha.degree() {
            0 => Some(Var::One),
            1 => alpha.as_unit().map(Var::X),
            _ => self.slot(alpha).map(Var::Y),
        }
    }

    pub fn aux_table(&self) -> Vec<AuxVar> {
        self.slots
            .iter()
            .map(|e| AuxVar {
                label: format!("y{}", e.label()),
                exponent: Some(e.clone()),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxVar {
    pub label: String,
    /// The monomial this variable linearizes, for moment constructions.
    pub exponent: Option<Exponent>,
}

/// Dense symmetric integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSym {
    dim: usize,
    data: Vec<i64>,
}

impl IntSym {
    pub fn zeros(dim: usize) -> Self {
        IntSym {
            dim,
            data: vec![0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.dim + j]
    }

    /// Adds `v` at `(i, j)` and `(j, i)` (once on the diagonal).
    pub fn add_sym(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.dim + j] += v;
        if i != j {
            self.data[j * self.dim + i] += v;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Upper-triangle nonzeros.
    pub fn upper(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (i..self.dim).filter_map(move |j| {
                let v = self.get(i, j);
                (v != 0).then_some((i, j, v))
            })
        })
    }
}

/// Affine symmetric-matrix map `A_0 + Σ x_i A_i + Σ y_k A_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearPencil {
    dim: usize,
    mats: BTreeMap<Var, IntSym>,
    /// Row/column monomials for moment pencils.
    labels: Option<Vec<Exponent>>,
}

impl LinearPencil {
    pub fn new(dim: usize) -> Self {
        LinearPencil {
            dim,
            mats: BTreeMap::new(),
            labels: None,
        }
    }

    pub fn with_labels(labels: Vec<Exponent>) -> Self {
        let mut p = LinearPencil::new(labels.len());
        p.labels = Some(labels);
        p
    }

    /// Moment pencil over `basis`: entry `(i, j)` is the variable of `x^{b_i + b_j}`.
    pub(crate) fn moment(basis: Vec<Exponent>, index: &VariableIndex) -> Self {
        let mut p = LinearPencil::with_labels(basis.clone());
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let alpha = &basis[i] + &basis[j];
                let v = index
                    .var(&alpha)
                    .expect("moment entry degree within the index bound");
                p.add(v, i, j, 1);
            }
        }
        p
    }

    pub fn add(&mut self, var: Var, i: usize, j: usize, v: i64) {
        let dim = self.dim;
        let m = self.mats.entry(var).or_insert_with(|| IntSym::zeros(dim));
        m.add_sym(i, j, v);
        if m.is_zero() {
            self.mats.remove(&var);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mats(&self) -> &BTreeMap<Var, IntSym> {
        &self.mats
    }

    pub fn labels(&self) -> Option<&[Exponent]> {
        self.labels.as_deref()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.mats.keys().copied()
    }

    /// For each position, the variables with a nonzero coefficient there.
    pub fn entry_vars(&self, i: usize, j: usize) -> Vec<(Var, i64)> {
        self.mats
            .iter()
            .filter_map(|(&v, m)| {
                let c = m.get(i, j);
                (c != 0).then_some((v, c))
            })
            .collect()
    }

    /// Each position carries exactly one variable, with coefficient one.
    pub fn has_partition_property(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                let e = self.entry_vars(i, j);
                e.len() == 1 && e[0].1 == 1
            })
        })
    }

    /// Evaluates with `value(var)` supplying each variable.
    pub fn eval(&self, value: impl Fn(Var) -> f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (&v, m) in &self.mats {
            let s = value(v);
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let c = m.get(i, j);
                    if c != 0 {
                        out[(i, j)] += c as f64 * s;
                    }
                }
            }
        }
        out
    }

    /// Entrywise polynomial matrix after substituting `y ↦ x^α` (exact).
    pub fn substitute_monomials(&self, nvars: usize, aux: &[AuxVar]) -> Option<Vec<Vec<Polynomial>>> {
        let mut out = vec![vec![Polynomial::zero(nvars); self.dim]; self.dim];
        for (&v, m) in &self.mats {
            let mono = var_monomial(v, nvars, aux)?;
            for (i, row) in out.iter_mut().enumerate() {
                for (j, entry) in row.iter_mut().enumerate() {
                    let c = m.get(i, j);
                    if c != 0 {
                        *entry = &*entry + &mono.scale(&crate::poly::int(c));
                    }
                }
            }
        }
        Some(out)
    }
}

fn var_monomial(v: Var, nvars: usize, aux: &[AuxVar]) -> Option<Polynomial> {
    Some(match v {
        Var::One => Polynomial::constant(nvars, crate::poly::int(1)),
        Var::X(i) => Polynomial::var(nvars, i),
        Var::Y(k) => Polynomial::monomial(aux.get(k)?.exponent.clone()?, crate::poly::int(1)),
    })
}

/// Affine functional over `(1, x, y)`, meaning `form ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearForm {
    pub coefs: BTreeMap<Var, Rational>,
}

impl LinearForm {
    pub fn add(&mut self, v: Var, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.coefs.entry(v).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coefs.remove(&v);
        }
    }

    pub fn coef(&self, v: Var) -> Rational {
        self.coefs.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, value: impl Fn(Var) -> f64) -> f64 {
        self.coefs
            .iter()
            .map(|(&v, c)| c.to_f64().unwrap_or(f64::NAN) * value(v))
            .sum()
    }

    /// Polynomial obtained by substituting `y ↦ x^α`.
    pub fn substitute_monomials(&self, nvars: usize, aux: &[AuxVar]) -> Option<Polynomial> {
        let mut out = Polynomial::zero(nvars);
        for (&v, c) in &self.coefs {
            out = &out + &var_monomial(v, nvars, aux)?.scale(c);
        }
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Dense,
    Sparse,
    Custom,
}

/// A projected spectrahedron: `{x : ∃y, pencils ⪰ 0, forms ≥ 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpRepresentation {
    pub nvars: usize,
    pub names: Vec<String>,
    pub degree_bound: u32,
    /// Auxiliary variable table; pencils and forms refer to it by position.
    pub aux: Vec<AuxVar>,
    pub pencils: Vec<LinearPencil>,
    pub linear_ineqs: Vec<LinearForm>,
    pub provenance: Provenance,
    /// Block structure, for sparse lifts.
    pub blocks: Vec<SparseBlock>,
}

/// A lifted problem in solver form, with the meaning of each decision variable.
#[derive(Debug, Clone)]
pub struct LiftedProblem {
    pub problem: SdpProblem,
    pub layout: Vec<Var>,
}

/// Result of minimizing `ℓᵀx` over a lift.
#[derive(Debug, Clone)]
pub struct LiftOptimum {
    /// `min ℓᵀx` (`+∞`/`-∞`/NaN mirror infeasible, unbounded and indeterminate).
    pub value: f64,
    pub x: Vec<f64>,
    pub result: OptResult,
}

impl SdpRepresentation {
    /// Auxiliary slots referenced by any pencil or form, ascending.
    pub fn referenced_aux(&self) -> Vec<usize> {
        let mut s = BTreeSet::new();
        for p in &self.pencils {
            for v in p.vars() {
                if let Var::Y(k) = v {
                    s.insert(k);
                }
            }
        }
        for f in &self.linear_ineqs {
            for v in f.coefs.keys() {
                if let Var::Y(k) = v {
                    s.insert(*k);
                }
            }
        }
        s.into_iter().collect()
    }

    pub fn aux_count(&self) -> usize {
        self.referenced_aux().len()
    }

    pub fn aux_labels(&self) -> Vec<String> {
        self.referenced_aux()
            .into_iter()
            .map(|k| self.aux[k].label.clone())
            .collect()
    }

    pub fn pencil_dims(&self) -> Vec<usize> {
        self.pencils.iter().map(LinearPencil::dim).collect()
    }

    /// Solver variables: every `x_i`, then the referenced auxiliaries.
    pub fn layout(&self) -> Vec<Var> {
        (0..self.nvars)
            .map(Var::X)
            .chain(self.referenced_aux().into_iter().map(Var::Y))
            .collect()
    }

    /// `maximize objectiveᵀ(x)` over the lift, in solver form.
    pub fn to_problem(&self, objective_x: &[f64]) -> LiftedProblem {
        let layout = self.layout();
        let pos: HashMap<Var, usize> = layout.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut problem = SdpProblem::new(layout.len());
        for (i, &c) in objective_x.iter().enumerate() {
            problem.objective[i] = c;
        }
        let slot = |v: Var| if v == Var::One { None } else { Some(pos[&v]) };
        for pencil in &self.pencils {
            let mut b = LmiBlock::new(pencil.dim());
            for (&v, m) in pencil.mats() {
                for (i, j, c) in m.upper() {
                    b.add(slot(v), i, j, c as f64);
                }
            }
            problem.blocks.push(b);
        }
        for f in &self.linear_ineqs {
            let mut r = AffineRow::default();
            for (&v, c) in &f.coefs {
                let c = c.to_f64().unwrap_or(f64::NAN);
                match slot(v) {
                    None => r.constant += c,
                    Some(k) => {
                        r.coefs.insert(k, c);
                    }
                }
            }
            problem.ineqs.push(r);
        }
        LiftedProblem { problem, layout }
    }

    /// Lifted problem with `x` fixed; decision variables are the auxiliaries.
    pub fn fixed_x_problem(&self, x: &[f64]) -> Result<LiftedProblem, LiftError> {
        if x.len() != self.nvars {
            return Err(LiftError::Dimension {
                expected: self.nvars,
                got: x.len(),
            });
        }
        let layout: Vec<Var> = self.referenced_aux().into_iter().map(Var::Y).collect();
        let pos: HashMap<Var, usize> = layout.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut problem = SdpProblem::new(layout.len());
        let fixed = |v: Var| match v {
            Var::One => Some(1.0),
            Var::X(i) => Some(x[i]),
            Var::Y(_) => None,
        };
        for pencil in &self.pencils {
            let mut b = LmiBlock::new(pencil.dim());
            for (&v, m) in pencil.mats() {
                for (i, j, c) in m.upper() {
                    match fixed(v) {
                        Some(s) => b.add(None, i, j, c as f64 * s),
                        None => b.add(Some(pos[&v]), i, j, c as f64),
                    }
                }
            }
            problem.blocks.push(b);
        }
        for f in &self.linear_ineqs {
            let mut r = AffineRow::default();
            for (&v, c) in &f.coefs {
                let c = c.to_f64().unwrap_or(f64::NAN);
                match fixed(v) {
                    Some(s) => r.constant += c * s,
                    None => {
                        *r.coefs.entry(pos[&v]).or_insert(0.0) += c;
                    }
                }
            }
            problem.ineqs.push(r);
        }
        Ok(LiftedProblem { problem, layout })
    }

    /// `min ℓᵀx` over the projection of the lift.
    pub fn minimize(&self, ell: &[f64]) -> Result<LiftOptimum, LiftError> {
        self.minimize_with(ell, &SolverOptions::default())
    }

    pub fn minimize_with(&self, ell: &[f64], opts: &SolverOptions) -> Result<LiftOptimum, LiftError> {
        if ell.len() != self.nvars {
            return Err(LiftError::Dimension {
                expected: self.nvars,
                got: ell.len(),
            });
        }
        let neg: Vec<f64> = ell.iter().map(|v| -v).collect();
        let lp = self.to_problem(&neg);
        let result = sdp::solve_with(&lp.problem, opts)?;
        let value = match result.status {
            sdp::SolveStatus::Optimal => -result.value,
            sdp::SolveStatus::Unbounded => f64::NEG_INFINITY,
            sdp::SolveStatus::Infeasible => f64::INFINITY,
            sdp::SolveStatus::Indeterminate => f64::NAN,
        };
        Ok(LiftOptimum {
            value,
            x: result.point[..self.nvars].to_vec(),
            result,
        })
    }

    /// Phase-one margin of the lift at fixed `x`.
    pub fn membership_margin(&self, x: &[f64]) -> Result<OptResult, LiftError> {
        self.membership_margin_with(x, &SolverOptions::default())
    }

    pub fn membership_margin_with(&self, x: &[f64], opts: &SolverOptions) -> Result<OptResult, LiftError> {
        let lp = self.fixed_x_problem(x)?;
        Ok(sdp::feasibility_margin_with(&lp.problem, opts)?)
    }

    /// `y_α := x^α` for every auxiliary, when all of them are moment slots.
    pub fn moment_substitution(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.aux
            .iter()
            .map(|a| a.exponent.as_ref().map(|e| e.eval(x)))
            .collect()
    }

    /// Smallest pencil eigenvalue and form value at `(x, y)`; `y` indexed like `aux`.
    pub fn margin_at(&self, x: &[f64], y: &[f64]) -> f64 {
        let value = |v: Var| match v {
            Var::One => 1.0,
            Var::X(i) => x[i],
            Var::Y(k) => y[k],
        };
        let mut m = f64::INFINITY;
        for p in &self.pencils {
            m = m.min(sdp::min_eigenvalue(&p.eval(value)));
        }
        for f in &self.linear_ineqs {
            m = m.min(f.eval(value));
        }
        m
    }

    /// A copy without the scalar inequalities (pencils only).
    pub fn without_inequalities(&self) -> Self {
        let mut r = self.clone();
        r.linear_ineqs.clear();
        r
    }
}
