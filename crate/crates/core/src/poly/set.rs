use super::parse::{parse_polynomial, validate_names, ParseError};
use super::polynomial::{canonical_names, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SetError {
    #[error("a semialgebraic set needs at least one constraint")]
    Empty,
    #[error("constraint {index} has {got} variables, expected {expected}")]
    VariableCount {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("constraint {index}: {source}")]
    Parse { index: usize, source: ParseError },
    #[error("constraint {index}: expected the form `expr >= 0`")]
    NotAnInequality { index: usize },
    #[error(transparent)]
    Names(ParseError),
}

/// `{x : g_1(x) ≥ 0, …, g_m(x) ≥ 0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemialgebraicSet {
    nvars: usize,
    constraints: Vec<Polynomial>,
    names: Vec<String>,
}

impl SemialgebraicSet {
    pub fn new(constraints: Vec<Polynomial>) -> Result<Self, SetError> {
        let nvars = constraints.first().ok_or(SetError::Empty)?.nvars();
        Self::with_names(constraints, canonical_names(nvars))
    }

    pub fn with_names(constraints: Vec<Polynomial>, names: Vec<String>) -> Result<Self, SetError> {
        if constraints.is_empty() {
            return Err(SetError::Empty);
        }
        validate_names(&names).map_err(SetError::Names)?;
        let nvars = names.len();
        for (index, g) in constraints.iter().enumerate() {
            if g.nvars() != nvars {
                return Err(SetError::VariableCount {
                    index,
                    expected: nvars,
                    got: g.nvars(),
                });
            }
        }
        Ok(SemialgebraicSet {
            nvars,
            constraints,
            names,
        })
    }

    /// Parses constraints written as `expr >= 0` (the `>= 0` suffix is optional).
    pub fn parse<S: AsRef<str>>(names: &[String], constraints: &[S]) -> Result<Self, SetError> {
        let mut polys = Vec::with_capacity(constraints.len());
        for (index, text) in constraints.iter().enumerate() {
            let text = text.as_ref();
            let expr = match text.split_once(">=") {
                Some((lhs, rhs)) => {
                    if rhs.trim() != "0" {
                        return Err(SetError::NotAnInequality { index });
                    }
                    lhs
                }
                None => text,
            };
            let p = parse_polynomial(expr, names).map_err(|source| SetError::Parse { index, source })?;
            polys.push(p);
        }
        Self::with_names(polys, names.to_vec())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn constraints(&self) -> &[Polynomial] {
        &self.constraints
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Maximum constraint degree.
    pub fn degree(&self) -> u32 {
        self.constraints.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    /// Appends constraints, returning a new set.
    pub fn with_constraints(&self, extra: impl IntoIterator<Item = Polynomial>) -> Self {
        let mut constraints = self.constraints.clone();
        constraints.extend(extra);
        SemialgebraicSet::with_names(constraints, self.names.clone()).expect("same variable count")
    }

    /// Appends `x_i ≥ 0` for every variable.
    pub fn with_nonnegative_orthant(&self) -> Self {
        self.with_constraints((0..self.nvars).map(|i| Polynomial::var(self.nvars, i)))
    }

    /// `min_k g_k(x)`.
    pub fn min_value(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|g| g.eval(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.min_value(x) >= 0.0
    }

    /// Constraint text in the problem-file grammar.
    pub fn constraint_strings(&self) -> Vec<String> {
        self.constraints
            .iter()
            .map(|g| format!("{} >= 0", g.display_with(&self.names)))
            .collect()
    }
}
