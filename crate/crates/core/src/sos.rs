//! Sum-of-squares, sos-convexity and sos-concavity checks.
//!
//! A certificate is a PSD Gram matrix `G` with `m(x)ᵀ G m(x) = p(x)` over a
//! monomial basis `m` taken from the halved Newton polytope of `p`. When no
//! certificate exists a seeded multistart search looks for a point where
//! the claimed-nonnegative quantity is negative.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::poly::{half_hull_lattice, Exponent, FloatPoly, LatticeSet, Polynomial};
use crate::sdp::{self, LmiBlock, SdpError, SdpProblem, SolveStatus, SolverOptions};

/// Gram minimum-eigenvalue tolerance.
pub const EPS_PSD: f64 = 1e-7;
/// Coefficient reconstruction tolerance.
pub const EPS_COEF: f64 = 1e-7;
/// Witness values must fall below `-EPS_WIT`.
pub const EPS_WIT: f64 = 1e-6;

const STARTS: usize = 100;
const SEARCH_BOX: f64 = 2.0;
const SEED: u64 = 0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SosError {
    #[error("polynomial of odd degree {0} cannot be a sum of squares")]
    OddDegree(u32),
    #[error(transparent)]
    Solver(#[from] SdpError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SosCertificate {
    pub basis: Vec<Exponent>,
    pub gram: DMatrix<f64>,
    pub residual: f64,
    pub min_eig: f64,
}

impl SosCertificate {
    pub fn is_valid(&self) -> bool {
        self.min_eig >= -EPS_PSD && self.residual <= EPS_COEF
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefutationKind {
    NotSos,
    NotSosConvex,
    NotConcave,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refutation {
    pub kind: RefutationKind,
    /// Point where the quantity is negative, when one was found.
    pub point: Option<Vec<f64>>,
    /// Hessian direction, for convexity failures.
    pub direction: Option<Vec<f64>>,
    /// The quantity at the witness, or the optimal Gram margin without one.
    pub value: f64,
    /// Optimal Gram margin `max t` with `G ⪰ tI`.
    pub gram_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SosOutcome {
    Certified(SosCertificate),
    Refuted(Refutation),
    Indeterminate { reason: String, gram_margin: Option<f64> },
}

impl SosOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, SosOutcome::Certified(c) if c.is_valid())
    }

    pub fn certificate(&self) -> Option<&SosCertificate> {
        match self {
            SosOutcome::Certified(c) => Some(c),
            _ => None,
        }
    }

    pub fn refutation(&self) -> Option<&Refutation> {
        match self {
            SosOutcome::Refuted(r) => Some(r),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            SosOutcome::Certified(_) => "certified",
            SosOutcome::Refuted(_) => "refuted",
            SosOutcome::Indeterminate { .. } => "indeterminate",
        }
    }

    /// JSON report: status plus the certificate or refutation fields.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            SosOutcome::Certified(c) => {
                let gram: Vec<f64> = (0..c.gram.nrows())
                    .flat_map(|i| (0..c.gram.ncols()).map(move |j| (i, j)))
                    .map(|(i, j)| c.gram[(i, j)])
                    .collect();
                json!({
                    "status": "certified",
                    "basis": c.basis.iter().map(|e| e.entries().to_vec()).collect::<Vec<_>>(),
                    "gram": gram,
                    "residual": c.residual,
                    "min_eig": c.min_eig,
                })
            }
            SosOutcome::Refuted(r) => json!({
                "status": "refuted",
                "kind": r.kind,
                "witness": r.point,
                "direction": r.direction,
                "value": r.value,
                "gram_margin": r.gram_margin,
            }),
            SosOutcome::Indeterminate { reason, gram_margin } => json!({
                "status": "indeterminate",
                "reason": reason,
                "gram_margin": gram_margin,
            }),
        }
    }
}

/// Result of the Gram margin SDP for a fixed basis.
#[derive(Debug, Clone)]
pub enum GramResult {
    /// Margin and the Gram matrix attaining it. The margin is optimal
    /// unless the solve stalled at a point that already certifies.
    Solved { margin: f64, gram: DMatrix<f64> },
    /// Some target monomial is not a sum `b_i + b_j` of basis elements.
    Unrepresentable(Exponent),
    Failed(String),
}

/// `max t` s.t. `G ⪰ tI`, `m(x)ᵀ G m(x) ≡ p`, with `m` given by `basis`.
pub fn gram_margin(p: &Polynomial, basis: &[Exponent]) -> Result<GramResult, SdpError> {
    let n = basis.len();
    // positions grouped by the exponent b_i + b_j they contribute to
    let mut groups: BTreeMap<Exponent, Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            groups.entry(&basis[i] + &basis[j]).or_default().push((i, j));
        }
    }
    for alpha in p.terms().keys() {
        if !groups.contains_key(alpha) {
            return Ok(GramResult::Unrepresentable(alpha.clone()));
        }
    }
    if n == 0 {
        return Ok(GramResult::Solved {
            margin: 0.0,
            gram: DMatrix::zeros(0, 0),
        });
    }
    // One pivot per group is solved for; the other positions are free.
    // G = G0 + Σ z_k G_k, and t is the last variable.
    let mut free: Vec<(usize, usize)> = Vec::new();
    let mut block = LmiBlock::new(n);
    for (alpha, pos) in &groups {
        let pivot_at = pos.iter().position(|&(i, j)| i == j).unwrap_or(0);
        let (pi, pj) = pos[pivot_at];
        let wp = if pi == pj { 1.0 } else { 2.0 };
        let target = p.coeff(alpha).to_f64().unwrap_or(f64::NAN);
        block.add(None, pi, pj, target / wp);
        for (k, &(i, j)) in pos.iter().enumerate() {
            if k == pivot_at {
                continue;
            }
            let w = if i == j { 1.0 } else { 2.0 };
            let var = free.len();
            free.push((i, j));
            block.add(Some(var), i, j, 1.0);
            block.add(Some(var), pi, pj, -w / wp);
        }
    }
    let t = free.len();
    for i in 0..n {
        block.add(Some(t), i, i, -1.0);
    }
    let mut prob = SdpProblem::new(t + 1);
    prob.objective[t] = 1.0;
    prob.blocks.push(block);
    let r = sdp::solve_with(&prob, &SolverOptions::default())?;
    let mut z = r.point.clone();
    if r.status != SolveStatus::Optimal {
        // When p vanishes somewhere every Gram matrix is singular and the
        // iteration can stall at margin 0. Optimality is only needed to
        // refute, so a stalled iterate that already certifies is kept.
        if z.len() == t + 1 && z.iter().all(|v| v.is_finite()) {
            z[t] = 0.0;
            let gram = prob.blocks[0].eval(&z);
            let margin = sdp::min_eigenvalue(&gram);
            if margin >= -EPS_PSD {
                return Ok(GramResult::Solved { margin, gram });
            }
        }
        return Ok(GramResult::Failed(format!("{:?}: {}", r.status, r.message)));
    }
    z[t] = 0.0;
    let gram = prob.blocks[0].eval(&z);
    Ok(GramResult::Solved {
        margin: r.value,
        gram,
    })
}

/// Max coefficient mismatch between `m(x)ᵀ G m(x)` and `p`.
pub fn gram_residual(p: &Polynomial, basis: &[Exponent], gram: &DMatrix<f64>) -> f64 {
    let mut coef: BTreeMap<Exponent, f64> = BTreeMap::new();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            *coef.entry(&basis[i] + &basis[j]).or_insert(0.0) += gram[(i, j)];
        }
    }
    for (alpha, c) in p.terms() {
        *coef.entry(alpha.clone()).or_insert(0.0) -= c.to_f64().unwrap_or(f64::NAN);
    }
    coef.values().fold(0.0, |m, v| m.max(v.abs()))
}

fn certificate_from(p: &Polynomial, basis: Vec<Exponent>, gram: DMatrix<f64>) -> SosCertificate {
    let residual = gram_residual(p, &basis, &gram);
    let min_eig = if basis.is_empty() { 0.0 } else { sdp::min_eigenvalue(&gram) };
    SosCertificate {
        basis,
        gram,
        residual,
        min_eig,
    }
}

/// Runs the Gram SDP over `basis`; `Err` carries the margin when negative.
fn gram_check(p: &Polynomial, basis: Vec<Exponent>) -> Result<Result<SosCertificate, f64>, String> {
    match gram_margin(p, &basis) {
        Ok(GramResult::Solved { margin, gram }) => {
            if margin >= -EPS_PSD {
                let cert = certificate_from(p, basis, gram);
                if cert.is_valid() {
                    return Ok(Ok(cert));
                }
                Err(format!(
                    "Gram margin {margin:.3e} but certificate fails checks (min_eig {:.3e}, residual {:.3e})",
                    cert.min_eig, cert.residual
                ))
            } else {
                Ok(Err(margin))
            }
        }
        Ok(GramResult::Unrepresentable(_)) => Ok(Err(f64::NEG_INFINITY)),
        Ok(GramResult::Failed(msg)) => Err(msg),
        Err(e) => Err(e.to_string()),
    }
}

/// Certificate that `p` is a sum of squares, or a refutation.
pub fn sos_certificate(p: &Polynomial) -> Result<SosOutcome, SosError> {
    if p.degree() % 2 == 1 {
        return Err(SosError::OddDegree(p.degree()));
    }
    let basis = half_hull_lattice(&p.support()).to_vec();
    Ok(match gram_check(p, basis) {
        Ok(Ok(cert)) => SosOutcome::Certified(cert),
        Ok(Err(margin)) => {
            let (point, value) = match minimize_poly(p) {
                Some((x, v)) if v < -EPS_WIT => (Some(x), v),
                _ => (None, margin),
            };
            SosOutcome::Refuted(Refutation {
                kind: RefutationKind::NotSos,
                point,
                direction: None,
                value,
                gram_margin: margin,
            })
        }
        Err(reason) => SosOutcome::Indeterminate {
            reason,
            gram_margin: None,
        },
    })
}

/// Certificate over an explicit basis (no Newton-polytope reduction).
pub fn sos_certificate_with_basis(p: &Polynomial, basis: Vec<Exponent>) -> SosOutcome {
    match gram_check(p, basis) {
        Ok(Ok(cert)) => SosOutcome::Certified(cert),
        Ok(Err(margin)) => SosOutcome::Refuted(Refutation {
            kind: RefutationKind::NotSos,
            point: None,
            direction: None,
            value: margin,
            gram_margin: margin,
        }),
        Err(reason) => SosOutcome::Indeterminate {
            reason,
            gram_margin: None,
        },
    }
}

/// `h(x, v) = vᵀ ∇²p(x) v` in `2n` variables, `x` first.
pub fn hessian_form(p: &Polynomial) -> Polynomial {
    let n = p.nvars();
    let h = p.hessian();
    let mut out = Polynomial::zero(2 * n);
    for i in 0..n {
        for j in 0..n {
            if h[i][j].is_zero() {
                continue;
            }
            let vi = Polynomial::var(2 * n, n + i);
            let vj = Polynomial::var(2 * n, n + j);
            out = &out + &(&h[i][j].extended(2 * n) * &(&vi * &vj));
        }
    }
    out
}

/// Basis `x^β v_j` for the Hessian form: the halved Newton polytope of
/// `h` in `(x, v)`, whose points all have degree one in `v`.
pub fn hessian_form_basis(h: &Polynomial) -> Vec<Exponent> {
    let support: LatticeSet = h.support();
    half_hull_lattice(&support).to_vec()
}

/// Certificate that `vᵀ ∇²p(x) v` is a sum of squares in `(x, v)`.
pub fn is_sos_convex(p: &Polynomial) -> Result<SosOutcome, SosError> {
    let h = hessian_form(p);
    if h.is_zero() {
        return Ok(SosOutcome::Certified(SosCertificate {
            basis: Vec::new(),
            gram: DMatrix::zeros(0, 0),
            residual: 0.0,
            min_eig: 0.0,
        }));
    }
    let gram = if h.degree() % 2 == 1 {
        Ok(Err(f64::NEG_INFINITY))
    } else {
        gram_check(&h, hessian_form_basis(&h))
    };
    Ok(match gram {
        Ok(Ok(cert)) => SosOutcome::Certified(cert),
        Ok(Err(margin)) => {
            let (point, direction, value) = match minimize_hessian_eig(p) {
                Some((x, v, lam)) if lam < -EPS_WIT => (Some(x), Some(v), lam),
                _ => (None, None, margin),
            };
            SosOutcome::Refuted(Refutation {
                kind: RefutationKind::NotSosConvex,
                point,
                direction,
                value,
                gram_margin: margin,
            })
        }
        Err(reason) => SosOutcome::Indeterminate {
            reason,
            gram_margin: None,
        },
    })
}

/// `is_sos_convex(-g)`; a witness-backed refutation is reported as
/// `NotConcave` since it shows `g` is not even concave.
pub fn is_sos_concave(g: &Polynomial) -> Result<SosOutcome, SosError> {
    let mut out = is_sos_convex(&-g)?;
    if let SosOutcome::Refuted(r) = &mut out {
        if r.point.is_some() {
            r.kind = RefutationKind::NotConcave;
        }
    }
    Ok(out)
}

fn start_points(n: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..STARTS)
        .map(|_| (0..n).map(|_| rng.gen_range(-SEARCH_BOX..=SEARCH_BOX)).collect())
        .collect()
}

fn clamp_box(x: &mut [f64]) {
    for v in x {
        *v = v.clamp(-SEARCH_BOX, SEARCH_BOX);
    }
}

fn normalize(x: &mut [f64]) {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r > 0.0 {
        for v in x {
            *v /= r;
        }
    } else if let Some(v) = x.first_mut() {
        *v = 1.0;
    }
}

/// Projected gradient descent with backtracking.
fn descend(f: &dyn Fn(&[f64]) -> (f64, Vec<f64>), project: fn(&mut [f64]), start: &[f64]) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    project(&mut x);
    let (mut fx, mut g) = f(&x);
    let mut step = 0.1;
    for _ in 0..300 {
        let mut improved = false;
        while step > 1e-12 {
            let mut y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            project(&mut y);
            let (fy, gy) = f(&y);
            if fy < fx - 1e-14 {
                x = y;
                fx = fy;
                g = gy;
                step *= 2.0;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, fx)
}

/// Orders near-tied minimizers: smaller absolute coordinates first
/// (lexicographically), then fewer negative coordinates.
fn canonical_order(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    let key = |x: &[f64]| -> Vec<f64> { x.iter().map(|v| (v.abs() * 1e6).round()).collect() };
    let neg = |x: &[f64]| x.iter().filter(|v| **v < -1e-6).count();
    key(a)
        .partial_cmp(&key(b))
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(neg(a).cmp(&neg(b)))
}

/// Multistart: unit sphere first, then the box. Among minimizers tied to
/// within `1e-9` the canonical one is returned.
fn multistart(n: usize, f: &dyn Fn(&[f64]) -> (f64, Vec<f64>)) -> Option<(Vec<f64>, f64)> {
    if n == 0 {
        return None;
    }
    let starts = start_points(n);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for project in [normalize as fn(&mut [f64]), clamp_box] {
        let runs: Vec<(Vec<f64>, f64)> = starts.iter().map(|s| descend(f, project, s)).collect();
        let low = runs.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let tol = 1e-9 * low.abs().max(1.0);
        let pick = runs
            .into_iter()
            .filter(|r| r.1 <= low + tol)
            .min_by(|a, b| canonical_order(&a.0, &b.0));
        if let Some(p) = pick {
            if best.as_ref().is_none_or(|(_, b)| p.1 < *b - tol) {
                best = Some(p);
            }
        }
        if best.as_ref().is_some_and(|(_, b)| *b < -EPS_WIT) {
            break;
        }
    }
    best
}

/// Seeded multistart minimization of `p`.
pub fn minimize_poly(p: &Polynomial) -> Option<(Vec<f64>, f64)> {
    let n = p.nvars();
    let fp = p.to_float();
    let grad: Vec<FloatPoly> = p.gradient().iter().map(Polynomial::to_float).collect();
    let f = move |x: &[f64]| (fp.eval(x), grad.iter().map(|g| g.eval(x)).collect());
    multistart(n, &f)
}

/// Seeded multistart minimization of `λ_min(∇²p(x))`; returns `(x, v, λ)`.
pub fn minimize_hessian_eig(p: &Polynomial) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let n = p.nvars();
    let hess = p.hessian();
    let h: Vec<Vec<FloatPoly>> = hess
        .iter()
        .map(|row| row.iter().map(Polynomial::to_float).collect())
        .collect();
    let dh: Vec<Vec<Vec<FloatPoly>>> = (0..n)
        .map(|k| {
            hess.iter()
                .map(|row| row.iter().map(|e| e.derivative(k).to_float()).collect())
                .collect()
        })
        .collect();
    let eval = |m: &[Vec<FloatPoly>], x: &[f64]| DMatrix::from_fn(n, n, |i, j| m[i][j].eval(x));
    let lowest = |x: &[f64]| {
        let e = SymmetricEigen::new(eval(&h, x));
        let k = e.eigenvalues.imin();
        (e.eigenvalues[k], e.eigenvectors.column(k).into_owned())
    };
    let f = |x: &[f64]| {
        let (lam, v): (f64, DVector<f64>) = lowest(x);
        let grad = (0..n).map(|k| (eval(&dh[k], x) * &v).dot(&v)).collect();
        (lam, grad)
    };
    let (x, lam) = multistart(n, &f)?;
    let (_, v) = lowest(&x);
    // sign: largest entry positive
    let k = v.iamax();
    let v = if v[k] < 0.0 { -v } else { v };
    Some((x, v.iter().copied().collect(), lam))
}
