//! Boundary sampling and curvature diagnostics.
//!
//! Sampling can only refute positive curvature: a clean report says the
//! second fundamental form was definite at every sampled point, nothing
//! about the points in between.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::poly::{FloatPoly, Polynomial, SemialgebraicSet};
use crate::sdp::min_eigenvalue;

/// Boundary samples satisfy `|g_i| ≤ EPS_BD`.
pub const EPS_BD: f64 = 1e-8;
/// Second fundamental form threshold.
pub const EPS_CURV: f64 = 1e-6;
/// Gradient norm threshold for nondegeneracy.
pub const EPS_ND: f64 = 1e-8;

const RAY_ATTEMPTS_PER_SAMPLE: usize = 50;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("no interior point found in the box")]
    NoInteriorPoint,
    #[error("box has {got} intervals for {expected} variables")]
    BoxDimension { expected: usize, got: usize },
    #[error("constraint index {0} out of range")]
    Active(usize),
    #[error("coordinate {index} is {value}, expected positive")]
    NonPositive { index: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub point: Vec<f64>,
    pub active: usize,
    /// Columns form an orthonormal basis of `∇g_active(point)⊥`.
    pub tangent_basis: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySamples {
    pub samples: Vec<BoundarySample>,
    pub requested: usize,
    pub interior: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureVerdict {
    PositivelyCurvedOnSamples,
    Degenerate,
    CurvatureFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub samples: usize,
    pub requested: usize,
    /// Minimum of `-vᵀ∇²g_i v` over samples and unit tangent `v`.
    pub min_sff: f64,
    pub min_grad_norm: f64,
    pub verdict: CurvatureVerdict,
    /// Per-sample minimum, in sample order.
    pub per_sample: Vec<f64>,
    pub note: String,
}

struct Compiled {
    g: Vec<FloatPoly>,
    grad: Vec<Vec<FloatPoly>>,
    hess: Vec<Vec<Vec<FloatPoly>>>,
}

impl Compiled {
    fn new(s: &SemialgebraicSet) -> Self {
        let g = s.constraints().iter().map(Polynomial::to_float).collect();
        let grad = s
            .constraints()
            .iter()
            .map(|p| p.gradient().iter().map(Polynomial::to_float).collect())
            .collect();
        let hess = s
            .constraints()
            .iter()
            .map(|p| {
                p.hessian()
                    .iter()
                    .map(|row| row.iter().map(Polynomial::to_float).collect())
                    .collect()
            })
            .collect();
        Compiled { g, grad, hess }
    }

    fn min_g(&self, x: &[f64]) -> (f64, usize) {
        self.g
            .iter()
            .enumerate()
            .map(|(k, g)| (g.eval(x), k))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    }

    fn gradient(&self, k: usize, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(x.len(), self.grad[k].iter().map(|p| p.eval(x)))
    }

    fn hessian(&self, k: usize, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        DMatrix::from_fn(n, n, |i, j| self.hess[k][i][j].eval(x))
    }
}

fn check_box(s: &SemialgebraicSet, bbox: &[(f64, f64)]) -> Result<(), GeometryError> {
    if bbox.len() != s.nvars() {
        return Err(GeometryError::BoxDimension {
            expected: s.nvars(),
            got: bbox.len(),
        });
    }
    Ok(())
}

/// Point of the box maximizing `min_k g_k`, if that minimum is positive.
pub fn find_interior_point(s: &SemialgebraicSet, bbox: &[(f64, f64)]) -> Result<Vec<f64>, GeometryError> {
    check_box(s, bbox)?;
    let c = Compiled::new(s);
    let n = s.nvars();
    let per_axis: usize = match n {
        1 => 201,
        2 => 41,
        3 => 15,
        4 => 7,
        _ => 3,
    };
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx
            .iter()
            .zip(bbox)
            .map(|(&i, &(lo, hi))| lo + (hi - lo) * (i as f64 + 0.5) / per_axis as f64)
            .collect();
        let v = c.min_g(&x).0;
        if v > best.0 {
            best = (v, x);
        }
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    // compass search on min_k g_k
    let (mut val, mut x) = best;
    let mut step: Vec<f64> = bbox.iter().map(|(lo, hi)| (hi - lo) / per_axis as f64).collect();
    while step.iter().any(|&h| h > 1e-9) {
        let mut moved = false;
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] = (y[i] + sign * step[i]).clamp(bbox[i].0, bbox[i].1);
                let v = c.min_g(&y).0;
                if v > val {
                    val = v;
                    x = y;
                    moved = true;
                }
            }
        }
        if !moved {
            for h in &mut step {
                *h *= 0.5;
            }
        }
    }
    if val > 1e-9 {
        Ok(x)
    } else {
        Err(GeometryError::NoInteriorPoint)
    }
}

/// Orthonormal basis of `u⊥` (as columns), by Gram–Schmidt on the unit vectors.
pub fn tangent_basis(u: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len();
    let u = u.normalize();
    let mut cols: Vec<DVector<f64>> = vec![u.clone()];
    let mut order: Vec<usize> = (0..n).collect();
    // least aligned with u first, for conditioning
    order.sort_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()));
    for i in order {
        if cols.len() == n {
            break;
        }
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let d = c.dot(&v);
                v -= c * d;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / norm);
        }
    }
    DMatrix::from_columns(&cols[1..]).resize(n, n - 1, 0.0)
}

fn ray_exit(x: &[f64], u: &[f64], bbox: &[(f64, f64)]) -> f64 {
    let mut t = f64::INFINITY;
    for i in 0..x.len() {
        if u[i] > 0.0 {
            t = t.min((bbox[i].1 - x[i]) / u[i]);
        } else if u[i] < 0.0 {
            t = t.min((bbox[i].0 - x[i]) / u[i]);
        }
    }
    t
}

/// Points of `Z_active ∩ ∂S` found by bisection along seeded random rays
/// from an interior point (found automatically when `interior` is `None`).
pub fn sample_boundary(
    s: &SemialgebraicSet,
    active: usize,
    count: usize,
    seed: u64,
    bbox: &[(f64, f64)],
    interior: Option<&[f64]>,
) -> Result<BoundarySamples, GeometryError> {
    check_box(s, bbox)?;
    if active >= s.constraints().len() {
        return Err(GeometryError::Active(active));
    }
    let c = Compiled::new(s);
    let n = s.nvars();
    let center = match interior {
        Some(p) if c.min_g(p).0 > 0.0 => p.to_vec(),
        Some(_) => return Err(GeometryError::NoInteriorPoint),
        None => find_interior_point(s, bbox)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    let at = |t: f64, u: &[f64]| -> Vec<f64> { center.iter().zip(u).map(|(a, b)| a + t * b).collect() };
    for _ in 0..count * RAY_ATTEMPTS_PER_SAMPLE {
        if samples.len() == count {
            break;
        }
        // uniform direction: rejection from the cube to the unit ball
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || norm > 1.0 {
            continue;
        }
        u.iter_mut().for_each(|v| *v /= norm);
        let t_max = ray_exit(&center, &u, bbox);
        if c.min_g(&at(t_max, &u)).0 >= 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (0.0, t_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if c.min_g(&at(mid, &u)).0 >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let point = at(lo, &u);
        let (gmin, k) = c.min_g(&point);
        let gi = c.g[active].eval(&point);
        if k != active && gi > gmin + EPS_BD {
            continue;
        }
        if gi.abs() > EPS_BD || gmin < -EPS_BD {
            continue;
        }
        let grad = c.gradient(active, &point);
        let tangent = if grad.norm() > 0.0 {
            tangent_basis(&grad)
        } else {
            DMatrix::identity(n, n)
        };
        samples.push(BoundarySample {
            point,
            active,
            tangent_basis: tangent,
        });
    }
    Ok(BoundarySamples {
        samples,
        requested: count,
        interior: center,
    })
}

/// Minimum eigenvalue of `-Bᵀ ∇²g_i B` at one sample.
pub fn second_fundamental_form_min(s: &SemialgebraicSet, sample: &BoundarySample) -> f64 {
    let c = Compiled::new(s);
    sff_min(&c, sample)
}

fn sff_min(c: &Compiled, sample: &BoundarySample) -> f64 {
    let b = &sample.tangent_basis;
    if b.ncols() == 0 {
        return f64::INFINITY;
    }
    let h = c.hessian(sample.active, &sample.point);
    let m = -(b.transpose() * h * b);
    min_eigenvalue(&((&m + m.transpose()) * 0.5))
}

pub fn curvature_check(s: &SemialgebraicSet, samples: &BoundarySamples) -> CurvatureReport {
    let c = Compiled::new(s);
    let per_sample: Vec<f64> = samples.samples.iter().map(|b| sff_min(&c, b)).collect();
    let min_sff = per_sample.iter().copied().fold(f64::INFINITY, f64::min);
    let min_grad_norm = samples
        .samples
        .iter()
        .map(|b| c.gradient(b.active, &b.point).norm())
        .fold(f64::INFINITY, f64::min);
    let verdict = if samples.samples.is_empty() {
        CurvatureVerdict::CurvatureFailure
    } else if min_grad_norm <= EPS_ND {
        CurvatureVerdict::Degenerate
    } else if min_sff > EPS_CURV {
        CurvatureVerdict::PositivelyCurvedOnSamples
    } else {
        CurvatureVerdict::CurvatureFailure
    };
    let mut note = String::from(
        "sampled check only: a positive verdict holds at the sampled boundary points, not on all of the boundary",
    );
    if samples.samples.len() < samples.requested {
        note.push_str(&format!(
            "; found {} of {} requested samples",
            samples.samples.len(),
            samples.requested
        ));
    }
    CurvatureReport {
        samples: samples.samples.len(),
        requested: samples.requested,
        min_sff,
        min_grad_norm,
        verdict,
        per_sample,
        note,
    }
}

/// The product-set inequality `-∇²g + ∇g∇gᵀ ⪰ (g + 1) diag(1/x_i²)` for
/// `g = x_1⋯x_n - 1`, checked at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductInequality {
    pub point: Vec<f64>,
    pub min_eig: f64,
    pub holds: bool,
}

pub fn example5_inequality_check(n: usize, points: &[Vec<f64>]) -> Result<Vec<ProductInequality>, GeometryError> {
    let names = crate::poly::canonical_names(n);
    let g = crate::poly::parse_polynomial(&format!("{} - 1", names.join("*")), &names)
        .expect("product polynomial parses");
    let s = SemialgebraicSet::new(vec![g]).expect("one constraint");
    let c = Compiled::new(&s);
    points
        .iter()
        .map(|x| {
            if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| **v <= 0.0) {
                return Err(GeometryError::NonPositive { index, value });
            }
            let gv = c.g[0].eval(x);
            let grad = c.gradient(0, x);
            let mut d = -c.hessian(0, x) + &grad * grad.transpose();
            for i in 0..n {
                d[(i, i)] -= (gv + 1.0) / (x[i] * x[i]);
            }
            let min_eig = min_eigenvalue(&d);
            Ok(ProductInequality {
                point: x.clone(),
                min_eig,
                holds: min_eig >= -1e-8,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::canonical_names;

    fn set(n: usize, cons: &[&str]) -> SemialgebraicSet {
        SemialgebraicSet::parse(&canonical_names(n), cons).unwrap()
    }

    #[test]
    fn disk_samples_lie_on_the_circle() {
        let s = set(2, &["1 - x1^2 - x2^2"]);
        let bx = [(-2.0, 2.0), (-2.0, 2.0)];
        let out = sample_boundary(&s, 0, 8, 1, &bx, None).unwrap();
        assert_eq!(out.samples.len(), 8);
        for b in &out.samples {
            let r = (b.point[0].powi(2) + b.point[1].powi(2)).sqrt();
            assert!((r - 1.0).abs() < 1e-8);
        }
        let rep = curvature_check(&s, &out);
        assert!((rep.min_sff - 2.0).abs() < 1e-9);
        assert_eq!(rep.verdict, CurvatureVerdict::PositivelyCurvedOnSamples);
    }

    #[test]
    fn empty_interior() {
        let s = set(1, &["-1 - x1^2"]);
        assert_eq!(
            sample_boundary(&s, 0, 4, 0, &[(-2.0, 2.0)], None),
            Err(GeometryError::NoInteriorPoint)
        );
    }

    #[test]
    fn flat_face_fails() {
        let s = set(2, &["1 - x1"]);
        let bx = [(-2.0, 2.0), (-2.0, 2.0)];
        let out = sample_boundary(&s, 0, 16, 3, &bx, None).unwrap();
        assert!(!out.samples.is_empty());
        let rep = curvature_check(&s, &out);
        assert_eq!(rep.min_sff, 0.0);
        assert_eq!(rep.verdict, CurvatureVerdict::CurvatureFailure);
    }

    #[test]
    fn tangent_bases_are_orthonormal() {
        for u in [vec![1.0, 0.0, 0.0], vec![0.3, -2.0, 1.0], vec![1e-12, 1.0, 1e-12]] {
            let u = DVector::from_vec(u);
            let b = tangent_basis(&u);
            assert_eq!(b.ncols(), 2);
            let gram = b.transpose() * &b;
            assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-10);
            assert!((b.transpose() * u.normalize()).amax() < 1e-10);
        }
    }

    #[test]
    fn product_inequality_points() {
        let r = example5_inequality_check(2, &[vec![1.0, 1.0], vec![2.0, 0.5]]).unwrap();
        assert!(r.iter().all(|p| p.holds));
        assert!(r[0].min_eig.abs() < 1e-12);
        assert!(example5_inequality_check(3, &[vec![1.0, 1.0, 1.0]]).unwrap()[0].holds);
        assert!(matches!(
            example5_inequality_check(2, &[vec![-1.0, -1.0]]),
            Err(GeometryError::NonPositive { index: 0, .. })
        ));
    }
}
