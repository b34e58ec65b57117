//! Brute-force oracles and projection-equivalence reports.
//!
//! The grid oracle never touches the lift, so agreement between the two
//! is evidence that the projection of the lift is the set itself.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::find_interior_point;
use crate::lift::SdpRepresentation;
use crate::poly::{FloatPoly, Polynomial, SemialgebraicSet};
use crate::sdp::{SolveStatus, SolverOptions, EPS_MEMBER};

/// Grid resolution per axis.
pub const GRID_POINTS: usize = 201;
/// Optima agreement tolerance.
pub const TOL_OPT: f64 = 1e-4;
/// Default outside-sample margin, as a fraction of the box half-width.
pub const DEFAULT_DELTA: f64 = 0.05;
/// Number of random directions in the panel.
pub const PANEL_RANDOM: usize = 8;

const STEP_FLOOR: f64 = 1e-8;
const SOUNDNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("no grid point of the box lies in the set")]
    EmptyFeasibleSet,
    #[error("box has {got} intervals for {expected} variables")]
    BoxDimension { expected: usize, got: usize },
    #[error("direction has {got} entries for {expected} variables")]
    Direction { expected: usize, got: usize },
    #[error("found {found} of {wanted} {what} samples")]
    SamplingExhausted { what: &'static str, found: usize, wanted: usize },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Lift(#[from] crate::lift::LiftError),
}

/// Minimizer of linear functionals over `S ∩ box`: best feasible grid
/// point, refined by projected coordinate descent and by a log-barrier
/// Newton path (which handles corners where coordinate moves stall).
pub struct Oracle {
    nvars: usize,
    bbox: Vec<(f64, f64)>,
    g: Vec<FloatPoly>,
    grad: Vec<Vec<FloatPoly>>,
    hess: Vec<Vec<Vec<FloatPoly>>>,
    per_axis: usize,
    /// Feasible grid points, as flat grid indices.
    feasible: Vec<u64>,
    interior: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleValue {
    pub value: f64,
    pub point: Vec<f64>,
}

impl Oracle {
    pub fn new(s: &SemialgebraicSet, bbox: &[(f64, f64)]) -> Result<Self, VerifyError> {
        Self::with_resolution(s, bbox, GRID_POINTS)
    }

    pub fn with_resolution(s: &SemialgebraicSet, bbox: &[(f64, f64)], per_axis: usize) -> Result<Self, VerifyError> {
        let n = s.nvars();
        if bbox.len() != n {
            return Err(VerifyError::BoxDimension {
                expected: n,
                got: bbox.len(),
            });
        }
        let g: Vec<FloatPoly> = s.constraints().iter().map(Polynomial::to_float).collect();
        let mut o = Oracle {
            nvars: n,
            bbox: bbox.to_vec(),
            g,
            grad: s
                .constraints()
                .iter()
                .map(|p| p.gradient().iter().map(Polynomial::to_float).collect())
                .collect(),
            hess: s
                .constraints()
                .iter()
                .map(|p| p.hessian().iter().map(|r| r.iter().map(Polynomial::to_float).collect()).collect())
                .collect(),
            per_axis,
            feasible: Vec::new(),
            interior: Vec::new(),
        };
        let total = (per_axis as u64).pow(n as u32);
        let mut x = vec![0.0; n];
        for flat in 0..total {
            o.grid_point(flat, &mut x);
            if o.contains(&x) {
                o.feasible.push(flat);
            }
        }
        if o.feasible.is_empty() {
            return Err(VerifyError::EmptyFeasibleSet);
        }
        o.interior = find_interior_point(s, bbox).unwrap_or_else(|_| {
            let mut c = vec![0.0; n];
            o.grid_point(o.feasible[o.feasible.len() / 2], &mut c);
            c
        });
        Ok(o)
    }

    fn grid_point(&self, mut flat: u64, x: &mut [f64]) {
        let m = self.per_axis as u64;
        for (i, xi) in x.iter_mut().enumerate() {
            let k = flat % m;
            flat /= m;
            let (lo, hi) = self.bbox[i];
            *xi = if m == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * k as f64 / (m - 1) as f64 };
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.g.iter().all(|g| g.eval(x) >= 0.0)
    }

    fn in_box(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.bbox).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Last feasible point on the segment from the interior point to `y`.
    fn pull_in(&self, y: &[f64]) -> Vec<f64> {
        let c = &self.interior;
        let at = |t: f64| -> Vec<f64> { c.iter().zip(y).map(|(a, b)| a + t * (b - a)).collect() };
        let ok = |x: &[f64]| self.contains(x) && self.in_box(x);
        if ok(y) {
            return y.to_vec();
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ok(&at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(lo)
    }

    /// `min ℓᵀx` over `S ∩ box`.
    pub fn min_linear(&self, ell: &[f64]) -> Result<OracleValue, VerifyError> {
        if ell.len() != self.nvars {
            return Err(VerifyError::Direction {
                expected: self.nvars,
                got: ell.len(),
            });
        }
        let f = |x: &[f64]| -> f64 { ell.iter().zip(x).map(|(a, b)| a * b).sum() };
        let mut x = vec![0.0; self.nvars];
        let mut best = (f64::INFINITY, 0u64);
        for &flat in &self.feasible {
            self.grid_point(flat, &mut x);
            let v = f(&x);
            if v < best.0 {
                best = (v, flat);
            }
        }
        self.grid_point(best.1, &mut x);
        let mut val = best.0;
        // projected coordinate descent with radial projection onto the set
        let mut step = self
            .bbox
            .iter()
            .map(|(lo, hi)| (hi - lo) / (self.per_axis.max(2) - 1) as f64)
            .fold(0.0, f64::max);
        while step >= STEP_FLOOR {
            let mut moved = false;
            for i in 0..self.nvars {
                for sign in [-1.0, 1.0] {
                    let mut y = x.clone();
                    y[i] += sign * step;
                    let y = self.pull_in(&y);
                    let v = f(&y);
                    if v < val - 1e-15 {
                        val = v;
                        x = y;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if let Some((bx, bv)) = self.barrier_min(ell) {
            if bv < val {
                val = bv;
                x = bx;
            }
        }
        Ok(OracleValue { value: val, point: x })
    }

    /// Log-barrier Newton path from the interior point; `None` when the
    /// start is not strictly feasible. Iterates stay strictly feasible.
    fn barrier_min(&self, ell: &[f64]) -> Option<(Vec<f64>, f64)> {
        let n = self.nvars;
        let mut x = self.interior.clone();
        let strictly = |x: &[f64]| {
            self.g.iter().all(|g| g.eval(x) > 0.0) && x.iter().zip(&self.bbox).all(|(v, (lo, hi))| v > lo && v < hi)
        };
        if !strictly(&x) {
            return None;
        }
        let m = (self.g.len() + 2 * n) as f64;
        let phi = |x: &[f64], t: f64| -> f64 {
            let mut v = t * ell.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            for g in &self.g {
                v -= g.eval(x).ln();
            }
            for (xi, (lo, hi)) in x.iter().zip(&self.bbox) {
                v -= (xi - lo).ln() + (hi - xi).ln();
            }
            v
        };
        let mut t = 1.0;
        while m / t > 1e-11 {
            for _ in 0..100 {
                let mut grad = DVector::from_iterator(n, ell.iter().map(|a| t * a));
                let mut hess = DMatrix::<f64>::zeros(n, n);
                for k in 0..self.g.len() {
                    let gv = self.g[k].eval(&x);
                    let dg = DVector::from_iterator(n, self.grad[k].iter().map(|p| p.eval(&x)));
                    let h = DMatrix::from_fn(n, n, |i, j| self.hess[k][i][j].eval(&x));
                    grad -= &dg / gv;
                    hess += &dg * dg.transpose() / (gv * gv) - h / gv;
                }
                for i in 0..n {
                    let (a, b) = (x[i] - self.bbox[i].0, self.bbox[i].1 - x[i]);
                    grad[i] += -1.0 / a + 1.0 / b;
                    hess[(i, i)] += 1.0 / (a * a) + 1.0 / (b * b);
                }
                let mut shift = 0.0;
                let dir = loop {
                    let mut hs = hess.clone();
                    for i in 0..n {
                        hs[(i, i)] += shift;
                    }
                    if let Some(ch) = hs.cholesky() {
                        break -ch.solve(&grad);
                    }
                    shift = if shift == 0.0 { 1e-8 * (1.0 + hess.amax()) } else { shift * 10.0 };
                };
                let dec = -grad.dot(&dir);
                if dec < 1e-14 {
                    break;
                }
                let f0 = phi(&x, t);
                let mut s = 1.0;
                let mut moved = false;
                while s > 1e-14 {
                    let y: Vec<f64> = x.iter().zip(dir.iter()).map(|(a, d)| a + s * d).collect();
                    if strictly(&y) && phi(&y, t) <= f0 - 0.25 * s * dec {
                        x = y;
                        moved = true;
                        break;
                    }
                    s *= 0.5;
                }
                if !moved {
                    break;
                }
            }
            t *= 10.0;
        }
        let v = ell.iter().zip(&x).map(|(a, b)| a * b).sum();
        Some((x, v))
    }
}

/// `min ℓᵀx` over `S ∩ box`, by grid scan and local refinement.
pub fn oracle_min_linear(s: &SemialgebraicSet, ell: &[f64], bbox: &[(f64, f64)]) -> Result<f64, VerifyError> {
    Ok(Oracle::new(s, bbox)?.min_linear(ell)?.value)
}

/// `±e_i`, `(1, …, 1)/√n`, then `PANEL_RANDOM` seeded unit directions.
pub fn ell_panel(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = sign;
            out.push(e);
        }
    }
    out.push(vec![1.0 / (n as f64).sqrt(); n]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < 2 * n + 1 + PANEL_RANDOM {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if r > 1e-3 && r <= 1.0 {
            out.push(v.iter().map(|a| a / r).collect());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimaRow {
    pub ell: Vec<f64>,
    pub oracle: f64,
    pub lift: f64,
    pub delta: f64,
    pub lift_status: SolveStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub inside_samples: usize,
    pub outside_samples: usize,
    /// Points of `S` for which the lift is infeasible.
    pub soundness_failures: usize,
    /// Points at least `delta` outside `S` that the lift accepts.
    pub exactness_failures: usize,
    /// Membership solves that ended indeterminate (counted as failures).
    pub indeterminate: usize,
    pub delta: f64,
    pub optima: Vec<OptimaRow>,
    pub max_delta: f64,
    pub tol_opt: f64,
    pub pass: bool,
}

impl EquivalenceReport {
    pub fn table(&self) -> String {
        let mut s = format!(
            "inside {} (soundness failures {}), outside {} (exactness failures {}), indeterminate {}\n",
            self.inside_samples, self.soundness_failures, self.outside_samples, self.exactness_failures, self.indeterminate
        );
        s.push_str(&format!("{:<28} {:>14} {:>14} {:>10}\n", "direction", "oracle", "lift", "|diff|"));
        for r in &self.optima {
            let ell: Vec<String> = r.ell.iter().map(|v| format!("{v:.3}")).collect();
            s.push_str(&format!(
                "{:<28} {:>14.8} {:>14.8} {:>10.2e}\n",
                format!("({})", ell.join(", ")),
                r.oracle,
                r.lift,
                r.delta
            ));
        }
        s.push_str(&format!("verdict: {}\n", if self.pass { "pass" } else { "fail" }));
        s
    }
}

fn box_radius(bbox: &[(f64, f64)]) -> f64 {
    bbox.iter().map(|(lo, hi)| 0.5 * (hi - lo)).fold(0.0, f64::max)
}

/// Whether `x` passes the soundness check: the moment assignment is
/// feasible, or (for lifts without one) the membership margin is.
fn sound_at(rep: &SdpRepresentation, x: &[f64], opts: &SolverOptions) -> Result<Option<bool>, VerifyError> {
    if let Some(y) = rep.moment_substitution(x) {
        let scale = 1.0 + y.iter().chain(x).fold(0.0f64, |m, v| m.max(v.abs()));
        return Ok(Some(rep.margin_at(x, &y) >= -SOUNDNESS_TOL * scale));
    }
    let r = rep.membership_margin_with(x, opts)?;
    Ok(match r.status {
        SolveStatus::Optimal => Some(r.value >= -EPS_MEMBER),
        SolveStatus::Infeasible => Some(false),
        _ => None,
    })
}

/// Soundness on points of `S`, exactness on points `δ` outside it, and
/// optima over the direction panel.
pub fn projection_equivalence(
    rep: &SdpRepresentation,
    s: &SemialgebraicSet,
    bbox: &[(f64, f64)],
    nsamples: usize,
    delta: f64,
    seed: u64,
) -> Result<EquivalenceReport, VerifyError> {
    projection_equivalence_with(rep, s, bbox, nsamples, delta, seed, &SolverOptions::from_env())
}

pub fn projection_equivalence_with(
    rep: &SdpRepresentation,
    s: &SemialgebraicSet,
    bbox: &[(f64, f64)],
    nsamples: usize,
    delta: f64,
    seed: u64,
    opts: &SolverOptions,
) -> Result<EquivalenceReport, VerifyError> {
    let opts = *opts;
    let oracle = Oracle::new(s, bbox)?;
    let n = s.nvars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample_box = |rng: &mut ChaCha8Rng| -> Vec<f64> { bbox.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect() };

    let mut inside = Vec::new();
    for _ in 0..nsamples * 2000 {
        if inside.len() == nsamples {
            break;
        }
        let x = sample_box(&mut rng);
        if oracle.contains(&x) {
            inside.push(x);
        }
    }
    if inside.len() < nsamples {
        return Err(VerifyError::SamplingExhausted {
            what: "inside",
            found: inside.len(),
            wanted: nsamples,
        });
    }

    // outside: past the boundary crossing along rays from the interior point
    let c = oracle.interior.clone();
    let step_out = delta * box_radius(bbox);
    let mut outside = Vec::new();
    for _ in 0..nsamples * 50 {
        if outside.len() == nsamples {
            break;
        }
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        if r < 1e-6 || r > 1.0 {
            continue;
        }
        let u: Vec<f64> = u.iter().map(|a| a / r).collect();
        let at = |t: f64| -> Vec<f64> { c.iter().zip(&u).map(|(a, b)| a + t * b).collect() };
        let mut hi = box_radius(bbox).max(1.0);
        let mut guard = 0;
        while oracle.contains(&at(hi)) && guard < 60 {
            hi *= 2.0;
            guard += 1;
        }
        if guard == 60 {
            continue;
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if oracle.contains(&at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = at(hi + step_out);
        if !oracle.contains(&x) {
            outside.push(x);
        }
    }
    if outside.len() < nsamples {
        return Err(VerifyError::SamplingExhausted {
            what: "outside",
            found: outside.len(),
            wanted: nsamples,
        });
    }

    let mut soundness_failures = 0;
    let mut exactness_failures = 0;
    let mut indeterminate = 0;
    for x in &inside {
        match sound_at(rep, x, &opts)? {
            Some(true) => {}
            Some(false) => soundness_failures += 1,
            None => indeterminate += 1,
        }
    }
    for x in &outside {
        let r = rep.membership_margin_with(x, &opts)?;
        match r.status {
            SolveStatus::Optimal if r.value >= -EPS_MEMBER => exactness_failures += 1,
            SolveStatus::Optimal | SolveStatus::Infeasible => {}
            _ => indeterminate += 1,
        }
    }

    let mut optima = Vec::new();
    for ell in ell_panel(n, seed) {
        let o = oracle.min_linear(&ell)?;
        let l = rep.minimize_with(&ell, &opts)?;
        optima.push(OptimaRow {
            delta: (o.value - l.value).abs(),
            oracle: o.value,
            lift: l.value,
            lift_status: l.result.status,
            ell,
        });
    }
    let max_delta = optima.iter().map(|r| r.delta).fold(0.0, |m: f64, d| if d.is_nan() { f64::INFINITY } else { m.max(d) });
    let pass = soundness_failures == 0 && exactness_failures == 0 && indeterminate == 0 && max_delta <= TOL_OPT;
    Ok(EquivalenceReport {
        inside_samples: inside.len(),
        outside_samples: outside.len(),
        soundness_failures,
        exactness_failures,
        indeterminate,
        delta,
        optima,
        max_delta,
        tol_opt: TOL_OPT,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftSize {
    pub pencil_dims: Vec<usize>,
    pub aux_count: usize,
}

impl LiftSize {
    pub fn of(rep: &SdpRepresentation) -> Self {
        LiftSize {
            pencil_dims: rep.pencil_dims(),
            aux_count: rep.aux_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub ell: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    pub size_a: LiftSize,
    pub size_b: LiftSize,
}

impl Comparison {
    /// Largest `|a - b|` over the panel.
    pub fn max_ab(&self) -> f64 {
        self.rows.iter().map(|r| (r.a - r.b).abs()).fold(0.0, f64::max)
    }

    /// Largest distance of either lift from the oracle.
    pub fn max_oracle(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.a - r.oracle).abs().max((r.b - r.oracle).abs()))
            .fold(0.0, f64::max)
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "sizes: A pencils {:?}, {} aux; B pencils {:?}, {} aux\n",
            self.size_a.pencil_dims, self.size_a.aux_count, self.size_b.pencil_dims, self.size_b.aux_count
        );
        s.push_str(&format!("{:<28} {:>14} {:>14} {:>14}\n", "direction", "lift A", "lift B", "oracle"));
        for r in &self.rows {
            let ell: Vec<String> = r.ell.iter().map(|v| format!("{v:.3}")).collect();
            s.push_str(&format!(
                "{:<28} {:>14.8} {:>14.8} {:>14.8}\n",
                format!("({})", ell.join(", ")),
                r.a,
                r.b,
                r.oracle
            ));
        }
        s
    }
}

/// Both lifts' optima and the oracle value for each direction.
pub fn compare_lifts(
    a: &SdpRepresentation,
    b: &SdpRepresentation,
    s: &SemialgebraicSet,
    bbox: &[(f64, f64)],
    panel: &[Vec<f64>],
) -> Result<Comparison, VerifyError> {
    let opts = SolverOptions::from_env();
    let oracle = Oracle::new(s, bbox)?;
    let mut rows = Vec::new();
    for ell in panel {
        rows.push(CompareRow {
            a: a.minimize_with(ell, &opts)?.value,
            b: b.minimize_with(ell, &opts)?.value,
            oracle: oracle.min_linear(ell)?.value,
            ell: ell.clone(),
        });
    }
    Ok(Comparison {
        rows,
        size_a: LiftSize::of(a),
        size_b: LiftSize::of(b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::canonical_names;

    fn set(n: usize, cons: &[&str]) -> SemialgebraicSet {
        SemialgebraicSet::parse(&canonical_names(n), cons).unwrap()
    }

    #[test]
    fn interval_oracle() {
        let s = set(1, &["1 - x1^2"]);
        let v = oracle_min_linear(&s, &[1.0], &[(-2.0, 2.0)]).unwrap();
        assert!((v + 1.0).abs() < 1e-7, "{v}");
        let v = oracle_min_linear(&s, &[-1.0], &[(-2.0, 2.0)]).unwrap();
        assert!((v + 1.0).abs() < 1e-7, "{v}");
    }

    #[test]
    fn disk_oracle_diagonal() {
        let s = set(2, &["1 - x1^2 - x2^2"]);
        let o = Oracle::new(&s, &[(-1.5, 1.5), (-1.5, 1.5)]).unwrap();
        let r = 1.0 / 2f64.sqrt();
        let v = o.min_linear(&[r, r]).unwrap();
        assert!((v.value + 1.0).abs() < 1e-6, "{v:?}");
    }

    #[test]
    fn empty_set() {
        let s = set(1, &["-1 - x1^2"]);
        assert!(matches!(oracle_min_linear(&s, &[1.0], &[(-1.0, 1.0)]), Err(VerifyError::EmptyFeasibleSet)));
    }

    #[test]
    fn larger_box_never_increases() {
        let s = set(2, &["1 - x1^4 - x2^4 - x1^2*x2^2"]);
        let ell = [0.3, -0.8];
        let a = oracle_min_linear(&s, &ell, &[(-0.9, 0.9), (-0.9, 0.9)]).unwrap();
        let b = oracle_min_linear(&s, &ell, &[(-1.5, 1.5), (-1.5, 1.5)]).unwrap();
        assert!(b <= a + 1e-9);
    }

    #[test]
    fn panel_shape() {
        let p = ell_panel(2, 7);
        assert_eq!(p.len(), 13);
        assert_eq!(p[0], vec![1.0, 0.0]);
        assert!(p.iter().all(|v| (v.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-12));
        assert_eq!(ell_panel(2, 7), p);
    }
}
