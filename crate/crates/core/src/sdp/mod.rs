//! Small dense semidefinite solver.
//!
//! Problems are posed as `maximize cᵀz` subject to affine PSD blocks and
//! scalar affine inequalities. Infeasibility is decided by an explicit
//! phase-one problem that maximizes the common margin `t`.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

mod ipm;
mod problem;
pub mod sdpa;

pub use problem::{
    min_eigenvalue, AffineRow, LmiBlock, OptResult, SdpError, SdpProblem, SolveStatus, SymMat,
};

/// Default relative duality-gap tolerance.
pub const EPS_GAP: f64 = 1e-8;
/// PSD tolerance on reported optimal points.
pub const EPS_PSD: f64 = 1e-7;
/// Membership threshold on the phase-one margin.
pub const EPS_MEMBER: f64 = 1e-5;
/// Upper cap on the phase-one margin; only its sign carries meaning.
pub const MARGIN_CAP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub eps_gap: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eps_gap: EPS_GAP,
            max_iterations: ipm::MAX_ITERATIONS,
        }
    }
}

impl SolverOptions {
    /// Defaults, with `SDPLIFT_TOL_GAP` overriding the gap tolerance.
    pub fn from_env() -> Self {
        SolverOptions::default().env_override()
    }

    /// `self`, with `SDPLIFT_TOL_GAP` overriding the gap tolerance when set.
    pub fn env_override(self) -> Self {
        let mut o = self;
        if let Some(v) = std::env::var("SDPLIFT_TOL_GAP")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| *v > 0.0)
        {
            o.eps_gap = v;
        }
        o
    }
}

static SOLVES: AtomicUsize = AtomicUsize::new(0);
static DUALITY_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);
static WORST_EXCESS_BITS: AtomicU64 = AtomicU64::new(0);

/// Process-wide counts over every converged interior-point solve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SolveStats {
    pub converged_solves: usize,
    /// Solves whose objective exceeded the dual bound by more than `EPS_GAP`.
    pub weak_duality_violations: usize,
    /// Largest observed `value - bound`, or zero.
    pub worst_excess: f64,
}

pub fn stats() -> SolveStats {
    SolveStats {
        converged_solves: SOLVES.load(Ordering::Relaxed),
        weak_duality_violations: DUALITY_VIOLATIONS.load(Ordering::Relaxed),
        worst_excess: f64::from_bits(WORST_EXCESS_BITS.load(Ordering::Relaxed)),
    }
}

fn record(value: f64, bound: f64) {
    SOLVES.fetch_add(1, Ordering::Relaxed);
    let excess = value - bound;
    if excess > EPS_GAP {
        DUALITY_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
    }
    if excess > 0.0 {
        let _ = WORST_EXCESS_BITS.fetch_update(Ordering::Relaxed, Ordering::Relaxed, |old| {
            (excess > f64::from_bits(old)).then_some(excess.to_bits())
        });
    }
}

pub fn solve(p: &SdpProblem) -> Result<OptResult, SdpError> {
    solve_with(p, &SolverOptions::default())
}

pub fn solve_with(p: &SdpProblem, opts: &SolverOptions) -> Result<OptResult, SdpError> {
    p.validate()?;
    // Variables that appear in no constraint: fixed at zero when they carry
    // no objective weight, otherwise the problem is unbounded.
    let unreferenced: Vec<usize> = (0..p.nvars).filter(|&k| !p.is_referenced(k)).collect();
    if unreferenced.iter().any(|&k| p.objective[k] != 0.0) {
        let phase = phase_one(p, opts)?;
        let status = if phase.value < -EPS_PSD {
            SolveStatus::Infeasible
        } else {
            SolveStatus::Unbounded
        };
        return Ok(OptResult {
            status,
            value: if status == SolveStatus::Unbounded { f64::INFINITY } else { f64::NAN },
            point: vec![0.0; p.nvars],
            margin: phase.value,
            gap: f64::NAN,
            bound: f64::INFINITY,
            iterations: 0,
            phase_one: Some(phase.value),
            message: "objective variable appears in no constraint".into(),
        });
    }
    if !unreferenced.is_empty() {
        let keep: Vec<usize> = (0..p.nvars).filter(|&k| p.is_referenced(k)).collect();
        if keep.is_empty() {
            return Ok(constant_problem(p));
        }
        let sub = restrict(p, &keep);
        let mut r = solve_with(&sub, opts)?;
        let mut point = vec![0.0; p.nvars];
        for (pos, &k) in keep.iter().enumerate() {
            point[k] = r.point.get(pos).copied().unwrap_or(0.0);
        }
        r.point = point;
        return Ok(r);
    }

    let out = ipm::solve(p, opts.eps_gap, opts.max_iterations);
    let point = out.y.clone();
    if out.converged {
        let value = p.objective_value(&point);
        record(value, out.primal_obj);
        let margin = p.margin(&point);
        return Ok(OptResult {
            status: SolveStatus::Optimal,
            value,
            point,
            margin,
            gap: out.primal_obj - value,
            bound: out.primal_obj,
            iterations: out.iterations,
            phase_one: None,
            message: out.message,
        });
    }

    let phase = phase_one(p, opts)?;
    let status = if phase.status == SolveStatus::Optimal && phase.value < -EPS_PSD {
        SolveStatus::Infeasible
    } else if phase.status == SolveStatus::Optimal && out.diverged_dual {
        SolveStatus::Unbounded
    } else {
        SolveStatus::Indeterminate
    };
    let value = match status {
        SolveStatus::Unbounded => f64::INFINITY,
        SolveStatus::Infeasible => f64::NEG_INFINITY,
        _ => p.objective_value(&point),
    };
    Ok(OptResult {
        status,
        value,
        margin: p.margin(&point),
        point,
        gap: out.primal_obj - out.dual_obj,
        bound: if status == SolveStatus::Unbounded { f64::INFINITY } else { out.primal_obj },
        iterations: out.iterations,
        phase_one: Some(phase.value),
        message: out.message,
    })
}

fn constant_problem(p: &SdpProblem) -> OptResult {
    let point = vec![0.0; p.nvars];
    let margin = p.margin(&point);
    let feasible = margin >= -EPS_PSD;
    OptResult {
        status: if feasible { SolveStatus::Optimal } else { SolveStatus::Infeasible },
        value: if feasible { 0.0 } else { f64::NEG_INFINITY },
        point,
        margin,
        gap: 0.0,
        bound: 0.0,
        iterations: 0,
        phase_one: Some(margin),
        message: "no variable appears in a constraint".into(),
    }
}

/// Keeps only the listed variables (renumbered in the given order).
fn restrict(p: &SdpProblem, keep: &[usize]) -> SdpProblem {
    let map: std::collections::BTreeMap<usize, usize> =
        keep.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    SdpProblem {
        nvars: keep.len(),
        objective: keep.iter().map(|&k| p.objective[k]).collect(),
        blocks: p
            .blocks
            .iter()
            .map(|b| LmiBlock {
                dim: b.dim,
                constant: b.constant.clone(),
                coefs: b
                    .coefs
                    .iter()
                    .filter_map(|(k, m)| map.get(k).map(|&i| (i, m.clone())))
                    .collect(),
            })
            .collect(),
        ineqs: p
            .ineqs
            .iter()
            .map(|r| AffineRow {
                constant: r.constant,
                coefs: r
                    .coefs
                    .iter()
                    .filter_map(|(k, &v)| map.get(k).map(|&i| (i, v)))
                    .collect(),
            })
            .collect(),
    }
}

/// Phase-one problem: `max t` s.t. every block `⪰ tI`, every row `≥ t`,
/// and `t ≤ MARGIN_CAP`. The margin variable is appended last.
pub fn margin_problem(p: &SdpProblem) -> SdpProblem {
    let t = p.nvars;
    let mut q = SdpProblem::new(p.nvars + 1);
    q.objective[t] = 1.0;
    for b in &p.blocks {
        let mut nb = b.clone();
        let mut tm = SymMat::zeros(b.dim);
        for i in 0..b.dim {
            tm.set(i, i, -1.0);
        }
        nb.coefs.insert(t, tm);
        q.blocks.push(nb);
    }
    for r in &p.ineqs {
        let mut nr = r.clone();
        nr.coefs.insert(t, -1.0);
        q.ineqs.push(nr);
    }
    let mut cap = AffineRow {
        constant: MARGIN_CAP,
        ..Default::default()
    };
    cap.coefs.insert(t, -1.0);
    q.ineqs.push(cap);
    q
}

fn phase_one(p: &SdpProblem, opts: &SolverOptions) -> Result<OptResult, SdpError> {
    let q = margin_problem(p);
    let out = ipm::solve(&q, opts.eps_gap, opts.max_iterations);
    let point = out.y.clone();
    let margin_value = q.objective_value(&point);
    if out.converged {
        record(margin_value, out.primal_obj);
    }
    Ok(OptResult {
        status: if out.converged { SolveStatus::Optimal } else { SolveStatus::Indeterminate },
        value: margin_value,
        margin: q.margin(&point),
        point,
        gap: out.primal_obj - out.dual_obj,
        bound: out.primal_obj,
        iterations: out.iterations,
        phase_one: None,
        message: out.message,
    })
}

/// Largest common margin `t` with every block `⪰ tI` and every row `≥ t`
/// over the free variables of `p` (capped at [`MARGIN_CAP`]).
///
/// `value` is `t*`; the point excludes the margin variable. A point whose
/// lift problem has `t* ≥ -EPS_MEMBER` is reported as a member.
pub fn feasibility_margin(p: &SdpProblem) -> Result<OptResult, SdpError> {
    feasibility_margin_with(p, &SolverOptions::default())
}

pub fn feasibility_margin_with(p: &SdpProblem, opts: &SolverOptions) -> Result<OptResult, SdpError> {
    if p.nvars == 0 {
        let m = p.margin(&[]).min(MARGIN_CAP);
        return Ok(OptResult {
            status: SolveStatus::Optimal,
            value: m,
            point: Vec::new(),
            margin: m,
            gap: 0.0,
            bound: m,
            iterations: 0,
            phase_one: None,
            message: "no free variables".into(),
        });
    }
    let mut p = p.clone();
    p.objective = vec![0.0; p.nvars];
    let q = margin_problem(&p);
    let mut r = solve_with(&q, opts)?;
    if r.status == SolveStatus::Unbounded {
        // t is capped, so divergence means the supremum is approached as
        // the free variables grow; the last iterate still certifies its t.
        let t = r.point[p.nvars];
        let m = q.margin(&r.point);
        if m >= -EPS_PSD {
            r.status = SolveStatus::Optimal;
            r.value = t;
            r.margin = m;
            r.message = format!("margin supremum not attained; {}", r.message);
        }
    }
    r.point.truncate(p.nvars);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> SdpProblem {
        // [[1, z], [z, 1]] ⪰ 0
        let mut b = LmiBlock::new(2);
        b.add(None, 0, 0, 1.0);
        b.add(None, 1, 1, 1.0);
        b.add(Some(0), 0, 1, 1.0);
        let mut p = SdpProblem::new(1);
        p.blocks.push(b);
        p
    }

    #[test]
    fn eigenvalue_bound() {
        // I - tI ⪰ 0
        let mut b = LmiBlock::new(2);
        b.add(None, 0, 0, 1.0);
        b.add(None, 1, 1, 1.0);
        b.add(Some(0), 0, 0, -1.0);
        b.add(Some(0), 1, 1, -1.0);
        let mut p = SdpProblem::new(1);
        p.objective = vec![1.0];
        p.blocks.push(b);
        let r = solve(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.value - 1.0).abs() < 1e-6, "{r:?}");
        assert!(r.value <= r.bound + EPS_GAP);
    }

    #[test]
    fn determinant_bound_both_directions() {
        let mut p = two_by_two();
        p.objective = vec![1.0];
        let r = solve(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.value - 1.0).abs() < 1e-6);
        p.objective = vec![-1.0];
        let r = solve(&p).unwrap();
        assert!((-r.value - (-1.0)).abs() < 1e-6);
    }

    #[test]
    fn infeasible_detected_by_phase_one() {
        // z >= 1 and z <= -1
        let mut p = SdpProblem::new(1);
        p.objective = vec![1.0];
        let mut r1 = AffineRow {
            constant: -1.0,
            ..Default::default()
        };
        r1.coefs.insert(0, 1.0);
        let mut r2 = AffineRow {
            constant: -1.0,
            ..Default::default()
        };
        r2.coefs.insert(0, -1.0);
        p.ineqs = vec![r1, r2];
        let r = solve(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.phase_one.unwrap() < -EPS_PSD);
    }

    #[test]
    fn unbounded_detected() {
        // max z s.t. z >= 0
        let mut p = SdpProblem::new(1);
        p.objective = vec![1.0];
        let mut r1 = AffineRow::default();
        r1.coefs.insert(0, 1.0);
        p.ineqs = vec![r1];
        let r = solve(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Unbounded, "{r:?}");
    }

    #[test]
    fn unreferenced_variable_with_objective_is_unbounded() {
        let mut p = two_by_two();
        p.nvars = 2;
        p.objective = vec![0.0, 1.0];
        let r = solve(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Unbounded);
        p.objective = vec![1.0, 0.0];
        let r = solve(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.point.len(), 2);
    }

    #[test]
    fn margin_of_two_by_two() {
        let p = two_by_two();
        let r = feasibility_margin(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.value - 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn rejects_invalid_problems() {
        let p = SdpProblem::new(1);
        assert_eq!(solve(&p), Err(SdpError::NoConstraints));
        let mut p = two_by_two();
        p.objective = vec![1.0, 2.0];
        assert!(matches!(solve(&p), Err(SdpError::ObjectiveLength { .. })));
    }

    #[test]
    fn scaling_a_block_keeps_status() {
        let mut p = two_by_two();
        p.objective = vec![1.0];
        let base = solve(&p).unwrap();
        p.blocks[0] = p.blocks[0].scaled(2.0);
        let scaled = solve(&p).unwrap();
        assert_eq!(base.status, scaled.status);
        assert!((base.value - scaled.value).abs() < 1e-6);
    }

    #[test]
    fn deterministic() {
        let mut p = two_by_two();
        p.objective = vec![0.3];
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
