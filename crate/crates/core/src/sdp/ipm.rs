//! Infeasible primal-dual path following with the HKM search direction and a
//! Mehrotra predictor-corrector step.
//!
//! The user problem `max cᵀz s.t. F0 + Σ z_i F_i ⪰ 0` is the dual of the
//! standard form `min <C, X> s.t. <A_i, X> = c_i, X ⪰ 0` with `C = F0` and
//! `A_i = -F_i`. Scalar inequalities are carried as a diagonal block.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::problem::SdpProblem;

pub(crate) const MAX_ITERATIONS: usize = 200;
const STEP_FRACTION: f64 = 0.98;
const FEAS_TOL: f64 = 1e-9;

struct BlockData {
    dim: usize,
    c: DMatrix<f64>,
    /// For each variable: full (both-triangle) entries of `A_i = -F_i`.
    a: Vec<Vec<(usize, usize, f64)>>,
}

struct Data {
    m: usize,
    b: DVector<f64>,
    blocks: Vec<BlockData>,
    lp_c: DVector<f64>,
    /// For each variable: `(row, A_i entry)` of the diagonal block.
    lp_a: Vec<Vec<(usize, f64)>>,
}

pub(crate) struct IpmOutcome {
    pub converged: bool,
    pub y: Vec<f64>,
    /// `bᵀy`, the user objective.
    pub dual_obj: f64,
    /// `<C, X>`, an upper bound on the user objective.
    pub primal_obj: f64,
    pub iterations: usize,
    pub diverged_dual: bool,
    pub diverged_primal: bool,
    pub message: String,
}

impl Data {
    fn from_problem(p: &SdpProblem) -> Self {
        let m = p.nvars;
        let blocks = p
            .blocks
            .iter()
            .map(|blk| {
                let mut a = vec![Vec::new(); m];
                for (&k, f) in &blk.coefs {
                    a[k] = f
                        .full_entries()
                        .into_iter()
                        .map(|(i, j, v)| (i, j, -v))
                        .collect();
                }
                BlockData {
                    dim: blk.dim,
                    c: blk.constant.to_dense(),
                    a,
                }
            })
            .collect();
        let mut lp_a = vec![Vec::new(); m];
        for (row, r) in p.ineqs.iter().enumerate() {
            for (&k, &v) in &r.coefs {
                lp_a[k].push((row, -v));
            }
        }
        Data {
            m,
            b: DVector::from_vec(p.objective.clone()),
            blocks,
            lp_c: DVector::from_iterator(p.ineqs.len(), p.ineqs.iter().map(|r| r.constant)),
            lp_a,
        }
    }

    fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum::<usize>() + self.lp_c.len()
    }

    /// `<A_i, X>` for every `i`.
    fn apply(&self, x: &[DMatrix<f64>], xl: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for i in 0..self.m {
            let mut s = 0.0;
            for (bd, xb) in self.blocks.iter().zip(x) {
                for &(r, c, v) in &bd.a[i] {
                    s += v * xb[(r, c)];
                }
            }
            for &(k, v) in &self.lp_a[i] {
                s += v * xl[k];
            }
            out[i] = s;
        }
        out
    }

    /// `Σ y_i A_i` per block and for the diagonal block.
    fn adjoint(&self, y: &DVector<f64>) -> (Vec<DMatrix<f64>>, DVector<f64>) {
        let mats = self
            .blocks
            .iter()
            .map(|bd| {
                let mut m = DMatrix::zeros(bd.dim, bd.dim);
                for i in 0..self.m {
                    if y[i] == 0.0 {
                        continue;
                    }
                    for &(r, c, v) in &bd.a[i] {
                        m[(r, c)] += y[i] * v;
                    }
                }
                m
            })
            .collect();
        let mut lp = DVector::zeros(self.lp_c.len());
        for i in 0..self.m {
            for &(k, v) in &self.lp_a[i] {
                lp[k] += y[i] * v;
            }
        }
        (mats, lp)
    }

    fn a_norms(&self) -> Vec<f64> {
        (0..self.m)
            .map(|i| {
                let mut s = 0.0;
                for bd in &self.blocks {
                    s += bd.a[i].iter().map(|(_, _, v)| v * v).sum::<f64>();
                }
                s += self.lp_a[i].iter().map(|(_, v)| v * v).sum::<f64>();
                s.sqrt()
            })
            .collect()
    }

    fn c_norm(&self) -> f64 {
        let mut s: f64 = self.blocks.iter().map(|b| b.c.norm_squared()).sum();
        s += self.lp_c.norm_squared();
        s.sqrt()
    }
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Largest step `α` with `X + α dX ⪰ 0`; infinite when unconstrained.
fn max_step_psd(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let Some(chol) = x.clone().cholesky() else {
        return 0.0;
    };
    let l = chol.l();
    let Some(linv) = l.clone().try_inverse() else {
        return 0.0;
    };
    let mut w = &linv * dx * linv.transpose();
    symmetrize(&mut w);
    let lmin = SymmetricEigen::new(w)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if lmin < 0.0 {
        -1.0 / lmin
    } else {
        f64::INFINITY
    }
}

fn max_step_lp(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

struct Iterate {
    x: Vec<DMatrix<f64>>,
    z: Vec<DMatrix<f64>>,
    xl: DVector<f64>,
    zl: DVector<f64>,
    y: DVector<f64>,
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
    dxl: DVector<f64>,
    dzl: DVector<f64>,
    dy: DVector<f64>,
}

fn solve_schur(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = m.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    let scale = m.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let mut reg = m.clone();
    for i in 0..reg.nrows() {
        reg[(i, i)] += 1e-13 * scale;
    }
    if let Some(ch) = reg.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    reg.lu().solve(rhs)
}

pub(crate) fn solve(p: &SdpProblem, eps_gap: f64, max_iter: usize) -> IpmOutcome {
    let d = Data::from_problem(p);
    let m = d.m;
    let ntot = d.total_dim().max(1) as f64;
    let a_norms = d.a_norms();
    let c_norm = d.c_norm();
    let b_norm = d.b.norm();

    let alpha0 = (0..m)
        .map(|i| (1.0 + d.b[i].abs()) / (1.0 + a_norms[i]))
        .fold(0.0f64, f64::max)
        * ntot;
    let beta0 = (1.0 + a_norms.iter().copied().fold(c_norm, f64::max)) / ntot.sqrt();
    let xi = 10.0 * alpha0.max(1.0);
    let eta = 10.0 * beta0.max(1.0);

    let mut it = Iterate {
        x: d.blocks.iter().map(|b| DMatrix::identity(b.dim, b.dim) * xi).collect(),
        z: d.blocks.iter().map(|b| DMatrix::identity(b.dim, b.dim) * eta).collect(),
        xl: DVector::from_element(d.lp_c.len(), xi),
        zl: DVector::from_element(d.lp_c.len(), eta),
        y: DVector::zeros(m),
    };

    let mut out = IpmOutcome {
        converged: false,
        y: vec![0.0; m],
        dual_obj: 0.0,
        primal_obj: 0.0,
        iterations: 0,
        diverged_dual: false,
        diverged_primal: false,
        message: String::new(),
    };

    for iter in 0..=max_iter {
        out.iterations = iter;
        // residuals
        let rp = &d.b - d.apply(&it.x, &it.xl);
        let (aty, atyl) = d.adjoint(&it.y);
        let rd: Vec<DMatrix<f64>> = d
            .blocks
            .iter()
            .zip(&it.z)
            .zip(&aty)
            .map(|((bd, z), a)| &bd.c - z - a)
            .collect();
        let rdl = &d.lp_c - &it.zl - &atyl;

        let xz: f64 = it.x.iter().zip(&it.z).map(|(x, z)| inner(x, z)).sum::<f64>()
            + it.xl.dot(&it.zl);
        let mu = xz / ntot;
        let pobj: f64 = d
            .blocks
            .iter()
            .zip(&it.x)
            .map(|(bd, x)| inner(&bd.c, x))
            .sum::<f64>()
            + d.lp_c.dot(&it.xl);
        let dobj = d.b.dot(&it.y);
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = (rd.iter().map(|r| r.norm_squared()).sum::<f64>() + rdl.norm_squared()).sqrt()
            / (1.0 + c_norm);
        let scale = 1.0f64.max(0.5 * (pobj.abs() + dobj.abs()));
        let gap = pobj - dobj;

        out.y = it.y.iter().copied().collect();
        out.dual_obj = dobj;
        out.primal_obj = pobj;

        let gap_ok = gap.abs() <= eps_gap * scale && gap >= -0.5 * eps_gap && xz <= eps_gap * scale;

        // the absolute floor on the gap keeps bᵀy from overshooting the bound
        if pinf < FEAS_TOL && dinf < FEAS_TOL && gap_ok {
            out.converged = true;
            out.message = format!("converged in {iter} iterations");
            return out;
        }
        if it.y.amax() > 1e10 || (dobj > 1e10 * (1.0 + b_norm) && dinf < 1e-6) {
            out.diverged_dual = true;
            out.message = "dual iterates diverging".into();
            return out;
        }
        let xmax = it
            .x
            .iter()
            .map(|x| x.amax())
            .chain(std::iter::once(if it.xl.is_empty() { 0.0 } else { it.xl.amax() }))
            .fold(0.0f64, f64::max);
        if xmax > 1e12 {
            out.diverged_primal = true;
            out.message = "primal iterates diverging".into();
            return out;
        }
        if iter == max_iter {
            break;
        }

        // Z^{-1}
        let mut zinv = Vec::with_capacity(it.z.len());
        for z in &it.z {
            match z.clone().cholesky() {
                Some(ch) => zinv.push(ch.inverse()),
                None => {
                    out.message = "lost positive definiteness".into();
                    return out;
                }
            }
        }

        // Schur complement
        let mut schur = DMatrix::zeros(m, m);
        for (bi, bd) in d.blocks.iter().enumerate() {
            let x = &it.x[bi];
            let zi = &zinv[bi];
            for i in 0..m {
                if bd.a[i].is_empty() {
                    continue;
                }
                for j in i..m {
                    if bd.a[j].is_empty() {
                        continue;
                    }
                    let mut s = 0.0;
                    for &(a, b, v) in &bd.a[i] {
                        for &(c, dd, w) in &bd.a[j] {
                            s += v * w * x[(b, c)] * zi[(dd, a)];
                        }
                    }
                    schur[(i, j)] += s;
                }
            }
        }
        let ratio = it.xl.component_div(&it.zl);
        for i in 0..m {
            for j in i..m {
                let mut s = 0.0;
                for &(k, v) in &d.lp_a[i] {
                    for &(k2, w) in &d.lp_a[j] {
                        if k == k2 {
                            s += v * w * ratio[k];
                        }
                    }
                }
                schur[(i, j)] += s;
            }
        }
        for i in 0..m {
            for j in 0..i {
                schur[(i, j)] = schur[(j, i)];
            }
        }

        let direction = |rc_zinv: &[DMatrix<f64>], rcl: &DVector<f64>| -> Option<Direction> {
            let t: Vec<DMatrix<f64>> = rc_zinv
                .iter()
                .zip(&it.x)
                .zip(&rd)
                .zip(&zinv)
                .map(|(((r, x), rdb), zi)| r - x * rdb * zi)
                .collect();
            let tl = rcl.component_div(&it.zl) - it.xl.component_mul(&rdl).component_div(&it.zl);
            let rhs = &rp - d.apply(&t, &tl);
            let dy = solve_schur(&schur, &rhs)?;
            let (ady, adyl) = d.adjoint(&dy);
            let dz: Vec<DMatrix<f64>> = rd.iter().zip(&ady).map(|(r, a)| r - a).collect();
            let dzl = &rdl - &adyl;
            let dx: Vec<DMatrix<f64>> = rc_zinv
                .iter()
                .zip(&it.x)
                .zip(&dz)
                .zip(&zinv)
                .map(|(((r, x), dzb), zi)| {
                    let mut v = r - x * dzb * zi;
                    symmetrize(&mut v);
                    v
                })
                .collect();
            let dxl = rcl.component_div(&it.zl) - it.xl.component_mul(&dzl).component_div(&it.zl);
            Some(Direction {
                dx,
                dz,
                dxl,
                dzl,
                dy,
            })
        };

        let steps = |dir: &Direction| -> (f64, f64) {
            let mut ap = max_step_lp(&it.xl, &dir.dxl);
            let mut ad = max_step_lp(&it.zl, &dir.dzl);
            for (x, dx) in it.x.iter().zip(&dir.dx) {
                ap = ap.min(max_step_psd(x, dx));
            }
            for (z, dz) in it.z.iter().zip(&dir.dz) {
                ad = ad.min(max_step_psd(z, dz));
            }
            (ap, ad)
        };

        // predictor: Rc = -XZ, so Rc Z^{-1} = -X
        let pred_rc: Vec<DMatrix<f64>> = it.x.iter().map(|x| -x).collect();
        let pred_rcl = -it.xl.component_mul(&it.zl);
        let Some(pred) = direction(&pred_rc, &pred_rcl) else {
            out.message = "singular Schur complement".into();
            return out;
        };
        let (ap, ad) = steps(&pred);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let xz_aff: f64 = it
            .x
            .iter()
            .zip(&pred.dx)
            .zip(it.z.iter().zip(&pred.dz))
            .map(|((x, dx), (z, dz))| inner(&(x + dx * ap), &(z + dz * ad)))
            .sum::<f64>()
            + (&it.xl + &pred.dxl * ap).dot(&(&it.zl + &pred.dzl * ad));
        let sigma = if xz > 0.0 {
            (xz_aff / xz).max(0.0).powi(3).min(1.0)
        } else {
            0.0
        };

        // corrector: Rc = σμI - XZ - dXa dZa
        let corr_rc: Vec<DMatrix<f64>> = it
            .x
            .iter()
            .zip(&zinv)
            .zip(pred.dx.iter().zip(&pred.dz))
            .map(|((x, zi), (dx, dz))| zi * (sigma * mu) - x - dx * dz * zi)
            .collect();
        let corr_rcl = DVector::from_element(it.xl.len(), sigma * mu)
            - it.xl.component_mul(&it.zl)
            - pred.dxl.component_mul(&pred.dzl);
        let Some(dir) = direction(&corr_rc, &corr_rcl) else {
            out.message = "singular Schur complement".into();
            return out;
        };
        let (ap, ad) = steps(&dir);
        let ap = (STEP_FRACTION * ap).min(1.0);
        let ad = (STEP_FRACTION * ad).min(1.0);

        for (x, dx) in it.x.iter_mut().zip(&dir.dx) {
            *x += dx * ap;
            symmetrize(x);
        }
        it.xl += &dir.dxl * ap;
        for (z, dz) in it.z.iter_mut().zip(&dir.dz) {
            *z += dz * ad;
            symmetrize(z);
        }
        it.zl += &dir.dzl * ad;
        it.y += &dir.dy * ad;
    }
    out.message = format!("iteration cap ({max_iter}) reached");
    out
}
