//! Low Dirichlet eigenpairs of `-Δ_h` and the eigenfunction bound checks.
//!
//! Eigenpairs come from block inverse subspace iteration: each sweep solves
//! `A z_j = q_j` by warm-started PCG, orthonormalizes the block, and applies a
//! Rayleigh–Ritz projection. The block carries spare vectors beyond `k_max`
//! so the convergence factor `λ_k/λ_{p+1}` stays well below one.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::bounds::{BallModulusParams, BoundReport};
use crate::error::{Error, Result};
use crate::families::Lcg64;
use crate::grid::{GridDomain, ScalarField};
use crate::solver::{laplacian_into, pcg, Preconditioner, SolverOptions};

pub const DEFAULT_EIGEN_EPS: f64 = 1e-8;
const MAX_SWEEPS: usize = 500;
/// Below this the true residual of a PCG solve stalls at rounding level.
const INNER_RTOL_FLOOR: f64 = 1e-11;

/// One eigenpair with `‖u‖₂ = 1` in the discrete L² norm.
#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    /// 1-based position in ascending order.
    pub k: usize,
    pub lambda: f64,
    #[serde(skip)]
    pub u: ScalarField,
    /// `‖A u - λ u‖₂`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram–Schmidt, two passes. Columns that collapse are replaced by
/// fresh random vectors.
fn orthonormalize(block: &mut [Vec<f64>], rng: &mut Lcg64) {
    for j in 0..block.len() {
        for _ in 0..2 {
            for i in 0..j {
                let (done, rest) = block.split_at_mut(j);
                let c = dot(&done[i], &rest[0]);
                for (x, y) in rest[0].iter_mut().zip(&done[i]) {
                    *x -= c * y;
                }
            }
        }
        let norm = dot(&block[j], &block[j]).sqrt();
        if norm < 1e-12 {
            for x in block[j].iter_mut() {
                *x = rng.uniform(-1.0, 1.0);
            }
            orthonormalize(&mut block[..=j], rng);
            continue;
        }
        for x in block[j].iter_mut() {
            *x /= norm;
        }
    }
}

/// Smallest `k_max` eigenpairs, residual at most `eps` each.
pub fn eigenpairs(d: &Arc<GridDomain>, k_max: usize, eps: f64) -> Result<Vec<EigenPair>> {
    if !(1..=20).contains(&k_max) {
        return Err(Error::OutOfRange { what: "k_max", value: k_max as f64, lo: 1.0, hi: 20.0 });
    }
    if !(eps > 0.0 && eps < 1e-4) {
        return Err(Error::OutOfRange { what: "eps", value: eps, lo: 0.0, hi: 1e-4 });
    }
    let n = d.len();
    if k_max > n {
        return Err(Error::InvalidArgument(format!("{k_max} eigenpairs requested on {n} cells")));
    }
    let p = (2 * k_max).max(k_max + 6).min(n);
    let mut rng = Lcg64::new(0x00e1_6e17);
    let mut q: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()).collect();
    orthonormalize(&mut q, &mut rng);
    let mut theta: Vec<f64> = vec![0.0; p];
    let mut aq = vec![vec![0.0; n]; p];
    let mut residuals = vec![f64::INFINITY; p];
    let mut last_residual = f64::INFINITY;

    for sweep in 0..MAX_SWEEPS {
        // Inverse step, warm-started from the previous Ritz approximation. The
        // warm start leaves a relative residual of res/θ, so each solve only
        // has to gain a fixed number of digits on it.
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(p);
        for j in 0..p {
            let warm = sweep > 0 && theta[j] > 0.0;
            let guess: Option<Vec<f64>> = warm.then(|| q[j].iter().map(|x| x / theta[j]).collect());
            let rtol = if warm { (1e-3 * residuals[j] / theta[j]).clamp(INNER_RTOL_FLOOR, 1e-4) } else { 1e-4 };
            let opts = SolverOptions { rtol, max_iterations: 5_000, preconditioner: Preconditioner::Ssor { omega: 1.9 } };
            z.push(pcg(d, &q[j], guess.as_deref(), &opts)?.0);
        }
        orthonormalize(&mut z, &mut rng);

        // Rayleigh–Ritz on span(z).
        for j in 0..p {
            laplacian_into(d, &z[j], &mut aq[j]);
        }
        let h = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&z[i], &aq[j]) + dot(&z[j], &aq[i])));
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut new_q = vec![vec![0.0; n]; p];
        let mut new_aq = vec![vec![0.0; n]; p];
        for (slot, &col) in order.iter().enumerate() {
            for i in 0..p {
                let c = eig.eigenvectors[(i, col)];
                if c != 0.0 {
                    for ((x, ax), (zi, azi)) in
                        new_q[slot].iter_mut().zip(new_aq[slot].iter_mut()).zip(z[i].iter().zip(&aq[i]))
                    {
                        *x += c * zi;
                        *ax += c * azi;
                    }
                }
            }
            theta[slot] = eig.eigenvalues[col];
        }
        q = new_q;
        aq = new_aq;

        residuals = (0..p)
            .map(|j| {
                let nq = dot(&q[j], &q[j]).sqrt();
                aq[j].iter().zip(&q[j]).map(|(a, x)| (a - theta[j] * x).powi(2)).sum::<f64>().sqrt() / nq
            })
            .collect();
        last_residual = residuals[..k_max].iter().cloned().fold(0.0, f64::max);
        if last_residual <= eps {
            return finish(d, q, theta, residuals, k_max);
        }
    }
    Err(Error::NotConverged { iterations: MAX_SWEEPS, residual: last_residual })
}

fn finish(d: &Arc<GridDomain>, q: Vec<Vec<f64>>, theta: Vec<f64>, residuals: Vec<f64>, k_max: usize) -> Result<Vec<EigenPair>> {
    let scale = d.cell_volume().powf(-0.5);
    q.into_iter()
        .take(k_max)
        .enumerate()
        .map(|(j, mut v)| {
            let nv = dot(&v, &v).sqrt();
            // Largest-magnitude entry positive, lowest index on ties.
            let pivot = v.iter().enumerate().fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
            let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
            for x in v.iter_mut() {
                *x *= sign * scale / nv;
            }
            Ok(EigenPair { k: j + 1, lambda: theta[j], u: ScalarField::new(Arc::clone(d), v)?, residual: residuals[j] })
        })
        .collect()
}

/// Rayleigh quotient `uᵀAu / uᵀu`.
pub fn rayleigh_quotient(u: &ScalarField) -> f64 {
    let d = u.domain();
    let mut au = vec![0.0; d.len()];
    laplacian_into(d, u.values(), &mut au);
    dot(u.values(), &au) / dot(u.values(), u.values())
}

/// `‖u_k‖∞` against the explicit eigenfunction estimate in terms of `λ_k` and
/// `‖u_k‖₁`. A negative right side is flagged vacuous.
pub fn eigen_bound_check(p: &BallModulusParams, ep: &EigenPair) -> BoundReport {
    let l1 = ep.u.norm_l1();
    let rhs = p.eigen_2_14(ep.lambda, l1);
    BoundReport::new(format!("eigen_2_14_k{}", ep.k), ep.u.norm_linf(), rhs, 0.0)
        .flag_vacuous_if_negative()
        .with("k", ep.k)
        .with("lambda", ep.lambda)
        .with("l1", l1)
        .with("radius", p.radius)
}

/// `‖u_k‖∞` against the explicit `(‖f‖₁, ‖f‖∞)` bound applied to `f = λ_k u_k`,
/// with the measured `‖u_k‖∞` on the right.
pub fn eigen_raw_bound_check(ep: &EigenPair, d: &GridDomain) -> Result<BoundReport> {
    let p = BallModulusParams::for_domain(d);
    let (l1, linf) = (ep.u.norm_l1(), ep.u.norm_linf());
    let rhs = p.bound_2_10(ep.lambda * l1, ep.lambda * linf)?;
    Ok(BoundReport::new(format!("eigen_raw_k{}", ep.k), linf, rhs, 0.0)
        .flag_vacuous_if_negative()
        .with("k", ep.k)
        .with("lambda", ep.lambda)
        .with("l1", l1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_domain, Shape};
    use std::f64::consts::PI;

    #[test]
    fn square_spectrum_matches_the_discrete_formula() {
        // On [0,1]² with faces on the box, modes are sin(aπx)sin(bπy) and the
        // 5-point eigenvalues are (4/h²)(sin²(aπh/2) + sin²(bπh/2)).
        let h = 1.0 / 16.0;
        let d = make_domain(&Shape::Square { side: 1.0 }, h).unwrap();
        let pairs = eigenpairs(&d, 4, 1e-9).unwrap();
        let mode = |a: f64, b: f64| 4.0 / (h * h) * ((a * PI * h / 2.0).sin().powi(2) + (b * PI * h / 2.0).sin().powi(2));
        let expected = [mode(1.0, 1.0), mode(1.0, 2.0), mode(2.0, 1.0), mode(2.0, 2.0)];
        for (ep, want) in pairs.iter().zip(expected) {
            assert!((ep.lambda - want).abs() < 1e-8 * want, "k={} {} vs {want}", ep.k, ep.lambda);
            assert!(ep.residual <= 1e-9);
            assert!((ep.u.norm_l2() - 1.0).abs() < 1e-12);
            assert!((rayleigh_quotient(&ep.u) - ep.lambda).abs() < 1e-8 * ep.lambda);
        }
        for i in 0..4 {
            for j in 0..i {
                let ip: f64 = dot(pairs[i].u.values(), pairs[j].u.values()) * d.cell_volume();
                assert!(ip.abs() < 1e-8);
            }
        }
        // Ground state is positive with the sign convention.
        assert!(pairs[0].u.min() > 0.0);
    }

    #[test]
    fn argument_validation() {
        let d = make_domain(&Shape::Square { side: 1.0 }, 1.0 / 8.0).unwrap();
        assert!(eigenpairs(&d, 0, 1e-8).is_err());
        assert!(eigenpairs(&d, 21, 1e-8).is_err());
        assert!(eigenpairs(&d, 2, 1e-3).is_err());
    }

    #[test]
    fn bound_checks_on_square_ground_state() {
        let d = make_domain(&Shape::Square { side: 1.0 }, 1.0 / 32.0).unwrap();
        let p = BallModulusParams::for_domain(&d);
        let ep = eigenpairs(&d, 1, 1e-8).unwrap().remove(0);
        // Continuum norms: 2 and 8/π².
        assert!((ep.u.norm_linf() - 2.0).abs() < 0.02);
        assert!((ep.u.norm_l1() - 8.0 / (PI * PI)).abs() < 0.01);
        let r = eigen_bound_check(&p, &ep);
        assert!(r.pass && r.margin > 1.0, "{r:?}");
        let flipped = EigenPair { u: ep.u.scaled(-1.0), ..ep.clone() };
        let rf = eigen_bound_check(&p, &flipped);
        assert_eq!((r.lhs, r.rhs), (rf.lhs, rf.rhs));
        assert!(eigen_raw_bound_check(&ep, &d).unwrap().pass);
        let scaled = EigenPair { u: ep.u.scaled(3.0), ..ep.clone() };
        let a = eigen_raw_bound_check(&ep, &d).unwrap();
        let b = eigen_raw_bound_check(&scaled, &d).unwrap();
        assert!((b.lhs - 3.0 * a.lhs).abs() < 1e-12 && (b.rhs - 3.0 * a.rhs).abs() < 1e-9 * b.rhs);
    }
}
