//! Discrete Dirichlet Laplacian and matrix-free preconditioned CG.
//!
//! The operator is the `2n+1`-point stencil `(-Δ_h v)_i = (2n v_i - Σ_j v_j)/h²`
//! over face neighbors. An exterior neighbor holds the mirrored ghost value
//! `-v_i`, which puts the homogeneous Dirichlet condition on the shared cell
//! face, so the boundary coincides with the faces of the tiled cells whose
//! volume defines `|D|`. The operator is symmetric positive definite on the
//! interior cells.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridDomain, ScalarField, EXTERIOR};

pub const DEFAULT_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Preconditioner {
    /// Diagonal scaling.
    Jacobi,
    /// Symmetric successive over-relaxation in interior-index order.
    Ssor { omega: f64 },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverOptions {
    pub rtol: f64,
    pub max_iterations: usize,
    pub preconditioner: Preconditioner,
}

impl SolverOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        SolverOptions { rtol, ..Self::default() }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { rtol: DEFAULT_RTOL, max_iterations: 20_000, preconditioner: Preconditioner::Ssor { omega: 1.9 } }
    }
}

#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub u: ScalarField,
    /// Discrete L² norm of `-Δ_h u - f`.
    pub residual_norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct GreenColumn {
    /// Interior index of the source cell.
    pub source: usize,
    pub g: ScalarField,
}

/// `y = -Δ_h x` on raw interior-cell vectors.
pub fn laplacian_into(d: &GridDomain, x: &[f64], y: &mut [f64]) {
    let inv_h2 = 1.0 / (d.spacing() * d.spacing());
    for (i, yi) in y.iter_mut().enumerate() {
        let mut acc = diagonal(d, i) * x[i];
        for &nb in d.neighbors(i) {
            if nb != EXTERIOR {
                acc -= x[nb as usize];
            }
        }
        *yi = acc * inv_h2;
    }
}

/// Diagonal entry of `-Δ_h` at a cell, in units of `1/h²`.
#[inline]
fn diagonal(d: &GridDomain, cell: usize) -> f64 {
    (2 * d.dim() + d.exterior_faces(cell)) as f64
}

pub fn apply_laplacian(d: &Arc<GridDomain>, v: &ScalarField) -> Result<ScalarField> {
    v.check_domain(d)?;
    let mut out = vec![0.0; d.len()];
    laplacian_into(d, v.values(), &mut out);
    ScalarField::new(Arc::clone(d), out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn precondition(d: &GridDomain, pc: Preconditioner, r: &[f64], z: &mut [f64]) {
    let inv_h2 = 1.0 / (d.spacing() * d.spacing());
    match pc {
        Preconditioner::Jacobi => {
            for (i, (zi, ri)) in z.iter_mut().zip(r).enumerate() {
                *zi = ri / (diagonal(d, i) * inv_h2);
            }
        }
        Preconditioner::Ssor { omega } => {
            // M = (D + ωL) D⁻¹ (D + ωU) / (ω(2-ω)), with D⁻¹ tabulated by exterior-face count.
            let h2 = d.spacing() * d.spacing();
            let inv_diag: Vec<f64> = (0..=2 * d.dim()).map(|e| h2 / (2 * d.dim() + e) as f64).collect();
            let scale = omega * (2.0 - omega);
            let off = omega * inv_h2;
            for i in 0..z.len() {
                let mut acc = scale * r[i];
                // Slots 0, 2, 4 (the -x, -y, -z neighbors) precede `i` in index order.
                for &nb in d.neighbors(i).iter().step_by(2) {
                    if nb != EXTERIOR {
                        acc += off * z[nb as usize];
                    }
                }
                z[i] = acc * inv_diag[d.exterior_faces(i)];
            }
            for i in (0..z.len()).rev() {
                let mut acc = 0.0;
                for &nb in d.neighbors(i).iter().skip(1).step_by(2) {
                    if nb != EXTERIOR {
                        acc += off * z[nb as usize];
                    }
                }
                z[i] += acc * inv_diag[d.exterior_faces(i)];
            }
        }
    }
}

/// Solves `-Δ_h u = f` by preconditioned conjugate gradients.
///
/// `initial` seeds the iteration (zero otherwise). Convergence is declared on
/// the true residual `‖f - A u‖ ≤ rtol ‖f‖` (Euclidean, equivalently discrete L²).
pub fn pcg(d: &GridDomain, f: &[f64], initial: Option<&[f64]>, opts: &SolverOptions) -> Result<(Vec<f64>, f64, usize)> {
    let n = d.len();
    let b_norm = dot(f, f).sqrt();
    let mut x = match initial {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    if b_norm == 0.0 {
        return Ok((vec![0.0; n], 0.0, 0));
    }
    let target = opts.rtol * b_norm;
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut iterations = 0;

    let true_residual = |x: &[f64], r: &mut [f64], q: &mut [f64]| -> f64 {
        laplacian_into(d, x, q);
        for i in 0..n {
            r[i] = f[i] - q[i];
        }
        dot(r, r).sqrt()
    };

    let mut res = true_residual(&x, &mut r, &mut q);
    // Restarts recover from drift between the recurrence and the true residual.
    'outer: loop {
        if res <= target {
            return Ok((x, res / b_norm, iterations));
        }
        precondition(d, opts.preconditioner, &r, &mut z);
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        loop {
            if iterations >= opts.max_iterations {
                let res = true_residual(&x, &mut r, &mut q);
                return Err(Error::NotConverged { iterations, residual: res / b_norm });
            }
            iterations += 1;
            laplacian_into(d, &p, &mut q);
            let pq = dot(&p, &q);
            if pq <= 0.0 {
                res = true_residual(&x, &mut r, &mut q);
                if res <= target {
                    continue 'outer;
                }
                return Err(Error::NotConverged { iterations, residual: res / b_norm });
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            let rec = dot(&r, &r).sqrt();
            if rec <= target {
                res = true_residual(&x, &mut r, &mut q);
                continue 'outer;
            }
            precondition(d, opts.preconditioner, &r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
    }
}

pub fn solve_poisson_with(
    d: &Arc<GridDomain>,
    f: &ScalarField,
    opts: &SolverOptions,
    initial: Option<&[f64]>,
) -> Result<PoissonSolution> {
    f.check_domain(d)?;
    if !(opts.rtol > 0.0 && opts.rtol < 1.0) {
        return Err(Error::OutOfRange { what: "rtol", value: opts.rtol, lo: 0.0, hi: 1.0 });
    }
    if !f.is_finite() {
        return Err(Error::InvalidArgument("right-hand side has non-finite values".into()));
    }
    let (u, rel, iterations) = pcg(d, f.values(), initial, opts)?;
    let residual_norm = rel * f.norm_l2();
    Ok(PoissonSolution { u: ScalarField::new(Arc::clone(d), u)?, residual_norm, iterations })
}

pub fn solve_poisson(d: &Arc<GridDomain>, f: &ScalarField, rtol: f64) -> Result<PoissonSolution> {
    solve_poisson_with(d, f, &SolverOptions::with_rtol(rtol), None)
}

/// Column `y ↦ G_h(source, y)`: the solve with `1/h^n` at the source cell.
pub fn green_column(d: &Arc<GridDomain>, source: usize, rtol: f64) -> Result<GreenColumn> {
    green_column_with(d, source, &SolverOptions::with_rtol(rtol))
}

pub fn green_column_with(d: &Arc<GridDomain>, source: usize, opts: &SolverOptions) -> Result<GreenColumn> {
    if source >= d.len() {
        return Err(Error::InvalidArgument(format!("source cell {source} is not interior")));
    }
    let mut rhs = ScalarField::zeros(d);
    rhs.values_mut()[source] = 1.0 / d.cell_volume();
    let sol = solve_poisson_with(d, &rhs, opts, None)?;
    Ok(GreenColumn { source, g: sol.u })
}

/// Solution of `-Δ_h v = 1`.
pub fn torsion_function(d: &Arc<GridDomain>, rtol: f64) -> Result<PoissonSolution> {
    solve_poisson(d, &ScalarField::constant(d, 1.0), rtol)
}
