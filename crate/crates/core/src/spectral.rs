//! Perron–Frobenius eigen-data of nonnegative matrices.
//!
//! The dominant eigenvalue and its left/right eigenvectors are found by
//! power iteration on a shifted matrix `M + cI`. The shift makes the
//! dominant eigenvalue strictly dominant in modulus even for periodic
//! (e.g. bipartite) graphs, where plain power iteration oscillates. The
//! shift is the mean row sum of `M`, which keeps the iteration invariant
//! under rescaling of `M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{is_irreducible, reachable_set, strongly_connected_components, Graph};
use crate::matrix::{dot, Matrix};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Dominant eigenvalue with left (`v_max`) and right (`u_max`) eigenvectors,
/// each normalized to unit entry sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTriple {
    pub lambda_max: f64,
    pub v_max: Vec<f64>,
    pub u_max: Vec<f64>,
}

impl SpectralTriple {
    /// Eigen-data of the adjacency matrix of `g` at the default tolerance.
    pub fn of_graph(g: &Graph) -> Result<Self> {
        dominant_eig(g.adjacency(), DEFAULT_TOL, DEFAULT_MAX_ITER)
    }

    /// Largest residual of the two eigen-equations, relative to `lambda_max`.
    pub fn relative_residual(&self, m: &Matrix) -> f64 {
        let au = m.mul_vec(&self.u_max);
        let vta = m.transpose().mul_vec(&self.v_max);
        let right = residual(&au, &self.u_max, self.lambda_max);
        let left = residual(&vta, &self.v_max, self.lambda_max);
        right.max(left) / self.lambda_max
    }
}

/// Dominant eigen-data of an irreducible nonnegative matrix.
pub fn dominant_eig(m: &Matrix, tol: f64, max_iter: usize) -> Result<SpectralTriple> {
    check_tol(tol)?;
    if !is_irreducible(m) {
        return Err(Error::ReducibleMatrix);
    }
    eig_pair(m, tol, max_iter)
}

/// Like [`dominant_eig`] but without the irreducibility check. Intended for
/// effective matrices `diag(s) A` where some `s_i` may vanish; the returned
/// eigenvectors are then only guaranteed nonnegative and may not be unique.
pub fn dominant_eig_unchecked(m: &Matrix, tol: f64, max_iter: usize) -> Result<SpectralTriple> {
    check_tol(tol)?;
    if is_irreducible(m) {
        return eig_pair(m, tol, max_iter);
    }
    let inner = 0.25 * tol;
    let (lambda, u) = reducible_right(m, None, inner, max_iter)?;
    let (_, v) = reducible_right(&m.transpose(), None, inner, max_iter)?;
    Ok(SpectralTriple {
        lambda_max: lambda,
        v_max: v,
        u_max: u,
    })
}

/// Spectral radius and right eigenvector of a nonnegative matrix, starting
/// the power iteration from `start` when given (warm start). No
/// irreducibility check is made.
pub fn dominant_right(
    m: &Matrix,
    start: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>)> {
    check_tol(tol)?;
    if is_irreducible(m) {
        power_iteration(m, start, tol, max_iter)
    } else {
        reducible_right(m, start, tol, max_iter)
    }
}

/// `diag(s) A`, the matrix governing infection growth when node `i` has
/// susceptible fraction `s_i`.
pub fn effective_matrix(s: &[f64], g: &Graph) -> Result<Matrix> {
    g.check_len(s)?;
    if let Some(bad) = s.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!(
            "susceptible fractions must lie in [0, 1], found {bad}"
        )));
    }
    Ok(g.adjacency().scale_rows(s))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("tolerance must be positive, got {tol}")))
    }
}

fn eig_pair(m: &Matrix, tol: f64, max_iter: usize) -> Result<SpectralTriple> {
    // Each side is iterated to a tighter tolerance so that both residuals,
    // measured against the right-side eigenvalue, stay within `tol`.
    let inner = 0.25 * tol;
    let (lambda, u) = power_iteration(m, None, inner, max_iter)?;
    let (_, v) = power_iteration(&m.transpose(), None, inner, max_iter)?;
    Ok(SpectralTriple {
        lambda_max: lambda,
        v_max: v,
        u_max: u,
    })
}

fn residual(mu: &[f64], u: &[f64], lambda: f64) -> f64 {
    mu.iter()
        .zip(u)
        .fold(0.0, |acc, (a, b)| acc.max((a - lambda * b).abs()))
}

/// Spectral radius and a nonnegative right eigenvector of a reducible
/// matrix, from its strongly connected components.
///
/// The radius is the largest over the diagonal blocks. The eigenvector is
/// supported on a maximal block `C` plus everything downstream of it; `C`
/// is picked so that no other maximal block lies downstream, which keeps
/// the power iteration on that support geometrically convergent.
fn reducible_right(
    m: &Matrix,
    start: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>)> {
    let n = m.dim();
    if let Some(s) = start {
        if s.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: s.len() });
        }
    }
    let comp = strongly_connected_components(m);
    let count = comp.iter().max().map_or(0, |c| c + 1);
    let members: Vec<Vec<usize>> = (0..count)
        .map(|c| (0..n).filter(|&i| comp[i] == c).collect())
        .collect();
    let mut radius = vec![0.0; count];
    for (c, nodes) in members.iter().enumerate() {
        let block = m.submatrix(nodes);
        if is_irreducible(&block) {
            radius[c] = power_iteration(&block, None, tol, max_iter)?.0;
        }
    }
    let lambda = radius.iter().cloned().fold(0.0, f64::max);
    let is_max = |c: usize| radius[c] >= lambda * (1.0 - tol);

    // A maximal block with no other maximal block downstream. With lambda = 0
    // every block is maximal and this is a sink node, whose column is zero.
    let mut chosen = None;
    for c in (0..count).filter(|&c| is_max(c)) {
        let reach = reachable_set(m, &members[c]);
        let clean = (0..count).all(|d| d == c || !is_max(d) || !reach[members[d][0]]);
        if clean {
            chosen = Some(reach);
            break;
        }
    }
    let support = chosen.expect("the condensation is acyclic, so a last maximal block exists");
    let nodes: Vec<usize> = (0..n).filter(|&i| support[i]).collect();
    let mut u = vec![0.0; n];
    if lambda == 0.0 {
        let w = 1.0 / nodes.len() as f64;
        for &i in &nodes {
            u[i] = w;
        }
        return Ok((0.0, u));
    }
    let sub = m.submatrix(&nodes);
    let sub_start: Option<Vec<f64>> = start.map(|s| nodes.iter().map(|&i| s[i]).collect());
    let (_, w) = power_iteration(&sub, sub_start.as_deref(), tol, max_iter)?;
    for (k, &i) in nodes.iter().enumerate() {
        u[i] = w[k];
    }
    Ok((lambda, u))
}

/// Returns `(lambda, u)` with `u >= 0`, `1^T u = 1` and
/// `||M u - lambda u||_inf <= tol * lambda`. Iterates with `M + cI`, `c` the
/// mean row sum, which removes the oscillation on periodic matrices.
fn power_iteration(
    m: &Matrix,
    start: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>)> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let uniform = 1.0 / n as f64;
    let mut u = match start {
        Some(s) => {
            if s.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: s.len() });
            }
            warm_start(s, uniform)
        }
        None => vec![uniform; n],
    };

    let shift = m.entries().iter().sum::<f64>() / n as f64;
    if shift == 0.0 {
        // Zero matrix.
        return Ok((0.0, u));
    }

    let mut mu = vec![0.0; n];
    for _ in 0..max_iter {
        m.mul_vec_into(&u, &mut mu);
        // 1^T u = 1, so 1^T M u is the eigenvalue estimate.
        let lambda: f64 = mu.iter().sum();
        if residual(&mu, &u, lambda) <= tol * lambda {
            return Ok((lambda, u));
        }
        let norm = lambda + shift;
        for (ui, mi) in u.iter_mut().zip(&mu) {
            *ui = (mi + shift * *ui) / norm;
        }
    }
    Err(Error::NonConvergence {
        what: "power iteration",
        iterations: max_iter,
    })
}

fn warm_start(s: &[f64], uniform: f64) -> Vec<f64> {
    let total: f64 = s.iter().map(|v| v.max(0.0)).sum();
    if !(total.is_finite() && total > 0.0) {
        return vec![uniform; s.len()];
    }
    let mut u: Vec<f64> = s.iter().map(|v| v.max(0.0) / total).collect();
    if u.iter().any(|&v| v <= 0.0) {
        for v in &mut u {
            *v = 0.9 * *v + 0.1 * uniform;
        }
    }
    u
}

/// `v^T x / v^T u`: the coefficient of `x` along `u` in the spectral
/// projection onto the dominant eigendirection.
pub(crate) fn projection_coefficient(triple: &SpectralTriple, x: &[f64]) -> f64 {
    dot(&triple.v_max, x) / dot(&triple.v_max, &triple.u_max)
}
