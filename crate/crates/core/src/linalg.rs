//! Dense-vector kernels for the spectral module.

use nalgebra::{DMatrix, SymmetricEigen};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Solves a tridiagonal system by Gaussian elimination with partial
/// pivoting. `sub[i]` couples row `i + 1` to column `i`, `sup[i]` row `i` to
/// column `i + 1`. Returns `None` on a zero pivot.
pub(crate) fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    assert!(sub.len() + 1 == n && sup.len() + 1 == n && rhs.len() == n);
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    du.push(0.0);
    // After elimination `dl[i]` holds the second superdiagonal of row i.
    let mut dl = sub.to_vec();
    dl.push(0.0);
    let mut b = rhs.to_vec();
    let scale = diag.iter().chain(sub).chain(sup).fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = 1e-14 * scale;

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i].abs() <= tiny {
                return None;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = 0.0;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            dl[i] = du[i + 1];
            du[i + 1] = -fact * dl[i];
            du[i] = temp;
            let temp = b[i];
            b[i] = b[i + 1];
            b[i + 1] = temp - fact * b[i + 1];
        }
    }
    if d[n - 1].abs() <= tiny {
        return None;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= dl[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

pub(crate) struct CgOutcome {
    pub x: Vec<f64>,
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients for a symmetric positive definite
/// operator.
pub(crate) fn pcg(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    mut precondition: impl FnMut(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> CgOutcome {
    let b_norm = norm(b);
    let mut x = vec![0.0; b.len()];
    if b_norm == 0.0 {
        return CgOutcome { x, relative_residual: 0.0 };
    }
    let mut r = b.to_vec();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < max_iter {
        iterations += 1;
        let ap = apply(&p);
        let alpha = rz / dot(&p, &ap);
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        rel = norm(&r) / b_norm;
        if rel < tol {
            break;
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        if !(rz_new > 0.0) {
            break;
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    CgOutcome { x, relative_residual: rel }
}

/// Largest eigenpairs of a symmetric operator by Lanczos with full
/// reorthogonalization. `project` is applied to every basis vector so the
/// iteration stays in an invariant subspace. Returns Ritz values in
/// descending order with their vectors.
pub(crate) fn lanczos_largest(
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
    project: impl Fn(&mut [f64]),
    start: &[f64],
    steps: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut q = start.to_vec();
    project(&mut q);
    let q_norm = norm(&q);
    if q_norm == 0.0 {
        return (Vec::new(), Vec::new());
    }
    q.iter_mut().for_each(|v| *v /= q_norm);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    for j in 0..steps {
        let mut w = apply(&basis[j]);
        project(&mut w);
        let alpha = dot(&w, &basis[j]);
        alphas.push(alpha);
        // Two passes of Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(&mut w, -c, b);
            }
        }
        let beta = norm(&w);
        if j + 1 == steps || beta < 1e-12 * alpha.abs().max(1e-300) {
            break;
        }
        betas.push(beta);
        w.iter_mut().for_each(|v| *v /= beta);
        basis.push(w);
    }
    let m = alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let dim = basis[0].len();
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v = vec![0.0; dim];
            for (k, b) in basis.iter().take(m).enumerate() {
                axpy(&mut v, eig.eigenvectors[(k, i)], b);
            }
            v
        })
        .collect();
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_with_pivoting() {
        // Indefinite matrix whose first pivot is zero.
        let sub = [1.0, 2.0, 1.0];
        let diag = [0.0, 3.0, -1.0, 2.0];
        let sup = [2.0, 1.0, 4.0];
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let mut rhs = [0.0; 4];
        for i in 0..4 {
            rhs[i] = diag[i] * x_true[i];
            if i > 0 {
                rhs[i] += sub[i - 1] * x_true[i - 1];
            }
            if i < 3 {
                rhs[i] += sup[i] * x_true[i + 1];
            }
        }
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-12, "{x:?}");
        }
        assert!(solve_tridiagonal(&[1.0], &[1.0, 1.0], &[1.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn cg_solves_laplacian() {
        let n = 50;
        let apply = |v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let l = if i > 0 { v[i - 1] } else { 0.0 };
                    let r = if i + 1 < n { v[i + 1] } else { 0.0 };
                    3.0 * v[i] - l - r
                })
                .collect()
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let out = pcg(apply, |r| r.to_vec(), &b, 1e-12, 200);
        assert!(out.relative_residual < 1e-12);
        let back = apply(&out.x);
        assert!(back.iter().zip(&b).all(|(a, c)| (a - c).abs() < 1e-10));
    }

    #[test]
    fn lanczos_finds_extremes() {
        let diag: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let start = vec![1.0; 40];
        let (vals, vecs) = lanczos_largest(|v| v.iter().zip(&diag).map(|(a, d)| a * d).collect(), |_| {}, &start, 40);
        assert!((vals[0] - 39.0).abs() < 1e-10);
        assert!((vecs[0][39].abs() - 1.0).abs() < 1e-8);
        // Odd-indexed projection keeps only those coordinates.
        let (vals, _) = lanczos_largest(
            |v| v.iter().zip(&diag).map(|(a, d)| a * d).collect(),
            |v| v.iter_mut().step_by(2).for_each(|x| *x = 0.0),
            &start,
            20,
        );
        assert!((vals[0] - 39.0).abs() < 1e-10 && (vals[1] - 37.0).abs() < 1e-10);
    }
}
