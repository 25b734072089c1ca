//! Linear algebra on a P1 mesh: stiffness and mass products, a direct
//! stiffness solve by static condensation, and block inverse iteration.

use nalgebra::{linalg::Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mesh::Mesh;
use crate::error::{Error, Result};

/// Visits every segment as `(dof_a, dof_b, s)`, `None` marking a Dirichlet node.
fn for_each_segment(mesh: &Mesh, mut f: impl FnMut(Option<usize>, Option<usize>, f64)) {
    for e in 0..mesh.segments.len() {
        let (n, s) = (mesh.segments[e], mesh.step[e]);
        let r = &mesh.interior[e];
        let node = |j: usize| {
            if j == 0 {
                mesh.ends[e].0
            } else if j == n {
                mesh.ends[e].1
            } else {
                Some(r.start + j - 1)
            }
        };
        for j in 0..n {
            f(node(j), node(j + 1), s);
        }
    }
}

fn apply_local(mesh: &Mesh, x: &[f64], local: impl Fn(f64, f64, f64) -> (f64, f64)) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for_each_segment(mesh, |a, b, s| {
        let (xa, xb) = (a.map_or(0.0, |i| x[i]), b.map_or(0.0, |i| x[i]));
        let (ya, yb) = local(xa, xb, s);
        if let Some(i) = a {
            y[i] += ya;
        }
        if let Some(i) = b {
            y[i] += yb;
        }
    });
    y
}

/// `K x` for the stiffness matrix with Dirichlet nodes eliminated.
pub fn stiffness_apply(mesh: &Mesh, x: &[f64]) -> Vec<f64> {
    apply_local(mesh, x, |a, b, s| ((a - b) / s, (b - a) / s))
}

/// `M x` for the consistent mass matrix with Dirichlet nodes eliminated.
pub fn mass_apply(mesh: &Mesh, x: &[f64]) -> Vec<f64> {
    apply_local(mesh, x, |a, b, s| (s / 6.0 * (2.0 * a + b), s / 6.0 * (a + 2.0 * b)))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Direct solver for `K y = f`.
///
/// Each edge interior is the tridiagonal block `(1/s) tridiag(-1, 2, -1)`
/// whose inverse is known in closed form; eliminating it leaves the weighted
/// vertex Laplacian `Q` on the natural vertices, factored densely.
pub struct StiffnessSolver<'m> {
    mesh: &'m Mesh,
    schur: Option<Cholesky<f64, Dyn>>,
}

impl<'m> StiffnessSolver<'m> {
    /// `q` is the vertex matrix on the natural vertices, in DOF order.
    pub fn new(mesh: &'m Mesh, q: &DMatrix<f64>) -> Result<Self> {
        let schur = if q.nrows() == 0 { None } else { Some(q.clone().cholesky().ok_or(Error::SingularSystem)?) };
        Ok(Self { mesh, schur })
    }

    pub fn solve(&self, f: &[f64]) -> Vec<f64> {
        let mesh = self.mesh;
        let nv = mesh.vertex_dof.iter().flatten().count();
        let mut y = f.to_vec();
        // interior solves with the vertices held at zero
        for e in 0..mesh.segments.len() {
            let r = mesh.interior[e].clone();
            thomas_scaled(&mut y[r], mesh.step[e]);
        }
        if let Some(chol) = &self.schur {
            let mut rhs = DVector::from_column_slice(&f[..nv]);
            for e in 0..mesh.segments.len() {
                let r = &mesh.interior[e];
                let s = mesh.step[e];
                if let Some(t) = mesh.ends[e].0 {
                    rhs[t] += y[r.start] / s;
                }
                if let Some(h) = mesh.ends[e].1 {
                    rhs[h] += y[r.end - 1] / s;
                }
            }
            let yv = chol.solve(&rhs);
            y[..nv].copy_from_slice(yv.as_slice());
            // harmonic extension of the vertex values
            for e in 0..mesh.segments.len() {
                let r = mesh.interior[e].clone();
                let m = r.len();
                let yt = mesh.ends[e].0.map_or(0.0, |t| yv[t]);
                let yh = mesh.ends[e].1.map_or(0.0, |h| yv[h]);
                let denom = (m + 1) as f64;
                for (i, d) in r.enumerate() {
                    y[d] += (yt * (m - i) as f64 + yh * (i + 1) as f64) / denom;
                }
            }
        }
        y
    }
}

/// Solves `(1/s) tridiag(-1, 2, -1) z = g` in place. The forward-elimination
/// pivots of `tridiag(-1, 2, -1)` are `(i + 2)/(i + 1)`.
fn thomas_scaled(g: &mut [f64], s: f64) {
    let m = g.len();
    if m == 0 {
        return;
    }
    let pivot = |i: usize| (i + 2) as f64 / (i + 1) as f64;
    g[0] *= s;
    for i in 1..m {
        g[i] = g[i] * s + g[i - 1] / pivot(i - 1);
    }
    g[m - 1] /= pivot(m - 1);
    for i in (0..m - 1).rev() {
        g[i] = (g[i] + g[i + 1]) / pivot(i);
    }
}

/// Converged eigenpairs of `K x = λ M x`.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// M-orthonormalizes `ys` in place with two passes of modified Gram-Schmidt.
/// A collapsed column is replaced by a fresh random direction.
fn m_orthonormalize(mesh: &Mesh, ys: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    let mut mys: Vec<Vec<f64>> = Vec::with_capacity(ys.len());
    for j in 0..ys.len() {
        let mut attempts = 0;
        loop {
            let before = dot(&ys[j], &mass_apply(mesh, &ys[j])).sqrt();
            for _ in 0..2 {
                for i in 0..j {
                    let c = dot(&mys[i], &ys[j]);
                    let (yi, yj) = (ys[i].clone(), &mut ys[j]);
                    for (a, b) in yj.iter_mut().zip(&yi) {
                        *a -= c * b;
                    }
                }
            }
            let my = mass_apply(mesh, &ys[j]);
            let norm = dot(&ys[j], &my).sqrt();
            if norm > 1e-10 * before && norm.is_finite() && norm > 0.0 {
                ys[j].iter_mut().for_each(|v| *v /= norm);
                mys.push(my.into_iter().map(|v| v / norm).collect());
                break;
            }
            attempts += 1;
            assert!(attempts < 8, "block exceeds the space dimension");
            ys[j] = (0..ys[j].len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        }
    }
}

/// The `k` smallest eigenpairs by block inverse iteration with Rayleigh-Ritz
/// projection. Stops once each of the `k` Ritz values moves by less than
/// `tol` relative between sweeps.
pub fn block_inverse_iteration(
    mesh: &Mesh,
    solver: &StiffnessSolver<'_>,
    k: usize,
    tol: f64,
    max_iter: usize,
) -> Result<Eigenpairs> {
    let n = mesh.num_dofs();
    if k == 0 || k > n {
        return Err(Error::PreconditionViolated(format!("cannot compute {k} modes on {n} unknowns")));
    }
    let p = (k + k.max(4)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut xs: Vec<Vec<f64>> = (0..p)
        .map(|j| (0..n).map(|_| if j == 0 { rng.gen_range(0.5..1.0) } else { rng.gen_range(-1.0..1.0) }).collect())
        .collect();
    m_orthonormalize(mesh, &mut xs, &mut rng);

    let mut prev = vec![f64::INFINITY; p];
    for iter in 1..=max_iter {
        let mut ys: Vec<Vec<f64>> = xs.iter().map(|x| solver.solve(&mass_apply(mesh, x))).collect();
        m_orthonormalize(mesh, &mut ys, &mut rng);
        let kys: Vec<Vec<f64>> = ys.iter().map(|y| stiffness_apply(mesh, y)).collect();
        let a = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&ys[i], &kys[j]) + dot(&ys[j], &kys[i])));
        let eig = SymmetricEigen::new(a);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        xs = order
            .iter()
            .map(|&c| {
                let mut x = vec![0.0; n];
                for (r, y) in ys.iter().enumerate() {
                    let w = eig.eigenvectors[(r, c)];
                    x.iter_mut().zip(y).for_each(|(xi, yi)| *xi += w * yi);
                }
                x
            })
            .collect();
        let converged = (0..k).all(|j| (theta[j] - prev[j]).abs() < tol * theta[j].abs());
        prev = theta;
        if converged || p == n && iter > 1 {
            let vectors: Vec<Vec<f64>> = xs.into_iter().take(k).collect();
            let residuals = vectors
                .iter()
                .zip(&prev)
                .map(|(x, &lam)| {
                    let kx = stiffness_apply(mesh, x);
                    let mx = mass_apply(mesh, x);
                    let r: f64 = kx.iter().zip(&mx).map(|(a, b)| (a - lam * b).powi(2)).sum();
                    r.sqrt() / dot(&kx, &kx).sqrt()
                })
                .collect();
            return Ok(Eigenpairs { values: prev[..k].to_vec(), vectors, residuals, iterations: iter });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter })
}
