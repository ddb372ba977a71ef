//! Lanczos propagation `ψ ← exp(−iHt) ψ` for large Hermitian `H` given only
//! as a matrix-vector product.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::C64;

#[derive(Debug, Clone, Copy)]
pub struct LanczosPropagator {
    /// Maximum Krylov subspace dimension per substep.
    pub max_dim: usize,
    /// Accepted a-posteriori error per substep.
    pub tol: f64,
}

impl Default for LanczosPropagator {
    fn default() -> Self {
        LanczosPropagator {
            max_dim: 40,
            tol: 1e-12,
        }
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl LanczosPropagator {
    /// Advance `psi` by `t`, splitting into as many substeps as the error
    /// estimate requires. Returns the number of substeps taken.
    pub fn propagate<F>(&self, apply: F, psi: &mut [C64], t: f64) -> Result<usize>
    where
        F: Fn(&[C64], &mut [C64]),
    {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("propagation time must be >= 0, got {t}")));
        }
        let mut remaining = t;
        let mut steps = 0;
        while remaining > 0.0 {
            let done = self.substep(&apply, psi, remaining)?;
            remaining -= done;
            // Treat round-off leftovers as done.
            if remaining <= t * 1e-14 {
                remaining = 0.0;
            }
            steps += 1;
        }
        Ok(steps)
    }

    /// One Krylov substep of length at most `dt_max`; returns the length taken.
    fn substep<F>(&self, apply: &F, psi: &mut [C64], dt_max: f64) -> Result<f64>
    where
        F: Fn(&[C64], &mut [C64]),
    {
        let n = psi.len();
        let beta0 = norm(psi);
        if beta0 == 0.0 {
            return Ok(dt_max);
        }
        let m_max = self.max_dim.min(n).max(1);

        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m_max);
        basis.push(psi.iter().map(|z| z / beta0).collect());
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let mut w = vec![C64::new(0.0, 0.0); n];
        // Residual norm after the last basis vector; zero means the subspace
        // is invariant and the step is exact for any length.
        let mut residual = 0.0;

        for j in 0..m_max {
            apply(&basis[j], &mut w);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                *wi -= vi * a;
            }
            if j > 0 {
                let b = beta[j - 1];
                for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi -= vi * b;
                }
            }
            // Full reorthogonalization.
            for v in &basis {
                let h = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= vi * h;
                }
            }
            let b = norm(&w);
            if b <= 1e-13 * (a.abs() + 1.0) {
                residual = 0.0;
                break;
            }
            residual = b;
            if j + 1 == m_max {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|z| z / b).collect());
        }

        let m = alpha.len();
        let tri = DMatrix::from_fn(m, m, |i, k| {
            if i == k {
                alpha[i]
            } else if i + 1 == k {
                beta[i]
            } else if k + 1 == i {
                beta[k]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(tri);

        let coeffs = |dt: f64| -> DVector<C64> {
            // c = Q exp(−iΘdt) Qᵀ e₁
            DVector::from_fn(m, |i, _| {
                (0..m)
                    .map(|k| {
                        let q0 = eig.eigenvectors[(0, k)];
                        let phase = C64::new(0.0, -eig.eigenvalues[k] * dt).exp();
                        phase * (eig.eigenvectors[(i, k)] * q0)
                    })
                    .sum()
            })
        };

        let mut dt = dt_max;
        let mut c = coeffs(dt);
        let mut halvings = 0;
        while residual > 0.0 && residual * c[m - 1].norm() > self.tol {
            dt *= 0.5;
            halvings += 1;
            if halvings > 60 {
                return Err(Error::IntegratorFailure {
                    time: dt,
                    drift: residual * c[m - 1].norm(),
                });
            }
            c = coeffs(dt);
        }

        psi.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for (cj, v) in c.iter().zip(&basis) {
            let s = cj * beta0;
            for (p, vi) in psi.iter_mut().zip(v) {
                *p += vi * s;
            }
        }
        Ok(dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    /// Dense Hermitian test operator.
    fn random_hermitian(n: usize, seed: u64) -> DMatrix<C64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = DMatrix::from_fn(n, n, |_, _| C64::new(next(), next()));
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn matches_dense_exponential() {
        let n = 12;
        let h = random_hermitian(n, 7) * C64::from(20.0);
        let apply = |x: &[C64], y: &mut [C64]| {
            let v = &h * DVector::from_column_slice(x);
            y.copy_from_slice(v.as_slice());
        };
        let mut psi = vec![C64::new(0.0, 0.0); n];
        psi[0] = C64::new(1.0, 0.0);
        let t = 1.3;
        let prop = LanczosPropagator { max_dim: 6, tol: 1e-13 };
        let steps = prop.propagate(apply, &mut psi, t).unwrap();
        assert!(steps > 1, "small subspace should force substeps");

        let u = (&h * C64::new(0.0, -t)).exp();
        let exact = u.column(0);
        let err = psi.iter().zip(exact.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "err = {err}");
        assert!((norm(&psi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invariant_subspace_is_exact() {
        // Diagonal operator: the start vector is an eigenvector.
        let apply = |x: &[C64], y: &mut [C64]| {
            for (i, (xi, yi)) in x.iter().zip(y.iter_mut()).enumerate() {
                *yi = xi * (i as f64);
            }
        };
        let mut psi = vec![C64::new(0.0, 0.0); 5];
        psi[3] = C64::new(1.0, 0.0);
        let steps = LanczosPropagator::default().propagate(apply, &mut psi, 100.0).unwrap();
        assert_eq!(steps, 1);
        assert!((psi[3] - C64::new(0.0, -300.0).exp()).norm() < 1e-9);
    }
}
