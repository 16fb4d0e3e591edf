//! Dense linear-algebra helpers: nonsymmetric eigendecomposition, the
//! continuous Lyapunov solver and symplectic spectra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues and right eigenvectors (columns) of a real square matrix.
pub fn general_eigen(m: &DMatrix<f64>) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    faer::set_global_parallelism(faer::Par::Seq);
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let eig = fm.eigen().map_err(|e| Error::Linalg(format!("eigendecomposition failed: {e:?}")))?;
    let s = eig.S();
    let u = eig.U();
    let values = (0..n).map(|i| s[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    Ok((values, vectors))
}

/// Solves A X + X Aᵀ + Q = 0 by the Bartels–Stewart method on the real Schur
/// form of A. Fails when λ_i + λ_j vanishes for some pair of eigenvalues.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let (u, t) = a.clone().schur().unpack();
    let c = -(u.transpose() * q * &u);
    let scale = t.amax().max(1e-300);
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > 1e-14 * scale {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    let mut y = DMatrix::<f64>::zeros(n, n);
    for bi in (0..blocks.len()).rev() {
        let (r0, rs) = blocks[bi];
        for bj in (0..blocks.len()).rev() {
            let (c0, cs) = blocks[bj];
            let mut rhs = c.view((r0, c0), (rs, cs)).clone_owned();
            if r0 + rs < n {
                rhs -= t.view((r0, r0 + rs), (rs, n - r0 - rs)) * y.view((r0 + rs, c0), (n - r0 - rs, cs));
            }
            if c0 + cs < n {
                rhs -= y.view((r0, c0 + cs), (rs, n - c0 - cs)) * t.view((c0, c0 + cs), (cs, n - c0 - cs)).transpose();
            }
            let tii = t.view((r0, r0), (rs, rs));
            let tjj = t.view((c0, c0), (cs, cs));
            let dim = rs * cs;
            let mut k = DMatrix::<f64>::zeros(dim, dim);
            for col in 0..cs {
                for row in 0..rs {
                    let e = row + rs * col;
                    for r2 in 0..rs {
                        k[(e, r2 + rs * col)] += tii[(row, r2)];
                    }
                    for c2 in 0..cs {
                        k[(e, row + rs * c2)] += tjj[(col, c2)];
                    }
                }
            }
            let gap = block_eigenvalues(&tii)
                .iter()
                .flat_map(|a| block_eigenvalues(&tjj).into_iter().map(move |b| (a + b).norm()))
                .fold(f64::INFINITY, f64::min);
            if gap <= 8.0 * f64::EPSILON * scale {
                return Err(Error::Conditioning(gap));
            }
            let b = DVector::from_iterator(dim, rhs.iter().copied());
            let sol = k.lu().solve(&b).ok_or(Error::Conditioning(gap))?;
            for col in 0..cs {
                for row in 0..rs {
                    y[(r0 + row, c0 + col)] = sol[row + rs * col];
                }
            }
        }
    }
    let x = &u * y * u.transpose();
    Ok(0.5 * (&x + x.transpose()))
}

/// Eigenvalues of a 1×1 or 2×2 diagonal block of a real Schur form.
fn block_eigenvalues(b: &nalgebra::DMatrixView<'_, f64>) -> Vec<Complex64> {
    if b.nrows() == 1 {
        return vec![Complex64::new(b[(0, 0)], 0.0)];
    }
    let half_trace = 0.5 * (b[(0, 0)] + b[(1, 1)]);
    let det = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
    let root = Complex64::new(half_trace * half_trace - det, 0.0).sqrt();
    vec![half_trace + root, half_trace - root]
}

/// Block-diagonal symplectic form with blocks [[0, 1], [−1, 0]].
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

/// Symplectic eigenvalues of a 2n×2n covariance matrix, ascending.
pub fn symplectic_eigenvalues(v: &DMatrix<f64>) -> Vec<f64> {
    let n = v.nrows() / 2;
    let m = symplectic_form(n) * v;
    let mut nu: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    nu.sort_by(f64::total_cmp);
    nu.chunks(2).map(|p| 0.5 * p.iter().sum::<f64>()).collect()
}

/// Smallest eigenvalue of the Hermitian matrix A + iB (A symmetric, B antisymmetric).
pub fn min_hermitian_eigenvalue(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut big = DMatrix::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(a);
    big.view_mut((n, n), (n, n)).copy_from(a);
    big.view_mut((0, n), (n, n)).copy_from(&(-b));
    big.view_mut((n, 0), (n, n)).copy_from(b);
    SymmetricEigen::new(big).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lyapunov_residual_vanishes() {
        let a = DMatrix::from_row_slice(4, 4, &[
            -1.0, 3.0, 0.2, 0.0, //
            -3.0, -1.0, 0.0, 0.5, //
            0.1, 0.0, -0.2, 2.0, //
            0.0, -0.4, -2.0, -0.3,
        ]);
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 2.0, 0.5, 0.1]));
        let x = solve_lyapunov(&a, &q).unwrap();
        let r = &a * &x + &x * a.transpose() + &q;
        assert!(r.amax() < 1e-12, "{r}");
    }

    #[test]
    fn eigen_pairs_reconstruct() {
        let m = DMatrix::from_row_slice(3, 3, &[-1.0, 2.0, 0.0, -2.0, -1.0, 0.3, 0.0, 0.1, -0.5]);
        let (vals, vecs) = general_eigen(&m).unwrap();
        let mc = m.map(|x| Complex64::new(x, 0.0));
        for (k, l) in vals.iter().enumerate() {
            let v = vecs.column(k);
            assert!((&mc * v - v * *l).norm() < 1e-12);
        }
    }

    #[test]
    fn vacuum_has_symplectic_half() {
        let nu = symplectic_eigenvalues(&(DMatrix::identity(4, 4) * 0.5));
        assert_eq!(nu.len(), 2);
        assert!(nu.iter().all(|x| (x - 0.5).abs() < 1e-14));
    }
}
