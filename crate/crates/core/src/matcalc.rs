//! Symmetric-matrix calculus kernels.
//!
//! Everything the half-vectorized derivatives need: `vech`/`unvech` with a
//! fixed column-major lower-triangle ordering, the action of the transposed
//! duplication matrix, the matrix-free Hessian apply based on the identity
//! `(S ⊗ S)^{-1} vec(Δ) = vec(S^{-1} Δ S^{-1})`, projection onto the
//! eigenvalue-floored positive definite set, log-determinant and inverse via
//! Cholesky.
//!
//! The duplication and elimination matrices are never materialized here; only
//! their actions are implemented. Explicit constructions live in test code.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Length of the half-vectorization of an `n`×`n` symmetric matrix.
pub fn vech_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of matrix entry `(i, j)`, `i >= j`, in the vech ordering
/// (column-major lower triangle: column `j` contributes rows `j..n-1`).
pub fn vech_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j && i < n);
    j * n - j * (j + 1) / 2 + i
}

/// Dense symmetric matrix, entries mirrored exactly across the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    m: DMatrix<f64>,
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix order must be at least 1");
        SymMat {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "matrix order must be at least 1");
        SymMat {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        assert!(!diag.is_empty(), "matrix order must be at least 1");
        SymMat {
            m: DMatrix::from_diagonal(&DVector::from_row_slice(diag)),
        }
    }

    /// Builds the matrix from `f(i, j)` evaluated on the lower triangle
    /// (`i >= j`) and mirrored, so the result is symmetric by construction.
    pub fn from_lower_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        assert!(n >= 1, "matrix order must be at least 1");
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMat { m }
    }

    /// Wraps a dense square matrix, requiring exact entrywise symmetry.
    pub fn from_dense(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        let n = m.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::State(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(SymMat { m })
    }

    /// `(M + Mᵀ)/2`, mirrored so the result is exactly symmetric.
    pub fn symmetrized(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        Self::from_lower_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    /// Mirrors the lower triangle of `m` onto the upper one.
    fn mirror_lower(mut m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                m[(j, i)] = m[(i, j)];
            }
        }
        SymMat { m }
    }

    /// Rank-one outer product `x xᵀ`.
    pub fn outer(x: &DVector<f64>) -> Self {
        Self::from_lower_fn(x.len(), |i, j| x[i] * x[j])
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.m
    }

    /// `a·A + b·B`; symmetry is preserved entrywise.
    pub fn lin_comb(a: f64, ma: &SymMat, b: f64, mb: &SymMat) -> Result<SymMat> {
        if ma.n() != mb.n() {
            return Err(Error::DimensionMismatch {
                expected: ma.n(),
                actual: mb.n(),
            });
        }
        Ok(SymMat {
            m: &ma.m * a + &mb.m * b,
        })
    }

    pub fn sub(&self, other: &SymMat) -> Result<SymMat> {
        Self::lin_comb(1.0, self, -1.0, other)
    }

    pub fn scale(&self, a: f64) -> SymMat {
        SymMat { m: &self.m * a }
    }

    /// Congruence `self · mid · self`; mathematically symmetric, mirrored to
    /// keep it exactly so under floating point.
    pub fn sandwich(&self, mid: &SymMat) -> Result<SymMat> {
        if self.n() != mid.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: mid.n(),
            });
        }
        let prod = &self.m * &mid.m * &self.m;
        Ok(Self::mirror_lower(prod))
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.m * x
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    /// `tr(A·B) = Σ_ij A_ij B_ij` for symmetric `A`, `B`.
    pub fn trace_product(&self, other: &SymMat) -> Result<f64> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: other.n(),
            });
        }
        Ok(self.m.iter().zip(other.m.iter()).map(|(a, b)| a * b).sum())
    }

    pub fn frob_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|v| v.is_finite())
    }

    /// Smallest eigenvalue, via the same factorization used by the projection.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = symmetric_eigen(&self.m)?;
        Ok(eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min))
    }

    /// Writes the text dump: first line `n`, then `n` rows of `n`
    /// space-separated decimals. Values round-trip exactly.
    pub fn write_text<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let n = self.n();
        writeln!(w, "{n}")?;
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| self.m[(i, j)].to_string()).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    /// Reads the text dump format written by [`SymMat::write_text`].
    pub fn read_text<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing matrix order line".into(),
        })??;
        let n: usize = header.trim().parse().map_err(|_| Error::Parse {
            line: 1,
            message: format!("invalid matrix order '{header}'"),
        })?;
        if n == 0 {
            return Err(Error::Parse {
                line: 1,
                message: "matrix order must be at least 1".into(),
            });
        }
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let line = lines.next().ok_or(Error::Parse {
                line: i + 2,
                message: "missing matrix row".into(),
            })??;
            let vals: Vec<&str> = line.split_whitespace().collect();
            if vals.len() != n {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!("expected {n} entries, got {}", vals.len()),
                });
            }
            for (j, tok) in vals.iter().enumerate() {
                m[(i, j)] = tok.parse().map_err(|_| Error::Parse {
                    line: i + 2,
                    message: format!("invalid number '{tok}'"),
                })?;
            }
        }
        Self::from_dense(m).map_err(|_| Error::Parse {
            line: 2,
            message: "matrix is not symmetric".into(),
        })
    }
}

/// Half-vectorization living alongside its matrix order `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct VechVec {
    n: usize,
    data: DVector<f64>,
}

impl VechVec {
    pub fn new(n: usize, data: DVector<f64>) -> Result<Self> {
        if data.len() != vech_len(n) {
            return Err(Error::DimensionMismatch {
                expected: vech_len(n),
                actual: data.len(),
            });
        }
        Ok(VechVec { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        VechVec {
            n,
            data: DVector::zeros(vech_len(n)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.len() == 0
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.data
    }

    pub fn get(&self, k: usize) -> f64 {
        self.data[k]
    }

    pub fn dot(&self, other: &VechVec) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.data.dot(&other.data))
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &VechVec) -> Result<VechVec> {
        self.check_dim(other)?;
        Ok(VechVec {
            n: self.n,
            data: &self.data + &other.data * a,
        })
    }

    pub fn sub(&self, other: &VechVec) -> Result<VechVec> {
        self.axpy(-1.0, other)
    }

    pub fn scale(&self, a: f64) -> VechVec {
        VechVec {
            n: self.n,
            data: &self.data * a,
        }
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn check_dim(&self, other: &VechVec) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        Ok(())
    }
}

/// Stacks the unique entries of `S` column-major over the lower triangle.
pub fn vech(s: &SymMat) -> VechVec {
    let n = s.n();
    let mut data = DVector::zeros(vech_len(n));
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            data[k] = s.get(i, j);
            k += 1;
        }
    }
    VechVec { n, data }
}

/// Inverse of [`vech`]: rebuilds the symmetric matrix whose lower triangle
/// is `v`. Exact round trip: `vech(unvech(v)) == v`.
pub fn unvech(v: &VechVec) -> SymMat {
    let n = v.n();
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            m[(i, j)] = v.data[k];
            m[(j, i)] = v.data[k];
            k += 1;
        }
    }
    SymMat { m }
}

/// Applies `Dᵀ` to `vec(M)` without materializing the duplication matrix:
/// diagonal entries are copied, off-diagonal pairs are summed.
pub fn dup_transpose_apply(m: &DMatrix<f64>) -> VechVec {
    assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
    let n = m.nrows();
    let mut data = DVector::zeros(vech_len(n));
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            data[k] = if i == j {
                m[(i, j)]
            } else {
                m[(i, j)] + m[(j, i)]
            };
            k += 1;
        }
    }
    VechVec { n, data }
}

/// The Hessian action `Dᵀ (S ⊗ S)^{-1} D · dir`, computed matrix-free from
/// the inverse `S^{-1}` as `Dᵀ vec(S^{-1} · unvech(dir) · S^{-1})`.
pub fn hessian_apply(s_inv: &SymMat, dir: &VechVec) -> Result<VechVec> {
    if s_inv.n() != dir.n() {
        return Err(Error::DimensionMismatch {
            expected: s_inv.n(),
            actual: dir.n(),
        });
    }
    let mid = unvech(dir);
    let sandwiched = s_inv.sandwich(&mid)?;
    Ok(dup_transpose_apply(sandwiched.as_dmatrix()))
}

fn symmetric_eigen(m: &DMatrix<f64>) -> Result<nalgebra::SymmetricEigen<f64, nalgebra::Dyn>> {
    // 1x1 matrices hit a degenerate path in the tridiagonalization; handle
    // them directly.
    if m.nrows() == 1 {
        return Ok(nalgebra::SymmetricEigen {
            eigenvalues: DVector::from_element(1, m[(0, 0)]),
            eigenvectors: DMatrix::identity(1, 1),
        });
    }
    m.clone()
        .try_symmetric_eigen(f64::EPSILON, 200 * m.nrows().max(8))
        .ok_or_else(|| Error::Numerical("symmetric eigendecomposition did not converge".into()))
}

/// Projects onto `{S : λ_min(S) >= eps}` by flooring the spectrum.
///
/// Already-feasible inputs are returned unchanged, which makes the
/// projection exactly idempotent in that regime.
pub fn project_spd(s: &SymMat, eps: f64) -> Result<SymMat> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("must be positive, got {eps}"),
        });
    }
    let eig = symmetric_eigen(&s.m)?;
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min >= eps {
        return Ok(s.clone());
    }
    let floored = eig.eigenvalues.map(|l| l.max(eps));
    let recomposed =
        &eig.eigenvectors * DMatrix::from_diagonal(&floored) * eig.eigenvectors.transpose();
    Ok(SymMat::symmetrized(&recomposed))
}

/// `log det(S)` via Cholesky: twice the sum of the log factor diagonal.
pub fn logdet_spd(s: &SymMat) -> Result<f64> {
    let chol = s.m.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Inverse of an SPD matrix via Cholesky, mirrored to exact symmetry.
pub fn spd_inverse(s: &SymMat) -> Result<SymMat> {
    let chol = s.m.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(SymMat::mirror_lower(chol.inverse()))
}
