//! Self-adjoint vertex couplings.
//!
//! A vertex of degree `n` carries a unitary `n × n` matrix `U`; admissible
//! boundary data `(ψ, ψ')` (values and outward derivatives, one entry per
//! edge end) satisfy `(U - I)ψ + i(U + I)ψ' = 0`. Outward means the
//! derivative is taken into the edge, away from the vertex.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{CMatrix, CVector, Error, Result};

/// Unitarity tolerance `‖U†U - I‖_max`.
pub const UNITARITY_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Unitary matrix defining the matching conditions at one vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexCoupling {
    u: CMatrix,
}

/// Boundary values and outward derivatives at a vertex, in slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub values: CVector,
    pub derivatives: CVector,
}

impl BoundaryData {
    pub fn new(values: CVector, derivatives: CVector) -> Result<Self> {
        if values.len() != derivatives.len() {
            return Err(Error::Dimension {
                expected: values.len(),
                found: derivatives.len(),
            });
        }
        Ok(Self { values, derivatives })
    }

    pub fn from_slices(values: &[Complex64], derivatives: &[Complex64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(values), DVector::from_column_slice(derivatives))
    }

    pub fn from_real(values: &[f64], derivatives: &[f64]) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        Self::from_slices(&c(values), &c(derivatives))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `‖ψ‖² + ‖ψ'‖²`.
    pub fn norm_squared(&self) -> f64 {
        self.values.norm_squared() + self.derivatives.norm_squared()
    }
}

/// `‖M†M - I‖_max`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let p = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

impl VertexCoupling {
    /// Wraps a matrix, checking squareness and unitarity to [`UNITARITY_TOL`].
    pub fn new(u: CMatrix) -> Result<Self> {
        Self::with_tolerance(u, UNITARITY_TOL)
    }

    /// As [`VertexCoupling::new`] with a caller-chosen unitarity tolerance
    /// (explicit matrices read from text carry only finitely many digits).
    pub fn with_tolerance(u: CMatrix, tolerance: f64) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::Dimension {
                expected: u.nrows(),
                found: u.ncols(),
            });
        }
        if u.nrows() == 0 {
            return Err(Error::param("U", "coupling matrix must be at least 1x1"));
        }
        let defect = unitarity_defect(&u);
        if !(defect <= tolerance) {
            return Err(Error::NotUnitary { defect, tolerance });
        }
        Ok(Self { u })
    }

    /// δ-coupling of strength `alpha` at a vertex of degree `n`:
    /// `U = 2/(n + iα) 𝒥 - I` with `𝒥` the all-ones matrix.
    ///
    /// Equivalent to continuity plus `Σ ψ'_j = α ψ(0)`; `alpha = 0` is the
    /// Kirchhoff coupling.
    pub fn delta(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "vertex degree must be positive"));
        }
        let w = Complex64::new(2.0, 0.0) / Complex64::new(n as f64, alpha);
        let u = DMatrix::from_fn(n, n, |i, j| if i == j { w - 1.0 } else { w });
        Ok(Self { u })
    }

    pub fn kirchhoff(n: usize) -> Result<Self> {
        Self::delta(n, 0.0)
    }

    /// Cyclic shift `U[i, i+1 mod n] = 1`, the maximally oriented coupling at
    /// unit momentum. Row `j` reads `(ψ_{j+1} - ψ_j) + i(ψ'_{j+1} + ψ'_j) = 0`.
    pub fn circulant_shift(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("n", format!("circulant coupling needs n >= 2, got {n}")));
        }
        let u = DMatrix::from_fn(n, n, |i, j| {
            if j == (i + 1) % n {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(Self { u })
    }

    pub fn degree(&self) -> usize {
        self.u.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    /// Whether the coupling matrix is real (time-reversal invariant when
    /// additionally symmetric).
    pub fn is_real(&self) -> bool {
        self.u.iter().all(|z| z.im.abs() <= 1e-15)
    }

    /// `U - I` and `i(U + I)`, the coefficient blocks acting on `ψ` and `ψ'`.
    pub fn condition_blocks(&self) -> (CMatrix, CMatrix) {
        let n = self.degree();
        let id = CMatrix::identity(n, n);
        (&self.u - &id, (&self.u + &id) * I)
    }

    /// `‖(U - I)ψ + i(U + I)ψ'‖₂`; zero iff the data are admissible.
    pub fn residual(&self, b: &BoundaryData) -> Result<f64> {
        self.check_dim(b)?;
        let (a, d) = self.condition_blocks();
        Ok((a * &b.values + d * &b.derivatives).norm())
    }

    /// Orthonormal basis of the admissible boundary data, computed as the
    /// numerical null space of `[U - I, i(U + I)]` (singular values below
    /// `tol` relative to the largest).
    pub fn admissible_basis(&self, tol: f64) -> Vec<BoundaryData> {
        let n = self.degree();
        let (a, d) = self.condition_blocks();
        let mut m = CMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&a);
        m.view_mut((0, n), (n, n)).copy_from(&d);
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("requested V");
        let smax = svd.singular_values.max();
        (0..2 * n)
            .filter(|&i| svd.singular_values[i] <= tol * smax.max(1.0))
            .map(|i| {
                let row: Vec<Complex64> = v_t.row(i).iter().map(|z| z.conj()).collect();
                BoundaryData {
                    values: DVector::from_column_slice(&row[..n]),
                    derivatives: DVector::from_column_slice(&row[n..]),
                }
            })
            .collect()
    }

    fn check_dim(&self, b: &BoundaryData) -> Result<()> {
        if b.len() != self.degree() || b.derivatives.len() != self.degree() {
            return Err(Error::Dimension {
                expected: self.degree(),
                found: b.len(),
            });
        }
        Ok(())
    }
}

/// Boundary form `Σ_j (ψ̄₁_j ψ₂'_j - ψ̄₁'_j ψ₂_j)`.
///
/// It vanishes on every pair of admissible data for a unitary coupling.
pub fn boundary_form(b1: &BoundaryData, b2: &BoundaryData) -> Result<Complex64> {
    if b1.len() != b2.len() {
        return Err(Error::Dimension {
            expected: b1.len(),
            found: b2.len(),
        });
    }
    Ok(b1
        .values
        .iter()
        .zip(b2.derivatives.iter())
        .zip(b1.derivatives.iter().zip(b2.values.iter()))
        .map(|((v1, d2), (d1, v2))| v1.conj() * d2 - d1.conj() * v2)
        .sum())
}
