#![allow(dead_code)]

use nalgebra::DMatrix;
use qgraph::{CMatrix, Complex64};
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of R's diagonal divided out.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let z = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q.clone();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] = q[(i, j)] * phase;
        }
    }
    u
}

/// Max-norm of `U†U - I`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
