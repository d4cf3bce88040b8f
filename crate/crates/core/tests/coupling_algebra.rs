mod common;

use proptest::prelude::*;
use qgraph::coupling::{boundary_form, BoundaryData, VertexCoupling};
use qgraph::{CMatrix, Complex64};
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{random_unitary, unitarity_error};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn delta_matrix_entries() {
    // (n=3, α=1): U = 2/(3+i) J - I, checked entrywise
    let u = VertexCoupling::delta(3, 1.0).unwrap();
    let off = c(2.0) / Complex64::new(3.0, 1.0);
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { off - c(1.0) } else { off };
            assert!((u.matrix()[(i, j)] - want).norm() < 1e-15);
        }
    }
    assert!(unitarity_error(u.matrix()) <= 1e-12);
    assert_eq!(VertexCoupling::delta(1, 0.0).unwrap().matrix()[(0, 0)], c(1.0));
    let k4 = VertexCoupling::delta(4, 0.0).unwrap();
    assert_eq!(k4.matrix(), VertexCoupling::kirchhoff(4).unwrap().matrix());
    assert!((k4.matrix()[(0, 1)] - c(0.5)).norm() < 1e-15);
    assert!((k4.matrix()[(2, 2)] + c(0.5)).norm() < 1e-15);
}

#[test]
fn circulant_rows_are_cyclic_conditions() {
    for n in 2..7 {
        let u = VertexCoupling::circulant_shift(n).unwrap();
        let (a, b) = u.condition_blocks();
        // row j of (U - I)ψ + i(U + I)ψ' reads ψ_{j+1} - ψ_j + i(ψ'_{j+1} + ψ'_j)
        for j in 0..n {
            for m in 0..n {
                let v = if m == (j + 1) % n { 1.0 } else { 0.0 } - if m == j { 1.0 } else { 0.0 };
                let d = if m == (j + 1) % n { 1.0 } else { 0.0 } + if m == j { 1.0 } else { 0.0 };
                assert_eq!(a[(j, m)], c(v));
                assert_eq!(b[(j, m)], Complex64::new(0.0, d));
            }
        }
    }
    assert!(VertexCoupling::circulant_shift(1).is_err());
}

#[test]
fn residual_examples() {
    let k2 = VertexCoupling::kirchhoff(2).unwrap();
    let b = BoundaryData::from_real(&[1.0, 1.0], &[0.7, -0.7]).unwrap();
    assert!(k2.residual(&b).unwrap() < 1e-15);
    let d3 = VertexCoupling::delta(3, 2.0).unwrap();
    let b = BoundaryData::from_real(&[1.0, 1.0, 1.0], &[1.0, 1.0, 0.0]).unwrap();
    assert!(d3.residual(&b).unwrap() < 1e-14);
    let c3 = VertexCoupling::circulant_shift(3).unwrap();
    let b = BoundaryData::from_real(&[1.0, 1.0, 1.0], &[0.0; 3]).unwrap();
    assert!(c3.residual(&b).unwrap() < 1e-15);
    let wrong = BoundaryData::from_real(&[1.0, 0.0], &[0.0; 2]).unwrap();
    assert!(k2.residual(&wrong).unwrap() > 0.1);
    assert!(d3.residual(&wrong).is_err());
}

#[test]
fn boundary_form_examples() {
    let zero = BoundaryData::from_real(&[0.0; 3], &[0.0; 3]).unwrap();
    assert_eq!(boundary_form(&zero, &zero).unwrap(), c(0.0));
    // antisymmetric unitary coupling, non-admissible data
    let u = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(-1.0), c(0.0)]);
    let v = VertexCoupling::new(u).unwrap();
    let x = BoundaryData::from_real(&[1.0, 0.0], &[0.0, 0.0]).unwrap();
    assert!(v.residual(&x).unwrap() > 0.1);
    let y = BoundaryData::from_slices(&[c(0.0), c(0.0)], &[c(1.0), Complex64::new(0.0, 1.0)]).unwrap();
    assert!(boundary_form(&x, &y).unwrap().norm() > 0.5);
}

#[test]
fn kirchhoff_is_an_involution() {
    for n in 1..8 {
        let u = VertexCoupling::kirchhoff(n).unwrap();
        let sq = u.matrix() * u.matrix();
        assert!(unitarity_error(&sq) < 1e-14);
        assert!((sq - CMatrix::identity(n, n)).iter().all(|z| z.norm() < 1e-14));
    }
}

#[test]
fn rejects_non_unitary() {
    let m = CMatrix::from_element(2, 2, c(1.0));
    assert!(VertexCoupling::new(m).is_err());
}

#[test]
fn random_unitary_kernels() {
    let mut rng = StdRng::seed_from_u64(7);
    for n in 1..=6 {
        for _ in 0..100 {
            let u = random_unitary(n, &mut rng);
            let v = VertexCoupling::new(u).unwrap();
            let basis = v.admissible_basis(1e-10);
            assert_eq!(basis.len(), n);
            for b1 in &basis {
                assert!(v.residual(b1).unwrap() < 1e-10);
                for b2 in &basis {
                    let f = boundary_form(b1, b2).unwrap();
                    assert!(f.norm() <= 1e-10 * b1.norm_squared().sqrt() * b2.norm_squared().sqrt());
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn delta_is_unitary(n in 1usize..9, alpha in -50.0f64..50.0) {
        let u = VertexCoupling::delta(n, alpha).unwrap();
        prop_assert!(unitarity_error(u.matrix()) <= 1e-12);
    }

    #[test]
    fn admissible_combinations_kill_the_form(seed in any::<u64>(), n in 1usize..7, w in proptest::collection::vec(-1.0f64..1.0, 12)) {
        let mut rng = StdRng::seed_from_u64(seed);
        let v = VertexCoupling::new(random_unitary(n, &mut rng)).unwrap();
        let basis = v.admissible_basis(1e-10);
        prop_assert_eq!(basis.len(), n);
        // a random element of the kernel
        let mut vals = vec![c(0.0); n];
        let mut ders = vec![c(0.0); n];
        for (i, b) in basis.iter().enumerate() {
            let coef = Complex64::new(w[2 * i], w[2 * i + 1]);
            for j in 0..n {
                vals[j] += coef * b.values[j];
                ders[j] += coef * b.derivatives[j];
            }
        }
        let x = BoundaryData::from_slices(&vals, &ders).unwrap();
        let f = boundary_form(&x, &x).unwrap();
        prop_assert!(f.norm() <= 1e-10 * (1.0 + x.norm_squared()));
    }
}
