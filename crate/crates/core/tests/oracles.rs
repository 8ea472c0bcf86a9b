//! Independent reference values and cross-checks for the generators and
//! decompositions. Reference tables were evaluated in 30-digit arithmetic.

use nalgebra::DMatrix;
use tubal::fourier::{dft_half, tprod_bcirc};
use tubal::kernels::numerical_rank;
use tubal::problems::{gaussian_blur_matrices, gravity_matrix, prolate_matrix, separable_blur_tensor, BlurSpec};
use tubal::{dft3, make_regularizer, tgsvd, tinv, tprod, tsvd, RegularizerKind, Tensor3};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn gravity_matches_reference_table() {
    let row0 = [
        0.1953125,
        0.18837217040059132,
        0.16983629502402664,
        0.1449894212904513,
        0.11910088539397302,
        0.09557603077314292,
        0.07583546820583005,
        0.06000615380568569,
    ];
    let row3 = [
        0.1449894212904513,
        0.16983629502402664,
        0.18837217040059132,
        0.1953125,
        0.18837217040059132,
        0.16983629502402664,
        0.1449894212904513,
        0.11910088539397302,
    ];
    let k = gravity_matrix(8, 0.8).unwrap();
    for j in 0..8 {
        assert!(close(k[(0, j)], row0[j], 1e-15), "({}, {j})", 0);
        assert!(close(k[(3, j)], row3[j], 1e-15), "({}, {j})", 3);
    }
    assert!((&k - k.transpose()).amax() <= 1e-15);
    // Diagonal is 1 / (n d²).
    assert!(close(k[(5, 5)], 1.0 / (8.0 * 0.64), 1e-15));
}

#[test]
fn prolate_matches_reference_table() {
    let col = [
        0.92,
        0.07916044967850468,
        -0.07667347858596998,
        0.07263270379186806,
        -0.06718948146708563,
        0.060546138291252556,
        -0.05294696238906401,
        0.04466739185417679,
    ];
    let k = prolate_matrix(8, 0.46).unwrap();
    for i in 0..8 {
        assert!(close(k[(i, 0)], col[i], 1e-15));
        assert!(close(k[(0, i)], col[i], 1e-15));
    }
    // Smallest eigenvalues from the same reference evaluation.
    let mut ev: Vec<f64> = k.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    assert!(close(ev[0], 0.4241736834781331, 1e-12));
    assert!(close(ev[1], 0.9370143263438022, 1e-12));
    assert!(k.cholesky().is_some());
}

#[test]
fn gaussian_pair_matches_reference_table() {
    let z1 = [
        1.0,
        0.9459594689067654,
        0.8007374029168081,
        0.6065306597126334,
        0.41111229050718745,
        0.2493522087772962,
        0.1353352832366127,
        0.06572852861653049,
        0.028565500784550373,
        0.0,
    ];
    let c = 0.13298076013381088;
    let (k1, k2) = gaussian_blur_matrices(10, 3.0, 9).unwrap();
    for i in 0..10usize {
        for j in 0..10 {
            let sym = z1[i.abs_diff(j)] * c;
            // K1 has column z1 and row [z1_0, z1_9, z1_8, …, z1_1].
            let wrapped = if i >= j { z1[i - j] } else { z1[10 - (j - i)] } * c;
            assert!(close(k2[(i, j)], sym, 1e-15), "K2 ({i}, {j})");
            assert!(close(k1[(i, j)], wrapped, 1e-15), "K1 ({i}, {j})");
        }
    }
}

#[test]
fn separable_operator_diagonalizes_through_the_dft() {
    let n = 32;
    let k1 = gravity_matrix(n, 0.8).unwrap();
    let k2 = prolate_matrix(n, 0.46).unwrap();
    let col = k1.column(0).into_owned();
    let a = separable_blur_tensor(&col, &k2).unwrap();
    let f = dft3(&a);
    for i in 0..n {
        // Direct DFT of the first column of K1.
        let w = num_complex::Complex64::new(0.0, -2.0 * std::f64::consts::PI * i as f64 / n as f64);
        let c: num_complex::Complex64 = (0..n).map(|k| col[k] * (w * k as f64).exp()).sum();
        let expect = k2.map(|v| c * v);
        assert!((f.slice(i) - expect).norm() <= 1e-12 * k2.norm());
    }
}

#[test]
fn gravity_stack_has_full_rank_in_every_slice() {
    let n = 32;
    let a = BlurSpec::gravity(n).operator().unwrap();
    let l = make_regularizer(RegularizerKind::L2, n, n).unwrap();
    let (ah, lh) = (dft_half(&a), dft_half(&l));
    for (i, (x, y)) in ah.iter().zip(&lh).enumerate() {
        let mut stack = DMatrix::zeros(2 * n - 1, n);
        stack.rows_mut(0, n).copy_from(x);
        stack.rows_mut(n, n - 1).copy_from(y);
        assert_eq!(numerical_rank(&stack, tubal::tol::rank(2 * n - 1, n)), n, "slice {i}");
    }
    let g = tgsvd(&a, &l).unwrap();
    assert!(g.ranks.iter().all(|&r| r == n));
    assert!(g.is_uniform());
}

#[test]
fn gsvd_against_identity_recovers_singular_tubes() {
    // With B = I, D_Bᵀ*D_B is invertible and A*X*(D_B)⁻¹ = U*D_A*(D_B)⁻¹ is
    // a T-SVD of A, so the quotient of generalized values matches tsvd(A).
    let mut s = 17u64;
    let mut rnd = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let (m, n, n3) = (6, 4, 5);
    let a = Tensor3::from_fn(m, n, n3, |_, _, _| rnd());
    let b = Tensor3::identity(n, n3);
    let g = tgsvd(&a, &b).unwrap();
    let (ra, rb) = g.residuals(&a, &b).unwrap();
    assert!(ra + rb <= 1e-9 * (a.fnorm() + b.fnorm()));
    let xi = tinv(&g.x).unwrap();
    assert!(tprod(&tprod(&g.u, &g.d_a).unwrap(), &xi).unwrap().distance(&a) <= 1e-9 * a.fnorm());

    let fa = dft3(&g.d_a);
    let fb = dft3(&g.d_b);
    let fs = dft3(&tsvd(&a).unwrap().s);
    for i in 0..n3 {
        let mut q: Vec<f64> = (0..n).map(|j| fa.slice(i)[(j, j)].norm() / fb.slice(i)[(j, j)].norm()).collect();
        q.sort_by(|x, y| y.total_cmp(x));
        for (j, &qj) in q.iter().enumerate() {
            assert!(close(qj, fs.slice(i)[(j, j)].norm(), 1e-10), "slice {i} value {j}");
        }
    }
}

#[test]
fn factor_identities_hold_slice_by_slice() {
    let mut s = 5u64;
    let mut rnd = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let a = Tensor3::from_fn(5, 3, 4, |_, _, _| rnd());
    let b = Tensor3::from_fn(2, 3, 4, |_, _, _| rnd());
    let g = tgsvd(&a, &b).unwrap();
    let (fu, fa, fx, fda) = (dft3(&g.u), dft3(&a), dft3(&g.x), dft3(&g.d_a));
    for i in 0..4 {
        let lhs = fu.slice(i).adjoint() * fa.slice(i) * fx.slice(i);
        assert!((lhs - fda.slice(i)).norm() <= 1e-11 * (a.fnorm() + b.fnorm()));
    }
    let t = tsvd(&a).unwrap();
    let back = tprod(&tprod(&t.u, &t.s).unwrap(), &t.v.transpose()).unwrap();
    assert!(back.distance(&tprod_bcirc(&tprod_bcirc(&t.u, &t.s).unwrap(), &t.v.transpose()).unwrap()) <= 1e-12);
}
