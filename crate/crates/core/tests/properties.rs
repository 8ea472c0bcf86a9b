//! Randomized invariants of the tensor algebra, decompositions, solvers
//! and generators.

use proptest::prelude::*;
use tubal::fourier::tprod_bcirc;
use tubal::io::{read_t3b, write_t3b};
use tubal::problems::add_noise;
use tubal::tikhonov::normal_residual;
use tubal::{
    dft3, make_regularizer, orthogonality_defect, solve_tikhonov_gsvd, solve_tikhonov_normal, tcsd_thin, tgsvd,
    tprod, tsvd, RegularizerKind, Tensor3,
};

fn tensor(n1: usize, n2: usize, n3: usize, seed: u64) -> Tensor3 {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    Tensor3::from_fn(n1, n2, n3, |_, _, _| {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    })
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=8, 1usize..=8, 1usize..=8)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn product_matches_block_circulant_definition((n1, n2, n3) in dims(), n4 in 1usize..=8, seed in any::<u64>()) {
        let a = tensor(n1, n2, n3, seed);
        let b = tensor(n2, n4, n3, seed ^ 1);
        let fast = tprod(&a, &b).unwrap();
        let slow = tprod_bcirc(&a, &b).unwrap();
        prop_assert!(fast.distance(&slow) <= 1e-12 * (1.0 + slow.fnorm()));
    }

    #[test]
    fn product_is_associative_and_transposes((n1, n2, n3) in dims(), seed in any::<u64>()) {
        let a = tensor(n1, n2, n3, seed);
        let b = tensor(n2, 3, n3, seed ^ 2);
        let c = tensor(3, 2, n3, seed ^ 3);
        let left = tprod(&tprod(&a, &b).unwrap(), &c).unwrap();
        let right = tprod(&a, &tprod(&b, &c).unwrap()).unwrap();
        prop_assert!(left.distance(&right) <= 1e-12 * (1.0 + left.fnorm()));
        let t = tprod(&a, &b).unwrap().transpose();
        let u = tprod(&b.transpose(), &a.transpose()).unwrap();
        prop_assert!(t.distance(&u) <= 1e-12 * (1.0 + t.fnorm()));
        let i = Tensor3::identity(n1, n3);
        prop_assert!(tprod(&i, &a).unwrap().distance(&a) <= 1e-13 * (1.0 + a.fnorm()));
    }

    #[test]
    fn dft_of_real_tensor_is_conjugate_symmetric((n1, n2, n3) in dims(), seed in any::<u64>()) {
        let f = dft3(&tensor(n1, n2, n3, seed));
        prop_assert!(f.conjugate_symmetry_defect() <= 1e-13);
    }

    #[test]
    fn t3b_round_trip_is_bit_exact((n1, n2, n3) in dims(), seed in any::<u64>()) {
        let a = tensor(n1, n2, n3, seed);
        let mut buf = Vec::new();
        write_t3b(&mut buf, &a).unwrap();
        prop_assert_eq!(buf.len(), 28 + 8 * n1 * n2 * n3);
        prop_assert_eq!(read_t3b(buf.as_slice()).unwrap(), a);
    }

    #[test]
    fn tsvd_factors((n1, n2, n3) in dims(), seed in any::<u64>()) {
        let a = tensor(n1, n2, n3, seed);
        let f = tsvd(&a).unwrap();
        prop_assert!(f.reconstruct().unwrap().distance(&a) <= 1e-10 * a.fnorm());
        prop_assert!(orthogonality_defect(&f.u).unwrap() <= 1e-10);
        prop_assert!(orthogonality_defect(&f.v).unwrap() <= 1e-10);
        let fs = dft3(&f.s);
        for i in 0..n3 {
            let s = fs.slice(i);
            for r in 0..n1 {
                for c in 0..n2 {
                    if r != c {
                        prop_assert!(s[(r, c)].norm() <= 1e-12 * (1.0 + a.fnorm()));
                    }
                }
            }
            for j in 1..n1.min(n2) {
                prop_assert!(s[(j, j)].norm() <= s[(j - 1, j - 1)].norm() + 1e-12);
            }
        }
        prop_assert!(f.imag_residue <= 1e-8);
    }

    #[test]
    fn tcsd_thin_factors(m1 in 1usize..=8, extra in 0usize..=4, n3 in 1usize..=8, seed in any::<u64>()) {
        let n = m1.min(4);
        let m2 = n + extra.min(8 - n);
        let q = tsvd(&tensor(m1 + m2, n, n3, seed)).unwrap().u.sub_tensor(0..m1 + m2, 0..n).unwrap();
        let f = tcsd_thin(&q, m1, None).unwrap();
        prop_assert!(f.residual(&q).unwrap() <= 1e-10);
        prop_assert!(f.pythagoras_defect().unwrap() <= 1e-10);
        for t in [&f.u, &f.v, &f.z] {
            prop_assert!(orthogonality_defect(t).unwrap() <= 1e-10);
        }
        prop_assert!(f.c.is_f_diagonal(1e-12) && f.s.is_f_diagonal(1e-12));
    }

    #[test]
    fn tgsvd_factors(n in 1usize..=6, m1x in 0usize..=2, m2 in 1usize..=8, n3 in 1usize..=8, seed in any::<u64>()) {
        let a = tensor(n + m1x, n, n3, seed);
        let b = tensor(m2, n, n3, seed ^ 9);
        let g = tgsvd(&a, &b).unwrap();
        let (ra, rb) = g.residuals(&a, &b).unwrap();
        let scale = a.fnorm() + b.fnorm();
        prop_assert!(ra <= 1e-9 * scale && rb <= 1e-9 * scale);
        prop_assert!(orthogonality_defect(&g.u).unwrap() <= 1e-10);
        prop_assert!(orthogonality_defect(&g.v).unwrap() <= 1e-10);
        prop_assert_eq!(g.ranks.len(), n3);
        if let Some(d) = g.pythagoras_defect() {
            prop_assert!(d <= 1e-10);
        }
    }

    #[test]
    fn tikhonov_routes_agree(m in 3usize..=16, n3 in 1usize..=8, k in 1usize..=3, log_mu in -3.0f64..3.0, seed in any::<u64>()) {
        let a = tensor(m, m, n3, seed);
        let l = make_regularizer(RegularizerKind::L2, m, n3).unwrap();
        let b = tensor(m, k, n3, seed ^ 4);
        let mu = 10f64.powf(log_mu);
        let g = tgsvd(&a, &l).unwrap();
        prop_assume!(g.ranks.iter().all(|&r| r == m));
        let x = solve_tikhonov_gsvd(&g, &b, mu).unwrap();
        let y = solve_tikhonov_normal(&a, &l, &b, mu).unwrap();
        prop_assert!(x.distance(&y) <= 1e-8 * y.fnorm());
        let (res, scale) = normal_residual(&a, &l, &b, &x, mu).unwrap();
        prop_assert!(res <= 1e-8 * scale);
    }

    #[test]
    fn noise_has_exact_level_and_is_reproducible((n1, n2, n3) in dims(), level in 0.0f64..0.1, seed in any::<u64>()) {
        let b = tensor(n1, n2, n3, seed);
        let (x, e) = add_noise(&b, level, seed).unwrap();
        let (y, _) = add_noise(&b, level, seed).unwrap();
        prop_assert_eq!(&x, &y);
        prop_assert!((e.fnorm() / b.fnorm() - level).abs() <= 1e-12);
        prop_assert!(x.distance(&(&b + &e)) == 0.0);
    }
}

#[test]
fn decompositions_are_bit_reproducible() {
    let a = tensor(6, 4, 5, 1);
    let b = tensor(3, 4, 5, 2);
    let (f, g) = (tsvd(&a).unwrap(), tsvd(&a).unwrap());
    assert_eq!((f.u, f.s, f.v), (g.u, g.s, g.v));
    let (f, g) = (tgsvd(&a, &b).unwrap(), tgsvd(&a, &b).unwrap());
    assert_eq!((f.u, f.v, f.x, f.d_a, f.d_b), (g.u, g.v, g.x, g.d_a, g.d_b));
}
