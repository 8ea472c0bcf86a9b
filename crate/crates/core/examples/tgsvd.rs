//! T-GSVD of a random pair, with the per-slice rank structure.
//!
//! cargo run --example tgsvd -- [m1] [m2] [n] [n3]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tubal::{tgsvd, tinv, tprod, Tensor3};

fn main() -> tubal::Result<()> {
    let dims: Vec<usize> = std::env::args().skip(1).map(|s| s.parse().expect("dimension")).collect();
    let (m1, m2, n, n3) = match dims[..] {
        [a, b, c, d] => (a, b, c, d),
        _ => (7, 4, 5, 6),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = Tensor3::from_fn(m1, n, n3, |_, _, _| rng.random_range(-1.0..1.0));
    let b = Tensor3::from_fn(m2, n, n3, |_, _, _| rng.random_range(-1.0..1.0));

    let f = tgsvd(&a, &b)?;
    let (ra, rb) = f.residuals(&a, &b)?;
    let scale = a.fnorm() + b.fnorm();
    println!("Uᵀ*A*X - D_A: {:.2e}   Vᵀ*B*X - D_B: {:.2e}", ra / scale, rb / scale);

    let x_inv = tinv(&f.x)?;
    let a_back = tprod(&tprod(&f.u, &f.d_a)?, &x_inv)?;
    let b_back = tprod(&tprod(&f.v, &f.d_b)?, &x_inv)?;
    println!("A = U*D_A*X⁻¹: {:.2e}   B = V*D_B*X⁻¹: {:.2e}", a_back.distance(&a) / scale, b_back.distance(&b) / scale);

    println!("per-slice r_i = {:?}, p_i = {:?}, uniform: {}", f.ranks, f.splits, f.is_uniform());
    if let Some(d) = f.pythagoras_defect() {
        println!("S_Aᵀ*S_A + S_Bᵀ*S_B - I on the paired block: {d:.2e}");
    }
    Ok(())
}
