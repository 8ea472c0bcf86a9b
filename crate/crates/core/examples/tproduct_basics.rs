//! T-product arithmetic: the Fourier-domain product against the block
//! circulant definition, transposes, the identity and the inverse.
//!
//! cargo run --example tproduct_basics

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tubal::fourier::tprod_bcirc;
use tubal::{dft3, tinv, tprod, Tensor3};

fn random(rng: &mut ChaCha8Rng, n1: usize, n2: usize, n3: usize) -> Tensor3 {
    Tensor3::from_fn(n1, n2, n3, |_, _, _| rng.random_range(-1.0..1.0))
}

fn main() -> tubal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random(&mut rng, 4, 3, 5);
    let b = random(&mut rng, 3, 2, 5);

    let fast = tprod(&a, &b)?;
    let slow = tprod_bcirc(&a, &b)?;
    println!("A * B via DFT vs fold(bcirc(A) unfold(B)): {:.2e}", fast.distance(&slow) / slow.fnorm());

    // (A * B)ᵀ = Bᵀ * Aᵀ
    let lhs = fast.transpose();
    let rhs = tprod(&b.transpose(), &a.transpose())?;
    println!("(A * B)ᵀ - Bᵀ * Aᵀ: {:.2e}", lhs.distance(&rhs));

    let i = Tensor3::identity(4, 5);
    println!("I * A - A: {:.2e}", tprod(&i, &a)?.distance(&a));

    let s = random(&mut rng, 3, 3, 5);
    let s_inv = tinv(&s)?;
    println!("S * S⁻¹ - I: {:.2e}", tprod(&s, &s_inv)?.distance(&Tensor3::identity(3, 5)));

    let f = dft3(&a);
    println!(
        "Fourier slices of a real tensor are conjugate symmetric: defect {:.2e}",
        f.conjugate_symmetry_defect()
    );
    Ok(())
}
