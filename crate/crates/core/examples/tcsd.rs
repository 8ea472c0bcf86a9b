//! Thin and general T-CSD of orthogonal tensors built from T-SVD factors.
//!
//! cargo run --example tcsd

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tubal::{tcsd_general, tcsd_thin, tprod, tsvd, Tensor3};

fn main() -> tubal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n3 = 4;

    // Q: 9x4x4 with Qᵀ * Q = I, from the left singular tensor of a random tensor.
    let g = Tensor3::from_fn(9, 4, n3, |_, _, _| rng.random_range(-1.0..1.0));
    let q = tsvd(&g)?.u.sub_tensor(0..9, 0..4)?;
    let f = tcsd_thin(&q, 5, None)?;
    println!("thin T-CSD, m1 = 5, m2 = 4, n = 4");
    println!("  diag(Uᵀ, Vᵀ) * Q * Z vs [C; S]: {:.2e}", f.residual(&q)?);
    println!("  Cᵀ*C + Sᵀ*S - I: {:.2e}", f.pythagoras_defect()?);
    let cc = tprod(&f.c.transpose(), &f.c)?;
    println!("  cosine tubes (first frontal slice of Cᵀ*C): {:.4?}", (0..4).map(|j| cc.get(j, j, 0)).collect::<Vec<_>>());

    // Square orthogonal Q: 7x7x4, split after 4 rows and 3 columns.
    let h = Tensor3::from_fn(7, 7, n3, |_, _, _| rng.random_range(-1.0..1.0));
    let q = tsvd(&h)?.u;
    let f = tcsd_general(&q, 4, 3, None)?;
    println!("general T-CSD, m1 = 4, n1 = 3, p = {}, q = {}", f.p, f.q);
    println!("  block pattern residual: {:.2e}", f.residual(&q)?);
    Ok(())
}
