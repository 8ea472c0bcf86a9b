//! T-SVD of a random tensor and low tubal-rank truncation.
//!
//! cargo run --example tsvd -- [n1] [n2] [n3]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tubal::{orthogonality_defect, tprod, tsvd, Tensor3};

fn main() -> tubal::Result<()> {
    let dims: Vec<usize> = std::env::args().skip(1).map(|s| s.parse().expect("dimension")).collect();
    let (n1, n2, n3) = match dims[..] {
        [a, b, c] => (a, b, c),
        _ => (8, 6, 5),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = Tensor3::from_fn(n1, n2, n3, |_, _, _| rng.random_range(-1.0..1.0));

    let f = tsvd(&a)?;
    println!("A = U * S * Vᵀ   relative error {:.2e}", f.reconstruct()?.distance(&a) / a.fnorm());
    println!("‖Uᵀ*U - I‖ = {:.2e}, ‖Vᵀ*V - I‖ = {:.2e}", orthogonality_defect(&f.u)?, orthogonality_defect(&f.v)?);
    println!("S f-diagonal: {}", f.s.is_f_diagonal(1e-12));
    println!("largest imaginary residue dropped: {:.2e}", f.imag_residue);

    // Keeping the leading k singular tubes gives the best tubal-rank-k
    // approximation in the Frobenius norm.
    for k in 1..=n1.min(n2) {
        let uk = f.u.sub_tensor(0..n1, 0..k)?;
        let sk = f.s.sub_tensor(0..k, 0..k)?;
        let vk = f.v.sub_tensor(0..n2, 0..k)?;
        let ak = tprod(&tprod(&uk, &sk)?, &vk.transpose())?;
        println!("tubal rank {k}: relative error {:.4}", ak.distance(&a) / a.fnorm());
    }
    Ok(())
}
