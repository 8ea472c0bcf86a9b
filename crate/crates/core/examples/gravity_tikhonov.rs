//! Gravity/prolate deblurring with an all-ones solution, solved in closed
//! form from the T-GSVD of the operator and a first-difference regularizer.
//!
//! cargo run --release --example gravity_tikhonov -- [n] [mu]

use std::time::Instant;

use tubal::problems::{add_noise, gravity_ones};
use tubal::tikhonov::{normal_residual, TikhonovGsvd};

fn main() -> tubal::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse().expect("n")).unwrap_or(64);
    let mu: f64 = args.next().map(|s| s.parse().expect("mu")).unwrap_or(7.13e-2);

    let p = gravity_ones(n, 3)?;
    let start = Instant::now();
    let solver = TikhonovGsvd::new(&p.a, &p.l)?;
    println!("T-GSVD of {n}x{n}x{n} operator: {:.2?}", start.elapsed());

    let mut errors = Vec::new();
    for seed in 1..=10 {
        let (b, _) = add_noise(&p.b_true, 1e-3, seed)?;
        let x = solver.solve(&b, mu)?;
        let e = tubal::relative_error(&x, &p.x_true)?;
        if seed == 1 {
            let (res, scale) = normal_residual(&p.a, &p.l, &b, &x, mu)?;
            println!("normal-equation residual: {:.2e}", res / scale);
        }
        println!("seed {seed:>2}: relative error {e:.5}");
        errors.push(e);
    }
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    println!("mean relative error at mu = {mu:.3e}: {mean:.5}");
    println!("total {:.2?}", start.elapsed());
    Ok(())
}
