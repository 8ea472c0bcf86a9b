//! Gaussian deblurring of the built-in test image, choosing μ from a grid.
//!
//! Writes `truth.png`, `blurred.png`, `restored.png`, a side-by-side panel
//! and the error-vs-μ plot into the output directory.
//!
//! cargo run --release --example image_deblur -- [n] [band] [out_dir]

use std::path::PathBuf;
use std::time::Instant;

use tubal::imaging::{save_image, save_panel, sweep_svg};
use tubal::problems::{add_noise, image_to_tensor, synthetic_image, BlurSpec, Problem};
use tubal::tikhonov::TikhonovGsvd;
use tubal::{relative_error, RegularizerKind};

fn main() -> tubal::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse().expect("n")).unwrap_or(128);
    let band: usize = args.next().map(|s| s.parse().expect("band")).unwrap_or(9);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "deblur-out".into()));
    std::fs::create_dir_all(&out)?;

    let x_true = image_to_tensor(&synthetic_image(n, n));
    let p = Problem::new(BlurSpec::gaussian(n, band).operator()?, x_true, RegularizerKind::L2)?;
    let (b, _) = add_noise(&p.b_true, 1e-3, 1)?;

    let start = Instant::now();
    let solver = TikhonovGsvd::new(&p.a, &p.l)?;
    println!("T-GSVD: {:.2?}", start.elapsed());
    let y = solver.project(&b)?;

    let mut sweep = Vec::new();
    for k in 0..=40 {
        let mu = 10f64.powf(-2.0 + k as f64 * 0.25);
        let e = relative_error(&solver.solve_projected(&y, mu)?, &p.x_true)?;
        println!("mu {mu:>10.3e}  error {e:.5}");
        sweep.push((mu, e));
    }
    let &(mu, best) = sweep.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let x = solver.solve_projected(&y, mu)?;
    let blurred = relative_error(&b, &p.x_true)?;
    println!("blurred error {blurred:.5}, restored error {best:.5} at mu = {mu:.3e}");
    println!("reduction {:.1}%", 100.0 * (1.0 - best / blurred));

    save_image(out.join("truth.png"), &p.x_true)?;
    save_image(out.join("blurred.png"), &b)?;
    save_image(out.join("restored.png"), &x)?;
    save_panel(out.join("panel.png"), &[&p.x_true, &b, &x])?;
    std::fs::write(out.join("sweep.svg"), sweep_svg(&sweep)?)?;
    println!("images in {}", out.display());
    Ok(())
}
