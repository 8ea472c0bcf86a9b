//! Deblurring test problems: operators, exact solutions and noise.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::tprod;
use crate::tensor::Tensor3;
use crate::tikhonov::{make_regularizer, RegularizerKind};

/// Midpoint discretization of the 1-D gravity surveying kernel on `[0, 1]²`:
/// `K(i, j) = (1/n) d (d² + (s_i - t_j)²)^(-3/2)`, `s_i = t_i = (i + 1/2)/n`.
pub fn gravity_matrix(n: usize, d: f64) -> Result<DMatrix<f64>> {
    if n == 0 || !(d > 0.0) {
        return Err(Error::InvalidParameter(format!("gravity needs n ≥ 1 and d > 0, got n={n}, d={d}")));
    }
    let h = 1.0 / n as f64;
    let mid = |i: usize| (i as f64 + 0.5) * h;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let r = mid(i) - mid(j);
        h * d * (d * d + r * r).powf(-1.5)
    }))
}

/// Prolate matrix: symmetric Toeplitz with `c_0 = 2α`,
/// `c_k = sin(2παk) / (πk)`.
pub fn prolate_matrix(n: usize, alpha: f64) -> Result<DMatrix<f64>> {
    if n == 0 || !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidParameter(format!("prolate needs 0 < α < 0.5, got {alpha}")));
    }
    let pi = std::f64::consts::PI;
    let c: Vec<f64> = (0..n)
        .map(|k| if k == 0 { 2.0 * alpha } else { (2.0 * pi * alpha * k as f64).sin() / (pi * k as f64) })
        .collect();
    Ok(toeplitz(&c, &c))
}

/// Toeplitz matrix with first column `col` and first row `row`
/// (`row[0]` is ignored in favor of `col[0]`).
pub fn toeplitz(col: &[f64], row: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(col.len(), row.len(), |i, j| if i >= j { col[i - j] } else { row[j - i] })
}

/// Truncated Gaussian point spread pair `(K1, K2)` of size `n`.
///
/// `z1_k = exp(-k² / (2σ²))` for `k < band`, zero after; `K2` is the
/// symmetric Toeplitz matrix of `z1` and `K1` the Toeplitz matrix with column
/// `z1` and row `[z1_0, z1_{n-1}, …, z1_1]`, both scaled by `1/(σ√(2π))`.
pub fn gaussian_blur_matrices(n: usize, sigma: f64, band: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !(sigma > 0.0) || band == 0 || band > n {
        return Err(Error::InvalidParameter(format!(
            "Gaussian blur needs σ > 0 and 1 ≤ band ≤ n, got σ={sigma}, band={band}, n={n}"
        )));
    }
    let z1: Vec<f64> = (0..n)
        .map(|k| if k < band { (-((k * k) as f64) / (2.0 * sigma * sigma)).exp() } else { 0.0 })
        .collect();
    let mut z2 = vec![z1[0]];
    z2.extend(z1[1..].iter().rev());
    let c = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    Ok((toeplitz(&z1, &z2) * c, toeplitz(&z1, &z1) * c))
}

/// `A` with frontal slices `A_i = k1col_i · K2`.
pub fn separable_blur_tensor(k1col: &DVector<f64>, k2: &DMatrix<f64>) -> Result<Tensor3> {
    let n = k1col.len();
    if n == 0 || k2.is_empty() {
        return Err(Error::DimensionMismatch("empty blur factors".into()));
    }
    let slices: Vec<DMatrix<f64>> = k1col.iter().map(|&c| k2 * c).collect();
    Tensor3::from_slices(&slices)
}

/// Adds Gaussian noise of relative level `δ`:
/// `E = δ · E0 / ‖E0‖_F · ‖B_true‖_F`, `E0` standard normal from
/// ChaCha8 seeded with `seed`. Returns `(B_true + E, E)`.
pub fn add_noise(b_true: &Tensor3, level: f64, seed: u64) -> Result<(Tensor3, Tensor3)> {
    if !(level >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise level must be ≥ 0, got {level}")));
    }
    let (n1, n2, n3) = b_true.shape();
    if level == 0.0 {
        return Ok((b_true.clone(), Tensor3::zeros(n1, n2, n3)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e0 = Tensor3::from_fn(n1, n2, n3, |_, _, _| StandardNormal.sample(&mut rng));
    let e = e0.scale(level * b_true.fnorm() / e0.fnorm());
    Ok((b_true + &e, e))
}

/// Operator family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlurKind {
    /// `A_i = K1(i, 1) K2` with gravity `K1` and prolate `K2`.
    Gravity,
    /// `A_i = K1(i, 1) K2` with the truncated Gaussian pair.
    Gaussian,
}

impl std::str::FromStr for BlurKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gravity" | "gravity_prolate" => Ok(Self::Gravity),
            "gaussian" => Ok(Self::Gaussian),
            _ => Err(Error::InvalidParameter(format!("unknown problem kind {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlurSpec {
    pub kind: BlurKind,
    pub n: usize,
    pub d: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub band: usize,
}

impl BlurSpec {
    /// Gravity/prolate operator with `d = 0.8`, `α = 0.46`.
    pub fn gravity(n: usize) -> Self {
        Self { kind: BlurKind::Gravity, n, d: 0.8, alpha: 0.46, sigma: 3.0, band: 9 }
    }

    /// Gaussian operator with `σ = 3` and the given band.
    pub fn gaussian(n: usize, band: usize) -> Self {
        Self { kind: BlurKind::Gaussian, n, d: 0.8, alpha: 0.46, sigma: 3.0, band }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("n must be ≥ 2, got {}", self.n)));
        }
        match self.kind {
            BlurKind::Gravity if !(self.d > 0.0) => Err(Error::InvalidParameter(format!("d must be > 0, got {}", self.d))),
            BlurKind::Gravity if !(self.alpha > 0.0 && self.alpha < 0.5) => {
                Err(Error::InvalidParameter(format!("α must lie in (0, 0.5), got {}", self.alpha)))
            }
            BlurKind::Gaussian if !(self.sigma > 0.0) => {
                Err(Error::InvalidParameter(format!("σ must be > 0, got {}", self.sigma)))
            }
            BlurKind::Gaussian if self.band == 0 || self.band > self.n => Err(Error::InvalidParameter(format!(
                "band must lie in 1..={}, got {}",
                self.n, self.band
            ))),
            _ => Ok(()),
        }
    }

    /// The `n x n x n` blur tensor.
    pub fn operator(&self) -> Result<Tensor3> {
        self.validate()?;
        let (k1, k2) = match self.kind {
            BlurKind::Gravity => (gravity_matrix(self.n, self.d)?, prolate_matrix(self.n, self.alpha)?),
            BlurKind::Gaussian => gaussian_blur_matrices(self.n, self.sigma, self.band)?,
        };
        separable_blur_tensor(&k1.column(0).into_owned(), &k2)
    }
}

/// A complete deblurring instance with exact data.
#[derive(Clone, Debug)]
pub struct Problem {
    pub a: Tensor3,
    pub x_true: Tensor3,
    pub b_true: Tensor3,
    pub l: Tensor3,
}

impl Problem {
    pub fn new(a: Tensor3, x_true: Tensor3, regularizer: RegularizerKind) -> Result<Self> {
        let b_true = tprod(&a, &x_true)?;
        let l = make_regularizer(regularizer, a.n2(), a.n3())?;
        Ok(Self { a, x_true, b_true, l })
    }
}

/// Gravity/prolate operator of size `n`, all-ones `X_true: n x k x n` and
/// the first-difference regularizer.
pub fn gravity_ones(n: usize, k: usize) -> Result<Problem> {
    Problem::new(BlurSpec::gravity(n).operator()?, Tensor3::ones(n, k, n), RegularizerKind::L2)
}

/// Piecewise-smooth grayscale test image in `[0, 1]`, `rows x cols`: a
/// smooth background gradient, a bright disc, a darker rectangle and a
/// diagonal stripe.
pub fn synthetic_image(rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |i, j| {
        let y = (i as f64 + 0.5) / rows as f64;
        let x = (j as f64 + 0.5) / cols as f64;
        let mut v = 0.15 + 0.2 * x + 0.1 * (3.0 * y).sin().abs();
        if (x - 0.35).powi(2) + (y - 0.4).powi(2) < 0.04 {
            v = 0.9 - 0.3 * ((x - 0.35).powi(2) + (y - 0.4).powi(2)) / 0.04;
        }
        if (0.6..0.85).contains(&x) && (0.55..0.8).contains(&y) {
            v = 0.45;
        }
        if ((x + y) - 1.2).abs() < 0.03 {
            v = 1.0;
        }
        v.clamp(0.0, 1.0)
    })
}

/// Grayscale image `rows x cols` as the lateral-slice tensor `rows x 1 x cols`.
pub fn image_to_tensor(img: &DMatrix<f64>) -> Tensor3 {
    Tensor3::from_fn(img.nrows(), 1, img.ncols(), |i, _, k| img[(i, k)])
}

/// Channel `c` of a `rows x channels x cols` tensor as a `rows x cols` image.
pub fn tensor_to_image(t: &Tensor3, channel: usize) -> DMatrix<f64> {
    DMatrix::from_fn(t.n1(), t.n3(), |i, k| t.get(i, channel, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::dft3;

    #[test]
    fn gravity_formula() {
        let n = 4;
        let d = 0.8;
        let k = gravity_matrix(n, d).unwrap();
        for i in 0..n {
            for j in 0..n {
                let s = (2.0 * i as f64 + 1.0) / 8.0;
                let t = (2.0 * j as f64 + 1.0) / 8.0;
                let direct = 0.25 * 0.8 / (0.64 + (s - t) * (s - t)).powf(1.5);
                assert!((k[(i, j)] - direct).abs() < 1e-15);
                assert_eq!(k[(i, j)], k[(j, i)]);
            }
            assert!((k[(i, i)] - 1.0 / (n as f64 * d * d)).abs() < 1e-15);
        }
    }

    #[test]
    fn prolate_properties() {
        let k = prolate_matrix(8, 0.46).unwrap();
        assert_eq!(k[(0, 0)], 0.92);
        assert_eq!(k, k.transpose());
        let eig = k.clone().symmetric_eigen().eigenvalues;
        // Eigenvalues cluster at 1 from below; allow rounding at the top.
        assert!(eig.iter().all(|&e| e > 0.0 && e < 1.0 + 1e-12));
        assert!(k.cholesky().is_some());
        let near = prolate_matrix(5, 0.5 - 1e-12).unwrap();
        assert!((near - DMatrix::identity(5, 5)).amax() < 1e-10);
        assert!(prolate_matrix(4, 0.5).is_err());
    }

    #[test]
    fn gaussian_formula() {
        let (k1, k2) = gaussian_blur_matrices(10, 3.0, 9).unwrap();
        let c = 1.0 / (3.0 * (2.0 * std::f64::consts::PI).sqrt());
        let z = |k: usize| if k < 9 { (-((k * k) as f64) / 18.0).exp() } else { 0.0 };
        for i in 0..10usize {
            for j in 0..10 {
                let d = i.abs_diff(j);
                assert!((k2[(i, j)] - c * z(d)).abs() < 1e-15);
                let e = if i >= j { z(i - j) } else { z(10 - (j - i)) };
                assert!((k1[(i, j)] - c * e).abs() < 1e-15);
            }
            assert!((k2[(i, i)] - c).abs() < 1e-16);
        }
        let (k1, k2) = gaussian_blur_matrices(6, 2.0, 1).unwrap();
        let id = DMatrix::<f64>::identity(6, 6) / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
        assert_eq!(k1, id);
        assert_eq!(k2, id);
    }

    #[test]
    fn separable_tensor_diagonalizes() {
        let n = 32;
        let k1 = gravity_matrix(n, 0.8).unwrap();
        let k2 = prolate_matrix(n, 0.46).unwrap();
        let col = k1.column(0).into_owned();
        let a = separable_blur_tensor(&col, &k2).unwrap();
        let f = dft3(&a);
        let w = -2.0 * std::f64::consts::PI / n as f64;
        for i in [0, 1, 7, 16] {
            let c: num_complex::Complex64 =
                (0..n).map(|k| num_complex::Complex64::from_polar(col[k], w * (i * k) as f64)).sum();
            let expected = k2.map(|v| c * v);
            assert!((f.slice(i) - expected).norm() < 1e-12 * (1.0 + f.slice(i).norm()));
        }
        let e1 = DVector::from_fn(4, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let a = separable_blur_tensor(&e1, &k2.view((0, 0), (4, 4)).into_owned()).unwrap();
        assert_eq!(a.frontal(0), k2.view((0, 0), (4, 4)).into_owned());
        assert_eq!(a.frontal(2).norm(), 0.0);
    }

    #[test]
    fn noise_scaling_and_determinism() {
        let b = Tensor3::from_fn(5, 2, 4, |i, j, k| (i + 2 * j + 3 * k) as f64);
        let (b0, e0) = add_noise(&b, 0.0, 1).unwrap();
        assert_eq!(b0, b);
        assert_eq!(e0.fnorm(), 0.0);
        let (b1, e1) = add_noise(&b, 1e-3, 7).unwrap();
        assert!((e1.fnorm() / b.fnorm() - 1e-3).abs() < 1e-15);
        let (b2, _) = add_noise(&b, 1e-3, 7).unwrap();
        assert_eq!(b1, b2);
        let (_, e3) = add_noise(&b, 1e-3, 8).unwrap();
        assert_ne!(e1, e3);
    }

    #[test]
    fn blur_spec_validation() {
        assert!(BlurSpec::gravity(1).operator().is_err());
        assert!(BlurSpec { alpha: 0.6, ..BlurSpec::gravity(4) }.operator().is_err());
        assert!(BlurSpec::gaussian(5, 6).operator().is_err());
        assert_eq!(BlurSpec::gaussian(6, 3).operator().unwrap().shape(), (6, 6, 6));
    }

    #[test]
    fn synthetic_image_range() {
        let img = synthetic_image(40, 30);
        assert!(img.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(img.max() - img.min() > 0.5);
    }
}
