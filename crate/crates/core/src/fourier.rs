//! Mode-3 DFT machinery and the T-product computed in the Fourier domain.
//!
//! The forward transform is unnormalized, `Â_i = Σ_j ω^{(i-1)(j-1)} A_j`
//! with `ω = exp(-2πi/n3)`; the inverse carries the `1/n3` factor. Any length
//! `n3` is supported.
//!
//! Real tensors have conjugate-symmetric spectra, `Â_{n3-i} = conj(Â_i)`, so
//! most routines here only touch the half spectrum `i = 0..=n3/2` and mirror
//! the rest.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;
use crate::tol;

pub type C64 = Complex64;

/// Number of Fourier slices that determine a real tensor's spectrum.
pub fn half_len(n3: usize) -> usize {
    n3 / 2 + 1
}

/// Fourier slice `i` equals its own mirror (DC, and Nyquist for even `n3`).
pub fn is_self_conjugate(i: usize, n3: usize) -> bool {
    i == 0 || 2 * i == n3
}

/// Complex slice stack `Â` of a third-order tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierStack {
    n1: usize,
    n2: usize,
    n3: usize,
    slices: Vec<DMatrix<C64>>,
    real_origin: bool,
}

impl FourierStack {
    pub fn from_slices(slices: Vec<DMatrix<C64>>, real_origin: bool) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty Fourier stack".into()))?;
        let (n1, n2) = first.shape();
        if n1 == 0 || n2 == 0 || slices.iter().any(|s| s.shape() != (n1, n2)) {
            return Err(Error::DimensionMismatch("Fourier slices differ in shape".into()));
        }
        Ok(Self { n1, n2, n3: slices.len(), slices, real_origin })
    }

    /// Expands the half spectrum of a real tensor by conjugate mirroring.
    pub fn from_half_spectrum(n3: usize, half: Vec<DMatrix<C64>>) -> Result<Self> {
        if half.len() != half_len(n3) {
            return Err(Error::DimensionMismatch(format!(
                "{} half-spectrum slices for n3 = {n3}",
                half.len()
            )));
        }
        let mut slices = half;
        for i in half_len(n3)..n3 {
            let mirrored = slices[n3 - i].map(|z| z.conj());
            slices.push(mirrored);
        }
        Self::from_slices(slices, true)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n1, self.n2, self.n3)
    }

    pub fn n3(&self) -> usize {
        self.n3
    }

    pub fn slices(&self) -> &[DMatrix<C64>] {
        &self.slices
    }

    pub fn slice(&self, i: usize) -> &DMatrix<C64> {
        &self.slices[i]
    }

    pub fn into_slices(self) -> Vec<DMatrix<C64>> {
        self.slices
    }

    pub fn is_real_origin(&self) -> bool {
        self.real_origin
    }

    /// `max_i ‖Â_{n3-i} - conj(Â_i)‖_F`, relative to `1 + max_i ‖Â_i‖_F`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let scale = 1.0 + self.slices.iter().map(|s| s.norm()).fold(0.0, f64::max);
        let worst = (0..self.n3)
            .map(|i| {
                let mirror = (self.n3 - i) % self.n3;
                (&self.slices[mirror] - self.slices[i].map(|z| z.conj())).norm()
            })
            .fold(0.0, f64::max);
        worst / scale
    }

    /// Slice-wise product `Ĉ_i = Â_i B̂_i`.
    pub fn mul(&self, other: &FourierStack) -> Result<FourierStack> {
        if self.n2 != other.n1 || self.n3 != other.n3 {
            return Err(Error::DimensionMismatch(format!(
                "Fourier product {:?} * {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let slices = self.slices.par_iter().zip(&other.slices).map(|(a, b)| a * b).collect();
        FourierStack::from_slices(slices, self.real_origin && other.real_origin)
    }

    /// Slice-wise sum `Ĉ_i = Â_i + B̂_i`.
    pub fn add(&self, other: &FourierStack) -> Result<FourierStack> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "Fourier sum {:?} + {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let slices = self.slices.iter().zip(&other.slices).map(|(a, b)| a + b).collect();
        FourierStack::from_slices(slices, self.real_origin && other.real_origin)
    }

    /// Parseval: `‖A‖_F² = (1/n3) Σ_i ‖Â_i‖_F²`.
    pub fn parseval_norm(&self) -> f64 {
        (self.slices.iter().map(|s| s.norm_squared()).sum::<f64>() / self.n3 as f64).sqrt()
    }
}

/// Runs a forward FFT along every tube and keeps the first `keep` Fourier slices.
fn forward_tubes(a: &Tensor3, keep: usize) -> Vec<DMatrix<C64>> {
    let (n1, n2, n3) = a.shape();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n3);
    let mut out = vec![DMatrix::<C64>::zeros(n1, n2); keep];
    // One row of tubes at a time keeps the scratch buffer at n2 * n3.
    let mut buf = vec![C64::new(0.0, 0.0); n2 * n3];
    for i in 0..n1 {
        for j in 0..n2 {
            for k in 0..n3 {
                buf[j * n3 + k] = C64::new(a.get(i, j, k), 0.0);
            }
        }
        fft.process(&mut buf);
        for (k, slice) in out.iter_mut().enumerate() {
            for j in 0..n2 {
                slice[(i, j)] = buf[j * n3 + k];
            }
        }
    }
    out
}

/// Full mode-3 DFT of a real tensor.
pub fn dft3(a: &Tensor3) -> FourierStack {
    FourierStack::from_slices(forward_tubes(a, a.n3()), true).expect("non-empty spectrum")
}

/// Half spectrum `Â_0 ..= Â_{n3/2}` of a real tensor.
pub fn dft_half(a: &Tensor3) -> Vec<DMatrix<C64>> {
    forward_tubes(a, half_len(a.n3()))
}

/// Inverse DFT of a full stack; returns the real part and the largest
/// discarded imaginary magnitude.
fn inverse_full(f: &FourierStack) -> (Tensor3, f64) {
    let (n1, n2, n3) = f.shape();
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n3);
    let scale = 1.0 / n3 as f64;
    let mut out = Tensor3::zeros(n1, n2, n3);
    let mut residue = 0.0_f64;
    let mut buf = vec![C64::new(0.0, 0.0); n2 * n3];
    for i in 0..n1 {
        for j in 0..n2 {
            for k in 0..n3 {
                buf[j * n3 + k] = f.slices[k][(i, j)];
            }
        }
        ifft.process(&mut buf);
        for j in 0..n2 {
            for k in 0..n3 {
                let z = buf[j * n3 + k] * scale;
                residue = residue.max(z.im.abs());
                out.set(i, j, k, z.re);
            }
        }
    }
    (out, residue)
}

/// Inverse DFT from a half spectrum, mirroring the missing slices. Returns the
/// real tensor and the largest discarded imaginary magnitude.
pub fn idft_half(n3: usize, half: &[DMatrix<C64>]) -> Result<(Tensor3, f64)> {
    if half.len() != half_len(n3) {
        return Err(Error::DimensionMismatch(format!(
            "{} half-spectrum slices for n3 = {n3}",
            half.len()
        )));
    }
    let (n1, n2) = half[0].shape();
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n3);
    let scale = 1.0 / n3 as f64;
    let h = half.len();
    let mut out = Tensor3::zeros(n1, n2, n3);
    let mut residue = 0.0_f64;
    let mut buf = vec![C64::new(0.0, 0.0); n2 * n3];
    for i in 0..n1 {
        for j in 0..n2 {
            for k in 0..n3 {
                buf[j * n3 + k] = if k < h { half[k][(i, j)] } else { half[n3 - k][(i, j)].conj() };
            }
        }
        ifft.process(&mut buf);
        for j in 0..n2 {
            for k in 0..n3 {
                let z = buf[j * n3 + k] * scale;
                residue = residue.max(z.im.abs());
                out.set(i, j, k, z.re);
            }
        }
    }
    Ok((out, residue))
}

/// Inverse mode-3 DFT, returning the real tensor together with the imaginary
/// residue that was discarded.
///
/// Fails when a real-origin stack violates conjugate symmetry, or when the
/// residue exceeds `1e-8 (1 + ‖A‖_F)`.
pub fn idft3_with_residue(f: &FourierStack) -> Result<(Tensor3, f64)> {
    if f.real_origin {
        let defect = f.conjugate_symmetry_defect();
        if defect > tol::IMAG_RESIDUE {
            return Err(Error::ConjugateSymmetry { defect, tol: tol::IMAG_RESIDUE });
        }
    }
    let (t, residue) = inverse_full(f);
    let limit = tol::IMAG_RESIDUE * (1.0 + t.fnorm());
    if residue > limit {
        return Err(Error::ImaginaryResidue { residue, tol: limit });
    }
    Ok((t, residue))
}

pub fn idft3(f: &FourierStack) -> Result<Tensor3> {
    idft3_with_residue(f).map(|(t, _)| t)
}

/// Applies `op` to each half-spectrum slice pair in parallel and transforms back.
pub(crate) fn map2_half(
    a: &Tensor3,
    b: &Tensor3,
    op: impl Fn(&DMatrix<C64>, &DMatrix<C64>) -> DMatrix<C64> + Sync,
) -> Result<Tensor3> {
    let n3 = a.n3();
    let ah = dft_half(a);
    let bh = dft_half(b);
    let ch: Vec<_> = ah.par_iter().zip(&bh).map(|(x, y)| op(x, y)).collect();
    Ok(idft_half(n3, &ch)?.0)
}

/// T-product `A * B`, evaluated slice-wise in the Fourier domain.
pub fn tprod(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    if a.n2() != b.n1() || a.n3() != b.n3() {
        return Err(Error::DimensionMismatch(format!(
            "T-product {:?} * {:?}",
            a.shape(),
            b.shape()
        )));
    }
    map2_half(a, b, |x, y| x * y)
}

/// `Aᵀ * B` without materializing the transpose.
pub fn tprod_tn(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    if a.n1() != b.n1() || a.n3() != b.n3() {
        return Err(Error::DimensionMismatch(format!(
            "T-product {:?}ᵀ * {:?}",
            a.shape(),
            b.shape()
        )));
    }
    map2_half(a, b, |x, y| x.ad_mul(y))
}

/// Definition-level T-product `fold(bcirc(A) · unfold(B))`.
pub fn tprod_bcirc(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    if a.n2() != b.n1() || a.n3() != b.n3() {
        return Err(Error::DimensionMismatch(format!(
            "T-product {:?} * {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Tensor3::fold(&(a.bcirc() * b.unfold()), a.n1(), a.n3())
}

/// T-inverse, inverting every Fourier slice.
///
/// A slice is singular when its smallest full-pivot LU pivot falls below
/// `n · ε · 10` times its largest.
pub fn tinv(a: &Tensor3) -> Result<Tensor3> {
    let (n1, n2, n3) = a.shape();
    if n1 != n2 {
        return Err(Error::DimensionMismatch(format!("T-inverse of non-square {n1}x{n2}x{n3}")));
    }
    let half = dft_half(a);
    let inverted: Vec<Result<DMatrix<C64>>> = half
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| {
            let lu = s.full_piv_lu();
            let pivots: Vec<f64> = lu.u().diagonal().iter().map(|z| z.norm()).collect();
            let max = pivots.iter().cloned().fold(0.0, f64::max);
            let min = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
            let thresh = 10.0 * n1 as f64 * f64::EPSILON * max;
            if max == 0.0 || min <= thresh {
                return Err(Error::SingularSlice {
                    index: i,
                    detail: format!("pivot ratio {:.3e}", if max == 0.0 { 0.0 } else { min / max }),
                });
            }
            lu.try_inverse().ok_or_else(|| Error::SingularSlice {
                index: i,
                detail: "LU inverse failed".into(),
            })
        })
        .collect();
    let inverted = inverted.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(idft_half(n3, &inverted)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
        m.map(|v| C64::new(v, 0.0))
    }

    fn rand_tensor(n1: usize, n2: usize, n3: usize, seed: u64) -> Tensor3 {
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        Tensor3::from_fn(n1, n2, n3, |_, _, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
    }

    /// Direct evaluation of the DFT sum, independent of the FFT path.
    fn dft_sum(a: &Tensor3) -> Vec<DMatrix<C64>> {
        let (n1, n2, n3) = a.shape();
        (0..n3)
            .map(|i| {
                let mut s = DMatrix::<C64>::zeros(n1, n2);
                for j in 0..n3 {
                    let w = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (i * j) as f64 / n3 as f64);
                    s += complexify(&a.frontal(j)) * w;
                }
                s
            })
            .collect()
    }

    #[test]
    fn two_slice_dft_is_sum_and_difference() {
        let a = rand_tensor(3, 2, 2, 1);
        let f = dft3(&a);
        let (a1, a2) = (complexify(&a.frontal(0)), complexify(&a.frontal(1)));
        assert!((f.slice(0) - (&a1 + &a2)).norm() < 1e-14);
        assert!((f.slice(1) - (&a1 - &a2)).norm() < 1e-14);
    }

    #[test]
    fn constant_tube_concentrates_in_dc() {
        let a = Tensor3::from_fn(2, 2, 5, |i, j, _| (i + 2 * j) as f64 + 1.0);
        let f = dft3(&a);
        assert!((f.slice(0) - complexify(&a.frontal(0)) * C64::new(5.0, 0.0)).norm() < 1e-13);
        for i in 1..5 {
            assert!(f.slice(i).norm() < 1e-13);
        }
    }

    #[test]
    fn fft_matches_direct_sum_and_round_trips() {
        let a = rand_tensor(5, 4, 6, 7);
        let f = dft3(&a);
        for (x, y) in f.slices().iter().zip(dft_sum(&a)) {
            assert!((x - &y).norm() <= 1e-12 * (1.0 + y.norm()));
        }
        let back = idft3(&f).unwrap();
        assert!(back.distance(&a) <= 1e-12 * a.fnorm());
        assert!(f.conjugate_symmetry_defect() < 1e-14);
    }

    #[test]
    fn half_spectrum_round_trip_odd_and_even() {
        for n3 in [1, 2, 3, 7, 8] {
            let a = rand_tensor(3, 4, n3, n3 as u64);
            let (back, residue) = idft_half(n3, &dft_half(&a)).unwrap();
            assert!(back.distance(&a) <= 1e-13 * a.fnorm());
            assert!(residue < 1e-14);
        }
    }

    #[test]
    fn identity_spectrum_is_identity() {
        let f = dft3(&Tensor3::identity(3, 4));
        for s in f.slices() {
            assert!((s - DMatrix::<C64>::identity(3, 3)).norm() < 1e-15);
        }
    }

    #[test]
    fn idft_rejects_broken_symmetry() {
        let mut slices = dft3(&rand_tensor(2, 2, 4, 3)).into_slices();
        slices[1][(0, 0)] += C64::new(0.0, 1.0);
        let f = FourierStack::from_slices(slices.clone(), true).unwrap();
        assert!(matches!(idft3(&f), Err(Error::ConjugateSymmetry { .. })));
        let g = FourierStack::from_slices(slices, false).unwrap();
        assert!(matches!(idft3(&g), Err(Error::ImaginaryResidue { .. })));
    }

    #[test]
    fn parseval() {
        let a = rand_tensor(4, 3, 5, 11);
        assert!((dft3(&a).parseval_norm() - a.fnorm()).abs() <= 1e-12 * a.fnorm());
    }

    #[test]
    fn tprod_identity_and_single_slice() {
        let a = rand_tensor(3, 4, 5, 2);
        let i = Tensor3::identity(4, 5);
        assert!(tprod(&a, &i).unwrap().distance(&a) < 1e-13);
        let a1 = rand_tensor(3, 4, 1, 5);
        let b1 = rand_tensor(4, 2, 1, 6);
        let c = tprod(&a1, &b1).unwrap();
        assert!((c.frontal(0) - a1.frontal(0) * b1.frontal(0)).norm() < 1e-14);
        assert!(tprod(&a, &a).is_err());
    }

    #[test]
    fn tprod_matches_bcirc_definition() {
        let a = rand_tensor(4, 3, 5, 8);
        let b = rand_tensor(3, 2, 5, 9);
        let fast = tprod(&a, &b).unwrap();
        let slow = tprod_bcirc(&a, &b).unwrap();
        assert!(fast.distance(&slow) <= 1e-12 * slow.fnorm());
        let tn = tprod_tn(&a.transpose(), &b).unwrap();
        assert!(tn.distance(&slow) <= 1e-12 * slow.fnorm());
    }

    #[test]
    fn tinv_cases() {
        let i = Tensor3::identity(3, 4);
        assert!(tinv(&i).unwrap().distance(&i) < 1e-15);

        // Tube-scaled identity: inverse tube has Fourier coefficients 1/t̂_i.
        let tube = [2.0, 0.5, -0.25];
        let t = Tensor3::from_fn(2, 2, 3, |i, j, k| if i == j { tube[k] } else { 0.0 });
        let inv = tinv(&t).unwrap();
        let that = dft_half(&Tensor3::from_fn(1, 1, 3, |_, _, k| tube[k]));
        let ihat = dft_half(&inv);
        for (x, y) in that.iter().zip(&ihat) {
            assert!((y[(0, 0)] - x[(0, 0)].inv()).norm() < 1e-14);
            assert!(y[(0, 1)].norm() < 1e-14);
        }

        let a = &rand_tensor(4, 4, 3, 21) + &Tensor3::identity(4, 3).scale(3.0);
        let b = tinv(&a).unwrap();
        let id = Tensor3::identity(4, 3);
        assert!(tprod(&a, &b).unwrap().distance(&id) < 1e-10);
        assert!(tprod(&b, &a).unwrap().distance(&id) < 1e-10);

        let singular = Tensor3::zeros(2, 2, 3);
        assert!(matches!(tinv(&singular), Err(Error::SingularSlice { index: 0, .. })));
    }
}
