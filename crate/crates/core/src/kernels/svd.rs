//! One-sided Jacobi SVD.
//!
//! Tall inputs are first reduced to their square triangular factor by
//! Householder QR; the Jacobi sweeps then orthogonalize columns pairwise
//! until every pair is orthogonal to working precision.

use nalgebra::DMatrix;

use super::Scalar;

const MAX_SWEEPS: usize = 80;

/// Column-major matrix with separate real and imaginary parts, which keeps
/// the rotation loops free of interleaved complex arithmetic.
struct Split {
    rows: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Split {
    fn new<T: Scalar>(m: &DMatrix<T>) -> Self {
        Self { rows: m.nrows(), re: m.iter().map(|z| z.real()).collect(), im: m.iter().map(|z| z.imaginary()).collect() }
    }

    fn write_back<T: Scalar>(&self, m: &mut DMatrix<T>) {
        for (k, z) in m.iter_mut().enumerate() {
            *z = T::from_parts(self.re[k], self.im[k]);
        }
    }

    fn col_norm_sq(&self, j: usize) -> f64 {
        let r = j * self.rows..(j + 1) * self.rows;
        self.re[r.clone()].iter().zip(&self.im[r]).map(|(a, b)| a * a + b * b).sum()
    }

    /// Columns `p < q` as `(xr, xi, yr, yi)`.
    fn pair(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64], &mut [f64], &mut [f64]) {
        let m = self.rows;
        let (rlo, rhi) = self.re.split_at_mut(q * m);
        let (ilo, ihi) = self.im.split_at_mut(q * m);
        (&mut rlo[p * m..(p + 1) * m], &mut ilo[p * m..(p + 1) * m], &mut rhi[..m], &mut ihi[..m])
    }
}

/// `[x, y] ← [c·x - s·e·y, s·x + c·e·y]` for unit `e = er + i·ei`;
/// returns the new squared norms.
#[allow(clippy::too_many_arguments)]
fn rotate(xr: &mut [f64], xi: &mut [f64], yr: &mut [f64], yi: &mut [f64], c: f64, s: f64, er: f64, ei: f64) -> (f64, f64) {
    let (esr, esi, ecr, eci) = (er * s, ei * s, er * c, ei * c);
    let (mut na, mut nb) = (0.0, 0.0);
    for i in 0..xr.len() {
        let (ar, ai, br, bi) = (xr[i], xi[i], yr[i], yi[i]);
        let pr = c * ar - (esr * br - esi * bi);
        let pi = c * ai - (esr * bi + esi * br);
        let qr = s * ar + (ecr * br - eci * bi);
        let qi = s * ai + (ecr * bi + eci * br);
        xr[i] = pr;
        xi[i] = pi;
        yr[i] = qr;
        yi[i] = qi;
        na += pr * pr + pi * pi;
        nb += qr * qr + qi * qi;
    }
    (na, nb)
}

/// Orthogonalizes the columns of `w` in place, accumulating the rotations
/// into `v`. Returns the squared column norms.
fn jacobi_sweeps<T: Scalar>(w: &mut DMatrix<T>, v: &mut DMatrix<T>) -> Vec<f64> {
    let (m, n) = w.shape();
    let tol = f64::EPSILON * m.max(1) as f64;
    let mut ws = Split::new(w);
    let mut vs = Split::new(v);
    let track_v = v.nrows() > 0;
    let mut norms: Vec<f64> = (0..n).map(|j| ws.col_norm_sq(j)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (a, b) = (norms[p], norms[q]);
                if a == 0.0 || b == 0.0 {
                    continue;
                }
                let (xr, xi, yr, yi) = ws.pair(p, q);
                let (mut gr, mut gi) = (0.0, 0.0);
                for i in 0..m {
                    gr += xr[i] * yr[i] + xi[i] * yi[i];
                    gi += xr[i] * yi[i] - xi[i] * yr[i];
                }
                let gm = gr.hypot(gi);
                if gm <= tol * (a * b).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate the phase of column q so the pair's Gram entry is
                // real, then apply the real symmetric Jacobi rotation.
                let (er, ei) = (gr / gm, -gi / gm);
                let zeta = (b - a) / (2.0 * gm);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (na, nb) = rotate(xr, xi, yr, yi, c, s, er, ei);
                norms[p] = na;
                norms[q] = nb;
                if track_v {
                    let (xr, xi, yr, yi) = vs.pair(p, q);
                    rotate(xr, xi, yr, yi, c, s, er, ei);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    ws.write_back(w);
    vs.write_back(v);
    // Recompute from the final columns rather than trusting the running sums.
    (0..n).map(|j| ws.col_norm_sq(j)).collect()
}

/// Thin SVD of a matrix with `rows ≥ cols`: `(U: m x n, σ, V: n x n)`,
/// `σ` non-increasing. Columns of `U` for zero singular values are zero.
fn svd_tall<T: Scalar>(a: &DMatrix<T>) -> (DMatrix<T>, Vec<f64>, DMatrix<T>) {
    let (m, n) = a.shape();
    let (q, mut w) = if m > n {
        let qr = a.clone().qr();
        (Some(qr.q()), qr.r())
    } else {
        (None, a.clone())
    };
    let mut v = DMatrix::<T>::identity(n, n);
    let norms = jacobi_sweeps(&mut w, &mut v);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j].sqrt()).collect();
    let mut u_small = DMatrix::<T>::zeros(w.nrows(), n);
    let mut v_sorted = DMatrix::<T>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let s = sigma[dst];
        if s > 0.0 {
            u_small.set_column(dst, &w.column(src).unscale(s));
        }
        v_sorted.set_column(dst, &v.column(src));
    }
    let u = match q {
        Some(q) => q * u_small,
        None => u_small,
    };
    (u, sigma, v_sorted)
}

/// Thin SVD `M = U diag(σ) Vᴴ`, `U: m x k`, `V: n x k`, `k = min(m, n)`,
/// `σ` non-increasing. Columns belonging to zero singular values are
/// completed to an orthonormal set.
pub(crate) fn jacobi_svd<T: Scalar>(m: &DMatrix<T>) -> (DMatrix<T>, Vec<f64>, DMatrix<T>) {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return (DMatrix::zeros(rows, 0), Vec::new(), DMatrix::zeros(cols, 0));
    }
    let (mut u, sigma, mut v) = if rows >= cols {
        svd_tall(m)
    } else {
        let (v, s, u) = svd_tall(&m.adjoint());
        (u, s, v)
    };
    let nonzero = sigma.iter().take_while(|&&s| s > 0.0).count();
    if nonzero < k {
        // Fill the null directions of U; V already holds a full basis.
        let (uk, vk) = (u.columns(0, nonzero).into_owned(), v.columns(0, nonzero).into_owned());
        let uf = super::complete_basis(&uk);
        u = uf.columns(0, k).into_owned();
        let vf = if v.ncols() == v.nrows() { v.clone() } else { super::complete_basis(&vk) };
        v = vf.columns(0, k).into_owned();
    } else if v.ncols() > k {
        v = v.columns(0, k).into_owned();
    }
    (u, sigma, v)
}

/// Singular values only, non-increasing.
pub(crate) fn singular_values<T: Scalar>(m: &DMatrix<T>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let a = if m.nrows() >= m.ncols() { m.clone() } else { m.adjoint() };
    let (rows, cols) = a.shape();
    let mut w = if rows > cols { a.qr().r() } else { a };
    let mut v = DMatrix::<T>::zeros(0, cols);
    let mut s: Vec<f64> = jacobi_sweeps(&mut w, &mut v).into_iter().map(f64::sqrt).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}
