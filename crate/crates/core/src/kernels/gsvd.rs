use nalgebra::DMatrix;

use super::{conj, cs_pairing, pick_columns, svd_thin, Scalar};
use crate::error::{Error, Result};
use crate::tol;

/// GSVD of a pair `A: m1 x n`, `B: m2 x n` with `m1 ≥ n`:
///
/// ```text
/// Uᴴ A X = D_A = [S_A 0 0; 0 I_p 0; 0 0 0]
/// Vᴴ B X = D_B = [S_B 0 0; 0   0 0; 0 0 0]
/// ```
///
/// where `r = rank([A; B])`, `p = max(r - m2, 0)`, `S_A = diag(alpha)` and
/// `S_B = diag(beta)` are `(r - p) x (r - p)` with `alpha² + beta² = 1` and
/// `alpha / beta` non-increasing.
#[derive(Clone, Debug)]
pub struct MatGsvd<T: Scalar> {
    pub u: DMatrix<T>,
    pub v: DMatrix<T>,
    pub x: DMatrix<T>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub r: usize,
    pub p: usize,
}

impl<T: Scalar> MatGsvd<T> {
    pub fn m1(&self) -> usize {
        self.u.nrows()
    }

    pub fn m2(&self) -> usize {
        self.v.nrows()
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Diagonal of `D_A` (length `n`).
    pub fn d_a_diag(&self) -> Vec<f64> {
        let k = self.r - self.p;
        (0..self.n())
            .map(|j| if j < k { self.alpha[j] } else if j < self.r { 1.0 } else { 0.0 })
            .collect()
    }

    /// Diagonal of `D_B` (length `n`, zero beyond `r - p`).
    pub fn d_b_diag(&self) -> Vec<f64> {
        let k = self.r - self.p;
        (0..self.n()).map(|j| if j < k { self.beta[j] } else { 0.0 }).collect()
    }

    pub fn d_a(&self) -> DMatrix<f64> {
        let d = self.d_a_diag();
        DMatrix::from_fn(self.m1(), self.n(), |i, j| if i == j { d[j] } else { 0.0 })
    }

    pub fn d_b(&self) -> DMatrix<f64> {
        let d = self.d_b_diag();
        DMatrix::from_fn(self.m2(), self.n(), |i, j| if i == j { d[j] } else { 0.0 })
    }

    /// `(‖Uᴴ A X - D_A‖_F, ‖Vᴴ B X - D_B‖_F)`.
    pub fn residuals(&self, a: &DMatrix<T>, b: &DMatrix<T>) -> (f64, f64) {
        let ra = (self.u.ad_mul(a) * &self.x - self.d_a().map(T::from_real)).norm();
        let rb = (self.v.ad_mul(b) * &self.x - self.d_b().map(T::from_real)).norm();
        (ra, rb)
    }

    /// Factors of the conjugate pair `(conj A, conj B)`.
    pub fn conjugate(&self) -> Self {
        Self { u: conj(&self.u), v: conj(&self.v), x: conj(&self.x), ..self.clone() }
    }
}

/// Computes the GSVD through the stacked matrix: `[A; B] = Q Σ Wᴴ` (rank
/// `r`), a cosine/sine pairing of `Q`'s two blocks, then
/// `X = W diag(Σ_r⁻¹ Z, I)`.
///
/// `rank_rtol` defaults to `ε · max(m1 + m2, n)`.
pub fn gsvd_pair<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, rank_rtol: Option<f64>) -> Result<MatGsvd<T>> {
    let (m1, n) = a.shape();
    let m2 = b.nrows();
    if b.ncols() != n || n == 0 || m2 == 0 {
        return Err(Error::DimensionMismatch(format!(
            "GSVD pair {m1}x{n} and {m2}x{}",
            b.ncols()
        )));
    }
    if m1 < n {
        return Err(Error::Precondition(format!("GSVD needs m1 ≥ n; got m1={m1}, n={n}")));
    }

    let mut stacked = DMatrix::<T>::zeros(m1 + m2, n);
    stacked.rows_mut(0, m1).copy_from(a);
    stacked.rows_mut(m1, m2).copy_from(b);
    let (q_thin, sigma, w) = svd_thin(&stacked);
    let rtol = rank_rtol.unwrap_or_else(|| tol::rank(m1 + m2, n));
    let smax = sigma.first().cloned().unwrap_or(0.0);
    let r = if smax == 0.0 { 0 } else { sigma.iter().filter(|&&s| s > rtol * smax).count() };

    if r == 0 {
        return Ok(MatGsvd {
            u: DMatrix::identity(m1, m1),
            v: DMatrix::identity(m2, m2),
            x: DMatrix::identity(n, n),
            alpha: Vec::new(),
            beta: Vec::new(),
            r: 0,
            p: 0,
        });
    }

    let q1 = q_thin.view((0, 0), (m1, r)).into_owned();
    let q2 = q_thin.view((m1, 0), (m2, r)).into_owned();
    let cs = cs_pairing(&q1, &q2)?;

    let paired: Vec<usize> = (0..r).filter(|&j| cs.v_pair[j].is_some()).collect();
    let unpaired: Vec<usize> = (0..r).filter(|&j| cs.v_pair[j].is_none()).collect();
    let p = unpaired.len();
    debug_assert_eq!(p, r.saturating_sub(m2));
    let order: Vec<usize> = paired.iter().chain(&unpaired).cloned().collect();

    let z = pick_columns(&cs.z, &order);
    let mut x = w.clone();
    let mut scaled = z;
    for i in 0..r {
        let inv = T::from_real(1.0 / sigma[i]);
        for j in 0..r {
            scaled[(i, j)] *= inv;
        }
    }
    x.columns_mut(0, r).copy_from(&(w.columns(0, r) * scaled));

    let mut u = cs.u.clone();
    u.columns_mut(0, r).copy_from(&pick_columns(&cs.u, &order));

    Ok(MatGsvd {
        u,
        v: cs.v,
        x,
        alpha: paired.iter().map(|&j| cs.cos[j]).collect(),
        beta: paired.iter().map(|&j| cs.sin[j]).collect(),
        r,
        p,
    })
}
