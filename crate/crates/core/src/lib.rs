//! Third-order tensor algebra under the T-product.
//!
//! Tensors are real and stored frontal-slice-major ([`Tensor3`]). Every
//! operation diagonalizes through the mode-3 DFT ([`fourier`]), runs a dense
//! complex kernel per Fourier slice ([`kernels`]) and transforms back, which
//! gives the T-SVD, the thin and general T-CSD and the T-GSVD
//! ([`decomp`]). The T-GSVD yields a closed-form tensor Tikhonov solver
//! ([`tikhonov`]), exercised on the deblurring generators in [`problems`].

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cli;
pub mod decomp;
pub mod error;
pub mod fourier;
pub mod imaging;
pub mod io;
pub mod kernels;
pub mod problems;
pub mod report;
pub mod tensor;
pub mod tikhonov;
pub mod tol;

pub use decomp::{orthogonality_defect, tcsd_general, tcsd_thin, tgsvd, tsvd, TCsdFactors, TCsdGeneralFactors, TGsvdFactors, TSvdFactors};
pub use error::{Error, Result};
pub use fourier::{dft3, idft3, tinv, tprod, FourierStack};
pub use tensor::{Tensor3, TubalScalar};
pub use tikhonov::{make_regularizer, relative_error, solve_tikhonov_gsvd, solve_tikhonov_normal, RegularizerKind};

/// Caps the global rayon pool at `TPROD_THREADS` when that variable is set.
///
/// Results never depend on the thread count; this only bounds CPU use.
pub fn init_threads_from_env() {
    if let Some(n) = std::env::var("TPROD_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}
