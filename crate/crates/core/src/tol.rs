//! Default tolerances. All are relative unless stated otherwise.

/// Algebraic identities (reconstructions, orthogonality).
pub const ALGEBRAIC: f64 = 1e-10;

/// Largest imaginary residue accepted when returning to the real domain,
/// relative to `1 + ‖result‖_F`.
pub const IMAG_RESIDUE: f64 = 1e-8;

/// Orthonormality check for CS decomposition inputs, per `sqrt(columns)`.
pub const ORTHONORMAL: f64 = 1e-8;

/// Filter tube coefficients at or below this fraction of the largest are
/// treated as non-invertible.
pub const FILTER_INVERTIBLE: f64 = 1e-14;

/// Default relative rank threshold for an `rows x cols` matrix.
pub fn rank(rows: usize, cols: usize) -> f64 {
    f64::EPSILON * rows.max(cols) as f64
}
