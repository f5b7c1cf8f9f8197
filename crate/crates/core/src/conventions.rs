//! Pinned sign and normalisation conventions.
//!
//! Measured once with the probes in `geometry::tests` and frozen here; the
//! tests assert them on every run.

/// `Ric = (LAMBDA_SLOPE * Lambda + LAMBDA_OFFSET) g` with the Riemann tensor
/// `R^a_{bcd} = ∂_c Γ^a_{db} - ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} - Γ^a_{de} Γ^e_{cb}`
/// and `R_{bd} = R^a_{bad}`.
pub const LAMBDA_SLOPE: f64 = 1.0;
pub const LAMBDA_OFFSET: f64 = 0.0;

/// Sign `o` of `ε_{qpxy} = o sqrt|det g|`. With this sign the image of
/// `(1 + *)/2` on 2-forms carries the SD curvature coefficient `C^(3)`.
pub const ORIENTATION: f64 = 1.0;

/// Repeated eigenvalue of the tensor Weyl endomorphism on a half of the
/// 2-forms, divided by the repeated eigenvalue of the spinor matrix built
/// from the same half's coefficients `C^(k)`.
pub const SPINOR_SCALE: f64 = 0.5;

/// Default tolerances.
pub const EINSTEIN_TOL: f64 = 1e-8;
pub const PETROV_TOL: f64 = 1e-7;
pub const VANISH_TOL: f64 = 1e-9;
pub const KILLING_TOL: f64 = 1e-9;
