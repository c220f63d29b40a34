//! Numerical tolerances used across the crate.

/// Tolerances for the orthogonality, reconstruction, feasibility, and
/// interiority checks performed throughout the library.
///
/// The defaults are deliberate and match the guarantees the algorithms are
/// tested against; override individual fields only when working with inputs
/// whose scale makes the absolute defaults inappropriate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Max allowed `‖XᵀX − I‖_F` for a matrix claimed orthogonal.
    pub orth: f64,
    /// Max allowed relative reconstruction error `‖UΣVᵀ − M‖ / ‖M‖` of an SVD.
    pub recon: f64,
    /// Slack allowed when testing membership in polytopes and balls.
    pub feas: f64,
    /// Margin below which a strict-interior condition is treated as failed.
    pub interior: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            orth: 1e-9,
            recon: 1e-9,
            feas: 1e-8,
            interior: 1e-10,
        }
    }
}

impl ToleranceConfig {
    /// The default configuration, usable in `const` contexts.
    pub const DEFAULT: Self = Self {
        orth: 1e-9,
        recon: 1e-9,
        feas: 1e-8,
        interior: 1e-10,
    };
}
