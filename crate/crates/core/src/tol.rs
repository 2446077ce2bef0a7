//! Shared numerical tolerances.

/// Structural identities: round trips, completeness, stochasticity.
pub const STRUCTURAL: f64 = 1e-12;

/// Physical checks: Hermiticity of inputs, positivity, purity, Bloch norm.
pub const PHYSICAL: f64 = 1e-10;

/// |λ| within this of 1 counts as a unit-modulus eigenvalue.
pub const UNIT_EIGENVALUE: f64 = 1e-9;
