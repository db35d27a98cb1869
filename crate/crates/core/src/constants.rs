//! Physical constants (SI).

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Bohr radius, m.
pub const BOHR_RADIUS: f64 = 5.291_772_109e-11;

/// Mass of a Rb-87 atom, kg.
pub const MASS_RB87: f64 = 1.443_160_6e-25;
