//! Physical constants (CODATA 2018, SI units).

/// Fundamental constants used throughout the crate.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalConstants {
    /// Elementary charge, C (exact since the 2019 SI redefinition).
    pub elementary_charge: f64,
    /// Vacuum permittivity, F/m.
    pub vacuum_permittivity: f64,
    /// Reduced Planck constant, J s (exact).
    pub hbar: f64,
    /// Boltzmann constant, J/K (exact).
    pub boltzmann: f64,
    /// Atomic mass unit, kg.
    pub atomic_mass_unit: f64,
}

/// CODATA 2018 values.
pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    elementary_charge: 1.602_176_634e-19,
    vacuum_permittivity: 8.854_187_8128e-12,
    hbar: 1.054_571_817e-34,
    boltzmann: 1.380_649e-23,
    atomic_mass_unit: 1.660_539_066_60e-27,
};

impl PhysicalConstants {
    /// Coulomb constant e^2 / (4 pi eps0), J m.
    pub fn coulomb_energy_scale(&self) -> f64 {
        self.elementary_charge * self.elementary_charge
            / (4.0 * std::f64::consts::PI * self.vacuum_permittivity)
    }
}
