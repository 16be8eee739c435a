//! Equilibrium structure and normal modes of a linear Coulomb chain.
//!
//! Lengths are handled dimensionless in units of the Coulomb length scale
//! `l = (e^2 / (4 pi eps0 M omega_z^2))^(1/3)`, and Hessians in units of the
//! squared axial trap frequency, so that the axial center-of-mass mode sits
//! at eigenvalue 1 exactly. SI values appear only at the interfaces.

use nalgebra::{DMatrix, DVector};

use crate::constants::CODATA_2018;
use crate::eigen;
use crate::error::{Error, Result};

/// Positions closer than this (in units of `l`) are treated as degenerate.
const DEGENERACY_THRESHOLD: f64 = 1e-6;

/// Trap and ion-species parameters. All frequencies are angular (rad/s).
#[derive(Debug, Clone)]
pub struct TrapConfig {
    /// Number of ions in the chain.
    pub ion_count: usize,
    /// Ion mass in kg.
    pub ion_mass: f64,
    /// Axial trap frequency omega_z.
    pub axial_frequency: f64,
    /// Transverse trap frequency omega_x.
    pub transverse_frequency_x: f64,
    /// Transverse trap frequency omega_y.
    pub transverse_frequency_y: f64,
}

impl TrapConfig {
    /// Build a validated configuration. The mass is given in atomic mass
    /// units, frequencies in rad/s. Both transverse frequencies must exceed
    /// the axial one (linear-chain regime).
    pub fn new(
        ion_count: usize,
        mass_amu: f64,
        axial_frequency: f64,
        transverse_frequency_x: f64,
        transverse_frequency_y: f64,
    ) -> Result<Self> {
        if ion_count < 1 {
            return Err(Error::InvalidInput("ion count must be at least 1".into()));
        }
        if !(mass_amu > 0.0) {
            return Err(Error::InvalidInput("ion mass must be positive".into()));
        }
        for (name, w) in [
            ("axial", axial_frequency),
            ("transverse x", transverse_frequency_x),
            ("transverse y", transverse_frequency_y),
        ] {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} frequency must be positive and finite"
                )));
            }
        }
        if transverse_frequency_x <= axial_frequency || transverse_frequency_y <= axial_frequency {
            return Err(Error::InvalidInput(
                "transverse frequencies must exceed the axial frequency".into(),
            ));
        }
        Ok(Self {
            ion_count,
            ion_mass: mass_amu * CODATA_2018.atomic_mass_unit,
            axial_frequency,
            transverse_frequency_x,
            transverse_frequency_y,
        })
    }

    /// Coulomb length scale `l = (e^2/(4 pi eps0 M omega_z^2))^(1/3)` in m.
    pub fn length_scale(&self) -> f64 {
        let k = CODATA_2018.coulomb_energy_scale();
        (k / (self.ion_mass * self.axial_frequency * self.axial_frequency)).cbrt()
    }
}

/// Converged equilibrium of the chain.
#[derive(Debug, Clone)]
pub struct EquilibriumSolution {
    trap: TrapConfig,
    /// Dimensionless positions u_i = Z_i / l, strictly ascending.
    u: DVector<f64>,
    length_scale: f64,
    residual_norm: f64,
}

impl EquilibriumSolution {
    /// Dimensionless positions (units of the length scale), ascending.
    pub fn dimensionless(&self) -> &DVector<f64> {
        &self.u
    }

    /// Positions in meters.
    pub fn positions(&self) -> Vec<f64> {
        self.u.iter().map(|&x| x * self.length_scale).collect()
    }

    pub fn trap(&self) -> &TrapConfig {
        &self.trap
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    /// Max-norm of the stationarity equations at the solution.
    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn ion_count(&self) -> usize {
        self.u.len()
    }
}

/// Stationarity equations: F_i = u_i - sum_{j<i} (u_i-u_j)^-2 + sum_{j>i} (u_i-u_j)^-2.
fn stationarity(u: &DVector<f64>) -> DVector<f64> {
    let n = u.len();
    let mut f = u.clone();
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = u[i] - u[j];
            let inv2 = 1.0 / (d * d);
            if j < i {
                f[i] -= inv2;
            } else {
                f[i] += inv2;
            }
        }
    }
    f
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |a, &x| a.max(x.abs()))
}

fn strictly_ascending(u: &DVector<f64>) -> bool {
    u.as_slice().windows(2).all(|w| w[1] > w[0])
}

/// Dimensionless axial Hessian evaluated at arbitrary positions; also serves
/// as the Jacobian of the stationarity equations.
fn axial_hessian_at(u: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 1.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let inv3 = 1.0 / (u[i] - u[j]).abs().powi(3);
            d[(i, j)] = -2.0 * inv3;
            diag += 2.0 * inv3;
        }
        d[(i, i)] = diag;
    }
    d
}

/// Solve the chain equilibrium by damped Newton iteration on the
/// stationarity equations, starting from a near-linear empirical spread.
/// Falls back to a gradient step whenever the Newton direction stagnates.
pub fn solve_equilibrium(
    trap: &TrapConfig,
    tol: f64,
    max_iter: usize,
) -> Result<EquilibriumSolution> {
    let n = trap.ion_count;
    let length_scale = trap.length_scale();
    if n == 1 {
        return Ok(EquilibriumSolution {
            trap: trap.clone(),
            u: DVector::zeros(1),
            length_scale,
            residual_norm: 0.0,
        });
    }

    // Empirical near-linear initial spread.
    let mut u = DVector::from_fn(n, |i, _| {
        2.018 * ((i + 1) as f64 - (n as f64 + 1.0) / 2.0) / (n as f64).powf(0.559)
    });
    let mut residual = max_abs(&stationarity(&u));

    for _ in 0..max_iter {
        if residual < tol {
            return Ok(EquilibriumSolution {
                trap: trap.clone(),
                u,
                length_scale,
                residual_norm: residual,
            });
        }
        let grad = stationarity(&u);
        let hess = axial_hessian_at(&u);
        let newton = hess.lu().solve(&grad);

        let mut advanced = false;
        if let Some(step) = newton {
            let mut alpha = 1.0;
            for _ in 0..60 {
                let cand = &u - alpha * &step;
                if strictly_ascending(&cand) {
                    let r = max_abs(&stationarity(&cand));
                    if r < residual {
                        u = cand;
                        residual = r;
                        advanced = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
        }
        if !advanced {
            // Gradient descent fallback.
            let mut eta = 0.1 / (1.0 + max_abs(&grad));
            for _ in 0..60 {
                let cand = &u - eta * &grad;
                if strictly_ascending(&cand) {
                    let r = max_abs(&stationarity(&cand));
                    if r < residual {
                        u = cand;
                        residual = r;
                        advanced = true;
                        break;
                    }
                }
                eta *= 0.5;
            }
        }
        if !advanced {
            break;
        }
    }

    if residual < tol {
        Ok(EquilibriumSolution {
            trap: trap.clone(),
            u,
            length_scale,
            residual_norm: residual,
        })
    } else {
        Err(Error::NonConvergence {
            iterations: max_iter,
            residual,
        })
    }
}

fn check_degeneracy(u: &DVector<f64>) -> Result<()> {
    let n = u.len();
    for i in 0..n {
        for j in i + 1..n {
            let sep = (u[i] - u[j]).abs();
            if sep < DEGENERACY_THRESHOLD {
                return Err(Error::DegeneratePositions {
                    i,
                    j,
                    separation: sep,
                });
            }
        }
    }
    Ok(())
}

/// Axial Hessian in units of omega_z^2:
/// `D_ii = 1 + 2 sum_{k!=i} |u_i-u_k|^-3`, `D_ij = -2 |u_i-u_j|^-3`.
pub fn axial_hessian(eq: &EquilibriumSolution) -> Result<DMatrix<f64>> {
    check_degeneracy(&eq.u)?;
    Ok(axial_hessian_at(&eq.u))
}

/// Transverse Hessian in units of omega_z^2:
/// `D_ii = (omega_perp/omega_z)^2 - sum_{k!=i} |u_i-u_k|^-3`,
/// `D_ij = + |u_i-u_j|^-3`. The transverse Coulomb curvature is -1/2 the
/// axial one.
pub fn transverse_hessian(eq: &EquilibriumSolution, omega_perp: f64) -> Result<DMatrix<f64>> {
    check_degeneracy(&eq.u)?;
    let n = eq.u.len();
    let a = (omega_perp / eq.trap.axial_frequency).powi(2);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = a;
        for j in 0..n {
            if j == i {
                continue;
            }
            let inv3 = 1.0 / (eq.u[i] - eq.u[j]).abs().powi(3);
            d[(i, j)] = inv3;
            diag -= inv3;
        }
        d[(i, i)] = diag;
    }
    let min_eig = eigen::sorted_eigenvalues(&d)[0];
    if min_eig <= 0.0 {
        return Err(Error::ZigZagInstability {
            min_eigenvalue: min_eig,
        });
    }
    Ok(d)
}

/// Which motional direction a mode table describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Axial,
    Transverse,
}

/// Normal-mode table: ascending frequencies with orthonormal, sign-fixed
/// participation vectors. Column `m` of `vectors` is mode `m`; entry
/// `(i, m)` is the participation of ion `i`.
#[derive(Debug, Clone)]
pub struct ModeTable {
    axis: Axis,
    /// Axial trap frequency used as the unit of the underlying Hessian.
    omega_z: f64,
    /// Squared mode frequencies, (rad/s)^2, ascending.
    eigenvalues: DVector<f64>,
    /// Mode frequencies, rad/s, ascending.
    frequencies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl ModeTable {
    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn ion_count(&self) -> usize {
        self.frequencies.len()
    }

    /// Reference axial trap frequency (rad/s).
    pub fn omega_z(&self) -> f64 {
        self.omega_z
    }

    /// Mode frequencies in rad/s, ascending.
    pub fn frequencies(&self) -> &DVector<f64> {
        &self.frequencies
    }

    /// Squared mode frequencies in (rad/s)^2, ascending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Participation of ion `i` in mode `m`.
    pub fn participation(&self, mode: usize, ion: usize) -> f64 {
        self.vectors[(ion, mode)]
    }

    /// Full eigenvector matrix; column `m` is mode `m`.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Assemble a table from caller-supplied parts (ascending frequencies
    /// required; orthonormality is the caller's responsibility). Intended
    /// for synthetic spectra.
    pub fn from_parts(
        axis: Axis,
        omega_z: f64,
        frequencies: Vec<f64>,
        vectors: DMatrix<f64>,
    ) -> Result<Self> {
        let n = frequencies.len();
        if vectors.nrows() != n || vectors.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: vectors.nrows(),
            });
        }
        if frequencies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("frequencies must be ascending".into()));
        }
        if frequencies.iter().any(|&f| !(f > 0.0)) {
            return Err(Error::InvalidInput("frequencies must be positive".into()));
        }
        let eigenvalues = DVector::from_iterator(n, frequencies.iter().map(|&f| f * f));
        Ok(Self {
            axis,
            omega_z,
            eigenvalues,
            frequencies: DVector::from_vec(frequencies),
            vectors,
        })
    }
}

/// Diagonalize a Hessian given in units of omega_z^2 into a mode table.
pub fn modes(hessian: &DMatrix<f64>, axis: Axis, omega_z: f64) -> Result<ModeTable> {
    let (vals, vecs) = eigen::sorted_symmetric(hessian);
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: vals[0],
        });
    }
    let eigenvalues = &vals * (omega_z * omega_z);
    let frequencies = eigenvalues.map(f64::sqrt);
    #[cfg(debug_assertions)]
    {
        let n = hessian.nrows();
        let gram = vecs.transpose() * &vecs;
        debug_assert!((gram - DMatrix::identity(n, n)).abs().max() < 1e-10);
        let rec = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        debug_assert!((rec - hessian).abs().max() / hessian.abs().max() < 1e-10);
    }
    Ok(ModeTable {
        axis,
        omega_z,
        eigenvalues,
        frequencies,
        vectors: vecs,
    })
}

/// Convenience: solve, build both Hessians and diagonalize, using the x
/// transverse frequency.
pub fn chain_modes(trap: &TrapConfig) -> Result<(EquilibriumSolution, ModeTable, ModeTable)> {
    let eq = solve_equilibrium(trap, 1e-12, 200)?;
    let axial = modes(&axial_hessian(&eq)?, Axis::Axial, trap.axial_frequency)?;
    let transverse = modes(
        &transverse_hessian(&eq, trap.transverse_frequency_x)?,
        Axis::Transverse,
        trap.axial_frequency,
    )?;
    Ok((eq, axial, transverse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn ca40(n: usize) -> TrapConfig {
        TrapConfig::new(n, 40.0, TAU * 0.5e6, TAU * 3e6, TAU * 4e6).unwrap()
    }

    #[test]
    fn length_scale_ca40() {
        // direct evaluation of the formula with CODATA constants
        let l = ca40(10).length_scale();
        assert_relative_eq!(l, 7.060212722888259e-6, max_relative = 1e-12);
    }

    #[test]
    fn length_scale_exponents() {
        let base = ca40(2);
        let mut w8 = base.clone();
        w8.axial_frequency *= 8.0;
        assert_relative_eq!(w8.length_scale(), base.length_scale() / 4.0, max_relative = 1e-14);
        let mut m8 = base.clone();
        m8.ion_mass *= 8.0;
        assert_relative_eq!(m8.length_scale(), base.length_scale() / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn trap_validation() {
        assert!(TrapConfig::new(0, 40.0, 1.0, 2.0, 2.0).is_err());
        assert!(TrapConfig::new(2, 40.0, 3.0, 2.0, 4.0).is_err());
        assert!(TrapConfig::new(2, -1.0, 1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn equilibrium_single_ion() {
        let eq = solve_equilibrium(&ca40(1), 1e-12, 200).unwrap();
        assert_eq!(eq.dimensionless()[0], 0.0);
        assert_eq!(eq.residual_norm(), 0.0);
    }

    #[test]
    fn equilibrium_two_ions_analytic() {
        // stationarity for two ions reduces to u^3 = 1/4
        let root = 0.25_f64.cbrt();
        let eq = solve_equilibrium(&ca40(2), 1e-12, 200).unwrap();
        assert!((eq.dimensionless()[0] + root).abs() < 1e-12);
        assert!((eq.dimensionless()[1] - root).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_three_ions_analytic() {
        // outer ions at +-(5/4)^(1/3), center at 0
        let root = 1.25_f64.cbrt();
        let eq = solve_equilibrium(&ca40(3), 1e-12, 200).unwrap();
        let u = eq.dimensionless();
        assert!((u[0] + root).abs() < 1e-12);
        assert!(u[1].abs() < 1e-12);
        assert!((u[2] - root).abs() < 1e-12);
        assert!(max_abs(&stationarity(u)) < 1e-12);
    }

    #[test]
    fn equilibrium_residual_and_antisymmetry_up_to_30() {
        for n in 2..=30 {
            let eq = solve_equilibrium(&ca40(n), 1e-12, 200).unwrap();
            assert!(eq.residual_norm() < 1e-12, "N={n}");
            let u = eq.dimensionless();
            assert!(strictly_ascending(u), "N={n}");
            for i in 0..n {
                assert!((u[i] + u[n - 1 - i]).abs() < 1e-10, "N={n} i={i}");
            }
        }
    }

    #[test]
    fn axial_hessian_small_cases() {
        let eq1 = solve_equilibrium(&ca40(1), 1e-12, 200).unwrap();
        let d1 = axial_hessian(&eq1).unwrap();
        assert_eq!(d1[(0, 0)], 1.0);

        let eq2 = solve_equilibrium(&ca40(2), 1e-12, 200).unwrap();
        let d2 = axial_hessian(&eq2).unwrap();
        // |u1-u2|^3 = 8 * 1/4 = 2, so diagonal 1 + 2/2 = 2, off-diagonal -1
        assert_relative_eq!(d2[(0, 0)], 2.0, max_relative = 1e-11);
        assert_relative_eq!(d2[(0, 1)], -1.0, max_relative = 1e-11);
        assert_relative_eq!(d2[(1, 0)], d2[(0, 1)], max_relative = 1e-14);
    }

    #[test]
    fn axial_hessian_row_sums() {
        // Coulomb terms cancel along the uniform vector: D 1 = 1
        for n in [2, 5, 10, 17] {
            let eq = solve_equilibrium(&ca40(n), 1e-12, 200).unwrap();
            let d = axial_hessian(&eq).unwrap();
            let ones = DVector::from_element(n, 1.0);
            let r = &d * &ones - &ones;
            assert!(max_abs(&r) < 1e-12, "N={n}");
        }
    }

    #[test]
    fn degenerate_positions_rejected() {
        let eq = EquilibriumSolution {
            trap: ca40(2),
            u: DVector::from_vec(vec![0.0, 5e-7]),
            length_scale: 1.0,
            residual_norm: 0.0,
        };
        assert!(matches!(
            axial_hessian(&eq),
            Err(Error::DegeneratePositions { .. })
        ));
    }

    #[test]
    fn transverse_hessian_basics() {
        let trap = ca40(1);
        let eq = solve_equilibrium(&trap, 1e-12, 200).unwrap();
        let d = transverse_hessian(&eq, trap.transverse_frequency_x).unwrap();
        assert_relative_eq!(d[(0, 0)], 36.0, max_relative = 1e-14);

        // uniform vector is an eigenvector with eigenvalue (w_perp/w_z)^2
        let trap = ca40(7);
        let eq = solve_equilibrium(&trap, 1e-12, 200).unwrap();
        let d = transverse_hessian(&eq, trap.transverse_frequency_x).unwrap();
        let ones = DVector::from_element(7, 1.0);
        let r = &d * &ones - 36.0 * &ones;
        assert!(max_abs(&r) < 1e-10);
    }

    #[test]
    fn transverse_two_ions_closed_form() {
        // 2x2 [[a-c, c], [c, a-c]] with c = |2u|^-3 = 1/2 has eigenvalues
        // {a - 2c, a} = {35, 36}
        let trap = ca40(2);
        let eq = solve_equilibrium(&trap, 1e-12, 200).unwrap();
        let d = transverse_hessian(&eq, trap.transverse_frequency_x).unwrap();
        let table = modes(&d, Axis::Transverse, trap.axial_frequency).unwrap();
        let wz2 = trap.axial_frequency * trap.axial_frequency;
        assert_relative_eq!(table.eigenvalues()[0] / wz2, 35.0, max_relative = 1e-11);
        assert_relative_eq!(table.eigenvalues()[1] / wz2, 36.0, max_relative = 1e-11);
    }

    #[test]
    fn zigzag_instability_detected() {
        let trap = TrapConfig::new(10, 40.0, TAU * 0.5e6, TAU * 3e6, TAU * 4e6).unwrap();
        let eq = solve_equilibrium(&trap, 1e-12, 200).unwrap();
        // 2 omega_z of transverse confinement cannot hold a 10-ion chain
        assert!(matches!(
            transverse_hessian(&eq, TAU * 1e6),
            Err(Error::ZigZagInstability { .. })
        ));
    }

    #[test]
    fn axial_com_and_breathing_modes() {
        for n in 2..=30 {
            let trap = ca40(n);
            let eq = solve_equilibrium(&trap, 1e-12, 200).unwrap();
            let table = modes(&axial_hessian(&eq).unwrap(), Axis::Axial, trap.axial_frequency)
                .unwrap();
            let wz = trap.axial_frequency;
            assert!(
                (table.frequencies()[0] - wz).abs() / wz < 1e-9,
                "com N={n}"
            );
            assert!(
                (table.frequencies()[1] - 3.0_f64.sqrt() * wz).abs() / wz < 1e-9,
                "breathing N={n}"
            );
        }
    }

    #[test]
    fn breathing_eigenvector_is_position_vector() {
        // D u = 3 u for the equilibrium position vector
        for n in 2..=10 {
            let eq = solve_equilibrium(&ca40(n), 1e-12, 200).unwrap();
            let d = axial_hessian(&eq).unwrap();
            let u = eq.dimensionless().clone();
            let r = &d * &u - 3.0 * &u;
            assert!(max_abs(&r) < 1e-9, "N={n}");
        }
    }

    #[test]
    fn com_eigenvector_uniform() {
        let trap = ca40(10);
        let eq = solve_equilibrium(&trap, 1e-12, 200).unwrap();
        let table = modes(&axial_hessian(&eq).unwrap(), Axis::Axial, trap.axial_frequency)
            .unwrap();
        let expect = 1.0 / 10.0_f64.sqrt();
        for i in 0..10 {
            assert_relative_eq!(table.participation(0, i), expect, max_relative = 1e-9);
        }
    }

    #[test]
    fn transverse_com_is_highest() {
        // longer chains need stiffer transverse confinement to stay linear
        for (n, omega_perp) in [(2, TAU * 3e6), (5, TAU * 3e6), (10, TAU * 3e6), (20, TAU * 6e6)] {
            let trap = ca40(n);
            let eq = solve_equilibrium(&trap, 1e-12, 200).unwrap();
            let table = modes(
                &transverse_hessian(&eq, omega_perp).unwrap(),
                Axis::Transverse,
                trap.axial_frequency,
            )
            .unwrap();
            let top = table.frequencies()[n - 1];
            assert!((top - omega_perp).abs() / top < 1e-12, "N={n}");
        }
    }

    #[test]
    fn mode_table_invariants() {
        for n in [2, 5, 10, 20, 30] {
            let trap = ca40(n);
            let eq = solve_equilibrium(&trap, 1e-12, 200).unwrap();
            let d = axial_hessian(&eq).unwrap();
            let table = modes(&d, Axis::Axial, trap.axial_frequency).unwrap();
            let v = table.vectors();
            let gram = v.transpose() * v;
            assert!((gram - DMatrix::identity(n, n)).abs().max() < 1e-10, "N={n}");
            let wz2 = trap.axial_frequency * trap.axial_frequency;
            let lam = table.eigenvalues() / wz2;
            let rec = v * DMatrix::from_diagonal(&lam) * v.transpose();
            assert!((rec - &d).abs().max() / d.abs().max() < 1e-10, "N={n}");
            // sign convention: largest-magnitude entry positive
            for m in 0..n {
                let col = v.column(m);
                let mut best = 0;
                for i in 1..n {
                    if col[i].abs() > col[best].abs() {
                        best = i;
                    }
                }
                assert!(col[best] > 0.0, "N={n} m={m}");
            }
        }
    }

    #[test]
    fn not_positive_definite_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            modes(&m, Axis::Axial, 1.0),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn frozen_n10_chain() {
        // regression fixture, cross-checked against an independent
        // high-precision solve (mpmath Newton + eigsy)
        let expected_u = [
            -2.8708250814949876,
            -2.1000311556974394,
            -1.45038141492841,
            -0.8537788259805819,
            -0.28210365571416934,
            0.28210365571416957,
            0.8537788259805821,
            1.4503814149284102,
            2.10003115569744,
            2.870825081494988,
        ];
        let expected_w = [
            1.0,
            1.7320508075688772,
            2.4168423481991842,
            3.0671821118581655,
            3.6914404150743410,
            4.2955089785596867,
            4.8834694071613368,
            5.4581918221872988,
            6.0217624569023025,
            6.5757516328312981,
        ];
        let trap = ca40(10);
        let eq = solve_equilibrium(&trap, 1e-12, 200).unwrap();
        for (i, &e) in expected_u.iter().enumerate() {
            assert!((eq.dimensionless()[i] - e).abs() < 1e-10, "u[{i}]");
        }
        let table = modes(&axial_hessian(&eq).unwrap(), Axis::Axial, trap.axial_frequency)
            .unwrap();
        for (m, &e) in expected_w.iter().enumerate() {
            assert!(
                (table.frequencies()[m] / trap.axial_frequency - e).abs() < 1e-10,
                "w[{m}]"
            );
        }
    }
}
