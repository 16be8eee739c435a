//! State-dependent tweezer curvatures and the spectra they imprint.
//!
//! Each ion carries four long-lived internal states: vacuum `|0>`, single
//! occupation `|1>` (up) and `|2>` (down), and double occupation `|3>`
//! (pair). A tweezer focused on ion `i` adds a state-dependent curvature
//! `O_i` (signed squared trap frequency) to the local potential, which
//! shifts every phonon mode and thereby the zero-point energy of the chain
//! as a function of the internal-state configuration.
//!
//! Calibrating the per-site intensities so the first-order single-spin
//! energy equals `g` at every site (and the pair energy `gamma`) makes the
//! energy landscape homogeneous and lets spin pairs move.

use nalgebra::{DMatrix, DVector};

use crate::crystal::{axial_hessian, modes, Axis, EquilibriumSolution, ModeTable};
use crate::eigen;
use crate::error::{Error, Result};

/// Curvature above this fraction of omega_z^2 is rejected outright.
const CURVATURE_ERROR_RATIO: f64 = 0.5;
/// Curvature above this fraction of omega_z^2 logs a warning.
const CURVATURE_WARN_RATIO: f64 = 0.1;
/// Minimum sorted-order eigenvector overlap before falling back to
/// overlap matching.
const MATCH_OVERLAP_MIN: f64 = 0.9;

/// Internal state of one ion, encoding bosonic site occupation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpinState {
    Vacuum = 0,
    Up = 1,
    Down = 2,
    Pair = 3,
}

impl SpinState {
    pub const ALL: [SpinState; 4] = [
        SpinState::Vacuum,
        SpinState::Up,
        SpinState::Down,
        SpinState::Pair,
    ];

    /// Encoded particle number of the state.
    pub fn occupation(self) -> u32 {
        match self {
            SpinState::Vacuum => 0,
            SpinState::Up | SpinState::Down => 1,
            SpinState::Pair => 2,
        }
    }

    /// Twice the encoded spin projection (so the value stays integer).
    pub fn spin_z_doubled(self) -> i32 {
        match self {
            SpinState::Up => 1,
            SpinState::Down => -1,
            SpinState::Vacuum | SpinState::Pair => 0,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Per-site internal-state assignment of the chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    states: Vec<SpinState>,
}

impl SpinConfig {
    pub fn new(states: Vec<SpinState>) -> Self {
        Self { states }
    }

    /// All ions in the vacuum state.
    pub fn vacuum(n: usize) -> Self {
        Self {
            states: vec![SpinState::Vacuum; n],
        }
    }

    /// Pair at `site`, all other ions vacuum.
    pub fn pair_at(n: usize, site: usize) -> Self {
        let mut states = vec![SpinState::Vacuum; n];
        states[site] = SpinState::Pair;
        Self { states }
    }

    /// Up at `up_site`, down at `down_site`, all others vacuum.
    pub fn up_down(n: usize, up_site: usize, down_site: usize) -> Self {
        assert_ne!(up_site, down_site);
        let mut states = vec![SpinState::Vacuum; n];
        states[up_site] = SpinState::Up;
        states[down_site] = SpinState::Down;
        Self { states }
    }

    pub fn states(&self) -> &[SpinState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Total encoded particle number.
    pub fn particle_number(&self) -> u32 {
        self.states.iter().map(|s| s.occupation()).sum()
    }

    /// Twice the total encoded spin projection.
    pub fn spin_z_doubled(&self) -> i32 {
        self.states.iter().map(|s| s.spin_z_doubled()).sum()
    }
}

/// How a settings object was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// Curvatures supplied directly.
    Explicit,
    /// Curvatures derived from homogeneity targets `g`, `gamma`.
    Calibrated,
}

/// Which method computes perturbed frequencies / energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// First-order perturbation theory.
    Perturbative,
    /// Diagonalization of the tweezer-augmented Hessian.
    Exact,
}

/// Signed per-site, per-state tweezer curvatures plus bookkeeping.
///
/// `signed_curvature[i][k]` is the squared tweezer trap frequency for ion
/// `i` in state `k`, in (rad/s)^2, negative for anti-confinement.
#[derive(Debug, Clone)]
pub struct TweezerSettings {
    signed_curvature: Vec<[f64; 4]>,
    site_weights: Vec<f64>,
    /// Homogeneity targets `(g, gamma)` in rad/s where defined.
    targets: Option<(f64, f64)>,
    construction: Construction,
}

impl TweezerSettings {
    /// Settings from per-state tweezer trap frequencies (kHz, the 2pi
    /// implied, signed for anti-confinement) scaled per site by intensity
    /// weights. `omega_z` guards the perturbative regime.
    pub fn explicit(
        varpi_khz_per_state: [f64; 4],
        site_weights: Vec<f64>,
        omega_z: f64,
    ) -> Result<Self> {
        validate_weights(&site_weights)?;
        let base: Vec<f64> = varpi_khz_per_state
            .iter()
            .map(|&khz| {
                let w = std::f64::consts::TAU * khz * 1e3;
                w * w.abs()
            })
            .collect();
        let signed_curvature: Vec<[f64; 4]> = site_weights
            .iter()
            .map(|&w| [w * base[0], w * base[1], w * base[2], w * base[3]])
            .collect();
        check_curvature_scale(&signed_curvature, omega_z)?;
        Ok(Self {
            signed_curvature,
            site_weights,
            targets: None,
            construction: Construction::Explicit,
        })
    }

    /// Tweezers off everywhere.
    pub fn zeroed(n: usize) -> Self {
        Self {
            signed_curvature: vec![[0.0; 4]; n],
            site_weights: vec![1.0; n],
            targets: Some((0.0, 0.0)),
            construction: Construction::Explicit,
        }
    }

    pub fn ion_count(&self) -> usize {
        self.signed_curvature.len()
    }

    pub fn site_weights(&self) -> &[f64] {
        &self.site_weights
    }

    pub fn curvature(&self, site: usize, state: SpinState) -> f64 {
        self.signed_curvature[site][state.index()]
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    /// Homogeneity targets `(g, gamma)` for calibrated settings.
    pub fn targets(&self) -> Option<(f64, f64)> {
        self.targets
    }

    /// Per-site curvatures selected by a spin configuration:
    /// `O_i = signed_curvature[i][k_i]`.
    pub fn state_curvatures(&self, config: &SpinConfig) -> Result<DVector<f64>> {
        if config.len() != self.ion_count() {
            return Err(Error::DimensionMismatch {
                expected: self.ion_count(),
                got: config.len(),
            });
        }
        Ok(DVector::from_iterator(
            config.len(),
            config
                .states()
                .iter()
                .enumerate()
                .map(|(i, s)| self.signed_curvature[i][s.index()]),
        ))
    }

    /// First-order estimate of the gap between the pair manifold and the
    /// rest of the spectrum, `2 g - gamma`. `None` for explicit settings,
    /// whose targets are undefined.
    pub fn gs_gap(&self) -> Option<f64> {
        self.targets.map(|(g, gamma)| 2.0 * g - gamma)
    }
}

fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidInput("site weights must be non-empty".into()));
    }
    let max = weights.iter().fold(f64::NEG_INFINITY, |a, &w| a.max(w));
    if weights.iter().any(|&w| !(w > 0.0) || w > 1.0 + 1e-12) {
        return Err(Error::InvalidInput(
            "site weights must lie in (0, 1]".into(),
        ));
    }
    if (max - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(
            "maximum site weight must equal 1".into(),
        ));
    }
    Ok(())
}

fn check_curvature_scale(curv: &[[f64; 4]], omega_z: f64) -> Result<()> {
    let wz2 = omega_z * omega_z;
    let max = curv
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0_f64, |a, &x| a.max(x.abs()));
    let ratio = max / wz2;
    if ratio > CURVATURE_ERROR_RATIO {
        return Err(Error::CurvatureTooStrong { ratio });
    }
    if ratio > CURVATURE_WARN_RATIO {
        log::warn!(
            "tweezer curvature is {:.0}% of the squared axial trap frequency; \
             perturbative expressions degrade",
            ratio * 100.0
        );
    }
    Ok(())
}

/// Calibrate per-site intensities so that to first order a single spin
/// costs `g` and a pair costs `gamma` at every site:
/// `varpi^2_{i,1} = varpi^2_{i,2} = 4 g / S_i`, `varpi^2_{i,3} = 4 gamma / S_i`
/// with `S_i = sum_m b_mi^2 / omega_m` and `varpi^2_{i,0} = 0`.
pub fn calibrate(table: &ModeTable, g: f64, gamma: f64) -> Result<TweezerSettings> {
    if table.axis() != Axis::Axial {
        return Err(Error::InvalidInput(
            "calibration requires the axial mode table".into(),
        ));
    }
    let n = table.ion_count();
    let mut inv_s = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = 0.0;
        for m in 0..n {
            let b = table.participation(m, i);
            s += b * b / table.frequencies()[m];
        }
        inv_s.push(1.0 / s);
    }
    let peak = inv_s.iter().fold(0.0_f64, |a, &x| a.max(x));
    let site_weights: Vec<f64> = inv_s.iter().map(|&x| x / peak).collect();
    let signed_curvature: Vec<[f64; 4]> = inv_s
        .iter()
        .map(|&x| [0.0, 4.0 * g * x, 4.0 * g * x, 4.0 * gamma * x])
        .collect();
    check_curvature_scale(&signed_curvature, table.omega_z())?;
    Ok(TweezerSettings {
        signed_curvature,
        site_weights,
        targets: Some((g, gamma)),
        construction: Construction::Calibrated,
    })
}

/// Mode frequencies under a tweezer curvature pattern. `frequencies[m]` is
/// matched to unperturbed mode `m`; `sorted_position[m]` records where it
/// sits in the ascending perturbed spectrum.
#[derive(Debug, Clone)]
pub struct PerturbedSpectrum {
    frequencies: DVector<f64>,
    method: Method,
    sorted_position: Vec<usize>,
}

impl PerturbedSpectrum {
    /// Perturbed frequency matched to unperturbed mode `m`, rad/s.
    pub fn frequencies(&self) -> &DVector<f64> {
        &self.frequencies
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Position of each matched frequency in the ascending perturbed list.
    pub fn sorted_position(&self) -> &[usize] {
        &self.sorted_position
    }
}

/// First-order perturbed frequencies
/// `w_m = sqrt(omega_m^2 + sum_i O_i b_mi^2)`.
pub fn perturbative_frequencies(
    table: &ModeTable,
    curvatures: &DVector<f64>,
) -> Result<PerturbedSpectrum> {
    let n = table.ion_count();
    if curvatures.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: curvatures.len(),
        });
    }
    let mut freqs = DVector::zeros(n);
    for m in 0..n {
        let mut shift_sq = 0.0;
        for i in 0..n {
            let b = table.participation(m, i);
            shift_sq += curvatures[i] * b * b;
        }
        let w2 = table.eigenvalues()[m] + shift_sq;
        if w2 <= 0.0 {
            return Err(Error::ModeCollapse {
                mode: m,
                shifted_sq: w2,
            });
        }
        freqs[m] = w2.sqrt();
    }
    Ok(PerturbedSpectrum {
        frequencies: freqs,
        method: Method::Perturbative,
        sorted_position: (0..n).collect(),
    })
}

/// Exact perturbed spectrum from the tweezer-augmented axial Hessian,
/// matched to the unperturbed modes (sorted order, falling back to maximum
/// eigenvector overlap if a crossing is detected).
pub fn exact_frequencies(
    eq: &EquilibriumSolution,
    curvatures: &DVector<f64>,
) -> Result<PerturbedSpectrum> {
    let table = unperturbed_modes(eq)?;
    exact_frequencies_with(eq, &table, curvatures)
}

/// As [`exact_frequencies`], reusing a precomputed unperturbed table.
pub fn exact_frequencies_with(
    eq: &EquilibriumSolution,
    unperturbed: &ModeTable,
    curvatures: &DVector<f64>,
) -> Result<PerturbedSpectrum> {
    let n = unperturbed.ion_count();
    if curvatures.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: curvatures.len(),
        });
    }
    let omega_z = unperturbed.omega_z();
    let wz2 = omega_z * omega_z;
    let mut hess = axial_hessian(eq)?;
    for i in 0..n {
        hess[(i, i)] += curvatures[i] / wz2;
    }
    let (vals, vecs) = eigen::sorted_symmetric(&hess);
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: vals[0],
        });
    }

    // sorted-order pairing unless an eigenvector overlap drops too low
    let mut identity_ok = true;
    for m in 0..n {
        let overlap: f64 = (0..n)
            .map(|i| unperturbed.participation(m, i) * vecs[(i, m)])
            .sum();
        if overlap.abs() < MATCH_OVERLAP_MIN {
            identity_ok = false;
            break;
        }
    }
    let assignment: Vec<usize> = if identity_ok {
        (0..n).collect()
    } else {
        overlap_matching(unperturbed, &vecs)
    };

    let mut freqs = DVector::zeros(n);
    for m in 0..n {
        freqs[m] = (vals[assignment[m]] * wz2).sqrt();
    }
    Ok(PerturbedSpectrum {
        frequencies: freqs,
        method: Method::Exact,
        sorted_position: assignment,
    })
}

/// Greedy maximum-overlap assignment of perturbed columns to unperturbed
/// modes; used only when mode crossings defeat sorted-order pairing.
fn overlap_matching(unperturbed: &ModeTable, perturbed_vecs: &DMatrix<f64>) -> Vec<usize> {
    let n = unperturbed.ion_count();
    let mut scored: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for m in 0..n {
        for k in 0..n {
            let overlap: f64 = (0..n)
                .map(|i| unperturbed.participation(m, i) * perturbed_vecs[(i, k)])
                .sum();
            scored.push((overlap.abs(), m, k));
        }
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assignment = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (_, m, k) in scored {
        if assignment[m] == usize::MAX && !used[k] {
            assignment[m] = k;
            used[k] = true;
        }
    }
    assignment
}

fn unperturbed_modes(eq: &EquilibriumSolution) -> Result<ModeTable> {
    modes(
        &axial_hessian(eq)?,
        Axis::Axial,
        eq.trap().axial_frequency,
    )
}

/// Per-mode frequency shifts `w_m - omega_m` for a curvature pattern,
/// matched to the unperturbed modes.
///
/// The perturbative branch uses the linearized first-order shift
/// `sum_i O_i b_mi^2 / (2 omega_m)`, which is the form inverted by the
/// calibration, so calibrated configuration energies reproduce their
/// targets to machine precision.
pub fn frequency_shifts(
    eq: &EquilibriumSolution,
    unperturbed: &ModeTable,
    curvatures: &DVector<f64>,
    method: Method,
) -> Result<DVector<f64>> {
    let n = unperturbed.ion_count();
    match method {
        Method::Exact => {
            let spec = exact_frequencies_with(eq, unperturbed, curvatures)?;
            Ok(spec.frequencies() - unperturbed.frequencies())
        }
        Method::Perturbative => {
            if curvatures.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: curvatures.len(),
                });
            }
            let mut shifts = DVector::zeros(n);
            for m in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    let b = unperturbed.participation(m, i);
                    s += curvatures[i] * b * b;
                }
                shifts[m] = s / (2.0 * unperturbed.frequencies()[m]);
            }
            Ok(shifts)
        }
    }
}

/// Energy (divided by hbar, rad/s) of a spin configuration on a phonon
/// background: `E = sum_m (w_m(config) - omega_m) (n_m + 1/2)`.
pub fn config_energy(
    eq: &EquilibriumSolution,
    settings: &TweezerSettings,
    config: &SpinConfig,
    fock: &[u32],
    method: Method,
) -> Result<f64> {
    let table = unperturbed_modes(eq)?;
    config_energy_with(eq, &table, settings, config, fock, method)
}

/// As [`config_energy`], reusing a precomputed unperturbed table.
pub fn config_energy_with(
    eq: &EquilibriumSolution,
    unperturbed: &ModeTable,
    settings: &TweezerSettings,
    config: &SpinConfig,
    fock: &[u32],
    method: Method,
) -> Result<f64> {
    let n = unperturbed.ion_count();
    if fock.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: fock.len(),
        });
    }
    let curv = settings.state_curvatures(config)?;
    let shifts = frequency_shifts(eq, unperturbed, &curv, method)?;
    Ok((0..n)
        .map(|m| shifts[m] * (fock[m] as f64 + 0.5))
        .sum())
}

/// Ground-state energy matrix of two opposite spins: `B_ij` is the energy
/// of up at `i`, down at `j` (pair at `i` on the diagonal), referenced to
/// the all-vacuum configuration, phonons in the ground state.
pub fn b_matrix(eq: &EquilibriumSolution, settings: &TweezerSettings) -> Result<DMatrix<f64>> {
    b_matrix_with(eq, settings, Method::Exact)
}

/// [`b_matrix`] with an explicit method choice.
pub fn b_matrix_with(
    eq: &EquilibriumSolution,
    settings: &TweezerSettings,
    method: Method,
) -> Result<DMatrix<f64>> {
    let table = unperturbed_modes(eq)?;
    let n = table.ion_count();
    let fock = vec![0u32; n];
    let reference = config_energy_with(eq, &table, settings, &SpinConfig::vacuum(n), &fock, method)?;
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let config = if i == j {
                SpinConfig::pair_at(n, i)
            } else {
                SpinConfig::up_down(n, i, j)
            };
            b[(i, j)] =
                config_energy_with(eq, &table, settings, &config, &fock, method)? - reference;
        }
    }
    Ok(b)
}
