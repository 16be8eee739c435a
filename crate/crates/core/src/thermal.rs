//! Thermal phonon ensembles and temperature-dependent bipolaron transport.
//!
//! Phonons enter as static Fock-state backgrounds: each occupation vector
//! `n` reweights the configuration energies through the `(n_m + 1/2)`
//! factors, the spin dynamics is propagated coherently per background, and
//! observables are averaged with the Bose-Einstein weights
//! `P(n, T) = prod_m nbar_m^{n_m} / (1 + nbar_m)^{n_m + 1}`.
//!
//! Only the axial modes matter here; the hopping couplings are not
//! affected to first order by thermal occupation.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::constants::CODATA_2018;
use crate::coupling::JMatrix;
use crate::crystal::{axial_hessian, modes, Axis, EquilibriumSolution, ModeTable};
use crate::dynamics::{real_mat_tr_mul_complex, spread_sd, TimeGrid};
use crate::eigen;
use crate::error::{Error, Result};
use crate::hilbert::{assemble, SectorBasis};
use crate::tweezer::{frequency_shifts, Method, TweezerSettings};

/// Members processed per parallel work unit; fixed so that the reduction
/// order (and hence the output bits) never depends on the thread count.
const CHUNK: usize = 256;

/// Mean Bose-Einstein occupation `1 / (exp(hbar omega / kB T) - 1)`;
/// zero at `T = 0`.
pub fn mean_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = CODATA_2018.hbar * omega / (CODATA_2018.boltzmann * temperature);
    1.0 / x.exp_m1()
}

/// Probability of the Fock configuration `n` in a thermal state with the
/// given per-mode mean occupations.
pub fn fock_probability(occupations: &[u32], nbar: &[f64]) -> f64 {
    occupations
        .iter()
        .zip(nbar)
        .map(|(&n, &nb)| nb.powi(n as i32) / (1.0 + nb).powi(n as i32 + 1))
        .product()
}

/// Temperature point for a mode table: per-mode mean occupations plus the
/// truncation budget.
#[derive(Debug, Clone)]
pub struct ThermalParams {
    pub temperature: f64,
    pub epsilon: f64,
    nbar: DVector<f64>,
}

impl ThermalParams {
    pub fn new(table: &ModeTable, temperature: f64, epsilon: f64) -> Result<Self> {
        if temperature < 0.0 {
            return Err(Error::InvalidInput("temperature must be >= 0".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidInput("epsilon must lie in (0, 1)".into()));
        }
        let nbar = table.frequencies().map(|w| mean_occupation(w, temperature));
        Ok(Self {
            temperature,
            epsilon,
            nbar,
        })
    }

    /// Per-mode mean occupations.
    pub fn nbar(&self) -> &DVector<f64> {
        &self.nbar
    }
}

/// How to realize the thermal average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleMode {
    /// Exact-weight enumeration of the dominant Fock configurations.
    Enumerate,
    /// Seeded Monte-Carlo draws with equal weights.
    Sample { seed: u64, count: usize },
    /// Enumerate, falling back to sampling if the enumeration would
    /// exceed the configuration cap.
    Auto { seed: u64, count: usize },
}

/// Weighted set of Fock configurations.
#[derive(Debug, Clone)]
pub struct FockEnsemble {
    members: Vec<(Vec<u32>, f64)>,
    captured_mass: f64,
    sampled: bool,
}

impl FockEnsemble {
    /// Configurations with their weights. Enumerated ensembles are ordered
    /// by descending probability with exact (non-renormalized) weights;
    /// sampled ensembles carry equal weights `1 / count`.
    pub fn members(&self) -> &[(Vec<u32>, f64)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Total probability mass covered (1 for sampled ensembles).
    pub fn captured_mass(&self) -> f64 {
        self.captured_mass
    }

    pub fn sampled(&self) -> bool {
        self.sampled
    }
}

/// Max-heap entry ordered by probability, ties broken by configuration to
/// keep the enumeration deterministic.
struct HeapEntry {
    probability: f64,
    config: Vec<u32>,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.probability
            .total_cmp(&other.probability)
            .then_with(|| other.config.cmp(&self.config))
    }
}

/// Build a thermal Fock ensemble over the table's modes.
///
/// Enumeration visits configurations in descending probability (a best-first
/// walk, exact weights recomputed per configuration) inside per-mode cutoff
/// boxes chosen so the box holds at least `1 - epsilon` of the mass, and
/// stops once the visited mass reaches `1 - epsilon`. Fails with
/// `EnsembleTooLarge` when more than `max_configs` configurations would be
/// needed. Sampling draws per-mode geometric occupations from a seeded
/// ChaCha12 stream, identical on every platform.
pub fn build_ensemble(
    params: &ThermalParams,
    mode: EnsembleMode,
    max_configs: usize,
) -> Result<FockEnsemble> {
    let n = params.nbar.len();
    if params.temperature == 0.0 {
        return Ok(FockEnsemble {
            members: vec![(vec![0; n], 1.0)],
            captured_mass: 1.0,
            sampled: false,
        });
    }
    match mode {
        EnsembleMode::Enumerate => enumerate_ensemble(params, max_configs),
        EnsembleMode::Sample { seed, count } => Ok(sample_ensemble(params, seed, count)),
        EnsembleMode::Auto { seed, count } => {
            match enumerate_ensemble(params, max_configs) {
                Ok(e) => Ok(e),
                Err(Error::EnsembleTooLarge { .. }) => {
                    Ok(sample_ensemble(params, seed, count))
                }
                Err(e) => Err(e),
            }
        }
    }
}

fn enumerate_ensemble(params: &ThermalParams, max_configs: usize) -> Result<FockEnsemble> {
    let n = params.nbar.len();
    let nbar: Vec<f64> = params.nbar.iter().copied().collect();
    let q: Vec<f64> = nbar.iter().map(|&nb| nb / (1.0 + nb)).collect();
    let target = 1.0 - params.epsilon;
    // per-mode cutoff: smallest c with 1 - q^(c+1) >= (1-eps)^(1/N)
    let per_mode_target = target.powf(1.0 / n as f64);
    let cutoffs: Vec<u32> = q
        .iter()
        .map(|&qm| {
            if qm <= 0.0 {
                0
            } else {
                let c = ((1.0 - per_mode_target).ln() / qm.ln()).ceil() - 1.0;
                c.max(0.0) as u32
            }
        })
        .collect();

    let zero = vec![0u32; n];
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        probability: fock_probability(&zero, &nbar),
        config: zero.clone(),
    });
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    seen.insert(zero);
    let mut members = Vec::new();
    let mut mass = 0.0;
    while mass < target {
        let entry = match heap.pop() {
            Some(e) => e,
            None => break, // box exhausted; its mass is >= target by construction
        };
        if members.len() >= max_configs {
            return Err(Error::EnsembleTooLarge { cap: max_configs });
        }
        mass += entry.probability;
        for m in 0..n {
            if entry.config[m] < cutoffs[m] {
                let mut next = entry.config.clone();
                next[m] += 1;
                if !seen.contains(&next) {
                    seen.insert(next.clone());
                    heap.push(HeapEntry {
                        probability: fock_probability(&next, &nbar),
                        config: next,
                    });
                }
            }
        }
        members.push((entry.config, entry.probability));
    }
    Ok(FockEnsemble {
        members,
        captured_mass: mass,
        sampled: false,
    })
}

fn sample_ensemble(params: &ThermalParams, seed: u64, count: usize) -> FockEnsemble {
    let q: Vec<f64> = params.nbar.iter().map(|&nb| nb / (1.0 + nb)).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let weight = 1.0 / count as f64;
    let members = (0..count)
        .map(|_| {
            let config: Vec<u32> = q
                .iter()
                .map(|&qm| {
                    if qm <= 0.0 {
                        0
                    } else {
                        // geometric inverse CDF
                        let u: f64 = rng.random();
                        ((1.0 - u).ln() / qm.ln()).floor() as u32
                    }
                })
                .collect();
            (config, weight)
        })
        .collect();
    FockEnsemble {
        members,
        captured_mass: 1.0,
        sampled: true,
    }
}

/// Options for the thermal average in [`thermal_dynamics`].
#[derive(Debug, Clone, Copy)]
pub struct ThermalRunOptions {
    pub epsilon: f64,
    pub mode: EnsembleMode,
    pub max_configs: usize,
}

impl Default for ThermalRunOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            mode: EnsembleMode::Enumerate,
            max_configs: 100_000,
        }
    }
}

/// Ensemble-averaged bipolaron observables.
#[derive(Debug, Clone)]
pub struct ThermalObservables {
    pub temperature: f64,
    pub times: Vec<f64>,
    /// Averaged pair probability per site, one row per output time.
    pub p_site: Vec<Vec<f64>>,
    pub p_total: Vec<f64>,
    pub sigma_sd: Vec<f64>,
    pub ensemble_size: usize,
    pub captured_mass: f64,
    pub sampled: bool,
}

/// Thermally averaged pair dynamics: for each ensemble member the sector
/// Hamiltonian gets the member's configuration energies on the diagonal
/// (the per-basis-state frequency shifts contracted with `n_m + 1/2`,
/// exact-Hessian method), the pair prepared at `initial_site` is propagated
/// coherently, and site probabilities are weight-averaged. Members evolve
/// independently; the reduction order is fixed.
pub fn thermal_dynamics(
    eq: &EquilibriumSolution,
    settings: &TweezerSettings,
    j: &JMatrix,
    basis: &SectorBasis,
    temperature: f64,
    grid: &TimeGrid,
    initial_site: usize,
    options: &ThermalRunOptions,
) -> Result<ThermalObservables> {
    let n = basis.ion_count();
    let table = modes(&axial_hessian(eq)?, Axis::Axial, eq.trap().axial_frequency)?;
    let pair_indices = basis.pair_state_indices();
    let initial_index = *pair_indices
        .get(initial_site)
        .ok_or_else(|| Error::InvalidInput(format!("no pair state at site {initial_site}")))?;

    // per-basis-state frequency shifts, exact method
    let shift_vectors: Vec<DVector<f64>> = basis
        .states()
        .par_iter()
        .map(|config| {
            let curv = settings.state_curvatures(config)?;
            frequency_shifts(eq, &table, &curv, Method::Exact)
        })
        .collect::<Result<_>>()?;

    let params = ThermalParams::new(&table, temperature, options.epsilon)?;
    let ensemble = build_ensemble(&params, options.mode, options.max_configs)?;

    let hop = assemble(basis, j, &vec![0.0; basis.len()])?;
    let dim = basis.len();
    let nt = grid.len();

    let partials: Vec<Vec<f64>> = ensemble
        .members()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; nt * n];
            let mut h = DMatrix::zeros(dim, dim);
            for (fock, weight) in chunk {
                h.copy_from(hop.matrix());
                for (b, shifts) in shift_vectors.iter().enumerate() {
                    let e: f64 = (0..n)
                        .map(|m| shifts[m] * (fock[m] as f64 + 0.5))
                        .sum();
                    h[(b, b)] += e;
                }
                let (vals, vecs) = eigen::sorted_symmetric(&h);
                let mut psi0 = DVector::from_element(dim, Complex64::new(0.0, 0.0));
                psi0[initial_index] = Complex64::new(1.0, 0.0);
                let coeffs = real_mat_tr_mul_complex(&vecs, &psi0);
                let mut rotated = vec![Complex64::new(0.0, 0.0); dim];
                for (ti, &t) in grid.times().iter().enumerate() {
                    for c in 0..dim {
                        rotated[c] = coeffs[c] * Complex64::from_polar(1.0, -vals[c] * t);
                    }
                    for (site, &k) in pair_indices.iter().enumerate() {
                        // amplitude on the pair state: row k of V times the
                        // rotated coefficients, accumulated in the same
                        // order as the coherent propagator
                        let mut amp = Complex64::new(0.0, 0.0);
                        for c in 0..dim {
                            amp += vecs[(k, c)] * rotated[c];
                        }
                        acc[ti * n + site] += weight * amp.norm_sqr();
                    }
                }
            }
            acc
        })
        .collect();

    let mut p_site = vec![vec![0.0; n]; nt];
    for partial in &partials {
        for ti in 0..nt {
            for site in 0..n {
                p_site[ti][site] += partial[ti * n + site];
            }
        }
    }
    let p_total: Vec<f64> = p_site.iter().map(|row| row.iter().sum()).collect();
    let sigma_sd: Vec<f64> = p_site
        .iter()
        .map(|row| spread_sd(row, initial_site))
        .collect();
    Ok(ThermalObservables {
        temperature,
        times: grid.times().to_vec(),
        p_site,
        p_total,
        sigma_sd,
        ensemble_size: ensemble.len(),
        captured_mass: ensemble.captured_mass(),
        sampled: ensemble.sampled(),
    })
}

/// Probability that every mode except the lowest (center-of-mass) is in
/// its ground state: `prod_{m=2}^{N} (1 - exp(-hbar omega_m / kB T))`.
pub fn p_mobile_product(table: &ModeTable, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 1.0;
    }
    let beta = CODATA_2018.hbar / (CODATA_2018.boltzmann * temperature);
    table
        .frequencies()
        .iter()
        .skip(1)
        .map(|&w| 1.0 - (-beta * w).exp())
        .product()
}

/// Closed-form mobility estimate for a linear spectrum in the long-chain
/// limit, as a function of `x = hbar omega_z / (kB T)`.
#[derive(Debug, Clone, Copy)]
pub struct PMobile {
    pub value: f64,
    /// Set when the raw formula left [0, 1] and was clamped.
    pub clamped: bool,
}

/// `(2 sinh x - 1) / (e^x - 1)`, clamped to [0, 1].
pub fn p_mobile_closed(x: f64) -> PMobile {
    assert!(x > 0.0, "x must be positive");
    let raw = (2.0 * x.sinh() - 1.0) / x.exp_m1();
    let value = raw.clamp(0.0, 1.0);
    PMobile {
        value,
        clamped: value != raw,
    }
}

/// Power-law exponent `nu` of the mode spectrum, `omega_m ~ omega_1 m^nu`:
/// least-squares slope of `ln(omega_m / omega_1)` against `ln m` through
/// the origin (the model form pins the line at `m = 1`).
pub fn fit_nu(table: &ModeTable) -> Result<f64> {
    if table.axis() != Axis::Axial {
        return Err(Error::InvalidInput(
            "the spectrum exponent is defined for axial modes".into(),
        ));
    }
    let n = table.ion_count();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 modes, got {n}"
        )));
    }
    let w1 = table.frequencies()[0];
    let mut num = 0.0;
    let mut den = 0.0;
    for m in 1..=n {
        let x = (m as f64).ln();
        let y = (table.frequencies()[m - 1] / w1).ln();
        num += x * y;
        den += x * x;
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{j_matrix, DriveParams};
    use crate::crystal::{chain_modes, solve_equilibrium, TrapConfig};
    use crate::dynamics::evolve_pair_at;
    use crate::hilbert::build_basis;
    use crate::tweezer::calibrate;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    const WZ: f64 = TAU * 0.5e6;

    fn paper_trap(n: usize) -> TrapConfig {
        TrapConfig::new(n, 40.0, WZ, TAU * 3e6, TAU * 4e6).unwrap()
    }

    fn axial_table(n: usize) -> ModeTable {
        // long chains are only axially stable at this transverse
        // confinement, so build the axial table directly
        let eq = solve_equilibrium(&paper_trap(n), 1e-12, 200).unwrap();
        modes(&axial_hessian(&eq).unwrap(), Axis::Axial, WZ).unwrap()
    }

    #[test]
    fn mean_occupation_values() {
        assert_eq!(mean_occupation(WZ, 0.0), 0.0);
        // hbar omega / kB T = ln 2 gives exactly one quantum
        let t = CODATA_2018.hbar * WZ / (CODATA_2018.boltzmann * 2.0_f64.ln());
        assert_relative_eq!(mean_occupation(WZ, t), 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            mean_occupation(WZ, 25e-6),
            0.6206164582293086,
            max_relative = 1e-10
        );
    }

    #[test]
    fn fock_probability_basics() {
        let nbar = [0.5, 0.2, 0.05];
        let p0 = fock_probability(&[0, 0, 0], &nbar);
        let expect: f64 = nbar.iter().map(|nb| 1.0 / (1.0 + nb)).product();
        assert_relative_eq!(p0, expect, max_relative = 1e-14);
        // zero temperature: nbar = 0
        assert_eq!(fock_probability(&[0, 0], &[0.0, 0.0]), 1.0);
        assert_eq!(fock_probability(&[1, 0], &[0.0, 0.0]), 0.0);
        // single mode at nbar = 1: P(n) = (1/2)^(n+1)
        for n in 0..6u32 {
            assert_relative_eq!(
                fock_probability(&[n], &[1.0]),
                0.5_f64.powi(n as i32 + 1),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn fock_probability_normalizes_on_two_mode_toy() {
        let nbar = [0.8, 0.3];
        let mut total = 0.0;
        for n1 in 0..80u32 {
            for n2 in 0..80u32 {
                total += fock_probability(&[n1, n2], &nbar);
            }
        }
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn ensemble_zero_temperature() {
        let table = axial_table(10);
        let params = ThermalParams::new(&table, 0.0, 1e-3).unwrap();
        let e = build_ensemble(&params, EnsembleMode::Enumerate, 1000).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.members()[0].0, vec![0u32; 10]);
        assert_eq!(e.members()[0].1, 1.0);
        assert_eq!(e.captured_mass(), 1.0);
    }

    #[test]
    fn ensemble_mass_and_order() {
        let table = axial_table(10);
        for t_uk in [10.0, 20.0, 25.0] {
            let params = ThermalParams::new(&table, t_uk * 1e-6, 1e-3).unwrap();
            let e = build_ensemble(&params, EnsembleMode::Enumerate, 100_000).unwrap();
            assert!(e.captured_mass() >= 1.0 - 1e-3, "T={t_uk}");
            let nbar: Vec<f64> = params.nbar().iter().copied().collect();
            let mut prev = f64::INFINITY;
            for (config, w) in e.members() {
                assert_relative_eq!(*w, fock_probability(config, &nbar), max_relative = 1e-13);
                assert!(*w <= prev + 1e-18, "descending order");
                prev = *w;
            }
        }
    }

    #[test]
    fn ensemble_size_regression_at_25uk() {
        // cross-checked against an independent best-first enumeration
        let table = axial_table(10);
        let params = ThermalParams::new(&table, 25e-6, 1e-3).unwrap();
        let e = build_ensemble(&params, EnsembleMode::Enumerate, 100_000).unwrap();
        assert_eq!(e.len(), 756);
    }

    #[test]
    fn ensemble_cap_enforced() {
        let table = axial_table(10);
        let params = ThermalParams::new(&table, 25e-6, 1e-3).unwrap();
        assert!(matches!(
            build_ensemble(&params, EnsembleMode::Enumerate, 100),
            Err(Error::EnsembleTooLarge { cap: 100 })
        ));
        // auto falls back to sampling
        let e = build_ensemble(
            &params,
            EnsembleMode::Auto {
                seed: 7,
                count: 500,
            },
            100,
        )
        .unwrap();
        assert!(e.sampled());
        assert_eq!(e.len(), 500);
    }

    #[test]
    fn sampling_reproducible_and_unbiased() {
        let table = axial_table(10);
        let params = ThermalParams::new(&table, 25e-6, 1e-3).unwrap();
        let count = 10_000;
        let a = build_ensemble(&params, EnsembleMode::Sample { seed: 42, count }, 0).unwrap();
        let b = build_ensemble(&params, EnsembleMode::Sample { seed: 42, count }, 0).unwrap();
        assert_eq!(a.members(), b.members());
        let c = build_ensemble(&params, EnsembleMode::Sample { seed: 43, count }, 0).unwrap();
        assert_ne!(a.members(), c.members());
        // empirical mean within 3 sigma of nbar for every mode
        for m in 0..10 {
            let mean: f64 = a
                .members()
                .iter()
                .map(|(cfg, _)| cfg[m] as f64)
                .sum::<f64>()
                / count as f64;
            let nbar = params.nbar()[m];
            let sigma = (nbar * (1.0 + nbar) / count as f64).sqrt();
            assert!(
                (mean - nbar).abs() <= 3.0 * sigma.max(1e-6),
                "mode {m}: mean {mean} nbar {nbar}"
            );
        }
    }

    #[test]
    fn p_mobile_product_limits() {
        let table = axial_table(10);
        assert_eq!(p_mobile_product(&table, 0.0), 1.0);
        let single = axial_table(1);
        assert_eq!(p_mobile_product(&single, 37e-6), 1.0);
    }

    #[test]
    fn p_mobile_product_frozen_high_precision() {
        // T such that hbar omega_z / kB T = 1; reference values from a
        // 50-digit evaluation of the product over the ten-ion spectrum
        let table = axial_table(10);
        let t1 = CODATA_2018.hbar * WZ / CODATA_2018.boltzmann;
        assert_relative_eq!(
            p_mobile_product(&table, t1),
            0.67673366486365949,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            p_mobile_product(&table, t1 / 2.0),
            0.9580541527584192,
            max_relative = 1e-12
        );
    }

    #[test]
    fn p_mobile_closed_values() {
        assert_relative_eq!(
            p_mobile_closed(1.0).value,
            0.7859027343021159,
            max_relative = 1e-12
        );
        let far = p_mobile_closed(50.0);
        assert_relative_eq!(far.value, 1.0, max_relative = 1e-12);
        assert!(!far.clamped);
        // raw formula goes negative at small x
        let cold = p_mobile_closed(0.1);
        assert_eq!(cold.value, 0.0);
        assert!(cold.clamped);
    }

    #[test]
    fn p_mobile_closed_equals_low_t_expansion() {
        // identity: (2 sinh x - 1)/(e^x - 1) = 1 - e^(-2x)/(1 - e^(-x))
        let mut x = 0.5;
        while x <= 10.0 {
            let lhs = p_mobile_closed(x).value;
            let rhs = 1.0 - (-2.0 * x).exp() / (1.0 - (-x).exp());
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            x += 0.25;
        }
    }

    #[test]
    fn product_vs_closed_form_synthetic_linear_spectrum() {
        // nu = 1 spectrum, N = 40: the closed form is the long-chain,
        // low-temperature limit of the product
        let n = 40;
        let freqs: Vec<f64> = (1..=n).map(|m| WZ * m as f64).collect();
        let table = ModeTable::from_parts(
            Axis::Axial,
            WZ,
            freqs,
            DMatrix::identity(n, n),
        )
        .unwrap();
        for (x, tol) in [(1.0, 0.02), (2.0, 0.005), (3.0, 0.005)] {
            let t = CODATA_2018.hbar * WZ / (CODATA_2018.boltzmann * x);
            let product = p_mobile_product(&table, t);
            let closed = p_mobile_closed(x).value;
            let rel = (product - closed).abs() / product;
            assert!(rel < tol, "x={x}: product {product} closed {closed} rel {rel}");
        }
    }

    #[test]
    fn p_mobile_monotone_in_temperature_near_constant_in_size() {
        let table = axial_table(10);
        let mut prev = 1.0;
        for k in 1..=10 {
            let p = p_mobile_product(&table, k as f64 * 5e-6);
            assert!(p < prev);
            prev = p;
        }
        // the curve is almost independent of the chain length (the low
        // modes drift slightly upward with N, so it is not monotone in N)
        for t in [15e-6, 25e-6, 40e-6] {
            let reference = p_mobile_product(&axial_table(10), t);
            for n in [15, 20, 25, 30] {
                let p = p_mobile_product(&axial_table(n), t);
                assert!(
                    (p - reference).abs() / reference < 0.05,
                    "N={n} T={t}: {p} vs {reference}"
                );
            }
        }
    }

    #[test]
    fn fit_nu_synthetic_and_real() {
        let synth = |nu: f64| {
            let freqs: Vec<f64> = (1..=12).map(|m| WZ * (m as f64).powf(nu)).collect();
            ModeTable::from_parts(Axis::Axial, WZ, freqs, DMatrix::identity(12, 12)).unwrap()
        };
        assert_relative_eq!(fit_nu(&synth(0.9)).unwrap(), 0.9, max_relative = 1e-12);
        assert_relative_eq!(fit_nu(&synth(1.0)).unwrap(), 1.0, max_relative = 1e-12);
        for n in [10, 20, 30] {
            let nu = fit_nu(&axial_table(n)).unwrap();
            assert!((0.79..=0.85).contains(&nu), "N={n}: nu={nu}");
        }
        let tiny = axial_table(2);
        assert!(fit_nu(&tiny).is_err());
    }

    #[test]
    fn thermal_dynamics_zero_temperature_matches_coherent() {
        let trap = paper_trap(6);
        let eq = solve_equilibrium(&trap, 1e-12, 200).unwrap();
        let (_, axial, transverse) = chain_modes(&trap).unwrap();
        let settings = calibrate(&axial, TAU * 160.0, -TAU * 65.0).unwrap();
        let drive =
            DriveParams::with_wavelength(TAU * 150e3, TAU * 3.3e6, 729e-9, None).unwrap();
        let j = j_matrix(&transverse, &drive, trap.ion_mass).unwrap();
        let basis = build_basis(6, 2, 0).unwrap();
        let grid = TimeGrid::explicit(vec![0.0, 0.01, 0.03, 0.05]).unwrap();

        let thermal = thermal_dynamics(
            &eq,
            &settings,
            &j,
            &basis,
            0.0,
            &grid,
            3,
            &ThermalRunOptions::default(),
        )
        .unwrap();
        assert_eq!(thermal.ensemble_size, 1);

        // coherent reference through the dynamics module with the same
        // diagonal energies
        let shift_diag: Vec<f64> = basis
            .states()
            .iter()
            .map(|c| {
                let curv = settings.state_curvatures(c).unwrap();
                let shifts = frequency_shifts(&eq, &axial, &curv, Method::Exact).unwrap();
                (0..6).map(|m| shifts[m] * 0.5).sum()
            })
            .collect();
        let h = assemble(&basis, &j, &shift_diag).unwrap();
        let traj = evolve_pair_at(&h, &basis, 3, &grid).unwrap();
        for ti in 0..grid.len() {
            for site in 0..6 {
                assert_eq!(
                    thermal.p_site[ti][site],
                    traj.pair_probabilities(ti)[site],
                    "t {ti} site {site}"
                );
            }
            assert_eq!(thermal.sigma_sd[ti], traj.sigma_sd()[ti]);
        }
    }

    #[test]
    fn thermal_pinning_at_finite_temperature() {
        let trap = paper_trap(10);
        let eq = solve_equilibrium(&trap, 1e-12, 200).unwrap();
        let (_, axial, transverse) = chain_modes(&trap).unwrap();
        let settings = calibrate(&axial, TAU * 160.0, -TAU * 65.0).unwrap();
        let drive =
            DriveParams::with_wavelength(TAU * 150e3, TAU * 3.3e6, 729e-9, None).unwrap();
        let j = j_matrix(&transverse, &drive, trap.ion_mass).unwrap();
        let basis = build_basis(10, 2, 0).unwrap();
        let grid = TimeGrid::explicit(vec![0.05]).unwrap();
        let opts = ThermalRunOptions::default();

        let cold = thermal_dynamics(&eq, &settings, &j, &basis, 0.0, &grid, 3, &opts).unwrap();
        let warm =
            thermal_dynamics(&eq, &settings, &j, &basis, 25e-6, &grid, 3, &opts).unwrap();
        assert!(
            warm.sigma_sd[0] < cold.sigma_sd[0],
            "sigma(25uK) = {} vs sigma(0) = {}",
            warm.sigma_sd[0],
            cold.sigma_sd[0]
        );
        assert!(warm.p_total[0] <= 1.0 + 1e-9);
    }
}
