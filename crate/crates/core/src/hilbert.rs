//! Conserved-sector basis and Hamiltonian assembly.
//!
//! The resonant processes conserve the encoded particle number `n` and
//! total spin `S_z`, so the dynamics block-diagonalizes over sectors. The
//! sectors of interest are small (dimension `N^2` for two particles with
//! opposite spins), which keeps dense storage and dense eigensolvers the
//! right tool up to `N = 30`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::coupling::{resonant_processes, JMatrix};
use crate::crystal::{axial_hessian, modes, Axis, EquilibriumSolution};
use crate::eigen;
use crate::error::{Error, Result};
use crate::tweezer::{config_energy_with, Method, SpinConfig, SpinState, TweezerSettings};

/// Ordered basis of one `(n, S_z)` sector with constant-time index lookup.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    ion_count: usize,
    particle_number: u32,
    spin_z_doubled: i32,
    states: Vec<SpinConfig>,
    index: HashMap<Vec<SpinState>, usize>,
}

impl SectorBasis {
    pub fn ion_count(&self) -> usize {
        self.ion_count
    }

    pub fn particle_number(&self) -> u32 {
        self.particle_number
    }

    /// Twice the sector spin projection.
    pub fn spin_z_doubled(&self) -> i32 {
        self.spin_z_doubled
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[SpinConfig] {
        &self.states
    }

    pub fn state(&self, idx: usize) -> &SpinConfig {
        &self.states[idx]
    }

    pub fn index_of(&self, config: &SpinConfig) -> Option<usize> {
        self.index.get(config.states()).copied()
    }

    /// Indices of the pair-at-site states, by site. Empty unless the
    /// sector is the two-particle, `S_z = 0` one.
    pub fn pair_state_indices(&self) -> Vec<usize> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, c)| c.states().iter().any(|&s| s == SpinState::Pair))
            .map(|(k, _)| k)
            .collect()
    }
}

/// Enumerate the `(n, S_z)` sector. Ordering: pair states first by site,
/// then up/down placements lexicographic by `(up_site, down_site)`; for
/// equal-spin sectors, site pairs ascending.
pub fn build_basis(ion_count: usize, particle_number: u32, spin_z_doubled: i32) -> Result<SectorBasis> {
    if particle_number > 2 {
        return Err(Error::UnsupportedSector { n: particle_number });
    }
    if spin_z_doubled.unsigned_abs() > particle_number
        || (spin_z_doubled - particle_number as i32) % 2 != 0
    {
        return Err(Error::InvalidInput(format!(
            "no states with n = {particle_number} and 2 S_z = {spin_z_doubled}"
        )));
    }
    let n = ion_count;
    let mut states: Vec<SpinConfig> = Vec::new();
    match (particle_number, spin_z_doubled) {
        (0, 0) => states.push(SpinConfig::vacuum(n)),
        (1, 1) | (1, -1) => {
            let s = if spin_z_doubled > 0 {
                SpinState::Up
            } else {
                SpinState::Down
            };
            for i in 0..n {
                let mut v = vec![SpinState::Vacuum; n];
                v[i] = s;
                states.push(SpinConfig::new(v));
            }
        }
        (2, 0) => {
            for i in 0..n {
                states.push(SpinConfig::pair_at(n, i));
            }
            for i in 0..n {
                for j in 0..n {
                    if j != i {
                        states.push(SpinConfig::up_down(n, i, j));
                    }
                }
            }
        }
        (2, 2) | (2, -2) => {
            let s = if spin_z_doubled > 0 {
                SpinState::Up
            } else {
                SpinState::Down
            };
            for i in 0..n {
                for j in i + 1..n {
                    let mut v = vec![SpinState::Vacuum; n];
                    v[i] = s;
                    v[j] = s;
                    states.push(SpinConfig::new(v));
                }
            }
        }
        _ => unreachable!("parity check above"),
    }
    let index = states
        .iter()
        .enumerate()
        .map(|(k, c)| (c.states().to_vec(), k))
        .collect();
    Ok(SectorBasis {
        ion_count,
        particle_number,
        spin_z_doubled,
        states,
        index,
    })
}

/// Dense real symmetric sector Hamiltonian, units rad/s (energy over hbar).
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    matrix: DMatrix<f64>,
    provenance: Option<String>,
}

impl HamiltonianMatrix {
    /// Wrap a caller-built matrix, enforcing symmetry.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let asym = (&matrix - matrix.transpose()).abs().max();
        let scale = matrix.abs().max().max(1.0);
        if asym > 1e-12 * scale {
            return Err(Error::InvalidInput(format!(
                "matrix is not symmetric (deviation {asym:.3e})"
            )));
        }
        Ok(Self {
            matrix,
            provenance: None,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn with_provenance(mut self, label: impl Into<String>) -> Self {
        self.provenance = Some(label.into());
        self
    }
}

/// Assemble the sector Hamiltonian: hopping
/// `sum_{i<j} J_ij sum_{(P,Q)} P_i Q_j` over the conjugation-closed
/// resonant process set, plus the supplied configuration energies on the
/// diagonal. With this convention the single-particle sector reproduces
/// the hopping matrix entry for entry.
pub fn assemble(
    basis: &SectorBasis,
    j: &JMatrix,
    diagonal_energies: &[f64],
) -> Result<HamiltonianMatrix> {
    let dim = basis.len();
    if diagonal_energies.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: diagonal_energies.len(),
        });
    }
    let n = basis.ion_count();
    if j.ion_count() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: j.ion_count(),
        });
    }
    let processes = resonant_processes();
    let mut h = DMatrix::zeros(dim, dim);
    for (col, config) in basis.states().iter().enumerate() {
        h[(col, col)] = diagonal_energies[col];
        let local = config.states();
        for i in 0..n {
            for k in i + 1..n {
                let jik = j.value(i, k);
                if jik == 0.0 {
                    continue;
                }
                for &(p, q) in &processes {
                    if let (Some(a), Some(b)) = (p.apply(local[i]), q.apply(local[k])) {
                        let mut target = local.to_vec();
                        target[i] = a;
                        target[k] = b;
                        let row = basis
                            .index
                            .get(&target)
                            .copied()
                            .expect("resonant process left the sector");
                        h[(row, col)] += jik;
                    }
                }
            }
        }
    }
    debug_assert!(
        (&h - h.transpose()).abs().max() <= 1e-12 * h.abs().max().max(1.0),
        "assembled Hamiltonian must be symmetric"
    );
    Ok(HamiltonianMatrix {
        matrix: h,
        provenance: None,
    })
}

/// Configuration energies of every basis state on a fixed phonon
/// background, ready to drop onto the Hamiltonian diagonal.
pub fn sector_diagonal(
    eq: &EquilibriumSolution,
    settings: &TweezerSettings,
    basis: &SectorBasis,
    fock: &[u32],
    method: Method,
) -> Result<Vec<f64>> {
    let table = modes(&axial_hessian(eq)?, Axis::Axial, eq.trap().axial_frequency)?;
    basis
        .states()
        .iter()
        .map(|config| config_energy_with(eq, &table, settings, config, fock, method))
        .collect()
}

/// Ascending eigenvalues and matching eigenvectors of a sector Hamiltonian.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: DVector<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    /// Weight of an eigenvector on a subset of basis states.
    pub fn weight_on(&self, state_indices: &[usize], eigenstate: usize) -> f64 {
        state_indices
            .iter()
            .map(|&i| {
                let a = self.eigenvectors[(i, eigenstate)];
                a * a
            })
            .sum()
    }
}

/// Diagonalize a sector Hamiltonian.
pub fn spectrum(h: &HamiltonianMatrix) -> Spectrum {
    let (eigenvalues, eigenvectors) = eigen::sorted_symmetric(&h.matrix);
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}
