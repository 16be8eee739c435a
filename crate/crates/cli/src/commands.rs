//! The seven pipeline commands. Each one validates nothing itself (the
//! config is already checked), computes through the library, writes its
//! exports plus a manifest, and reports numerical failures upward.

use std::f64::consts::TAU;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use bipolaron::constants::CODATA_2018;
use bipolaron::coupling::{j_matrix, JMatrix};
use bipolaron::crystal::{
    axial_hessian, modes, solve_equilibrium, transverse_hessian, Axis, EquilibriumSolution,
    ModeTable, TrapConfig,
};
use bipolaron::dynamics::TimeGrid;
use bipolaron::hilbert::{assemble, build_basis, sector_diagonal, spectrum, SectorBasis};
use bipolaron::thermal::{
    mean_occupation, p_mobile_closed, p_mobile_product, thermal_dynamics, EnsembleMode,
    ThermalObservables, ThermalRunOptions,
};
use bipolaron::tweezer::{b_matrix, calibrate, Method, TweezerSettings};

use crate::config::{RunConfig, TweezerPlan};
use crate::output::{csv, fmt_f64, temperature_label, CmdError, OutputDir};

const EQUILIBRIUM_TOL: f64 = 1e-12;
const EQUILIBRIUM_MAX_ITER: usize = 200;

pub struct Context {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
}

struct Chain {
    trap: TrapConfig,
    eq: EquilibriumSolution,
    axial: ModeTable,
}

fn build_chain(config: &RunConfig) -> Result<Chain, CmdError> {
    let trap = config.trap()?;
    let eq = solve_equilibrium(&trap, EQUILIBRIUM_TOL, EQUILIBRIUM_MAX_ITER)?;
    let axial = modes(&axial_hessian(&eq)?, Axis::Axial, trap.axial_frequency)?;
    Ok(Chain { trap, eq, axial })
}

fn build_transverse(chain: &Chain) -> Result<ModeTable, CmdError> {
    Ok(modes(
        &transverse_hessian(&chain.eq, chain.trap.transverse_frequency_x)?,
        Axis::Transverse,
        chain.trap.axial_frequency,
    )?)
}

fn build_settings(config: &RunConfig, axial: &ModeTable) -> Result<TweezerSettings, CmdError> {
    match config.tweezer_plan() {
        TweezerPlan::Calibrated { g, gamma } => Ok(calibrate(axial, g, gamma)?),
        TweezerPlan::Explicit { varpi_khz, weights } => {
            let w = weights.unwrap_or_else(|| vec![1.0; axial.ion_count()]);
            Ok(TweezerSettings::explicit(varpi_khz, w, axial.omega_z())?)
        }
    }
}

fn build_j(config: &RunConfig, chain: &Chain) -> Result<JMatrix, CmdError> {
    let transverse = build_transverse(chain)?;
    Ok(j_matrix(&transverse, &config.drive()?, chain.trap.ion_mass)?)
}

fn thermal_options(ctx: &Context) -> ThermalRunOptions {
    ThermalRunOptions {
        epsilon: ctx.config.thermal.epsilon,
        mode: EnsembleMode::Auto {
            seed: ctx.seed,
            count: ctx.config.thermal.sampler_count,
        },
        max_configs: ctx.config.thermal.max_configs,
    }
}

#[derive(Serialize)]
struct ModeTableExport {
    axis: &'static str,
    omega_z_rad_s: f64,
    frequencies_rad_s: Vec<f64>,
    /// Row `m` holds the participation of every ion in mode `m`.
    eigenvectors: Vec<Vec<f64>>,
}

fn export_table(table: &ModeTable) -> ModeTableExport {
    let n = table.ion_count();
    ModeTableExport {
        axis: match table.axis() {
            Axis::Axial => "axial",
            Axis::Transverse => "transverse",
        },
        omega_z_rad_s: table.omega_z(),
        frequencies_rad_s: table.frequencies().iter().copied().collect(),
        eigenvectors: (0..n)
            .map(|m| (0..n).map(|i| table.participation(m, i)).collect())
            .collect(),
    }
}

fn mode_table_csv(table: &ModeTable) -> String {
    csv(
        &["mode", "frequency_rad_s", "frequency_hz"],
        (0..table.ion_count()).map(|m| {
            let w = table.frequencies()[m];
            vec![m.to_string(), fmt_f64(w), fmt_f64(w / TAU)]
        }),
    )
}

pub fn cmd_modes(ctx: &Context) -> Result<(), CmdError> {
    let start = Instant::now();
    let chain = build_chain(&ctx.config)?;
    let transverse = build_transverse(&chain)?;
    let mut out = OutputDir::create(&ctx.out_dir)?;

    if ctx.config.wants_csv() {
        let u = chain.eq.dimensionless();
        let z = chain.eq.positions();
        out.write_text(
            "equilibrium.csv",
            &csv(
                &["site", "u", "z_m"],
                (0..u.len()).map(|i| vec![(i + 1).to_string(), fmt_f64(u[i]), fmt_f64(z[i])]),
            ),
        )?;
        out.write_text("modes_axial.csv", &mode_table_csv(&chain.axial))?;
        out.write_text("modes_transverse.csv", &mode_table_csv(&transverse))?;
    }
    if ctx.config.wants_json() {
        #[derive(Serialize)]
        struct EquilibriumExport {
            length_scale_m: f64,
            residual_norm: f64,
            dimensionless: Vec<f64>,
            positions_m: Vec<f64>,
        }
        out.write_json(
            "equilibrium.json",
            &EquilibriumExport {
                length_scale_m: chain.eq.length_scale(),
                residual_norm: chain.eq.residual_norm(),
                dimensionless: chain.eq.dimensionless().iter().copied().collect(),
                positions_m: chain.eq.positions(),
            },
        )?;
        out.write_json("modes_axial.json", &export_table(&chain.axial))?;
        out.write_json("modes_transverse.json", &export_table(&transverse))?;
    }
    out.write_manifest(
        "modes",
        &ctx.config,
        ctx.seed,
        ctx.threads,
        start.elapsed().as_millis(),
    )
}

fn matrix_csv_rows(m: &nalgebra::DMatrix<f64>, scale: f64) -> Vec<Vec<String>> {
    (0..m.nrows())
        .map(|i| {
            let mut row = vec![(i + 1).to_string()];
            row.extend((0..m.ncols()).map(|j| fmt_f64(m[(i, j)] * scale)));
            row
        })
        .collect()
}

fn site_header(n: usize, prefix: &str) -> Vec<String> {
    let mut h = vec!["site".to_string()];
    h.extend((1..=n).map(|j| format!("{prefix}{j}")));
    h
}

pub fn cmd_bmatrix(ctx: &Context) -> Result<(), CmdError> {
    let start = Instant::now();
    let chain = build_chain(&ctx.config)?;
    let settings = build_settings(&ctx.config, &chain.axial)?;
    let b = b_matrix(&chain.eq, &settings)?;
    let n = chain.trap.ion_count;
    let mut out = OutputDir::create(&ctx.out_dir)?;

    if ctx.config.wants_csv() {
        let head = site_header(n, "b_hz_");
        let head_refs: Vec<&str> = head.iter().map(|s| s.as_str()).collect();
        out.write_text(
            "bmatrix.csv",
            &csv(&head_refs, matrix_csv_rows(&b, 1.0 / TAU)),
        )?;
        out.write_text(
            "weights.csv",
            &csv(
                &["site", "weight"],
                settings
                    .site_weights()
                    .iter()
                    .enumerate()
                    .map(|(i, &w)| vec![(i + 1).to_string(), fmt_f64(w)]),
            ),
        )?;
    }
    if ctx.config.wants_json() {
        #[derive(Serialize)]
        struct BExport {
            units: &'static str,
            method: &'static str,
            g_hz: Option<f64>,
            gamma_hz: Option<f64>,
            gs_gap_estimate_hz: Option<f64>,
            site_weights: Vec<f64>,
            values_hz: Vec<Vec<f64>>,
        }
        let targets = settings.targets();
        out.write_json(
            "bmatrix.json",
            &BExport {
                units: "Hz",
                method: "exact",
                g_hz: targets.map(|(g, _)| g / TAU),
                gamma_hz: targets.map(|(_, gm)| gm / TAU),
                gs_gap_estimate_hz: settings.gs_gap().map(|x| x / TAU),
                site_weights: settings.site_weights().to_vec(),
                values_hz: (0..n)
                    .map(|i| (0..n).map(|j| b[(i, j)] / TAU).collect())
                    .collect(),
            },
        )?;
    }
    out.write_manifest(
        "bmatrix",
        &ctx.config,
        ctx.seed,
        ctx.threads,
        start.elapsed().as_millis(),
    )
}

pub fn cmd_jmatrix(ctx: &Context) -> Result<(), CmdError> {
    let start = Instant::now();
    let chain = build_chain(&ctx.config)?;
    let j = build_j(&ctx.config, &chain)?;
    let n = chain.trap.ion_count;
    let mut out = OutputDir::create(&ctx.out_dir)?;

    if ctx.config.wants_csv() {
        let head = site_header(n, "j_hz_");
        let head_refs: Vec<&str> = head.iter().map(|s| s.as_str()).collect();
        out.write_text(
            "jmatrix.csv",
            &csv(&head_refs, matrix_csv_rows(j.values(), 1.0 / TAU)),
        )?;
    }
    if ctx.config.wants_json() {
        #[derive(Serialize)]
        struct JExport {
            units: &'static str,
            max_hz: f64,
            alpha: Option<f64>,
            fit_rms_residual_hz: Option<f64>,
            fit_pairs_used: Option<usize>,
            lamb_dicke: Vec<f64>,
            omega_khz: f64,
            mu_mhz: f64,
            wavenumber_per_m: f64,
            values_hz: Vec<Vec<f64>>,
        }
        out.write_json(
            "jmatrix.json",
            &JExport {
                units: "Hz",
                max_hz: j.max_coupling() / TAU,
                alpha: j.alpha().map(|f| f.exponent),
                fit_rms_residual_hz: j.alpha().map(|f| f.rms_residual / TAU),
                fit_pairs_used: j.alpha().map(|f| f.pairs_used),
                lamb_dicke: j.lamb_dicke().iter().copied().collect(),
                omega_khz: j.drive().rabi_frequency / TAU / 1e3,
                mu_mhz: j.drive().modulation / TAU / 1e6,
                wavenumber_per_m: j.drive().wavenumber,
                values_hz: (0..n)
                    .map(|i| (0..n).map(|k| j.value(i, k) / TAU).collect())
                    .collect(),
            },
        )?;
    }
    out.write_manifest(
        "jmatrix",
        &ctx.config,
        ctx.seed,
        ctx.threads,
        start.elapsed().as_millis(),
    )
}

fn pair_sector(config: &RunConfig) -> Result<SectorBasis, CmdError> {
    Ok(build_basis(config.trap.ion_count, 2, 0)?)
}

fn spectrum_csv(basis: &SectorBasis, s: &bipolaron::hilbert::Spectrum) -> String {
    let pair_indices = basis.pair_state_indices();
    let e0 = s.eigenvalues[0];
    csv(
        &["index", "eigenvalue_hz", "pair_character"],
        (0..basis.len()).map(|k| {
            vec![
                k.to_string(),
                fmt_f64((s.eigenvalues[k] - e0) / TAU),
                fmt_f64(s.weight_on(&pair_indices, k)),
            ]
        }),
    )
}

pub fn cmd_spectrum(ctx: &Context) -> Result<(), CmdError> {
    let start = Instant::now();
    let chain = build_chain(&ctx.config)?;
    let settings = build_settings(&ctx.config, &chain.axial)?;
    let j = build_j(&ctx.config, &chain)?;
    let basis = pair_sector(&ctx.config)?;
    let n = chain.trap.ion_count;
    let fock = vec![0u32; n];

    let diag_on = sector_diagonal(&chain.eq, &settings, &basis, &fock, Method::Exact)?;
    let spec_on = spectrum(&assemble(&basis, &j, &diag_on)?);
    let zeroed = TweezerSettings::zeroed(n);
    let diag_off = sector_diagonal(&chain.eq, &zeroed, &basis, &fock, Method::Exact)?;
    let spec_off = spectrum(&assemble(&basis, &j, &diag_off)?);

    let mut out = OutputDir::create(&ctx.out_dir)?;
    if ctx.config.wants_csv() {
        out.write_text("spectrum_on.csv", &spectrum_csv(&basis, &spec_on))?;
        out.write_text("spectrum_off.csv", &spectrum_csv(&basis, &spec_off))?;
    }
    if ctx.config.wants_json() {
        #[derive(Serialize)]
        struct SpectrumSummary {
            dim: usize,
            gap_on_hz: f64,
            gap_off_hz: f64,
            mean_spacing_off_hz: f64,
            gs_gap_estimate_hz: Option<f64>,
            min_pair_character_lowest_band: f64,
        }
        let dim = basis.len();
        let pair_indices = basis.pair_state_indices();
        let band = pair_indices.len();
        let min_char = (0..band)
            .map(|k| spec_on.weight_on(&pair_indices, k))
            .fold(f64::INFINITY, f64::min);
        out.write_json(
            "spectrum_summary.json",
            &SpectrumSummary {
                dim,
                gap_on_hz: (spec_on.eigenvalues[band] - spec_on.eigenvalues[band - 1]) / TAU,
                gap_off_hz: (spec_off.eigenvalues[band] - spec_off.eigenvalues[band - 1]) / TAU,
                mean_spacing_off_hz: (spec_off.eigenvalues[dim - 1] - spec_off.eigenvalues[0])
                    / (dim as f64 - 1.0)
                    / TAU,
                gs_gap_estimate_hz: settings.gs_gap().map(|x| x / TAU),
                min_pair_character_lowest_band: min_char,
            },
        )?;
    }
    out.write_manifest(
        "spectrum",
        &ctx.config,
        ctx.seed,
        ctx.threads,
        start.elapsed().as_millis(),
    )
}

fn trajectory_csv(obs: &ThermalObservables) -> String {
    let n = obs.p_site.first().map_or(0, |row| row.len());
    let mut head = vec!["time_ms".to_string()];
    head.extend((1..=n).map(|i| format!("p_site_{i}")));
    head.push("p_total".to_string());
    head.push("sigma_sd".to_string());
    let head_refs: Vec<&str> = head.iter().map(|s| s.as_str()).collect();
    csv(
        &head_refs,
        obs.times.iter().enumerate().map(|(ti, &t)| {
            let mut row = vec![fmt_f64(t * 1e3)];
            row.extend(obs.p_site[ti].iter().map(|&p| fmt_f64(p)));
            row.push(fmt_f64(obs.p_total[ti]));
            row.push(fmt_f64(obs.sigma_sd[ti]));
            row
        }),
    )
}

#[derive(Serialize)]
struct ThermalRunMeta {
    t_uk: f64,
    nbar_com: f64,
    ensemble_size: usize,
    captured_mass: f64,
    sampled: bool,
    file: String,
}

pub fn cmd_evolve(ctx: &Context) -> Result<(), CmdError> {
    let start = Instant::now();
    let chain = build_chain(&ctx.config)?;
    let settings = build_settings(&ctx.config, &chain.axial)?;
    let j = build_j(&ctx.config, &chain)?;
    let basis = pair_sector(&ctx.config)?;
    let grid = TimeGrid::uniform(
        ctx.config.dynamics.t_max_ms * 1e-3,
        ctx.config.dynamics.n_points,
    )?;
    let site = ctx.config.initial_site();
    let opts = thermal_options(ctx);
    let mut out = OutputDir::create(&ctx.out_dir)?;
    let mut meta = Vec::new();

    for &t_uk in &ctx.config.dynamics.temperatures_uk {
        let obs = thermal_dynamics(
            &chain.eq,
            &settings,
            &j,
            &basis,
            t_uk * 1e-6,
            &grid,
            site,
            &opts,
        )?;
        let file = format!("evolve_T{}uK.csv", temperature_label(t_uk));
        if ctx.config.wants_csv() {
            out.write_text(&file, &trajectory_csv(&obs))?;
        }
        meta.push(ThermalRunMeta {
            t_uk,
            nbar_com: mean_occupation(chain.trap.axial_frequency, t_uk * 1e-6),
            ensemble_size: obs.ensemble_size,
            captured_mass: obs.captured_mass,
            sampled: obs.sampled,
            file,
        });
    }
    // tweezer-off reference at zero temperature
    let off = thermal_dynamics(
        &chain.eq,
        &TweezerSettings::zeroed(chain.trap.ion_count),
        &j,
        &basis,
        0.0,
        &grid,
        site,
        &opts,
    )?;
    if ctx.config.wants_csv() {
        out.write_text("evolve_notweezers.csv", &trajectory_csv(&off))?;
    }
    if ctx.config.wants_json() {
        #[derive(Serialize)]
        struct EvolveMeta {
            initial_pair_site: usize,
            runs: Vec<ThermalRunMeta>,
        }
        out.write_json(
            "evolve_meta.json",
            &EvolveMeta {
                initial_pair_site: ctx.config.dynamics.initial_pair_site,
                runs: meta,
            },
        )?;
    }
    out.write_manifest(
        "evolve",
        &ctx.config,
        ctx.seed,
        ctx.threads,
        start.elapsed().as_millis(),
    )
}

/// Fixed observation times for the temperature sweep, seconds.
const SWEEP_TIMES: [f64; 3] = [0.010, 0.030, 0.050];

pub fn cmd_sweep(ctx: &Context) -> Result<(), CmdError> {
    let start = Instant::now();
    let chain = build_chain(&ctx.config)?;
    let settings = build_settings(&ctx.config, &chain.axial)?;
    let j = build_j(&ctx.config, &chain)?;
    let basis = pair_sector(&ctx.config)?;
    let grid = TimeGrid::explicit(SWEEP_TIMES.to_vec())?;
    let site = ctx.config.initial_site();
    let opts = thermal_options(ctx);
    let wz = chain.trap.axial_frequency;

    let mut rows = Vec::new();
    let mut meta = Vec::new();
    for &t_uk in &ctx.config.thermal.t_uk {
        let t = t_uk * 1e-6;
        let obs = thermal_dynamics(&chain.eq, &settings, &j, &basis, t, &grid, site, &opts)?;
        let closed = if t > 0.0 {
            p_mobile_closed(CODATA_2018.hbar * wz / (CODATA_2018.boltzmann * t)).value
        } else {
            1.0
        };
        rows.push(vec![
            fmt_f64(t_uk),
            fmt_f64(mean_occupation(wz, t)),
            fmt_f64(obs.sigma_sd[0]),
            fmt_f64(obs.sigma_sd[1]),
            fmt_f64(obs.sigma_sd[2]),
            fmt_f64(p_mobile_product(&chain.axial, t)),
            fmt_f64(closed),
        ]);
        meta.push(ThermalRunMeta {
            t_uk,
            nbar_com: mean_occupation(wz, t),
            ensemble_size: obs.ensemble_size,
            captured_mass: obs.captured_mass,
            sampled: obs.sampled,
            file: "sweep.csv".to_string(),
        });
    }

    let mut out = OutputDir::create(&ctx.out_dir)?;
    if ctx.config.wants_csv() {
        out.write_text(
            "sweep.csv",
            &csv(
                &[
                    "T_uK",
                    "nbar_com",
                    "sigma_sd_10ms",
                    "sigma_sd_30ms",
                    "sigma_sd_50ms",
                    "p_mobile_product",
                    "p_mobile_closed",
                ],
                rows,
            ),
        )?;
    }
    if ctx.config.wants_json() {
        #[derive(Serialize)]
        struct SweepMeta {
            seed: u64,
            initial_pair_site: usize,
            runs: Vec<ThermalRunMeta>,
        }
        out.write_json(
            "sweep_meta.json",
            &SweepMeta {
                seed: ctx.seed,
                initial_pair_site: ctx.config.dynamics.initial_pair_site,
                runs: meta,
            },
        )?;
    }
    out.write_manifest(
        "sweep",
        &ctx.config,
        ctx.seed,
        ctx.threads,
        start.elapsed().as_millis(),
    )
}

pub fn cmd_mobility(ctx: &Context) -> Result<(), CmdError> {
    let start = Instant::now();
    let base = ctx.config.trap()?;
    let mut rows = Vec::new();
    for &n in &ctx.config.mobility.ion_counts {
        // axial modes only; long chains need no transverse stability here
        let trap = TrapConfig::new(
            n,
            ctx.config.trap.mass_amu,
            base.axial_frequency,
            base.transverse_frequency_x,
            base.transverse_frequency_y,
        )
        .map_err(|e| CmdError::Numerical(e.to_string()))?;
        let eq = solve_equilibrium(&trap, EQUILIBRIUM_TOL, EQUILIBRIUM_MAX_ITER)?;
        let table = modes(&axial_hessian(&eq)?, Axis::Axial, trap.axial_frequency)?;
        for &t_uk in &ctx.config.thermal.t_uk {
            let t = t_uk * 1e-6;
            let x = if t > 0.0 {
                CODATA_2018.hbar * trap.axial_frequency / (CODATA_2018.boltzmann * t)
            } else {
                f64::INFINITY
            };
            let closed = if t > 0.0 { p_mobile_closed(x).value } else { 1.0 };
            rows.push(vec![
                n.to_string(),
                fmt_f64(t_uk),
                fmt_f64(x),
                fmt_f64(p_mobile_product(&table, t)),
                fmt_f64(closed),
            ]);
        }
    }
    let mut out = OutputDir::create(&ctx.out_dir)?;
    if ctx.config.wants_csv() {
        out.write_text(
            "mobility.csv",
            &csv(
                &["N", "T_uK", "x", "p_mobile_product", "p_mobile_closed"],
                rows,
            ),
        )?;
    }
    if ctx.config.wants_json() {
        #[derive(Serialize)]
        struct MobilityMeta {
            ion_counts: Vec<usize>,
            t_uk: Vec<f64>,
        }
        out.write_json(
            "mobility_meta.json",
            &MobilityMeta {
                ion_counts: ctx.config.mobility.ion_counts.clone(),
                t_uk: ctx.config.thermal.t_uk.clone(),
            },
        )?;
    }
    out.write_manifest(
        "mobility",
        &ctx.config,
        ctx.seed,
        ctx.threads,
        start.elapsed().as_millis(),
    )
}
