//! Batch driver for `bergman-core`: every subcommand resolves a
//! [`RunConfig`], calls the corresponding core routine and renders a CSV
//! table plus a JSON report that embeds the resolved configuration.

mod config;

use std::fmt::Write as _;

use bergman_core::density::{density_sweep, pseudo_grid, AverageOptions};
use bergman_core::geometry::{green_constant, selftest, volume_prefactor};
use bergman_core::hypersurface::{flatness_profile, sample_w, PatchOptions};
use bergman_core::potential::{s_r_green, s_r_potential};
use bergman_core::spaces::{
    build_space, holomorphic_flattening, restriction, restriction_inequality_check,
    sampling_constants, seip_sweep, FlatteningOptions, SeipOptions, SpaceQuadrature, TubeOptions,
};
use bergman_core::C64;
use serde_json::{json, Value};

pub use config::{Command, GridSpec, RunConfig, WeightKind, WeightSpec};

/// Exit status for invalid input.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status for a failed or unconverged computation.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Validation(String),
    Numerical {
        module: &'static str,
        message: String,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => EXIT_VALIDATION,
            RunError::Numerical { .. } => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Validation(m) => write!(f, "invalid configuration: {m}"),
            RunError::Numerical { module, message } => write!(f, "{module}: {message}"),
        }
    }
}

fn numerical(module: &'static str) -> impl Fn(bergman_core::Error) -> RunError {
    move |e| RunError::Numerical {
        module,
        message: e.to_string(),
    }
}

/// Output of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub csv: String,
    pub json: Value,
    /// A selftest check or an acceptance bound failed.
    pub failed: bool,
}

impl Report {
    /// Write `<command>.csv` and `<command>.json` into `dir`.
    pub fn write_to(&self, dir: &std::path::Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.csv", self.command.name())), &self.csv)?;
        let text = serde_json::to_string_pretty(&self.json).expect("report serializes");
        std::fs::write(
            dir.join(format!("{}.json", self.command.name())),
            text + "\n",
        )
    }
}

fn conventions(n: usize) -> Value {
    json!({
        "ddc": "i∂∂̄",
        "euclidean_volume": "ω_E^n = 2^n n! Lebesgue",
        "volume_prefactor": volume_prefactor(n),
        "green_constant": green_constant(n),
        "density_threshold": 1.0,
    })
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

fn coord_header(out: &mut String, n: usize) {
    for i in 1..=n {
        let _ = write!(out, "z{i}_re,z{i}_im,");
    }
}

fn coords(out: &mut String, z: &[C64]) {
    for c in z {
        let _ = write!(out, "{},{},", fmt(c.re), fmt(c.im));
    }
}

/// Validate `config` and run its command.
pub fn run(config: &RunConfig) -> Result<Report, RunError> {
    config.validate().map_err(RunError::Validation)?;
    let command = config.command.expect("validated");
    let (csv, summary, failed) = match command {
        Command::Selftest => run_selftest(config)?,
        Command::DensityMap => run_density_map(config)?,
        Command::PotentialCheck => run_potential_check(config)?,
        Command::Flatness => run_flatness(config)?,
        Command::SeipSweep => run_seip(config)?,
        Command::RestrictionCheck => run_restriction(config)?,
    };
    let json = json!({
        "command": command.name(),
        "config": config,
        "conventions": conventions(config.dimension),
        "summary": summary,
    });
    Ok(Report {
        command,
        csv,
        json,
        failed,
    })
}

type Output = (String, Value, bool);

fn run_selftest(config: &RunConfig) -> Result<Output, RunError> {
    let checks = selftest(config.seed).map_err(numerical("geometry"))?;
    let mut csv = String::from("name,error,tolerance,passed\n");
    for c in &checks {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            c.name,
            fmt(c.error),
            fmt(c.tolerance),
            c.passed
        );
    }
    let failed = checks.iter().any(|c| !c.passed);
    Ok((
        csv,
        json!({ "checks": checks, "all_passed": !failed }),
        failed,
    ))
}

fn run_density_map(config: &RunConfig) -> Result<Output, RunError> {
    let t = config.polynomial().map_err(RunError::Validation)?;
    let weight = config.weight().map_err(RunError::Validation)?;
    let grid = pseudo_grid(
        config.dimension,
        config.grid.max_pseudoradius,
        config.grid.rings,
    )
    .map_err(numerical("density"))?;
    let opts = AverageOptions {
        seed: config.seed,
        ..AverageOptions::default()
    };
    let report = density_sweep(&t, &weight, &grid, &config.r_ladder, &opts, 0)
        .map_err(numerical("density"))?;
    let summary = json!({
        "extrapolated_plus": report.extrapolated_plus,
        "extrapolated_minus": report.extrapolated_minus,
        "sup_curve": report.sup_curve,
        "inf_curve": report.inf_curve,
        "excluded": report.excluded,
        "indefinite_cells": report.indefinite_cells,
    });
    Ok((report.to_csv(), summary, false))
}

fn run_potential_check(config: &RunConfig) -> Result<Output, RunError> {
    let t = config.polynomial().map_err(RunError::Validation)?;
    let grid = pseudo_grid(
        config.dimension,
        config.grid.max_pseudoradius,
        config.grid.rings,
    )
    .map_err(numerical("potential"))?;
    let avg = AverageOptions {
        seed: config.seed,
        ..AverageOptions::default()
    };
    let patch = PatchOptions::default();
    let mut csv = String::new();
    coord_header(&mut csv, config.dimension);
    csv.push_str("r,potential_form,green_form,abs_diff\n");
    let mut max_diff = 0.0f64;
    let mut skipped = 0usize;
    for z in &grid {
        for &r in &config.r_ladder {
            let a = s_r_potential(&t, z, r, &avg)
                .map_err(numerical("potential"))?
                .s_r_value;
            let b = s_r_green(&t, z, r, &patch)
                .map_err(numerical("potential"))?
                .s_r_value;
            coords(&mut csv, z.coords());
            if a.is_finite() && b.is_finite() {
                let d = (a - b).abs();
                max_diff = max_diff.max(d);
                let _ = writeln!(csv, "{r},{},{},{}", fmt(a), fmt(b), fmt(d));
            } else {
                skipped += 1;
                let _ = writeln!(csv, "{r},{a},{b},");
            }
        }
    }
    Ok((
        csv,
        json!({ "max_abs_diff": max_diff, "points_on_w": skipped }),
        false,
    ))
}

fn run_flatness(config: &RunConfig) -> Result<Output, RunError> {
    let t = config.polynomial().map_err(RunError::Validation)?;
    let weight = config.weight().map_err(RunError::Validation)?;
    let n = config.dimension;
    let mut csv = String::new();
    coord_header(&mut csv, n);
    csv.push_str("eps0,c_estimate,probes\n");
    if n == 2 {
        let sample = sample_w(&t, 0.8, 64, config.seed).map_err(numerical("hypersurface"))?;
        let step = (sample.len() / 8).max(1);
        for p in sample.points.iter().step_by(step) {
            for &eps in &config.eps {
                let rep = flatness_profile(&t, p, eps).map_err(numerical("hypersurface"))?;
                coords(&mut csv, p.coords());
                let _ = writeln!(csv, "{eps},{},{}", fmt(rep.c_estimate), rep.probes);
            }
        }
    }
    // κ along the first coordinate disk
    let phi = |x: C64| {
        let mut z = vec![C64::new(0.0, 0.0); n];
        z[0] = x;
        weight.value(&z).unwrap_or(f64::INFINITY)
    };
    let flat =
        holomorphic_flattening(phi, &FlatteningOptions::default()).map_err(numerical("spaces"))?;
    let summary = json!({
        "slice_flattening": {
            "k_bound": flat.k_bound,
            "comparison_constant": flat.comparison_constant,
            "laplacian_mass": flat.laplacian_mass,
            "completion_residual": flat.completion_residual,
            "grid_points": flat.grid_points,
        }
    });
    Ok((csv, summary, false))
}

fn run_seip(config: &RunConfig) -> Result<Output, RunError> {
    let opts = SeipOptions {
        beta: config.weight.beta,
        degree: config.degree,
        separations: config.separations.clone(),
        seed: config.seed,
        ..SeipOptions::default()
    };
    let rows = seip_sweep(&opts).map_err(numerical("spaces"))?;
    let mut csv =
        String::from("separation,density_estimate,lambda_min,lambda_max,extension_norm_ratio\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.separation,
            fmt(r.density_estimate),
            fmt(r.lambda_min),
            fmt(r.lambda_max),
            fmt(r.extension_norm_ratio)
        );
    }
    Ok((csv, json!({ "lattice": opts, "rows": rows }), false))
}

fn run_restriction(config: &RunConfig) -> Result<Output, RunError> {
    let t = config.polynomial().map_err(RunError::Validation)?;
    let weight = config.weight().map_err(RunError::Validation)?;
    let space = build_space(
        config.dimension,
        config.degree,
        &weight,
        &SpaceQuadrature::default(),
    )
    .map_err(numerical("spaces"))?;
    let opts = TubeOptions {
        seed: config.seed,
        ..TubeOptions::default()
    };
    let sample =
        sample_w(&t, opts.region_radius, 200, config.seed).map_err(numerical("hypersurface"))?;
    let mut csv = String::from("eps,c_measured,c_spectral,tube_nodes,w_nodes\n");
    for &eps in &config.eps {
        let r =
            restriction_inequality_check(&space, &t, eps, &opts).map_err(numerical("spaces"))?;
        let _ = writeln!(
            csv,
            "{eps},{},{},{},{}",
            fmt(r.c_measured),
            fmt(r.c_spectral),
            r.tube_nodes,
            r.w_nodes
        );
    }
    let (lambda_min, lambda_max) = if sample.is_empty() {
        (0.0, 0.0)
    } else {
        let rd = restriction(&space, &t, &sample).map_err(numerical("spaces"))?;
        sampling_constants(&rd).map_err(numerical("spaces"))?
    };
    let summary = json!({
        "space_dimension": space.size(),
        "w_nodes": sample.len(),
        "lambda_min": lambda_min,
        "lambda_max": lambda_max,
    });
    Ok((csv, summary, false))
}
