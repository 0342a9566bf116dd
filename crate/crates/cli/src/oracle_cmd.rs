// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

//! The `oracle` command: exact master-equation moments on the run grid.

use trimer_core::oracle::{build_generators, evolve_moments, DensityMatrix};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{self, Manifest};
use crate::run::{create_dir, manifest, write_artifacts, Series};

/// Evolves the vacuum under the Fock-space Lindbladian and writes the same
/// artifacts as `run`, with zero standard errors.
pub fn oracle(cfg: &RunConfig) -> Result<Manifest, CliError> {
    let r = cfg.resolve()?;
    let fock = r.fock_config()?;
    let dim = fock.dimension(r.spec.n_wells())?;
    log::info!("oracle: n_max = {}, dimension {dim}, t_final = {}", fock.n_max, fock.t_final);
    let generators = build_generators(&r.spec, &fock)?;
    let rho0 = DensityMatrix::vacuum(r.spec.n_wells(), fock.n_max);
    let moments = evolve_moments(&rho0, &generators, &fock)?;
    create_dir(r.out_dir())?;
    let series = Series {
        moments,
        ensemble: None,
    };
    let files = write_artifacts(&r, &series, "Correlations from the master equation")?;
    let m = manifest("oracle", &r, None, files);
    output::write_json(&r.out_dir().join("manifest.json"), &m)?;
    Ok(m)
}
