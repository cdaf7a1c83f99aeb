//! `gsa fit`: fit one metamodel, write the serialized model and its index
//! report.

use gsa_core::{derive_seed, fit, indices_from_coeffs, make_training_sample};

use crate::config::{load_config, ExperimentConfig};
use crate::output::OutputContext;
use crate::{CliError, RunArgs};

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let loaded = load_config(&args.config)?;
    let cfg = &loaded.config;
    let fit_cfg = cfg
        .fit
        .as_ref()
        .ok_or_else(|| CliError::Config("fit requires a [fit] section".into()))?;
    let master_seed = args.seed.unwrap_or(cfg.seed);

    let function = cfg.build_function()?;
    let basis = cfg.build_basis(&cfg.model.basis, function.dim())?;
    let trunc = cfg.build_truncation(&cfg.model.truncation, function.dim())?;
    let method = ExperimentConfig::parse_method(&fit_cfg.method)?;
    let sigma = ExperimentConfig::resolve_noise(&fit_cfg.noise, &function)?;
    if fit_cfg.n == 0 {
        return Err(CliError::Config("fit sample size must be positive".into()));
    }

    let out = OutputContext::prepare(args.out.as_deref(), &loaded, master_seed)?;

    let sample = make_training_sample(
        &function,
        basis.measure(),
        fit_cfg.n,
        sigma,
        derive_seed(master_seed, 0),
    )
    .map_err(|e| CliError::Numerical(e.to_string()))?;
    let model = fit(method, &basis, &trunc, &sample);
    let report =
        indices_from_coeffs(&model).map_err(|e| CliError::Numerical(e.to_string()))?;

    out.write("metamodel.txt", &model.serialize())?;
    let mut csv_body = Vec::new();
    report
        .write_csv(&mut csv_body)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let csv = format!(
        "{}{}",
        out.preamble("gsa.fit.v1"),
        String::from_utf8(csv_body).expect("csv is utf-8")
    );
    out.write("indices.csv", &csv)?;

    println!(
        "fit: n={} N={} method={} degenerate={} -> {}",
        fit_cfg.n,
        trunc.len(),
        method,
        model.is_degenerate(),
        out.dir.display()
    );
    Ok(())
}
