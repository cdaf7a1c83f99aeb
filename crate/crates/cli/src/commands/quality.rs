//! `gsa quality`: sample-based index error bounds over a sweep of sample
//! sizes, the proposed holdout method side by side with the bootstrap.

use std::fmt::Write as _;

use gsa_core::quality::DEFAULT_HOLDOUT_FRACTION;
use gsa_core::{
    bootstrap_bound, derive_seed, fit, make_training_sample, quality_control, IndexReport,
};

use crate::config::{load_config, ExperimentConfig, SEED_DERIVATION};
use crate::output::OutputContext;
use crate::{CliError, RunArgs};

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let loaded = load_config(&args.config)?;
    let cfg = &loaded.config;
    let q = cfg
        .quality
        .as_ref()
        .ok_or_else(|| CliError::Config("quality requires a [quality] section".into()))?;
    if q.sample_sizes.is_empty() {
        return Err(CliError::Config("quality needs at least one sample size".into()));
    }
    let n_s = q.bootstrap_resamples.unwrap_or(100);
    if n_s < 2 {
        return Err(CliError::Config("bootstrap needs at least 2 resamples".into()));
    }
    let holdout = q.holdout_fraction.unwrap_or(DEFAULT_HOLDOUT_FRACTION);
    if !(holdout > 0.0 && holdout < 1.0) {
        return Err(CliError::Config("holdout fraction must lie in (0, 1)".into()));
    }
    let master_seed = args.seed.unwrap_or(cfg.seed);

    let function = cfg.build_function()?;
    let basis = cfg.build_basis(&cfg.model.basis, function.dim())?;
    let trunc = cfg.build_truncation(&cfg.model.truncation, function.dim())?;
    let method = ExperimentConfig::parse_method(&q.method)?;
    let sigma = ExperimentConfig::resolve_noise(&q.noise, &function)?;
    let truth: Option<IndexReport> = function.analytic_indices();

    let out = OutputContext::prepare(args.out.as_deref(), &loaded, master_seed)?;
    let mut csv = out.preamble("gsa.quality.v1");
    csv.push_str(
        "subset,kind,estimate,bound,method,n,seed,true_value,realized_error,master_seed,seed_derivation,config_hash\n",
    );

    for (i, &n) in q.sample_sizes.iter().enumerate() {
        let run_seed = derive_seed(master_seed, i as u64);
        let sample = make_training_sample(&function, basis.measure(), n, sigma, run_seed)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        let (train, hold) = sample
            .split_holdout(holdout, derive_seed(run_seed, 1))
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        let model = fit(method, &basis, &trunc, &train);
        let proposed =
            quality_control(&model, &hold).map_err(|e| CliError::Numerical(e.to_string()))?;
        let bootstrap = bootstrap_bound(&train, &basis, &trunc, method, n_s, run_seed)
            .map_err(|e| CliError::Numerical(e.to_string()))?;

        let truth_cols = |u, kind: &str, estimate: f64| -> (String, String) {
            match &truth {
                Some(t) => {
                    let true_value = if kind == "sobol" {
                        t.sobol(u)
                    } else {
                        t.total(u)
                    }
                    .expect("truth covers all subsets");
                    (
                        true_value.to_string(),
                        (estimate - true_value).abs().to_string(),
                    )
                }
                None => (String::new(), String::new()),
            }
        };

        for row in &proposed.rows {
            for (kind, estimate, bound) in [
                ("sobol", row.sobol_estimate, row.sobol_bound),
                ("total", row.total_estimate, row.total_bound),
            ] {
                let (tv, re) = truth_cols(&row.subset, kind, estimate);
                writeln_row(
                    &mut csv,
                    &row.subset.to_string(),
                    kind,
                    estimate,
                    &bound.to_string(),
                    "proposed",
                    n,
                    run_seed,
                    &tv,
                    &re,
                    &out,
                );
            }
        }
        for row in &bootstrap.rows {
            for (kind, estimate, err) in [
                ("sobol", row.sobol_mean, row.sobol_err),
                ("total", row.total_mean, row.total_err),
            ] {
                let bound = if bootstrap.defined {
                    err.to_string()
                } else {
                    "undefined".to_string()
                };
                let (tv, re) = truth_cols(&row.subset, kind, estimate);
                writeln_row(
                    &mut csv,
                    &row.subset.to_string(),
                    kind,
                    estimate,
                    &bound,
                    "bootstrap",
                    n,
                    run_seed,
                    &tv,
                    &re,
                    &out,
                );
            }
        }
    }

    out.write("quality.csv", &csv)?;
    println!(
        "quality: {} sample sizes, N={} -> {}",
        q.sample_sizes.len(),
        trunc.len(),
        out.dir.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn writeln_row(
    csv: &mut String,
    subset: &str,
    kind: &str,
    estimate: f64,
    bound: &str,
    method: &str,
    n: usize,
    seed: u64,
    true_value: &str,
    realized: &str,
    out: &OutputContext,
) {
    writeln!(
        csv,
        "{subset},{kind},{estimate},{bound},{method},{n},{seed},{true_value},{realized},{},{},{}",
        out.master_seed, SEED_DERIVATION, out.hash
    )
    .expect("writing to string cannot fail");
}
