//! `gsa risk-sweep`: empirical index risks against the theoretical bounds
//! over a (method, basis, truncation, noise, sample size) grid.
//!
//! Cells checkpoint to `<out>/.checkpoints/<hash>-<seed>/` as they finish, so
//! interrupted sweeps resume without recomputation; the CSV is rebuilt from
//! all cells at the end and is byte-identical across reruns.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use gsa_core::risk::{
    empirical_risk, estimate_best_error, r_from_sample, reference_indices, risk_bound_ols,
    risk_bound_projection, RiskBoundInputs,
};
use gsa_core::{derive_seed, BasisSpec, FitMethod, TestFunction, TruncationScheme, TruncationSet};

use crate::config::{load_config, ExperimentConfig, NoiseConfig, SEED_DERIVATION};
use crate::output::OutputContext;
use crate::{CliError, RunArgs};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct CellRow {
    method: String,
    basis: String,
    n_regressors: usize,
    k_n: f64,
    n: usize,
    sigma: f64,
    r: f64,
    e_n_sq: f64,
    comp_best_err_over_v: f64,
    comp_proj_sampling: f64,
    comp_noise_sampling: f64,
    comp_n_pow_neg_r: f64,
    bound_mse: f64,
    bound_applicable: bool,
    empirical_mse_max: f64,
    empirical_mse_se: f64,
    empirical_mae_max: f64,
    n_degenerate: usize,
    n_runs: usize,
    seed: u64,
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let loaded = load_config(&args.config)?;
    let cfg = &loaded.config;
    let risk = cfg
        .risk
        .as_ref()
        .ok_or_else(|| CliError::Config("risk-sweep requires a [risk] section".into()))?;
    if risk.methods.is_empty() || risk.sample_sizes.is_empty() {
        return Err(CliError::Config(
            "risk-sweep needs at least one method and one sample size".into(),
        ));
    }
    if risk.n_runs < 2 {
        return Err(CliError::Config("risk-sweep needs n_runs >= 2".into()));
    }
    let master_seed = args.seed.unwrap_or(cfg.seed);
    let function = cfg.build_function()?;
    let dim = function.dim();

    let methods: Vec<FitMethod> = risk
        .methods
        .iter()
        .map(|m| ExperimentConfig::parse_method(m))
        .collect::<Result<_, _>>()?;
    let bases: Vec<String> = risk
        .bases
        .clone()
        .unwrap_or_else(|| vec![cfg.model.basis.clone()]);
    let noises: Vec<NoiseConfig> = risk.noise_levels.clone().unwrap_or_else(|| {
        vec![NoiseConfig {
            kind: "absolute".into(),
            value: 0.0,
        }]
    });
    let best_error_n = risk.best_error_sample.unwrap_or(1_000_000);

    let reference =
        reference_indices(&function).map_err(|e| CliError::Numerical(e.to_string()))?;
    let variance = reference.variance();
    if variance <= 0.0 {
        return Err(CliError::Numerical("reference variance is zero".into()));
    }
    let sup = function.sup_abs();

    let out = OutputContext::prepare(args.out.as_deref(), &loaded, master_seed)?;
    let ckpt_dir = out
        .dir
        .join(".checkpoints")
        .join(format!("{}-{}", out.hash, master_seed));
    fs::create_dir_all(&ckpt_dir)
        .map_err(|e| CliError::Config(format!("cannot create checkpoints: {e}")))?;

    let mut rows: Vec<CellRow> = Vec::new();
    for family in &bases {
        let basis = cfg.build_basis(family, dim)?;
        let truncations: Vec<TruncationSet> = match &risk.alpha_max_values {
            Some(values) => values
                .iter()
                .map(|&a| {
                    TruncationSet::max_degree(dim, a).map_err(|e| CliError::Config(e.to_string()))
                })
                .collect::<Result<_, _>>()?,
            None => vec![cfg.build_truncation(&cfg.model.truncation, dim)?],
        };
        for trunc in &truncations {
            let trunc_key = trunc_key(trunc);
            let k_n = basis
                .k_n(trunc)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let e_n_sq = checkpointed(
                &ckpt_dir,
                &format!("best-error-{family}-{trunc_key}.json"),
                || {
                    estimate_best_error(
                        &function,
                        &basis,
                        trunc,
                        best_error_n,
                        derive_seed(master_seed, 0xBE57),
                    )
                    .map_err(|e| CliError::Numerical(e.to_string()))
                },
            )?;
            for method in &methods {
                for (noise_idx, noise) in noises.iter().enumerate() {
                    let sigma =
                        ExperimentConfig::resolve_noise(&Some(noise.clone()), &function)?;
                    for &n in &risk.sample_sizes {
                        let cell_name = format!(
                            "cell-{family}-{trunc_key}-{}-s{noise_idx}-n{n}.json",
                            method.name()
                        );
                        let row = checkpointed(&ckpt_dir, &cell_name, || {
                            compute_cell(
                                &function,
                                &basis,
                                trunc,
                                *method,
                                family,
                                n,
                                sigma,
                                risk.n_runs,
                                master_seed,
                                &reference,
                                variance,
                                sup,
                                k_n,
                                e_n_sq,
                            )
                        })?;
                        rows.push(row);
                    }
                }
            }
        }
    }

    let mut csv = out.preamble("gsa.risk-sweep.v1");
    csv.push_str("method,basis,N,K_N,n,sigma,r,e_N_sq,comp_best_err_over_v,comp_proj_sampling,comp_noise_sampling,comp_n_pow_neg_r,bound_mse,bound_applicable,empirical_mse_max,empirical_mse_se,empirical_mae_max,n_degenerate,n_runs,seed,master_seed,seed_derivation,config_hash\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.basis,
            r.n_regressors,
            r.k_n,
            r.n,
            r.sigma,
            r.r,
            r.e_n_sq,
            r.comp_best_err_over_v,
            r.comp_proj_sampling,
            r.comp_noise_sampling,
            r.comp_n_pow_neg_r,
            r.bound_mse,
            r.bound_applicable,
            r.empirical_mse_max,
            r.empirical_mse_se,
            r.empirical_mae_max,
            r.n_degenerate,
            r.n_runs,
            r.seed,
            out.master_seed,
            SEED_DERIVATION,
            out.hash
        )
        .expect("writing to string cannot fail");
    }
    out.write("risk.csv", &csv)?;
    println!("risk-sweep: {} cells -> {}", rows.len(), out.dir.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn compute_cell(
    function: &TestFunction,
    basis: &BasisSpec,
    trunc: &TruncationSet,
    method: FitMethod,
    family: &str,
    n: usize,
    sigma: f64,
    n_runs: usize,
    master_seed: u64,
    reference: &gsa_core::IndexReport,
    variance: f64,
    sup: f64,
    k_n: f64,
    e_n_sq: f64,
) -> Result<CellRow, CliError> {
    let cell_seed = derive_seed(
        master_seed,
        fnv_mix(&format!("{family}-{}-{}-{sigma}-{n}", trunc_key(trunc), method.name())),
    );
    let risk_est = empirical_risk(
        function, basis, trunc, method, n, sigma, n_runs, cell_seed, reference,
    )
    .map_err(|e| CliError::Numerical(e.to_string()))?;
    let r = r_from_sample(k_n, n).map_err(|e| CliError::Numerical(e.to_string()))?;
    let inputs = RiskBoundInputs {
        best_error_sq: e_n_sq,
        variance,
        sup_bound: sup,
        noise_var: sigma * sigma,
        n_regressors: trunc.len(),
        n_sample: n,
        r,
        k_n,
    };
    let bound = match method {
        FitMethod::Projection => risk_bound_projection(&inputs),
        FitMethod::Ols => risk_bound_ols(&inputs),
    }
    .map_err(|e| CliError::Numerical(e.to_string()))?;
    let nf = n as f64;
    Ok(CellRow {
        method: method.name().to_string(),
        basis: family.to_string(),
        n_regressors: trunc.len(),
        k_n,
        n,
        sigma,
        r,
        e_n_sq,
        comp_best_err_over_v: e_n_sq / variance,
        comp_proj_sampling: (sup * sup + sigma * sigma) / variance * trunc.len() as f64 / nf,
        comp_noise_sampling: sigma * sigma / variance * trunc.len() as f64 / nf,
        comp_n_pow_neg_r: if r > 0.0 { nf.powf(-r) } else { 1.0 },
        bound_mse: bound.mse_bound(),
        bound_applicable: bound.is_applicable(),
        empirical_mse_max: risk_est.max_mse,
        empirical_mse_se: risk_est.max_mse_se,
        empirical_mae_max: risk_est.max_mae,
        n_degenerate: risk_est.n_degenerate,
        n_runs,
        seed: cell_seed,
    })
}

fn trunc_key(trunc: &TruncationSet) -> String {
    match trunc.scheme() {
        TruncationScheme::MaxDegree { alpha_max } => format!("maxdeg{alpha_max}"),
        TruncationScheme::Hyperbolic { q, t } => format!("hyp{q}x{t}"),
        TruncationScheme::Explicit => format!("explicit{}", trunc.len()),
    }
}

fn fnv_mix(key: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in key.as_bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Load a checkpointed value or compute and persist it.
fn checkpointed<T, F>(dir: &Path, name: &str, compute: F) -> Result<T, CliError>
where
    T: Serialize + for<'de> Deserialize<'de>,
    F: FnOnce() -> Result<T, CliError>,
{
    let path = dir.join(name);
    if let Ok(bytes) = fs::read(&path) {
        if let Ok(value) = serde_json::from_slice(&bytes) {
            return Ok(value);
        }
    }
    let value = compute()?;
    let bytes = serde_json::to_vec(&value)
        .map_err(|e| CliError::Numerical(format!("cannot serialize checkpoint: {e}")))?;
    fs::write(&path, bytes)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(value)
}
