//! `gsa selfcheck`: the deterministic invariant suite. Prints one line per
//! check and exits nonzero on any failure.

use gsa_core::basis::family_orthonormality_defect;
use gsa_core::quality::bound_soundness_sweep;
use gsa_core::risk::{kappa_r, min_sample_for_positive_r};
use gsa_core::{tightness_witness, BasisFamily, BasisSpec, TruncationSet, WitnessKind};

use crate::CliError;

struct Checks {
    failures: usize,
}

impl Checks {
    fn report(&mut self, name: &str, pass: bool, detail: String) {
        println!(
            "selfcheck {name}: {} ({detail})",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            self.failures += 1;
        }
    }
}

pub fn run() -> Result<(), CliError> {
    let mut checks = Checks { failures: 0 };

    for family in [
        BasisFamily::Legendre,
        BasisFamily::Chebyshev,
        BasisFamily::Trigonometric,
    ] {
        let defect = family_orthonormality_defect(family, 6);
        checks.report(
            &format!("orthonormality[{}]", family.name()),
            defect < 1e-8,
            format!("max |<psi_a,psi_b> - delta| = {defect:.2e}"),
        );
    }

    for (basis, name) in [
        (BasisSpec::legendre(2), "legendre"),
        (BasisSpec::chebyshev(2), "chebyshev"),
        (BasisSpec::trigonometric(2), "trigonometric"),
    ] {
        let mut worst = 0f64;
        for alpha_max in [1, 2, 3] {
            let trunc = TruncationSet::max_degree(2, alpha_max).expect("small set");
            let closed = basis.k_n(&trunc).expect("closed form");
            let grid = basis.k_n_grid(&trunc).expect("grid search");
            worst = worst.max((closed - grid).abs() / closed);
        }
        checks.report(
            &format!("k_n_closed_form[{name}]"),
            worst < 1e-6,
            format!("max relative gap {worst:.2e}"),
        );
    }

    {
        let w = tightness_witness(WitnessKind::EqualityPair).expect("static witness");
        let ok = (w.epsilon() - 0.5).abs() < 1e-12 && (w.max_index_gap() - 0.5).abs() < 1e-12;
        checks.report(
            "tightness_equality_pair",
            ok,
            format!("eps = {}, gap = {}", w.epsilon(), w.max_index_gap()),
        );
        let w = tightness_witness(WitnessKind::EpsilonScaled(0.5)).expect("static witness");
        let gap = w.max_index_gap();
        let ok = (gap - 0.5 * w.epsilon()).abs() < 1e-10;
        checks.report(
            "tightness_epsilon_scaled",
            ok,
            format!("gap = {gap}, 0.5 eps = {}", 0.5 * w.epsilon()),
        );
    }

    {
        let sweep = bound_soundness_sweep(3, 2, 2000, 20_260_808)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        checks.report(
            "bound_soundness_sweep",
            sweep.violations == 0,
            format!(
                "{} pairs, {} violations, worst margin {:.2e}",
                sweep.pairs, sweep.violations, sweep.worst_margin
            ),
        );
    }

    {
        // Legendre, d = 3, alpha_max = 4: K_N = 125^2.
        let threshold = min_sample_for_positive_r(15_625.0)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        checks.report(
            "stability_r_threshold",
            threshold == 2_102_432,
            format!("smallest n with r > 0 at K_N = 15625 is {threshold}"),
        );
    }

    {
        let k1 = kappa_r(1.0).map_err(|e| CliError::Numerical(e.to_string()))?;
        checks.report(
            "kappa_r",
            (k1 - 0.054_098_831_081_123_3).abs() < 1e-12,
            format!("kappa_1 = {k1:.12}"),
        );
    }

    if checks.failures > 0 {
        Err(CliError::Numerical(format!(
            "{} selfcheck(s) failed",
            checks.failures
        )))
    } else {
        println!("selfcheck: all checks passed");
        Ok(())
    }
}
