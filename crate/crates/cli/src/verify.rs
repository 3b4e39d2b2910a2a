use serde::Serialize;

use elastic_core::verify::{
    check_dissipation_and_length, check_e_evolution, check_frenet_closure, check_key_identity,
    check_quadratic_expansion, check_ks_evolution, check_support_length_identity, inequality_probe, ExpansionProbe,
    IdentityReport, Inequality, InequalityReport,
};
use elastic_core::{compute_geometry, Scenario};

use crate::failure::Failure;
use crate::{print_json, Suite, VerifyArgs};

/// Largest relative mismatch between the assembled remainder and `de/dt + Q`.
pub const LEDGER_TOLERANCE: f64 = 0.01;

#[derive(Serialize)]
struct Report<T: Serialize> {
    suite: &'static str,
    curve: String,
    n: usize,
    passed: bool,
    results: T,
}

fn scenario(args: &VerifyArgs) -> Result<Scenario, Failure> {
    let mut scenario: Scenario = args.curve.parse()?;
    if let Some(seed) = args.seed {
        match (&mut scenario, args.suite) {
            (Scenario::Random { seed: s, .. }, _) => *s = seed,
            (_, Suite::Inequalities) => {}
            _ => {
                return Err(Failure::Usage(
                    "--seed applies to `random` curves and to the inequalities suite".into(),
                ))
            }
        }
    }
    Ok(scenario)
}

fn identities(args: &VerifyArgs, scenario: &Scenario) -> Result<(bool, Vec<IdentityReport>), Failure> {
    let curve = scenario.build(args.n)?;
    let label = args.curve.as_str();
    let mut reports = vec![
        check_key_identity(&curve, label)?,
        check_support_length_identity(&curve, label)?,
        check_frenet_closure(&curve, label)?,
    ];
    if args.with_flow {
        reports.extend(check_dissipation_and_length(&curve, label)?);
        if compute_geometry(&curve)?.turning_number >= 1 {
            reports.push(check_e_evolution(&curve, label)?);
            reports.push(check_ks_evolution(&curve, label)?);
        }
    }
    Ok((reports.iter().all(|r| r.passed), reports))
}

#[derive(Serialize)]
struct ExpansionResult {
    probe: ExpansionProbe,
    ledger_tolerance: f64,
}

fn expansion(args: &VerifyArgs, scenario: &Scenario) -> Result<(bool, ExpansionResult), Failure> {
    let (omega, modes) = match scenario {
        Scenario::Perturbed { omega, m, .. } => (*omega, vec![*m]),
        Scenario::Support { omega, harmonics, center } if *center == [0.0, 0.0] => {
            (*omega, harmonics.iter().map(|h| h.m).collect())
        }
        _ => {
            return Err(Failure::Usage(format!(
                "expansion suite needs a centred `perturbed:` or `support:` curve, got `{}`",
                args.curve
            )))
        }
    };
    let probe = check_quadratic_expansion(omega as i64, &modes, &args.ladder, args.n)?;
    let passed = probe
        .points
        .iter()
        .all(|p| p.ledger_relative <= LEDGER_TOLERANCE && p.r9_nonpositive && p.quartic_sign_ok);
    Ok((passed, ExpansionResult { probe, ledger_tolerance: LEDGER_TOLERANCE }))
}

fn inequalities(args: &VerifyArgs, scenario: &Scenario) -> Result<(bool, Vec<InequalityReport>), Failure> {
    let omega = scenario.omega() as i64;
    let first = args.seed.unwrap_or(0);
    let seeds = first..first.checked_add(args.count).ok_or_else(|| Failure::Usage("seed range overflows".into()))?;
    let reports = Inequality::ALL
        .iter()
        .map(|&which| inequality_probe(which, omega, seeds.clone(), args.n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((reports.iter().all(|r| r.passed), reports))
}

pub fn run(args: &VerifyArgs) -> Result<(), Failure> {
    let scenario = scenario(args)?;
    let passed = match args.suite {
        Suite::Identities => emit(args, "identities", identities(args, &scenario)?)?,
        Suite::Expansion => emit(args, "expansion", expansion(args, &scenario)?)?,
        Suite::Inequalities => emit(args, "inequalities", inequalities(args, &scenario)?)?,
    };
    if passed {
        Ok(())
    } else {
        Err(Failure::Check(format!("{:?} suite failed on {}", args.suite, args.curve).to_lowercase()))
    }
}

fn emit<T: Serialize>(args: &VerifyArgs, suite: &'static str, (passed, results): (bool, T)) -> Result<bool, Failure> {
    print_json(&Report {
        suite,
        curve: args.curve.clone(),
        n: args.n,
        passed,
        results,
    })?;
    Ok(passed)
}
