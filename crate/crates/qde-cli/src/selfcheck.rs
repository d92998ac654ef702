//! Built-in consistency checks at small dimension: unitarity of the shipped
//! maps, partition resolution, agreement of the two entropy evaluation
//! paths, the gap-bound sandwich, and classical/deterministic sanity.
//!
//! The printed report is a pure function of the seed, so identical
//! invocations produce identical bytes.

use crate::CliError;
use qde_core::{
    alf_partial_entropy, baker_unitary, classical_baker_inverse, classical_baker_step,
    classical_symbol_entropy, decoherence_entropy, dft_matrix, entropy_gap_bounds, haar_unitary,
    hermitian_spectrum, hs_norm, measured_refinement, momentum_partition, omega_state,
    random_pure_state, read_partition, rotate_partition, state_correlation, tracial_correlation,
    CMat, PartitionOfUnity, PathBudget, PhasePoint, Seed, TorusQuantization,
};
use std::fmt::Write as _;
use std::path::Path;

const UNITARY_TOL: f64 = 1e-10;
const SPECTRUM_TOL: f64 = 1e-8;
const PATH_TOL: f64 = 1e-9;

type Check = (String, Result<String, String>);

fn unitarity_check(name: &str, m: &CMat) -> Check {
    let dev = m.unitarity_deviation();
    let detail = format!("deviation {dev:.3e} vs {UNITARY_TOL:.0e}");
    (
        format!("unitarity: {name}"),
        if dev <= UNITARY_TOL { Ok(detail) } else { Err(detail) },
    )
}

fn resolution_check(name: &str, p: &PartitionOfUnity) -> Check {
    let d = p.dim();
    let mut sum = CMat::zeros(d, d);
    for j in 0..p.len() {
        sum = sum.add(&p.op(j).dagger().mul(p.op(j)));
    }
    let dev = hs_norm(&sum.sub(&CMat::identity(d)));
    let detail = format!("resolution deviation {dev:.3e} vs {UNITARY_TOL:.0e}");
    (
        format!("partition: {name}"),
        if dev <= UNITARY_TOL { Ok(detail) } else { Err(detail) },
    )
}

/// Nonzero spectra of the doubled-space state and the word Gram must agree.
fn cross_path_check(d: usize, t: usize) -> Check {
    let name = format!("cross-path spectra: baker d={d} k=2 t={t}");
    let body = || -> Result<String, CliError> {
        let u = baker_unitary(&TorusQuantization::new(d))?;
        let p = momentum_partition(d, 2)?;
        let rho = omega_state(&p, &u, t, d)?;
        let sigma = tracial_correlation(&p, &u, t, 1 << 12)?;
        let a = hermitian_spectrum(rho.mat())?;
        let b = hermitian_spectrum(sigma.mat())?;
        let significant = |s: &[f64]| s.iter().copied().take_while(|&x| x > 1e-10).collect::<Vec<_>>();
        let (a, b) = (significant(a.values()), significant(b.values()));
        if a.len() != b.len() {
            return Err(CliError::Numerical(format!(
                "nonzero spectrum sizes differ: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        let dev = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        if dev <= SPECTRUM_TOL {
            Ok(format!("max eigenvalue deviation {dev:.3e} vs {SPECTRUM_TOL:.0e}"))
        } else {
            Err(CliError::Numerical(format!(
                "max eigenvalue deviation {dev:.3e} > {SPECTRUM_TOL:.0e}"
            )))
        }
    };
    (name, body().map_err(|e| e.to_string()))
}

/// The iterated-channel entropy and the state-Gram entropy are two routes to
/// the same number.
fn channel_vs_gram_check(d: usize, t: usize, seed: Seed) -> Check {
    let name = format!("channel vs state-gram: baker d={d} k=2 t={t}");
    let body = || -> Result<String, CliError> {
        let u = baker_unitary(&TorusQuantization::new(d))?;
        let p = momentum_partition(d, 2)?;
        let alpha = random_pure_state(d, seed);
        let channel = decoherence_entropy(&p, &u, t, &alpha)?
            .value_at(t)
            .expect("t is in range");
        let gram = state_correlation(&p, &u, t, &alpha, 1 << 12)?.entropy()?;
        let dev = (channel - gram).abs();
        if dev <= PATH_TOL {
            Ok(format!("entropy deviation {dev:.3e} vs {PATH_TOL:.0e}"))
        } else {
            Err(CliError::Numerical(format!(
                "entropy deviation {dev:.3e} > {PATH_TOL:.0e}"
            )))
        }
    };
    (name, body().map_err(|e| e.to_string()))
}

fn sandwich_check(name: &str, y: &PartitionOfUnity, seed: Seed) -> Check {
    let body = || -> Result<String, CliError> {
        let report = entropy_gap_bounds(y, 32, seed)?;
        let detail = format!(
            "A = {:.4}, gap = {:.4}, B = {:.4}",
            report.upper_a, report.gap, report.lower_b
        );
        if report.sandwich_holds() {
            Ok(detail)
        } else {
            Err(CliError::Numerical(format!("sandwich violated: {detail}")))
        }
    };
    (format!("gap bounds sandwich: {name}"), body().map_err(|e| e.to_string()))
}

fn classical_round_trip_check() -> Check {
    let mut dev = 0.0f64;
    for i in 0..100 {
        let pt = PhasePoint::new(0.01 + 0.0097 * i as f64, 0.02 + 0.0091 * i as f64);
        let back = classical_baker_inverse(classical_baker_step(pt));
        dev = dev.max((back.q - pt.q).abs()).max((back.p - pt.p).abs());
    }
    let detail = format!("max round-trip deviation {dev:.3e} vs 1e-12");
    (
        "classical baker round trip".into(),
        if dev <= 1e-12 { Ok(detail) } else { Err(detail) },
    )
}

fn classical_entropy_check(seed: Seed) -> Check {
    let trace = classical_symbol_entropy(2, 1, 4096, seed, 1);
    let h = trace.value_at(1).expect("t = 1 present");
    let dev = (h - std::f64::consts::LN_2).abs();
    let detail = format!("one-step symbol entropy {h:.4} vs ln 2 within 0.05");
    (
        "classical symbol entropy".into(),
        if dev <= 0.05 { Ok(detail) } else { Err(detail) },
    )
}

fn determinism_check(seed: Seed) -> Check {
    let body = || -> Result<String, CliError> {
        let u = haar_unitary(8, seed);
        let p = momentum_partition(8, 2)?;
        let budget = PathBudget::default();
        let mut first = Vec::new();
        alf_partial_entropy(&p, &u, 3, &budget)?.write_csv(&mut first)?;
        let mut second = Vec::new();
        alf_partial_entropy(&p, &u, 3, &budget)?.write_csv(&mut second)?;
        if first == second {
            Ok(format!("{} CSV bytes identical across reruns", first.len()))
        } else {
            Err(CliError::Numerical("rerun produced different CSV bytes".into()))
        }
    };
    ("deterministic rerun: haar d=8".into(), body().map_err(|e| e.to_string()))
}

fn custom_map_check(path: &Path) -> Check {
    let body = || -> Result<String, CliError> {
        let file = std::fs::File::open(path).map_err(|e| {
            CliError::Config(format!("cannot open map_file {}: {e}", path.display()))
        })?;
        let container = read_partition(std::io::BufReader::new(file))?;
        if container.len() != 1 {
            return Err(CliError::Config(format!(
                "map container holds {} operators, expected 1",
                container.len()
            )));
        }
        let dev = container.op(0).unitarity_deviation();
        if dev <= UNITARY_TOL {
            Ok(format!("deviation {dev:.3e} vs {UNITARY_TOL:.0e}"))
        } else {
            Err(CliError::Numerical(format!(
                "deviation {dev:.3e} > {UNITARY_TOL:.0e}"
            )))
        }
    };
    (
        format!("unitarity: custom map {}", path.display()),
        body().map_err(|e| e.to_string()),
    )
}

/// Run every check; returns the printable report and whether all passed.
pub fn selfcheck(seed: u64, map_file: Option<&Path>) -> (String, bool) {
    let seed = Seed::new(seed);
    let mut checks: Vec<Check> = Vec::new();

    match baker_unitary(&TorusQuantization::new(8)) {
        Ok(b) => {
            checks.push(unitarity_check("baker d=8", &b));
            checks.push(unitarity_check("baker^2 d=8", &b.mul(&b)));
        }
        Err(e) => checks.push(("unitarity: baker d=8".into(), Err(e.to_string()))),
    }
    checks.push(unitarity_check("dft d=8", &dft_matrix(8)));
    checks.push(unitarity_check("haar d=8", &haar_unitary(8, seed.child(1))));

    match momentum_partition(8, 2) {
        Ok(p) => checks.push(resolution_check("momentum(8,2)", &p)),
        Err(e) => checks.push(("partition: momentum(8,2)".into(), Err(e.to_string()))),
    }
    match momentum_partition(8, 4)
        .map_err(CliError::from)
        .and_then(|p| Ok(rotate_partition(&p, &haar_unitary(8, seed.child(2)))?))
    {
        Ok(p) => checks.push(resolution_check("rotated momentum(8,4)", &p)),
        Err(e) => checks.push(("partition: rotated momentum(8,4)".into(), Err(e.to_string()))),
    }

    for d in [4, 8] {
        for t in [1, 3] {
            checks.push(cross_path_check(d, t));
        }
    }
    checks.push(channel_vs_gram_check(8, 3, seed.child(3)));

    match momentum_partition(8, 2) {
        Ok(y) => checks.push(sandwich_check("momentum(8,2), 32 samples", &y, seed.child(4))),
        Err(e) => checks.push(("gap bounds sandwich: momentum(8,2)".into(), Err(e.to_string()))),
    }
    match baker_unitary(&TorusQuantization::new(8))
        .map_err(CliError::from)
        .and_then(|u| {
            let p = momentum_partition(8, 2)?;
            Ok(measured_refinement(&p, &u, 2)?)
        }) {
        Ok(y) => checks.push(sandwich_check(
            "2-step refined baker d=8, 32 samples",
            &y,
            seed.child(5),
        )),
        Err(e) => checks.push((
            "gap bounds sandwich: 2-step refined baker d=8".into(),
            Err(e.to_string()),
        )),
    }

    checks.push(classical_round_trip_check());
    checks.push(classical_entropy_check(seed.child(6)));
    checks.push(determinism_check(seed.child(7)));

    if let Some(path) = map_file {
        checks.push(custom_map_check(path));
    }

    let width = checks.iter().map(|(name, _)| name.len()).max().unwrap_or(0);
    let mut report = String::new();
    let mut failed = 0usize;
    for (name, outcome) in &checks {
        match outcome {
            Ok(detail) => {
                let _ = writeln!(report, "ok    {name:width$}  {detail}");
            }
            Err(detail) => {
                failed += 1;
                let _ = writeln!(report, "FAIL  {name:width$}  {detail}");
            }
        }
    }
    let _ = writeln!(report, "selfcheck: {} checks, {failed} failed", checks.len());
    (report, failed == 0)
}
