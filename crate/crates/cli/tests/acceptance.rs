//! Acceptance gate. Each test prints one `PASS`/`FAIL` line to stderr, then
//! asserts.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use pmc_core::density::{
    evidence_density, posterior_exact, std_normal_cdf, total_mass, truncated_normal_oracle,
    write_posterior_csv, DensityChannel, DensityState, QuadratureSpec,
};
use pmc_core::inference::{bayes_invert, jeffrey_update, pearl_update, validity, Conditioning};
use pmc_core::kernel::observe;
use pmc_core::laws::{
    diagram_laws, inference_laws, kernel_laws, maybe_laws, normal_form_laws, LawConfig, LawReport,
};
use pmc_core::maybecat::{laxator, oplaxator};
use pmc_core::random::{self, Mass};
use pmc_core::{FinObject, SubKernel};

fn report(criterion: u32, title: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "{status} criterion {criterion} ({title}): {detail}"
    );
    assert!(ok, "criterion {criterion} ({title}) failed: {detail}");
}

fn find<'a>(reports: &'a [LawReport], group: &str, law: &str) -> &'a LawReport {
    reports
        .iter()
        .find(|r| r.group == group && r.law == law)
        .unwrap_or_else(|| panic!("no law {group}/{law}"))
}

/// Law holds on at least `min` cases.
fn green(r: &LawReport, min: usize) -> bool {
    r.passed() && r.cases >= min
}

fn models_dir() -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "models"]
        .iter()
        .collect()
}

#[test]
fn criterion_1_law_suite() {
    let cfg = LawConfig::default();
    assert_eq!((cfg.cases, cfg.max_size, cfg.tol), (200, 4, 1e-9));
    let start = Instant::now();
    let mut reports = kernel_laws(&cfg);
    reports.extend(inference_laws(&cfg));
    reports.extend(maybe_laws(&cfg));
    reports.extend(diagram_laws(&cfg));
    let elapsed = start.elapsed();
    let required = [
        ("kernel", "comonoid"),
        ("kernel", "comparator-frobenius"),
        ("inference", "conditional-factorization"),
        ("inference", "inversion-identity"),
        ("inference", "normalisation"),
        ("inference", "deterministic-domain-iff-own-normalisation"),
        ("inference", "inversion-of-composite"),
        ("inference", "conditional-of-composite"),
        ("inference", "normalisation-precomposes"),
        ("inference", "conditional-of-normalisation"),
        ("inference", "bayes-up-to-scalar"),
        ("inference", "pearl-jeffrey-deterministic"),
    ];
    let mut bad: Vec<String> = required
        .iter()
        .map(|(g, l)| find(&reports, g, l))
        .filter(|r| !green(r, 200))
        .map(|r| r.to_string())
        .collect();
    bad.extend(
        reports
            .iter()
            .filter(|r| !r.passed())
            .map(|r| r.to_string()),
    );
    let worst = reports.iter().map(|r| r.max_error).fold(0.0, f64::max);
    let ok = bad.is_empty() && elapsed < Duration::from_secs(60);
    report(
        1,
        "law suite",
        ok,
        &format!(
            "{} laws ({} required) at tol 1e-9, max error {worst:.2e}, {:.2}s{}",
            reports.len(),
            required.len(),
            elapsed.as_secs_f64(),
            if bad.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", bad.join(" | "))
            }
        ),
    );
}

/// Composes two row-major matrices entry by entry.
fn matmul(a: &SubKernel, b: &SubKernel) -> Vec<f64> {
    let (n, k, m) = (a.rows(), a.cols(), b.cols());
    assert_eq!(k, b.rows());
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..k {
            for l in 0..m {
                out[i * m + l] += a.get(i, j) * b.get(j, l);
            }
        }
    }
    out
}

#[test]
fn criterion_2_conditional_routes() {
    let cfg = LawConfig::default();
    let reports = maybe_laws(&cfg);
    let routes = find(&reports, "maybe", "conditional-routes-agree");

    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for nx in 1..=4 {
        for ny in 1..=4 {
            let x = FinObject::atom("X", (0..nx).map(|i| format!("x{i}")).collect()).unwrap();
            let y = FinObject::atom("Y", (0..ny).map(|i| format!("y{i}")).collect()).unwrap();
            let s = oplaxator(&x, &y);
            let l = laxator(&x, &y);
            let round = matmul(s.kernel(), l.kernel());
            let n = s.kernel().rows();
            assert_eq!(n, l.kernel().cols());
            for i in 0..n {
                for j in 0..n {
                    let id = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((round[i * n + j] - id).abs());
                }
            }
            pairs += 1;
        }
    }
    let ok = green(routes, 200) && routes.max_error <= 1e-9 && worst <= 1e-12;
    report(
        2,
        "conditional routes agree",
        ok,
        &format!(
            "{} random kernels, max row gap {:.2e}; s;l = id on {pairs} size pairs, max gap {worst:.2e}",
            routes.cases, routes.max_error
        ),
    );
}

#[test]
fn criterion_3_normal_form_soundness() {
    let cfg = LawConfig::default();
    let reports = normal_form_laws(&cfg, 500);
    let sound = find(&reports, "normal-form", "soundness");
    let extract = find(&reports, "normal-form", "normalisation-extraction");
    let ok = green(sound, 500) && green(extract, 500) && reports.iter().all(LawReport::passed);
    report(
        3,
        "normal-form soundness",
        ok,
        &format!(
            "{} terms, denotation gap {:.2e}; normalisation gap {:.2e}",
            sound.cases, sound.max_error, extract.max_error
        ),
    );
}

#[test]
fn criterion_4_uniform_prior_posteriors() {
    let start = Instant::now();
    let prior = DensityState::Uniform { a: 0.0, b: 1.0 };
    let channel = DensityChannel::NormalMean { sigma: 1.0 };
    let q = QuadratureSpec {
        n: 2001,
        ..QuadratureSpec::default()
    };
    let vs = [-1.1, 0.21, 0.78, 2.4, 2.1];
    let mut problems = Vec::new();
    let mut sup: f64 = 0.0;
    let mut mass_gap: f64 = 0.0;
    for &v in &vs {
        let oracle = truncated_normal_oracle(0.0, 1.0, 1.0, v).unwrap();
        let DensityState::Grid { xs, pdf } = posterior_exact(&prior, &channel, v, &q).unwrap()
        else {
            panic!("posteriors are tabulated");
        };
        let err = xs
            .iter()
            .zip(&pdf)
            .map(|(x, p)| (p - oracle(*x)).abs())
            .fold(0.0, f64::max);
        let mass = total_mass(&DensityState::Grid { xs, pdf }).unwrap();
        sup = sup.max(err);
        mass_gap = mass_gap.max((mass - 1.0).abs());
        if err > 1e-6 {
            problems.push(format!("v={v}: sup-norm {err:.2e}"));
        }
        if (mass - 1.0).abs() > 1e-7 {
            problems.push(format!("v={v}: mass {mass}"));
        }
    }

    let evidence = evidence_density(&prior, &channel, 2.1, &q).unwrap();
    let closed = std_normal_cdf(2.1) - std_normal_cdf(1.1);
    let evidence_gap = (evidence - closed).abs();
    if evidence_gap > 1e-8 || (closed - 0.117801640384).abs() > 1e-11 {
        problems.push(format!("evidence {evidence} vs {closed}"));
    }

    let mut csv = Vec::new();
    write_posterior_csv(&mut csv, &prior, &channel, &vs, &q).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2001);
    for (c, &v) in vs.iter().enumerate() {
        let argmax = (0..rows.len())
            .max_by(|&i, &j| rows[i][c + 1].total_cmp(&rows[j][c + 1]))
            .unwrap();
        let at_boundary = argmax == 0 || argmax == rows.len() - 1;
        if at_boundary != ((v - 0.5f64).abs() > 0.5) {
            problems.push(format!("v={v}: mode at m={}", rows[argmax][0]));
        }
    }

    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(5) {
        problems.push(format!("took {:.2}s", elapsed.as_secs_f64()));
    }
    report(
        4,
        "uniform prior, normal channel",
        problems.is_empty(),
        &format!(
            "sup-norm {sup:.2e}, mass gap {mass_gap:.2e}, evidence gap {evidence_gap:.2e}, {:.2}s{}",
            elapsed.as_secs_f64(),
            if problems.is_empty() {
                String::new()
            } else {
                format!("; {}", problems.join("; "))
            }
        ),
    );
}

#[test]
fn criterion_5_pearl_and_jeffrey() {
    let cc = Conditioning::default();
    let coin = FinObject::atom("Coin", vec!["H", "T"]).unwrap();
    let bit = FinObject::atom("Bit", vec!["0", "1"]).unwrap();
    let p = SubKernel::state(coin.clone(), vec![0.5, 0.5]).unwrap();
    let f = SubKernel::new(coin, bit.clone(), vec![0.9, 0.1, 0.2, 0.8]).unwrap();
    let mut fixtures = vec![(p, f)];

    let mut rng = random::rng(5);
    while fixtures.len() < 201 {
        let x = random::object(&mut rng, "X", 4);
        let y = random::object(&mut rng, "Y", 4);
        let p = random::state(&mut rng, &x, Mass::Total);
        let f = random::kernel(&mut rng, &x, &y, Mass::Sub);
        fixtures.push((p, f));
    }
    let mut coincide_gap: f64 = 0.0;
    let mut points = 0;
    for (p, f) in &fixtures {
        let e = p.then(f).unwrap();
        for y in 0..f.cols() {
            if e.get(0, y) <= 1e-12 {
                continue;
            }
            let pearl = pearl_update(p, f, &observe(f.cod(), y), true, &cc).unwrap();
            let jeffrey = jeffrey_update(p, f, &SubKernel::dirac(f.cod().clone(), y), &cc).unwrap();
            coincide_gap = coincide_gap.max(pearl.max_abs_diff(&jeffrey).unwrap());
            points += 1;
        }
    }
    let inv = bayes_invert(&fixtures[0].1, &fixtures[0].0, &cc).unwrap();
    let coin_row = (inv.get(0, 0) - 9.0 / 11.0)
        .abs()
        .max((inv.get(0, 1) - 2.0 / 11.0).abs());

    let mut rng = random::rng(6);
    let (mut tried, mut drops) = (0, 0);
    let mut worst_drop: f64 = 0.0;
    while tried < 200 {
        let x = random::object(&mut rng, "X", 4);
        let y = random::object(&mut rng, "Y", 4);
        let p = random::state(&mut rng, &x, Mass::Total);
        let f = random::kernel(&mut rng, &x, &y, Mass::Sub);
        let q = random::kernel(&mut rng, &y, &FinObject::unit(), Mass::Sub);
        let before = validity(&p, &f, &q).unwrap();
        if before <= 1e-6 {
            continue;
        }
        tried += 1;
        let after = validity(&pearl_update(&p, &f, &q, true, &cc).unwrap(), &f, &q).unwrap();
        if after < before - 1e-12 {
            drops += 1;
        }
        worst_drop = worst_drop.max(before - after);
    }
    let ok = coincide_gap <= 1e-9 && coin_row <= 1e-12 && drops == 0;
    report(
        5,
        "Pearl and Jeffrey updates",
        ok,
        &format!(
            "point evidence on {points} (prior, channel, y) triples, gap {coincide_gap:.2e}; \
             {tried} renormalised updates, {drops} lowered validity (largest drop {worst_drop:.2e})"
        ),
    );
}

fn pmc(args: &[&str]) -> (Option<i32>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pmc"))
        .args(args)
        .output()
        .expect("pmc runs");
    (
        out.status.code(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

#[test]
fn criterion_6_command_line() {
    let dir = models_dir();
    let coin = dir.join("coin.pmc");
    let coin = coin.to_str().unwrap();
    let mut problems = Vec::new();

    let (code, out) = pmc(&["invert", coin, "--kernel", "f", "--prior", "p"]);
    let inverted = out
        .lines()
        .find(|l| l.starts_with("0 "))
        .and_then(|l| l.split_whitespace().nth(1))
        .and_then(|w| w.parse::<f64>().ok());
    match inverted {
        Some(w) if code == Some(0) && w.to_string().starts_with("0.81818") => {}
        _ => problems.push(format!("invert: exit {code:?}, output {out:?}")),
    }

    let (code, out) = pmc(&[
        "posterior",
        "--prior",
        "uniform:0,1",
        "--channel",
        "normal:1",
        "--observe",
        "2.1",
        "--grid",
        "2001",
    ]);
    let at_one = out
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap())
        .find(|(m, _)| m.parse::<f64>().unwrap() == 1.0)
        .map(|(_, d)| d.parse::<f64>().unwrap());
    match at_one {
        Some(d) if code == Some(0) && (d - 1.8493).abs() < 5e-5 => {}
        _ => problems.push(format!("posterior: exit {code:?}, pdf at 1 {at_one:?}")),
    }

    let mut shipped: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pmc"))
        .collect();
    shipped.sort();
    assert!(shipped.iter().any(|p| p.ends_with("empty.pmc")));
    for model in &shipped {
        let (code, _) = pmc(&["check-laws", model.to_str().unwrap()]);
        if code != Some(0) {
            problems.push(format!("check-laws {}: exit {code:?}", model.display()));
        }
    }

    report(
        6,
        "command line",
        problems.is_empty(),
        &format!(
            "invert H|0 = {}, posterior pdf at 1 = {}, check-laws exit 0 on {} models{}",
            inverted.map_or("?".into(), |w| w.to_string()),
            at_one.map_or("?".into(), |d| d.to_string()),
            shipped.len(),
            if problems.is_empty() {
                String::new()
            } else {
                format!("; {}", problems.join("; "))
            }
        ),
    );
}
