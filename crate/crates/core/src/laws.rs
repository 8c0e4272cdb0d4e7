//! Seeded randomized checks of the algebraic laws, shared by the test suites
//! and the `check-laws` command.

use std::fmt;

use rand::Rng;

use crate::diagram::{evaluate, Model, Term};
use crate::error::Error;
use crate::exactnf::{nf_compose, nf_denote, nf_from_term, nf_normalization, NfError, NormalForm};
use crate::inference::{
    bayes_invert, conditional, invert_along, jeffrey_update, normalize, pearl_update, validity,
    Conditioning,
};
use crate::kernel::{
    self, compare, cond_comp, copy, discard, domain_of_definition, graph, has_deterministic_domain,
    identity, is_deterministic, is_total, observe, project, swap, Side, SubKernel,
};
use crate::maybecat::{
    from_total, kleisli_cond_comp, laxator, maybe_map, oplaxator, split_conditional,
    stoch_conditional, strong_kleisli_extend, to_total, PointedObject, TotalKernel,
};
use crate::object::FinObject;
use crate::random::{self, LawRng, Mass};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LawConfig {
    pub seed: u64,
    /// Random instances per law.
    pub cases: usize,
    /// Largest number of labels of a generated atom.
    pub max_size: usize,
    pub tol: f64,
    pub zero_mass_tol: f64,
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig {
            seed: 0,
            cases: 200,
            max_size: 4,
            tol: 1e-9,
            zero_mass_tol: 1e-12,
        }
    }
}

impl LawConfig {
    fn conditioning(&self) -> Conditioning {
        Conditioning {
            zero_mass_tol: self.zero_mass_tol,
            ..Conditioning::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LawReport {
    pub group: &'static str,
    pub law: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest discrepancy seen over passing and failing cases.
    pub max_error: f64,
    pub first_failure: Option<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{}: {} cases, {} failures, max error {:.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.group,
            self.law,
            self.cases,
            self.failures,
            self.max_error
        )?;
        if let Some(msg) = &self.first_failure {
            write!(f, " ({msg})")?;
        }
        Ok(())
    }
}

/// A case that could not be evaluated.
#[derive(Debug)]
struct Broken(String);

impl From<Error> for Broken {
    fn from(e: Error) -> Self {
        Broken(e.to_string())
    }
}

impl From<NfError> for Broken {
    fn from(e: NfError) -> Self {
        Broken(e.to_string())
    }
}

type Check = Result<f64, Broken>;

fn fnv(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

fn law(
    group: &'static str,
    name: &str,
    cfg: &LawConfig,
    cases: usize,
    mut case: impl FnMut(&mut LawRng, usize) -> Check,
) -> LawReport {
    let mut rng = random::rng(cfg.seed ^ fnv(name));
    let mut report = LawReport {
        group,
        law: name.to_string(),
        cases,
        failures: 0,
        max_error: 0.0,
        first_failure: None,
    };
    for i in 0..cases {
        let outcome = case(&mut rng, i);
        let failure = match outcome {
            Ok(d) if d <= cfg.tol => {
                report.max_error = report.max_error.max(d);
                None
            }
            Ok(d) => {
                report.max_error = report
                    .max_error
                    .max(if d.is_nan() { f64::INFINITY } else { d });
                Some(format!("case {i}: discrepancy {d:.3e}"))
            }
            Err(Broken(msg)) => Some(format!("case {i}: {msg}")),
        };
        if let Some(msg) = failure {
            report.failures += 1;
            report.first_failure.get_or_insert(msg);
        }
    }
    report
}

fn diff(a: &SubKernel, b: &SubKernel) -> Check {
    a.max_abs_diff(b).ok_or_else(|| {
        Broken(format!(
            "type mismatch: {} -> {} against {} -> {}",
            a.dom(),
            a.cod(),
            b.dom(),
            b.cod()
        ))
    })
}

fn holds(ok: bool, what: &str) -> Check {
    if ok {
        Ok(0.0)
    } else {
        Err(Broken(what.to_string()))
    }
}

/// Largest entrywise difference over the given rows.
fn rows_diff(a: &SubKernel, b: &SubKernel, rows: impl IntoIterator<Item = usize>) -> f64 {
    rows.into_iter()
        .flat_map(|r| a.row(r).iter().zip(b.row(r)).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

fn atom(rng: &mut LawRng, name: &str, cfg: &LawConfig) -> FinObject {
    random::object(rng, name, cfg.max_size)
}

/// An atom, or occasionally a pair of atoms.
fn wire(rng: &mut LawRng, name: &str, cfg: &LawConfig) -> FinObject {
    if rng.gen_bool(0.25) {
        let small = LawConfig {
            max_size: cfg.max_size.min(2),
            ..*cfg
        };
        atom(rng, &format!("{name}1"), &small).tensor(&atom(rng, &format!("{name}2"), &small))
    } else {
        atom(rng, name, cfg)
    }
}

fn sub(rng: &mut LawRng, x: &FinObject, y: &FinObject) -> SubKernel {
    random::kernel(rng, x, y, Mass::Sub)
}

fn total(rng: &mut LawRng, x: &FinObject, y: &FinObject) -> SubKernel {
    random::kernel(rng, x, y, Mass::Total)
}

fn positive(values: impl IntoIterator<Item = f64>, tol: f64) -> Vec<usize> {
    values
        .into_iter()
        .enumerate()
        .filter(|(_, v)| *v > tol)
        .map(|(i, _)| i)
        .collect()
}

pub fn kernel_laws(cfg: &LawConfig) -> Vec<LawReport> {
    const G: &str = "kernel";
    let n = cfg.cases;
    vec![
        law(G, "comonoid", cfg, n, |rng, _| {
            let x = wire(rng, "X", cfg);
            let (c, id) = (copy(&x), identity(&x));
            let assoc_l = c.then(&c.tensor(&id))?;
            let assoc_r = c.then(&id.tensor(&c))?;
            let unit_l = c.then(&discard(&x).tensor(&id))?;
            let unit_r = c.then(&id.tensor(&discard(&x)))?;
            let comm = c.then(&swap(&x, &x))?;
            Ok(diff(&assoc_l, &assoc_r)?
                .max(diff(&unit_l, &id)?)
                .max(diff(&unit_r, &id)?)
                .max(diff(&comm, &c)?))
        }),
        law(G, "tensor-coherence", cfg, n, |rng, _| {
            let (x, y) = (atom(rng, "X", cfg), atom(rng, "Y", cfg));
            let xy = x.tensor(&y);
            let middle = identity(&x).tensor(&swap(&x, &y)).tensor(&identity(&y));
            let split = copy(&x).tensor(&copy(&y)).then(&middle)?;
            let discards = discard(&x).tensor(&discard(&y));
            Ok(diff(&copy(&xy), &split)?.max(diff(&discard(&xy), &discards)?))
        }),
        law(G, "comparator-frobenius", cfg, n, |rng, _| {
            let x = wire(rng, "X", cfg);
            let (mu, nu, id) = (compare(&x), copy(&x), identity(&x));
            let commutative = diff(&swap(&x, &x).then(&mu)?, &mu)?;
            let associative = diff(&mu.tensor(&id).then(&mu)?, &id.tensor(&mu).then(&mu)?)?;
            let special = diff(&nu.then(&mu)?, &id)?;
            let middle = mu.then(&nu)?;
            let left = id.tensor(&nu).then(&mu.tensor(&id))?;
            let right = nu.tensor(&id).then(&id.tensor(&mu))?;
            Ok(commutative
                .max(associative)
                .max(special)
                .max(diff(&left, &middle)?)
                .max(diff(&right, &middle)?))
        }),
        law(
            G,
            "deterministic-has-deterministic-domain",
            cfg,
            n,
            |rng, _| {
                let (x, y) = (atom(rng, "X", cfg), atom(rng, "Y", cfg));
                let idx = random::label(rng, &x);
                let candidates = [
                    random::dirac_kernel(rng, &x, &y, true),
                    random::dirac_kernel(rng, &x, &y, false),
                    copy(&x),
                    discard(&x),
                    swap(&x, &y),
                    compare(&x),
                    observe(&x, idx),
                ];
                for k in &candidates {
                    holds(is_deterministic(k, cfg.tol), "not deterministic")?;
                    holds(
                        has_deterministic_domain(k, cfg.tol),
                        "deterministic kernel without deterministic domain",
                    )?;
                }
                Ok(0.0)
            },
        ),
        law(
            G,
            "conditional-composition-associative-unital",
            cfg,
            n,
            |rng, _| {
                let (x, a, b, c) = (
                    atom(rng, "X", cfg),
                    atom(rng, "A", cfg),
                    atom(rng, "B", cfg),
                    atom(rng, "C", cfg),
                );
                let f = sub(rng, &x, &a);
                let g = sub(rng, &x.tensor(&a), &b);
                let h = sub(rng, &x.tensor(&a).tensor(&b), &c);
                let left = cond_comp(&cond_comp(&f, &g)?, &h)?;
                let right = cond_comp(&f, &cond_comp(&g, &h)?)?;
                let unit_r = cond_comp(&f, &discard(&x.tensor(&a)))?;
                let k = sub(rng, &x, &b);
                let unit_l = cond_comp(&discard(&x), &k)?;
                Ok(diff(&left, &right)?
                    .max(diff(&unit_r, &f)?)
                    .max(diff(&unit_l, &k)?))
            },
        ),
        law(G, "graph-section", cfg, n, |rng, _| {
            let (x, y) = (wire(rng, "X", cfg), atom(rng, "Y", cfg));
            let f = sub(rng, &x, &y);
            let back = project(&graph(&f), x.factors().len(), Side::Second)?;
            diff(&back, &f)
        }),
        graph_not_retraction(cfg),
    ]
}

/// `graph(h ; π2) ≠ h` for some `h: X -> X ⊗ Y`: a single search for a
/// witness.
fn graph_not_retraction(cfg: &LawConfig) -> LawReport {
    let mut found = false;
    let mut report = law(
        "kernel",
        "graph-not-retraction",
        cfg,
        cfg.cases,
        |rng, _| {
            if found {
                return Ok(0.0);
            }
            let (x, y) = (atom(rng, "X", cfg), atom(rng, "Y", cfg));
            let h = sub(rng, &x, &x.tensor(&y));
            let again = graph(&project(&h, 1, Side::Second)?);
            found = diff(&again, &h)? > cfg.tol;
            Ok(0.0)
        },
    );
    if !found {
        report.failures = 1;
        report.first_failure = Some("no witness found".into());
    }
    report
}

pub fn inference_laws(cfg: &LawConfig) -> Vec<LawReport> {
    const G: &str = "inference";
    let n = cfg.cases;
    let cc = cfg.conditioning();
    let tol = cfg.zero_mass_tol;
    vec![
        law(G, "conditional-factorization", cfg, n, |rng, _| {
            let (x, y, z) = (
                wire(rng, "X", cfg),
                wire(rng, "Y", cfg),
                atom(rng, "Z", cfg),
            );
            let f = sub(rng, &x, &y.tensor(&z));
            let split = y.factors().len();
            let c = conditional(&f, split, &cc)?;
            diff(&cond_comp(&project(&f, split, Side::First)?, &c)?, &f)
        }),
        law(G, "conditional-almost-surely-total", cfg, n, |rng, _| {
            let (x, y, z) = (
                atom(rng, "X", cfg),
                atom(rng, "Y", cfg),
                atom(rng, "Z", cfg),
            );
            let f = sub(rng, &x, &y.tensor(&z));
            let m = project(&f, 1, Side::First)?;
            let c = conditional(&f, 1, &cc)?;
            let c_total = c.then(&discard(&z))?;
            let both = discard(&y.tensor(&x));
            let as_equal = kernel::as_equal(
                &m,
                &crate::inference::swap_inputs(&c_total, 1)?,
                &both,
                cfg.tol,
            )?;
            holds(as_equal, "conditional not almost surely total")?;
            holds(is_total(&c, cfg.tol), "uniform-fill conditional not total")
        }),
        law(G, "inversion-identity", cfg, n, |rng, _| {
            let (x, y) = (wire(rng, "X", cfg), atom(rng, "Y", cfg));
            let p = random::state(rng, &x, Mass::Total);
            let g = sub(rng, &x, &y);
            let evidence = p.then(&g)?;
            let inv = bayes_invert(&g, &p, &cc)?;
            let mut worst: f64 = 0.0;
            for yi in positive(evidence.row(0).iter().copied(), tol) {
                for xi in 0..x.size() {
                    let lhs = p.get(0, xi) * g.get(xi, yi);
                    let rhs = evidence.get(0, yi) * inv.get(yi, xi);
                    worst = worst.max((lhs - rhs).abs());
                }
            }
            Ok(worst)
        }),
        law(G, "inversion-of-composite", cfg, n, |rng, _| {
            let (x, y, z) = (
                atom(rng, "X", cfg),
                atom(rng, "Y", cfg),
                atom(rng, "Z", cfg),
            );
            let p = random::state(rng, &x, Mass::Total);
            let f = sub(rng, &x, &y);
            let g = sub(rng, &y, &z);
            let direct = bayes_invert(&f.then(&g)?, &p, &cc)?;
            let staged = bayes_invert(&g, &p.then(&f)?, &cc)?.then(&bayes_invert(&f, &p, &cc)?)?;
            let evidence = p.then(&f)?.then(&g)?;
            Ok(rows_diff(
                &direct,
                &staged,
                positive(evidence.row(0).iter().copied(), tol),
            ))
        }),
        law(G, "conditional-of-composite", cfg, n, |rng, _| {
            let (x, y, z, w) = (
                atom(rng, "X", cfg),
                atom(rng, "Y", cfg),
                atom(rng, "Z", cfg),
                atom(rng, "W", cfg),
            );
            let f = sub(rng, &x, &y);
            let g = sub(rng, &y, &z.tensor(&w));
            let fg = f.then(&g)?;
            let direct = conditional(&fg, 1, &cc)?;
            let b = invert_along(&project(&g, 1, Side::First)?, &f, &cc)?;
            let cg = conditional(&g, 1, &cc)?;
            let keep_z = identity(&x).tensor(&copy(&z));
            let composite = keep_z.then(&b.tensor(&identity(&z)))?.then(&cg)?;
            let marginal = project(&fg, 1, Side::First)?;
            let pairs = positive(marginal.weights().iter().copied(), tol);
            Ok(rows_diff(&direct, &composite, pairs))
        }),
        law(G, "normalisation", cfg, n, |rng, _| {
            let (x, y) = (wire(rng, "X", cfg), atom(rng, "Y", cfg));
            let f = sub(rng, &x, &y);
            let nf = normalize(&f, &cc);
            diff(&cond_comp(&domain_of_definition(&f), &nf)?, &f)
        }),
        law(G, "normalisation-idempotent", cfg, n, |rng, _| {
            let (x, y) = (atom(rng, "X", cfg), atom(rng, "Y", cfg));
            let nf = normalize(&sub(rng, &x, &y), &cc);
            let again = normalize(&nf, &cc);
            diff(&again, &nf)
        }),
        law(G, "normalisation-precomposes", cfg, n, |rng, _| {
            let (x, y, z) = (
                atom(rng, "X", cfg),
                atom(rng, "Y", cfg),
                atom(rng, "Z", cfg),
            );
            let f = sub(rng, &x, &y);
            let g = sub(rng, &y, &z);
            let left = normalize(&f.then(&g)?, &cc);
            let right = normalize(&normalize(&f, &cc).then(&g)?, &cc);
            let defined = positive((0..x.size()).map(|r| f.row_sum(r)), tol);
            Ok(rows_diff(&left, &right, defined))
        }),
        law(G, "conditional-of-normalisation", cfg, n, |rng, _| {
            let (x, y, z) = (
                atom(rng, "X", cfg),
                atom(rng, "Y", cfg),
                atom(rng, "Z", cfg),
            );
            let f = sub(rng, &x, &y.tensor(&z));
            let c = conditional(&normalize(&f, &cc), 1, &cc)?;
            let rebuilt = cond_comp(&project(&f, 1, Side::First)?, &c)?;
            let defined = positive((0..x.size()).map(|r| f.row_sum(r)), tol);
            Ok(rows_diff(&rebuilt, &f, defined))
        }),
        law(
            G,
            "deterministic-domain-iff-own-normalisation",
            cfg,
            n,
            |rng, i| {
                let (x, y) = (atom(rng, "X", cfg), atom(rng, "Y", cfg));
                let f = if i % 2 == 0 {
                    random::crisp_kernel(rng, &x, &y)
                } else {
                    sub(rng, &x, &y)
                };
                let own = cond_comp(&domain_of_definition(&f), &f)?;
                let equal = diff(&own, &f)? <= cfg.tol;
                holds(
                    equal == has_deterministic_domain(&f, cfg.tol),
                    "deterministic domain and self-normalisation disagree",
                )
            },
        ),
        law(
            G,
            "conditional-with-deterministic-domain",
            cfg,
            n,
            |rng, _| {
                let (x, a, b) = (
                    atom(rng, "X", cfg),
                    atom(rng, "A", cfg),
                    atom(rng, "B", cfg),
                );
                let m = sub(rng, &x, &a);
                let c = random::crisp_kernel(rng, &x.tensor(&a), &b);
                let f = cond_comp(&m, &c)?;
                diff(&cond_comp(&project(&f, 1, Side::First)?, &c)?, &f)
            },
        ),
        law(G, "bayes-up-to-scalar", cfg, n, |rng, _| {
            let (x, y) = (atom(rng, "X", cfg), atom(rng, "Y", cfg));
            let p = random::state(rng, &x, Mass::Total);
            let f = sub(rng, &x, &y);
            let evidence = p.then(&f)?;
            let inv = bayes_invert(&f, &p, &cc)?;
            let mut worst: f64 = 0.0;
            for yi in positive(evidence.row(0).iter().copied(), tol) {
                let observed = pearl_update(&p, &f, &observe(&y, yi), false, &cc)?;
                let scaled = SubKernel::dirac(y.clone(), yi)
                    .then(&inv)?
                    .then(&SubKernel::scalar(evidence.get(0, yi))?.tensor(&identity(&x)))?;
                worst = worst.max(diff(&observed, &scaled)?);
            }
            Ok(worst)
        }),
        law(G, "pearl-jeffrey-deterministic", cfg, n, |rng, _| {
            let (x, y) = (atom(rng, "X", cfg), atom(rng, "Y", cfg));
            let p = random::state(rng, &x, Mass::Total);
            let f = sub(rng, &x, &y);
            let evidence = p.then(&f)?;
            let mut worst: f64 = 0.0;
            for yi in positive(evidence.row(0).iter().copied(), tol) {
                let pearl = pearl_update(&p, &f, &observe(&y, yi), true, &cc)?;
                let jeffrey = jeffrey_update(&p, &f, &SubKernel::dirac(y.clone(), yi), &cc)?;
                worst = worst.max(diff(&pearl, &jeffrey)?);
            }
            Ok(worst)
        }),
        law(G, "pearl-increases-validity", cfg, n, |rng, _| {
            let (x, y) = (atom(rng, "X", cfg), atom(rng, "Y", cfg));
            let p = random::state(rng, &x, Mass::Total);
            let f = sub(rng, &x, &y);
            let q = sub(rng, &y, &FinObject::unit());
            let before = validity(&p, &f, &q)?;
            if before <= tol {
                return Ok(0.0);
            }
            let updated = pearl_update(&p, &f, &q, true, &cc)?;
            Ok((before - validity(&updated, &f, &q)?).max(0.0))
        }),
    ]
}

pub fn maybe_laws(cfg: &LawConfig) -> Vec<LawReport> {
    const G: &str = "maybe";
    let n = cfg.cases;
    let cc = cfg.conditioning();
    let tol = cfg.zero_mass_tol;
    let sizes: Vec<(usize, usize)> = (1..=cfg.max_size)
        .flat_map(|a| (1..=cfg.max_size).map(move |b| (a, b)))
        .collect();
    let named = |name: &str, k: usize| {
        FinObject::atom(
            name,
            (0..k)
                .map(|i| format!("{}{i}", name.to_lowercase()))
                .collect(),
        )
        .expect("distinct labels")
    };
    vec![
        law(G, "conditional-routes-agree", cfg, n, |rng, _| {
            let (x, y, z) = (
                wire(rng, "X", cfg),
                wire(rng, "Y", cfg),
                atom(rng, "Z", cfg),
            );
            let f = sub(rng, &x, &y.tensor(&z));
            let split = y.factors().len();
            let direct = conditional(&f, split, &cc)?;
            let base = crate::maybecat::conditional_via_base(&f, split, tol)?;
            let marginal = project(&f, split, Side::First)?;
            let pairs = positive(marginal.weights().iter().copied(), tol);
            Ok(rows_diff(&direct, &base, pairs))
        }),
        law(G, "base-route-factorization", cfg, n, |rng, _| {
            let (x, y, z) = (
                atom(rng, "X", cfg),
                atom(rng, "Y", cfg),
                atom(rng, "Z", cfg),
            );
            let f = sub(rng, &x, &y.tensor(&z));
            let base = crate::maybecat::conditional_via_base(&f, 1, tol)?;
            diff(&cond_comp(&project(&f, 1, Side::First)?, &base)?, &f)
        }),
        law(G, "laxator-section", cfg, sizes.len(), |_, i| {
            let (x, y) = (named("X", sizes[i].0), named("Y", sizes[i].1));
            let round = oplaxator(&x, &y).then(&laxator(&x, &y))?;
            let id = identity(PointedObject::new(&x.tensor(&y)).object());
            diff(round.kernel(), &id)
        }),
        law(G, "oplaxator-preserves-copy", cfg, cfg.max_size, |_, i| {
            let x = named("X", i + 1);
            let lifted = maybe_map(&TotalKernel::new(copy(&x), 0.0)?).then(&oplaxator(&x, &x))?;
            diff(lifted.kernel(), &copy(PointedObject::new(&x).object()))
        }),
        law(G, "kleisli-conditional-composition", cfg, n, |rng, _| {
            let (x, y, z) = (
                atom(rng, "X", cfg),
                atom(rng, "Y", cfg),
                atom(rng, "Z", cfg),
            );
            let (py, pz) = (PointedObject::new(&y), PointedObject::new(&z));
            let f = sub(rng, &x, &y);
            let g = sub(rng, &x.tensor(&y), &z);
            let lhs = kleisli_cond_comp(&to_total(&f), &to_total(&g), &py, &pz)?;
            let extended = to_total(&strong_kleisli_extend(&g, 1)?);
            let rhs = cond_comp(to_total(&f).kernel(), extended.kernel())?
                .then(laxator(&y, &z).kernel())?;
            diff(lhs.kernel(), &rhs)
        }),
        law(G, "restriction-to-defined-inputs", cfg, n, |rng, _| {
            let (x, y, z) = (
                atom(rng, "X", cfg),
                atom(rng, "Y", cfg),
                atom(rng, "Z", cfg),
            );
            let (py, pz) = (PointedObject::new(&y), PointedObject::new(&z));
            let f = to_total(&sub(rng, &x, &y));
            let g = total(rng, &x.tensor(py.object()), pz.object());
            let h = split_conditional(&g, &py)?;
            let h_ext = to_total(&strong_kleisli_extend(
                &from_total(&TotalKernel::new(h, 1e-12)?, &pz)?,
                1,
            )?);
            let l = laxator(&y, &z);
            let lhs = cond_comp(f.kernel(), &g)?.then(l.kernel())?;
            let rhs = cond_comp(f.kernel(), h_ext.kernel())?.then(l.kernel())?;
            diff(&lhs, &rhs)
        }),
    ]
}

/// A random term over total generators, copies, discards, swaps and exact
/// observations, together with a model declaring its generators.
pub fn markov_term(rng: &mut LawRng, max_size: usize, max_depth: usize) -> (Model, Term) {
    let mut gen = TermGen {
        model: Model::new(),
        atoms: Vec::new(),
    };
    for name in ["A", "B", "C"] {
        let a = random::object(rng, name, max_size);
        gen.model.add_object(name, a.clone()).expect("fresh name");
        gen.atoms.push(a);
    }
    let inputs = rng.gen_range(0..=2);
    let dom: Vec<usize> = (0..inputs).map(|_| rng.gen_range(0..3)).collect();
    let (term, _) = gen.term(rng, &dom, max_depth.max(1), MAX_WIRES);
    (gen.model, term)
}

const MAX_WIRES: usize = 3;

struct TermGen {
    model: Model,
    atoms: Vec<FinObject>,
}

impl TermGen {
    fn object(&self, wires: &[usize]) -> FinObject {
        wires
            .iter()
            .fold(FinObject::unit(), |acc, &w| acc.tensor(&self.atoms[w]))
    }

    fn generator(&mut self, rng: &mut LawRng, dom: &[usize], cod: &[usize]) -> Term {
        let (x, y) = (self.object(dom), self.object(cod));
        let name = format!(
            "g{}",
            self.model.kernels().len() + self.model.states().len()
        );
        let k = total(rng, &x, &y);
        if x.is_unit() {
            self.model.add_state(&name, k).expect("fresh name");
        } else {
            self.model.add_kernel(&name, k).expect("fresh name");
        }
        Term::Gen(name)
    }

    /// A term with domain `dom` whose codomain has at most `cap` wires.
    fn term(
        &mut self,
        rng: &mut LawRng,
        dom: &[usize],
        depth: usize,
        cap: usize,
    ) -> (Term, Vec<usize>) {
        if depth > 1 && rng.gen_bool(0.7) {
            if dom.len() >= 2 && rng.gen_bool(0.4) {
                let k = rng.gen_range(1..dom.len());
                let (left, right) = dom.split_at(k);
                let (t1, c1) = self.term(rng, left, depth - 1, cap - right.len());
                let (t2, c2) = self.term(rng, right, depth - 1, cap - c1.len());
                return (Term::par(t1, t2), [c1, c2].concat());
            }
            let (t1, mid) = self.term(rng, dom, depth - 1, cap);
            let (t2, cod) = self.term(rng, &mid, depth - 1, cap);
            return (Term::seq(t1, t2), cod);
        }
        self.leaf(rng, dom, cap)
    }

    fn leaf(&mut self, rng: &mut LawRng, dom: &[usize], cap: usize) -> (Term, Vec<usize>) {
        let x = self.object(dom);
        let fresh = rng.gen_range(0..3);
        let choice = rng.gen_range(0..6);
        match (dom.len(), choice) {
            (0, 0..=3) if cap >= 1 => (self.generator(rng, dom, &[fresh]), vec![fresh]),
            (1, 0) if cap >= 2 => (Term::Copy(x), vec![dom[0], dom[0]]),
            (_, 1) if !dom.is_empty() => {
                let label = x.label(random::label(rng, &x));
                (Term::Observe(x, label), vec![])
            }
            (_, 2) if !dom.is_empty() => (Term::Discard(x), vec![]),
            (n, 3) if n >= 2 => {
                let k = rng.gen_range(1..n);
                let (a, b) = dom.split_at(k);
                (Term::Swap(self.object(a), self.object(b)), [b, a].concat())
            }
            (n, 4 | 5) if n >= 1 => {
                let cod = vec![fresh];
                (self.generator(rng, dom, &cod), cod)
            }
            _ => (Term::Id(x), dom.to_vec()),
        }
    }
}

pub fn diagram_laws(cfg: &LawConfig) -> Vec<LawReport> {
    const G: &str = "diagram";
    let n = cfg.cases;
    vec![
        law(G, "observation-axiom", cfg, n, |rng, _| {
            let (x, y) = (wire(rng, "X", cfg), atom(rng, "Y", cfg));
            let f = sub(rng, &x, &y);
            let mut m = Model::new();
            m.add_kernel("f", f.clone())
                .map_err(|e| Broken(e.to_string()))?;
            let i = random::label(rng, &x);
            let obs = Term::Observe(x.clone(), x.label(i));
            let point = observe(&x, i).then(&SubKernel::dirac(x.clone(), i))?;
            let plain = evaluate(
                &Term::seq(
                    Term::Copy(x.clone()),
                    Term::par(obs.clone(), Term::Id(x.clone())),
                ),
                &m,
            )
            .map_err(|e| Broken(e.to_string()))?;
            let through = evaluate(
                &Term::seq(Term::Copy(x.clone()), Term::par(obs, Term::gen("f"))),
                &m,
            )
            .map_err(|e| Broken(e.to_string()))?;
            Ok(diff(&plain, &point)?.max(diff(&through, &point.then(&f)?)?))
        }),
        law(G, "evaluation-functorial", cfg, n, |rng, _| {
            let (m, t) = markov_term(rng, cfg.max_size, 4);
            let (m2, t2) = markov_term(rng, cfg.max_size, 3);
            let mut both = m.clone();
            let renamed = rename(&t2, &m2, &mut both)?;
            let a = evaluate(&t, &m).map_err(|e| Broken(e.to_string()))?;
            let b = evaluate(&t2, &m2).map_err(|e| Broken(e.to_string()))?;
            let par = evaluate(&Term::par(t, renamed), &both).map_err(|e| Broken(e.to_string()))?;
            diff(&par, &a.tensor(&b))
        }),
    ]
}

/// Copies the generators of `t` from `from` into `into` under fresh names.
fn rename(t: &Term, from: &Model, into: &mut Model) -> Result<Term, Broken> {
    Ok(match t {
        Term::Gen(name) => {
            let fresh = format!("{name}'");
            let k = from
                .kernel_of(name)
                .ok_or_else(|| Broken(format!("unknown `{name}`")))?;
            if into.boundary(&fresh).is_none() {
                into.add_kernel(&fresh, k)
                    .map_err(|e| Broken(e.to_string()))?;
            }
            Term::Gen(fresh)
        }
        Term::Seq(a, b) => Term::seq(rename(a, from, into)?, rename(b, from, into)?),
        Term::Par(a, b) => Term::par(rename(a, from, into)?, rename(b, from, into)?),
        other => other.clone(),
    })
}

fn random_nf(rng: &mut LawRng, cfg: &LawConfig, x: &FinObject, y: &FinObject) -> NormalForm {
    let w = atom(rng, "W", cfg);
    let h = TotalKernel::new(total(rng, x, &w), 1e-12).expect("total rows");
    let z = random::label(rng, &w);
    let g = TotalKernel::new(total(rng, x, y), 1e-12).expect("total rows");
    NormalForm::new(h, z, g).expect("matching inputs")
}

pub fn normal_form_laws(cfg: &LawConfig, terms: usize) -> Vec<LawReport> {
    const G: &str = "normal-form";
    let n = cfg.cases;
    let cc = cfg.conditioning();
    let tol = cfg.zero_mass_tol;
    vec![
        law(G, "soundness", cfg, terms, |rng, _| {
            let (m, t) = markov_term(rng, cfg.max_size, 6);
            let nf = nf_from_term(&t, &m)?;
            let direct = evaluate(&t, &m).map_err(|e| Broken(e.to_string()))?;
            diff(&nf_denote(&nf), &direct)
        }),
        law(G, "normalisation-extraction", cfg, terms, |rng, _| {
            let (m, t) = markov_term(rng, cfg.max_size, 6);
            let nf = nf_from_term(&t, &m)?;
            let n = normalize(&nf_denote(&nf), &cc);
            let defined = positive(nf.successes(), tol);
            Ok(rows_diff(&n, nf_normalization(&nf).kernel(), defined))
        }),
        law(G, "invariants", cfg, terms, |rng, _| {
            let (m, t) = markov_term(rng, cfg.max_size, 6);
            let nf = nf_from_term(&t, &m)?;
            holds(
                is_total(nf.h().kernel(), 1e-12),
                "evidence channel not total",
            )?;
            holds(is_total(nf.g().kernel(), 1e-12), "result channel not total")?;
            holds(nf.z() < nf.evidence().size(), "observed point out of range")
        }),
        law(G, "conditionals-from-base", cfg, n, |rng, _| {
            let (x, y, z, v) = (
                atom(rng, "X", cfg),
                atom(rng, "Y", cfg),
                atom(rng, "Z", cfg),
                atom(rng, "V", cfg),
            );
            let yz = y.tensor(&z);
            let nf = nf_compose(&random_nf(rng, cfg, &x, &v), &random_nf(rng, cfg, &v, &yz))?;
            let f = nf_denote(&nf);
            let direct = conditional(&f, 1, &cc)?;
            let base = stoch_conditional(&nf_normalization(&nf), 1, tol)?;
            let marginal = project(&f, 1, Side::First)?;
            let pairs = positive(marginal.weights().iter().copied(), tol);
            let rebuilt = cond_comp(&marginal, base.kernel())?;
            Ok(rows_diff(&direct, base.kernel(), pairs).max(diff(&rebuilt, &f)?))
        }),
    ]
}

/// Every randomized suite.
pub fn all_laws(cfg: &LawConfig) -> Vec<LawReport> {
    let mut out = kernel_laws(cfg);
    out.extend(inference_laws(cfg));
    out.extend(maybe_laws(cfg));
    out.extend(diagram_laws(cfg));
    out.extend(normal_form_laws(cfg, cfg.cases));
    out
}

/// Laws instantiated on the kernels, states and diagrams a model declares.
pub fn model_laws(model: &Model, cfg: &LawConfig) -> Vec<LawReport> {
    const G: &str = "model";
    let cc = cfg.conditioning();
    let tol = cfg.zero_mass_tol;
    let kernels: Vec<(&String, &SubKernel)> = model.kernels().iter().collect();
    let states: Vec<(&String, &SubKernel)> = model.states().iter().collect();
    let pairs: Vec<(&SubKernel, &SubKernel)> = states
        .iter()
        .flat_map(|(_, p)| {
            kernels
                .iter()
                .filter(move |(_, f)| f.dom() == p.cod())
                .map(move |(_, f)| (*p, *f))
        })
        .collect();
    let all: Vec<&SubKernel> = kernels
        .iter()
        .chain(states.iter())
        .map(|(_, k)| *k)
        .chain(model.diagrams().values().map(|d| &d.kernel))
        .collect();
    let joint: Vec<&SubKernel> = all
        .iter()
        .copied()
        .filter(|k| k.cod().factors().len() >= 2)
        .collect();
    let diagrams: Vec<&Term> = model.diagrams().values().map(|d| &d.term).collect();
    vec![
        law(G, "conditional-factorization", cfg, joint.len(), |_, i| {
            let f = joint[i];
            let c = conditional(f, 1, &cc)?;
            let base = crate::maybecat::conditional_via_base(f, 1, tol)?;
            let m = project(f, 1, Side::First)?;
            let direct = diff(&cond_comp(&m, &c)?, f)?;
            let rows = positive(m.weights().iter().copied(), tol);
            Ok(direct.max(rows_diff(&c, &base, rows)))
        }),
        law(G, "normalisation", cfg, all.len(), |_, i| {
            let f = all[i];
            let nf = normalize(f, &cc);
            let own = cond_comp(&domain_of_definition(f), f)?;
            holds(
                (diff(&own, f)? <= cfg.tol) == has_deterministic_domain(f, cfg.tol),
                "deterministic domain and self-normalisation disagree",
            )?;
            diff(&cond_comp(&domain_of_definition(f), &nf)?, f)
        }),
        law(G, "inversion-identity", cfg, pairs.len(), |_, i| {
            let (p, f) = pairs[i];
            let evidence = p.then(f)?;
            let inv = bayes_invert(f, p, &cc)?;
            let mut worst: f64 = 0.0;
            for yi in positive(evidence.row(0).iter().copied(), tol) {
                for xi in 0..p.cols() {
                    let lhs = p.get(0, xi) * f.get(xi, yi);
                    worst = worst.max((lhs - evidence.get(0, yi) * inv.get(yi, xi)).abs());
                }
                let pearl = pearl_update(p, f, &observe(f.cod(), yi), true, &cc)?;
                let jeffrey = jeffrey_update(p, f, &SubKernel::dirac(f.cod().clone(), yi), &cc)?;
                worst = worst.max(diff(&pearl, &jeffrey)?);
            }
            Ok(worst)
        }),
        law(G, "normal-form-soundness", cfg, diagrams.len(), |_, i| {
            let direct = evaluate(diagrams[i], model).map_err(|e| Broken(e.to_string()))?;
            match nf_from_term(diagrams[i], model) {
                Ok(nf) => diff(&nf_denote(&nf), &direct),
                Err(NfError::NotTotal { .. } | NfError::Comparator) => Ok(0.0),
                Err(e) => Err(e.into()),
            }
        }),
    ]
}
