//! Substochastic kernels between finite objects.
//!
//! A [`SubKernel`] `X -> Y` stores, for every input label, a subdistribution
//! over output labels. The mass missing from a row is the probability of
//! failure. Composition sums over the internal wire, tensor multiplies
//! weights, and copy/discard/swap/compare are the deterministic structure
//! maps lifted from partial functions.

use std::fmt;

use crate::error::{Error, Result};
use crate::object::FinObject;

/// Numeric tolerances shared by the law checks and by input validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Entrywise tolerance for equality of kernels.
    pub law_tol: f64,
    /// Slack allowed when validating weights on construction.
    pub validation_slack: f64,
    /// A conditioning mass at or below this counts as zero.
    pub zero_mass_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            law_tol: 1e-9,
            validation_slack: 1e-12,
            zero_mass_tol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.law_tol, self.validation_slack, self.zero_mass_tol]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0);
        if !all_positive {
            return Err(Error::Tolerance("all tolerances must be positive".into()));
        }
        if self.zero_mass_tol > self.law_tol {
            return Err(Error::Tolerance(
                "zero_mass_tol must not exceed law_tol".into(),
            ));
        }
        Ok(())
    }
}

pub const DEFAULT_SLACK: f64 = 1e-12;

/// A morphism of the category of finite substochastic kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct SubKernel {
    dom: FinObject,
    cod: FinObject,
    weights: Vec<f64>,
}

/// Which side of a binary split to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

impl SubKernel {
    /// Validates with the default slack. See [`SubKernel::with_slack`].
    pub fn new(dom: FinObject, cod: FinObject, weights: Vec<f64>) -> Result<Self> {
        Self::with_slack(dom, cod, weights, DEFAULT_SLACK)
    }

    /// Builds a kernel from a row-major weight table.
    ///
    /// Weights in `[-slack, 0)` are clamped to zero and rows summing to
    /// `(1, 1 + slack]` are rescaled to exactly one; anything beyond the slack
    /// is rejected.
    pub fn with_slack(
        dom: FinObject,
        cod: FinObject,
        mut weights: Vec<f64>,
        slack: f64,
    ) -> Result<Self> {
        let (rows, cols) = (dom.size(), cod.size());
        if weights.len() != rows * cols {
            return Err(Error::Shape {
                rows,
                cols,
                expected: rows * cols,
                found: weights.len(),
            });
        }
        for row in 0..rows {
            let slice = &mut weights[row * cols..(row + 1) * cols];
            for (col, w) in slice.iter_mut().enumerate() {
                if !w.is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
                if *w < -slack {
                    return Err(Error::NegativeWeight {
                        row,
                        col,
                        value: *w,
                    });
                }
                if *w < 0.0 {
                    *w = 0.0;
                }
            }
            let sum: f64 = slice.iter().sum();
            if sum > 1.0 + slack {
                return Err(Error::RowOverflow { row, sum });
            }
            if sum > 1.0 {
                slice.iter_mut().for_each(|w| *w /= sum);
            }
        }
        Ok(SubKernel { dom, cod, weights })
    }

    /// Builds a kernel from a weight function over (input, output) indices.
    pub fn from_fn(
        dom: FinObject,
        cod: FinObject,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let cols = cod.size();
        let weights = (0..dom.size() * cols)
            .map(|k| f(k / cols, k % cols))
            .collect();
        Self::new(dom, cod, weights)
    }

    /// Result of an operation on valid kernels; skips validation.
    pub(crate) fn raw(dom: FinObject, cod: FinObject, weights: Vec<f64>) -> Self {
        debug_assert_eq!(weights.len(), dom.size() * cod.size());
        SubKernel { dom, cod, weights }
    }

    /// The deterministic (partial) function `x -> map(x)`; `None` is failure.
    pub fn deterministic(
        dom: FinObject,
        cod: FinObject,
        map: impl Fn(usize) -> Option<usize>,
    ) -> Self {
        let cols = cod.size();
        let mut weights = vec![0.0; dom.size() * cols];
        for x in 0..dom.size() {
            if let Some(y) = map(x) {
                weights[x * cols + y] = 1.0;
            }
        }
        SubKernel::raw(dom, cod, weights)
    }

    /// A state `I -> X` from weights over the labels of `X`.
    pub fn state(obj: FinObject, weights: Vec<f64>) -> Result<Self> {
        Self::new(FinObject::unit(), obj, weights)
    }

    /// The Dirac state at label index `idx`.
    pub fn dirac(obj: FinObject, idx: usize) -> Self {
        SubKernel::deterministic(FinObject::unit(), obj, |_| Some(idx))
    }

    /// The scalar `I -> I` with weight `s`.
    pub fn scalar(s: f64) -> Result<Self> {
        Self::new(FinObject::unit(), FinObject::unit(), vec![s])
    }

    pub fn dom(&self) -> &FinObject {
        &self.dom
    }

    pub fn cod(&self) -> &FinObject {
        &self.cod
    }

    pub fn rows(&self) -> usize {
        self.dom.size()
    }

    pub fn cols(&self) -> usize {
        self.cod.size()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.weights[x * self.cols() + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let c = self.cols();
        &self.weights[x * c..(x + 1) * c]
    }

    pub fn row_sum(&self, x: usize) -> f64 {
        self.row(x).iter().sum()
    }

    /// Failure mass of row `x`.
    pub fn fail(&self, x: usize) -> f64 {
        (1.0 - self.row_sum(x)).max(0.0)
    }

    pub fn is_state(&self) -> bool {
        self.dom.is_unit()
    }

    /// Weight of a scalar `I -> I`, or of the single row of a state.
    pub fn value(&self) -> f64 {
        self.weights[0]
    }

    /// Sequential composition `self ; g`.
    pub fn then(&self, g: &SubKernel) -> Result<SubKernel> {
        if self.cod != g.dom {
            return Err(Error::ObjectMismatch {
                context: "compose",
                left: self.cod.to_string(),
                right: g.dom.to_string(),
            });
        }
        let (n, m, k) = (self.rows(), self.cols(), g.cols());
        let mut out = vec![0.0; n * k];
        for x in 0..n {
            let acc = &mut out[x * k..(x + 1) * k];
            for y in 0..m {
                let w = self.weights[x * m + y];
                if w == 0.0 {
                    continue;
                }
                for (o, gz) in acc.iter_mut().zip(g.row(y)) {
                    *o += w * gz;
                }
            }
        }
        Ok(SubKernel::raw(self.dom.clone(), g.cod.clone(), out))
    }

    /// Parallel composition `self ⊗ g`.
    pub fn tensor(&self, g: &SubKernel) -> SubKernel {
        let dom = self.dom.tensor(&g.dom);
        let cod = self.cod.tensor(&g.cod);
        let (gr, gc) = (g.rows(), g.cols());
        let cols = self.cols() * gc;
        let mut out = vec![0.0; self.rows() * gr * cols];
        for x in 0..self.rows() {
            for x2 in 0..gr {
                let row = &mut out[(x * gr + x2) * cols..(x * gr + x2 + 1) * cols];
                for (y, &a) in self.row(x).iter().enumerate() {
                    for (y2, &b) in g.row(x2).iter().enumerate() {
                        row[y * gc + y2] = a * b;
                    }
                }
            }
        }
        SubKernel::raw(dom, cod, out)
    }

    /// Largest entrywise difference, or `None` when the types differ.
    pub fn max_abs_diff(&self, other: &SubKernel) -> Option<f64> {
        if self.dom != other.dom || self.cod != other.cod {
            return None;
        }
        Some(
            self.weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn approx_eq(&self, other: &SubKernel, tol: f64) -> bool {
        self.max_abs_diff(other).is_some_and(|d| d <= tol)
    }
}

impl fmt::Display for SubKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} -> {}", self.dom, self.cod)?;
        for x in 0..self.rows() {
            write!(f, "  {} ->", self.dom.render_label(x))?;
            for y in 0..self.cols() {
                let w = self.get(x, y);
                if w != 0.0 {
                    write!(f, " {}:{}", self.cod.render_label(y), w)?;
                }
            }
            writeln!(f, " (fail {})", self.fail(x))?;
        }
        Ok(())
    }
}

pub fn identity(obj: &FinObject) -> SubKernel {
    SubKernel::deterministic(obj.clone(), obj.clone(), Some)
}

pub fn copy(obj: &FinObject) -> SubKernel {
    let n = obj.size();
    SubKernel::deterministic(obj.clone(), obj.tensor(obj), |x| Some(x * n + x))
}

pub fn discard(obj: &FinObject) -> SubKernel {
    SubKernel::deterministic(obj.clone(), FinObject::unit(), |_| Some(0))
}

pub fn swap(a: &FinObject, b: &FinObject) -> SubKernel {
    let nb = b.size();
    let na = a.size();
    SubKernel::deterministic(a.tensor(b), b.tensor(a), |k| {
        let (i, j) = (k / nb, k % nb);
        Some(j * na + i)
    })
}

/// The comparator `X ⊗ X -> X`: passes `x` through when both inputs equal `x`
/// and fails otherwise.
pub fn compare(obj: &FinObject) -> SubKernel {
    let n = obj.size();
    SubKernel::deterministic(obj.tensor(obj), obj.clone(), |k| {
        let (a, b) = (k / n, k % n);
        (a == b).then_some(a)
    })
}

/// The predicate `X -> I` that succeeds exactly on label index `idx`.
pub fn observe(obj: &FinObject, idx: usize) -> SubKernel {
    SubKernel::deterministic(obj.clone(), FinObject::unit(), |x| (x == idx).then_some(0))
}

/// Marginal of `f: X -> Y ⊗ Z`, where `Y` is the first `split` factors of the
/// codomain.
pub fn project(f: &SubKernel, split: usize, side: Side) -> Result<SubKernel> {
    let (y, z) = f.cod().split_at(split)?;
    let proj = match side {
        Side::First => identity(&y).tensor(&discard(&z)),
        Side::Second => discard(&y).tensor(&identity(&z)),
    };
    f.then(&proj)
}

/// `graph(f) = copy ; (id ⊗ f)`, a kernel `X -> X ⊗ Y`.
pub fn graph(f: &SubKernel) -> SubKernel {
    let x = f.dom();
    copy(x)
        .then(&identity(x).tensor(f))
        .expect("copy codomain matches id ⊗ f domain")
}

/// Conditional composition `f ◁ g` of `f: X -> A` and `g: X ⊗ A -> B`,
/// a kernel `X -> A ⊗ B` with weights `f(a|x) · g(b|x,a)`.
pub fn cond_comp(f: &SubKernel, g: &SubKernel) -> Result<SubKernel> {
    let expected = f.dom().tensor(f.cod());
    if *g.dom() != expected {
        return Err(Error::ObjectMismatch {
            context: "conditional composition",
            left: expected.to_string(),
            right: g.dom().to_string(),
        });
    }
    let (na, nb) = (f.cols(), g.cols());
    let mut out = vec![0.0; f.rows() * na * nb];
    for x in 0..f.rows() {
        for a in 0..na {
            let w = f.get(x, a);
            if w == 0.0 {
                continue;
            }
            let base = x * na * nb + a * nb;
            for (o, gb) in out[base..base + nb].iter_mut().zip(g.row(x * na + a)) {
                *o = w * gb;
            }
        }
    }
    Ok(SubKernel::raw(
        f.dom().clone(),
        f.cod().tensor(g.cod()),
        out,
    ))
}

pub fn is_total(f: &SubKernel, tol: f64) -> bool {
    (0..f.rows()).all(|x| (f.row_sum(x) - 1.0).abs() <= tol)
}

/// Checks `f ; copy = copy ; (f ⊗ f)` entrywise. Both sides are evaluated
/// pointwise: the left is `f(y|x)·[y = y']`, the right `f(y|x)·f(y'|x)`.
pub fn is_deterministic(f: &SubKernel, tol: f64) -> bool {
    (0..f.rows()).all(|x| {
        let row = f.row(x);
        row.iter().enumerate().all(|(y, &a)| {
            row.iter().enumerate().all(|(y2, &b)| {
                let lhs = if y == y2 { a } else { 0.0 };
                (lhs - a * b).abs() <= tol
            })
        })
    })
}

/// `f ; discard`: the per-input success probability.
pub fn domain_of_definition(f: &SubKernel) -> SubKernel {
    f.then(&discard(f.cod())).expect("discard matches codomain")
}

pub fn has_deterministic_domain(f: &SubKernel, tol: f64) -> bool {
    (0..f.rows()).all(|x| {
        let s = f.row_sum(x);
        s.abs() <= tol || (s - 1.0).abs() <= tol
    })
}

/// Almost-sure equality of `g1, g2: A ⊗ X -> B` with respect to `f: X -> A`.
pub fn as_equal(f: &SubKernel, g1: &SubKernel, g2: &SubKernel, tol: f64) -> Result<bool> {
    let expected = f.cod().tensor(f.dom());
    for g in [g1, g2] {
        if *g.dom() != expected {
            return Err(Error::ObjectMismatch {
                context: "almost-sure equality",
                left: expected.to_string(),
                right: g.dom().to_string(),
            });
        }
    }
    if g1.cod() != g2.cod() {
        return Err(Error::ObjectMismatch {
            context: "almost-sure equality",
            left: g1.cod().to_string(),
            right: g2.cod().to_string(),
        });
    }
    let reorder = swap(f.dom(), f.cod());
    let lhs = cond_comp(f, &reorder.then(g1)?)?;
    let rhs = cond_comp(f, &reorder.then(g2)?)?;
    Ok(lhs.approx_eq(&rhs, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> FinObject {
        FinObject::atom("Coin", vec!["H", "T"]).unwrap()
    }

    fn bit() -> FinObject {
        FinObject::atom("Bit", vec!["0", "1"]).unwrap()
    }

    fn fair() -> SubKernel {
        SubKernel::state(coin(), vec![0.5, 0.5]).unwrap()
    }

    fn channel() -> SubKernel {
        SubKernel::new(coin(), bit(), vec![0.9, 0.1, 0.2, 0.8]).unwrap()
    }

    const TOL: f64 = 1e-12;

    #[test]
    fn validation_clamps_and_rejects() {
        let k = SubKernel::new(coin(), bit(), vec![-1e-13, 0.5, 0.5, 0.5 + 5e-13]).unwrap();
        assert_eq!(k.get(0, 0), 0.0);
        assert!((k.row_sum(1) - 1.0).abs() < 1e-15);
        assert!(matches!(
            SubKernel::new(coin(), bit(), vec![-0.1, 0.5, 0.5, 0.5]),
            Err(Error::NegativeWeight { .. })
        ));
        assert!(matches!(
            SubKernel::new(coin(), bit(), vec![0.7, 0.6, 0.5, 0.5]),
            Err(Error::RowOverflow { row: 0, .. })
        ));
        assert!(matches!(
            SubKernel::new(coin(), bit(), vec![0.5]),
            Err(Error::Shape { .. })
        ));
        assert!(matches!(
            SubKernel::new(coin(), bit(), vec![f64::NAN, 0.0, 0.0, 0.0]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn compose_with_identity() {
        let f = channel();
        assert!(f.then(&identity(&bit())).unwrap().approx_eq(&f, TOL));
        assert!(identity(&coin()).then(&f).unwrap().approx_eq(&f, TOL));
    }

    #[test]
    fn compose_dirac_chain() {
        let x = FinObject::atom("X", vec!["a", "b", "c"]).unwrap();
        let ab = SubKernel::deterministic(x.clone(), x.clone(), |i| Some((i + 1) % 3));
        let chained = SubKernel::dirac(x.clone(), 0)
            .then(&ab)
            .unwrap()
            .then(&ab)
            .unwrap();
        assert!(chained.approx_eq(&SubKernel::dirac(x, 2), TOL));
    }

    #[test]
    fn compose_state_with_channel() {
        let pf = fair().then(&channel()).unwrap();
        assert!((pf.get(0, 0) - 0.55).abs() < TOL);
        assert!((pf.get(0, 1) - 0.45).abs() < TOL);
    }

    #[test]
    fn compose_mismatch_is_typed() {
        let err = channel().then(&channel()).unwrap_err();
        assert!(matches!(
            err,
            Error::ObjectMismatch {
                context: "compose",
                ..
            }
        ));
    }

    #[test]
    fn tensor_of_identities_and_failure_mass() {
        let id = identity(&coin()).tensor(&identity(&bit()));
        assert!(id.approx_eq(&identity(&coin().tensor(&bit())), TOL));

        let x = FinObject::atom("X", vec!["x"]).unwrap();
        let y = FinObject::atom("Y", vec!["y"]).unwrap();
        let s = SubKernel::state(x, vec![0.5]).unwrap();
        let t = SubKernel::state(y, vec![0.5]).unwrap();
        let st = s.tensor(&t);
        assert!((st.get(0, 0) - 0.25).abs() < TOL);
        assert!((st.fail(0) - 0.75).abs() < TOL);
    }

    #[test]
    fn tensor_with_discard_state_stays_total() {
        let unit_state = SubKernel::scalar(1.0).unwrap();
        let k = channel().tensor(&discard(&coin()).then(&unit_state).unwrap());
        assert!(is_total(&k, TOL));
    }

    #[test]
    fn copy_structure() {
        let c = copy(&bit());
        assert_eq!(c.row(0), &[1.0, 0.0, 0.0, 0.0]);
        let counit = c.then(&discard(&bit()).tensor(&identity(&bit()))).unwrap();
        assert!(counit.approx_eq(&identity(&bit()), TOL));
        // copying a Dirac state then splitting gives the diagonal joint
        for i in 0..2 {
            let joint = SubKernel::dirac(bit(), i).then(&c).unwrap();
            for k in 0..4 {
                let expected = if k == i * 2 + i { 1.0 } else { 0.0 };
                assert_eq!(joint.get(0, k), expected);
            }
            let left = project(&joint, 1, Side::First).unwrap();
            let right = project(&joint, 1, Side::Second).unwrap();
            assert!(left.approx_eq(&right, TOL));
        }
    }

    #[test]
    fn discard_marginalizes() {
        let f = SubKernel::new(coin(), bit(), vec![0.3, 0.3, 0.2, 0.8]).unwrap();
        let d = domain_of_definition(&f);
        assert!((d.get(0, 0) - 0.6).abs() < TOL);
        assert!((d.get(1, 0) - 1.0).abs() < TOL);
        assert!(is_total(&discard(&coin()), TOL));
    }

    #[test]
    fn swap_laws() {
        let ss = swap(&coin(), &bit()).then(&swap(&bit(), &coin())).unwrap();
        assert!(ss.approx_eq(&identity(&coin().tensor(&bit())), TOL));
        let unit_swap = swap(&FinObject::unit(), &coin());
        assert!(unit_swap.approx_eq(&identity(&coin()), TOL));

        let f = channel();
        let g = SubKernel::new(bit(), coin(), vec![0.3, 0.6, 1.0, 0.0]).unwrap();
        let lhs = f.tensor(&g).then(&swap(&bit(), &coin())).unwrap();
        let rhs = swap(&coin(), &bit()).then(&g.tensor(&f)).unwrap();
        assert!(lhs.approx_eq(&rhs, TOL));
    }

    #[test]
    fn compare_on_bits() {
        let mu = compare(&bit());
        assert_eq!(mu.row(0), &[1.0, 0.0]);
        assert_eq!(mu.row(1), &[0.0, 0.0]);
        assert_eq!(mu.fail(1), 1.0);
        assert!(copy(&bit())
            .then(&mu)
            .unwrap()
            .approx_eq(&identity(&bit()), TOL));
        assert!(is_deterministic(&mu, TOL));
        assert!(!is_total(&mu, TOL));
        assert!(has_deterministic_domain(&mu, TOL));
    }

    #[test]
    fn observe_matches_comparator_route() {
        for idx in 0..2 {
            let obs = observe(&coin(), idx);
            // (x ⊗ id) ; μ ; ε, with I ⊗ X = X
            let route = SubKernel::dirac(coin(), idx)
                .tensor(&identity(&coin()))
                .then(&compare(&coin()))
                .unwrap()
                .then(&discard(&coin()))
                .unwrap();
            assert!(obs.approx_eq(&route, TOL));
            assert_eq!(obs.get(idx, 0), 1.0);
            assert_eq!(obs.get(1 - idx, 0), 0.0);
            let unit = SubKernel::dirac(coin(), idx).then(&obs).unwrap();
            assert_eq!(unit.value(), 1.0);
        }
        let one = FinObject::atom("One", vec!["*"]).unwrap();
        assert!(observe(&one, 0).approx_eq(&discard(&one), TOL));
    }

    #[test]
    fn projections_and_graph() {
        let joint = SubKernel::state(bit().tensor(&bit()), vec![0.2, 0.2, 0.6, 0.0]).unwrap();
        let m = project(&joint, 1, Side::First).unwrap();
        assert!((m.get(0, 0) - 0.4).abs() < TOL);
        assert!((m.get(0, 1) - 0.6).abs() < TOL);
        assert!(matches!(
            project(&joint, 3, Side::First),
            Err(Error::BadSplit { .. })
        ));

        let f = channel();
        let gf = graph(&f);
        assert!((gf.get(0, 0) - 0.9).abs() < TOL); // (H,0)|H
        assert!((gf.get(0, 1) - 0.1).abs() < TOL); // (H,1)|H
        assert_eq!(gf.get(0, 2), 0.0);
        assert!(project(&gf, 1, Side::Second).unwrap().approx_eq(&f, TOL));
        assert!(graph(&identity(&coin())).approx_eq(&copy(&coin()), TOL));
    }

    #[test]
    fn cond_comp_examples() {
        // p ◁ g with g ignoring the (unit) input
        let p = fair();
        let joint = cond_comp(&p, &channel()).unwrap();
        let expected = [0.45, 0.05, 0.1, 0.4];
        for (k, e) in expected.iter().enumerate() {
            assert!((joint.get(0, k) - e).abs() < TOL);
        }

        // unitality with the counit
        let f = channel();
        let counit = discard(&coin().tensor(&bit()));
        assert!(cond_comp(&f, &counit).unwrap().approx_eq(&f, TOL));

        // scalar reweighting: A = I
        let s = SubKernel::new(coin(), FinObject::unit(), vec![0.5, 0.25]).unwrap();
        let sg = cond_comp(&s, &f).unwrap();
        for x in 0..2 {
            for b in 0..2 {
                assert!((sg.get(x, b) - s.get(x, 0) * f.get(x, b)).abs() < TOL);
            }
        }
        assert!(cond_comp(&f, &f).is_err());
    }

    #[test]
    fn determinism_and_totality() {
        for k in [
            copy(&coin()),
            discard(&coin()),
            swap(&coin(), &bit()),
            identity(&bit()),
        ] {
            assert!(is_deterministic(&k, TOL));
            assert!(is_total(&k, TOL));
        }
        assert!(is_total(&channel(), TOL));
        assert!(!is_deterministic(&channel(), TOL));
    }

    #[test]
    fn deterministic_domain_examples() {
        assert!(has_deterministic_domain(&channel(), TOL));
        let partial = SubKernel::new(coin(), bit(), vec![0.3, 0.3, 0.5, 0.5]).unwrap();
        assert!(!has_deterministic_domain(&partial, TOL));
    }

    #[test]
    fn as_equal_examples() {
        let x = FinObject::atom("X", vec!["x0", "x1"]).unwrap();
        let a = FinObject::atom("A", vec!["a", "a'"]).unwrap();
        let b = bit();
        let ax = a.tensor(&x);
        let g1 = SubKernel::from_fn(ax.clone(), b.clone(), |_, y| if y == 0 { 1.0 } else { 0.0 })
            .unwrap();
        // g2 differs only on inputs (a', ·)
        let g2 = SubKernel::from_fn(ax.clone(), b.clone(), |k, y| {
            let (ai, _) = (k / 2, k % 2);
            match (ai, y) {
                (0, 0) => 1.0,
                (1, 1) => 1.0,
                _ => 0.0,
            }
        })
        .unwrap();
        let dirac_a = SubKernel::deterministic(x.clone(), a.clone(), |_| Some(0));
        assert!(as_equal(&dirac_a, &g1, &g1, TOL).unwrap());
        assert!(as_equal(&dirac_a, &g1, &g2, TOL).unwrap());

        // g3 differs on a itself; f reaches a with mass .5
        let g3 = SubKernel::from_fn(ax, b, |_, y| if y == 1 { 1.0 } else { 0.0 }).unwrap();
        let half = SubKernel::deterministic(x.clone(), a.clone(), |_| Some(0));
        let half = half
            .then(&SubKernel::new(a.clone(), a.clone(), vec![0.5, 0.0, 0.0, 0.5]).unwrap())
            .unwrap();
        assert!(!as_equal(&half, &g1, &g3, TOL).unwrap());
        assert!(as_equal(&half, &g1, &channel(), TOL).is_err());
    }
}
