//! Substochastic kernels as the Kleisli category of the maybe monad over
//! finite stochastic kernels.
//!
//! A kernel `X -> Y` with failure mass is the same thing as a total kernel
//! `X -> Y + 1` putting that mass on the adjoined point `⊥`. This module
//! provides the conversions, the laxator `(X+1) ⊗ (Y+1) -> (X ⊗ Y)+1` and its
//! copy-built section, the strong Kleisli extension, and a second
//! implementation of conditionals that only ever conditions total kernels.

use crate::error::{Error, Result};
use crate::kernel::{copy, discard, identity, SubKernel};
use crate::object::{render_label, Atom, FinObject};

pub const BOTTOM: &str = "⊥";

/// A row-stochastic kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct TotalKernel(SubKernel);

impl TotalKernel {
    /// Accepts `k` when every row sums to one within `slack`; such rows are
    /// then rescaled to sum to one.
    pub fn new(k: SubKernel, slack: f64) -> Result<Self> {
        let cols = k.cols();
        let mut w = k.weights().to_vec();
        for (row, chunk) in w.chunks_mut(cols.max(1)).take(k.rows()).enumerate() {
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > slack {
                return Err(Error::NotTotal { row, sum });
            }
            chunk.iter_mut().for_each(|x| *x /= sum);
        }
        Ok(TotalKernel(SubKernel::raw(
            k.dom().clone(),
            k.cod().clone(),
            w,
        )))
    }

    pub fn kernel(&self) -> &SubKernel {
        &self.0
    }

    pub fn into_kernel(self) -> SubKernel {
        self.0
    }

    pub fn dom(&self) -> &FinObject {
        self.0.dom()
    }

    pub fn cod(&self) -> &FinObject {
        self.0.cod()
    }

    pub fn then(&self, g: &TotalKernel) -> Result<TotalKernel> {
        Ok(TotalKernel(self.0.then(&g.0)?))
    }

    pub fn tensor(&self, g: &TotalKernel) -> TotalKernel {
        TotalKernel(self.0.tensor(&g.0))
    }

    /// Structure maps and other kernels known to be total by construction.
    pub(crate) fn trusted(k: SubKernel) -> TotalKernel {
        TotalKernel(k)
    }
}

/// The object `X + 1`: the labels of `X` followed by `⊥`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointedObject {
    base: FinObject,
    object: FinObject,
}

impl PointedObject {
    pub fn new(base: &FinObject) -> Self {
        let mut labels: Vec<String> = (0..base.size()).map(|i| base.render_label(i)).collect();
        let mut bottom = BOTTOM.to_string();
        while labels.contains(&bottom) {
            bottom.push('\'');
        }
        labels.push(bottom);
        let name = if base.factors().len() > 1 {
            format!("({base})+1")
        } else {
            format!("{base}+1")
        };
        let atom = Atom::new(name, labels).expect("rendered labels of an object are distinct");
        PointedObject {
            base: base.clone(),
            object: FinObject::from_atom(atom),
        }
    }

    pub fn base(&self) -> &FinObject {
        &self.base
    }

    pub fn object(&self) -> &FinObject {
        &self.object
    }

    /// Index of `⊥` in [`PointedObject::object`].
    pub fn bottom(&self) -> usize {
        self.base.size()
    }

    pub fn bottom_label(&self) -> String {
        render_label(&self.object.label(self.bottom()))
    }
}

/// Puts the failure mass of each row on `⊥`.
pub fn to_total(f: &SubKernel) -> TotalKernel {
    let target = PointedObject::new(f.cod());
    let cols = f.cols() + 1;
    let mut w = Vec::with_capacity(f.rows() * cols);
    for x in 0..f.rows() {
        w.extend_from_slice(f.row(x));
        w.push(f.fail(x));
    }
    TotalKernel(SubKernel::raw(f.dom().clone(), target.object.clone(), w))
}

/// Drops the `⊥` column of a total kernel into `Y + 1`.
pub fn from_total(g: &TotalKernel, target: &PointedObject) -> Result<SubKernel> {
    if g.cod() != target.object() {
        return Err(Error::ObjectMismatch {
            context: "from_total",
            left: g.cod().to_string(),
            right: target.object().to_string(),
        });
    }
    let n = target.base.size();
    let mut w = Vec::with_capacity(g.dom().size() * n);
    for x in 0..g.dom().size() {
        w.extend_from_slice(&g.kernel().row(x)[..n]);
    }
    Ok(SubKernel::raw(g.dom().clone(), target.base.clone(), w))
}

/// The functor `(-)+1` on total kernels: `f + id_1`.
pub fn maybe_map(f: &TotalKernel) -> TotalKernel {
    let dom = PointedObject::new(f.dom());
    let cod = PointedObject::new(f.cod());
    let cols = cod.object.size();
    let mut w = vec![0.0; dom.object.size() * cols];
    for x in 0..f.dom().size() {
        w[x * cols..x * cols + f.cod().size()].copy_from_slice(f.kernel().row(x));
    }
    w[dom.bottom() * cols + cod.bottom()] = 1.0;
    TotalKernel(SubKernel::raw(dom.object, cod.object, w))
}

/// `l: (X+1) ⊗ (Y+1) -> (X ⊗ Y)+1`, sending any pair containing `⊥` to `⊥`.
pub fn laxator(x: &FinObject, y: &FinObject) -> TotalKernel {
    let px = PointedObject::new(x);
    let py = PointedObject::new(y);
    let pxy = PointedObject::new(&x.tensor(y));
    let (nx, ny) = (x.size(), y.size());
    let m = py.object.size();
    TotalKernel(SubKernel::deterministic(
        px.object.tensor(&py.object),
        pxy.object.clone(),
        |k| {
            let (i, j) = (k / m, k % m);
            if i < nx && j < ny {
                Some(i * ny + j)
            } else {
                Some(pxy.bottom())
            }
        },
    ))
}

/// `s = copy ; (F(π1) ⊗ F(π2))`, the section of the laxator built from
/// copying and discarding.
pub fn oplaxator(x: &FinObject, y: &FinObject) -> TotalKernel {
    let xy = x.tensor(y);
    let pxy = PointedObject::new(&xy);
    let pi1 = TotalKernel(identity(x).tensor(&discard(y)));
    let pi2 = TotalKernel(discard(x).tensor(&identity(y)));
    let lifted = maybe_map(&pi1).tensor(&maybe_map(&pi2));
    TotalKernel(copy(pxy.object()))
        .then(&lifted)
        .expect("copy codomain matches")
}

/// `d(σ) = σ*` (extension by zero) and `d(⊥) = δ⊥`.
pub fn distributive_law(
    target: &PointedObject,
    sigma: Option<&TotalKernel>,
) -> Result<TotalKernel> {
    let cols = target.object.size();
    let mut w = vec![0.0; cols];
    match sigma {
        None => w[target.bottom()] = 1.0,
        Some(s) => {
            if !s.dom().is_unit() {
                return Err(Error::NotAState {
                    dom: s.dom().to_string(),
                });
            }
            if s.cod() != target.base() {
                return Err(Error::ObjectMismatch {
                    context: "distributive law",
                    left: s.cod().to_string(),
                    right: target.base().to_string(),
                });
            }
            w[..target.bottom()].copy_from_slice(s.kernel().row(0));
        }
    }
    Ok(TotalKernel(SubKernel::raw(
        FinObject::unit(),
        target.object.clone(),
        w,
    )))
}

/// Strong Kleisli extension `g*: X ⊗ (Y+1) -> Z` of `g: X ⊗ Y -> Z`, where
/// `X` is the first `split` domain factors. Inputs with `⊥` fail.
pub fn strong_kleisli_extend(g: &SubKernel, split: usize) -> Result<SubKernel> {
    let (x, y) = g.dom().split_at(split)?;
    let py = PointedObject::new(&y);
    let (ny, m) = (y.size(), py.object.size());
    let cols = g.cols();
    let dom = x.tensor(&py.object);
    let mut w = vec![0.0; dom.size() * cols];
    for xi in 0..x.size() {
        for yi in 0..ny {
            let dst = (xi * m + yi) * cols;
            w[dst..dst + cols].copy_from_slice(g.row(xi * ny + yi));
        }
    }
    Ok(SubKernel::raw(dom, g.cod().clone(), w))
}

/// Restriction of `g: X ⊗ (Y+1) -> Z` to `X ⊗ Y`, whose Kleisli extension
/// can replace `g` in any conditional composition followed by the laxator.
pub fn split_conditional(g: &SubKernel, y: &PointedObject) -> Result<SubKernel> {
    let factors = g.dom().factors();
    let last = factors.last().map(|a| FinObject::from_atom(a.clone()));
    if last.as_ref() != Some(y.object()) {
        return Err(Error::ObjectMismatch {
            context: "split_conditional",
            left: g.dom().to_string(),
            right: y.object().to_string(),
        });
    }
    let (x, _) = g.dom().split_at(factors.len() - 1)?;
    let (ny, m) = (y.base.size(), y.object.size());
    let cols = g.cols();
    let mut w = Vec::with_capacity(x.size() * ny * cols);
    for xi in 0..x.size() {
        for yi in 0..ny {
            w.extend_from_slice(g.row(xi * m + yi));
        }
    }
    Ok(SubKernel::raw(x.tensor(&y.base), g.cod().clone(), w))
}

/// Conditional of a total kernel `X -> A ⊗ B` in the base category: divide
/// each block by its marginal, uniform where the marginal vanishes.
pub fn stoch_conditional(j: &TotalKernel, split: usize, zero_mass_tol: f64) -> Result<TotalKernel> {
    let (a, b) = j.cod().split_at(split)?;
    let (na, nb) = (a.size(), b.size());
    let dom = j.dom().tensor(&a);
    let mut w = vec![0.0; dom.size() * nb];
    for x in 0..j.dom().size() {
        let row = j.kernel().row(x);
        for ai in 0..na {
            let block = &row[ai * nb..(ai + 1) * nb];
            let out = &mut w[(x * na + ai) * nb..(x * na + ai + 1) * nb];
            let marginal: f64 = block.iter().sum();
            for (o, v) in out.iter_mut().zip(block) {
                *o = if marginal > zero_mass_tol {
                    v / marginal
                } else {
                    1.0 / nb as f64
                };
            }
        }
    }
    Ok(TotalKernel(SubKernel::raw(dom, b, w)))
}

/// Conditional of `f: X -> Y ⊗ Z` computed through total kernels only:
/// push `f` into `(Y+1) ⊗ (Z+1)` with the oplaxator, condition there, restrict
/// away the `⊥` input, and drop the `⊥` output.
pub fn conditional_via_base(f: &SubKernel, split: usize, zero_mass_tol: f64) -> Result<SubKernel> {
    let (y, z) = f.cod().split_at(split)?;
    let py = PointedObject::new(&y);
    let pz = PointedObject::new(&z);
    let lifted = to_total(f).then(&oplaxator(&y, &z))?;
    let c = stoch_conditional(&lifted, 1, zero_mass_tol)?;
    let d = split_conditional(c.kernel(), &py)?;
    from_total(&TotalKernel(d), &pz)
}

/// Conditional composition in the Kleisli category, `f ◁* g`, for
/// `f: X -> Y+1` and `g: X ⊗ Y -> Z+1`.
pub fn kleisli_cond_comp(
    f: &TotalKernel,
    g: &TotalKernel,
    y: &PointedObject,
    z: &PointedObject,
) -> Result<TotalKernel> {
    let sub = crate::kernel::cond_comp(&from_total(f, y)?, &from_total(g, z)?)?;
    Ok(to_total(&sub))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{cond_comp, is_deterministic, is_total};

    const TOL: f64 = 1e-12;

    fn obj(name: &str, n: usize) -> FinObject {
        let labels: Vec<String> = (0..n)
            .map(|i| format!("{}{}", name.to_lowercase(), i))
            .collect();
        FinObject::atom(name, labels).unwrap()
    }

    #[test]
    fn pointed_object_appends_bottom() {
        let x = obj("X", 3);
        let px = PointedObject::new(&x);
        assert_eq!(px.object().size(), 4);
        assert_eq!(px.bottom_label(), "⊥");
        let odd = FinObject::atom("Odd", vec!["⊥"]).unwrap();
        let p = PointedObject::new(&odd);
        assert_eq!(p.object().size(), 2);
        assert_ne!(p.bottom_label(), "⊥");
    }

    #[test]
    fn to_total_and_back() {
        let y = FinObject::atom("Y", vec!["x", "y"]).unwrap();
        let x = obj("A", 2);
        let f = SubKernel::new(x.clone(), y.clone(), vec![0.3, 0.3, 0.5, 0.5]).unwrap();
        let t = to_total(&f);
        assert!((t.kernel().get(0, 2) - 0.4).abs() < TOL);
        assert_eq!(t.kernel().get(1, 2), 0.0);
        assert!(is_total(t.kernel(), TOL));
        let back = from_total(&t, &PointedObject::new(&y)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn laxator_examples() {
        let (x, y) = (obj("X", 2), obj("Y", 2));
        let l = laxator(&x, &y);
        let (px, py) = (PointedObject::new(&x), PointedObject::new(&y));
        let pair = px.object().tensor(py.object());
        let cod = l.cod().clone();
        let ab = pair.index_of(&["x0", "y1"]).unwrap();
        assert_eq!(l.kernel().get(ab, cod.index_of(&["(x0,y1)"]).unwrap()), 1.0);
        let a_bot = pair.index_of(&["x0", "⊥"]).unwrap();
        assert_eq!(l.kernel().get(a_bot, cod.index_of(&["⊥"]).unwrap()), 1.0);
        assert!(is_deterministic(l.kernel(), TOL));
        assert!(is_total(l.kernel(), TOL));
    }

    #[test]
    fn oplaxator_examples() {
        let (x, y) = (obj("X", 2), obj("Y", 3));
        let s = oplaxator(&x, &y);
        let pxy = PointedObject::new(&x.tensor(&y));
        let target = s.cod().clone();
        let i = pxy.object().index_of(&["(x1,y2)"]).unwrap();
        assert_eq!(
            s.kernel().get(i, target.index_of(&["x1", "y2"]).unwrap()),
            1.0
        );
        let b = pxy.bottom();
        assert_eq!(
            s.kernel().get(b, target.index_of(&["⊥", "⊥"]).unwrap()),
            1.0
        );
        let sl = s.then(&laxator(&x, &y)).unwrap();
        assert!(sl.kernel().approx_eq(&identity(pxy.object()), TOL));
    }

    #[test]
    fn distributive_law_examples() {
        let x = obj("X", 2);
        let px = PointedObject::new(&x);
        let bot = distributive_law(&px, None).unwrap();
        assert_eq!(bot.kernel().row(0), &[0.0, 0.0, 1.0]);
        let dirac = TotalKernel::new(SubKernel::dirac(x.clone(), 1), TOL).unwrap();
        assert_eq!(
            distributive_law(&px, Some(&dirac)).unwrap().kernel().row(0),
            &[0.0, 1.0, 0.0]
        );
        let s = TotalKernel::new(SubKernel::state(x, vec![0.3, 0.7]).unwrap(), TOL).unwrap();
        assert_eq!(
            distributive_law(&px, Some(&s)).unwrap().kernel().row(0),
            &[0.3, 0.7, 0.0]
        );
    }

    #[test]
    fn kleisli_extension_fails_on_bottom() {
        let (x, y, z) = (obj("X", 2), obj("Y", 2), obj("Z", 2));
        let g = SubKernel::from_fn(
            x.tensor(&y),
            z,
            |i, j| if (i + j) % 2 == 0 { 1.0 } else { 0.0 },
        )
        .unwrap();
        let ext = strong_kleisli_extend(&g, 1).unwrap();
        let py = PointedObject::new(&y);
        for xi in 0..2 {
            assert_eq!(ext.row_sum(xi * 3 + py.bottom()), 0.0);
            for yi in 0..2 {
                assert!((ext.row_sum(xi * 3 + yi) - 1.0).abs() < TOL);
            }
        }
        // restricting the extension gives g back
        assert_eq!(split_conditional(&ext, &py).unwrap(), g);
    }

    #[test]
    fn kleisli_extension_law_on_fixture() {
        // (f ◁* g) = (f ◁ g*) ; l on 2x2x2 objects
        let (x, y, z) = (obj("X", 2), obj("Y", 2), obj("Z", 2));
        let (py, pz) = (PointedObject::new(&y), PointedObject::new(&z));
        let f_sub = SubKernel::new(x.clone(), y.clone(), vec![0.5, 0.2, 0.0, 1.0]).unwrap();
        let g_sub = SubKernel::new(
            x.tensor(&y),
            z.clone(),
            vec![0.3, 0.3, 1.0, 0.0, 0.0, 0.0, 0.25, 0.75],
        )
        .unwrap();
        let f = to_total(&f_sub);
        let g = to_total(&g_sub);
        let lhs = kleisli_cond_comp(&f, &g, &py, &pz).unwrap();
        let g_ext = to_total(&strong_kleisli_extend(&g_sub, 1).unwrap());
        let rhs = TotalKernel::trusted(cond_comp(f.kernel(), g_ext.kernel()).unwrap())
            .then(&laxator(&y, &z))
            .unwrap();
        assert!(lhs.kernel().approx_eq(rhs.kernel(), TOL));
    }

    #[test]
    fn split_conditional_law_with_nonzero_bottom_row() {
        let (x, y, z) = (obj("X", 2), obj("Y", 2), obj("Z", 2));
        let (py, pz) = (PointedObject::new(&y), PointedObject::new(&z));
        let f = to_total(&SubKernel::new(x.clone(), y.clone(), vec![0.5, 0.2, 0.1, 0.6]).unwrap());
        // g: X ⊗ (Y+1) -> Z+1 with arbitrary ⊥-input rows
        let g = TotalKernel::new(
            SubKernel::from_fn(x.tensor(py.object()), pz.object().clone(), |i, j| {
                [0.2, 0.3, 0.5][(i + j) % 3]
            })
            .unwrap(),
            TOL,
        )
        .unwrap();
        let h = split_conditional(g.kernel(), &py).unwrap();
        let h_ext = TotalKernel::new(
            to_total(
                &strong_kleisli_extend(&from_total(&TotalKernel::trusted(h), &pz).unwrap(), 1)
                    .unwrap(),
            )
            .into_kernel(),
            TOL,
        )
        .unwrap();
        let l = laxator(&y, &z);
        let lhs = TotalKernel::trusted(cond_comp(f.kernel(), g.kernel()).unwrap())
            .then(&l)
            .unwrap();
        let rhs = TotalKernel::trusted(cond_comp(f.kernel(), h_ext.kernel()).unwrap())
            .then(&l)
            .unwrap();
        assert!(lhs.kernel().approx_eq(rhs.kernel(), TOL));
    }

    #[test]
    fn conditional_via_base_matches_on_positive_mass() {
        let x = obj("X", 2);
        let yz = obj("Y", 2).tensor(&obj("Z", 2));
        let f = SubKernel::new(x, yz, vec![0.1, 0.2, 0.3, 0.0, 0.0, 0.0, 0.5, 0.5]).unwrap();
        let c = conditional_via_base(&f, 1, 1e-12).unwrap();
        let direct =
            crate::inference::conditional(&f, 1, &crate::inference::Conditioning::default())
                .unwrap();
        let marginal = crate::kernel::project(&f, 1, crate::kernel::Side::First).unwrap();
        for x in 0..2 {
            for yi in 0..2 {
                if marginal.get(x, yi) > 1e-12 {
                    for zi in 0..2 {
                        assert!((c.get(x * 2 + yi, zi) - direct.get(x * 2 + yi, zi)).abs() < TOL);
                    }
                }
            }
        }
        assert!(cond_comp(&marginal, &c).unwrap().approx_eq(&f, TOL));
    }

    #[test]
    fn conditional_via_base_on_all_fail() {
        let x = obj("X", 2);
        let yz = obj("Y", 2).tensor(&obj("Z", 3));
        let f = SubKernel::new(x, yz, vec![0.0; 12]).unwrap();
        let c = conditional_via_base(&f, 1, 1e-12).unwrap();
        let marginal = crate::kernel::project(&f, 1, crate::kernel::Side::First).unwrap();
        assert!(cond_comp(&marginal, &c).unwrap().approx_eq(&f, TOL));
        // base convention row: uniform over Z+1, ⊥ column dropped
        for k in 0..4 {
            for zi in 0..3 {
                assert!((c.get(k, zi) - 0.25).abs() < TOL);
            }
        }
    }

    #[test]
    fn total_kernel_rejects_partial_rows() {
        let x = obj("X", 2);
        let k = SubKernel::new(x.clone(), x, vec![0.5, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            TotalKernel::new(k, 1e-12),
            Err(Error::NotTotal { row: 0, .. })
        ));
    }
}
