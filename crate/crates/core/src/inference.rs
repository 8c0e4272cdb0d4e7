//! Conditionals, Bayesian inversion, normalisation and belief updates.
//!
//! Conditionals and normalisations are only determined almost surely: on
//! inputs whose conditioning mass is zero any row works. [`Convention`] picks
//! the representative used on those rows.

use crate::error::{Error, Result};
use crate::kernel::{self, cond_comp, copy, identity, SubKernel};

/// Representative row used where the conditioning mass is zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Convention {
    /// Uniform over the output labels; rows stay total.
    #[default]
    UniformFill,
    /// The empty subdistribution.
    ZeroFill,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conditioning {
    pub convention: Convention,
    /// Masses at or below this count as zero.
    pub zero_mass_tol: f64,
}

impl Default for Conditioning {
    fn default() -> Self {
        Conditioning {
            convention: Convention::UniformFill,
            zero_mass_tol: 1e-12,
        }
    }
}

impl Conditioning {
    fn fill(&self, row: &mut [f64]) {
        let v = match self.convention {
            Convention::UniformFill if !row.is_empty() => 1.0 / row.len() as f64,
            _ => 0.0,
        };
        row.iter_mut().for_each(|w| *w = v);
    }
}

/// Conditional `c: X ⊗ Y -> Z` of `f: X -> Y ⊗ Z`, where `Y` is the first
/// `split` codomain factors, so that `f = (f ; π1) ◁ c`.
pub fn conditional(f: &SubKernel, split: usize, cfg: &Conditioning) -> Result<SubKernel> {
    let (y, z) = f.cod().split_at(split)?;
    let (ny, nz) = (y.size(), z.size());
    let mut out = vec![0.0; f.rows() * ny * nz];
    for x in 0..f.rows() {
        let row = f.row(x);
        for yi in 0..ny {
            let src = &row[yi * nz..(yi + 1) * nz];
            let dst = &mut out[(x * ny + yi) * nz..(x * ny + yi + 1) * nz];
            let m: f64 = src.iter().sum();
            if m > cfg.zero_mass_tol {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = s / m;
                }
            } else {
                cfg.fill(dst);
            }
        }
    }
    Ok(SubKernel::raw(f.dom().tensor(&y), z, out))
}

/// Inversion of `g: Y -> Z` along the family of states `f: X -> Y`, giving
/// `X ⊗ Z -> Y`; it is the conditional of `f ; copy ; (g ⊗ id)`.
pub fn invert_along(g: &SubKernel, f: &SubKernel, cfg: &Conditioning) -> Result<SubKernel> {
    let y = g.dom();
    let joint = f.then(&copy(y))?.then(&g.tensor(&identity(y)))?;
    conditional(&joint, g.cod().factors().len(), cfg)
}

/// Bayesian inversion `g†(p): Y -> X` of `g: X -> Y` with respect to the
/// state `p`.
pub fn bayes_invert(g: &SubKernel, p: &SubKernel, cfg: &Conditioning) -> Result<SubKernel> {
    require_state(p)?;
    invert_along(g, p, cfg)
}

/// Rowwise division by the success mass.
pub fn normalize(f: &SubKernel, cfg: &Conditioning) -> SubKernel {
    let cols = f.cols();
    let mut out = f.weights().to_vec();
    for row in out.chunks_mut(cols.max(1)).take(f.rows()) {
        let s: f64 = row.iter().sum();
        if s > cfg.zero_mass_tol {
            row.iter_mut().for_each(|w| *w /= s);
        } else {
            cfg.fill(row);
        }
    }
    SubKernel::raw(f.dom().clone(), f.cod().clone(), out)
}

/// Pearl's update `p ◁ (f ; q)` of the prior `p` on the predicate `q`
/// observed through `f`; optionally renormalised.
pub fn pearl_update(
    p: &SubKernel,
    f: &SubKernel,
    q: &SubKernel,
    renorm: bool,
    cfg: &Conditioning,
) -> Result<SubKernel> {
    require_state(p)?;
    require_predicate(q)?;
    let likelihood = f.then(q)?;
    let raw = cond_comp(p, &likelihood)?;
    Ok(if renorm { normalize(&raw, cfg) } else { raw })
}

/// Jeffrey's update `t ; f†(p)`.
pub fn jeffrey_update(
    p: &SubKernel,
    f: &SubKernel,
    t: &SubKernel,
    cfg: &Conditioning,
) -> Result<SubKernel> {
    require_state(t)?;
    t.then(&bayes_invert(f, p, cfg)?)
}

/// Probability `(p ; f ; q)(*)` of the predicate under the prediction.
pub fn validity(p: &SubKernel, f: &SubKernel, q: &SubKernel) -> Result<f64> {
    require_state(p)?;
    require_predicate(q)?;
    Ok(p.then(f)?.then(q)?.value())
}

/// `Σ s(x) ln(s(x)/t(x))` for total states `s`, `t` on the same object.
pub fn kl_divergence(s: &SubKernel, t: &SubKernel, tol: f64) -> Result<f64> {
    require_state(s)?;
    require_state(t)?;
    if s.cod() != t.cod() {
        return Err(Error::ObjectMismatch {
            context: "KL divergence",
            left: s.cod().to_string(),
            right: t.cod().to_string(),
        });
    }
    for k in [s, t] {
        if !kernel::is_total(k, tol) {
            return Err(Error::NotTotal {
                row: 0,
                sum: k.row_sum(0),
            });
        }
    }
    let mut acc = 0.0;
    for (a, b) in s.row(0).iter().zip(t.row(0)) {
        if *a == 0.0 {
            continue;
        }
        if *b == 0.0 {
            return Err(Error::DivergenceUndefined);
        }
        acc += a * (a / b).ln();
    }
    Ok(acc)
}

fn require_state(p: &SubKernel) -> Result<()> {
    if p.is_state() {
        Ok(())
    } else {
        Err(Error::NotAState {
            dom: p.dom().to_string(),
        })
    }
}

fn require_predicate(q: &SubKernel) -> Result<()> {
    if q.cod().is_unit() {
        Ok(())
    } else {
        Err(Error::NotAPredicate {
            cod: q.cod().to_string(),
        })
    }
}

/// Conditional composition where the second kernel is typed `A ⊗ X -> B`.
pub fn cond_comp_ax(f: &SubKernel, g: &SubKernel) -> Result<SubKernel> {
    let reorder = kernel::swap(f.dom(), f.cod());
    cond_comp(f, &reorder.then(g)?)
}

/// Reorders a kernel `X ⊗ Y -> Z` (`X` being the first `split` factors) to
/// `Y ⊗ X -> Z`.
pub fn swap_inputs(g: &SubKernel, split: usize) -> Result<SubKernel> {
    let (x, y) = g.dom().split_at(split)?;
    kernel::swap(&y, &x).then(g)
}
