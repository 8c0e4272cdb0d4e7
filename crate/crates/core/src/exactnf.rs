//! Normal forms for kernels built from total kernels and exact observations.
//!
//! Every such kernel `f: X -> Y` is written as `(h ; z°) ◁ g`: a total
//! evidence channel `h: X -> W`, an observed point `z` of `W`, and a total
//! result channel `g: X -> Y`, so that `f(y|x) = h(z|x) · g(y|x)`.

use thiserror::Error;

use crate::diagram::{typecheck, Model, Term, TypeError};
use crate::error::Error as KernelError;
use crate::inference::{invert_along, Conditioning};
use crate::kernel::{self, SubKernel};
use crate::maybecat::TotalKernel;
use crate::object::FinObject;

/// Row sums of the composed result channel are accepted this far from one
/// before being rescaled.
const RESULT_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    h: TotalKernel,
    z: usize,
    g: TotalKernel,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NfError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("generator `{name}` is not total: row {row} sums to {sum}")]
    NotTotal { name: String, row: usize, sum: f64 },
    #[error("comparators have no normal form over total kernels and observations")]
    Comparator,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl NormalForm {
    /// Assembles a normal form, checking that the pieces fit together.
    pub fn new(h: TotalKernel, z: usize, g: TotalKernel) -> Result<Self, KernelError> {
        if h.dom() != g.dom() {
            return Err(KernelError::ObjectMismatch {
                context: "normal form inputs",
                left: h.dom().to_string(),
                right: g.dom().to_string(),
            });
        }
        if z >= h.cod().size() {
            return Err(KernelError::UnknownLabel {
                object: h.cod().to_string(),
                label: z.to_string(),
            });
        }
        Ok(NormalForm { h, z, g })
    }

    pub fn h(&self) -> &TotalKernel {
        &self.h
    }

    pub fn z(&self) -> usize {
        self.z
    }

    pub fn g(&self) -> &TotalKernel {
        &self.g
    }

    pub fn dom(&self) -> &FinObject {
        self.g.dom()
    }

    pub fn cod(&self) -> &FinObject {
        self.g.cod()
    }

    pub fn evidence(&self) -> &FinObject {
        self.h.cod()
    }

    /// `h(z|x)`.
    pub fn success(&self, x: usize) -> f64 {
        self.h.kernel().get(x, self.z)
    }

    pub fn successes(&self) -> Vec<f64> {
        (0..self.dom().size()).map(|x| self.success(x)).collect()
    }
}

pub fn nf_of_total(f: &TotalKernel) -> NormalForm {
    NormalForm {
        h: TotalKernel::trusted(kernel::discard(f.dom())),
        z: 0,
        g: f.clone(),
    }
}

/// The observation of label `idx` on `x`.
pub fn nf_of_observe(x: &FinObject, idx: usize) -> Result<NormalForm, KernelError> {
    NormalForm::new(
        TotalKernel::trusted(kernel::identity(x)),
        idx,
        TotalKernel::trusted(kernel::discard(x)),
    )
}

pub fn nf_tensor(a: &NormalForm, b: &NormalForm) -> NormalForm {
    NormalForm {
        h: a.h.tensor(&b.h),
        z: a.z * b.evidence().size() + b.z,
        g: a.g.tensor(&b.g),
    }
}

/// Normal form of `a ; b`. The evidence of `b` is pulled back along the
/// result channel of `a`, and the result channel becomes the inversion of
/// `b`'s evidence channel evaluated at its observed point, followed by
/// `b`'s result channel.
pub fn nf_compose(a: &NormalForm, b: &NormalForm) -> Result<NormalForm, KernelError> {
    if a.cod() != b.dom() {
        return Err(KernelError::ObjectMismatch {
            context: "normal form composition",
            left: a.cod().to_string(),
            right: b.dom().to_string(),
        });
    }
    let x = a.dom();
    let pulled = a.g.kernel().then(b.h.kernel())?;
    let h = kernel::copy(x).then(&a.h.kernel().tensor(&pulled))?;
    let w2 = b.evidence();
    let inv = invert_along(b.h.kernel(), a.g.kernel(), &Conditioning::default())?;
    let at_z = kernel::identity(x).tensor(&SubKernel::dirac(w2.clone(), b.z));
    let g = at_z.then(&inv)?.then(b.g.kernel())?;
    Ok(NormalForm {
        h: TotalKernel::trusted(h),
        z: a.z * w2.size() + b.z,
        g: TotalKernel::new(g, RESULT_SLACK)?,
    })
}

/// Folds a term of total generators and observations into a normal form.
/// Named diagrams are expanded.
pub fn nf_from_term(term: &Term, model: &Model) -> Result<NormalForm, NfError> {
    typecheck(term, model)?;
    fold(term, model)
}

fn total(name: &str, k: SubKernel) -> Result<TotalKernel, NfError> {
    TotalKernel::new(k, kernel::DEFAULT_SLACK).map_err(|e| match e {
        KernelError::NotTotal { row, sum } => NfError::NotTotal {
            name: name.to_string(),
            row,
            sum,
        },
        other => NfError::Kernel(other),
    })
}

fn fold(term: &Term, model: &Model) -> Result<NormalForm, NfError> {
    let structural = |k: SubKernel| Ok(nf_of_total(&TotalKernel::trusted(k)));
    match term {
        Term::Gen(name) => {
            if let Some(d) = model.diagrams().get(name) {
                return fold(&d.term, model);
            }
            let k = model
                .kernel_of(name)
                .ok_or_else(|| TypeError::UnknownGenerator(name.clone()))?;
            Ok(nf_of_total(&total(name, k)?))
        }
        Term::Id(x) => structural(kernel::identity(x)),
        Term::Copy(x) => structural(kernel::copy(x)),
        Term::Discard(x) => structural(kernel::discard(x)),
        Term::Swap(x, y) => structural(kernel::swap(x, y)),
        Term::Compare(_) => Err(NfError::Comparator),
        Term::Observe(x, label) => {
            let idx = x.require_index(label)?;
            Ok(nf_of_observe(x, idx)?)
        }
        Term::Seq(a, b) => Ok(nf_compose(&fold(a, model)?, &fold(b, model)?)?),
        Term::Par(a, b) => Ok(nf_tensor(&fold(a, model)?, &fold(b, model)?)),
    }
}

/// `f(y|x) = h(z|x) · g(y|x)`.
pub fn nf_denote(nf: &NormalForm) -> SubKernel {
    let cols = nf.cod().size();
    let mut w = nf.g.kernel().weights().to_vec();
    for (x, row) in w.chunks_mut(cols.max(1)).take(nf.dom().size()).enumerate() {
        let s = nf.success(x);
        row.iter_mut().for_each(|v| *v *= s);
    }
    SubKernel::raw(nf.dom().clone(), nf.cod().clone(), w)
}

/// The result channel, which normalises the denotation wherever the
/// success mass is positive.
pub fn nf_normalization(nf: &NormalForm) -> TotalKernel {
    nf.g.clone()
}
