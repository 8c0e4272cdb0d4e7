use std::fmt;

use thiserror::Error;

use super::model::Model;
use crate::kernel::{self, SubKernel};
use crate::object::{render_label, FinObject, Label};

/// A string diagram as a tree of sequential and parallel composites.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    /// A named kernel, state, or diagram of the model.
    Gen(String),
    Id(FinObject),
    Seq(Box<Term>, Box<Term>),
    Par(Box<Term>, Box<Term>),
    Copy(FinObject),
    Discard(FinObject),
    Swap(FinObject, FinObject),
    Compare(FinObject),
    /// Exact observation of a label: the predicate `X -> I` that holds on it.
    Observe(FinObject, Label),
}

impl Term {
    pub fn gen(name: impl Into<String>) -> Term {
        Term::Gen(name.into())
    }

    pub fn seq(a: Term, b: Term) -> Term {
        Term::Seq(Box::new(a), Box::new(b))
    }

    pub fn par(a: Term, b: Term) -> Term {
        Term::Par(Box::new(a), Box::new(b))
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Seq(a, b) | Term::Par(a, b) => 1 + a.depth().max(b.depth()),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypeError {
    #[error(
        "boundary mismatch in `{term}`: left side ends at `{left}`, right side starts at `{right}`"
    )]
    Boundary {
        term: String,
        left: String,
        right: String,
    },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("label `{label}` does not belong to `{object}`")]
    UnknownLabel { object: String, label: String },
}

/// Assigns a domain and codomain to `term`, bottom-up.
pub fn typecheck(term: &Term, model: &Model) -> Result<(FinObject, FinObject), TypeError> {
    Ok(match term {
        Term::Gen(name) => {
            let (d, c) = model
                .boundary(name)
                .ok_or_else(|| TypeError::UnknownGenerator(name.clone()))?;
            (d.clone(), c.clone())
        }
        Term::Id(x) => (x.clone(), x.clone()),
        Term::Seq(a, b) => {
            let (ad, ac) = typecheck(a, model)?;
            let (bd, bc) = typecheck(b, model)?;
            if ac != bd {
                return Err(TypeError::Boundary {
                    term: term.to_string(),
                    left: ac.to_string(),
                    right: bd.to_string(),
                });
            }
            (ad, bc)
        }
        Term::Par(a, b) => {
            let (ad, ac) = typecheck(a, model)?;
            let (bd, bc) = typecheck(b, model)?;
            (ad.tensor(&bd), ac.tensor(&bc))
        }
        Term::Copy(x) => (x.clone(), x.tensor(x)),
        Term::Discard(x) => (x.clone(), FinObject::unit()),
        Term::Swap(x, y) => (x.tensor(y), y.tensor(x)),
        Term::Compare(x) => (x.tensor(x), x.clone()),
        Term::Observe(x, label) => {
            observed_index(x, label)?;
            (x.clone(), FinObject::unit())
        }
    })
}

pub(crate) fn observed_index(x: &FinObject, label: &Label) -> Result<usize, TypeError> {
    x.index_of(label).ok_or_else(|| TypeError::UnknownLabel {
        object: x.to_string(),
        label: render_label(label),
    })
}

/// Interprets `term` as a kernel: sequential composites compose, parallel
/// composites tensor, so internal wires are summed over.
pub fn evaluate(term: &Term, model: &Model) -> Result<SubKernel, TypeError> {
    typecheck(term, model)?;
    eval_checked(term, model)
}

fn eval_checked(term: &Term, model: &Model) -> Result<SubKernel, TypeError> {
    Ok(match term {
        Term::Gen(name) => model
            .kernel_of(name)
            .ok_or_else(|| TypeError::UnknownGenerator(name.clone()))?,
        Term::Id(x) => kernel::identity(x),
        Term::Seq(a, b) => eval_checked(a, model)?
            .then(&eval_checked(b, model)?)
            .expect("typechecked"),
        Term::Par(a, b) => eval_checked(a, model)?.tensor(&eval_checked(b, model)?),
        Term::Copy(x) => kernel::copy(x),
        Term::Discard(x) => kernel::discard(x),
        Term::Swap(x, y) => kernel::swap(x, y),
        Term::Compare(x) => kernel::compare(x),
        Term::Observe(x, label) => kernel::observe(x, observed_index(x, label)?),
    })
}

fn write_label(f: &mut fmt::Formatter<'_>, label: &Label) -> fmt::Result {
    if label.len() == 1 {
        f.write_str(&label[0])
    } else {
        write!(f, "({})", label.join(","))
    }
}

impl Term {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Term::Seq(a, b) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 0)?;
                f.write_str(" ; ")?;
                b.fmt_prec(f, 1)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Term::Par(a, b) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1)?;
                f.write_str(" * ")?;
                b.fmt_prec(f, 2)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Term::Gen(name) => f.write_str(name),
            Term::Id(x) => write!(f, "id[{x}]"),
            Term::Copy(x) => write!(f, "copy[{x}]"),
            Term::Discard(x) => write!(f, "discard[{x}]"),
            Term::Swap(x, y) => write!(f, "swap[{x}, {y}]"),
            Term::Compare(x) => write!(f, "compare[{x}]"),
            Term::Observe(x, label) => {
                write!(f, "observe[{x} = ")?;
                write_label(f, label)?;
                f.write_str("]")
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
