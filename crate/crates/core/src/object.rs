//! Finite objects: ordered label sets built as flat tensors of named atoms.
//!
//! The tensor product is strict. An object is a list of atomic factors, its
//! labels are the cartesian product of the factors' labels in row-major order
//! (last factor varies fastest), and the unit `I` is the empty list with the
//! single empty label.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A label of a (possibly composite) object: one atomic label per factor.
pub type Label = Vec<String>;

#[derive(Debug)]
struct AtomData {
    name: String,
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

/// A named atomic object with distinct, ordered labels.
#[derive(Clone, Debug)]
pub struct Atom(Arc<AtomData>);

impl Atom {
    pub fn new<S: Into<String>>(name: impl Into<String>, labels: Vec<S>) -> Result<Self> {
        let name = name.into();
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel {
                    object: name,
                    label: l.clone(),
                });
            }
        }
        Ok(Atom(Arc::new(AtomData {
            name,
            labels,
            index,
        })))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn labels(&self) -> &[String] {
        &self.0.labels
    }

    pub fn size(&self) -> usize {
        self.0.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.index.get(label).copied()
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.name == other.0.name && self.0.labels == other.0.labels)
    }
}

impl Eq for Atom {}

/// A finite object: a strict tensor of atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinObject {
    factors: Arc<[Atom]>,
}

impl FinObject {
    /// The monoidal unit `I`.
    pub fn unit() -> Self {
        FinObject {
            factors: Arc::from(Vec::new()),
        }
    }

    pub fn atom<S: Into<String>>(name: impl Into<String>, labels: Vec<S>) -> Result<Self> {
        Ok(Self::from_atom(Atom::new(name, labels)?))
    }

    pub fn from_atom(atom: Atom) -> Self {
        FinObject {
            factors: Arc::from(vec![atom]),
        }
    }

    pub fn from_factors(factors: Vec<Atom>) -> Self {
        FinObject {
            factors: Arc::from(factors),
        }
    }

    pub fn factors(&self) -> &[Atom] {
        &self.factors
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    /// Number of labels.
    pub fn size(&self) -> usize {
        self.factors.iter().map(Atom::size).product()
    }

    pub fn tensor(&self, other: &FinObject) -> FinObject {
        if self.is_unit() {
            return other.clone();
        }
        if other.is_unit() {
            return self.clone();
        }
        let mut factors = self.factors.to_vec();
        factors.extend(other.factors.iter().cloned());
        FinObject::from_factors(factors)
    }

    /// Splits the factor list after `k` factors.
    pub fn split_at(&self, k: usize) -> Result<(FinObject, FinObject)> {
        if k > self.factors.len() {
            return Err(Error::BadSplit {
                object: self.to_string(),
                split: k,
            });
        }
        Ok((
            FinObject::from_factors(self.factors[..k].to_vec()),
            FinObject::from_factors(self.factors[k..].to_vec()),
        ))
    }

    /// Per-factor positions of the label at `idx`.
    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, atom) in out.iter_mut().zip(self.factors.iter()).rev() {
            let n = atom.size();
            *slot = idx % n;
            idx /= n;
        }
        out
    }

    pub fn label(&self, idx: usize) -> Label {
        self.coords(idx)
            .into_iter()
            .zip(self.factors.iter())
            .map(|(c, a)| a.labels()[c].clone())
            .collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        (0..self.size()).map(|i| self.label(i)).collect()
    }

    pub fn index_of<S: AsRef<str>>(&self, label: &[S]) -> Option<usize> {
        if label.len() != self.factors.len() {
            return None;
        }
        let mut idx = 0;
        for (atom, part) in self.factors.iter().zip(label) {
            idx = idx * atom.size() + atom.index_of(part.as_ref())?;
        }
        Some(idx)
    }

    /// Like [`FinObject::index_of`] but reports an unknown-label error.
    pub fn require_index<S: AsRef<str>>(&self, label: &[S]) -> Result<usize> {
        self.index_of(label).ok_or_else(|| Error::UnknownLabel {
            object: self.to_string(),
            label: render_label(label),
        })
    }

    /// `H` for atomic labels, `(H,0)` for composite ones, `()` for the unit.
    pub fn render_label(&self, idx: usize) -> String {
        render_label(&self.label(idx))
    }
}

pub fn render_label<S: AsRef<str>>(label: &[S]) -> String {
    match label {
        [single] => single.as_ref().to_string(),
        parts => {
            let inner: Vec<&str> = parts.iter().map(AsRef::as_ref).collect();
            format!("({})", inner.join(","))
        }
    }
}

impl fmt::Display for FinObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return f.write_str("I");
        }
        let names: Vec<&str> = self.factors.iter().map(Atom::name).collect();
        f.write_str(&names.join("*"))
    }
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

    #[test]
    fn unit_has_one_empty_label() {
        let i = FinObject::unit();
        assert_eq!(i.size(), 1);
        assert_eq!(i.labels(), vec![Vec::<String>::new()]);
        assert_eq!(i.render_label(0), "()");
        assert_eq!(i.index_of::<&str>(&[]), Some(0));
    }

    #[test]
    fn tensor_is_row_major() {
        let cb = coin().tensor(&bit());
        assert_eq!(cb.size(), 4);
        let labels: Vec<String> = (0..4).map(|i| cb.render_label(i)).collect();
        assert_eq!(labels, ["(H,0)", "(H,1)", "(T,0)", "(T,1)"]);
        assert_eq!(cb.index_of(&["T", "0"]), Some(2));
        assert_eq!(cb.to_string(), "Coin*Bit");
    }

    #[test]
    fn tensor_with_unit_is_strict() {
        assert_eq!(FinObject::unit().tensor(&coin()), coin());
        assert_eq!(coin().tensor(&FinObject::unit()), coin());
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(matches!(
            FinObject::atom("X", vec!["a", "a"]),
            Err(Error::DuplicateLabel { .. })
        ));
    }

    #[test]
    fn split_recovers_factors() {
        let cbc = coin().tensor(&bit()).tensor(&coin());
        let (l, r) = cbc.split_at(1).unwrap();
        assert_eq!(l, coin());
        assert_eq!(r, bit().tensor(&coin()));
        assert!(cbc.split_at(4).is_err());
    }

    #[test]
    fn unknown_label_reported() {
        let err = coin().require_index(&["X"]).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel { .. }));
    }
}
