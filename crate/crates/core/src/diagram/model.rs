use indexmap::IndexMap;

use super::term::{evaluate, Term, TypeError};
use crate::kernel::SubKernel;
use crate::object::FinObject;

/// A named diagram together with its declared boundary and its value.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagram {
    pub dom: FinObject,
    pub cod: FinObject,
    pub term: Term,
    pub kernel: SubKernel,
}

/// Declared objects, generators, states and diagrams, in declaration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Model {
    objects: IndexMap<String, FinObject>,
    kernels: IndexMap<String, SubKernel>,
    states: IndexMap<String, SubKernel>,
    diagrams: IndexMap<String, Diagram>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("diagram `{name}` declared as `{declared}` but has type `{actual}`")]
    DeclaredType {
        name: String,
        declared: String,
        actual: String,
    },
    #[error(transparent)]
    Type(#[from] TypeError),
}

impl Model {
    pub fn new() -> Self {
        Model::default()
    }

    pub fn objects(&self) -> &IndexMap<String, FinObject> {
        &self.objects
    }

    pub fn kernels(&self) -> &IndexMap<String, SubKernel> {
        &self.kernels
    }

    pub fn states(&self) -> &IndexMap<String, SubKernel> {
        &self.states
    }

    pub fn diagrams(&self) -> &IndexMap<String, Diagram> {
        &self.diagrams
    }

    pub fn object(&self, name: &str) -> Option<&FinObject> {
        self.objects.get(name)
    }

    fn name_taken(&self, name: &str) -> bool {
        self.kernels.contains_key(name)
            || self.states.contains_key(name)
            || self.diagrams.contains_key(name)
    }

    pub fn add_object(&mut self, name: &str, obj: FinObject) -> Result<(), ModelError> {
        if self.objects.contains_key(name) {
            return Err(ModelError::Duplicate(name.to_string()));
        }
        self.objects.insert(name.to_string(), obj);
        Ok(())
    }

    pub fn add_kernel(&mut self, name: &str, k: SubKernel) -> Result<(), ModelError> {
        if self.name_taken(name) {
            return Err(ModelError::Duplicate(name.to_string()));
        }
        self.kernels.insert(name.to_string(), k);
        Ok(())
    }

    pub fn add_state(&mut self, name: &str, k: SubKernel) -> Result<(), ModelError> {
        if self.name_taken(name) {
            return Err(ModelError::Duplicate(name.to_string()));
        }
        self.states.insert(name.to_string(), k);
        Ok(())
    }

    /// Typechecks and evaluates `term` against the current model and checks
    /// it against the declared boundary.
    pub fn add_diagram(
        &mut self,
        name: &str,
        dom: FinObject,
        cod: FinObject,
        term: Term,
    ) -> Result<(), ModelError> {
        if self.name_taken(name) {
            return Err(ModelError::Duplicate(name.to_string()));
        }
        let kernel = evaluate(&term, self)?;
        if *kernel.dom() != dom || *kernel.cod() != cod {
            return Err(ModelError::DeclaredType {
                name: name.to_string(),
                declared: format!("{dom} -> {cod}"),
                actual: format!("{} -> {}", kernel.dom(), kernel.cod()),
            });
        }
        self.diagrams.insert(
            name.to_string(),
            Diagram {
                dom,
                cod,
                term,
                kernel,
            },
        );
        Ok(())
    }

    /// Boundary of a kernel, state, or diagram.
    pub fn boundary(&self, name: &str) -> Option<(&FinObject, &FinObject)> {
        self.kernels
            .get(name)
            .or_else(|| self.states.get(name))
            .map(|k| (k.dom(), k.cod()))
            .or_else(|| self.diagrams.get(name).map(|d| (&d.dom, &d.cod)))
    }

    /// The kernel a name denotes.
    pub fn kernel_of(&self, name: &str) -> Option<SubKernel> {
        self.kernels
            .get(name)
            .or_else(|| self.states.get(name))
            .or_else(|| self.diagrams.get(name).map(|d| &d.kernel))
            .cloned()
    }

    /// The term a name stands for: diagrams expand, everything else is a
    /// generator.
    pub fn term_of(&self, name: &str) -> Option<Term> {
        if let Some(d) = self.diagrams.get(name) {
            return Some(d.term.clone());
        }
        self.boundary(name).map(|_| Term::gen(name))
    }
}
