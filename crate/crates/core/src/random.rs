//! Seeded generators of random objects and kernels for law checks.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::kernel::SubKernel;
use crate::object::FinObject;

pub type LawRng = ChaCha8Rng;

pub fn rng(seed: u64) -> LawRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An atomic object named `name` with `1..=max_size` labels.
pub fn object(rng: &mut impl Rng, name: &str, max_size: usize) -> FinObject {
    let n = rng.gen_range(1..=max_size.max(1));
    let labels: Vec<String> = (0..n)
        .map(|i| format!("{}{}", name.to_lowercase(), i))
        .collect();
    FinObject::atom(name, labels).expect("generated labels are distinct")
}

/// Shapes of rows drawn by [`kernel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mass {
    /// Every row sums to one.
    Total,
    /// Rows are subdistributions; some rows are empty and some entries zero.
    Sub,
}

fn random_row(rng: &mut impl Rng, cols: usize, mass: Mass) -> Vec<f64> {
    if cols == 0 {
        return Vec::new();
    }
    if mass == Mass::Sub && rng.gen_bool(0.15) {
        return vec![0.0; cols];
    }
    let mut row: Vec<f64> = (0..cols)
        .map(|_| {
            if rng.gen_bool(0.25) {
                0.0
            } else {
                rng.gen_range(0.05..1.0)
            }
        })
        .collect();
    if row.iter().all(|w| *w == 0.0) {
        row[rng.gen_range(0..cols)] = 1.0;
    }
    let total: f64 = row.iter().sum();
    let target = match mass {
        Mass::Total => 1.0,
        Mass::Sub => {
            if rng.gen_bool(0.2) {
                1.0
            } else {
                rng.gen_range(0.1..1.0)
            }
        }
    };
    row.iter_mut().for_each(|w| *w *= target / total);
    row
}

pub fn kernel(rng: &mut impl Rng, dom: &FinObject, cod: &FinObject, mass: Mass) -> SubKernel {
    let cols = cod.size();
    let weights = (0..dom.size())
        .flat_map(|_| random_row(rng, cols, mass))
        .collect();
    SubKernel::new(dom.clone(), cod.clone(), weights).expect("generated rows are valid")
}

pub fn state(rng: &mut impl Rng, obj: &FinObject, mass: Mass) -> SubKernel {
    kernel(rng, &FinObject::unit(), obj, mass)
}

/// A deterministic kernel; with `partial`, some inputs fail.
pub fn dirac_kernel(
    rng: &mut impl Rng,
    dom: &FinObject,
    cod: &FinObject,
    partial: bool,
) -> SubKernel {
    let targets: Vec<Option<usize>> = (0..dom.size())
        .map(|_| {
            if partial && rng.gen_bool(0.3) {
                None
            } else {
                Some(rng.gen_range(0..cod.size()))
            }
        })
        .collect();
    SubKernel::deterministic(dom.clone(), cod.clone(), |x| targets[x])
}

/// A kernel whose rows are each either empty or total.
pub fn crisp_kernel(rng: &mut impl Rng, dom: &FinObject, cod: &FinObject) -> SubKernel {
    let cols = cod.size();
    let weights = (0..dom.size())
        .flat_map(|_| {
            if rng.gen_bool(0.3) {
                vec![0.0; cols]
            } else {
                random_row(rng, cols, Mass::Total)
            }
        })
        .collect();
    SubKernel::new(dom.clone(), cod.clone(), weights).expect("generated rows are valid")
}

/// A random label index of `obj`.
pub fn label(rng: &mut impl Rng, obj: &FinObject) -> usize {
    let all: Vec<usize> = (0..obj.size()).collect();
    *all.choose(rng).expect("objects are nonempty")
}
