//! One-dimensional densities: a prior on the real line, a Gaussian channel,
//! and posteriors after observing an exact value, by composite Simpson
//! quadrature.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::{PI, SQRT_2};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use libm::erfc;
use thiserror::Error;

/// Normal priors are integrated over `mu ± TRUNCATION * sigma`.
pub const TRUNCATION: f64 = 8.0;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("invalid density: {0}")]
    Invalid(String),
    #[error("non-finite integrand at {at}")]
    NonFinite { at: f64 },
    #[error("evidence {evidence:e} for observation {v} is too small to renormalise")]
    ZeroEvidence { v: f64, evidence: f64 },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

pub type Result<T> = std::result::Result<T, DensityError>;

#[derive(Clone, Debug, PartialEq)]
pub enum DensityState {
    Uniform {
        a: f64,
        b: f64,
    },
    Normal {
        mu: f64,
        sigma: f64,
    },
    /// Piecewise linear through `(xs[i], pdf[i])`, zero outside.
    Grid {
        xs: Vec<f64>,
        pdf: Vec<f64>,
    },
}

impl DensityState {
    pub fn validate(&self) -> Result<()> {
        match self {
            DensityState::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(DensityError::Invalid(format!("uniform on [{a}, {b}]")));
                }
            }
            DensityState::Normal { mu, sigma } => {
                if !(mu.is_finite() && sigma.is_finite() && *sigma > 0.0) {
                    return Err(DensityError::Invalid(format!("normal({mu}, {sigma})")));
                }
            }
            DensityState::Grid { xs, pdf } => {
                if xs.len() < 2 || xs.len() != pdf.len() {
                    return Err(DensityError::Invalid(
                        "grid needs at least two points and one value per point".into(),
                    ));
                }
                if xs.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(DensityError::Invalid("grid points must increase".into()));
                }
                if pdf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(DensityError::Invalid(
                        "grid values must be finite and nonnegative".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The interval integrated over.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DensityState::Uniform { a, b } => (*a, *b),
            DensityState::Normal { mu, sigma } => {
                (mu - TRUNCATION * sigma, mu + TRUNCATION * sigma)
            }
            DensityState::Grid { xs, .. } => (xs[0], xs[xs.len() - 1]),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            DensityState::Uniform { a, b } => {
                if (*a..=*b).contains(&x) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            DensityState::Normal { mu, sigma } => std_normal_pdf((x - mu) / sigma) / sigma,
            DensityState::Grid { xs, pdf } => {
                let (lo, hi) = (xs[0], xs[xs.len() - 1]);
                if !(lo..=hi).contains(&x) {
                    return 0.0;
                }
                let i = xs.partition_point(|p| *p <= x).clamp(1, xs.len() - 1);
                let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                pdf[i - 1] + t * (pdf[i] - pdf[i - 1])
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DensityChannel {
    /// `x ↦ Normal(x, sigma)`.
    NormalMean { sigma: f64 },
}

impl DensityChannel {
    pub fn validate(&self) -> Result<()> {
        let DensityChannel::NormalMean { sigma } = self;
        if sigma.is_finite() && *sigma > 0.0 {
            Ok(())
        } else {
            Err(DensityError::Invalid(format!("channel sigma {sigma}")))
        }
    }

    /// Density of `y` given `x`.
    pub fn pdf(&self, y: f64, x: f64) -> f64 {
        let DensityChannel::NormalMean { sigma } = self;
        std_normal_pdf((y - x) / sigma) / sigma
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Number of nodes; odd and at least 3.
    pub n: usize,
    pub quad_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            n: 2001,
            quad_tol: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.n.is_multiple_of(2) {
            return Err(DensityError::Invalid(format!(
                "grid size {} must be odd and at least 3",
                self.n
            )));
        }
        if !(self.quad_tol > 0.0) {
            return Err(DensityError::Invalid(format!(
                "quadrature tolerance {}",
                self.quad_tol
            )));
        }
        Ok(())
    }
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + i as f64 * h })
        .collect()
}

/// Composite Simpson rule over equally spaced samples; `ys.len()` must be
/// odd.
pub fn simpson_samples(ys: &[f64], h: f64) -> f64 {
    let n = ys.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let mut s = ys[0] + ys[n - 1];
    for (i, y) in ys.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * y } else { 2.0 * y };
    }
    s * h / 3.0
}

/// Composite Simpson rule for `f` on `[a, b]` with `n` nodes.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Result<f64> {
    let xs = grid(a, b, n);
    let ys = sample(&f, &xs)?;
    Ok(simpson_samples(&ys, (b - a) / (n - 1) as f64))
}

fn sample(f: &impl Fn(f64) -> f64, xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter()
        .map(|&x| {
            let y = f(x);
            if y.is_finite() {
                Ok(y)
            } else {
                Err(DensityError::NonFinite { at: x })
            }
        })
        .collect()
}

fn check(prior: &DensityState, channel: &DensityChannel, v: f64, q: &QuadratureSpec) -> Result<()> {
    prior.validate()?;
    channel.validate()?;
    q.validate()?;
    if v.is_finite() {
        Ok(())
    } else {
        Err(DensityError::Invalid(format!("observation {v}")))
    }
}

/// Marginal density of observing `v`: `∫ channel(v|x) prior(x) dx`.
pub fn evidence_density(
    prior: &DensityState,
    channel: &DensityChannel,
    v: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    check(prior, channel, v, q)?;
    let (a, b) = prior.support();
    simpson(|x| channel.pdf(v, x) * prior.pdf(x), a, b, q.n)
}

/// Posterior density after observing `v`, tabulated on `q.n` points of the
/// prior's support.
pub fn posterior_exact(
    prior: &DensityState,
    channel: &DensityChannel,
    v: f64,
    q: &QuadratureSpec,
) -> Result<DensityState> {
    let evidence = evidence_density(prior, channel, v, q)?;
    if !(evidence > q.quad_tol) {
        return Err(DensityError::ZeroEvidence { v, evidence });
    }
    let (a, b) = prior.support();
    let xs = grid(a, b, q.n);
    let pdf = sample(&|x| prior.pdf(x) * channel.pdf(v, x) / evidence, &xs)?;
    Ok(DensityState::Grid { xs, pdf })
}

/// The inverse channel `y ↦ posterior after observing y`, as a density in
/// two arguments.
pub fn inversion_density(
    prior: &DensityState,
    channel: &DensityChannel,
    q: &QuadratureSpec,
) -> Result<impl Fn(f64, f64) -> f64> {
    prior.validate()?;
    channel.validate()?;
    q.validate()?;
    let (a, b) = prior.support();
    let xs = grid(a, b, q.n);
    let h = (b - a) / (q.n - 1) as f64;
    let prior_at: Vec<f64> = xs.iter().map(|&x| prior.pdf(x)).collect();
    let (prior, channel) = (prior.clone(), *channel);
    Ok(move |x: f64, y: f64| {
        let joint: Vec<f64> = xs
            .iter()
            .zip(&prior_at)
            .map(|(&x0, p)| channel.pdf(y, x0) * p)
            .collect();
        channel.pdf(y, x) * prior.pdf(x) / simpson_samples(&joint, h)
    })
}

/// Posterior after observing `v`, by evaluating the inverse channel at `v`.
pub fn posterior_via_inversion(
    prior: &DensityState,
    channel: &DensityChannel,
    v: f64,
    q: &QuadratureSpec,
) -> Result<DensityState> {
    check(prior, channel, v, q)?;
    let inverse = inversion_density(prior, channel, q)?;
    let (a, b) = prior.support();
    let xs = grid(a, b, q.n);
    let pdf = sample(&|x| inverse(x, v), &xs)?;
    Ok(DensityState::Grid { xs, pdf })
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Density of `Normal(v, sigma)` conditioned on `[a, b]`, in closed form.
pub fn truncated_normal_oracle(a: f64, b: f64, sigma: f64, v: f64) -> Result<impl Fn(f64) -> f64> {
    if !(a < b && sigma > 0.0 && a.is_finite() && b.is_finite() && v.is_finite()) {
        return Err(DensityError::Invalid(format!(
            "truncated normal on [{a}, {b}] with sigma {sigma}"
        )));
    }
    let mass = std_normal_cdf((b - v) / sigma) - std_normal_cdf((a - v) / sigma);
    if !(mass > 0.0) {
        return Err(DensityError::ZeroEvidence { v, evidence: mass });
    }
    Ok(move |m: f64| {
        if (a..=b).contains(&m) {
            std_normal_pdf((m - v) / sigma) / (sigma * mass)
        } else {
            0.0
        }
    })
}

/// Integral of a tabulated density over its grid.
pub fn total_mass(state: &DensityState) -> Result<f64> {
    match state {
        DensityState::Grid { xs, pdf } if xs.len() % 2 == 1 && xs.len() >= 3 => Ok(
            simpson_samples(pdf, (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64),
        ),
        DensityState::Grid { .. } => Err(DensityError::Invalid(
            "grid must have an odd number of points".into(),
        )),
        other => {
            let (a, b) = other.support();
            simpson(|x| other.pdf(x), a, b, QuadratureSpec::default().n)
        }
    }
}

/// At least 15 significant digits, positional notation where reasonable.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..15).contains(&mag) {
        format!("{:.*}", (14 - mag).max(0) as usize, x)
    } else {
        format!("{x:.14e}")
    }
}

/// Posterior densities for each of `vs`, one column per observation.
pub fn write_posterior_csv(
    out: &mut impl Write,
    prior: &DensityState,
    channel: &DensityChannel,
    vs: &[f64],
    q: &QuadratureSpec,
) -> Result<()> {
    prior.validate()?;
    channel.validate()?;
    q.validate()?;
    let columns = vs
        .iter()
        .map(|&v| match posterior_exact(prior, channel, v, q)? {
            DensityState::Grid { pdf, .. } => Ok(pdf),
            _ => unreachable!("posteriors are tabulated"),
        })
        .collect::<Result<Vec<_>>>()?;
    let io = |source| DensityError::Io {
        path: PathBuf::from("<output>"),
        source,
    };
    let mut header = String::from("m");
    for v in vs {
        header.push_str(&format!(",pdf_v{v}"));
    }
    writeln!(out, "{header}").map_err(io)?;
    if vs.is_empty() {
        return Ok(());
    }
    let (a, b) = prior.support();
    for (i, m) in grid(a, b, q.n).into_iter().enumerate() {
        let mut line = format_number(m);
        for col in &columns {
            line.push(',');
            line.push_str(&format_number(col[i]));
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    Ok(())
}

pub fn emit_posterior_csv(
    prior: &DensityState,
    channel: &DensityChannel,
    vs: &[f64],
    q: &QuadratureSpec,
    path: &Path,
) -> Result<()> {
    let with_path = |source| DensityError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut buf = Vec::new();
    write_posterior_csv(&mut buf, prior, channel, vs, q)?;
    std::fs::write(path, buf).map_err(with_path)
}
