//! The state-descriptor mini-language shared between the library and the CLI:
//!
//! ```text
//! vacuum
//! fock:<n>
//! coherent:<re>[,<im>]
//! thermal:<nbar>
//! squeezed:<amp>,<phase>
//! gaussian:<mu_re>,<mu_im>,<tau>,<z0_re>,<z0_im>
//! ```

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::gaussian::GaussianParams;

/// Parsed state descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateKind {
    Vacuum,
    Fock(usize),
    Coherent(C64),
    Thermal(f64),
    Squeezed { amp: f64, phase: f64 },
    Gaussian(GaussianParams),
}

impl StateKind {
    /// Build the density matrix at the given per-mode cutoff.
    pub fn make(&self, cutoff: usize) -> Result<DensityMatrix> {
        match *self {
            StateKind::Vacuum => DensityMatrix::vacuum(cutoff),
            StateKind::Fock(n) => DensityMatrix::fock(n, cutoff),
            StateKind::Coherent(alpha) => DensityMatrix::coherent(alpha, cutoff),
            StateKind::Thermal(nbar) => DensityMatrix::thermal(nbar, cutoff),
            StateKind::Squeezed { amp, phase } => DensityMatrix::squeezed(amp, phase, cutoff),
            StateKind::Gaussian(g) => g.to_fock(cutoff),
        }
    }

    /// Estimated population above the cutoff, from the analytic photon-number
    /// distribution of each family.
    pub fn tail_mass(&self, cutoff: usize) -> f64 {
        match *self {
            StateKind::Vacuum => 0.0,
            StateKind::Fock(n) => {
                if n < cutoff {
                    0.0
                } else {
                    1.0
                }
            }
            StateKind::Coherent(alpha) => {
                // Poisson tail
                let lam = alpha.norm_sqr();
                let mut term = (-lam).exp();
                let mut kept = term;
                for n in 1..cutoff {
                    term *= lam / n as f64;
                    kept += term;
                }
                (1.0 - kept).max(0.0)
            }
            StateKind::Thermal(nbar) => {
                if nbar <= 0.0 {
                    0.0
                } else {
                    (nbar / (1.0 + nbar)).powi(cutoff as i32)
                }
            }
            StateKind::Squeezed { amp, .. } => {
                // even-photon distribution of squeezed vacuum
                let t2 = amp.tanh().powi(2);
                let mut term = 1.0 / amp.cosh();
                let mut kept = term;
                let mut k = 1usize;
                while 2 * k < cutoff {
                    // p_{2k}/p_{2(k−1)} = tanh²s · (2k−1)/(2k)
                    term *= t2 * (2.0 * k as f64 - 1.0) / (2.0 * k as f64);
                    kept += term;
                    k += 1;
                }
                (1.0 - kept).max(0.0)
            }
            StateKind::Gaussian(g) => {
                // geometric estimate from the mean occupation
                let mean_n = (g.tau - 0.5 + g.z0.norm_sqr()).max(0.0);
                if mean_n == 0.0 {
                    0.0
                } else {
                    (mean_n / (1.0 + mean_n)).powi(cutoff as i32) * (cutoff as f64).max(1.0)
                }
            }
        }
    }

    /// True for the families whose second moments the Gaussian-level
    /// diagnostics can describe.
    pub fn is_gaussian_family(&self) -> bool {
        !matches!(self, StateKind::Fock(n) if *n > 0)
    }

    /// The (μ, τ, z₀) parameters, when the state is Gaussian.
    pub fn gaussian_params(&self) -> Option<GaussianParams> {
        match *self {
            StateKind::Vacuum => Some(GaussianParams::vacuum()),
            StateKind::Fock(0) => Some(GaussianParams::vacuum()),
            StateKind::Fock(_) => None,
            StateKind::Coherent(alpha) => Some(GaussianParams::coherent(alpha)),
            StateKind::Thermal(nbar) => Some(GaussianParams::thermal(nbar)),
            StateKind::Squeezed { amp, phase } => Some(GaussianParams::squeezed_vacuum(amp, phase)),
            StateKind::Gaussian(g) => Some(g),
        }
    }
}

fn parse_fields<'a>(
    desc: &str,
    body: &'a str,
    expect: std::ops::RangeInclusive<usize>,
) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = body.split(',').map(str::trim).collect();
    if fields.len() < *expect.start() || fields.len() > *expect.end() {
        return Err(Error::DescriptorParse(
            desc.to_string(),
            format!(
                "expected {} to {} comma-separated values, got {}",
                expect.start(),
                expect.end(),
                fields.len()
            ),
        ));
    }
    Ok(fields)
}

fn parse_f64(desc: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| Error::DescriptorParse(desc.to_string(), format!("bad number `{s}`: {e}")))
}

impl FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, body) = match s.split_once(':') {
            Some((h, b)) => (h.trim(), Some(b.trim())),
            None => (s, None),
        };
        let body_or = |what: &str| {
            body.ok_or_else(|| {
                Error::DescriptorParse(s.to_string(), format!("`{head}` needs {what}"))
            })
        };
        match head {
            "vacuum" => {
                if body.is_some() {
                    return Err(Error::DescriptorParse(
                        s.to_string(),
                        "`vacuum` takes no arguments".into(),
                    ));
                }
                Ok(StateKind::Vacuum)
            }
            "fock" => {
                let b = body_or("a photon number, e.g. fock:2")?;
                let n = b.parse::<usize>().map_err(|e| {
                    Error::DescriptorParse(s.to_string(), format!("bad photon number `{b}`: {e}"))
                })?;
                Ok(StateKind::Fock(n))
            }
            "coherent" => {
                let f = parse_fields(s, body_or("an amplitude, e.g. coherent:1.0 or coherent:0.3,0.7")?, 1..=2)?;
                let re = parse_f64(s, f[0])?;
                let im = if f.len() == 2 { parse_f64(s, f[1])? } else { 0.0 };
                Ok(StateKind::Coherent(C64::new(re, im)))
            }
            "thermal" => {
                let b = body_or("a mean photon number, e.g. thermal:1.0")?;
                let nbar = parse_f64(s, b)?;
                if nbar < 0.0 {
                    return Err(Error::DescriptorParse(
                        s.to_string(),
                        "mean photon number must be ≥ 0".into(),
                    ));
                }
                Ok(StateKind::Thermal(nbar))
            }
            "squeezed" => {
                let f = parse_fields(s, body_or("amplitude and phase, e.g. squeezed:0.3,0")?, 2..=2)?;
                Ok(StateKind::Squeezed {
                    amp: parse_f64(s, f[0])?,
                    phase: parse_f64(s, f[1])?,
                })
            }
            "gaussian" => {
                let f = parse_fields(
                    s,
                    body_or("mu_re,mu_im,tau,z0_re,z0_im")?,
                    5..=5,
                )?;
                let g = GaussianParams::new(
                    C64::new(parse_f64(s, f[0])?, parse_f64(s, f[1])?),
                    parse_f64(s, f[2])?,
                    C64::new(parse_f64(s, f[3])?, parse_f64(s, f[4])?),
                );
                g.check_physical()?;
                Ok(StateKind::Gaussian(g))
            }
            other => Err(Error::DescriptorParse(
                s.to_string(),
                format!("unknown state family `{other}`"),
            )),
        }
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StateKind::Vacuum => write!(f, "vacuum"),
            StateKind::Fock(n) => write!(f, "fock:{n}"),
            StateKind::Coherent(a) => write!(f, "coherent:{},{}", a.re, a.im),
            StateKind::Thermal(n) => write!(f, "thermal:{n}"),
            StateKind::Squeezed { amp, phase } => write!(f, "squeezed:{amp},{phase}"),
            StateKind::Gaussian(g) => write!(
                f,
                "gaussian:{},{},{},{},{}",
                g.mu.re, g.mu.im, g.tau, g.z0.re, g.z0.im
            ),
        }
    }
}

impl Serialize for StateKind {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for StateKind {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
