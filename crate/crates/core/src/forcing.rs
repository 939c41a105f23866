//! Separable time-dependent perturbation forcing `F(x, t) = g(t) G(x)`
//! and the numerical decay moduli of its hypotheses.
//!
//! Separability keeps every hypothesis modulus exactly computable:
//! `|F(t)| = |g(t)|`, `|F_t(t)|_{-1} = |g'(t)| |G|_{-1}` with a
//! unit-normalized shape G and analytic g, g'.

use crate::error::{Error, Result};
use crate::field::VelocityField;
use crate::projection::Projector;
use crate::verification::DecayParameters;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ForcingKind {
    Zero,
    Exponential { sigma: f64 },
    Power { p: f64 },
    PowerExponential { p: f64, sigma: f64 },
}

impl ForcingKind {
    fn validate(&self) -> Result<()> {
        let (p, sigma) = match *self {
            ForcingKind::Zero => (0.0, 0.0),
            ForcingKind::Exponential { sigma } => (0.0, sigma),
            ForcingKind::Power { p } => (p, 0.0),
            ForcingKind::PowerExponential { p, sigma } => (p, sigma),
        };
        if !(sigma >= 0.0) || !(p >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "forcing decay parameters must be nonnegative: sigma = {sigma}, p = {p}"
            )));
        }
        Ok(())
    }
}

/// `F(x, t) = amplitude * g_kind(t) * G(x)` with `|G| = 1`.
#[derive(Debug, Clone)]
pub struct ForcingProfile {
    shape: VelocityField,
    amplitude: f64,
    kind: ForcingKind,
}

impl ForcingProfile {
    /// Normalizes the shape to unit l2 norm (unless the profile is zero).
    pub fn new(shape: VelocityField, amplitude: f64, kind: ForcingKind) -> Result<Self> {
        kind.validate()?;
        let norm = shape.norm_l2();
        let is_zero = matches!(kind, ForcingKind::Zero) || amplitude == 0.0;
        if norm == 0.0 && !is_zero {
            return Err(Error::InvalidParameter(
                "forcing shape has zero norm but the profile is not the zero kind".into(),
            ));
        }
        let shape = if norm > 0.0 {
            shape.scaled(1.0 / norm)
        } else {
            shape
        };
        Ok(ForcingProfile {
            shape,
            amplitude,
            kind,
        })
    }

    pub fn zero(grid: crate::grid::GridSpec) -> Self {
        ForcingProfile {
            shape: VelocityField::zeros(grid),
            amplitude: 0.0,
            kind: ForcingKind::Zero,
        }
    }

    pub fn kind(&self) -> ForcingKind {
        self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn shape(&self) -> &VelocityField {
        &self.shape
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ForcingKind::Zero) || self.amplitude == 0.0
    }

    /// Time law including the amplitude.
    pub fn g(&self, t: f64) -> f64 {
        self.amplitude
            * match self.kind {
                ForcingKind::Zero => 0.0,
                ForcingKind::Exponential { sigma } => (-sigma * t).exp(),
                ForcingKind::Power { p } => (1.0 + t).powf(-p),
                ForcingKind::PowerExponential { p, sigma } => {
                    (1.0 + t).powf(-p) * (-sigma * t).exp()
                }
            }
    }

    /// Analytic time derivative of [`g`](Self::g).
    pub fn g_dt(&self, t: f64) -> f64 {
        self.amplitude
            * match self.kind {
                ForcingKind::Zero => 0.0,
                ForcingKind::Exponential { sigma } => -sigma * (-sigma * t).exp(),
                ForcingKind::Power { p } => -p * (1.0 + t).powf(-p - 1.0),
                ForcingKind::PowerExponential { p, sigma } => {
                    (-p * (1.0 + t).powf(-p - 1.0) - sigma * (1.0 + t).powf(-p)) * (-sigma * t).exp()
                }
            }
    }

    pub fn evaluate(&self, t: f64) -> VelocityField {
        self.shape.scaled(self.g(t))
    }

    pub fn evaluate_dt(&self, t: f64) -> VelocityField {
        self.shape.scaled(self.g_dt(t))
    }
}

/// Suprema of the weighted forcing hypotheses over a finite horizon, with
/// divergence flags from the end-of-horizon heuristic.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayModuli {
    /// `sup tau^beta e^{2 alpha1 t} |F(t)|^2`
    pub m: f64,
    /// `sup tau^beta e^{2 alpha1 t} (|F(t)|^2 + |F_t(t)|^2_{-1})`
    pub m1: f64,
    pub m_finite: bool,
    pub m1_finite: bool,
    pub horizon: f64,
}

/// Evaluate both moduli on th e time grid `0, dt, ..., horizon`. A modulus
/// is flagged divergent when its weighted value at the horizon exceeds 10x
/// the running median of the sampled values.
pub fn compute_moduli(
    profile: &ForcingProfile,
    dp: &DecayParameters,
    horizon: f64,
    dt: f64,
    proj: &Projector,
) -> Result<DecayModuli> {
    if !(dt > 0.0) || !(horizon > 0.0) {
        return Err(Error::InvalidParameter(
            "moduli evaluation needs dt > 0, horizon > 0".into(),
        ));
    }
    if horizon < 5.0 * dp.t_bar {
        return Err(Error::InvalidParameter(format!(
            "moduli horizon {horizon} is shorter than 5 t_bar = {}",
            5.0 * dp.t_bar
        )));
    }
    if profile.is_zero() {
        return Ok(DecayModuli {
            m: 0.0,
            m1: 0.0,
            m_finite: true,
            m1_finite: true,
            horizon,
        });
    }
    let dual = proj.h_minus1_norm(profile.shape());
    let steps = (horizon / dt).round() as usize;
    let mut m = 0.0f64;
    let mut m1 = 0.0f64;
    let mut m_samples = Vec::with_capacity(steps + 1);
    let mut m1_samples = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let g = profile.g(t);
        let gp = profile.g_dt(t);
        let vm = dp.weighted(t, g * g);
        let vm1 = dp.weighted(t, g * g + gp * gp * dual * dual);
        m = m.max(vm);
        m1 = m1.max(vm1);
        m_samples.push(vm);
        m1_samples.push(vm1);
    }
    let flag = |samples: &mut Vec<f64>| -> bool {
        let last = *samples.last().unwrap();
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = samples[samples.len() / 2];
        last.is_finite() && (median == 0.0 || last <= 10.0 * median)
    };
    let m_finite = flag(&mut m_samples);
    let m1_finite = flag(&mut m1_samples);
    Ok(DecayModuli {
        m,
        m1,
        m_finite,
        m1_finite,
        horizon,
    })
}
