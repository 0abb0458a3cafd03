//! Deterministic control schedules `u(t)`.
//!
//! Schedules drive both the ground-truth simulations and the control
//! coordinates of augmented surrogate models, which need the rate `u̇(t)`
//! as the drift of the control block.

use serde::{Deserialize, Serialize};

use crate::num::Real;

/// A deterministic control signal with known derivative.
pub trait ControlSchedule<T: Real>: Sync {
    /// Control dimension.
    fn dim(&self) -> usize;

    /// Control value `u(t)`.
    fn control(&self, t: T) -> Vec<T>;

    /// Rate of change `u̇(t)`.
    fn rate(&self, t: T) -> Vec<T>;
}

/// Constant control `u(t) ≡ u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantControl<T>(pub Vec<T>);

impl<T: Real> ControlSchedule<T> for ConstantControl<T> {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn control(&self, _t: T) -> Vec<T> {
        self.0.clone()
    }

    fn rate(&self, _t: T) -> Vec<T> {
        vec![T::zero(); self.0.len()]
    }
}

/// Shape of a logistic ramp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogisticForm {
    /// `u(t) = A / (1 + Q e^{−Bt})`: grows from `A/(1+Q)` towards the
    /// plateau `A`.
    Saturating,
    /// `u(t) = A·Q / (1 + e^{Bt})`: decays from `A·Q/2` towards zero.
    Decaying,
}

/// One logistic control channel with plateau `A`, offset `Q` and
/// steepness `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticSchedule<T> {
    /// Plateau `A`.
    pub plateau: T,
    /// Offset `Q` (sets the initial value).
    pub offset: T,
    /// Steepness `B`.
    pub steepness: T,
    /// Ramp shape.
    pub form: LogisticForm,
}

impl<T: Real> LogisticSchedule<T> {
    /// Saturating ramp `u(t) = A / (1 + Q e^{−Bt})`.
    pub fn saturating(plateau: T, offset: T, steepness: T) -> Self {
        Self {
            plateau,
            offset,
            steepness,
            form: LogisticForm::Saturating,
        }
    }

    /// Decaying ramp `u(t) = A·Q / (1 + e^{Bt})`.
    pub fn decaying(plateau: T, offset: T, steepness: T) -> Self {
        Self {
            plateau,
            offset,
            steepness,
            form: LogisticForm::Decaying,
        }
    }

    /// Value `u(t)`.
    #[must_use]
    pub fn value(&self, t: T) -> T {
        let (a, q, b) = (self.plateau, self.offset, self.steepness);
        match self.form {
            LogisticForm::Saturating => a / (T::one() + q * (-b * t).exp()),
            LogisticForm::Decaying => a * q / (T::one() + (b * t).exp()),
        }
    }

    /// Rate `u̇(t)`, in the closed logistic form that the control block of
    /// an augmented model can represent polynomially:
    /// saturating `u̇ = B·u·(1 − u/A)`, decaying `u̇ = −B·u·(1 − u/(AQ))`.
    #[must_use]
    pub fn derivative(&self, t: T) -> T {
        let u = self.value(t);
        self.derivative_of_value(u)
    }

    /// Rate expressed through the current value alone.
    #[must_use]
    pub fn derivative_of_value(&self, u: T) -> T {
        let (a, q, b) = (self.plateau, self.offset, self.steepness);
        match self.form {
            LogisticForm::Saturating => b * u * (T::one() - u / a),
            LogisticForm::Decaying => -b * u * (T::one() - u / (a * q)),
        }
    }
}

/// Independent logistic ramps per control channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticControl<T> {
    /// One schedule per channel.
    pub channels: Vec<LogisticSchedule<T>>,
}

impl<T: Real> ControlSchedule<T> for LogisticControl<T> {
    fn dim(&self) -> usize {
        self.channels.len()
    }

    fn control(&self, t: T) -> Vec<T> {
        self.channels.iter().map(|c| c.value(t)).collect()
    }

    fn rate(&self, t: T) -> Vec<T> {
        self.channels.iter().map(|c| c.derivative(t)).collect()
    }
}
