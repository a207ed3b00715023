//! Closed-form time signals used for the free integration constants.

use serde::{Deserialize, Serialize};

use super::quadrature::{self, QuadratureOptions};
use crate::error::Result;

/// One term of a [`FreeCoefficient`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalTerm {
    /// `c`
    Constant { value: f64 },
    /// `c·sin(ωt)`
    Sine { amplitude: f64, omega: f64 },
    /// `c·cos(ωt)`
    Cosine { amplitude: f64, omega: f64 },
    /// `c·e^{λt}`
    Exponential { amplitude: f64, rate: f64 },
    /// `c·e^{λt}·cos(ωt)`
    DampedCosine { amplitude: f64, rate: f64, omega: f64 },
    /// `c·e^{λt}·sin(ωt)`
    DampedSine { amplitude: f64, rate: f64, omega: f64 },
    /// `c·exp(−((t − t_c)/width)²)`; has no exact relaxation integral.
    GaussianPulse { amplitude: f64, center: f64, width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Trig {
    Cos,
    Sin,
}

/// `c·e^{λt}·trig(ωt)`
#[derive(Debug, Clone, Copy)]
struct ExpTrig {
    c: f64,
    rate: f64,
    omega: f64,
    trig: Trig,
}

impl SignalTerm {
    fn exp_trig(&self) -> Option<ExpTrig> {
        use SignalTerm::*;
        let (c, rate, omega, trig) = match *self {
            Constant { value } => (value, 0.0, 0.0, Trig::Cos),
            Sine { amplitude, omega } => (amplitude, 0.0, omega, Trig::Sin),
            Cosine { amplitude, omega } => (amplitude, 0.0, omega, Trig::Cos),
            Exponential { amplitude, rate } => (amplitude, rate, 0.0, Trig::Cos),
            DampedCosine { amplitude, rate, omega } => (amplitude, rate, omega, Trig::Cos),
            DampedSine { amplitude, rate, omega } => (amplitude, rate, omega, Trig::Sin),
            GaussianPulse { .. } => return None,
        };
        Some(ExpTrig { c, rate, omega, trig })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            SignalTerm::GaussianPulse { amplitude, center, width } => {
                let s = (t - center) / width;
                amplitude * (-s * s).exp()
            }
            _ => {
                let e = self.exp_trig().expect("closed-form term");
                let trig = match e.trig {
                    Trig::Cos => (e.omega * t).cos(),
                    Trig::Sin => (e.omega * t).sin(),
                };
                e.c * (e.rate * t).exp() * trig
            }
        }
    }

    pub fn has_exact_integral(&self) -> bool {
        self.exp_trig().is_some()
    }
}

impl ExpTrig {
    /// `∫₀ᵗ e^{−(t−τ)/κ} · term(τ) dτ`.
    fn relaxation_integral(&self, kappa: f64, t: f64) -> f64 {
        let decay = (-t / kappa).exp();
        let a = self.rate + 1.0 / kappa;
        let w = self.omega;
        if w == 0.0 {
            return match self.trig {
                Trig::Sin => 0.0,
                Trig::Cos if a == 0.0 => self.c * t * decay,
                Trig::Cos => self.c * decay * (a * t).exp_m1() / a,
            };
        }
        let d = a * a + w * w;
        let grow = (self.rate * t).exp();
        let (s, c) = (w * t).sin_cos();
        match self.trig {
            Trig::Cos => self.c * (grow * (a * c + w * s) - a * decay) / d,
            Trig::Sin => self.c * (grow * (a * s - w * c) + w * decay) / d,
        }
    }
}

/// A free function of time chosen from a closed catalogue so that the
/// membrane relaxation integral has an exact antiderivative where possible.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FreeCoefficient {
    terms: Vec<SignalTerm>,
}

impl FreeCoefficient {
    pub fn new(terms: Vec<SignalTerm>) -> Self {
        Self { terms }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self::new(vec![SignalTerm::Constant { value }])
    }

    pub fn sine(amplitude: f64, omega: f64) -> Self {
        Self::new(vec![SignalTerm::Sine { amplitude, omega }])
    }

    pub fn damped_cosine(amplitude: f64, rate: f64, omega: f64) -> Self {
        Self::new(vec![SignalTerm::DampedCosine { amplitude, rate, omega }])
    }

    pub fn exponential(amplitude: f64, rate: f64) -> Self {
        Self::new(vec![SignalTerm::Exponential { amplitude, rate }])
    }

    pub fn plus(mut self, term: SignalTerm) -> Self {
        self.terms.push(term);
        self
    }

    pub fn terms(&self) -> &[SignalTerm] {
        &self.terms
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|s| s.eval(t)).sum()
    }

    pub fn has_exact_integral(&self) -> bool {
        self.terms.iter().all(SignalTerm::has_exact_integral)
    }

    /// Exact `∫₀ᵗ e^{−(t−τ)/κ} A(τ) dτ`, or `None` if any term lacks a closed form.
    pub fn relaxation_integral_exact(&self, kappa: f64, t: f64) -> Option<f64> {
        self.terms
            .iter()
            .map(|s| s.exp_trig().map(|e| e.relaxation_integral(kappa, t)))
            .sum()
    }

    /// The same integral by adaptive quadrature.
    pub fn relaxation_integral_quadrature(&self, kappa: f64, t: f64, opts: QuadratureOptions) -> Result<f64> {
        let q = quadrature::integrate(|tau| (-(t - tau) / kappa).exp() * self.eval(tau), 0.0, t, opts)?;
        Ok(q.value)
    }
}
