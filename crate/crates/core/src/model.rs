//! Problem description: the nonlinearity `h`, the potential `V`, the initial
//! datum and the bundle of discretization parameters.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied to `s` when evaluating `h'` and `h''` of terms whose
/// derivative is singular at the origin.
pub const S_MIN: f64 = 1e-12;

/// One term `b * s^alpha` of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coeff: f64,
    pub exponent: f64,
}

/// `h(s) = sum_i b_i s^{alpha_i}`, stored with strictly increasing exponents.
/// The empty sum is `h = 0`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Nonlinearity {
    terms: Vec<PowerTerm>,
}

/// `h`, `h'` and `h''` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HValues {
    pub h: f64,
    pub dh: f64,
    pub d2h: f64,
}

impl Nonlinearity {
    pub fn new(mut terms: Vec<PowerTerm>) -> Result<Self> {
        for t in &terms {
            if !(t.coeff.is_finite() && t.coeff >= 0.0) {
                return Err(Error::Invalid(format!(
                    "nonlinearity coefficient must be finite and >= 0, got {}",
                    t.coeff
                )));
            }
            if !(t.exponent.is_finite() && t.exponent > 0.0) {
                return Err(Error::Invalid(format!(
                    "nonlinearity exponent must be finite and > 0, got {}",
                    t.exponent
                )));
            }
        }
        terms.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
        if terms.windows(2).any(|w| w[0].exponent == w[1].exponent) {
            return Err(Error::Invalid(
                "nonlinearity exponents must be distinct".into(),
            ));
        }
        Ok(Self { terms })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `h(s) = b s^alpha`.
    pub fn power(coeff: f64, exponent: f64) -> Result<Self> {
        Self::new(vec![PowerTerm { coeff, exponent }])
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0.0)
    }

    pub fn min_exponent(&self) -> Option<f64> {
        self.terms.first().map(|t| t.exponent)
    }

    pub fn max_exponent(&self) -> Option<f64> {
        self.terms.last().map(|t| t.exponent)
    }

    /// `(h, h', h'')` at `s >= 0`. Derivatives of terms that are singular at
    /// the origin are evaluated at `max(s, S_MIN)`.
    pub fn eval(&self, s: f64) -> Result<HValues> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("h evaluated at negative s = {s}")));
        }
        Ok(HValues {
            h: self.value(s),
            dh: self.derivative(s),
            d2h: self.second_derivative(s),
        })
    }

    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * s.powf(t.exponent))
            .sum()
    }

    #[inline]
    pub fn derivative(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let x = if t.exponent < 1.0 { s.max(S_MIN) } else { s };
                t.coeff * t.exponent * x.powf(t.exponent - 1.0)
            })
            .sum()
    }

    #[inline]
    pub fn second_derivative(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let x = if t.exponent < 2.0 { s.max(S_MIN) } else { s };
                t.coeff * t.exponent * (t.exponent - 1.0) * x.powf(t.exponent - 2.0)
            })
            .sum()
    }

    /// Divided difference `(h(s1) - h(s0)) / (s1 - s0)` with both arguments
    /// floored at `S_MIN`; falls back to `h'` at the midpoint when the two
    /// arguments nearly coincide.
    #[inline]
    pub fn secant_slope(&self, s0: f64, s1: f64) -> f64 {
        let a = s0.max(S_MIN);
        let b = s1.max(S_MIN);
        let d = b - a;
        if d.abs() <= 1e-9 * (a + b) {
            self.derivative(0.5 * (a + b))
        } else {
            (self.value(b) - self.value(a)) / d
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_factor(x: f64) -> Result<Self> {
        if x == 1.0 {
            Ok(Sign::Plus)
        } else if x == -1.0 {
            Ok(Sign::Minus)
        } else {
            Err(Error::Invalid(format!("potential sign must be +1 or -1, got {x}")))
        }
    }
}

/// `V(r) = sign * c * r^{-m} + bounded`, with the singular part held at its
/// value at `r = epsilon` inside the core `r < epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub c: f64,
    pub m: f64,
    pub sign: Sign,
    pub bounded: f64,
    pub epsilon: f64,
}

/// `V` and `x . grad V = r V'(r)` at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    pub value: f64,
    pub radial_derivative: f64,
}

pub const DEFAULT_EPSILON: f64 = 1e-3;

impl Potential {
    pub fn new(c: f64, m: f64, sign: Sign, bounded: f64, epsilon: f64) -> Result<Self> {
        let v = Self {
            c,
            m,
            sign,
            bounded,
            epsilon,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn zero() -> Self {
        Self {
            c: 0.0,
            m: 0.0,
            sign: Sign::Plus,
            bounded: 0.0,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn constant(v: f64) -> Self {
        Self {
            bounded: v,
            ..Self::zero()
        }
    }

    /// `sign * c * r^{-m}`, default core radius.
    pub fn power_law(sign: Sign, c: f64, m: f64) -> Self {
        Self {
            c,
            m,
            sign,
            bounded: 0.0,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::Invalid(format!("V.c must be >= 0, got {}", self.c)));
        }
        if !(self.m.is_finite() && self.m >= 0.0) {
            return Err(Error::Invalid(format!("V.m must be >= 0, got {}", self.m)));
        }
        if !self.bounded.is_finite() {
            return Err(Error::Invalid("V.bounded must be finite".into()));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Invalid(format!(
                "V.epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub fn has_singular_part(&self) -> bool {
        self.c != 0.0 && self.m > 0.0
    }

    /// Singular part with the core cap applied.
    #[inline]
    pub fn singular(&self, r: f64) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        self.sign.factor() * self.c * r.max(self.epsilon).powf(-self.m)
    }

    #[inline]
    pub fn eval(&self, r: f64) -> PotentialValue {
        let singular = self.singular(r);
        let radial_derivative = if r >= self.epsilon {
            -self.m * singular
        } else {
            0.0
        };
        PotentialValue {
            value: singular + self.bounded,
            radial_derivative,
        }
    }
}

/// Initial datum `u0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialData {
    /// `A exp(-r^2 / (2 sigma^2)) exp(i beta r^2)`.
    Gaussian {
        amplitude: f64,
        sigma: f64,
        chirp: f64,
    },
    /// Samples on the grid nodes.
    Tabulated(Vec<Complex64>),
}

impl InitialData {
    pub fn gaussian(amplitude: f64, sigma: f64, chirp: f64) -> Self {
        InitialData::Gaussian {
            amplitude,
            sigma,
            chirp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitialData::Gaussian {
                amplitude,
                sigma,
                chirp,
            } => {
                if !(amplitude.is_finite() && *amplitude > 0.0) {
                    return Err(Error::Invalid(format!(
                        "u0.amplitude must be > 0, got {amplitude}"
                    )));
                }
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::Invalid(format!("u0.sigma must be > 0, got {sigma}")));
                }
                if !chirp.is_finite() {
                    return Err(Error::Invalid("u0.chirp must be finite".into()));
                }
                Ok(())
            }
            InitialData::Tabulated(v) => {
                if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return Err(Error::Invalid("tabulated u0 contains non-finite samples".into()));
                }
                Ok(())
            }
        }
    }

    /// Samples at the given radii.
    pub fn sample(&self, nodes: &[f64]) -> Result<Vec<Complex64>> {
        match self {
            InitialData::Gaussian {
                amplitude,
                sigma,
                chirp,
            } => Ok(nodes
                .iter()
                .map(|&r| {
                    let r2 = r * r;
                    Complex64::from_polar(
                        amplitude * (-r2 / (2.0 * sigma * sigma)).exp(),
                        chirp * r2,
                    )
                })
                .collect()),
            InitialData::Tabulated(v) => {
                crate::error::check_len(nodes.len(), v.len())?;
                Ok(v.clone())
            }
        }
    }
}

/// The Cauchy problem together with its discretization parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dim: usize,
    pub h: Nonlinearity,
    pub potential: Potential,
    pub initial: InitialData,
    pub radius: f64,
    pub grid_points: usize,
    pub dt0: f64,
    pub t_end: f64,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(Error::Invalid(format!("dim must be >= 3, got {}", self.dim)));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::Invalid(format!("radius must be > 0, got {}", self.radius)));
        }
        if self.grid_points < 16 {
            return Err(Error::Invalid(format!(
                "grid_points must be ≥ 16, got {}",
                self.grid_points
            )));
        }
        if !(self.dt0.is_finite() && self.dt0 > 0.0) {
            return Err(Error::Invalid(format!("dt0 must be > 0, got {}", self.dt0)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Invalid(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        self.potential.validate()?;
        self.initial.validate()?;
        if let InitialData::Tabulated(v) = &self.initial {
            crate::error::check_len(self.grid_points, v.len())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn identity_nonlinearity() {
        let h = Nonlinearity::power(1.0, 1.0).unwrap();
        let v = h.eval(4.0).unwrap();
        assert_eq!((v.h, v.dh, v.d2h), (4.0, 1.0, 0.0));
    }

    #[test]
    fn square_root_nonlinearity() {
        let h = Nonlinearity::power(1.0, 0.5).unwrap();
        let v = h.eval(4.0).unwrap();
        assert_relative_eq!(v.h, 2.0, max_relative = 1e-15);
        assert_relative_eq!(v.dh, 0.25, max_relative = 1e-15);
        assert_relative_eq!(v.d2h, -1.0 / 32.0, max_relative = 1e-15);
        // central differences at s = 4
        let d = 1e-4;
        let fd1 = (h.value(4.0 + d) - h.value(4.0 - d)) / (2.0 * d);
        let fd2 = (h.derivative(4.0 + d) - h.derivative(4.0 - d)) / (2.0 * d);
        assert!((fd1 - 0.25).abs() < 1e-8);
        assert!((fd2 + 1.0 / 32.0).abs() < 1e-8);
    }

    #[test]
    fn empty_nonlinearity() {
        let v = Nonlinearity::zero().eval(7.0).unwrap();
        assert_eq!((v.h, v.dh, v.d2h), (0.0, 0.0, 0.0));
    }

    #[test]
    fn negative_argument_rejected() {
        let h = Nonlinearity::power(1.0, 1.0).unwrap();
        assert!(matches!(h.eval(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn derivative_floor_at_origin() {
        let h = Nonlinearity::power(1.0, 0.5).unwrap();
        let v = h.eval(0.0).unwrap();
        assert_eq!(v.h, 0.0);
        assert!(v.dh.is_finite() && v.d2h.is_finite());
        assert_relative_eq!(v.dh, 0.5 * S_MIN.powf(-0.5), max_relative = 1e-12);
    }

    #[test]
    fn terms_are_canonicalized() {
        let h = Nonlinearity::new(vec![
            PowerTerm { coeff: 1.0, exponent: 0.4 },
            PowerTerm { coeff: 2.0, exponent: 0.3 },
        ])
        .unwrap();
        assert_eq!(h.terms()[0].exponent, 0.3);
        assert!(Nonlinearity::new(vec![
            PowerTerm { coeff: 1.0, exponent: 0.4 },
            PowerTerm { coeff: 2.0, exponent: 0.4 },
        ])
        .is_err());
        assert!(Nonlinearity::power(-1.0, 1.0).is_err());
        assert!(Nonlinearity::power(1.0, 0.0).is_err());
    }

    #[test]
    fn inverse_square_potential() {
        let v = Potential::new(1.0, 2.0, Sign::Minus, 0.0, 1e-3).unwrap();
        let p = v.eval(1.0);
        assert_eq!(p.value, -1.0);
        assert_eq!(p.radial_derivative, 2.0);
    }

    #[test]
    fn constant_potential() {
        let v = Potential::constant(5.0);
        for r in [0.0, 1e-5, 0.3, 17.0] {
            let p = v.eval(r);
            assert_eq!((p.value, p.radial_derivative), (5.0, 0.0));
        }
    }

    #[test]
    fn core_cap() {
        let v = Potential::new(1.0, 2.0, Sign::Plus, 0.0, 1e-3).unwrap();
        let p = v.eval(1e-4);
        assert_relative_eq!(p.value, 1e6, max_relative = 1e-12);
        assert_eq!(p.radial_derivative, 0.0);
    }

    #[test]
    fn problem_validation() {
        let mut spec = ProblemSpec {
            dim: 3,
            h: Nonlinearity::zero(),
            potential: Potential::zero(),
            initial: InitialData::gaussian(1.0, 1.0, 0.0),
            radius: 16.0,
            grid_points: 64,
            dt0: 1e-3,
            t_end: 1.0,
        };
        assert!(spec.validate().is_ok());
        spec.grid_points = 8;
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("grid_points must be ≥ 16"), "{err}");
        spec.grid_points = 64;
        spec.dim = 2;
        assert!(spec.validate().is_err());
    }

    fn arb_nonlinearity() -> impl Strategy<Value = Nonlinearity> {
        prop::collection::vec((0.0f64..3.0, 0.1f64..2.5), 0..4).prop_filter_map(
            "distinct exponents",
            |v| {
                Nonlinearity::new(
                    v.into_iter()
                        .map(|(coeff, exponent)| PowerTerm { coeff, exponent })
                        .collect(),
                )
                .ok()
            },
        )
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(h in arb_nonlinearity(), s in 1e-3f64..1e3) {
            let d = 1e-5 * s;
            let dh = h.derivative(s);
            let fd1 = (h.value(s + d) - h.value(s - d)) / (2.0 * d);
            prop_assert!((dh - fd1).abs() <= 1e-6 * (1.0 + dh.abs()));
            let d2h = h.second_derivative(s);
            let fd2 = (h.derivative(s + d) - h.derivative(s - d)) / (2.0 * d);
            prop_assert!((d2h - fd2).abs() <= 1e-6 * (1.0 + d2h.abs()));
        }

        #[test]
        fn nonlinearity_is_nonnegative(h in arb_nonlinearity(), s in 0.0f64..1e4) {
            prop_assert!(h.value(s) >= 0.0);
        }

        #[test]
        fn power_law_radial_derivative(c in 0.1f64..5.0, m in 0.0f64..4.0, r in 1e-2f64..50.0, plus in any::<bool>()) {
            let sign = if plus { Sign::Plus } else { Sign::Minus };
            let v = Potential::new(c, m, sign, 0.0, 1e-3).unwrap();
            let p = v.eval(r);
            prop_assert!((p.radial_derivative + m * v.singular(r)).abs() <= 1e-14 * p.radial_derivative.abs().max(1.0));
        }
    }
}
