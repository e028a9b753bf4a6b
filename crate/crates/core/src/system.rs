//! The coupled plant-herbivore maps.
//!
//! Model I (herbivore attacks before plant growth):
//!   `P' = F(P) e^{-aH}`, `H' = P (1 - e^{-aH})`
//!
//! Model II (plant grows first):
//!   `P' = F(P) e^{-aH}`, `H' = F(P) (1 - e^{-aH})`

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::GrowthModel;

/// Components above this abort a simulation.
pub const OVERFLOW_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "I")]
    ModelI,
    #[serde(rename = "II")]
    ModelII,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" | "i" => Ok(Variant::ModelI),
            "II" | "2" | "ii" => Ok(Variant::ModelII),
            other => Err(Error::usage(format!("unknown variant `{other}` (expected I or II)"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::ModelI => "I",
            Variant::ModelII => "II",
        })
    }
}

/// Plant biomass density `p` and herbivore density `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "H")]
    pub h: f64,
}

impl State {
    pub fn new(p: f64, h: f64) -> Result<Self> {
        let s = State { p, h };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p.is_nan() || self.h.is_nan() || self.p < 0.0 || self.h < 0.0 {
            Err(Error::Domain(format!("state ({}, {}) is outside the closed positive quadrant", self.p, self.h)))
        } else {
            Ok(())
        }
    }

    pub fn sup_distance(&self, other: &State) -> f64 {
        (self.p - other.p).abs().max((self.h - other.h).abs())
    }
}

/// A 2x2 matrix in row-major order.
pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub variant: Variant,
    pub model: GrowthModel,
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    /// Keep every `stride`-th state (the initial state is always kept).
    pub stride: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub t0: usize,
    pub stride: usize,
}

impl Trajectory {
    pub fn time(&self, k: usize) -> usize {
        self.t0 + k * self.stride
    }

    pub fn herbivore(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.h)
    }

    pub fn last(&self) -> State {
        *self.states.last().expect("trajectory is never empty")
    }
}

impl SystemSpec {
    pub fn new(variant: Variant, model: GrowthModel, a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InadmissibleParam {
                name: "a".into(),
                value: a,
                reason: "attack rate must be finite and strictly positive".into(),
            });
        }
        Ok(SystemSpec { variant, model, a })
    }

    /// One generation of the map.
    #[inline]
    pub fn step(&self, s: State) -> State {
        let fp = self.model.growth(s.p);
        let survive = (-self.a * s.h).exp();
        // 1 - e^{-aH} without cancellation for tiny aH
        let eaten = -(-self.a * s.h).exp_m1();
        let source = match self.variant {
            Variant::ModelI => s.p,
            Variant::ModelII => fp,
        };
        State { p: fp * survive, h: source * eaten }
    }

    /// Lazily iterates the map starting after `s0`.
    pub fn orbit(&self, s0: State) -> Orbit<'_> {
        Orbit { spec: self, state: s0 }
    }

    pub fn simulate(&self, s0: State, t: usize) -> Result<Trajectory> {
        self.simulate_with(s0, t, SimOptions::default())
    }

    /// Iterates `t` generations, keeping `t + 1` states (or every `stride`-th).
    pub fn simulate_with(&self, s0: State, t: usize, opts: SimOptions) -> Result<Trajectory> {
        s0.validate()?;
        if t == 0 {
            return Err(Error::usage("number of generations must be at least 1"));
        }
        let stride = opts.stride.max(1);
        let mut states = Vec::with_capacity(t / stride + 1);
        states.push(s0);
        let mut s = s0;
        for k in 1..=t {
            s = self.step(s);
            check_bounded(k, s)?;
            if k % stride == 0 {
                states.push(s);
            }
        }
        Ok(Trajectory { states, t0: 0, stride })
    }

    /// Analytic Jacobian of the map at `s`.
    pub fn jacobian(&self, s: State) -> Result<Mat2> {
        s.validate()?;
        let a = self.a;
        let fp = self.model.growth(s.p);
        let dfp = self.model.growth_slope(s.p);
        let e = (-a * s.h).exp();
        let eaten = -(-a * s.h).exp_m1();
        let top = [dfp * e, -a * fp * e];
        let bottom = match self.variant {
            Variant::ModelI => [eaten, a * s.p * e],
            Variant::ModelII => [dfp * eaten, a * fp * e],
        };
        Ok([top, bottom])
    }

    /// Largest plant equilibrium of the growth law.
    pub fn largest_plant_equilibrium(&self) -> Result<f64> {
        self.model.largest_equilibrium()
    }

    /// `(0.9 Pn, 0.1)`: a small herbivore invading near the plant-only state.
    pub fn default_start(&self) -> Result<State> {
        Ok(State { p: 0.9 * self.largest_plant_equilibrium()?, h: 0.1 })
    }
}

pub(crate) fn check_bounded(t: usize, s: State) -> Result<()> {
    if s.p.is_nan() || s.h.is_nan() || s.p > OVERFLOW_LIMIT || s.h > OVERFLOW_LIMIT {
        Err(Error::Overflow { t, p: s.p, h: s.h, limit: OVERFLOW_LIMIT })
    } else {
        Ok(())
    }
}

/// Unbounded iterator over successive states of a map.
pub struct Orbit<'a> {
    spec: &'a SystemSpec,
    state: State,
}

impl Iterator for Orbit<'_> {
    type Item = State;
    fn next(&mut self) -> Option<State> {
        self.state = self.spec.step(self.state);
        Some(self.state)
    }
}

/// Roots of `λ² - tr λ + det`, ordered by modulus (descending), then real
/// part, then imaginary part.
pub fn eigenvalues(m: &Mat2) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * tr;
    // discriminant computed as ((a-d)/2)^2 + bc to keep precision when a ≈ d
    let hd = 0.5 * (m[0][0] - m[1][1]);
    let disc = hd * hd + m[0][1] * m[1][0];
    let mut pair = if disc >= 0.0 {
        let s = disc.sqrt();
        let big = if half >= 0.0 { half + s } else { half - s };
        let small = if big != 0.0 { det / big } else { half - s };
        [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(half, s), Complex64::new(half, -s)]
    };
    pair.sort_by(|x, y| {
        y.norm()
            .total_cmp(&x.norm())
            .then(y.re.total_cmp(&x.re))
            .then(y.im.total_cmp(&x.im))
    });
    pair
}

pub fn spectral_radius(m: &Mat2) -> f64 {
    eigenvalues(m)[0].norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bh(r: f64, a: f64, v: Variant) -> SystemSpec {
        SystemSpec::new(v, GrowthModel::beverton_holt(r).unwrap(), a).unwrap()
    }

    #[test]
    fn boundary_and_axis_are_invariant() {
        for v in [Variant::ModelI, Variant::ModelII] {
            let spec = bh(2.5, 2.0, v);
            let s = spec.step(State { p: 0.7, h: 0.0 });
            assert_eq!(s, State { p: spec.model.growth(0.7), h: 0.0 });
            assert_eq!(spec.step(State { p: 0.0, h: 1.3 }), State { p: 0.0, h: 0.0 });
        }
    }

    #[test]
    fn model_two_hand_evaluated_step() {
        let spec = bh(2.5, 2.0, Variant::ModelII);
        let s = spec.step(State { p: 1.0, h: 0.5 });
        let f1 = 1.25;
        let e = (-1.0f64).exp();
        assert!((s.p - f1 * e).abs() < 1e-15);
        assert!((s.h - f1 * (1.0 - e)).abs() < 1e-15);
    }

    #[test]
    fn simulate_one_step_is_step() {
        let spec = bh(2.5, 2.0, Variant::ModelI);
        let s0 = State::new(1.0, 0.5).unwrap();
        let tr = spec.simulate(s0, 1).unwrap();
        assert_eq!(tr.states, vec![s0, spec.step(s0)]);
    }

    #[test]
    fn stride_keeps_every_kth_state() {
        let spec = bh(2.5, 2.0, Variant::ModelII);
        let s0 = State::new(1.0, 0.5).unwrap();
        let dense = spec.simulate(s0, 100).unwrap();
        let sparse = spec.simulate_with(s0, 100, SimOptions { stride: 10 }).unwrap();
        assert_eq!(sparse.states.len(), 11);
        for (k, s) in sparse.states.iter().enumerate() {
            assert_eq!(*s, dense.states[sparse.time(k)]);
        }
    }

    #[test]
    fn invalid_state_rejected() {
        assert!(State::new(-1.0, 0.0).is_err());
        assert!(State::new(1.0, f64::NAN).is_err());
        let spec = bh(2.5, 2.0, Variant::ModelII);
        assert!(spec.jacobian(State { p: -0.1, h: 0.0 }).is_err());
        assert!(SystemSpec::new(Variant::ModelI, spec.model, 0.0).is_err());
    }

    #[test]
    fn boundary_jacobian_eigenvalues() {
        for v in [Variant::ModelI, Variant::ModelII] {
            let spec = bh(2.5, 2.0, v);
            let j = spec.jacobian(State { p: 1.5, h: 0.0 }).unwrap();
            assert_eq!(j[1][0], 0.0);
            let eig = eigenvalues(&j);
            assert!((eig[0].re - 3.0).abs() < 1e-14 && eig[0].im == 0.0);
            assert!((eig[1].re - 0.4).abs() < 1e-14 && eig[1].im == 0.0);
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let e = eigenvalues(&[[2.0, 0.0], [0.0, 3.0]]);
        assert_eq!((e[0].re, e[1].re), (3.0, 2.0));
        let rot = eigenvalues(&[[0.0, -1.0], [1.0, 0.0]]);
        assert_eq!(rot[0], Complex64::new(0.0, 1.0));
        assert_eq!(rot[1], Complex64::new(0.0, -1.0));
        assert!((rot[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let h = 1e-6;
        for v in [Variant::ModelI, Variant::ModelII] {
            for model in [GrowthModel::beverton_holt(3.1).unwrap(), GrowthModel::holling_iii(2.7).unwrap()] {
                let spec = SystemSpec::new(v, model, 1.3).unwrap();
                let s = State { p: 0.83, h: 0.41 };
                let j = spec.jacobian(s).unwrap();
                let dp_plus = spec.step(State { p: s.p + h, ..s });
                let dp_minus = spec.step(State { p: s.p - h, ..s });
                let dh_plus = spec.step(State { h: s.h + h, ..s });
                let dh_minus = spec.step(State { h: s.h - h, ..s });
                let fd = [
                    [(dp_plus.p - dp_minus.p) / (2.0 * h), (dh_plus.p - dh_minus.p) / (2.0 * h)],
                    [(dp_plus.h - dp_minus.h) / (2.0 * h), (dh_plus.h - dh_minus.h) / (2.0 * h)],
                ];
                for i in 0..2 {
                    for k in 0..2 {
                        assert!(
                            (fd[i][k] - j[i][k]).abs() <= 1e-4 * j[i][k].abs().max(1e-3),
                            "{v} J[{i}][{k}]: {} vs {}",
                            fd[i][k],
                            j[i][k]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn overflow_guard_trips() {
        // w/(1+P)^b with tiny b keeps F(P) > P far beyond the guard
        let law = crate::growth::GrowthLaw::PowerBevertonHolt { w: 2.0, b: 0.01 };
        let spec = SystemSpec::new(Variant::ModelII, GrowthModel::new(law).unwrap(), 1.0).unwrap();
        let err = spec.simulate(State { p: 1.0, h: 0.0 }, 200).unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
    }

    #[test]
    fn bounded_after_transient_for_fig5_parameters() {
        let spec = bh(4.55, 3.95, Variant::ModelII);
        let tr = spec.simulate(State { p: 1.0, h: 1.0 }, 10_000).unwrap();
        for s in &tr.states[100..] {
            assert!(s.p.max(s.h) <= 3.56, "{s:?}");
        }
    }

    #[test]
    fn herbivore_dies_out_below_threshold() {
        let spec = SystemSpec::new(Variant::ModelII, GrowthModel::holling_iii(2.5).unwrap(), 0.3).unwrap();
        let tr = spec.simulate(State { p: 1.7, h: 0.8 }, 5000).unwrap();
        assert!(tr.last().h < 1e-6);
    }
}
