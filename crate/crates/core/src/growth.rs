//! Single-species plant growth laws `F(P) = P f(P)`.
//!
//! The first eight variants are the classic seasonal plant growth models; `BevertonHolt` and
//! `HollingIII` are the one-parameter prototypes `rP/(1+P)` and
//! `rP^2/(1+P^2)` used for the coupled-system experiments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{bisect, sign_changes};

/// Grid resolution used by the numeric equilibrium fallback and the
/// hypothesis checks.
pub const EQUILIBRIUM_GRID: usize = 10_000;
/// Absolute bisection tolerance for plant fixed points.
pub const EQUILIBRIUM_TOL: f64 = 1e-12;
/// `|F'(P)|` within this distance of 1 is labeled nonhyperbolic.
pub const HYPERBOLICITY_TOL: f64 = 1e-8;

/// A growth law together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GrowthLaw {
    /// `f = 1 + q - qP/K`, floored at zero.
    Logistic {
        q: f64,
        #[serde(rename = "K")]
        k: f64,
    },
    /// `f = exp(ln(1+q)(1 - P/K))`.
    Ricker {
        q: f64,
        #[serde(rename = "K")]
        k: f64,
    },
    /// `f = exp(ln(1+q)(1 - ln(1+P)))`.
    LogRicker { q: f64 },
    /// `f = w / (1 + cP)`.
    #[serde(rename = "bh-table")]
    BevertonHoltTable { w: f64, c: f64 },
    /// `f = w / (1 + P^b)`.
    Hassell { w: f64, b: f64 },
    /// `f = w / (1 + P)^b`.
    #[serde(rename = "power-bh")]
    PowerBevertonHolt { w: f64, b: f64 },
    /// `f = w / (1 + cP^b)`.
    #[serde(rename = "generalized-bh")]
    GeneralizedBevertonHolt { w: f64, c: f64, b: f64 },
    /// `f = wP^(b-1) / (1 + P^b)`.
    HollingGrowth { w: f64, b: f64 },
    /// `F = rP / (1 + P)`.
    #[serde(rename = "bh")]
    BevertonHolt { r: f64 },
    /// `F = rP^2 / (1 + P^2)`.
    #[serde(rename = "holling3")]
    HollingIII { r: f64 },
}

/// Which of the monotonicity hypotheses a law satisfies.
///
/// H1: `F(0)=0`, `F>0` for `P>0`, `F'>0` and `F(P) -> C > 0`.
/// H2: `f >= 0`, `f'<0` and `f(P) -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub h1: bool,
    pub h2: bool,
}

/// A validated, immutable growth model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GrowthLaw", into = "GrowthLaw")]
pub struct GrowthModel {
    law: GrowthLaw,
}

impl TryFrom<GrowthLaw> for GrowthModel {
    type Error = Error;
    fn try_from(law: GrowthLaw) -> Result<Self> {
        GrowthModel::new(law)
    }
}

impl From<GrowthModel> for GrowthLaw {
    fn from(m: GrowthModel) -> Self {
        m.law
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InadmissibleParam {
            name: name.to_string(),
            value,
            reason: "must be finite and strictly positive".into(),
        })
    }
}

impl GrowthModel {
    pub fn new(law: GrowthLaw) -> Result<Self> {
        for (name, value) in law.params() {
            positive(name, value)?;
        }
        if let GrowthLaw::HollingGrowth { b, .. } = law {
            if b <= 1.0 {
                return Err(Error::InadmissibleParam {
                    name: "b".into(),
                    value: b,
                    reason: "Holling growth needs b > 1 so that f(0) = 0".into(),
                });
            }
        }
        Ok(GrowthModel { law })
    }

    pub fn beverton_holt(r: f64) -> Result<Self> {
        Self::new(GrowthLaw::BevertonHolt { r })
    }

    pub fn holling_iii(r: f64) -> Result<Self> {
        Self::new(GrowthLaw::HollingIII { r })
    }

    /// Ricker law written as `P exp(r(1 - P/K))`, i.e. `ln(1+q) = r`.
    pub fn ricker_rate(r: f64, k: f64) -> Result<Self> {
        Self::new(GrowthLaw::Ricker { q: r.exp_m1(), k })
    }

    pub fn law(&self) -> GrowthLaw {
        self.law
    }

    pub fn kind_name(&self) -> &'static str {
        self.law.kind_name()
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        self.law.params()
    }

    /// Builds a model from a kind name and named parameters, rejecting
    /// unknown or missing names.
    pub fn from_params(kind: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let names: &[&str] = match kind {
            "logistic" => &["q", "K"],
            "ricker" => &["q", "K"],
            "log-ricker" => &["q"],
            "bh-table" => &["w", "c"],
            "hassell" => &["w", "b"],
            "power-bh" => &["w", "b"],
            "generalized-bh" => &["w", "c", "b"],
            "holling-growth" => &["w", "b"],
            "bh" => &["r"],
            "holling3" => &["r"],
            other => return Err(Error::usage(format!("unknown model kind `{other}`"))),
        };
        for key in params.keys() {
            if !names.contains(&key.as_str()) {
                return Err(Error::usage(format!("unknown parameter `{key}` for model `{kind}`")));
            }
        }
        let get = |n: &str| {
            params
                .get(n)
                .copied()
                .ok_or_else(|| Error::usage(format!("missing parameter `{n}` for model `{kind}`")))
        };
        let law = match kind {
            "logistic" => GrowthLaw::Logistic { q: get("q")?, k: get("K")? },
            "ricker" => GrowthLaw::Ricker { q: get("q")?, k: get("K")? },
            "log-ricker" => GrowthLaw::LogRicker { q: get("q")? },
            "bh-table" => GrowthLaw::BevertonHoltTable { w: get("w")?, c: get("c")? },
            "hassell" => GrowthLaw::Hassell { w: get("w")?, b: get("b")? },
            "power-bh" => GrowthLaw::PowerBevertonHolt { w: get("w")?, b: get("b")? },
            "generalized-bh" => GrowthLaw::GeneralizedBevertonHolt {
                w: get("w")?,
                c: get("c")?,
                b: get("b")?,
            },
            "holling-growth" => GrowthLaw::HollingGrowth { w: get("w")?, b: get("b")? },
            "bh" => GrowthLaw::BevertonHolt { r: get("r")? },
            _ => GrowthLaw::HollingIII { r: get("r")? },
        };
        Self::new(law)
    }

    // Unchecked kernels. Callers guarantee `p >= 0`.

    /// Per-capita growth rate `f(P)`.
    #[inline]
    pub fn per_capita(&self, p: f64) -> f64 {
        match self.law {
            GrowthLaw::Logistic { q, k } => (1.0 + q - q * p / k).max(0.0),
            GrowthLaw::Ricker { q, k } => (q.ln_1p() * (1.0 - p / k)).exp(),
            GrowthLaw::LogRicker { q } => (q.ln_1p() * (1.0 - p.ln_1p())).exp(),
            GrowthLaw::BevertonHoltTable { w, c } => w / (1.0 + c * p),
            GrowthLaw::Hassell { w, b } => w / (1.0 + p.powf(b)),
            GrowthLaw::PowerBevertonHolt { w, b } => w / (1.0 + p).powf(b),
            GrowthLaw::GeneralizedBevertonHolt { w, c, b } => w / (1.0 + c * p.powf(b)),
            GrowthLaw::HollingGrowth { w, b } => w * p.powf(b - 1.0) / (1.0 + p.powf(b)),
            GrowthLaw::BevertonHolt { r } => r / (1.0 + p),
            GrowthLaw::HollingIII { r } => r * p / (1.0 + p * p),
        }
    }

    /// Growth function `F(P) = P f(P)`.
    #[inline]
    pub fn growth(&self, p: f64) -> f64 {
        match self.law {
            GrowthLaw::HollingGrowth { w, b } => {
                let pb = p.powf(b);
                w * pb / (1.0 + pb)
            }
            GrowthLaw::BevertonHolt { r } => r * p / (1.0 + p),
            GrowthLaw::HollingIII { r } => {
                let p2 = p * p;
                r * p2 / (1.0 + p2)
            }
            _ => p * self.per_capita(p),
        }
    }

    /// `F'(P)`.
    #[inline]
    pub fn growth_slope(&self, p: f64) -> f64 {
        match self.law {
            GrowthLaw::Logistic { q, k } => {
                if 1.0 + q - q * p / k > 0.0 {
                    1.0 + q - 2.0 * q * p / k
                } else {
                    0.0
                }
            }
            GrowthLaw::Ricker { q, k } => {
                let lam = q.ln_1p();
                self.per_capita(p) * (1.0 - lam * p / k)
            }
            GrowthLaw::LogRicker { q } => {
                let lam = q.ln_1p();
                self.per_capita(p) * (1.0 - lam * p / (1.0 + p))
            }
            GrowthLaw::BevertonHoltTable { w, c } => {
                let d = 1.0 + c * p;
                w / (d * d)
            }
            GrowthLaw::Hassell { w, b } => {
                let pb = p.powf(b);
                let d = 1.0 + pb;
                w * (1.0 + (1.0 - b) * pb) / (d * d)
            }
            GrowthLaw::PowerBevertonHolt { w, b } => {
                w * (1.0 + (1.0 - b) * p) / (1.0 + p).powf(b + 1.0)
            }
            GrowthLaw::GeneralizedBevertonHolt { w, c, b } => {
                let cpb = c * p.powf(b);
                let d = 1.0 + cpb;
                w * (1.0 + (1.0 - b) * cpb) / (d * d)
            }
            GrowthLaw::HollingGrowth { w, b } => {
                let d = 1.0 + p.powf(b);
                w * b * p.powf(b - 1.0) / (d * d)
            }
            GrowthLaw::BevertonHolt { r } => {
                let d = 1.0 + p;
                r / (d * d)
            }
            GrowthLaw::HollingIII { r } => {
                let d = 1.0 + p * p;
                2.0 * r * p / (d * d)
            }
        }
    }

    /// `f'(P)`.
    #[inline]
    pub fn per_capita_slope(&self, p: f64) -> f64 {
        match self.law {
            GrowthLaw::Logistic { q, k } => {
                if 1.0 + q - q * p / k > 0.0 {
                    -q / k
                } else {
                    0.0
                }
            }
            GrowthLaw::Ricker { q, k } => -q.ln_1p() / k * self.per_capita(p),
            GrowthLaw::LogRicker { q } => -q.ln_1p() / (1.0 + p) * self.per_capita(p),
            GrowthLaw::BevertonHoltTable { w, c } => {
                let d = 1.0 + c * p;
                -w * c / (d * d)
            }
            GrowthLaw::Hassell { w, b } => {
                let d = 1.0 + p.powf(b);
                -w * b * p.powf(b - 1.0) / (d * d)
            }
            GrowthLaw::PowerBevertonHolt { w, b } => -w * b / (1.0 + p).powf(b + 1.0),
            GrowthLaw::GeneralizedBevertonHolt { w, c, b } => {
                let d = 1.0 + c * p.powf(b);
                -w * c * b * p.powf(b - 1.0) / (d * d)
            }
            GrowthLaw::HollingGrowth { w, b } => {
                let pb = p.powf(b);
                let d = 1.0 + pb;
                w * p.powf(b - 2.0) * ((b - 1.0) - pb) / (d * d)
            }
            GrowthLaw::BevertonHolt { r } => {
                let d = 1.0 + p;
                -r / (d * d)
            }
            GrowthLaw::HollingIII { r } => {
                let p2 = p * p;
                let d = 1.0 + p2;
                r * (1.0 - p2) / (d * d)
            }
        }
    }

    fn check_domain(p: f64) -> Result<()> {
        if p.is_nan() || p < 0.0 {
            Err(Error::Domain(format!("plant density must be nonnegative, got {p}")))
        } else {
            Ok(())
        }
    }

    pub fn eval_f(&self, p: f64) -> Result<f64> {
        Self::check_domain(p)?;
        Ok(self.per_capita(p))
    }

    pub fn eval_big_f(&self, p: f64) -> Result<f64> {
        Self::check_domain(p)?;
        Ok(self.growth(p))
    }

    pub fn eval_d_big_f(&self, p: f64) -> Result<f64> {
        Self::check_domain(p)?;
        Ok(self.growth_slope(p))
    }

    pub fn eval_df(&self, p: f64) -> Result<f64> {
        Self::check_domain(p)?;
        Ok(self.per_capita_slope(p))
    }

    /// Hypotheses known to hold for this law and parameter set.
    pub fn hypotheses(&self) -> Hypotheses {
        match self.law {
            GrowthLaw::Logistic { .. } => Hypotheses { h1: false, h2: false },
            GrowthLaw::Ricker { .. } | GrowthLaw::LogRicker { .. } => Hypotheses { h1: false, h2: true },
            GrowthLaw::BevertonHoltTable { .. } | GrowthLaw::BevertonHolt { .. } => {
                Hypotheses { h1: true, h2: true }
            }
            GrowthLaw::Hassell { b, .. }
            | GrowthLaw::PowerBevertonHolt { b, .. }
            | GrowthLaw::GeneralizedBevertonHolt { b, .. } => Hypotheses { h1: b == 1.0, h2: true },
            GrowthLaw::HollingGrowth { .. } | GrowthLaw::HollingIII { .. } => {
                Hypotheses { h1: true, h2: false }
            }
        }
    }

    /// `C = lim F(P)` for laws satisfying H1.
    pub fn saturation(&self) -> Option<f64> {
        if !self.hypotheses().h1 {
            return None;
        }
        match self.law {
            GrowthLaw::BevertonHoltTable { w, c } | GrowthLaw::GeneralizedBevertonHolt { w, c, .. } => {
                Some(w / c)
            }
            GrowthLaw::Hassell { w, .. }
            | GrowthLaw::PowerBevertonHolt { w, .. }
            | GrowthLaw::HollingGrowth { w, .. } => Some(w),
            GrowthLaw::BevertonHolt { r } | GrowthLaw::HollingIII { r } => Some(r),
            _ => None,
        }
    }

    /// Checks the declared hypotheses on a grid over `[0, bound]`. Only a
    /// declared hypothesis that fails numerically is an error; a finite grid
    /// cannot refute limits at infinity.
    pub fn verify_hypotheses(&self, bound: f64) -> Result<Hypotheses> {
        let declared = self.hypotheses();
        let n = EQUILIBRIUM_GRID;
        let grid: Vec<f64> = (0..=n).map(|k| bound * k as f64 / n as f64).collect();

        let h1_observed = {
            let c = self.saturation().unwrap_or(f64::INFINITY);
            let values: Vec<f64> = grid.iter().map(|&p| self.growth(p)).collect();
            values[0] == 0.0
                && values[1..].iter().all(|&v| v > 0.0 && v < c)
                && values.windows(2).all(|w| w[1] > w[0])
        };
        let h2_observed = {
            let values: Vec<f64> = grid.iter().map(|&p| self.per_capita(p)).collect();
            values.iter().all(|&v| v >= 0.0) && values.windows(2).all(|w| w[1] < w[0])
        };

        let name = self.to_string();
        if declared.h1 && !h1_observed {
            return Err(Error::HypothesisMismatch { model: name, hypothesis: "H1", declared: true, observed: false });
        }
        if declared.h2 && !h2_observed {
            return Err(Error::HypothesisMismatch { model: name, hypothesis: "H2", declared: true, observed: false });
        }
        Ok(Hypotheses { h1: h1_observed, h2: h2_observed })
    }

    /// Closed-form fixed points of `P = F(P)` when the law provides them.
    pub fn closed_form_equilibria(&self) -> Option<Vec<f64>> {
        let mut roots = vec![0.0];
        match self.law {
            GrowthLaw::Logistic { k, .. } | GrowthLaw::Ricker { k, .. } => roots.push(k),
            // f = 1 forces ln(1+P) = 1 whatever q is
            GrowthLaw::LogRicker { .. } => roots.push(std::f64::consts::E - 1.0),
            GrowthLaw::BevertonHoltTable { w, c } => roots.push((w - 1.0) / c),
            GrowthLaw::Hassell { w, b } => {
                if w > 1.0 {
                    roots.push((w - 1.0).powf(1.0 / b))
                }
            }
            GrowthLaw::PowerBevertonHolt { w, b } => roots.push(w.powf(1.0 / b) - 1.0),
            GrowthLaw::GeneralizedBevertonHolt { w, c, b } => {
                if w > 1.0 {
                    roots.push(((w - 1.0) / c).powf(1.0 / b))
                }
            }
            GrowthLaw::HollingGrowth { .. } => return None,
            GrowthLaw::BevertonHolt { r } => roots.push(r - 1.0),
            GrowthLaw::HollingIII { r } => {
                let disc = r * r - 4.0;
                if disc >= 0.0 {
                    let s = disc.sqrt();
                    // (r - s)/2 written as 2/(r + s) to avoid cancellation
                    roots.push(2.0 / (r + s));
                    roots.push(0.5 * (r + s));
                }
            }
        }
        roots.retain(|&p| p >= 0.0);
        roots.sort_by(f64::total_cmp);
        roots.dedup();
        Some(roots)
    }

    /// A search bound that exceeds every fixed point of the law.
    pub fn default_search_bound(&self) -> f64 {
        let mut top = self.saturation().unwrap_or(0.0);
        if let Some(roots) = self.closed_form_equilibria() {
            top = top.max(*roots.last().unwrap_or(&0.0));
        }
        if let GrowthLaw::Logistic { q, k } = self.law {
            top = top.max(k * (1.0 + q) / q);
        }
        2.0 * top + 1.0
    }

    /// Fixed points of the plant map with their stability labels. Closed forms
    /// are used when available, otherwise the numeric bracketing fallback.
    pub fn plant_equilibria(&self, search_bound: f64) -> Result<PlantEquilibriumSet> {
        Self::check_bound(search_bound)?;
        match self.closed_form_equilibria() {
            Some(roots) => Ok(self.label_roots(roots)),
            None => self.plant_equilibria_numeric(search_bound),
        }
    }

    fn check_bound(search_bound: f64) -> Result<()> {
        if search_bound.is_finite() && search_bound > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("search bound must be positive, got {search_bound}")))
        }
    }

    /// Numeric route: sign changes of `F(P) - P` on a 10^4-point grid refined by
    /// bisection, plus tangential roots found as zero-valued local minima of
    /// `|F(P) - P|`.
    pub fn plant_equilibria_numeric(&self, search_bound: f64) -> Result<PlantEquilibriumSet> {
        Self::check_bound(search_bound)?;
        let g = |p: f64| self.growth(p) - p;
        let mut roots = vec![0.0];
        for br in sign_changes(g, 0.0, search_bound, EQUILIBRIUM_GRID) {
            if br.hi == 0.0 {
                continue;
            }
            roots.push(bisect(g, br, EQUILIBRIUM_TOL, 1e-14));
        }

        let n = EQUILIBRIUM_GRID;
        let h = search_bound / n as f64;
        let node = |k: usize| search_bound * k as f64 / n as f64;
        for k in 1..n {
            let (gl, gc, gr) = (g(node(k - 1)), g(node(k)), g(node(k + 1)));
            let same_sign = (gl < 0.0) == (gc < 0.0) && (gc < 0.0) == (gr < 0.0);
            if same_sign && gc.abs() <= gl.abs() && gc.abs() <= gr.abs() && gc != 0.0 {
                let p = golden_min(|p| g(p).abs(), node(k) - h, node(k) + h);
                if g(p).abs() < 1e-12 && roots.iter().all(|&r| (r - p).abs() > 1e-6) {
                    roots.push(p);
                }
            }
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
        Ok(self.label_roots(roots))
    }

    fn label_roots(&self, roots: Vec<f64>) -> PlantEquilibriumSet {
        let derivative_at_root: Vec<f64> = roots.iter().map(|&p| self.growth_slope(p)).collect();
        let stability = derivative_at_root.iter().map(|&d| PlantStability::from_slope(d)).collect();
        PlantEquilibriumSet { roots, stability, derivative_at_root }
    }

    /// Largest plant equilibrium `Pn` (zero when the origin is the only one).
    pub fn largest_equilibrium(&self) -> Result<f64> {
        let set = self.plant_equilibria(self.default_search_bound())?;
        Ok(set.largest())
    }
}

fn golden_min<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    lo = lo.max(0.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..200 {
        if g1 < g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = g(x2);
        }
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

impl GrowthLaw {
    pub fn kind_name(&self) -> &'static str {
        match self {
            GrowthLaw::Logistic { .. } => "logistic",
            GrowthLaw::Ricker { .. } => "ricker",
            GrowthLaw::LogRicker { .. } => "log-ricker",
            GrowthLaw::BevertonHoltTable { .. } => "bh-table",
            GrowthLaw::Hassell { .. } => "hassell",
            GrowthLaw::PowerBevertonHolt { .. } => "power-bh",
            GrowthLaw::GeneralizedBevertonHolt { .. } => "generalized-bh",
            GrowthLaw::HollingGrowth { .. } => "holling-growth",
            GrowthLaw::BevertonHolt { .. } => "bh",
            GrowthLaw::HollingIII { .. } => "holling3",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            GrowthLaw::Logistic { q, k } | GrowthLaw::Ricker { q, k } => vec![("q", q), ("K", k)],
            GrowthLaw::LogRicker { q } => vec![("q", q)],
            GrowthLaw::BevertonHoltTable { w, c } => vec![("w", w), ("c", c)],
            GrowthLaw::Hassell { w, b }
            | GrowthLaw::PowerBevertonHolt { w, b }
            | GrowthLaw::HollingGrowth { w, b } => vec![("w", w), ("b", b)],
            GrowthLaw::GeneralizedBevertonHolt { w, c, b } => vec![("w", w), ("c", c), ("b", b)],
            GrowthLaw::BevertonHolt { r } | GrowthLaw::HollingIII { r } => vec![("r", r)],
        }
    }
}

impl fmt::Display for GrowthModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kind={}", self.kind_name())?;
        for (name, value) in self.params() {
            write!(f, " {name}={value}")?;
        }
        Ok(())
    }
}

/// Parses `kind=bh r=2.5` (whitespace, comma or newline separated).
impl FromStr for GrowthModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut kind = None;
        let mut params = BTreeMap::new();
        for token in s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::usage(format!("expected key=value, got `{token}`")))?;
            if key == "kind" {
                kind = Some(value.to_string());
            } else {
                let v: f64 = value
                    .parse()
                    .map_err(|_| Error::usage(format!("parameter `{key}` is not a number: `{value}`")))?;
                params.insert(key.to_string(), v);
            }
        }
        let kind = kind.ok_or_else(|| Error::usage("model specification needs `kind=`"))?;
        GrowthModel::from_params(&kind, &params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlantStability {
    Sink,
    Source,
    Nonhyperbolic,
}

impl PlantStability {
    pub fn from_slope(d: f64) -> Self {
        if (d.abs() - 1.0).abs() <= HYPERBOLICITY_TOL {
            PlantStability::Nonhyperbolic
        } else if d.abs() < 1.0 {
            PlantStability::Sink
        } else {
            PlantStability::Source
        }
    }
}

/// Sorted fixed points `0 = P0 < P1 < ... < Pn` of the plant map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantEquilibriumSet {
    pub roots: Vec<f64>,
    pub stability: Vec<PlantStability>,
    pub derivative_at_root: Vec<f64>,
}

impl PlantEquilibriumSet {
    pub fn largest(&self) -> f64 {
        self.roots.last().copied().unwrap_or(0.0)
    }

    /// Smallest positive equilibrium `P1`, if any.
    pub fn smallest_positive(&self) -> Option<f64> {
        self.roots.iter().copied().find(|&p| p > 0.0)
    }

    /// True when every root is hyperbolic and the labels alternate with the
    /// largest root a sink.
    pub fn alternates(&self) -> bool {
        let hyperbolic = self.stability.iter().all(|s| *s != PlantStability::Nonhyperbolic);
        hyperbolic
            && self.stability.windows(2).all(|w| w[0] != w[1])
            && self.stability.last() == Some(&PlantStability::Sink)
    }
}

/// JSON shape `{kind, params, roots[], labels[], dF[]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantEquilibriumReport {
    pub kind: String,
    pub params: BTreeMap<String, f64>,
    pub roots: Vec<f64>,
    pub labels: Vec<PlantStability>,
    #[serde(rename = "dF")]
    pub d_f: Vec<f64>,
}

impl PlantEquilibriumReport {
    pub fn new(model: &GrowthModel, set: &PlantEquilibriumSet) -> Self {
        PlantEquilibriumReport {
            kind: model.kind_name().to_string(),
            params: model.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            roots: set.roots.clone(),
            labels: set.stability.clone(),
            d_f: set.derivative_at_root.clone(),
        }
    }
}

/// One-parameter model families swept by the bifurcation scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    /// `rP/(1+P)`.
    BevertonHolt,
    /// `rP^2/(1+P^2)`.
    HollingIII,
    /// `P exp(r(1-P))`.
    Ricker,
}

impl ModelFamily {
    pub fn model(&self, r: f64) -> Result<GrowthModel> {
        match self {
            ModelFamily::BevertonHolt => GrowthModel::beverton_holt(r),
            ModelFamily::HollingIII => GrowthModel::holling_iii(r),
            ModelFamily::Ricker => GrowthModel::ricker_rate(r, 1.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::BevertonHolt => "bh",
            ModelFamily::HollingIII => "holling3",
            ModelFamily::Ricker => "ricker",
        }
    }

    /// Smallest `r` for which the family has a positive plant equilibrium.
    pub fn r_threshold(&self) -> f64 {
        match self {
            ModelFamily::BevertonHolt => 1.0,
            ModelFamily::HollingIII => 2.0,
            ModelFamily::Ricker => 0.0,
        }
    }
}

impl FromStr for ModelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bh" | "beverton-holt" => Ok(ModelFamily::BevertonHolt),
            "holling3" | "holling-iii" | "h3" => Ok(ModelFamily::HollingIII),
            "ricker" => Ok(ModelFamily::Ricker),
            other => Err(Error::usage(format!("unknown model family `{other}` (expected bh, holling3, ricker)"))),
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zoo() -> Vec<GrowthModel> {
        [
            GrowthLaw::Logistic { q: 1.5, k: 2.0 },
            GrowthLaw::Ricker { q: 2.0, k: 1.5 },
            GrowthLaw::LogRicker { q: 1.2 },
            GrowthLaw::BevertonHoltTable { w: 3.0, c: 0.5 },
            GrowthLaw::Hassell { w: 2.5, b: 1.7 },
            GrowthLaw::PowerBevertonHolt { w: 4.0, b: 0.8 },
            GrowthLaw::GeneralizedBevertonHolt { w: 3.5, c: 0.7, b: 1.3 },
            GrowthLaw::HollingGrowth { w: 3.0, b: 2.5 },
            GrowthLaw::BevertonHolt { r: 2.5 },
            GrowthLaw::HollingIII { r: 2.5 },
        ]
        .into_iter()
        .map(|l| GrowthModel::new(l).unwrap())
        .collect()
    }

    #[test]
    fn per_capita_at_zero() {
        let expected = [2.5, 3.0, 2.2, 3.0, 2.5, 4.0, 3.5, 0.0, 2.5, 0.0];
        for (m, want) in zoo().iter().zip(expected) {
            assert!((m.eval_f(0.0).unwrap() - want).abs() < 1e-15, "{m}");
            assert_eq!(m.eval_big_f(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn beverton_holt_fixed_point_examples() {
        let m = GrowthModel::beverton_holt(2.5).unwrap();
        assert_eq!(m.eval_big_f(0.0).unwrap(), 0.0);
        assert!((m.eval_big_f(1.5).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(m.eval_f(0.0).unwrap(), 2.5);
        let h3 = GrowthModel::holling_iii(2.5).unwrap();
        assert!((h3.eval_big_f(2.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ricker_per_capita_is_one_at_k() {
        let m = GrowthModel::new(GrowthLaw::Ricker { q: 3.0, k: 1.7 }).unwrap();
        assert!((m.eval_f(1.7).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-6;
        for m in zoo() {
            for k in 1..=60 {
                let p = 0.05 + 0.1 * k as f64;
                if let GrowthLaw::Logistic { q, k } = m.law() {
                    // kink where f hits zero
                    if (p - k * (1.0 + q) / q).abs() < 0.01 {
                        continue;
                    }
                }
                let fd_big = (m.growth(p + h) - m.growth(p - h)) / (2.0 * h);
                let fd_small = (m.per_capita(p + h) - m.per_capita(p - h)) / (2.0 * h);
                let an_big = m.growth_slope(p);
                let an_small = m.per_capita_slope(p);
                let ok = |fd: f64, an: f64| (fd - an).abs() <= 1e-5 * an.abs().max(1e-3);
                assert!(ok(fd_big, an_big), "{m} dF at {p}: {fd_big} vs {an_big}");
                assert!(ok(fd_small, an_small), "{m} df at {p}: {fd_small} vs {an_small}");
            }
        }
    }

    #[test]
    fn negative_density_and_bad_params_rejected() {
        let m = GrowthModel::beverton_holt(2.0).unwrap();
        assert!(matches!(m.eval_big_f(-1.0), Err(Error::Domain(_))));
        assert!(matches!(m.eval_f(f64::NAN), Err(Error::Domain(_))));
        assert!(GrowthModel::beverton_holt(0.0).is_err());
        assert!(GrowthModel::beverton_holt(f64::INFINITY).is_err());
        assert!(GrowthModel::new(GrowthLaw::HollingGrowth { w: 3.0, b: 0.5 }).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let bh = GrowthModel::beverton_holt(2.5).unwrap().plant_equilibria(10.0).unwrap();
        assert_eq!(bh.roots, vec![0.0, 1.5]);
        assert_eq!(bh.stability, vec![PlantStability::Source, PlantStability::Sink]);

        let h3 = GrowthModel::holling_iii(2.5).unwrap().plant_equilibria(10.0).unwrap();
        assert_eq!(h3.roots.len(), 3);
        assert!((h3.roots[1] - 0.5).abs() < 1e-15 && (h3.roots[2] - 2.0).abs() < 1e-15);
        assert_eq!(
            h3.stability,
            vec![PlantStability::Sink, PlantStability::Source, PlantStability::Sink]
        );

        let lone = GrowthModel::holling_iii(1.5).unwrap().plant_equilibria(10.0).unwrap();
        assert_eq!(lone.roots, vec![0.0]);
        assert_eq!(lone.stability, vec![PlantStability::Sink]);
    }

    #[test]
    fn numeric_route_agrees_with_closed_forms() {
        for m in zoo() {
            let Some(closed) = m.closed_form_equilibria() else { continue };
            let bound = m.default_search_bound();
            let numeric = m.plant_equilibria_numeric(bound).unwrap();
            assert_eq!(numeric.roots.len(), closed.len(), "{m}: {:?} vs {closed:?}", numeric.roots);
            for (a, b) in numeric.roots.iter().zip(&closed) {
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn holling_growth_roots_solve_the_polynomial() {
        let m = GrowthModel::new(GrowthLaw::HollingGrowth { w: 3.0, b: 2.5 }).unwrap();
        let set = m.plant_equilibria(m.default_search_bound()).unwrap();
        assert_eq!(set.roots.len(), 3);
        for &p in &set.roots[1..] {
            // w P^(b-1) = 1 + P^b
            assert!((3.0 * p.powf(1.5) - 1.0 - p.powf(2.5)).abs() < 1e-9);
            assert!((m.growth(p) - p).abs() < 1e-10);
        }
        assert!(set.alternates());
    }

    #[test]
    fn tangential_root_is_nonhyperbolic() {
        let m = GrowthModel::holling_iii(2.0).unwrap();
        let closed = m.plant_equilibria(5.0).unwrap();
        assert_eq!(closed.roots, vec![0.0, 1.0]);
        assert_eq!(closed.stability[1], PlantStability::Nonhyperbolic);
        let numeric = m.plant_equilibria_numeric(5.0).unwrap();
        assert_eq!(numeric.roots.len(), 2, "{:?}", numeric.roots);
        assert!((numeric.roots[1] - 1.0).abs() < 1e-6);
        assert_eq!(numeric.stability[1], PlantStability::Nonhyperbolic);
    }

    #[test]
    fn log_ricker_equilibrium_is_e_minus_one() {
        let m = GrowthModel::new(GrowthLaw::LogRicker { q: 3.0 }).unwrap();
        let numeric = m.plant_equilibria_numeric(5.0).unwrap();
        assert!((numeric.roots[1] - (std::f64::consts::E - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn declared_hypotheses_hold_on_grid() {
        for m in zoo() {
            m.verify_hypotheses(m.default_search_bound()).unwrap();
        }
        let m = GrowthModel::new(GrowthLaw::PowerBevertonHolt { w: 3.0, b: 1.0 }).unwrap();
        let h = m.verify_hypotheses(10.0).unwrap();
        assert!(h.h1 && h.h2);
        let hump = GrowthModel::new(GrowthLaw::PowerBevertonHolt { w: 3.0, b: 2.0 }).unwrap();
        assert!(!hump.verify_hypotheses(10.0).unwrap().h1);
    }

    #[test]
    fn parses_text_spec() {
        let m: GrowthModel = "kind=generalized-bh w=3 c=0.5 b=1".parse().unwrap();
        assert_eq!(m.law(), GrowthLaw::GeneralizedBevertonHolt { w: 3.0, c: 0.5, b: 1.0 });
        assert!("kind=bh r=2 extra=1".parse::<GrowthModel>().is_err());
        assert!("kind=bh".parse::<GrowthModel>().is_err());
        assert!("kind=nope r=1".parse::<GrowthModel>().is_err());
        let round: GrowthModel = m.to_string().parse().unwrap();
        assert_eq!(round, m);
    }

    #[test]
    fn report_serializes_with_expected_fields() {
        let m = GrowthModel::beverton_holt(2.5).unwrap();
        let set = m.plant_equilibria(10.0).unwrap();
        let json = serde_json::to_value(PlantEquilibriumReport::new(&m, &set)).unwrap();
        assert_eq!(json["kind"], "bh");
        assert_eq!(json["params"]["r"], 2.5);
        assert_eq!(json["labels"][1], "sink");
        assert!(json["dF"].is_array());
    }
}
