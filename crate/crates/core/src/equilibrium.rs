//! Boundary and interior equilibria of the coupled maps, their stability, and
//! the extinction / transcritical / persistence predicates.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::growth::GrowthModel;
use crate::roots::{bisect, Bracket};
use crate::system::{eigenvalues, State, SystemSpec, Variant};

/// Half-width of the band around `a Pn = 1` reported as marginal.
pub const TRANSCRITICAL_MARGIN: f64 = 1e-6;
/// Eigenvalue modulus within this of 1 is nonhyperbolic.
pub const UNIT_CIRCLE_TOL: f64 = 1e-8;
/// Subintervals used to bracket the interior root and to count sign changes.
pub const INTERIOR_SCAN: usize = 10_000;
/// Below this `aH` the nullcline quotients use their series.
const SERIES_CUTOFF: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Origin,
    /// `(P^i, 0)` with `i >= 1` the index among the sorted plant equilibria.
    Boundary(usize),
    Interior,
}

impl fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquilibriumKind::Origin => f.write_str("origin"),
            EquilibriumKind::Boundary(i) => write!(f, "boundary-{i}"),
            EquilibriumKind::Interior => f.write_str("interior"),
        }
    }
}

impl Serialize for EquilibriumKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Sink,
    Saddle,
    Source,
    Nonhyperbolic,
}

impl Stability {
    pub fn classify(eig: &[Complex64; 2]) -> Self {
        let m = [eig[0].norm(), eig[1].norm()];
        if m.iter().any(|x| (x - 1.0).abs() <= UNIT_CIRCLE_TOL) {
            Stability::Nonhyperbolic
        } else if m.iter().all(|&x| x < 1.0) {
            Stability::Sink
        } else if m.iter().all(|&x| x > 1.0) {
            Stability::Source
        } else {
            Stability::Saddle
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub location: State,
    pub kind: EquilibriumKind,
    pub eigenvalues: [Complex64; 2],
    pub stability: Stability,
    /// Sup-norm of `step(s) - s`.
    pub residual: f64,
}

impl EquilibriumReport {
    fn at(spec: &SystemSpec, location: State, kind: EquilibriumKind) -> Result<Self> {
        let eig = eigenvalues(&spec.jacobian(location)?);
        Ok(EquilibriumReport {
            location,
            kind,
            eigenvalues: eig,
            stability: Stability::classify(&eig),
            residual: spec.step(location).sup_distance(&location),
        })
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues[0].norm()
    }
}

impl Serialize for EquilibriumReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row<'a> {
            #[serde(rename = "P")]
            p: f64,
            #[serde(rename = "H")]
            h: f64,
            kind: String,
            eig_re: [f64; 2],
            eig_im: [f64; 2],
            stability: &'a Stability,
            residual: f64,
        }
        Row {
            p: self.location.p,
            h: self.location.h,
            kind: self.kind.to_string(),
            eig_re: [self.eigenvalues[0].re, self.eigenvalues[1].re],
            eig_im: [self.eigenvalues[0].im, self.eigenvalues[1].im],
            stability: &self.stability,
            residual: self.residual,
        }
        .serialize(s)
    }
}

/// Whether an interior equilibrium exists. `Marginal` covers the band of
/// half-width [`TRANSCRITICAL_MARGIN`] around `a Pn = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Existence {
    Absent,
    Marginal,
    Present,
}

#[derive(Debug, Clone)]
pub enum InteriorEquilibrium {
    Absent,
    Marginal,
    Present(EquilibriumReport),
}

impl InteriorEquilibrium {
    pub fn report(&self) -> Option<&EquilibriumReport> {
        match self {
            InteriorEquilibrium::Present(r) => Some(r),
            _ => None,
        }
    }

    pub fn existence(&self) -> Existence {
        match self {
            InteriorEquilibrium::Absent => Existence::Absent,
            InteriorEquilibrium::Marginal => Existence::Marginal,
            InteriorEquilibrium::Present(_) => Existence::Present,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    /// `1 / Pn`; infinite when the origin is the only plant equilibrium.
    pub a_crit_transcritical: f64,
    pub a_times_pn: f64,
    /// `a Pn < 1`: the herbivore dies out.
    pub extinction_predicate: bool,
    /// H1 and `a P1 > 1` and `f(0) > 1`: uniform persistence.
    pub persistence_predicate: bool,
    pub interior_exists: Existence,
}

/// `H / (e^{aH} - 1)`, the herbivore nullcline `P(H)`; equals `1/a` at `H = 0`.
pub fn herbivore_nullcline(a: f64, h: f64) -> f64 {
    let x = a * h;
    if x < SERIES_CUTOFF {
        1.0 / a - 0.5 * h + a * h * h / 12.0
    } else {
        h / x.exp_m1()
    }
}

/// `H / (1 - e^{-aH})`; equals `1/a` at `H = 0`.
pub fn consumption_ratio(a: f64, h: f64) -> f64 {
    let x = a * h;
    if x < SERIES_CUTOFF {
        1.0 / a + 0.5 * h + a * h * h / 12.0
    } else {
        h / -(-x).exp_m1()
    }
}

/// Scalar function of `H` whose positive zero is the interior equilibrium.
///
/// Model II: `F(H/(e^{aH}-1)) - H/(1-e^{-aH})`.
/// Model I: `f(H/(1-e^{-aH})) - e^{aH}` (from `1 = f(P) e^{-aH}`).
pub fn interior_residual(spec: &SystemSpec, h: f64) -> f64 {
    let a = spec.a;
    match spec.variant {
        Variant::ModelII => spec.model.growth(herbivore_nullcline(a, h)) - consumption_ratio(a, h),
        Variant::ModelI => spec.model.per_capita(consumption_ratio(a, h)) - (a * h).exp(),
    }
}

/// Recovers the plant density at an interior equilibrium from its `H`.
pub fn interior_plant(spec: &SystemSpec, h: f64) -> f64 {
    match spec.variant {
        Variant::ModelII => herbivore_nullcline(spec.a, h),
        Variant::ModelI => consumption_ratio(spec.a, h),
    }
}

/// Upper end `a Pn * Pn` of the interval searched for the interior root.
pub fn interior_search_bound(spec: &SystemSpec, pn: f64) -> f64 {
    spec.a * pn * pn
}

/// Number of sign changes of [`interior_residual`] over `n` equal subintervals
/// of `[0, H_max]`.
pub fn interior_sign_changes(spec: &SystemSpec, n: usize) -> Result<usize> {
    let pn = spec.largest_plant_equilibrium()?;
    let hmax = interior_search_bound(spec, pn);
    if hmax <= 0.0 {
        return Ok(0);
    }
    Ok(crate::roots::sign_changes(|h| interior_residual(spec, h), 0.0, hmax, n)
        .into_iter()
        .filter(|b| b.hi > 0.0)
        .count())
}

fn require_supported(spec: &SystemSpec) -> Result<()> {
    let hyp = spec.model.hypotheses();
    match spec.variant {
        Variant::ModelII if !hyp.h1 => Err(Error::UnsupportedModel(format!(
            "interior equilibria of Model II need a monotone (H1) growth law; {} is not",
            spec.model
        ))),
        Variant::ModelI if !(hyp.h1 && hyp.h2) => Err(Error::UnsupportedModel(format!(
            "interior equilibria of Model I need both H1 and H2; {} does not satisfy both",
            spec.model
        ))),
        _ => Ok(()),
    }
}

fn existence_from(spec: &SystemSpec, pn: f64) -> Existence {
    let x = spec.a * pn;
    if x <= 1.0 - TRANSCRITICAL_MARGIN {
        Existence::Absent
    } else if x < 1.0 + TRANSCRITICAL_MARGIN {
        Existence::Marginal
    } else if interior_residual(spec, 0.0) > 0.0 {
        Existence::Present
    } else {
        // the nullclines start in the wrong order: with several plant
        // equilibria, 1/a can fall below P1
        Existence::Absent
    }
}

/// Boundary equilibria `(0,0)` and `(P^i, 0)`.
pub fn boundary_equilibria(spec: &SystemSpec) -> Result<Vec<EquilibriumReport>> {
    let set = spec.model.plant_equilibria(spec.model.default_search_bound())?;
    set.roots
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let kind = if i == 0 { EquilibriumKind::Origin } else { EquilibriumKind::Boundary(i) };
            EquilibriumReport::at(spec, State { p, h: 0.0 }, kind)
        })
        .collect()
}

/// Locates the unique interior equilibrium by bracketing the nullcline
/// residual on `(0, a Pn^2]` and bisecting.
pub fn interior_equilibrium(spec: &SystemSpec) -> Result<InteriorEquilibrium> {
    require_supported(spec)?;
    let pn = spec.largest_plant_equilibrium()?;
    match existence_from(spec, pn) {
        Existence::Absent => return Ok(InteriorEquilibrium::Absent),
        Existence::Marginal => return Ok(InteriorEquilibrium::Marginal),
        Existence::Present => {}
    }
    let hmax = interior_search_bound(spec, pn);
    let g = |h: f64| interior_residual(spec, h);
    let bracket = first_sign_change(g, hmax, INTERIOR_SCAN)
        .ok_or(Error::BracketFailure { a_pn: spec.a * pn })?;
    let h = bisect(g, bracket, 0.0, 1e-12);
    let location = State { p: interior_plant(spec, h), h };
    Ok(InteriorEquilibrium::Present(EquilibriumReport::at(spec, location, EquilibriumKind::Interior)?))
}

fn first_sign_change<G: Fn(f64) -> f64>(g: G, hmax: f64, n: usize) -> Option<Bracket> {
    let mut x0 = 0.0;
    let mut g0 = g(0.0);
    for k in 1..=n {
        let x = if k == n { hmax } else { hmax * k as f64 / n as f64 };
        let gx = g(x);
        if gx == 0.0 {
            return Some(Bracket { lo: x, hi: x, g_lo: 0.0, g_hi: 0.0 });
        }
        if (g0 < 0.0) != (gx < 0.0) {
            return Some(Bracket { lo: x0, hi: x, g_lo: g0, g_hi: gx });
        }
        x0 = x;
        g0 = gx;
    }
    None
}

pub fn thresholds(spec: &SystemSpec) -> Result<ThresholdReport> {
    let set = spec.model.plant_equilibria(spec.model.default_search_bound())?;
    let pn = set.largest();
    let a_pn = spec.a * pn;
    let h1 = spec.model.hypotheses().h1;
    let persistence = h1
        && set.smallest_positive().is_some_and(|p1| spec.a * p1 > 1.0)
        && spec.model.per_capita(0.0) > 1.0;
    Ok(ThresholdReport {
        a_crit_transcritical: if pn > 0.0 { 1.0 / pn } else { f64::INFINITY },
        a_times_pn: a_pn,
        extinction_predicate: a_pn < 1.0,
        persistence_predicate: persistence,
        interior_exists: existence_from(spec, pn),
    })
}

/// Everything known about the equilibria of one system, in the JSON report
/// shape `{variant, model, a, equilibria[], thresholds}`.
#[derive(Debug, Clone, Serialize)]
pub struct SystemReport {
    pub variant: Variant,
    pub model: GrowthModel,
    pub a: f64,
    pub equilibria: Vec<EquilibriumReport>,
    pub thresholds: ThresholdReport,
}

pub fn analyze(spec: &SystemSpec) -> Result<SystemReport> {
    let mut equilibria = boundary_equilibria(spec)?;
    match interior_equilibrium(spec) {
        Ok(InteriorEquilibrium::Present(r)) => equilibria.push(r),
        Ok(_) | Err(Error::UnsupportedModel(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(SystemReport {
        variant: spec.variant,
        model: spec.model,
        a: spec.a,
        equilibria,
        thresholds: thresholds(spec)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(v: Variant, m: GrowthModel, a: f64) -> SystemSpec {
        SystemSpec::new(v, m, a).unwrap()
    }

    fn bh2(r: f64, a: f64) -> SystemSpec {
        spec(Variant::ModelII, GrowthModel::beverton_holt(r).unwrap(), a)
    }

    #[test]
    fn series_matches_closed_form_at_cutoff() {
        let a: f64 = 2.0;
        for h in [4.9e-6, 5.1e-6] {
            let direct = h / (a * h).exp_m1();
            assert!((herbivore_nullcline(a, h) - direct).abs() < 1e-12);
            let direct = h / -(-a * h).exp_m1();
            assert!((consumption_ratio(a, h) - direct).abs() < 1e-12);
        }
        assert_eq!(herbivore_nullcline(4.0, 0.0), 0.25);
        assert_eq!(consumption_ratio(4.0, 0.0), 0.25);
    }

    #[test]
    fn boundary_reports_for_beverton_holt() {
        let reports = boundary_equilibria(&bh2(2.5, 2.0)).unwrap();
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].kind, EquilibriumKind::Origin);
        assert_eq!(reports[0].eigenvalues[0].re, 2.5);
        assert_eq!(reports[0].eigenvalues[1].re, 0.0);
        let b = &reports[1];
        assert_eq!(b.kind, EquilibriumKind::Boundary(1));
        assert!((b.eigenvalues[0].re - 3.0).abs() < 1e-14);
        assert!((b.eigenvalues[1].re - 0.4).abs() < 1e-14);
        assert_eq!(b.stability, Stability::Saddle);
    }

    #[test]
    fn lone_origin_is_a_sink() {
        let s = spec(Variant::ModelII, GrowthModel::holling_iii(1.5).unwrap(), 0.7);
        let reports = boundary_equilibria(&s).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].eigenvalues, [Complex64::new(0.0, 0.0); 2]);
        assert_eq!(reports[0].stability, Stability::Sink);
    }

    #[test]
    fn largest_boundary_is_sink_below_threshold() {
        let reports = boundary_equilibria(&bh2(2.5, 0.5)).unwrap();
        assert_eq!(reports[1].stability, Stability::Sink);
    }

    #[test]
    fn interior_for_beverton_holt() {
        let s = bh2(2.5, 2.0);
        let InteriorEquilibrium::Present(r) = interior_equilibrium(&s).unwrap() else {
            panic!("expected interior equilibrium")
        };
        assert!(r.residual < 1e-10, "{}", r.residual);
        assert!(r.location.p > 0.0 && r.location.h > 0.0);
        assert_eq!(interior_sign_changes(&s, INTERIOR_SCAN).unwrap(), 1);
    }

    #[test]
    fn model_one_interior() {
        let s = spec(Variant::ModelI, GrowthModel::beverton_holt(3.0).unwrap(), 1.2);
        let r = interior_equilibrium(&s).unwrap();
        let r = r.report().expect("present");
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn model_one_rejects_non_h2_law() {
        let s = spec(Variant::ModelI, GrowthModel::holling_iii(3.0).unwrap(), 1.0);
        assert!(matches!(interior_equilibrium(&s), Err(Error::UnsupportedModel(_))));
        let s = spec(Variant::ModelII, GrowthModel::ricker_rate(2.0, 1.0).unwrap(), 1.5);
        assert!(matches!(interior_equilibrium(&s), Err(Error::UnsupportedModel(_))));
    }

    #[test]
    fn holling_interior_absent_below_transcritical() {
        let r = 2.5;
        let pn = 2.0;
        let s = spec(Variant::ModelII, GrowthModel::holling_iii(r).unwrap(), 0.9 / pn);
        assert!(matches!(interior_equilibrium(&s).unwrap(), InteriorEquilibrium::Absent));
        // past 1/P1 the nullclines no longer cross either
        let s = spec(Variant::ModelII, GrowthModel::holling_iii(r).unwrap(), 2.5);
        assert!(matches!(interior_equilibrium(&s).unwrap(), InteriorEquilibrium::Absent));
    }

    #[test]
    fn marginal_band() {
        let s = bh2(2.5, 1.0 / 1.5 * (1.0 + 1e-7));
        assert!(matches!(interior_equilibrium(&s).unwrap(), InteriorEquilibrium::Marginal));
        assert_eq!(thresholds(&s).unwrap().interior_exists, Existence::Marginal);
    }

    #[test]
    fn threshold_examples() {
        let t = thresholds(&bh2(2.5, 2.0)).unwrap();
        assert!((t.a_crit_transcritical - 2.0 / 3.0).abs() < 1e-15);
        assert!(!t.extinction_predicate);
        assert!(t.persistence_predicate);
        assert_eq!(t.interior_exists, Existence::Present);

        assert!(thresholds(&bh2(2.5, 0.5)).unwrap().extinction_predicate);

        for a in [0.3, 0.7, 1.5, 4.0] {
            let s = spec(Variant::ModelII, GrowthModel::holling_iii(2.5).unwrap(), a);
            assert!(!thresholds(&s).unwrap().persistence_predicate);
        }
    }

    #[test]
    fn report_json_shape() {
        let rep = analyze(&bh2(2.5, 2.0)).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["variant"], "II");
        assert_eq!(v["model"]["kind"], "bh");
        assert_eq!(v["equilibria"].as_array().unwrap().len(), 3);
        assert_eq!(v["equilibria"][2]["kind"], "interior");
        assert_eq!(v["equilibria"][1]["stability"], "saddle");
        assert!(v["equilibria"][0]["eig_re"].is_array());
        assert_eq!(v["thresholds"]["interior_exists"], "present");
    }
}
