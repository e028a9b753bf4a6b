//! Neimark-Sacker, transcritical and collapse curves in the `(r, a)` plane,
//! and attractor classification of long-run orbits.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{interior_equilibrium, EquilibriumReport, InteriorEquilibrium};
use crate::error::{Error, Result};
use crate::growth::ModelFamily;
use crate::system::{State, SystemSpec, Variant};

/// Tail values of `H` below this count as herbivore loss.
pub const COLLAPSE_DELTA: f64 = 1e-12;
/// A tail whose extent in both coordinates is below this is a fixed point.
pub const FIXED_DIAMETER: f64 = 1e-8;
/// Return times with a coefficient of variation below this form a cycle.
pub const CYCLE_CV: f64 = 0.05;
/// Fewest Poincaré returns needed before a tail can be called a cycle.
pub const MIN_RETURNS: usize = 10;
pub const NS_TOL: f64 = 1e-9;
pub const NS_IMAG_TOL: f64 = 1e-8;
/// Bisection stops once the collapse bracket is this narrow in `a`.
pub const COLLAPSE_WIDTH: f64 = 1e-4;
/// Coarse grid used to find the first unit-circle crossing along `a`.
const NS_SCAN: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttractorLabel {
    OriginExtinct,
    BoundaryPlantOnly,
    InteriorFixed,
    InvariantCycle,
    InteriorComplex,
    CollapsedNumerically,
}

impl AttractorLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttractorLabel::OriginExtinct => "origin_extinct",
            AttractorLabel::BoundaryPlantOnly => "boundary_plant_only",
            AttractorLabel::InteriorFixed => "interior_fixed",
            AttractorLabel::InvariantCycle => "invariant_cycle",
            AttractorLabel::InteriorComplex => "interior_complex",
            AttractorLabel::CollapsedNumerically => "collapsed_numerically",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        use AttractorLabel::*;
        [OriginExtinct, BoundaryPlantOnly, InteriorFixed, InvariantCycle, InteriorComplex, CollapsedNumerically]
            .into_iter()
            .find(|l| l.as_str() == s)
    }

    /// Labels meaning the herbivore is gone from the tail.
    pub fn herbivore_lost(&self) -> bool {
        matches!(
            self,
            AttractorLabel::OriginExtinct | AttractorLabel::BoundaryPlantOnly | AttractorLabel::CollapsedNumerically
        )
    }
}

impl fmt::Display for AttractorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub min_h_tail: f64,
    pub max_h_tail: f64,
    pub max_p_tail: f64,
    pub cycle_period_estimate: Option<f64>,
    pub return_time_cv: Option<f64>,
    pub spectral_radius_at_interior: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorClass {
    pub label: AttractorLabel,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub transient: usize,
    pub sample: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { transient: 10_000, sample: 2000 }
    }
}

/// Runs the transient, then collects `sample` states.
fn tail(spec: &SystemSpec, s0: State, opts: ClassifyOptions) -> Result<Vec<State>> {
    s0.validate()?;
    let mut s = s0;
    for k in 1..=opts.transient {
        s = spec.step(s);
        crate::system::check_bounded(k, s)?;
    }
    let mut out = Vec::with_capacity(opts.sample);
    for k in 1..=opts.sample {
        s = spec.step(s);
        crate::system::check_bounded(opts.transient + k, s)?;
        out.push(s);
    }
    Ok(out)
}

/// True when the sequence decreases monotonically and its Aitken
/// extrapolated limit is negligible against its size: slow geometric decay
/// towards zero that has not yet dropped below [`COLLAPSE_DELTA`].
fn decays_to_zero(xs: &[f64]) -> bool {
    let n = xs.len();
    if n < 8 || xs.windows(2).any(|w| w[1] > w[0]) {
        return false;
    }
    let m = n / 4;
    let (x0, x1, x2) = (xs[n - 1 - 2 * m], xs[n - 1 - m], xs[n - 1]);
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let denom = d2 - d1;
    if d2 == 0.0 {
        return x2 < COLLAPSE_DELTA;
    }
    if denom <= 0.0 {
        return false;
    }
    let limit = x2 - d2 * d2 / denom;
    limit < 1e-3 * x0
}

fn lost(xs: &[f64]) -> bool {
    xs.iter().all(|&x| x < COLLAPSE_DELTA) || decays_to_zero(xs)
}

/// Step indices at which the orbit completes a turn around `c`, measured by
/// the accumulated polar angle in the orbit's net direction of rotation.
pub fn poincare_returns(states: &[State], c: State) -> Vec<usize> {
    let angle = |s: &State| (s.h - c.h).atan2(s.p - c.p);
    let mut phase = Vec::with_capacity(states.len());
    let mut acc = 0.0;
    let mut prev = angle(&states[0]);
    phase.push(0.0);
    for s in &states[1..] {
        let th = angle(s);
        let mut d = th - prev;
        if d > std::f64::consts::PI {
            d -= TAU;
        } else if d <= -std::f64::consts::PI {
            d += TAU;
        }
        acc += d;
        phase.push(acc);
        prev = th;
    }
    let dir = if acc >= 0.0 { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    let mut turns = 0.0;
    for (k, ph) in phase.iter().enumerate() {
        let t = (dir * ph / TAU).floor();
        if t > turns {
            turns = t;
            out.push(k);
        }
    }
    out
}

fn return_time_stats(returns: &[usize]) -> Option<(f64, f64, usize)> {
    if returns.len() < MIN_RETURNS + 1 {
        return None;
    }
    let gaps: Vec<f64> = returns.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let sd = (gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n).sqrt();
    let lo = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().cloned().fold(0.0, f64::max);
    Some((mean, sd / mean, (hi - lo) as usize))
}

fn interior_report(spec: &SystemSpec) -> Option<EquilibriumReport> {
    match interior_equilibrium(spec) {
        Ok(InteriorEquilibrium::Present(r)) => Some(r),
        _ => None,
    }
}

/// Simulates from `s0`, drops the transient and labels what remains.
///
/// Herbivore loss is split by the plant tail (origin vs plant-only) and, when
/// the herbivore should persist (`a Pn > 1`), reported as numerical collapse.
/// Otherwise the tail is a fixed point, a cycle (regular turns around the
/// interior equilibrium, or around the tail centroid when none is known) or
/// complex.
pub fn attractor_classify(spec: &SystemSpec, s0: State, opts: ClassifyOptions) -> Result<AttractorClass> {
    if opts.sample < 8 {
        return Err(Error::usage("sample length must be at least 8"));
    }
    let tail = tail(spec, s0, opts)?;
    let hs: Vec<f64> = tail.iter().map(|s| s.h).collect();
    let ps: Vec<f64> = tail.iter().map(|s| s.p).collect();
    let (min_h, max_h) = min_max(&hs);
    let (min_p, max_p) = min_max(&ps);
    let interior = interior_report(spec);
    let mut diagnostics = Diagnostics {
        min_h_tail: min_h,
        max_h_tail: max_h,
        max_p_tail: max_p,
        cycle_period_estimate: None,
        return_time_cv: None,
        spectral_radius_at_interior: interior.as_ref().map(|r| r.spectral_radius()),
    };
    // with nothing interior to approach, a monotone herbivore decline is
    // extinction even when it is algebraic (a Pn = 1) and Aitken misses it
    let fading = interior.is_none() && hs.windows(2).all(|w| w[1] <= w[0]);
    let label = if lost(&hs) || fading {
        if lost(&ps) {
            AttractorLabel::OriginExtinct
        } else if spec.a * spec.largest_plant_equilibrium()? > 1.0 {
            AttractorLabel::CollapsedNumerically
        } else {
            AttractorLabel::BoundaryPlantOnly
        }
    } else if (max_h - min_h).max(max_p - min_p) < FIXED_DIAMETER {
        AttractorLabel::InteriorFixed
    } else {
        let centre = match &interior {
            Some(r) => r.location,
            None => {
                let n = tail.len() as f64;
                State { p: ps.iter().sum::<f64>() / n, h: hs.iter().sum::<f64>() / n }
            }
        };
        let spiralling_in = interior.as_ref().is_some_and(|r| r.spectral_radius() < 1.0) && shrinking(&tail, centre);
        let stats = return_time_stats(&poincare_returns(&tail, centre));
        if let Some((mean, cv, _)) = stats {
            diagnostics.return_time_cv = Some(cv);
            diagnostics.cycle_period_estimate = Some(mean);
        }
        match stats {
            _ if spiralling_in => AttractorLabel::InteriorFixed,
            Some((_, cv, spread)) if cv < CYCLE_CV || spread <= 1 => AttractorLabel::InvariantCycle,
            _ => AttractorLabel::InteriorComplex,
        }
    };
    if label != AttractorLabel::InvariantCycle {
        diagnostics.cycle_period_estimate = None;
    }
    Ok(AttractorClass { label, diagnostics })
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Distance to `c` over the last quarter of the tail is clearly below that
/// over the first quarter.
fn shrinking(tail: &[State], c: State) -> bool {
    let q = tail.len() / 4;
    let reach = |s: &[State]| s.iter().map(|x| x.sup_distance(&c)).fold(0.0, f64::max);
    reach(&tail[tail.len() - q..]) < 0.9 * reach(&tail[..q])
}

/// A point on the Neimark-Sacker curve together with its certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsPoint {
    pub r: f64,
    pub a: f64,
    /// `|rho - 1|` at the returned `a`.
    pub residual: f64,
    pub eigenvalues: [Complex64; 2],
}

fn spectral_radius_at(variant: Variant, family: ModelFamily, r: f64, a: f64) -> Result<Option<(f64, [Complex64; 2])>> {
    let spec = SystemSpec::new(variant, family.model(r)?, a)?;
    Ok(interior_report(&spec).map(|rep| (rep.spectral_radius(), rep.eigenvalues)))
}

/// Interval of `a` over which the interior equilibrium exists:
/// `(1/Pn, 1/P1)` when there are two positive plant equilibria, else
/// `(1/Pn, 50/Pn)`.
pub fn interior_a_range(family: ModelFamily, r: f64) -> Result<Option<(f64, f64)>> {
    let m = family.model(r)?;
    let set = m.plant_equilibria(m.default_search_bound())?;
    let pn = set.largest();
    if pn <= 0.0 {
        return Ok(None);
    }
    let lo = (1.0 / pn) * (1.0 + 1e-4);
    let mut hi = 50.0 / pn;
    if let Some(p1) = set.smallest_positive() {
        if p1 < pn {
            hi = hi.min((1.0 / p1) * (1.0 - 1e-6));
        }
    }
    Ok((lo < hi).then_some((lo, hi)))
}

/// First `a` along the interior branch where the spectral radius of the
/// interior Jacobian reaches 1.
pub fn ns_point(variant: Variant, family: ModelFamily, r: f64) -> Result<NsPoint> {
    let (lo, hi) = interior_a_range(family, r)?
        .ok_or_else(|| Error::NotFound(format!("no interior equilibrium for {family} at r = {r}")))?;
    let rho = |a: f64| -> Result<Option<(f64, [Complex64; 2])>> { spectral_radius_at(variant, family, r, a) };

    // geometric coarse scan for the first crossing
    let ratio = (hi / lo).powf(1.0 / NS_SCAN as f64);
    let mut a0 = lo;
    let mut g0 = rho(a0)?.map(|x| x.0 - 1.0);
    let mut bracket = None;
    for k in 1..=NS_SCAN {
        let a1 = if k == NS_SCAN { hi } else { lo * ratio.powi(k as i32) };
        let g1 = rho(a1)?.map(|x| x.0 - 1.0);
        if let (Some(x0), Some(x1)) = (g0, g1) {
            if (x0 < 0.0) != (x1 < 0.0) {
                bracket = Some((a0, a1, x0 < 0.0));
                break;
            }
        }
        a0 = a1;
        g0 = g1;
    }
    let (mut a_lo, mut a_hi, lo_inside) =
        bracket.ok_or_else(|| Error::NotFound(format!("spectral radius never reaches 1 for {family} at r = {r}")))?;

    let mut best = None;
    for _ in 0..200 {
        let mid = 0.5 * (a_lo + a_hi);
        let Some((rm, eig)) = rho(mid)? else {
            return Err(Error::NotFound(format!("interior equilibrium vanished at a = {mid}")));
        };
        best = Some((mid, rm, eig));
        if (rm - 1.0).abs() < NS_TOL || mid <= a_lo || mid >= a_hi {
            break;
        }
        if (rm < 1.0) == lo_inside {
            a_lo = mid;
        } else {
            a_hi = mid;
        }
    }
    let (a, rm, eig) = best.expect("at least one bisection step");
    if eig[0].im.abs() <= NS_IMAG_TOL {
        return Err(Error::RealCrossing { a });
    }
    Ok(NsPoint { r, a, residual: (rm - 1.0).abs(), eigenvalues: eig })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Transcritical,
    NeimarkSacker,
    Collapse,
    Heteroclinic,
}

impl CurveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveKind::Transcritical => "transcritical",
            CurveKind::NeimarkSacker => "neimark_sacker",
            CurveKind::Collapse => "collapse",
            CurveKind::Heteroclinic => "heteroclinic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        use CurveKind::*;
        [Transcritical, NeimarkSacker, Collapse, Heteroclinic].into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: f64,
    pub a: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveGap {
    pub r: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationCurve {
    pub kind: CurveKind,
    pub points: Vec<CurvePoint>,
    pub gaps: Vec<CurveGap>,
    /// Free-form solver settings, e.g. tolerances and grid sizes.
    pub metadata: Vec<(String, String)>,
}

impl BifurcationCurve {
    pub fn a_at(&self, r: f64) -> Option<f64> {
        self.points.iter().find(|p| p.r == r).map(|p| p.a)
    }

    fn assemble(kind: CurveKind, r_grid: &[f64], results: Vec<Result<CurvePoint>>, metadata: Vec<(String, String)>) -> Result<Self> {
        let mut points = Vec::new();
        let mut gaps = Vec::new();
        for (&r, res) in r_grid.iter().zip(results) {
            match res {
                Ok(p) => points.push(p),
                Err(e @ (Error::NotFound(_) | Error::RealCrossing { .. })) => gaps.push(CurveGap { r, reason: e.to_string() }),
                Err(e) => return Err(e),
            }
        }
        points.sort_by(|x, y| x.r.total_cmp(&y.r));
        Ok(BifurcationCurve { kind, points, gaps, metadata })
    }
}

fn check_sorted(r_grid: &[f64]) -> Result<()> {
    if r_grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::usage("r grid must be strictly increasing"));
    }
    Ok(())
}

/// `a = 1 / Pn(r)`: where the interior equilibrium leaves `(Pn, 0)`.
pub fn transcritical_curve(family: ModelFamily, r_grid: &[f64]) -> Result<BifurcationCurve> {
    check_sorted(r_grid)?;
    let results = r_grid
        .iter()
        .map(|&r| {
            let pn = family.model(r)?.largest_equilibrium()?;
            if pn <= 0.0 {
                return Err(Error::NotFound(format!("no positive plant equilibrium at r = {r}")));
            }
            Ok(CurvePoint { r, a: 1.0 / pn, residual: 0.0 })
        })
        .collect();
    BifurcationCurve::assemble(CurveKind::Transcritical, r_grid, results, vec![])
}

pub fn ns_curve(variant: Variant, family: ModelFamily, r_grid: &[f64]) -> Result<BifurcationCurve> {
    check_sorted(r_grid)?;
    let results: Vec<Result<CurvePoint>> = r_grid
        .par_iter()
        .map(|&r| ns_point(variant, family, r).map(|p| CurvePoint { r, a: p.a, residual: p.residual }))
        .collect();
    let metadata = vec![
        ("rho_tol".to_string(), NS_TOL.to_string()),
        ("imag_tol".to_string(), NS_IMAG_TOL.to_string()),
        ("coarse_scan".to_string(), NS_SCAN.to_string()),
    ];
    BifurcationCurve::assemble(CurveKind::NeimarkSacker, r_grid, results, metadata)
}

/// What counts as the herbivore having been lost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapsePolicy {
    /// Tail minimum of `H` below [`COLLAPSE_DELTA`].
    Numeric,
    /// As `Numeric`, and the plant tail maximum is below it too (capture by the origin).
    Heteroclinic,
}

impl CollapsePolicy {
    pub fn for_family(family: ModelFamily) -> Self {
        match family {
            ModelFamily::HollingIII => CollapsePolicy::Heteroclinic,
            _ => CollapsePolicy::Numeric,
        }
    }

    pub fn curve_kind(&self) -> CurveKind {
        match self {
            CollapsePolicy::Numeric => CurveKind::Collapse,
            CollapsePolicy::Heteroclinic => CurveKind::Heteroclinic,
        }
    }
}

/// Start used when probing for collapse: the interior equilibrium nudged by
/// 1% (so the orbit follows the attractor born there), or the default start
/// when there is no interior equilibrium. Starting on the attractor keeps
/// bistable cases, where the default start may sit in the basin of the
/// origin, from being read as a collapse of the cycle.
pub fn collapse_start(spec: &SystemSpec) -> Result<State> {
    match interior_report(spec) {
        Some(r) => Ok(State { p: 1.01 * r.location.p, h: 0.99 * r.location.h }),
        None => spec.default_start(),
    }
}

pub fn collapse_predicate(spec: &SystemSpec, policy: CollapsePolicy, opts: ClassifyOptions) -> Result<bool> {
    let tail = tail(spec, collapse_start(spec)?, opts)?;
    let min_h = tail.iter().map(|s| s.h).fold(f64::INFINITY, f64::min);
    let max_p = tail.iter().map(|s| s.p).fold(0.0, f64::max);
    Ok(match policy {
        CollapsePolicy::Numeric => min_h < COLLAPSE_DELTA,
        CollapsePolicy::Heteroclinic => min_h < COLLAPSE_DELTA && max_p < COLLAPSE_DELTA,
    })
}

/// Smallest `a` (to [`COLLAPSE_WIDTH`]) past which the herbivore is lost
/// from [`collapse_start`]. The search starts just above the transcritical
/// point and doubles `a` up to 64 times that value to find a bracket.
pub fn collapse_point(variant: Variant, family: ModelFamily, r: f64, policy: CollapsePolicy, opts: ClassifyOptions) -> Result<f64> {
    let model = family.model(r)?;
    let pn = model.largest_equilibrium()?;
    if pn <= 0.0 {
        return Err(Error::NotFound(format!("no positive plant equilibrium at r = {r}")));
    }
    let pred = |a: f64| -> Result<bool> { collapse_predicate(&SystemSpec::new(variant, model, a)?, policy, opts) };
    let start = 1.01 / pn;
    if pred(start)? {
        return Err(Error::NotFound(format!("herbivore already lost just above the transcritical point at r = {r}")));
    }
    let mut lo = start;
    let mut hi = start;
    loop {
        hi *= 2.0;
        if hi > 64.0 * start {
            return Err(Error::NotFound(format!("no collapse below a = {} at r = {r}", 64.0 * start)));
        }
        if pred(hi)? {
            break;
        }
        lo = hi;
    }
    while hi - lo > COLLAPSE_WIDTH {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub fn collapse_curve(variant: Variant, family: ModelFamily, r_grid: &[f64], policy: CollapsePolicy, opts: ClassifyOptions) -> Result<BifurcationCurve> {
    check_sorted(r_grid)?;
    let results: Vec<Result<CurvePoint>> = r_grid
        .par_iter()
        .map(|&r| collapse_point(variant, family, r, policy, opts).map(|a| CurvePoint { r, a, residual: COLLAPSE_WIDTH }))
        .collect();
    let metadata = vec![
        ("delta".to_string(), COLLAPSE_DELTA.to_string()),
        ("width".to_string(), COLLAPSE_WIDTH.to_string()),
        ("transient".to_string(), opts.transient.to_string()),
        ("sample".to_string(), opts.sample.to_string()),
    ];
    BifurcationCurve::assemble(policy.curve_kind(), r_grid, results, metadata)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub r: f64,
    pub a: f64,
    pub class: AttractorClass,
}

/// Classifies every `(r, a)` pair from the default start. Cells are computed
/// independently on the current rayon pool and returned sorted by `(r, a)`.
pub fn grid_scan(variant: Variant, family: ModelFamily, a_values: &[f64], r_values: &[f64], opts: ClassifyOptions) -> Result<Vec<ScanCell>> {
    if a_values.len() < 2 || r_values.len() < 2 {
        return Err(Error::usage("grid scans need at least two values per axis"));
    }
    let mut r_sorted = r_values.to_vec();
    r_sorted.sort_by(f64::total_cmp);
    let mut a_sorted = a_values.to_vec();
    a_sorted.sort_by(f64::total_cmp);
    let na = a_sorted.len();
    (0..r_sorted.len() * na)
        .into_par_iter()
        .map(|idx| {
            let (r, a) = (r_sorted[idx / na], a_sorted[idx % na]);
            let spec = SystemSpec::new(variant, family.model(r)?, a)?;
            let class = attractor_classify(&spec, spec.default_start()?, opts)?;
            Ok(ScanCell { r, a, class })
        })
        .collect()
}
