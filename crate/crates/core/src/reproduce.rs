//! Presets that regenerate the data behind each published figure and table,
//! each with a small gnuplot script.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::bifurcation::{self, AttractorClass, AttractorLabel, ClassifyOptions, CollapsePolicy};
use crate::bursting::{self, NoiseScheme, NoiseSpec, SweepSettings};
use crate::error::{Error, Result};
use crate::growth::ModelFamily;
use crate::io;
use crate::system::{State, SystemSpec, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Fig2,
    Fig3Points,
    Fig4a,
    Fig4b,
    Fig5,
    Fig6,
    Table2,
    Fig7,
}

pub const TARGETS: [Target; 8] = [
    Target::Fig2,
    Target::Fig3Points,
    Target::Fig4a,
    Target::Fig4b,
    Target::Fig5,
    Target::Fig6,
    Target::Table2,
    Target::Fig7,
];

impl Target {
    pub fn name(&self) -> &'static str {
        match self {
            Target::Fig2 => "fig2",
            Target::Fig3Points => "fig3-points",
            Target::Fig4a => "fig4a",
            Target::Fig4b => "fig4b",
            Target::Fig5 => "fig5",
            Target::Fig6 => "fig6",
            Target::Table2 => "table2",
            Target::Fig7 => "fig7",
        }
    }
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TARGETS.into_iter().find(|t| t.name() == s).ok_or_else(|| {
            let names: Vec<&str> = TARGETS.iter().map(|t| t.name()).collect();
            Error::usage(format!("unknown reproduce target `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Beverton-Holt cycle anchors at `a = 2`.
pub const CYCLE_A: f64 = 2.0;
pub const CYCLE_RS: [f64; 4] = [2.5, 2.7, 2.8, 3.0];
/// Holling III anchors at `a = 0.71`.
pub const HOLLING_A: f64 = 0.71;
pub const HOLLING_RS: [f64; 3] = [2.5, 3.5, 5.0];
/// Bursting regime of the noisy Beverton-Holt system.
pub const BURST_A: f64 = 3.95;
pub const BURST_R: f64 = 4.55;
pub const TABLE_OMEGAS: [f64; 6] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
/// Ricker crisis anchors.
pub const CRISIS_A: f64 = 0.95;
pub const CRISIS_RS: [f64; 2] = [3.8, 3.85];
/// Alternative starts tried when the default start misses the interior
/// attractor below the crisis.
pub const CRISIS_STARTS: [(f64, f64); 10] = [
    (0.2, 0.1),
    (0.2, 0.5),
    (0.2, 1.0),
    (0.2, 1.5),
    (0.2, 2.0),
    (0.5, 0.1),
    (0.5, 0.5),
    (0.5, 1.0),
    (0.5, 1.5),
    (0.5, 2.0),
];

/// The 50-point r grid used for the curve diagrams of a family.
pub fn curve_grid(family: ModelFamily) -> Vec<f64> {
    let (start, step) = match family {
        ModelFamily::HollingIII => (2.1, 0.06),
        _ => (1.2, 0.08),
    };
    (0..50).map(|i| start + i as f64 * step).collect()
}

pub fn noise_spec() -> Result<SystemSpec> {
    SystemSpec::new(Variant::ModelII, ModelFamily::BevertonHolt.model(BURST_R)?, BURST_A)
}

/// Settings of the `table2` sweep: 50 runs of 1000 generations per amplitude.
pub fn table2_settings(seed: u64) -> SweepSettings {
    SweepSettings { seed, ..SweepSettings::default() }
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelledRun {
    pub r: f64,
    pub a: f64,
    #[serde(rename = "P0")]
    pub p0: f64,
    #[serde(rename = "H0")]
    pub h0: f64,
    #[serde(flatten)]
    pub class: AttractorClass,
}

fn label_run(family: ModelFamily, r: f64, a: f64, s0: Option<State>) -> Result<LabelledRun> {
    let spec = SystemSpec::new(Variant::ModelII, family.model(r)?, a)?;
    let s0 = match s0 {
        Some(s) => s,
        None => spec.default_start()?,
    };
    let class = bifurcation::attractor_classify(&spec, s0, ClassifyOptions::default())?;
    Ok(LabelledRun { r, a, p0: s0.p, h0: s0.h, class })
}

/// Labels the Ricker system at `r` from the default start, then from each
/// declared alternative start.
pub fn crisis_runs(r: f64) -> Result<Vec<LabelledRun>> {
    let mut out = vec![label_run(ModelFamily::Ricker, r, CRISIS_A, None)?];
    for (p, h) in CRISIS_STARTS {
        out.push(label_run(ModelFamily::Ricker, r, CRISIS_A, Some(State { p, h }))?);
    }
    Ok(out)
}

struct Writer<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn trajectory(&mut self, name: &str, spec: &SystemSpec, s0: State, gens: usize) -> Result<()> {
        let traj = spec.simulate(s0, gens)?;
        let p = self.path(name);
        io::write_trajectory(&p, &traj)?;
        self.written.push(p);
        Ok(())
    }

    fn with(&mut self, name: &str, f: impl FnOnce(&mut dyn std::io::Write) -> Result<()>) -> Result<()> {
        let p = self.path(name);
        io::to_file(&p, |w| f(w))?;
        self.written.push(p);
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        self.with(name, |w| Ok(w.write_all(body.as_bytes())?))
    }
}

const GP_HEAD: &str = "set datafile separator ','\nset datafile commentschars '#'\nset key outside\n";

fn gp_overlay(title: &str, xlabel: &str, ylabel: &str, series: &[(String, &str, String)]) -> String {
    let mut s = format!("{GP_HEAD}set title '{title}'\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\nplot ");
    let parts: Vec<String> = series
        .iter()
        .map(|(file, using, t)| format!("'{file}' skip 1 using {using} with points pt 7 ps 0.3 title '{t}'"))
        .collect();
    s.push_str(&parts.join(", \\\n     "));
    s.push('\n');
    s
}

fn fmt_r(r: f64) -> String {
    format!("{r}")
}

/// Writes the files for `target` into `out_dir` and returns their paths.
pub fn reproduce(target: Target, out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut w = Writer { dir: out_dir, written: Vec::new() };
    match target {
        Target::Fig2 => phase_portraits(&mut w, "fig2", ModelFamily::BevertonHolt, CYCLE_A, &CYCLE_RS)?,
        Target::Fig3Points => phase_portraits(&mut w, "fig3", ModelFamily::HollingIII, HOLLING_A, &HOLLING_RS)?,
        Target::Fig4a => curves(&mut w, "fig4a", ModelFamily::BevertonHolt)?,
        Target::Fig4b => curves(&mut w, "fig4b", ModelFamily::HollingIII)?,
        Target::Fig5 => {
            let spec = noise_spec()?;
            let noise = NoiseSpec::new(1e-2, seed, NoiseScheme::HerbivoreAdditive)?;
            let traj = bursting::simulate_noisy(&spec, &noise, spec.default_start()?, 200)?;
            let p = w.path("fig5.csv");
            io::write_trajectory(&p, &traj)?;
            w.written.push(p);
            w.text(
                "fig5.gp",
                &format!(
                    "{GP_HEAD}set title 'noisy herbivore, a={BURST_A}, r={BURST_R}, omega=0.01'\nset xlabel 't'\nset ylabel 'H'\nplot 'fig5.csv' skip 1 using 1:3 with linespoints pt 7 ps 0.4 title 'H', \\\n     'fig5.csv' skip 1 using 1:2 with lines title 'P'\n"
                ),
            )?;
        }
        Target::Fig6 => {
            let omegas: Vec<f64> = (0..11).map(|k| 10f64.powf(-2.0 - 0.5 * k as f64)).collect();
            let stats = bursting::noise_sweep(&noise_spec()?, noise_spec()?.default_start()?, &omegas, &table2_settings(seed))?;
            w.with("fig6_summary.csv", |f| io::write_burst_summary(f, &stats))?;
            w.text(
                "fig6.gp",
                &format!("{GP_HEAD}set logscale x\nset yrange [0:1]\nset xlabel 'omega'\nset ylabel 'resident time ratio'\nplot 'fig6_summary.csv' skip 2 using 1:6:7 with yerrorbars pt 7 title 'ratio'\n"),
            )?;
        }
        Target::Table2 => {
            let spec = noise_spec()?;
            let stats = bursting::noise_sweep(&spec, spec.default_start()?, &TABLE_OMEGAS, &table2_settings(seed))?;
            w.with("table2_runs.csv", |f| io::write_burst_runs(f, &stats))?;
            w.with("table2_summary.csv", |f| io::write_burst_summary(f, &stats))?;
            w.text(
                "table2.gp",
                &format!("{GP_HEAD}set logscale x\nset xlabel 'omega'\nset ylabel 'mean burst period'\nplot 'table2_summary.csv' skip 2 using 1:4:5 with yerrorbars pt 7 title 'period'\n"),
            )?;
        }
        Target::Fig7 => {
            let mut labelled = Vec::new();
            let mut series = Vec::new();
            for r in CRISIS_RS {
                let runs = crisis_runs(r)?;
                let spec = SystemSpec::new(Variant::ModelII, ModelFamily::Ricker.model(r)?, CRISIS_A)?;
                let name = format!("fig7_r{}_default.csv", fmt_r(r));
                w.trajectory(&name, &spec, spec.default_start()?, 3000)?;
                series.push((name, "2:3", format!("r={r} default start")));
                if let Some(run) = runs[1..].iter().find(|x| x.class.label == AttractorLabel::InteriorComplex) {
                    let name = format!("fig7_r{}_interior.csv", fmt_r(r));
                    w.trajectory(&name, &spec, State { p: run.p0, h: run.h0 }, 3000)?;
                    series.push((name, "2:3", format!("r={r} from ({}, {})", run.p0, run.h0)));
                }
                labelled.extend(runs);
            }
            w.with("fig7_labels.json", |f| io::write_json(f, &labelled))?;
            w.text("fig7.gp", &gp_overlay("Ricker, a=0.95", "P", "H", &series))?;
        }
    }
    Ok(w.written)
}

fn phase_portraits(w: &mut Writer<'_>, stem: &str, family: ModelFamily, a: f64, rs: &[f64]) -> Result<()> {
    let mut series = Vec::new();
    let mut labels = Vec::new();
    for &r in rs {
        let spec = SystemSpec::new(Variant::ModelII, family.model(r)?, a)?;
        let name = format!("{stem}_r{}.csv", fmt_r(r));
        w.trajectory(&name, &spec, spec.default_start()?, 3000)?;
        series.push((name, "2:3", format!("r={r}")));
        labels.push(label_run(family, r, a, None)?);
    }
    w.with(&format!("{stem}_labels.json"), |f| io::write_json(f, &labels))?;
    w.text(&format!("{stem}.gp"), &gp_overlay(&format!("{family}, a={a}"), "P", "H", &series))
}

fn curves(w: &mut Writer<'_>, stem: &str, family: ModelFamily) -> Result<()> {
    let grid = curve_grid(family);
    let tc = bifurcation::transcritical_curve(family, &grid)?;
    let ns = bifurcation::ns_curve(Variant::ModelII, family, &grid)?;
    let policy = CollapsePolicy::for_family(family);
    let col = bifurcation::collapse_curve(Variant::ModelII, family, &grid, policy, ClassifyOptions::default())?;
    let file = format!("{stem}_curves.csv");
    w.with(&file, |f| io::write_curves(f, &[&tc, &ns, &col]))?;
    let mut gp = format!("{GP_HEAD}set title '{family} curves'\nset xlabel 'r'\nset ylabel 'a'\n");
    gp.push_str(&format!(
        "plot '{file}' skip 2 using 1:(strcol(3) eq 'transcritical' ? $2 : 1/0) with lines title 'transcritical', \\\n     '{file}' skip 2 using 1:(strcol(3) eq 'neimark_sacker' ? $2 : 1/0) with lines dt 2 title 'Neimark-Sacker', \\\n     '{file}' skip 2 using 1:(strcol(3) eq '{}' ? $2 : 1/0) with lines title '{}'\n",
        col.kind, col.kind
    ));
    w.text(&format!("{stem}.gp"), &gp)
}
