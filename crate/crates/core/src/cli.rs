//! Scenario runner behind the command-line tool.
//!
//! A run executes the selected suites, collects one [`Check`] per verified
//! quantity and writes `report.txt`, `report.jsonl` and `timeseries.csv`.
//! Every random draw comes from a ChaCha8 stream seeded per suite, so a run
//! is reproducible and independent of which other suites are selected.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{initial_field, ModeSpec, ScenarioConfig, Suite};
use crate::dirac_dynamics::{
    action_value, current, current_value, dirac_residual, divergence, evolve_observed, stability_bound,
    timelike_report, EvolveOptions, PlaneWave, Region,
};
use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::fock::{
    antisymmetrize, basis_pairing, car_report, multiparticle_inner_with, product_inner_with, FockSpace, FockVector,
    OccupationState, MAX_REPORT_MODES,
};
use crate::geometry::{build_background, concordance_residuals, realness_residual, Background, MetricChart};
use crate::grid::Grid;
use crate::linalg::{self, c, Spinor, ZERO};
use crate::pairing::{flux, gram_matrix, identity_residual, inner, orthonormalize, Slice};
use crate::spin_algebra::{
    check_dirac_form_identities, clifford_residual, BasicField, PhysicalConstants, SpinTensor,
    SpinTensorSignature,
};

/// Residuals below this are treated as roundoff when forming refinement ratios.
const ROUNDOFF_FLOOR: f64 = 1e-13;

/// How a check value is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    /// The value must be exactly zero.
    Exact,
    AtMost { tol: f64 },
    AtLeast { min: f64 },
    Range { min: f64, max: f64 },
}

impl Bound {
    fn admits(&self, v: f64) -> bool {
        match *self {
            Bound::Exact => v == 0.0,
            Bound::AtMost { tol } => v <= tol,
            Bound::AtLeast { min } => v >= min,
            Bound::Range { min, max } => (min..=max).contains(&v),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Bound::Exact => write!(f, "== 0"),
            Bound::AtMost { tol } => write!(f, "<= {tol:.1e}"),
            Bound::AtLeast { min } => write!(f, ">= {min:.1e}"),
            Bound::Range { min, max } => write!(f, "in [{min:.1e}, {max:.1e}]"),
        }
    }
}

/// One verified quantity. `name` is the library operation that produced it,
/// followed by the quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}.{} value={:.1e} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.value,
            self.bound
        )?;
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

/// One stored level of the evolve suite's trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesRow {
    pub step: usize,
    pub time: f64,
    /// Flux through x⁰ = time over the flux at x⁰ = 0.
    pub norm: f64,
    /// `∫ g(J, n) dS` through x⁰ = time.
    pub flux: f64,
    /// max |div J| on this level; NaN where the trajectory is too short.
    pub max_div_j: f64,
}

/// Why a run stopped before finishing its suites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Abort {
    pub suite: Suite,
    pub message: String,
    /// Process exit code: 3 for instability or a CFL violation, 2 otherwise.
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub suites: Vec<Suite>,
    pub checks: Vec<Check>,
    pub series: Vec<SeriesRow>,
    pub abort: Option<Abort>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.abort.is_none() && self.checks.iter().all(|c| c.pass)
    }

    /// 0 when every check passes, 1 on a failed check, 2 on a configuration
    /// error and 3 on a numerical instability.
    pub fn exit_code(&self) -> i32 {
        match &self.abort {
            Some(a) => a.exit_code,
            None if self.checks.iter().all(|c| c.pass) => 0,
            None => 1,
        }
    }

    pub fn find(&self, suite: Suite, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.suite == suite && c.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# scenario {} seed {}\n", self.scenario, self.seed);
        for check in &self.checks {
            out.push_str(&format!("{check}\n"));
        }
        if let Some(a) = &self.abort {
            out.push_str(&format!("ABORT {}: {}\n", a.suite, a.message));
        }
        let verdict = match self.exit_code() {
            0 => "PASS",
            1 => "FAIL",
            2 => "ERROR",
            _ => "UNSTABLE",
        };
        out.push_str(&format!("RESULT {verdict} (exit {})\n", self.exit_code()));
        out
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            out.push_str(&serde_json::to_string(check).expect("check serializes"));
            out.push('\n');
        }
        let summary = serde_json::json!({
            "scenario": self.scenario,
            "seed": self.seed,
            "suites": self.suites,
            "abort": self.abort,
            "exit_code": self.exit_code(),
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }

    pub fn timeseries_csv(&self) -> String {
        let mut out = String::from("step,time,norm,flux,max_div_j\n");
        for r in &self.series {
            out.push_str(&format!("{},{:e},{:e},{:e},{:e}\n", r.step, r.time, r.norm, r.flux, r.max_div_j));
        }
        out
    }

    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.txt"), self.to_text())?;
        fs::write(dir.join("report.jsonl"), self.to_jsonl())?;
        fs::write(dir.join("timeseries.csv"), self.timeseries_csv())
    }
}

/// Run `suites` of `cfg` (all configured suites when `None`) with `seed`
/// (the configured seed when `None`).
pub fn run_scenario(cfg: &ScenarioConfig, suites: Option<&[Suite]>, seed: Option<u64>) -> Report {
    let suites: Vec<Suite> = suites.map(<[Suite]>::to_vec).unwrap_or_else(|| cfg.suites.clone());
    let seed = seed.unwrap_or(cfg.seed);
    let mut report = Report {
        scenario: cfg.name.clone(),
        seed,
        suites: suites.clone(),
        checks: Vec::new(),
        series: Vec::new(),
        abort: None,
    };
    for &suite in &suites {
        let mut ctx = SuiteRun {
            cfg,
            suite,
            rng: suite_rng(seed, suite),
            checks: Vec::new(),
            series: Vec::new(),
        };
        let outcome = match suite {
            Suite::Identities => ctx.identities(),
            Suite::Connection => ctx.connection(),
            Suite::Evolve => ctx.evolve(),
            Suite::Current => ctx.current(),
            Suite::Pairing => ctx.pairing(),
            Suite::Fock => ctx.fock(),
        };
        report.checks.append(&mut ctx.checks);
        report.series.append(&mut ctx.series);
        if let Err(e) = outcome {
            let exit_code = match e {
                Error::Instability { .. } | Error::CflViolation { .. } => 3,
                _ => 2,
            };
            report.abort = Some(Abort {
                suite,
                message: e.to_string(),
                exit_code,
            });
            break;
        }
    }
    report
}

fn suite_rng(seed: u64, suite: Suite) -> ChaCha8Rng {
    let index = Suite::ALL.iter().position(|s| *s == suite).unwrap_or(0) as u64;
    ChaCha8Rng::seed_from_u64(seed.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Spinor with components uniform in the unit square of each complex plane.
pub fn random_spinor(rng: &mut impl Rng) -> Spinor {
    std::array::from_fn(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Exact solution of the scenario's initial data, when one is known.
enum Oracle {
    /// Superposition of plane waves (massive, flat).
    Waves(Vec<(PlaneWave, C64)>),
    /// Massless data depending on x¹ only: the γ⁰γ¹ = +1 part moves rigidly
    /// towards +x¹ and the −1 part towards −x¹, at unit coordinate speed.
    Characteristics { modes: Vec<ModeSpec>, grid: Grid, plus: linalg::Mat4, minus: linalg::Mat4 },
}

impl Oracle {
    fn for_scenario(cfg: &ScenarioConfig, k: &PhysicalConstants, bg: &Background) -> Option<Oracle> {
        if !bg.is_flat() {
            return None;
        }
        let modes = &cfg.initial.modes;
        if k.mass_term() > 0.0 {
            let waves: Option<Vec<_>> = modes.iter().map(|m| m.plane_wave(k)).collect();
            return waves.map(Oracle::Waves);
        }
        if cfg.chart.nodes[1] == 1 && cfg.chart.nodes[2] == 1 {
            let gs = bg.gammas();
            let v = linalg::mul(&gs.gamma[0], &gs.gamma[1]);
            let half = c(0.5, 0.0);
            let id = linalg::identity();
            return Some(Oracle::Characteristics {
                modes: modes.clone(),
                grid: bg.chart().spatial_grid(),
                plus: linalg::scale(&linalg::add(&id, &v), half),
                minus: linalg::scale(&linalg::sub(&id, &v), half),
            });
        }
        None
    }

    fn value(&self, k: &PhysicalConstants, x: [f64; 4]) -> Result<Spinor> {
        match self {
            Oracle::Waves(waves) => {
                let mut s = [ZERO; 4];
                for (w, a) in waves {
                    let v = w.value(x);
                    for i in 0..4 {
                        s[i] += a * v[i];
                    }
                }
                Ok(s)
            }
            Oracle::Characteristics { modes, grid, plus, minus } => {
                let initial = |shift: f64| -> Result<Spinor> {
                    let mut s = [ZERO; 4];
                    for m in modes {
                        let v = m.initial_value(k, grid, [0.0, x[1] + shift, x[2], x[3]])?;
                        for i in 0..4 {
                            s[i] += v[i];
                        }
                    }
                    Ok(s)
                };
                let right = linalg::apply(plus, &initial(-x[0])?);
                let left = linalg::apply(minus, &initial(x[0])?);
                Ok(std::array::from_fn(|i| right[i] + left[i]))
            }
        }
    }

    fn field(&self, k: &PhysicalConstants, grid: &Grid, scale: f64) -> Result<SpinorField> {
        let data = (0..grid.len())
            .map(|idx| self.value(k, grid.point(idx)).map(|s| s.map(|z| z * scale)))
            .collect::<Result<Vec<_>>>()?;
        SpinorField::from_data(grid.clone(), data)
    }
}

struct SuiteRun<'a> {
    cfg: &'a ScenarioConfig,
    suite: Suite,
    rng: ChaCha8Rng,
    checks: Vec<Check>,
    series: Vec<SeriesRow>,
}

impl SuiteRun<'_> {
    fn record(&mut self, name: impl Into<String>, value: f64, bound: Bound) -> bool {
        self.record_note(name, value, bound, String::new())
    }

    fn record_note(&mut self, name: impl Into<String>, value: f64, bound: Bound, note: String) -> bool {
        let pass = bound.admits(value);
        self.checks.push(Check {
            suite: self.suite,
            name: name.into(),
            value,
            bound,
            pass,
            note,
        });
        pass
    }

    fn setup(&self) -> Result<(PhysicalConstants, MetricChart, Background)> {
        let k = self.cfg.units.constants()?;
        let chart = self.cfg.chart.chart()?;
        let bg = build_background(&chart, &crate::spin_algebra::canonical_gamma_set())?;
        Ok((k, chart, bg))
    }

    /// Initial data, scaled to unit pairing norm when configured; returns
    /// the field and the applied scale.
    fn initial_data(&self, k: &PhysicalConstants, bg: &Background) -> Result<(SpinorField, f64)> {
        let raw = initial_field(&self.cfg.initial.modes, k, &bg.chart().spatial_grid())?;
        if !self.cfg.initial.normalize {
            return Ok((raw, 1.0));
        }
        let n = inner(&raw, &raw, &Slice::at_time(0.0), bg, k)?.re;
        if !(n > 0.0) {
            return Err(Error::Parse("initial data has zero pairing norm and cannot be normalized".into()));
        }
        let s = 1.0 / n.sqrt();
        Ok((raw.scaled(c(s, 0.0)), s))
    }

    fn identities(&mut self) -> Result<()> {
        let gs = crate::spin_algebra::canonical_gamma_set();
        let d = check_dirac_form_identities(&gs);
        self.record("check_dirac_form_identities.hermiticity", d.hermiticity, Bound::Exact);
        self.record("check_dirac_form_identities.gamma_compatibility", d.gamma_compatibility, Bound::Exact);
        self.record("clifford_residual", clifford_residual(&gs), Bound::Exact);

        let h = &gs.chirality;
        let square = linalg::max_abs(&linalg::sub(&linalg::mul(h, h), &linalg::identity()));
        self.record("chirality.square_minus_identity", square, Bound::Exact);
        let anti = (0..4)
            .map(|q| linalg::max_abs(&linalg::anticommutator(h, &gs.gamma[q])))
            .fold(0.0, f64::max);
        self.record("chirality.anticommutes_with_gamma", anti, Bound::Exact);

        // The metric and the Dirac form are τ-fixed; every field returns to
        // itself under τ twice.
        let mut fixed: f64 = 0.0;
        for f in [BasicField::Metric, BasicField::DiracForm] {
            let x = gs.field_tensor(f);
            fixed = fixed.max(x.tau().max_abs_diff(&x).unwrap_or(f64::INFINITY));
        }
        self.record("tau_conjugate.real_fields_fixed", fixed, Bound::Exact);
        let mut involution: f64 = 0.0;
        for f in BasicField::ALL {
            let x = gs.field_tensor(f);
            involution = involution.max(x.tau().tau().max_abs_diff(&x).unwrap_or(f64::INFINITY));
        }
        for sig in [SpinTensorSignature::new(1, 0, 1, 0, 0, 0), SpinTensorSignature::new(1, 1, 0, 1, 1, 0)] {
            for _ in 0..16 {
                let data = (0..sig.component_count())
                    .map(|_| c(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0)))
                    .collect();
                let x = SpinTensor::new(sig, data)?;
                involution = involution.max(x.tau().tau().max_abs_diff(&x).unwrap_or(f64::INFINITY));
            }
        }
        self.record("tau_conjugate.involution", involution, Bound::Exact);
        Ok(())
    }

    fn connection(&mut self) -> Result<()> {
        let tol = self.cfg.tolerances.clone();
        let k = self.cfg.units.constants()?;
        let chart_cfg = self.cfg.connection.chart(&self.cfg.chart);
        let gs = crate::spin_algebra::canonical_gamma_set();
        let bg = build_background(&chart_cfg.chart()?, &gs)?;
        self.record("build_background.torsion", bg.torsion_residual(), Bound::Exact);
        self.record(
            "build_background.tetrad_orthonormality",
            bg.tetrad_orthonormality_residual(),
            Bound::AtMost { tol: tol.orthonormality },
        );
        let coarse = concordance_residuals(&bg, &gs);
        if bg.is_flat() {
            for (name, v) in coarse.as_array() {
                self.record(format!("concordance_residuals.{name}"), v, Bound::Exact);
            }
        } else {
            let fine = if self.cfg.connection.refine {
                let refined = chart_cfg.refined(2).chart()?;
                Some(concordance_residuals(&build_background(&refined, &gs)?, &gs))
            } else {
                None
            };
            for (i, (name, v)) in coarse.as_array().into_iter().enumerate() {
                self.record(format!("concordance_residuals.{name}"), v, Bound::AtMost { tol: tol.oracle });
                let Some(fine) = &fine else { continue };
                let f = fine.as_array()[i].1;
                let bound = Bound::Range {
                    min: tol.ratio_min,
                    max: tol.ratio_max,
                };
                let name = format!("concordance_residuals.{name}.refinement_ratio");
                if v < ROUNDOFF_FLOOR {
                    let note = if v == 0.0 { "identically zero" } else { "at roundoff" };
                    self.checks.push(Check {
                        suite: self.suite,
                        name,
                        value: 0.0,
                        bound,
                        pass: true,
                        note: format!("{note}; no ratio formed"),
                    });
                } else {
                    let ratio = if f > 0.0 { v / f } else { f64::INFINITY };
                    self.record_note(name, ratio, bound, format!("coarse {v:.3e}, refined {f:.3e}"));
                }
            }
        }
        let (psi, _) = self.initial_data(&k, &bg)?;
        self.record("realness_residual", realness_residual(&psi, &bg)?, Bound::Exact);
        Ok(())
    }

    fn evolve(&mut self) -> Result<()> {
        let tol = self.cfg.tolerances.clone();
        let (k, _, bg) = self.setup()?;
        let (psi0, scale) = self.initial_data(&k, &bg)?;
        let opts = self.cfg.evolve.options();
        let bound = stability_bound(psi0.grid(), &bg, &k)?;
        self.record_note(
            "stability_bound.cfl_number",
            opts.dt / bound,
            Bound::AtMost { tol: opts.cfl_limit },
            format!("dt {:.3e}, bound {bound:.3e}", opts.dt),
        );
        let traj = evolve_observed(&psi0, &bg, &k, &opts, &mut |_, _, _| {})?;

        let gs = bg.gammas();
        let j = current(&traj, gs, &k);
        let grid = traj.grid().clone();
        let nt = grid.n[0];
        let ns = grid.spatial_len();
        let div = if nt >= 5 { Some(divergence(&j, &bg)?) } else { None };
        let mut fluxes = Vec::with_capacity(nt);
        for it in 0..nt {
            fluxes.push(flux(&j, &Slice::at_time(grid.coordinate(0, it)), &bg)?.re);
        }
        let f0 = fluxes[0];
        let mut drift: f64 = 0.0;
        for (it, &f) in fluxes.iter().enumerate() {
            let max_div = match &div {
                Some(d) => d[it * ns..(it + 1) * ns].iter().map(|z| z.norm()).fold(0.0, f64::max),
                None => f64::NAN,
            };
            let norm = if f0 != 0.0 { f / f0 } else { f64::NAN };
            drift = drift.max((norm - 1.0).abs());
            self.series.push(SeriesRow {
                step: it * opts.snapshot_every,
                time: grid.coordinate(0, it),
                norm,
                flux: f,
                max_div_j: max_div,
            });
        }
        self.record("flux.norm_drift", drift, Bound::AtMost { tol: tol.norm_drift });
        if let Some(d) = &div {
            let m = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
            self.record("divergence.max", m, Bound::AtMost { tol: tol.divergence });
        }
        self.record("current.max_imaginary", j.max_imaginary(), Bound::AtMost { tol: tol.reality });

        let oracle = Oracle::for_scenario(self.cfg, &k, &bg);
        if let Some(oracle) = &oracle {
            let exact = oracle.field(&k, &grid, scale)?;
            let err = traj.max_abs_diff(&exact);
            self.record("evolve.oracle_error", err, Bound::AtMost { tol: tol.oracle });
            if self.cfg.evolve.convergence {
                let half = EvolveOptions {
                    dt: opts.dt / 2.0,
                    steps: opts.steps * 2,
                    snapshot_every: opts.snapshot_every * 2,
                    ..opts
                };
                let fine = evolve_observed(&psi0, &bg, &k, &half, &mut |_, _, _| {})?;
                let err2 = fine.max_abs_diff(&exact);
                let ratio = if err2 > 0.0 { err / err2 } else { f64::INFINITY };
                self.record_note(
                    "evolve.dt_refinement_ratio",
                    ratio,
                    Bound::Range {
                        min: tol.ratio_min,
                        max: tol.ratio_max,
                    },
                    format!("errors {err:.3e} at dt, {err2:.3e} at dt/2"),
                );
            }
            // The exact solution on a short, finely stepped window.
            let fine_dt = opts.dt / 4.0;
            let window = psi0.grid().with_time_axis(9, 0.0, fine_dt)?;
            let r = dirac_residual(&oracle.field(&k, &window, scale)?, &bg, &k)?;
            self.record("dirac_residual.exact_solution", r.max_abs(), Bound::AtMost { tol: tol.residual });
        }

        if self.cfg.evolve.action {
            let field = match &oracle {
                Some(o) => o.field(&k, &grid, scale)?,
                None => traj.clone(),
            };
            self.action_checks(&field, &bg, &k)?;
        }
        Ok(())
    }

    /// Reality of the action on random fields and stationarity on `solution`.
    fn action_checks(&mut self, solution: &SpinorField, bg: &Background, k: &PhysicalConstants) -> Result<()> {
        let tol = self.cfg.tolerances.clone();
        let space = bg.chart().spatial_grid();
        let window = space.with_time_axis(8, 0.0, self.cfg.evolve.dt)?;
        let mut worst: f64 = 0.0;
        for _ in 0..self.cfg.evolve.random_fields {
            let data = (0..window.len()).map(|_| random_spinor(&mut self.rng)).collect();
            let f = SpinorField::from_data(window.clone(), data)?;
            let s = action_value(&f, bg, k, &Region::all(&window))?;
            worst = worst.max(s.im.abs() / s.norm().max(f64::MIN_POSITIVE));
        }
        self.record("action_value.relative_imaginary", worst, Bound::AtMost { tol: tol.action_reality });

        let grid = solution.grid().clone();
        let nt = grid.n[0];
        // One-sided time stencils reach four levels in; keep δψ clear of them.
        if nt < 11 {
            return Err(Error::InvalidGrid("the variational check needs at least 11 stored levels".into()));
        }
        let ns = grid.spatial_len();
        let region = Region::all(&grid);
        let mut worst: f64 = 0.0;
        for _ in 0..self.cfg.evolve.perturbations {
            let lo = self.rng.random_range(5..nt - 5);
            let hi = self.rng.random_range(lo + 1..=nt - 5);
            let mut delta = vec![[ZERO; 4]; grid.len()];
            let mut norm2 = 0.0;
            for (idx, d) in delta.iter_mut().enumerate().take(hi * ns).skip(lo * ns) {
                *d = random_spinor(&mut self.rng).map(|z| z * 1e-3);
                norm2 += grid.weight(idx) * d.iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
            let delta = SpinorField::from_data(grid.clone(), delta)?;
            let plus = action_value(&solution.combine(c(1.0, 0.0), &delta, c(1.0, 0.0))?, bg, k, &region)?;
            let minus = action_value(&solution.combine(c(1.0, 0.0), &delta, c(-1.0, 0.0))?, bg, k, &region)?;
            let ds = (plus - minus) * 0.5;
            worst = worst.max(ds.norm() / norm2.sqrt());
        }
        self.record("action_value.first_variation", worst, Bound::AtMost { tol: tol.variation });
        Ok(())
    }

    fn current(&mut self) -> Result<()> {
        let tol = self.cfg.tolerances.clone();
        let (k, _, bg) = self.setup()?;
        let gs = bg.gammas().clone();
        let samples: Vec<Spinor> = (0..self.cfg.current.samples).map(|_| random_spinor(&mut self.rng)).collect();
        let r = timelike_report(&samples, &gs, &k);
        // Scale out c² so that CGS runs compare like natural ones.
        let c2 = k.c * k.c;
        self.record_note(
            "timelike_report.min_norm",
            r.min_norm / c2,
            Bound::AtLeast { min: -tol.timelike },
            format!("{} samples", r.samples),
        );
        self.record("timelike_report.min_j0", r.min_j0 / k.c, Bound::AtLeast { min: 0.0 });
        self.record(
            "timelike_report.closed_form_rel_diff",
            r.closed_form_rel_diff,
            Bound::AtMost { tol: tol.closed_form },
        );
        self.record("timelike_report.max_imaginary", r.max_imaginary / c2, Bound::AtMost { tol: tol.reality });

        // Basis spinors: J = c (1, 0, 0, ±1).
        let expected = [1.0, -1.0, -1.0, 1.0];
        let mut mismatch: f64 = 0.0;
        for (a, &j3) in expected.iter().enumerate() {
            let mut e = [ZERO; 4];
            e[a] = c(1.0, 0.0);
            let j = current_value(&gs, &k, &e);
            let want = [1.0, 0.0, 0.0, j3];
            for q in 0..4 {
                mismatch = mismatch.max((j[q] / k.c - want[q]).norm());
            }
        }
        self.record("current_value.basis_spinors", mismatch, Bound::Exact);

        let (psi, _) = self.initial_data(&k, &bg)?;
        let j = current(&psi, &gs, &k);
        self.record("current.initial_data_imaginary", j.max_imaginary() / k.c, Bound::AtMost { tol: tol.reality });
        Ok(())
    }

    fn pairing(&mut self) -> Result<()> {
        let tol = self.cfg.tolerances.clone();
        let (k, _, bg) = self.setup()?;
        let space = bg.chart().spatial_grid();
        let specs = if self.cfg.pairing.modes.is_empty() {
            self.cfg.initial.modes.clone()
        } else {
            self.cfg.pairing.modes.clone()
        };
        let opts = self.cfg.evolve.options();
        let mut raw = Vec::with_capacity(specs.len());
        for spec in &specs {
            let psi0 = initial_field(std::slice::from_ref(spec), &k, &space)?;
            raw.push(evolve_observed(&psi0, &bg, &k, &opts, &mut |_, _, _| {})?);
        }
        let grid = raw[0].grid().clone();
        let t_end = grid.coordinate(0, grid.n[0] - 1);
        let start = Slice::at_time(0.0);
        let end = Slice::at_time(t_end);

        // Hermiticity and positivity on the raw modes and random combinations.
        let mut herm: f64 = 0.0;
        for a in &raw {
            for b in &raw {
                let ab = inner(a, b, &start, &bg, &k)?;
                let ba = inner(b, a, &start, &bg, &k)?;
                herm = herm.max((ab - ba.conj()).norm());
            }
        }
        let mut combos = Vec::new();
        for _ in 0..8 {
            let mut f = SpinorField::zeros(grid.clone());
            for m in &raw {
                let a = c(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0));
                f = f.combine(c(1.0, 0.0), m, a)?;
            }
            combos.push(f);
        }
        for (a, b) in combos.iter().zip(combos.iter().rev()) {
            let ab = inner(a, b, &start, &bg, &k)?;
            let ba = inner(b, a, &start, &bg, &k)?;
            herm = herm.max((ab - ba.conj()).norm());
        }
        self.record("inner.hermiticity", herm, Bound::AtMost { tol: tol.hermiticity });
        let mut min_norm = f64::INFINITY;
        for f in raw.iter().chain(&combos) {
            min_norm = min_norm.min(inner(f, f, &start, &bg, &k)?.re);
        }
        self.record("inner.positivity", min_norm, Bound::AtLeast { min: 0.0 });

        // Flux of each mode through later and tilted slices.
        let tilted = match self.cfg.pairing.tilt {
            Some(slope) => {
                let mid_x = space.origin[1] + 0.5 * (space.n[1] as f64 - 1.0) * space.step[1];
                Some(Slice::tilted(0.5 * t_end - slope * mid_x, slope))
            }
            None => None,
        };
        let mut later: f64 = 0.0;
        let mut tilt: f64 = 0.0;
        for m in &raw {
            let j = current(m, bg.gammas(), &k);
            let f0 = flux(&j, &start, &bg)?.re;
            later = later.max((flux(&j, &end, &bg)?.re / f0 - 1.0).abs());
            if let Some(s) = &tilted {
                tilt = tilt.max((flux(&j, s, &bg)?.re / f0 - 1.0).abs());
            }
        }
        self.record("flux.later_slice_relative", later, Bound::AtMost { tol: tol.slice });
        if tilted.is_some() {
            self.record("flux.tilted_slice_relative", tilt, Bound::AtMost { tol: tol.slice });
        }

        let basis = orthonormalize(raw, &start, &bg, &k)?;
        self.record(
            "orthonormalize.gram_initial",
            identity_residual(basis.gram()),
            Bound::AtMost { tol: tol.orthonormality },
        );
        let g_end = basis.gram_on(&end, &bg, &k)?;
        self.record("gram_matrix.final_slice", identity_residual(&g_end), Bound::AtMost { tol: tol.gram });
        if let Some(s) = &tilted {
            let g = gram_matrix(basis.modes(), s, &bg, &k)?;
            self.record("gram_matrix.tilted_slice", identity_residual(&g), Bound::AtMost { tol: tol.slice });
        }
        Ok(())
    }

    fn fock(&mut self) -> Result<()> {
        let tol = self.cfg.tolerances.clone();
        let modes = self.cfg.fock.modes;
        let report_modes = modes.min(MAX_REPORT_MODES);
        let r = car_report(report_modes)?;
        let note = format!("{} modes, dimension {}", r.modes, r.dimension);
        self.record_note("car_report.annihilators", r.annihilators, Bound::Exact, note.clone());
        self.record_note("car_report.creators", r.creators, Bound::Exact, note.clone());
        self.record_note("car_report.mixed", r.mixed, Bound::Exact, note.clone());
        self.record_note("car_report.adjointness", r.adjointness, Bound::Exact, note.clone());
        self.record_note("car_report.pairing_adjointness", r.pairing_adjointness, Bound::Exact, note);

        let space = FockSpace::new(modes.max(3))?;
        let s = |v: &[usize]| FockVector::sorted(v);
        let vac = FockVector::vacuum();
        let minus = c(-1.0, 0.0);
        let cases = [
            (space.create(1, &vac)?, s(&[1])?),
            (space.create(1, &s(&[1])?)?, FockVector::zero()),
            (space.annihilate(1, &vac)?, FockVector::zero()),
            (space.annihilate(1, &s(&[1])?)?, vac.clone()),
            (space.create(0, &s(&[1, 2])?)?, s(&[0, 1, 2])?),
            (space.create(2, &s(&[0, 1])?)?, s(&[0, 1, 2])?),
            (space.create(1, &s(&[0, 2])?)?, s(&[0, 1, 2])?.scaled(minus)),
            (space.annihilate(1, &s(&[1, 2])?)?, s(&[2])?),
            (space.annihilate(2, &s(&[1, 2])?)?, s(&[1])?.scaled(minus)),
        ];
        let ladder = cases.iter().map(|(got, want)| got.minus(want).max_abs()).fold(0.0, f64::max);
        self.record("ladder.examples", ladder, Bound::Exact);

        // Antisymmetrized states of distinct sorted indices are orthonormal
        // in the product pairing over orthonormal modes.
        let m = modes.clamp(1, 6);
        let id: Vec<Vec<C64>> = (0..m)
            .map(|i| (0..m).map(|j| if i == j { c(1.0, 0.0) } else { ZERO }).collect())
            .collect();
        let states: Vec<OccupationState> = (0u64..1 << m)
            .map(OccupationState::from_bits)
            .filter(|st| st.count() <= 3)
            .collect();
        let expansions = states
            .iter()
            .map(|st| antisymmetrize(&st.indices()))
            .collect::<Result<Vec<_>>>()?;
        let mut ortho: f64 = 0.0;
        for (i, a) in expansions.iter().enumerate() {
            for (j, b) in expansions.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((product_inner_with(&id, &a.product, &b.product) - want).norm());
            }
        }
        self.record("antisymmetrize.orthonormality", ortho, Bound::Exact);
        let repeated = antisymmetrize(&[1, 2, 1])?;
        let rep = if repeated.product.is_zero() && repeated.fock.is_zero() { 0.0 } else { 1.0 };
        self.record("antisymmetrize.repeated_index_vanishes", rep, Bound::Exact);

        // Non-orthonormal modes: the determinant formula against the
        // product pairing of the antisymmetrized expansions.
        let dim = 6;
        let vecs: Vec<Vec<C64>> = (0..m)
            .map(|_| (0..dim).map(|_| c(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0))).collect())
            .collect();
        let gram: Vec<Vec<C64>> = (0..m)
            .map(|i| (0..m).map(|j| (0..dim).map(|a| vecs[i][a].conj() * vecs[j][a]).sum()).collect())
            .collect();
        let mut det_diff: f64 = 0.0;
        let small: Vec<(OccupationState, usize)> = states.iter().copied().zip(0..).filter(|(st, _)| st.count() >= 1).collect();
        for &(a, ia) in &small {
            for &(b, ib) in &small {
                if a.count() != b.count() {
                    continue;
                }
                let det = basis_pairing(&gram, a, b);
                let prod = product_inner_with(&gram, &expansions[ia].product, &expansions[ib].product);
                det_diff = det_diff.max((det - prod).norm() / det.norm().max(1.0));
                let fock = multiparticle_inner_with(&gram, &expansions[ia].fock, &expansions[ib].fock);
                det_diff = det_diff.max((fock - prod).norm() / prod.norm().max(1.0));
            }
        }
        self.record("basis_pairing.determinant", det_diff, Bound::AtMost { tol: tol.closed_form });
        Ok(())
    }
}

/// Apply a list of ladder operations, in order, to a Fock vector.
pub fn apply_ops(space: &FockSpace, v: &FockVector, ops: &[(crate::fock::Ladder, usize)]) -> Result<FockVector> {
    let mut out = v.clone();
    for &(op, i) in ops {
        out = space.apply(op, i, &out)?;
    }
    Ok(out)
}

/// Parse `create:3` / `annihilate:2` (or `c+3` / `c-2`).
pub fn parse_op(text: &str) -> Result<(crate::fock::Ladder, usize)> {
    use crate::fock::Ladder;
    let t = text.trim();
    let (op, idx) = if let Some(rest) = t.strip_prefix("create:") {
        (Ladder::Create, rest)
    } else if let Some(rest) = t.strip_prefix("annihilate:") {
        (Ladder::Annihilate, rest)
    } else if let Some(rest) = t.strip_prefix("c+") {
        (Ladder::Create, rest)
    } else if let Some(rest) = t.strip_prefix("c-") {
        (Ladder::Annihilate, rest)
    } else {
        return Err(Error::Parse(format!("unknown ladder operation {text:?}")));
    };
    let i = idx
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("bad mode index in {text:?}")))?;
    Ok((op, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::bundled;

    fn load(name: &str) -> ScenarioConfig {
        ScenarioConfig::from_toml(bundled(name).unwrap().text).unwrap()
    }

    #[test]
    fn bounds() {
        assert!(Bound::Exact.admits(0.0));
        assert!(!Bound::Exact.admits(1e-300));
        assert!(Bound::AtMost { tol: 1.0 }.admits(1.0));
        assert!(!Bound::AtMost { tol: 1.0 }.admits(f64::NAN));
        assert!(Bound::Range { min: 12.0, max: 20.0 }.admits(16.0));
        assert!(!Bound::Range { min: 12.0, max: 20.0 }.admits(f64::INFINITY));
    }

    #[test]
    fn zero_formats_as_report_literal() {
        let ch = Check {
            suite: Suite::Fock,
            name: "car_report.mixed".into(),
            value: 0.0,
            bound: Bound::Exact,
            pass: true,
            note: String::new(),
        };
        assert_eq!(ch.to_string(), "PASS fock.car_report.mixed value=0.0e0 == 0");
    }

    #[test]
    fn fock_suite_is_exact() {
        let report = run_scenario(&load("fock_m6"), None, None);
        assert_eq!(report.exit_code(), 0, "{}", report.to_text());
        assert!(report.checks.iter().filter(|c| c.bound == Bound::Exact).all(|c| c.value == 0.0));
    }

    #[test]
    fn cfl_violation_aborts_with_code_3() {
        let report = run_scenario(&load("cfl_violation"), None, None);
        assert_eq!(report.exit_code(), 3);
        assert!(report.to_text().contains("ABORT evolve"));
        assert!(!report.find(Suite::Evolve, "stability_bound.cfl_number").unwrap().pass);
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = load("identities");
        let a = run_scenario(&cfg, Some(&[Suite::Current]), Some(11));
        let b = run_scenario(&cfg, Some(&[Suite::Current]), Some(11));
        assert_eq!(a.to_jsonl(), b.to_jsonl());
    }

    #[test]
    fn ops_parse() {
        use crate::fock::Ladder;
        assert_eq!(parse_op("create:3").unwrap(), (Ladder::Create, 3));
        assert_eq!(parse_op("c-2").unwrap(), (Ladder::Annihilate, 2));
        assert!(parse_op("x:1").is_err());
        assert!(parse_op("create:x").is_err());
    }
}
