//! Config-driven scenario runs: one optimization end to end, or a batch of
//! them compared side by side.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::block_model::{load_block_model, BlockModel, GridSpec};
use crate::economics::{build_vertex_weights, EconomicParams, WeightMode};
use crate::error::{Error, Result};
use crate::interpret::{
    extract_outcome, summarize, verify_crown_thickness, write_membership_csv,
    write_pit_surface_csv, write_summary_json, RunStats, SummaryReport, TransitionOutcome,
    UgConvention,
};
use crate::precedence::{
    build_b_arcs, build_c_arcs, build_d_arcs, build_slope_template, generate_flat_level_groups,
    load_crown_shape, ArcSet, CrownSpec, SlopeSpec,
};
use crate::render::{render_slice, SliceAxis};
use crate::solver::{assemble_problem, solve_max_closure};

/// The five run configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Pit optimization with no underground considered.
    PitOnly,
    /// Opportunity cost folded into block values; single model.
    Conventional,
    /// Dual model with identity linkage arcs; reproduces conventional.
    DualIdentity,
    /// Dual model with linkage arcs offset by the crown thickness.
    CrownSimple,
    /// Crown-simple plus per-level cycle arcs shaping the crown.
    CrownShaped,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::PitOnly,
        Mode::Conventional,
        Mode::DualIdentity,
        Mode::CrownSimple,
        Mode::CrownShaped,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Mode::PitOnly => "pit-only",
            Mode::Conventional => "conventional",
            Mode::DualIdentity => "dual-identity",
            Mode::CrownSimple => "crown-simple",
            Mode::CrownShaped => "crown-shaped",
        }
    }

    fn weight_mode(&self) -> WeightMode {
        match self {
            Mode::PitOnly => WeightMode::PitOnly,
            Mode::Conventional => WeightMode::Conventional,
            Mode::DualIdentity | Mode::CrownSimple | Mode::CrownShaped => WeightMode::Dual,
        }
    }

    fn ug_convention(&self) -> UgConvention {
        match self {
            Mode::PitOnly => UgConvention::Ignored,
            Mode::Conventional => UgConvention::TwinOfPit,
            Mode::DualIdentity | Mode::CrownSimple | Mode::CrownShaped => UgConvention::FromClosure,
        }
    }

    fn needs_crown(&self) -> bool {
        matches!(self, Mode::CrownSimple | Mode::CrownShaped)
    }
}

/// Where a crown shape template comes from in crown-shaped mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrownShapeSource {
    /// One cycle per level over all stope blocks: a flat crown top.
    FlatLevels,
    /// User-supplied template CSV.
    Path(PathBuf),
}

/// One scenario, as parsed from a config JSON document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub grid: GridSpec,
    pub block_model: PathBuf,
    pub mode: Mode,
    pub slope: SlopeSpec,
    #[serde(default)]
    pub crown: Option<CrownSpec>,
    /// `"flat-levels"` or a template CSV path; crown-shaped mode only.
    #[serde(default)]
    pub crown_shape: Option<String>,
    #[serde(default)]
    pub economics: EconomicParams,
    pub output_dir: PathBuf,
    /// Carried for provenance when the model came from the generator.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ScenarioConfig {
    /// Check mode-dependent requirements.
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.slope.validate()?;
        self.economics.validate()?;
        if self.mode.needs_crown() {
            let crown = self.crown.as_ref().ok_or_else(|| {
                Error::Config(format!("mode {} requires a crown spec", self.mode.name()))
            })?;
            crown.validate(&self.grid)?;
        }
        if self.mode == Mode::CrownShaped && self.crown_shape.is_none() {
            return Err(Error::Config(
                "crown-shaped mode requires crown_shape (\"flat-levels\" or a CSV path)".into(),
            ));
        }
        Ok(())
    }

    pub fn crown_shape_source(&self) -> Option<CrownShapeSource> {
        self.crown_shape.as_deref().map(|s| {
            if s == "flat-levels" {
                CrownShapeSource::FlatLevels
            } else {
                CrownShapeSource::Path(PathBuf::from(s))
            }
        })
    }

    /// Resolve relative paths against the directory of the config file.
    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        resolve(&mut self.block_model);
        resolve(&mut self.output_dir);
        if let Some(CrownShapeSource::Path(p)) = self.crown_shape_source() {
            if p.is_relative() {
                self.crown_shape = Some(base.join(p).to_string_lossy().into_owned());
            }
        }
    }
}

/// Parse and validate a scenario config; relative paths inside it are taken
/// relative to the config file's directory.
pub fn load_scenario_config(path: &Path) -> Result<ScenarioConfig> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config: ScenarioConfig = serde_json::from_str(&body)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    if let Some(base) = path.parent() {
        config.resolve_paths(base);
    }
    Ok(config)
}

/// A finished run: the report plus the block sets, for callers that want to
/// render or post-check instead of just reading the table.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub mode: Mode,
    pub report: SummaryReport,
    pub outcome: TransitionOutcome,
}

/// Build the arc families a mode calls for.
fn build_arcs(config: &ScenarioConfig, model: &BlockModel) -> Result<ArcSet> {
    let template = build_slope_template(&config.slope, &model.grid);
    let b_arcs = build_b_arcs(model, &template);
    let c_arcs = match config.mode {
        Mode::PitOnly | Mode::Conventional => Vec::new(),
        Mode::DualIdentity => build_c_arcs(model, 0),
        Mode::CrownSimple | Mode::CrownShaped => {
            let crown = config.crown.as_ref().expect("validated");
            build_c_arcs(model, crown.thickness_levels)
        }
    };
    let d_arcs = if config.mode == Mode::CrownShaped {
        let shape = match config.crown_shape_source().expect("validated") {
            CrownShapeSource::FlatLevels => generate_flat_level_groups(model),
            CrownShapeSource::Path(path) => load_crown_shape(&path)?,
        };
        build_d_arcs(&shape, model)?
    } else {
        Vec::new()
    };
    Ok(ArcSet {
        b_arcs,
        c_arcs,
        d_arcs,
    })
}

/// Run one scenario against an already loaded model and write its outputs.
pub fn run_optimize_on(config: &ScenarioConfig, model: &BlockModel) -> Result<ScenarioRun> {
    config.validate()?;
    let weights = build_vertex_weights(model, &config.economics, config.mode.weight_mode());
    let arcs = build_arcs(config, model)?;
    let stats_arcs = (arcs.b_arcs.len(), arcs.c_arcs.len(), arcs.d_arcs.len());
    let (problem, map) = assemble_problem(&weights, &arcs, model)?;
    drop(arcs);

    let start = Instant::now();
    let solution = solve_max_closure(&problem);
    let solve_seconds = start.elapsed().as_secs_f64();

    if !solution.is_closed(&problem) {
        return Err(Error::Inconsistency(
            "solver returned a non-closed vertex set".into(),
        ));
    }
    let outcome = extract_outcome(&solution, &map, model, config.mode.ug_convention())?;
    if let (true, Some(crown)) = (config.mode.needs_crown(), config.crown.as_ref()) {
        let violations = verify_crown_thickness(&outcome, crown, model);
        if !violations.is_empty() {
            return Err(Error::Inconsistency(format!(
                "crown pillar thinner than required at {} blocks, first {}",
                violations.len(),
                violations[0]
            )));
        }
    }

    let stats = RunStats {
        vertex_count: problem.vertex_count(),
        b_arc_count: stats_arcs.0,
        c_arc_count: stats_arcs.1,
        d_arc_count: stats_arcs.2,
        solve_seconds,
    };
    let report = summarize(&outcome, model, &weights, &stats);
    if report.objective != solution.objective {
        return Err(Error::Inconsistency(format!(
            "objective mismatch: solver {} vs weights {}",
            solution.objective, report.objective
        )));
    }

    write_outputs(config, model, &outcome, &report)?;
    Ok(ScenarioRun {
        mode: config.mode,
        report,
        outcome,
    })
}

/// Load the model named by the config and run it.
pub fn run_optimize(config: &ScenarioConfig) -> Result<ScenarioRun> {
    config.validate()?;
    let model = load_block_model(&config.block_model, config.grid)?;
    run_optimize_on(config, &model)
}

fn write_outputs(
    config: &ScenarioConfig,
    model: &BlockModel,
    outcome: &TransitionOutcome,
    report: &SummaryReport,
) -> Result<()> {
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_membership_csv(outcome, model, &dir.join("membership.csv"))?;
    write_pit_surface_csv(outcome, &model.grid, &dir.join("pit_surface.csv"))?;
    write_summary_json(report, &dir.join("summary.json"))?;

    let path = dir.join("slices.txt");
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e| Error::io(&path, e);
    let mid_j = model.grid.ny / 2;
    let mid_i = model.grid.nx / 2;
    writeln!(w, "section j={mid_j} (columns i, top level first)").map_err(io_err)?;
    w.write_all(render_slice(outcome, model, SliceAxis::J, mid_j)?.as_bytes())
        .map_err(io_err)?;
    writeln!(w, "\nsection i={mid_i} (columns j, top level first)").map_err(io_err)?;
    w.write_all(render_slice(outcome, model, SliceAxis::I, mid_i)?.as_bytes())
        .map_err(io_err)?;
    w.flush().map_err(io_err)?;
    Ok(())
}

/// One row per scenario, in input order.
#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub rows: Vec<ScenarioRun>,
}

impl ComparisonTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let io_err = |e| Error::io(path, e);
        writeln!(
            w,
            "mode,vertex_count,b_arc_count,c_arc_count,d_arc_count,\
             pit_total_tonnes,pit_ore_tonnes,pit_depth_m,\
             ug_level_count,ug_top_level_min,ug_top_level_max,\
             pit_value,ug_value,total_value,objective,solve_seconds"
        )
        .map_err(io_err)?;
        for run in &self.rows {
            let r = &run.report;
            let fmt_opt = |v: Option<u32>| v.map_or(String::new(), |v| v.to_string());
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3}",
                run.mode.name(),
                r.vertex_count,
                r.b_arc_count,
                r.c_arc_count,
                r.d_arc_count,
                r.pit_total_tonnes,
                r.pit_ore_tonnes,
                r.pit_depth_m,
                r.ug_level_count,
                fmt_opt(r.ug_top_level_min),
                fmt_opt(r.ug_top_level_max),
                r.pit_value,
                r.ug_value,
                r.total_value,
                r.objective,
                r.solve_seconds,
            )
            .map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
        Ok(())
    }
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<14} {:>9} {:>9} {:>7} {:>6} {:>12} {:>9} {:>9} {:>14} {:>14} {:>14} {:>8}",
            "mode",
            "vertices",
            "B",
            "C",
            "D",
            "pit ore t",
            "depth m",
            "UG lvls",
            "pit value",
            "UG value",
            "total",
            "solve s"
        )?;
        for run in &self.rows {
            let r = &run.report;
            let levels = match (r.ug_top_level_min, r.ug_top_level_max) {
                (Some(lo), Some(hi)) if lo != hi => format!("{}~{}", lo, hi),
                (Some(lo), _) => lo.to_string(),
                _ => "n/a".into(),
            };
            writeln!(
                f,
                "{:<14} {:>9} {:>9} {:>7} {:>6} {:>12.0} {:>9.0} {:>9} {:>14} {:>14} {:>14} {:>8.2}",
                run.mode.name(),
                r.vertex_count,
                r.b_arc_count,
                r.c_arc_count,
                r.d_arc_count,
                r.pit_ore_tonnes,
                r.pit_depth_m,
                levels,
                r.pit_value.to_string(),
                r.ug_value.to_string(),
                r.total_value.to_string(),
                r.solve_seconds,
            )?;
        }
        Ok(())
    }
}

/// Run several scenarios over one shared block model, possibly in parallel,
/// and tabulate them. All configs must name the same model and grid, and
/// must write to distinct directories. `threads = 0` means one per CPU.
pub fn run_compare(configs: &[ScenarioConfig], threads: usize) -> Result<ComparisonTable> {
    if configs.is_empty() {
        return Err(Error::Config("compare needs at least one scenario".into()));
    }
    for config in configs {
        config.validate()?;
    }
    let first = &configs[0];
    for config in &configs[1..] {
        if config.block_model != first.block_model {
            return Err(Error::Config(
                "compare scenarios must share one block model".into(),
            ));
        }
        if config.grid != first.grid {
            return Err(Error::Config("compare scenarios must share one grid".into()));
        }
    }
    for (idx, config) in configs.iter().enumerate() {
        if configs[..idx].iter().any(|c| c.output_dir == config.output_dir) {
            return Err(Error::Config(format!(
                "output_dir {} used by more than one scenario",
                config.output_dir.display()
            )));
        }
    }

    let model = load_block_model(&first.block_model, first.grid)?;
    let worker_count = if threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        threads
    }
    .min(configs.len());

    let results: Mutex<Vec<Option<Result<ScenarioRun>>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= configs.len() {
                    break;
                }
                let run = run_optimize_on(&configs[idx], &model);
                results.lock().unwrap()[idx] = Some(run);
            });
        }
    });

    let mut rows = Vec::with_capacity(configs.len());
    for slot in results.into_inner().unwrap() {
        rows.push(slot.expect("every scenario was claimed by a worker")?);
    }
    Ok(ComparisonTable { rows })
}
