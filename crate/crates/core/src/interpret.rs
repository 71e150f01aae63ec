//! Reading a closure back into mining terms.
//!
//! A solved closure splits the dual model four ways: blocks the pit mines,
//! stopes the pit sterilizes, the crown pillar (sterilized stopes with no
//! mined twin above them), and the stopes still available underground.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::block_model::{depth_of_level, BlockIndex, BlockModel, GridSpec};
use crate::economics::VertexWeights;
use crate::error::{Error, Result};
use crate::money::Money;
use crate::precedence::CrownSpec;
use crate::solver::{ClosureSolution, MappedVertex, VertexMap};

/// How a scenario relates the closure to underground availability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UgConvention {
    /// Underground plays no part (pit-only optimization).
    Ignored,
    /// No underground vertices exist; a stope is lost exactly when its pit
    /// twin is mined.
    TwinOfPit,
    /// Underground vertices are in the digraph; the closure decides.
    FromClosure,
}

/// The four block sets of a solved transition scenario.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransitionOutcome {
    pub pit_blocks: BTreeSet<BlockIndex>,
    pub ug_unavailable: BTreeSet<BlockIndex>,
    pub crown_pillar: BTreeSet<BlockIndex>,
    pub ug_available: BTreeSet<BlockIndex>,
}

/// Partition a solution's members into the four outcome sets.
pub fn extract_outcome(
    solution: &ClosureSolution,
    map: &VertexMap,
    model: &BlockModel,
    convention: UgConvention,
) -> Result<TransitionOutcome> {
    let mut outcome = TransitionOutcome::default();
    for &id in &solution.members {
        if id as usize >= map.vertex_count() {
            return Err(Error::Inconsistency(format!(
                "solution member {id} does not belong to the mapped problem"
            )));
        }
        match map.vertex(id) {
            MappedVertex::Pit(block) => {
                outcome.pit_blocks.insert(block);
            }
            MappedVertex::Underground(block) => {
                outcome.ug_unavailable.insert(block);
            }
        }
    }

    match convention {
        UgConvention::Ignored => {}
        UgConvention::TwinOfPit => {
            debug_assert!(outcome.ug_unavailable.is_empty());
            for &block in model.ug.keys() {
                if outcome.pit_blocks.contains(&block) {
                    outcome.ug_unavailable.insert(block);
                } else {
                    outcome.ug_available.insert(block);
                }
            }
        }
        UgConvention::FromClosure => {
            for &block in model.ug.keys() {
                if !outcome.ug_unavailable.contains(&block) {
                    outcome.ug_available.insert(block);
                }
            }
        }
    }

    for &block in &outcome.ug_unavailable {
        if !outcome.pit_blocks.contains(&block) {
            outcome.crown_pillar.insert(block);
        }
    }
    Ok(outcome)
}

/// Check the crown-pillar guarantee: below each mined column, every stope
/// within `thickness` levels of the pit bottom (and deep enough to have had
/// an in-grid arc source) must have been marked unavailable. Returns the
/// violating blocks; a sound solve returns none.
pub fn verify_crown_thickness(
    outcome: &TransitionOutcome,
    crown: &CrownSpec,
    model: &BlockModel,
) -> Vec<BlockIndex> {
    let thickness = crown.thickness_levels;
    let mut bottom: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for block in &outcome.pit_blocks {
        bottom
            .entry((block.i, block.j))
            .and_modify(|k| *k = (*k).max(block.k))
            .or_insert(block.k);
    }
    let mut violations = Vec::new();
    for &block in model.ug.keys() {
        let Some(&pit_bottom) = bottom.get(&(block.i, block.j)) else {
            continue;
        };
        let in_band = block.k > pit_bottom && block.k <= pit_bottom + thickness;
        let has_source = block.k >= thickness;
        if in_band && has_source && !outcome.ug_unavailable.contains(&block) {
            violations.push(block);
        }
    }
    violations
}

/// Table-style result metrics for one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub vertex_count: usize,
    pub b_arc_count: usize,
    pub c_arc_count: usize,
    pub d_arc_count: usize,
    pub pit_total_tonnes: f64,
    pub pit_ore_tonnes: f64,
    pub pit_depth_m: f64,
    pub ug_level_count: usize,
    pub ug_top_level_min: Option<u32>,
    pub ug_top_level_max: Option<u32>,
    /// Gross pit value: sum of vp - cp over mined blocks.
    pub pit_value: Money,
    /// Undiscounted stope value left available underground.
    pub ug_value: Money,
    /// pit_value + ug_value.
    pub total_value: Money,
    /// The solver objective, recomputed from the vertex weights.
    pub objective: Money,
    pub solve_seconds: f64,
}

/// Problem-size and timing facts carried into the report.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunStats {
    pub vertex_count: usize,
    pub b_arc_count: usize,
    pub c_arc_count: usize,
    pub d_arc_count: usize,
    pub solve_seconds: f64,
}

/// Aggregate an outcome into report metrics. The objective is recomputed
/// from the weights here, independently of the solver's own sum.
pub fn summarize(
    outcome: &TransitionOutcome,
    model: &BlockModel,
    weights: &VertexWeights,
    stats: &RunStats,
) -> SummaryReport {
    let mut pit_total_tonnes = 0.0;
    let mut pit_ore_tonnes = 0.0;
    let mut pit_value = Money::ZERO;
    let mut objective = Money::ZERO;
    let mut deepest: Option<u32> = None;
    for &block in &outcome.pit_blocks {
        let pit = model.pit_at(block);
        pit_total_tonnes += pit.tonnes;
        pit_ore_tonnes += pit.ore_tonnes;
        pit_value += pit.vp - pit.cp;
        if let Some(&w) = weights.wp.get(&block) {
            objective += w;
        }
        deepest = Some(deepest.map_or(block.k, |k| k.max(block.k)));
    }
    for &block in &outcome.ug_unavailable {
        if let Some(&w) = weights.wu.get(&block) {
            objective += w;
        }
    }

    let mut ug_value = Money::ZERO;
    let mut ug_levels: BTreeSet<u32> = BTreeSet::new();
    let mut top_by_column: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for &block in &outcome.ug_available {
        if let Some(ug) = model.ug_at(block) {
            ug_value += ug.value();
        }
        ug_levels.insert(block.k);
        top_by_column
            .entry((block.i, block.j))
            .and_modify(|k| *k = (*k).min(block.k))
            .or_insert(block.k);
    }

    let pit_depth_m = deepest
        .and_then(|k| depth_of_level(&model.grid, k).ok())
        .unwrap_or(0.0);

    SummaryReport {
        vertex_count: stats.vertex_count,
        b_arc_count: stats.b_arc_count,
        c_arc_count: stats.c_arc_count,
        d_arc_count: stats.d_arc_count,
        pit_total_tonnes,
        pit_ore_tonnes,
        pit_depth_m,
        ug_level_count: ug_levels.len(),
        ug_top_level_min: top_by_column.values().min().copied(),
        ug_top_level_max: top_by_column.values().max().copied(),
        pit_value,
        ug_value,
        total_value: pit_value + ug_value,
        objective,
        solve_seconds: stats.solve_seconds,
    }
}

/// Write the block membership table: one row per attributed or mined block,
/// sorted by (i, j, k).
pub fn write_membership_csv(
    outcome: &TransitionOutcome,
    model: &BlockModel,
    path: &Path,
) -> Result<()> {
    let mut rows: BTreeSet<BlockIndex> = BTreeSet::new();
    rows.extend(model.pit.keys());
    rows.extend(model.ug.keys());
    rows.extend(outcome.pit_blocks.iter());

    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "i,j,k,in_pit,in_crown,ug_available").map_err(io_err)?;
    for block in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            block.i,
            block.j,
            block.k,
            outcome.pit_blocks.contains(&block) as u8,
            outcome.crown_pillar.contains(&block) as u8,
            outcome.ug_available.contains(&block) as u8,
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

/// Write the mined depth of every column, -1 where the pit never reaches.
pub fn write_pit_surface_csv(
    outcome: &TransitionOutcome,
    grid: &GridSpec,
    path: &Path,
) -> Result<()> {
    let mut bottom: BTreeMap<(u32, u32), i64> = BTreeMap::new();
    for block in &outcome.pit_blocks {
        bottom
            .entry((block.i, block.j))
            .and_modify(|k| *k = (*k).max(block.k as i64))
            .or_insert(block.k as i64);
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "i,j,bottom_level").map_err(io_err)?;
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let level = bottom.get(&(i, j)).copied().unwrap_or(-1);
            writeln!(w, "{i},{j},{level}").map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn write_summary_json(report: &SummaryReport, path: &Path) -> Result<()> {
    let body = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Inconsistency(format!("summary serialization: {e}")))?;
    std::fs::write(path, body + "\n").map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_model::{PitAttributes, UndergroundAttributes};
    use crate::economics::{build_vertex_weights, EconomicParams, WeightMode};
    use crate::precedence::{build_b_arcs, build_c_arcs, build_slope_template, ArcSet, SlopeSpec};
    use crate::solver::{assemble_problem, brute_force_max_closure, solve_max_closure};

    fn grid(nx: u32, ny: u32, nz: u32) -> GridSpec {
        GridSpec {
            nx,
            ny,
            nz,
            dx: 30.0,
            dy: 30.0,
            dz: 30.0,
            surface_elevation: 0.0,
        }
    }

    fn block(i: u32, j: u32, k: u32) -> BlockIndex {
        BlockIndex::new(i, j, k)
    }

    /// 1x1x4 column: pit values by level, stopes at levels 2 and 3.
    fn column_model(pit_dollars: [i64; 4], stope_value_dollars: &[i64]) -> BlockModel {
        let mut model = BlockModel::new(grid(1, 1, 4));
        for (k, &value) in pit_dollars.iter().enumerate() {
            model.pit.insert(
                block(0, 0, k as u32),
                PitAttributes {
                    tonnes: 1000.0,
                    ore_tonnes: 400.0,
                    vp: Money::from_dollars(value.max(0)),
                    cp: Money::from_dollars((-value).max(0)),
                },
            );
        }
        for (idx, &value) in stope_value_dollars.iter().enumerate() {
            model.ug.insert(
                block(0, 0, 2 + idx as u32),
                UndergroundAttributes {
                    vu: Money::from_dollars(value),
                    cu: Money::ZERO,
                },
            );
        }
        model
    }

    fn solve_column(
        model: &BlockModel,
        c_offset: u32,
    ) -> (TransitionOutcome, VertexWeights, crate::solver::ClosureSolution) {
        let params = EconomicParams::default();
        let weights = build_vertex_weights(model, &params, WeightMode::Dual);
        let template = build_slope_template(
            &SlopeSpec {
                slope_deg: 45.0,
                template_levels: 1,
            },
            &model.grid,
        );
        let arcs = ArcSet {
            b_arcs: build_b_arcs(model, &template),
            c_arcs: build_c_arcs(model, c_offset),
            d_arcs: Vec::new(),
        };
        let (problem, map) = assemble_problem(&weights, &arcs, model).unwrap();
        // oracle first: the problem is small enough to enumerate
        let oracle = brute_force_max_closure(&problem).unwrap();
        let solution = solve_max_closure(&problem);
        assert_eq!(solution.objective, oracle.objective);
        assert_eq!(solution.members, oracle.members);
        let outcome = extract_outcome(&solution, &map, model, UgConvention::FromClosure).unwrap();
        (outcome, weights, solution)
    }

    #[test]
    fn identity_mode_column() {
        // pit: +1, +1, +5, -10; stopes at k2 (value 2) and k3 (value 3):
        // mining to k2 pays 7 - 2 = 5, going deeper loses money.
        let model = column_model([1, 1, 5, -10], &[2, 3]);
        let (outcome, weights, solution) = solve_column(&model, 0);
        assert_eq!(
            outcome.pit_blocks,
            BTreeSet::from([block(0, 0, 0), block(0, 0, 1), block(0, 0, 2)])
        );
        assert_eq!(outcome.ug_unavailable, BTreeSet::from([block(0, 0, 2)]));
        assert!(outcome.crown_pillar.is_empty());
        assert_eq!(outcome.ug_available, BTreeSet::from([block(0, 0, 3)]));

        // objective identity: M_Y = pit weights + opportunity charges
        let stats = RunStats::default();
        let report = summarize(&outcome, &model, &weights, &stats);
        assert_eq!(report.objective, solution.objective);
        assert_eq!(report.objective, Money::from_dollars(5));
        assert_eq!(report.pit_value, Money::from_dollars(7));
        assert_eq!(report.ug_value, Money::from_dollars(3));
    }

    #[test]
    fn crown_offset_column() {
        // pit: +5, +3, -10, -10; stopes at k2, k3 worth 1 each. With the
        // crown offset, mining k0 and k1 drags both stopes into the closure.
        let model = column_model([5, 3, -10, -10], &[1, 1]);
        let (outcome, weights, solution) = solve_column(&model, 2);
        assert_eq!(
            outcome.pit_blocks,
            BTreeSet::from([block(0, 0, 0), block(0, 0, 1)])
        );
        assert_eq!(
            outcome.ug_unavailable,
            BTreeSet::from([block(0, 0, 2), block(0, 0, 3)])
        );
        assert_eq!(outcome.crown_pillar, outcome.ug_unavailable);
        assert!(outcome.ug_available.is_empty());

        let report = summarize(&outcome, &model, &weights, &RunStats::default());
        assert_eq!(report.objective, solution.objective);
        assert_eq!(report.objective, Money::from_dollars(6));
        assert_eq!(report.pit_value, Money::from_dollars(8));
        assert_eq!(report.ug_value, Money::ZERO);

        // the crown guarantee holds and the detector notices corruption
        let crown = CrownSpec { thickness_levels: 2 };
        assert!(verify_crown_thickness(&outcome, &crown, &model).is_empty());
        let mut corrupted = outcome.clone();
        corrupted.ug_unavailable.remove(&block(0, 0, 3));
        corrupted.ug_available.insert(block(0, 0, 3));
        assert_eq!(verify_crown_thickness(&corrupted, &crown, &model).len(), 1);
    }

    #[test]
    fn shallow_stope_without_source_is_exempt() {
        // pit bottom at level 0, thickness 2, stope at level 1: its arc
        // source would be above the surface, so no requirement applies.
        let mut model = BlockModel::new(grid(1, 1, 4));
        model.pit.insert(
            block(0, 0, 0),
            PitAttributes {
                tonnes: 100.0,
                ore_tonnes: 0.0,
                vp: Money::from_dollars(5),
                cp: Money::ZERO,
            },
        );
        model.ug.insert(
            block(0, 0, 1),
            UndergroundAttributes {
                vu: Money::from_dollars(4),
                cu: Money::ZERO,
            },
        );
        let mut outcome = TransitionOutcome::default();
        outcome.pit_blocks.insert(block(0, 0, 0));
        outcome.ug_available.insert(block(0, 0, 1));
        let crown = CrownSpec { thickness_levels: 2 };
        assert!(verify_crown_thickness(&outcome, &crown, &model).is_empty());
    }

    #[test]
    fn empty_solution_leaves_everything_underground() {
        let model = column_model([-1, -1, -1, -1], &[2, 3]);
        let (outcome, _, solution) = solve_column(&model, 0);
        assert!(solution.members.is_empty());
        assert!(outcome.pit_blocks.is_empty());
        assert!(outcome.ug_unavailable.is_empty());
        assert_eq!(outcome.ug_available.len(), 2);
    }

    #[test]
    fn partition_identities_hold() {
        let model = column_model([1, 1, 5, -10], &[2, 3]);
        let (outcome, _, _) = solve_column(&model, 0);
        // crown = unavailable minus mined twins
        let recomputed: BTreeSet<BlockIndex> = outcome
            .ug_unavailable
            .difference(&outcome.pit_blocks)
            .copied()
            .collect();
        assert_eq!(outcome.crown_pillar, recomputed);
        // availability partitions the stopes
        let all: BTreeSet<BlockIndex> = model.ug.keys().copied().collect();
        let union: BTreeSet<BlockIndex> = outcome
            .ug_available
            .union(&outcome.ug_unavailable)
            .copied()
            .collect();
        assert_eq!(all, union);
        assert!(outcome.ug_available.is_disjoint(&outcome.ug_unavailable));
    }

    #[test]
    fn summarize_empty_outcome_is_all_zero() {
        let model = column_model([1, 1, 1, 1], &[]);
        let outcome = TransitionOutcome::default();
        let report = summarize(
            &outcome,
            &model,
            &VertexWeights::default(),
            &RunStats::default(),
        );
        assert_eq!(report.pit_total_tonnes, 0.0);
        assert_eq!(report.pit_ore_tonnes, 0.0);
        assert_eq!(report.pit_depth_m, 0.0);
        assert_eq!(report.ug_level_count, 0);
        assert_eq!(report.ug_top_level_min, None);
        assert_eq!(report.pit_value, Money::ZERO);
        assert_eq!(report.total_value, Money::ZERO);
    }

    #[test]
    fn summarize_single_block_pit() {
        let mut model = BlockModel::new(grid(2, 2, 2));
        model.pit.insert(
            block(0, 0, 0),
            PitAttributes {
                tonnes: 1000.0,
                ore_tonnes: 400.0,
                vp: Money::from_dollars(10),
                cp: Money::from_dollars(2),
            },
        );
        let weights =
            build_vertex_weights(&model, &EconomicParams::default(), WeightMode::PitOnly);
        let mut outcome = TransitionOutcome::default();
        outcome.pit_blocks.insert(block(0, 0, 0));
        let report = summarize(&outcome, &model, &weights, &RunStats::default());
        assert_eq!(report.pit_ore_tonnes, 400.0);
        assert_eq!(report.pit_total_tonnes, 1000.0);
        assert_eq!(report.pit_value, Money::from_dollars(8));
        assert_eq!(report.total_value, Money::from_dollars(8));
        assert_eq!(report.pit_depth_m, 30.0);
    }

    #[test]
    fn membership_and_surface_files() {
        let model = column_model([5, 3, -10, -10], &[1, 1]);
        let (outcome, _, _) = solve_column(&model, 2);
        let dir = tempfile::tempdir().unwrap();
        let membership = dir.path().join("membership.csv");
        let surface = dir.path().join("pit_surface.csv");
        write_membership_csv(&outcome, &model, &membership).unwrap();
        write_pit_surface_csv(&outcome, &model.grid, &surface).unwrap();

        let membership = std::fs::read_to_string(membership).unwrap();
        assert_eq!(
            membership,
            "i,j,k,in_pit,in_crown,ug_available\n\
             0,0,0,1,0,0\n\
             0,0,1,1,0,0\n\
             0,0,2,0,1,0\n\
             0,0,3,0,1,0\n"
        );
        let surface = std::fs::read_to_string(surface).unwrap();
        assert_eq!(surface, "i,j,bottom_level\n0,0,1\n");
    }
}
