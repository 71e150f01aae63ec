//! Precedence arc generation.
//!
//! Three arc families drive the optimization:
//!
//! * **B arcs** run between pit vertices and encode slope safety: a block can
//!   only be mined once the cone of blocks above it is gone.
//! * **C arcs** run from pit vertices to underground vertices. With zero
//!   offset they tie a block to its own stope twin (plain opportunity cost);
//!   with a positive offset they tie it to the stope `thickness` levels
//!   below, which is what carves out a crown pillar.
//! * **D arcs** run between underground vertices at one level, forming
//!   directed cycles. Including any member of a cycle in a closure drags the
//!   whole cycle in, forcing the crown to take a prescribed shape.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::block_model::{BlockIndex, BlockModel, GridSpec};
use crate::error::{Error, Result};

/// Pit wall constraint: a maximum slope angle plus how many levels upward
/// the offset template spans. More levels approximate the cone better at the
/// price of more arcs per block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeSpec {
    #[serde(rename = "degrees")]
    pub slope_deg: f64,
    pub template_levels: u32,
}

impl SlopeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.slope_deg > 0.0 && self.slope_deg < 90.0) {
            return Err(Error::Config(format!(
                "slope angle must be in (0, 90) degrees, got {}",
                self.slope_deg
            )));
        }
        if self.template_levels == 0 {
            return Err(Error::Config("template_levels must be >= 1".into()));
        }
        Ok(())
    }
}

/// The per-block arc pattern: signed offsets (di, dj, dk) with dk < 0, each
/// pointing at a block that must be removed first. Transitively reduced, so
/// no offset is a sum of two or more others.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetTemplate {
    pub offsets: Vec<(i32, i32, i32)>,
}

/// Crown pillar thickness in whole levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrownSpec {
    pub thickness_levels: u32,
}

impl CrownSpec {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.thickness_levels == 0 {
            return Err(Error::Config("crown thickness must be >= 1 level".into()));
        }
        if self.thickness_levels >= grid.nz {
            return Err(Error::Config(format!(
                "crown thickness {} must be smaller than the grid depth {}",
                self.thickness_levels, grid.nz
            )));
        }
        Ok(())
    }
}

/// One group of underground blocks that must enter a closure together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrownGroup {
    pub level: u32,
    pub members: Vec<BlockIndex>,
}

/// The required crown shape, expressed as per-level groups. Each group with
/// two or more members becomes one directed cycle.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CrownShapeTemplate {
    pub groups: Vec<CrownGroup>,
}

/// The assembled arc families of one scenario.
#[derive(Debug, Clone, Default)]
pub struct ArcSet {
    /// Pit -> pit slope arcs.
    pub b_arcs: Vec<(BlockIndex, BlockIndex)>,
    /// Pit -> underground linkage arcs.
    pub c_arcs: Vec<(BlockIndex, BlockIndex)>,
    /// Underground -> underground cycle arcs.
    pub d_arcs: Vec<(BlockIndex, BlockIndex)>,
}

/// Build the removal-cone offset template for a slope constraint.
///
/// A candidate offset (di, dj, dk), 1 <= -dk <= L, is in the cone when the
/// horizontal center distance fits under the slope:
/// sqrt((di*dx)^2 + (dj*dy)^2) <= (-dk)*dz / tan(slope). Offsets that can
/// never land in-grid (|di| >= nx or |dj| >= ny) are dropped, which is what
/// collapses the template to the three-arc pattern on a 2D section. The
/// survivors are transitively reduced: an offset expressible as a sum of two
/// or more cone offsets is implied by them and carries no information.
pub fn build_slope_template(slope: &SlopeSpec, grid: &GridSpec) -> OffsetTemplate {
    let levels = slope.template_levels as i32;
    let tan = slope.slope_deg.to_radians().tan();
    // enumeration bounds get slack so a 1-ulp-high tangent cannot floor away
    // a boundary offset; the cone test below is the real filter
    let reach = |block_dim: f64| -> u32 {
        (levels as f64 * grid.dz / tan / block_dim + 1e-6).floor() as u32
    };
    let max_di = (grid.nx - 1).min(reach(grid.dx)) as i32;
    let max_dj = (grid.ny - 1).min(reach(grid.dy)) as i32;

    let in_cone = |di: i32, dj: i32, dk: i32| -> bool {
        let horiz = ((di as f64 * grid.dx).powi(2) + (dj as f64 * grid.dy).powi(2)).sqrt();
        horiz <= (-dk) as f64 * grid.dz / tan + 1e-9
    };

    let mut cone: Vec<(i32, i32, i32)> = Vec::new();
    for dk in 1..=levels {
        for di in -max_di..=max_di {
            for dj in -max_dj..=max_dj {
                if in_cone(di, dj, -dk) {
                    cone.push((di, dj, -dk));
                }
            }
        }
    }

    // Decomposability DP over the integer box covering every v - c we can
    // encounter. Any decomposition has a sign-aligned equivalent, so pruning
    // by unrestricted sums never loses a constraint at grid boundaries.
    let cone_set: BTreeSet<(i32, i32, i32)> = cone.iter().copied().collect();
    let bi = 2 * max_di;
    let bj = 2 * max_dj;
    let index_of = |di: i32, dj: i32, dk: i32| -> Option<usize> {
        if di.abs() > bi || dj.abs() > bj || dk >= 0 || dk < -levels {
            return None;
        }
        let w = (2 * bi + 1) as usize;
        let h = (2 * bj + 1) as usize;
        let d = (-dk - 1) as usize;
        Some(((d * h + (dj + bj) as usize) * w) + (di + bi) as usize)
    };
    let table_len = (2 * bi + 1) as usize * (2 * bj + 1) as usize * levels as usize;
    // reachable(v): v is a sum of >= 1 cone offsets
    let mut reachable = vec![false; table_len];
    for &(di, dj, dk) in &cone {
        reachable[index_of(di, dj, dk).unwrap()] = true;
    }
    for dk in 2..=levels {
        for di in -bi..=bi {
            for dj in -bj..=bj {
                let idx = match index_of(di, dj, -dk) {
                    Some(idx) => idx,
                    None => continue,
                };
                if reachable[idx] {
                    continue;
                }
                'parts: for &(ci, cj, ck) in &cone {
                    if -ck >= dk {
                        continue;
                    }
                    if let Some(rest) = index_of(di - ci, dj - cj, -dk - ck) {
                        if reachable[rest] {
                            reachable[idx] = true;
                            break 'parts;
                        }
                    }
                }
            }
        }
    }

    let decomposable = |&(di, dj, dk): &(i32, i32, i32)| -> bool {
        cone.iter().any(|&(ci, cj, ck)| {
            if ck <= dk {
                return false;
            }
            let (ri, rj, rk) = (di - ci, dj - cj, dk - ck);
            cone_set.contains(&(ri, rj, rk))
                || index_of(ri, rj, rk).is_some_and(|idx| reachable[idx])
        })
    };

    let offsets: Vec<(i32, i32, i32)> = cone.iter().filter(|o| !decomposable(o)).copied().collect();
    OffsetTemplate { offsets }
}

/// Slope arcs for every in-grid (block, cone block) pair. Arcs whose target
/// would fall outside the grid are clipped.
pub fn build_b_arcs(model: &BlockModel, template: &OffsetTemplate) -> Vec<(BlockIndex, BlockIndex)> {
    let grid = model.grid;
    let mut arcs = Vec::new();
    for k in 1..grid.nz {
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let from = BlockIndex { i, j, k };
                for &(di, dj, dk) in &template.offsets {
                    if let Some(to) = from.offset(di, dj, dk) {
                        if grid.contains(to) {
                            arcs.push((from, to));
                        }
                    }
                }
            }
        }
    }
    arcs
}

/// Linkage arcs from pit vertices to underground vertices.
///
/// `offset_levels = 0` ties every stope block to its own pit twin;
/// `offset_levels = t` ties it to the pit block `t` levels above, leaving a
/// crown pillar of thickness `t` between the pit floor and the stopes. A
/// stope too shallow for its source level is clipped at the surface.
pub fn build_c_arcs(model: &BlockModel, offset_levels: u32) -> Vec<(BlockIndex, BlockIndex)> {
    let mut arcs = Vec::new();
    for ug in model.ug_blocks_level_major() {
        if ug.k >= offset_levels {
            let source = BlockIndex {
                i: ug.i,
                j: ug.j,
                k: ug.k - offset_levels,
            };
            arcs.push((source, ug));
        }
    }
    arcs
}

/// Cycle arcs realizing a crown shape template. Each group's members,
/// sorted by (i, j), are chained head to tail; singleton groups need no arc.
pub fn build_d_arcs(
    shape: &CrownShapeTemplate,
    model: &BlockModel,
) -> Result<Vec<(BlockIndex, BlockIndex)>> {
    let mut seen: BTreeSet<BlockIndex> = BTreeSet::new();
    let mut arcs = Vec::new();
    for group in &shape.groups {
        if group.members.is_empty() {
            return Err(Error::CrownShape("empty group".into()));
        }
        let mut members = group.members.clone();
        members.sort_by_key(|b| (b.i, b.j));
        for member in &members {
            if member.k != group.level {
                return Err(Error::CrownShape(format!(
                    "block {member} is not at group level {}",
                    group.level
                )));
            }
            if model.ug_at(*member).is_none() {
                return Err(Error::CrownShape(format!(
                    "block {member} has no underground attributes"
                )));
            }
            if !seen.insert(*member) {
                return Err(Error::CrownShape(format!(
                    "block {member} appears in more than one group"
                )));
            }
        }
        if members.len() >= 2 {
            for pair in members.windows(2) {
                arcs.push((pair[0], pair[1]));
            }
            arcs.push((members[members.len() - 1], members[0]));
        }
    }
    Ok(arcs)
}

/// A flat-top crown shape: one group per level holding every stope block of
/// that level.
pub fn generate_flat_level_groups(model: &BlockModel) -> CrownShapeTemplate {
    let mut by_level: BTreeMap<u32, Vec<BlockIndex>> = BTreeMap::new();
    for &index in model.ug.keys() {
        by_level.entry(index.k).or_default().push(index);
    }
    CrownShapeTemplate {
        groups: by_level
            .into_iter()
            .map(|(level, members)| CrownGroup { level, members })
            .collect(),
    }
}

/// Read a crown shape template. Format: `level,group,i,j` with an opaque
/// non-negative group id; all rows of a group must share one level.
pub fn load_crown_shape(path: &Path) -> Result<CrownShapeTemplate> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    match lines.next() {
        Some((_, Ok(header))) if header.trim_end() == "level,group,i,j" => {}
        Some((_, Ok(_))) => return Err(Error::csv(path, 1, "expected header `level,group,i,j`")),
        Some((_, Err(e))) => return Err(Error::io(path, e)),
        None => return Err(Error::csv(path, 1, "empty file")),
    }

    let mut groups: BTreeMap<u64, CrownGroup> = BTreeMap::new();
    for (lineno, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::csv(path, lineno, "expected 4 fields"));
        }
        let parse = |f: &str, name: &str| -> Result<u64> {
            f.trim()
                .parse()
                .map_err(|_| Error::csv(path, lineno, format!("bad {name}: {f:?}")))
        };
        let level = parse(fields[0], "level")? as u32;
        let group_id = parse(fields[1], "group")?;
        let i = parse(fields[2], "i")? as u32;
        let j = parse(fields[3], "j")? as u32;
        let group = groups.entry(group_id).or_insert(CrownGroup {
            level,
            members: Vec::new(),
        });
        if group.level != level {
            return Err(Error::csv(
                path,
                lineno,
                format!("group {group_id} mixes levels {} and {level}", group.level),
            ));
        }
        group.members.push(BlockIndex { i, j, k: level });
    }
    Ok(CrownShapeTemplate {
        groups: groups.into_values().collect(),
    })
}
