//! The 3D block model: grid geometry plus per-block pit and underground
//! economics.
//!
//! A model holds two sparse maps over the same grid. The pit map carries
//! tonnage and open-pit revenue/cost for every physical block; grid cells
//! absent from it are air (zero mass, zero value). The underground map is
//! sparser still: it carries stope revenue/cost only for blocks that sit
//! inside a potential underground mining envelope. Level index `k` grows
//! downward, with `k = 0` the top level.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Money;

/// Expected header of the block-model CSV.
pub const BLOCK_MODEL_HEADER: &str = "i,j,k,tonnes,ore_tonnes,vp,cp,vu,cu";

/// Geometry of the regular block grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: u32,
    pub ny: u32,
    pub nz: u32,
    /// Block dimensions in meters.
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    /// Elevation of the top of level k = 0, in meters.
    #[serde(default)]
    pub surface_elevation: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(Error::Config("grid counts nx, ny, nz must be >= 1".into()));
        }
        if !(self.dx > 0.0 && self.dy > 0.0 && self.dz > 0.0) {
            return Err(Error::Config("block dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn contains(&self, index: BlockIndex) -> bool {
        index.i < self.nx && index.j < self.ny && index.k < self.nz
    }

    pub fn cell_count(&self) -> usize {
        self.nx as usize * self.ny as usize * self.nz as usize
    }

    /// Iterate every cell in (k, j, i) order, i fastest.
    pub fn cells(&self) -> impl Iterator<Item = BlockIndex> + '_ {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        (0..nz).flat_map(move |k| {
            (0..ny).flat_map(move |j| (0..nx).map(move |i| BlockIndex { i, j, k }))
        })
    }
}

/// Address of one block: column east, column north, level down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockIndex {
    pub i: u32,
    pub j: u32,
    pub k: u32,
}

impl BlockIndex {
    pub fn new(i: u32, j: u32, k: u32) -> BlockIndex {
        BlockIndex { i, j, k }
    }

    /// Sort key putting levels first, matching vertex-id assignment order.
    pub fn level_major(&self) -> (u32, u32, u32) {
        (self.k, self.j, self.i)
    }

    /// Apply a signed offset, failing on underflow rather than wrapping.
    pub fn offset(&self, di: i32, dj: i32, dk: i32) -> Option<BlockIndex> {
        Some(BlockIndex {
            i: self.i.checked_add_signed(di)?,
            j: self.j.checked_add_signed(dj)?,
            k: self.k.checked_add_signed(dk)?,
        })
    }
}

impl fmt::Display for BlockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.k)
    }
}

/// Open-pit side economics of a block. Extraction cost assumes the block is
/// already uncovered; the cost of removing overburden is paid by the blocks
/// above it through the precedence arcs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitAttributes {
    pub tonnes: f64,
    pub ore_tonnes: f64,
    /// Pit revenue.
    pub vp: Money,
    /// Pit extraction cost.
    pub cp: Money,
}

impl PitAttributes {
    pub const AIR: PitAttributes = PitAttributes {
        tonnes: 0.0,
        ore_tonnes: 0.0,
        vp: Money::ZERO,
        cp: Money::ZERO,
    };
}

/// Underground side economics. The extraction cost includes the prorated
/// cost of access development, since drifts and declines are not represented
/// as blocks of their own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UndergroundAttributes {
    /// Underground revenue.
    pub vu: Money,
    /// Underground extraction cost including access.
    pub cu: Money,
}

impl UndergroundAttributes {
    /// Undiscounted stope value vu - cu.
    pub fn value(&self) -> Money {
        self.vu - self.cu
    }
}

/// A loaded, validated model. Immutable after load; cheap to share across
/// concurrent scenario runs behind a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockModel {
    pub grid: GridSpec,
    pub pit: BTreeMap<BlockIndex, PitAttributes>,
    pub ug: BTreeMap<BlockIndex, UndergroundAttributes>,
}

/// A non-fatal finding from [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub index: BlockIndex,
    pub reason: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.index, self.reason)
    }
}

impl BlockModel {
    pub fn new(grid: GridSpec) -> BlockModel {
        BlockModel {
            grid,
            pit: BTreeMap::new(),
            ug: BTreeMap::new(),
        }
    }

    /// Pit attributes with air defaults for absent cells.
    pub fn pit_at(&self, index: BlockIndex) -> PitAttributes {
        self.pit.get(&index).copied().unwrap_or(PitAttributes::AIR)
    }

    pub fn ug_at(&self, index: BlockIndex) -> Option<UndergroundAttributes> {
        self.ug.get(&index).copied()
    }

    /// Underground-defined blocks sorted level-major, the order used for
    /// vertex-id assignment.
    pub fn ug_blocks_level_major(&self) -> Vec<BlockIndex> {
        let mut blocks: Vec<BlockIndex> = self.ug.keys().copied().collect();
        blocks.sort_by_key(|b| b.level_major());
        blocks
    }
}

/// Load a block model from CSV. Duplicate indices, out-of-range indices and
/// malformed rows are hard errors; a row leaves the underground columns blank
/// to mean "no stope here".
pub fn load_block_model(path: &Path, grid: GridSpec) -> Result<BlockModel> {
    grid.validate()?;
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);

    let mut header = String::new();
    reader
        .read_line(&mut header)
        .map_err(|e| Error::io(path, e))?;
    if header.trim_end() != BLOCK_MODEL_HEADER {
        return Err(Error::csv(
            path,
            1,
            format!("expected header `{BLOCK_MODEL_HEADER}`"),
        ));
    }

    let mut model = BlockModel::new(grid);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = lineno + 2; // header was line 1
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::csv(
                path,
                lineno,
                format!("expected 9 fields, got {}", fields.len()),
            ));
        }
        let index = BlockIndex {
            i: parse_u32(path, lineno, fields[0], "i")?,
            j: parse_u32(path, lineno, fields[1], "j")?,
            k: parse_u32(path, lineno, fields[2], "k")?,
        };
        if !grid.contains(index) {
            return Err(Error::OutOfRange { index });
        }
        let tonnes = parse_f64(path, lineno, fields[3], "tonnes")?;
        let ore_tonnes = parse_f64(path, lineno, fields[4], "ore_tonnes")?;
        if tonnes < 0.0 || ore_tonnes < 0.0 || ore_tonnes > tonnes {
            return Err(Error::csv(
                path,
                lineno,
                format!("need 0 <= ore_tonnes <= tonnes, got {ore_tonnes} of {tonnes}"),
            ));
        }
        let vp = parse_money(path, lineno, fields[5], "vp")?;
        let cp = parse_money(path, lineno, fields[6], "cp")?;
        let pit = PitAttributes {
            tonnes,
            ore_tonnes,
            vp,
            cp,
        };
        if model.pit.insert(index, pit).is_some() {
            return Err(Error::DuplicateBlock { index });
        }

        let vu_blank = fields[7].trim().is_empty();
        let cu_blank = fields[8].trim().is_empty();
        match (vu_blank, cu_blank) {
            (true, true) => {}
            (false, false) => {
                let vu = parse_money(path, lineno, fields[7], "vu")?;
                let cu = parse_money(path, lineno, fields[8], "cu")?;
                model.ug.insert(index, UndergroundAttributes { vu, cu });
            }
            _ => {
                return Err(Error::csv(
                    path,
                    lineno,
                    "vu and cu must both be present or both blank",
                ));
            }
        }
    }
    Ok(model)
}

/// Write a model back in the load format, rows sorted by (i, j, k). Field
/// values round-trip exactly through [`load_block_model`].
pub fn save_block_model(model: &BlockModel, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "{BLOCK_MODEL_HEADER}").map_err(io_err)?;
    for (index, pit) in &model.pit {
        let (vu, cu) = match model.ug.get(index) {
            Some(ug) => (ug.vu.to_string(), ug.cu.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            index.i, index.j, index.k, pit.tonnes, pit.ore_tonnes, pit.vp, pit.cp, vu, cu
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

/// Sanity-check a model, returning one diagnostic per violated invariant.
/// An underground stope in an air block is legal but worth flagging.
pub fn validate(model: &BlockModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (&index, pit) in &model.pit {
        if !model.grid.contains(index) {
            out.push(Diagnostic {
                index,
                reason: "pit block outside grid".into(),
            });
        }
        if pit.tonnes < 0.0 || pit.ore_tonnes < 0.0 || pit.ore_tonnes > pit.tonnes {
            out.push(Diagnostic {
                index,
                reason: format!(
                    "ore_tonnes {} inconsistent with tonnes {}",
                    pit.ore_tonnes, pit.tonnes
                ),
            });
        }
    }
    for &index in model.ug.keys() {
        if !model.grid.contains(index) {
            out.push(Diagnostic {
                index,
                reason: "underground block outside grid".into(),
            });
        } else if !model.pit.contains_key(&index) {
            out.push(Diagnostic {
                index,
                reason: "underground stope in air block".into(),
            });
        }
    }
    out
}

/// Depth of the bottom of level `k` below surface: (k + 1) * dz.
pub fn depth_of_level(grid: &GridSpec, k: u32) -> Result<f64> {
    if k >= grid.nz {
        return Err(Error::OutOfRange {
            index: BlockIndex::new(0, 0, k),
        });
    }
    Ok((k as f64 + 1.0) * grid.dz)
}

fn parse_u32(path: &Path, line: usize, field: &str, name: &str) -> Result<u32> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::csv(path, line, format!("bad {name}: {field:?}")))
}

fn parse_f64(path: &Path, line: usize, field: &str, name: &str) -> Result<f64> {
    let value: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::csv(path, line, format!("bad {name}: {field:?}")))?;
    if !value.is_finite() {
        return Err(Error::csv(path, line, format!("{name} must be finite")));
    }
    Ok(value)
}

fn parse_money(path: &Path, line: usize, field: &str, name: &str) -> Result<Money> {
    Money::parse(field).map_err(|_| Error::csv(path, line, format!("bad {name}: {field:?}")))
}
