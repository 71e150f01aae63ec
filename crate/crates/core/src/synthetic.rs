//! Deterministic synthetic deposit generator.
//!
//! Test and demonstration scenarios need a deposit whose deep ore is worth
//! fighting over: rich enough that a pit wants to chase it down, costly
//! enough that an underground alternative eventually wins. The generator
//! drapes an ellipsoidal ore shell through the grid, drifts its center with
//! depth so the pit can't just sink a symmetric cone, and prices everything
//! from a handful of fixed unit rates. Same spec and seed, same bytes out.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::block_model::{BlockIndex, BlockModel, GridSpec, PitAttributes, UndergroundAttributes};
use crate::error::{Error, Result};
use crate::money::Money;

/// Rock density, t/m^3.
const DENSITY: f64 = 2.4;
/// Pit revenue per tonne per grade unit, $.
const ORE_PRICE: f64 = 9.0;
/// Pit mining cost per tonne, $.
const PIT_COST: f64 = 2.0;
/// Underground recovery relative to pit recovery.
const UG_RECOVERY: f64 = 0.9;
/// Underground mining cost per tonne including prorated access, $.
const UG_COST: f64 = 3.5;

/// An ellipsoidal ore shell whose center drifts sideways with depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OreShell {
    /// Ellipsoid center in block coordinates.
    pub center_i: f64,
    pub center_j: f64,
    pub center_k: f64,
    /// Ellipsoid radii in blocks.
    pub radius_i: f64,
    pub radius_j: f64,
    pub radius_k: f64,
    /// Sideways drift of the center per level of depth, in blocks.
    pub drift_i_per_level: f64,
    pub drift_j_per_level: f64,
    /// Uniform grade range sampled per ore block.
    pub grade_min: f64,
    pub grade_max: f64,
}

/// Everything the generator needs to reproduce a deposit byte for byte.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticDepositSpec {
    pub grid: GridSpec,
    pub shell: OreShell,
    /// Levels 0..oxide_cap_levels carry no underground attributes, mimicking
    /// near-surface material that only a pit can treat.
    pub oxide_cap_levels: u32,
    pub seed: u64,
}

impl SyntheticDepositSpec {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let shell = &self.shell;
        if !(shell.radius_i > 0.0 && shell.radius_j > 0.0 && shell.radius_k > 0.0) {
            return Err(Error::Config("ore shell radii must be positive".into()));
        }
        if !(shell.grade_min > 0.0 && shell.grade_max >= shell.grade_min) {
            return Err(Error::Config("need 0 < grade_min <= grade_max".into()));
        }
        Ok(())
    }
}

/// Parse a deposit spec from JSON.
pub fn load_deposit_spec(path: &std::path::Path) -> Result<SyntheticDepositSpec> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: SyntheticDepositSpec = serde_json::from_str(&body)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

fn in_shell(shell: &OreShell, i: u32, j: u32, k: u32) -> bool {
    let t = (k as f64 - shell.center_k) / shell.radius_k;
    if t.abs() > 1.0 {
        return false;
    }
    let shrink = (1.0 - t * t).sqrt();
    if shrink <= 0.0 {
        return false;
    }
    let ci = shell.center_i + shell.drift_i_per_level * k as f64;
    let cj = shell.center_j + shell.drift_j_per_level * k as f64;
    let di = (i as f64 - ci) / (shell.radius_i * shrink);
    let dj = (j as f64 - cj) / (shell.radius_j * shrink);
    di * di + dj * dj <= 1.0
}

/// Generate the deposit. Every cell gets pit attributes (waste where the
/// shell misses); ore inside the shell below the oxide cap also gets
/// underground attributes when the stope would pay for itself.
pub fn generate_deposit(spec: &SyntheticDepositSpec) -> Result<BlockModel> {
    spec.validate()?;
    let grid = spec.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut model = BlockModel::new(grid);
    let tonnes = grid.dx * grid.dy * grid.dz * DENSITY;

    for block in grid.cells() {
        let BlockIndex { i, j, k } = block;
        // level 0 is overburden even where the shell would reach it
        let is_ore = k >= 1 && in_shell(&spec.shell, i, j, k);
        let (ore_tonnes, vp) = if is_ore {
            let grade: f64 = rng.gen_range(spec.shell.grade_min..=spec.shell.grade_max);
            let vp = Money::from_dollars_rounded(tonnes * grade * ORE_PRICE);
            if k >= spec.oxide_cap_levels {
                let vu = Money::from_dollars_rounded(tonnes * grade * ORE_PRICE * UG_RECOVERY);
                let cu = Money::from_dollars_rounded(tonnes * UG_COST);
                if vu > cu {
                    model.ug.insert(block, UndergroundAttributes { vu, cu });
                }
            }
            (tonnes, vp)
        } else {
            (0.0, Money::ZERO)
        };
        model.pit.insert(
            block,
            PitAttributes {
                tonnes,
                ore_tonnes,
                vp,
                cp: Money::from_dollars_rounded(tonnes * PIT_COST),
            },
        );
    }
    Ok(model)
}
