//! ASCII cross-sections of a solved scenario.

use crate::block_model::{BlockIndex, BlockModel};
use crate::error::{Error, Result};
use crate::interpret::TransitionOutcome;

/// Which axis the section fixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceAxis {
    /// Fix i, show a j (across) by k (down) section.
    I,
    /// Fix j, show an i (across) by k (down) section.
    J,
}

/// Render one vertical section, top level first, one character per block:
/// `P` mined by pit, `C` crown pillar, `u` otherwise lost to underground,
/// `U` available underground, `.` anything else. A block both mined and
/// carrying a stope verdict shows as `P`.
pub fn render_slice(
    outcome: &TransitionOutcome,
    model: &BlockModel,
    axis: SliceAxis,
    index: u32,
) -> Result<String> {
    let grid = model.grid;
    let (limit, width) = match axis {
        SliceAxis::I => (grid.nx, grid.ny),
        SliceAxis::J => (grid.ny, grid.nx),
    };
    if index >= limit {
        return Err(Error::Config(format!(
            "slice index {index} out of range (limit {limit})"
        )));
    }
    let mut out = String::with_capacity((width as usize + 1) * grid.nz as usize);
    for k in 0..grid.nz {
        for w in 0..width {
            let block = match axis {
                SliceAxis::I => BlockIndex::new(index, w, k),
                SliceAxis::J => BlockIndex::new(w, index, k),
            };
            out.push(if outcome.pit_blocks.contains(&block) {
                'P'
            } else if outcome.crown_pillar.contains(&block) {
                'C'
            } else if outcome.ug_unavailable.contains(&block) {
                'u'
            } else if outcome.ug_available.contains(&block) {
                'U'
            } else {
                '.'
            });
        }
        out.push('\n');
    }
    Ok(out)
}
