//! Vertex weights for the three weighting modes.
//!
//! The pit weight of a block is its net pit value. The underground weight is
//! the *negated* stope value: including an underground vertex in a closure
//! charges the pit for the stope it sterilizes. The conventional combined
//! weight folds that charge directly into the pit block instead of keeping a
//! second vertex.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::block_model::{BlockIndex, BlockModel, PitAttributes, UndergroundAttributes};
use crate::error::{Error, Result};
use crate::money::Money;

/// Economic knobs shared by all modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconomicParams {
    /// Factor in (0, 1] applied to underground values to account for the
    /// delay between pit completion and stope extraction. 1 = no discount.
    pub ug_discount: f64,
}

impl Default for EconomicParams {
    fn default() -> Self {
        EconomicParams { ug_discount: 1.0 }
    }
}

impl EconomicParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ug_discount > 0.0 && self.ug_discount <= 1.0) {
            return Err(Error::Config(format!(
                "ug_discount must be in (0, 1], got {}",
                self.ug_discount
            )));
        }
        Ok(())
    }
}

/// Which weight set to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Pit values only; underground ignored.
    PitOnly,
    /// Opportunity cost folded into the pit weights; single block model.
    Conventional,
    /// Separate pit and underground weight maps for the dual-model digraph.
    Dual,
}

/// Per-vertex weights, keyed by block.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VertexWeights {
    pub wp: BTreeMap<BlockIndex, Money>,
    pub wu: BTreeMap<BlockIndex, Money>,
}

/// Net pit value vp - cp.
pub fn pit_weight(pit: &PitAttributes) -> Money {
    pit.vp - pit.cp
}

/// Negated (and discounted) stope value: -discount * (vu - cu), rounded half
/// away from zero to cents.
pub fn ug_opportunity_weight(ug: &UndergroundAttributes, params: &EconomicParams) -> Money {
    -(ug.value().scale(params.ug_discount))
}

/// Pit weight with the opportunity cost of a forgone stope folded in.
pub fn conventional_weight(
    pit: &PitAttributes,
    ug: Option<&UndergroundAttributes>,
    params: &EconomicParams,
) -> Money {
    match ug {
        Some(ug) => pit_weight(pit) + ug_opportunity_weight(ug, params),
        None => pit_weight(pit),
    }
}

/// Weights for every attributed block of the model under the given mode.
/// Cells absent from the result default to zero weight downstream.
pub fn build_vertex_weights(
    model: &BlockModel,
    params: &EconomicParams,
    mode: WeightMode,
) -> VertexWeights {
    let mut weights = VertexWeights::default();
    for (&index, pit) in &model.pit {
        let wp = match mode {
            WeightMode::PitOnly | WeightMode::Dual => pit_weight(pit),
            WeightMode::Conventional => conventional_weight(pit, model.ug.get(&index), params),
        };
        weights.wp.insert(index, wp);
    }
    match mode {
        WeightMode::Dual => {
            for (&index, ug) in &model.ug {
                weights.wu.insert(index, ug_opportunity_weight(ug, params));
            }
        }
        WeightMode::Conventional => {
            // a stope under an air cell still charges its opportunity cost
            // to the (zero-value) pit twin
            for (&index, ug) in &model.ug {
                if !model.pit.contains_key(&index) {
                    weights.wp.insert(index, ug_opportunity_weight(ug, params));
                }
            }
        }
        WeightMode::PitOnly => {}
    }
    weights
}
