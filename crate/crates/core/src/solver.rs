//! Exact maximum-closure optimization.
//!
//! A closure of a weighted digraph is a vertex set with no arc leaving it;
//! the solver finds the closure of maximum total weight. The reduction is
//! the classical one: source arcs carry positive weights, sink arcs carry
//! the magnitudes of negative weights, precedence arcs get a capacity no
//! minimum cut can afford to sever, and the min cut splits the vertices into
//! the optimal closure and the rest.
//!
//! Optimal closures are closed under union and intersection, so a unique
//! *maximal* optimum exists. [`solve_max_closure`] always returns it: the
//! vertices with no residual path to the sink. That canonical answer is what
//! lets zero-value blocks ride along in the result deterministically.

mod flow;

use crate::block_model::{BlockIndex, BlockModel, GridSpec};
use crate::economics::VertexWeights;
use crate::error::{Error, Result};
use crate::money::Money;
use crate::precedence::ArcSet;

use flow::{EdgeSpec, FlowNetwork};

/// A vertex-weighted digraph posed as a closure problem. Vertex ids are
/// dense; parallel arcs are tolerated and mean nothing extra.
#[derive(Debug, Clone, Default)]
pub struct ClosureProblem {
    pub weights: Vec<Money>,
    pub arcs: Vec<(u32, u32)>,
}

impl ClosureProblem {
    pub fn new(weights: Vec<Money>, arcs: Vec<(u32, u32)>) -> ClosureProblem {
        ClosureProblem { weights, arcs }
    }

    pub fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    /// Sum of positive vertex weights, an upper bound on any objective.
    pub fn positive_weight_sum(&self) -> Money {
        self.weights.iter().filter(|w| w.is_positive()).copied().sum()
    }
}

/// A closed vertex set and its total weight. The empty set is always valid,
/// so the objective is never negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureSolution {
    /// Member vertex ids, ascending.
    pub members: Vec<u32>,
    pub objective: Money,
}

impl ClosureSolution {
    pub fn member_flags(&self, n: usize) -> Vec<bool> {
        let mut flags = vec![false; n];
        for &v in &self.members {
            flags[v as usize] = true;
        }
        flags
    }

    /// True when no arc leaves the member set.
    pub fn is_closed(&self, problem: &ClosureProblem) -> bool {
        let flags = self.member_flags(problem.vertex_count());
        problem
            .arcs
            .iter()
            .all(|&(u, v)| !flags[u as usize] || flags[v as usize])
    }
}

/// Solve exactly, returning the unique maximum-cardinality optimal closure.
pub fn solve_max_closure(problem: &ClosureProblem) -> ClosureSolution {
    let n = problem.vertex_count();
    if n == 0 {
        return ClosureSolution {
            members: Vec::new(),
            objective: Money::ZERO,
        };
    }
    for &(u, v) in &problem.arcs {
        assert!(
            (u as usize) < n && (v as usize) < n,
            "arc ({u}, {v}) out of range for {n} vertices"
        );
    }

    let source = n as u32;
    let sink = n as u32 + 1;
    // finite stand-in for an uncuttable capacity
    let infinite = problem.positive_weight_sum().cents() + 1;

    let mut edges = Vec::with_capacity(problem.arcs.len() + n);
    for (v, w) in problem.weights.iter().enumerate() {
        let cents = w.cents();
        if cents > 0 {
            edges.push(EdgeSpec {
                from: source,
                to: v as u32,
                cap: cents,
            });
        } else if cents < 0 {
            edges.push(EdgeSpec {
                from: v as u32,
                to: sink,
                cap: -cents,
            });
        }
    }
    for &(u, v) in &problem.arcs {
        if u != v {
            edges.push(EdgeSpec {
                from: u,
                to: v,
                cap: infinite,
            });
        }
    }

    let mut network = FlowNetwork::build(n + 2, &edges);
    let flow = network.max_flow(source as usize, sink as usize);
    let reaches_sink = network.residual_reaches_sink(sink as usize);

    let members: Vec<u32> = (0..n as u32).filter(|&v| !reaches_sink[v as usize]).collect();
    let objective: Money = members.iter().map(|&v| problem.weights[v as usize]).sum();
    debug_assert_eq!(
        objective.cents(),
        problem.positive_weight_sum().cents() - flow,
        "objective must equal positive weight minus cut"
    );

    ClosureSolution { members, objective }
}

/// Exhaustive oracle for small instances: every subset is tested for
/// closedness and the best one wins, ties broken toward more vertices and
/// then toward the subset that enumerates first. Independent of the flow
/// path on purpose.
pub fn brute_force_max_closure(problem: &ClosureProblem) -> Result<ClosureSolution> {
    let n = problem.vertex_count();
    if n > 24 {
        return Err(Error::BruteForceTooLarge { n });
    }
    let mut successors = vec![0u32; n];
    for &(u, v) in &problem.arcs {
        successors[u as usize] |= 1 << v;
    }
    let mut best_mask = 0u32;
    let mut best_objective = 0i64;
    for mask in 0u32..(1u32 << n) {
        let mut closed = true;
        let mut objective = 0i64;
        for (v, &succ) in successors.iter().enumerate() {
            if mask & (1 << v) != 0 {
                if succ & !mask != 0 {
                    closed = false;
                    break;
                }
                objective += problem.weights[v].cents();
            }
        }
        if !closed {
            continue;
        }
        if objective > best_objective
            || (objective == best_objective && mask.count_ones() > best_mask.count_ones())
        {
            best_objective = objective;
            best_mask = mask;
        }
    }
    let members: Vec<u32> = (0..n as u32).filter(|&v| best_mask & (1 << v) != 0).collect();
    Ok(ClosureSolution {
        members,
        objective: Money::from_cents(best_objective),
    })
}

/// Which block a dense vertex id stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappedVertex {
    Pit(BlockIndex),
    Underground(BlockIndex),
}

/// The id scheme of an assembled problem: every grid cell is a pit vertex
/// in (k, j, i) order, then every underground block in (k, j, i) order.
#[derive(Debug, Clone)]
pub struct VertexMap {
    grid: GridSpec,
    ug_blocks: Vec<BlockIndex>,
}

impl VertexMap {
    pub fn pit_vertex_count(&self) -> usize {
        self.grid.cell_count()
    }

    pub fn vertex_count(&self) -> usize {
        self.pit_vertex_count() + self.ug_blocks.len()
    }

    pub fn pit_id(&self, block: BlockIndex) -> Option<u32> {
        if !self.grid.contains(block) {
            return None;
        }
        Some((block.k * self.grid.ny + block.j) * self.grid.nx + block.i)
    }

    pub fn ug_id(&self, block: BlockIndex) -> Option<u32> {
        self.ug_blocks
            .binary_search_by_key(&block.level_major(), |b| b.level_major())
            .ok()
            .map(|pos| (self.pit_vertex_count() + pos) as u32)
    }

    pub fn vertex(&self, id: u32) -> MappedVertex {
        let id = id as usize;
        let n_pit = self.pit_vertex_count();
        if id < n_pit {
            let nx = self.grid.nx as usize;
            let ny = self.grid.ny as usize;
            MappedVertex::Pit(BlockIndex {
                i: (id % nx) as u32,
                j: ((id / nx) % ny) as u32,
                k: (id / (nx * ny)) as u32,
            })
        } else {
            MappedVertex::Underground(self.ug_blocks[id - n_pit])
        }
    }
}

/// Translate weights and arc families into a dense closure problem.
///
/// Pit cells missing a weight are air and weigh zero. The underground vertex
/// layer exists only when the mode produced underground weights or arcs.
/// Duplicate arcs are removed here so the builders don't have to coordinate.
pub fn assemble_problem(
    weights: &VertexWeights,
    arcs: &ArcSet,
    model: &BlockModel,
) -> Result<(ClosureProblem, VertexMap)> {
    let with_ug = !(weights.wu.is_empty() && arcs.c_arcs.is_empty() && arcs.d_arcs.is_empty());
    let map = VertexMap {
        grid: model.grid,
        ug_blocks: if with_ug {
            model.ug_blocks_level_major()
        } else {
            Vec::new()
        },
    };

    let mut dense_weights = vec![Money::ZERO; map.vertex_count()];
    for (&block, &w) in &weights.wp {
        let id = map.pit_id(block).ok_or(Error::OutOfRange { index: block })?;
        dense_weights[id as usize] = w;
    }
    for (&block, &w) in &weights.wu {
        let id = map.ug_id(block).ok_or(Error::DanglingArc { index: block })?;
        dense_weights[id as usize] = w;
    }

    let mut dense_arcs: Vec<(u32, u32)> =
        Vec::with_capacity(arcs.b_arcs.len() + arcs.c_arcs.len() + arcs.d_arcs.len());
    for &(from, to) in &arcs.b_arcs {
        let f = map.pit_id(from).ok_or(Error::DanglingArc { index: from })?;
        let t = map.pit_id(to).ok_or(Error::DanglingArc { index: to })?;
        dense_arcs.push((f, t));
    }
    for &(from, to) in &arcs.c_arcs {
        let f = map.pit_id(from).ok_or(Error::DanglingArc { index: from })?;
        let t = map.ug_id(to).ok_or(Error::DanglingArc { index: to })?;
        dense_arcs.push((f, t));
    }
    for &(from, to) in &arcs.d_arcs {
        let f = map.ug_id(from).ok_or(Error::DanglingArc { index: from })?;
        let t = map.ug_id(to).ok_or(Error::DanglingArc { index: to })?;
        dense_arcs.push((f, t));
    }
    dense_arcs.sort_unstable();
    dense_arcs.dedup();

    Ok((ClosureProblem::new(dense_weights, dense_arcs), map))
}
