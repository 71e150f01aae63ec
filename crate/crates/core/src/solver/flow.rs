//! Highest-label push-relabel max-flow, phase one only.
//!
//! Closure extraction needs the min cut, not a feasible flow, so the engine
//! stops once the maximum preflow value has reached the sink: excess stranded
//! at height >= N never gets returned to the source. The cut read off the
//! residual graph at that point is the same cut any maximum flow would give.
//!
//! Heights are exact distances-to-sink after every global relabel, the gap
//! heuristic freezes nodes that provably lost their path to the sink, and
//! both together keep the frontier tight on the shallow, DAG-like networks
//! closure problems produce.

use std::collections::VecDeque;

/// Flow network in compressed sparse row form. Slot `e` and `rev[e]` are the
/// two directions of one edge; pushing on one adds residual to the other.
pub(crate) struct FlowNetwork {
    start: Vec<u32>,
    to: Vec<u32>,
    rev: Vec<u32>,
    cap: Vec<i64>,
    node_count: usize,
}

pub(crate) struct EdgeSpec {
    pub from: u32,
    pub to: u32,
    pub cap: i64,
}

/// Mutable labeling state of one max-flow run.
struct Labels {
    source: usize,
    sink: usize,
    height: Vec<u32>,
    excess: Vec<i64>,
    /// Current-arc pointer per node.
    cur: Vec<u32>,
    /// Nodes per height, for the gap heuristic.
    count: Vec<u32>,
    /// Active nodes bucketed by height, scanned top down.
    buckets: Vec<Vec<u32>>,
    queued: Vec<bool>,
    highest: usize,
    /// Edge scans since the last global relabel.
    work: u64,
}

impl Labels {
    fn activate(&mut self, v: usize, ceiling: u32) {
        if v != self.source
            && v != self.sink
            && !self.queued[v]
            && self.excess[v] > 0
            && self.height[v] < ceiling
        {
            let h = self.height[v] as usize;
            self.buckets[h].push(v as u32);
            self.queued[v] = true;
            self.highest = self.highest.max(h);
        }
    }
}

impl FlowNetwork {
    pub fn build(node_count: usize, edges: &[EdgeSpec]) -> FlowNetwork {
        let mut degree = vec![0u32; node_count + 1];
        for e in edges {
            degree[e.from as usize + 1] += 1;
            degree[e.to as usize + 1] += 1;
        }
        let mut start = degree;
        for idx in 1..start.len() {
            start[idx] += start[idx - 1];
        }
        let slots = start[node_count] as usize;
        let mut cursor: Vec<u32> = start[..node_count].to_vec();
        let mut to = vec![0u32; slots];
        let mut rev = vec![0u32; slots];
        let mut cap = vec![0i64; slots];
        for e in edges {
            let fwd = cursor[e.from as usize];
            cursor[e.from as usize] += 1;
            let bwd = cursor[e.to as usize];
            cursor[e.to as usize] += 1;
            to[fwd as usize] = e.to;
            cap[fwd as usize] = e.cap;
            rev[fwd as usize] = bwd;
            to[bwd as usize] = e.from;
            cap[bwd as usize] = 0;
            rev[bwd as usize] = fwd;
        }
        FlowNetwork {
            start,
            to,
            rev,
            cap,
            node_count,
        }
    }

    fn slots(&self, u: usize) -> std::ops::Range<usize> {
        self.start[u] as usize..self.start[u + 1] as usize
    }

    /// Reset heights to exact residual distances-to-sink (BFS), re-bucket
    /// every active node. Unreached nodes, and always the source, sit at the
    /// ceiling and are frozen.
    fn global_relabel(&self, labels: &mut Labels, source: usize, sink: usize) {
        let ceiling = self.node_count as u32;
        labels.height.fill(ceiling);
        labels.count.fill(0);
        for bucket in labels.buckets.iter_mut() {
            bucket.clear();
        }
        labels.queued.fill(false);
        labels.highest = 0;
        labels.work = 0;

        labels.height[sink] = 0;
        let mut queue = VecDeque::from([sink]);
        while let Some(u) = queue.pop_front() {
            for e in self.slots(u) {
                let v = self.to[e] as usize;
                // residual arc v -> u
                if self.cap[self.rev[e] as usize] > 0 && labels.height[v] == ceiling && v != source
                {
                    labels.height[v] = labels.height[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        labels.height[source] = ceiling;
        for v in 0..self.node_count {
            labels.count[labels.height[v].min(ceiling) as usize] += 1;
            labels.cur[v] = self.start[v];
            labels.activate(v, ceiling);
        }
    }

    /// Maximum preflow from `source` to `sink`; returns the flow value.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> i64 {
        let n = self.node_count;
        let ceiling = n as u32; // height n means "cannot reach the sink"
        let mut labels = Labels {
            source,
            sink,
            height: vec![ceiling; n],
            excess: vec![0i64; n],
            cur: self.start[..n].to_vec(),
            count: vec![0u32; n + 1],
            buckets: vec![Vec::new(); n + 1],
            queued: vec![false; n],
            highest: 0,
            work: 0,
        };
        let relabel_budget = 4 * (self.to.len().max(n) as u64);

        self.global_relabel(&mut labels, source, sink);

        // saturate every source arc
        for e in self.slots(source) {
            let delta = self.cap[e];
            if delta <= 0 {
                continue;
            }
            let v = self.to[e] as usize;
            self.cap[e] = 0;
            self.cap[self.rev[e] as usize] += delta;
            labels.excess[v] += delta;
            labels.activate(v, ceiling);
        }

        loop {
            while labels.highest > 0 && labels.buckets[labels.highest].is_empty() {
                labels.highest -= 1;
            }
            let u = match labels.buckets[labels.highest].pop() {
                Some(u) => u as usize,
                None => break,
            };
            labels.queued[u] = false;
            if labels.height[u] >= ceiling {
                continue; // lifted by a gap while queued
            }

            self.discharge(&mut labels, u, ceiling);
            labels.activate(u, ceiling);

            if labels.work > relabel_budget {
                self.global_relabel(&mut labels, source, sink);
            }
        }

        labels.excess[sink]
    }

    /// Push out of `u` until its excess is gone or its height leaves the
    /// active range.
    fn discharge(&mut self, labels: &mut Labels, u: usize, ceiling: u32) {
        while labels.excess[u] > 0 {
            if labels.cur[u] == self.start[u + 1] {
                if !self.relabel(labels, u, ceiling) {
                    return;
                }
            } else {
                let e = labels.cur[u] as usize;
                let v = self.to[e] as usize;
                if self.cap[e] > 0 && labels.height[u] == labels.height[v] + 1 {
                    let delta = labels.excess[u].min(self.cap[e]);
                    self.cap[e] -= delta;
                    self.cap[self.rev[e] as usize] += delta;
                    labels.excess[u] -= delta;
                    labels.excess[v] += delta;
                    labels.activate(v, ceiling);
                } else {
                    labels.cur[u] += 1;
                    labels.work += 1;
                }
            }
        }
    }

    /// Lift `u` to one above its lowest residual neighbor. Returns false when
    /// `u` froze, either directly or by emptying its old height (the gap
    /// heuristic then freezes everything above that height too).
    fn relabel(&self, labels: &mut Labels, u: usize, ceiling: u32) -> bool {
        let old = labels.height[u];
        labels.work += (self.start[u + 1] - self.start[u]) as u64;
        labels.count[old as usize] -= 1;

        if labels.count[old as usize] == 0 && old < ceiling {
            for v in 0..self.node_count {
                if labels.height[v] > old && labels.height[v] < ceiling {
                    labels.count[labels.height[v] as usize] -= 1;
                    labels.count[ceiling as usize] += 1;
                    labels.height[v] = ceiling;
                }
            }
            labels.height[u] = ceiling;
            labels.count[ceiling as usize] += 1;
            return false;
        }

        let mut best = ceiling;
        for e in self.slots(u) {
            if self.cap[e] > 0 {
                best = best.min(labels.height[self.to[e] as usize] + 1);
            }
        }
        labels.height[u] = best.min(ceiling);
        labels.count[labels.height[u] as usize] += 1;
        labels.cur[u] = self.start[u];
        labels.height[u] < ceiling
    }

    /// Nodes with a residual path to `sink`. Under a maximum preflow this is
    /// the minimal sink side over all minimum cuts, independent of which
    /// maximum flow was found.
    pub fn residual_reaches_sink(&self, sink: usize) -> Vec<bool> {
        let mut reached = vec![false; self.node_count];
        reached[sink] = true;
        let mut queue = VecDeque::from([sink]);
        while let Some(u) = queue.pop_front() {
            for e in self.slots(u) {
                let v = self.to[e] as usize;
                // residual arc v -> u
                if !reached[v] && self.cap[self.rev[e] as usize] > 0 {
                    reached[v] = true;
                    queue.push_back(v);
                }
            }
        }
        reached
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow_of(n: usize, edges: &[(u32, u32, i64)], s: usize, t: usize) -> i64 {
        let specs: Vec<EdgeSpec> = edges
            .iter()
            .map(|&(from, to, cap)| EdgeSpec { from, to, cap })
            .collect();
        FlowNetwork::build(n, &specs).max_flow(s, t)
    }

    #[test]
    fn single_edge() {
        assert_eq!(flow_of(2, &[(0, 1, 7)], 0, 1), 7);
    }

    #[test]
    fn two_disjoint_paths() {
        let edges = [(0, 1, 3), (1, 3, 3), (0, 2, 4), (2, 3, 2)];
        assert_eq!(flow_of(4, &edges, 0, 3), 5);
    }

    #[test]
    fn classic_diamond_with_cross_edge() {
        // arcs into the sink cap the flow at 4 + 9
        let edges = [
            (0, 1, 10),
            (0, 2, 10),
            (1, 2, 1),
            (1, 3, 4),
            (2, 3, 9),
        ];
        assert_eq!(flow_of(4, &edges, 0, 3), 13);
    }

    #[test]
    fn bottleneck_chain() {
        let edges = [(0, 1, 100), (1, 2, 1), (2, 3, 100)];
        assert_eq!(flow_of(4, &edges, 0, 3), 1);
    }

    #[test]
    fn disconnected_sink() {
        assert_eq!(flow_of(3, &[(0, 1, 5)], 0, 2), 0);
    }

    #[test]
    fn residual_cut_sides() {
        // s=0 -> 1 (cap 2) -> t=2 (cap 5): cut is the first edge, so node 1
        // still reaches the sink.
        let mut net = FlowNetwork::build(
            3,
            &[
                EdgeSpec { from: 0, to: 1, cap: 2 },
                EdgeSpec { from: 1, to: 2, cap: 5 },
            ],
        );
        assert_eq!(net.max_flow(0, 2), 2);
        let reached = net.residual_reaches_sink(2);
        assert!(!reached[0]);
        assert!(reached[1]);
        assert!(reached[2]);
    }
}
