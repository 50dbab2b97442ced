//! Integer max-flow (Dinic) with access to the residual network.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
struct Arc {
    to: usize,
    cap: i64,
    initial: i64,
}

/// Directed network; arc `2k` is the `k`-th added arc, `2k + 1` its reverse.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    source: usize,
    sink: usize,
}

impl FlowNetwork {
    pub fn new(nodes: usize, source: usize, sink: usize) -> Self {
        assert!(source < nodes && sink < nodes && source != sink);
        Self {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
            source,
            sink,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    /// Adds `from -> to` with capacity `cap >= 0`; returns the arc id.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: i64) -> usize {
        assert!(cap >= 0, "negative capacity");
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, initial: cap });
        self.arcs.push(Arc { to: from, cap: 0, initial: 0 });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// `(from, to, capacity, flow)` for every added arc.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, i64, i64)> + '_ {
        self.arcs.chunks(2).map(|pair| {
            let (fwd, rev) = (pair[0], pair[1]);
            (rev.to, fwd.to, fwd.initial, fwd.initial - fwd.cap)
        })
    }

    /// Net outflow minus inflow at `node`.
    pub fn excess(&self, node: usize) -> i64 {
        self.arcs()
            .map(|(u, v, _, f)| {
                if u == node {
                    -f
                } else if v == node {
                    f
                } else {
                    0
                }
            })
            .sum()
    }

    fn levels(&self) -> Vec<i32> {
        let mut level = vec![-1; self.adj.len()];
        let mut queue = VecDeque::new();
        level[self.source] = 0;
        queue.push_back(self.source);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let arc = self.arcs[a];
                if arc.cap > 0 && level[arc.to] < 0 {
                    level[arc.to] = level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        level
    }

    /// Runs Dinic's algorithm to completion and returns the flow value.
    pub fn max_flow(&mut self) -> i64 {
        let mut total = 0;
        loop {
            let mut level = self.levels();
            if level[self.sink] < 0 {
                return total;
            }
            let mut next = vec![0usize; self.adj.len()];
            let mut path: Vec<usize> = Vec::new();
            let mut u = self.source;
            loop {
                if u == self.sink {
                    let push = path.iter().map(|&a| self.arcs[a].cap).min().unwrap();
                    for &a in &path {
                        self.arcs[a].cap -= push;
                        self.arcs[a ^ 1].cap += push;
                    }
                    total += push;
                    // Retreat to the tail of the first saturated arc.
                    let cut = path.iter().position(|&a| self.arcs[a].cap == 0).unwrap();
                    path.truncate(cut);
                    u = path.last().map_or(self.source, |&a| self.arcs[a].to);
                    continue;
                }
                let mut advanced = false;
                while next[u] < self.adj[u].len() {
                    let a = self.adj[u][next[u]];
                    let arc = self.arcs[a];
                    if arc.cap > 0 && level[arc.to] == level[u] + 1 {
                        path.push(a);
                        u = arc.to;
                        advanced = true;
                        break;
                    }
                    next[u] += 1;
                }
                if advanced {
                    continue;
                }
                level[u] = -1;
                match path.pop() {
                    None => break,
                    Some(a) => {
                        u = self.arcs[a ^ 1].to;
                        next[u] += 1;
                    }
                }
            }
        }
    }

    /// Nodes reachable from the source in the residual network.
    pub fn source_side(&self) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut stack = vec![self.source];
        seen[self.source] = true;
        while let Some(u) = stack.pop() {
            for &a in &self.adj[u] {
                let arc = self.arcs[a];
                if arc.cap > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    stack.push(arc.to);
                }
            }
        }
        seen
    }
}
