//! Maximum flow on bipartite transport networks.
//!
//! The network is `source → row i (cap μᵢ) → col j (uncapacitated, only for
//! allowed cells) → sink (cap νⱼ)`. Its maximum flow is the largest mass a
//! subtransport plan can put on the allowed cells.

use std::collections::VecDeque;

const EPS: f64 = 1e-15;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: f64,
}

/// Dinic's algorithm over `f64` capacities; scratch state is per call.
struct Dinic {
    graph: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Self {
            graph: vec![Vec::new(); n],
            edges: Vec::new(),
            level: vec![-1; n],
            iter: vec![0; n],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64) -> usize {
        let id = self.edges.len();
        self.graph[from].push(id);
        self.edges.push(Edge { to, cap });
        self.graph[to].push(id + 1);
        self.edges.push(Edge { to: from, cap: 0.0 });
        id
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.graph[u] {
                let Edge { to, cap } = self.edges[e];
                if cap > EPS && self.level[to] < 0 {
                    self.level[to] = self.level[u] + 1;
                    queue.push_back(to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: f64) -> f64 {
        if u == t {
            return pushed;
        }
        while self.iter[u] < self.graph[u].len() {
            let e = self.graph[u][self.iter[u]];
            let Edge { to, cap } = self.edges[e];
            if cap > EPS && self.level[to] == self.level[u] + 1 {
                let got = self.dfs(to, t, pushed.min(cap));
                if got > EPS {
                    self.edges[e].cap -= got;
                    self.edges[e ^ 1].cap += got;
                    return got;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }

    fn run(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= EPS {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

#[derive(Clone, Debug)]
pub struct FlowResult {
    pub value: f64,
    /// Flow on each allowed cell, in input order.
    pub cell_flow: Vec<f64>,
}

/// Maximum mass a subtransport plan between `row_caps` and `col_caps` can
/// place on `cells`.
pub fn max_flow(row_caps: &[f64], col_caps: &[f64], cells: &[(usize, usize)]) -> FlowResult {
    let (m, n) = (row_caps.len(), col_caps.len());
    let source = m + n;
    let sink = source + 1;
    let mut dinic = Dinic::new(m + n + 2);
    for (i, &c) in row_caps.iter().enumerate() {
        dinic.add_edge(source, i, c);
    }
    for (j, &c) in col_caps.iter().enumerate() {
        dinic.add_edge(m + j, sink, c);
    }
    let ids: Vec<usize> = cells
        .iter()
        .map(|&(i, j)| dinic.add_edge(i, m + j, f64::INFINITY))
        .collect();
    let value = dinic.run(source, sink);
    let cell_flow = ids.iter().map(|&e| dinic.edges[e ^ 1].cap).collect();
    FlowResult { value, cell_flow }
}

/// Maximum mass on cells `|x − y| ≤ c` between sorted supports.
///
/// Each row's admissible columns form an interval whose endpoints are
/// non-decreasing in the row index; for such networks filling rows in order,
/// each into its leftmost open admissible column, is a maximum flow.
pub fn band_mass(xs: &[f64], ws: &[f64], ys: &[f64], vs: &[f64], c: f64) -> f64 {
    let mut rem = vs.to_vec();
    let mut ptr = 0;
    let mut total = 0.0;
    for (&x, &w) in xs.iter().zip(ws) {
        while ptr < ys.len() && (rem[ptr] <= 0.0 || (ys[ptr] < x && (x - ys[ptr]).abs() > c)) {
            ptr += 1;
        }
        let mut a = w;
        let mut j = ptr;
        while a > 0.0 && j < ys.len() && (ys[j] - x).abs() <= c {
            let q = a.min(rem[j]);
            a -= q;
            rem[j] -= q;
            total += q;
            if rem[j] <= 0.0 {
                j += 1;
            }
        }
    }
    total
}
