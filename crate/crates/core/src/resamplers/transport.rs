//! Exact discrete optimal transport by the transportation simplex.
//!
//! The problem is `min Σ T_ij ‖y_i − y_j‖²` over `M × M` plans with row sums
//! `w̄_i` and column sums `1/M`. Internally everything is scaled by `M`
//! (supplies `M w̄_i`, demands 1) so that flows are of order one.
//!
//! The basis is a spanning tree of `2M − 1` cells, started from the
//! northwest corner in index order. Entering cells are priced with the most
//! negative reduced cost within a cyclic block of rows (partial pricing);
//! after a long run of degenerate pivots the solver switches to Bland's
//! lowest-index rule for both entering and leaving cells. Duals are updated
//! incrementally on the subtree that moves and recomputed periodically.
//! Supplies are perturbed by `ε` (with the balancing `Mε` put on the last
//! demand) so that no basic flow is ever exactly zero in exact arithmetic; the
//! final flows are recomputed on the optimal tree with the unperturbed
//! marginals.

use crate::{Error, Points, Result};

const PERTURBATION: f64 = 1e-12;
const DEGENERATE_FLOW: f64 = 1e-15;

/// An `M × M` transport plan stored as its nonzero entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingPlan {
    size: usize,
    /// `(i, j, T_ij)` with `T_ij > 0`, sorted by `(i, j)`.
    entries: Vec<(usize, usize, f64)>,
    row_marginals: Vec<f64>,
    cost: f64,
}

impl CouplingPlan {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn row_marginals(&self) -> &[f64] {
        &self.row_marginals
    }

    /// `Σ T_ij ‖y_i − y_j‖²`.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Row-major dense copy.
    pub fn dense(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.size * self.size];
        for &(i, j, v) in &self.entries {
            t[i * self.size + j] = v;
        }
        t
    }

    /// `x_j = M Σ_i T_ij y_i`.
    pub fn transform(&self, points: &Points) -> Points {
        let m = self.size as f64;
        let mut out = Points::from_flat(points.dim(), vec![0.0; points.as_flat().len()]);
        for &(i, j, v) in &self.entries {
            let src = points.row(i).to_vec();
            for (o, s) in out.row_mut(j).iter_mut().zip(src) {
                *o += m * v * s;
            }
        }
        out
    }
}

pub(crate) fn validate_probabilities(weights: &[f64], points: &Points) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::param("weights", "empty ensemble"));
    }
    if weights.len() != points.len() {
        return Err(Error::param(
            "weights",
            format!("{} weights for {} points", weights.len(), points.len()),
        ));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::param("weights", "must be finite and >= 0"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::param(
            "weights",
            format!("must sum to 1, sum is {total}"),
        ));
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Node {
    Row(usize),
    Col(usize),
}

struct Tree {
    m: usize,
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
    // Search scratch, reused across pivots. Nodes are rows `0..m` and
    // columns `m..2m`; a node is visited when `mark == stamp`.
    stack: Vec<usize>,
    parent: Vec<usize>,
    mark: Vec<u32>,
    stamp: u32,
}

impl Tree {
    fn northwest(supply: &[f64], demand: &[f64]) -> Self {
        let m = supply.len();
        let mut tree = Tree {
            m,
            cells: Vec::with_capacity(2 * m - 1),
            flow: Vec::with_capacity(2 * m - 1),
            row_adj: vec![Vec::new(); m],
            col_adj: vec![Vec::new(); m],
            stack: Vec::with_capacity(2 * m),
            parent: vec![usize::MAX; 2 * m],
            mark: vec![0; 2 * m],
            stamp: 0,
        };
        let (mut a, mut b) = (supply.to_vec(), demand.to_vec());
        let (mut i, mut j) = (0, 0);
        loop {
            let x = a[i].min(b[j]);
            tree.add(i, j, x);
            a[i] -= x;
            b[j] -= x;
            if i == m - 1 && j == m - 1 {
                break;
            }
            // Exactly one index advances per cell, so the staircase has
            // 2M − 1 cells even when a step is degenerate.
            if j == m - 1 || (i < m - 1 && a[i] <= b[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        tree
    }

    fn add(&mut self, i: usize, j: usize, x: f64) {
        let id = self.cells.len();
        self.cells.push((i, j));
        self.flow.push(x);
        self.row_adj[i].push(id);
        self.col_adj[j].push(id);
    }

    fn detach(&mut self, id: usize) {
        let (i, j) = self.cells[id];
        let pos = self.row_adj[i]
            .iter()
            .position(|c| *c == id)
            .expect("cell in row list");
        self.row_adj[i].swap_remove(pos);
        let pos = self.col_adj[j]
            .iter()
            .position(|c| *c == id)
            .expect("cell in column list");
        self.col_adj[j].swap_remove(pos);
    }

    fn attach(&mut self, id: usize, i: usize, j: usize, x: f64) {
        self.cells[id] = (i, j);
        self.flow[id] = x;
        self.row_adj[i].push(id);
        self.col_adj[j].push(id);
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.fill(0);
            self.stamp = 1;
        }
        self.stamp
    }

    /// Neighbor of `node` across cell `id`.
    fn across(&self, node: usize, id: usize) -> usize {
        let (i, j) = self.cells[id];
        if node < self.m {
            self.m + j
        } else {
            i
        }
    }

    fn adjacent(&self, node: usize) -> &[usize] {
        if node < self.m {
            &self.row_adj[node]
        } else {
            &self.col_adj[node - self.m]
        }
    }

    /// Adds `delta` to the column duals and subtracts it from the row duals
    /// of the component containing `start`.
    fn shift_component(&mut self, start: usize, delta: f64, u: &mut [f64], v: &mut [f64]) {
        let stamp = self.next_stamp();
        let m = self.m;
        let mut stack = std::mem::take(&mut self.stack);
        stack.clear();
        stack.push(start);
        self.mark[start] = stamp;
        while let Some(node) = stack.pop() {
            if node < m {
                u[node] -= delta;
            } else {
                v[node - m] += delta;
            }
            for k in 0..self.adjacent(node).len() {
                let next = self.across(node, self.adjacent(node)[k]);
                if self.mark[next] != stamp {
                    self.mark[next] = stamp;
                    stack.push(next);
                }
            }
        }
        self.stack = stack;
    }

    fn duals(&self, cost: &[f64], u: &mut [f64], v: &mut [f64]) {
        let m = self.m;
        u.fill(f64::NAN);
        v.fill(f64::NAN);
        u[0] = 0.0;
        let mut stack = vec![Node::Row(0)];
        while let Some(node) = stack.pop() {
            match node {
                Node::Row(i) => {
                    for &id in &self.row_adj[i] {
                        let j = self.cells[id].1;
                        if v[j].is_nan() {
                            v[j] = cost[i * m + j] - u[i];
                            stack.push(Node::Col(j));
                        }
                    }
                }
                Node::Col(j) => {
                    for &id in &self.col_adj[j] {
                        let i = self.cells[id].0;
                        if u[i].is_nan() {
                            u[i] = cost[i * m + j] - v[j];
                            stack.push(Node::Row(i));
                        }
                    }
                }
            }
        }
    }

    /// Cells on the tree path from row `p` to column `q`, in order.
    fn path(&mut self, p: usize, q: usize, path: &mut Vec<usize>) {
        let m = self.m;
        let stamp = self.next_stamp();
        let goal = m + q;
        let mut stack = std::mem::take(&mut self.stack);
        stack.clear();
        stack.push(p);
        self.mark[p] = stamp;
        'search: while let Some(node) = stack.pop() {
            for k in 0..self.adjacent(node).len() {
                let id = self.adjacent(node)[k];
                let next = self.across(node, id);
                if self.mark[next] != stamp {
                    self.mark[next] = stamp;
                    self.parent[next] = id;
                    if next == goal {
                        break 'search;
                    }
                    stack.push(next);
                }
            }
        }
        self.stack = stack;
        path.clear();
        let mut node = goal;
        while node != p {
            let id = self.parent[node];
            path.push(id);
            node = self.across(node, id);
        }
        path.reverse();
    }

    /// Flows of the current tree for the given marginals, by peeling leaves.
    fn flows_for(&self, supply: &[f64], demand: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut rest: Vec<f64> = supply.iter().chain(demand).copied().collect();
        let mut degree: Vec<usize> = self
            .row_adj
            .iter()
            .chain(&self.col_adj)
            .map(Vec::len)
            .collect();
        let mut done = vec![false; self.cells.len()];
        let mut flow = vec![0.0; self.cells.len()];
        let mut leaves: Vec<usize> = (0..2 * m).rev().filter(|n| degree[*n] == 1).collect();
        while let Some(node) = leaves.pop() {
            if degree[node] != 1 {
                continue;
            }
            let adj = if node < m {
                &self.row_adj[node]
            } else {
                &self.col_adj[node - m]
            };
            let id = *adj
                .iter()
                .find(|id| !done[**id])
                .expect("leaf has one live cell");
            let (i, j) = self.cells[id];
            let other = if node < m { m + j } else { i };
            let x = rest[node];
            flow[id] = x;
            done[id] = true;
            rest[node] = 0.0;
            rest[other] -= x;
            degree[node] -= 1;
            degree[other] -= 1;
            if degree[other] == 1 {
                leaves.push(other);
            }
        }
        flow
    }
}

/// Lowest-index cell with a negative reduced cost (Bland's rule).
fn first_negative(cost: &[f64], u: &[f64], v: &[f64], tolerance: f64) -> Option<(usize, usize)> {
    let m = u.len();
    for i in 0..m {
        let row = &cost[i * m..(i + 1) * m];
        for j in 0..m {
            if row[j] - u[i] - v[j] < -tolerance {
                return Some((i, j));
            }
        }
    }
    None
}

/// Partial Dantzig pricing: scans rows cyclically from `start` in blocks of
/// `block` rows and returns the most negative reduced cost of the first block
/// that has one, plus the row to resume from. `None` after a full sweep
/// without candidates means the basis is optimal.
fn partial_price(
    cost: &[f64],
    u: &[f64],
    v: &[f64],
    tolerance: f64,
    start: usize,
    block: usize,
) -> (Option<(usize, usize)>, usize) {
    let m = u.len();
    let mut best = -tolerance;
    let mut found = None;
    for step in 0..m {
        let i = (start + step) % m;
        let row = &cost[i * m..(i + 1) * m];
        let ui = u[i];
        for j in 0..m {
            let r = row[j] - ui - v[j];
            if r < best {
                best = r;
                found = Some((i, j));
            }
        }
        if found.is_some() && (step + 1) % block == 0 {
            return (found, (i + 1) % m);
        }
    }
    (found, start)
}

/// Optimal plan for marginals `weights` (rows) and uniform `1/M` (columns)
/// under squared Euclidean cost between `points`.
pub fn solve_transport(weights: &[f64], points: &Points) -> Result<CouplingPlan> {
    validate_probabilities(weights, points)?;
    let m = weights.len();
    let scale = m as f64;
    let cost: Vec<f64> = (0..m * m)
        .map(|k| points.squared_distance(k / m, k % m))
        .collect();
    let supply: Vec<f64> = weights.iter().map(|w| w * scale).collect();
    let demand = vec![1.0; m];
    if m == 1 {
        return Ok(CouplingPlan {
            size: 1,
            entries: vec![(0, 0, 1.0)],
            row_marginals: weights.to_vec(),
            cost: 0.0,
        });
    }

    let perturbed_supply: Vec<f64> = supply.iter().map(|s| s + PERTURBATION).collect();
    let mut perturbed_demand = demand.clone();
    perturbed_demand[m - 1] += scale * PERTURBATION;
    let mut tree = Tree::northwest(&perturbed_supply, &perturbed_demand);

    let cost_max = cost.iter().copied().fold(0.0, f64::max);
    let tolerance = 1e-11 * cost_max;
    let pivot_cap = 20 * m * m + 1000;
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; m];
    let mut path = Vec::with_capacity(2 * m);
    tree.duals(&cost, &mut u, &mut v);
    let mut fresh_duals = true;
    let mut bland = false;
    let mut degenerate_run = 0;
    let mut pivots = 0;
    let block = (m / 32).max(1);
    let mut cursor = 0;
    loop {
        let entering = if bland {
            first_negative(&cost, &u, &v, tolerance)
        } else {
            let (found, next) = partial_price(&cost, &u, &v, tolerance, cursor, block);
            cursor = next;
            found
        };
        let Some((p, q)) = entering else {
            if fresh_duals {
                break;
            }
            // Confirm optimality against duals without accumulated drift.
            tree.duals(&cost, &mut u, &mut v);
            fresh_duals = true;
            continue;
        };
        fresh_duals = false;
        pivots += 1;
        if pivots > pivot_cap {
            return Err(Error::Resample(format!(
                "transport simplex exceeded {pivot_cap} pivots at M = {m}"
            )));
        }
        tree.path(p, q, &mut path);
        let mut leave = path[0];
        for &id in path.iter().step_by(2) {
            let (f, fl) = (tree.flow[id], tree.flow[leave]);
            let key = |c: usize| tree.cells[c].0 * m + tree.cells[c].1;
            if f < fl || (f == fl && key(id) < key(leave)) {
                leave = id;
            }
        }
        let theta = tree.flow[leave];
        for (k, &id) in path.iter().enumerate() {
            if k % 2 == 0 {
                tree.flow[id] -= theta;
            } else {
                tree.flow[id] += theta;
            }
        }
        // Removing the leaving cell splits the tree with p and q on
        // different sides; shifting q's side makes the entering cell tight.
        tree.detach(leave);
        let reduced = cost[p * m + q] - u[p] - v[q];
        tree.shift_component(m + q, reduced, &mut u, &mut v);
        tree.attach(leave, p, q, theta);
        if pivots % m == 0 {
            tree.duals(&cost, &mut u, &mut v);
        }
        if theta <= DEGENERATE_FLOW {
            degenerate_run += 1;
            if degenerate_run > 2 * m {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
    }

    let flows = tree.flows_for(&supply, &demand);
    let mut entries: Vec<(usize, usize, f64)> = tree
        .cells
        .iter()
        .zip(flows)
        .filter(|(_, f)| *f > 0.0)
        .map(|(&(i, j), f)| (i, j, f / scale))
        .collect();
    entries.sort_by_key(|e| (e.0, e.1));
    let total_cost = entries.iter().map(|&(i, j, t)| t * cost[i * m + j]).sum();
    Ok(CouplingPlan {
        size: m,
        entries,
        row_marginals: weights.to_vec(),
        cost: total_cost,
    })
}
