//! Pairwise discrete energies, TRW-S and an exhaustive oracle.

use crate::error::{Error, Result};

use super::labels::{LABEL_COUNT, PITCH_STEPS, PITCH_STEP_DEG, YAW_STEPS, YAW_STEP_DEG};

#[derive(Debug, Clone, PartialEq)]
pub enum Pairwise {
    /// Row-major `la × lb` table indexed by `(label_a, label_b)`.
    Dense(Vec<f64>),
    /// `weight · min(d, gamma)` over the pose grid, with d the circular-yaw L1 distance in degrees.
    TruncatedPose { weight: f64, gamma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub potential: Pairwise,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Crf {
    pub unaries: Vec<Vec<f64>>,
    pub edges: Vec<Edge>,
}

fn pose_distance(i: usize, j: usize) -> f64 {
    let (yi, pi) = (i % YAW_STEPS, i / YAW_STEPS);
    let (yj, pj) = (j % YAW_STEPS, j / YAW_STEPS);
    let dy = yi.abs_diff(yj);
    dy.min(YAW_STEPS - dy) as f64 * YAW_STEP_DEG + pi.abs_diff(pj) as f64 * PITCH_STEP_DEG
}

/// In-place 1-D L1 distance transform with step cost `c`.
fn distance_transform_1d(f: &mut [f64], c: f64, circular: bool) {
    let n = f.len();
    let rounds = if circular { 2 } else { 1 };
    for _ in 0..rounds {
        for i in 1..n {
            f[i] = f[i].min(f[i - 1] + c);
        }
        if circular {
            f[0] = f[0].min(f[n - 1] + c);
        }
    }
    for _ in 0..rounds {
        for i in (0..n - 1).rev() {
            f[i] = f[i].min(f[i + 1] + c);
        }
        if circular {
            f[n - 1] = f[n - 1].min(f[0] + c);
        }
    }
}

impl Edge {
    pub fn cost(&self, la: usize, lb: usize, nb: usize) -> f64 {
        match &self.potential {
            Pairwise::Dense(t) => t[la * nb + lb],
            Pairwise::TruncatedPose { weight, gamma } => weight * pose_distance(la, lb).min(*gamma),
        }
    }

    /// `out[x_b] = min over x_a of g[x_a] + θ(x_a, x_b)`; with `reverse` the
    /// roles of the endpoints swap.
    fn min_convolve(&self, g: &[f64], out: &mut [f64], reverse: bool) {
        match &self.potential {
            Pairwise::Dense(t) => {
                let (ng, no) = (g.len(), out.len());
                for (xo, o) in out.iter_mut().enumerate() {
                    *o = (0..ng)
                        .map(|xg| g[xg] + if reverse { t[xo * ng + xg] } else { t[xg * no + xo] })
                        .fold(f64::INFINITY, f64::min);
                }
            }
            Pairwise::TruncatedPose { weight, gamma } => {
                assert_eq!(g.len(), LABEL_COUNT);
                let floor = g.iter().copied().fold(f64::INFINITY, f64::min) + weight * gamma;
                out.copy_from_slice(g);
                for row in out.chunks_mut(YAW_STEPS) {
                    distance_transform_1d(row, weight * YAW_STEP_DEG, true);
                }
                let mut column = [0.0; PITCH_STEPS];
                for y in 0..YAW_STEPS {
                    for p in 0..PITCH_STEPS {
                        column[p] = out[p * YAW_STEPS + y];
                    }
                    distance_transform_1d(&mut column, weight * PITCH_STEP_DEG, false);
                    for p in 0..PITCH_STEPS {
                        out[p * YAW_STEPS + y] = column[p].min(floor);
                    }
                }
            }
        }
    }
}

impl Crf {
    pub fn label_count(&self, node: usize) -> usize {
        self.unaries[node].len()
    }

    pub fn energy(&self, labels: &[usize]) -> f64 {
        let u: f64 = labels.iter().enumerate().map(|(i, &l)| self.unaries[i][l]).sum();
        let b: f64 = self.edges.iter().map(|e| e.cost(labels[e.a], labels[e.b], self.label_count(e.b))).sum();
        u + b
    }

    pub fn validate(&self) -> Result<()> {
        for (i, u) in self.unaries.iter().enumerate() {
            if u.is_empty() || u.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("node {i} has an empty or non-finite unary table")));
            }
        }
        for e in &self.edges {
            if e.a == e.b || e.a >= self.unaries.len() || e.b >= self.unaries.len() {
                return Err(Error::Config(format!("invalid edge {}–{}", e.a, e.b)));
            }
            let ok = match &e.potential {
                Pairwise::Dense(t) => t.len() == self.label_count(e.a) * self.label_count(e.b),
                Pairwise::TruncatedPose { .. } => {
                    self.label_count(e.a) == LABEL_COUNT && self.label_count(e.b) == LABEL_COUNT
                }
            };
            if !ok {
                return Err(Error::Config(format!("edge {}–{} does not match the label spaces", e.a, e.b)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrwsResult {
    pub labels: Vec<usize>,
    pub energy: f64,
    /// Lower bound after each iteration.
    pub lower_bounds: Vec<f64>,
}

/// One oriented incidence of an edge at a node.
#[derive(Debug, Clone, Copy)]
struct Incidence {
    edge: usize,
    other: usize,
    /// true when this node is the edge's `a` endpoint
    is_a: bool,
}

/// Message storage: `to_b[e]` travels a→b (over b's labels), `to_a[e]` b→a.
struct Messages {
    to_b: Vec<Vec<f64>>,
    to_a: Vec<Vec<f64>>,
}

impl Messages {
    fn incoming(&self, inc: &Incidence) -> &[f64] {
        if inc.is_a {
            &self.to_a[inc.edge]
        } else {
            &self.to_b[inc.edge]
        }
    }
}

/// Monotonic chains covering every edge exactly once, as node sequences with the edges between them.
fn chain_cover(n: usize, edges: &[Edge]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, e) in edges.iter().enumerate() {
        let (lo, hi) = if e.a < e.b { (e.a, e.b) } else { (e.b, e.a) };
        out_edges[lo].push((hi, k));
    }
    for o in &mut out_edges {
        o.sort_unstable();
        o.reverse();
    }
    let mut chains = Vec::new();
    let mut covered = vec![false; n];
    for start in 0..n {
        while !out_edges[start].is_empty() {
            let mut nodes = vec![start];
            let mut path = Vec::new();
            let mut u = start;
            while let Some((v, k)) = out_edges[u].pop() {
                nodes.push(v);
                path.push(k);
                u = v;
            }
            for &v in &nodes {
                covered[v] = true;
            }
            chains.push((nodes, path));
        }
    }
    for v in 0..n {
        if !covered[v] {
            chains.push((vec![v], Vec::new()));
        }
    }
    chains
}

/// Sequential tree-reweighted message passing in node-index order.
pub fn trws_infer(crf: &Crf, iterations: usize) -> Result<TrwsResult> {
    crf.validate()?;
    let n = crf.unaries.len();
    if n == 0 {
        return Ok(TrwsResult { labels: vec![], energy: 0.0, lower_bounds: vec![0.0; iterations.max(1)] });
    }
    let mut incidences: Vec<Vec<Incidence>> = vec![Vec::new(); n];
    for (k, e) in crf.edges.iter().enumerate() {
        incidences[e.a].push(Incidence { edge: k, other: e.b, is_a: true });
        incidences[e.b].push(Incidence { edge: k, other: e.a, is_a: false });
    }
    let chains = chain_cover(n, &crf.edges);
    let mut n_chains = vec![0usize; n];
    for (nodes, _) in &chains {
        for &v in nodes {
            n_chains[v] += 1;
        }
    }
    let mut msg = Messages {
        to_b: crf.edges.iter().map(|e| vec![0.0; crf.label_count(e.b)]).collect(),
        to_a: crf.edges.iter().map(|e| vec![0.0; crf.label_count(e.a)]).collect(),
    };

    let belief = |msg: &Messages, s: usize| -> Vec<f64> {
        let mut b = crf.unaries[s].clone();
        for inc in &incidences[s] {
            for (x, m) in b.iter_mut().zip(msg.incoming(inc)) {
                *x += m;
            }
        }
        b
    };

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut bounds = Vec::with_capacity(iterations);
    let mut scratch = Vec::new();
    for _ in 0..iterations.max(1) {
        for forward in [true, false] {
            let order: Vec<usize> = if forward { (0..n).collect() } else { (0..n).rev().collect() };
            for &s in &order {
                let theta = belief(&msg, s);
                let gamma = 1.0 / n_chains[s] as f64;
                for inc in &incidences[s] {
                    if (inc.other > s) != forward {
                        continue;
                    }
                    scratch.clear();
                    scratch.extend(theta.iter().zip(msg.incoming(inc)).map(|(t, m)| gamma * t - m));
                    let e = &crf.edges[inc.edge];
                    let out = if inc.is_a { &mut msg.to_b[inc.edge] } else { &mut msg.to_a[inc.edge] };
                    e.min_convolve(&scratch, out, !inc.is_a);
                    let lo = out.iter().copied().fold(f64::INFINITY, f64::min);
                    out.iter_mut().for_each(|v| *v -= lo);
                }
            }
            if forward {
                let labels = decode(crf, &incidences, &msg);
                let energy = crf.energy(&labels);
                if best.as_ref().is_none_or(|(b, _)| energy < *b) {
                    best = Some((energy, labels));
                }
            }
        }
        bounds.push(lower_bound(crf, &chains, &n_chains, &msg, &belief));
    }
    let (energy, labels) = best.expect("at least one iteration");
    Ok(TrwsResult { labels, energy, lower_bounds: bounds })
}

/// Labels chosen node by node, conditioning on already fixed predecessors.
fn decode(crf: &Crf, incidences: &[Vec<Incidence>], msg: &Messages) -> Vec<usize> {
    let n = crf.unaries.len();
    let mut labels = vec![0usize; n];
    for s in 0..n {
        let mut cost = crf.unaries[s].clone();
        for inc in &incidences[s] {
            let e = &crf.edges[inc.edge];
            if inc.other < s {
                let lo = labels[inc.other];
                for (x, c) in cost.iter_mut().enumerate() {
                    *c += if inc.is_a {
                        e.cost(x, lo, crf.label_count(e.b))
                    } else {
                        e.cost(lo, x, crf.label_count(e.b))
                    };
                }
            } else {
                for (c, m) in cost.iter_mut().zip(msg.incoming(inc)) {
                    *c += m;
                }
            }
        }
        labels[s] = argmin(&cost);
    }
    labels
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

/// Sum of chain minima of the reparametrized energy; node terms are split evenly across the chains through them.
fn lower_bound(
    crf: &Crf,
    chains: &[(Vec<usize>, Vec<usize>)],
    n_chains: &[usize],
    msg: &Messages,
    belief: &dyn Fn(&Messages, usize) -> Vec<f64>,
) -> f64 {
    let node_term = |v: usize| -> Vec<f64> {
        let share = 1.0 / n_chains[v] as f64;
        belief(msg, v).into_iter().map(|x| x * share).collect()
    };
    let mut total = 0.0;
    let mut next = Vec::new();
    for (nodes, path) in chains {
        let mut acc = node_term(nodes[0]);
        for (i, &k) in path.iter().enumerate() {
            let (u, v) = (nodes[i], nodes[i + 1]);
            let e = &crf.edges[k];
            // reparametrized pairwise: θ_uv − m_{u→v}(x_v) − m_{v→u}(x_u)
            let (into_u, into_v) = if e.a == u { (&msg.to_a[k], &msg.to_b[k]) } else { (&msg.to_b[k], &msg.to_a[k]) };
            let g: Vec<f64> = acc.iter().zip(into_u).map(|(a, m)| a - m).collect();
            next.resize(crf.label_count(v), 0.0);
            e.min_convolve(&g, &mut next, e.a != u);
            let term = node_term(v);
            acc = next.iter().zip(into_v).zip(&term).map(|((c, m), t)| c - m + t).collect();
        }
        total += acc.iter().copied().fold(f64::INFINITY, f64::min);
    }
    total
}

/// Exact minimizer by enumeration; ties go to the lexicographically first labeling.
pub fn brute_force_map(crf: &Crf) -> Result<(Vec<usize>, f64)> {
    crf.validate()?;
    let count: f64 = crf.unaries.iter().map(|u| u.len() as f64).product();
    if count > 1e6 {
        return Err(Error::InstanceTooLarge(count));
    }
    let n = crf.unaries.len();
    let mut labels = vec![0usize; n];
    let mut best = (labels.clone(), crf.energy(&labels));
    loop {
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(best);
            }
            i -= 1;
            labels[i] += 1;
            if labels[i] < crf.label_count(i) {
                break;
            }
            labels[i] = 0;
        }
        let e = crf.energy(&labels);
        if e < best.1 {
            best = (labels.clone(), e);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_instance(seed: u64, max_nodes: usize, max_labels: usize) -> Crf {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=max_nodes);
        let sizes: Vec<usize> = (0..n).map(|_| rng.random_range(2..=max_labels)).collect();
        let unaries = sizes.iter().map(|&l| (0..l).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.8) {
                    let t = (0..sizes[a] * sizes[b]).map(|_| rng.random_range(0.0..1.0)).collect();
                    edges.push(Edge { a, b, potential: Pairwise::Dense(t) });
                }
            }
        }
        Crf { unaries, edges }
    }

    #[test]
    fn fast_pose_convolution_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let edge = Edge { a: 0, b: 1, potential: Pairwise::TruncatedPose { weight: 0.3, gamma: 20.0 } };
        let g: Vec<f64> = (0..LABEL_COUNT).map(|_| rng.random_range(0.0..10.0)).collect();
        let mut fast = vec![0.0; LABEL_COUNT];
        edge.min_convolve(&g, &mut fast, false);
        for xb in 0..LABEL_COUNT {
            let slow = (0..LABEL_COUNT).map(|xa| g[xa] + edge.cost(xa, xb, LABEL_COUNT)).fold(f64::INFINITY, f64::min);
            assert!((fast[xb] - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn single_node_takes_unary_argmin() {
        let crf = Crf { unaries: vec![vec![3.0, 1.0, 2.0]], edges: vec![] };
        let r = trws_infer(&crf, 10).unwrap();
        assert_eq!(r.labels, vec![1]);
        assert_eq!(r.energy, 1.0);
        assert_eq!(brute_force_map(&crf).unwrap(), (vec![1], 1.0));
        assert!(r.lower_bounds.iter().all(|&b| (b - 1.0).abs() < 1e-12));
    }

    #[test]
    fn two_node_chain_is_exact() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = |rng: &mut ChaCha8Rng| (0..8).map(|_| rng.random_range(0.0..1.0)).collect::<Vec<f64>>();
            let unaries = vec![u(&mut rng), u(&mut rng)];
            let t = (0..64).map(|_| rng.random_range(0.0..1.0)).collect();
            let crf = Crf { unaries, edges: vec![Edge { a: 0, b: 1, potential: Pairwise::Dense(t) }] };
            let r = trws_infer(&crf, 5).unwrap();
            let (labels, energy) = brute_force_map(&crf).unwrap();
            assert_eq!(r.labels, labels);
            assert!((r.energy - energy).abs() < 1e-12);
            // trees are exact
            assert!((r.lower_bounds.last().unwrap() - energy).abs() < 1e-9);
        }
    }

    #[test]
    fn oversized_instances_are_refused() {
        let crf = Crf { unaries: vec![vec![0.0; 360]; 3], edges: vec![] };
        assert!(matches!(brute_force_map(&crf), Err(Error::InstanceTooLarge(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn bound_is_monotone_and_below_the_optimum(seed in 0u64..100_000) {
            let crf = random_instance(seed, 4, 5);
            let r = trws_infer(&crf, 30).unwrap();
            let (_, opt) = brute_force_map(&crf).unwrap();
            prop_assert!(opt <= r.energy + 1e-12);
            for w in r.lower_bounds.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{:?}", r.lower_bounds);
            }
            prop_assert!(*r.lower_bounds.last().unwrap() <= opt + 1e-9);
        }
    }
}
