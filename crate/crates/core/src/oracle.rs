//! Chip-firing on unit-subdivided integer models of the chain: Dhar burning,
//! brute-force Baker–Norine rank and counting of effective representatives.
//! Shares nothing with the lattice-path machinery beyond the point types.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use serde::Serialize;

use crate::chain::{check_genericity, ChainOfLoops, Genericity};
use crate::divisor::{canonicalize, Divisor, PointOnGamma};
use crate::error::{Error, Result};
use crate::lattice;
use crate::rational::{format_q, lcm_denominators, to_integer, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_vertices: usize,
    /// Memoized classes for rank, search nodes for counting.
    pub max_states: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_vertices: 600,
            max_states: 2_000_000,
        }
    }
}

/// A unit-length subdivision of `scale·Γ`. Vertex 0 is `v_1`.
#[derive(Debug, Clone)]
pub struct DiscreteGraph {
    scale: u64,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    locations: Vec<PointOnGamma>,
    /// `loop_vertices[i−1][k]` sits at offset `k/scale` on loop `i`.
    loop_vertices: Vec<Vec<usize>>,
    /// `bridge_vertices[i−1][t]` sits at offset `t/scale` on bridge `i`;
    /// entry 0 is `w_i`.
    bridge_vertices: Vec<Vec<usize>>,
}

impl DiscreteGraph {
    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Edges between distinct vertices; parallel edges repeat.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn location(&self, v: usize) -> &PointOnGamma {
        &self.locations[v]
    }

    /// First Betti number of the (self-loop free) model.
    pub fn genus(&self) -> i64 {
        self.edges.len() as i64 - self.vertex_count() as i64 + 1
    }

    pub fn map_point(&self, p: &PointOnGamma) -> Result<usize> {
        let on_grid = |x: &Q, what: &str| -> Result<usize> {
            let k = x * Q::from_integer(BigInt::from(self.scale));
            to_integer(&k)
                .and_then(|k| usize::try_from(k).ok())
                .ok_or_else(|| {
                    Error::InvalidPoint(format!(
                        "{what} offset {} is not a multiple of 1/{}",
                        format_q(x),
                        self.scale
                    ))
                })
        };
        match p {
            PointOnGamma::V1 => Ok(0),
            PointOnGamma::Loop { i, x } => {
                let row = self
                    .loop_vertices
                    .get(i.wrapping_sub(1))
                    .ok_or_else(|| Error::InvalidPoint(format!("no loop {i}")))?;
                let k = on_grid(x, "loop")?;
                row.get(k)
                    .copied()
                    .ok_or_else(|| Error::InvalidPoint(format!("offset beyond loop {i}")))
            }
            PointOnGamma::Bridge { i, t } => {
                let row = self
                    .bridge_vertices
                    .get(i.wrapping_sub(1))
                    .ok_or_else(|| Error::InvalidPoint(format!("no bridge {i}")))?;
                let k = on_grid(t, "bridge")?;
                row.get(k)
                    .copied()
                    .ok_or_else(|| Error::InvalidPoint(format!("offset beyond bridge {i}")))
            }
        }
    }

    pub fn map_divisor(&self, divisor: &Divisor) -> Result<DiscreteDivisor> {
        let mut chips = vec![0; self.vertex_count()];
        for (p, k) in divisor.chips() {
            chips[self.map_point(p)?] += k;
        }
        Ok(DiscreteDivisor { chips })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DiscreteDivisor {
    pub chips: Vec<i64>,
}

impl DiscreteDivisor {
    pub fn zero(n: usize) -> Self {
        DiscreteDivisor { chips: vec![0; n] }
    }

    pub fn degree(&self) -> i64 {
        self.chips.iter().sum()
    }
}

fn scaled_length(x: &Q, scale: u64, what: &str) -> Result<usize> {
    let k = x * Q::from_integer(BigInt::from(scale));
    to_integer(&k)
        .and_then(|k| usize::try_from(k).ok())
        .ok_or_else(|| {
            Error::Precondition(format!(
                "{what} {} times scale {scale} is not an integer",
                format_q(x)
            ))
        })
}

/// Subdivides every edge of `scale·Γ` into unit segments.
pub fn discretize(chain: &ChainOfLoops, scale: u64) -> Result<DiscreteGraph> {
    if scale == 0 {
        return Err(Error::Precondition("scale must be positive".into()));
    }
    let g = chain.genus();
    let mut graph = DiscreteGraph {
        scale,
        adjacency: vec![Vec::new()],
        edges: Vec::new(),
        locations: vec![PointOnGamma::V1],
        loop_vertices: Vec::with_capacity(g),
        bridge_vertices: Vec::with_capacity(g.saturating_sub(1)),
    };
    let s = Q::from_integer(BigInt::from(scale));
    let mut start = 0;
    for i in 1..=g {
        let n = scaled_length(&chain.period(i), scale, "loop length")?;
        let w = scaled_length(chain.m(i), scale, "m")?;
        scaled_length(chain.ell(i), scale, "ell")?;
        let mut row = vec![start];
        for k in 1..n {
            row.push(graph.add_vertex(PointOnGamma::on_loop(
                i,
                Q::from_integer(BigInt::from(k)) / &s,
            )));
        }
        for k in 0..n {
            graph.add_edge(row[k], row[(k + 1) % n]);
        }
        let w_vertex = row[w];
        graph.loop_vertices.push(row);
        if i < g {
            let b = scaled_length(chain.bridge(i), scale, "bridge")?;
            let mut brow = vec![w_vertex];
            for t in 1..=b {
                let v = graph.add_vertex(PointOnGamma::Bridge {
                    i,
                    t: Q::from_integer(BigInt::from(t)) / &s,
                });
                graph.add_edge(brow[t - 1], v);
                brow.push(v);
            }
            start = *brow.last().expect("starts with w_i");
            graph.bridge_vertices.push(brow);
        }
    }
    Ok(graph)
}

impl DiscreteGraph {
    fn add_vertex(&mut self, location: PointOnGamma) -> usize {
        self.adjacency.push(Vec::new());
        self.locations.push(location);
        self.adjacency.len() - 1
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        // self-loops never affect chip-firing
        if a != b {
            self.adjacency[a].push(b);
            self.adjacency[b].push(a);
            self.edges.push((a.min(b), a.max(b)));
        }
    }

    fn distances_from(&self, base: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[base] = 0;
        let mut queue = VecDeque::from([base]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adjacency[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Moves all debt onto `base`. Level by level from the outside in, the set of
/// vertices at distance `≥ L` borrows as often as the worst vertex at distance
/// exactly `L` needs; deeper levels are untouched by these borrows.
fn clear_debt(graph: &DiscreteGraph, chips: &mut [i64], base: usize) {
    let dist = graph.distances_from(base);
    let max = dist.iter().copied().max().unwrap_or(0);
    for level in (1..=max).rev() {
        let mut times = 0i64;
        for v in (0..chips.len()).filter(|&v| dist[v] == level && chips[v] < 0) {
            let down = graph.adjacency[v].iter().filter(|&&w| dist[w] + 1 == level).count() as i64;
            times = times.max((-chips[v] + down - 1) / down);
        }
        if times == 0 {
            continue;
        }
        for v in (0..chips.len()).filter(|&v| dist[v] == level) {
            for &w in &graph.adjacency[v] {
                if dist[w] + 1 == level {
                    chips[v] += times;
                    chips[w] -= times;
                }
            }
        }
    }
}

/// Dhar's burning process from `base`; returns the burnt flags.
fn burn(graph: &DiscreteGraph, chips: &[i64], base: usize) -> Vec<bool> {
    let n = chips.len();
    let mut burnt = vec![false; n];
    let mut heat = vec![0i64; n];
    burnt[base] = true;
    let mut queue = VecDeque::from([base]);
    while let Some(u) = queue.pop_front() {
        for &w in &graph.adjacency[u] {
            if burnt[w] {
                continue;
            }
            heat[w] += 1;
            if heat[w] > chips[w] {
                burnt[w] = true;
                queue.push_back(w);
            }
        }
    }
    burnt
}

/// The unique `base`-reduced divisor equivalent to `divisor`.
pub fn dhar_reduce(graph: &DiscreteGraph, divisor: &DiscreteDivisor, base: usize) -> DiscreteDivisor {
    let mut chips = divisor.chips.clone();
    clear_debt(graph, &mut chips, base);
    loop {
        let burnt = burn(graph, &chips, base);
        if burnt.iter().all(|&b| b) {
            return DiscreteDivisor { chips };
        }
        // The unburnt set can fire; fire it as often as it stays legal.
        let mut times = i64::MAX;
        let mut outflow = vec![0i64; chips.len()];
        for v in (0..chips.len()).filter(|&v| !burnt[v]) {
            outflow[v] = graph.adjacency[v].iter().filter(|&&w| burnt[w]).count() as i64;
            if outflow[v] > 0 {
                times = times.min(chips[v] / outflow[v]);
            }
        }
        debug_assert!((1..i64::MAX).contains(&times));
        for v in (0..chips.len()).filter(|&v| !burnt[v] && outflow[v] > 0) {
            chips[v] -= times * outflow[v];
            for &w in &graph.adjacency[v] {
                if burnt[w] {
                    chips[w] += times;
                }
            }
        }
    }
}

fn ensure_size(graph: &DiscreteGraph, limits: &OracleLimits) -> Result<()> {
    if graph.vertex_count() > limits.max_vertices {
        return Err(Error::CapExceeded(format!(
            "{} vertices exceeds the cap of {}",
            graph.vertex_count(),
            limits.max_vertices
        )));
    }
    Ok(())
}

struct RankSearch<'a> {
    graph: &'a DiscreteGraph,
    limits: &'a OracleLimits,
    memo: HashMap<Vec<i64>, i64>,
}

impl RankSearch<'_> {
    /// `r(D) = −1` if `D` is not effective, else `1 + min_v r(D − v)`.
    fn rank_of(&mut self, reduced: Vec<i64>) -> Result<i64> {
        if reduced[0] < 0 {
            return Ok(-1);
        }
        if let Some(&r) = self.memo.get(&reduced) {
            return Ok(r);
        }
        let degree: i64 = reduced.iter().sum();
        // Riemann–Roch: no child can have rank below deg − 1 − genus
        let floor = (degree - 1 - self.graph.genus()).max(-1);
        let mut best = i64::MAX;
        for v in 0..reduced.len() {
            let mut child = reduced.clone();
            child[v] -= 1;
            // removing a chip from base or from a loaded vertex keeps it reduced
            if v != 0 && reduced[v] == 0 {
                child = dhar_reduce(self.graph, &DiscreteDivisor { chips: child }, 0).chips;
            }
            best = best.min(self.rank_of(child)?);
            if best <= floor {
                break;
            }
        }
        let r = best + 1;
        if self.memo.len() >= self.limits.max_states {
            return Err(Error::CapExceeded(format!(
                "rank search visited more than {} classes",
                self.limits.max_states
            )));
        }
        self.memo.insert(reduced, r);
        Ok(r)
    }
}

/// Baker–Norine rank on the model, by the recursion `r(D) ≥ k` iff
/// `r(D − v) ≥ k − 1` for every vertex `v`, memoized on reduced forms.
pub fn discrete_rank(
    graph: &DiscreteGraph,
    divisor: &DiscreteDivisor,
    limits: &OracleLimits,
) -> Result<i64> {
    ensure_size(graph, limits)?;
    let reduced = dhar_reduce(graph, divisor, 0);
    RankSearch {
        graph,
        limits,
        memo: HashMap::new(),
    }
    .rank_of(reduced.chips)
}

/// Number of effective vertex-supported divisors equivalent to `divisor`.
pub fn count_effective_reps(
    graph: &DiscreteGraph,
    divisor: &DiscreteDivisor,
    limits: &OracleLimits,
) -> Result<u64> {
    ensure_size(graph, limits)?;
    let d = divisor.degree();
    if d < 0 {
        return Ok(0);
    }
    let target = dhar_reduce(graph, divisor, 0);
    if target.chips[0] < 0 {
        return Ok(0);
    }
    let mut counter = RepCounter {
        graph,
        target: &target,
        nodes: 0,
        max_nodes: limits.max_states,
        found: 0,
    };
    counter.extend(DiscreteDivisor::zero(graph.vertex_count()), 0, d)?;
    Ok(counter.found)
}

struct RepCounter<'a> {
    graph: &'a DiscreteGraph,
    target: &'a DiscreteDivisor,
    nodes: usize,
    max_nodes: usize,
    found: u64,
}

impl RepCounter<'_> {
    /// Multisets of vertices `≥ first`; `reduced` is the reduced form of the
    /// chips chosen so far, since reduction depends only on the class.
    fn extend(&mut self, reduced: DiscreteDivisor, first: usize, left: i64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::CapExceeded(format!(
                "effective representative search exceeded {} nodes",
                self.max_nodes
            )));
        }
        if left == 0 {
            if &reduced == self.target {
                self.found += 1;
            }
            return Ok(());
        }
        for v in first..self.graph.vertex_count() {
            let mut next = reduced.clone();
            next.chips[v] += 1;
            let next = if v == 0 {
                next
            } else {
                dhar_reduce(self.graph, &next, 0)
            };
            self.extend(next, v, left - 1)?;
        }
        Ok(())
    }
}

/// The lattice-path side and the oracle side on one divisor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossCheckReport {
    pub rank_lattice: Option<i64>,
    pub rank_oracle: i64,
    pub reduce_match: bool,
    pub scale: u64,
    pub vertices: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_error: Option<String>,
}

impl CrossCheckReport {
    pub fn agrees(&self) -> bool {
        self.reduce_match && self.rank_lattice == Some(self.rank_oracle)
    }
}

/// Scale at which every length of the chain and every chip offset of
/// `divisor` is an integer.
pub fn common_scale(chain: &ChainOfLoops, divisor: &Divisor) -> Result<u64> {
    let offsets = divisor.chips().iter().filter_map(|(p, _)| match p {
        PointOnGamma::V1 => None,
        PointOnGamma::Loop { x, .. } => Some(x),
        PointOnGamma::Bridge { t, .. } => Some(t),
    });
    lcm_denominators(
        chain
            .ells()
            .iter()
            .chain(chain.ms())
            .chain(chain.bridges())
            .chain(offsets),
    )
    .ok_or_else(|| Error::CapExceeded("common denominator overflows u64".into()))
}

/// Reduces and ranks `divisor` both ways at the common scale.
pub fn cross_check(
    chain: &ChainOfLoops,
    divisor: &Divisor,
    limits: &OracleLimits,
) -> Result<CrossCheckReport> {
    divisor.validate(chain)?;
    let scale = common_scale(chain, divisor)?;
    let graph = discretize(chain, scale)?;
    ensure_size(&graph, limits)?;
    let canonical = canonicalize(chain, divisor)?;
    let reduced = dhar_reduce(&graph, &graph.map_divisor(divisor)?, 0);
    let reduce_match = graph.map_divisor(&canonical.to_divisor())? == reduced;
    let (rank_lattice, lattice_error) = match check_genericity(chain) {
        Genericity::Generic => match lattice::rank(chain, &canonical) {
            Ok(r) => (Some(r), None),
            Err(e @ Error::GenericityViolation { .. }) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        },
        witness => (
            None,
            Some(
                Error::GenericityViolation {
                    loop_index: match witness {
                        Genericity::Witness { loop_index, .. } => loop_index,
                        Genericity::Generic => unreachable!(),
                    },
                    detail: "chain is not generic; lattice ranks are out of scope".into(),
                }
                .to_string(),
            ),
        ),
    };
    let rank_oracle = discrete_rank(&graph, &reduced, limits)?;
    Ok(CrossCheckReport {
        rank_lattice,
        rank_oracle,
        reduce_match,
        scale,
        vertices: graph.vertex_count(),
        lattice_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::ReducedDivisor;
    use crate::rational::{frac, q};

    fn g2() -> ChainOfLoops {
        ChainOfLoops::new(2, vec![q(3), q(5)], vec![q(1), q(1)], vec![q(1)]).unwrap()
    }

    fn g1() -> ChainOfLoops {
        ChainOfLoops::new(1, vec![q(3)], vec![q(1)], vec![]).unwrap()
    }

    #[test]
    fn model_sizes() {
        let c = g1();
        let graph = discretize(&c, 1).unwrap();
        assert_eq!(graph.vertex_count(), 4);
        assert_eq!(graph.edges().len(), 4);
        let graph = discretize(&g2(), 1).unwrap();
        assert_eq!(graph.edges().len(), 11);
        assert_eq!(graph.vertex_count(), 10);
        assert_eq!(graph.genus(), 2);
        let fine = discretize(&g2(), 2).unwrap();
        assert_eq!(fine.edges().len(), 22);
        assert_eq!(fine.vertex_count(), 21);
        let half = ChainOfLoops::new(1, vec![frac(5, 2)], vec![q(1)], vec![]).unwrap();
        assert!(matches!(discretize(&half, 1), Err(Error::Precondition(_))));
        assert_eq!(discretize(&half, 2).unwrap().vertex_count(), 7);
    }

    #[test]
    fn point_mapping_round_trips() {
        let c = g2();
        let graph = discretize(&c, 2).unwrap();
        for v in 0..graph.vertex_count() {
            assert_eq!(graph.map_point(graph.location(v)).unwrap(), v);
        }
        // v_2 is both the end of bridge 1 and offset 0 on loop 2
        assert_eq!(
            graph.map_point(&PointOnGamma::v(2)).unwrap(),
            graph.map_point(&PointOnGamma::Bridge { i: 1, t: q(1) }).unwrap()
        );
        assert!(graph.map_point(&PointOnGamma::on_loop(1, frac(1, 3))).is_err());
    }

    #[test]
    fn reduce_examples() {
        let c = g2();
        let graph = discretize(&c, 1).unwrap();
        let v2 = graph.map_divisor(&Divisor::point(PointOnGamma::v(2))).unwrap();
        let w1 = graph.map_divisor(&Divisor::point(PointOnGamma::w(&c, 1))).unwrap();
        assert_eq!(dhar_reduce(&graph, &v2, 0), w1);
        assert_eq!(dhar_reduce(&graph, &w1, 0), w1);
        // debt away from base is pushed to base
        let mut d = Divisor::point(PointOnGamma::on_loop(2, q(3)));
        d.add(PointOnGamma::on_loop(1, q(2)), -1);
        let reduced = dhar_reduce(&graph, &graph.map_divisor(&d).unwrap(), 0);
        assert_eq!(reduced.degree(), 0);
        assert!(reduced.chips[1..].iter().all(|&k| k >= 0));
        assert_eq!(dhar_reduce(&graph, &reduced, 0), reduced);
    }

    #[test]
    fn rank_examples() {
        let limits = OracleLimits::default();
        let c = g1();
        let graph = discretize(&c, 1).unwrap();
        let p = graph.map_divisor(&Divisor::point(PointOnGamma::on_loop(1, q(2)))).unwrap();
        assert_eq!(discrete_rank(&graph, &p, &limits).unwrap(), 0);
        let c = g2();
        let graph = discretize(&c, 1).unwrap();
        let canonical = ReducedDivisor { d0: 1, x: vec![q(2), q(0)] }.to_divisor();
        let k = graph.map_divisor(&canonical).unwrap();
        assert_eq!(discrete_rank(&graph, &k, &limits).unwrap(), 1);
        let neg = graph.map_divisor(&Divisor::new(vec![(PointOnGamma::V1, -1)])).unwrap();
        assert_eq!(discrete_rank(&graph, &neg, &limits).unwrap(), -1);
        assert_eq!(discrete_rank(&graph, &DiscreteDivisor::zero(10), &limits).unwrap(), 0);
    }

    #[test]
    fn effective_representatives() {
        let limits = OracleLimits::default();
        let c = ChainOfLoops::standard(2, 0);
        let graph = discretize(&c, 1).unwrap();
        let v2 = graph.map_divisor(&Divisor::point(PointOnGamma::v(2))).unwrap();
        assert_eq!(count_effective_reps(&graph, &v2, &limits).unwrap(), 1);
        let g1 = discretize(&g1(), 1).unwrap();
        let p = g1.map_divisor(&Divisor::point(PointOnGamma::on_loop(1, q(1)))).unwrap();
        assert_eq!(count_effective_reps(&g1, &p, &limits).unwrap(), 1);
        // a degree-2 class on a 4-cycle: every pair {a, b} with a + b fixed
        let two = g1.map_divisor(&Divisor::new(vec![(PointOnGamma::V1, 2)])).unwrap();
        assert_eq!(count_effective_reps(&g1, &two, &limits).unwrap(), 3);
    }

    #[test]
    fn cross_check_canonical_class() {
        let limits = OracleLimits::default();
        let c = g2();
        let k = ReducedDivisor { d0: 1, x: vec![q(2), q(0)] }.to_divisor();
        let report = cross_check(&c, &k, &limits).unwrap();
        assert_eq!(report.rank_lattice, Some(1));
        assert_eq!(report.rank_oracle, 1);
        assert!(report.reduce_match && report.agrees());
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            r#"{"rank_lattice":1,"rank_oracle":1,"reduce_match":true,"scale":1,"vertices":10}"#
        );
        let flat = ChainOfLoops::new(2, vec![q(1), q(5)], vec![q(1), q(1)], vec![q(1)]).unwrap();
        let report = cross_check(&flat, &Divisor::point(PointOnGamma::V1), &limits).unwrap();
        assert!(report.lattice_error.is_some());
        assert_eq!(report.rank_oracle, 0);
    }

    #[test]
    fn caps_are_reported() {
        let graph = discretize(&g2(), 1).unwrap();
        let tight = OracleLimits {
            max_vertices: 5,
            max_states: 10,
        };
        let d = DiscreteDivisor::zero(10);
        assert!(matches!(discrete_rank(&graph, &d, &tight), Err(Error::CapExceeded(_))));
        let tight = OracleLimits {
            max_vertices: 600,
            max_states: 10,
        };
        let mut big = DiscreteDivisor::zero(10);
        big.chips[0] = 4;
        assert!(matches!(count_effective_reps(&graph, &big, &tight), Err(Error::CapExceeded(_))));
    }
}
