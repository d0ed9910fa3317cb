//! Torus cells of `W^r_d(Γ)`, vertex avoiding classes, the representatives
//! `D_j`, local theta-translate equations and containing translates.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::Serialize;

use crate::chain::{rho, ChainOfLoops};
use crate::divisor::{Divisor, PointOnGamma, ReducedDivisor};
use crate::error::{Error, Result};
use crate::jacobian::{abel_jacobi, abel_jacobi_divisor, jacobi_invert, JacobianPoint, PicPoint};
use crate::lattice::{
    clash, east_candidates, in_weyl_chamber, lingering_path, lingering_steps, rank_at_least,
    LatticePath, Step,
};
use crate::rational::{circle_distance, congruent, format_q, frac, modulo, serde_q, Q};
use crate::sampling::Sampler;
use crate::theta::{self, ThetaTranslate};

/// One maximal torus of `W^r_d(Γ)`: the closure of the classes whose
/// lingering lattice path is `path`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusCell {
    pub path: LatticePath,
    pub degree: i64,
    pub free: BTreeSet<usize>,
    pub fixed: BTreeMap<usize, Q>,
}

#[derive(Serialize)]
struct CellJson<'a> {
    r: usize,
    degree: i64,
    steps: &'a [Step],
    free: &'a BTreeSet<usize>,
    fixed: BTreeMap<String, String>,
    d0: i64,
}

impl Serialize for TorusCell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CellJson {
            r: self.path.r(),
            degree: self.degree,
            steps: self.path.steps(),
            free: &self.free,
            fixed: self
                .fixed
                .iter()
                .map(|(i, v)| (i.to_string(), format_q(v)))
                .collect(),
            d0: self.d0(),
        }
        .serialize(s)
    }
}

impl TorusCell {
    /// Fixed coordinates from the step labels: `(p_{i−1}(j) + 1 + n_i)·m_i`
    /// after an `e_j` step and `n_i·m_i` after a DOWN step, where `n_i` counts
    /// the chip-carrying steps after `i`.
    pub fn from_path(chain: &ChainOfLoops, path: LatticePath, degree: i64) -> Self {
        let g = path.genus();
        let mut free = BTreeSet::new();
        let mut fixed = BTreeMap::new();
        let mut later = 0i64;
        for i in (1..=g).rev() {
            let n = Q::from_integer(later.into());
            match path.step(i) {
                Step::Linger => {
                    free.insert(i);
                }
                Step::Down => {
                    fixed.insert(i, modulo(&(chain.m(i) * n), &chain.period(i)));
                }
                Step::East(j) => {
                    let k = Q::from_integer((path.point(i - 1)[j] + 1).into()) + n;
                    fixed.insert(i, modulo(&(chain.m(i) * k), &chain.period(i)));
                }
            }
            if path.step(i) != Step::Down {
                later += 1;
            }
        }
        TorusCell {
            path,
            degree,
            free,
            fixed,
        }
    }

    pub fn d0(&self) -> i64 {
        self.path.d0()
    }

    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    pub fn contains(&self, p: &PicPoint) -> bool {
        p.degree == self.degree && self.fixed.iter().all(|(i, v)| p.point.coord(*i) == v)
    }

    /// A point of the cell whose free coordinates are drawn by `sampler`.
    pub fn sample_point(&self, chain: &ChainOfLoops, sampler: &mut Sampler) -> PicPoint {
        let coords = (1..=chain.genus())
            .map(|i| match self.fixed.get(&i) {
                Some(v) => v.clone(),
                None => sampler.rational_below(&chain.period(i)),
            })
            .collect();
        PicPoint::new(
            self.degree,
            JacobianPoint::new(chain, coords).expect("genus-length coordinates"),
        )
    }
}

/// All maximal cells of `W^r_d(Γ)`, sorted by step labels. For `r = 0` the
/// chamber in `Z^0` is vacuous and only `d0 ≥ 0` is required.
pub fn enumerate_cells(chain: &ChainOfLoops, r: usize, d: i64) -> Result<Vec<TorusCell>> {
    enumerate_cells_limited(chain, r, d, usize::MAX)
}

/// As [`enumerate_cells`], failing with `CapExceeded` past `limit` cells.
pub fn enumerate_cells_limited(
    chain: &ChainOfLoops,
    r: usize,
    d: i64,
    limit: usize,
) -> Result<Vec<TorusCell>> {
    let g = chain.genus();
    let rho = rho(g, r, d);
    if rho < 0 || rho as usize > g {
        return Ok(Vec::new());
    }
    let rho = rho as usize;
    let mut cells = Vec::new();
    for downs in 0..=(g - rho) {
        let d0 = d - (g - downs) as i64;
        if d0 < r as i64 {
            continue;
        }
        let p0: Vec<i64> = (0..r as i64).map(|j| d0 - j).collect();
        if !in_weyl_chamber(&p0) {
            continue;
        }
        let mut search = Search {
            chain,
            r,
            need_downs: downs,
            need_lingers: rho,
            steps: Vec::with_capacity(g),
            found: Vec::new(),
            limit: limit.saturating_sub(cells.len()),
        };
        search.walk(&mut p0.clone(), 0, 0)?;
        cells.extend(
            search
                .found
                .into_iter()
                .map(|steps| TorusCell::from_path(chain, LatticePath::from_steps(r, d0, steps), d)),
        );
    }
    cells.sort_by(|a, b| a.path.steps().cmp(b.path.steps()));
    Ok(cells)
}

struct Search<'a> {
    chain: &'a ChainOfLoops,
    r: usize,
    need_downs: usize,
    need_lingers: usize,
    steps: Vec<Step>,
    found: Vec<Vec<Step>>,
    limit: usize,
}

impl Search<'_> {
    fn walk(&mut self, p: &mut Vec<i64>, downs: usize, lingers: usize) -> Result<()> {
        let g = self.chain.genus();
        let i = self.steps.len() + 1;
        if i > g {
            if downs == self.need_downs && lingers == self.need_lingers {
                if self.found.len() == self.limit {
                    return Err(Error::CapExceeded(format!(
                        "more than {} cells",
                        self.limit
                    )));
                }
                self.found.push(self.steps.clone());
            }
            return Ok(());
        }
        let remaining = g - i + 1;
        let owed = (self.need_downs - downs) + (self.need_lingers - lingers);
        if owed > remaining {
            return Ok(());
        }
        if downs < self.need_downs {
            p.iter_mut().for_each(|y| *y -= 1);
            if in_weyl_chamber(p) {
                self.steps.push(Step::Down);
                self.walk(p, downs + 1, lingers)?;
                self.steps.pop();
            }
            p.iter_mut().for_each(|y| *y += 1);
        }
        if owed < remaining {
            for j in 0..self.r {
                p[j] += 1;
                if in_weyl_chamber(p) {
                    p[j] -= 1;
                    self.check_unique(i, p, j)?;
                    p[j] += 1;
                    self.steps.push(Step::East(j));
                    self.walk(p, downs, lingers)?;
                    self.steps.pop();
                }
                p[j] -= 1;
            }
        }
        if lingers < self.need_lingers {
            self.steps.push(Step::Linger);
            self.walk(p, downs, lingers + 1)?;
            self.steps.pop();
        }
        Ok(())
    }

    /// The position forced by an `e_j` step must match no other direction and
    /// must not be `v_i`, which would make the step DOWN.
    fn check_unique(&self, i: usize, p: &[i64], j: usize) -> Result<()> {
        let x = modulo(
            &(self.chain.m(i) * Q::from_integer((p[j] + 1).into())),
            &self.chain.period(i),
        );
        let js = east_candidates(self.chain, i, p, &x);
        if js.len() > 1 || x.is_zero() {
            return Err(clash(i, &x, &js));
        }
        Ok(())
    }
}

/// Conditions (1)–(3): exactly `ρ` lingering steps, no chip at `w_i`, and no
/// `x_i ≡ p_{i−1}(j)·m_i`.
pub fn is_vertex_avoiding(chain: &ChainOfLoops, divisor: &ReducedDivisor, r: usize) -> Result<bool> {
    if !rank_at_least(chain, divisor, r)? {
        return Err(Error::Precondition(format!(
            "divisor does not have rank at least {r}"
        )));
    }
    let g = chain.genus();
    let path = lingering_path(chain, divisor, r)?;
    let expected = rho(g, r, divisor.degree());
    if lingering_steps(&path).len() as i64 != expected {
        return Ok(false);
    }
    for i in 1..=g {
        let period = chain.period(i);
        let x = divisor.x(i);
        if congruent(x, chain.m(i), &period) {
            return Ok(false);
        }
        for &pj in path.point(i - 1) {
            if congruent(x, &(chain.m(i) * Q::from_integer(pj.into())), &period) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn ensure_vertex_avoiding(chain: &ChainOfLoops, divisor: &ReducedDivisor, r: usize) -> Result<()> {
    if is_vertex_avoiding(chain, divisor, r)? {
        Ok(())
    } else {
        Err(Error::Precondition(
            "divisor class is not vertex avoiding".into(),
        ))
    }
}

/// `E_j = j·v_1 + (r − j)·w_g`.
pub fn e_divisor(chain: &ChainOfLoops, r: usize, j: usize) -> Divisor {
    let mut e = Divisor::default();
    e.add(PointOnGamma::V1, j as i64);
    e.add(PointOnGamma::w(chain, chain.genus()), (r - j) as i64);
    e
}

fn has_point_on_loop(rd: &ReducedDivisor, i: usize) -> bool {
    rd.has_chip(i) || (i == 1 && rd.d0 > 0)
}

/// The reduced residual `R = D_j − j·v_1 − (r − j)·w_g`, checked against the
/// three structural clauses it must satisfy.
pub fn dj_residual(
    chain: &ChainOfLoops,
    divisor: &ReducedDivisor,
    r: usize,
    j: usize,
) -> Result<ReducedDivisor> {
    ensure_vertex_avoiding(chain, divisor, r)?;
    if j > r {
        return Err(Error::Precondition(format!("j = {j} exceeds r = {r}")));
    }
    let residual = dj_residual_unchecked(chain, divisor, r, j)?;
    let path = lingering_path(chain, divisor, r)?;
    if residual.d0 < 0 {
        return Err(Error::Assertion(format!(
            "D - E_{j} is not effective (d0 = {})",
            residual.d0
        )));
    }
    for i in 1..=chain.genus() {
        if residual.has_chip(i) && congruent(residual.x(i), chain.m(i), &chain.period(i)) {
            return Err(Error::Assertion(format!(
                "R_{j} has a chip at w_{i}"
            )));
        }
        let misses = !has_point_on_loop(&residual, i);
        let expected = path.direction(j).contains(&i);
        if misses != expected {
            return Err(Error::Assertion(format!(
                "R_{j} {} loop {i}, but step {i} is {}",
                if misses { "misses" } else { "meets" },
                path.step(i)
            )));
        }
    }
    Ok(residual)
}

fn dj_residual_unchecked(
    chain: &ChainOfLoops,
    divisor: &ReducedDivisor,
    r: usize,
    j: usize,
) -> Result<ReducedDivisor> {
    let class = abel_jacobi(chain, divisor);
    let e = abel_jacobi_divisor(chain, &e_divisor(chain, r, j))?;
    let target = class.sub(chain, &e);
    Ok(jacobi_invert(chain, &target.point, target.degree))
}

/// `D_j = R + j·v_1 + (r − j)·w_g`, the unique divisor equivalent to `D`
/// containing `E_j`.
pub fn compute_dj(
    chain: &ChainOfLoops,
    divisor: &ReducedDivisor,
    r: usize,
    j: usize,
) -> Result<Divisor> {
    let residual = dj_residual(chain, divisor, r, j)?;
    Ok(residual.to_divisor().plus(&e_divisor(chain, r, j)))
}

/// Base points `p_i` in the interior of each `ℓ_i` edge and a radius `ε`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NeighborhoodSpec {
    pub basepoints: Vec<PointOnGamma>,
    #[serde(with = "serde_q")]
    pub epsilon: Q,
}

impl NeighborhoodSpec {
    /// Midpoints `m_i + ℓ_i/2` and `ε = min_i min(ℓ_i, m_i)/4`.
    pub fn standard(chain: &ChainOfLoops) -> Self {
        let g = chain.genus();
        let basepoints = (1..=g)
            .map(|i| PointOnGamma::on_loop(i, chain.m(i) + chain.ell(i) * frac(1, 2)))
            .collect();
        let epsilon = (1..=g)
            .map(|i| chain.ell(i).min(chain.m(i)).clone())
            .min()
            .expect("genus is positive")
            * frac(1, 4);
        NeighborhoodSpec {
            basepoints,
            epsilon,
        }
    }

    /// The standard neighborhood with `ε` further capped at half the distance from
    /// every chip of every residual `R_i` to the vertices of its loop, so no
    /// point within `ε` of those chips is a vertex.
    pub fn for_divisor(chain: &ChainOfLoops, divisor: &ReducedDivisor, r: usize) -> Result<Self> {
        let mut spec = Self::standard(chain);
        for j in 0..=r {
            let residual = dj_residual(chain, divisor, r, j)?;
            for i in 1..=chain.genus() {
                if !residual.has_chip(i) {
                    continue;
                }
                let period = chain.period(i);
                let x = residual.x(i);
                let gap = circle_distance(x, &Q::zero(), &period)
                    .min(circle_distance(x, chain.m(i), &period));
                if gap.is_zero() {
                    return Err(Error::Degenerate(format!(
                        "R_{j} has a chip at a vertex of loop {i}"
                    )));
                }
                spec.epsilon = spec.epsilon.min(gap * frac(1, 2));
            }
        }
        spec.validate(chain)?;
        Ok(spec)
    }

    pub fn validate(&self, chain: &ChainOfLoops) -> Result<()> {
        if self.basepoints.len() != chain.genus() {
            return Err(Error::DimensionMismatch(format!(
                "{} base points for genus {}",
                self.basepoints.len(),
                chain.genus()
            )));
        }
        if self.epsilon <= Q::zero() {
            return Err(Error::Precondition("epsilon must be positive".into()));
        }
        for (k, p) in self.basepoints.iter().enumerate() {
            let i = k + 1;
            let x = match p {
                PointOnGamma::Loop { i: li, x } if *li == i => x,
                _ => {
                    return Err(Error::InvalidPoint(format!(
                        "base point {k} must lie on loop {i}"
                    )))
                }
            };
            let period = chain.period(i);
            let gap = circle_distance(x, &Q::zero(), &period)
                .min(circle_distance(x, chain.m(i), &period));
            if self.epsilon.clone() * Q::from_integer(2.into()) > gap || gap.is_zero() {
                return Err(Error::Precondition(format!(
                    "epsilon {} too large for base point on loop {i}",
                    format_q(&self.epsilon)
                )));
            }
        }
        Ok(())
    }

    /// Displacements `q_k − p_k`, one per loop, each in `(−ε, ε)`; zero on the
    /// loops not listed in `moving`.
    pub fn sample_offsets(&self, sampler: &mut Sampler, moving: &BTreeSet<usize>) -> Vec<Q> {
        (1..=self.basepoints.len())
            .map(|i| {
                if moving.contains(&i) {
                    sampler.symmetric(&self.epsilon)
                } else {
                    Q::zero()
                }
            })
            .collect()
    }

    /// The class `[D + Σ q_k − Σ p_k]` for displacements `t_k = q_k − p_k`.
    pub fn displaced(&self, chain: &ChainOfLoops, center: &PicPoint, offsets: &[Q]) -> PicPoint {
        let delta = JacobianPoint::new(chain, offsets.to_vec()).expect("genus-length offsets");
        PicPoint::new(center.degree, center.point.add(chain, &delta))
    }
}

/// One translate `Θ + [E_i − E'_{i,j}]` of the local description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalEquation {
    /// Direction class `i`, with `i = r` meaning DOWN.
    pub direction: usize,
    /// The step `j ∈ A_i`.
    pub step: usize,
    pub e: Divisor,
    pub e_prime: Divisor,
}

impl LocalEquation {
    pub fn translate(&self, chain: &ChainOfLoops) -> Result<ThetaTranslate> {
        ThetaTranslate::from_divisors(chain, self.e.clone(), self.e_prime.clone())
    }
}

/// The `g − ρ` pairs `(E_i, E'_{i,j})` cutting out `W^r_d` near a vertex
/// avoiding class.
pub fn local_theta_equations(
    chain: &ChainOfLoops,
    divisor: &ReducedDivisor,
    r: usize,
    spec: &NeighborhoodSpec,
) -> Result<Vec<LocalEquation>> {
    ensure_vertex_avoiding(chain, divisor, r)?;
    spec.validate(chain)?;
    let g = chain.genus();
    let d = divisor.degree();
    let path = lingering_path(chain, divisor, r)?;
    let expected = g as i64 - d + r as i64;
    let mut out = Vec::new();
    for i in 0..=r {
        let a = path.direction(i);
        if a.len() as i64 != expected {
            return Err(Error::Assertion(format!(
                "|A_{i}| = {} but g - d + r = {expected}",
                a.len()
            )));
        }
        let e = e_divisor(chain, r, i);
        for &j in a {
            let mut e_prime = Divisor::default();
            for &k in a.iter().filter(|&&k| k != j) {
                e_prime.add(spec.basepoints[k - 1].clone(), 1);
            }
            out.push(LocalEquation {
                direction: i,
                step: j,
                e: e.clone(),
                e_prime,
            });
        }
    }
    Ok(out)
}

pub const DEFAULT_REDRAWS: usize = 16;

/// `ρ` translates `Θ + [D − E_a]`, one per lingering step `a`, each through
/// `[D]`; `E_a` has one random chip on every loop but `a`. A draw is kept
/// only when `[E_a]` lies on the facet of `Θ` fixing coordinate `a` and on no
/// other facet, so the translates cut the cell of `D` transversally there.
pub fn containing_translates(
    chain: &ChainOfLoops,
    divisor: &ReducedDivisor,
    r: usize,
    sampler: &mut Sampler,
) -> Result<Vec<ThetaTranslate>> {
    ensure_vertex_avoiding(chain, divisor, r)?;
    let g = chain.genus();
    let path = lingering_path(chain, divisor, r)?;
    let base = theta::theta_facets(chain, &ThetaTranslate::zero(g))?;
    let mut out = Vec::new();
    for a in lingering_steps(&path) {
        let mut accepted = None;
        for _ in 0..DEFAULT_REDRAWS {
            let mut e = Divisor::default();
            for k in (1..=g).filter(|&k| k != a) {
                let period = chain.period(k);
                let x = sampler.circle_point_avoiding(&period, &[chain.m(k).clone()]);
                e.add(PointOnGamma::on_loop(k, x), 1);
            }
            let image = abel_jacobi_divisor(chain, &e)?;
            let on: Vec<usize> = base
                .facets
                .iter()
                .filter(|f| image.point.coord(f.coord) == &f.value)
                .map(|f| f.coord)
                .collect();
            if on == [a] {
                accepted = Some(e);
                break;
            }
        }
        let e = accepted.ok_or_else(|| {
            Error::Degenerate(format!(
                "no transverse choice of E for lingering step {a} after {DEFAULT_REDRAWS} draws"
            ))
        })?;
        out.push(ThetaTranslate::from_divisors(chain, divisor.to_divisor(), e)?);
    }
    Ok(out)
}

/// A vertex avoiding class of rank `r` and degree `d`, drawn from a random
/// cell with random free coordinates.
pub fn sample_vertex_avoiding(
    chain: &ChainOfLoops,
    cells: &[TorusCell],
    r: usize,
    sampler: &mut Sampler,
) -> Result<ReducedDivisor> {
    if cells.is_empty() {
        return Err(Error::Precondition("no cells to sample from".into()));
    }
    for _ in 0..1000 {
        let cell = &cells[sampler.below(cells.len())];
        let p = cell.sample_point(chain, sampler);
        let rd = jacobi_invert(chain, &p.point, p.degree);
        if !rank_at_least(chain, &rd, r)? {
            continue;
        }
        if is_vertex_avoiding(chain, &rd, r)? && lingering_path(chain, &rd, r)? == cell.path {
            return Ok(rd);
        }
    }
    Err(Error::Degenerate(
        "no vertex avoiding class found in 1000 draws".into(),
    ))
}
