//! Lingering lattice paths and the Weyl-chamber rank criterion.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::chain::ChainOfLoops;
use crate::divisor::ReducedDivisor;
use crate::error::{Error, Result};
use crate::rational::{congruent, format_q, Q};

/// Label of one step of a lingering lattice path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    /// `(−1, …, −1)`: the loop carries no chip.
    Down,
    /// The standard basis vector `e_j`.
    East(usize),
    Linger,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Down => f.write_str("down"),
            Step::East(j) => write!(f, "e{j}"),
            Step::Linger => f.write_str("linger"),
        }
    }
}

impl FromStr for Step {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "down" => Ok(Step::Down),
            "linger" => Ok(Step::Linger),
            _ => s
                .strip_prefix('e')
                .and_then(|j| j.parse().ok())
                .map(Step::East)
                .ok_or_else(|| Error::Parse(format!("unknown step label {s:?}"))),
        }
    }
}

impl Serialize for Step {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Step {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `y_0 > y_1 > ⋯ > y_{r−1} > 0`. Vacuously true in `Z^0`.
pub fn in_weyl_chamber(y: &[i64]) -> bool {
    y.windows(2).all(|w| w[0] > w[1]) && y.last().is_none_or(|&last| last > 0)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PathJson", into = "PathJson")]
pub struct LatticePath {
    r: usize,
    points: Vec<Vec<i64>>,
    steps: Vec<Step>,
    /// `A_0 … A_r`: loops stepping in direction `e_j`, then the DOWN loops.
    directions: Vec<BTreeSet<usize>>,
}

#[derive(Serialize, Deserialize)]
struct PathJson {
    r: usize,
    points: Vec<Vec<i64>>,
    steps: Vec<Step>,
}

impl TryFrom<PathJson> for LatticePath {
    type Error = Error;

    fn try_from(p: PathJson) -> Result<Self> {
        let start = p
            .points
            .first()
            .ok_or_else(|| Error::Parse("lattice path has no points".into()))?;
        let d0 = start.first().copied().unwrap_or(0);
        let path = LatticePath::from_steps(p.r, d0, p.steps);
        if path.points != p.points {
            return Err(Error::Parse("points disagree with step labels".into()));
        }
        Ok(path)
    }
}

impl From<LatticePath> for PathJson {
    fn from(p: LatticePath) -> Self {
        PathJson {
            r: p.r,
            points: p.points,
            steps: p.steps,
        }
    }
}

impl LatticePath {
    /// Walks `steps` from `p_0 = (d0, d0 − 1, …, d0 − r + 1)`.
    pub fn from_steps(r: usize, d0: i64, steps: Vec<Step>) -> Self {
        let mut p: Vec<i64> = (0..r as i64).map(|j| d0 - j).collect();
        let mut points = vec![p.clone()];
        let mut directions = vec![BTreeSet::new(); r + 1];
        for (k, step) in steps.iter().enumerate() {
            let i = k + 1;
            match *step {
                Step::Down => {
                    p.iter_mut().for_each(|y| *y -= 1);
                    directions[r].insert(i);
                }
                Step::East(j) => {
                    assert!(j < r, "e{j} is not a direction in Z^{r}");
                    p[j] += 1;
                    directions[j].insert(i);
                }
                Step::Linger => {}
            }
            points.push(p.clone());
        }
        LatticePath {
            r,
            points,
            steps,
            directions,
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `p_0 … p_g`.
    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    /// `p_i`.
    pub fn point(&self, i: usize) -> &[i64] {
        &self.points[i]
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Label of step `i`, 1-based.
    pub fn step(&self, i: usize) -> Step {
        self.steps[i - 1]
    }

    /// `A_j` for `j < r`; `A_r` is the set of DOWN steps.
    pub fn direction(&self, j: usize) -> &BTreeSet<usize> {
        &self.directions[j]
    }

    pub fn directions(&self) -> &[BTreeSet<usize>] {
        &self.directions
    }

    pub fn d0(&self) -> i64 {
        self.points[0].first().copied().unwrap_or(0)
    }

    pub fn stays_in_chamber(&self) -> bool {
        self.points.iter().all(|p| in_weyl_chamber(p))
    }

    pub fn genus(&self) -> usize {
        self.steps.len()
    }
}

pub fn lingering_steps(path: &LatticePath) -> BTreeSet<usize> {
    path.steps
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == Step::Linger)
        .map(|(k, _)| k + 1)
        .collect()
}

/// Which `E(j)` congruences `x ≡ (p(j) + 1)·m_i` hold at step `i` when `p` is
/// in the chamber. More than one match can only happen on a non-generic chain.
pub(crate) fn east_candidates(chain: &ChainOfLoops, i: usize, p: &[i64], x: &Q) -> Vec<usize> {
    if !in_weyl_chamber(p) {
        return Vec::new();
    }
    let period = chain.period(i);
    (0..p.len())
        .filter(|&j| {
            let target = chain.m(i) * Q::from_integer((p[j] + 1).into());
            congruent(x, &target, &period)
        })
        .collect()
}

pub(crate) fn clash(i: usize, x: &Q, js: &[usize]) -> Error {
    Error::GenericityViolation {
        loop_index: i,
        detail: format!(
            "x_{i} = {} matches the E(j) congruence for j ∈ {js:?}",
            format_q(x)
        ),
    }
}

/// The lingering lattice path of a reduced divisor in `Z^r`.
pub fn lingering_path(
    chain: &ChainOfLoops,
    divisor: &ReducedDivisor,
    r: usize,
) -> Result<LatticePath> {
    divisor.validate(chain)?;
    let g = chain.genus();
    let mut p: Vec<i64> = (0..r as i64).map(|j| divisor.d0 - j).collect();
    let mut steps = Vec::with_capacity(g);
    for i in 1..=g {
        let x = divisor.x(i);
        let step = if x.is_zero() {
            Step::Down
        } else {
            let js = east_candidates(chain, i, &p, x);
            if js.len() > 1 {
                return Err(clash(i, x, &js));
            }
            match js.first() {
                Some(&j) => {
                    let mut next = p.clone();
                    next[j] += 1;
                    if in_weyl_chamber(&next) {
                        Step::East(j)
                    } else {
                        Step::Linger
                    }
                }
                None => Step::Linger,
            }
        };
        match step {
            Step::Down => p.iter_mut().for_each(|y| *y -= 1),
            Step::East(j) => p[j] += 1,
            Step::Linger => {}
        }
        steps.push(step);
    }
    Ok(LatticePath::from_steps(r, divisor.d0, steps))
}

/// Rank at least `r`: the path stays in the open Weyl chamber. For `r = 0`
/// this is effectivity, `d0 ≥ 0`.
pub fn rank_at_least(chain: &ChainOfLoops, divisor: &ReducedDivisor, r: usize) -> Result<bool> {
    if r == 0 {
        divisor.validate(chain)?;
        return Ok(divisor.is_effective());
    }
    Ok(lingering_path(chain, divisor, r)?.stays_in_chamber())
}

/// Baker–Norine rank, searched upward over `0 ≤ r ≤ max(d, 0)`.
pub fn rank(chain: &ChainOfLoops, divisor: &ReducedDivisor) -> Result<i64> {
    if !rank_at_least(chain, divisor, 0)? {
        return Ok(-1);
    }
    let d = divisor.degree().max(0) as usize;
    let mut r = 0;
    while r < d && rank_at_least(chain, divisor, r + 1)? {
        r += 1;
    }
    Ok(r as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, q};

    fn chain() -> ChainOfLoops {
        ChainOfLoops::new(2, vec![q(3), q(5)], vec![q(1), q(1)], vec![q(1)]).unwrap()
    }

    fn rd(d0: i64, x: Vec<Q>) -> ReducedDivisor {
        ReducedDivisor { d0, x }
    }

    #[test]
    fn chamber() {
        assert!(in_weyl_chamber(&[2, 1]));
        assert!(!in_weyl_chamber(&[1, 1]));
        assert!(in_weyl_chamber(&[1]));
        assert!(!in_weyl_chamber(&[0]));
        assert!(in_weyl_chamber(&[]));
    }

    #[test]
    fn canonical_class_path() {
        let c = chain();
        let path = lingering_path(&c, &rd(1, vec![q(2), q(0)]), 1).unwrap();
        assert_eq!(path.points(), &[vec![1], vec![2], vec![1]]);
        assert_eq!(path.steps(), &[Step::East(0), Step::Down]);
        assert!(lingering_steps(&path).is_empty());
        assert_eq!(path.direction(0), &BTreeSet::from([1]));
        assert_eq!(path.direction(1), &BTreeSet::from([2]));
    }

    #[test]
    fn all_down_path() {
        let c = chain();
        let path = lingering_path(&c, &rd(2, vec![q(0), q(0)]), 1).unwrap();
        assert_eq!(path.points(), &[vec![2], vec![1], vec![0]]);
        assert_eq!(path.steps(), &[Step::Down, Step::Down]);
        assert!(!rank_at_least(&c, &rd(2, vec![q(0), q(0)]), 1).unwrap());
    }

    #[test]
    fn leaving_chamber_blocks_east_steps() {
        let c = chain();
        // p_1 = (0) leaves the chamber; x_2 = 1 = (p_1(0)+1)·m_2 but the step lingers.
        let path = lingering_path(&c, &rd(1, vec![q(0), q(1)]), 1).unwrap();
        assert_eq!(path.points()[1], vec![0]);
        assert_eq!(path.step(2), Step::Linger);
        let path = lingering_path(&c, &rd(1, vec![q(0), frac(7, 3)]), 1).unwrap();
        assert_eq!(path.step(2), Step::Linger);
    }

    #[test]
    fn ranks() {
        let c = chain();
        assert_eq!(rank(&c, &rd(1, vec![q(2), q(0)])).unwrap(), 1);
        assert!(rank_at_least(&c, &rd(1, vec![q(2), q(0)]), 1).unwrap());
        assert_eq!(rank(&c, &rd(-1, vec![q(0), q(0)])).unwrap(), -1);
        assert_eq!(rank(&c, &rd(-2, vec![q(1), q(3)])).unwrap(), -1);
        let g1 = ChainOfLoops::new(1, vec![q(1)], vec![q(1)], vec![]).unwrap();
        assert_eq!(rank(&g1, &rd(0, vec![frac(1, 2)])).unwrap(), 0);
        assert_eq!(rank(&g1, &rd(1, vec![q(0)])).unwrap(), 0);
    }

    #[test]
    fn clash_on_non_generic_chain() {
        // ℓ_1 / m_1 = 2 / 1 with g = 3: multiples of m_1 three apart coincide
        // modulo 3, so p_0 = (4, 3, 2, 1) matches both E(0) and E(3) at x_1 = 2.
        let c = ChainOfLoops::new(
            3,
            vec![q(2), q(7), q(9)],
            vec![q(1), q(1), q(1)],
            vec![q(0), q(0)],
        )
        .unwrap();
        let err = lingering_path(&c, &rd(4, vec![q(2), q(0), q(0)]), 4).unwrap_err();
        assert!(matches!(err, Error::GenericityViolation { loop_index: 1, .. }));
    }

    #[test]
    fn step_labels_round_trip() {
        for s in [Step::Down, Step::East(0), Step::East(12), Step::Linger] {
            assert_eq!(s.to_string().parse::<Step>().unwrap(), s);
        }
        assert!("e".parse::<Step>().is_err());
        let path = LatticePath::from_steps(1, 1, vec![Step::East(0), Step::Down]);
        let json = serde_json::to_string(&path).unwrap();
        assert_eq!(json, r#"{"r":1,"points":[[1],[2],[1]],"steps":["e0","down"]}"#);
        let back: LatticePath = serde_json::from_str(&json).unwrap();
        assert_eq!(back, path);
    }
}
