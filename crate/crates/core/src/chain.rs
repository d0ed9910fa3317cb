//! The metric graph: a chain of `g` loops joined by bridges.
//!
//! Loop `i` (1-based) has a top edge of length `ℓ_i` and a bottom edge of
//! length `m_i`. Positions on loop `i` run counterclockwise from `v_i` over
//! `[0, ℓ_i + m_i)`, and `w_i` sits at position `m_i`. Bridge `i` joins `w_i`
//! to `v_{i+1}` and may have length zero.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_q, q, serde_q, Q};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ChainJson", into = "ChainJson")]
pub struct ChainOfLoops {
    g: usize,
    ell: Vec<Q>,
    m: Vec<Q>,
    bridges: Vec<Q>,
}

#[derive(Serialize, Deserialize)]
struct ChainJson {
    g: usize,
    #[serde(with = "serde_q::vec")]
    ell: Vec<Q>,
    #[serde(with = "serde_q::vec")]
    m: Vec<Q>,
    #[serde(with = "serde_q::vec")]
    bridges: Vec<Q>,
}

impl TryFrom<ChainJson> for ChainOfLoops {
    type Error = Error;

    fn try_from(j: ChainJson) -> Result<Self> {
        ChainOfLoops::new(j.g, j.ell, j.m, j.bridges)
    }
}

impl From<ChainOfLoops> for ChainJson {
    fn from(c: ChainOfLoops) -> Self {
        ChainJson {
            g: c.g,
            ell: c.ell,
            m: c.m,
            bridges: c.bridges,
        }
    }
}

impl ChainOfLoops {
    pub fn new(g: usize, ell: Vec<Q>, m: Vec<Q>, bridges: Vec<Q>) -> Result<Self> {
        if g == 0 {
            return Err(Error::DimensionMismatch("g must be positive".into()));
        }
        if ell.len() != g || m.len() != g || bridges.len() != g - 1 {
            return Err(Error::DimensionMismatch(format!(
                "g = {g} needs {g} top lengths, {g} bottom lengths and {} bridges; got {}, {}, {}",
                g - 1,
                ell.len(),
                m.len(),
                bridges.len()
            )));
        }
        for (i, x) in ell.iter().chain(m.iter()).enumerate() {
            if !x.is_positive() {
                return Err(Error::NonPositiveLength {
                    loop_index: i % g + 1,
                    value: format_q(x),
                });
            }
        }
        for (i, b) in bridges.iter().enumerate() {
            if b.is_negative() {
                return Err(Error::NegativeBridge {
                    bridge_index: i + 1,
                    value: format_q(b),
                });
            }
        }
        Ok(ChainOfLoops { g, ell, m, bridges })
    }

    /// The integer family `ℓ_i = 2g − 2 + i`, `m_i = 1`, with every bridge of
    /// length `bridge` (0 or 1 in practice). Always generic.
    pub fn standard(g: usize, bridge: i64) -> Self {
        let ell = (1..=g).map(|i| q(2 * g as i64 - 2 + i as i64)).collect();
        let m = vec![q(1); g];
        let bridges = vec![q(bridge); g.saturating_sub(1)];
        ChainOfLoops::new(g, ell, m, bridges).expect("standard chain is valid")
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    /// Top-edge length `ℓ_i`, 1-based.
    pub fn ell(&self, i: usize) -> &Q {
        &self.ell[i - 1]
    }

    /// Bottom-edge length `m_i`, 1-based; also the position of `w_i`.
    pub fn m(&self, i: usize) -> &Q {
        &self.m[i - 1]
    }

    /// Length of the bridge from `w_i` to `v_{i+1}`, 1-based.
    pub fn bridge(&self, i: usize) -> &Q {
        &self.bridges[i - 1]
    }

    /// Circumference `ℓ_i + m_i` of loop `i`.
    pub fn period(&self, i: usize) -> Q {
        &self.ell[i - 1] + &self.m[i - 1]
    }

    pub fn ells(&self) -> &[Q] {
        &self.ell
    }

    pub fn ms(&self) -> &[Q] {
        &self.m
    }

    pub fn bridges(&self) -> &[Q] {
        &self.bridges
    }

    pub fn scaled(&self, factor: &Q) -> Result<Self> {
        if !factor.is_positive() {
            return Err(Error::Precondition("scale factor must be positive".into()));
        }
        let s = |v: &[Q]| v.iter().map(|x| x * factor).collect::<Vec<_>>();
        ChainOfLoops::new(self.g, s(&self.ell), s(&self.m), s(&self.bridges))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Genericity {
    Generic,
    /// `ℓ_i / m_i = a / b` in lowest terms with `a + b ≤ 2g − 2`.
    Witness { loop_index: usize, a: BigInt, b: BigInt },
}

impl Genericity {
    pub fn is_generic(&self) -> bool {
        matches!(self, Genericity::Generic)
    }
}

/// No ratio `ℓ_i / m_i` may equal `a / b` with positive integers `a + b ≤ 2g − 2`.
/// Every such `a / b` reduces to the lowest-terms form `p / q` with
/// `p + q ≤ a + b`, so testing the lowest-terms sum is enough.
pub fn check_genericity(chain: &ChainOfLoops) -> Genericity {
    let bound = BigInt::from(2 * chain.g as i64 - 2);
    for i in 1..=chain.g {
        let ratio = chain.ell(i) / chain.m(i);
        let (p, qq) = (ratio.numer().clone(), ratio.denom().clone());
        if &p + &qq <= bound {
            return Genericity::Witness {
                loop_index: i,
                a: p,
                b: qq,
            };
        }
    }
    Genericity::Generic
}

pub fn ensure_generic(chain: &ChainOfLoops) -> Result<()> {
    match check_genericity(chain) {
        Genericity::Generic => Ok(()),
        Genericity::Witness { loop_index, a, b } => Err(Error::GenericityViolation {
            loop_index,
            detail: format!("ℓ/m = {a}/{b} and {a} + {b} ≤ 2g − 2"),
        }),
    }
}

/// Brill–Noether number `g − (r+1)(g − d + r)`; negative means `W^r_d` is empty.
pub fn rho(g: usize, r: usize, d: i64) -> i64 {
    let (g, r) = (g as i64, r as i64);
    g - (r + 1) * (g - d + r)
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `∏_{i=0}^{r} i! / (s + i)!` as an exact rational.
fn factorial_ratio(r: usize, s: i64) -> Q {
    let mut acc = Q::one();
    for i in 0..=r as i64 {
        acc *= Q::new(factorial(i as u64), factorial((s + i) as u64));
    }
    acc
}

fn expect_integer(x: Q, what: &str) -> BigInt {
    assert!(x.is_integer(), "{what} is not an integer: {x}");
    x.to_integer()
}

/// `g! ∏_{i=0}^{r} i! / (g − d + r + i)!`, the number of points of `W^r_d`
/// cut out by `ρ` general theta translates (and `|W^r_d|` itself when `ρ = 0`).
pub fn intersection_count(g: usize, r: usize, d: i64) -> Result<BigInt> {
    let s = g as i64 - d + r as i64;
    if s < 0 {
        return Err(Error::Precondition(format!(
            "g − d + r = {s} is negative for (g, r, d) = ({g}, {r}, {d})"
        )));
    }
    if rho(g, r, d) < 0 {
        return Ok(BigInt::zero());
    }
    let x = Q::from_integer(factorial(g as u64)) * factorial_ratio(r, s);
    Ok(expect_integer(x, "intersection count"))
}

/// Number of classes of degree `d` and rank `r` on a generic chain when `ρ = 0`.
pub fn lambda_count(g: usize, r: usize, d: i64) -> Result<BigInt> {
    let rh = rho(g, r, d);
    if rh != 0 {
        return Err(Error::Precondition(format!(
            "lambda counts classes only when ρ = 0; ρ({g}, {r}, {d}) = {rh}"
        )));
    }
    intersection_count(g, r, d)
}

/// `Ψ(r, s) = [(r+1)(s+1)]! ∏_{i=0}^{r} i! / (s+1+i)!`: the number of
/// non-lingering paths in `Z^r` with `(r+1)(s+1)` steps. `s = −1` gives the
/// empty path and `Ψ = 1`.
pub fn psi(r: usize, s: i64) -> BigInt {
    assert!(s >= -1, "Ψ(r, s) needs s ≥ −1");
    let steps = (r as u64 + 1) * (s + 1) as u64;
    let x = Q::from_integer(factorial(steps)) * factorial_ratio(r, s + 1);
    expect_integer(x, "Ψ")
}

/// `binomial(g, ρ) · Ψ(r, g − d + r − 1)`: the number of lingering lattice
/// paths with exactly `ρ` lingering steps.
pub fn cell_census(g: usize, r: usize, d: i64) -> BigInt {
    let rh = rho(g, r, d);
    let s = g as i64 - d + r as i64 - 1;
    if rh < 0 || rh > g as i64 || s < -1 {
        return BigInt::zero();
    }
    binomial(g as u64, rh as u64) * psi(r, s)
}
