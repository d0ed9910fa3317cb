//! Points and divisors on the chain, and canonical `v_1`-reduced coordinates.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::chain::ChainOfLoops;
use crate::error::{Error, Result};
use crate::jacobian::{abel_jacobi_divisor, jacobi_invert};
use crate::rational::{format_q, parse_q, serde_q, Q};

/// A point of the chain. Loop and bridge indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "PointJson", into = "PointJson")]
pub enum PointOnGamma {
    V1,
    /// Counterclockwise offset `x ∈ [0, ℓ_i + m_i)` from `v_i`.
    Loop { i: usize, x: Q },
    /// Offset `t ∈ (0, b_i]` from `w_i`; `t = b_i` is `v_{i+1}`.
    Bridge { i: usize, t: Q },
}

#[derive(Serialize, Deserialize)]
struct PointJson {
    kind: String,
    #[serde(default = "one")]
    i: usize,
    #[serde(default = "zero_string")]
    offset: String,
}

fn one() -> usize {
    1
}

fn zero_string() -> String {
    "0/1".into()
}

impl TryFrom<PointJson> for PointOnGamma {
    type Error = Error;

    fn try_from(p: PointJson) -> Result<Self> {
        match p.kind.as_str() {
            "v1" => Ok(PointOnGamma::V1),
            "loop" => Ok(PointOnGamma::Loop {
                i: p.i,
                x: parse_q(&p.offset)?,
            }),
            "bridge" => Ok(PointOnGamma::Bridge {
                i: p.i,
                t: parse_q(&p.offset)?,
            }),
            other => Err(Error::Parse(format!("unknown point kind {other:?}"))),
        }
    }
}

impl From<PointOnGamma> for PointJson {
    fn from(p: PointOnGamma) -> Self {
        let (kind, i, offset) = match p {
            PointOnGamma::V1 => ("v1", 1, Q::zero()),
            PointOnGamma::Loop { i, x } => ("loop", i, x),
            PointOnGamma::Bridge { i, t } => ("bridge", i, t),
        };
        PointJson {
            kind: kind.into(),
            i,
            offset: format_q(&offset),
        }
    }
}

impl PointOnGamma {
    pub fn on_loop(i: usize, x: Q) -> Self {
        PointOnGamma::Loop { i, x }
    }

    pub fn w(chain: &ChainOfLoops, i: usize) -> Self {
        PointOnGamma::Loop {
            i,
            x: chain.m(i).clone(),
        }
    }

    /// `v_i`; for `i ≥ 2` this is spelled `loop(i, 0)`.
    pub fn v(i: usize) -> Self {
        if i == 1 {
            PointOnGamma::V1
        } else {
            PointOnGamma::Loop { i, x: Q::zero() }
        }
    }

    pub fn validate(&self, chain: &ChainOfLoops) -> Result<()> {
        let g = chain.genus();
        match self {
            PointOnGamma::V1 => Ok(()),
            PointOnGamma::Loop { i, x } => {
                if *i == 0 || *i > g {
                    return Err(Error::InvalidPoint(format!("loop index {i} outside 1..={g}")));
                }
                if x.is_negative() || *x >= chain.period(*i) {
                    return Err(Error::InvalidPoint(format!(
                        "offset {} outside [0, {}) on loop {i}",
                        format_q(x),
                        format_q(&chain.period(*i))
                    )));
                }
                Ok(())
            }
            PointOnGamma::Bridge { i, t } => {
                if *i == 0 || *i >= g {
                    return Err(Error::InvalidPoint(format!(
                        "bridge index {i} outside 1..{g}"
                    )));
                }
                if !t.is_positive() || t > chain.bridge(*i) {
                    return Err(Error::InvalidPoint(format!(
                        "offset {} outside (0, {}] on bridge {i}",
                        format_q(t),
                        format_q(chain.bridge(*i))
                    )));
                }
                Ok(())
            }
        }
    }
}

/// A finite formal sum of points with nonzero integer multiplicities.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<(PointOnGamma, i64)>", into = "Vec<(PointOnGamma, i64)>")]
pub struct Divisor {
    chips: Vec<(PointOnGamma, i64)>,
}

impl From<Vec<(PointOnGamma, i64)>> for Divisor {
    fn from(chips: Vec<(PointOnGamma, i64)>) -> Self {
        Divisor::new(chips)
    }
}

impl From<Divisor> for Vec<(PointOnGamma, i64)> {
    fn from(d: Divisor) -> Self {
        d.chips
    }
}

impl Divisor {
    /// Chips at equal points are merged, zero multiplicities dropped, and
    /// points sorted, so equal divisors compare equal.
    pub fn new(chips: Vec<(PointOnGamma, i64)>) -> Self {
        let mut merged: BTreeMap<PointOnGamma, i64> = BTreeMap::new();
        for (p, k) in chips {
            *merged.entry(p).or_insert(0) += k;
        }
        Divisor {
            chips: merged.into_iter().filter(|(_, k)| *k != 0).collect(),
        }
    }

    pub fn point(p: PointOnGamma) -> Self {
        Divisor::new(vec![(p, 1)])
    }

    pub fn chips(&self) -> &[(PointOnGamma, i64)] {
        &self.chips
    }

    pub fn degree(&self) -> i64 {
        self.chips.iter().map(|(_, k)| k).sum()
    }

    pub fn add(&mut self, p: PointOnGamma, mult: i64) {
        let mut chips = std::mem::take(&mut self.chips);
        chips.push((p, mult));
        *self = Divisor::new(chips);
    }

    pub fn plus(mut self, other: &Divisor) -> Divisor {
        self.chips.extend(other.chips.iter().cloned());
        Divisor::new(self.chips)
    }

    pub fn minus(mut self, other: &Divisor) -> Divisor {
        self.chips
            .extend(other.chips.iter().map(|(p, k)| (p.clone(), -k)));
        Divisor::new(self.chips)
    }

    pub fn validate(&self, chain: &ChainOfLoops) -> Result<()> {
        self.chips.iter().try_for_each(|(p, _)| p.validate(chain))
    }
}

/// Canonical coordinates `(d_0, x_1, …, x_g)` of a divisor class.
///
/// `x_i = 0` means the punctured loop `γ_i` carries no chip; otherwise it
/// carries exactly one chip at counterclockwise position `x_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReducedDivisor {
    pub d0: i64,
    #[serde(with = "serde_q::vec")]
    pub x: Vec<Q>,
}

impl ReducedDivisor {
    pub fn new(chain: &ChainOfLoops, d0: i64, x: Vec<Q>) -> Result<Self> {
        let rd = ReducedDivisor { d0, x };
        rd.validate(chain)?;
        Ok(rd)
    }

    pub fn validate(&self, chain: &ChainOfLoops) -> Result<()> {
        if self.x.len() != chain.genus() {
            return Err(Error::DimensionMismatch(format!(
                "reduced divisor has {} coordinates, chain has genus {}",
                self.x.len(),
                chain.genus()
            )));
        }
        for (k, x) in self.x.iter().enumerate() {
            let i = k + 1;
            if x.is_negative() || *x >= chain.period(i) {
                return Err(Error::InvalidPoint(format!(
                    "x_{i} = {} outside [0, {})",
                    format_q(x),
                    format_q(&chain.period(i))
                )));
            }
        }
        Ok(())
    }

    pub fn genus(&self) -> usize {
        self.x.len()
    }

    /// `x_i`, 1-based.
    pub fn x(&self, i: usize) -> &Q {
        &self.x[i - 1]
    }

    pub fn has_chip(&self, i: usize) -> bool {
        !self.x[i - 1].is_zero()
    }

    pub fn chip_count(&self) -> usize {
        self.x.iter().filter(|x| !x.is_zero()).count()
    }

    pub fn degree(&self) -> i64 {
        self.d0 + self.chip_count() as i64
    }

    pub fn is_effective(&self) -> bool {
        self.d0 >= 0
    }

    /// The divisor `d_0·v_1 + Σ_{x_i ≠ 0} (point at x_i on loop i)`.
    pub fn to_divisor(&self) -> Divisor {
        let mut d = Divisor::default();
        d.add(PointOnGamma::V1, self.d0);
        for (k, x) in self.x.iter().enumerate() {
            if !x.is_zero() {
                d.add(PointOnGamma::on_loop(k + 1, x.clone()), 1);
            }
        }
        d
    }
}

/// The unique reduced divisor linearly equivalent to `divisor`.
///
/// Routed through the Abel–Jacobi map: a chip at `v_i` (`i ≥ 2`) and every
/// bridge chip have the same image as `w_{i−1}` (resp. `w_i`), so they are
/// absorbed exactly as the bridge-slide equivalence requires.
pub fn canonicalize(chain: &ChainOfLoops, divisor: &Divisor) -> Result<ReducedDivisor> {
    divisor.validate(chain)?;
    let pic = abel_jacobi_divisor(chain, divisor)?;
    Ok(jacobi_invert(chain, &pic.point, pic.degree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobian::abel_jacobi;
    use crate::rational::{frac, q};

    fn chain() -> ChainOfLoops {
        ChainOfLoops::new(2, vec![q(3), q(5)], vec![q(1), q(1)], vec![q(1)]).unwrap()
    }

    #[test]
    fn degrees() {
        let c = chain();
        let rd = ReducedDivisor::new(&c, 1, vec![q(2), q(0)]).unwrap();
        assert_eq!(rd.degree(), 2);
        assert_eq!(Divisor::default().degree(), 0);
        let d = Divisor::new(vec![
            (PointOnGamma::V1, 3),
            (PointOnGamma::on_loop(2, frac(1, 2)), -1),
        ]);
        assert_eq!(d.degree(), 2);
    }

    #[test]
    fn bridge_chip_slides_to_w1() {
        let c = chain();
        for t in [frac(1, 3), frac(1, 2), q(1)] {
            let d = Divisor::point(PointOnGamma::Bridge { i: 1, t });
            let rd = canonicalize(&c, &d).unwrap();
            assert_eq!(rd, ReducedDivisor::new(&c, 0, vec![q(1), q(0)]).unwrap());
        }
    }

    #[test]
    fn v1_and_loop_chips() {
        let c = chain();
        let rd = canonicalize(&c, &Divisor::point(PointOnGamma::V1)).unwrap();
        assert_eq!(rd, ReducedDivisor::new(&c, 1, vec![q(0), q(0)]).unwrap());
        let rd = canonicalize(&c, &Divisor::point(PointOnGamma::on_loop(2, frac(7, 2)))).unwrap();
        assert_eq!(rd, ReducedDivisor::new(&c, 0, vec![q(0), frac(7, 2)]).unwrap());
    }

    #[test]
    fn chip_at_v2_becomes_w1() {
        let c = chain();
        let rd = canonicalize(&c, &Divisor::point(PointOnGamma::v(2))).unwrap();
        assert_eq!(rd, ReducedDivisor::new(&c, 0, vec![q(1), q(0)]).unwrap());
        // with a zero-length bridge as well
        let c0 = ChainOfLoops::new(2, vec![q(3), q(5)], vec![q(1), q(1)], vec![q(0)]).unwrap();
        let rd = canonicalize(&c0, &Divisor::point(PointOnGamma::v(2))).unwrap();
        assert_eq!(rd.x, vec![q(1), q(0)]);
    }

    #[test]
    fn canonicalize_is_idempotent_and_preserves_image() {
        let c = chain();
        let d = Divisor::new(vec![
            (PointOnGamma::on_loop(1, frac(5, 2)), 2),
            (PointOnGamma::Bridge { i: 1, t: frac(1, 4) }, 1),
            (PointOnGamma::on_loop(2, q(4)), -1),
            (PointOnGamma::V1, 1),
        ]);
        let rd = canonicalize(&c, &d).unwrap();
        assert_eq!(rd.degree(), d.degree());
        assert_eq!(canonicalize(&c, &rd.to_divisor()).unwrap(), rd);
        assert_eq!(
            abel_jacobi(&c, &rd),
            abel_jacobi_divisor(&c, &d).unwrap()
        );
    }

    #[test]
    fn invalid_points_rejected() {
        let c = chain();
        assert!(PointOnGamma::on_loop(1, q(4)).validate(&c).is_err());
        assert!(PointOnGamma::on_loop(3, q(0)).validate(&c).is_err());
        assert!(PointOnGamma::Bridge { i: 1, t: q(0) }.validate(&c).is_err());
        assert!(PointOnGamma::Bridge { i: 1, t: q(2) }.validate(&c).is_err());
        assert!(ReducedDivisor::new(&c, 0, vec![q(0)]).is_err());
    }

    #[test]
    fn json_shapes() {
        let p = PointOnGamma::on_loop(2, frac(1, 2));
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"kind":"loop","i":2,"offset":"1/2"}"#
        );
        let v: PointOnGamma = serde_json::from_str(r#"{"kind":"v1"}"#).unwrap();
        assert_eq!(v, PointOnGamma::V1);
        let d: Divisor =
            serde_json::from_str(r#"[[{"kind":"v1"},3],[{"kind":"bridge","i":1,"offset":"1"},-1]]"#)
                .unwrap();
        assert_eq!(d.degree(), 2);
        let rd = ReducedDivisor {
            d0: 1,
            x: vec![q(2), q(0)],
        };
        assert_eq!(
            serde_json::to_string(&rd).unwrap(),
            r#"{"d0":1,"x":["2/1","0/1"]}"#
        );
    }
}
