//! The Abel–Jacobi map into `Jac(Γ) = ∏ R/(ℓ_i + m_i)Z`, based at `v_1`, and
//! its exact inverse on reduced coordinates.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::chain::ChainOfLoops;
use crate::divisor::{Divisor, PointOnGamma, ReducedDivisor};
use crate::error::{Error, Result};
use crate::rational::{modulo, serde_q, Q};

/// Torus coordinates, coordinate `i` normalized into `[0, ℓ_i + m_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JacobianPoint {
    #[serde(with = "serde_q::vec")]
    pub coords: Vec<Q>,
}

impl JacobianPoint {
    pub fn zero(g: usize) -> Self {
        JacobianPoint {
            coords: vec![Q::zero(); g],
        }
    }

    /// Normalizes every coordinate against its loop's period.
    pub fn new(chain: &ChainOfLoops, coords: Vec<Q>) -> Result<Self> {
        if coords.len() != chain.genus() {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for genus {}",
                coords.len(),
                chain.genus()
            )));
        }
        Ok(Self::normalized(chain, coords))
    }

    fn normalized(chain: &ChainOfLoops, coords: Vec<Q>) -> Self {
        let coords = coords
            .iter()
            .enumerate()
            .map(|(k, c)| modulo(c, &chain.period(k + 1)))
            .collect();
        JacobianPoint { coords }
    }

    /// Coordinate `i`, 1-based.
    pub fn coord(&self, i: usize) -> &Q {
        &self.coords[i - 1]
    }

    pub fn add(&self, chain: &ChainOfLoops, other: &JacobianPoint) -> JacobianPoint {
        let sum = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a + b)
            .collect();
        Self::normalized(chain, sum)
    }

    pub fn neg(&self, chain: &ChainOfLoops) -> JacobianPoint {
        Self::normalized(chain, self.coords.iter().map(|a| -a).collect())
    }

    pub fn sub(&self, chain: &ChainOfLoops, other: &JacobianPoint) -> JacobianPoint {
        let diff = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a - b)
            .collect();
        Self::normalized(chain, diff)
    }

    pub fn scale(&self, chain: &ChainOfLoops, k: i64) -> JacobianPoint {
        let k = Q::from_integer(k.into());
        Self::normalized(chain, self.coords.iter().map(|a| a * &k).collect())
    }
}

/// A point of `Pic_d(Γ)`, identified with `Jac(Γ)` through `v_1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PicPoint {
    pub degree: i64,
    #[serde(flatten)]
    pub point: JacobianPoint,
}

impl PicPoint {
    pub fn new(degree: i64, point: JacobianPoint) -> Self {
        PicPoint { degree, point }
    }

    pub fn add(&self, chain: &ChainOfLoops, other: &PicPoint) -> PicPoint {
        PicPoint::new(self.degree + other.degree, self.point.add(chain, &other.point))
    }

    pub fn sub(&self, chain: &ChainOfLoops, other: &PicPoint) -> PicPoint {
        PicPoint::new(self.degree - other.degree, self.point.sub(chain, &other.point))
    }
}

/// `∫_{v_1}^{p} ω` along the path through the bottom edges.
pub fn abel_jacobi_point(chain: &ChainOfLoops, p: &PointOnGamma) -> JacobianPoint {
    let g = chain.genus();
    let mut coords = vec![Q::zero(); g];
    match p {
        PointOnGamma::V1 => {}
        PointOnGamma::Loop { i, x } => {
            for k in 1..*i {
                coords[k - 1] = chain.m(k).clone();
            }
            coords[i - 1] = x.clone();
        }
        PointOnGamma::Bridge { i, .. } => {
            for k in 1..=*i {
                coords[k - 1] = chain.m(k).clone();
            }
        }
    }
    JacobianPoint::normalized(chain, coords)
}

pub fn abel_jacobi_divisor(chain: &ChainOfLoops, divisor: &Divisor) -> Result<PicPoint> {
    divisor.validate(chain)?;
    let mut acc = JacobianPoint::zero(chain.genus());
    for (p, k) in divisor.chips() {
        acc = acc.add(chain, &abel_jacobi_point(chain, p).scale(chain, *k));
    }
    Ok(PicPoint::new(divisor.degree(), acc))
}

/// Closed form: coordinate `i` is `n_i m_i + x_i` where `n_i` counts chips
/// on loops strictly after `i`.
pub fn abel_jacobi(chain: &ChainOfLoops, divisor: &ReducedDivisor) -> PicPoint {
    let g = chain.genus();
    let mut coords = vec![Q::zero(); g];
    let mut later_chips = 0i64;
    for i in (1..=g).rev() {
        coords[i - 1] = chain.m(i) * Q::from_integer(later_chips.into()) + divisor.x(i);
        if divisor.has_chip(i) {
            later_chips += 1;
        }
    }
    PicPoint::new(divisor.degree(), JacobianPoint::normalized(chain, coords))
}

/// The unique reduced divisor of degree `d` whose image is `target`, solved
/// from loop `g` down to loop 1. Total: a negative `d0` marks a class with no
/// effective representative.
pub fn jacobi_invert(chain: &ChainOfLoops, target: &JacobianPoint, d: i64) -> ReducedDivisor {
    let g = chain.genus();
    let mut x = vec![Q::zero(); g];
    let mut later_chips = 0i64;
    for i in (1..=g).rev() {
        let shift = chain.m(i) * Q::from_integer(later_chips.into());
        x[i - 1] = modulo(&(target.coord(i) - shift), &chain.period(i));
        if !x[i - 1].is_zero() {
            later_chips += 1;
        }
    }
    ReducedDivisor {
        d0: d - later_chips,
        x,
    }
}

pub fn is_effective_class(chain: &ChainOfLoops, p: &PicPoint) -> bool {
    jacobi_invert(chain, &p.point, p.degree).d0 >= 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, q};

    fn chain() -> ChainOfLoops {
        // m = (2, 3) to keep m-multiples distinguishable from 1
        ChainOfLoops::new(2, vec![q(5), q(7)], vec![q(2), q(3)], vec![q(1)]).unwrap()
    }

    #[test]
    fn point_images() {
        let c = chain();
        assert_eq!(abel_jacobi_point(&c, &PointOnGamma::V1), JacobianPoint::zero(2));
        assert_eq!(
            abel_jacobi_point(&c, &PointOnGamma::w(&c, 2)).coords,
            vec![q(2), q(3)]
        );
        for t in [frac(1, 2), q(1)] {
            assert_eq!(
                abel_jacobi_point(&c, &PointOnGamma::Bridge { i: 1, t }).coords,
                vec![q(2), q(0)]
            );
        }
    }

    #[test]
    fn reduced_images() {
        let c = chain();
        let zero = ReducedDivisor { d0: 4, x: vec![q(0), q(0)] };
        assert_eq!(abel_jacobi(&c, &zero), PicPoint::new(4, JacobianPoint::zero(2)));
        // (1, (2 m_1, 0)): n_1 = 0
        let k = ReducedDivisor { d0: 1, x: vec![q(4), q(0)] };
        assert_eq!(abel_jacobi(&c, &k).coords_vec(), vec![q(4), q(0)]);
        assert_eq!(abel_jacobi(&c, &k).degree, 2);
        // chip at w_2: n_1 = 1
        let w2 = ReducedDivisor { d0: 0, x: vec![q(0), q(3)] };
        assert_eq!(abel_jacobi(&c, &w2).coords_vec(), vec![q(2), q(3)]);
        assert_eq!(
            abel_jacobi(&c, &w2).point,
            abel_jacobi_point(&c, &PointOnGamma::w(&c, 2))
        );
    }

    #[test]
    fn inversion_examples() {
        let c = chain();
        assert_eq!(
            jacobi_invert(&c, &JacobianPoint::zero(2), 3),
            ReducedDivisor { d0: 3, x: vec![q(0), q(0)] }
        );
        let t = JacobianPoint::new(&c, vec![q(4), q(0)]).unwrap();
        assert_eq!(
            jacobi_invert(&c, &t, 2),
            ReducedDivisor { d0: 1, x: vec![q(4), q(0)] }
        );
        // (m_1, −m_2) = (m_1, ℓ_2) → chip on loop 2 at ℓ_2
        let t = JacobianPoint::new(&c, vec![q(2), q(-3)]).unwrap();
        assert_eq!(t.coords, vec![q(2), q(7)]);
        assert_eq!(
            jacobi_invert(&c, &t, 1),
            ReducedDivisor { d0: 0, x: vec![q(0), q(7)] }
        );
    }

    #[test]
    fn effectivity() {
        let c = chain();
        assert!(is_effective_class(&c, &PicPoint::new(0, JacobianPoint::zero(2))));
        let t = JacobianPoint::new(&c, vec![q(1), frac(9, 4)]).unwrap();
        assert!(!is_effective_class(&c, &PicPoint::new(-1, t.clone())));
        // (m_1, 5 m_2 / 7): x_2 ≠ 0, n_1 = 1, x_1 = 0, d0 = 0
        let t = JacobianPoint::new(&c, vec![q(2), frac(15, 7)]).unwrap();
        let rd = jacobi_invert(&c, &t, 1);
        assert_eq!(rd, ReducedDivisor { d0: 0, x: vec![q(0), frac(15, 7)] });
        assert!(is_effective_class(&c, &PicPoint::new(1, t)));
        // generic point of degree 1 is not effective
        let t = JacobianPoint::new(&c, vec![q(1), q(1)]).unwrap();
        assert!(!is_effective_class(&c, &PicPoint::new(1, t)));
    }

    impl PicPoint {
        fn coords_vec(&self) -> Vec<Q> {
            self.point.coords.clone()
        }
    }
}
