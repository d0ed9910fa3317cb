//! The tropical theta divisor `Θ = W^0_{g−1}(Γ)`, its translates, and their
//! transverse intersections.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::brill_noether::{enumerate_cells, TorusCell};
use crate::chain::{rho, ChainOfLoops};
use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::jacobian::{abel_jacobi_divisor, is_effective_class, JacobianPoint, PicPoint};
use crate::rational::{format_q, modulo, serde_q, Q};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub e: Divisor,
    pub e_prime: Divisor,
}

/// `Θ + shift`: a class `p` lies on it iff `p − shift` is effective of degree
/// `g − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaTranslate {
    pub shift: PicPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl ThetaTranslate {
    pub fn zero(g: usize) -> Self {
        Self::from_shift(PicPoint::new(0, JacobianPoint::zero(g)))
    }

    pub fn from_shift(shift: PicPoint) -> Self {
        ThetaTranslate {
            shift,
            provenance: None,
        }
    }

    /// `Θ + [E − E′]`.
    pub fn from_divisors(chain: &ChainOfLoops, e: Divisor, e_prime: Divisor) -> Result<Self> {
        let shift = abel_jacobi_divisor(chain, &e)?.sub(chain, &abel_jacobi_divisor(chain, &e_prime)?);
        Ok(ThetaTranslate {
            shift,
            provenance: Some(Provenance { e, e_prime }),
        })
    }

    /// Degree of the classes lying on this translate.
    pub fn ambient_degree(&self, g: usize) -> i64 {
        self.shift.degree + g as i64 - 1
    }
}

/// The coordinate hyperplane `y_coord = value`, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facet {
    pub coord: usize,
    #[serde(with = "serde_q")]
    pub value: Q,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetDescription {
    pub facets: Vec<Facet>,
}

impl FacetDescription {
    pub fn facet(&self, coord: usize) -> &Facet {
        &self.facets[coord - 1]
    }

    pub fn on_some_facet(&self, p: &JacobianPoint) -> bool {
        self.facets.iter().any(|f| p.coord(f.coord) == &f.value)
    }
}

/// Cells of `W^0_d`: a chip on every loop of a `d`-subset, free.
pub fn effective_cells(chain: &ChainOfLoops, d: i64) -> Result<Vec<TorusCell>> {
    enumerate_cells(chain, 0, d)
}

/// The `g` facets of the translate, read off the cells of `W^0_{g−1}`: the
/// cell with loop `k` empty fixes coordinate `k` at `(g − k)·m_k`.
pub fn theta_facets(chain: &ChainOfLoops, translate: &ThetaTranslate) -> Result<FacetDescription> {
    let g = chain.genus();
    check_dimension(g, &translate.shift.point)?;
    let mut facets: Vec<Facet> = Vec::with_capacity(g);
    for cell in effective_cells(chain, g as i64 - 1)? {
        let (&coord, value) = cell
            .fixed
            .iter()
            .next()
            .filter(|_| cell.fixed.len() == 1)
            .ok_or_else(|| Error::Assertion("theta cell is not a coordinate hyperplane".into()))?;
        facets.push(Facet {
            coord,
            value: modulo(&(value + translate.shift.point.coord(coord)), &chain.period(coord)),
            multiplicity: 1,
        });
    }
    facets.sort_by_key(|f| f.coord);
    if facets.len() != g || facets.iter().enumerate().any(|(k, f)| f.coord != k + 1) {
        return Err(Error::Assertion(format!(
            "expected one facet per coordinate, got {}",
            facets.len()
        )));
    }
    Ok(FacetDescription { facets })
}

fn check_dimension(g: usize, p: &JacobianPoint) -> Result<()> {
    if p.coords.len() != g {
        return Err(Error::DimensionMismatch(format!(
            "{} coordinates for genus {g}",
            p.coords.len()
        )));
    }
    Ok(())
}

pub fn contains(chain: &ChainOfLoops, translate: &ThetaTranslate, p: &PicPoint) -> Result<bool> {
    let g = chain.genus();
    check_dimension(g, &p.point)?;
    check_dimension(g, &translate.shift.point)?;
    let expected = translate.ambient_degree(g);
    if p.degree != expected {
        return Err(Error::DegreeMismatch {
            expected,
            found: p.degree,
        });
    }
    Ok(is_effective_class(chain, &p.sub(chain, &translate.shift)))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntersectionPoint<P> {
    pub point: P,
    pub mult: u32,
}

/// Two translates sharing a facet value on a coordinate make the
/// intersection non-transverse.
fn check_distinct_values(facets: &[FacetDescription], coord: usize, which: &[usize]) -> Result<()> {
    for (a, &s) in which.iter().enumerate() {
        for &t in &which[a + 1..] {
            if facets[s].facet(coord).value == facets[t].facet(coord).value {
                return Err(Error::Degenerate(format!(
                    "translates {s} and {t} share the facet y_{coord} = {}",
                    format_q(&facets[s].facet(coord).value)
                )));
            }
        }
    }
    Ok(())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn go(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                current.push(k);
                go(n, current, used, out);
                current.pop();
                used[k] = false;
            }
        }
    }
    go(n, &mut current, &mut used, &mut out);
    out
}

fn ensure_no_collisions<P: Ord + Clone>(points: &[IntersectionPoint<P>]) -> Result<()> {
    let distinct: BTreeSet<&P> = points.iter().map(|p| &p.point).collect();
    if distinct.len() != points.len() {
        return Err(Error::Degenerate(
            "two assignments produce the same intersection point".into(),
        ));
    }
    Ok(())
}

/// `g` translates meet in one point per bijection from translates to
/// coordinates; `g!` points of multiplicity 1 when the shifts are general.
pub fn intersect_translates(
    chain: &ChainOfLoops,
    translates: &[ThetaTranslate],
) -> Result<Vec<IntersectionPoint<JacobianPoint>>> {
    let g = chain.genus();
    if translates.len() != g {
        return Err(Error::DimensionMismatch(format!(
            "{} translates for genus {g}",
            translates.len()
        )));
    }
    let degree = translates[0].shift.degree;
    if let Some(t) = translates.iter().find(|t| t.shift.degree != degree) {
        return Err(Error::DegreeMismatch {
            expected: degree,
            found: t.shift.degree,
        });
    }
    let facets = translates
        .iter()
        .map(|t| theta_facets(chain, t))
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<usize> = (0..g).collect();
    for coord in 1..=g {
        check_distinct_values(&facets, coord, &all)?;
    }
    let mut out = Vec::new();
    for sigma in permutations(g) {
        // translate s supplies the facet fixing coordinate sigma[s] + 1
        let mut coords = vec![Q::from_integer(0.into()); g];
        let mut mult = 1;
        for (s, &k) in sigma.iter().enumerate() {
            let f = facets[s].facet(k + 1);
            coords[k] = f.value.clone();
            mult *= f.multiplicity;
        }
        out.push(IntersectionPoint {
            point: JacobianPoint::new(chain, coords)?,
            mult,
        });
    }
    ensure_no_collisions(&out)?;
    out.sort();
    Ok(out)
}

/// Points of `W^r_d ∩ (Θ + s_1) ∩ ⋯ ∩ (Θ + s_ρ)`, cell by cell: each bijection
/// from translates to a cell's free coordinates gives one point.
pub fn intersect_cells_with_translates(
    chain: &ChainOfLoops,
    cells: &[TorusCell],
    translates: &[ThetaTranslate],
) -> Result<Vec<IntersectionPoint<PicPoint>>> {
    let g = chain.genus();
    let facets = translates
        .iter()
        .map(|t| theta_facets(chain, t))
        .collect::<Result<Vec<_>>>()?;
    let n = translates.len();
    let all: Vec<usize> = (0..n).collect();
    let perms = permutations(n);
    let mut out = Vec::new();
    for cell in cells {
        if cell.dimension() != n {
            return Err(Error::DimensionMismatch(format!(
                "cell of dimension {} against {n} translates",
                cell.dimension()
            )));
        }
        let r = cell.path.r();
        if rho(g, r, cell.degree) != n as i64 {
            return Err(Error::DimensionMismatch(format!(
                "{n} translates but rho = {}",
                rho(g, r, cell.degree)
            )));
        }
        for t in translates {
            let expected = t.ambient_degree(g);
            if expected != cell.degree {
                return Err(Error::DegreeMismatch {
                    expected: cell.degree,
                    found: expected,
                });
            }
        }
        for (s, f) in facets.iter().enumerate() {
            for (&i, v) in &cell.fixed {
                if &f.facet(i).value == v {
                    return Err(Error::Degenerate(format!(
                        "translate {s} contains a whole cell through its facet y_{i}"
                    )));
                }
            }
        }
        let free: Vec<usize> = cell.free.iter().copied().collect();
        for &coord in &free {
            check_distinct_values(&facets, coord, &all)?;
        }
        for sigma in &perms {
            let mut coords: Vec<Q> = (1..=g)
                .map(|i| cell.fixed.get(&i).cloned().unwrap_or_default())
                .collect();
            let mut mult = 1;
            for (s, &k) in sigma.iter().enumerate() {
                let f = facets[s].facet(free[k]);
                coords[free[k] - 1] = f.value.clone();
                mult *= f.multiplicity;
            }
            out.push(IntersectionPoint {
                point: PicPoint::new(cell.degree, JacobianPoint::new(chain, coords)?),
                mult,
            });
        }
    }
    ensure_no_collisions(&out)?;
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobian::abel_jacobi_point;
    use crate::divisor::PointOnGamma;
    use crate::rational::{frac, q};
    use crate::sampling::Sampler;

    fn g2() -> ChainOfLoops {
        ChainOfLoops::new(2, vec![q(3), q(5)], vec![q(2), q(1)], vec![q(1)]).unwrap()
    }

    fn shifted(chain: &ChainOfLoops, coords: Vec<Q>) -> ThetaTranslate {
        ThetaTranslate::from_shift(PicPoint::new(0, JacobianPoint::new(chain, coords).unwrap()))
    }

    #[test]
    fn facets_of_zero_translate() {
        let c = g2();
        let f = theta_facets(&c, &ThetaTranslate::zero(2)).unwrap();
        assert_eq!(f.facet(1).value, q(2));
        assert_eq!(f.facet(2).value, q(0));
        assert!(f.facets.iter().all(|f| f.multiplicity == 1));
        let t = shifted(&c, vec![frac(1, 3), q(4)]);
        let f = theta_facets(&c, &t).unwrap();
        assert_eq!(f.facet(1).value, frac(7, 3));
        assert_eq!(f.facet(2).value, q(4));
        let c3 = ChainOfLoops::standard(3, 1);
        assert_eq!(theta_facets(&c3, &ThetaTranslate::zero(3)).unwrap().facets.len(), 3);
    }

    #[test]
    fn membership() {
        let c = g2();
        let zero = ThetaTranslate::zero(2);
        let w1 = PicPoint::new(1, abel_jacobi_point(&c, &PointOnGamma::w(&c, 1)));
        assert!(contains(&c, &zero, &w1).unwrap());
        let off = PicPoint::new(1, JacobianPoint::new(&c, vec![q(1), q(1)]).unwrap());
        assert!(!contains(&c, &zero, &off).unwrap());
        assert!(matches!(
            contains(&c, &zero, &PicPoint::new(2, off.point.clone())),
            Err(Error::DegreeMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn membership_matches_facets() {
        let c = ChainOfLoops::standard(3, 1);
        let mut s = Sampler::with_max_denominator(2, 3);
        for _ in 0..500 {
            let t = ThetaTranslate::from_shift(s.pic_point(&c, 0));
            let f = theta_facets(&c, &t).unwrap();
            let p = s.pic_point(&c, 2);
            assert_eq!(contains(&c, &t, &p).unwrap(), f.on_some_facet(&p.point));
        }
    }

    #[test]
    fn generic_translates_meet_in_g_factorial_points() {
        let c = ChainOfLoops::standard(3, 1);
        let mut s = Sampler::new(4);
        let ts: Vec<_> = (0..3).map(|_| ThetaTranslate::from_shift(s.pic_point(&c, 0))).collect();
        let pts = intersect_translates(&c, &ts).unwrap();
        assert_eq!(pts.len(), 6);
        for p in &pts {
            assert_eq!(p.mult, 1);
            let pic = PicPoint::new(2, p.point.clone());
            assert!(ts.iter().all(|t| contains(&c, t, &pic).unwrap()));
        }
        // translation equivariance
        let shift = s.jacobian_point(&c);
        let moved: Vec<_> = ts
            .iter()
            .map(|t| ThetaTranslate::from_shift(PicPoint::new(0, t.shift.point.add(&c, &shift))))
            .collect();
        let mut expected: Vec<_> = pts.iter().map(|p| p.point.add(&c, &shift)).collect();
        expected.sort();
        let got: Vec<_> = intersect_translates(&c, &moved)
            .unwrap()
            .into_iter()
            .map(|p| p.point)
            .collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn coincident_translates_are_degenerate() {
        let c = g2();
        let ts = vec![ThetaTranslate::zero(2), ThetaTranslate::zero(2)];
        assert!(matches!(intersect_translates(&c, &ts), Err(Error::Degenerate(_))));
        assert!(matches!(
            intersect_translates(&c, &ts[..1]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn cells_against_translates() {
        let c = ChainOfLoops::standard(5, 1);
        let cells = enumerate_cells(&c, 1, 4).unwrap();
        let mut s = Sampler::new(9);
        let t = ThetaTranslate::from_shift(s.pic_point(&c, 0));
        let pts = intersect_cells_with_translates(&c, &cells, &[t]).unwrap();
        assert_eq!(pts.len(), 10);
        let c4 = ChainOfLoops::standard(4, 1);
        let cells = enumerate_cells(&c4, 1, 3).unwrap();
        let pts = intersect_cells_with_translates(&c4, &cells, &[]).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().zip(&cells).all(|(p, cell)| cell.contains(&p.point)));
    }

    #[test]
    fn intersection_json() {
        let c = g2();
        let ts = vec![shifted(&c, vec![frac(1, 2), q(0)]), shifted(&c, vec![q(0), frac(1, 3)])];
        let pts = intersect_translates(&c, &ts).unwrap();
        let json = serde_json::to_value(&pts).unwrap();
        assert_eq!(json[0]["mult"], 1);
        assert!(json[0]["point"]["coords"].is_array());
    }
}
