//! Seeded rational sampling. Every random choice in the crate goes through a
//! [`Sampler`], so identical seeds reproduce identical runs.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::ChainOfLoops;
use crate::divisor::{Divisor, PointOnGamma, ReducedDivisor};
use crate::jacobian::{JacobianPoint, PicPoint};
use crate::rational::{modulo, Q};

pub const DEFAULT_MAX_DENOMINATOR: u32 = 97;

pub struct Sampler {
    rng: ChaCha8Rng,
    max_den: u32,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler::with_max_denominator(seed, DEFAULT_MAX_DENOMINATOR)
    }

    pub fn with_max_denominator(seed: u64, max_den: u32) -> Self {
        assert!(max_den >= 1);
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_den,
        }
    }

    pub fn max_denominator(&self) -> u32 {
        self.max_den
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn int_in(&mut self, lo: i64, hi_inclusive: i64) -> i64 {
        self.rng.gen_range(lo..=hi_inclusive)
    }

    /// A rational in `[0, len)` whose denominator divides some `q ≤ max_den`.
    pub fn rational_below(&mut self, len: &Q) -> Q {
        let den = self.rng.gen_range(1..=self.max_den as i64);
        // numerators range over [0, ⌈len·den⌉)
        let top = (len * Q::from_integer(den.into())).ceil().to_integer();
        let top = i64::try_from(top).expect("sampled range fits in i64").max(1);
        let num = self.rng.gen_range(0..top);
        let x = Q::new(BigInt::from(num), BigInt::from(den));
        if &x >= len {
            modulo(&x, len)
        } else {
            x
        }
    }

    /// A rational in the open interval `(−half_width, half_width)`.
    pub fn symmetric(&mut self, half_width: &Q) -> Q {
        let n = self.max_den as i64;
        let k = self.rng.gen_range(-(n - 1)..=(n - 1));
        half_width * Q::new(BigInt::from(k), BigInt::from(n))
    }

    /// A nonzero rational in `[0, period)` avoiding every listed value.
    pub fn circle_point_avoiding(&mut self, period: &Q, avoid: &[Q]) -> Q {
        loop {
            let x = self.rational_below(period);
            if !x.is_zero() && !avoid.iter().any(|a| modulo(a, period) == x) {
                return x;
            }
        }
    }

    pub fn jacobian_point(&mut self, chain: &ChainOfLoops) -> JacobianPoint {
        let coords = (1..=chain.genus())
            .map(|i| self.rational_below(&chain.period(i)))
            .collect();
        JacobianPoint::new(chain, coords).expect("dimensions match")
    }

    pub fn pic_point(&mut self, chain: &ChainOfLoops, degree: i64) -> PicPoint {
        PicPoint::new(degree, self.jacobian_point(chain))
    }

    /// `n` shifts of the given degree whose `k`-th coordinates are pairwise
    /// distinct for every `k`; colliding draws are rejected.
    pub fn generic_shifts(&mut self, chain: &ChainOfLoops, n: usize, degree: i64) -> Vec<PicPoint> {
        let mut out: Vec<PicPoint> = Vec::with_capacity(n);
        while out.len() < n {
            let p = self.pic_point(chain, degree);
            let clash = out
                .iter()
                .any(|o| o.point.coords.iter().zip(&p.point.coords).any(|(a, b)| a == b));
            if !clash {
                out.push(p);
            }
        }
        out
    }

    /// A chain with lengths in `[1, 10)`, not necessarily generic.
    pub fn chain(&mut self, g: usize) -> ChainOfLoops {
        let length = |s: &mut Self| Q::from_integer(1.into()) + s.rational_below(&Q::from_integer(9.into()));
        let ell = (0..g).map(|_| length(self)).collect();
        let m = (0..g).map(|_| length(self)).collect();
        let bridges = (1..g).map(|_| length(self)).collect();
        ChainOfLoops::new(g, ell, m, bridges).expect("positive lengths")
    }

    /// A reduced divisor with `d0` drawn from `d0_range`; each loop carries a
    /// chip with probability one half.
    pub fn reduced_divisor(
        &mut self,
        chain: &ChainOfLoops,
        d0_range: std::ops::RangeInclusive<i64>,
    ) -> ReducedDivisor {
        let d0 = self.rng.gen_range(d0_range);
        let x = (1..=chain.genus())
            .map(|i| {
                if self.rng.gen_bool(0.5) {
                    self.circle_point_avoiding(&chain.period(i), &[])
                } else {
                    Q::zero()
                }
            })
            .collect();
        ReducedDivisor { d0, x }
    }

    /// A uniformly chosen point of the chain whose offset is a multiple of
    /// `1/scale`. Assumes every length times `scale` is integral.
    pub fn lattice_point(&mut self, chain: &ChainOfLoops, scale: u64) -> PointOnGamma {
        let s = Q::from_integer(BigInt::from(scale));
        let g = chain.genus();
        let mut sizes: Vec<(usize, bool, i64)> = Vec::new();
        for i in 1..=g {
            let n = (chain.period(i) * &s).to_integer();
            sizes.push((i, true, i64::try_from(n).expect("small model")));
            if i < g {
                let b = (chain.bridge(i) * &s).to_integer();
                sizes.push((i, false, i64::try_from(b).expect("small model")));
            }
        }
        let total: i64 = sizes.iter().map(|s| s.2).sum();
        let mut k = self.rng.gen_range(0..total);
        for (i, is_loop, n) in sizes {
            if k < n {
                return if is_loop {
                    let x = Q::new(BigInt::from(k), BigInt::from(scale));
                    if i == 1 && x.is_zero() {
                        PointOnGamma::V1
                    } else {
                        PointOnGamma::Loop { i, x }
                    }
                } else {
                    PointOnGamma::Bridge {
                        i,
                        t: Q::new(BigInt::from(k + 1), BigInt::from(scale)),
                    }
                };
            }
            k -= n;
        }
        unreachable!("k < total")
    }

    /// A divisor of the given degree built from `chips` random lattice points
    /// plus a correcting multiple of a final random point; a few chips may
    /// carry multiplicity −1.
    pub fn lattice_divisor(
        &mut self,
        chain: &ChainOfLoops,
        scale: u64,
        degree: i64,
        chips: usize,
    ) -> Divisor {
        let mut d = Divisor::default();
        let mut total = 0;
        for _ in 0..chips {
            let mult = if self.rng.gen_bool(0.2) { -1 } else { 1 };
            d.add(self.lattice_point(chain, scale), mult);
            total += mult;
        }
        let p = self.lattice_point(chain, scale);
        d.add(p, degree - total);
        d
    }
}
