use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::FiniteMetricSpace;

/// Points `1..=n` with `d(j,k) = 3 - |1/j - 1/k|`; base is point `1`.
pub fn build_example1_space<S: Scalar>(n: usize) -> Result<FiniteMetricSpace<S>> {
    if n < 2 {
        return Err(Error::Argument(format!("example 1 needs N >= 2, got {n}")));
    }
    let labels = (1..=n).map(|k| k.to_string()).collect();
    let three = S::from_int(3);
    FiniteMetricSpace::from_fn(labels, 0, |i, j| {
        let diff = S::from_ratio(1, i as i64 + 1) - S::from_ratio(1, j as i64 + 1);
        three.clone() - diff.abs()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Example2Family {
    X,
    Y,
    U,
    V,
}

impl Example2Family {
    pub fn prefix(self) -> &'static str {
        match self {
            Self::X => "x",
            Self::Y => "y",
            Self::U => "u",
            Self::V => "v",
        }
    }
}

/// Index bookkeeping for the four-family space: `x_1..x_n, y_1..y_n,
/// u_1..u_n, v_1..v_n` in that order, 1-based family indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Example2Layout {
    pub n: usize,
}

impl Example2Layout {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    fn at(&self, offset: usize, i: usize) -> usize {
        assert!(i >= 1 && i <= self.n, "family index {i} out of range 1..={}", self.n);
        offset * self.n + i - 1
    }

    pub fn x(&self, i: usize) -> usize {
        self.at(0, i)
    }
    pub fn y(&self, i: usize) -> usize {
        self.at(1, i)
    }
    pub fn u(&self, i: usize) -> usize {
        self.at(2, i)
    }
    pub fn v(&self, i: usize) -> usize {
        self.at(3, i)
    }

    pub fn point(&self, family: Example2Family, i: usize) -> usize {
        match family {
            Example2Family::X => self.x(i),
            Example2Family::Y => self.y(i),
            Example2Family::U => self.u(i),
            Example2Family::V => self.v(i),
        }
    }

    pub fn classify(&self, p: usize) -> (Example2Family, usize) {
        let fam = match p / self.n {
            0 => Example2Family::X,
            1 => Example2Family::Y,
            2 => Example2Family::U,
            3 => Example2Family::V,
            _ => panic!("point {p} outside a layout of size {}", 4 * self.n),
        };
        (fam, p % self.n + 1)
    }

    /// All points whose family index is at most `k`.
    pub fn core(&self, k: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..4 * self.n).filter(|&p| self.classify(p).1 <= k).collect();
        out.sort_unstable();
        out
    }

    pub fn len(&self) -> usize {
        4 * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn distance_is_one(&self, p: usize, q: usize) -> bool {
        use Example2Family::*;
        let (fp, i) = self.classify(p);
        let (fq, j) = self.classify(q);
        let one_way = |fa: Example2Family, a: usize, fb: Example2Family, b: usize| {
            a > b && ((fa == U && matches!(fb, X | U)) || (fa == V && matches!(fb, Y | V)))
        };
        one_way(fp, i, fq, j) || one_way(fq, j, fp, i)
    }
}

/// The four-family space: distance 1 between `u_i` and `x_j, u_j` (and
/// between `v_i` and `y_j, v_j`) when `i > j`, distance 2 otherwise.
/// Base is `x_1`.
pub fn build_example2_space<S: Scalar>(n: usize) -> Result<FiniteMetricSpace<S>> {
    if n == 0 {
        return Err(Error::Argument("example 2 needs N >= 1".into()));
    }
    let layout = Example2Layout::new(n);
    let labels = (0..layout.len())
        .map(|p| {
            let (fam, i) = layout.classify(p);
            format!("{}{}", fam.prefix(), i)
        })
        .collect();
    FiniteMetricSpace::from_fn(labels, layout.x(1), |p, q| {
        if layout.distance_is_one(p, q) {
            S::one()
        } else {
            S::from_int(2)
        }
    })
}

/// Points `p_1..p_{N-2}` followed by the anchors `x`, `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoAnchorLayout {
    pub n: usize,
}

impl TwoAnchorLayout {
    pub fn x(&self) -> usize {
        self.n - 2
    }
    pub fn y(&self) -> usize {
        self.n - 1
    }
    pub fn is_anchor(&self, p: usize) -> bool {
        p >= self.n - 2
    }
    pub fn sites(&self) -> Vec<usize> {
        (0..self.n - 2).collect()
    }
}

/// Distance 1 when exactly one endpoint is an anchor, 2 otherwise.
/// Base is `p_1`.
pub fn build_two_anchor_space<S: Scalar>(n: usize) -> Result<FiniteMetricSpace<S>> {
    if n < 3 {
        return Err(Error::Argument(format!("two-anchor space needs N >= 3, got {n}")));
    }
    let layout = TwoAnchorLayout { n };
    let mut labels: Vec<String> = (1..=n - 2).map(|i| format!("p{i}")).collect();
    labels.push("x".into());
    labels.push("y".into());
    FiniteMetricSpace::from_fn(labels, 0, |i, j| {
        if layout.is_anchor(i) != layout.is_anchor(j) {
            S::one()
        } else {
            S::from_int(2)
        }
    })
}

/// Subset of the real line with the absolute-value metric. Labels are the
/// rendered coordinates; the first coordinate is the base.
pub fn half_line<S: Scalar>(coords: &[S]) -> Result<FiniteMetricSpace<S>> {
    let labels = coords.iter().map(|c| c.render()).collect();
    FiniteMetricSpace::from_fn(labels, 0, |i, j| (coords[i].clone() - coords[j].clone()).abs())
}

/// `n` points pairwise at distance `a`.
pub fn regular_simplex<S: Scalar>(n: usize, a: S) -> Result<FiniteMetricSpace<S>> {
    let labels = (0..n).map(|i| format!("s{i}")).collect();
    FiniteMetricSpace::from_fn(labels, 0, |_, _| a.clone())
}

/// A space carrying pairs `(u_i, v_i)` that satisfy the three separated-pair
/// inequalities at scale `a`, invariant under every swap `u_i <-> v_i`.
#[derive(Debug, Clone)]
pub struct HatSpace<S: Scalar> {
    pub space: FiniteMetricSpace<S>,
    pub pairs: Vec<(usize, usize)>,
    pub a: S,
}

/// `d(u_i, v_i) = a(i+1)/i` for `i >= 2`, `d(u_1, v_1) = a`; points of
/// pairs `i != j` sit at `a(2m+1)/(2m+2)` with `m = min(i, j)`; `extra`
/// further points sit at distance `a` from everything. Base is `u_1`.
pub fn build_hat_space<S: Scalar>(k: usize, a: S, extra: usize) -> Result<HatSpace<S>> {
    if k < 1 {
        return Err(Error::Argument("hat space needs at least one pair".into()));
    }
    if !a.is_positive() {
        return Err(Error::Argument("hat space needs a > 0".into()));
    }
    let mut labels = Vec::with_capacity(2 * k + extra);
    for i in 1..=k {
        labels.push(format!("u{i}"));
        labels.push(format!("v{i}"));
    }
    for e in 1..=extra {
        labels.push(format!("z{e}"));
    }
    let pair_of = |p: usize| if p < 2 * k { Some(p / 2 + 1) } else { None };
    let space = FiniteMetricSpace::from_fn(labels, 0, |p, q| match (pair_of(p), pair_of(q)) {
        (Some(i), Some(j)) if i == j => {
            if i == 1 {
                a.clone()
            } else {
                a.clone() * S::from_ratio(i as i64 + 1, i as i64)
            }
        }
        (Some(i), Some(j)) => {
            let m = i.min(j) as i64;
            a.clone() * S::from_ratio(2 * m + 1, 2 * m + 2)
        }
        _ => a.clone(),
    })?;
    let pairs = (0..k).map(|i| (2 * i, 2 * i + 1)).collect();
    Ok(HatSpace { space, pairs, a })
}

/// Half-line points with pairs `(u_i, v_i)` and pairwise disjoint sets
/// `A_i` satisfying the annulus inequality at `eps[i]`.
#[derive(Debug, Clone)]
pub struct NestedAnnuli<S: Scalar> {
    pub space: FiniteMetricSpace<S>,
    pub pairs: Vec<(usize, usize)>,
    pub sets: Vec<Vec<usize>>,
    pub eps: Vec<S>,
    pub scales: Vec<S>,
}

/// Builds `stages` nested annuli on the half-line.
///
/// Stage 1 is `u_1 = 0`, `v_1 = 1`, `A_1 = [0, 4]`. Stage `i >= 2` uses
/// `eps_i = 2^-(i+1)`, scale `a_i = h_{i-1} 2^(i+1)` where `h_{i-1}` is the
/// outer radius of the previous annulus, `u_i = 5 a_i`, `v_i = 6 a_i` and
/// `A_i = (a_i eps_i, 32 a_i / eps_i]`. Each annulus also gets filler points
/// at `2 a_i` and `10 a_i`, and one point lies beyond the last annulus.
pub fn build_nested_annuli_space<S: Scalar>(stages: usize) -> Result<NestedAnnuli<S>> {
    if stages == 0 {
        return Err(Error::Argument("nested annuli need at least one stage".into()));
    }
    let mut coords: Vec<S> = vec![S::zero(), S::one(), S::from_int(2), S::from_int(3)];
    let mut pairs = vec![(0usize, 1usize)];
    let mut eps = vec![S::inv_pow2(2)];
    let mut scales = vec![S::one()];
    let mut outer = vec![S::from_int(4)];
    for i in 2..=stages {
        let e = S::inv_pow2(i as u32 + 1);
        let a = outer[i - 2].clone() * S::from_int(1i64 << (i + 1));
        let base = coords.len();
        for m in [2, 5, 6, 10] {
            coords.push(a.clone() * S::from_int(m));
        }
        pairs.push((base + 1, base + 2));
        outer.push(a.clone() * S::from_int(32) / e.clone());
        eps.push(e);
        scales.push(a);
    }
    coords.push(outer[stages - 1].clone() * S::from_int(2));
    let space = half_line(&coords)?;
    let sets = (0..stages)
        .map(|i| {
            let (lo, hi) = if i == 0 {
                (None, outer[0].clone())
            } else {
                (Some(outer[i - 1].clone()), outer[i].clone())
            };
            (0..coords.len())
                .filter(|&p| {
                    let c = &coords[p];
                    lo.as_ref().is_none_or(|l| c.greater_than(l)) && c.at_most(&hi)
                })
                .collect()
        })
        .collect();
    Ok(NestedAnnuli {
        space,
        pairs,
        sets,
        eps,
        scales,
    })
}
