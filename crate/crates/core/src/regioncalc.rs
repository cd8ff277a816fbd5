//! Down-sets in the nonnegative orthant indexed by network cuts.
//!
//! A [`Region`] is a finite generator list read as the down-set of the union
//! of its generators, or of their convex hull once convexified. Membership in
//! a convexified region is a small linear feasibility problem; positive
//! answers come with a convex-combination certificate whose support never
//! exceeds `2^m - 1` points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp;
use crate::scalar::Scalar;

/// Number of nontrivial cuts for `m` parties, `2^m - 2`.
pub fn cut_count(m: usize) -> usize {
    (1usize << m) - 2
}

/// Parties (0-based) on the sending side of cut `k`, `1 <= k <= 2^m - 2`.
///
/// Party `i` belongs to `T_k` iff bit `i` of `k` is set.
pub fn cut_members(m: usize, k: usize) -> Vec<usize> {
    (0..m).filter(|&i| (k >> i) & 1 == 1).collect()
}

/// Parties (0-based) on the receiving side of cut `k`.
pub fn cut_complement(m: usize, k: usize) -> Vec<usize> {
    (0..m).filter(|&i| (k >> i) & 1 == 0).collect()
}

/// Human-readable cut name with 1-based parties, e.g. `{1,3}`.
pub fn cut_label(m: usize, k: usize) -> String {
    let parts: Vec<String> = cut_members(m, k).iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn check_parties(m: usize) -> Result<()> {
    if !(2..=16).contains(&m) {
        return Err(Error::Invalid(format!("party count must be between 2 and 16, got {m}")));
    }
    Ok(())
}

/// Point of `R_+^{2^m-2}`; coordinate `k-1` belongs to cut `T_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CutVector<T> {
    m: usize,
    coords: Vec<T>,
}

impl<T: Scalar> CutVector<T> {
    pub fn new(m: usize, coords: Vec<T>) -> Result<Self> {
        check_parties(m)?;
        if coords.len() != cut_count(m) {
            return Err(Error::DimensionMismatch(format!(
                "{} parties need {} cut coordinates, got {}",
                m,
                cut_count(m),
                coords.len()
            )));
        }
        if let Some((index, &value)) = coords
            .iter()
            .enumerate()
            .find(|(_, &c)| !(c >= T::zero()) || !c.is_finite())
        {
            return Err(Error::InvalidEntry {
                index,
                value: value.as_f64(),
            });
        }
        Ok(Self { m, coords })
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::new(m, vec![T::zero(); cut_count(m.max(2))])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Coordinate for cut `k` (1-based).
    pub fn cut(&self, k: usize) -> T {
        self.coords[k - 1]
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::DimensionMismatch(format!(
                "cut vectors of length {} and {}",
                self.coords.len(),
                other.coords.len()
            )));
        }
        Ok(())
    }

    fn add(&self, other: &Self) -> Self {
        Self {
            m: self.m,
            coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| a + b).collect(),
        }
    }

    fn scaled(&self, t: T) -> Self {
        Self {
            m: self.m,
            coords: self.coords.iter().map(|&a| a * t).collect(),
        }
    }
}

/// `a >= b` coordinatewise, allowing `Scalar::SLACK` per coordinate.
pub fn dominates<T: Scalar>(a: &CutVector<T>, b: &CutVector<T>) -> Result<bool> {
    a.check_same(b)?;
    Ok(dominates_slice(&a.coords, &b.coords, T::slack()))
}

fn dominates_slice<T: Scalar>(a: &[T], b: &[T], slack: T) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x + slack >= y)
}

/// Convex weights over generator indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Certificate<T> {
    pub weights: Vec<(usize, T)>,
}

impl<T: Scalar> Certificate<T> {
    pub fn support(&self) -> usize {
        self.weights.len()
    }

    /// `sum_i w_i g_i` over the region's generators.
    pub fn combined(&self, region: &Region<T>) -> Vec<T> {
        let mut out = vec![T::zero(); region.dim()];
        for &(i, w) in &self.weights {
            for (o, &g) in out.iter_mut().zip(region.generators[i].coords()) {
                *o = *o + w * g;
            }
        }
        out
    }
}

/// Outcome of a membership query.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership<T> {
    pub inside: bool,
    pub certificate: Option<Certificate<T>>,
}

impl<T> Membership<T> {
    fn outside() -> Self {
        Self {
            inside: false,
            certificate: None,
        }
    }
}

/// Down-set of a finite union of cut vectors, optionally convexified.
#[derive(Debug, Clone, PartialEq)]
pub struct Region<T> {
    m: usize,
    generators: Vec<CutVector<T>>,
    convexified: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct RegionRepr<T> {
    m: usize,
    convexified: bool,
    generators: Vec<Vec<T>>,
}

impl<T: Scalar> Region<T> {
    pub fn new(m: usize, generators: Vec<CutVector<T>>, convexified: bool) -> Result<Self> {
        check_parties(m)?;
        if let Some(g) = generators.iter().find(|g| g.m != m) {
            return Err(Error::DimensionMismatch(format!(
                "generator for {} parties in a {}-party region",
                g.m, m
            )));
        }
        Ok(Self {
            m,
            generators,
            convexified,
        })
    }

    /// `Π({v})`.
    pub fn single(v: CutVector<T>) -> Self {
        Self {
            m: v.m,
            generators: vec![v],
            convexified: false,
        }
    }

    pub fn from_coords(m: usize, coords: Vec<Vec<T>>, convexified: bool) -> Result<Self> {
        let gens = coords
            .into_iter()
            .map(|c| CutVector::new(m, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, gens, convexified)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        cut_count(self.m)
    }

    pub fn generators(&self) -> &[CutVector<T>] {
        &self.generators
    }

    pub fn is_convexified(&self) -> bool {
        self.convexified
    }

    fn check_point(&self, v: &CutVector<T>) -> Result<()> {
        if v.coords.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} against a region of dimension {}",
                v.coords.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Membership test with a certificate.
    ///
    /// Non-convexified: the first dominating generator. Convexified: convex
    /// weights (support at most `2^m - 1`) whose combination dominates `v`
    /// up to the per-coordinate slack.
    pub fn contains(&self, v: &CutVector<T>) -> Result<Membership<T>> {
        self.check_point(v)?;
        Ok(self.contains_coords(&v.coords))
    }

    fn contains_coords(&self, v: &[T]) -> Membership<T> {
        if let Some(i) = self
            .generators
            .iter()
            .position(|g| dominates_slice(&g.coords, v, T::slack()))
        {
            return Membership {
                inside: true,
                certificate: Some(Certificate {
                    weights: vec![(i, T::one())],
                }),
            };
        }
        if !self.convexified {
            return Membership::outside();
        }
        let target: Vec<T> = v.iter().map(|&x| x - T::slack()).collect();
        match self.convex_weights(&target) {
            Some(weights) => Membership {
                inside: true,
                certificate: Some(Certificate { weights }),
            },
            None => Membership::outside(),
        }
    }

    /// Sparse convex weights dominating `target` exactly (no slack), reduced
    /// to Carathéodory-minimal support.
    fn convex_weights(&self, target: &[T]) -> Option<Vec<(usize, T)>> {
        let pts: Vec<&[T]> = self.generators.iter().map(|g| g.coords()).collect();
        let dense = lp::dominating_weights(&pts, target)?;
        let mut weights: Vec<(usize, T)> = dense.into_iter().enumerate().filter(|&(_, w)| w > T::zero()).collect();
        lp::caratheodory_reduce(&pts, &mut weights);
        // reject numerically dubious solutions
        let check = Certificate {
            weights: weights.clone(),
        }
        .combined(self);
        let tol = T::of(1e-6).max(T::slack());
        if check.iter().zip(target).all(|(&c, &t)| c + tol >= t) {
            Some(weights)
        } else {
            None
        }
    }

    /// Smallest `t >= 0` such that `v - t·1` (floored at zero) is contained.
    /// Zero exactly when `v` is contained.
    pub fn deficit(&self, v: &CutVector<T>) -> Result<T> {
        self.check_point(v)?;
        if self.generators.is_empty() {
            return Err(Error::Invalid("empty region has no deficit".into()));
        }
        if self.contains_coords(&v.coords).inside {
            return Ok(T::zero());
        }
        let shifted = |t: T| -> Vec<T> { v.coords.iter().map(|&x| (x - t).max(T::zero())).collect() };
        let mut lo = T::zero();
        let mut hi = v.coords.iter().copied().fold(T::zero(), T::max);
        for _ in 0..60 {
            let mid = (lo + hi) / T::of(2.0);
            if self.contains_coords(&shifted(mid)).inside {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Generators are all pairwise sums; exact for down-sets of finite unions
    /// and, when both sides are convexified, for their convex hulls.
    pub fn minkowski_sum(&self, other: &Self) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch(format!(
                "regions for {} and {} parties",
                self.m, other.m
            )));
        }
        if self.convexified != other.convexified {
            return Err(Error::Invalid(
                "Minkowski sum needs both regions convexified or neither".into(),
            ));
        }
        let generators = self
            .generators
            .iter()
            .flat_map(|a| other.generators.iter().map(move |b| a.add(b)))
            .collect();
        Ok(Self {
            m: self.m,
            generators,
            convexified: self.convexified,
        })
    }

    pub fn scale(&self, t: T) -> Result<Self> {
        if !(t >= T::zero()) {
            return Err(Error::NegativeScale(t.as_f64()));
        }
        Ok(Self {
            m: self.m,
            generators: self.generators.iter().map(|g| g.scaled(t)).collect(),
            convexified: self.convexified,
        })
    }

    /// Marks the region convex and drops generators already covered by the
    /// others.
    pub fn convexify(&self) -> Self {
        self.convexify_with_map().0
    }

    /// Like [`Region::convexify`], also returning the original index of each
    /// surviving generator.
    pub fn convexify_with_map(&self) -> (Self, Vec<usize>) {
        let mut keep = self.undominated();
        // a generator is redundant when the others dominate it with room to
        // spare, so removing it cannot flip any slack-tolerant answer
        let mut pos = 0;
        while pos < keep.len() && keep.len() > 1 {
            let j = keep[pos];
            let others: Vec<&[T]> = keep
                .iter()
                .filter(|&&i| i != j)
                .map(|&i| self.generators[i].coords())
                .collect();
            let target: Vec<T> = self.generators[j].coords.iter().map(|&x| x + T::slack()).collect();
            if lp::dominating_weights(&others, &target).is_some() {
                keep.remove(pos);
            } else {
                pos += 1;
            }
        }
        let region = Self {
            m: self.m,
            generators: keep.iter().map(|&i| self.generators[i].clone()).collect(),
            convexified: true,
        };
        (region, keep)
    }

    /// Indices of generators not dominated (exactly, without slack) by
    /// another; the first of any set of duplicates is kept.
    pub fn undominated(&self) -> Vec<usize> {
        let gens = &self.generators;
        (0..gens.len())
            .filter(|&j| {
                !gens.iter().enumerate().any(|(i, g)| {
                    i != j
                        && dominates_slice(&g.coords, &gens[j].coords, T::zero())
                        && (g.coords != gens[j].coords || i < j)
                })
            })
            .collect()
    }

    /// Largest value of coordinate `k` (1-based) over the generators.
    pub fn max_coord(&self, k: usize) -> Option<(usize, T)> {
        self.generators
            .iter()
            .enumerate()
            .map(|(i, g)| (i, g.cut(k)))
            .fold(None, |best, (i, x)| match best {
                Some((_, b)) if b >= x => best,
                _ => Some((i, x)),
            })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RegionRepr {
            m: self.m,
            convexified: self.convexified,
            generators: self.generators.iter().map(|g| g.coords.clone()).collect(),
        })
        .expect("region serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: RegionRepr<T> = serde_json::from_str(text).map_err(|e| Error::Invalid(e.to_string()))?;
        Self::from_coords(repr.m, repr.generators, repr.convexified)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(c: &[f64]) -> CutVector<f64> {
        CutVector::new(2, c.to_vec()).unwrap()
    }

    fn region(gens: &[[f64; 2]], convex: bool) -> Region<f64> {
        Region::from_coords(2, gens.iter().map(|g| g.to_vec()).collect(), convex).unwrap()
    }

    #[test]
    fn cut_ordering_is_bitmask() {
        assert_eq!(cut_count(2), 2);
        assert_eq!(cut_count(3), 6);
        assert_eq!(cut_members(2, 1), vec![0]);
        assert_eq!(cut_members(2, 2), vec![1]);
        assert_eq!(cut_members(3, 5), vec![0, 2]);
        assert_eq!(cut_complement(3, 5), vec![1]);
        assert_eq!(cut_label(3, 6), "{2,3}");
    }

    #[test]
    fn cut_vector_invariants() {
        assert!(CutVector::new(2, vec![1.0]).is_err());
        assert!(CutVector::new(2, vec![1.0, -0.1]).is_err());
        assert!(CutVector::<f64>::new(1, vec![]).is_err());
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&cv(&[1.0, 2.0]), &cv(&[1.0, 2.0])).unwrap());
        assert!(!dominates(&cv(&[1.0, 2.0]), &cv(&[2.0, 1.0])).unwrap());
        assert!(dominates(&cv(&[3.0, 3.0]), &cv(&[1.0, 2.0])).unwrap());
        assert!(dominates(&cv(&[1.0, 1.0]), &cv(&[1.0 + 5e-10, 1.0])).unwrap());
        let three = CutVector::new(3, vec![0.0; 6]).unwrap();
        assert!(matches!(
            dominates(&cv(&[0.0, 0.0]), &three),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn convex_membership_examples() {
        let r = region(&[[1.0, 0.0], [0.0, 1.0]], true);
        let yes = r.contains(&cv(&[0.5, 0.5])).unwrap();
        assert!(yes.inside);
        let mut w = yes.certificate.unwrap().weights;
        w.sort_by_key(|&(i, _)| i);
        assert_eq!(w.len(), 2);
        assert!((w[0].1 - 0.5).abs() < 1e-8 && (w[1].1 - 0.5).abs() < 1e-8);
        assert!(!r.contains(&cv(&[0.6, 0.6])).unwrap().inside);

        let single = region(&[[1.0, 0.0]], false);
        assert!(single.contains(&cv(&[0.0, 0.0])).unwrap().inside);
    }

    /// Independent oracle: scan the segment between the two generators at
    /// step 1e-3 and check whether some point dominates the probe.
    #[test]
    fn convex_membership_matches_grid_oracle() {
        let r = region(&[[1.0, 0.0], [0.0, 1.0]], true);
        let oracle = |v: [f64; 2]| {
            (0..=1000).any(|i| {
                let l = i as f64 / 1000.0;
                l + 1e-9 >= v[0] && (1.0 - l) + 1e-9 >= v[1]
            })
        };
        for v in [[0.5, 0.5], [0.6, 0.6], [0.3, 0.7], [0.9, 0.2], [0.0, 1.0], [0.51, 0.5]] {
            assert_eq!(r.contains(&cv(&v)).unwrap().inside, oracle(v), "probe {v:?}");
        }
    }

    #[test]
    fn minkowski_examples() {
        let a = region(&[[1.0, 2.0]], false);
        let b = region(&[[2.0, 1.0]], false);
        let s = a.minkowski_sum(&b).unwrap();
        assert_eq!(s.generators()[0].coords(), &[3.0, 3.0]);

        let zero = region(&[[0.0, 0.0]], false);
        let r = region(&[[1.0, 0.5], [0.2, 0.7]], false);
        assert_eq!(zero.minkowski_sum(&r).unwrap(), r);

        let u = region(&[[1.0, 0.0], [0.0, 1.0]], false);
        let v = region(&[[1.0, 1.0]], false);
        let coords: Vec<Vec<f64>> = u
            .minkowski_sum(&v)
            .unwrap()
            .generators()
            .iter()
            .map(|g| g.coords().to_vec())
            .collect();
        assert_eq!(coords, vec![vec![2.0, 1.0], vec![1.0, 2.0]]);

        assert!(u.minkowski_sum(&u.convexify()).is_err());
    }

    #[test]
    fn scale_examples() {
        let r = region(&[[1.0, 2.0]], false);
        assert_eq!(r.scale(1.0).unwrap(), r);
        assert_eq!(r.scale(0.0).unwrap().generators()[0].coords(), &[0.0, 0.0]);
        assert_eq!(r.scale(2.0).unwrap().generators()[0].coords(), &[2.0, 4.0]);
        assert_eq!(r.scale(-1.0), Err(Error::NegativeScale(-1.0)));
    }

    #[test]
    fn convexify_prunes_interior_point() {
        let r = region(&[[1.0, 0.0], [0.0, 1.0], [0.4, 0.4]], false);
        let (c, kept) = r.convexify_with_map();
        assert!(c.is_convexified());
        assert_eq!(kept, vec![0, 1]);
        let single = region(&[[0.3, 0.8]], false).convexify();
        assert_eq!(single.generators().len(), 1);
    }

    #[test]
    fn convexify_keeps_extreme_points_and_dedups() {
        let r = region(&[[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.6, 0.6]], false);
        let (_, kept) = r.convexify_with_map();
        assert_eq!(kept, vec![0, 2, 3]);
    }

    #[test]
    fn deficit_measures_uniform_shortfall() {
        let r = region(&[[1.0, 0.0]], true);
        assert_eq!(r.deficit(&cv(&[0.5, 0.0])).unwrap(), 0.0);
        let d = r.deficit(&cv(&[2.0, 0.0])).unwrap();
        assert!((d - 1.0).abs() < 1e-8);
    }

    #[test]
    fn json_roundtrip_format() {
        let r = region(&[[1.0, 0.5]], true);
        let text = r.to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["m"], 2);
        assert_eq!(v["convexified"], true);
        assert_eq!(v["generators"][0][1], 0.5);
        assert_eq!(Region::<f64>::from_json(&text).unwrap(), r);
        assert!(Region::<f64>::from_json(r#"{"m":2,"convexified":false,"generators":[[1.0]]}"#).is_err());
    }
}
