//! Channel side of the bound: cut mutual-information vectors of a network,
//! the region they sweep over a permissible set of input laws, time-sharing
//! decompositions of points in its convex hull, and the classical rate check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probkit::{Alphabet, Channel, JointPmf, Variable};
use crate::regioncalc::{cut_complement, cut_count, cut_members, CutVector, Region};
use crate::scalar::Scalar;

/// Default ceiling on the number of enumerated input distributions.
pub const DEFAULT_ENUM_CAP: u128 = 1_000_000;

/// Name of the channel input at party `i` (0-based).
pub fn input_name(i: usize) -> String {
    format!("X{}", i + 1)
}

/// Name of the channel output at party `i` (0-based).
pub fn output_name(i: usize) -> String {
    format!("Y{}", i + 1)
}

/// A discrete memoryless network `q(y1..ym | x1..xm)`.
///
/// Inputs are named `X1..Xm` and outputs `Y1..Ym`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec<T> {
    m: usize,
    channel: Channel<T>,
}

impl<T: Scalar> NetworkSpec<T> {
    /// Wraps a channel whose inputs are `X1..Xm` and outputs `Y1..Ym`.
    pub fn new(channel: Channel<T>) -> Result<Self> {
        let m = channel.inputs().len();
        if m < 2 {
            return Err(Error::Invalid(format!("a network needs at least 2 parties, got {m}")));
        }
        if channel.outputs().len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} inputs but {} outputs",
                m,
                channel.outputs().len()
            )));
        }
        for i in 0..m {
            if channel.inputs()[i].name != input_name(i) || channel.outputs()[i].name != output_name(i) {
                return Err(Error::Invalid(format!(
                    "party {} must use variables {} and {}",
                    i + 1,
                    input_name(i),
                    output_name(i)
                )));
            }
        }
        Ok(Self { m, channel })
    }

    fn vars(prefix: fn(usize) -> String, sizes: &[usize]) -> Result<Vec<Variable>> {
        sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                Ok(Variable {
                    name: prefix(i),
                    alphabet: Alphabet::new(s)?,
                })
            })
            .collect()
    }

    /// Rows are input configurations (row-major over `X1..Xm`), columns output
    /// configurations (row-major over `Y1..Ym`).
    pub fn from_table(input_sizes: &[usize], output_sizes: &[usize], table: Vec<T>) -> Result<Self> {
        Self::new(Channel::new(
            Self::vars(input_name, input_sizes)?,
            Self::vars(output_name, output_sizes)?,
            table,
        )?)
    }

    /// Builds the channel from unnormalized row weights `w(x, y)`.
    pub fn from_weights(
        input_sizes: &[usize],
        output_sizes: &[usize],
        weight: impl Fn(&[usize], &[usize]) -> T,
    ) -> Result<Self> {
        Self::new(Channel::from_weights(
            Self::vars(input_name, input_sizes)?,
            Self::vars(output_name, output_sizes)?,
            weight,
        )?)
    }

    /// Deterministic network `y = map(x)`.
    pub fn deterministic(
        input_sizes: &[usize],
        output_sizes: &[usize],
        map: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        Self::new(Channel::deterministic(
            Self::vars(input_name, input_sizes)?,
            Self::vars(output_name, output_sizes)?,
            map,
        )?)
    }

    /// Every party receives exactly what it sends.
    pub fn identity(sizes: &[usize]) -> Result<Self> {
        Self::deterministic(sizes, sizes, |x| x.to_vec())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn channel(&self) -> &Channel<T> {
        &self.channel
    }

    pub fn input_vars(&self) -> &[Variable] {
        self.channel.inputs()
    }

    pub fn output_vars(&self) -> &[Variable] {
        self.channel.outputs()
    }

    pub fn input_sizes(&self) -> Vec<usize> {
        self.input_vars().iter().map(Variable::size).collect()
    }

    pub fn output_sizes(&self) -> Vec<usize> {
        self.output_vars().iter().map(Variable::size).collect()
    }

    /// Applies per-party post-processors `p(z_i | y_i)`; the result is again a
    /// network whose outputs are the `Z_i` (renamed `Y_i`).
    pub fn degraded(&self, post: &[Channel<T>]) -> Result<Self> {
        if post.len() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "{} post-processors for {} parties",
                post.len(),
                self.m
            )));
        }
        for (i, p) in post.iter().enumerate() {
            if p.inputs().len() != 1 || p.outputs().len() != 1 || p.inputs()[0] != self.output_vars()[i] {
                return Err(Error::Invalid(format!(
                    "post-processor {} must map {} alone to one output",
                    i + 1,
                    output_name(i)
                )));
            }
        }
        let cascade = self.channel.then(&Channel::parallel(post)?)?;
        let out_sizes: Vec<usize> = post.iter().map(|p| p.outputs()[0].size()).collect();
        Self::from_table(&self.input_sizes(), &out_sizes, cascade.table().to_vec())
    }

    fn check_input(&self, input: &JointPmf<T>) -> Result<()> {
        if input.vars() != self.input_vars() {
            return Err(Error::DimensionMismatch(format!(
                "input law over {:?} does not match the network inputs",
                input.names()
            )));
        }
        Ok(())
    }
}

/// Cut values `I(X_T ; Y_{T^c} | X_{T^c})` for every nontrivial cut, in the
/// canonical bitmask order.
pub fn cut_vector<T: Scalar>(net: &NetworkSpec<T>, input: &JointPmf<T>) -> Result<CutVector<T>> {
    net.check_input(input)?;
    let joint = net.channel.compose(input)?;
    Ok(cut_vector_of_joint(&joint, net.m))
}

/// Cut vector of a joint whose first `m` axes are the per-party "inputs" and
/// next `m` axes the per-party "outputs" (in party order).
pub fn cut_vector_of_joint<T: Scalar>(joint: &JointPmf<T>, m: usize) -> CutVector<T> {
    let coords = (1..=cut_count(m))
        .map(|k| {
            let a = cut_members(m, k);
            let c = cut_complement(m, k);
            let b: Vec<usize> = c.iter().map(|&j| m + j).collect();
            joint.cmi_of(&a, &b, &c).max(T::zero())
        })
        .collect();
    CutVector::new(m, coords).expect("cut coordinates are nonnegative")
}

/// Set of admissible input laws for the network.
#[derive(Debug, Clone, PartialEq)]
pub enum PermissibleSet<T> {
    /// An explicit list of input laws over `X1..Xm`.
    Explicit(Vec<JointPmf<T>>),
    /// Every law on the joint input alphabet, sampled on a simplex grid with
    /// `grid` points per probability axis.
    All { grid: usize },
    /// Product laws; each party's marginal sampled on its own simplex grid.
    Independent { grid: usize },
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of points of the simplex grid on `parts` outcomes with
/// resolution `grid`.
pub fn simplex_grid_len(parts: usize, grid: usize) -> u128 {
    let total = (grid - 1) as u128;
    binomial(total + parts as u128 - 1, parts as u128 - 1)
}

/// All compositions of `grid-1` into `parts` nonnegative integers, in
/// lexicographic order, as probability vectors `a / (grid-1)`.
pub fn simplex_grid<T: Scalar>(parts: usize, grid: usize) -> Vec<Vec<T>> {
    let total = grid - 1;
    let denom = T::of_usize(total);
    let mut out = Vec::new();
    let mut current = vec![0usize; parts];
    fn rec<T: Scalar>(pos: usize, left: usize, cur: &mut Vec<usize>, denom: T, out: &mut Vec<Vec<T>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.iter().map(|&a| T::of_usize(a) / denom).collect());
            return;
        }
        for a in 0..=left {
            cur[pos] = a;
            rec(pos + 1, left - a, cur, denom, out);
        }
    }
    rec(0, total, &mut current, denom, &mut out);
    out
}

impl<T: Scalar> PermissibleSet<T> {
    /// Number of laws [`PermissibleSet::enumerate`] would produce.
    pub fn count(&self, net: &NetworkSpec<T>) -> Result<u128> {
        match self {
            Self::Explicit(list) => Ok(list.len() as u128),
            Self::All { grid } => {
                check_grid(*grid)?;
                let k: usize = net.input_sizes().iter().product();
                Ok(simplex_grid_len(k, *grid))
            }
            Self::Independent { grid } => {
                check_grid(*grid)?;
                Ok(net
                    .input_sizes()
                    .iter()
                    .map(|&s| simplex_grid_len(s, *grid))
                    .fold(1u128, u128::saturating_mul))
            }
        }
    }

    /// Materializes the laws in a deterministic order.
    pub fn enumerate(&self, net: &NetworkSpec<T>, cap: u128) -> Result<Vec<JointPmf<T>>> {
        let count = self.count(net)?;
        if count > cap {
            return Err(Error::EnumerationCapExceeded { count, cap });
        }
        let vars = net.input_vars().to_vec();
        match self {
            Self::Explicit(list) => {
                for p in list {
                    net.check_input(p)?;
                }
                Ok(list.clone())
            }
            Self::All { grid } => {
                let k: usize = net.input_sizes().iter().product();
                simplex_grid::<T>(k, *grid)
                    .into_iter()
                    .map(|t| JointPmf::new(vars.clone(), t))
                    .collect()
            }
            Self::Independent { grid } => {
                let sizes = net.input_sizes();
                let per_party: Vec<Vec<Vec<T>>> = sizes.iter().map(|&s| simplex_grid(s, *grid)).collect();
                let lens: Vec<usize> = per_party.iter().map(Vec::len).collect();
                let total: usize = lens.iter().product();
                let mut pick = vec![0usize; sizes.len()];
                let mut out = Vec::with_capacity(total);
                for idx in 0..total {
                    crate::probkit::decode_index(idx, &lens, &mut pick);
                    out.push(JointPmf::from_weights(vars.clone(), |x| {
                        x.iter()
                            .enumerate()
                            .map(|(i, &xi)| per_party[i][pick[i]][xi])
                            .fold(T::one(), |a, b| a * b)
                    })?);
                }
                Ok(out)
            }
        }
    }
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < 2 {
        return Err(Error::BadGrid(grid));
    }
    Ok(())
}

/// Generators of the cut region together with the input law behind each.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiRegion<T> {
    pub region: Region<T>,
    pub inputs: Vec<JointPmf<T>>,
}

impl<T: Scalar> PhiRegion<T> {
    /// Convex hull with redundant generators (and their laws) dropped.
    pub fn hull(&self) -> PhiRegion<T> {
        let (region, kept) = self.region.convexify_with_map();
        PhiRegion {
            region,
            inputs: kept.iter().map(|&i| self.inputs[i].clone()).collect(),
        }
    }

    /// Maximum of cut `k` (1-based) over the generators, with the maximizing
    /// input law.
    pub fn cut_capacity(&self, k: usize) -> Result<(T, &JointPmf<T>)> {
        let max = cut_count(self.region.m());
        if k == 0 || k > max {
            return Err(Error::BadCutIndex { k, max });
        }
        let (i, v) = self
            .region
            .max_coord(k)
            .ok_or_else(|| Error::Invalid("region has no generators".into()))?;
        Ok((v, &self.inputs[i]))
    }

    /// Per-cut maxima.
    pub fn cut_capacities(&self) -> Vec<T> {
        (1..=self.region.dim())
            .map(|k| self.region.max_coord(k).map_or(T::zero(), |(_, v)| v))
            .collect()
    }
}

/// Union over the enumerated permissible laws of the cut-vector down-sets.
/// Generators appear in enumeration order.
pub fn phi_region<T: Scalar>(net: &NetworkSpec<T>, psi: &PermissibleSet<T>) -> Result<PhiRegion<T>> {
    phi_region_capped(net, psi, DEFAULT_ENUM_CAP)
}

pub fn phi_region_capped<T: Scalar>(net: &NetworkSpec<T>, psi: &PermissibleSet<T>, cap: u128) -> Result<PhiRegion<T>> {
    let inputs = psi.enumerate(net, cap)?;
    let generators = inputs
        .par_iter()
        .map(|p| cut_vector(net, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhiRegion {
        region: Region::new(net.m, generators, false)?,
        inputs,
    })
}

/// Maximum of a single cut coordinate over the permissible set.
pub fn cut_capacity<T: Scalar>(net: &NetworkSpec<T>, psi: &PermissibleSet<T>, k: usize) -> Result<T> {
    let phi = phi_region(net, psi)?;
    phi.cut_capacity(k).map(|(v, _)| v)
}

/// A time-sharing law `p(z) q(x|z)` realizing a point of the convex hull.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeShare<T> {
    pub pz: Vec<T>,
    pub qxz: Vec<JointPmf<T>>,
    /// `sum_z p(z) cut_vector(q(x|z))`.
    pub achieved: CutVector<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TimeShareJson<T> {
    pub pz: Vec<T>,
    pub qxz: Vec<Vec<T>>,
}

impl<T: Scalar> TimeShare<T> {
    pub fn to_json_repr(&self) -> TimeShareJson<T> {
        TimeShareJson {
            pz: self.pz.clone(),
            qxz: self.qxz.iter().map(|q| q.table().to_vec()).collect(),
        }
    }
}

/// Writes `v` as a time-sharing over at most `2^m - 1` permissible laws whose
/// averaged cut vector dominates it.
pub fn timeshare_decomposition<T: Scalar>(phi: &PhiRegion<T>, v: &CutVector<T>) -> Result<TimeShare<T>> {
    let convex = if phi.region.is_convexified() {
        phi.region.clone()
    } else {
        Region::new(phi.region.m(), phi.region.generators().to_vec(), true)?
    };
    let membership = convex.contains(v)?;
    let cert = match (membership.inside, membership.certificate) {
        (true, Some(c)) => c,
        _ => return Err(Error::NotContained),
    };
    let achieved = CutVector::new(convex.m(), cert.combined(&convex))?;
    Ok(TimeShare {
        pz: cert.weights.iter().map(|&(_, w)| w).collect(),
        qxz: cert.weights.iter().map(|&(i, _)| phi.inputs[i].clone()).collect(),
        achieved,
    })
}

/// How a target cut vector sits against a (convexified) cut region.
#[derive(Debug, Clone, PartialEq)]
pub struct CutAssessment<T> {
    pub inside: bool,
    /// Cuts (1-based `k`) whose single-cut maximum is below the target.
    pub violated_cuts: Vec<usize>,
    /// Inside: certificate value minus target. Outside: per-cut maximum
    /// minus target.
    pub slack: Vec<T>,
    /// Smallest uniform decrease of the target that makes it contained.
    pub deficit: T,
    pub certificate: Option<TimeShare<T>>,
}

/// Membership of `v` in the convex hull of `phi`, with per-cut diagnostics.
pub fn assess<T: Scalar>(phi: &PhiRegion<T>, v: &CutVector<T>) -> Result<CutAssessment<T>> {
    match timeshare_decomposition(phi, v) {
        Ok(ts) => {
            let slack = ts
                .achieved
                .coords()
                .iter()
                .zip(v.coords())
                .map(|(&a, &b)| a - b)
                .collect();
            Ok(CutAssessment {
                inside: true,
                violated_cuts: vec![],
                slack,
                deficit: T::zero(),
                certificate: Some(ts),
            })
        }
        Err(Error::NotContained) => {
            let caps = phi.cut_capacities();
            let slack: Vec<T> = caps.iter().zip(v.coords()).map(|(&c, &t)| c - t).collect();
            let violated_cuts = slack
                .iter()
                .enumerate()
                .filter(|(_, &s)| s < -T::slack())
                .map(|(i, _)| i + 1)
                .collect();
            let convex = Region::new(phi.region.m(), phi.region.generators().to_vec(), true)?;
            Ok(CutAssessment {
                inside: false,
                violated_cuts,
                slack,
                deficit: convex.deficit(v)?,
                certificate: None,
            })
        }
        Err(e) => Err(e),
    }
}

/// Nonnegative rates `R[i][j]` from party `i` to party `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RateMatrix<T> {
    m: usize,
    rates: Vec<T>,
}

impl<T: Scalar> RateMatrix<T> {
    /// Row-major `m x m` rates; the diagonal is ignored.
    pub fn new(m: usize, rates: Vec<T>) -> Result<Self> {
        if rates.len() != m * m {
            return Err(Error::SizeMismatch {
                expected: m * m,
                got: rates.len(),
            });
        }
        if let Some((index, &r)) = rates.iter().enumerate().find(|(_, &r)| !(r >= T::zero())) {
            return Err(Error::InvalidEntry {
                index,
                value: r.as_f64(),
            });
        }
        Ok(Self { m, rates })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rate(&self, from: usize, to: usize) -> T {
        self.rates[from * self.m + to]
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    /// Total rate crossing each cut, `u_k = sum_{i in T_k, j notin T_k} R[i][j]`.
    pub fn cut_loads(&self) -> Result<CutVector<T>> {
        let coords = (1..=cut_count(self.m))
            .map(|k| {
                let t = cut_members(self.m, k);
                let tc = cut_complement(self.m, k);
                t.iter()
                    .flat_map(|&i| tc.iter().map(move |&j| (i, j)))
                    .map(|(i, j)| self.rate(i, j))
                    .fold(T::zero(), |a, b| a + b)
            })
            .collect();
        CutVector::new(self.m, coords)
    }
}

/// Classical cut-set test of a rate matrix against the convexified region.
pub fn classical_cutset_check<T: Scalar>(rates: &RateMatrix<T>, phi: &PhiRegion<T>) -> Result<CutAssessment<T>> {
    if rates.m != phi.region.m() {
        return Err(Error::DimensionMismatch(format!(
            "rate matrix for {} parties, network has {}",
            rates.m,
            phi.region.m()
        )));
    }
    assess(phi, &rates.cut_loads()?)
}
