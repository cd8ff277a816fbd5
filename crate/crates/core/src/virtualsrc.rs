//! Source side of the bound: distortion of a reconstruction, the cut vector
//! of the virtual channel `p(m̂ | w)`, containment verdicts against a cut
//! region, a search for reconstructions that fit, and the distortion repair
//! that trades an `eps` of excess distortion for a small cut increase.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutset::{
    assess, phi_region, simplex_grid, simplex_grid_len, CutAssessment, NetworkSpec, PermissibleSet, PhiRegion,
};
use crate::error::{Error, Result};
use crate::probkit::{decode_index, encode_index, table_len, Channel, JointPmf, Variable};
use crate::regioncalc::CutVector;
use crate::scalar::{binary_entropy, Scalar};

/// Default ceiling on the number of reconstructions a search may visit.
pub const DEFAULT_SEARCH_CAP: u128 = 1_000_000;

/// Name of the source observed at party `i` (0-based).
pub fn source_name(i: usize) -> String {
    format!("W{}", i + 1)
}

/// Name of the reconstruction produced at party `i` (0-based).
pub fn reconstruction_name(i: usize) -> String {
    format!("Mhat{}", i + 1)
}

/// Correlated sources `W1..Wm` and the messages `M_i = f_i(W1..Wm)` each
/// party wants to reconstruct.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec<T> {
    joint: JointPmf<T>,
    message_sizes: Vec<usize>,
    /// `functions[i][w]` is `f_i` at the flat source configuration `w`.
    functions: Vec<Vec<usize>>,
}

impl<T: Scalar> SourceSpec<T> {
    /// `joint` must be over `W1..Wm` in order.
    pub fn new(joint: JointPmf<T>, message_sizes: Vec<usize>, functions: Vec<Vec<usize>>) -> Result<Self> {
        let m = joint.vars().len();
        if m < 2 {
            return Err(Error::Invalid(format!("a source needs at least 2 parties, got {m}")));
        }
        for (i, v) in joint.vars().iter().enumerate() {
            if v.name != source_name(i) {
                return Err(Error::Invalid(format!(
                    "source variable {} must be named {}",
                    i + 1,
                    source_name(i)
                )));
            }
        }
        if message_sizes.len() != m || functions.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{m} sources but {} message alphabets and {} functions",
                message_sizes.len(),
                functions.len()
            )));
        }
        if message_sizes.contains(&0) {
            return Err(Error::EmptyAlphabet);
        }
        let nw = joint.table().len();
        for (i, f) in functions.iter().enumerate() {
            if f.len() != nw {
                return Err(Error::Invalid(format!(
                    "f{} is defined on {} source configurations, expected {nw}",
                    i + 1,
                    f.len()
                )));
            }
            if let Some(&bad) = f.iter().find(|&&s| s >= message_sizes[i]) {
                return Err(Error::Invalid(format!(
                    "f{} takes value {bad} outside its alphabet of size {}",
                    i + 1,
                    message_sizes[i]
                )));
            }
        }
        Ok(Self {
            joint,
            message_sizes,
            functions,
        })
    }

    /// Builds the source law from a table over the given alphabet sizes.
    pub fn from_table(
        source_sizes: &[usize],
        table: Vec<T>,
        message_sizes: Vec<usize>,
        functions: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let vars = source_sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| Variable::new(source_name(i), s))
            .collect();
        Self::new(JointPmf::new(vars, table)?, message_sizes, functions)
    }

    /// Messages given by a function of the source digits.
    pub fn from_map(
        joint: JointPmf<T>,
        message_sizes: Vec<usize>,
        f: impl Fn(usize, &[usize]) -> usize,
    ) -> Result<Self> {
        let sizes = joint.sizes();
        let mut digits = vec![0; sizes.len()];
        let functions = (0..sizes.len())
            .map(|i| {
                (0..joint.table().len())
                    .map(|w| {
                        decode_index(w, &sizes, &mut digits);
                        f(i, &digits)
                    })
                    .collect()
            })
            .collect();
        Self::new(joint, message_sizes, functions)
    }

    pub fn m(&self) -> usize {
        self.message_sizes.len()
    }

    pub fn joint(&self) -> &JointPmf<T> {
        &self.joint
    }

    pub fn source_sizes(&self) -> Vec<usize> {
        self.joint.sizes()
    }

    pub fn message_sizes(&self) -> &[usize] {
        &self.message_sizes
    }

    pub fn functions(&self) -> &[Vec<usize>] {
        &self.functions
    }

    /// `f_i(w)` at a flat source configuration.
    pub fn message(&self, i: usize, w: usize) -> usize {
        self.functions[i][w]
    }

    /// `H(W1..Wm)` in bits.
    pub fn entropy(&self) -> T {
        self.joint.entropy_of(&(0..self.m()).collect::<Vec<_>>())
    }

    fn source_vars(&self) -> Vec<Variable> {
        self.joint.vars().to_vec()
    }

    fn reconstruction_vars(&self) -> Vec<Variable> {
        self.message_sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| Variable::new(reconstruction_name(i), s))
            .collect()
    }

    fn joint_names(&self) -> Vec<String> {
        (0..self.m())
            .map(source_name)
            .chain((0..self.m()).map(reconstruction_name))
            .collect()
    }
}

/// Per-party distortion matrices `Δ_i(m, m̂)` (rows: true message) and
/// targets `D_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DistortionSpec<T> {
    sizes: Vec<usize>,
    matrices: Vec<Vec<T>>,
    targets: Vec<T>,
}

impl<T: Scalar> DistortionSpec<T> {
    /// Matrices are row-major `|M_i| x |M_i|`, nonnegative with zero diagonal.
    pub fn new(sizes: Vec<usize>, matrices: Vec<Vec<T>>, targets: Vec<T>) -> Result<Self> {
        if matrices.len() != sizes.len() || targets.len() != sizes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} alphabets, {} matrices, {} targets",
                sizes.len(),
                matrices.len(),
                targets.len()
            )));
        }
        for (i, (mat, &s)) in matrices.iter().zip(&sizes).enumerate() {
            if mat.len() != s * s {
                return Err(Error::DimensionMismatch(format!(
                    "distortion matrix {} has {} entries, expected {}",
                    i + 1,
                    mat.len(),
                    s * s
                )));
            }
            for (idx, &d) in mat.iter().enumerate() {
                if !d.is_finite() || d < T::zero() {
                    return Err(Error::Invalid(format!(
                        "distortion matrix {} entry ({},{}) must be a nonnegative number, got {d}",
                        i + 1,
                        idx / s + 1,
                        idx % s + 1
                    )));
                }
            }
            for a in 0..s {
                let d = mat[a * s + a];
                if d != T::zero() {
                    return Err(Error::Invalid(format!(
                        "distortion matrix {} violates Δ(m,m)=0 at symbol {}: {d}",
                        i + 1,
                        a + 1
                    )));
                }
            }
        }
        for (i, &d) in targets.iter().enumerate() {
            if !d.is_finite() || d < T::zero() {
                return Err(Error::Invalid(format!(
                    "distortion target {} must be nonnegative, got {d}",
                    i + 1
                )));
            }
        }
        Ok(Self {
            sizes,
            matrices,
            targets,
        })
    }

    /// Hamming distortion on every party.
    pub fn hamming(sizes: &[usize], targets: Vec<T>) -> Result<Self> {
        let matrices = sizes
            .iter()
            .map(|&s| {
                (0..s * s)
                    .map(|idx| if idx / s == idx % s { T::zero() } else { T::one() })
                    .collect()
            })
            .collect();
        Self::new(sizes.to_vec(), matrices, targets)
    }

    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn matrices(&self) -> &[Vec<T>] {
        &self.matrices
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn target(&self, i: usize) -> T {
        self.targets[i]
    }

    /// `Δ_i(m, m̂)`.
    pub fn delta(&self, i: usize, m: usize, mhat: usize) -> T {
        self.matrices[i][m * self.sizes[i] + mhat]
    }

    /// Smallest nonzero entry of `Δ_i`, if any.
    pub fn delta_min(&self, i: usize) -> Option<T> {
        self.matrices[i]
            .iter()
            .copied()
            .filter(|&d| d > T::zero())
            .fold(None, |acc, d| Some(acc.map_or(d, |a: T| a.min(d))))
    }

    /// Largest entry of `Δ_i`.
    pub fn max_entry(&self, i: usize) -> T {
        self.matrices[i].iter().copied().fold(T::zero(), T::max)
    }

    /// Same matrices, new targets.
    pub fn with_targets(&self, targets: Vec<T>) -> Result<Self> {
        Self::new(self.sizes.clone(), self.matrices.clone(), targets)
    }

    fn check_source(&self, src: &SourceSpec<T>) -> Result<()> {
        if self.sizes != src.message_sizes {
            return Err(Error::DimensionMismatch(format!(
                "distortion alphabets {:?} differ from message alphabets {:?}",
                self.sizes, src.message_sizes
            )));
        }
        Ok(())
    }
}

/// A virtual channel `p(m̂1..m̂m | w1..wm)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Reconstruction<T> {
    channel: Channel<T>,
}

impl<T: Scalar> Reconstruction<T> {
    /// The channel must map `W1..Wm` to `Mhat1..Mhatm`.
    pub fn new(channel: Channel<T>) -> Result<Self> {
        let m = channel.inputs().len();
        if channel.outputs().len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{m} sources but {} reconstructions",
                channel.outputs().len()
            )));
        }
        for i in 0..m {
            if channel.inputs()[i].name != source_name(i) || channel.outputs()[i].name != reconstruction_name(i) {
                return Err(Error::Invalid(format!(
                    "party {} must use variables {} and {}",
                    i + 1,
                    source_name(i),
                    reconstruction_name(i)
                )));
            }
        }
        Ok(Self { channel })
    }

    /// Rows indexed by flat source configuration, columns by flat
    /// reconstruction configuration.
    pub fn from_table(src: &SourceSpec<T>, table: Vec<T>) -> Result<Self> {
        Self::new(Channel::new(src.source_vars(), src.reconstruction_vars(), table)?)
    }

    /// Builds each row `p(m̂ | w)` from unnormalized weights over digits.
    pub fn from_weights(src: &SourceSpec<T>, weight: impl Fn(&[usize], &[usize]) -> T) -> Result<Self> {
        Self::new(Channel::from_weights(
            src.source_vars(),
            src.reconstruction_vars(),
            weight,
        )?)
    }

    /// All mass on `map(w digits)`.
    pub fn deterministic(src: &SourceSpec<T>, map: impl Fn(&[usize]) -> Vec<usize>) -> Result<Self> {
        Self::new(Channel::deterministic(
            src.source_vars(),
            src.reconstruction_vars(),
            map,
        )?)
    }

    /// `M̂_i = f_i(W)` for every party.
    pub fn exact(src: &SourceSpec<T>) -> Result<Self> {
        let sizes = src.source_sizes();
        Self::deterministic(src, |w| {
            let flat = encode_index(w, &sizes);
            (0..src.m()).map(|i| src.message(i, flat)).collect()
        })
    }

    /// Fixed symbols regardless of the source.
    pub fn constant(src: &SourceSpec<T>, symbols: &[usize]) -> Result<Self> {
        Self::deterministic(src, |_| symbols.to_vec())
    }

    pub fn channel(&self) -> &Channel<T> {
        &self.channel
    }

    /// `p(w) p(m̂ | w)` over `W1..Wm, Mhat1..Mhatm`.
    pub fn joint(&self, src: &SourceSpec<T>) -> Result<JointPmf<T>> {
        self.check_source(src)?;
        self.channel.compose(src.joint())
    }

    fn check_source(&self, src: &SourceSpec<T>) -> Result<()> {
        if self.channel.inputs() != src.joint().vars() || self.channel.outputs() != src.reconstruction_vars() {
            return Err(Error::DimensionMismatch(
                "reconstruction alphabets do not match the source".into(),
            ));
        }
        Ok(())
    }
}

fn check_joint<T: Scalar>(joint: &JointPmf<T>, src: &SourceSpec<T>) -> Result<()> {
    let names: Vec<String> = src.joint_names();
    let sizes: Vec<usize> = src
        .source_sizes()
        .into_iter()
        .chain(src.message_sizes.iter().copied())
        .collect();
    if joint.names() != names.iter().map(String::as_str).collect::<Vec<_>>() || joint.sizes() != sizes {
        return Err(Error::DimensionMismatch(format!(
            "joint must be over {names:?} with sizes {sizes:?}"
        )));
    }
    Ok(())
}

/// `E[Δ_i(f_i(W), M̂_i)]` for a joint over `W1..Wm, Mhat1..Mhatm`.
pub fn joint_distortion<T: Scalar>(
    joint: &JointPmf<T>,
    src: &SourceSpec<T>,
    dist: &DistortionSpec<T>,
    i: usize,
) -> Result<T> {
    check_joint(joint, src)?;
    dist.check_source(src)?;
    let m = src.m();
    let sizes = joint.sizes();
    let nr: usize = src.message_sizes.iter().product();
    let mut digits = vec![0; sizes.len()];
    let mut acc = T::zero();
    for (idx, &p) in joint.table().iter().enumerate() {
        if p == T::zero() {
            continue;
        }
        decode_index(idx, &sizes, &mut digits);
        let w = idx / nr;
        acc = acc + p * dist.delta(i, src.message(i, w), digits[m + i]);
    }
    Ok(acc)
}

/// Expected distortion of party `i` (0-based) under `p(w) rec(m̂ | w)`.
pub fn expected_distortion<T: Scalar>(
    src: &SourceSpec<T>,
    dist: &DistortionSpec<T>,
    rec: &Reconstruction<T>,
    i: usize,
) -> Result<T> {
    if i >= src.m() {
        return Err(Error::DimensionMismatch(format!("no party {}", i + 1)));
    }
    joint_distortion(&rec.joint(src)?, src, dist, i)
}

/// Expected distortion of every party.
pub fn expected_distortions<T: Scalar>(
    src: &SourceSpec<T>,
    dist: &DistortionSpec<T>,
    rec: &Reconstruction<T>,
) -> Result<Vec<T>> {
    let joint = rec.joint(src)?;
    (0..src.m()).map(|i| joint_distortion(&joint, src, dist, i)).collect()
}

/// Cut values `I(W_T ; M̂_{T^c} | W_{T^c})` of the virtual channel.
pub fn virtual_cut_vector<T: Scalar>(src: &SourceSpec<T>, rec: &Reconstruction<T>) -> Result<CutVector<T>> {
    Ok(crate::cutset::cut_vector_of_joint(&rec.joint(src)?, src.m()))
}

/// Outcome of a containment test for one reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentVerdict<T> {
    pub virtual_cut: CutVector<T>,
    pub distortions: Vec<T>,
    pub assessment: CutAssessment<T>,
}

impl<T> ContainmentVerdict<T> {
    pub fn inside(&self) -> bool {
        self.assessment.inside
    }
}

fn check_distortions<T: Scalar>(dist: &DistortionSpec<T>, distortions: &[T]) -> Result<()> {
    for (i, &d) in distortions.iter().enumerate() {
        if d > dist.target(i) + T::slack() {
            return Err(Error::DistortionViolated {
                party: i + 1,
                actual: d.as_f64(),
                allowed: dist.target(i).as_f64(),
            });
        }
    }
    Ok(())
}

/// Tests the virtual cut vector of `rec` against the convex hull of the cut
/// region of `net` over `psi`.
pub fn containment_check<T: Scalar>(
    src: &SourceSpec<T>,
    dist: &DistortionSpec<T>,
    rec: &Reconstruction<T>,
    net: &NetworkSpec<T>,
    psi: &PermissibleSet<T>,
) -> Result<ContainmentVerdict<T>> {
    containment_check_in(src, dist, rec, &phi_region(net, psi)?.hull())
}

/// [`containment_check`] against a precomputed cut region.
pub fn containment_check_in<T: Scalar>(
    src: &SourceSpec<T>,
    dist: &DistortionSpec<T>,
    rec: &Reconstruction<T>,
    phi: &PhiRegion<T>,
) -> Result<ContainmentVerdict<T>> {
    dist.check_source(src)?;
    if phi.region.m() != src.m() {
        return Err(Error::DimensionMismatch(format!(
            "network has {} parties, source has {}",
            phi.region.m(),
            src.m()
        )));
    }
    let distortions = expected_distortions(src, dist, rec)?;
    check_distortions(dist, &distortions)?;
    let virtual_cut = virtual_cut_vector(src, rec)?;
    let assessment = assess(phi, &virtual_cut)?;
    Ok(ContainmentVerdict {
        virtual_cut,
        distortions,
        assessment,
    })
}

/// Reconstruction search space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Points per probability axis for stochastic reconstructions.
    pub grid: usize,
    /// Only enumerate deterministic maps `w -> m̂`.
    pub deterministic_only: bool,
    /// Ceiling on the number of candidates per family.
    pub cap: u128,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid: 3,
            deterministic_only: false,
            cap: DEFAULT_SEARCH_CAP,
        }
    }
}

/// Which family of reconstructions a candidate comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Deterministic,
    Stochastic,
}

/// Best candidate of a failed search.
#[derive(Debug, Clone, PartialEq)]
pub struct NearMiss<T> {
    pub family: Family,
    pub index: u128,
    pub rec: Reconstruction<T>,
    pub verdict: ContainmentVerdict<T>,
    /// Largest per-cut excess of the virtual cut value over the cut maximum.
    pub worst_violation: T,
}

/// Summary of a search that found nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport<T> {
    pub searched: u128,
    pub distortion_feasible: u128,
    pub families: Vec<Family>,
    pub best: Option<NearMiss<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessOutcome<T> {
    Found {
        family: Family,
        index: u128,
        rec: Reconstruction<T>,
        verdict: ContainmentVerdict<T>,
    },
    NoWitnessAtResolution(SearchReport<T>),
}

/// Lazily indexed family of candidate reconstructions: candidate `idx` picks
/// one row out of `rows` for every source configuration, with the last
/// configuration varying fastest.
struct Candidates<T> {
    family: Family,
    rows: Vec<Vec<T>>,
    configs: usize,
    count: u128,
}

impl<T: Scalar> Candidates<T> {
    fn new(family: Family, rows: Vec<Vec<T>>, configs: usize, cap: u128) -> Result<Self> {
        let base = rows.len() as u128;
        let count = u32::try_from(configs)
            .ok()
            .and_then(|e| base.checked_pow(e))
            .unwrap_or(u128::MAX);
        if count > cap {
            return Err(Error::EnumerationCapExceeded { count, cap });
        }
        Ok(Self {
            family,
            rows,
            configs,
            count,
        })
    }

    fn table(&self, mut idx: u128) -> Vec<T> {
        let base = self.rows.len() as u128;
        let width = self.rows[0].len();
        let mut table = vec![T::zero(); self.configs * width];
        for w in (0..self.configs).rev() {
            let pick = (idx % base) as usize;
            idx /= base;
            table[w * width..(w + 1) * width].copy_from_slice(&self.rows[pick]);
        }
        table
    }
}

enum Eval<T> {
    Infeasible,
    Inside(u128),
    Outside { index: u128, worst: T, deficit: T },
}

fn better<T: Scalar>(a: Eval<T>, b: Eval<T>) -> Eval<T> {
    use Eval::*;
    match (a, b) {
        (Inside(i), Inside(j)) => Inside(i.min(j)),
        (Inside(i), _) | (_, Inside(i)) => Inside(i),
        (Infeasible, x) | (x, Infeasible) => x,
        (a @ Outside { .. }, b @ Outside { .. }) => {
            let key = |e: &Eval<T>| match *e {
                Outside { index, worst, deficit } => (worst, deficit, index),
                _ => unreachable!(),
            };
            if key(&a) <= key(&b) {
                a
            } else {
                b
            }
        }
    }
}

fn worst_violation<T: Scalar>(phi_caps: &[T], v: &CutVector<T>) -> T {
    v.coords()
        .iter()
        .zip(phi_caps)
        .map(|(&x, &c)| x - c)
        .fold(T::neg_infinity(), T::max)
}

/// Searches for a reconstruction meeting the distortion targets whose
/// virtual cut vector lies in the convex hull of the cut region.
///
/// Deterministic maps are tried first; unless `deterministic_only` is set,
/// stochastic reconstructions on the simplex grid follow. Candidates are
/// evaluated in parallel and the first witness in enumeration order wins.
pub fn witness_search<T: Scalar>(
    src: &SourceSpec<T>,
    dist: &DistortionSpec<T>,
    phi: &PhiRegion<T>,
    search: &SearchConfig,
) -> Result<WitnessOutcome<T>> {
    dist.check_source(src)?;
    let hull = phi.hull();
    let caps = hull.cut_capacities();
    let configs = src.joint().table().len();
    let outputs: usize = table_len(src.message_sizes()).ok_or(Error::TableCapExceeded {
        size: usize::MAX,
        cap: crate::probkit::DEFAULT_TABLE_CAP,
    })?;

    let unit_rows = || -> Vec<Vec<T>> {
        (0..outputs)
            .map(|o| {
                (0..outputs)
                    .map(|j| if j == o { T::one() } else { T::zero() })
                    .collect()
            })
            .collect()
    };
    let mut plans = Vec::new();
    if search.deterministic_only {
        plans.push(Candidates::new(
            Family::Deterministic,
            unit_rows(),
            configs,
            search.cap,
        )?);
    } else {
        if search.grid < 2 {
            return Err(Error::BadGrid(search.grid));
        }
        // exhaustive over deterministic maps when affordable, then the grid
        if let Ok(plan) = Candidates::new(Family::Deterministic, unit_rows(), configs, search.cap) {
            plans.push(plan);
        }
        let count = simplex_grid_len(outputs, search.grid);
        if count > search.cap {
            return Err(Error::EnumerationCapExceeded { count, cap: search.cap });
        }
        plans.push(Candidates::new(
            Family::Stochastic,
            simplex_grid(outputs, search.grid),
            configs,
            search.cap,
        )?);
    }
    let families: Vec<Family> = plans.iter().map(|p| p.family).collect();

    let mut searched = 0u128;
    let mut feasible = 0u128;
    let mut best: Option<(Family, u128, T, T)> = None;
    for plan in &plans {
        let count = u64::try_from(plan.count).map_err(|_| Error::EnumerationCapExceeded {
            count: plan.count,
            cap: search.cap,
        })?;
        let evaluate = |idx: u64| -> Result<Eval<T>> {
            let idx = idx as u128;
            let rec = Reconstruction::from_table(src, plan.table(idx))?;
            let verdict = match containment_check_in(src, dist, &rec, &hull) {
                Ok(v) => v,
                Err(Error::DistortionViolated { .. }) => return Ok(Eval::Infeasible),
                Err(e) => return Err(e),
            };
            if verdict.inside() {
                Ok(Eval::Inside(idx))
            } else {
                Ok(Eval::Outside {
                    index: idx,
                    worst: worst_violation(&caps, &verdict.virtual_cut),
                    deficit: verdict.assessment.deficit,
                })
            }
        };
        let (result, n_feasible) = (0..count)
            .into_par_iter()
            .map(|idx| {
                evaluate(idx).map(|e| {
                    let f = u128::from(!matches!(e, Eval::Infeasible));
                    (e, f)
                })
            })
            .try_reduce(|| (Eval::Infeasible, 0), |(a, fa), (b, fb)| Ok((better(a, b), fa + fb)))?;
        searched += plan.count;
        feasible += n_feasible;
        match result {
            Eval::Inside(idx) => {
                // re-verify the winner on its own
                let rec = Reconstruction::from_table(src, plan.table(idx))?;
                let verdict = containment_check_in(src, dist, &rec, phi)?;
                if !verdict.inside() {
                    return Err(Error::Invalid("witness failed independent re-verification".into()));
                }
                return Ok(WitnessOutcome::Found {
                    family: plan.family,
                    index: idx,
                    rec,
                    verdict,
                });
            }
            Eval::Outside { index, worst, deficit } => {
                let replace = best.is_none_or(|(_, _, bw, bd)| worst < bw || (worst == bw && deficit < bd));
                if replace {
                    best = Some((plan.family, index, worst, deficit));
                }
            }
            Eval::Infeasible => {}
        }
    }

    let best = match best {
        Some((family, index, worst, _)) => {
            let plan = plans.iter().find(|p| p.family == family).expect("plan exists");
            let rec = Reconstruction::from_table(src, plan.table(index))?;
            let verdict = containment_check_in(src, dist, &rec, phi)?;
            Some(NearMiss {
                family,
                index,
                rec,
                verdict,
                worst_violation: worst,
            })
        }
        None => None,
    };
    Ok(WitnessOutcome::NoWitnessAtResolution(SearchReport {
        searched,
        distortion_feasible: feasible,
        families,
        best,
    }))
}

// ---------------------------------------------------------------------------
// Distortion repair
// ---------------------------------------------------------------------------

/// Which construction a repair stage used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairCase {
    /// `D_r > 0`: independent coin `Q_r` with `P(Q_r = 0) = eps / (D_r + eps)`.
    Mixing,
    /// `D_r = 0`: `Q_r` is the indicator of zero distortion.
    Indicator,
}

/// What one repair stage did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StageReport<T> {
    /// 1-based party whose reconstruction was replaced.
    pub party: usize,
    pub case: RepairCase,
    pub p_q0: T,
    pub distortion_before: T,
    pub distortion_after: T,
    pub budget: T,
    pub cut_before: Vec<T>,
    pub cut_after: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation<T> {
    pub joint: JointPmf<T>,
    pub stages: Vec<StageReport<T>>,
}

/// Upper bound on the increase of any cut value at stage `r` (0-based).
///
/// With `D_r > 0` this is `H(W) eps / (D_r + eps)`. With `D_r = 0` it is
/// `h(p) + p H(W)`, where `p` is `realized_p0` when given and otherwise the
/// bound `min(eps / δ_min, 1)` (with `h` taken at `min(p, 1/2)`).
pub fn perturbation_mi_budget<T: Scalar>(
    src: &SourceSpec<T>,
    dist: &DistortionSpec<T>,
    eps: T,
    r: usize,
    realized_p0: Option<T>,
) -> Result<T> {
    dist.check_source(src)?;
    check_eps(eps)?;
    if r >= src.m() {
        return Err(Error::DimensionMismatch(format!("no party {}", r + 1)));
    }
    let h_w = src.entropy();
    let d = dist.target(r);
    if d > T::zero() {
        return Ok(h_w * eps / (d + eps));
    }
    let delta_min = dist.delta_min(r).ok_or(Error::DegenerateDistortion(r + 1))?;
    let half = T::of(0.5);
    let (h, p) = match realized_p0 {
        Some(p) => (binary_entropy(p), p),
        None => {
            let p = (eps / delta_min).min(T::one());
            (binary_entropy(p.min(half)), p)
        }
    };
    Ok(h + p * h_w)
}

fn check_eps<T: Scalar>(eps: T) -> Result<()> {
    if !eps.is_finite() || eps < T::zero() {
        return Err(Error::Invalid(format!("eps must be a nonnegative number, got {eps}")));
    }
    Ok(())
}

/// Repairs a joint over `W1..Wm, Mhat1..Mhatm` whose distortions are within
/// `D_r + eps` into one meeting every `D_r`, one party at a time (`r = 1..m`).
///
/// Each stage materializes `Q_r` as an extra axis and sums it out.
pub fn perturb_reconstruction<T: Scalar>(
    joint: &JointPmf<T>,
    src: &SourceSpec<T>,
    dist: &DistortionSpec<T>,
    eps: T,
) -> Result<Perturbation<T>> {
    check_joint(joint, src)?;
    dist.check_source(src)?;
    check_eps(eps)?;
    let m = src.m();
    for r in 0..m {
        let d = joint_distortion(joint, src, dist, r)?;
        if d > dist.target(r) + eps + T::slack() {
            return Err(Error::DistortionViolated {
                party: r + 1,
                actual: d.as_f64(),
                allowed: (dist.target(r) + eps).as_f64(),
            });
        }
    }
    let names = src.joint_names();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let sizes = joint.sizes();
    let nr: usize = src.message_sizes.iter().product();
    let mut current = joint.clone();
    let mut stages = Vec::with_capacity(m);
    for r in 0..m {
        let before = crate::cutset::cut_vector_of_joint(&current, m);
        let distortion_before = joint_distortion(&current, src, dist, r)?;
        let target = dist.target(r);
        let case = if target > T::zero() {
            RepairCase::Mixing
        } else {
            RepairCase::Indicator
        };
        let coin = if case == RepairCase::Mixing {
            eps / (target + eps)
        } else {
            T::zero()
        };
        // extended table over (W, G_r, Q_r); Q_r is the last axis
        let len = current.table().len();
        let mut ext = vec![T::zero(); len * 2];
        let mut digits = vec![0; sizes.len()];
        for (idx, &p) in current.table().iter().enumerate() {
            if p == T::zero() {
                continue;
            }
            decode_index(idx, &sizes, &mut digits);
            let msg = src.message(r, idx / nr);
            let mut repaired = digits.clone();
            repaired[m + r] = msg;
            let fixed = encode_index(&repaired, &sizes);
            match case {
                RepairCase::Mixing => {
                    ext[idx * 2 + 1] = ext[idx * 2 + 1] + p * (T::one() - coin);
                    ext[fixed * 2] = ext[fixed * 2] + p * coin;
                }
                RepairCase::Indicator => {
                    if dist.delta(r, msg, digits[m + r]) == T::zero() {
                        ext[idx * 2 + 1] = ext[idx * 2 + 1] + p;
                    } else {
                        ext[fixed * 2] = ext[fixed * 2] + p;
                    }
                }
            }
        }
        let mut vars = current.vars().to_vec();
        vars.push(Variable::new(format!("Q{}", r + 1), 2));
        let extended = JointPmf::new(vars, ext)?;
        let q_axis = 2 * m;
        let p_q0 = extended.marginal_table(&[q_axis])[0];
        current = extended.marginalize(&name_refs)?;
        let distortion_after = joint_distortion(&current, src, dist, r)?;
        let budget = perturbation_mi_budget(src, dist, eps, r, (case == RepairCase::Indicator).then_some(p_q0))?;
        let after = crate::cutset::cut_vector_of_joint(&current, m);
        stages.push(StageReport {
            party: r + 1,
            case,
            p_q0,
            distortion_before,
            distortion_after,
            budget,
            cut_before: before.into_coords(),
            cut_after: after.into_coords(),
        });
    }
    Ok(Perturbation { joint: current, stages })
}
