//! Randomized checks of the three structural properties of the cut
//! potential: chaining through a relay, nullity of the identity network and
//! monotonicity under per-party degradation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutset::{cut_vector, input_name, NetworkSpec};
use crate::error::{Error, Result};
use crate::probkit::{Channel, JointPmf, Variable};
use crate::regioncalc::{cut_complement, cut_count, cut_members, CutVector, Region};
use crate::scalar::Scalar;

/// Tolerance used by every check.
pub const PROPERTY_TOL: f64 = 1e-9;

/// Number of random probe points per property-1 case.
pub const PROBES_PER_CASE: usize = 10;

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PropertyReport<T> {
    pub holds: bool,
    /// Largest amount by which the left side exceeds the right side (may be
    /// negative when the inequality holds strictly).
    pub worst_violation: T,
    /// Set-level probes that failed (property 1 only).
    pub failed_probes: usize,
}

/// A relay composition: the base network, per-party relay maps
/// `X'_i = g_i(Y_i)`, and a second network driven by the relayed inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCase<T> {
    pub base: NetworkSpec<T>,
    pub second: NetworkSpec<T>,
    /// `relay[i][y]` is `g_i(y)` for party `i`.
    pub relay: Vec<Vec<usize>>,
    /// Law of the base inputs `X1..Xm`.
    pub input: JointPmf<T>,
    /// Additional laws for the second network; the induced law of `X'` is
    /// always included.
    pub extra_second_inputs: Vec<JointPmf<T>>,
}

impl<T: Scalar> PropertyCase<T> {
    fn validate(&self) -> Result<()> {
        let m = self.base.m();
        if self.second.m() != m || self.relay.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "base has {m} parties, second {} and {} relay maps",
                self.second.m(),
                self.relay.len()
            )));
        }
        let y_sizes = self.base.output_sizes();
        let x2_sizes = self.second.input_sizes();
        for (i, g) in self.relay.iter().enumerate() {
            if g.len() != y_sizes[i] || g.iter().any(|&x| x >= x2_sizes[i]) {
                return Err(Error::Invalid(format!(
                    "relay map {} must send each of {} outputs to one of {} inputs",
                    i + 1,
                    y_sizes[i],
                    x2_sizes[i]
                )));
            }
        }
        if self.input.vars() != self.base.input_vars() {
            return Err(Error::DimensionMismatch(
                "input law does not match the base inputs".into(),
            ));
        }
        Ok(())
    }

    /// Joint over `X, Y, X', Y'` (each `m` axes, in that order).
    fn full_joint(&self) -> Result<JointPmf<T>> {
        let m = self.base.m();
        let relayed: Vec<Variable> = (0..m)
            .map(|i| Variable::new(format!("Xr{}", i + 1), self.second.input_sizes()[i]))
            .collect();
        let received: Vec<Variable> = (0..m)
            .map(|i| Variable::new(format!("Yr{}", i + 1), self.second.output_sizes()[i]))
            .collect();
        let relay = Channel::deterministic(self.base.output_vars().to_vec(), relayed.clone(), |y| {
            y.iter().enumerate().map(|(i, &yi)| self.relay[i][yi]).collect()
        })?;
        let second = Channel::new(relayed, received, self.second.channel().table().to_vec())?;
        let xy = self.base.channel().compose(&self.input)?;
        second.compose(&relay.compose(&xy)?)
    }

    /// Law of `X'` induced by the relay, named as the second network's inputs.
    pub fn induced_second_input(&self) -> Result<JointPmf<T>> {
        self.validate()?;
        let m = self.base.m();
        let full = self.full_joint()?;
        let table = full.marginal_table(&(2 * m..3 * m).collect::<Vec<_>>());
        JointPmf::new(self.second.input_vars().to_vec(), table)
    }
}

fn excess<T: Scalar>(lhs: &[T], rhs: &[T]) -> T {
    lhs.iter()
        .zip(rhs)
        .map(|(&a, &b)| a - b)
        .fold(T::neg_infinity(), T::max)
}

fn report<T: Scalar>(worst: T, failed_probes: usize) -> PropertyReport<T> {
    PropertyReport {
        holds: worst <= T::of(PROPERTY_TOL) && failed_probes == 0,
        worst_violation: worst,
        failed_probes,
    }
}

/// Chaining: the cut vector of the composed network (party `i` observes
/// `(Y_i, Y'_i)`) is at most the base cut vector plus the second network's
/// cut vector at the induced input law. Also probes random points of the
/// composed region against the Minkowski sum of the two regions.
pub fn check_property1<T: Scalar>(case: &PropertyCase<T>, rng: &mut impl Rng) -> Result<PropertyReport<T>> {
    case.validate()?;
    let m = case.base.m();
    let full = case.full_joint()?;
    let composed: Vec<T> = (1..=cut_count(m))
        .map(|k| {
            let a = cut_members(m, k);
            let c = cut_complement(m, k);
            let b: Vec<usize> = c.iter().flat_map(|&j| [m + j, 3 * m + j]).collect();
            full.cmi_of(&a, &b, &c).max(T::zero())
        })
        .collect();
    let v1 = cut_vector(&case.base, &case.input)?;
    let induced = case.induced_second_input()?;
    let v2 = cut_vector(&case.second, &induced)?;
    let rhs: Vec<T> = v1.coords().iter().zip(v2.coords()).map(|(&a, &b)| a + b).collect();
    let worst = excess(&composed, &rhs);

    let mut second_gens = vec![v2];
    for p in &case.extra_second_inputs {
        second_gens.push(cut_vector(&case.second, p)?);
    }
    let sum = Region::single(v1).minkowski_sum(&Region::new(m, second_gens, false)?)?;
    let mut failed = 0;
    for _ in 0..PROBES_PER_CASE {
        let probe: Vec<T> = composed.iter().map(|&c| c * T::of(rng.random::<f64>())).collect();
        if !sum.contains(&CutVector::new(m, probe)?)?.inside {
            failed += 1;
        }
    }
    Ok(report(worst, failed))
}

/// Nullity: the identity network has an all-zero cut vector for any input.
pub fn check_property2<T: Scalar>(input: &JointPmf<T>) -> Result<PropertyReport<T>> {
    let sizes = input.sizes();
    let net = NetworkSpec::identity(&sizes)?;
    let named = JointPmf::new(
        (0..sizes.len())
            .map(|i| Variable::new(input_name(i), sizes[i]))
            .collect(),
        input.table().to_vec(),
    )?;
    let v = cut_vector(&net, &named)?;
    let worst = v.coords().iter().map(|c| c.abs()).fold(T::zero(), T::max);
    Ok(report(worst, 0))
}

/// Degradation: per-party post-processing never increases a cut value.
pub fn check_property3<T: Scalar>(
    net: &NetworkSpec<T>,
    post: &[Channel<T>],
    input: &JointPmf<T>,
) -> Result<PropertyReport<T>> {
    let degraded = net.degraded(post)?;
    let before = cut_vector(net, input)?;
    let after = cut_vector(&degraded, input)?;
    Ok(report(excess(after.coords(), before.coords()), 0))
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

/// Seed of case `i` in a suite started from `seed`.
pub fn case_seed(seed: u64, i: u64) -> u64 {
    seed ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Uniform draw from the probability simplex on `n` outcomes.
pub fn random_simplex<T: Scalar>(rng: &mut impl Rng, n: usize) -> Vec<T> {
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| T::of(x / total)).collect()
}

pub fn random_joint<T: Scalar>(rng: &mut impl Rng, vars: Vec<Variable>) -> Result<JointPmf<T>> {
    let n: usize = vars.iter().map(Variable::size).product();
    JointPmf::new(vars, random_simplex(rng, n))
}

/// Channel whose rows are independent uniform draws from the simplex.
pub fn random_channel<T: Scalar>(
    rng: &mut impl Rng,
    inputs: Vec<Variable>,
    outputs: Vec<Variable>,
) -> Result<Channel<T>> {
    let rows: usize = inputs.iter().map(Variable::size).product();
    let cols: usize = outputs.iter().map(Variable::size).product();
    let table = (0..rows).flat_map(|_| random_simplex::<T>(rng, cols)).collect();
    Channel::new(inputs, outputs, table)
}

/// Random network with the given per-party alphabet sizes.
pub fn random_network<T: Scalar>(rng: &mut impl Rng, inputs: &[usize], outputs: &[usize]) -> Result<NetworkSpec<T>> {
    let rows: usize = inputs.iter().product();
    let cols: usize = outputs.iter().product();
    let table = (0..rows).flat_map(|_| random_simplex::<T>(rng, cols)).collect();
    NetworkSpec::from_table(inputs, outputs, table)
}

/// Binary symmetric channel from `Y{i+1}` to `Z{i+1}` with a random
/// crossover probability.
pub fn random_bsc<T: Scalar>(rng: &mut impl Rng, i: usize) -> Result<Channel<T>> {
    let flip = T::of(rng.random::<f64>());
    let table = vec![T::one() - flip, flip, flip, T::one() - flip];
    Channel::new(
        vec![Variable::new(format!("Y{}", i + 1), 2)],
        vec![Variable::new(format!("Z{}", i + 1), 2)],
        table,
    )
}

/// Random `m`-party binary relay case with random relay maps.
pub fn random_property_case<T: Scalar>(rng: &mut impl Rng, m: usize) -> Result<PropertyCase<T>> {
    let bin = vec![2; m];
    let base = random_network(rng, &bin, &bin)?;
    let second = random_network(rng, &bin, &bin)?;
    let relay = (0..m)
        .map(|_| (0..2).map(|_| rng.random_range(0..2)).collect())
        .collect();
    let input = random_joint(rng, base.input_vars().to_vec())?;
    let extra_second_inputs = vec![random_joint(rng, second.input_vars().to_vec())?];
    Ok(PropertyCase {
        base,
        second,
        relay,
        input,
        extra_second_inputs,
    })
}

/// Aggregate result of [`run_property_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub cases: usize,
    pub failures: usize,
    pub worst_violation: f64,
    pub seed: u64,
}

/// Runs all three checks on `cases` random 2-party binary instances. Case
/// `i` draws from its own generator seeded with [`case_seed`], so results do
/// not depend on scheduling.
pub fn run_property_suite(cases: usize, seed: u64) -> Result<SuiteSummary> {
    let results = (0..cases as u64)
        .into_par_iter()
        .map(|i| -> Result<(usize, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(case_seed(seed, i));
            let case = random_property_case::<f64>(&mut rng, 2)?;
            let r1 = check_property1(&case, &mut rng)?;
            let r2 = check_property2(&case.input)?;
            let post = [random_bsc(&mut rng, 0)?, random_bsc(&mut rng, 1)?];
            let r3 = check_property3(&case.base, &post, &case.input)?;
            let reports = [r1, r2, r3];
            let failures = reports.iter().filter(|r| !r.holds).count();
            let worst = reports
                .iter()
                .map(|r| r.worst_violation)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((failures, worst))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteSummary {
        cases,
        failures: results.iter().map(|r| r.0).sum(),
        worst_violation: results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max).max(0.0),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn identity_second_network_adds_nothing() {
        let mut r = rng(1);
        let mut case = random_property_case::<f64>(&mut r, 2).unwrap();
        case.second = NetworkSpec::identity(&[2, 2]).unwrap();
        let rep = check_property1(&case, &mut r).unwrap();
        assert!(rep.holds, "{rep:?}");
        // the composed vector is then exactly the base one
        assert!(rep.worst_violation.abs() < 1e-9);
    }

    #[test]
    fn identity_base_reduces_to_second() {
        let mut r = rng(2);
        let mut case = random_property_case::<f64>(&mut r, 2).unwrap();
        case.base = NetworkSpec::identity(&[2, 2]).unwrap();
        case.relay = vec![vec![0, 1], vec![0, 1]];
        let rep = check_property1(&case, &mut r).unwrap();
        assert!(rep.holds, "{rep:?}");
    }

    #[test]
    fn property1_random_cases() {
        let mut r = rng(3);
        for _ in 0..30 {
            let case = random_property_case::<f64>(&mut r, 2).unwrap();
            let rep = check_property1(&case, &mut r).unwrap();
            assert!(rep.holds, "{rep:?}");
        }
    }

    #[test]
    fn property2_examples() {
        let bits = vec![Variable::new("A", 2), Variable::new("B", 2)];
        let uniform = JointPmf::<f64>::uniform(bits.clone()).unwrap();
        assert!(check_property2(&uniform).unwrap().holds);
        let correlated = JointPmf::<f64>::new(bits, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(check_property2(&correlated).unwrap().holds);
        let mut r = rng(4);
        let three = random_joint::<f64>(&mut r, (0..3).map(|i| Variable::new(input_name(i), 2)).collect()).unwrap();
        let rep = check_property2(&three).unwrap();
        assert!(rep.holds && rep.worst_violation < 1e-9);
    }

    #[test]
    fn property3_examples() {
        let mut r = rng(5);
        let net = random_network::<f64>(&mut r, &[2, 2], &[2, 2]).unwrap();
        let input = random_joint(&mut r, net.input_vars().to_vec()).unwrap();
        let ident: Vec<Channel<f64>> = (0..2)
            .map(|i| {
                Channel::identity(vec![Variable::new(format!("Y{}", i + 1), 2)], &[&format!("Z{}", i + 1)]).unwrap()
            })
            .collect();
        let rep = check_property3(&net, &ident, &input).unwrap();
        assert!(rep.holds && rep.worst_violation.abs() < 1e-12);

        let erase: Vec<Channel<f64>> = (0..2)
            .map(|i| {
                Channel::deterministic(
                    vec![Variable::new(format!("Y{}", i + 1), 2)],
                    vec![Variable::new(format!("Z{}", i + 1), 1)],
                    |_| vec![0],
                )
                .unwrap()
            })
            .collect();
        let degraded = net.degraded(&erase).unwrap();
        assert!(cut_vector(&degraded, &input)
            .unwrap()
            .coords()
            .iter()
            .all(|c| c.abs() < 1e-12));
        assert!(check_property3(&net, &erase, &input).unwrap().holds);
    }

    #[test]
    fn suite_is_seed_deterministic() {
        let a = run_property_suite(12, 7).unwrap();
        let b = run_property_suite(12, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.failures, 0);
        assert_eq!(a.cases, 12);
    }

    #[test]
    fn malformed_case_rejected() {
        let mut r = rng(6);
        let mut case = random_property_case::<f64>(&mut r, 2).unwrap();
        case.relay[0] = vec![0, 5];
        assert!(check_property1(&case, &mut r).is_err());
    }
}
