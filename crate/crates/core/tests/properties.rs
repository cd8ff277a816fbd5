use cutset_core::cutset::{cut_vector, phi_region, NetworkSpec, PermissibleSet};
use cutset_core::lemmacheck::{random_joint, random_network, random_simplex};
use cutset_core::probkit::{Channel, JointPmf, Variable};
use cutset_core::regioncalc::{cut_complement, cut_count, CutVector, Region};
use cutset_core::virtualsrc::{
    containment_check, perturb_reconstruction, perturbation_mi_budget, DistortionSpec, Reconstruction, SourceSpec,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bits(names: &[&str]) -> Vec<Variable> {
    names.iter().map(|n| Variable::new(*n, 2)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chain_rule(seed in any::<u64>()) {
        let p = random_joint::<f64>(&mut rng(seed), bits(&["A", "B", "C", "D"])).unwrap();
        let whole = p.cmi(&["A"], &["B", "C"], &["D"]).unwrap();
        let parts = p.cmi(&["A"], &["B"], &["D"]).unwrap() + p.cmi(&["A"], &["C"], &["B", "D"]).unwrap();
        prop_assert!((whole - parts).abs() < 1e-9);
    }

    #[test]
    fn data_processing(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_joint::<f64>(&mut r, bits(&["X"])).unwrap();
        let xy = Channel::new(bits(&["X"]), bits(&["Y"]), random_simplex(&mut r, 2).into_iter().chain(random_simplex(&mut r, 2)).collect()).unwrap();
        let yz = Channel::new(bits(&["Y"]), bits(&["Z"]), random_simplex(&mut r, 2).into_iter().chain(random_simplex(&mut r, 2)).collect()).unwrap();
        let joint = yz.compose(&xy.compose(&x).unwrap()).unwrap();
        let ixy = joint.cmi(&["X"], &["Y"], &[]).unwrap();
        let ixz = joint.cmi(&["X"], &["Z"], &[]).unwrap();
        prop_assert!(ixz <= ixy + 1e-12);
        prop_assert!(joint.cmi(&["X"], &["Z"], &["Y"]).unwrap() < 1e-9);
    }

    #[test]
    fn compose_then_marginalize_returns_input(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_network::<f64>(&mut r, &[2, 3], &[2, 2]).unwrap();
        let input = random_joint(&mut r, net.input_vars().to_vec()).unwrap();
        let joint = net.channel().compose(&input).unwrap();
        let back = joint.marginalize(&["X1", "X2"]).unwrap();
        for (a, b) in back.table().iter().zip(input.table()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn region_is_a_down_set(seed in any::<u64>(), convex in any::<bool>()) {
        let mut r = rng(seed);
        let gens: Vec<Vec<f64>> = (0..4).map(|_| (0..6).map(|_| r.random::<f64>()).collect()).collect();
        let region = Region::from_coords(3, gens, convex).unwrap();
        let u: Vec<f64> = (0..6).map(|_| r.random::<f64>()).collect();
        let below: Vec<f64> = u.iter().map(|x| x * r.random::<f64>()).collect();
        if region.contains(&CutVector::new(3, u).unwrap()).unwrap().inside {
            prop_assert!(region.contains(&CutVector::new(3, below).unwrap()).unwrap().inside);
        }
    }

    #[test]
    fn minkowski_sum_commutes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut region = |n: usize| {
            let gens: Vec<Vec<f64>> = (0..n).map(|_| (0..2).map(|_| r.random::<f64>()).collect()).collect();
            Region::from_coords(2, gens, false).unwrap()
        };
        let (a, b) = (region(3), region(2));
        let (ab, ba) = (a.minkowski_sum(&b).unwrap(), b.minkowski_sum(&a).unwrap());
        for _ in 0..50 {
            let p = CutVector::new(2, vec![r.random::<f64>() * 2.0, r.random::<f64>() * 2.0]).unwrap();
            prop_assert_eq!(ab.contains(&p).unwrap().inside, ba.contains(&p).unwrap().inside);
        }
    }

    #[test]
    fn cut_vectors_agree_across_precisions(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_network::<f64>(&mut r, &[2, 2], &[2, 2]).unwrap();
        let input = random_joint::<f64>(&mut r, net.input_vars().to_vec()).unwrap();
        let v64 = cut_vector(&net, &input).unwrap();
        let to32 = |t: &[f64]| t.iter().map(|&x| x as f32).collect::<Vec<f32>>();
        let net32 = NetworkSpec::<f32>::from_table(&[2, 2], &[2, 2], to32(net.channel().table())).unwrap();
        let input32 = JointPmf::<f32>::new(input.vars().to_vec(), to32(input.table())).unwrap();
        let v32 = cut_vector(&net32, &input32).unwrap();
        for (a, b) in v64.coords().iter().zip(v32.coords()) {
            prop_assert!((a - f64::from(*b)).abs() < 1e-3);
        }
    }
}

#[test]
fn grid_refinement_only_grows_the_region() {
    let mut r = rng(11);
    for _ in 0..5 {
        let net = random_network::<f64>(&mut r, &[2, 2], &[2, 2]).unwrap();
        let coarse = phi_region(&net, &PermissibleSet::All { grid: 4 }).unwrap();
        let fine = phi_region(&net, &PermissibleSet::All { grid: 7 }).unwrap().hull();
        for g in coarse.region.generators() {
            assert!(fine.region.contains(g).unwrap().inside);
        }
    }
}

#[test]
fn independent_laws_sit_inside_all_laws() {
    // products of grid-3 marginals have denominator 4, so they lie on the
    // grid-5 lattice of joint laws
    let mut r = rng(12);
    for _ in 0..5 {
        let net = random_network::<f64>(&mut r, &[2, 2], &[2, 2]).unwrap();
        let indep = phi_region(&net, &PermissibleSet::Independent { grid: 3 }).unwrap();
        let all = phi_region(&net, &PermissibleSet::All { grid: 5 }).unwrap().hull();
        for g in indep.region.generators() {
            assert!(all.region.contains(g).unwrap().inside);
        }
        for k in 1..=cut_count(2) {
            assert!(indep.cut_capacity(k).unwrap().0 <= all.cut_capacity(k).unwrap().0 + 1e-12);
        }
    }
}

/// Uniform binary sources, random messages, reconstruction within `level`.
fn repair_instance(r: &mut ChaCha8Rng, target: f64, eps: f64) -> (SourceSpec<f64>, DistortionSpec<f64>, JointPmf<f64>) {
    let joint = JointPmf::uniform(bits(&["W1", "W2"])).unwrap();
    let functions = (0..2).map(|_| (0..4).map(|_| r.random_range(0..2)).collect()).collect();
    let src = SourceSpec::new(joint, vec![2, 2], functions).unwrap();
    let dist = DistortionSpec::hamming(&[2, 2], vec![target, target]).unwrap();
    // flip each reconstruction independently with probability below D + eps
    let flips: Vec<f64> = (0..2).map(|_| r.random::<f64>() * (target + eps)).collect();
    let rec = Reconstruction::from_weights(&src, |w, mh| {
        let flat = w[0] * 2 + w[1];
        (0..2)
            .map(|i| {
                if mh[i] == src.message(i, flat) {
                    1.0 - flips[i]
                } else {
                    flips[i]
                }
            })
            .product()
    })
    .unwrap();
    let j = rec.joint(&src).unwrap();
    (src, dist, j)
}

#[test]
fn repair_is_sound_and_within_budget() {
    let mut r = rng(13);
    for case in 0..60 {
        let target = if case % 2 == 0 { 0.0 } else { 0.15 };
        let eps = [0.1, 0.03, 0.005][case % 3];
        let (src, dist, joint) = repair_instance(&mut r, target, eps);
        let out = perturb_reconstruction(&joint, &src, &dist, eps).unwrap();
        for s in &out.stages {
            let party = s.party - 1;
            assert!(s.distortion_after <= target + 1e-12);
            let budget = perturbation_mi_budget(&src, &dist, eps, party, None).unwrap();
            assert!(s.budget <= budget + 1e-12);
            for k in 1..=cut_count(2) {
                let change = s.cut_after[k - 1] - s.cut_before[k - 1];
                if cut_complement(2, k).contains(&party) {
                    assert!(
                        change <= s.budget + 1e-6,
                        "case {case} stage {} cut {k}: {change} > {}",
                        s.party,
                        s.budget
                    );
                } else {
                    assert!(change.abs() < 1e-12);
                }
            }
        }
    }
}

/// Cycles the symbols of `W1` and reverses both reconstruction alphabets.
#[test]
fn verdict_is_invariant_under_relabeling() {
    let net = NetworkSpec::<f64>::deterministic(&[2, 2], &[2, 2], |x| vec![x[1], x[0]]).unwrap();
    let psi = PermissibleSet::Independent { grid: 6 };
    let mut r = rng(14);
    let mut seen = [0, 0];
    for _ in 0..10 {
        let joint = random_joint::<f64>(&mut r, vec![Variable::new("W1", 3), Variable::new("W2", 2)]).unwrap();
        let src = SourceSpec::from_map(joint.clone(), vec![2, 3], |i, w| if i == 0 { w[1] } else { w[0] }).unwrap();
        let dist = DistortionSpec::hamming(&[2, 3], vec![0.3, 0.3]).unwrap();
        // mostly exact, so the distortion targets hold
        let exact = Reconstruction::exact(&src).unwrap();
        let keep = r.random_range(0.7..1.0);
        let rows: Vec<f64> = (0..6)
            .flat_map(|w| {
                let noise = random_simplex::<f64>(&mut r, 6);
                exact
                    .channel()
                    .row(w)
                    .iter()
                    .zip(noise)
                    .map(|(e, n)| keep * e + (1.0 - keep) * n)
                    .collect::<Vec<_>>()
            })
            .collect();
        let rec = Reconstruction::from_table(&src, rows.clone()).unwrap();
        // relabel W1 by the cycle a -> a+1 and Mhat_i by reversal
        let pw = |w1: usize| (w1 + 1) % 3;
        let pm = [|s: usize| 1 - s, |s: usize| 2 - s];
        let mut jt = vec![0.0; 6];
        for w1 in 0..3 {
            for w2 in 0..2 {
                jt[pw(w1) * 2 + w2] = joint.table()[w1 * 2 + w2];
            }
        }
        let src2 = SourceSpec::from_map(JointPmf::new(joint.vars().to_vec(), jt).unwrap(), vec![2, 3], |i, w| {
            if i == 0 {
                pm[0](w[1])
            } else {
                pm[1]((w[0] + 2) % 3)
            }
        })
        .unwrap();
        let mut rt = vec![0.0; 36];
        for w1 in 0..3 {
            for w2 in 0..2 {
                for m1 in 0..2 {
                    for m2 in 0..3 {
                        let new = (pw(w1) * 2 + w2) * 6 + pm[0](m1) * 3 + pm[1](m2);
                        rt[new] = rows[(w1 * 2 + w2) * 6 + m1 * 3 + m2];
                    }
                }
            }
        }
        let rec2 = Reconstruction::from_table(&src2, rt).unwrap();
        let a = containment_check(&src, &dist, &rec, &net, &psi).unwrap();
        let b = containment_check(&src2, &dist, &rec2, &net, &psi).unwrap();
        assert_eq!(a.inside(), b.inside());
        assert_eq!(a.assessment.violated_cuts, b.assessment.violated_cuts);
        for (x, y) in a.virtual_cut.coords().iter().zip(b.virtual_cut.coords()) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in a.distortions.iter().zip(&b.distortions) {
            assert!((x - y).abs() < 1e-12);
        }
        seen[usize::from(a.inside())] += 1;
    }
    // both verdicts occur
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}
