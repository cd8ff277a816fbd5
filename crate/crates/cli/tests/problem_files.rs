use cutset_cli::{parse_problem, serialize_problem, ProblemSpec, SearchSettings};
use cutset_core::cutset::{NetworkSpec, PermissibleSet, RateMatrix};
use cutset_core::virtualsrc::{DistortionSpec, Reconstruction, SourceSpec};
use proptest::prelude::*;

fn problem(name: &str) -> String {
    let path = format!("{}/problems/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn bundled_problems_parse() {
    for name in [
        "identity.txt",
        "exchange.txt",
        "exchange4.txt",
        "rates.txt",
        "perturb.txt",
    ] {
        let spec = parse_problem(&problem(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = parse_problem(&serialize_problem(&spec)).unwrap();
        assert_eq!(spec, again, "{name}");
    }
}

#[test]
fn exchange_problem_contents() {
    let spec = parse_problem(&problem("exchange.txt")).unwrap();
    let net = spec.network.unwrap();
    assert_eq!(net.m(), 2);
    assert_eq!(spec.psi, Some(PermissibleSet::All { grid: 5 }));
    let src = spec.source.unwrap();
    assert_eq!(src.functions()[0], vec![0, 1, 0, 1]);
    assert_eq!(src.joint().table(), &[0.25; 4]);
    assert_eq!(spec.distortion.unwrap().targets(), &[0.0, 0.0]);
    assert_eq!(
        spec.search,
        SearchSettings {
            grid: 3,
            deterministic: false,
            cap: 1_000_000
        }
    );
}

const NET: &str = "[network]\nparties 2\ninputs 2 1\noutputs 1 2\nchannel\n";

#[test]
fn unnormalized_row_names_line_and_sum() {
    let text = format!("{NET}1 0\n0.5 0.48\n");
    let err = parse_problem(&text).unwrap_err();
    assert_eq!(err.line, 7);
    assert_eq!(err.column, 1);
    assert!(err.message.contains("channel row 2"), "{err}");
    assert!(err.message.contains("0.98"), "{err}");
}

#[test]
fn negative_entry_is_rejected() {
    let err = parse_problem(&format!("{NET}1 0\n1.5 -0.5\n")).unwrap_err();
    assert!(err.message.contains("negative"), "{err}");
}

#[test]
fn fractions_are_accepted() {
    let spec = parse_problem(&format!("{NET}1/3 2/3\n1 0\n")).unwrap();
    assert_eq!(spec.network.unwrap().channel().table()[0], 1.0 / 3.0);
    assert!(parse_problem(&format!("{NET}1/0 1\n1 0\n")).is_err());
}

#[test]
fn wrong_row_width_points_at_the_row() {
    let err = parse_problem(&format!("{NET}1 0 0\n1 0\n")).unwrap_err();
    assert_eq!((err.line, err.column), (6, 1));
    assert!(err.message.contains("needs 2 entries"), "{err}");
}

#[test]
fn nonzero_distortion_diagonal_is_rejected() {
    let text = "[source]\nalphabets 2 2\njoint 1/4 1/4 1/4 1/4\n\
                [functions]\nmessages 2 2\nf1 0 1 0 1\nf2 0 0 1 1\n\
                [distortion]\ntargets 0 0\ndelta1\n0 1\n1 0\ndelta2\n0 1\n1 0.5\n";
    let err = parse_problem(text).unwrap_err();
    assert_eq!((err.line, err.column), (15, 3));
    assert!(err.message.contains("Δ(m,m)=0"), "{err}");
}

#[test]
fn unknown_names_and_duplicates_are_rejected() {
    assert!(parse_problem("[nework]\n")
        .unwrap_err()
        .message
        .contains("unknown section"));
    assert!(parse_problem(&format!("{NET}1 0\n1 0\nspeed 3\n"))
        .unwrap_err()
        .message
        .contains("unknown key"));
    assert!(parse_problem("parties 2\n")
        .unwrap_err()
        .message
        .contains("before the first section"));
    let twice = format!("{NET}1 0\n1 0\n{NET}1 0\n1 0\n");
    assert!(parse_problem(&twice).unwrap_err().message.contains("twice"));
}

#[test]
fn party_counts_must_agree() {
    let text = format!(
        "{NET}1 0\n1 0\n[source]\nalphabets 2 2 2\njoint {}\n[functions]\nmessages 2 2 2\nf1 {z}\nf2 {z}\nf3 {z}\n",
        ["1/8"; 8].join(" "),
        z = ["0"; 8].join(" ")
    );
    let err = parse_problem(&text).unwrap_err();
    assert!(err.message.contains("3 parties"), "{err}");
}

#[test]
fn psi_requires_a_network() {
    let err = parse_problem("[psi]\nkind all\ngrid 4\n").unwrap_err();
    assert!(err.message.contains("[network]"), "{err}");
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let text = format!("# header\n\n{NET}1 0   # row one\n\n0 1\n");
    assert!(parse_problem(&text).is_ok());
}

fn simplex(weights: &[u32]) -> Vec<f64> {
    let total: f64 = weights.iter().map(|&w| w as f64).sum();
    weights.iter().map(|&w| w as f64 / total).collect()
}

prop_compose! {
    fn arb_spec()(
        sizes in prop::collection::vec(1usize..=2, 2),
        out in prop::collection::vec(1usize..=2, 2),
        grid in 2usize..8,
        explicit in any::<bool>(),
        seed_rows in prop::collection::vec(1u32..1000, 64),
        rates in prop::collection::vec(0u32..50, 4),
        targets in prop::collection::vec(0u32..10, 2),
        eps in prop::option::of(1u32..100),
        search_grid in 2usize..6,
        deterministic in any::<bool>(),
    ) -> ProblemSpec {
        let nx = sizes.iter().product::<usize>();
        let ny = out.iter().product::<usize>();
        let mut it = seed_rows.iter().copied().cycle();
        let mut take = |n: usize, w: usize| -> Vec<f64> {
            (0..n).flat_map(|_| simplex(&(0..w).map(|_| it.next().unwrap()).collect::<Vec<_>>())).collect()
        };
        let net = NetworkSpec::from_table(&sizes, &out, take(nx, ny)).unwrap();
        let psi = if explicit {
            PermissibleSet::Explicit(vec![
                cutset_core::probkit::JointPmf::new(net.input_vars().to_vec(), take(1, nx)).unwrap(),
            ])
        } else {
            PermissibleSet::All { grid }
        };
        let src = SourceSpec::from_table(&[2, 2], take(1, 4), vec![2, 2], vec![vec![0, 1, 0, 1], vec![0, 0, 1, 1]]).unwrap();
        let dist = DistortionSpec::new(
            vec![2, 2],
            vec![vec![0.0, 1.0, 0.5, 0.0], vec![0.0, 0.25, 1.0, 0.0]],
            targets.iter().map(|&t| t as f64 / 10.0).collect(),
        ).unwrap();
        let rec = Reconstruction::from_table(&src, take(4, 4)).unwrap();
        ProblemSpec {
            network: Some(net),
            psi: Some(psi),
            source: Some(src),
            distortion: Some(dist),
            epsilon: eps.map(|e| e as f64 / 1000.0),
            reconstruction: Some(rec),
            rates: Some(RateMatrix::new(2, rates.iter().map(|&r| r as f64 / 7.0).collect()).unwrap()),
            search: SearchSettings { grid: search_grid, deterministic, cap: 12345 },
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_then_parse_is_identity(spec in arb_spec()) {
        let text = serialize_problem(&spec);
        let back = parse_problem(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(serialize_problem(&back), text);
    }

    #[test]
    fn table_rows_split_freely(width in 2usize..5, seed in prop::collection::vec(1u32..1000, 8)) {
        // A flat `joint` list may be spread over any number of lines.
        let probs = simplex(&seed[..4]);
        let flat: Vec<String> = probs.iter().map(|p| p.to_string()).collect();
        let one_line = format!("[source]\nalphabets 2 2\njoint {}\n[functions]\nmessages 1 1\nf1 0 0 0 0\nf2 0 0 0 0\n", flat.join(" "));
        let split = format!(
            "[source]\nalphabets 2 2\njoint\n{}\n[functions]\nmessages 1 1\nf1 0 0 0 0\nf2 0 0 0 0\n",
            flat.chunks(width).map(|c| c.join(" ")).collect::<Vec<_>>().join("\n")
        );
        prop_assert_eq!(parse_problem(&one_line).unwrap(), parse_problem(&split).unwrap());
    }
}
