//! Command runners behind the `cutset-region` binary. Each command reads a
//! [`ProblemSpec`] and returns a JSON report plus an exit code.

pub mod problem;

use cutset_core::cutset::{classical_cutset_check, phi_region, CutAssessment, PermissibleSet, TimeShareJson};
use cutset_core::lemmacheck::run_property_suite;
use cutset_core::virtualsrc::{
    containment_check_in, perturb_reconstruction, witness_search, ContainmentVerdict, Family, SearchConfig,
    StageReport, WitnessOutcome,
};
use serde::Serialize;
use thiserror::Error;

pub use problem::{parse_problem, serialize_problem, ParseError, ProblemSpec, SearchSettings};

/// Exit codes: witness found / inside (0), no witness or outside (1),
/// invalid input or candidate (2).
pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

const RESOLUTION_NOTE: &str = "containment is tested against the cut region sampled on the stated grid; \
a negative answer holds at this resolution only";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("command `{command}` needs a [{section}] section")]
    MissingSection {
        command: &'static str,
        section: &'static str,
    },
    #[error(transparent)]
    Core(#[from] cutset_core::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Region,
    Check,
    CutsetRates,
    Perturb,
    Props,
}

/// Per-invocation options that override or supplement the problem file.
#[derive(Debug, Clone, Default)]
pub struct Options {
    /// Replaces the grid of an `all` or `independent` Ψ.
    pub grid: Option<usize>,
    pub seed: u64,
    pub deterministic_recs: bool,
    pub cases: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    /// Pretty-printed JSON.
    pub report: String,
}

/// `{1,3}`-style label of cut `k` (1-based parties in `T_k`).
pub fn cut_label(k: usize, m: usize) -> String {
    let parties: Vec<String> = (0..m)
        .filter(|i| k >> i & 1 == 1)
        .map(|i| (i + 1).to_string())
        .collect();
    format!("{{{}}}", parties.join(","))
}

fn cut_labels(m: usize) -> Vec<String> {
    (1..(1usize << m) - 1).map(|k| cut_label(k, m)).collect()
}

fn need<'a, T>(v: &'a Option<T>, command: &'static str, section: &'static str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or(CliError::MissingSection { command, section })
}

fn effective_psi(spec: &ProblemSpec, command: &'static str, opts: &Options) -> Result<PermissibleSet<f64>, CliError> {
    let psi = need(&spec.psi, command, "psi")?.clone();
    Ok(match (psi, opts.grid) {
        (PermissibleSet::All { .. }, Some(g)) => PermissibleSet::All { grid: g },
        (PermissibleSet::Independent { .. }, Some(g)) => PermissibleSet::Independent { grid: g },
        (PermissibleSet::Explicit(_), Some(_)) => {
            return Err(CliError::Usage("--grid does not apply to an explicit Ψ".into()))
        }
        (psi, None) => psi,
    })
}

fn psi_summary(psi: &PermissibleSet<f64>) -> (&'static str, Option<usize>) {
    match psi {
        PermissibleSet::All { grid } => ("all", Some(*grid)),
        PermissibleSet::Independent { grid } => ("independent", Some(*grid)),
        PermissibleSet::Explicit(_) => ("explicit", None),
    }
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

/// Runs `command`. The problem is optional only for `props`.
pub fn run_command(command: Command, spec: Option<&ProblemSpec>, opts: &Options) -> Result<Outcome, CliError> {
    if command == Command::Props {
        return props(spec, opts);
    }
    let spec = spec.ok_or_else(|| CliError::Usage("this command needs a problem file".into()))?;
    match command {
        Command::Region => region(spec, opts),
        Command::Check => check(spec, opts),
        Command::CutsetRates => cutset_rates(spec, opts),
        Command::Perturb => perturb(spec),
        Command::Props => unreachable!(),
    }
}

fn region(spec: &ProblemSpec, opts: &Options) -> Result<Outcome, CliError> {
    let net = need(&spec.network, "region", "network")?;
    let psi = effective_psi(spec, "region", opts)?;
    let phi = phi_region(net, &psi)?;
    Ok(Outcome {
        code: EXIT_OK,
        report: phi.region.to_json(),
    })
}

#[derive(Serialize)]
struct Resolution {
    psi: &'static str,
    psi_grid: Option<usize>,
    laws: usize,
    search_grid: Option<usize>,
    deterministic_only: Option<bool>,
    searched: Option<u128>,
    distortion_feasible: Option<u128>,
    note: &'static str,
}

#[derive(Serialize)]
struct CheckReport {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    cuts: Vec<String>,
    virtual_cut: Option<Vec<f64>>,
    distortions: Option<Vec<f64>>,
    cut_slack: Option<Vec<f64>>,
    violated_cuts: Vec<String>,
    deficit: Option<f64>,
    certificate: Option<TimeShareJson<f64>>,
    reconstruction: Option<Vec<Vec<f64>>>,
    family: Option<Family>,
    resolution: Resolution,
}

impl CheckReport {
    fn fill(&mut self, m: usize, verdict: &ContainmentVerdict<f64>) {
        self.virtual_cut = Some(verdict.virtual_cut.coords().to_vec());
        self.distortions = Some(verdict.distortions.clone());
        self.cut_slack = Some(verdict.assessment.slack.clone());
        self.violated_cuts = verdict
            .assessment
            .violated_cuts
            .iter()
            .map(|&k| cut_label(k, m))
            .collect();
        self.deficit = Some(verdict.assessment.deficit);
        self.certificate = verdict.assessment.certificate.as_ref().map(|c| c.to_json_repr());
    }
}

fn table_rows(table: &[f64], cols: usize) -> Vec<Vec<f64>> {
    table.chunks(cols.max(1)).map(|r| r.to_vec()).collect()
}

fn check(spec: &ProblemSpec, opts: &Options) -> Result<Outcome, CliError> {
    let net = need(&spec.network, "check", "network")?;
    let src = need(&spec.source, "check", "source")?;
    let dist = need(&spec.distortion, "check", "distortion")?;
    let psi = effective_psi(spec, "check", opts)?;
    let phi = phi_region(net, &psi)?.hull();
    let m = net.m();
    let (kind, psi_grid) = psi_summary(&psi);
    let mut report = CheckReport {
        status: "no_witness_at_resolution",
        error: None,
        cuts: cut_labels(m),
        virtual_cut: None,
        distortions: None,
        cut_slack: None,
        violated_cuts: Vec::new(),
        deficit: None,
        certificate: None,
        reconstruction: None,
        family: None,
        resolution: Resolution {
            psi: kind,
            psi_grid,
            laws: phi.inputs.len(),
            search_grid: None,
            deterministic_only: None,
            searched: None,
            distortion_feasible: None,
            note: RESOLUTION_NOTE,
        },
    };

    let code = if let Some(rec) = &spec.reconstruction {
        report.reconstruction = Some(table_rows(rec.channel().table(), rec.channel().output_len()));
        match containment_check_in(src, dist, rec, &phi) {
            Ok(verdict) => {
                report.fill(m, &verdict);
                if verdict.inside() {
                    report.status = "witness_found";
                    EXIT_OK
                } else {
                    EXIT_NEGATIVE
                }
            }
            Err(e @ cutset_core::Error::DistortionViolated { .. }) => {
                report.status = "invalid_candidate";
                report.error = Some(e.to_string());
                report.distortions = Some(cutset_core::virtualsrc::expected_distortions(src, dist, rec)?);
                EXIT_INVALID
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        let config = SearchConfig {
            grid: spec.search.grid,
            deterministic_only: spec.search.deterministic || opts.deterministic_recs,
            cap: spec.search.cap,
        };
        report.resolution.search_grid = Some(config.grid);
        report.resolution.deterministic_only = Some(config.deterministic_only);
        match witness_search(src, dist, &phi, &config)? {
            WitnessOutcome::Found {
                family,
                index,
                rec,
                verdict,
            } => {
                report.status = "witness_found";
                report.family = Some(family);
                report.resolution.searched = Some(index + 1);
                report.reconstruction = Some(table_rows(rec.channel().table(), rec.channel().output_len()));
                report.fill(m, &verdict);
                EXIT_OK
            }
            WitnessOutcome::NoWitnessAtResolution(search) => {
                report.resolution.searched = Some(search.searched);
                report.resolution.distortion_feasible = Some(search.distortion_feasible);
                if let Some(best) = &search.best {
                    report.family = Some(best.family);
                    report.reconstruction =
                        Some(table_rows(best.rec.channel().table(), best.rec.channel().output_len()));
                    report.fill(m, &best.verdict);
                }
                EXIT_NEGATIVE
            }
        }
    };
    Ok(Outcome {
        code,
        report: to_json(&report),
    })
}

#[derive(Serialize)]
struct RatesReport {
    inside: bool,
    cuts: Vec<String>,
    cut_loads: Vec<f64>,
    violated_cuts: Vec<String>,
    slack: Vec<f64>,
    deficit: f64,
    certificate: Option<TimeShareJson<f64>>,
}

fn cutset_rates(spec: &ProblemSpec, opts: &Options) -> Result<Outcome, CliError> {
    let net = need(&spec.network, "cutset-rates", "network")?;
    let rates = need(&spec.rates, "cutset-rates", "rates")?;
    let psi = effective_psi(spec, "cutset-rates", opts)?;
    let phi = phi_region(net, &psi)?;
    let a: CutAssessment<f64> = classical_cutset_check(rates, &phi)?;
    let m = net.m();
    let report = RatesReport {
        inside: a.inside,
        cuts: cut_labels(m),
        cut_loads: rates.cut_loads()?.coords().to_vec(),
        violated_cuts: a.violated_cuts.iter().map(|&k| cut_label(k, m)).collect(),
        slack: a.slack.clone(),
        deficit: a.deficit,
        certificate: a.certificate.as_ref().map(|c| c.to_json_repr()),
    };
    Ok(Outcome {
        code: if a.inside { EXIT_OK } else { EXIT_NEGATIVE },
        report: to_json(&report),
    })
}

#[derive(Serialize)]
struct PerturbReport {
    epsilon: f64,
    variables: Vec<String>,
    sizes: Vec<usize>,
    joint: Vec<f64>,
    distortions: Vec<f64>,
    stages: Vec<StageReport<f64>>,
}

fn perturb(spec: &ProblemSpec) -> Result<Outcome, CliError> {
    let src = need(&spec.source, "perturb", "source")?;
    let dist = need(&spec.distortion, "perturb", "distortion")?;
    let rec = need(&spec.reconstruction, "perturb", "reconstruction")?;
    let eps = spec
        .epsilon
        .ok_or_else(|| CliError::Usage("command `perturb` needs `epsilon` in [distortion]".into()))?;
    let joint = rec.joint(src)?;
    let out = perturb_reconstruction(&joint, src, dist, eps)?;
    let distortions = (0..src.m())
        .map(|i| cutset_core::virtualsrc::joint_distortion(&out.joint, src, dist, i))
        .collect::<Result<Vec<_>, _>>()?;
    let report = PerturbReport {
        epsilon: eps,
        variables: out.joint.names().iter().map(|s| s.to_string()).collect(),
        sizes: out.joint.sizes(),
        joint: out.joint.table().to_vec(),
        distortions,
        stages: out.stages,
    };
    Ok(Outcome {
        code: EXIT_OK,
        report: to_json(&report),
    })
}

fn props(spec: Option<&ProblemSpec>, opts: &Options) -> Result<Outcome, CliError> {
    let _ = spec;
    let cases = opts.cases.unwrap_or(1000);
    let summary = run_property_suite(cases, opts.seed)?;
    Ok(Outcome {
        code: if summary.failures == 0 { EXIT_OK } else { EXIT_NEGATIVE },
        report: to_json(&summary),
    })
}
