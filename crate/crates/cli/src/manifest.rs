//! TOML experiment manifests.
//!
//! Parsing happens in two passes: serde reads the document into a tree of
//! optional fields (rejecting unknown keys with their line), then
//! [`parse_manifest_with`] walks that tree, collects every missing required
//! field at once and range-checks the rest.

use std::fmt;
use std::path::PathBuf;

use coopbandit::engine::{DEFAULT_REPLICATES, DEFAULT_ROUNDS, DEFAULT_TRACE_WINDOW};
use coopbandit::policy::{GreedyStart, DEFAULT_EPSILON, DEFAULT_THOMPSON_PRIOR, DEFAULT_UCB_C};
use coopbandit::{Action, GameParams, ModelError, OpponentStrategy, PolicySpec, SimConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable that supplies the master seed when the manifest has none.
pub const SEED_ENV: &str = "SIMCLI_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Campaign {
    Run,
    SweepB,
    SweepPq,
    Tune,
    TimeCourse,
}

impl Campaign {
    pub fn as_str(self) -> &'static str {
        match self {
            Campaign::Run => "run",
            Campaign::SweepB => "sweep-b",
            Campaign::SweepPq => "sweep-pq",
            Campaign::Tune => "tune",
            Campaign::TimeCourse => "time-course",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Campaign::Run, Campaign::SweepB, Campaign::SweepPq, Campaign::Tune, Campaign::TimeCourse]
            .into_iter()
            .find(|c| c.as_str() == s)
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManifestError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing required fields: {}", fields.join(", "))]
    Missing { fields: Vec<String> },
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ManifestError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ManifestError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    fn model(prefix: &str, err: ModelError) -> Self {
        let field = match &err {
            ModelError::InvalidParameter { field, .. } => format!("{prefix}{field}"),
            _ => prefix.trim_end_matches('.').to_string(),
        };
        ManifestError::invalid(field, err.to_string())
    }
}

/// Values supplied outside the manifest document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// Raw value of [`SEED_ENV`], if set.
    pub seed_env: Option<String>,
    /// `--out`; takes precedence over `output_dir`.
    pub output_dir: Option<PathBuf>,
    /// `--emit-traces`; ORed with the manifest flag.
    pub emit_traces: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedSource {
    Manifest,
    Environment,
}

/// Grid values used by the campaign, defaults filled in.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Grids {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentManifest {
    pub campaign: Campaign,
    /// One configuration per policy, sharing everything except the policy.
    pub configs: Vec<SimConfig>,
    pub grids: Grids,
    pub output_dir: PathBuf,
    pub emit_traces: bool,
    pub seed_source: SeedSource,
}

impl ExperimentManifest {
    pub fn master_seed(&self) -> u64 {
        self.configs[0].master_seed
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    campaign: Option<String>,
    output_dir: Option<PathBuf>,
    emit_traces: Option<bool>,
    config: Option<RawConfig>,
    grids: Option<RawGrids>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    rounds: Option<u32>,
    replicates: Option<u32>,
    initial_reputation: Option<String>,
    trace_window: Option<u32>,
    policy: Option<RawPolicy>,
    policies: Option<Vec<RawPolicy>>,
    strategy: Option<RawStrategy>,
    game: Option<RawGame>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    kind: Option<String>,
    epsilon: Option<f64>,
    start: Option<String>,
    c: Option<f64>,
    prior: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    p: Option<f64>,
    q: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    b: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrids {
    b: Option<RawGrid>,
    p: Option<RawGrid>,
    q: Option<RawGrid>,
    epsilon: Option<RawGrid>,
    c: Option<RawGrid>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawGrid {
    Values(Vec<f64>),
    Range(RawRange),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    start: f64,
    stop: f64,
    step: f64,
}

/// Evenly spaced points from `start` to `stop` inclusive. The step must divide
/// the span.
pub fn range_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || stop < start {
        return Err("range needs finite start <= stop and step > 0".into());
    }
    let steps = ((stop - start) / step).round();
    if ((steps * step) - (stop - start)).abs() > 1e-9 * (stop - start).abs().max(1.0) {
        return Err(format!("step {step} does not divide [{start}, {stop}]"));
    }
    let n = steps as usize;
    if n == 0 {
        return Ok(vec![start]);
    }
    Ok((0..=n)
        .map(|i| start + (stop - start) * i as f64 / n as f64)
        .collect())
}

pub fn default_b_grid() -> Vec<f64> {
    range_grid(0.0, 8.0, 0.25).unwrap()
}

pub fn default_probability_grid() -> Vec<f64> {
    range_grid(0.0, 1.0, 0.05).unwrap()
}

pub fn default_epsilon_grid() -> Vec<f64> {
    (1..=10).rev().map(|k| 0.5f64.powi(k)).collect()
}

pub fn default_c_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0]
}

pub fn parse_manifest(text: &str) -> Result<ExperimentManifest, ManifestError> {
    parse_manifest_with(text, &Overrides::default())
}

pub fn parse_manifest_with(text: &str, overrides: &Overrides) -> Result<ExperimentManifest, ManifestError> {
    let raw: RawManifest = toml::from_str(text).map_err(|e| syntax_error(text, &e))?;
    let config = raw.config.unwrap_or_default();
    let strategy = config.strategy.unwrap_or_default();
    let game = config.game.unwrap_or_default();

    let mut missing = Vec::new();
    if raw.campaign.is_none() {
        missing.push("campaign");
    }
    if raw.output_dir.is_none() && overrides.output_dir.is_none() {
        missing.push("output_dir");
    }
    if config.seed.is_none() && overrides.seed_env.is_none() {
        missing.push("config.seed");
    }
    let raw_policies = match (config.policy, config.policies) {
        (Some(_), Some(_)) => {
            return Err(ManifestError::invalid(
                "config.policies",
                "give either [config.policy] or [[config.policies]], not both",
            ))
        }
        (Some(one), None) => vec![one],
        (None, Some(many)) if !many.is_empty() => many,
        (None, Some(_)) => {
            return Err(ManifestError::invalid("config.policies", "must list at least one policy"))
        }
        (None, None) => {
            missing.push("config.policy");
            Vec::new()
        }
    };
    if raw_policies.iter().any(|p| p.kind.is_none()) {
        missing.push("config.policy.kind");
    }
    if strategy.p.is_none() {
        missing.push("config.strategy.p");
    }
    if strategy.q.is_none() {
        missing.push("config.strategy.q");
    }
    if game.b.is_none() {
        missing.push("config.game.b");
    }
    if !missing.is_empty() {
        return Err(ManifestError::Missing {
            fields: missing.into_iter().map(String::from).collect(),
        });
    }

    let campaign_text = raw.campaign.unwrap();
    let campaign = Campaign::parse(&campaign_text).ok_or_else(|| {
        ManifestError::invalid(
            "campaign",
            format!("unknown campaign {campaign_text:?}; expected run, sweep-b, sweep-pq, tune or time-course"),
        )
    })?;

    let (master_seed, seed_source) = match (config.seed, &overrides.seed_env) {
        (Some(_), Some(_)) => {
            return Err(ManifestError::invalid(
                "config.seed",
                format!("seed is set both in the manifest and in {SEED_ENV}; unset one"),
            ))
        }
        (Some(seed), None) => (seed, SeedSource::Manifest),
        (None, Some(env)) => (
            env.trim()
                .parse::<u64>()
                .map_err(|_| ManifestError::invalid(SEED_ENV, format!("{env:?} is not an unsigned 64-bit integer")))?,
            SeedSource::Environment,
        ),
        (None, None) => unreachable!("checked above"),
    };

    let strategy = OpponentStrategy::new(strategy.p.unwrap(), strategy.q.unwrap())
        .map_err(|e| ManifestError::model("config.strategy.", e))?;
    let game = GameParams::new(game.b.unwrap()).map_err(|e| ManifestError::model("config.game.", e))?;
    let initial_reputation = match config.initial_reputation.as_deref() {
        None => Action::Cooperate,
        Some(s) => s
            .parse()
            .map_err(|e| ManifestError::invalid("config.initial_reputation", format!("{e}")))?,
    };

    let policies = raw_policies
        .into_iter()
        .map(resolve_policy)
        .collect::<Result<Vec<_>, _>>()?;

    let configs = policies
        .iter()
        .map(|&policy| {
            let cfg = SimConfig {
                policy,
                strategy,
                game,
                rounds: config.rounds.unwrap_or(DEFAULT_ROUNDS),
                replicates: config.replicates.unwrap_or(DEFAULT_REPLICATES),
                master_seed,
                initial_reputation,
                trace_window: config.trace_window.unwrap_or(DEFAULT_TRACE_WINDOW),
            };
            cfg.validate().map_err(|e| ManifestError::model("config.", e))?;
            Ok(cfg)
        })
        .collect::<Result<Vec<_>, ManifestError>>()?;

    let grids = resolve_grids(campaign, &configs, raw.grids.unwrap_or_default())?;

    let emit_traces = raw.emit_traces.unwrap_or(false) || overrides.emit_traces;
    if emit_traces && !matches!(campaign, Campaign::Run | Campaign::TimeCourse) {
        return Err(ManifestError::invalid(
            "emit_traces",
            format!("traces are only written for run and time-course, not {campaign}"),
        ));
    }

    Ok(ExperimentManifest {
        campaign,
        configs,
        grids,
        output_dir: overrides.output_dir.clone().or(raw.output_dir).unwrap(),
        emit_traces,
        seed_source,
    })
}

fn resolve_policy(raw: RawPolicy) -> Result<PolicySpec, ManifestError> {
    let kind = raw.kind.unwrap();
    let reject = |name: &str, present: bool| {
        if present {
            Err(ManifestError::invalid(
                format!("config.policy.{name}"),
                format!("not a parameter of {kind}"),
            ))
        } else {
            Ok(())
        }
    };
    let spec = match kind.as_str() {
        "epsilon-greedy" => {
            reject("c", raw.c.is_some())?;
            reject("prior", raw.prior.is_some())?;
            let start = match raw.start.as_deref() {
                None | Some("cooperative") => GreedyStart::Cooperative,
                Some("optimistic") => GreedyStart::Optimistic,
                Some(other) => {
                    return Err(ManifestError::invalid(
                        "config.policy.start",
                        format!("expected \"cooperative\" or \"optimistic\", got {other:?}"),
                    ))
                }
            };
            PolicySpec::EpsilonGreedy {
                epsilon: raw.epsilon.unwrap_or(DEFAULT_EPSILON),
                start,
            }
        }
        "ucb1" => {
            reject("epsilon", raw.epsilon.is_some())?;
            reject("start", raw.start.is_some())?;
            reject("prior", raw.prior.is_some())?;
            PolicySpec::Ucb1 {
                c: raw.c.unwrap_or(DEFAULT_UCB_C),
            }
        }
        "thompson-sampling" => {
            reject("epsilon", raw.epsilon.is_some())?;
            reject("start", raw.start.is_some())?;
            reject("c", raw.c.is_some())?;
            PolicySpec::ThompsonSampling {
                prior: raw.prior.unwrap_or(DEFAULT_THOMPSON_PRIOR),
            }
        }
        other => {
            return Err(ManifestError::invalid(
                "config.policy.kind",
                format!("unknown policy {other:?}; expected epsilon-greedy, ucb1 or thompson-sampling"),
            ))
        }
    };
    spec.validate().map_err(|e| ManifestError::model("config.policy.", e))?;
    Ok(spec)
}

fn resolve_grids(campaign: Campaign, configs: &[SimConfig], raw: RawGrids) -> Result<Grids, ManifestError> {
    let eps_needed = configs.iter().any(|c| matches!(c.policy, PolicySpec::EpsilonGreedy { .. }));
    let c_needed = configs.iter().any(|c| matches!(c.policy, PolicySpec::Ucb1 { .. }));
    if campaign == Campaign::Tune {
        if let Some(cfg) = configs.iter().find(|c| matches!(c.policy, PolicySpec::ThompsonSampling { .. })) {
            return Err(ManifestError::invalid(
                "config.policy.kind",
                format!("tune supports epsilon-greedy and ucb1 only, not {}", cfg.policy.name()),
            ));
        }
    }

    let allowed: &[&str] = match campaign {
        Campaign::Run | Campaign::TimeCourse => &[],
        Campaign::SweepB => &["b"],
        Campaign::SweepPq => &["p", "q"],
        Campaign::Tune => match (eps_needed, c_needed) {
            (true, true) => &["epsilon", "c"],
            (true, false) => &["epsilon"],
            _ => &["c"],
        },
    };

    let mut grids = Grids::default();
    let entries = [
        ("b", raw.b, &mut grids.b),
        ("p", raw.p, &mut grids.p),
        ("q", raw.q, &mut grids.q),
        ("epsilon", raw.epsilon, &mut grids.epsilon),
        ("c", raw.c, &mut grids.c),
    ];
    for (name, value, slot) in entries {
        let field = format!("grids.{name}");
        match value {
            Some(_) if !allowed.contains(&name) => {
                return Err(ManifestError::invalid(field, format!("not used by campaign {campaign}")));
            }
            Some(grid) => {
                let values = match grid {
                    RawGrid::Values(v) => v,
                    RawGrid::Range(r) => {
                        range_grid(r.start, r.stop, r.step).map_err(|m| ManifestError::invalid(&field, m))?
                    }
                };
                check_grid(&field, name, &values)?;
                *slot = Some(values);
            }
            None if allowed.contains(&name) => {
                *slot = Some(match name {
                    "b" => default_b_grid(),
                    "p" | "q" => default_probability_grid(),
                    "epsilon" => default_epsilon_grid(),
                    _ => default_c_grid(),
                });
            }
            None => {}
        }
    }
    Ok(grids)
}

fn check_grid(field: &str, name: &str, values: &[f64]) -> Result<(), ManifestError> {
    if values.is_empty() {
        return Err(ManifestError::invalid(field, "grid is empty"));
    }
    if values.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(ManifestError::invalid(field, "grid must be strictly increasing"));
    }
    let in_range = |v: f64| match name {
        "p" | "q" | "epsilon" => (0.0..=1.0).contains(&v),
        _ => v.is_finite() && v >= 0.0,
    };
    if let Some(bad) = values.iter().find(|&&v| !in_range(v)) {
        return Err(ManifestError::invalid(field, format!("value {bad} out of range")));
    }
    Ok(())
}

fn syntax_error(text: &str, err: &toml::de::Error) -> ManifestError {
    let (line, column) = match err.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            (line, column)
        }
        None => (0, 0),
    };
    ManifestError::Syntax {
        line,
        column,
        message: err.message().trim().replace('\n', " "),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG4: &str = r#"
campaign = "sweep-pq"
output_dir = "out"

[config]
seed = 7

[config.policy]
kind = "epsilon-greedy"
epsilon = 0.0078125

[config.strategy]
p = 0.81
q = 0.36

[config.game]
b = 2
"#;

    #[test]
    fn parses_experimental_point() {
        let m = parse_manifest(FIG4).unwrap();
        assert_eq!(m.campaign, Campaign::SweepPq);
        let cfg = m.configs[0];
        assert_eq!(cfg.strategy.p(), 0.81);
        assert_eq!(cfg.strategy.q(), 0.36);
        assert_eq!(cfg.game.b(), 2.0);
        assert_eq!(cfg.policy.epsilon(), Some(1.0 / 128.0));
        assert_eq!(cfg.rounds, 2000);
        assert_eq!(cfg.replicates, 500);
        assert_eq!(m.master_seed(), 7);
        assert_eq!(m.grids.p.as_ref().unwrap().len(), 21);
        assert_eq!(m.grids.q.as_ref().unwrap()[3], 0.15);
        assert!(m.grids.b.is_none());
    }

    #[test]
    fn negative_q_names_the_field() {
        let text = FIG4.replace("q = 0.36", "q = -0.1");
        match parse_manifest(&text) {
            Err(ManifestError::Invalid { field, .. }) => assert_eq!(field, "config.strategy.q"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn p_above_one_names_the_field() {
        let text = FIG4.replace("p = 0.81", "p = 1.2");
        match parse_manifest(&text) {
            Err(ManifestError::Invalid { field, .. }) => assert_eq!(field, "config.strategy.p"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_document_lists_everything_missing() {
        match parse_manifest("") {
            Err(ManifestError::Missing { fields }) => assert_eq!(
                fields,
                [
                    "campaign",
                    "output_dir",
                    "config.seed",
                    "config.policy",
                    "config.strategy.p",
                    "config.strategy.q",
                    "config.game.b"
                ]
            ),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_a_located_error() {
        let text = FIG4.replace("epsilon = 0.0078125", "epsilon = 0.0078125\nepsilom = 0.1");
        match parse_manifest(&text) {
            Err(ManifestError::Syntax { line, message, .. }) => {
                assert_eq!(line, 11);
                assert!(message.contains("epsilom"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_syntax_reports_line() {
        let text = FIG4.replace("b = 2", "b = = 2");
        match parse_manifest(&text) {
            Err(ManifestError::Syntax { line, .. }) => assert_eq!(line, 17),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seed_from_exactly_one_source() {
        let env = Overrides {
            seed_env: Some("18446744073709551615".into()),
            ..Default::default()
        };
        assert!(matches!(
            parse_manifest_with(FIG4, &env),
            Err(ManifestError::Invalid { field, .. }) if field == "config.seed"
        ));
        let text = FIG4.replace("seed = 7", "");
        let m = parse_manifest_with(&text, &env).unwrap();
        assert_eq!(m.master_seed(), u64::MAX);
        assert_eq!(m.seed_source, SeedSource::Environment);
        let bad = Overrides {
            seed_env: Some("abc".into()),
            ..Default::default()
        };
        assert!(matches!(
            parse_manifest_with(&text, &bad),
            Err(ManifestError::Invalid { field, .. }) if field == SEED_ENV
        ));
    }

    #[test]
    fn parameters_must_belong_to_the_policy() {
        let text = FIG4.replace("epsilon = 0.0078125", "epsilon = 0.0078125\nc = 4");
        assert!(matches!(
            parse_manifest(&text),
            Err(ManifestError::Invalid { field, .. }) if field == "config.policy.c"
        ));
    }

    #[test]
    fn grids_must_match_campaign() {
        let text = format!("{FIG4}\n[grids]\nb = [1.0, 2.0]\n");
        assert!(matches!(
            parse_manifest(&text),
            Err(ManifestError::Invalid { field, .. }) if field == "grids.b"
        ));
        let text = format!("{FIG4}\n[grids]\np = {{ start = 0.0, stop = 1.0, step = 0.25 }}\nq = [0.1, 0.9]\n");
        let m = parse_manifest(&text).unwrap();
        assert_eq!(m.grids.p.unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(m.grids.q.unwrap(), vec![0.1, 0.9]);
        let text = format!("{FIG4}\n[grids]\nq = [0.5, 0.1]\n");
        assert!(parse_manifest(&text).is_err());
    }

    #[test]
    fn tune_rejects_thompson() {
        let text = FIG4
            .replace("sweep-pq", "tune")
            .replace("kind = \"epsilon-greedy\"\nepsilon = 0.0078125", "kind = \"thompson-sampling\"");
        assert!(matches!(
            parse_manifest(&text),
            Err(ManifestError::Invalid { field, .. }) if field == "config.policy.kind"
        ));
    }

    #[test]
    fn several_policies() {
        let text = FIG4.replace(
            "[config.policy]\nkind = \"epsilon-greedy\"\nepsilon = 0.0078125",
            "[[config.policies]]\nkind = \"epsilon-greedy\"\n\n[[config.policies]]\nkind = \"ucb1\"\n\n[[config.policies]]\nkind = \"thompson-sampling\"",
        );
        let m = parse_manifest(&text).unwrap();
        let names: Vec<_> = m.configs.iter().map(|c| c.policy.name()).collect();
        assert_eq!(names, ["epsilon-greedy", "ucb1", "thompson-sampling"]);
        assert_eq!(m.configs[1].policy.c(), Some(4.0));
        assert_eq!(m.configs[2].policy.prior(), Some(0.5));
    }

    #[test]
    fn traces_only_for_single_run_campaigns() {
        let text = format!("emit_traces = true\n{FIG4}");
        assert!(matches!(
            parse_manifest(&text),
            Err(ManifestError::Invalid { field, .. }) if field == "emit_traces"
        ));
        let run = text.replace("sweep-pq", "run");
        assert!(parse_manifest(&run).unwrap().emit_traces);
    }

    #[test]
    fn range_grids() {
        assert_eq!(default_b_grid().len(), 33);
        assert!(default_b_grid().contains(&2.0));
        assert_eq!(range_grid(0.0, 1.0, 0.05).unwrap()[7], 0.35);
        assert!(range_grid(0.0, 1.0, 0.3).is_err());
        assert_eq!(range_grid(2.0, 2.0, 1.0).unwrap(), vec![2.0]);
    }
}
