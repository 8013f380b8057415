//! Experiment configuration files and command-line value syntax.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use setint::partition::{uniform_partition, TagRule, TaggedPartition};
use setint::{Multifunction, PointSet, SpaceDescriptor};

use crate::Failure;

pub const SCHEMA_VERSION: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TagName {
    Left,
    Right,
    Mid,
    Random,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Text(String),
    Sizes(Vec<usize>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearMap {
    pub matrix: Vec<Vec<f64>>,
    pub target: SpaceDescriptor,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub version: String,
    pub multifunction: Multifunction,
    pub schedule: Option<ScheduleSpec>,
    pub tags: Option<TagName>,
    pub seed: Option<u64>,
    pub prune_delta: Option<f64>,
    pub tol: Option<f64>,
    pub hull_tol: Option<f64>,
    pub cardinality_cap: Option<usize>,
    pub candidate: Option<PointSet>,
    pub pushforward: Option<LinearMap>,
    /// Generators of the integral, for the splitting experiment.
    pub integral: Option<PointSet>,
    #[serde(default)]
    pub outputs: Outputs,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let cfg: ExperimentConfig = read_json(path)?;
    if cfg.version != SCHEMA_VERSION {
        return Err(Failure::Usage(format!(
            "{}: unsupported config version {:?}, expected {SCHEMA_VERSION:?}",
            path.display(),
            cfg.version
        )));
    }
    Ok(cfg)
}

/// Interval counts from `2,4,8`, `uniform:2^1..8` (powers of two) or
/// `uniform:2^1..8-1` (one less than each power).
pub fn parse_schedule(text: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("cannot parse schedule {text:?}"));
    let sizes = if let Some(range) = text.strip_prefix("uniform:2^") {
        let (range, offset) = match range.strip_suffix("-1") {
            Some(r) => (r, 1),
            None => (range, 0),
        };
        let (a, b) = range.split_once("..").ok_or_else(bad)?;
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        if a > b || b > 40 {
            return Err(bad());
        }
        (a..=b).map(|k| (1usize << k) - offset).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?
    };
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Failure::Usage(format!(
            "schedule {text:?} must list positive interval counts"
        )));
    }
    Ok(sizes)
}

pub fn schedule_sizes(spec: &ScheduleSpec) -> Result<Vec<usize>, Failure> {
    match spec {
        ScheduleSpec::Text(t) => parse_schedule(t),
        ScheduleSpec::Sizes(s) => Ok(s.clone()),
    }
}

/// Uniform partitions; random tags use stream `seed + row` for row `row`.
pub fn build_schedule(
    sizes: &[usize],
    tags: TagName,
    seed: Option<u64>,
) -> Result<Vec<TaggedPartition>, Failure> {
    if tags == TagName::Random && seed.is_none() {
        return Err(Failure::Usage("random tags need a seed".into()));
    }
    sizes
        .iter()
        .enumerate()
        .map(|(row, &n)| {
            let rule = match tags {
                TagName::Left => TagRule::Left,
                TagName::Right => TagRule::Right,
                TagName::Mid => TagRule::Mid,
                TagName::Random => TagRule::Random(seed.unwrap_or(0).wrapping_add(row as u64)),
            };
            uniform_partition(n, rule).map_err(Failure::from)
        })
        .collect()
}

/// `uniform:N[:left|right|mid]`, `random:N:SEED` or a path to a partition
/// JSON file `{breakpoints, tags}`.
pub fn parse_partition(text: &str) -> Result<TaggedPartition, Failure> {
    let bad = || Failure::Usage(format!("cannot parse partition {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["uniform", n, rest @ ..] => {
            let n: usize = n.parse().map_err(|_| bad())?;
            let rule = match rest {
                [] | ["mid"] => TagRule::Mid,
                ["left"] => TagRule::Left,
                ["right"] => TagRule::Right,
                _ => return Err(bad()),
            };
            Ok(uniform_partition(n, rule)?)
        }
        ["random", n, seed] => {
            let n: usize = n.parse().map_err(|_| bad())?;
            let seed: u64 = seed.parse().map_err(|_| bad())?;
            Ok(setint::partition::random_partition(n, seed)?)
        }
        _ => read_json(Path::new(text)),
    }
}
