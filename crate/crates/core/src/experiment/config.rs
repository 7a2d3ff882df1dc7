use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::baselines::{Direction, GaConfig};
use crate::classifiers::ClassifierKind;
use crate::data::LabelColumn;
use crate::error::{Error, Result};
use crate::objective::{CvConfig, Metric};
use crate::spsa::{GainSchedule, RunConfig};

/// Parameter profile; `auto` picks `small` below 100 features.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    #[default]
    Auto,
    Small,
    Large,
}

impl Profile {
    pub const LARGE_FROM: usize = 100;

    pub fn is_large(self, p: usize) -> bool {
        match self {
            Profile::Auto => p >= Self::LARGE_FROM,
            Profile::Small => false,
            Profile::Large => true,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    master_seed: u64,
    #[serde(default = "default_classifiers")]
    classifiers: Vec<String>,
    #[serde(default)]
    profile: Profile,
    dataset: DatasetSection,
    #[serde(default)]
    cv: toml::Table,
    #[serde(default = "default_methods")]
    methods: BTreeMap<String, toml::Table>,
    #[serde(default)]
    output: OutputSection,
}

fn default_classifiers() -> Vec<String> {
    vec!["1nn".into()]
}

fn default_methods() -> BTreeMap<String, toml::Table> {
    ["full", "bspsa"]
        .into_iter()
        .map(|m| (m.to_string(), toml::Table::new()))
        .collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetSection {
    paths: Vec<PathBuf>,
    #[serde(default)]
    label_column: LabelColumn,
    #[serde(default = "yes")]
    has_header: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    directory: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpsaOverrides {
    pub a: Option<f64>,
    pub big_a: Option<f64>,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub max_iterations: Option<usize>,
    pub stall_fraction: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaOverrides {
    pub population_size: Option<usize>,
    pub max_generations: Option<usize>,
    pub stall_generations: Option<usize>,
    pub elite_count: Option<usize>,
    pub tournament_size: Option<usize>,
    pub mutation_prob: Option<f64>,
    pub crossover_prob: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequentialOverrides {
    pub max_evaluations: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoOverrides {}

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    Full,
    Bspsa(SpsaOverrides),
    Cspsa(SpsaOverrides),
    Bga(GaOverrides),
    Sequential {
        direction: Direction,
        floating: bool,
        overrides: SequentialOverrides,
    },
}

/// Method names in report order.
pub const METHOD_NAMES: [&str; 8] = ["full", "bspsa", "cspsa", "bga", "sffs", "sbfs", "sfs", "sbs"];

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::Bspsa(_) => "bspsa",
            Method::Cspsa(_) => "cspsa",
            Method::Bga(_) => "bga",
            Method::Sequential {
                direction, floating, ..
            } => match (direction, floating) {
                (Direction::Forward, true) => "sffs",
                (Direction::Backward, true) => "sbfs",
                (Direction::Forward, false) => "sfs",
                (Direction::Backward, false) => "sbs",
            },
        }
    }

    /// Gain schedule and run settings for the SPSA variants.
    pub fn spsa_settings(&self, large: bool, seed: u64) -> Option<(GainSchedule, RunConfig)> {
        let (o, mut schedule) = match self {
            Method::Bspsa(o) if large => (o, GainSchedule::binary_large()),
            Method::Bspsa(o) => (o, GainSchedule::binary_small()),
            Method::Cspsa(o) => (o, GainSchedule::continuous()),
            _ => return None,
        };
        let mut run = RunConfig {
            max_iterations: if large { 3000 } else { 1000 },
            master_seed: seed,
            ..RunConfig::default()
        };
        schedule.a = o.a.unwrap_or(schedule.a);
        schedule.big_a = o.big_a.unwrap_or(schedule.big_a);
        schedule.alpha = o.alpha.unwrap_or(schedule.alpha);
        schedule.c = o.c.unwrap_or(schedule.c);
        schedule.gamma = o.gamma.unwrap_or(schedule.gamma);
        run.max_iterations = o.max_iterations.unwrap_or(run.max_iterations);
        run.stall_fraction = o.stall_fraction.unwrap_or(run.stall_fraction);
        Some((schedule, run))
    }

    pub fn ga_settings(&self, large: bool, seed: u64) -> Option<GaConfig> {
        let Method::Bga(o) = self else { return None };
        let base = if large { GaConfig::large() } else { GaConfig::small() };
        Some(GaConfig {
            population_size: o.population_size.unwrap_or(base.population_size),
            max_generations: o.max_generations.unwrap_or(base.max_generations),
            stall_generations: o.stall_generations.unwrap_or(base.stall_generations),
            elite_count: o.elite_count.unwrap_or(base.elite_count),
            tournament_size: o.tournament_size.unwrap_or(base.tournament_size),
            mutation_prob: o.mutation_prob.unwrap_or(base.mutation_prob),
            crossover_prob: o.crossover_prob.unwrap_or(base.crossover_prob),
            master_seed: seed,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSpec {
    /// File stem, used in seeds and output names.
    pub name: String,
    pub path: PathBuf,
}

/// A validated experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub datasets: Vec<DatasetSpec>,
    pub label_column: LabelColumn,
    pub has_header: bool,
    pub classifiers: Vec<ClassifierKind>,
    pub methods: Vec<Method>,
    pub cv: CvConfig,
    pub profile: Profile,
    pub output_dir: PathBuf,
}

fn typed<T: DeserializeOwned>(table: &toml::Table, field: &str, problems: &mut Vec<String>) -> Option<T> {
    match toml::Value::Table(table.clone()).try_into() {
        Ok(v) => Some(v),
        Err(e) => {
            problems.push(format!("{field}: {}", e.to_string().trim()));
            None
        }
    }
}

impl ExperimentConfig {
    /// Parses and validates a TOML document. Relative dataset and output
    /// paths resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string().trim().to_string()))?;
        let mut problems = Vec::new();

        let mut classifiers = Vec::new();
        if raw.classifiers.is_empty() {
            problems.push("classifiers: list is empty".to_string());
        }
        for (i, name) in raw.classifiers.iter().enumerate() {
            match name.parse::<ClassifierKind>() {
                Ok(k) if classifiers.contains(&k) => problems.push(format!("classifiers[{i}]: duplicate {name:?}")),
                Ok(k) => classifiers.push(k),
                Err(_) => problems.push(format!(
                    "classifiers[{i}]: unknown classifier {name:?} (expected one of 1nn, c45, svm)"
                )),
            }
        }

        let cv: CvConfig = typed(&raw.cv, "cv", &mut problems).unwrap_or_default();
        if cv.folds < 2 {
            problems.push(format!("cv.folds: must be at least 2, got {}", cv.folds));
        }
        if cv.repetitions == 0 {
            problems.push("cv.repetitions: must be at least 1".to_string());
        }

        if raw.methods.is_empty() {
            problems.push("methods: no method configured".to_string());
        }
        for name in raw.methods.keys() {
            if !METHOD_NAMES.contains(&name.as_str()) {
                problems.push(format!(
                    "methods.{name}: unknown method (expected one of {})",
                    METHOD_NAMES.join(", ")
                ));
            }
        }
        let mut methods = Vec::new();
        for name in METHOD_NAMES {
            let Some(table) = raw.methods.get(name) else { continue };
            let field = format!("methods.{name}");
            let sequential = |direction, floating, problems: &mut Vec<String>| {
                typed(table, &field, problems).map(|overrides| Method::Sequential {
                    direction,
                    floating,
                    overrides,
                })
            };
            let method = match name {
                "full" => typed::<NoOverrides>(table, &field, &mut problems).map(|_| Method::Full),
                "bspsa" => typed(table, &field, &mut problems).map(Method::Bspsa),
                "cspsa" => typed(table, &field, &mut problems).map(Method::Cspsa),
                "bga" => typed(table, &field, &mut problems).map(Method::Bga),
                "sfs" => sequential(Direction::Forward, false, &mut problems),
                "sbs" => sequential(Direction::Backward, false, &mut problems),
                "sffs" => sequential(Direction::Forward, true, &mut problems),
                "sbfs" => sequential(Direction::Backward, true, &mut problems),
                _ => unreachable!("name taken from METHOD_NAMES"),
            };
            if let Some(method) = method {
                // Both profiles must yield valid parameters.
                for large in [false, true] {
                    if let Some((schedule, run)) = method.spsa_settings(large, 0) {
                        if let Err(e) = schedule.validate().and_then(|_| run.validate()) {
                            problems.push(format!("{field}: {e}"));
                            break;
                        }
                    }
                    if let Some(ga) = method.ga_settings(large, 0) {
                        if let Err(e) = ga.validate() {
                            problems.push(format!("{field}: {e}"));
                            break;
                        }
                    }
                }
                methods.push(method);
            }
        }

        if raw.dataset.paths.is_empty() {
            problems.push("dataset.paths: list is empty".to_string());
        }
        let mut datasets: Vec<DatasetSpec> = Vec::new();
        for (i, path) in raw.dataset.paths.iter().enumerate() {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            if name.is_empty() {
                problems.push(format!("dataset.paths[{i}]: no file name in {}", path.display()));
            } else if datasets.iter().any(|d| d.name == name) {
                problems.push(format!("dataset.paths[{i}]: duplicate dataset name {name:?}"));
            }
            datasets.push(DatasetSpec {
                name,
                path: base_dir.join(path),
            });
        }

        if !problems.is_empty() {
            return Err(Error::InvalidConfig(problems.join("\n")));
        }
        Ok(Self {
            master_seed: raw.master_seed,
            datasets,
            label_column: raw.dataset.label_column,
            has_header: raw.dataset.has_header,
            classifiers,
            methods,
            cv,
            profile: raw.profile,
            output_dir: base_dir.join(raw.output.directory.unwrap_or_else(|| PathBuf::from("results"))),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn metric(&self) -> Metric {
        self.cv.metric
    }
}
