use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

use crisis_core::embed::RepresentationId;
use crisis_core::evalx::DEFAULT_REPEATS;
use crisis_core::forest::ForestParams;
use crisis_core::pipeline::{Grid, ResourcePaths};
use crisis_core::scenario::ScenarioKind;

/// A (language, hazard type) pair to evaluate on.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub language: String,
    pub domain: String,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub kinds: Vec<ScenarioKind>,
    #[serde(default)]
    pub targets: Vec<Target>,
    #[serde(default)]
    pub representations: Vec<RepresentationId>,
}

/// Forest settings a config may override.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: Option<usize>,
}

/// The run configuration file. Relative paths are resolved against the
/// file's directory.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub corpus: Vec<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    #[serde(default)]
    pub resources: ResourcePaths,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub forest: ForestConfig,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
    pub target_ratio: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

fn pick_vec<T>(flag: Vec<T>, conf: Vec<T>) -> Vec<T> {
    if flag.is_empty() {
        conf
    } else {
        flag
    }
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.corpus.iter_mut().for_each(|p| rebase(base, p));
        for p in [&mut cfg.mapping, &mut cfg.taxonomy, &mut cfg.out].into_iter().flatten() {
            rebase(base, p);
        }
        let r = &mut cfg.resources;
        for p in [&mut r.glove, &mut r.translation_cache, &mut r.dictionary].into_iter().flatten() {
            rebase(base, p);
        }
        r.muse.values_mut().for_each(|p| rebase(base, p));
        r.caches.values_mut().for_each(|p| rebase(base, p));
        Ok(cfg)
    }
}

/// Config after flags have been applied and defaults filled in.
#[derive(Debug, Clone)]
pub struct Settings {
    pub corpus: Vec<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub resources: ResourcePaths,
    pub grid: Grid,
    pub forest: ForestParams,
    pub repeats: usize,
    pub seed: u64,
    pub target_ratio: f64,
    pub out: PathBuf,
    pub workers: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 42;

/// Flag values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub corpus: Vec<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub kinds: Vec<ScenarioKind>,
    pub target_lang: Option<String>,
    pub target_domain: Option<String>,
    pub reps: Vec<RepresentationId>,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Settings {
    /// Flags beat the config file, which beats the defaults.
    pub fn resolve(cfg: RunConfig, flags: Overrides) -> Result<Self> {
        let mut targets: Vec<(String, String)> = cfg.grid.targets.into_iter().map(|t| (t.language, t.domain)).collect();
        match (flags.target_lang, flags.target_domain) {
            (Some(l), Some(d)) => targets = vec![(l, d)],
            (None, None) => {}
            (l, d) => {
                // one half given: keep configured targets matching it
                targets.retain(|(tl, td)| l.as_ref().is_none_or(|l| l == tl) && d.as_ref().is_none_or(|d| d == td));
                anyhow::ensure!(
                    !targets.is_empty(),
                    "--target-lang and --target-domain must be given together unless the config has a matching target"
                );
            }
        }
        let mut kinds = pick_vec(flags.kinds, cfg.grid.kinds);
        if kinds.is_empty() {
            kinds = ScenarioKind::ALL.to_vec();
        }
        let mut representations = pick_vec(flags.reps, cfg.grid.representations);
        if representations.is_empty() {
            representations = RepresentationId::ALL.to_vec();
        }
        let defaults = ForestParams::default();
        let forest = ForestParams {
            n_trees: cfg.forest.n_trees.unwrap_or(defaults.n_trees),
            max_depth: cfg.forest.max_depth.or(defaults.max_depth),
            min_samples_split: cfg.forest.min_samples_split.unwrap_or(defaults.min_samples_split),
            ..defaults
        };
        Ok(Settings {
            corpus: pick_vec(flags.corpus, cfg.corpus),
            mapping: flags.mapping.or(cfg.mapping),
            taxonomy: flags.taxonomy.or(cfg.taxonomy),
            resources: cfg.resources,
            grid: Grid {
                kinds,
                targets,
                representations,
            },
            forest,
            repeats: flags.repeats.or(cfg.repeats).unwrap_or(DEFAULT_REPEATS),
            seed: flags.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
            target_ratio: cfg.target_ratio.unwrap_or(crisis_core::scenario::DEFAULT_TARGET_RATIO),
            out: flags.out.or(cfg.out).unwrap_or_else(|| PathBuf::from("out")),
            workers: flags.workers.or(cfg.workers),
        })
    }

    /// Every problem with the settings, for an itemized diagnostic.
    pub fn problems(&self, need_grid: bool) -> Vec<String> {
        let mut out = Vec::new();
        if self.repeats < 1 {
            out.push("repeats must be at least 1".to_string());
        }
        if self.workers == Some(0) {
            out.push("workers must be at least 1".to_string());
        }
        if self.corpus.is_empty() {
            out.push("no corpus given (--corpus or `corpus` in the config)".to_string());
        }
        let mut paths: Vec<(String, PathBuf)> = self.corpus.iter().map(|p| ("corpus".to_string(), p.clone())).collect();
        paths.extend(self.mapping.iter().map(|p| ("mapping".to_string(), p.clone())));
        paths.extend(self.taxonomy.iter().map(|p| ("taxonomy".to_string(), p.clone())));
        paths.extend(self.resources.all());
        for (what, p) in paths {
            if !p.exists() {
                out.push(format!("{what}: {} does not exist", p.display()));
            }
        }
        if need_grid && self.grid.targets.is_empty() {
            out.push("no targets (--target-lang/--target-domain or [grid] targets)".to_string());
        }
        if !(self.target_ratio > 0.0 && self.target_ratio <= 0.5) {
            out.push(format!("target_ratio {} is outside (0, 0.5]", self.target_ratio));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_which_overrides_defaults() {
        let cfg: RunConfig = toml::from_str(
            r#"
            seed = 5
            repeats = 3
            [grid]
            targets = [{ language = "es", domain = "flood" }]
            representations = ["lf"]
            "#,
        )
        .unwrap();
        let s = Settings::resolve(
            cfg,
            Overrides {
                repeats: Some(1),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_eq!(s.repeats, 1);
        assert_eq!(s.seed, 5);
        assert_eq!(s.grid.representations, vec![RepresentationId::Lf]);
        assert_eq!(s.grid.kinds.len(), 7);
        assert_eq!(s.out, PathBuf::from("out"));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("sede = 1").is_err());
    }

    #[test]
    fn problems_are_itemized() {
        let mut s = Settings::resolve(RunConfig::default(), Overrides::default()).unwrap();
        s.repeats = 0;
        s.corpus = vec![PathBuf::from("/nonexistent/c.jsonl")];
        let p = s.problems(true);
        assert_eq!(p.len(), 3, "{p:?}");
    }
}
