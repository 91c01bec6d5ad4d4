//! Pipeline configuration file plus flag and environment overrides.
//!
//! Every overridable setting resolves as flag, then environment, then file.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use expsum_core::llm::{HttpConfig, ENV_API_BASE, ENV_API_KEY, ENV_MODEL};
use expsum_core::retrieval::RetrievalConfig;
use expsum_core::summarizer::SummarizerConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Mock,
    Http,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSettings {
    pub backend: Option<Backend>,
    /// Scripted responses for the mock backend.
    pub mock_script: Option<PathBuf>,
    pub api_base: Option<String>,
    pub model: Option<String>,
    pub api_key: Option<String>,
    pub timeout_secs: Option<u64>,
    pub retries: Option<u32>,
    pub max_in_flight: Option<usize>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub kb_path: Option<PathBuf>,
    #[serde(default)]
    pub dictionary_path: Option<PathBuf>,
    #[serde(default)]
    pub schema_dir: Option<PathBuf>,
    #[serde(default)]
    pub refiner_constraints_path: Option<PathBuf>,
    /// DMT keys to keep; the HarmonyOS set when absent.
    #[serde(default)]
    pub dmt: Option<Vec<String>>,
    #[serde(default)]
    pub retrieval: RetrievalConfig,
    #[serde(default)]
    pub summarizer: SummarizerConfig,
    #[serde(default)]
    pub llm: LlmSettings,
    #[serde(default = "one")]
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            kb_path: None,
            dictionary_path: None,
            schema_dir: None,
            refiner_constraints_path: None,
            dmt: None,
            retrieval: RetrievalConfig::default(),
            summarizer: SummarizerConfig::default(),
            llm: LlmSettings::default(),
            workers: 1,
        }
    }
}

impl PipelineConfig {
    /// Parse `path`; relative paths inside are taken relative to its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.kb_path,
            &mut cfg.dictionary_path,
            &mut cfg.schema_dir,
            &mut cfg.refiner_constraints_path,
            &mut cfg.llm.mock_script,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => PipelineConfig::load(p),
            None => Ok(PipelineConfig::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            bail!("workers must be >= 1");
        }
        for (name, p) in [
            ("kb_path", &self.kb_path),
            ("dictionary_path", &self.dictionary_path),
            ("schema_dir", &self.schema_dir),
            ("refiner_constraints_path", &self.refiner_constraints_path),
            ("llm.mock_script", &self.llm.mock_script),
        ] {
            if let Some(p) = p {
                if !p.exists() {
                    bail!("{name} does not exist: {}", p.display());
                }
            }
        }
        self.retrieval.validate()?;
        self.summarizer.validate()?;
        Ok(())
    }
}

/// Values taken from the environment. Built from a lookup function so tests
/// need not touch the process environment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnvVars {
    pub api_base: Option<String>,
    pub model: Option<String>,
    pub api_key: Option<String>,
}

impl EnvVars {
    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Self {
        let get = |k: &str| lookup(k).filter(|v| !v.trim().is_empty());
        EnvVars {
            api_base: get(ENV_API_BASE),
            model: get(ENV_MODEL),
            api_key: get(ENV_API_KEY),
        }
    }

    pub fn from_process() -> Self {
        EnvVars::from_lookup(|k| std::env::var(k).ok())
    }
}

/// Command-line overrides shared by the pipeline subcommands.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub kb_path: Option<PathBuf>,
    pub workers: Option<usize>,
    pub backend: Option<Backend>,
    pub mock_script: Option<PathBuf>,
    pub api_base: Option<String>,
    pub model: Option<String>,
    pub api_key: Option<String>,
}

pub fn pick<T>(flag: Option<T>, env: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(env).or(file)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedLlm {
    Mock(PathBuf),
    Http(HttpConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: PipelineConfig,
    pub kb_path: Option<PathBuf>,
    pub workers: usize,
    pub llm: Option<ResolvedLlm>,
}

impl PipelineConfig {
    pub fn resolve(self, flags: &Overrides, env: &EnvVars) -> Result<Resolved> {
        let workers = flags.workers.unwrap_or(self.workers);
        if workers == 0 {
            bail!("workers must be >= 1");
        }
        let kb_path = flags.kb_path.clone().or_else(|| self.kb_path.clone());

        let l = &self.llm;
        let api_base = pick(flags.api_base.clone(), env.api_base.clone(), l.api_base.clone());
        let model = pick(flags.model.clone(), env.model.clone(), l.model.clone());
        let api_key = pick(flags.api_key.clone(), env.api_key.clone(), l.api_key.clone());
        let mock_script = flags.mock_script.clone().or_else(|| l.mock_script.clone());

        let backend = flags.backend.or(l.backend).or(match (&mock_script, &api_base) {
            (Some(_), _) => Some(Backend::Mock),
            (None, Some(_)) => Some(Backend::Http),
            (None, None) => None,
        });
        let llm = match backend {
            None => None,
            Some(Backend::Mock) => Some(ResolvedLlm::Mock(
                mock_script.context("mock backend selected but no mock_script given")?,
            )),
            Some(Backend::Http) => {
                let base = api_base
                    .with_context(|| format!("http backend selected but {ENV_API_BASE} / api_base is unset"))?;
                let mut http = HttpConfig::new(base, model.unwrap_or_default());
                http.api_key = api_key;
                if let Some(t) = l.timeout_secs {
                    http.timeout = Duration::from_secs(t);
                }
                if let Some(r) = l.retries {
                    http.retries = r;
                }
                if let Some(m) = l.max_in_flight {
                    if m == 0 {
                        bail!("llm.max_in_flight must be >= 1");
                    }
                    http.max_in_flight = m;
                }
                Some(ResolvedLlm::Http(http))
            }
        };
        Ok(Resolved { config: self, kb_path, workers, llm })
    }
}
