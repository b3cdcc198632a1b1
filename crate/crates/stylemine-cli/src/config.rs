//! Run configuration: a single json config file, overridden by flags, with
//! task presets binding the per-task reward constants.

use serde::{Deserialize, Serialize};
use std::path::Path;

use stylemine::align::{AlignmentParams, NormMode, Strategy};
use stylemine::reward::{AmateurAggregation, ExistVariant, RewardParams};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[clap(rename_all = "kebab-case")]
pub enum Task {
    Sentiment,
    Formality,
    Political,
    Custom,
}

impl Task {
    /// The (alpha, j_safe) pair bound to each task preset.
    pub fn constants(self) -> Option<(f64, f64)> {
        match self {
            Task::Sentiment => Some((0.4, 0.8)),
            Task::Formality => Some((0.3, 0.6)),
            Task::Political => Some((0.1, 0.4)),
            Task::Custom => None,
        }
    }
}

/// Embedding provider settings as they appear in the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub provider: String,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Path (file provider) or URL (remote provider).
    #[serde(default)]
    pub source: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub retries: usize,
}

fn default_dim() -> usize {
    128
}
fn default_timeout() -> u64 {
    30
}
fn default_retries() -> usize {
    3
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            provider: "deterministic-test".into(),
            dim: default_dim(),
            source: None,
            timeout_secs: default_timeout(),
            retries: default_retries(),
        }
    }
}

/// Fully resolved configuration, also snapshotted into run manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: Task,
    pub strategy: Strategy,
    pub k: usize,
    pub p: f64,
    pub beta: f64,
    pub norm_mode: NormMode,
    pub alpha: f64,
    pub delta: f64,
    pub j_safe: f64,
    pub amateur_aggregation: AmateurAggregation,
    pub exist_variant: ExistVariant,
    pub lambda: f64,
    pub embedding: EmbeddingConfig,
    pub sep_open: String,
    pub sep_close: String,
    pub seed: u64,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            task: Task::Custom,
            strategy: Strategy::SembSas,
            k: 8,
            p: 0.05,
            beta: 1.0,
            norm_mode: NormMode::Tokens,
            alpha: 0.4,
            delta: 1.0,
            j_safe: 0.8,
            amateur_aggregation: AmateurAggregation::Mean,
            exist_variant: ExistVariant::Symmetric,
            lambda: 0.5,
            embedding: EmbeddingConfig::default(),
            sep_open: "<s>".into(),
            sep_close: "</s>".into(),
            seed: 0,
            workers: 0,
        }
    }
}

/// Config-file shape: every field optional so partial files merge cleanly.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub task: Option<Task>,
    pub strategy: Option<Strategy>,
    pub k: Option<usize>,
    pub p: Option<f64>,
    pub beta: Option<f64>,
    pub norm_mode: Option<NormMode>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub j_safe: Option<f64>,
    pub amateur_aggregation: Option<AmateurAggregation>,
    pub exist_variant: Option<ExistVariant>,
    pub lambda: Option<f64>,
    pub embedding: Option<EmbeddingConfig>,
    pub sep_open: Option<String>,
    pub sep_close: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// Flag-level overrides shared by the subcommands.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigOverrides {
    /// Json config file; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    /// Task preset binding (alpha, j_safe): sentiment (0.4, 0.8),
    /// formality (0.3, 0.6), political (0.1, 0.4).
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub norm_mode: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub j_safe: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Embedding provider: deterministic-test, file, or remote.
    #[arg(long)]
    pub provider: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Embedding file for the file provider.
    #[arg(long)]
    pub embeddings: Option<std::path::PathBuf>,
    /// Remote embedding endpoint; falls back to STYLEMINE_EMBED_URL.
    #[arg(long)]
    pub embed_url: Option<String>,
    #[arg(long)]
    pub timeout_secs: Option<u64>,
    #[arg(long)]
    pub retries: Option<usize>,
    #[arg(long)]
    pub sep_open: Option<String>,
    #[arg(long)]
    pub sep_close: Option<String>,
}

pub fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))
}

/// Resolve defaults <- config file <- flags, then apply the task preset.
/// Explicit alpha / j_safe values that fight a non-custom preset are
/// rejected rather than silently ignored.
pub fn resolve(overrides: &ConfigOverrides) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    let file = match &overrides.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };

    macro_rules! merge {
        ($field:ident) => {
            if let Some(v) = &file.$field {
                config.$field = v.clone();
            }
        };
    }
    merge!(task);
    merge!(strategy);
    merge!(k);
    merge!(p);
    merge!(beta);
    merge!(norm_mode);
    merge!(alpha);
    merge!(delta);
    merge!(j_safe);
    merge!(amateur_aggregation);
    merge!(exist_variant);
    merge!(lambda);
    merge!(embedding);
    merge!(sep_open);
    merge!(sep_close);
    merge!(seed);
    merge!(workers);

    let file_had_alpha = file.alpha.is_some();
    let file_had_j_safe = file.j_safe.is_some();

    if let Some(task) = overrides.task {
        config.task = task;
    }
    if let Some(s) = &overrides.strategy {
        config.strategy = s.parse().map_err(CliError::from_validation)?;
    }
    if let Some(m) = &overrides.norm_mode {
        config.norm_mode = m.parse().map_err(CliError::from_validation)?;
    }
    if let Some(k) = overrides.k {
        config.k = k;
    }
    if let Some(p) = overrides.p {
        config.p = p;
    }
    if let Some(beta) = overrides.beta {
        config.beta = beta;
    }
    if let Some(alpha) = overrides.alpha {
        config.alpha = alpha;
    }
    if let Some(delta) = overrides.delta {
        config.delta = delta;
    }
    if let Some(j_safe) = overrides.j_safe {
        config.j_safe = j_safe;
    }
    if let Some(lambda) = overrides.lambda {
        config.lambda = lambda;
    }
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(workers) = overrides.workers {
        config.workers = workers;
    }
    if let Some(provider) = &overrides.provider {
        config.embedding.provider = provider.clone();
    }
    if let Some(dim) = overrides.dim {
        config.embedding.dim = dim;
    }
    if let Some(path) = &overrides.embeddings {
        config.embedding.source = Some(path.display().to_string());
    }
    if let Some(url) = &overrides.embed_url {
        config.embedding.source = Some(url.clone());
    }
    if let Some(t) = overrides.timeout_secs {
        config.embedding.timeout_secs = t;
    }
    if let Some(r) = overrides.retries {
        config.embedding.retries = r;
    }
    if let Some(s) = &overrides.sep_open {
        config.sep_open = s.clone();
    }
    if let Some(s) = &overrides.sep_close {
        config.sep_close = s.clone();
    }

    if let Some((alpha, j_safe)) = config.task.constants() {
        let fights_preset = |explicit: Option<f64>, bound: f64| {
            explicit.is_some_and(|v| (v - bound).abs() > f64::EPSILON)
        };
        if fights_preset(overrides.alpha, alpha)
            || fights_preset(overrides.j_safe, j_safe)
            || (file_had_alpha && fights_preset(file.alpha, alpha))
            || (file_had_j_safe && fights_preset(file.j_safe, j_safe))
        {
            return Err(CliError::validation(format!(
                "task preset {:?} binds alpha={alpha}, j_safe={j_safe}; use --task custom to override",
                config.task
            )));
        }
        config.alpha = alpha;
        config.j_safe = j_safe;
    }

    config.alignment_params().validate().map_err(CliError::from_validation)?;
    config.reward_params().validate().map_err(CliError::from_validation)?;
    Ok(config)
}

impl RunConfig {
    pub fn alignment_params(&self) -> AlignmentParams {
        AlignmentParams {
            strategy: self.strategy,
            k: self.k,
            p: self.p,
            beta: self.beta,
            norm_mode: self.norm_mode,
            seed: self.seed,
        }
    }

    pub fn reward_params(&self) -> RewardParams {
        RewardParams {
            alpha: self.alpha,
            delta: self.delta,
            j_safe: self.j_safe,
            amateur_aggregation: self.amateur_aggregation,
            exist_variant: self.exist_variant,
        }
    }
}
