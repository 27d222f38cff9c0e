//! Expansion resources loaded once at startup and shared read-only.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::Args;
use lexpand_core::colex::ColexExpander;
use lexpand_core::embedding::{self, load_embeddings_path, EmbeddingMode, FrequencyRanking};
use lexpand_core::{ColexGraph, CombineMode, CombinedExpander, EmbeddingExpander, EmbeddingSpace, Expander, SynonymGraph};
use serde::{Deserialize, Serialize};

pub const METHODS: [&str; 6] = [
    "colex",
    "synonym",
    "embedding-threshold",
    "embedding-centroid",
    "union",
    "intersection",
];

#[derive(Args, Debug, Clone, Default)]
pub struct ResourceArgs {
    /// Colexification graph bundle directory.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Synonym edge list (word_a<TAB>word_b).
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
    /// Textual word-vector file.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Frequency ranking, one word per line, most frequent first.
    #[arg(long)]
    pub ranking: Option<PathBuf>,
    #[arg(long, default_value_t = embedding::DEFAULT_TOP_N)]
    pub top_n: usize,
}

impl ResourceArgs {
    pub fn load(&self) -> anyhow::Result<Resources> {
        let graph = match &self.graph {
            Some(p) => Some(Arc::new(
                ColexGraph::read_bundle(p).with_context(|| format!("loading graph bundle {}", p.display()))?,
            )),
            None => None,
        };
        let synonyms = match &self.synonyms {
            Some(p) => Some(Arc::new(
                SynonymGraph::read_path(p).with_context(|| format!("loading synonym graph {}", p.display()))?,
            )),
            None => None,
        };
        let space = match (&self.embeddings, &self.ranking) {
            (Some(vec), Some(rank)) => {
                let ranking = FrequencyRanking::read_path(rank)
                    .with_context(|| format!("loading frequency ranking {}", rank.display()))?;
                Some(Arc::new(
                    load_embeddings_path(vec, &ranking, self.top_n)
                        .with_context(|| format!("loading embeddings {}", vec.display()))?,
                ))
            }
            (None, None) => None,
            _ => bail!("--embeddings and --ranking must be given together"),
        };
        Ok(Resources { graph, synonyms, space })
    }
}

#[derive(Clone, Default)]
pub struct Resources {
    pub graph: Option<Arc<ColexGraph>>,
    pub synonyms: Option<Arc<SynonymGraph>>,
    pub space: Option<Arc<EmbeddingSpace>>,
}

/// Method parameters shared by the CLI and the HTTP API.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodParams {
    pub lang: String,
    pub tau: f64,
    /// Member methods of a union or intersection.
    pub members: Vec<String>,
}

impl Default for MethodParams {
    fn default() -> Self {
        MethodParams {
            lang: "en".into(),
            tau: embedding::DEFAULT_TAU,
            members: Vec::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MethodError {
    #[error("unknown method {0:?}")]
    Unknown(String),
    #[error("resource for method {0:?} is not loaded")]
    Unavailable(String),
    #[error(transparent)]
    Core(#[from] lexpand_core::Error),
}

impl Resources {
    pub fn is_available(&self, method: &str) -> bool {
        match method {
            "colex" => self.graph.is_some(),
            "synonym" => self.synonyms.is_some(),
            "embedding-threshold" | "embedding-centroid" => self.space.is_some(),
            "union" | "intersection" => self.default_members().len() >= 2,
            _ => false,
        }
    }

    fn default_members(&self) -> Vec<String> {
        ["colex", "synonym", "embedding-threshold", "embedding-centroid"]
            .into_iter()
            .filter(|m| self.is_available(m))
            .map(str::to_string)
            .collect()
    }

    pub fn expander(&self, method: &str, params: &MethodParams) -> Result<Arc<dyn Expander>, MethodError> {
        let unavailable = || MethodError::Unavailable(method.to_string());
        Ok(match method {
            "colex" => {
                let g = self.graph.clone().ok_or_else(unavailable)?;
                Arc::new(ColexExpander::new(g, &params.lang)?)
            }
            "synonym" => self.synonyms.clone().ok_or_else(unavailable)?,
            "embedding-threshold" | "embedding-centroid" => {
                let space = self.space.clone().ok_or_else(unavailable)?;
                let mode = if method == "embedding-threshold" {
                    EmbeddingMode::Threshold
                } else {
                    EmbeddingMode::Centroid
                };
                Arc::new(EmbeddingExpander::new(space, mode, params.tau)?)
            }
            "union" | "intersection" => {
                let mode: CombineMode = method.parse()?;
                let members = if params.members.is_empty() {
                    self.default_members()
                } else {
                    params.members.clone()
                };
                if members.len() < 2 {
                    return Err(unavailable());
                }
                let experts = members
                    .iter()
                    .map(|m| {
                        if m == "union" || m == "intersection" {
                            Err(MethodError::Unknown(m.clone()))
                        } else {
                            self.expander(m, params)
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Arc::new(CombinedExpander::new(experts, mode)?)
            }
            other => return Err(MethodError::Unknown(other.to_string())),
        })
    }
}
