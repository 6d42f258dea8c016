//! Sweep configuration files.

use std::path::PathBuf;

use serde::Deserialize;
use voteops_core::{Behavior, Method, Thresholds};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub rule: Option<String>,
    pub m: Option<usize>,
    pub behavior: Option<Behavior>,
    /// Distribution file, relative to the config file.
    pub dist: Option<PathBuf>,
    /// Inline distribution, `{"orders": {...}}`.
    pub pi: Option<serde_json::Value>,
    /// Pool distribution for CAV, relative to the config file.
    pub pool_dist: Option<PathBuf>,
    pub target: Option<String>,
    pub n_values: Option<Vec<u64>>,
    pub trials: Option<u64>,
    pub method: Option<MethodName>,
    pub cap: Option<u64>,
    pub node_limit: Option<usize>,
    pub thresholds: Option<Thresholds>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Preorder,
    Bfs,
    Auto,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Preorder => Method::PreorderEnum,
            MethodName::Bfs => Method::BruteForceBfs,
            MethodName::Auto => Method::Auto,
        }
    }
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
