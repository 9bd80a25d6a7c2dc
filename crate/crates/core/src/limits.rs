use serde::{Deserialize, Serialize};

/// Caps guarding every exponential construction or search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest structure a construction may materialize.
    pub max_vertices: usize,
    /// Largest number of relation tuples a construction may materialize.
    pub max_tuples: usize,
    /// Node budget of a single backtracking search.
    pub max_search_nodes: u64,
    /// Largest number of objects an enumeration may produce.
    pub max_enumeration: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_vertices: 250_000,
            max_tuples: 20_000_000,
            max_search_nodes: 50_000_000,
            max_enumeration: 2_000_000,
        }
    }
}

impl Limits {
    /// Defaults overridden by `EPPA_MAX_VERTICES`, `EPPA_MAX_TUPLES`,
    /// `EPPA_MAX_SEARCH_NODES` and `EPPA_MAX_ENUMERATION` when set.
    pub fn from_env() -> Self {
        fn var<T: std::str::FromStr>(name: &str) -> Option<T> {
            std::env::var(name).ok()?.trim().parse().ok()
        }
        let d = Limits::default();
        Limits {
            max_vertices: var("EPPA_MAX_VERTICES").unwrap_or(d.max_vertices),
            max_tuples: var("EPPA_MAX_TUPLES").unwrap_or(d.max_tuples),
            max_search_nodes: var("EPPA_MAX_SEARCH_NODES").unwrap_or(d.max_search_nodes),
            max_enumeration: var("EPPA_MAX_ENUMERATION").unwrap_or(d.max_enumeration),
        }
    }
}
