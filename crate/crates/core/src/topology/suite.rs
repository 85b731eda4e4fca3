use serde::{Deserialize, Serialize};

use super::{gen_delaunay, gen_scale_free, gen_small_world, GraphFamily, Topology, TopologyError};
use crate::seed;

/// Generator parameters. `None` selects the size-dependent default:
/// small-world `k = 4` (`k = 2` for 4 nodes), scale-free `m = 2` (`m = 1`
/// for 4 nodes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyParams {
    pub ws_k: Option<usize>,
    pub ws_p: f64,
    pub ba_m: Option<usize>,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            ws_k: None,
            ws_p: 0.3,
            ba_m: None,
        }
    }
}

impl FamilyParams {
    pub fn ws_k_for(&self, n: usize) -> usize {
        self.ws_k.unwrap_or(if n <= 4 { 2 } else { 4 })
    }

    pub fn ba_m_for(&self, n: usize) -> usize {
        self.ba_m.unwrap_or(if n <= 4 { 1 } else { 2 })
    }

    pub fn generate(&self, family: GraphFamily, n: usize, seed: u64) -> Result<Topology, TopologyError> {
        match family {
            GraphFamily::SmallWorld => gen_small_world(n, self.ws_k_for(n), self.ws_p, seed),
            GraphFamily::ScaleFree => gen_scale_free(n, self.ba_m_for(n), seed),
            GraphFamily::Delaunay => gen_delaunay(n, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub sizes: Vec<usize>,
    #[serde(default = "all_families")]
    pub families: Vec<GraphFamily>,
    #[serde(default = "default_per_cell")]
    pub per_cell: usize,
    pub seed: u64,
    #[serde(default)]
    pub params: FamilyParams,
}

fn all_families() -> Vec<GraphFamily> {
    GraphFamily::ALL.to_vec()
}

fn default_per_cell() -> usize {
    3
}

impl SuiteSpec {
    /// 3 sizes x 3 families x 3 instances = 27 graphs.
    pub fn benchmark(seed: u64) -> Self {
        SuiteSpec {
            sizes: vec![4, 8, 16],
            families: all_families(),
            per_cell: 3,
            seed,
            params: FamilyParams::default(),
        }
    }

    /// Sizes 20, 30, ..., 100; 81 graphs.
    pub fn scaling(seed: u64) -> Self {
        SuiteSpec {
            sizes: (2..=10).map(|k| k * 10).collect(),
            ..Self::benchmark(seed)
        }
    }
}

/// One generated suite member with its cell coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteTopology {
    pub size: usize,
    pub family: GraphFamily,
    pub instance: usize,
    pub topology: Topology,
}

impl SuiteTopology {
    /// Stable identifier, e.g. `scale_free-n8-i2`.
    pub fn reference(&self) -> String {
        format!("{}-n{}-i{}", self.family, self.size, self.instance)
    }
}

/// Generates `per_cell` graphs for every `(size, family)` pair, in size-major
/// order, each from its own derived seed.
pub fn gen_benchmark_suite(spec: &SuiteSpec) -> Result<Vec<SuiteTopology>, TopologyError> {
    if spec.sizes.is_empty() {
        return Err(TopologyError::Parameter("suite needs at least one size".into()));
    }
    if spec.families.is_empty() {
        return Err(TopologyError::Parameter("suite needs at least one family".into()));
    }
    if spec.per_cell == 0 {
        return Err(TopologyError::Parameter("per_cell must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(spec.sizes.len() * spec.families.len() * spec.per_cell);
    for &size in &spec.sizes {
        for &family in &spec.families {
            for instance in 0..spec.per_cell {
                let s = seed::derive(spec.seed, &[size as u64, family.index(), instance as u64]);
                let topology = spec.params.generate(family, size, s)?;
                out.push(SuiteTopology {
                    size,
                    family,
                    instance,
                    topology,
                });
            }
        }
    }
    Ok(out)
}
