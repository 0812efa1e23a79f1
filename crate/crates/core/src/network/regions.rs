use crate::config::ConfigMap;

use super::SimError;

const EMBEDDED_2020: &str = include_str!("../../data/realworld_2020.cfg");

/// Full-node counts per region, in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionDistribution {
    pub version: String,
    pub regions: Vec<(String, u64)>,
}

impl RegionDistribution {
    /// The bundled 2020 snapshot.
    pub fn embedded_2020() -> Self {
        Self::parse(EMBEDDED_2020).expect("bundled region data is well formed")
    }

    /// Parses `version = ...` and `region.<name> = <count>` lines.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let map = ConfigMap::parse(text).map_err(|e| SimError::Config(e.to_string()))?;
        let mut regions = Vec::new();
        let mut version = String::from("unversioned");
        for (key, value) in map.entries_in_order() {
            if key == "version" {
                version = value.to_string();
            } else if let Some(name) = key.strip_prefix("region.") {
                let count: u64 = value
                    .parse()
                    .map_err(|_| SimError::Config(format!("region `{name}`: `{value}` is not a count")))?;
                if count == 0 {
                    return Err(SimError::Config(format!("region `{name}` has no full nodes")));
                }
                regions.push((name.to_string(), count));
            } else {
                return Err(SimError::Config(format!("unexpected key `{key}` in region data")));
            }
        }
        if regions.is_empty() {
            return Err(SimError::Config("region data lists no regions".into()));
        }
        Ok(RegionDistribution { version, regions })
    }

    pub fn total(&self) -> u64 {
        self.regions.iter().map(|(_, c)| c).sum()
    }

    pub fn count(&self, region: &str) -> Option<u64> {
        self.regions.iter().find(|(r, _)| r == region).map(|(_, c)| *c)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.regions.iter().map(|(r, _)| r.as_str())
    }

    /// Region label of the `i`-th full node when nodes are laid out region by
    /// region in file order.
    pub fn region_of_index(&self, mut i: u64) -> Option<&str> {
        for (name, count) in &self.regions {
            if i < *count {
                return Some(name);
            }
            i -= count;
        }
        None
    }
}
