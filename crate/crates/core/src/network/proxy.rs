use std::collections::BTreeMap;

use crate::NodeId;

use super::{Population, SimError};

/// Assigns each light node to its nearest proxy; equidistant proxies resolve
/// to the lowest node id.
pub fn proxy_assign(population: &Population) -> Result<BTreeMap<NodeId, NodeId>, SimError> {
    let proxies: Vec<_> = population.proxies().collect();
    if proxies.is_empty() {
        return Err(SimError::Config("proxy routing needs at least one proxy node".into()));
    }
    Ok(population
        .light_nodes()
        .map(|light| {
            let best = proxies
                .iter()
                .min_by(|a, b| {
                    let da = a.position.distance(&light.position);
                    let db = b.position.distance(&light.position);
                    da.total_cmp(&db).then(a.node_id.cmp(&b.node_id))
                })
                .expect("non-empty proxy list");
            (light.node_id, best.node_id)
        })
        .collect())
}
