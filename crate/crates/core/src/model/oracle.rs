use super::noisy::advance;
use super::{Evidence, Network};
use crate::error::{Error, Result};

/// Default cap on the number of joint states [`brute_force_query`] enumerates.
pub const DEFAULT_STATE_CAP: u128 = 1 << 24;

/// Probability of a total assignment (`assignment[i]` is the value of node
/// `i`): the product of every node's CPT entry.
pub fn joint_probability(net: &Network, assignment: &[usize]) -> f64 {
    debug_assert_eq!(assignment.len(), net.len());
    let mut parent_values = Vec::new();
    net.ids()
        .map(|id| {
            parent_values.clear();
            parent_values.extend(net.parents(id).iter().map(|p| assignment[p.0]));
            net.cpt_entry(id, &parent_values, assignment[id.0])
        })
        .product()
}

/// Answers `P(query | evidence)` by summing the joint distribution.
///
/// With an empty query the unnormalized sum over states consistent with the
/// evidence, `P(evidence)`, is returned. Only nodes not fixed by the query or
/// evidence are enumerated; `cap` bounds that state count.
pub fn brute_force_query(
    net: &Network,
    query: &Evidence,
    evidence: &Evidence,
    cap: u128,
) -> Result<f64> {
    query.check(net)?;
    evidence.check(net)?;
    let Some(both) = evidence.merged(query) else {
        // Query contradicts the evidence.
        let pe = enumerate(net, evidence, cap)?;
        if pe == 0.0 {
            return Err(Error::ZeroEvidence);
        }
        return Ok(0.0);
    };
    if query.is_empty() {
        return enumerate(net, evidence, cap);
    }
    let pe = enumerate(net, evidence, cap)?;
    if pe == 0.0 {
        return Err(Error::ZeroEvidence);
    }
    Ok(enumerate(net, &both, cap)? / pe)
}

fn enumerate(net: &Network, fixed: &Evidence, cap: u128) -> Result<f64> {
    let free: Vec<usize> = (0..net.len())
        .filter(|&i| !fixed.contains(super::NodeId(i)))
        .collect();
    let domains: Vec<usize> = free.iter().map(|&i| net.nodes()[i].domain).collect();
    let size = domains
        .iter()
        .fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
    if size > cap {
        return Err(Error::CapExceeded {
            what: "joint state space",
            size,
            cap,
        });
    }
    let mut assignment = vec![0usize; net.len()];
    for (n, v) in fixed.iter() {
        assignment[n.0] = v;
    }
    let mut config = vec![0usize; free.len()];
    let mut total = 0.0;
    loop {
        for (&i, &v) in free.iter().zip(&config) {
            assignment[i] = v;
        }
        total += joint_probability(net, &assignment);
        if !advance(&mut config, &domains) {
            break;
        }
    }
    Ok(total)
}
