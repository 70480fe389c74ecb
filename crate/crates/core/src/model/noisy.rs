use super::{Distribution, FullCpt, Network, NodeId};
use crate::error::{Error, Result};

/// Default refusal threshold for [`expand_to_full_cpt`], in table entries.
pub const DEFAULT_TABLE_CAP: u128 = 1 << 24;

/// Entry of the full CPT of a noisy-OR.
///
/// `P(Y=0 | x) = prod of q_i over present parents` (1 when none is present),
/// and `P(Y=1 | x)` is its complement.
pub fn noisy_or_cpt_entry(q: &[f64], parent_values: &[usize], y: usize) -> f64 {
    debug_assert_eq!(q.len(), parent_values.len());
    let absent: f64 = q
        .iter()
        .zip(parent_values)
        .filter(|(_, &x)| x != 0)
        .map(|(&qi, _)| qi)
        .product();
    if y == 0 {
        absent
    } else {
        1.0 - absent
    }
}

/// `P(Y <= y | x)` for a noisy-MAX: the product, over parents with a nonzero
/// value, of that parent's cumulative column sum up to `y`.
pub fn noisy_max_cumulative(q: &[Vec<Vec<f64>>], parent_values: &[usize], y: usize) -> f64 {
    debug_assert_eq!(q.len(), parent_values.len());
    q.iter()
        .zip(parent_values)
        .filter(|(_, &x)| x != 0)
        .map(|(qi, &x)| qi[x - 1][..=y].iter().sum::<f64>())
        .product()
}

/// `P(Y = y | x)` for a noisy-MAX, as a difference of consecutive cumulative
/// values.
pub fn noisy_max_cpt_entry(q: &[Vec<Vec<f64>>], parent_values: &[usize], y: usize) -> f64 {
    let upto = noisy_max_cumulative(q, parent_values, y);
    if y == 0 {
        upto
    } else {
        upto - noisy_max_cumulative(q, parent_values, y - 1)
    }
}

/// Materializes the full CPT of `id`, refusing when it would hold more than
/// `cap` entries. Full CPTs are returned as they are.
pub fn expand_to_full_cpt(net: &Network, id: NodeId, cap: u128) -> Result<FullCpt> {
    let node = net.node(id);
    let dist = node
        .distribution
        .as_ref()
        .ok_or_else(|| Error::SpecInvalid(format!("node `{}` has no distribution", node.name)))?;
    if let Distribution::Cpt(cpt) = dist {
        return Ok(cpt.clone());
    }
    let parents = dist.parents().to_vec();
    let domains: Vec<usize> = parents.iter().map(|&p| net.domain(p)).collect();
    let size = domains
        .iter()
        .fold(node.domain as u128, |acc, &d| acc.saturating_mul(d as u128));
    if size > cap {
        return Err(Error::CapExceeded {
            what: "full CPT",
            size,
            cap,
        });
    }

    let mut table = Vec::with_capacity(size as usize);
    let mut config = vec![0usize; parents.len()];
    loop {
        for y in 0..node.domain {
            table.push(net.cpt_entry(id, &config, y));
        }
        if !advance(&mut config, &domains) {
            break;
        }
    }
    Ok(FullCpt { parents, table })
}

/// Odometer increment with the last position fastest. Returns false after the
/// final configuration.
pub(crate) fn advance(config: &mut [usize], domains: &[usize]) -> bool {
    for i in (0..config.len()).rev() {
        config[i] += 1;
        if config[i] < domains[i] {
            return true;
        }
        config[i] = 0;
    }
    false
}
