//! Query strings: `|` separates disjuncts, `,` separates conjuncts, and a
//! leading `!` negates a single `name=value` atom.

use noisywmc::infer::Query;
use noisywmc::model::{Evidence, Network, NodeId};
use noisywmc::Error;

use crate::{Failure, Outcome};

fn atom(text: &str, net: &Network) -> Outcome<(NodeId, usize, bool)> {
    let text = text.trim();
    let (negated, body) = match text.strip_prefix('!') {
        Some(rest) => (true, rest.trim()),
        None => (false, text),
    };
    let (name, value) = body
        .split_once('=')
        .ok_or_else(|| Failure::Usage(format!("query atom `{text}` is not `name=value`")))?;
    let name = name.trim();
    let node = net
        .find(name)
        .ok_or_else(|| Error::UnknownNode(name.to_owned()))?;
    let value: usize = value
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("bad value in query atom `{text}`")))?;
    if value >= net.domain(node) {
        return Err(Error::ValueOutOfDomain {
            node: name.to_owned(),
            value,
            domain: net.domain(node),
        }
        .into());
    }
    Ok((node, value, negated))
}

pub(crate) fn parse(text: &str, net: &Network) -> Outcome<Query> {
    let mut disjuncts = Vec::new();
    for part in text.split('|') {
        let mut conjuncts = Vec::new();
        for a in part.split(',') {
            let (node, value, negated) = atom(a, net)?;
            let q = Query::is(node, value);
            conjuncts.push(if negated { Query::not(q) } else { q });
        }
        disjuncts.push(if conjuncts.len() == 1 {
            conjuncts.pop().unwrap()
        } else {
            Query::And(conjuncts)
        });
    }
    Ok(if disjuncts.len() == 1 {
        disjuncts.pop().unwrap()
    } else {
        Query::Or(disjuncts)
    })
}

/// A conjunction of positive atoms. `None` when two atoms contradict.
pub(crate) fn parse_conjunction(text: &str, net: &Network) -> Outcome<Option<Evidence>> {
    let mut ev = Evidence::new();
    for a in text.split(',') {
        if a.contains('|') || a.trim_start().starts_with('!') {
            return Err(Failure::Usage(format!(
                "oracle queries are conjunctions of `name=value`, got `{text}`"
            )));
        }
        let (node, value, _) = atom(a, net)?;
        if ev.insert(node, value).is_some_and(|old| old != value) {
            return Ok(None);
        }
    }
    Ok(Some(ev))
}
