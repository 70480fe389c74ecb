//! Line-oriented network and evidence files.
//!
//! ```text
//! # comment
//! node Cold 2
//! node Nausea 3
//! prior Cold : 0.6 0.4
//! cpt <child> <parent>... : <row-major probabilities>
//! noisyor <child> <parent>... : q1 ... qn
//! noisymax Nausea Cold : 0.7 0.2 0.1
//! ```
//!
//! Noisy-MAX parameters list, for each parent `i` and each nonzero parent
//! value `x`, the column `q[i][x][0..d_Y]`. Evidence files hold lines
//! `<name> = <value-index>`.

use std::fmt::Write as _;

use super::{Distribution, Evidence, Network, NodeId};
use crate::error::{Error, Result};

pub fn parse_network(text: &str) -> Result<Network> {
    let mut net = Network::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = strip_comment(raw);
        let mut words = line.split_whitespace();
        let Some(directive) = words.next() else {
            continue;
        };
        match directive {
            "node" => {
                let (name, d) = match (words.next(), words.next(), words.next()) {
                    (Some(n), Some(d), None) => (n, d),
                    _ => return Err(Error::syntax(line_no, "expected `node <name> <d>`")),
                };
                let d: usize = d
                    .parse()
                    .map_err(|_| Error::syntax(line_no, format!("bad domain size `{d}`")))?;
                net.add_node(name, d)
                    .map_err(|e| Error::syntax(line_no, e.to_string()))?;
            }
            "prior" | "cpt" | "noisyor" | "noisymax" => {
                let (head, tail) = line
                    .split_once(':')
                    .ok_or_else(|| Error::syntax(line_no, "missing `:`"))?;
                let mut names = head.split_whitespace().skip(1);
                let child_name = names
                    .next()
                    .ok_or_else(|| Error::syntax(line_no, "missing child name"))?;
                let child = resolve(&net, child_name, line_no)?;
                let parents = names
                    .map(|n| resolve(&net, n, line_no))
                    .collect::<Result<Vec<_>>>()?;
                let values = tail
                    .split_whitespace()
                    .map(|w| {
                        w.parse::<f64>()
                            .map_err(|_| Error::syntax(line_no, format!("bad number `{w}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if net.node(child).distribution.is_some() {
                    return Err(Error::syntax(
                        line_no,
                        format!("node `{child_name}` already has a distribution"),
                    ));
                }
                match directive {
                    "prior" => {
                        if !parents.is_empty() {
                            return Err(Error::syntax(line_no, "prior takes no parents"));
                        }
                        expect_len(values.len(), net.domain(child), line_no)?;
                        net.set_prior(child, values);
                    }
                    "cpt" => {
                        let rows: usize = parents.iter().map(|&p| net.domain(p)).product();
                        expect_len(values.len(), rows * net.domain(child), line_no)?;
                        net.set_cpt(child, parents, values);
                    }
                    "noisyor" => {
                        expect_len(values.len(), parents.len(), line_no)?;
                        net.set_noisy_or(child, parents, values);
                    }
                    _ => {
                        let d = net.domain(child);
                        let expected: usize =
                            parents.iter().map(|&p| (net.domain(p) - 1) * d).sum();
                        expect_len(values.len(), expected, line_no)?;
                        let mut it = values.chunks(d);
                        let q = parents
                            .iter()
                            .map(|&p| {
                                (1..net.domain(p))
                                    .map(|_| it.next().unwrap().to_vec())
                                    .collect()
                            })
                            .collect();
                        net.set_noisy_max(child, parents, q);
                    }
                }
            }
            other => {
                return Err(Error::syntax(
                    line_no,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }
    if let Some(node) = net.nodes().iter().find(|n| n.distribution.is_none()) {
        return Err(Error::syntax(
            text.lines().count().max(1),
            format!("node `{}` has no distribution", node.name),
        ));
    }
    Ok(net)
}

/// Serializes `net` so that [`parse_network`] reproduces it exactly. Numbers
/// use the shortest representation that round-trips.
pub fn write_network(net: &Network) -> String {
    let mut out = String::new();
    for node in net.nodes() {
        writeln!(out, "node {} {}", node.name, node.domain).unwrap();
    }
    for node in net.nodes() {
        let Some(dist) = &node.distribution else {
            continue;
        };
        let (directive, values): (&str, Vec<f64>) = match dist {
            Distribution::Cpt(c) if c.parents.is_empty() => ("prior", c.table.clone()),
            Distribution::Cpt(c) => ("cpt", c.table.clone()),
            Distribution::NoisyOr(n) => ("noisyor", n.q.clone()),
            Distribution::NoisyMax(n) => ("noisymax", n.q.iter().flatten().flatten().copied().collect()),
        };
        out.push_str(directive);
        out.push(' ');
        out.push_str(&node.name);
        for p in dist.parents() {
            out.push(' ');
            out.push_str(&net.node(*p).name);
        }
        out.push_str(" :");
        for v in values {
            write!(out, " {v:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_evidence(text: &str, net: &Network) -> Result<Evidence> {
    let mut ev = Evidence::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| Error::syntax(line_no, "expected `<name> = <value>`"))?;
        let node = resolve(net, name.trim(), line_no)?;
        let value: usize = value
            .trim()
            .parse()
            .map_err(|_| Error::syntax(line_no, format!("bad value `{}`", value.trim())))?;
        if value >= net.domain(node) {
            return Err(Error::syntax(
                line_no,
                format!("value {value} outside the domain of `{}`", name.trim()),
            ));
        }
        if ev.insert(node, value).is_some_and(|old| old != value) {
            return Err(Error::syntax(
                line_no,
                format!("conflicting values for `{}`", name.trim()),
            ));
        }
    }
    Ok(ev)
}

pub fn write_evidence(ev: &Evidence, net: &Network) -> String {
    let mut out = String::new();
    for (n, v) in ev.iter() {
        writeln!(out, "{} = {}", net.node(n).name, v).unwrap();
    }
    out
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(code, _)| code)
}

fn resolve(net: &Network, name: &str, line: usize) -> Result<NodeId> {
    net.find(name)
        .ok_or_else(|| Error::syntax(line, format!("unknown node `{name}`")))
}

fn expect_len(found: usize, expected: usize, line: usize) -> Result<()> {
    if found != expected {
        return Err(Error::syntax(
            line,
            format!("expected {expected} numbers, found {found}"),
        ));
    }
    Ok(())
}
