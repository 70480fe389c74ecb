//! Benchmark suites.
//!
//! ```text
//! # comment
//! encodings wmc1 wmc2
//! heuristics vsads static
//! instance <id> <network-file> [<evidence-file>]
//! two-layer <id> <diseases> <symptoms> <parents> <positives> <seed> [max <d>]
//! multi-layer <id> <nodes> <arcs> <seed> [max <d>]
//! ```
//!
//! Paths are relative to the suite file. Every instance runs under every
//! listed encoding and heuristic (default `wmc2` and `vsads`), and each run
//! writes one CSV row:
//!
//! `instance,encoding,heuristic,probability,decisions,cache_hits,time_ms,seed`
//!
//! where `probability` is the probability of the instance's evidence and
//! `seed` is empty for file instances.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use noisywmc::count::{Counter, Heuristic, SolverConfig};
use noisywmc::encode::{encode_network, Encoding, Policy};
use noisywmc::gen::{gen_evidence, gen_multi_layer, gen_two_layer, GenSpec};
use noisywmc::model::{Evidence, Network};
use noisywmc::Error;

use crate::{at, encode_options, load_evidence, load_network, read, Outcome};

pub(crate) const COLUMNS: [&str; 8] = [
    "instance",
    "encoding",
    "heuristic",
    "probability",
    "decisions",
    "cache_hits",
    "time_ms",
    "seed",
];

enum Source {
    Files(PathBuf, Option<PathBuf>),
    Generated(GenSpec, Option<usize>),
}

struct Instance {
    id: String,
    source: Source,
    line: usize,
}

struct Suite {
    encodings: Vec<Encoding>,
    heuristics: Vec<Heuristic>,
    instances: Vec<Instance>,
}

fn syntax<T>(line: usize, message: impl Into<String>) -> noisywmc::Result<T> {
    Err(Error::Syntax {
        line,
        message: message.into(),
    })
}

fn number<T: FromStr>(word: Option<&str>, what: &str, line: usize) -> noisywmc::Result<T> {
    match word.map(str::parse) {
        Some(Ok(v)) => Ok(v),
        Some(Err(_)) => syntax(line, format!("bad {what} `{}`", word.unwrap())),
        None => syntax(line, format!("missing {what}")),
    }
}

fn parse_list<T: FromStr<Err = String>>(
    words: std::str::SplitWhitespace<'_>,
    line: usize,
) -> noisywmc::Result<Vec<T>> {
    let items = words
        .map(str::parse)
        .collect::<Result<Vec<T>, String>>()
        .or_else(|m| syntax(line, m))?;
    if items.is_empty() {
        return syntax(line, "empty list");
    }
    Ok(items)
}

fn max_suffix(
    spec: GenSpec,
    mut words: std::str::SplitWhitespace<'_>,
    line: usize,
) -> noisywmc::Result<GenSpec> {
    match words.next() {
        None => Ok(spec),
        Some("max") => Ok(spec.noisy_max(number(words.next(), "domain", line)?)),
        Some(w) => syntax(line, format!("unexpected `{w}`")),
    }
}

fn parse(text: &str, dir: &Path) -> noisywmc::Result<Suite> {
    let mut suite = Suite {
        encodings: vec![Encoding::Wmc2],
        heuristics: vec![Heuristic::Vsads],
        instances: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let code = raw.split_once('#').map_or(raw, |(c, _)| c);
        let mut words = code.split_whitespace();
        let Some(directive) = words.next() else {
            continue;
        };
        match directive {
            "encodings" => suite.encodings = parse_list(words, line)?,
            "heuristics" => suite.heuristics = parse_list(words, line)?,
            "instance" | "two-layer" | "multi-layer" => {
                let Some(id) = words.next() else {
                    return syntax(line, "missing instance id");
                };
                let source = match directive {
                    "instance" => {
                        let Some(net) = words.next() else {
                            return syntax(line, "missing network file");
                        };
                        let ev = words.next().map(|e| dir.join(e));
                        if let Some(w) = words.next() {
                            return syntax(line, format!("unexpected `{w}`"));
                        }
                        Source::Files(dir.join(net), ev)
                    }
                    "two-layer" => {
                        let d = number(words.next(), "disease count", line)?;
                        let s = number(words.next(), "symptom count", line)?;
                        let k = number(words.next(), "parent count", line)?;
                        let pos = number(words.next(), "positive count", line)?;
                        let seed = number(words.next(), "seed", line)?;
                        let spec = max_suffix(GenSpec::two_layer(d, s, k, seed), words, line)?;
                        Source::Generated(spec, Some(pos))
                    }
                    _ => {
                        let n = number(words.next(), "node count", line)?;
                        let m = number(words.next(), "arc count", line)?;
                        let seed = number(words.next(), "seed", line)?;
                        let spec = max_suffix(GenSpec::multi_layer(n, m, seed), words, line)?;
                        Source::Generated(spec, None)
                    }
                };
                suite.instances.push(Instance {
                    id: id.to_owned(),
                    source,
                    line,
                });
            }
            other => return syntax(line, format!("unknown directive `{other}`")),
        }
    }
    if suite.instances.is_empty() {
        return syntax(text.lines().count().max(1), "suite has no instances");
    }
    Ok(suite)
}

fn materialize(inst: &Instance, suite: &Path) -> Outcome<(Network, Evidence, String)> {
    match &inst.source {
        Source::Files(net, ev) => {
            let network = load_network(net)?;
            let evidence = load_evidence(ev.as_deref(), &network)?;
            Ok((network, evidence, String::new()))
        }
        Source::Generated(spec, positives) => {
            let generated = match positives {
                Some(k) => gen_two_layer(spec)
                    .and_then(|net| gen_evidence(&net, *k).map(|ev| (net, ev))),
                None => gen_multi_layer(spec).map(|net| (net, Evidence::new())),
            };
            let (network, evidence) =
                at(suite, generated).map_err(|f| with_line(f, inst.line))?;
            Ok((network, evidence, spec.seed.to_string()))
        }
    }
}

fn with_line(f: crate::Failure, line: usize) -> crate::Failure {
    match f {
        crate::Failure::Lib { file, error } => crate::Failure::Lib {
            file,
            error: Error::Syntax {
                line,
                message: error.to_string(),
            },
        },
        other => other,
    }
}

pub(crate) fn bench(suite_path: &Path, out: &Path) -> Outcome<()> {
    let dir = suite_path.parent().unwrap_or(Path::new("."));
    let suite = at(suite_path, parse(&read(suite_path)?, dir))?;
    let options = encode_options()?;
    let mut writer = at(out, csv::Writer::from_path(out).map_err(csv_error))?;
    at(out, writer.write_record(COLUMNS).map_err(csv_error))?;
    let mut rows = 0;
    for inst in &suite.instances {
        let (net, evidence, seed) = materialize(inst, suite_path)?;
        for &encoding in &suite.encodings {
            let policy = Policy::uniform(&net, encoding)?;
            let encoded = encode_network(&net, &evidence, &policy, &options)?;
            for &heuristic in &suite.heuristics {
                let config = SolverConfig::default().with_heuristic(heuristic);
                let (p, stats) = Counter::new(config).count(&encoded.cnf);
                let record = [
                    inst.id.clone(),
                    encoding.to_string(),
                    heuristic.to_string(),
                    p.to_string(),
                    stats.decisions.to_string(),
                    stats.cache_hits.to_string(),
                    stats.time_ms.to_string(),
                    seed.clone(),
                ];
                at(out, writer.write_record(&record).map_err(csv_error))?;
                rows += 1;
            }
        }
    }
    at(out, writer.flush().map_err(Error::from))?;
    println!("rows {rows}");
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}
