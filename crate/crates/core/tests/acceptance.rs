//! Acceptance checks. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::ops::Range;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use noisywmc::count::{count, Counter, Heuristic, SolverConfig};
use noisywmc::encode::{encode_network, EncodeOptions, Encoder, Encoding, Policy};
use noisywmc::gen::{gen_evidence, gen_multi_layer, gen_two_layer, GenSpec, Source};
use noisywmc::infer::{conditional_query, probability_of_evidence, Query};
use noisywmc::model::fixtures::{medical_noisy_max, medical_noisy_or};
use noisywmc::model::{
    brute_force_query, expand_to_full_cpt, write_evidence, write_network, Evidence, Network,
    NodeId, DEFAULT_STATE_CAP, DEFAULT_TABLE_CAP,
};
use noisywmc::wcnf::{
    brute_force_weight, emit_wdimacs, parse_wdimacs, residual, residual_all, Lit, Var, WeightedCnf,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn relative_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()) || a == b
}

fn all_configs(domains: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &d in domains {
        out = out
            .into_iter()
            .flat_map(|c| {
                (0..d).map(move |x| {
                    let mut c = c.clone();
                    c.push(x);
                    c
                })
            })
            .collect();
    }
    out
}

/// The clauses in `range` alone conditioned on `assignment`, with every other
/// var marked assigned so that only the node's own vars are summed out.
fn local(cnf: &WeightedCnf, range: Range<usize>, assignment: &[Lit]) -> WeightedCnf {
    let mut f = WeightedCnf::new(cnf.num_vars());
    let mut used = vec![false; cnf.num_vars()];
    for c in &cnf.clauses()[range] {
        for l in c.lits() {
            used[l.var().index()] = true;
        }
        f.push_clause(c.clone());
    }
    for v in cnf.vars() {
        let (p, n) = cnf.weights(v);
        f.set_weights(v, p, n);
    }
    let mut f = residual_all(&f, assignment.iter().copied().filter(|l| used[l.var().index()]));
    for v in cnf.vars().filter(|v| !used[v.index()]) {
        f = residual(&f, v.pos());
    }
    f
}

fn node_assignment(enc: &Encoder, values: &[(NodeId, usize)]) -> Vec<Lit> {
    values
        .iter()
        .flat_map(|&(n, v)| enc.registry().indicators(n).assignment(v))
        .collect()
}

/// Weighted count of one node's clauses for every parent configuration and
/// child value, next to the CPT entry it should reproduce.
fn node_entries(
    net: &Network,
    encode: impl FnOnce(&mut Encoder, NodeId) -> Range<usize>,
) -> Vec<(f64, f64)> {
    let y = NodeId(net.len() - 1);
    let parents = net.parents(y).to_vec();
    let mut enc = Encoder::new(net);
    let range = encode(&mut enc, y);
    let domains: Vec<usize> = parents.iter().map(|&p| net.domain(p)).collect();
    let mut out = Vec::new();
    for config in all_configs(&domains) {
        for v in 0..net.domain(y) {
            let mut values: Vec<(NodeId, usize)> = parents.iter().copied().zip(config.clone()).collect();
            values.push((y, v));
            let f = local(enc.cnf(), range.clone(), &node_assignment(&enc, &values));
            let w = brute_force_weight(&f, 64).expect("small node");
            out.push((w, net.cpt_entry(y, &config, v)));
        }
    }
    out
}

fn random_noisy_or_node(rng: &mut Source) -> Network {
    let n = 1 + rng.index(5);
    let mut net = Network::new();
    let parents: Vec<NodeId> = (0..n).map(|i| net.add_node(format!("X{i}"), 2).unwrap()).collect();
    for &p in &parents {
        net.set_prior(p, vec![0.5, 0.5]);
    }
    let y = net.add_node("Y", 2).unwrap();
    let q = (0..n).map(|_| rng.uniform()).collect();
    net.set_noisy_or(y, parents, q);
    net
}

fn random_noisy_max_node(rng: &mut Source) -> Network {
    let n = 1 + rng.index(3);
    let dy = 2 + rng.index(3);
    let mut net = Network::new();
    let parents: Vec<NodeId> = (0..n)
        .map(|i| net.add_node(format!("X{i}"), 2 + rng.index(3)).unwrap())
        .collect();
    for &p in &parents {
        let d = net.domain(p);
        net.set_prior(p, vec![1.0 / d as f64; d]);
    }
    let y = net.add_node("Y", dy).unwrap();
    let q = parents
        .iter()
        .map(|&p| (1..net.domain(p)).map(|_| rng.dirichlet(dy)).collect())
        .collect();
    net.set_noisy_max(y, parents, q);
    net
}

fn max_nodes() -> Vec<Network> {
    let mut rng = Source::seeded(0xAC02);
    (0..100).map(|_| random_noisy_max_node(&mut rng)).collect()
}

fn criterion_1() -> Outcome {
    let cases = [
        (
            medical_noisy_or(),
            vec![
                [1.00, 0.00],
                [0.40, 0.60],
                [0.50, 0.50],
                [0.20, 0.80],
                [0.60, 0.40],
                [0.24, 0.76],
                [0.30, 0.70],
                [0.12, 0.88],
            ]
            .concat(),
        ),
        (
            medical_noisy_max(),
            vec![
                [1.000, 0.000, 0.000],
                [0.100, 0.400, 0.500],
                [0.500, 0.200, 0.300],
                [0.050, 0.300, 0.650],
                [0.700, 0.200, 0.100],
                [0.070, 0.380, 0.550],
                [0.350, 0.280, 0.370],
                [0.035, 0.280, 0.685],
            ]
            .concat(),
        ),
    ];
    for (net, golden) in cases {
        let nausea = net.lookup("Nausea").map_err(|e| e.to_string())?;
        let cpt = expand_to_full_cpt(&net, nausea, DEFAULT_TABLE_CAP).map_err(|e| e.to_string())?;
        ensure!(cpt.table.len() == golden.len(), "table has {} entries", cpt.table.len());
        for (i, (got, want)) in cpt.table.iter().zip(&golden).enumerate() {
            ensure!((got - want).abs() < 1e-12, "entry {i}: {got} vs {want}");
        }
    }
    Ok("8x2 and 8x3 tables exact to 1e-12".into())
}

fn criterion_2() -> Outcome {
    let mut rng = Source::seeded(0xAC01);
    let mut checked = 0;
    for k in 0..200 {
        let net = random_noisy_or_node(&mut rng);
        for (name, entries) in [
            ("wmc1", node_entries(&net, |e, y| e.encode_noisy_or_wmc1(y, None).unwrap())),
            ("wmc2", node_entries(&net, |e, y| e.encode_noisy_or_wmc2(y).unwrap())),
        ] {
            for (w, want) in entries {
                ensure!((w - want).abs() < 1e-12, "OR node {k} {name}: {w} vs {want}");
                checked += 1;
            }
        }
    }
    for (k, net) in max_nodes().iter().enumerate() {
        for (name, entries) in [
            ("max1", node_entries(net, |e, y| e.encode_noisy_max_max1(y).unwrap())),
            ("max2", node_entries(net, |e, y| e.encode_noisy_max_max2(y, true).unwrap())),
        ] {
            for (w, want) in entries {
                ensure!((w - want).abs() < 1e-9, "MAX node {k} {name}: {w} vs {want}");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} CPT entries over 200 OR and 100 MAX nodes"))
}

struct Case {
    net: Network,
    policies: Vec<(String, Policy)>,
}

fn policies(net: &Network, rng: &mut Source, choices: &[Encoding]) -> Vec<(String, Policy)> {
    let mut out: Vec<(String, Policy)> = [Encoding::General]
        .iter()
        .chain(choices)
        .map(|&e| (e.to_string(), Policy::uniform(net, e).unwrap()))
        .collect();
    let mut mixed = Policy::general(net);
    for id in net.ids() {
        if !net.parents(id).is_empty() {
            let e = [Encoding::General, choices[0], choices[1]][rng.index(3)];
            mixed.set(net, id, e).unwrap();
        }
    }
    out.push(("mixed".into(), mixed));
    out
}

/// The oracle-checked networks: 50 noisy-OR and 30 noisy-MAX.
fn cases() -> Vec<Case> {
    let mut rng = Source::seeded(0xAC03);
    let mut out = Vec::new();
    for k in 0..80u64 {
        let max = k >= 50;
        let n = if max { 3 + rng.index(6) } else { 4 + rng.index(9) };
        let m = rng.index((n * (n - 1) / 2).min(2 * n) + 1);
        let mut spec = GenSpec::multi_layer(n, m, 1000 + k);
        if max {
            spec = spec.noisy_max(2 + rng.index(3));
        }
        let net = gen_multi_layer(&spec).unwrap();
        let choices = if max {
            [Encoding::Max1, Encoding::Max2]
        } else {
            [Encoding::Wmc1, Encoding::Wmc2]
        };
        let policies = policies(&net, &mut rng, &choices);
        out.push(Case { net, policies });
    }
    out
}

/// One joint assignment drawn parents first, so it has positive probability.
fn forward_sample(net: &Network, rng: &mut Source) -> Vec<usize> {
    let mut values = vec![0; net.len()];
    for id in net.topological_order().expect("acyclic") {
        let config: Vec<usize> = net.parents(id).iter().map(|p| values[p.index()]).collect();
        let u = rng.uniform();
        let mut acc = 0.0;
        let d = net.domain(id);
        values[id.index()] = (0..d)
            .find(|&v| {
                acc += net.cpt_entry(id, &config, v);
                u < acc && net.cpt_entry(id, &config, v) > 0.0
            })
            .unwrap_or_else(|| (0..d).rev().find(|&v| net.cpt_entry(id, &config, v) > 0.0).unwrap());
    }
    values
}

fn criterion_3(cases: &[Case]) -> Outcome {
    let mut rng = Source::seeded(0xAC33);
    let mut runs = 0;
    for (k, case) in cases.iter().enumerate() {
        let net = &case.net;
        let n = net.len();
        let k_obs = 1 + rng.index(3.min(n - 1));
        let observed = rng.subset(n, k_obs);
        let sample = forward_sample(net, &mut rng);
        let evidence: Evidence = observed.iter().map(|&i| (NodeId(i), sample[i])).collect();
        let free: Vec<usize> = (0..n).filter(|i| !observed.contains(i)).collect();
        let target = NodeId(free[rng.index(free.len())]);
        let value = rng.index(net.domain(target));
        let query = Evidence::new().with(target, value);
        let truth = brute_force_query(net, &query, &evidence, DEFAULT_STATE_CAP)
            .map_err(|e| format!("network {k}: oracle {e}"))?;
        for (name, policy) in &case.policies {
            for h in [Heuristic::Vsads, Heuristic::Static] {
                let config = SolverConfig::default().with_heuristic(h);
                let r = conditional_query(net, &Query::is(target, value), &evidence, policy, &config)
                    .map_err(|e| format!("network {k} {name} {h}: {e}"))?;
                ensure!(
                    relative_close(r.probability, truth, 1e-7),
                    "network {k} {name} {h}: {} vs oracle {truth}",
                    r.probability
                );
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} queries on {} networks agree with the oracle", cases.len()))
}

fn criterion_4(cases: &[Case]) -> Outcome {
    let mut extra = vec![medical_noisy_or(), medical_noisy_max()];
    extra.push(gen_two_layer(&GenSpec::two_layer(12, 12, 3, 7)).unwrap());
    extra.push(gen_two_layer(&GenSpec::two_layer(8, 8, 3, 8).noisy_max(3)).unwrap());
    let mut checked = 0;
    let mut rng = Source::seeded(0xAC04);
    let extra_cases: Vec<Case> = extra
        .into_iter()
        .map(|net| {
            let max = net
                .nodes()
                .iter()
                .any(|n| matches!(n.distribution, Some(noisywmc::model::Distribution::NoisyMax(_))));
            let choices = if max {
                [Encoding::Max1, Encoding::Max2]
            } else {
                [Encoding::Wmc1, Encoding::Wmc2]
            };
            let policies = policies(&net, &mut rng, &choices);
            Case { net, policies }
        })
        .collect();
    for case in cases.iter().chain(&extra_cases) {
        for (name, policy) in &case.policies {
            let p = probability_of_evidence(&case.net, &Evidence::new(), policy, &SolverConfig::default())
                .map_err(|e| e.to_string())?;
            ensure!((p - 1.0).abs() < 1e-7, "{name}: unconditioned count {p}");
            checked += 1;
        }
    }
    Ok(format!("{checked} encoded networks count to 1"))
}

fn random_3cnf(rng: &mut Source) -> WeightedCnf {
    let vars = 10 + rng.index(16);
    let clauses = (vars as f64 * rng.uniform_in(1.5, 5.0)) as usize;
    let mut f = WeightedCnf::new(vars);
    for v in 0..vars {
        f.set_weights(Var(v as u32), rng.uniform(), rng.uniform());
    }
    for _ in 0..clauses {
        let lits: Vec<Lit> = rng
            .subset(vars, 3)
            .into_iter()
            .map(|v| Lit::new(Var(v as u32), rng.uniform() < 0.5))
            .collect();
        f.add_clause(lits);
    }
    f
}

fn criterion_5() -> Outcome {
    let mut rng = Source::seeded(0xAC05);
    let mut learned = 0;
    let mut hits = 0;
    for k in 0..100 {
        let f = random_3cnf(&mut rng);
        let truth = brute_force_weight(&f, 25).map_err(|e| e.to_string())?;
        let base = SolverConfig::default();
        let (on, s) = count(&f, &base);
        let (off, _) = count(&f, &SolverConfig { cache_capacity: 0, ..base });
        let (learn, s2) = count(&f, &SolverConfig { learn: true, ..base });
        let (learn_off, _) = count(&f, &SolverConfig { learn: true, cache_capacity: 0, ..base });
        hits += s.cache_hits;
        learned += s2.learned;
        ensure!(relative_close(on, off, 1e-9), "formula {k}: cache on {on} vs off {off}");
        for (name, v) in [("cache on", on), ("cache off", off), ("learning", learn), ("learning without cache", learn_off)] {
            ensure!(relative_close(v, truth, 1e-9), "formula {k}: {name} {v} vs enumeration {truth}");
        }
        ensure!(relative_close(learn, on, 1e-9), "formula {k}: learning {learn} vs {on}");
    }
    Ok(format!("100 formulas; {hits} cache hits, {learned} learned clauses"))
}

fn criterion_6() -> Outcome {
    for d in 2..=5 {
        let mut net = Network::new();
        let x = net.add_node("X", 2).unwrap();
        net.set_prior(x, vec![0.5, 0.5]);
        let y = net.add_node("Y", d).unwrap();
        net.set_noisy_max(y, vec![x], vec![vec![vec![1.0 / d as f64; d]]]);
        let mut enc = Encoder::new(&net);
        let range = enc.encode_factorization_gadget(y);
        let hidden = enc.registry().hidden(y).ok_or("gadget has no hidden group")?.clone();
        for yv in 0..d {
            for yp in 0..d {
                let mut s = enc.registry().indicators(y).assignment(yv);
                s.extend(hidden.assignment(yp));
                let total = brute_force_weight(&local(enc.cnf(), range.clone(), &s), 25)
                    .map_err(|e| e.to_string())?;
                let m = match yv.checked_sub(yp) {
                    Some(0) => 1.0,
                    Some(1) => -1.0,
                    _ => 0.0,
                };
                ensure!(total == m, "d={d} y={yv} y'={yp}: {total} vs {m}");
            }
        }
    }
    Ok("M(y,y') reproduced for d = 2..5".into())
}

fn criterion_7() -> Outcome {
    let mut entries = 0;
    for (k, net) in max_nodes().iter().enumerate() {
        let with = node_entries(net, |e, y| e.encode_noisy_max_max2(y, true).unwrap());
        let without = node_entries(net, |e, y| e.encode_noisy_max_max2(y, false).unwrap());
        for ((a, _), (b, _)) in with.iter().zip(&without) {
            ensure!((a - b).abs() < 1e-12, "node {k}: {a} with vs {b} without");
            entries += 1;
        }
        let policy = Policy::uniform(net, Encoding::Max2).unwrap();
        let y = NodeId(net.len() - 1);
        let ev = Evidence::new().with(y, net.domain(y) - 1);
        let counts: Vec<f64> = [true, false]
            .iter()
            .map(|&max2_redundant| {
                let options = EncodeOptions { max2_redundant, ..EncodeOptions::default() };
                count(&encode_network(net, &ev, &policy, &options).unwrap().cnf, &SolverConfig::default()).0
            })
            .collect();
        ensure!((counts[0] - counts[1]).abs() < 1e-12, "network {k}: {} vs {}", counts[0], counts[1]);
    }
    Ok(format!("{entries} entries and 100 network counts unchanged"))
}

fn criterion_8() -> Outcome {
    let config = SolverConfig::default();
    let mut slowest = Duration::ZERO;
    for seed in 1..=10 {
        let net = gen_two_layer(&GenSpec::two_layer(100, 100, 6, seed)).map_err(|e| e.to_string())?;
        let ev = gen_evidence(&net, 10).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let wmc2 = probability_of_evidence(&net, &ev, &Policy::uniform(&net, Encoding::Wmc2).unwrap(), &config)
            .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        ensure!(elapsed < Duration::from_secs(60), "seed {seed}: wmc2 took {elapsed:?}");
        slowest = slowest.max(elapsed);
        let wmc1 = probability_of_evidence(&net, &ev, &Policy::uniform(&net, Encoding::Wmc1).unwrap(), &config)
            .map_err(|e| e.to_string())?;
        ensure!(wmc2 > 0.0, "seed {seed}: probability of evidence is {wmc2}");
        ensure!(relative_close(wmc1, wmc2, 1e-6), "seed {seed}: wmc1 {wmc1:e} vs wmc2 {wmc2:e}");
    }
    Ok(format!("10 networks, slowest wmc2 count {:.3} s; wmc1 agrees", slowest.as_secs_f64()))
}

fn artifacts(seed: u64) -> (String, String, String, u64) {
    let net = gen_two_layer(&GenSpec::two_layer(40, 40, 5, seed)).unwrap();
    let ev = gen_evidence(&net, 8).unwrap();
    let encoded = encode_network(
        &net,
        &ev,
        &Policy::uniform(&net, Encoding::Wmc2).unwrap(),
        &EncodeOptions::default(),
    )
    .unwrap();
    let wcnf = emit_wdimacs(&encoded.cnf);
    let mut counter = Counter::new(SolverConfig::default());
    let direct = counter.count(&encoded.cnf).0;
    let reparsed = count(&parse_wdimacs(&wcnf).unwrap(), &SolverConfig::default()).0;
    assert_eq!(direct.to_bits(), reparsed.to_bits());
    (write_network(&net), write_evidence(&ev, &net), wcnf, direct.to_bits())
}

fn criterion_9() -> Outcome {
    for seed in [3, 4] {
        let a = artifacts(seed);
        let b = artifacts(seed);
        ensure!(a.0 == b.0, "seed {seed}: network files differ");
        ensure!(a.1 == b.1, "seed {seed}: evidence files differ");
        ensure!(a.2 == b.2, "seed {seed}: wcnf files differ");
        ensure!(a.3 == b.3, "seed {seed}: counts differ");
    }
    let max = |s| write_network(&gen_multi_layer(&GenSpec::multi_layer(30, 60, s).noisy_max(4)).unwrap());
    ensure!(max(5) == max(5), "noisy-MAX network files differ");
    ensure!(max(5) != max(6), "different seeds gave the same network");
    Ok("network, evidence, wcnf and count bits identical across runs".into())
}

fn main() -> ExitCode {
    let cases = cases();
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("golden CPT tables", Duration::from_secs(1), Box::new(criterion_1)),
        ("node encodings reproduce CPT entries", Duration::from_secs(120), Box::new(criterion_2)),
        ("end-to-end oracle equivalence", Duration::from_secs(300), Box::new(|| criterion_3(&cases))),
        ("normalization", Duration::from_secs(300), Box::new(|| criterion_4(&cases))),
        ("solver internals", Duration::from_secs(120), Box::new(criterion_5)),
        ("negative-weight gadget", Duration::from_secs(60), Box::new(criterion_6)),
        ("redundancy invariance", Duration::from_secs(120), Box::new(criterion_7)),
        ("desk-scale performance", Duration::from_secs(300), Box::new(criterion_8)),
        ("determinism", Duration::from_secs(120), Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > *budget => Err(format!("took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} ({elapsed:.2?})", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
