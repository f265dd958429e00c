use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hypervis::exact::{exact_chi_mu, max_mutual_visibility, trivial_lower_bound, SearchMode};
use hypervis::layered::PropertyCheck;
use hypervis::lll::{block_count, ResampleStats};
use hypervis::visibility::{mutual_visibility_witness, visible_path};
use hypervis::{
    assemble_cube_coloring, check_property_are, enumerate_layer, find_three_layer_obstruction,
    lll_parameters, moser_tardos_layer_coloring, verify_cube_coloring, Budget, LayerColoring,
    ObstacleSet, VertexSet,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::files;
use crate::output::{hex, hex_list, obstruction_json, witness_json, Out};
use crate::{Cli, CliError, Command, ExactKind};

/// Largest `n` `color` accepts without `--unsafe-budgets`.
const COLOR_MAX_N: usize = 16;

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let out = Out::new(cli.format);
    let budget = if cli.unsafe_budgets {
        Budget::Unchecked
    } else {
        Budget::Standard
    };
    match &cli.command {
        Command::Color {
            n,
            g,
            q,
            seed,
            max_rounds,
            out: path,
            layer_dir,
        } => {
            let seed = match (seed, out.machine()) {
                (Some(s), _) => *s,
                (None, false) => 0,
                (None, true) => {
                    return Err(CliError::Usage(
                        "--seed is required with --format machine".into(),
                    ))
                }
            };
            color(
                &out,
                budget,
                ColorArgs {
                    n: *n,
                    g: *g,
                    q: *q,
                    seed,
                    max_rounds: *max_rounds,
                    path: path.as_deref(),
                    layer_dir: layer_dir.as_deref(),
                },
            )
        }
        Command::Verify { file, g } => verify(&out, budget, file, *g),
        Command::Exact {
            kind,
            n,
            out: dir,
            node_limit,
        } => exact(&out, budget, *kind, *n, dir, *node_limit),
        Command::LllReport { n, g } => lll_report(&out, *n, *g),
        Command::Obstruct { file, n, max_dim } => obstruct(&out, budget, file, *n, *max_dim),
        Command::Layers { n, k } => layers(&out, *n, *k),
        Command::CheckSet { file, n, from, to } => {
            check_set(&out, file, *n, from.as_deref().zip(to.as_deref()))
        }
    }
}

struct ColorArgs<'a> {
    n: usize,
    g: usize,
    q: usize,
    seed: u64,
    max_rounds: Option<u64>,
    path: Option<&'a Path>,
    layer_dir: Option<&'a Path>,
}

fn color(out: &Out, budget: Budget, args: ColorArgs<'_>) -> Result<u8, CliError> {
    let ColorArgs { n, g, q, seed, .. } = args;
    if q != 2 {
        return Err(CliError::Usage(format!(
            "the resampling construction colors each layer with q = 2, got {q}"
        )));
    }
    if g < 3 {
        return Err(hypervis::Error::GapTooSmall(g).into());
    }
    if n == 0 {
        return Err(CliError::Usage("n must be positive".into()));
    }
    if budget == Budget::Standard && n > COLOR_MAX_N {
        return Err(CliError::Budget(format!(
            "n = {n} exceeds the coloring limit {COLOR_MAX_N}; pass --unsafe-budgets to override"
        )));
    }

    let layers: Vec<(LayerColoring, ResampleStats)> = (0..=n)
        .into_par_iter()
        .map(|k| moser_tardos_layer_coloring(n, k, g, seed, args.max_rounds))
        .collect::<Result<_, _>>()?;

    out.line(format!("Q_{n}: g = {g}, q = {q}, seed = {seed}"));
    out.line(format!(
        "{:>3}  {:>10}  {:>11}  {:>9}  {:>12}  {:>5}",
        "k", "blocks", "resamplings", "criterion", "lll", "check"
    ));
    for (k, (_, stats)) in layers.iter().enumerate() {
        let report = lll_parameters(n, k, g).ok();
        let lll = match &report {
            None => "boundary".to_string(),
            Some(r) if r.satisfied => "satisfied".to_string(),
            Some(_) => "empirical".to_string(),
        };
        out.line(format!(
            "{k:>3}  {:>10}  {:>11}  {:>9}  {:>12}  {:>5}",
            stats.blocks,
            stats.resamplings,
            report.map_or("-".to_string(), |r| format!("{:.6}", r.criterion)),
            lll,
            "pass"
        ));
        out.record(
            "layer",
            json!({
                "n": n,
                "k": k,
                "g": g,
                "blocks": stats.blocks,
                "resamplings": stats.resamplings,
                "lll": report.map(|r| lll_json(&r)),
                "check": "pass",
            }),
        );
    }

    if let Some(dir) = args.layer_dir {
        for (k, (layer, _)) in layers.iter().enumerate() {
            let path = dir.join(format!("layer-n{n}-k{k}.json"));
            files::write(&path, &files::layer_coloring_to_string(layer))?;
        }
    }

    let by_layer: BTreeMap<usize, LayerColoring> =
        layers.into_iter().map(|(l, _)| l).enumerate().collect();
    let coloring = assemble_cube_coloring(&by_layer, g)?;
    let used = coloring.used_classes().len();
    out.line(format!("classes used: {used} (bound g*q = {})", g * q));
    out.record(
        "coloring",
        json!({
            "n": n,
            "g": g,
            "q": q,
            "seed": seed,
            "classes_used": used,
            "bound": g * q,
            "path": args.path.map(|p| p.display().to_string()),
        }),
    );
    if let Some(path) = args.path {
        files::write(path, &files::coloring_to_string(&coloring))?;
        out.line(format!("wrote {}", path.display()));
    }
    Ok(0)
}

fn lll_json(r: &hypervis::LllReport) -> Value {
    json!({
        "p_log2": r.p_log2,
        "p": r.p,
        "d": r.d.to_string(),
        "criterion": r.criterion,
        "satisfied": r.satisfied,
    })
}

fn verify(out: &Out, budget: Budget, file: &Path, g: usize) -> Result<u8, CliError> {
    let text = files::read(file)?;
    if files::is_layer_file(&text) {
        return verify_layer(out, &files::parse_layer_coloring(&text)?, g);
    }
    let coloring = files::parse_coloring(&text)?;
    let verdict = verify_cube_coloring(&coloring, budget)?;
    out.line(format!(
        "Q_{}: {} classes",
        coloring.n,
        verdict.classes.len()
    ));
    for class in &verdict.classes {
        match &class.witness {
            None => out.line(format!(
                "class {:>3}  size {:>5}  pass",
                class.class, class.size
            )),
            Some(w) => out.line(format!(
                "class {:>3}  size {:>5}  FAIL  {} and {} blocked by {} obstacles",
                class.class, class.size, w.u, w.v, w.obstacles
            )),
        }
        out.record(
            "class",
            json!({
                "class": class.class,
                "size": class.size,
                "passed": class.witness.is_none(),
                "witness": class.witness.as_ref().map(witness_json),
            }),
        );
    }
    let passed = verdict.passed();
    out.line(if passed {
        "verified"
    } else {
        "not a proper coloring"
    });
    out.record(
        "verdict",
        json!({ "n": coloring.n, "classes": verdict.classes.len(), "passed": passed }),
    );
    Ok(if passed { 0 } else { 1 })
}

fn verify_layer(out: &Out, layer: &LayerColoring, g: usize) -> Result<u8, CliError> {
    let mut passed = true;
    for color in 0..layer.q() {
        let class = layer.class(color);
        let check = check_property_are(&class, g)?;
        match &check {
            PropertyCheck::Holds => out.line(format!(
                "layer {} color {color}  size {:>5}  pass",
                layer.k(),
                class.len()
            )),
            PropertyCheck::Violated { a, b } => out.line(format!(
                "layer {} color {color}  size {:>5}  FAIL  no escape between {a} and {b}",
                layer.k(),
                class.len()
            )),
        }
        let violation = match &check {
            PropertyCheck::Holds => Value::Null,
            PropertyCheck::Violated { a, b } => json!({ "a": a.to_hex(), "b": b.to_hex() }),
        };
        passed &= check.holds();
        out.record(
            "layer_class",
            json!({
                "n": layer.n(),
                "k": layer.k(),
                "g": g,
                "color": color,
                "size": class.len(),
                "passed": check.holds(),
                "violation": violation,
            }),
        );
    }
    out.record(
        "verdict",
        json!({ "n": layer.n(), "k": layer.k(), "passed": passed }),
    );
    Ok(if passed { 0 } else { 1 })
}

fn exact(
    out: &Out,
    budget: Budget,
    kind: ExactKind,
    n: usize,
    dir: &Path,
    node_limit: Option<u64>,
) -> Result<u8, CliError> {
    let name = match kind {
        ExactKind::Mu => "mu",
        ExactKind::Chi => "chi",
    };
    let suffix = node_limit.map_or(String::new(), |l| format!("-limit{l}"));
    let cache: PathBuf = dir.join(format!("exact-{name}-n{n}{suffix}.json"));
    let record: Value = if cache.exists() {
        let text = files::read(&cache)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("corrupt cache {}: {e}", cache.display())))?
    } else {
        let record = match kind {
            ExactKind::Mu => {
                let mode = match node_limit {
                    Some(node_limit) => SearchMode::Bounded { node_limit },
                    None => SearchMode::Exact,
                };
                let r = max_mutual_visibility(n, mode, budget)?;
                json!({
                    "operation": "exact-mu",
                    "n": n,
                    "node_limit": node_limit,
                    "value": r.mu,
                    "certified": r.certified,
                    "witness": hex_list(r.witness.iter().copied()),
                    "nodes": r.nodes,
                    "trace_hash": format!("{:016x}", r.trace_hash),
                    "workers": 1,
                    "witness_deterministic": true,
                    "tool_version": env!("CARGO_PKG_VERSION"),
                })
            }
            ExactKind::Chi => {
                let r = exact_chi_mu(n, budget)?;
                json!({
                    "operation": "exact-chi",
                    "n": n,
                    "value": r.chi,
                    "certified": true,
                    "lower_bound": r.lower_bound,
                    "partition": r.partition.classes,
                    "nodes": r.nodes,
                    "trace_hash": format!("{:016x}", r.trace_hash),
                    "workers": 1,
                    "witness_deterministic": true,
                    "tool_version": env!("CARGO_PKG_VERSION"),
                })
            }
        };
        files::write(&cache, &format!("{record}\n"))?;
        record
    };

    let value = record["value"].as_u64().unwrap_or_default();
    match kind {
        ExactKind::Mu => {
            let certified = record["certified"].as_bool().unwrap_or(false);
            out.line(format!(
                "mu(Q_{n}) {} {value}",
                if certified { "=" } else { ">=" }
            ));
            if certified {
                let lb = trivial_lower_bound(n, value as usize)?;
                out.line(format!("chi_mu(Q_{n}) >= 2^{n} / mu = {lb} (rounded up)"));
            }
        }
        ExactKind::Chi => out.line(format!("chi_mu(Q_{n}) = {value}")),
    }
    out.line(format!("cached at {}", cache.display()));
    let mut fields = record;
    fields["cache"] = json!(cache.display().to_string());
    out.record("exact", fields);
    Ok(0)
}

fn lll_report(out: &Out, n: usize, g: usize) -> Result<u8, CliError> {
    if g < 3 {
        return Err(hypervis::Error::GapTooSmall(g).into());
    }
    if n > 64 {
        return Err(CliError::Usage(format!("n = {n} exceeds 64")));
    }
    out.line(format!(
        "{:>3} {:>3} {:>3}  {:>10}  {:>14}  {:>12}  {:>9}",
        "n", "k", "g", "p", "d", "criterion", "satisfied"
    ));
    if n < 2 * g {
        out.line("(no middle layers)");
    }
    for k in g..=n.saturating_sub(g) {
        let r = lll_parameters(n, k, g)?;
        out.line(format!(
            "{:>3} {:>3} {:>3}  {:>10}  {:>14}  {:>12.6}  {:>9}",
            n,
            k,
            g,
            format!("2^{}", r.p_log2),
            r.d,
            r.criterion,
            if r.satisfied { "yes" } else { "NO" }
        ));
        let mut fields = lll_json(&r);
        fields["n"] = json!(n);
        fields["k"] = json!(k);
        fields["g"] = json!(g);
        fields["blocks"] = json!(block_count(n, k, g).to_string());
        out.record("lll", fields);
    }
    Ok(0)
}

fn obstruct(
    out: &Out,
    budget: Budget,
    file: &Path,
    n: usize,
    max_dim: usize,
) -> Result<u8, CliError> {
    let set = ObstacleSet::new(n, files::read_set(n, file)?)?;
    match find_three_layer_obstruction(&set, max_dim, budget)? {
        None => {
            out.line(format!(
                "no interval subcube of dimension 2..={max_dim} has three layers in the set"
            ));
            out.record("obstruction", json!({ "n": n, "found": false }));
            Ok(0)
        }
        Some(w) => {
            let witness = mutual_visibility_witness(&set)?;
            let blocked = witness
                .as_ref()
                .expect("three full subcube layers block a pair");
            out.line(format!(
                "subcube {} contains layers {:?} of the set",
                w.subcube, w.layers
            ));
            out.line(format!(
                "not a mutual-visibility set: {} and {} are blocked",
                blocked.u, blocked.v
            ));
            let (a, b) = w.blocked_pair();
            out.record(
                "obstruction",
                json!({
                    "n": n,
                    "found": true,
                    "witness": obstruction_json(&w),
                    "blocked_pair": { "u": a.to_hex(), "v": b.to_hex() },
                    "first_blocked": witness_json(blocked),
                }),
            );
            Ok(1)
        }
    }
}

fn layers(out: &Out, n: usize, k: usize) -> Result<u8, CliError> {
    let layer = enumerate_layer(n, k)?;
    out.line(format!("layer {k} of Q_{n}: {} sets", layer.len()));
    for v in layer.iter() {
        out.line(v.to_string());
    }
    out.record(
        "layer",
        json!({ "n": n, "k": k, "members": hex_list(layer.iter()) }),
    );
    Ok(0)
}

fn check_set(out: &Out, file: &Path, n: usize, pair: Option<(&str, &str)>) -> Result<u8, CliError> {
    let members = files::read_set(n, file)?;
    let set = ObstacleSet::new(n, members)?;
    if let Some((from, to)) = pair {
        let (u, v) = (VertexSet::parse(n, from)?, VertexSet::parse(n, to)?);
        let path = visible_path(u, v, &set)?;
        let obstacles =
            set.len() - usize::from(set.contains(u)) - usize::from(set.contains(v) && u != v);
        match &path {
            Some(p) => out.line(format!(
                "{u} sees {v}: {}",
                p.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" -> ")
            )),
            None => out.line(format!("{u} does not see {v}")),
        }
        out.record(
            "pair",
            json!({
                "u": hex(u),
                "v": hex(v),
                "obstacles": obstacles,
                "visible": path.is_some(),
                "path": path.clone().map(hex_list),
            }),
        );
        return Ok(if path.is_some() { 0 } else { 1 });
    }
    let witness = mutual_visibility_witness(&set)?;
    match &witness {
        None => out.line(format!("{} vertices: mutual-visibility set", set.len())),
        Some(w) => out.line(format!(
            "{} vertices: not a mutual-visibility set ({} and {} are blocked)",
            set.len(),
            w.u,
            w.v
        )),
    }
    out.record(
        "set",
        json!({
            "n": n,
            "size": set.len(),
            "mutual_visibility": witness.is_none(),
            "witness": witness.as_ref().map(witness_json),
        }),
    );
    Ok(if witness.is_none() { 0 } else { 1 })
}
