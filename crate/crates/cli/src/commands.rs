use bmn_core::chain::ChainError;
use bmn_core::simulate::DEFAULT_MOVE_CAP;
use bmn_core::*;
use serde_json::{json, Map, Value};

use crate::config::{check_left_size, check_p, Config, Invalid, Pickup};
use crate::Command;

pub const DEFAULT_P: f64 = 0.5;
pub const DEFAULT_GAMES: u64 = 10_000;
pub const DEFAULT_DEALS: u64 = 10_000;

#[derive(Debug)]
pub enum Failure {
    Invalid(Vec<Invalid>),
    Refused { message: String, parameters: Value, results: Value },
}

/// Flags merged over the config, with defaults filled in.
struct Resolved {
    p: f64,
    seed: u64,
    left_size: usize,
    games: u64,
    deals: u64,
    move_cap: u64,
    pickup: Pickup,
    first_leader: Player,
    bucket_width: Option<u64>,
    state: Option<Split>,
}

fn positive(key: &str, v: u64) -> Result<u64, Invalid> {
    if v > 0 {
        Ok(v)
    } else {
        Err(Invalid { key: key.into(), message: format!("{key} must be positive") })
    }
}

fn resolve(command: &Command, cfg: &Config, rules: &RuleSpec) -> Result<Resolved, Vec<Invalid>> {
    let o = command.options();
    let n = rules.deck().len();
    let mut errors = Vec::new();
    let mut keep = |r: Result<u64, Invalid>, fallback: u64| {
        r.unwrap_or_else(|e| {
            errors.push(e);
            fallback
        })
    };
    let games = keep(positive("games", o.games.or(cfg.games).unwrap_or(DEFAULT_GAMES)), 1);
    let deals = keep(positive("deals", o.deals.or(cfg.deals).unwrap_or(DEFAULT_DEALS)), 1);
    let move_cap = keep(positive("move_cap", o.move_cap.or(cfg.move_cap).unwrap_or(DEFAULT_MOVE_CAP)), 1);
    let bucket_width = o.bucket_width.or(cfg.bucket_width).map(|w| keep(positive("bucket_width", w), 1));
    let p = o.p.or(cfg.p).unwrap_or(DEFAULT_P);
    if let Err(e) = check_p(p) {
        errors.push(e);
    }
    let left_size = o.left_size.or(cfg.left_size).unwrap_or(n / 2);
    if let Err(e) = check_left_size(left_size, n) {
        errors.push(e);
    }
    let state = match &o.state {
        Some(text) => match Split::decode(rules.deck(), text) {
            Ok(s) => Some(s),
            Err(e) => {
                errors.push(Invalid { key: "state".into(), message: e.to_string() });
                None
            }
        },
        None => None,
    };
    let first_leader = o.first_leader.and_then(Player::from_number).or(cfg.first_leader).unwrap_or(Player::One);
    if errors.is_empty() {
        Ok(Resolved {
            p,
            seed: o.seed.or(cfg.seed).unwrap_or(0),
            left_size,
            games,
            deals,
            move_cap,
            pickup: o.pickup.or(cfg.pickup).unwrap_or(Pickup::Played),
            first_leader,
            bucket_width,
            state,
        })
    } else {
        Err(errors)
    }
}

fn encode_all(rules: &RuleSpec, splits: &[Split]) -> Vec<String> {
    splits.iter().map(|s| s.encode(rules.deck())).collect()
}

fn refused(parameters: &Value, message: String, extra: Value) -> Failure {
    let mut results = json!({ "status": "refused", "reason": message });
    if let (Value::Object(r), Value::Object(e)) = (&mut results, extra) {
        r.extend(e);
    }
    Failure::Refused { message, parameters: parameters.clone(), results }
}

/// Runs one subcommand; returns the parameter echo and the results object.
pub fn dispatch(command: &Command, cfg: &Config) -> Result<(Value, Value), Failure> {
    let rules = cfg.rules().map_err(Failure::Invalid)?;
    let r = resolve(command, cfg, &rules).map_err(Failure::Invalid)?;
    let deck = rules.deck();
    let state_text = r.state.as_ref().map(|s| s.encode(deck));
    let mut params = Map::new();
    params.insert("cards".into(), json!(deck.len()));
    match command {
        Command::Enumerate(_) => {
            let params = Value::Object(params);
            let splits = enumerate_splits(deck).map_err(|e| refused(&params, e.to_string(), json!({})))?;
            Ok((params, json!({ "states": splits.len() })))
        }
        Command::Check(_) => {
            let params = Value::Object(params);
            let fail = |e: String| refused(&params, e, json!({}));
            let graph = build_g0(&rules).map_err(|e| fail(e.to_string()))?;
            let lemma = verify_lemma(&graph);
            let nondegeneracy = graph.nondegeneracy_violations();
            let non_absorbing = check_absorbing(&rules).map_err(|e| fail(e.to_string()))?;
            let violations: Vec<Value> = lemma
                .violations
                .iter()
                .map(|v| json!({ "state": v.state.encode(deck), "condition": v.condition }))
                .collect();
            let results = json!({
                "states": graph.split_count(),
                "vertices": graph.vertex_count(),
                "edges": graph.edge_count(),
                "nondegeneracy_violations": encode_all(&rules, &nondegeneracy),
                "lemma": {
                    "out_degree": lemma.out_degree_ok,
                    "in_degree": lemma.in_degree_ok,
                    "escape_ancestor": lemma.escape_ancestor_ok,
                    "all": lemma.all_ok(),
                    "violations": violations,
                    "in_degree_histogram": lemma.in_degree_histogram,
                },
                "non_absorbing_states": encode_all(&rules, &non_absorbing),
                "absorbing": non_absorbing.is_empty(),
            });
            Ok((params, results))
        }
        Command::Exact(_) => {
            params.insert("p".into(), json!(r.p));
            params.insert("left_size".into(), json!(r.left_size));
            params.insert("state".into(), json!(state_text));
            let params = Value::Object(params);
            let table = expected_moves(&rules, r.p).map_err(|e| match e {
                ChainError::NotAbsorbing { states } => refused(
                    &params,
                    format!("chain is not absorbing: {} state(s) cannot reach the end of the game", states.len()),
                    json!({ "non_absorbing_states": encode_all(&rules, &states) }),
                ),
                e => refused(&params, e.to_string(), json!({})),
            })?;
            let fail = |e: ChainError| refused(&params, e.to_string(), json!({}));
            let by_left_size = (0..=deck.len())
                .map(|k| Ok(json!({ "left_size": k, "expectation": table.deal_expectation(k)? })))
                .collect::<Result<Vec<_>, ChainError>>()
                .map_err(fail)?;
            let mut results = json!({
                "deal_expectation": table.deal_expectation(r.left_size).map_err(fail)?,
                "by_left_size": by_left_size,
                "solver": table.diagnostics,
            });
            if let Some(s) = &r.state {
                results["state_expectation"] = json!(table.value(s));
            }
            Ok((params, results))
        }
        Command::Simulate(_) => {
            params.insert("p".into(), json!(r.p));
            params.insert("left_size".into(), json!(r.left_size));
            params.insert("games".into(), json!(r.games));
            params.insert("seed".into(), json!(r.seed));
            params.insert("move_cap".into(), json!(r.move_cap));
            params.insert("state".into(), json!(state_text));
            params.insert("bucket_width".into(), json!(r.bucket_width));
            let params = Value::Object(params);
            let fail = |e: simulate::SimulateError| refused(&params, e.to_string(), json!({}));
            let stats = match &r.state {
                Some(s) => monte_carlo_from(&rules, s, r.p, r.games, r.seed, r.move_cap),
                None => monte_carlo(&rules, r.left_size, r.p, r.games, r.seed, r.move_cap),
            }
            .map_err(fail)?;
            let mut results = json!({ "stats": stats });
            if let (Some(w), None) = (r.bucket_width, &r.state) {
                let h = histogram(&rules, r.left_size, r.p, r.games, r.seed, w, r.move_cap).map_err(fail)?;
                results["histogram"] = json!(h);
            }
            Ok((params, results))
        }
        Command::Cycles(_) => {
            let config = DeterministicConfig {
                pickup_order: r.pickup.into(),
                first_leader: r.first_leader,
                ..DeterministicConfig::default()
            };
            params.insert("pickup".into(), json!(r.pickup));
            params.insert("first_leader".into(), json!(r.first_leader));
            let results = match &r.state {
                Some(s) => {
                    params.insert("state".into(), json!(state_text));
                    let params = Value::Object(params);
                    let out = play_deterministic(&rules, s, config)
                        .map_err(|e| refused(&params, e.to_string(), json!({})))?;
                    return Ok((params, json!({ "outcome": out })));
                }
                None => {
                    params.insert("deals".into(), json!(r.deals));
                    params.insert("seed".into(), json!(r.seed));
                    search_cycles(&rules, r.deals, r.seed, config)
                }
            };
            let params = Value::Object(params);
            let report = results.map_err(|e| refused(&params, e.to_string(), json!({})))?;
            Ok((params, json!({ "report": report })))
        }
    }
}
