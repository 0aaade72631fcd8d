//! Browser bindings: three interactive operations, each returning a JSON
//! string for the static page to render. Exact rationals are carried as
//! `"p/q"` strings next to `f64` fields used only for drawing.

use rwcake::engine::{check_proportional, Engine, EngineMode};
use rwcake::harness::exact_expected_depth;
use rwcake::protocols::{is_primitive, run_protocol, ProtocolKind};
use rwcake::rational::Rational;
use rwcake::ws::{check_phi_equals_pi_inverse, sample_j_seeded, JInstance};
use serde_json::{json, Value};
use std::str::FromStr;
use wasm_bindgen::prelude::wasm_bindgen;

const MAX_DEMO_PLAYERS: usize = 12;
const MAX_ANALYZE_PLAYERS: usize = 4;

fn instance_view(inst: &JInstance) -> Value {
    let n = inst.n();
    let players: Vec<Value> = (1..=n)
        .map(|p| {
            let measure = inst.measure(p);
            let segments: Vec<Value> = measure
                .segments()
                .iter()
                .map(|s| {
                    json!({
                        "lo": s.interval().lo(),
                        "hi": s.interval().hi(),
                        "mass": s.mass(),
                        "lo_f": s.interval().lo().to_f64(),
                        "hi_f": s.interval().hi().to_f64(),
                        "mass_f": s.mass().to_f64(),
                        "density_f": s.density().to_f64(),
                    })
                })
                .collect();
            let points: Vec<Value> = (1..=n)
                .map(|i| {
                    let x = inst.point(p, i);
                    json!({
                        "chunk": i,
                        "slot": inst.slot_of(p, i),
                        "x": x,
                        "x_f": x.to_f64(),
                    })
                })
                .collect();
            json!({ "player": p, "segments": segments, "points": points })
        })
        .collect();
    json!({
        "n": n,
        "epsilon": inst.epsilon(),
        "epsilon_f": inst.epsilon().to_f64(),
        "pi": inst.pi(),
        "chunks": inst.base().chunks().chunks(),
        "players": players,
    })
}

fn check_n(n: usize, max: usize) -> Result<(), String> {
    if n == 0 || n > max {
        Err(format!("n must be between 1 and {max} for the demo"))
    } else {
        Ok(())
    }
}

/// Sample an instance from the hard uniform family and describe it,
/// including every player's measure for density rendering.
#[wasm_bindgen]
pub fn instance_json(n: usize, seed: u64) -> Result<String, String> {
    check_n(n, MAX_DEMO_PLAYERS)?;
    let inst = sample_j_seeded(n, seed);
    Ok(instance_view(&inst).to_string())
}

/// Run a protocol on a sampled instance under the single-subinterval referee
/// and report the allocation, exact shares, and query counts.
#[wasm_bindgen]
pub fn run_json(protocol: &str, n: usize, seed: u64) -> Result<String, String> {
    check_n(n, MAX_DEMO_PLAYERS)?;
    let kind = ProtocolKind::from_str(protocol)?;
    if !kind.supports_n(n) {
        return Err(format!("{} does not support n = {n}", kind.name()));
    }
    let inst = sample_j_seeded(n, seed);
    let measures = inst.measures();
    let mut engine = Engine::new(measures.clone(), EngineMode::WoegingerSgall);
    let alloc =
        run_protocol(kind, &mut engine, Some(inst.epsilon())).map_err(|e| e.to_string())?;
    let report = check_proportional(&alloc, &measures);
    let transcript = engine.transcript();
    let pieces: Vec<Value> = alloc
        .ordered_pieces()
        .iter()
        .map(|(p, iv)| {
            let share = &report.shares[p - 1];
            json!({
                "player": p,
                "lo": iv.lo(),
                "hi": iv.hi(),
                "lo_f": iv.lo().to_f64(),
                "hi_f": iv.hi().to_f64(),
                "value": share.value,
                "value_f": share.value.to_f64(),
                "proportional": share.proportional,
            })
        })
        .collect();
    let out = json!({
        "protocol": kind.name(),
        "n": n,
        "seed": seed,
        "threshold": Rational::new(1, n as i64),
        "threshold_f": 1.0 / n as f64,
        "allocation": pieces,
        "counts": {
            "cuts": transcript.cuts,
            "evals": transcript.evals,
            "total": transcript.total_queries(),
        },
        "proportional": report.all_proportional,
        "primitive_transcript": is_primitive(transcript, n, inst.epsilon()),
        "phi_equals_pi_inverse": check_phi_equals_pi_inverse(&alloc, &inst).unwrap_or(false),
        "instance": instance_view(&inst),
    });
    Ok(out.to_string())
}

/// Exact decision-tree analysis of a cuts-only primitive strategy: expected
/// cuts under the uniform hard distribution against the certified bound.
#[wasm_bindgen]
pub fn analyze_json(strategy: &str, n: usize) -> Result<String, String> {
    check_n(n, MAX_ANALYZE_PLAYERS)?;
    let kind = ProtocolKind::from_str(strategy)?;
    if !kind.supports_n(n) {
        return Err(format!("{} does not support n = {n}", kind.name()));
    }
    let strat = kind
        .primitive_strategy()
        .ok_or_else(|| format!("{} is not a cuts-only primitive strategy", kind.name()))?;
    let report = exact_expected_depth(&strat.as_ref(), n, &rwcake::ws::default_epsilon(n))
        .map_err(|e| e.to_string())?;
    let out = json!({
        "strategy": report.strategy,
        "n": n,
        "expected_cuts": report.expected_cuts,
        "expected_cuts_f": report.expected_cuts.to_f64(),
        "expected_nodes": report.expected_nodes,
        "expected_nodes_f": report.expected_nodes.to_f64(),
        "bound_decimal": report.bound_decimal,
        "meets_bound": report.meets_bound,
        "nodes_checked": report.nodes_checked,
        "leaves": report.leaves,
        "max_depth": report.max_depth,
        "uniform_posterior_verified": report.uniform_posterior_verified,
    });
    Ok(out.to_string())
}
