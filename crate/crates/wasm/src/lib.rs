//! Browser bindings around the worked examples: construct the limit
//! profile, solve at one p, sweep a p list. Everything returns JSON
//! strings so the logic is testable off the wasm target; the thin
//! `#[wasm_bindgen]` layer at the bottom only exists on wasm32.

use plap_core::limit::{LimitFunction, PieceKind};
use plap_core::oracles::{construct_limit, example_data, example_problem, ExampleId, Problem};
use plap_core::psolver::{dirichlet_shoot, obstacle_solve, GridFunction, ProblemSpec};
use plap_core::radial::reduce;
use serde_json::json;

fn example(id: u8, dim: u32) -> Result<ExampleId, String> {
    let ex = if dim == 0 {
        ExampleId::new(id)
    } else {
        ExampleId::with_dimension(id, dim)
    };
    ex.map_err(|e| e.to_string())
}

fn spec_for(ex: ExampleId, p: f64) -> Result<ProblemSpec, String> {
    match example_problem(ex, p).map_err(|e| e.to_string())? {
        Problem::Flat(s) => Ok(s),
        Problem::Radial(r) => reduce(&r).map_err(|e| e.to_string()),
    }
}

fn solve_spec(spec: &ProblemSpec, nodes: usize) -> Result<GridFunction, String> {
    if spec.obstacle.is_some() {
        obstacle_solve(spec, nodes, 1e-7).map_err(|e| e.to_string())
    } else {
        dirichlet_shoot(spec, nodes).map(|(u, _)| u).map_err(|e| e.to_string())
    }
}

fn sample_limit(lim: &LimitFunction, samples: usize) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = lim.domain();
    let n = samples.max(2);
    let xs: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect();
    let us = xs.iter().map(|&x| lim.eval(x)).collect();
    (xs, us)
}

/// Limit profile of a worked example: pieces, samples, obstacle samples.
pub fn limit_json(id: u8, dim: u32, samples: usize) -> Result<String, String> {
    let ex = example(id, dim)?;
    let lim = construct_limit(ex).map_err(|e| e.to_string())?;
    let (xs, us) = sample_limit(&lim, samples);
    let phi = example_data(ex).obstacle;
    let phis: Vec<f64> = xs.iter().map(|&x| phi.eval(x)).collect();
    let pieces: Vec<serde_json::Value> = lim
        .pieces()
        .iter()
        .map(|piece| match piece.kind {
            PieceKind::Obstacle => json!({"lo": piece.lo, "hi": piece.hi, "kind": "obstacle"}),
            PieceKind::Slope(s) => {
                json!({"lo": piece.lo, "hi": piece.hi, "kind": "slope", "slope": s})
            }
        })
        .collect();
    let (a, b) = lim.domain();
    Ok(json!({
        "domain": [a, b],
        "pieces": pieces,
        "xs": xs,
        "us": us,
        "obstacle": phis,
    })
    .to_string())
}

/// Finite-p solution of a worked example, with its distance to the limit.
pub fn solve_json(id: u8, dim: u32, p: f64, nodes: usize) -> Result<String, String> {
    let ex = example(id, dim)?;
    if !(1.0 < p) {
        return Err(format!("p = {p} is not in (1, infinity)"));
    }
    let nodes = nodes.clamp(51, 4001);
    let spec = spec_for(ex, p)?;
    let u = solve_spec(&spec, nodes)?;
    let lim = construct_limit(ex).map_err(|e| e.to_string())?;
    let sup_dist = (0..u.n_nodes())
        .map(|i| (u.values[i] - lim.eval(u.node(i))).abs())
        .fold(0.0f64, f64::max);
    let xs: Vec<f64> = (0..u.n_nodes()).map(|i| u.node(i)).collect();
    Ok(json!({
        "p": p,
        "xs": xs,
        "us": u.values,
        "sup_dist": sup_dist,
    })
    .to_string())
}

/// Sup-distance to the limit along a comma-separated p list.
pub fn sweep_json(id: u8, dim: u32, p_csv: &str, nodes: usize) -> Result<String, String> {
    let ex = example(id, dim)?;
    let mut ps = Vec::new();
    for tok in p_csv.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let p: f64 = tok.parse().map_err(|_| format!("bad p value {tok:?}"))?;
        ps.push(p);
    }
    if ps.is_empty() {
        return Err("the p list is empty".into());
    }
    if ps.windows(2).any(|w| w[1] <= w[0]) {
        return Err("the p list must be strictly increasing".into());
    }
    let nodes = nodes.clamp(51, 4001);
    let lim = construct_limit(ex).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for &p in &ps {
        let spec = spec_for(ex, p)?;
        let u = solve_spec(&spec, nodes)?;
        let sup_dist = (0..u.n_nodes())
            .map(|i| (u.values[i] - lim.eval(u.node(i))).abs())
            .fold(0.0f64, f64::max);
        let h = u.h();
        let max_slope = (0..u.n_nodes() - 1)
            .map(|i| ((u.values[i + 1] - u.values[i]) / h).abs())
            .fold(0.0f64, f64::max);
        rows.push(json!({"p": p, "sup_dist": sup_dist, "max_slope": max_slope}));
    }
    Ok(json!({ "rows": rows }).to_string())
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen]
    pub fn limit(id: u8, dim: u32, samples: usize) -> Result<String, JsValue> {
        super::limit_json(id, dim, samples).map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen]
    pub fn solve(id: u8, dim: u32, p: f64, nodes: usize) -> Result<String, JsValue> {
        super::solve_json(id, dim, p, nodes).map_err(|e| JsValue::from_str(&e))
    }

    #[wasm_bindgen]
    pub fn sweep(id: u8, dim: u32, p_csv: &str, nodes: usize) -> Result<String, JsValue> {
        super::sweep_json(id, dim, p_csv, nodes).map_err(|e| JsValue::from_str(&e))
    }
}
