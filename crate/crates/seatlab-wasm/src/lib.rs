//! Browser demo bindings: three interactive views over the seatlab core,
//! each returning a JSON string the static page renders onto canvases.
//!
//! Build with `wasm-pack build crates/seatlab-wasm --target web` and serve
//! the crate directory (see `index.html`).

use wasm_bindgen::prelude::*;

use seatlab::exact::{closed_form, event_prob, last_passenger_correct};
use seatlab::model::Instance;
use seatlab::pd::oracle_largest_components;
use seatlab::rng::mix64;
use seatlab::sim::{run_batch, run_batch_map};
use serde_json::{json, Value};

fn err(message: &str) -> String {
    json!({ "error": message }).to_string()
}

fn check_instance(n: u32, k: u32) -> Result<(), String> {
    if k < 1 {
        return Err("need at least one lost boarding pass (k >= 1)".into());
    }
    if n < k + 1 {
        return Err("need more seats than lost passes (n >= k+1)".into());
    }
    if n > 2000 {
        return Err("demo is capped at n = 2000".into());
    }
    Ok(())
}

/// Exact occupancy probabilities Pr(D_m) = k/(n-m+k+1) for every passenger
/// m > k, plus the last-passenger-correct probability 1/(k+1). For small n
/// the closed form is re-derived by the exact bitmask DP as a live
/// cross-check.
#[wasm_bindgen]
pub fn exact_occupancy(n: u32, k: u32) -> String {
    if let Err(e) = check_instance(n, k) {
        return err(&e);
    }
    let events: Vec<Value> = (k + 1..=n)
        .map(|m| {
            let p = closed_form(n, k, m).expect("k < m <= n");
            json!({ "passenger": m, "prob": p.to_string(), "value": p.to_f64() })
        })
        .collect();
    let last = last_passenger_correct(n, k).expect("validated");

    let mut dp_verified = Value::Null;
    if n <= 14 {
        let instance = Instance::consecutive(n, k).expect("validated");
        let agree = (k + 1..=n).all(|m| {
            event_prob(&instance, m).expect("within DP range")
                == closed_form(n, k, m).expect("k < m <= n")
        });
        dp_verified = json!(agree);
    }

    json!({
        "n": n,
        "k": k,
        "events": events,
        "last_correct": { "prob": last.to_string(), "value": last.to_f64() },
        "dp_verified": dp_verified,
    })
    .to_string()
}

/// Monte Carlo occupancy frequencies next to the exact curve. Deterministic
/// in the seed; single-threaded inside the browser.
#[wasm_bindgen]
pub fn simulate_occupancy(n: u32, k: u32, trials: u32, seed: u32) -> String {
    if let Err(e) = check_instance(n, k) {
        return err(&e);
    }
    if !(1..=200_000).contains(&trials) {
        return err("trials must be in 1..=200000");
    }
    let instance = Instance::consecutive(n, k).expect("validated");
    let batch = run_batch(&instance, u64::from(trials), u64::from(seed), 1);
    let events: Vec<Value> = (k + 1..=n)
        .map(|m| {
            let exact = closed_form(n, k, m).expect("k < m <= n");
            json!({
                "passenger": m,
                "frequency": batch.event_frequency(m),
                "exact": exact.to_f64(),
            })
        })
        .collect();
    let exact_last = last_passenger_correct(n, k).expect("validated");
    json!({
        "n": n,
        "k": k,
        "trials": trials,
        "seed": seed,
        "events": events,
        "last_correct": {
            "frequency": batch.last_correct_frequency(),
            "exact": exact_last.to_f64(),
        },
    })
    .to_string()
}

/// Histogram of the largest normalized displacement (k = 1) against the
/// stick-breaking oracle, both over `trials` samples in `bins` equal bins
/// on [0, 1].
#[wasm_bindgen]
pub fn displacement_demo(n: u32, trials: u32, seed: u32, bins: u32) -> String {
    if let Err(e) = check_instance(n, 1) {
        return err(&e);
    }
    if !(1..=200_000).contains(&trials) {
        return err("trials must be in 1..=200000");
    }
    if !(2..=200).contains(&bins) {
        return err("bins must be in 2..=200");
    }
    let instance = Instance::consecutive(n, 1).expect("validated");
    let (_, largest) = run_batch_map(&instance, u64::from(trials), u64::from(seed), 1, |_, seats| {
        largest_component(n, seats)
    });
    // the oracle stream is decoupled from the simulation seed stream
    let oracle = oracle_largest_components(mix64(u64::from(seed), 1), u64::from(trials));

    let histogram = |samples: &[f64]| -> Vec<f64> {
        let mut counts = vec![0.0f64; bins as usize];
        for &x in samples {
            let idx = ((x * f64::from(bins)) as usize).min(bins as usize - 1);
            counts[idx] += 1.0;
        }
        counts.iter().map(|c| c / samples.len() as f64).collect()
    };
    let mean = |samples: &[f64]| samples.iter().sum::<f64>() / samples.len() as f64;

    json!({
        "n": n,
        "trials": trials,
        "seed": seed,
        "bins": bins,
        "sim": histogram(&largest),
        "oracle": histogram(&oracle),
        "sim_mean": mean(&largest),
        "oracle_mean": mean(&oracle),
    })
    .to_string()
}

/// Largest hop of the single displacement chain, normalized by n.
fn largest_component(n: u32, seats: &[u32]) -> f64 {
    let mut passenger = 1u32;
    let mut max_d = 0u32;
    loop {
        let seat = seats[(passenger - 1) as usize];
        let relabeled = if seat <= 1 { n + seat } else { seat };
        max_d = max_d.max(relabeled - passenger);
        if relabeled > n {
            break;
        }
        passenger = relabeled;
    }
    f64::from(max_d) / f64::from(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_occupancy_values_and_dp_badge() {
        let doc: Value = serde_json::from_str(&exact_occupancy(6, 2)).unwrap();
        assert_eq!(doc["events"].as_array().unwrap().len(), 4);
        // closed form 2/(6-3+3) in lowest terms
        assert_eq!(doc["events"][0]["prob"], "1/3");
        assert_eq!(doc["last_correct"]["prob"], "1/3");
        assert_eq!(doc["dp_verified"], true);
    }

    #[test]
    fn simulate_matches_seeded_rerun() {
        let a = simulate_occupancy(30, 1, 2000, 7);
        let b = simulate_occupancy(30, 1, 2000, 7);
        assert_eq!(a, b);
        let doc: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(doc["events"].as_array().unwrap().len(), 29);
    }

    #[test]
    fn displacement_histograms_are_distributions() {
        let doc: Value = serde_json::from_str(&displacement_demo(200, 3000, 1, 40)).unwrap();
        for key in ["sim", "oracle"] {
            let total: f64 = doc[key]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_f64().unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "{key} sums to {total}");
        }
        let sim_mean = doc["sim_mean"].as_f64().unwrap();
        assert!((sim_mean - 0.6243).abs() < 0.05);
    }

    #[test]
    fn invalid_inputs_return_error_objects() {
        let doc: Value = serde_json::from_str(&exact_occupancy(1, 1)).unwrap();
        assert!(doc["error"].is_string());
        let doc: Value = serde_json::from_str(&displacement_demo(100, 0, 1, 40)).unwrap();
        assert!(doc["error"].is_string());
    }
}
