use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::config::{Axis, Input, Preset, RunConfig, Scenario, SweepSpec, ThroughputSpec};
use crate::efficiency::{cavity_decay_rate, published, throughput, CavityModel};
use crate::protocol::{run_ensemble, run_product, Entry, IonPairState, MixedPassResult, Setup};
use crate::qcore::{ion_fidelity, MixedState, PhotonMode, Polarization};
use crate::recycler::{
    iterate_analytic, iterate_numeric, monte_carlo_ensemble, pool, IterationResult,
};
use crate::{Error, Result};

pub const TOOL: &str = "ionmzi";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// Full report for `cfg` as a JSON value.
pub fn build_report(cfg: &RunConfig) -> Result<Value> {
    let result = match cfg.scenario {
        Scenario::Sweep => {
            let spec = cfg.sweep.expect("sweep scenario carries a sweep spec");
            json!({ "rows": sweep_rows(cfg, &spec)? })
        }
        s => scenario_result(cfg, s, cfg.input, cfg.throughput)?,
    };
    let preset = cfg.preset.map(|p| {
        json!({
            "name": p.name(),
            "source": p.source(),
        })
    });
    Ok(json!({
        "tool": TOOL,
        "version": VERSION,
        "scenario": cfg.scenario.name(),
        "config": to_value(&cfg.to_file()),
        "preset": preset,
        "result": result,
    }))
}

fn input_of(input: Option<Input>) -> Result<Input> {
    input.ok_or(Error::InvalidEntry)
}

fn scenario_result(
    cfg: &RunConfig,
    scenario: Scenario,
    input: Option<Input>,
    tp: Option<ThroughputSpec>,
) -> Result<Value> {
    match scenario {
        Scenario::SinglePass => single_pass(input_of(input)?),
        Scenario::Iterate => {
            let (analytic, numeric) = iterated(cfg, &input_of(input)?)?;
            Ok(json!({
                "analytic": to_value(&analytic),
                "numeric": to_value(&numeric),
                "max_abs_difference": max_abs_difference(&analytic, &numeric),
            }))
        }
        Scenario::Mixed => mixed(cfg, input_of(input)?),
        Scenario::MonteCarlo => monte_carlo(cfg, &input_of(input)?),
        Scenario::Throughput => {
            throughput_result(cfg, input, &tp.expect("throughput spec resolved"))
        }
        Scenario::Sweep => unreachable!("nested sweeps are rejected during validation"),
    }
}

fn ions_value(ions: &IonPairState) -> Value {
    to_value(ions)
}

fn single_pass(input: Input) -> Result<Value> {
    match input {
        Input::Product(p) => {
            let [alpha, beta, a, b] = p.amplitudes();
            let run = run_product(alpha, beta, a, b)?;
            Ok(json!({
                "input": "product",
                "ions": ions_value(&run.ions),
                "pass": to_value(&run.pass),
                "matched_moduli": run.matched_moduli,
                "fidelity_psi_minus": run.fidelity_psi_minus,
            }))
        }
        Input::Mixed { fidelity } => {
            let m = open_mixed(&input)?;
            let mut v = mixed_pass_value(&m)?;
            v.insert("input".into(), json!("mixed"));
            v.insert("fidelity".into(), json!(fidelity));
            Ok(Value::Object(v))
        }
    }
}

fn open_mixed(input: &Input) -> Result<MixedPassResult> {
    run_ensemble(
        &input.ensemble()?,
        Polarization::SigmaPlus,
        Entry::M1_SIDE,
        Setup::Open,
    )
}

fn fidelity_of(m: &Option<MixedState>, target: IonPairState) -> Result<Option<f64>> {
    m.as_ref()
        .map(|m| ion_fidelity(m, &target.to_pure(PhotonMode::Vacuum)))
        .transpose()
}

fn mixed_pass_value(m: &MixedPassResult) -> Result<Map<String, Value>> {
    let components: Vec<Value> = m
        .components
        .iter()
        .map(|c| {
            json!({
                "weight": c.weight,
                "ions": ions_value(&c.ions),
                "pass": to_value(&c.pass),
            })
        })
        .collect();
    let mut out = Map::new();
    out.insert("p_scatter".into(), json!(m.p_scatter));
    out.insert("p_detect_upper".into(), json!(m.p_detect_upper));
    out.insert("p_detect_lower".into(), json!(m.p_detect_lower));
    out.insert("p_recycle".into(), json!(m.p_recycle));
    out.insert(
        "fidelity_upper_psi_plus".into(),
        json!(fidelity_of(&m.post_detect_upper, IonPairState::psi_plus())?),
    );
    out.insert(
        "fidelity_lower_psi_minus".into(),
        json!(fidelity_of(
            &m.post_detect_lower,
            IonPairState::psi_minus()
        )?),
    );
    out.insert("components".into(), Value::Array(components));
    Ok(out)
}

fn iterated(cfg: &RunConfig, input: &Input) -> Result<(IterationResult, IterationResult)> {
    let ensemble = input.ensemble()?;
    let analytic = pool(&ensemble, iterate_analytic)?;
    let numeric = pool(&ensemble, |s| iterate_numeric(s, &cfg.recycle))?;
    Ok((analytic, numeric))
}

fn max_abs_difference(a: &IterationResult, b: &IterationResult) -> f64 {
    [
        a.p_entangled - b.p_entangled,
        a.p_scattered - b.p_scattered,
        a.p_stuck - (b.p_stuck + b.p_truncated),
    ]
    .iter()
    .fold(0.0_f64, |m, d| m.max(d.abs()))
}

fn mixed(cfg: &RunConfig, input: Input) -> Result<Value> {
    let Input::Mixed { fidelity } = input else {
        return Err(Error::InvalidEntry);
    };
    let single = mixed_pass_value(&open_mixed(&input)?)?;
    let (analytic, numeric) = iterated(cfg, &input)?;
    Ok(json!({
        "fidelity": fidelity,
        "single_pass": Value::Object(single),
        "iterated": {
            "analytic": to_value(&analytic),
            "numeric": to_value(&numeric),
        },
    }))
}

fn monte_carlo(cfg: &RunConfig, input: &Input) -> Result<Value> {
    let ensemble = input.ensemble()?;
    let mc = monte_carlo_ensemble(&ensemble, cfg.trials, cfg.seed, &cfg.recycle)?;
    let analytic = pool(&ensemble, iterate_analytic)?;
    let n = cfg.trials as f64;
    let z = |est: f64, p: f64| {
        let sigma = (p * (1.0 - p) / n).sqrt();
        if sigma > 0.0 {
            Some((est - p) / sigma)
        } else {
            None
        }
    };
    Ok(json!({
        "trials": mc.trials,
        "seed": mc.seed,
        "counts": to_value(&mc.counts),
        "estimate": {
            "p_entangled": mc.estimate.p_entangled,
            "p_scattered": mc.estimate.p_scattered,
            "p_stuck": mc.estimate.p_stuck,
            "p_truncated": mc.estimate.p_truncated,
        },
        "std_errors": to_value(&mc.std_errors),
        "passes_distribution": mc.passes_distribution,
        "analytic": {
            "p_entangled": analytic.p_entangled,
            "p_scattered": analytic.p_scattered,
            "p_stuck": analytic.p_stuck,
        },
        "z_scores": {
            "p_entangled": z(mc.estimate.p_entangled, analytic.p_entangled),
            "p_scattered": z(mc.estimate.p_scattered, analytic.p_scattered),
        },
    }))
}

fn cavity_value(preset: Option<Preset>, tp: &ThroughputSpec) -> Result<Value> {
    let mut out = Map::new();
    if let (Some(f), Some(l)) = (tp.finesse, tp.length) {
        let formula = cavity_decay_rate(f, l)?;
        out.insert("finesse".into(), json!(f));
        out.insert("length".into(), json!(l));
        out.insert("decay_rate_formula".into(), json!(formula));
        out.insert(
            "decay_rate_formula_expr".into(),
            json!("4*pi*c/(finesse*length)"),
        );
        if preset.is_some() {
            out.insert(
                "decay_rate_quoted".into(),
                json!({
                    "value": published::QUOTED_DECAY_RATE,
                    "label": "cited constant, not derived",
                    "formula_over_quoted": formula / published::QUOTED_DECAY_RATE,
                    "note": "the quoted decay rate does not follow from the quoted finesse and \
                             length; reported as given and not used in the throughput",
                }),
            );
        }
    }
    let params = tp.params();
    match params.cavity {
        CavityModel::OperatingPoint { p_cav } => {
            out.insert("model".into(), json!("operating_point"));
            out.insert("p_cav".into(), json!(p_cav));
        }
        CavityModel::Physical(c) => {
            out.insert("model".into(), json!("physical"));
            out.insert("evaluation".into(), to_value(&c.evaluate()?));
        }
    }
    Ok(Value::Object(out))
}

fn throughput_result(cfg: &RunConfig, input: Option<Input>, tp: &ThroughputSpec) -> Result<Value> {
    let cavity = cavity_value(cfg.preset, tp)?;
    let Some(input) = input else {
        return Ok(json!({ "cavity": cavity, "throughput": null }));
    };
    let analytic = pool(&input.ensemble()?, iterate_analytic)?;
    let report = throughput(analytic.p_entangled, &tp.params())?;
    let mut out = json!({
        "p_protocol_source": "iterated lower-detector probability",
        "throughput": to_value(&report),
        "cavity": cavity,
    });
    if let Some(claimed) = cfg.preset.and_then(Preset::claimed_pairs_per_second) {
        out["claimed_pairs_per_second"] = json!({
            "value": claimed,
            "computed_rounded": report.pairs_per_second.round(),
            "consistent_after_rounding": report.pairs_per_second.round() == claimed,
            "note": "claimed yield is an integer; compare against the computed rate rounded to the nearest integer",
        });
    }
    Ok(out)
}

/// One scalar row per sweep point, in point order.
pub fn sweep_rows(cfg: &RunConfig, spec: &SweepSpec) -> Result<Vec<BTreeMap<String, Value>>> {
    spec.values()
        .into_par_iter()
        .enumerate()
        .map(|(i, x)| {
            let (input, tp) = match spec.axis {
                Axis::Eta => (cfg.input, cfg.throughput.map(|t| t.with_eta(x))),
                axis => {
                    let mut input = cfg.input.map(|inp| inp.with_axis(axis, x));
                    if spec.alpha_tracks_a2 {
                        input = input.map(|inp| inp.with_axis(Axis::Alpha2, x));
                    }
                    (input, cfg.throughput)
                }
            };
            let mut row = sweep_row(cfg, spec.scenario, input, tp)?;
            row.insert("index".into(), json!(i));
            row.insert(spec.axis.name().into(), json!(x));
            Ok(row)
        })
        .collect()
}

fn sweep_row(
    cfg: &RunConfig,
    scenario: Scenario,
    input: Option<Input>,
    tp: Option<ThroughputSpec>,
) -> Result<BTreeMap<String, Value>> {
    let mut row = BTreeMap::new();
    let mut put = |k: &str, v: Value| {
        row.insert(k.to_owned(), v);
    };
    match scenario {
        Scenario::SinglePass => match input_of(input)? {
            Input::Product(p) => {
                let [alpha, beta, a, b] = p.amplitudes();
                let run = run_product(alpha, beta, a, b)?;
                put("p_scatter_u", json!(run.pass.p_scatter_u));
                put("p_scatter_l", json!(run.pass.p_scatter_l));
                put("p_detect_upper", json!(run.pass.p_detect_upper));
                put("p_detect_lower", json!(run.pass.p_detect_lower));
                put("fidelity_psi_minus", json!(run.fidelity_psi_minus));
                put("matched_moduli", json!(run.matched_moduli));
            }
            inp @ Input::Mixed { .. } => {
                let m = mixed_pass_value(&open_mixed(&inp)?)?;
                for k in [
                    "p_scatter",
                    "p_detect_upper",
                    "p_detect_lower",
                    "fidelity_upper_psi_plus",
                    "fidelity_lower_psi_minus",
                ] {
                    put(k, m[k].clone());
                }
            }
        },
        Scenario::Iterate | Scenario::Mixed => {
            let inp = input_of(input)?;
            if scenario == Scenario::Mixed {
                let m = open_mixed(&inp)?;
                put("single_p_detect_lower", json!(m.p_detect_lower));
                put("single_p_detect_upper", json!(m.p_detect_upper));
                put(
                    "single_fidelity_upper_psi_plus",
                    json!(fidelity_of(&m.post_detect_upper, IonPairState::psi_plus())?),
                );
            }
            let (a, n) = iterated(cfg, &inp)?;
            put("p_entangled", json!(a.p_entangled));
            put("p_scattered", json!(a.p_scattered));
            put("p_stuck", json!(a.p_stuck));
            put("numeric_p_entangled", json!(n.p_entangled));
            put("numeric_p_scattered", json!(n.p_scattered));
            put("numeric_p_stuck", json!(n.p_stuck));
            put("numeric_p_truncated", json!(n.p_truncated));
        }
        Scenario::Throughput => {
            let tp = tp.expect("throughput spec resolved");
            let analytic = pool(&input_of(input)?.ensemble()?, iterate_analytic)?;
            let r = throughput(analytic.p_entangled, &tp.params())?;
            put("p_protocol", json!(r.p_protocol));
            put("p_cav", json!(r.p_cav));
            put("p_total", json!(r.p_total));
            put("pairs_per_second", json!(r.pairs_per_second));
        }
        Scenario::MonteCarlo | Scenario::Sweep => {
            unreachable!("rejected during validation")
        }
    }
    Ok(row)
}

/// Column order for sweep output: index, the swept axis, then the rest sorted.
pub fn sweep_columns(axis: Axis, rows: &[BTreeMap<String, Value>]) -> Vec<String> {
    let mut cols = vec!["index".to_owned(), axis.name().to_owned()];
    if let Some(first) = rows.first() {
        let rest: Vec<String> = first
            .keys()
            .filter(|k| !cols.contains(k))
            .cloned()
            .collect();
        cols.extend(rest);
    }
    cols
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Flattens nested objects and arrays into dotted keys.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    fn go(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        let join = |k: &str| {
            if prefix.is_empty() {
                k.to_owned()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| go(&join(k), x, out)),
            // complex amplitudes stay as [re, im]
            Value::Array(a)
                if a.len() == 2
                    && a.iter().all(Value::is_number)
                    && prefix
                        .rsplit('.')
                        .next()
                        .is_some_and(|k| k.starts_with("c_") || k == "plus" || k == "minus") =>
            {
                out.push((prefix.to_owned(), v.to_string()))
            }
            Value::Array(a) => a
                .iter()
                .enumerate()
                .for_each(|(i, x)| go(&join(&i.to_string()), x, out)),
            other => out.push((prefix.to_owned(), cell(other))),
        }
    }
    let mut out = Vec::new();
    go("", v, &mut out);
    out
}

fn csv_string(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv write");
    for r in rows {
        w.write_record(&r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv output is utf-8")
}

fn table_string(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_owned() + "\n"
    };
    let mut s = line(header);
    s.push_str(&line(
        &widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>(),
    ));
    rows.iter().for_each(|r| s.push_str(&line(r)));
    s
}

/// Renders `report` in the configured format.
pub fn render(cfg: &RunConfig, report: &Value) -> String {
    use super::config::Format;
    if cfg.format == Format::Json {
        let mut s = serde_json::to_string_pretty(report).expect("report serializes");
        s.push('\n');
        return s;
    }
    let (header, rows): (Vec<String>, Vec<Vec<String>>) = match (cfg.scenario, cfg.sweep) {
        (Scenario::Sweep, Some(spec)) => {
            let rows: Vec<BTreeMap<String, Value>> = report["result"]["rows"]
                .as_array()
                .map(|a| {
                    a.iter()
                        .filter_map(|r| r.as_object())
                        .map(|o| o.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
                        .collect()
                })
                .unwrap_or_default();
            let cols = sweep_columns(spec.axis, &rows);
            let body = rows
                .iter()
                .map(|r| {
                    cols.iter()
                        .map(|c| r.get(c).map(cell).unwrap_or_default())
                        .collect()
                })
                .collect();
            (cols, body)
        }
        _ => (
            vec!["key".to_owned(), "value".to_owned()],
            flatten(report)
                .into_iter()
                .map(|(k, v)| vec![k, v])
                .collect(),
        ),
    };
    match cfg.format {
        Format::Csv => csv_string(&header, rows.into_iter()),
        _ => table_string(&header, &rows),
    }
}
