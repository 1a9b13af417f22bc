//! JSON and CSV surfaces. Every number crosses the boundary as a decimal string.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::curve::CurvePoint;
use crate::dynamics::{PathTrace, TradeAction, TradeKind};
use crate::error::{PammError, Result};
use crate::numeric::Scalar;
use crate::reconstruct::Quote;
use crate::region::{verification_failures, PrecomputedThresholds};
use crate::state::StaticParams;

fn decimal<S: Scalar>(v: &Value, field: &str) -> Result<S> {
    match v {
        Value::String(s) => S::parse_decimal(s),
        Value::Number(n) => S::parse_decimal(&n.to_string()),
        _ => Err(PammError::Parse(format!("{field}: expected a decimal string"))),
    }
}

fn field<'a>(obj: &'a Value, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| PammError::Parse(format!("missing field {name:?}")))
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| PammError::Parse(e.to_string()))
}

pub fn parse_statics<S: Scalar>(text: &str) -> Result<StaticParams<S>> {
    let v = parse_json(text)?;
    if !v.is_object() {
        return Err(PammError::Parse("static parameters must be a JSON object".into()));
    }
    StaticParams::new(
        decimal(field(&v, "theta_bar")?, "theta_bar")?,
        decimal(field(&v, "alpha_bar_norm")?, "alpha_bar_norm")?,
        decimal(field(&v, "xu_bar_norm")?, "xu_bar_norm")?,
    )
}

#[derive(Serialize)]
struct StaticsJson {
    theta_bar: String,
    alpha_bar_norm: String,
    xu_bar_norm: String,
}

pub fn statics_to_json<S: Scalar>(p: &StaticParams<S>) -> String {
    let j = StaticsJson {
        theta_bar: p.theta_bar.to_decimal(),
        alpha_bar_norm: p.alpha_bar_norm.to_decimal(),
        xu_bar_norm: p.xu_bar_norm.to_decimal(),
    };
    serde_json::to_string_pretty(&j).expect("plain struct serializes")
}

/// SHA-256 over the compact, key-sorted decimal form of the parameters.
pub fn params_hash<S: Scalar>(p: &StaticParams<S>) -> String {
    let canonical = format!(
        r#"{{"alpha_bar_norm":"{}","theta_bar":"{}","xu_bar_norm":"{}"}}"#,
        p.alpha_bar_norm.to_decimal(),
        p.theta_bar.to_decimal(),
        p.xu_bar_norm.to_decimal()
    );
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[allow(non_snake_case)]
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdsJson {
    params_hash: String,
    ba_I_II: String,
    xl_I_II: String,
    ba_II_III: String,
    ba_h_l: String,
    xu_h_l: String,
    ba_H_L: String,
    alpha_H_L: String,
}

pub fn thresholds_to_json<S: Scalar>(p: &StaticParams<S>, t: &PrecomputedThresholds<S>) -> String {
    let j = ThresholdsJson {
        params_hash: params_hash(p),
        ba_I_II: t.ba_I_II.to_decimal(),
        xl_I_II: t.xl_I_II.to_decimal(),
        ba_II_III: t.ba_II_III.to_decimal(),
        ba_h_l: t.ba_h_l.to_decimal(),
        xu_h_l: t.xu_h_l.to_decimal(),
        ba_H_L: t.ba_H_L.to_decimal(),
        alpha_H_L: t.alpha_H_L.to_decimal(),
    };
    serde_json::to_string_pretty(&j).expect("plain struct serializes")
}

/// Parse a thresholds artifact and re-verify it against `p` without recomputing it.
pub fn load_thresholds<S: Scalar>(text: &str, p: &StaticParams<S>) -> Result<PrecomputedThresholds<S>> {
    let j: ThresholdsJson =
        serde_json::from_str(text).map_err(|e| PammError::ThresholdMismatch(format!("malformed thresholds: {e}")))?;
    let num = |s: &str, name: &str| {
        S::parse_decimal(s).map_err(|e| PammError::ThresholdMismatch(format!("{name}: {e}")))
    };
    let t = PrecomputedThresholds {
        ba_I_II: num(&j.ba_I_II, "ba_I_II")?,
        xl_I_II: num(&j.xl_I_II, "xl_I_II")?,
        ba_II_III: num(&j.ba_II_III, "ba_II_III")?,
        ba_h_l: num(&j.ba_h_l, "ba_h_l")?,
        xu_h_l: num(&j.xu_h_l, "xu_h_l")?,
        ba_H_L: num(&j.ba_H_L, "ba_H_L")?,
        alpha_H_L: num(&j.alpha_H_L, "alpha_H_L")?,
    };
    if j.params_hash != params_hash(p) {
        return Err(PammError::ThresholdMismatch(
            "params_hash does not match the static parameters".into(),
        ));
    }
    let bad = verification_failures(p, &t);
    if !bad.is_empty() {
        return Err(PammError::ThresholdMismatch(format!(
            "identity violated for {}",
            bad.join(", ")
        )));
    }
    Ok(t)
}

#[derive(Serialize)]
struct StateJson {
    x: String,
    b: String,
    y: String,
}

#[derive(Serialize)]
struct OpsJson {
    arith: u64,
    sqrt: u64,
}

#[derive(Serialize)]
struct QuoteJson {
    payout: String,
    state: StateJson,
    region: String,
    b_a: String,
    ops: OpsJson,
}

pub fn quote_to_json<S: Scalar>(q: &Quote<S>) -> String {
    let j = QuoteJson {
        payout: q.payout.to_decimal(),
        state: StateJson {
            x: q.state.x.to_decimal(),
            b: q.state.b.to_decimal(),
            y: q.state.y.to_decimal(),
        },
        region: q.region.to_string(),
        b_a: q.anchor.b_a.to_decimal(),
        ops: OpsJson {
            arith: q.ops.arith,
            sqrt: q.ops.sqrt,
        },
    };
    serde_json::to_string_pretty(&j).expect("plain struct serializes")
}

pub const QUOTE_HEADER: [&str; 8] = ["payout", "x", "b", "y", "region", "b_a", "arith", "sqrt"];

pub fn write_quote_csv<S: Scalar, W: Write>(out: W, q: &Quote<S>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(QUOTE_HEADER).map_err(csv_err)?;
    w.write_record([
        q.payout.to_decimal(),
        q.state.x.to_decimal(),
        q.state.b.to_decimal(),
        q.state.y.to_decimal(),
        q.region.to_string(),
        q.anchor.b_a.to_decimal(),
        q.ops.arith.to_string(),
        q.ops.sqrt.to_string(),
    ])
    .map_err(csv_err)?;
    w.flush().map_err(csv_err)
}

/// Parse `[{"kind": "redeem" | "mint", "amount": "0.1"}, ...]`.
pub fn parse_path_script(text: &str) -> Result<Vec<TradeAction>> {
    let v = parse_json(text)?;
    let items = v
        .as_array()
        .ok_or_else(|| PammError::Parse("path script must be a JSON array".into()))?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let kind = match field(item, "kind")?.as_str() {
                Some("redeem") => TradeKind::Redeem,
                Some("mint") => TradeKind::Mint,
                _ => return Err(PammError::Parse(format!("action {i}: kind must be \"redeem\" or \"mint\""))),
            };
            let amount: f64 = decimal(field(item, "amount")?, "amount")?;
            if !(amount > 0.0) {
                return Err(PammError::Parse(format!("action {i}: amount must be positive")));
            }
            Ok(TradeAction { kind, amount })
        })
        .collect()
}

fn csv_err(e: impl std::fmt::Display) -> PammError {
    PammError::Parse(format!("csv: {e}"))
}

pub fn write_curve_csv<S: Scalar, W: Write>(out: W, points: &[CurvePoint<S>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "p", "b", "r", "segment"]).map_err(csv_err)?;
    for pt in points {
        w.write_record([
            pt.x.to_decimal(),
            pt.p.to_decimal(),
            pt.b.to_decimal(),
            pt.r.to_decimal(),
            pt.segment.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

#[derive(Serialize)]
struct PointJson {
    x: String,
    p: String,
    b: String,
    r: String,
    segment: String,
}

pub fn curve_to_json<S: Scalar>(points: &[CurvePoint<S>]) -> String {
    let rows: Vec<PointJson> = points
        .iter()
        .map(|pt| PointJson {
            x: pt.x.to_decimal(),
            p: pt.p.to_decimal(),
            b: pt.b.to_decimal(),
            r: pt.r.to_decimal(),
            segment: pt.segment.to_string(),
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("plain struct serializes")
}

pub const TRACE_HEADER: [&str; 10] = [
    "step",
    "kind",
    "amount",
    "x",
    "b",
    "y",
    "r",
    "r_a",
    "region",
    "payout_or_cost",
];

pub fn write_trace_csv<W: Write>(out: W, trace: &PathTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER).map_err(csv_err)?;
    for (i, st) in trace.steps.iter().enumerate() {
        let r = if st.post.y > 0.0 { st.post.ratio().to_string() } else { String::new() };
        w.write_record([
            (i + 1).to_string(),
            st.action.kind.to_string(),
            st.action.amount.to_string(),
            st.post.x.to_string(),
            st.post.b.to_string(),
            st.post.y.to_string(),
            r,
            st.r_a.to_string(),
            st.region.to_string(),
            st.value.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}
