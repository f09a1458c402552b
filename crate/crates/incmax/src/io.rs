//! JSON documents and CSV tables. Numbers are written as text: "p/q" for
//! rationals and the shortest round-trip form for floats.

use std::io::Write;

use serde_json::{json, Value};

use crate::continuous::{GreedyRun, PiecewiseLinearValue};
use crate::error::{Error, Result};
use crate::incmax_core::{Coverage, Fixture, Matching, Modular};
use crate::lower_bounds::{Certificate, RecurrenceTrace};
use crate::scalar::parse_scalar;
use crate::separable::{ProfileRow, SeparableInstance};
use crate::yao::YaoCertificate;
use crate::Scalar;

pub fn text<T: Scalar>(x: &T) -> String {
    x.to_string()
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn parse_json(s: &str) -> Result<Value> {
    serde_json::from_str(s).map_err(|e| parse_err(format!("invalid JSON: {e}")))
}

/// A number given either as a JSON number or as a string such as "17/40".
fn number<T: Scalar>(v: &Value) -> Result<T> {
    match v {
        Value::String(s) => parse_scalar(s),
        Value::Number(n) => parse_scalar(&n.to_string()),
        other => Err(parse_err(format!("expected a number, got {other}"))),
    }
}

fn number_list<T: Scalar>(v: &Value, field: &str) -> Result<Vec<T>> {
    v.get(field)
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err(format!("missing array {field:?}")))?
        .iter()
        .map(number)
        .collect()
}

fn index(v: &Value) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| parse_err(format!("expected an index, got {v}")))
}

fn texts<T: Scalar>(xs: &[T]) -> Vec<String> {
    xs.iter().map(text).collect()
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_fixture<T: Scalar>(s: &str) -> Result<Fixture<T>> {
    let v = parse_json(s)?;
    match v.get("type").and_then(Value::as_str) {
        Some("modular") => Ok(Fixture::Modular(Modular { values: number_list(&v, "values")? })),
        Some("matching") => {
            let edges = v
                .get("edges")
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("missing array \"edges\""))?
                .iter()
                .map(|e| match e.as_array().map(Vec::as_slice) {
                    Some([a, b, w]) => Ok((index(a)?, index(b)?, number(w)?)),
                    _ => Err(parse_err(format!("edge must be [u, v, weight], got {e}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Fixture::Matching(Matching::new(edges)?))
        }
        Some("coverage") => {
            let weights: Vec<T> = number_list(&v, "weights")?;
            let sets = v
                .get("sets")
                .and_then(Value::as_array)
                .ok_or_else(|| parse_err("missing array \"sets\""))?
                .iter()
                .map(|s| {
                    s.as_array()
                        .ok_or_else(|| parse_err("each set is an array of items"))?
                        .iter()
                        .map(|i| index(i).and_then(|i| if i < weights.len() { Ok(i) } else { Err(parse_err(format!("item {i} has no weight"))) }))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Fixture::Coverage(Coverage { sets, weights }))
        }
        other => Err(parse_err(format!("unknown oracle type {other:?}; use modular, matching or coverage"))),
    }
}

pub fn fixture_to_json<T: Scalar>(f: &Fixture<T>) -> String {
    let v = match f {
        Fixture::Modular(m) => json!({"type": "modular", "values": texts(&m.values)}),
        Fixture::Matching(m) => json!({
            "type": "matching",
            "edges": m.edges.iter().map(|(a, b, w)| json!([a, b, text(w)])).collect::<Vec<_>>(),
        }),
        Fixture::Coverage(c) => json!({"type": "coverage", "sets": c.sets, "weights": texts(&c.weights)}),
    };
    pretty(&v)
}

/// `{"densities": [...]}`, entry i for the set of cardinality i + 1.
pub fn parse_separable<T: Scalar>(s: &str) -> Result<SeparableInstance<T>> {
    SeparableInstance::from_densities(number_list(&parse_json(s)?, "densities")?)
}

pub fn separable_to_json<T: Scalar>(inst: &SeparableInstance<T>) -> String {
    pretty(&json!({"densities": texts(&inst.densities())}))
}

/// `{"breakpoints": [[c, v], ...], "extend_slope": optional}`.
pub fn parse_pl<T: Scalar>(s: &str) -> Result<PiecewiseLinearValue<T>> {
    let v = parse_json(s)?;
    let pts = v
        .get("breakpoints")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("missing array \"breakpoints\""))?
        .iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([c, y]) => Ok((number(c)?, number(y)?)),
            _ => Err(parse_err(format!("breakpoint must be [c, v], got {p}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = match v.get("extend_slope") {
        None | Some(Value::Null) => None,
        Some(x) => Some(number(x)?),
    };
    PiecewiseLinearValue::new(pts, slope)
}

pub fn pl_to_json<T: Scalar>(f: &PiecewiseLinearValue<T>) -> String {
    let pts: Vec<Value> = f.breakpoints().iter().map(|(c, v)| json!([text(c), text(v)])).collect();
    pretty(&json!({"breakpoints": pts, "extend_slope": text(f.extend_slope())}))
}

/// `{"N": 10, "d": [...], "p": [...], "rho": "1.447"}`.
pub fn parse_yao_certificate<T: Scalar>(s: &str) -> Result<YaoCertificate<T>> {
    let v = parse_json(s)?;
    let n = v.get("N").ok_or_else(|| parse_err("missing \"N\"")).and_then(index)?;
    let claimed_rho = match v.get("rho") {
        None | Some(Value::Null) => 0.0,
        Some(x) => number::<f64>(x)?,
    };
    let cert = YaoCertificate { n, d: number_list(&v, "d")?, p: number_list(&v, "p")?, claimed_rho };
    cert.validate()?;
    Ok(cert)
}

pub fn yao_certificate_to_json<T: Scalar>(cert: &YaoCertificate<T>) -> String {
    pretty(&json!({
        "N": cert.n,
        "d": texts(&cert.d),
        "p": texts(&cert.p),
        "rho": text(&cert.claimed_rho),
    }))
}

pub fn det_lb_certificate_to_json(cert: &Certificate) -> String {
    pretty(&json!({
        "rho": cert.rho,
        "epsilon": cert.epsilon,
        "ell": cert.ell,
        "t": cert.t,
        "infeasible": cert.infeasible,
        "candidates_checked": cert.candidates_checked,
        "witness": cert.witness,
    }))
}

/// Writes a header and rows of preformatted cells.
pub fn write_csv<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Parse(format!("CSV write failed: {e}"));
    out.write_record(header).map_err(io)?;
    for row in rows {
        out.write_record(&row).map_err(io)?;
    }
    out.flush().map_err(|e| Error::Parse(format!("CSV write failed: {e}")))
}

pub fn write_profile_csv<W: Write, T: Scalar>(w: W, rows: &[ProfileRow<T>]) -> Result<()> {
    write_csv(
        w,
        &["C", "alg_value", "opt_value", "ratio"],
        rows.iter().map(|r| {
            vec![
                r.size.to_string(),
                text(&r.alg_value),
                text(&r.opt_value),
                r.ratio.as_ref().map_or_else(|| "inf".to_string(), text),
            ]
        }),
    )
}

pub fn write_greedy_csv<W: Write, T: Scalar>(w: W, run: &GreedyRun<T>) -> Result<()> {
    write_csv(
        w,
        &["i", "c_i", "d(c_i)", "v(c_i)", "p(c_i)", "prefix_sum"],
        run.steps.iter().enumerate().map(|(i, s)| {
            vec![
                (i + 1).to_string(),
                text(&s.size),
                text(&s.density),
                text(&s.value),
                s.reach.as_ref().map_or_else(|| "inf".to_string(), text),
                text(&s.prefix_sum),
            ]
        }),
    )
}

pub fn write_recurrence_csv<W: Write, T: Scalar>(w: W, trace: &RecurrenceTrace<T>) -> Result<()> {
    write_csv(
        w,
        &["n", "t_n", "1/t_n"],
        trace
            .values
            .iter()
            .zip(&trace.reciprocals)
            .enumerate()
            .map(|(n, (t, r))| vec![n.to_string(), text(t), text(r)]),
    )
}

pub fn write_expectation_csv<W: Write>(w: W, rows: &[(u64, f64)]) -> Result<()> {
    write_csv(
        w,
        &["C", "expected_ratio_lower_bound"],
        rows.iter().map(|(c, x)| vec![c.to_string(), text(x)]),
    )
}

/// Rows (k, delta, I(k, delta), g(r)); I is empty where the size hypothesis fails.
pub fn write_bound_grid_csv<W: Write>(w: W, rows: &[(u32, f64, Option<f64>, f64)]) -> Result<()> {
    write_csv(
        w,
        &["k", "delta", "I", "g"],
        rows.iter().map(|(k, d, i, g)| vec![k.to_string(), text(d), i.as_ref().map_or_else(String::new, text), text(g)]),
    )
}

pub fn write_sizes_csv<W: Write>(w: W, sizes: &[usize]) -> Result<()> {
    write_csv(
        w,
        &["i", "c_i"],
        sizes.iter().enumerate().map(|(i, c)| vec![i.to_string(), c.to_string()]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incmax_core::Objective;
    use crate::yao::reference_certificate;
    use crate::Exact;
    use proptest::prelude::*;

    #[test]
    fn fixtures_round_trip() {
        let docs = [
            r#"{"type":"modular","values":["1","3/2",2]}"#,
            r#"{"type":"matching","edges":[[0,1,"2"],[1,2,"3"],[2,3,"2"]]}"#,
            r#"{"type":"coverage","sets":[[0,1],[1],[2]],"weights":["1","1/3","5"]}"#,
        ];
        for d in docs {
            let f: Fixture<Exact> = parse_fixture(d).unwrap();
            let g: Fixture<Exact> = parse_fixture(&fixture_to_json(&f)).unwrap();
            for set in 0..(1u32 << f.universe_size()) {
                assert_eq!(f.eval(set), g.eval(set));
            }
        }
        assert!(parse_fixture::<f64>(r#"{"type":"knapsack"}"#).is_err());
        assert!(parse_fixture::<f64>(r#"{"type":"coverage","sets":[[4]],"weights":["1"]}"#).is_err());
    }

    #[test]
    fn separable_and_pl_round_trip() {
        let inst: SeparableInstance<Exact> = parse_separable(r#"{"densities":["1","17/40","0.25"]}"#).unwrap();
        assert_eq!(inst.density_of(2).unwrap(), Exact::new(17.into(), 40.into()));
        assert_eq!(parse_separable::<Exact>(&separable_to_json(&inst)).unwrap(), inst);
        let f: PiecewiseLinearValue<Exact> = parse_pl(r#"{"breakpoints":[[1,1],[2,"3/2"]],"extend_slope":"1/4"}"#).unwrap();
        let g: PiecewiseLinearValue<Exact> = parse_pl(&pl_to_json(&f)).unwrap();
        assert_eq!(f.breakpoints(), g.breakpoints());
        assert_eq!(f.extend_slope(), g.extend_slope());
    }

    #[test]
    fn yao_certificate_round_trip() {
        let cert = reference_certificate();
        let back: YaoCertificate<Exact> = parse_yao_certificate(&yao_certificate_to_json(&cert)).unwrap();
        assert_eq!(back.d, cert.d);
        assert_eq!(back.p, cert.p);
        assert_eq!(back.claimed_rho, cert.claimed_rho);
        assert!(parse_yao_certificate::<Exact>(r#"{"N":2,"d":["1","1/2"],"p":["1/2","1/3"]}"#).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_expectation_csv(&mut buf, &[(1, 0.5), (2, 0.1)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "C,expected_ratio_lower_bound\n1,0.5\n2,0.1\n");
    }

    proptest! {
        #[test]
        fn float_text_round_trips(x in prop::num::f64::NORMAL) {
            prop_assert_eq!(text(&x).parse::<f64>().unwrap(), x);
            prop_assert_eq!(parse_scalar::<f64>(&text(&x)).unwrap(), x);
        }
    }
}
