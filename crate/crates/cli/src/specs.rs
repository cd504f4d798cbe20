//! Parsers for map and observable arguments.
//!
//! Maps: `cat`, `cat+shear:EPS` (sine shear along the first axis),
//! `linear:a,b,c,d`, or a path to a JSON map description.
//!
//! Trigonometric polynomials: `zero`, `one`, `test` (`cos(2πx₁)/2`),
//! `mode:a1,a2`, `cos:a1,a2,amp`, `sin:a1,a2,amp`, sums of these joined by
//! `+`, or a path to a TrigPoly JSON file.

use std::path::Path;

use twistlab::torus::{AnosovMap, IntMatrix, Shear, ShearAxis, TrigPoly};
use twistlab::{Error, Result};

fn bad(what: &str, spec: &str, why: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("{what} `{spec}`: {why}"))
}

fn numbers<T: std::str::FromStr>(what: &str, spec: &str, body: &str, count: usize) -> Result<Vec<T>> {
    let parts: Vec<&str> = body.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(bad(what, spec, format!("expected {count} comma-separated numbers")));
    }
    parts
        .iter()
        .map(|p| p.parse::<T>().map_err(|_| bad(what, spec, format!("`{p}` is not a number"))))
        .collect()
}

pub fn parse_map(spec: &str) -> Result<AnosovMap> {
    let spec = spec.trim();
    if spec == "cat" {
        return Ok(AnosovMap::cat());
    }
    if let Some(eps) = spec.strip_prefix("cat+shear:") {
        let eps: f64 = eps
            .trim()
            .parse()
            .map_err(|_| bad("map", spec, "shear amplitude is not a number"))?;
        return AnosovMap::cat().with_shear(Shear::sine(ShearAxis::First, eps));
    }
    if let Some(body) = spec.strip_prefix("linear:") {
        let v: Vec<i64> = numbers("map", spec, body, 4)?;
        return AnosovMap::linear(IntMatrix([[v[0], v[1]], [v[2], v[3]]]));
    }
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)?;
        return serde_json::from_str(&text).map_err(|e| bad("map file", spec, e));
    }
    Err(bad("map", spec, "expected cat, cat+shear:EPS, linear:a,b,c,d or a JSON file"))
}

fn parse_term(spec: &str, term: &str) -> Result<TrigPoly> {
    let term = term.trim();
    match term {
        "zero" => return Ok(TrigPoly::zero()),
        "one" => return Ok(TrigPoly::constant(1.0)),
        "test" => return Ok(TrigPoly::cos([1, 0], 0.5)),
        _ => {}
    }
    if let Some(body) = term.strip_prefix("mode:") {
        let a: Vec<i64> = numbers("observable", spec, body, 2)?;
        return Ok(TrigPoly::mode([a[0], a[1]]));
    }
    for (prefix, sine) in [("cos:", false), ("sin:", true)] {
        if let Some(body) = term.strip_prefix(prefix) {
            let v: Vec<f64> = numbers("observable", spec, body, 3)?;
            if v[0].fract() != 0.0 || v[1].fract() != 0.0 {
                return Err(bad("observable", spec, "frequencies must be integers"));
            }
            let alpha = [v[0] as i64, v[1] as i64];
            return Ok(if sine {
                TrigPoly::sin(alpha, v[2])
            } else {
                TrigPoly::cos(alpha, v[2])
            });
        }
    }
    Err(bad(
        "observable",
        spec,
        "expected zero, one, test, mode:a1,a2, cos:a1,a2,amp, sin:a1,a2,amp or a JSON file",
    ))
}

pub fn parse_trig(spec: &str) -> Result<TrigPoly> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)?;
        return TrigPoly::from_json(&text).map_err(|e| bad("observable file", spec, e));
    }
    let mut sum = TrigPoly::zero();
    for term in spec.split('+') {
        sum = &sum + &parse_term(spec, term)?;
    }
    Ok(sum)
}
