//! JSON symbol descriptions (`"schema": "bergtol-symbol/1"`).
//!
//! ```json
//! {"type":"harmonic","p0":1,
//!  "analytic":[{"m":3,"coef":{"mod":"2/3","arg_over_pi":"0"}}],
//!  "coanalytic":[{"n":3,"coef":{"re":0.25,"im":0}}]}
//! {"type":"radial","coeffs":[1,-1.5,1]}
//! {"type":"radial","samples":[[0,1],[0.5,0.8],[1,1]]}
//! {"type":"sampled","grid":{"radii":[...],"angular_counts":[...],"boundary_gap":1e-6},
//!  "values":[[re,im],...],"interp":"bilinear"}
//! ```

use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational, rational_from_f64, to_f64};
use crate::geometry::DiskGrid;
use crate::symbols::{
    Coefficient, Complex, HarmonicPolynomial, Interpolation, PolarCoefficient, RadialSymbol, SampledSymbol, Symbol, Term,
};

pub const SCHEMA_VERSION: &str = "bergtol-symbol/1";

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::parse(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::parse(path, "expected an array"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::parse(path, format!("missing field \"{key}\"")))
}

fn number(v: &Value, path: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::parse(path, "number out of range")),
        Value::String(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .or_else(|| parse_rational(s).map(|q| to_f64(&q)))
            .ok_or_else(|| Error::parse(path, format!("cannot read \"{s}\" as a number"))),
        _ => Err(Error::parse(path, "expected a number")),
    }
}

/// A rational given as a string (`"2/3"`, `"0.25"`) or as a JSON number.
fn rational(v: &Value, path: &str) -> Result<BigRational> {
    match v {
        Value::String(s) => parse_rational(s).ok_or_else(|| Error::parse(path, format!("\"{s}\" is not a rational"))),
        Value::Number(_) => {
            let x = number(v, path)?;
            rational_from_f64(x).ok_or_else(|| Error::parse(path, "non-finite number"))
        }
        _ => Err(Error::parse(path, "expected a rational string or number")),
    }
}

fn usize_value(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| Error::parse(path, "expected a nonnegative integer"))
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::parse(format!("{path}.{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn coefficient(v: &Value, path: &str) -> Result<Coefficient> {
    let obj = object(v, path)?;
    let wrap = |e: Error| match e {
        Error::Argument(m) => Error::parse(path, m),
        other => other,
    };
    if obj.contains_key("mod") || obj.contains_key("arg_over_pi") {
        reject_unknown(obj, &["mod", "arg_over_pi"], path)?;
        let modulus = rational(field(obj, "mod", path)?, &format!("{path}.mod"))?;
        let arg = rational(field(obj, "arg_over_pi", path)?, &format!("{path}.arg_over_pi"))?;
        Ok(Coefficient::from_polar(PolarCoefficient::new(modulus, arg).map_err(wrap)?))
    } else {
        reject_unknown(obj, &["re", "im"], path)?;
        let re = number(field(obj, "re", path)?, &format!("{path}.re"))?;
        let im = match obj.get("im") {
            Some(v) => number(v, &format!("{path}.im"))?,
            None => 0.0,
        };
        Coefficient::from_complex(Complex::new(re, im)).map_err(wrap)
    }
}

fn constant_term(v: &Value, path: &str) -> Result<Coefficient> {
    match v {
        Value::Number(_) => Coefficient::real(number(v, path)?).map_err(|e| Error::parse(path, e.to_string())),
        Value::String(_) => Ok(Coefficient::from_rational(rational(v, path)?)),
        Value::Object(_) => coefficient(v, path),
        _ => Err(Error::parse(path, "expected a number, rational string or coefficient object")),
    }
}

fn terms(v: Option<&Value>, key: &str, power_key: &str) -> Result<Vec<Term>> {
    let Some(v) = v else { return Ok(Vec::new()) };
    let path = format!("$.{key}");
    array(v, &path)?
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let tp = format!("{path}[{i}]");
            let obj = object(t, &tp)?;
            reject_unknown(obj, &[power_key, "coef"], &tp)?;
            let power = usize_value(field(obj, power_key, &tp)?, &format!("{tp}.{power_key}"))?;
            let power = u32::try_from(power).map_err(|_| Error::parse(format!("{tp}.{power_key}"), "exponent too large"))?;
            Ok(Term::new(power, coefficient(field(obj, "coef", &tp)?, &format!("{tp}.coef"))?))
        })
        .collect()
}

fn harmonic(obj: &Map<String, Value>) -> Result<HarmonicPolynomial> {
    reject_unknown(obj, &["schema", "type", "p0", "analytic", "coanalytic"], "$")?;
    let p0 = match obj.get("p0") {
        Some(v) => constant_term(v, "$.p0")?,
        None => Coefficient::from_rational(BigRational::from_integer(0.into())),
    };
    let analytic = terms(obj.get("analytic"), "analytic", "m")?;
    let coanalytic = terms(obj.get("coanalytic"), "coanalytic", "n")?;
    HarmonicPolynomial::new(p0, analytic, coanalytic).map_err(|e| match e {
        Error::Argument(m) => Error::parse("$", m),
        other => other,
    })
}

fn radial(obj: &Map<String, Value>) -> Result<RadialSymbol> {
    reject_unknown(obj, &["schema", "type", "coeffs", "samples"], "$")?;
    let wrap = |path: &'static str| {
        move |e: Error| match e {
            Error::Argument(m) => Error::parse(path, m),
            other => other,
        }
    };
    match (obj.get("coeffs"), obj.get("samples")) {
        (Some(c), None) => {
            let items = array(c, "$.coeffs")?;
            if items.iter().any(Value::is_string) {
                let exact = items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| rational(v, &format!("$.coeffs[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                RadialSymbol::polynomial_exact(exact).map_err(wrap("$.coeffs"))
            } else {
                let floats = items
                    .iter()
                    .enumerate()
                    .map(|(i, v)| number(v, &format!("$.coeffs[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                RadialSymbol::polynomial(floats).map_err(wrap("$.coeffs"))
            }
        }
        (None, Some(s)) => {
            let mut radii = Vec::new();
            let mut values = Vec::new();
            for (i, pair) in array(s, "$.samples")?.iter().enumerate() {
                let p = format!("$.samples[{i}]");
                let pair = array(pair, &p)?;
                if pair.len() != 2 {
                    return Err(Error::parse(p, "expected [r, g]"));
                }
                radii.push(number(&pair[0], &format!("{p}[0]"))?);
                values.push(number(&pair[1], &format!("{p}[1]"))?);
            }
            RadialSymbol::sampled(radii, values).map_err(wrap("$.samples"))
        }
        (Some(_), Some(_)) => Err(Error::parse("$", "give either \"coeffs\" or \"samples\", not both")),
        (None, None) => Err(Error::parse("$", "radial symbol needs \"coeffs\" or \"samples\"")),
    }
}

fn sampled(obj: &Map<String, Value>) -> Result<SampledSymbol> {
    reject_unknown(obj, &["schema", "type", "grid", "values", "interp"], "$")?;
    let g = object(field(obj, "grid", "$")?, "$.grid")?;
    reject_unknown(g, &["radii", "angular_counts", "boundary_gap"], "$.grid")?;
    let radii = array(field(g, "radii", "$.grid")?, "$.grid.radii")?
        .iter()
        .enumerate()
        .map(|(i, v)| number(v, &format!("$.grid.radii[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let counts = array(field(g, "angular_counts", "$.grid")?, "$.grid.angular_counts")?
        .iter()
        .enumerate()
        .map(|(i, v)| usize_value(v, &format!("$.grid.angular_counts[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let gap = match g.get("boundary_gap") {
        None | Some(Value::Null) => None,
        Some(v) => Some(number(v, "$.grid.boundary_gap")?),
    };
    let grid = DiskGrid::new(radii, counts, gap).map_err(|e| Error::parse("$.grid", e.to_string()))?;
    let values = array(field(obj, "values", "$")?, "$.values")?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let p = format!("$.values[{i}]");
            match v {
                Value::Array(pair) if pair.len() == 2 => Ok(Complex::new(
                    number(&pair[0], &format!("{p}[0]"))?,
                    number(&pair[1], &format!("{p}[1]"))?,
                )),
                Value::Number(_) => Ok(Complex::new(number(v, &p)?, 0.0)),
                _ => Err(Error::parse(p, "expected [re, im] or a real number")),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let interpolation = match obj.get("interp").map(|v| v.as_str()) {
        None | Some(Some("bilinear")) => Interpolation::Bilinear,
        Some(Some("nearest")) => Interpolation::Nearest,
        _ => return Err(Error::parse("$.interp", "expected \"bilinear\" or \"nearest\"")),
    };
    SampledSymbol::new(grid, values, interpolation).map_err(|e| Error::parse("$.values", e.to_string()))
}

/// Parses a JSON symbol description.
pub fn parse_symbol(text: &str) -> Result<Symbol> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::parse("$", e.to_string()))?;
    symbol_from_value(&value)
}

pub fn symbol_from_value(value: &Value) -> Result<Symbol> {
    let obj = object(value, "$")?;
    if let Some(s) = obj.get("schema") {
        if s.as_str() != Some(SCHEMA_VERSION) {
            return Err(Error::parse("$.schema", format!("unsupported schema {s}, expected \"{SCHEMA_VERSION}\"")));
        }
    }
    let kind = field(obj, "type", "$")?
        .as_str()
        .ok_or_else(|| Error::parse("$.type", "expected a string"))?;
    match kind {
        "harmonic" => harmonic(obj).map(Symbol::Harmonic),
        "radial" => radial(obj).map(Symbol::Radial),
        "sampled" => sampled(obj).map(Symbol::Sampled),
        other => Err(Error::parse("$.type", format!("unknown symbol type \"{other}\""))),
    }
}

fn coefficient_json(c: &Coefficient) -> Value {
    match c.polar() {
        Some(p) => json!({"mod": format_rational(p.modulus()), "arg_over_pi": format_rational(p.arg_over_pi())}),
        None => json!({"re": c.value().re, "im": c.value().im}),
    }
}

fn terms_json(terms: &[Term], power_key: &str) -> Value {
    Value::Array(
        terms
            .iter()
            .map(|t| {
                let mut m = Map::new();
                m.insert(power_key.into(), json!(t.power));
                m.insert("coef".into(), coefficient_json(&t.coef));
                Value::Object(m)
            })
            .collect(),
    )
}

/// Serializes a symbol. Exact data is written as rational strings, so
/// `parse_symbol(symbol_to_json(s))` reproduces `s`.
pub fn symbol_to_value(symbol: &Symbol) -> Value {
    match symbol {
        Symbol::Harmonic(p) => {
            let p0 = match p.p0().exact_real() {
                Some(q) => Value::String(format_rational(&q)),
                None => coefficient_json(p.p0()),
            };
            json!({
                "schema": SCHEMA_VERSION,
                "type": "harmonic",
                "p0": p0,
                "analytic": terms_json(p.analytic(), "m"),
                "coanalytic": terms_json(p.coanalytic(), "n"),
            })
        }
        Symbol::Radial(RadialSymbol::Polynomial { coeffs, exact }) => {
            let from_floats = match exact {
                Some(e) => coeffs.iter().zip(e).all(|(&c, q)| rational_from_f64(c).as_ref() == Some(q)),
                None => true,
            };
            let coeffs: Vec<Value> = match exact {
                Some(e) if !from_floats => e.iter().map(|q| Value::String(format_rational(q))).collect(),
                _ => coeffs.iter().map(|&c| json!(c)).collect(),
            };
            json!({"schema": SCHEMA_VERSION, "type": "radial", "coeffs": coeffs})
        }
        Symbol::Radial(RadialSymbol::Sampled { radii, values }) => {
            let samples: Vec<Value> = radii.iter().zip(values).map(|(r, g)| json!([r, g])).collect();
            json!({"schema": SCHEMA_VERSION, "type": "radial", "samples": samples})
        }
        Symbol::Sampled(s) => {
            let g = s.grid();
            let values: Vec<Value> = s.values().iter().map(|v| json!([v.re, v.im])).collect();
            json!({
                "schema": SCHEMA_VERSION,
                "type": "sampled",
                "grid": {"radii": g.radii(), "angular_counts": g.angular_counts(), "boundary_gap": g.boundary_gap()},
                "values": values,
                "interp": s.interpolation(),
            })
        }
    }
}

pub fn symbol_to_json(symbol: &Symbol) -> String {
    serde_json::to_string(&symbol_to_value(symbol)).expect("symbol JSON is always serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational as q;

    #[test]
    fn parses_the_documented_examples() {
        let r = parse_symbol(
            r#"{"type":"harmonic","p0":1,"analytic":[{"m":3,"coef":{"mod":"2/3","arg_over_pi":"0"}}],"coanalytic":[{"n":3,"coef":{"mod":"1/3","arg_over_pi":"0"}}]}"#,
        )
        .unwrap();
        let Symbol::Harmonic(p) = &r else { panic!("harmonic expected") };
        assert_eq!(p.analytic()[0].coef.polar().unwrap().modulus(), &q(2, 3));
        assert_eq!(p.p0().exact_real(), Some(q(1, 1)));

        let g = parse_symbol(r#"{"type":"radial","coeffs":[1,-1.5,1]}"#).unwrap();
        let Symbol::Radial(g) = g else { panic!("radial expected") };
        assert_eq!(g.exact_coefficients().unwrap()[1], q(-3, 2));

        let zero = parse_symbol(r#"{"type":"harmonic","p0":0}"#).unwrap();
        assert_eq!(zero.eval(Complex::new(0.3, 0.1)).unwrap(), Complex::new(0.0, 0.0));
    }

    #[test]
    fn errors_carry_paths() {
        let cases = [
            (r#"{"type":"harmonic","analytic":[{"m":1,"coef":{"re":"x"}}]}"#, "$.analytic[0].coef.re"),
            (r#"{"type":"harmonic","coanalytic":[{"coef":{"re":1}}]}"#, "$.coanalytic[0]"),
            (r#"{"type":"radial"}"#, "$"),
            (r#"{"type":"disc"}"#, "$.type"),
            (r#"{"schema":"bergtol-symbol/9","type":"radial","coeffs":[1]}"#, "$.schema"),
            (r#"{"type":"harmonic","p0":1,"extra":2}"#, "$.extra"),
            (r#"{"type":"radial","samples":[[0,1],[0.5]]}"#, "$.samples[1]"),
        ];
        for (text, want) in cases {
            match parse_symbol(text) {
                Err(Error::Parse { path, .. }) => assert_eq!(path, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn round_trips() {
        let texts = [
            r#"{"type":"harmonic","p0":"5/4","analytic":[{"m":1,"coef":{"re":0.25,"im":-0.5}}],"coanalytic":[{"n":2,"coef":{"mod":"1/7","arg_over_pi":"3/5"}}]}"#,
            r#"{"type":"harmonic","p0":{"re":0.5,"im":0.25}}"#,
            r#"{"type":"radial","coeffs":["1/3","-2",0.5]}"#,
            r#"{"type":"radial","coeffs":[0.1,0.2]}"#,
            r#"{"type":"radial","samples":[[0,1],[0.5,0.8],[1,1]]}"#,
            r#"{"type":"sampled","grid":{"radii":[0,0.5],"angular_counts":[1,4]},"values":[[1,0],[2,0],[3,1],[4,0],[5,-1]],"interp":"nearest"}"#,
        ];
        for text in texts {
            let s = parse_symbol(text).unwrap();
            let again = parse_symbol(&symbol_to_json(&s)).unwrap();
            assert_eq!(s, again, "{text}");
        }
    }
}
