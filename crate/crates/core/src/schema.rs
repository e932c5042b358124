//! JSON documents for measures and symbols.
//!
//! Parsing errors and invariant violations both carry a path into the
//! document, such as `atoms[2].w`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::composition::Symbol;
use crate::error::{Error, Result};
use crate::geometry::DiskPoint;
use crate::measures::{pullback_from_symbol, Atom, AtomicMeasure, AreaMeasure, Measure, RadialMeasure, Ring};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub re: f64,
    pub im: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingDoc {
    pub r: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SymbolDoc {
    Polynomial {
        coeffs: Vec<ComplexDoc>,
    },
    Blaschke {
        zeros: Vec<ComplexDoc>,
        rotation: f64,
    },
    Outer {
        modulus: String,
        beta: f64,
        scale: f64,
        grid: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MeasureDoc {
    Atomic { atoms: Vec<AtomDoc> },
    Radial { rings: Vec<RingDoc> },
    Area,
    Pullback { symbol: SymbolDoc, samples: usize },
}

fn schema_err(prefix: &str, e: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let inner = e.path().to_string();
    let path = match (prefix.is_empty(), inner == ".") {
        (true, true) => "$".to_string(),
        (true, false) => inner,
        (false, true) => prefix.to_string(),
        (false, false) => format!("{prefix}.{inner}"),
    };
    Error::schema(path, e.into_inner().to_string())
}

fn parse_value(text: &str) -> Result<serde_json::Value> {
    serde_json::from_str(text).map_err(|e| Error::schema("$", e.to_string()))
}

fn field<T: for<'de> Deserialize<'de>>(value: serde_json::Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| schema_err(prefix, e))
}

/// Split an internally tagged object into its tag and remaining fields.
fn untag(value: serde_json::Value, tag: &str, prefix: &str) -> Result<(String, serde_json::Value)> {
    let at = if prefix.is_empty() { tag.to_string() } else { format!("{prefix}.{tag}") };
    let serde_json::Value::Object(mut map) = value else {
        return Err(Error::schema(if prefix.is_empty() { "$" } else { prefix }, "expected an object"));
    };
    match map.remove(tag) {
        Some(serde_json::Value::String(t)) => Ok((t, serde_json::Value::Object(map))),
        Some(_) => Err(Error::schema(at, "tag must be a string")),
        None => Err(Error::schema(at, "missing tag")),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomicBody {
    atoms: Vec<AtomDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadialBody {
    rings: Vec<RingDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AreaBody {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PullbackBody {
    symbol: serde_json::Value,
    samples: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialBody {
    coeffs: Vec<ComplexDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BlaschkeBody {
    zeros: Vec<ComplexDoc>,
    #[serde(default)]
    rotation: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OuterBody {
    modulus: String,
    beta: f64,
    scale: f64,
    grid: usize,
}

impl SymbolDoc {
    pub fn from_value(value: serde_json::Value, prefix: &str) -> Result<SymbolDoc> {
        let (kind, body) = untag(value, "kind", prefix)?;
        Ok(match kind.as_str() {
            "polynomial" => {
                let b: PolynomialBody = field(body, prefix)?;
                SymbolDoc::Polynomial { coeffs: b.coeffs }
            }
            "blaschke" => {
                let b: BlaschkeBody = field(body, prefix)?;
                SymbolDoc::Blaschke {
                    zeros: b.zeros,
                    rotation: b.rotation,
                }
            }
            "outer" => {
                let b: OuterBody = field(body, prefix)?;
                SymbolDoc::Outer {
                    modulus: b.modulus,
                    beta: b.beta,
                    scale: b.scale,
                    grid: b.grid,
                }
            }
            other => {
                let at = if prefix.is_empty() { "kind".to_string() } else { format!("{prefix}.kind") };
                return Err(Error::schema(
                    at,
                    format!("unknown symbol kind {other:?}; expected polynomial, blaschke or outer"),
                ));
            }
        })
    }
}

impl MeasureDoc {
    pub fn from_value(value: serde_json::Value) -> Result<MeasureDoc> {
        let (kind, body) = untag(value, "type", "")?;
        Ok(match kind.as_str() {
            "atomic" => MeasureDoc::Atomic {
                atoms: field::<AtomicBody>(body, "")?.atoms,
            },
            "radial" => MeasureDoc::Radial {
                rings: field::<RadialBody>(body, "")?.rings,
            },
            "area" => {
                field::<AreaBody>(body, "")?;
                MeasureDoc::Area
            }
            "pullback" => {
                let b: PullbackBody = field(body, "")?;
                MeasureDoc::Pullback {
                    symbol: SymbolDoc::from_value(b.symbol, "symbol")?,
                    samples: b.samples,
                }
            }
            other => {
                return Err(Error::schema(
                    "type",
                    format!("unknown measure type {other:?}; expected atomic, radial, area or pullback"),
                ))
            }
        })
    }
}

fn finite(path: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::schema(path, "value must be finite"))
    }
}

fn disk_point(path: &str, re: f64, im: f64) -> Result<DiskPoint> {
    DiskPoint::new(finite(path, re)?, finite(path, im)?)
        .map_err(|_| Error::schema(path, format!("point ({re}, {im}) is not inside the open unit disk")))
}

fn positive(path: &str, w: f64) -> Result<f64> {
    if w.is_finite() && w > 0.0 {
        Ok(w)
    } else {
        Err(Error::schema(path, format!("mass {w} must be positive and finite")))
    }
}

fn relabel(path: &str, e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::schema(path, m),
        other => other,
    }
}

impl SymbolDoc {
    /// Validate and build, reporting paths relative to `prefix`.
    pub fn build(&self, prefix: &str) -> Result<Symbol> {
        let at = |s: &str| if prefix.is_empty() { s.to_string() } else { format!("{prefix}.{s}") };
        match self {
            SymbolDoc::Polynomial { coeffs } => {
                let mut cs = Vec::with_capacity(coeffs.len());
                for (k, c) in coeffs.iter().enumerate() {
                    let p = at(&format!("coeffs[{k}]"));
                    cs.push(Complex64::new(finite(&p, c.re)?, finite(&p, c.im)?));
                }
                if cs.is_empty() {
                    return Err(Error::schema(at("coeffs"), "at least one coefficient is required"));
                }
                Symbol::polynomial(cs).map_err(|e| relabel(&at("coeffs"), e))
            }
            SymbolDoc::Blaschke { zeros, rotation } => {
                let mut zs = Vec::with_capacity(zeros.len());
                for (k, z) in zeros.iter().enumerate() {
                    zs.push(disk_point(&at(&format!("zeros[{k}]")), z.re, z.im)?);
                }
                Symbol::blaschke(zs, finite(&at("rotation"), *rotation)?).map_err(|e| relabel(&at("rotation"), e))
            }
            SymbolDoc::Outer { modulus, beta, scale, grid } => {
                if modulus != "abs_pow" {
                    return Err(Error::schema(at("modulus"), format!("unknown modulus {modulus:?}; expected \"abs_pow\"")));
                }
                Symbol::outer(*beta, *scale, *grid).map_err(|e| relabel(prefix, e))
            }
        }
    }

    pub fn from_symbol(s: &Symbol) -> SymbolDoc {
        match s {
            Symbol::Polynomial(p) => SymbolDoc::Polynomial {
                coeffs: p.coeffs().iter().map(|c| ComplexDoc { re: c.re, im: c.im }).collect(),
            },
            Symbol::Blaschke { zeros, rotation } => SymbolDoc::Blaschke {
                zeros: zeros.iter().map(|z| ComplexDoc { re: z.re(), im: z.im() }).collect(),
                rotation: *rotation,
            },
            Symbol::Outer(o) => SymbolDoc::Outer {
                modulus: "abs_pow".into(),
                beta: o.beta,
                scale: o.scale,
                grid: o.grid,
            },
        }
    }
}

impl MeasureDoc {
    pub fn build(&self) -> Result<Measure> {
        match self {
            MeasureDoc::Atomic { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::schema("atoms", "at least one atom is required"));
                }
                let mut out = Vec::with_capacity(atoms.len());
                for (k, a) in atoms.iter().enumerate() {
                    let z = disk_point(&format!("atoms[{k}]"), a.re, a.im)?;
                    let w = positive(&format!("atoms[{k}].w"), a.w)?;
                    out.push(Atom { z, w });
                }
                Ok(Measure::Atomic(AtomicMeasure::new(out).map_err(|e| relabel("atoms", e))?))
            }
            MeasureDoc::Radial { rings } => {
                if rings.is_empty() {
                    return Err(Error::schema("rings", "at least one ring is required"));
                }
                let mut out = Vec::with_capacity(rings.len());
                for (k, ring) in rings.iter().enumerate() {
                    let r = finite(&format!("rings[{k}].r"), ring.r)?;
                    if !(0.0..1.0).contains(&r) {
                        return Err(Error::schema(format!("rings[{k}].r"), format!("radius {r} must lie in [0, 1)")));
                    }
                    let w = positive(&format!("rings[{k}].w"), ring.w)?;
                    out.push(Ring { r, w });
                }
                Ok(Measure::Radial(RadialMeasure::new(out).map_err(|e| relabel("rings", e))?))
            }
            MeasureDoc::Area => Ok(Measure::Area(AreaMeasure)),
            MeasureDoc::Pullback { symbol, samples } => {
                let s = symbol.build("symbol")?;
                if *samples == 0 {
                    return Err(Error::schema("samples", "sample count must be positive"));
                }
                Ok(Measure::Pullback(pullback_from_symbol(&s, *samples).map_err(|e| relabel("samples", e))?))
            }
        }
    }

    /// Document form of a measure; pullbacks without a symbol become atomic.
    pub fn from_measure(mu: &Measure) -> MeasureDoc {
        match mu {
            Measure::Atomic(a) => MeasureDoc::Atomic {
                atoms: a.atoms().iter().map(|a| AtomDoc { re: a.z.re(), im: a.z.im(), w: a.w }).collect(),
            },
            Measure::Radial(r) => MeasureDoc::Radial {
                rings: r.rings().iter().map(|g| RingDoc { r: g.r, w: g.w }).collect(),
            },
            Measure::Area(_) => MeasureDoc::Area,
            Measure::Pullback(pb) => match pb.symbol() {
                Some(s) => MeasureDoc::Pullback {
                    symbol: SymbolDoc::from_symbol(s),
                    samples: pb.sample_count(),
                },
                None => MeasureDoc::Atomic {
                    atoms: pb
                        .samples()
                        .iter()
                        .map(|z| AtomDoc { re: z.re(), im: z.im(), w: pb.sample_mass() })
                        .collect(),
                },
            },
        }
    }
}

pub fn parse_measure(text: &str) -> Result<Measure> {
    MeasureDoc::from_value(parse_value(text)?)?.build()
}

pub fn parse_symbol(text: &str) -> Result<Symbol> {
    SymbolDoc::from_value(parse_value(text)?, "")?.build("")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_documents() {
        let m = parse_measure(r#"{"type":"atomic","atoms":[{"re":0.5,"im":0.0,"w":1.0}]}"#).unwrap();
        assert_eq!(m.total_mass(), 1.0);
        let m = parse_measure(r#"{"type":"radial","rings":[{"r":0.75,"w":0.5}]}"#).unwrap();
        assert_eq!(m.total_mass(), 0.5);
        assert!(matches!(parse_measure(r#"{"type":"area"}"#).unwrap(), Measure::Area(_)));
    }

    #[test]
    fn errors_carry_paths() {
        let e = parse_measure(r#"{"type":"atomic","atoms":[{"re":0.5,"im":0.0,"w":1.0},{"re":0.1,"im":0.0,"w":-2}]}"#)
            .unwrap_err();
        assert!(matches!(&e, Error::Schema { path, .. } if path == "atoms[1].w"), "{e}");
        let e = parse_measure(r#"{"type":"atomic","atoms":[{"re":1.5,"im":0.0,"w":1.0}]}"#).unwrap_err();
        assert!(matches!(&e, Error::Schema { path, .. } if path == "atoms[0]"), "{e}");
        let e = parse_measure(r#"{"type":"atomic","atoms":[{"re":"x","im":0.0,"w":1.0}]}"#).unwrap_err();
        assert!(matches!(&e, Error::Schema { path, .. } if path == "atoms[0].re"), "{e}");
        let e = parse_measure(r#"{"type":"pullback","symbol":{"kind":"outer","modulus":"abs_pow","beta":1,"scale":1,"grid":"x"},"samples":8}"#)
            .unwrap_err();
        assert!(matches!(&e, Error::Schema { path, .. } if path == "symbol.grid"), "{e}");
        let e = parse_measure(r#"{"type":"blob"}"#).unwrap_err();
        assert!(matches!(e, Error::Schema { .. }));
        let e = parse_symbol(r#"{"kind":"polynomial","coeffs":[{"re":0.6,"im":0},{"re":0.6,"im":0}]}"#).unwrap_err();
        assert!(matches!(&e, Error::Schema { path, .. } if path == "coeffs"), "{e}");
    }

    #[test]
    fn round_trip() {
        let text = r#"{"type":"pullback","symbol":{"kind":"polynomial","coeffs":[{"re":0.3,"im":0.0},{"re":0.5,"im":0.0}]},"samples":1024}"#;
        let m = parse_measure(text).unwrap();
        let doc = MeasureDoc::from_measure(&m);
        let again = serde_json::to_string(&doc).unwrap();
        assert_eq!(MeasureDoc::from_value(parse_value(&again).unwrap()).unwrap(), doc);
    }

    #[test]
    fn dyadic_radii_parse_exactly() {
        // 17 significant digits, as the report encoder writes them.
        for n in 1..=52 {
            let r = 1.0 - (-(n as f64)).exp2();
            let text = format!(r#"{{"type":"radial","rings":[{{"r":{r:.16e},"w":1.0}}]}}"#);
            match parse_measure(&text).unwrap() {
                Measure::Radial(m) => assert_eq!(m.rings()[0].r, r, "n = {n}"),
                other => panic!("{other:?}"),
            }
        }
    }
}
