//! JSON map-description documents.
//!
//! ```json
//! {"map": {"type": "poly", "coeffs": [[0, 0], [1, 0]]}, "alpha": 1.0}
//! ```
//!
//! Complex numbers are `[re, im]` pairs. Node kinds: `poly`, `moebius`,
//! `blaschke`, `series`, `scale`, `compose`, `product`, `affine`, `extremal`
//! and `boundary`. A document may also carry a harmonic function through `h`
//! and `g` (analytic nodes) or the shorthand `"extremal": {"a": [re, im]}`
//! for `phi_a + conj(phi_a)`, and budget overrides under `budget`.

use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::disk::DiskPoint;
use crate::error::{Error, Result};
use crate::function::{AnalyticMap, HarmonicMap};
use crate::norms::Alpha;
use crate::sup::Budget;

#[derive(Debug, Clone, PartialEq)]
pub struct MapSpecDocument {
    pub map: Option<AnalyticMap>,
    pub alpha: Alpha,
    pub budget: Budget,
    /// Whether `budget` was given explicitly.
    pub budget_overridden: bool,
    pub function: Option<HarmonicMap>,
}

fn semantic(path: &str, message: impl Into<String>) -> Error {
    Error::Semantic {
        path: path.to_string(),
        message: message.into(),
    }
}

fn real(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| semantic(path, "expected a finite number"))
}

fn complex(v: &Value, path: &str) -> Result<Complex64> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => Ok(Complex64::new(real(re, &format!("{path}[0]"))?, real(im, &format!("{path}[1]"))?)),
        _ => Err(semantic(path, "expected a complex number [re, im]")),
    }
}

fn disk_point(v: &Value, path: &str) -> Result<DiskPoint> {
    let z = complex(v, path)?;
    DiskPoint::from_complex(z).map_err(|_| semantic(path, format!("{z} is not inside the open unit disk")))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| semantic(path, "expected an array"))
}

fn positive(v: &Value, path: &str) -> Result<f64> {
    let x = real(v, path)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(semantic(path, format!("expected a positive number, got {x}")))
    }
}

/// Fields of one node object, tracking which were consumed.
struct Node<'a> {
    obj: &'a Map<String, Value>,
    path: &'a str,
    allowed: &'static [&'static str],
}

impl<'a> Node<'a> {
    fn new(v: &'a Value, path: &'a str, allowed: &'static [&'static str]) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| semantic(path, "expected an object"))?;
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(semantic(path, format!("unknown field `{key}`")));
            }
        }
        Ok(Self { obj, path, allowed })
    }

    fn child(&self, key: &str) -> String {
        debug_assert!(self.allowed.contains(&key));
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.obj.get(key)
    }

    fn req(&self, key: &str) -> Result<&'a Value> {
        self.get(key)
            .ok_or_else(|| semantic(self.path, format!("missing field `{key}`")))
    }
}

fn complex_list(v: &Value, path: &str) -> Result<Vec<Complex64>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, c)| complex(c, &format!("{path}[{i}]")))
        .collect()
}

fn rotation(node: &Node<'_>) -> Result<Complex64> {
    let Some(v) = node.get("rotation") else {
        return Ok(Complex64::new(1.0, 0.0));
    };
    let path = node.child("rotation");
    let u = complex(v, &path)?;
    if (u.norm() - 1.0).abs() > 1e-12 {
        return Err(semantic(&path, format!("rotation must have modulus 1, got {}", u.norm())));
    }
    Ok(u)
}

/// Parses one analytic-map node.
pub fn parse_map(v: &Value, path: &str, default_alpha: f64) -> Result<AnalyticMap> {
    let kind = v
        .get("type")
        .ok_or_else(|| semantic(path, "missing field `type`"))?
        .as_str()
        .ok_or_else(|| semantic(path, "`type` must be a string"))?;
    let map = match kind {
        "poly" => {
            let n = Node::new(v, path, &["type", "coeffs"])?;
            AnalyticMap::polynomial(complex_list(n.req("coeffs")?, &n.child("coeffs"))?)
        }
        "moebius" => {
            let n = Node::new(v, path, &["type", "a", "rotation"])?;
            let a = disk_point(n.req("a")?, &n.child("a"))?;
            AnalyticMap::rotated_moebius(a, rotation(&n)?)?
        }
        "blaschke" => {
            let n = Node::new(v, path, &["type", "zeros", "rotation"])?;
            let zp = n.child("zeros");
            let zeros = array(n.req("zeros")?, &zp)?
                .iter()
                .enumerate()
                .map(|(i, z)| disk_point(z, &format!("{zp}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            AnalyticMap::blaschke(zeros, rotation(&n)?)?
        }
        "series" => {
            let n = Node::new(v, path, &["type", "coeffs", "degree", "bound"])?;
            let coeffs = complex_list(n.req("coeffs")?, &n.child("coeffs"))?;
            let degree = match n.get("degree") {
                None => coeffs.len().saturating_sub(1),
                Some(d) => d
                    .as_u64()
                    .ok_or_else(|| semantic(&n.child("degree"), "expected a non-negative integer"))?
                    as usize,
            };
            let bound = n.get("bound").map(|b| positive(b, &n.child("bound"))).transpose()?;
            AnalyticMap::power_series(coeffs, degree, bound)
        }
        "scale" => {
            let n = Node::new(v, path, &["type", "factor", "inner"])?;
            let factor = complex(n.req("factor")?, &n.child("factor"))?;
            parse_map(n.req("inner")?, &n.child("inner"), default_alpha)?.scale(factor)
        }
        "compose" => {
            let n = Node::new(v, path, &["type", "outer", "inner"])?;
            AnalyticMap::compose(
                parse_map(n.req("outer")?, &n.child("outer"), default_alpha)?,
                parse_map(n.req("inner")?, &n.child("inner"), default_alpha)?,
            )
        }
        "product" => {
            let n = Node::new(v, path, &["type", "left", "right"])?;
            AnalyticMap::product(
                parse_map(n.req("left")?, &n.child("left"), default_alpha)?,
                parse_map(n.req("right")?, &n.child("right"), default_alpha)?,
            )
        }
        "affine" => {
            let n = Node::new(v, path, &["type", "terms"])?;
            let tp = n.child("terms");
            let terms = array(n.req("terms")?, &tp)?
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let p = format!("{tp}[{i}]");
                    let tn = Node::new(t, &p, &["weight", "map"])?;
                    Ok((
                        complex(tn.req("weight")?, &tn.child("weight"))?,
                        parse_map(tn.req("map")?, &tn.child("map"), default_alpha)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            AnalyticMap::affine(terms)
        }
        "extremal" => {
            let n = Node::new(v, path, &["type", "a", "alpha"])?;
            let a = disk_point(n.req("a")?, &n.child("a"))?;
            let alpha = match n.get("alpha") {
                Some(x) => positive(x, &n.child("alpha"))?,
                None => default_alpha,
            };
            AnalyticMap::extremal(a, alpha)?
        }
        "boundary" => {
            let n = Node::new(v, path, &["type", "zeta", "alpha"])?;
            let zp = n.child("zeta");
            let zeta = complex(n.req("zeta")?, &zp)?;
            if (zeta.norm() - 1.0).abs() > 1e-12 {
                return Err(semantic(&zp, format!("zeta must lie on the unit circle, got |zeta| = {}", zeta.norm())));
            }
            let alpha = match n.get("alpha") {
                Some(x) => positive(x, &n.child("alpha"))?,
                None => default_alpha,
            };
            AnalyticMap::boundary_primitive(zeta, alpha)?
        }
        other => return Err(semantic(path, format!("unknown node type `{other}`"))),
    };
    Ok(map)
}

/// Parses and validates a document.
pub fn parse_spec(text: &str) -> Result<MapSpecDocument> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
    })?;
    let top = Node::new(&root, "", &["map", "alpha", "budget", "h", "g", "extremal"])?;

    let alpha_value = match top.get("alpha") {
        Some(a) => positive(a, "alpha")?,
        None => 1.0,
    };
    let alpha = Alpha::new(alpha_value).map_err(|e| semantic("alpha", e.to_string()))?;

    let map = top.get("map").map(|m| parse_map(m, "map", alpha_value)).transpose()?;

    let (budget, budget_overridden) = match top.get("budget") {
        None => (Budget::default(), false),
        Some(b) => {
            let budget: Budget = serde_json::from_value(b.clone()).map_err(|e| semantic("budget", e.to_string()))?;
            budget.validate().map_err(|e| semantic("budget", e.to_string()))?;
            (budget, true)
        }
    };

    let h = top.get("h").map(|m| parse_map(m, "h", alpha_value)).transpose()?;
    let g = top.get("g").map(|m| parse_map(m, "g", alpha_value)).transpose()?;
    let function = match (top.get("extremal"), h, g) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(semantic("extremal", "cannot be combined with `h` or `g`"));
        }
        (Some(e), None, None) => {
            let n = Node::new(e, "extremal", &["a", "alpha"])?;
            let a = disk_point(n.req("a")?, &n.child("a"))?;
            let a_alpha = match n.get("alpha") {
                Some(x) => positive(x, &n.child("alpha"))?,
                None => alpha_value,
            };
            Some(HarmonicMap::extremal(a, a_alpha)?)
        }
        (None, None, None) => None,
        (None, h, g) => Some(HarmonicMap::new(
            h.unwrap_or_else(AnalyticMap::zero),
            g.unwrap_or_else(AnalyticMap::zero),
        )),
    };

    Ok(MapSpecDocument {
        map,
        alpha,
        budget,
        budget_overridden,
        function,
    })
}
