//! JSON form of kernels.
//!
//! ```json
//! { "dom": [{"name": "Coin", "labels": ["H", "T"]}],
//!   "cod": [{"name": "Bit", "labels": ["0", "1"]}],
//!   "rows": {"H": {"0": 0.9, "1": 0.1}, "T": {"0": 0.2, "1": 0.8}},
//!   "fail": {"H": 0.0, "T": 0.0} }
//! ```
//!
//! Zero weights are left out of `rows`. Tuple labels are written `(H,0)`,
//! the unit's single label `()`.

use std::collections::HashMap;

use pmc_core::{Atom, FinObject, SubKernel};
use serde_json::{json, Map, Value};

pub fn object_to_json(obj: &FinObject) -> Value {
    Value::Array(
        obj.factors()
            .iter()
            .map(|a| json!({"name": a.name(), "labels": a.labels()}))
            .collect(),
    )
}

pub fn kernel_to_json(k: &SubKernel) -> Value {
    let mut rows = Map::new();
    let mut fail = Map::new();
    for x in 0..k.rows() {
        let key = k.dom().render_label(x);
        let mut row = Map::new();
        for y in 0..k.cols() {
            let w = k.get(x, y);
            if w != 0.0 {
                row.insert(k.cod().render_label(y), json!(w));
            }
        }
        rows.insert(key.clone(), Value::Object(row));
        fail.insert(key, json!(k.fail(x)));
    }
    json!({
        "dom": object_to_json(k.dom()),
        "cod": object_to_json(k.cod()),
        "rows": rows,
        "fail": fail,
    })
}

fn object_from_json(v: &Value) -> Result<FinObject, String> {
    let factors = v.as_array().ok_or("object must be an array of atoms")?;
    let atoms = factors
        .iter()
        .map(|f| {
            let name = f["name"].as_str().ok_or("atom without a name")?;
            let labels = f["labels"]
                .as_array()
                .ok_or("atom without labels")?
                .iter()
                .map(|l| {
                    l.as_str()
                        .map(str::to_string)
                        .ok_or("labels must be strings")
                })
                .collect::<Result<Vec<_>, _>>()?;
            Atom::new(name, labels).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(FinObject::from_factors(atoms))
}

fn index(obj: &FinObject) -> HashMap<String, usize> {
    (0..obj.size()).map(|i| (obj.render_label(i), i)).collect()
}

/// Reads a kernel back; `fail` is recomputed, not trusted.
pub fn kernel_from_json(v: &Value) -> Result<SubKernel, String> {
    let dom = object_from_json(&v["dom"])?;
    let cod = object_from_json(&v["cod"])?;
    let (din, cin) = (index(&dom), index(&cod));
    let mut w = vec![0.0; dom.size() * cod.size()];
    let rows = v["rows"].as_object().ok_or("`rows` must be an object")?;
    for (x, row) in rows {
        let xi = *din.get(x).ok_or_else(|| format!("unknown input `{x}`"))?;
        for (y, weight) in row.as_object().ok_or("each row must be an object")? {
            let yi = *cin.get(y).ok_or_else(|| format!("unknown output `{y}`"))?;
            w[xi * cod.size() + yi] = weight.as_f64().ok_or("weights must be numbers")?;
        }
    }
    SubKernel::new(dom, cod, w).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let coin = FinObject::atom("Coin", vec!["H", "T"]).unwrap();
        let bit = FinObject::atom("Bit", vec!["0", "1"]).unwrap();
        let k = SubKernel::new(
            coin.tensor(&bit),
            bit,
            vec![0.1, 0.2, 0.0, 1.0, 0.3, 0.0, 0.5, 0.5],
        )
        .unwrap();
        let v = kernel_to_json(&k);
        assert_eq!(v["rows"]["(H,1)"], json!({"1": 1.0}));
        assert!((v["fail"]["(T,0)"].as_f64().unwrap() - 0.7).abs() < 1e-15);
        let text = serde_json::to_string(&v).unwrap();
        let back = kernel_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn unit_objects() {
        let coin = FinObject::atom("Coin", vec!["H", "T"]).unwrap();
        let s = SubKernel::state(coin, vec![0.25, 0.75]).unwrap();
        let v = kernel_to_json(&s);
        assert_eq!(v["dom"], json!([]));
        assert_eq!(v["rows"]["()"]["T"], json!(0.75));
        assert_eq!(kernel_from_json(&v).unwrap(), s);
    }

    #[test]
    fn malformed_input() {
        let v =
            json!({"dom": [], "cod": [{"name": "B", "labels": ["0"]}], "rows": {"()": {"1": 0.5}}});
        assert!(kernel_from_json(&v).unwrap_err().contains("unknown output"));
        let v =
            json!({"dom": [], "cod": [{"name": "B", "labels": ["0"]}], "rows": {"()": {"0": 1.5}}});
        assert!(kernel_from_json(&v).is_err());
    }
}
