use std::io::Write;

use hypervis::{NonVisibilityWitness, ThreeLayerWitness, VertexSet};
use serde_json::{json, Map, Value};

use crate::files::SCHEMA_VERSION;
use crate::Format;

/// Writes human tables or line-delimited machine records to stdout.
pub struct Out {
    format: Format,
}

impl Out {
    pub fn new(format: Format) -> Self {
        Self { format }
    }

    pub fn machine(&self) -> bool {
        self.format == Format::Machine
    }

    pub fn line(&self, text: impl AsRef<str>) {
        if !self.machine() {
            println!("{}", text.as_ref());
        }
    }

    /// One machine record; `fields` must be a JSON object.
    pub fn record(&self, kind: &str, fields: Value) {
        if !self.machine() {
            return;
        }
        let mut map = Map::new();
        map.insert("schema".into(), json!(SCHEMA_VERSION));
        map.insert("record".into(), json!(kind));
        if let Value::Object(rest) = fields {
            map.extend(rest);
        }
        let mut stdout = std::io::stdout().lock();
        writeln!(stdout, "{}", Value::Object(map)).expect("stdout");
    }
}

pub fn hex(v: VertexSet) -> Value {
    json!(v.to_hex())
}

pub fn hex_list(vs: impl IntoIterator<Item = VertexSet>) -> Value {
    Value::Array(vs.into_iter().map(hex).collect())
}

pub fn witness_json(w: &NonVisibilityWitness) -> Value {
    json!({ "u": w.u.to_hex(), "v": w.v.to_hex(), "obstacles": w.obstacles })
}

pub fn obstruction_json(w: &ThreeLayerWitness) -> Value {
    json!({
        "base": w.subcube.base().to_hex(),
        "free": w.subcube.free().to_hex(),
        "layers": w.layers,
        "class": w.class,
    })
}
