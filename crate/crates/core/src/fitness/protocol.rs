//! Messages of the external evaluator protocol: one JSON object per line,
//! requests on the evaluator's stdin and responses on its stdout.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Request {
    Hello {
        protocol: u32,
        config: Value,
    },
    Evaluate {
        iter: u64,
        candidate: String,
        dataset: String,
    },
    Commit {
        iter: u64,
        candidate: String,
    },
    Shutdown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Response {
    Ready,
    Fitness {
        candidate: String,
        fitness: f64,
        #[serde(default)]
        aux: Value,
    },
    Committed {
        candidate: String,
    },
    Error {
        #[serde(default)]
        candidate: Option<String>,
        message: String,
    },
}

impl Request {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("requests always serialize")
    }
}

impl Response {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("responses always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn wire_format() {
        let r = Request::Evaluate {
            iter: 3,
            candidate: "17".into(),
            dataset: "/tmp/d".into(),
        };
        assert_eq!(
            serde_json::to_value(&r).unwrap(),
            json!({"type": "evaluate", "iter": 3, "candidate": "17", "dataset": "/tmp/d"})
        );
        assert_eq!(Request::Shutdown.to_line(), r#"{"type":"shutdown"}"#);
        let f: Response = serde_json::from_str(
            r#"{"type":"fitness","candidate":"4","fitness":2.5,"aux":{"val_mae":0.4}}"#,
        )
        .unwrap();
        assert_eq!(
            f,
            Response::Fitness {
                candidate: "4".into(),
                fitness: 2.5,
                aux: json!({"val_mae": 0.4})
            }
        );
        let e: Response = serde_json::from_str(r#"{"type":"error","message":"boom"}"#).unwrap();
        assert_eq!(
            e,
            Response::Error {
                candidate: None,
                message: "boom".into()
            }
        );
    }
}
