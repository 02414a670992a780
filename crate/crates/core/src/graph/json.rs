//! On-disk genotype format:
//!
//! ```json
//! {"inputs":[0,1,2],"output":7,
//!  "nodes":[{"id":3,"bias":0.0,"reduction":"sum","activation":"sq"}, ...],
//!  "edges":[{"src":0,"dst":3,"w":1.0}, ...]}
//! ```

use serde::Serialize;
use serde_json::Value;

use super::{Activation, EdgeSpec, GraphError, NodeSpec, Reduction, ShapeGraph};
use crate::scalar::Scalar;

#[derive(Serialize)]
struct NodeOut {
    id: usize,
    bias: f64,
    reduction: Reduction,
    activation: Activation,
}

#[derive(Serialize)]
struct EdgeOut {
    src: usize,
    dst: usize,
    w: f64,
}

#[derive(Serialize)]
struct GraphOut {
    inputs: [usize; 3],
    output: usize,
    nodes: Vec<NodeOut>,
    edges: Vec<EdgeOut>,
}

/// Serializes `graph` with node ids equal to canonical node indices.
pub fn to_json<S: Scalar>(graph: &ShapeGraph<S>) -> String {
    serde_json::to_string(&to_value(graph)).expect("graph serializes")
}

pub fn to_value<S: Scalar>(graph: &ShapeGraph<S>) -> Value {
    let out = GraphOut {
        inputs: [0, 1, 2],
        output: graph.output_index(),
        nodes: graph
            .nodes()
            .iter()
            .enumerate()
            .map(|(id, n)| NodeOut {
                id,
                bias: n.bias.as_f64(),
                reduction: n.reduction,
                activation: n.activation,
            })
            .collect(),
        edges: graph
            .edges()
            .map(|(src, dst, w)| EdgeOut {
                src,
                dst,
                w: w.as_f64(),
            })
            .collect(),
    };
    serde_json::to_value(out).expect("graph serializes")
}

/// Parses the genotype format. Errors name the offending field.
pub fn from_json<S: Scalar>(text: &str) -> Result<ShapeGraph<S>, GraphError> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| GraphError::parse("<document>", e.to_string()))?;
    from_value(&root)
}

pub fn from_value<S: Scalar>(root: &Value) -> Result<ShapeGraph<S>, GraphError> {
    let obj = root
        .as_object()
        .ok_or_else(|| GraphError::parse("<document>", "expected a JSON object"))?;
    let field = |name: &str| {
        obj.get(name)
            .ok_or_else(|| GraphError::parse(name, "missing field"))
    };

    let inputs_v = field("inputs")?
        .as_array()
        .ok_or_else(|| GraphError::parse("inputs", "expected an array"))?;
    if inputs_v.len() != 3 {
        return Err(GraphError::parse(
            "inputs",
            format!("expected 3 ids, found {}", inputs_v.len()),
        ));
    }
    let mut inputs = [0i64; 3];
    for (k, v) in inputs_v.iter().enumerate() {
        inputs[k] = as_id(v, &format!("inputs[{k}]"))?;
    }
    let output = as_id(field("output")?, "output")?;

    let nodes_v = field("nodes")?
        .as_array()
        .ok_or_else(|| GraphError::parse("nodes", "expected an array"))?;
    let mut nodes = Vec::with_capacity(nodes_v.len());
    for (i, n) in nodes_v.iter().enumerate() {
        let path = |f: &str| format!("nodes[{i}].{f}");
        let get = |f: &str| {
            n.get(f)
                .ok_or_else(|| GraphError::parse(path(f), "missing field"))
        };
        let id = as_id(get("id")?, &path("id"))?;
        let bias = n
            .get("bias")
            .map(|v| as_real::<S>(v, &path("bias")))
            .transpose()?
            .unwrap_or_else(S::zero);
        let reduction = match n.get("reduction") {
            None => Reduction::Sum,
            Some(v) => serde_json::from_value(v.clone()).map_err(|_| {
                GraphError::parse(
                    path("reduction"),
                    format!("expected sum|max|min, found {v}"),
                )
            })?,
        };
        let activation = match n.get("activation") {
            None => Activation::Identity,
            Some(v) => serde_json::from_value(v.clone()).map_err(|_| {
                GraphError::parse(path("activation"), format!("expected id|sq|abs, found {v}"))
            })?,
        };
        nodes.push(NodeSpec {
            id,
            bias,
            reduction,
            activation,
        });
    }
    // Input nodes may be omitted from the node list.
    for id in inputs {
        if !nodes.iter().any(|n| n.id == id) {
            nodes.push(NodeSpec {
                id,
                bias: S::zero(),
                reduction: Reduction::Sum,
                activation: Activation::Identity,
            });
        }
    }

    let edges_v = field("edges")?
        .as_array()
        .ok_or_else(|| GraphError::parse("edges", "expected an array"))?;
    let mut edges = Vec::with_capacity(edges_v.len());
    for (i, e) in edges_v.iter().enumerate() {
        let path = |f: &str| format!("edges[{i}].{f}");
        let get = |f: &str| {
            e.get(f)
                .ok_or_else(|| GraphError::parse(path(f), "missing field"))
        };
        edges.push(EdgeSpec {
            src: as_id(get("src")?, &path("src"))?,
            dst: as_id(get("dst")?, &path("dst"))?,
            weight: as_real(get("w")?, &path("w"))?,
        });
    }
    ShapeGraph::from_parts(&nodes, &edges, inputs, output)
}

fn as_id(v: &Value, field: &str) -> Result<i64, GraphError> {
    v.as_i64()
        .ok_or_else(|| GraphError::parse(field, format!("expected an integer id, found {v}")))
}

fn as_real<S: Scalar>(v: &Value, field: &str) -> Result<S, GraphError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .map(S::lit)
        .ok_or_else(|| GraphError::parse(field, format!("expected a finite number, found {v}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Primitive;
    use crate::linalg::Vec3;

    #[test]
    fn round_trip_preserves_values() {
        let g = Primitive::Cone {
            radius: 0.4,
            height: 0.7,
        }
        .graph()
        .unwrap();
        let back: ShapeGraph<f64> = from_json(&to_json(&g)).unwrap();
        assert_eq!(back, g);
        assert_eq!(
            back.evaluate(Vec3::new(0.1, 0.2, 0.3)),
            g.evaluate(Vec3::new(0.1, 0.2, 0.3))
        );
    }

    #[test]
    fn edge_to_missing_node_names_field() {
        let text = r#"{"inputs":[0,1,2],"output":3,
            "nodes":[{"id":3,"bias":0,"reduction":"sum","activation":"id"}],
            "edges":[{"src":0,"dst":3,"w":1},{"src":1,"dst":42,"w":1}]}"#;
        match from_json::<f64>(text) {
            Err(GraphError::Parse { field, .. }) => assert_eq!(field, "edges[1].dst"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_activation_names_field() {
        let text = r#"{"inputs":[0,1,2],"output":3,
            "nodes":[{"id":3,"bias":0,"reduction":"sum","activation":"sine"}],
            "edges":[{"src":0,"dst":3,"w":1}]}"#;
        match from_json::<f64>(text) {
            Err(GraphError::Parse { field, .. }) => assert_eq!(field, "nodes[0].activation"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_field() {
        match from_json::<f64>(r#"{"inputs":[0,1,2],"nodes":[],"edges":[]}"#) {
            Err(GraphError::Parse { field, .. }) => assert_eq!(field, "output"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
