//! Implicit functions encoded as directed acyclic computation graphs.
//!
//! A graph has three input nodes (`x`, `y`, `z`), any number of internal
//! nodes and a single output node. Every non-input node computes
//!
//! ```text
//! value = activation(reduction({ w_e * value(src_e) })) + bias
//! ```
//!
//! and the output value is the implicit function `F(x, y, z)`; `F < 0` is the
//! interior of the solid.

mod compose;
mod json;
mod primitive;
mod transform;

pub use compose::{compose, CsgOp};
pub use json::{from_json, from_value, to_json, to_value};
pub use primitive::{Primitive, PrimitiveKind};
pub use transform::{transform, AffineTransform};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Vec3;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid parameter `{name}`: {value} (must be positive and finite)")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("parse error at `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("invalid graph: {0}")]
    Structure(String),
}

impl GraphError {
    fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        GraphError::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    Sum,
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Activation {
    #[serde(rename = "id")]
    Identity,
    #[serde(rename = "sq")]
    Square,
    #[serde(rename = "abs")]
    Abs,
}

impl Activation {
    #[inline]
    pub fn apply<S: Scalar>(self, v: S) -> S {
        match self {
            Activation::Identity => v,
            Activation::Square => v * v,
            Activation::Abs => v.abs(),
        }
    }
}

/// A computing node. Input nodes are stored with zero bias, `sum`
/// reduction, identity activation and no incoming edges, and are never
/// evaluated through those fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Node<S> {
    pub bias: S,
    pub reduction: Reduction,
    pub activation: Activation,
    /// Incoming `(source index, weight)` pairs; sources always precede the node.
    pub inputs: Vec<(u32, S)>,
}

impl<S: Scalar> Node<S> {
    fn input() -> Self {
        Node {
            bias: S::zero(),
            reduction: Reduction::Sum,
            activation: Activation::Identity,
            inputs: Vec::new(),
        }
    }
}

/// Number of input nodes in every graph.
pub const INPUT_COUNT: usize = 3;

/// Immutable implicit-function graph.
///
/// Nodes are kept in topological order: indices `0..3` are the `x`, `y`, `z`
/// inputs and the last node is the output.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeGraph<S> {
    nodes: Vec<Node<S>>,
}

impl<S: Scalar> ShapeGraph<S> {
    /// Builds a graph from arbitrary node ids.
    ///
    /// Nodes are topologically sorted and nodes that are not on a path from
    /// an input to the output are pruned. Input nodes are always kept.
    pub fn from_parts(
        nodes: &[NodeSpec<S>],
        edges: &[EdgeSpec<S>],
        input_ids: [i64; 3],
        output_id: i64,
    ) -> Result<Self, GraphError> {
        let index_of = |id: i64, field: &str| -> Result<usize, GraphError> {
            nodes
                .iter()
                .position(|n| n.id == id)
                .ok_or_else(|| GraphError::parse(field, format!("unknown node id {id}")))
        };
        for (i, n) in nodes.iter().enumerate() {
            if nodes[..i].iter().any(|m| m.id == n.id) {
                return Err(GraphError::parse(
                    format!("nodes[{i}].id"),
                    format!("duplicate node id {}", n.id),
                ));
            }
            if !n.bias.is_finite() {
                return Err(GraphError::parse(
                    format!("nodes[{i}].bias"),
                    "bias must be finite",
                ));
            }
        }
        let mut inputs = [0usize; 3];
        for (k, id) in input_ids.iter().enumerate() {
            inputs[k] = index_of(*id, &format!("inputs[{k}]"))?;
            if inputs[..k].contains(&inputs[k]) {
                return Err(GraphError::parse(
                    format!("inputs[{k}]"),
                    "input ids must be distinct",
                ));
            }
        }
        let output = index_of(output_id, "output")?;
        if inputs.contains(&output) {
            return Err(GraphError::parse(
                "output",
                "output must not be an input node",
            ));
        }

        let n = nodes.len();
        let mut incoming: Vec<Vec<(usize, S)>> = vec![Vec::new(); n];
        let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            let s = index_of(e.src, &format!("edges[{i}].src"))?;
            let d = index_of(e.dst, &format!("edges[{i}].dst"))?;
            if !e.weight.is_finite() {
                return Err(GraphError::parse(
                    format!("edges[{i}].w"),
                    "weight must be finite",
                ));
            }
            if inputs.contains(&d) {
                return Err(GraphError::parse(
                    format!("edges[{i}].dst"),
                    "edges may not enter an input node",
                ));
            }
            incoming[d].push((s, e.weight));
            outgoing[s].push(d);
        }

        // Kahn's algorithm taking the lowest listed ready node first, so an
        // already sorted node list keeps its order.
        let mut indegree: Vec<usize> = incoming.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n)
            .filter(|i| indegree[*i] == 0 && !inputs.contains(i))
            .collect();
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut pending_inputs = inputs.iter().copied();
        while let Some(u) = pending_inputs.next().or_else(|| ready.pop_first()) {
            order.push(u);
            for &v in &outgoing[u] {
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    ready.insert(v);
                }
            }
        }
        if order.len() != n {
            return Err(GraphError::Structure("graph contains a cycle".into()));
        }

        let mut from_input = vec![false; n];
        for &u in &order {
            from_input[u] = inputs.contains(&u) || incoming[u].iter().any(|(s, _)| from_input[*s]);
        }
        let mut to_output = vec![false; n];
        to_output[output] = true;
        for &u in order.iter().rev() {
            if outgoing[u].iter().any(|v| to_output[*v]) {
                to_output[u] = true;
            }
        }
        if !from_input[output] {
            return Err(GraphError::Structure(
                "output is not reachable from the inputs".into(),
            ));
        }

        let mut new_index = vec![u32::MAX; n];
        let mut kept: Vec<usize> = inputs.to_vec();
        kept.extend(
            order
                .iter()
                .copied()
                .filter(|u| !inputs.contains(u) && *u != output && from_input[*u] && to_output[*u]),
        );
        kept.push(output);
        for (new, &old) in kept.iter().enumerate() {
            new_index[old] = new as u32;
        }

        let mut out = Vec::with_capacity(kept.len());
        for (new, &old) in kept.iter().enumerate() {
            if new < INPUT_COUNT {
                out.push(Node::input());
                continue;
            }
            let spec = &nodes[old];
            let node_inputs = incoming[old]
                .iter()
                .filter(|(s, _)| new_index[*s] != u32::MAX)
                .map(|(s, w)| (new_index[*s], *w))
                .collect();
            out.push(Node {
                bias: spec.bias,
                reduction: spec.reduction,
                activation: spec.activation,
                inputs: node_inputs,
            });
        }
        Ok(ShapeGraph { nodes: out })
    }

    /// Wraps nodes that are already in canonical order without pruning.
    pub(crate) fn from_canonical(nodes: Vec<Node<S>>) -> Self {
        debug_assert!(nodes.len() > INPUT_COUNT);
        debug_assert!(nodes.iter().enumerate().all(|(i, n)| {
            (i < INPUT_COUNT) == n.inputs.is_empty()
                && n.inputs.iter().all(|(s, _)| (*s as usize) < i)
        }));
        ShapeGraph { nodes }
    }

    pub fn nodes(&self) -> &[Node<S>] {
        &self.nodes
    }

    /// Number of nodes, counting the three inputs and the output.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.inputs.len()).sum()
    }

    pub fn output_index(&self) -> usize {
        self.nodes.len() - 1
    }

    /// All edges as `(src, dst, weight)` in node order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .flat_map(|(d, n)| n.inputs.iter().map(move |(s, w)| (*s as usize, d, *w)))
    }

    /// Evaluates `F` at a single point.
    pub fn evaluate(&self, p: Vec3<S>) -> S {
        let mut values = Vec::with_capacity(self.nodes.len());
        values.extend_from_slice(&p.0);
        for node in &self.nodes[INPUT_COUNT..] {
            let mut it = node.inputs.iter().map(|(s, w)| *w * values[*s as usize]);
            let first = it.next().expect("computing node has an input");
            let reduced = match node.reduction {
                Reduction::Sum => it.fold(first, |a, b| a + b),
                Reduction::Max => it.fold(first, |a, b| a.max(b)),
                Reduction::Min => it.fold(first, |a, b| a.min(b)),
            };
            values.push(node.activation.apply(reduced) + node.bias);
        }
        values[self.output_index()]
    }

    /// Evaluates `F` at every point; elementwise identical to [`Self::evaluate`].
    pub fn evaluate_batch(&self, points: &[Vec3<S>]) -> Vec<S> {
        let mut out = vec![S::zero(); points.len()];
        self.evaluate_batch_into(points, &mut out);
        out
    }

    /// Node-major evaluation of a block of points into `out`.
    pub fn evaluate_batch_into(&self, points: &[Vec3<S>], out: &mut [S]) {
        assert_eq!(points.len(), out.len());
        let mut scratch = Vec::new();
        for (pts, dst) in points.chunks(BATCH_CHUNK).zip(out.chunks_mut(BATCH_CHUNK)) {
            self.evaluate_chunk(pts, dst, &mut scratch);
        }
    }

    fn evaluate_chunk(&self, points: &[Vec3<S>], out: &mut [S], scratch: &mut Vec<S>) {
        let w = points.len();
        scratch.clear();
        scratch.resize(self.nodes.len() * w, S::zero());
        for (k, p) in points.iter().enumerate() {
            scratch[k] = p.0[0];
            scratch[w + k] = p.0[1];
            scratch[2 * w + k] = p.0[2];
        }
        for (i, node) in self.nodes.iter().enumerate().skip(INPUT_COUNT) {
            let (done, rest) = scratch.split_at_mut(i * w);
            let dst = &mut rest[..w];
            let (first_src, first_w) = node.inputs[0];
            let src = &done[first_src as usize * w..][..w];
            for (d, s) in dst.iter_mut().zip(src) {
                *d = first_w * *s;
            }
            for &(s_idx, weight) in &node.inputs[1..] {
                let src = &done[s_idx as usize * w..][..w];
                match node.reduction {
                    Reduction::Sum => dst
                        .iter_mut()
                        .zip(src)
                        .for_each(|(d, s)| *d = *d + weight * *s),
                    Reduction::Max => dst
                        .iter_mut()
                        .zip(src)
                        .for_each(|(d, s)| *d = d.max(weight * *s)),
                    Reduction::Min => dst
                        .iter_mut()
                        .zip(src)
                        .for_each(|(d, s)| *d = d.min(weight * *s)),
                }
            }
            let bias = node.bias;
            match node.activation {
                Activation::Identity => dst.iter_mut().for_each(|d| *d = *d + bias),
                Activation::Square => dst.iter_mut().for_each(|d| *d = *d * *d + bias),
                Activation::Abs => dst.iter_mut().for_each(|d| *d = d.abs() + bias),
            }
        }
        let o = self.output_index() * w;
        out.copy_from_slice(&scratch[o..o + w]);
    }

    pub fn cast<T: Scalar>(&self) -> ShapeGraph<T> {
        ShapeGraph {
            nodes: self
                .nodes
                .iter()
                .map(|n| Node {
                    bias: T::lit(n.bias.as_f64()),
                    reduction: n.reduction,
                    activation: n.activation,
                    inputs: n
                        .inputs
                        .iter()
                        .map(|(s, w)| (*s, T::lit(w.as_f64())))
                        .collect(),
                })
                .collect(),
        }
    }
}

const BATCH_CHUNK: usize = 256;

impl<S: Scalar> fmt::Display for ShapeGraph<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ShapeGraph({} nodes, {} edges)",
            self.node_count(),
            self.edge_count()
        )
    }
}

/// Node description with an external id, as found in the JSON genotype.
#[derive(Clone, Debug)]
pub struct NodeSpec<S> {
    pub id: i64,
    pub bias: S,
    pub reduction: Reduction,
    pub activation: Activation,
}

#[derive(Clone, Debug)]
pub struct EdgeSpec<S> {
    pub src: i64,
    pub dst: i64,
    pub weight: S,
}

/// Appends nodes in topological order; used by the canonical constructions.
pub(crate) struct GraphBuilder<S> {
    nodes: Vec<Node<S>>,
}

impl<S: Scalar> GraphBuilder<S> {
    pub(crate) fn new() -> Self {
        GraphBuilder {
            nodes: (0..INPUT_COUNT).map(|_| Node::input()).collect(),
        }
    }

    pub(crate) fn add(
        &mut self,
        reduction: Reduction,
        activation: Activation,
        bias: S,
        inputs: Vec<(u32, S)>,
    ) -> u32 {
        self.nodes.push(Node {
            bias,
            reduction,
            activation,
            inputs,
        });
        (self.nodes.len() - 1) as u32
    }

    pub(crate) fn finish(self) -> ShapeGraph<S> {
        ShapeGraph::from_canonical(self.nodes)
    }
}
