//! Define-by-run reverse-mode differentiation.
//!
//! Every forward pass records its operations on a fresh [`Graph`]. Nodes are
//! appended in evaluation order, so the node list is already a topological
//! order and [`Graph::backward`] is a single reverse sweep. A node used by
//! several consumers receives the sum of their contributions.
//!
//! ```
//! use sentifuse_core::{Graph, Tensor};
//!
//! let mut g = Graph::new();
//! let w = g.param("w", Tensor::vector(vec![1.0, 2.0]).unwrap());
//! let sq = g.mul(w, w).unwrap();
//! let loss = g.sum(sq);
//! let grads = g.backward(loss).unwrap();
//! assert_eq!(grads.get("w").unwrap().data(), &[2.0, 4.0]);
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tensor::{self, Tensor};

/// Handle to a node of one particular [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

/// Operation identifiers, used for diagnostics and for fault injection in
/// gradient-check negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpKind {
    Leaf,
    MatMul,
    Linear,
    Add,
    Sub,
    Mul,
    Scale,
    AddScalar,
    Sigmoid,
    OpenSigmoid,
    Tanh,
    Relu,
    Softmax,
    LnClipped,
    Sum,
    Mean,
    Concat,
    Gather,
    Cosine,
}

impl OpKind {
    pub const ALL: [OpKind; 19] = [
        OpKind::Leaf,
        OpKind::MatMul,
        OpKind::Linear,
        OpKind::Add,
        OpKind::Sub,
        OpKind::Mul,
        OpKind::Scale,
        OpKind::AddScalar,
        OpKind::Sigmoid,
        OpKind::OpenSigmoid,
        OpKind::Tanh,
        OpKind::Relu,
        OpKind::Softmax,
        OpKind::LnClipped,
        OpKind::Sum,
        OpKind::Mean,
        OpKind::Concat,
        OpKind::Gather,
        OpKind::Cosine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Leaf => "leaf",
            OpKind::MatMul => "matmul",
            OpKind::Linear => "linear",
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::Mul => "mul",
            OpKind::Scale => "scale",
            OpKind::AddScalar => "add_scalar",
            OpKind::Sigmoid => "sigmoid",
            OpKind::OpenSigmoid => "open_sigmoid",
            OpKind::Tanh => "tanh",
            OpKind::Relu => "relu",
            OpKind::Softmax => "softmax",
            OpKind::LnClipped => "ln_clipped",
            OpKind::Sum => "sum",
            OpKind::Mean => "mean",
            OpKind::Concat => "concat",
            OpKind::Gather => "gather",
            OpKind::Cosine => "cosine",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OpKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown operation '{s}'")))
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(NodeId, NodeId),
    Linear {
        x: NodeId,
        w: NodeId,
        b: Option<NodeId>,
    },
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    AddScalar(NodeId),
    Sigmoid(NodeId),
    OpenSigmoid(NodeId),
    Tanh(NodeId),
    Relu(NodeId),
    Softmax(NodeId),
    LnClipped(NodeId, f64),
    Sum(NodeId),
    Mean(NodeId),
    Concat(Vec<NodeId>),
    Gather {
        table: NodeId,
        ids: Vec<usize>,
        frozen_row: Option<usize>,
    },
    Cosine(NodeId, NodeId),
}

impl Op {
    fn kind(&self) -> OpKind {
        match self {
            Op::Leaf => OpKind::Leaf,
            Op::MatMul(..) => OpKind::MatMul,
            Op::Linear { .. } => OpKind::Linear,
            Op::Add(..) => OpKind::Add,
            Op::Sub(..) => OpKind::Sub,
            Op::Mul(..) => OpKind::Mul,
            Op::Scale(..) => OpKind::Scale,
            Op::AddScalar(..) => OpKind::AddScalar,
            Op::Sigmoid(..) => OpKind::Sigmoid,
            Op::OpenSigmoid(..) => OpKind::OpenSigmoid,
            Op::Tanh(..) => OpKind::Tanh,
            Op::Relu(..) => OpKind::Relu,
            Op::Softmax(..) => OpKind::Softmax,
            Op::LnClipped(..) => OpKind::LnClipped,
            Op::Sum(..) => OpKind::Sum,
            Op::Mean(..) => OpKind::Mean,
            Op::Concat(..) => OpKind::Concat,
            Op::Gather { .. } => OpKind::Gather,
            Op::Cosine(..) => OpKind::Cosine,
        }
    }
}

struct Node {
    op: Op,
    value: Tensor,
}

/// Gradients of a scalar loss with respect to each named parameter.
#[derive(Clone, Debug, Default)]
pub struct Gradients {
    by_name: BTreeMap<String, Tensor>,
}

impl Gradients {
    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.by_name.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.by_name.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.by_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }

    pub fn insert(&mut self, name: impl Into<String>, grad: Tensor) {
        self.by_name.insert(name.into(), grad);
    }
}

/// Largest `f64` strictly below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
    params: Vec<(String, NodeId)>,
    fault: Option<OpKind>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Makes the backward rule of `kind` deliberately wrong (its input
    /// gradients are scaled by 1.5). Only useful as a negative control for
    /// gradient checking.
    pub fn inject_fault(&mut self, kind: OpKind) {
        self.fault = Some(kind);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    pub fn shape(&self, id: NodeId) -> &[usize] {
        self.nodes[id.0].value.shape()
    }

    /// A leaf that receives no gradient.
    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Leaf, value)
    }

    /// A trainable leaf. Registering the same name twice accumulates both
    /// uses into one gradient.
    pub fn param(&mut self, name: &str, value: Tensor) -> NodeId {
        let id = self.push(Op::Leaf, value);
        self.params.push((name.to_string(), id));
        id
    }

    pub fn param_names(&self) -> impl Iterator<Item = &str> {
        self.params.iter().map(|(n, _)| n.as_str())
    }

    fn push(&mut self, op: Op, value: Tensor) -> NodeId {
        self.nodes.push(Node { op, value });
        NodeId(self.nodes.len() - 1)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.value(a).matmul(self.value(b))?;
        Ok(self.push(Op::MatMul(a, b), v))
    }

    /// `x · Wᵀ (+ b)`. `x` is `[in]` or `[batch × in]`, `W` is `[out × in]`,
    /// `b` is `[out]`.
    pub fn linear(&mut self, x: NodeId, w: NodeId, b: Option<NodeId>) -> Result<NodeId> {
        let (xv, wv) = (self.value(x), self.value(w));
        if wv.rank() != 2 || xv.rank() > 2 || *xv.shape().last().unwrap() != wv.shape()[1] {
            return Err(Error::dim("linear", xv.shape(), wv.shape()));
        }
        let (rows, cols) = xv.as_matrix_dims();
        let out = wv.shape()[0];
        let x2 = xv.reshape(&[rows, cols])?;
        let mut y = x2.matmul_t(wv)?.into_vec();
        if let Some(b) = b {
            let bv = self.value(b);
            if bv.shape() != [out] {
                return Err(Error::dim("linear bias", bv.shape(), &[out]));
            }
            for r in 0..rows {
                for (d, &bb) in y[r * out..(r + 1) * out].iter_mut().zip(bv.data()) {
                    *d += bb;
                }
            }
        }
        let shape = if xv.rank() == 1 {
            vec![out]
        } else {
            vec![rows, out]
        };
        Ok(self.push(Op::Linear { x, w, b }, Tensor::from_parts(shape, y)))
    }

    /// Elementwise sum. `b` may also be a row vector broadcast over the rows
    /// of `a`.
    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.broadcast_zip(a, b, "add", |x, y| x + y)?;
        Ok(self.push(Op::Add(a, b), v))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.broadcast_zip(a, b, "sub", |x, y| x - y)?;
        Ok(self.push(Op::Sub(a, b), v))
    }

    /// Hadamard product, with the same row broadcast rule as [`Graph::add`].
    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = self.broadcast_zip(a, b, "elementwise_mul", |x, y| x * y)?;
        Ok(self.push(Op::Mul(a, b), v))
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let v = self.value(a).scale(c);
        self.push(Op::Scale(a, c), v)
    }

    pub fn add_scalar(&mut self, a: NodeId, c: f64) -> NodeId {
        let v = self.value(a).map(|x| x + c);
        self.push(Op::AddScalar(a), v)
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(sigmoid);
        self.push(Op::Sigmoid(a), v)
    }

    /// Sigmoid whose result is kept strictly inside `(0, 1)` even where the
    /// plain logistic function rounds to 0 or 1.
    pub fn open_sigmoid(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(open_sigmoid);
        self.push(Op::OpenSigmoid(a), v)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(f64::tanh);
        self.push(Op::Tanh(a), v)
    }

    pub fn relu(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(|x| x.max(0.0));
        self.push(Op::Relu(a), v)
    }

    /// Softmax over the last axis.
    pub fn softmax(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).softmax();
        self.push(Op::Softmax(a), v)
    }

    /// `ln(clip(x, floor, 1))`; zero gradient outside the clip window.
    pub fn ln_clipped(&mut self, a: NodeId, floor: f64) -> NodeId {
        let v = self.value(a).map(|x| x.clamp(floor, 1.0).ln());
        self.push(Op::LnClipped(a, floor), v)
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let v = Tensor::scalar(self.value(a).sum());
        self.push(Op::Sum(a), v)
    }

    pub fn mean(&mut self, a: NodeId) -> NodeId {
        let t = self.value(a);
        let v = Tensor::scalar(t.sum() / t.len() as f64);
        self.push(Op::Mean(a), v)
    }

    /// Concatenates along the last axis. All parts must agree on the number
    /// of rows.
    pub fn concat(&mut self, parts: &[NodeId]) -> Result<NodeId> {
        let Some(&first) = parts.first() else {
            return Err(Error::Contract("concat of zero tensors".into()));
        };
        let rank = self.value(first).rank();
        let (rows, _) = self.value(first).as_matrix_dims();
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let t = self.value(p);
            let (r, c) = t.as_matrix_dims();
            if t.rank() != rank || r != rows || rank > 2 {
                return Err(Error::dim("concat", self.value(first).shape(), t.shape()));
            }
            widths.push(c);
        }
        let total: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(rows * total);
        for r in 0..rows {
            for &p in parts {
                out.extend_from_slice(self.value(p).row(r));
            }
        }
        let shape = if rank == 1 {
            vec![total]
        } else {
            vec![rows, total]
        };
        Ok(self.push(Op::Concat(parts.to_vec()), Tensor::from_parts(shape, out)))
    }

    /// Row lookup into a `[V × d]` table, giving `[ids.len() × d]`. Gradients
    /// scatter-add into the looked-up rows; `frozen_row`, if set, never
    /// receives gradient.
    pub fn gather(
        &mut self,
        table: NodeId,
        ids: &[usize],
        frozen_row: Option<usize>,
    ) -> Result<NodeId> {
        let t = self.value(table);
        if t.rank() != 2 {
            return Err(Error::Contract(format!(
                "gather needs a matrix table, got {:?}",
                t.shape()
            )));
        }
        if ids.is_empty() {
            return Err(Error::Contract("gather with no ids".into()));
        }
        let (v, d) = (t.shape()[0], t.shape()[1]);
        let mut out = Vec::with_capacity(ids.len() * d);
        for &id in ids {
            if id >= v {
                return Err(Error::OutOfRange {
                    what: "embedding table",
                    index: id,
                    size: v,
                });
            }
            out.extend_from_slice(t.row(id));
        }
        let value = Tensor::from_parts(vec![ids.len(), d], out);
        Ok(self.push(
            Op::Gather {
                table,
                ids: ids.to_vec(),
                frozen_row,
            },
            value,
        ))
    }

    /// Row-wise cosine similarity; `[n]` inputs give `[1]`, `[B × n]`
    /// inputs give `[B]`.
    pub fn cosine(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(Error::dim("cosine_similarity", av.shape(), bv.shape()));
        }
        let (rows, _) = av.as_matrix_dims();
        let out = (0..rows)
            .map(|r| tensor::cosine(av.row(r), bv.row(r)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.push(Op::Cosine(a, b), Tensor::from_parts(vec![rows], out)))
    }

    fn broadcast_zip(
        &self,
        a: NodeId,
        b: NodeId,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Tensor> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() == bv.shape() {
            return av.zip_map(bv, op, f);
        }
        let (rows, cols) = av.as_matrix_dims();
        if bv.rank() != 1 || bv.len() != cols {
            return Err(Error::dim(op, av.shape(), bv.shape()));
        }
        let mut out = Vec::with_capacity(av.len());
        for r in 0..rows {
            out.extend(av.row(r).iter().zip(bv.data()).map(|(&x, &y)| f(x, y)));
        }
        Ok(Tensor::from_parts(av.shape().to_vec(), out))
    }

    /// Reverse sweep from a scalar `loss`. Every registered parameter gets a
    /// gradient of its own shape, zero if the loss does not depend on it.
    pub fn backward(&self, loss: NodeId) -> Result<Gradients> {
        let lv = self.value(loss);
        if lv.len() != 1 {
            return Err(Error::Contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                lv.shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Tensor::from_parts(lv.shape().to_vec(), vec![1.0]));

        for idx in (0..=loss.0).rev() {
            let Some(upstream) = grads[idx].take() else {
                continue;
            };
            let node = &self.nodes[idx];
            let mut contributions = self.input_grads(&node.op, &node.value, &upstream)?;
            if self.fault == Some(node.op.kind()) {
                for (_, g) in contributions.iter_mut() {
                    *g = g.scale(1.5);
                }
            }
            for (input, g) in contributions {
                accumulate(&mut grads[input.0], g);
            }
            // leaves keep their gradient for collection below
            if matches!(node.op, Op::Leaf) {
                grads[idx] = Some(upstream);
            }
        }

        let mut out = Gradients::default();
        for (name, id) in &self.params {
            let g = match grads.get(id.0).and_then(Option::as_ref) {
                Some(g) => g.clone(),
                None => Tensor::zeros(self.value(*id).shape())?,
            };
            match out.by_name.get_mut(name) {
                Some(existing) => *existing = existing.add(&g)?,
                None => {
                    out.by_name.insert(name.clone(), g);
                }
            }
        }
        Ok(out)
    }

    fn input_grads(&self, op: &Op, out: &Tensor, dy: &Tensor) -> Result<Vec<(NodeId, Tensor)>> {
        let v = |id: NodeId| self.value(id);
        let grads = match op {
            Op::Leaf => vec![],
            Op::MatMul(a, b) => vec![(*a, dy.matmul_t(v(*b))?), (*b, v(*a).t_matmul(dy)?)],
            Op::Linear { x, w, b } => {
                let xv = v(*x);
                let (rows, cols) = xv.as_matrix_dims();
                let out_dim = v(*w).shape()[0];
                let dy2 = dy.reshape(&[rows, out_dim])?;
                let dx = dy2.matmul(v(*w))?.reshape(xv.shape())?;
                let dw = dy2.t_matmul(&xv.reshape(&[rows, cols])?)?;
                let mut g = vec![(*x, dx), (*w, dw)];
                if let Some(b) = b {
                    g.push((*b, column_sums(&dy2)));
                }
                g
            }
            Op::Add(a, b) => {
                let gb = reduce_broadcast(dy, v(*b));
                vec![(*a, dy.clone()), (*b, gb)]
            }
            Op::Sub(a, b) => {
                let gb = reduce_broadcast(&dy.scale(-1.0), v(*b));
                vec![(*a, dy.clone()), (*b, gb)]
            }
            Op::Mul(a, b) => {
                let (av, bv) = (v(*a), v(*b));
                let ga = broadcast_mul(dy, bv);
                let gb = reduce_broadcast(&dy.hadamard(&broadcast_to(av, dy))?, bv);
                vec![(*a, ga), (*b, gb)]
            }
            Op::Scale(a, c) => vec![(*a, dy.scale(*c))],
            Op::AddScalar(a) => vec![(*a, dy.clone())],
            Op::Sigmoid(a) | Op::OpenSigmoid(a) => {
                vec![(*a, dy.zip_map(out, "sigmoid", |g, s| g * s * (1.0 - s))?)]
            }
            Op::Tanh(a) => vec![(*a, dy.zip_map(out, "tanh", |g, t| g * (1.0 - t * t))?)],
            Op::Relu(a) => vec![(
                *a,
                dy.zip_map(v(*a), "relu", |g, x| if x > 0.0 { g } else { 0.0 })?,
            )],
            Op::Softmax(a) => {
                let (rows, cols) = out.as_matrix_dims();
                let mut dz = Vec::with_capacity(out.len());
                for r in 0..rows {
                    let (s, g) = (out.row(r), dy.row(r));
                    let inner = tensor::dot(s, g);
                    dz.extend(s.iter().zip(g).map(|(&si, &gi)| si * (gi - inner)));
                }
                debug_assert_eq!(dz.len(), rows * cols);
                vec![(*a, Tensor::from_parts(out.shape().to_vec(), dz))]
            }
            Op::LnClipped(a, floor) => {
                let floor = *floor;
                vec![(
                    *a,
                    dy.zip_map(v(*a), "ln_clipped", |g, x| {
                        if x > floor && x <= 1.0 {
                            g / x
                        } else {
                            0.0
                        }
                    })?,
                )]
            }
            Op::Sum(a) => vec![(*a, v(*a).map(|_| dy.data()[0]))],
            Op::Mean(a) => {
                let n = v(*a).len() as f64;
                vec![(*a, v(*a).map(|_| dy.data()[0] / n))]
            }
            Op::Concat(parts) => {
                let (rows, total) = dy.as_matrix_dims();
                let mut offset = 0;
                let mut g = Vec::with_capacity(parts.len());
                for &p in parts {
                    let pv = v(p);
                    let (_, w) = pv.as_matrix_dims();
                    let mut d = Vec::with_capacity(rows * w);
                    for r in 0..rows {
                        d.extend_from_slice(&dy.data()[r * total + offset..r * total + offset + w]);
                    }
                    g.push((p, Tensor::from_parts(pv.shape().to_vec(), d)));
                    offset += w;
                }
                g
            }
            Op::Gather {
                table,
                ids,
                frozen_row,
            } => {
                let tv = v(*table);
                let d = tv.shape()[1];
                let mut acc = vec![0.0; tv.len()];
                for (i, &id) in ids.iter().enumerate() {
                    if Some(id) == *frozen_row {
                        continue;
                    }
                    for (a, &gv) in acc[id * d..(id + 1) * d].iter_mut().zip(dy.row(i)) {
                        *a += gv;
                    }
                }
                vec![(*table, Tensor::from_parts(tv.shape().to_vec(), acc))]
            }
            Op::Cosine(a, b) => {
                let (av, bv) = (v(*a), v(*b));
                let (rows, cols) = av.as_matrix_dims();
                let mut ga = Vec::with_capacity(av.len());
                let mut gb = Vec::with_capacity(bv.len());
                for r in 0..rows {
                    let (u, w) = (av.row(r), bv.row(r));
                    let (nu, nw) = (tensor::dot(u, u).sqrt(), tensor::dot(w, w).sqrt());
                    let c = tensor::dot(u, w) / (nu * nw);
                    let g = dy.data()[r];
                    for j in 0..cols {
                        ga.push(g * (w[j] / (nu * nw) - c * u[j] / (nu * nu)));
                        gb.push(g * (u[j] / (nu * nw) - c * w[j] / (nw * nw)));
                    }
                }
                vec![
                    (*a, Tensor::from_parts(av.shape().to_vec(), ga)),
                    (*b, Tensor::from_parts(bv.shape().to_vec(), gb)),
                ]
            }
        };
        Ok(grads)
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn open_sigmoid(x: f64) -> f64 {
    sigmoid(x).clamp(f64::MIN_POSITIVE, BELOW_ONE)
}

fn accumulate(slot: &mut Option<Tensor>, g: Tensor) {
    match slot {
        None => *slot = Some(g),
        Some(existing) => {
            for (a, b) in existing.data_mut().iter_mut().zip(g.data()) {
                *a += b;
            }
        }
    }
}

fn column_sums(m: &Tensor) -> Tensor {
    let (rows, cols) = m.as_matrix_dims();
    let mut out = vec![0.0; cols];
    for r in 0..rows {
        for (o, &v) in out.iter_mut().zip(m.row(r)) {
            *o += v;
        }
    }
    Tensor::from_parts(vec![cols], out)
}

// Gradient for an operand that may have been row-broadcast.
fn reduce_broadcast(g: &Tensor, operand: &Tensor) -> Tensor {
    if g.shape() == operand.shape() {
        g.clone()
    } else {
        column_sums(g)
    }
}

fn broadcast_to(operand: &Tensor, like: &Tensor) -> Tensor {
    if operand.shape() == like.shape() {
        return operand.clone();
    }
    let (rows, _) = like.as_matrix_dims();
    let mut out = Vec::with_capacity(like.len());
    for _ in 0..rows {
        out.extend_from_slice(operand.data());
    }
    Tensor::from_parts(like.shape().to_vec(), out)
}

fn broadcast_mul(g: &Tensor, operand: &Tensor) -> Tensor {
    let b = broadcast_to(operand, g);
    let data = g.data().iter().zip(b.data()).map(|(x, y)| x * y).collect();
    Tensor::from_parts(g.shape().to_vec(), data)
}
