//! Reverse-mode autodiff over a flat tape of tensor operations.
//!
//! Nodes are appended in execution order, so insertion order is already a
//! topological order; `backward` walks the tape once in reverse. Values are
//! immutable after creation and gradients always share the shape of the
//! forward value they belong to.

use crate::error::{Error, Result};
use crate::tensor::{self, Scalar, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    Matmul(NodeId, NodeId),
    Transpose(NodeId),
    LayerNorm { x: NodeId, gamma: NodeId, beta: NodeId, eps: f64 },
    SoftmaxRows(NodeId),
    Gelu(NodeId),
    Silu(NodeId),
    BroadcastRows { v: NodeId, rows: usize },
    BroadcastCols { v: NodeId, cols: usize },
    SumAll(NodeId),
    MeanAll(NodeId),
    ConcatRows(NodeId, NodeId),
    SliceRows { a: NodeId, start: usize, len: usize },
    ConcatCols(NodeId, NodeId),
    SliceCols { a: NodeId, start: usize, len: usize },
    EmbedRow { table: NodeId, index: usize },
    Reshape(NodeId),
}

impl Op {
    fn inputs(&self) -> Vec<NodeId> {
        match *self {
            Op::Leaf => vec![],
            Op::Add(a, b)
            | Op::Sub(a, b)
            | Op::Mul(a, b)
            | Op::Matmul(a, b)
            | Op::ConcatRows(a, b)
            | Op::ConcatCols(a, b) => vec![a, b],
            Op::LayerNorm { x, gamma, beta, .. } => vec![x, gamma, beta],
            Op::Scale(a, _)
            | Op::Transpose(a)
            | Op::SoftmaxRows(a)
            | Op::Gelu(a)
            | Op::Silu(a)
            | Op::SumAll(a)
            | Op::MeanAll(a)
            | Op::Reshape(a)
            | Op::SliceRows { a, .. }
            | Op::SliceCols { a, .. }
            | Op::BroadcastRows { v: a, .. }
            | Op::BroadcastCols { v: a, .. }
            | Op::EmbedRow { table: a, .. } => vec![a],
        }
    }
}

struct Node<T: Scalar> {
    op: Op,
    value: Tensor<T>,
    requires_grad: bool,
    grad: Option<Tensor<T>>,
}

/// A single-use computation tape. Build the forward pass, call `backward`
/// on a scalar node, then read gradients off the leaves.
pub struct Graph<T: Scalar> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Default for Graph<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Graph<T> {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, value: Tensor<T>, requires_grad: bool) -> NodeId {
        self.nodes.push(Node { op, value, requires_grad, grad: None });
        NodeId(self.nodes.len() - 1)
    }

    fn requires(&self, ids: &[NodeId]) -> bool {
        ids.iter().any(|id| self.nodes[id.0].requires_grad)
    }

    pub fn value(&self, id: NodeId) -> &Tensor<T> {
        &self.nodes[id.0].value
    }

    /// Gradient of the last `backward` target wrt this node, if it was
    /// reached by backpropagation.
    pub fn grad(&self, id: NodeId) -> Option<&Tensor<T>> {
        self.nodes[id.0].grad.as_ref()
    }

    // -- leaves ------------------------------------------------------------

    /// Trainable leaf: gradients are accumulated into it.
    pub fn param(&mut self, value: &Tensor<T>) -> NodeId {
        self.push(Op::Leaf, value.clone(), true)
    }

    /// Constant leaf: no gradient is propagated into it.
    pub fn constant(&mut self, value: Tensor<T>) -> NodeId {
        self.push(Op::Leaf, value, false)
    }

    // -- primitives ---------------------------------------------------------

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = tensor::add(self.value(a), self.value(b))?;
        let rg = self.requires(&[a, b]);
        Ok(self.push(Op::Add(a, b), v, rg))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = tensor::sub(self.value(a), self.value(b))?;
        let rg = self.requires(&[a, b]);
        Ok(self.push(Op::Sub(a, b), v, rg))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = tensor::mul(self.value(a), self.value(b))?;
        let rg = self.requires(&[a, b]);
        Ok(self.push(Op::Mul(a, b), v, rg))
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let v = tensor::scale(self.value(a), T::from_f64(c));
        let rg = self.requires(&[a]);
        self.push(Op::Scale(a, c), v, rg)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let v = tensor::matmul(self.value(a), self.value(b))?;
        let rg = self.requires(&[a, b]);
        Ok(self.push(Op::Matmul(a, b), v, rg))
    }

    pub fn transpose(&mut self, a: NodeId) -> Result<NodeId> {
        let v = tensor::transpose(self.value(a))?;
        let rg = self.requires(&[a]);
        Ok(self.push(Op::Transpose(a), v, rg))
    }

    pub fn layer_norm(&mut self, x: NodeId, gamma: NodeId, beta: NodeId, eps: f64) -> Result<NodeId> {
        if eps <= 0.0 {
            return Err(Error::Domain(format!("layer_norm eps must be > 0, got {eps}")));
        }
        let v = tensor::layer_norm(
            self.value(x),
            self.value(gamma).data(),
            self.value(beta).data(),
            T::from_f64(eps),
        )?;
        let rg = self.requires(&[x, gamma, beta]);
        Ok(self.push(Op::LayerNorm { x, gamma, beta, eps }, v, rg))
    }

    pub fn softmax_rows(&mut self, a: NodeId) -> NodeId {
        let v = tensor::softmax_rows(self.value(a));
        let rg = self.requires(&[a]);
        self.push(Op::SoftmaxRows(a), v, rg)
    }

    pub fn gelu(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(tensor::gelu);
        let rg = self.requires(&[a]);
        self.push(Op::Gelu(a), v, rg)
    }

    pub fn silu(&mut self, a: NodeId) -> NodeId {
        let v = self.value(a).map(tensor::silu);
        let rg = self.requires(&[a]);
        self.push(Op::Silu(a), v, rg)
    }

    /// Repeat a width-d vector as `rows` identical rows.
    pub fn broadcast_rows(&mut self, v: NodeId, rows: usize) -> Result<NodeId> {
        let src = self.value(v);
        if src.rows() != 1 {
            return Err(Error::Shape(format!(
                "broadcast_rows needs a single row, got {:?}",
                src.shape()
            )));
        }
        let d = src.cols();
        let mut data = Vec::with_capacity(rows * d);
        for _ in 0..rows {
            data.extend_from_slice(src.data());
        }
        let rg = self.requires(&[v]);
        Ok(self.push(Op::BroadcastRows { v, rows }, Tensor::from_vec(vec![rows, d], data), rg))
    }

    /// Repeat a length-n vector as `cols` identical columns (per-token
    /// weights expanded over channels).
    pub fn broadcast_cols(&mut self, v: NodeId, cols: usize) -> Result<NodeId> {
        let src = self.value(v);
        if src.cols() != 1 && src.shape().len() != 1 {
            return Err(Error::Shape(format!(
                "broadcast_cols needs a column vector, got {:?}",
                src.shape()
            )));
        }
        let n = src.len();
        let mut data = Vec::with_capacity(n * cols);
        for i in 0..n {
            let x = src.data()[i];
            data.extend(std::iter::repeat(x).take(cols));
        }
        let rg = self.requires(&[v]);
        Ok(self.push(Op::BroadcastCols { v, cols }, Tensor::from_vec(vec![n, cols], data), rg))
    }

    pub fn sum_all(&mut self, a: NodeId) -> NodeId {
        let mut acc = T::ZERO;
        for &v in self.value(a).data() {
            acc += v;
        }
        let rg = self.requires(&[a]);
        self.push(Op::SumAll(a), Tensor::scalar(acc), rg)
    }

    pub fn mean_all(&mut self, a: NodeId) -> NodeId {
        let n = self.value(a).len();
        let mut acc = T::ZERO;
        for &v in self.value(a).data() {
            acc += v;
        }
        let mean = acc * T::from_f64(1.0 / n as f64);
        let rg = self.requires(&[a]);
        self.push(Op::MeanAll(a), Tensor::scalar(mean), rg)
    }

    /// Stack `b` below `a` along the token axis.
    pub fn concat_rows(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.cols() != tb.cols() {
            return Err(Error::Shape(format!(
                "concat_rows width mismatch: {:?} vs {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        let d = ta.cols();
        let mut data = Vec::with_capacity((ta.rows() + tb.rows()) * d);
        data.extend_from_slice(ta.data());
        data.extend_from_slice(tb.data());
        let shape = vec![ta.rows() + tb.rows(), d];
        let rg = self.requires(&[a, b]);
        Ok(self.push(Op::ConcatRows(a, b), Tensor::from_vec(shape, data), rg))
    }

    pub fn slice_rows(&mut self, a: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let t = self.value(a);
        if start + len > t.rows() {
            return Err(Error::Range(format!(
                "slice_rows {}..{} out of {} rows",
                start,
                start + len,
                t.rows()
            )));
        }
        let d = t.cols();
        let data = t.data()[start * d..(start + len) * d].to_vec();
        let rg = self.requires(&[a]);
        Ok(self.push(Op::SliceRows { a, start, len }, Tensor::from_vec(vec![len, d], data), rg))
    }

    /// Stack `b` to the right of `a` along the channel axis.
    pub fn concat_cols(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.rows() != tb.rows() {
            return Err(Error::Shape(format!(
                "concat_cols row mismatch: {:?} vs {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        let (n, da, db) = (ta.rows(), ta.cols(), tb.cols());
        let mut data = Vec::with_capacity(n * (da + db));
        for i in 0..n {
            data.extend_from_slice(ta.row(i));
            data.extend_from_slice(tb.row(i));
        }
        let rg = self.requires(&[a, b]);
        Ok(self.push(Op::ConcatCols(a, b), Tensor::from_vec(vec![n, da + db], data), rg))
    }

    pub fn slice_cols(&mut self, a: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let t = self.value(a);
        if start + len > t.cols() {
            return Err(Error::Range(format!(
                "slice_cols {}..{} out of {} cols",
                start,
                start + len,
                t.cols()
            )));
        }
        let n = t.rows();
        let mut data = Vec::with_capacity(n * len);
        for i in 0..n {
            let row = t.row(i);
            data.extend_from_slice(&row[start..start + len]);
        }
        let rg = self.requires(&[a]);
        Ok(self.push(Op::SliceCols { a, start, len }, Tensor::from_vec(vec![n, len], data), rg))
    }

    /// Select row `index` of a table as a 1 x d tensor.
    pub fn embed_row(&mut self, table: NodeId, index: usize) -> Result<NodeId> {
        let t = self.value(table);
        if index >= t.rows() {
            return Err(Error::Range(format!(
                "embedding index {} out of {} rows",
                index,
                t.rows()
            )));
        }
        let d = t.cols();
        let data = t.row(index).to_vec();
        let rg = self.requires(&[table]);
        Ok(self.push(Op::EmbedRow { table, index }, Tensor::from_vec(vec![1, d], data), rg))
    }

    pub fn reshape(&mut self, a: NodeId, shape: Vec<usize>) -> Result<NodeId> {
        let v = self.value(a).reshaped(shape)?;
        let rg = self.requires(&[a]);
        Ok(self.push(Op::Reshape(a), v, rg))
    }

    // -- composites ----------------------------------------------------------

    /// x @ w + b with the bias broadcast over rows.
    pub fn linear(&mut self, x: NodeId, w: NodeId, b: NodeId) -> Result<NodeId> {
        let xw = self.matmul(x, w)?;
        let rows = self.value(xw).rows();
        let bb = self.broadcast_rows(b, rows)?;
        self.add(xw, bb)
    }

    /// Scaled dot-product attention: softmax(q kT / sqrt(h)) v.
    pub fn attention(&mut self, q: NodeId, k: NodeId, v: NodeId) -> Result<NodeId> {
        let h = self.value(q).cols();
        if self.value(k).cols() != h || self.value(v).cols() != h {
            return Err(Error::Shape(format!(
                "attention head dims disagree: q {:?}, k {:?}, v {:?}",
                self.value(q).shape(),
                self.value(k).shape(),
                self.value(v).shape()
            )));
        }
        if self.value(k).rows() != self.value(v).rows() {
            return Err(Error::Shape(format!(
                "attention k/v row mismatch: {:?} vs {:?}",
                self.value(k).shape(),
                self.value(v).shape()
            )));
        }
        let kt = self.transpose(k)?;
        let scores = self.matmul(q, kt)?;
        let scaled = self.scale(scores, 1.0 / (h as f64).sqrt());
        let weights = self.softmax_rows(scaled);
        self.matmul(weights, v)
    }

    /// Attention that also reports the softmax node (row-sum checks).
    pub fn attention_traced(&mut self, q: NodeId, k: NodeId, v: NodeId) -> Result<(NodeId, NodeId)> {
        let h = self.value(q).cols();
        let kt = self.transpose(k)?;
        let scores = self.matmul(q, kt)?;
        let scaled = self.scale(scores, 1.0 / (h as f64).sqrt());
        let weights = self.softmax_rows(scaled);
        let out = self.matmul(weights, v)?;
        Ok((out, weights))
    }

    // -- backward ------------------------------------------------------------

    /// Backpropagate from a scalar node. Each node is visited exactly once,
    /// in reverse insertion order.
    pub fn backward(&mut self, out: NodeId) -> Result<()> {
        if self.value(out).len() != 1 {
            return Err(Error::Contract(format!(
                "backward target must be scalar, got shape {:?}",
                self.value(out).shape()
            )));
        }
        for node in self.nodes.iter_mut() {
            node.grad = None;
        }
        let mut grads: Vec<Option<Tensor<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[out.0] = Some(Tensor::ones(self.value(out).shape().to_vec()));

        for id in (0..=out.0).rev() {
            if !self.nodes[id].requires_grad {
                continue;
            }
            let g = match grads[id].take() {
                Some(g) => g,
                None => continue,
            };
            debug_assert_eq!(g.shape(), self.nodes[id].value.shape());
            let op = self.nodes[id].op.clone();
            self.backprop_op(&op, id, &g, &mut grads)?;
            self.nodes[id].grad = Some(g);
        }
        Ok(())
    }

    fn accumulate(&self, grads: &mut [Option<Tensor<T>>], id: NodeId, delta: Tensor<T>) -> Result<()> {
        if !self.nodes[id.0].requires_grad {
            return Ok(());
        }
        match grads[id.0].take() {
            None => grads[id.0] = Some(delta),
            Some(g) => grads[id.0] = Some(tensor::add(&g, &delta)?),
        }
        Ok(())
    }

    fn backprop_op(
        &self,
        op: &Op,
        id: usize,
        g: &Tensor<T>,
        grads: &mut [Option<Tensor<T>>],
    ) -> Result<()> {
        match *op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                self.accumulate(grads, a, g.clone())?;
                self.accumulate(grads, b, g.clone())?;
            }
            Op::Sub(a, b) => {
                self.accumulate(grads, a, g.clone())?;
                self.accumulate(grads, b, tensor::scale(g, -T::ONE))?;
            }
            Op::Mul(a, b) => {
                self.accumulate(grads, a, tensor::mul(g, self.value(b))?)?;
                self.accumulate(grads, b, tensor::mul(g, self.value(a))?)?;
            }
            Op::Scale(a, c) => {
                self.accumulate(grads, a, tensor::scale(g, T::from_f64(c)))?;
            }
            Op::Matmul(a, b) => {
                let bt = tensor::transpose(self.value(b))?;
                self.accumulate(grads, a, tensor::matmul(g, &bt)?)?;
                let at = tensor::transpose(self.value(a))?;
                self.accumulate(grads, b, tensor::matmul(&at, g)?)?;
            }
            Op::Transpose(a) => {
                self.accumulate(grads, a, tensor::transpose(g)?)?;
            }
            Op::LayerNorm { x, gamma, beta, eps } => {
                let (gx, gg, gb) = layer_norm_backward(
                    self.value(x),
                    self.value(gamma).data(),
                    T::from_f64(eps),
                    g,
                );
                self.accumulate(grads, x, gx)?;
                self.accumulate(grads, gamma, gg)?;
                self.accumulate(grads, beta, gb)?;
            }
            Op::SoftmaxRows(a) => {
                // dx = y * (g - sum(g*y)) per row
                let y = &self.nodes[id].value;
                let (m, n) = (y.rows(), y.cols());
                let mut dx = vec![T::ZERO; m * n];
                for i in 0..m {
                    let yr = y.row(i);
                    let gr = g.row(i);
                    let mut dot = T::ZERO;
                    for j in 0..n {
                        dot += gr[j] * yr[j];
                    }
                    for j in 0..n {
                        dx[i * n + j] = yr[j] * (gr[j] - dot);
                    }
                }
                self.accumulate(grads, a, Tensor::from_vec(vec![m, n], dx))?;
            }
            Op::Gelu(a) => {
                let x = self.value(a);
                let d: Vec<T> = x
                    .data()
                    .iter()
                    .zip(g.data())
                    .map(|(&xv, &gv)| gv * tensor::gelu_grad(xv))
                    .collect();
                self.accumulate(grads, a, Tensor::from_vec(x.shape().to_vec(), d))?;
            }
            Op::Silu(a) => {
                let x = self.value(a);
                let d: Vec<T> = x
                    .data()
                    .iter()
                    .zip(g.data())
                    .map(|(&xv, &gv)| gv * tensor::silu_grad(xv))
                    .collect();
                self.accumulate(grads, a, Tensor::from_vec(x.shape().to_vec(), d))?;
            }
            Op::BroadcastRows { v, rows } => {
                let d = g.cols();
                let mut acc = vec![T::ZERO; d];
                for i in 0..rows {
                    for (a, &gv) in acc.iter_mut().zip(g.row(i)) {
                        *a += gv;
                    }
                }
                let shape = self.value(v).shape().to_vec();
                self.accumulate(grads, v, Tensor::from_vec(shape, acc))?;
            }
            Op::BroadcastCols { v, cols } => {
                let n = g.rows();
                let mut acc = vec![T::ZERO; n];
                for i in 0..n {
                    let mut s = T::ZERO;
                    for &gv in g.row(i) {
                        s += gv;
                    }
                    acc[i] = s;
                }
                let _ = cols;
                let shape = self.value(v).shape().to_vec();
                self.accumulate(grads, v, Tensor::from_vec(shape, acc))?;
            }
            Op::SumAll(a) => {
                let s = g.data()[0];
                let shape = self.value(a).shape().to_vec();
                self.accumulate(grads, a, Tensor::full(shape, s))?;
            }
            Op::MeanAll(a) => {
                let n = self.value(a).len();
                let s = g.data()[0] * T::from_f64(1.0 / n as f64);
                let shape = self.value(a).shape().to_vec();
                self.accumulate(grads, a, Tensor::full(shape, s))?;
            }
            Op::ConcatRows(a, b) => {
                let ra = self.value(a).rows();
                let d = g.cols();
                let ga = g.data()[..ra * d].to_vec();
                let gb = g.data()[ra * d..].to_vec();
                let sa = self.value(a).shape().to_vec();
                let sb = self.value(b).shape().to_vec();
                self.accumulate(grads, a, Tensor::from_vec(sa, ga))?;
                self.accumulate(grads, b, Tensor::from_vec(sb, gb))?;
            }
            Op::SliceRows { a, start, len } => {
                let src = self.value(a);
                let d = src.cols();
                let mut pad = vec![T::ZERO; src.len()];
                pad[start * d..(start + len) * d].copy_from_slice(g.data());
                self.accumulate(grads, a, Tensor::from_vec(src.shape().to_vec(), pad))?;
            }
            Op::ConcatCols(a, b) => {
                let (n, da) = (self.value(a).rows(), self.value(a).cols());
                let db = self.value(b).cols();
                let mut ga = vec![T::ZERO; n * da];
                let mut gb = vec![T::ZERO; n * db];
                for i in 0..n {
                    let gr = g.row(i);
                    ga[i * da..(i + 1) * da].copy_from_slice(&gr[..da]);
                    gb[i * db..(i + 1) * db].copy_from_slice(&gr[da..]);
                }
                self.accumulate(grads, a, Tensor::from_vec(vec![n, da], ga))?;
                self.accumulate(grads, b, Tensor::from_vec(vec![n, db], gb))?;
            }
            Op::SliceCols { a, start, len } => {
                let src = self.value(a);
                let (n, d) = (src.rows(), src.cols());
                let mut pad = vec![T::ZERO; n * d];
                for i in 0..n {
                    pad[i * d + start..i * d + start + len].copy_from_slice(g.row(i));
                }
                self.accumulate(grads, a, Tensor::from_vec(src.shape().to_vec(), pad))?;
            }
            Op::EmbedRow { table, index } => {
                let t = self.value(table);
                let d = t.cols();
                let mut pad = vec![T::ZERO; t.len()];
                pad[index * d..(index + 1) * d].copy_from_slice(g.data());
                self.accumulate(grads, table, Tensor::from_vec(t.shape().to_vec(), pad))?;
            }
            Op::Reshape(a) => {
                let shape = self.value(a).shape().to_vec();
                self.accumulate(grads, a, g.reshaped(shape)?)?;
            }
        }
        Ok(())
    }
}

/// Gradients of per-row layer norm wrt (x, gamma, beta).
fn layer_norm_backward<T: Scalar>(
    x: &Tensor<T>,
    gamma: &[T],
    eps: T,
    g: &Tensor<T>,
) -> (Tensor<T>, Tensor<T>, Tensor<T>) {
    let (m, d) = (x.rows(), x.cols());
    let inv_d = T::from_f64(1.0 / d as f64);
    let mut gx = vec![T::ZERO; m * d];
    let mut gg = vec![T::ZERO; d];
    let mut gb = vec![T::ZERO; d];
    for i in 0..m {
        let row = x.row(i);
        let grow = g.row(i);
        let mut mean = T::ZERO;
        for &v in row {
            mean += v;
        }
        mean = mean * inv_d;
        let mut var = T::ZERO;
        for &v in row {
            let c = v - mean;
            var += c * c;
        }
        var = var * inv_d;
        let inv_std = T::ONE / (var + eps).sqrt();

        // xhat_j = (x_j - mean) * inv_std
        // dL/dx = inv_std * (gg_j - mean(gg) - xhat_j * mean(gg * xhat))
        // where gg_j = gamma_j * g_j
        let mut mean_gg = T::ZERO;
        let mut mean_ggx = T::ZERO;
        for j in 0..d {
            let xhat = (row[j] - mean) * inv_std;
            let ggj = gamma[j] * grow[j];
            mean_gg += ggj;
            mean_ggx += ggj * xhat;
            gg[j] += grow[j] * xhat;
            gb[j] += grow[j];
        }
        mean_gg = mean_gg * inv_d;
        mean_ggx = mean_ggx * inv_d;
        for j in 0..d {
            let xhat = (row[j] - mean) * inv_std;
            gx[i * d + j] = inv_std * (gamma[j] * grow[j] - mean_gg - xhat * mean_ggx);
        }
    }
    (
        Tensor::from_vec(vec![m, d], gx),
        Tensor::from_vec(vec![d], gg),
        Tensor::from_vec(vec![d], gb),
    )
}
