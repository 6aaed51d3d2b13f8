use std::sync::Arc;

use super::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn id(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    MatMulNT(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    ScaleBy(Var, Var),
    AddScalar(Var),
    Concat(Vec<Var>, usize),
    Sum(Var),
    Sigmoid(Var),
    Relu(Var),
    Tanh(Var),
    LeakyRelu(Var, f64),
    Softmax(Var),
    Reciprocal(Var),
    GatherRows(Var, Arc<[usize]>),
    SelectCol(Var, usize),
    SegmentSoftmax(Var, Arc<[usize]>, usize),
    EdgeAggregate {
        weight: Var,
        x: Var,
        src: Arc<[usize]>,
        dst: Arc<[usize]>,
    },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Append-only record of a forward computation.
///
/// Every op validates shapes, computes its value eagerly and rejects
/// non-finite results. Records are only ever appended, so inputs always
/// precede their consumers and a single reverse sweep suffices for
/// [`Tape::backward`].
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to every node that needed one.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    /// Gradient of `v`, or zeros of the right shape if nothing flowed into it.
    pub fn get_or_zeros(&self, v: Var, shape: &[usize]) -> Tensor {
        self.get(v).cloned().unwrap_or_else(|| Tensor::zeros(shape))
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dims2(t: &Tensor, op: &'static str) -> Result<(usize, usize)> {
    match *t.shape() {
        [r, c] => Ok((r, c)),
        ref s => Err(Error::shape(op, format!("expected a matrix, got {s:?}"))),
    }
}

fn softmax_in_place(xs: &mut [f64]) {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in xs.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    for x in xs.iter_mut() {
        *x /= total;
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// A leaf that gradients flow into.
    pub fn param(&mut self, value: Tensor) -> Var {
        self.push_leaf(value, true)
    }

    /// A leaf that is treated as fixed data.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push_leaf(value, false)
    }

    fn push_leaf(&mut self, value: Tensor, needs_grad: bool) -> Var {
        self.nodes.push(Node { value, op: Op::Leaf, needs_grad });
        Var(self.nodes.len() - 1)
    }

    fn push(&mut self, name: &'static str, value: Tensor, op: Op, inputs: &[Var]) -> Result<Var> {
        if !value.is_finite() {
            return Err(Error::NonFinite { op: name });
        }
        let needs_grad = inputs.iter().any(|v| self.nodes[v.0].needs_grad);
        self.nodes.push(Node { value, op, needs_grad });
        Ok(Var(self.nodes.len() - 1))
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        let (sa, sb) = (self.value(a).shape(), self.value(b).shape());
        if sa != sb {
            return Err(Error::shape(op, format!("{sa:?} vs {sb:?}")));
        }
        Ok(())
    }

    fn map(&mut self, name: &'static str, a: Var, op: Op, f: impl Fn(f64) -> f64) -> Result<Var> {
        let x = self.value(a);
        let data = x.data().iter().map(|&v| f(v)).collect();
        let value = Tensor::new(x.shape().to_vec(), data)?;
        self.push(name, value, op, &[a])
    }

    fn zip(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        op: Op,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Var> {
        self.same_shape(name, a, b)?;
        let (x, y) = (self.value(a), self.value(b));
        let data = x.data().iter().zip(y.data()).map(|(&p, &q)| f(p, q)).collect();
        let value = Tensor::new(x.shape().to_vec(), data)?;
        self.push(name, value, op, &[a, b])
    }

    /// `[m,k] x [k,n] -> [m,n]`
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = dims2(self.value(a), "matmul")?;
        let (k2, n) = dims2(self.value(b), "matmul")?;
        if k != k2 {
            return Err(Error::shape("matmul", format!("[{m},{k}] x [{k2},{n}]")));
        }
        let mut out = vec![0.0; m * n];
        matmul_acc(self.value(a).data(), self.value(b).data(), &mut out, m, k, n);
        self.push("matmul", Tensor::new(vec![m, n], out)?, Op::MatMul(a, b), &[a, b])
    }

    /// `[m,k] x [n,k]^T -> [m,n]`; applies a weight matrix stored as `out x in`.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = dims2(self.value(a), "matmul_nt")?;
        let (n, k2) = dims2(self.value(b), "matmul_nt")?;
        if k != k2 {
            return Err(Error::shape("matmul_nt", format!("[{m},{k}] x [{n},{k2}]^T")));
        }
        let (x, w) = (self.value(a).data(), self.value(b).data());
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let xi = &x[i * k..(i + 1) * k];
            for j in 0..n {
                out[i * n + j] = dot(xi, &w[j * k..(j + 1) * k]);
            }
        }
        self.push("matmul_nt", Tensor::new(vec![m, n], out)?, Op::MatMulNT(a, b), &[a, b])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("add", a, b, Op::Add(a, b), |p, q| p + q)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("sub", a, b, Op::Sub(a, b), |p, q| p - q)
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("mul", a, b, Op::Mul(a, b), |p, q| p * q)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        self.map("scale", a, Op::Scale(a, c), |v| c * v)
    }

    /// Multiply every element of `a` by the single-element tensor `s`.
    pub fn scale_by(&mut self, a: Var, s: Var) -> Result<Var> {
        if !self.value(s).is_scalar() {
            return Err(Error::shape("scale_by", format!("{:?} is not a scalar", self.value(s).shape())));
        }
        let c = self.value(s).item();
        let x = self.value(a);
        let value = Tensor::new(x.shape().to_vec(), x.data().iter().map(|v| c * v).collect())?;
        self.push("scale_by", value, Op::ScaleBy(a, s), &[a, s])
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Result<Var> {
        self.map("add_scalar", a, Op::AddScalar(a), |v| v + c)
    }

    /// Join tensors along `axis`; all other dimensions must agree.
    pub fn concat(&mut self, parts: &[Var], axis: usize) -> Result<Var> {
        let first = parts
            .first()
            .ok_or_else(|| Error::shape("concat", "no inputs"))?;
        let base = self.value(*first).shape().to_vec();
        if axis >= base.len() {
            return Err(Error::shape("concat", format!("axis {axis} out of range for {base:?}")));
        }
        let mut joined = 0;
        for p in parts {
            let s = self.value(*p).shape();
            let ok = s.len() == base.len()
                && s.iter().zip(&base).enumerate().all(|(d, (x, y))| d == axis || x == y);
            if !ok {
                return Err(Error::shape("concat", format!("{base:?} vs {s:?} along axis {axis}")));
            }
            joined += s[axis];
        }
        let outer: usize = base[..axis].iter().product();
        let chunks: Vec<usize> = parts
            .iter()
            .map(|p| self.value(*p).shape()[axis..].iter().product())
            .collect();
        let total_chunk: usize = chunks.iter().sum();
        let mut out = Vec::with_capacity(outer * total_chunk);
        for o in 0..outer {
            for (p, &c) in parts.iter().zip(&chunks) {
                out.extend_from_slice(&self.value(*p).data()[o * c..(o + 1) * c]);
            }
        }
        let mut shape = base;
        shape[axis] = joined;
        self.push("concat", Tensor::new(shape, out)?, Op::Concat(parts.to_vec(), axis), parts)
    }

    /// Sum of all elements, as a `[1]` tensor.
    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let s = self.value(a).data().iter().sum();
        self.push("sum", Tensor::scalar(s), Op::Sum(a), &[a])
    }

    /// Mean of all elements, as a `[1]` tensor.
    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let n = self.value(a).numel();
        let s = self.sum(a)?;
        self.scale(s, 1.0 / n as f64)
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        self.map("sigmoid", a, Op::Sigmoid(a), sigmoid)
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        self.map("relu", a, Op::Relu(a), |v| if v > 0.0 { v } else { 0.0 })
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        self.map("tanh", a, Op::Tanh(a), f64::tanh)
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Result<Var> {
        self.map("leaky_relu", a, Op::LeakyRelu(a, slope), |v| if v > 0.0 { v } else { slope * v })
    }

    /// Softmax over every element of `a` (max-subtracted).
    pub fn softmax(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        let mut data = x.data().to_vec();
        if !data.is_empty() {
            softmax_in_place(&mut data);
        }
        let value = Tensor::new(x.shape().to_vec(), data)?;
        self.push("softmax", value, Op::Softmax(a), &[a])
    }

    pub fn reciprocal(&mut self, a: Var) -> Result<Var> {
        self.map("reciprocal", a, Op::Reciprocal(a), |v| 1.0 / v)
    }

    /// Rows of `a` picked by `index` (rows may repeat).
    pub fn gather_rows(&mut self, a: Var, index: Arc<[usize]>) -> Result<Var> {
        let x = self.value(a);
        let rows = x.rows();
        let w = x.row_len();
        let mut out = Vec::with_capacity(index.len() * w);
        for &i in index.iter() {
            if i >= rows {
                return Err(Error::shape("gather_rows", format!("row {i} of {rows}")));
            }
            out.extend_from_slice(x.row(i));
        }
        let mut shape = x.shape().to_vec();
        if shape.is_empty() {
            shape.push(index.len());
        } else {
            shape[0] = index.len();
        }
        let value = Tensor::new(shape, out)?;
        self.push("gather_rows", value, Op::GatherRows(a, index), &[a])
    }

    /// Column `j` of a matrix as a vector.
    pub fn select_col(&mut self, a: Var, j: usize) -> Result<Var> {
        let (r, c) = dims2(self.value(a), "select_col")?;
        if j >= c {
            return Err(Error::shape("select_col", format!("column {j} of {c}")));
        }
        let x = self.value(a);
        let data = (0..r).map(|i| x.get2(i, j)).collect();
        self.push("select_col", Tensor::vector(data), Op::SelectCol(a, j), &[a])
    }

    /// Softmax of a vector within groups: element `e` is normalized against
    /// every element sharing `segment[e]`.
    pub fn segment_softmax(&mut self, a: Var, segment: Arc<[usize]>, n_segments: usize) -> Result<Var> {
        let x = self.value(a);
        if x.shape().len() != 1 || x.numel() != segment.len() {
            return Err(Error::shape(
                "segment_softmax",
                format!("{:?} with {} segment ids", x.shape(), segment.len()),
            ));
        }
        let mut max = vec![f64::NEG_INFINITY; n_segments];
        for (&v, &s) in x.data().iter().zip(segment.iter()) {
            if s >= n_segments {
                return Err(Error::shape("segment_softmax", format!("segment {s} of {n_segments}")));
            }
            max[s] = max[s].max(v);
        }
        let mut total = vec![0.0; n_segments];
        let mut out: Vec<f64> = x
            .data()
            .iter()
            .zip(segment.iter())
            .map(|(&v, &s)| {
                let e = (v - max[s]).exp();
                total[s] += e;
                e
            })
            .collect();
        for (o, &s) in out.iter_mut().zip(segment.iter()) {
            *o /= total[s];
        }
        let value = Tensor::vector(out);
        self.push("segment_softmax", value, Op::SegmentSoftmax(a, segment, n_segments), &[a])
    }

    /// Weighted neighbor sum: `out[dst[e]] += weight[e] * x[src[e]]` for every
    /// edge `e`. `out` has the same shape as `x`.
    pub fn edge_aggregate(
        &mut self,
        weight: Var,
        x: Var,
        src: Arc<[usize]>,
        dst: Arc<[usize]>,
    ) -> Result<Var> {
        let wv = self.value(weight);
        let xv = self.value(x);
        if wv.shape().len() != 1 || wv.numel() != src.len() || src.len() != dst.len() {
            return Err(Error::shape(
                "edge_aggregate",
                format!("weights {:?} for {} edges", wv.shape(), src.len()),
            ));
        }
        let rows = xv.rows();
        let w = xv.row_len();
        let mut out = vec![0.0; xv.numel()];
        for ((&ew, &s), &d) in wv.data().iter().zip(src.iter()).zip(dst.iter()) {
            if s >= rows || d >= rows {
                return Err(Error::shape("edge_aggregate", format!("edge {s}->{d} with {rows} rows")));
            }
            let xs = xv.row(s);
            for (o, &xi) in out[d * w..(d + 1) * w].iter_mut().zip(xs) {
                *o += ew * xi;
            }
        }
        let value = Tensor::new(xv.shape().to_vec(), out)?;
        self.push(
            "edge_aggregate",
            value,
            Op::EdgeAggregate { weight, x, src, dst },
            &[weight, x],
        )
    }

    /// Reverse sweep from a single-element `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let lv = self.value(loss);
        if !lv.is_scalar() {
            return Err(Error::NonScalarLoss(lv.shape().to_vec()));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.backprop_node(i, &g, &mut grads);
            grads[i] = Some(g);
        }

        let grads = grads
            .into_iter()
            .zip(&self.nodes)
            .map(|(g, n)| {
                g.filter(|_| n.needs_grad)
                    .map(|d| Tensor::new(n.value.shape().to_vec(), d).expect("gradient shape"))
            })
            .collect();
        Ok(Gradients { grads })
    }

    fn backprop_node(&self, i: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[i];
        let out = node.value.data();
        let val = |v: Var| self.nodes[v.0].value.data();
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (m, k) = dims2(&self.nodes[a.0].value, "").unwrap();
                let n = self.nodes[b.0].value.shape()[1];
                debug_assert!(a.0 < i && b.0 < i);
                // dA = G B^T
                if let Some(ga) = self.buf(*a, grads) {
                    let bd = val(*b);
                    for r in 0..m {
                        for c in 0..k {
                            ga[r * k + c] += dot(&g[r * n..(r + 1) * n], &bd[c * n..(c + 1) * n]);
                        }
                    }
                }
                // dB = A^T G
                if let Some(gb) = self.buf(*b, grads) {
                    let ad = val(*a);
                    for r in 0..m {
                        let gr = &g[r * n..(r + 1) * n];
                        for c in 0..k {
                            let av = ad[r * k + c];
                            if av != 0.0 {
                                axpy(av, gr, &mut gb[c * n..(c + 1) * n]);
                            }
                        }
                    }
                }
            }
            Op::MatMulNT(a, b) => {
                let (m, k) = dims2(&self.nodes[a.0].value, "").unwrap();
                let n = self.nodes[b.0].value.shape()[0];
                // C = A B^T: dA = G B, dB = G^T A
                if let Some(ga) = self.buf(*a, grads) {
                    let bd = val(*b);
                    for r in 0..m {
                        for j in 0..n {
                            let gv = g[r * n + j];
                            if gv != 0.0 {
                                axpy(gv, &bd[j * k..(j + 1) * k], &mut ga[r * k..(r + 1) * k]);
                            }
                        }
                    }
                }
                if let Some(gb) = self.buf(*b, grads) {
                    let ad = val(*a);
                    for r in 0..m {
                        for j in 0..n {
                            let gv = g[r * n + j];
                            if gv != 0.0 {
                                axpy(gv, &ad[r * k..(r + 1) * k], &mut gb[j * k..(j + 1) * k]);
                            }
                        }
                    }
                }
            }
            Op::Add(a, b) => {
                if let Some(ga) = self.buf(*a, grads) {
                    axpy(1.0, g, ga);
                }
                if let Some(gb) = self.buf(*b, grads) {
                    axpy(1.0, g, gb);
                }
            }
            Op::Sub(a, b) => {
                if let Some(ga) = self.buf(*a, grads) {
                    axpy(1.0, g, ga);
                }
                if let Some(gb) = self.buf(*b, grads) {
                    axpy(-1.0, g, gb);
                }
            }
            Op::Mul(a, b) => {
                if let Some(ga) = self.buf(*a, grads) {
                    for ((o, gv), bv) in ga.iter_mut().zip(g).zip(val(*b)) {
                        *o += gv * bv;
                    }
                }
                if let Some(gb) = self.buf(*b, grads) {
                    for ((o, gv), av) in gb.iter_mut().zip(g).zip(val(*a)) {
                        *o += gv * av;
                    }
                }
            }
            Op::Scale(a, c) => {
                if let Some(ga) = self.buf(*a, grads) {
                    axpy(*c, g, ga);
                }
            }
            Op::ScaleBy(a, s) => {
                let c = val(*s)[0];
                if let Some(ga) = self.buf(*a, grads) {
                    axpy(c, g, ga);
                }
                if let Some(gs) = self.buf(*s, grads) {
                    gs[0] += dot(g, val(*a));
                }
            }
            Op::AddScalar(a) => {
                if let Some(ga) = self.buf(*a, grads) {
                    axpy(1.0, g, ga);
                }
            }
            Op::Concat(parts, axis) => {
                let outer: usize = node.value.shape()[..*axis].iter().product();
                let chunks: Vec<usize> = parts
                    .iter()
                    .map(|p| self.nodes[p.0].value.shape()[*axis..].iter().product())
                    .collect();
                let total: usize = chunks.iter().sum();
                let mut offset = 0;
                for (p, &c) in parts.iter().zip(&chunks) {
                    if let Some(gp) = self.buf(*p, grads) {
                        for o in 0..outer {
                            let src = &g[o * total + offset..o * total + offset + c];
                            axpy(1.0, src, &mut gp[o * c..(o + 1) * c]);
                        }
                    }
                    offset += c;
                }
            }
            Op::Sum(a) => {
                if let Some(ga) = self.buf(*a, grads) {
                    for o in ga.iter_mut() {
                        *o += g[0];
                    }
                }
            }
            Op::Sigmoid(a) => self.unary(*a, g, grads, |k| out[k] * (1.0 - out[k])),
            Op::Relu(a) => self.unary(*a, g, grads, |k| if out[k] > 0.0 { 1.0 } else { 0.0 }),
            Op::Tanh(a) => self.unary(*a, g, grads, |k| 1.0 - out[k] * out[k]),
            Op::LeakyRelu(a, slope) => {
                let x = val(*a);
                self.unary(*a, g, grads, |k| if x[k] > 0.0 { 1.0 } else { *slope })
            }
            Op::Reciprocal(a) => self.unary(*a, g, grads, |k| -out[k] * out[k]),
            Op::Softmax(a) => {
                if let Some(ga) = self.buf(*a, grads) {
                    let s = dot(g, out);
                    for k in 0..out.len() {
                        ga[k] += out[k] * (g[k] - s);
                    }
                }
            }
            Op::GatherRows(a, index) => {
                let w = node.value.row_len();
                if let Some(ga) = self.buf(*a, grads) {
                    for (r, &src) in index.iter().enumerate() {
                        axpy(1.0, &g[r * w..(r + 1) * w], &mut ga[src * w..(src + 1) * w]);
                    }
                }
            }
            Op::SelectCol(a, j) => {
                let c = self.nodes[a.0].value.shape()[1];
                if let Some(ga) = self.buf(*a, grads) {
                    for (r, gv) in g.iter().enumerate() {
                        ga[r * c + j] += gv;
                    }
                }
            }
            Op::SegmentSoftmax(a, segment, n_segments) => {
                if let Some(ga) = self.buf(*a, grads) {
                    let mut s = vec![0.0; *n_segments];
                    for ((gv, y), &seg) in g.iter().zip(out).zip(segment.iter()) {
                        s[seg] += gv * y;
                    }
                    for (k, &seg) in segment.iter().enumerate() {
                        ga[k] += out[k] * (g[k] - s[seg]);
                    }
                }
            }
            Op::EdgeAggregate { weight, x, src, dst } => {
                let xv = &self.nodes[x.0].value;
                let w = xv.row_len();
                if let Some(gw) = self.buf(*weight, grads) {
                    for (e, (&s, &d)) in src.iter().zip(dst.iter()).enumerate() {
                        gw[e] += dot(&g[d * w..(d + 1) * w], xv.row(s));
                    }
                }
                if let Some(gx) = self.buf(*x, grads) {
                    let wd = val(*weight);
                    for (e, (&s, &d)) in src.iter().zip(dst.iter()).enumerate() {
                        axpy(wd[e], &g[d * w..(d + 1) * w], &mut gx[s * w..(s + 1) * w]);
                    }
                }
            }
        }
    }

    fn unary(&self, a: Var, g: &[f64], grads: &mut [Option<Vec<f64>>], d: impl Fn(usize) -> f64) {
        if let Some(ga) = self.buf(a, grads) {
            for (k, (o, gv)) in ga.iter_mut().zip(g).enumerate() {
                *o += gv * d(k);
            }
        }
    }

    fn buf<'g>(&self, v: Var, grads: &'g mut [Option<Vec<f64>>]) -> Option<&'g mut Vec<f64>> {
        let node = &self.nodes[v.0];
        if !node.needs_grad {
            return None;
        }
        Some(grads[v.0].get_or_insert_with(|| vec![0.0; node.value.numel()]))
    }
}

/// Four independent partial sums so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn matmul_acc(a: &[f64], b: &[f64], out: &mut [f64], m: usize, k: usize, n: usize) {
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let av = a[i * k + p];
            if av != 0.0 {
                axpy(av, &b[p * n..(p + 1) * n], row);
            }
        }
    }
}

pub(crate) fn logistic(x: f64) -> f64 {
    sigmoid(x)
}
