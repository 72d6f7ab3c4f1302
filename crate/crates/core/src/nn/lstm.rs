//! Single-layer LSTM cell and a bidirectional encoder that keeps the last
//! hidden state of each direction.
//!
//! Cell equations, per step:
//!
//! ```text
//! i = σ(W_i·x + U_i·h + b_i)      f = σ(W_f·x + U_f·h + b_f)
//! o = σ(W_o·x + U_o·h + b_o)      g = tanh(W_g·x + U_g·h + b_g)
//! c' = f ⊙ c + i ⊙ g              h' = o ⊙ tanh(c')
//! ```

use rand::Rng;

use super::bind_tensor;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::tensor::Tensor;

const INIT_RANGE: f64 = 0.08;
const FORGET_BIAS: f64 = 1.0;

/// Input weights `w` (`[H × in]`), recurrent weights `u` (`[H × H]`) and
/// bias `b` (`[H]`) of one gate.
#[derive(Clone, Debug, PartialEq)]
pub struct GateBlock {
    pub w: Tensor,
    pub u: Tensor,
    pub b: Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub input: GateBlock,
    pub forget: GateBlock,
    pub output: GateBlock,
    pub candidate: GateBlock,
}

#[derive(Clone, Copy, Debug)]
struct BlockNodes {
    w: NodeId,
    u: NodeId,
    b: NodeId,
}

#[derive(Clone, Copy, Debug)]
pub struct LstmNodes {
    input: BlockNodes,
    forget: BlockNodes,
    output: BlockNodes,
    candidate: BlockNodes,
    hidden: usize,
}

const GATE_NAMES: [&str; 4] = ["input", "forget", "output", "candidate"];

impl GateBlock {
    fn uniform<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Result<Self> {
        Ok(GateBlock {
            w: Tensor::uniform(&[hidden, input], -INIT_RANGE, INIT_RANGE, rng)?,
            u: Tensor::uniform(&[hidden, hidden], -INIT_RANGE, INIT_RANGE, rng)?,
            b: Tensor::uniform(&[hidden], -INIT_RANGE, INIT_RANGE, rng)?,
        })
    }

    fn zeros(input: usize, hidden: usize) -> Result<Self> {
        Ok(GateBlock {
            w: Tensor::zeros(&[hidden, input])?,
            u: Tensor::zeros(&[hidden, hidden])?,
            b: Tensor::zeros(&[hidden])?,
        })
    }
}

impl LstmParams {
    /// Uniform `[-0.08, 0.08]` everywhere except the forget bias, which
    /// starts at 1.
    pub fn init<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Result<Self> {
        let input_gate = GateBlock::uniform(input, hidden, rng)?;
        let mut forget = GateBlock::uniform(input, hidden, rng)?;
        forget.b = Tensor::full(&[hidden], FORGET_BIAS)?;
        let output = GateBlock::uniform(input, hidden, rng)?;
        let candidate = GateBlock::uniform(input, hidden, rng)?;
        Ok(LstmParams {
            input: input_gate,
            forget,
            output,
            candidate,
        })
    }

    pub fn zeros(input: usize, hidden: usize) -> Result<Self> {
        Ok(LstmParams {
            input: GateBlock::zeros(input, hidden)?,
            forget: GateBlock::zeros(input, hidden)?,
            output: GateBlock::zeros(input, hidden)?,
            candidate: GateBlock::zeros(input, hidden)?,
        })
    }

    pub fn input_size(&self) -> usize {
        self.input.w.shape()[1]
    }

    pub fn hidden_size(&self) -> usize {
        self.input.w.shape()[0]
    }

    fn blocks(&self) -> [&GateBlock; 4] {
        [&self.input, &self.forget, &self.output, &self.candidate]
    }

    /// Checks that all four gate blocks agree in shape.
    pub fn validate(&self) -> Result<()> {
        let (h, i) = (self.hidden_size(), self.input_size());
        for blk in self.blocks() {
            if blk.w.shape() != [h, i] {
                return Err(Error::dim("lstm input weights", blk.w.shape(), &[h, i]));
            }
            if blk.u.shape() != [h, h] {
                return Err(Error::dim("lstm recurrent weights", blk.u.shape(), &[h, h]));
            }
            if blk.b.shape() != [h] {
                return Err(Error::dim("lstm bias", blk.b.shape(), &[h]));
            }
        }
        Ok(())
    }

    pub fn bind(&self, g: &mut Graph, prefix: &str, trainable: bool) -> LstmNodes {
        let mut bind_block = |name: &str, blk: &GateBlock| BlockNodes {
            w: bind_tensor(g, &format!("{prefix}.{name}.w"), &blk.w, trainable),
            u: bind_tensor(g, &format!("{prefix}.{name}.u"), &blk.u, trainable),
            b: bind_tensor(g, &format!("{prefix}.{name}.b"), &blk.b, trainable),
        };
        LstmNodes {
            input: bind_block(GATE_NAMES[0], &self.input),
            forget: bind_block(GATE_NAMES[1], &self.forget),
            output: bind_block(GATE_NAMES[2], &self.output),
            candidate: bind_block(GATE_NAMES[3], &self.candidate),
            hidden: self.hidden_size(),
        }
    }

    pub fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Tensor)) {
        for (name, blk) in GATE_NAMES.iter().zip(self.blocks()) {
            f(format!("{prefix}.{name}.w"), &blk.w);
            f(format!("{prefix}.{name}.u"), &blk.u);
            f(format!("{prefix}.{name}.b"), &blk.b);
        }
    }

    pub fn visit_mut<'a>(&'a mut self, prefix: &str, f: &mut dyn FnMut(String, &'a mut Tensor)) {
        let blocks = [
            &mut self.input,
            &mut self.forget,
            &mut self.output,
            &mut self.candidate,
        ];
        for (name, blk) in GATE_NAMES.iter().zip(blocks) {
            f(format!("{prefix}.{name}.w"), &mut blk.w);
            f(format!("{prefix}.{name}.u"), &mut blk.u);
            f(format!("{prefix}.{name}.b"), &mut blk.b);
        }
    }

    /// One eager step; returns `(h, c)`.
    pub fn step(&self, x: &Tensor, h_prev: &Tensor, c_prev: &Tensor) -> Result<(Tensor, Tensor)> {
        self.validate()?;
        let mut g = Graph::new();
        let nodes = self.bind(&mut g, "lstm", false);
        let (xn, hn, cn) = (
            g.constant(x.clone()),
            g.constant(h_prev.clone()),
            g.constant(c_prev.clone()),
        );
        let (h, c) = lstm_step(&mut g, &nodes, xn, hn, cn)?;
        Ok((g.value(h).clone(), g.value(c).clone()))
    }
}

fn gate_preactivation(g: &mut Graph, blk: &BlockNodes, x: NodeId, h: NodeId) -> Result<NodeId> {
    let from_input = g.linear(x, blk.w, Some(blk.b))?;
    let from_state = g.linear(h, blk.u, None)?;
    g.add(from_input, from_state)
}

/// One LSTM step. `x` is `[in]` or `[batch × in]`; `h_prev`/`c_prev` have the
/// matching `[H]` or `[batch × H]` shape.
pub fn lstm_step(
    g: &mut Graph,
    p: &LstmNodes,
    x: NodeId,
    h_prev: NodeId,
    c_prev: NodeId,
) -> Result<(NodeId, NodeId)> {
    let (rows, _) = g.value(x).as_matrix_dims();
    let expect: Vec<usize> = if g.value(x).rank() == 1 {
        vec![p.hidden]
    } else {
        vec![rows, p.hidden]
    };
    for state in [h_prev, c_prev] {
        if g.shape(state) != expect.as_slice() {
            return Err(Error::dim("lstm_step state", g.shape(state), &expect));
        }
    }
    let i_pre = gate_preactivation(g, &p.input, x, h_prev)?;
    let f_pre = gate_preactivation(g, &p.forget, x, h_prev)?;
    let o_pre = gate_preactivation(g, &p.output, x, h_prev)?;
    let g_pre = gate_preactivation(g, &p.candidate, x, h_prev)?;
    let i = g.sigmoid(i_pre);
    let f = g.sigmoid(f_pre);
    let o = g.sigmoid(o_pre);
    let cand = g.tanh(g_pre);
    let carry = g.mul(f, c_prev)?;
    let write = g.mul(i, cand)?;
    let c = g.add(carry, write)?;
    let squashed = g.tanh(c);
    let h = g.mul(o, squashed)?;
    Ok((h, c))
}

/// Runs `fwd` left to right and `bwd` right to left over `seq`, each from a
/// zero state, and returns `[h_fwd_last ; h_bwd_last]`.
pub fn bilstm_encode(
    g: &mut Graph,
    fwd: &LstmNodes,
    bwd: &LstmNodes,
    seq: &[NodeId],
) -> Result<NodeId> {
    let Some(&first) = seq.first() else {
        return Err(Error::Contract(
            "bilstm_encode needs a nonempty sequence".into(),
        ));
    };
    let first_shape = g.shape(first).to_vec();
    if seq.iter().any(|&s| g.shape(s) != first_shape.as_slice()) {
        return Err(Error::Contract(
            "bilstm_encode inputs must share one shape".into(),
        ));
    }
    let run = |g: &mut Graph,
               p: &LstmNodes,
               order: &mut dyn Iterator<Item = &NodeId>|
     -> Result<NodeId> {
        let (rows, _) = g.value(first).as_matrix_dims();
        let shape = if first_shape.len() == 1 {
            vec![p.hidden]
        } else {
            vec![rows, p.hidden]
        };
        let mut h = g.constant(Tensor::zeros(&shape)?);
        let mut c = g.constant(Tensor::zeros(&shape)?);
        for &x in order {
            (h, c) = lstm_step(g, p, x, h, c)?;
        }
        Ok(h)
    };
    let h_fwd = run(g, fwd, &mut seq.iter())?;
    let h_bwd = run(g, bwd, &mut seq.iter().rev())?;
    g.concat(&[h_fwd, h_bwd])
}
