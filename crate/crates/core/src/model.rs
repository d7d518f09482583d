//! Forward path: embedding lookup, LSTM encoder, mean pooling, linear
//! projection into the skill space, and scoring against a profile.
//!
//! The projection `P` is stored as `n_skills × hidden`, so row `j` is the
//! embedding of skill `j` and the explicit representation is `P · latent`.

use alloc::{vec, vec::Vec};

use crate::{
    error::{Result, SesaError},
    linalg::{self, DenseMatrix, DenseVector},
    rng::SeededRng,
    text::{EmbeddingMatrix, EMBEDDING_INIT_BOUND},
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dims {
    pub vocab: usize,
    pub d_emb: usize,
    pub hidden: usize,
    pub n_skills: usize,
}

impl Dims {
    pub fn validate(&self) -> Result<()> {
        if self.vocab == 0 || self.d_emb == 0 || self.hidden == 0 || self.n_skills == 0 {
            return Err(SesaError::Precondition(alloc::format!(
                "all model dimensions must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// LSTM gate order used by every per-gate array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Input = 0,
    Forget = 1,
    Output = 2,
    Cell = 3,
}

impl GateKind {
    pub const ALL: [GateKind; 4] = [GateKind::Input, GateKind::Forget, GateKind::Output, GateKind::Cell];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Input => "input",
            GateKind::Forget => "forget",
            GateKind::Output => "output",
            GateKind::Cell => "cell",
        }
    }
}

/// Input weights `w` (h×d), recurrent weights `u` (h×h) and bias `b` (h).
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub w: DenseMatrix,
    pub u: DenseMatrix,
    pub b: DenseVector,
}

impl Gate {
    fn zeros(d_emb: usize, hidden: usize) -> Self {
        Self {
            w: DenseMatrix::zeros(hidden, d_emb),
            u: DenseMatrix::zeros(hidden, hidden),
            b: DenseVector::zeros(hidden),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub dims: Dims,
    pub embeddings: DenseMatrix,
    pub gates: [Gate; 4],
    pub projection: DenseMatrix,
}

/// Identifies one contiguous parameter block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Embeddings,
    GateInput(GateKind),
    GateRecurrent(GateKind),
    GateBias(GateKind),
    Projection,
}

impl Block {
    pub fn is_bias(self) -> bool {
        matches!(self, Block::GateBias(_))
    }

    pub fn all() -> Vec<Block> {
        let mut out = vec![Block::Embeddings];
        for g in GateKind::ALL {
            out.extend([Block::GateInput(g), Block::GateRecurrent(g), Block::GateBias(g)]);
        }
        out.push(Block::Projection);
        out
    }
}

impl ModelParams {
    pub fn zeros(dims: Dims) -> Self {
        Self {
            dims,
            embeddings: DenseMatrix::zeros(dims.vocab, dims.d_emb),
            gates: core::array::from_fn(|_| Gate::zeros(dims.d_emb, dims.hidden)),
            projection: DenseMatrix::zeros(dims.n_skills, dims.hidden),
        }
    }

    pub fn block(&self, block: Block) -> &[f64] {
        match block {
            Block::Embeddings => self.embeddings.as_slice(),
            Block::GateInput(g) => self.gates[g as usize].w.as_slice(),
            Block::GateRecurrent(g) => self.gates[g as usize].u.as_slice(),
            Block::GateBias(g) => self.gates[g as usize].b.as_slice(),
            Block::Projection => self.projection.as_slice(),
        }
    }

    pub fn block_mut(&mut self, block: Block) -> &mut [f64] {
        match block {
            Block::Embeddings => self.embeddings.as_mut_slice(),
            Block::GateInput(g) => self.gates[g as usize].w.as_mut_slice(),
            Block::GateRecurrent(g) => self.gates[g as usize].u.as_mut_slice(),
            Block::GateBias(g) => self.gates[g as usize].b.as_mut_slice(),
            Block::Projection => self.projection.as_mut_slice(),
        }
    }

    /// Checks that every block has the shape `dims` implies and is finite.
    pub fn validate(&self) -> Result<()> {
        let d = self.dims;
        d.validate()?;
        let shape = |m: &DenseMatrix, rows: usize, cols: usize| -> Result<()> {
            if m.rows() != rows || m.cols() != cols {
                return Err(SesaError::Dimension {
                    expected: rows * cols,
                    actual: m.rows() * m.cols(),
                });
            }
            Ok(())
        };
        shape(&self.embeddings, d.vocab, d.d_emb)?;
        shape(&self.projection, d.n_skills, d.hidden)?;
        for g in &self.gates {
            shape(&g.w, d.hidden, d.d_emb)?;
            shape(&g.u, d.hidden, d.hidden)?;
            if g.b.len() != d.hidden {
                return Err(SesaError::Dimension {
                    expected: d.hidden,
                    actual: g.b.len(),
                });
            }
        }
        for b in Block::all() {
            linalg::check_finite(self.block(b))?;
        }
        Ok(())
    }
}

/// Glorot-uniform LSTM and projection blocks, zero biases except the forget
/// gate (1.0), and either the given embeddings or uniform ±0.05.
///
/// Draw order is fixed: embeddings (when not supplied), then `w`, `u` per
/// gate in [`GateKind::ALL`] order, then the projection.
pub fn init_params(dims: Dims, rng: &mut SeededRng, pretrained: Option<&EmbeddingMatrix>) -> Result<ModelParams> {
    dims.validate()?;
    let mut params = ModelParams::zeros(dims);
    match pretrained {
        Some(e) => {
            if e.rows() != dims.vocab || e.dim() != dims.d_emb {
                return Err(SesaError::Dimension {
                    expected: dims.vocab * dims.d_emb,
                    actual: e.rows() * e.dim(),
                });
            }
            params.embeddings = e.0.clone();
        }
        None => rng.fill_uniform(params.embeddings.as_mut_slice(), EMBEDDING_INIT_BOUND),
    }
    let glorot = |fan_in: usize, fan_out: usize| libm::sqrt(6.0 / (fan_in + fan_out) as f64);
    for gate in params.gates.iter_mut() {
        rng.fill_uniform(gate.w.as_mut_slice(), glorot(dims.d_emb, dims.hidden));
        rng.fill_uniform(gate.u.as_mut_slice(), glorot(dims.hidden, dims.hidden));
    }
    params.gates[GateKind::Forget as usize]
        .b
        .as_mut_slice()
        .fill(1.0);
    rng.fill_uniform(params.projection.as_mut_slice(), glorot(dims.hidden, dims.n_skills));
    Ok(params)
}

/// Sorted, duplicate-free skill dimensions a profile possesses.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProfileSkillVec(Vec<usize>);

impl ProfileSkillVec {
    pub fn new(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }

    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check(&self, n_skills: usize) -> Result<()> {
        match self.0.last() {
            Some(&max) if max >= n_skills => Err(SesaError::Index {
                index: max,
                len: n_skills,
            }),
            _ => Ok(()),
        }
    }
}

/// One labeled job–profile pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub token_ids: Vec<u32>,
    pub skills: ProfileSkillVec,
    pub label: bool,
}

impl Example {
    pub fn target(&self) -> f64 {
        if self.label {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ScoreMode {
    #[default]
    Dot,
    Cosine,
}

/// Per-step activations kept for backpropagation. All per-step blocks are
/// flattened `steps × hidden`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub ids: Vec<u32>,
    pub hidden: usize,
    pub input_gate: Vec<f64>,
    pub forget_gate: Vec<f64>,
    pub output_gate: Vec<f64>,
    pub candidate: Vec<f64>,
    pub cell: Vec<f64>,
    pub cell_tanh: Vec<f64>,
    pub states: Vec<f64>,
    pub latent: Vec<f64>,
    pub explicit: Vec<f64>,
}

impl ForwardCache {
    pub fn steps(&self) -> usize {
        self.ids.len()
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.states[t * self.hidden..(t + 1) * self.hidden]
    }
}

#[inline]
pub(crate) fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

fn check_ids(dims: &Dims, ids: &[u32]) -> Result<()> {
    if ids.is_empty() {
        return Err(SesaError::Precondition("encoder input must be non-empty".into()));
    }
    match ids.iter().find(|&&id| id as usize >= dims.vocab) {
        Some(&id) => Err(SesaError::Index {
            index: id as usize,
            len: dims.vocab,
        }),
        None => Ok(()),
    }
}

/// Runs the recurrence from `h_0 = c_0 = 0`. The returned cache holds every
/// hidden state; `latent` and `explicit` are left empty.
pub fn lstm_forward(params: &ModelParams, ids: &[u32]) -> Result<ForwardCache> {
    let dims = params.dims;
    check_ids(&dims, ids)?;
    let (h, d, steps) = (dims.hidden, dims.d_emb, ids.len());
    let mut cache = ForwardCache {
        ids: ids.to_vec(),
        hidden: h,
        input_gate: vec![0.0; steps * h],
        forget_gate: vec![0.0; steps * h],
        output_gate: vec![0.0; steps * h],
        candidate: vec![0.0; steps * h],
        cell: vec![0.0; steps * h],
        cell_tanh: vec![0.0; steps * h],
        states: vec![0.0; steps * h],
        latent: Vec::new(),
        explicit: Vec::new(),
    };
    let zeros = vec![0.0; h];
    let mut pre = [vec![0.0; h], vec![0.0; h], vec![0.0; h], vec![0.0; h]];
    for (t, &id) in ids.iter().enumerate() {
        let x = params.embeddings.row(id as usize);
        let (h_prev, c_prev) = if t == 0 {
            (&zeros[..], &zeros[..])
        } else {
            let r = (t - 1) * h..t * h;
            (&cache.states[r.clone()], &cache.cell[r])
        };
        for (a, gate) in pre.iter_mut().zip(&params.gates) {
            a.copy_from_slice(gate.b.as_slice());
            linalg::matvec_acc(gate.w.as_slice(), d, x, a);
            linalg::matvec_acc(gate.u.as_slice(), h, h_prev, a);
        }
        let mut c_new = vec![0.0; h];
        let mut h_new = vec![0.0; h];
        let row = t * h;
        for k in 0..h {
            let i = logistic(pre[0][k]);
            let f = logistic(pre[1][k]);
            let o = logistic(pre[2][k]);
            let g = libm::tanh(pre[3][k]);
            let c = f * c_prev[k] + i * g;
            let tc = libm::tanh(c);
            cache.input_gate[row + k] = i;
            cache.forget_gate[row + k] = f;
            cache.output_gate[row + k] = o;
            cache.candidate[row + k] = g;
            cache.cell_tanh[row + k] = tc;
            c_new[k] = c;
            h_new[k] = o * tc;
        }
        cache.cell[row..row + h].copy_from_slice(&c_new);
        cache.states[row..row + h].copy_from_slice(&h_new);
    }
    Ok(cache)
}

/// Elementwise mean of the hidden states.
pub fn mean_pool(states: &[DenseVector]) -> Result<DenseVector> {
    let first = states
        .first()
        .ok_or_else(|| SesaError::Precondition("cannot pool an empty sequence".into()))?;
    let mut acc = vec![0.0; first.len()];
    for s in states {
        if s.len() != acc.len() {
            return Err(SesaError::Dimension {
                expected: acc.len(),
                actual: s.len(),
            });
        }
        linalg::axpy(1.0, s.as_slice(), &mut acc);
    }
    let n = states.len() as f64;
    acc.iter_mut().for_each(|x| *x /= n);
    Ok(DenseVector::from_raw(acc))
}

fn mean_pool_flat(states: &[f64], hidden: usize) -> Vec<f64> {
    let mut acc = vec![0.0; hidden];
    let mut n = 0usize;
    for s in states.chunks_exact(hidden) {
        linalg::axpy(1.0, s, &mut acc);
        n += 1;
    }
    acc.iter_mut().for_each(|x| *x /= n as f64);
    acc
}

/// `P · latent`, no bias and no nonlinearity.
pub fn project(params: &ModelParams, latent: &DenseVector) -> Result<DenseVector> {
    linalg::matvec(&params.projection, latent)
}

/// Binary indicator over the skill space.
pub fn encode_profile(skills: &ProfileSkillVec, n_skills: usize) -> Result<DenseVector> {
    skills.check(n_skills)?;
    let mut v = vec![0.0; n_skills];
    for &id in skills.ids() {
        v[id] = 1.0;
    }
    Ok(DenseVector::from_raw(v))
}

pub fn score(job: &DenseVector, profile: &DenseVector, mode: ScoreMode) -> Result<f64> {
    match mode {
        ScoreMode::Dot => linalg::dot(job, profile),
        ScoreMode::Cosine => linalg::cosine(job, profile),
    }
}

/// Dot score against an indicator profile: the sum of the selected components.
pub(crate) fn score_indicator(job: &[f64], skills: &ProfileSkillVec, mode: ScoreMode) -> Result<f64> {
    let sum: f64 = skills.ids().iter().map(|&j| job[j]).sum();
    match mode {
        ScoreMode::Dot => Ok(sum),
        ScoreMode::Cosine => {
            let job_norm = libm::sqrt(linalg::dot_slices(job, job));
            let profile_norm = libm::sqrt(skills.len() as f64);
            if job_norm == 0.0 || profile_norm == 0.0 {
                return Err(SesaError::Degenerate("cosine of a zero-norm vector"));
            }
            Ok(sum / (job_norm * profile_norm))
        }
    }
}

/// Encoder, pooling and projection: the explicit representation of `ids`.
pub fn encode_job(params: &ModelParams, ids: &[u32]) -> Result<(DenseVector, ForwardCache)> {
    let mut cache = lstm_forward(params, ids)?;
    let h = params.dims.hidden;
    cache.latent = mean_pool_flat(&cache.states, h);
    let mut explicit = vec![0.0; params.dims.n_skills];
    linalg::matvec_into(params.projection.as_slice(), h, &cache.latent, &mut explicit);
    cache.explicit = explicit.clone();
    Ok((DenseVector::from_raw(explicit), cache))
}

/// Full path: score of `ids` against the profile `skills`.
pub fn forward(
    params: &ModelParams,
    ids: &[u32],
    skills: &ProfileSkillVec,
    mode: ScoreMode,
) -> Result<(f64, DenseVector, ForwardCache)> {
    skills.check(params.dims.n_skills)?;
    let (job, cache) = encode_job(params, ids)?;
    let s = score_indicator(job.as_slice(), skills, mode)?;
    Ok((s, job, cache))
}

pub fn predict(params: &ModelParams, example: &Example, mode: ScoreMode) -> Result<f64> {
    forward(params, &example.token_ids, &example.skills, mode).map(|(s, _, _)| s)
}
