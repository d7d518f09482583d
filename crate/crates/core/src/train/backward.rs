//! Reverse accumulation of `(score − label)²` through the scorer, projector,
//! mean pooling and the LSTM recurrence.

use alloc::{collections::BTreeMap, vec, vec::Vec};

use crate::{
    error::{Result, SesaError},
    linalg::{self, DenseMatrix},
    model::{Block, Dims, Example, ForwardCache, Gate, ModelParams, ScoreMode},
};

/// Shaped like [`ModelParams`]; embedding rows are sparse because a single
/// example only touches the rows of its own tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub dims: Dims,
    pub embeddings: BTreeMap<u32, Vec<f64>>,
    pub gates: [Gate; 4],
    pub projection: DenseMatrix,
}

impl Gradients {
    pub fn zeros(dims: Dims) -> Self {
        let z = ModelParams::zeros(Dims { vocab: 1, ..dims });
        Self {
            dims,
            embeddings: BTreeMap::new(),
            gates: z.gates,
            projection: z.projection,
        }
    }

    pub fn clear(&mut self) {
        self.embeddings.clear();
        for g in &mut self.gates {
            g.w.as_mut_slice().fill(0.0);
            g.u.as_mut_slice().fill(0.0);
            g.b.as_mut_slice().fill(0.0);
        }
        self.projection.as_mut_slice().fill(0.0);
    }

    /// Dense blocks in [`Block::all`] order (embeddings excluded).
    pub(crate) fn dense_blocks(&self) -> impl Iterator<Item = (Block, &[f64])> {
        Block::all().into_iter().filter(|b| *b != Block::Embeddings).map(move |b| (b, self.dense(b)))
    }

    fn dense(&self, block: Block) -> &[f64] {
        match block {
            Block::GateInput(g) => self.gates[g as usize].w.as_slice(),
            Block::GateRecurrent(g) => self.gates[g as usize].u.as_slice(),
            Block::GateBias(g) => self.gates[g as usize].b.as_slice(),
            Block::Projection => self.projection.as_slice(),
            Block::Embeddings => &[],
        }
    }

    pub fn block_mut(&mut self, block: Block) -> Option<&mut [f64]> {
        match block {
            Block::GateInput(g) => Some(self.gates[g as usize].w.as_mut_slice()),
            Block::GateRecurrent(g) => Some(self.gates[g as usize].u.as_mut_slice()),
            Block::GateBias(g) => Some(self.gates[g as usize].b.as_mut_slice()),
            Block::Projection => Some(self.projection.as_mut_slice()),
            Block::Embeddings => None,
        }
    }

    /// Gradient of the flat parameter `index` inside `block`.
    pub fn get(&self, block: Block, index: usize) -> f64 {
        match block {
            Block::Embeddings => {
                let d = self.dims.d_emb;
                self.embeddings
                    .get(&((index / d) as u32))
                    .map_or(0.0, |row| row[index % d])
            }
            b => self.dense(b)[index],
        }
    }

    pub fn norm_sq(&self) -> f64 {
        let dense: f64 = self.dense_blocks().map(|(_, s)| linalg::dot_slices(s, s)).sum();
        let sparse: f64 = self.embeddings.values().map(|r| linalg::dot_slices(r, r)).sum();
        dense + sparse
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    pub fn scale(&mut self, alpha: f64) {
        for b in Block::all() {
            if let Some(s) = self.block_mut(b) {
                s.iter_mut().for_each(|x| *x *= alpha);
            }
        }
        for row in self.embeddings.values_mut() {
            row.iter_mut().for_each(|x| *x *= alpha);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.dense_blocks().all(|(_, s)| s.iter().all(|&x| x == 0.0))
            && self.embeddings.values().all(|r| r.iter().all(|&x| x == 0.0))
    }
}

/// d score / d explicit-rep for an indicator profile.
fn score_gradient(cache: &ForwardCache, example: &Example, score: f64, mode: ScoreMode) -> Result<Vec<f64>> {
    let n = cache.explicit.len();
    let mut grad = vec![0.0; n];
    match mode {
        ScoreMode::Dot => {
            for &j in example.skills.ids() {
                grad[j] = 1.0;
            }
        }
        ScoreMode::Cosine => {
            let job = &cache.explicit;
            let job_norm_sq = linalg::dot_slices(job, job);
            let job_norm = libm::sqrt(job_norm_sq);
            let profile_norm = libm::sqrt(example.skills.len() as f64);
            if job_norm == 0.0 || profile_norm == 0.0 {
                return Err(SesaError::Degenerate("cosine of a zero-norm vector"));
            }
            for (g, x) in grad.iter_mut().zip(job) {
                *g = -score * x / job_norm_sq;
            }
            for &j in example.skills.ids() {
                grad[j] += 1.0 / (job_norm * profile_norm);
            }
        }
    }
    Ok(grad)
}

fn check_cache(params: &ModelParams, example: &Example, cache: &ForwardCache) -> Result<()> {
    let d = params.dims;
    if cache.ids != example.token_ids {
        return Err(SesaError::Consistency("token ids differ from the example"));
    }
    if cache.hidden != d.hidden || cache.latent.len() != d.hidden {
        return Err(SesaError::Consistency("hidden size differs from the parameters"));
    }
    if cache.explicit.len() != d.n_skills {
        return Err(SesaError::Consistency("explicit representation has the wrong length"));
    }
    if cache.states.len() != cache.steps() * d.hidden {
        return Err(SesaError::Consistency("state count differs from the step count"));
    }
    example.skills.check(d.n_skills)
}

/// Adds `weight · ∇(score − label)²` into `grads`.
#[allow(clippy::too_many_arguments)]
pub fn accumulate_backward(
    params: &ModelParams,
    example: &Example,
    cache: &ForwardCache,
    score: f64,
    mode: ScoreMode,
    freeze_embeddings: bool,
    weight: f64,
    grads: &mut Gradients,
) -> Result<()> {
    check_cache(params, example, cache)?;
    let upstream = 2.0 * (score - example.target()) * weight;
    if upstream == 0.0 {
        return Ok(());
    }
    let dims = params.dims;
    let (h, d) = (dims.hidden, dims.d_emb);
    let steps = cache.steps();

    let mut d_explicit = score_gradient(cache, example, score, mode)?;
    d_explicit.iter_mut().for_each(|g| *g *= upstream);

    linalg::outer_acc(grads.projection.as_mut_slice(), h, &d_explicit, &cache.latent);
    let mut d_latent = vec![0.0; h];
    linalg::matvec_t_acc(params.projection.as_slice(), h, &d_explicit, &mut d_latent);
    let inv_steps = 1.0 / steps as f64;
    d_latent.iter_mut().for_each(|g| *g *= inv_steps);

    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut dh = vec![0.0; h];
    let mut d_pre = [vec![0.0; h], vec![0.0; h], vec![0.0; h], vec![0.0; h]];
    let mut dx = vec![0.0; d];

    for t in (0..steps).rev() {
        let row = t * h;
        for k in 0..h {
            dh[k] = d_latent[k] + dh_next[k];
        }
        for k in 0..h {
            let i = cache.input_gate[row + k];
            let f = cache.forget_gate[row + k];
            let o = cache.output_gate[row + k];
            let g = cache.candidate[row + k];
            let tc = cache.cell_tanh[row + k];
            let c_prev = if t > 0 { cache.cell[row - h + k] } else { 0.0 };

            let dc = dh[k] * o * (1.0 - tc * tc) + dc_next[k];
            d_pre[0][k] = dc * g * i * (1.0 - i);
            d_pre[1][k] = dc * c_prev * f * (1.0 - f);
            d_pre[2][k] = dh[k] * tc * o * (1.0 - o);
            d_pre[3][k] = dc * i * (1.0 - g * g);
            dc_next[k] = dc * f;
        }

        let id = cache.ids[t];
        let x = params.embeddings.row(id as usize);
        dh_next.fill(0.0);
        dx.fill(0.0);
        for (gi, gate) in params.gates.iter().enumerate() {
            let da = &d_pre[gi];
            let grad = &mut grads.gates[gi];
            linalg::outer_acc(grad.w.as_mut_slice(), d, da, x);
            if t > 0 {
                linalg::outer_acc(grad.u.as_mut_slice(), h, da, cache.state(t - 1));
            }
            linalg::axpy(1.0, da, grad.b.as_mut_slice());
            if !freeze_embeddings {
                linalg::matvec_t_acc(gate.w.as_slice(), d, da, &mut dx);
            }
            linalg::matvec_t_acc(gate.u.as_slice(), h, da, &mut dh_next);
        }
        if !freeze_embeddings {
            let row = grads.embeddings.entry(id).or_insert_with(|| vec![0.0; d]);
            linalg::axpy(1.0, &dx, row);
        }
    }
    Ok(())
}

/// Exact gradient of `(score − label)²` for one example.
pub fn backward(
    params: &ModelParams,
    example: &Example,
    cache: &ForwardCache,
    score: f64,
    mode: ScoreMode,
    freeze_embeddings: bool,
) -> Result<Gradients> {
    let mut grads = Gradients::zeros(params.dims);
    accumulate_backward(params, example, cache, score, mode, freeze_embeddings, 1.0, &mut grads)?;
    Ok(grads)
}
