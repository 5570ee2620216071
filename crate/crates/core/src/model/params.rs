use crate::error::{Result, StnetError};
use crate::model::StnetConfig;
use crate::numeric::{xavier_uniform, Matrix, Rng};

/// Weights of one attention + feed-forward block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockParams {
    pub query: Matrix,
    pub key: Matrix,
    pub value: Matrix,
    /// Mixes the concatenated heads.
    pub output: Matrix,
    pub norm1_gain: Matrix,
    pub norm1_bias: Matrix,
    pub ffn_w1: Matrix,
    pub ffn_b1: Matrix,
    pub ffn_w2: Matrix,
    pub ffn_b2: Matrix,
    pub norm2_gain: Matrix,
    pub norm2_bias: Matrix,
}

/// All learnable tensors of the network.
#[derive(Clone, Debug, PartialEq)]
pub struct StnetParams {
    pub embed_weight: Matrix,
    pub embed_bias: Matrix,
    pub blocks: Vec<BlockParams>,
    pub head_weight: Matrix,
    pub head_bias: Matrix,
}

const BLOCK_TENSORS: [&str; 12] = [
    "query",
    "key",
    "value",
    "output",
    "norm1.gain",
    "norm1.bias",
    "ffn.w1",
    "ffn.b1",
    "ffn.w2",
    "ffn.b2",
    "norm2.gain",
    "norm2.bias",
];

impl BlockParams {
    fn tensors(&self) -> [&Matrix; 12] {
        [
            &self.query,
            &self.key,
            &self.value,
            &self.output,
            &self.norm1_gain,
            &self.norm1_bias,
            &self.ffn_w1,
            &self.ffn_b1,
            &self.ffn_w2,
            &self.ffn_b2,
            &self.norm2_gain,
            &self.norm2_bias,
        ]
    }

    fn tensors_mut(&mut self) -> [&mut Matrix; 12] {
        [
            &mut self.query,
            &mut self.key,
            &mut self.value,
            &mut self.output,
            &mut self.norm1_gain,
            &mut self.norm1_bias,
            &mut self.ffn_w1,
            &mut self.ffn_b1,
            &mut self.ffn_w2,
            &mut self.ffn_b2,
            &mut self.norm2_gain,
            &mut self.norm2_bias,
        ]
    }
}

impl StnetParams {
    /// Glorot-uniform weights, zero biases, unit norm gains.
    pub fn init(config: &StnetConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        let (z, f, h) = (config.input_width, config.model_width, config.ffn_width);
        let embed_weight = xavier_uniform(z + 1, f, rng);
        let blocks = (0..config.channels)
            .map(|_| BlockParams {
                query: xavier_uniform(f, f, rng),
                key: xavier_uniform(f, f, rng),
                value: xavier_uniform(f, f, rng),
                output: xavier_uniform(f, f, rng),
                norm1_gain: Matrix::filled(1, f, 1.0),
                norm1_bias: Matrix::zeros(1, f),
                ffn_w1: xavier_uniform(f, h, rng),
                ffn_b1: Matrix::zeros(1, h),
                ffn_w2: xavier_uniform(h, f, rng),
                ffn_b2: Matrix::zeros(1, f),
                norm2_gain: Matrix::filled(1, f, 1.0),
                norm2_bias: Matrix::zeros(1, f),
            })
            .collect();
        Ok(StnetParams {
            embed_weight,
            embed_bias: Matrix::zeros(1, f),
            blocks,
            head_weight: xavier_uniform(f, z, rng),
            head_bias: Matrix::zeros(1, z),
        })
    }

    /// Same shapes, all zeros.
    pub fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        for t in out.tensors_mut() {
            t.scale_assign(0.0);
        }
        out
    }

    /// Tensors in canonical order with their names.
    pub fn named_tensors(&self) -> Vec<(String, &Matrix)> {
        let mut out = vec![
            ("embed.weight".to_string(), &self.embed_weight),
            ("embed.bias".to_string(), &self.embed_bias),
        ];
        for (c, b) in self.blocks.iter().enumerate() {
            for (name, t) in BLOCK_TENSORS.iter().zip(b.tensors()) {
                out.push((format!("block{c}.{name}"), t));
            }
        }
        out.push(("head.weight".to_string(), &self.head_weight));
        out.push(("head.bias".to_string(), &self.head_bias));
        out
    }

    pub fn tensors(&self) -> Vec<&Matrix> {
        self.named_tensors().into_iter().map(|(_, t)| t).collect()
    }

    /// Mutable tensors in the same order as [`StnetParams::named_tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = vec![&mut self.embed_weight, &mut self.embed_bias];
        for b in &mut self.blocks {
            out.extend(b.tensors_mut());
        }
        out.push(&mut self.head_weight);
        out.push(&mut self.head_bias);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }

    /// `self += other · factor`
    pub fn add_scaled(&mut self, other: &StnetParams, factor: f64) -> Result<()> {
        let others = other.tensors();
        let mine = self.tensors_mut();
        if mine.len() != others.len() {
            return Err(StnetError::State("parameter sets differ in tensor count".into()));
        }
        for (a, b) in mine.into_iter().zip(others) {
            if a.shape() != b.shape() {
                return Err(StnetError::dim("add_scaled", a.shape(), b.shape()));
            }
            for (x, y) in a.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *x += y * factor;
            }
        }
        Ok(())
    }

    /// Checks every tensor shape against `config`.
    pub fn check_config(&self, config: &StnetConfig) -> Result<()> {
        let expected = StnetParams::shape_table(config);
        let actual: Vec<(usize, usize)> = self.tensors().iter().map(|t| t.shape()).collect();
        if expected != actual {
            return Err(StnetError::Config(format!(
                "parameters do not match configuration ({} tensors expected, {} present)",
                expected.len(),
                actual.len()
            )));
        }
        Ok(())
    }

    /// Expected tensor shapes in canonical order.
    pub fn shape_table(config: &StnetConfig) -> Vec<(usize, usize)> {
        let (z, f, h) = (config.input_width, config.model_width, config.ffn_width);
        let mut shapes = vec![(z + 1, f), (1, f)];
        for _ in 0..config.channels {
            shapes.extend([
                (f, f),
                (f, f),
                (f, f),
                (f, f),
                (1, f),
                (1, f),
                (f, h),
                (1, h),
                (h, f),
                (1, f),
                (1, f),
                (1, f),
            ]);
        }
        shapes.push((f, z));
        shapes.push((1, z));
        shapes
    }
}
