//! Small from-scratch CNN classifier over 2x160 I/Q frame tensors.
//!
//! Architecture: conv (50 filters, 1x7, valid) -> ReLU -> conv (50 filters,
//! 50x2x7, valid) -> ReLU -> fully connected 256 -> ReLU -> fully connected
//! N -> softmax. Convolutions are evaluated as im2col + GEMM. Training runs
//! in single precision with the Adam optimizer; a double-precision path
//! backs the finite-difference gradient checks.

use std::io::{Read as _, Write as _};
use std::path::Path;

use ndarray::{Array1, Array2, NdFloat};

use crate::dataset::FrameTensor;
use crate::numerics::RandomStream;
use crate::{Error, Result};

/// Input rows (real / imaginary).
pub const INPUT_ROWS: usize = 2;
/// Input samples per row.
pub const INPUT_LEN: usize = 160;
/// Convolution kernel width.
pub const KERNEL: usize = 7;
/// Filters in each convolution layer.
pub const CONV1_OUT: usize = 50;
pub const CONV2_OUT: usize = 50;
/// Width after conv1 (valid padding): 160 - 7 + 1.
pub const LEN1: usize = INPUT_LEN - KERNEL + 1;
/// Width after conv2: 154 - 7 + 1.
pub const LEN2: usize = LEN1 - KERNEL + 1;
/// conv2 receptive patch: 50 channels x 2 rows x 7 taps.
pub const CONV2_IN: usize = CONV1_OUT * INPUT_ROWS * KERNEL;
/// Flattened feature dimension: 50 x 1 x 148.
pub const FLAT_DIM: usize = CONV2_OUT * LEN2;
/// First fully connected layer width.
pub const FC1_DIM: usize = 256;

/// All trainable parameters at a chosen precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Params<F> {
    /// 50 x 7 (one-channel 1x7 filters).
    pub conv1_w: Array2<F>,
    pub conv1_b: Array1<F>,
    /// 50 x 700, patch index = channel·14 + row·7 + tap.
    pub conv2_w: Array2<F>,
    pub conv2_b: Array1<F>,
    /// 256 x 7400.
    pub fc1_w: Array2<F>,
    pub fc1_b: Array1<F>,
    /// N x 256.
    pub fc2_w: Array2<F>,
    pub fc2_b: Array1<F>,
}

impl<F: NdFloat> Params<F> {
    fn zeros(n_classes: usize) -> Self {
        Self {
            conv1_w: Array2::zeros((CONV1_OUT, KERNEL)),
            conv1_b: Array1::zeros(CONV1_OUT),
            conv2_w: Array2::zeros((CONV2_OUT, CONV2_IN)),
            conv2_b: Array1::zeros(CONV2_OUT),
            fc1_w: Array2::zeros((FC1_DIM, FLAT_DIM)),
            fc1_b: Array1::zeros(FC1_DIM),
            fc2_w: Array2::zeros((n_classes, FC1_DIM)),
            fc2_b: Array1::zeros(n_classes),
        }
    }

    /// Mutable views over every parameter tensor, in a fixed order.
    pub fn fields_mut(&mut self) -> [&mut [F]; 8] {
        [
            self.conv1_w.as_slice_mut().unwrap(),
            self.conv1_b.as_slice_mut().unwrap(),
            self.conv2_w.as_slice_mut().unwrap(),
            self.conv2_b.as_slice_mut().unwrap(),
            self.fc1_w.as_slice_mut().unwrap(),
            self.fc1_b.as_slice_mut().unwrap(),
            self.fc2_w.as_slice_mut().unwrap(),
            self.fc2_b.as_slice_mut().unwrap(),
        ]
    }

    /// Immutable views over every parameter tensor, in the same order.
    pub fn fields(&self) -> [&[F]; 8] {
        [
            self.conv1_w.as_slice().unwrap(),
            self.conv1_b.as_slice().unwrap(),
            self.conv2_w.as_slice().unwrap(),
            self.conv2_b.as_slice().unwrap(),
            self.fc1_w.as_slice().unwrap(),
            self.fc1_b.as_slice().unwrap(),
            self.fc2_w.as_slice().unwrap(),
            self.fc2_b.as_slice().unwrap(),
        ]
    }

    pub fn n_classes(&self) -> usize {
        self.fc2_w.nrows()
    }
}

impl Params<f32> {
    pub fn to_f64(&self) -> Params<f64> {
        Params {
            conv1_w: self.conv1_w.mapv(f64::from),
            conv1_b: self.conv1_b.mapv(f64::from),
            conv2_w: self.conv2_w.mapv(f64::from),
            conv2_b: self.conv2_b.mapv(f64::from),
            fc1_w: self.fc1_w.mapv(f64::from),
            fc1_b: self.fc1_b.mapv(f64::from),
            fc2_w: self.fc2_w.mapv(f64::from),
            fc2_b: self.fc2_b.mapv(f64::from),
        }
    }
}

/// The classifier: single-precision parameters plus the class count.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub params: Params<f32>,
    pub n_classes: usize,
}

impl ClassifierModel {
    /// Zero-mean Gaussian init with variance 2/fan_in; zero biases.
    pub fn new(n_classes: usize, seed: u64) -> Self {
        assert!(n_classes >= 2, "need at least two classes");
        let stream = RandomStream::new(seed, "cnn.init");
        let mut params = Params::<f32>::zeros(n_classes);
        let fans = [KERNEL, CONV2_IN, FLAT_DIM, FC1_DIM];
        let weights = [
            &mut params.conv1_w,
            &mut params.conv2_w,
            &mut params.fc1_w,
            &mut params.fc2_w,
        ];
        for (i, w) in weights.into_iter().enumerate() {
            let std = (2.0 / fans[i] as f64).sqrt();
            let draws =
                crate::numerics::gaussian_real(&stream.child(i as u64), w.len(), 0.0, std);
            for (dst, src) in w.iter_mut().zip(draws) {
                *dst = src as f32;
            }
        }
        Self { params, n_classes }
    }

    /// All-zero parameters (degenerate uniform classifier).
    pub fn zeroed(n_classes: usize) -> Self {
        Self {
            params: Params::zeros(n_classes),
            n_classes,
        }
    }
}

/// Adam hyperparameters and training controls.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement tolerated before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 64,
            max_epochs: 50,
            patience: 5,
            seed: 0,
        }
    }
}

/// One line of training history.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_accuracy: f64,
}

/// Batched input: (B, 320) rows, layout `row·160 + column` of the 2x160
/// tensor.
fn pack_batch<F: NdFloat>(tensors: &[&FrameTensor]) -> Array2<F> {
    let b = tensors.len();
    let mut x = Array2::<F>::zeros((b, INPUT_ROWS * INPUT_LEN));
    for (i, t) in tensors.iter().enumerate() {
        debug_assert_eq!((t.data.nrows(), t.data.ncols()), (INPUT_ROWS, INPUT_LEN));
        for r in 0..INPUT_ROWS {
            for c in 0..INPUT_LEN {
                x[(i, r * INPUT_LEN + c)] = F::from(t.data[(r, c)]).unwrap();
            }
        }
    }
    x
}

struct Cache<F> {
    x1col: Array2<F>,  // (B·2·154, 7)
    a1: Array2<F>,     // (B·2·154, 50), post-ReLU
    x2col: Array2<F>,  // (B·148, 700)
    a2: Array2<F>,     // (B·148, 50), post-ReLU
    flat: Array2<F>,   // (B, 7400), channel-major
    afc1: Array2<F>,   // (B, 256), post-ReLU
    probs: Array2<F>,  // (B, N)
    loss: F,
}

fn forward_batch<F: NdFloat>(p: &Params<F>, x: &Array2<F>, labels: Option<&[usize]>) -> Cache<F> {
    let b = x.nrows();
    // conv1 as im2col + GEMM
    let mut x1col = Array2::<F>::zeros((b * INPUT_ROWS * LEN1, KERNEL));
    for i in 0..b {
        for r in 0..INPUT_ROWS {
            for c in 0..LEN1 {
                let row = (i * INPUT_ROWS + r) * LEN1 + c;
                for k in 0..KERNEL {
                    x1col[(row, k)] = x[(i, r * INPUT_LEN + c + k)];
                }
            }
        }
    }
    let mut a1 = x1col.dot(&p.conv1_w.t()); // (B·2·154, 50)
    for mut row in a1.rows_mut() {
        row += &p.conv1_b;
    }
    a1.mapv_inplace(|v| v.max(F::zero()));

    // conv2 patches: channel-major index f·14 + r·7 + k
    let mut x2col = Array2::<F>::zeros((b * LEN2, CONV2_IN));
    for i in 0..b {
        for c in 0..LEN2 {
            let row = i * LEN2 + c;
            for f in 0..CONV1_OUT {
                for r in 0..INPUT_ROWS {
                    let src = (i * INPUT_ROWS + r) * LEN1 + c;
                    let dst = f * (INPUT_ROWS * KERNEL) + r * KERNEL;
                    for k in 0..KERNEL {
                        x2col[(row, dst + k)] = a1[(src + k, f)];
                    }
                }
            }
        }
    }
    let mut a2 = x2col.dot(&p.conv2_w.t()); // (B·148, 50)
    for mut row in a2.rows_mut() {
        row += &p.conv2_b;
    }
    a2.mapv_inplace(|v| v.max(F::zero()));

    // flatten channel-major: flat[i, g·148 + c] = a2[i·148 + c, g]
    let mut flat = Array2::<F>::zeros((b, FLAT_DIM));
    for i in 0..b {
        for c in 0..LEN2 {
            for g in 0..CONV2_OUT {
                flat[(i, g * LEN2 + c)] = a2[(i * LEN2 + c, g)];
            }
        }
    }

    let mut afc1 = flat.dot(&p.fc1_w.t());
    for mut row in afc1.rows_mut() {
        row += &p.fc1_b;
    }
    afc1.mapv_inplace(|v| v.max(F::zero()));

    let mut logits = afc1.dot(&p.fc2_w.t());
    for mut row in logits.rows_mut() {
        row += &p.fc2_b;
    }

    // log-sum-exp softmax and mean cross-entropy
    let n = p.n_classes();
    let mut probs = Array2::<F>::zeros((b, n));
    let mut loss = F::zero();
    for i in 0..b {
        let mut m = logits[(i, 0)];
        for j in 1..n {
            m = m.max(logits[(i, j)]);
        }
        let mut sum = F::zero();
        for j in 0..n {
            sum = sum + (logits[(i, j)] - m).exp();
        }
        let lse = m + sum.ln();
        for j in 0..n {
            probs[(i, j)] = (logits[(i, j)] - lse).exp();
        }
        if let Some(ys) = labels {
            loss = loss + lse - logits[(i, ys[i])];
        }
    }
    loss = loss / F::from(b).unwrap();
    Cache {
        x1col,
        a1,
        x2col,
        a2,
        flat,
        afc1,
        probs,
        loss,
    }
}

fn backward_batch<F: NdFloat>(p: &Params<F>, cache: &Cache<F>, labels: &[usize]) -> Params<F> {
    let b = cache.probs.nrows();
    let scale = F::one() / F::from(b).unwrap();
    let mut grads = Params::<F>::zeros(p.n_classes());

    // dlogits = (softmax - onehot)/B
    let mut dlogits = cache.probs.clone();
    for (i, &y) in labels.iter().enumerate() {
        dlogits[(i, y)] = dlogits[(i, y)] - F::one();
    }
    dlogits.mapv_inplace(|v| v * scale);

    grads.fc2_w = dlogits.t().dot(&cache.afc1);
    grads.fc2_b = dlogits.sum_axis(ndarray::Axis(0));

    let mut dafc1 = dlogits.dot(&p.fc2_w);
    ndarray::Zip::from(&mut dafc1)
        .and(&cache.afc1)
        .for_each(|d, &a| {
            if a <= F::zero() {
                *d = F::zero();
            }
        });

    grads.fc1_w = dafc1.t().dot(&cache.flat);
    grads.fc1_b = dafc1.sum_axis(ndarray::Axis(0));

    let dflat = dafc1.dot(&p.fc1_w); // (B, 7400)

    // un-flatten to (B·148, 50) and apply conv2's ReLU mask
    let mut da2 = Array2::<F>::zeros((b * LEN2, CONV2_OUT));
    for i in 0..b {
        for c in 0..LEN2 {
            for g in 0..CONV2_OUT {
                if cache.a2[(i * LEN2 + c, g)] > F::zero() {
                    da2[(i * LEN2 + c, g)] = dflat[(i, g * LEN2 + c)];
                }
            }
        }
    }

    grads.conv2_w = da2.t().dot(&cache.x2col);
    grads.conv2_b = da2.sum_axis(ndarray::Axis(0));

    // scatter dX2col back onto conv1 activations
    let dx2col = da2.dot(&p.conv2_w); // (B·148, 700)
    let mut da1 = Array2::<F>::zeros((b * INPUT_ROWS * LEN1, CONV1_OUT));
    for i in 0..b {
        for c in 0..LEN2 {
            let row = i * LEN2 + c;
            for f in 0..CONV1_OUT {
                for r in 0..INPUT_ROWS {
                    let dst = (i * INPUT_ROWS + r) * LEN1 + c;
                    let src = f * (INPUT_ROWS * KERNEL) + r * KERNEL;
                    for k in 0..KERNEL {
                        da1[(dst + k, f)] = da1[(dst + k, f)] + dx2col[(row, src + k)];
                    }
                }
            }
        }
    }
    ndarray::Zip::from(&mut da1).and(&cache.a1).for_each(|d, &a| {
        if a <= F::zero() {
            *d = F::zero();
        }
    });

    grads.conv1_w = da1.t().dot(&cache.x1col);
    grads.conv1_b = da1.sum_axis(ndarray::Axis(0));
    grads
}

/// Class probabilities for one tensor, computed in double precision.
pub fn forward(model: &ClassifierModel, x: &FrameTensor) -> Result<Vec<f64>> {
    if x.data.nrows() != INPUT_ROWS || x.data.ncols() != INPUT_LEN {
        return Err(Error::ShapeMismatch(format!(
            "expected {INPUT_ROWS}x{INPUT_LEN} tensor, got {}x{}",
            x.data.nrows(),
            x.data.ncols()
        )));
    }
    let p = model.params.to_f64();
    let xb = pack_batch::<f64>(&[x]);
    let cache = forward_batch(&p, &xb, None);
    Ok(cache.probs.row(0).to_vec())
}

/// Mean cross-entropy and full gradients over a batch, at precision `F`.
pub fn loss_and_gradients_at<F: NdFloat>(
    params: &Params<F>,
    tensors: &[&FrameTensor],
    labels: &[usize],
) -> Result<(f64, Params<F>)> {
    if tensors.is_empty() || tensors.len() != labels.len() {
        return Err(Error::ShapeMismatch("empty batch or label mismatch".into()));
    }
    let n = params.n_classes();
    if let Some(&bad) = labels.iter().find(|&&y| y >= n) {
        return Err(Error::ShapeMismatch(format!("label {bad} out of range 0..{n}")));
    }
    let x = pack_batch::<F>(tensors);
    let cache = forward_batch(params, &x, Some(labels));
    let grads = backward_batch(params, &cache, labels);
    Ok((cache.loss.to_f64().unwrap(), grads))
}

/// Single-precision loss/gradients (the training path).
pub fn loss_and_gradients(
    model: &ClassifierModel,
    tensors: &[&FrameTensor],
    labels: &[usize],
) -> Result<(f64, Params<f32>)> {
    loss_and_gradients_at(&model.params, tensors, labels)
}

/// Adam training with early stopping; returns the best-validation snapshot
/// and the per-epoch history. Deterministic given `cfg.seed`: examples are
/// first brought into a canonical order (so only the seed, not the input
/// file order, controls shuffling).
pub fn train(
    model: &ClassifierModel,
    train_x: &[FrameTensor],
    train_y: &[usize],
    val_x: &[FrameTensor],
    val_y: &[usize],
    cfg: &TrainConfig,
) -> Result<(ClassifierModel, Vec<EpochRecord>)> {
    use rand::seq::SliceRandom;
    if train_x.is_empty() || train_x.len() != train_y.len() {
        return Err(Error::EmptyDataset("empty or inconsistent training set".into()));
    }
    if val_x.is_empty() || val_x.len() != val_y.len() {
        return Err(Error::EmptyDataset("empty or inconsistent validation set".into()));
    }
    assert!(cfg.learning_rate > 0.0 && cfg.batch_size >= 1);

    // canonical ordering: label first, then lexicographic tensor content
    let mut order: Vec<usize> = (0..train_x.len()).collect();
    order.sort_by(|&a, &b| {
        train_y[a].cmp(&train_y[b]).then_with(|| {
            train_x[a]
                .data
                .iter()
                .zip(train_x[b].data.iter())
                .find_map(|(u, v)| {
                    let ord = u.total_cmp(v);
                    (ord != std::cmp::Ordering::Equal).then_some(ord)
                })
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });

    let stream = RandomStream::new(cfg.seed, "cnn.train");
    let mut current = model.clone();
    let mut m = Params::<f32>::zeros(model.n_classes);
    let mut v = Params::<f32>::zeros(model.n_classes);
    let mut t_step = 0u64;
    let mut best = current.clone();
    let mut best_acc = f64::NEG_INFINITY;
    let mut streak = 0usize;
    let mut history = Vec::new();

    for epoch in 0..cfg.max_epochs {
        let mut idx = order.clone();
        idx.shuffle(&mut stream.domain("shuffle").child(epoch as u64).rng());
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in idx.chunks(cfg.batch_size) {
            let tensors: Vec<&FrameTensor> = chunk.iter().map(|&i| &train_x[i]).collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| train_y[i]).collect();
            let (loss, grads) = loss_and_gradients(&current, &tensors, &labels)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            loss_sum += loss;
            batches += 1;
            t_step += 1;
            adam_step(&mut current.params, &grads, &mut m, &mut v, t_step, cfg);
        }
        // ReLU clamps hide NaN activations, so also confirm the parameters
        // themselves are still finite after a full epoch of updates
        if current
            .params
            .fields()
            .iter()
            .any(|f| f.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Diverged { epoch });
        }
        let train_loss = loss_sum / batches as f64;
        let (val_accuracy, _) = evaluate(&current, val_x, val_y)?;
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_accuracy,
        });
        if val_accuracy > best_acc {
            best_acc = val_accuracy;
            best = current.clone();
            streak = 0;
        } else {
            streak += 1;
            if streak > cfg.patience {
                break;
            }
        }
    }
    Ok((best, history))
}

fn adam_step(
    params: &mut Params<f32>,
    grads: &Params<f32>,
    m: &mut Params<f32>,
    v: &mut Params<f32>,
    t: u64,
    cfg: &TrainConfig,
) {
    let b1 = cfg.beta1 as f32;
    let b2 = cfg.beta2 as f32;
    let lr = cfg.learning_rate as f32;
    let eps = cfg.epsilon as f32;
    let corr1 = 1.0 - (cfg.beta1 as f32).powi(t as i32);
    let corr2 = 1.0 - (cfg.beta2 as f32).powi(t as i32);
    let gp = grads.fields();
    let mp = m.fields_mut();
    let vp = v.fields_mut();
    let pp = params.fields_mut();
    for (((p_f, g_f), m_f), v_f) in pp.into_iter().zip(gp).zip(mp).zip(vp) {
        for i in 0..p_f.len() {
            let g = g_f[i];
            m_f[i] = b1 * m_f[i] + (1.0 - b1) * g;
            v_f[i] = b2 * v_f[i] + (1.0 - b2) * g * g;
            let mhat = m_f[i] / corr1;
            let vhat = v_f[i] / corr2;
            p_f[i] -= lr * mhat / (vhat.sqrt() + eps);
        }
    }
}

/// Accuracy in percent plus the NxN confusion matrix (rows = true class).
pub fn evaluate(
    model: &ClassifierModel,
    tensors: &[FrameTensor],
    labels: &[usize],
) -> Result<(f64, Vec<Vec<usize>>)> {
    if tensors.is_empty() || tensors.len() != labels.len() {
        return Err(Error::EmptyDataset("empty or inconsistent evaluation set".into()));
    }
    let n = model.n_classes;
    let mut confusion = vec![vec![0usize; n]; n];
    let mut correct = 0usize;
    for chunk_start in (0..tensors.len()).step_by(256) {
        let end = (chunk_start + 256).min(tensors.len());
        let batch: Vec<&FrameTensor> = tensors[chunk_start..end].iter().collect();
        let x = pack_batch::<f32>(&batch);
        let cache = forward_batch(&model.params, &x, None);
        for (i, global) in (chunk_start..end).enumerate() {
            let row = cache.probs.row(i);
            let mut arg = 0usize;
            for j in 1..n {
                if row[j] > row[arg] {
                    arg = j;
                }
            }
            confusion[labels[global]][arg] += 1;
            if arg == labels[global] {
                correct += 1;
            }
        }
    }
    Ok((100.0 * correct as f64 / tensors.len() as f64, confusion))
}

/// Checkpoint magic.
pub const MODEL_MAGIC: &[u8; 8] = b"RFFPNN01";

/// Versioned binary checkpoint: magic, u32 tensor count, per-tensor shape
/// table (u32 rank + u32 dims), then all values as f32 LE in table order.
pub fn save_model(path: &Path, model: &ClassifierModel) -> Result<()> {
    let p = &model.params;
    let shapes: [(&[usize], &[f32]); 8] = [
        (&[CONV1_OUT, KERNEL], p.conv1_w.as_slice().unwrap()),
        (&[CONV1_OUT], p.conv1_b.as_slice().unwrap()),
        (&[CONV2_OUT, CONV2_IN], p.conv2_w.as_slice().unwrap()),
        (&[CONV2_OUT], p.conv2_b.as_slice().unwrap()),
        (&[FC1_DIM, FLAT_DIM], p.fc1_w.as_slice().unwrap()),
        (&[FC1_DIM], p.fc1_b.as_slice().unwrap()),
        (&[model.n_classes, FC1_DIM], p.fc2_w.as_slice().unwrap()),
        (&[model.n_classes], p.fc2_b.as_slice().unwrap()),
    ];
    let mut buf = Vec::new();
    buf.extend_from_slice(MODEL_MAGIC);
    buf.extend_from_slice(&(shapes.len() as u32).to_le_bytes());
    for (dims, _) in &shapes {
        buf.extend_from_slice(&(dims.len() as u32).to_le_bytes());
        for &d in *dims {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
    }
    for (_, data) in &shapes {
        for &x in *data {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ClassifierModel> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut off = 0usize;
    let take = |off: &mut usize, n: usize| -> Result<&[u8]> {
        if bytes.len() < *off + n {
            return Err(Error::BadFormat("truncated model file".into()));
        }
        let s = &bytes[*off..*off + n];
        *off += n;
        Ok(s)
    };
    if take(&mut off, 8)? != MODEL_MAGIC {
        return Err(Error::BadFormat("bad model magic".into()));
    }
    let u32_of = |b: &[u8]| u32::from_le_bytes(b.try_into().unwrap()) as usize;
    let count = u32_of(take(&mut off, 4)?);
    if count != 8 {
        return Err(Error::BadFormat(format!("expected 8 tensors, found {count}")));
    }
    let mut dims_list = Vec::with_capacity(count);
    for _ in 0..count {
        let rank = u32_of(take(&mut off, 4)?);
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(u32_of(take(&mut off, 4)?));
        }
        dims_list.push(dims);
    }
    let n_classes = *dims_list[6]
        .first()
        .ok_or_else(|| Error::BadFormat("missing fc2 shape".into()))?;
    let expect: [Vec<usize>; 8] = [
        vec![CONV1_OUT, KERNEL],
        vec![CONV1_OUT],
        vec![CONV2_OUT, CONV2_IN],
        vec![CONV2_OUT],
        vec![FC1_DIM, FLAT_DIM],
        vec![FC1_DIM],
        vec![n_classes, FC1_DIM],
        vec![n_classes],
    ];
    if dims_list != expect {
        return Err(Error::BadFormat("unexpected tensor shapes".into()));
    }
    let mut read_tensor = |dims: &[usize]| -> Result<Vec<f32>> {
        let len: usize = dims.iter().product();
        let raw = take(&mut off, 4 * len)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    };
    let params = Params::<f32> {
        conv1_w: Array2::from_shape_vec((CONV1_OUT, KERNEL), read_tensor(&expect[0])?).unwrap(),
        conv1_b: Array1::from_vec(read_tensor(&expect[1])?),
        conv2_w: Array2::from_shape_vec((CONV2_OUT, CONV2_IN), read_tensor(&expect[2])?).unwrap(),
        conv2_b: Array1::from_vec(read_tensor(&expect[3])?),
        fc1_w: Array2::from_shape_vec((FC1_DIM, FLAT_DIM), read_tensor(&expect[4])?).unwrap(),
        fc1_b: Array1::from_vec(read_tensor(&expect[5])?),
        fc2_w: Array2::from_shape_vec((n_classes, FC1_DIM), read_tensor(&expect[6])?).unwrap(),
        fc2_b: Array1::from_vec(read_tensor(&expect[7])?),
    };
    Ok(ClassifierModel { params, n_classes })
}

/// Training history as CSV: `epoch,train_loss,val_accuracy`.
pub fn write_history(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut out = String::from("epoch,train_loss,val_accuracy\n");
    for rec in history {
        out.push_str(&format!("{},{},{}\n", rec.epoch, rec.train_loss, rec.val_accuracy));
    }
    std::fs::write(path, out)?;
    Ok(())
}
