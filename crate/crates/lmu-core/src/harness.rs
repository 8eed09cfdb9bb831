//! Synthetic data generation and the benchmark experiments: the four
//! preliminary trials (regression vs classification, raw vs expanded keys)
//! and the single-network accuracy/capacity sweeps.

use crate::encode::{seed_expand, Interval};
use crate::error::Error;
use crate::nn::{self, MlpConfig, TrainConfig};
use crate::rng::SplitMix64;
use crate::table::{uniform_schema, Table, Tuple, Value};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Uniform,
    /// Zipf with exponent `s` over the domain values in ascending order
    /// (the lowest value is the most frequent).
    Zipf(f64),
}

/// Deterministic synthetic table: ids `1..=n`, attributes i.i.d. per the
/// distribution.
pub fn generate_table(
    n: usize,
    d: usize,
    domain: Interval,
    dist: Distribution,
    seed: u64,
) -> Result<Table> {
    if n < 1 || d < 1 {
        return Err(Error::InvalidParameter(
            "table needs at least one tuple and one attribute".into(),
        ));
    }
    let width = domain.width();
    if width > 1_000_000 {
        return Err(Error::InvalidParameter(format!(
            "domain width {width} too large for the generator"
        )));
    }
    let width = width as u64;
    let mut rng = SplitMix64::new(seed);
    let mut draw: Box<dyn FnMut(&mut SplitMix64) -> Value> = match dist {
        Distribution::Uniform => {
            Box::new(move |rng| domain.lo as i64 + rng.next_below(width) as i64)
        }
        Distribution::Zipf(s) => {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter(
                    "zipf exponent must be positive".into(),
                ));
            }
            // Inverse-CDF sampling over the normalized cumulative weights.
            let mut cum = Vec::with_capacity(width as usize);
            let mut total = 0.0;
            for k in 1..=width {
                total += (k as f64).powf(-s);
                cum.push(total);
            }
            for c in &mut cum {
                *c /= total;
            }
            Box::new(move |rng| {
                let u = rng.next_f64();
                let idx = cum.partition_point(|&c| c < u).min(cum.len() - 1);
                domain.lo as i64 + idx as i64
            })
        }
    };
    let tuples = (1..=n as u64)
        .map(|id| Tuple {
            id,
            values: (0..d).map(|_| draw(&mut rng)).collect(),
        })
        .collect();
    Table::new(uniform_schema(d, domain), tuples)
}

/// One of the four preliminary accuracy trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub panel: char,
    pub description: &'static str,
    pub accuracy: f64,
}

const TRIAL_N: usize = 1000;
const TRIAL_D: usize = 4;
const TRIAL_DOMAIN: (i64, i64) = (1, 1000);
const TRIAL_WIDTH: usize = 128;
const TRIAL_LAYERS: usize = 4;

fn scale(v: i64) -> f64 {
    // Map [1, 1000] (and ids 1..=1000) into [-1, 1).
    (v as f64 - 500.5) / 500.5
}

/// Runs the four trials on the standard fixture (1,000 tuples, 4 uniform
/// attributes over [1, 1000], net 128[4]):
///
/// - `a`: regression, attributes -> id (expected to fail),
/// - `b`: classification, attributes -> id as one of 1,000 classes,
/// - `c`: classification, raw scalar id -> attribute (expected to fail),
/// - `d`: classification, seed-expanded id -> attribute.
pub fn run_trials(seed: u64) -> Result<Vec<TrialOutcome>> {
    let domain = Interval::new(TRIAL_DOMAIN.0 as i128, TRIAL_DOMAIN.1 as i128 + 1)?;
    let table = generate_table(TRIAL_N, TRIAL_D, domain, Distribution::Uniform, seed)?;
    let attr_inputs: Vec<Vec<f64>> = table
        .tuples
        .iter()
        .map(|t| t.values.iter().map(|&v| scale(v)).collect())
        .collect();
    let mut out = Vec::with_capacity(4);

    // (a) regression: predict the id from the attribute vector.
    {
        let samples: Vec<(Vec<f64>, f64)> = attr_inputs
            .iter()
            .zip(&table.tuples)
            .map(|(input, t)| (input.clone(), scale(t.id as i64)))
            .collect();
        let mut net = nn::init_regressor(TRIAL_D, TRIAL_WIDTH, TRIAL_LAYERS, seed ^ 0xA)?;
        let cfg = TrainConfig {
            max_epochs: 300,
            learning_rate: 0.003,
            ..TrainConfig::default()
        };
        nn::train_regression(&mut net, &samples, &cfg)?;
        let correct = samples
            .iter()
            .zip(&table.tuples)
            .filter(|((input, _), t)| {
                let pred = net.predict_scalar(input) * 500.5 + 500.5;
                pred.round() as i64 == t.id as i64
            })
            .count();
        out.push(TrialOutcome {
            panel: 'a',
            description: "regression, attributes to id",
            accuracy: correct as f64 / samples.len() as f64,
        });
    }

    let class_cfg = TrainConfig {
        max_epochs: 3000,
        learning_rate: 0.003,
        ..TrainConfig::default()
    };

    // (b) classification: attribute vector -> id class.
    {
        let samples: Vec<(Vec<f64>, usize)> = attr_inputs
            .iter()
            .zip(&table.tuples)
            .map(|(input, t)| (input.clone(), (t.id - 1) as usize))
            .collect();
        let mut net = nn::init_mlp(MlpConfig::new(
            TRIAL_D,
            TRIAL_WIDTH,
            TRIAL_LAYERS,
            TRIAL_N,
            seed ^ 0xB,
        ))?;
        let report = nn::train(&mut net, &samples, &class_cfg)?;
        out.push(TrialOutcome {
            panel: 'b',
            description: "classification, attributes to id",
            accuracy: report.final_train_accuracy,
        });
    }

    let n_classes = (TRIAL_DOMAIN.1 - TRIAL_DOMAIN.0 + 1) as usize;
    let labels: Vec<usize> = table
        .tuples
        .iter()
        .map(|t| (t.values[0] - TRIAL_DOMAIN.0) as usize)
        .collect();

    // (c) classification from the raw scalar id: the input signal is too
    // weak and accuracy stays near zero.
    {
        let samples: Vec<(Vec<f64>, usize)> = table
            .tuples
            .iter()
            .zip(&labels)
            .map(|(t, &label)| (vec![scale(t.id as i64)], label))
            .collect();
        let mut net = nn::init_mlp(MlpConfig::new(
            1,
            TRIAL_WIDTH,
            TRIAL_LAYERS,
            n_classes,
            seed ^ 0xC,
        ))?;
        let cfg = TrainConfig {
            max_epochs: 300,
            ..class_cfg
        };
        let report = nn::train(&mut net, &samples, &cfg)?;
        out.push(TrialOutcome {
            panel: 'c',
            description: "classification, raw id to attribute",
            accuracy: report.final_train_accuracy,
        });
    }

    // (d) classification from the seed-expanded id: the storage path.
    {
        let samples: Vec<(Vec<f64>, usize)> = table
            .tuples
            .iter()
            .zip(&labels)
            .map(|(t, &label)| (seed_expand(t.id, TRIAL_D), label))
            .collect();
        let mut net = nn::init_mlp(MlpConfig::new(
            TRIAL_D,
            TRIAL_WIDTH,
            TRIAL_LAYERS,
            n_classes,
            seed ^ 0xD,
        ))?;
        let report = nn::train(&mut net, &samples, &class_cfg)?;
        out.push(TrialOutcome {
            panel: 'd',
            description: "classification, expanded id to attribute",
            accuracy: report.final_train_accuracy,
        });
    }
    Ok(out)
}

/// Knobs for the single-network capacity experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub input_dim: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub classes: Vec<usize>,
    /// N increment for max-capacity mode.
    pub step: usize,
    pub max_n: usize,
    pub target_accuracy: f64,
    /// Independent repetitions averaged per measured point.
    pub repetitions: usize,
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            input_dim: 4,
            hidden_width: 64,
            hidden_layers: 4,
            classes: vec![10, 100, 1000],
            step: 100,
            max_n: 3000,
            target_accuracy: 1.0,
            repetitions: 1,
            train: TrainConfig {
                max_epochs: 600,
                learning_rate: 0.003,
                ..TrainConfig::default()
            },
            seed: 0,
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() || self.classes.iter().any(|&c| c < 2) {
            return Err(Error::InvalidParameter(
                "class counts must be at least 2".into(),
            ));
        }
        if self.step < 1 || self.max_n < self.step || self.repetitions < 1 {
            return Err(Error::InvalidParameter("invalid sweep bounds".into()));
        }
        self.train.validate()
    }
}

/// The memorization workload: expanded ids against i.i.d. random labels.
fn capacity_samples(n: usize, classes: usize, input_dim: usize, seed: u64) -> Vec<(Vec<f64>, usize)> {
    let mut rng = SplitMix64::new(seed);
    (1..=n as u64)
        .map(|id| (seed_expand(id, input_dim), rng.next_below(classes as u64) as usize))
        .collect()
}

fn trained_accuracy(spec: &BenchSpec, n: usize, classes: usize, rep: u64) -> Result<f64> {
    let seed = crate::rng::fold(spec.seed, &[n as u64, classes as u64, rep]);
    let samples = capacity_samples(n, classes, spec.input_dim, seed);
    let mut net = nn::init_mlp(MlpConfig::new(
        spec.input_dim,
        spec.hidden_width,
        spec.hidden_layers,
        classes,
        seed ^ 1,
    ))?;
    let cfg = TrainConfig {
        rng_seed: seed ^ 2,
        target_accuracy: spec.target_accuracy,
        ..spec.train
    };
    Ok(nn::train(&mut net, &samples, &cfg)?.final_train_accuracy)
}

fn mean_accuracy(spec: &BenchSpec, n: usize, classes: usize) -> Result<f64> {
    let mut total = 0.0;
    for rep in 0..spec.repetitions {
        total += trained_accuracy(spec, n, classes, rep as u64)?;
    }
    Ok(total / spec.repetitions as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyPoint {
    pub classes: usize,
    pub n: usize,
    pub accuracy: f64,
}

/// Accuracy-vs-N mode: one fresh network per table size, final training
/// accuracy recorded at a fixed epoch budget. `points` are the measured
/// table sizes, ascending.
pub fn accuracy_vs_n(spec: &BenchSpec, classes: usize, points: &[usize]) -> Result<Vec<AccuracyPoint>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(points.len());
    for &n in points {
        out.push(AccuracyPoint {
            classes,
            n,
            accuracy: mean_accuracy(spec, n, classes)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    pub classes: usize,
    /// Largest measured N still reaching the target accuracy; 0 when even
    /// the first step fails.
    pub max_n: usize,
}

/// Max-capacity mode: N grows by `spec.step` until the target accuracy
/// fails, per class count.
pub fn max_capacity(spec: &BenchSpec) -> Result<Vec<CapacityResult>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.classes.len());
    for &classes in &spec.classes {
        let mut max_n = 0;
        let mut n = spec.step;
        while n <= spec.max_n {
            let acc = mean_accuracy(spec, n, classes)?;
            if acc < spec.target_accuracy {
                break;
            }
            max_n = n;
            n += spec.step;
        }
        out.push(CapacityResult { classes, max_n });
    }
    Ok(out)
}
