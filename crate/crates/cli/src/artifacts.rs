//! Run manifests and artifact writers. Every emitted artifact embeds the
//! manifest (configuration echo, master seed, dataset fingerprint, tool
//! version) so any result can be regenerated from the artifact alone.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use mggp::dataio::{Dataset, ScalingParams};
use mggp::engine::{GpConfig, MultiRunStats, RunTrace};
use mggp::fitting::WeightVector;
use mggp::pareto::{self, ParetoPoint};

/// An f64 that serializes non-finite values as the strings "inf", "-inf",
/// or "nan" (plain JSON numbers otherwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsonF64(pub f64);

impl Serialize for JsonF64 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serializer.serialize_f64(self.0)
        } else if self.0.is_nan() {
            serializer.serialize_str("nan")
        } else if self.0 > 0.0 {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for JsonF64 {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) => Ok(JsonF64(v)),
            Raw::Text(s) => match s.as_str() {
                "inf" => Ok(JsonF64(f64::INFINITY)),
                "-inf" => Ok(JsonF64(f64::NEG_INFINITY)),
                "nan" => Ok(JsonF64(f64::NAN)),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number or inf/-inf/nan, got '{other}'"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnDigest {
    pub name: String,
    pub checksum: String,
}

/// Row count plus a per-column checksum of the raw values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub rows: usize,
    pub columns: Vec<ColumnDigest>,
}

fn fnv1a64(values: &[f64]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for byte in v.to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}

pub fn fingerprint(dataset: &Dataset) -> DatasetFingerprint {
    let mut columns: Vec<ColumnDigest> = dataset
        .input_names()
        .iter()
        .zip(dataset.input_columns().iter())
        .map(|(name, col)| ColumnDigest {
            name: name.clone(),
            checksum: format!("{:016x}", fnv1a64(col)),
        })
        .collect();
    columns.push(ColumnDigest {
        name: dataset.target_name().to_string(),
        checksum: format!("{:016x}", fnv1a64(dataset.target())),
    });
    DatasetFingerprint {
        rows: dataset.n_rows(),
        columns,
    }
}

/// Reproducibility record embedded in every artifact: seed, configuration,
/// and dataset fingerprint suffice to regenerate the artifact bit for bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub mode: String,
    pub master_seed: u64,
    pub dataset: DatasetFingerprint,
    pub config: GpConfig,
}

impl RunManifest {
    pub fn new(mode: &str, config: &GpConfig, dataset: &Dataset) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            mode: mode.to_string(),
            master_seed: config.rng_seed,
            dataset: fingerprint(dataset),
            config: config.clone(),
        }
    }

    pub fn comment_line(&self) -> String {
        format!(
            "manifest: {}",
            serde_json::to_string(self).expect("manifest serializes")
        )
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub train_rmse: JsonF64,
    pub train_r2: Option<JsonF64>,
    pub test_rmse: Option<JsonF64>,
    pub test_r2: Option<JsonF64>,
}

/// The persisted best-model file: prefix-form genes, fitted weights,
/// scaling parameters, and train/test metrics.
#[derive(Debug, Serialize, Deserialize)]
pub struct BestModelFile {
    pub manifest: RunManifest,
    pub genes: Vec<String>,
    pub infix: Vec<String>,
    pub weights: WeightVector,
    pub complexity: usize,
    pub scaling: ScalingParams,
    pub metrics: ModelMetrics,
}

impl BestModelFile {
    pub fn from_trace(manifest: RunManifest, trace: &RunTrace, var_names: &[String]) -> Self {
        let best = &trace.best;
        let weights = best.weights.clone().unwrap_or(WeightVector {
            w0: f64::NAN,
            w: vec![f64::NAN; best.genes.len()],
        });
        BestModelFile {
            manifest,
            genes: best.genes.iter().map(|g| g.serialize()).collect(),
            infix: best.genes.iter().map(|g| g.to_infix(var_names)).collect(),
            weights,
            complexity: best.complexity,
            scaling: trace.scaling.clone(),
            metrics: ModelMetrics {
                train_rmse: JsonF64(
                    trace
                        .train_metrics
                        .map(|m| m.rmse)
                        .unwrap_or(best.fitness),
                ),
                train_r2: trace.train_metrics.map(|m| JsonF64(m.r2)),
                test_rmse: trace.test_metrics.map(|m| JsonF64(m.rmse)),
                test_r2: trace.test_metrics.map(|m| JsonF64(m.r2)),
            },
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).context("serializing model")?;
        std::fs::write(path, json + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading model file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing model file {}", path.display()))
    }
}

/// Trace CSV: one row per generation. Non-finite fitness renders as "inf".
pub fn write_trace_csv(trace: &RunTrace, manifest: &RunManifest, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# {}", manifest.comment_line()).unwrap();
    writeln!(out, "generation,best_fitness,mean_fitness,best_complexity").unwrap();
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{}",
            r.generation, r.best_fitness, r.mean_fitness, r.best_complexity
        )
        .unwrap();
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Pareto dump CSV over the finite-fitness final population:
/// id, fitness, complexity, on_front, tag.
pub fn write_pareto_csv(
    points: &[ParetoPoint],
    manifest: &RunManifest,
    path: &Path,
) -> Result<()> {
    let front = pareto::pareto_front(points);
    let tags = pareto::tag_front(&front);
    let mut out = String::new();
    writeln!(out, "# {}", manifest.comment_line()).unwrap();
    writeln!(out, "id,fitness,complexity,on_front,tag").unwrap();
    for p in points {
        let on_front = front.iter().position(|f| f.id == p.id);
        let tag = on_front
            .and_then(|i| tags[i])
            .map(|t| t.as_str())
            .unwrap_or("");
        writeln!(
            out,
            "{},{},{},{},{}",
            p.id,
            p.fitness,
            p.complexity,
            u8::from(on_front.is_some()),
            tag
        )
        .unwrap();
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Benchmark CSV in the two-row mean/std/max/min layout.
pub fn write_bench_csv(
    rows: &[(&str, &MultiRunStats)],
    manifest: &RunManifest,
    path: &Path,
) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# {}", manifest.comment_line()).unwrap();
    writeln!(out, "algorithm,mean,std,max,min").unwrap();
    for (name, stats) in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            name, stats.mean, stats.std, stats.max, stats.min
        )
        .unwrap();
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Baseline report CSV mirroring the published comparison layout.
pub fn write_baseline_csv(
    rows: &[(String, String, f64, f64)],
    comment: &str,
    path: &Path,
) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# {comment}").unwrap();
    writeln!(out, "model,characteristics,rmse,r2").unwrap();
    for (model, characteristics, rmse, r2) in rows {
        writeln!(out, "{model},\"{characteristics}\",{rmse},{r2}").unwrap();
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
