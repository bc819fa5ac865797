//! The evolutionary loop: population initialization, multi-gene fitness
//! evaluation, lexicographic tournament selection, gene-level and
//! subtree-level variation, elitism, termination, and run telemetry.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::{
    self, scale_columns, scale_target, unscale_target_value, DataError, Dataset, ScalingParams,
    SplitSpec,
};
use crate::exprtree::{subtree_crossover, subtree_mutation, ExprTree, TreeGen};
use crate::fitting::{self, FitMetrics, WeightVector};
use crate::pareto::ParetoPoint;

/// Sentinel fitness for individuals whose evaluation produced non-finite
/// gene outputs or unusable weights: compares greater than every finite
/// fitness and is rendered as the string "inf" in reports.
pub const WORST_FITNESS: f64 = f64::INFINITY;

/// Run parameters. Defaults follow the published settings: population 100,
/// 1000 generations, tournament size 3, depth limit 5, up to 15 trees,
/// event probabilities 0.85/0.10/0.05, and the 1e-5 fitness stop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub max_depth: usize,
    pub max_trees: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub p_reproduction: f64,
    pub fitness_target: f64,
    pub elitism_count: usize,
    pub rng_seed: u64,
    pub const_range: (f64, f64),
    pub p_var: f64,
    pub p_high_level_crossover: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            population_size: 100,
            generations: 1000,
            tournament_size: 3,
            max_depth: 5,
            max_trees: 15,
            p_crossover: 0.85,
            p_mutation: 0.10,
            p_reproduction: 0.05,
            fitness_target: 1e-5,
            elitism_count: 1,
            rng_seed: 0,
            const_range: (-10.0, 10.0),
            p_var: 0.8,
            p_high_level_crossover: 0.5,
        }
    }
}

impl GpConfig {
    /// The single-gene variant: identical settings with one tree per
    /// individual.
    pub fn sggp() -> Self {
        GpConfig {
            max_trees: 1,
            ..GpConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn field(ok: bool, field: &'static str, reason: &str) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Invalid {
                    field,
                    reason: reason.to_string(),
                })
            }
        }
        field(self.population_size >= 2, "population_size", "must be at least 2")?;
        field(self.generations >= 1, "generations", "must be at least 1")?;
        field(self.tournament_size >= 1, "tournament_size", "must be at least 1")?;
        field(self.max_depth >= 1, "max_depth", "must be at least 1")?;
        field(self.max_trees >= 1, "max_trees", "must be at least 1")?;
        field(
            self.elitism_count < self.population_size,
            "elitism_count",
            "must be smaller than population_size",
        )?;
        field(self.fitness_target >= 0.0, "fitness_target", "must be non-negative")?;
        field(
            self.const_range.0 <= self.const_range.1,
            "const_range",
            "low bound exceeds high bound",
        )?;
        for (name, p) in [
            ("p_crossover", self.p_crossover),
            ("p_mutation", self.p_mutation),
            ("p_reproduction", self.p_reproduction),
            ("p_var", self.p_var),
            ("p_high_level_crossover", self.p_high_level_crossover),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::Invalid {
                    field: name,
                    reason: format!("{p} is outside [0, 1]"),
                });
            }
        }
        let sum = self.p_crossover + self.p_mutation + self.p_reproduction;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ConfigError::ProbabilitySum { sum });
        }
        Ok(())
    }

    fn tree_gen(&self, var_count: usize) -> TreeGen {
        TreeGen::new(var_count, self.const_range, self.p_var)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConfigError {
    #[error("config field {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("config: crossover/mutation/reproduction probabilities sum to {sum}, expected 1")]
    ProbabilitySum { sum: f64 },
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// One candidate model: an ordered list of genes plus, once evaluated, the
/// fitted weights, its fitness (training RMSE in original target units),
/// and its complexity (total node count over all genes).
#[derive(Debug, Clone)]
pub struct Individual {
    pub genes: Vec<ExprTree>,
    pub weights: Option<WeightVector>,
    pub fitness: f64,
    pub complexity: usize,
}

impl Individual {
    pub fn new(genes: Vec<ExprTree>) -> Self {
        assert!(!genes.is_empty(), "an individual needs at least one gene");
        let complexity = genes.iter().map(ExprTree::node_count).sum();
        Individual {
            genes,
            weights: None,
            fitness: WORST_FITNESS,
            complexity,
        }
    }

    /// Predictions in original target units for unscaled input columns;
    /// `None` until the individual has fitted weights.
    pub fn predict_columns(
        &self,
        input_columns: &[Vec<f64>],
        scaling: &ScalingParams,
    ) -> Option<Vec<f64>> {
        self.weights
            .as_ref()
            .map(|w| predict_with_weights(&self.genes, w, input_columns, scaling))
    }
}

/// Applies a fitted multi-gene model to unscaled inputs: scale, evaluate
/// each gene, combine with the weights, and unscale the result. Non-finite
/// gene outputs propagate into the predictions.
pub fn predict_with_weights(
    genes: &[ExprTree],
    weights: &WeightVector,
    input_columns: &[Vec<f64>],
    scaling: &ScalingParams,
) -> Vec<f64> {
    assert_eq!(genes.len(), weights.w.len(), "gene/weight count mismatch");
    let scaled = scale_columns(input_columns, scaling);
    let n = scaled[0].len();
    let mut acc = vec![weights.w0; n];
    for (gene, wi) in genes.iter().zip(weights.w.iter()) {
        let out = gene.eval(&scaled);
        for (a, v) in acc.iter_mut().zip(out.values.iter()) {
            *a += wi * v;
        }
    }
    acc.into_iter()
        .map(|v| unscale_target_value(v, scaling))
        .collect()
}

/// Pre-scaled view of a training set used during fitness evaluation.
pub struct EvalContext {
    scaled_inputs: Vec<Vec<f64>>,
    scaled_target: Vec<f64>,
    original_target: Vec<f64>,
    scaling: ScalingParams,
}

impl EvalContext {
    pub fn new(dataset: &Dataset, scaling: &ScalingParams) -> Self {
        EvalContext {
            scaled_inputs: scale_columns(dataset.input_columns(), scaling),
            scaled_target: scale_target(dataset.target(), scaling),
            original_target: dataset.target().to_vec(),
            scaling: scaling.clone(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.original_target.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.scaled_inputs.len()
    }
}

struct EvalResult {
    weights: Option<WeightVector>,
    fitness: f64,
}

/// Core fitness computation: build the [1, gene outputs] design matrix on
/// scaled inputs, fit weights against the scaled target, unscale the fitted
/// values, and score RMSE against the original-unit target. Any non-finite
/// gene output or solver failure yields the worst-sentinel fitness.
fn eval_genes(genes: &[ExprTree], ctx: &EvalContext) -> EvalResult {
    let worst = EvalResult {
        weights: None,
        fitness: WORST_FITNESS,
    };
    let n = ctx.n_rows();
    let mut gene_columns: Vec<Vec<f64>> = Vec::with_capacity(genes.len());
    for gene in genes {
        let out = gene.eval(&ctx.scaled_inputs);
        if !out.finite {
            return worst;
        }
        gene_columns.push(out.values);
    }
    let design = DMatrix::from_fn(n, genes.len() + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            gene_columns[j - 1][i]
        }
    });
    let y = DVector::from_column_slice(&ctx.scaled_target);
    let weights = match fitting::least_squares(&design, &y) {
        Ok(w) => w,
        Err(_) => return worst,
    };
    let mut full = vec![weights.w0];
    full.extend_from_slice(&weights.w);
    let fitted = design * DVector::from_vec(full);
    let predictions: Vec<f64> = fitted
        .iter()
        .map(|v| unscale_target_value(*v, &ctx.scaling))
        .collect();
    let fitness = fitting::rmse(&ctx.original_target, &predictions);
    if !fitness.is_finite() {
        return worst;
    }
    EvalResult {
        weights: Some(weights),
        fitness,
    }
}

fn apply_eval(individual: &mut Individual, result: EvalResult) {
    individual.complexity = individual.genes.iter().map(ExprTree::node_count).sum();
    individual.weights = result.weights;
    individual.fitness = result.fitness;
}

/// Evaluates one individual in place: refits weights and fills fitness and
/// complexity.
pub fn evaluate(individual: &mut Individual, ctx: &EvalContext) {
    let result = eval_genes(&individual.genes, ctx);
    apply_eval(individual, result);
}

/// Evaluates the individuals at `indices`, optionally across threads.
/// Evaluation is pure and results are written back by index, so the
/// outcome is identical to sequential evaluation.
fn evaluate_indices(pop: &mut [Individual], indices: &[usize], ctx: &EvalContext, threads: usize) {
    if indices.is_empty() {
        return;
    }
    let results: Vec<(usize, EvalResult)> = if threads <= 1 || indices.len() == 1 {
        indices
            .iter()
            .map(|&i| (i, eval_genes(&pop[i].genes, ctx)))
            .collect()
    } else {
        let chunk = indices.len().div_ceil(threads);
        let pop_ref: &[Individual] = pop;
        std::thread::scope(|scope| {
            let handles: Vec<_> = indices
                .chunks(chunk)
                .map(|slice| {
                    scope.spawn(move || {
                        slice
                            .iter()
                            .map(|&i| (i, eval_genes(&pop_ref[i].genes, ctx)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("evaluation thread panicked"))
                .collect()
        })
    };
    for (i, result) in results {
        apply_eval(&mut pop[i], result);
    }
}

/// Random initial population: gene counts uniform in 1..=max_trees, trees
/// by ramped half-and-half.
pub fn initialize_population<R: Rng + ?Sized>(
    rng: &mut R,
    config: &GpConfig,
    var_count: usize,
) -> Vec<Individual> {
    let gen = config.tree_gen(var_count);
    (0..config.population_size)
        .map(|_| {
            let count = rng.random_range(1..=config.max_trees);
            let genes = (0..count)
                .map(|_| gen.ramped_tree(rng, config.max_depth))
                .collect();
            Individual::new(genes)
        })
        .collect()
}

/// Plain lexicographic tournament: draws `size` distinct candidates,
/// prefers lowest fitness, breaks ties by lowest complexity, and remaining
/// ties uniformly at random. Returns the winner's population index.
pub fn tournament_select<R: Rng + ?Sized>(
    rng: &mut R,
    population: &[Individual],
    size: usize,
) -> usize {
    assert!(!population.is_empty(), "empty population");
    let k = size.max(1).min(population.len());
    let candidates = rand::seq::index::sample(rng, population.len(), k);
    let mut best: Vec<usize> = Vec::with_capacity(k);
    for idx in candidates.iter() {
        if best.is_empty() {
            best.push(idx);
            continue;
        }
        let leader = &population[best[0]];
        let challenger = &population[idx];
        match challenger
            .fitness
            .total_cmp(&leader.fitness)
            .then(challenger.complexity.cmp(&leader.complexity))
        {
            std::cmp::Ordering::Less => {
                best.clear();
                best.push(idx);
            }
            std::cmp::Ordering::Equal => best.push(idx),
            std::cmp::Ordering::Greater => {}
        }
    }
    if best.len() == 1 {
        best[0]
    } else {
        best[rng.random_range(0..best.len())]
    }
}

/// Exchanges the inclusive gene segments `[a1..=a2]` and `[b1..=b2]`
/// whole-gene-wise between two gene lists.
pub(crate) fn exchange_gene_segments(
    a: &[ExprTree],
    b: &[ExprTree],
    (a1, a2): (usize, usize),
    (b1, b2): (usize, usize),
) -> (Vec<ExprTree>, Vec<ExprTree>) {
    let mut child_a = a[..a1].to_vec();
    child_a.extend_from_slice(&b[b1..=b2]);
    child_a.extend_from_slice(&a[a2 + 1..]);
    let mut child_b = b[..b1].to_vec();
    child_b.extend_from_slice(&a[a1..=a2]);
    child_b.extend_from_slice(&b[b2 + 1..]);
    (child_a, child_b)
}

fn random_segment<R: Rng + ?Sized>(rng: &mut R, len: usize) -> (usize, usize) {
    let i = rng.random_range(0..len);
    let j = rng.random_range(0..len);
    (i.min(j), i.max(j))
}

/// Two-point high-level crossover: a contiguous gene segment is chosen in
/// each parent (independent endpoints per parent) and the segments are
/// exchanged whole-gene-wise. Children exceeding `max_trees` have
/// uniformly random genes deleted; a child left with no genes receives one
/// fresh random gene.
pub fn high_level_crossover<R: Rng + ?Sized>(
    rng: &mut R,
    a: &Individual,
    b: &Individual,
    max_trees: usize,
    gen: &TreeGen,
    max_depth: usize,
) -> (Individual, Individual) {
    let seg_a = random_segment(rng, a.genes.len());
    let seg_b = random_segment(rng, b.genes.len());
    let (genes_a, genes_b) = exchange_gene_segments(&a.genes, &b.genes, seg_a, seg_b);
    (
        finish_child(rng, genes_a, max_trees, gen, max_depth),
        finish_child(rng, genes_b, max_trees, gen, max_depth),
    )
}

fn finish_child<R: Rng + ?Sized>(
    rng: &mut R,
    mut genes: Vec<ExprTree>,
    max_trees: usize,
    gen: &TreeGen,
    max_depth: usize,
) -> Individual {
    while genes.len() > max_trees {
        let victim = rng.random_range(0..genes.len());
        genes.remove(victim);
    }
    if genes.is_empty() {
        genes.push(gen.ramped_tree(rng, max_depth));
    }
    Individual::new(genes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VariationEvent {
    Crossover,
    Mutation,
    Reproduction,
}

fn sample_event<R: Rng + ?Sized>(rng: &mut R, config: &GpConfig) -> VariationEvent {
    let r: f64 = rng.random();
    if r < config.p_crossover {
        VariationEvent::Crossover
    } else if r < config.p_crossover + config.p_mutation {
        VariationEvent::Mutation
    } else {
        VariationEvent::Reproduction
    }
}

/// Index of the best individual under the lexicographic
/// (fitness, complexity) order; earliest index wins remaining ties.
pub fn best_index(population: &[Individual]) -> usize {
    population
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            a.fitness
                .total_cmp(&b.fitness)
                .then(a.complexity.cmp(&b.complexity))
                .then(i.cmp(j))
        })
        .map(|(i, _)| i)
        .expect("empty population")
}

/// Produces the next generation: elites are copied unchanged, remaining
/// slots are filled by crossover / mutation / reproduction events, and all
/// fresh offspring are evaluated before the generation ends.
pub fn step_generation<R: Rng + ?Sized>(
    rng: &mut R,
    population: &[Individual],
    ctx: &EvalContext,
    config: &GpConfig,
    threads: usize,
) -> Vec<Individual> {
    let pop_size = population.len();
    let gen = config.tree_gen(ctx.n_inputs());
    let mut next: Vec<Individual> = Vec::with_capacity(pop_size + 1);
    let mut fresh: Vec<usize> = Vec::new();

    let mut order: Vec<usize> = (0..pop_size).collect();
    order.sort_by(|&i, &j| {
        population[i]
            .fitness
            .total_cmp(&population[j].fitness)
            .then(population[i].complexity.cmp(&population[j].complexity))
            .then(i.cmp(&j))
    });
    for &i in order.iter().take(config.elitism_count) {
        next.push(population[i].clone());
    }

    while next.len() < pop_size {
        match sample_event(rng, config) {
            VariationEvent::Reproduction => {
                let winner = tournament_select(rng, population, config.tournament_size);
                next.push(population[winner].clone());
            }
            VariationEvent::Mutation => {
                let p = tournament_select(rng, population, config.tournament_size);
                let parent = &population[p];
                let gi = rng.random_range(0..parent.genes.len());
                let mut genes = parent.genes.clone();
                genes[gi] = subtree_mutation(rng, &genes[gi], config.max_depth, &gen);
                fresh.push(next.len());
                next.push(Individual::new(genes));
            }
            VariationEvent::Crossover => {
                let pa = tournament_select(rng, population, config.tournament_size);
                let pb = tournament_select(rng, population, config.tournament_size);
                let a = &population[pa];
                let b = &population[pb];
                let (c1, c2) = if rng.random_bool(config.p_high_level_crossover) {
                    high_level_crossover(rng, a, b, config.max_trees, &gen, config.max_depth)
                } else {
                    let ga = rng.random_range(0..a.genes.len());
                    let gb = rng.random_range(0..b.genes.len());
                    let (na, nb) =
                        subtree_crossover(rng, &a.genes[ga], &b.genes[gb], config.max_depth);
                    let mut genes_a = a.genes.clone();
                    genes_a[ga] = na;
                    let mut genes_b = b.genes.clone();
                    genes_b[gb] = nb;
                    (Individual::new(genes_a), Individual::new(genes_b))
                };
                fresh.push(next.len());
                next.push(c1);
                fresh.push(next.len());
                next.push(c2);
            }
        }
    }
    next.truncate(pop_size);
    fresh.retain(|&i| i < pop_size);
    evaluate_indices(&mut next, &fresh, ctx, threads);
    next
}

/// Per-generation telemetry. Mean fitness is taken over finite-fitness
/// individuals only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_complexity: usize,
}

/// Full outcome of one evolutionary run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub records: Vec<GenerationRecord>,
    pub final_population: Vec<Individual>,
    pub best: Individual,
    pub scaling: ScalingParams,
    pub train_metrics: Option<FitMetrics>,
    pub test_metrics: Option<FitMetrics>,
    pub generations_run: usize,
}

fn record_of(generation: usize, population: &[Individual]) -> GenerationRecord {
    let b = best_index(population);
    let finite: Vec<f64> = population
        .iter()
        .map(|i| i.fitness)
        .filter(|f| f.is_finite())
        .collect();
    let mean_fitness = if finite.is_empty() {
        WORST_FITNESS
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    GenerationRecord {
        generation,
        best_fitness: population[b].fitness,
        mean_fitness,
        best_complexity: population[b].complexity,
    }
}

/// Runs the evolutionary loop until the generation budget is exhausted or
/// the best fitness drops below the target. Scaling parameters are fitted
/// on the training set and applied to both sets; test metrics use the
/// train-fitted weights without refitting.
pub fn run(
    config: &GpConfig,
    train: &Dataset,
    test: Option<&Dataset>,
    threads: usize,
) -> Result<RunTrace, EngineError> {
    assert!(threads >= 1, "need at least one evaluation thread");
    config.validate()?;
    let scaling = dataio::fit_scaling(train)?;
    let ctx = EvalContext::new(train, &scaling);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let mut population = initialize_population(&mut rng, config, train.n_inputs());
    let all: Vec<usize> = (0..population.len()).collect();
    evaluate_indices(&mut population, &all, &ctx, threads);

    let mut records = vec![record_of(0, &population)];
    let mut generations_run = 0;
    for generation in 1..=config.generations {
        if population[best_index(&population)].fitness < config.fitness_target {
            break;
        }
        population = step_generation(&mut rng, &population, &ctx, config, threads);
        records.push(record_of(generation, &population));
        generations_run = generation;
    }

    let best = population[best_index(&population)].clone();
    let train_metrics = best
        .predict_columns(train.input_columns(), &scaling)
        .and_then(|preds| fitting::fit_metrics(train.target(), &preds).ok());
    let test_metrics = test.and_then(|ds| {
        best.predict_columns(ds.input_columns(), &scaling)
            .and_then(|preds| fitting::fit_metrics(ds.target(), &preds).ok())
    });

    Ok(RunTrace {
        records,
        final_population: population,
        best,
        scaling,
        train_metrics,
        test_metrics,
        generations_run,
    })
}

/// Finite-fitness individuals of a population as Pareto points
/// (worst-sentinel individuals are excluded before front computation).
pub fn pareto_points(population: &[Individual]) -> Vec<ParetoPoint> {
    population
        .iter()
        .enumerate()
        .filter(|(_, ind)| ind.fitness.is_finite())
        .map(|(id, ind)| ParetoPoint {
            id,
            fitness: ind.fitness,
            complexity: ind.complexity,
        })
        .collect()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run seeds derived deterministically from a master seed.
pub fn run_seeds(master_seed: u64, n_runs: usize) -> Vec<u64> {
    (0..n_runs)
        .map(|i| splitmix64(master_seed.wrapping_add(i as u64)))
        .collect()
}

/// Outcome of one run inside a multi-run benchmark.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub best_fitness: f64,
    pub best_complexity: usize,
    pub generations_run: usize,
    pub test_rmse: Option<f64>,
}

/// Best-fitness statistics over independent seeded runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiRunStats {
    pub mean: f64,
    /// Sample (n-1) standard deviation.
    pub std: f64,
    pub max: f64,
    pub min: f64,
    pub runs: Vec<RunRecord>,
}

/// Runs the engine once per derived seed on a fixed 70/30 split of the
/// dataset (the split itself is seeded by the master seed) and reports
/// mean, standard deviation, max, and min of the best training fitness.
pub fn multi_run_stats(
    config: &GpConfig,
    dataset: &Dataset,
    n_runs: usize,
    threads: usize,
) -> Result<MultiRunStats, EngineError> {
    multi_run_stats_with_seeds(config, dataset, &run_seeds(config.rng_seed, n_runs), threads)
}

/// As [`multi_run_stats`] with explicit per-run seeds.
pub fn multi_run_stats_with_seeds(
    config: &GpConfig,
    dataset: &Dataset,
    seeds: &[u64],
    threads: usize,
) -> Result<MultiRunStats, EngineError> {
    assert!(seeds.len() >= 2, "need at least two runs for statistics");
    let (train, test) = dataio::split(dataset, &SplitSpec::new(0.70, config.rng_seed));
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut cfg = config.clone();
        cfg.rng_seed = seed;
        let trace = run(&cfg, &train, Some(&test), threads)?;
        runs.push(RunRecord {
            seed,
            best_fitness: trace.best.fitness,
            best_complexity: trace.best.complexity,
            generations_run: trace.generations_run,
            test_rmse: trace.test_metrics.map(|m| m.rmse),
        });
    }
    let values: Vec<f64> = runs.iter().map(|r| r.best_fitness).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(MultiRunStats {
        mean,
        std: var.sqrt(),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::synth_generate;
    use crate::exprtree::{Node, OpCode};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn small_config() -> GpConfig {
        GpConfig {
            population_size: 30,
            generations: 20,
            rng_seed: 1,
            ..GpConfig::default()
        }
    }

    /// Six random input columns with a target assembled by `f`.
    fn dataset_from(seed: u64, n: usize, f: impl Fn(&[Vec<f64>], usize) -> f64) -> Dataset {
        let mut r = rng(seed);
        let columns: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..n).map(|_| r.random_range(-2.0..2.0)).collect())
            .collect();
        let target: Vec<f64> = (0..n).map(|i| f(&columns, i)).collect();
        Dataset::new(
            (1..=6).map(|i| format!("x{i}")).collect(),
            columns,
            "y".into(),
            target,
        )
        .unwrap()
    }

    #[test]
    fn default_config_matches_published_settings() {
        let c = GpConfig::default();
        assert_eq!(c.population_size, 100);
        assert_eq!(c.generations, 1000);
        assert_eq!(c.tournament_size, 3);
        assert_eq!(c.max_depth, 5);
        assert_eq!(c.max_trees, 15);
        assert_eq!(c.p_crossover, 0.85);
        assert_eq!(c.p_mutation, 0.10);
        assert_eq!(c.p_reproduction, 0.05);
        assert_eq!(c.fitness_target, 1e-5);
        assert_eq!(GpConfig::sggp().max_trees, 1);
        c.validate().unwrap();
    }

    #[test]
    fn config_validation_rejects_bad_settings() {
        let c = GpConfig {
            p_crossover: 0.9,
            ..GpConfig::default()
        };
        assert!(matches!(
            c.validate(),
            Err(ConfigError::ProbabilitySum { .. })
        ));
        let c = GpConfig {
            elitism_count: 100,
            ..GpConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn initial_population_size_and_structure() {
        let config = GpConfig::default();
        let mut r = rng(2);
        let pop = initialize_population(&mut r, &config, 6);
        assert_eq!(pop.len(), 100);
        for ind in &pop {
            assert!((1..=15).contains(&ind.genes.len()));
            for gene in &ind.genes {
                assert!(gene.depth() <= 5);
            }
        }
    }

    #[test]
    fn sggp_population_has_single_genes() {
        let config = GpConfig::sggp();
        let mut r = rng(3);
        let pop = initialize_population(&mut r, &config, 6);
        assert!(pop.iter().all(|ind| ind.genes.len() == 1));
    }

    #[test]
    fn evaluate_exact_affine_gene() {
        // Target is affine in column 5, so a bare x5 gene fits exactly.
        let ds = dataset_from(4, 40, |cols, i| 0.25 + 0.55 * cols[4][i]);
        let scaling = dataio::fit_scaling(&ds).unwrap();
        let ctx = EvalContext::new(&ds, &scaling);
        let mut ind = Individual::new(vec![ExprTree::new(Node::Var(4))]);
        evaluate(&mut ind, &ctx);
        assert!(ind.fitness <= 1e-10, "fitness {}", ind.fitness);
        assert_eq!(ind.weights.as_ref().unwrap().w.len(), 1);
    }

    #[test]
    fn division_by_zero_column_gets_worst_sentinel() {
        // Column 3 is constant; a hand-built scaling maps it to exactly zero.
        let ds = dataset_from(5, 20, |cols, i| cols[0][i]);
        let mut cols = ds.input_columns().to_vec();
        cols[2] = vec![5.0; 20];
        let ds =
            Dataset::new(ds.input_names().to_vec(), cols, "y".into(), ds.target().to_vec())
                .unwrap();
        let scaling = ScalingParams {
            mu_x: vec![0.0, 0.0, 5.0, 0.0, 0.0, 0.0],
            sigma_x: vec![1.0; 6],
            mu_y: 0.0,
            sigma_y: 1.0,
        };
        let ctx = EvalContext::new(&ds, &scaling);
        let mut ind = Individual::new(vec![ExprTree::new(Node::Op(
            OpCode::Div,
            vec![Node::Var(0), Node::Var(2)],
        ))]);
        evaluate(&mut ind, &ctx);
        assert_eq!(ind.fitness, WORST_FITNESS);
        assert!(ind.weights.is_none());
        assert!(pareto_points(&[ind]).is_empty());
    }

    #[test]
    fn fitness_matches_independent_recomputation() {
        let ds = dataset_from(6, 50, |cols, i| {
            (cols[0][i] * cols[1][i]).sin() + 0.3 * cols[2][i]
        });
        let scaling = dataio::fit_scaling(&ds).unwrap();
        let ctx = EvalContext::new(&ds, &scaling);
        let mut ind = Individual::new(vec![
            ExprTree::new(Node::Var(0)),
            ExprTree::new(Node::Op(OpCode::Sin, vec![Node::Var(2)])),
        ]);
        evaluate(&mut ind, &ctx);
        assert!(ind.fitness.is_finite());
        let preds = ind.predict_columns(ds.input_columns(), &scaling).unwrap();
        let recomputed = fitting::rmse(ds.target(), &preds);
        assert!((recomputed - ind.fitness).abs() < 1e-12);
    }

    #[test]
    fn tournament_prefers_lexicographic_order() {
        let mk = |fitness: f64, complexity: usize| -> Individual {
            let mut ind = Individual::new(vec![ExprTree::new(Node::Var(0))]);
            ind.fitness = fitness;
            ind.complexity = complexity;
            ind
        };
        // Tournament of the whole population: the winner is forced.
        let pop = vec![mk(0.5, 10), mk(0.5, 7), mk(0.9, 3)];
        let mut r = rng(7);
        for _ in 0..200 {
            assert_eq!(tournament_select(&mut r, &pop, 3), 1);
        }

        // A strictly dominant individual wins every tournament it enters.
        let pop = vec![mk(0.3, 2), mk(0.8, 9), mk(0.6, 4)];
        for _ in 0..10_000 {
            assert_eq!(tournament_select(&mut r, &pop, 3), 0);
        }
    }

    #[test]
    fn tournament_uniform_over_identical_candidates() {
        let mk = || {
            let mut ind = Individual::new(vec![ExprTree::new(Node::Var(0))]);
            ind.fitness = 0.5;
            ind.complexity = 3;
            ind
        };
        let pop = vec![mk(), mk(), mk()];
        let mut r = rng(8);
        let mut counts = [0usize; 3];
        let draws = 10_000;
        for _ in 0..draws {
            counts[tournament_select(&mut r, &pop, 3)] += 1;
        }
        // 3-sigma binomial band around 1/3.
        let p = 1.0 / 3.0;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - p).abs() < 3.0 * sigma, "frequency {freq}");
        }
    }

    #[test]
    fn gene_segment_exchange_manual_trace() {
        let g = |v: f64| ExprTree::new(Node::Const(v));
        let a = vec![g(1.0), g(2.0), g(3.0)];
        let b = vec![g(10.0), g(20.0)];
        // Segments [2..3] of a and [1..1] of b, zero-based (1,2) and (0,0).
        let (ca, cb) = exchange_gene_segments(&a, &b, (1, 2), (0, 0));
        assert_eq!(ca, vec![g(1.0), g(10.0)]);
        assert_eq!(cb, vec![g(2.0), g(3.0), g(20.0)]);

        // Whole-list segments exchange the parents completely.
        let (ca, cb) = exchange_gene_segments(&a, &b, (0, 2), (0, 1));
        assert_eq!(ca, b);
        assert_eq!(cb, a);
    }

    #[test]
    fn high_level_crossover_respects_gene_bounds() {
        let config = GpConfig::default();
        let gen = config.tree_gen(6);
        let mut r = rng(9);
        for _ in 0..1000 {
            let na = r.random_range(1..=15);
            let nb = r.random_range(1..=15);
            let a = Individual::new((0..na).map(|_| gen.ramped_tree(&mut r, 5)).collect());
            let b = Individual::new((0..nb).map(|_| gen.ramped_tree(&mut r, 5)).collect());
            let (ca, cb) = high_level_crossover(&mut r, &a, &b, 15, &gen, 5);
            assert!((1..=15).contains(&ca.genes.len()));
            assert!((1..=15).contains(&cb.genes.len()));
        }
    }

    #[test]
    fn event_frequencies_match_probabilities() {
        let config = GpConfig::default();
        let mut r = rng(10);
        let draws = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            match sample_event(&mut r, &config) {
                VariationEvent::Crossover => counts[0] += 1,
                VariationEvent::Mutation => counts[1] += 1,
                VariationEvent::Reproduction => counts[2] += 1,
            }
        }
        for (count, p) in counts.iter().zip([0.85, 0.10, 0.05]) {
            let freq = *count as f64 / draws as f64;
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((freq - p).abs() < 3.0 * sigma, "freq {freq} vs p {p}");
        }
    }

    #[test]
    fn step_preserves_size_and_elite() {
        let ds = dataset_from(11, 40, |cols, i| cols[0][i] + cols[1][i].cos());
        let scaling = dataio::fit_scaling(&ds).unwrap();
        let ctx = EvalContext::new(&ds, &scaling);
        let config = small_config();
        let mut r = rng(config.rng_seed);
        let mut pop = initialize_population(&mut r, &config, 6);
        let all: Vec<usize> = (0..pop.len()).collect();
        evaluate_indices(&mut pop, &all, &ctx, 1);
        for _ in 0..10 {
            let best_before = pop[best_index(&pop)].fitness;
            let next = step_generation(&mut r, &pop, &ctx, &config, 1);
            assert_eq!(next.len(), pop.len());
            let best_after = next[best_index(&next)].fitness;
            assert!(best_after <= best_before);
            for ind in &next {
                assert!(ind.genes.len() <= config.max_trees);
                assert!(ind.genes.iter().all(|g| g.depth() <= config.max_depth));
            }
            pop = next;
        }
    }

    #[test]
    fn run_exhausts_generations_when_target_disabled() {
        let ds = dataset_from(12, 30, |cols, i| cols[0][i].exp() + cols[1][i]);
        let config = GpConfig {
            population_size: 20,
            generations: 8,
            fitness_target: 0.0,
            rng_seed: 5,
            ..GpConfig::default()
        };
        let trace = run(&config, &ds, None, 1).unwrap();
        assert_eq!(trace.generations_run, 8);
        assert_eq!(trace.records.len(), 9); // generation 0 plus 8 steps
    }

    #[test]
    fn run_terminates_early_on_representable_target() {
        let ds = dataset_from(13, 40, |cols, i| cols[0][i]);
        let config = GpConfig {
            population_size: 60,
            generations: 50,
            rng_seed: 3,
            ..GpConfig::default()
        };
        let trace = run(&config, &ds, None, 1).unwrap();
        assert!(
            trace.best.fitness < 1e-5,
            "fitness {} after {} generations",
            trace.best.fitness,
            trace.generations_run
        );
        assert!(trace.generations_run < config.generations);
    }

    #[test]
    fn trace_best_fitness_is_non_increasing() {
        let ds = dataset_from(14, 40, |cols, i| cols[2][i] * cols[3][i]);
        let config = small_config();
        let trace = run(&config, &ds, None, 1).unwrap();
        for pair in trace.records.windows(2) {
            assert!(pair[1].best_fitness <= pair[0].best_fitness);
        }
    }

    #[test]
    fn parallel_evaluation_is_deterministic() {
        let mut r = rng(15);
        let ds = synth_generate(&mut r, 96, 0.01);
        let (train, test) = dataio::split(&ds, &SplitSpec::new(0.70, 9));
        let config = GpConfig {
            population_size: 30,
            generations: 12,
            rng_seed: 21,
            fitness_target: 0.0,
            ..GpConfig::default()
        };
        let a = run(&config, &train, Some(&test), 1).unwrap();
        let b = run(&config, &train, Some(&test), 4).unwrap();
        assert_eq!(a.records, b.records);
        let ser = |t: &RunTrace| {
            t.best
                .genes
                .iter()
                .map(|g| g.serialize())
                .collect::<Vec<_>>()
                .join(";")
        };
        assert_eq!(ser(&a), ser(&b));
        assert_eq!(a.best.weights, b.best.weights);
        assert_eq!(a.test_metrics, b.test_metrics);
    }

    #[test]
    fn sggp_design_is_two_columns() {
        let ds = dataset_from(16, 30, |cols, i| 0.5 * cols[0][i] + 1.0);
        let config = GpConfig {
            population_size: 20,
            generations: 5,
            fitness_target: 0.0,
            rng_seed: 2,
            ..GpConfig::sggp()
        };
        let trace = run(&config, &ds, None, 1).unwrap();
        for ind in &trace.final_population {
            assert_eq!(ind.genes.len(), 1);
            if let Some(w) = &ind.weights {
                assert_eq!(w.w.len(), 1);
            }
        }
    }

    #[test]
    fn worst_sentinel_never_elite_among_finite() {
        let mk = |fitness: f64| {
            let mut ind = Individual::new(vec![ExprTree::new(Node::Var(0))]);
            ind.fitness = fitness;
            ind
        };
        let pop = vec![mk(WORST_FITNESS), mk(0.9), mk(WORST_FITNESS)];
        assert_eq!(best_index(&pop), 1);
    }

    #[test]
    fn multi_run_stats_identical_seeds_give_zero_std() {
        let mut r = rng(17);
        let ds = synth_generate(&mut r, 60, 0.01);
        let config = GpConfig {
            population_size: 15,
            generations: 3,
            fitness_target: 0.0,
            rng_seed: 4,
            ..GpConfig::default()
        };
        let stats = multi_run_stats_with_seeds(&config, &ds, &[77, 77], 1).unwrap();
        assert_eq!(stats.std, 0.0);
        assert_eq!(stats.min, stats.max);
    }

    #[test]
    fn multi_run_stats_ordering_invariants() {
        let mut r = rng(18);
        let ds = synth_generate(&mut r, 60, 0.01);
        let config = GpConfig {
            population_size: 15,
            generations: 4,
            fitness_target: 0.0,
            rng_seed: 6,
            ..GpConfig::default()
        };
        let stats = multi_run_stats(&config, &ds, 4, 1).unwrap();
        assert!(stats.max >= stats.mean);
        assert!(stats.mean >= stats.min);
        assert_eq!(stats.runs.len(), 4);
        assert_eq!(run_seeds(config.rng_seed, 4), run_seeds(config.rng_seed, 4));
    }
}
