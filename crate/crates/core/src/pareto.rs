//! Post-run dominance analysis over (fitness, complexity) pairs.

use serde::{Deserialize, Serialize};

/// One candidate solution in fitness/complexity space. Lower is better on
/// both axes; points admitted to front computation must have finite fitness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub id: usize,
    pub fitness: f64,
    pub complexity: usize,
}

/// Representative labels for front members: A = lowest fitness,
/// C = lowest complexity, B = the knee between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrontTag {
    A,
    B,
    C,
}

impl FrontTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FrontTag::A => "A",
            FrontTag::B => "B",
            FrontTag::C => "C",
        }
    }
}

/// True iff `p` is at least as good as `q` on both axes and strictly
/// better on at least one.
pub fn dominates(p: &ParetoPoint, q: &ParetoPoint) -> bool {
    p.fitness <= q.fitness
        && p.complexity <= q.complexity
        && (p.fitness < q.fitness || p.complexity < q.complexity)
}

/// Extracts the non-dominated set, sorted by ascending complexity with
/// fitness as the tie-break. Exact duplicates are all retained (equal
/// points do not dominate each other).
pub fn pareto_front(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut sorted: Vec<ParetoPoint> = points.to_vec();
    sorted.sort_by(|a, b| {
        a.complexity
            .cmp(&b.complexity)
            .then(a.fitness.total_cmp(&b.fitness))
    });

    let mut front = Vec::new();
    let mut best_fitness = f64::INFINITY;
    let mut i = 0;
    while i < sorted.len() {
        let complexity = sorted[i].complexity;
        let group_min = sorted[i].fitness;
        let mut j = i;
        while j < sorted.len() && sorted[j].complexity == complexity {
            j += 1;
        }
        if group_min < best_fitness {
            front.extend(
                sorted[i..j]
                    .iter()
                    .filter(|p| p.fitness == group_min)
                    .copied(),
            );
            best_fitness = group_min;
        }
        i = j;
    }
    front
}

/// Tags each front member with its representative label, if any.
/// The front must be sorted as produced by [`pareto_front`]. A is the
/// lowest-fitness member, C the lowest-complexity member, and B the member
/// with maximum perpendicular distance from the A-C chord after min-max
/// normalizing both axes. A and C win conflicts in that order.
pub fn tag_front(front: &[ParetoPoint]) -> Vec<Option<FrontTag>> {
    let mut tags = vec![None; front.len()];
    if front.is_empty() {
        return tags;
    }

    let a_idx = front
        .iter()
        .enumerate()
        .min_by(|(_, p), (_, q)| {
            p.fitness
                .total_cmp(&q.fitness)
                .then(p.complexity.cmp(&q.complexity))
        })
        .map(|(i, _)| i)
        .unwrap();
    tags[a_idx] = Some(FrontTag::A);

    let c_idx = front
        .iter()
        .enumerate()
        .min_by(|(_, p), (_, q)| {
            p.complexity
                .cmp(&q.complexity)
                .then(p.fitness.total_cmp(&q.fitness))
        })
        .map(|(i, _)| i)
        .unwrap();
    if tags[c_idx].is_none() {
        tags[c_idx] = Some(FrontTag::C);
    }

    // Knee: only meaningful with a real chord and a third point.
    if front.len() < 3 || a_idx == c_idx {
        return tags;
    }
    let f_min = front.iter().map(|p| p.fitness).fold(f64::INFINITY, f64::min);
    let f_max = front
        .iter()
        .map(|p| p.fitness)
        .fold(f64::NEG_INFINITY, f64::max);
    let c_min = front.iter().map(|p| p.complexity).min().unwrap() as f64;
    let c_max = front.iter().map(|p| p.complexity).max().unwrap() as f64;
    if f_max <= f_min || c_max <= c_min {
        return tags;
    }
    let norm = |p: &ParetoPoint| {
        (
            (p.fitness - f_min) / (f_max - f_min),
            (p.complexity as f64 - c_min) / (c_max - c_min),
        )
    };
    let (ax, ay) = norm(&front[a_idx]);
    let (cx, cy) = norm(&front[c_idx]);
    let chord = ((cx - ax).powi(2) + (cy - ay).powi(2)).sqrt();
    if chord == 0.0 {
        return tags;
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in front.iter().enumerate() {
        if i == a_idx || i == c_idx {
            continue;
        }
        let (px, py) = norm(p);
        let dist = ((cx - ax) * (ay - py) - (ax - px) * (cy - ay)).abs() / chord;
        if best.is_none_or(|(_, d)| dist > d) {
            best = Some((i, dist));
        }
    }
    if let Some((i, _)) = best {
        tags[i] = Some(FrontTag::B);
    }
    tags
}
