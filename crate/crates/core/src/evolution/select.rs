use std::cmp::Ordering;

use super::config::{EvolutionConfig, SelectionMode};
use super::enforce_resource_cap;
use super::individual::{Individual, IndividualId};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SelectionReport {
    /// Pool members dropped as trivial or over the node cap.
    pub filtered_out: usize,
    /// Clones added because the filtered pool was smaller than `n`.
    pub clones: usize,
    pub elites: Vec<IndividualId>,
    pub by_fitness: Vec<IndividualId>,
    pub by_size: Vec<IndividualId>,
}

/// Single-draw probabilities `q^r / Σ q^r` for ranks `0..count`.
pub fn rank_weights(count: usize, q: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..count).map(|r| q.powi(r as i32)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Draws `k` distinct indices with fixed weights given as natural logs.
///
/// Each item gets the key `ln E − ln w` with `E ~ Exp(1)` and the `k`
/// smallest keys win, which is sequential weighted draws without
/// replacement. Working in log space keeps tiny rank weights such as
/// `0.2^150` from underflowing. Zero-weight items (`-inf`) are taken only
/// after every positive-weight item, uniformly among themselves.
pub fn sample_without_replacement<R: rand::Rng + ?Sized>(
    log_weights: &[f64],
    k: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut keys: Vec<(bool, f64, usize)> = log_weights
        .iter()
        .enumerate()
        .map(|(i, &lw)| {
            let u = 1.0 - rng.random::<f64>();
            let ln_e = (-u.ln()).ln();
            if lw == f64::NEG_INFINITY {
                (true, ln_e, i)
            } else {
                (false, ln_e - lw, i)
            }
        })
        .collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    keys.into_iter().take(k).map(|(_, _, i)| i).collect()
}

fn by_score_desc<'a>(
    scores: &'a [f64],
    pool: &'a [Individual],
) -> impl Fn(&usize, &usize) -> Ordering + 'a {
    move |&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then(pool[a].id.cmp(&pool[b].id))
    }
}

/// Picks the next `config.population_size` survivors from `pool`.
///
/// `scores` are the selection scores aligned with `pool` (propagated when
/// propagation is on); elites are ranked by raw fitness so the best raw
/// score always survives. Trivial and over-cap members are dropped first.
/// If fewer than `n` remain, all are kept and the rest are clones drawn
/// uniformly, given fresh ids from `next_id`. Ties in any ranking go to
/// the lower id.
pub fn select<R: rand::Rng + ?Sized>(
    pool: Vec<Individual>,
    scores: &[f64],
    t: u64,
    config: &EvolutionConfig,
    rng: &mut R,
    next_id: &mut IndividualId,
) -> (Vec<Individual>, SelectionReport) {
    assert_eq!(pool.len(), scores.len(), "one score per pool member");
    let n = config.population_size;
    let mut report = SelectionReport::default();
    let mut eligible: Vec<usize> = (0..pool.len())
        .filter(|&i| !pool[i].trivial && enforce_resource_cap(&pool[i], t, config))
        .collect();
    report.filtered_out = pool.len() - eligible.len();
    if eligible.is_empty() {
        eligible = (0..pool.len()).collect();
    }

    if eligible.len() <= n {
        let mut out: Vec<Individual> = eligible.iter().map(|&i| pool[i].clone()).collect();
        while out.len() < n && !eligible.is_empty() {
            let src = &pool[eligible[rng.random_range(0..eligible.len())]];
            out.push(Individual {
                id: *next_id,
                clone_of: Some(src.id),
                ..src.clone()
            });
            *next_id += 1;
            report.clones += 1;
        }
        return (out, report);
    }

    let raw: Vec<f64> = pool
        .iter()
        .map(|i| i.fitness.unwrap_or(f64::NEG_INFINITY))
        .collect();
    let mut order = eligible.clone();
    order.sort_by(by_score_desc(&raw, &pool));
    let elites: Vec<usize> = order.into_iter().take(config.elitism).collect();
    let mut remaining: Vec<usize> = eligible
        .into_iter()
        .filter(|i| !elites.contains(i))
        .collect();

    let slots = n - elites.len();
    let k_size = (slots as f64 * config.diversity_fraction).round() as usize;
    let k_fit = slots - k_size;

    let fit_log_weights: Vec<f64> = match config.selection {
        SelectionMode::Rank => {
            let mut ranked = remaining.clone();
            ranked.sort_by(by_score_desc(scores, &pool));
            let mut lw = vec![0.0; pool.len()];
            for (r, &i) in ranked.iter().enumerate() {
                lw[i] = r as f64 * config.rank_base.ln();
            }
            remaining.iter().map(|&i| lw[i]).collect()
        }
        SelectionMode::Roulette => remaining.iter().map(|&i| scores[i].max(0.0).ln()).collect(),
    };
    let picked = sample_without_replacement(&fit_log_weights, k_fit, rng);
    let by_fitness: Vec<usize> = picked.iter().map(|&p| remaining[p]).collect();
    remaining.retain(|i| !by_fitness.contains(i));

    let ranked = size_order(&remaining, &pool);
    let mut lw = vec![0.0; pool.len()];
    for (s, &i) in ranked.iter().enumerate() {
        lw[i] = s as f64 * config.diversity_base.ln();
    }
    let size_log_weights: Vec<f64> = remaining.iter().map(|&i| lw[i]).collect();
    let picked = sample_without_replacement(&size_log_weights, k_size, rng);
    let by_size: Vec<usize> = picked.iter().map(|&p| remaining[p]).collect();

    let ids = |v: &[usize]| v.iter().map(|&i| pool[i].id).collect::<Vec<_>>();
    report.elites = ids(&elites);
    report.by_fitness = ids(&by_fitness);
    report.by_size = ids(&by_size);

    let mut keep = vec![false; pool.len()];
    for &i in elites.iter().chain(&by_fitness).chain(&by_size) {
        keep[i] = true;
    }
    let survivors = pool
        .into_iter()
        .zip(keep)
        .filter_map(|(ind, k)| k.then_some(ind))
        .collect();
    (survivors, report)
}

/// Indices ordered by node count ascending, lower id first on ties.
fn size_order(indices: &[usize], pool: &[Individual]) -> Vec<usize> {
    let mut v = indices.to_vec();
    v.sort_by_key(|&i| (pool[i].node_count(), pool[i].id));
    v
}
