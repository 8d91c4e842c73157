use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rule for choosing which edge to try removing next.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrunePolicy {
    UniformRandom,
    #[default]
    GreedyMinWeight,
    /// Probability proportional to `exp(−|ω|/temperature)`.
    Boltzmann {
        temperature: f64,
    },
}

impl std::str::FromStr for PrunePolicy {
    type Err = Error;

    /// Accepts `uniform`, `greedy`, `boltzmann` (temperature 0.1) or `boltzmann:T`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uniform_random" => Ok(PrunePolicy::UniformRandom),
            "greedy" | "greedy_min_weight" => Ok(PrunePolicy::GreedyMinWeight),
            "boltzmann" => Ok(PrunePolicy::Boltzmann { temperature: 0.1 }),
            other => {
                let t = other
                    .strip_prefix("boltzmann:")
                    .and_then(|t| t.parse::<f64>().ok())
                    .ok_or_else(|| Error::invalid(format!("unknown prune policy `{other}`")))?;
                if t.is_nan() || t <= 0.0 || t.is_infinite() {
                    return Err(Error::invalid("boltzmann temperature must be positive"));
                }
                Ok(PrunePolicy::Boltzmann { temperature: t })
            }
        }
    }
}

/// Picks an index into `moduli` according to `policy`.
pub fn select_edge_to_prune(
    moduli: &[f64],
    policy: &PrunePolicy,
    rng: &mut impl Rng,
) -> Result<usize> {
    if moduli.is_empty() {
        return Err(Error::NoEdges);
    }
    match *policy {
        PrunePolicy::UniformRandom => Ok(rng.gen_range(0..moduli.len())),
        PrunePolicy::GreedyMinWeight => Ok(argmin(moduli)),
        PrunePolicy::Boltzmann { temperature } => {
            if temperature.is_nan() || temperature <= 0.0 {
                return Err(Error::invalid("boltzmann temperature must be positive"));
            }
            let weights = boltzmann_weights(moduli, temperature);
            let total: f64 = weights.iter().sum();
            let mut r = rng.gen::<f64>() * total;
            for (i, w) in weights.iter().enumerate() {
                if r < *w {
                    return Ok(i);
                }
                r -= w;
            }
            Ok(argmin(moduli))
        }
    }
}

/// Normalized selection probabilities under the Boltzmann policy.
pub fn boltzmann_probabilities(moduli: &[f64], temperature: f64) -> Vec<f64> {
    let w = boltzmann_weights(moduli, temperature);
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn boltzmann_weights(moduli: &[f64], temperature: f64) -> Vec<f64> {
    // Shifting by the minimum keeps the largest weight at exactly 1.
    let min = moduli.iter().copied().fold(f64::INFINITY, f64::min);
    moduli
        .iter()
        .map(|m| (-(m - min) / temperature).exp())
        .collect()
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn greedy_takes_smallest() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = PrunePolicy::GreedyMinWeight;
        assert_eq!(
            select_edge_to_prune(&[0.9, 0.1, 0.5], &p, &mut rng).unwrap(),
            1
        );
        assert_eq!(
            select_edge_to_prune(&[0.2, 0.1, 0.1], &p, &mut rng).unwrap(),
            1
        );
    }

    #[test]
    fn empty_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            select_edge_to_prune(&[], &PrunePolicy::UniformRandom, &mut rng),
            Err(Error::NoEdges)
        ));
    }

    #[test]
    fn boltzmann_probabilities_sum_to_one() {
        let p = boltzmann_probabilities(&[0.3, 0.0, 2.0, 0.7], 0.5);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[1] > p[0] && p[0] > p[3] && p[3] > p[2]);
    }

    #[test]
    fn policy_parsing() {
        assert_eq!(
            "greedy".parse::<PrunePolicy>().unwrap(),
            PrunePolicy::GreedyMinWeight
        );
        assert_eq!(
            "boltzmann:0.25".parse::<PrunePolicy>().unwrap(),
            PrunePolicy::Boltzmann { temperature: 0.25 }
        );
        assert!("boltzmann:-1".parse::<PrunePolicy>().is_err());
        assert!("random-ish".parse::<PrunePolicy>().is_err());
    }
}
