//! Document-level cluster bootstrap for arbitrary span statistics.
//!
//! Each replicate resamples documents with replacement (same count as the
//! original), pools their span records and evaluates the statistic.
//! Replicate k draws from a ChaCha stream derived from (seed, k), so results
//! are bit-identical regardless of thread count or evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bootstrap settings. `b` replicates, percentile interval at `ci_level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub b: usize,
    pub seed: u64,
    pub ci_level: f64,
}

impl BootstrapConfig {
    pub const DEFAULT_B: usize = 2000;
    pub const DEFAULT_CI_LEVEL: f64 = 0.95;

    pub fn new(b: usize, seed: u64) -> Self {
        Self {
            b,
            seed,
            ci_level: Self::DEFAULT_CI_LEVEL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.b < 1 {
            return Err(Error::InvalidConfig("bootstrap B must be >= 1".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "ci_level must be in (0, 1), got {}",
                self.ci_level
            )));
        }
        Ok(())
    }
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self::new(Self::DEFAULT_B, 0)
    }
}

/// Point estimate with a percentile confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapEstimate {
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Replicates where the statistic was defined.
    pub used: usize,
    /// Replicates skipped because the statistic was undefined there.
    pub skipped: usize,
}

impl BootstrapEstimate {
    /// More than 10% of replicates undefined: interval flagged unstable.
    pub fn is_unstable(&self) -> bool {
        let total = self.used + self.skipped;
        total > 0 && (self.skipped as f64) > 0.10 * total as f64
    }
}

/// Nearest-rank quantile of a sorted slice (1-based rank ceil(p*m)).
pub(crate) fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let m = sorted.len();
    let rank = (p * m as f64).ceil() as usize;
    sorted[rank.clamp(1, m) - 1]
}

fn resample_indices(n: usize, seed: u64, replicate: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Run the replicate loop: returns per-replicate statistic values in
/// replicate order (None where undefined).
fn replicate_values<T, F>(groups: &[&[T]], statistic: &F, config: &BootstrapConfig) -> Vec<Option<Vec<f64>>>
where
    T: Sync,
    F: Fn(&[&[T]]) -> Option<Vec<f64>> + Sync,
{
    (0..config.b as u64)
        .into_par_iter()
        .map(|k| {
            let picks = resample_indices(groups.len(), config.seed, k);
            let selected: Vec<&[T]> = picks.iter().map(|&i| groups[i]).collect();
            statistic(&selected)
        })
        .collect()
}

fn percentile_interval(values: &mut [f64], ci_level: f64) -> (f64, f64) {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite statistic"));
    let alpha = (1.0 - ci_level) / 2.0;
    (
        nearest_rank(values, alpha),
        nearest_rank(values, 1.0 - alpha),
    )
}

/// Cluster bootstrap for a scalar statistic.
///
/// `groups` holds one record slice per document (possibly empty; empty
/// documents still take part in resampling). The statistic sees the selected
/// group slices and returns None when undefined for that pool; undefined
/// replicates are skipped and counted.
pub fn cluster_bootstrap<T, F>(
    groups: &[&[T]],
    statistic: F,
    config: &BootstrapConfig,
) -> Result<BootstrapEstimate>
where
    T: Sync,
    F: Fn(&[&[T]]) -> Option<f64> + Sync,
{
    config.validate()?;
    if groups.is_empty() || groups.iter().all(|g| g.is_empty()) {
        return Err(Error::InvalidConfig(
            "cluster bootstrap needs at least one document with one record".into(),
        ));
    }
    let point = statistic(groups).ok_or(Error::StatisticUndefined { b: 0 })?;
    let wrapped = |sel: &[&[T]]| statistic(sel).map(|v| vec![v]);
    let raw = replicate_values(groups, &wrapped, config);
    let mut values: Vec<f64> = raw.iter().filter_map(|r| r.as_ref().map(|v| v[0])).collect();
    let skipped = config.b - values.len();
    if values.is_empty() {
        return Err(Error::StatisticUndefined { b: config.b });
    }
    let used = values.len();
    let (mut ci_low, mut ci_high) = percentile_interval(&mut values, config.ci_level);
    // The reported interval always covers the point estimate.
    ci_low = ci_low.min(point);
    ci_high = ci_high.max(point);
    Ok(BootstrapEstimate {
        point,
        ci_low,
        ci_high,
        used,
        skipped,
    })
}

/// Per-component estimate from a vector-valued replicate statistic.
#[derive(Debug, Clone)]
pub struct VectorBootstrap {
    pub points: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub used: usize,
    pub skipped: usize,
}

/// Cluster bootstrap for a vector statistic (one CI per component). Used for
/// per-coefficient regression intervals so a single resampling pass serves
/// all terms.
pub fn cluster_bootstrap_vec<T, F>(
    groups: &[&[T]],
    statistic: F,
    config: &BootstrapConfig,
) -> Result<VectorBootstrap>
where
    T: Sync,
    F: Fn(&[&[T]]) -> Option<Vec<f64>> + Sync,
{
    config.validate()?;
    if groups.is_empty() || groups.iter().all(|g| g.is_empty()) {
        return Err(Error::InvalidConfig(
            "cluster bootstrap needs at least one document with one record".into(),
        ));
    }
    let points = statistic(groups).ok_or(Error::StatisticUndefined { b: 0 })?;
    let raw = replicate_values(groups, &statistic, config);
    let defined: Vec<&Vec<f64>> = raw.iter().flatten().collect();
    if defined.is_empty() {
        return Err(Error::StatisticUndefined { b: config.b });
    }
    let used = defined.len();
    let skipped = config.b - used;
    let dim = points.len();
    let mut ci_low = Vec::with_capacity(dim);
    let mut ci_high = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut component: Vec<f64> = defined.iter().map(|v| v[j]).collect();
        let (lo, hi) = percentile_interval(&mut component, config.ci_level);
        ci_low.push(lo.min(points[j]));
        ci_high.push(hi.max(points[j]));
    }
    Ok(VectorBootstrap {
        points,
        ci_low,
        ci_high,
        used,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_stat(sel: &[&[f64]]) -> Option<f64> {
        let mut n = 0usize;
        let mut sum = 0.0;
        for g in sel {
            for v in *g {
                n += 1;
                sum += v;
            }
        }
        if n == 0 {
            None
        } else {
            Some(sum / n as f64)
        }
    }

    #[test]
    fn single_document_has_degenerate_ci() {
        let doc = vec![1.0, 0.0, 1.0, 1.0];
        let groups: Vec<&[f64]> = vec![&doc];
        let est = cluster_bootstrap(&groups, mean_stat, &BootstrapConfig::new(200, 7)).unwrap();
        assert_eq!(est.point, 0.75);
        assert_eq!(est.ci_low, 0.75);
        assert_eq!(est.ci_high, 0.75);
        assert_eq!(est.skipped, 0);
    }

    #[test]
    fn all_ones_has_unit_ci() {
        let docs: Vec<Vec<f64>> = (0..10).map(|_| vec![1.0, 1.0, 1.0]).collect();
        let groups: Vec<&[f64]> = docs.iter().map(|d| d.as_slice()).collect();
        let est = cluster_bootstrap(&groups, mean_stat, &BootstrapConfig::new(100, 3)).unwrap();
        assert_eq!((est.point, est.ci_low, est.ci_high), (1.0, 1.0, 1.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let docs: Vec<Vec<f64>> = (0..20)
            .map(|i| (0..5).map(|j| ((i * 5 + j) % 3) as f64 / 2.0).collect())
            .collect();
        let groups: Vec<&[f64]> = docs.iter().map(|d| d.as_slice()).collect();
        let cfg = BootstrapConfig::new(500, 42);
        let a = cluster_bootstrap(&groups, mean_stat, &cfg).unwrap();
        let b = cluster_bootstrap(&groups, mean_stat, &cfg).unwrap();
        assert_eq!(a.ci_low.to_bits(), b.ci_low.to_bits());
        assert_eq!(a.ci_high.to_bits(), b.ci_high.to_bits());
        let c = cluster_bootstrap(&groups, mean_stat, &BootstrapConfig::new(500, 43)).unwrap();
        assert!(c.ci_low.to_bits() != a.ci_low.to_bits() || c.ci_high.to_bits() != a.ci_high.to_bits());
    }

    #[test]
    fn undefined_statistic_errors() {
        let doc = vec![1.0];
        let groups: Vec<&[f64]> = vec![&doc];
        let err = cluster_bootstrap(&groups, |_: &[&[f64]]| None, &BootstrapConfig::new(10, 1));
        assert!(err.is_err());
    }

    #[test]
    fn skipped_replicates_counted() {
        // statistic undefined when the pool lacks any records from doc 0
        let docs: Vec<Vec<f64>> = vec![vec![1.0], vec![0.0], vec![0.5]];
        let groups: Vec<&[f64]> = docs.iter().map(|d| d.as_slice()).collect();
        let stat = |sel: &[&[f64]]| {
            let has_one = sel.iter().any(|g| g.first() == Some(&1.0));
            if has_one {
                mean_stat(sel)
            } else {
                None
            }
        };
        let est = cluster_bootstrap(&groups, stat, &BootstrapConfig::new(300, 9)).unwrap();
        assert!(est.skipped > 0);
        assert_eq!(est.used + est.skipped, 300);
        // P(no doc0 in 3 draws) = (2/3)^3 ~ 0.296 > 10%
        assert!(est.is_unstable());
    }

    #[test]
    fn wider_ci_level_widens_interval() {
        let docs: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i % 2) as f64, ((i + 1) % 2) as f64, (i % 3 == 0) as u8 as f64])
            .collect();
        let groups: Vec<&[f64]> = docs.iter().map(|d| d.as_slice()).collect();
        let mut narrow_cfg = BootstrapConfig::new(400, 5);
        narrow_cfg.ci_level = 0.80;
        let mut wide_cfg = narrow_cfg;
        wide_cfg.ci_level = 0.99;
        let narrow = cluster_bootstrap(&groups, mean_stat, &narrow_cfg).unwrap();
        let wide = cluster_bootstrap(&groups, mean_stat, &wide_cfg).unwrap();
        assert!(wide.ci_low <= narrow.ci_low);
        assert!(wide.ci_high >= narrow.ci_high);
    }

    #[test]
    fn nearest_rank_quantiles() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 0.025), 3.0); // ceil(2.5) = 3
        assert_eq!(nearest_rank(&v, 0.975), 98.0);
        assert_eq!(nearest_rank(&v, 1.0), 100.0);
        assert_eq!(nearest_rank(&v, 0.0), 1.0);
    }
}
