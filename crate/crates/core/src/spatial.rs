//! Spatial autocorrelation: adjacency-based weight matrices, global Moran's I
//! with normal-approximation or permutation inference, and local Moran's I
//! (LISA) with conditional-permutation cluster classification.
//!
//! Permutation draws use ChaCha8 streams. `lisa_classify` derives one stream
//! per region from the caller's seed, so per-region loops can run in parallel
//! and still produce results identical to a sequential pass.

use std::fmt;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::panel::RegionSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightScheme {
    BinaryContiguity,
    RowStandardized,
}

impl WeightScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightScheme::BinaryContiguity => "binary",
            WeightScheme::RowStandardized => "row_standardized",
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Square nonnegative weight matrix over an ordered region list.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialWeights {
    pub order: Vec<String>,
    pub w: Array2<f64>,
    pub scheme: WeightScheme,
    /// Regions with no neighbors; their rows are zero.
    pub islands: Vec<String>,
}

impl SpatialWeights {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.w.sum()
    }

    /// Copy of the matrix with each nonzero row rescaled to sum to 1.
    pub fn row_standardized_matrix(&self) -> Array2<f64> {
        let mut w = self.w.clone();
        for mut row in w.rows_mut() {
            let sum: f64 = row.sum();
            if sum > 0.0 {
                row.mapv_inplace(|x| x / sum);
            }
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InferenceMethod {
    NormalApprox,
    Permutation,
}

impl InferenceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            InferenceMethod::NormalApprox => "normal_approx",
            InferenceMethod::Permutation => "permutation",
        }
    }
}

impl fmt::Display for InferenceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Global Moran's I with significance inference.
#[derive(Debug, Clone, PartialEq)]
pub struct MoranResult {
    pub i_value: f64,
    /// Expected value under the null, -1/(n-1).
    pub expected: f64,
    pub z: f64,
    /// One-sided upper-tail p-value (positive autocorrelation).
    pub p: f64,
    pub method: InferenceMethod,
    pub permutations: usize,
    pub seed: u64,
}

/// HH/HL/LH/LL cluster labels; `NotSignificant` also covers undefined sign
/// patterns (zero deviation or islands).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cluster {
    HH,
    HL,
    LH,
    LL,
    NotSignificant,
}

impl Cluster {
    pub fn as_str(self) -> &'static str {
        match self {
            Cluster::HH => "HH",
            Cluster::HL => "HL",
            Cluster::LH => "LH",
            Cluster::LL => "LL",
            Cluster::NotSignificant => "NS",
        }
    }
}

impl fmt::Display for Cluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-region local Moran's I with conditional-permutation significance.
#[derive(Debug, Clone, PartialEq)]
pub struct LisaResult {
    pub region_ids: Vec<String>,
    pub local_i: Vec<f64>,
    /// Two-sided pseudo p-values.
    pub p: Vec<f64>,
    pub cluster: Vec<Cluster>,
    pub permutations: usize,
    pub seed: u64,
    pub alpha: f64,
}

/// Build a weight matrix from region adjacency. Neighbor ids outside the
/// given region list are ignored, so the builder also works on subsets.
pub fn build_weights(regions: &[RegionSpec], scheme: WeightScheme) -> SpatialWeights {
    let n = regions.len();
    let order: Vec<String> = regions.iter().map(|r| r.id.clone()).collect();
    let index: std::collections::HashMap<&str, usize> = order
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let mut w = Array2::zeros((n, n));
    for (i, region) in regions.iter().enumerate() {
        for nb in &region.neighbors {
            if let Some(&j) = index.get(nb.as_str()) {
                if i != j {
                    w[[i, j]] = 1.0;
                }
            }
        }
    }

    let mut islands = Vec::new();
    for (i, region) in regions.iter().enumerate() {
        let row_sum: f64 = w.row(i).sum();
        if row_sum == 0.0 {
            islands.push(region.id.clone());
        } else if scheme == WeightScheme::RowStandardized {
            for j in 0..n {
                w[[i, j]] /= row_sum;
            }
        }
    }

    SpatialWeights {
        order,
        w,
        scheme,
        islands,
    }
}

fn deviations(x: &[f64]) -> (Vec<f64>, f64) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let ssd = d.iter().map(|v| v * v).sum();
    (d, ssd)
}

fn check_inputs(x: &[f64], weights: &SpatialWeights) -> Result<(Vec<f64>, f64)> {
    if x.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {} regions",
            x.len(),
            weights.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::EmptyInput("need at least 2 regions".into()));
    }
    if weights.total_weight() <= 0.0 {
        return Err(Error::EmptyWeights);
    }
    let (d, ssd) = deviations(x);
    if ssd == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((d, ssd))
}

fn moran_from_deviations(d: &[f64], ssd: f64, w: &Array2<f64>, total_weight: f64) -> f64 {
    let n = d.len();
    let mut cross = 0.0;
    for i in 0..n {
        for j in 0..n {
            let wij = w[[i, j]];
            if wij != 0.0 {
                cross += wij * d[i] * d[j];
            }
        }
    }
    (n as f64 / total_weight) * (cross / ssd)
}

/// Global Moran's I: n * sum_ij w_ij d_i d_j / (sum_ij w_ij * sum_i d_i^2).
pub fn morans_i(x: &[f64], weights: &SpatialWeights) -> Result<f64> {
    let (d, ssd) = check_inputs(x, weights)?;
    Ok(moran_from_deviations(
        &d,
        ssd,
        &weights.w,
        weights.total_weight(),
    ))
}

/// Expected Moran's I under the null hypothesis.
pub fn expected_i(region_count: usize) -> f64 {
    -1.0 / (region_count as f64 - 1.0)
}

/// Variance of I under the randomization assumption (Cliff-Ord moments).
fn randomization_variance(d: &[f64], ssd: f64, w: &Array2<f64>) -> f64 {
    let n = d.len() as f64;
    let s0: f64 = w.sum();
    let mut s1 = 0.0;
    for i in 0..d.len() {
        for j in 0..d.len() {
            let pair = w[[i, j]] + w[[j, i]];
            s1 += pair * pair;
        }
    }
    s1 *= 0.5;
    let mut s2 = 0.0;
    for i in 0..d.len() {
        let sums = w.row(i).sum() + w.column(i).sum();
        s2 += sums * sums;
    }
    let b2 = n * d.iter().map(|v| v.powi(4)).sum::<f64>() / (ssd * ssd);
    let s02 = s0 * s0;
    let a = n * ((n * n - 3.0 * n + 3.0) * s1 - n * s2 + 3.0 * s02);
    let b = b2 * ((n * n - n) * s1 - 2.0 * n * s2 + 6.0 * s02);
    let e = expected_i(d.len());
    (a - b) / ((n - 1.0) * (n - 2.0) * (n - 3.0) * s02) - e * e
}

/// Global Moran's I with a z-score and one-sided upper-tail p-value.
///
/// `NormalApprox` uses the randomization-variance z-score and the standard
/// normal tail. `Permutation` reshuffles the values with a ChaCha8 generator
/// seeded by `seed`; p = (#{I_perm >= I_obs} + 1) / (permutations + 1) and z
/// is taken against the permutation distribution's mean and spread.
pub fn morans_inference(
    x: &[f64],
    weights: &SpatialWeights,
    method: InferenceMethod,
    permutations: usize,
    seed: u64,
) -> Result<MoranResult> {
    let (d, ssd) = check_inputs(x, weights)?;
    let total_weight = weights.total_weight();
    let observed = moran_from_deviations(&d, ssd, &weights.w, total_weight);
    let expected = expected_i(x.len());

    match method {
        InferenceMethod::NormalApprox => {
            let var = randomization_variance(&d, ssd, &weights.w);
            let z = if var > 0.0 {
                (observed - expected) / var.sqrt()
            } else {
                0.0
            };
            let normal = Normal::new(0.0, 1.0).expect("unit normal");
            let p = 1.0 - normal.cdf(z);
            Ok(MoranResult {
                i_value: observed,
                expected,
                z,
                p,
                method,
                permutations: 0,
                seed,
            })
        }
        InferenceMethod::Permutation => {
            if permutations == 0 {
                return Err(Error::Config("permutations must be >= 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pool = d.clone();
            let mut sims = Vec::with_capacity(permutations);
            let mut at_least = 0usize;
            for _ in 0..permutations {
                pool.shuffle(&mut rng);
                let sim = moran_from_deviations(&pool, ssd, &weights.w, total_weight);
                if sim >= observed {
                    at_least += 1;
                }
                sims.push(sim);
            }
            let p = (at_least + 1) as f64 / (permutations + 1) as f64;
            let mean = sims.iter().sum::<f64>() / sims.len() as f64;
            let var = sims.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / sims.len() as f64;
            let z = if var > 0.0 {
                (observed - mean) / var.sqrt()
            } else {
                0.0
            };
            Ok(MoranResult {
                i_value: observed,
                expected,
                z,
                p,
                method,
                permutations,
                seed,
            })
        }
    }
}

/// Local Moran's I per region: n * d_i * sum_j w_ij d_j / sum_k d_k^2.
///
/// With row-standardized weights the values satisfy
/// sum_i I_i = I_global * sum_ij w_ij.
pub fn lisa(x: &[f64], weights: &SpatialWeights) -> Result<Vec<f64>> {
    let (d, ssd) = check_inputs(x, weights)?;
    let n = d.len();
    Ok((0..n)
        .map(|i| {
            let lag: f64 = (0..n).map(|j| weights.w[[i, j]] * d[j]).sum();
            n as f64 * d[i] * lag / ssd
        })
        .collect())
}

/// Local Moran's I with conditional-permutation inference and HH/HL/LH/LL
/// labeling.
///
/// For each region the observed value is held fixed while the remaining
/// values are permuted over the remaining positions (999-style conditional
/// randomization). p-values are two-sided pseudo p-values; regions with
/// p <= alpha are labeled by the sign pattern of their own deviation and of
/// their row-standardized spatial lag. Regions with zero deviation, and
/// islands, stay `NotSignificant`.
pub fn lisa_classify(
    x: &[f64],
    weights: &SpatialWeights,
    permutations: usize,
    seed: u64,
    alpha: f64,
) -> Result<LisaResult> {
    if permutations == 0 {
        return Err(Error::Config("permutations must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("alpha {alpha} outside [0, 1]")));
    }
    let (d, ssd) = check_inputs(x, weights)?;
    let n = d.len();
    let local = lisa(x, weights)?;

    // labels use the neighbor-average lag regardless of the input scheme
    let w_std = weights.row_standardized_matrix();
    let mean = x.iter().sum::<f64>() / n as f64;

    let per_region: Vec<(f64, Cluster)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let w_row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| weights.w[[i, j]]).collect();
            if w_row.iter().all(|&w| w == 0.0) {
                return (1.0, Cluster::NotSignificant);
            }
            let mut others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d[j]).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let scale = n as f64 * d[i] / ssd;
            let observed = local[i];
            let mut hi = 0usize;
            let mut lo = 0usize;
            for _ in 0..permutations {
                others.shuffle(&mut rng);
                let lag: f64 = w_row.iter().zip(&others).map(|(w, v)| w * v).sum();
                let sim = scale * lag;
                if sim >= observed {
                    hi += 1;
                }
                if sim <= observed {
                    lo += 1;
                }
            }
            let p_hi = (hi + 1) as f64 / (permutations + 1) as f64;
            let p_lo = (lo + 1) as f64 / (permutations + 1) as f64;
            let p = (2.0 * p_hi.min(p_lo)).min(1.0);

            let cluster = if p > alpha || d[i] == 0.0 {
                Cluster::NotSignificant
            } else {
                let lag_value: f64 = (0..n).map(|j| w_std[[i, j]] * x[j]).sum();
                if lag_value == mean {
                    Cluster::NotSignificant
                } else {
                    match (x[i] > mean, lag_value > mean) {
                        (true, true) => Cluster::HH,
                        (true, false) => Cluster::HL,
                        (false, true) => Cluster::LH,
                        (false, false) => Cluster::LL,
                    }
                }
            };
            (p, cluster)
        })
        .collect();

    let (p, cluster): (Vec<f64>, Vec<Cluster>) = per_region.into_iter().unzip();
    Ok(LisaResult {
        region_ids: weights.order.clone(),
        local_i: local,
        p,
        cluster,
        permutations,
        seed,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn region(id: &str, neighbors: &[&str]) -> RegionSpec {
        RegionSpec {
            id: id.into(),
            name: id.into(),
            macro_region: crate::panel::MacroRegion::East,
            lon: 110.0,
            lat: 30.0,
            neighbors: neighbors.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
        }
    }

    fn mutual_pair(scheme: WeightScheme) -> SpatialWeights {
        build_weights(&[region("a", &["b"]), region("b", &["a"])], scheme)
    }

    /// 4-neighbour (rook) grid of `rows` x `cols` cells.
    fn grid(rows: usize, cols: usize, scheme: WeightScheme) -> SpatialWeights {
        let id = |r: usize, c: usize| format!("r{r}c{c}");
        let mut regions = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let mut neighbors = Vec::new();
                if r > 0 {
                    neighbors.push(id(r - 1, c));
                }
                if r + 1 < rows {
                    neighbors.push(id(r + 1, c));
                }
                if c > 0 {
                    neighbors.push(id(r, c - 1));
                }
                if c + 1 < cols {
                    neighbors.push(id(r, c + 1));
                }
                regions.push(RegionSpec {
                    id: id(r, c),
                    name: id(r, c),
                    macro_region: crate::panel::MacroRegion::East,
                    lon: 100.0 + c as f64,
                    lat: 30.0 + r as f64,
                    neighbors: neighbors.into_iter().collect(),
                });
            }
        }
        build_weights(&regions, scheme)
    }

    /// Left half high, right half low, with mild deterministic jitter.
    fn two_block_values(rows: usize, cols: usize) -> Vec<f64> {
        let mut values = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let base = if c < cols / 2 { 10.0 } else { 0.0 };
                values.push(base + 0.1 * ((r * cols + c) % 5) as f64);
            }
        }
        values
    }

    #[test]
    fn binary_weights_for_mutual_pair() {
        let w = mutual_pair(WeightScheme::BinaryContiguity);
        assert_eq!(w.w[[0, 0]], 0.0);
        assert_eq!(w.w[[0, 1]], 1.0);
        assert_eq!(w.w[[1, 0]], 1.0);
        assert_eq!(w.w[[1, 1]], 0.0);
        assert!(w.islands.is_empty());
    }

    #[test]
    fn row_standardized_chain() {
        let regions = vec![
            region("a", &["b"]),
            region("b", &["a", "c"]),
            region("c", &["b"]),
        ];
        let w = build_weights(&regions, WeightScheme::RowStandardized);
        assert_eq!(w.w[[1, 0]], 0.5);
        assert_eq!(w.w[[1, 1]], 0.0);
        assert_eq!(w.w[[1, 2]], 0.5);
        for i in 0..3 {
            assert_abs_diff_eq!(w.w.row(i).sum(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn island_keeps_zero_row_and_is_reported() {
        let regions = vec![region("a", &["b"]), region("b", &["a"]), region("solo", &[])];
        let w = build_weights(&regions, WeightScheme::RowStandardized);
        assert_eq!(w.islands, vec!["solo".to_string()]);
        assert_eq!(w.w.row(2).sum(), 0.0);
    }

    #[test]
    fn moran_of_mutual_pair_is_minus_one() {
        for scheme in [WeightScheme::BinaryContiguity, WeightScheme::RowStandardized] {
            let w = mutual_pair(scheme);
            assert_eq!(morans_i(&[1.0, -1.0], &w).unwrap(), -1.0);
        }
    }

    #[test]
    fn moran_of_alternating_cycle_is_minus_one() {
        let regions = vec![
            region("a", &["b", "d"]),
            region("b", &["a", "c"]),
            region("c", &["b", "d"]),
            region("d", &["c", "a"]),
        ];
        let w = build_weights(&regions, WeightScheme::BinaryContiguity);
        assert_abs_diff_eq!(
            morans_i(&[1.0, -1.0, 1.0, -1.0], &w).unwrap(),
            -1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn constant_values_are_zero_variance() {
        let w = mutual_pair(WeightScheme::BinaryContiguity);
        assert!(matches!(
            morans_i(&[2.0, 2.0], &w).unwrap_err(),
            Error::ZeroVariance
        ));
    }

    #[test]
    fn zero_weight_matrix_is_error() {
        let regions = vec![region("a", &[]), region("b", &[])];
        let w = build_weights(&regions, WeightScheme::BinaryContiguity);
        assert!(matches!(
            morans_i(&[1.0, 2.0], &w).unwrap_err(),
            Error::EmptyWeights
        ));
    }

    #[test]
    fn expected_value_is_exact() {
        assert_eq!(expected_i(2), -1.0);
        assert_eq!(expected_i(31), -1.0 / 30.0);
    }

    #[test]
    fn pair_inference_is_degenerate() {
        let w = mutual_pair(WeightScheme::BinaryContiguity);
        let res =
            morans_inference(&[1.0, -1.0], &w, InferenceMethod::Permutation, 99, 7).unwrap();
        assert_eq!(res.i_value, -1.0);
        assert_eq!(res.expected, -1.0);
        // every permutation of two values gives I = -1, so z = 0 and p = 1
        assert_eq!(res.z, 0.0);
        assert_eq!(res.p, 1.0);
    }

    #[test]
    fn clustered_grid_is_significant_under_both_methods() {
        let w = grid(4, 4, WeightScheme::RowStandardized);
        let x = two_block_values(4, 4);
        let perm = morans_inference(&x, &w, InferenceMethod::Permutation, 999, 42).unwrap();
        assert!(perm.i_value > 0.3, "I = {}", perm.i_value);
        assert!(perm.p < 0.05, "permutation p = {}", perm.p);
        let norm = morans_inference(&x, &w, InferenceMethod::NormalApprox, 0, 42).unwrap();
        assert!(norm.p < 0.05, "normal-approx p = {}", norm.p);
        assert_abs_diff_eq!(norm.i_value, perm.i_value, epsilon = 1e-15);
    }

    #[test]
    fn permutation_results_are_reproducible() {
        let w = grid(3, 3, WeightScheme::RowStandardized);
        let x = vec![1.0, 5.0, 2.0, 8.0, 3.0, 9.0, 4.0, 7.0, 6.0];
        let a = morans_inference(&x, &w, InferenceMethod::Permutation, 199, 11).unwrap();
        let b = morans_inference(&x, &w, InferenceMethod::Permutation, 199, 11).unwrap();
        assert_eq!(a, b);
        let c = morans_inference(&x, &w, InferenceMethod::Permutation, 199, 12).unwrap();
        assert!(a.p != c.p || a.z != c.z);
    }

    #[test]
    fn lisa_of_mutual_pair() {
        let w = mutual_pair(WeightScheme::BinaryContiguity);
        let local = lisa(&[1.0, -1.0], &w).unwrap();
        assert_eq!(local, vec![-1.0, -1.0]);
    }

    #[test]
    fn lisa_zero_when_neighbors_at_mean() {
        // b's neighbors a and c sit exactly at the mean of (0, 2, 4, 6)
        let regions = vec![
            region("a", &["b"]),
            region("b", &["a", "c"]),
            region("c", &["b", "d"]),
            region("d", &["c"]),
        ];
        let w = build_weights(&regions, WeightScheme::RowStandardized);
        let x = vec![3.0, 0.0, 3.0, 6.0];
        let local = lisa(&x, &w).unwrap();
        assert_abs_diff_eq!(local[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lisa_positive_inside_blocks() {
        let w = grid(4, 4, WeightScheme::RowStandardized);
        let x = two_block_values(4, 4);
        let local = lisa(&x, &w).unwrap();
        // interior cells of each block associate positively
        for idx in [0, 4, 8, 12, 3, 7, 11, 15] {
            assert!(local[idx] > 0.0, "cell {idx}: {}", local[idx]);
        }
    }

    #[test]
    fn lisa_sum_relation_with_row_standardized_weights() {
        let w = grid(4, 4, WeightScheme::RowStandardized);
        let x = two_block_values(4, 4);
        let local = lisa(&x, &w).unwrap();
        let global = morans_i(&x, &w).unwrap();
        let total: f64 = local.iter().sum();
        assert_abs_diff_eq!(total, global * w.total_weight(), epsilon = 1e-10);
    }

    #[test]
    fn lisa_classify_two_block_map() {
        // two tightly connected blocks joined by a single bridge edge, so
        // every region's neighborhood is dominated by its own block
        let block = |offset: usize| -> Vec<RegionSpec> {
            (0..6)
                .map(|i| {
                    let id = format!("c{}", offset + i);
                    let mut neighbors: BTreeSet<String> = (0..6)
                        .filter(|&j| j != i)
                        .map(|j| format!("c{}", offset + j))
                        .collect();
                    if offset == 0 && i == 5 {
                        neighbors.insert("c6".into());
                    }
                    if offset == 6 && i == 0 {
                        neighbors.insert("c5".into());
                    }
                    RegionSpec {
                        id: id.clone(),
                        name: id,
                        macro_region: crate::panel::MacroRegion::East,
                        lon: 100.0,
                        lat: 30.0,
                        neighbors,
                    }
                })
                .collect()
        };
        let mut regions = block(0);
        regions.extend(block(6));
        let w = build_weights(&regions, WeightScheme::RowStandardized);
        let x: Vec<f64> = (0..12)
            .map(|i| if i < 6 { 10.0 + 0.01 * i as f64 } else { 0.01 * i as f64 })
            .collect();
        let res = lisa_classify(&x, &w, 999, 42, 0.05).unwrap();
        for (idx, cluster) in res.cluster.iter().enumerate() {
            let expected = if idx < 6 { Cluster::HH } else { Cluster::LL };
            assert_eq!(*cluster, expected, "cell {idx}, p = {}", res.p[idx]);
        }
    }

    #[test]
    fn lisa_classify_zero_deviation_is_not_significant() {
        // region b sits exactly at the mean
        let regions = vec![
            region("a", &["b", "c"]),
            region("b", &["a", "c"]),
            region("c", &["a", "b"]),
        ];
        let w = build_weights(&regions, WeightScheme::RowStandardized);
        let x = vec![0.0, 4.0, 8.0];
        let res = lisa_classify(&x, &w, 999, 1, 1.0).unwrap();
        assert_eq!(res.cluster[1], Cluster::NotSignificant);
    }

    #[test]
    fn lisa_classify_reproducible_and_island_safe() {
        let regions = vec![region("a", &["b"]), region("b", &["a"]), region("solo", &[])];
        let w = build_weights(&regions, WeightScheme::RowStandardized);
        let x = vec![1.0, 2.0, 3.0];
        let a = lisa_classify(&x, &w, 99, 5, 0.05).unwrap();
        let b = lisa_classify(&x, &w, 99, 5, 0.05).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cluster[2], Cluster::NotSignificant);
        assert_eq!(a.p[2], 1.0);
    }

    #[test]
    fn lisa_null_rejection_rate_near_alpha() {
        // unstructured values: the share of significant regions across many
        // seeds should sit near alpha
        let w = grid(5, 5, WeightScheme::RowStandardized);
        let mut significant = 0usize;
        let mut total = 0usize;
        for seed in 0..40u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x: Vec<f64> = (0..25).map(|i| i as f64).collect();
            x.shuffle(&mut rng);
            let res = lisa_classify(&x, &w, 999, seed + 1000, 0.05).unwrap();
            significant += res
                .cluster
                .iter()
                .filter(|c| **c != Cluster::NotSignificant)
                .count();
            total += 25;
        }
        let rate = significant as f64 / total as f64;
        assert!(
            (0.01..=0.12).contains(&rate),
            "null rejection rate {rate} far from alpha=0.05"
        );
    }

    proptest! {
        #[test]
        fn moran_is_affine_invariant(
            a in prop::sample::select(vec![-3.0f64, -1.0, 0.5, 2.0, 10.0]),
            b in -100.0..100.0f64,
        ) {
            let w = grid(3, 3, WeightScheme::RowStandardized);
            let x = vec![1.0, 5.0, 2.0, 8.0, 3.0, 9.0, 4.0, 7.0, 6.0];
            let tx: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let i1 = morans_i(&x, &w).unwrap();
            let i2 = morans_i(&tx, &w).unwrap();
            prop_assert!((i1 - i2).abs() < 1e-10);
        }

        #[test]
        fn moran_in_unit_interval_on_row_standardized_fixtures(seed in 0u64..50) {
            let w = grid(4, 4, WeightScheme::RowStandardized);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x: Vec<f64> = (0..16).map(|i| i as f64).collect();
            x.shuffle(&mut rng);
            let i = morans_i(&x, &w).unwrap();
            prop_assert!((-1.0..=1.0).contains(&i), "I = {i}");
        }
    }
}
