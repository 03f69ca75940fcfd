//! Entropy weight method: min-max normalization pooled over all years and
//! regions, cell proportions, information entropy per indicator, divergence
//! weights, and the weighted composite level per (year, region).
//!
//! Normalization bounds are taken over the pooled panel (every year and
//! region together), so one weight vector applies to the whole period and
//! composite levels are comparable across years. A constant column
//! normalizes to 1 everywhere, which makes its proportions uniform, its
//! entropy 1, and its weight 0.

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::panel::{Direction, PanelDataset, Subsystem};

/// Pooled min/max per indicator of one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationBounds {
    pub indicator_ids: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Normalized values `z[[year, region, k]]` in [0, 1] for one subsystem,
/// where `k` indexes the subsystem's indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPanel {
    pub subsystem: Subsystem,
    pub indicator_ids: Vec<String>,
    pub z: Array3<f64>,
    pub bounds: NormalizationBounds,
}

impl NormalizedPanel {
    pub fn year_count(&self) -> usize {
        self.z.shape()[0]
    }

    pub fn region_count(&self) -> usize {
        self.z.shape()[1]
    }

    pub fn indicator_count(&self) -> usize {
        self.z.shape()[2]
    }
}

/// Entropy, divergence, and normalized weight per indicator of one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyWeights {
    pub subsystem: Subsystem,
    pub indicator_ids: Vec<String>,
    pub entropy: Vec<f64>,
    pub divergence: Vec<f64>,
    pub weight: Vec<f64>,
}

/// Composite levels per (year, region) for both subsystems, plus national
/// yearly means (unweighted over regions).
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSeries {
    pub years: Vec<i32>,
    pub region_ids: Vec<String>,
    /// Subsystem X composite, `f[[year, region]]`.
    pub f: Array2<f64>,
    /// Subsystem Y composite, `g[[year, region]]`.
    pub g: Array2<f64>,
    pub mean_f: Vec<f64>,
    pub mean_g: Vec<f64>,
    pub weights_x: EntropyWeights,
    pub weights_y: EntropyWeights,
}

/// Min-max normalize one subsystem with bounds pooled across all years and
/// regions. Positive indicators map as (x - min)/(max - min), negative ones
/// as (max - x)/(max - min); constant columns map to 1 everywhere.
pub fn normalize(ds: &PanelDataset, subsystem: Subsystem) -> Result<NormalizedPanel> {
    let cols = ds.subsystem_indicators(subsystem);
    if cols.is_empty() {
        return Err(Error::EmptySubsystem(subsystem.as_str().into()));
    }
    let (v, m) = (ds.year_count(), ds.region_count());
    let k = cols.len();

    let mut min = vec![f64::INFINITY; k];
    let mut max = vec![f64::NEG_INFINITY; k];
    for (c, &j) in cols.iter().enumerate() {
        for t in 0..v {
            for r in 0..m {
                let x = ds.values[[t, r, j]];
                min[c] = min[c].min(x);
                max[c] = max[c].max(x);
            }
        }
    }

    let mut z = Array3::zeros((v, m, k));
    for (c, &j) in cols.iter().enumerate() {
        let span = max[c] - min[c];
        for t in 0..v {
            for r in 0..m {
                let x = ds.values[[t, r, j]];
                z[[t, r, c]] = if span == 0.0 {
                    1.0
                } else {
                    match ds.indicators[j].direction {
                        Direction::Positive => (x - min[c]) / span,
                        Direction::Negative => (max[c] - x) / span,
                    }
                };
            }
        }
    }

    let indicator_ids = cols.iter().map(|&j| ds.indicators[j].id.clone()).collect();
    Ok(NormalizedPanel {
        subsystem,
        indicator_ids,
        z,
        bounds: NormalizationBounds {
            indicator_ids: cols.iter().map(|&j| ds.indicators[j].id.clone()).collect(),
            min,
            max,
        },
    })
}

/// Cell proportions: each normalized value divided by its indicator's pooled
/// column sum, so every column of the result sums to 1.
pub fn proportions(np: &NormalizedPanel) -> Result<Array3<f64>> {
    let (v, m, k) = (np.year_count(), np.region_count(), np.indicator_count());
    let mut s = Array3::zeros((v, m, k));
    for c in 0..k {
        let mut total = 0.0;
        for t in 0..v {
            for r in 0..m {
                total += np.z[[t, r, c]];
            }
        }
        if total <= 0.0 {
            return Err(Error::ZeroColumn(np.indicator_ids[c].clone()));
        }
        for t in 0..v {
            for r in 0..m {
                s[[t, r, c]] = np.z[[t, r, c]] / total;
            }
        }
    }
    Ok(s)
}

/// Information entropy per indicator: -(1/ln(v*m)) * sum(S ln S), with the
/// 0*ln(0) = 0 convention. Results are clamped to [0, 1] against rounding.
pub fn entropy(s: &Array3<f64>, year_count: usize, region_count: usize) -> Result<Vec<f64>> {
    let cells = year_count * region_count;
    if cells <= 1 {
        return Err(Error::DegenerateLog);
    }
    let scale = -1.0 / (cells as f64).ln();
    let k = s.shape()[2];
    let mut e = vec![0.0; k];
    for c in 0..k {
        let mut acc = 0.0;
        for t in 0..year_count {
            for r in 0..region_count {
                let p = s[[t, r, c]];
                if p > 0.0 {
                    acc += p * p.ln();
                }
            }
        }
        e[c] = (scale * acc).clamp(0.0, 1.0);
    }
    Ok(e)
}

/// Divergence-normalized weights: d = 1 - e, w = d / sum(d).
pub fn weights(
    subsystem: Subsystem,
    indicator_ids: &[String],
    entropy: &[f64],
) -> Result<EntropyWeights> {
    let divergence: Vec<f64> = entropy.iter().map(|e| 1.0 - e).collect();
    let total: f64 = divergence.iter().sum();
    if total <= 0.0 {
        return Err(Error::AllColumnsUninformative);
    }
    let weight = divergence.iter().map(|d| d / total).collect();
    Ok(EntropyWeights {
        subsystem,
        indicator_ids: indicator_ids.to_vec(),
        entropy: entropy.to_vec(),
        divergence,
        weight,
    })
}

/// Weighted composite level per (year, region): sum_k w_k * z_k, in [0, 1].
pub fn composite_index(np: &NormalizedPanel, w: &EntropyWeights) -> Result<Array2<f64>> {
    let (v, m, k) = (np.year_count(), np.region_count(), np.indicator_count());
    if w.weight.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} indicators",
            w.weight.len(),
            k
        )));
    }
    let mut level = Array2::zeros((v, m));
    for t in 0..v {
        for r in 0..m {
            let mut acc = 0.0;
            for c in 0..k {
                acc += w.weight[c] * np.z[[t, r, c]];
            }
            level[[t, r]] = acc;
        }
    }
    Ok(level)
}

/// Run the full entropy-weight chain for both subsystems.
pub fn compute_index_series(ds: &PanelDataset) -> Result<IndexSeries> {
    let (v, m) = (ds.year_count(), ds.region_count());
    let mut per_subsystem = Vec::with_capacity(2);
    for subsystem in [Subsystem::X, Subsystem::Y] {
        let np = normalize(ds, subsystem)?;
        let s = proportions(&np)?;
        let e = entropy(&s, v, m)?;
        let w = weights(subsystem, &np.indicator_ids, &e)?;
        let level = composite_index(&np, &w)?;
        per_subsystem.push((level, w));
    }
    let (g, weights_y) = per_subsystem.pop().unwrap();
    let (f, weights_x) = per_subsystem.pop().unwrap();

    let yearly_mean = |level: &Array2<f64>| -> Vec<f64> {
        (0..v)
            .map(|t| (0..m).map(|r| level[[t, r]]).sum::<f64>() / m as f64)
            .collect()
    };
    let mean_f = yearly_mean(&f);
    let mean_g = yearly_mean(&g);

    Ok(IndexSeries {
        years: ds.years.clone(),
        region_ids: ds.region_ids(),
        f,
        g,
        mean_f,
        mean_g,
        weights_x,
        weights_y,
    })
}
