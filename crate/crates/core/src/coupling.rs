//! Coupling degree, comprehensive development index, coordination degree with
//! five-stage classification, and the yearly / macro-region summaries.

use std::fmt;

use serde::Serialize;

use crate::entropy::IndexSeries;
use crate::error::{Error, Result};
use crate::panel::{MacroRegion, RegionSpec};

/// How the coordination degree combines C and T.
///
/// `Literal` is D = C*T; `Sqrt` is the conventional D = sqrt(C*T). Both map
/// [0,1]^2 into [0,1]; Sqrt dominates Literal pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DVariant {
    Literal,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingConfig {
    pub alpha: f64,
    pub beta: f64,
    pub d_variant: DVariant,
}

impl CouplingConfig {
    pub fn new(alpha: f64, beta: f64, d_variant: DVariant) -> Result<Self> {
        if alpha < 0.0 || beta < 0.0 || (alpha + beta - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCouplingWeights { alpha, beta });
        }
        Ok(CouplingConfig {
            alpha,
            beta,
            d_variant,
        })
    }

    /// Equal subsystem weights and the literal D = C*T combination.
    pub fn default_equal() -> Self {
        CouplingConfig {
            alpha: 0.5,
            beta: 0.5,
            d_variant: DVariant::Literal,
        }
    }
}

/// Coordination stages in ascending order of D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Stage {
    SeriousMaladjustment,
    ModerateDisorder,
    BasicCoordination,
    ModerateCoordination,
    HighCoordination,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::SeriousMaladjustment => "serious_maladjustment",
            Stage::ModerateDisorder => "moderate_disorder",
            Stage::BasicCoordination => "basic_coordination",
            Stage::ModerateCoordination => "moderate_coordination",
            Stage::HighCoordination => "high_coordination",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One (year, region) row of the coordination table.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingRecord {
    pub year: i32,
    pub region: String,
    pub f: f64,
    pub g: f64,
    pub c: f64,
    pub t: f64,
    pub d: f64,
    pub stage: Stage,
}

/// Yearly distribution summary over regions.
#[derive(Debug, Clone, PartialEq)]
pub struct YearStats {
    pub year: i32,
    pub mean: f64,
    /// Population standard deviation (the regions are the full population).
    pub std: f64,
    /// std / mean; `None` when the mean is zero.
    pub cv: Option<f64>,
}

/// Mean D per macro region: one value per year plus the cross-year mean.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionAggregate {
    pub macro_region: MacroRegion,
    pub years: Vec<i32>,
    pub mean_d: Vec<f64>,
    pub cross_year_mean: f64,
}

/// Coupling degree C = 2*sqrt(f*g)/(f+g), in [0, 1].
///
/// C = 1 iff f = g > 0. The 0/0 case (both levels zero) is defined as 0:
/// a system with no development in either subsystem is reported as uncoupled.
pub fn coupling_degree(f: f64, g: f64) -> f64 {
    let total = f + g;
    if total == 0.0 {
        return 0.0;
    }
    (2.0 * (f * g).sqrt() / total).clamp(0.0, 1.0)
}

/// Comprehensive development index T = alpha*f + beta*g.
pub fn comprehensive_index(f: f64, g: f64, cfg: &CouplingConfig) -> f64 {
    cfg.alpha * f + cfg.beta * g
}

/// Coordination degree from C and T under the configured variant.
pub fn coordination_degree(c: f64, t: f64, cfg: &CouplingConfig) -> f64 {
    let product = c * t;
    match cfg.d_variant {
        DVariant::Literal => product,
        DVariant::Sqrt => product.sqrt(),
    }
}

/// Stage classification with right-closed boundaries:
/// [0, 0.2] / (0.2, 0.4] / (0.4, 0.5] / (0.5, 0.8] / (0.8, 1].
pub fn classify(d: f64) -> Result<Stage> {
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::OutOfRange(d));
    }
    Ok(if d <= 0.2 {
        Stage::SeriousMaladjustment
    } else if d <= 0.4 {
        Stage::ModerateDisorder
    } else if d <= 0.5 {
        Stage::BasicCoordination
    } else if d <= 0.8 {
        Stage::ModerateCoordination
    } else {
        Stage::HighCoordination
    })
}

/// Build the full record table from an index series, year-major then region,
/// both in panel order.
pub fn compute_records(series: &IndexSeries, cfg: &CouplingConfig) -> Result<Vec<CouplingRecord>> {
    let mut records = Vec::with_capacity(series.years.len() * series.region_ids.len());
    for (t, &year) in series.years.iter().enumerate() {
        for (r, region) in series.region_ids.iter().enumerate() {
            let f = series.f[[t, r]];
            let g = series.g[[t, r]];
            let c = coupling_degree(f, g);
            let t_index = comprehensive_index(f, g, cfg);
            let d = coordination_degree(c, t_index, cfg);
            records.push(CouplingRecord {
                year,
                region: region.clone(),
                f,
                g,
                c,
                t: t_index,
                d,
                stage: classify(d)?,
            });
        }
    }
    Ok(records)
}

/// Mean, population standard deviation, and coefficient of variation of one
/// year's D values.
pub fn descriptive_stats(year: i32, values: &[f64]) -> Result<YearStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput("descriptive_stats".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    let cv = if mean == 0.0 { None } else { Some(std / mean) };
    Ok(YearStats { year, mean, std, cv })
}

/// Unweighted mean D per macro region and year, plus each macro region's
/// cross-year mean. Macro regions without members are omitted.
pub fn region_aggregate(
    records: &[CouplingRecord],
    regions: &[RegionSpec],
) -> Result<Vec<RegionAggregate>> {
    if records.is_empty() {
        return Err(Error::EmptyInput("region_aggregate".into()));
    }
    let mut years: Vec<i32> = records.iter().map(|rec| rec.year).collect();
    years.sort_unstable();
    years.dedup();

    let macro_of = |region_id: &str| -> Result<MacroRegion> {
        regions
            .iter()
            .find(|r| r.id == region_id)
            .map(|r| r.macro_region)
            .ok_or_else(|| Error::EmptyRegion(format!("unknown region `{region_id}`")))
    };

    let mut out = Vec::new();
    for mr in MacroRegion::ALL {
        let mut mean_d = Vec::with_capacity(years.len());
        let mut member_seen = false;
        for &year in &years {
            let mut sum = 0.0;
            let mut count = 0usize;
            for rec in records.iter().filter(|rec| rec.year == year) {
                if macro_of(&rec.region)? == mr {
                    sum += rec.d;
                    count += 1;
                }
            }
            if count == 0 {
                continue;
            }
            member_seen = true;
            mean_d.push(sum / count as f64);
        }
        if !member_seen {
            continue;
        }
        if mean_d.len() != years.len() {
            return Err(Error::EmptyRegion(mr.as_str().into()));
        }
        let cross_year_mean = mean_d.iter().sum::<f64>() / mean_d.len() as f64;
        out.push(RegionAggregate {
            macro_region: mr,
            years: years.clone(),
            mean_d,
            cross_year_mean,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("region_aggregate: no macro regions".into()));
    }
    Ok(out)
}
