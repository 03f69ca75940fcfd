//! End-to-end orchestration: load and validate the panel, compute index
//! series and coupling records, run the yearly spatial statistics, fit the
//! scope ellipses and drift segments, and emit every report file plus a run
//! manifest.
//!
//! Determinism contract: identical inputs, config, and seed produce
//! byte-identical report files, independent of the rayon thread count.
//! Per-year permutation seeds derive from the base seed with splitmix64;
//! per-region LISA streams derive inside `lisa_classify`. The manifest
//! timestamp honors `SOURCE_DATE_EPOCH` for fully reproducible runs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, ScopeFilter};
use crate::coupling::{self, CouplingRecord, RegionAggregate, YearStats};
use crate::entropy;
use crate::error::{Error, Result};
use crate::geojson::{build_geojson, write_geojson, ScopeYearEllipse};
use crate::panel::{self, PanelDataset};
use crate::sde::{self, DriftSegment};
use crate::spatial::{self, LisaResult, MoranResult};

#[derive(Debug, Clone, Serialize)]
pub struct RngNote {
    pub algorithm: String,
    pub base_seed: u64,
    pub year_seed_derivation: String,
}

/// Everything needed to audit a run: config echo, input digests, version,
/// timestamp, and per-file row counts.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub config: RunConfig,
    pub input_digests: BTreeMap<String, String>,
    pub row_counts: BTreeMap<String, u64>,
    pub rng: RngNote,
    pub warnings: Vec<String>,
}

/// In-memory results of one pipeline run, before emission.
pub struct RunOutput {
    pub dataset: PanelDataset,
    pub series: entropy::IndexSeries,
    pub records: Vec<CouplingRecord>,
    pub year_stats: Vec<YearStats>,
    pub region_aggregates: Vec<RegionAggregate>,
    pub moran: Vec<(i32, MoranResult)>,
    pub lisa: Vec<(i32, LisaResult)>,
    pub ellipses: Vec<ScopeYearEllipse>,
    pub drift: Vec<(String, Vec<DriftSegment>)>,
    pub warnings: Vec<String>,
}

/// splitmix64 mix of the base seed and a salt; used to derive independent
/// per-year permutation seeds.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn timestamp_rfc3339() -> String {
    use chrono::{DateTime, Utc};
    if let Ok(epoch) = std::env::var("SOURCE_DATE_EPOCH") {
        if let Ok(secs) = epoch.parse::<i64>() {
            if let Some(dt) = DateTime::from_timestamp(secs, 0) {
                return dt.to_rfc3339();
            }
        }
    }
    Utc::now().to_rfc3339()
}

/// Compute every stage without touching the filesystem.
pub fn compute(cfg: &RunConfig) -> Result<RunOutput> {
    let coupling_cfg = cfg.coupling_config()?;
    let scheme = cfg.weight_scheme()?;
    let method = cfg.inference_method()?;
    let scopes = cfg.scope_filters()?;

    let dataset = panel::load_panel(&cfg.inputs.indicators, &cfg.inputs.regions, &cfg.inputs.values)?;
    let report = panel::validate(&dataset);
    if !report.is_accepted() {
        return Err(Error::ValidationFailed { report });
    }
    let mut warnings: Vec<String> = report
        .warnings
        .iter()
        .map(|f| format!("{:?} at {}: {}", f.code, f.location, f.message))
        .collect();

    let series = entropy::compute_index_series(&dataset)?;
    let records = coupling::compute_records(&series, &coupling_cfg)?;

    let year_stats = dataset
        .years
        .iter()
        .map(|&year| {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.year == year)
                .map(|r| r.d)
                .collect();
            coupling::descriptive_stats(year, &values)
        })
        .collect::<Result<Vec<_>>>()?;
    let region_aggregates = coupling::region_aggregate(&records, &dataset.regions)?;

    let weights = spatial::build_weights(&dataset.regions, scheme);
    for island in &weights.islands {
        warnings.push(format!("island region {island}: no neighbors, weight row left zero"));
    }

    // one D vector per year, in panel region order
    let d_by_year: Vec<(usize, i32, Vec<f64>)> = dataset
        .years
        .iter()
        .enumerate()
        .map(|(t, &year)| {
            let d: Vec<f64> = records
                .iter()
                .filter(|r| r.year == year)
                .map(|r| r.d)
                .collect();
            (t, year, d)
        })
        .collect();

    let spatial_results: Vec<(i32, MoranResult, LisaResult)> = d_by_year
        .par_iter()
        .map(|(t, year, d)| {
            let seed = derive_seed(cfg.spatial.seed, *t as u64);
            let moran = spatial::morans_inference(d, &weights, method, cfg.spatial.permutations, seed)?;
            let lisa = spatial::lisa_classify(
                d,
                &weights,
                cfg.spatial.permutations,
                seed,
                cfg.spatial.lisa_alpha,
            )?;
            Ok((*year, moran, lisa))
        })
        .collect::<Result<Vec<_>>>()?;
    let moran = spatial_results
        .iter()
        .map(|(y, m, _)| (*y, m.clone()))
        .collect();
    let lisa: Vec<(i32, LisaResult)> = spatial_results
        .into_iter()
        .map(|(y, _, l)| (y, l))
        .collect();

    let mut reporting_years: Vec<i32> = match &cfg.sde.years {
        Some(years) => {
            for y in years {
                if !dataset.years.contains(y) {
                    return Err(Error::Config(format!("sde year {y} is not a panel year")));
                }
            }
            years.clone()
        }
        None => dataset.years.clone(),
    };
    reporting_years.sort_unstable();
    reporting_years.dedup();

    let mut ellipses = Vec::new();
    let mut drift = Vec::new();
    for (label, filter) in &scopes {
        let members: Vec<usize> = dataset
            .regions
            .iter()
            .enumerate()
            .filter(|(_, r)| match filter {
                ScopeFilter::All => true,
                ScopeFilter::Macro(mr) => r.macro_region == *mr,
            })
            .map(|(i, _)| i)
            .collect();
        if members.is_empty() {
            return Err(Error::EmptyRegion(label.clone()));
        }
        let coords: Vec<(f64, f64)> = members
            .iter()
            .map(|&i| (dataset.regions[i].lon, dataset.regions[i].lat))
            .collect();
        let ids: Vec<String> = members
            .iter()
            .map(|&i| dataset.regions[i].id.clone())
            .collect();

        let mut centers = Vec::new();
        for &year in &reporting_years {
            let t = dataset.years.iter().position(|&y| y == year).expect("checked");
            let d_values: Vec<f64> = members
                .iter()
                .map(|&i| d_by_year[t].2[i])
                .collect();
            let params = sde::fit_geo_ellipse(&coords, &d_values, &ids)?;
            centers.push((year, params.center_lon, params.center_lat));
            ellipses.push(ScopeYearEllipse {
                scope: label.clone(),
                year,
                params,
            });
        }
        if centers.len() >= 2 {
            drift.push((label.clone(), sde::centroid_drift(&centers)?));
        } else {
            drift.push((label.clone(), Vec::new()));
        }
    }

    Ok(RunOutput {
        dataset,
        series,
        records,
        year_stats,
        region_aggregates,
        moran,
        lisa,
        ellipses,
        drift,
        warnings,
    })
}

struct CsvFile {
    writer: csv::Writer<File>,
    rows: u64,
}

impl CsvFile {
    fn create(path: &Path, header: &[&str]) -> Result<CsvFile> {
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(file);
        writer.write_record(header).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        Ok(CsvFile { writer, rows: 0 })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|e| Error::Config(format!("csv write: {e}")))?;
        self.rows += 1;
        Ok(())
    }

    fn finish(mut self) -> Result<u64> {
        self.writer
            .flush()
            .map_err(|e| Error::Config(format!("csv flush: {e}")))?;
        Ok(self.rows)
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Run the pipeline and write all report files into the configured output
/// directory. Returns the manifest that was also written there.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunManifest> {
    let out = compute(cfg)?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.clone(),
        source,
    })?;

    let mut row_counts = BTreeMap::new();

    let mut index_series = CsvFile::create(&dir.join("index_series.csv"), &["year", "region", "f", "g"])?;
    for (t, &year) in out.series.years.iter().enumerate() {
        for (r, region) in out.series.region_ids.iter().enumerate() {
            index_series.row([
                year.to_string(),
                region.clone(),
                fmt(out.series.f[[t, r]]),
                fmt(out.series.g[[t, r]]),
            ])?;
        }
    }
    row_counts.insert("index_series.csv".into(), index_series.finish()?);

    let mut weights_csv = CsvFile::create(
        &dir.join("weights.csv"),
        &["subsystem", "indicator", "entropy", "divergence", "weight"],
    )?;
    for w in [&out.series.weights_x, &out.series.weights_y] {
        for (k, id) in w.indicator_ids.iter().enumerate() {
            weights_csv.row([
                w.subsystem.to_string(),
                id.clone(),
                fmt(w.entropy[k]),
                fmt(w.divergence[k]),
                fmt(w.weight[k]),
            ])?;
        }
    }
    row_counts.insert("weights.csv".into(), weights_csv.finish()?);

    let mut coupling_csv = CsvFile::create(
        &dir.join("coupling.csv"),
        &["year", "region", "f", "g", "C", "T", "D", "stage"],
    )?;
    for rec in &out.records {
        coupling_csv.row([
            rec.year.to_string(),
            rec.region.clone(),
            fmt(rec.f),
            fmt(rec.g),
            fmt(rec.c),
            fmt(rec.t),
            fmt(rec.d),
            rec.stage.to_string(),
        ])?;
    }
    row_counts.insert("coupling.csv".into(), coupling_csv.finish()?);

    let mut year_stats_csv =
        CsvFile::create(&dir.join("year_stats.csv"), &["year", "mean", "std", "cv"])?;
    for stats in &out.year_stats {
        year_stats_csv.row([
            stats.year.to_string(),
            fmt(stats.mean),
            fmt(stats.std),
            stats.cv.map(fmt).unwrap_or_default(),
        ])?;
    }
    row_counts.insert("year_stats.csv".into(), year_stats_csv.finish()?);

    let mut region_means_csv = CsvFile::create(
        &dir.join("region_means.csv"),
        &["macro_region", "year", "mean_D"],
    )?;
    for agg in &out.region_aggregates {
        for (t, &year) in agg.years.iter().enumerate() {
            region_means_csv.row([
                agg.macro_region.to_string(),
                year.to_string(),
                fmt(agg.mean_d[t]),
            ])?;
        }
        region_means_csv.row([
            agg.macro_region.to_string(),
            "all".to_string(),
            fmt(agg.cross_year_mean),
        ])?;
    }
    row_counts.insert("region_means.csv".into(), region_means_csv.finish()?);

    let mut moran_csv = CsvFile::create(
        &dir.join("moran.csv"),
        &["year", "I", "expected", "z", "p", "method", "permutations", "seed"],
    )?;
    for (year, result) in &out.moran {
        moran_csv.row([
            year.to_string(),
            fmt(result.i_value),
            fmt(result.expected),
            fmt(result.z),
            fmt(result.p),
            result.method.to_string(),
            result.permutations.to_string(),
            result.seed.to_string(),
        ])?;
    }
    row_counts.insert("moran.csv".into(), moran_csv.finish()?);

    let mut lisa_csv = CsvFile::create(
        &dir.join("lisa.csv"),
        &["year", "region", "local_i", "p", "cluster"],
    )?;
    for (year, lisa) in &out.lisa {
        for (idx, region) in lisa.region_ids.iter().enumerate() {
            lisa_csv.row([
                year.to_string(),
                region.clone(),
                fmt(lisa.local_i[idx]),
                fmt(lisa.p[idx]),
                lisa.cluster[idx].to_string(),
            ])?;
        }
    }
    row_counts.insert("lisa.csv".into(), lisa_csv.finish()?);

    let mut sde_csv = CsvFile::create(
        &dir.join("sde.csv"),
        &[
            "scope",
            "year",
            "center_lon",
            "center_lat",
            "sigma_x_km",
            "sigma_y_km",
            "azimuth_deg",
            "area_1e4_km2",
        ],
    )?;
    for e in &out.ellipses {
        sde_csv.row([
            e.scope.clone(),
            e.year.to_string(),
            fmt(e.params.center_lon),
            fmt(e.params.center_lat),
            fmt(e.params.sigma_x_km),
            fmt(e.params.sigma_y_km),
            fmt(e.params.azimuth_deg),
            fmt(e.params.area_1e4_km2),
        ])?;
    }
    row_counts.insert("sde.csv".into(), sde_csv.finish()?);

    let mut drift_csv = CsvFile::create(
        &dir.join("drift.csv"),
        &[
            "scope",
            "from_year",
            "to_year",
            "distance_km",
            "bearing_deg",
            "speed_km_per_year",
            "octant",
        ],
    )?;
    for (scope, segments) in &out.drift {
        for seg in segments {
            drift_csv.row([
                scope.clone(),
                seg.from_year.to_string(),
                seg.to_year.to_string(),
                fmt(seg.distance_km),
                fmt(seg.bearing_deg),
                fmt(seg.speed_km_per_year),
                seg.octant.to_string(),
            ])?;
        }
    }
    row_counts.insert("drift.csv".into(), drift_csv.finish()?);

    if cfg.output.geojson {
        let gj = build_geojson(&out.ellipses, &out.lisa, &out.dataset.regions)?;
        write_geojson(&dir.join("report.geojson"), &gj)?;
        let features = gj["features"].as_array().map(|a| a.len()).unwrap_or(0) as u64;
        row_counts.insert("report.geojson".into(), features);
    }

    let mut input_digests = BTreeMap::new();
    input_digests.insert("indicators".into(), sha256_hex(&cfg.inputs.indicators)?);
    input_digests.insert("regions".into(), sha256_hex(&cfg.inputs.regions)?);
    input_digests.insert("values".into(), sha256_hex(&cfg.inputs.values)?);

    let manifest = RunManifest {
        tool: "coordstat".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp: timestamp_rfc3339(),
        config: cfg.clone(),
        input_digests,
        row_counts,
        rng: RngNote {
            algorithm: "chacha8".into(),
            base_seed: cfg.spatial.seed,
            year_seed_derivation: "splitmix64(base_seed xor year_index * 0x9E3779B97F4A7C15)"
                .into(),
        },
        warnings: out.warnings.clone(),
    };
    let manifest_path = dir.join("manifest.json");
    let mut file = File::create(&manifest_path).map_err(|source| Error::Io {
        path: manifest_path.clone(),
        source,
    })?;
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    file.write_all(text.as_bytes()).and_then(|_| file.write_all(b"\n")).map_err(|source| {
        Error::Io {
            path: manifest_path,
            source,
        }
    })?;

    Ok(manifest)
}
