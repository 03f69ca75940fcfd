//! GeoJSON emission: ellipse outlines as 64-segment polygons, scope-year
//! center points, and LISA cluster labels at region centroids.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::panel::RegionSpec;
use crate::sde::{inverse_project, EllipseParams};
use crate::spatial::LisaResult;

/// One fitted ellipse tagged with its scope label and reporting year.
#[derive(Debug, Clone, PartialEq)]
pub struct ScopeYearEllipse {
    pub scope: String,
    pub year: i32,
    pub params: EllipseParams,
}

const SEGMENTS: usize = 64;

fn ellipse_ring(params: &EllipseParams) -> Vec<[f64; 2]> {
    let azimuth = params.azimuth_deg.to_radians();
    // unit vectors of the major and minor axes in (east, north) km
    let major = (azimuth.sin(), azimuth.cos());
    let minor = (azimuth.cos(), -azimuth.sin());

    let vertex = |k: usize| -> [f64; 2] {
        let t = 2.0 * std::f64::consts::PI * (k % SEGMENTS) as f64 / SEGMENTS as f64;
        let a = params.sigma_x_km * t.cos();
        let b = params.sigma_y_km * t.sin();
        let x = a * major.0 + b * minor.0;
        let y = a * major.1 + b * minor.1;
        let (lon, lat) = inverse_project(x, y, params.center_lon, params.center_lat);
        [lon, lat]
    };
    // k % SEGMENTS makes the closing vertex bit-identical to the first
    (0..=SEGMENTS).map(vertex).collect()
}

/// Assemble the feature collection. Requires at least one ellipse or one
/// LISA classification.
pub fn build_geojson(
    ellipses: &[ScopeYearEllipse],
    lisa_by_year: &[(i32, LisaResult)],
    regions: &[RegionSpec],
) -> Result<Value> {
    if ellipses.is_empty() && lisa_by_year.is_empty() {
        return Err(Error::EmptyInput("no ellipses or classifications to emit".into()));
    }

    let mut features = Vec::new();
    for e in ellipses {
        let ring: Vec<Value> = ellipse_ring(&e.params)
            .into_iter()
            .map(|pt| json!([pt[0], pt[1]]))
            .collect();
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "Polygon", "coordinates": [ring] },
            "properties": {
                "kind": "ellipse",
                "scope": e.scope,
                "year": e.year,
                "sigma_x_km": e.params.sigma_x_km,
                "sigma_y_km": e.params.sigma_y_km,
                "azimuth_deg": e.params.azimuth_deg,
                "area_1e4_km2": e.params.area_1e4_km2,
            },
        }));
        features.push(json!({
            "type": "Feature",
            "geometry": {
                "type": "Point",
                "coordinates": [e.params.center_lon, e.params.center_lat],
            },
            "properties": { "kind": "center", "scope": e.scope, "year": e.year },
        }));
    }

    for (year, lisa) in lisa_by_year {
        for (idx, region_id) in lisa.region_ids.iter().enumerate() {
            let region = regions
                .iter()
                .find(|r| &r.id == region_id)
                .ok_or_else(|| Error::DimensionMismatch(format!("region `{region_id}` missing")))?;
            features.push(json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [region.lon, region.lat] },
                "properties": {
                    "kind": "lisa",
                    "year": year,
                    "region": region_id,
                    "cluster": lisa.cluster[idx].as_str(),
                    "local_i": lisa.local_i[idx],
                    "p": lisa.p[idx],
                },
            }));
        }
    }

    Ok(json!({ "type": "FeatureCollection", "features": features }))
}

pub fn write_geojson(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("geojson serializes");
    std::fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
