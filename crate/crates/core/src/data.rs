//! Bundled region catalog: the 31 Chinese provincial-level units with
//! approximate centroids and first-order (queen) land-border contiguity.
//!
//! Hainan has no land border and is kept as an island (empty neighbor set);
//! spatial weight construction reports it and leaves its row zero.

use std::path::Path;

use crate::panel::{parse_regions_reader, RegionSpec};

const CN_PROVINCES_CSV: &str = include_str!("../data/cn_provinces.csv");

/// The bundled 31-province catalog, in conventional administrative order.
pub fn china_provinces() -> Vec<RegionSpec> {
    let reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(CN_PROVINCES_CSV.as_bytes());
    parse_regions_reader(reader, Path::new("builtin:cn_provinces.csv"))
        .expect("bundled province catalog must parse")
}

/// Raw CSV text of the bundled catalog, in the `regions.csv` file format.
pub fn china_provinces_csv() -> &'static str {
    CN_PROVINCES_CSV
}
