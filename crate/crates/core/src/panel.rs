//! Panel data model: indicator and region catalogs plus a dense
//! (year, region, indicator) value cube, loaded from three CSV files.
//!
//! File contracts:
//! * `indicators.csv` — `id,name,subsystem,direction,unit`, subsystem `X`|`Y`,
//!   direction `+`|`-`
//! * `regions.csv` — `id,name,macro_region,lon,lat,neighbors`, macro_region
//!   `east`|`central`|`west`|`northeast`, neighbors `;`-separated region ids
//! * `values.csv` — `year,region,indicator,value`, one row per cell (long form)
//!
//! Region and indicator order is file order; years are sorted ascending.
//! Missing cells, duplicate rows, and non-finite values are hard errors.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the two indicator subsystems an indicator belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    X,
    Y,
}

impl Subsystem {
    pub fn as_str(self) -> &'static str {
        match self {
            Subsystem::X => "X",
            Subsystem::Y => "Y",
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Indicator orientation: whether larger raw values are better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Positive,
    Negative,
}

/// The four macro regions used for sub-national aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MacroRegion {
    East,
    Central,
    West,
    Northeast,
}

impl MacroRegion {
    pub const ALL: [MacroRegion; 4] = [
        MacroRegion::East,
        MacroRegion::Central,
        MacroRegion::West,
        MacroRegion::Northeast,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MacroRegion::East => "east",
            MacroRegion::Central => "central",
            MacroRegion::West => "west",
            MacroRegion::Northeast => "northeast",
        }
    }

    pub fn parse(s: &str) -> Option<MacroRegion> {
        match s {
            "east" => Some(MacroRegion::East),
            "central" => Some(MacroRegion::Central),
            "west" => Some(MacroRegion::West),
            "northeast" => Some(MacroRegion::Northeast),
            _ => None,
        }
    }
}

impl fmt::Display for MacroRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSpec {
    pub id: String,
    pub name: String,
    pub subsystem: Subsystem,
    pub direction: Direction,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub id: String,
    pub name: String,
    pub macro_region: MacroRegion,
    /// Centroid longitude, degrees east.
    pub lon: f64,
    /// Centroid latitude, degrees north.
    pub lat: f64,
    /// Ids of adjacent regions. Stored sorted for stable emission.
    pub neighbors: BTreeSet<String>,
}

/// Dense panel: `values[[year, region, indicator]]`, no missing cells.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    pub years: Vec<i32>,
    pub regions: Vec<RegionSpec>,
    pub indicators: Vec<IndicatorSpec>,
    pub values: Array3<f64>,
}

impl PanelDataset {
    pub fn year_count(&self) -> usize {
        self.years.len()
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn indicator_count(&self) -> usize {
        self.indicators.len()
    }

    /// Positions (into `indicators`) of the indicators of one subsystem,
    /// in file order.
    pub fn subsystem_indicators(&self, subsystem: Subsystem) -> Vec<usize> {
        self.indicators
            .iter()
            .enumerate()
            .filter(|(_, ind)| ind.subsystem == subsystem)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn region_ids(&self) -> Vec<String> {
        self.regions.iter().map(|r| r.id.clone()).collect()
    }
}

/// A single validation finding, ordered as discovered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub code: FindingCode,
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FindingCode {
    AsymmetricAdjacency,
    SelfNeighbor,
    UnknownNeighborId,
    CoordinateOutOfRange,
    EmptySubsystem,
    ConstantColumn,
}

/// Outcome of [`validate`]: the dataset is accepted iff `errors` is empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.errors.is_empty()
    }
}

#[derive(Debug, Deserialize)]
struct IndicatorRow {
    id: String,
    name: String,
    subsystem: String,
    direction: String,
    unit: String,
}

#[derive(Debug, Deserialize)]
struct RegionRow {
    id: String,
    name: String,
    macro_region: String,
    lon: f64,
    lat: f64,
    neighbors: String,
}

#[derive(Debug, Deserialize)]
struct ValueRow {
    year: i32,
    region: String,
    indicator: String,
    value: f64,
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn parse_error(path: &Path, err: &csv::Error) -> Error {
    let line = match err.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: err.to_string(),
    }
}

pub(crate) fn parse_indicators_reader<R: std::io::Read>(
    mut reader: csv::Reader<R>,
    path: &Path,
) -> Result<Vec<IndicatorSpec>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for row in reader.deserialize::<IndicatorRow>() {
        let row = row.map_err(|e| parse_error(path, &e))?;
        if !seen.insert(row.id.clone()) {
            return Err(Error::DuplicateIndicatorId {
                id: row.id,
                path: path.to_path_buf(),
            });
        }
        let subsystem = match row.subsystem.as_str() {
            "X" => Subsystem::X,
            "Y" => Subsystem::Y,
            other => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: format!("indicator `{}`: unknown subsystem `{other}` (expected X or Y)", row.id),
                })
            }
        };
        let direction = match row.direction.as_str() {
            "+" => Direction::Positive,
            "-" => Direction::Negative,
            other => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: format!("indicator `{}`: unknown direction `{other}` (expected + or -)", row.id),
                })
            }
        };
        out.push(IndicatorSpec {
            id: row.id,
            name: row.name,
            subsystem,
            direction,
            unit: row.unit,
        });
    }
    Ok(out)
}

pub(crate) fn parse_regions_reader<R: std::io::Read>(
    mut reader: csv::Reader<R>,
    path: &Path,
) -> Result<Vec<RegionSpec>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for row in reader.deserialize::<RegionRow>() {
        let row = row.map_err(|e| parse_error(path, &e))?;
        if !seen.insert(row.id.clone()) {
            return Err(Error::DuplicateRegionId {
                id: row.id,
                path: path.to_path_buf(),
            });
        }
        let macro_region = MacroRegion::parse(&row.macro_region).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!(
                "region `{}`: unknown macro_region `{}` (expected east/central/west/northeast)",
                row.id, row.macro_region
            ),
        })?;
        let neighbors = row
            .neighbors
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect();
        out.push(RegionSpec {
            id: row.id,
            name: row.name,
            macro_region,
            lon: row.lon,
            lat: row.lat,
            neighbors,
        });
    }
    Ok(out)
}

/// Load and assemble a dense panel from the three input files.
///
/// Region and indicator order follow file order; years are collected from the
/// values file and sorted ascending. Every (year, region, indicator) cell must
/// be present exactly once.
pub fn load_panel(
    indicators_path: &Path,
    regions_path: &Path,
    values_path: &Path,
) -> Result<PanelDataset> {
    let indicators = parse_indicators_reader(open_csv(indicators_path)?, indicators_path)?;
    let regions = parse_regions_reader(open_csv(regions_path)?, regions_path)?;

    let region_index: HashMap<&str, usize> = regions
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.as_str(), i))
        .collect();
    let indicator_index: HashMap<&str, usize> = indicators
        .iter()
        .enumerate()
        .map(|(j, ind)| (ind.id.as_str(), j))
        .collect();

    let mut reader = open_csv(values_path)?;
    let headers = reader
        .headers()
        .map_err(|e| parse_error(values_path, &e))?
        .clone();
    let mut raw = Vec::new();
    let mut years = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_error(values_path, &e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row: ValueRow = record
            .deserialize(Some(&headers))
            .map_err(|e| parse_error(values_path, &e))?;
        let r = *region_index
            .get(row.region.as_str())
            .ok_or_else(|| Error::UnknownRegionId {
                id: row.region.clone(),
                line,
            })?;
        let j = *indicator_index
            .get(row.indicator.as_str())
            .ok_or_else(|| Error::UnknownIndicatorId {
                id: row.indicator.clone(),
                line,
            })?;
        if !row.value.is_finite() {
            return Err(Error::NonFiniteValue {
                year: row.year,
                region: row.region,
                indicator: row.indicator,
            });
        }
        years.insert(row.year);
        raw.push((row.year, r, j, row.value));
    }

    let years: Vec<i32> = years.into_iter().collect();
    let year_index: HashMap<i32, usize> = years.iter().enumerate().map(|(t, &y)| (y, t)).collect();
    let (v, m, n) = (years.len(), regions.len(), indicators.len());

    let mut values = Array3::from_elem((v, m, n), f64::NAN);
    let mut filled = vec![false; v * m * n];
    for (year, r, j, value) in raw {
        let t = year_index[&year];
        let flat = (t * m + r) * n + j;
        if filled[flat] {
            return Err(Error::DuplicateRow {
                year,
                region: regions[r].id.clone(),
                indicator: indicators[j].id.clone(),
            });
        }
        filled[flat] = true;
        values[[t, r, j]] = value;
    }
    for t in 0..v {
        for r in 0..m {
            for j in 0..n {
                if !filled[(t * m + r) * n + j] {
                    return Err(Error::MissingCell {
                        year: years[t],
                        region: regions[r].id.clone(),
                        indicator: indicators[j].id.clone(),
                    });
                }
            }
        }
    }

    Ok(PanelDataset {
        years,
        regions,
        indicators,
        values,
    })
}

/// Check structural soundness of a loaded panel.
///
/// Errors: asymmetric or self-referential adjacency, unknown neighbor ids,
/// out-of-range coordinates, empty subsystems. Warnings: indicator columns
/// constant across every (year, region) cell.
pub fn validate(ds: &PanelDataset) -> ValidationReport {
    let mut report = ValidationReport::default();
    let ids: HashSet<&str> = ds.regions.iter().map(|r| r.id.as_str()).collect();
    let by_id: HashMap<&str, &RegionSpec> = ds.regions.iter().map(|r| (r.id.as_str(), r)).collect();

    for region in &ds.regions {
        if !(-90.0..=90.0).contains(&region.lat) || !(-180.0..=180.0).contains(&region.lon) {
            report.errors.push(Finding {
                code: FindingCode::CoordinateOutOfRange,
                location: format!("region {}", region.id),
                message: format!("centroid ({}, {}) outside valid lon/lat ranges", region.lon, region.lat),
            });
        }
        for nb in &region.neighbors {
            if nb == &region.id {
                report.errors.push(Finding {
                    code: FindingCode::SelfNeighbor,
                    location: format!("region {}", region.id),
                    message: "region lists itself as a neighbor".into(),
                });
                continue;
            }
            if !ids.contains(nb.as_str()) {
                report.errors.push(Finding {
                    code: FindingCode::UnknownNeighborId,
                    location: format!("region {}", region.id),
                    message: format!("neighbor `{nb}` is not a region id"),
                });
                continue;
            }
            if !by_id[nb.as_str()].neighbors.contains(&region.id) {
                report.errors.push(Finding {
                    code: FindingCode::AsymmetricAdjacency,
                    location: format!("region {}", region.id),
                    message: format!("{} lists {nb} as a neighbor but not vice versa", region.id),
                });
            }
        }
    }

    for subsystem in [Subsystem::X, Subsystem::Y] {
        if ds.subsystem_indicators(subsystem).is_empty() {
            report.errors.push(Finding {
                code: FindingCode::EmptySubsystem,
                location: format!("subsystem {subsystem}"),
                message: "subsystem has no indicators".into(),
            });
        }
    }

    for (j, indicator) in ds.indicators.iter().enumerate() {
        let column = ds.values.slice(ndarray::s![.., .., j]);
        let first = column[[0, 0]];
        if column.iter().all(|&x| x == first) {
            report.warnings.push(Finding {
                code: FindingCode::ConstantColumn,
                location: format!("indicator {}", indicator.id),
                message: format!("constant value {first} across all years and regions"),
            });
        }
    }

    report
}

fn create_file(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write a panel back to the three-file CSV layout. Reloading the emitted
/// files reproduces the dataset exactly.
pub fn write_csv_files(ds: &PanelDataset, dir: &Path) -> Result<(PathBuf, PathBuf, PathBuf)> {
    let indicators_path = dir.join("indicators.csv");
    let regions_path = dir.join("regions.csv");
    let values_path = dir.join("values.csv");

    let mut f = create_file(&indicators_path)?;
    let io_err = |source, path: &Path| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    writeln!(f, "id,name,subsystem,direction,unit").map_err(|e| io_err(e, &indicators_path))?;
    for ind in &ds.indicators {
        let dir_token = match ind.direction {
            Direction::Positive => "+",
            Direction::Negative => "-",
        };
        writeln!(
            f,
            "{},{},{},{},{}",
            ind.id, ind.name, ind.subsystem, dir_token, ind.unit
        )
        .map_err(|e| io_err(e, &indicators_path))?;
    }

    let mut f = create_file(&regions_path)?;
    writeln!(f, "id,name,macro_region,lon,lat,neighbors").map_err(|e| io_err(e, &regions_path))?;
    for region in &ds.regions {
        let neighbors: Vec<&str> = region.neighbors.iter().map(String::as_str).collect();
        writeln!(
            f,
            "{},{},{},{},{},{}",
            region.id,
            region.name,
            region.macro_region,
            region.lon,
            region.lat,
            neighbors.join(";")
        )
        .map_err(|e| io_err(e, &regions_path))?;
    }

    let mut f = create_file(&values_path)?;
    writeln!(f, "year,region,indicator,value").map_err(|e| io_err(e, &values_path))?;
    for (t, &year) in ds.years.iter().enumerate() {
        for (r, region) in ds.regions.iter().enumerate() {
            for (j, ind) in ds.indicators.iter().enumerate() {
                writeln!(f, "{},{},{},{}", year, region.id, ind.id, ds.values[[t, r, j]])
                    .map_err(|e| io_err(e, &values_path))?;
            }
        }
    }

    Ok((indicators_path, regions_path, values_path))
}
