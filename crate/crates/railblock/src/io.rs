//! Instance, solution and path catalog files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use railblock_core::instance::{AccumulationOverride, Demand, Instance, InstanceError, Link, Params, Yard, YardId};
use railblock_core::pathgen::PathCatalog;
use railblock_core::solution::{CostBreakdown, ProvidedBlock, ShipmentPath, ShipmentSequence, TbspSolution};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}:{column}: {message}", path.display())]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}: line {line}: {message}", path.display())]
    Csv { path: PathBuf, line: u64, message: String },
    #[error("{}: {source}", path.display())]
    Invalid {
        path: PathBuf,
        #[source]
        source: InstanceError,
    },
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn json_err(path: &Path, e: serde_json::Error) -> IoError {
    IoError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YardRecord {
    pub id: YardId,
    pub t: f64,
    pub g: f64,
    pub h: u32,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRecord {
    pub i: YardId,
    pub j: YardId,
    pub l: f64,
    pub f: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandRecord {
    pub o: YardId,
    pub d: YardId,
    pub n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideRecord {
    pub p: YardId,
    pub q: YardId,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsRecord {
    pub m: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub c_default: f64,
    #[serde(default)]
    pub c_overrides: Vec<OverrideRecord>,
}

/// Instance file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub yards: Vec<YardRecord>,
    pub links: Vec<LinkRecord>,
    #[serde(default)]
    pub demands: Vec<DemandRecord>,
    pub params: ParamsRecord,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        let p = inst.params();
        InstanceFile {
            yards: inst
                .yards()
                .iter()
                .map(|y| YardRecord {
                    id: y.id,
                    t: y.reclass_delay,
                    g: y.class_capacity,
                    h: y.sort_tracks,
                    beta: y.capacity_ratio,
                })
                .collect(),
            links: inst
                .links()
                .iter()
                .map(|l| LinkRecord {
                    i: l.tail,
                    j: l.head,
                    l: l.length,
                    f: l.capacity,
                    alpha: l.remaining_rate,
                })
                .collect(),
            demands: inst
                .demands()
                .iter()
                .map(|d| DemandRecord {
                    o: d.origin,
                    d: d.destination,
                    n: d.cars,
                })
                .collect(),
            params: ParamsRecord {
                m: p.train_size,
                gamma: p.track_capacity,
                epsilon: p.detour_ratio,
                lambda: p.km_factor,
                c_default: p.accumulation_default,
                c_overrides: p
                    .accumulation_overrides
                    .iter()
                    .map(|o| OverrideRecord {
                        p: o.from,
                        q: o.to,
                        c: o.hours,
                    })
                    .collect(),
            },
        }
    }

    pub fn into_instance(self) -> Result<Instance, InstanceError> {
        let yards = self
            .yards
            .into_iter()
            .map(|y| Yard {
                id: y.id,
                reclass_delay: y.t,
                class_capacity: y.g,
                sort_tracks: y.h,
                capacity_ratio: y.beta,
            })
            .collect();
        let links = self
            .links
            .into_iter()
            .map(|l| Link {
                tail: l.i,
                head: l.j,
                length: l.l,
                capacity: l.f,
                remaining_rate: l.alpha,
            })
            .collect();
        let demands = self
            .demands
            .into_iter()
            .map(|d| Demand {
                origin: d.o,
                destination: d.d,
                cars: d.n,
            })
            .collect();
        let p = self.params;
        let params = Params {
            train_size: p.m,
            track_capacity: p.gamma,
            detour_ratio: p.epsilon,
            km_factor: p.lambda,
            accumulation_default: p.c_default,
            accumulation_overrides: p
                .c_overrides
                .into_iter()
                .map(|o| AccumulationOverride {
                    from: o.p,
                    to: o.q,
                    hours: o.c,
                })
                .collect(),
        };
        Instance::new(yards, links, demands, params)
    }
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serializes")
}

/// Parses an instance document; `origin` names it in errors.
pub fn parse_instance_json(text: &str, origin: &Path) -> Result<Instance, IoError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| json_err(origin, e))?;
    file.into_instance().map_err(|source| IoError::Invalid {
        path: origin.to_path_buf(),
        source,
    })
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    reader.deserialize().map(|r| r.map_err(|e| csv_err(path, e))).collect()
}

fn csv_err(path: &Path, e: csv::Error) -> IoError {
    IoError::Csv {
        path: path.to_path_buf(),
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

#[derive(Debug, Deserialize)]
struct ParamsRow {
    m: f64,
    gamma: f64,
    epsilon: f64,
    lambda: f64,
    c_default: f64,
}

/// Reads `yards.csv`, `links.csv` and `demands.csv` from `dir`. Scalar
/// parameters come from `params.csv` when present, otherwise from
/// `params.json`; accumulation overrides from an optional
/// `c_overrides.csv`.
pub fn load_instance_csv(dir: &Path) -> Result<Instance, IoError> {
    let yards = read_csv::<YardRecord>(&dir.join("yards.csv"))?;
    let links = read_csv::<LinkRecord>(&dir.join("links.csv"))?;
    let demands = read_csv::<DemandRecord>(&dir.join("demands.csv"))?;
    let params_csv = dir.join("params.csv");
    let mut params = if params_csv.exists() {
        let rows = read_csv::<ParamsRow>(&params_csv)?;
        let Some(r) = rows.into_iter().next() else {
            return Err(IoError::Csv {
                path: params_csv,
                line: 2,
                message: "no parameter row".into(),
            });
        };
        ParamsRecord {
            m: r.m,
            gamma: r.gamma,
            epsilon: r.epsilon,
            lambda: r.lambda,
            c_default: r.c_default,
            c_overrides: Vec::new(),
        }
    } else {
        let path = dir.join("params.json");
        serde_json::from_str(&read(&path)?).map_err(|e| json_err(&path, e))?
    };
    let overrides = dir.join("c_overrides.csv");
    if overrides.exists() {
        params.c_overrides = read_csv::<OverrideRecord>(&overrides)?;
    }
    let file = InstanceFile {
        yards,
        links,
        demands,
        params,
    };
    file.into_instance().map_err(|source| IoError::Invalid {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes the CSV form of `inst` into `dir`.
pub fn save_instance_csv(inst: &Instance, dir: &Path) -> Result<(), IoError> {
    let file = InstanceFile::from_instance(inst);
    fs::create_dir_all(dir).map_err(|source| IoError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    fn put<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), IoError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if rows.is_empty() {
            w.write_record(header).map_err(|e| csv_err(path, e))?;
        }
        for r in rows {
            w.serialize(r).map_err(|e| csv_err(path, e))?;
        }
        let bytes = w.into_inner().expect("in-memory writer");
        write(path, &String::from_utf8(bytes).expect("utf-8 csv"))
    }
    put(&dir.join("yards.csv"), &file.yards, &["id", "t", "g", "h", "beta"])?;
    put(&dir.join("links.csv"), &file.links, &["i", "j", "l", "f", "alpha"])?;
    put(&dir.join("demands.csv"), &file.demands, &["o", "d", "n"])?;
    let p = &file.params;
    write(
        &dir.join("params.csv"),
        &format!(
            "m,gamma,epsilon,lambda,c_default\n{},{},{},{},{}\n",
            p.m, p.gamma, p.epsilon, p.lambda, p.c_default
        ),
    )?;
    if !p.c_overrides.is_empty() {
        put(&dir.join("c_overrides.csv"), &p.c_overrides, &["p", "q", "c"])?;
    }
    Ok(())
}

/// Loads a JSON instance file, or the CSV form when `path` is a directory.
pub fn load_instance(path: &Path) -> Result<Instance, IoError> {
    if path.is_dir() {
        load_instance_csv(path)
    } else {
        parse_instance_json(&read(path)?, path)
    }
}

/// Writes JSON, or the CSV form when `path` is an existing directory.
pub fn save_instance(inst: &Instance, path: &Path) -> Result<(), IoError> {
    if path.is_dir() {
        save_instance_csv(inst, path)
    } else {
        write(path, &instance_to_json(inst))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub o: YardId,
    pub d: YardId,
    pub nodes: Vec<YardId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub p: YardId,
    pub q: YardId,
    pub route: Vec<YardId>,
    pub z: f64,
    pub w: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub o: YardId,
    pub d: YardId,
    pub blocks: Vec<(YardId, YardId)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostsRecord {
    pub car_km: f64,
    pub accumulation: f64,
    pub reclassification: f64,
    pub total: f64,
}

/// Solution file layout. `time` is the solve time in seconds, written by
/// `solve` so that reports can compare run times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub paths: Vec<PathRecord>,
    pub blocks: Vec<BlockRecord>,
    pub sequences: Vec<SequenceRecord>,
    pub costs: CostsRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
}

impl SolutionFile {
    pub fn new(sol: &TbspSolution, time: Option<f64>) -> Self {
        SolutionFile {
            paths: sol
                .paths
                .iter()
                .map(|p| PathRecord {
                    o: p.o,
                    d: p.d,
                    nodes: p.nodes.clone(),
                })
                .collect(),
            blocks: sol
                .blocks
                .iter()
                .map(|b| BlockRecord {
                    p: b.p,
                    q: b.q,
                    route: b.route.clone(),
                    z: b.z,
                    w: b.w,
                })
                .collect(),
            sequences: sol
                .sequences
                .iter()
                .map(|s| SequenceRecord {
                    o: s.o,
                    d: s.d,
                    blocks: s.blocks.clone(),
                })
                .collect(),
            costs: CostsRecord {
                car_km: sol.costs.car_km,
                accumulation: sol.costs.accumulation,
                reclassification: sol.costs.reclassification,
                total: sol.costs.total,
            },
            time,
        }
    }

    pub fn to_solution(&self) -> TbspSolution {
        TbspSolution {
            paths: self
                .paths
                .iter()
                .map(|p| ShipmentPath {
                    o: p.o,
                    d: p.d,
                    nodes: p.nodes.clone(),
                })
                .collect(),
            sequences: self
                .sequences
                .iter()
                .map(|s| ShipmentSequence {
                    o: s.o,
                    d: s.d,
                    blocks: s.blocks.clone(),
                })
                .collect(),
            blocks: self
                .blocks
                .iter()
                .map(|b| ProvidedBlock {
                    p: b.p,
                    q: b.q,
                    route: b.route.clone(),
                    z: b.z,
                    w: b.w,
                })
                .collect(),
            costs: CostBreakdown {
                car_km: self.costs.car_km,
                accumulation: self.costs.accumulation,
                reclassification: self.costs.reclassification,
                total: self.costs.total,
            },
        }
    }
}

pub fn solution_to_json(sol: &TbspSolution, time: Option<f64>) -> String {
    serde_json::to_string_pretty(&SolutionFile::new(sol, time)).expect("solution serializes")
}

pub fn load_solution(path: &Path) -> Result<SolutionFile, IoError> {
    serde_json::from_str(&read(path)?).map_err(|e| json_err(path, e))
}

pub fn save_solution(sol: &TbspSolution, time: Option<f64>, path: &Path) -> Result<(), IoError> {
    write(path, &solution_to_json(sol, time))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogPath {
    pub nodes: Vec<YardId>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogPair {
    pub o: YardId,
    pub d: YardId,
    pub shortest: f64,
    pub paths: Vec<CatalogPath>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogFile {
    pub epsilon: f64,
    pub detour: bool,
    pub pairs: Vec<CatalogPair>,
}

/// Every pair of the catalog with its legal paths, in yard ids.
pub fn catalog_file(inst: &Instance, catalog: &PathCatalog) -> CatalogFile {
    CatalogFile {
        epsilon: catalog.epsilon,
        detour: catalog.options.detour,
        pairs: catalog
            .pairs()
            .map(|(o, d)| CatalogPair {
                o: inst.yard_id(o),
                d: inst.yard_id(d),
                shortest: catalog.distance(o, d).unwrap_or(f64::INFINITY),
                paths: catalog
                    .paths(o, d)
                    .iter()
                    .map(|p| CatalogPath {
                        nodes: p.yard_ids(inst),
                        length: p.length,
                    })
                    .collect(),
            })
            .collect(),
    }
}
