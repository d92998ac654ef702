//! Executes one resolved [`ExperimentConfig`]: builds the dynamics and the
//! partition, writes the requested CSV/PGM artifacts, and drops a
//! `manifest.json` describing the run.
//!
//! Everything except wall-clock timings is deterministic in (config, seed):
//! identical inputs produce byte-identical CSV and PGM files.

use crate::config::{ExperimentConfig, MapKind, PartitionChoice};
use crate::CliError;
use qde_core::{
    alf_partial_entropy, baker_unitary, entropy_gap_bounds, free_independence_probe,
    haar_unitary, husimi_of_operator, mean_decoherence_entropy, measured_refinement,
    momentum_partition, read_partition, rotate_partition, CMat, CoherentStateParams,
    PartitionKind, PartitionOfUnity, PathBudget, Seed, TorusQuantization,
};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

// Child-seed tags: every consumer of randomness hangs off its own child of
// the config seed, so adding an output never shifts another output's draws.
const TAG_MAP: u64 = 1;
const TAG_ROTATION: u64 = 2;
const TAG_STATES: u64 = 3;
const TAG_BOUNDS: u64 = 4;

/// What a completed run produced and where.
#[derive(Debug)]
pub struct RunManifest {
    pub out_dir: PathBuf,
    pub manifest_path: PathBuf,
    pub json: Value,
}

impl RunManifest {
    /// Absolute path of a named output, if the run emitted it.
    pub fn output_path(&self, name: &str) -> Option<PathBuf> {
        let rel = self.json.get("outputs")?.get(name)?.get("path")?.as_str()?;
        Some(self.out_dir.join(rel))
    }
}

fn ms(t0: Instant) -> u64 {
    t0.elapsed().as_millis() as u64
}

fn build_map(cfg: &ExperimentConfig, base: Seed) -> Result<CMat, CliError> {
    match cfg.map {
        MapKind::Baker => Ok(baker_unitary(&TorusQuantization::new(cfg.d))?),
        MapKind::BakerSquared => {
            let b = baker_unitary(&TorusQuantization::new(cfg.d))?;
            Ok(b.mul(&b))
        }
        MapKind::HaarRandom => Ok(haar_unitary(cfg.d, base.child(TAG_MAP))),
        MapKind::Identity => Ok(CMat::identity(cfg.d)),
        MapKind::Custom => {
            let path = cfg.map_file.as_ref().expect("validated");
            let file = fs::File::open(path).map_err(|e| {
                CliError::Config(format!("cannot open map_file {}: {e}", path.display()))
            })?;
            let container = read_partition(std::io::BufReader::new(file))?;
            if container.len() != 1 {
                return Err(CliError::Config(format!(
                    "map_file {} holds {} operators; a map container must hold exactly 1",
                    path.display(),
                    container.len()
                )));
            }
            if container.dim() != cfg.d {
                return Err(CliError::Config(format!(
                    "map_file {} has dimension {} but config d = {}",
                    path.display(),
                    container.dim(),
                    cfg.d
                )));
            }
            let u = container.op(0).clone();
            let dev = u.unitarity_deviation();
            if dev > 1e-10 {
                return Err(CliError::Numerical(format!(
                    "custom map is not unitary (deviation {dev:.3e} > 1e-10)"
                )));
            }
            Ok(u)
        }
    }
}

/// The run's partition plus, for rotated runs, the unrotated base family
/// (its Husimi grids are the localized reference of the comparison plots).
fn build_partition(
    cfg: &ExperimentConfig,
    base: Seed,
) -> Result<(PartitionOfUnity, Option<PartitionOfUnity>), CliError> {
    match cfg.partition {
        PartitionChoice::Momentum => Ok((momentum_partition(cfg.d, cfg.k)?, None)),
        PartitionChoice::RotatedMomentum => {
            let plain = momentum_partition(cfg.d, cfg.k)?;
            let r = haar_unitary(cfg.d, base.child(TAG_ROTATION));
            let rotated = rotate_partition(&plain, &r)?;
            Ok((rotated, Some(plain)))
        }
        PartitionChoice::Custom => {
            let path = cfg.partition_file.as_ref().expect("validated");
            let file = fs::File::open(path).map_err(|e| {
                CliError::Config(format!("cannot open partition_file {}: {e}", path.display()))
            })?;
            let p = read_partition(std::io::BufReader::new(file))?;
            if p.dim() != cfg.d {
                return Err(CliError::Config(format!(
                    "partition_file {} has dimension {} but config d = {}",
                    path.display(),
                    p.dim(),
                    cfg.d
                )));
            }
            if p.len() != cfg.k {
                return Err(CliError::Config(format!(
                    "partition_file {} holds k = {} operators but config k = {}",
                    path.display(),
                    p.len(),
                    cfg.k
                )));
            }
            Ok((p, None))
        }
    }
}

fn husimi_label(choice: PartitionChoice) -> &'static str {
    match choice {
        PartitionChoice::Momentum => "momentum",
        PartitionChoice::RotatedMomentum => "rotated",
        PartitionChoice::Custom => "custom",
    }
}

/// SHA-256 over the resolved config echo plus the raw bytes of any custom
/// input files, so a manifest pins down exactly what the run consumed.
fn inputs_hash(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let mut h = Sha256::new();
    for (key, value) in cfg.echo() {
        h.update(key.as_bytes());
        h.update(b" = ");
        h.update(value.as_bytes());
        h.update(b"\n");
    }
    for (tag, path) in [("map_file", &cfg.map_file), ("partition_file", &cfg.partition_file)] {
        if let Some(path) = path {
            let bytes = fs::read(path).map_err(|e| {
                CliError::Config(format!("cannot read {tag} {}: {e}", path.display()))
            })?;
            h.update(tag.as_bytes());
            h.update(b" ");
            h.update(bytes.len().to_string().as_bytes());
            h.update(b"\n");
            h.update(&bytes);
        }
    }
    let digest = h.finalize();
    let mut hex = String::with_capacity(2 * digest.len() + 7);
    hex.push_str("sha256:");
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(dir.join(name), bytes)
        .map_err(|e| CliError::Io(format!("cannot write {name}: {e}")))
}

/// Run one experiment, writing artifacts and `manifest.json` into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest, CliError> {
    let total = Instant::now();
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let base = Seed::new(cfg.seed);
    let mut timings: BTreeMap<String, u64> = BTreeMap::new();
    let mut outputs = Map::new();

    let t0 = Instant::now();
    let u = build_map(cfg, base)?;
    timings.insert("map_build".into(), ms(t0));

    let t0 = Instant::now();
    let (p, plain) = build_partition(cfg, base)?;
    timings.insert("partition_build".into(), ms(t0));

    if cfg.outputs.free_probe && p.kind() != PartitionKind::Projective {
        return Err(CliError::Config(
            "free_probe output needs a projective partition".into(),
        ));
    }

    if cfg.outputs.s_trace {
        let t0 = Instant::now();
        let budget = PathBudget {
            gram_cap: cfg.gram_cap,
            omega_dim: cfg.omega_dim,
        };
        let trace = alf_partial_entropy(&p, &u, cfg.t_max, &budget)?;
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        write_file(out_dir, "s_trace.csv", &buf)?;
        outputs.insert("s_trace".into(), json!({ "path": "s_trace.csv" }));
        timings.insert("s_trace".into(), ms(t0));
    }

    if cfg.outputs.e_trace {
        let t0 = Instant::now();
        let trace =
            mean_decoherence_entropy(&p, &u, cfg.t_max, cfg.n_samples, base.child(TAG_STATES))?;
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        write_file(out_dir, "e_trace.csv", &buf)?;
        outputs.insert("e_trace".into(), json!({ "path": "e_trace.csv" }));
        timings.insert("e_trace".into(), ms(t0));
    }

    if cfg.outputs.bounds {
        let t0 = Instant::now();
        let y = measured_refinement(&p, &u, cfg.bounds_steps)?;
        let report = entropy_gap_bounds(&y, cfg.bounds_samples, base.child(TAG_BOUNDS))?;
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write_file(out_dir, "bounds.csv", &buf)?;
        outputs.insert(
            "bounds".into(),
            json!({ "path": "bounds.csv", "sandwich_holds": report.sandwich_holds() }),
        );
        timings.insert("bounds".into(), ms(t0));
    }

    if cfg.outputs.free_probe {
        let t0 = Instant::now();
        let report = free_independence_probe(&p, &u, cfg.probe_t, None, cfg.gram_cap)?;
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        write_file(out_dir, "free_probe.csv", &buf)?;
        outputs.insert(
            "free_probe".into(),
            json!({ "path": "free_probe.csv", "max_dev": report.max_dev }),
        );
        timings.insert("free_probe".into(), ms(t0));
    }

    if cfg.outputs.husimi {
        let t0 = Instant::now();
        let params = CoherentStateParams::default();
        let mut families: Vec<(&'static str, &PartitionOfUnity)> =
            vec![(husimi_label(cfg.partition), &p)];
        if let Some(plain) = &plain {
            families.push(("momentum", plain));
        }
        for (label, family) in families {
            for j in 0..family.len() {
                let grid = husimi_of_operator(family.op(j), cfg.grid_n, &params);
                let stem = format!("husimi_{label}_{j}");
                let mut pgm = Vec::new();
                let max = grid.write_pgm(&mut pgm)?;
                write_file(out_dir, &format!("{stem}.pgm"), &pgm)?;
                let mut csv = Vec::new();
                grid.write_csv(&mut csv)?;
                write_file(out_dir, &format!("{stem}.csv"), &csv)?;
                outputs.insert(
                    stem.clone(),
                    json!({ "path": format!("{stem}.pgm"), "csv": format!("{stem}.csv"), "max": max }),
                );
            }
        }
        timings.insert("husimi".into(), ms(t0));
    }

    timings.insert("total".into(), ms(total));
    let manifest = json!({
        "config": Value::Object(
            cfg.echo().into_iter().map(|(k, v)| (k, Value::String(v))).collect(),
        ),
        "inputs_hash": inputs_hash(cfg)?,
        "outputs": Value::Object(outputs),
        "timings_ms": timings,
    });
    let manifest_path = out_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Io(format!("cannot serialize manifest: {e}")))?;
    text.push('\n');
    fs::write(&manifest_path, text)
        .map_err(|e| CliError::Io(format!("cannot write manifest.json: {e}")))?;

    Ok(RunManifest {
        out_dir: out_dir.to_path_buf(),
        manifest_path,
        json: manifest,
    })
}
