//! Flat `key = value` experiment configs with command-line overrides.
//!
//! One config fully determines a run: defaults, then the config file, then
//! explicit overrides, validated as a whole at the end. Every error names
//! the offending field.

use crate::CliError;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    Baker,
    BakerSquared,
    HaarRandom,
    Identity,
    Custom,
}

impl MapKind {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "baker" => Ok(MapKind::Baker),
            "baker_squared" => Ok(MapKind::BakerSquared),
            "haar_random" => Ok(MapKind::HaarRandom),
            "identity" => Ok(MapKind::Identity),
            "custom" => Ok(MapKind::Custom),
            other => Err(format!(
                "unknown map '{other}' (expected baker, baker_squared, haar_random, identity or custom)"
            )),
        }
    }

    fn name(self) -> &'static str {
        match self {
            MapKind::Baker => "baker",
            MapKind::BakerSquared => "baker_squared",
            MapKind::HaarRandom => "haar_random",
            MapKind::Identity => "identity",
            MapKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionChoice {
    Momentum,
    RotatedMomentum,
    Custom,
}

impl PartitionChoice {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "momentum" => Ok(PartitionChoice::Momentum),
            "rotated_momentum" => Ok(PartitionChoice::RotatedMomentum),
            "custom" => Ok(PartitionChoice::Custom),
            other => Err(format!(
                "unknown partition '{other}' (expected momentum, rotated_momentum or custom)"
            )),
        }
    }

    fn name(self) -> &'static str {
        match self {
            PartitionChoice::Momentum => "momentum",
            PartitionChoice::RotatedMomentum => "rotated_momentum",
            PartitionChoice::Custom => "custom",
        }
    }
}

/// Which artifact families a run emits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Outputs {
    pub s_trace: bool,
    pub e_trace: bool,
    pub bounds: bool,
    pub free_probe: bool,
    pub husimi: bool,
}

impl Outputs {
    fn parse(list: &str) -> Result<Self, String> {
        let mut out = Outputs::default();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "s_trace" => out.s_trace = true,
                "e_trace" => out.e_trace = true,
                "bounds" => out.bounds = true,
                "free_probe" => out.free_probe = true,
                "husimi" => out.husimi = true,
                other => {
                    return Err(format!(
                        "unknown output '{other}' (expected s_trace, e_trace, bounds, free_probe or husimi)"
                    ))
                }
            }
        }
        Ok(out)
    }

    fn is_empty(&self) -> bool {
        !(self.s_trace || self.e_trace || self.bounds || self.free_probe || self.husimi)
    }
}

impl fmt::Display for Outputs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names = Vec::new();
        if self.s_trace {
            names.push("s_trace");
        }
        if self.e_trace {
            names.push("e_trace");
        }
        if self.bounds {
            names.push("bounds");
        }
        if self.free_probe {
            names.push("free_probe");
        }
        if self.husimi {
            names.push("husimi");
        }
        write!(f, "{}", names.join(","))
    }
}

/// Fully resolved run description; one of these determines a run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub map: MapKind,
    pub d: usize,
    pub partition: PartitionChoice,
    pub k: usize,
    pub t_max: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub outputs: Outputs,
    pub grid_n: usize,
    pub gram_cap: usize,
    pub omega_dim: usize,
    pub bounds_samples: usize,
    pub bounds_steps: usize,
    pub probe_t: usize,
    pub map_file: Option<PathBuf>,
    pub partition_file: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            map: MapKind::Baker,
            d: 64,
            partition: PartitionChoice::Momentum,
            k: 2,
            t_max: 6,
            n_samples: 32,
            seed: 1,
            outputs: Outputs {
                s_trace: true,
                e_trace: true,
                ..Outputs::default()
            },
            grid_n: 64,
            gram_cap: 4096,
            omega_dim: 16,
            bounds_samples: 256,
            bounds_steps: 1,
            probe_t: 4,
            map_file: None,
            partition_file: None,
        }
    }
}

/// Optional per-field overrides, applied after the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub map: Option<String>,
    pub d: Option<usize>,
    pub partition: Option<String>,
    pub k: Option<usize>,
    pub t_max: Option<usize>,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub outputs: Option<String>,
    pub grid_n: Option<usize>,
    pub gram_cap: Option<usize>,
    pub omega_dim: Option<usize>,
    pub bounds_samples: Option<usize>,
    pub bounds_steps: Option<usize>,
    pub probe_t: Option<usize>,
    pub map_file: Option<PathBuf>,
    pub partition_file: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Resolve defaults → config file → overrides, then validate.
    pub fn build(file: Option<&Path>, ov: &Overrides) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            cfg.apply_file(&text, path)?;
        }
        cfg.apply_overrides(ov)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, text: &str, path: &Path) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "{}:{}: expected 'key = value', got '{raw}'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim()).map_err(|msg| {
                CliError::Config(format!("{}:{}: {msg}", path.display(), lineno + 1))
            })?;
        }
        Ok(())
    }

    fn apply_overrides(&mut self, ov: &Overrides) -> Result<(), CliError> {
        let wrap = |field: &str, msg: String| CliError::Config(format!("--{field}: {msg}"));
        if let Some(v) = &ov.map {
            self.map = MapKind::parse(v).map_err(|m| wrap("map", m))?;
        }
        if let Some(v) = ov.d {
            self.d = v;
        }
        if let Some(v) = &ov.partition {
            self.partition = PartitionChoice::parse(v).map_err(|m| wrap("partition", m))?;
        }
        if let Some(v) = ov.k {
            self.k = v;
        }
        if let Some(v) = ov.t_max {
            self.t_max = v;
        }
        if let Some(v) = ov.n_samples {
            self.n_samples = v;
        }
        if let Some(v) = ov.seed {
            self.seed = v;
        }
        if let Some(v) = &ov.outputs {
            self.outputs = Outputs::parse(v).map_err(|m| wrap("outputs", m))?;
        }
        if let Some(v) = ov.grid_n {
            self.grid_n = v;
        }
        if let Some(v) = ov.gram_cap {
            self.gram_cap = v;
        }
        if let Some(v) = ov.omega_dim {
            self.omega_dim = v;
        }
        if let Some(v) = ov.bounds_samples {
            self.bounds_samples = v;
        }
        if let Some(v) = ov.bounds_steps {
            self.bounds_steps = v;
        }
        if let Some(v) = ov.probe_t {
            self.probe_t = v;
        }
        if let Some(v) = &ov.map_file {
            self.map_file = Some(v.clone());
        }
        if let Some(v) = &ov.partition_file {
            self.partition_file = Some(v.clone());
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            value
                .parse()
                .map_err(|e| format!("{key}: cannot parse '{value}': {e}"))
        }
        match key {
            "map" => self.map = MapKind::parse(value)?,
            "d" => self.d = num(key, value)?,
            "partition" => self.partition = PartitionChoice::parse(value)?,
            "k" => self.k = num(key, value)?,
            "t_max" => self.t_max = num(key, value)?,
            "n_samples" => self.n_samples = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "outputs" => self.outputs = Outputs::parse(value)?,
            "grid_n" => self.grid_n = num(key, value)?,
            "gram_cap" => self.gram_cap = num(key, value)?,
            "omega_dim" => self.omega_dim = num(key, value)?,
            "bounds_samples" => self.bounds_samples = num(key, value)?,
            "bounds_steps" => self.bounds_steps = num(key, value)?,
            "probe_t" => self.probe_t = num(key, value)?,
            "map_file" => self.map_file = Some(PathBuf::from(value)),
            "partition_file" => self.partition_file = Some(PathBuf::from(value)),
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.d < 2 {
            return fail(format!("d must be at least 2 (got {})", self.d));
        }
        if self.k < 1 {
            return fail("k must be at least 1".into());
        }
        if self.t_max < 1 {
            return fail("t_max must be at least 1".into());
        }
        if self.n_samples < 1 {
            return fail("n_samples must be at least 1".into());
        }
        if matches!(self.map, MapKind::Baker | MapKind::BakerSquared) && !self.d.is_multiple_of(2) {
            return fail(format!("map = {} requires even d (got {})", self.map.name(), self.d));
        }
        if matches!(
            self.partition,
            PartitionChoice::Momentum | PartitionChoice::RotatedMomentum
        ) && !self.d.is_multiple_of(self.k)
        {
            return fail(format!(
                "partition = {} requires k to divide d (got k = {}, d = {})",
                self.partition.name(),
                self.k,
                self.d
            ));
        }
        match (self.map, &self.map_file) {
            (MapKind::Custom, None) => return fail("map = custom requires map_file".into()),
            (MapKind::Custom, Some(_)) => {}
            (_, Some(_)) => {
                return fail(format!("map_file set but map = {} is not custom", self.map.name()))
            }
            _ => {}
        }
        match (self.partition, &self.partition_file) {
            (PartitionChoice::Custom, None) => {
                return fail("partition = custom requires partition_file".into())
            }
            (PartitionChoice::Custom, Some(_)) => {}
            (_, Some(_)) => {
                return fail(format!(
                    "partition_file set but partition = {} is not custom",
                    self.partition.name()
                ))
            }
            _ => {}
        }
        if self.outputs.is_empty() {
            return fail("outputs must name at least one of s_trace, e_trace, bounds, free_probe, husimi".into());
        }
        if self.outputs.husimi && self.grid_n < 1 {
            return fail("grid_n must be at least 1 for husimi output".into());
        }
        if self.outputs.bounds && self.bounds_samples < 16 {
            return fail(format!(
                "bounds_samples must be at least 16 (got {})",
                self.bounds_samples
            ));
        }
        if self.outputs.bounds && self.bounds_steps < 1 {
            return fail("bounds_steps must be at least 1".into());
        }
        if self.outputs.free_probe && self.probe_t < 1 {
            return fail("probe_t must be at least 1".into());
        }
        if self.gram_cap < 1 {
            return fail("gram_cap must be at least 1".into());
        }
        Ok(())
    }

    /// Deterministic flat echo of every field, for the manifest and the
    /// input hash.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("map".into(), self.map.name().into());
        m.insert("d".into(), self.d.to_string());
        m.insert("partition".into(), self.partition.name().into());
        m.insert("k".into(), self.k.to_string());
        m.insert("t_max".into(), self.t_max.to_string());
        m.insert("n_samples".into(), self.n_samples.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("outputs".into(), self.outputs.to_string());
        m.insert("grid_n".into(), self.grid_n.to_string());
        m.insert("gram_cap".into(), self.gram_cap.to_string());
        m.insert("omega_dim".into(), self.omega_dim.to_string());
        m.insert("bounds_samples".into(), self.bounds_samples.to_string());
        m.insert("bounds_steps".into(), self.bounds_steps.to_string());
        m.insert("probe_t".into(), self.probe_t.to_string());
        if let Some(p) = &self.map_file {
            m.insert("map_file".into(), p.display().to_string());
        }
        if let Some(p) = &self.partition_file {
            m.insert("partition_file".into(), p.display().to_string());
        }
        m
    }
}
