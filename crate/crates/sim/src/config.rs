//! TOML configuration. Every section and key is optional unless noted;
//! unknown keys are rejected.
//!
//! ```toml
//! [scenario]
//! kind = "terrain"            # or "cross"
//! side_length = 10000.0
//! cell_radius = 1500.0
//! node_count = 200            # terrain only
//! spacing = 500.0             # cross only
//! arm_length = 5000.0         # cross only, defaults to side_length / 2
//! weights = [1.0, ...]        # W(j) per node, default 1
//!
//! [radio]
//! channel_count = 8
//! comm_range = 800.0
//! interference_factor = 2.0
//! path_loss_exponent = 2.0
//! power_levels = [0.25, 0.5, 0.75, 1.0]
//! round_trip = [...]          # RT per channel, default 1
//! channel_factor = [...]      # F per channel, default 1
//! rates = [...]               # r per channel in (0, 1], default 1
//!
//! [scheduler]
//! max_rounds = 500
//! power_tolerance = 1e-9
//! tax_tolerance = 1e-6
//! tax_step = 5e-4
//! tax_decay = 0.9
//! tax_cap = 20.0
//! stable_rounds = 3
//!
//! [routing]
//! routes_k = 3
//! pair_count = 8
//! channel_capacity = 1000.0
//!
//! [sweep]
//! loads = [0.0, 20.0, ...]    # Mb/s, nonempty, nondecreasing
//! seeds = [1, 2, 3, 4, 5]
//! variants = ["with_mtm", "without_mtm"]
//! output = "results/sweep.csv"
//! trace_dir = "results/traces"  # optional, one trace file per run
//!
//! [connectivity]
//! radii = [50.0, 100.0, ...]
//! ```

use std::path::{Path, PathBuf};

use mtm_core::measure::Variant;
use mtm_core::scheduler::Limits;
use mtm_core::topology::{build_cross_scenario, build_terrain_scenario, TerrainConfig, Topology};
use mtm_core::world::RoutingParams;
use mtm_core::{RadioParams, World};
use serde::Deserialize;

use crate::error::{Result, SimError};

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    #[default]
    Terrain,
    Cross,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    pub side_length: f64,
    pub cell_radius: f64,
    pub node_count: usize,
    pub spacing: f64,
    pub arm_length: Option<f64>,
    pub weights: Option<Vec<f64>>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let t = TerrainConfig::desk();
        Self {
            kind: ScenarioKind::Terrain,
            side_length: t.side_length,
            cell_radius: t.cell_radius,
            node_count: t.node_count,
            spacing: t.spacing,
            arm_length: t.arm_length,
            weights: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioSection {
    pub channel_count: usize,
    pub comm_range: f64,
    pub interference_factor: f64,
    pub path_loss_exponent: f64,
    pub power_levels: Vec<f64>,
    pub round_trip: Option<Vec<f64>>,
    pub channel_factor: Option<Vec<f64>>,
    pub rates: Option<Vec<f64>>,
}

impl Default for RadioSection {
    fn default() -> Self {
        let r = RadioParams::desk();
        Self {
            channel_count: r.channel_count,
            comm_range: r.comm_range,
            interference_factor: r.interference_factor,
            path_loss_exponent: r.path_loss_exponent,
            power_levels: r.power_levels,
            round_trip: None,
            channel_factor: None,
            rates: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchedulerSection {
    pub max_rounds: usize,
    pub power_tolerance: f64,
    pub tax_tolerance: f64,
    pub tax_step: f64,
    pub tax_decay: f64,
    pub tax_cap: f64,
    pub stable_rounds: usize,
}

impl Default for SchedulerSection {
    fn default() -> Self {
        let l = Limits::default();
        Self {
            max_rounds: l.max_rounds,
            power_tolerance: l.power_tolerance,
            tax_tolerance: l.tax_tolerance,
            tax_step: l.tax_step,
            tax_decay: l.tax_decay,
            tax_cap: l.tax_cap,
            stable_rounds: l.stable_rounds,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoutingSection {
    pub routes_k: usize,
    pub pair_count: usize,
    pub channel_capacity: f64,
}

impl Default for RoutingSection {
    fn default() -> Self {
        let r = RoutingParams::default();
        Self {
            routes_k: r.routes_k,
            pair_count: r.pair_count,
            channel_capacity: r.channel_capacity,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub loads: Vec<f64>,
    pub seeds: Vec<u64>,
    pub variants: Vec<String>,
    pub output: PathBuf,
    pub trace_dir: Option<PathBuf>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            loads: (0..=10).map(|k| k as f64 * 20.0).collect(),
            seeds: vec![1, 2, 3, 4, 5],
            variants: Variant::ALL.iter().map(|v| v.as_str().to_owned()).collect(),
            output: PathBuf::from("sweep.csv"),
            trace_dir: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConnectivitySection {
    pub radii: Vec<f64>,
}

impl Default for ConnectivitySection {
    fn default() -> Self {
        Self {
            radii: (1..=20).map(|k| k as f64 * 50.0).collect(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub scenario: ScenarioSection,
    pub radio: RadioSection,
    pub scheduler: SchedulerSection,
    pub routing: RoutingSection,
    pub sweep: SweepSection,
    pub connectivity: ConnectivitySection,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            SimError::Config(msg) => SimError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks everything that does not need a generated topology.
    pub fn validate(&self) -> Result<()> {
        self.limits().validate()?;
        self.radio().validate()?;
        let s = &self.sweep;
        if s.loads.is_empty() {
            return Err(SimError::Config("sweep.loads must not be empty".into()));
        }
        if s.loads.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(SimError::Config("sweep.loads must be finite and non-negative".into()));
        }
        if s.loads.windows(2).any(|w| w[0] > w[1]) {
            return Err(SimError::Config("sweep.loads must be nondecreasing".into()));
        }
        if s.seeds.is_empty() {
            return Err(SimError::Config("sweep.seeds must not be empty".into()));
        }
        self.variants()?;
        if self.routing.routes_k == 0 {
            return Err(SimError::Config("routing.routes_k must be at least 1".into()));
        }
        if !(self.routing.channel_capacity > 0.0) {
            return Err(SimError::Config("routing.channel_capacity must be positive".into()));
        }
        if self.connectivity.radii.iter().any(|r| !(*r >= 0.0)) {
            return Err(SimError::Config("connectivity.radii must be non-negative".into()));
        }
        if self.scenario.kind == ScenarioKind::Terrain && self.scenario.node_count == 0 {
            return Err(SimError::Config("scenario.node_count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn variants(&self) -> Result<Vec<Variant>> {
        let mut out = Vec::new();
        for name in &self.sweep.variants {
            let v = Variant::parse(name)
                .ok_or_else(|| SimError::Config(format!("unknown variant {name:?}")))?;
            if !out.contains(&v) {
                out.push(v);
            }
        }
        if out.is_empty() {
            return Err(SimError::Config("sweep.variants must not be empty".into()));
        }
        out.sort();
        Ok(out)
    }

    pub fn limits(&self) -> Limits {
        let s = &self.scheduler;
        Limits {
            max_rounds: s.max_rounds,
            power_tolerance: s.power_tolerance,
            tax_tolerance: s.tax_tolerance,
            tax_step: s.tax_step,
            tax_decay: s.tax_decay,
            tax_cap: s.tax_cap,
            stable_rounds: s.stable_rounds,
        }
    }

    pub fn radio(&self) -> RadioParams {
        let r = &self.radio;
        let mut params = RadioParams::with_channels(r.channel_count);
        params.comm_range = r.comm_range;
        params.interference_factor = r.interference_factor;
        params.path_loss_exponent = r.path_loss_exponent;
        params.power_levels = r.power_levels.clone();
        if let Some(t) = &r.round_trip {
            params.round_trip = t.clone();
        }
        if let Some(t) = &r.channel_factor {
            params.channel_factor = t.clone();
        }
        params
    }

    pub fn terrain(&self, seed: u64) -> TerrainConfig {
        let s = &self.scenario;
        TerrainConfig {
            side_length: s.side_length,
            cell_radius: s.cell_radius,
            node_count: s.node_count,
            spacing: s.spacing,
            arm_length: s.arm_length,
            seed,
        }
    }

    pub fn topology(&self, seed: u64) -> Result<Topology> {
        let terrain = self.terrain(seed);
        Ok(match self.scenario.kind {
            ScenarioKind::Terrain => build_terrain_scenario(&terrain)?,
            ScenarioKind::Cross => build_cross_scenario(&terrain)?,
        })
    }

    /// The world of one seed: placement drawn from `seed`, tables from the config.
    pub fn world(&self, seed: u64) -> Result<World> {
        let mut world = World::new(self.topology(seed)?, self.radio())?;
        world.routing = RoutingParams {
            routes_k: self.routing.routes_k,
            pair_count: self.routing.pair_count,
            channel_capacity: self.routing.channel_capacity,
        };
        if let Some(w) = &self.scenario.weights {
            world.weights = w.clone();
        }
        if let Some(r) = &self.radio.rates {
            world.rates = r.clone();
        }
        world.validate()?;
        Ok(world)
    }
}
