//! Scenario configuration: a single JSON document with sections `room`,
//! `grid`, `reporting_cells`, `nodes`, `ultrasonic`, `noise`, `crypto`,
//! `optics`, and `seed`.
//!
//! Loading parses, validates (reporting the offending field path), and
//! assembles the runtime types. It also computes a canonical hash of the
//! parsed document — whitespace and key order do not affect it, defaulted
//! sections do — which the trace header echoes.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coverage::{optimal_beam_radius, required_launch_power, GaussianBeam, ReceiverSpec};
use crate::key_agreement::{hex, KeyAgreementError, PublicParams};
use crate::location_mgmt::{Adjacency, CellGrid, CellId};
use crate::positioning::{Point2D, UltrasonicReceiver};
use crate::sim::world::{validate_scenario, MobileNode, RoomConfig, ScriptedRequest, SimError};

/// The parsed form of a scenario file, mirroring the JSON schema one to one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub room: RoomSection,
    pub grid: GridSection,
    #[serde(default)]
    pub reporting_cells: Vec<CellId>,
    #[serde(default)]
    pub nodes: Vec<NodeSection>,
    pub ultrasonic: UltrasonicSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub crypto: CryptoSection,
    #[serde(default)]
    pub optics: OpticsSection,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSection {
    pub width: f64,
    pub height: f64,
    /// Seconds per tick; defaults to 1.
    #[serde(default = "default_tick_duration")]
    pub tick_duration: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub rows: u32,
    pub cols: u32,
    pub cell_size: f64,
    /// Neighborhood used for vicinity flood fill and probe ordering.
    #[serde(default = "default_adjacency")]
    pub adjacency: Adjacency,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    pub id: String,
    pub start: [f64; 2],
    #[serde(default)]
    pub waypoints: Vec<[f64; 2]>,
    #[serde(default)]
    pub speed: f64,
    pub password: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UltrasonicSection {
    pub receivers: Vec<ReceiverEntry>,
    /// Meters per second; defaults to 343 (dry air at 20 °C).
    #[serde(default = "default_speed_of_sound")]
    pub speed_of_sound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverEntry {
    pub id: String,
    pub position: [f64; 2],
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Standard deviation of time-of-flight noise, seconds; defaults to 0.
    #[serde(default)]
    pub tof_sigma: f64,
}

/// Either a named well-known group, or an explicit prime modulus and
/// generator. Defaults to the 2048-bit MODP group.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CryptoSection {
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default)]
    pub n: Option<BigIntSpec>,
    #[serde(default)]
    pub g: Option<BigIntSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticsSection {
    /// Receiver sensitivity (minimum decodable irradiance), W/m²; defaults
    /// to 1.
    #[serde(default = "default_sensitivity")]
    pub sensitivity: f64,
    /// Beam radius at the floor plane, meters. Defaults to the optimal
    /// radius for covering a full cell (beam waist √2 × cell circumradius).
    #[serde(default)]
    pub beam_radius: Option<f64>,
    /// Photodiode detector area, m² (informational).
    #[serde(default)]
    pub detector_area: Option<f64>,
}

impl Default for OpticsSection {
    fn default() -> Self {
        Self {
            sensitivity: default_sensitivity(),
            beam_radius: None,
            detector_area: None,
        }
    }
}

/// An integer that may exceed 2⁵³: written either as a JSON number or as a
/// decimal (or 0x-prefixed hex) string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BigIntSpec {
    Number(u64),
    Text(String),
}

impl BigIntSpec {
    fn to_biguint(&self) -> Option<BigUint> {
        match self {
            BigIntSpec::Number(v) => Some(BigUint::from(*v)),
            BigIntSpec::Text(s) => {
                let s = s.trim();
                if let Some(hexpart) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
                    BigUint::parse_bytes(hexpart.as_bytes(), 16)
                } else {
                    BigUint::parse_bytes(s.as_bytes(), 10)
                }
            }
        }
    }
}

fn default_tick_duration() -> f64 {
    1.0
}

fn default_adjacency() -> Adjacency {
    Adjacency::Four
}

fn default_speed_of_sound() -> f64 {
    343.0
}

fn default_sensitivity() -> f64 {
    1.0
}

/// A fully validated, ready-to-run scenario.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub room: RoomConfig,
    pub nodes: Vec<MobileNode>,
    /// Canonical hash of the parsed config document (hex SHA-256).
    pub config_hash: String,
}

/// The canonical hash: SHA-256 over the compact JSON serialization of the
/// parsed document (keys sorted, defaults filled in).
pub fn config_hash(doc: &ConfigDoc) -> String {
    let value = serde_json::to_value(doc).expect("config serializes");
    let canonical = serde_json::to_string(&value).expect("value serializes");
    hex(&Sha256::digest(canonical.as_bytes()))
}

fn resolve_crypto(section: &CryptoSection) -> Result<PublicParams, SimError> {
    match (&section.group, &section.n, &section.g) {
        (group, None, None) => match group.as_deref() {
            None | Some("modp2048") => Ok(PublicParams::modp2048()),
            Some(other) => Err(SimError::invalid(
                "crypto.group",
                format!("unknown group '{other}'; available: modp2048"),
            )),
        },
        (None, Some(n), Some(g)) => {
            let n = n
                .to_biguint()
                .ok_or_else(|| SimError::invalid("crypto.n", "not a valid integer literal"))?;
            let g = g
                .to_biguint()
                .ok_or_else(|| SimError::invalid("crypto.g", "not a valid integer literal"))?;
            PublicParams::new(n, g).map_err(|err| match err {
                KeyAgreementError::NotPrime(n) => {
                    SimError::invalid("crypto.n", format!("{n} is not prime"))
                }
                KeyAgreementError::GeneratorOutOfRange => {
                    SimError::invalid("crypto.g", "generator must satisfy 1 < g < n")
                }
                other => SimError::invalid("crypto", other.to_string()),
            })
        }
        _ => Err(SimError::invalid(
            "crypto",
            "specify either a named 'group' or both 'n' and 'g', not a mixture",
        )),
    }
}

/// Builds the runtime scenario from a parsed document, validating everything.
pub fn build_scenario(doc: &ConfigDoc) -> Result<LoadedScenario, SimError> {
    // Reporting cells are bounds-checked here so the error carries the index.
    for (i, cell) in doc.reporting_cells.iter().enumerate() {
        if cell.0 >= doc.grid.rows || cell.1 >= doc.grid.cols {
            return Err(SimError::invalid(
                format!("reporting_cells[{i}]"),
                format!(
                    "cell ({}, {}) is outside the {}×{} grid",
                    cell.0, cell.1, doc.grid.rows, doc.grid.cols
                ),
            ));
        }
    }
    let reporting: BTreeSet<CellId> = doc.reporting_cells.iter().copied().collect();
    let grid = CellGrid::new(
        doc.grid.rows,
        doc.grid.cols,
        doc.grid.cell_size,
        reporting,
        doc.grid.adjacency,
    )
    .map_err(|err| SimError::invalid("grid", err.to_string()))?;

    let sensitivity = doc.optics.sensitivity;
    if !sensitivity.is_finite() || sensitivity <= 0.0 {
        return Err(SimError::invalid(
            "optics.sensitivity",
            format!("must be a positive finite number, got {sensitivity}"),
        ));
    }
    let coverage_radius = grid.cell_circumradius();
    let beam_radius = match doc.optics.beam_radius {
        Some(w) if w.is_finite() && w > 0.0 => w,
        Some(w) => {
            return Err(SimError::invalid(
                "optics.beam_radius",
                format!("must be a positive finite number, got {w}"),
            ));
        }
        None => optimal_beam_radius(coverage_radius),
    };
    // Launch power is always sized so the beam meets the sensitivity at the
    // cell circumradius: any in-cell position is then connected.
    let launch_power = required_launch_power(sensitivity, beam_radius, coverage_radius)
        .map_err(|err| SimError::invalid("optics", err.to_string()))?;
    let beam = GaussianBeam::new(launch_power, beam_radius)
        .map_err(|err| SimError::invalid("optics", err.to_string()))?;
    let receiver = ReceiverSpec::new(sensitivity, doc.optics.detector_area)
        .map_err(|err| SimError::invalid("optics.detector_area", err.to_string()))?;

    let ultrasonic_receivers: Vec<UltrasonicReceiver> = doc
        .ultrasonic
        .receivers
        .iter()
        .map(|r| UltrasonicReceiver::new(r.id.clone(), Point2D::new(r.position[0], r.position[1])))
        .collect();

    let params = resolve_crypto(&doc.crypto)?;

    let room = RoomConfig {
        width: doc.room.width,
        height: doc.room.height,
        tick_duration: doc.room.tick_duration,
        grid,
        beam,
        receiver,
        ultrasonic_receivers,
        speed_of_sound: doc.ultrasonic.speed_of_sound,
        tof_noise_sigma: doc.noise.tof_sigma,
        params,
        rng_seed: doc.seed,
    };
    let nodes: Vec<MobileNode> = doc
        .nodes
        .iter()
        .map(|n| MobileNode {
            node_id: n.id.clone(),
            true_position: Point2D::new(n.start[0], n.start[1]),
            waypoints: n
                .waypoints
                .iter()
                .map(|w| Point2D::new(w[0], w[1]))
                .collect(),
            speed: n.speed,
            password: n.password.clone().into_bytes(),
        })
        .collect();

    validate_scenario(&room, &nodes)?;
    Ok(LoadedScenario {
        room,
        nodes,
        config_hash: config_hash(doc),
    })
}

/// Parses and validates a scenario from JSON text.
pub fn load_config(text: &str) -> Result<LoadedScenario, SimError> {
    let doc: ConfigDoc = serde_json::from_str(text)
        .map_err(|err| SimError::invalid("<config>", err.to_string()))?;
    build_scenario(&doc)
}

/// Parses a request script: a JSON array of `{tick, src, dst}` objects.
/// Node references are checked against the scenario at run time.
pub fn load_script(text: &str) -> Result<Vec<ScriptedRequest>, SimError> {
    serde_json::from_str(text).map_err(|err| SimError::invalid("<script>", err.to_string()))
}
