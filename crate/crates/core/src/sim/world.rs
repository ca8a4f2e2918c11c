//! World state and the tick loop: mobility, tracking, cell mapping, location
//! management, link checks, and scripted data requests.

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::coverage::{is_connected, GaussianBeam, ReceiverSpec};
use crate::key_agreement::{key_fingerprint, run_handshake, sample_exponent, PublicParams,
    DIGEST_SCHEME};
use crate::location_mgmt::{cell_of, locate, on_move, CellGrid, CellId, LocationDB,
    LocationError};
use crate::positioning::{simulate_ranging_with_rng, tof_to_distance, trilaterate, Point2D,
    UltrasonicReceiver};
use crate::sim::event::{round_sig6, EventKind, TraceRecord};

/// Ratio tolerance for "the grid covers the room exactly", absorbing float
/// representation error in `rows × cell_size = height`.
const GRID_COVERAGE_TOLERANCE: f64 = 1e-9;

/// Errors raised before a simulation produces any trace output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration at {path}: {message}")]
    Invalid { path: String, message: String },
    #[error("scripted request references unknown node '{0}'")]
    UnknownNode(String),
}

impl SimError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        SimError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Static description of the room and its installed infrastructure.
#[derive(Debug, Clone)]
pub struct RoomConfig {
    /// Room extent along x, meters.
    pub width: f64,
    /// Room extent along y, meters.
    pub height: f64,
    /// Wall-clock seconds represented by one simulation tick.
    pub tick_duration: f64,
    /// Cell partition of the floor plane, including the reporting set.
    pub grid: CellGrid,
    /// The beam every ceiling transceiver launches (one transceiver per
    /// cell, mounted over the cell center).
    pub beam: GaussianBeam,
    /// The mobile nodes' optical receiver.
    pub receiver: ReceiverSpec,
    /// Ultrasonic anchors; the first three are used for trilateration.
    pub ultrasonic_receivers: Vec<UltrasonicReceiver>,
    /// Propagation speed for time-of-flight conversion, meters/second.
    pub speed_of_sound: f64,
    /// Standard deviation of additive time-of-flight noise, seconds.
    pub tof_noise_sigma: f64,
    /// Key-agreement group shared by all nodes and the backend.
    pub params: PublicParams,
    /// Seed of the single generator driving all randomness.
    pub rng_seed: u64,
}

/// One mobile node: identity, motion plan, and link password.
#[derive(Debug, Clone)]
pub struct MobileNode {
    pub node_id: String,
    /// Current (initially: starting) position.
    pub true_position: Point2D,
    /// Positions visited in order at constant speed; the node stops at the
    /// last one.
    pub waypoints: Vec<Point2D>,
    /// Meters per second.
    pub speed: f64,
    /// Shared secret for authenticated key agreement.
    pub password: Vec<u8>,
}

/// A scripted data request: at the end of `tick`, `src` asks the backend for
/// a secured link to `dst`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedRequest {
    pub tick: u64,
    pub src: String,
    pub dst: String,
}

/// Everything `run` produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// The ordered trace, starting with the header record.
    pub trace: Vec<TraceRecord>,
    /// True when the run hit a protocol violation (search-miss or a request
    /// against a disconnected endpoint). The trace still records everything
    /// up to and including the violation.
    pub protocol_violation: bool,
}

#[derive(Debug)]
struct NodeState {
    node: MobileNode,
    /// Next waypoint to head for; `== waypoints.len()` when done.
    waypoint_index: usize,
    /// Cell the tracking system currently maps the node to.
    mapped_cell: Option<CellId>,
    /// Last link-check outcome, for edge-triggered LinkLost events.
    connected: bool,
}

/// The simulation world: one logical owner drives it tick by tick. All
/// methods are synchronous; all randomness comes from the single seeded
/// generator inside.
#[derive(Debug)]
pub struct WorldState {
    config: RoomConfig,
    nodes: Vec<NodeState>,
    db: LocationDB,
    rng: ChaCha12Rng,
    tick: u64,
    next_seq: u64,
    protocol_violation: bool,
}

fn check_positive(path: &str, value: f64) -> Result<(), SimError> {
    if !value.is_finite() || value <= 0.0 {
        return Err(SimError::invalid(
            path,
            format!("must be a positive finite number, got {value}"),
        ));
    }
    Ok(())
}

fn check_in_room(path: &str, config: &RoomConfig, p: Point2D) -> Result<(), SimError> {
    if !p.x.is_finite() || !p.y.is_finite() || p.x < 0.0 || p.y < 0.0 || p.x > config.width
        || p.y > config.height
    {
        return Err(SimError::invalid(
            path,
            format!(
                "position ({}, {}) lies outside the room (0..{} × 0..{})",
                p.x, p.y, config.width, config.height
            ),
        ));
    }
    Ok(())
}

fn triangle_area(a: Point2D, b: Point2D, c: Point2D) -> f64 {
    ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)).abs() / 2.0
}

/// Full semantic validation of a scenario, with the offending field path in
/// every error.
pub fn validate_scenario(config: &RoomConfig, nodes: &[MobileNode]) -> Result<(), SimError> {
    check_positive("room.width", config.width)?;
    check_positive("room.height", config.height)?;
    check_positive("room.tick_duration", config.tick_duration)?;
    check_positive("ultrasonic.speed_of_sound", config.speed_of_sound)?;
    if !config.tof_noise_sigma.is_finite() || config.tof_noise_sigma < 0.0 {
        return Err(SimError::invalid(
            "noise.tof_sigma",
            format!(
                "must be a non-negative finite number, got {}",
                config.tof_noise_sigma
            ),
        ));
    }

    let covered_h = f64::from(config.grid.rows()) * config.grid.cell_size();
    let covered_w = f64::from(config.grid.cols()) * config.grid.cell_size();
    if (covered_h - config.height).abs() > GRID_COVERAGE_TOLERANCE * config.height.max(1.0)
        || (covered_w - config.width).abs() > GRID_COVERAGE_TOLERANCE * config.width.max(1.0)
    {
        return Err(SimError::invalid(
            "grid",
            format!(
                "grid must cover the room exactly: rows×cell_size = {covered_h} vs height {} \
                 and cols×cell_size = {covered_w} vs width {}",
                config.height, config.width
            ),
        ));
    }

    if config.ultrasonic_receivers.len() < 3 {
        return Err(SimError::invalid(
            "ultrasonic.receivers",
            format!(
                "positioning needs at least 3 non-collinear receivers, got {}",
                config.ultrasonic_receivers.len()
            ),
        ));
    }
    for (i, r) in config.ultrasonic_receivers.iter().enumerate() {
        if r.receiver_id.is_empty() {
            return Err(SimError::invalid(
                format!("ultrasonic.receivers[{i}].id"),
                "receiver id must be non-empty",
            ));
        }
        if !r.position.x.is_finite() || !r.position.y.is_finite() {
            return Err(SimError::invalid(
                format!("ultrasonic.receivers[{i}].position"),
                "coordinates must be finite",
            ));
        }
        for (j, other) in config.ultrasonic_receivers.iter().enumerate().skip(i + 1) {
            if r.receiver_id == other.receiver_id {
                return Err(SimError::invalid(
                    format!("ultrasonic.receivers[{j}].id"),
                    format!("duplicate receiver id '{}'", r.receiver_id),
                ));
            }
        }
    }
    let anchors = &config.ultrasonic_receivers;
    let area = triangle_area(anchors[0].position, anchors[1].position, anchors[2].position);
    if area < 1e-9 {
        return Err(SimError::invalid(
            "ultrasonic.receivers",
            format!(
                "positioning needs at least 3 non-collinear receivers; the first three span \
                 a triangle of area {area:.3e} m², which is degenerate"
            ),
        ));
    }

    if *config.params.n() < BigUint::from(5u32) {
        return Err(SimError::invalid(
            "crypto.n",
            "group is too small to sample secret exponents from [2, n−2]; use n ≥ 5",
        ));
    }

    for (i, node) in nodes.iter().enumerate() {
        if node.node_id.is_empty() {
            return Err(SimError::invalid(format!("nodes[{i}].id"), "id must be non-empty"));
        }
        for (j, other) in nodes.iter().enumerate().skip(i + 1) {
            if node.node_id == other.node_id {
                return Err(SimError::invalid(
                    format!("nodes[{j}].id"),
                    format!("duplicate node id '{}'", node.node_id),
                ));
            }
        }
        if node.password.is_empty() {
            return Err(SimError::invalid(
                format!("nodes[{i}].password"),
                "password must be non-empty",
            ));
        }
        if !node.speed.is_finite() || node.speed < 0.0 {
            return Err(SimError::invalid(
                format!("nodes[{i}].speed"),
                format!("must be a non-negative finite number, got {}", node.speed),
            ));
        }
        let step = node.speed * config.tick_duration;
        if step > config.grid.cell_size() {
            return Err(SimError::invalid(
                format!("nodes[{i}].speed"),
                format!(
                    "per-tick displacement {step} m exceeds one cell ({} m); location \
                     management requires at most one cell of movement per tick",
                    config.grid.cell_size()
                ),
            ));
        }
        check_in_room(&format!("nodes[{i}].start"), config, node.true_position)?;
        for (w, p) in node.waypoints.iter().enumerate() {
            check_in_room(&format!("nodes[{i}].waypoints[{w}]"), config, *p)?;
        }
    }
    Ok(())
}

impl WorldState {
    /// Builds and validates a world. All configuration errors surface here,
    /// before the first tick.
    pub fn new(config: RoomConfig, nodes: Vec<MobileNode>) -> Result<Self, SimError> {
        validate_scenario(&config, &nodes)?;
        let rng = ChaCha12Rng::seed_from_u64(config.rng_seed);
        let nodes = nodes
            .into_iter()
            .map(|node| NodeState {
                node,
                waypoint_index: 0,
                mapped_cell: None,
                connected: true,
            })
            .collect();
        Ok(Self {
            config,
            nodes,
            db: LocationDB::new(),
            rng,
            tick: 0,
            next_seq: 0,
            protocol_violation: false,
        })
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn config(&self) -> &RoomConfig {
        &self.config
    }

    pub fn location_db(&self) -> &LocationDB {
        &self.db
    }

    /// True once any protocol violation (search-miss, request against a
    /// disconnected endpoint) has occurred.
    pub fn protocol_violation(&self) -> bool {
        self.protocol_violation
    }

    /// A node's current true position, if the node exists.
    pub fn true_position(&self, node_id: &str) -> Option<Point2D> {
        self.node_index(node_id)
            .map(|i| self.nodes[i].node.true_position)
    }

    fn node_index(&self, node_id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.node.node_id == node_id)
    }

    fn emit(
        &mut self,
        out: &mut Vec<TraceRecord>,
        kind: EventKind,
        node: Option<&str>,
        payload: Value,
    ) {
        out.push(TraceRecord {
            tick: self.tick,
            seq: self.next_seq,
            kind,
            node: node.map(str::to_string),
            payload,
        });
        self.next_seq += 1;
    }

    /// Moves one node along its waypoint list by one tick's travel budget,
    /// carrying leftover distance across waypoints reached mid-tick.
    fn advance_node(&mut self, i: usize) {
        let state = &mut self.nodes[i];
        let mut budget = state.node.speed * self.config.tick_duration;
        while budget > 0.0 && state.waypoint_index < state.node.waypoints.len() {
            let target = state.node.waypoints[state.waypoint_index];
            let d = state.node.true_position.distance_to(&target);
            if d <= budget {
                state.node.true_position = target;
                state.waypoint_index += 1;
                budget -= d;
            } else {
                let f = budget / d;
                state.node.true_position = Point2D::new(
                    state.node.true_position.x + (target.x - state.node.true_position.x) * f,
                    state.node.true_position.y + (target.y - state.node.true_position.y) * f,
                );
                budget = 0.0;
            }
        }
    }

    /// Keeps a (possibly noise-perturbed) estimate inside the room so it can
    /// be mapped to a cell.
    fn clamp_to_room(&self, p: Point2D) -> Point2D {
        Point2D::new(p.x.clamp(0.0, self.config.width), p.y.clamp(0.0, self.config.height))
    }

    /// The cell a node physically occupies right now.
    fn true_cell(&self, i: usize) -> CellId {
        let p = self.clamp_to_room(self.nodes[i].node.true_position);
        cell_of(&self.config.grid, p).expect("clamped position maps to a cell")
    }

    fn position_payload(estimate: Option<Point2D>, true_position: Point2D) -> Value {
        let true_value = json!([round_sig6(true_position.x), round_sig6(true_position.y)]);
        match estimate {
            Some(p) => json!({
                "estimated": [round_sig6(p.x), round_sig6(p.y)],
                "true_position": true_value,
            }),
            None => json!({
                "estimated": null,
                "true_position": true_value,
            }),
        }
    }

    /// Advances the world one tick and returns the events it produced, in
    /// the fixed intra-tick order: movement, then ranging (one
    /// PositionEstimated per node), then cell mapping (CellEntered), then
    /// location updates (LocationUpdated), then link checks (LinkLost).
    /// Scripted requests are appended after this by the run loop.
    pub fn step(&mut self) -> Vec<TraceRecord> {
        self.tick += 1;
        self.next_seq = 0;
        let mut events = Vec::new();

        // Movement.
        for i in 0..self.nodes.len() {
            self.advance_node(i);
        }

        // Ranging and position estimation.
        let mut estimates: Vec<Option<Point2D>> = Vec::with_capacity(self.nodes.len());
        for i in 0..self.nodes.len() {
            let true_position = self.nodes[i].node.true_position;
            let measurements = simulate_ranging_with_rng(
                true_position,
                &self.config.ultrasonic_receivers,
                self.config.speed_of_sound,
                self.config.tof_noise_sigma,
                &mut self.rng,
            )
            .expect("validated speed and noise");
            let mut distances = [0.0f64; 3];
            for (d, m) in distances.iter_mut().zip(&measurements) {
                *d = tof_to_distance(m.tof, self.config.speed_of_sound)
                    .expect("validated speed, non-negative tof");
            }
            let anchors: &[UltrasonicReceiver; 3] = self.config.ultrasonic_receivers[0..3]
                .try_into()
                .expect("at least 3 receivers");
            let node_id = self.nodes[i].node.node_id.clone();
            match trilaterate(anchors, &distances) {
                Ok(estimate) => {
                    let payload = Self::position_payload(Some(estimate), true_position);
                    self.emit(&mut events, EventKind::PositionEstimated, Some(&node_id), payload);
                    estimates.push(Some(estimate));
                }
                Err(err) => {
                    let mut payload = Self::position_payload(None, true_position);
                    payload["error"] = Value::from(err.to_string());
                    self.emit(&mut events, EventKind::PositionEstimated, Some(&node_id), payload);
                    estimates.push(None);
                }
            }
        }

        // Cell mapping. A failed estimate keeps the previous cell.
        let mut entries: Vec<(usize, CellId, bool)> = Vec::new();
        for (i, estimate) in estimates.iter().enumerate() {
            let Some(estimate) = estimate else { continue };
            let clamped = self.clamp_to_room(*estimate);
            let cell = cell_of(&self.config.grid, clamped).expect("clamped position maps to a cell");
            if self.nodes[i].mapped_cell != Some(cell) {
                let first_attach = self.nodes[i].mapped_cell.is_none();
                self.nodes[i].mapped_cell = Some(cell);
                let node_id = self.nodes[i].node.node_id.clone();
                self.emit(
                    &mut events,
                    EventKind::CellEntered,
                    Some(&node_id),
                    json!({ "cell": [cell.0, cell.1] }),
                );
                entries.push((i, cell, first_attach));
            }
        }

        // Location updates. The first mapping is a mandatory silent
        // registration; afterwards only reporting-cell entries touch the
        // database.
        for (i, cell, first_attach) in entries {
            let node_id = self.nodes[i].node.node_id.clone();
            if first_attach {
                self.db
                    .register_initial(&self.config.grid, &node_id, cell, self.tick)
                    .expect("mapped cell is in the grid");
            } else if let Some(update) =
                on_move(&mut self.db, &self.config.grid, &node_id, cell, self.tick)
                    .expect("mapped cell is in the grid")
            {
                self.emit(
                    &mut events,
                    EventKind::LocationUpdated,
                    Some(&node_id),
                    json!({ "cell": [update.cell.0, update.cell.1] }),
                );
            }
        }

        // Link checks against the transceiver of the mapped cell,
        // edge-triggered so a healthy link stays silent.
        for i in 0..self.nodes.len() {
            let Some(cell) = self.nodes[i].mapped_cell else { continue };
            let center = self.config.grid.cell_center(cell);
            let offset = self.nodes[i].node.true_position.distance_to(&center);
            let now = is_connected(&self.config.beam, &self.config.receiver, offset);
            if self.nodes[i].connected && !now {
                let node_id = self.nodes[i].node.node_id.clone();
                self.emit(
                    &mut events,
                    EventKind::LinkLost,
                    Some(&node_id),
                    json!({ "cell": [cell.0, cell.1], "offset_from_center": round_sig6(offset) }),
                );
            }
            self.nodes[i].connected = now;
        }

        events
    }

    /// Serves one data request from `src` to `dst`: locates `dst` via the
    /// reporting-cell database (SearchPerformed), activates the found cell's
    /// transceiver (LinkEstablished), runs the password-authenticated key
    /// agreement through the backend (HandshakeCompleted), and on matching
    /// keys delivers one enciphered test message (MessageDelivered).
    ///
    /// A search-miss or a disconnected endpoint aborts the request, marks
    /// the run as a protocol violation, and leaves the partial event record
    /// in the trace.
    pub fn request_data(&mut self, src: &str, dst: &str) -> Result<Vec<TraceRecord>, SimError> {
        let src_idx = self
            .node_index(src)
            .ok_or_else(|| SimError::UnknownNode(src.to_string()))?;
        let dst_idx = self
            .node_index(dst)
            .ok_or_else(|| SimError::UnknownNode(dst.to_string()))?;
        let mut events = Vec::new();

        // Search: probe cells for the node's physical presence.
        let dst_true_cell = self.true_cell(dst_idx);
        let outcome = locate(&self.db, &self.config.grid, dst, |cell| cell == dst_true_cell);
        let found_cell = match outcome {
            Ok(outcome) => {
                let probed: Vec<Value> =
                    outcome.probed.iter().map(|c| json!([c.0, c.1])).collect();
                self.emit(
                    &mut events,
                    EventKind::SearchPerformed,
                    Some(dst),
                    json!({
                        "found": [outcome.found_cell.0, outcome.found_cell.1],
                        "probed": probed,
                        "requester": src,
                    }),
                );
                outcome.found_cell
            }
            Err(LocationError::SearchMiss { probed, .. }) => {
                let probed: Vec<Value> = probed.iter().map(|c| json!([c.0, c.1])).collect();
                self.emit(
                    &mut events,
                    EventKind::SearchPerformed,
                    Some(dst),
                    json!({ "found": null, "miss": true, "probed": probed, "requester": src }),
                );
                self.protocol_violation = true;
                return Ok(events);
            }
            Err(other) => unreachable!("locate over a valid grid: {other}"),
        };

        // Both endpoints must hold their optical links for the backend to
        // carry the exchange.
        if !self.nodes[src_idx].connected || !self.nodes[dst_idx].connected {
            self.protocol_violation = true;
            return Ok(events);
        }

        let offset = self.nodes[dst_idx]
            .node
            .true_position
            .distance_to(&self.config.grid.cell_center(found_cell));
        self.emit(
            &mut events,
            EventKind::LinkEstablished,
            Some(dst),
            json!({
                "cell": [found_cell.0, found_cell.1],
                "offset_from_center": round_sig6(offset),
            }),
        );

        // Password-authenticated key agreement over the backend channel.
        let a = sample_exponent(&self.config.params, &mut self.rng).expect("validated group");
        let b = sample_exponent(&self.config.params, &mut self.rng).expect("validated group");
        let src_password = self.nodes[src_idx].node.password.clone();
        let dst_password = self.nodes[dst_idx].node.password.clone();
        let outcome = run_handshake(&src_password, &dst_password, &self.config.params, &a, &b)
            .expect("validated parameters and sampled exponents");
        let fingerprint_initiator = key_fingerprint(&outcome.key_initiator);
        let fingerprint_responder = key_fingerprint(&outcome.key_responder);
        self.emit(
            &mut events,
            EventKind::HandshakeCompleted,
            Some(dst),
            json!({
                "digest_scheme": DIGEST_SCHEME,
                "fingerprint_initiator": fingerprint_initiator,
                "fingerprint_responder": fingerprint_responder,
                "initiator": src,
                "keys_match": outcome.keys_match,
            }),
        );
        if !outcome.keys_match {
            return Ok(events);
        }

        // One enciphered test message across the link, deciphered by the
        // responder with its own key.
        let plaintext = format!("secured link check from {src} to {dst}").into_bytes();
        let ciphertext = keystream_xor(&outcome.key_initiator, &plaintext);
        let recovered = keystream_xor(&outcome.key_responder, &ciphertext);
        let roundtrip_match = recovered == plaintext;
        self.emit(
            &mut events,
            EventKind::MessageDelivered,
            Some(dst),
            json!({
                "length": plaintext.len(),
                "requester": src,
                "roundtrip_match": roundtrip_match,
            }),
        );
        Ok(events)
    }
}

/// Demo stream cipher for trace payloads: XOR with a keystream of SHA-256
/// blocks over (key bytes ‖ big-endian block counter). Deterministic, and
/// applying it twice with the same key restores the input. This is
/// demonstration plumbing for the simulator, not a vetted cipher.
pub fn keystream_xor(key: &BigUint, data: &[u8]) -> Vec<u8> {
    let key_bytes = key.to_bytes_be();
    let mut out = Vec::with_capacity(data.len());
    let mut counter: u64 = 0;
    while out.len() < data.len() {
        let mut hasher = Sha256::new();
        hasher.update(&key_bytes);
        hasher.update(counter.to_be_bytes());
        let block = hasher.finalize();
        for byte in block {
            if out.len() == data.len() {
                break;
            }
            out.push(byte ^ data[out.len()]);
        }
        counter += 1;
    }
    out
}

/// The first line of every trace: enough to reproduce the run.
fn header_record(config_hash: &str, seed: u64) -> TraceRecord {
    TraceRecord {
        tick: 0,
        seq: 0,
        kind: EventKind::Header,
        node: None,
        payload: json!({
            "config_hash": config_hash,
            "password_digest": DIGEST_SCHEME,
            "seed": seed,
            "version": env!("CARGO_PKG_VERSION"),
        }),
    }
}

/// Runs a scenario for `ticks` ticks, serving each scripted request at the
/// end of its tick, and returns the complete ordered trace (header first).
///
/// All validation happens before the first tick; a returned error means no
/// trace output was produced at all.
pub fn run(
    config: RoomConfig,
    nodes: Vec<MobileNode>,
    ticks: u64,
    requests: &[ScriptedRequest],
    config_hash: &str,
) -> Result<RunOutcome, SimError> {
    let seed = config.rng_seed;
    let known: Vec<String> = nodes.iter().map(|n| n.node_id.clone()).collect();
    for (i, request) in requests.iter().enumerate() {
        for id in [&request.src, &request.dst] {
            if !known.iter().any(|k| k == id) {
                return Err(SimError::UnknownNode(id.clone()));
            }
        }
        if request.tick == 0 {
            return Err(SimError::invalid(
                format!("script[{i}].tick"),
                "requests run at the end of a tick; ticks are numbered from 1",
            ));
        }
    }
    let mut world = WorldState::new(config, nodes)?;
    let mut trace = vec![header_record(config_hash, seed)];
    for _ in 0..ticks {
        trace.extend(world.step());
        let tick = world.tick();
        for request in requests.iter().filter(|r| r.tick == tick) {
            let events = world.request_data(&request.src, &request.dst)?;
            trace.extend(events);
        }
    }
    Ok(RunOutcome {
        trace,
        protocol_violation: world.protocol_violation,
    })
}
