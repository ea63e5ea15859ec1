//! Cluster state and latency-aware online placement.
//!
//! Placement treats each node as a knapsack with an extra non-additive
//! dimension: a candidate is feasible only when, after the hypothetical
//! placement, the predicted end-to-end mean response of the newcomer *and*
//! of every app already on the target device stays within its bound. The
//! latency-oblivious baseline drops exactly that check and keeps the rest.
//!
//! `ClusterState` mutation is single-writer: decisions apply sequentially
//! in arrival order. Prediction queries take `&self` and may run
//! concurrently between decisions.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{
    self, cpu_response_ms, end_to_end_response, fcfs_prediction, gpu_admission_prediction,
    mgc_ps_prediction, GpuAdmission, ResponsePrediction, ServiceClass, WorkloadMix,
};
use crate::profiles::{switch_overhead_ms, AcceleratorKind, AcceleratorModel, ProfileTable};

#[derive(Debug, Error)]
pub enum PlacementError {
    #[error(transparent)]
    Profile(#[from] crate::profiles::ProfileError),
    #[error("{dnn} does not support device kind {kind}")]
    UnsupportedDevice { dnn: String, kind: AcceleratorKind },
    #[error("unknown node {0}")]
    UnknownNode(u32),
    #[error("unknown device {0} on node {1}")]
    UnknownDevice(u32, u32),
    #[error("unknown application {0}")]
    UnknownApp(String),
    #[error("invalid application spec {app_id}: {msg}")]
    InvalidSpec { app_id: String, msg: String },
    #[error(transparent)]
    Mix(#[from] analytic::MixError),
}

/// Deployment mode of an application.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppKind {
    /// Provider-hosted pre-trained model; tenants of the same DNN share one
    /// backend.
    AiaaS,
    /// Custom model with a dedicated backend.
    UserTrained,
}

impl AppKind {
    pub fn name(self) -> &'static str {
        match self {
            AppKind::AiaaS => "aiaas",
            AppKind::UserTrained => "user_trained",
        }
    }
}

/// An application asking to be placed: its DNN, worst-case rate, latency
/// bound, and frontend-container needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplicationSpec {
    pub app_id: String,
    pub dnn: String,
    pub lambda_rps: f64,
    pub tau_ms: f64,
    pub kind: AppKind,
    #[serde(default = "one")]
    pub cpu_cores: f64,
    #[serde(default)]
    pub cpu_service_ms: f64,
    #[serde(default = "default_frontend_mem")]
    pub frontend_mem_mib: f64,
}

fn one() -> f64 {
    1.0
}

fn default_frontend_mem() -> f64 {
    100.0
}

impl ApplicationSpec {
    pub fn validate(&self) -> Result<(), PlacementError> {
        let fail = |msg: &str| PlacementError::InvalidSpec {
            app_id: self.app_id.clone(),
            msg: msg.to_string(),
        };
        if !(self.lambda_rps > 0.0) {
            return Err(fail("lambda_rps must be > 0"));
        }
        if !(self.tau_ms > 0.0) {
            return Err(fail("tau_ms must be > 0"));
        }
        if !(self.cpu_cores > 0.0) {
            return Err(fail("cpu_cores must be > 0"));
        }
        if self.cpu_service_ms < 0.0 || self.frontend_mem_mib < 0.0 {
            return Err(fail("cpu_service_ms and frontend_mem_mib must be >= 0"));
        }
        Ok(())
    }

    /// CPU-stage mean response at this app's own allocation, ms.
    pub fn cpu_response_ms(&self) -> f64 {
        cpu_response_ms(self.lambda_rps, self.cpu_cores, self.cpu_service_ms)
    }
}

/// One DNN instance resident on a device; shared backends serve a group of
/// AIaaS tenants.
#[derive(Clone, Debug)]
pub struct Backend {
    pub backend_id: u64,
    pub dnn: String,
    pub shared: bool,
    pub app_ids: Vec<String>,
    pub lambda_rps: f64,
    pub mem_mib: f64,
}

#[derive(Clone, Debug)]
pub struct DeviceState {
    pub device_id: u32,
    pub model: AcceleratorModel,
    pub mem_free_mib: f64,
    pub backends: Vec<Backend>,
}

impl DeviceState {
    pub fn new(device_id: u32, model: AcceleratorModel) -> Self {
        DeviceState {
            device_id,
            mem_free_mib: model.memory_capacity_mib,
            model,
            backends: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NodeState {
    pub node_id: u32,
    pub cpu_cores_total: f64,
    pub cpu_cores_free: f64,
    pub mem_total_mib: f64,
    pub mem_free_mib: f64,
    pub devices: Vec<DeviceState>,
}

impl NodeState {
    pub fn new(node_id: u32, cpu_cores: f64, mem_mib: f64, devices: Vec<AcceleratorModel>) -> Self {
        NodeState {
            node_id,
            cpu_cores_total: cpu_cores,
            cpu_cores_free: cpu_cores,
            mem_total_mib: mem_mib,
            mem_free_mib: mem_mib,
            devices: devices
                .into_iter()
                .enumerate()
                .map(|(i, m)| DeviceState::new(i as u32, m))
                .collect(),
        }
    }
}

/// An application placed on the cluster, with its backend assignment.
#[derive(Clone, Debug)]
pub struct PlacedApp {
    pub spec: ApplicationSpec,
    pub node_id: u32,
    pub device_id: u32,
    pub backend_id: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RejectReason {
    /// No device anywhere supports the DNN.
    NoneSupport,
    Memory,
    Latency,
    Utilization,
}

impl RejectReason {
    pub fn name(self) -> &'static str {
        match self {
            RejectReason::NoneSupport => "none_support",
            RejectReason::Memory => "mem",
            RejectReason::Latency => "latency",
            RejectReason::Utilization => "utilization",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Placed {
        node_id: u32,
        device_id: u32,
        backend_id: u64,
        joined_group: bool,
    },
    Rejected(RejectReason),
}

/// Result of one placement attempt. `predicted_ms` holds the post-placement
/// end-to-end prediction for every app on the chosen device (newcomer
/// included); empty on rejection.
#[derive(Clone, Debug)]
pub struct PlacementDecision {
    pub outcome: Outcome,
    pub predicted_ms: Vec<(String, f64)>,
}

impl PlacementDecision {
    pub fn placed(&self) -> bool {
        matches!(self.outcome, Outcome::Placed { .. })
    }

    pub fn newcomer_predicted_ms(&self, app_id: &str) -> Option<f64> {
        self.predicted_ms
            .iter()
            .find(|(id, _)| id == app_id)
            .map(|(_, ms)| *ms)
    }
}

/// Node-selection heuristic among feasible candidates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    /// Least post-placement device utilization.
    #[default]
    LeastUtil,
    /// Highest post-placement device utilization (worst fit): packs tight.
    HighestUtil,
}

/// Which device kinds a placement may consider and how the kind is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DeviceSelection {
    /// All kinds compete under the node heuristic directly.
    #[default]
    All,
    /// Only devices of this kind.
    FixedKind(AcceleratorKind),
    /// Pick the kind whose best feasible candidate promises the lowest
    /// newcomer latency, then apply the node heuristic within that kind.
    HeterogeneousBest,
}

#[derive(Clone, Debug)]
pub struct PlacementPolicy {
    pub heuristic: Heuristic,
    pub max_rho: f64,
    pub gpu_admission: GpuAdmission,
    /// When false, the latency feasibility check is skipped entirely: the
    /// traditional additive-knapsack baseline.
    pub latency_aware: bool,
    /// Group AIaaS tenants of the same DNN onto one backend.
    pub grouping: bool,
    pub selection: DeviceSelection,
}

impl Default for PlacementPolicy {
    fn default() -> Self {
        PlacementPolicy {
            heuristic: Heuristic::LeastUtil,
            max_rho: 0.95,
            gpu_admission: GpuAdmission::ConservativeMax,
            latency_aware: true,
            grouping: true,
            selection: DeviceSelection::All,
        }
    }
}

impl PlacementPolicy {
    pub fn baseline_knapsack() -> Self {
        PlacementPolicy {
            latency_aware: false,
            ..PlacementPolicy::default()
        }
    }
}

/// Post-placement prediction for one candidate device.
#[derive(Clone, Debug)]
pub struct CandidatePrediction {
    /// Predicted end-to-end mean response per app on the device, newcomer
    /// included, app_id -> ms. Infinite when the hypothetical mix is
    /// unstable.
    pub per_app_ms: Vec<(String, f64)>,
    pub newcomer_ms: f64,
    /// Post-placement device utilization.
    pub post_rho: f64,
    pub stable: bool,
}

#[derive(Clone, Debug)]
struct Candidate {
    node_id: u32,
    device_id: u32,
    kind: AcceleratorKind,
    join_backend: Option<u64>,
    prediction: CandidatePrediction,
}

/// The cluster: nodes plus every placed application.
#[derive(Clone, Debug)]
pub struct ClusterState {
    pub nodes: Vec<NodeState>,
    pub apps: Vec<PlacedApp>,
    profiles: ProfileTable,
    next_backend_id: u64,
}

impl ClusterState {
    pub fn new(nodes: Vec<NodeState>, profiles: ProfileTable) -> Self {
        ClusterState {
            nodes,
            apps: Vec::new(),
            profiles,
            next_backend_id: 0,
        }
    }

    pub fn profiles(&self) -> &ProfileTable {
        &self.profiles
    }

    pub fn node(&self, node_id: u32) -> Result<&NodeState, PlacementError> {
        self.nodes
            .iter()
            .find(|n| n.node_id == node_id)
            .ok_or(PlacementError::UnknownNode(node_id))
    }

    fn node_mut(&mut self, node_id: u32) -> Result<&mut NodeState, PlacementError> {
        self.nodes
            .iter_mut()
            .find(|n| n.node_id == node_id)
            .ok_or(PlacementError::UnknownNode(node_id))
    }

    pub fn device(&self, node_id: u32, device_id: u32) -> Result<&DeviceState, PlacementError> {
        self.node(node_id)?
            .devices
            .iter()
            .find(|d| d.device_id == device_id)
            .ok_or(PlacementError::UnknownDevice(device_id, node_id))
    }

    pub fn placed_app(&self, app_id: &str) -> Option<&PlacedApp> {
        self.apps.iter().find(|a| a.spec.app_id == app_id)
    }

    pub fn apps_on_device(&self, node_id: u32, device_id: u32) -> Vec<&PlacedApp> {
        self.apps
            .iter()
            .filter(|a| a.node_id == node_id && a.device_id == device_id)
            .collect()
    }

    fn shared_backend(&self, node_id: u32, device_id: u32, dnn: &str) -> Option<&Backend> {
        self.device(node_id, device_id)
            .ok()?
            .backends
            .iter()
            .find(|b| b.shared && b.dnn == dnn)
    }

    /// Memory a placement of `app` on `node` would claim: backend runtime
    /// footprint plus frontend, or frontend only when the app joins a group
    /// backend already resident on the node.
    pub fn compute_mem_need(
        &self,
        app: &ApplicationSpec,
        node_id: u32,
    ) -> Result<f64, PlacementError> {
        let profile = self.profiles.get(&app.dnn)?;
        let node = self.node(node_id)?;
        let joins_group = app.kind == AppKind::AiaaS
            && node
                .devices
                .iter()
                .any(|d| self.shared_backend(node_id, d.device_id, &app.dnn).is_some());
        if joins_group {
            Ok(app.frontend_mem_mib)
        } else {
            Ok(profile.runtime_mib + app.frontend_mem_mib)
        }
    }

    /// The workload mix a device would serve with an optional hypothetical
    /// addition: either extra rate on an existing backend or a new class.
    fn device_mix(
        &self,
        dev: &DeviceState,
        extra: Option<(&ApplicationSpec, Option<u64>)>,
    ) -> Result<(WorkloadMix, Vec<u64>), PlacementError> {
        let mut classes = Vec::with_capacity(dev.backends.len() + 1);
        let mut class_backends = Vec::with_capacity(dev.backends.len() + 1);
        let mut new_class: Option<ServiceClass> = None;
        for b in &dev.backends {
            let profile = self.profiles.get(&b.dnn)?;
            let exec = profile
                .exec_ms(dev.model.kind)
                .ok_or
(PlacementError::UnsupportedDevice {
                    dnn: b.dnn.clone(),
                    kind: dev.model.kind,
                })?;
            let mut lambda = b.lambda_rps;
            if let Some((app, Some(join_id))) = extra {
                if join_id == b.backend_id {
                    lambda += app.lambda_rps;
                }
            }
            classes.push(ServiceClass::new(
                lambda,
                exec,
                switch_overhead_ms(profile, &dev.model),
            ));
            class_backends.push(b.backend_id);
        }
        if let Some((app, None)) = extra {
            let profile = self.profiles.get(&app.dnn)?;
            let exec =
                profile
                    .exec_ms(dev.model.kind)
                    .ok_or(PlacementError::UnsupportedDevice {
                        dnn: app.dnn.clone(),
                        kind: dev.model.kind,
                    })?;
            new_class = Some(ServiceClass::new(
                app.lambda_rps,
                exec,
                switch_overhead_ms(profile, &dev.model),
            ));
        }
        if let Some(c) = new_class {
            classes.push(c);
            class_backends.push(u64::MAX); // hypothetical new backend
        }
        Ok((WorkloadMix::from_classes(classes)?, class_backends))
    }

    fn device_prediction(
        &self,
        dev: &DeviceState,
        mix: &WorkloadMix,
        admission: GpuAdmission,
    ) -> ResponsePrediction {
        match dev.model.kind {
            AcceleratorKind::EdgeTpu => fcfs_prediction(mix),
            AcceleratorKind::EdgeGpu => gpu_admission_prediction(mix, admission),
            AcceleratorKind::DiscreteGpuMps => mgc_ps_prediction(mix, dev.model.parallelism_c),
        }
    }

    /// Per-app end-to-end predictions for the current residents of a device
    /// (no hypothetical addition).
    pub fn current_device_predictions(
        &self,
        node_id: u32,
        device_id: u32,
        admission: GpuAdmission,
    ) -> Result<Vec<(String, f64)>, PlacementError> {
        let dev = self.device(node_id, device_id)?;
        if dev.backends.is_empty() {
            return Ok(Vec::new());
        }
        let (mix, class_backends) = self.device_mix(dev, None)?;
        let pred = self.device_prediction(dev, &mix, admission);
        Ok(self.per_app_totals(node_id, device_id, None, &pred, &class_backends))
    }

    fn per_app_totals(
        &self,
        node_id: u32,
        device_id: u32,
        newcomer: Option<(&ApplicationSpec, u64)>,
        pred: &ResponsePrediction,
        class_backends: &[u64],
    ) -> Vec<(String, f64)> {
        let class_of = |backend_id: u64| -> usize {
            class_backends
                .iter()
                .position(|b| *b == backend_id)
                .expect("backend has a mix class")
        };
        let mut out = Vec::new();
        for placed in self.apps_on_device(node_id, device_id) {
            let dev_ms = pred.per_class_response_ms[class_of(placed.backend_id)];
            out.push((
                placed.spec.app_id.clone(),
                end_to_end_response(placed.spec.cpu_response_ms(), dev_ms),
            ));
        }
        if let Some((app, backend_id)) = newcomer {
            let dev_ms = pred.per_class_response_ms[class_of(backend_id)];
            out.push((
                app.app_id.clone(),
                end_to_end_response(app.cpu_response_ms(), dev_ms),
            ));
        }
        out
    }

    /// Hypothetically places `app` on `(node, device)` and predicts every
    /// affected app's end-to-end mean response. `join_backend` routes the
    /// app onto an existing shared backend instead of a new one.
    pub fn predict_after_placement(
        &self,
        app: &ApplicationSpec,
        node_id: u32,
        device_id: u32,
        join_backend: Option<u64>,
        admission: GpuAdmission,
    ) -> Result<CandidatePrediction, PlacementError> {
        let dev = self.device(node_id, device_id)?;
        let (mix, class_backends) = self.device_mix(dev, Some((app, join_backend)))?;
        let pred = self.device_prediction(dev, &mix, admission);
        let newcomer_backend = join_backend.unwrap_or(u64::MAX);
        let per_app_ms = self.per_app_totals(
            node_id,
            device_id,
            Some((app, newcomer_backend)),
            &pred,
            &class_backends,
        );
        let newcomer_ms = per_app_ms
            .last()
            .map(|(_, ms)| *ms)
            .unwrap_or(f64::INFINITY);
        Ok(CandidatePrediction {
            newcomer_ms,
            post_rho: mix.utilization(dev.model.parallelism_c),
            stable: pred.stable && newcomer_ms.is_finite(),
            per_app_ms,
        })
    }

    fn evaluate_candidate(
        &self,
        app: &ApplicationSpec,
        node: &NodeState,
        dev: &DeviceState,
        policy: &PlacementPolicy,
    ) -> Result<Candidate, RejectReason> {
        let profile = match self.profiles.get(&app.dnn) {
            Ok(p) => p,
            Err(_) => return Err(RejectReason::NoneSupport),
        };
        if !profile.supports(dev.model.kind) {
            return Err(RejectReason::NoneSupport);
        }
        if let DeviceSelection::FixedKind(kind) = policy.selection {
            if dev.model.kind != kind {
                return Err(RejectReason::NoneSupport);
            }
        }
        let join_backend = if policy.grouping && app.kind == AppKind::AiaaS {
            self.shared_backend(node.node_id, dev.device_id, &app.dnn)
                .map(|b| b.backend_id)
        } else {
            None
        };

        // Knapsack resources: backend memory on the device, frontend memory
        // and cores on the node.
        let backend_need = if join_backend.is_some() {
            0.0
        } else {
            profile.runtime_mib
        };
        if backend_need > dev.mem_free_mib
            || app.frontend_mem_mib > node.mem_free_mib
            || app.cpu_cores > node.cpu_cores_free
        {
            return Err(RejectReason::Memory);
        }

        let prediction = self
            .predict_after_placement(
                app,
                node.node_id,
                dev.device_id,
                join_backend,
                policy.gpu_admission,
            )
            .map_err(|_| RejectReason::NoneSupport)?;

        if policy.latency_aware {
            let tau_of = |app_id: &str| -> f64 {
                if app_id == app.app_id {
                    app.tau_ms
                } else {
                    self.placed_app(app_id)
                        .map(|p| p.spec.tau_ms)
                        .unwrap_or(f64::INFINITY)
                }
            };
            let ok = prediction
                .per_app_ms
                .iter()
                .all(|(id, ms)| *ms <= tau_of(id));
            if !ok {
                return Err(RejectReason::Latency);
            }
        }

        if !(prediction.post_rho < policy.max_rho) {
            return Err(RejectReason::Utilization);
        }

        Ok(Candidate {
            node_id: node.node_id,
            device_id: dev.device_id,
            kind: dev.model.kind,
            join_backend,
            prediction,
        })
    }

    /// Latency-aware online knapsack placement (with the configured
    /// enhancements). Applies the decision to the cluster on success.
    pub fn place(&mut self, app: &ApplicationSpec, policy: &PlacementPolicy) -> PlacementDecision {
        self.place_excluding(app, policy, &[])
    }

    /// Like [`ClusterState::place`] but never considers the listed
    /// `(node, device)` pairs; used by migration to rule out the hotspot.
    pub fn place_excluding(
        &mut self,
        app: &ApplicationSpec,
        policy: &PlacementPolicy,
        exclude: &[(u32, u32)],
    ) -> PlacementDecision {
        let mut feasible: Vec<Candidate> = Vec::new();
        let mut any_supporting = false;
        let mut worst: Option<RejectReason> = None;
        for node in &self.nodes {
            for dev in &node.devices {
                if exclude.contains(&(node.node_id, dev.device_id)) {
                    continue;
                }
                match self.evaluate_candidate(app, node, dev, policy) {
                    Ok(c) => {
                        any_supporting = true;
                        feasible.push(c);
                    }
                    Err(RejectReason::NoneSupport) => {}
                    Err(reason) => {
                        any_supporting = true;
                        // mem > latency > utilization for stable reporting
                        worst = Some(match worst {
                            None => reason,
                            Some(prev) => prev.min(reason),
                        });
                    }
                }
            }
        }

        if feasible.is_empty() {
            let reason = if any_supporting {
                worst.unwrap_or(RejectReason::Utilization)
            } else {
                RejectReason::NoneSupport
            };
            return PlacementDecision {
                outcome: Outcome::Rejected(reason),
                predicted_ms: Vec::new(),
            };
        }

        // Grouped placement: when feasible nodes already host a group for
        // this DNN, restrict the choice to them.
        if policy.grouping && app.kind == AppKind::AiaaS {
            let group: Vec<Candidate> = feasible
                .iter()
                .filter(|c| c.join_backend.is_some())
                .cloned()
                .collect();
            if !group.is_empty() {
                feasible = group;
            }
        }

        if policy.selection == DeviceSelection::HeterogeneousBest {
            // Pick the device kind whose best candidate promises the lowest
            // newcomer latency; ties break on kind order.
            let mut best_kind: Option<(f64, AcceleratorKind)> = None;
            for c in &feasible {
                let key = (c.prediction.newcomer_ms, c.kind);
                match best_kind {
                    None => best_kind = Some(key),
                    Some((ms, kind)) => {
                        if key.0 < ms || (key.0 == ms && key.1 < kind) {
                            best_kind = Some(key);
                        }
                    }
                }
            }
            let kind = best_kind.expect("nonempty feasible set").1;
            feasible.retain(|c| c.kind == kind);
        }

        // Node heuristic; ties break on the lowest (node, device) id, which
        // is the enumeration order.
        let chosen = feasible
            .into_iter()
            .reduce(|best, c| {
                let better = match policy.heuristic {
                    Heuristic::LeastUtil => c.prediction.post_rho < best.prediction.post_rho,
                    Heuristic::HighestUtil => c.prediction.post_rho > best.prediction.post_rho,
                };
                if better {
                    c
                } else {
                    best
                }
            })
            .expect("nonempty feasible set");

        let predicted_ms = chosen.prediction.per_app_ms.clone();
        let (backend_id, joined) = self.apply(app, &chosen);
        PlacementDecision {
            outcome: Outcome::Placed {
                node_id: chosen.node_id,
                device_id: chosen.device_id,
                backend_id,
                joined_group: joined,
            },
            predicted_ms,
        }
    }

    fn apply(&mut self, app: &ApplicationSpec, candidate: &Candidate) -> (u64, bool) {
        let runtime_mib = self
            .profiles
            .get(&app.dnn)
            .map(|p| p.runtime_mib)
            .unwrap_or(0.0);
        let next_id = self.next_backend_id;
        let node = self
            .node_mut(candidate.node_id)
            .expect("candidate node exists");
        node.cpu_cores_free -= app.cpu_cores;
        node.mem_free_mib -= app.frontend_mem_mib;
        let dev = node
            .devices
            .iter_mut()
            .find(|d| d.device_id == candidate.device_id)
            .expect("candidate device exists");

        let (backend_id, joined) = match candidate.join_backend {
            Some(id) => {
                let b = dev
                    .backends
                    .iter_mut()
                    .find(|b| b.backend_id == id)
                    .expect("join backend exists");
                b.app_ids.push(app.app_id.clone());
                b.lambda_rps += app.lambda_rps;
                (id, true)
            }
            None => {
                dev.mem_free_mib -= runtime_mib;
                dev.backends.push(Backend {
                    backend_id: next_id,
                    dnn: app.dnn.clone(),
                    shared: app.kind == AppKind::AiaaS,
                    app_ids: vec![app.app_id.clone()],
                    lambda_rps: app.lambda_rps,
                    mem_mib: runtime_mib,
                });
                self.next_backend_id += 1;
                (next_id, false)
            }
        };
        self.apps.push(PlacedApp {
            spec: app.clone(),
            node_id: candidate.node_id,
            device_id: candidate.device_id,
            backend_id,
        });
        (backend_id, joined)
    }

    /// Removes a placed application, freeing its share of node and device
    /// resources. Returns where it lived.
    pub fn remove_app(&mut self, app_id: &str) -> Result<PlacedApp, PlacementError> {
        let idx = self
            .apps
            .iter()
            .position(|a| a.spec.app_id == app_id)
            .ok_or_else(|| PlacementError::UnknownApp(app_id.to_string()))?;
        let placed = self.apps.remove(idx);
        let node = self.node_mut(placed.node_id)?;
        node.cpu_cores_free += placed.spec.cpu_cores;
        node.mem_free_mib += placed.spec.frontend_mem_mib;
        let dev = node
            .devices
            .iter_mut()
            .find(|d| d.device_id == placed.device_id)
            .expect("placed device exists");
        let b_idx = dev
            .backends
            .iter()
            .position(|b| b.backend_id == placed.backend_id)
            .expect("placed backend exists");
        let backend = &mut dev.backends[b_idx];
        backend.app_ids.retain(|id| id != app_id);
        backend.lambda_rps = (backend.lambda_rps - placed.spec.lambda_rps).max(0.0);
        if backend.app_ids.is_empty() {
            dev.mem_free_mib += backend.mem_mib;
            dev.backends.remove(b_idx);
        }
        Ok(placed)
    }

    /// Asserts the placement safety invariant: every placed app's current
    /// predicted end-to-end response stays within its bound. Returns the
    /// first violation.
    pub fn verify_latency_safety(&self, admission: GpuAdmission) -> Result<(), String> {
        for node in &self.nodes {
            for dev in &node.devices {
                let preds = self
                    .current_device_predictions(node.node_id, dev.device_id, admission)
                    .map_err(|e| e.to_string())?;
                for (app_id, ms) in preds {
                    let tau = self
                        .placed_app(&app_id)
                        .map(|p| p.spec.tau_ms)
                        .unwrap_or(f64::INFINITY);
                    if !(ms <= tau) {
                        return Err(format!(
                            "{app_id}: predicted {ms:.3} ms exceeds bound {tau:.3} ms"
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Current utilization of a device.
    pub fn device_rho(&self, node_id: u32, device_id: u32) -> Result<f64, PlacementError> {
        let dev = self.device(node_id, device_id)?;
        if dev.backends.is_empty() {
            return Ok(0.0);
        }
        let (mix, _) = self.device_mix(dev, None)?;
        Ok(mix.utilization(dev.model.parallelism_c))
    }
}
