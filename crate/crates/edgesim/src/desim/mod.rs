//! Deterministic, seeded discrete-event simulation of the edge queueing
//! network: per-app token bucket, per-app CPU stage, shared device stage.
//!
//! The simulator is the ground-truth oracle for the closed-form predictors
//! and the engine behind every end-to-end experiment. Identical
//! `(config, seed)` inputs produce bit-identical reports; a single run is
//! strictly sequential, while independent runs share nothing and may execute
//! concurrently.

mod bucket;
mod engine;
mod event;
mod ps;
mod report;

pub use bucket::TokenBucket;
pub use engine::{simulate, simulate_with_controller, AppMonitorView, ControlAction, Controller};
pub use report::{AppStats, DeviceStats, RequestTrace, SimReport, TimelineEvent, TimelineKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::workload::ArrivalSpec;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("measurable window is empty: horizon {horizon_s} s, warmup {warmup_s} s")]
    ZeroMeasureWindow { horizon_s: f64, warmup_s: f64 },
}

/// How per-request device work is drawn around the configured mean.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceModel {
    /// Every request needs exactly the profiled execution time.
    #[default]
    Deterministic,
    /// Exponentially distributed with the profiled mean.
    Exponential,
}

/// Token-bucket regulator configuration; the rate is the app's declared
/// worst-case rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenBucketCfg {
    pub rate_rps: f64,
    pub burst: f64,
}

/// How a time-shared device maps requests to sharing contexts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingMode {
    /// One context per backend: requests of one backend queue FIFO while
    /// distinct backends time-share. The real device behavior.
    #[default]
    PerContext,
    /// Everything funnels through a single context: pure FCFS.
    SingleContext,
    /// Every request is its own context: converges to processor sharing.
    PerRequest,
}

/// Multiplexing discipline of one device.
#[derive(Clone, Debug, PartialEq)]
pub enum DeviceDiscipline {
    /// Single server, non-preemptive FCFS; a dispatched request pays its
    /// class switch overhead when the previously served request came from a
    /// different context.
    FcfsNonPreemptive,
    /// Round-robin quantum over contexts with work queued; FIFO within a
    /// context.
    TimeShared { quantum_ms: f64, mode: SharingMode },
    /// `lanes` parallel processor-sharing lanes; each request joins one,
    /// picked uniformly at random.
    MultiServerPs { lanes: u32 },
    /// Serves up to `max_batch` queued requests as one logical request of
    /// duration `k1 + k2/b`.
    Batched { max_batch: u32, k1_ms: f64, k2_ms: f64 },
}

#[derive(Clone, Debug)]
pub struct SimDevice {
    pub name: String,
    pub discipline: DeviceDiscipline,
}

/// One application wired into the simulated network.
#[derive(Clone, Debug)]
pub struct SimApp {
    pub app_id: String,
    pub arrival: ArrivalSpec,
    pub bucket: Option<TokenBucketCfg>,
    /// CPU allocation of the frontend container; zero service time skips
    /// the CPU stage.
    pub cpu_cores: f64,
    pub cpu_service_ms: f64,
    pub device: usize,
    /// Sharing context on the device (the backend this app runs in).
    pub ctx: u64,
    pub exec_ms: f64,
    pub switch_ms: f64,
    pub service_model: ServiceModel,
    /// Latency bound for violation accounting; infinite disables it.
    pub tau_ms: f64,
}

/// Monitoring configuration: sliding response window and evaluation cadence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorCfg {
    pub window_s: f64,
    pub cadence_s: f64,
}

impl Default for MonitorCfg {
    fn default() -> Self {
        MonitorCfg {
            window_s: 10.0,
            cadence_s: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub apps: Vec<SimApp>,
    pub devices: Vec<SimDevice>,
    pub horizon_s: f64,
    pub warmup_s: f64,
    pub seed: u64,
    pub monitor: Option<MonitorCfg>,
    /// Collect one trace record per request.
    pub trace: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidScenario(msg));
        if !(self.warmup_s >= 0.0) || !(self.horizon_s > self.warmup_s) {
            return Err(SimError::ZeroMeasureWindow {
                horizon_s: self.horizon_s,
                warmup_s: self.warmup_s,
            });
        }
        if self.devices.is_empty() {
            return bad("no devices".into());
        }
        for (i, d) in self.devices.iter().enumerate() {
            match &d.discipline {
                DeviceDiscipline::TimeShared { quantum_ms, .. } => {
                    if !(*quantum_ms > 0.0) {
                        return bad(format!("device {i}: quantum must be > 0"));
                    }
                }
                DeviceDiscipline::MultiServerPs { lanes } => {
                    if *lanes < 1 {
                        return bad(format!("device {i}: lanes must be >= 1"));
                    }
                }
                DeviceDiscipline::Batched { max_batch, k1_ms, k2_ms } => {
                    if *max_batch < 1 {
                        return bad(format!("device {i}: max_batch must be >= 1"));
                    }
                    if !(*k1_ms > 0.0) || *k2_ms < 0.0 {
                        return bad(format!("device {i}: need k1 > 0 and k2 >= 0"));
                    }
                }
                DeviceDiscipline::FcfsNonPreemptive => {}
            }
        }
        for (i, a) in self.apps.iter().enumerate() {
            if a.device >= self.devices.len() {
                return bad(format!("app {i} ({}): unknown device {}", a.app_id, a.device));
            }
            if !(a.exec_ms > 0.0) {
                return bad(format!("app {i} ({}): exec_ms must be > 0", a.app_id));
            }
            if a.switch_ms < 0.0 || a.cpu_service_ms < 0.0 {
                return bad(format!("app {i} ({}): negative service", a.app_id));
            }
            if a.cpu_service_ms > 0.0 && !(a.cpu_cores > 0.0) {
                return bad(format!("app {i} ({}): cpu stage needs cores > 0", a.app_id));
            }
            if a.arrival.base_rate_rps() < 0.0 {
                return bad(format!("app {i} ({}): negative rate", a.app_id));
            }
            if let Some(b) = &a.bucket {
                if !(b.rate_rps > 0.0) || !(b.burst >= 1.0) {
                    return bad(format!(
                        "app {i} ({}): bucket needs rate > 0 and burst >= 1",
                        a.app_id
                    ));
                }
            }
        }
        let mut ids: Vec<&str> = self.apps.iter().map(|a| a.app_id.as_str()).collect();
        ids.sort_unstable();
        for w in ids.windows(2) {
            if w[0] == w[1] {
                return bad(format!("duplicate app id {}", w[0]));
            }
        }
        Ok(())
    }
}
