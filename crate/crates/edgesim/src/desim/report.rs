//! Simulation output: per-app and per-device statistics plus optional
//! per-request trace and control timeline, with byte-stable CSV emission.

use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimelineKind {
    /// An arrival-rate step activated.
    Spike,
    /// The monitor flagged the app for migration.
    Flag,
    MigrateStart,
    MigrateDone,
}

impl TimelineKind {
    pub fn name(self) -> &'static str {
        match self {
            TimelineKind::Spike => "spike",
            TimelineKind::Flag => "flag",
            TimelineKind::MigrateStart => "migrate_start",
            TimelineKind::MigrateDone => "migrate_done",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TimelineEvent {
    pub t_s: f64,
    pub app_id: String,
    pub kind: TimelineKind,
    pub window_mean_ms: f64,
}

#[derive(Clone, Debug)]
pub struct RequestTrace {
    pub app_id: String,
    pub t_arrival_s: f64,
    pub t_cpu_start_s: f64,
    pub t_dev_start_s: f64,
    pub t_complete_s: f64,
    pub class_switch: bool,
}

#[derive(Clone, Debug)]
pub struct AppStats {
    pub app_id: String,
    /// Total arrivals over the whole horizon.
    pub arrivals: u64,
    /// Total completions over the whole horizon.
    pub completed: u64,
    /// Requests still in the system (bucket, CPU, or device) at the horizon.
    pub in_system_end: u64,
    pub drops: u64,
    /// Completions inside the measured (post-warmup) window; the response
    /// statistics below cover exactly these.
    pub measured: u64,
    pub mean_response_ms: f64,
    pub p50_response_ms: f64,
    pub p99_response_ms: f64,
    /// Mean queueing delay: response minus the request's own service.
    pub mean_wait_ms: f64,
    /// Monitor ticks whose sliding-window mean exceeded the app's bound.
    pub violations: u64,
}

#[derive(Clone, Debug)]
pub struct DeviceStats {
    pub name: String,
    /// Busy capacity fraction over the measured window, in [0, 1].
    pub utilization: f64,
    /// Time-average number of requests at the device (queued + in service).
    pub mean_in_system: f64,
    pub dispatches: u64,
    /// Context switches paid (FCFS devices).
    pub switches: u64,
}

#[derive(Clone, Debug)]
pub struct SimReport {
    pub apps: Vec<AppStats>,
    pub devices: Vec<DeviceStats>,
    pub horizon_s: f64,
    pub warmup_s: f64,
    pub seed: u64,
    pub events_processed: u64,
    pub timeline: Vec<TimelineEvent>,
    pub trace: Vec<RequestTrace>,
}

/// Fixed-width float formatting so identical runs emit identical bytes.
pub(crate) fn fnum(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.6}")
    }
}

impl SimReport {
    pub fn app(&self, app_id: &str) -> Option<&AppStats> {
        self.apps.iter().find(|a| a.app_id == app_id)
    }

    pub fn total_violations(&self) -> u64 {
        self.apps.iter().map(|a| a.violations).sum()
    }

    /// Per-app statistics as CSV.
    pub fn app_csv(&self) -> String {
        let mut out = String::from(
            "app_id,arrivals,completed,in_system_end,drops,measured,\
mean_response_ms,p50_response_ms,p99_response_ms,mean_wait_ms,violations\n",
        );
        for a in &self.apps {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                a.app_id,
                a.arrivals,
                a.completed,
                a.in_system_end,
                a.drops,
                a.measured,
                fnum(a.mean_response_ms),
                fnum(a.p50_response_ms),
                fnum(a.p99_response_ms),
                fnum(a.mean_wait_ms),
                a.violations,
            );
        }
        out
    }

    /// Per-device statistics as CSV.
    pub fn device_csv(&self) -> String {
        let mut out = String::from("device,utilization,mean_in_system,dispatches,switches\n");
        for d in &self.devices {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                d.name,
                fnum(d.utilization),
                fnum(d.mean_in_system),
                d.dispatches,
                d.switches,
            );
        }
        out
    }

    /// Control timeline as CSV (spike/flag/migrate events).
    pub fn timeline_csv(&self) -> String {
        let mut out = String::from("t_s,app_id,event,window_mean_ms\n");
        for e in &self.timeline {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fnum(e.t_s),
                e.app_id,
                e.kind.name(),
                fnum(e.window_mean_ms)
            );
        }
        out
    }

    /// Per-request event trace as CSV.
    pub fn trace_csv(&self) -> String {
        let mut out =
            String::from("app_id,t_arrival,t_cpu_start,t_dev_start,t_complete,class_switch\n");
        for r in &self.trace {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.app_id,
                fnum(r.t_arrival_s),
                fnum(r.t_cpu_start_s),
                fnum(r.t_dev_start_s),
                fnum(r.t_complete_s),
                u8::from(r.class_switch),
            );
        }
        out
    }

    /// Everything in one byte-stable document (used for determinism checks).
    pub fn full_csv(&self) -> String {
        let mut out = format!(
            "# horizon_s={} warmup_s={} seed={} events={}\n",
            fnum(self.horizon_s),
            fnum(self.warmup_s),
            self.seed,
            self.events_processed
        );
        out.push_str(&self.app_csv());
        out.push_str(&self.device_csv());
        out.push_str(&self.timeline_csv());
        out
    }
}
