//! The simulation engine: event loop, stages, disciplines, statistics.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::bucket::TokenBucket;
use super::event::{Ev, EventQueue};
use super::ps::PsLane;
use super::report::{
    AppStats, DeviceStats, RequestTrace, SimReport, TimelineEvent, TimelineKind,
};
use super::{DeviceDiscipline, ServiceModel, SharingMode, SimConfig, SimError};
use crate::analytic::{ms_to_s, s_to_ms};
use crate::rng;
use crate::workload::ArrivalGen;

/// Work remainders below this (seconds) count as finished; keeps quantum
/// arithmetic immune to float drift at large simulation times.
const WORK_EPS: f64 = 1e-9;

/// One request flowing through the network.
#[derive(Debug)]
pub(crate) struct Req {
    pub app: usize,
    pub ctx: u64,
    pub t_arrival: f64,
    pub t_cpu_start: f64,
    pub t_dev_start: f64,
    /// Unit-work multiplier drawn at arrival (1 for deterministic service).
    pub work_u: f64,
    pub lane_cpu: u32,
    pub lane_dev: u32,
    /// CPU service actually consumed, seconds.
    pub cpu_work_s: f64,
    /// Device work requirement, seconds (exec * work_u).
    pub dev_work_s: f64,
    /// Device service actually occupied, seconds (includes switch overhead
    /// or the shared batch duration).
    pub dev_service_s: f64,
    pub switched: bool,
}

/// Piecewise-constant integral accumulator clipped to the measured window.
#[derive(Clone, Copy, Debug, Default)]
struct Acc {
    last: f64,
    value: f64,
    acc: f64,
}

impl Acc {
    fn set(&mut self, now: f64, warmup: f64, horizon: f64, value: f64) {
        let a = self.last.max(warmup);
        let b = now.min(horizon);
        if b > a {
            self.acc += self.value * (b - a);
        }
        self.last = now;
        self.value = value;
    }
}

struct BucketRt {
    bucket: TokenBucket,
    queue: VecDeque<Req>,
    scheduled: bool,
    paused: bool,
    epoch: u64,
}

struct PendingMigration {
    to_device: usize,
    to_ctx: u64,
    new_exec_s: f64,
    new_switch_s: f64,
    new_bucket_rate_rps: f64,
}

struct AppRt {
    app_id: String,
    device: usize,
    ctx: u64,
    exec_s: f64,
    switch_s: f64,
    service_model: ServiceModel,
    tau_ms: f64,
    spec_lambda_rps: f64,
    cpu_service_s: f64,
    arrival_gen: Option<ArrivalGen>,
    svc_rng: ChaCha8Rng,
    bucket: Option<BucketRt>,
    cpu: Vec<PsLane>,
    migration: Option<PendingMigration>,
    last_migrate_done: Option<f64>,
    // stats
    arrivals: u64,
    completed: u64,
    drops: u64,
    responses_ms: Vec<f64>,
    wait_sum_ms: f64,
    violations: u64,
    win_completions: VecDeque<(f64, f64)>,
    win_arrivals: VecDeque<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Slice {
    ctx: u64,
    start: f64,
    end: f64,
}

struct TsState {
    quantum_s: f64,
    mode: SharingMode,
    next_uid: u64,
    queues: BTreeMap<u64, VecDeque<Req>>,
    heads: BTreeMap<u64, f64>,
    ring: Vec<u64>,
    cur: usize,
    slice: Option<Slice>,
    epoch: u64,
}

enum DevKind {
    Fcfs {
        queue: VecDeque<Req>,
        cur: Option<Req>,
        prev_ctx: Option<u64>,
    },
    Ts(TsState),
    Ps {
        lanes: Vec<PsLane>,
    },
    Batch {
        queue: VecDeque<Req>,
        inflight: Vec<Req>,
        max_batch: u32,
        k1_s: f64,
        k2_s: f64,
    },
}

struct DevRt {
    name: String,
    kind: DevKind,
    capacity: f64,
    busy: Acc,
    njobs: Acc,
    dispatches: u64,
    switches: u64,
}

/// Monitor-window view of one application, handed to the controller on
/// every monitoring tick.
#[derive(Clone, Debug)]
pub struct AppMonitorView<'a> {
    pub app: usize,
    pub app_id: &'a str,
    /// Mean response over the sliding window, if any request completed.
    pub window_mean_ms: Option<f64>,
    /// Observed arrival rate over the window (offered, pre-bucket).
    pub observed_lambda_rps: f64,
    /// Declared worst-case rate.
    pub spec_lambda_rps: f64,
    pub tau_ms: f64,
    pub migrating: bool,
    pub last_migrate_done_s: Option<f64>,
    pub drops: u64,
}

/// Actions a controller may request at a monitoring tick.
#[derive(Clone, Debug)]
pub enum ControlAction {
    /// Record a hotspot flag in the timeline.
    Flag { app: usize },
    /// Move an app to another device after `delay_s`: its bucket queues
    /// arrivals in the meantime, requests already admitted drain at the
    /// source, and the bucket re-rates to `new_bucket_rate_rps` on
    /// completion.
    Migrate {
        app: usize,
        to_device: usize,
        to_ctx: u64,
        new_exec_ms: f64,
        new_switch_ms: f64,
        new_bucket_rate_rps: f64,
        delay_s: f64,
    },
}

/// Runtime policy hook driven by the simulation clock.
pub trait Controller {
    fn on_tick(
        &mut self,
        _t_s: f64,
        _views: &[AppMonitorView<'_>],
        _actions: &mut Vec<ControlAction>,
    ) {
    }
}

struct Noop;

impl Controller for Noop {}

/// Runs the scenario to its horizon and reports statistics.
pub fn simulate(cfg: &SimConfig) -> Result<SimReport, SimError> {
    simulate_with_controller(cfg, &mut Noop)
}

/// Like [`simulate`], with a runtime controller observing monitor ticks.
pub fn simulate_with_controller(
    cfg: &SimConfig,
    controller: &mut dyn Controller,
) -> Result<SimReport, SimError> {
    cfg.validate()?;
    Engine::new(cfg).run(controller)
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    heap: EventQueue,
    apps: Vec<AppRt>,
    devices: Vec<DevRt>,
    timeline: Vec<TimelineEvent>,
    trace: Vec<RequestTrace>,
    warmup: f64,
    horizon: f64,
    monitor_on: bool,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a SimConfig) -> Self {
        let apps = cfg
            .apps
            .iter()
            .map(|a| {
                let rate = a.arrival.base_rate_rps();
                let arrival_gen = if rate > 0.0 {
                    Some(ArrivalGen::new(a.arrival, cfg.seed, &a.app_id))
                } else {
                    None
                };
                let cpu_service_s = ms_to_s(a.cpu_service_ms);
                let cpu = if a.cpu_service_ms > 0.0 {
                    let c = a.cpu_cores;
                    let rounded = c.round();
                    if (c - rounded).abs() < 1e-9 && rounded >= 1.0 {
                        (0..rounded as usize).map(|_| PsLane::new(1.0)).collect()
                    } else {
                        vec![PsLane::new(c)]
                    }
                } else {
                    Vec::new()
                };
                AppRt {
                    app_id: a.app_id.clone(),
                    device: a.device,
                    ctx: a.ctx,
                    exec_s: ms_to_s(a.exec_ms),
                    switch_s: ms_to_s(a.switch_ms),
                    service_model: a.service_model,
                    tau_ms: a.tau_ms,
                    spec_lambda_rps: a.bucket.map(|b| b.rate_rps).unwrap_or(rate),
                    cpu_service_s,
                    arrival_gen,
                    svc_rng: rng::stream(cfg.seed, &format!("{}/service", a.app_id)),
                    bucket: a.bucket.map(|b| BucketRt {
                        bucket: TokenBucket::new(b.rate_rps, b.burst),
                        queue: VecDeque::new(),
                        scheduled: false,
                        paused: false,
                        epoch: 0,
                    }),
                    cpu,
                    migration: None,
                    last_migrate_done: None,
                    arrivals: 0,
                    completed: 0,
                    drops: 0,
                    responses_ms: Vec::new(),
                    wait_sum_ms: 0.0,
                    violations: 0,
                    win_completions: VecDeque::new(),
                    win_arrivals: VecDeque::new(),
                }
            })
            .collect();
        let devices = cfg
            .devices
            .iter()
            .map(|d| {
                let (kind, capacity) = match &d.discipline {
                    DeviceDiscipline::FcfsNonPreemptive => (
                        DevKind::Fcfs {
                            queue: VecDeque::new(),
                            cur: None,
                            prev_ctx: None,
                        },
                        1.0,
                    ),
                    DeviceDiscipline::TimeShared { quantum_ms, mode } => (
                        DevKind::Ts(TsState {
                            quantum_s: ms_to_s(*quantum_ms),
                            mode: *mode,
                            next_uid: 0,
                            queues: BTreeMap::new(),
                            heads: BTreeMap::new(),
                            ring: Vec::new(),
                            cur: 0,
                            slice: None,
                            epoch: 0,
                        }),
                        1.0,
                    ),
                    DeviceDiscipline::MultiServerPs { lanes } => (
                        DevKind::Ps {
                            lanes: (0..*lanes).map(|_| PsLane::new(1.0)).collect(),
                        },
                        f64::from(*lanes),
                    ),
                    DeviceDiscipline::Batched { max_batch, k1_ms, k2_ms } => (
                        DevKind::Batch {
                            queue: VecDeque::new(),
                            inflight: Vec::new(),
                            max_batch: *max_batch,
                            k1_s: ms_to_s(*k1_ms),
                            k2_s: ms_to_s(*k2_ms),
                        },
                        1.0,
                    ),
                };
                DevRt {
                    name: d.name.clone(),
                    kind,
                    capacity,
                    busy: Acc::default(),
                    njobs: Acc::default(),
                    dispatches: 0,
                    switches: 0,
                }
            })
            .collect();
        Engine {
            cfg,
            heap: EventQueue::new(),
            apps,
            devices,
            timeline: Vec::new(),
            trace: Vec::new(),
            warmup: cfg.warmup_s,
            horizon: cfg.horizon_s,
            monitor_on: cfg.monitor.is_some(),
        }
    }

    fn run(mut self, controller: &mut dyn Controller) -> Result<SimReport, SimError> {
        for i in 0..self.apps.len() {
            if let Some(gen) = &mut self.apps[i].arrival_gen {
                let t = gen.next();
                self.heap.push(t, Ev::Arrival { app: i });
            }
            if let Some(at_s) = self.cfg.apps[i].arrival.step_at_s() {
                if at_s < self.horizon {
                    self.heap.push(at_s, Ev::StepChange { app: i });
                }
            }
        }
        if let Some(m) = &self.cfg.monitor {
            self.heap.push(m.cadence_s, Ev::MonitorTick);
        }

        while let Some((t, ev)) = self.heap.pop() {
            if t > self.horizon {
                break;
            }
            match ev {
                Ev::Arrival { app } => self.on_arrival(app, t),
                Ev::BucketRelease { app, epoch } => self.on_bucket_release(app, epoch, t),
                Ev::CpuDone { app, lane, epoch } => self.on_cpu_done(app, lane, epoch, t),
                Ev::DevFcfsDone { dev } => self.on_fcfs_done(dev, t),
                Ev::DevQuantum { dev, epoch } => self.on_quantum(dev, epoch, t),
                Ev::DevPsDone { dev, lane, epoch } => self.on_ps_done(dev, lane, epoch, t),
                Ev::DevBatchDone { dev } => self.on_batch_done(dev, t),
                Ev::StepChange { app } => {
                    let mean = self.window_mean(app, t).unwrap_or(0.0);
                    self.timeline.push(TimelineEvent {
                        t_s: t,
                        app_id: self.apps[app].app_id.clone(),
                        kind: TimelineKind::Spike,
                        window_mean_ms: mean,
                    });
                }
                Ev::MonitorTick => self.on_monitor_tick(t, controller),
                Ev::MigrateDone { app } => self.on_migrate_done(app, t),
            }
        }

        Ok(self.finish())
    }

    // ── arrivals and the token bucket ──

    fn on_arrival(&mut self, app_idx: usize, now: f64) {
        let app = &mut self.apps[app_idx];
        app.arrivals += 1;
        if self.monitor_on {
            app.win_arrivals.push_back(now);
        }
        let work_u = match app.service_model {
            ServiceModel::Deterministic => {
                let _ = app.svc_rng.gen::<f64>();
                1.0
            }
            ServiceModel::Exponential => rng::exp_sample(&mut app.svc_rng, 1.0),
        };
        let lane_cpu = app.svc_rng.gen::<u32>();
        let lane_dev = app.svc_rng.gen::<u32>();
        let req = Req {
            app: app_idx,
            ctx: 0,
            t_arrival: now,
            t_cpu_start: -1.0,
            t_dev_start: -1.0,
            work_u,
            lane_cpu,
            lane_dev,
            cpu_work_s: 0.0,
            dev_work_s: 0.0,
            dev_service_s: 0.0,
            switched: false,
        };
        if let Some(gen) = &mut app.arrival_gen {
            let t_next = gen.next();
            self.heap.push(t_next, Ev::Arrival { app: app_idx });
        }

        match &mut app.bucket {
            None => self.enter_stages(req, now),
            Some(b) => {
                if !b.paused && b.queue.is_empty() && b.bucket.try_take(now) {
                    self.enter_stages(req, now);
                } else {
                    b.queue.push_back(req);
                    if !b.paused && !b.scheduled {
                        let t = b.bucket.next_token_time(now);
                        b.scheduled = true;
                        let epoch = b.epoch;
                        self.heap.push(t, Ev::BucketRelease { app: app_idx, epoch });
                    }
                }
            }
        }
    }

    fn on_bucket_release(&mut self, app_idx: usize, epoch: u64, now: f64) {
        let mut released = Vec::new();
        {
            let app = &mut self.apps[app_idx];
            let Some(b) = &mut app.bucket else { return };
            if b.paused || epoch != b.epoch {
                return;
            }
            b.scheduled = false;
            while !b.queue.is_empty() && b.bucket.try_take(now) {
                released.push(b.queue.pop_front().expect("nonempty"));
            }
            if !b.queue.is_empty() {
                let t = b.bucket.next_token_time(now);
                b.scheduled = true;
                let epoch = b.epoch;
                self.heap.push(t, Ev::BucketRelease { app: app_idx, epoch });
            }
        }
        for req in released {
            self.enter_stages(req, now);
        }
    }

    // ── CPU stage ──

    fn enter_stages(&mut self, mut req: Req, now: f64) {
        let app = &mut self.apps[req.app];
        req.t_cpu_start = now;
        if app.cpu.is_empty() {
            self.device_enqueue(req, now);
            return;
        }
        let lane_idx = req.lane_cpu as usize % app.cpu.len();
        req.cpu_work_s = app.cpu_service_s;
        let work = app.cpu_service_s;
        app.cpu[lane_idx].push(now, req, work);
        self.resched_cpu(req_app(app), lane_idx, now);
    }

    fn resched_cpu(&mut self, app_idx: usize, lane_idx: usize, now: f64) {
        let lane = &mut self.apps[app_idx].cpu[lane_idx];
        lane.advance(now);
        lane.epoch += 1;
        if let Some(t) = lane.next_completion() {
            let epoch = lane.epoch;
            self.heap.push(
                t,
                Ev::CpuDone {
                    app: app_idx,
                    lane: lane_idx,
                    epoch,
                },
            );
        }
    }

    fn on_cpu_done(&mut self, app_idx: usize, lane_idx: usize, epoch: u64, now: f64) {
        let job = {
            let lane = &mut self.apps[app_idx].cpu[lane_idx];
            if lane.epoch != epoch {
                return;
            }
            lane.pop_min(now)
        };
        let Some(job) = job else { return };
        self.resched_cpu(app_idx, lane_idx, now);
        self.device_enqueue(job.req, now);
    }

    // ── device stage ──

    fn device_enqueue(&mut self, mut req: Req, now: f64) {
        let app = &self.apps[req.app];
        req.ctx = app.ctx;
        req.dev_work_s = app.exec_s * req.work_u;
        let dev_idx = app.device;
        let dev = &mut self.devices[dev_idx];
        dev.njobs
            .set(now, self.warmup, self.horizon, dev.njobs.value + 1.0);
        match &mut dev.kind {
            DevKind::Fcfs { queue, cur, .. } => {
                queue.push_back(req);
                if cur.is_none() {
                    self.dispatch_fcfs(dev_idx, now);
                }
            }
            DevKind::Ts(_) => self.ts_enqueue(dev_idx, req, now),
            DevKind::Ps { lanes } => {
                let lane_idx = req.lane_dev as usize % lanes.len();
                req.t_dev_start = now;
                req.dev_service_s = req.dev_work_s;
                let work = req.dev_work_s;
                lanes[lane_idx].push(now, req, work);
                dev.dispatches += 1;
                self.resched_ps(dev_idx, lane_idx, now);
                self.update_ps_busy(dev_idx, now);
            }
            DevKind::Batch { queue, inflight, .. } => {
                queue.push_back(req);
                if inflight.is_empty() {
                    self.dispatch_batch(dev_idx, now);
                }
            }
        }
    }

    fn dispatch_fcfs(&mut self, dev_idx: usize, now: f64) {
        let switch_of = |apps: &[AppRt], idx: usize| apps[idx].switch_s;
        let dev = &mut self.devices[dev_idx];
        let DevKind::Fcfs { queue, cur, prev_ctx } = &mut dev.kind else {
            return;
        };
        debug_assert!(cur.is_none());
        let Some(mut req) = queue.pop_front() else {
            dev.busy.set(now, self.warmup, self.horizon, 0.0);
            return;
        };
        let switched = matches!(prev_ctx, Some(p) if *p != req.ctx);
        let service = req.dev_work_s
            + if switched {
                switch_of(&self.apps, req.app)
            } else {
                0.0
            };
        req.switched = switched;
        req.t_dev_start = now;
        req.dev_service_s = service;
        *prev_ctx = Some(req.ctx);
        *cur = Some(req);
        dev.dispatches += 1;
        if switched {
            dev.switches += 1;
        }
        dev.busy.set(now, self.warmup, self.horizon, 1.0);
        self.heap.push(now + service, Ev::DevFcfsDone { dev: dev_idx });
    }

    fn on_fcfs_done(&mut self, dev_idx: usize, now: f64) {
        let req = {
            let dev = &mut self.devices[dev_idx];
            let DevKind::Fcfs { cur, .. } = &mut dev.kind else {
                return;
            };
            let req = cur.take().expect("a request is in service");
            dev.njobs
                .set(now, self.warmup, self.horizon, dev.njobs.value - 1.0);
            req
        };
        self.dispatch_fcfs(dev_idx, now);
        self.complete(req, now);
    }

    fn resched_ps(&mut self, dev_idx: usize, lane_idx: usize, now: f64) {
        let dev = &mut self.devices[dev_idx];
        let DevKind::Ps { lanes } = &mut dev.kind else {
            return;
        };
        let lane = &mut lanes[lane_idx];
        lane.advance(now);
        lane.epoch += 1;
        if let Some(t) = lane.next_completion() {
            let epoch = lane.epoch;
            self.heap.push(
                t,
                Ev::DevPsDone {
                    dev: dev_idx,
                    lane: lane_idx,
                    epoch,
                },
            );
        }
    }

    fn update_ps_busy(&mut self, dev_idx: usize, now: f64) {
        let dev = &mut self.devices[dev_idx];
        let DevKind::Ps { lanes } = &dev.kind else {
            return;
        };
        let busy = lanes.iter().filter(|l| !l.is_empty()).count() as f64;
        dev.busy.set(now, self.warmup, self.horizon, busy);
    }

    fn on_ps_done(&mut self, dev_idx: usize, lane_idx: usize, epoch: u64, now: f64) {
        let job = {
            let dev = &mut self.devices[dev_idx];
            let DevKind::Ps { lanes } = &mut dev.kind else {
                return;
            };
            let lane = &mut lanes[lane_idx];
            if lane.epoch != epoch {
                return;
            }
            lane.pop_min(now)
        };
        let Some(job) = job else { return };
        {
            let dev = &mut self.devices[dev_idx];
            dev.njobs
                .set(now, self.warmup, self.horizon, dev.njobs.value - 1.0);
        }
        self.resched_ps(dev_idx, lane_idx, now);
        self.update_ps_busy(dev_idx, now);
        self.complete(job.req, now);
    }

    fn dispatch_batch(&mut self, dev_idx: usize, now: f64) {
        let dev = &mut self.devices[dev_idx];
        let DevKind::Batch { queue, inflight, max_batch, k1_s, k2_s } = &mut dev.kind else {
            return;
        };
        debug_assert!(inflight.is_empty());
        if queue.is_empty() {
            dev.busy.set(now, self.warmup, self.horizon, 0.0);
            return;
        }
        let b = queue.len().min(*max_batch as usize);
        let service = *k1_s + *k2_s / b as f64;
        for _ in 0..b {
            let mut req = queue.pop_front().expect("nonempty");
            req.t_dev_start = now;
            req.dev_service_s = service;
            inflight.push(req);
        }
        dev.dispatches += b as u64;
        dev.busy.set(now, self.warmup, self.horizon, 1.0);
        self.heap.push(now + service, Ev::DevBatchDone { dev: dev_idx });
    }

    fn on_batch_done(&mut self, dev_idx: usize, now: f64) {
        let batch = {
            let dev = &mut self.devices[dev_idx];
            let DevKind::Batch { inflight, .. } = &mut dev.kind else {
                return;
            };
            let batch: Vec<Req> = inflight.drain(..).collect();
            dev.njobs.set(
                now,
                self.warmup,
                self.horizon,
                dev.njobs.value - batch.len() as f64,
            );
            batch
        };
        self.dispatch_batch(dev_idx, now);
        for req in batch {
            self.complete(req, now);
        }
    }

    // ── time-shared device ──

    fn ts_enqueue(&mut self, dev_idx: usize, req: Req, now: f64) {
        let activated_second;
        {
            let dev = &mut self.devices[dev_idx];
            let DevKind::Ts(ts) = &mut dev.kind else { return };
            let ctx = match ts.mode {
                SharingMode::PerContext => req.ctx,
                SharingMode::SingleContext => 0,
                SharingMode::PerRequest => {
                    ts.next_uid += 1;
                    ts.next_uid
                }
            };
            let work = req.dev_work_s;
            let q = ts.queues.entry(ctx).or_default();
            q.push_back(req);
            let activated = q.len() == 1;
            if activated {
                ts.heads.insert(ctx, work);
                ts.ring.push(ctx);
            }
            activated_second = activated && ts.ring.len() == 2 && ts.slice.is_some();
            if ts.slice.is_none() {
                self.ts_start_slice(dev_idx, now);
                return;
            }
        }
        if activated_second {
            self.ts_truncate_slice(dev_idx, now);
        }
    }

    fn ts_start_slice(&mut self, dev_idx: usize, now: f64) {
        let dev = &mut self.devices[dev_idx];
        let DevKind::Ts(ts) = &mut dev.kind else { return };
        if ts.ring.is_empty() {
            ts.slice = None;
            dev.busy.set(now, self.warmup, self.horizon, 0.0);
            return;
        }
        if ts.cur >= ts.ring.len() {
            ts.cur = 0;
        }
        let ctx = ts.ring[ts.cur];
        let rem = ts.heads[&ctx];
        let len = if ts.ring.len() == 1 {
            rem
        } else {
            rem.min(ts.quantum_s)
        };
        let end = now + len.max(0.0);
        ts.slice = Some(Slice { ctx, start: now, end });
        ts.epoch += 1;
        let epoch = ts.epoch;
        // Head request starts receiving service now.
        if let Some(head) = ts.queues.get_mut(&ctx).and_then(|q| q.front_mut()) {
            if head.t_dev_start < 0.0 {
                head.t_dev_start = now;
            }
        }
        dev.busy.set(now, self.warmup, self.horizon, 1.0);
        self.heap.push(end, Ev::DevQuantum { dev: dev_idx, epoch });
    }

    fn ts_truncate_slice(&mut self, dev_idx: usize, now: f64) {
        let dev = &mut self.devices[dev_idx];
        let DevKind::Ts(ts) = &mut dev.kind else { return };
        let Some(s) = &mut ts.slice else { return };
        // A second context became active during a run-to-completion slice:
        // cut the slice back to one quantum (or to now if already overdue).
        let new_end = s.end.min((s.start + ts.quantum_s).max(now));
        if new_end < s.end {
            s.end = new_end;
            ts.epoch += 1;
            let epoch = ts.epoch;
            self.heap.push(new_end, Ev::DevQuantum { dev: dev_idx, epoch });
        }
    }

    fn on_quantum(&mut self, dev_idx: usize, epoch: u64, now: f64) {
        let completed = {
            let dev = &mut self.devices[dev_idx];
            let DevKind::Ts(ts) = &mut dev.kind else { return };
            if epoch != ts.epoch {
                return;
            }
            let s = ts.slice.take().expect("active slice");
            let served = now - s.start;
            let rem = ts.heads.get_mut(&s.ctx).expect("active head");
            *rem -= served;
            let mut completed = None;
            if *rem <= WORK_EPS {
                let q = ts.queues.get_mut(&s.ctx).expect("active queue");
                let mut req = q.pop_front().expect("head exists");
                req.dev_service_s = req.dev_work_s;
                completed = Some(req);
                let idx = ts
                    .ring
                    .iter()
                    .position(|c| *c == s.ctx)
                    .expect("ctx in ring");
                debug_assert_eq!(idx, ts.cur);
                if q.is_empty() {
                    ts.queues.remove(&s.ctx);
                    ts.heads.remove(&s.ctx);
                    ts.ring.remove(idx);
                    // cur now indexes the successor (or wraps in start).
                } else {
                    let next_work = q.front().expect("nonempty").dev_work_s;
                    ts.heads.insert(s.ctx, next_work);
                    ts.cur = (idx + 1) % ts.ring.len();
                }
            } else {
                ts.cur = (ts.cur + 1) % ts.ring.len();
            }
            completed
        };
        if completed.is_some() {
            let dev = &mut self.devices[dev_idx];
            dev.njobs
                .set(now, self.warmup, self.horizon, dev.njobs.value - 1.0);
            dev.dispatches += 1;
        }
        self.ts_start_slice(dev_idx, now);
        if let Some(req) = completed {
            self.complete(req, now);
        }
    }

    // ── completion and monitoring ──

    fn complete(&mut self, req: Req, now: f64) {
        let response_s = now - req.t_arrival;
        let app = &mut self.apps[req.app];
        app.completed += 1;
        let response_ms = s_to_ms(response_s);
        if now >= self.warmup {
            app.responses_ms.push(response_ms);
            app.wait_sum_ms += s_to_ms(response_s - req.cpu_work_s - req.dev_service_s);
        }
        if self.monitor_on {
            app.win_completions.push_back((now, response_ms));
        }
        if self.cfg.trace {
            self.trace.push(RequestTrace {
                app_id: self.apps[req.app].app_id.clone(),
                t_arrival_s: req.t_arrival,
                t_cpu_start_s: req.t_cpu_start,
                t_dev_start_s: req.t_dev_start,
                t_complete_s: now,
                class_switch: req.switched,
            });
        }
    }

    fn window_mean(&self, app_idx: usize, now: f64) -> Option<f64> {
        let window_s = self.cfg.monitor.map(|m| m.window_s)?;
        let app = &self.apps[app_idx];
        let cutoff = now - window_s;
        let mut sum = 0.0;
        let mut n = 0u64;
        for (t, r) in app.win_completions.iter().rev() {
            if *t < cutoff {
                break;
            }
            sum += r;
            n += 1;
        }
        if n > 0 {
            Some(sum / n as f64)
        } else {
            None
        }
    }

    fn on_monitor_tick(&mut self, now: f64, controller: &mut dyn Controller) {
        let m = self.cfg.monitor.expect("monitor configured");
        let cutoff = now - m.window_s;
        for app in &mut self.apps {
            while app
                .win_completions
                .front()
                .is_some_and(|(t, _)| *t < cutoff)
            {
                app.win_completions.pop_front();
            }
            while app.win_arrivals.front().is_some_and(|t| *t < cutoff) {
                app.win_arrivals.pop_front();
            }
        }

        let mut means = Vec::with_capacity(self.apps.len());
        for i in 0..self.apps.len() {
            means.push(self.window_mean(i, now));
            let app = &mut self.apps[i];
            if now > self.warmup {
                if let Some(mean) = means[i] {
                    if mean > app.tau_ms {
                        app.violations += 1;
                    }
                }
            }
        }

        let views: Vec<AppMonitorView<'_>> = self
            .apps
            .iter()
            .enumerate()
            .map(|(i, a)| AppMonitorView {
                app: i,
                app_id: &a.app_id,
                window_mean_ms: means[i],
                observed_lambda_rps: a.win_arrivals.len() as f64 / m.window_s,
                spec_lambda_rps: a.spec_lambda_rps,
                tau_ms: a.tau_ms,
                migrating: a.migration.is_some(),
                last_migrate_done_s: a.last_migrate_done,
                drops: a.drops,
            })
            .collect();
        let mut actions = Vec::new();
        controller.on_tick(now, &views, &mut actions);
        drop(views);

        for action in actions {
            match action {
                ControlAction::Flag { app } => {
                    let mean = means.get(app).copied().flatten().unwrap_or(0.0);
                    self.timeline.push(TimelineEvent {
                        t_s: now,
                        app_id: self.apps[app].app_id.clone(),
                        kind: TimelineKind::Flag,
                        window_mean_ms: mean,
                    });
                }
                ControlAction::Migrate {
                    app,
                    to_device,
                    to_ctx,
                    new_exec_ms,
                    new_switch_ms,
                    new_bucket_rate_rps,
                    delay_s,
                } => {
                    if self.apps[app].migration.is_some() || to_device >= self.devices.len() {
                        continue;
                    }
                    let mean = means.get(app).copied().flatten().unwrap_or(0.0);
                    {
                        let a = &mut self.apps[app];
                        a.migration = Some(PendingMigration {
                            to_device,
                            to_ctx,
                            new_exec_s: ms_to_s(new_exec_ms),
                            new_switch_s: ms_to_s(new_switch_ms),
                            new_bucket_rate_rps,
                        });
                        if let Some(b) = &mut a.bucket {
                            b.paused = true;
                            b.epoch += 1;
                            b.scheduled = false;
                        }
                    }
                    self.timeline.push(TimelineEvent {
                        t_s: now,
                        app_id: self.apps[app].app_id.clone(),
                        kind: TimelineKind::MigrateStart,
                        window_mean_ms: mean,
                    });
                    self.heap.push(now + delay_s, Ev::MigrateDone { app });
                }
            }
        }

        let next = now + m.cadence_s;
        if next <= self.horizon {
            self.heap.push(next, Ev::MonitorTick);
        }
    }

    fn on_migrate_done(&mut self, app_idx: usize, now: f64) {
        let mean = self.window_mean(app_idx, now).unwrap_or(0.0);
        let app = &mut self.apps[app_idx];
        let Some(m) = app.migration.take() else { return };
        app.device = m.to_device;
        app.ctx = m.to_ctx;
        app.exec_s = m.new_exec_s;
        app.switch_s = m.new_switch_s;
        app.spec_lambda_rps = m.new_bucket_rate_rps;
        app.last_migrate_done = Some(now);
        if let Some(b) = &mut app.bucket {
            b.bucket.set_rate(now, m.new_bucket_rate_rps);
            b.paused = false;
            if !b.queue.is_empty() {
                let t = b.bucket.next_token_time(now);
                b.scheduled = true;
                let epoch = b.epoch;
                self.heap.push(t, Ev::BucketRelease { app: app_idx, epoch });
            }
        }
        self.timeline.push(TimelineEvent {
            t_s: now,
            app_id: self.apps[app_idx].app_id.clone(),
            kind: TimelineKind::MigrateDone,
            window_mean_ms: mean,
        });
    }

    // ── wrap-up ──

    fn in_flight_by_app(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.apps.len()];
        for app in &self.apps {
            if let Some(b) = &app.bucket {
                for r in &b.queue {
                    counts[r.app] += 1;
                }
            }
            for lane in &app.cpu {
                for j in &lane.jobs {
                    counts[j.req.app] += 1;
                }
            }
        }
        for dev in &self.devices {
            match &dev.kind {
                DevKind::Fcfs { queue, cur, .. } => {
                    for r in queue {
                        counts[r.app] += 1;
                    }
                    if let Some(r) = cur {
                        counts[r.app] += 1;
                    }
                }
                DevKind::Ts(ts) => {
                    for q in ts.queues.values() {
                        for r in q {
                            counts[r.app] += 1;
                        }
                    }
                }
                DevKind::Ps { lanes } => {
                    for lane in lanes {
                        for j in &lane.jobs {
                            counts[j.req.app] += 1;
                        }
                    }
                }
                DevKind::Batch { queue, inflight, .. } => {
                    for r in queue.iter().chain(inflight.iter()) {
                        counts[r.app] += 1;
                    }
                }
            }
        }
        counts
    }

    fn finish(mut self) -> SimReport {
        let horizon = self.horizon;
        let warmup = self.warmup;
        let window = horizon - warmup;
        let in_flight = self.in_flight_by_app();

        let mut apps = Vec::with_capacity(self.apps.len());
        for (i, app) in self.apps.iter_mut().enumerate() {
            // arrivals = completions + in flight + dropped, always.
            debug_assert_eq!(
                app.arrivals,
                app.completed + in_flight[i] + app.drops,
                "conservation for {}",
                app.app_id
            );
            app.responses_ms.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let n = app.responses_ms.len();
            let pct = |p: f64| -> f64 {
                if n == 0 {
                    return 0.0;
                }
                let idx = ((n as f64 - 1.0) * p).round() as usize;
                app.responses_ms[idx.min(n - 1)]
            };
            let mean = if n > 0 {
                app.responses_ms.iter().sum::<f64>() / n as f64
            } else {
                0.0
            };
            apps.push(AppStats {
                app_id: app.app_id.clone(),
                arrivals: app.arrivals,
                completed: app.completed,
                in_system_end: in_flight[i],
                drops: app.drops,
                measured: n as u64,
                mean_response_ms: mean,
                p50_response_ms: pct(0.5),
                p99_response_ms: pct(0.99),
                mean_wait_ms: if n > 0 { app.wait_sum_ms / n as f64 } else { 0.0 },
                violations: app.violations,
            });
        }

        let devices = self
            .devices
            .iter_mut()
            .map(|d| {
                d.busy.set(horizon, warmup, horizon, d.busy.value);
                d.njobs.set(horizon, warmup, horizon, d.njobs.value);
                DeviceStats {
                    name: d.name.clone(),
                    utilization: d.busy.acc / (d.capacity * window),
                    mean_in_system: d.njobs.acc / window,
                    dispatches: d.dispatches,
                    switches: d.switches,
                }
            })
            .collect();

        SimReport {
            apps,
            devices,
            horizon_s: horizon,
            warmup_s: warmup,
            seed: self.cfg.seed,
            events_processed: self.heap.processed(),
            timeline: self.timeline,
            trace: self.trace,
        }
    }
}

/// Index of the app a runtime record belongs to (identity helper used to
/// route around borrow splits).
fn req_app(app: &AppRt) -> usize {
    app.cpu
        .first()
        .and_then(|l| l.jobs.last())
        .map(|j| j.req.app)
        .unwrap_or(usize::MAX)
}
