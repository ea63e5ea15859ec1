//! Application trace generation and per-request arrival processes.
//!
//! Traces follow the measured cloud-trace mix: small/medium/large model
//! categories in 47/33/20 proportions, models chosen evenly within a
//! category. Every draw comes from a per-app seed-derived stream, so
//! removing one app from a spec leaves every other app's draws unchanged.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::placement::{AppKind, ApplicationSpec};
use crate::profiles::{ModelScale, ProfileTable};
use crate::rng;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("proportions must sum to 1 (got {0})")]
    BadProportions(f64),
    #[error("category {0:?} has nonzero proportion but no profiles")]
    EmptyCategory(ModelScale),
    #[error("invalid range for {field}: [{lo}, {hi}]")]
    BadRange { field: &'static str, lo: f64, hi: f64 },
    #[error("trace line {line}: {msg}")]
    TraceParse { line: usize, msg: String },
}

/// Per-category draw ranges. `tau_exec_mult` scales the model's fastest
/// standalone execution time, which keeps every bound achievable.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryRanges {
    pub rate_rps: (f64, f64),
    pub tau_exec_mult: (f64, f64),
}

impl Default for CategoryRanges {
    fn default() -> Self {
        CategoryRanges {
            rate_rps: (1.0, 20.0),
            tau_exec_mult: (3.0, 10.0),
        }
    }
}

/// Specification of a random application arrival trace.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    pub n_apps: usize,
    /// (small, medium, large) fractions; must sum to 1.
    pub proportions: [f64; 3],
    #[serde(default)]
    pub small: CategoryRanges,
    #[serde(default)]
    pub medium: CategoryRanges,
    #[serde(default)]
    pub large: CategoryRanges,
    /// Fraction of apps that pick a provider-hosted model (groupable).
    pub aiaas_fraction: f64,
    #[serde(default = "default_cpu_cores")]
    pub cpu_cores: f64,
    #[serde(default = "default_cpu_service_ms")]
    pub cpu_service_ms: f64,
    #[serde(default = "default_frontend_mem")]
    pub frontend_mem_mib: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_cpu_cores() -> f64 {
    1.0
}

fn default_cpu_service_ms() -> f64 {
    2.0
}

fn default_frontend_mem() -> f64 {
    100.0
}

impl Default for TraceSpec {
    fn default() -> Self {
        TraceSpec {
            n_apps: 10,
            proportions: [0.47, 0.33, 0.20],
            small: CategoryRanges::default(),
            medium: CategoryRanges::default(),
            large: CategoryRanges::default(),
            aiaas_fraction: 0.5,
            cpu_cores: default_cpu_cores(),
            cpu_service_ms: default_cpu_service_ms(),
            frontend_mem_mib: default_frontend_mem(),
            seed: 0,
        }
    }
}

impl TraceSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let sum: f64 = self.proportions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(WorkloadError::BadProportions(sum));
        }
        for (ranges, _) in self.categories() {
            let (lo, hi) = ranges.rate_rps;
            if !(lo > 0.0 && hi >= lo) {
                return Err(WorkloadError::BadRange { field: "rate_rps", lo, hi });
            }
            let (lo, hi) = ranges.tau_exec_mult;
            if !(lo > 1.0 && hi >= lo) {
                return Err(WorkloadError::BadRange { field: "tau_exec_mult", lo, hi });
            }
        }
        if !(0.0..=1.0).contains(&self.aiaas_fraction) {
            return Err(WorkloadError::BadRange {
                field: "aiaas_fraction",
                lo: self.aiaas_fraction,
                hi: self.aiaas_fraction,
            });
        }
        Ok(())
    }

    fn categories(&self) -> [(CategoryRanges, ModelScale); 3] {
        [
            (self.small, ModelScale::Small),
            (self.medium, ModelScale::Medium),
            (self.large, ModelScale::Large),
        ]
    }
}

/// Generates the application trace for `spec`, deterministically per seed.
pub fn gen_app_trace(
    spec: &TraceSpec,
    profiles: &ProfileTable,
) -> Result<Vec<ApplicationSpec>, WorkloadError> {
    spec.validate()?;
    let per_category: Vec<(ModelScale, Vec<&crate::profiles::DnnProfile>)> = [
        ModelScale::Small,
        ModelScale::Medium,
        ModelScale::Large,
    ]
    .into_iter()
    .map(|s| (s, profiles.names_with_scale(s)))
    .collect();
    for (i, (scale, models)) in per_category.iter().enumerate() {
        if spec.proportions[i] > 0.0 && models.is_empty() {
            return Err(WorkloadError::EmptyCategory(*scale));
        }
    }

    let mut apps = Vec::with_capacity(spec.n_apps);
    for i in 0..spec.n_apps {
        let mut rng = rng::substream(spec.seed, "trace-app", i as u64);
        let u: f64 = rng.gen();
        let cat = if u < spec.proportions[0] {
            0
        } else if u < spec.proportions[0] + spec.proportions[1] {
            1
        } else {
            2
        };
        let (ranges, _) = spec.categories()[cat];
        let models = &per_category[cat].1;
        let model = models[rng.gen_range(0..models.len())];
        let lambda = rng::uniform(&mut rng, ranges.rate_rps.0, ranges.rate_rps.1);
        let mult = rng::uniform(&mut rng, ranges.tau_exec_mult.0, ranges.tau_exec_mult.1);
        let tau_ms = mult * model.min_exec_ms();
        let kind = if rng.gen::<f64>() < spec.aiaas_fraction {
            AppKind::AiaaS
        } else {
            AppKind::UserTrained
        };
        apps.push(ApplicationSpec {
            app_id: format!("app-{i:04}"),
            dnn: model.name.clone(),
            lambda_rps: lambda,
            tau_ms,
            kind,
            cpu_cores: spec.cpu_cores,
            cpu_service_ms: spec.cpu_service_ms,
            frontend_mem_mib: spec.frontend_mem_mib,
        });
    }
    Ok(apps)
}

/// Arrival process of one application.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ArrivalSpec {
    /// Exponential inter-arrivals at `rate_rps`.
    Poisson { rate_rps: f64 },
    /// Fixed inter-arrivals at `rate_rps`; the first arrival falls at a
    /// seeded phase inside the first period so co-located apps do not all
    /// fire in lockstep.
    Deterministic { rate_rps: f64 },
    /// Rate multiplied by `factor` from `at_s` on.
    Step {
        rate_rps: f64,
        factor: f64,
        at_s: f64,
        poisson: bool,
    },
}

impl ArrivalSpec {
    pub fn base_rate_rps(&self) -> f64 {
        match *self {
            ArrivalSpec::Poisson { rate_rps }
            | ArrivalSpec::Deterministic { rate_rps }
            | ArrivalSpec::Step { rate_rps, .. } => rate_rps,
        }
    }

    pub fn step_at_s(&self) -> Option<f64> {
        match *self {
            ArrivalSpec::Step { at_s, .. } => Some(at_s),
            _ => None,
        }
    }
}

/// Seeded generator of one application's arrival instants.
#[derive(Clone, Debug)]
pub struct ArrivalGen {
    spec: ArrivalSpec,
    rng: rand_chacha::ChaCha8Rng,
    next_t: f64,
}

impl ArrivalGen {
    pub fn new(spec: ArrivalSpec, seed: u64, app_id: &str) -> Self {
        let mut rng = rng::stream(seed, app_id);
        let next_t = match spec {
            ArrivalSpec::Poisson { rate_rps } => rng::exp_sample(&mut rng, rate_rps),
            ArrivalSpec::Deterministic { rate_rps } => rng.gen::<f64>() / rate_rps,
            ArrivalSpec::Step { rate_rps, poisson, .. } => {
                if poisson {
                    rng::exp_sample(&mut rng, rate_rps)
                } else {
                    rng.gen::<f64>() / rate_rps
                }
            }
        };
        ArrivalGen { spec, rng, next_t }
    }

    fn rate_at(&self, t: f64) -> f64 {
        match self.spec {
            ArrivalSpec::Poisson { rate_rps } | ArrivalSpec::Deterministic { rate_rps } => rate_rps,
            ArrivalSpec::Step { rate_rps, factor, at_s, .. } => {
                if t >= at_s {
                    rate_rps * factor
                } else {
                    rate_rps
                }
            }
        }
    }

    fn poisson_like(&self) -> bool {
        match self.spec {
            ArrivalSpec::Poisson { .. } => true,
            ArrivalSpec::Deterministic { .. } => false,
            ArrivalSpec::Step { poisson, .. } => poisson,
        }
    }

    /// Next arrival instant. Draws one inter-arrival per call; a rate step
    /// between the previous and the candidate arrival restarts the draw at
    /// the boundary (exact for Poisson by memorylessness).
    pub fn next(&mut self) -> f64 {
        let t = self.next_t;
        let mut from = t;
        loop {
            let rate = self.rate_at(from);
            let gap = if self.poisson_like() {
                rng::exp_sample(&mut self.rng, rate)
            } else {
                1.0 / rate
            };
            let candidate = from + gap;
            if let Some(at_s) = self.spec.step_at_s() {
                if from < at_s && candidate > at_s {
                    from = at_s;
                    continue;
                }
            }
            self.next_t = candidate;
            break;
        }
        t
    }

    /// All arrivals strictly before `horizon_s`.
    pub fn take_until(mut self, horizon_s: f64) -> Vec<f64> {
        let mut out = Vec::new();
        loop {
            let t = self.next();
            if t >= horizon_s {
                return out;
            }
            out.push(t);
        }
    }
}

/// Trace file schema: one row per application arrival.
const TRACE_HEADER: &str =
    "seq,app_id,dnn,kind,lambda_rps,tau_ms,cpu_cores,cpu_service_ms,frontend_mib";

pub fn write_trace_csv(apps: &[ApplicationSpec]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for (i, a) in apps.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            i,
            a.app_id,
            a.dnn,
            a.kind.name(),
            a.lambda_rps,
            a.tau_ms,
            a.cpu_cores,
            a.cpu_service_ms,
            a.frontend_mem_mib,
        ));
    }
    out
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<ApplicationSpec>, WorkloadError> {
    let mut apps = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            if line != TRACE_HEADER {
                return Err(WorkloadError::TraceParse {
                    line: line_no,
                    msg: format!("expected header `{TRACE_HEADER}`"),
                });
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 9 {
            return Err(WorkloadError::TraceParse {
                line: line_no,
                msg: format!("expected 9 fields, got {}", f.len()),
            });
        }
        let num = |s: &str, what: &str| -> Result<f64, WorkloadError> {
            s.parse::<f64>().map_err(|_| WorkloadError::TraceParse {
                line: line_no,
                msg: format!("{what}: `{s}` is not a number"),
            })
        };
        let kind = match f[3] {
            "aiaas" => AppKind::AiaaS,
            "user_trained" => AppKind::UserTrained,
            other => {
                return Err(WorkloadError::TraceParse {
                    line: line_no,
                    msg: format!("unknown kind `{other}`"),
                })
            }
        };
        apps.push(ApplicationSpec {
            app_id: f[1].to_string(),
            dnn: f[2].to_string(),
            kind,
            lambda_rps: num(f[4], "lambda_rps")?,
            tau_ms: num(f[5], "tau_ms")?,
            cpu_cores: num(f[6], "cpu_cores")?,
            cpu_service_ms: num(f[7], "cpu_service_ms")?,
            frontend_mem_mib: num(f[8], "frontend_mib")?,
        });
    }
    if !seen_header {
        return Err(WorkloadError::TraceParse {
            line: 1,
            msg: "missing header row".into(),
        });
    }
    Ok(apps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{bundled_profiles, ProfileTable};

    fn table() -> ProfileTable {
        ProfileTable::from_profiles(bundled_profiles())
    }

    #[test]
    fn category_counts_match_proportions() {
        let spec = TraceSpec {
            n_apps: 10_000,
            seed: 17,
            ..TraceSpec::default()
        };
        let apps = gen_app_trace(&spec, &table()).unwrap();
        let t = table();
        let mut counts = [0usize; 3];
        for a in &apps {
            let scale = t.get(&a.dnn).unwrap().scale;
            counts[match scale {
                ModelScale::Small => 0,
                ModelScale::Medium => 1,
                ModelScale::Large => 2,
            }] += 1;
        }
        // 3 sigma binomial around (4700, 3300, 2000).
        for (count, p) in counts.iter().zip([0.47f64, 0.33, 0.20]) {
            let mean = 10_000.0 * p;
            let sigma = (10_000.0 * p * (1.0 - p)).sqrt();
            assert!(
                (*count as f64 - mean).abs() < 3.0 * sigma,
                "count {count} vs mean {mean}"
            );
        }
    }

    #[test]
    fn degenerate_proportions_pin_category() {
        let spec = TraceSpec {
            n_apps: 200,
            proportions: [1.0, 0.0, 0.0],
            seed: 3,
            ..TraceSpec::default()
        };
        let apps = gen_app_trace(&spec, &table()).unwrap();
        let t = table();
        assert!(apps
            .iter()
            .all(|a| t.get(&a.dnn).unwrap().scale == ModelScale::Small));
    }

    #[test]
    fn trace_generation_is_deterministic_and_per_app_independent() {
        let spec = TraceSpec {
            n_apps: 50,
            seed: 99,
            ..TraceSpec::default()
        };
        let a = gen_app_trace(&spec, &table()).unwrap();
        let b = gen_app_trace(&spec, &table()).unwrap();
        assert_eq!(a, b);
        // Shrinking the spec leaves the common prefix untouched.
        let shorter = gen_app_trace(
            &TraceSpec { n_apps: 30, ..spec },
            &table(),
        )
        .unwrap();
        assert_eq!(&a[..30], &shorter[..]);
    }

    #[test]
    fn tau_always_exceeds_achievable_exec() {
        let spec = TraceSpec {
            n_apps: 500,
            seed: 5,
            ..TraceSpec::default()
        };
        let t = table();
        for a in gen_app_trace(&spec, &t).unwrap() {
            assert!(a.tau_ms > t.get(&a.dnn).unwrap().min_exec_ms());
        }
    }

    #[test]
    fn bad_specs_are_rejected() {
        let mut spec = TraceSpec::default();
        spec.proportions = [0.5, 0.5, 0.5];
        assert!(matches!(
            gen_app_trace(&spec, &table()),
            Err(WorkloadError::BadProportions(_))
        ));
        let mut spec = TraceSpec::default();
        spec.small.rate_rps = (0.0, 5.0);
        assert!(gen_app_trace(&spec, &table()).is_err());
    }

    #[test]
    fn poisson_stream_statistics() {
        let gen = ArrivalGen::new(ArrivalSpec::Poisson { rate_rps: 100.0 }, 7, "app-x");
        let arrivals = gen.take_until(1000.0);
        let n = arrivals.len() as f64;
        // count within 3 sigma of 1e5
        assert!((n - 1e5).abs() < 3.0 * 1e5f64.sqrt(), "n = {n}");
        let mut gaps = Vec::with_capacity(arrivals.len());
        let mut prev = 0.0;
        for t in &arrivals {
            gaps.push(t - prev);
            prev = *t;
        }
        let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
        assert!((mean_gap - 0.01).abs() / 0.01 < 0.01, "mean gap {mean_gap}");
    }

    #[test]
    fn deterministic_stream_has_exact_gaps() {
        let gen = ArrivalGen::new(ArrivalSpec::Deterministic { rate_rps: 10.0 }, 7, "a");
        let arrivals = gen.take_until(10.0);
        for w in arrivals.windows(2) {
            assert!((w[1] - w[0] - 0.1).abs() < 1e-12);
        }
        assert!(arrivals[0] < 0.1);
    }

    #[test]
    fn step_doubles_the_rate() {
        let gen = ArrivalGen::new(
            ArrivalSpec::Step {
                rate_rps: 50.0,
                factor: 2.0,
                at_s: 50.0,
                poisson: true,
            },
            21,
            "stepper",
        );
        let arrivals = gen.take_until(100.0);
        let before = arrivals.iter().filter(|t| **t < 50.0).count() as f64;
        let after = arrivals.iter().filter(|t| **t >= 50.0).count() as f64;
        assert!((before / 50.0 - 50.0).abs() / 50.0 < 0.05, "before {before}");
        assert!((after / 50.0 - 100.0).abs() / 100.0 < 0.05, "after {after}");
    }

    #[test]
    fn arrival_streams_are_reproducible() {
        let a = ArrivalGen::new(ArrivalSpec::Poisson { rate_rps: 10.0 }, 5, "x").take_until(50.0);
        let b = ArrivalGen::new(ArrivalSpec::Poisson { rate_rps: 10.0 }, 5, "x").take_until(50.0);
        assert_eq!(a, b);
    }

    #[test]
    fn trace_csv_round_trip() {
        let spec = TraceSpec {
            n_apps: 20,
            seed: 1,
            ..TraceSpec::default()
        };
        let apps = gen_app_trace(&spec, &table()).unwrap();
        let text = write_trace_csv(&apps);
        let reparsed = parse_trace_csv(&text).unwrap();
        assert_eq!(apps.len(), reparsed.len());
        for (a, b) in apps.iter().zip(&reparsed) {
            assert_eq!(a.app_id, b.app_id);
            assert_eq!(a.dnn, b.dnn);
            assert_eq!(a.kind, b.kind);
            assert!((a.lambda_rps - b.lambda_rps).abs() < 1e-12);
            assert!((a.tau_ms - b.tau_ms).abs() < 1e-12);
        }
    }
}
