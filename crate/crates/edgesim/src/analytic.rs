//! Closed-form mean response-time predictors for the queue disciplines the
//! shared accelerators exhibit, plus the end-to-end composition.
//!
//! Scalar predictors work in base SI units: rates in requests/second, times
//! in seconds, variances in seconds squared. [`WorkloadMix`] and
//! [`ResponsePrediction`] carry milliseconds, matching the file formats, and
//! convert at the boundary. Instability (offered load at or beyond capacity)
//! is a value, never an error: waits and responses come back infinite and
//! `stable` is false, so callers can treat it as infeasible.
//!
//! All functions here are pure; share inputs freely across threads.

use std::fmt;

use thiserror::Error;

use crate::profiles::BatchProfile;

pub const MS_PER_S: f64 = 1e3;

pub fn ms_to_s(ms: f64) -> f64 {
    ms / MS_PER_S
}

pub fn s_to_ms(s: f64) -> f64 {
    s * MS_PER_S
}

#[derive(Debug, Error, PartialEq)]
pub enum MixError {
    #[error("all class arrival rates are zero")]
    AllZeroRates,
    #[error("class {0}: arrival rate must be >= 0")]
    NegativeRate(usize),
    #[error("class {0}: execution time must be > 0")]
    NonPositiveExec(usize),
    #[error("class {0}: switch overhead must be >= 0")]
    NegativeSwitch(usize),
}

#[derive(Debug, Error, PartialEq)]
#[error("batch size must be >= 1")]
pub struct BatchSizeError;

/// One request class sharing a device queue: a backend's offered rate, its
/// isolated execution time, and the context-switch overhead it pays when the
/// previously served request came from another class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ServiceClass {
    pub lambda_rps: f64,
    pub exec_ms: f64,
    pub switch_ms: f64,
}

impl ServiceClass {
    pub fn new(lambda_rps: f64, exec_ms: f64, switch_ms: f64) -> Self {
        ServiceClass {
            lambda_rps,
            exec_ms,
            switch_ms,
        }
    }
}

/// Aggregate workload offered to one shared device queue, with the derived
/// service-time moments.
///
/// Under FCFS service of merged Poisson arrivals the class of consecutive
/// requests is independent, so class `i` pays its switch overhead with
/// probability `1 - P(M_i)`:
///
/// `S_i = P(M_i) e_i + (1 - P(M_i)) (e_i + o_i)`
///
/// and the mix service time is the rate-weighted mean `S = sum P(M_i) S_i`.
/// The service variance comes from the matching two-point per-class
/// distribution (`e_i` w.p. `P(M_i)`, `e_i + o_i` otherwise).
#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadMix {
    classes: Vec<ServiceClass>,
    class_prob: Vec<f64>,
    class_service_ms: Vec<f64>,
    total_lambda_rps: f64,
    mean_service_ms: f64,
    second_moment_ms2: f64,
}

impl WorkloadMix {
    pub fn from_classes(classes: Vec<ServiceClass>) -> Result<Self, MixError> {
        for (i, c) in classes.iter().enumerate() {
            if c.lambda_rps < 0.0 || !c.lambda_rps.is_finite() {
                return Err(MixError::NegativeRate(i));
            }
            if !(c.exec_ms > 0.0) {
                return Err(MixError::NonPositiveExec(i));
            }
            if c.switch_ms < 0.0 {
                return Err(MixError::NegativeSwitch(i));
            }
        }
        let total: f64 = classes.iter().map(|c| c.lambda_rps).sum();
        if !(total > 0.0) {
            return Err(MixError::AllZeroRates);
        }
        let class_prob: Vec<f64> = classes.iter().map(|c| c.lambda_rps / total).collect();
        let class_service_ms: Vec<f64> = classes
            .iter()
            .zip(&class_prob)
            .map(|(c, p)| c.exec_ms + (1.0 - p) * c.switch_ms)
            .collect();
        let mean_service_ms: f64 = class_prob
            .iter()
            .zip(&class_service_ms)
            .map(|(p, s)| p * s)
            .sum();
        let second_moment_ms2: f64 = classes
            .iter()
            .zip(&class_prob)
            .map(|(c, p)| {
                let hit = c.exec_ms;
                let miss = c.exec_ms + c.switch_ms;
                p * (p * hit * hit + (1.0 - p) * miss * miss)
            })
            .sum();
        Ok(WorkloadMix {
            classes,
            class_prob,
            class_service_ms,
            total_lambda_rps: total,
            mean_service_ms,
            second_moment_ms2,
        })
    }

    /// Convenience constructor for classes without switch overhead.
    pub fn without_switch(classes: &[(f64, f64)]) -> Result<Self, MixError> {
        Self::from_classes(
            classes
                .iter()
                .map(|&(lambda, exec)| ServiceClass::new(lambda, exec, 0.0))
                .collect(),
        )
    }

    pub fn classes(&self) -> &[ServiceClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// P(M_i): probability that a random request belongs to class i.
    pub fn class_prob(&self, i: usize) -> f64 {
        self.class_prob[i]
    }

    /// S_i, ms.
    pub fn class_service_ms(&self, i: usize) -> f64 {
        self.class_service_ms[i]
    }

    pub fn total_lambda_rps(&self) -> f64 {
        self.total_lambda_rps
    }

    /// S, ms.
    pub fn mean_service_ms(&self) -> f64 {
        self.mean_service_ms
    }

    pub fn mean_service_s(&self) -> f64 {
        ms_to_s(self.mean_service_ms)
    }

    /// mu = 1/S, requests per second.
    pub fn service_rate_rps(&self) -> f64 {
        1.0 / self.mean_service_s()
    }

    /// Var[S], s^2.
    pub fn service_variance_s2(&self) -> f64 {
        let var_ms2 = (self.second_moment_ms2 - self.mean_service_ms * self.mean_service_ms)
            .max(0.0);
        var_ms2 * 1e-6
    }

    /// rho = lambda / (c mu).
    pub fn utilization(&self, c: f64) -> f64 {
        self.total_lambda_rps / (c * self.service_rate_rps())
    }
}

/// Mean waiting time of an M/G/1 FCFS queue (Pollaczek-Khintchine).
/// Infinite when the queue is unstable.
pub fn mg1_fcfs_wait(lambda: f64, mu: f64, service_var: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    if lambda >= mu {
        return f64::INFINITY;
    }
    let rho = lambda / mu;
    (rho + lambda * mu * service_var) / (2.0 * (mu - lambda))
}

/// Mean waiting time of an M/D/1 FCFS queue.
pub fn md1_fcfs_wait(lambda: f64, mu: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    if lambda >= mu {
        return f64::INFINITY;
    }
    let rho = lambda / mu;
    rho / (1.0 - rho) / (2.0 * mu)
}

/// (mean response, mean wait) of an M/G/1 PS queue. Insensitive to the
/// service distribution beyond its mean.
pub fn mg1_ps_response(lambda: f64, mu: f64) -> (f64, f64) {
    if lambda >= mu {
        return (f64::INFINITY, f64::INFINITY);
    }
    let r = 1.0 / (mu - lambda);
    (r, r - 1.0 / mu)
}

/// Mean response of an M/G/c PS system; c may be fractional (an empirically
/// measured parallelism degree).
pub fn mgc_ps_response(lambda: f64, mu: f64, c: f64) -> f64 {
    if lambda >= c * mu {
        return f64::INFINITY;
    }
    c / (c * mu - lambda)
}

/// Service time of a batch of `b` requests, ms: `S_b = k1 + k2/b`.
pub fn batch_service_time_ms(bp: &BatchProfile, b: u32) -> Result<f64, BatchSizeError> {
    if b < 1 {
        return Err(BatchSizeError);
    }
    Ok(bp.k1_ms + bp.k2_ms / f64::from(b))
}

/// End-to-end mean response: the stage means add. Instability in either
/// stage propagates.
pub fn end_to_end_response(cpu: f64, accel: f64) -> f64 {
    cpu + accel
}

/// Per-application CPU-stage mean response, ms. Each application runs in
/// its own container with a dedicated allocation of `cores`, modeled as an
/// M/G/c PS system. Zero service time means no CPU stage.
pub fn cpu_response_ms(lambda_rps: f64, cores: f64, service_ms: f64) -> f64 {
    if service_ms <= 0.0 {
        return 0.0;
    }
    let mu = 1.0 / ms_to_s(service_ms);
    s_to_ms(mgc_ps_response(lambda_rps, mu, cores))
}

/// Which closed form produced a prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueueModel {
    Md1Fcfs,
    Mg1Fcfs,
    Mg1Ps,
    MgcPs,
    /// Element-wise max of the FCFS and PS predictions.
    FcfsPsMax,
}

impl fmt::Display for QueueModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            QueueModel::Md1Fcfs => "md1_fcfs",
            QueueModel::Mg1Fcfs => "mg1_fcfs",
            QueueModel::Mg1Ps => "mg1_ps",
            QueueModel::MgcPs => "mgc_ps",
            QueueModel::FcfsPsMax => "fcfs_ps_max",
        };
        f.write_str(s)
    }
}

/// Device-level prediction: shared mean wait plus the per-class responses
/// `E[R_i] = E[w] + S_i` (index-aligned with the mix classes).
#[derive(Clone, Debug, PartialEq)]
pub struct ResponsePrediction {
    pub model: QueueModel,
    pub stable: bool,
    pub mean_wait_ms: f64,
    pub per_class_response_ms: Vec<f64>,
}

impl ResponsePrediction {
    fn from_wait(model: QueueModel, mix: &WorkloadMix, wait_s: f64) -> Self {
        let stable = wait_s.is_finite();
        let wait_ms = s_to_ms(wait_s);
        ResponsePrediction {
            model,
            stable,
            mean_wait_ms: wait_ms,
            per_class_response_ms: (0..mix.len())
                .map(|i| wait_ms + mix.class_service_ms(i))
                .collect(),
        }
    }

    /// Rate-weighted mean response across classes, ms.
    pub fn mean_response_ms(&self, mix: &WorkloadMix) -> f64 {
        (0..mix.len())
            .map(|i| mix.class_prob(i) * self.per_class_response_ms[i])
            .sum()
    }
}

/// FCFS prediction for a shared single-server device. A single-tenant mix
/// has deterministic service, which reduces the P-K form to M/D/1; the
/// multi-tenant case uses P-K with the two-point mixture variance.
pub fn fcfs_prediction(mix: &WorkloadMix) -> ResponsePrediction {
    let lambda = mix.total_lambda_rps();
    let mu = mix.service_rate_rps();
    if mix.len() == 1 {
        ResponsePrediction::from_wait(QueueModel::Md1Fcfs, mix, md1_fcfs_wait(lambda, mu))
    } else {
        let w = mg1_fcfs_wait(lambda, mu, mix.service_variance_s2());
        ResponsePrediction::from_wait(QueueModel::Mg1Fcfs, mix, w)
    }
}

/// PS prediction for a shared single-server device.
pub fn ps_prediction(mix: &WorkloadMix) -> ResponsePrediction {
    let (_, w) = mg1_ps_response(mix.total_lambda_rps(), mix.service_rate_rps());
    ResponsePrediction::from_wait(QueueModel::Mg1Ps, mix, w)
}

/// M/G/c PS prediction for a device with request parallelism `c`.
pub fn mgc_ps_prediction(mix: &WorkloadMix, c: f64) -> ResponsePrediction {
    let r = mgc_ps_response(mix.total_lambda_rps(), mix.service_rate_rps(), c);
    let w = if r.is_finite() {
        r - mix.mean_service_s()
    } else {
        f64::INFINITY
    };
    ResponsePrediction::from_wait(QueueModel::MgcPs, mix, w)
}

/// The FCFS and PS predictions bounding a time-shared edge GPU: requests of
/// one context queue FIFO while distinct contexts time-share, so the truth
/// lies between the two curves.
pub fn gpu_response_bounds(mix: &WorkloadMix) -> (ResponsePrediction, ResponsePrediction) {
    (fcfs_prediction(mix), ps_prediction(mix))
}

/// Admission-time reading of the GPU bound envelope.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GpuAdmission {
    Fcfs,
    Ps,
    /// Per-class max of the two bounds; admission must not under-predict.
    #[default]
    ConservativeMax,
}

/// GPU prediction used for admission, per the configured policy.
pub fn gpu_admission_prediction(mix: &WorkloadMix, policy: GpuAdmission) -> ResponsePrediction {
    let (fcfs, ps) = gpu_response_bounds(mix);
    match policy {
        GpuAdmission::Fcfs => fcfs,
        GpuAdmission::Ps => ps,
        GpuAdmission::ConservativeMax => {
            let per_class: Vec<f64> = fcfs
                .per_class_response_ms
                .iter()
                .zip(&ps.per_class_response_ms)
                .map(|(a, b)| a.max(*b))
                .collect();
            ResponsePrediction {
                model: QueueModel::FcfsPsMax,
                stable: fcfs.stable && ps.stable,
                mean_wait_ms: fcfs.mean_wait_ms.max(ps.mean_wait_ms),
                per_class_response_ms: per_class,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        if b == 0.0 {
            a.abs() < rel
        } else {
            ((a - b) / b).abs() < rel
        }
    }

    #[test]
    fn single_class_service_ignores_switch() {
        let mix =
            WorkloadMix::from_classes(vec![ServiceClass::new(5.0, 10.0, 50.0)]).unwrap();
        assert_eq!(mix.class_service_ms(0), 10.0);
        assert_eq!(mix.mean_service_ms(), 10.0);
        assert!(mix.service_variance_s2().abs() < 1e-18);
    }

    #[test]
    fn two_symmetric_classes() {
        let mix = WorkloadMix::from_classes(vec![
            ServiceClass::new(5.0, 10.0, 5.0),
            ServiceClass::new(5.0, 10.0, 5.0),
        ])
        .unwrap();
        assert!((mix.class_service_ms(0) - 12.5).abs() < 1e-12);
        assert!((mix.class_service_ms(1) - 12.5).abs() < 1e-12);
        assert!((mix.mean_service_ms() - 12.5).abs() < 1e-12);
    }

    #[test]
    fn three_class_mixture_mean() {
        let mix = WorkloadMix::from_classes(vec![
            ServiceClass::new(10.0, 10.0, 4.0),
            ServiceClass::new(10.0, 20.0, 4.0),
            ServiceClass::new(20.0, 5.0, 4.0),
        ])
        .unwrap();
        // 0.25*13 + 0.25*23 + 0.5*7
        assert!((mix.class_service_ms(0) - 13.0).abs() < 1e-12);
        assert!((mix.class_service_ms(1) - 23.0).abs() < 1e-12);
        assert!((mix.class_service_ms(2) - 7.0).abs() < 1e-12);
        assert!((mix.mean_service_ms() - 12.5).abs() < 1e-12);
        assert!(mix.service_variance_s2() > 0.0);
    }

    #[test]
    fn mix_rejects_bad_inputs() {
        assert_eq!(
            WorkloadMix::from_classes(vec![ServiceClass::new(0.0, 10.0, 0.0)]).unwrap_err(),
            MixError::AllZeroRates
        );
        assert_eq!(
            WorkloadMix::from_classes(vec![ServiceClass::new(1.0, 0.0, 0.0)]).unwrap_err(),
            MixError::NonPositiveExec(0)
        );
    }

    #[test]
    fn pk_wait_examples() {
        assert_eq!(mg1_fcfs_wait(0.0, 100.0, 0.0), 0.0);
        assert!((mg1_fcfs_wait(50.0, 100.0, 0.0) - 0.005).abs() < 1e-15);
        // Exponential service: Var = 1/mu^2.
        assert!((mg1_fcfs_wait(50.0, 100.0, 1e-4) - 0.010).abs() < 1e-15);
        assert!(mg1_fcfs_wait(100.0, 100.0, 0.0).is_infinite());
    }

    #[test]
    fn md1_wait_examples() {
        assert!((md1_fcfs_wait(50.0, 100.0) - 0.005).abs() < 1e-15);
        assert!((md1_fcfs_wait(90.0, 100.0) - 0.045).abs() < 1e-15);
        assert_eq!(md1_fcfs_wait(0.0, 100.0), 0.0);
        assert!(md1_fcfs_wait(120.0, 100.0).is_infinite());
    }

    #[test]
    fn ps_response_examples() {
        let (r, w) = mg1_ps_response(0.0, 100.0);
        assert!((r - 0.010).abs() < 1e-15);
        assert!(w.abs() < 1e-15);
        let (r, w) = mg1_ps_response(50.0, 100.0);
        assert!((r - 0.020).abs() < 1e-15);
        assert!((w - 0.010).abs() < 1e-15);
        let (r, _) = mg1_ps_response(90.0, 100.0);
        assert!((r - 0.100).abs() < 1e-15);
        assert!(mg1_ps_response(100.0, 100.0).0.is_infinite());
    }

    #[test]
    fn mgc_examples() {
        // c = 2, mu = 50, lambda = 60 -> 2/40 s
        assert!((mgc_ps_response(60.0, 50.0, 2.0) - 0.050).abs() < 1e-15);
        // Fractional parallelism stays finite below capacity.
        let r = mgc_ps_response(60.0, 50.0, 1.65);
        assert!(r.is_finite() && r > 0.0);
        assert!(mgc_ps_response(90.0, 50.0, 1.65).is_infinite());
    }

    #[test]
    fn batch_service_examples() {
        let bp = BatchProfile { k1_ms: 5.0, k2_ms: 20.0 };
        assert_eq!(batch_service_time_ms(&bp, 1).unwrap(), 25.0);
        assert_eq!(batch_service_time_ms(&bp, 4).unwrap(), 10.0);
        let large = batch_service_time_ms(&bp, 1_000_000).unwrap();
        assert!((large - 5.0) / 5.0 < 1e-4);
        assert!(batch_service_time_ms(&bp, 0).is_err());
    }

    #[test]
    fn end_to_end_examples() {
        assert_eq!(end_to_end_response(0.0, 42.0), 42.0);
        assert_eq!(end_to_end_response(10.0, 20.0), 30.0);
        assert!(end_to_end_response(10.0, f64::INFINITY).is_infinite());
    }

    #[test]
    fn fcfs_bound_below_ps_bound_for_deterministic_service() {
        // Var = 0 makes the P-K wait exactly half the PS wait.
        let mix = WorkloadMix::without_switch(&[(50.0, 10.0)]).unwrap();
        let (fcfs, ps) = gpu_response_bounds(&mix);
        assert!(fcfs.mean_wait_ms < ps.mean_wait_ms);
        assert!(close(fcfs.mean_wait_ms * 2.0, ps.mean_wait_ms, 1e-12));
    }

    #[test]
    fn bounds_collapse_to_service_at_zero_load() {
        let mix = WorkloadMix::without_switch(&[(1e-12, 10.0), (1e-12, 20.0)]).unwrap();
        let (fcfs, ps) = gpu_response_bounds(&mix);
        for (i, s) in [10.0, 20.0].iter().enumerate() {
            assert!(close(fcfs.per_class_response_ms[i], *s, 1e-6));
            assert!(close(ps.per_class_response_ms[i], *s, 1e-6));
        }
    }

    #[test]
    fn conservative_is_elementwise_max() {
        let mix = WorkloadMix::without_switch(&[(10.0, 20.0), (10.0, 30.0)]).unwrap();
        let (fcfs, ps) = gpu_response_bounds(&mix);
        let max = gpu_admission_prediction(&mix, GpuAdmission::ConservativeMax);
        for i in 0..2 {
            assert_eq!(
                max.per_class_response_ms[i],
                fcfs.per_class_response_ms[i].max(ps.per_class_response_ms[i])
            );
        }
    }

    #[test]
    fn mgc_reduces_to_ps_at_c1() {
        for lambda in [5.0, 25.0, 60.0] {
            let (r, _) = mg1_ps_response(lambda, 80.0);
            assert!(close(mgc_ps_response(lambda, 80.0, 1.0), r, 1e-12));
        }
    }

    #[test]
    fn cpu_response_matches_eq_form() {
        // c/(c mu - lambda), c=1, mu=500/s (2 ms), lambda=100/s
        let r = cpu_response_ms(100.0, 1.0, 2.0);
        assert!(close(r, s_to_ms(1.0 / 400.0), 1e-12));
        assert_eq!(cpu_response_ms(100.0, 1.0, 0.0), 0.0);
        assert!(cpu_response_ms(600.0, 1.0, 2.0).is_infinite());
    }

    proptest! {
        #[test]
        fn pk_var0_equals_md1(lambda in 0.1f64..99.0, mu in 100.0f64..200.0) {
            let a = mg1_fcfs_wait(lambda, mu, 0.0);
            let b = md1_fcfs_wait(lambda, mu);
            prop_assert!(close(a, b, 1e-12));
        }

        #[test]
        fn waits_monotone_in_lambda(mu in 50.0f64..150.0, var in 0.0f64..1e-3) {
            let mut prev = -1.0;
            for i in 1..20 {
                let lambda = mu * f64::from(i) / 20.0;
                let w = mg1_fcfs_wait(lambda, mu, var);
                prop_assert!(w >= prev);
                prev = w;
            }
        }

        #[test]
        fn per_class_decomposition(l1 in 1.0f64..20.0, l2 in 1.0f64..20.0,
                                   e1 in 5.0f64..30.0, e2 in 5.0f64..30.0) {
            let mix = WorkloadMix::without_switch(&[(l1, e1), (l2, e2)]).unwrap();
            let (fcfs, ps) = gpu_response_bounds(&mix);
            for pred in [&fcfs, &ps] {
                if pred.stable {
                    let d = pred.per_class_response_ms[0] - pred.per_class_response_ms[1];
                    let s = mix.class_service_ms(0) - mix.class_service_ms(1);
                    prop_assert!((d - s).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn ps_is_insensitive_to_variance(lambda in 1.0f64..40.0) {
            // Same lambda and mean service, different mixes.
            let a = WorkloadMix::without_switch(&[(lambda, 20.0)]).unwrap();
            let b = WorkloadMix::without_switch(&[(lambda / 2.0, 10.0), (lambda / 2.0, 30.0)]).unwrap();
            prop_assert!(close(a.mean_service_ms(), b.mean_service_ms(), 1e-12));
            let ra = ps_prediction(&a);
            let rb = ps_prediction(&b);
            prop_assert!(close(ra.mean_wait_ms, rb.mean_wait_ms, 1e-12));
        }

        #[test]
        fn scaling_time_units_preserves_rho_and_stability(
            lambda in 1.0f64..40.0, exec in 5.0f64..40.0, scale in 0.1f64..10.0
        ) {
            let a = WorkloadMix::without_switch(&[(lambda, exec)]).unwrap();
            // Scale rates up and times down by the same factor.
            let b = WorkloadMix::without_switch(&[(lambda * scale, exec / scale)]).unwrap();
            prop_assert!(close(a.utilization(1.0), b.utilization(1.0), 1e-12));
            let fa = fcfs_prediction(&a);
            let fb = fcfs_prediction(&b);
            prop_assert_eq!(fa.stable, fb.stable);
        }

        #[test]
        fn class_probs_sum_to_one(ls in proptest::collection::vec(0.0f64..50.0, 1..6)) {
            let total: f64 = ls.iter().sum();
            prop_assume!(total > 0.0);
            let classes: Vec<ServiceClass> =
                ls.iter().map(|&l| ServiceClass::new(l, 10.0, 2.0)).collect();
            let mix = WorkloadMix::from_classes(classes).unwrap();
            let sum: f64 = (0..mix.len()).map(|i| mix.class_prob(i)).sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            // mu * S = 1
            prop_assert!((mix.service_rate_rps() * mix.mean_service_s() - 1.0).abs() < 1e-12);
            prop_assert!(mix.service_variance_s2() >= 0.0);
        }
    }

    #[test]
    fn wait_diverges_approaching_capacity() {
        let mu = 100.0;
        let w1 = mg1_fcfs_wait(99.0, mu, 0.0);
        let w2 = mg1_fcfs_wait(99.9, mu, 0.0);
        let w3 = mg1_fcfs_wait(99.99, mu, 0.0);
        assert!(w1 < w2 && w2 < w3);
        assert!(w3 > 0.4);
    }
}
