//! DNN and accelerator profiles: static data consumed by the predictors,
//! the simulator, and placement.
//!
//! Profiles are immutable after load and safe to share across concurrent
//! experiment trials.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Profile table bundled with the crate; `EDGESIM_PROFILE_DIR` or a scenario
/// `profiles.path` override it.
pub const BUNDLED_PROFILES: &str = include_str!("../data/profiles.csv");

/// Environment variable naming a directory that contains `profiles.csv`.
pub const PROFILE_DIR_ENV: &str = "EDGESIM_PROFILE_DIR";

/// On-chip memory budget of the TPU-class device, MiB.
pub const TPU_ONCHIP_CAPACITY_MIB: f64 = 8.0;

const CSV_HEADER: &str = "name,scale,param_count_m,static_mib,runtime_mib,gflops,\
exec_ms_edgegpu,exec_ms_edgetpu,exec_ms_mps,onchip_mib,offchip_mib";

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: String,
        msg: String,
    },
    #[error("row {row} ({name}): field {field}: {msg}")]
    Invariant {
        row: usize,
        name: String,
        field: String,
        msg: String,
    },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("non-positive sample: batch {batch} -> {time_ms} ms")]
    NonPositiveSample { batch: u32, time_ms: f64 },
    #[error("unknown DNN profile: {0}")]
    UnknownDnn(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelScale {
    Small,
    Medium,
    Large,
}

impl ModelScale {
    pub fn code(self) -> &'static str {
        match self {
            ModelScale::Small => "S",
            ModelScale::Medium => "M",
            ModelScale::Large => "L",
        }
    }

    fn from_code(s: &str) -> Option<Self> {
        match s {
            "S" => Some(ModelScale::Small),
            "M" => Some(ModelScale::Medium),
            "L" => Some(ModelScale::Large),
            _ => None,
        }
    }
}

/// Accelerator families with distinct multiplexing behavior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceleratorKind {
    /// One request at a time, non-preemptive FCFS, pays a context-switch
    /// overhead when the served model changes.
    EdgeTpu,
    /// Integrated GPU; time-shares requests of distinct contexts, FIFO
    /// within a context.
    EdgeGpu,
    /// Discrete GPU with the multi-process service enabled: limited request
    /// parallelism.
    DiscreteGpuMps,
}

impl AcceleratorKind {
    pub const ALL: [AcceleratorKind; 3] = [
        AcceleratorKind::EdgeTpu,
        AcceleratorKind::EdgeGpu,
        AcceleratorKind::DiscreteGpuMps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AcceleratorKind::EdgeTpu => "edge_tpu",
            AcceleratorKind::EdgeGpu => "edge_gpu",
            AcceleratorKind::DiscreteGpuMps => "discrete_gpu_mps",
        }
    }
}

impl fmt::Display for AcceleratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-DNN profile: memory footprints and per-device execution times.
#[derive(Clone, Debug, PartialEq)]
pub struct DnnProfile {
    pub name: String,
    pub scale: ModelScale,
    pub param_count_m: f64,
    pub static_mib: f64,
    pub runtime_mib: f64,
    pub gflops: f64,
    exec_ms: BTreeMap<AcceleratorKind, f64>,
    pub onchip_mib: f64,
    pub offchip_mib: f64,
}

impl DnnProfile {
    /// Isolated execution time on the given device kind, if supported.
    pub fn exec_ms(&self, kind: AcceleratorKind) -> Option<f64> {
        self.exec_ms.get(&kind).copied()
    }

    pub fn supports(&self, kind: AcceleratorKind) -> bool {
        self.exec_ms.contains_key(&kind)
    }

    /// Fastest isolated execution time across supported device kinds.
    pub fn min_exec_ms(&self) -> f64 {
        self.exec_ms
            .values()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn with_exec(
        name: &str,
        scale: ModelScale,
        static_mib: f64,
        runtime_mib: f64,
        exec: &[(AcceleratorKind, f64)],
    ) -> Self {
        DnnProfile {
            name: name.to_string(),
            scale,
            param_count_m: 0.0,
            static_mib,
            runtime_mib,
            gflops: 0.0,
            exec_ms: exec.iter().copied().collect(),
            onchip_mib: static_mib.min(TPU_ONCHIP_CAPACITY_MIB),
            offchip_mib: (static_mib - TPU_ONCHIP_CAPACITY_MIB).max(0.0),
        }
    }
}

/// Device model: kind plus the capacity figures the queueing models need.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceleratorModel {
    pub kind: AcceleratorKind,
    pub memory_capacity_mib: f64,
    /// Degree of request parallelism (c); 1 for edge TPU/GPU.
    pub parallelism_c: f64,
    /// Context-switch overhead intercept, ms.
    pub switch_alpha_ms: f64,
    /// Context-switch overhead slope, ms per MiB of on-chip model state.
    pub switch_beta_ms_per_mib: f64,
}

impl AcceleratorModel {
    pub fn edge_tpu(memory_capacity_mib: f64) -> Self {
        AcceleratorModel {
            kind: AcceleratorKind::EdgeTpu,
            memory_capacity_mib,
            parallelism_c: 1.0,
            // Defaults chosen so 1-8 MiB on-chip sizes span a 10-17 ms
            // switch overhead band; override per device as needed.
            switch_alpha_ms: 9.0,
            switch_beta_ms_per_mib: 1.0,
        }
    }

    pub fn edge_gpu(memory_capacity_mib: f64) -> Self {
        AcceleratorModel {
            kind: AcceleratorKind::EdgeGpu,
            memory_capacity_mib,
            parallelism_c: 1.0,
            switch_alpha_ms: 0.0,
            switch_beta_ms_per_mib: 0.0,
        }
    }

    pub fn discrete_gpu_mps(memory_capacity_mib: f64, parallelism_c: f64) -> Self {
        AcceleratorModel {
            kind: AcceleratorKind::DiscreteGpuMps,
            memory_capacity_mib,
            parallelism_c,
            switch_alpha_ms: 0.0,
            switch_beta_ms_per_mib: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let fail = |field: &str, msg: String| ProfileError::Invariant {
            row: 0,
            name: format!("{}", self.kind),
            field: field.to_string(),
            msg,
        };
        if !(self.memory_capacity_mib > 0.0) {
            return Err(fail("memory_capacity_mib", "must be > 0".into()));
        }
        if !(self.parallelism_c >= 1.0) {
            return Err(fail("parallelism_c", "must be >= 1".into()));
        }
        if self.switch_alpha_ms < 0.0 || self.switch_beta_ms_per_mib < 0.0 {
            return Err(fail("switch", "switch parameters must be >= 0".into()));
        }
        Ok(())
    }
}

/// Batch service-time constants of `S_b = k1 + k2 / b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchProfile {
    pub k1_ms: f64,
    pub k2_ms: f64,
}

/// Least-squares fit of batch constants plus the per-sample residuals.
#[derive(Clone, Debug)]
pub struct BatchFit {
    pub profile: BatchProfile,
    /// observed - fitted, per input sample.
    pub residuals: Vec<f64>,
    pub sse: f64,
}

/// Context-switch overhead a DNN pays on the given device when the
/// previously served request used a different model. Linear in the model's
/// on-chip footprint on the TPU; zero elsewhere (GPU switches are cheap as
/// long as models stay resident).
pub fn switch_overhead_ms(dnn: &DnnProfile, dev: &AcceleratorModel) -> f64 {
    match dev.kind {
        AcceleratorKind::EdgeTpu => dev.switch_alpha_ms + dev.switch_beta_ms_per_mib * dnn.onchip_mib,
        _ => 0.0,
    }
}

/// Fits `S_b = k1 + k2/b` to `(batch size, service ms)` samples by least
/// squares on x = 1/b.
pub fn fit_batch_params(samples: &[(u32, f64)]) -> Result<BatchFit, ProfileError> {
    for &(b, t) in samples {
        if b < 1 {
            return Err(ProfileError::DegenerateFit("batch sizes must be >= 1".into()));
        }
        if !(t > 0.0) {
            return Err(ProfileError::NonPositiveSample { batch: b, time_ms: t });
        }
    }
    let mut sizes: Vec<u32> = samples.iter().map(|s| s.0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(ProfileError::DegenerateFit(
            "need samples at >= 2 distinct batch sizes".into(),
        ));
    }

    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|&(b, _)| 1.0 / f64::from(b)).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, t)| t).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let k2 = sxy / sxx;
    let k1 = y_mean - k2 * x_mean;
    if !(k1 > 0.0) || k2 < 0.0 {
        return Err(ProfileError::DegenerateFit(format!(
            "fitted constants violate k1 > 0, k2 >= 0 (k1={k1:.4}, k2={k2:.4})"
        )));
    }
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (k1 + k2 * x))
        .collect();
    let sse = residuals.iter().map(|r| r * r).sum();
    Ok(BatchFit {
        profile: BatchProfile { k1_ms: k1, k2_ms: k2 },
        residuals,
        sse,
    })
}

/// Loads and validates a profile table from a CSV file.
pub fn load_profile_table(path: &Path) -> Result<Vec<DnnProfile>, ProfileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_profile_table(&text)
}

/// Parses the documented CSV schema. `#`-prefixed lines are comments; the
/// header row is required. Empty exec cells mean the model is unsupported
/// on that device kind.
pub fn parse_profile_table(text: &str) -> Result<Vec<DnnProfile>, ProfileError> {
    let mut profiles = Vec::new();
    let mut seen_header = false;
    let mut row = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        if !seen_header {
            if line.trim() != CSV_HEADER {
                return Err(ProfileError::Parse {
                    line: line_no,
                    column: "header".into(),
                    msg: format!("expected header `{CSV_HEADER}`"),
                });
            }
            seen_header = true;
            continue;
        }
        row += 1;
        profiles.push(parse_row(line, line_no, row)?);
    }
    if !seen_header {
        return Err(ProfileError::Parse {
            line: 1,
            column: "header".into(),
            msg: "missing header row".into(),
        });
    }
    // Names key groups and backends; duplicates would alias them.
    let mut names: Vec<&str> = profiles.iter().map(|p| p.name.as_str()).collect();
    names.sort_unstable();
    for w in names.windows(2) {
        if w[0] == w[1] {
            return Err(ProfileError::Parse {
                line: 0,
                column: "name".into(),
                msg: format!("duplicate profile name {}", w[0]),
            });
        }
    }
    Ok(profiles)
}

fn parse_row(line: &str, line_no: usize, row: usize) -> Result<DnnProfile, ProfileError> {
    const COLS: [&str; 11] = [
        "name",
        "scale",
        "param_count_m",
        "static_mib",
        "runtime_mib",
        "gflops",
        "exec_ms_edgegpu",
        "exec_ms_edgetpu",
        "exec_ms_mps",
        "onchip_mib",
        "offchip_mib",
    ];
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != COLS.len() {
        return Err(ProfileError::Parse {
            line: line_no,
            column: "row".into(),
            msg: format!("expected {} fields, got {}", COLS.len(), fields.len()),
        });
    }
    let num = |i: usize| -> Result<f64, ProfileError> {
        fields[i].parse::<f64>().map_err(|_| ProfileError::Parse {
            line: line_no,
            column: COLS[i].into(),
            msg: format!("`{}` is not a number", fields[i]),
        })
    };
    let opt_num = |i: usize| -> Result<Option<f64>, ProfileError> {
        if fields[i].is_empty() {
            Ok(None)
        } else {
            num(i).map(Some)
        }
    };

    let name = fields[0].to_string();
    if name.is_empty() {
        return Err(ProfileError::Parse {
            line: line_no,
            column: "name".into(),
            msg: "empty name".into(),
        });
    }
    let scale = ModelScale::from_code(fields[1]).ok_or_else(|| ProfileError::Parse {
        line: line_no,
        column: "scale".into(),
        msg: format!("`{}` is not one of S, M, L", fields[1]),
    })?;

    let param_count_m = num(2)?;
    let static_mib = num(3)?;
    let runtime_mib = num(4)?;
    let gflops = num(5)?;
    let mut exec_ms = BTreeMap::new();
    for (i, kind) in [
        (6, AcceleratorKind::EdgeGpu),
        (7, AcceleratorKind::EdgeTpu),
        (8, AcceleratorKind::DiscreteGpuMps),
    ] {
        if let Some(v) = opt_num(i)? {
            exec_ms.insert(kind, v);
        }
    }
    let onchip_mib = num(9)?;
    let offchip_mib = num(10)?;

    let profile = DnnProfile {
        name,
        scale,
        param_count_m,
        static_mib,
        runtime_mib,
        gflops,
        exec_ms,
        onchip_mib,
        offchip_mib,
    };
    validate_profile(&profile, row)?;
    Ok(profile)
}

fn validate_profile(p: &DnnProfile, row: usize) -> Result<(), ProfileError> {
    let fail = |field: &str, msg: String| ProfileError::Invariant {
        row,
        name: p.name.clone(),
        field: field.to_string(),
        msg,
    };
    for (kind, v) in &p.exec_ms {
        if !(*v > 0.0) {
            return Err(fail(
                "exec_ms",
                format!("execution time on {kind} must be > 0, got {v}"),
            ));
        }
    }
    if p.exec_ms.is_empty() {
        return Err(fail("exec_ms", "no supported device kind".into()));
    }
    if p.static_mib > p.runtime_mib {
        return Err(fail(
            "static_mib",
            format!(
                "static size {} exceeds runtime footprint {}",
                p.static_mib, p.runtime_mib
            ),
        ));
    }
    if p.onchip_mib > TPU_ONCHIP_CAPACITY_MIB + 1e-9 {
        return Err(fail(
            "onchip_mib",
            format!("exceeds the {TPU_ONCHIP_CAPACITY_MIB} MiB on-chip capacity"),
        ));
    }
    if p.onchip_mib < 0.0 || p.offchip_mib < 0.0 {
        return Err(fail("onchip_mib", "memory shares must be >= 0".into()));
    }
    if p.static_mib < 0.0 || p.runtime_mib < 0.0 || p.param_count_m < 0.0 || p.gflops < 0.0 {
        return Err(fail("sizes", "sizes must be >= 0".into()));
    }
    Ok(())
}

/// Serializes a profile table back to the documented CSV schema.
pub fn write_profile_table(profiles: &[DnnProfile]) -> String {
    fn cell(v: f64) -> String {
        // Shortest representation that round-trips (f64 display is exact).
        format!("{v}")
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in profiles {
        let exec = |kind: AcceleratorKind| p.exec_ms(kind).map(cell).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            p.name,
            p.scale.code(),
            cell(p.param_count_m),
            cell(p.static_mib),
            cell(p.runtime_mib),
            cell(p.gflops),
            exec(AcceleratorKind::EdgeGpu),
            exec(AcceleratorKind::EdgeTpu),
            exec(AcceleratorKind::DiscreteGpuMps),
            cell(p.onchip_mib),
            cell(p.offchip_mib),
        ));
    }
    out
}

/// Profile lookup table keyed by DNN name.
#[derive(Clone, Debug, Default)]
pub struct ProfileTable {
    by_name: BTreeMap<String, DnnProfile>,
}

impl ProfileTable {
    pub fn from_profiles(profiles: Vec<DnnProfile>) -> Self {
        ProfileTable {
            by_name: profiles.into_iter().map(|p| (p.name.clone(), p)).collect(),
        }
    }

    pub fn get(&self, name: &str) -> Result<&DnnProfile, ProfileError> {
        self.by_name
            .get(name)
            .ok_or_else(|| ProfileError::UnknownDnn(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &DnnProfile> {
        self.by_name.values()
    }

    pub fn names_with_scale(&self, scale: ModelScale) -> Vec<&DnnProfile> {
        self.by_name.values().filter(|p| p.scale == scale).collect()
    }

    pub fn len(&self) -> usize {
        self.by_name.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_name.is_empty()
    }
}

/// The table bundled with the crate.
pub fn bundled_profiles() -> Vec<DnnProfile> {
    parse_profile_table(BUNDLED_PROFILES).expect("bundled profile table is valid")
}

/// Default table resolution: `$EDGESIM_PROFILE_DIR/profiles.csv` when set,
/// bundled data otherwise.
pub fn default_profiles() -> Result<Vec<DnnProfile>, ProfileError> {
    match std::env::var_os(PROFILE_DIR_ENV) {
        Some(dir) => load_profile_table(&Path::new(&dir).join("profiles.csv")),
        None => Ok(bundled_profiles()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_reproduces_published_values() {
        let table = ProfileTable::from_profiles(bundled_profiles());
        let mobilenet = table.get("MobileNetV2").unwrap();
        assert_eq!(mobilenet.exec_ms(AcceleratorKind::EdgeGpu), Some(13.02));
        assert_eq!(mobilenet.static_mib, 22.0);
        assert_eq!(mobilenet.runtime_mib, 1130.0);
        let yolo = table.get("YoloV4").unwrap();
        assert_eq!(yolo.exec_ms(AcceleratorKind::EdgeGpu), Some(407.91));
        assert_eq!(yolo.static_mib, 445.0);
        assert_eq!(table.len(), 21);
    }

    #[test]
    fn header_only_file_is_empty_table() {
        let text = format!("{CSV_HEADER}\n");
        assert!(parse_profile_table(&text).unwrap().is_empty());
    }

    #[test]
    fn missing_header_is_an_error() {
        let err = parse_profile_table("A,S,1,1,2,1,10,,,1,0\n").unwrap_err();
        assert!(matches!(err, ProfileError::Parse { .. }), "{err}");
    }

    #[test]
    fn parse_error_names_row_and_column() {
        let text = format!("{CSV_HEADER}\nA,S,1,1,2,1,oops,,,1,0\n");
        let err = parse_profile_table(&text).unwrap_err();
        match err {
            ProfileError::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, "exec_ms_edgegpu");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn invariant_violation_names_row_and_field() {
        // static > runtime
        let text = format!("{CSV_HEADER}\nA,S,1,500,100,1,10,,,1,0\n");
        let err = parse_profile_table(&text).unwrap_err();
        match err {
            ProfileError::Invariant { name, field, .. } => {
                assert_eq!(name, "A");
                assert_eq!(field, "static_mib");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn missing_exec_cell_means_unsupported() {
        let text = format!("{CSV_HEADER}\nA,S,1,10,20,1,10,,,1,0\n");
        let p = &parse_profile_table(&text).unwrap()[0];
        assert!(p.supports(AcceleratorKind::EdgeGpu));
        assert!(!p.supports(AcceleratorKind::EdgeTpu));
        assert!(!p.supports(AcceleratorKind::DiscreteGpuMps));
    }

    #[test]
    fn round_trip_is_identical() {
        let profiles = bundled_profiles();
        let text = write_profile_table(&profiles);
        let reparsed = parse_profile_table(&text).unwrap();
        assert_eq!(profiles, reparsed);
    }

    #[test]
    fn switch_overhead_examples() {
        let mut dev = AcceleratorModel::edge_tpu(8.0);
        dev.switch_alpha_ms = 10.0;
        dev.switch_beta_ms_per_mib = 1.0;
        let mut dnn = DnnProfile::with_exec(
            "x",
            ModelScale::Small,
            4.0,
            100.0,
            &[(AcceleratorKind::EdgeTpu, 10.0)],
        );
        dnn.onchip_mib = 0.0;
        assert_eq!(switch_overhead_ms(&dnn, &dev), 10.0);

        dev.switch_alpha_ms = 9.0;
        dnn.onchip_mib = 7.0;
        assert_eq!(switch_overhead_ms(&dnn, &dev), 16.0);

        let gpu = AcceleratorModel::edge_gpu(4096.0);
        assert_eq!(switch_overhead_ms(&dnn, &gpu), 0.0);
    }

    #[test]
    fn bundled_switch_overheads_span_observed_band() {
        let tpu = AcceleratorModel::edge_tpu(8192.0);
        for p in bundled_profiles() {
            if p.supports(AcceleratorKind::EdgeTpu) {
                let o = switch_overhead_ms(&p, &tpu);
                assert!((10.0..=17.0).contains(&o), "{}: {o}", p.name);
            }
        }
    }

    #[test]
    fn switch_overhead_monotone_in_onchip_size() {
        let dev = AcceleratorModel::edge_tpu(8.0);
        let mut prev = -1.0;
        for i in 0..=16 {
            let mut dnn = DnnProfile::with_exec(
                "x",
                ModelScale::Small,
                4.0,
                10.0,
                &[(AcceleratorKind::EdgeTpu, 10.0)],
            );
            dnn.onchip_mib = f64::from(i) * 0.5;
            let o = switch_overhead_ms(&dnn, &dev);
            assert!(o >= prev);
            prev = o;
        }
    }

    #[test]
    fn fit_recovers_exact_parameters() {
        let samples: Vec<(u32, f64)> = [1u32, 2, 4, 8]
            .iter()
            .map(|&b| (b, 5.0 + 20.0 / f64::from(b)))
            .collect();
        let fit = fit_batch_params(&samples).unwrap();
        assert!((fit.profile.k1_ms - 5.0).abs() < 1e-12);
        assert!((fit.profile.k2_ms - 20.0).abs() < 1e-12);
        assert!(fit.sse < 1e-20);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        let err = fit_batch_params(&[(4, 10.0), (4, 10.0)]).unwrap_err();
        assert!(matches!(err, ProfileError::DegenerateFit(_)));
        let err = fit_batch_params(&[(1, 25.0), (2, 0.0)]).unwrap_err();
        assert!(matches!(err, ProfileError::NonPositiveSample { .. }));
    }

    #[test]
    fn noisy_fit_matches_grid_search_oracle() {
        // +-2% multiplicative noise around k1=5, k2=20.
        let noise = [1.018, 0.986, 1.011, 0.994, 1.02, 0.981];
        let sizes = [1u32, 2, 3, 4, 6, 8];
        let samples: Vec<(u32, f64)> = sizes
            .iter()
            .zip(noise.iter())
            .map(|(&b, &n)| (b, (5.0 + 20.0 / f64::from(b)) * n))
            .collect();
        let fit = fit_batch_params(&samples).unwrap();
        assert!((fit.profile.k1_ms - 5.0).abs() / 5.0 < 0.05);
        assert!((fit.profile.k2_ms - 20.0).abs() / 20.0 < 0.05);

        // Independent oracle: exhaustive grid search over (k1, k2).
        let sse = |k1: f64, k2: f64| -> f64 {
            samples
                .iter()
                .map(|&(b, t)| {
                    let r = t - (k1 + k2 / f64::from(b));
                    r * r
                })
                .sum()
        };
        let mut best = (0.0, 0.0, f64::INFINITY);
        let mut k1 = 4.0;
        while k1 <= 6.0 {
            let mut k2 = 18.0;
            while k2 <= 22.0 {
                let s = sse(k1, k2);
                if s < best.2 {
                    best = (k1, k2, s);
                }
                k2 += 0.005;
            }
            k1 += 0.005;
        }
        assert!((fit.profile.k1_ms - best.0).abs() < 0.01, "{fit:?} vs {best:?}");
        assert!((fit.profile.k2_ms - best.1).abs() < 0.01);
        assert!(fit.sse <= best.2 + 1e-9);
    }
}
