//! Sweep execution: grid expansion, channel de-duplication, the worker
//! pool, and deterministic CSV assembly.
//!
//! Points are expanded in config order (later axes vary fastest), distinct
//! channels are computed once each (in parallel, consulting the disk
//! cache), and rows are always emitted in point order so serial and
//! parallel runs produce identical bytes.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::Ordering;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::cache::{channel_key, resolve_dir, Cache};
use crate::config::{AxisName, ConfigError, ScenarioConfig};
use crate::pipeline::{
    compute_channel, evaluate_point, CachedChannel, ChannelOutcome, GridPoint, PointRecord,
};

/// Fatal runner failures (per-point failures become CSV rows instead).
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot build the worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Execution options from the command line.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub workers: Option<usize>,
    pub no_cache: bool,
    pub out_dir: Option<PathBuf>,
}

/// Summary of one finished run.
#[derive(Debug)]
pub struct RunOutcome {
    pub csv_path: PathBuf,
    pub rows: usize,
    pub failed: usize,
    pub unconverged: usize,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub cache_enabled: bool,
    pub warnings: Vec<String>,
}

impl RunOutcome {
    /// Process exit code: 3 signals convergence or per-point failures.
    pub fn exit_code(&self) -> i32 {
        if self.failed > 0 || self.unconverged > 0 {
            3
        } else {
            0
        }
    }
}

/// Expands the sweep axes into the full point grid.
pub fn expand_grid(cfg: &ScenarioConfig) -> Vec<GridPoint> {
    let axes: Vec<(AxisName, Vec<f64>)> = cfg
        .sweep
        .iter()
        .map(|axis| (axis.name, axis.values()))
        .collect();
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    let mut points = Vec::with_capacity(total.max(1));
    let mut indices = vec![0usize; axes.len()];
    loop {
        let mut p = GridPoint::base(cfg);
        for ((name, values), &i) in axes.iter().zip(&indices) {
            apply_axis(&mut p, *name, values[i]);
        }
        if let Some(span) = cfg.fixed_span {
            p.apply_fixed_span(span);
        }
        p.index = points.len();
        points.push(p);

        // Odometer increment, last axis fastest.
        let mut k = axes.len();
        loop {
            if k == 0 {
                return points;
            }
            k -= 1;
            indices[k] += 1;
            if indices[k] < axes[k].1.len() {
                break;
            }
            indices[k] = 0;
        }
    }
}

fn apply_axis(p: &mut GridPoint, name: AxisName, value: f64) {
    match name {
        AxisName::Accel => {
            p.accel_i = value;
            p.accel_ii = value;
        }
        AxisName::AccelI => p.accel_i = value,
        AxisName::AccelII => p.accel_ii = value,
        AxisName::Separation => p.separation = value,
        AxisName::Length => {
            p.in_i.0 = value;
            p.in_ii.0 = value;
            p.out_i.0 = value;
            p.out_ii.0 = value;
        }
        AxisName::Omega0 => {
            p.in_i.1 = value;
            p.in_ii.1 = value;
            p.out_i.1 = value;
            p.out_ii.1 = value;
        }
        AxisName::R => p.r = value,
        AxisName::N => p.n = value,
    }
}

fn resolve_channel(
    cfg: &ScenarioConfig,
    p: &GridPoint,
    key: &str,
    cache: &Cache,
) -> Result<Arc<ChannelOutcome>, String> {
    if let Some(payload) = cache.get(key) {
        if let Ok(outcome) = ChannelOutcome::from_cached(cfg, p, &payload) {
            return Ok(Arc::new(outcome));
        }
    }
    let outcome = compute_channel(cfg, p).map_err(|e| e.to_string())?;
    cache.put(key, &CachedChannel::from_outcome(&outcome, key));
    Ok(Arc::new(outcome))
}

/// Runs every sweep point of a validated config and returns the records in
/// point order. Per-point failures are reported inside the records.
pub fn run_points(
    cfg: &ScenarioConfig,
    opts: &RunOptions,
    cache: &Cache,
) -> Result<Vec<PointRecord>, RunError> {
    let points = expand_grid(cfg);

    // One evaluation per distinct channel, shared across points: a state
    // sweep over (r, n) reuses a single channel computation.
    let mut groups: Vec<(String, GridPoint)> = Vec::new();
    let mut group_of: Vec<usize> = Vec::with_capacity(points.len());
    let mut seen: HashMap<String, usize> = HashMap::new();
    for p in &points {
        let key = channel_key(cfg, p);
        let slot = *seen.entry(key.clone()).or_insert_with(|| {
            groups.push((key, *p));
            groups.len() - 1
        });
        group_of.push(slot);
    }

    let evaluate = || {
        let channels: Vec<Result<Arc<ChannelOutcome>, String>> = groups
            .par_iter()
            .map(|(key, p)| resolve_channel(cfg, p, key, cache))
            .collect();
        points
            .par_iter()
            .map(|p| match &channels[group_of[p.index]] {
                Ok(outcome) => evaluate_point(cfg, p, outcome)
                    .unwrap_or_else(|e| PointRecord::failed(*p, e.to_string())),
                Err(message) => PointRecord::failed(*p, message.clone()),
            })
            .collect::<Vec<_>>()
    };

    let records = match opts.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()?
            .install(evaluate),
        None => evaluate(),
    };
    Ok(records)
}

/// The fixed CSV column order.
pub const CSV_HEADER: &str = "index,accel_i,accel_ii,separation,\
length_in_i,omega0_in_i,length_in_ii,omega0_in_ii,\
length_out_i,omega0_out_i,length_out_ii,omega0_out_ii,\
mass,a_conv,r,n,\
alpha_i_re,alpha_i_im,beta_i_re,beta_i_im,\
alpha_ii_re,alpha_ii_im,beta_ii_re,beta_ii_im,\
n_i,n_ii,n_plus_re,n_plus_im,n_minus_re,n_minus_im,\
cross_error,cross_converged,cp_min_eig,\
log_negativity,pt_symplectic_eig,fidelity,\
tau,nbar,rank,noise_coefficient,c_lb,q_lb,mbar_clamped,\
status,warnings";

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn sanitize(text: &str) -> String {
    text.replace(['\n', '\r'], " ").replace(',', ";")
}

/// One CSV row in the fixed column order.
pub fn csv_row(cfg: &ScenarioConfig, rec: &PointRecord) -> String {
    let p = &rec.point;
    let cols: Vec<String> = vec![
        p.index.to_string(),
        fmt(p.accel_i),
        fmt(p.accel_ii),
        fmt(p.separation),
        fmt(p.in_i.0),
        fmt(p.in_i.1),
        fmt(p.in_ii.0),
        fmt(p.in_ii.1),
        fmt(p.out_i.0),
        fmt(p.out_i.1),
        fmt(p.out_ii.0),
        fmt(p.out_ii.1),
        fmt(cfg.mass),
        fmt(cfg.a_conv),
        fmt(p.r),
        fmt(p.n),
        fmt(rec.alpha_i.re),
        fmt(rec.alpha_i.im),
        fmt(rec.beta_i.re),
        fmt(rec.beta_i.im),
        fmt(rec.alpha_ii.re),
        fmt(rec.alpha_ii.im),
        fmt(rec.beta_ii.re),
        fmt(rec.beta_ii.im),
        fmt(rec.n_i),
        fmt(rec.n_ii),
        fmt(rec.cross_plus.re),
        fmt(rec.cross_plus.im),
        fmt(rec.cross_minus.re),
        fmt(rec.cross_minus.im),
        fmt(rec.cross_error),
        u8::from(rec.converged).to_string(),
        fmt(rec.cp_min_eig),
        fmt(rec.log_negativity),
        fmt(rec.pt_symplectic_eig),
        fmt(rec.fidelity),
        fmt(rec.tau),
        fmt(rec.nbar),
        rec.rank.to_string(),
        fmt(rec.noise_coefficient),
        fmt(rec.c_lb),
        fmt(rec.q_lb),
        u8::from(rec.mbar_clamped).to_string(),
        sanitize(&rec.status),
        sanitize(&rec.warnings.join(" | ")),
    ];
    cols.join(",")
}

/// Renders the full CSV document.
pub fn render_csv(cfg: &ScenarioConfig, records: &[PointRecord]) -> String {
    let mut out = String::with_capacity(256 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for rec in records {
        out.push_str(&csv_row(cfg, rec));
        out.push('\n');
    }
    out
}

/// Full scenario run: points, CSV on disk, and the summary.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let cache = if opts.no_cache {
        Cache::disabled()
    } else {
        Cache::at(resolve_dir(cfg.cache_dir.as_deref()))
    };

    let records = run_points(cfg, opts, &cache)?;

    let csv_path = {
        let name = cfg
            .output_path
            .clone()
            .unwrap_or_else(|| PathBuf::from(cfg.default_output_name()));
        match &opts.out_dir {
            Some(dir) if name.is_relative() => dir.join(name),
            _ => name,
        }
    };
    if let Some(parent) = csv_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| RunError::Io {
                path: csv_path.clone(),
                source,
            })?;
        }
    }
    let csv = render_csv(cfg, &records);
    let mut file = std::fs::File::create(&csv_path).map_err(|source| RunError::Io {
        path: csv_path.clone(),
        source,
    })?;
    file.write_all(csv.as_bytes()).map_err(|source| RunError::Io {
        path: csv_path.clone(),
        source,
    })?;

    let mut warnings: Vec<String> = Vec::new();
    for rec in &records {
        for w in &rec.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
    }
    Ok(RunOutcome {
        csv_path,
        rows: records.len(),
        failed: records.iter().filter(|r| !r.is_ok()).count(),
        unconverged: records
            .iter()
            .filter(|r| r.is_ok() && !r.converged)
            .count(),
        cache_hits: cache.stats.hits.load(Ordering::Relaxed),
        cache_misses: cache.stats.misses.load(Ordering::Relaxed),
        cache_enabled: cache.is_enabled() || !opts.no_cache && cache.dir().is_some(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{AxisScale, InputStateConfig, SweepAxis};

    fn base_config() -> ScenarioConfig {
        toml::from_str(
            r#"
                scenario = "custom"

                [geometry]
                accel_i = 0.1
                accel_ii = 0.1
            "#,
        )
        .unwrap()
    }

    #[test]
    fn grid_expansion_orders_points_with_the_last_axis_fastest() {
        let mut cfg = base_config();
        cfg.input_state = InputStateConfig::SqueezedThermal { r: 0.0, n: 0.0 };
        cfg.sweep = vec![
            SweepAxis {
                name: AxisName::R,
                min: 0.0,
                max: 1.0,
                points: 2,
                scale: AxisScale::Lin,
            },
            SweepAxis {
                name: AxisName::N,
                min: 0.0,
                max: 2.0,
                points: 3,
                scale: AxisScale::Lin,
            },
        ];
        let points = expand_grid(&cfg);
        assert_eq!(points.len(), 6);
        let rn: Vec<(f64, f64)> = points.iter().map(|p| (p.r, p.n)).collect();
        assert_eq!(
            rn,
            vec![
                (0.0, 0.0),
                (0.0, 1.0),
                (0.0, 2.0),
                (1.0, 0.0),
                (1.0, 1.0),
                (1.0, 2.0)
            ]
        );
        assert!(points.iter().enumerate().all(|(i, p)| p.index == i));
    }

    #[test]
    fn empty_sweep_yields_the_single_base_point() {
        let cfg = base_config();
        let points = expand_grid(&cfg);
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].accel_i, 0.1);
        assert_eq!(points[0].separation, 0.0);
    }

    #[test]
    fn fixed_span_recomputes_the_separation_from_the_accelerations() {
        let mut cfg = base_config();
        cfg.fixed_span = Some(20.0);
        cfg.sweep = vec![SweepAxis {
            name: AxisName::Accel,
            min: 0.1,
            max: 0.2,
            points: 2,
            scale: AxisScale::Lin,
        }];
        let points = expand_grid(&cfg);
        assert_eq!(points[0].separation, 0.0);
        assert_eq!(points[1].separation, 10.0);
    }

    #[test]
    fn failed_rows_format_as_nan_and_keep_the_column_count() {
        let cfg = base_config();
        let p = expand_grid(&cfg)[0];
        let rec = PointRecord::failed(p, "broke, badly".to_string());
        let row = csv_row(&cfg, &rec);
        let header_cols = CSV_HEADER.split(',').count();
        assert_eq!(row.split(',').count(), header_cols);
        assert!(row.contains("broke; badly"));
        assert!(row.contains("nan"));
    }
}
