//! `qvlab trace`: trajectories of seeded samples through a stored series.

use std::fs::File;
use std::io::BufWriter;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qvlab_core::diagnostics::{em_fields, FieldFamily, PotentialSnapshot};
use qvlab_core::trajectories::{
    advect_ensemble, force_path, path_deviation, sample_density, EMSeries, FieldSeries, Interpolation, Path,
};

use super::analysis::{flows, scalar_series};
use super::{core_error, Context};
use crate::config::TraceMethod;
use crate::error::CliError;
use crate::output::{ensure_dir, load_series, write_json, Manifest, OutputFile, Timer};
use crate::presets;

#[derive(Serialize)]
struct TraceSummary {
    scenario: String,
    config_sha256: String,
    seed: u64,
    samples: usize,
    dt: f64,
    steps: usize,
    method: &'static str,
    interpolation: Interpolation,
    /// Paths that froze inside a node region at least once.
    masked_flow: usize,
    masked_force: usize,
    /// Largest minimum-image distance between the two integrators over all paths.
    max_deviation: Option<f64>,
    mean_deviation: Option<f64>,
}

fn write_path(dir: &std::path::Path, file: &str, path: &Path) -> Result<(), CliError> {
    let full = dir.join(file);
    let f = File::create(&full).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", full.display())))?;
    path.write_csv(BufWriter::new(f)).map_err(core_error("writing path"))
}

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let sc = ctx.scenario();
    sc.validate()?;
    let spec = sc
        .trace
        .as_ref()
        .ok_or_else(|| CliError::Config("`trace` is required for trace".into()))?;
    let mut timer = Timer::new();
    let grid = sc.grid()?;
    let consts = sc.constants()?;
    let gauge = presets::gauge(sc, &grid, &consts)?;
    let series = load_series(&ctx.snapshot_dir(), &grid)?;
    let t0 = series[0].0;
    let t1 = series[series.len() - 1].0;
    let steps = spec.steps.unwrap_or(((t1 - t0) / spec.dt + 1e-9).floor() as usize);
    let seed = ctx.seed.unwrap_or(0);
    timer.lap("load");

    let what = "trace";
    let flow = FieldSeries::from_flow(&flows(&series, &gauge, &consts)?, spec.interpolation).map_err(core_error(what))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = sample_density(&grid, &series[0].1.density(), spec.samples, &mut rng).map_err(core_error(what))?;

    let want_flow = spec.method != TraceMethod::Force;
    let want_force = spec.method != TraceMethod::Flow;
    let flow_paths = if want_flow {
        advect_ensemble(&starts, &flow, spec.dt, steps).map_err(core_error(what))?
    } else {
        Vec::new()
    };
    let force_paths = if want_force {
        let s = scalar_series(&series, "the force method")?;
        let pots: Vec<PotentialSnapshot> = s
            .iter()
            .map(|(t, p)| PotentialSnapshot::from_psi(*t, gauge.clone(), p, &consts))
            .collect::<Result<_, _>>()
            .map_err(core_error(what))?;
        let em = em_fields(&pots, &consts).map_err(core_error(what))?;
        let ems = EMSeries::from_em(&em, FieldFamily::Total, spec.interpolation).map_err(core_error(what))?;
        starts
            .iter()
            .map(|r0| {
                let v0 = flow.eval(*r0, t0).unwrap_or([0.0; 3]);
                force_path(*r0, v0, &ems, consts.gamma, spec.dt, steps)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(core_error(what))?
    } else {
        Vec::new()
    };
    timer.lap("integrate");

    let deviations: Vec<f64> = flow_paths
        .iter()
        .zip(&force_paths)
        .map(|(a, b)| path_deviation(a, b, &grid))
        .collect::<Result<_, _>>()
        .map_err(core_error(what))?;

    ensure_dir(&ctx.out)?;
    let dir = ctx.out.join("paths");
    ensure_dir(&dir)?;
    let mut manifest = Manifest::new("trace", &ctx.loaded, Some(seed));
    manifest.equation = Some(series[0].1.equation());
    for (prefix, paths) in [("flow", &flow_paths), ("force", &force_paths)] {
        for (i, p) in paths.iter().enumerate() {
            let file = format!("{prefix}_{i:05}.csv");
            write_path(&dir, &file, p)?;
            manifest.outputs.push(OutputFile {
                file: format!("paths/{file}"),
                time: None,
            });
        }
    }
    let masked = |paths: &[Path]| paths.iter().filter(|p| p.masked.iter().any(|m| *m)).count();
    let summary = TraceSummary {
        scenario: sc.name.clone(),
        config_sha256: ctx.loaded.sha256.clone(),
        seed,
        samples: spec.samples,
        dt: spec.dt,
        steps,
        method: match spec.method {
            TraceMethod::Flow => "flow",
            TraceMethod::Force => "force",
            TraceMethod::Both => "both",
        },
        interpolation: spec.interpolation,
        masked_flow: masked(&flow_paths),
        masked_force: masked(&force_paths),
        max_deviation: (!deviations.is_empty()).then(|| deviations.iter().cloned().fold(0.0, f64::max)),
        mean_deviation: (!deviations.is_empty()).then(|| deviations.iter().sum::<f64>() / deviations.len() as f64),
    };
    write_json(&ctx.out.join("trace_summary.json"), &summary)?;
    manifest.outputs.push(OutputFile {
        file: "trace_summary.json".into(),
        time: None,
    });
    timer.lap("write");
    manifest.timings = timer.finish();
    manifest.write(&ctx.out)?;
    match summary.max_deviation {
        Some(d) => println!("trace: {} samples, {steps} steps, max cross-method deviation {d:.3e}", spec.samples),
        None => println!("trace: {} samples, {steps} steps", spec.samples),
    }
    Ok(())
}
