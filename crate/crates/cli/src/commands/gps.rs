//! `qvlab gps`: the Taylor evolution matrix and the state it propagates.

use serde::Serialize;

use qvlab_core::evolvers::{gps_apply, gps_matrix};

use super::{core_error, Context};
use crate::error::CliError;
use crate::output::{ensure_dir, write_json, Manifest, OutputFile, Timer};

#[derive(Serialize)]
struct GpsFrame {
    t: f64,
    det: f64,
    matrix: Vec<Vec<f64>>,
    state: Vec<f64>,
}

#[derive(Serialize)]
struct GpsReport {
    scenario: String,
    config_sha256: String,
    order: usize,
    initial: Vec<f64>,
    frames: Vec<GpsFrame>,
}

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let sc = ctx.scenario();
    sc.validate()?;
    let spec = sc
        .gps
        .as_ref()
        .ok_or_else(|| CliError::Config("`gps` is required for gps".into()))?;
    let timer = Timer::new();
    let mut frames = Vec::with_capacity(spec.times.len());
    for &t in &spec.times {
        if !t.is_finite() {
            return Err(CliError::Config(format!("`gps.times` entries must be finite, got {t}")));
        }
        let m = gps_matrix(spec.order, t).map_err(core_error("gps"))?;
        let state = gps_apply(&m, &spec.initial).map_err(core_error("gps"))?;
        println!("t = {t:<10} det = {}  x = {:.12e}", m.det(), state[0]);
        frames.push(GpsFrame {
            t,
            det: m.det(),
            matrix: m.entries,
            state,
        });
    }
    ensure_dir(&ctx.out)?;
    let report = GpsReport {
        scenario: sc.name.clone(),
        config_sha256: ctx.loaded.sha256.clone(),
        order: spec.order,
        initial: spec.initial.clone(),
        frames,
    };
    write_json(&ctx.out.join("gps.json"), &report)?;
    let mut manifest = Manifest::new("gps", &ctx.loaded, ctx.seed);
    manifest.outputs.push(OutputFile {
        file: "gps.json".into(),
        time: None,
    });
    manifest.timings = timer.finish();
    manifest.write(&ctx.out)?;
    Ok(())
}
