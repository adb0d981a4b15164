//! `qvlab fields`: vortex potentials, `E_psi`/`B_psi` and their split.

use serde::Serialize;

use qvlab_core::diagnostics::{em_fields, gauge_residuals, self_consistency_residual, ResidualReport};
use qvlab_core::fields::MultiComponent;

use super::analysis::{pool, scalar_series, vortex_series};
use super::{core_error, Context};
use crate::error::CliError;
use crate::output::{ensure_dir, load_series, write_json, Manifest, OutputFile, Timer};
use crate::presets;

#[derive(Serialize)]
struct FrameSummary {
    time: f64,
    max_e_psi: f64,
    max_b_psi: f64,
    max_e_quantum: f64,
    max_b_quantum: f64,
    max_a_quantum: f64,
    /// `max |E_psi - E - E_Q|`, `max |B_psi - B - B_Q|`.
    split_error: f64,
    helmholtz_error: f64,
}

#[derive(Serialize)]
struct FieldsSummary {
    scenario: String,
    config_sha256: String,
    chi: String,
    frames: Vec<FrameSummary>,
    reports: Vec<ResidualReport>,
}

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let sc = ctx.scenario();
    sc.validate()?;
    let mut timer = Timer::new();
    let grid = sc.grid()?;
    let consts = sc.constants()?;
    let gauge = presets::gauge(sc, &grid, &consts)?;
    let series = load_series(&ctx.snapshot_dir(), &grid)?;
    let s = scalar_series(&series, "fields")?;
    timer.lap("load");

    let what = "fields";
    let v = vortex_series(&s, &gauge, &consts, sc.gauge.chi)?;
    let em = em_fields(&v.snapshots, &consts).map_err(core_error(what))?;
    let mut frames = Vec::with_capacity(em.len());
    let mut consistency = Vec::with_capacity(em.len());
    for (i, (t, e)) in em.iter().enumerate() {
        frames.push(FrameSummary {
            time: *t,
            max_e_psi: e.e_psi.max_abs(),
            max_b_psi: e.b_psi.max_abs(),
            max_e_quantum: e.e_quantum.max_abs(),
            max_b_quantum: e.b_quantum.max_abs(),
            max_a_quantum: v.a_quantum_max[i],
            split_error: e.split_error().map_err(core_error(what))?,
            helmholtz_error: v.helmholtz_error[i],
        });
        consistency.push(self_consistency_residual(&e.e_psi, &s[i].1.density(), &consts).map_err(core_error(what))?);
    }
    let mut reports: Vec<ResidualReport> = gauge_residuals(&v.snapshots, &consts).map_err(core_error(what))?.into();
    let dt = s.get(1).map(|x| x.0 - s[0].0);
    reports.push(pool("self_consistency", &consistency, dt));
    timer.lap("fields");

    ensure_dir(&ctx.out)?;
    let mut manifest = Manifest::new("fields", &ctx.loaded, ctx.seed);
    manifest.equation = Some("schrodinger");
    if sc.profiles {
        let axes = ["x", "y", "z"];
        let dim = grid.dim();
        for (i, (t, e)) in em.iter().enumerate() {
            let file = format!("fields_{i:05}.csv");
            let mut out = String::new();
            out.push_str(&axes[..dim].join(","));
            out.push_str(",ex,ey,ez,bx,by,bz,eqx,eqy,eqz,q,masked\n");
            for idx in 0..grid.len() {
                let r = grid.coords(idx);
                for x in &r[..dim] {
                    out.push_str(&format!("{x},"));
                }
                let (ep, bp, eq) = (e.e_psi.at(idx), e.b_psi.at(idx), e.e_quantum.at(idx));
                for c in ep.iter().chain(&bp).chain(&eq) {
                    out.push_str(&format!("{c},"));
                }
                let q = v.snapshots[i].quantum.values[idx];
                out.push_str(&format!("{q},{}\n", u8::from(!e.mask[idx])));
            }
            let path = ctx.out.join(&file);
            std::fs::write(&path, out).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
            manifest.outputs.push(OutputFile { file, time: Some(*t) });
        }
    }
    let summary = FieldsSummary {
        scenario: sc.name.clone(),
        config_sha256: ctx.loaded.sha256.clone(),
        chi: format!("{:?}", sc.gauge.chi).to_lowercase(),
        frames,
        reports,
    };
    write_json(&ctx.out.join("fields_summary.json"), &summary)?;
    manifest.outputs.push(OutputFile {
        file: "fields_summary.json".into(),
        time: None,
    });
    for r in &summary.reports {
        println!("{:<24} l2 {:.3e}  linf {:.3e}", r.name, r.l2, r.linf);
    }
    timer.lap("write");
    manifest.timings = timer.finish();
    manifest.write(&ctx.out)?;
    Ok(())
}
