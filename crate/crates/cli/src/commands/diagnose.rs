//! `qvlab diagnose`: residual reports for a stored snapshot series.

use std::collections::BTreeSet;

use qvlab_core::decomposition::current_bispinor;
use qvlab_core::diagnostics::{
    continuity_residual, em_fields, four_current_divergence, gauge_residuals, hamilton_jacobi_series,
    self_consistency_residual, ResidualReport,
};
use qvlab_core::fields::{ComplexScalarField, MultiComponent};

use super::analysis::{flows, pool, scalar_series, vortex_series};
use super::{core_error, Context};
use crate::config::DiagnosticKind;
use crate::error::CliError;
use crate::output::{ensure_dir, load_series, write_json, write_profile, Manifest, OutputFile, Timer};
use crate::presets::{self, State};

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let sc = ctx.scenario();
    sc.validate()?;
    let mut timer = Timer::new();
    let grid = sc.grid()?;
    let consts = sc.constants()?;
    let gauge = presets::gauge(sc, &grid, &consts)?;
    let mut seen = BTreeSet::new();
    let kinds: Vec<DiagnosticKind> = sc.diagnostics.iter().copied().filter(|k| seen.insert(*k)).collect();
    ensure_dir(&ctx.out)?;
    let mut manifest = Manifest::new("diagnose", &ctx.loaded, ctx.seed);
    if kinds.is_empty() {
        manifest.timings = timer.finish();
        manifest.write(&ctx.out)?;
        println!("diagnose: no diagnostics requested");
        return Ok(());
    }
    let series = load_series(&ctx.snapshot_dir(), &grid)?;
    manifest.equation = Some(series[0].1.equation());
    timer.lap("load");

    let mut reports: Vec<ResidualReport> = Vec::new();
    for kind in kinds {
        let what = kind.name();
        match kind {
            DiagnosticKind::Continuity => {
                let f = flows(&series, &gauge, &consts)?;
                reports.push(continuity_residual(&f).map_err(core_error(what))?);
            }
            DiagnosticKind::HamiltonJacobi => {
                let s: Vec<(f64, ComplexScalarField)> = scalar_series(&series, what)?
                    .into_iter()
                    .map(|(t, p)| (t, p.clone()))
                    .collect();
                reports.push(hamilton_jacobi_series(&s, &gauge, &consts).map_err(core_error(what))?);
            }
            DiagnosticKind::LorentzGauge => {
                let s = scalar_series(&series, what)?;
                let v = vortex_series(&s, &gauge, &consts, sc.gauge.chi)?;
                reports.extend(gauge_residuals(&v.snapshots, &consts).map_err(core_error(what))?);
            }
            DiagnosticKind::SelfConsistency => {
                let s = scalar_series(&series, what)?;
                let v = vortex_series(&s, &gauge, &consts, sc.gauge.chi)?;
                let em = em_fields(&v.snapshots, &consts).map_err(core_error(what))?;
                let per: Vec<ResidualReport> = em
                    .iter()
                    .zip(&s)
                    .map(|((_, e), (_, p))| self_consistency_residual(&e.e_psi, &p.density(), &consts))
                    .collect::<Result<_, _>>()
                    .map_err(core_error(what))?;
                let dt = s.get(1).map(|x| x.0 - s[0].0);
                reports.push(pool(what, &per, dt));
            }
            DiagnosticKind::FourCurrentDivergence => {
                let currents: Vec<_> = series
                    .iter()
                    .map(|(t, st)| match st {
                        State::Bispinor(p) => Ok((*t, current_bispinor(p, consts.c))),
                        other => Err(CliError::Config(format!(
                            "{what} needs a dirac series, the snapshots hold {}",
                            other.equation()
                        ))),
                    })
                    .collect::<Result<_, _>>()?;
                reports.push(four_current_divergence(&currents, consts.c).map_err(core_error(what))?);
            }
        }
    }
    timer.lap("diagnose");

    for r in &reports {
        let file = format!("report_{}.json", r.name);
        write_json(&ctx.out.join(&file), r)?;
        manifest.outputs.push(OutputFile { file, time: None });
        if sc.profiles {
            let file = format!("profile_{}.csv", r.name);
            if write_profile(&ctx.out.join(&file), &grid, r)? {
                manifest.outputs.push(OutputFile { file, time: None });
            }
        }
        println!(
            "{:<24} l2 {:.3e}  linf {:.3e}  masked {:.3}  points {}",
            r.name, r.l2, r.linf, r.mask_fraction, r.n_points
        );
    }
    timer.lap("write");
    manifest.timings = timer.finish();
    manifest.write(&ctx.out)?;
    Ok(())
}
