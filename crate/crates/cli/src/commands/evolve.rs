//! `qvlab evolve`: integrate the scenario and store snapshots.

use log::info;

use qvlab_core::evolvers::{run_dirac, run_pauli, run_schrodinger};

use super::{core_error, Context};
use crate::error::CliError;
use crate::output::{ensure_dir, snapshot_name, Manifest, OutputFile, Timer};
use crate::presets::{self, State};

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let sc = ctx.scenario();
    sc.validate()?;
    let mut timer = Timer::new();
    let grid = sc.grid()?;
    let consts = sc.constants()?;
    let params = sc.evolution()?;
    let spec = sc
        .initial
        .as_ref()
        .ok_or_else(|| CliError::Config("`initial` is required for evolve".into()))?;
    let state = presets::initial_state(spec, &grid, &consts)?;
    let gauge = presets::gauge(sc, &grid, &consts)?;
    timer.lap("setup");

    info!("evolving {} for {} steps", state.equation(), params.steps);
    let ctx_msg = "evolution";
    let series: Vec<(f64, State)> = match &state {
        State::Scalar(p) => run_schrodinger(p, &gauge, &consts, &params)
            .map_err(core_error(ctx_msg))?
            .into_iter()
            .map(|(t, p)| (t, State::Scalar(p)))
            .collect(),
        State::Spinor(p) => run_pauli(p, &gauge, &consts, &params)
            .map_err(core_error(ctx_msg))?
            .into_iter()
            .map(|(t, p)| (t, State::Spinor(p)))
            .collect(),
        State::Bispinor(p) => {
            let external = gauge.u.max_abs() > 0.0 || gauge.a_psi.max_abs() > 0.0 || gauge.a_psi.has_affine();
            let pot = if external {
                Some(presets::four_potential(&gauge, &consts)?)
            } else {
                None
            };
            run_dirac(p, pot.as_ref(), &consts, &params)
                .map_err(core_error(ctx_msg))?
                .into_iter()
                .map(|(t, p)| (t, State::Bispinor(p)))
                .collect()
        }
    };
    timer.lap("evolve");

    ensure_dir(&ctx.out)?;
    let mut manifest = Manifest::new("evolve", &ctx.loaded, ctx.seed);
    manifest.equation = Some(state.equation());
    for (i, (t, s)) in series.iter().enumerate() {
        let name = snapshot_name(i);
        s.write(*t, &ctx.out.join(&name))?;
        manifest.outputs.push(OutputFile {
            file: name,
            time: Some(*t),
        });
    }
    timer.lap("write");
    manifest.timings = timer.finish();
    let path = manifest.write(&ctx.out)?;
    println!(
        "evolve: {} snapshots of {} written to {} (manifest {})",
        series.len(),
        state.equation(),
        ctx.out.display(),
        path.display()
    );
    Ok(())
}
