use rindler_core::bogoliubov::{mode_overlaps, MinkRindCoeff, Orientation};
use rindler_core::modes::{
    build_input_mode, build_passive_output_mode, rindler_spectrum, ModeKind, ModeParams, Region,
};
use rindler_core::noise::{cross_counter, unruh_diagonal, Geometry};
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let accel = 0.1;
    let mk = |region: Region, kind: ModeKind, acc: f64| ModeParams {
        region,
        x0: 1.0 / accel,
        length: 2.0,
        omega0: 25.01f64.sqrt(),
        mass: 0.1,
        accel: acc,
        kind,
    };
    let region_ii = Orientation::Counter.second_region();
    let t0 = Instant::now();
    let phi_i = build_input_mode(&mk(Region::I, ModeKind::Inertial, 0.0))?;
    let phi_ii = build_input_mode(&mk(region_ii, ModeKind::Inertial, 0.0))?;
    println!("input packets: {:?}", t0.elapsed());

    let t = Instant::now();
    let out_i = build_passive_output_mode(&mk(Region::I, ModeKind::PassiveOutput, accel))?;
    println!("passive output packet I: {:?}", t.elapsed());

    let t = Instant::now();
    let spec_i = rindler_spectrum(&out_i, 1.0)?;
    println!(
        "rindler_spectrum I: {:?} ({} nodes)",
        t.elapsed(),
        spec_i.invariant_nus().len()
    );

    let t = Instant::now();
    let out_ii = build_passive_output_mode(&mk(region_ii, ModeKind::PassiveOutput, accel))?;
    let spec_ii = rindler_spectrum(&out_ii, 1.0)?;
    println!("output+spectrum II: {:?}", t.elapsed());

    let t = Instant::now();
    let coeff = MinkRindCoeff::new(Region::I, Orientation::Counter, 1.0, 0.0, 0.1)?;
    let ov = mode_overlaps(&phi_i, &phi_ii, &spec_i, &spec_ii, &coeff)?;
    println!("mode_overlaps: {:?} (alpha_i = {:?})", t.elapsed(), ov.alpha_i);

    let t = Instant::now();
    let n_i = unruh_diagonal(&spec_i);
    let n_ii = unruh_diagonal(&spec_ii);
    println!("unruh_diagonal x2: {:?} (n_i = {n_i:.3e}, n_ii = {n_ii:.3e})", t.elapsed());

    for d in [0.0, 1.0, 5.0] {
        let geom = Geometry::new(Orientation::Counter, d, accel, accel)?;
        let t = Instant::now();
        let cross = cross_counter(&spec_i, &spec_ii, &geom)?;
        println!(
            "cross_counter D={d}: {:?} (plus = {:.3e}, err = {:.1e}, conv = {})",
            t.elapsed(),
            cross.plus.norm(),
            cross.error,
            cross.converged
        );
    }
    Ok(())
}
