//! Figures of merit at the baseline point, with and without phonons.

use qdsource_core::pipeline::simulate;
use qdsource_core::ModelParams;

fn main() {
    for phonons in [false, true] {
        let params = ModelParams { phonons_enabled: phonons, ..ModelParams::baseline() };
        let started = std::time::Instant::now();
        match simulate(params) {
            Ok(out) => println!(
                "phonons = {phonons}: N_e = {:.4}, I = {:.4}, <B> = {:.4} ({:.1} s)",
                out.figures.photon_number,
                out.figures.indistinguishability,
                out.figures.mean_displacement,
                started.elapsed().as_secs_f64()
            ),
            Err(e) => eprintln!("phonons = {phonons}: {e}"),
        }
    }
}
