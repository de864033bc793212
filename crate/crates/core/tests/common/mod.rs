#![allow(dead_code)]

use qdsource_core::model::SystemModel;
use qdsource_core::phonon::PhononBath;
use qdsource_core::ModelParams;

/// Baseline with every coherent coupling and every rate switched off.
pub fn bare_params() -> ModelParams {
    ModelParams {
        gamma_x: 0.0,
        gamma_xx: 0.0,
        gamma_prime_0: 0.0,
        kappa: 0.0,
        g_prime: 0.0,
        omega_l_prime: 0.0,
        omega_p_max_prime: 0.0,
        phonons_enabled: false,
        ..ModelParams::baseline()
    }
}

pub fn free_model(p: ModelParams) -> SystemModel {
    SystemModel::new(ModelParams { phonons_enabled: false, ..p }, None).unwrap()
}

pub fn phonon_model(p: ModelParams) -> SystemModel {
    let bath = PhononBath::with_defaults(p.alpha, p.omega_b, p.temperature).unwrap();
    SystemModel::new(ModelParams { phonons_enabled: true, ..p }, Some(bath)).unwrap()
}
