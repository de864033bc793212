mod common;

use std::sync::OnceLock;

use proptest::prelude::*;
use qdsource_core::linalg::{self, CMatrix, C64};
use qdsource_core::model::SystemModel;
use qdsource_core::phonon::PhononBath;
use qdsource_core::solver::Generator;
use qdsource_core::units::{ns2_to_ps2, ps2_to_ns2, UnitSystem};
use qdsource_core::{ModelParams, PulseShape};

fn bath() -> &'static PhononBath {
    static BATH: OnceLock<PhononBath> = OnceLock::new();
    BATH.get_or_init(|| {
        let p = ModelParams::baseline();
        PhononBath::with_defaults(p.alpha, p.omega_b, p.temperature).unwrap()
    })
}

fn hermitian(d: usize, entries: &[(f64, f64)]) -> CMatrix {
    let m = CMatrix::from_fn(d, |i, j| {
        let (re, im) = entries[(i * d + j) % entries.len()];
        C64::new(re, im)
    });
    m.hermitian_part()
}

/// A random density matrix: M M† / Tr.
fn density(d: usize, entries: &[(f64, f64)]) -> CMatrix {
    let m = CMatrix::from_fn(d, |i, j| {
        let (re, im) = entries[(i * d + j) % entries.len()];
        C64::new(re, im)
    });
    let rho = m.matmul(&m.adjoint());
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (
        0.0..100.0f64,
        0.0..400.0f64,
        0.0..200.0f64,
        -300.0..300.0f64,
        0.0..5.0f64,
        0.0..50.0f64,
        prop_oneof![Just(PulseShape::SawtoothRising), Just(PulseShape::SawtoothFalling), Just(PulseShape::Gaussian)],
    )
        .prop_map(|(g, l, p, delta, gp, kappa, shape)| ModelParams {
            g_prime: g,
            omega_l_prime: l,
            omega_p_max_prime: p,
            delta,
            gamma_prime_0: gp,
            kappa,
            pulse_shape: shape,
            ..ModelParams::baseline()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unit_round_trips(e in -1e4..1e4f64, a in 0.0..1.0f64) {
        let u = UnitSystem::STANDARD;
        prop_assert!((u.rate_to_microev(u.microev_to_rate(e)) - e).abs() <= 1e-12 * e.abs().max(1.0));
        prop_assert!((u.rate_to_mev(u.mev_to_rate(e)) - e).abs() <= 1e-12 * e.abs().max(1.0));
        prop_assert!((ns2_to_ps2(ps2_to_ns2(a)) - a).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(
        params in params_strategy(),
        phonons in any::<bool>(),
        t in 0.0..0.3f64,
        entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 7..31),
    ) {
        let model = if phonons {
            SystemModel::new(params, Some(bath().clone())).unwrap()
        } else {
            SystemModel::new(ModelParams { phonons_enabled: false, ..params }, None).unwrap()
        };
        let gen = Generator::at(&model, t).unwrap();
        let rho = density(model.dim(), &entries);
        let l = gen.apply(&rho);
        let scale = l.max_abs().max(1.0);
        prop_assert!(l.trace().norm() < 1e-10 * scale, "trace {}", l.trace());
        prop_assert!(l.hermiticity_error() < 1e-10 * scale);
        // Hamiltonian is Hermitian for every time and parameter set.
        prop_assert!(model.hamiltonian(t).hermiticity_error() < 1e-12);
    }

    #[test]
    fn eigendecomposition_reconstructs(
        entries in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 5..40),
        d in 2usize..14,
    ) {
        let h = hermitian(d, &entries);
        let e = linalg::eigh(&h).unwrap();
        let diag = CMatrix::from_real_diagonal(&e.values);
        let back = e.vectors.matmul(&diag).matmul(&e.vectors.adjoint());
        prop_assert!((&back - &h).max_abs() < 1e-10 * h.max_abs().max(1.0));
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
