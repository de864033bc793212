//! One parameter point end to end: bath, model, trajectory, correlators, and
//! the figures of merit.

use alloc::vec::Vec;

use crate::correlators::{self, CorrelationGrid, Emission, RegressionPlan};
use crate::error::{Error, Result};
use crate::model::SystemModel;
use crate::phonon::{BathSettings, PhononBath};
use crate::solver::{GridSettings, Propagator, Trajectory};
use crate::units::{ModelParams, UnitSystem};

/// Figures of merit of one run.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Figures {
    pub photon_number: f64,
    pub indistinguishability: f64,
    pub mean_displacement: f64,
    pub polaron_shift: f64,
}

/// Builds the bath for `params`, or `None` with phonons off.
pub fn build_bath(params: &ModelParams, settings: BathSettings) -> Result<Option<PhononBath>> {
    if !params.phonons_enabled {
        return Ok(None);
    }
    PhononBath::new(params.alpha, params.omega_b, params.temperature, &UnitSystem::STANDARD, settings)
        .map(Some)
}

/// Builds the model, constructing the bath when needed.
pub fn build_model(params: ModelParams, settings: BathSettings) -> Result<SystemModel> {
    let bath = build_bath(&params, settings)?;
    SystemModel::new(params, bath)
}

/// Full result of a run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub emission: Emission,
    pub correlations: CorrelationGrid,
    pub figures: Figures,
}

/// Row evaluator for [`correlators::RegressionPlan`]; the std companion
/// supplies a parallel one.
pub trait RowExecutor {
    fn run(&self, plan: &RegressionPlan<'_, '_>) -> Vec<correlators::CorrelationRow>;
}

/// Evaluates rows in order on the calling thread.
pub struct Sequential;

impl RowExecutor for Sequential {
    fn run(&self, plan: &RegressionPlan<'_, '_>) -> Vec<correlators::CorrelationRow> {
        (0..plan.rows()).map(|k| plan.row(k)).collect()
    }
}

/// Trajectory, N_e, correlators and I for an already-built model.
pub fn run_model(
    model: &SystemModel,
    grid: &GridSettings,
    executor: &dyn RowExecutor,
) -> Result<RunOutput> {
    if model.params.n_max < 2 {
        return Err(Error::invalid("n_max", "two-photon correlators need n_max >= 2"));
    }
    let prop = Propagator::new(model, grid)?;
    let trajectory = prop.propagate()?;
    let emission = correlators::emitted_photon_number(&trajectory, &model.ops.number, model.params.kappa)?;
    let plan = RegressionPlan::new(&prop, &trajectory)?;
    let correlations = plan.assemble(executor.run(&plan));
    let indistinguishability = correlators::indistinguishability(&correlations)?;
    let figures = Figures {
        photon_number: emission.photon_number,
        indistinguishability,
        mean_displacement: model.mean_displacement,
        polaron_shift: model.bath.as_ref().map_or(0.0, |b| b.polaron_shift),
    };
    Ok(RunOutput { trajectory, emission, correlations, figures })
}

/// Builds and runs `params` sequentially with default numerics.
pub fn simulate(params: ModelParams) -> Result<RunOutput> {
    let model = build_model(params, BathSettings::default())?;
    run_model(&model, &GridSettings::default(), &Sequential)
}
