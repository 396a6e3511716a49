use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DeformationScenario, FamilyInput, ScenarioError, TestForm};
use crate::bundle::ValuedForm;
use crate::coeff::Chart;
use crate::random::{self, Shape};

/// Bounds for [`random_scenario`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomParams {
    pub n: usize,
    pub r: usize,
    pub order: usize,
    pub shape: Shape,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { n: 2, r: 1, order: 2, shape: Shape::default() }
    }
}

/// Reproducible geometric scenario: random `z_t`, `w`, Christoffel symbols
/// and a `(2,0)`-flat `θ`, plus one scalar and one `E`-valued closed form.
pub fn random_scenario(params: RandomParams, seed: u64) -> Result<DeformationScenario, ScenarioError> {
    let chart = Chart::new(params.n, params.order).map_err(|source| ScenarioError::Kernel { path: "n".into(), source })?;
    let (r, shape) = (params.r.max(1), params.shape);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let connection = random::connection(&mut rng, chart, r, shape, true);
    let zt = random::trivialization(&mut rng, chart, shape);
    let w = random::transition(&mut rng, chart, r, shape);
    let mut forms = BTreeMap::new();
    let p = rng.gen_range(0..=params.n);
    forms.insert("s".to_string(), TestForm { p, q: 0, value: ValuedForm::scalar(random::closed_form(&mut rng, chart, p, 0, shape)) });
    let p = rng.gen_range(0..=params.n);
    let comps = (0..r).map(|_| random::closed_form(&mut rng, chart, p, 0, shape)).collect();
    let value = ValuedForm::e_valued(comps).map_err(|source| ScenarioError::Kernel { path: "forms.e".into(), source })?;
    forms.insert("e".to_string(), TestForm { p, q: 0, value });
    DeformationScenario::new(chart, r, connection, FamilyInput::Geometric { zt, w }, forms, Vec::new(), seed)
}
