use rand::RngCore;

use crate::error::Result;
use crate::family::{PriorFamily, RandomDensity};
use crate::geometry::Observation;

/// One prior draw `f` and `n` i.i.d. points from `f`.
pub fn sample_exchangeable(
    prior: &dyn PriorFamily,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<(Box<dyn RandomDensity>, Vec<Observation>)> {
    let f = prior.sample(rng)?;
    let data = f.sample_points(n, rng)?;
    Ok((f, data))
}
