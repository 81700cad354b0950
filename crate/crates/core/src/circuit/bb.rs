use super::memory::{ancilla_memory_circuit, Schedule};
use super::{Basis, Circuit, NoiseModel};
use crate::codes::CssCode;
use crate::error::{Error, Result};
use crate::partition::Partition;

/// BB memory experiment with the depth-8 cycle; see [`build_bb_circuit_with_schedule`].
pub fn build_bb_circuit(
    code: &CssCode,
    rounds: usize,
    noise: &NoiseModel,
    partition: Option<&Partition>,
    basis: Basis,
) -> Result<Circuit> {
    build_bb_circuit_with_schedule(
        code,
        &Schedule::bb_depth8(),
        rounds,
        noise,
        partition,
        basis,
    )
}

/// BB memory experiment under an arbitrary check schedule. Requires three
/// `A` and three `B` terms (six interaction slots per check).
pub fn build_bb_circuit_with_schedule(
    code: &CssCode,
    schedule: &Schedule,
    rounds: usize,
    noise: &NoiseModel,
    partition: Option<&Partition>,
    basis: Basis,
) -> Result<Circuit> {
    if code
        .x_slots
        .iter()
        .chain(&code.z_slots)
        .any(|s| s.len() != 6)
    {
        return Err(Error::InvalidCode(
            "BB circuits need six interaction slots per check".into(),
        ));
    }
    ancilla_memory_circuit(code, schedule, rounds, noise, partition, basis)
}
