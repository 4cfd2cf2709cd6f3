//! Time integrators: heat and Lamé flows, transport, and the full barotropic
//! compressible system, with trajectories and checkpoint files.

pub mod checkpoint;
pub mod cns;
pub mod heat;
pub mod pressure;
pub mod trajectory;
pub mod transport;

pub use cns::{cns_solve, CnsSolution, CnsState, Horizon, SolverConfig};
pub use heat::{heat_solve, lame_solve, Forcing};
pub use pressure::{PressureLaw, Viscosity};
pub use trajectory::Trajectory;
pub use transport::{commutator, transport_solve, TransportOptions, Velocity};

use crate::error::{Error, Result};

/// Output times `0, dt, 2dt, …` with the last step shortened to land on the
/// horizon.
pub fn time_grid(horizon: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && horizon > 0.0 && dt <= horizon * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!("need 0 < dt ≤ T, got dt={dt}, T={horizon}")));
    }
    let steps = ((horizon / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut t: Vec<f64> = (0..steps).map(|i| i as f64 * dt).collect();
    t.push(horizon);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_hits_horizon() {
        assert_eq!(time_grid(1.0, 0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let t = time_grid(1.0, 0.3).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(*t.last().unwrap(), 1.0);
        assert!(time_grid(1.0, 2.0).is_err());
        assert!(time_grid(1.0, 0.0).is_err());
    }
}
