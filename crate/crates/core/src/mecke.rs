//! One-replication estimators of both sides of the Mecke-type identity for
//! the birth-time marked maximal polytopes of a local STIT process.
//!
//! The left side sums a functional over the divisions of one trajectory. The
//! right side integrates over time the expected value of the same
//! functional for a hypothetical division of each present cell, weighted by
//! the cell's division rate; hyperplanes are drawn from `Λ_z`, and for
//! functionals that look at the future of the new face, the two new cells are
//! continued by independent fresh runs.
//!
//! Only divisions of cells whose closure lies in the localization window
//! count, on both sides.

use alloc::vec::Vec;
use core::fmt;
use rand::Rng;

use crate::engine::{EngineError, Simulator, TessellationState};
use crate::geometry::{ConvexPolytope, Face, FacetSource, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeckeError {
    /// Time grid not increasing within `[0, horizon]` or too short.
    BadGrid,
    BadHorizon,
    ZeroDraws,
    Engine(EngineError),
}

impl fmt::Display for MeckeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeckeError::BadGrid => f.write_str("time grid must increase from 0 to the horizon"),
            MeckeError::BadHorizon => f.write_str("horizon must be positive and finite"),
            MeckeError::ZeroDraws => f.write_str("at least one hyperplane draw per cell is needed"),
            MeckeError::Engine(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MeckeError {}

impl From<EngineError> for MeckeError {
    fn from(e: EngineError) -> Self {
        MeckeError::Engine(e)
    }
}

/// The functional `g` evaluated for a face born at time `s`.
#[derive(Debug, Clone, Copy)]
pub enum Functional {
    /// `φ(s)·ψ(measure of the face)·1{centre of the face ∈ B}`.
    Simple { phi: fn(f64) -> f64, psi: fn(f64) -> f64 },
    /// `1{centre ∈ B}·1{the face has exactly `count` internal vertices at the
    /// horizon}`. Planar only.
    Nested { count: usize },
}

/// Geometry shared by both sides.
#[derive(Debug, Clone)]
pub struct MeckeSetup<P> {
    pub window: P,
    /// Divisions count only if the divided cell lies in here.
    pub localization: P,
    /// The region `B` for face centres.
    pub region: P,
    pub horizon: f64,
}

impl<P> MeckeSetup<P> {
    fn check(&self) -> Result<(), MeckeError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(MeckeError::BadHorizon);
        }
        Ok(())
    }
}

fn localized<P: ConvexPolytope<D>, const D: usize>(setup: &MeckeSetup<P>, z: &P) -> bool {
    setup.localization.contains_polytope(z)
}

fn in_region<P: ConvexPolytope<D>, const D: usize>(setup: &MeckeSetup<P>, x: &Point<D>) -> bool {
    setup.region.contains_point(x, 0.0)
}

/// `Σ g` over the divisions of one trajectory on `[0, horizon]`.
pub fn lhs_replication<P, R, const D: usize>(
    sim: &Simulator<D>,
    setup: &MeckeSetup<P>,
    functional: &Functional,
    rng: &mut R,
) -> Result<f64, MeckeError>
where
    P: ConvexPolytope<D>,
    R: Rng + ?Sized,
{
    setup.check()?;
    let mut state = TessellationState::new(setup.window.clone())?;
    let mut total = 0.0;
    let mut watched = Vec::new();
    sim.advance_observed(&mut state, setup.horizon, rng, |ctx| {
        if !localized(setup, &ctx.parent.polytope) || !in_region(setup, &ctx.face.center()) {
            return;
        }
        match functional {
            Functional::Simple { phi, psi } => total += phi(ctx.time) * psi(ctx.face.measure()),
            Functional::Nested { .. } => watched.push(ctx.ledger_id),
        }
    })?;
    if let Functional::Nested { count } = functional {
        total = watched.iter().filter(|&&id| state.ledger()[id].internal_vertices.len() == *count).count() as f64;
    }
    Ok(total)
}

/// Trapezoid-rule estimate of `∫ Σ_z Λ([z]) E_{h∼Λ_z}[g] ds` along one
/// trajectory observed at the times of `grid` (from 0 to the horizon), with
/// `draws` hyperplanes per cell and grid time.
pub fn rhs_replication<P, R, const D: usize>(
    sim: &Simulator<D>,
    setup: &MeckeSetup<P>,
    functional: &Functional,
    grid: &[f64],
    draws: usize,
    rng: &mut R,
) -> Result<f64, MeckeError>
where
    P: ConvexPolytope<D>,
    R: Rng + ?Sized,
{
    setup.check()?;
    if draws == 0 {
        return Err(MeckeError::ZeroDraws);
    }
    let grid_ok = grid.len() >= 2
        && grid[0] == 0.0
        && grid[grid.len() - 1] == setup.horizon
        && grid.windows(2).all(|w| w[0] < w[1]);
    if !grid_ok {
        return Err(MeckeError::BadGrid);
    }
    let mut state = TessellationState::new(setup.window.clone())?;
    let mut values = Vec::with_capacity(grid.len());
    for &s in grid {
        sim.advance_to(&mut state, s, rng)?;
        let mut acc = 0.0;
        for cell in state.cells() {
            let z = &cell.polytope;
            if !localized(setup, z) {
                continue;
            }
            let rate = sim.measure().hit_rate(z).map_err(EngineError::from)?;
            let mut bracket = 0.0;
            for _ in 0..draws {
                bracket += bracket_value(sim, setup, functional, z, s, rng)?;
            }
            acc += rate * bracket / draws as f64;
        }
        values.push(acc);
    }
    Ok(grid.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum())
}

fn bracket_value<P, R, const D: usize>(
    sim: &Simulator<D>,
    setup: &MeckeSetup<P>,
    functional: &Functional,
    z: &P,
    s: f64,
    rng: &mut R,
) -> Result<f64, MeckeError>
where
    P: ConvexPolytope<D>,
    R: Rng + ?Sized,
{
    let (_, pieces) = sim.draw_split(z, rng)?;
    if !in_region(setup, &pieces.face.center()) {
        return Ok(0.0);
    }
    match functional {
        Functional::Simple { phi, psi } => Ok(phi(s) * psi(pieces.face.measure())),
        Functional::Nested { count } => {
            let rest = setup.horizon - s;
            let mut vertices = 0;
            for (piece, sources) in [(pieces.plus, pieces.plus_sources), (pieces.minus, pieces.minus_sources)] {
                let cap = sources.iter().position(|f| matches!(f, FacetSource::Other(_))).expect("cut facet");
                let y = sim.run(piece, rest, rng)?;
                vertices += y.boundary_vertices().iter().filter(|b| b.window_facet == cap).count();
            }
            Ok(if vertices == *count { 1.0 } else { 0.0 })
        }
    }
}

/// `n + 1` equally spaced times on `[0, horizon]`.
pub fn uniform_grid(horizon: f64, n: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (0..=n).map(|k| horizon * k as f64 / n as f64).collect();
    g[n] = horizon;
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;
    use crate::measure::{DirectionalDistribution, HyperplaneMeasure};
    use crate::stream::stream;

    fn setup() -> MeckeSetup<Polygon> {
        MeckeSetup {
            window: Polygon::rectangle(0.0, 0.0, 8.0, 8.0).unwrap(),
            localization: Polygon::rectangle(1.0, 1.0, 7.0, 7.0).unwrap(),
            region: Polygon::rectangle(2.0, 2.0, 6.0, 6.0).unwrap(),
            horizon: 1.0,
        }
    }

    fn sim() -> Simulator<2> {
        Simulator::new(HyperplaneMeasure::new(DirectionalDistribution::axis_parallel()))
    }

    #[test]
    fn zero_functional_is_zero_on_both_sides() {
        let g = Functional::Simple { phi: |_| 1.0, psi: |_| 0.0 };
        let grid = uniform_grid(1.0, 10);
        for k in 0..5 {
            assert_eq!(lhs_replication(&sim(), &setup(), &g, &mut stream(1, "z-lhs", k)).unwrap(), 0.0);
            assert_eq!(rhs_replication(&sim(), &setup(), &g, &grid, 2, &mut stream(1, "z-rhs", k)).unwrap(), 0.0);
        }
    }

    #[test]
    fn tiny_horizon_is_nearly_zero() {
        let g = Functional::Simple { phi: |_| 1.0, psi: |_| 1.0 };
        let mut s = setup();
        s.horizon = 1e-6;
        let grid = uniform_grid(1e-6, 4);
        let l: f64 = (0..200).map(|k| lhs_replication(&sim(), &s, &g, &mut stream(2, "t-lhs", k)).unwrap()).sum();
        let r: f64 = (0..20).map(|k| rhs_replication(&sim(), &s, &g, &grid, 1, &mut stream(2, "t-rhs", k)).unwrap()).sum();
        assert_eq!(l, 0.0);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        let g = Functional::Nested { count: 0 };
        let mut rng = stream(0, "grid", 0);
        assert_eq!(rhs_replication(&sim(), &setup(), &g, &[0.0, 0.5], 1, &mut rng), Err(MeckeError::BadGrid));
        assert_eq!(rhs_replication(&sim(), &setup(), &g, &[0.0, 1.0], 0, &mut rng), Err(MeckeError::ZeroDraws));
    }
}
