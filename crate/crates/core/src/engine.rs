//! Event-driven simulation of the local STIT process in a convex window.
//!
//! Every live cell `z` carries an exponential clock of rate `Λ([z])`; the
//! clocks are merged into one global clock whose rate is kept in a Fenwick
//! tree, so an event costs `O(log n)` plus the split itself. Each division
//! appends a birth-time marked maximal polytope to the ledger. Cells remember,
//! per facet, whether it lies on the window boundary or inside which ledger
//! face, which makes internal-vertex attribution in the plane exact.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::geometry::{
    dist, ConvexPolytope, Face, FacetSource, GeometryError, Hyperplane, Point, Segment, EPS_GEOM,
};
use crate::measure::{HyperplaneMeasure, MeasureError};

/// Default budget on live cells per state.
pub const DEFAULT_MAX_CELLS: usize = 10_000_000;

// redraws of a degenerate splitting hyperplane before giving up
const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EngineError {
    InvalidWindow,
    MaxCellsExceeded { cap: usize },
    SegmentOutsideWindow,
    NotContained,
    WindowMismatch,
    InsufficientFresh { needed: usize, given: usize },
    NonPositiveFactor,
    BadInnerWindow,
    /// Target time earlier than the state's time, or not finite.
    BadTime,
    /// Replay is defined only for states produced by simulation.
    DerivedState,
    UnknownCell(u64),
    DegenerateGeometry,
    Geometry(GeometryError),
    Measure(MeasureError),
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::InvalidWindow => f.write_str("window must be a bounded convex polytope with interior"),
            EngineError::MaxCellsExceeded { cap } => write!(f, "cell budget of {cap} exceeded"),
            EngineError::SegmentOutsideWindow => f.write_str("probe segment leaves the window"),
            EngineError::NotContained => f.write_str("sub-window is not contained in the window"),
            EngineError::WindowMismatch => f.write_str("states have different windows"),
            EngineError::InsufficientFresh { needed, given } => {
                write!(f, "iteration needs {needed} fresh states, got {given}")
            }
            EngineError::NonPositiveFactor => f.write_str("scale factor must be positive"),
            EngineError::BadInnerWindow => f.write_str("inner window must lie inside the window with a positive margin"),
            EngineError::BadTime => f.write_str("target time must be finite and not earlier than the current time"),
            EngineError::DerivedState => f.write_str("state was derived by restriction, iteration or rescaling"),
            EngineError::UnknownCell(id) => write!(f, "event refers to unknown cell {id}"),
            EngineError::DegenerateGeometry => f.write_str("could not draw a non-degenerate splitting hyperplane"),
            EngineError::Geometry(e) => write!(f, "{e}"),
            EngineError::Measure(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EngineError {}

impl From<MeasureError> for EngineError {
    fn from(e: MeasureError) -> Self {
        EngineError::Measure(e)
    }
}

impl From<GeometryError> for EngineError {
    fn from(e: GeometryError) -> Self {
        EngineError::Geometry(e)
    }
}

/// What a cell facet lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetTag {
    /// Facet `k` of the window.
    Window(usize),
    /// The ledger face with this id.
    Face(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord<P> {
    pub id: u64,
    pub polytope: P,
    pub birth_time: f64,
    tags: Vec<FacetTag>,
}

impl<P> CellRecord<P> {
    /// One tag per facet, in the polytope's facet order.
    pub fn facet_tags(&self) -> &[FacetTag] {
        &self.tags
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalVertex<const D: usize> {
    pub point: Point<D>,
    pub time: f64,
}

/// Endpoint of a chord on the window boundary (planar runs only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryVertex<const D: usize> {
    pub window_facet: usize,
    pub point: Point<D>,
    pub time: f64,
}

/// A birth-time marked maximal (d−1)-polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalPolytopeRecord<F, const D: usize> {
    pub id: usize,
    pub face: F,
    pub hyperplane: Hyperplane<D>,
    pub birth_time: f64,
    pub parent_cell_id: u64,
    /// Planar runs only; in creation order.
    pub internal_vertices: Vec<InternalVertex<D>>,
    /// The face meets the window boundary (it was born there or was clipped
    /// by a restriction).
    pub touches_window: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitEvent<const D: usize> {
    pub time: f64,
    pub cell_id: u64,
    pub hyperplane: Hyperplane<D>,
    pub plus_id: u64,
    pub minus_id: u64,
}

pub type Ledger<P, const D: usize> = Vec<MaximalPolytopeRecord<<P as ConvexPolytope<D>>::Facet, D>>;

#[derive(Debug, Clone)]
pub struct TessellationState<P: ConvexPolytope<D>, const D: usize> {
    window: P,
    time: f64,
    cells: Vec<CellRecord<P>>,
    ledger: Ledger<P, D>,
    boundary_vertices: Vec<BoundaryVertex<D>>,
    events: Vec<SplitEvent<D>>,
    next_id: u64,
    derived: bool,
}

/// Information handed to a split observer before the parent cell is retired.
pub struct SplitContext<'a, P: ConvexPolytope<D>, const D: usize> {
    pub time: f64,
    pub parent: &'a CellRecord<P>,
    pub hyperplane: &'a Hyperplane<D>,
    pub ledger_id: usize,
    pub face: &'a P::Facet,
}

impl<P: ConvexPolytope<D>, const D: usize> TessellationState<P, D> {
    /// The state at time 0: the window as the only cell.
    pub fn new(window: P) -> Result<Self, EngineError> {
        let vol = window.volume();
        let diam = window.diameter();
        if !(vol > 0.0 && vol.is_finite() && diam.is_finite()) {
            return Err(EngineError::InvalidWindow);
        }
        let tags = (0..window.facet_count()).map(FacetTag::Window).collect();
        Ok(Self {
            cells: vec![CellRecord { id: 0, polytope: window.clone(), birth_time: 0.0, tags }],
            window,
            time: 0.0,
            ledger: Vec::new(),
            boundary_vertices: Vec::new(),
            events: Vec::new(),
            next_id: 1,
            derived: false,
        })
    }

    pub fn window(&self) -> &P {
        &self.window
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn cells(&self) -> &[CellRecord<P>] {
        &self.cells
    }

    pub fn ledger(&self) -> &[MaximalPolytopeRecord<P::Facet, D>] {
        &self.ledger
    }

    pub fn boundary_vertices(&self) -> &[BoundaryVertex<D>] {
        &self.boundary_vertices
    }

    pub fn events(&self) -> &[SplitEvent<D>] {
        &self.events
    }

    /// Produced by restriction, iteration or rescaling rather than by
    /// simulation from a single-cell window.
    pub fn is_derived(&self) -> bool {
        self.derived
    }

    fn tol(&self) -> f64 {
        EPS_GEOM * self.window.diameter()
    }

    /// Divides cell `index` by `h` at `time`, updating cells, ledger and
    /// vertex bookkeeping. Returns the ledger id of the new face.
    fn apply_split(
        &mut self,
        index: usize,
        h: Hyperplane<D>,
        pieces: crate::geometry::SplitPieces<P, D>,
        time: f64,
    ) -> usize {
        let ledger_id = self.ledger.len();
        let parent = &self.cells[index];
        let map = |sources: &[FacetSource]| -> Vec<FacetTag> {
            sources
                .iter()
                .map(|s| match *s {
                    FacetSource::Own(i) => parent.tags[i],
                    FacetSource::Other(_) => FacetTag::Face(ledger_id),
                })
                .collect()
        };
        let plus_tags = map(&pieces.plus_sources);
        let minus_tags = map(&pieces.minus_sources);
        let mut touches_window = false;
        for c in &pieces.crossings {
            match parent.tags[c.facet] {
                FacetTag::Window(k) => {
                    touches_window = true;
                    if D == 2 {
                        self.boundary_vertices.push(BoundaryVertex { window_facet: k, point: c.point, time });
                    }
                }
                FacetTag::Face(id) => {
                    if D == 2 {
                        self.ledger[id].internal_vertices.push(InternalVertex { point: c.point, time });
                    }
                }
            }
        }
        let parent_id = parent.id;
        let (plus_id, minus_id) = (self.next_id, self.next_id + 1);
        self.next_id += 2;
        self.ledger.push(MaximalPolytopeRecord {
            id: ledger_id,
            face: pieces.face,
            hyperplane: h,
            birth_time: time,
            parent_cell_id: parent_id,
            internal_vertices: Vec::new(),
            touches_window,
        });
        self.events.push(SplitEvent { time, cell_id: parent_id, hyperplane: h, plus_id, minus_id });
        self.cells[index] = CellRecord { id: plus_id, polytope: pieces.plus, birth_time: time, tags: plus_tags };
        self.cells.push(CellRecord { id: minus_id, polytope: pieces.minus, birth_time: time, tags: minus_tags });
        ledger_id
    }

    /// Rebuilds a simulated state from its window, event log and final time.
    pub fn replay(window: P, events: &[SplitEvent<D>], time: f64) -> Result<Self, EngineError> {
        let mut state = Self::new(window)?;
        for e in events {
            let index = state.cells.iter().position(|c| c.id == e.cell_id).ok_or(EngineError::UnknownCell(e.cell_id))?;
            let pieces = state.cells[index].polytope.split(&e.hyperplane)?;
            state.apply_split(index, e.hyperplane, pieces, e.time);
        }
        state.time = time;
        Ok(state)
    }

    /// Replays this state's own event log.
    pub fn replayed(&self) -> Result<Self, EngineError> {
        if self.derived {
            return Err(EngineError::DerivedState);
        }
        Self::replay(self.window.clone(), &self.events, self.time)
    }

    /// Points where the segment `[a, b]` crosses the union of ledger faces,
    /// deduplicated within the geometric tolerance, ordered from `a`.
    pub fn line_section(&self, a: &Point<D>, b: &Point<D>) -> Result<Vec<Point<D>>, EngineError> {
        let tol = self.tol();
        if !self.window.contains_point(a, tol) || !self.window.contains_point(b, tol) {
            return Err(EngineError::SegmentOutsideWindow);
        }
        let mut hits: Vec<Point<D>> = self.ledger.iter().filter_map(|r| r.face.hit_by_segment(a, b)).collect();
        hits.sort_by(|p, q| dist(p, a).total_cmp(&dist(q, a)));
        hits.dedup_by(|p, q| dist(p, q) <= tol);
        Ok(hits)
    }

    /// `self ∧ W′`: cells and faces clipped to `sub`, empty pieces dropped.
    pub fn restrict(&self, sub: &P) -> Result<Self, EngineError> {
        if !self.window.contains_polytope(sub) || !(sub.volume() > 0.0) {
            return Err(EngineError::NotContained);
        }
        let mut cells = Vec::new();
        for c in &self.cells {
            if let Some((polytope, sources)) = c.polytope.intersect(sub) {
                let tags = sources
                    .iter()
                    .map(|s| match *s {
                        FacetSource::Own(i) => c.tags[i],
                        FacetSource::Other(k) => FacetTag::Window(k),
                    })
                    .collect();
                cells.push(CellRecord { id: c.id, polytope, birth_time: c.birth_time, tags });
            }
        }
        let tol = EPS_GEOM * sub.diameter();
        let mut ledger = Vec::new();
        let mut remap = vec![usize::MAX; self.ledger.len()];
        for r in &self.ledger {
            if let Some((face, clipped)) = r.face.clip_to(sub) {
                remap[r.id] = ledger.len();
                ledger.push(MaximalPolytopeRecord {
                    id: ledger.len(),
                    face,
                    hyperplane: r.hyperplane,
                    birth_time: r.birth_time,
                    parent_cell_id: r.parent_cell_id,
                    internal_vertices: r
                        .internal_vertices
                        .iter()
                        .filter(|v| sub.contains_point(&v.point, -tol))
                        .copied()
                        .collect(),
                    touches_window: r.touches_window || clipped,
                });
            }
        }
        for c in &mut cells {
            for t in &mut c.tags {
                if let FacetTag::Face(id) = *t {
                    // a facet inside a face that was clipped away lies on ∂W′
                    *t = if remap[id] == usize::MAX { FacetTag::Window(0) } else { FacetTag::Face(remap[id]) };
                }
            }
        }
        Ok(Self {
            window: sub.clone(),
            time: self.time,
            cells,
            ledger,
            boundary_vertices: Vec::new(),
            events: Vec::new(),
            next_id: self.next_id,
            derived: true,
        })
    }

    /// Local iteration: cell `i` is replaced by `fresh[i] ∧ z_i`. Birth times
    /// of the fresh states are shifted by this state's time, and the result
    /// lives at time `self.time + max fresh time`.
    ///
    /// Vertices created where fresh faces meet the old cell boundaries are
    /// not recorded.
    pub fn iterate(&self, fresh: &[Self]) -> Result<Self, EngineError> {
        if fresh.len() < self.cells.len() {
            return Err(EngineError::InsufficientFresh { needed: self.cells.len(), given: fresh.len() });
        }
        let tol = self.tol();
        let same_window = |w: &P| {
            w.vertices().len() == self.window.vertices().len()
                && w.vertices().iter().zip(self.window.vertices()).all(|(p, q)| dist(p, q) <= tol)
        };
        if !fresh.iter().all(|f| same_window(&f.window)) {
            return Err(EngineError::WindowMismatch);
        }
        let shift = self.time;
        let mut ledger = self.ledger.clone();
        let mut cells = Vec::new();
        let mut next_id = 0u64;
        let mut horizon = 0.0f64;
        for (z, y) in self.cells.iter().zip(fresh) {
            horizon = horizon.max(y.time);
            let mut remap = vec![usize::MAX; y.ledger.len()];
            for r in &y.ledger {
                if let Some((face, clipped)) = r.face.clip_to(&z.polytope) {
                    remap[r.id] = ledger.len();
                    ledger.push(MaximalPolytopeRecord {
                        id: ledger.len(),
                        face,
                        hyperplane: r.hyperplane,
                        birth_time: r.birth_time + shift,
                        parent_cell_id: r.parent_cell_id,
                        internal_vertices: r
                            .internal_vertices
                            .iter()
                            .filter(|v| z.polytope.contains_point(&v.point, -tol))
                            .map(|v| InternalVertex { point: v.point, time: v.time + shift })
                            .collect(),
                        touches_window: r.touches_window || clipped,
                    });
                }
            }
            for c in &y.cells {
                if let Some((polytope, sources)) = c.polytope.intersect(&z.polytope) {
                    let tags = sources
                        .iter()
                        .map(|s| match *s {
                            FacetSource::Own(i) => match c.tags[i] {
                                FacetTag::Face(id) if remap[id] != usize::MAX => FacetTag::Face(remap[id]),
                                FacetTag::Face(_) => FacetTag::Window(0),
                                w => w,
                            },
                            FacetSource::Other(k) => z.tags[k],
                        })
                        .collect();
                    let birth_time = if c.birth_time > 0.0 { c.birth_time + shift } else { z.birth_time };
                    cells.push(CellRecord { id: next_id, polytope, birth_time, tags });
                    next_id += 1;
                }
            }
        }
        Ok(Self {
            window: self.window.clone(),
            time: shift + horizon,
            cells,
            ledger,
            boundary_vertices: Vec::new(),
            events: Vec::new(),
            next_id,
            derived: true,
        })
    }

    /// Spatial dilation by `c` about the origin; times are unchanged.
    pub fn rescale(&self, c: f64) -> Result<Self, EngineError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(EngineError::NonPositiveFactor);
        }
        let f = |x: &Point<D>| -> Point<D> { core::array::from_fn(|i| c * x[i]) };
        Ok(Self {
            window: self.window.map_points(f),
            time: self.time,
            cells: self
                .cells
                .iter()
                .map(|z| CellRecord { id: z.id, polytope: z.polytope.map_points(f), birth_time: z.birth_time, tags: z.tags.clone() })
                .collect(),
            ledger: self
                .ledger
                .iter()
                .map(|r| MaximalPolytopeRecord {
                    face: r.face.map_points(f),
                    hyperplane: r.hyperplane.scaled(c),
                    internal_vertices: r
                        .internal_vertices
                        .iter()
                        .map(|v| InternalVertex { point: f(&v.point), time: v.time })
                        .collect(),
                    ..r.clone()
                })
                .collect(),
            boundary_vertices: self
                .boundary_vertices
                .iter()
                .map(|b| BoundaryVertex { point: f(&b.point), ..*b })
                .collect(),
            events: Vec::new(),
            next_id: self.next_id,
            derived: true,
        })
    }

    /// Summary of the part of the state inside `region`, with one chord count
    /// per probe segment.
    pub fn summary_statistics(&self, region: &P, probes: &[(Point<D>, Point<D>)]) -> Result<SummaryStatistics, EngineError> {
        let cell_count = self.cells.iter().filter(|c| region.contains_point(&c.polytope.centroid(), 0.0)).count();
        let total_face_measure =
            self.ledger.iter().filter_map(|r| r.face.clip_to(region)).map(|(f, _)| f.measure()).sum();
        let chord_counts = probes
            .iter()
            .map(|(a, b)| self.line_section(a, b).map(|v| v.len()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SummaryStatistics { cell_count, total_face_measure, chord_counts })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStatistics {
    pub cell_count: usize,
    pub total_face_measure: f64,
    pub chord_counts: Vec<usize>,
}

/// A minus-sampled maximal segment of a planar state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalSegment {
    pub ledger_id: usize,
    pub segment: Segment<2>,
    pub birth_time: f64,
    pub length: f64,
    pub internal_vertices: usize,
}

impl<P: ConvexPolytope<2, Facet = Segment<2>>> TessellationState<P, 2> {
    /// Ledger segments with midpoint in `inner` that are not clipped by the
    /// window.
    pub fn extract_typical_segments_2d(&self, inner: &P) -> Result<Vec<TypicalSegment>, EngineError> {
        let tol = self.tol();
        let margin_ok = inner.vertices().iter().all(|v| self.window.contains_point(v, -tol));
        if !margin_ok || !(inner.volume() > 0.0) {
            return Err(EngineError::BadInnerWindow);
        }
        Ok(self
            .ledger
            .iter()
            .filter(|r| !r.touches_window && inner.contains_point(&r.face.midpoint(), 0.0))
            .map(|r| TypicalSegment {
                ledger_id: r.id,
                segment: r.face,
                birth_time: r.birth_time,
                length: r.face.length(),
                internal_vertices: r.internal_vertices.len(),
            })
            .collect())
    }
}

/// Prefix sums over cell rates with `O(log n)` update, append and search.
#[derive(Debug, Clone, Default)]
struct Fenwick {
    tree: Vec<f64>,
    values: Vec<f64>,
}

impl Fenwick {
    fn prefix(&self, mut i: usize) -> f64 {
        // sum of values[0..i]
        let mut s = 0.0;
        while i > 0 {
            s += self.tree[i - 1];
            i &= i - 1;
        }
        s
    }

    fn push(&mut self, v: f64) {
        let i = self.values.len() + 1;
        let low = i & i.wrapping_neg();
        let node = v + self.prefix(i - 1) - self.prefix(i - low);
        self.tree.push(node);
        self.values.push(v);
    }

    fn set(&mut self, index: usize, v: f64) {
        let delta = v - self.values[index];
        self.values[index] = v;
        let mut i = index + 1;
        while i <= self.tree.len() {
            self.tree[i - 1] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        self.prefix(self.tree.len())
    }

    /// Index whose cumulative interval contains `u ∈ [0, total)`.
    fn find(&self, mut u: f64) -> usize {
        let n = self.tree.len();
        let mut pos = 0;
        let mut step = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        while step > 0 {
            if pos + step <= n && self.tree[pos + step - 1] <= u {
                pos += step;
                u -= self.tree[pos - 1];
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }
}

/// Drives states forward in time under a hyperplane measure.
#[derive(Debug, Clone)]
pub struct Simulator<const D: usize> {
    measure: HyperplaneMeasure<D>,
    max_cells: usize,
}

impl<const D: usize> Simulator<D> {
    pub fn new(measure: HyperplaneMeasure<D>) -> Self {
        Self { measure, max_cells: DEFAULT_MAX_CELLS }
    }

    pub fn with_max_cells(mut self, cap: usize) -> Self {
        self.max_cells = cap;
        self
    }

    pub fn measure(&self) -> &HyperplaneMeasure<D> {
        &self.measure
    }

    /// Local STIT in `window` from time 0 to `t_end`.
    pub fn run<P: ConvexPolytope<D>, R: Rng + ?Sized>(
        &self,
        window: P,
        t_end: f64,
        rng: &mut R,
    ) -> Result<TessellationState<P, D>, EngineError> {
        let mut state = TessellationState::new(window)?;
        self.advance_to(&mut state, t_end, rng)?;
        Ok(state)
    }

    pub fn advance_to<P: ConvexPolytope<D>, R: Rng + ?Sized>(
        &self,
        state: &mut TessellationState<P, D>,
        t_end: f64,
        rng: &mut R,
    ) -> Result<(), EngineError> {
        self.advance_observed(state, t_end, rng, |_| {})
    }

    /// As [`advance_to`](Self::advance_to), calling `observer` for every
    /// division before the parent cell is retired.
    pub fn advance_observed<P, R, F>(
        &self,
        state: &mut TessellationState<P, D>,
        t_end: f64,
        rng: &mut R,
        mut observer: F,
    ) -> Result<(), EngineError>
    where
        P: ConvexPolytope<D>,
        R: Rng + ?Sized,
        F: FnMut(&SplitContext<'_, P, D>),
    {
        if !(t_end >= state.time && t_end.is_finite()) {
            return Err(EngineError::BadTime);
        }
        let mut rates = Fenwick::default();
        for c in &state.cells {
            rates.push(self.measure.hit_rate(&c.polytope)?);
        }
        loop {
            let total = rates.total();
            if !(total > 0.0) {
                break;
            }
            let e: f64 = Exp1.sample(rng);
            let next = state.time + e / total;
            if next > t_end {
                break;
            }
            if state.cells.len() >= self.max_cells {
                return Err(EngineError::MaxCellsExceeded { cap: self.max_cells });
            }
            let index = rates.find(rng.random::<f64>() * total);
            let (h, pieces) = self.draw_split(&state.cells[index].polytope, rng)?;
            let ledger_id = state.ledger.len();
            observer(&SplitContext {
                time: next,
                parent: &state.cells[index],
                hyperplane: &h,
                ledger_id,
                face: &pieces.face,
            });
            state.apply_split(index, h, pieces, next);
            state.time = next;
            rates.set(index, self.measure.hit_rate(&state.cells[index].polytope)?);
            rates.push(self.measure.hit_rate(&state.cells[state.cells.len() - 1].polytope)?);
        }
        state.time = t_end;
        Ok(())
    }

    /// Performs exactly the next division, however late; `None` if no cell
    /// can be hit. Linear in the number of cells.
    pub fn step<P: ConvexPolytope<D>, R: Rng + ?Sized>(
        &self,
        state: &mut TessellationState<P, D>,
        rng: &mut R,
    ) -> Result<Option<f64>, EngineError> {
        let rates = state.cells.iter().map(|c| self.measure.hit_rate(&c.polytope)).collect::<Result<Vec<_>, _>>()?;
        let total: f64 = rates.iter().sum();
        if !(total > 0.0) {
            return Ok(None);
        }
        if state.cells.len() >= self.max_cells {
            return Err(EngineError::MaxCellsExceeded { cap: self.max_cells });
        }
        let e: f64 = Exp1.sample(rng);
        let next = state.time + e / total;
        let mut u = rng.random::<f64>() * total;
        let mut index = rates.len() - 1;
        for (i, r) in rates.iter().enumerate() {
            if u < *r {
                index = i;
                break;
            }
            u -= r;
        }
        let (h, pieces) = self.draw_split(&state.cells[index].polytope, rng)?;
        state.apply_split(index, h, pieces, next);
        state.time = next;
        Ok(Some(next))
    }

    /// A hyperplane from `Λ_z` together with the division it induces,
    /// redrawing cuts through vertices.
    pub fn draw_split<P: ConvexPolytope<D>, R: Rng + ?Sized>(
        &self,
        z: &P,
        rng: &mut R,
    ) -> Result<(Hyperplane<D>, crate::geometry::SplitPieces<P, D>), EngineError> {
        for _ in 0..MAX_REDRAWS {
            let h = self.measure.sample_hitting(z, rng)?;
            match z.split(&h) {
                Ok(p) if !p.grazes_vertex => return Ok((h, p)),
                Ok(_) | Err(GeometryError::NoIntersection) | Err(GeometryError::DegenerateCut) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        Err(EngineError::DegenerateGeometry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Polygon, Polyhedron};
    use crate::measure::DirectionalDistribution;
    use crate::stream::stream;

    fn axis2() -> Simulator<2> {
        Simulator::new(HyperplaneMeasure::new(DirectionalDistribution::axis_parallel()))
    }

    fn iso2() -> Simulator<2> {
        Simulator::new(HyperplaneMeasure::new(DirectionalDistribution::isotropic().unwrap()))
    }

    #[test]
    fn fenwick_matches_linear_scan() {
        let mut f = Fenwick::default();
        let vals: Vec<f64> = (0..37).map(|i| 0.5 + (i * 7 % 11) as f64).collect();
        for v in &vals {
            f.push(*v);
        }
        f.set(5, 3.25);
        f.set(36, 0.125);
        let mut vals = vals;
        vals[5] = 3.25;
        vals[36] = 0.125;
        let total: f64 = vals.iter().sum();
        assert!((f.total() - total).abs() < 1e-12);
        let mut acc = 0.0;
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(f.find(acc + 0.5 * v), i);
            acc += v;
        }
    }

    #[test]
    fn zero_horizon_is_the_window() {
        let s = axis2().run(Polygon::unit_square(), 0.0, &mut stream(1, "t0", 0)).unwrap();
        assert_eq!(s.cells().len(), 1);
        assert!(s.ledger().is_empty());
        let stats = s.summary_statistics(&Polygon::unit_square(), &[([0.1, 0.5], [0.9, 0.5])]).unwrap();
        assert_eq!(stats, SummaryStatistics { cell_count: 1, total_face_measure: 0.0, chord_counts: vec![0] });
    }

    fn check_invariants<P: ConvexPolytope<D>, const D: usize>(s: &TessellationState<P, D>) {
        let vol: f64 = s.cells().iter().map(|c| c.polytope.volume()).sum();
        assert!((vol - s.window().volume()).abs() <= 1e-8 * s.window().volume());
        assert_eq!(s.ledger().len(), s.cells().len() - 1);
        assert_eq!(s.events().len(), s.ledger().len());
        for c in s.cells() {
            assert_eq!(c.facet_tags().len(), c.polytope.facet_count());
        }
        for r in s.ledger() {
            for v in &r.internal_vertices {
                assert!(v.time > r.birth_time);
            }
        }
    }

    #[test]
    fn tiling_and_ledger_invariants() {
        let w = Polygon::rectangle(0.0, 0.0, 6.0, 4.0).unwrap();
        for sim in [axis2(), iso2()] {
            let mut rng = stream(4, "tiling", 0);
            let mut s = TessellationState::new(w.clone()).unwrap();
            for k in 1..=6 {
                sim.advance_to(&mut s, 0.5 * k as f64, &mut rng).unwrap();
                check_invariants(&s);
            }
            assert!(s.cells().len() > 20);
            for r in s.ledger() {
                for v in &r.internal_vertices {
                    assert!(crate::geometry::point_on_segment_interior(&v.point, &r.face, 1e-7).unwrap());
                }
            }
        }
        let cube = Polyhedron::cuboid([0.0; 3], [3.0, 2.0, 2.0]).unwrap();
        let sim3 = Simulator::new(HyperplaneMeasure::new(DirectionalDistribution::<3>::isotropic().unwrap()));
        let s3 = sim3.run(cube, 3.0, &mut stream(4, "tiling3", 0)).unwrap();
        check_invariants(&s3);
        assert!(s3.cells().len() > 10);
    }

    #[test]
    fn internal_vertices_match_chord_endpoints() {
        // every chord endpoint is either on the window boundary or an
        // internal vertex of exactly one earlier face
        let s = iso2().run(Polygon::rectangle(0.0, 0.0, 5.0, 5.0).unwrap(), 3.0, &mut stream(9, "iv", 0)).unwrap();
        let internal: usize = s.ledger().iter().map(|r| r.internal_vertices.len()).sum();
        assert_eq!(internal + s.boundary_vertices().len(), 2 * s.ledger().len());
        for r in s.ledger() {
            let births = s.boundary_vertices().iter().filter(|b| b.time == r.birth_time).count();
            assert_eq!(r.touches_window, births > 0);
        }
    }

    #[test]
    fn deterministic_and_replayable() {
        let w = Polygon::rectangle(0.0, 0.0, 5.0, 5.0).unwrap();
        let a = iso2().run(w.clone(), 2.0, &mut stream(3, "replay", 0)).unwrap();
        let b = iso2().run(w.clone(), 2.0, &mut stream(3, "replay", 0)).unwrap();
        assert_eq!(a.events(), b.events());
        let r = a.replayed().unwrap();
        assert_eq!(r.cells(), a.cells());
        assert_eq!(r.ledger(), a.ledger());
        assert!(a.restrict(&w).unwrap().replayed().is_err());
    }

    #[test]
    fn restriction() {
        let mut s = TessellationState::new(Polygon::unit_square()).unwrap();
        let h = Hyperplane::new([1.0, 0.0], 0.3).unwrap();
        let pieces = s.cells[0].polytope.split(&h).unwrap();
        s.apply_split(0, h, pieces, 0.5);
        s.time = 1.0;
        let right = Polygon::rectangle(0.5, 0.0, 1.0, 1.0).unwrap();
        let r = s.restrict(&right).unwrap();
        assert_eq!(r.cells().len(), 1);
        assert!(r.ledger().is_empty());
        let same = s.restrict(&Polygon::unit_square()).unwrap();
        assert_eq!(same.cells().len(), 2);
        assert_eq!(same.ledger()[0].face, s.ledger()[0].face);
        assert!(!same.ledger()[0].touches_window || s.ledger()[0].touches_window);
        let outside = Polygon::rectangle(0.5, 0.0, 1.5, 1.0).unwrap();
        assert!(matches!(s.restrict(&outside), Err(EngineError::NotContained)));
    }

    #[test]
    fn diagonal_split_summary() {
        let mut s = TessellationState::new(Polygon::unit_square()).unwrap();
        let h = Hyperplane::new([1.0, 1.0], 1.0).unwrap();
        let pieces = s.cells[0].polytope.split(&h).unwrap();
        s.apply_split(0, h, pieces, 0.5);
        let st = s.summary_statistics(&Polygon::unit_square(), &[]).unwrap();
        assert_eq!(st.cell_count, 2);
        assert!((st.total_face_measure - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn iteration_identities() {
        let w = Polygon::rectangle(0.0, 0.0, 4.0, 4.0).unwrap();
        let sim = iso2();
        let y = sim.run(w.clone(), 1.5, &mut stream(6, "iter", 0)).unwrap();
        let blanks: Vec<_> = (0..y.cells().len()).map(|_| TessellationState::new(w.clone()).unwrap()).collect();
        let same = y.iterate(&blanks).unwrap();
        assert_eq!(same.cells().len(), y.cells().len());
        for (a, b) in same.cells().iter().zip(y.cells()) {
            assert!((a.polytope.volume() - b.polytope.volume()).abs() < 1e-12);
        }
        assert_eq!(same.ledger(), y.ledger());
        let root = TessellationState::new(w.clone()).unwrap();
        let only = root.iterate(core::slice::from_ref(&y)).unwrap();
        assert_eq!(only.ledger(), y.ledger());
        assert_eq!(only.cells().len(), y.cells().len());
        assert!(matches!(y.iterate(&blanks[..1]), Err(EngineError::InsufficientFresh { .. })));
        let other = TessellationState::new(Polygon::unit_square()).unwrap();
        assert!(matches!(root.iterate(&[other]), Err(EngineError::WindowMismatch)));
        // tiling survives iteration
        let fresh: Vec<_> = (0..y.cells().len())
            .map(|i| sim.run(w.clone(), 1.0, &mut stream(6, "iter-fresh", i as u64)).unwrap())
            .collect();
        let it = y.iterate(&fresh).unwrap();
        let vol: f64 = it.cells().iter().map(|c| c.polytope.volume()).sum();
        assert!((vol - 16.0).abs() < 1e-8 * 16.0);
        assert_eq!(it.time(), 2.5);
    }

    #[test]
    fn rescaling() {
        let y = iso2().run(Polygon::rectangle(0.0, 0.0, 3.0, 3.0).unwrap(), 2.0, &mut stream(2, "scale", 0)).unwrap();
        let same = y.rescale(1.0).unwrap();
        assert_eq!(same.cells(), y.cells());
        let big = y.rescale(2.0).unwrap();
        for (a, b) in big.cells().iter().zip(y.cells()) {
            assert_eq!(a.polytope.volume(), 4.0 * b.polytope.volume());
        }
        for (a, b) in big.ledger().iter().zip(y.ledger()) {
            assert_eq!(a.face.length(), 2.0 * b.face.length());
        }
        assert!(matches!(y.rescale(0.0), Err(EngineError::NonPositiveFactor)));
    }

    #[test]
    fn line_sections() {
        let w = Polygon::rectangle(0.0, 0.0, 4.0, 4.0).unwrap();
        let y = axis2().run(w, 0.0, &mut stream(0, "ls", 0)).unwrap();
        assert!(y.line_section(&[1.0, 1.0], &[2.0, 1.0]).unwrap().is_empty());
        assert!(matches!(y.line_section(&[1.0, 1.0], &[5.0, 1.0]), Err(EngineError::SegmentOutsideWindow)));
        let y = axis2().run(Polygon::rectangle(0.0, 0.0, 4.0, 4.0).unwrap(), 3.0, &mut stream(0, "ls", 1)).unwrap();
        let pts = y.line_section(&[0.0, 1.3], &[4.0, 1.3]).unwrap();
        let vertical = y
            .ledger()
            .iter()
            .filter(|r| r.hyperplane.normal()[0] == 1.0)
            .filter(|r| r.face.a[1].min(r.face.b[1]) < 1.3 && r.face.a[1].max(r.face.b[1]) > 1.3)
            .count();
        assert_eq!(pts.len(), vertical);
    }

    #[test]
    fn typical_segment_extraction() {
        let w = Polygon::rectangle(0.0, 0.0, 10.0, 10.0).unwrap();
        let inner = Polygon::rectangle(2.0, 2.0, 8.0, 8.0).unwrap();
        let empty = TessellationState::new(w.clone()).unwrap();
        assert!(empty.extract_typical_segments_2d(&inner).unwrap().is_empty());
        assert!(matches!(empty.extract_typical_segments_2d(&w), Err(EngineError::BadInnerWindow)));
        let y = axis2().run(w, 2.0, &mut stream(8, "typ", 0)).unwrap();
        let segs = y.extract_typical_segments_2d(&inner).unwrap();
        assert!(!segs.is_empty());
        for s in &segs {
            let r = &y.ledger()[s.ledger_id];
            assert!(!r.touches_window);
            assert_eq!(s.internal_vertices, r.internal_vertices.len());
        }
    }

    #[test]
    fn cell_budget() {
        let sim = axis2().with_max_cells(5);
        let r = sim.run(Polygon::rectangle(0.0, 0.0, 10.0, 10.0).unwrap(), 5.0, &mut stream(0, "cap", 0));
        assert!(matches!(r, Err(EngineError::MaxCellsExceeded { cap: 5 })));
    }

    #[test]
    fn single_steps_tile_the_window() {
        let sim = iso2();
        let mut s = TessellationState::new(Polygon::unit_square()).unwrap();
        let mut last = 0.0;
        for _ in 0..20 {
            let t = sim.step(&mut s, &mut stream(9, "step", 0)).unwrap().unwrap();
            assert!(t > last);
            last = t;
        }
        assert_eq!(s.cells().len(), 21);
        check_invariants(&s);
    }
}
