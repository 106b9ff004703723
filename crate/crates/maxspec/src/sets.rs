//! Definable subsets of a compact ordinal interval and their topology.
//!
//! The ambient space is `[0, top]` with `top < w^w`, carrying the order
//! topology: successors and 0 are isolated, a limit ordinal is approached
//! exactly from below. A `Cell` is `{x : lo < x <= hi, dmin <= deg(x) <= dmax}`
//! (with a bottom marker admitting `x = 0`), where `deg` is the least CNF
//! exponent. Finite unions of cells are closed under the Boolean operations,
//! closure, interior, and the derived-set operator, which makes every
//! topological question here decidable.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ordinal::Ordinal;

/// Upper degree bound of a cell; `Inf` puts no bound.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum DegMax {
    Fin(u32),
    Inf,
}

impl DegMax {
    pub fn admits(self, d: u32) -> bool {
        match self {
            DegMax::Fin(b) => d <= b,
            DegMax::Inf => true,
        }
    }
}

impl fmt::Display for DegMax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegMax::Fin(b) => write!(f, "{b}"),
            DegMax::Inf => write!(f, "inf"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Cell {
    /// Strict lower bound; `None` is the bottom marker, admitting 0.
    pub lo: Option<Ordinal>,
    pub hi: Ordinal,
    pub dmin: u32,
    pub dmax: DegMax,
}

impl Cell {
    pub fn new(lo: Option<Ordinal>, hi: Ordinal, dmin: u32, dmax: DegMax) -> Cell {
        Cell { lo, hi, dmin, dmax }
    }

    /// Full-degree interval cell `(lo, hi]` (or `[0, hi]` for bottom `lo`).
    pub fn interval(lo: Option<Ordinal>, hi: Ordinal) -> Cell {
        Cell::new(lo, hi, 0, DegMax::Inf)
    }

    /// The one-point cell `{x}`.
    pub fn singleton(x: &Ordinal) -> Cell {
        Cell::new(x.block_start(), x.clone(), x.deg(), DegMax::Fin(x.deg()))
    }

    pub fn contains(&self, x: &Ordinal) -> bool {
        let in_interval = match &self.lo {
            None => *x <= self.hi,
            Some(lo) => *x > *lo && *x <= self.hi,
        };
        in_interval && x.deg() >= self.dmin && self.dmax.admits(x.deg())
    }

    /// Least element, if any. The minimum of a nonempty cell is the first
    /// point of its lowest admitted degree, since `next_of_degree` is
    /// monotone in the degree.
    pub fn least_point(&self) -> Option<Ordinal> {
        if !self.dmax.admits(self.dmin) {
            return None;
        }
        let w = Ordinal::next_of_degree(self.lo.as_ref(), self.dmin);
        (w <= self.hi).then_some(w)
    }

    pub fn is_empty(&self) -> bool {
        self.least_point().is_none()
    }

    /// Intersection of two cells, `None` when empty.
    pub fn meet(&self, other: &Cell) -> Option<Cell> {
        let lo = match (&self.lo, &other.lo) {
            (None, x) | (x, None) => x.clone(),
            (Some(a), Some(b)) => Some(a.max(b).clone()),
        };
        let hi = self.hi.clone().min(other.hi.clone());
        let dmin = self.dmin.max(other.dmin);
        let dmax = self.dmax.min(other.dmax);
        let cell = Cell::new(lo, hi, dmin, dmax);
        (!cell.is_empty()).then_some(cell)
    }

    /// Limit points of the cell within the ambient interval. Exactly the
    /// points of the same interval with degree above `dmin`: degrees
    /// `0..deg(x)` all occur cofinally below a limit `x`, and only the least
    /// admitted degree matters for accumulation. Validated against the
    /// sampling oracle in the tests below.
    pub fn derived(&self) -> Cell {
        Cell::new(
            self.lo.clone(),
            self.hi.clone(),
            self.dmin + 1,
            DegMax::Inf,
        )
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lo {
            None => write!(f, "[0, {}]", self.hi)?,
            Some(lo) => write!(f, "({lo}, {}]", self.hi)?,
        }
        write!(f, " deg {}..{}", self.dmin, self.dmax)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("ambient spaces differ")]
    AmbientMismatch,
    #[error("cell exceeds the ambient interval: {0}")]
    CellOutOfRange(String),
    #[error("carrier is empty")]
    EmptyCarrier,
    #[error("carrier is not closed: missing limit point {0}")]
    CarrierNotClosed(Ordinal),
    #[error("subset precondition violated at {0}")]
    NotSubset(Ordinal),
    #[error("set is not closed: missing limit point {0}")]
    NotClosed(Ordinal),
}

/// Ambient space `[0, top]` restricted to a closed nonempty carrier.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Space {
    top: Ordinal,
    carrier: Vec<Cell>,
}

impl Space {
    /// The full interval `[0, top]`.
    pub fn interval(top: Ordinal) -> Arc<Space> {
        let carrier = vec![Cell::interval(None, top.clone())];
        Arc::new(Space { top, carrier })
    }

    /// A space on `[0, top]` whose carrier is the union of `cells`;
    /// the carrier must be nonempty and closed.
    pub fn with_carrier(top: Ordinal, cells: Vec<Cell>) -> Result<Arc<Space>, SetError> {
        let cells: Vec<Cell> = cells.into_iter().filter(|c| !c.is_empty()).collect();
        for c in &cells {
            if c.hi > top {
                return Err(SetError::CellOutOfRange(c.to_string()));
            }
        }
        if cells.is_empty() {
            return Err(SetError::EmptyCarrier);
        }
        let derived: Vec<Cell> = cells.iter().map(Cell::derived).collect();
        let refinement = refine(&top, &[&cells, &derived]);
        for w in refinement.witnesses() {
            if derived.iter().any(|c| c.contains(w)) && !cells.iter().any(|c| c.contains(w)) {
                return Err(SetError::CarrierNotClosed(w.clone()));
            }
        }
        Ok(Arc::new(Space { top, carrier: cells }))
    }

    pub fn top(&self) -> &Ordinal {
        &self.top
    }

    pub fn carrier_cells(&self) -> &[Cell] {
        &self.carrier
    }

    pub fn max_deg(&self) -> u32 {
        self.top.lead_exp()
    }

    pub fn carrier_contains(&self, x: &Ordinal) -> bool {
        self.carrier.iter().any(|c| c.contains(x))
    }
}

/// Common refinement of several cell families: the interval `[0, top]` is cut
/// at every cell endpoint, and each resulting piece is split into its degree
/// classes. Every cell of the input families holds either all or none of each
/// class, so the class witnesses separate the generated Boolean algebra.
pub(crate) struct Refinement {
    pub(crate) pieces: Vec<Piece>,
}

pub(crate) struct Piece {
    pub(crate) lo: Option<Ordinal>,
    pub(crate) hi: Ordinal,
    /// Least witness per realizable degree; index = degree. The realizable
    /// degrees of a piece form an initial segment `0..=D`.
    pub(crate) witnesses: Vec<Ordinal>,
}

impl Refinement {
    pub(crate) fn witnesses(&self) -> impl Iterator<Item = &Ordinal> {
        self.pieces.iter().flat_map(|p| p.witnesses.iter())
    }
}

pub(crate) fn refine(top: &Ordinal, families: &[&[Cell]]) -> Refinement {
    let max_deg = top.lead_exp();
    let mut cuts: Vec<Ordinal> = Vec::new();
    for family in families {
        for cell in *family {
            if let Some(lo) = &cell.lo {
                if *lo < *top {
                    cuts.push(lo.clone());
                }
            }
            if cell.hi < *top {
                cuts.push(cell.hi.clone());
            }
        }
    }
    cuts.push(top.clone());
    cuts.sort();
    cuts.dedup();

    let mut pieces = Vec::with_capacity(cuts.len());
    let mut lo: Option<Ordinal> = None;
    for hi in cuts {
        let mut witnesses = Vec::new();
        for d in 0..=max_deg {
            let w = Ordinal::next_of_degree(lo.as_ref(), d);
            if w <= hi {
                witnesses.push(w);
            } else {
                break; // realizable degrees are an initial segment
            }
        }
        pieces.push(Piece {
            lo: lo.clone(),
            hi: hi.clone(),
            witnesses,
        });
        lo = Some(hi);
    }
    Refinement { pieces }
}

/// Rebuilds disjoint cells from the classes selected by `pred`, merging
/// consecutive degrees within a piece and identical adjacent pieces.
pub(crate) fn cells_from_classes(
    refinement: &Refinement,
    mut pred: impl FnMut(&Ordinal) -> bool,
) -> Vec<Cell> {
    struct PendingPiece {
        lo: Option<Ordinal>,
        hi: Ordinal,
        runs: Vec<(u32, DegMax)>,
    }
    let mut pending: Vec<PendingPiece> = Vec::new();
    for piece in &refinement.pieces {
        let mut runs: Vec<(u32, DegMax)> = Vec::new();
        let mut run_start: Option<u32> = None;
        for (d, w) in piece.witnesses.iter().enumerate() {
            let d = d as u32;
            if pred(w) {
                run_start.get_or_insert(d);
            } else if let Some(a) = run_start.take() {
                runs.push((a, DegMax::Fin(d - 1)));
            }
        }
        if let Some(a) = run_start {
            // the run reaches the highest realizable degree; leaving the
            // bound open lets adjacent pieces with the same profile merge
            runs.push((a, DegMax::Inf));
        }
        if runs.is_empty() {
            continue;
        }
        if let Some(prev) = pending.last_mut() {
            if piece.lo.as_ref() == Some(&prev.hi) && prev.runs == runs {
                prev.hi = piece.hi.clone();
                continue;
            }
        }
        pending.push(PendingPiece {
            lo: piece.lo.clone(),
            hi: piece.hi.clone(),
            runs,
        });
    }
    let mut cells = Vec::new();
    for p in pending {
        for (a, b) in p.runs {
            cells.push(Cell::new(p.lo.clone(), p.hi.clone(), a, b));
        }
    }
    cells
}

/// A finite union of cells inside the carrier of its ambient space.
/// Stored cells denote exactly their point sets (they are pre-intersected
/// with the carrier on construction) and are kept nonempty.
#[derive(Clone, Debug)]
pub struct DefinableSet {
    space: Arc<Space>,
    cells: Vec<Cell>,
}

/// Cardinality of a definable set.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SetCount {
    Finite(u64),
    Infinite,
}

impl DefinableSet {
    /// Builds the union of `cells` intersected with the carrier.
    pub fn new(space: &Arc<Space>, cells: Vec<Cell>) -> Result<DefinableSet, SetError> {
        for c in &cells {
            if c.hi > *space.top() {
                return Err(SetError::CellOutOfRange(c.to_string()));
            }
        }
        let mut inside = Vec::new();
        for c in &cells {
            for carrier_cell in space.carrier_cells() {
                if let Some(m) = c.meet(carrier_cell) {
                    inside.push(m);
                }
            }
        }
        Ok(DefinableSet {
            space: Arc::clone(space),
            cells: inside,
        })
    }

    pub fn empty(space: &Arc<Space>) -> DefinableSet {
        DefinableSet {
            space: Arc::clone(space),
            cells: Vec::new(),
        }
    }

    /// The whole carrier.
    pub fn full(space: &Arc<Space>) -> DefinableSet {
        DefinableSet {
            space: Arc::clone(space),
            cells: space.carrier_cells().to_vec(),
        }
    }

    pub fn singleton(space: &Arc<Space>, x: &Ordinal) -> Result<DefinableSet, SetError> {
        DefinableSet::new(space, vec![Cell::singleton(x)])
    }

    pub(crate) fn from_cells_unchecked(space: &Arc<Space>, cells: Vec<Cell>) -> DefinableSet {
        DefinableSet {
            space: Arc::clone(space),
            cells: cells.into_iter().filter(|c| !c.is_empty()).collect(),
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn contains(&self, x: &Ordinal) -> bool {
        self.cells.iter().any(|c| c.contains(x))
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(Cell::is_empty)
    }

    fn check_space(&self, other: &DefinableSet) -> Result<(), SetError> {
        if *self.space == *other.space {
            Ok(())
        } else {
            Err(SetError::AmbientMismatch)
        }
    }

    fn refinement_with(&self, others: &[&DefinableSet]) -> Refinement {
        let mut families: Vec<&[Cell]> = vec![self.space.carrier_cells(), &self.cells];
        for o in others {
            families.push(&o.cells);
        }
        refine(self.space.top(), &families)
    }

    /// Canonical disjoint-cell form (used for display and serialization).
    pub fn normalized_cells(&self) -> Vec<Cell> {
        let refinement = self.refinement_with(&[]);
        cells_from_classes(&refinement, |w| self.contains(w))
    }

    pub fn union(&self, other: &DefinableSet) -> Result<DefinableSet, SetError> {
        self.check_space(other)?;
        let mut cells = self.cells.clone();
        cells.extend_from_slice(&other.cells);
        Ok(DefinableSet {
            space: Arc::clone(&self.space),
            cells,
        })
    }

    pub fn intersect(&self, other: &DefinableSet) -> Result<DefinableSet, SetError> {
        self.check_space(other)?;
        let mut cells = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                if let Some(m) = a.meet(b) {
                    cells.push(m);
                }
            }
        }
        Ok(DefinableSet {
            space: Arc::clone(&self.space),
            cells,
        })
    }

    /// Complement within the carrier.
    pub fn complement(&self) -> DefinableSet {
        let refinement = self.refinement_with(&[]);
        let cells = cells_from_classes(&refinement, |w| {
            self.space.carrier_contains(w) && !self.contains(w)
        });
        DefinableSet {
            space: Arc::clone(&self.space),
            cells,
        }
    }

    pub fn minus(&self, other: &DefinableSet) -> Result<DefinableSet, SetError> {
        self.check_space(other)?;
        let refinement = self.refinement_with(&[other]);
        let cells = cells_from_classes(&refinement, |w| self.contains(w) && !other.contains(w));
        Ok(DefinableSet {
            space: Arc::clone(&self.space),
            cells,
        })
    }

    pub fn subset_of(&self, other: &DefinableSet) -> Result<bool, SetError> {
        self.check_space(other)?;
        let refinement = self.refinement_with(&[other]);
        let holds = refinement
            .witnesses()
            .all(|w| !self.contains(w) || other.contains(w));
        Ok(holds)
    }

    /// Extensional equality, decided on the common refinement.
    pub fn equals(&self, other: &DefinableSet) -> Result<bool, SetError> {
        self.check_space(other)?;
        let refinement = self.refinement_with(&[other]);
        let holds = refinement
            .witnesses()
            .all(|w| self.contains(w) == other.contains(w));
        Ok(holds)
    }

    /// Limit points within the ambient interval (all of them lie in the
    /// carrier, which is closed).
    pub fn derived(&self) -> DefinableSet {
        let cells = self
            .cells
            .iter()
            .map(Cell::derived)
            .filter(|c| !c.is_empty())
            .collect();
        DefinableSet {
            space: Arc::clone(&self.space),
            cells,
        }
    }

    pub fn closure(&self) -> DefinableSet {
        let mut cells = self.cells.clone();
        cells.extend(self.derived().cells);
        DefinableSet {
            space: Arc::clone(&self.space),
            cells,
        }
    }

    /// Interior relative to the carrier.
    pub fn interior(&self) -> DefinableSet {
        self.complement().closure().complement()
    }

    /// Limit points of `self` computed inside the closed subset `s`;
    /// requires `self ⊆ s`.
    pub fn derived_in(&self, s: &DefinableSet) -> Result<DefinableSet, SetError> {
        self.check_space(s)?;
        if let Some(w) = witness_not_subset(self, s) {
            return Err(SetError::NotSubset(w));
        }
        if let Some(w) = witness_not_closed(s) {
            return Err(SetError::NotClosed(w));
        }
        self.derived().intersect(s)
    }

    /// Closed in the ambient interval; equivalently compact, the interval
    /// being compact Hausdorff.
    pub fn is_closed(&self) -> bool {
        witness_not_closed(self).is_none()
    }

    pub fn is_compact(&self) -> bool {
        self.is_closed()
    }

    /// Is `self` clopen in the subspace `s`? Requires `self ⊆ s`.
    pub fn is_clopen_in(&self, s: &DefinableSet) -> Result<bool, SetError> {
        self.check_space(s)?;
        if let Some(w) = witness_not_subset(self, s) {
            return Err(SetError::NotSubset(w));
        }
        Ok(self.clopen_defect_in(s)?.is_none())
    }

    /// A point witnessing that `self` is not clopen in `s`, if any.
    pub(crate) fn clopen_defect_in(&self, s: &DefinableSet) -> Result<Option<Ordinal>, SetError> {
        let rest = s.minus(self)?;
        // closed in s: no limit point of self inside rest, and vice versa
        if let Some(w) = self.derived().intersect(&rest)?.least_point() {
            return Ok(Some(w));
        }
        if let Some(w) = rest.derived().intersect(self)?.least_point() {
            return Ok(Some(w));
        }
        Ok(None)
    }

    /// Points isolated in the subspace topology of `self`.
    pub fn isolated_points(&self) -> DefinableSet {
        self.minus(&self.derived()).expect("same space")
    }

    /// Iterated subspace derived sets, ending with the empty set.
    pub fn cb_chain(&self) -> Vec<DefinableSet> {
        let mut chain = vec![self.clone()];
        loop {
            let last = chain.last().unwrap();
            if last.is_empty() {
                break;
            }
            let next = last
                .derived()
                .intersect(last)
                .expect("same space");
            chain.push(next);
        }
        chain
    }

    /// Least `k` with the k-th subspace derived set empty.
    pub fn cb_rank(&self) -> usize {
        self.cb_chain().len() - 1
    }

    pub fn least_point(&self) -> Option<Ordinal> {
        self.cells.iter().filter_map(Cell::least_point).min()
    }

    pub fn count(&self) -> SetCount {
        let mut total: u64 = 0;
        let refinement = self.refinement_with(&[]);
        for piece in &refinement.pieces {
            for (d, w) in piece.witnesses.iter().enumerate() {
                if !self.contains(w) {
                    continue;
                }
                match class_count(w, d as u32, &piece.hi) {
                    SetCount::Infinite => return SetCount::Infinite,
                    SetCount::Finite(n) => total = total.saturating_add(n),
                }
            }
        }
        SetCount::Finite(total)
    }

    /// All points when the set has at most `cap` of them.
    pub fn points_capped(&self, cap: usize) -> Option<Vec<Ordinal>> {
        let mut points = Vec::new();
        let refinement = self.refinement_with(&[]);
        for piece in &refinement.pieces {
            for (d, w) in piece.witnesses.iter().enumerate() {
                if !self.contains(w) {
                    continue;
                }
                let d = d as u32;
                let mut x = w.clone();
                loop {
                    points.push(x.clone());
                    if points.len() > cap {
                        return None;
                    }
                    x = x.add(&Ordinal::w_pow(d));
                    if x > piece.hi {
                        break;
                    }
                }
            }
        }
        points.sort();
        Some(points)
    }
}

impl fmt::Display for DefinableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells = self.normalized_cells();
        if cells.is_empty() {
            return write!(f, "(empty)");
        }
        let parts: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Number of points of degree `d` in `(block of x0, hi]` starting at `x0`;
/// the class is the arithmetic progression `x0 + w^d * k`.
fn class_count(x0: &Ordinal, d: u32, hi: &Ordinal) -> SetCount {
    let head: Ordinal = {
        let terms: Vec<(u32, u64)> = x0
            .terms()
            .iter()
            .copied()
            .take_while(|&(e, _)| e > d)
            .collect();
        Ordinal::from_terms(terms).expect("truncation preserves normal form")
    };
    if head.add(&Ordinal::w_pow(d + 1)) <= *hi {
        return SetCount::Infinite;
    }
    let c0 = x0
        .terms()
        .iter()
        .find(|&&(e, _)| e == d)
        .map_or(0, |&(_, c)| c);
    let rho = head.left_sub(hi).expect("head <= x0 <= hi");
    let c_max = rho
        .terms()
        .iter()
        .find(|&&(e, _)| e == d)
        .map_or(0, |&(_, c)| c);
    SetCount::Finite(c_max - c0 + 1)
}

fn witness_not_subset(a: &DefinableSet, b: &DefinableSet) -> Option<Ordinal> {
    a.minus(b).expect("same space").least_point()
}

fn witness_not_closed(a: &DefinableSet) -> Option<Ordinal> {
    a.derived().minus(a).expect("same space").least_point()
}

/// A finite point set separating the Boolean algebra generated by `family`
/// (together with the carrier): two generated sets are equal iff they agree
/// on these points. Includes every cell endpoint, endpoint successors, the
/// least witness of every degree class of the refinement, and approaching
/// witnesses below each limit endpoint.
pub fn canonical_test_points(space: &Arc<Space>, family: &[&DefinableSet]) -> Vec<Ordinal> {
    let mut cells: Vec<Cell> = space.carrier_cells().to_vec();
    for set in family {
        cells.extend_from_slice(set.cells());
    }
    test_points_for_cells(space, &cells, &[])
}

/// Same separation contract, on raw cells plus distinguished single points.
pub(crate) fn test_points_for_cells(
    space: &Arc<Space>,
    cells: &[Cell],
    extra_points: &[Ordinal],
) -> Vec<Ordinal> {
    let top = space.top();
    let mut all_cells: Vec<Cell> = space.carrier_cells().to_vec();
    all_cells.extend_from_slice(cells);
    all_cells.extend(extra_points.iter().map(Cell::singleton));

    let mut points: Vec<Ordinal> = Vec::new();
    let refinement = refine(top, &[&all_cells]);
    points.extend(refinement.witnesses().cloned());

    let mut endpoints: Vec<Ordinal> = vec![Ordinal::zero(), top.clone()];
    for c in &all_cells {
        if let Some(lo) = &c.lo {
            endpoints.push(lo.clone());
        }
        endpoints.push(c.hi.clone());
    }
    for e in endpoints {
        if e <= *top {
            let succ = e.succ();
            if succ <= *top {
                points.push(succ);
            }
            if e.is_limit() {
                // canonical witnesses approaching e from below, one per degree
                let base = e.block_start().expect("limit ordinals are nonzero");
                for d in 0..e.deg() {
                    points.push(base.add(&Ordinal::w_pow(d)));
                }
            }
            points.push(e);
        }
    }
    points.sort();
    points.dedup();
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ord(s: &str) -> Ordinal {
        Ordinal::parse(s).unwrap()
    }

    fn full_cell(lo: &str, hi: &str) -> Cell {
        let lo = if lo == "-" { None } else { Some(ord(lo)) };
        Cell::interval(lo, ord(hi))
    }

    fn deg_cell(lo: &str, hi: &str, dmin: u32, dmax: DegMax) -> Cell {
        let lo = if lo == "-" { None } else { Some(ord(lo)) };
        Cell::new(lo, ord(hi), dmin, dmax)
    }

    fn set(space: &Arc<Space>, cells: Vec<Cell>) -> DefinableSet {
        DefinableSet::new(space, cells).unwrap()
    }

    /// Independent limit-point oracle: `gamma` is a limit point of `a` iff
    /// some degree class below `gamma` meets `a` beyond every breakpoint.
    /// Uses only membership, endpoints and `next_of_degree`.
    fn oracle_is_limit_point(a: &DefinableSet, gamma: &Ordinal) -> bool {
        if !gamma.is_limit() {
            return false;
        }
        let mut beta = gamma.block_start().unwrap();
        let mut consider = |p: &Ordinal| {
            if *p < *gamma && *p > beta {
                beta = p.clone();
            }
        };
        for c in a.cells() {
            if let Some(lo) = &c.lo {
                consider(lo);
            }
            let hi = c.hi.clone();
            consider(&hi);
        }
        (0..gamma.deg()).any(|d| {
            let x = Ordinal::next_of_degree(Some(&beta), d);
            x < *gamma && a.contains(&x)
        })
    }

    #[test]
    fn membership_edges() {
        let space = Space::interval(ord("w^2"));
        let a = set(&space, vec![deg_cell("-", "w^2", 1, DegMax::Inf)]);
        assert!(!a.contains(&ord("0"))); // deg(0) = 0
        assert!(!a.contains(&ord("7")));
        assert!(a.contains(&ord("w*3")));
        assert!(a.contains(&ord("w^2")));
        assert!(!a.contains(&ord("w+1")));
    }

    #[test]
    fn singleton_cell_is_exact() {
        for x in ["0", "5", "w", "w*4", "w^2", "w^2+w*2", "w^2+3"] {
            let x = ord(x);
            let c = Cell::singleton(&x);
            assert!(c.contains(&x));
            assert_eq!(c.least_point(), Some(x.clone()));
            // a couple of near misses
            assert!(!c.contains(&x.succ()));
            if let Some(p) = x.pred() {
                assert!(!c.contains(&p));
            }
        }
    }

    #[test]
    fn intersect_example() {
        // {x in (0,w^2] : deg >= 1} ∩ (0,w] = {w}
        let space = Space::interval(ord("w^2"));
        let a = set(&space, vec![deg_cell("0", "w^2", 1, DegMax::Inf)]);
        let b = set(&space, vec![full_cell("0", "w")]);
        let meet = a.intersect(&b).unwrap();
        let w_only = DefinableSet::singleton(&space, &ord("w")).unwrap();
        assert!(meet.equals(&w_only).unwrap());
    }

    #[test]
    fn complement_example() {
        // complement of {x in [0,w^2] : deg >= 1} = {0} ∪ {successor-area points}
        let space = Space::interval(ord("w^2"));
        let a = set(&space, vec![deg_cell("-", "w^2", 1, DegMax::Inf)]);
        let c = a.complement();
        assert!(c.contains(&ord("0")));
        assert!(c.contains(&ord("4")));
        assert!(c.contains(&ord("w+1")));
        assert!(!c.contains(&ord("w")));
        assert!(!c.contains(&ord("w^2")));
        assert!(c.union(&a).unwrap().equals(&DefinableSet::full(&space)).unwrap());
        assert!(c.intersect(&a).unwrap().is_empty());
    }

    #[test]
    fn derived_examples() {
        let space = Space::interval(ord("w^2"));
        let full = DefinableSet::full(&space);
        let d1 = full.derived();
        let expected = set(&space, vec![deg_cell("-", "w^2", 1, DegMax::Inf)]);
        assert!(d1.equals(&expected).unwrap());

        // limit points of the degree-0 points: every limit up to w^2
        let deg0 = set(&space, vec![deg_cell("0", "w^2", 0, DegMax::Fin(0))]);
        assert!(deg0.derived().equals(&expected).unwrap());

        // limit points of {w*k : k >= 1} = {w^2}
        let deg1 = set(&space, vec![deg_cell("0", "w^2", 1, DegMax::Fin(1))]);
        let top_only = DefinableSet::singleton(&space, &ord("w^2")).unwrap();
        assert!(deg1.derived().equals(&top_only).unwrap());

        // finite sets have no limit points
        let finite = set(&space, vec![full_cell("-", "9")]);
        assert!(finite.derived().is_empty());
    }

    #[test]
    fn derived_closed_form_matches_sampling_oracle() {
        // the mandated validation of the one-cell derived formula
        let space = Space::interval(ord("w^3*2"));
        let cells = [
            deg_cell("-", "w^3*2", 0, DegMax::Inf),
            deg_cell("0", "w^2", 1, DegMax::Fin(1)),
            deg_cell("w", "w^2*3+w*5", 0, DegMax::Fin(0)),
            deg_cell("w^2+1", "w^3+w^2", 2, DegMax::Inf),
            deg_cell("3", "w*2+7", 0, DegMax::Inf),
            deg_cell("-", "w^3", 1, DegMax::Fin(2)),
            deg_cell("w^3", "w^3+w", 0, DegMax::Fin(0)),
        ];
        for cell in cells {
            let a = set(&space, vec![cell]);
            let d = a.derived();
            let probes = canonical_test_points(&space, &[&a, &d]);
            for x in &probes {
                assert_eq!(
                    d.contains(x),
                    oracle_is_limit_point(&a, x),
                    "derived mismatch at {x} for {}",
                    a.cells()[0]
                );
            }
        }
    }

    #[test]
    fn closure_and_isolated_examples() {
        let space = Space::interval(ord("w^2"));
        let deg0 = set(&space, vec![deg_cell("0", "w^2", 0, DegMax::Fin(0))]);
        let closed = deg0.closure();
        assert!(closed.equals(&set(&space, vec![full_cell("0", "w^2")])).unwrap());

        let full = DefinableSet::full(&space);
        let iso = full.isolated_points();
        assert!(iso.contains(&ord("0")));
        assert!(iso.contains(&ord("w+1")));
        assert!(!iso.contains(&ord("w")));
        assert!(!iso.contains(&ord("w^2")));
    }

    #[test]
    fn clopen_checks() {
        let space = Space::interval(ord("w"));
        let full = DefinableSet::full(&space);
        let tail = set(&space, vec![full_cell("0", "w")]);
        assert!(tail.is_clopen_in(&full).unwrap());

        let w_only = DefinableSet::singleton(&space, &ord("w")).unwrap();
        assert!(!w_only.is_clopen_in(&full).unwrap());
        // but {w} is clopen in the subspace {w}
        assert!(w_only.is_clopen_in(&w_only).unwrap());

        let naturals = set(&space, vec![deg_cell("0", "w", 0, DegMax::Fin(0))]);
        assert!(!naturals.is_clopen_in(&full).unwrap());
    }

    #[test]
    fn compactness_is_closedness() {
        let space = Space::interval(ord("w"));
        let closed = set(&space, vec![full_cell("0", "w")]);
        assert!(closed.is_compact());
        let open_tail = set(&space, vec![deg_cell("0", "w", 0, DegMax::Fin(0))]);
        assert!(!open_tail.is_compact());
        assert!(set(&space, vec![full_cell("-", "5")]).is_compact());
    }

    #[test]
    fn cb_chain_examples() {
        let space = Space::interval(ord("w"));
        let chain = DefinableSet::full(&space).cb_chain();
        assert_eq!(chain.len(), 3);
        let w_only = DefinableSet::singleton(&space, &ord("w")).unwrap();
        assert!(chain[1].equals(&w_only).unwrap());
        assert!(chain[2].is_empty());

        for k in 0..=4u32 {
            let space = Space::interval(Ordinal::w_pow(k));
            assert_eq!(
                DefinableSet::full(&space).cb_rank(),
                k as usize + 1,
                "cb_rank of [0, w^{k}]"
            );
        }

        let space = Space::interval(ord("w^2"));
        let finite = set(&space, vec![full_cell("-", "17")]);
        assert_eq!(finite.cb_rank(), 1);
        assert_eq!(DefinableSet::empty(&space).cb_rank(), 0);
    }

    #[test]
    fn count_and_points() {
        let space = Space::interval(ord("w^2"));
        assert_eq!(
            set(&space, vec![full_cell("-", "5")]).count(),
            SetCount::Finite(6)
        );
        assert_eq!(
            set(&space, vec![full_cell("0", "w")]).count(),
            SetCount::Infinite
        );
        let limits_below = set(&space, vec![deg_cell("0", "w*3", 1, DegMax::Fin(1))]);
        assert_eq!(limits_below.count(), SetCount::Finite(3));
        assert_eq!(
            limits_below.points_capped(10).unwrap(),
            vec![ord("w"), ord("w*2"), ord("w*3")]
        );
        assert_eq!(set(&space, vec![full_cell("0", "w")]).points_capped(100), None);
    }

    #[test]
    fn carrier_validation() {
        let err = Space::with_carrier(ord("w"), vec![deg_cell("0", "w", 0, DegMax::Fin(0))]);
        assert_eq!(err.unwrap_err(), SetError::CarrierNotClosed(ord("w")));

        let ok = Space::with_carrier(
            ord("w^2"),
            vec![full_cell("-", "3"), deg_cell("w*2", "w*3", 0, DegMax::Inf)],
        );
        let space = ok.unwrap();
        let full = DefinableSet::full(&space);
        assert!(full.contains(&ord("w*3")));
        assert!(!full.contains(&ord("w")));
        // complement is relative to the carrier
        let three = DefinableSet::singleton(&space, &ord("3")).unwrap();
        let c = three.complement();
        assert!(c.contains(&ord("0")));
        assert!(!c.contains(&ord("4")));
        assert!(c.contains(&ord("w*3")));
    }

    #[test]
    fn subspace_membership_outside_carrier_is_false() {
        let space =
            Space::with_carrier(ord("w"), vec![full_cell("-", "2"), deg_cell("0", "w", 1, DegMax::Inf)])
                .unwrap();
        let everything = DefinableSet::new(&space, vec![full_cell("-", "w")]).unwrap();
        assert!(everything.contains(&ord("w")));
        assert!(!everything.contains(&ord("7")));
        assert_eq!(everything.count(), SetCount::Finite(4)); // 0,1,2,w
    }

    #[test]
    fn test_point_contract_includes() {
        let space = Space::interval(ord("w^2"));
        let a = set(&space, vec![full_cell("-", "3")]);
        let pts = canonical_test_points(&space, &[&a]);
        for expected in ["0", "3", "4", "w^2"] {
            assert!(pts.contains(&ord(expected)), "missing {expected}");
        }
        // approaching witnesses below the limit endpoint w^2
        assert!(pts.contains(&ord("w")));
    }

    fn arb_cell() -> impl Strategy<Value = Cell> {
        let arb_ord = prop::collection::btree_map(0u32..=2, 1u64..=3, 0..3).prop_map(|m| {
            let mut terms: Vec<(u32, u64)> = m.into_iter().collect();
            terms.reverse();
            Ordinal::from_terms(terms).unwrap()
        });
        (
            prop::option::of(arb_ord.clone()),
            arb_ord,
            0u32..=2,
            prop_oneof![Just(DegMax::Inf), (0u32..=2).prop_map(DegMax::Fin)],
        )
            .prop_map(|(lo, hi, dmin, dmax)| Cell::new(lo, hi, dmin, dmax))
    }

    fn arb_set(space: Arc<Space>) -> impl Strategy<Value = DefinableSet> {
        prop::collection::vec(arb_cell(), 0..4).prop_map(move |cells| {
            let cells = cells
                .into_iter()
                .map(|mut c| {
                    if c.hi > *space.top() {
                        c.hi = space.top().clone();
                    }
                    c
                })
                .collect();
            DefinableSet::new(&space, cells).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn boolean_laws_at_test_points(
            a in arb_set(Space::interval(Ordinal::parse("w^2*2").unwrap())),
            b in arb_set(Space::interval(Ordinal::parse("w^2*2").unwrap())),
        ) {
            let space = a.space().clone();
            let union = a.union(&b).unwrap();
            let meet = a.intersect(&b).unwrap();
            let diff = a.minus(&b).unwrap();
            let comp = a.complement();
            let sets = [&a, &b, &union, &meet, &diff, &comp];
            for x in canonical_test_points(&space, &sets) {
                prop_assert_eq!(union.contains(&x), a.contains(&x) || b.contains(&x));
                prop_assert_eq!(meet.contains(&x), a.contains(&x) && b.contains(&x));
                prop_assert_eq!(diff.contains(&x), a.contains(&x) && !b.contains(&x));
                prop_assert_eq!(comp.contains(&x), !a.contains(&x));
            }
        }

        #[test]
        fn derived_agrees_with_oracle(
            a in arb_set(Space::interval(Ordinal::parse("w^2*2").unwrap())),
        ) {
            let space = a.space().clone();
            let d = a.derived();
            for x in canonical_test_points(&space, &[&a, &d]) {
                prop_assert_eq!(d.contains(&x), oracle_is_limit_point(&a, &x),
                    "derived mismatch at {}", x);
            }
        }

        #[test]
        fn closure_laws(
            a in arb_set(Space::interval(Ordinal::parse("w^2*2").unwrap())),
            b in arb_set(Space::interval(Ordinal::parse("w^2*2").unwrap())),
        ) {
            let cl = a.closure();
            prop_assert!(a.subset_of(&cl).unwrap());
            prop_assert!(cl.is_closed());
            prop_assert!(cl.closure().equals(&cl).unwrap());
            let cl_union = a.union(&b).unwrap().closure();
            prop_assert!(cl_union.equals(&cl.union(&b.closure()).unwrap()).unwrap());
        }

        #[test]
        fn interior_duality(
            a in arb_set(Space::interval(Ordinal::parse("w^2*2").unwrap())),
        ) {
            let int = a.interior();
            prop_assert!(int.subset_of(&a).unwrap());
            prop_assert!(int.complement().is_closed());
            // x in int(A) iff x in A and x not a limit of the complement
            let alt = a.minus(&a.complement().derived()).unwrap();
            prop_assert!(int.equals(&alt).unwrap());
        }

        #[test]
        fn test_points_separate(
            a in arb_set(Space::interval(Ordinal::parse("w^2*2").unwrap())),
            b in arb_set(Space::interval(Ordinal::parse("w^2*2").unwrap())),
        ) {
            let space = a.space().clone();
            let pts = canonical_test_points(&space, &[&a, &b]);
            let agree = pts.iter().all(|x| a.contains(x) == b.contains(x));
            prop_assert_eq!(agree, a.equals(&b).unwrap());
        }

        #[test]
        fn normalized_cells_are_disjoint_and_equal(
            a in arb_set(Space::interval(Ordinal::parse("w^2*2").unwrap())),
        ) {
            let cells = a.normalized_cells();
            for (i, c) in cells.iter().enumerate() {
                prop_assert!(!c.is_empty());
                for d in &cells[i + 1..] {
                    prop_assert!(c.meet(d).is_none(), "{c} overlaps {d}");
                }
            }
            let rebuilt = DefinableSet::new(a.space(), cells).unwrap();
            prop_assert!(rebuilt.equals(&a).unwrap());
        }

        #[test]
        fn cb_chain_strictly_decreases(
            a in arb_set(Space::interval(Ordinal::parse("w^2*2").unwrap())),
        ) {
            let chain = a.cb_chain();
            for k in 1..chain.len() {
                prop_assert!(chain[k].subset_of(&chain[k - 1]).unwrap());
                prop_assert!(!chain[k].equals(&chain[k - 1]).unwrap());
            }
            prop_assert!(chain.last().unwrap().is_empty());
        }

        #[test]
        fn isolated_points_have_clopen_singletons(
            a in arb_set(Space::interval(Ordinal::parse("w^2*2").unwrap())),
        ) {
            let space = a.space().clone();
            if a.is_empty() { return Ok(()); }
            let iso = a.isolated_points();
            let der = a.derived().intersect(&a).unwrap();
            for x in canonical_test_points(&space, &[&a]) {
                if iso.contains(&x) {
                    let single = DefinableSet::singleton(&space, &x).unwrap();
                    prop_assert!(single.is_clopen_in(&a).unwrap());
                }
                if der.contains(&x) {
                    let single = DefinableSet::singleton(&space, &x).unwrap();
                    prop_assert!(!single.is_clopen_in(&a).unwrap());
                }
            }
        }

        #[test]
        fn count_matches_points(
            a in arb_set(Space::interval(Ordinal::parse("w*5").unwrap())),
        ) {
            match a.count() {
                SetCount::Finite(n) if n <= 64 => {
                    let pts = a.points_capped(64).unwrap();
                    prop_assert_eq!(pts.len() as u64, n);
                    for p in &pts {
                        prop_assert!(a.contains(p));
                    }
                }
                _ => {
                    prop_assert!(a.points_capped(1000).is_none());
                }
            }
        }
    }
}
