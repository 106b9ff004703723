//! Integer-valued maps on the carrier encoding ideal arithmetic pointwise:
//! products add values, the ideal sum is the pointwise minimum, and
//! factorization into radical layers is the level-set chain `{x : v(x) >= n}`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::ordinal::Ordinal;
use crate::sets::{refine, Cell, DefinableSet, DegMax, Refinement, SetError, Space};

#[derive(Debug, Error, Clone)]
pub enum IdealError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("point {0} lies outside the carrier")]
    OutsideCarrier(Ordinal),
    #[error("pieces overlap: {first} and {second}")]
    PiecesOverlap { first: Cell, second: Cell },
    #[error("piece {cell} leaves the carrier at {witness}")]
    PieceOutsideCarrier { cell: Cell, witness: Ordinal },
    #[error("map is not integral: value {value} at {witness}")]
    NotIntegral { witness: Ordinal, value: i64 },
    #[error("map is not continuous: least discontinuity at {least} in {witnesses}")]
    NotContinuous {
        least: Ordinal,
        witnesses: DefinableSet,
    },
    #[error("factor {index} is not clopen in the carrier: witness {witness}")]
    FactorNotClopen { index: usize, witness: Ordinal },
    #[error("factor {index} is not contained in factor {}: witness {witness}", index - 1)]
    FactorsNotDecreasing { index: usize, witness: Ordinal },
}

/// Integer-valued map of finite description on the carrier of `space`.
/// Value at `x`: the override at `x` if present, else the value of the
/// unique piece containing `x`, else 0.
#[derive(Clone, Debug)]
pub struct IdealMap {
    space: Arc<Space>,
    pieces: Vec<(Cell, i64)>,
    overrides: BTreeMap<Ordinal, i64>,
}

impl IdealMap {
    /// Validates the representation: pieces pairwise disjoint and inside the
    /// carrier, override points inside the carrier.
    pub fn new(
        space: &Arc<Space>,
        pieces: Vec<(Cell, i64)>,
        overrides: Vec<(Ordinal, i64)>,
    ) -> Result<IdealMap, IdealError> {
        let pieces: Vec<(Cell, i64)> = pieces.into_iter().filter(|(c, _)| !c.is_empty()).collect();
        for (c, _) in &pieces {
            if c.hi > *space.top() {
                return Err(SetError::CellOutOfRange(c.to_string()).into());
            }
        }
        for (i, (a, _)) in pieces.iter().enumerate() {
            for (b, _) in &pieces[i + 1..] {
                if let Some(_) = a.meet(b) {
                    return Err(IdealError::PiecesOverlap {
                        first: a.clone(),
                        second: b.clone(),
                    });
                }
            }
        }
        let cells: Vec<Cell> = pieces.iter().map(|(c, _)| c.clone()).collect();
        let refinement = refine(space.top(), &[space.carrier_cells(), &cells]);
        for w in refinement.witnesses() {
            if !space.carrier_contains(w) {
                if let Some((c, _)) = pieces.iter().find(|(c, _)| c.contains(w)) {
                    return Err(IdealError::PieceOutsideCarrier {
                        cell: c.clone(),
                        witness: w.clone(),
                    });
                }
            }
        }
        let mut map = BTreeMap::new();
        for (x, v) in overrides {
            if !space.carrier_contains(&x) {
                return Err(IdealError::OutsideCarrier(x));
            }
            map.insert(x, v);
        }
        Ok(IdealMap {
            space: Arc::clone(space),
            pieces,
            overrides: map,
        })
    }

    pub fn zero(space: &Arc<Space>) -> IdealMap {
        IdealMap {
            space: Arc::clone(space),
            pieces: Vec::new(),
            overrides: BTreeMap::new(),
        }
    }

    /// `v` times the characteristic map of `set`.
    pub fn indicator(set: &DefinableSet, v: i64) -> IdealMap {
        let pieces = if v == 0 {
            Vec::new()
        } else {
            set.normalized_cells().into_iter().map(|c| (c, v)).collect()
        };
        IdealMap {
            space: Arc::clone(set.space()),
            pieces,
            overrides: BTreeMap::new(),
        }
    }

    /// Sum of indicator terms; cells may overlap, values add up.
    pub fn from_linear_combination(
        space: &Arc<Space>,
        terms: Vec<(Cell, i64)>,
    ) -> Result<IdealMap, IdealError> {
        for (c, _) in &terms {
            if c.hi > *space.top() {
                return Err(SetError::CellOutOfRange(c.to_string()).into());
            }
        }
        let eval = |w: &Ordinal| -> i64 {
            if !space.carrier_contains(w) {
                return 0;
            }
            terms
                .iter()
                .filter(|(c, _)| c.contains(w))
                .map(|&(_, v)| v)
                .sum()
        };
        let cells: Vec<Cell> = terms.iter().map(|(c, _)| c.clone()).collect();
        let refinement = refine(space.top(), &[space.carrier_cells(), &cells]);
        Ok(IdealMap {
            space: Arc::clone(space),
            pieces: value_cells_from_classes(&refinement, eval),
            overrides: BTreeMap::new(),
        })
    }

    /// Replaces the value at the single point `x`.
    pub fn with_override(mut self, x: Ordinal, v: i64) -> Result<IdealMap, IdealError> {
        if !self.space.carrier_contains(&x) {
            return Err(IdealError::OutsideCarrier(x));
        }
        self.overrides.insert(x, v);
        Ok(self)
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn pieces(&self) -> &[(Cell, i64)] {
        &self.pieces
    }

    pub fn overrides(&self) -> &BTreeMap<Ordinal, i64> {
        &self.overrides
    }

    /// Evaluation; errors off the carrier.
    pub fn value(&self, x: &Ordinal) -> Result<i64, IdealError> {
        if !self.space.carrier_contains(x) {
            return Err(IdealError::OutsideCarrier(x.clone()));
        }
        Ok(self.eval(x))
    }

    /// Total evaluation: 0 off the carrier.
    pub(crate) fn eval(&self, x: &Ordinal) -> i64 {
        if let Some(v) = self.overrides.get(x) {
            return *v;
        }
        self.pieces
            .iter()
            .find(|(c, _)| c.contains(x))
            .map_or(0, |&(_, v)| v)
    }

    /// Cells describing this map, override points as singletons.
    pub(crate) fn family_cells(&self) -> Vec<Cell> {
        let mut cells: Vec<Cell> = self.pieces.iter().map(|(c, _)| c.clone()).collect();
        cells.extend(self.overrides.keys().map(Cell::singleton));
        cells
    }

    fn check_space(&self, other: &IdealMap) -> Result<(), IdealError> {
        if *self.space == *other.space {
            Ok(())
        } else {
            Err(SetError::AmbientMismatch.into())
        }
    }

    fn refinement_with(&self, cell_families: &[&[Cell]]) -> Refinement {
        let own = self.family_cells();
        let mut families: Vec<&[Cell]> = vec![self.space.carrier_cells(), &own];
        families.extend_from_slice(cell_families);
        refine(self.space.top(), &families)
    }

    /// Pointwise binary combination, canonicalized.
    fn combine(&self, other: &IdealMap, f: impl Fn(i64, i64) -> i64) -> IdealMap {
        let other_cells = other.family_cells();
        let refinement = self.refinement_with(&[&other_cells]);
        let pieces = value_cells_from_classes(&refinement, |w| {
            if self.space.carrier_contains(w) {
                f(self.eval(w), other.eval(w))
            } else {
                0
            }
        });
        IdealMap {
            space: Arc::clone(&self.space),
            pieces,
            overrides: BTreeMap::new(),
        }
    }

    /// Pointwise unary rebuild, canonicalized; `extra` adds refinement cuts.
    fn rebuild_with(&self, extra: &[&[Cell]], f: impl Fn(i64) -> i64) -> IdealMap {
        let refinement = self.refinement_with(extra);
        let pieces = value_cells_from_classes(&refinement, |w| {
            if self.space.carrier_contains(w) {
                f(self.eval(w))
            } else {
                0
            }
        });
        IdealMap {
            space: Arc::clone(&self.space),
            pieces,
            overrides: BTreeMap::new(),
        }
    }

    /// Canonical form: disjoint nonzero pieces, no overrides.
    pub fn canonical(&self) -> IdealMap {
        self.rebuild_with(&[], |v| v)
    }

    /// Ideal product: values add.
    pub fn mul(&self, other: &IdealMap) -> Result<IdealMap, IdealError> {
        self.check_space(other)?;
        Ok(self.combine(other, |a, b| a + b))
    }

    /// Fractional inverse: values negate.
    pub fn inv(&self) -> IdealMap {
        self.rebuild_with(&[], |v| -v)
    }

    /// k-th power (k may be negative).
    pub fn pow(&self, k: i64) -> IdealMap {
        self.rebuild_with(&[], |v| v * k)
    }

    /// Ideal sum I+J: the larger ideal, hence the pointwise minimum.
    pub fn ideal_sum(&self, other: &IdealMap) -> Result<IdealMap, IdealError> {
        self.check_space(other)?;
        Ok(self.combine(other, i64::min))
    }

    /// Ideal intersection: the pointwise maximum.
    pub fn ideal_cap(&self, other: &IdealMap) -> Result<IdealMap, IdealError> {
        self.check_space(other)?;
        Ok(self.combine(other, i64::max))
    }

    /// Exact pointwise equality, decided at the canonical test points of the
    /// union of both descriptions.
    pub fn equal(&self, other: &IdealMap) -> Result<bool, IdealError> {
        self.check_space(other)?;
        let other_cells = other.family_cells();
        let refinement = self.refinement_with(&[&other_cells]);
        let holds = refinement.witnesses().all(|w| self.eval(w) == other.eval(w));
        Ok(holds)
    }

    /// Pointwise order (the containment-reversing order on ideals).
    pub fn leq(&self, other: &IdealMap) -> Result<bool, IdealError> {
        self.check_space(other)?;
        let other_cells = other.family_cells();
        let refinement = self.refinement_with(&[&other_cells]);
        let holds = refinement.witnesses().all(|w| self.eval(w) <= other.eval(w));
        Ok(holds)
    }

    pub fn is_zero(&self) -> bool {
        let refinement = self.refinement_with(&[]);
        let zero = refinement.witnesses().all(|w| self.eval(w) == 0);
        zero
    }

    /// All attained values (on the carrier).
    pub fn value_range(&self) -> BTreeSet<i64> {
        let refinement = self.refinement_with(&[]);
        refinement
            .witnesses()
            .filter(|w| self.space.carrier_contains(w))
            .map(|w| self.eval(w))
            .collect()
    }

    pub fn max_value(&self) -> i64 {
        self.value_range().into_iter().next_back().unwrap_or(0)
    }

    pub fn min_value(&self) -> i64 {
        self.value_range().into_iter().next().unwrap_or(0)
    }

    fn set_where(&self, extra: &[&[Cell]], pred: impl Fn(&Ordinal, i64) -> bool) -> DefinableSet {
        let refinement = self.refinement_with(extra);
        let cells = crate::sets::cells_from_classes(&refinement, |w| {
            self.space.carrier_contains(w) && pred(w, self.eval(w))
        });
        DefinableSet::from_cells_unchecked(&self.space, cells)
    }

    /// `{x : v(x) = 0}` within the carrier.
    pub fn zero_set(&self) -> DefinableSet {
        self.set_where(&[], |_, v| v == 0)
    }

    /// Closure of the non-zero set; always compact.
    pub fn support(&self) -> DefinableSet {
        self.set_where(&[], |_, v| v != 0).closure()
    }

    /// `{x : v(x) >= 1}`.
    pub fn v_set(&self) -> DefinableSet {
        self.set_where(&[], |_, v| v >= 1)
    }

    /// `{x : v(x) = value}`.
    pub fn level_set(&self, value: i64) -> DefinableSet {
        self.set_where(&[], |_, v| v == value)
    }

    /// `{x : v(x) >= bound}`.
    pub fn ge_set(&self, bound: i64) -> DefinableSet {
        self.set_where(&[], |_, v| v >= bound)
    }

    pub fn is_integral(&self) -> bool {
        self.integrality_witness().is_none()
    }

    /// Least point with a negative value, if any.
    pub fn integrality_witness(&self) -> Option<(Ordinal, i64)> {
        self.set_where(&[], |_, v| v < 0)
            .least_point()
            .map(|w| (w.clone(), self.eval(&w)))
    }

    /// Range contained in {0, 1}.
    pub fn is_radical(&self) -> bool {
        self.value_range().into_iter().all(|v| v == 0 || v == 1)
    }

    /// Characteristic map of `v_set`; requires an integral map.
    pub fn radical(&self) -> Result<IdealMap, IdealError> {
        if let Some((witness, value)) = self.integrality_witness() {
            return Err(IdealError::NotIntegral { witness, value });
        }
        Ok(self.rebuild_with(&[], |v| i64::from(v >= 1)))
    }

    /// Multiplication by the characteristic map of `set`.
    pub fn restrict_to(&self, set: &DefinableSet) -> Result<IdealMap, IdealError> {
        if *self.space != **set.space() {
            return Err(SetError::AmbientMismatch.into());
        }
        let refinement = self.refinement_with(&[set.cells()]);
        let pieces = value_cells_from_classes(&refinement, |w| {
            if set.contains(w) {
                self.eval(w)
            } else {
                0
            }
        });
        Ok(IdealMap {
            space: Arc::clone(&self.space),
            pieces,
            overrides: BTreeMap::new(),
        })
    }

    /// Continuity via level sets: every `{x : v(x) = c}` open in the carrier.
    pub fn is_continuous(&self) -> bool {
        let full = DefinableSet::full(&self.space);
        self.value_range().into_iter().all(|v| {
            let level = self.level_set(v);
            let rest = full.minus(&level).expect("same space");
            rest.derived().intersect(&level).expect("same space").is_empty()
        })
    }

    /// Points of the carrier where the map is not locally constant.
    /// Computed independently of `is_continuous`.
    pub fn discontinuity_set(&self) -> DefinableSet {
        let full = DefinableSet::full(&self.space);
        self.discontinuity_set_in(&full).expect("full carrier is closed")
    }

    /// Points of `s` where the restriction to `s` is not locally constant
    /// in the subspace topology.
    pub fn discontinuity_set_in(&self, s: &DefinableSet) -> Result<DefinableSet, IdealError> {
        if *self.space != **s.space() {
            return Err(SetError::AmbientMismatch.into());
        }
        Ok(self.set_where(&[s.cells()], |w, _| {
            s.contains(w) && !self.locally_constant_within(s, w)
        }))
    }

    /// Direct pointwise check: does some subspace neighbourhood of `x`
    /// inside `s` carry a constant value? Points not in `s` pass vacuously.
    /// Works from the order topology: only limits are approached, and only
    /// from below through the degree classes beyond the last breakpoint.
    pub fn locally_constant_within(&self, s: &DefinableSet, x: &Ordinal) -> bool {
        if !s.contains(x) || !x.is_limit() {
            return true;
        }
        let v = self.eval(x);
        let mut beta = match x.block_start() {
            Some(b) => b,
            None => return true,
        };
        let mut consider = |p: &Ordinal| {
            if *p < *x && *p > beta {
                beta = p.clone();
            }
        };
        for c in self
            .family_cells()
            .iter()
            .chain(self.space.carrier_cells())
            .chain(s.cells())
        {
            if let Some(lo) = &c.lo {
                consider(lo);
            }
            consider(&c.hi);
        }
        for d in 0..x.deg() {
            let w = Ordinal::next_of_degree(Some(&beta), d);
            if w < *x && s.contains(&w) && self.eval(&w) != v {
                return false;
            }
        }
        true
    }

    /// Positive and negative parts `(J, L)`: both integral, `v = J - L`.
    pub fn pos_neg_split(&self) -> (IdealMap, IdealMap) {
        let j = self.rebuild_with(&[], |v| v.max(0));
        let l = self.rebuild_with(&[], |v| (-v).max(0));
        (j, l)
    }

    /// The decreasing chain of level sets `X_n = {x : v(x) >= n}`,
    /// `n = 1..=max`; each factor is clopen and compact, and
    /// `sum of indicators = v`. Fails on non-integral or discontinuous maps.
    pub fn radical_factor(&self) -> Result<Vec<DefinableSet>, IdealError> {
        if let Some((witness, value)) = self.integrality_witness() {
            return Err(IdealError::NotIntegral { witness, value });
        }
        let disc = self.discontinuity_set();
        if let Some(least) = disc.least_point() {
            return Err(IdealError::NotContinuous {
                least,
                witnesses: disc,
            });
        }
        Ok((1..=self.max_value()).map(|n| self.ge_set(n)).collect())
    }

    /// Sum of the characteristic maps of `factors`; each factor must be
    /// clopen in the carrier (hence compact). Inverse of `radical_factor`
    /// when the factors decrease.
    pub fn radical_recompose(
        space: &Arc<Space>,
        factors: &[DefinableSet],
    ) -> Result<IdealMap, IdealError> {
        let full = DefinableSet::full(space);
        for (index, f) in factors.iter().enumerate() {
            if *f.space() != *space {
                return Err(SetError::AmbientMismatch.into());
            }
            if let Some(witness) = f.clopen_defect_in(&full)? {
                return Err(IdealError::FactorNotClopen { index, witness });
            }
            if index > 0 {
                if let Some(witness) = f.minus(&factors[index - 1])?.least_point() {
                    return Err(IdealError::FactorsNotDecreasing { index, witness });
                }
            }
        }
        let mut terms = Vec::new();
        for f in factors {
            terms.extend(f.cells().iter().map(|c| (c.clone(), 1)));
        }
        IdealMap::from_linear_combination(space, terms)
    }
}

/// Rebuilds disjoint value-labelled cells from the classes of a refinement,
/// dropping zero values; the sibling of `cells_from_classes` for maps.
pub(crate) fn value_cells_from_classes(
    refinement: &Refinement,
    mut eval: impl FnMut(&Ordinal) -> i64,
) -> Vec<(Cell, i64)> {
    struct PendingPiece {
        lo: Option<Ordinal>,
        hi: Ordinal,
        runs: Vec<(u32, DegMax, i64)>,
    }
    let mut pending: Vec<PendingPiece> = Vec::new();
    for piece in &refinement.pieces {
        let mut runs: Vec<(u32, DegMax, i64)> = Vec::new();
        let mut run: Option<(u32, i64)> = None;
        for (d, w) in piece.witnesses.iter().enumerate() {
            let d = d as u32;
            let v = eval(w);
            match run {
                Some((_, rv)) if rv == v => {}
                Some((a, rv)) => {
                    if rv != 0 {
                        runs.push((a, DegMax::Fin(d - 1), rv));
                    }
                    run = Some((d, v));
                }
                None => run = Some((d, v)),
            }
        }
        if let Some((a, rv)) = run {
            if rv != 0 {
                runs.push((a, DegMax::Inf, rv));
            }
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
        for (a, b, v) in p.runs {
            cells.push((Cell::new(p.lo.clone(), p.hi.clone(), a, b), v));
        }
    }
    cells
}
