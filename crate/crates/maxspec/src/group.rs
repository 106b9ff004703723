//! Free-abelian bookkeeping over finite families of ideal maps: joint atom
//! decompositions, subgroup bases with membership certificates, stratified
//! tuples glued along a scattered chain, restriction kernels with exactness
//! reports, and the order-mismatch exhibit for the gluing section.

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::ideal::{IdealError, IdealMap};
use crate::model::{DomainModel, ModelError};
use crate::ordinal::Ordinal;
use crate::sets::{refine, Cell, DefinableSet, DegMax, SetCount, SetError, Space};
use crate::zmatrix::{self, CancelToken, Cancelled, Hnf};

#[derive(Debug, Error)]
pub enum GroupError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cancelled(#[from] Cancelled),
    #[error("no generators supplied")]
    EmptyFamily,
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("component {stage} is nonzero at {witness}, outside its stratum")]
    ComponentOutsideStratum { stage: usize, witness: Ordinal },
    #[error("restriction to stratum {stratum} is discontinuous at {witness}")]
    Unglue { stratum: usize, witness: Ordinal },
    #[error("generator {index} is discontinuous at {witness}")]
    NonContinuousGenerator { index: usize, witness: Ordinal },
    #[error("expected a depth-one model over [0,w] with a single limit stage")]
    WrongModelShape,
    #[error("certificate coefficient does not fit in 64 bits")]
    CoefficientOverflow,
}

/// Joint level classes of a generator family: disjoint nonempty definable
/// sets on which every generator is constant, covering every support.
#[derive(Clone, Debug)]
pub struct AtomDecomposition {
    space: Arc<Space>,
    atoms: Vec<DefinableSet>,
    /// `table[g][a]` = value of generator `g` on atom `a`.
    table: Vec<Vec<i64>>,
}

impl AtomDecomposition {
    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn atoms(&self) -> &[DefinableSet] {
        &self.atoms
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.table
    }

    /// The map with the given atom coordinates.
    pub fn map_from_coords(&self, coords: &[i64]) -> Result<IdealMap, GroupError> {
        let mut terms = Vec::new();
        for (atom, &c) in self.atoms.iter().zip(coords) {
            if c != 0 {
                terms.extend(atom.normalized_cells().into_iter().map(|cell| (cell, c)));
            }
        }
        Ok(IdealMap::from_linear_combination(&self.space, terms)?)
    }
}

/// Atoms keyed by value vector, optionally split further along extra sets;
/// returns the per-atom membership vector for the extras.
fn decompose_with(
    gens: &[IdealMap],
    extra: &[&DefinableSet],
) -> Result<(AtomDecomposition, Vec<Vec<bool>>), GroupError> {
    let Some(first) = gens.first() else {
        return Err(GroupError::EmptyFamily);
    };
    let space = Arc::clone(first.space());
    for g in gens {
        if **g.space() != *space {
            return Err(SetError::AmbientMismatch.into());
        }
    }
    for e in extra {
        if **e.space() != *space {
            return Err(SetError::AmbientMismatch.into());
        }
    }
    let gen_cells: Vec<Vec<Cell>> = gens.iter().map(|g| g.family_cells()).collect();
    let mut families: Vec<&[Cell]> = vec![space.carrier_cells()];
    families.extend(gen_cells.iter().map(|c| c.as_slice()));
    families.extend(extra.iter().map(|e| e.cells()));
    let refinement = refine(space.top(), &families);

    let mut classes: std::collections::BTreeMap<(Vec<i64>, Vec<bool>), Vec<Cell>> =
        std::collections::BTreeMap::new();
    for piece in &refinement.pieces {
        for (d, w) in piece.witnesses.iter().enumerate() {
            if !space.carrier_contains(w) {
                continue;
            }
            let values: Vec<i64> = gens.iter().map(|g| g.eval(w)).collect();
            if values.iter().all(|&v| v == 0) {
                continue;
            }
            let membership: Vec<bool> = extra.iter().map(|e| e.contains(w)).collect();
            classes
                .entry((values, membership))
                .or_default()
                .push(Cell::new(
                    piece.lo.clone(),
                    piece.hi.clone(),
                    d as u32,
                    DegMax::Fin(d as u32),
                ));
        }
    }

    let mut entries: Vec<(Vec<i64>, Vec<bool>, DefinableSet)> = Vec::new();
    for ((values, membership), cells) in classes {
        let set = DefinableSet::new(&space, cells)?;
        entries.push((values, membership, set));
    }
    entries.sort_by_key(|(_, _, set)| set.least_point().expect("atoms are nonempty"));

    let atoms: Vec<DefinableSet> = entries.iter().map(|(_, _, s)| s.clone()).collect();
    let memberships: Vec<Vec<bool>> = entries.iter().map(|(_, m, _)| m.clone()).collect();
    let table: Vec<Vec<i64>> = (0..gens.len())
        .map(|g| entries.iter().map(|(v, _, _)| v[g]).collect())
        .collect();
    Ok((
        AtomDecomposition {
            space,
            atoms,
            table,
        },
        memberships,
    ))
}

pub fn atom_decompose(gens: &[IdealMap]) -> Result<AtomDecomposition, GroupError> {
    decompose_with(gens, &[]).map(|(dec, _)| dec)
}

/// Echelon description of the subgroup generated by a family, in atom
/// coordinates.
#[derive(Clone, Debug)]
pub struct IntBasis {
    pub decomposition: AtomDecomposition,
    /// Independent rows spanning the subgroup.
    pub basis: Vec<Vec<i64>>,
    pub rank: usize,
    /// Elementary divisors of the generator matrix.
    pub divisors: Vec<i64>,
}

impl IntBasis {
    pub fn basis_maps(&self) -> Result<Vec<IdealMap>, GroupError> {
        self.basis
            .iter()
            .map(|row| self.decomposition.map_from_coords(row))
            .collect()
    }
}

fn widen(rows: &[Vec<i64>]) -> Vec<Vec<i128>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| i128::from(x)).collect())
        .collect()
}

fn narrow_row(row: &[i128]) -> Result<Vec<i64>, GroupError> {
    row.iter()
        .map(|&x| i64::try_from(x).map_err(|_| GroupError::CoefficientOverflow))
        .collect()
}

fn basis_from_rows(
    decomposition: AtomDecomposition,
    rows: &[Vec<i128>],
    cancel: &CancelToken,
) -> Result<IntBasis, GroupError> {
    let hnf = zmatrix::hermite(rows, cancel)?;
    let basis = hnf
        .basis()
        .iter()
        .map(|r| narrow_row(r))
        .collect::<Result<Vec<_>, _>>()?;
    let divisors = zmatrix::smith_divisors(rows, cancel)?
        .iter()
        .map(|&d| i64::try_from(d).map_err(|_| GroupError::CoefficientOverflow))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IntBasis {
        decomposition,
        rank: hnf.rank,
        basis,
        divisors,
    })
}

pub fn subgroup_basis(gens: &[IdealMap], cancel: &CancelToken) -> Result<IntBasis, GroupError> {
    let dec = atom_decompose(gens)?;
    let rows = widen(&dec.table);
    basis_from_rows(dec, &rows, cancel)
}

#[derive(Clone, Debug)]
pub struct Membership {
    pub member: bool,
    /// Integer coefficients over the original generators reconstructing the
    /// candidate, when it lies in the subgroup.
    pub certificate: Option<Vec<i64>>,
}

/// Decides whether `h` is an integer combination of `gens`. The atoms are
/// recomputed jointly with `h`, so `h` need not be constant on the family's
/// own atoms.
pub fn subgroup_member(
    gens: &[IdealMap],
    h: &IdealMap,
    cancel: &CancelToken,
) -> Result<Membership, GroupError> {
    let mut family: Vec<IdealMap> = gens.to_vec();
    family.push(h.clone());
    let (dec, _) = decompose_with(&family, &[])?;
    let all = widen(&dec.table);
    let (gen_rows, h_row) = all.split_at(gens.len());
    let hnf = zmatrix::hermite(gen_rows, cancel)?;
    match hnf.solve_left(&h_row[0]) {
        Some(x) => Ok(Membership {
            member: true,
            certificate: Some(narrow_row(&x)?),
        }),
        None => Ok(Membership {
            member: false,
            certificate: None,
        }),
    }
}

/// Σ coeffs[i]·gens[i].
pub fn combination(gens: &[IdealMap], coeffs: &[i64]) -> Result<IdealMap, GroupError> {
    let Some(first) = gens.first() else {
        return Err(GroupError::EmptyFamily);
    };
    if gens.len() != coeffs.len() {
        return Err(GroupError::ComponentCount {
            expected: gens.len(),
            got: coeffs.len(),
        });
    }
    let mut acc = IdealMap::zero(first.space());
    for (g, &c) in gens.iter().zip(coeffs) {
        if c != 0 {
            acc = acc.mul(&g.pow(c))?;
        }
    }
    Ok(acc)
}

/// One map per stratum of a scattered model, each a full-space map that
/// vanishes off its stratum and is continuous in the stratum's subspace
/// topology. Componentwise addition.
#[derive(Clone, Debug)]
pub struct StratTuple {
    components: Vec<IdealMap>,
}

impl StratTuple {
    pub fn new(m: &DomainModel, components: Vec<IdealMap>) -> Result<StratTuple, GroupError> {
        let strata = m.strata();
        if components.len() != strata.len() {
            return Err(GroupError::ComponentCount {
                expected: strata.len(),
                got: components.len(),
            });
        }
        for (i, (c, s)) in components.iter().zip(&strata).enumerate() {
            if **c.space() != **m.space() {
                return Err(SetError::AmbientMismatch.into());
            }
            let masked = c.restrict_to(s)?;
            let stray = c.mul(&masked.inv())?;
            if let Some(witness) = stray.support().least_point() {
                return Err(GroupError::ComponentOutsideStratum { stage: i, witness });
            }
            if let Some(witness) = c.discontinuity_set_in(s)?.least_point() {
                return Err(GroupError::Unglue {
                    stratum: i,
                    witness,
                });
            }
        }
        Ok(StratTuple { components })
    }

    pub fn components(&self) -> &[IdealMap] {
        &self.components
    }

    pub fn add(&self, other: &StratTuple) -> Result<StratTuple, GroupError> {
        if self.components.len() != other.components.len() {
            return Err(GroupError::ComponentCount {
                expected: self.components.len(),
                got: other.components.len(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.mul(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(StratTuple { components })
    }

    pub fn equal(&self, other: &StratTuple) -> Result<bool, GroupError> {
        if self.components.len() != other.components.len() {
            return Ok(false);
        }
        for (a, b) in self.components.iter().zip(&other.components) {
            if !a.equal(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Componentwise pointwise order.
    pub fn leq(&self, other: &StratTuple) -> Result<bool, GroupError> {
        if self.components.len() != other.components.len() {
            return Ok(false);
        }
        for (a, b) in self.components.iter().zip(&other.components) {
            if !a.leq(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Extension by zero: the glued map agrees with `t_i` on stratum `i`. An
/// injective additive section of `unglue`.
pub fn glue(m: &DomainModel, t: &StratTuple) -> Result<IdealMap, GroupError> {
    let expected = m.strata().len();
    if t.components.len() != expected {
        return Err(GroupError::ComponentCount {
            expected,
            got: t.components.len(),
        });
    }
    let mut acc = IdealMap::zero(m.space());
    for c in &t.components {
        acc = acc.mul(c)?;
    }
    Ok(acc)
}

/// Splits a map along the strata; each piece must be continuous in its
/// stratum. Inverts `glue` on its image.
pub fn unglue(m: &DomainModel, nu: &IdealMap) -> Result<StratTuple, GroupError> {
    if **nu.space() != **m.space() {
        return Err(SetError::AmbientMismatch.into());
    }
    let components = m
        .strata()
        .iter()
        .map(|s| nu.restrict_to(s))
        .collect::<Result<Vec<_>, _>>()?;
    StratTuple::new(m, components)
}

/// Basis of `{g in span(gens) : g vanishes on C_i}`.
pub fn kernel_of_restriction(
    m: &DomainModel,
    gens: &[IdealMap],
    stage: usize,
    cancel: &CancelToken,
) -> Result<IntBasis, GroupError> {
    let (dec, restriction, _) = stage_matrices(m, gens, stage)?;
    let hnf_r = zmatrix::hermite(&restriction, cancel)?;
    let kernel_rows = zmatrix::mat_mul(&hnf_r.left_kernel(), &widen(&dec.table));
    basis_from_rows(dec, &kernel_rows, cancel)
}

#[derive(Clone, Debug)]
pub struct ExactnessReport {
    pub stage: usize,
    pub total_rank: usize,
    pub kernel_rank: usize,
    pub image_rank: usize,
    /// total = kernel + image.
    pub additive: bool,
    /// Elementary divisors of the kernel inside the span: all 1 exactly when
    /// the quotient by the kernel is free.
    pub quotient_divisors: Vec<i64>,
    pub quotient_torsion_free: bool,
}

fn stage_matrices(
    m: &DomainModel,
    gens: &[IdealMap],
    stage: usize,
) -> Result<(AtomDecomposition, Vec<Vec<i128>>, Vec<bool>), GroupError> {
    for g in gens {
        if **g.space() != **m.space() {
            return Err(SetError::AmbientMismatch.into());
        }
    }
    let c = m.stage_set(stage);
    let (dec, memberships) = decompose_with(gens, &[&c])?;
    let in_stage: Vec<bool> = memberships.iter().map(|v| v[0]).collect();
    let restriction: Vec<Vec<i128>> = dec
        .table
        .iter()
        .map(|row| {
            row.iter()
                .zip(&in_stage)
                .filter(|(_, &keep)| keep)
                .map(|(&v, _)| i128::from(v))
                .collect()
        })
        .collect();
    Ok((dec, restriction, in_stage))
}

/// Expresses each of `rows` over the echelon `basis` and returns the Smith
/// divisors of the coefficient matrix: all 1 exactly when the quotient of
/// the basis span by the row span is torsion-free.
fn quotient_divisors(
    basis_hnf: &Hnf,
    rows: &[Vec<i128>],
    cancel: &CancelToken,
) -> Result<Vec<i64>, GroupError> {
    let coeffs: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| {
            basis_hnf
                .solve_left(r)
                .expect("rows lie in the span by construction")
        })
        .collect();
    zmatrix::smith_divisors(&coeffs, cancel)?
        .iter()
        .map(|&d| i64::try_from(d).map_err(|_| GroupError::CoefficientOverflow))
        .collect()
}

pub fn exactness_report(
    m: &DomainModel,
    gens: &[IdealMap],
    stage: usize,
    cancel: &CancelToken,
) -> Result<ExactnessReport, GroupError> {
    let (dec, restriction, _) = stage_matrices(m, gens, stage)?;
    let all = widen(&dec.table);
    let hnf_all = zmatrix::hermite(&all, cancel)?;
    let hnf_r = zmatrix::hermite(&restriction, cancel)?;
    let kernel_rows = zmatrix::mat_mul(&hnf_r.left_kernel(), &all);
    let hnf_k = zmatrix::hermite(&kernel_rows, cancel)?;
    let basis_hnf = zmatrix::hermite(hnf_all.basis(), cancel)?;
    let divisors = quotient_divisors(&basis_hnf, hnf_k.basis(), cancel)?;
    Ok(ExactnessReport {
        stage,
        total_rank: hnf_all.rank,
        kernel_rank: hnf_k.rank,
        image_rank: hnf_r.rank,
        additive: hnf_all.rank == hnf_k.rank + hnf_r.rank,
        quotient_torsion_free: divisors.iter().all(|&d| d == 1),
        quotient_divisors: divisors,
    })
}

#[derive(Clone, Debug)]
pub struct AchievableRank {
    pub rank: u64,
    /// One continuous indicator per point of the first stage, restricting to
    /// that point's characteristic map there.
    pub witnesses: Vec<(Ordinal, IdealMap)>,
    pub achieved: bool,
}

#[derive(Clone, Debug)]
pub struct SigmaRReport {
    pub total_rank: usize,
    /// Subgroup of the span vanishing on the first stage.
    pub kernel_rank: usize,
    /// Rank of the restriction image on the first stage.
    pub image_rank: usize,
    pub additive: bool,
    pub quotient_divisors: Vec<i64>,
    pub torsion_free: bool,
    pub stage_count: SetCount,
    /// Present when the first stage is finite: its size is the achievable
    /// image rank, witnessed by explicit extension generators.
    pub achievable: Option<AchievableRank>,
}

/// Rank bookkeeping for the quotient of a continuous family by the
/// subgroup vanishing on the first stage.
pub fn sigma_r_report(
    m: &DomainModel,
    gens: &[IdealMap],
    cancel: &CancelToken,
) -> Result<SigmaRReport, GroupError> {
    for (index, g) in gens.iter().enumerate() {
        if **g.space() != **m.space() {
            return Err(SetError::AmbientMismatch.into());
        }
        if let Some(witness) = g.discontinuity_set().least_point() {
            return Err(GroupError::NonContinuousGenerator { index, witness });
        }
    }
    let report = exactness_report(m, gens, 1, cancel)?;
    let c1 = m.stage_set(1);
    let stage_count = c1.count();
    let achievable = match stage_count {
        SetCount::Infinite => None,
        SetCount::Finite(n) => {
            let points = c1
                .points_capped(n as usize)
                .expect("finite set enumerates within its own count");
            let mut witnesses = Vec::new();
            let mut prev: Option<Ordinal> = None;
            for p in points {
                let cell = Cell::interval(prev.clone(), p.clone());
                let set = DefinableSet::new(m.space(), vec![cell])?;
                witnesses.push((p.clone(), IdealMap::indicator(&set, 1)));
                prev = Some(p);
            }
            let achieved = if witnesses.is_empty() {
                true
            } else {
                let maps: Vec<IdealMap> = witnesses.iter().map(|(_, g)| g.clone()).collect();
                let (_, restriction, _) = stage_matrices(m, &maps, 1)?;
                zmatrix::hermite(&restriction, cancel)?.rank == n as usize
            };
            Some(AchievableRank {
                rank: n,
                witnesses,
                achieved,
            })
        }
    };
    Ok(SigmaRReport {
        total_rank: report.total_rank,
        kernel_rank: report.kernel_rank,
        image_rank: report.image_rank,
        additive: report.additive,
        torsion_free: report.quotient_torsion_free,
        quotient_divisors: report.quotient_divisors,
        stage_count,
        achievable,
    })
}

/// A pointwise-domination witness: the least isolated point where an
/// accepted map with value ≥ 1 on the whole first stage must exceed 1.
/// `None` when the map is rejected or takes a value below 1 on the stage.
pub fn domination_witness(
    m: &DomainModel,
    nu: &IdealMap,
) -> Result<Option<Ordinal>, GroupError> {
    if !m.mi_check(nu)?.is_accept() {
        return Ok(None);
    }
    let c1 = m.stage_set(1);
    if !c1.subset_of(&nu.ge_set(1))? {
        return Ok(None);
    }
    let Some(stratum) = m.stratum(0) else {
        return Ok(None);
    };
    Ok(nu.ge_set(2).intersect(&stratum)?.least_point())
}

#[derive(Clone, Debug)]
pub struct OrderMismatchExhibit {
    pub t1: StratTuple,
    pub t2: StratTuple,
    pub t1_le_t2: bool,
    pub t2_le_t1: bool,
    /// Whether glue(t1) dominates glue(t2) pointwise (it does not).
    pub glue_dominates: bool,
    pub trials: usize,
    /// Trials where the accepted map restricted to the limit stage as the
    /// unit spike and still dominated a stratum-0 spike pointwise.
    pub verified: usize,
    pub witnesses: Vec<Ordinal>,
}

/// Exhibits two componentwise-incomparable tuples whose glued maps are also
/// incomparable, yet every accepted map restricting to the unit spike at the
/// limit point dominates some isolated spike pointwise: the gluing section
/// does not respect the realizable order.
pub fn order_mismatch_demo(
    m: &DomainModel,
    seed: u64,
    trials: usize,
) -> Result<OrderMismatchExhibit, GroupError> {
    let space = m.space();
    let w = Ordinal::omega();
    let expected = DomainModel::sharp(&Space::interval(w.clone()));
    if *space.top() != w || !m.equivalent(&expected)? {
        return Err(GroupError::WrongModelShape);
    }
    let spike_w = IdealMap::indicator(&DefinableSet::singleton(space, &w)?, 1);
    let y = Ordinal::nat(1);
    let spike_y = IdealMap::indicator(&DefinableSet::singleton(space, &y)?, 1);
    let t1 = StratTuple::new(m, vec![IdealMap::zero(space), spike_w])?;
    let t2 = StratTuple::new(m, vec![spike_y, IdealMap::zero(space)])?;
    let g1 = glue(m, &t1)?;
    let g2 = glue(m, &t2)?;

    let mut rng = StdRng::seed_from_u64(seed);
    let mut verified = 0;
    let mut witnesses = Vec::new();
    for _ in 0..trials {
        let beta = rng.gen_range(0..8u64);
        let tail = rng.gen_range(2..=5i64);
        let mut terms = vec![(
            Cell::interval(Some(Ordinal::nat(beta)), w.clone()),
            tail,
        )];
        for _ in 0..rng.gen_range(0..=3usize) {
            let p = Ordinal::nat(rng.gen_range(0..=beta));
            terms.push((Cell::singleton(&p), rng.gen_range(1..=5i64)));
        }
        let nu = IdealMap::from_linear_combination(space, terms)?
            .with_override(w.clone(), 1)?;
        let restricts = nu.value(&w)? == 1;
        match domination_witness(m, &nu)? {
            Some(yw) if restricts && spike_at(space, &yw)?.leq(&nu)? => {
                verified += 1;
                witnesses.push(yw);
            }
            _ => {}
        }
    }

    Ok(OrderMismatchExhibit {
        t1_le_t2: t1.leq(&t2)?,
        t2_le_t1: t2.leq(&t1)?,
        glue_dominates: g2.leq(&g1)?,
        t1,
        t2,
        trials,
        verified,
        witnesses,
    })
}

fn spike_at(space: &Arc<Space>, p: &Ordinal) -> Result<IdealMap, GroupError> {
    Ok(IdealMap::indicator(
        &DefinableSet::singleton(space, p)?,
        1,
    ))
}
