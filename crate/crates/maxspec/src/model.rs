//! Domain models: a space together with a validated decreasing chain of
//! closed stage sets. Stage 0 is the carrier; each later stage sits inside
//! the subspace-derived set of its predecessor; the chain ends either in the
//! empty set (scattered models) or by stalling. On top of the chain live the
//! rank, the strata, and the necessary-conditions filter for maps that could
//! come from invertible ideals.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ideal::{IdealError, IdealMap};
use crate::ordinal::Ordinal;
use crate::sets::{DefinableSet, SetError, Space};

#[derive(Debug, Error, Clone)]
pub enum ModelError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("chain has no stages")]
    EmptyChain,
    #[error("stage 0 must equal the carrier: differs at {witness}")]
    ChainStart { witness: Ordinal },
    #[error("stage {stage} is empty; end the chain instead")]
    EmptyStage { stage: usize },
    #[error("stage {stage} is not closed: missing limit point {witness}")]
    StageNotClosed { stage: usize, witness: Ordinal },
    #[error("stage {stage} is not inside the derived set of stage {}: witness {witness}", stage - 1)]
    StageNotInDerived { stage: usize, witness: Ordinal },
    #[error("stage {stage} does not strictly decrease")]
    StageNotStrict { stage: usize },
    #[error("map is not integral: value {value} at {witness}")]
    NotIntegral { witness: Ordinal, value: i64 },
    #[error("model is not scattered")]
    NotScattered,
    #[error("stage index {index} out of range")]
    StageOutOfRange { index: usize },
    #[error(transparent)]
    Ideal(#[from] IdealError),
}

/// How the chain continues after its last explicit stage.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Terminal {
    /// The next stage is empty: the model is scattered.
    Empty,
    /// The chain repeats its last stage forever.
    Stalled,
}

/// Space plus validated stage chain `C_0 ⊋ C_1 ⊋ … ⊋ C_m`.
///
/// Stages are closed and satisfy `C_{i+1} ⊆ derived_in(C_i, C_i)`, which
/// also bounds the chain length by the scattering rank of the carrier.
#[derive(Clone, Debug)]
pub struct DomainModel {
    space: Arc<Space>,
    chain: Vec<DefinableSet>,
    terminal: Terminal,
}

/// Joint evaluation of the continuity/criticality conditions for an
/// integral map: continuity of the map, avoidance of stage 1 by its
/// positivity region, and the clopen-compact form of radical invertibility.
#[derive(Clone, Debug)]
pub struct CritReport {
    pub continuous: bool,
    pub vset_avoids_crit: bool,
    pub rad_invertible: bool,
    pub agree: bool,
    pub witness: Option<Ordinal>,
}

/// Conditions of the invertibility-realism filter, in check order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MiCondition {
    /// (a) the support is compact
    SuppCompact,
    /// (b) the positivity region is clopen in each stage and compact
    StageVClopen,
    /// (c) the map is locally constant on each stratum
    StratumLocallyConstant,
    /// (d) a positive value on a deeper stage forces a value >= 2 above it
    DeeperNeedsSquare,
    /// (e) stagewise continuity forces the positivity region off the next stage
    ContinuousAvoidsDeeper,
}

impl MiCondition {
    pub fn letter(self) -> char {
        match self {
            MiCondition::SuppCompact => 'a',
            MiCondition::StageVClopen => 'b',
            MiCondition::StratumLocallyConstant => 'c',
            MiCondition::DeeperNeedsSquare => 'd',
            MiCondition::ContinuousAvoidsDeeper => 'e',
        }
    }
}

impl fmt::Display for MiCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.letter())
    }
}

#[derive(Clone, Debug)]
pub enum MiVerdict {
    Accept,
    Reject {
        condition: MiCondition,
        stage: usize,
        witness: Option<Ordinal>,
    },
}

impl MiVerdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, MiVerdict::Accept)
    }
}

impl DomainModel {
    /// The extremal model whose stages are the full iterated derived sets.
    pub fn sharp(space: &Arc<Space>) -> DomainModel {
        let mut chain = vec![DefinableSet::full(space)];
        loop {
            let cur = chain.last().unwrap();
            let next = cur.derived().intersect(cur).expect("same space");
            if next.is_empty() {
                break;
            }
            chain.push(next);
        }
        DomainModel {
            space: Arc::clone(space),
            chain,
            terminal: Terminal::Empty,
        }
    }

    /// The other extreme: no stage beyond the carrier.
    pub fn sp(space: &Arc<Space>) -> DomainModel {
        DomainModel {
            space: Arc::clone(space),
            chain: vec![DefinableSet::full(space)],
            terminal: Terminal::Empty,
        }
    }

    /// Validates an explicit chain. Reports the first violated invariant:
    /// stage 0 differing from the carrier, a non-closed or empty stage, a
    /// stage escaping the derived set of its predecessor, or a non-strict
    /// step.
    pub fn custom(
        space: &Arc<Space>,
        chain: Vec<DefinableSet>,
        terminal: Terminal,
    ) -> Result<DomainModel, ModelError> {
        if chain.is_empty() {
            return Err(ModelError::EmptyChain);
        }
        for c in &chain {
            if *c.space() != *space {
                return Err(SetError::AmbientMismatch.into());
            }
        }
        let full = DefinableSet::full(space);
        if let Some(witness) = symmetric_difference_point(&chain[0], &full)? {
            return Err(ModelError::ChainStart { witness });
        }
        for stage in 1..chain.len() {
            let c = &chain[stage];
            let prev = &chain[stage - 1];
            if c.is_empty() {
                return Err(ModelError::EmptyStage { stage });
            }
            if let Some(witness) = c.derived().minus(c)?.least_point() {
                return Err(ModelError::StageNotClosed { stage, witness });
            }
            // strictness first: a repeated stage would also fail containment
            // (only the empty set is its own derived set here), and the
            // non-strict message is the clearer diagnosis
            if prev.minus(c)?.is_empty() && c.minus(prev)?.is_empty() {
                return Err(ModelError::StageNotStrict { stage });
            }
            let allowed = prev.derived_in(prev)?;
            if let Some(witness) = c.minus(&allowed)?.least_point() {
                return Err(ModelError::StageNotInDerived { stage, witness });
            }
        }
        Ok(DomainModel {
            space: Arc::clone(space),
            chain,
            terminal,
        })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn chain(&self) -> &[DefinableSet] {
        &self.chain
    }

    pub fn terminal(&self) -> Terminal {
        self.terminal
    }

    /// `C_i`, extended past the explicit chain by the terminal rule.
    pub fn stage_set(&self, i: usize) -> DefinableSet {
        if let Some(c) = self.chain.get(i) {
            return c.clone();
        }
        match self.terminal {
            Terminal::Empty => DefinableSet::empty(&self.space),
            Terminal::Stalled => self.chain.last().unwrap().clone(),
        }
    }

    /// Least index where the chain stops changing: one past the explicit
    /// chain for scattered models, the last explicit index for stalled ones.
    pub fn sp_rank(&self) -> usize {
        match self.terminal {
            Terminal::Empty => self.chain.len(),
            Terminal::Stalled => self.chain.len() - 1,
        }
    }

    pub fn is_sp_scattered(&self) -> bool {
        self.terminal == Terminal::Empty
    }

    /// No critical locus at all: the chain collapses immediately.
    pub fn is_sp_domain(&self) -> bool {
        self.chain.len() == 1 && self.terminal == Terminal::Empty
    }

    /// The difference sets `S_i = C_i ∖ C_{i+1}`; for scattered models they
    /// partition the carrier. A stalled model has no final stratum.
    pub fn strata(&self) -> Vec<DefinableSet> {
        let count = match self.terminal {
            Terminal::Empty => self.chain.len(),
            Terminal::Stalled => self.chain.len() - 1,
        };
        (0..count)
            .map(|i| {
                self.chain[i]
                    .minus(&self.stage_set(i + 1))
                    .expect("same space")
            })
            .collect()
    }

    pub fn stratum(&self, i: usize) -> Option<DefinableSet> {
        (i < self.sp_rank()).then(|| {
            self.chain[i]
                .minus(&self.stage_set(i + 1))
                .expect("same space")
        })
    }

    fn check_map(&self, nu: &IdealMap) -> Result<(), ModelError> {
        if **nu.space() != *self.space {
            return Err(SetError::AmbientMismatch.into());
        }
        if let Some((witness, value)) = nu.integrality_witness() {
            return Err(ModelError::NotIntegral { witness, value });
        }
        Ok(())
    }

    /// Evaluates, independently, the three conditions that coincide for
    /// maps of invertible ideals: continuity, `v_set ∩ C_1 = ∅`, and the
    /// clopen-compact reading of radical invertibility. Reports whether
    /// they agree and a distinguishing witness when they do not.
    pub fn continuity_crit_equiv(&self, nu: &IdealMap) -> Result<CritReport, ModelError> {
        self.check_map(nu)?;
        let full = DefinableSet::full(&self.space);
        let continuous = nu.is_continuous();
        let vset = nu.v_set();
        let meet = vset.intersect(&self.stage_set(1))?;
        let vset_avoids_crit = meet.is_empty();
        let clopen_defect = vset.clopen_defect_in(&full)?;
        let rad_invertible = clopen_defect.is_none() && vset.is_compact() && vset_avoids_crit;
        let agree = continuous == vset_avoids_crit && continuous == rad_invertible;
        let witness = if agree {
            None
        } else if !vset_avoids_crit {
            meet.least_point()
        } else if !continuous {
            nu.discontinuity_set().least_point()
        } else {
            clopen_defect
        };
        Ok(CritReport {
            continuous,
            vset_avoids_crit,
            rad_invertible,
            agree,
            witness,
        })
    }

    /// Necessary conditions for `nu` to come from an invertible ideal of a
    /// ring stratified like this model. Rejection names the first failed
    /// condition, its stage, and a witness point. Only meaningful (and only
    /// allowed) on scattered models; the conditions are necessary, not
    /// sufficient.
    pub fn mi_check(&self, nu: &IdealMap) -> Result<MiVerdict, ModelError> {
        self.check_map(nu)?;
        if !self.is_sp_scattered() {
            return Err(ModelError::NotScattered);
        }
        let supp = nu.support();
        if let Some(witness) = supp.derived().minus(&supp)?.least_point() {
            return Ok(MiVerdict::Reject {
                condition: MiCondition::SuppCompact,
                stage: 0,
                witness: Some(witness),
            });
        }
        let ge1 = nu.ge_set(1);
        let ge2 = nu.ge_set(2);
        for stage in 0..self.chain.len() {
            let c = &self.chain[stage];
            let next = self.stage_set(stage + 1);
            let vset_stage = ge1.intersect(c)?;
            if let Some(witness) = vset_stage.clopen_defect_in(c)? {
                return Ok(MiVerdict::Reject {
                    condition: MiCondition::StageVClopen,
                    stage,
                    witness: Some(witness),
                });
            }
            if let Some(witness) = vset_stage.derived().minus(&vset_stage)?.least_point() {
                return Ok(MiVerdict::Reject {
                    condition: MiCondition::StageVClopen,
                    stage,
                    witness: Some(witness),
                });
            }
            let disc = nu.discontinuity_set_in(c)?;
            let stratum = c.minus(&next)?;
            if let Some(witness) = disc.intersect(&stratum)?.least_point() {
                return Ok(MiVerdict::Reject {
                    condition: MiCondition::StratumLocallyConstant,
                    stage,
                    witness: Some(witness),
                });
            }
            let deep_pos = ge1.intersect(&next)?;
            if !deep_pos.is_empty() && ge2.intersect(c)?.is_empty() {
                return Ok(MiVerdict::Reject {
                    condition: MiCondition::DeeperNeedsSquare,
                    stage,
                    witness: deep_pos.least_point(),
                });
            }
            if disc.is_empty() {
                if let Some(witness) = deep_pos.least_point() {
                    return Ok(MiVerdict::Reject {
                        condition: MiCondition::ContinuousAvoidsDeeper,
                        stage,
                        witness: Some(witness),
                    });
                }
            }
        }
        Ok(MiVerdict::Accept)
    }

    /// The model of the extension at stage `i`: the subspace on `C_i` with
    /// the remaining chain.
    pub fn tail(&self, i: usize) -> Result<DomainModel, ModelError> {
        if i >= self.chain.len() {
            return Err(ModelError::StageOutOfRange { index: i });
        }
        if i == 0 {
            return Ok(self.clone());
        }
        let carrier = self.chain[i].normalized_cells();
        let space = Space::with_carrier(self.space.top().clone(), carrier)?;
        let chain = self.chain[i..]
            .iter()
            .map(|c| DefinableSet::new(&space, c.normalized_cells()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DomainModel {
            space,
            chain,
            terminal: self.terminal,
        })
    }

    /// Semantic comparison across possibly different space values: same
    /// interval, same terminal, stagewise equal point sets.
    pub fn equivalent(&self, other: &DomainModel) -> Result<bool, ModelError> {
        if self.space.top() != other.space.top()
            || self.terminal != other.terminal
            || self.chain.len() != other.chain.len()
        {
            return Ok(false);
        }
        for (a, b) in self.chain.iter().zip(&other.chain) {
            if !sets_equal_cross(a, b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Pointwise restriction of a map to a closed subset, as a map on the
/// subspace carried by that subset.
pub fn restrict_ideal(nu: &IdealMap, c: &DefinableSet) -> Result<IdealMap, ModelError> {
    if **nu.space() != **c.space() {
        return Err(SetError::AmbientMismatch.into());
    }
    let masked = nu.restrict_to(c)?;
    let space = Space::with_carrier(nu.space().top().clone(), c.normalized_cells())?;
    let pieces = masked.canonical().pieces().to_vec();
    Ok(IdealMap::new(&space, pieces, vec![])?)
}

/// Equality of point sets living on different space values over the same
/// interval.
fn sets_equal_cross(a: &DefinableSet, b: &DefinableSet) -> Result<bool, ModelError> {
    let fresh = Space::interval(a.space().top().clone());
    let a2 = DefinableSet::new(&fresh, a.cells().to_vec())?;
    let b2 = DefinableSet::new(&fresh, b.cells().to_vec())?;
    Ok(a2.equals(&b2)?)
}

fn symmetric_difference_point(
    a: &DefinableSet,
    b: &DefinableSet,
) -> Result<Option<Ordinal>, SetError> {
    if let Some(w) = a.minus(b)?.least_point() {
        return Ok(Some(w));
    }
    Ok(b.minus(a)?.least_point())
}
