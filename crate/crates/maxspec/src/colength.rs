//! Ideal colengths valued in {0, ∞}, determined by a distinguished set of
//! points: a map costs nothing exactly when its positivity set misses that
//! set. Stage tensoring intersects the set with a chain stage; the additive,
//! squeeze, and radical identities are checked by evaluating both sides.

use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use thiserror::Error;

use crate::ideal::{IdealError, IdealMap};
use crate::model::{DomainModel, ModelError};
use crate::ordinal::Ordinal;
use crate::sets::{DefinableSet, SetError, Space};

#[derive(Debug, Error)]
pub enum ColengthError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("map takes value {value} < 0 at {witness}")]
    NotIntegral { witness: Ordinal, value: i64 },
    #[error("stage {index} is past the explicit chain")]
    StageOutOfRange { index: usize },
    #[error("squeeze bounds violated at {witness}")]
    SqueezeBounds { witness: Ordinal },
    #[error("positivity set leaves the stage at {witness}")]
    SupportEscapesStage { witness: Ordinal },
}

/// 0 or ∞ with absorbing addition.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum ExtNat {
    Zero,
    Infinity,
}

impl Add for ExtNat {
    type Output = ExtNat;

    fn add(self, other: ExtNat) -> ExtNat {
        if self == ExtNat::Zero && other == ExtNat::Zero {
            ExtNat::Zero
        } else {
            ExtNat::Infinity
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Zero => write!(f, "0"),
            ExtNat::Infinity => write!(f, "inf"),
        }
    }
}

/// A length function on integral maps, carried entirely by the set `delta`:
/// the colength of ν is ∞ exactly when ν is positive somewhere on `delta`.
#[derive(Clone, Debug)]
pub struct ColengthModel {
    space: Arc<Space>,
    delta: DefinableSet,
}

impl ColengthModel {
    pub fn new(space: &Arc<Space>, delta: DefinableSet) -> Result<ColengthModel, ColengthError> {
        if **delta.space() != **space {
            return Err(SetError::AmbientMismatch.into());
        }
        Ok(ColengthModel {
            space: Arc::clone(space),
            delta,
        })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn delta(&self) -> &DefinableSet {
        &self.delta
    }

    fn check_integral(&self, nu: &IdealMap) -> Result<(), ColengthError> {
        if **nu.space() != *self.space {
            return Err(SetError::AmbientMismatch.into());
        }
        if let Some((witness, value)) = nu.integrality_witness() {
            return Err(ColengthError::NotIntegral { witness, value });
        }
        Ok(())
    }
}

pub fn colength(cm: &ColengthModel, nu: &IdealMap) -> Result<ExtNat, ColengthError> {
    cm.check_integral(nu)?;
    if nu.v_set().intersect(cm.delta())?.is_empty() {
        Ok(ExtNat::Zero)
    } else {
        Ok(ExtNat::Infinity)
    }
}

/// Colength against `delta ∩ C_i`: the stage-tensored length function.
/// `i` may be one past the explicit chain (the terminal stage).
pub fn colength_stage(
    cm: &ColengthModel,
    m: &DomainModel,
    i: usize,
    nu: &IdealMap,
) -> Result<ExtNat, ColengthError> {
    cm.check_integral(nu)?;
    if **m.space() != **cm.space() {
        return Err(SetError::AmbientMismatch.into());
    }
    if i > m.chain().len() {
        return Err(ColengthError::StageOutOfRange { index: i });
    }
    let stage_delta = cm.delta().intersect(&m.stage_set(i))?;
    if nu.v_set().intersect(&stage_delta)?.is_empty() {
        Ok(ExtNat::Zero)
    } else {
        Ok(ExtNat::Infinity)
    }
}

/// τ(νμ) = τ(ν) + τ(μ), both sides evaluated independently.
pub fn check_sum(cm: &ColengthModel, nu: &IdealMap, mu: &IdealMap) -> Result<bool, ColengthError> {
    cm.check_integral(nu)?;
    cm.check_integral(mu)?;
    let lhs = colength(cm, &nu.mul(mu)?)?;
    let rhs = colength(cm, nu)? + colength(cm, mu)?;
    Ok(lhs == rhs)
}

/// Squeeze identity: when ν ≤ μ ≤ n·ν pointwise, the two colengths agree.
/// The bound violations are errors, not failures of the identity.
pub fn check_squeeze(
    cm: &ColengthModel,
    nu: &IdealMap,
    mu: &IdealMap,
    n: i64,
) -> Result<bool, ColengthError> {
    cm.check_integral(nu)?;
    cm.check_integral(mu)?;
    let low_gap = nu.mul(&mu.inv())?;
    if let Some(witness) = low_gap.ge_set(1).least_point() {
        return Err(ColengthError::SqueezeBounds { witness });
    }
    let high_gap = mu.mul(&nu.pow(n).inv())?;
    if let Some(witness) = high_gap.ge_set(1).least_point() {
        return Err(ColengthError::SqueezeBounds { witness });
    }
    Ok(colength(cm, nu)? == colength(cm, mu)?)
}

/// Stage restriction is invisible for maps positive only inside the stage:
/// when v_set(ν) ⊆ C_i, the stage colength equals the plain one.
pub fn check_stage_restriction(
    cm: &ColengthModel,
    m: &DomainModel,
    i: usize,
    nu: &IdealMap,
) -> Result<bool, ColengthError> {
    cm.check_integral(nu)?;
    if i > m.chain().len() {
        return Err(ColengthError::StageOutOfRange { index: i });
    }
    if let Some(witness) = nu.v_set().minus(&m.stage_set(i))?.least_point() {
        return Err(ColengthError::SupportEscapesStage { witness });
    }
    Ok(colength(cm, nu)? == colength_stage(cm, m, i, nu)?)
}

/// τ(ν) = τ(radical(ν)) + stage-τ(ν), all three evaluated independently.
pub fn check_length_identity(
    cm: &ColengthModel,
    m: &DomainModel,
    i: usize,
    nu: &IdealMap,
) -> Result<bool, ColengthError> {
    cm.check_integral(nu)?;
    let lhs = colength(cm, nu)?;
    let rhs = colength(cm, &nu.radical()?)? + colength_stage(cm, m, i, nu)?;
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::Cell;
    use proptest::prelude::*;

    fn w() -> Ordinal {
        Ordinal::omega()
    }

    fn omega_space() -> Arc<Space> {
        Space::interval(w())
    }

    fn limit_delta(space: &Arc<Space>) -> ColengthModel {
        let delta = DefinableSet::singleton(space, &w()).unwrap();
        ColengthModel::new(space, delta).unwrap()
    }

    fn interval_map(space: &Arc<Space>, lo: u64, hi: Ordinal, v: i64) -> IdealMap {
        let set =
            DefinableSet::new(space, vec![Cell::interval(Some(Ordinal::nat(lo)), hi)]).unwrap();
        IdealMap::indicator(&set, v)
    }

    #[test]
    fn colength_examples() {
        let space = omega_space();
        let cm = limit_delta(&space);
        let away = interval_map(&space, 1, Ordinal::nat(3), 1);
        assert_eq!(colength(&cm, &away).unwrap(), ExtNat::Zero);
        let tail = interval_map(&space, 0, w(), 1);
        assert_eq!(colength(&cm, &tail).unwrap(), ExtNat::Infinity);
        assert_eq!(
            colength(&cm, &IdealMap::zero(&space)).unwrap(),
            ExtNat::Zero
        );
    }

    #[test]
    fn colength_rejects_negative_maps() {
        let space = omega_space();
        let cm = limit_delta(&space);
        let neg = interval_map(&space, 1, Ordinal::nat(3), -1);
        match colength(&cm, &neg) {
            Err(ColengthError::NotIntegral { witness, value }) => {
                assert_eq!(witness, Ordinal::nat(2));
                assert_eq!(value, -1);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn stage_colength_examples() {
        let space = omega_space();
        let cm = limit_delta(&space);
        let m = crate::model::DomainModel::sharp(&space);
        let tail = interval_map(&space, 0, w(), 1);
        // stage 0 is the plain colength
        assert_eq!(
            colength_stage(&cm, &m, 0, &tail).unwrap(),
            colength(&cm, &tail).unwrap()
        );
        assert_eq!(
            colength_stage(&cm, &m, 1, &tail).unwrap(),
            ExtNat::Infinity
        );
        // one past the chain: the terminal stage of a scattered model is empty
        assert_eq!(colength_stage(&cm, &m, 2, &tail).unwrap(), ExtNat::Zero);
        assert!(matches!(
            colength_stage(&cm, &m, 3, &tail),
            Err(ColengthError::StageOutOfRange { index: 3 })
        ));
    }

    #[test]
    fn sum_identity_example() {
        let space = omega_space();
        let cm = limit_delta(&space);
        let tail = interval_map(&space, 0, w(), 1);
        let away = interval_map(&space, 1, Ordinal::nat(3), 1);
        assert_eq!(colength(&cm, &tail).unwrap(), ExtNat::Infinity);
        assert_eq!(colength(&cm, &away).unwrap(), ExtNat::Zero);
        assert!(check_sum(&cm, &tail, &away).unwrap());
    }

    #[test]
    fn squeeze_identity_and_bounds() {
        let space = omega_space();
        let cm = limit_delta(&space);
        let head = IdealMap::indicator(
            &DefinableSet::new(&space, vec![Cell::interval(None, Ordinal::nat(3))]).unwrap(),
            1,
        );
        let double = head.pow(2);
        assert!(check_squeeze(&cm, &head, &double, 2).unwrap());
        // 3·ν escapes the upper bound 2·ν
        let triple = head.pow(3);
        match check_squeeze(&cm, &head, &triple, 2) {
            Err(ColengthError::SqueezeBounds { witness }) => {
                assert_eq!(witness, Ordinal::nat(0));
            }
            other => panic!("unexpected: {other:?}"),
        }
        // μ below ν violates the lower bound
        match check_squeeze(&cm, &head, &IdealMap::zero(&space), 2) {
            Err(ColengthError::SqueezeBounds { witness }) => {
                assert_eq!(witness, Ordinal::nat(0));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn stage_restriction_identity_and_precondition() {
        let space = omega_space();
        let cm = limit_delta(&space);
        let m = crate::model::DomainModel::sharp(&space);
        let spike = IdealMap::indicator(&DefinableSet::singleton(&space, &w()).unwrap(), 1);
        assert!(check_stage_restriction(&cm, &m, 1, &spike).unwrap());
        let tail = interval_map(&space, 0, w(), 1);
        match check_stage_restriction(&cm, &m, 1, &tail) {
            Err(ColengthError::SupportEscapesStage { witness }) => {
                assert_eq!(witness, Ordinal::nat(1));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn length_identity_example() {
        let space = omega_space();
        let cm = limit_delta(&space);
        let m = crate::model::DomainModel::sharp(&space);
        let tail = interval_map(&space, 0, w(), 1);
        assert_eq!(colength(&cm, &tail).unwrap(), ExtNat::Infinity);
        assert_eq!(
            colength_stage(&cm, &m, 1, &tail).unwrap(),
            ExtNat::Infinity
        );
        assert!(check_length_identity(&cm, &m, 1, &tail).unwrap());
    }

    #[test]
    fn extnat_arithmetic() {
        assert_eq!(ExtNat::Zero + ExtNat::Zero, ExtNat::Zero);
        assert_eq!(ExtNat::Zero + ExtNat::Infinity, ExtNat::Infinity);
        assert_eq!(ExtNat::Infinity + ExtNat::Zero, ExtNat::Infinity);
        assert!(ExtNat::Zero < ExtNat::Infinity);
        assert_eq!(ExtNat::Zero.to_string(), "0");
        assert_eq!(ExtNat::Infinity.to_string(), "inf");
    }

    prop_compose! {
        fn arb_integral_map()(
            raw in prop::collection::vec(((0..2u32, 0..3u64, 1..5u64), 0..=3i64), 0..5)
        ) -> Vec<(Ordinal, i64)> {
            raw.into_iter()
                .map(|((e, block, off), v)| {
                    let p = Ordinal::w_pow_mul(e + 1, block).add(&Ordinal::w_pow_mul(e, off));
                    (p, v)
                })
                .collect()
        }
    }

    fn build(space: &Arc<Space>, pts: &[(Ordinal, i64)]) -> IdealMap {
        let top = space.top();
        let terms = pts
            .iter()
            .filter(|(p, _)| p <= top)
            .map(|(p, v)| (Cell::singleton(p), *v))
            .collect();
        IdealMap::from_linear_combination(space, terms).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn radical_preserves_colength(pts in arb_integral_map()) {
            let space = Space::interval(Ordinal::w_pow(2));
            let delta = DefinableSet::new(
                &space,
                vec![Cell::interval(Some(Ordinal::omega()), Ordinal::w_pow(2))],
            ).unwrap();
            let cm = ColengthModel::new(&space, delta).unwrap();
            let nu = build(&space, &pts);
            prop_assert_eq!(
                colength(&cm, &nu).unwrap(),
                colength(&cm, &nu.radical().unwrap()).unwrap()
            );
        }

        #[test]
        fn colength_monotone_in_pointwise_order(
            pts in arb_integral_map(),
            extra in arb_integral_map(),
        ) {
            let space = Space::interval(Ordinal::w_pow(2));
            let delta = DefinableSet::singleton(&space, &Ordinal::w_pow(2)).unwrap();
            let cm = ColengthModel::new(&space, delta).unwrap();
            let small = build(&space, &pts);
            let big = small.mul(&build(&space, &extra)).unwrap();
            // small ≤ big pointwise, so positivity can only spread
            prop_assert!(colength(&cm, &small).unwrap() <= colength(&cm, &big).unwrap());
        }

        #[test]
        fn stage_colength_is_antitone(pts in arb_integral_map()) {
            let space = Space::interval(Ordinal::w_pow(2));
            let delta = DefinableSet::new(
                &space,
                vec![Cell::interval(None, Ordinal::w_pow(2))],
            ).unwrap();
            let cm = ColengthModel::new(&space, delta).unwrap();
            let m = crate::model::DomainModel::sharp(&space);
            let nu = build(&space, &pts);
            let mut prev = colength_stage(&cm, &m, 0, &nu).unwrap();
            for i in 1..=m.chain().len() {
                let cur = colength_stage(&cm, &m, i, &nu).unwrap();
                prop_assert!(cur <= prev);
                prev = cur;
            }
        }

        #[test]
        fn identities_hold_on_random_instances(
            pts in arb_integral_map(),
            other in arb_integral_map(),
            stage in 0..3usize,
        ) {
            let space = Space::interval(Ordinal::w_pow(2));
            let delta = DefinableSet::new(
                &space,
                vec![Cell::interval(Some(Ordinal::nat(2)), Ordinal::w_pow(2))],
            ).unwrap();
            let cm = ColengthModel::new(&space, delta).unwrap();
            let m = crate::model::DomainModel::sharp(&space);
            let nu = build(&space, &pts);
            let mu = build(&space, &other);
            prop_assert!(check_sum(&cm, &nu, &mu).unwrap());
            prop_assert!(check_length_identity(&cm, &m, stage, &nu).unwrap());
            prop_assert!(check_squeeze(&cm, &nu, &nu.pow(3), 3).unwrap());
        }
    }
}
