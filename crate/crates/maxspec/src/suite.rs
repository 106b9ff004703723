//! Seeded property suites. Each named suite replays `count` independent
//! cases; every case derives its own RNG from `(seed, index)`, so runs are
//! reproducible, order-independent, and safe to execute in parallel.

use std::fmt::Display;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::colength::{
    check_length_identity, check_squeeze, check_stage_restriction, check_sum, colength,
    ColengthModel,
};
use crate::group::{
    combination, exactness_report, glue, kernel_of_restriction, order_mismatch_demo,
    sigma_r_report, subgroup_basis, subgroup_member, unglue,
};
use crate::ideal::IdealMap;
use crate::model::{DomainModel, MiVerdict, ModelError, Terminal};
use crate::ordinal::Ordinal;
use crate::sets::{DefinableSet, Space};
use crate::zmatrix::CancelToken;

pub const SUITE_NAMES: [&str; 10] = [
    "nu-laws",
    "factor-roundtrip",
    "continuity-equiv",
    "chains-ranks",
    "sp-decomposition",
    "exact-sequences",
    "sigma-r",
    "mi-closure",
    "length-identities",
    "order-mismatch",
];

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}`; known suites: {}", SUITE_NAMES.join(", "))]
    UnknownSuite(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseFailure {
    pub case: u64,
    pub witness: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: u64,
    pub failures: Vec<CaseFailure>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Splitmix-style mix of the suite seed with a case index, so consecutive
/// cases draw from decorrelated streams.
pub fn case_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `count` cases of the named suite and collects failures, sorted by
/// case index. Two runs with the same arguments produce identical reports.
pub fn run_suite(name: &str, seed: u64, count: u64) -> Result<SuiteReport, SuiteError> {
    let case: fn(&mut StdRng) -> Result<(), String> = match name {
        "nu-laws" => nu_laws_case,
        "factor-roundtrip" => factor_roundtrip_case,
        "continuity-equiv" => continuity_equiv_case,
        "chains-ranks" => chains_ranks_case,
        "sp-decomposition" => sp_decomposition_case,
        "exact-sequences" => exact_sequences_case,
        "sigma-r" => sigma_r_case,
        "mi-closure" => mi_closure_case,
        "length-identities" => length_identities_case,
        "order-mismatch" => order_mismatch_case,
        _ => return Err(SuiteError::UnknownSuite(name.to_string())),
    };
    let mut failures: Vec<CaseFailure> = (0..count)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = StdRng::seed_from_u64(case_seed(seed, i));
            case(&mut rng)
                .err()
                .map(|witness| CaseFailure { case: i, witness })
        })
        .collect();
    failures.sort_by_key(|f| f.case);
    Ok(SuiteReport {
        suite: name.to_string(),
        seed,
        cases: count,
        failures,
    })
}

fn s(e: impl Display) -> String {
    e.to_string()
}

fn fail(msg: String) -> Result<(), String> {
    Err(msg)
}

/// Pointwise laws of the value maps: `mul` adds, `ideal_sum` takes minima,
/// `ideal_cap` takes maxima, and `leq` agrees with pointwise comparison.
fn nu_laws_case(rng: &mut StdRng) -> Result<(), String> {
    let space = Space::interval(Ordinal::w_pow(2));
    let a = generate::map(rng, &space);
    let b = generate::map(rng, &space);
    let prod = a.mul(&b).map_err(s)?;
    let sum = a.ideal_sum(&b).map_err(s)?;
    let cap = a.ideal_cap(&b).map_err(s)?;
    let mut cells = a.family_cells();
    cells.extend(b.family_cells());
    let points = crate::sets::test_points_for_cells(&space, &cells, &[]);
    let mut pointwise_le = true;
    for p in &points {
        let (av, bv) = (a.eval(p), b.eval(p));
        if prod.eval(p) != av + bv {
            return fail(format!("product at {p}: {} vs {av} + {bv}", prod.eval(p)));
        }
        if sum.eval(p) != av.min(bv) {
            return fail(format!("sum at {p}: {} vs min({av}, {bv})", sum.eval(p)));
        }
        if cap.eval(p) != av.max(bv) {
            return fail(format!("cap at {p}: {} vs max({av}, {bv})", cap.eval(p)));
        }
        if av > bv {
            pointwise_le = false;
        }
    }
    if a.leq(&b).map_err(s)? != pointwise_le {
        return fail(format!(
            "order disagrees with pointwise comparison (expected {pointwise_le})"
        ));
    }
    if !sum.leq(&a).map_err(s)? || !sum.leq(&b).map_err(s)? {
        return fail("sum is not a lower bound".to_string());
    }
    if !a.leq(&cap).map_err(s)? || !b.leq(&cap).map_err(s)? {
        return fail("cap is not an upper bound".to_string());
    }
    Ok(())
}

/// Level-set factorization against an independently built clopen chain: the
/// factors must equal the generating chain, strictly decrease, stay clopen,
/// and recompose to the original map.
fn factor_roundtrip_case(rng: &mut StdRng) -> Result<(), String> {
    let space = generate::space(rng);
    let (nu, chain) = generate::continuous_integral(rng, &space);
    let factors = nu.radical_factor().map_err(s)?;
    if factors.len() != chain.len() {
        return fail(format!(
            "{} factors for a generating chain of {}",
            factors.len(),
            chain.len()
        ));
    }
    let full = DefinableSet::full(&space);
    for (k, f) in factors.iter().enumerate() {
        if !f.equals(&chain[k]).map_err(s)? {
            return fail(format!("factor {k} differs from the generating chain"));
        }
        if let Some(witness) = f.clopen_defect_in(&full).map_err(s)? {
            return fail(format!("factor {k} not clopen at {witness}"));
        }
        if k > 0 {
            let prev = &factors[k - 1];
            if !f.subset_of(prev).map_err(s)? || f.equals(prev).map_err(s)? {
                return fail(format!("factors fail to strictly decrease at {k}"));
            }
        }
    }
    let back = IdealMap::radical_recompose(&space, &factors).map_err(s)?;
    if !back.equal(&nu).map_err(s)? {
        return fail("recomposition differs from the original map".to_string());
    }
    let rad = nu.radical().map_err(s)?;
    let flat = match factors.first() {
        Some(f) => IdealMap::radical_recompose(&space, std::slice::from_ref(f)).map_err(s)?,
        None => IdealMap::zero(&space),
    };
    if !rad.equal(&flat).map_err(s)? {
        return fail("radical differs from the first factor's indicator".to_string());
    }
    Ok(())
}

/// Three independent continuity decisions must agree: open level sets, an
/// empty pointwise defect set, and factorability of both signed parts.
fn continuity_equiv_case(rng: &mut StdRng) -> Result<(), String> {
    let space = generate::space(rng);
    let nu = if rng.gen_bool(0.5) {
        generate::continuous_signed(rng, &space)
    } else {
        generate::map(rng, &space)
    };
    let by_levels = nu.is_continuous();
    let by_defects = nu.discontinuity_set().is_empty();
    let (j, l) = nu.pos_neg_split();
    let by_factoring = j.radical_factor().is_ok() && l.radical_factor().is_ok();
    if by_levels != by_defects || by_levels != by_factoring {
        return fail(format!(
            "continuity routes disagree: levels {by_levels}, defects {by_defects}, factoring {by_factoring}"
        ));
    }
    let back = j.mul(&l.inv()).map_err(s)?;
    if !back.equal(&nu).map_err(s)? {
        return fail("signed split does not recompose".to_string());
    }
    Ok(())
}

enum ChainDefect {
    Start(Ordinal),
    Empty(usize),
    NotStrict(usize),
    NotDerived(usize, Ordinal),
    NotClosed(usize, Ordinal),
}

/// Stage chains of interval spaces: the canonical chain's length matches the
/// topological rank, the chain revalidates, and a seeded mutation is
/// rejected for exactly the planted reason.
fn chains_ranks_case(rng: &mut StdRng) -> Result<(), String> {
    let space = generate::full_space(rng, 1);
    let m = DomainModel::sharp(&space);
    let full = DefinableSet::full(&space);
    if m.sp_rank() != full.cb_rank() {
        return fail(format!(
            "chain rank {} vs topological rank {}",
            m.sp_rank(),
            full.cb_rank()
        ));
    }
    if !m.is_sp_scattered() {
        return fail("canonical chain should reach the empty stage".to_string());
    }
    let chain = m.chain().to_vec();
    DomainModel::custom(&space, chain.clone(), Terminal::Empty)
        .map_err(|e| format!("canonical chain rejected: {e}"))?;

    let len = chain.len();
    let mut kinds = vec![0u8, 1, 2];
    if len >= 2 {
        kinds.push(3);
    }
    if len >= 3 {
        kinds.push(4);
    }
    let mut mutated = chain.clone();
    let planted = match *kinds.choose(rng).unwrap() {
        0 => {
            let p = full.isolated_points().least_point().expect("nonempty");
            let dot = DefinableSet::singleton(&space, &p).map_err(s)?;
            mutated[0] = mutated[0].minus(&dot).map_err(s)?;
            ChainDefect::Start(p)
        }
        1 => {
            mutated.push(DefinableSet::empty(&space));
            ChainDefect::Empty(len)
        }
        2 => {
            let i = rng.gen_range(0..len);
            mutated.insert(i + 1, chain[i].clone());
            ChainDefect::NotStrict(i + 1)
        }
        3 => {
            let i = rng.gen_range(1..len);
            let q = m
                .stratum(i - 1)
                .and_then(|st| st.least_point())
                .expect("stratum is nonempty");
            let dot = DefinableSet::singleton(&space, &q).map_err(s)?;
            mutated[i] = mutated[i].union(&dot).map_err(s)?;
            ChainDefect::NotDerived(i, q)
        }
        _ => {
            let i = rng.gen_range(1..=len - 2);
            let p = chain[i + 1].least_point().expect("nonempty");
            let dot = DefinableSet::singleton(&space, &p).map_err(s)?;
            mutated[i] = mutated[i].minus(&dot).map_err(s)?;
            ChainDefect::NotClosed(i, p)
        }
    };
    let err = match DomainModel::custom(&space, mutated, Terminal::Empty) {
        Ok(_) => return fail("mutated chain was accepted".to_string()),
        Err(e) => e,
    };
    let matched = match (&planted, &err) {
        (ChainDefect::Start(p), ModelError::ChainStart { witness }) => witness == p,
        (ChainDefect::Empty(i), ModelError::EmptyStage { stage }) => stage == i,
        (ChainDefect::NotStrict(i), ModelError::StageNotStrict { stage }) => stage == i,
        (ChainDefect::NotDerived(i, q), ModelError::StageNotInDerived { stage, witness }) => {
            stage == i && witness == q
        }
        (ChainDefect::NotClosed(i, p), ModelError::StageNotClosed { stage, witness }) => {
            stage == i && witness == p
        }
        _ => false,
    };
    if !matched {
        return fail(format!("planted defect reported as: {err}"));
    }
    Ok(())
}

/// Componentwise tuples against glued maps: unglue inverts glue, glue is
/// additive, the glued span's rank is the sum of the stratum ranks, and
/// every stage quotient is free.
fn sp_decomposition_case(rng: &mut StdRng) -> Result<(), String> {
    let space = Space::interval(Ordinal::w_pow(2));
    let m = DomainModel::sharp(&space);
    let t1 = generate::strat_tuple(rng, &m).map_err(s)?;
    let t2 = generate::strat_tuple(rng, &m).map_err(s)?;
    let g1 = glue(&m, &t1).map_err(s)?;
    let g2 = glue(&m, &t2).map_err(s)?;
    let back = unglue(&m, &g1).map_err(s)?;
    if !back.equal(&t1).map_err(s)? {
        return fail("unglue does not invert glue".to_string());
    }
    let both = glue(&m, &t1.add(&t2).map_err(s)?).map_err(s)?;
    if !both.equal(&g1.mul(&g2).map_err(s)?).map_err(s)? {
        return fail("glue is not additive".to_string());
    }
    let token = CancelToken::new();
    let all: Vec<IdealMap> = t1
        .components()
        .iter()
        .chain(t2.components())
        .cloned()
        .collect();
    let total = subgroup_basis(&all, &token).map_err(s)?.rank;
    let mut stratum_sum = 0usize;
    for i in 0..m.strata().len() {
        let pair = vec![t1.components()[i].clone(), t2.components()[i].clone()];
        stratum_sum += subgroup_basis(&pair, &token).map_err(s)?.rank;
    }
    if total != stratum_sum {
        return fail(format!(
            "glued span rank {total} vs stratum ranks summing to {stratum_sum}"
        ));
    }
    for stage in 0..=m.chain().len() {
        let rep = exactness_report(&m, &all, stage, &token).map_err(s)?;
        if !rep.additive {
            return fail(format!("rank additivity fails at stage {stage}"));
        }
        if !rep.quotient_torsion_free || rep.quotient_divisors.iter().any(|d| *d != 1) {
            return fail(format!(
                "stage {stage} quotient has divisors {:?}",
                rep.quotient_divisors
            ));
        }
    }
    Ok(())
}

/// Restriction kernels of continuous spans: ranks are additive, kernel basis
/// maps avoid the stage set, and membership in the kernel coincides with
/// support avoidance on sampled combinations.
fn exact_sequences_case(rng: &mut StdRng) -> Result<(), String> {
    let space = if rng.gen_bool(0.5) {
        Space::interval(Ordinal::omega())
    } else {
        Space::interval(Ordinal::w_pow(2))
    };
    let m = DomainModel::sharp(&space);
    let n = rng.gen_range(1..=4);
    let gens: Vec<IdealMap> = (0..n)
        .map(|_| generate::continuous_combo(rng, &space))
        .collect();
    let token = CancelToken::new();
    for stage in 0..=m.chain().len() {
        let c = m.stage_set(stage);
        let rep = exactness_report(&m, &gens, stage, &token).map_err(s)?;
        if !rep.additive {
            return fail(format!(
                "stage {stage}: kernel {} + image {} != total {}",
                rep.kernel_rank, rep.image_rank, rep.total_rank
            ));
        }
        let kernel = kernel_of_restriction(&m, &gens, stage, &token).map_err(s)?;
        if kernel.rank != rep.kernel_rank {
            return fail(format!(
                "stage {stage}: kernel rank {} vs reported {}",
                kernel.rank, rep.kernel_rank
            ));
        }
        let basis = kernel.basis_maps().map_err(s)?;
        for (idx, g) in basis.iter().enumerate() {
            if let Some(witness) = g.support().intersect(&c).map_err(s)?.least_point() {
                return fail(format!(
                    "stage {stage}: kernel basis {idx} meets the stage at {witness}"
                ));
            }
        }
        for _ in 0..2 {
            let coeffs: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
            let g = combination(&gens, &coeffs).map_err(s)?;
            let avoids = g.support().intersect(&c).map_err(s)?.is_empty();
            let member = if basis.is_empty() {
                g.is_zero()
            } else {
                subgroup_member(&basis, &g, &token).map_err(s)?.member
            };
            if member != avoids {
                return fail(format!(
                    "stage {stage}: kernel membership {member} vs support avoidance {avoids}"
                ));
            }
        }
    }
    Ok(())
}

/// First-stage restriction ranks: a rank-one model restricts everything to
/// zero, and on `[0, w]` the achievable image rank is exactly one, with
/// continuous unit witnesses.
fn sigma_r_case(rng: &mut StdRng) -> Result<(), String> {
    let token = CancelToken::new();
    let space = generate::space(rng);
    let m = DomainModel::sp(&space);
    let gens: Vec<IdealMap> = (0..rng.gen_range(1..=3))
        .map(|_| generate::continuous_combo(rng, &space))
        .collect();
    let rep = sigma_r_report(&m, &gens, &token).map_err(s)?;
    if rep.image_rank != 0 || rep.kernel_rank != rep.total_rank || !rep.additive {
        return fail(format!(
            "rank-one model: image {} kernel {} total {}",
            rep.image_rank, rep.kernel_rank, rep.total_rank
        ));
    }
    match &rep.achievable {
        Some(a) if a.rank == 0 && a.achieved => {}
        _ => return fail("empty first stage should be trivially achievable".to_string()),
    }

    let space = Space::interval(Ordinal::omega());
    let m = DomainModel::sharp(&space);
    let w = Ordinal::omega();
    let gens: Vec<IdealMap> = (0..rng.gen_range(1..=3))
        .map(|_| generate::continuous_combo(rng, &space))
        .collect();
    let rep = sigma_r_report(&m, &gens, &token).map_err(s)?;
    let expect_image = usize::from(gens.iter().any(|g| g.eval(&w) != 0));
    if rep.image_rank != expect_image {
        return fail(format!(
            "image rank {} vs direct limit check {expect_image}",
            rep.image_rank
        ));
    }
    if !rep.additive || !rep.torsion_free {
        return fail("restriction image should be free and additive".to_string());
    }
    let Some(a) = &rep.achievable else {
        return fail("finite first stage must report the achievable rank".to_string());
    };
    if a.rank != 1 {
        return fail(format!("achievable rank {} on a one-point stage", a.rank));
    }
    if !a.achieved {
        return fail("explicit witnesses should attain the one-point bound".to_string());
    }
    if rep.image_rank > 1 {
        return fail(format!("image rank {} exceeds the bound", rep.image_rank));
    }
    for (p, wit) in &a.witnesses {
        if wit.eval(p) != 1 || !wit.is_continuous() {
            return fail(format!("witness at {p} is not a continuous unit there"));
        }
    }
    Ok(())
}

/// The accepted family used here is closed under products: both factors and
/// their product must pass the acceptance conditions.
fn mi_closure_case(rng: &mut StdRng) -> Result<(), String> {
    let space = Space::interval(Ordinal::omega());
    let m = DomainModel::sharp(&space);
    let a = generate::accepted_map(rng, &space);
    let b = generate::accepted_map(rng, &space);
    for (label, nu) in [("left", &a), ("right", &b)] {
        if let MiVerdict::Reject {
            condition, stage, ..
        } = m.mi_check(nu).map_err(s)?
        {
            return fail(format!(
                "{label} factor rejected by ({}) at stage {stage}",
                condition.letter()
            ));
        }
    }
    let prod = a.mul(&b).map_err(s)?;
    if let MiVerdict::Reject {
        condition, stage, ..
    } = m.mi_check(&prod).map_err(s)?
    {
        return fail(format!(
            "product rejected by ({}) at stage {stage}",
            condition.letter()
        ));
    }
    Ok(())
}

/// Colength identities on random instances: products add, squeezed maps
/// agree, stage restrictions defer to the stage colength, and the length
/// identity splits into radical and stage parts.
fn length_identities_case(rng: &mut StdRng) -> Result<(), String> {
    let space = generate::space(rng);
    let m = DomainModel::sharp(&space);
    let pool = generate::point_pool(&space);
    let delta_cells = (0..rng.gen_range(1..=3))
        .map(|_| generate::cell(rng, &space, &pool))
        .collect();
    let delta = DefinableSet::new(&space, delta_cells).map_err(s)?;
    let cm = ColengthModel::new(&space, delta).map_err(s)?;
    let nu = generate::integral_map(rng, &space);
    let mu = generate::integral_map(rng, &space);
    if !check_sum(&cm, &nu, &mu).map_err(s)? {
        return fail("colength of a product is not the sum".to_string());
    }
    let n = rng.gen_range(1..=3i64);
    if !check_squeeze(&cm, &nu, &nu.pow(n), n).map_err(s)? {
        return fail(format!("squeeze between a map and its {n}-th power fails"));
    }
    let i = rng.gen_range(0..=m.chain().len());
    let within = nu.restrict_to(&m.stage_set(i)).map_err(s)?;
    if !check_stage_restriction(&cm, &m, i, &within).map_err(s)? {
        return fail(format!("stage-{i} restriction changes the colength"));
    }
    if !check_length_identity(&cm, &m, i, &nu).map_err(s)? {
        return fail(format!("length identity fails at stage {i}"));
    }
    if colength(&cm, &nu.radical().map_err(s)?).map_err(s)? != colength(&cm, &nu).map_err(s)? {
        return fail("radical changes the colength".to_string());
    }
    Ok(())
}

/// Incomparable tuples with incomparable glued maps, plus the domination
/// side of the exhibit verified on every trial.
fn order_mismatch_case(rng: &mut StdRng) -> Result<(), String> {
    let space = Space::interval(Ordinal::omega());
    let m = DomainModel::sharp(&space);
    let ex = order_mismatch_demo(&m, rng.gen(), 1).map_err(s)?;
    if ex.t1_le_t2 || ex.t2_le_t1 {
        return fail("tuples should be incomparable".to_string());
    }
    if ex.glue_dominates {
        return fail("glued maps should also be incomparable".to_string());
    }
    if ex.verified != ex.trials || ex.witnesses.len() != ex.trials {
        return fail(format!(
            "{} of {} domination trials verified",
            ex.verified, ex.trials
        ));
    }
    Ok(())
}

pub mod generate {
    //! Seeded construction of the spaces, maps, chains, and tuples the
    //! suites draw on.

    use std::sync::Arc;

    use rand::rngs::StdRng;
    use rand::seq::SliceRandom;
    use rand::Rng;

    use crate::group::{GroupError, StratTuple};
    use crate::ideal::IdealMap;
    use crate::model::DomainModel;
    use crate::ordinal::Ordinal;
    use crate::sets::{canonical_test_points, Cell, DefinableSet, DegMax, Space};

    fn top_ordinal(rng: &mut StdRng) -> Ordinal {
        let lead = *[0u32, 1, 1, 1, 2, 2, 2, 3, 3].choose(rng).unwrap();
        if lead == 0 {
            return Ordinal::nat(rng.gen_range(4..=12));
        }
        let max_coeff = if lead == 3 { 2 } else { 3 };
        let coeff = rng.gen_range(1..=max_coeff);
        let mut top = Ordinal::w_pow_mul(lead, coeff);
        if lead < 3 || coeff < 2 {
            for e in (0..lead).rev() {
                if rng.gen_bool(0.35) {
                    top = top.add(&Ordinal::w_pow_mul(e, rng.gen_range(1..=2)));
                }
            }
        }
        top
    }

    /// Random space: usually a full interval, sometimes a closed
    /// sub-carrier of one.
    pub fn space(rng: &mut StdRng) -> Arc<Space> {
        let top = top_ordinal(rng);
        if rng.gen_bool(0.8) {
            return Space::interval(top);
        }
        let ambient = Space::interval(top.clone());
        let pool = point_pool(&ambient);
        let cells = (0..rng.gen_range(1..=3))
            .map(|_| cell(rng, &ambient, &pool))
            .collect();
        let closed = DefinableSet::new(&ambient, cells)
            .expect("cells fit the space")
            .closure();
        if closed.is_empty() {
            return ambient;
        }
        Space::with_carrier(top, closed.normalized_cells()).expect("closure is closed")
    }

    /// Full interval space whose top has degree at least `min_deg`.
    pub fn full_space(rng: &mut StdRng, min_deg: u32) -> Arc<Space> {
        loop {
            let top = top_ordinal(rng);
            if top.lead_exp() >= min_deg {
                return Space::interval(top);
            }
        }
    }

    /// Endpoints, block starts, and per-degree witnesses of the carrier.
    pub fn point_pool(space: &Arc<Space>) -> Vec<Ordinal> {
        canonical_test_points(space, &[])
    }

    /// Random cell over pool endpoints, with a random degree band.
    pub fn cell(rng: &mut StdRng, space: &Arc<Space>, pool: &[Ordinal]) -> Cell {
        let mut a = pool.choose(rng).cloned().unwrap_or_else(Ordinal::zero);
        let mut b = pool
            .choose(rng)
            .cloned()
            .unwrap_or_else(|| space.top().clone());
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let lo = if rng.gen_bool(0.3) { None } else { Some(a) };
        let dmin = rng.gen_range(0..=2u32);
        let dmax = if rng.gen_bool(0.5) {
            DegMax::Inf
        } else {
            DegMax::Fin(dmin + rng.gen_range(0..=2))
        };
        Cell::new(lo, b, dmin, dmax)
    }

    /// Union of a few interval cells; always clopen in the carrier.
    pub fn clopen(rng: &mut StdRng, space: &Arc<Space>, pool: &[Ordinal]) -> DefinableSet {
        let mut cells = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let mut a = pool.choose(rng).unwrap().clone();
            let mut b = pool.choose(rng).unwrap().clone();
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            let lo = if rng.gen_bool(0.25) { None } else { Some(a) };
            cells.push(Cell::interval(lo, b));
        }
        DefinableSet::new(space, cells).expect("cells fit the space")
    }

    fn raw_map(rng: &mut StdRng, space: &Arc<Space>, lo: i64) -> IdealMap {
        let pool = point_pool(space);
        let terms = (0..rng.gen_range(1..=12))
            .map(|_| (cell(rng, space, &pool), rng.gen_range(lo..=5)))
            .collect();
        let mut nu = IdealMap::from_linear_combination(space, terms).expect("cells fit the space");
        if rng.gen_bool(0.3) {
            let carrier: Vec<&Ordinal> = pool
                .iter()
                .filter(|p| space.carrier_contains(p))
                .collect();
            if !carrier.is_empty() {
                for _ in 0..rng.gen_range(1..=2) {
                    let p = (*carrier.choose(rng).unwrap()).clone();
                    nu = nu
                        .with_override(p, rng.gen_range(lo..=5))
                        .expect("carrier point");
                }
            }
        }
        nu
    }

    /// Signed map: up to twelve weighted cells plus occasional overrides.
    pub fn map(rng: &mut StdRng, space: &Arc<Space>) -> IdealMap {
        raw_map(rng, space, -5)
    }

    /// Nonnegative variant of [`map`].
    pub fn integral_map(rng: &mut StdRng, space: &Arc<Space>) -> IdealMap {
        raw_map(rng, space, 0)
    }

    /// Integral continuous map together with the strictly decreasing clopen
    /// chain generating it; the chain doubles as the expected level-set
    /// factorization.
    pub fn continuous_integral(
        rng: &mut StdRng,
        space: &Arc<Space>,
    ) -> (IdealMap, Vec<DefinableSet>) {
        let pool = point_pool(space);
        let mut chain: Vec<DefinableSet> = Vec::new();
        let mut cur = clopen(rng, space, &pool);
        while !cur.is_empty() && chain.len() < 4 {
            if let Some(prev) = chain.last() {
                if cur.equals(prev).expect("same space") {
                    break;
                }
            }
            chain.push(cur.clone());
            if rng.gen_bool(0.3) {
                break;
            }
            cur = cur.intersect(&clopen(rng, space, &pool)).expect("same space");
        }
        let mut terms = Vec::new();
        for f in &chain {
            terms.extend(f.normalized_cells().into_iter().map(|c| (c, 1)));
        }
        let nu = IdealMap::from_linear_combination(space, terms).expect("cells fit the space");
        (nu, chain)
    }

    /// Difference of two continuous integral maps.
    pub fn continuous_signed(rng: &mut StdRng, space: &Arc<Space>) -> IdealMap {
        let (a, _) = continuous_integral(rng, space);
        let (b, _) = continuous_integral(rng, space);
        a.mul(&b.inv()).expect("same space")
    }

    /// Integer combination of clopen indicators; continuous by construction.
    pub fn continuous_combo(rng: &mut StdRng, space: &Arc<Space>) -> IdealMap {
        let pool = point_pool(space);
        let mut terms = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let f = clopen(rng, space, &pool);
            let v = rng.gen_range(-5..=5);
            terms.extend(f.normalized_cells().into_iter().map(|c| (c, v)));
        }
        IdealMap::from_linear_combination(space, terms).expect("cells fit the space")
    }

    /// Map on `[0, w]` passing the acceptance conditions, drawn from a
    /// family closed under products: finitely many spikes off the limit,
    /// optionally over an eventually-constant positive tail whose limit
    /// value strictly exceeds the tail.
    pub fn accepted_map(rng: &mut StdRng, space: &Arc<Space>) -> IdealMap {
        let w = Ordinal::omega();
        let mut terms: Vec<(Cell, i64)> = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let p = Ordinal::nat(rng.gen_range(0..12));
            terms.push((Cell::singleton(&p), rng.gen_range(1..=5)));
        }
        if !rng.gen_bool(0.55) {
            return IdealMap::from_linear_combination(space, terms).expect("cells fit the space");
        }
        let beta = Ordinal::nat(rng.gen_range(0..8));
        let tail = rng.gen_range(1..=4i64);
        terms.push((Cell::interval(Some(beta), w.clone()), tail));
        let nu = IdealMap::from_linear_combination(space, terms).expect("cells fit the space");
        let at_limit = nu.eval(&w);
        nu.with_override(w, at_limit + rng.gen_range(1..=3))
            .expect("limit is on the carrier")
    }

    /// Componentwise tuple on the sharp `[0, w^2]` model: each component is
    /// supported and continuous within its stratum.
    pub fn strat_tuple(rng: &mut StdRng, m: &DomainModel) -> Result<StratTuple, GroupError> {
        let space = m.space();
        let mut t0: Vec<(Cell, i64)> = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let block = rng.gen_range(0..=2u64);
            let n = rng.gen_range(1..=6u64);
            let p = if block == 0 {
                Ordinal::nat(n)
            } else {
                Ordinal::w_pow_mul(1, block).add(&Ordinal::nat(n))
            };
            t0.push((Cell::singleton(&p), rng.gen_range(-3..=3)));
        }
        if rng.gen_bool(0.4) {
            let hi = Ordinal::w_pow_mul(1, rng.gen_range(1..=2));
            t0.push((Cell::new(None, hi, 0, DegMax::Fin(0)), rng.gen_range(-2..=2)));
        }
        let c0 = IdealMap::from_linear_combination(space, t0)?;
        let mut t1: Vec<(Cell, i64)> = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let p = Ordinal::w_pow_mul(1, rng.gen_range(1..=5));
            t1.push((Cell::singleton(&p), rng.gen_range(-3..=3)));
        }
        let c1 = IdealMap::from_linear_combination(space, t1)?;
        let top_spike = vec![(Cell::singleton(space.top()), rng.gen_range(-3..=3))];
        let c2 = IdealMap::from_linear_combination(space, top_spike)?;
        StratTuple::new(m, vec![c0, c1, c2])
    }
}
