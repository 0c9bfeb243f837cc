//! Monotone approximations, the stage-wise normalization that turns any
//! monotone approximation into a conditional semimeasure, weighted
//! mixtures of such semimeasures, and domination checks.
//!
//! Arguments `x` and `y` are positive naturals. Where words are needed,
//! natural `n` stands for [`index_word`]`(n)`, the `(n-1)`-th word in
//! shortlex order.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::arith::Dyadic;
use crate::bits::BitString;
use crate::codes::{bar_encode, nat_to_string, string_to_nat};

/// The approximation did not return at this point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Diverged;

/// A function `φ(x, y, k)` that is nondecreasing in `k`.
pub trait MonotoneApproximator {
    fn eval(&self, x: u64, y: u64, k: u64) -> Result<Dyadic, Diverged>;
}

impl<A: MonotoneApproximator + ?Sized> MonotoneApproximator for &A {
    fn eval(&self, x: u64, y: u64, k: u64) -> Result<Dyadic, Diverged> {
        (**self).eval(x, y, k)
    }
}

impl<A: MonotoneApproximator + ?Sized> MonotoneApproximator for Box<A> {
    fn eval(&self, x: u64, y: u64, k: u64) -> Result<Dyadic, Diverged> {
        (**self).eval(x, y, k)
    }
}

pub fn index_word(n: u64) -> BitString {
    nat_to_string(n - 1)
}

pub fn word_index(w: &BitString) -> Option<u64> {
    string_to_nat(w)?.checked_add(1)
}

/// Wraps a closure.
pub struct FnApproximator<F>(pub F);

impl<F: Fn(u64, u64, u64) -> Result<Dyadic, Diverged>> MonotoneApproximator for FnApproximator<F> {
    fn eval(&self, x: u64, y: u64, k: u64) -> Result<Dyadic, Diverged> {
        (self.0)(x, y, k)
    }
}

/// A step function given by breakpoints: the value at `k` is the one at
/// the largest breakpoint `<= k`, or 0 before the first. A `None`
/// breakpoint means divergence from that stage on.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TableApproximator {
    points: BTreeMap<(u64, u64), BTreeMap<u64, Option<Dyadic>>>,
}

impl TableApproximator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: u64, y: u64, k: u64, value: Option<Dyadic>) {
        self.points.entry((x, y)).or_default().insert(k, value);
    }

    pub fn rows(&self) -> impl Iterator<Item = (u64, u64, u64, Option<&Dyadic>)> + '_ {
        self.points
            .iter()
            .flat_map(|(&(x, y), ks)| ks.iter().map(move |(&k, v)| (x, y, k, v.as_ref())))
    }

    /// Largest breakpoint stage.
    pub fn horizon(&self) -> u64 {
        self.points
            .values()
            .filter_map(|ks| ks.keys().next_back().copied())
            .max()
            .unwrap_or(0)
    }

    /// `(x, y)` pairs with at least one breakpoint.
    pub fn support(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.points.keys().copied()
    }
}

impl MonotoneApproximator for TableApproximator {
    fn eval(&self, x: u64, y: u64, k: u64) -> Result<Dyadic, Diverged> {
        match self.points.get(&(x, y)).and_then(|ks| ks.range(..=k).next_back()) {
            None => Ok(Dyadic::zero()),
            Some((_, Some(v))) => Ok(v.clone()),
            Some((_, None)) => Err(Diverged),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemimeasureError {
    #[error("approximation decreases at x={x}, y={y}, stage {k}")]
    NonMonotone { x: u64, y: u64, k: u64 },
    #[error("mixture weights sum to {0}, more than 1")]
    WeightsExceedOne(Dyadic),
    #[error("stage mismatch: mixture at {mixture}, component {component} at {component_stage}")]
    StageMismatch {
        mixture: u64,
        component: usize,
        component_stage: u64,
    },
    #[error("{parts} component tables for {components} mixture components")]
    ComponentCount { parts: usize, components: usize },
}

/// A finite conditional semimeasure `P(x|y)`; absent entries are 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionalSemimeasure {
    pub values: BTreeMap<(u64, u64), Dyadic>,
    pub stage: u64,
    /// Columns whose mass test has failed.
    pub frozen_y: BTreeSet<u64>,
}

impl ConditionalSemimeasure {
    pub fn get(&self, x: u64, y: u64) -> Dyadic {
        self.values.get(&(x, y)).cloned().unwrap_or_else(Dyadic::zero)
    }

    pub fn columns(&self) -> BTreeSet<u64> {
        self.values.keys().map(|&(_, y)| y).collect()
    }

    pub fn column_sum(&self, y: u64) -> Dyadic {
        self.values
            .iter()
            .filter(|((_, yy), _)| *yy == y)
            .map(|(_, v)| v)
            .sum()
    }

    /// Every column sums to at most 1.
    pub fn is_semimeasure(&self) -> bool {
        self.columns().into_iter().all(|y| self.column_sum(y) <= Dyadic::one())
    }

    fn set(&mut self, x: u64, y: u64, v: Dyadic) {
        if v.is_zero() {
            self.values.remove(&(x, y));
        } else {
            self.values.insert((x, y), v);
        }
    }
}

/// What the mass test does when some column exceeds 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FreezeMode {
    /// No value changes at that stage.
    #[default]
    AllOrNothing,
    /// Only the offending columns keep their old values.
    PerColumn,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StageOutcome {
    Assigned,
    /// The listed columns exceeded 1.
    Frozen(Vec<u64>),
    /// Evaluation at `(x, y)` never returned; nothing changes from here on.
    Diverged { x: u64, y: u64 },
}

/// Stage-by-stage normalization. Stage `k` evaluates `φ(i, j, k)` for
/// `1 <= i, j <= k`; if every column sum is at most 1 the grid is copied
/// into `P`, otherwise `P` stays as it was.
pub struct Normalizer<A> {
    phi: A,
    mode: FreezeMode,
    current: ConditionalSemimeasure,
    prev: Vec<Dyadic>,
    diverged: Option<(u64, u64)>,
}

impl<A: MonotoneApproximator> Normalizer<A> {
    pub fn new(phi: A, mode: FreezeMode) -> Self {
        Normalizer {
            phi,
            mode,
            current: ConditionalSemimeasure::default(),
            prev: Vec::new(),
            diverged: None,
        }
    }

    pub fn current(&self) -> &ConditionalSemimeasure {
        &self.current
    }

    pub fn into_current(self) -> ConditionalSemimeasure {
        self.current
    }

    pub fn step(&mut self) -> Result<StageOutcome, SemimeasureError> {
        self.current.stage += 1;
        let k = self.current.stage;
        if let Some((x, y)) = self.diverged {
            // Still waiting on the evaluation that never returned.
            return Ok(StageOutcome::Diverged { x, y });
        }
        let n = k as usize;
        let mut grid = Vec::with_capacity(n * n);
        for j in 1..=k {
            for i in 1..=k {
                let v = match self.phi.eval(i, j, k) {
                    Ok(v) => v,
                    Err(Diverged) => {
                        self.diverged = Some((i, j));
                        return Ok(StageOutcome::Diverged { x: i, y: j });
                    }
                };
                if i < k && j < k {
                    let old = &self.prev[(j as usize - 1) * (n - 1) + i as usize - 1];
                    if v < *old {
                        return Err(SemimeasureError::NonMonotone { x: i, y: j, k });
                    }
                }
                grid.push(v);
            }
        }
        let over: Vec<u64> = (1..=k)
            .filter(|&j| {
                let col = &grid[(j as usize - 1) * n..j as usize * n];
                col.iter().sum::<Dyadic>() > Dyadic::one()
            })
            .collect();
        let outcome = if over.is_empty() {
            StageOutcome::Assigned
        } else {
            StageOutcome::Frozen(over.clone())
        };
        let assign_all = over.is_empty();
        if assign_all || self.mode == FreezeMode::PerColumn {
            for j in 1..=k {
                if over.contains(&j) {
                    continue;
                }
                for i in 1..=k {
                    let v = grid[(j as usize - 1) * n + i as usize - 1].clone();
                    self.current.set(i, j, v);
                }
            }
        }
        self.current.frozen_y.extend(over);
        self.prev = grid;
        Ok(outcome)
    }
}

/// Runs stages `1..=max_stage`.
pub fn normalize<A: MonotoneApproximator>(
    phi: A,
    max_stage: u64,
    mode: FreezeMode,
) -> Result<ConditionalSemimeasure, SemimeasureError> {
    let mut n = Normalizer::new(phi, mode);
    for _ in 0..max_stage {
        n.step()?;
    }
    Ok(n.into_current())
}

pub struct MixtureComponent {
    pub weight_exponent: u64,
    pub approximator: Box<dyn MonotoneApproximator>,
}

/// Components with weights `α_j = 2^-weight_exponent_j`.
pub struct MixtureSpec {
    pub components: Vec<MixtureComponent>,
}

impl MixtureSpec {
    pub fn new(components: Vec<MixtureComponent>) -> Self {
        MixtureSpec { components }
    }

    /// Component `j` (from 1) gets exponent `|bar(nat_to_string(j))| + c_j`.
    pub fn with_bar_weights(approximators: Vec<Box<dyn MonotoneApproximator>>, extra: &[u64]) -> Self {
        let components = approximators
            .into_iter()
            .enumerate()
            .map(|(idx, approximator)| MixtureComponent {
                weight_exponent: bar_weight(idx as u64 + 1) + extra.get(idx).copied().unwrap_or(0),
                approximator,
            })
            .collect();
        MixtureSpec { components }
    }

    pub fn weight(&self, j: usize) -> Dyadic {
        Dyadic::pow2_neg(self.components[j].weight_exponent)
    }

    pub fn weight_sum(&self) -> Dyadic {
        (0..self.components.len()).map(|j| self.weight(j)).sum()
    }

    pub fn validate(&self) -> Result<(), SemimeasureError> {
        let s = self.weight_sum();
        if s > Dyadic::one() {
            return Err(SemimeasureError::WeightsExceedOne(s));
        }
        Ok(())
    }
}

/// `|bar(nat_to_string(j))|`.
pub fn bar_weight(j: u64) -> u64 {
    bar_encode(&nat_to_string(j)).len() as u64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mixture {
    pub measure: ConditionalSemimeasure,
    /// The normalized components, same order as the spec.
    pub parts: Vec<ConditionalSemimeasure>,
}

/// `m(x|y) = Σ_j α_j P_j(x|y)` with every `P_j` normalized to `max_stage`.
pub fn mixture(spec: &MixtureSpec, max_stage: u64, mode: FreezeMode) -> Result<Mixture, SemimeasureError> {
    spec.validate()?;
    let mut parts = Vec::with_capacity(spec.components.len());
    for c in &spec.components {
        parts.push(normalize(&*c.approximator, max_stage, mode)?);
    }
    let mut measure = ConditionalSemimeasure {
        stage: max_stage,
        ..Default::default()
    };
    for (j, p) in parts.iter().enumerate() {
        let w = spec.components[j].weight_exponent;
        for (&key, v) in &p.values {
            *measure.values.entry(key).or_insert_with(Dyadic::zero) += &v.shr(w);
        }
    }
    Ok(Mixture { measure, parts })
}

/// `m(x|y) >= α_j P_j(x|y)` for every component and every point of the
/// domain.
pub fn check_domination(
    m: &ConditionalSemimeasure,
    spec: &MixtureSpec,
    parts: &[ConditionalSemimeasure],
    domain: &[(u64, u64)],
) -> Result<bool, SemimeasureError> {
    if parts.len() != spec.components.len() {
        return Err(SemimeasureError::ComponentCount {
            parts: parts.len(),
            components: spec.components.len(),
        });
    }
    for (j, p) in parts.iter().enumerate() {
        if p.stage != m.stage {
            return Err(SemimeasureError::StageMismatch {
                mixture: m.stage,
                component: j,
                component_stage: p.stage,
            });
        }
    }
    Ok(parts.iter().enumerate().all(|(j, p)| {
        let w = spec.components[j].weight_exponent;
        domain.iter().all(|&(x, y)| m.get(x, y) >= p.get(x, y).shr(w))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn approx<F: Fn(u64, u64, u64) -> Result<Dyadic, Diverged> + 'static>(f: F) -> Box<dyn MonotoneApproximator> {
        Box::new(FnApproximator(f))
    }

    fn point(x0: u64, y0: u64) -> Box<dyn MonotoneApproximator> {
        approx(move |x, y, _| Ok(if (x, y) == (x0, y0) { Dyadic::one() } else { Dyadic::zero() }))
    }

    #[test]
    fn zero_stays_zero() {
        let mut n = Normalizer::new(FnApproximator(|_, _, _| Ok(Dyadic::zero())), FreezeMode::AllOrNothing);
        for _ in 0..12 {
            assert_eq!(n.step().unwrap(), StageOutcome::Assigned);
            assert!(n.current().values.is_empty());
        }
    }

    #[test]
    fn genuine_semimeasure_passes_through() {
        let phi = FnApproximator(|x, _, k| Ok(if x <= k { Dyadic::pow2_neg(x) } else { Dyadic::zero() }));
        let p = normalize(&phi, 15, FreezeMode::AllOrNothing).unwrap();
        for y in 1..=15 {
            for x in 1..=15 {
                assert_eq!(p.get(x, y), Dyadic::pow2_neg(x));
            }
        }
        assert!(p.frozen_y.is_empty());
    }

    #[test]
    fn constant_one_assigns_once() {
        let mut n = Normalizer::new(FnApproximator(|_, _, _| Ok(Dyadic::one())), FreezeMode::AllOrNothing);
        assert_eq!(n.step().unwrap(), StageOutcome::Assigned);
        for k in 2..10u64 {
            assert_eq!(n.step().unwrap(), StageOutcome::Frozen((1..=k).collect()));
            assert_eq!(n.current().values.len(), 1);
            assert_eq!(n.current().get(1, 1), Dyadic::one());
        }
    }

    #[test]
    fn divergence_stops_updates() {
        let phi = FnApproximator(|x, _, k| if k >= 3 && x == 2 { Err(Diverged) } else { Ok(Dyadic::pow2_neg(2)) });
        let mut n = Normalizer::new(phi, FreezeMode::AllOrNothing);
        n.step().unwrap();
        n.step().unwrap();
        let snapshot = n.current().values.clone();
        assert_eq!(n.step().unwrap(), StageOutcome::Diverged { x: 2, y: 1 });
        for _ in 0..5 {
            n.step().unwrap();
            assert_eq!(n.current().values, snapshot);
        }
        assert_eq!(n.current().stage, 8);
    }

    #[test]
    fn rejects_decrease() {
        let phi = FnApproximator(|x, y, k| Ok(if k == 3 && (x, y) == (2, 1) { Dyadic::zero() } else { Dyadic::pow2_neg(3) }));
        let err = normalize(&phi, 5, FreezeMode::AllOrNothing).unwrap_err();
        assert_eq!(err, SemimeasureError::NonMonotone { x: 2, y: 1, k: 3 });
    }

    #[test]
    fn per_column_variant() {
        // Column 1 overflows from stage 3; column 2 never does.
        let phi = FnApproximator(|_, y, _| Ok(if y == 1 { Dyadic::pow2_neg(1) } else { Dyadic::pow2_neg(4) }));
        let strict = normalize(&phi, 6, FreezeMode::AllOrNothing).unwrap();
        let loose = normalize(&phi, 6, FreezeMode::PerColumn).unwrap();
        assert_eq!(strict.get(3, 2), Dyadic::zero());
        assert_eq!(loose.get(6, 2), Dyadic::pow2_neg(4));
        assert_eq!(loose.get(3, 1), Dyadic::zero());
        assert_eq!(loose.get(2, 1), Dyadic::pow2_neg(1));
        assert!(loose.is_semimeasure() && strict.is_semimeasure());
    }

    #[test]
    fn table_step_semantics() {
        let mut t = TableApproximator::new();
        t.insert(1, 1, 2, Some(Dyadic::pow2_neg(3)));
        t.insert(1, 1, 5, Some(Dyadic::pow2_neg(1)));
        t.insert(2, 1, 4, None);
        assert_eq!(t.eval(1, 1, 1), Ok(Dyadic::zero()));
        assert_eq!(t.eval(1, 1, 4), Ok(Dyadic::pow2_neg(3)));
        assert_eq!(t.eval(1, 1, 9), Ok(Dyadic::pow2_neg(1)));
        assert_eq!(t.eval(2, 1, 3), Ok(Dyadic::zero()));
        assert_eq!(t.eval(2, 1, 4), Err(Diverged));
        assert_eq!(t.horizon(), 5);
    }

    #[test]
    fn mixture_examples() {
        let spec = MixtureSpec::new(alloc::vec![MixtureComponent { weight_exponent: 0, approximator: point(2, 3) }]);
        let m = mixture(&spec, 4, FreezeMode::AllOrNothing).unwrap();
        assert_eq!(m.measure.values, m.parts[0].values);
        let dom: Vec<_> = (1..=4).flat_map(|x| (1..=4).map(move |y| (x, y))).collect();
        assert!(check_domination(&m.measure, &spec, &m.parts, &dom).unwrap());

        let spec = MixtureSpec::new(alloc::vec![
            MixtureComponent { weight_exponent: 1, approximator: point(1, 2) },
            MixtureComponent { weight_exponent: 1, approximator: point(2, 2) },
        ]);
        let m = mixture(&spec, 3, FreezeMode::AllOrNothing).unwrap();
        assert_eq!(m.measure.get(1, 2), Dyadic::pow2_neg(1));
        assert_eq!(m.measure.get(2, 2), Dyadic::pow2_neg(1));
        assert!(check_domination(&m.measure, &spec, &m.parts, &dom).unwrap());

        let bars = MixtureSpec::with_bar_weights((1..=4).map(|j| point(j, 1)).collect(), &[]);
        let ws: Vec<_> = bars.components.iter().map(|c| c.weight_exponent).collect();
        assert_eq!(ws, [3, 3, 5, 5]);
        assert_eq!(bars.weight_sum(), "5/2^4".parse().unwrap());
    }

    #[test]
    fn weight_and_stage_errors() {
        let spec = MixtureSpec::new(alloc::vec![
            MixtureComponent { weight_exponent: 0, approximator: point(1, 1) },
            MixtureComponent { weight_exponent: 3, approximator: point(1, 1) },
        ]);
        assert!(matches!(mixture(&spec, 2, FreezeMode::AllOrNothing), Err(SemimeasureError::WeightsExceedOne(_))));
        let spec = MixtureSpec::new(alloc::vec![MixtureComponent { weight_exponent: 0, approximator: point(1, 1) }]);
        let m = mixture(&spec, 3, FreezeMode::AllOrNothing).unwrap();
        let stale = normalize(point(1, 1), 2, FreezeMode::AllOrNothing).unwrap();
        assert!(matches!(
            check_domination(&m.measure, &spec, &[stale], &[(1, 1)]),
            Err(SemimeasureError::StageMismatch { .. })
        ));
    }

    #[test]
    fn word_indices() {
        assert_eq!(index_word(1), BitString::empty());
        assert_eq!(index_word(4), "00".parse().unwrap());
        for n in 1..200 {
            assert_eq!(word_index(&index_word(n)), Some(n));
        }
    }

    proptest! {
        /// Randomized monotone step tables: every stage keeps column sums
        /// at most 1, and a column that fails the test keeps failing.
        #[test]
        fn column_safety_and_permanent_freeze(
            rows in proptest::collection::vec((1u64..6, 1u64..6, 1u64..10, 0u64..6), 0..30),
        ) {
            let mut t = TableApproximator::new();
            let mut cells: BTreeMap<(u64, u64), Vec<(u64, u64)>> = BTreeMap::new();
            for (x, y, k, e) in rows {
                cells.entry((x, y)).or_default().push((k, e));
            }
            for ((x, y), mut pts) in cells {
                pts.sort();
                // Exponents shrink along stages so values climb.
                let mut exp = 8u64;
                for (k, e) in pts {
                    exp = exp.min(e + 1).max(1);
                    t.insert(x, y, k, Some(Dyadic::pow2_neg(exp)));
                }
            }
            for mode in [FreezeMode::AllOrNothing, FreezeMode::PerColumn] {
                let mut n = Normalizer::new(&t, mode);
                let mut failed: BTreeSet<u64> = BTreeSet::new();
                for _ in 0..12 {
                    let before = n.current().clone();
                    let out = n.step().unwrap();
                    prop_assert!(n.current().is_semimeasure());
                    if let StageOutcome::Frozen(cols) = &out {
                        let now: BTreeSet<u64> = cols.iter().copied().collect();
                        prop_assert!(failed.is_subset(&now));
                        failed = now;
                        if mode == FreezeMode::AllOrNothing {
                            prop_assert_eq!(&before.values, &n.current().values);
                        }
                    } else {
                        prop_assert!(failed.is_empty());
                    }
                }
            }
        }
    }
}
