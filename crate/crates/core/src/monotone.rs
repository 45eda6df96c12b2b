//! Monotone limits of step functions and their extended integrals.
//!
//! A `MonotoneLimit` wraps an infinite non-decreasing stream of step
//! functions. Monotonicity is verified exactly and lazily: any query extends
//! the verified prefix, and a violation surfaces as an error carrying the
//! offending index and a witness cell of positive measure.
//!
//! The integral of a monotone limit is the limit of the step integrals, which
//! is genuinely uncomputable in general. What is computable is the
//! non-decreasing partial ladder, so an `IntegralEstimate` reports exactly
//! that: an exact value when the stream stabilizes a.e. over a window, a
//! lower-bound certificate past a threshold, or the bare ladder head plus an
//! optional caller-declared limit validated against every computed partial.

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::numeric::{ExtendedRational, Finite, PlusInf, Rational};
use crate::space::MeasureSpace;
use crate::step::StepFunction;
use crate::stream::Stream;

/// Evaluation limits for integral estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalParams {
    /// Number of stream elements to compute.
    pub budget: usize,
    /// Consecutive a.e.-identical elements required to call a stream stable.
    pub window: usize,
    /// Partial beyond this value certifies an unbounded lower bound.
    pub infinity_threshold: Rational,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            budget: 64,
            window: 4,
            infinity_threshold: Rational::from(1_000_000),
        }
    }
}

impl EvalParams {
    pub fn with_budget(budget: usize) -> Self {
        EvalParams {
            budget,
            ..EvalParams::default()
        }
    }

    pub(crate) fn merged(&self, other: &EvalParams) -> EvalParams {
        EvalParams {
            budget: self.budget.max(other.budget),
            window: self.window.max(other.window),
            infinity_threshold: self
                .infinity_threshold
                .clone()
                .max(other.infinity_threshold.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EstimateStatus {
    /// The defining stream repeats a.e. across the window starting here, so
    /// the reported value is the integral, exactly.
    StabilizedAt { index: usize, value: Rational },
    /// No stabilization within budget.
    Unstabilized,
    /// Some partial exceeded the threshold: a lower-bound certificate, not a
    /// proof of divergence.
    CertifiedInfinite { threshold: Rational },
}

/// What an evaluation learned about the limit of a partial ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralEstimate {
    /// Largest computed partial (the ladder is non-decreasing).
    pub lower_bound: Rational,
    pub status: EstimateStatus,
    /// Caller-declared limit, accepted only if consistent with all partials.
    pub declared: Option<ExtendedRational>,
    /// Structural upper bound on every partial, set by constructions that
    /// prove one (e.g. accumulated remainders below a geometric series). It
    /// certifies finiteness without claiming a value.
    pub bounded_above: Option<Rational>,
    pub params: EvalParams,
}

impl IntegralEstimate {
    /// Attaches a declared limit, rejecting declarations below any computed
    /// partial or contradicting a stabilized exact value.
    pub fn declare(mut self, value: ExtendedRational) -> Result<Self> {
        if let EstimateStatus::StabilizedAt { value: exact, .. } = &self.status {
            if value != Finite(exact.clone()) {
                return Err(Error::BadDeclaration {
                    declared: value.to_string(),
                    partial: exact.to_string(),
                });
            }
        } else if value < Finite(self.lower_bound.clone()) {
            return Err(Error::BadDeclaration {
                declared: value.to_string(),
                partial: self.lower_bound.to_string(),
            });
        }
        self.declared = Some(value);
        Ok(self)
    }

    /// Records a structural upper bound on all partials. Rejected if a
    /// computed partial already exceeds it.
    pub fn with_structural_bound(mut self, bound: Rational) -> Result<Self> {
        if self.lower_bound > bound {
            return Err(Error::BadDeclaration {
                declared: bound.to_string(),
                partial: self.lower_bound.to_string(),
            });
        }
        self.bounded_above = Some(bound);
        Ok(self)
    }

    /// The estimate for the same stream shifted down by a step function of
    /// integral `delta`: every partial moves by exactly -delta.
    pub fn shifted_down(&self, delta: &Rational) -> IntegralEstimate {
        let shift_ext = |v: &ExtendedRational| match v {
            Finite(r) => Finite(r - delta),
            inf => inf.clone(),
        };
        IntegralEstimate {
            lower_bound: &self.lower_bound - delta,
            status: match &self.status {
                EstimateStatus::StabilizedAt { index, value } => EstimateStatus::StabilizedAt {
                    index: *index,
                    value: value - delta,
                },
                EstimateStatus::Unstabilized => EstimateStatus::Unstabilized,
                EstimateStatus::CertifiedInfinite { threshold } => {
                    EstimateStatus::CertifiedInfinite {
                        threshold: threshold - delta,
                    }
                }
            },
            declared: self.declared.as_ref().map(shift_ext),
            bounded_above: self.bounded_above.as_ref().map(|b| b - delta),
            params: self.params.clone(),
        }
    }

    /// True when the integral is known finite: stabilized exactly, or covered
    /// by an accepted finite declaration.
    pub fn is_certified_finite(&self) -> bool {
        matches!(self.status, EstimateStatus::StabilizedAt { .. })
            || matches!(self.declared, Some(Finite(_)))
            || self.bounded_above.is_some()
    }

    pub fn value(&self) -> IntegralValue {
        match &self.status {
            EstimateStatus::StabilizedAt { value, .. } => {
                IntegralValue::Exact(Finite(value.clone()))
            }
            status => match &self.declared {
                Some(d) => IntegralValue::Declared(d.clone()),
                None => match status {
                    EstimateStatus::CertifiedInfinite { .. } => IntegralValue::Certified(PlusInf),
                    _ => IntegralValue::Unresolved {
                        approx: self.lower_bound.clone(),
                    },
                },
            },
        }
    }
}

/// A finite-evidence claim about an integral's value.
#[derive(Clone, Debug, PartialEq)]
pub enum IntegralValue {
    /// Pinned by stabilization or plain step arithmetic.
    Exact(ExtendedRational),
    /// A caller-declared limit, validated against all computed partials.
    Declared(ExtendedRational),
    /// An infinity backed by a crossed-threshold certificate.
    Certified(ExtendedRational),
    /// Only the ladder head is known.
    Unresolved { approx: Rational },
}

impl IntegralValue {
    /// The claimed value, if any claim was made.
    pub fn known(&self) -> Option<&ExtendedRational> {
        match self {
            IntegralValue::Exact(v) | IntegralValue::Declared(v) | IntegralValue::Certified(v) => {
                Some(v)
            }
            IntegralValue::Unresolved { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, IntegralValue::Exact(_))
    }
}

impl fmt::Display for IntegralValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegralValue::Exact(v) => write!(f, "{v} (exact)"),
            IntegralValue::Declared(v) => write!(f, "{v} (declared)"),
            IntegralValue::Certified(v) => write!(f, "{v} (certified bound)"),
            IntegralValue::Unresolved { approx } => write!(f, ">= {approx} (unresolved)"),
        }
    }
}

struct VerifyState {
    /// Elements 0..checked are space-valid and pairwise non-decreasing.
    checked: usize,
    /// First verification failure, sticky for all indices at or past it.
    failure: Option<(usize, Error)>,
}

/// A function given as a verified non-decreasing stream of step functions.
#[derive(Clone)]
pub struct MonotoneLimit {
    space: MeasureSpace,
    stream: Stream<Result<StepFunction>>,
    state: Arc<Mutex<VerifyState>>,
    /// Set when the stream is constant by construction; estimates are then
    /// exact without scanning.
    known_constant: Option<StepFunction>,
}

impl MonotoneLimit {
    pub fn from_fn(
        space: MeasureSpace,
        gen: impl Fn(usize) -> StepFunction + Send + 'static,
    ) -> Self {
        Self::from_results(space, move |n| Ok(gen(n)))
    }

    pub fn from_results(
        space: MeasureSpace,
        gen: impl FnMut(usize) -> Result<StepFunction> + Send + 'static,
    ) -> Self {
        MonotoneLimit {
            space,
            stream: Stream::new(gen),
            state: Arc::new(Mutex::new(VerifyState {
                checked: 0,
                failure: None,
            })),
            known_constant: None,
        }
    }

    /// Embeds a step function via its constant stream.
    pub fn from_step(phi: StepFunction) -> Self {
        let space = phi.space().clone();
        let constant = phi.clone();
        let mut out = Self::from_results(space, move |_| Ok(phi.clone()));
        out.known_constant = Some(constant);
        out
    }

    pub fn zero(space: MeasureSpace) -> Self {
        Self::from_step(StepFunction::zero(space))
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn as_constant(&self) -> Option<&StepFunction> {
        self.known_constant.as_ref()
    }

    /// The n-th step of the defining stream, with monotonicity verified
    /// exactly up to n.
    pub fn step_at(&self, n: usize) -> Result<StepFunction> {
        let mut st = self.state.lock().unwrap();
        if let Some((at, err)) = &st.failure {
            if *at <= n {
                return Err(err.clone());
            }
        }
        while st.checked <= n {
            let k = st.checked;
            let result = (|| -> Result<StepFunction> {
                let cur = self.stream.get(k)?;
                if cur.space() != &self.space {
                    return Err(Error::precondition(format!(
                        "stream element {k} lives on {}, expected {}",
                        cur.space(),
                        self.space
                    )));
                }
                if k > 0 {
                    let prev = self.stream.get(k - 1)?;
                    if let Some(cell) = prev.gt_witness(&cur) {
                        return Err(Error::NotMonotone {
                            index: k,
                            witness: cell,
                        });
                    }
                }
                Ok(cur)
            })();
            match result {
                Ok(_) => st.checked = k + 1,
                Err(e) => {
                    st.failure = Some((k, e.clone()));
                    return Err(e);
                }
            }
        }
        self.stream.get(n)
    }

    /// Partial integral at index n; non-decreasing in n on the verified
    /// prefix.
    pub fn partial(&self, n: usize) -> Result<Rational> {
        Ok(self.step_at(n)?.integral())
    }

    /// Computes the partial ladder up to the budget and classifies it.
    pub fn estimate(&self, params: &EvalParams) -> Result<IntegralEstimate> {
        if let Some(phi) = &self.known_constant {
            return Ok(IntegralEstimate {
                lower_bound: phi.integral(),
                status: EstimateStatus::StabilizedAt {
                    index: 0,
                    value: phi.integral(),
                },
                declared: None,
                bounded_above: None,
                params: params.clone(),
            });
        }
        let budget = params.budget.max(1);
        let window = params.window.max(2);
        let mut steps = Vec::with_capacity(budget);
        for n in 0..budget {
            steps.push(self.step_at(n)?);
        }
        let lower_bound = steps.last().expect("budget >= 1").integral();

        let mut stabilized = None;
        if budget >= window {
            'scan: for i in 0..=budget - window {
                for j in 1..window {
                    if steps[i + j] != steps[i] {
                        continue 'scan;
                    }
                }
                stabilized = Some(i);
                break;
            }
        }

        let status = if let Some(i) = stabilized {
            EstimateStatus::StabilizedAt {
                index: i,
                value: steps[i].integral(),
            }
        } else if lower_bound > params.infinity_threshold {
            EstimateStatus::CertifiedInfinite {
                threshold: params.infinity_threshold.clone(),
            }
        } else {
            EstimateStatus::Unstabilized
        };

        Ok(IntegralEstimate {
            lower_bound,
            status,
            declared: None,
            bounded_above: None,
            params: params.clone(),
        })
    }

    /// Termwise sum; partial ladders add exactly at every index.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        let (a, b) = (self.clone(), other.clone());
        let mut out =
            Self::from_results(self.space.clone(), move |n| a.step_at(n)?.add(&b.step_at(n)?));
        out.known_constant = match (&self.known_constant, &other.known_constant) {
            (Some(f), Some(g)) => Some(f.add(g)?),
            _ => None,
        };
        Ok(out)
    }

    /// Termwise scaling by a nonnegative constant. Negative scaling leaves
    /// the monotone cone; negation lives on signed limits.
    pub fn scale_nonneg(&self, c: &Rational) -> Result<Self> {
        if c.is_negative() {
            return Err(Error::NegativeScale(c.clone()));
        }
        let a = self.clone();
        let c2 = c.clone();
        let mut out =
            Self::from_results(self.space.clone(), move |n| Ok(a.step_at(n)?.scale(&c2)));
        out.known_constant = self.known_constant.as_ref().map(|f| f.scale(c));
        Ok(out)
    }

    pub fn min(&self, other: &Self) -> Result<Self> {
        self.combine(other, StepFunction::min)
    }

    pub fn max(&self, other: &Self) -> Result<Self> {
        self.combine(other, StepFunction::max)
    }

    fn combine(
        &self,
        other: &Self,
        op: fn(&StepFunction, &StepFunction) -> Result<StepFunction>,
    ) -> Result<Self> {
        self.check_same_space(other)?;
        let (a, b) = (self.clone(), other.clone());
        let mut out = Self::from_results(self.space.clone(), move |n| {
            op(&a.step_at(n)?, &b.step_at(n)?)
        });
        out.known_constant = match (&self.known_constant, &other.known_constant) {
            (Some(f), Some(g)) => Some(op(f, g)?),
            _ => None,
        };
        Ok(out)
    }

    /// Diagonal limit of a non-decreasing stream of monotone limits: element
    /// k is the pointwise max over the first k+1 limits' k-th steps. The
    /// outer stream is verified termwise non-decreasing on the queried
    /// prefix; the diagonal's own monotonicity is re-verified lazily as
    /// usual.
    pub fn sup_of_stream(fs: Stream<MonotoneLimit>) -> MonotoneLimit {
        let space = fs.get(0).space().clone();
        let gen_space = space.clone();
        let gen = move |k: usize| -> Result<StepFunction> {
            // new comparisons at k: the (k-1, k) pair on terms 0..=k, and
            // older pairs on the fresh term k; with memoized generation this
            // covers every pair (n, n+1) at every term <= k exactly once
            for n in 0..k {
                let lo = fs.get(n);
                let hi = fs.get(n + 1);
                let terms: Vec<usize> = if n + 1 == k { (0..=k).collect() } else { vec![k] };
                for i in terms {
                    if !lo.step_at(i)?.le_ae(&hi.step_at(i)?)? {
                        return Err(Error::OuterNotMonotone { outer: n, term: i });
                    }
                }
            }
            let mut acc = fs.get(0).step_at(k)?;
            for n in 1..=k {
                acc = acc.max(&fs.get(n).step_at(k)?)?;
            }
            debug_assert_eq!(acc.space(), &gen_space);
            Ok(acc)
        };
        MonotoneLimit::from_results(space, gen)
    }

    /// Diagonal without the outer termwise check, for internal constructions
    /// whose outer monotonicity holds by construction (e.g. accumulated sums
    /// of nonnegative parts). The diagonal itself is still verified lazily.
    pub(crate) fn sup_of_stream_unchecked(
        fs: Stream<Result<MonotoneLimit>>,
        space: MeasureSpace,
    ) -> MonotoneLimit {
        let gen = move |k: usize| -> Result<StepFunction> {
            let mut acc = fs.get(0)?.step_at(k)?;
            for n in 1..=k {
                acc = acc.max(&fs.get(n)?.step_at(k)?)?;
            }
            Ok(acc)
        };
        MonotoneLimit::from_results(space, gen)
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::precondition(format!(
                "operands live on different spaces: {} vs {}",
                self.space, other.space
            )));
        }
        Ok(())
    }
}

/// Residual table used as ordering evidence between two monotone limits.
///
/// Entry (m, n) is the integral of the positive part of `phi_m - psi_n`.
/// When f <= g a.e., each row decreases to zero as n grows; the table shows
/// how far that has been observed at a finite horizon.
#[derive(Clone, Debug)]
pub struct ComparisonEvidence {
    pub residuals: Vec<Vec<Rational>>,
}

impl ComparisonEvidence {
    pub fn residual(&self, m: usize, n: usize) -> &Rational {
        &self.residuals[m][n]
    }

    /// Largest residual in the last column: how far from `f <= g` the
    /// evidence still is at the horizon.
    pub fn max_final_residual(&self) -> Rational {
        self.residuals
            .iter()
            .filter_map(|row| row.last().cloned())
            .fold(Rational::zero(), Rational::max)
    }
}

/// Tabulates the positive-part residuals between the defining streams of two
/// monotone limits up to the horizon (inclusive).
pub fn compare_evidence(
    f: &MonotoneLimit,
    g: &MonotoneLimit,
    horizon: usize,
) -> Result<ComparisonEvidence> {
    let mut residuals = Vec::with_capacity(horizon + 1);
    for m in 0..=horizon {
        let phi_m = f.step_at(m)?;
        let mut row = Vec::with_capacity(horizon + 1);
        for n in 0..=horizon {
            let psi_n = g.step_at(n)?;
            row.push(phi_m.sub(&psi_n)?.positive_part().integral());
        }
        residuals.push(row);
    }
    Ok(ComparisonEvidence { residuals })
}
