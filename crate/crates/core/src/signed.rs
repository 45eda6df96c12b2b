//! Certified differences of monotone limits, L1, and the convergence
//! theorems as finite-horizon evidence producers.
//!
//! A `SignedLimit` is a pair (pos, neg) of monotone limits together with a
//! definedness certificate: at least one side carries a certified finite
//! integral, so the difference of the two integrals is never an undefined
//! opposite-infinities sum. The certificate is checked once at construction
//! and cached; every downstream operation relies on it.
//!
//! The monotone-convergence harness executes the renormalization that makes
//! the limit construction work: a step minorant within 2^-(n+1) of each
//! finite negative part is subtracted and the remainders are re-accumulated,
//! which keeps the accumulated remainder integrals at or below 1; the limit
//! is assembled from diagonal sups of the accumulated sequences. The Fatou
//! and dominated-convergence checkers certify inequalities among computed
//! partials, never undecidable limit claims.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::monotone::{EvalParams, IntegralEstimate, IntegralValue, MonotoneLimit};
use crate::numeric::{ExtendedRational, Finite, Rational};
use crate::space::{Cell, MeasureSpace};
use crate::step::StepFunction;
use crate::stream::Stream;

/// Which side of the difference carries a certified finite integral.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FiniteSide {
    Pos,
    Neg,
    Both,
}

/// A function f = pos - neg with a well-defined (possibly infinite) integral.
#[derive(Clone)]
pub struct SignedLimit {
    pos: MonotoneLimit,
    neg: MonotoneLimit,
    pos_estimate: IntegralEstimate,
    neg_estimate: IntegralEstimate,
    finite_side: FiniteSide,
}

impl std::fmt::Debug for SignedLimit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SignedLimit")
            .field("space", &self.space().describe())
            .field("finite_side", &self.finite_side)
            .field("integral", &self.integral())
            .finish()
    }
}

impl SignedLimit {
    /// Certifies the pair. Fails with a definedness error when neither side's
    /// estimate pins a finite integral.
    pub fn new(
        pos: MonotoneLimit,
        neg: MonotoneLimit,
        pos_estimate: IntegralEstimate,
        neg_estimate: IntegralEstimate,
    ) -> Result<Self> {
        if pos.space() != neg.space() {
            return Err(Error::precondition(format!(
                "sides live on different spaces: {} vs {}",
                pos.space(),
                neg.space()
            )));
        }
        let finite_side = match (
            pos_estimate.is_certified_finite(),
            neg_estimate.is_certified_finite(),
        ) {
            (true, true) => FiniteSide::Both,
            (true, false) => FiniteSide::Pos,
            (false, true) => FiniteSide::Neg,
            (false, false) => return Err(Error::Definedness),
        };
        Ok(SignedLimit {
            pos,
            neg,
            pos_estimate,
            neg_estimate,
            finite_side,
        })
    }

    /// Embeds a monotone limit (negative side zero).
    pub fn from_monotone(f: MonotoneLimit, params: &EvalParams) -> Result<Self> {
        let zero = MonotoneLimit::zero(f.space().clone());
        let pos_estimate = f.estimate(params)?;
        let neg_estimate = zero.estimate(params)?;
        Self::new(f, zero, pos_estimate, neg_estimate)
    }

    /// Embeds a step function via constant streams; everything is exact.
    pub fn from_step(phi: StepFunction) -> Self {
        let params = EvalParams::default();
        let space = phi.space().clone();
        let pos = MonotoneLimit::from_step(phi);
        let neg = MonotoneLimit::zero(space);
        let pos_estimate = pos.estimate(&params).expect("constant stream");
        let neg_estimate = neg.estimate(&params).expect("constant stream");
        Self::new(pos, neg, pos_estimate, neg_estimate).expect("steps are finite")
    }

    pub fn zero(space: MeasureSpace) -> Self {
        Self::from_step(StepFunction::zero(space))
    }

    pub fn space(&self) -> &MeasureSpace {
        self.pos.space()
    }

    pub fn pos(&self) -> &MonotoneLimit {
        &self.pos
    }

    pub fn neg(&self) -> &MonotoneLimit {
        &self.neg
    }

    pub fn pos_estimate(&self) -> &IntegralEstimate {
        &self.pos_estimate
    }

    pub fn neg_estimate(&self) -> &IntegralEstimate {
        &self.neg_estimate
    }

    pub fn finite_side(&self) -> FiniteSide {
        self.finite_side
    }

    /// The step function this limit equals when both sides are constant.
    pub fn as_step(&self) -> Option<StepFunction> {
        match (self.pos.as_constant(), self.neg.as_constant()) {
            (Some(p), Some(n)) => p.sub(n).ok(),
            _ => None,
        }
    }

    /// The integral claim: difference of the side claims. The certificate
    /// guarantees the subtraction is defined whenever both sides are claimed.
    pub fn integral(&self) -> IntegralValue {
        let p = self.pos_estimate.value();
        let n = self.neg_estimate.value();
        match (p.known(), n.known()) {
            (Some(pv), Some(nv)) => {
                let v = pv.sub(nv).expect("certificate keeps one side finite");
                if p.is_exact() && n.is_exact() {
                    IntegralValue::Exact(v)
                } else if matches!(p, IntegralValue::Certified(_))
                    || matches!(n, IntegralValue::Certified(_))
                {
                    IntegralValue::Certified(v)
                } else {
                    IntegralValue::Declared(v)
                }
            }
            (None, Some(Finite(nv))) => IntegralValue::Unresolved {
                approx: &self.pos_estimate.lower_bound - nv,
            },
            (Some(Finite(pv)), None) => IntegralValue::Unresolved {
                approx: pv - &self.neg_estimate.lower_bound,
            },
            _ => IntegralValue::Unresolved {
                approx: &self.pos_estimate.lower_bound - &self.neg_estimate.lower_bound,
            },
        }
    }

    /// The n-th step approximant pos_n - neg_n (tends to f a.e.).
    pub fn approximant(&self, n: usize) -> Result<StepFunction> {
        self.pos.step_at(n)?.sub(&self.neg.step_at(n)?)
    }

    pub fn negate(&self) -> SignedLimit {
        SignedLimit {
            pos: self.neg.clone(),
            neg: self.pos.clone(),
            pos_estimate: self.neg_estimate.clone(),
            neg_estimate: self.pos_estimate.clone(),
            finite_side: match self.finite_side {
                FiniteSide::Pos => FiniteSide::Neg,
                FiniteSide::Neg => FiniteSide::Pos,
                FiniteSide::Both => FiniteSide::Both,
            },
        }
    }

    pub fn scale(&self, c: &Rational, params: &EvalParams) -> Result<SignedLimit> {
        if c.is_negative() {
            return self.negate().scale(&-c, params);
        }
        let pos = self.pos.scale_nonneg(c)?;
        let neg = self.neg.scale_nonneg(c)?;
        let pos_estimate = carry_scaled_claim(&pos, &self.pos_estimate, c, params)?;
        let neg_estimate = carry_scaled_claim(&neg, &self.neg_estimate, c, params)?;
        SignedLimit::new(pos, neg, pos_estimate, neg_estimate)
    }

    /// Sum, defined exactly when the sum of the integrals is: the sides add
    /// termwise and the certificate is re-derived.
    pub fn add(&self, other: &SignedLimit, params: &EvalParams) -> Result<SignedLimit> {
        if let (Some(a), Some(b)) = (self.integral().known(), other.integral().known()) {
            if a.add(b).is_err() {
                return Err(Error::Definedness);
            }
        }
        let params = params
            .merged(&self.pos_estimate.params)
            .merged(&other.pos_estimate.params);
        let pos = self.pos.add(&other.pos)?;
        let neg = self.neg.add(&other.neg)?;
        let pos_estimate = combined_estimate(
            &pos,
            &self.pos_estimate,
            &other.pos_estimate,
            &params,
            |a, b| a.add(b).ok(),
        )?;
        let neg_estimate = combined_estimate(
            &neg,
            &self.neg_estimate,
            &other.neg_estimate,
            &params,
            |a, b| a.add(b).ok(),
        )?;
        SignedLimit::new(pos, neg, pos_estimate, neg_estimate)
    }

    pub fn sub(&self, other: &SignedLimit, params: &EvalParams) -> Result<SignedLimit> {
        self.add(&other.negate(), params)
    }

    /// Pointwise maximum via the lattice identity
    /// `max{f1-f2, g1-g2} = (f1+g1) - min{g1+f2, f1+g2}`,
    /// which certifies through the summed positive sides. When that route
    /// does not certify, the approximating sequence max{phi_n - f2,
    /// psi_n - g2} is fed through the monotone-convergence harness.
    pub fn max(&self, other: &SignedLimit, params: &EvalParams) -> Result<SignedLimit> {
        match self.max_by_identity(other, params) {
            Ok(v) => Ok(v),
            Err(Error::Definedness) => self.max_by_harness(other, params),
            Err(e) => Err(e),
        }
    }

    pub fn min(&self, other: &SignedLimit, params: &EvalParams) -> Result<SignedLimit> {
        Ok(self.negate().max(&other.negate(), params)?.negate())
    }

    pub fn abs(&self, params: &EvalParams) -> Result<SignedLimit> {
        self.max(&self.negate(), params)
    }

    fn max_by_identity(&self, other: &SignedLimit, params: &EvalParams) -> Result<SignedLimit> {
        let params = params
            .merged(&self.pos_estimate.params)
            .merged(&other.pos_estimate.params);
        let pos = self.pos.add(&other.pos)?;
        let pos_estimate = combined_estimate(
            &pos,
            &self.pos_estimate,
            &other.pos_estimate,
            &params,
            |a, b| a.add(b).ok(),
        )?;
        let left = other.pos.add(&self.neg)?;
        let right = self.pos.add(&other.neg)?;
        let neg = left.min(&right)?;
        // limits of termwise minima are minima of the limits, so a min claim
        // follows from the side claims when the fresh scan resolves nothing
        let neg_estimate = {
            let fresh = neg.estimate(&params)?;
            let left_claim = claim_sum(&other.pos_estimate, &self.neg_estimate);
            let right_claim = claim_sum(&self.pos_estimate, &other.neg_estimate);
            match (fresh.value().known().is_some(), left_claim, right_claim) {
                (false, Some(a), Some(b)) => fresh.declare(a.min(b))?,
                _ => fresh,
            }
        };
        SignedLimit::new(pos, neg, pos_estimate, neg_estimate)
    }

    fn max_by_harness(&self, other: &SignedLimit, params: &EvalParams) -> Result<SignedLimit> {
        let f = self.clone();
        let g = other.clone();
        let params_inner = params.clone();
        let horizon = params.budget.max(1);
        let truncate = move |part: &MonotoneLimit,
                             neg: &MonotoneLimit,
                             neg_est: &IntegralEstimate,
                             n: usize,
                             params: &EvalParams|
              -> Result<SignedLimit> {
            let head = MonotoneLimit::from_step(part.step_at(n)?);
            let head_est = head.estimate(params)?;
            SignedLimit::new(head, neg.clone(), head_est, neg_est.clone())
        };
        let terms = move |n: usize| -> Result<SignedLimit> {
            let left = truncate(&f.pos, &f.neg, &f.neg_estimate, n, &params_inner)?;
            let right = truncate(&g.pos, &g.neg, &g.neg_estimate, n, &params_inner)?;
            left.max_by_identity(&right, &params_inner)
        };
        let (limit, _report) = beppo_levi(terms, horizon, None, params)?;
        Ok(limit)
    }

    /// An a.e.-equal pair whose sides are both nonnegative, built by
    /// subtracting a common step minorant of the two first-stage steps.
    /// Every partial shifts by the minorant's integral, so the difference of
    /// the side integrals is unchanged.
    pub fn normalize_nonneg(&self) -> Result<SignedLimit> {
        let m = self.pos.step_at(0)?.min(&self.neg.step_at(0)?)?;
        let delta = m.integral();
        let shift = |part: &MonotoneLimit| -> MonotoneLimit {
            match part.as_constant() {
                Some(phi) => MonotoneLimit::from_step(phi.sub(&m).expect("same space")),
                None => {
                    let part = part.clone();
                    let m = m.clone();
                    MonotoneLimit::from_results(part.space().clone(), move |n| {
                        part.step_at(n)?.sub(&m)
                    })
                }
            }
        };
        SignedLimit::new(
            shift(&self.pos),
            shift(&self.neg),
            self.pos_estimate.shifted_down(&delta),
            self.neg_estimate.shifted_down(&delta),
        )
    }

    /// Exact nonnegativity evidence where it is decidable.
    pub fn nonneg_evidence(&self) -> NonnegEvidence {
        if let Some(step) = self.as_step() {
            return match step.negative_witness() {
                None => NonnegEvidence::ExactNonneg,
                Some(cell) => NonnegEvidence::NegativeOn(cell.clone()),
            };
        }
        NonnegEvidence::Asserted
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NonnegEvidence {
    /// Step-backed and verified nonnegative a.e., exactly.
    ExactNonneg,
    /// Step-backed and provably negative on this positive-measure cell.
    NegativeOn(Cell),
    /// Not step-backed; nonnegativity is the caller's declaration.
    Asserted,
}

/// Sum of two side claims; side claims are never -inf, so the sum is total.
fn claim_sum(a: &IntegralEstimate, b: &IntegralEstimate) -> Option<ExtendedRational> {
    match (a.value().known(), b.value().known()) {
        (Some(x), Some(y)) => x.add(y).ok(),
        _ => None,
    }
}

/// Re-evaluates a scaled part, carrying a scaled claim or structural bound
/// from the original estimate when the fresh scan resolves nothing.
fn carry_scaled_claim(
    part: &MonotoneLimit,
    original: &IntegralEstimate,
    c: &Rational,
    params: &EvalParams,
) -> Result<IntegralEstimate> {
    let est = part.estimate(params)?;
    if est.value().known().is_some() {
        return Ok(est);
    }
    if let Some(v) = original.value().known() {
        return est.declare(v.mul(&Finite(c.clone())));
    }
    if let Some(b) = &original.bounded_above {
        return est.with_structural_bound(b * c);
    }
    Ok(est)
}

/// Estimate for a part combined termwise from two others. The value combiner
/// reflects that limits of termwise sums of monotone streams are the sums of
/// the limits.
fn combined_estimate(
    part: &MonotoneLimit,
    a: &IntegralEstimate,
    b: &IntegralEstimate,
    params: &EvalParams,
    combine: impl Fn(&ExtendedRational, &ExtendedRational) -> Option<ExtendedRational>,
) -> Result<IntegralEstimate> {
    let est = part.estimate(params)?;
    if est.value().known().is_some() {
        return Ok(est);
    }
    match (a.value().known(), b.value().known()) {
        (Some(va), Some(vb)) => match combine(va, vb) {
            Some(v) => est.declare(v),
            None => Ok(est),
        },
        _ => Ok(est),
    }
}

/// Certificate that a signed limit has a finite integral (the class L1).
#[derive(Clone)]
pub struct L1Certificate {
    func: SignedLimit,
}

impl L1Certificate {
    pub fn func(&self) -> &SignedLimit {
        &self.func
    }

    pub fn integral(&self) -> IntegralValue {
        self.func.integral()
    }

    /// The finite integral both sides certify. Fails when a side's
    /// finiteness rests on a structural bound without a value.
    pub fn integral_rational(&self) -> Result<Rational> {
        match self.integral().known() {
            Some(Finite(r)) => Ok(r.clone()),
            _ => Err(Error::Unresolved),
        }
    }
}

/// Accepts exactly the signed limits with both sides certified finite.
pub fn l1_certify(f: SignedLimit) -> Result<L1Certificate> {
    if f.finite_side() != FiniteSide::Both {
        return Err(Error::precondition(
            "integral is not certified finite on both sides",
        ));
    }
    Ok(L1Certificate { func: f })
}

/// The L1 norm: integral of |f| = max{f, -f}. Exact for step-backed
/// functions; otherwise it inherits the evidence quality of the parts.
pub fn l1_norm(f: &L1Certificate, params: &EvalParams) -> Result<IntegralValue> {
    Ok(f.func.abs(params)?.integral())
}

/// Everything the monotone-convergence harness observed.
#[derive(Clone, Debug)]
pub struct BeppoLeviReport {
    /// Index of the first term integrating above -inf; earlier terms are
    /// skipped, as the construction allows.
    pub start_index: usize,
    /// Integral claims of the examined terms, in order from `start_index`.
    pub ladder: Vec<IntegralValue>,
    /// Gap between each finite negative part and its chosen step minorant;
    /// entry j is strictly below 2^-(j+1).
    pub minorant_gaps: Vec<Rational>,
    /// Cumulative remainder integrals; every entry stays at or below 1.
    pub remainder_partials: Vec<Rational>,
    /// True when consecutive-term monotonicity was verified exactly at step
    /// level for every examined pair (otherwise it is caller-asserted and
    /// only the integral ladder was checked).
    pub pointwise_verified: bool,
    pub declared: Option<ExtendedRational>,
    /// Distance from the declared limit to the last known ladder value.
    pub declared_gap: Option<Rational>,
}

/// Generalized monotone-convergence harness.
///
/// Takes a non-decreasing sequence of signed limits of which at least one
/// integrates above -inf, executes the 2^-n minorant renormalization, and
/// returns the limit as a signed limit together with the evidence report.
/// Sequences with every term at -inf are rejected.
pub fn beppo_levi(
    terms: impl Fn(usize) -> Result<SignedLimit> + Send + Sync + 'static,
    horizon: usize,
    declared: Option<ExtendedRational>,
    params: &EvalParams,
) -> Result<(SignedLimit, BeppoLeviReport)> {
    let horizon = horizon.max(1);
    let terms: Stream<Result<SignedLimit>> = Stream::new(terms);
    let term_at = |n: usize| -> Result<SignedLimit> { terms.get(n) };

    // the construction may drop finitely many initial -inf terms
    let mut start = None;
    for n in 0..horizon {
        if term_at(n)?.neg_estimate().is_certified_finite() {
            start = Some(n);
            break;
        }
    }
    let Some(start) = start else {
        return Err(Error::AllTermsMinusInfinite);
    };
    let space = term_at(start)?.space().clone();

    // prefix verification and evidence gathering
    let mut ladder = Vec::new();
    let mut minorant_gaps: Vec<Rational> = Vec::new();
    let mut remainder_partials = Vec::new();
    let mut pointwise_verified = true;
    let mut cumulative = Rational::zero();
    let mut prev: Option<SignedLimit> = None;
    for n in start..horizon {
        let f = term_at(n)?;
        if f.space() != &space {
            return Err(Error::precondition("terms change space mid-sequence"));
        }
        if let Some(p) = &prev {
            match (p.as_step(), f.as_step()) {
                (Some(a), Some(b)) => {
                    if let Some(cell) = a.gt_witness(&b) {
                        return Err(Error::NotMonotone {
                            index: n,
                            witness: cell,
                        });
                    }
                }
                _ => {
                    pointwise_verified = false;
                    if let (Some(va), Some(vb)) = (p.integral().known(), f.integral().known()) {
                        if vb < va {
                            return Err(Error::precondition(format!(
                                "term integrals decrease at index {n}: {vb} < {va}"
                            )));
                        }
                    }
                }
            }
        }
        let value = f.integral();
        if let Some(d) = &declared {
            if let Some(v) = value.known() {
                if v > d {
                    return Err(Error::BadDeclaration {
                        declared: d.to_string(),
                        partial: v.to_string(),
                    });
                }
            }
        }
        let j = ladder.len();
        let (_, gap) = pick_minorant(&f, j, params)?;
        cumulative += &gap;
        minorant_gaps.push(gap);
        remainder_partials.push(cumulative.clone());
        ladder.push(value);
        prev = Some(f);
    }
    debug_assert!(remainder_partials.iter().all(|r| *r <= Rational::one()));

    // remainder part h'_j: the tail of the j-th negative part past its
    // minorant, so every element is nonnegative and the integral is the
    // recorded gap; g'_j subtracts the same minorant from the positive part
    let params_h = params.clone();
    let terms_h = terms.clone();
    let remainder_stream: Stream<Result<MonotoneLimit>> =
        Stream::new(move |j: usize| -> Result<MonotoneLimit> {
            let f = terms_h.get(start + j)?;
            let (at, _) = pick_minorant(&f, j, &params_h)?;
            let phi = f.neg().step_at(at)?;
            let neg = f.neg().clone();
            Ok(MonotoneLimit::from_results(f.space().clone(), move |i| {
                neg.step_at(at + i)?.sub(&phi)
            }))
        });
    let remainder: Arc<dyn Fn(usize) -> Result<MonotoneLimit> + Send + Sync> = {
        let s = remainder_stream.clone();
        Arc::new(move |j| s.get(j))
    };
    let params_g = params.clone();
    let terms_g = terms.clone();
    let shifted_stream: Stream<Result<MonotoneLimit>> =
        Stream::new(move |j: usize| -> Result<MonotoneLimit> {
            let f = terms_g.get(start + j)?;
            let (at, _) = pick_minorant(&f, j, &params_g)?;
            let phi = f.neg().step_at(at)?;
            let pos = f.pos().clone();
            Ok(MonotoneLimit::from_results(f.space().clone(), move |i| {
                pos.step_at(i)?.sub(&phi)
            }))
        });
    let shifted_pos: Arc<dyn Fn(usize) -> Result<MonotoneLimit> + Send + Sync> = {
        let s = shifted_stream.clone();
        Arc::new(move |j| s.get(j))
    };

    let h_seq = accumulate(Arc::clone(&remainder), Arc::clone(&remainder));
    let g_seq = accumulate(Arc::clone(&remainder), shifted_pos);
    let h_limit = MonotoneLimit::sup_of_stream_unchecked(h_seq, space.clone());
    let g_limit = MonotoneLimit::sup_of_stream_unchecked(g_seq, space.clone());

    let h_estimate = h_limit
        .estimate(params)?
        .with_structural_bound(Rational::one())?;
    let g_estimate = g_limit.estimate(params)?;
    let limit = SignedLimit::new(g_limit, h_limit, g_estimate, h_estimate)?;

    let declared_gap = declared.as_ref().and_then(|d| {
        let last = ladder.iter().rev().find_map(|v| v.known())?;
        match (d, last) {
            (Finite(a), Finite(b)) => Some((a - b).abs()),
            _ => None,
        }
    });

    Ok((
        limit,
        BeppoLeviReport {
            start_index: start,
            ladder,
            minorant_gaps,
            remainder_partials,
            pointwise_verified,
            declared,
            declared_gap,
        },
    ))
}

/// Finds a stream index whose step minorant of the negative part leaves a
/// remainder integral strictly below 2^-(j+1); returns it with the exact
/// remainder gap.
fn pick_minorant(f: &SignedLimit, j: usize, params: &EvalParams) -> Result<(usize, Rational)> {
    let target = match f.neg_estimate().value().known() {
        Some(Finite(v)) => v.clone(),
        other => {
            return Err(Error::precondition(format!(
                "term {j}: the negative part has no finite integral value \
                 to approximate (claim: {other:?})"
            )))
        }
    };
    let tolerance = Rational::dyadic(-(j as i64) - 1);
    // lazy evaluation can reach past the examined horizon, and the dyadic
    // budget tightens with j, so the scan depth grows with it
    let cap = params.budget.max(64).max(2 * j + 8);
    for m in 0..cap {
        let gap = &target - &f.neg().partial(m)?;
        if gap < tolerance {
            return Ok((m, gap));
        }
    }
    Err(Error::precondition(format!(
        "no step minorant within 2^-{} of the negative part's integral {target} \
         within budget {cap}; the declaration may be loose",
        j + 1
    )))
}

/// Accumulated monotone limits: element j is parts(0) + ... + parts(j-1) +
/// head(j). The running prefix sum is shared between elements, so evaluating
/// the whole family costs one termwise add per (element, index) pair. Relies
/// on the stream filling indices in order.
fn accumulate(
    parts: Arc<dyn Fn(usize) -> Result<MonotoneLimit> + Send + Sync>,
    head: Arc<dyn Fn(usize) -> Result<MonotoneLimit> + Send + Sync>,
) -> Stream<Result<MonotoneLimit>> {
    // the running prefix is shared state; any failure poisons it so later
    // elements cannot be built from a silently incomplete sum
    let mut running: Result<Option<MonotoneLimit>> = Ok(None);
    Stream::new(move |j: usize| -> Result<MonotoneLimit> {
        let prev = running.clone()?;
        let built = (|| -> Result<(MonotoneLimit, Option<MonotoneLimit>)> {
            let out = match &prev {
                None => head(j)?,
                Some(acc) => acc.add(&head(j)?)?,
            };
            let p = parts(j)?;
            let next = Some(match prev {
                None => p,
                Some(acc) => acc.add(&p)?,
            });
            Ok((out, next))
        })();
        match built {
            Ok((out, next)) => {
                running = Ok(next);
                Ok(out)
            }
            Err(e) => {
                running = Err(e.clone());
                Err(e)
            }
        }
    })
}

/// One row of Fatou evidence.
#[derive(Clone, Debug)]
pub struct FatouRow {
    pub index: usize,
    /// Integral of the pointwise min over the window [index, horizon].
    pub tail_min_integral: IntegralValue,
    /// Least term integral over the same window.
    pub tail_min_of_integrals: Rational,
    /// tail_min_integral <= tail_min_of_integrals, exactly.
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct FatouReport {
    pub rows: Vec<FatouRow>,
    /// False when a non-step-backed term left nonnegativity caller-asserted.
    pub nonneg_verified: bool,
    pub all_ok: bool,
}

/// Fatou evidence: builds the tail minima h_n = min over [n, horizon] of the
/// terms and certifies integral(h_n) <= min tail integral at every index.
pub fn fatou_report(
    terms: impl Fn(usize) -> Result<L1Certificate>,
    horizon: usize,
    params: &EvalParams,
) -> Result<FatouReport> {
    let mut fs = Vec::with_capacity(horizon + 1);
    let mut nonneg_verified = true;
    for n in 0..=horizon {
        let f = terms(n)?;
        match f.func().nonneg_evidence() {
            NonnegEvidence::ExactNonneg => {}
            NonnegEvidence::NegativeOn(cell) => {
                return Err(Error::NegativityWitness {
                    index: n,
                    witness: cell,
                });
            }
            NonnegEvidence::Asserted => nonneg_verified = false,
        }
        fs.push(f);
    }

    // suffix minima: each row costs one lattice operation
    let mut tail_min: Vec<SignedLimit> = Vec::with_capacity(horizon + 1);
    tail_min.push(fs[horizon].func().clone());
    for n in (0..horizon).rev() {
        let next = tail_min.last().expect("nonempty");
        tail_min.push(fs[n].func().min(next, params)?);
    }
    tail_min.reverse();

    let mut rows = Vec::with_capacity(horizon + 1);
    let mut all_ok = true;
    let mut suffix_min: Option<Rational> = None;
    for n in (0..=horizon).rev() {
        let v = fs[n].integral_rational()?;
        suffix_min = Some(match suffix_min.take() {
            None => v,
            Some(m) => m.min(v),
        });
        let m = suffix_min.clone().expect("set above");
        let h = tail_min[n].integral();
        let ok = match h.known() {
            Some(hv) => *hv <= Finite(m.clone()),
            None => false,
        };
        rows.push(FatouRow {
            index: n,
            tail_min_integral: h,
            tail_min_of_integrals: m,
            ok,
        });
        all_ok &= ok;
    }
    rows.reverse();
    Ok(FatouReport {
        rows,
        nonneg_verified,
        all_ok,
    })
}

#[derive(Clone, Debug)]
pub struct SqueezeRow {
    pub index: usize,
    /// Integral of the pointwise inf over the tail window.
    pub lower_envelope: Rational,
    pub min_tail_integral: Rational,
    pub max_tail_integral: Rational,
    /// Integral of the pointwise sup over the tail window.
    pub upper_envelope: Rational,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct DominatedReport {
    /// True when |f_n| <= g was verified exactly at step level on the prefix.
    pub domination_verified: bool,
    pub fatou_minus: FatouReport,
    pub fatou_plus: FatouReport,
    pub squeeze: Vec<SqueezeRow>,
    pub all_ok: bool,
}

/// Dominated-convergence evidence: verifies |f_n| <= g on the prefix, applies
/// the Fatou checker to g - f_n and g + f_n, and reports the envelope squeeze
/// around the term integrals at every index.
pub fn dominated_report(
    terms: impl Fn(usize) -> Result<L1Certificate>,
    bound: &L1Certificate,
    horizon: usize,
    params: &EvalParams,
) -> Result<DominatedReport> {
    let g = bound.func();
    let mut fs = Vec::with_capacity(horizon + 1);
    let mut domination_verified = true;
    for n in 0..=horizon {
        let f = terms(n)?;
        match (f.func().as_step(), g.as_step()) {
            (Some(step), Some(gstep)) => {
                for diff in [gstep.sub(&step)?, gstep.add(&step)?] {
                    if let Some(cell) = diff.negative_witness() {
                        return Err(Error::DominationViolation {
                            index: n,
                            witness: cell.clone(),
                        });
                    }
                }
            }
            _ => domination_verified = false,
        }
        fs.push(f);
    }

    let minus = |n: usize| -> Result<L1Certificate> { l1_certify(g.sub(fs[n].func(), params)?) };
    let plus = |n: usize| -> Result<L1Certificate> { l1_certify(g.add(fs[n].func(), params)?) };
    let fatou_minus = fatou_report(minus, horizon, params)?;
    let fatou_plus = fatou_report(plus, horizon, params)?;

    let g_int = bound.integral_rational()?;
    let mut squeeze = Vec::with_capacity(horizon + 1);
    let mut all_ok = fatou_minus.all_ok && fatou_plus.all_ok;
    for n in 0..=horizon {
        // inf tail of f_k is inf tail (g + f_k) minus g, and the sup tail is
        // g minus inf tail (g - f_k), both exactly, since g is common
        let lower_envelope = match fatou_plus.rows[n].tail_min_integral.known() {
            Some(Finite(v)) => v - &g_int,
            _ => return Err(Error::Unresolved),
        };
        let upper_envelope = match fatou_minus.rows[n].tail_min_integral.known() {
            Some(Finite(v)) => &g_int - v,
            _ => return Err(Error::Unresolved),
        };
        let mut min_tail: Option<Rational> = None;
        let mut max_tail: Option<Rational> = None;
        for f in &fs[n..=horizon] {
            let v = f.integral_rational()?;
            min_tail = Some(min_tail.map_or(v.clone(), |m| m.min(v.clone())));
            max_tail = Some(max_tail.map_or(v.clone(), |m| m.max(v)));
        }
        let min_tail = min_tail.expect("window nonempty");
        let max_tail = max_tail.expect("window nonempty");
        let ok = lower_envelope <= min_tail && max_tail <= upper_envelope;
        all_ok &= ok;
        squeeze.push(SqueezeRow {
            index: n,
            lower_envelope,
            min_tail_integral: min_tail,
            max_tail_integral: max_tail,
            upper_envelope,
            ok,
        });
    }

    Ok(DominatedReport {
        domination_verified,
        fatou_minus,
        fatou_plus,
        squeeze,
        all_ok,
    })
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::numeric::rat;
    use rand::SeedableRng;

    fn line() -> MeasureSpace {
        MeasureSpace::IntervalLine
    }

    #[test]
    fn signed_integrals_are_linear_and_monotone() {
        let p = EvalParams::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
        let known = |f: &SignedLimit| match f.integral().known() {
            Some(Finite(r)) => r.clone(),
            other => panic!("step-backed integral must be finite, got {other:?}"),
        };
        for _ in 0..120 {
            let a = crate::gen::step(&mut rng, &line(), 4);
            let b = crate::gen::step(&mut rng, &line(), 4);
            let c = crate::gen::rational(&mut rng, 5);
            let f = SignedLimit::from_step(a.clone());
            let g = SignedLimit::from_step(b.clone());
            // additivity and homogeneity, exactly
            assert_eq!(known(&f.add(&g, &p).unwrap()), known(&f) + known(&g));
            assert_eq!(known(&f.scale(&c, &p).unwrap()), &c * &known(&f));
            // monotonicity: f <= f + |g| pointwise
            let larger = SignedLimit::from_step(a.add(&b.abs()).unwrap());
            assert!(known(&f) <= known(&larger));
            // min + max = f + g, witnessed on the step representatives
            let mn = f.min(&g, &p).unwrap().as_step().unwrap();
            let mx = f.max(&g, &p).unwrap().as_step().unwrap();
            assert_eq!(mn.add(&mx).unwrap(), a.add(&b).unwrap());
        }
    }

    #[test]
    fn integrable_tails_respect_the_level_bound() {
        // for f in L1 with |f| integrating to A, the set where |f| exceeds
        // A/eps has measure at most eps
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(56);
        for _ in 0..80 {
            let f = crate::gen::step(&mut rng, &line(), 4).abs();
            let total = f.integral();
            if total.is_zero() {
                continue;
            }
            for eps in [rat(1, 2), rat(1, 10), rat(1, 100)] {
                let level = &total / &eps;
                let (_, mass) = crate::step::markov_level_bound(&f, &level).unwrap();
                assert!(mass <= eps);
            }
        }
    }
}
