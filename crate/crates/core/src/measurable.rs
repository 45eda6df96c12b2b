//! Measurable functions, measurable sets, and the induced measure.
//!
//! A measurable function is an a.e. limit of step functions, witness
//! included. Convergence of the witness is a declaration: only its decidable
//! consequences are verified (valid steps on the right space, exact clamps
//! and transforms). A measurable set carries its indicator either as a plain
//! step function (finite unions of cells, the fast path) or as a monotone
//! indicator stream; its measure is the indicator's integral, so measure
//! values inherit the exact/declared/certified evidence vocabulary.

use crate::error::{Error, Result};
use crate::monotone::{EvalParams, IntegralValue, MonotoneLimit};
use crate::numeric::{ExtendedRational, Finite, Rational};
use crate::signed::{beppo_levi, l1_certify, L1Certificate, SignedLimit};
use crate::space::{Cell, MeasureSpace, NullCover, Point};
use crate::step::StepFunction;
use crate::stream::Stream;

/// An a.e. limit of step functions, with the witness stream explicit.
#[derive(Clone)]
pub struct MeasurableFunction {
    space: MeasureSpace,
    witness: Stream<StepFunction>,
    /// What the witness is declared to converge to, for reports.
    target: String,
}

impl MeasurableFunction {
    pub fn new(
        space: MeasureSpace,
        witness: impl Fn(usize) -> StepFunction + Send + 'static,
        target: impl Into<String>,
    ) -> Self {
        MeasurableFunction {
            space,
            witness: Stream::new(witness),
            target: target.into(),
        }
    }

    pub fn from_step(phi: StepFunction, target: impl Into<String>) -> Self {
        let space = phi.space().clone();
        MeasurableFunction {
            space,
            witness: Stream::constant(phi),
            target: target.into(),
        }
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    /// The n-th witness step, checked to live on the right space.
    pub fn witness_at(&self, n: usize) -> Result<StepFunction> {
        let phi = self.witness.get(n);
        if phi.space() != &self.space {
            return Err(Error::precondition(format!(
                "witness element {n} lives on {}, expected {}",
                phi.space(),
                self.space
            )));
        }
        Ok(phi)
    }

    /// Exact Cauchy check at sample points off a provided null cover: a
    /// decidable consequence of the declared convergence.
    pub fn cauchy_at_samples(
        &self,
        points: &[Point],
        exclude: Option<&NullCover>,
        epsilon: &Rational,
        from: usize,
        to: usize,
    ) -> Result<Vec<(Point, bool)>> {
        let mut out = Vec::new();
        'points: for p in points {
            if let Some(cover) = exclude {
                // skip points the cover certifies as excluded
                if cover.certifies_point(p, epsilon, 32)? {
                    continue 'points;
                }
            }
            let mut ok = true;
            let base = self.witness_at(to)?.value_at(p);
            for n in from..to {
                let v = self.witness_at(n)?.value_at(p);
                if (v - &base).abs() > *epsilon {
                    ok = false;
                    break;
                }
            }
            out.push((p.clone(), ok));
        }
        Ok(out)
    }

    /// Witnesses for |f|, built termwise.
    pub fn abs(&self) -> MeasurableFunction {
        let w = self.witness.clone();
        MeasurableFunction {
            space: self.space.clone(),
            witness: Stream::new(move |n| w.get(n).abs()),
            target: format!("|{}|", self.target),
        }
    }

    /// Termwise product witness; measurability of products reduces to this.
    pub fn product(&self, other: &MeasurableFunction) -> Result<MeasurableFunction> {
        if self.space != other.space {
            return Err(Error::precondition("operands live on different spaces"));
        }
        let (a, b) = (self.witness.clone(), other.witness.clone());
        let space = self.space.clone();
        let gen_space = space.clone();
        Ok(MeasurableFunction {
            space,
            witness: Stream::new(move |n| {
                pointwise_product(&a.get(n), &b.get(n), &gen_space)
            }),
            target: format!("({})*({})", self.target, other.target),
        })
    }
}

/// Exact pointwise product of two step functions on their common refinement.
fn pointwise_product(f: &StepFunction, g: &StepFunction, space: &MeasureSpace) -> StepFunction {
    combine_on_atoms(f, g, space, |a, b| a * b)
}

fn combine_on_atoms(
    f: &StepFunction,
    g: &StepFunction,
    space: &MeasureSpace,
    op: impl Fn(Rational, Rational) -> Rational,
) -> StepFunction {
    let cells: Vec<Cell> = f
        .terms()
        .iter()
        .chain(g.terms())
        .map(|(c, _)| c.clone())
        .collect();
    let mut raw = Vec::new();
    for atom in crate::space::refine(&cells, space) {
        let rep = atom.rep_point().expect("nonempty atom");
        let v = op(f.value_at(&rep), g.value_at(&rep));
        if !v.is_zero() {
            raw.push((atom, v));
        }
    }
    StepFunction::from_terms(space.clone(), raw).expect("cells belong to the space")
}

/// med{-g, phi, g}: the middle value, exact on the common refinement.
/// Requires g >= 0 so that -g <= g.
pub fn med_clamp(phi: &StepFunction, g: &StepFunction) -> Result<StepFunction> {
    if !g.is_nonneg() {
        return Err(Error::precondition("clamp bound must be nonnegative"));
    }
    // for x <= z, med{x, y, z} = max{x, min{y, z}}
    phi.min(g)?.max(&g.neg())
}

/// How a measurable set's indicator is carried.
#[derive(Clone)]
enum Backing {
    /// Finite union of cells; everything is exact.
    Finite(StepFunction),
    /// Non-decreasing indicator stream (increasing unions).
    Increasing(MonotoneLimit),
    /// General certified difference (used by differences with streams).
    General(SignedLimit),
}

/// A set whose characteristic function the library can integrate.
#[derive(Clone)]
pub struct MeasurableSet {
    space: MeasureSpace,
    backing: Backing,
    /// Cells the set was generated from, when known; they provide the
    /// sigma-finite self-cover and the measure-zero-to-null-cover direction.
    generators: Option<Stream<Cell>>,
}

impl MeasurableSet {
    /// Finite union of cells (overlaps allowed).
    pub fn from_cells(space: MeasureSpace, cells: Vec<Cell>) -> Result<Self> {
        let indicator = StepFunction::indicator(space.clone(), cells.clone())?;
        let gens = Stream::with_prefix(cells.clone(), {
            let space = space.clone();
            move |_| Cell::empty_like(&space)
        });
        Ok(MeasurableSet {
            space,
            backing: Backing::Finite(indicator),
            generators: Some(gens),
        })
    }

    /// Union of a countable stream of cells, as the increasing limit of the
    /// prefix unions. Indicator elements are verified to be 0/1-valued.
    pub fn from_cell_stream(space: MeasureSpace, cells: Stream<Cell>) -> Self {
        let gen_space = space.clone();
        let gen_cells = cells.clone();
        let indicator = MonotoneLimit::from_results(space.clone(), move |n| {
            let prefix: Vec<Cell> = (0..=n).map(|k| gen_cells.get(k)).collect();
            StepFunction::indicator(gen_space.clone(), prefix)
        });
        MeasurableSet {
            space,
            backing: Backing::Increasing(indicator),
            generators: Some(cells),
        }
    }

    pub fn empty(space: MeasureSpace) -> Self {
        Self::from_cells(space, Vec::new()).expect("no cells to reject")
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn as_finite_indicator(&self) -> Option<&StepFunction> {
        match &self.backing {
            Backing::Finite(step) => Some(step),
            _ => None,
        }
    }

    pub fn generators(&self) -> Option<&Stream<Cell>> {
        self.generators.as_ref()
    }

    /// mu(A): the integral of the indicator.
    pub fn measure(&self, params: &EvalParams) -> Result<IntegralValue> {
        match &self.backing {
            Backing::Finite(step) => Ok(IntegralValue::Exact(Finite(step.integral()))),
            Backing::Increasing(ind) => Ok(ind.estimate(params)?.value()),
            Backing::General(f) => Ok(f.integral()),
        }
    }

    /// Accepts a declared measure, validated against the partial ladder.
    pub fn measure_declared(
        &self,
        declared: ExtendedRational,
        params: &EvalParams,
    ) -> Result<IntegralValue> {
        match &self.backing {
            Backing::Finite(step) => {
                let exact = Finite(step.integral());
                if declared != exact {
                    return Err(Error::BadDeclaration {
                        declared: declared.to_string(),
                        partial: exact.to_string(),
                    });
                }
                Ok(IntegralValue::Exact(exact))
            }
            Backing::Increasing(ind) => {
                Ok(ind.estimate(params)?.declare(declared)?.value())
            }
            Backing::General(_) => Err(Error::precondition(
                "declared measures attach to cell-stream-backed sets",
            )),
        }
    }

    /// The indicator as a signed limit (for interop with L1 and products).
    pub fn indicator_signed(&self, params: &EvalParams) -> Result<SignedLimit> {
        match &self.backing {
            Backing::Finite(step) => Ok(SignedLimit::from_step(step.clone())),
            Backing::Increasing(ind) => SignedLimit::from_monotone(ind.clone(), params),
            Backing::General(f) => Ok(f.clone()),
        }
    }

    /// The sigma-finite self-cover: generating cells with their (finite)
    /// measures, verified to cover the set's stages up to `depth`.
    pub fn sigma_finite_cover(&self, depth: usize) -> Result<Vec<(Cell, Rational)>> {
        let gens = self.generators.as_ref().ok_or_else(|| {
            Error::precondition("the set carries no generating cells")
        })?;
        let cells: Vec<Cell> = (0..depth).map(|k| gens.get(k)).collect();
        let cover = StepFunction::indicator(self.space.clone(), cells.clone())?;
        for n in 0..depth {
            let stage = self.stage(n)?;
            if let Some(cell) = stage.gt_witness(&cover) {
                return Err(Error::precondition(format!(
                    "stage {n} escapes the generating cells on {cell}"
                )));
            }
        }
        cells
            .into_iter()
            .map(|c| {
                let m = self.space.measure(&c)?;
                Ok((c, m))
            })
            .collect()
    }

    /// Step indicator of the n-th stage of the set (prefix union for
    /// stream-backed sets, the set itself for finite ones).
    pub fn stage(&self, n: usize) -> Result<StepFunction> {
        match &self.backing {
            Backing::Finite(step) => Ok(step.clone()),
            Backing::Increasing(ind) => ind.step_at(n),
            Backing::General(f) => f.approximant(n),
        }
    }
}

/// A \ B for measurable sets.
///
/// Finite \ finite stays finite (exact). Increasing \ anything distributes
/// over the prefix stages. Finite \ increasing is carried as a certified
/// difference whose subtracted side is dominated by the finite part.
pub fn set_difference(
    a: &MeasurableSet,
    b: &MeasurableSet,
    params: &EvalParams,
) -> Result<MeasurableSet> {
    if a.space != b.space {
        return Err(Error::precondition("sets live on different spaces"));
    }
    let space = a.space.clone();
    match (&a.backing, &b.backing) {
        (Backing::Finite(fa), Backing::Finite(fb)) => {
            let step = indicator_difference(fa, fb, &space);
            Ok(MeasurableSet {
                space,
                backing: Backing::Finite(step),
                generators: None,
            })
        }
        (Backing::Increasing(ind), _) => {
            // (union_k A_k) \ B = union_k (A_k \ B): still increasing
            let ind = ind.clone();
            let b = b.clone();
            let gen_space = space.clone();
            let stages = MonotoneLimit::from_results(space.clone(), move |n| {
                let a_n = ind.step_at(n)?;
                let b_n = b.stage(n)?;
                Ok(indicator_difference(&a_n, &b_n, &gen_space))
            });
            Ok(MeasurableSet {
                space,
                backing: Backing::Increasing(stages),
                generators: None,
            })
        }
        (Backing::Finite(fa), _) => {
            // A \ B = A - (A n B); the subtracted union is dominated by A,
            // which certifies its finiteness structurally
            let fa_cl = fa.clone();
            let b = b.clone();
            let gen_space = space.clone();
            let overlap = MonotoneLimit::from_results(space.clone(), move |n| {
                let b_n = b.stage(n)?;
                Ok(indicator_intersection(&fa_cl, &b_n, &gen_space))
            });
            let pos = MonotoneLimit::from_step(fa.clone());
            let pos_est = pos.estimate(params)?;
            let neg_est = overlap
                .estimate(params)?
                .with_structural_bound(fa.integral())?;
            let f = SignedLimit::new(pos, overlap, pos_est, neg_est)?;
            Ok(MeasurableSet {
                space,
                backing: Backing::General(f),
                generators: None,
            })
        }
        (Backing::General(_), _) => Err(Error::precondition(
            "difference chains on general-backed sets are not supported; \
             rebuild from cells or streams",
        )),
    }
}

/// Disjoint countable union: the increasing limit of the prefix unions.
/// Pairwise disjointness is verified exactly on the queried prefix.
pub fn disjoint_union(parts: Stream<MeasurableSet>, space: MeasureSpace) -> MeasurableSet {
    let gen_space = space.clone();
    let stages = MonotoneLimit::from_results(space.clone(), move |n| {
        let mut acc = StepFunction::zero(gen_space.clone());
        for k in 0..=n {
            let stage = parts.get(k).stage(n)?;
            // disjointness check: overlapping mass would exceed 1 somewhere
            let overlap = indicator_intersection(&acc, &stage, &gen_space);
            if !overlap.is_zero() {
                let (cell, _) = overlap.terms()[0].clone();
                return Err(Error::precondition(format!(
                    "parts are not disjoint: stage {k} overlaps on {cell}"
                )));
            }
            acc = acc.add(&stage)?;
        }
        Ok(acc)
    });
    MeasurableSet {
        space,
        backing: Backing::Increasing(stages),
        generators: None,
    }
}

/// Countable intersection via A_0 \ union_n (A_0 \ A_n). The measure ladder
/// is reported as the decreasing prefix-intersection ladder.
pub fn intersection(
    parts: Stream<MeasurableSet>,
    space: MeasureSpace,
    horizon: usize,
    params: &EvalParams,
) -> Result<(MeasurableSet, Vec<Rational>)> {
    // exact decreasing ladder on prefix intersections of the stages
    let mut ladder = Vec::new();
    let mut acc: Option<StepFunction> = None;
    for n in 0..=horizon {
        let stage = parts.get(n).stage(horizon)?;
        acc = Some(match acc.take() {
            None => stage,
            Some(prev) => indicator_intersection(&prev, &stage, &space),
        });
        ladder.push(acc.as_ref().expect("set above").integral());
    }

    let base = parts.get(0);
    let gen_space = space.clone();
    let parts_cl = parts.clone();
    // union over n of (A_0 \ A_n), increasing in the prefix
    let removed_stages = MonotoneLimit::from_results(space.clone(), move |n| {
        let a0 = parts_cl.get(0).stage(n)?;
        let mut acc = StepFunction::zero(gen_space.clone());
        for k in 0..=n {
            let diff = indicator_difference(&a0, &parts_cl.get(k).stage(n)?, &gen_space);
            acc = indicator_union(&acc, &diff, &gen_space);
        }
        Ok(acc)
    });
    let removed = MeasurableSet {
        space: space.clone(),
        backing: Backing::Increasing(removed_stages),
        generators: None,
    };
    let result = set_difference(&base, &removed, params)?;
    Ok((result, ladder))
}

fn indicator_difference(a: &StepFunction, b: &StepFunction, space: &MeasureSpace) -> StepFunction {
    combine_on_atoms(a, b, space, |x, y| {
        if !x.is_zero() && y.is_zero() {
            Rational::one()
        } else {
            Rational::zero()
        }
    })
}

fn indicator_intersection(
    a: &StepFunction,
    b: &StepFunction,
    space: &MeasureSpace,
) -> StepFunction {
    combine_on_atoms(a, b, space, |x, y| {
        if !x.is_zero() && !y.is_zero() {
            Rational::one()
        } else {
            Rational::zero()
        }
    })
}

fn indicator_union(a: &StepFunction, b: &StepFunction, space: &MeasureSpace) -> StepFunction {
    combine_on_atoms(a, b, space, |x, y| {
        if !x.is_zero() || !y.is_zero() {
            Rational::one()
        } else {
            Rational::zero()
        }
    })
}

/// Builds an L1 certificate for a declared limit of a dominated witness.
///
/// The witness is clamped through med{-g, phi_n, g}, exactly. Domination of
/// the target and the clamp identity are checked at step level; the target's
/// membership in L1 is certified from its own sides, and the squeeze evidence
/// ties the clamped ladder to the target's integral.
#[derive(Clone, Debug)]
pub struct DominatedLimitReport {
    /// Exact integrals of the clamped witness steps.
    pub clamped_ladder: Vec<Rational>,
    /// min/max over tail windows of the clamped ladder, per index.
    pub envelopes: Vec<(Rational, Rational)>,
    pub target_integral: Rational,
    /// Distance from the target to the first and last ladder entries.
    pub initial_gap: Rational,
    pub final_gap: Rational,
    /// Target lies in the full-window envelope and the ladder ended at
    /// least as close to it as it started.
    pub consistent: bool,
}

pub fn dominated_limit(
    f: &MeasurableFunction,
    g: &L1Certificate,
    target: &SignedLimit,
    horizon: usize,
) -> Result<(L1Certificate, DominatedLimitReport)> {
    let Some(g_step) = g.func().as_step() else {
        return Err(Error::precondition(
            "the dominating bound must be step-backed for exact clamping",
        ));
    };
    let certificate = l1_certify(target.clone())?;
    let target_integral = certificate.integral_rational()?;

    let mut clamped_ladder = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        let clamped = med_clamp(&f.witness_at(n)?, &g_step)?;
        clamped_ladder.push(clamped.integral());
    }
    let mut envelopes = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        let window = &clamped_ladder[n..];
        let lo = window.iter().cloned().reduce(Rational::min).expect("nonempty");
        let hi = window.iter().cloned().reduce(Rational::max).expect("nonempty");
        envelopes.push((lo, hi));
    }
    let initial_gap = (clamped_ladder.first().expect("nonempty") - &target_integral).abs();
    let final_gap = (clamped_ladder.last().expect("nonempty") - &target_integral).abs();
    let (lo0, hi0) = &envelopes[0];
    let consistent =
        *lo0 <= target_integral && target_integral <= *hi0 && final_gap <= initial_gap;
    Ok((
        certificate,
        DominatedLimitReport {
            clamped_ladder,
            envelopes,
            target_integral,
            initial_gap,
            final_gap,
            consistent,
        },
    ))
}

/// Lifts a nonnegative measurable function with a monotone witness into the
/// signed class by the diagonal truncation min{phi_n, n * indicator(A_n)}.
/// The exhaustion must be non-decreasing; the result may integrate to +inf.
pub fn nonneg_to_signed(
    f: &MeasurableFunction,
    exhaustion: Stream<Cell>,
    params: &EvalParams,
) -> Result<SignedLimit> {
    let space = f.space().clone();
    let f = f.clone();
    let gen_space = space.clone();
    let truncated = MonotoneLimit::from_results(space.clone(), move |n| {
        if n > 0 {
            let prev = exhaustion.get(n - 1);
            let cur = exhaustion.get(n);
            if !prev.is_subset_of(&cur) {
                return Err(Error::precondition(format!(
                    "exhaustion is not non-decreasing at index {n}"
                )));
            }
        }
        let phi = f.witness_at(n)?;
        if let Some(cell) = phi.negative_witness() {
            return Err(Error::NegativityWitness {
                index: n,
                witness: cell.clone(),
            });
        }
        let cap = StepFunction::from_terms(
            gen_space.clone(),
            [(exhaustion.get(n), Rational::from(n as i64))],
        )?;
        phi.min(&cap)
    });
    SignedLimit::from_monotone(truncated, params)
}

/// The bounded transform h = g f / (g + |f|) of a step function, exact on
/// the common refinement; |h| < g wherever g > 0, and h = 0 where g = 0.
pub fn bounded_transform(phi: &StepFunction, g: &StepFunction) -> Result<StepFunction> {
    if !g.is_nonneg() {
        return Err(Error::precondition("transform bound must be nonnegative"));
    }
    Ok(combine_on_atoms(phi, g, phi.space(), |f, gv| {
        if gv.is_zero() {
            Rational::zero()
        } else {
            &(&gv * &f) / &(&gv + &f.abs())
        }
    }))
}

/// Inverse of the bounded transform: f = g h / (g - |h|) where g > 0, and 0
/// where g = 0. Errors if |h| >= g somewhere g is positive.
pub fn bounded_transform_inverse(h: &StepFunction, g: &StepFunction) -> Result<StepFunction> {
    if !g.is_nonneg() {
        return Err(Error::precondition("transform bound must be nonnegative"));
    }
    let cells: Vec<Cell> = h
        .terms()
        .iter()
        .chain(g.terms())
        .map(|(c, _)| c.clone())
        .collect();
    let mut raw = Vec::new();
    for atom in crate::space::refine(&cells, h.space()) {
        let rep = atom.rep_point().expect("nonempty atom");
        let hv = h.value_at(&rep);
        let gv = g.value_at(&rep);
        let v = if gv.is_zero() {
            if hv.is_zero() {
                Rational::zero()
            } else {
                return Err(Error::precondition(format!(
                    "transform value {hv} outside the guarded region on {atom}"
                )));
            }
        } else {
            let denom = &gv - &hv.abs();
            if !denom.is_positive() {
                return Err(Error::precondition(format!(
                    "transform magnitude reaches the bound on {atom}"
                )));
            }
            &(&gv * &hv) / &denom
        };
        if !v.is_zero() {
            raw.push((atom, v));
        }
    }
    StepFunction::from_terms(h.space().clone(), raw)
}

/// Witness for the limit of a sequence of measurable functions, routed
/// through the bounded transform against a nonnegative integrable g with
/// g = 0 forcing the witnesses to 0 there.
///
/// The transformed diagonal h_k = g f_{k,k} / (g + |f_{k,k}|) is dominated
/// by g exactly; the returned witness is the diagonal itself, whose validity
/// the transform round trip establishes.
pub struct TransformedLimit {
    pub limit: MeasurableFunction,
    /// |h_k| <= g verified exactly at every examined index.
    pub domination_verified: bool,
    /// Round trip f = g h / (g - |h|) recovered the witness exactly.
    pub round_trip_exact: bool,
}

pub fn limit_of_measurable(
    fs: Stream<MeasurableFunction>,
    g: &L1Certificate,
    horizon: usize,
) -> Result<TransformedLimit> {
    let Some(g_step) = g.func().as_step() else {
        return Err(Error::precondition(
            "the transform bound must be step-backed",
        ));
    };
    if !g_step.is_nonneg() {
        return Err(Error::precondition("transform bound must be nonnegative"));
    }
    let space = fs.get(0).space().clone();
    let mut domination_verified = true;
    let mut round_trip_exact = true;
    for k in 0..=horizon {
        let phi = fs.get(k).witness_at(k)?;
        // where g vanishes the witness must too
        for (cell, _) in phi.terms() {
            let rep = cell.rep_point().expect("canonical cells are nonempty");
            if g_step.value_at(&rep).is_zero() {
                return Err(Error::precondition(format!(
                    "witness {k} is nonzero on {cell} where the bound vanishes"
                )));
            }
        }
        let h = bounded_transform(&phi, &g_step)?;
        let dominated = g_step.sub(&h.abs())?.is_nonneg();
        domination_verified &= dominated;
        let back = bounded_transform_inverse(&h, &g_step)?;
        round_trip_exact &= back.ae_equal(&phi);
    }
    let fs_diag = fs.clone();
    let limit = MeasurableFunction {
        space,
        witness: Stream::new(move |k| {
            let f = fs_diag.get(k);
            f.witness_at(k).unwrap_or_else(|_| StepFunction::zero(f.space().clone()))
        }),
        target: "diagonal limit".into(),
    };
    Ok(TransformedLimit {
        limit,
        domination_verified,
        round_trip_exact,
    })
}

/// Fatou for nonnegative measurable sequences: the tail-minimum witnesses
/// form a monotone limit whose ladder sits below the tail minima of the term
/// integrals, exactly, with the unbounded branch flagged.
#[derive(Clone, Debug)]
pub struct GeneralFatouReport {
    /// Integral ladder of the monotone tail-minimum limit.
    pub lower_ladder: Vec<Rational>,
    /// Tail minimum of the term integral claims (None marks an unresolved
    /// or infinite entry, taking the unbounded branch).
    pub term_tail_minima: Vec<Option<Rational>>,
    /// Each ladder entry is at most the matching tail minimum.
    pub all_ok: bool,
    /// True when some term integral claim was infinite.
    pub unbounded_branch: bool,
}

pub fn fatou_measurable(
    fs: Stream<MeasurableFunction>,
    integrals: impl Fn(usize) -> Result<IntegralValue>,
    horizon: usize,
) -> Result<GeneralFatouReport> {
    // exact nonnegativity of the examined witnesses
    for n in 0..=horizon {
        for k in 0..=horizon {
            if let Some(cell) = fs.get(n).witness_at(k)?.negative_witness() {
                return Err(Error::NegativityWitness {
                    index: n,
                    witness: cell.clone(),
                });
            }
        }
    }
    // h_n = min over the window [n, horizon] of the witnesses' diagonal
    let mut lower_ladder = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        let mut acc = fs.get(n).witness_at(horizon)?;
        for k in n + 1..=horizon {
            acc = acc.min(&fs.get(k).witness_at(horizon)?)?;
        }
        lower_ladder.push(acc.integral());
    }
    let mut unbounded_branch = false;
    let mut term_tail_minima = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        let mut m: Option<Rational> = None;
        let mut finite = true;
        for k in n..=horizon {
            match integrals(k)?.known() {
                Some(Finite(v)) => {
                    m = Some(match m.take() {
                        None => v.clone(),
                        Some(acc) => acc.min(v.clone()),
                    });
                }
                Some(_) => {
                    unbounded_branch = true;
                    finite = false;
                }
                None => finite = false,
            }
        }
        term_tail_minima.push(if finite { m } else { None });
    }
    let mut all_ok = true;
    for (lo, tail) in lower_ladder.iter().zip(&term_tail_minima) {
        if let Some(t) = tail {
            all_ok &= lo <= t;
        }
    }
    Ok(GeneralFatouReport {
        lower_ladder,
        term_tail_minima,
        all_ok,
        unbounded_branch,
    })
}

/// Evidence tying null covers to measure-zero sets, both directions.
#[derive(Clone, Debug)]
pub enum NullEquivalence {
    /// From a cover: for each sampled epsilon, a prefix whose indicator
    /// integral stays below it.
    CoverToMeasure { rows: Vec<(Rational, Rational)>, ok: bool },
    /// From a measure-zero set: a cover built from its generating cells,
    /// with the n|f| ladder staying at zero.
    MeasureToCover { cover_totals: Vec<Rational>, scaled_ladder: Vec<Rational>, ok: bool },
    /// The set provably has positive measure; neither direction applies.
    Rejected { measure: IntegralValue },
}

/// Cover direction: prefix indicators of the cover integrate below every
/// sampled epsilon.
pub fn cover_to_measure_zero(
    cover: &NullCover,
    epsilons: &[Rational],
    prefix: usize,
) -> Result<NullEquivalence> {
    let mut rows = Vec::new();
    let mut ok = true;
    for eps in epsilons {
        let cells = cover.cells(eps);
        let family: Vec<Cell> = (0..prefix).map(|k| cells.get(k)).collect();
        let indicator = StepFunction::indicator(cover.space().clone(), family)?;
        let mass = indicator.integral();
        ok &= mass < *eps;
        rows.push((eps.clone(), mass));
    }
    Ok(NullEquivalence::CoverToMeasure { rows, ok })
}

/// Measure-zero direction: a certified mu(A) = 0 set emits the cover formed
/// by its own generating cells; the n|f| ladder over the indicator stages
/// witnesses that scaling never produces mass.
pub fn measure_zero_to_cover(
    set: &MeasurableSet,
    depth: usize,
    params: &EvalParams,
) -> Result<NullEquivalence> {
    let measure = set.measure(params)?;
    match measure.known() {
        Some(Finite(r)) if r.is_zero() => {}
        _ => return Ok(NullEquivalence::Rejected { measure }),
    }
    let Some(gens) = set.generators() else {
        return Err(Error::precondition(
            "the set carries no generating cells to cover with",
        ));
    };
    let mut cover_totals = Vec::with_capacity(depth);
    let mut total = Rational::zero();
    let mut ok = true;
    for k in 0..depth {
        let cell = gens.get(k);
        total += &set.space().measure(&cell)?;
        cover_totals.push(total.clone());
    }
    ok &= total.is_zero();
    let mut scaled_ladder = Vec::with_capacity(depth);
    for n in 0..depth {
        let stage = set.stage(n)?;
        let scaled = stage.scale(&Rational::from(n as i64 + 1));
        scaled_ladder.push(scaled.integral());
        ok &= scaled.integral().is_zero();
    }
    Ok(NullEquivalence::MeasureToCover {
        cover_totals,
        scaled_ladder,
        ok,
    })
}

/// Measure additivity and sigma-ring closure helpers used by the checkers:
/// mu(A u B) + mu(A n B) = mu(A) + mu(B) for finite-backed sets, exactly.
pub fn additivity_check(a: &MeasurableSet, b: &MeasurableSet) -> Result<bool> {
    let (Some(fa), Some(fb)) = (a.as_finite_indicator(), b.as_finite_indicator()) else {
        return Err(Error::precondition("additivity check needs finite-backed sets"));
    };
    let space = a.space();
    let union = indicator_union(fa, fb, space);
    let inter = indicator_intersection(fa, fb, space);
    Ok(union.integral() + inter.integral() == fa.integral() + fb.integral())
}

/// Increasing unions of signed-limit terms also close the sigma-ring; this
/// routes a monotone sequence of sets through the convergence harness and
/// returns the limit set.
pub fn monotone_union(
    stages: Stream<MeasurableSet>,
    space: MeasureSpace,
    horizon: usize,
    params: &EvalParams,
) -> Result<(MeasurableSet, Vec<IntegralValue>)> {
    let params_cl = params.clone();
    let stages_cl = stages.clone();
    let (limit, report) = beppo_levi(
        move |n| stages_cl.get(n).indicator_signed(&params_cl),
        horizon,
        None,
        params,
    )?;
    Ok((
        MeasurableSet {
            space,
            backing: Backing::General(limit),
            generators: None,
        },
        report.ladder,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, PlusInf};
    use crate::signed::FiniteSide;

    fn line() -> MeasureSpace {
        MeasureSpace::IntervalLine
    }

    fn iv(a: i64, b: i64) -> Cell {
        Cell::interval(rat(a, 1), rat(b, 1))
    }

    fn ivr(a: Rational, b: Rational) -> Cell {
        Cell::interval(a, b)
    }

    fn p() -> EvalParams {
        EvalParams::default()
    }

    #[test]
    fn finite_set_measures_are_exact() {
        let a = MeasurableSet::from_cells(line(), vec![iv(0, 1)]).unwrap();
        assert_eq!(
            a.measure(&p()).unwrap(),
            IntegralValue::Exact(Finite(rat(1, 1)))
        );
        let pt = MeasurableSet::from_cells(
            MeasureSpace::Counting,
            vec![Cell::finite_set(["x"])],
        )
        .unwrap();
        assert_eq!(
            pt.measure(&p()).unwrap(),
            IntegralValue::Exact(Finite(rat(1, 1)))
        );
    }

    #[test]
    fn geometric_union_accepts_its_declared_measure() {
        // A = union over n of [n, n + 2^-(n+1)): mass 2^-(n+1), total 1
        let a = MeasurableSet::from_cell_stream(
            line(),
            Stream::new(|n| {
                let lo = rat(n as i64, 1);
                let hi = &lo + &Rational::dyadic(-(n as i64) - 1);
                ivr(lo, hi)
            }),
        );
        let v = a
            .measure_declared(Finite(rat(1, 1)), &EvalParams::with_budget(32))
            .unwrap();
        assert_eq!(v, IntegralValue::Declared(Finite(rat(1, 1))));
        // partials are strictly below the declared total
        match a.measure(&EvalParams::with_budget(32)).unwrap() {
            IntegralValue::Unresolved { approx } => assert!(approx < rat(1, 1)),
            other => panic!("expected unresolved ladder, got {other:?}"),
        }
    }

    #[test]
    fn interval_difference_is_exact() {
        let a = MeasurableSet::from_cells(line(), vec![iv(0, 2)]).unwrap();
        let b = MeasurableSet::from_cells(line(), vec![iv(1, 3)]).unwrap();
        let d = set_difference(&a, &b, &p()).unwrap();
        assert_eq!(
            d.as_finite_indicator().unwrap().terms(),
            &[(iv(0, 1), rat(1, 1))]
        );
        assert_eq!(
            d.measure(&p()).unwrap(),
            IntegralValue::Exact(Finite(rat(1, 1)))
        );
    }

    #[test]
    fn finite_minus_stream_certifies_through_domination() {
        // [0,1) minus a union living elsewhere: measure stabilizes at 1
        let a = MeasurableSet::from_cells(line(), vec![iv(0, 1)]).unwrap();
        let b = MeasurableSet::from_cell_stream(
            line(),
            Stream::new(|n| iv(n as i64 + 2, n as i64 + 3)),
        );
        let d = set_difference(&a, &b, &p()).unwrap();
        assert_eq!(
            d.measure(&p()).unwrap().known(),
            Some(&Finite(rat(1, 1)))
        );
    }

    #[test]
    fn disjoint_union_ladder_counts_pieces() {
        let parts = Stream::new(|n| {
            MeasurableSet::from_cells(line(), vec![iv(n as i64, n as i64 + 1)]).unwrap()
        });
        let u = disjoint_union(parts, line());
        // stage n covers n+1 unit cells
        assert_eq!(u.stage(4).unwrap().integral(), rat(5, 1));
        // overlap is detected with a witness
        let overlapping = Stream::new(|_| {
            MeasurableSet::from_cells(line(), vec![iv(0, 1)]).unwrap()
        });
        let bad = disjoint_union(overlapping, line());
        assert!(bad.stage(1).is_err());
    }

    #[test]
    fn nested_interval_intersection_ladder() {
        // A_n = [0, 1 + 1/(n+1)): intersection is [0,1] = [0,1) a.e.
        let parts = Stream::new(|n| {
            MeasurableSet::from_cells(
                line(),
                vec![ivr(rat(0, 1), rat(1, 1) + rat(1, n as i64 + 2))],
            )
            .unwrap()
        });
        let (result, ladder) = intersection(parts, line(), 12, &p()).unwrap();
        // decreasing ladder 1 + 1/(n+2), exactly
        for (n, v) in ladder.iter().enumerate() {
            assert_eq!(*v, rat(1, 1) + rat(1, n as i64 + 2));
        }
        // the assembled set's measure brackets 1 from above
        match result.measure(&p()).unwrap() {
            IntegralValue::Unresolved { approx } => {
                assert!(approx > rat(9, 10) && approx <= rat(1, 1) + rat(1, 2));
            }
            IntegralValue::Exact(v) | IntegralValue::Declared(v) => {
                assert_eq!(v, Finite(rat(1, 1)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn additivity_of_finite_sets() {
        let a = MeasurableSet::from_cells(line(), vec![iv(0, 2)]).unwrap();
        let b = MeasurableSet::from_cells(line(), vec![iv(1, 4)]).unwrap();
        assert!(additivity_check(&a, &b).unwrap());
    }

    #[test]
    fn med_clamp_matches_hand_values() {
        let g = StepFunction::from_terms(line(), [(iv(0, 1), rat(1, 1))]).unwrap();
        let phi = StepFunction::from_terms(line(), [(iv(0, 1), rat(5, 1))]).unwrap();
        assert_eq!(med_clamp(&phi, &g).unwrap(), g);
        let low = phi.scale(&rat(-2, 1));
        assert_eq!(med_clamp(&low, &g).unwrap(), g.neg());
        let mid = StepFunction::from_terms(line(), [(iv(0, 1), rat(1, 3))]).unwrap();
        assert_eq!(med_clamp(&mid, &g).unwrap(), mid);
        assert!(med_clamp(&phi, &g.neg()).is_err());
    }

    #[test]
    fn dominated_limit_of_alternating_witness() {
        // witness (-1/2)^n chi[0,1) -> 0, dominated by chi[0,1)
        let f = MeasurableFunction::new(
            line(),
            |n| {
                let c = if n % 2 == 0 {
                    Rational::dyadic(-(n as i64))
                } else {
                    -Rational::dyadic(-(n as i64))
                };
                StepFunction::from_terms(line(), [(iv(0, 1), c)]).unwrap()
            },
            "0",
        );
        let g = l1_certify(SignedLimit::from_step(
            StepFunction::from_terms(line(), [(iv(0, 1), rat(1, 1))]).unwrap(),
        ))
        .unwrap();
        let target = SignedLimit::zero(line());
        let (cert, report) = dominated_limit(&f, &g, &target, 12).unwrap();
        assert_eq!(cert.integral_rational().unwrap(), rat(0, 1));
        assert!(report.consistent);
        assert_eq!(report.target_integral, rat(0, 1));
        // the clamped ladder closes in on the declared limit
        assert_eq!(report.final_gap, Rational::dyadic(-12));
        assert!(report.final_gap < report.initial_gap);
    }

    #[test]
    fn dominated_limit_identity_for_stable_witness() {
        let phi = StepFunction::from_terms(line(), [(iv(0, 1), rat(1, 2))]).unwrap();
        let f = MeasurableFunction::from_step(phi.clone(), "itself");
        let g = l1_certify(SignedLimit::from_step(
            StepFunction::from_terms(line(), [(iv(0, 1), rat(1, 1))]).unwrap(),
        ))
        .unwrap();
        let target = SignedLimit::from_step(phi);
        let (cert, report) = dominated_limit(&f, &g, &target, 6).unwrap();
        assert_eq!(cert.integral_rational().unwrap(), rat(1, 2));
        assert!(report.consistent);
        assert!(report.envelopes.iter().all(|(lo, hi)| lo == hi));
    }

    #[test]
    fn nonneg_truncation_recovers_bounded_functions() {
        let f = MeasurableFunction::from_step(
            StepFunction::from_terms(line(), [(iv(0, 1), rat(1, 1))]).unwrap(),
            "chi[0,1)",
        );
        let exhaustion = Stream::new(|n| iv(-(n as i64), n as i64));
        let g = nonneg_to_signed(&f, exhaustion, &p()).unwrap();
        assert_eq!(g.integral().known(), Some(&Finite(rat(1, 1))));
        assert_eq!(g.finite_side(), FiniteSide::Both);
    }

    #[test]
    fn nonneg_truncation_certifies_unbounded_mass() {
        // witness n * chi[0,1): truncations integrate to n
        let f = MeasurableFunction::new(
            line(),
            |n| {
                StepFunction::from_terms(line(), [(iv(0, 1), rat(n as i64, 1))]).unwrap()
            },
            "unbounded ramp",
        );
        let exhaustion = Stream::new(|n| iv(-(n as i64), n as i64 + 1));
        let params = EvalParams {
            budget: 40,
            window: 4,
            infinity_threshold: rat(10, 1),
        };
        let g = nonneg_to_signed(&f, exhaustion, &params).unwrap();
        assert_eq!(g.integral().known(), Some(&PlusInf));
    }

    #[test]
    fn nonneg_truncation_of_zero() {
        let f = MeasurableFunction::from_step(StepFunction::zero(line()), "0");
        let exhaustion = Stream::new(|n| iv(-(n as i64), n as i64));
        let g = nonneg_to_signed(&f, exhaustion, &p()).unwrap();
        assert_eq!(g.integral().known(), Some(&Finite(rat(0, 1))));
    }

    #[test]
    fn bounded_transform_round_trip_is_exact() {
        let g = StepFunction::from_terms(line(), [(iv(0, 1), rat(1, 1))]).unwrap();
        let phi = StepFunction::from_terms(line(), [(iv(0, 1), rat(1, 1))]).unwrap();
        let h = bounded_transform(&phi, &g).unwrap();
        // g f / (g + |f|) = 1/2 on [0,1)
        assert_eq!(
            h.terms(),
            &[(iv(0, 1), rat(1, 2))]
        );
        let back = bounded_transform_inverse(&h, &g).unwrap();
        assert_eq!(back, phi);

        // diverging witnesses stay inside the bound: n/(1+n) chi
        for n in 1..6i64 {
            let big = StepFunction::from_terms(line(), [(iv(0, 1), rat(n, 1))]).unwrap();
            let hn = bounded_transform(&big, &g).unwrap();
            assert_eq!(hn.terms(), &[(iv(0, 1), rat(n, n + 1))]);
            assert!(g.sub(&hn.abs()).unwrap().is_nonneg());
            assert_eq!(bounded_transform_inverse(&hn, &g).unwrap(), big);
        }

        // zero maps to zero both ways
        let z = StepFunction::zero(line());
        assert!(bounded_transform(&z, &g).unwrap().is_zero());
        assert!(bounded_transform_inverse(&z, &g).unwrap().is_zero());
    }

    #[test]
    fn bounded_transform_random_round_trips() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            // g positive on a block that contains the witness support
            let g = StepFunction::from_terms(
                line(),
                [(iv(-8, 8), crate::gen::positive_rational(&mut rng, 5))],
            )
            .unwrap();
            let lo = rng.random_range(-6..0);
            let len = rng.random_range(1..6);
            let phi = StepFunction::from_terms(
                line(),
                [(iv(lo, lo + len), crate::gen::rational(&mut rng, 6))],
            )
            .unwrap();
            let h = bounded_transform(&phi, &g).unwrap();
            // |h| < g on the support, and the inverse recovers phi exactly
            assert!(g.sub(&h.abs()).unwrap().is_nonneg());
            assert_eq!(bounded_transform_inverse(&h, &g).unwrap(), phi);
        }
    }

    #[test]
    fn limit_of_measurable_constant_sequence() {
        let phi = StepFunction::from_terms(line(), [(iv(0, 1), rat(1, 1))]).unwrap();
        let fs = Stream::new({
            let phi = phi.clone();
            move |_| MeasurableFunction::from_step(phi.clone(), "chi")
        });
        let g = l1_certify(SignedLimit::from_step(phi.clone())).unwrap();
        let out = limit_of_measurable(fs, &g, 8).unwrap();
        assert!(out.domination_verified);
        assert!(out.round_trip_exact);
        assert_eq!(out.limit.witness_at(5).unwrap(), phi);
    }

    #[test]
    fn fatou_measurable_escaping_supports() {
        // f_n = chi[n, n+1): the limit is 0, liminf of integrals is 1
        let fs = Stream::new(|n: usize| {
            MeasurableFunction::from_step(
                StepFunction::from_terms(line(), [(iv(n as i64, n as i64 + 1), rat(1, 1))])
                    .unwrap(),
                "escaping",
            )
        });
        let report = fatou_measurable(
            fs,
            |_| Ok(IntegralValue::Exact(Finite(rat(1, 1)))),
            6,
        )
        .unwrap();
        assert!(report.all_ok);
        assert!(!report.unbounded_branch);
        assert!(report.lower_ladder.iter().rev().skip(1).all(|v| v.is_zero()));
        assert!(report
            .term_tail_minima
            .iter()
            .all(|m| *m == Some(rat(1, 1))));
    }

    #[test]
    fn fatou_measurable_unbounded_branch() {
        // f_n = chi[0, n): both sides infinite
        let fs = Stream::new(|n: usize| {
            MeasurableFunction::from_step(
                StepFunction::indicator(line(), vec![iv(0, n as i64)]).unwrap(),
                "growing",
            )
        });
        let report = fatou_measurable(fs, |_| Ok(IntegralValue::Certified(PlusInf)), 5).unwrap();
        assert!(report.unbounded_branch);
        assert!(report.term_tail_minima.iter().all(|m| m.is_none()));
    }

    #[test]
    fn null_equivalence_point_cover() {
        // {0} covered by [-eps/4, eps/4): both directions
        let cover = NullCover::new(line(), |eps: &Rational| {
            let eps = eps.clone();
            Stream::new(move |k| {
                if k == 0 {
                    let h = &eps / &rat(4, 1);
                    ivr(-h.clone(), h)
                } else {
                    ivr(rat(0, 1), rat(0, 1))
                }
            })
        });
        let eps_schedule: Vec<Rational> =
            (1..=6).map(|k| Rational::dyadic(-k)).collect();
        match cover_to_measure_zero(&cover, &eps_schedule, 8).unwrap() {
            NullEquivalence::CoverToMeasure { rows, ok } => {
                assert!(ok);
                for (eps, mass) in rows {
                    assert!(mass < eps);
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn null_equivalence_measure_zero_set() {
        // finite identifier set under the zero measure: generating cells
        // already form a zero-total cover
        let set = MeasurableSet::from_cells(
            MeasureSpace::Zero,
            vec![Cell::finite_set(["a", "b"])],
        )
        .unwrap();
        match measure_zero_to_cover(&set, 6, &p()).unwrap() {
            NullEquivalence::MeasureToCover {
                cover_totals,
                scaled_ladder,
                ok,
            } => {
                assert!(ok);
                assert!(cover_totals.iter().all(|t| t.is_zero()));
                assert!(scaled_ladder.iter().all(|t| t.is_zero()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn null_equivalence_rejects_positive_measure() {
        let set = MeasurableSet::from_cells(line(), vec![iv(0, 1)]).unwrap();
        match measure_zero_to_cover(&set, 4, &p()).unwrap() {
            NullEquivalence::Rejected { measure } => {
                assert_eq!(measure.known(), Some(&Finite(rat(1, 1))));
            }
            other => panic!("unexpected {other:?}"),
        }
        // the empty set passes trivially in both directions
        let empty = MeasurableSet::empty(line());
        assert!(matches!(
            measure_zero_to_cover(&empty, 4, &p()).unwrap(),
            NullEquivalence::MeasureToCover { ok: true, .. }
        ));
    }

    #[test]
    fn monotone_union_of_sets_reports_its_ladder() {
        let stages = Stream::new(|n: usize| {
            MeasurableSet::from_cells(line(), vec![iv(0, n as i64 + 1)]).unwrap()
        });
        let (limit, ladder) = monotone_union(stages, line(), 10, &p()).unwrap();
        for (n, v) in ladder.iter().enumerate() {
            assert_eq!(v.known(), Some(&Finite(rat(n as i64 + 1, 1))));
        }
        assert!(matches!(
            limit.measure(&p()).unwrap(),
            IntegralValue::Unresolved { .. }
        ));
    }

    #[test]
    fn sigma_finite_self_covers() {
        // a cell-backed set covers itself by its own generators
        let a = MeasurableSet::from_cells(line(), vec![iv(0, 1), iv(2, 3)]).unwrap();
        let cover = a.sigma_finite_cover(2).unwrap();
        assert_eq!(cover.len(), 2);
        assert!(cover.iter().all(|(_, m)| *m == rat(1, 1)));
        // a stream-backed set is covered stage by stage by its cell stream
        let b = MeasurableSet::from_cell_stream(
            line(),
            Stream::new(|n| iv(n as i64, n as i64 + 1)),
        );
        let cover = b.sigma_finite_cover(6).unwrap();
        assert_eq!(cover.len(), 6);
    }

    #[test]
    fn subsets_reuse_their_null_cover() {
        // the cover certifying three points also certifies any subset of
        // them, with the same cells
        let cover = NullCover::new(line(), |eps: &Rational| {
            let eps = eps.clone();
            Stream::new(move |k| {
                if k < 3 {
                    let c = rat(k as i64, 1);
                    let h = &eps / &rat(8, 1);
                    ivr(&c - &h, &c + &h)
                } else {
                    ivr(rat(0, 1), rat(0, 1))
                }
            })
        });
        let eps = rat(1, 100);
        for subset in [
            vec![riesz_point(0), riesz_point(1), riesz_point(2)],
            vec![riesz_point(0), riesz_point(2)],
            vec![riesz_point(1)],
            vec![],
        ] {
            for p in &subset {
                assert!(cover.certifies_point(p, &eps, 3).unwrap());
            }
        }
    }

    fn riesz_point(k: i64) -> crate::space::Point {
        crate::space::Point::real(rat(k, 1))
    }

    #[test]
    fn cauchy_samples_respect_the_excluded_cover() {
        // witness converges everywhere except at 0, which the cover excuses
        let f = MeasurableFunction::new(
            line(),
            |n| {
                let jitter = if n % 2 == 0 {
                    Rational::dyadic(-(n as i64))
                } else {
                    Rational::zero()
                };
                StepFunction::from_terms(
                    line(),
                    [
                        (iv(0, 1), rat(1, 1)),
                        (ivr(-Rational::dyadic(-8), Rational::dyadic(-8)), jitter + rat(5, 1)),
                    ],
                )
                .unwrap()
            },
            "chi[0,1) off a null neighborhood of 0",
        );
        let cover = NullCover::new(line(), |eps: &Rational| {
            let eps = eps.clone();
            Stream::new(move |k| {
                if k == 0 {
                    let h = (&eps / &rat(4, 1)).min(Rational::dyadic(-7));
                    ivr(-h.clone(), h)
                } else {
                    ivr(rat(0, 1), rat(0, 1))
                }
            })
        });
        let points = vec![
            crate::space::Point::real(rat(0, 1)),
            crate::space::Point::real(rat(1, 2)),
            crate::space::Point::real(rat(2, 1)),
        ];
        let rows = f
            .cauchy_at_samples(&points, Some(&cover), &Rational::dyadic(-4), 8, 12)
            .unwrap();
        // the origin was excused by the cover; the surviving samples pass
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|(_, ok)| *ok));
        // without the cover the jittering origin fails the exact check
        let rows = f
            .cauchy_at_samples(&points, None, &Rational::dyadic(-20), 0, 6)
            .unwrap();
        assert!(rows.iter().any(|(_, ok)| !*ok));
    }

    #[test]
    fn product_witnesses_multiply_exactly() {
        let f = MeasurableFunction::from_step(
            StepFunction::from_terms(line(), [(iv(0, 2), rat(3, 1))]).unwrap(),
            "3 chi[0,2)",
        );
        let g = MeasurableFunction::from_step(
            StepFunction::from_terms(line(), [(iv(1, 3), rat(1, 2))]).unwrap(),
            "chi[1,3)/2",
        );
        let prod = f.product(&g).unwrap();
        assert_eq!(
            prod.witness_at(0).unwrap().terms(),
            &[(iv(1, 2), rat(3, 2))]
        );
    }
}
