//! Continuation-value regression: basis functions, block-diagonal normal
//! equations and their solution.
//!
//! Exercise dates are partitioned into contiguous groups of `group_size`
//! dates. Each group owns one block of basis functions, so the full normal
//! matrix is block diagonal and every block is solved on its own. With the
//! time-affine basis a block spans `{1, S, S², t, tS, tS²}`; the plain
//! quadratic basis `{1, S, S²}` with one date per group is the classic
//! date-by-date regression.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::ExerciseSchedule;
use crate::scalar::Real;

/// Default ridge, added to the unit diagonal of each equilibrated block.
pub const DEFAULT_RIDGE: f64 = 1e-10;

/// `DEFAULT_RIDGE`, raised to `100 ε` for scalars too coarse to resolve it.
/// Single-precision time-affine blocks are otherwise singular.
pub fn default_ridge<T: Real>() -> T {
    T::lit(DEFAULT_RIDGE).max(T::epsilon() * T::lit(100.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    /// `1, S, S²`
    Quadratic,
    /// `1, S, S², t, tS, tS²`
    TimeAffineQuadratic,
}

impl BasisKind {
    pub fn dim(self) -> usize {
        match self {
            BasisKind::Quadratic => 3,
            BasisKind::TimeAffineQuadratic => 6,
        }
    }
}

/// Identifies the layout a coefficient set was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisFingerprint {
    pub kind: BasisKind,
    pub group_size: usize,
    pub n_dates: usize,
    pub maturity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec<T> {
    kind: BasisKind,
    group_size: usize,
    dates: Vec<T>,
}

impl<T: Real> BasisSpec<T> {
    pub fn new(kind: BasisKind, group_size: usize, schedule: &ExerciseSchedule<T>) -> Result<Self> {
        if group_size == 0 {
            return Err(Error::invalid("group_size", "must be >= 1"));
        }
        Ok(Self {
            kind,
            group_size,
            dates: schedule.dates().to_vec(),
        })
    }

    /// One block per date with `{1, S, S²}`.
    pub fn per_date(schedule: &ExerciseSchedule<T>) -> Self {
        Self {
            kind: BasisKind::Quadratic,
            group_size: 1,
            dates: schedule.dates().to_vec(),
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.dates.len().div_ceil(self.group_size)
    }

    /// Functions per block.
    pub fn block_dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn total_dim(&self) -> usize {
        self.block_dim() * self.n_blocks()
    }

    /// Block of the 0-based date index `k`.
    #[inline]
    pub fn block_of_date(&self, k: usize) -> usize {
        k / self.group_size
    }

    pub fn block_dates(&self, block: usize) -> std::ops::Range<usize> {
        let start = block * self.group_size;
        start..(start + self.group_size).min(self.dates.len())
    }

    pub fn date_time(&self, k: usize) -> T {
        self.dates[k]
    }

    /// Block whose date span contains `time`.
    pub fn block_of_time(&self, time: T) -> Option<usize> {
        let tol = T::lit(1e-12) * (T::one() + time.abs());
        (0..self.n_blocks()).find(|&b| {
            let r = self.block_dates(b);
            time >= self.dates[r.start] - tol && time <= self.dates[r.end - 1] + tol
        })
    }

    pub fn fingerprint(&self) -> BasisFingerprint {
        BasisFingerprint {
            kind: self.kind,
            group_size: self.group_size,
            n_dates: self.dates.len(),
            maturity: self.dates.last().map(|t| t.as_f64()).unwrap_or(0.0),
        }
    }

    /// Writes the basis at `(spot, time)` into `out` (length `block_dim`).
    #[inline]
    pub fn fill(&self, spot: T, time: T, out: &mut [T]) {
        let s2 = spot * spot;
        out[0] = T::one();
        out[1] = spot;
        out[2] = s2;
        if self.kind == BasisKind::TimeAffineQuadratic {
            out[3] = time;
            out[4] = time * spot;
            out[5] = time * s2;
        }
    }

    /// Basis vector at `(spot, time)`; `time` must fall in `block`.
    pub fn basis_eval(&self, block: usize, spot: T, time: T) -> Result<Vec<T>> {
        if self.block_of_time(time) != Some(block) {
            return Err(Error::BlockTimeMismatch {
                block,
                time: time.as_f64(),
            });
        }
        let mut out = vec![T::zero(); self.block_dim()];
        self.fill(spot, time, &mut out);
        Ok(out)
    }
}

/// One diagonal block: `U_b` (row-major, only the upper triangle is
/// accumulated) and `V_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalBlock<T> {
    dim: usize,
    u: Vec<T>,
    v: Vec<T>,
}

impl<T: Real> NormalBlock<T> {
    fn zeros(dim: usize) -> Self {
        Self {
            dim,
            u: vec![T::zero(); dim * dim],
            v: vec![T::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Full symmetric matrix, row-major.
    pub fn matrix(&self) -> Vec<T> {
        let p = self.dim;
        let mut m = self.u.clone();
        for i in 0..p {
            for j in 0..i {
                m[i * p + j] = self.u[j * p + i];
            }
        }
        m
    }

    pub fn vector(&self) -> &[T] {
        &self.v
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.u[i * self.dim + i]).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.trace() == T::zero()
    }

    #[inline]
    fn add(&mut self, weight: T, f: &[T], y: T) {
        let p = self.dim;
        for i in 0..p {
            let wf = weight * f[i];
            self.v[i] += wf * y;
            let row = &mut self.u[i * p..(i + 1) * p];
            for j in i..p {
                row[j] += wf * f[j];
            }
        }
    }

    /// Jacobi-equilibrates, then adds `ridge` to the unit diagonal, i.e. a
    /// shift of `ridge·tr/p` on the scaled matrix. Shifting before scaling
    /// would let the `S⁴` entries dominate and bias the fit.
    fn solve(&self, ridge: T) -> Option<Vec<T>> {
        let p = self.dim;
        let mut a = self.matrix();
        // Solve (S A S + ridge I) y = S v, alpha = S y.
        let mut scale = vec![T::zero(); p];
        for i in 0..p {
            let d = a[i * p + i];
            if !(d > T::zero()) || !d.is_finite() {
                return None;
            }
            scale[i] = d.sqrt().recip();
        }
        for i in 0..p {
            for j in 0..p {
                a[i * p + j] *= scale[i] * scale[j];
            }
            a[i * p + i] += ridge;
        }
        let b: Vec<T> = (0..p).map(|i| self.v[i] * scale[i]).collect();
        let y = cholesky_solve(&mut a, p, &b)?;
        let alpha: Vec<T> = y.iter().zip(&scale).map(|(&yi, &si)| yi * si).collect();
        alpha.iter().all(|a| a.is_finite()).then_some(alpha)
    }
}

/// In-place Cholesky of a unit-diagonal SPD matrix followed by two
/// triangular solves. `None` when a pivot falls below the round-off floor.
fn cholesky_solve<T: Real>(a: &mut [T], p: usize, b: &[T]) -> Option<Vec<T>> {
    let floor = T::lit(16.0) * T::epsilon();
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= a[j * p + k] * a[j * p + k];
        }
        if !(d > floor) {
            return None;
        }
        let l_jj = d.sqrt();
        a[j * p + j] = l_jj;
        for i in (j + 1)..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = s / l_jj;
        }
    }
    let mut y = b.to_vec();
    for i in 0..p {
        for k in 0..i {
            let t = a[i * p + k] * y[k];
            y[i] -= t;
        }
        y[i] /= a[i * p + i];
    }
    for i in (0..p).rev() {
        for k in (i + 1)..p {
            let t = a[k * p + i] * y[k];
            y[i] -= t;
        }
        y[i] /= a[i * p + i];
    }
    Some(y)
}

/// Block-diagonal normal equations `U = Σ w f fᵀ`, `V = Σ w f P̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalEquations<T> {
    blocks: Vec<NormalBlock<T>>,
}

impl<T: Real> NormalEquations<T> {
    pub fn zeros(spec: &BasisSpec<T>) -> Self {
        Self {
            blocks: (0..spec.n_blocks())
                .map(|_| NormalBlock::zeros(spec.block_dim()))
                .collect(),
        }
    }

    pub fn blocks(&self) -> &[NormalBlock<T>] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &NormalBlock<T> {
        &self.blocks[b]
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(NormalBlock::is_empty)
    }

    /// `U_b += w f fᵀ`, `V_b += w f y`.
    pub fn accumulate(
        &mut self,
        block: usize,
        weight: T,
        f: &[T],
        discounted_payoff: T,
    ) -> Result<()> {
        let nb = self.blocks.len();
        let blk = self.blocks.get_mut(block).ok_or(Error::DimensionMismatch {
            expected: nb,
            got: block,
        })?;
        if f.len() != blk.dim {
            return Err(Error::DimensionMismatch {
                expected: blk.dim,
                got: f.len(),
            });
        }
        if !(weight >= T::zero()) {
            return Err(Error::invalid("weight", "must be >= 0"));
        }
        if weight > T::zero() {
            blk.add(weight, f, discounted_payoff);
        }
        Ok(())
    }

    /// Unchecked variant for inner loops; `weight > 0` and `f` sized to the block.
    #[inline]
    pub(crate) fn accumulate_fast(
        &mut self,
        block: usize,
        weight: T,
        f: &[T],
        discounted_payoff: T,
    ) {
        debug_assert!(weight >= T::zero());
        self.blocks[block].add(weight, f, discounted_payoff);
    }

    pub fn scale(&mut self, factor: T) {
        for b in &mut self.blocks {
            b.u.iter_mut()
                .chain(b.v.iter_mut())
                .for_each(|x| *x *= factor);
        }
    }

    /// Elementwise sum with another set of equations of the same layout.
    pub fn merge(&mut self, other: &NormalEquations<T>) -> Result<()> {
        if self.blocks.len() != other.blocks.len() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks.len(),
                got: other.blocks.len(),
            });
        }
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            if a.dim != b.dim {
                return Err(Error::DimensionMismatch {
                    expected: a.dim,
                    got: b.dim,
                });
            }
            a.u.iter_mut().zip(&b.u).for_each(|(x, y)| *x += *y);
            a.v.iter_mut().zip(&b.v).for_each(|(x, y)| *x += *y);
        }
        Ok(())
    }

    /// JSON dump: one object per block with the full matrix, vector and,
    /// when given, the fitted coefficients.
    pub fn debug_dump(&self, coeffs: Option<&CoefficientSet<T>>) -> serde_json::Value {
        let blocks: Vec<_> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(b, blk)| {
                let f = |xs: &[T]| xs.iter().map(|x| x.as_f64()).collect::<Vec<_>>();
                serde_json::json!({
                    "block": b,
                    "dim": blk.dim,
                    "matrix": f(&blk.matrix()),
                    "vector": f(&blk.v),
                    "alpha": coeffs.and_then(|c| c.block(b)).map(f),
                })
            })
            .collect();
        serde_json::Value::Array(blocks)
    }
}

/// Per-block coefficients; a block without data has none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet<T> {
    pub fingerprint: BasisFingerprint,
    pub blocks: Vec<Option<Vec<T>>>,
}

impl<T: Real> CoefficientSet<T> {
    /// No coefficients in any block.
    pub fn bootstrap(spec: &BasisSpec<T>) -> Self {
        Self {
            fingerprint: spec.fingerprint(),
            blocks: vec![None; spec.n_blocks()],
        }
    }

    pub fn is_bootstrap(&self) -> bool {
        self.blocks.iter().all(Option::is_none)
    }

    pub fn block(&self, b: usize) -> Option<&[T]> {
        self.blocks.get(b).and_then(|a| a.as_deref())
    }

    /// Checks layout against `spec`.
    pub fn check_matches(&self, spec: &BasisSpec<T>) -> Result<()> {
        let fp = spec.fingerprint();
        if self.fingerprint.kind != fp.kind
            || self.fingerprint.group_size != fp.group_size
            || self.fingerprint.n_dates != fp.n_dates
            || (self.fingerprint.maturity - fp.maturity).abs() > 1e-12 * fp.maturity.max(1.0)
        {
            return Err(Error::BasisMismatch(format!(
                "fitted on {:?}, requested {:?}",
                self.fingerprint, fp
            )));
        }
        if self.blocks.len() != spec.n_blocks() {
            return Err(Error::BasisMismatch(format!(
                "{} blocks, expected {}",
                self.blocks.len(),
                spec.n_blocks()
            )));
        }
        for a in self.blocks.iter().flatten() {
            if a.len() != spec.block_dim() {
                return Err(Error::BasisMismatch(format!(
                    "block of length {}, expected {}",
                    a.len(),
                    spec.block_dim()
                )));
            }
        }
        Ok(())
    }

    /// Dot product of a block's coefficients with a precomputed basis vector.
    #[inline]
    pub fn continuation_from_basis(&self, block: usize, f: &[T]) -> Option<T> {
        self.block(block)
            .map(|a| a.iter().zip(f).fold(T::zero(), |acc, (&x, &y)| acc + x * y))
    }

    /// `Ĉ(spot, time)`; `None` when the block has no coefficients (use the
    /// bootstrap exercise policy instead).
    pub fn continuation_value(&self, spec: &BasisSpec<T>, spot: T, time: T) -> Option<T> {
        let b = spec.block_of_time(time)?;
        let mut f = [T::zero(); 6];
        let f = &mut f[..spec.block_dim()];
        spec.fill(spot, time, f);
        self.continuation_from_basis(b, f)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a saved set and rejects it unless it was fitted on `spec`'s layout.
    pub fn from_json(json: &str, spec: &BasisSpec<T>) -> Result<Self> {
        let set: Self = serde_json::from_str(json)?;
        set.check_matches(spec)?;
        Ok(set)
    }
}

/// Solves one block; `None` when it never received weight.
pub fn solve_block<T: Real>(b: usize, blk: &NormalBlock<T>, ridge: T) -> Result<Option<Vec<T>>> {
    if blk.is_empty() {
        return Ok(None);
    }
    blk.solve(ridge)
        .map(Some)
        .ok_or(Error::DegenerateRegression { block: b })
}

/// Solves `(D U_b D + ridge·I) y = D V_b`, `α_b = D y` with `D = diag(U_b)^{-1/2}`, for every non-empty block.
pub fn solve_coefficients<T: Real>(
    ne: &NormalEquations<T>,
    spec: &BasisSpec<T>,
    ridge: T,
) -> Result<CoefficientSet<T>> {
    let blocks = ne
        .blocks
        .iter()
        .enumerate()
        .map(|(b, blk)| solve_block(b, blk, ridge))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefficientSet {
        fingerprint: spec.fingerprint(),
        blocks,
    })
}

/// Same as [`solve_coefficients`] with blocks solved on the current rayon pool.
pub fn solve_coefficients_parallel<T: Real>(
    ne: &NormalEquations<T>,
    spec: &BasisSpec<T>,
    ridge: T,
) -> Result<CoefficientSet<T>> {
    let blocks = ne
        .blocks
        .par_iter()
        .enumerate()
        .map(|(b, blk)| solve_block(b, blk, ridge))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefficientSet {
        fingerprint: spec.fingerprint(),
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_spec() -> BasisSpec<f64> {
        let sched = ExerciseSchedule::uniform(1.0, 1).unwrap();
        BasisSpec::per_date(&sched)
    }

    fn affine_spec(dates: Vec<f64>) -> BasisSpec<f64> {
        let t = *dates.last().unwrap();
        let n = dates.len();
        let sched = ExerciseSchedule::from_dates(dates, t).unwrap();
        BasisSpec::new(BasisKind::TimeAffineQuadratic, n, &sched).unwrap()
    }

    #[test]
    fn basis_values() {
        let spec = affine_spec(vec![1.0, 2.0, 3.0]);
        assert_eq!(
            spec.basis_eval(0, 2.0, 3.0).unwrap(),
            vec![1.0, 2.0, 4.0, 3.0, 6.0, 12.0]
        );
        let spec = affine_spec(vec![0.5, 1.0]);
        assert_eq!(
            spec.basis_eval(0, 36.0, 0.5).unwrap(),
            vec![1.0, 36.0, 1296.0, 0.5, 18.0, 648.0]
        );
        let mut out = [9.0; 6];
        spec.fill(0.0, 0.0, &mut out);
        assert_eq!(out, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn basis_rejects_foreign_time() {
        let sched = ExerciseSchedule::uniform(1.0, 50).unwrap();
        let spec = BasisSpec::new(BasisKind::TimeAffineQuadratic, 10, &sched).unwrap();
        assert_eq!(spec.n_blocks(), 5);
        assert!(spec.basis_eval(0, 36.0, 0.2).is_ok());
        assert!(matches!(
            spec.basis_eval(0, 36.0, 0.5),
            Err(Error::BlockTimeMismatch { block: 0, .. })
        ));
        assert_eq!(spec.block_of_time(0.5), Some(2));
        assert_eq!(spec.block_dates(4), 40..50);
    }

    #[test]
    fn uneven_groups_cover_all_dates() {
        let sched = ExerciseSchedule::uniform(1.0, 23).unwrap();
        let spec = BasisSpec::new(BasisKind::Quadratic, 5, &sched).unwrap();
        assert_eq!(spec.n_blocks(), 5);
        let covered: Vec<usize> = (0..5).flat_map(|b| spec.block_dates(b)).collect();
        assert_eq!(covered, (0..23).collect::<Vec<_>>());
        assert_eq!(spec.total_dim(), 15);
    }

    #[test]
    fn zero_weight_is_a_no_op() {
        let spec = line_spec();
        let mut ne = NormalEquations::zeros(&spec);
        ne.accumulate(0, 0.0, &[1.0, 2.0, 4.0], 3.0).unwrap();
        assert_eq!(ne, NormalEquations::zeros(&spec));
        assert!(ne.accumulate(0, -1.0, &[1.0, 2.0, 4.0], 3.0).is_err());
        assert!(ne.accumulate(0, 1.0, &[1.0, 2.0], 3.0).is_err());
        assert!(ne.accumulate(3, 1.0, &[1.0, 2.0, 4.0], 3.0).is_err());
    }

    #[test]
    fn empty_solve_stays_bootstrap() {
        let spec = line_spec();
        let ne = NormalEquations::zeros(&spec);
        let c = solve_coefficients(&ne, &spec, DEFAULT_RIDGE).unwrap();
        assert!(c.is_bootstrap());
        assert_eq!(c.continuation_value(&spec, 36.0, 1.0), None);
    }

    #[test]
    fn identity_system() {
        // U = I via three unit vectors, V = v.
        let spec = line_spec();
        let mut ne = NormalEquations::zeros(&spec);
        let v = [0.5, -2.0, 7.0];
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            ne.accumulate(0, 1.0, &e, v[i]).unwrap();
        }
        let c = solve_coefficients(&ne, &spec, 0.0).unwrap();
        let a = c.block(0).unwrap();
        for i in 0..3 {
            assert!((a[i] - v[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_deficient_needs_ridge() {
        let spec = line_spec();
        let mut ne = NormalEquations::zeros(&spec);
        let mut f = [0.0; 3];
        for j in 0..100 {
            spec.fill(37.5, 1.0, &mut f);
            ne.accumulate(0, 1.0, &f, 2.0 + j as f64 * 0.01).unwrap();
        }
        assert_eq!(
            solve_coefficients(&ne, &spec, 0.0),
            Err(Error::DegenerateRegression { block: 0 })
        );
        let c = solve_coefficients(&ne, &spec, DEFAULT_RIDGE).unwrap();
        let a = c.block(0).unwrap();
        assert!(a.iter().all(|x| x.is_finite()));
        // The fit at the only observed state is the sample mean 2.495.
        let fit = c.continuation_value(&spec, 37.5, 1.0).unwrap();
        assert!((fit - 2.495).abs() < 1e-3, "fit {fit}");
    }

    #[test]
    fn scaling_composes() {
        let spec = line_spec();
        let mut ne = NormalEquations::zeros(&spec);
        ne.accumulate(0, 0.7, &[1.0, 3.0, 9.0], 1.5).unwrap();
        let orig = ne.clone();
        ne.scale(1.0);
        assert_eq!(ne, orig);
        let mut a = orig.clone();
        a.scale(0.5);
        a.scale(0.25);
        let mut b = orig.clone();
        b.scale(0.125);
        assert_eq!(a, b);
        b.scale(0.0);
        assert!(b.is_empty());
        assert_eq!(b, NormalEquations::zeros(&spec));
    }

    #[test]
    fn coefficient_json_round_trip_and_fingerprint() {
        let sched = ExerciseSchedule::uniform(1.0, 50).unwrap();
        let spec = BasisSpec::new(BasisKind::TimeAffineQuadratic, 10, &sched).unwrap();
        let mut c = CoefficientSet::bootstrap(&spec);
        c.blocks[2] = Some(vec![1.0, -0.1, 0.003, 0.25, 1e-7, 1.0 / 3.0]);
        let json = c.to_json().unwrap();
        let back = CoefficientSet::from_json(&json, &spec).unwrap();
        assert_eq!(back, c);

        let other = BasisSpec::new(BasisKind::TimeAffineQuadratic, 5, &sched).unwrap();
        assert!(matches!(
            CoefficientSet::<f64>::from_json(&json, &other),
            Err(Error::BasisMismatch(_))
        ));
        let per_date = BasisSpec::per_date(&sched);
        assert!(CoefficientSet::<f64>::from_json(&json, &per_date).is_err());
    }

    #[test]
    fn debug_dump_layout() {
        let spec = line_spec();
        let mut ne = NormalEquations::zeros(&spec);
        ne.accumulate(0, 1.0, &[1.0, 2.0, 4.0], 1.0).unwrap();
        let dump = ne.debug_dump(None);
        let m = dump[0]["matrix"].as_array().unwrap();
        assert_eq!(m.len(), 9);
        assert_eq!(m[1], m[3]);
        assert_eq!(dump[0]["alpha"], serde_json::Value::Null);
    }

    #[test]
    fn default_ridge_follows_precision() {
        assert_eq!(default_ridge::<f64>(), DEFAULT_RIDGE);
        assert!(default_ridge::<f32>() > 1e-6);
    }

    #[test]
    fn works_in_single_precision() {
        let sched = ExerciseSchedule::uniform(1.0_f32, 1).unwrap();
        let spec = BasisSpec::per_date(&sched);
        let mut ne = NormalEquations::zeros(&spec);
        let mut f = [0.0_f32; 3];
        for i in 0..20 {
            let x = i as f32 * 0.1;
            spec.fill(x, 1.0, &mut f);
            ne.accumulate(0, 1.0, &f, 1.0 - x + 0.5 * x * x).unwrap();
        }
        let c = solve_coefficients(&ne, &spec, 0.0).unwrap();
        let a = c.block(0).unwrap();
        assert!(
            (a[0] - 1.0).abs() < 1e-3 && (a[1] + 1.0).abs() < 1e-3 && (a[2] - 0.5).abs() < 1e-3
        );
    }
}
