//! Counting confined weighted walks layer by layer, a brute-force oracle,
//! backward sampling, and exact checks of the central-weighting relations.
//!
//! Each layer is a dense box `[0, hi_1] x ... x [0, hi_d]` trimmed to the
//! extent of its nonzero entries, so the next box is at most the previous
//! extent plus the largest positive step coordinate on every axis.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::central::CentralDecomposition;
use crate::error::{Error, Result};
use crate::extfloat::ExtFloat;
use crate::lattice::{Point, StepSet};
use crate::rational::{format_rational, lcm_denominators, Rational};

/// Largest number of table entries held at once unless overridden.
pub const DEFAULT_GUARD: u128 = 50_000_000;

/// Upper bound on table entries (dense box cells) a computation may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guard {
    pub max_entries: u128,
}

impl Default for Guard {
    fn default() -> Self {
        Self { max_entries: DEFAULT_GUARD }
    }
}

impl Guard {
    pub fn new(max_entries: u128) -> Self {
        Self { max_entries }
    }

    fn check(&self, needed: u128) -> Result<()> {
        if needed > self.max_entries {
            return Err(Error::ResourceGuard { needed, limit: self.max_entries });
        }
        Ok(())
    }
}

/// Arithmetic backend of the transfer recurrence.
pub trait Tally: Clone + Send + Sync + PartialEq + fmt::Debug + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn mul(&self, o: &Self) -> Self;
    fn add(&self, o: &Self) -> Self;
    /// `sum w * x` over the given pairs.
    fn sum_products<'a>(terms: &[(&'a Self, &'a Self)]) -> Self;
    /// Step weights in this backend and the per-step scale `D`:
    /// the true count at length `n` is `value / D^n`.
    fn step_weights(s: &StepSet) -> (Vec<Self>, Rational);
    fn to_count(&self, scale_pow: &Rational) -> Count;
    /// Index drawn with probability proportional to `weights`.
    fn pick(weights: &[Self], rng: &mut ChaCha8Rng) -> Option<usize>;
}

impl Tally for BigInt {
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }

    fn one() -> Self {
        <BigInt as One>::one()
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn mul(&self, o: &Self) -> Self {
        self * o
    }

    fn add(&self, o: &Self) -> Self {
        self + o
    }

    fn sum_products<'a>(terms: &[(&'a Self, &'a Self)]) -> Self {
        let mut acc = <BigInt as Zero>::zero();
        for &(w, x) in terms {
            if w.is_one() {
                acc += x;
            } else {
                acc += w * x;
            }
        }
        acc
    }

    fn step_weights(s: &StepSet) -> (Vec<Self>, Rational) {
        let d = lcm_denominators(s.weights());
        let dr = Rational::from_integer(d.clone());
        let w = s.weights().iter().map(|w| (w * &dr).to_integer()).collect();
        (w, dr)
    }

    fn to_count(&self, scale_pow: &Rational) -> Count {
        Count::Exact(Rational::from_integer(self.clone()) / scale_pow)
    }

    fn pick(weights: &[Self], rng: &mut ChaCha8Rng) -> Option<usize> {
        let total: BigInt = weights.iter().sum();
        if total <= <BigInt as Zero>::zero() {
            return None;
        }
        let r = uniform_below(&total, rng);
        let mut acc = <BigInt as Zero>::zero();
        for (k, w) in weights.iter().enumerate() {
            acc += w;
            if r < acc {
                return Some(k);
            }
        }
        None
    }
}

/// Uniform integer in `[0, bound)` by rejection on random bit strings.
fn uniform_below(bound: &BigInt, rng: &mut ChaCha8Rng) -> BigInt {
    let bits = bound.bits();
    let nbytes = bits.div_ceil(8) as usize;
    let excess = (nbytes as u64) * 8 - bits;
    let mut buf = vec![0u8; nbytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xff >> excess;
        let r = BigInt::from_bytes_be(num_bigint::Sign::Plus, &buf);
        if &r < bound {
            return r;
        }
    }
}

impl Tally for ExtFloat {
    fn zero() -> Self {
        ExtFloat::ZERO
    }

    fn one() -> Self {
        ExtFloat::ONE
    }

    fn is_zero(&self) -> bool {
        ExtFloat::is_zero(*self)
    }

    fn mul(&self, o: &Self) -> Self {
        ExtFloat::mul(*self, *o)
    }

    fn add(&self, o: &Self) -> Self {
        ExtFloat::add(*self, *o)
    }

    #[inline]
    fn sum_products<'a>(terms: &[(&'a Self, &'a Self)]) -> Self {
        let mut acc = ExtFloat::ZERO;
        for &(w, x) in terms {
            acc = ExtFloat::add(acc, ExtFloat::mul(*w, *x));
        }
        acc
    }

    fn step_weights(s: &StepSet) -> (Vec<Self>, Rational) {
        let w = s.weights().iter().map(ExtFloat::from_rational).collect();
        (w, Rational::one())
    }

    fn to_count(&self, _scale_pow: &Rational) -> Count {
        Count::Approx(*self)
    }

    fn pick(weights: &[Self], rng: &mut ChaCha8Rng) -> Option<usize> {
        let emax = weights
            .iter()
            .filter(|w| !w.is_zero())
            .map(|w| w.exponent())
            .max()?;
        let scaled: Vec<f64> = weights
            .iter()
            .map(|w| if w.is_zero() { 0.0 } else { ExtFloat::new(w.mantissa(), w.exponent() - emax).to_f64() })
            .collect();
        let total: f64 = scaled.iter().sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut last = None;
        for (k, &w) in scaled.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                last = Some(k);
                if u < acc {
                    return Some(k);
                }
            }
        }
        last
    }
}

/// A count: exact rational, or extended float in scaled mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Count {
    Exact(Rational),
    Approx(ExtFloat),
}

impl Count {
    pub fn to_ext(&self) -> ExtFloat {
        match self {
            Count::Exact(r) => ExtFloat::from_rational(r),
            Count::Approx(x) => *x,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_ext().to_f64()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Count::Exact(r) => r.is_zero(),
            Count::Approx(x) => x.is_zero(),
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Count::Exact(r) => Some(r),
            Count::Approx(_) => None,
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Exact(r) => f.write_str(&format_rational(r)),
            Count::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Counting backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Scaled,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "scaled" => Ok(Mode::Scaled),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// One length of the table: a dense box anchored at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<C> {
    hi: Vec<i64>,
    strides: Vec<usize>,
    data: Vec<C>,
}

fn decode(strides: &[usize], mut idx: usize) -> Point {
    strides
        .iter()
        .map(|&st| {
            let x = idx / st;
            idx %= st;
            x as i64
        })
        .collect()
}

fn box_size(hi: &[i64]) -> u128 {
    hi.iter().map(|&h| (h + 1).max(0) as u128).product()
}

impl<C: Tally> Layer<C> {
    fn empty(dim: usize) -> Self {
        Self { hi: vec![-1; dim], strides: vec![0; dim], data: Vec::new() }
    }

    fn zeros(hi: Vec<i64>) -> Self {
        let d = hi.len();
        let mut strides = vec![1usize; d];
        for k in (0..d.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (hi[k + 1] + 1) as usize;
        }
        let size = box_size(&hi) as usize;
        Self { hi, strides, data: vec![C::zero(); size] }
    }

    fn single(p: &[i64]) -> Self {
        let mut l = Self::zeros(p.to_vec());
        let idx = l.index(p).expect("corner of its own box");
        l.data[idx] = C::one();
        l
    }

    pub fn dim(&self) -> usize {
        self.hi.len()
    }

    /// Per-axis upper bound of the stored box (`-1` when empty).
    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of stored cells.
    pub fn cells(&self) -> usize {
        self.data.len()
    }

    fn index(&self, p: &[i64]) -> Option<usize> {
        if self.data.is_empty() || p.len() != self.hi.len() {
            return None;
        }
        let mut idx = 0usize;
        for ((&x, &h), &st) in p.iter().zip(&self.hi).zip(&self.strides) {
            if x < 0 || x > h {
                return None;
            }
            idx += x as usize * st;
        }
        Some(idx)
    }

    fn point_of(&self, idx: usize) -> Point {
        decode(&self.strides, idx)
    }

    /// Stored value at `p`, or `None` outside the box.
    pub fn get(&self, p: &[i64]) -> Option<&C> {
        self.index(p).map(|i| &self.data[i])
    }

    pub fn value(&self, p: &[i64]) -> C {
        self.get(p).cloned().unwrap_or_else(C::zero)
    }

    /// Nonzero entries in lexicographic order of the endpoint.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (Point, &C)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (self.point_of(i), v))
    }

    pub fn total(&self) -> C {
        self.data
            .iter()
            .filter(|v| !v.is_zero())
            .fold(C::zero(), |acc, v| acc.add(v))
    }

    /// Shrinks the box to the extent of the nonzero entries.
    fn trimmed(self) -> Self {
        let d = self.dim();
        let mut ext = vec![-1i64; d];
        for (i, v) in self.data.iter().enumerate() {
            if !v.is_zero() {
                for (e, x) in ext.iter_mut().zip(self.point_of(i)) {
                    *e = (*e).max(x);
                }
            }
        }
        if ext[0] < 0 {
            return Self::empty(d);
        }
        if ext == self.hi {
            return self;
        }
        let mut out = Self::zeros(ext);
        let strides = self.strides;
        for (i, v) in self.data.into_iter().enumerate() {
            if !v.is_zero() {
                let p = decode(&strides, i);
                let j = out.index(&p).expect("inside extent");
                out.data[j] = v;
            }
        }
        out
    }
}

/// One application of the transfer recurrence, restricted to the orthant.
#[derive(Debug, Clone)]
pub struct Transfer<C> {
    steps: Vec<Vec<i64>>,
    weights: Vec<C>,
    max_up: Vec<i64>,
    scale: Rational,
}

impl<C: Tally> Transfer<C> {
    pub fn new(s: &StepSet) -> Self {
        let (weights, scale) = C::step_weights(s);
        Self { steps: s.steps().to_vec(), weights, max_up: s.max_up(), scale }
    }

    /// Cells the next box would need.
    pub fn next_size(&self, prev: &Layer<C>) -> u128 {
        if prev.is_empty() {
            return 0;
        }
        let hi: Vec<i64> = prev.hi.iter().zip(&self.max_up).map(|(h, u)| h + u).collect();
        box_size(&hi)
    }

    pub fn apply(&self, prev: &Layer<C>, guard: &Guard) -> Result<Layer<C>> {
        let d = self.max_up.len();
        if prev.is_empty() {
            return Ok(Layer::empty(d));
        }
        guard.check(self.next_size(prev))?;
        let hi: Vec<i64> = prev.hi.iter().zip(&self.max_up).map(|(h, u)| h + u).collect();
        let mut next = Layer::zeros(hi.clone());
        let offsets: Vec<i64> = self
            .steps
            .iter()
            .map(|s| s.iter().zip(&prev.strides).map(|(&c, &st)| c * st as i64).sum())
            .collect();
        let chunk = if d >= 2 { next.strides[0] } else { next.data.len() }.max(1);
        let strides = next.strides.clone();
        next.data.par_chunks_mut(chunk).enumerate().for_each(|(ci, cells)| {
            let mut p = decode(&strides, ci * chunk);
            let mut terms: Vec<(&C, &C)> = Vec::with_capacity(self.steps.len());
            for cell in cells.iter_mut() {
                let base: i64 = p.iter().zip(&prev.strides).map(|(&x, &st)| x * st as i64).sum();
                terms.clear();
                for (si, s) in self.steps.iter().enumerate() {
                    let inside = p
                        .iter()
                        .zip(s)
                        .zip(&prev.hi)
                        .all(|((&x, &c), &h)| x - c >= 0 && x - c <= h);
                    if inside {
                        let v = &prev.data[(base - offsets[si]) as usize];
                        if !v.is_zero() {
                            terms.push((&self.weights[si], v));
                        }
                    }
                }
                if !terms.is_empty() {
                    *cell = C::sum_products(&terms);
                }
                for k in (0..d).rev() {
                    p[k] += 1;
                    if p[k] <= hi[k] {
                        break;
                    }
                    p[k] = 0;
                }
            }
        });
        Ok(next.trimmed())
    }
}

fn check_start(s: &StepSet, start: &[i64]) -> Result<()> {
    if start.len() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: start.len() });
    }
    if start.iter().any(|&x| x < 0) {
        return Err(Error::OutsideOrthant(start.to_vec()));
    }
    Ok(())
}

/// Forward iteration over layers without storing them.
#[derive(Debug, Clone)]
pub struct LayerStream<C> {
    transfer: Transfer<C>,
    current: Layer<C>,
    n: usize,
    guard: Guard,
}

impl<C: Tally> LayerStream<C> {
    pub fn new(s: &StepSet, start: &[i64], guard: Guard) -> Result<Self> {
        check_start(s, start)?;
        guard.check(box_size(start))?;
        Ok(Self { transfer: Transfer::new(s), current: Layer::single(start), n: 0, guard })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn current(&self) -> &Layer<C> {
        &self.current
    }

    /// Current layer as counts (divides by the scale in exact mode).
    pub fn count_at(&self, p: &[i64]) -> Count {
        self.current.value(p).to_count(&self.scale_pow(self.n))
    }

    pub fn total(&self) -> Count {
        self.current.total().to_count(&self.scale_pow(self.n))
    }

    fn scale_pow(&self, n: usize) -> Rational {
        num_traits::pow(self.transfer.scale.clone(), n)
    }

    pub fn advance(&mut self) -> Result<()> {
        self.current = self.transfer.apply(&self.current, &self.guard)?;
        self.n += 1;
        Ok(())
    }
}

/// All layers `0..=n_max` of a walk-count table in one backend.
#[derive(Debug, Clone)]
pub struct Table<C> {
    steps: StepSet,
    start: Point,
    layers: Vec<Layer<C>>,
    scale: Rational,
    transfer: Transfer<C>,
}

impl<C: Tally> Table<C> {
    pub fn build(s: &StepSet, start: &[i64], n_max: usize, guard: Guard) -> Result<Self> {
        let mut stream = LayerStream::<C>::new(s, start, guard)?;
        let mut layers = vec![stream.current().clone()];
        let mut used = layers[0].cells() as u128;
        for _ in 0..n_max {
            guard.check(used + stream.transfer.next_size(stream.current()))?;
            stream.advance()?;
            used += stream.current().cells() as u128;
            layers.push(stream.current().clone());
        }
        Ok(Self {
            steps: s.clone(),
            start: start.to_vec(),
            layers,
            scale: stream.transfer.scale.clone(),
            transfer: stream.transfer,
        })
    }

    pub fn step_set(&self) -> &StepSet {
        &self.steps
    }

    pub fn start(&self) -> &[i64] {
        &self.start
    }

    pub fn n_max(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layer(&self, n: usize) -> Result<&Layer<C>> {
        self.layers
            .get(n)
            .ok_or(Error::LengthOutOfRange { n, n_max: self.n_max() })
    }

    fn scale_pow(&self, n: usize) -> Rational {
        num_traits::pow(self.scale.clone(), n)
    }

    pub fn count(&self, n: usize, p: &[i64]) -> Result<Count> {
        Ok(self.layer(n)?.value(p).to_count(&self.scale_pow(n)))
    }

    pub fn total(&self, n: usize) -> Result<Count> {
        Ok(self.layer(n)?.total().to_count(&self.scale_pow(n)))
    }

    /// Nonzero endpoints of layer `n`, sorted.
    pub fn endpoints(&self, n: usize) -> Result<Vec<(Point, Count)>> {
        let sp = self.scale_pow(n);
        Ok(self.layer(n)?.iter_nonzero().map(|(p, v)| (p, v.to_count(&sp))).collect())
    }
}

/// A table in either backend.
#[derive(Debug, Clone)]
pub enum WalkTable {
    Exact(Table<BigInt>),
    Scaled(Table<ExtFloat>),
}

impl WalkTable {
    pub fn n_max(&self) -> usize {
        match self {
            WalkTable::Exact(t) => t.n_max(),
            WalkTable::Scaled(t) => t.n_max(),
        }
    }

    pub fn step_set(&self) -> &StepSet {
        match self {
            WalkTable::Exact(t) => t.step_set(),
            WalkTable::Scaled(t) => t.step_set(),
        }
    }

    pub fn start(&self) -> &[i64] {
        match self {
            WalkTable::Exact(t) => t.start(),
            WalkTable::Scaled(t) => t.start(),
        }
    }

    pub fn count(&self, n: usize, p: &[i64]) -> Result<Count> {
        match self {
            WalkTable::Exact(t) => t.count(n, p),
            WalkTable::Scaled(t) => t.count(n, p),
        }
    }

    pub fn total(&self, n: usize) -> Result<Count> {
        match self {
            WalkTable::Exact(t) => t.total(n),
            WalkTable::Scaled(t) => t.total(n),
        }
    }

    pub fn endpoints(&self, n: usize) -> Result<Vec<(Point, Count)>> {
        match self {
            WalkTable::Exact(t) => t.endpoints(n),
            WalkTable::Scaled(t) => t.endpoints(n),
        }
    }
}

pub fn count_walks(s: &StepSet, start: &[i64], n_max: usize, mode: Mode) -> Result<WalkTable> {
    count_walks_guarded(s, start, n_max, mode, Guard::default())
}

pub fn count_walks_guarded(
    s: &StepSet,
    start: &[i64],
    n_max: usize,
    mode: Mode,
    guard: Guard,
) -> Result<WalkTable> {
    Ok(match mode {
        Mode::Exact => WalkTable::Exact(Table::build(s, start, n_max, guard)?),
        Mode::Scaled => WalkTable::Scaled(Table::build(s, start, n_max, guard)?),
    })
}

/// Total weight of walks of length `n`.
pub fn total_walks(t: &WalkTable, n: usize) -> Result<Count> {
    t.total(n)
}

/// Total weight of walks of length `n` ending at `end`.
pub fn excursion_count(t: &WalkTable, end: &[i64], n: usize) -> Result<Count> {
    t.count(n, end)
}

/// Largest number of sequences the brute-force oracle will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 100_000_000;

/// Enumerates every step sequence of length `n`, keeping those whose prefixes stay
/// in the orthant, and sums weight products per endpoint.
pub fn brute_force_count(s: &StepSet, start: &[i64], n: usize) -> Result<BTreeMap<Point, Rational>> {
    check_start(s, start)?;
    let needed = (s.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > BRUTE_FORCE_LIMIT {
        return Err(Error::ResourceGuard { needed, limit: BRUTE_FORCE_LIMIT });
    }
    let mut out = BTreeMap::new();
    let mut pos = start.to_vec();
    brute(s, n, &mut pos, &Rational::one(), &mut out);
    Ok(out)
}

fn brute(s: &StepSet, left: usize, pos: &mut Vec<i64>, w: &Rational, out: &mut BTreeMap<Point, Rational>) {
    if left == 0 {
        *out.entry(pos.clone()).or_insert_with(Rational::zero) += w;
        return;
    }
    for (step, sw) in s.steps().iter().zip(s.weights()) {
        for (x, c) in pos.iter_mut().zip(step) {
            *x += c;
        }
        if pos.iter().all(|&x| x >= 0) {
            brute(s, left - 1, pos, &(w * sw), out);
        }
        for (x, c) in pos.iter_mut().zip(step) {
            *x -= c;
        }
    }
}

/// A walk given by its start and step sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Walk {
    pub start: Point,
    pub steps: Vec<Vec<i64>>,
    /// Positions of the steps in the step list.
    pub indices: Vec<usize>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Positions after each step (the start excluded).
    pub fn positions(&self) -> Vec<Point> {
        let mut p = self.start.clone();
        self.steps
            .iter()
            .map(|s| {
                for (x, c) in p.iter_mut().zip(s) {
                    *x += c;
                }
                p.clone()
            })
            .collect()
    }

    pub fn endpoint(&self) -> Point {
        self.positions().pop().unwrap_or_else(|| self.start.clone())
    }

    pub fn stays_in_orthant(&self) -> bool {
        self.positions().iter().all(|p| p.iter().all(|&x| x >= 0))
    }

    pub fn weight(&self, s: &StepSet) -> Rational {
        self.indices.iter().map(|&k| s.weights()[k].clone()).product()
    }
}

/// Random access to layers for the backward sampler.
trait LayerSource<C> {
    fn layer(&mut self, k: usize) -> Result<&Layer<C>>;
}

impl<C: Tally> LayerSource<C> for &Table<C> {
    fn layer(&mut self, k: usize) -> Result<&Layer<C>> {
        Table::layer(self, k)
    }
}

/// Keeps every `every`-th layer and recomputes one segment at a time.
struct Checkpointed<C> {
    transfer: Transfer<C>,
    guard: Guard,
    every: usize,
    checkpoints: Vec<Layer<C>>,
    segment: Option<usize>,
    cache: Vec<Layer<C>>,
}

impl<C: Tally> Checkpointed<C> {
    fn new(s: &StepSet, start: &[i64], n: usize, guard: Guard) -> Result<Self> {
        let every = ((n as f64).sqrt().ceil() as usize).max(1);
        let mut stream = LayerStream::<C>::new(s, start, guard)?;
        let mut checkpoints = vec![stream.current().clone()];
        while stream.n() < n {
            stream.advance()?;
            if stream.n() % every == 0 {
                checkpoints.push(stream.current().clone());
            }
        }
        Ok(Self { transfer: stream.transfer, guard, every, checkpoints, segment: None, cache: Vec::new() })
    }
}

impl<C: Tally> LayerSource<C> for Checkpointed<C> {
    fn layer(&mut self, k: usize) -> Result<&Layer<C>> {
        let seg = k / self.every;
        if self.segment != Some(seg) {
            self.cache = vec![self.checkpoints[seg].clone()];
            self.segment = Some(seg);
        }
        let off = k - seg * self.every;
        while self.cache.len() <= off {
            let next = self.transfer.apply(self.cache.last().expect("nonempty"), &self.guard)?;
            self.cache.push(next);
        }
        Ok(&self.cache[off])
    }
}

fn sample_backward<C: Tally>(
    src: &mut dyn LayerSource<C>,
    s: &StepSet,
    weights: &[C],
    start: &[i64],
    n: usize,
    seed: u64,
) -> Result<Walk> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (cells, values): (Vec<Point>, Vec<C>) = src
        .layer(n)?
        .iter_nonzero()
        .map(|(p, v)| (p, v.clone()))
        .unzip();
    let k = C::pick(&values, &mut rng).ok_or(Error::EmptyLayer(n))?;
    let mut p = cells[k].clone();
    let mut rev = Vec::with_capacity(n);
    for len in (1..=n).rev() {
        let prev = src.layer(len - 1)?;
        let w: Vec<C> = s
            .steps()
            .iter()
            .zip(weights)
            .map(|(st, wt)| {
                let q: Point = p.iter().zip(st).map(|(x, c)| x - c).collect();
                match prev.get(&q) {
                    Some(v) if !v.is_zero() => wt.mul(v),
                    _ => C::zero(),
                }
            })
            .collect();
        let si = C::pick(&w, &mut rng).ok_or(Error::EmptyLayer(len - 1))?;
        for (x, c) in p.iter_mut().zip(&s.steps()[si]) {
            *x -= c;
        }
        rev.push(si);
    }
    debug_assert_eq!(p, start);
    rev.reverse();
    Ok(Walk {
        start: start.to_vec(),
        steps: rev.iter().map(|&k| s.steps()[k].clone()).collect(),
        indices: rev,
    })
}

/// Draws a length-`n` walk with probability proportional to its weight.
pub fn sample_walk(t: &WalkTable, n: usize, seed: u64) -> Result<Walk> {
    match t {
        WalkTable::Exact(t) => sample_table(t, n, seed),
        WalkTable::Scaled(t) => sample_table(t, n, seed),
    }
}

fn sample_table<C: Tally>(t: &Table<C>, n: usize, seed: u64) -> Result<Walk> {
    t.layer(n)?;
    let mut src = t;
    sample_backward(&mut src, &t.steps, &t.transfer.weights, &t.start, n, seed)
}

/// Same distribution as [`sample_walk`] but holds only about `2 sqrt(n)` layers.
pub fn sample_walk_streaming(
    s: &StepSet,
    start: &[i64],
    n: usize,
    mode: Mode,
    seed: u64,
    guard: Guard,
) -> Result<Walk> {
    match mode {
        Mode::Exact => sample_streaming::<BigInt>(s, start, n, seed, guard),
        Mode::Scaled => sample_streaming::<ExtFloat>(s, start, n, seed, guard),
    }
}

fn sample_streaming<C: Tally>(s: &StepSet, start: &[i64], n: usize, seed: u64, guard: Guard) -> Result<Walk> {
    let mut src = Checkpointed::<C>::new(s, start, n, guard)?;
    let weights = src.transfer.weights.clone();
    sample_backward(&mut src, s, &weights, start, n, seed)
}

fn origin(d: usize) -> Point {
    vec![0; d]
}

/// Checks `W(n, i) = beta^n prod_k alpha_k^{i_k} U(n, i)` exactly for all `n <= n_max`,
/// where `W` counts weighted walks and `U` unweighted ones, both from the origin.
pub fn check_gf_relation(s: &StepSet, dec: &CentralDecomposition, n_max: usize) -> Result<bool> {
    relation(s, dec, n_max, false)
}

/// Checks `e_a(n) = beta^n e(n)` for excursions from and to the origin.
pub fn check_excursion_relation(s: &StepSet, dec: &CentralDecomposition, n_max: usize) -> Result<bool> {
    relation(s, dec, n_max, true)
}

fn relation(s: &StepSet, dec: &CentralDecomposition, n_max: usize, origin_only: bool) -> Result<bool> {
    if !dec.reproduces(s) {
        return Err(Error::NonCentral);
    }
    let o = origin(s.dim());
    let weighted = Table::<BigInt>::build(s, &o, n_max, Guard::default())?;
    let plain = Table::<BigInt>::build(&s.uniform(), &o, n_max, Guard::default())?;
    for n in 0..=n_max {
        let points: Vec<Point> = if origin_only {
            vec![o.clone()]
        } else {
            plain.layer(n)?.iter_nonzero().map(|(p, _)| p).collect()
        };
        if !origin_only && weighted.layer(n)?.iter_nonzero().count() != points.len() {
            return Ok(false);
        }
        for p in points {
            let w = weighted.count(n, &p)?;
            let u = plain.count(n, &p)?;
            let (w, u) = (w.exact().expect("exact"), u.exact().expect("exact"));
            if u.is_zero() {
                if !w.is_zero() {
                    return Ok(false);
                }
                continue;
            }
            if !dec.scaling(n, &p).equals(s.weights(), &(w / u)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn gb(a: Rational, b: Rational) -> StepSet {
        StepSet::builtin("gb", &a, &b).unwrap()
    }

    #[test]
    fn gb_small_totals_and_excursions() {
        let t = count_walks(&gb(int(1), int(1)), &[0, 0], 4, Mode::Exact).unwrap();
        let totals: Vec<String> = (0..=3).map(|n| total_walks(&t, n).unwrap().to_string()).collect();
        assert_eq!(totals, ["1", "1", "3", "6"]);
        let exc: Vec<String> = [0, 2, 4]
            .iter()
            .map(|&n| excursion_count(&t, &[0, 0], n).unwrap().to_string())
            .collect();
        assert_eq!(exc, ["1", "1", "3"]);
        assert!(excursion_count(&t, &[0, 0], 3).unwrap().is_zero());
        assert!(matches!(total_walks(&t, 5), Err(Error::LengthOutOfRange { .. })));
    }

    #[test]
    fn weighted_first_step() {
        let t = count_walks(&gb(int(2), int(3)), &[0, 0], 1, Mode::Exact).unwrap();
        assert_eq!(t.count(1, &[1, 0]).unwrap(), Count::Exact(int(2)));
        let h = count_walks(&gb(rat(1, 2), rat(1, 2)), &[0, 0], 1, Mode::Exact).unwrap();
        assert_eq!(total_walks(&h, 1).unwrap(), Count::Exact(rat(1, 2)));
    }

    #[test]
    fn start_outside_orthant() {
        let r = count_walks(&gb(int(1), int(1)), &[-1, 0], 3, Mode::Exact);
        assert!(matches!(r, Err(Error::OutsideOrthant(_))));
    }

    #[test]
    fn brute_force_examples() {
        let m = brute_force_count(&gb(int(1), int(1)), &[0, 0], 2).unwrap();
        let want: BTreeMap<Point, Rational> =
            [(vec![0, 0], int(1)), (vec![0, 1], int(1)), (vec![2, 0], int(1))].into_iter().collect();
        assert_eq!(m, want);
        let m0 = brute_force_count(&gb(int(1), int(1)), &[3, 1], 0).unwrap();
        assert_eq!(m0.len(), 1);
        assert_eq!(m0[&vec![3, 1]], int(1));
        let tandem = StepSet::builtin("tandem", &int(1), &int(1)).unwrap();
        assert_eq!(brute_force_count(&tandem, &[0, 0], 3).unwrap()[&vec![0, 0]], int(1));
        let guard = brute_force_count(&gb(int(1), int(1)), &[0, 0], 20);
        assert!(matches!(guard, Err(Error::ResourceGuard { .. })));
    }

    #[test]
    fn scaled_matches_exact() {
        let s = gb(int(2), int(3));
        let ex = count_walks(&s, &[1, 2], 150, Mode::Exact).unwrap();
        let sc = count_walks(&s, &[1, 2], 150, Mode::Scaled).unwrap();
        for n in [0, 1, 17, 80, 150] {
            let e = total_walks(&ex, n).unwrap();
            let a = total_walks(&sc, n).unwrap();
            let err = crate::extfloat::relative_error(a.to_ext(), e.exact().unwrap());
            assert!(err < 1e-10, "n={n} err={err}");
        }
    }

    #[test]
    fn guard_aborts() {
        let r = count_walks_guarded(&gb(int(1), int(1)), &[0, 0], 100, Mode::Scaled, Guard::new(1000));
        assert!(matches!(r, Err(Error::ResourceGuard { .. })));
    }

    #[test]
    fn sampling_basics() {
        let t = count_walks(&gb(int(1), int(1)), &[0, 0], 3, Mode::Exact).unwrap();
        let w = sample_walk(&t, 1, 5).unwrap();
        assert_eq!(w.steps, vec![vec![1, 0]]);
        assert!(sample_walk(&t, 0, 5).unwrap().is_empty());
        let w3 = sample_walk(&t, 3, 11).unwrap();
        assert!(w3.stays_in_orthant());
        assert_eq!(w3, sample_walk(&t, 3, 11).unwrap());
    }

    #[test]
    fn streaming_sampler_matches_table_sampler() {
        let s = gb(int(2), int(3));
        let t = count_walks(&s, &[0, 0], 60, Mode::Scaled).unwrap();
        for seed in 0..5 {
            let a = sample_walk(&t, 60, seed).unwrap();
            let b = sample_walk_streaming(&s, &[0, 0], 60, Mode::Scaled, seed, Guard::default()).unwrap();
            assert_eq!(a, b);
        }
        let te = count_walks(&s, &[0, 0], 30, Mode::Exact).unwrap();
        let a = sample_walk(&te, 30, 9).unwrap();
        let b = sample_walk_streaming(&s, &[0, 0], 30, Mode::Exact, 9, Guard::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn relations_hold_for_gb_family() {
        let s = gb(int(2), int(3));
        let dec = crate::central::solve_central(&s).unwrap();
        assert!(check_gf_relation(&s, &dec, 8).unwrap());
        assert!(check_excursion_relation(&s, &dec, 0).unwrap());
        let bad = s.with_weights(vec![int(2), rat(1, 2), int(3), int(1)]).unwrap();
        assert_eq!(check_gf_relation(&bad, &dec, 4), Err(Error::NonCentral));
    }
}
