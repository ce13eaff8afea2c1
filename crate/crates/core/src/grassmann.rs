//! Sparse exterior algebra over the rationals.
//!
//! Each vertex carries eight anticommuting generators `eta^(i)_x, xi^(i)_x`
//! for fields `i = 1..4`. Generators are totally ordered by vertex, then
//! field, then `eta` before `xi`; bit `8x + 2(i-1) + k` of a monomial mask
//! stands for the generator with kind `k` (0 = eta, 1 = xi). A mask denotes
//! the product of its generators in increasing order.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

pub type Mask = u64;

/// Largest vertex count whose generators fit in a [`Mask`].
pub const MAX_VERTICES: usize = 8;
pub const FIELDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Eta,
    Xi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub vertex: usize,
    /// 1..=4
    pub field: usize,
    pub kind: Kind,
}

impl Generator {
    pub fn eta(vertex: usize, field: usize) -> Self {
        Generator { vertex, field, kind: Kind::Eta }
    }

    pub fn xi(vertex: usize, field: usize) -> Self {
        Generator { vertex, field, kind: Kind::Xi }
    }

    pub fn bit(self) -> u32 {
        assert!(self.vertex < MAX_VERTICES, "vertex {} beyond generator capacity", self.vertex);
        assert!((1..=FIELDS).contains(&self.field), "field {} out of range", self.field);
        let kind = match self.kind {
            Kind::Eta => 0,
            Kind::Xi => 1,
        };
        (8 * self.vertex + 2 * (self.field - 1) + kind) as u32
    }

    pub fn from_bit(bit: u32) -> Self {
        let b = bit as usize;
        Generator {
            vertex: b / 8,
            field: (b % 8) / 2 + 1,
            kind: if b % 2 == 0 { Kind::Eta } else { Kind::Xi },
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            Kind::Eta => "eta",
            Kind::Xi => "xi",
        };
        write!(f, "{k}{}_{}", self.field, self.vertex)
    }
}

/// Mask of all `8n` generators of `n` vertices.
pub fn top_mask(n_vertices: usize) -> Mask {
    assert!(n_vertices <= MAX_VERTICES);
    if n_vertices == MAX_VERTICES {
        Mask::MAX
    } else {
        (1 << (8 * n_vertices)) - 1
    }
}

/// Sign of `A * B` for disjoint monomials: `(-1)^(#{(a, b) : a in A, b in B, a > b})`.
pub fn merge_sign(a: Mask, b: Mask) -> bool {
    let mut rest = b;
    let mut parity = 0u32;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if bit == 63 { 0 } else { a >> (bit + 1) };
        parity ^= above.count_ones() & 1;
    }
    parity == 1
}

/// An element of the algebra: monomial mask -> nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GrassmannElement {
    terms: HashMap<Mask, Rational>,
}

impl GrassmannElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(Rational::one())
    }

    pub fn scalar(c: Rational) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(mask: Mask, c: Rational) -> Self {
        let mut terms = HashMap::new();
        if !c.is_zero() {
            terms.insert(mask, c);
        }
        GrassmannElement { terms }
    }

    pub fn generator(g: Generator) -> Self {
        Self::monomial(1 << g.bit(), Rational::one())
    }

    /// Ordered product of generators, e.g. `[eta, xi]` gives `eta * xi`.
    pub fn product_of(gens: &[Generator]) -> Self {
        gens.iter()
            .fold(Self::one(), |acc, g| &acc * &Self::generator(*g))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: Mask) -> Rational {
        self.terms.get(&mask).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mask, &Rational)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    /// Terms sorted by mask, for deterministic iteration.
    pub fn sorted_terms(&self) -> Vec<(Mask, Rational)> {
        let mut out: Vec<_> = self.terms.iter().map(|(m, c)| (*m, c.clone())).collect();
        out.sort_by_key(|(m, _)| *m);
        out
    }

    /// Union of the generator sets of all terms.
    pub fn support(&self) -> Mask {
        self.terms.keys().fold(0, |acc, m| acc | m)
    }

    pub fn add_term(&mut self, mask: Mask, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mask).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        GrassmannElement {
            terms: self.terms.iter().map(|(m, x)| (*m, x * c)).collect(),
        }
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 1)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                let c = x * y;
                out.add_term(a | b, if merge_sign(*a, *b) { -c } else { c });
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    /// `exp(A)` for even `A` with zero constant term.
    ///
    /// Every monomial of an even element is even and squares to zero, and
    /// even monomials commute, so `exp(sum_m c_m m) = prod_m (1 + c_m m)`.
    pub fn exp_even(&self) -> Result<Self> {
        self.check_even_nilpotent()?;
        let mut acc = Self::one();
        for (mask, c) in self.sorted_terms() {
            let mut next = acc.clone();
            for (a, x) in &acc.terms {
                if a & mask == 0 {
                    let v = x * &c;
                    next.add_term(a | mask, if merge_sign(*a, mask) { -v } else { v });
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    /// `exp(A)` by its truncated power series `sum_k A^k / k!`, which
    /// terminates because `A` is nilpotent.
    pub fn exp_series(&self) -> Result<Self> {
        self.check_even_nilpotent()?;
        let mut acc = Self::one();
        let mut power = Self::one();
        let mut k = 0u32;
        loop {
            k += 1;
            power = &power * self;
            if power.is_zero() {
                return Ok(acc);
            }
            let inv_fact = Rational::new(1.into(), (1..=k).fold(num_bigint::BigInt::one(), |a, i| a * i));
            acc = &acc + &power.scale(&inv_fact);
        }
    }

    fn check_even_nilpotent(&self) -> Result<()> {
        if !self.is_even() || !self.constant_term().is_zero() {
            return Err(Error::NotEvenNilpotent);
        }
        Ok(())
    }

    /// The Berezin integral over all generators of `n_vertices` vertices.
    ///
    /// Applies `prod_x prod_{i=1..4} d/d xi^(i)_x d/d eta^(i)_x` (rightmost
    /// derivative first, left derivatives). Each pair `d_xi d_eta` removes
    /// the even pair `eta xi`, so the operator maps the canonically ordered
    /// top monomial to `+1` and every lower-degree monomial to 0: the
    /// integral is the coefficient of the top mask.
    pub fn berezin(&self, n_vertices: usize) -> Rational {
        self.coefficient(top_mask(n_vertices))
    }

    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.sorted_terms()
            .iter()
            .map(|(m, c)| {
                let gens: Vec<String> = (0..64)
                    .filter(|b| m >> b & 1 == 1)
                    .map(|b| Generator::from_bit(b).to_string())
                    .collect();
                if gens.is_empty() {
                    format_rational(c)
                } else {
                    format!("{}*{}", format_rational(c), gens.join("*"))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Berezin integral of `prefactor * prod_k factors[k]` over `n_vertices`
/// vertices, without forming the full product.
///
/// The factors must be even so their order is immaterial. Only the
/// coefficient of the top mask is wanted, so the product is accumulated
/// with two prunings:
///
/// 1. For a prefactor monomial `p`, the factors must supply exactly the
///    complement `T` of `p`. A partial product monomial `m` only gains
///    generators as further factors multiply in, so if `m` is not a subset
///    of `T` no extension of it reaches `T`.
/// 2. If some generator of `T \ m` occurs in none of the factors still to be
///    multiplied, no extension of `m` can contain it, so `m` cannot reach `T`.
///
/// Both rules drop only monomials whose every extension has zero
/// coefficient on `T`, so the top coefficient is unchanged. The last factor
/// is applied by looking up the one complementary monomial directly.
pub fn berezin_product(
    prefactor: &GrassmannElement,
    factors: &[GrassmannElement],
    n_vertices: usize,
) -> Rational {
    let top = top_mask(n_vertices);
    debug_assert!(factors.iter().all(GrassmannElement::is_even));
    // support of factors[k..]
    let mut suffix_support = vec![0 as Mask; factors.len() + 1];
    for k in (0..factors.len()).rev() {
        suffix_support[k] = suffix_support[k + 1] | factors[k].support();
    }

    let mut total = Rational::zero();
    for (p, pc) in prefactor.sorted_terms() {
        if p & !top != 0 {
            continue;
        }
        let target = top & !p;
        let Some(coef) = coefficient_of_product(factors, &suffix_support, target) else {
            continue;
        };
        let term = pc * coef;
        total += if merge_sign(p, target) { -term } else { term };
    }
    total
}

/// Coefficient of `target` in `prod_k factors[k]`, with the prunings
/// described on [`berezin_product`]. `None` means zero.
fn coefficient_of_product(factors: &[GrassmannElement], suffix_support: &[Mask], target: Mask) -> Option<Rational> {
    if target & !suffix_support[0] != 0 {
        return None;
    }
    let Some((last, init)) = factors.split_last() else {
        return (target == 0).then(Rational::one);
    };
    let mut acc: HashMap<Mask, Rational> = HashMap::from([(0, Rational::one())]);
    for (k, factor) in init.iter().enumerate() {
        let later = suffix_support[k + 1];
        let mut next: HashMap<Mask, Rational> = HashMap::with_capacity(acc.len() * 2);
        for (m, x) in &acc {
            for (f, y) in &factor.terms {
                if m & f != 0 {
                    continue;
                }
                let joined = m | f;
                if joined & !target != 0 || (target & !joined) & !later != 0 {
                    continue;
                }
                let v = x * y;
                let v = if merge_sign(*m, *f) { -v } else { v };
                let entry = next.entry(joined).or_insert_with(Rational::zero);
                *entry += v;
            }
        }
        next.retain(|_, v| !v.is_zero());
        if next.is_empty() {
            return None;
        }
        acc = next;
    }
    let mut total = Rational::zero();
    for (m, x) in &acc {
        let need = target & !m;
        if let Some(y) = last.terms.get(&need) {
            let v = x * y;
            total += if merge_sign(*m, need) { -v } else { v };
        }
    }
    (!total.is_zero()).then_some(total)
}

impl Add for &GrassmannElement {
    type Output = GrassmannElement;
    fn add(self, rhs: &GrassmannElement) -> GrassmannElement {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &GrassmannElement {
    type Output = GrassmannElement;
    fn sub(self, rhs: &GrassmannElement) -> GrassmannElement {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl Neg for &GrassmannElement {
    type Output = GrassmannElement;
    fn neg(self) -> GrassmannElement {
        self.scale(&-Rational::one())
    }
}

impl Mul for &GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: &GrassmannElement) -> GrassmannElement {
        GrassmannElement::mul(self, rhs)
    }
}
