//! The symmetric action `S`, the chiral action `S'`, and the observables
//! `U`, `U'` evaluated by Berezin integration.
//!
//! Spins have three components per vertex. For `i = 1, 2` the component is
//! the fermion pair `(u, v) = (eta^(i), xi^(i))`; for `i = 3` it is the pair
//! of nilpotent even elements `(phi, psi) = (eta^(3) xi^(3), eta^(4) xi^(4))`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::grassmann::{berezin_product, Generator, GrassmannElement};
use crate::rational::{int, ratio, Rational};

/// Vertex ceiling for the Grassmann route (`8n` generators, exponential
/// monomial space).
pub const GRASSMANN_MAX_VERTICES: usize = 4;

/// Ceiling for the symbolic `exp(S') = product form` check.
pub const SYMBOLIC_CHECK_MAX_VERTICES: usize = 3;

pub const COLOURS: [usize; 3] = [1, 2, 3];

/// `u^(i)_x`.
pub fn u(i: usize, x: usize) -> GrassmannElement {
    match i {
        1 | 2 => GrassmannElement::generator(Generator::eta(x, i)),
        3 => GrassmannElement::product_of(&[Generator::eta(x, 3), Generator::xi(x, 3)]),
        _ => panic!("spin component {i} out of range"),
    }
}

/// `v^(i)_x`.
pub fn v(i: usize, x: usize) -> GrassmannElement {
    match i {
        1 | 2 => GrassmannElement::generator(Generator::xi(x, i)),
        3 => GrassmannElement::product_of(&[Generator::eta(x, 4), Generator::xi(x, 4)]),
        _ => panic!("spin component {i} out of range"),
    }
}

fn product(factors: &[GrassmannElement]) -> GrassmannElement {
    factors.iter().fold(GrassmannElement::one(), |acc, f| &acc * f)
}

/// `sigma^(i)_x . sigma^(i)_y = u_x v_y + u_y v_x`.
pub fn spin_dot(i: usize, x: usize, y: usize) -> GrassmannElement {
    &(&u(i, x) * &v(i, y)) + &(&u(i, y) * &v(i, x))
}

/// `sigma_x . sigma_y`, summed over the three components.
pub fn spin_dot_all(x: usize, y: usize) -> GrassmannElement {
    COLOURS
        .iter()
        .fold(GrassmannElement::zero(), |acc, &i| &acc + &spin_dot(i, x, y))
}

/// The tau-field of a graph.
pub struct TauField<'g> {
    graph: &'g WeightedGraph,
}

impl<'g> TauField<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Self {
        TauField { graph }
    }

    /// `tau^(i)_xy = beta_xy sigma^(i)_x . sigma^(i)_y`.
    pub fn tau(&self, i: usize, x: usize, y: usize) -> GrassmannElement {
        spin_dot(i, x, y).scale(&self.graph.beta(x, y))
    }

    /// `sum_y tau^(i)_xy`.
    pub fn divergence(&self, i: usize, x: usize) -> GrassmannElement {
        self.graph
            .neighbours(x)
            .iter()
            .fold(GrassmannElement::zero(), |acc, (y, _)| &acc + &self.tau(i, x, *y))
    }

    /// `(div tau)^2_x = sum_i (sum_y tau^(i)_xy)^2`.
    pub fn divergence_squared(&self, x: usize) -> GrassmannElement {
        COLOURS.iter().fold(GrassmannElement::zero(), |acc, &i| {
            let d = self.divergence(i, x);
            &acc + &(&d * &d)
        })
    }

    /// `tau'_x = sum_i sum_y beta_xy v^(i)_y u^(i)_x`.
    pub fn chiral(&self, x: usize) -> GrassmannElement {
        let mut out = GrassmannElement::zero();
        for &i in &COLOURS {
            for (y, b) in self.graph.neighbours(x) {
                out = &out + &(&v(i, *y) * &u(i, x)).scale(b);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermKind {
    /// `S_0(i; x)`
    Diagonal { colour: usize },
    /// `S_1(i; x, y)`
    Hop { colour: usize, to: usize },
    /// `S_4(i, j; x, y)`
    Four { colours: (usize, usize), ends: [usize; 4] },
    /// `S_6(x, y)`
    Six { ends: [usize; 6] },
}

/// One summand of the decomposed symmetric action: `coefficient * element`.
#[derive(Debug, Clone)]
pub struct ActionTerm {
    pub centre: usize,
    pub kind: TermKind,
    pub coefficient: Rational,
    pub element: GrassmannElement,
}

impl ActionTerm {
    pub fn weighted(&self) -> GrassmannElement {
        self.element.scale(&self.coefficient)
    }
}

/// `v^(i)_{y1} u^(i)_x v^(i)_x u^(i)_{y2}`, the local piece shared by `S_4`
/// and `S_6`.
fn through(i: usize, x: usize, y_in: usize, y_out: usize) -> GrassmannElement {
    product(&[v(i, y_in), u(i, x), v(i, x), u(i, y_out)])
}

/// The decomposition `S = sum S_0 + sum S_1 - sum S_4 + 2 sum S_6`.
#[derive(Debug, Clone)]
pub struct SymmetricActionTerms {
    pub terms: Vec<ActionTerm>,
}

impl SymmetricActionTerms {
    pub fn new(g: &WeightedGraph) -> Self {
        let mut terms = Vec::new();
        for x in 0..g.len() {
            let nbrs: Vec<(usize, Rational)> = g.neighbours(x).to_vec();
            for &i in &COLOURS {
                terms.push(ActionTerm {
                    centre: x,
                    kind: TermKind::Diagonal { colour: i },
                    coefficient: Rational::one(),
                    element: (&u(i, x) * &v(i, x)).scale(g.mass(x)),
                });
            }
            for &i in &COLOURS {
                for (y, b) in &nbrs {
                    terms.push(ActionTerm {
                        centre: x,
                        kind: TermKind::Hop { colour: i, to: *y },
                        coefficient: Rational::one(),
                        element: (&v(i, *y) * &u(i, x)).scale(b),
                    });
                }
            }
            for &i in &COLOURS {
                for &j in &COLOURS {
                    if i == j {
                        // contains u^(i)_x twice
                        continue;
                    }
                    for_each_tuple::<4>(&nbrs, |ends, weight| {
                        let element = &through(i, x, ends[0], ends[1]) * &through(j, x, ends[2], ends[3]);
                        terms.push(ActionTerm {
                            centre: x,
                            kind: TermKind::Four { colours: (i, j), ends },
                            coefficient: int(-1),
                            element: element.scale(&weight),
                        });
                    });
                }
            }
            for_each_tuple::<6>(&nbrs, |ends, weight| {
                let element = product(&[
                    through(1, x, ends[0], ends[1]),
                    through(2, x, ends[2], ends[3]),
                    through(3, x, ends[4], ends[5]),
                ]);
                terms.push(ActionTerm {
                    centre: x,
                    kind: TermKind::Six { ends },
                    coefficient: int(2),
                    element: element.scale(&weight),
                });
            });
        }
        SymmetricActionTerms { terms }
    }

    pub fn sum(&self) -> GrassmannElement {
        let mut out = GrassmannElement::zero();
        for t in &self.terms {
            for (m, c) in t.element.terms() {
                out.add_term(m, c * &t.coefficient);
            }
        }
        out
    }

    /// `prod_t (1 + coefficient_t * t)` over the terms centred at `x`.
    pub fn local_exponential(&self, x: usize) -> GrassmannElement {
        self.terms
            .iter()
            .filter(|t| t.centre == x)
            .fold(GrassmannElement::one(), |acc, t| {
                &acc * &(&GrassmannElement::one() + &t.weighted())
            })
    }
}

/// Calls `f(ends, prod_k beta_{x ends[k]})` for every `K`-tuple of
/// positive-weight neighbours.
fn for_each_tuple<const K: usize>(nbrs: &[(usize, Rational)], mut f: impl FnMut([usize; K], Rational)) {
    if nbrs.is_empty() {
        return;
    }
    let mut idx = [0usize; K];
    loop {
        let ends = idx.map(|k| nbrs[k].0);
        let weight = idx.iter().fold(Rational::one(), |acc, &k| acc * &nbrs[k].1);
        f(ends, weight);
        let mut pos = K;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < nbrs.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `S` written out term by term from its definition via the tau-field.
pub fn action_s_from_definition(g: &WeightedGraph) -> GrassmannElement {
    let tau = TauField::new(g);
    let half = ratio(1, 2);
    let mut total = GrassmannElement::zero();
    for x in 0..g.len() {
        let mut local = spin_dot_all(x, x).scale(g.mass(x));
        for (y, _) in g.neighbours(x) {
            let hop = &(&tau.tau(3, x, *y) - &tau.tau(1, x, *y)) - &tau.tau(2, x, *y);
            local = &local + &hop;
        }
        let d = tau.divergence_squared(x);
        let d2 = &d * &d;
        let d3 = &d2 * &d;
        local = &local - &d2.scale(&half);
        local = &local + &d3.scale(&ratio(1, 12));
        total = &total + &local.scale(&half);
    }
    total
}

/// The symmetric action, built from its definition and from the term
/// decomposition; the two must agree exactly.
pub fn build_action_s(g: &WeightedGraph) -> Result<GrassmannElement> {
    check_size(g)?;
    let direct = action_s_from_definition(g);
    let decomposed = SymmetricActionTerms::new(g).sum();
    if direct != decomposed {
        let diff = &direct - &decomposed;
        return Err(Error::ConstructionMismatch(format!(
            "S differs from its decomposition in {} monomials",
            diff.len()
        )));
    }
    Ok(direct)
}

/// `S' = 1/2 sum_x (r_x sigma_x.sigma_x + 2 tau'_x - tau'_x^2 + 2/3 tau'_x^3)`.
pub fn action_sprime_from_definition(g: &WeightedGraph) -> GrassmannElement {
    let tau = TauField::new(g);
    let half = ratio(1, 2);
    let mut total = GrassmannElement::zero();
    for x in 0..g.len() {
        let t = tau.chiral(x);
        let t2 = &t * &t;
        let t3 = &t2 * &t;
        let local = &(&(&spin_dot_all(x, x).scale(g.mass(x)) + &t.scale(&int(2))) - &t2)
            + &t3.scale(&ratio(2, 3));
        total = &total + &local.scale(&half);
    }
    total
}

/// The factors of `exp(S')`: for each vertex,
/// `prod_i (1 + r_x u^(i)_x v^(i)_x) * (1 + tau'_x)`.
#[derive(Debug, Clone)]
pub struct ChiralActionTerms {
    pub local: Vec<GrassmannElement>,
}

impl ChiralActionTerms {
    pub fn new(g: &WeightedGraph) -> Self {
        let tau = TauField::new(g);
        let local = (0..g.len())
            .map(|x| {
                let diag = COLOURS.iter().fold(GrassmannElement::one(), |acc, &i| {
                    &acc * &(&GrassmannElement::one() + &(&u(i, x) * &v(i, x)).scale(g.mass(x)))
                });
                &diag * &(&GrassmannElement::one() + &tau.chiral(x))
            })
            .collect();
        ChiralActionTerms { local }
    }

    pub fn product(&self) -> GrassmannElement {
        product(&self.local)
    }
}

/// The chiral action. On graphs with at most
/// [`SYMBOLIC_CHECK_MAX_VERTICES`] vertices, also checks that its
/// exponential equals the product form.
pub fn build_action_sprime(g: &WeightedGraph) -> Result<GrassmannElement> {
    check_size(g)?;
    let action = action_sprime_from_definition(g);
    if g.len() <= SYMBOLIC_CHECK_MAX_VERTICES {
        let exp = action.exp_even()?;
        let factored = ChiralActionTerms::new(g).product();
        if exp != factored {
            return Err(Error::ConstructionMismatch(
                "exp(S') differs from its product form".into(),
            ));
        }
    }
    Ok(action)
}

fn check_size(g: &WeightedGraph) -> Result<()> {
    if g.len() > GRASSMANN_MAX_VERTICES {
        return Err(Error::TooLarge {
            method: "grassmann",
            vertices: g.len(),
            limit: GRASSMANN_MAX_VERTICES,
        });
    }
    Ok(())
}

fn check_triple(g: &WeightedGraph, a: usize, b: usize, c: usize) -> Result<()> {
    if a == b || b == c || a == c {
        return Err(Error::NotDistinct);
    }
    if a.max(b).max(c) >= g.len() {
        return Err(Error::Invalid("vertex index out of range".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    Symmetric,
    Chiral,
}

/// A spin system ready for Berezin integration: `exp(action)` held as one
/// even factor per vertex.
#[derive(Debug, Clone)]
pub struct SpinModel {
    pub kind: ActionKind,
    n: usize,
    factors: Vec<GrassmannElement>,
}

impl SpinModel {
    pub fn symmetric(g: &WeightedGraph) -> Result<Self> {
        build_action_s(g)?;
        let terms = SymmetricActionTerms::new(g);
        let factors = (0..g.len()).map(|x| terms.local_exponential(x)).collect();
        Ok(SpinModel { kind: ActionKind::Symmetric, n: g.len(), factors })
    }

    pub fn chiral(g: &WeightedGraph) -> Result<Self> {
        build_action_sprime(g)?;
        let factors = ChiralActionTerms::new(g).local;
        Ok(SpinModel { kind: ActionKind::Chiral, n: g.len(), factors })
    }

    pub fn factors(&self) -> &[GrassmannElement] {
        &self.factors
    }

    /// `int prefactor * exp(action)`.
    pub fn integrate(&self, prefactor: &GrassmannElement) -> Rational {
        berezin_product(prefactor, &self.factors, self.n)
    }

    pub fn partition(&self) -> Rational {
        self.integrate(&GrassmannElement::one())
    }

    /// Numerator of the observable: `int u2_c v2_b u3_b v3_b u1_b v1_a e^S`
    /// for the symmetric action, `int u2_c v2_b u1_b v1_a e^S'` for the
    /// chiral one.
    pub fn numerator(&self, a: usize, b: usize, c: usize) -> Rational {
        self.integrate(&observable_insertion(self.kind, a, b, c))
    }
}

pub fn observable_insertion(kind: ActionKind, a: usize, b: usize, c: usize) -> GrassmannElement {
    match kind {
        ActionKind::Symmetric => product(&[u(2, c), v(2, b), u(3, b), v(3, b), u(1, b), v(1, a)]),
        ActionKind::Chiral => product(&[u(2, c), v(2, b), u(1, b), v(1, a)]),
    }
}

/// `C_bc = m^2_c r_b^2`.
pub fn c_bc(g: &WeightedGraph, b: usize, c: usize) -> Rational {
    g.kill(c) * g.mass(b) * g.mass(b)
}

/// `C'_bc = m^2_c r_b`.
pub fn c_bc_prime(g: &WeightedGraph, b: usize, c: usize) -> Rational {
    g.kill(c) * g.mass(b)
}

pub fn partition_z(g: &WeightedGraph) -> Result<Rational> {
    Ok(SpinModel::symmetric(g)?.partition())
}

pub fn partition_zprime(g: &WeightedGraph) -> Result<Rational> {
    Ok(SpinModel::chiral(g)?.partition())
}

/// `U(a, b, c) = C_bc <u2_c v2_b u3_b v3_b u1_b v1_a>`.
pub fn observable_u(g: &WeightedGraph, a: usize, b: usize, c: usize) -> Result<Rational> {
    check_triple(g, a, b, c)?;
    let model = SpinModel::symmetric(g)?;
    Ok(observable_from(&model, g, a, b, c))
}

/// `U'(a, b, c) = C'_bc <u2_c v2_b u1_b v1_a>'`; requires `m^2_c > 0`.
pub fn observable_uprime(g: &WeightedGraph, a: usize, b: usize, c: usize) -> Result<Rational> {
    check_triple(g, a, b, c)?;
    if g.kill(c).is_zero() {
        return Err(Error::ZeroKilling(g.name(c).to_string()));
    }
    let model = SpinModel::chiral(g)?;
    Ok(observable_from(&model, g, a, b, c))
}

/// The normalised observable for a prepared model; zero when `C_bc = 0`.
pub fn observable_from(model: &SpinModel, g: &WeightedGraph, a: usize, b: usize, c: usize) -> Rational {
    let constant = match model.kind {
        ActionKind::Symmetric => c_bc(g, b, c),
        ActionKind::Chiral => c_bc_prime(g, b, c),
    };
    if constant.is_zero() {
        return Rational::zero();
    }
    constant * model.numerator(a, b, c) / model.partition()
}
