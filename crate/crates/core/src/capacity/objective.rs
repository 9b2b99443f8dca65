//! Single-letter objectives on flattened joint tables.
//!
//! Tables are row-major: `q[u * |X| + x]` for `Q_{U,X}` and
//! `q[(v * |U| + u) * |X| + x]` for `Q_{V,U,X}`. Tables need not be
//! normalized; every quantity scales linearly with the total mass.

use crate::info::mi_dense;
use crate::prob::{averaged_unchecked, Avwtc, Dmc};

use super::constraint::{ConstraintSet, Domain};
use super::optimize::Objective;

/// `I(U;Y)` for `U -> X -> Y` through `w`.
pub(crate) fn mi_through(q_ux: &[f64], nu: usize, w: &Dmc) -> f64 {
    let (nx, ny) = (w.input_size(), w.output_size());
    let mut p = vec![0.0; nu * ny];
    for u in 0..nu {
        for x in 0..nx {
            let q = q_ux[u * nx + x];
            if q == 0.0 {
                continue;
            }
            for (slot, wv) in p[u * ny..(u + 1) * ny].iter_mut().zip(w.row(x)) {
                *slot += q * wv;
            }
        }
    }
    mi_dense(nu, ny, &p)
}

/// `I(U;Z|S=s)` for every state.
pub(crate) fn leakage_per_state(q_ux: &[f64], nu: usize, ch: &Avwtc) -> Vec<f64> {
    ch.eaves().iter().map(|v| mi_through(q_ux, nu, v)).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `I(U;Y) - I(U;Z|S)` with `Y` through the averaged main channel.
pub(crate) fn thm1_value(q_ux: &[f64], nu: usize, ch: &Avwtc, q_s: &[f64]) -> f64 {
    let w = averaged_unchecked(ch.main(), q_s);
    mi_through(q_ux, nu, &w) - dot(q_s, &leakage_per_state(q_ux, nu, ch))
}

pub(crate) struct Thm1<'a> {
    pub ch: &'a Avwtc,
    pub nu: usize,
    pub q_s: &'a [f64],
    pub w: Dmc,
}

impl<'a> Thm1<'a> {
    pub fn new(ch: &'a Avwtc, q_s: &'a [f64]) -> Self {
        Self { ch, nu: ch.input_size(), q_s, w: averaged_unchecked(ch.main(), q_s) }
    }
}

impl Objective for Thm1<'_> {
    type Ctx = ();
    fn eval(&self, q: &[f64]) -> (f64, ()) {
        (self.local(q, &()), ())
    }
    fn local(&self, q: &[f64], _: &()) -> f64 {
        mi_through(q, self.nu, &self.w) - dot(self.q_s, &leakage_per_state(q, self.nu, self.ch))
    }
}

/// `min_{Q in set} I_Q(U;Y) - max_{Q in set} I_Q(U;Z|S)`.
pub(crate) struct Thm2<'a> {
    pub ch: &'a Avwtc,
    pub set: &'a ConstraintSet,
    pub domain: Domain,
    pub nu: usize,
}

pub(crate) struct Thm2Ctx {
    pub w: Dmc,
    pub min_state: Vec<f64>,
    pub max_state: Vec<f64>,
}

impl<'a> Thm2<'a> {
    pub fn new(ch: &'a Avwtc, set: &'a ConstraintSet, resolution: usize) -> Self {
        Self { ch, set, domain: set.domain(resolution), nu: ch.input_size() }
    }
}

impl Objective for Thm2<'_> {
    type Ctx = Thm2Ctx;
    fn eval(&self, q: &[f64]) -> (f64, Thm2Ctx) {
        let inner = self.domain.minimize(|qs| mi_through(q, self.nu, &averaged_unchecked(self.ch.main(), qs)));
        let (leak, max_state) = self.set.linear_max(&leakage_per_state(q, self.nu, self.ch));
        let w = averaged_unchecked(self.ch.main(), &inner.argmin);
        (inner.value - leak, Thm2Ctx { w, min_state: inner.argmin, max_state })
    }
    fn local(&self, q: &[f64], ctx: &Thm2Ctx) -> f64 {
        mi_through(q, self.nu, &ctx.w) - dot(&ctx.max_state, &leakage_per_state(q, self.nu, self.ch))
    }
}

/// `inf_{Q in set} [I(U;Y|V) - I(U;S,Z|V)]` over `Q_{V,U,X}` tables.
pub(crate) struct Thm3<'a> {
    pub ch: &'a Avwtc,
    pub domain: Domain,
    pub nu: usize,
}

pub(crate) struct Thm3Ctx {
    pub w: Dmc,
    pub min_state: Vec<f64>,
    pub grid_gap: f64,
}

impl Thm3<'_> {
    fn block(&self) -> usize {
        self.nu * self.ch.input_size()
    }

    /// `sum_v I(U;Y|V=v) P(v)` through `w`.
    fn main_term(&self, q: &[f64], w: &Dmc) -> f64 {
        q.chunks(self.block()).map(|slice| mi_through(slice, self.nu, w)).sum()
    }

    /// `I(U;Z|S=s,V)` for every state.
    fn leak_terms(&self, q: &[f64]) -> Vec<f64> {
        self.ch
            .eaves()
            .iter()
            .map(|v| q.chunks(self.block()).map(|slice| mi_through(slice, self.nu, v)).sum())
            .collect()
    }
}

impl<'a> Thm3<'a> {
    pub fn new(ch: &'a Avwtc, set: &ConstraintSet, resolution: usize) -> Self {
        Self { ch, domain: set.domain(resolution), nu: ch.input_size() }
    }
}

impl Objective for Thm3<'_> {
    type Ctx = Thm3Ctx;
    fn eval(&self, q: &[f64]) -> (f64, Thm3Ctx) {
        let leak = self.leak_terms(q);
        let inner = self.domain.minimize(|qs| {
            self.main_term(q, &averaged_unchecked(self.ch.main(), qs)) - dot(qs, &leak)
        });
        let w = averaged_unchecked(self.ch.main(), &inner.argmin);
        let gap = (inner.grid_value - inner.value).max(0.0);
        (inner.value, Thm3Ctx { w, min_state: inner.argmin, grid_gap: gap })
    }
    fn local(&self, q: &[f64], ctx: &Thm3Ctx) -> f64 {
        self.main_term(q, &ctx.w) - dot(&ctx.min_state, &self.leak_terms(q))
    }
}
