use crate::error::{Error, Result};
use crate::model::{likelihood, Outcome};
use crate::posterior::{Posterior, RawMoments};

pub const DEFAULT_GRID_SIZE: usize = 10_000;

/// Posterior sampled at the cell midpoints `ω_j = (j + ½)/G` of a uniform
/// grid on `[0, 1]`. Supports arbitrary real evolution times.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPosterior {
    values: Vec<f64>,
}

impl GridPosterior {
    pub fn flat_prior(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 points, got {size}")));
        }
        Ok(Self { values: vec![1.0; size] })
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn midpoint(&self, j: usize) -> f64 {
        midpoint(j, self.values.len())
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        let g = self.values.len();
        (0..g).map(move |j| midpoint(j, g))
    }

    pub fn grid_update(&self, t: f64, outcome: Outcome) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("evolution time must be non-negative, got {t}")));
        }
        let g = self.values.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v * likelihood(t, midpoint(j, g), outcome))
            .collect();
        Ok(Self { values })
    }
}

#[inline]
fn midpoint(j: usize, g: usize) -> f64 {
    (j as f64 + 0.5) / g as f64
}

impl Posterior for GridPosterior {
    fn update(&self, t: f64, outcome: Outcome) -> Result<Self> {
        self.grid_update(t, outcome)
    }

    fn raw_moments(&self) -> RawMoments {
        let g = self.values.len();
        let h = 1.0 / g as f64;
        let (s0, s1, s2) = self.values.iter().enumerate().fold((0.0, 0.0, 0.0), |(a, b, c), (j, &v)| {
            let x = midpoint(j, g) - 0.5;
            (a + v, b + v * x, c + v * x * x)
        });
        RawMoments { mass: s0 * h, first: s1 * h, second: s2 * h }
    }
}

/// Exact outcome-tree expected variance on a midpoint grid, with the
/// per-measurement likelihoods tabulated once and each tree node built by a
/// single pass over its parent.
///
/// Returns `(E[V], Σ P(r))` with both sums compensated.
pub(crate) fn tree_expected_variance(times: &[f64], size: usize) -> Result<(f64, f64)> {
    if size < 2 {
        return Err(Error::Domain(format!("grid needs at least 2 points, got {size}")));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Domain(format!("evolution time must be non-negative, got {t}")));
    }
    let h = 1.0 / size as f64;
    let omega: Vec<f64> = (0..size).map(|j| midpoint(j, size)).collect();
    let plus: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| omega.iter().map(|&w| likelihood(t, w, Outcome::Plus)).collect())
        .collect();
    // Moments are taken about ½, matching `RawMoments`.
    let omega: Vec<f64> = omega.iter().map(|w| w - 0.5).collect();
    let omega_sq: Vec<f64> = omega.iter().map(|x| x * x).collect();

    let mut walk = TreeWalk {
        plus: &plus,
        omega: &omega,
        omega_sq: &omega_sq,
        h,
        ev: crate::numeric::CompensatedSum::new(),
        mass: crate::numeric::CompensatedSum::new(),
        scratch: vec![Vec::with_capacity(size); times.len()],
    };
    let prior = vec![1.0; size];
    let root = RawMoments {
        mass: size as f64 * h,
        first: omega.iter().sum::<f64>() * h,
        second: omega_sq.iter().sum::<f64>() * h,
    };
    if times.is_empty() {
        return Ok((root.weighted_variance(), root.mass));
    }
    walk.descend(0, &prior, root);
    Ok((walk.ev.value(), walk.mass.value()))
}

struct TreeWalk<'a> {
    plus: &'a [Vec<f64>],
    omega: &'a [f64],
    omega_sq: &'a [f64],
    h: f64,
    ev: crate::numeric::CompensatedSum,
    mass: crate::numeric::CompensatedSum,
    scratch: Vec<Vec<f64>>,
}

impl TreeWalk<'_> {
    fn leaf(&mut self, m: RawMoments) {
        self.mass.add(m.mass);
        self.ev.add(m.weighted_variance());
    }

    /// `node` is the posterior after `depth` measurements and `raw` its moments.
    fn descend(&mut self, depth: usize, node: &[f64], raw: RawMoments) {
        let like = &self.plus[depth];
        let last = depth + 1 == self.plus.len();
        let mut child = std::mem::take(&mut self.scratch[depth]);
        let plus_raw = if last {
            self.weighted_sums(node, like)
        } else {
            child.clear();
            child.extend(node.iter().zip(like).map(|(v, l)| v * l));
            self.sums(&child)
        };
        let minus_raw = raw - plus_raw;
        if last {
            self.leaf(plus_raw);
            self.leaf(minus_raw);
        } else {
            if plus_raw.mass > 0.0 {
                self.descend(depth + 1, &child, plus_raw);
            }
            // Minus child in place: node − plus child.
            for (c, v) in child.iter_mut().zip(node) {
                *c = v - *c;
            }
            if minus_raw.mass > 0.0 {
                self.descend(depth + 1, &child, minus_raw);
            }
        }
        self.scratch[depth] = child;
    }

    fn sums(&self, v: &[f64]) -> RawMoments {
        let (s0, s1, s2) = dot3(v, None, self.omega, self.omega_sq);
        RawMoments { mass: s0 * self.h, first: s1 * self.h, second: s2 * self.h }
    }

    fn weighted_sums(&self, v: &[f64], like: &[f64]) -> RawMoments {
        let (s0, s1, s2) = dot3(v, Some(like), self.omega, self.omega_sq);
        RawMoments { mass: s0 * self.h, first: s1 * self.h, second: s2 * self.h }
    }
}

/// `(Σ p, Σ p ω, Σ p ω²)` with `p = v·l`, four independent lanes.
fn dot3(v: &[f64], l: Option<&[f64]>, w: &[f64], w2: &[f64]) -> (f64, f64, f64) {
    const LANES: usize = 4;
    let mut a = [0.0; LANES];
    let mut b = [0.0; LANES];
    let mut c = [0.0; LANES];
    let n = v.len();
    let body = n - n % LANES;
    let p = |i: usize| match l {
        Some(l) => v[i] * l[i],
        None => v[i],
    };
    let mut i = 0;
    while i < body {
        for k in 0..LANES {
            let x = p(i + k);
            a[k] += x;
            b[k] += x * w[i + k];
            c[k] += x * w2[i + k];
        }
        i += LANES;
    }
    for j in body..n {
        let x = p(j);
        a[0] += x;
        b[0] += x * w[j];
        c[0] += x * w2[j];
    }
    (a.iter().sum(), b.iter().sum(), c.iter().sum())
}
