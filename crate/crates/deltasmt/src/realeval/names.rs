//! Names of real vectors: lazy rational approximation sequences, and the
//! restricted dyadic-grid names used by local linearisation.

use std::sync::Arc;

use crate::num::{rational_round_to_grid, Dyadic, Rational};

/// A name of a real vector: for each `k` the generator yields a rational
/// vector within max-norm distance `2^-k` of the named point. Generators
/// must be referentially transparent: the same `k` always yields the same
/// answer.
#[derive(Clone)]
pub struct Name {
    gen: Arc<dyn Fn(u32) -> Vec<Rational> + Send + Sync>,
    dim: usize,
}

impl Name {
    pub fn from_fn(dim: usize, f: impl Fn(u32) -> Vec<Rational> + Send + Sync + 'static) -> Self {
        Name {
            gen: Arc::new(f),
            dim,
        }
    }

    /// The constant name of an exactly known rational point.
    pub fn constant(point: Vec<Rational>) -> Self {
        let dim = point.len();
        Name {
            gen: Arc::new(move |_| point.clone()),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn query(&self, k: u32) -> Vec<Rational> {
        let v = (self.gen)(k);
        debug_assert_eq!(v.len(), self.dim);
        v
    }
}

impl std::fmt::Debug for Name {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Name(dim={})", self.dim)
    }
}

/// A name whose `k`-th entry lies on the dyadic grid `Z * 2^-(k+1)` and whose
/// entries are consecutively stable: `|phi_i - phi_(i+j)| <= 2^-(i+1)`.
#[derive(Clone)]
pub struct XiName {
    gen: Arc<dyn Fn(u32) -> Vec<Dyadic> + Send + Sync>,
    dim: usize,
}

impl XiName {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn query(&self, k: u32) -> Vec<Dyadic> {
        let v = (self.gen)(k);
        debug_assert_eq!(v.len(), self.dim);
        v
    }

    /// Forgets the grid structure; every grid name is also a plain name.
    pub fn as_name(&self) -> Name {
        let gen = self.gen.clone();
        Name {
            gen: Arc::new(move |k| gen(k).into_iter().map(|d| d.to_rational()).collect()),
            dim: self.dim,
        }
    }
}

impl std::fmt::Debug for XiName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "XiName(dim={})", self.dim)
    }
}

/// Componentwise `round(x * 2^(m+1)) / 2^(m+1)` with ties to even. Each
/// component lands on the level-`m` grid within `2^-(m+2)` of `x`.
pub fn approx(x: &[Rational], m: u32) -> Vec<Dyadic> {
    x.iter()
        .map(|q| rational_round_to_grid(q, m as i64 + 1))
        .collect()
}

/// The canonical grid name of an exactly known rational point.
pub fn xi_name_of(x: &[Rational]) -> XiName {
    let point: Vec<Rational> = x.to_vec();
    let dim = point.len();
    XiName {
        gen: Arc::new(move |m| approx(&point, m)),
        dim,
    }
}

/// Converts an arbitrary name into a grid name of the same real vector:
/// `psi_n = round(phi_(n+4) * 2^(n+1)) / 2^(n+1)`.
pub fn cauchy_to_xi(phi: &Name) -> XiName {
    let inner = phi.clone();
    XiName {
        dim: inner.dim(),
        gen: Arc::new(move |n| {
            let q = inner.query(n + 4);
            approx(&q, n)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use crate::num::{pow2, rat};

    #[test]
    fn approx_examples() {
        assert_eq!(approx(&[rat(1, 3)], 1)[0].to_rational(), rat(1, 4));
        assert_eq!(approx(&[rat(5, 2)], 0)[0].to_rational(), rat(5, 2));
        // fixed by round-half-to-even; |-1/4 + 1/3| = 1/12 <= 1/8
        assert_eq!(approx(&[rat(-1, 3)], 1)[0].to_rational(), rat(-1, 4));
    }

    #[test]
    fn xi_name_of_examples() {
        let zero = xi_name_of(&[rat(0, 1)]);
        for k in 0..10 {
            assert!(zero.query(k)[0].is_zero());
        }
        let third = xi_name_of(&[rat(1, 3)]);
        assert_eq!(third.query(0)[0].to_rational(), rat(1, 2));
        assert_eq!(third.query(1)[0].to_rational(), rat(1, 4));
        assert_eq!(third.query(2)[0].to_rational(), rat(3, 8));
        for k in 0..12u32 {
            let err = (third.query(k)[0].to_rational() - rat(1, 3)).abs();
            assert!(err <= pow2(-(k as i64 + 2)));
        }
    }

    #[test]
    fn xi_name_grid_membership() {
        // component denominators divide 2^(k+1)
        let n = xi_name_of(&[rat(22, 7)]);
        for k in 0..8u32 {
            let d = &n.query(k)[0];
            assert!(d.exponent() >= -(k as i64 + 1));
        }
    }

    #[test]
    fn cauchy_to_xi_alternating_example() {
        // phi_n = (-2)^-n names 0 but is not a grid name; psi is identically 0
        let phi = Name::from_fn(1, |n| {
            let sign = if n % 2 == 0 { 1 } else { -1 };
            vec![rat(sign, 1) * pow2(-(n as i64))]
        });
        let psi = cauchy_to_xi(&phi);
        for n in 0..10 {
            assert!(psi.query(n)[0].is_zero());
        }
    }

    #[test]
    fn cauchy_to_xi_constant_name() {
        let phi = Name::constant(vec![rat(22, 7)]);
        let psi = cauchy_to_xi(&phi);
        for n in 0..10u32 {
            let err = (psi.query(n)[0].to_rational() - rat(22, 7)).abs();
            // |psi_n - x| <= 2^-(n+2) + 2^-(n+4)
            assert!(err <= pow2(-(n as i64 + 2)) + pow2(-(n as i64 + 4)));
        }
    }
}
