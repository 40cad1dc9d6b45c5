//! Aubin–Talenti bubbles in meridian coordinates, the antipodal pair `W_δ`,
//! the nonlinearity `f_ε` and the elementary inequalities used around them.

use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when a dependency links std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_breaks, Tolerance};
use crate::special::sphere_area;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimension {
    n: u32,
}

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if (4..=6).contains(&n) {
            Ok(Dimension { n })
        } else {
            Err(Error::UnsupportedDimension(n))
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// p + 1 = 2n/(n-2) as a reduced fraction.
    pub fn critical_exponent_fraction(&self) -> (u32, u32) {
        let (mut a, mut b) = (2 * self.n, self.n - 2);
        let g = gcd(a, b);
        a /= g;
        b /= g;
        (a, b)
    }

    pub fn p(&self) -> f64 {
        let (a, b) = self.critical_exponent_fraction();
        (a - b) as f64 / b as f64
    }

    pub fn p_plus_one(&self) -> f64 {
        let (a, b) = self.critical_exponent_fraction();
        a as f64 / b as f64
    }

    /// (n-2)/2, the bubble's homogeneity exponent.
    pub fn half(&self) -> f64 {
        0.5 * (self.n as f64 - 2.0)
    }

    /// α_n = [n(n-2)]^{(n-2)/4}.
    pub fn alpha(&self) -> f64 {
        match self.n {
            4 => 8f64.sqrt(),
            5 => 15f64.sqrt() * 15f64.sqrt().sqrt(),
            _ => 24.0,
        }
    }

    /// |S^{n-2}|, the sphere in the x' hyperplane.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.n - 1)
    }

    /// |S^{n-1}|.
    pub fn ball_sphere_area(&self) -> f64 {
        sphere_area(self.n)
    }

    /// `x^{k/2}` for integer `k`, avoiding `powf` when `k` is even.
    pub(crate) fn half_pow(x: f64, k: i32) -> f64 {
        if k % 2 == 0 {
            x.powi(k / 2)
        } else {
            x.powi((k - 1) / 2) * x.sqrt()
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Signed exponent perturbation ε: positive is supercritical, negative subcritical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    pub eps: f64,
}

impl Exponent {
    pub fn new(eps: f64, dim: Dimension) -> Result<Self> {
        if !(eps.abs() < 1.0) || dim.p() - 1.0 + eps <= 0.0 {
            return Err(invalid("exponent perturbation must satisfy |eps| < 1 and p-1+eps > 0"));
        }
        Ok(Exponent { eps })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleParams {
    pub dim: Dimension,
    pub delta: f64,
    pub center: f64,
    pub sign: f64,
}

impl BubbleParams {
    pub fn new(dim: Dimension, delta: f64, center: f64, sign: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(invalid("bubble scale must be positive"));
        }
        if sign != 1.0 && sign != -1.0 {
            return Err(invalid("bubble sign must be +1 or -1"));
        }
        Ok(BubbleParams { dim, delta, center, sign })
    }

    fn dist2(&self, s: f64, t: f64) -> f64 {
        let dt = t - self.center;
        s * s + dt * dt
    }

    /// sign · α_n δ^{(n-2)/2} / (δ² + |x-ξ|²)^{(n-2)/2}.
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        self.sign * self.radial(self.dist2(s, t))
    }

    /// |U|^q at squared distance `d2` from the center.
    pub fn radial_pow(&self, d2: f64, q: f64) -> f64 {
        let ratio = self.delta / (self.delta * self.delta + d2);
        let k = (self.dim.n - 2) as f64;
        (self.dim.alpha().ln() * q + 0.5 * k * q * ratio.ln()).exp()
    }

    /// Unsigned profile at squared distance `d2`.
    pub fn radial(&self, d2: f64) -> f64 {
        let ratio = self.delta / (self.delta * self.delta + d2);
        self.dim.alpha() * Dimension::half_pow(ratio, (self.dim.n - 2) as i32)
    }

    /// Unsigned U^p at squared distance `d2`.
    pub fn radial_p(&self, d2: f64) -> f64 {
        let ratio = self.delta / (self.delta * self.delta + d2);
        let a = self.dim.alpha();
        // α^p with p = (n+2)/(n-2)
        let ap = match self.dim.n {
            4 => a * a * a,
            6 => a * a,
            _ => a.powf(self.dim.p()),
        };
        ap * Dimension::half_pow(ratio, (self.dim.n + 2) as i32)
    }

    /// ∂_δ U, the closed form α_n (n-2)/2 δ^{(n-4)/2} (|x-ξ|²-δ²)/(δ²+|x-ξ|²)^{n/2}.
    pub fn eval_ddelta(&self, s: f64, t: f64) -> f64 {
        let d2 = self.dist2(s, t);
        let dd = self.delta * self.delta;
        let n = self.dim.n as i32;
        self.sign
            * self.dim.alpha()
            * self.dim.half()
            * Dimension::half_pow(self.delta, n - 4)
            * (d2 - dd)
            / Dimension::half_pow(dd + d2, n)
    }

    /// ∫_{B_R(ξ)} |U|^q via radial quadrature, with the rate class predicted for q.
    pub fn lq_norm(&self, q: f64, radius: f64, tol: Tolerance) -> Result<LqNorm> {
        if !(q > 0.0) || !(radius > 0.0) {
            return Err(invalid("q and R must be positive"));
        }
        let area = self.dim.ball_sphere_area();
        let n = self.dim.n as i32;
        let mut pts = alloc::vec![0.0];
        let mut b = self.delta;
        while b < radius {
            pts.push(b);
            b *= 8.0;
        }
        pts.push(radius);
        let q_int = integrate_breaks(|r| self.radial_pow(r * r, q) * r.powi(n - 1), &pts, tol)?;
        Ok(LqNorm { value: area * q_int.value, err: area * q_int.err, rate: RateClass::for_exponent(self.dim, q) })
    }
}

/// Predicted small-δ behaviour of ∫ U^q over a fixed ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateClass {
    /// q < n/(n-2): δ^{q(n-2)/2}.
    Subcritical { exponent: f64 },
    /// q = n/(n-2): δ^{n/2} |log δ|.
    Logarithmic { exponent: f64 },
    /// q > n/(n-2): δ^{n - q(n-2)/2}.
    Supercritical { exponent: f64 },
}

impl RateClass {
    pub fn for_exponent(dim: Dimension, q: f64) -> Self {
        let n = dim.nf();
        let threshold = n / (n - 2.0);
        if (q - threshold).abs() < 1e-12 {
            RateClass::Logarithmic { exponent: 0.5 * n }
        } else if q < threshold {
            RateClass::Subcritical { exponent: 0.5 * q * (n - 2.0) }
        } else {
            RateClass::Supercritical { exponent: n - 0.5 * q * (n - 2.0) }
        }
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            RateClass::Subcritical { exponent }
            | RateClass::Logarithmic { exponent }
            | RateClass::Supercritical { exponent } => exponent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqNorm {
    pub value: f64,
    pub err: f64,
    pub rate: RateClass,
}

/// U_{δ, +r e_n} − U_{δ, −r e_n}.
pub fn eval_w(dim: Dimension, delta: f64, radius: f64, s: f64, t: f64) -> f64 {
    let up = BubbleParams { dim, delta, center: radius, sign: 1.0 };
    let dn = BubbleParams { dim, delta, center: -radius, sign: 1.0 };
    up.radial(up.dist2(s, t)) - dn.radial(dn.dist2(s, t))
}

/// f_ε(t) = |t|^{p-1+ε} t.
pub fn f_eps(t: f64, exp: Exponent, dim: Dimension) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    t.signum() * t.abs().powf(dim.p() + exp.eps)
}

/// f_ε'(t) = (p+ε)|t|^{p-1+ε}.
pub fn f_eps_prime(t: f64, exp: Exponent, dim: Dimension) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    (dim.p() + exp.eps) * t.abs().powf(dim.p() - 1.0 + exp.eps)
}

/// Second-order remainder of f_ε ≈ f_0 + ε|t|^{p-1}t log|t|, scaled by ε²,
/// paired with the bound ½(|t|^p + |t|^{p+ε}) log²|t|.
pub fn f_eps_expansion_remainder(t: f64, exp: Exponent, dim: Dimension) -> (f64, f64) {
    let p = dim.p();
    let a = t.abs();
    let lg = a.ln();
    let f0 = t.signum() * a.powf(p);
    let lin = exp.eps * f0 * lg;
    let rem = (f_eps(t, exp, dim) - f0 - lin).abs() / (exp.eps * exp.eps);
    let bound = 0.5 * (a.powf(p) + a.powf(p + exp.eps)) * lg * lg;
    (rem, bound)
}

/// Largest observed ||a+b|^q − |a|^q| / (|a|^{q-1}|b| + |b|^q) over random
/// pairs with log-uniform magnitudes in [1e-3, 1e3] and random signs.
pub fn taylor_bound_witness(q: f64, trials: usize, seed: u64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(invalid("Taylor witness needs q > 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sup: f64 = 0.0;
    for _ in 0..trials {
        let a = random_signed_log(&mut rng);
        let b = random_signed_log(&mut rng);
        sup = sup.max(taylor_ratio(q, a, b));
    }
    Ok(sup)
}

pub fn taylor_ratio(q: f64, a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let num = ((a + b).abs().powf(q) - a.abs().powf(q)).abs();
    let den = a.abs().powf(q - 1.0) * b.abs() + b.abs().powf(q);
    num / den
}

fn random_signed_log(rng: &mut ChaCha8Rng) -> f64 {
    let mag = 10f64.powf(rng.random_range(-3.0..3.0));
    if rng.random_bool(0.5) { mag } else { -mag }
}

/// Random meridian sample points `(s, t)` in a box, for property sweeps.
pub fn sample_points(count: usize, extent: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.random_range(0.0..extent), rng.random_range(-extent..extent)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn exponents_and_alpha() {
        for n in 4..=6 {
            let d = dim(n);
            assert_eq!(d.p_plus_one(), 2.0 * n as f64 / (n as f64 - 2.0));
            let (a, b) = d.critical_exponent_fraction();
            assert_eq!(a * (n - 2), b * 2 * n);
            let expect = ((n * (n - 2)) as f64).powf((n as f64 - 2.0) / 4.0);
            assert!((d.alpha() - expect).abs() < 1e-13 * expect);
        }
        assert!((dim(4).alpha().powi(2) - 8.0).abs() < 1e-14);
        assert!(Dimension::new(3).is_err() && Dimension::new(7).is_err());
    }

    #[test]
    fn peak_and_half_width() {
        let b = BubbleParams::new(dim(4), 1.0, 0.0, 1.0).unwrap();
        assert!((b.eval(0.0, 0.0) - 8f64.sqrt()).abs() < 1e-15);
        for n in 4..=6 {
            let b = BubbleParams::new(dim(n), 0.3, 1.0, 1.0).unwrap();
            let peak = b.eval(0.0, 1.0);
            let half = b.eval(0.3 * 0.6, 1.0 + 0.3 * 0.8);
            assert!((half - peak / 2f64.powf(0.5 * (n as f64 - 2.0))).abs() < 1e-13 * peak);
        }
    }

    #[test]
    fn n5_peak_matches_scalar_formula() {
        let b = BubbleParams::new(dim(5), 0.1, 1.0, 1.0).unwrap();
        let expect = 15f64.powf(0.75) * 0.1f64.powf(-1.5);
        assert!((b.eval(0.0, 1.0) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn powers_agree_with_eval() {
        for n in 4..=6 {
            let b = BubbleParams::new(dim(n), 0.07, 1.0, 1.0).unwrap();
            for &d2 in &[0.0, 1e-4, 0.3, 2.0] {
                let u = b.radial(d2);
                let p = dim(n).p();
                assert!((b.radial_p(d2) - u.powf(p)).abs() < 1e-12 * u.powf(p));
                assert!((b.radial_pow(d2, 2.5) - u.powf(2.5)).abs() < 1e-12 * u.powf(2.5));
            }
        }
    }

    #[test]
    fn ddelta_examples() {
        let b = BubbleParams::new(dim(4), 1.0, 0.0, 1.0).unwrap();
        assert!((b.eval_ddelta(0.0, 0.0) + 8f64.sqrt()).abs() < 1e-14);
        let h = 1e-5;
        let up = BubbleParams { delta: 1.0 + h, ..b }.eval(0.0, 0.0);
        let dn = BubbleParams { delta: 1.0 - h, ..b }.eval(0.0, 0.0);
        assert!(((up - dn) / (2.0 * h) + 8f64.sqrt()).abs() < 1e-8);
        let b = BubbleParams::new(dim(5), 0.2, 1.0, -1.0).unwrap();
        assert!(b.eval_ddelta(0.12, 1.16).abs() < 1e-10 * b.eval(0.12, 1.16).abs());
    }

    #[test]
    fn w_examples() {
        let d = dim(4);
        assert_eq!(eval_w(d, 0.3, 1.0, 0.4, 0.0), 0.0);
        let expect = 8f64.sqrt() * (1.0 / 0.1 - 0.1 / (0.01 + 4.0));
        assert!((eval_w(d, 0.1, 1.0, 0.0, 1.0) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn f_eps_examples() {
        let d = dim(4);
        let e0 = Exponent::new(0.0, d).unwrap();
        assert_eq!(f_eps(0.0, e0, d), 0.0);
        assert!((f_eps(-2.0, e0, d) + 8.0).abs() < 1e-13);
        assert_eq!(f_eps_prime(0.0, e0, d), 0.0);
        assert!(Exponent::new(1.5, d).is_err());
    }

    #[test]
    fn lq_norm_whole_space_is_a() {
        let b = BubbleParams::new(dim(4), 1.0, 0.0, 1.0).unwrap();
        let v = b.lq_norm(4.0, 1e6, Tolerance::new(1e-12, 1e-12)).unwrap();
        let a = 32.0 * core::f64::consts::PI.powi(2) / 3.0;
        assert!((v.value - a).abs() < 1e-6 * a);
        assert_eq!(v.rate, RateClass::Supercritical { exponent: 0.0 });
        assert_eq!(RateClass::for_exponent(dim(4), 2.0), RateClass::Logarithmic { exponent: 2.0 });
        assert_eq!(RateClass::for_exponent(dim(4), 1.0), RateClass::Subcritical { exponent: 1.0 });
    }

    #[test]
    fn taylor_witness_examples() {
        assert_eq!(taylor_ratio(3.0, 2.0, 0.0), 0.0);
        let c2 = taylor_bound_witness(2.0, 20000, 1).unwrap();
        assert!(c2 <= 2.0 + 1e-12);
        assert!(taylor_bound_witness(1.0, 10, 1).is_err());
    }
}
