//! Gamma/Beta values, sphere areas, sine-power antiderivatives and complete
//! elliptic integrals.

#[allow(unused_imports)] // redundant when a dependency links std
use num_traits::Float;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Euler Beta function B(a, b).
pub fn beta(a: f64, b: f64) -> f64 {
    if a + b < 150.0 {
        gamma(a) * gamma(b) / gamma(a + b)
    } else {
        (libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)).exp()
    }
}

/// ∫_0^∞ r^{a-1} (1+r²)^{-b} dr = B(a/2, b - a/2)/2, valid for 0 < a < 2b.
pub fn radial_beta(a: f64, b: f64) -> f64 {
    0.5 * beta(0.5 * a, b - 0.5 * a)
}

/// Surface measure of the unit sphere S^{k-1} ⊂ ℝ^k.
pub fn sphere_area(k: u32) -> f64 {
    let h = 0.5 * k as f64;
    2.0 * core::f64::consts::PI.powf(h) / gamma(h)
}

/// Antiderivative of sin^m on [0, θ]. The reduction formula builds an O(θ^{m+1})
/// value out of O(θ) terms, so small angles go through the power series instead.
pub fn sin_power_integral(m: u32, theta: f64) -> f64 {
    if m >= 2 && theta.abs() < 0.5 {
        return sin_power_series(m, theta);
    }
    sin_power_reduction(m, theta)
}

fn sin_power_reduction(m: u32, theta: f64) -> f64 {
    match m {
        0 => theta,
        1 => 1.0 - theta.cos(),
        _ => {
            let mf = m as f64;
            -theta.sin().powi(m as i32 - 1) * theta.cos() / mf + (mf - 1.0) / mf * sin_power_reduction(m - 2, theta)
        }
    }
}

// sin x = x·Σ s_k x^{2k}; raise the bracket to the m-th power and integrate termwise.
// Sixteen terms reach round-off for |θ| < 0.5.
fn sin_power_series(m: u32, theta: f64) -> f64 {
    const TERMS: usize = 16;
    let mut sinc = [0.0; TERMS];
    let mut fact = 1.0;
    for (k, c) in sinc.iter_mut().enumerate() {
        if k > 0 {
            fact *= -((2 * k) as f64) * ((2 * k + 1) as f64);
        }
        *c = 1.0 / fact;
    }
    let mut power = [0.0; TERMS];
    power[0] = 1.0;
    for _ in 0..m {
        let mut next = [0.0; TERMS];
        for (a, pa) in power.iter().enumerate() {
            for (b, sb) in sinc.iter().enumerate().take(TERMS - a) {
                next[a + b] += pa * sb;
            }
        }
        power = next;
    }
    let x2 = theta * theta;
    let mut sum = 0.0;
    for k in (0..TERMS).rev() {
        sum = sum * x2 + power[k] / (m as usize + 2 * k + 1) as f64;
    }
    sum * theta.powi(m as i32 + 1)
}

/// ∫_a^b ρ^k dρ.
pub fn power_integral(k: i32, a: f64, b: f64) -> f64 {
    if k == -1 {
        (b / a).ln()
    } else {
        let e = (k + 1) as f64;
        (b.powi(k + 1) - a.powi(k + 1)) / e
    }
}

/// Complete elliptic integrals (K, E) as functions of the complementary modulus
/// `kc = sqrt(1 - k²)`, through the arithmetic–geometric mean.
pub fn elliptic_ke(kc: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut b = kc;
    let mut c = (1.0 - kc * kc).max(0.0).sqrt();
    let mut sum = 0.5 * c * c;
    let mut pow2 = 0.5;
    for _ in 0..60 {
        if c.abs() <= 1e-17 * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow2 *= 2.0;
        sum += pow2 * c * c;
    }
    let k = core::f64::consts::PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn beta_matches_elementary_values() {
        assert!((beta(2.0, 2.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((beta(0.5, 0.5) - PI).abs() < 1e-14);
        assert!((radial_beta(4.0, 4.0) - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        assert!((sphere_area(6) - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn sine_powers() {
        assert!((sin_power_integral(2, PI / 2.0) - PI / 4.0).abs() < 1e-15);
        assert!((sin_power_integral(3, PI / 2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((sin_power_integral(4, PI / 2.0) - 3.0 * PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn sine_powers_keep_relative_accuracy_near_zero() {
        // ∫₀^θ sin⁴ = 3θ/8 − sin 2θ/4 + sin 4θ/32 ≈ θ⁵/5 − 2θ⁷/21
        for theta in [1e-6, 1e-4, 1e-2] {
            let leading = theta.powi(5) / 5.0 - 2.0 * theta.powi(7) / 21.0;
            let v = sin_power_integral(4, theta);
            assert!(v > 0.0 && (v / leading - 1.0).abs() < theta.powi(4).max(1e-15), "{theta}: {v}");
        }
        // the two branches agree where they meet
        for m in 2..=4 {
            let s = sin_power_series(m, 0.5);
            let r = sin_power_reduction(m, 0.5);
            assert!((s - r).abs() < 1e-15, "m={m}: {s} vs {r}");
        }
    }

    #[test]
    fn elliptic_reference_values() {
        // k² = 1/2: K = 1.854074677301372, E = 1.350643881047675
        let (k, e) = elliptic_ke((0.5f64).sqrt());
        assert!((k - 1.854_074_677_301_372).abs() < 1e-14);
        assert!((e - 1.350_643_881_047_675).abs() < 1e-14);
        let (k0, e0) = elliptic_ke(1.0);
        assert!((k0 - PI / 2.0).abs() < 1e-15 && (e0 - PI / 2.0).abs() < 1e-15);
    }
}
