//! Scalar helpers. Everything goes through `libm` so results are identical with and
//! without `std`.

/// `sign(v)·|v|^p`, with `sign(0)·|0|^p` taken as 0.
#[inline]
pub fn signed_pow(v: f64, p: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else if v > 0.0 {
        libm::pow(v, p)
    } else {
        -libm::pow(-v, p)
    }
}

/// [`signed_pow`] replaced by the chord through the origin on `|v| < zone`.
///
/// The chord matches `signed_pow` at `|v| = zone`, so the map stays continuous.
#[inline]
pub fn signed_pow_linear_zone(v: f64, p: f64, zone: f64) -> f64 {
    if zone > 0.0 && libm::fabs(v) < zone {
        v * libm::pow(zone, p - 1.0)
    } else {
        signed_pow(v, p)
    }
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

pub fn norm(x: &[f64]) -> f64 {
    sqrt(x.iter().map(|v| v * v).sum())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ordinary least squares for `y = a + b·x`. Returns `(a, b)`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

/// Deterministic directions on the unit sphere of `R^dim`.
///
/// Uses a Halton sequence pushed through the box so sampling needs no RNG; the first
/// `2·dim` points are the signed coordinate axes.
pub fn sphere_directions(dim: usize, count: usize) -> alloc::vec::Vec<alloc::vec::Vec<f64>> {
    const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    let mut out = alloc::vec::Vec::with_capacity(count.max(2 * dim));
    for axis in 0..dim {
        for sign in [1.0, -1.0] {
            let mut u = alloc::vec![0.0; dim];
            u[axis] = sign;
            out.push(u);
        }
    }
    let mut k = 1u32;
    while out.len() < count.max(2 * dim) {
        let mut u: alloc::vec::Vec<f64> = (0..dim)
            .map(|d| 2.0 * radical_inverse(k, PRIMES[d % PRIMES.len()]) - 1.0)
            .collect();
        k += 1;
        let n = norm(&u);
        if n < 1e-3 {
            continue;
        }
        u.iter_mut().for_each(|v| *v /= n);
        out.push(u);
    }
    out
}

fn radical_inverse(mut i: u32, base: u32) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_pow_is_odd_and_zero_at_origin() {
        assert_eq!(signed_pow(0.0, 0.3), 0.0);
        assert_eq!(signed_pow(-4.0, 0.5), -2.0);
        assert_eq!(signed_pow(4.0, 0.5), 2.0);
    }

    #[test]
    fn linear_zone_is_continuous_at_the_edge() {
        let zone = 1e-3;
        let inside = signed_pow_linear_zone(zone * (1.0 - 1e-12), 0.8, zone);
        let outside = signed_pow(zone, 0.8);
        assert!((inside - outside).abs() < 1e-12);
        let chord = signed_pow_linear_zone(-0.5 * zone, 0.8, zone);
        assert!((chord + 0.5 * zone * zone.powf(-0.2)).abs() < 1e-15);
    }

    #[test]
    fn sphere_directions_are_unit() {
        for u in sphere_directions(3, 50) {
            assert!((norm(&u) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: alloc::vec::Vec<f64> = xs.iter().map(|x| 1.5 - 2.0 * x).collect();
        let (a, b) = linear_fit(&xs, &ys).unwrap();
        assert!((a - 1.5).abs() < 1e-12 && (b + 2.0).abs() < 1e-12);
    }
}
