//! Four-point Lagrange interpolation on uniform node sets.

/// How samples are continued beyond the left end of the node set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeftEnd {
    /// Nodes sit at `(j + 1/2) h`; the function is even about 0.
    EvenAboutOrigin,
    /// Samples vanish outside the node set.
    Zero,
    /// Periodic continuation.
    Periodic,
}

/// Interpolate samples `values[j]` located at `x0 + j h` at the point `x`.
///
/// Samples outside the node range are zero on the right; on the left they
/// follow `left`. With `LeftEnd::Periodic` both ends wrap.
pub fn cubic(values: &[f64], x0: f64, h: f64, x: f64, left: LeftEnd) -> f64 {
    let n = values.len() as isize;
    let t = (x - x0) / h;
    let base = t.floor() as isize;
    let frac = t - base as f64;
    let sample = |j: isize| -> f64 {
        match left {
            LeftEnd::Periodic => values[j.rem_euclid(n) as usize],
            LeftEnd::EvenAboutOrigin if j < 0 => {
                let m = -j - 1;
                if m < n {
                    values[m as usize]
                } else {
                    0.0
                }
            }
            _ => {
                if j < 0 || j >= n {
                    0.0
                } else {
                    values[j as usize]
                }
            }
        }
    };
    let (p0, p1, p2, p3) = (
        sample(base - 1),
        sample(base),
        sample(base + 1),
        sample(base + 2),
    );
    let s = frac;
    let l0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    let l1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    let l2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    let l3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    l0 * p0 + l1 * p1 + l2 * p2 + l3 * p3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.1 * x * x * x;
        let vals: Vec<f64> = (0..20).map(|j| f(0.3 * j as f64)).collect();
        for &x in &[0.31, 1.7, 3.05, 4.4] {
            let y = cubic(&vals, 0.0, 0.3, x, LeftEnd::Zero);
            assert!((y - f(x)).abs() < 1e-12, "{x}: {y} vs {}", f(x));
        }
    }

    #[test]
    fn exact_at_nodes() {
        let vals = [3.0, 1.0, 4.0, 1.0, 5.0];
        for (j, v) in vals.iter().enumerate() {
            assert_eq!(cubic(&vals, 0.0, 1.0, j as f64, LeftEnd::Zero), *v);
        }
    }

    #[test]
    fn even_extension_is_symmetric() {
        let h = 0.1;
        let vals: Vec<f64> = (0..50)
            .map(|j| {
                let r = (j as f64 + 0.5) * h;
                (-r * r).exp()
            })
            .collect();
        let a = cubic(&vals, 0.5 * h, h, 0.02, LeftEnd::EvenAboutOrigin);
        assert!((a - (-0.0004f64).exp()).abs() < 5e-5);
    }
}
