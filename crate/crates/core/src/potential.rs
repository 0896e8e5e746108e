//! Trapping potentials and their flatness data.

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Well {
    pub center: [f64; 3],
    pub exponent: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec {
    /// `scale · |x|²`.
    Harmonic { scale: f64 },
    /// `scale · ∏_i |x - x_i|^{p_i}`.
    ProductWells { wells: Vec<Well>, scale: f64 },
    /// Radial table `(r_k, V_k)`, linear in between and constant beyond the
    /// last entry.
    Tabulated { r: Vec<f64>, v: Vec<f64> },
}

/// Vanishing order and coefficients of the global minima.
#[derive(Clone, Debug, PartialEq)]
pub struct Flatness {
    /// `p = max p_i`.
    pub order: f64,
    /// `(well index, λ_i)` for the wells with `p_i = p`.
    pub coefficients: Vec<(usize, f64)>,
    /// Indices of the flattest wells (smallest `λ_i` among those).
    pub flattest: Vec<usize>,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl PotentialSpec {
    pub fn harmonic() -> Self {
        Self::Harmonic { scale: 1.0 }
    }

    pub fn product_wells(wells: Vec<Well>) -> Self {
        Self::ProductWells { wells, scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Harmonic { scale } if !(*scale > 0.0) => {
                Err(Error::InvalidParameter(format!("harmonic scale {scale}")))
            }
            Self::ProductWells { wells, scale } => {
                if wells.is_empty() || !(*scale > 0.0) {
                    return Err(Error::InvalidParameter("product-wells needs wells and a positive scale".into()));
                }
                if let Some(w) = wells.iter().find(|w| !(w.exponent > 0.0)) {
                    return Err(Error::InvalidParameter(format!("well exponent {}", w.exponent)));
                }
                for (i, a) in wells.iter().enumerate() {
                    if wells[..i].iter().any(|b| dist(a.center, b.center) == 0.0) {
                        return Err(Error::InvalidParameter("repeated well location".into()));
                    }
                }
                Ok(())
            }
            Self::Tabulated { r, v } => {
                if r.len() < 2 || r.len() != v.len() {
                    return Err(Error::InvalidParameter("table needs ≥ 2 matching (r, V) rows".into()));
                }
                if r[0] != 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParameter("table radii must start at 0 and increase".into()));
                }
                if v.iter().any(|&x| !(x >= 0.0)) {
                    return Err(Error::InvalidParameter("table values must be ≥ 0".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// True when `V` depends on `|x|` only.
    pub fn is_radial(&self) -> bool {
        match self {
            Self::Harmonic { .. } | Self::Tabulated { .. } => true,
            Self::ProductWells { wells, .. } => {
                wells.len() == 1 && wells[0].center == [0.0; 3]
            }
        }
    }

    pub fn eval_radial(&self, r: f64) -> f64 {
        self.eval([r, 0.0, 0.0])
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        match self {
            Self::Harmonic { scale } => scale * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]),
            Self::ProductWells { wells, scale } => {
                scale * wells.iter().map(|w| dist(x, w.center).powf(w.exponent)).product::<f64>()
            }
            Self::Tabulated { r, v } => {
                let s = dist(x, [0.0; 3]);
                match r.iter().position(|&rk| rk > s) {
                    None => *v.last().unwrap(),
                    Some(k) => {
                        let t = (s - r[k - 1]) / (r[k] - r[k - 1]);
                        v[k - 1] + t * (v[k] - v[k - 1])
                    }
                }
            }
        }
    }

    /// Zeros of `V`.
    pub fn wells(&self) -> Vec<[f64; 3]> {
        match self {
            Self::Harmonic { .. } => vec![[0.0; 3]],
            Self::ProductWells { wells, .. } => wells.iter().map(|w| w.center).collect(),
            Self::Tabulated { r, v } => {
                if v[0] == 0.0 && r[0] == 0.0 {
                    vec![[0.0; 3]]
                } else {
                    Vec::new()
                }
            }
        }
    }

    pub fn flatness(&self) -> Result<Flatness> {
        match self {
            Self::Harmonic { scale } => Ok(Flatness {
                order: 2.0,
                coefficients: vec![(0, *scale)],
                flattest: vec![0],
            }),
            Self::ProductWells { wells, scale } => {
                let p = wells.iter().map(|w| w.exponent).fold(f64::NEG_INFINITY, f64::max);
                let coefficients: Vec<(usize, f64)> = wells
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| w.exponent == p)
                    .map(|(i, w)| {
                        let lambda = scale
                            * wells
                                .iter()
                                .enumerate()
                                .filter(|(j, _)| *j != i)
                                .map(|(_, o)| dist(w.center, o.center).powf(o.exponent))
                                .product::<f64>();
                        (i, lambda)
                    })
                    .collect();
                let min = coefficients.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
                let flattest = coefficients
                    .iter()
                    .filter(|c| c.1 <= min * (1.0 + 1e-12))
                    .map(|c| c.0)
                    .collect();
                Ok(Flatness { order: p, coefficients, flattest })
            }
            Self::Tabulated { .. } => Err(Error::FlatnessUnavailable),
        }
    }

    /// `V̄_i(x_i) = lim V(x)/|x - x_i|^{p_i}` at the flattest wells.
    pub fn flattest_coefficient(&self) -> Result<f64> {
        let f = self.flatness()?;
        Ok(f.coefficients.iter().map(|c| c.1).fold(f64::INFINITY, f64::min))
    }

    /// Gradient and Hessian of `V`. Finite at wells with `p_i ≥ 2`.
    pub fn derivatives(&self, x: [f64; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
        match self {
            Self::Harmonic { scale } => {
                let g = x.map(|c| 2.0 * scale * c);
                let mut h = [[0.0; 3]; 3];
                for (a, row) in h.iter_mut().enumerate() {
                    row[a] = 2.0 * scale;
                }
                (g, h)
            }
            Self::ProductWells { wells, scale } => {
                // factors f_i = |d_i|^{p_i} with their gradients and Hessians
                let parts: Vec<(f64, [f64; 3], [[f64; 3]; 3])> = wells
                    .iter()
                    .map(|w| {
                        let d = [0, 1, 2].map(|a| x[a] - w.center[a]);
                        let n = dist(x, w.center);
                        let p = w.exponent;
                        let f = n.powf(p);
                        if n == 0.0 {
                            let mut h = [[0.0; 3]; 3];
                            if p == 2.0 {
                                for (a, row) in h.iter_mut().enumerate() {
                                    row[a] = 2.0;
                                }
                            }
                            return (f, [0.0; 3], h);
                        }
                        let np2 = n.powf(p - 2.0);
                        let g = d.map(|c| p * np2 * c);
                        let mut h = [[0.0; 3]; 3];
                        for a in 0..3 {
                            for b in 0..3 {
                                let delta = if a == b { 1.0 } else { 0.0 };
                                h[a][b] = p * np2 * (delta + (p - 2.0) * d[a] * d[b] / (n * n));
                            }
                        }
                        (f, g, h)
                    })
                    .collect();
                let k = parts.len();
                let others = |skip: &[usize]| -> f64 {
                    (0..k).filter(|j| !skip.contains(j)).map(|j| parts[j].0).product()
                };
                let mut g = [0.0; 3];
                let mut h = [[0.0; 3]; 3];
                for i in 0..k {
                    let oi = others(&[i]);
                    for a in 0..3 {
                        g[a] += scale * parts[i].1[a] * oi;
                        for b in 0..3 {
                            h[a][b] += scale * parts[i].2[a][b] * oi;
                        }
                    }
                    for m in 0..k {
                        if m == i {
                            continue;
                        }
                        let oim = others(&[i, m]);
                        for a in 0..3 {
                            for b in 0..3 {
                                h[a][b] += scale * parts[i].1[a] * parts[m].1[b] * oim;
                            }
                        }
                    }
                }
                (g, h)
            }
            Self::Tabulated { .. } => {
                // central differences of the interpolant
                let e = 1e-5;
                let mut g = [0.0; 3];
                let mut h = [[0.0; 3]; 3];
                let shift = |x: [f64; 3], a: usize, s: f64| {
                    let mut y = x;
                    y[a] += s;
                    y
                };
                for a in 0..3 {
                    g[a] = (self.eval(shift(x, a, e)) - self.eval(shift(x, a, -e))) / (2.0 * e);
                    for b in 0..3 {
                        let pp = self.eval(shift(shift(x, a, e), b, e));
                        let pm = self.eval(shift(shift(x, a, e), b, -e));
                        let mp = self.eval(shift(shift(x, a, -e), b, e));
                        let mm = self.eval(shift(shift(x, a, -e), b, -e));
                        h[a][b] = (pp - pm - mp + mm) / (4.0 * e * e);
                    }
                }
                (g, h)
            }
        }
    }

    /// Check confinement on the box `[-L, L]³`: `V ≥ 0` on sampled points,
    /// `V = 0` at every well, and the smallest boundary value exceeds ten
    /// times the largest value within distance `0.25` of a well.
    pub fn check_confining(&self, half_width: f64) -> Result<()> {
        self.validate()?;
        for c in self.wells() {
            if self.eval(c) != 0.0 {
                return Err(Error::InvalidParameter(format!("V({c:?}) ≠ 0 at a declared well")));
            }
        }
        let n = 16;
        let l = half_width;
        let mut boundary_min = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let a = -l + 2.0 * l * i as f64 / n as f64;
                let b = -l + 2.0 * l * j as f64 / n as f64;
                for face in [[l, a, b], [-l, a, b], [a, l, b], [a, -l, b], [a, b, l], [a, b, -l]] {
                    let v = self.eval(face);
                    if v < 0.0 {
                        return Err(Error::InvalidParameter(format!("V < 0 at {face:?}")));
                    }
                    boundary_min = boundary_min.min(v);
                }
            }
        }
        let mut well_max: f64 = 0.0;
        for c in self.wells() {
            for dir in [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]] {
                let x = [0, 1, 2].map(|a| c[a] + 0.25 * dir[a]);
                well_max = well_max.max(self.eval(x));
            }
        }
        if boundary_min > 10.0 * well_max {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "potential not confining on [-{l}, {l}]³: boundary min {boundary_min:.3e}, well region {well_max:.3e}"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_wells(p1: f64, p2: f64) -> PotentialSpec {
        PotentialSpec::product_wells(vec![
            Well { center: [1.0, 0.0, 0.0], exponent: p1 },
            Well { center: [-1.0, 0.0, 0.0], exponent: p2 },
        ])
    }

    #[test]
    fn harmonic_flatness() {
        let f = PotentialSpec::harmonic().flatness().unwrap();
        assert_eq!(f.order, 2.0);
        assert_eq!(f.flattest, vec![0]);
    }

    #[test]
    fn unequal_exponents_select_the_higher_order_well() {
        let v = two_wells(2.0, 4.0);
        let f = v.flatness().unwrap();
        assert_eq!(f.order, 4.0);
        assert_eq!(f.flattest, vec![1]);
        assert_eq!(f.coefficients, vec![(1, 4.0)]);
    }

    #[test]
    fn symmetric_wells_tie() {
        let f = two_wells(4.0, 4.0).flatness().unwrap();
        assert_eq!(f.flattest, vec![0, 1]);
        assert!(f.coefficients.iter().all(|c| (c.1 - 16.0).abs() < 1e-12));
    }

    #[test]
    fn tabulated_has_no_flatness() {
        let v = PotentialSpec::Tabulated { r: vec![0.0, 1.0, 2.0], v: vec![0.0, 1.0, 4.0] };
        assert!(matches!(v.flatness(), Err(Error::FlatnessUnavailable)));
        assert!((v.eval([0.5, 0.0, 0.0]) - 0.5).abs() < 1e-15);
        assert_eq!(v.eval([10.0, 0.0, 0.0]), 4.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let v = two_wells(2.0, 4.0);
        for x in [[0.3, -0.2, 0.5], [-0.9, 0.1, 0.0], [1.2, 0.4, -0.3]] {
            let (g, h) = v.derivatives(x);
            let e = 1e-5;
            for a in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[a] += e;
                xm[a] -= e;
                let fd = (v.eval(xp) - v.eval(xm)) / (2.0 * e);
                assert!((g[a] - fd).abs() < 1e-6 * (1.0 + fd.abs()));
                let (gp, _) = v.derivatives(xp);
                let (gm, _) = v.derivatives(xm);
                for b in 0..3 {
                    let fd = (gp[b] - gm[b]) / (2.0 * e);
                    assert!((h[a][b] - fd).abs() < 1e-5 * (1.0 + fd.abs()));
                }
            }
        }
        let (g, h) = v.derivatives([1.0, 0.0, 0.0]);
        assert_eq!(g, [0.0; 3]);
        assert!((h[0][0] - 2.0 * 16.0).abs() < 1e-12);
    }

    #[test]
    fn confinement_checks() {
        assert!(PotentialSpec::harmonic().check_confining(8.0).is_ok());
        assert!(two_wells(2.0, 4.0).check_confining(4.0).is_ok());
        let flat = PotentialSpec::Tabulated { r: vec![0.0, 1.0], v: vec![0.0, 0.1] };
        assert!(flat.check_confining(4.0).is_err());
    }

    #[test]
    fn radial_detection() {
        assert!(PotentialSpec::harmonic().is_radial());
        assert!(!two_wells(2.0, 2.0).is_radial());
    }
}
