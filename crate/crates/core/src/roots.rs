//! Roots of complex polynomials: companion-matrix eigenvalues, with
//! Durand–Kerner as an independent second route.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest allowed disagreement between the two routes.
pub const ROUTE_AGREEMENT: f64 = 1e-6;

/// Roots of the monic polynomial z^D + a[D-1] z^{D-1} + … + a[0]
/// (`a` holds the D non-leading coefficients, constant term first).
pub fn companion_roots(a: &[Complex64]) -> Option<Vec<Complex64>> {
    let d = a.len();
    if d == 0 {
        return Some(Vec::new());
    }
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -a[i];
    }
    let eig = nalgebra::linalg::Schur::try_new(m, 1e-15, 10_000)?.eigenvalues()?;
    let roots: Vec<Complex64> = eig.iter().copied().collect();
    roots.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(roots)
}

/// Durand–Kerner iteration on the same monic polynomial.
pub fn durand_kerner(a: &[Complex64], tol: f64, max_iter: usize) -> Option<Vec<Complex64>> {
    let d = a.len();
    if d == 0 {
        return Some(Vec::new());
    }
    let eval = |z: Complex64| a.iter().rev().fold(Complex64::new(1.0, 0.0), |acc, &c| acc * z + c);
    // Cauchy bound for the initial circle
    let radius = 1.0 + a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32) * (radius / seed.norm().powi(k as i32)).min(radius)).collect();
    for (k, zk) in z.iter_mut().enumerate() {
        if zk.norm() < 1e-3 {
            *zk = Complex64::from_polar(radius * 0.5, 0.3 + k as f64);
        }
    }
    for _ in 0..max_iter {
        let mut delta: f64 = 0.0;
        for i in 0..d {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-12, 0.0);
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= tol {
            return Some(z);
        }
    }
    None
}

/// Largest distance in a greedy nearest matching of two root multisets.
pub fn matching_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, &y)| (j, (x - y).norm()))
            .min_by(|u, v| u.1.total_cmp(&v.1))
            .expect("equal lengths");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Roots by the companion matrix, cross-checked against Durand–Kerner.
/// Either route alone is accepted if the other fails to converge.
pub fn polynomial_roots(a: &[Complex64]) -> Result<Vec<Complex64>> {
    let primary = companion_roots(a);
    let scale = 1.0 + a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let secondary = durand_kerner(a, 1e-14 * scale, 5000);
    match (primary, secondary) {
        (Some(p), Some(s)) => {
            let gap = matching_distance(&p, &s);
            if gap > ROUTE_AGREEMENT * scale.max(1.0) {
                Err(Error::RootFindingDidNotConverge(format!("companion and Durand–Kerner disagree by {gap:.3e}")))
            } else {
                Ok(p)
            }
        }
        (Some(p), None) => Ok(p),
        (None, Some(s)) => Ok(s),
        (None, None) => Err(Error::RootFindingDidNotConverge("both root finders failed".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        // monic Π (z - r), returned without the leading 1
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::default(); c.len() + 1];
            for (i, &v) in c.iter().enumerate() {
                next[i + 1] += v;
                next[i] -= v * r;
            }
            c = next;
        }
        c.pop();
        c
    }

    #[test]
    fn recovers_known_roots() {
        let roots = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(-1.5, 0.5),
            Complex64::from_polar(5f64.sqrt(), 1.1),
        ];
        let a = from_roots(&roots);
        let found = polynomial_roots(&a).unwrap();
        assert!(matching_distance(&found, &roots) < 1e-10);
        let dk = durand_kerner(&a, 1e-14, 5000).unwrap();
        assert!(matching_distance(&dk, &roots) < 1e-10);
    }

    #[test]
    fn degenerate_cases() {
        assert!(polynomial_roots(&[]).unwrap().is_empty());
        let r = polynomial_roots(&[Complex64::new(-3.0, 0.0)]).unwrap();
        assert!((r[0] - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        // double root: both routes lose half the digits but still agree
        let a = from_roots(&[Complex64::new(2.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0)]);
        let r = polynomial_roots(&a).unwrap();
        assert!(r.iter().filter(|z| (**z - Complex64::new(2.0, 0.0)).norm() < 1e-6).count() == 2);
    }
}
