//! Dirichlet characters modulo Q = x^m or squarefree Q, their
//! L-polynomials and unitarized Frobenius classes, and weighted character
//! sums M(n; w·χ).

mod character;
mod group;
mod sums;

pub use character::{
    l_coefficient_table, l_coefficients, l_coefficients_naive, l_polynomial, l_polynomial_from_coefficients, l_polynomials, list_characters,
    write_characters_csv, CharacterFilter, CoefficientMode, DirichletCharacter, LPolynomial,
};
pub use group::{order_profile, DirichletGroup};
pub use sums::{
    explicit_formula_check, explicit_formula_rhs, generating_identity_residuals, katz_average, m_sum, m_sums_all, mobius_sum_bound,
    weighted_histogram, ExplicitFormulaCheck, KatzAverage, Weight,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{enumerate_monic, DEFAULT_BUDGET};
    use crate::field::FieldCtx;
    use crate::poly::Poly;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    fn xm(q: u64, m: usize) -> DirichletGroup {
        let ctx = FieldCtx::new(q).unwrap();
        DirichletGroup::new(&Poly::monomial(&ctx, m), DEFAULT_BUDGET).unwrap()
    }

    fn all_residues(g: &DirichletGroup) -> Vec<Poly> {
        let ctx = g.ctx();
        let q = ctx.p() as u64;
        let d = g.degree();
        (0..q.pow(d as u32))
            .map(|mut i| {
                let c = (0..d)
                    .map(|_| {
                        let v = (i % q) as u32;
                        i /= q;
                        v
                    })
                    .collect();
                Poly::from_coeffs(ctx, c)
            })
            .collect()
    }

    #[test]
    fn unit_group_orders() {
        assert_eq!(xm(3, 2).order(), 6);
        for q in [2, 3, 5, 11] {
            let g = xm(q, 1);
            assert_eq!(g.order(), q - 1);
            assert_eq!(g.rank(), 1);
        }
        let f3 = FieldCtx::new(3).unwrap();
        let g = DirichletGroup::new(&Poly::from_i64s(&f3, &[1, 0, 1]), DEFAULT_BUDGET).unwrap();
        assert_eq!(g.orders(), &[8]);
        let sq = Poly::from_i64s(&f3, &[1, 0, 1]).mul(&Poly::from_i64s(&f3, &[1, 1])).mul(&Poly::x(&f3));
        assert_eq!(DirichletGroup::new(&sq, DEFAULT_BUDGET).unwrap().order(), 8 * 2 * 2);
        let not_sf = Poly::from_i64s(&f3, &[1, 1]).pow(2);
        assert!(matches!(DirichletGroup::new(&not_sf, DEFAULT_BUDGET), Err(crate::Error::UnsupportedModulusShape(_))));
    }

    #[test]
    fn one_unit_structure_matches_known_basis() {
        // 1-units mod x^m are Π_{p∤j} ⟨1 - x^j⟩, of order the least p^k with j·p^k >= m
        for (q, m) in [(2, 6), (3, 2), (3, 4), (3, 7), (5, 5), (5, 6), (7, 4)] {
            let g = xm(q, m);
            let mut expected = Vec::new();
            for j in (1..m as u64).filter(|j| j % q != 0) {
                let mut d = 1;
                while j * d < m as u64 {
                    d *= q;
                }
                expected.push(d);
            }
            assert_eq!(order_profile(&g.orders()[1..]), order_profile(&expected), "q={q} m={m}");
            assert_eq!(g.order(), (q - 1) * q.pow(m as u32 - 1));
        }
    }

    #[test]
    fn dlog_is_a_homomorphism() {
        let f3 = FieldCtx::new(3).unwrap();
        let groups = vec![
            xm(3, 3),
            xm(3, 4),
            xm(5, 3),
            DirichletGroup::new(&Poly::from_i64s(&f3, &[1, 0, 1]).mul(&Poly::from_i64s(&f3, &[2, 1])), DEFAULT_BUDGET).unwrap(),
        ];
        for g in &groups {
            for (i, gen) in g.generators().iter().enumerate() {
                let mut e = vec![0; g.rank()];
                e[i] = 1 % g.orders()[i];
                assert_eq!(g.dlog(gen).unwrap(), e);
            }
            let res = all_residues(g);
            let units: Vec<&Poly> = res.iter().filter(|r| g.position(r).is_some()).collect();
            assert_eq!(units.len() as u64, g.order());
            let mut seen = vec![false; g.order() as usize];
            for u in &units {
                let p = g.position(u).unwrap() as usize;
                assert!(!seen[p]);
                seen[p] = true;
                assert_eq!(&g.element(p as u64), *u);
            }
            for u in units.iter().step_by(3) {
                for v in units.iter().step_by(2) {
                    let uv = u.mulmod(v, g.modulus()).unwrap();
                    let sum: Vec<u64> = g.dlog(u).unwrap().iter().zip(g.dlog(v).unwrap()).zip(g.orders()).map(|((a, b), d)| (a + b) % d).collect();
                    assert_eq!(g.dlog(&uv).unwrap(), sum);
                }
            }
        }
    }

    #[test]
    fn character_counts() {
        let g = xm(3, 2);
        assert_eq!(list_characters(&g, CharacterFilter::All).count(), 6);
        assert_eq!(list_characters(&g, CharacterFilter::Even).count(), 3);
        let chi0 = DirichletCharacter::trivial(&g);
        assert!(chi0.is_even() && !chi0.is_primitive());
        for q in [3u64, 5, 7] {
            for n in 1..=3usize {
                let g = xm(q, n + 2);
                let count = list_characters(&g, CharacterFilter::EvenPrimitive).count() as u64;
                assert_eq!(count, q.pow(n as u32 + 1) - q.pow(n as u32), "q={q} N={n}");
                assert_eq!(list_characters(&g, CharacterFilter::Even).count() as u64, g.order() / (q - 1));
            }
        }
    }

    #[test]
    fn orthogonality_mod_x_cubed() {
        let g = xm(3, 3);
        let chars: Vec<_> = list_characters(&g, CharacterFilter::All).collect();
        let one = Poly::one(g.ctx());
        for f in all_residues(&g) {
            let s: Complex64 = chars.iter().map(|c| c.eval(&f)).sum();
            let expected = if f == one { g.order() as f64 } else { 0.0 };
            assert!((s - expected).norm() < 1e-10, "{f}");
        }
    }

    #[test]
    fn evaluation_is_multiplicative_and_even_flag_matches_scalars() {
        let g = xm(3, 2);
        let res = all_residues(&g);
        for chi in list_characters(&g, CharacterFilter::All) {
            for a in &res {
                for b in &res {
                    let lhs = chi.eval(&a.mul(b));
                    assert!((lhs - chi.eval(a) * chi.eval(b)).norm() < 1e-12);
                }
            }
        }
        let g = xm(5, 3);
        for chi in list_characters(&g, CharacterFilter::All) {
            let trivial_on_scalars = (1..5).all(|c| (chi.eval(&Poly::constant(g.ctx(), c)) - 1.0).norm() < 1e-12);
            assert_eq!(trivial_on_scalars, chi.is_even());
        }
    }

    #[test]
    fn even_characters_mod_x_squared_have_l_equal_one_minus_u() {
        for q in [3, 5] {
            let g = xm(q, 2);
            for chi in list_characters(&g, CharacterFilter::Even).filter(|c| !c.is_trivial()) {
                let c = l_coefficients_naive(&chi);
                assert!((c[0] - 1.0).norm() < 1e-12 && (c[1] + 1.0).norm() < 1e-12);
                let l = l_polynomial(&chi, CoefficientMode::Naive).unwrap();
                assert_eq!(l.degree(), 1);
                assert!(l.frobenius.is_empty());
            }
        }
    }

    #[test]
    fn riemann_hypothesis_and_trivial_zero_mod_powers_of_x() {
        for q in [3u64, 5, 7] {
            for m in 1..=5 {
                let g = xm(q, m);
                let lpolys = l_polynomials(&g, CharacterFilter::All).unwrap();
                assert_eq!(lpolys.len() as u64, g.order() - 1);
                for l in &lpolys {
                    assert!(l.degree() < m);
                    assert!((l.coeffs[0] - 1.0).norm() < 1e-9);
                    if l.is_even {
                        assert!(l.eval(Complex64::new(1.0, 0.0)).norm() < 1e-9 * (q as f64).powi(m as i32));
                    }
                    if l.is_primitive {
                        let expected = if l.is_even { m.saturating_sub(2) } else { m - 1 };
                        assert_eq!(l.angles.len(), expected, "q={q} m={m} id={}", l.character_id);
                        for z in &l.frobenius {
                            assert!((z.norm() - 1.0).abs() < 1e-6);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn riemann_hypothesis_for_squarefree_modulus() {
        let f3 = FieldCtx::new(3).unwrap();
        let q = Poly::x(&f3).mul(&Poly::from_i64s(&f3, &[1, 1])).mul(&Poly::from_i64s(&f3, &[1, 0, 1]));
        let g = DirichletGroup::new(&q, DEFAULT_BUDGET).unwrap();
        let prim = l_polynomials(&g, CharacterFilter::Primitive).unwrap();
        assert!(!prim.is_empty());
        for l in prim {
            assert_eq!(l.angles.len(), if l.is_even { 2 } else { 3 });
            assert!(l.frobenius.iter().all(|z| (z.norm() - 1.0).abs() < 1e-6));
        }
    }

    #[test]
    fn naive_and_dft_coefficients_agree() {
        let g = xm(5, 4);
        let table = l_coefficient_table(&g);
        for chi in list_characters(&g, CharacterFilter::All) {
            let naive = l_coefficients_naive(&chi);
            for (a, b) in naive.iter().zip(&table[chi.id() as usize]) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn unit_weight_sums_are_l_coefficients() {
        let g = xm(5, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let all_m: Vec<Vec<Complex64>> = (0..4).map(|n| m_sums_all(&g, n, Weight::Unit, DEFAULT_BUDGET).unwrap()).collect();
        for _ in 0..10 {
            let chi = DirichletCharacter::from_id(&g, rng.random_range(1..g.order()));
            let c = l_coefficients_naive(&chi);
            for n in 0..4 {
                let m = m_sum(&chi, n, Weight::Unit, DEFAULT_BUDGET).unwrap();
                assert!((m - c[n]).norm() < 1e-9);
                assert!((all_m[n][chi.id() as usize] - m).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn mobius_sum_of_principal_character_mod_x() {
        // 1/L(u, χ0 mod x) = (1 - qu)/(1 - u)
        let g = xm(3, 1);
        let chi0 = DirichletCharacter::trivial(&g);
        for n in 0..=5 {
            let m = m_sum(&chi0, n, Weight::Mobius, DEFAULT_BUDGET).unwrap();
            let direct: i64 = enumerate_monic(g.ctx(), n, DEFAULT_BUDGET)
                .unwrap()
                .filter(|f| f.coeff(0) != 0)
                .map(|f| crate::arith::mobius(&f, crate::arith::MobiusBackend::Factorization).unwrap() as i64)
                .sum();
            let expected = if n == 0 { 1.0 } else { -2.0 };
            assert!((m.re - expected).abs() < 1e-12 && m.im.abs() < 1e-12);
            assert_eq!(direct as f64, expected);
        }
    }

    #[test]
    fn explicit_formula_mod_x_to_the_fifth() {
        let g = xm(5, 5);
        let chars: Vec<_> = list_characters(&g, CharacterFilter::EvenPrimitive).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let chi = &chars[rng.random_range(0..chars.len())];
            let l = l_polynomial(chi, CoefficientMode::Naive).unwrap();
            assert_eq!(l.frobenius.len(), 3);
            for n in 0..=6 {
                let c = explicit_formula_check(chi, &l, n, DEFAULT_BUDGET).unwrap();
                assert!(c.error <= 1e-6 * 5f64.powf(n as f64 / 2.0), "n={n} err={}", c.error);
                let lhs = Complex64::new(c.lhs.0, c.lhs.1).norm();
                assert!(lhs <= mobius_sum_bound(5, n, 3) + 1e-9);
            }
            let res = generating_identity_residuals(chi, &l, g.degree() + 2, DEFAULT_BUDGET).unwrap();
            assert!(res.iter().all(|&r| r <= 1e-8), "{res:?}");
        }
        let odd = list_characters(&g, CharacterFilter::Primitive).find(|c| !c.is_even()).unwrap();
        let l = l_polynomial(&odd, CoefficientMode::Dft).unwrap();
        assert_eq!(explicit_formula_check(&odd, &l, 2, DEFAULT_BUDGET).unwrap_err(), crate::Error::NotEvenPrimitive);
    }

    #[test]
    fn trivial_character_has_no_l_polynomial() {
        let g = xm(3, 3);
        let chi0 = DirichletCharacter::trivial(&g);
        assert_eq!(l_polynomial(&chi0, CoefficientMode::Naive).unwrap_err(), crate::Error::TrivialCharacter);
    }

    #[test]
    fn katz_constant_statistic() {
        let k = katz_average(5, 2, |_| 1.0, 1000, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(k.empirical, 1.0);
        assert_eq!(k.reference.mean, 1.0);
        assert_eq!(k.characters, 125 - 25);
        assert!(k.caveat.is_some());
    }

    #[test]
    fn csv_export_format() {
        let g = xm(3, 3);
        let lpolys = l_polynomials(&g, CharacterFilter::EvenPrimitive).unwrap();
        let mut out = Vec::new();
        write_characters_csv(&mut out, &lpolys).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("id,even,primitive,degree,coefficients,angles"));
        for (line, l) in lines.zip(&lpolys) {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 6);
            assert_eq!(fields[0], l.character_id.to_string());
            let angle: f64 = fields[5].parse().unwrap();
            assert!((0.0..std::f64::consts::TAU).contains(&angle));
            assert_eq!(fields[5].split('.').nth(1).unwrap().len(), 12);
        }
    }
}
