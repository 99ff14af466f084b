use num_complex::Complex64;
use rayon::prelude::*;

use super::group::DirichletGroup;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rmt::{wrap_angle, UnitarySpectrum};
use crate::roots::polynomial_roots;

/// Which characters [`list_characters`] yields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CharacterFilter {
    All,
    Even,
    EvenPrimitive,
    Primitive,
}

/// χ(g_i) = exp(2πi c_i / d_i) on the group's basis.
#[derive(Clone, Debug)]
pub struct DirichletCharacter<'g> {
    group: &'g DirichletGroup,
    id: u64,
    exponents: Vec<u64>,
    /// `c_i · (exponent / d_i)`, so phases are integers mod the exponent.
    weights: Vec<u64>,
    is_trivial: bool,
    is_even: bool,
    is_primitive: bool,
}

impl<'g> DirichletCharacter<'g> {
    /// The character whose exponent tuple has mixed-radix index `id`.
    pub fn from_id(group: &'g DirichletGroup, id: u64) -> Self {
        Self::from_exponents(group, &group.coords(id))
    }

    pub fn from_exponents(group: &'g DirichletGroup, exponents: &[u64]) -> Self {
        let l = group.exponent();
        let exponents: Vec<u64> = exponents.iter().zip(group.orders()).map(|(&c, &d)| c % d).collect();
        let weights = exponents.iter().zip(group.orders()).map(|(&c, &d)| c * (l / d)).collect();
        let id = group.position_of_coords(&exponents);
        let mut chi = DirichletCharacter { group, id, exponents, weights, is_trivial: false, is_even: false, is_primitive: false };
        chi.is_trivial = chi.exponents.iter().all(|&c| c == 0);
        chi.is_even = chi.phase(group.scalar_position()) == 0;
        chi.is_primitive = group.kernel_generators().iter().all(|k| k.iter().any(|&g| chi.phase(g) != 0));
        chi
    }

    pub fn trivial(group: &'g DirichletGroup) -> Self {
        Self::from_id(group, 0)
    }

    pub fn group(&self) -> &'g DirichletGroup {
        self.group
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn is_trivial(&self) -> bool {
        self.is_trivial
    }

    pub fn is_even(&self) -> bool {
        self.is_even
    }

    pub fn is_primitive(&self) -> bool {
        self.is_primitive
    }

    /// χ(pos) = exp(2πi · phase / exponent).
    pub fn phase(&self, pos: u64) -> u64 {
        let l = self.group.exponent() as u128;
        let mut acc = 0u128;
        let mut rest = pos;
        for (&d, &w) in self.group.orders().iter().zip(&self.weights) {
            acc += (rest % d) as u128 * w as u128;
            rest /= d;
        }
        (acc % l) as u64
    }

    pub fn value_at(&self, pos: u64) -> Complex64 {
        self.group.root(self.phase(pos))
    }

    /// χ(f), zero when f shares a factor with Q.
    pub fn eval(&self, f: &Poly) -> Complex64 {
        match self.group.position(f) {
            Some(p) => self.value_at(p),
            None => Complex64::new(0.0, 0.0),
        }
    }

    fn passes(&self, filter: CharacterFilter) -> bool {
        match filter {
            CharacterFilter::All => true,
            CharacterFilter::Even => self.is_even,
            CharacterFilter::EvenPrimitive => self.is_even && self.is_primitive,
            CharacterFilter::Primitive => self.is_primitive,
        }
    }
}

/// Every character passing `filter`, in id order.
pub fn list_characters(group: &DirichletGroup, filter: CharacterFilter) -> impl Iterator<Item = DirichletCharacter<'_>> {
    (0..group.order()).map(move |id| DirichletCharacter::from_id(group, id)).filter(move |c| c.passes(filter))
}

/// How the coefficients c_0..c_{deg Q - 1} of L(u,χ) are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientMode {
    /// Direct sum over monic representatives of degree below deg Q.
    Naive,
    /// One group DFT per degree, giving every character at once.
    Dft,
}

/// c_n(χ) = Σ χ(f) over monic f of degree n, for n < deg Q.
pub fn l_coefficients_naive(chi: &DirichletCharacter) -> Vec<Complex64> {
    chi.group
        .monic_positions()
        .iter()
        .map(|ps| ps.iter().map(|&p| chi.value_at(p)).sum())
        .collect()
}

/// Coefficient rows for all characters, indexed by character id.
pub fn l_coefficient_table(group: &DirichletGroup) -> &[Vec<Complex64>] {
    group.coefficient_table.get_or_init(|| {
        let per_degree: Vec<Vec<Complex64>> = group
            .monic_positions()
            .par_iter()
            .map(|ps| {
                let mut data = vec![Complex64::new(0.0, 0.0); group.order() as usize];
                for &p in ps {
                    data[p as usize] += 1.0;
                }
                group.dft(&mut data);
                data
            })
            .collect();
        (0..group.order() as usize).map(|id| per_degree.iter().map(|row| row[id]).collect()).collect()
    })
}

pub fn l_coefficients(chi: &DirichletCharacter, mode: CoefficientMode) -> Vec<Complex64> {
    match mode {
        CoefficientMode::Naive => l_coefficients_naive(chi),
        CoefficientMode::Dft => l_coefficient_table(chi.group)[chi.id as usize].clone(),
    }
}

/// L(u,χ) as a polynomial, with its inverse roots and unitarized
/// Frobenius eigenvalues.
#[derive(Clone, Debug)]
pub struct LPolynomial {
    pub character_id: u64,
    pub is_even: bool,
    pub is_primitive: bool,
    /// c_0..c_D with trailing (numerically) zero terms removed.
    pub coeffs: Vec<Complex64>,
    /// Every α with L(u,χ) = Π (1 - α u), the trivial 1 included for even χ.
    pub inverse_roots: Vec<Complex64>,
    /// Nontrivial inverse roots divided by √q.
    pub frobenius: Vec<Complex64>,
    /// Arguments of `frobenius`, in [0, 2π).
    pub angles: Vec<f64>,
    /// |L(1,χ)| before removing the trivial zero (even χ only).
    pub trivial_zero_residual: f64,
}

impl LPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn spectrum(&self) -> UnitarySpectrum {
        UnitarySpectrum::from_angles(self.angles.clone())
    }

    /// L(u,χ) at a complex point.
    pub fn eval(&self, u: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c)
    }
}

pub fn l_polynomial(chi: &DirichletCharacter, mode: CoefficientMode) -> Result<LPolynomial> {
    if chi.is_trivial {
        return Err(Error::TrivialCharacter);
    }
    l_polynomial_from_coefficients(chi, &l_coefficients(chi, mode))
}

pub fn l_polynomial_from_coefficients(chi: &DirichletCharacter, coeffs: &[Complex64]) -> Result<LPolynomial> {
    if chi.is_trivial {
        return Err(Error::TrivialCharacter);
    }
    let q = chi.group.ctx().p() as f64;
    let mut coeffs = coeffs.to_vec();
    while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= 1e-9 * q.powf((coeffs.len() - 1) as f64 / 2.0).max(1.0) {
        coeffs.pop();
    }
    let mut core = coeffs.clone();
    let mut trivial_zero_residual = 0.0;
    if chi.is_even && core.len() > 1 {
        // divide by (1 - u)
        for k in 1..core.len() {
            let prev = core[k - 1];
            core[k] += prev;
        }
        trivial_zero_residual = core.pop().unwrap().norm();
    }
    let nontrivial = if core.len() > 1 {
        let monic_tail: Vec<Complex64> = core[1..].iter().rev().copied().collect();
        polynomial_roots(&monic_tail)?
    } else {
        Vec::new()
    };
    let mut inverse_roots = nontrivial.clone();
    if chi.is_even && coeffs.len() > 1 {
        inverse_roots.push(Complex64::new(1.0, 0.0));
    }
    let frobenius: Vec<Complex64> = nontrivial.iter().map(|z| z / q.sqrt()).collect();
    let angles = frobenius.iter().map(|z| wrap_angle(z.arg())).collect();
    Ok(LPolynomial {
        character_id: chi.id,
        is_even: chi.is_even,
        is_primitive: chi.is_primitive,
        coeffs,
        inverse_roots,
        frobenius,
        angles,
        trivial_zero_residual,
    })
}

/// L-polynomials of every nontrivial character passing `filter`, via the
/// DFT table, in id order.
pub fn l_polynomials(group: &DirichletGroup, filter: CharacterFilter) -> Result<Vec<LPolynomial>> {
    let table = l_coefficient_table(group);
    let chars: Vec<DirichletCharacter> = list_characters(group, filter).filter(|c| !c.is_trivial()).collect();
    chars.par_iter().map(|c| l_polynomial_from_coefficients(c, &table[c.id as usize])).collect()
}

/// CSV rows `id,even,primitive,degree,coefficients,angles`; coefficients
/// as `re:im` and both lists `;`-separated, 12 decimals.
pub fn write_characters_csv<W: std::io::Write>(mut out: W, lpolys: &[LPolynomial]) -> std::io::Result<()> {
    writeln!(out, "id,even,primitive,degree,coefficients,angles")?;
    for l in lpolys {
        let coeffs: Vec<String> = l.coeffs.iter().map(|c| format!("{:.12}:{:.12}", c.re, c.im)).collect();
        let angles: Vec<String> = l.angles.iter().map(|&a| format!("{:.12}", if a >= std::f64::consts::TAU - 5e-13 { 0.0 } else { a })).collect();
        writeln!(out, "{},{},{},{},{},{}", l.character_id, l.is_even, l.is_primitive, l.degree(), coeffs.join(";"), angles.join(";"))?;
    }
    Ok(())
}
