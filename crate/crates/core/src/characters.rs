//! Dirichlet characters modulo `d`.
//!
//! `(Z/dZ)*` is split by CRT into cyclic factors, one per odd prime power and
//! `<-1> x <5>` for `2^e` with `e >= 3`. Factors are ordered by prime, and a
//! character is labelled by its tuple of exponents read as a mixed-radix
//! number, so the principal character is always label 0. Values are exact
//! roots of unity: an angle numerator over the group exponent.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use crate::arith::{divisors, euler_phi, factorize, gcd, pow_mod};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
struct CyclicFactor {
    /// Generator lifted to a residue mod `d`.
    generator: u64,
    order: u32,
}

#[derive(Debug)]
struct GroupStructure {
    modulus: u64,
    factors: Vec<CyclicFactor>,
    /// Group exponent; every angle numerator is taken over this.
    exponent: u32,
    /// Discrete logs: `dlog[n]` is the exponent tuple of `n`, `None` off units.
    dlog: Vec<Option<Vec<u32>>>,
}

#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    modulus: u64,
    label: usize,
    exponents: Vec<u32>,
    denom: u32,
    /// `angles[n mod d]`: numerator of `arg χ(n) / 2π` over `denom`.
    angles: Arc<[Option<u32>]>,
    conductor: u64,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.label == other.label
    }
}

fn primitive_root_prime_power(p: u64, e: u32) -> u64 {
    let pe = p.pow(e);
    let phi = euler_phi(pe);
    let qs: Vec<u64> = factorize(phi).into_iter().map(|(q, _)| q).collect();
    (2..pe)
        .find(|&g| g % p != 0 && qs.iter().all(|&q| pow_mod(g, phi / q, pe) != 1))
        .expect("odd prime powers are cyclic")
}

/// Residue `x mod d` with `x ≡ a (mod m)` and `x ≡ 1 (mod d/m)`, for `m | d`
/// with `gcd(m, d/m) = 1`.
fn crt_lift(a: u64, m: u64, d: u64) -> u64 {
    let rest = d / m;
    (0..m)
        .map(|k| 1 + k * rest)
        .find(|x| x % m == a % m)
        .map(|x| x % d)
        .unwrap_or(1 % d)
}

impl GroupStructure {
    fn new(d: u64) -> Self {
        let mut factors = Vec::new();
        for (p, e) in factorize(d) {
            let pe = p.pow(e);
            if p == 2 {
                if e >= 2 {
                    factors.push(CyclicFactor {
                        generator: crt_lift(pe - 1, pe, d),
                        order: 2,
                    });
                }
                if e >= 3 {
                    factors.push(CyclicFactor {
                        generator: crt_lift(5, pe, d),
                        order: 1 << (e - 2),
                    });
                }
            } else {
                factors.push(CyclicFactor {
                    generator: crt_lift(primitive_root_prime_power(p, e), pe, d),
                    order: euler_phi(pe) as u32,
                });
            }
        }
        let exponent = factors
            .iter()
            .fold(1u64, |acc, f| num_integer::lcm(acc, f.order as u64)) as u32;

        let mut dlog = vec![None; d as usize];
        let size: usize = factors.iter().map(|f| f.order as usize).product();
        for idx in 0..size {
            let tuple = mixed_radix(idx, &factors);
            let n = factors
                .iter()
                .zip(&tuple)
                .fold(1 % d, |acc, (f, &k)| {
                    ((acc as u128 * pow_mod(f.generator, k as u64, d) as u128) % d as u128) as u64
                });
            dlog[n as usize] = Some(tuple);
        }
        Self {
            modulus: d,
            factors,
            exponent,
            dlog,
        }
    }

    fn size(&self) -> usize {
        self.factors.iter().map(|f| f.order as usize).product()
    }
}

fn mixed_radix(mut idx: usize, factors: &[CyclicFactor]) -> Vec<u32> {
    let mut out = vec![0; factors.len()];
    for (slot, f) in out.iter_mut().zip(factors).rev() {
        *slot = (idx % f.order as usize) as u32;
        idx /= f.order as usize;
    }
    out
}

/// The full character group modulo `d` in canonical order.
#[derive(Debug, Clone)]
pub struct CharacterGroup {
    structure: Arc<GroupStructure>,
    characters: Vec<DirichletCharacter>,
}

impl CharacterGroup {
    pub fn new(d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d", "modulus must be >= 1"));
        }
        let structure = Arc::new(GroupStructure::new(d));
        let den = structure.exponent;
        let mut characters = Vec::with_capacity(structure.size());
        for label in 0..structure.size() {
            let exponents = mixed_radix(label, &structure.factors);
            let angles: Arc<[Option<u32>]> = structure
                .dlog
                .iter()
                .map(|slot| {
                    slot.as_ref().map(|tuple| {
                        let mut acc = 0u64;
                        for ((f, &a), &k) in structure.factors.iter().zip(&exponents).zip(tuple) {
                            acc += a as u64 * k as u64 * (den / f.order) as u64;
                        }
                        (acc % den as u64) as u32
                    })
                })
                .collect();
            characters.push(DirichletCharacter {
                modulus: d,
                label,
                exponents,
                denom: den,
                angles,
                conductor: 0,
            });
        }
        for chi in &mut characters {
            chi.conductor = chi.compute_conductor();
        }
        Ok(Self {
            structure,
            characters,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.structure.modulus
    }

    pub fn characters(&self) -> &[DirichletCharacter] {
        &self.characters
    }

    pub fn into_characters(self) -> Vec<DirichletCharacter> {
        self.characters
    }

    pub fn get(&self, label: usize) -> Option<&DirichletCharacter> {
        self.characters.get(label)
    }

    /// Orders of the cyclic factors, in canonical order.
    pub fn factor_orders(&self) -> Vec<u32> {
        self.structure.factors.iter().map(|f| f.order).collect()
    }

    pub fn generators(&self) -> Vec<u64> {
        self.structure.factors.iter().map(|f| f.generator).collect()
    }

    /// The character of this group whose values agree with `chi` on every
    /// unit, if any.
    fn find_matching(&self, table: &[Option<(u32, u32)>]) -> Option<&DirichletCharacter> {
        self.characters.iter().find(|c| {
            table.iter().enumerate().all(|(n, v)| match (v, c.angles[n]) {
                (None, None) => true,
                (Some((num, den)), Some(k)) => {
                    *num as u64 * c.denom as u64 == k as u64 * *den as u64
                }
                _ => false,
            })
        })
    }
}

/// All `φ(d)` characters mod `d`, principal first.
pub fn character_group(d: u64) -> Result<Vec<DirichletCharacter>> {
    Ok(CharacterGroup::new(d)?.into_characters())
}

impl DirichletCharacter {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_principal(&self) -> bool {
        self.angles.iter().all(|a| matches!(a, None | Some(0)))
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus
    }

    /// True when every value is real (`±1` or 0).
    pub fn is_real(&self) -> bool {
        self.angles
            .iter()
            .flatten()
            .all(|&k| k == 0 || 2 * k == self.denom)
    }

    /// `arg χ(n) / 2π` as a reduced fraction `(num, den)`, or `None` when
    /// `gcd(n, d) > 1`.
    pub fn angle(&self, n: u64) -> Option<(u32, u32)> {
        self.angles[(n % self.modulus) as usize].map(|k| {
            let g = gcd(k as u64, self.denom as u64) as u32;
            (k / g, self.denom / g)
        })
    }

    pub fn evaluate(&self, n: u64) -> Complex64 {
        match self.angles[(n % self.modulus) as usize] {
            None => Complex64::new(0.0, 0.0),
            Some(k) => unit_root(k, self.denom),
        }
    }

    /// Values on `0..modulus` as complex numbers.
    pub fn value_table(&self) -> Vec<Complex64> {
        (0..self.modulus).map(|n| self.evaluate(n)).collect()
    }

    fn compute_conductor(&self) -> u64 {
        let d = self.modulus;
        for f in divisors(d) {
            let trivial_on_kernel = (1..=d)
                .filter(|&n| n % f == 1 % f && gcd(n, d) == 1)
                .all(|n| self.angles[(n % d) as usize] == Some(0));
            if trivial_on_kernel {
                return f;
            }
        }
        d
    }

    /// The conductor and the primitive character inducing `self`.
    pub fn conductor_and_primitive(&self) -> (u64, DirichletCharacter) {
        let f = self.conductor;
        if f == self.modulus {
            return (f, self.clone());
        }
        let d = self.modulus;
        let table: Vec<Option<(u32, u32)>> = (0..f)
            .map(|r| {
                if gcd(r, f) != 1 {
                    return None;
                }
                let n = (0..d / f)
                    .map(|k| r + k * f)
                    .find(|&n| gcd(n, d) == 1)
                    .expect("every unit mod f lifts to a unit mod d");
                self.angle(n)
            })
            .collect();
        let group = CharacterGroup::new(f).expect("conductor >= 1");
        let prim = group
            .find_matching(&table)
            .expect("induced values define a character mod the conductor")
            .clone();
        (f, prim)
    }

    /// Text record: modulus, label, conductor, then `n:num/den` for every unit.
    pub fn to_record(&self) -> String {
        let mut s = format!(
            "character modulus={} label={} conductor={}\nangles",
            self.modulus, self.label, self.conductor
        );
        for n in 0..self.modulus {
            if let Some((num, den)) = self.angle(n) {
                let _ = write!(s, " {n}:{num}/{den}");
            }
        }
        s
    }

    pub fn from_record(record: &str) -> Result<Self> {
        let mut lines = record.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty record".into()))?;
        let mut modulus = None;
        let mut label = None;
        let mut conductor = None;
        for tok in header.split_whitespace().skip(1) {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token `{tok}`")))?;
            let v: u64 = v.parse().map_err(|_| Error::Parse(format!("bad value `{v}`")))?;
            match k {
                "modulus" => modulus = Some(v),
                "label" => label = Some(v as usize),
                "conductor" => conductor = Some(v),
                _ => return Err(Error::Parse(format!("unknown key `{k}`"))),
            }
        }
        let (modulus, label, conductor) = match (modulus, label, conductor) {
            (Some(m), Some(l), Some(c)) => (m, l, c),
            _ => return Err(Error::Parse("header needs modulus, label, conductor".into())),
        };
        let group = CharacterGroup::new(modulus).map_err(|e| Error::Parse(e.to_string()))?;
        let chi = group
            .get(label)
            .ok_or_else(|| Error::Parse(format!("label {label} out of range")))?
            .clone();
        let angles = lines.next().ok_or_else(|| Error::Parse("missing angle table".into()))?;
        let mut seen = 0usize;
        for tok in angles.split_whitespace().skip(1) {
            let parse = || -> Option<(u64, u32, u32)> {
                let (n, frac) = tok.split_once(':')?;
                let (num, den) = frac.split_once('/')?;
                Some((n.parse().ok()?, num.parse().ok()?, den.parse().ok()?))
            };
            let (n, num, den) =
                parse().ok_or_else(|| Error::Parse(format!("bad angle `{tok}`")))?;
            if chi.angle(n) != Some((num, den)) {
                return Err(Error::Parse(format!("angle mismatch at n = {n}")));
            }
            seen += 1;
        }
        if seen as u64 != euler_phi(modulus) || chi.conductor != conductor {
            return Err(Error::Parse("record inconsistent with its label".into()));
        }
        Ok(chi)
    }
}

fn unit_root(k: u32, den: u32) -> Complex64 {
    // reduce to (-1/2, 1/2] so quarter turns come out exact
    let (k, den) = (k as i64, den as i64);
    let mut num = k % den;
    if 2 * num > den {
        num -= den;
    }
    if 4 * num == den {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * num == -den {
        return Complex64::new(0.0, -1.0);
    }
    if 2 * num == den {
        return Complex64::new(-1.0, 0.0);
    }
    if num == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let (s, c) = (TAU * num as f64 / den as f64).sin_cos();
    Complex64::new(c, s)
}

/// `χ(n)`; zero when `gcd(n, d) > 1`.
pub fn evaluate(chi: &DirichletCharacter, n: u64) -> Complex64 {
    chi.evaluate(n)
}

pub fn conductor_and_primitive(chi: &DirichletCharacter) -> (u64, DirichletCharacter) {
    chi.conductor_and_primitive()
}
