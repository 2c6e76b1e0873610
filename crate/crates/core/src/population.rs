//! Population vectors, exact decimal parsing and standard quotas.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Positive, pairwise-distinct populations and a house size.
///
/// States keep the order they were given in; operations that need ascending
/// populations sort internally and map results back.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationInstance {
    populations: Vec<BigRational>,
    seats: u32,
}

impl PopulationInstance {
    pub fn new(populations: Vec<BigRational>, seats: u32) -> Result<Self> {
        if populations.len() < 2 {
            return Err(Error::TooFewStates {
                min: 2,
                got: populations.len(),
            });
        }
        for (i, p) in populations.iter().enumerate() {
            if !p.is_positive() {
                return Err(Error::InvalidPopulation(p.to_string()));
            }
            if let Some(j) = populations[..i].iter().position(|q| q == p) {
                return Err(Error::DuplicatePopulation(j, i));
            }
        }
        if (seats as usize) < populations.len() {
            return Err(Error::TooFewSeats {
                seats,
                states: populations.len(),
            });
        }
        Ok(PopulationInstance { populations, seats })
    }

    /// Parses each population as an exact decimal (`"1990"`, `"6.25"`,
    /// `"1.5e3"`) or fraction (`"25/4"`).
    pub fn from_decimals<S: AsRef<str>>(populations: &[S], seats: u32) -> Result<Self> {
        let pops = populations
            .iter()
            .map(|s| parse_decimal(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pops, seats)
    }

    /// Converts each float exactly (every finite f64 is a dyadic rational).
    pub fn from_f64(populations: &[f64], seats: u32) -> Result<Self> {
        let pops = populations
            .iter()
            .map(|&p| exact_from_f64(p).ok_or_else(|| Error::InvalidPopulation(p.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pops, seats)
    }

    pub fn populations(&self) -> &[BigRational] {
        &self.populations
    }

    pub fn seats(&self) -> u32 {
        self.seats
    }

    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }

    pub fn total(&self) -> BigRational {
        self.populations
            .iter()
            .fold(BigRational::zero(), |acc, p| acc + p)
    }

    /// Indices of the states in ascending population order.
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.populations[a].cmp(&self.populations[b]));
        idx
    }

    pub fn is_ascending(&self) -> bool {
        self.populations.windows(2).all(|w| w[0] < w[1])
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.populations
            .iter()
            .map(|p| p.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// The same instance with every population multiplied by `factor`.
    pub fn scaled(&self, factor: &BigRational) -> Result<Self> {
        Self::new(
            self.populations.iter().map(|p| p * factor).collect(),
            self.seats,
        )
    }

    /// The same instance with states reordered so that state `i` of the
    /// result is state `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Self::new(
            perm.iter().map(|&i| self.populations[i].clone()).collect(),
            self.seats,
        )
    }
}

/// Standard quotas qᵢ = M·pᵢ/P in exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotaVector {
    quotas: Vec<BigRational>,
}

impl QuotaVector {
    pub fn new(quotas: Vec<BigRational>) -> Self {
        QuotaVector { quotas }
    }

    pub fn quotas(&self) -> &[BigRational] {
        &self.quotas
    }

    pub fn len(&self) -> usize {
        self.quotas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotas.is_empty()
    }

    pub fn sum(&self) -> BigRational {
        self.quotas
            .iter()
            .fold(BigRational::zero(), |acc, q| acc + q)
    }

    pub fn floors(&self) -> Vec<u64> {
        self.quotas.iter().map(floor_u64).collect()
    }

    pub fn ceilings(&self) -> Vec<u64> {
        self.quotas.iter().map(ceil_u64).collect()
    }

    /// Decimal parts qᵢ − ⌊qᵢ⌋.
    pub fn fractional_parts(&self) -> Vec<f64> {
        self.quotas
            .iter()
            .map(|q| q.fract().to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.quotas
            .iter()
            .map(|q| q.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

pub fn standard_quotas(inst: &PopulationInstance) -> QuotaVector {
    quotas_of(inst.populations(), inst.seats())
}

pub(crate) fn quotas_of(pops: &[BigRational], seats: u32) -> QuotaVector {
    let total = pops.iter().fold(BigRational::zero(), |acc, p| acc + p);
    let m = BigRational::from_integer(BigInt::from(seats));
    QuotaVector::new(pops.iter().map(|p| &m * p / &total).collect())
}

pub(crate) fn floor_u64(q: &BigRational) -> u64 {
    q.floor().to_integer().to_u64().unwrap_or(0)
}

pub(crate) fn ceil_u64(q: &BigRational) -> u64 {
    q.ceil().to_integer().to_u64().unwrap_or(0)
}

pub fn exact_from_f64(x: f64) -> Option<BigRational> {
    if x.is_finite() {
        BigRational::from_float(x)
    } else {
        None
    }
}

/// Scales rationals by the lcm of their denominators, giving integers with
/// the same ratios.
pub(crate) fn common_integers(pops: &[BigRational]) -> Vec<BigInt> {
    let lcm = pops.iter().fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    pops.iter()
        .map(|p| p.numer() * (&lcm / p.denom()))
        .collect()
}

/// Parses a nonnegative decimal with optional fraction and exponent, or a
/// fraction `a/b`, into an exact rational. Rejects zero and negatives.
pub fn parse_decimal(text: &str) -> Result<BigRational> {
    let bad = || Error::InvalidPopulation(text.to_string());
    let s = text.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_decimal(n).map_err(|_| bad())?;
        let d = parse_decimal(d).map_err(|_| bad())?;
        return Ok(n / d);
    }
    let s = s.strip_prefix('+').unwrap_or(s);
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigUint = digits.parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = BigRational::from_integer(BigInt::from(numer));
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    if !value.is_positive() {
        return Err(bad());
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_decimals() {
        assert_eq!(parse_decimal("1990").unwrap(), r(1990, 1));
        assert_eq!(parse_decimal("6.25").unwrap(), r(25, 4));
        assert_eq!(parse_decimal(".5").unwrap(), r(1, 2));
        assert_eq!(parse_decimal("1.5e3").unwrap(), r(1500, 1));
        assert_eq!(parse_decimal("2.5E-2").unwrap(), r(1, 40));
        assert_eq!(parse_decimal("25/4").unwrap(), r(25, 4));
        for bad in ["", "-3", "0", "abc", "1.2.3", "1e", "0.000"] {
            assert!(parse_decimal(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn instance_validation() {
        assert!(matches!(
            PopulationInstance::from_decimals(&["1"], 3),
            Err(Error::TooFewStates { .. })
        ));
        assert!(matches!(
            PopulationInstance::from_decimals(&["1", "2", "1.0"], 3),
            Err(Error::DuplicatePopulation(0, 2))
        ));
        assert!(matches!(
            PopulationInstance::from_decimals(&["1", "2", "3"], 2),
            Err(Error::TooFewSeats { .. })
        ));
        let inst = PopulationInstance::from_decimals(&["3", "1", "2"], 6).unwrap();
        assert_eq!(inst.ascending_order(), vec![1, 2, 0]);
        assert!(!inst.is_ascending());
    }

    #[test]
    fn quota_examples() {
        let q = standard_quotas(&PopulationInstance::from_decimals(&["1", "2", "3"], 6).unwrap());
        assert_eq!(q.quotas(), &[r(1, 1), r(2, 1), r(3, 1)]);

        let q =
            standard_quotas(&PopulationInstance::from_decimals(&["1", "100", "1990"], 10).unwrap());
        assert_eq!(q.quotas(), &[r(10, 2091), r(1000, 2091), r(19900, 2091)]);
        assert_eq!(q.sum(), r(10, 1));
        let f = q.to_f64();
        assert!((f[0] - 0.004783).abs() < 1e-6);
        assert!((f[1] - 0.478240).abs() < 1e-6);
        assert!((f[2] - 9.516977).abs() < 1e-6);
        assert_eq!(q.floors(), vec![0, 0, 9]);
        assert_eq!(q.ceilings(), vec![1, 1, 10]);

        let q = standard_quotas(&PopulationInstance::from_decimals(&["2", "4", "6"], 6).unwrap());
        assert_eq!(q.quotas(), &[r(1, 1), r(2, 1), r(3, 1)]);
    }

    #[test]
    fn common_integers_keep_ratios() {
        let ints = common_integers(&[r(1, 2), r(2, 3), r(5, 1)]);
        assert_eq!(
            ints,
            vec![BigInt::from(3), BigInt::from(4), BigInt::from(30)]
        );
    }
}
