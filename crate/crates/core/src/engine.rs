//! Sequential highest-priority seat assignment.
//!
//! The engine is generic over the arithmetic used for priority comparisons:
//! [`Exact`] compares p_a²·δ(r_b)² against p_b²·δ(r_a)² on integers, so
//! Huntington-Hill never leaves rational arithmetic; [`Float`] works in
//! doubles and reports comparisons within a relative 1e-12 as ambiguous so
//! the caller can rerun exactly.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::method::Method;
use crate::population::{common_integers, PopulationInstance};

/// Relative gap below which two float priorities are treated as a near tie.
pub const FLOAT_TIE_TOLERANCE: f64 = 1e-12;
/// Absolute distance to an integer below which a float quota's floor is
/// treated as undecidable.
pub const FLOAT_QUOTA_TOLERANCE: f64 = 1e-9;

/// One step of the assignment sequence: `state` received its `seat`-th seat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatAward {
    pub state: usize,
    pub seat: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Apportionment {
    pub method: Method,
    pub seats: Vec<u32>,
    /// Every seat in the order it was handed out, guaranteed seats first.
    pub order: Vec<SeatAward>,
}

impl Apportionment {
    pub fn house_size(&self) -> u32 {
        self.seats.iter().sum()
    }
}

/// Why the engine stopped before finishing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Stop {
    /// Exactly equal priorities where the outcome depends on who goes first.
    Tie(Vec<usize>),
    /// Float comparison too close to call.
    Ambiguous,
}

impl Stop {
    /// Re-indexes a stop raised on `pops[1..]` against the full slice.
    pub(crate) fn shifted(self) -> Stop {
        match self {
            Stop::Tie(states) => Stop::Tie(states.into_iter().map(|s| s + 1).collect()),
            other => other,
        }
    }

    pub(crate) fn into_error(self) -> Error {
        match self {
            Stop::Tie(states) => Error::TieDetected { states },
            // exact arithmetic never reports ambiguity
            Stop::Ambiguous => unreachable!("ambiguous comparison in exact arithmetic"),
        }
    }
}

pub(crate) trait Arith {
    type Pop: Clone;

    /// Orders p_a/δ(r_a) against p_b/δ(r_b). `None` means too close to call.
    fn compare(method: Method, a: &Self::Pop, ra: u32, b: &Self::Pop, rb: u32) -> Option<Ordering>;

    /// (⌊qᵢ⌋, ⌈qᵢ⌉) for each state, or `None` if some quota is too close to
    /// an integer to call.
    fn quota_bounds(pops: &[Self::Pop], house: u32) -> Option<Vec<(u64, u64)>>;
}

#[derive(Debug, Clone)]
pub(crate) struct ExactPop {
    value: BigInt,
    square: BigInt,
}

pub(crate) struct Exact;

impl Exact {
    /// Rescales to integers; ratios, and so every comparison, are unchanged.
    pub(crate) fn pops(pops: &[BigRational]) -> Vec<ExactPop> {
        common_integers(pops)
            .into_iter()
            .map(|value| ExactPop {
                square: &value * &value,
                value,
            })
            .collect()
    }
}

impl Arith for Exact {
    type Pop = ExactPop;

    fn compare(method: Method, a: &ExactPop, ra: u32, b: &ExactPop, rb: u32) -> Option<Ordering> {
        let da = method.divisor_squared(ra);
        let db = method.divisor_squared(rb);
        let lhs = &a.square * BigInt::from(db.num) * BigInt::from(da.den);
        let rhs = &b.square * BigInt::from(da.num) * BigInt::from(db.den);
        Some(lhs.cmp(&rhs))
    }

    fn quota_bounds(pops: &[ExactPop], house: u32) -> Option<Vec<(u64, u64)>> {
        let total: BigInt = pops.iter().map(|p| &p.value).sum();
        let m = BigInt::from(house);
        pops.iter()
            .map(|p| {
                let (q, r) = (&m * &p.value).div_rem(&total);
                let floor = q.to_u64()?;
                Some((floor, if r.is_zero() { floor } else { floor + 1 }))
            })
            .collect()
    }
}

pub(crate) struct Float;

impl Arith for Float {
    type Pop = f64;

    fn compare(method: Method, a: &f64, ra: u32, b: &f64, rb: u32) -> Option<Ordering> {
        let va = a / method.divisor(ra);
        let vb = b / method.divisor(rb);
        if va.is_infinite() || vb.is_infinite() {
            return va.partial_cmp(&vb);
        }
        if (va - vb).abs() <= FLOAT_TIE_TOLERANCE * va.abs().max(vb.abs()) {
            None
        } else {
            va.partial_cmp(&vb)
        }
    }

    fn quota_bounds(pops: &[f64], house: u32) -> Option<Vec<(u64, u64)>> {
        let total: f64 = pops.iter().sum();
        let m = house as f64;
        pops.iter()
            .map(|p| {
                let q = m * p / total;
                if (q - q.round()).abs() < FLOAT_QUOTA_TOLERANCE {
                    None
                } else {
                    Some((q.floor() as u64, q.ceil() as u64))
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Allocation {
    pub seats: Vec<u32>,
    pub order: Vec<SeatAward>,
}

/// Runs the divisor procedure for `house` seats over `pops`.
pub(crate) fn allocate<A: Arith>(
    method: Method,
    pops: &[A::Pop],
    house: u32,
) -> std::result::Result<Allocation, Stop> {
    let n = pops.len();
    let mut seats = vec![0u32; n];
    let mut order = Vec::with_capacity(house as usize);
    let mut remaining = house;

    if method.guarantees_nonzero() {
        debug_assert!(house as usize >= n);
        for (i, s) in seats.iter_mut().enumerate() {
            *s = 1;
            order.push(SeatAward { state: i, seat: 1 });
        }
        remaining -= n as u32;
    }

    let mut leaders = Vec::with_capacity(n);
    while remaining > 0 {
        leaders.clear();
        leaders.push(0);
        for i in 1..n {
            let best = leaders[0];
            match A::compare(method, &pops[i], seats[i], &pops[best], seats[best]) {
                Some(Ordering::Greater) => {
                    leaders.clear();
                    leaders.push(i);
                }
                Some(Ordering::Equal) => leaders.push(i),
                Some(Ordering::Less) => {}
                None => return Err(Stop::Ambiguous),
            }
        }
        // Tied leaders are all served in consecutive steps, so a tie only
        // matters when there are not enough seats left for all of them.
        if leaders.len() > remaining as usize {
            return Err(Stop::Tie(leaders.clone()));
        }
        let winner = leaders[0];
        seats[winner] += 1;
        order.push(SeatAward {
            state: winner,
            seat: seats[winner],
        });
        remaining -= 1;
    }
    Ok(Allocation { seats, order })
}

/// Ã over ascending `pops`: the smallest state gets one seat and the rest
/// share `house − 1` seats under the same method.
pub(crate) fn allocate_modified<A: Arith>(
    method: Method,
    pops: &[A::Pop],
    house: u32,
) -> std::result::Result<Allocation, Stop> {
    let rest = allocate::<A>(method, &pops[1..], house - 1).map_err(Stop::shifted)?;
    let mut seats = Vec::with_capacity(pops.len());
    seats.push(1);
    seats.extend(&rest.seats);
    let mut order = vec![SeatAward { state: 0, seat: 1 }];
    order.extend(rest.order.iter().map(|a| SeatAward {
        state: a.state + 1,
        seat: a.seat,
    }));
    Ok(Allocation { seats, order })
}

/// Apportions `inst.seats()` seats among the states of `inst`.
///
/// Fails with [`Error::TieDetected`] when two exactly equal priorities
/// compete for the final seat(s).
pub fn apportion(method: Method, inst: &PopulationInstance) -> Result<Apportionment> {
    let pops = Exact::pops(inst.populations());
    let alloc = allocate::<Exact>(method, &pops, inst.seats()).map_err(Stop::into_error)?;
    Ok(Apportionment {
        method,
        seats: alloc.seats,
        order: alloc.order,
    })
}

/// The modified method Ã: the smallest state receives exactly one seat and
/// the remaining M − 1 seats go to the others under `method`.
///
/// Results are reported in the instance's own state order.
pub fn modified_apportion(method: Method, inst: &PopulationInstance) -> Result<Apportionment> {
    method.require_guarantee("the modified method needs a seat guarantee")?;
    let perm = inst.ascending_order();
    let sorted: Vec<BigRational> = perm
        .iter()
        .map(|&i| inst.populations()[i].clone())
        .collect();
    let pops = Exact::pops(&sorted);
    let alloc =
        allocate_modified::<Exact>(method, &pops, inst.seats()).map_err(|stop| match stop {
            Stop::Tie(states) => Error::TieDetected {
                states: states.iter().map(|&s| perm[s]).collect(),
            },
            other => other.into_error(),
        })?;
    Ok(unsort(method, alloc, &perm))
}

/// Maps an allocation over sorted states back to the original order.
pub(crate) fn unsort(method: Method, alloc: Allocation, perm: &[usize]) -> Apportionment {
    let mut seats = vec![0; perm.len()];
    for (sorted_idx, &orig) in perm.iter().enumerate() {
        seats[orig] = alloc.seats[sorted_idx];
    }
    let order = alloc
        .order
        .into_iter()
        .map(|a| SeatAward {
            state: perm[a.state],
            seat: a.seat,
        })
        .collect();
    Apportionment {
        method,
        seats,
        order,
    }
}
