//! Closed-form thresholds along a τ-line, in terms of the largest
//! population y of the reduced vector (1, x(y, τ), y).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::method::Method;
use crate::tau::{is_ultimately_violatory, limiting_quotas, TauValue};

/// Beyond y_F the quota floors equal (0, ⌊q̃₂⌋, ⌊q̃₃⌋).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorThreshold {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
    pub y_f: f64,
}

/// Thresholds along one τ-line. `None` in `y_star`, `y_tau` or `y_max`
/// stands for +∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
    #[serde(rename = "y_F")]
    pub y_f: f64,
    pub y_star: Option<f64>,
    pub y_tau: Option<f64>,
    pub y_max: Option<f64>,
    pub ultimately_violatory: bool,
}

fn floors(tau: TauValue, seats: u32) -> Result<(u32, u32)> {
    let lim = limiting_quotas(tau, seats);
    if lim.exceptional {
        return Err(Error::ExceptionalTau(tau.get()));
    }
    Ok((lim.q2.floor() as u32, lim.q3.floor() as u32))
}

pub fn floor_threshold(tau: TauValue, seats: u32) -> Result<FloorThreshold> {
    let (m2, k) = floors(tau, seats)?;
    let t = tau.get();
    let m = f64::from(seats);
    let y1 = (2.0 * m - 3.0) / (3.0 - 3.0 * t);
    let y2 = if t < 0.0 {
        let j = f64::from(m2);
        (3.0 * j - m) / (m - 3.0 * m * t - 3.0 * j + 3.0 * j * t)
    } else if t == 0.0 {
        1.0
    } else {
        let j = f64::from(m2 + 1);
        (3.0 * j - m) / (m - 3.0 * m * t - 3.0 * j + 3.0 * t * j)
    };
    let kf = f64::from(k);
    let y3 = 3.0 * kf / (2.0 * m - 3.0 * kf + 3.0 * t * kf);
    Ok(FloorThreshold {
        y1,
        y2,
        y3,
        y_f: y1.max(y2).max(y3),
    })
}

/// y* solving the priority equality between the two large states; `None`
/// when the equality is never reached.
fn priority_equality(method: Method, tau: TauValue, seats: u32, k: u32) -> Option<f64> {
    let m2 = seats - k - 1;
    let a = method.divisor(k - 1);
    let denom = 2.0 * method.divisor(m2) + (3.0 * tau.get() - 1.0) * a;
    (denom > 0.0).then(|| a / denom)
}

/// (y*, y_τ). Past y_τ the guaranteed seat no longer causes a violation.
pub fn nonviolatory_threshold(
    method: Method,
    tau: TauValue,
    seats: u32,
) -> Result<(Option<f64>, Option<f64>)> {
    let ft = floor_threshold(tau, seats)?;
    if is_ultimately_violatory(method, seats, tau)? {
        return Err(Error::ViolatoryTau(tau.get()));
    }
    let (_, k) = floors(tau, seats)?;
    let y_star = priority_equality(method, tau, seats, k.max(1));
    Ok((y_star, y_star.map(|s| s.max(ft.y_f))))
}

pub fn y_max(method: Method, tau: TauValue, seats: u32) -> Result<Option<f64>> {
    match nonviolatory_threshold(method, tau, seats) {
        Ok((_, y_tau)) => Ok(y_tau),
        Err(Error::ViolatoryTau(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn threshold_set(method: Method, tau: TauValue, seats: u32) -> Result<ThresholdSet> {
    let ft = floor_threshold(tau, seats)?;
    let (y_star, y_tau, violatory) = match nonviolatory_threshold(method, tau, seats) {
        Ok((s, t)) => (s, t, false),
        Err(Error::ViolatoryTau(_)) => (None, Some(ft.y_f), true),
        Err(e) => return Err(e),
    };
    Ok(ThresholdSet {
        y1: ft.y1,
        y2: ft.y2,
        y3: ft.y3,
        y_f: ft.y_f,
        y_star,
        y_tau,
        y_max: if violatory { None } else { y_tau },
        ultimately_violatory: violatory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::{standard_quotas, PopulationInstance};
    use crate::tau::x_on_line;

    fn tau(t: f64) -> TauValue {
        TauValue::new(t).unwrap()
    }

    fn quota_floors(t: TauValue, seats: u32, y: f64) -> Vec<u64> {
        let x = x_on_line(y, t).unwrap();
        standard_quotas(&PopulationInstance::from_f64(&[1.0, x, y], seats).unwrap()).floors()
    }

    #[test]
    fn floor_threshold_examples() {
        let f = floor_threshold(tau(0.3), 10).unwrap();
        assert!((f.y1 - 17.0 / 2.1).abs() < 1e-12);
        assert!((f.y2 - 7.0 / 1.1).abs() < 1e-12);
        assert!((f.y3 - 27.0 / 1.1).abs() < 1e-12);
        assert_eq!(f.y_f, f.y3);
        assert_eq!(floor_threshold(tau(0.0), 10).unwrap().y2, 1.0);
        assert_eq!(floor_threshold(tau(0.0), 11).unwrap().y2, 1.0);
        assert!(matches!(
            floor_threshold(tau(0.0), 9),
            Err(Error::ExceptionalTau(_))
        ));
    }

    #[test]
    fn floors_stabilize_past_y_f() {
        for seats in [5u32, 10, 17] {
            for i in -32..=32 {
                let t = tau(i as f64 / 100.0);
                let Ok(f) = floor_threshold(t, seats) else {
                    continue;
                };
                let lim = limiting_quotas(t, seats);
                let want = vec![0, lim.q2.floor() as u64, lim.q3.floor() as u64];
                for mult in [1.01, 2.0, 10.0] {
                    let y = f.y_f * mult;
                    if x_on_line(y, t).is_ok() {
                        assert_eq!(quota_floors(t, seats, y), want, "τ={t} M={seats} y={y}");
                    }
                }
            }
        }
    }

    #[test]
    fn nonviolatory_examples() {
        let mj = Method::ModifiedJefferson;
        let (s, _) = nonviolatory_threshold(mj, tau(0.2), 10).unwrap();
        assert!((s.unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(
            nonviolatory_threshold(mj, tau(0.3), 10),
            Err(Error::ViolatoryTau(_))
        ));
        let set = threshold_set(mj, tau(0.3), 10).unwrap();
        assert_eq!(set.y_tau, Some(set.y_f));
        assert_eq!(set.y_max, None);
        assert_eq!(y_max(mj, tau(0.3), 10).unwrap(), None);

        let f = floor_threshold(tau(0.2), 10).unwrap();
        assert_eq!(y_max(mj, tau(0.2), 10).unwrap(), Some(f.y_f.max(10.0)));
        assert!(y_max(Method::HuntingtonHill, tau(-0.2), 10)
            .unwrap()
            .is_some());
    }

    fn caused(m: Method, t: TauValue, seats: u32, y: f64) -> Option<bool> {
        let x = x_on_line(y, t).ok()?;
        let r = crate::violation::classify_violation_f64(m, &[1.0, x, y], seats).ok()?;
        Some(r.is_caused_by_nonzero())
    }

    #[test]
    fn violation_region_is_between_thresholds() {
        let methods = [
            Method::ModifiedJefferson,
            Method::ModifiedWebster,
            Method::HuntingtonHill,
            Method::Dean,
        ];
        for m in methods {
            for seats in [4u32, 5, 10, 11, 20] {
                for i in -330..=330 {
                    let t = tau(i as f64 / 1000.0);
                    let Ok(set) = threshold_set(m, t, seats) else {
                        continue;
                    };
                    let v = crate::tau::violatory_set(m, seats).unwrap();
                    if v.intervals
                        .iter()
                        .flatten()
                        .any(|e| (e - t.get()).abs() < 1e-6)
                    {
                        continue;
                    }
                    let lo = set.y_f;
                    let open = set.y_max.is_none_or(|hi| hi > lo * 1.002);
                    if let Some(c) = caused(m, t, seats, lo * 0.999) {
                        assert!(!c, "{m} M={seats} τ={t} below y_F");
                    }
                    if let Some(c) = caused(m, t, seats, lo * 1.001) {
                        assert_eq!(c, open, "{m} M={seats} τ={t} above y_F {set:?}");
                    }
                    if let Some(hi) = set.y_max {
                        if let Some(c) = caused(m, t, seats, hi * 1.001) {
                            assert!(!c, "{m} M={seats} τ={t} above y_max {set:?}");
                        }
                        if open {
                            if let Some(c) = caused(m, t, seats, hi * 0.999) {
                                assert!(c, "{m} M={seats} τ={t} below y_max {set:?}");
                            }
                        }
                    } else if let Some(c) = caused(m, t, seats, lo * 1000.0) {
                        assert!(c, "{m} M={seats} τ={t} violatory");
                    }
                }
            }
        }
    }
}
