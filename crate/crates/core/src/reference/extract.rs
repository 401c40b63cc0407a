use std::io::{self, Write};

use super::{GridSolution, ReferenceError};
use crate::scalar::Real;

const FAR: usize = 20;
const MIN_GAP: usize = 10;
const NOISE: f64 = 1e-8;

/// Interface `i` maximizing `|q[i+1] - q[i]|` over `lo <= i < hi`, with
/// that jump.
fn steepest<T: Real>(q: &[T], lo: usize, hi: usize) -> Option<(usize, T)> {
    (lo..hi.min(q.len().saturating_sub(1)))
        .map(|i| (i, (q[i + 1] - q[i]).abs()))
        .fold(None, |best: Option<(usize, T)>, (i, d)| match best {
            Some((_, b)) if b >= d => best,
            _ => Some((i, d)),
        })
}

/// Sub-cell position of the front in `q` at interface `i`, where `q` crosses
/// the mean of the states `left` cells to the left and `right` cells to the
/// right.
pub fn front_position<T: Real>(
    q: &[T],
    x_lo: T,
    dx: T,
    i: usize,
    left: usize,
    right: usize,
) -> Option<T> {
    if i < left || i + 1 + right >= q.len() {
        return None;
    }
    let (a, b) = (q[i - left], q[i + 1 + right]);
    let jump = b - a;
    if !(jump.abs() >= T::of(NOISE)) {
        return None;
    }
    // a smooth ramp has no interface standing out from the rest
    let mean = jump.abs() / T::of_usize(left + right + 1);
    if (q[i + 1] - q[i]).abs() < T::of(2.0) * mean {
        return None;
    }
    let mid = (a + b) * T::of(0.5);
    let center = |j: usize| x_lo + dx * (T::of_usize(j) + T::of(0.5));
    let crosses = |j: usize| {
        let (p, r) = (q[j] - mid, q[j + 1] - mid);
        (p <= T::zero()) != (r <= T::zero()) || p == T::zero()
    };
    let j = (0..=left.max(right))
        .flat_map(|d| [i.checked_sub(d), Some(i + d)])
        .flatten()
        .filter(|&j| j >= i - left && j < i + 1 + right)
        .find(|&j| crosses(j))?;
    let step = q[j + 1] - q[j];
    let frac = if step == T::zero() { T::zero() } else { (mid - q[j]) / step };
    Some(center(j) + dx * frac)
}

/// Positions of the u-front and the v-front at output `k`.
pub fn extract_shocks<T: Real>(sol: &GridSolution<T>, k: usize) -> Result<(T, T), ReferenceError> {
    let t = sol.times[k].as_f64();
    let (u, v) = (&sol.u[k], &sol.v[k]);
    let n = sol.cells;
    let x_of = |i: usize| sol.x_center(i).as_f64();
    let margin = |what, i: usize, left: usize, right: usize| {
        if i < left || i + 1 + right >= n {
            Err(ReferenceError::Margin { what, x: x_of(i), t })
        } else {
            Ok(())
        }
    };
    let noise = T::of(NOISE);

    let im = match steepest(u, 0, n) {
        Some((i, d)) if d >= noise => i,
        _ => return Err(ReferenceError::NoFront { what: "u", t }),
    };
    margin("u", im, FAR, FAR)?;
    let xm = front_position(u, sol.x_lo, sol.dx, im, FAR, FAR).ok_or(ReferenceError::NoFront { what: "u", t })?;

    let ip = match steepest(v, im + MIN_GAP, n) {
        Some((i, d)) if d >= noise && i > im + MIN_GAP => i,
        Some((i, d)) if d >= noise && i == im + MIN_GAP => return Err(ReferenceError::Unresolved { t }),
        _ => {
            // a lone v-jump next to the u-front means the two have merged
            let near = steepest(v, im.saturating_sub(MIN_GAP), im + MIN_GAP);
            return Err(match near {
                Some((_, d)) if d >= noise => ReferenceError::Unresolved { t },
                _ => ReferenceError::NoFront { what: "v", t },
            });
        }
    };
    let behind = FAR.min((ip - im) / 2);
    margin("v", ip, behind, FAR)?;
    let xp = front_position(v, sol.x_lo, sol.dx, ip, behind, FAR).ok_or(ReferenceError::NoFront { what: "v", t })?;
    Ok((xm, xp))
}

/// Writes `t,x_minus,x_plus` rows.
pub fn write_fronts_csv<T: Real>(out: &mut impl Write, t: &[T], minus: &[T], plus: &[T]) -> io::Result<()> {
    writeln!(out, "t,x_minus,x_plus")?;
    for ((t, m), p) in t.iter().zip(minus).zip(plus) {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", t.as_f64(), m.as_f64(), p.as_f64())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solution(u: Vec<f64>, v: Vec<f64>, dx: f64) -> GridSolution<f64> {
        GridSolution {
            x_lo: 0.0,
            dx,
            cells: u.len(),
            epsilon: 0.0,
            times: vec![0.5],
            w: vec![v.clone()],
            u: vec![u],
            v: vec![v],
            steps: 0,
            max_courant: 0.0,
            budget_error: [0.0; 2],
        }
    }

    #[test]
    fn step_profiles() {
        let dx = 1.0 / 200.0;
        let x = |i: usize| (i as f64 + 0.5) * dx;
        let u: Vec<f64> = (0..200).map(|i| if x(i) < 0.25 { 1.0 } else { 0.0 }).collect();
        let v: Vec<f64> = (0..200).map(|i| if x(i) < 0.7 { 3.0 } else { 2.0 }).collect();
        let (m, p) = extract_shocks(&solution(u, v, dx), 0).unwrap();
        assert!((m - 0.25).abs() <= dx / 2.0, "{m}");
        assert!((p - 0.7).abs() <= dx / 2.0, "{p}");
    }

    #[test]
    fn smeared_front_is_sub_cell() {
        let dx = 1.0 / 400.0;
        let x = |i: usize| (i as f64 + 0.5) * dx;
        let u: Vec<f64> = (0..400).map(|i| 0.5 - 0.5 * ((x(i) - 0.3012) / (2.0 * dx)).tanh()).collect();
        let v: Vec<f64> = (0..400).map(|i| 2.5 + 0.5 * ((0.8 - x(i)) / (3.0 * dx)).tanh()).collect();
        let (m, p) = extract_shocks(&solution(u, v, dx), 0).unwrap();
        assert!((m - 0.3012).abs() < 0.05 * dx, "{m}");
        assert!((p - 0.8).abs() < 0.05 * dx, "{p}");
    }

    #[test]
    fn ramp_and_flat_have_no_front() {
        let dx = 0.01;
        let ramp: Vec<f64> = (0..100).map(|i| (i as f64 * dx).powi(2)).collect();
        assert_eq!(front_position(&ramp, 0.0, dx, 50, 20, 20), None);
        let flat = vec![2.0; 100];
        assert!(matches!(
            extract_shocks(&solution(flat.clone(), flat.clone(), dx), 0),
            Err(ReferenceError::NoFront { what: "u", .. })
        ));
        let u: Vec<f64> = (0..100).map(|i| if i < 50 { 1.0 } else { 0.0 }).collect();
        assert!(matches!(
            extract_shocks(&solution(u, flat, dx), 0),
            Err(ReferenceError::NoFront { what: "v", .. })
        ));
    }

    #[test]
    fn close_fronts_are_unresolved() {
        let u: Vec<f64> = (0..100).map(|i| if i < 50 { 1.0 } else { 0.0 }).collect();
        let v: Vec<f64> = (0..100).map(|i| if i < 55 { 3.0 } else { 2.0 }).collect();
        assert!(matches!(
            extract_shocks(&solution(u, v, 0.01), 0),
            Err(ReferenceError::Unresolved { .. })
        ));
    }
}
