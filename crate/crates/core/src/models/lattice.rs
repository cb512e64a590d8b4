//! Integer lattice points in Euclidean balls.

/// Converts a real squared radius to the largest admissible integer `|k|^2`,
/// absorbing rounding in the caller's `λ^2`.
pub(crate) fn integer_radius_sq(r2: f64) -> Option<u64> {
    if !(r2 >= -1e-9) {
        return None;
    }
    let slack = 1e-9 * r2.abs().max(1.0);
    Some((r2 + slack).floor().max(0.0) as u64)
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `#{k ∈ ℤ^d : |k|^2 ≤ r2}`.
pub fn ball_count(d: usize, r2: u64) -> u64 {
    match d {
        0 => 1,
        1 => 2 * isqrt(r2) + 1,
        2 => {
            let r = isqrt(r2);
            let mut total = 0;
            for k in 0..=r {
                let w = 2 * isqrt(r2 - k * k) + 1;
                total += if k == 0 { w } else { 2 * w };
            }
            total
        }
        _ => {
            let r = isqrt(r2);
            let mut total = ball_count(d - 1, r2);
            for k in 1..=r {
                total += 2 * ball_count(d - 1, r2 - k * k);
            }
            total
        }
    }
}

/// All `k ∈ ℤ^d` with `|k|^2 ≤ r2`, in lexicographic order.
pub fn ball_points(d: usize, r2: u64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(d);
    fill(d, r2, &mut current, &mut out);
    out
}

fn fill(d: usize, r2: u64, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if current.len() == d {
        out.push(current.clone());
        return;
    }
    let r = isqrt(r2) as i64;
    for k in -r..=r {
        current.push(k);
        fill(d, r2 - (k * k) as u64, current, out);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_circle_counts() {
        assert_eq!(ball_count(2, 100), 317);
        assert_eq!(ball_count(2, 0), 1);
        assert_eq!(ball_count(2, 1), 5);
        assert_eq!(ball_count(1, 30), 11);
    }

    #[test]
    fn counts_agree_with_enumeration() {
        for d in 1..=4 {
            for r2 in [0u64, 1, 2, 5, 13, 30] {
                assert_eq!(ball_count(d, r2) as usize, ball_points(d, r2).len(), "d={d} r2={r2}");
            }
        }
    }

    #[test]
    fn radius_absorbs_rounding() {
        let lam: f64 = 50f64.sqrt();
        assert_eq!(integer_radius_sq(lam * lam), Some(50));
        assert_eq!(integer_radius_sq(-1.0), None);
        assert_eq!(isqrt(99), 9);
        assert_eq!(isqrt(100), 10);
    }
}
