//! Slow, independent reference implementations used by the test suite to
//! cross-check the fast paths.
//!
//! Nothing here is part of the public contract. The implementations favor
//! directness over speed: the determinant walks every permutation, the
//! Hessian is plain central differencing. They are kept compiled (not
//! test-gated) so the checks cannot rot.

use crate::qlinalg::QMatrix;
use crate::quat::{qmul, Quat, Quaternion};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Moore determinant by direct expansion over permutations.
///
/// Each permutation is decomposed into disjoint cycles, every cycle written
/// with its largest element first, cycles ordered by decreasing leader. The
/// term is the left-to-right product of entries along the cycles, weighted
/// by the permutation sign. For Hermitian input the sum is a real quaternion
/// (tests assert the imaginary residue is negligible).
///
/// Cost is n! * n; intended for n <= 5.
pub fn moore_det_reference(a: &QMatrix<f64>) -> Quat {
    let n = a.rows();
    assert_eq!(n, a.cols(), "square input required");
    assert!(n <= 5, "reference determinant is factorial, keep n small");
    let mut total = Quat::zero();
    for sigma in permutations(n) {
        let mut seen = vec![false; n];
        let mut cycle_count = 0usize;
        let mut term = Quaternion::from_real(1.0);
        // Scanning leaders downward: every element larger than the current
        // start is already seen, so each start is its cycle's maximum and
        // cycles are visited in decreasing-leader order.
        for start in (0..n).rev() {
            if seen[start] {
                continue;
            }
            cycle_count += 1;
            let mut cur = start;
            loop {
                let nxt = sigma[cur];
                term = qmul(&term, &a[(cur, nxt)]);
                seen[cur] = true;
                cur = nxt;
                if cur == start {
                    break;
                }
            }
        }
        let sign = if (n - cycle_count) % 2 == 0 { 1.0 } else { -1.0 };
        total = total + term.scale(&sign);
    }
    total
}

/// Central-difference Hessian of a scalar function on R^d, row-major d x d.
///
/// Step h trades truncation against cancellation; h = 1e-3 suits smooth
/// O(1)-scaled functions. The result is exactly symmetric by construction.
pub fn fd_real_hessian(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let d = x.len();
    let mut s = vec![0.0; d * d];
    let mut p = x.to_vec();
    let f0 = f(&p);
    for u in 0..d {
        p[u] += h;
        let fp = f(&p);
        p[u] -= 2.0 * h;
        let fm = f(&p);
        p[u] = x[u];
        s[u * d + u] = (fp - 2.0 * f0 + fm) / (h * h);
        for v in (u + 1)..d {
            p[u] += h;
            p[v] += h;
            let fpp = f(&p);
            p[v] -= 2.0 * h;
            let fpm = f(&p);
            p[u] -= 2.0 * h;
            let fmm = f(&p);
            p[v] += 2.0 * h;
            let fmp = f(&p);
            p[u] = x[u];
            p[v] = x[v];
            let val = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            s[u * d + v] = val;
            s[v * d + u] = val;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::HermitianQMatrix;
    use approx::assert_relative_eq;

    fn q(t: f64, x: f64, y: f64, z: f64) -> Quat {
        Quaternion::new(t, x, y, z)
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn reference_det_of_identity() {
        let id = QMatrix::identity(3);
        let d = moore_det_reference(&id);
        assert_relative_eq!(d.t, 1.0);
        assert!(d.x.abs() + d.y.abs() + d.z.abs() < 1e-15);
    }

    #[test]
    fn reference_det_two_by_two_hermitian() {
        // [[2, q], [conj q, 3]] -> 6 - |q|^2
        let v = q(1.0, -2.0, 0.5, 1.5);
        let a = QMatrix::new(
            2,
            2,
            vec![Quaternion::from_real(2.0), v, v.conj(), Quaternion::from_real(3.0)],
        )
        .unwrap();
        let d = moore_det_reference(&a);
        assert_relative_eq!(d.t, 6.0 - v.norm_sqr(), max_relative = 1e-12);
        assert!(d.x.abs() + d.y.abs() + d.z.abs() < 1e-12);
    }

    #[test]
    fn reference_det_matches_eigenvalue_route() {
        let entries = vec![
            Quaternion::from_real(3.0),
            q(0.5, 1.0, -0.75, 0.25),
            q(-1.0, 0.0, 2.0, 1.0),
            q(0.5, -1.0, 0.75, -0.25),
            Quaternion::from_real(-2.0),
            q(0.0, 0.5, 0.5, -1.5),
            q(-1.0, 0.0, -2.0, -1.0),
            q(0.0, -0.5, -0.5, 1.5),
            Quaternion::from_real(1.0),
        ];
        let h = HermitianQMatrix::from_entries(3, entries).unwrap();
        let fast = h.moore_det().unwrap();
        let slow = moore_det_reference(&h.as_qmatrix());
        assert_relative_eq!(fast, slow.t, max_relative = 1e-9, epsilon = 1e-9);
        assert!(slow.x.abs() + slow.y.abs() + slow.z.abs() < 1e-9);
    }

    #[test]
    fn fd_hessian_of_quadratic_is_exact_to_truncation() {
        // f(x) = x0^2 + 3 x0 x1 - 2 x1^2
        let mut f = |x: &[f64]| x[0] * x[0] + 3.0 * x[0] * x[1] - 2.0 * x[1] * x[1];
        let s = fd_real_hessian(&mut f, &[0.4, -0.7], 1e-3);
        assert_relative_eq!(s[0], 2.0, epsilon = 1e-6);
        assert_relative_eq!(s[1], 3.0, epsilon = 1e-6);
        assert_relative_eq!(s[2], 3.0, epsilon = 1e-6);
        assert_relative_eq!(s[3], -4.0, epsilon = 1e-6);
    }
}
