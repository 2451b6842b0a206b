//! Second-order forward-mode jets: value, gradient, and dense Hessian.
//!
//! A `Jet` tracks `(f, grad f, hess f)` through arithmetic. All operations
//! mutate in place so the expression evaluator can reuse a fixed stack of
//! jets across millions of quadrature nodes without allocating.
//!
//! The Hessian is stored dense row-major (`d*d`); symmetry is maintained by
//! construction.

#[derive(Clone, Debug)]
pub struct Jet {
    pub v: f64,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

impl Jet {
    pub fn new(d: usize) -> Self {
        Jet {
            v: 0.0,
            g: vec![0.0; d],
            h: vec![0.0; d * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn set_const(&mut self, c: f64) {
        self.v = c;
        self.g.fill(0.0);
        self.h.fill(0.0);
    }

    pub fn set_var(&mut self, i: usize, x: f64) {
        self.v = x;
        self.g.fill(0.0);
        self.g[i] = 1.0;
        self.h.fill(0.0);
    }

    pub fn add_assign(&mut self, o: &Jet) {
        self.v += o.v;
        for (a, b) in self.g.iter_mut().zip(&o.g) {
            *a += b;
        }
        for (a, b) in self.h.iter_mut().zip(&o.h) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, o: &Jet) {
        self.v -= o.v;
        for (a, b) in self.g.iter_mut().zip(&o.g) {
            *a -= b;
        }
        for (a, b) in self.h.iter_mut().zip(&o.h) {
            *a -= b;
        }
    }

    pub fn neg_assign(&mut self) {
        self.v = -self.v;
        for a in self.g.iter_mut() {
            *a = -*a;
        }
        for a in self.h.iter_mut() {
            *a = -*a;
        }
    }

    pub fn scale_assign(&mut self, s: f64) {
        self.v *= s;
        for a in self.g.iter_mut() {
            *a *= s;
        }
        for a in self.h.iter_mut() {
            *a *= s;
        }
    }

    /// `self := self * o`. Product rule; reads the original gradient of
    /// `self` while updating the Hessian, so the Hessian update runs first.
    pub fn mul_assign(&mut self, o: &Jet) {
        let d = self.dim();
        let (av, bv) = (self.v, o.v);
        for i in 0..d {
            let (agi, bgi) = (self.g[i], o.g[i]);
            let row = i * d;
            for j in 0..d {
                self.h[row + j] =
                    self.h[row + j] * bv + o.h[row + j] * av + agi * o.g[j] + self.g[j] * bgi;
            }
        }
        for i in 0..d {
            self.g[i] = self.g[i] * bv + o.g[i] * av;
        }
        self.v = av * bv;
    }

    /// Post-compose with a univariate function given by its value and first
    /// two derivatives at `self.v`.
    pub fn chain_assign(&mut self, f0: f64, f1: f64, f2: f64) {
        let d = self.dim();
        for i in 0..d {
            let gi = self.g[i];
            let row = i * d;
            for j in 0..d {
                self.h[row + j] = f1 * self.h[row + j] + f2 * gi * self.g[j];
            }
        }
        for gi in self.g.iter_mut() {
            *gi *= f1;
        }
        self.v = f0;
    }

    pub fn recip_assign(&mut self) {
        let v = self.v;
        self.chain_assign(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
    }

    /// `self := self / o`; `o` is clobbered.
    pub fn div_assign_consuming(&mut self, o: &mut Jet) {
        o.recip_assign();
        self.mul_assign(o);
    }

    pub fn sqrt_assign(&mut self) {
        let r = self.v.sqrt();
        self.chain_assign(r, 0.5 / r, -0.25 / (r * r * r));
    }

    pub fn exp_assign(&mut self) {
        let e = self.v.exp();
        self.chain_assign(e, e, e);
    }

    pub fn ln_assign(&mut self) {
        let v = self.v;
        self.chain_assign(v.ln(), 1.0 / v, -1.0 / (v * v));
    }

    pub fn cosh_assign(&mut self) {
        let (c, s) = (self.v.cosh(), self.v.sinh());
        self.chain_assign(c, s, c);
    }

    pub fn tanh_assign(&mut self) {
        let t = self.v.tanh();
        let s = 1.0 - t * t;
        self.chain_assign(t, s, -2.0 * t * s);
    }

    pub fn sin_assign(&mut self) {
        let (s, c) = self.v.sin_cos();
        self.chain_assign(s, c, -s);
    }

    pub fn cos_assign(&mut self) {
        let (s, c) = self.v.sin_cos();
        self.chain_assign(c, -s, -c);
    }

    pub fn powi_assign(&mut self, k: i32) {
        let v = self.v;
        let f0 = v.powi(k);
        let f1 = k as f64 * v.powi(k - 1);
        let f2 = (k as f64) * (k as f64 - 1.0) * v.powi(k - 2);
        self.chain_assign(f0, f1, f2);
    }

    /// `g(s) = ln(cosh(sqrt(s)))`, smooth in `s = r^2` down to `s = 0`.
    ///
    /// Regularized distance kernels are built from this: the function and its
    /// first two derivatives stay finite at the origin, which a naive
    /// `ln(cosh(r))` with `r = sqrt(s)` would lose to a 0/0. Series switch at
    /// `s <= 1e-4` keeps everything accurate to machine precision.
    pub fn log_cosh_sqrt_assign(&mut self) {
        let s = self.v;
        let (f0, f1, f2) = log_cosh_sqrt_derivatives(s);
        self.chain_assign(f0, f1, f2);
    }

    /// Smooth bump `exp(-1/(1-u^2))` on `|u| < 1`, identically 0 outside.
    pub fn bump_assign(&mut self) {
        let u = self.v;
        let w = 1.0 - u * u;
        // exp(-1/w) underflows to exactly 0 well before 1/w^4 overflows;
        // the explicit cutoff keeps 0 * huge from ever forming.
        if w <= 1e-3 {
            self.set_const(0.0);
            return;
        }
        let f = (-1.0 / w).exp();
        let f1 = f * (-2.0 * u / (w * w));
        let f2 = f * (4.0 * u * u / (w * w * w * w) - 2.0 / (w * w) - 8.0 * u * u / (w * w * w));
        self.chain_assign(f, f1, f2);
    }
}

/// `(g, g', g'')` for `g(s) = ln(cosh(sqrt(s)))` at `s >= 0`.
pub fn log_cosh_sqrt_derivatives(s: f64) -> (f64, f64, f64) {
    if s <= 1e-4 {
        // ln cosh u = u^2/2 - u^4/12 + u^6/45 - 17 u^8/2520 + O(u^10)
        let f0 = s * (0.5 + s * (-1.0 / 12.0 + s * (1.0 / 45.0 - s * 17.0 / 2520.0)));
        let f1 = 0.5 + s * (-1.0 / 6.0 + s * (1.0 / 15.0 - s * 17.0 / 630.0));
        let f2 = -1.0 / 6.0 + s * (2.0 / 15.0 - s * 17.0 / 210.0);
        (f0, f1, f2)
    } else {
        let u = s.sqrt();
        let f0 = if u > 20.0 {
            // ln cosh u = u - ln 2 + ln(1 + e^{-2u}), overflow-free
            u - std::f64::consts::LN_2 + (-2.0 * u).exp().ln_1p()
        } else {
            u.cosh().ln()
        };
        let t = u.tanh();
        let sech2 = 1.0 - t * t;
        let f1 = t / (2.0 * u);
        let f2 = (u * sech2 - t) / (4.0 * u * u * u);
        (f0, f1, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Finite-difference check of one full jet against value-only evaluation.
    fn check_against_fd(f: impl Fn(&[f64]) -> f64, jet: &Jet, x: &[f64], tol: f64) {
        let d = x.len();
        let h = 1e-4;
        assert_relative_eq!(jet.v, f(x), max_relative = 1e-12);
        for i in 0..d {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let fd = (f(&xp) - f(&xm)) / (2.0 * h);
            assert_relative_eq!(jet.g[i], fd, epsilon = tol, max_relative = tol);
        }
        for i in 0..d {
            for j in 0..d {
                let mut xpp = x.to_vec();
                let mut xpm = x.to_vec();
                let mut xmp = x.to_vec();
                let mut xmm = x.to_vec();
                xpp[i] += h;
                xpp[j] += h;
                xpm[i] += h;
                xpm[j] -= h;
                xmp[i] -= h;
                xmp[j] += h;
                xmm[i] -= h;
                xmm[j] -= h;
                let fd = (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * h * h);
                assert_relative_eq!(jet.h[i * d + j], fd, epsilon = tol, max_relative = tol);
            }
        }
    }

    #[test]
    fn product_and_chain_match_finite_differences() {
        // f(x0, x1) = exp(x0 * x1) * (x0 + 2 x1)
        let x = [0.4, -0.7];
        let mut a = Jet::new(2);
        let mut b = Jet::new(2);
        let mut c = Jet::new(2);
        a.set_var(0, x[0]);
        b.set_var(1, x[1]);
        a.mul_assign(&b);
        a.exp_assign();
        c.set_var(0, x[0]);
        b.set_var(1, x[1]);
        b.scale_assign(2.0);
        c.add_assign(&b);
        a.mul_assign(&c);
        check_against_fd(
            |x| (x[0] * x[1]).exp() * (x[0] + 2.0 * x[1]),
            &a,
            &x,
            1e-5,
        );
    }

    #[test]
    fn division_sqrt_and_trig() {
        // f = sin(x0) / sqrt(1 + x1^2)
        let x = [1.1, 0.6];
        let mut num = Jet::new(2);
        num.set_var(0, x[0]);
        num.sin_assign();
        let mut den = Jet::new(2);
        den.set_var(1, x[1]);
        den.powi_assign(2);
        let mut one = Jet::new(2);
        one.set_const(1.0);
        den.add_assign(&one);
        den.sqrt_assign();
        num.div_assign_consuming(&mut den);
        check_against_fd(|x| x[0].sin() / (1.0 + x[1] * x[1]).sqrt(), &num, &x, 1e-5);
    }

    #[test]
    fn log_cosh_sqrt_smooth_across_series_switch() {
        // Values and derivatives agree where series and closed form meet.
        for &s in &[9.0e-5, 1.00001e-4, 1.1e-4, 1e-2, 1.0, 25.0, 1e4] {
            let (f0, f1, f2) = log_cosh_sqrt_derivatives(s);
            let u = s.sqrt();
            let direct = u.cosh().ln();
            assert_relative_eq!(f0, direct, max_relative = 1e-10);
            // FD in s; the second difference needs a step large enough to
            // beat cancellation, small enough to stay inside (0, 2s).
            let g = |s: f64| s.sqrt().cosh().ln();
            let h1 = (s * 1e-6).max(1e-8);
            assert_relative_eq!(
                f1,
                (g(s + h1) - g(s - h1)) / (2.0 * h1),
                max_relative = 1e-4
            );
            let h2 = (s * 1e-3).max(1e-5);
            assert_relative_eq!(
                f2,
                (g(s + h2) - 2.0 * g(s) + g(s - h2)) / (h2 * h2),
                max_relative = 2e-2
            );
        }
        // At exactly zero: g(0) = 0, g'(0) = 1/2, g''(0) = -1/6.
        let (f0, f1, f2) = log_cosh_sqrt_derivatives(0.0);
        assert_eq!(f0, 0.0);
        assert_relative_eq!(f1, 0.5);
        assert_relative_eq!(f2, -1.0 / 6.0);
    }

    #[test]
    fn log_cosh_sqrt_no_overflow_far_out() {
        let (f0, f1, f2) = log_cosh_sqrt_derivatives(1e8);
        assert!(f0.is_finite() && f1.is_finite() && f2.is_finite());
        // ln cosh(1e4) ~ 1e4 - ln 2
        assert_relative_eq!(f0, 1e4 - std::f64::consts::LN_2, max_relative = 1e-12);
    }

    #[test]
    fn bump_vanishes_smoothly_at_the_boundary() {
        let mut j = Jet::new(1);
        j.set_var(0, 0.999999);
        j.bump_assign();
        assert_eq!(j.v, 0.0);
        assert_eq!(j.g[0], 0.0);
        j.set_var(0, 1.5);
        j.bump_assign();
        assert_eq!(j.v, 0.0);
        j.set_var(0, 0.3);
        j.bump_assign();
        check_against_fd(
            |x| {
                let w = 1.0 - x[0] * x[0];
                (-1.0 / w).exp()
            },
            &j,
            &[0.3],
            1e-5,
        );
    }

    #[test]
    fn hessian_is_symmetric() {
        let x = [0.3, -0.2, 0.9];
        let mut a = Jet::new(3);
        a.set_var(0, x[0]);
        let mut b = Jet::new(3);
        b.set_var(1, x[1]);
        let mut c = Jet::new(3);
        c.set_var(2, x[2]);
        b.mul_assign(&c);
        a.add_assign(&b);
        a.powi_assign(3);
        a.tanh_assign();
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(a.h[i * 3 + j], a.h[j * 3 + i], max_relative = 1e-12);
            }
        }
    }
}
