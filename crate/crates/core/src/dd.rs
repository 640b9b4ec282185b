//! Double-double arithmetic: an unevaluated sum of two f64 giving ~31
//! significant digits. Used where plain f64 loses too many digits to
//! cancellation (divided-difference tables near coalescing nodes) or to
//! magnitude (factorial/Pochhammer ratios at high order).
//!
//! Algorithms are the classical error-free transformations (Dekker, Knuth)
//! plus Newton refinement for sqrt/exp/ln, as in the QD library.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let s2 = s2 + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul(Dd::from(q1)));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul(Dd::from(q2)));
        let q3 = r.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd::new(hi, lo + q3)
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        // one Newton step on x = sqrt(a): x' = x + (a - x^2) / (2x)
        let x = self.hi.sqrt();
        let x_dd = Dd::from(x);
        let diff = self.sub(x_dd.mul(x_dd));
        x_dd.add(diff.div(Dd::from(2.0 * x)))
    }

    /// exp via argument reduction exp(x) = exp(m ln 2) * exp(r), |r| <= ln2/2,
    /// with a Taylor series on the reduced argument.
    pub fn exp(self) -> Dd {
        const LN2_HI: f64 = 0.6931471805599453;
        const LN2_LO: f64 = 2.3190468138462996e-17;
        let ln2 = Dd {
            hi: LN2_HI,
            lo: LN2_LO,
        };
        if self.hi > 709.0 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -709.0 {
            return Dd::ZERO;
        }
        let m = (self.hi / LN2_HI).round();
        let r = self.sub(ln2.mul(Dd::from(m)));
        // Taylor on r, |r| <= ~0.35; terms fall below 1e-33 by ~30 terms.
        let mut sum = Dd::ONE;
        let mut term = Dd::ONE;
        for k in 1..40 {
            term = term.mul(r).div(Dd::from(k as f64));
            sum = sum.add(term);
            if term.hi.abs() < 1e-35 * sum.hi.abs() {
                break;
            }
        }
        let scale = 2f64.powi(m as i32);
        Dd::new(sum.hi * scale, sum.lo * scale)
    }

    /// ln via Newton iteration on exp(y) = x, seeded with the f64 log.
    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of non-positive dd");
        let mut y = Dd::from(self.hi.ln());
        // two iterations: y += x*exp(-y) - 1
        for _ in 0..2 {
            let e = y.neg().exp();
            y = y.add(self.mul(e).sub(Dd::ONE));
        }
        y
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            self.neg()
        } else {
            self
        }
    }
}
