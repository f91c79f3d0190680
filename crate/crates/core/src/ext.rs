//! Double-double numbers with a separate binary exponent, for sums and
//! ratios of tau-function terms whose magnitudes leave the f64 range or
//! cancel heavily.

use twofloat::TwoFloat;

/// `a / b` in double-double arithmetic by two correction steps. The
/// twofloat crate's own `TwoFloat / TwoFloat` drops the low word.
pub(crate) fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

/// Multiplies both words by `2^k`; exact barring underflow.
fn scale2(x: TwoFloat, k: i32) -> TwoFloat {
    TwoFloat::new_add(libm::ldexp(x.hi(), k), libm::ldexp(x.lo(), k))
}

/// `m · 2^e` with `|m.hi| ∈ [0.5, 1)`, or zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Ext {
    m: TwoFloat,
    e: i64,
}

impl Ext {
    pub const ZERO: Ext = Ext {
        m: TwoFloat::from_f64(0.0),
        e: 0,
    };

    pub fn from_f64(x: f64) -> Ext {
        Ext {
            m: TwoFloat::from(x),
            e: 0,
        }
        .normalized()
    }

    pub fn from_dd(x: TwoFloat) -> Ext {
        Ext { m: x, e: 0 }.normalized()
    }

    pub fn neg(self) -> Ext {
        Ext {
            m: -self.m,
            e: self.e,
        }
    }

    /// `sign · e^{ln}`.
    pub fn from_log(sign: f64, ln: f64) -> Ext {
        if sign == 0.0 || ln == f64::NEG_INFINITY {
            return Ext::ZERO;
        }
        let e = (ln / std::f64::consts::LN_2).floor();
        let m = sign * (ln - e * std::f64::consts::LN_2).exp();
        Ext {
            m: TwoFloat::from(m),
            e: e as i64,
        }
        .normalized()
    }

    fn normalized(self) -> Ext {
        if self.m.hi() == 0.0 {
            return Ext::ZERO;
        }
        let (_, k) = libm::frexp(self.m.hi());
        Ext {
            m: scale2(self.m, -k),
            e: self.e + k as i64,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m.hi() == 0.0
    }

    pub fn mul(self, o: Ext) -> Ext {
        Ext {
            m: self.m * o.m,
            e: self.e + o.e,
        }
        .normalized()
    }

    pub fn div(self, o: Ext) -> Ext {
        if self.is_zero() {
            return Ext::ZERO;
        }
        Ext {
            m: dd_div(self.m, o.m),
            e: self.e - o.e,
        }
        .normalized()
    }

    pub fn add(self, o: Ext) -> Ext {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (big, small) = if self.e >= o.e { (self, o) } else { (o, self) };
        let shift = big.e - small.e;
        if shift > 2200 {
            return big;
        }
        Ext {
            m: big.m + scale2(small.m, -(shift as i32)),
            e: big.e,
        }
        .normalized()
    }

    /// Nearest double-double value; saturates to infinity or zero outside
    /// the f64 range.
    pub fn to_dd(self) -> TwoFloat {
        if self.is_zero() {
            return TwoFloat::from(0.0);
        }
        let k = self.e.clamp(-2200, 2200) as i32;
        scale2(self.m, k)
    }

    pub fn to_f64(self) -> f64 {
        self.to_dd().hi()
    }
}
