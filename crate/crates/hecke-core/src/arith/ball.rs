//! Certified ball arithmetic over MPFR/MPC.
//!
//! A ball is an arbitrary-precision midpoint together with a nonnegative
//! radius.  Every operation returns a ball containing the exact result of any
//! inputs contained in the operand balls.  Midpoints are rounded to nearest at
//! the working precision; the rounding error (one ulp is a safe bound) is
//! folded into the radius, and all radius arithmetic rounds upward.
//!
//! Radii are kept as low-precision `Float`s rather than `f64` so that they do
//! not underflow to zero at high working precisions.

use rug::float::{Constant, Round};

use rug::{Complex, Float, Rational};

/// Precision of radius arithmetic.
const RAD_PREC: u32 = 64;

fn f_up<T>(src: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = std::cmp::Ordering>,
{
    use rug::ops::AssignRound;
    let mut f = Float::new(RAD_PREC);
    f.assign_round(src, Round::Up);
    f
}

fn f_down<T>(src: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = std::cmp::Ordering>,
{
    use rug::ops::AssignRound;
    let mut f = Float::new(RAD_PREC);
    f.assign_round(src, Round::Down);
    f
}

fn rad_zero() -> Float {
    Float::new(RAD_PREC)
}

fn abs_up(x: &Float) -> Float {
    f_up(x.abs_ref())
}

fn abs_down(x: &Float) -> Float {
    f_down(x.abs_ref())
}

/// Upper bound on |re| + |im| of a complex midpoint, at radius precision.
fn c_mag_up(c: &Complex) -> Float {
    let re = abs_up(c.real());
    let im = abs_up(c.imag());
    f_up(&re + &im)
}

/// Upper bound on |c| (true modulus), at radius precision.
fn c_abs_up(c: &Complex) -> Float {
    f_up(c.real().hypot_ref(c.imag()))
}

/// Lower bound on |c|, at radius precision.
fn c_abs_down(c: &Complex) -> Float {
    f_down(c.real().hypot_ref(c.imag()))
}

/// One-ulp bound for a midpoint computed at precision `prec`.
fn ulp_c(c: &Complex, prec: u32) -> Float {
    let mag = c_mag_up(c);
    let mut e = Float::with_val(RAD_PREC, 1u32);
    e >>= prec.saturating_sub(1) as i32;
    f_up(&mag * &e)
}

fn ulp_f(x: &Float, prec: u32) -> Float {
    let mag = abs_up(x);
    let mut e = Float::with_val(RAD_PREC, 1u32);
    e >>= prec.saturating_sub(1) as i32;
    f_up(&mag * &e)
}

/// A real number known to lie within `rad` of `mid`.
#[derive(Debug, Clone)]
pub struct RealBall {
    pub mid: Float,
    pub rad: Float,
}

impl RealBall {
    pub fn prec(&self) -> u32 {
        self.mid.prec()
    }

    pub fn zero(prec: u32) -> RealBall {
        RealBall { mid: Float::new(prec), rad: rad_zero() }
    }

    pub fn from_i64(v: i64, prec: u32) -> RealBall {
        RealBall { mid: Float::with_val(prec, v), rad: rad_zero() }
    }

    pub fn from_f64(v: f64, prec: u32) -> RealBall {
        RealBall { mid: Float::with_val(prec, v), rad: rad_zero() }
    }

    pub fn from_ratio(num: i64, den: i64, prec: u32) -> RealBall {
        RealBall::from_rational(&Rational::from((num, den)), prec)
    }

    pub fn from_rational(r: &Rational, prec: u32) -> RealBall {
        let mid = Float::with_val(prec, r);
        let rad = ulp_f(&mid, prec);
        RealBall { mid, rad }
    }

    pub fn pi(prec: u32) -> RealBall {
        let mid = Float::with_val(prec, Constant::Pi);
        let rad = ulp_f(&mid, prec);
        RealBall { mid, rad }
    }

    pub fn add(&self, o: &RealBall) -> RealBall {
        let prec = self.prec().max(o.prec());
        let mid = Float::with_val(prec, &self.mid + &o.mid);
        let rad = f_up(f_up(&self.rad + &o.rad) + ulp_f(&mid, prec));
        RealBall { mid, rad }
    }

    pub fn sub(&self, o: &RealBall) -> RealBall {
        let prec = self.prec().max(o.prec());
        let mid = Float::with_val(prec, &self.mid - &o.mid);
        let rad = f_up(f_up(&self.rad + &o.rad) + ulp_f(&mid, prec));
        RealBall { mid, rad }
    }

    pub fn mul(&self, o: &RealBall) -> RealBall {
        let prec = self.prec().max(o.prec());
        let mid = Float::with_val(prec, &self.mid * &o.mid);
        let a = abs_up(&self.mid);
        let b = abs_up(&o.mid);
        let mut rad = f_up(&a * &o.rad);
        rad = f_up(&rad + f_up(&b * &self.rad));
        rad = f_up(&rad + f_up(f_up(&self.rad * &o.rad)));
        rad = f_up(&rad + ulp_f(&mid, prec));
        RealBall { mid, rad }
    }

    pub fn div(&self, o: &RealBall) -> RealBall {
        // |x/y - m1/m2| <= (r1|m2| + |m1|r2) / (|m2|(|m2|-r2))
        let prec = self.prec().max(o.prec());
        let mid = Float::with_val(prec, &self.mid / &o.mid);
        let m1 = abs_up(&self.mid);
        let m2_up = abs_up(&o.mid);
        let m2_down = abs_down(&o.mid);
        let denom_low = f_down(&m2_down - &o.rad);
        if !(denom_low.is_sign_positive() && !denom_low.is_zero()) {
            return RealBall { mid, rad: Float::with_val(RAD_PREC, f64::INFINITY) };
        }
        let num = f_up(f_up(&self.rad * &m2_up) + f_up(&m1 * &o.rad));
        let den = f_down(&m2_down * &denom_low);
        let rad = f_up(f_up(&num / &den) + ulp_f(&mid, prec));
        RealBall { mid, rad }
    }

    pub fn neg(&self) -> RealBall {
        RealBall { mid: Float::with_val(self.prec(), -&self.mid), rad: self.rad.clone() }
    }

    pub fn abs(&self) -> RealBall {
        RealBall { mid: Float::with_val(self.prec(), self.mid.abs_ref()), rad: self.rad.clone() }
    }

    pub fn sqrt(&self) -> RealBall {
        // sqrt is 1/(2 sqrt(x))-Lipschitz; require mid - rad > 0 for a finite bound.
        let prec = self.prec();
        let mid = Float::with_val(prec, self.mid.sqrt_ref());
        let low = f_down(&self.mid - &self.rad);
        if !(low.is_sign_positive() && !low.is_zero()) {
            // Fall back: containment still holds with radius sqrt(mid+rad).
            let hi = f_up(&self.mid + &self.rad);
            let r = f_up(hi.sqrt());
            return RealBall { mid, rad: r };
        }
        let sl = f_down(low.sqrt_ref());
        let lip = f_up(&self.rad / &sl); // rad / sqrt(low) >= rad/(2 sqrt), safe
        let rad = f_up(&lip + ulp_f(&mid, prec));
        RealBall { mid, rad }
    }

    pub fn div_u32(&self, d: u32) -> RealBall {
        let prec = self.prec();
        let mid = Float::with_val(prec, &self.mid / d);
        let rad = f_up(f_up(&self.rad / d) + ulp_f(&mid, prec));
        RealBall { mid, rad }
    }

    pub fn mul_i64(&self, v: i64) -> RealBall {
        self.mul(&RealBall::from_i64(v, self.prec()))
    }

    /// Upper bound of the ball as a low-precision float.
    pub fn upper(&self) -> Float {
        f_up(&self.mid + &self.rad)
    }

    /// Lower bound of the ball.
    pub fn lower(&self) -> Float {
        f_down(&self.mid - &self.rad)
    }

    pub fn contains_zero(&self) -> bool {
        abs_down(&self.mid) <= self.rad
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }
}

/// A complex number known to lie within `rad` of `mid`.
#[derive(Debug, Clone)]
pub struct ComplexBall {
    pub mid: Complex,
    pub rad: Float,
}

impl ComplexBall {
    pub fn prec(&self) -> u32 {
        self.mid.prec().0
    }

    pub fn zero(prec: u32) -> ComplexBall {
        ComplexBall { mid: Complex::new(prec), rad: rad_zero() }
    }

    pub fn one(prec: u32) -> ComplexBall {
        ComplexBall { mid: Complex::with_val(prec, (1, 0)), rad: rad_zero() }
    }

    pub fn i(prec: u32) -> ComplexBall {
        ComplexBall { mid: Complex::with_val(prec, (0, 1)), rad: rad_zero() }
    }

    pub fn from_i64(v: i64, prec: u32) -> ComplexBall {
        ComplexBall { mid: Complex::with_val(prec, (v, 0)), rad: rad_zero() }
    }

    pub fn from_i128(v: i128, prec: u32) -> ComplexBall {
        let f = Float::with_val(prec, v);
        ComplexBall { mid: Complex::with_val(prec, (f, Float::new(prec))), rad: rad_zero() }
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> ComplexBall {
        ComplexBall { mid: Complex::with_val(prec, (re, im)), rad: rad_zero() }
    }

    pub fn from_re_im(re: RealBall, im: RealBall, prec: u32) -> ComplexBall {
        let mid = Complex::with_val(prec, (re.mid, im.mid));
        let rad = f_up(f_up(&re.rad + &im.rad));
        ComplexBall { mid, rad }
    }

    pub fn from_rationals(re: &Rational, im: &Rational, prec: u32) -> ComplexBall {
        let r = RealBall::from_rational(re, prec);
        let i = RealBall::from_rational(im, prec);
        ComplexBall::from_re_im(r, i, prec)
    }

    pub fn re(&self) -> RealBall {
        RealBall { mid: Float::with_val(self.prec(), self.mid.real()), rad: self.rad.clone() }
    }

    pub fn im(&self) -> RealBall {
        RealBall { mid: Float::with_val(self.prec(), self.mid.imag()), rad: self.rad.clone() }
    }

    pub fn add(&self, o: &ComplexBall) -> ComplexBall {
        let prec = self.prec().max(o.prec());
        let mid = Complex::with_val(prec, &self.mid + &o.mid);
        let rad = f_up(f_up(&self.rad + &o.rad) + ulp_c(&mid, prec));
        ComplexBall { mid, rad }
    }

    pub fn sub(&self, o: &ComplexBall) -> ComplexBall {
        let prec = self.prec().max(o.prec());
        let mid = Complex::with_val(prec, &self.mid - &o.mid);
        let rad = f_up(f_up(&self.rad + &o.rad) + ulp_c(&mid, prec));
        ComplexBall { mid, rad }
    }

    pub fn mul(&self, o: &ComplexBall) -> ComplexBall {
        let prec = self.prec().max(o.prec());
        let mid = Complex::with_val(prec, &self.mid * &o.mid);
        let a = c_abs_up(&self.mid);
        let b = c_abs_up(&o.mid);
        let mut rad = f_up(&a * &o.rad);
        rad = f_up(&rad + f_up(&b * &self.rad));
        rad = f_up(&rad + f_up(&self.rad * &o.rad));
        rad = f_up(&rad + ulp_c(&mid, prec));
        ComplexBall { mid, rad }
    }

    pub fn div(&self, o: &ComplexBall) -> ComplexBall {
        let prec = self.prec().max(o.prec());
        let mid = Complex::with_val(prec, &self.mid / &o.mid);
        let m1 = c_abs_up(&self.mid);
        let m2_up = c_abs_up(&o.mid);
        let m2_down = c_abs_down(&o.mid);
        let denom_low = f_down(&m2_down - &o.rad);
        if !(denom_low.is_sign_positive() && !denom_low.is_zero()) {
            return ComplexBall { mid, rad: Float::with_val(RAD_PREC, f64::INFINITY) };
        }
        let num = f_up(f_up(&self.rad * &m2_up) + f_up(&m1 * &o.rad));
        let den = f_down(&m2_down * &denom_low);
        let rad = f_up(f_up(&num / &den) + ulp_c(&mid, prec));
        ComplexBall { mid, rad }
    }

    pub fn inv(&self) -> ComplexBall {
        ComplexBall::one(self.prec()).div(self)
    }

    pub fn neg(&self) -> ComplexBall {
        ComplexBall { mid: Complex::with_val(self.prec(), -&self.mid), rad: self.rad.clone() }
    }

    pub fn conj(&self) -> ComplexBall {
        ComplexBall { mid: Complex::with_val(self.prec(), self.mid.conj_ref()), rad: self.rad.clone() }
    }

    pub fn scale_i64(&self, v: i64) -> ComplexBall {
        self.mul(&ComplexBall::from_i64(v, self.prec()))
    }

    pub fn scale_rational(&self, r: &Rational) -> ComplexBall {
        self.mul(&ComplexBall::from_rationals(r, &Rational::new(), self.prec()))
    }

    pub fn powi(&self, e: i32) -> ComplexBall {
        if e == 0 {
            return ComplexBall::one(self.prec());
        }
        let mut base = if e < 0 { self.inv() } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc: Option<ComplexBall> = None;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc.unwrap()
    }

    pub fn abs(&self) -> RealBall {
        let prec = self.prec();
        let mid = Float::with_val(prec, self.mid.abs_ref());
        let rad = f_up(&self.rad + ulp_f(&mid, prec));
        RealBall { mid, rad }
    }

    /// Squared modulus |z|^2 as a real ball.
    pub fn norm_sqr(&self) -> RealBall {
        let a = self.abs();
        a.mul(&a)
    }

    /// sin with radius propagated through the Lipschitz bound
    /// |cos(z)| <= cosh(|Im z| + rad).
    pub fn sin(&self) -> ComplexBall {
        self.trig(true)
    }

    pub fn cos(&self) -> ComplexBall {
        self.trig(false)
    }

    fn trig(&self, sin: bool) -> ComplexBall {
        let prec = self.prec();
        let mid = if sin {
            Complex::with_val(prec, self.mid.sin_ref())
        } else {
            Complex::with_val(prec, self.mid.cos_ref())
        };
        let yb = f_up(abs_up(self.mid.imag()) + &self.rad);
        let lip = f_up(yb.cosh());
        let rad = f_up(f_up(&lip * &self.rad) + ulp_c(&mid, prec));
        ComplexBall { mid, rad }
    }

    /// exp with Lipschitz bound exp(Re z + rad).
    pub fn exp(&self) -> ComplexBall {
        let prec = self.prec();
        let mid = Complex::with_val(prec, self.mid.exp_ref());
        let xb = f_up(f_up(self.mid.real()) + &self.rad);
        let lip = f_up(xb.exp());
        let rad = f_up(f_up(&lip * &self.rad) + ulp_c(&mid, prec));
        ComplexBall { mid, rad }
    }

    /// Widen the radius by an explicit nonnegative amount.
    pub fn add_error(&self, extra: &Float) -> ComplexBall {
        ComplexBall { mid: self.mid.clone(), rad: f_up(&self.rad + extra) }
    }

    pub fn contains_zero(&self) -> bool {
        c_abs_down(&self.mid) <= self.rad
    }

    pub fn contains(&self, other: &ComplexBall) -> bool {
        // other's disc inside self's disc: |m1-m2| + r2 <= r1
        let d = f_up(c_abs_up(&Complex::with_val(
            self.prec().max(other.prec()),
            &self.mid - &other.mid,
        )) + &other.rad);
        d <= self.rad
    }

    pub fn overlaps(&self, other: &ComplexBall) -> bool {
        let diff = Complex::with_val(self.prec().max(other.prec()), &self.mid - &other.mid);
        let d = c_abs_down(&diff);
        d <= f_up(&self.rad + &other.rad)
    }

    /// Relative midpoint difference as f64, for reporting.
    pub fn rel_diff(&self, other: &ComplexBall) -> f64 {
        let diff = Complex::with_val(self.prec().max(other.prec()), &self.mid - &other.mid);
        let d = c_abs_up(&diff).to_f64();
        let m = c_abs_up(&self.mid).to_f64().max(c_abs_up(&other.mid).to_f64());
        if m == 0.0 {
            d
        } else {
            d / m
        }
    }

    pub fn rad_f64(&self) -> f64 {
        self.rad.to_f64_round(Round::Up)
    }

    pub fn to_f64s(&self) -> (f64, f64) {
        (self.mid.real().to_f64(), self.mid.imag().to_f64())
    }

    /// e^(2 pi i num/den) as a ball.
    pub fn root_of_unity(num: i64, den: u64, prec: u32) -> ComplexBall {
        let two_pi = RealBall::pi(prec).mul_i64(2);
        let frac = RealBall::from_rational(&Rational::from((num, den)), prec);
        let angle = two_pi.mul(&frac);
        let theta = ComplexBall::from_re_im(angle, RealBall::zero(prec), prec);
        // cos(theta) + i sin(theta) with theta real
        let c = theta.cos();
        let s = theta.sin();
        c.add(&s.mul(&ComplexBall::i(prec)))
    }
}

impl std::fmt::Display for ComplexBall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (re, im) = self.to_f64s();
        write!(f, "({:.17e} {:+.17e}i ± {:.3e})", re, im, self.rad_f64())
    }
}

/// Upper bound on a nonnegative f64 as a radius float.
pub fn rad_from_f64(v: f64) -> Float {
    Float::with_val(RAD_PREC, v)
}
