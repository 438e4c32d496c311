//! Truncated power series over `Z/pZ`, used to compute the Taylor
//! coefficients of a trajectory from a sampled initial point.

use crate::algebra::{CoeffRing, Zp};
use crate::model::Expr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Series(pub Vec<u64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct SingularPoint;

impl Series {
    pub fn constant(c: u64, len: usize) -> Series {
        let mut v = vec![0; len];
        v[0] = c;
        Series(v)
    }

    fn add(&self, o: &Series, f: Zp) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| f.add(a, b)).collect())
    }

    fn sub(&self, o: &Series, f: Zp) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| f.sub(a, b)).collect())
    }

    fn neg(&self, f: Zp) -> Series {
        Series(self.0.iter().map(|a| f.neg(a)).collect())
    }

    fn mul(&self, o: &Series, f: Zp) -> Series {
        let n = self.0.len();
        let p = f.modulus();
        let mut out = vec![0u64; n];
        for (i, a) in self.0.iter().enumerate().filter(|(_, a)| **a != 0) {
            for j in 0..n - i {
                out[i + j] = (out[i + j] + a * o.0[j]) % p;
            }
        }
        Series(out)
    }

    fn div(&self, o: &Series, f: Zp) -> Result<Series, SingularPoint> {
        let inv = f.inverse(o.0[0]).ok_or(SingularPoint)?;
        let n = self.0.len();
        let mut out = vec![0u64; n];
        for k in 0..n {
            let mut acc = self.0[k];
            for i in 1..=k {
                acc = f.sub(&acc, &f.mul(&o.0[i], &out[k - i]));
            }
            out[k] = f.mul(&acc, &inv);
        }
        Ok(Series(out))
    }
}

/// Evaluate `e` on series of length `len`; `env` resolves symbols.
pub(crate) fn eval(e: &Expr, env: &dyn Fn(&str) -> Series, f: Zp, len: usize) -> Result<Series, SingularPoint> {
    Ok(match e {
        Expr::Const(c) => Series::constant(f.from_rational(c).ok_or(SingularPoint)?, len),
        Expr::Sym(s) => env(s),
        Expr::Neg(a) => eval(a, env, f, len)?.neg(f),
        Expr::Add(a, b) => eval(a, env, f, len)?.add(&eval(b, env, f, len)?, f),
        Expr::Sub(a, b) => eval(a, env, f, len)?.sub(&eval(b, env, f, len)?, f),
        Expr::Mul(a, b) => eval(a, env, f, len)?.mul(&eval(b, env, f, len)?, f),
        Expr::Div(a, b) => eval(a, env, f, len)?.div(&eval(b, env, f, len)?, f)?,
        Expr::Pow(a, k) => {
            let base = eval(a, env, f, len)?;
            let mut acc = Series::constant(1, len);
            for _ in 0..*k {
                acc = acc.mul(&base, f);
            }
            acc
        }
    })
}
