//! The catalog of phi-functions for F = alpha * phi(beta / alpha), their
//! derivatives, the Q / Theta / Psi / Delta combinations entering the spray,
//! and residuals of the ODE identities that characterize each family.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprlang::Expr;
use crate::jets::{eval_expr_jet, Jet};
use crate::quad::{integrate, QuadOptions};

/// A phi family tag plus its structural constants.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiSpec {
    /// phi = c s + s^m (the m-Kropina metric plus a linear part).
    MKropina { c: f64, m: f64 },
    /// phi = c s + 1/s.
    KropinaLinear { c: f64 },
    /// phi = k1 s + 2 k2 / s + 1 / s^3.
    Thm41Ii { k1: f64, k2: f64 },
    /// phi = k1 s + s^m (1 + k2 s^2)^((1 - m) / 2).
    Thm41Iii { k1: f64, k2: f64, m: f64 },
    /// phi = s^m (1 + k s^2)^((1 - m) / 2).
    Thm41Iv { m: f64, k: f64 },
    /// phi = s^m (1 - (s / b)^2)^((1 - m) / 2).
    Thm41IvConstB { m: f64, b: f64 },
    /// phi = m b^2 sqrt(b^2 - s^2) int_0^s (b^2 - t^2)^(-3/2) (t / sqrt(1 - k t^2))^(m - 1) dt.
    Thm41V { m: f64, k: f64, b: f64 },
    /// Out-of-catalog phi given as an expression in `s`.
    Custom(Expr),
}

impl PhiSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            PhiSpec::MKropina { .. } => "m_kropina",
            PhiSpec::KropinaLinear { .. } => "kropina_linear",
            PhiSpec::Thm41Ii { .. } => "thm41_ii",
            PhiSpec::Thm41Iii { .. } => "thm41_iii",
            PhiSpec::Thm41Iv { .. } => "thm41_iv",
            PhiSpec::Thm41IvConstB { .. } => "thm41_iv_constb",
            PhiSpec::Thm41V { .. } => "thm41_v",
            PhiSpec::Custom(_) => "custom",
        }
    }

    /// The exponent m of the leading s^m term, where the family has one.
    pub fn m(&self) -> Option<f64> {
        match self {
            PhiSpec::MKropina { m, .. }
            | PhiSpec::Thm41Iii { m, .. }
            | PhiSpec::Thm41Iv { m, .. }
            | PhiSpec::Thm41IvConstB { m, .. }
            | PhiSpec::Thm41V { m, .. } => Some(*m),
            PhiSpec::KropinaLinear { .. } => Some(-1.0),
            PhiSpec::Thm41Ii { .. } => Some(-3.0),
            PhiSpec::Custom(_) => None,
        }
    }

    /// Coefficient of the linear term c s.
    pub fn linear_coefficient(&self) -> f64 {
        match self {
            PhiSpec::MKropina { c, .. } | PhiSpec::KropinaLinear { c } => *c,
            PhiSpec::Thm41Ii { k1, .. } | PhiSpec::Thm41Iii { k1, .. } => *k1,
            _ => 0.0,
        }
    }

    /// Range checks on the constants.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPhi(msg));
        let params: Vec<f64> = match self {
            PhiSpec::MKropina { c, m } => vec![*c, *m],
            PhiSpec::KropinaLinear { c } => vec![*c],
            PhiSpec::Thm41Ii { k1, k2 } => vec![*k1, *k2],
            PhiSpec::Thm41Iii { k1, k2, m } => vec![*k1, *k2, *m],
            PhiSpec::Thm41Iv { m, k } => vec![*m, *k],
            PhiSpec::Thm41IvConstB { m, b } => vec![*m, *b],
            PhiSpec::Thm41V { m, k, b } => vec![*m, *k, *b],
            PhiSpec::Custom(e) => {
                if e.max_var() > 1 {
                    return bad("custom phi may only use the variable s".into());
                }
                vec![]
            }
        };
        if params.iter().any(|p| !p.is_finite()) {
            return bad(format!("{}: parameters must be finite", self.tag()));
        }
        if let Some(m) = self.m() {
            if m == 0.0 || m == 1.0 {
                return bad(format!("{}: m must differ from 0 and 1 (got {m})", self.tag()));
            }
        }
        match self {
            PhiSpec::Thm41IvConstB { b, .. } if *b <= 0.0 => bad("thm41_iv_constb: b must be positive".into()),
            PhiSpec::Thm41V { b, .. } if *b <= 0.0 => bad("thm41_v: b must be positive".into()),
            PhiSpec::Thm41V { m, .. } if *m <= 0.0 => {
                bad(format!("thm41_v: the integral representation needs m > 0 (got {m})"))
            }
            _ => Ok(()),
        }
    }

    /// Check the family's domain at s.
    pub fn check_domain(&self, s: f64) -> Result<()> {
        let fail = |constraint: &str| {
            Err(Error::PhiDomain {
                s,
                constraint: constraint.to_string(),
            })
        };
        if !s.is_finite() {
            return fail("s must be finite");
        }
        if let Some(m) = self.m() {
            if m < 0.0 && s == 0.0 {
                return fail("s != 0 for a negative power");
            }
            if m.fract() != 0.0 && s <= 0.0 {
                return fail("s > 0 for a non-integer power");
            }
        }
        match self {
            PhiSpec::Thm41Ii { .. } | PhiSpec::KropinaLinear { .. } if s == 0.0 => fail("s != 0"),
            PhiSpec::Thm41Iii { k2, .. } if 1.0 + k2 * s * s <= 0.0 => fail("1 + k2 s^2 > 0"),
            PhiSpec::Thm41Iv { k, .. } if 1.0 + k * s * s <= 0.0 => fail("1 + k s^2 > 0"),
            PhiSpec::Thm41IvConstB { b, .. } if s.abs() >= *b => fail("|s| < b"),
            PhiSpec::Thm41V { b, .. } if s.abs() >= *b => fail("|s| < b"),
            PhiSpec::Thm41V { k, .. } if 1.0 - k * s * s <= 0.0 => fail("1 - k t^2 > 0 on [0, s]"),
            _ => Ok(()),
        }
    }

    /// Taylor expansion of phi around `s0`, truncated at `order`.
    pub fn series(&self, s0: f64, order: usize) -> Result<Jet> {
        self.check_domain(s0)?;
        let s = Jet::series_variable(s0, order);
        let lift = |e: Error| match e {
            Error::Domain { primitive, value, .. } => Error::PhiDomain {
                s: s0,
                constraint: format!("{primitive} of {value}"),
            },
            other => other,
        };
        let r = match self {
            PhiSpec::MKropina { c, m } => Ok(s.scale(*c) + spow(&s, *m)?),
            PhiSpec::KropinaLinear { c } => Ok(s.scale(*c) + s.recip()?),
            PhiSpec::Thm41Ii { k1, k2 } => {
                Ok(s.scale(*k1) + s.recip()?.scale(2.0 * k2) + s.powi(-3)?)
            }
            PhiSpec::Thm41Iii { k1, k2, m } => {
                let w = (&s * &s).scale(*k2).add_scalar(1.0);
                Ok(s.scale(*k1) + spow(&s, *m)? * w.powf(0.5 * (1.0 - m))?)
            }
            PhiSpec::Thm41Iv { m, k } => {
                let w = (&s * &s).scale(*k).add_scalar(1.0);
                Ok(spow(&s, *m)? * w.powf(0.5 * (1.0 - m))?)
            }
            PhiSpec::Thm41IvConstB { m, b } => {
                let w = (&s * &s).scale(-1.0 / (b * b)).add_scalar(1.0);
                Ok(spow(&s, *m)? * w.powf(0.5 * (1.0 - m))?)
            }
            PhiSpec::Thm41V { m, k, b } => integral_series(*m, *k, *b, s0, order),
            PhiSpec::Custom(e) => eval_expr_jet(e, &[s]),
        };
        r.map_err(lift)
    }

    /// phi and its first three derivatives at s.
    pub fn derivatives(&self, s: f64) -> Result<[f64; 4]> {
        let d = self.series(s, 3)?.derivatives();
        Ok([d[0], d[1], d[2], d[3]])
    }

    /// Series of Q = phi' / (phi - s phi') and Q' around `s0`, both of `order`.
    pub fn q_series(&self, s0: f64, order: usize) -> Result<(Jet, Jet)> {
        let phi = self.series(s0, order + 2)?;
        let dphi = phi.diff(0);
        let s = Jet::series_variable(s0, order + 1);
        let den = &phi.truncate(order + 1) - &(&s * &dphi);
        let scale = phi.value().abs() + (s0 * dphi.value()).abs();
        if den.value().abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateDirection { s: s0 });
        }
        let q = dphi.try_div(&den)?;
        let qp = q.diff(0);
        Ok((q.truncate(order), qp))
    }
}

/// s^m on a series: integer powers directly, otherwise via a positive base.
fn spow(s: &Jet, m: f64) -> Result<Jet> {
    if m.fract() == 0.0 && m.abs() < i32::MAX as f64 {
        s.powi(m as i32)
    } else {
        s.powf(m)
    }
}

/// Value of the integral family at s by quadrature, with the singular
/// t^(m-1) factor removed by the substitution t = s w^(1/m).
pub fn phi_integral_value(m: f64, k: f64, b: f64, s: f64) -> Result<f64> {
    let spec = PhiSpec::Thm41V { m, k, b };
    spec.validate()?;
    spec.check_domain(s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let b2 = b * b;
    let g = |t: f64| (b2 - t * t).powf(-1.5) * (1.0 - k * t * t).powf(-0.5 * (m - 1.0));
    let inner = integrate(|w: f64| g(s * w.powf(1.0 / m)), 0.0, 1.0, QuadOptions::default())?;
    let sm = if m.fract() == 0.0 { s.powi(m as i32) } else { s.powf(m) };
    Ok(b2 * (b2 - s * s).sqrt() * sm * inner)
}

/// Taylor series of the integral family around s0: the value comes from
/// quadrature and higher coefficients from
/// s phi + (b^2 - s^2) phi' = m b^2 (s / sqrt(1 - k s^2))^(m - 1).
fn integral_series(m: f64, k: f64, b: f64, s0: f64, order: usize) -> Result<Jet> {
    let b2 = b * b;
    let p0 = phi_integral_value(m, k, b, s0)?;
    let sig = Jet::series_variable(s0, order);
    let root = (&sig * &sig).scale(-k).add_scalar(1.0).powf(-0.5)?;
    let big_phi = spow(&(&sig * &root), m - 1.0)?.scale(m * b2);
    let rhs = big_phi.coeffs();
    // (A0 + A1 t + A2 t^2) phi' = Phi - (s0 + t) phi
    let (a0, a1, a2) = (b2 - s0 * s0, -2.0 * s0, -1.0);
    let mut p = vec![0.0; order + 1];
    p[0] = p0;
    for n in 0..order {
        // coefficient of t^n
        let mut r = rhs[n] - s0 * p[n];
        if n >= 1 {
            r -= p[n - 1];
            r -= a1 * n as f64 * p[n];
        }
        if n >= 2 {
            r -= a2 * (n - 1) as f64 * p[n - 1];
        }
        p[n + 1] = r / (a0 * (n + 1) as f64);
    }
    let mut out = Jet::constant(sig.space(), order, 0.0);
    out = out + from_coeffs(&p);
    Ok(out)
}

fn from_coeffs(p: &[f64]) -> Jet {
    // Horner in t with exact polynomial arithmetic.
    let order = p.len() - 1;
    let t = Jet::series_variable(0.0, order);
    let mut acc = Jet::constant(t.space(), order, p[order]);
    for k in (0..order).rev() {
        acc = (&acc * &t).add_scalar(p[k]);
    }
    acc
}

/// phi, its derivatives and the spray coefficients Q, Q', Theta, Psi, Delta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiEval {
    pub s: f64,
    pub phi: f64,
    pub dphi: f64,
    pub d2phi: f64,
    pub d3phi: f64,
    pub q: f64,
    pub qp: f64,
    pub theta: f64,
    pub psi: f64,
    pub delta: f64,
}

pub fn phi_eval(spec: &PhiSpec, s: f64, b2: f64) -> Result<PhiEval> {
    let [phi, dphi, d2phi, d3phi] = spec.derivatives(s)?;
    let (q, qp) = spec.q_series(s, 0)?;
    let (q, qp) = (q.value(), qp.value());
    let delta = 1.0 + s * q + (b2 - s * s) * qp;
    if delta.abs() < 1e-12 {
        return Err(Error::VanishingDelta { s });
    }
    Ok(PhiEval {
        s,
        phi,
        dphi,
        d2phi,
        d3phi,
        q,
        qp,
        theta: (q - s * qp) / (2.0 * delta),
        psi: qp / (2.0 * delta),
        delta,
    })
}

/// Derivatives of the integral family: value by quadrature, the rest through
/// the first-order identity it satisfies.
pub fn phi_integral_j4(m: f64, k: f64, b: f64, s: f64) -> Result<[f64; 4]> {
    PhiSpec::Thm41V { m, k, b }.derivatives(s)
}

/// ODE identities satisfied by the catalog families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Identity {
    /// s^2 phi'' + s phi' - phi = 0.
    KropinaOde,
    /// [delta s^2 + eta (b^2 - s^2)] phi'' = [lambda s^2 + mu (b^2 - s^2)] (phi - s phi' + (b^2 - s^2) phi'').
    Y56,
    /// phi'' / (phi - s phi' + (b^2 - s^2) phi'') as a rational function of s.
    Y60,
    /// phi'' = (-m + k2 s^2) / ((1 + k2 s^2) s^2) (phi - s phi').
    Y61,
    /// Q as a rational function of s.
    Y75,
    /// (phi - s phi' + (b^2 - s^2) phi'') / (s phi + (b^2 - s^2) phi') = (m - 1) / (s (1 - k s^2)).
    W69,
}

impl Identity {
    pub const ALL: [Identity; 6] = [
        Identity::KropinaOde,
        Identity::Y56,
        Identity::Y60,
        Identity::Y61,
        Identity::Y75,
        Identity::W69,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::KropinaOde => "kropina_ode",
            Identity::Y56 => "y56",
            Identity::Y60 => "y60",
            Identity::Y61 => "y61",
            Identity::Y75 => "y75",
            Identity::W69 => "w69",
        }
    }

    pub fn from_name(name: &str) -> Option<Identity> {
        Identity::ALL.into_iter().find(|i| i.name() == name)
    }
}

/// Whether `spec` belongs to the family `identity` characterises.
pub fn identity_applies(spec: &PhiSpec, identity: Identity) -> bool {
    let linear = spec.linear_coefficient() != 0.0;
    match identity {
        Identity::KropinaOde => {
            matches!(spec, PhiSpec::KropinaLinear { .. } | PhiSpec::MKropina { .. }) && spec.m() == Some(-1.0)
        }
        Identity::Y56 | Identity::Y60 | Identity::Y61 => expansion_data(spec).is_some(),
        // Q sees the linear part; the (ii) family carries it in its constants
        Identity::Y75 => expansion_data(spec).is_some() && (!linear || matches!(spec, PhiSpec::Thm41Ii { .. })),
        Identity::W69 => matches!(spec, PhiSpec::Thm41V { .. }),
    }
}

/// (m, a_{m+2}): the exponent and the s^{m+2} coefficient of phi / s^m.
fn expansion_data(spec: &PhiSpec) -> Option<(f64, f64)> {
    Some(match spec {
        PhiSpec::MKropina { m, .. } => (*m, 0.0),
        PhiSpec::KropinaLinear { .. } => (-1.0, 0.0),
        PhiSpec::Thm41Ii { k2, .. } => (-3.0, 2.0 * k2),
        PhiSpec::Thm41Iii { k2, m, .. } => (*m, -0.5 * (m - 1.0) * k2),
        PhiSpec::Thm41Iv { m, k } => (*m, 0.5 * (1.0 - m) * k),
        PhiSpec::Thm41IvConstB { m, b } => (*m, -0.5 * (1.0 - m) / (b * b)),
        PhiSpec::Thm41V { .. } | PhiSpec::Custom(_) => return None,
    })
}

/// Scaled residual |LHS - RHS| / max(1, |LHS|, |RHS|) of `identity` at s.
pub fn phi_identity_residual(spec: &PhiSpec, identity: Identity, s: f64, b2: f64) -> Result<f64> {
    let mismatch = || Error::CaseMismatch {
        case: identity.name().to_string(),
        why: format!("family {} carries no matching constants", spec.tag()),
    };
    let [p, dp, d2p, _] = spec.derivatives(s)?;
    let (lhs, rhs) = match identity {
        Identity::KropinaOde => (s * s * d2p + s * dp, p),
        Identity::Y56 => {
            let (m, a) = expansion_data(spec).ok_or_else(mismatch)?;
            let lambda = m * (m - 1.0) + 2.0 * a * b2;
            let mu = m * (m - 1.0);
            let eta = mu * b2;
            let delta = lambda * b2 - (m + 1.0) / m * mu * b2;
            let w = b2 - s * s;
            (
                (delta * s * s + eta * w) * d2p,
                (lambda * s * s + mu * w) * (p - s * dp + w * d2p),
            )
        }
        Identity::Y60 => {
            let (m, a) = expansion_data(spec).ok_or_else(mismatch)?;
            let lhs = d2p / (p - s * dp + (b2 - s * s) * d2p);
            let rhs = (m * (m - 1.0) + 2.0 * a * s * s)
                / (m * (m - 1.0) * b2 + (1.0 - m * m + 2.0 * a * b2) * s * s);
            (lhs, rhs)
        }
        Identity::Y61 => {
            let (m, a) = expansion_data(spec).ok_or_else(mismatch)?;
            let k2 = -2.0 * a / (m - 1.0);
            (d2p, (-m + k2 * s * s) / ((1.0 + k2 * s * s) * s * s) * (p - s * dp))
        }
        Identity::Y75 => {
            let (m, a) = expansion_data(spec).ok_or_else(mismatch)?;
            let c1 = 2.0 * a;
            let c2 = match spec {
                PhiSpec::Thm41Ii { k1, .. } => -48.0 * k1 - c1 * c1,
                _ => 2.0 * (m + 1.0) * c1 * c1,
            };
            let q = dp / (p - s * dp);
            let num = ((m + 2.0) * c1 * c1 - c2) * s.powi(4) + m * (m * m - 1.0) * c1 * s * s
                - m * m * (m - 1.0).powi(2);
            // The denominator carries (m - 1 - c1 s^2); see the module tests.
            let den = m * (m - 1.0).powi(2) * s * (m - 1.0 - c1 * s * s);
            (q, num / den)
        }
        Identity::W69 => {
            let PhiSpec::Thm41V { m, k, b } = spec else {
                return Err(mismatch());
            };
            let w = b * b - s * s;
            (
                (p - s * dp + w * d2p) / (s * p + w * dp),
                (m - 1.0) / (s * (1.0 - k * s * s)),
            )
        }
    };
    Ok((lhs - rhs).abs() / 1f64.max(lhs.abs()).max(rhs.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub holds: bool,
    /// (s, failed condition) at the first violation on the grid.
    pub first_violation: Option<(f64, String)>,
}

/// Whether phi(s) > 0 and phi - s phi' + (rho^2 - s^2) phi'' > 0 on |s| <= rho.
pub fn regularity_check(spec: &PhiSpec, b0: f64, rho: f64) -> RegularityReport {
    let violation = |s: f64, why: String| RegularityReport {
        holds: false,
        first_violation: Some((s, why)),
    };
    if !(rho >= 0.0 && rho < b0) {
        return violation(rho, format!("need 0 <= rho < b0 (rho = {rho}, b0 = {b0})"));
    }
    const POINTS: usize = 401;
    for i in 0..POINTS {
        let s = -rho + 2.0 * rho * i as f64 / (POINTS - 1) as f64;
        match spec.derivatives(s) {
            Err(e) => return violation(s, format!("singular: {e}")),
            Ok([p, dp, d2p, _]) => {
                if p <= 0.0 {
                    return violation(s, format!("phi = {p} <= 0"));
                }
                let g = p - s * dp + (rho * rho - s * s) * d2p;
                if g <= 0.0 {
                    return violation(s, format!("phi - s phi' + (rho^2 - s^2) phi'' = {g} <= 0"));
                }
            }
        }
    }
    RegularityReport {
        holds: true,
        first_violation: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse_phi_expr;
    use crate::jets::finite_diff_oracle;

    #[test]
    fn kropina_linear_hand_values() {
        let e = phi_eval(&PhiSpec::KropinaLinear { c: 0.0 }, 0.5, 0.7).unwrap();
        assert!((e.phi - 2.0).abs() < 1e-14);
        assert!((e.dphi + 4.0).abs() < 1e-13);
        assert!((e.d2phi - 16.0).abs() < 1e-12);
        assert!((e.q + 1.0).abs() < 1e-14);
    }

    #[test]
    fn pure_power_q() {
        let spec = PhiSpec::Thm41Iv { m: 2.0, k: 0.0 };
        for s in [0.3, -0.6, 1.1] {
            let e = phi_eval(&spec, s, 2.0).unwrap();
            assert!((e.d2phi - 2.0).abs() < 1e-13);
            assert!((e.q + 2.0 / s).abs() < 1e-12);
        }
    }

    #[test]
    fn randers_degenerate_direction() {
        // phi = s has phi - s phi' = 0 everywhere
        let spec = PhiSpec::Custom(parse_phi_expr("s").unwrap());
        assert!(matches!(phi_eval(&spec, 0.4, 1.0), Err(Error::DegenerateDirection { .. })));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let specs = [
            PhiSpec::MKropina { c: 0.4, m: -2.0 },
            PhiSpec::KropinaLinear { c: 1.0 },
            PhiSpec::Thm41Ii { k1: 0.3, k2: -0.2 },
            PhiSpec::Thm41Iii { k1: 0.3, k2: -0.2, m: 2.5 },
            PhiSpec::Thm41Iv { m: -2.0, k: 0.3 },
            PhiSpec::Thm41IvConstB { m: 3.0, b: 1.2 },
            PhiSpec::Thm41V { m: 2.0, k: 0.5, b: 1.0 },
        ];
        for spec in &specs {
            for s in [0.25, 0.4, 0.55] {
                let d = spec.derivatives(s).unwrap();
                let f = |p: &[f64]| spec.derivatives(p[0]).unwrap()[0];
                for (order, h) in [(1u8, 1e-3), (2, 3e-3), (3, 4e-3)] {
                    let fd = finite_diff_oracle(f, &[s], &[order], h * s);
                    let err = (fd - d[order as usize]).abs() / d[order as usize].abs().max(1.0);
                    assert!(err < 1e-7, "{} s={s} order {order}: {fd} vs {}", spec.tag(), d[order as usize]);
                }
            }
        }
    }

    #[test]
    fn constb_is_iv_with_k_minus_inverse_b2() {
        let b = 1.3;
        let a = PhiSpec::Thm41IvConstB { m: -2.0, b };
        let c = PhiSpec::Thm41Iv { m: -2.0, k: -1.0 / (b * b) };
        for s in [0.1, 0.5, 0.9, -0.7] {
            let (x, y) = (a.derivatives(s).unwrap(), c.derivatives(s).unwrap());
            for i in 0..4 {
                assert!((x[i] - y[i]).abs() <= 1e-12 * x[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn thm41_ii_with_k1_eq_k2_squared_is_iv() {
        let k2 = 0.35;
        let ii = PhiSpec::Thm41Ii { k1: k2 * k2, k2 };
        let iv = PhiSpec::Thm41Iv { m: -3.0, k: k2 };
        for s in [0.2, 0.45, 0.8] {
            let a = phi_eval(&ii, s, 1.0).unwrap();
            let b = phi_eval(&iv, s, 1.0).unwrap();
            assert!((a.q - b.q).abs() < 1e-10 * a.q.abs().max(1.0));
        }
    }

    #[test]
    fn integral_family_normalisation_near_zero() {
        // phi = s^m (1 + O(s)) for m = 2, k = 0, b = 1
        for s in [1e-3, 1e-2] {
            let v = phi_integral_value(2.0, 0.0, 1.0, s).unwrap();
            assert!((v / (s * s) - 1.0).abs() < 2.0 * s, "{v}");
        }
    }

    #[test]
    fn integral_family_closed_form_k0_m2() {
        // m = 2, k = 0, b = 1: int_0^s t (1 - t^2)^{-3/2} dt = (1 - s^2)^{-1/2} - 1
        // so phi = 2 sqrt(1 - s^2) ((1 - s^2)^{-1/2} - 1) = 2 (1 - sqrt(1 - s^2)).
        for s in [0.1, 0.3, -0.5, 0.9] {
            let v = phi_integral_value(2.0, 0.0, 1.0, s).unwrap();
            let want = 2.0 * (1.0 - (1.0 - s * s).sqrt());
            assert!((v - want).abs() < 1e-12, "{s}: {v} vs {want}");
        }
    }

    #[test]
    fn integral_family_boundary() {
        assert!(matches!(phi_integral_value(2.0, 0.0, 1.0, 1.0), Err(Error::PhiDomain { .. })));
        assert!(phi_integral_value(-2.0, 0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn w69_residual_small() {
        let spec = PhiSpec::Thm41V { m: 2.0, k: 0.5, b: 1.0 };
        let r = phi_identity_residual(&spec, Identity::W69, 0.3, 1.0).unwrap();
        assert!(r <= 1e-9, "{r}");
    }

    #[test]
    fn kropina_ode_holds_and_negative_control() {
        for c in [0.0, 1.0, -2.5] {
            let r = phi_identity_residual(&PhiSpec::KropinaLinear { c }, Identity::KropinaOde, 0.7, 1.0).unwrap();
            assert!(r < 1e-12);
        }
        let r = phi_identity_residual(&PhiSpec::Thm41Iv { m: 2.0, k: 0.5 }, Identity::KropinaOde, 0.7, 1.0).unwrap();
        assert!(r > 1e-3);
    }

    #[test]
    fn y61_for_thm41_iii() {
        let spec = PhiSpec::Thm41Iii { k1: 0.3, k2: -0.2, m: 2.0 };
        assert!(phi_identity_residual(&spec, Identity::Y61, 0.4, 1.0).unwrap() <= 1e-10);
    }

    #[test]
    fn y75_denominator_sign() {
        // Q for s^m (1 + k s^2)^((1-m)/2) is -(m + k s^2) / ((m - 1) s); the
        // rational form must reproduce it with the (m - 1 - c1 s^2) factor.
        let (m, k, s) = (2.0, 0.5, 0.3);
        let spec = PhiSpec::Thm41Iv { m, k };
        let e = phi_eval(&spec, s, 1.0).unwrap();
        assert!((e.q + (m + k * s * s) / ((m - 1.0) * s)).abs() < 1e-12);
        assert!(phi_identity_residual(&spec, Identity::Y75, s, 1.0).unwrap() < 1e-12);
    }

    #[test]
    fn regularity() {
        let kropina = PhiSpec::MKropina { c: 0.0, m: -1.0 };
        assert!(!regularity_check(&kropina, 1.0, 0.5).holds);
        let randers = PhiSpec::Custom(parse_phi_expr("1+s").unwrap());
        assert!(regularity_check(&randers, 1.0, 0.9).holds);
        let sq = PhiSpec::Thm41Iv { m: 2.0, k: 0.0 };
        assert!(!regularity_check(&sq, 1.0, 0.5).holds);
    }

    #[test]
    fn invalid_parameters() {
        assert!(PhiSpec::MKropina { c: 0.0, m: 1.0 }.validate().is_err());
        assert!(PhiSpec::MKropina { c: 0.0, m: 0.0 }.validate().is_err());
        assert!(PhiSpec::Thm41V { m: -1.0, k: 0.0, b: 1.0 }.validate().is_err());
        assert!(PhiSpec::Thm41Iv { m: 2.0, k: -0.1 }.validate().is_ok());
    }
}
