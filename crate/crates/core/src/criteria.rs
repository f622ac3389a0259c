//! Analytic criteria: critical exponents, the blowup and global-existence
//! conditions, `S(I)`/`S(II)` classification, decay-rate cases and the
//! spacetime exponent arithmetic. No simulation happens here.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Nonlinearity, Potential, Sign};

/// Relative tolerance for deciding that two exponents coincide.
pub const EXPONENT_TOL: f64 = 1e-12;

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= EXPONENT_TOL * a.abs().max(b.abs()).max(1.0)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 3 {
        return Err(Error::Domain(format!("dimension must be >= 3, got {dim}")));
    }
    Ok(())
}

/// `2* = 2N / (N - 2)`.
pub fn two_star(dim: usize) -> f64 {
    2.0 * dim as f64 / (dim as f64 - 2.0)
}

/// `q_c = 2* / (max(2 alpha, 1) 2* - 2)`.
pub fn critical_exponent(alpha: f64, dim: usize) -> Result<f64> {
    check_dim(dim)?;
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
    }
    let ts = two_star(dim);
    Ok(ts / ((2.0 * alpha).max(1.0) * ts - 2.0))
}

/// `sup { q : V in L^q + L^inf }`: `N / m` for a singular part, infinite
/// for a bounded potential.
pub fn potential_q_sup(v: &Potential, dim: usize) -> f64 {
    if v.has_singular_part() {
        dim as f64 / v.m
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BracketSign {
    Nonneg,
    Nonpos,
    Indefinite,
}

impl BracketSign {
    pub fn as_str(self) -> &'static str {
        match self {
            BracketSign::Nonneg => "nonneg",
            BracketSign::Nonpos => "nonpos",
            BracketSign::Indefinite => "indefinite",
        }
    }
}

/// Structural constants of `h` used by the criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HConstants {
    /// Least `k` with `s h'' <= k h'`.
    pub k: f64,
    /// Growth exponent: `max(s^{1/2}, s^alpha) <= a [h(s) + s^{1/2}]` for `s >= 1`.
    pub alpha: f64,
    pub a: f64,
    /// `k1` with `-k1 h'^2 <= 2 h'' h' s + h'^2`, present when every exponent is below 1/2.
    pub k1: Option<f64>,
    /// Sign of `2 h'' h' s + h'^2`.
    pub bracket_sign: BracketSign,
    pub is_zero: bool,
}

pub fn extract_h_constants(h: &Nonlinearity) -> HConstants {
    let exps: Vec<f64> = h
        .terms()
        .iter()
        .filter(|t| t.coeff > 0.0)
        .map(|t| t.exponent)
        .collect();
    if exps.is_empty() {
        return HConstants {
            k: -0.5,
            alpha: 0.5,
            a: 1.0,
            k1: None,
            bracket_sign: BracketSign::Nonneg,
            is_zero: true,
        };
    }
    let amax = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let amin = exps.iter().cloned().fold(f64::INFINITY, f64::min);
    let bracket_sign = if amin >= 0.5 {
        BracketSign::Nonneg
    } else if amax <= 0.5 {
        BracketSign::Nonpos
    } else {
        BracketSign::Indefinite
    };
    let k1 = if amax < 0.5 { Some(1.0 - 2.0 * amin) } else { None };

    // growth constant by log-sampling s in [1, 1e6]
    let samples = 4000;
    let mut ratio: f64 = 0.0;
    for i in 0..=samples {
        let s = 10f64.powf(6.0 * i as f64 / samples as f64);
        let lhs = s.sqrt().max(s.powf(amax));
        ratio = ratio.max(lhs / (h.value(s) + s.sqrt()));
    }
    HConstants {
        k: amax - 1.0,
        alpha: amax,
        a: 1.01 * ratio,
        k1,
        bracket_sign,
        is_zero: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    SI,
    SII,
    Borderline,
}

impl Membership {
    pub fn as_str(self) -> &'static str {
        match self {
            Membership::SI => "S(I)",
            Membership::SII => "S(II)",
            Membership::Borderline => "borderline",
        }
    }
}

pub fn classify_si_sii(h: &HConstants, v: &Potential, dim: usize) -> Result<Membership> {
    let qc = critical_exponent(h.alpha, dim)?;
    let qs = potential_q_sup(v, dim);
    Ok(if qs.is_infinite() || (qs > qc && !same(qs, qc)) {
        Membership::SI
    } else if same(qs, qc) {
        Membership::Borderline
    } else {
        Membership::SII
    })
}

/// Outcome of the pointwise condition `[max((2k+1)N, 0) + 2] V + x.grad V <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C1Check {
    pub holds: bool,
    pub threshold_m: f64,
}

pub fn c1_threshold(k: f64, dim: usize) -> f64 {
    ((2.0 * k + 1.0) * dim as f64).max(0.0) + 2.0
}

pub fn check_c1(h: &HConstants, v: &Potential, dim: usize) -> Result<C1Check> {
    check_dim(dim)?;
    let threshold_m = c1_threshold(h.k, dim);
    // (threshold - m) V_singular + threshold V_bounded <= 0 everywhere
    let singular_ok = !v.has_singular_part()
        || match v.sign {
            Sign::Plus => v.m >= threshold_m || same(v.m, threshold_m),
            Sign::Minus => v.m <= threshold_m || same(v.m, threshold_m),
        };
    let bounded_ok = threshold_m * v.bounded <= 0.0;
    Ok(C1Check {
        holds: singular_ok && bounded_ok,
        threshold_m,
    })
}

/// `q > 1` and `q >= q_c`.
pub fn check_c2(h: &HConstants, q: f64, dim: usize) -> Result<bool> {
    if !(q > 0.0) {
        return Err(Error::Domain(format!("q must be > 0, got {q}")));
    }
    let qc = critical_exponent(h.alpha, dim)?;
    Ok(q > 1.0 && (q >= qc || same(q, qc)))
}

/// Exponent `q` of `V in L^q + L^inf` as seen by the criteria: either given
/// exactly, or every `q` below `q_sup` of a power law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QExponent {
    Exact(f64),
    Below(f64),
}

impl QExponent {
    pub fn of_potential(v: &Potential, dim: usize) -> Self {
        QExponent::Below(potential_q_sup(v, dim))
    }

    /// Some admissible `q` satisfies `q > x`.
    fn exceeds(self, x: f64) -> bool {
        match self {
            QExponent::Exact(q) => q > x && !same(q, x),
            QExponent::Below(s) => s > x && !same(s, x),
        }
    }

    /// Some admissible `q` satisfies `q >= x`.
    fn reaches(self, x: f64) -> bool {
        match self {
            QExponent::Exact(q) => q >= x || same(q, x),
            QExponent::Below(s) => s > x && !same(s, x),
        }
    }

    fn equals(self, x: f64) -> bool {
        matches!(self, QExponent::Exact(q) if same(q, x))
    }

    pub fn value(self) -> f64 {
        match self {
            QExponent::Exact(q) | QExponent::Below(q) => q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Thm2Case {
    I,
    II,
    III,
    IV,
}

impl Thm2Case {
    pub fn as_str(self) -> &'static str {
        match self {
            Thm2Case::I => "i",
            Thm2Case::II => "ii",
            Thm2Case::III => "iii",
            Thm2Case::IV => "iv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm2Verdict {
    pub case: Option<Thm2Case>,
    /// Smallness of `V1` in the `q = N/2` case.
    pub smallness_ok: Option<bool>,
    pub reasons: Vec<String>,
}

/// Case selection among the global-existence hypotheses.
/// `v1_norm` is `||V1||_{L^{N/2}}`, needed only when `q = N/2`.
pub fn theorem2_case(
    h: &HConstants,
    q: QExponent,
    dim: usize,
    v1_norm: Option<f64>,
) -> Result<Thm2Verdict> {
    check_dim(dim)?;
    let n = dim as f64;
    let alpha = h.alpha;
    let qc = critical_exponent(alpha, dim)?;
    let mut reasons = Vec::new();
    let c2 = q.exceeds(1.0) && q.reaches(qc);
    if !c2 {
        reasons.push(format!("(C2) fails: need q > 1 and q >= q_c = {qc}"));
        return Ok(Thm2Verdict {
            case: None,
            smallness_ok: None,
            reasons,
        });
    }
    let upper = (n - 1.0) / n;
    let verdict = |case, smallness_ok, reasons| Thm2Verdict {
        case,
        smallness_ok,
        reasons,
    };
    if alpha <= 0.5 {
        if q.exceeds(n / 2.0) {
            reasons.push(format!("alpha = {alpha} <= 1/2 and q > N/2 = {}", n / 2.0));
            return Ok(verdict(Some(Thm2Case::I), None, reasons));
        }
        if q.equals(n / 2.0) {
            let norm = v1_norm.ok_or_else(|| {
                Error::Usage("q = N/2 needs the L^{N/2} norm of the singular part".into())
            })?;
            let cs = sobolev_best_constant(dim)?;
            let lhs = cs.powf(2.0 / two_star(dim)) * norm;
            let ok = lhs < 1.0;
            reasons.push(format!(
                "alpha <= 1/2, q = N/2; C_s^(2/2*) ||V1|| = {lhs} {} 1",
                if ok { "<" } else { ">=" }
            ));
            return Ok(verdict(Some(Thm2Case::II), Some(ok), reasons));
        }
        reasons.push(format!("alpha <= 1/2 needs q >= N/2 = {}", n / 2.0));
        return Ok(verdict(None, None, reasons));
    }
    if alpha < upper {
        if q.exceeds(qc) {
            reasons.push(format!("1/2 < alpha < (N-1)/N and q > q_c = {qc}"));
            return Ok(verdict(Some(Thm2Case::III), None, reasons));
        }
        reasons.push(format!("q = q_c = {qc} with 1/2 < alpha < (N-1)/N is open"));
        return Ok(verdict(None, None, reasons));
    }
    let ts = two_star(dim);
    let q4 = alpha * ts / (alpha * ts - 1.0);
    if q.reaches(q4) {
        reasons.push(format!("alpha >= (N-1)/N and q >= alpha 2*/(alpha 2* - 1) = {q4}"));
        return Ok(verdict(Some(Thm2Case::IV), None, reasons));
    }
    reasons.push(format!("alpha >= (N-1)/N needs q >= {q4}"));
    Ok(verdict(None, None, reasons))
}

/// `int_0^{pi/2} sin^a cos^b` by the midpoint rule.
fn trig_integral(a: f64, b: f64, points: usize) -> f64 {
    let h = std::f64::consts::FRAC_PI_2 / points as f64;
    (0..points)
        .map(|i| {
            let th = (i as f64 + 0.5) * h;
            th.sin().powf(a) * th.cos().powf(b)
        })
        .sum::<f64>()
        * h
}

/// Sobolev quotient `int w^{2*} / (int |grad w|^2)^{2*/2}` of the bubble
/// `w(r) = (1 + (r/scale)^2)^{-(N-2)/2}`, integrated after `r = scale tan(theta)`.
pub fn bubble_quotient(dim: usize, scale: f64, points: usize) -> Result<f64> {
    check_dim(dim)?;
    if !(scale > 0.0) || points == 0 {
        return Err(Error::Domain("scale must be > 0 and points >= 1".into()));
    }
    let n = dim as f64;
    let omega = crate::grid::unit_sphere_area(dim);
    // int w^{2*} dx = omega scale^N int sin^{N-1} cos^{N-1}
    let num = omega * scale.powf(n) * trig_integral(n - 1.0, n - 1.0, points);
    // int |w'|^2 dx = omega (N-2)^2 scale^{N-2} int sin^{N+1} cos^{N-3}
    let den = omega * (n - 2.0).powi(2) * scale.powf(n - 2.0) * trig_integral(n + 1.0, n - 3.0, points);
    Ok(num / den.powf(two_star(dim) / 2.0))
}

/// Best constant `C_s` in `int w^{2*} <= C_s (int |grad w|^2)^{2*/2}`.
pub fn sobolev_best_constant(dim: usize) -> Result<f64> {
    bubble_quotient(dim, 1.0, 1 << 14)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevConstants {
    pub dim: usize,
    pub two_star: f64,
    pub c_s: f64,
}

impl SobolevConstants {
    pub fn new(dim: usize) -> Result<Self> {
        Ok(Self {
            dim,
            two_star: two_star(dim),
            c_s: sobolev_best_constant(dim)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm4Verdict {
    pub case: Option<u8>,
    pub k1: Option<f64>,
    pub c: Option<f64>,
    pub predicted_l: Option<f64>,
    pub reasons: Vec<String>,
}

/// Decay case for `V <= 0` power laws, with the predicted rate `t^{-l}` of
/// `int |grad h|^2 + int |V||u|^2`.
pub fn theorem4_case(h: &HConstants, v: &Potential, dim: usize) -> Result<Thm4Verdict> {
    check_dim(dim)?;
    let n = dim as f64;
    let none = |reason: String| Thm4Verdict {
        case: None,
        k1: h.k1,
        c: None,
        predicted_l: None,
        reasons: vec![reason],
    };
    if v.has_singular_part() && v.sign == Sign::Plus || v.bounded > 0.0 {
        return Ok(none("Theorem 4 part 1 requires V(x)≤0".into()));
    }
    if v.bounded != 0.0 {
        return Ok(none(
            "a nonzero bounded part breaks -c|V| <= 2V + x.grad V with c < 2".into(),
        ));
    }
    if !v.has_singular_part() {
        return Ok(none("V = 0: no decay case".into()));
    }
    if !(potential_q_sup(v, dim) > 1.0) {
        return Ok(none(format!("V is in no L^q + L^inf with q > 1 (m = {})", v.m)));
    }
    // 2V + x.grad V = (2 - m) V with V < 0
    let v_nonneg = v.m >= 2.0;
    let c = if v_nonneg { None } else { Some(2.0 - v.m) };
    if let Some(c) = c {
        if !(c > 0.0 && c < 2.0) {
            return Ok(none(format!("c = 2 - m = {c} must lie in (0, 2)")));
        }
    }
    let mut reasons = Vec::new();
    let (case, l) = match h.bracket_sign {
        BracketSign::Nonneg => {
            reasons.push("2h''h's + h'^2 >= 0".to_string());
            match c {
                None => {
                    reasons.push(format!("m = {} >= 2 so 2V + x.grad V >= 0", v.m));
                    (1, 2.0)
                }
                Some(c) => {
                    reasons.push(format!("-c|V| <= 2V + x.grad V <= 0 with c = {c}"));
                    (2, 2.0 - c)
                }
            }
        }
        BracketSign::Nonpos => {
            let Some(k1) = h.k1 else {
                return Ok(none("bracket is nonpositive but k1 is not defined".into()));
            };
            if !(k1 > 0.0 && k1 < 2.0 / n) {
                return Ok(none(format!("k1 = {k1} must lie in (0, 2/N)")));
            }
            reasons.push(format!("-k1 h'^2 <= 2h''h's + h'^2 <= 0 with k1 = {k1}"));
            match c {
                None => (3, 2.0 - n * k1),
                Some(c) => (4, 2.0 - (n * k1).max(c)),
            }
        }
        BracketSign::Indefinite => {
            return Ok(none("2h''h's + h'^2 changes sign".into()));
        }
    };
    Ok(Thm4Verdict {
        case: Some(case),
        k1: h.k1,
        c,
        predicted_l: Some(l),
        reasons,
    })
}

/// `J(0) / (4 y(0))`, the latest possible blowup time.
pub fn blowup_time_bound(j0: f64, y0: f64) -> Result<f64> {
    if !(y0 > 0.0) {
        return Err(Error::Hypothesis(format!("need y(0) > 0, got {y0}")));
    }
    Ok(j0 / (4.0 * y0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prop31Outcome {
    Global,
    BlowupCapable,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop31Verdict {
    pub outcome: Prop31Outcome,
    /// Item label: `1`, `i`, `ii` or `iii`.
    pub item: String,
    pub threshold_m: Option<f64>,
    pub side_conditions: Vec<String>,
}

impl Prop31Verdict {
    pub fn describe(&self) -> String {
        match self.outcome {
            Prop31Outcome::Global => format!("global per Prop. 3.1({})", self.item),
            Prop31Outcome::BlowupCapable => {
                format!("blowup-capable per Prop. 3.1({})", self.item)
            }
            Prop31Outcome::Indeterminate => "Prop. 3.1 indeterminate".to_string(),
        }
    }
}

/// Verdict table for `h = b s^alpha`, `V = +|x|^{-m}`.
pub fn proposition31_verdict(b: f64, alpha: f64, m: f64, dim: usize) -> Result<Prop31Verdict> {
    check_dim(dim)?;
    if !(b >= 0.0) {
        return Err(Error::Domain(format!("b must be >= 0, got {b}")));
    }
    if b > 0.0 && !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
    }
    let n = dim as f64;
    let ts = two_star(dim);
    let blowup_side = vec![
        "E(u0) < 0".to_string(),
        "x u0 in L^2".to_string(),
        "Im int conj(u0) (x . grad u0) >= 0".to_string(),
    ];
    let global_side = vec!["0 < E(u0) < inf".to_string()];
    let v = |outcome, item: &str, threshold_m: f64, side: &Vec<String>| Prop31Verdict {
        outcome,
        item: item.to_string(),
        threshold_m: Some(threshold_m),
        side_conditions: if outcome == Prop31Outcome::Indeterminate {
            Vec::new()
        } else {
            side.clone()
        },
    };
    if b == 0.0 {
        return Ok(if m < 2.0 {
            v(Prop31Outcome::Global, "1", 2.0, &global_side)
        } else {
            v(Prop31Outcome::BlowupCapable, "1", 2.0, &blowup_side)
        });
    }
    if alpha <= 0.5 {
        return Ok(if m < 2.0 {
            v(Prop31Outcome::Global, "i", 2.0, &global_side)
        } else {
            v(Prop31Outcome::Indeterminate, "i", 2.0, &global_side)
        });
    }
    if alpha < (n - 1.0) / n {
        let thr = n * (2.0 * alpha * ts - 2.0) / ts;
        return Ok(if m < thr {
            v(Prop31Outcome::Global, "ii", thr, &global_side)
        } else {
            v(Prop31Outcome::BlowupCapable, "ii", thr, &blowup_side)
        });
    }
    let thr = n * (alpha * ts - 1.0) / (alpha * ts);
    Ok(if m < thr {
        v(Prop31Outcome::Global, "iii", thr, &vec!["any u0".to_string()])
    } else {
        v(Prop31Outcome::Indeterminate, "iii", thr, &global_side)
    })
}

/// `m1 = min(alpha) 2* / r_bar`, `m2 = max(alpha) 2* / r_bar` for a power sum.
pub fn spacetime_m_exponents(h: &Nonlinearity, r_bar: f64, dim: usize) -> Result<(f64, f64)> {
    check_dim(dim)?;
    let (Some(lo), Some(hi)) = (h.min_exponent(), h.max_exponent()) else {
        return Err(Error::Domain("h = 0 has no growth exponents".into()));
    };
    let ts = two_star(dim);
    Ok((lo * ts / r_bar, hi * ts / r_bar))
}

/// `2 r_bar (m r_bar - 2) / (2* l (r_bar - 2))`.
pub fn spacetime_q_threshold(m: f64, r_bar: f64, l: f64, dim: usize) -> f64 {
    2.0 * r_bar * (m * r_bar - 2.0) / (two_star(dim) * l * (r_bar - 2.0))
}

/// Exponent conditions for the `L^{q_bar}_t L^{r_bar}_x` bound.
pub fn spacetime_exponent_check(
    q: f64,
    q_bar: f64,
    r_bar: f64,
    m1: f64,
    m2: f64,
    l: f64,
    dim: usize,
) -> Result<bool> {
    check_dim(dim)?;
    if !(r_bar > 2.0) {
        return Err(Error::Domain(format!("r_bar must exceed 2, got {r_bar}")));
    }
    if !(q > 0.0 && q_bar > 0.0 && m1 > 0.0 && m2 > 0.0 && l > 0.0) {
        return Err(Error::Domain("q, q_bar, m1, m2, l must be positive".into()));
    }
    Ok(m1 > 1.0
        && m2 > 1.0
        && q > spacetime_q_threshold(m1, r_bar, l, dim)
        && q > spacetime_q_threshold(m2, r_bar, l, dim))
}

/// Quantities of `u0` that enter the blowup hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDiagnostics {
    pub energy: f64,
    pub variance: f64,
    pub virial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm1Verdict {
    pub applicable: bool,
    pub c1: C1Check,
    pub reasons: Vec<String>,
    pub energy_nonpositive: Option<bool>,
    pub virial_positive: Option<bool>,
    pub variance_finite: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub dim: usize,
    pub h: HConstants,
    pub q_c: f64,
    pub q_sup_of_v: f64,
    pub q: QExponent,
    pub membership: Membership,
    pub thm1: Thm1Verdict,
    /// Global existence for `V <= 0` and `0 < E(u0)`, independent of the cases.
    pub thm2_nonpositive_v: bool,
    pub thm2: Thm2Verdict,
    pub thm4: Thm4Verdict,
    pub prop31: Option<Prop31Verdict>,
    pub blowup_bound: Option<f64>,
}

/// Inputs of [`classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyInput {
    pub dim: usize,
    pub h: Nonlinearity,
    pub v: Potential,
    pub q: Option<f64>,
    pub v1_norm: Option<f64>,
    pub initial: Option<InitialDiagnostics>,
}

pub fn classify(input: &ClassifyInput) -> Result<ClassificationReport> {
    let dim = input.dim;
    check_dim(dim)?;
    input.v.validate()?;
    let hc = extract_h_constants(&input.h);
    let q_c = critical_exponent(hc.alpha, dim)?;
    let q_sup = potential_q_sup(&input.v, dim);
    let q = match input.q {
        Some(q) if !(q > 0.0) => return Err(Error::Domain(format!("q must be > 0, got {q}"))),
        Some(q) => QExponent::Exact(q),
        None => QExponent::of_potential(&input.v, dim),
    };
    let membership = classify_si_sii(&hc, &input.v, dim)?;

    let c1 = check_c1(&hc, &input.v, dim)?;
    let q_ok = q.exceeds(1.0);
    let mut reasons = Vec::new();
    reasons.push(format!(
        "(C1) threshold m = {}: {}",
        c1.threshold_m,
        if c1.holds { "holds" } else { "fails" }
    ));
    if !q_ok {
        reasons.push("V must lie in L^q + L^inf for some q > 1".to_string());
    }
    let init = input.initial;
    let thm1 = Thm1Verdict {
        applicable: c1.holds && q_ok,
        c1,
        reasons,
        energy_nonpositive: init.map(|d| d.energy <= 0.0),
        virial_positive: init.map(|d| d.virial > 0.0),
        variance_finite: init.map(|d| d.variance.is_finite()),
    };
    let blowup_bound = init.and_then(|d| blowup_time_bound(d.variance, d.virial).ok());

    let v_nonpositive = (!input.v.has_singular_part() || input.v.sign == Sign::Minus)
        && input.v.bounded <= 0.0;
    let thm2 = theorem2_case(&hc, q, dim, input.v1_norm)?;
    let thm4 = theorem4_case(&hc, &input.v, dim)?;

    let prop31 = if input.v.sign == Sign::Plus
        && input.v.has_singular_part()
        && input.v.c == 1.0
        && input.v.bounded == 0.0
        && input.h.terms().len() <= 1
    {
        let (b, alpha) = input
            .h
            .terms()
            .first()
            .map_or((0.0, 0.5), |t| (t.coeff, t.exponent));
        Some(proposition31_verdict(b, alpha, input.v.m, dim)?)
    } else {
        None
    };

    Ok(ClassificationReport {
        dim,
        h: hc,
        q_c,
        q_sup_of_v: q_sup,
        q,
        membership,
        thm1,
        thm2_nonpositive_v: v_nonpositive && q_ok,
        thm2,
        thm4,
        prop31,
        blowup_bound,
    })
}

fn fmt_opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

impl ClassificationReport {
    /// One-line verdict, e.g. `S(I); Theorem 2 case (i)`.
    pub fn summary(&self) -> String {
        let mut parts = vec![self.membership.as_str().to_string()];
        if let Some(c) = self.thm2.case {
            parts.push(format!("Theorem 2 case ({})", c.as_str()));
        }
        if self.thm1.applicable {
            parts.push("Theorem 1 applicable given E(u0)<0, y(0)>0".to_string());
        }
        if let Some(p) = &self.prop31 {
            if p.outcome != Prop31Outcome::Indeterminate {
                parts.push(p.describe());
            }
        }
        if let (Some(c), Some(l)) = (self.thm4.case, self.thm4.predicted_l) {
            parts.push(format!("Theorem 4 case ({c}), l = {l}"));
        }
        parts.join("; ")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "classification (N = {})", self.dim);
        let _ = writeln!(s, "  verdict: {}", self.summary());
        let _ = writeln!(
            s,
            "  h constants: k = {}, alpha = {}, a = {}, k1 = {}, bracket {}",
            self.h.k,
            self.h.alpha,
            self.h.a,
            fmt_opt(self.h.k1),
            self.h.bracket_sign.as_str()
        );
        let _ = writeln!(
            s,
            "  q_c = {}, q_sup(V) = {}, membership {}",
            self.q_c,
            self.q_sup_of_v,
            self.membership.as_str()
        );
        let _ = writeln!(
            s,
            "  blowup criterion: {}",
            if self.thm1.applicable { "applicable" } else { "not applicable" }
        );
        for r in &self.thm1.reasons {
            let _ = writeln!(s, "    - {r}");
        }
        if let Some(e) = self.thm1.energy_nonpositive {
            let _ = writeln!(s, "    - E(u0) <= 0: {e}");
        }
        if let Some(y) = self.thm1.virial_positive {
            let _ = writeln!(s, "    - y(0) > 0: {y}");
        }
        if let Some(b) = self.blowup_bound {
            let _ = writeln!(s, "    - blowup before J(0)/(4y(0)) = {b}");
        }
        let _ = writeln!(
            s,
            "  global existence case: {}{}",
            self.thm2.case.map_or("none", |c| c.as_str()),
            if self.thm2_nonpositive_v {
                " (V <= 0: global for 0 < E(u0))"
            } else {
                ""
            }
        );
        for r in &self.thm2.reasons {
            let _ = writeln!(s, "    - {r}");
        }
        if let Some(ok) = self.thm2.smallness_ok {
            let _ = writeln!(s, "    - smallness: {ok}");
        }
        let _ = writeln!(
            s,
            "  decay case: {}, predicted l = {}",
            fmt_opt(self.thm4.case),
            fmt_opt(self.thm4.predicted_l)
        );
        for r in &self.thm4.reasons {
            let _ = writeln!(s, "    - {r}");
        }
        if let Some(p) = &self.prop31 {
            let _ = writeln!(s, "  power-law table: {}", p.describe());
            if let Some(t) = p.threshold_m {
                let _ = writeln!(s, "    - threshold m = {t}");
            }
            for c in &p.side_conditions {
                let _ = writeln!(s, "    - needs {c}");
            }
        }
        s
    }

    /// `key=value` lines, one per field.
    pub fn to_key_values(&self) -> String {
        let mut kv: Vec<(&str, String)> = vec![
            ("dim", self.dim.to_string()),
            ("k", self.h.k.to_string()),
            ("alpha", self.h.alpha.to_string()),
            ("a", self.h.a.to_string()),
            ("k1", fmt_opt(self.h.k1)),
            ("bracket_sign", self.h.bracket_sign.as_str().to_string()),
            ("q_c", self.q_c.to_string()),
            ("q_sup_of_V", self.q_sup_of_v.to_string()),
            ("q", self.q.value().to_string()),
            ("set_membership", self.membership.as_str().to_string()),
            ("thm1_applicable", self.thm1.applicable.to_string()),
            ("c1_holds", self.thm1.c1.holds.to_string()),
            ("c1_threshold_m", self.thm1.c1.threshold_m.to_string()),
            ("thm1_reasons", self.thm1.reasons.join(" | ")),
            (
                "thm2_case",
                self.thm2.case.map_or("none", |c| c.as_str()).to_string(),
            ),
            ("thm2_reasons", self.thm2.reasons.join(" | ")),
            ("thm2_nonpositive_v", self.thm2_nonpositive_v.to_string()),
            ("thm4_case", fmt_opt(self.thm4.case)),
            ("thm4_c", fmt_opt(self.thm4.c)),
            ("predicted_l", fmt_opt(self.thm4.predicted_l)),
            ("blowup_bound", fmt_opt(self.blowup_bound)),
            ("smallness_ok", fmt_opt(self.thm2.smallness_ok)),
        ];
        if let Some(p) = &self.prop31 {
            let outcome = match p.outcome {
                Prop31Outcome::Global => "global",
                Prop31Outcome::BlowupCapable => "blowup_capable",
                Prop31Outcome::Indeterminate => "indeterminate",
            };
            kv.push(("prop31", format!("{outcome}:{}", p.item)));
        }
        let mut s = String::new();
        for (k, v) in kv {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PowerTerm;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn single(alpha: f64) -> HConstants {
        extract_h_constants(&Nonlinearity::power(1.0, alpha).unwrap())
    }

    fn repulsive(m: f64) -> Potential {
        Potential::power_law(Sign::Plus, 1.0, m)
    }

    fn attractive(m: f64) -> Potential {
        Potential::power_law(Sign::Minus, 1.0, m)
    }

    fn gamma_half_integer(x2: usize) -> f64 {
        // Gamma(x2 / 2) by recursion from Gamma(1) and Gamma(1/2)
        let mut g = if x2.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
        let mut k = if x2.is_multiple_of(2) { 2 } else { 1 };
        while k < x2 {
            g *= k as f64 / 2.0;
            k += 2;
        }
        g
    }

    fn talenti(dim: usize) -> f64 {
        let n = dim as f64;
        let s = (PI * n * (n - 2.0)).powf(-0.5)
            * (gamma_half_integer(2 * dim) / gamma_half_integer(dim)).powf(1.0 / n);
        s.powf(two_star(dim))
    }

    #[test]
    fn critical_exponent_values() {
        assert_relative_eq!(critical_exponent(0.5, 3).unwrap(), 1.5, max_relative = 1e-15);
        assert_relative_eq!(critical_exponent(1.0, 3).unwrap(), 0.6, max_relative = 1e-15);
        assert_relative_eq!(critical_exponent(0.6, 4).unwrap(), 10.0 / 7.0, max_relative = 1e-15);
        assert!(critical_exponent(0.0, 3).is_err());
        assert!(critical_exponent(0.5, 2).is_err());
    }

    #[test]
    fn q_sup_values() {
        assert_relative_eq!(potential_q_sup(&repulsive(2.0), 3), 1.5);
        assert_relative_eq!(potential_q_sup(&repulsive(3.0), 3), 1.0);
        assert!(potential_q_sup(&Potential::zero(), 3).is_infinite());
        assert!(potential_q_sup(&Potential::constant(2.0), 3).is_infinite());
    }

    #[test]
    fn membership_examples() {
        let h = single(0.5);
        assert_eq!(classify_si_sii(&h, &repulsive(1.5), 3).unwrap(), Membership::SI);
        assert_eq!(classify_si_sii(&h, &repulsive(2.0), 3).unwrap(), Membership::Borderline);
        assert_eq!(classify_si_sii(&h, &repulsive(3.0), 3).unwrap(), Membership::SII);
    }

    #[test]
    fn c1_examples() {
        let zero = extract_h_constants(&Nonlinearity::zero());
        let c = check_c1(&zero, &repulsive(2.0), 3).unwrap();
        assert!(c.holds);
        assert_eq!(c.threshold_m, 2.0);
        assert!(check_c1(&zero, &attractive(1.0), 3).unwrap().holds);
        assert!(!check_c1(&zero, &repulsive(1.5), 3).unwrap().holds);
        let h = single(0.8);
        assert_relative_eq!(check_c1(&h, &repulsive(5.0), 3).unwrap().threshold_m, 0.6 * 3.0 + 2.0);
        assert!(check_c1(&zero, &Potential::constant(-1.0), 3).unwrap().holds);
        assert!(!check_c1(&zero, &Potential::constant(1.0), 3).unwrap().holds);
    }

    #[test]
    fn c2_examples() {
        let h = single(0.5);
        assert!(check_c2(&h, 1.6, 3).unwrap());
        assert!(!check_c2(&h, 1.4, 3).unwrap());
        assert!(!check_c2(&single(1.0), 1.0, 3).unwrap());
        assert!(check_c2(&h, -1.0, 3).is_err());
    }

    #[test]
    fn theorem2_examples() {
        let case = |alpha, q| {
            theorem2_case(&single(alpha), QExponent::Exact(q), 3, None)
                .unwrap()
                .case
        };
        assert_eq!(case(0.5, 2.0), Some(Thm2Case::I));
        assert_eq!(case(0.7, 2.0), Some(Thm2Case::IV));
        assert_eq!(case(0.6, 1.2), Some(Thm2Case::III));
        assert_eq!(case(0.6, 6.0 / 5.2), None);
        assert_eq!(case(0.5, 1.4), None);
        assert_eq!(case(0.7, 1.3), None);
    }

    #[test]
    fn theorem2_half_dimension_needs_norm() {
        let h = single(0.5);
        let err = theorem2_case(&h, QExponent::Exact(1.5), 3, None).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
        let cs = sobolev_best_constant(3).unwrap();
        let limit = cs.powf(-1.0 / 3.0);
        let small = theorem2_case(&h, QExponent::Exact(1.5), 3, Some(0.9 * limit)).unwrap();
        assert_eq!(small.case, Some(Thm2Case::II));
        assert_eq!(small.smallness_ok, Some(true));
        let big = theorem2_case(&h, QExponent::Exact(1.5), 3, Some(1.1 * limit)).unwrap();
        assert_eq!(big.smallness_ok, Some(false));
    }

    #[test]
    fn power_law_q_is_strictly_below_sup() {
        // V = r^{-2} in N = 3 lies in L^q + L^inf only for q < 3/2
        let verdict =
            theorem2_case(&single(0.5), QExponent::of_potential(&repulsive(2.0), 3), 3, None)
                .unwrap();
        assert_eq!(verdict.case, None);
        let verdict =
            theorem2_case(&single(0.5), QExponent::of_potential(&repulsive(1.5), 3), 3, None)
                .unwrap();
        assert_eq!(verdict.case, Some(Thm2Case::I));
    }

    #[test]
    fn sobolev_matches_talenti() {
        for dim in 3..=7 {
            let cs = sobolev_best_constant(dim).unwrap();
            assert_relative_eq!(cs, talenti(dim), max_relative = 1e-8);
        }
        assert_relative_eq!(
            sobolev_best_constant(3).unwrap(),
            16.0 / (27.0 * PI.powi(4)),
            max_relative = 1e-8
        );
    }

    #[test]
    fn sobolev_matches_radial_quadrature() {
        // midpoint rule in r on [0, R] with the algebraic tails added
        let (m, r) = (1usize << 15, 1e3);
        let dr = r / m as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..m {
            let x = (j as f64 + 0.5) * dr;
            let w = (1.0 + x * x).powf(-0.5);
            let dw = -x * (1.0 + x * x).powf(-1.5);
            num += w.powi(6) * x * x * dr;
            den += dw * dw * x * x * dr;
        }
        num += r.powi(-3) / 3.0;
        den += 1.0 / r;
        let quotient = 4.0 * PI * num / (4.0 * PI * den).powi(3);
        assert_relative_eq!(sobolev_best_constant(3).unwrap(), quotient, max_relative = 1e-4);
    }

    #[test]
    fn bubble_quotient_is_scale_invariant() {
        for dim in [3, 4, 5] {
            let a = bubble_quotient(dim, 1.0, 4096).unwrap();
            let b = bubble_quotient(dim, 2.0, 4096).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
    }

    #[test]
    fn bubble_quotient_converges_monotonically() {
        // the mapped integrands are trigonometric polynomials, so the
        // midpoint rule becomes exact after a handful of points
        for dim in [3, 4, 5, 6] {
            let values: Vec<f64> = [4, 8, 16, 32, 64, 128]
                .iter()
                .map(|&p| bubble_quotient(dim, 1.0, p).unwrap())
                .collect();
            let changes: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            for c in changes.windows(2) {
                assert!(c[1] <= 0.25 * c[0] + 1e-13 * values[0], "{dim}: {changes:?}");
            }
            assert_relative_eq!(values[5], talenti(dim), max_relative = 1e-4);
        }
    }

    #[test]
    fn theorem4_examples() {
        let v = theorem4_case(&single(0.5), &attractive(2.0), 3).unwrap();
        assert_eq!((v.case, v.predicted_l), (Some(1), Some(2.0)));
        let v = theorem4_case(&single(0.4), &attractive(2.0), 3).unwrap();
        assert_eq!(v.case, Some(3));
        assert_relative_eq!(v.predicted_l.unwrap(), 1.4, max_relative = 1e-12);
        let v = theorem4_case(&single(0.4), &attractive(1.5), 3).unwrap();
        assert_eq!(v.case, Some(4));
        assert_relative_eq!(v.predicted_l.unwrap(), 1.4, max_relative = 1e-12);
        let v = theorem4_case(&single(0.8), &attractive(1.0), 3).unwrap();
        assert_eq!((v.case, v.c, v.predicted_l), (Some(2), Some(1.0), Some(1.0)));
        let v = theorem4_case(&single(0.5), &repulsive(2.0), 3).unwrap();
        assert_eq!(v.case, None);
        assert!(v.reasons[0].contains("requires V(x)≤0"));
        // k1 = 0.8 >= 2/3
        assert_eq!(theorem4_case(&single(0.1), &attractive(2.0), 3).unwrap().case, None);
        let mixed = extract_h_constants(
            &Nonlinearity::new(vec![
                PowerTerm { coeff: 1.0, exponent: 0.3 },
                PowerTerm { coeff: 1.0, exponent: 0.7 },
            ])
            .unwrap(),
        );
        assert_eq!(theorem4_case(&mixed, &attractive(2.0), 3).unwrap().case, None);
    }

    #[test]
    fn blowup_bound_examples() {
        assert_eq!(blowup_time_bound(4.0, 1.0).unwrap(), 1.0);
        assert!(matches!(blowup_time_bound(4.0, 0.0), Err(Error::Hypothesis(_))));
        // chirped Gaussian: y(0) = 2 beta J(0)
        let j0 = 3.7;
        assert_relative_eq!(blowup_time_bound(j0, 2.0 * 0.25 * j0).unwrap(), 0.5);
    }

    #[test]
    fn proposition31_examples() {
        let v = proposition31_verdict(0.0, 0.5, 2.5, 3).unwrap();
        assert_eq!(v.outcome, Prop31Outcome::BlowupCapable);
        assert!(v.side_conditions.iter().any(|c| c.contains("E(u0) < 0")));
        let v = proposition31_verdict(1.0, 0.6, 2.0, 3).unwrap();
        assert_relative_eq!(v.threshold_m.unwrap(), 2.6, max_relative = 1e-12);
        assert_eq!(v.outcome, Prop31Outcome::Global);
        let v = proposition31_verdict(1.0, 0.9, 2.0, 3).unwrap();
        assert_relative_eq!(v.threshold_m.unwrap(), 3.0 * 4.4 / 5.4, max_relative = 1e-12);
        assert_eq!(v.outcome, Prop31Outcome::Global);
        assert_eq!(v.describe(), "global per Prop. 3.1(iii)");
        assert_eq!(
            proposition31_verdict(1.0, 0.9, 2.5, 3).unwrap().outcome,
            Prop31Outcome::Indeterminate
        );
        assert_eq!(
            proposition31_verdict(1.0, 0.4, 1.9, 3).unwrap().outcome,
            Prop31Outcome::Global
        );
    }

    #[test]
    fn h_constants_examples() {
        let h = single(0.7);
        assert_relative_eq!(h.k, -0.3, max_relative = 1e-15);
        assert_eq!(h.alpha, 0.7);
        assert_eq!(h.bracket_sign, BracketSign::Nonneg);
        assert_eq!(single(0.3).bracket_sign, BracketSign::Nonpos);
        let two = extract_h_constants(
            &Nonlinearity::new(vec![
                PowerTerm { coeff: 1.0, exponent: 0.3 },
                PowerTerm { coeff: 1.0, exponent: 0.4 },
            ])
            .unwrap(),
        );
        assert_relative_eq!(two.k1.unwrap(), 0.4, max_relative = 1e-15);
        let zero = extract_h_constants(&Nonlinearity::zero());
        assert_eq!((zero.k, zero.alpha, zero.a), (-0.5, 0.5, 1.0));
    }

    #[test]
    fn growth_constant_is_valid() {
        for (b, alpha) in [(1.0, 0.7), (0.1, 1.5), (3.0, 0.3)] {
            let h = Nonlinearity::power(b, alpha).unwrap();
            let c = extract_h_constants(&h);
            for i in 0..=500 {
                let s = 10f64.powf(6.0 * i as f64 / 500.0 + 0.0007);
                let lhs = s.sqrt().max(s.powf(c.alpha));
                assert!(lhs <= c.a * (h.value(s) + s.sqrt()));
            }
        }
    }

    #[test]
    fn spacetime_examples() {
        assert!(spacetime_exponent_check(2.0, 2.0, 2.0, 1.5, 1.5, 2.0, 3).is_err());
        assert_relative_eq!(spacetime_q_threshold(1.5, 4.0, 2.0, 3), 4.0 / 3.0, max_relative = 1e-14);
        assert!(spacetime_exponent_check(2.0, 2.0, 4.0, 1.5, 1.5, 2.0, 3).unwrap());
        assert!(!spacetime_exponent_check(1.2, 2.0, 4.0, 1.5, 1.5, 2.0, 3).unwrap());
        let h = Nonlinearity::new(vec![
            PowerTerm { coeff: 1.0, exponent: 0.6 },
            PowerTerm { coeff: 1.0, exponent: 0.8 },
        ])
        .unwrap();
        let (m1, m2) = spacetime_m_exponents(&h, 3.0, 3).unwrap();
        assert_relative_eq!(m1, 1.2, max_relative = 1e-14);
        assert_relative_eq!(m2, 1.6, max_relative = 1e-14);
    }

    #[test]
    fn classify_summaries() {
        let run = |h: Nonlinearity, v: Potential| {
            classify(&ClassifyInput {
                dim: 3,
                h,
                v,
                q: None,
                v1_norm: None,
                initial: None,
            })
            .unwrap()
        };
        let r = run(Nonlinearity::power(1.0, 0.5).unwrap(), repulsive(1.5));
        assert!(r.summary().starts_with("S(I); Theorem 2 case (i)"));
        let r = run(Nonlinearity::zero(), repulsive(2.0));
        assert!(r
            .summary()
            .starts_with("borderline; Theorem 1 applicable given E(u0)<0, y(0)>0"));
        let r = run(Nonlinearity::power(1.0, 0.9).unwrap(), repulsive(2.0));
        assert!(r.summary().contains("global per Prop. 3.1(iii)"));
        let kv = r.to_key_values();
        for key in ["q_c=", "q_sup_of_V=", "set_membership=S(I)", "thm2_case=iv", "predicted_l="] {
            assert!(kv.contains(key), "{key} missing in\n{kv}");
        }
    }
}
