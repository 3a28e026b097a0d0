//! The three single-atom bath families, their Lindblad channels and the
//! closed-form susceptibility and critical coupling for each.
//!
//! Closed forms use the transverse damping rates `(γ_x, γ_y)` of `σ^x` and
//! `σ^y` under the adjoint dissipator. A single spin then has static
//! susceptibility
//!
//! ```text
//! χ(0) = 4 ⟨σ^z⟩ ω_z / (ω_z² + γ_x γ_y)
//! ```
//!
//! For dephasing and thermal baths `γ_x = γ_y`. For `L = σ⁻ + tσ⁺` the rates
//! are `γ_t(1−t)²` and `γ_t(1+t)²`, so `γ_x γ_y = γ_t²(1−t²)²`;
//! [`Mode::PaperLiteral`] instead evaluates the published expression with
//! `γ_t²(1−t)²` in the denominator.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::critical::{solve_gc, CriticalResult, NoTransitionReason};
use crate::lindblad::SpinModel;
use crate::qops::{pauli, Axis, LindbladChannel};
use crate::response::TransverseResponse;
use crate::{Error, Result, C64};

/// Single-atom bath.
#[derive(Debug, Clone, PartialEq)]
pub enum BathSpec {
    /// `L = σ^z` at rate `gamma_phi`; `⟨σ^z⟩ = sz` is conserved.
    Dephasing { gamma_phi: f64, sz: f64 },
    /// `σ⁻` at `(1+n_T)γ_T` and `σ⁺` at `n_T γ_T`, `n_T = 1/(e^{ω_z/T} − 1)`.
    Thermal { gamma_t: f64, temperature: f64 },
    /// `L = σ⁻ + tσ⁺` at rate `gamma_t`, `t ∈ [0, 1]`.
    Generalized { gamma_t: f64, t: f64 },
    Custom { channels: Vec<LindbladChannel> },
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

impl BathSpec {
    pub fn dephasing(gamma_phi: f64, sz: f64) -> Result<Self> {
        let b = BathSpec::Dephasing { gamma_phi, sz };
        b.validate()?;
        Ok(b)
    }

    pub fn thermal(gamma_t: f64, temperature: f64) -> Result<Self> {
        let b = BathSpec::Thermal { gamma_t, temperature };
        b.validate()?;
        Ok(b)
    }

    pub fn generalized(gamma_t: f64, t: f64) -> Result<Self> {
        let b = BathSpec::Generalized { gamma_t, t };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BathSpec::Dephasing { gamma_phi, sz } => {
                if !(gamma_phi.is_finite() && gamma_phi >= 0.0) {
                    return Err(invalid("gamma", format!("{gamma_phi} must be >= 0")));
                }
                if !(-0.5..=0.5).contains(&sz) {
                    return Err(invalid("sz", format!("{sz} outside [-1/2, 1/2]")));
                }
            }
            BathSpec::Thermal { gamma_t, temperature } => {
                if !(gamma_t.is_finite() && gamma_t >= 0.0) {
                    return Err(invalid("gamma", format!("{gamma_t} must be >= 0")));
                }
                if !(temperature.is_finite() && temperature >= 0.0) {
                    return Err(invalid("T", format!("{temperature} must be >= 0")));
                }
            }
            BathSpec::Generalized { gamma_t, t } => {
                if !(gamma_t.is_finite() && gamma_t >= 0.0) {
                    return Err(invalid("gamma", format!("{gamma_t} must be >= 0")));
                }
                if !(0.0..=1.0).contains(&t) {
                    return Err(invalid("t", format!("{t} outside [0, 1]")));
                }
            }
            BathSpec::Custom { ref channels } => {
                for ch in channels {
                    if !(ch.rate.is_finite() && ch.rate >= 0.0) {
                        return Err(Error::InvalidRate(ch.rate));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            BathSpec::Dephasing { .. } => "dephasing",
            BathSpec::Thermal { .. } => "thermal",
            BathSpec::Generalized { .. } => "generalized",
            BathSpec::Custom { .. } => "custom",
        }
    }
}

impl fmt::Display for BathSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BathSpec::Dephasing { gamma_phi, sz } => write!(f, "dephasing(gamma={gamma_phi}, sz={sz})"),
            BathSpec::Thermal { gamma_t, temperature } => write!(f, "thermal(gamma={gamma_t}, T={temperature})"),
            BathSpec::Generalized { gamma_t, t } => write!(f, "generalized(gamma={gamma_t}, t={t})"),
            BathSpec::Custom { channels } => write!(f, "custom({} channels)", channels.len()),
        }
    }
}

/// Syntax or range error in a textual bath specification. `column` is 1-based.
#[derive(Debug, Clone, PartialEq, ThisError)]
#[error("column {column}: {message}")]
pub struct BathParseError {
    pub column: usize,
    pub message: String,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> BathParseError {
        BathParseError { column: self.src[..self.pos].chars().count() + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, want: char) -> std::result::Result<(), BathParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => Err(self.err(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.err(format!("expected `{want}`, found end of input"))),
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn ident(&mut self) -> std::result::Result<&'a str, BathParseError> {
        self.skip_ws();
        let id = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
        if id.is_empty() {
            return Err(self.err("expected a name"));
        }
        Ok(id)
    }

    fn number(&mut self) -> std::result::Result<f64, BathParseError> {
        self.skip_ws();
        let start = self.pos;
        let text = self.take_while(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
        let v: f64 = text.parse().map_err(|_| BathParseError {
            column: self.src[..start].chars().count() + 1,
            message: format!("invalid number `{text}`"),
        })?;
        if !v.is_finite() {
            return Err(self.err("number is not finite"));
        }
        Ok(v)
    }
}

impl FromStr for BathSpec {
    type Err = BathParseError;

    /// Parses `name(key=value, ...)` with names `dephasing` (keys `gamma`,
    /// `sz`), `thermal` (`gamma`, `T`) and `generalized` (`gamma`, `t`).
    fn from_str(s: &str) -> std::result::Result<Self, BathParseError> {
        let mut cur = Cursor { src: s, pos: 0 };
        let name_col = {
            cur.skip_ws();
            cur.pos
        };
        let name = cur.ident()?;
        let keys: &[&str] = match name {
            "dephasing" => &["gamma", "sz"],
            "thermal" => &["gamma", "T"],
            "generalized" => &["gamma", "t"],
            other => {
                return Err(BathParseError {
                    column: s[..name_col].chars().count() + 1,
                    message: format!("unknown bath `{other}` (expected dephasing, thermal or generalized)"),
                })
            }
        };
        cur.expect('(')?;
        let mut values: Vec<Option<f64>> = vec![None; keys.len()];
        cur.skip_ws();
        if cur.peek() != Some(')') {
            loop {
                cur.skip_ws();
                let key_pos = cur.pos;
                let key = cur.ident()?;
                let Some(idx) = keys.iter().position(|k| *k == key) else {
                    cur.pos = key_pos;
                    return Err(cur.err(format!("unknown key `{key}` for {name} (expected {})", keys.join(", "))));
                };
                if values[idx].is_some() {
                    cur.pos = key_pos;
                    return Err(cur.err(format!("duplicate key `{key}`")));
                }
                cur.expect('=')?;
                values[idx] = Some(cur.number()?);
                cur.skip_ws();
                match cur.peek() {
                    Some(',') => cur.pos += 1,
                    Some(')') => break,
                    Some(c) => return Err(cur.err(format!("expected `,` or `)`, found `{c}`"))),
                    None => return Err(cur.err("unterminated argument list")),
                }
            }
        }
        cur.expect(')')?;
        cur.skip_ws();
        if cur.pos != s.len() {
            return Err(cur.err("trailing characters after bath specification"));
        }
        let missing: Vec<&str> =
            keys.iter().zip(&values).filter(|(_, v)| v.is_none()).map(|(k, _)| *k).collect();
        if !missing.is_empty() {
            return Err(cur.err(format!("missing key(s): {}", missing.join(", "))));
        }
        let (a, b) = (values[0].unwrap_or_default(), values[1].unwrap_or_default());
        let bath = match name {
            "dephasing" => BathSpec::Dephasing { gamma_phi: a, sz: b },
            "thermal" => BathSpec::Thermal { gamma_t: a, temperature: b },
            _ => BathSpec::Generalized { gamma_t: a, t: b },
        };
        bath.validate().map_err(|e| BathParseError { column: 1, message: e.to_string() })?;
        Ok(bath)
    }
}

/// Cavity detuning and decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub omega0: f64,
    pub kappa: f64,
}

impl CavityParams {
    pub fn new(omega0: f64, kappa: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(invalid("omega0", format!("{omega0} must be > 0")));
        }
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(invalid("kappa", format!("{kappa} must be >= 0")));
        }
        Ok(Self { omega0, kappa })
    }

    /// `(ω0² + κ²)/ω0`.
    pub fn weight(&self) -> f64 {
        (self.omega0 * self.omega0 + self.kappa * self.kappa) / self.omega0
    }
}

/// Which closed-form expression to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// The published expressions as printed.
    PaperLiteral,
    /// Polarization and transverse rates from the bath's own master equation;
    /// agrees with the numerical pipeline and both oracles.
    #[default]
    SelfConsistent,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-literal" => Ok(Mode::PaperLiteral),
            "self-consistent" => Ok(Mode::SelfConsistent),
            _ => Err(invalid("mode", format!("`{s}` (expected paper-literal or self-consistent)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::PaperLiteral => "paper-literal",
            Mode::SelfConsistent => "self-consistent",
        })
    }
}

/// Bose occupation `1/(e^{ω_z/T} − 1)`; zero at `T = 0`.
pub fn thermal_occupation(omega_z: f64, temperature: f64) -> Result<f64> {
    if temperature == 0.0 {
        return Ok(0.0);
    }
    if omega_z.is_nan() || omega_z <= 0.0 {
        return Err(invalid("omega_z", "thermal bath requires omega_z > 0"));
    }
    Ok(1.0 / (omega_z / temperature).exp_m1())
}

/// `tanh(ω_z / 2T)`, equal to `1/(1 + 2n_T)`.
fn thermal_tanh(omega_z: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        1.0
    } else {
        (omega_z / (2.0 * temperature)).tanh()
    }
}

pub fn channels_of(bath: &BathSpec, omega_z: f64) -> Result<Vec<LindbladChannel>> {
    bath.validate()?;
    let ch = |op, rate| LindbladChannel::new(op, rate);
    match *bath {
        BathSpec::Dephasing { gamma_phi, .. } => Ok(vec![ch(pauli(Axis::Z), gamma_phi)?]),
        BathSpec::Thermal { gamma_t, temperature } => {
            let n = thermal_occupation(omega_z, temperature)?;
            Ok(vec![ch(pauli(Axis::Minus), (1.0 + n) * gamma_t)?, ch(pauli(Axis::Plus), n * gamma_t)?])
        }
        BathSpec::Generalized { gamma_t, t } => {
            let l = &pauli(Axis::Minus) + &pauli(Axis::Plus).scale(C64::new(t, 0.0));
            Ok(vec![ch(l, gamma_t)?])
        }
        BathSpec::Custom { ref channels } => Ok(channels.clone()),
    }
}

/// Single-atom model for this bath. Dephasing supplies its conserved `⟨σ^z⟩`.
pub fn spin_model(bath: &BathSpec, omega_z: f64) -> Result<SpinModel> {
    let channels = channels_of(bath, omega_z)?;
    let initial = match *bath {
        BathSpec::Dephasing { sz, .. } => Some(sz),
        BathSpec::Thermal { gamma_t, .. } | BathSpec::Generalized { gamma_t, .. } if gamma_t == 0.0 => {
            Some(steady_sz(bath, omega_z)?)
        }
        _ => None,
    };
    SpinModel::new(omega_z, channels, initial)
}

/// Damping rates `(γ_x, γ_y)` of `σ^x` and `σ^y` under the adjoint dissipator.
pub fn transverse_rates(bath: &BathSpec, omega_z: f64) -> Result<(f64, f64)> {
    bath.validate()?;
    match *bath {
        BathSpec::Dephasing { gamma_phi, .. } => Ok((gamma_phi, gamma_phi)),
        BathSpec::Thermal { gamma_t, temperature } => {
            let n = thermal_occupation(omega_z, temperature)?;
            let g = (1.0 + 2.0 * n) * gamma_t;
            Ok((g, g))
        }
        BathSpec::Generalized { gamma_t, t } => {
            Ok((gamma_t * (1.0 - t) * (1.0 - t), gamma_t * (1.0 + t) * (1.0 + t)))
        }
        BathSpec::Custom { .. } => Err(Error::NoClosedForm("custom bath".into())),
    }
}

/// Rate entering the static susceptibility, `√(γ_x γ_y)`.
pub fn effective_rate(bath: &BathSpec, omega_z: f64) -> Result<f64> {
    let (gx, gy) = transverse_rates(bath, omega_z)?;
    Ok((gx * gy).sqrt())
}

/// Steady-state `⟨σ^z⟩` (negative for decay towards spin down).
pub fn steady_sz(bath: &BathSpec, omega_z: f64) -> Result<f64> {
    bath.validate()?;
    match *bath {
        BathSpec::Dephasing { sz, .. } => Ok(sz),
        BathSpec::Thermal { temperature, .. } => {
            if temperature > 0.0 && (omega_z.is_nan() || omega_z <= 0.0) {
                return Err(invalid("omega_z", "thermal bath requires omega_z > 0"));
            }
            Ok(-0.5 * thermal_tanh(omega_z, temperature))
        }
        BathSpec::Generalized { t, .. } => Ok(-0.5 * (1.0 - t * t) / (1.0 + t * t)),
        BathSpec::Custom { .. } => Err(Error::NoClosedForm("custom bath".into())),
    }
}

/// Closed-form `χ(ω)` of one spin in this bath.
pub fn closed_form_response(bath: &BathSpec, omega_z: f64) -> Result<TransverseResponse> {
    let (rate_x, rate_y) = transverse_rates(bath, omega_z)?;
    Ok(TransverseResponse { sz: steady_sz(bath, omega_z)?, omega_z, rate_x, rate_y })
}

/// Closed-form `χ(0) = Σ_a^R(0)/g²`.
pub fn closed_form_chi0(bath: &BathSpec, omega_z: f64, mode: Mode) -> Result<f64> {
    let sz = steady_sz(bath, omega_z)?;
    let (gx, gy) = transverse_rates(bath, omega_z)?;
    let denom_rate = match (mode, bath) {
        (Mode::PaperLiteral, &BathSpec::Generalized { gamma_t, t }) => (gamma_t * (1.0 - t)).powi(2),
        _ => gx * gy,
    };
    Ok(4.0 * sz * omega_z / (omega_z * omega_z + denom_rate))
}

fn no_transition(sz: f64, omega_z: f64) -> CriticalResult {
    let reason = if sz * omega_z == 0.0 {
        NoTransitionReason::Unpolarized
    } else {
        NoTransitionReason::WrongSign
    };
    CriticalResult::NoTransition { reason }
}

/// Closed-form critical coupling.
pub fn closed_form_gc(bath: &BathSpec, omega_z: f64, cavity: &CavityParams, mode: Mode) -> Result<CriticalResult> {
    let sz = steady_sz(bath, omega_z)?;
    if sz * omega_z >= 0.0 {
        return Ok(no_transition(sz, omega_z));
    }
    let w = cavity.weight();
    match (mode, bath) {
        (Mode::SelfConsistent, _) => Ok(solve_gc(closed_form_chi0(bath, omega_z, mode)?, cavity)),
        (Mode::PaperLiteral, &BathSpec::Dephasing { gamma_phi, sz }) => {
            let v = (omega_z * omega_z + gamma_phi * gamma_phi) / (-2.0 * sz * omega_z) * w;
            Ok(CriticalResult::Transition { g_c: 0.5 * v.sqrt() })
        }
        (Mode::PaperLiteral, &BathSpec::Thermal { gamma_t, temperature }) => {
            let th = thermal_tanh(omega_z, temperature);
            let v = (omega_z * omega_z * th * th + gamma_t * gamma_t) / (omega_z * th.powi(3)) * w;
            Ok(CriticalResult::Transition { g_c: 0.5 * v.sqrt() })
        }
        (Mode::PaperLiteral, &BathSpec::Generalized { gamma_t, t }) => {
            let num = (1.0 + t * t) * (omega_z * omega_z + gamma_t * gamma_t * (1.0 - t).powi(2));
            let v = num / ((1.0 - t * t) * omega_z) * w;
            Ok(CriticalResult::Transition { g_c: 0.5 * v.sqrt() })
        }
        (Mode::PaperLiteral, BathSpec::Custom { .. }) => Err(Error::NoClosedForm("custom bath".into())),
    }
}
