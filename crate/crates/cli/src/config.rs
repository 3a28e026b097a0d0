//! Run configuration: a line-oriented `key = value` file overlaid by flags.

use std::path::PathBuf;
use std::str::FromStr;

use dicke_critic::critical::Param;
use dicke_critic::{BathSpec, CavityParams, Mode};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (expected csv or json)")),
        }
    }
}

/// Source of the static susceptibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Quadrature of the propagated correlator.
    Numeric,
    ClosedForm,
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "numeric" => Ok(Method::Numeric),
            "closed-form" => Ok(Method::ClosedForm),
            _ => Err(format!("unknown method `{s}` (expected numeric or closed-form)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bath: Option<BathSpec>,
    pub omega_z: f64,
    pub omega0: f64,
    pub kappa: f64,
    pub mode: Mode,
    /// `None` until chosen; see [`RunConfig::method`].
    pub method: Option<Method>,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub raw_units: bool,
    pub axes: Vec<(Param, Vec<f64>)>,
    pub g: f64,
    pub tmax: Option<f64>,
    pub dt: Option<f64>,
    pub omegas: Option<Vec<f64>>,
    pub atoms: usize,
    pub cutoff: usize,
    pub g_grid: Option<Vec<f64>>,
    pub duration: f64,
    /// Initial cavity amplitude of a mean-field trajectory.
    pub alpha0: f64,
    pub oracle_meanfield: bool,
    pub oracle_quadrature: bool,
    pub oracle_suite: bool,
    /// Relative bisection width of the mean-field threshold.
    pub tol: f64,
    /// Largest relative oracle deviation accepted.
    pub oracle_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            bath: None,
            omega_z: 1.0,
            omega0: 1.0,
            kappa: 0.0,
            mode: Mode::SelfConsistent,
            method: None,
            format: Format::Csv,
            output: None,
            raw_units: false,
            axes: Vec::new(),
            g: 0.0,
            tmax: None,
            dt: None,
            omegas: None,
            atoms: 2,
            cutoff: 8,
            g_grid: None,
            duration: 100.0,
            alpha0: 1e-3,
            oracle_meanfield: true,
            oracle_quadrature: true,
            oracle_suite: false,
            tol: 1e-10,
            oracle_threshold: 1e-5,
        }
    }
}

impl RunConfig {
    pub fn cavity(&self) -> Result<CavityParams, CliError> {
        Ok(CavityParams::new(self.omega0, self.kappa)?)
    }

    pub fn bath(&self) -> Result<&BathSpec, CliError> {
        self.bath.as_ref().ok_or_else(|| CliError::Usage("no bath given (use --bath or `bath = ...`)".into()))
    }

    /// Numeric unless the paper-literal closed form was requested.
    pub fn method(&self) -> Result<Method, CliError> {
        match (self.method, self.mode) {
            (Some(Method::Numeric), Mode::PaperLiteral) => {
                Err(CliError::Usage("mode paper-literal requires method closed-form".into()))
            }
            (Some(m), _) => Ok(m),
            (None, Mode::PaperLiteral) => Ok(Method::ClosedForm),
            (None, Mode::SelfConsistent) => Ok(Method::Numeric),
        }
    }

    /// Frequency unit of the output: `ω_z`, or 1 with raw units.
    pub fn unit(&self, omega_z: f64) -> Result<f64, CliError> {
        if self.raw_units {
            return Ok(1.0);
        }
        if !(omega_z.is_finite() && omega_z != 0.0) {
            return Err(CliError::Usage(format!(
                "cannot report in units of omega_z = {omega_z}; pass --raw-units"
            )));
        }
        Ok(omega_z.abs())
    }

    /// Applies one `key = value` setting. Errors carry the column of the
    /// offending character within `value` (1-based).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), (usize, String)> {
        let num = |v: &str| -> Result<f64, (usize, String)> {
            let x: f64 = v.parse().map_err(|_| (1, format!("`{v}` is not a number")))?;
            if !x.is_finite() {
                return Err((1, format!("`{v}` is not finite")));
            }
            Ok(x)
        };
        let count = |v: &str| -> Result<usize, (usize, String)> {
            v.parse().map_err(|_| (1, format!("`{v}` is not a non-negative integer")))
        };
        let flag = |v: &str| -> Result<bool, (usize, String)> {
            match v {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err((1, format!("`{v}` is not a boolean"))),
            }
        };
        match key {
            "bath" => self.bath = Some(value.parse::<BathSpec>().map_err(|e| (e.column, e.message))?),
            "omega_z" => self.omega_z = num(value)?,
            "omega0" => self.omega0 = num(value)?,
            "kappa" => self.kappa = num(value)?,
            "mode" => self.mode = value.parse().map_err(|e: dicke_critic::Error| (1, e.to_string()))?,
            "method" => self.method = Some(value.parse().map_err(|e| (1, e))?),
            "format" => self.format = value.parse().map_err(|e| (1, e))?,
            "output" => self.output = Some(PathBuf::from(value)),
            "raw_units" => self.raw_units = flag(value)?,
            "sweep_axis" => self.set_axis(0, value)?,
            "grid" => self.set_grid(0, value)?,
            "sweep_axis2" => self.set_axis(1, value)?,
            "grid2" => self.set_grid(1, value)?,
            "g" => self.g = num(value)?,
            "tmax" => self.tmax = Some(num(value)?),
            "dt" => self.dt = Some(num(value)?),
            "omegas" => self.omegas = Some(parse_grid(value)?),
            "atoms" => self.atoms = count(value)?,
            "cutoff" => self.cutoff = count(value)?,
            "g_grid" => self.g_grid = Some(parse_grid(value)?),
            "duration" => self.duration = num(value)?,
            "alpha0" => self.alpha0 = num(value)?,
            "oracle_meanfield" => self.oracle_meanfield = flag(value)?,
            "oracle_quadrature" => self.oracle_quadrature = flag(value)?,
            "oracle_suite" => self.oracle_suite = flag(value)?,
            "tol" => self.tol = num(value)?,
            "oracle_threshold" => self.oracle_threshold = num(value)?,
            _ => return Err((0, format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    fn axis_slot(&mut self, i: usize) -> Result<&mut (Param, Vec<f64>), (usize, String)> {
        while self.axes.len() <= i {
            if self.axes.len() < i {
                return Err((1, "second sweep axis given before the first".into()));
            }
            self.axes.push((Param::OmegaZ, Vec::new()));
        }
        Ok(&mut self.axes[i])
    }

    fn set_axis(&mut self, i: usize, value: &str) -> Result<(), (usize, String)> {
        let p: Param = value.parse().map_err(|e: dicke_critic::Error| (1, e.to_string()))?;
        self.axis_slot(i)?.0 = p;
        Ok(())
    }

    fn set_grid(&mut self, i: usize, value: &str) -> Result<(), (usize, String)> {
        let g = parse_grid(value)?;
        self.axis_slot(i)?.1 = g;
        Ok(())
    }

    /// Reads a config file's settings into `self`.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = match raw.find('#') {
                Some(k) => &raw[..k],
                None => raw,
            };
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                let col = raw.len() - raw.trim_start().len() + 1;
                return Err(CliError::Config { line, column: col, message: "expected `key = value`".into() });
            };
            let key = content[..eq].trim();
            let key_col = raw.len() - raw.trim_start().len() + 1;
            let rest = &content[eq + 1..];
            let value = rest.trim();
            let value_col = eq + 2 + (rest.len() - rest.trim_start().len());
            self.set(key, value).map_err(|(c, message)| CliError::Config {
                line,
                column: if c == 0 { key_col } else { value_col + c - 1 },
                message,
            })?;
        }
        Ok(())
    }

    pub fn validate_sweep(&self) -> Result<(), CliError> {
        if self.axes.is_empty() {
            return Err(CliError::Usage("no sweep axis given".into()));
        }
        for (p, g) in &self.axes {
            if g.is_empty() {
                return Err(CliError::Usage(format!("empty grid for sweep axis `{p}`")));
            }
        }
        Ok(())
    }
}

/// `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, (usize, String)> {
    let s = s.trim();
    if s.is_empty() {
        return Err((1, "empty grid".into()));
    }
    let number = |t: &str, col: usize| -> Result<f64, (usize, String)> {
        let x: f64 = t.trim().parse().map_err(|_| (col, format!("`{}` is not a number", t.trim())))?;
        if !x.is_finite() {
            return Err((col, format!("`{}` is not finite", t.trim())));
        }
        Ok(x)
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err((1, "range grid must be start:step:stop".into()));
        }
        let c1 = parts[0].len() + 2;
        let c2 = c1 + parts[1].len() + 1;
        let (a, h, b) = (number(parts[0], 1)?, number(parts[1], c1)?, number(parts[2], c2)?);
        if h <= 0.0 || b < a {
            return Err((c1, "range needs step > 0 and stop >= start".into()));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize + 1;
        if n > 1_000_000 {
            return Err((c1, format!("{n} grid points exceed the limit")));
        }
        return Ok((0..n).map(|k| a + k as f64 * h).collect());
    }
    let mut out = Vec::new();
    let mut col = 1;
    for t in s.split(',') {
        out.push(number(t, col)?);
        col += t.len() + 1;
    }
    Ok(out)
}
