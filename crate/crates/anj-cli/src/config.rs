//! Experiment configuration: flat `key = value` text files, `--set`
//! overrides, sweep declarations, and the translation into the library's
//! parameter structures.
//!
//! Powers may be given in dBm (`p_s_dbm = 20`) or watts (`p_s_w = 0.1`);
//! everything is converted to linear units once, here, and all downstream
//! math sees watts and joules only.

use anj::channels::{db_to_linear, dbm_to_watts, omegas_from_topology, SystemParams, Topology};
use anj::energy_chain::EnergyStorageSpec;
use anj::error::{Error, Result};

/// Sweepable configuration axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    PsDbm,
    PjDbm,
    Rho,
    NtSplit,
    Rs,
    Levels,
    C1,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::PsDbm => "p_s_dbm",
            SweepAxis::PjDbm => "p_j_dbm",
            SweepAxis::Rho => "rho",
            SweepAxis::NtSplit => "n_t_split",
            SweepAxis::Rs => "rs",
            SweepAxis::Levels => "L",
            SweepAxis::C1 => "c1",
        }
    }

    fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "p_s_dbm" => SweepAxis::PsDbm,
            "p_j_dbm" => SweepAxis::PjDbm,
            "rho" => SweepAxis::Rho,
            "n_t_split" => SweepAxis::NtSplit,
            "rs" => SweepAxis::Rs,
            "L" => SweepAxis::Levels,
            "c1" => SweepAxis::C1,
            other => {
                return Err(Error::Usage(format!(
                    "unknown sweep axis '{other}' (expected one of p_s_dbm, p_j_dbm, rho, \
                     n_t_split, rs, L, c1)"
                )))
            }
        })
    }
}

/// One sweep point: a scalar for most axes, an antenna split for n_t_split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepValue {
    Scalar(f64),
    Split(u32, u32),
}

impl SweepValue {
    pub fn label(&self) -> String {
        match self {
            SweepValue::Scalar(v) => format!("{v}"),
            SweepValue::Split(t, r) => format!("{t}:{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<SweepValue>,
}

/// Fully-resolved experiment description, all values in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub p_s_w: f64,
    pub p_j_w: f64,
    pub p_c_w: f64,
    pub sigma2_d_w: f64,
    pub sigma2_e_w: f64,
    /// Channel-estimation error variance; defaults to the jammer-destination
    /// average gain when not set explicitly.
    pub sigma2_err: f64,
    pub rho: f64,
    pub r_s: f64,
    pub n_t: u32,
    pub n_r: u32,
    pub k_rician: f64,
    pub eta: f64,
    pub eta_prime: f64,
    pub d_sj: f64,
    pub d_se: f64,
    pub d_sd: f64,
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    pub levels: usize,
    pub blocks: u64,
    pub seed: u64,
    pub mc_enabled: bool,
    /// Jamming-power search grid in dBm: (start, stop, points).
    pub pj_grid_dbm: (f64, f64, usize),
    pub sweep: Option<Sweep>,
}

impl Default for ExperimentConfig {
    /// The reference scenario: source, jammer, eavesdropper and destination
    /// on a line at 0/5/20/30 m, path-loss exponent 3, -80 dBm noise,
    /// unit secrecy rate, K = 5 dB, eight jammer antennas split evenly,
    /// eta = 0.5, eta' = 0.9, C1 = 0.02 J, C2 = 0.01 J, L = 100 levels,
    /// 0.1 mW circuitry drain, P_S = 20 dBm, P_J = 0 dBm.
    fn default() -> Self {
        let sigma2_d = dbm_to_watts(-80.0);
        let mut cfg = Self {
            p_s_w: dbm_to_watts(20.0),
            p_j_w: dbm_to_watts(0.0),
            p_c_w: 1e-4,
            sigma2_d_w: sigma2_d,
            sigma2_e_w: sigma2_d,
            sigma2_err: f64::NAN,
            rho: 1.0,
            r_s: 1.0,
            n_t: 4,
            n_r: 4,
            k_rician: db_to_linear(5.0),
            eta: 0.5,
            eta_prime: 0.9,
            d_sj: 5.0,
            d_se: 20.0,
            d_sd: 30.0,
            alpha: 3.0,
            c1: 0.02,
            c2: 0.01,
            levels: 100,
            blocks: 1_000_000,
            seed: 1,
            mc_enabled: true,
            pj_grid_dbm: (-10.0, 20.0, 60),
            sweep: None,
        };
        cfg.sigma2_err = cfg.default_sigma2_err();
        cfg
    }
}

impl ExperimentConfig {
    fn default_sigma2_err(&self) -> f64 {
        let topo = Topology {
            d_sj: self.d_sj,
            d_se: self.d_se,
            d_sd: self.d_sd,
            alpha: self.alpha,
        };
        omegas_from_topology(&topo).jd
    }

    /// Parse a flat `key = value` file body on top of the defaults.
    pub fn from_ini(body: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut sigma2_err_explicit = false;
        let mut sigma2_e_explicit = false;
        for (lineno, raw) in body.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Usage(format!(
                    "line {}: expected 'key = value', got '{raw}'",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            cfg.apply(key, value)
                .map_err(|e| Error::Usage(format!("line {}: {e}", lineno + 1)))?;
            if key == "sigma2_err" {
                sigma2_err_explicit = true;
            }
            if key == "sigma2_e_dbm" || key == "sigma2_e_w" {
                sigma2_e_explicit = true;
            }
        }
        if !sigma2_err_explicit {
            cfg.sigma2_err = cfg.default_sigma2_err();
        }
        if !sigma2_e_explicit {
            cfg.sigma2_e_w = cfg.sigma2_d_w;
        }
        Ok(cfg)
    }

    /// Apply one `key = value` assignment (used by both files and --set).
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("'{value}' is not a number for key '{key}'")))
        };
        let int = || -> Result<u64> {
            value
                .parse::<u64>()
                .map_err(|_| Error::Usage(format!("'{value}' is not an integer for key '{key}'")))
        };
        match key {
            "p_s_dbm" => self.p_s_w = dbm_to_watts(num()?),
            "p_s_w" => self.p_s_w = num()?,
            "p_j_dbm" => self.p_j_w = dbm_to_watts(num()?),
            "p_j_w" => self.p_j_w = num()?,
            "p_c_dbm" => self.p_c_w = dbm_to_watts(num()?),
            "p_c_w" => self.p_c_w = num()?,
            "sigma2_d_dbm" => self.sigma2_d_w = dbm_to_watts(num()?),
            "sigma2_d_w" => self.sigma2_d_w = num()?,
            "sigma2_e_dbm" => self.sigma2_e_w = dbm_to_watts(num()?),
            "sigma2_e_w" => self.sigma2_e_w = num()?,
            "sigma2_err" => self.sigma2_err = num()?,
            "rho" => self.rho = num()?,
            "rs" | "r_s" => self.r_s = num()?,
            "n_t" => self.n_t = int()? as u32,
            "n_r" => self.n_r = int()? as u32,
            "k_rician_db" => self.k_rician = db_to_linear(num()?),
            "k_rician" => self.k_rician = num()?,
            "eta" => self.eta = num()?,
            "eta_prime" => self.eta_prime = num()?,
            "d_sj" => self.d_sj = num()?,
            "d_se" => self.d_se = num()?,
            "d_sd" => self.d_sd = num()?,
            "alpha" => self.alpha = num()?,
            "c1" => self.c1 = num()?,
            "c2" => self.c2 = num()?,
            "levels" | "L" => self.levels = int()? as usize,
            "blocks" => self.blocks = int()?,
            "seed" => self.seed = int()?,
            "mc_enabled" => {
                self.mc_enabled = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    other => {
                        return Err(Error::Usage(format!("'{other}' is not a boolean")));
                    }
                }
            }
            "pj_grid_dbm" => {
                let parts: Vec<&str> = value.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(Error::Usage("pj_grid_dbm wants 'start stop points'".into()));
                }
                let start: f64 = parts[0]
                    .parse()
                    .map_err(|_| Error::Usage(format!("bad grid start '{}'", parts[0])))?;
                let stop: f64 = parts[1]
                    .parse()
                    .map_err(|_| Error::Usage(format!("bad grid stop '{}'", parts[1])))?;
                let points: usize = parts[2]
                    .parse()
                    .map_err(|_| Error::Usage(format!("bad grid size '{}'", parts[2])))?;
                if points < 1 || stop <= start {
                    return Err(Error::Usage(
                        "grid needs stop > start and points >= 1".into(),
                    ));
                }
                self.pj_grid_dbm = (start, stop, points);
            }
            "sweep" => {
                let mut parts = value.split_whitespace();
                let axis = SweepAxis::parse(
                    parts
                        .next()
                        .ok_or_else(|| Error::Usage("sweep wants '<axis> v1 v2 ...'".into()))?,
                )?;
                let mut values = Vec::new();
                for tok in parts {
                    values.push(parse_sweep_value(axis, tok)?);
                }
                if values.is_empty() {
                    return Err(Error::Usage("sweep needs at least one value".into()));
                }
                self.sweep = Some(Sweep { axis, values });
            }
            other => return Err(Error::Usage(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Serialize every resolved field back to the flat format; parsing the
    /// result reproduces this configuration exactly.
    pub fn to_ini(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        let f = |v: f64| format!("{v:.16e}");
        kv("p_s_w", f(self.p_s_w));
        kv("p_j_w", f(self.p_j_w));
        kv("p_c_w", f(self.p_c_w));
        kv("sigma2_d_w", f(self.sigma2_d_w));
        kv("sigma2_e_w", f(self.sigma2_e_w));
        kv("sigma2_err", f(self.sigma2_err));
        kv("rho", f(self.rho));
        kv("rs", f(self.r_s));
        kv("n_t", format!("{}", self.n_t));
        kv("n_r", format!("{}", self.n_r));
        kv("k_rician", f(self.k_rician));
        kv("eta", f(self.eta));
        kv("eta_prime", f(self.eta_prime));
        kv("d_sj", f(self.d_sj));
        kv("d_se", f(self.d_se));
        kv("d_sd", f(self.d_sd));
        kv("alpha", f(self.alpha));
        kv("c1", f(self.c1));
        kv("c2", f(self.c2));
        kv("levels", format!("{}", self.levels));
        kv("blocks", format!("{}", self.blocks));
        kv("seed", format!("{}", self.seed));
        kv("mc_enabled", format!("{}", self.mc_enabled));
        kv(
            "pj_grid_dbm",
            format!(
                "{:.16e} {:.16e} {}",
                self.pj_grid_dbm.0, self.pj_grid_dbm.1, self.pj_grid_dbm.2
            ),
        );
        if let Some(sweep) = &self.sweep {
            let vals: Vec<String> = sweep
                .values
                .iter()
                .map(|v| match v {
                    SweepValue::Scalar(x) => format!("{x:.16e}"),
                    SweepValue::Split(t, r) => format!("{t}:{r}"),
                })
                .collect();
            kv("sweep", format!("{} {}", sweep.axis.name(), vals.join(" ")));
        }
        out
    }

    /// One-line summary used in CSV comment headers.
    pub fn echo(&self) -> String {
        self.to_ini().trim_end().replace('\n', "; ")
    }

    /// Substitute one sweep value into a copy of this configuration.
    pub fn at_sweep_point(&self, axis: SweepAxis, value: SweepValue) -> Result<Self> {
        let mut cfg = self.clone();
        match (axis, value) {
            (SweepAxis::PsDbm, SweepValue::Scalar(v)) => cfg.p_s_w = dbm_to_watts(v),
            (SweepAxis::PjDbm, SweepValue::Scalar(v)) => cfg.p_j_w = dbm_to_watts(v),
            (SweepAxis::Rho, SweepValue::Scalar(v)) => cfg.rho = v,
            (SweepAxis::Rs, SweepValue::Scalar(v)) => cfg.r_s = v,
            (SweepAxis::Levels, SweepValue::Scalar(v)) => cfg.levels = v as usize,
            (SweepAxis::C1, SweepValue::Scalar(v)) => cfg.c1 = v,
            (SweepAxis::NtSplit, SweepValue::Split(t, r)) => {
                cfg.n_t = t;
                cfg.n_r = r;
            }
            (axis, value) => {
                return Err(Error::Usage(format!(
                    "sweep value {value:?} does not fit axis {}",
                    axis.name()
                )))
            }
        }
        Ok(cfg)
    }

    /// The sweep as a list of (label, resolved configuration); a single
    /// pseudo-point when no sweep is declared.
    pub fn sweep_points(&self) -> Result<Vec<(String, String, ExperimentConfig)>> {
        match &self.sweep {
            None => Ok(vec![("none".into(), String::new(), self.clone())]),
            Some(sweep) => sweep
                .values
                .iter()
                .map(|&v| {
                    Ok((
                        sweep.axis.name().to_string(),
                        v.label(),
                        self.at_sweep_point(sweep.axis, v)?,
                    ))
                })
                .collect(),
        }
    }

    /// Build the validated parameter set and storage description.
    pub fn to_model(&self) -> Result<(SystemParams, EnergyStorageSpec)> {
        let topo = Topology::new(self.d_sj, self.d_se, self.d_sd, self.alpha)?;
        let om = omegas_from_topology(&topo);
        let params = SystemParams {
            p_s: self.p_s_w,
            p_j: self.p_j_w,
            p_c: self.p_c_w,
            sigma2_d: self.sigma2_d_w,
            sigma2_e: self.sigma2_e_w,
            sigma2_err: self.sigma2_err,
            rho: self.rho,
            r_s: self.r_s,
            n_j: self.n_t + self.n_r,
            n_t: self.n_t,
            n_r: self.n_r,
            k_rician: self.k_rician,
            omega_sj: om.sj,
            omega_sd: om.sd,
            omega_se: om.se,
            omega_jd: om.jd,
            omega_je: om.je,
            eta: self.eta,
            eta_prime: self.eta_prime,
        };
        params.validate()?;
        let storage = EnergyStorageSpec::for_params(self.c1, self.c2, self.levels, &params)?;
        if storage.is_degenerate_tau() {
            eprintln!(
                "warning: threshold occupies the whole store (tau = L = {}); \
                 jamming can only fire from a full battery",
                self.levels
            );
        }
        Ok((params, storage))
    }

    /// The jamming-power candidate grid in watts (uniform in dBm).
    pub fn pj_grid_watts(&self) -> Vec<f64> {
        let (start, stop, n) = self.pj_grid_dbm;
        if n == 1 {
            return vec![dbm_to_watts(start)];
        }
        (0..n)
            .map(|i| dbm_to_watts(start + (stop - start) * i as f64 / (n - 1) as f64))
            .collect()
    }
}

fn parse_sweep_value(axis: SweepAxis, tok: &str) -> Result<SweepValue> {
    if axis == SweepAxis::NtSplit {
        let (t, r) = tok.split_once(':').ok_or_else(|| {
            Error::Usage(format!("n_t_split values look like '4:4', got '{tok}'"))
        })?;
        let t: u32 = t
            .parse()
            .map_err(|_| Error::Usage(format!("bad antenna count '{t}'")))?;
        let r: u32 = r
            .parse()
            .map_err(|_| Error::Usage(format!("bad antenna count '{r}'")))?;
        Ok(SweepValue::Split(t, r))
    } else {
        tok.parse::<f64>()
            .map(SweepValue::Scalar)
            .map_err(|_| Error::Usage(format!("bad sweep value '{tok}'")))
    }
}
