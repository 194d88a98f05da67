//! Forcing generator strings: `name` or `name:key=value;key=value`.
//!
//! ```text
//! single-mode:k=1;m=1,0,0;amp=0,1,0[;amp_im=0,0,0]
//! gradient:k=0;m=1,2,0;phi=1
//! ensemble[:member=0]
//! swirl[:sigma=0.6]
//! localized[:sigma=0.6;degree=2;seed=7]
//! zero
//! ```
//! `swirl` and `localized` accept `modes=1,2` for time-periodic forcings; each mode of
//! a `localized` forcing gets its own seed.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use strot_core::Complex64;
use strot_core::field::{BoxSpectrum, ModeSeries, PhysicalField, SpectralField};
use strot_core::generators::{
    balanced_sigma, gradient_mode, localized_solenoidal, single_mode, swirl, EnsembleParams,
};
use strot_core::spectral::{box_to_physical, to_spectral};
use strot_core::{BoxField, BoxGrid, GridSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub name: String,
    params: BTreeMap<String, String>,
}

impl std::str::FromStr for Generator {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let name = name.trim().to_string();
        const NAMES: [&str; 6] = ["single-mode", "gradient", "ensemble", "swirl", "localized", "zero"];
        if !NAMES.contains(&name.as_str()) {
            bail!("unknown generator '{name}' (expected one of {})", NAMES.join(", "));
        }
        let mut params = BTreeMap::new();
        for item in rest.split(';').map(str::trim).filter(|i| !i.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("generator parameter '{item}' is not key=value"))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Generator { name, params })
    }
}

fn list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    v.split(',')
        .map(|x| x.trim().parse::<T>().with_context(|| format!("bad list entry '{x}'")))
        .collect()
}

fn triple<T: std::str::FromStr + Copy>(v: &str) -> Result<[T; 3]>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let l = list::<T>(v)?;
    <[T; 3]>::try_from(l).map_err(|_| anyhow!("expected three comma-separated values, got '{v}'"))
}

impl Generator {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::error::Error + Send + Sync + 'static,
    {
        self.params
            .get(key)
            .map(|v| v.parse::<T>().with_context(|| format!("{}: bad value for {key}", self.name)))
            .transpose()
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => bail!("{}: unknown parameter '{k}' (allowed: {})", self.name, allowed.join(", ")),
            None => Ok(()),
        }
    }

    fn modes(&self) -> Result<Option<Vec<i64>>> {
        self.params.get("modes").map(|v| list::<i64>(v)).transpose()
    }

    fn wave(&self) -> Result<[i64; 3]> {
        triple(self.params.get("m").ok_or_else(|| anyhow!("{}: missing m=M1,M2,M3", self.name))?)
    }

    fn amplitude(&self) -> Result<[Complex64; 3]> {
        let re = triple::<f64>(self.params.get("amp").map_or("0,1,0", String::as_str))?;
        let im = triple::<f64>(self.params.get("amp_im").map_or("0,0,0", String::as_str))?;
        Ok(std::array::from_fn(|j| Complex64::new(re[j], im[j])))
    }

    /// Time-independent field on the box.
    fn box_field(&self, bg: BoxGrid, seed: u64, k: i64) -> Result<BoxField> {
        let sigma = self.get::<f64>("sigma")?.unwrap_or_else(|| balanced_sigma(&bg));
        Ok(match self.name.as_str() {
            "swirl" => {
                self.check_keys(&["sigma", "modes"])?;
                swirl(bg, sigma)
            }
            "localized" => {
                self.check_keys(&["sigma", "degree", "seed", "modes"])?;
                let degree = self.get::<usize>("degree")?.unwrap_or(2);
                let seed = self.get::<u64>("seed")?.unwrap_or(seed);
                localized_solenoidal(bg, sigma, degree, seed.wrapping_add(k as u64))?
            }
            "single-mode" => {
                self.check_keys(&["k", "m", "amp", "amp_im", "modes"])?;
                let m = self.wave()?;
                let mut spec = BoxSpectrum::zeros(bg, 3);
                let slots = m.map(|mi| bg.slot_of(mi));
                let [Some(a), Some(b), Some(c)] = slots else {
                    bail!("single-mode: wave index {m:?} not on an N={} grid", bg.n);
                };
                for (j, v) in self.amplitude()?.iter().enumerate() {
                    let at = spec.index(a, b, c, j);
                    spec.data_mut()[at] = *v;
                }
                box_to_physical(&spec)
            }
            "zero" => BoxField::zeros(bg, 3),
            other => bail!("generator '{other}' does not produce a time-independent field"),
        })
    }

    /// Space-time forcing in spectral form on `grid`.
    pub fn spectral(&self, grid: &GridSpec, seed: u64) -> Result<SpectralField> {
        Ok(match self.name.as_str() {
            "single-mode" => {
                self.check_keys(&["k", "m", "amp", "amp_im"])?;
                let k = self.get::<i64>("k")?.unwrap_or(0);
                single_mode(grid, k, self.wave()?, self.amplitude()?)?
            }
            "gradient" => {
                self.check_keys(&["k", "m", "phi"])?;
                let k = self.get::<i64>("k")?.unwrap_or(0);
                let phi = self.get::<f64>("phi")?.unwrap_or(1.0);
                gradient_mode(grid, k, self.wave()?, Complex64::new(phi, 0.0))?
            }
            "ensemble" => {
                self.check_keys(&["member"])?;
                let member = self.get::<usize>("member")?.unwrap_or(0);
                EnsembleParams::new(seed, member + 1).member(grid, member)?
            }
            "zero" => SpectralField::zeros(*grid, 3),
            _ => {
                let g = self.box_field(grid.box_grid(), seed, 0)?;
                to_spectral(&PhysicalField::constant_in_time(*grid, &g)?)
            }
        })
    }

    pub fn box_forcing(&self, bg: BoxGrid, seed: u64) -> Result<BoxField> {
        if self.params.contains_key("modes") {
            bail!("{}: modes= only applies to time-periodic forcings", self.name);
        }
        self.box_field(bg, seed, 0)
    }

    /// Temporal modes on the `period` clock; `modes` defaults to `1,2`.
    pub fn mode_series(&self, bg: BoxGrid, period: f64, seed: u64) -> Result<ModeSeries> {
        let modes = match (self.modes()?, self.name.as_str()) {
            (Some(m), _) => m,
            (None, "single-mode") => vec![self.get::<i64>("k")?.unwrap_or(0)],
            (None, _) => vec![1, 2],
        };
        let fields = modes
            .iter()
            .map(|&k| Ok((k, self.box_field(bg, seed, k)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModeSeries::new(period, fields)?)
    }
}
