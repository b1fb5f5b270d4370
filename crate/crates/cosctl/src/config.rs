//! Flat, line-oriented `key = value` job configs with dotted section
//! prefixes (`model.family`, `payoff.kind`, ...). `#` starts a comment.

use anyhow::{anyhow, bail, Context, Result};
use damped_cos::models::{
    bs_log_return_model, vg_log_return_model, CharacteristicModel, MarketSpec, NormalModel,
    VarianceGammaModel,
};
use damped_cos::tuning::Tolerance;
use damped_cos::{DampingFactor, Payoff};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                bail!("line {}: empty key or value", lineno + 1);
            }
            if entries.insert(key.clone(), value).is_some() {
                bail!("line {}: duplicate key `{key}`", lineno + 1);
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| anyhow!("missing config key `{key}`"))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.require(key)?
            .parse()
            .with_context(|| format!("key `{key}` must be a number"))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            Some(v) => v
                .parse()
                .with_context(|| format!("key `{key}` must be a number")),
            None => Ok(default),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            Some(v) => v
                .parse()
                .with_context(|| format!("key `{key}` must be an integer")),
            None => Ok(default),
        }
    }

    pub fn vec_f64(&self, key: &str) -> Result<Vec<f64>> {
        self.require(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .with_context(|| format!("key `{key}`: bad number"))
            })
            .collect()
    }

    pub fn vec_usize(&self, key: &str) -> Result<Vec<usize>> {
        self.require(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .with_context(|| format!("key `{key}`: bad integer"))
            })
            .collect()
    }

    pub fn market(&self) -> Result<MarketSpec> {
        let spot = self.vec_f64("market.spot")?;
        let rate = self.f64("market.rate")?;
        let maturity = self.f64("market.maturity")?;
        MarketSpec::new(spot, rate, maturity).map_err(|e| anyhow!("market: {e}"))
    }

    pub fn has_market(&self) -> bool {
        self.get("market.spot").is_some()
    }

    pub fn payoff(&self) -> Result<Payoff> {
        let kind = self.require("payoff.kind")?;
        let payoff = match kind {
            "cdf" => Payoff::Cdf { y: self.vec_f64("payoff.y")? },
            "digital_put" => Payoff::DigitalPut { strike: self.vec_f64("payoff.strike")? },
            "basket_put" => Payoff::BasketPut { strike: self.f64("payoff.strike")? },
            "vanilla_put" => Payoff::VanillaPut { strike: self.f64("payoff.strike")? },
            "abs_moment" => Payoff::AbsMoment,
            other => bail!(
                "payoff.kind `{other}` is not one of cdf, digital_put, basket_put, vanilla_put, abs_moment"
            ),
        };
        payoff.validate().map_err(|e| anyhow!("payoff: {e}"))?;
        Ok(payoff)
    }

    pub fn tolerance(&self) -> Result<Tolerance> {
        let moment_order = self.usize_or("tolerance.moment_order", 8)? as u32;
        let n_max = self.usize_or("tolerance.n_max", 2000)?;
        let l_over_m = self.f64_or("tolerance.l_over_m", 1.0)?;
        Tolerance::new(self.f64("tolerance.epsilon")?)
            .and_then(|t| t.with_moment_order(moment_order))
            .map(|t| t.with_n_max(n_max))
            .and_then(|t| t.with_l_over_m(l_over_m))
            .map_err(|e| anyhow!("tolerance: {e}"))
    }

    pub fn alpha(&self, payoff: &Payoff, d: usize) -> Result<DampingFactor> {
        match self.get("damping.alpha") {
            Some(_) => {
                let v = self.vec_f64("damping.alpha")?;
                let v = if v.len() == 1 && d > 1 {
                    vec![v[0]; d]
                } else {
                    v
                };
                DampingFactor::new(v).map_err(|e| anyhow!("damping: {e}"))
            }
            None => Ok(damped_cos::tuning::default_alpha(payoff, d)),
        }
    }

    pub fn model(&self) -> Result<ModelSpec> {
        let family = self.require("model.family")?;
        match family {
            "normal" => {
                let eta = self.vec_f64("model.eta")?;
                let cov = self.vec_f64("model.cov")?;
                Ok(ModelSpec::Normal(
                    NormalModel::new(eta, cov).map_err(|e| anyhow!("model: {e}"))?,
                ))
            }
            "vg" => {
                let model = VarianceGammaModel::new(
                    self.f64("model.a")?,
                    self.f64("model.s")?,
                    self.vec_f64("model.eta")?,
                    self.vec_f64("model.theta")?,
                    self.vec_f64("model.sigma")?,
                )
                .map_err(|e| anyhow!("model: {e}"))?;
                Ok(ModelSpec::Vg(model))
            }
            "bs" => {
                let market = self.market().context("bs model needs a market section")?;
                let cov = self.vec_f64("model.cov")?;
                Ok(ModelSpec::Normal(
                    bs_log_return_model(&market, &cov).map_err(|e| anyhow!("model: {e}"))?,
                ))
            }
            "vg-market" => {
                let market = self
                    .market()
                    .context("vg-market model needs a market section")?;
                let model = vg_log_return_model(
                    &market,
                    self.f64("model.nu")?,
                    self.vec_f64("model.theta")?,
                    self.vec_f64("model.sigma")?,
                )
                .map_err(|e| anyhow!("model: {e}"))?;
                Ok(ModelSpec::Vg(model))
            }
            other => bail!("model.family `{other}` is not one of normal, vg, bs, vg-market"),
        }
    }
}

/// An owned model of either family.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    Normal(NormalModel),
    Vg(VarianceGammaModel),
}

impl ModelSpec {
    pub fn as_dyn(&self) -> &dyn CharacteristicModel {
        match self {
            ModelSpec::Normal(m) => m,
            ModelSpec::Vg(m) => m,
        }
    }

    pub fn dim(&self) -> usize {
        self.as_dyn().dim()
    }
}
