use crate::error::{Error, Result};
use std::io::{Read, Write};

/// Latent lifetimes and censoring times, kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Latent {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Observed right-censored data: `z = min(x, y)`, `delta = [x <= y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredSample {
    z: Vec<f64>,
    delta: Vec<bool>,
    latent: Option<Latent>,
}

impl CensoredSample {
    pub fn new(z: Vec<f64>, delta: Vec<bool>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::EmptySample);
        }
        if z.len() != delta.len() {
            return Err(Error::InvalidParameter(format!("z has {} values but delta has {}", z.len(), delta.len())));
        }
        if let Some((i, v)) = z.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!("z[{i}] = {v} is not a finite nonnegative time")));
        }
        Ok(Self { z, delta, latent: None })
    }

    /// Builds the sample from latent pairs, retaining them.
    pub fn from_latent(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidParameter("latent vectors differ in length".into()));
        }
        let z = x.iter().zip(&y).map(|(a, b)| a.min(*b)).collect();
        let delta = x.iter().zip(&y).map(|(a, b)| a <= b).collect();
        let mut sample = Self::new(z, delta)?;
        sample.latent = Some(Latent { x, y });
        Ok(sample)
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn delta(&self) -> &[bool] {
        &self.delta
    }

    pub fn latent(&self) -> Option<&Latent> {
        self.latent.as_ref()
    }

    pub fn uncensored(&self) -> usize {
        self.delta.iter().filter(|d| **d).count()
    }

    pub fn censoring_proportion(&self) -> f64 {
        1.0 - self.uncensored() as f64 / self.len() as f64
    }

    /// Writes `z,delta` CSV in observation order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["z", "delta"])?;
        for (z, d) in self.z.iter().zip(&self.delta) {
            w.write_record([z.to_string(), u8::from(*d).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `z,delta` CSV. Row numbers in errors count the header as row 1.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "z" || &headers[1] != "delta" {
            return Err(Error::MalformedRow {
                row: 1,
                message: format!("expected header `z,delta`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut z = Vec::new();
        let mut delta = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| Error::MalformedRow { row, message: e.to_string() })?;
            if rec.len() != 2 {
                return Err(Error::MalformedRow { row, message: format!("expected 2 fields, found {}", rec.len()) });
            }
            let t: f64 =
                rec[0].parse().map_err(|_| Error::MalformedRow { row, message: format!("z = `{}` is not a number", &rec[0]) })?;
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::MalformedRow { row, message: format!("z = {t} must be finite and >= 0") });
            }
            let d = match &rec[1] {
                "0" => false,
                "1" => true,
                other => return Err(Error::MalformedRow { row, message: format!("delta = `{other}` must be 0 or 1") }),
            };
            z.push(t);
            delta.push(d);
        }
        if z.is_empty() {
            return Err(Error::EmptySample);
        }
        Self::new(z, delta)
    }
}
