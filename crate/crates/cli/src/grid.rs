//! Grid specifications of the form `start:stop:count[:log|:linear]`.

use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let u = i as f64 / last;
                if self.log {
                    (self.start.ln() + u * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + u * (self.stop - self.start)
                }
            })
            .map(|x| if x.is_finite() { x } else { f64::NAN })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("expected start:stop:count[:log], got '{s}'"));
        }
        let num = |p: &str, what: &str| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("grid {what} '{p}' is not a finite number"))
        };
        let start = num(parts[0], "start")?;
        let stop = num(parts[1], "stop")?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("grid count '{}' is not a non-negative integer", parts[2]))?;
        if count == 0 {
            return Err("grid count must be at least 1".into());
        }
        let log = match parts.get(3).map(|p| p.trim()) {
            None | Some("linear") => false,
            Some("log") => true,
            Some(other) => {
                return Err(format!(
                    "grid spacing must be 'log' or 'linear', got '{other}'"
                ))
            }
        };
        if log && !(start > 0.0 && stop > 0.0) {
            return Err("log grid needs positive start and stop".into());
        }
        Ok(GridSpec {
            start,
            stop,
            count,
            log,
        })
    }
}

/// Comma-separated, strictly increasing list of positive orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSchedule(pub Vec<u32>);

pub fn parse_k_schedule(s: &str) -> Result<KSchedule, String> {
    let ks: Vec<u32> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad k value '{p}'"))
        })
        .collect::<Result<_, _>>()?;
    if ks.is_empty() || ks[0] == 0 || ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!(
            "k schedule must be positive and strictly increasing, got '{s}'"
        ));
    }
    Ok(KSchedule(ks))
}
