//! `key=start:stop:points[:log]` sweep grids.

use std::fmt;
use std::str::FromStr;

use measthermo::config::ConfigFile;

/// Config sections a sweep may target.
const MODEL_SECTIONS: [&str; 5] = ["qubit.", "oscillator.", "bath.", "schedule.", "partition."];

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub log: bool,
}

impl Sweep {
    /// Grid values in sweep order. Integer keys are rounded and must stay
    /// strictly monotone after rounding.
    pub fn values(&self) -> Result<Vec<f64>, String> {
        let n = self.points;
        let mut values: Vec<f64> = if n == 1 {
            vec![self.start]
        } else if self.log {
            let (a, b) = (self.start.ln(), self.stop.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
        } else {
            (0..n).map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64).collect()
        };
        if n > 1 {
            // pin endpoints against rounding in exp/ln
            values[0] = self.start;
            values[n - 1] = self.stop;
        }
        if ConfigFile::is_integer_key(&self.key) {
            for v in &mut values {
                *v = v.round();
            }
            if values.windows(2).any(|w| w[0] == w[1]) {
                return Err(format!(
                    "sweep over integer key `{}` repeats values after rounding; use fewer points",
                    self.key
                ));
            }
        }
        Ok(values)
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}:{}:{}", self.key, self.start, self.stop, self.points)?;
        if self.log {
            f.write_str(":log")?;
        }
        Ok(())
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (key, grid) = s.split_once('=').ok_or("expected key=start:stop:points[:log]")?;
        let key = key.trim().to_string();
        if !ConfigFile::is_known_key(&key) || !MODEL_SECTIONS.iter().any(|p| key.starts_with(p)) {
            return Err(format!("`{key}` is not a model configuration key"));
        }
        let parts: Vec<&str> = grid.split(':').collect();
        let log = match parts.as_slice() {
            [_, _, _] => false,
            [_, _, _, "log"] => true,
            [_, _, _, other] => return Err(format!("unknown grid flag `{other}`, expected `log`")),
            _ => return Err("expected key=start:stop:points[:log]".into()),
        };
        let num = |t: &str, what: &str| -> Result<f64, String> {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{what} `{t}` is not a finite number"))
        };
        let start = num(parts[0], "start")?;
        let stop = num(parts[1], "stop")?;
        let points: usize = parts[2].trim().parse().map_err(|_| format!("points `{}` is not a count", parts[2]))?;
        if points == 0 {
            return Err("points must be at least 1".into());
        }
        if points == 1 && start != stop {
            return Err("a single-point grid needs start == stop".into());
        }
        if points > 1 && start == stop {
            return Err("grid must be strictly monotone: start == stop".into());
        }
        if log && !(start > 0.0 && stop > 0.0) {
            return Err("log grids need positive endpoints".into());
        }
        Ok(Sweep { key, start, stop, points, log })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_log_grids() {
        let s: Sweep = "bath.beta=0.5:2:4".parse().unwrap();
        assert_eq!(s.values().unwrap(), vec![0.5, 1.0, 1.5, 2.0]);
        let s: Sweep = "schedule.ramp_rate=0.001:1:4:log".parse().unwrap();
        let v = s.values().unwrap();
        assert_eq!((v[0], v[3]), (0.001, 1.0));
        assert!((v[1] - 0.01).abs() < 1e-15 && (v[2] - 0.1).abs() < 1e-14);
        let s: Sweep = "schedule.chi_max=0.9:0.1:3".parse().unwrap();
        assert!(s.values().unwrap().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_bad_sweeps() {
        for bad in [
            "beta=0:1:3",
            "mpe.w_meas=0:1:3",
            "bath.beta=1:1:3",
            "bath.beta=0:1:0",
            "bath.beta=0:1",
            "bath.beta=0:1:3:lin",
            "bath.beta=-1:1:3:log",
            "bath.beta=a:1:3",
        ] {
            assert!(bad.parse::<Sweep>().is_err(), "{bad}");
        }
        let s: Sweep = "partition.n_s=0:2:5".parse().unwrap();
        assert!(s.values().is_err());
    }

    #[test]
    fn display_round_trips() {
        for text in ["bath.beta=0.01:10:50:log", "partition.n_s=0:3:4"] {
            let s: Sweep = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
        }
    }
}
