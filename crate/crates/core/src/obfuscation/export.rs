//! Line-oriented key/seed export for reproducible experiments.
//!
//! ```text
//! lambda1=<hex>
//! psi=<decimal>
//! mode=EWD|EWM
//! v=<comma-separated decimals>
//! theta=<90|180|270>
//! ```

use std::fmt::Write as _;

use super::Mode;
use crate::error::{Result, SpdcError};
use crate::matrix::Rotation;

#[derive(Debug, Clone, PartialEq)]
pub struct KeyExport {
    pub lambda1: Vec<u8>,
    pub psi: f64,
    pub mode: Mode,
    pub v: Vec<f64>,
    pub theta: Rotation,
}

impl KeyExport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "lambda1={}", hex::encode(&self.lambda1));
        let _ = writeln!(out, "psi={}", self.psi);
        let _ = writeln!(out, "mode={}", self.mode);
        let v: Vec<String> = self.v.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "v={}", v.join(","));
        let _ = writeln!(out, "theta={}", self.theta);
        out
    }

    pub fn parse(text: &str) -> Result<KeyExport> {
        let mut lambda1 = None;
        let mut psi = None;
        let mut mode = None;
        let mut v = None;
        let mut theta = None;
        for (idx, line) in text.lines().enumerate() {
            let lno = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |column: usize, message: String| SpdcError::Parse {
                line: lno,
                column,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(1, "expected key=value".into()))?;
            let vcol = key.len() + 2;
            match key {
                "lambda1" => lambda1 = Some(hex::decode(value).map_err(|e| err(vcol, e.to_string()))?),
                "psi" => psi = Some(value.parse::<f64>().map_err(|e| err(vcol, e.to_string()))?),
                "mode" => mode = Some(value.parse::<Mode>().map_err(|e| err(vcol, e))?),
                "v" => {
                    let parsed: std::result::Result<Vec<f64>, _> =
                        value.split(',').map(|s| s.trim().parse::<f64>()).collect();
                    v = Some(parsed.map_err(|e| err(vcol, e.to_string()))?);
                }
                "theta" => {
                    let deg: u32 = value.parse().map_err(|_| err(vcol, format!("bad angle {value:?}")))?;
                    theta = Some(Rotation::try_from(deg).map_err(|e| err(vcol, e.to_string()))?);
                }
                other => return Err(err(1, format!("unknown key {other:?}"))),
            }
        }
        let missing = |name: &str| SpdcError::Parse {
            line: text.lines().count() + 1,
            column: 1,
            message: format!("missing {name}"),
        };
        Ok(KeyExport {
            lambda1: lambda1.ok_or_else(|| missing("lambda1"))?,
            psi: psi.ok_or_else(|| missing("psi"))?,
            mode: mode.ok_or_else(|| missing("mode"))?,
            v: v.ok_or_else(|| missing("v"))?,
            theta: theta.ok_or_else(|| missing("theta"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let k = KeyExport {
            lambda1: vec![0xde, 0xad, 0xbe, 0xef],
            psi: 123456.789012345,
            mode: Mode::Ewm,
            v: vec![0.1, 2.0 / 3.0, 7.5e-3],
            theta: Rotation::Deg270,
        };
        let text = k.to_text();
        assert!(text.starts_with("lambda1=deadbeef\npsi=123456.789012345\nmode=EWM\n"));
        assert!(text.ends_with("theta=270\n"));
        assert_eq!(KeyExport::parse(&text).unwrap(), k);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(KeyExport::parse("lambda1=zz\n").is_err());
        assert!(KeyExport::parse("theta=45\n").is_err());
        assert!(KeyExport::parse("lambda1=00\npsi=2\nmode=EWD\nv=2\n").is_err());
    }
}
