//! Plain-text ket serialization.
//!
//! ```text
//! # modes: aH aV bH bV
//! 5.0000000000000000e-1 0.0000000000000000e0 : 3 0 0 3
//! ```
//!
//! One line per term, amplitudes printed with 17 significant digits, terms
//! in lexicographic occupation order.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use super::ket::{FockKet, Occupation};
use super::register::ModeRegister;
use crate::error::{FockError, Result};

const HEADER: &str = "# modes:";

impl FockKet {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{HEADER}");
        for label in self.register().labels() {
            let _ = write!(out, " {label}");
        }
        out.push('\n');
        for (occ, amp) in self.terms() {
            let _ = write!(out, "{:.16e} {:.16e} :", amp.re, amp.im);
            for n in occ.as_slice() {
                let _ = write!(out, " {n}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut register: Option<Arc<ModeRegister>> = None;
        let mut terms = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let err = |message: String| FockError::Parse {
                line: line_no,
                message,
            };
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix(HEADER) {
                if register.is_some() {
                    return Err(err("duplicate modes header".into()));
                }
                let labels: Vec<&str> = rest.split_whitespace().collect();
                let reg = ModeRegister::parse_labels(&labels).map_err(|e| err(e.to_string()))?;
                register = Some(Arc::new(reg));
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let reg = register
                .as_ref()
                .ok_or_else(|| err("term before `# modes:` header".into()))?;
            let (amp, occ) = line
                .split_once(':')
                .ok_or_else(|| err("expected `<re> <im> : <n1> ...`".into()))?;
            let parts: Vec<&str> = amp.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(err(
                    "amplitude needs exactly a real and an imaginary part".into()
                ));
            }
            let re: f64 = parts[0]
                .parse()
                .map_err(|_| err(format!("bad number `{}`", parts[0])))?;
            let im: f64 = parts[1]
                .parse()
                .map_err(|_| err(format!("bad number `{}`", parts[1])))?;
            let counts = occ
                .split_whitespace()
                .map(|s| {
                    s.parse::<u8>()
                        .map_err(|_| err(format!("bad occupation `{s}`")))
                })
                .collect::<Result<Vec<u8>>>()?;
            if counts.len() != reg.len() {
                return Err(err(format!(
                    "occupation has {} entries, register has {} modes",
                    counts.len(),
                    reg.len()
                )));
            }
            terms.push((Occupation::new(counts), Complex64::new(re, im)));
        }
        let reg = register.ok_or(FockError::Parse {
            line: 0,
            message: "missing `# modes:` header".into(),
        })?;
        FockKet::from_terms(reg, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_order() {
        let reg = Arc::new(ModeRegister::from_spatial(&["a"]).unwrap());
        let k = FockKet::from_terms(
            reg,
            [
                (vec![1, 0].into(), Complex64::new(0.5, 0.0)),
                (vec![0, 1].into(), Complex64::new(-0.25, 1.0)),
            ],
        )
        .unwrap();
        let text = k.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# modes: aH aV");
        assert!(lines[1].ends_with(": 0 1"));
        assert!(lines[2].ends_with(": 1 0"));
        assert!(lines[1].starts_with("-2.5000000000000000e-1 1.0000000000000000e0"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "# modes: aH aV\n0.5 0 : 1\n";
        match FockKet::from_text(text) {
            Err(FockError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(FockKet::from_text("1 0 : 1 0\n").is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(
            amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0u8..4, 0u8..4, 0u8..4), 1..8)
        ) {
            let reg = Arc::new(ModeRegister::parse_labels(&["aH", "aV", "bH"]).unwrap());
            let k = FockKet::from_terms(
                reg,
                amps.iter().map(|&(re, im, x, y, z)| (Occupation::new(vec![x, y, z]), Complex64::new(re, im))),
            ).unwrap();
            let back = FockKet::from_text(&k.to_text()).unwrap();
            prop_assert_eq!(back, k);
        }
    }
}
