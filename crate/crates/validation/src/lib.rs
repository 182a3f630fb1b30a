//! Reference ensembles and a small scorecard for the acceptance run.
//!
//! The acceptance target lives in its own package so that `cargo test
//! --workspace` runs it after the library and CLI suites: a failing
//! criterion then never hides the results of the ordinary tests.

use std::time::{Duration, Instant};

use badcodes::EdgeDistribution;

/// Right-regular (degree 10) relay ensemble with design rate near 1/2.
pub fn relay_reference() -> EdgeDistribution {
    EdgeDistribution::normalized(
        [(2, 0.2289), (3, 0.04532), (4, 0.2361), (23, 0.233), (24, 0.03178), (100, 0.2249)]
            .into_iter()
            .collect(),
        [(10, 1.0)].into_iter().collect(),
    )
    .expect("relay reference ensemble is valid")
}

/// Right-regular (degree 6) interference ensemble.
pub fn interference_reference() -> EdgeDistribution {
    EdgeDistribution::normalized(
        [(2, 0.2949), (3, 0.2036), (10, 0.05943), (11, 0.0001219), (55, 0.2399), (56, 0.09542), (57, 0.1065)]
            .into_iter()
            .collect(),
        [(6, 1.0)].into_iter().collect(),
    )
    .expect("interference reference ensemble is valid")
}

/// Moves a fraction `share` of the edge mass of `ed` onto variable degree
/// `degree`, scaling the other coefficients down proportionally.
pub fn shift_toward(ed: &EdgeDistribution, degree: u32, share: f64) -> EdgeDistribution {
    let mut lambda = ed.lambda().clone();
    for v in lambda.values_mut() {
        *v *= 1.0 - share;
    }
    *lambda.entry(degree).or_insert(0.0) += share;
    ed.with_lambda(lambda).expect("shifted ensemble is valid")
}

/// `|value - target| <= tol`, with NaN failing.
pub fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

/// Renders one part of a criterion as `label=value` with a marker when
/// that part fails.
pub fn part(label: &str, value: impl std::fmt::Display, ok: bool) -> String {
    if ok {
        format!("{label}={value}")
    } else {
        format!("{label}={value} (miss)")
    }
}

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub id: String,
    pub title: String,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Verdict {
    /// One line: `PASS|FAIL <id> <title> [<seconds>s] <detail>`.
    pub fn line(&self) -> String {
        format!(
            "{} {} {} [{:.1}s] {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Collects verdicts, printing each as soon as it is known.
#[derive(Debug, Default)]
pub struct Scorecard {
    verdicts: Vec<Verdict>,
}

impl Scorecard {
    pub fn new() -> Self {
        Scorecard::default()
    }

    /// Runs `check`, which returns whether it passed and a detail string,
    /// and records the result under `id`.
    pub fn run(&mut self, id: &str, title: &str, check: impl FnOnce() -> (bool, String)) -> &Verdict {
        let start = Instant::now();
        let (pass, detail) = check();
        let v = Verdict {
            id: id.into(),
            title: title.into(),
            pass,
            detail,
            elapsed: start.elapsed(),
        };
        println!("{}", v.line());
        self.verdicts.push(v);
        self.verdicts.last().expect("just pushed")
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }

    pub fn failures(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.pass).count()
    }

    /// Summary line.
    pub fn summary(&self) -> String {
        format!(
            "acceptance: {} passed, {} failed",
            self.verdicts.len() - self.failures(),
            self.failures()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifting_keeps_a_distribution() {
        let ed = shift_toward(&relay_reference(), 2, 0.01);
        assert!((ed.lambda().values().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(ed.lambda()[&2] > relay_reference().lambda()[&2]);
        let ed = shift_toward(&EdgeDistribution::regular(3, 6).unwrap(), 7, 0.5);
        assert_eq!(ed.lambda().len(), 2);
    }

    #[test]
    fn scorecard_counts_failures() {
        let mut s = Scorecard::new();
        s.run("1", "ok", || (true, "x=1".into()));
        let line = s.run("2", "bad", || (false, part("y", 2, false))).line();
        assert!(line.starts_with("FAIL 2 bad"));
        assert!(line.ends_with("y=2 (miss)"));
        assert_eq!(s.failures(), 1);
        assert_eq!(s.summary(), "acceptance: 1 passed, 1 failed");
        assert!(!within(f64::NAN, 0.0, 1.0));
    }
}
