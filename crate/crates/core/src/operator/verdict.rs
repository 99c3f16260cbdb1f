use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::norms::{NormReport, NormValue};
use crate::rational::{self, Rational};

/// Lower bound `Σ_{h ≤ horizon} coefficient / h` on partial sums of `‖K‖₁`.
/// A positive coefficient makes the series diverge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceCertificate {
    #[serde(with = "rational::serde_str")]
    pub coefficient: Rational,
    pub horizon: u64,
    /// Certified value of `‖K‖₁` restricted to the first `horizon` blocks.
    #[serde(with = "rational::serde_str")]
    pub partial_sum: Rational,
}

impl DivergenceCertificate {
    /// Positive coefficient, and the partial sum dominates
    /// `coefficient · (1 + 1/2 + ... + 1/horizon)`.
    pub fn check(&self) -> bool {
        if !self.coefficient.is_positive() || self.horizon == 0 {
            return false;
        }
        let harmonic = (1..=self.horizon)
            .map(|h| Rational::new(One::one(), h.into()))
            .fold(Rational::zero(), |a, b| a + b);
        self.partial_sum >= &self.coefficient * harmonic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum L1Evidence {
    Finite { value: NormValue },
    Divergent(DivergenceCertificate),
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    StableAndL1,
    StableNotL1,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictRecord {
    pub schema: &'static str,
    pub verdict: Verdict,
    pub l1: L1Evidence,
    pub op_inf1_upper: Option<NormValue>,
    pub reason: String,
}

/// Finite `‖K‖₁` implies stability. A certified finite `(∞,1)` upper bound
/// together with a certified divergent `‖K‖₁` gives stability without
/// absolute integrability. Anything less is undetermined.
pub fn stability_verdict(l1: L1Evidence, op: &NormReport) -> VerdictRecord {
    let upper = op
        .certified_upper()
        .filter(|v| v.approx.is_finite())
        .cloned();
    let (verdict, reason) = match (&l1, &upper) {
        (L1Evidence::Finite { value }, _) if value.approx.is_finite() => (
            Verdict::StableAndL1,
            "finite L1 norm bounds the operator norm".to_string(),
        ),
        (L1Evidence::Divergent(cert), Some(_)) if cert.check() => (
            Verdict::StableNotL1,
            "certified finite operator norm and divergent L1 series".to_string(),
        ),
        (L1Evidence::Divergent(_), Some(_)) => (
            Verdict::Undetermined,
            "divergence certificate does not check".to_string(),
        ),
        (_, None) => (
            Verdict::Undetermined,
            "no certified upper bound on the operator norm".to_string(),
        ),
        _ => (Verdict::Undetermined, "L1 norm not certified".to_string()),
    };
    VerdictRecord {
        schema: "1",
        verdict,
        l1,
        op_inf1_upper: upper,
        reason,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SymMatrix;
    use crate::norms::matrix_norm_report;
    use crate::rational::{int, rat};

    fn lower_only() -> NormReport {
        NormReport {
            l1: NormValue::approx(f64::INFINITY),
            exact: None,
            lower: Some(NormValue::exact(int(3))),
            upper: None,
            witness: None,
        }
    }

    #[test]
    fn finite_l1_is_stable() {
        let m = SymMatrix::from_i64_rows(&[&[2, 1], &[1, 2]]).unwrap();
        let report = matrix_norm_report(&m, 1);
        let rec = stability_verdict(
            L1Evidence::Finite {
                value: NormValue::exact(int(6)),
            },
            &report,
        );
        assert_eq!(rec.verdict, Verdict::StableAndL1);
    }

    #[test]
    fn divergent_needs_upper_bound() {
        let cert = DivergenceCertificate {
            coefficient: int(1),
            horizon: 4,
            partial_sum: rat(25, 12),
        };
        assert!(cert.check());
        let rec = stability_verdict(L1Evidence::Divergent(cert.clone()), &lower_only());
        assert_eq!(rec.verdict, Verdict::Undetermined);
        let mut with_upper = lower_only();
        with_upper.upper = Some(NormValue::exact(rat(7, 2)));
        let rec = stability_verdict(L1Evidence::Divergent(cert), &with_upper);
        assert_eq!(rec.verdict, Verdict::StableNotL1);
    }

    #[test]
    fn bad_certificate_rejected() {
        let cert = DivergenceCertificate {
            coefficient: int(1),
            horizon: 4,
            partial_sum: int(2),
        };
        assert!(!cert.check());
        let mut report = lower_only();
        report.upper = Some(NormValue::exact(int(1)));
        let rec = stability_verdict(L1Evidence::Divergent(cert), &report);
        assert_eq!(rec.verdict, Verdict::Undetermined);
    }

    #[test]
    fn heuristic_only_is_undetermined() {
        let rec = stability_verdict(L1Evidence::Unknown, &lower_only());
        assert_eq!(rec.verdict, Verdict::Undetermined);
        let json = serde_json::to_value(&rec).unwrap();
        assert_eq!(json["verdict"], "undetermined");
        assert_eq!(json["schema"], "1");
    }
}
