use serde::{Deserialize, Serialize};

/// Degenerate (cases, population) combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialCase {
    Normal,
    /// Cp = 0 and P = 0 (cross).
    UndefinedZeroZero,
    /// Cp ≠ 0 and P = 0 (star).
    PopZeroCasesNonzero,
    /// Cp > P > 0 (triangle).
    CasesExceedPop,
}

/// Dashboard glyph for a special case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marker {
    Cross,
    Star,
    Triangle,
}

impl SpecialCase {
    pub fn of(cases: u64, population: u64) -> SpecialCase {
        match (cases, population) {
            (0, 0) => SpecialCase::UndefinedZeroZero,
            (_, 0) => SpecialCase::PopZeroCasesNonzero,
            (c, p) if c > p => SpecialCase::CasesExceedPop,
            _ => SpecialCase::Normal,
        }
    }

    pub fn marker(self) -> Option<Marker> {
        match self {
            SpecialCase::Normal => None,
            SpecialCase::UndefinedZeroZero => Some(Marker::Cross),
            SpecialCase::PopZeroCasesNonzero => Some(Marker::Star),
            SpecialCase::CasesExceedPop => Some(Marker::Triangle),
        }
    }
}

impl Marker {
    pub fn glyph(self) -> char {
        match self {
            Marker::Cross => '✕',
            Marker::Star => '★',
            Marker::Triangle => '▲',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeChange {
    /// H(i, k) in percent; `None` when either incidence is undefined.
    pub pct: Option<f64>,
    pub special: SpecialCase,
    /// The reference group has zero cases or zero population.
    pub reference_undefined: bool,
}

/// Percent change of group incidence `cases / population` relative to the
/// reference incidence `ref_cases / ref_population`.
///
/// A triangle case still yields a value; cross and star cases do not. A
/// zero reference incidence leaves the value undefined without changing
/// the group's own special-case flag.
pub fn relative_change(
    cases: u64,
    population: u64,
    ref_cases: u64,
    ref_population: u64,
) -> RelativeChange {
    let special = SpecialCase::of(cases, population);
    let reference_undefined = ref_cases == 0 || ref_population == 0;
    let pct = match special {
        SpecialCase::UndefinedZeroZero | SpecialCase::PopZeroCasesNonzero => None,
        _ if reference_undefined => None,
        _ => {
            let y = cases as f64 / population as f64;
            let x = ref_cases as f64 / ref_population as f64;
            Some(100.0 * (y - x) / x)
        }
    };
    RelativeChange {
        pct,
        special,
        reference_undefined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_incidence_is_zero() {
        assert_eq!(relative_change(5, 1000, 20, 4000).pct, Some(0.0));
    }

    #[test]
    fn taxonomy() {
        assert_eq!(SpecialCase::of(0, 0).marker(), Some(Marker::Cross));
        assert_eq!(SpecialCase::of(3, 0).marker(), Some(Marker::Star));
        assert_eq!(SpecialCase::of(3, 2).marker(), Some(Marker::Triangle));
        assert_eq!(SpecialCase::of(2, 2), SpecialCase::Normal);
        assert_eq!(SpecialCase::of(0, 2), SpecialCase::Normal);
    }

    #[test]
    fn six_and_a_half_times_is_550_percent() {
        let h = relative_change(65, 1000, 10, 1000).pct.unwrap();
        assert!((h - 550.0).abs() < 1e-9, "{h}");
    }

    #[test]
    fn triangle_keeps_value_star_does_not() {
        let t = relative_change(4, 2, 1, 10);
        assert_eq!(t.special, SpecialCase::CasesExceedPop);
        assert!((t.pct.unwrap() - 1900.0).abs() < 1e-9);
        assert_eq!(relative_change(4, 0, 1, 10).pct, None);
    }

    #[test]
    fn zero_reference_is_undefined() {
        let r = relative_change(3, 100, 0, 1000);
        assert_eq!(r.pct, None);
        assert!(r.reference_undefined);
        assert_eq!(r.special, SpecialCase::Normal);
        assert!(relative_change(3, 100, 5, 0).reference_undefined);
    }
}
