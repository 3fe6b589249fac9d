//! Process exit codes of the workbench.

/// Exit code contract: 0 pass, 2 input error, 3 groupoid axiom error,
/// 4 check failure, 5 internal-consistency (oracle) failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    InputError,
    AxiomError,
    CheckFailure,
    OracleDisagreement,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::InputError => 2,
            Outcome::AxiomError => 3,
            Outcome::CheckFailure => 4,
            Outcome::OracleDisagreement => 5,
        }
    }
}

/// Verdict of the Morita pipeline: the numerical report against the
/// block-count oracle. A passing report with a dissenting oracle flags
/// an implementation bug, not a property of the input.
pub fn morita_outcome(reports_pass: bool, oracle_agrees: bool) -> Outcome {
    match (reports_pass, oracle_agrees) {
        (true, true) => Outcome::Pass,
        (true, false) => Outcome::OracleDisagreement,
        (false, _) => Outcome::CheckFailure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_match_contract() {
        assert_eq!(Outcome::Pass.code(), 0);
        assert_eq!(Outcome::InputError.code(), 2);
        assert_eq!(Outcome::AxiomError.code(), 3);
        assert_eq!(Outcome::CheckFailure.code(), 4);
        assert_eq!(Outcome::OracleDisagreement.code(), 5);
    }

    #[test]
    fn passing_report_with_dissenting_oracle_is_code_five() {
        assert_eq!(morita_outcome(true, false), Outcome::OracleDisagreement);
        assert_eq!(morita_outcome(true, true), Outcome::Pass);
        assert_eq!(morita_outcome(false, true), Outcome::CheckFailure);
        assert_eq!(morita_outcome(false, false), Outcome::CheckFailure);
    }
}
