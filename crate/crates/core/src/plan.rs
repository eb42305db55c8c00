//! Circuit-naming scheme for search plans.
//!
//! ```text
//! plan  := stage ('|' stage)*
//! stage := ['G' digits] ('D' digits)+ 'M' digits
//! ```
//!
//! `Gg` classically guesses `g` leading qubits, each `Dm` is one Grover
//! iteration whose diffusion acts on `m` active qubits, and `Mp` measures
//! `p` active qubits. Stages run left to right; within a stage the `D`
//! entries run left to right too, so `D3D4M4` applies G3 first, then G4.
//!
//! Qubit roles: guessed qubits are the leading qubits, and each stage
//! works on the leading qubits that are still undetermined. A local
//! diffusion covers the first `m` active qubits and measurement reads the
//! first `p` of them, so a partial measurement must stay inside the last
//! diffusion's support ([`SupportRule::Inside`]). [`SupportRule::Outside`]
//! instead places the diffusion on the trailing active qubits, measuring
//! qubits the local diffusion never touched.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Hash)]
pub enum SupportRule {
    #[default]
    Inside,
    Outside,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Stage {
    pub guessed: usize,
    pub iterations: Vec<usize>,
    pub measured: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SearchPlan {
    n: usize,
    stages: Vec<Stage>,
    rule: SupportRule,
}

/// Concrete qubit assignment of one stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageLayout {
    /// Qubits fixed before the stage runs (earlier stages and guesses).
    pub determined: Vec<usize>,
    /// Qubits prepared in uniform superposition.
    pub active: Vec<usize>,
    /// Diffusion support of each iteration, in execution order.
    pub supports: Vec<Vec<usize>>,
    pub measured: Vec<usize>,
    /// Qubits guessed at the start of this stage (a prefix of `determined`'s tail).
    pub guessed: Vec<usize>,
}

impl SearchPlan {
    pub fn parse(name: &str, n: usize) -> Result<SearchPlan> {
        Self::parse_with_rule(name, n, SupportRule::Inside)
    }

    pub fn parse_with_rule(name: &str, n: usize, rule: SupportRule) -> Result<SearchPlan> {
        let stages = parse_stages(name)?;
        let plan = SearchPlan { n, stages, rule };
        plan.validate().map_err(|(position, message)| Error::Parse { position, message })?;
        Ok(plan)
    }

    /// Builds a plan from parts, applying the same checks as [`SearchPlan::parse`].
    pub fn from_stages(n: usize, stages: Vec<Stage>, rule: SupportRule) -> Result<SearchPlan> {
        let plan = SearchPlan { n, stages, rule };
        plan.validate().map_err(|(_, message)| Error::Argument(message))?;
        Ok(plan)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn rule(&self) -> SupportRule {
        self.rule
    }

    pub fn oracle_count(&self) -> usize {
        self.stages.iter().map(|s| s.iterations.len()).sum()
    }

    pub fn guessed(&self) -> usize {
        self.stages.iter().map(|s| s.guessed).sum()
    }

    /// Number of target bits the plan ends up reporting (guessed + measured).
    pub fn resolved_bits(&self) -> usize {
        self.stages.iter().map(|s| s.guessed + s.measured).sum()
    }

    /// Number of bits determined before stage `k` starts, guesses of stage `k` included.
    pub fn determined_before(&self, k: usize) -> usize {
        self.stages[..k].iter().map(|s| s.guessed + s.measured).sum::<usize>() + self.stages[k].guessed
    }

    pub fn stage_layout(&self, k: usize) -> StageLayout {
        let stage = &self.stages[k];
        let start = self.determined_before(k);
        let determined: Vec<usize> = (0..start).collect();
        let guessed: Vec<usize> = (start - stage.guessed..start).collect();
        let active: Vec<usize> = (start..self.n).collect();
        let supports = stage
            .iterations
            .iter()
            .map(|&m| match self.rule {
                SupportRule::Inside => active[..m].to_vec(),
                SupportRule::Outside => active[active.len() - m..].to_vec(),
            })
            .collect();
        let measured = active[..stage.measured].to_vec();
        StageLayout { determined, active, supports, measured, guessed }
    }

    fn validate(&self) -> std::result::Result<(), (usize, String)> {
        if self.n == 0 {
            return Err((0, "plan needs at least one qubit".into()));
        }
        let mut used = 0;
        let mut pos = 0;
        for (k, s) in self.stages.iter().enumerate() {
            let label = format_stage(s);
            if k > 0 && s.guessed > 0 {
                return Err((pos, "guessed qubits may only appear in the first stage".into()));
            }
            used += s.guessed;
            if used >= self.n {
                return Err((pos, format!("guessing {} of {} qubits leaves nothing to search", s.guessed, self.n)));
            }
            let active = self.n - used;
            if s.iterations.is_empty() {
                return Err((pos, "stage has no diffusion".into()));
            }
            for &m in &s.iterations {
                if m == 0 || m > active {
                    return Err((pos, format!("D{m} exceeds the {active} active qubit(s)")));
                }
            }
            if s.measured == 0 || s.measured > active {
                return Err((pos, format!("M{} exceeds the {active} active qubit(s)", s.measured)));
            }
            let last = *s.iterations.last().expect("non-empty");
            if self.rule == SupportRule::Inside && s.measured < active && last < active && s.measured > last {
                return Err((
                    pos,
                    format!("M{} measures outside the support of the final D{last}", s.measured),
                ));
            }
            used += s.measured;
            pos += label.len() + 1;
        }
        if used > self.n {
            return Err((pos, format!("plan resolves {used} bits but only {} qubits exist", self.n)));
        }
        Ok(())
    }
}

fn format_stage(s: &Stage) -> String {
    let mut out = String::new();
    if s.guessed > 0 {
        out.push_str(&format!("G{}", s.guessed));
    }
    for m in &s.iterations {
        out.push_str(&format!("D{m}"));
    }
    out.push_str(&format!("M{}", s.measured));
    out
}

impl fmt::Display for SearchPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.stages.iter().map(format_stage).collect();
        f.write_str(&parts.join("|"))
    }
}

fn parse_stages(name: &str) -> Result<Vec<Stage>> {
    let bytes = name.as_bytes();
    let mut i = 0;
    let err = |position: usize, message: String| Error::Parse { position, message };
    let number = |i: &mut usize| -> Result<usize> {
        let start = *i;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        if start == *i {
            return Err(err(start, "expected digits".into()));
        }
        name[start..*i].parse().map_err(|_| err(start, "number out of range".into()))
    };
    let mut stages = Vec::new();
    loop {
        let mut stage = Stage { guessed: 0, iterations: Vec::new(), measured: 0 };
        if i < bytes.len() && bytes[i] == b'G' {
            i += 1;
            stage.guessed = number(&mut i)?;
        }
        while i < bytes.len() && bytes[i] == b'D' {
            i += 1;
            stage.iterations.push(number(&mut i)?);
        }
        if stage.iterations.is_empty() {
            return Err(err(i, "expected 'D'".into()));
        }
        if i >= bytes.len() || bytes[i] != b'M' {
            return Err(err(i, "expected 'D' or 'M'".into()));
        }
        i += 1;
        stage.measured = number(&mut i)?;
        stages.push(stage);
        if i == bytes.len() {
            return Ok(stages);
        }
        if bytes[i] != b'|' {
            return Err(err(i, format!("unexpected {:?}", name[i..].chars().next().unwrap_or(' '))));
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hybrid_plan() {
        let p = SearchPlan::parse("G1D2M2", 3).unwrap();
        assert_eq!(p.stages(), &[Stage { guessed: 1, iterations: vec![2], measured: 2 }]);
        let l = p.stage_layout(0);
        assert_eq!(l.guessed, vec![0]);
        assert_eq!(l.active, vec![1, 2]);
        assert_eq!(l.measured, vec![1, 2]);
    }

    #[test]
    fn two_stage_plan() {
        let p = SearchPlan::parse("D2M2|D2M2", 4).unwrap();
        assert_eq!(p.stages().len(), 2);
        for s in p.stages() {
            assert_eq!(s.iterations, vec![2]);
            assert_eq!(s.measured, 2);
        }
        let l = p.stage_layout(1);
        assert_eq!(l.determined, vec![0, 1]);
        assert_eq!(l.supports, vec![vec![2, 3]]);
    }

    #[test]
    fn iteration_order_is_left_to_right() {
        let p = SearchPlan::parse("D3D4M4", 4).unwrap();
        assert_eq!(p.stages()[0].iterations, vec![3, 4]);
        assert_eq!(p.stage_layout(0).supports, vec![vec![0, 1, 2], vec![0, 1, 2, 3]]);
    }

    #[test]
    fn measuring_too_many_is_an_error() {
        assert!(matches!(SearchPlan::parse("D2M5", 4), Err(Error::Parse { .. })));
    }

    #[test]
    fn malformed_names_report_position() {
        assert_eq!(
            SearchPlan::parse("D2X2", 4),
            Err(Error::Parse { position: 2, message: "expected 'D' or 'M'".into() })
        );
        assert!(matches!(SearchPlan::parse("", 3), Err(Error::Parse { position: 0, .. })));
        assert!(matches!(SearchPlan::parse("D2M2|", 4), Err(Error::Parse { position: 5, .. })));
        assert!(matches!(SearchPlan::parse("D5M3", 4), Err(Error::Parse { .. })));
        assert!(matches!(SearchPlan::parse("D2M2|G1D2M1", 5), Err(Error::Parse { position: 5, .. })));
    }

    #[test]
    fn support_rule_checked_on_partial_measurement() {
        // D2 then measuring 3 of 4 active qubits leaves the third outside the support.
        assert!(SearchPlan::parse("D2M3|D1M1", 4).is_err());
        assert!(SearchPlan::parse_with_rule("D2M3|D1M1", 4, SupportRule::Outside).is_ok());
        // Full measurement after a local diffusion is fine.
        assert!(SearchPlan::parse("D2M4", 4).is_ok());
    }

    #[test]
    fn outside_rule_places_support_at_the_tail() {
        let p = SearchPlan::parse_with_rule("D2M1|D2M2", 3, SupportRule::Outside).unwrap();
        let l = p.stage_layout(0);
        assert_eq!(l.supports, vec![vec![1, 2]]);
        assert_eq!(l.measured, vec![0]);
    }

    fn arb_plan() -> impl Strategy<Value = (String, usize)> {
        (2usize..7, prop::collection::vec((0usize..3, prop::collection::vec(1usize..7, 1..4), 1usize..7), 1..4))
            .prop_map(|(n, raw)| {
                let name = raw
                    .iter()
                    .enumerate()
                    .map(|(k, (g, its, p))| {
                        let mut s = String::new();
                        if k == 0 && *g > 0 {
                            s.push_str(&format!("G{g}"));
                        }
                        for m in its {
                            s.push_str(&format!("D{m}"));
                        }
                        s.push_str(&format!("M{p}"));
                        s
                    })
                    .collect::<Vec<_>>()
                    .join("|");
                (name, n)
            })
    }

    proptest! {
        #[test]
        fn format_round_trips((name, n) in arb_plan()) {
            if let Ok(plan) = SearchPlan::parse(&name, n) {
                prop_assert_eq!(plan.to_string(), name.clone());
                prop_assert_eq!(SearchPlan::parse(&plan.to_string(), n).unwrap(), plan);
            }
        }
    }
}
