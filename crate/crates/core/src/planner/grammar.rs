//! Line-oriented plan grammar: one `skill_name(arg, ...)` per line, `#`
//! comments and blank lines ignored.

use thiserror::Error;

use crate::skills::{AcCommand, CurtainCommand, PowerCommand, SkillAction};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("plan parse error at line {line}: {reason}")]
pub struct PlanParseError {
    /// 1-based line number in the raw text.
    pub line: usize,
    pub reason: String,
}

/// An ordered skill sequence together with the planner's verbatim output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<SkillAction>,
    pub raw_text: String,
}

impl Plan {
    pub fn empty() -> Self {
        Plan { steps: Vec::new(), raw_text: String::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn err(line: usize, reason: impl Into<String>) -> PlanParseError {
    PlanParseError { line, reason: reason.into() }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn parse_line(line_no: usize, line: &str) -> Result<SkillAction, PlanParseError> {
    let open = line
        .find('(')
        .ok_or_else(|| err(line_no, "expected skill_name(arg, ...)"))?;
    if !line.ends_with(')') {
        return Err(err(line_no, "missing closing parenthesis"));
    }
    let name = line[..open].trim();
    if !is_ident(name) {
        return Err(err(line_no, format!("invalid skill name {name:?}")));
    }
    let inner = line[open + 1..line.len() - 1].trim();
    let args: Vec<&str> = if inner.is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(str::trim).collect()
    };

    let arity = |n: usize| -> Result<(), PlanParseError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(err(line_no, format!("{name} takes {n} argument(s), got {}", args.len())))
        }
    };
    let one_of = |allowed: &[&str]| -> Result<String, PlanParseError> {
        arity(1)?;
        let arg = args[0];
        if allowed.contains(&arg) {
            Ok(arg.to_string())
        } else {
            Err(err(line_no, format!("{name} argument must be one of {allowed:?}, got {arg:?}")))
        }
    };

    match name {
        "move_to" => {
            arity(1)?;
            if !is_ident(args[0]) {
                return Err(err(line_no, format!("invalid target name {:?}", args[0])));
            }
            Ok(SkillAction::MoveTo { target: args[0].to_string() })
        }
        "produce_and_grab_milk" => arity(0).map(|_| SkillAction::ProduceAndGrabMilk),
        "make_coffee" => arity(0).map(|_| SkillAction::MakeCoffee),
        "pour_water" => arity(0).map(|_| SkillAction::PourWater),
        "grab_bread" => arity(0).map(|_| SkillAction::GrabBread),
        "control_ac" => {
            let arg = one_of(&["raise", "lower", "on", "off"])?;
            let command = match arg.as_str() {
                "raise" => AcCommand::Raise,
                "lower" => AcCommand::Lower,
                "on" => AcCommand::On,
                _ => AcCommand::Off,
            };
            Ok(SkillAction::ControlAc { command })
        }
        "mop_floor" => arity(0).map(|_| SkillAction::MopFloor),
        "wipe_table" => arity(0).map(|_| SkillAction::WipeTable),
        "control_curtains" => {
            let arg = one_of(&["open", "close"])?;
            let command =
                if arg == "open" { CurtainCommand::Open } else { CurtainCommand::Close };
            Ok(SkillAction::ControlCurtains { command })
        }
        "control_lighting" => {
            let arg = one_of(&["on", "off"])?;
            let command = if arg == "on" { PowerCommand::On } else { PowerCommand::Off };
            Ok(SkillAction::ControlLighting { command })
        }
        "straighten_chair" => arity(0).map(|_| SkillAction::StraightenChair),
        "take_towel" => arity(0).map(|_| SkillAction::TakeTowel),
        other => Err(err(line_no, format!("unknown skill {other:?}"))),
    }
}

/// Parse planner output into a plan. Errors carry the offending line number.
pub fn parse_plan(text: &str) -> Result<Plan, PlanParseError> {
    let mut steps = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        steps.push(parse_line(idx + 1, line)?);
    }
    Ok(Plan { steps, raw_text: text.to_string() })
}

/// Render steps back into grammar text; `parse_plan(render_plan(s))` yields
/// the same steps.
pub fn render_plan(steps: &[SkillAction]) -> String {
    let mut out = String::new();
    for step in steps {
        out.push_str(&step.render());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_text_is_an_empty_plan() {
        let plan = parse_plan("").unwrap();
        assert!(plan.is_empty());
        let plan = parse_plan("\n  \n# just a comment\n").unwrap();
        assert!(plan.is_empty());
    }

    #[test]
    fn two_step_plan_parses() {
        let plan = parse_plan("move_to(bar_table)\nmake_coffee()").unwrap();
        assert_eq!(plan.len(), 2);
        assert_eq!(plan.steps[0], SkillAction::MoveTo { target: "bar_table".into() });
        assert_eq!(plan.steps[1], SkillAction::MakeCoffee);
    }

    #[test]
    fn unknown_skill_reports_its_line() {
        let e = parse_plan("fly_to(moon)").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.reason.contains("unknown skill"));
        let e = parse_plan("make_coffee()\n\nfly_to(moon)").unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn arity_and_argument_errors() {
        assert!(parse_plan("make_coffee(now)").is_err());
        assert!(parse_plan("move_to()").is_err());
        assert!(parse_plan("control_ac(warmer)").is_err());
        assert!(parse_plan("move_to(bar table)").is_err());
        assert!(parse_plan("wipe_table").is_err());
        assert!(parse_plan("wipe_table(").is_err());
    }

    #[test]
    fn comments_and_whitespace_are_tolerated() {
        let text = "# plan follows\n  move_to(kettle)  \n\npour_water()\n# done\n";
        let plan = parse_plan(text).unwrap();
        assert_eq!(plan.len(), 2);
        assert_eq!(plan.raw_text, text);
    }

    fn action_strategy() -> impl Strategy<Value = SkillAction> {
        use crate::skills::{AcCommand, CurtainCommand, PowerCommand};
        prop_oneof![
            "[a-z_][a-z0-9_]{0,12}".prop_map(|t| SkillAction::MoveTo { target: t }),
            Just(SkillAction::ProduceAndGrabMilk),
            Just(SkillAction::MakeCoffee),
            Just(SkillAction::PourWater),
            Just(SkillAction::GrabBread),
            prop_oneof![
                Just(AcCommand::Raise),
                Just(AcCommand::Lower),
                Just(AcCommand::On),
                Just(AcCommand::Off)
            ]
            .prop_map(|command| SkillAction::ControlAc { command }),
            Just(SkillAction::MopFloor),
            Just(SkillAction::WipeTable),
            prop_oneof![Just(CurtainCommand::Open), Just(CurtainCommand::Close)]
                .prop_map(|command| SkillAction::ControlCurtains { command }),
            prop_oneof![Just(PowerCommand::On), Just(PowerCommand::Off)]
                .prop_map(|command| SkillAction::ControlLighting { command }),
            Just(SkillAction::StraightenChair),
            Just(SkillAction::TakeTowel),
        ]
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(steps in proptest::collection::vec(action_strategy(), 0..12)) {
            let text = render_plan(&steps);
            let parsed = parse_plan(&text).unwrap();
            prop_assert_eq!(parsed.steps, steps);
        }

        #[test]
        fn parser_never_panics(text in "\\PC*") {
            let _ = parse_plan(&text);
        }
    }
}
