//! The executable-subtask vocabulary: each subtask carries the phrases that
//! express it, the reference skill sequence that accomplishes it, and the
//! degraded sequence a planner produces when it has no environment memory
//! (navigation and tool-acquisition steps that depend on remembered objects
//! are dropped).

use serde::{Deserialize, Serialize};

use crate::simworld::Category;
use crate::skills::{AcCommand, CurtainCommand, PowerCommand, SkillAction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubtaskKind {
    MakeCoffee,
    PourWater,
    GrabBread,
    ServeMilk,
    WipeTable,
    MopFloor,
    OpenCurtains,
    CloseCurtains,
    LightsOn,
    LightsOff,
    AcOn,
    AcCooler,
    StraightenChair,
}

pub const ALL_SUBTASKS: [SubtaskKind; 13] = [
    SubtaskKind::MakeCoffee,
    SubtaskKind::PourWater,
    SubtaskKind::GrabBread,
    SubtaskKind::ServeMilk,
    SubtaskKind::WipeTable,
    SubtaskKind::MopFloor,
    SubtaskKind::OpenCurtains,
    SubtaskKind::CloseCurtains,
    SubtaskKind::LightsOn,
    SubtaskKind::LightsOff,
    SubtaskKind::AcOn,
    SubtaskKind::AcCooler,
    SubtaskKind::StraightenChair,
];

impl SubtaskKind {
    /// Verb phrases used when rendering instructions; any of them (or the
    /// aliases) identifies the subtask in free text.
    pub fn phrases(self) -> &'static [&'static str] {
        match self {
            SubtaskKind::MakeCoffee => &["make a cup of coffee", "brew some coffee"],
            SubtaskKind::PourWater => &["pour a glass of water", "pour some water"],
            SubtaskKind::GrabBread => &["grab some bread", "fetch a piece of bread"],
            SubtaskKind::ServeMilk => &["serve a glass of milk", "get a glass of milk"],
            SubtaskKind::WipeTable => &["wipe the table", "clean up the table"],
            SubtaskKind::MopFloor => &["mop the floor", "clean the floor"],
            SubtaskKind::OpenCurtains => &["open the curtains"],
            SubtaskKind::CloseCurtains => &["close the curtains"],
            SubtaskKind::LightsOn => &["turn on the lights"],
            SubtaskKind::LightsOff => &["turn off the lights"],
            SubtaskKind::AcOn => &["turn on the air conditioning"],
            SubtaskKind::AcCooler => &["turn down the air conditioning", "make it cooler"],
            SubtaskKind::StraightenChair => &["straighten the chairs"],
        }
    }

    /// Statement-style wordings recognized but never generated.
    pub fn aliases(self) -> &'static [&'static str] {
        match self {
            SubtaskKind::MakeCoffee => &["make coffee"],
            SubtaskKind::WipeTable => &["the table is dirty"],
            SubtaskKind::MopFloor => &["the floor is dirty"],
            SubtaskKind::CloseCurtains => &["block the sunlight"],
            SubtaskKind::StraightenChair => &["the chairs are messy"],
            _ => &[],
        }
    }

    /// Reference skill sequence, assuming environment memory is available.
    pub fn reference_plan(self) -> Vec<SkillAction> {
        match self {
            SubtaskKind::MakeCoffee => vec![
                SkillAction::MoveTo { target: "coffee_machine".into() },
                SkillAction::MakeCoffee,
            ],
            SubtaskKind::PourWater => vec![
                SkillAction::MoveTo { target: "kettle".into() },
                SkillAction::PourWater,
            ],
            SubtaskKind::GrabBread => vec![
                SkillAction::MoveTo { target: "bread".into() },
                SkillAction::GrabBread,
            ],
            SubtaskKind::ServeMilk => vec![
                SkillAction::MoveTo { target: "table".into() },
                SkillAction::ProduceAndGrabMilk,
            ],
            SubtaskKind::WipeTable => vec![
                SkillAction::TakeTowel,
                SkillAction::MoveTo { target: "table".into() },
                SkillAction::WipeTable,
            ],
            SubtaskKind::MopFloor => vec![
                SkillAction::MoveTo { target: "floor_patch".into() },
                SkillAction::MopFloor,
            ],
            SubtaskKind::OpenCurtains => vec![
                SkillAction::MoveTo { target: "curtain".into() },
                SkillAction::ControlCurtains { command: CurtainCommand::Open },
            ],
            SubtaskKind::CloseCurtains => vec![
                SkillAction::MoveTo { target: "curtain".into() },
                SkillAction::ControlCurtains { command: CurtainCommand::Close },
            ],
            SubtaskKind::LightsOn => vec![
                SkillAction::MoveTo { target: "light_switch".into() },
                SkillAction::ControlLighting { command: PowerCommand::On },
            ],
            SubtaskKind::LightsOff => vec![
                SkillAction::MoveTo { target: "light_switch".into() },
                SkillAction::ControlLighting { command: PowerCommand::Off },
            ],
            SubtaskKind::AcOn => vec![
                SkillAction::MoveTo { target: "air_conditioner".into() },
                SkillAction::ControlAc { command: AcCommand::On },
            ],
            SubtaskKind::AcCooler => vec![
                SkillAction::MoveTo { target: "air_conditioner".into() },
                SkillAction::ControlAc { command: AcCommand::Lower },
            ],
            SubtaskKind::StraightenChair => vec![
                SkillAction::MoveTo { target: "chair".into() },
                SkillAction::StraightenChair,
            ],
        }
    }

    /// What a planner emits for this subtask when the request carries no
    /// environment memory: steps grounded on objects the instruction text
    /// never names are missing.
    pub fn blind_plan(self) -> Vec<SkillAction> {
        match self {
            // The documented failure mode: heads straight for the table
            // without taking a towel first.
            SubtaskKind::WipeTable => vec![
                SkillAction::MoveTo { target: "table".into() },
                SkillAction::WipeTable,
            ],
            // No remembered table to walk to before producing the glass.
            SubtaskKind::ServeMilk => vec![SkillAction::ProduceAndGrabMilk],
            // Grounds on the named tool instead of the unseen dirty region.
            SubtaskKind::MopFloor => vec![
                SkillAction::MoveTo { target: "mop".into() },
                SkillAction::MopFloor,
            ],
            other => other.reference_plan(),
        }
    }

    /// Categories that must exist in a scene for the subtask to make sense.
    pub fn required_categories(self) -> &'static [Category] {
        match self {
            SubtaskKind::MakeCoffee => &[Category::CoffeeMachine],
            SubtaskKind::PourWater => &[Category::Kettle],
            SubtaskKind::GrabBread => &[Category::Bread],
            SubtaskKind::ServeMilk => &[Category::Table],
            SubtaskKind::WipeTable => &[Category::Table, Category::Towel],
            SubtaskKind::MopFloor => &[Category::FloorPatch],
            SubtaskKind::OpenCurtains | SubtaskKind::CloseCurtains => &[Category::Curtain],
            SubtaskKind::LightsOn | SubtaskKind::LightsOff => &[Category::LightSwitch],
            SubtaskKind::AcOn | SubtaskKind::AcCooler => &[Category::AirConditioner],
            SubtaskKind::StraightenChair => &[Category::Chair],
        }
    }

    /// Subtasks that end with something in the robot's hand; an instruction
    /// may contain at most one of these.
    pub fn occupies_hand(self) -> bool {
        matches!(
            self,
            SubtaskKind::GrabBread | SubtaskKind::ServeMilk | SubtaskKind::WipeTable
        )
    }
}

/// Scan free text for subtask phrases; returns the matches ordered by their
/// position in the text. Matching is case-insensitive and each subtask is
/// reported at most once (at its earliest match).
pub fn find_subtasks_in_text(text: &str) -> Vec<SubtaskKind> {
    let lower = text.to_lowercase();
    let mut found: Vec<(usize, SubtaskKind)> = Vec::new();
    for kind in ALL_SUBTASKS {
        let earliest = kind
            .phrases()
            .iter()
            .chain(kind.aliases())
            .filter_map(|p| lower.find(p))
            .min();
        if let Some(pos) = earliest {
            found.push((pos, kind));
        }
    }
    found.sort();
    found.into_iter().map(|(_, k)| k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phrases_do_not_contain_each_other() {
        let mut all: Vec<(SubtaskKind, &str)> = Vec::new();
        for kind in ALL_SUBTASKS {
            for p in kind.phrases().iter().chain(kind.aliases()) {
                all.push((kind, p));
            }
        }
        for (ka, a) in &all {
            for (kb, b) in &all {
                if ka != kb {
                    assert!(!a.contains(b), "{a:?} contains {b:?} from another subtask");
                }
            }
        }
    }

    #[test]
    fn subtasks_recovered_in_text_order() {
        let text = "Hi! Please close the curtains, then make a cup of coffee and wipe the table.";
        assert_eq!(
            find_subtasks_in_text(text),
            vec![SubtaskKind::CloseCurtains, SubtaskKind::MakeCoffee, SubtaskKind::WipeTable]
        );
    }

    #[test]
    fn statement_aliases_are_recognized() {
        assert_eq!(find_subtasks_in_text("The table is dirty."), vec![SubtaskKind::WipeTable]);
    }

    #[test]
    fn reference_plans_use_cataloged_skills_only() {
        use crate::skills::catalog;
        let names: Vec<&str> = catalog().iter().map(|s| s.name).collect();
        for kind in ALL_SUBTASKS {
            for step in kind.reference_plan().iter().chain(kind.blind_plan().iter()) {
                assert!(names.contains(&step.name()), "{step:?} not in catalog");
            }
        }
    }

    #[test]
    fn blind_wipe_table_skips_the_towel() {
        let blind = SubtaskKind::WipeTable.blind_plan();
        assert!(!blind.contains(&SkillAction::TakeTowel));
        let full = SubtaskKind::WipeTable.reference_plan();
        assert_eq!(full[0], SkillAction::TakeTowel);
    }
}
