//! Hand-authored mapping from activity phrases to the categories that enable
//! them, used by existence-type questions (template 5).

use crate::simworld::Category;

/// Every activity maps to at least one catalog category. Floor patches are
/// conditions rather than tools and carry no activity.
pub const AFFORDANCES: &[(&str, &[Category])] = &[
    ("make coffee", &[Category::CoffeeMachine]),
    ("boil water", &[Category::Kettle]),
    ("drink some water", &[Category::Cup, Category::Kettle]),
    ("have a quick snack", &[Category::Bread]),
    ("pour a glass of milk", &[Category::Milk]),
    ("cool the room down", &[Category::AirConditioner]),
    ("light up the room", &[Category::LightSwitch]),
    ("block the sunlight", &[Category::Curtain]),
    ("clean the floor", &[Category::Mop]),
    ("wipe the table", &[Category::Towel]),
    ("take a seat", &[Category::Chair]),
    ("set down a tray", &[Category::Table]),
];

pub fn categories_for(activity: &str) -> Option<&'static [Category]> {
    AFFORDANCES
        .iter()
        .find(|(name, _)| *name == activity)
        .map(|(_, cats)| *cats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_activity_has_a_category() {
        for (activity, cats) in AFFORDANCES {
            assert!(!cats.is_empty(), "{activity} maps to nothing");
        }
        assert!(categories_for("clean the floor").unwrap().contains(&Category::Mop));
        assert_eq!(categories_for("fly to the moon"), None);
    }

    #[test]
    fn activities_are_unique() {
        for (i, (a, _)) in AFFORDANCES.iter().enumerate() {
            for (b, _) in &AFFORDANCES[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }
}
