//! Embodied question-answering dataset construction: seeded scene
//! randomization, the five question templates, a geometric answer oracle and
//! answer-balance control.

mod affordance;
mod generate;
mod templates;

pub use affordance::{categories_for, AFFORDANCES};
pub use generate::{
    answer_oracle, binding_from_item, default_bounds, generate_dataset, randomize_scene,
    read_dataset, template_instantiable, write_dataset, Dataset, DatasetError, DatasetItem,
    DatasetParams, OracleAnswer, OracleError, QuestionBinding,
};
pub use templates::{
    category_from_display, display_name, parse_question, render_affordance, render_closer,
    render_exists, render_same_table, render_same_table_item, template_type, ParsedQuestion,
    QuestionType, TEMPLATE_IDS,
};
