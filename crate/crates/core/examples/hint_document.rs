//! Parses an authored hint document, lists its cumulative hint levels and
//! shows the named error for a malformed one.
//!
//! ```text
//! cargo run --example hint_document -- [path]
//! ```

use grpo_scaffold::problem::hint_doc::parse_hint_document;
use grpo_scaffold::problem::{HintCategory, HINT_LEVELS};

const SAMPLE: &str = "\
<PLANNING_SKELETON>
1. Name the unknown and what is given.
2. Pick the relation that links them.
3. Substitute the given values.
4. Simplify to isolate the unknown.
</PLANNING_SKELETON>

<KNOWLEDGE_COMPONENTS>
1. Definition: area of a rectangle is width times height.
2. Property: multiplication is commutative.
3. Operation: division undoes multiplication.
4. Units: area is measured in square units.
</KNOWLEDGE_COMPONENTS>

<SOLUTION_BREAKDOWN>
1. Area = w * h.
2. 24 = 4 * h.
3. h = 24 / 4.
4. h = 6.
</SOLUTION_BREAKDOWN>
";

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable hint document"),
        None => SAMPLE.to_string(),
    };
    let doc = match parse_hint_document(&text) {
        Ok(doc) => doc,
        Err(e) => {
            eprintln!("parse error: {e}");
            std::process::exit(1);
        }
    };
    for category in HintCategory::ALL {
        println!("[{category}]");
        for level in 1..=HINT_LEVELS {
            let shown = doc
                .cumulative(category, level)
                .join(" | ")
                .replace('\n', " ");
            println!("  level {level}: {shown}");
        }
    }
    assert_eq!(parse_hint_document(&doc.to_text()).as_ref(), Ok(&doc));

    let broken = SAMPLE.replace("3. h = 24 / 4.", "5. h = 24 / 4.");
    match parse_hint_document(&broken) {
        Err(e) => println!("malformed variant rejected: {e}"),
        Ok(_) => unreachable!("renumbered item must be rejected"),
    }
}
