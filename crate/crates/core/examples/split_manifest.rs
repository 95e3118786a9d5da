//! Parses a JSONL manifest and splits every sequence into leading training
//! frames and trailing validation frames.
//!
//! Run with `cargo run --example split_manifest`.

use cacut::dataset::{manifest_to_string, parse_manifest, split_by_sequence};

fn manifest() -> String {
    let mut text = String::new();
    for (seq, frames) in [("north", 10u64), ("south", 4)] {
        // listed out of order on purpose; the split sorts by frame
        for frame in (0..frames).rev() {
            text.push_str(&format!(
                r#"{{"image":"{seq}/{frame:05}.png","sequence":"{seq}","width":1280,"height":720,"frame":{frame},"vanishing":[640,200],"left":[100,719],"right":[1180,719]}}"#
            ));
            text.push('\n');
        }
    }
    text
}

pub fn run_example() -> cacut::Result<()> {
    let anns = parse_manifest(&manifest(), "inline")?;
    let split = split_by_sequence(&anns, 0.8)?;
    for (name, part) in [("train", &split.train), ("val", &split.val)] {
        let frames: Vec<String> = part.iter().map(|a| format!("{}:{}", a.sequence, a.frame)).collect();
        println!("{name} ({}): {}", part.len(), frames.join(" "));
    }
    assert_eq!((split.train.len(), split.val.len()), (11, 3));
    print!("{}", manifest_to_string(&split.val)?);
    Ok(())
}

fn main() -> cacut::Result<()> {
    run_example()
}
