//! Write a framework document, read it back and check the canonical form is a
//! fixed point.

use symflex::builtin::builtin_example;
use symflex::document::FrameworkDocument;

fn main() -> symflex::Result<()> {
    let doc = builtin_example("bricard-cs", 11, None)?;
    let text = doc.to_canonical_string();
    let path = std::env::temp_dir().join("symflex-bricard-cs.json");
    std::fs::write(&path, &text).map_err(|e| symflex::Error::Invalid(e.to_string()))?;
    let read =
        std::fs::read_to_string(&path).map_err(|e| symflex::Error::Invalid(e.to_string()))?;
    let again = FrameworkDocument::parse(&read)?;
    assert_eq!(again, doc);
    assert_eq!(again.to_canonical_string(), text);
    println!(
        "{} ({} bytes) round-trips byte-identically",
        path.display(),
        text.len()
    );
    print!("{}", text.lines().take(12).collect::<Vec<_>>().join("\n"));
    println!("\n...");
    Ok(())
}
