//! Build the quaternion group Q8, print its multiplication table, conjugacy
//! classes, and fundamental-representation characters, and run the full
//! consistency audit (associativity, inverses, regular-representation
//! composition, left/right commutation).
//!
//! Also demonstrates swapping in a different group from a JSON description:
//! the same machinery runs unchanged on Z2.
//!
//! Run with:
//!     cargo run --release --example group_tables

use lgtq::group::FiniteGroup;
use lgtq::runner::exhaustive_group_checks;
use lgtq::Result;

fn print_group(group: &FiniteGroup) {
    let d = group.order();
    println!("order {}", d);
    print!("{:>6} |", "*");
    for b in 0..d {
        print!("{:>6}", group.label(b));
    }
    println!();
    println!("{}", "-".repeat(8 + 6 * d));
    for a in 0..d {
        print!("{:>6} |", group.label(a));
        for b in 0..d {
            print!("{:>6}", group.label(group.mul(a, b)));
        }
        println!();
    }
    println!();

    println!("conjugacy classes:");
    for class in group.conjugacy_classes() {
        let labels: Vec<&str> = class.iter().map(|&g| group.label(g)).collect();
        println!("  {{ {} }}", labels.join(", "));
    }
    println!();

    println!("fundamental character (dimension {}):", group.fund_dim());
    for g in 0..d {
        println!("  chi({:>3}) = {:+.1}", group.label(g), group.char_fund(g));
    }
    println!();
}

fn main() -> Result<()> {
    let q8 = FiniteGroup::q8();
    println!("== quaternion group Q8 ==");
    print_group(&q8);

    // Right multiplication by J as a permutation of the basis labels.
    let j = q8.element_by_label("J").expect("label exists");
    let perm = q8.right_regular(j);
    println!("right multiplication by J permutes the basis as:");
    for g in 0..q8.order() {
        println!("  |{:>3}> -> |{:>3}>", q8.label(g), q8.label(perm.apply(g)));
    }
    println!();

    let report = exhaustive_group_checks(&q8)?;
    println!(
        "audit passed: {} composition pairs, {} commutation pairs checked",
        report.composition_pairs_checked, report.commutation_pairs_checked
    );
    println!();

    // The same machinery on a group supplied as data.
    let z2 = FiniteGroup::from_json_str(
        r#"{
            "labels": ["e", "x"],
            "cayley": [[0, 1], [1, 0]],
            "char_fund": [1.0, -1.0]
        }"#,
    )?;
    println!("== custom group from JSON (Z2) ==");
    print_group(&z2);
    let report = exhaustive_group_checks(&z2)?;
    println!(
        "audit passed: {} composition pairs checked",
        report.composition_pairs_checked
    );
    Ok(())
}
