//! TEDS between a ground-truth table and a prediction that misses a column
//! span and misreads one cell.

use gridsplit::metrics::{teds, tree_edit_distance};
use gridsplit::structure::parse_html;

fn main() -> gridsplit::Result<()> {
    let gt = parse_html(
        "<table><thead><tr><td colspan=\"2\">Region</td><td>Total</td></tr></thead>\
         <tbody><tr><td>North</td><td>East</td><td>120</td></tr>\
         <tr><td>South</td><td>West</td><td>95</td></tr></tbody></table>",
    )?;
    let pred = parse_html(
        "<table><tr><td>Region</td><td></td><td>Total</td></tr>\
         <tr><td>North</td><td>East</td><td>120</td></tr>\
         <tr><td>South</td><td>West</td><td>96</td></tr></table>",
    )?;
    println!("nodes: gt {}, pred {}", gt.normalized().size(), pred.normalized().size());
    for (name, so) in [("TEDS", false), ("TEDS-Struct", true)] {
        let d = tree_edit_distance(&pred.normalized(), &gt.normalized(), so);
        println!("{name:<12} distance {d:.3}  score {:.4}", teds(&pred, &gt, so));
    }
    println!("{}", gt.normalized().to_html());
    Ok(())
}
