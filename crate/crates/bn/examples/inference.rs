//! Fit a small network from counts, then query it by variable elimination
//! and by full enumeration.
//!
//!     cargo run -p gridvad-bn --example inference

use gridvad_bn::{fit_mle, joint_brute_force, DataTable, Dag, Node};

fn main() -> gridvad_bn::Result<()> {
    // zone -> class, zone -> size, class -> size
    let dag = Dag::new(
        vec![
            Node::new("zone", 3),
            Node::new("class", 2),
            Node::new("size", 3),
        ],
        &[("zone", "class"), ("zone", "size"), ("class", "size")],
    )?;

    let mut data = DataTable::new(vec!["zone".into(), "class".into(), "size".into()]);
    let rows: &[([u32; 3], usize)] = &[
        ([0, 0, 1], 40),
        ([0, 0, 0], 10),
        ([0, 1, 2], 2),
        ([1, 1, 1], 30),
        ([1, 1, 2], 12),
        ([1, 0, 1], 3),
        ([2, 0, 1], 20),
        ([2, 1, 1], 20),
    ];
    for (row, n) in rows {
        for _ in 0..*n {
            data.push_row(row)?;
        }
    }
    let net = fit_mle(&dag, &data)?;
    let class = dag.require("class")?;
    let zone = dag.require("zone")?;
    let size = dag.require("size")?;

    println!("P(class | zone, size), elimination vs enumeration:");
    for z in 0..3 {
        for s in 0..3 {
            let evidence = [(zone, z), (size, s)];
            let ve = net.eliminate(class, &evidence)?;
            let bf = joint_brute_force(&net, class, &evidence)?;
            let status = if ve.impossible { "  (impossible evidence)" } else { "" };
            println!(
                "  zone={z} size={s}: [{:.4}, {:.4}]  [{:.4}, {:.4}]{status}",
                ve.probs[0], ve.probs[1], bf.probs[0], bf.probs[1]
            );
        }
    }

    let cpt = net.cpt(size);
    println!("size CPT rows (zone, class) -> probabilities:");
    for config in 0..cpt.num_configs() {
        let observed = if cpt.is_observed(config) { "" } else { "  unobserved, uniform" };
        println!("  {:?} -> {:?}{observed}", cpt.config_values(config), cpt.row(config));
    }
    Ok(())
}
