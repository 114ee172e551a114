//! Descent through the critical partitions of a 6-dimensional stretch.

use relaxed_polar::ndim::{enumerate_critical_partitions, global_minimizers_nd, traversal_minimize, CriticalPartition, Block, Sign};

fn main() {
    let nu = [3.2, 2.9, 1.7, 1.1, 0.6, 0.3];
    let census = enumerate_critical_partitions(&nu).unwrap();
    println!("{} critical partitions for nu = {nu:?}", census.len());

    // Start from a nested, crossing pattern and walk down.
    let start = CriticalPartition::new(vec![Block::Pair(0, 5, Sign::Plus), Block::Pair(1, 4, Sign::Plus), Block::Single(2, Sign::Plus), Block::Single(3, Sign::Plus)], 6)
        .unwrap();
    let walk = traversal_minimize(&start, &nu).unwrap();
    for step in &walk.steps {
        println!("{:<14?} {:<28} {:.6}", step.stage, step.partition.to_string(), step.value);
    }
    let min = global_minimizers_nd(&nu).unwrap();
    println!("global minimum {} with {} minimizers, wred {:.6}", min.partition, min.minimizer_count(), min.wred);
}
