use otypes::closure::{iterate, PoolCandidate};
use otypes::families::{self, expected_entry_step, tree_pool, type_p};
use otypes::tree::random_tree;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    for seed in 0..10u64 {
        let tree = random_tree(seed, 12);
        let theory = families::t_tree(&tree).unwrap();
        let pool: Vec<PoolCandidate> = tree_pool(&tree)
            .into_iter()
            .map(PoolCandidate::Concrete)
            .collect();
        let t1 = Instant::now();
        let state = iterate(theory, type_p(), pool, 20, 1).unwrap();
        let rank = tree.finite_rank(&otypes::tree::NodePath::root());
        println!(
            "seed {seed}: {} nodes, rank {rank}, outcome {:?}, {:?}",
            tree.len(),
            state.outcome(),
            t1.elapsed()
        );
        for p in tree.paths().filter(|p| !p.is_empty()) {
            let key = format!("P{p}(x)");
            assert_eq!(
                state.ledger()[&key],
                expected_entry_step(&tree, p).unwrap(),
                "seed {seed} node {p}"
            );
        }
    }
    println!("total: {:?}", t0.elapsed());
}
