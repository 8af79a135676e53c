use osclab::lab::{run_experiment, Context, EXPERIMENTS};
use osclab::walks::OscTable;
use osclab::Exec;
use serde_json::json;

fn small(name: &str) -> serde_json::Value {
    match name {
        "l-properties" => json!({"bound": "w^(3)", "depth": 2, "breadth": 4}),
        "zero-sum" => json!({"tuples": 5, "sizes": [100, 200]}),
        "restriction-collisions" => json!({"xi_count": 100}),
        "k-absorption" => json!({"family_size": 3, "sizes": [50, 100]}),
        "product-membership" => json!({"family_size": 8}),
        _ => json!({}),
    }
}

#[test]
fn sequential_and_parallel_records_agree() {
    for name in EXPERIMENTS {
        let payloads: Vec<String> = [Exec::Sequential, Exec::Parallel]
            .into_iter()
            .map(|exec| {
                let table = OscTable::new();
                let ctx = Context { exec, table: &table };
                run_experiment(name, small(name), &ctx).unwrap().payload()
            })
            .collect();
        assert_eq!(payloads[0], payloads[1], "{name}");
    }
}
