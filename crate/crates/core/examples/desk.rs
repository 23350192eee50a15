use mel_core::eval::results_text;
use mel_core::experiment::{forge_dataset, run_experiment, ExperimentConfig};
use mel_core::forge::dataset_stats;

fn main() {
    let mut seeds = Vec::new();
    let mut config = ExperimentConfig::default();
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        if a == "--config" {
            let path = args.next().expect("config path");
            config = serde_json::from_str(&std::fs::read_to_string(path).expect("read")).expect("parse");
        } else {
            seeds.push(a.parse::<u64>().expect("seed"));
        }
    }
    if seeds.is_empty() {
        seeds = vec![0, 1, 2];
    }
    for seed in seeds {
        let cfg = config.clone().seeded(seed);
        let data = forge_dataset(&cfg).expect("forge");
        let stats = dataset_stats(&data.kb, &data.mentions);
        println!(
            "mentions {} train/valid/test {}/{}/{} cand mean {:.1} timeline mean {:.1}",
            data.mentions.len(),
            data.split.train.len(),
            data.split.valid.len(),
            data.split.test.len(),
            stats.candidates.mean,
            stats.timeline.mean
        );
        let out = run_experiment(&cfg, seed).expect("experiment");
        println!("seed {seed} ({:.1}s)\n{}", out.seconds, results_text(&out.rows));
        for (name, r) in &out.jmel_reports {
            let accs: Vec<String> = r.epochs.iter().map(|e| format!("{:.2}/{:.3}", e.valid_acc, e.mean_loss)).collect();
            println!("{name}: best epoch {} valid {:.3}: {}", r.best_epoch, r.best_valid_acc, accs.join(" "));
        }
    }
}
