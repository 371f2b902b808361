use kyrtos_core::config::AnalysisConfig;
use kyrtos_core::ingest::ChartImage;
use kyrtos_core::pipeline::{analyze, MergeStage};
use kyrtos_core::synth::{generate_chart, CurveClass, SyntheticSpec};

fn main() {
    let classes = [
        ("linear", vec![CurveClass::Linear]),
        ("quadratic", vec![CurveClass::Quadratic]),
        ("asymptotic", vec![CurveClass::Asymptotic]),
        ("sinusoidal", vec![CurveClass::Sinusoidal]),
    ];
    let cfg = AnalysisConfig::default();
    for (name, cls) in &classes {
        let mut scores = Vec::new();
        for seed in 0..5u64 {
            let spec = SyntheticSpec::sample(1, cls, seed * 31 + 7);
            let chart = generate_chart(&spec).unwrap();
            let image = ChartImage::new(chart.image.clone()).unwrap();
            match analyze(&image, Some(&chart.sidecar), &cfg) {
                Ok(desc) => {
                    let s = desc.reconstruction_ssim(MergeStage::Rule2).unwrap();
                    scores.push(s);
                }
                Err(e) => println!("  {name} seed {seed}: ERROR {e}"),
            }
        }
        println!("{name}: {:?}", scores.iter().map(|s| (s * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    }
    for n in [2usize, 3, 4] {
        let mut r2 = Vec::new();
        let mut r3 = Vec::new();
        for seed in 0..5u64 {
            let spec = SyntheticSpec::sample(n, &[CurveClass::Arbitrary], seed * 17 + 3);
            let chart = generate_chart(&spec).unwrap();
            let image = ChartImage::new(chart.image.clone()).unwrap();
            match analyze(&image, Some(&chart.sidecar), &cfg) {
                Ok(desc) => {
                    r2.push(desc.reconstruction_ssim(MergeStage::Rule2).unwrap());
                    r3.push(desc.reconstruction_ssim(MergeStage::Rule3).unwrap());
                }
                Err(e) => println!("  {n}curves seed {seed}: ERROR {e}"),
            }
        }
        let m2 = r2.iter().sum::<f64>() / r2.len().max(1) as f64;
        let m3 = r3.iter().sum::<f64>() / r3.len().max(1) as f64;
        println!("{n} curves: rule2 mean {m2:.3} rule3 mean {m3:.3} ({:?})", r2.iter().map(|s| (s * 100.0).round() / 100.0).collect::<Vec<_>>());
    }
}
