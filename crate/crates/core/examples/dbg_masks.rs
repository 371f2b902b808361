use kyrtos_core::config::AnalysisConfig;
use kyrtos_core::ingest::{apply_hsv_homogeneity, segment_regions, extract_curve_masks};
use kyrtos_core::synth::{generate_chart, CurveClass, SyntheticSpec};

fn main() {
    for (n, classes, seed) in [
        (1usize, vec![CurveClass::Quadratic], 2u64 * 31 + 7),
        (3, vec![CurveClass::Arbitrary], 17 * 1 + 3),
        (4, vec![CurveClass::Arbitrary], 0 * 17 + 3),
    ] {
        let spec = SyntheticSpec::sample(n, &classes, seed);
        println!("=== n={n} seed={seed} grid={} dashes={:?}", spec.light_grid,
            spec.curves.iter().map(|c| c.dash).collect::<Vec<_>>());
        let chart = generate_chart(&spec).unwrap();
        let cfg = AnalysisConfig::default();
        let h = apply_hsv_homogeneity(&chart.image, &cfg.homogeneity);
        for e in &h.palette {
            let (hue, s, v) = e.color.to_hsv();
            println!("  palette {:?} count={} hue={hue:.0} s={s:.2} v={v:.2}", e.color, e.count);
        }
        let (region, _, _) = segment_regions(&h);
        match extract_curve_masks(&region, cfg.homogeneity.min_color_pixels) {
            Ok(masks) => for m in &masks {
                println!("  mask {} {:?} px={} w={}", m.curve_id, m.color, m.pixel_count(), m.width_estimate_px);
            },
            Err(e) => println!("  mask error: {e}"),
        }
    }
}
