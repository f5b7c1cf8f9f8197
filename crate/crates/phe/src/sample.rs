//! Seeded point clouds over the configured box.

use phe_core::fields::Chart;
use phe_core::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{CampaignConfig, ConfigError};

const MAX_REJECTIONS_PER_POINT: usize = 1000;

pub fn sample_points(cfg: &CampaignConfig, chart: Chart) -> Result<Vec<Point>, ConfigError> {
    let bounds = cfg.box_bounds(chart);
    let names = chart.axis_names();
    let exclusions: Vec<(usize, f64, f64)> = cfg
        .sampling
        .exclusions
        .iter()
        .map(|e| (names.iter().position(|n| *n == e.axis).unwrap_or(usize::MAX), e.center, e.radius))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sampling.seed);
    let mut out = Vec::with_capacity(cfg.sampling.count);
    let mut rejected = 0usize;
    while out.len() < cfg.sampling.count {
        let p: Point = core::array::from_fn(|k| rng.gen_range(bounds[k][0]..bounds[k][1]));
        let excluded = exclusions.iter().any(|&(k, c, r)| k < 4 && (p[k] - c).abs() < r);
        if excluded {
            rejected += 1;
            if rejected > MAX_REJECTIONS_PER_POINT * cfg.sampling.count {
                return Err(ConfigError::Invalid("exclusion radii leave no room to sample".into()));
            }
            continue;
        }
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> CampaignConfig {
        CampaignConfig::from_json(&format!(
            r#"{{"schema": "phe-config/1", "family": {{"tag": "TypeD-pmmm", "b0": 1.0}}, "params": {{"mu0": 1.0}},
                "sampling": {{"count": 50, "seed": 11 {extra}}}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn reproducible_and_inside_the_box() {
        let c = cfg("");
        let a = sample_points(&c, Chart::Hyperheavenly).unwrap();
        let b = sample_points(&c, Chart::Hyperheavenly).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| (0.5..2.0).contains(&p[2]) && (-1.0..1.0).contains(&p[3])));
    }

    #[test]
    fn exclusions_are_respected() {
        let c = cfg(r#", "exclusions": [{"axis": "y", "center": 0.0, "radius": 0.3}]"#);
        let pts = sample_points(&c, Chart::Hyperheavenly).unwrap();
        assert!(pts.iter().all(|p| p[3].abs() >= 0.3));
        let c = cfg(r#", "exclusions": [{"axis": "y", "center": 0.0, "radius": 5.0}]"#);
        assert!(sample_points(&c, Chart::Hyperheavenly).is_err());
    }
}
