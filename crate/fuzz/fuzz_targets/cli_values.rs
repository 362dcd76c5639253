#![no_main]

use libfuzzer_sys::fuzz_target;
use zelf::CrossSection;
use zelf_cli::config::{Grid, Schedule, Seed};

fuzz_target!(|data: &str| {
    if let Ok(s) = data.parse::<Schedule>() {
        assert_eq!(s.to_string().parse::<Schedule>().unwrap(), s);
        let v = s.values();
        assert_eq!(v.len(), s.n);
        assert!(v.windows(2).all(|w| w[1] <= w[0]));
    }
    if let Ok(g) = data.parse::<Grid>() {
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
    }
    if let Ok(p) = data.parse::<Seed>() {
        assert_eq!(p.to_string().parse::<Seed>().unwrap(), p);
    }
    if let Ok(cs) = data.parse::<CrossSection>() {
        assert_eq!(cs.label().parse::<CrossSection>().unwrap(), cs);
    }
});
