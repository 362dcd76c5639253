#![no_main]

use libfuzzer_sys::fuzz_target;
use zelf::Trajectory;

fuzz_target!(|data: &str| {
    if let Ok(file) = Trajectory::read_csv(data) {
        let t = &file.trajectory;
        assert!(t.samples.windows(2).all(|w| w[1].t > w[0].t));
        assert!(t.samples.iter().all(|s| file.params.cs.contains(s.r, s.z)));
        let mut buf = Vec::new();
        t.write_csv(&file.params, &file.comments, &mut buf).expect("write to memory");
        let back = Trajectory::read_csv(std::str::from_utf8(&buf).unwrap()).expect("roundtrip");
        assert_eq!(back.trajectory, file.trajectory);
    }
});
