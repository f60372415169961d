use amoebot_core::gen::random_blob;
use amoebot_core::grid::{Sign, N, S};
use amoebot_core::pasc::block_primitive;
use amoebot_core::skeleton::{canonical_skeleton, skeleton_path};
use amoebot_core::AmoebotWorld;

#[test]
fn block_primitive_on_skeleton_paths() {
    for seed in 0..40u64 {
        let n = 12 + (seed as usize % 5) * 6;
        let cells = random_blob(n, 0.1, 123_000 + seed);
        for d in [N, S] {
            let mut w = AmoebotWorld::load(cells.clone(), 4, 7).unwrap();
            let sk = canonical_skeleton(&mut w, d, Sign::Plus, 24).unwrap();
            let path = skeleton_path(&w, &sk);
            let m = path.len();
            if m < 8 {
                continue;
            }
            let lambda = 2 * (amoebot_core::pasc::ceil_log2(m) + 2);
            if lambda > m {
                continue;
            }
            let out = block_primitive(&mut w, &path, lambda);
            match out {
                Ok(marks) => {
                    let k = marks.block_len;
                    for (i, &mk) in marks.marks.iter().enumerate() {
                        assert_eq!(mk, i % k == 0, "seed={seed} d={d} m={m} i={i}");
                    }
                }
                Err(e) => panic!("seed={seed} d={d} m={m}: {e}"),
            }
        }
    }
}
