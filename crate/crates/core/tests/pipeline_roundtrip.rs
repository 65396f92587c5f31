//! Property tests of the full pipeline across layouts, seed placements and ciphers.

use nuhuncc::bits::BitMatrix;
use nuhuncc::cipher::{BlockCipher, GoppaParams, McEliece, McElieceKeyPair, NullCipher, ToyXorCipher};
use nuhuncc::gf::FieldSpec;
use nuhuncc::is_channel::{ISCode, LinearISCode};
use nuhuncc::pipeline::{
    bytes_from_frames, decode_all, decode_bytes, encode_all, encode_bytes, eve_observe, frames_from_bytes,
    EncryptionLayout, EveMode, PipelineConfig, SeedPlacement, Transmission,
};
use nuhuncc::polar::{construct_profile, SourceModel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::{Arc, OnceLock};

fn mceliece() -> Arc<dyn BlockCipher> {
    static KEY: OnceLock<McElieceKeyPair> = OnceLock::new();
    let pair = KEY.get_or_init(|| McElieceKeyPair::generate(GoppaParams::new(6, 64, 4).unwrap(), 9).unwrap());
    Arc::new(McEliece::from_pair(pair.clone()))
}

fn config(
    ell: usize,
    c: usize,
    layout: EncryptionLayout,
    seed: SeedPlacement,
    cipher_kind: u8,
    p: f64,
) -> PipelineConfig {
    let mu = ell as u32;
    let prof = Arc::new(construct_profile(SourceModel::new(p).unwrap(), 128, 0.3, 1000, 4).unwrap());
    let code = Arc::new(ISCode::Linear(LinearISCode::build(&FieldSpec::binary(mu).unwrap(), ell, c, 2).unwrap()));
    let cipher: Arc<dyn BlockCipher> = match (cipher_kind, layout) {
        (_, EncryptionLayout::Symbol) => Arc::new(ToyXorCipher::new(c * mu as usize, 5)),
        (0, _) => Arc::new(NullCipher::new(mu as usize)),
        (1, _) => Arc::new(ToyXorCipher::new(13, 5)),
        _ => mceliece(),
    };
    PipelineConfig::new(ell, c, code, prof, cipher, layout, seed).unwrap()
}

fn layout_of(i: u8) -> EncryptionLayout {
    [EncryptionLayout::Column, EncryptionLayout::Symbol, EncryptionLayout::Row][i as usize % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// With a uniform source nothing is compressed away, so every input round-trips.
    #[test]
    fn uniform_source_always_round_trips(
        ell in 2usize..=4,
        c_pick in 0usize..3,
        layout in 0u8..3,
        plain in any::<bool>(),
        cipher in 0u8..3,
        seed in any::<u64>(),
    ) {
        let c = 1 + c_pick % (ell - 1);
        let placement = if plain { SeedPlacement::Plaintext { link: ell - 1 } } else { SeedPlacement::default_for(c) };
        let cfg = config(ell, c, layout_of(layout), placement, cipher, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<u8>> = (0..ell).map(|_| SourceModel::new(0.5).unwrap().sample(128, &mut rng)).collect();
        let v = BitMatrix::from_rows(&rows).unwrap();
        let t = encode_all(&cfg, &v, &mut rng).unwrap();
        prop_assert!(cfg.accounting().identity_holds());
        let t = Transmission::from_bytes(&t.to_bytes()).unwrap();
        prop_assert_eq!(decode_all(&cfg, &t).unwrap(), v);
    }

    #[test]
    fn byte_payloads_round_trip(len in 0usize..200, seed in any::<u64>(), cipher in 0u8..3) {
        let cfg = config(3, 1, EncryptionLayout::Column, SeedPlacement::default_for(1), cipher, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<u8> = (0..len).map(|_| rand::Rng::gen(&mut rng)).collect();
        let (t, check) = encode_bytes(&cfg, &data, &mut rng).unwrap();
        prop_assert!(check.lossy_frames.is_empty());
        prop_assert_eq!(decode_bytes(&cfg, &t).unwrap(), data);
    }
}

#[test]
fn lossy_prediction_matches_decoding_and_taps_see_links() {
    let cfg = config(4, 1, EncryptionLayout::Column, SeedPlacement::default_for(1), 2, 0.02);
    let src = SourceModel::new(0.02).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let frames: Vec<BitMatrix> = (0..100)
        .map(|_| BitMatrix::from_rows(&(0..4).map(|_| src.sample(128, &mut rng)).collect::<Vec<_>>()).unwrap())
        .collect();
    let data = bytes_from_frames(&frames, 100 * 4 * 128 / 8);
    let (t, check) = encode_bytes(&cfg, &data, &mut rng).unwrap();
    assert_eq!(check.frames, 100);
    let decoded = frames_from_bytes(&decode_bytes(&cfg, &t).unwrap(), 4, 128).unwrap();
    let actual: Vec<usize> = (0..100).filter(|&f| decoded[f] != frames[f]).collect();
    assert_eq!(check.lossy_frames, actual);
    assert!(actual.len() < 50, "{} lossy frames", actual.len());

    let view = eve_observe(&t, &EveMode::It(vec![3, 1])).unwrap();
    assert_eq!(view.observed.iter().map(|(i, _)| *i).collect::<Vec<_>>(), vec![1, 3]);
    assert!(view.observed.iter().all(|(_, segs)| segs.len() == 100));
    assert_eq!(eve_observe(&t, &EveMode::Crypto).unwrap().observed.len(), 4);
}
