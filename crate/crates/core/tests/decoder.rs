use std::collections::BTreeMap;

use homodecode_core::{
    decode, homophone_adjusted_prob, Decoder, DecoderConfig, EmissionMatrix, HomophoneIndex,
    JyutpingCode, Lexicon, NGramBuilder, NGramModel, Vocabulary, LN_10,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vocab(tokens: &[&str]) -> Vocabulary {
    Vocabulary::new(tokens.iter().map(|s| s.to_string()).collect(), 0).unwrap()
}

fn exhaustive() -> DecoderConfig {
    DecoderConfig {
        beam_size: usize::MAX,
        alpha: 0.0,
        beta: 0.0,
        he_enabled: false,
        nbest: usize::MAX,
        rescore_enabled: false,
        ..DecoderConfig::default()
    }
}

/// Posterior of every collapsed transcript, by summing all `V^T` alignments.
fn enumerate_paths(m: &EmissionMatrix, blank: usize) -> BTreeMap<Vec<u32>, f64> {
    let (t_len, v) = (m.frames(), m.vocab_size());
    let mut out = BTreeMap::new();
    let mut path = vec![0usize; t_len];
    loop {
        let mut prob = 1.0;
        for (t, &k) in path.iter().enumerate() {
            prob *= m.row(t)[k].exp();
        }
        let mut collapsed = Vec::new();
        let mut prev = None;
        for &k in &path {
            if Some(k) != prev && k != blank {
                collapsed.push(k as u32);
            }
            prev = Some(k);
        }
        *out.entry(collapsed).or_insert(0.0) += prob;

        let mut pos = 0;
        loop {
            if pos == t_len {
                return out;
            }
            path[pos] += 1;
            if path[pos] < v {
                break;
            }
            path[pos] = 0;
            pos += 1;
        }
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, frames: usize, v: usize) -> EmissionMatrix {
    let rows: Vec<Vec<f64>> = (0..frames)
        .map(|_| {
            let raw: Vec<f64> = (0..v).map(|_| rng.random_range(0.01..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / sum).collect()
        })
        .collect();
    EmissionMatrix::from_probabilities(&rows).unwrap()
}

#[test]
fn blank_only_frame_keeps_prefix() {
    let v = vocab(&["<b>", "a"]);
    let lm = NGramModel::empty();
    let index = HomophoneIndex::default();
    let dec = Decoder::new(&v, &index, &lm, exhaustive()).unwrap();
    let m = EmissionMatrix::from_probabilities(&[vec![1.0, 0.0]]).unwrap();
    let out = dec.ctc_step(&dec.initial_beam(), m.row(0));
    assert_eq!(out.len(), 1);
    assert!(out[0].prefix.is_empty());
    assert_eq!(out[0].p_blank, 0.0);
    assert_eq!(out[0].p_nonblank, f64::NEG_INFINITY);
}

#[test]
fn uniform_frame_branches_two_ways() {
    let v = vocab(&["<b>", "A"]);
    let lm = NGramModel::empty();
    let index = HomophoneIndex::default();
    let dec = Decoder::new(&v, &index, &lm, exhaustive()).unwrap();
    let m = EmissionMatrix::from_probabilities(&[vec![0.5, 0.5]]).unwrap();
    let out = dec.ctc_step(&dec.initial_beam(), m.row(0));
    let prefixes: Vec<String> = out.iter().map(|h| dec.transcript(&h.prefix)).collect();
    assert_eq!(prefixes, vec!["", "A"]);
    for h in &out {
        assert!((h.acoustic_score() - 0.5f64.ln()).abs() < 1e-12);
    }
}

#[test]
fn two_frame_posteriors_match_enumeration() {
    let v = vocab(&["<b>", "a", "b"]);
    let lm = NGramModel::empty();
    let index = HomophoneIndex::default();
    let m =
        EmissionMatrix::from_probabilities(&[vec![0.2, 0.5, 0.3], vec![0.4, 0.35, 0.25]]).unwrap();
    let result = decode(&m, &v, &index, &lm, &exhaustive()).unwrap();
    let oracle = enumerate_paths(&m, 0);
    assert_eq!(result.nbest.len(), oracle.len());
    for entry in &result.nbest {
        let expected = oracle[&entry.tokens];
        assert!((entry.acoustic_score.exp() - expected).abs() < 1e-12);
    }
    let total: f64 = oracle.values().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn all_blank_decodes_to_empty() {
    let v = vocab(&["<b>", "a"]);
    let lm = NGramModel::empty();
    let m = EmissionMatrix::from_probabilities(&[vec![1.0, 0.0]]).unwrap();
    let result = decode(
        &m,
        &v,
        &HomophoneIndex::default(),
        &lm,
        &DecoderConfig::default(),
    )
    .unwrap();
    assert_eq!(result.best_transcript(), "");
}

#[test]
fn empty_matrix_is_an_error() {
    let v = vocab(&["<b>", "a"]);
    let m = EmissionMatrix::new(0, 2, vec![]).unwrap();
    let err = decode(
        &m,
        &v,
        &HomophoneIndex::default(),
        &NGramModel::empty(),
        &DecoderConfig::default(),
    );
    assert_eq!(
        err.unwrap_err(),
        homodecode_core::DecodeError::EmptyEmissions
    );
}

#[test]
fn repeats_need_a_blank() {
    let v = vocab(&["<b>", "a"]);
    let lm = NGramModel::empty();
    let m = EmissionMatrix::from_probabilities(&[
        vec![0.0, 1.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, 1.0],
    ])
    .unwrap();
    let result = decode(&m, &v, &HomophoneIndex::default(), &lm, &exhaustive()).unwrap();
    assert_eq!(result.best_transcript(), "aa");
    assert_eq!(result.nbest.len(), 1);
}

#[test]
fn random_small_matrices_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lm = NGramModel::empty();
    let index = HomophoneIndex::default();
    for case in 0..200 {
        let t = rng.random_range(1..=4);
        let vsize = rng.random_range(2..=4);
        let names = ["<b>", "a", "b", "c"];
        let v = vocab(&names[..vsize]);
        let m = random_matrix(&mut rng, t, vsize);
        let oracle = enumerate_paths(&m, 0);
        let result = decode(&m, &v, &index, &lm, &exhaustive()).unwrap();
        let (best, best_p) = oracle
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .unwrap();
        let top = result.best().unwrap();
        assert_eq!(&top.tokens, best, "case {case}");
        assert!(
            (top.acoustic_score.exp() - best_p).abs() < 1e-9,
            "case {case}"
        );
    }
}

fn he_fixture() -> (Vocabulary, HomophoneIndex, NGramModel) {
    // 哲 is the frequent, acoustically strong form; 折 shares zit3 but the LM prefers it
    let v = vocab(&["<b>", "哲", "折"]);
    let code: JyutpingCode = "zit3".parse().unwrap();
    let lex = Lexicon::from_entries([('哲', code.clone()), ('折', code)]);
    let mut b = NGramBuilder::new(1).unwrap();
    b.insert(&["哲"], -1.0, 0.0).unwrap();
    b.insert(&["折"], -0.5, 0.0).unwrap();
    (v, HomophoneIndex::build(&lex), b.build().unwrap())
}

#[test]
fn homophone_outranks_source_after_fusion() {
    let (v, index, lm) = he_fixture();
    let m = EmissionMatrix::from_probabilities(&[vec![0.1, 0.6, 0.3]]).unwrap();
    let base = DecoderConfig {
        beam_size: 1,
        rescore_enabled: false,
        he_enabled: false,
        ..DecoderConfig::default()
    };
    let w = 0.45 * LN_10;
    let fused_c = 0.6f64.ln() - w + 1.55;
    let fused_h_organic = 0.3f64.ln() + w * -0.5 + 1.55;
    // p(h) = max(0.6, 0.5 * 0.6 + 0.5 * 0.3 * 1)
    let fused_h_injected = 0.6f64.ln() + w * -0.5 + 1.55;
    assert!(fused_c > fused_h_organic && fused_h_injected > fused_c);

    let off = decode(&m, &v, &index, &lm, &base).unwrap();
    assert_eq!(off.best_transcript(), "哲");
    assert!((off.best().unwrap().fused_score - fused_c).abs() < 1e-9);
    assert!(off.he_injections.is_empty());

    let on = decode(
        &m,
        &v,
        &index,
        &lm,
        &DecoderConfig {
            he_enabled: true,
            ..base
        },
    )
    .unwrap();
    assert_eq!(on.best_transcript(), "折");
    assert!((on.best().unwrap().fused_score - fused_h_injected).abs() < 1e-9);
    assert_eq!(on.best().unwrap().injected_positions, vec![0]);
    assert_eq!(on.he_injections.len(), 1);
    let rec = &on.he_injections[0];
    assert_eq!((rec.step, rec.source, rec.injected), (0, '哲', '折'));
    assert!((rec.prob - 0.6).abs() < 1e-12);
    assert_eq!(
        rec.prob,
        homophone_adjusted_prob(0.6f64.min(m.prob(0, 1)), m.prob(0, 2), 1, 0.5).unwrap()
    );
}

#[test]
fn he_disabled_matches_plain_step_loop() {
    let (v, index, lm) = he_fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_matrix(&mut rng, 6, 3);
    let cfg = DecoderConfig {
        he_enabled: false,
        beam_size: 3,
        nbest: 3,
        ..DecoderConfig::default()
    };
    let dec = Decoder::new(&v, &index, &lm, cfg.clone()).unwrap();
    let mut beam = dec.initial_beam();
    for frame in m.rows() {
        beam = dec.ctc_step(&beam, frame);
    }
    let manual = dec.finish(beam);
    let full = decode(&m, &v, &index, &lm, &cfg).unwrap();
    assert_eq!(full.nbest, manual);
    assert!(full.he_injections.is_empty());
}

#[test]
fn empty_index_makes_he_vacuous() {
    let (v, _, lm) = he_fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = random_matrix(&mut rng, 5, 3);
    let index = HomophoneIndex::default();
    let on = decode(&m, &v, &index, &lm, &DecoderConfig::default()).unwrap();
    let off = decode(
        &m,
        &v,
        &index,
        &lm,
        &DecoderConfig {
            he_enabled: false,
            ..DecoderConfig::default()
        },
    )
    .unwrap();
    assert_eq!(on, off);
}

#[test]
fn table_homophones_inject_up_to_eight_siblings() {
    let chars: Vec<char> = "王黃皇簧煌蝗惶磺凰".chars().collect();
    let code: JyutpingCode = "wong4".parse().unwrap();
    let lex = Lexicon::from_entries(chars.iter().map(|&c| (c, code.clone())));
    let index = HomophoneIndex::build(&lex);
    let mut tokens = vec!["<b>".to_string()];
    tokens.extend(chars.iter().map(|c| c.to_string()));
    let v = Vocabulary::new(tokens, 0).unwrap();
    let mut row = vec![0.01; 10];
    row[0] = 0.1;
    row[1] = 0.82;
    let m = EmissionMatrix::from_probabilities(&[row]).unwrap();
    let result = decode(
        &m,
        &v,
        &index,
        &NGramModel::empty(),
        &DecoderConfig::default(),
    )
    .unwrap();
    let from_wong: Vec<_> = result
        .he_injections
        .iter()
        .filter(|r| r.source == '王')
        .collect();
    assert_eq!(from_wong.len(), 8);
    assert!(from_wong.iter().all(|r| r.injected != '王'));
}

#[test]
fn decode_is_deterministic() {
    let (v, index, lm) = he_fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = random_matrix(&mut rng, 8, 3);
    let cfg = DecoderConfig {
        nbest: 5,
        ..DecoderConfig::default()
    };
    let a = decode(&m, &v, &index, &lm, &cfg).unwrap();
    let b = decode(&m, &v, &index, &lm, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn incremental_lm_matches_rescoring() {
    let v = vocab(&["<b>", "a", "b", "c"]);
    let mut b = NGramBuilder::new(2).unwrap();
    for (t, p, bow) in [
        ("a", -0.7, -0.3),
        ("b", -0.6, -0.1),
        ("c", -0.9, 0.0),
        ("<s>", -99.0, -0.2),
    ] {
        b.insert(&[t], p, bow).unwrap();
    }
    b.insert(&["a", "b"], -0.1, 0.0).unwrap();
    b.insert(&["<s>", "a"], -0.2, 0.0).unwrap();
    let lm = b.build().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = random_matrix(&mut rng, 6, 4);
    let cfg = DecoderConfig {
        nbest: 5,
        rescore_enabled: false,
        ..DecoderConfig::default()
    };
    let result = decode(&m, &v, &HomophoneIndex::default(), &lm, &cfg).unwrap();
    for e in &result.nbest {
        let toks: Vec<&str> = e
            .transcript
            .chars()
            .map(|c| match c {
                'a' => "a",
                'b' => "b",
                _ => "c",
            })
            .collect();
        assert!((e.lm_score - lm.score_sequence(&toks)).abs() < 1e-9);
        let fused = e.acoustic_score + 0.45 * LN_10 * e.lm_score + 1.55 * toks.len() as f64;
        assert!((e.fused_score - fused).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn dominance_and_monotonicity(a in 0.0f64..=1.0, q1 in 0.0f64..=1.0, q2 in 0.0f64..=1.0, n in 1u32..30, g in 0.0f64..=1.0) {
        let p1 = homophone_adjusted_prob(a, q1, n, g).unwrap();
        prop_assert!(p1 >= a);
        prop_assert!(p1 <= 1.0 + 1e-15);
        if n < 10 {
            let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
            prop_assert!(homophone_adjusted_prob(a, lo, n, g).unwrap() <= homophone_adjusted_prob(a, hi, n, g).unwrap());
        }
    }

    #[test]
    fn smaller_beam_never_beats_larger(seed in 0u64..500, small in 1usize..4) {
        let (v, index, lm) = he_fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, 5, 3);
        let run = |b: usize| {
            let cfg = DecoderConfig { beam_size: b, he_enabled: false, rescore_enabled: false, ..DecoderConfig::default() };
            decode(&m, &v, &index, &lm, &cfg).unwrap().best().unwrap().fused_score
        };
        prop_assert!(run(small) <= run(usize::MAX) + 1e-9);
    }
}
