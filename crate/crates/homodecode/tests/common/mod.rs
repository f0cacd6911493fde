#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use homodecode::formats::{write_embeddings, write_emissions, write_lexicon, write_vocab};
use homodecode::harness::{Resources, Utterance};
use homodecode_core::{
    EmbeddingTable, EmissionMatrix, GlyphCodeTable, JyutpingCode, Lexicon, NGramBuilder,
    NGramModel, Vocabulary,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const HOMOPHONE_ROWS: [(&str, &str); 3] = [
    ("zo2", "左阻俎柤詛座"),
    ("sai3", "世細勢婿貰些僿埶楴"),
    ("wong4", "王黃皇簧煌蝗惶磺凰"),
];

pub const VARIANT_ROWS: [(&str, &str); 3] =
    [("zoeng3", "帳賬"), ("lei5", "裏裡"), ("zeng6", "淨凈")];

pub fn code(s: &str) -> JyutpingCode {
    s.parse().unwrap()
}

pub fn table1_lexicon() -> Lexicon {
    let mut lex = Lexicon::new();
    for (c, chars) in HOMOPHONE_ROWS.iter().chain(&VARIANT_ROWS) {
        for ch in chars.chars() {
            lex.insert(ch, code(c));
        }
    }
    lex
}

pub fn vocabulary(tokens: &[String]) -> Vocabulary {
    let mut all = vec!["<blank>".to_string()];
    all.extend(tokens.iter().cloned());
    Vocabulary::new(all, 0).unwrap()
}

pub fn write_file(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

pub fn save_vocab(path: &Path, vocab: &Vocabulary) {
    write_vocab(BufWriter::new(File::create(path).unwrap()), vocab).unwrap();
}

pub fn save_lexicon(path: &Path, lex: &Lexicon) {
    write_lexicon(BufWriter::new(File::create(path).unwrap()), lex).unwrap();
}

pub fn save_emissions(path: &Path, m: &EmissionMatrix) {
    write_emissions(BufWriter::new(File::create(path).unwrap()), m).unwrap();
}

pub fn save_embeddings(path: &Path, t: &EmbeddingTable) {
    write_embeddings(BufWriter::new(File::create(path).unwrap()), t).unwrap();
}

pub fn normalized(rows: Vec<Vec<f64>>) -> EmissionMatrix {
    let rows: Vec<Vec<f64>> = rows
        .into_iter()
        .map(|r| {
            let s: f64 = r.iter().sum();
            r.into_iter().map(|x| x / s).collect()
        })
        .collect();
    EmissionMatrix::from_probabilities(&rows).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, frames: usize, v: usize) -> EmissionMatrix {
    normalized(
        (0..frames)
            .map(|_| (0..v).map(|_| rng.random_range(0.01..1.0)).collect())
            .collect(),
    )
}

/// Posterior of every collapsed transcript, summing all `V^T` alignments.
pub fn enumerate_paths(m: &EmissionMatrix, blank: usize) -> BTreeMap<Vec<u32>, f64> {
    let (t_len, v) = (m.frames(), m.vocab_size());
    let mut out = BTreeMap::new();
    let mut path = vec![0usize; t_len];
    loop {
        let prob: f64 = path
            .iter()
            .enumerate()
            .map(|(t, &k)| m.prob(t, k))
            .product();
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

/// Best transcript under `ln P_ctc + alpha ln10 lm + beta len`, by brute force.
pub fn fused_oracle(
    m: &EmissionMatrix,
    vocab: &Vocabulary,
    lm: &NGramModel,
    alpha: f64,
    beta: f64,
) -> String {
    let mut best: Option<(f64, String)> = None;
    for (tokens, p) in enumerate_paths(m, vocab.blank_index()) {
        let names: Vec<&str> = tokens.iter().map(|&t| vocab.token(t as usize)).collect();
        let lm_score = lm.score_sequence(&names);
        let score = p.ln() + alpha * std::f64::consts::LN_10 * lm_score + beta * names.len() as f64;
        let text = names.concat();
        if best
            .as_ref()
            .is_none_or(|(s, t)| score > *s || (score == *s && text < *t))
        {
            best = Some((score, text));
        }
    }
    best.unwrap().1
}

/// Small decode setup: three characters, a bigram LM, and a 4-frame matrix.
pub struct ToyDecode {
    pub dir: PathBuf,
    pub vocab: PathBuf,
    pub lexicon: PathBuf,
    pub empty_lexicon: PathBuf,
    pub lm: PathBuf,
    pub emissions: PathBuf,
}

pub const TOY_ARPA: &str = "\\data\\
ngram 1=5
ngram 2=3

\\1-grams:
-99\t<s>\t-0.3
-1.0\t</s>
-0.7\t王\t-0.2
-0.9\t黃\t-0.1
-1.2\t細\t0.0

\\2-grams:
-0.2\t<s> 王
-0.15\t王 細
-0.6\t黃 細

\\end\\
";

pub fn toy_decode(dir: &Path) -> ToyDecode {
    let vocab = vocabulary(&["王".into(), "黃".into(), "細".into()]);
    let lex = Lexicon::from_entries([
        ('王', code("wong4")),
        ('黃', code("wong4")),
        ('細', code("sai3")),
    ]);
    let m = normalized(vec![
        vec![0.1, 0.45, 0.4, 0.05],
        vec![0.5, 0.2, 0.2, 0.1],
        vec![0.2, 0.05, 0.05, 0.7],
        vec![0.6, 0.1, 0.1, 0.2],
    ]);
    let t = ToyDecode {
        dir: dir.to_path_buf(),
        vocab: dir.join("vocab.txt"),
        lexicon: dir.join("lexicon.tsv"),
        empty_lexicon: dir.join("empty.tsv"),
        lm: dir.join("lm.arpa"),
        emissions: dir.join("utt.emat"),
    };
    save_vocab(&t.vocab, &vocab);
    save_lexicon(&t.lexicon, &lex);
    write_file(&t.empty_lexicon, "");
    write_file(&t.lm, TOY_ARPA);
    save_emissions(&t.emissions, &m);
    t
}

/// Glyph codes, embeddings, and lexicon modelled on the Table 1 rows.
///
/// Variant pairs differ in one of four code letters in each method and
/// have near-parallel vectors. 左/阻 have similar vectors but unrelated
/// glyphs; 王/皇 have similar glyphs but orthogonal vectors.
pub struct UwFixture {
    pub lexicon: Lexicon,
    pub glyphs: Vec<GlyphCodeTable>,
    pub embeddings: EmbeddingTable,
}

pub const EXTRA_CHARS: &str = "面有人佢喺目單乾我屋";

fn spread_code(k: usize, method: usize) -> String {
    (0..4)
        .map(|j| (b'a' + ((k * 3 + j * 7 + method * 5) % 26) as u8) as char)
        .collect()
}

pub fn uw_fixture() -> UwFixture {
    let lexicon = table1_lexicon();
    let mut glyphs = vec![
        GlyphCodeTable::new("Changjei5"),
        GlyphCodeTable::new("4Corner5"),
    ];
    let mut embeddings = EmbeddingTable::new(8);
    let homophones: Vec<char> = HOMOPHONE_ROWS.iter().flat_map(|(_, s)| s.chars()).collect();
    for (k, &c) in homophones.iter().enumerate() {
        for (m, table) in glyphs.iter_mut().enumerate() {
            table.insert(c, &spread_code(k, m)).unwrap();
        }
        let mut v = vec![0.05; 8];
        v[k % 8] = 1.0;
        v[(k + 3) % 8] += 0.5;
        embeddings.insert(c, v).unwrap();
    }
    // 皇 one letter away from 王 in both methods
    for (m, table) in glyphs.iter_mut().enumerate() {
        let mut near = spread_code(15, m).into_bytes();
        near[0] = b'z';
        table
            .insert('皇', std::str::from_utf8(&near).unwrap())
            .unwrap();
    }
    // 阻 parallel to 左
    embeddings
        .insert('阻', embeddings.get('左').unwrap().to_vec())
        .unwrap();
    let variant_codes = [
        (["lbsv", "4123"], ["bbsv", "6123"]),
        (["jbnd", "6010"], ["ybnd", "6011"]),
        (["enbd", "3215"], ["inbd", "3115"]),
    ];
    for (i, ((_, chars), (a, b))) in VARIANT_ROWS.iter().zip(variant_codes).enumerate() {
        let mut it = chars.chars();
        let (x, y) = (it.next().unwrap(), it.next().unwrap());
        for (m, table) in glyphs.iter_mut().enumerate() {
            table.insert(x, a[m]).unwrap();
            table.insert(y, b[m]).unwrap();
        }
        let mut v = vec![0.0; 8];
        v[(2 * i + 1) % 8] = 1.0;
        embeddings.insert(x, v.clone()).unwrap();
        v[(2 * i + 4) % 8] = 0.05;
        embeddings.insert(y, v).unwrap();
    }
    for (i, c) in EXTRA_CHARS.chars().enumerate() {
        let mut v = vec![0.0; 8];
        v[i % 8] = 1.0;
        v[(i + 5) % 8] = -0.7;
        embeddings.insert(c, v).unwrap();
    }
    UwFixture {
        lexicon,
        glyphs,
        embeddings,
    }
}

pub struct UwFiles {
    pub lexicon: PathBuf,
    pub cin_dir: PathBuf,
    pub embeddings: PathBuf,
}

pub fn write_cin(path: &Path, table: &GlyphCodeTable) {
    let mut text = format!("%ename {}\n%chardef begin\n", table.method());
    for (c, codes) in table.iter() {
        for code in codes {
            text.push_str(&format!("{code}\t{c}\n"));
        }
    }
    text.push_str("%chardef end\n");
    write_file(path, &text);
}

pub fn write_uw_fixture(dir: &Path) -> UwFiles {
    let fx = uw_fixture();
    let files = UwFiles {
        lexicon: dir.join("lexicon.tsv"),
        cin_dir: dir.join("cin"),
        embeddings: dir.join("embeddings.txt"),
    };
    fs::create_dir_all(&files.cin_dir).unwrap();
    save_lexicon(&files.lexicon, &fx.lexicon);
    for table in &fx.glyphs {
        write_cin(
            &files.cin_dir.join(format!("{}.cin", table.method())),
            table,
        );
    }
    save_embeddings(&files.embeddings, &fx.embeddings);
    files
}

/// Base-26 spelling of `n`, for synthetic syllables.
pub fn letters(mut n: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (n % 26) as u8);
        n /= 26;
        if n == 0 {
            break;
        }
    }
    String::from_utf8(out).unwrap()
}

/// Synthetic lexicon of `size` characters spread over `families` codes
/// with perturbed glyph codes and vectors.
pub fn synthetic_uw(seed: u64, size: usize, families: usize) -> UwFixture {
    const SYLLABLES: [&str; 12] = [
        "lei", "zo", "wong", "sai", "zeng", "zoeng", "gwong", "si", "jyun", "hoeng", "caak", "mou",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lexicon = Lexicon::new();
    let mut glyphs = vec![
        GlyphCodeTable::new("Changjei5"),
        GlyphCodeTable::new("4Corner5"),
    ];
    let mut embeddings = EmbeddingTable::new(4);
    let families = families.max(1);
    let code_of = |f: usize| {
        let syllable = format!("{}{}", SYLLABLES[f % 12], letters(f / 72));
        JyutpingCode::new(&syllable, (f / 12 % 6) as u8 + 1).unwrap()
    };
    for i in 0..size {
        let c = char::from_u32(0x4E00 + i as u32).unwrap();
        let family = rng.random_range(0..families);
        lexicon.insert(c, code_of(family));
        if rng.random_bool(0.08) {
            lexicon.insert(c, code_of(rng.random_range(0..families)));
        }
        let shape = rng.random_range(0..4usize);
        for (m, table) in glyphs.iter_mut().enumerate() {
            if rng.random_bool(0.1) {
                continue;
            }
            let mut proto =
                format!("{:04}", (family * 7 + shape * 13 + m * 3) % 10000).into_bytes();
            if rng.random_bool(0.5) {
                proto[rng.random_range(0..4)] = b'a' + rng.random_range(0..3);
            }
            table
                .insert(c, std::str::from_utf8(&proto).unwrap())
                .unwrap();
        }
        if rng.random_bool(0.9) {
            let base = [
                shape as f64 + 1.0,
                (family as f64 * 0.7).sin(),
                0.5,
                (shape as f64).cos(),
            ];
            let v: Vec<f64> = base
                .iter()
                .map(|x| x + rng.random_range(-0.5..0.5))
                .collect();
            if v.iter().any(|&x| x != 0.0) {
                embeddings.insert(c, v).unwrap();
            }
        }
    }
    UwFixture {
        lexicon,
        glyphs,
        embeddings,
    }
}

/// Rare characters whose frequent homophone carries the emission mass.
pub const RARE: [(char, char); 13] = [
    ('俎', '左'),
    ('柤', '左'),
    ('詛', '左'),
    ('貰', '世'),
    ('僿', '世'),
    ('埶', '世'),
    ('楴', '世'),
    ('簧', '王'),
    ('煌', '王'),
    ('蝗', '王'),
    ('惶', '王'),
    ('磺', '王'),
    ('凰', '王'),
];

/// One context character per utterance, so each reference bigram is unique.
pub const CONTEXTS: &str = "天日月山水火木金土春夏秋冬東南西北風雨雲雪花草樹林江河海湖石田米竹羊牛馬魚鳥雞豬狗貓龍虎父母兄弟姊妹";

/// Tokens that soak up the rest of the emission mass, enough of them to
/// push a low-mass character out of a 20-wide beam.
pub const DISTRACTORS: &str = "的一是不了在他這中大來上國個到說們為子和你地出道也";

/// The homophone-extension suite: 50 two-character utterances
/// `context + rare` whose rare character gets almost no emission mass
/// while its frequent homophone gets most of it. The LM favors every
/// reference bigram.
pub fn he_suite(seed: u64) -> (Resources, Vec<Utterance>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicon = table1_lexicon();
    let mut chars: Vec<char> = Vec::new();
    for c in lexicon
        .characters()
        .into_iter()
        .chain(CONTEXTS.chars())
        .chain(DISTRACTORS.chars())
    {
        if !chars.contains(&c) {
            chars.push(c);
        }
    }
    let vocab = vocabulary(&chars.iter().map(|c| c.to_string()).collect::<Vec<_>>());
    let combos: Vec<(char, char, char)> = CONTEXTS
        .chars()
        .enumerate()
        .map(|(i, ctx)| (ctx, RARE[i % RARE.len()].0, RARE[i % RARE.len()].1))
        .collect();

    let mut lm = NGramBuilder::new(2).unwrap();
    lm.insert(&["<s>"], -99.0, 0.0).unwrap();
    lm.insert(&["</s>"], -1.5, 0.0).unwrap();
    lm.insert(&["<unk>"], -6.0, 0.0).unwrap();
    for &c in &chars {
        let s = c.to_string();
        let (p, bow) = if CONTEXTS.contains(c) {
            (-1.0, -0.5)
        } else if RARE.iter().any(|&(r, _)| r == c) {
            (-4.0, 0.0)
        } else if DISTRACTORS.contains(c) {
            (-2.0, 0.0)
        } else {
            (-1.5, 0.0)
        };
        lm.insert(&[s.as_str()], p, bow).unwrap();
    }
    for ctx in CONTEXTS.chars() {
        lm.insert(&["<s>", &ctx.to_string()], -0.3, 0.0).unwrap();
    }
    for &(ctx, rare, _) in &combos {
        lm.insert(&[&ctx.to_string(), &rare.to_string()], -0.05, 0.0)
            .unwrap();
    }
    let lm = lm.build().unwrap();

    let v = vocab.len();
    let idx = |c: char| vocab.index_of_char(c).unwrap();
    let utterances = combos
        .iter()
        .enumerate()
        .map(|(i, &(ctx, rare, frequent))| {
            let floor = 1e-6;
            let frame = |peaks: &[(usize, f64)]| {
                let mut row = vec![floor; v];
                for &(k, p) in peaks {
                    row[k] = p;
                }
                row
            };
            let mut word = frame(&[
                (idx(frequent), rng.random_range(0.45..0.65)),
                (idx(rare), 1e-4),
                (0, 0.02),
            ]);
            for d in DISTRACTORS.chars() {
                word[idx(d)] = rng.random_range(0.012..0.02);
            }
            let rows = vec![
                frame(&[(idx(ctx), 0.9), (0, 0.05)]),
                frame(&[(0, 0.9), (idx(ctx), 0.05)]),
                word,
                frame(&[(0, 0.95)]),
            ];
            Utterance {
                id: format!("he{i:02}"),
                reference: format!("{ctx}{rare}"),
                emissions: normalized(rows),
                uw_emissions: None,
            }
        })
        .collect();
    (Resources::new(vocab, lexicon, lm), utterances)
}
