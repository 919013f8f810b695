//! Deterministic synthetic tweet corpora with exact class counts.
//!
//! Negative tweets never contain a drug name from [`DRUG_NAMES`], so a
//! gazetteer built from these names recovers the gold mentions exactly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AnnotatedTweet, Corpus, Mention, Tweet};
use crate::text::char_len;

pub const DRUG_NAMES: &[&str] = &[
    "tylenol", "advil", "zofran", "benadryl", "ibuprofen", "acetaminophen", "aspirin", "motrin",
    "unisom", "zyrtec", "claritin", "sudafed", "tums", "pepcid", "zantac", "prenatal vitamins",
    "folic acid", "vitamin d", "fish oil", "iron pills", "diclegis", "metformin", "insulin",
    "prozac", "zoloft", "lexapro", "amoxicillin", "percocet", "vicodin", "nyquil", "dayquil",
    "mucinex", "robitussin", "colace", "miralax", "gaviscon", "rolaids", "magnesium", "melatonin",
    "epidural",
];

const OPENERS: &[&str] = &[
    "just took", "need some", "doctor said try", "cant believe i forgot my", "out of",
    "husband bought me", "finally got", "is it safe to take", "thank god for", "ran to the store for",
];

const CLOSERS: &[&str] = &[
    "today", "before bed", "and feel better", "lol", "#pregnancy", "at 3am", "for this headache",
    "again", "with breakfast", "😩",
];

const NEGATIVE: &[&str] = &[
    "baby kicked all night", "cannot wait to meet her", "nursery is finally done",
    "craving pickles and ice cream", "22 weeks today", "so tired of this heat", "nesting mode on",
    "bump photo time", "ultrasound tomorrow", "my feet are swollen", "who else cant sleep",
    "hospital bag packed", "first time mom here", "gender reveal was a blast", "tea and rest",
];

const DECORATIONS: &[&str] = &["", "", "", " 💊", " ❤️", " $ ", " ~", " @mom", " 🤰🏽"];

/// Shape of a synthetic corpus.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub name: String,
    pub total: usize,
    pub positive: usize,
    /// Positive tweets carrying two mentions instead of one.
    pub multi_mention: usize,
    pub seed: u64,
    /// Names mentions are drawn from; defaults to [`DRUG_NAMES`].
    pub names: Vec<String>,
}

impl CorpusSpec {
    pub fn new(name: &str, total: usize, positive: usize, multi_mention: usize, seed: u64) -> Self {
        assert!(positive <= total && multi_mention <= positive);
        CorpusSpec {
            name: name.to_string(),
            total,
            positive,
            multi_mention,
            seed,
            names: DRUG_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn with_names<S: AsRef<str>>(mut self, names: &[S]) -> Self {
        self.names = names.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn build(&self) -> Corpus {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut kinds: Vec<u8> = std::iter::repeat_n(2u8, self.multi_mention)
            .chain(std::iter::repeat_n(1, self.positive - self.multi_mention))
            .chain(std::iter::repeat_n(0, self.total - self.positive))
            .collect();
        kinds.shuffle(&mut rng);

        let tweets = kinds
            .into_iter()
            .enumerate()
            .map(|(i, mentions)| {
                let mut tweet = synth_tweet(&mut rng, &self.names, mentions);
                tweet.0.id = format!("{}-{:06}", self.name, i);
                tweet.0.user_id = Some(format!("u{:03}", rng.random_range(0..212)));
                tweet.0.created_at = Some(format!("2020-{:02}-{:02}", rng.random_range(1..13), rng.random_range(1..29)));
                AnnotatedTweet::new(tweet.0, tweet.1, None).expect("synthetic spans are valid")
            })
            .collect();
        Corpus::new(self.name.clone(), tweets).expect("synthetic ids are unique")
    }
}

fn pick<'a, R: Rng>(rng: &mut R, items: &'a [&'a str]) -> &'a str {
    items[rng.random_range(0..items.len())]
}

fn synth_tweet<R: Rng>(rng: &mut R, names: &[String], mentions: u8) -> (Tweet, Vec<Mention>) {
    let mut text = String::new();
    let mut spans = Vec::new();
    if mentions == 0 {
        text.push_str(pick(rng, NEGATIVE));
        text.push_str(pick(rng, DECORATIONS));
        return (Tweet::new("", text), spans);
    }
    text.push_str(pick(rng, OPENERS));
    for k in 0..mentions {
        text.push_str(if k == 0 { " " } else { " and " });
        let name = &names[rng.random_range(0..names.len())];
        let start = char_len(&text);
        text.push_str(name);
        spans.push(Mention::new(start, start + char_len(name), name.clone()));
    }
    text.push(' ');
    text.push_str(pick(rng, CLOSERS));
    text.push_str(pick(rng, DECORATIONS));
    (Tweet::new("", text), spans)
}

/// The four corpora of the dataset statistics table, at full size.
pub fn table1_specs() -> Vec<CorpusSpec> {
    vec![
        CorpusSpec::new("TrainTask3.0", 49992, 115, 7, 30),
        CorpusSpec::new("TrainTask3.1", 38996, 103, 8, 31),
        CorpusSpec::new("ValTask3", 38137, 93, 11, 3),
        CorpusSpec::new("SMM4H18_Train", 9622, 4975, 677, 18),
    ]
}
