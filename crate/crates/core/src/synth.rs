//! Synthetic corpora with known structure, for tests, demos and fixtures.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::corpus::{Price, Review};
use crate::seed::{derive_seed, rng};

/// Six disjoint descriptor pools, one per archetype.
pub const ARCHETYPE_POOLS: [[&str; 10]; 6] = [
    [
        "blackberry",
        "cassis",
        "plum",
        "blueberry",
        "mulberry",
        "boysenberry",
        "currant",
        "bramble",
        "jam",
        "prune",
    ],
    [
        "lemon",
        "lime",
        "grapefruit",
        "zest",
        "citrus",
        "pith",
        "tangerine",
        "yuzu",
        "bergamot",
        "pomelo",
    ],
    [
        "smoky", "tobacco", "cigar", "leather", "earth", "tar", "charcoal", "ash", "peat", "forest",
    ],
    [
        "licorice",
        "anise",
        "clove",
        "pepper",
        "cinnamon",
        "nutmeg",
        "fennel",
        "sage",
        "thyme",
        "eucalyptus",
    ],
    [
        "violet",
        "rose",
        "jasmine",
        "lavender",
        "honeysuckle",
        "blossom",
        "lilac",
        "peony",
        "iris",
        "orchid",
    ],
    [
        "vanilla", "butter", "toast", "oak", "caramel", "cream", "brioche", "hazelnut", "coconut", "almond",
    ],
];

/// Structural words shared by every archetype.
const SHARED: [&str; 8] = ["ripe", "fresh", "bright", "firm", "soft", "long", "dense", "light"];

const WINERIES: [&str; 8] = [
    "Stone Ridge",
    "Vale Cellars",
    "Old Mill",
    "Casa Alta",
    "Red Fern",
    "Hollow Creek",
    "Maison Lune",
    "Bodega Sol",
];
const VARIETIES: [&str; 6] = ["Cabernet", "Riesling", "Syrah", "Grenache", "Pinot Noir", "Chardonnay"];
const PLACES: [(&str, &str); 5] = [
    ("US", "Napa Valley"),
    ("France", "Rhone"),
    ("Italy", "Tuscany"),
    ("Spain", "Rioja"),
    ("Australia", "Barossa"),
];

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub reviews: Vec<Review>,
    /// Generating archetype of every review.
    pub labels: Vec<usize>,
}

/// `n` reviews cycling through the six archetypes. Each text uses six
/// distinct descriptors from its archetype's pool, one or two shared
/// structural words and common filler. About one wine in 25 has no price.
pub fn archetype_corpus(n: usize, seed: u64) -> SyntheticCorpus {
    let mut gen = rng(derive_seed(seed, "archetype-corpus"));
    let mut reviews = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for id in 0..n {
        let label = id % ARCHETYPE_POOLS.len();
        let descriptors: Vec<&str> = ARCHETYPE_POOLS[label].choose_multiple(&mut gen, 6).copied().collect();
        let n_shared = gen.random_range(1..=2);
        let shared: Vec<&str> = SHARED.choose_multiple(&mut gen, n_shared).copied().collect();
        let review_text = format!(
            "A {} wine with {} and {} aromas. The palate offers {}, {} and {} with a {} {} finish.",
            shared[0],
            descriptors[0],
            descriptors[1],
            descriptors[2],
            descriptors[3],
            descriptors[4],
            shared.last().expect("one shared word"),
            descriptors[5],
        );
        let (country, region) = *PLACES.choose(&mut gen).expect("places");
        let winery = *WINERIES.choose(&mut gen).expect("wineries");
        let variety = VARIETIES[label];
        let vintage = (gen.random_range(0..10) > 0).then(|| gen.random_range(2000..=2020));
        let price = (gen.random_range(0..25) > 0)
            .then(|| Price::from_cents(gen.random_range(10..=150) * 100 + [0, 50, 99][gen.random_range(0..3)]))
            .flatten();
        let name = match vintage {
            Some(v) => format!("{winery} {v} {variety}"),
            None => format!("{winery} NV {variety}"),
        };
        reviews.push(Review {
            id,
            name,
            winery: winery.to_owned(),
            country: country.to_owned(),
            region: region.to_owned(),
            vintage,
            price,
            score: gen.random_range(80..=99),
            review_text,
        });
        labels.push(label);
    }
    SyntheticCorpus { reviews, labels }
}

/// Word themes of the toy embedding corpus. Words from different themes
/// never share a sentence.
pub const TOY_THEMES: [[&str; 5]; 2] = [
    ["smoky", "tobacco", "cigar", "leather", "campfire"],
    ["lemon", "lime", "zest", "grapefruit", "tart"],
];
const TOY_FILLER: [&str; 6] = ["glass", "bottle", "evening", "dinner", "friend", "table"];

/// Tokenized sentences alternating between the two themes, each mixing four
/// theme words with four filler words.
pub fn glove_toy_corpus(sentences: usize, seed: u64) -> Vec<Vec<String>> {
    let mut gen = rng(derive_seed(seed, "glove-toy"));
    (0..sentences)
        .map(|i| {
            let theme = &TOY_THEMES[i % TOY_THEMES.len()];
            let mut words: Vec<&str> = theme.choose_multiple(&mut gen, 4).copied().collect();
            words.extend(TOY_FILLER.choose_multiple(&mut gen, 4).copied());
            words.shuffle(&mut gen);
            words.into_iter().map(str::to_owned).collect()
        })
        .collect()
}
