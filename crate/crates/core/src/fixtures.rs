//! Published reference values: lost-gain aggregates of static rankings,
//! group-to-group mean gains, pretrained baseline accuracies, the off-the-shelf
//! RoBERTa model list with linear-probe and average gains, and the frozen
//! linear-probe to average-gain predictor.
//!
//! Values are transcribed verbatim and never modified at runtime.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossAggregate {
    /// Number of top-ranked models considered (`loss_k`).
    pub k: usize,
    pub avg: f64,
    pub max: f64,
    /// Targets with `loss_k > 1`.
    pub count_over_one: usize,
    pub n_targets: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineStat {
    pub dataset: &'static str,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffShelfModel {
    pub index: usize,
    /// Set label as printed (some labels contain a space before the suffix).
    pub set: &'static str,
    /// Hub name as printed; long names are truncated with `...`.
    pub name: &'static str,
    /// Average gain over the 14 General targets.
    pub avg_gain: f64,
    /// Linear-probe gain on MNLI.
    pub lp_gain: f64,
}

impl OffShelfModel {
    /// Set label with whitespace removed, usable as a model id.
    pub fn id(&self) -> String {
        self.set.split_whitespace().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupGains {
    /// Row labels are source groups, column labels target groups.
    pub groups: [&'static str; 3],
    pub gains: [[f64; 3]; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearCoefficients {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum FixtureData {
    LossAggregate(LossAggregate),
    GroupGains(GroupGains),
    Baselines(&'static [BaselineStat]),
    OffShelfModels(&'static [OffShelfModel]),
    LinearPredictor(LinearCoefficients),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceFixture {
    pub name: &'static str,
    /// Which published table the values come from.
    pub citation: &'static str,
    pub data: FixtureData,
}

const fn loss(k: usize, avg: f64, max: f64, count_over_one: usize, n_targets: usize) -> FixtureData {
    FixtureData::LossAggregate(LossAggregate {
        k,
        avg,
        max,
        count_over_one,
        n_targets,
    })
}

const LP_RANKING: &str = "lost gain of the LP(m, MNLI) static ranking";
const AVG_RANKING: &str = "lost gain of the average-gain ranking over General targets";

/// Frozen predictor `avg_gain = slope * LP(m, MNLI) + intercept`.
pub const LP_PREDICTOR: LinearCoefficients = LinearCoefficients {
    slope: 0.0822,
    intercept: -0.940,
};

pub const GROUP_GAINS: GroupGains = GroupGains {
    groups: ["General", "NLI", "Twitter"],
    gains: [
        [-0.37, -2.68, -0.54],
        [1.26, 0.63, -0.03],
        [-0.4, -2.39, 0.53],
    ],
};

#[rustfmt::skip]
pub const ROBERTA_BASELINES: [BaselineStat; 22] = [
    BaselineStat { dataset: "MultiRC", mean: 61.07, std: 2.01 },
    BaselineStat { dataset: "QQP", mean: 90.92, std: 0.29 },
    BaselineStat { dataset: "WSC", mean: 63.46, std: 0.00 },
    BaselineStat { dataset: "MRPC", mean: 87.70, std: 0.95 },
    BaselineStat { dataset: "CoLA", mean: 83.11, std: 1.34 },
    BaselineStat { dataset: "WIC", mean: 65.55, std: 2.32 },
    BaselineStat { dataset: "BoolQ", mean: 77.09, std: 3.19 },
    BaselineStat { dataset: "COPA", mean: 49.00, std: 4.90 },
    BaselineStat { dataset: "SST2", mean: 93.81, std: 0.26 },
    BaselineStat { dataset: "CB", mean: 70.36, std: 3.11 },
    BaselineStat { dataset: "QNLI", mean: 92.28, std: 0.48 },
    BaselineStat { dataset: "WNLI", mean: 56.34, std: 0.00 },
    BaselineStat { dataset: "RTE", mean: 72.42, std: 0.93 },
    BaselineStat { dataset: "ESNLI", mean: 91.05, std: 0.18 },
    BaselineStat { dataset: "ANLI", mean: 51.67, std: 0.36 },
    BaselineStat { dataset: "MNLI", mean: 87.07, std: 0.23 },
    BaselineStat { dataset: "Twitter Hate", mean: 52.30, std: 1.03 },
    BaselineStat { dataset: "Twitter Offensive", mean: 84.67, std: 0.41 },
    BaselineStat { dataset: "Twitter Irony", mean: 70.84, std: 2.53 },
    BaselineStat { dataset: "Twitter Sentiment", mean: 70.59, std: 0.34 },
    BaselineStat { dataset: "Twitter Emoji", mean: 46.32, std: 0.56 },
    BaselineStat { dataset: "Twitter Emotion", mean: 82.08, std: 0.58 },
];

#[rustfmt::skip]
pub const OFF_SHELF_ROBERTA: [OffShelfModel; 66] = [
    OffShelfModel { index: 0, set: "imdb _1", name: "aychang/roberta-base-imdb", avg_gain: -5.91, lp_gain: -12.62 },
    OffShelfModel { index: 1, set: "sentence_4", name: "sentence-transformers/stsb-roberta-base", avg_gain: -5.84, lp_gain: 2.59 },
    OffShelfModel { index: 2, set: "models_1", name: "textattack/roberta-base-ag-news", avg_gain: -5.73, lp_gain: -17.09 },
    OffShelfModel { index: 3, set: "twitter_10", name: "lucaordronneau/twitter-roberta-base-sentiment-...", avg_gain: -5.71, lp_gain: -9.76 },
    OffShelfModel { index: 4, set: "sentence_5", name: "sentence-transformers/roberta-base-nli-stsb-me...", avg_gain: -5.58, lp_gain: 2.59 },
    OffShelfModel { index: 5, set: "finance_0", name: "zhayunduo/roberta-base-stocktwits-finetuned", avg_gain: -4.49, lp_gain: -12.60 },
    OffShelfModel { index: 6, set: "sentence_2", name: "sentence-transformers/msmarco-roberta-base-v3", avg_gain: -4.17, lp_gain: -8.82 },
    OffShelfModel { index: 7, set: "twitter_8", name: "cardiffnlp/twitter-roberta-base-emotion", avg_gain: -4.17, lp_gain: 1.00 },
    OffShelfModel { index: 8, set: "sentence_1", name: "sentence-transformers/roberta-base-nli-mean-to...", avg_gain: -4.07, lp_gain: 5.47 },
    OffShelfModel { index: 9, set: "qa_3", name: "navteca/roberta-base-squad2", avg_gain: -4.04, lp_gain: 4.03 },
    OffShelfModel { index: 10, set: "quora _0", name: "cross-encoder/quora-roberta-base", avg_gain: -3.61, lp_gain: 8.35 },
    OffShelfModel { index: 11, set: "scratch_0", name: "neoyipeng/twitter-roberta-base-sentiment-mlm-c...", avg_gain: -3.51, lp_gain: -3.13 },
    OffShelfModel { index: 12, set: "models_5", name: "neoyipeng/twitter-roberta-base-sentiment-mlm-c...", avg_gain: -3.51, lp_gain: -3.13 },
    OffShelfModel { index: 13, set: "sentence_0", name: "sentence-transformers/nli-roberta-base", avg_gain: -3.50, lp_gain: 5.47 },
    OffShelfModel { index: 14, set: "models_8", name: "cointegrated/roberta-base-formality", avg_gain: -3.29, lp_gain: -4.96 },
    OffShelfModel { index: 15, set: "legal_1", name: "saibo/legal-roberta-base", avg_gain: -3.20, lp_gain: -1.76 },
    OffShelfModel { index: 16, set: "twitter_12", name: "cardiffnlp/twitter-roberta-base-stance-abortion", avg_gain: -2.95, lp_gain: -8.89 },
    OffShelfModel { index: 17, set: "sst2 _0", name: "Bhumika/roberta-base-finetuned-sst2", avg_gain: -2.77, lp_gain: -3.00 },
    OffShelfModel { index: 18, set: "models_14", name: "cestwc/roberta-base-unigram-ternary", avg_gain: -2.73, lp_gain: -8.39 },
    OffShelfModel { index: 19, set: "models_11", name: "mariagrandury/roberta-base-finetuned-sms-spam-...", avg_gain: -2.67, lp_gain: -5.90 },
    OffShelfModel { index: 20, set: "qa_1", name: "nlpconnect/roberta-base-squad2-nq", avg_gain: -2.57, lp_gain: 3.67 },
    OffShelfModel { index: 21, set: "twitter_13", name: "bdotloh/twitter-roberta-base-finetuned-twitter...", avg_gain: -2.47, lp_gain: -3.12 },
    OffShelfModel { index: 22, set: "models_0", name: "textattack/roberta-base-CoLA", avg_gain: -2.38, lp_gain: -2.47 },
    OffShelfModel { index: 23, set: "twitter_6", name: "cardiffnlp/twitter-roberta-base-dec2021", avg_gain: -2.31, lp_gain: -11.45 },
    OffShelfModel { index: 24, set: "twitter_5", name: "cardiffnlp/twitter-roberta-base-mar2022", avg_gain: -2.21, lp_gain: -5.38 },
    OffShelfModel { index: 25, set: "quora _1", name: "navteca/quora-roberta-base", avg_gain: -2.13, lp_gain: 8.35 },
    OffShelfModel { index: 26, set: "models_16", name: "hoanhkhoa/roberta-base-finetuned-ner", avg_gain: -2.12, lp_gain: -6.82 },
    OffShelfModel { index: 27, set: "twitter_3", name: "cardiffnlp/twitter-roberta-base-2021-124m", avg_gain: -2.05, lp_gain: -5.30 },
    OffShelfModel { index: 28, set: "twitter_11", name: "cardiffnlp/twitter-roberta-base-stance-climate", avg_gain: -1.98, lp_gain: -6.29 },
    OffShelfModel { index: 29, set: "legal_0", name: "akdeniz27/roberta-base-cuad", avg_gain: -1.90, lp_gain: -8.57 },
    OffShelfModel { index: 30, set: "models_13", name: "cardiffnlp/twitter-roberta-base-stance-feminist", avg_gain: -1.86, lp_gain: -4.25 },
    OffShelfModel { index: 31, set: "imdb _2", name: "aypan17/roberta-base-imdb", avg_gain: -1.86, lp_gain: -3.50 },
    OffShelfModel { index: 32, set: "models_2", name: "ghanashyamvtatti/roberta-fake-news", avg_gain: -1.81, lp_gain: -12.47 },
    OffShelfModel { index: 33, set: "scratch_1", name: "neoyipeng/twitter-roberta-base-sentiment-mlm-skep", avg_gain: -1.71, lp_gain: -8.73 },
    OffShelfModel { index: 34, set: "models_12", name: "surrey-nlp/roberta-base-finetuned-abbr", avg_gain: -1.65, lp_gain: -0.66 },
    OffShelfModel { index: 35, set: "twitter_4", name: "cardiffnlp/twitter-roberta-base-emoji", avg_gain: -1.63, lp_gain: -2.76 },
    OffShelfModel { index: 36, set: "models_4", name: "textattack/roberta-base-rotten-tomatoes", avg_gain: -1.61, lp_gain: 3.73 },
    OffShelfModel { index: 37, set: "legal_2", name: "marshmellow77/roberta-base-cuad", avg_gain: -1.53, lp_gain: -8.57 },
    OffShelfModel { index: 38, set: "legal_3", name: "Rakib/roberta-base-on-cuad", avg_gain: -1.33, lp_gain: -2.48 },
    OffShelfModel { index: 39, set: "twitter_7", name: "cardiffnlp/twitter-roberta-base-sentiment", avg_gain: -1.24, lp_gain: 3.03 },
    OffShelfModel { index: 40, set: "twitter_9", name: "cardiffnlp/twitter-roberta-base", avg_gain: -1.16, lp_gain: -1.49 },
    OffShelfModel { index: 41, set: "models_15", name: "thatdramebaazguy/roberta-base-wikimovies", avg_gain: -1.11, lp_gain: -1.76 },
    OffShelfModel { index: 42, set: "finance_1", name: "vanadhi/roberta-base-fiqa-flm-sq-flit", avg_gain: -1.09, lp_gain: -1.00 },
    OffShelfModel { index: 43, set: "models_3", name: "allenai/reviews", avg_gain: -1.01, lp_gain: -1.17 },
    OffShelfModel { index: 44, set: "models_7", name: "princeton-nlp/sup-simcse-roberta-base", avg_gain: -0.99, lp_gain: 4.26 },
    OffShelfModel { index: 45, set: "mrpc _1", name: "ji-xin/roberta", avg_gain: -0.94, lp_gain: -1.67 },
    OffShelfModel { index: 46, set: "twitter_1", name: "cardiffnlp/twitter-roberta-base-offensive", avg_gain: -0.91, lp_gain: -2.79 },
    OffShelfModel { index: 47, set: "sst2 _1", name: "textattack/roberta-base-SST-2", avg_gain: -0.84, lp_gain: 3.83 },
    OffShelfModel { index: 48, set: "sentence_3", name: "sentence-transformers/stsb-roberta-base-v2", avg_gain: -0.80, lp_gain: 1.68 },
    OffShelfModel { index: 49, set: "twitter_2", name: "cardiffnlp/twitter-roberta-base-irony", avg_gain: -0.69, lp_gain: 0.46 },
    OffShelfModel { index: 50, set: "imdb _0", name: "textattack/roberta-base-imdb", avg_gain: -0.40, lp_gain: -3.64 },
    OffShelfModel { index: 51, set: "models_6", name: "VictorSanh/roberta-base-finetuned-yelp-polarity", avg_gain: -0.25, lp_gain: -0.66 },
    OffShelfModel { index: 52, set: "models_10", name: "gargam/roberta-base-crest", avg_gain: -0.12, lp_gain: -4.21 },
    OffShelfModel { index: 53, set: "twitter_0", name: "bhadresh-savani/roberta-base-emotion", avg_gain: -0.05, lp_gain: -4.61 },
    OffShelfModel { index: 54, set: "qa_4", name: "shahrukhx01/roberta-base-boolq", avg_gain: 0.25, lp_gain: 10.42 },
    OffShelfModel { index: 55, set: "mrpc _0", name: "textattack/roberta-base-MRPC", avg_gain: 0.39, lp_gain: 7.27 },
    OffShelfModel { index: 56, set: "nli_3", name: "textattack/roberta-base-RTE", avg_gain: 0.42, lp_gain: 14.82 },
    OffShelfModel { index: 57, set: "nli_2", name: "mujeensung/roberta-base_mnli_bc", avg_gain: 0.48, lp_gain: 23.43 },
    OffShelfModel { index: 58, set: "qa_0", name: "deepset/roberta-base-squad2-covid", avg_gain: 0.50, lp_gain: -1.11 },
    OffShelfModel { index: 59, set: "qa_2", name: "csarron/roberta-base-squad-v1", avg_gain: 0.99, lp_gain: 3.38 },
    OffShelfModel { index: 60, set: "stsb _0", name: "textattack/roberta-base-STS-B", avg_gain: 1.05, lp_gain: 14.66 },
    OffShelfModel { index: 61, set: "models_9", name: "textattack/roberta-base-QNLI", avg_gain: 1.10, lp_gain: 6.49 },
    OffShelfModel { index: 62, set: "nli_0", name: "textattack/roberta-base-MNLI", avg_gain: 2.09, lp_gain: 34.39 },
    OffShelfModel { index: 63, set: "nli_1", name: "cross-encoder/nli-roberta-base", avg_gain: 2.77, lp_gain: 34.09 },
    OffShelfModel { index: 64, set: "stsb _1", name: "cross-encoder/stsb-roberta-base", avg_gain: 2.82, lp_gain: 30.19 },
    OffShelfModel { index: 65, set: "multitask_0", name: "facebook/muppet-roberta-base", avg_gain: 3.00, lp_gain: 31.58 },
];

pub const FIXTURES: [ReferenceFixture; 12] = [
    ReferenceFixture { name: "table1_inhouse_loss1", citation: LP_RANKING, data: loss(1, 0.37, 2.11, 3, 22) },
    ReferenceFixture { name: "table1_inhouse_loss3", citation: LP_RANKING, data: loss(3, 0.2, 1.15, 1, 22) },
    ReferenceFixture { name: "table1_offshelf_loss1", citation: LP_RANKING, data: loss(1, 2.33, 12.0, 8, 14) },
    ReferenceFixture { name: "table1_offshelf_loss3", citation: LP_RANKING, data: loss(3, 0.34, 1.62, 2, 14) },
    ReferenceFixture { name: "table5_inhouse_loss1", citation: AVG_RANKING, data: loss(1, 0.37, 2.11, 3, 22) },
    ReferenceFixture { name: "table5_inhouse_loss3", citation: AVG_RANKING, data: loss(3, 0.2, 1.15, 1, 22) },
    ReferenceFixture { name: "table5_offshelf_loss1", citation: AVG_RANKING, data: loss(1, 1.41, 12.0, 3, 14) },
    ReferenceFixture { name: "table5_offshelf_loss3", citation: AVG_RANKING, data: loss(3, 0.29, 1.44, 2, 14) },
    ReferenceFixture {
        name: "table2_group_gains",
        citation: "average gain of source-group models (rows) on target groups (columns)",
        data: FixtureData::GroupGains(GROUP_GAINS),
    },
    ReferenceFixture {
        name: "table3_baselines",
        citation: "RoBERTa finetuned without intertraining, mean and STD over seeds",
        data: FixtureData::Baselines(&ROBERTA_BASELINES),
    },
    ReferenceFixture {
        name: "table4_offshelf_roberta",
        citation: "off-the-shelf RoBERTa models, average gain over General and LP gain over MNLI",
        data: FixtureData::OffShelfModels(&OFF_SHELF_ROBERTA),
    },
    ReferenceFixture {
        name: "appE_lp_predictor",
        citation: "best linear predictor of average gain from LP(m, MNLI)",
        data: FixtureData::LinearPredictor(LP_PREDICTOR),
    },
];

pub fn fixture_names() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|f| f.name)
}

pub fn load_fixture(name: &str) -> Result<ReferenceFixture> {
    FIXTURES
        .iter()
        .find(|f| f.name == name)
        .copied()
        .ok_or_else(|| Error::UnknownFixture(name.to_string()))
}

/// Mean and STD of the pretrained baseline on `dataset` (case-insensitive).
pub fn roberta_baseline(dataset: &str) -> Option<BaselineStat> {
    ROBERTA_BASELINES
        .iter()
        .find(|b| b.dataset.eq_ignore_ascii_case(dataset))
        .copied()
}
