//! Every fixture value compared with the published tables, quoted row by
//! row below in their original `&`-separated layout.

use intertrain::fixtures::{fixture_names, load_fixture, roberta_baseline, FixtureData};

const LOSS_ROWS: &str = r"
table1_inhouse_loss1 & 1 & 0.37 & 2.11 & 3/22
table1_inhouse_loss3 & 3 & 0.2 & 1.15 & 1/22
table1_offshelf_loss1 & 1 & 2.33 & 12.0 & 8/14
table1_offshelf_loss3 & 3 & 0.34 & 1.62 & 2/14
table5_inhouse_loss1 & 1 & 0.37 & 2.11 & 3/22
table5_inhouse_loss3 & 3 & 0.2 & 1.15 & 1/22
table5_offshelf_loss1 & 1 & 1.41 & 12.0 & 3/14
table5_offshelf_loss3 & 3 & 0.29 & 1.44 & 2/14
";

const GROUP_ROWS: &str = r"
General & -0.37 & -2.68 & -0.54
NLI & 1.26 & 0.63 & -0.03
Twitter & -0.4 & -2.39 & 0.53
";

const BASELINE_ROWS: &str = r"
MultiRC & 61.07 & 2.01
QQP & 90.92 & 0.29
WSC & 63.46 & 0.00
MRPC & 87.70 & 0.95
CoLA & 83.11 & 1.34
WIC & 65.55 & 2.32
BoolQ & 77.09 & 3.19
COPA & 49.00 & 4.90
SST2 & 93.81 & 0.26
CB & 70.36 & 3.11
QNLI & 92.28 & 0.48
WNLI & 56.34 & 0.00
RTE & 72.42 & 0.93
ESNLI & 91.05 & 0.18
ANLI & 51.67 & 0.36
MNLI & 87.07 & 0.23
Twitter Hate & 52.30 & 1.03
Twitter Offensive & 84.67 & 0.41
Twitter Irony & 70.84 & 2.53
Twitter Sentiment & 70.59 & 0.34
Twitter Emoji & 46.32 & 0.56
Twitter Emotion & 82.08 & 0.58
";

const MODEL_ROWS: &str = r"
0 & imdb \_1 & aychang/roberta-base-imdb & -5.91 & -12.62
1 & sentence\_4 & sentence-transformers/stsb-roberta-base & -5.84 & 2.59
2 & models\_1 & textattack/roberta-base-ag-news & -5.73 & -17.09
3 & twitter\_10 & lucaordronneau/twitter-roberta-base-sentiment-... & -5.71 & -9.76
4 & sentence\_5 & sentence-transformers/roberta-base-nli-stsb-me... & -5.58 & 2.59
5 & finance\_0 & zhayunduo/roberta-base-stocktwits-finetuned & -4.49 & -12.60
6 & sentence\_2 & sentence-transformers/msmarco-roberta-base-v3 & -4.17 & -8.82
7 & twitter\_8 & cardiffnlp/twitter-roberta-base-emotion & -4.17 & 1.00
8 & sentence\_1 & sentence-transformers/roberta-base-nli-mean-to... & -4.07 & 5.47
9 & qa\_3 & navteca/roberta-base-squad2 & -4.04 & 4.03
10 & quora \_0 & cross-encoder/quora-roberta-base & -3.61 & 8.35
11 & scratch\_0 & neoyipeng/twitter-roberta-base-sentiment-mlm-c... & -3.51 & -3.13
12 & models\_5 & neoyipeng/twitter-roberta-base-sentiment-mlm-c... & -3.51 & -3.13
13 & sentence\_0 & sentence-transformers/nli-roberta-base & -3.50 & 5.47
14 & models\_8 & cointegrated/roberta-base-formality & -3.29 & -4.96
15 & legal\_1 & saibo/legal-roberta-base & -3.20 & -1.76
16 & twitter\_12 & cardiffnlp/twitter-roberta-base-stance-abortion & -2.95 & -8.89
17 & sst2 \_0 & Bhumika/roberta-base-finetuned-sst2 & -2.77 & -3.00
18 & models\_14 & cestwc/roberta-base-unigram-ternary & -2.73 & -8.39
19 & models\_11 & mariagrandury/roberta-base-finetuned-sms-spam-... & -2.67 & -5.90
20 & qa\_1 & nlpconnect/roberta-base-squad2-nq & -2.57 & 3.67
21 & twitter\_13 & bdotloh/twitter-roberta-base-finetuned-twitter... & -2.47 & -3.12
22 & models\_0 & textattack/roberta-base-CoLA & -2.38 & -2.47
23 & twitter\_6 & cardiffnlp/twitter-roberta-base-dec2021 & -2.31 & -11.45
24 & twitter\_5 & cardiffnlp/twitter-roberta-base-mar2022 & -2.21 & -5.38
25 & quora \_1 & navteca/quora-roberta-base & -2.13 & 8.35
26 & models\_16 & hoanhkhoa/roberta-base-finetuned-ner & -2.12 & -6.82
27 & twitter\_3 & cardiffnlp/twitter-roberta-base-2021-124m & -2.05 & -5.30
28 & twitter\_11 & cardiffnlp/twitter-roberta-base-stance-climate & -1.98 & -6.29
29 & legal\_0 & akdeniz27/roberta-base-cuad & -1.90 & -8.57
30 & models\_13 & cardiffnlp/twitter-roberta-base-stance-feminist & -1.86 & -4.25
31 & imdb \_2 & aypan17/roberta-base-imdb & -1.86 & -3.50
32 & models\_2 & ghanashyamvtatti/roberta-fake-news & -1.81 & -12.47
33 & scratch\_1 & neoyipeng/twitter-roberta-base-sentiment-mlm-skep & -1.71 & -8.73
34 & models\_12 & surrey-nlp/roberta-base-finetuned-abbr & -1.65 & -0.66
35 & twitter\_4 & cardiffnlp/twitter-roberta-base-emoji & -1.63 & -2.76
36 & models\_4 & textattack/roberta-base-rotten-tomatoes & -1.61 & 3.73
37 & legal\_2 & marshmellow77/roberta-base-cuad & -1.53 & -8.57
38 & legal\_3 & Rakib/roberta-base-on-cuad & -1.33 & -2.48
39 & twitter\_7 & cardiffnlp/twitter-roberta-base-sentiment & -1.24 & 3.03
40 & twitter\_9 & cardiffnlp/twitter-roberta-base & -1.16 & -1.49
41 & models\_15 & thatdramebaazguy/roberta-base-wikimovies & -1.11 & -1.76
42 & finance\_1 & vanadhi/roberta-base-fiqa-flm-sq-flit & -1.09 & -1.00
43 & models\_3 & allenai/reviews & -1.01 & -1.17
44 & models\_7 & princeton-nlp/sup-simcse-roberta-base & -0.99 & 4.26
45 & mrpc \_1 & ji-xin/roberta & -0.94 & -1.67
46 & twitter\_1 & cardiffnlp/twitter-roberta-base-offensive & -0.91 & -2.79
47 & sst2 \_1 & textattack/roberta-base-SST-2 & -0.84 & 3.83
48 & sentence\_3 & sentence-transformers/stsb-roberta-base-v2 & -0.80 & 1.68
49 & twitter\_2 & cardiffnlp/twitter-roberta-base-irony & -0.69 & 0.46
50 & imdb \_0 & textattack/roberta-base-imdb & -0.40 & -3.64
51 & models\_6 & VictorSanh/roberta-base-finetuned-yelp-polarity & -0.25 & -0.66
52 & models\_10 & gargam/roberta-base-crest & -0.12 & -4.21
53 & twitter\_0 & bhadresh-savani/roberta-base-emotion & -0.05 & -4.61
54 & qa\_4 & shahrukhx01/roberta-base-boolq & 0.25 & 10.42
55 & mrpc \_0 & textattack/roberta-base-MRPC & 0.39 & 7.27
56 & nli\_3 & textattack/roberta-base-RTE & 0.42 & 14.82
57 & nli\_2 & mujeensung/roberta-base\_mnli\_bc & 0.48 & 23.43
58 & qa\_0 & deepset/roberta-base-squad2-covid & 0.50 & -1.11
59 & qa\_2 & csarron/roberta-base-squad-v1 & 0.99 & 3.38
60 & stsb \_0 & textattack/roberta-base-STS-B & 1.05 & 14.66
61 & models\_9 & textattack/roberta-base-QNLI & 1.10 & 6.49
62 & nli\_0 & textattack/roberta-base-MNLI & 2.09 & 34.39
63 & nli\_1 & cross-encoder/nli-roberta-base & 2.77 & 34.09
64 & stsb \_1 & cross-encoder/stsb-roberta-base & 2.82 & 30.19
65 & multitask\_0 & facebook/muppet-roberta-base & 3.00 & 31.58
";

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split('&').map(|c| c.trim().replace("\\_", "_")).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s}"))
}

#[test]
fn loss_aggregates() {
    for row in rows(LOSS_ROWS) {
        let FixtureData::LossAggregate(l) = load_fixture(&row[0]).unwrap().data else {
            panic!("{} is not a loss aggregate", row[0]);
        };
        let (count, n) = row[4].split_once('/').unwrap();
        assert_eq!(l.k, row[1].parse::<usize>().unwrap(), "{}", row[0]);
        assert_eq!(l.avg, num(&row[2]), "{}", row[0]);
        assert_eq!(l.max, num(&row[3]), "{}", row[0]);
        assert_eq!(l.count_over_one, count.parse::<usize>().unwrap(), "{}", row[0]);
        assert_eq!(l.n_targets, n.parse::<usize>().unwrap(), "{}", row[0]);
    }
}

#[test]
fn group_gains() {
    let FixtureData::GroupGains(g) = load_fixture("table2_group_gains").unwrap().data else {
        panic!("wrong kind");
    };
    for (i, row) in rows(GROUP_ROWS).iter().enumerate() {
        assert_eq!(g.groups[i], row[0]);
        for j in 0..3 {
            assert_eq!(g.gains[i][j], num(&row[j + 1]), "{} -> {}", row[0], g.groups[j]);
        }
    }
}

#[test]
fn pretrained_baselines() {
    let FixtureData::Baselines(b) = load_fixture("table3_baselines").unwrap().data else {
        panic!("wrong kind");
    };
    let expected = rows(BASELINE_ROWS);
    assert_eq!(b.len(), expected.len());
    for (stat, row) in b.iter().zip(&expected) {
        assert_eq!(stat.dataset, row[0]);
        assert_eq!(stat.mean, num(&row[1]), "{}", row[0]);
        assert_eq!(stat.std, num(&row[2]), "{}", row[0]);
    }
    let rte = roberta_baseline("rte").unwrap();
    assert_eq!((rte.mean, rte.std), (72.42, 0.93));
}

#[test]
fn off_the_shelf_models() {
    let FixtureData::OffShelfModels(models) = load_fixture("table4_offshelf_roberta").unwrap().data else {
        panic!("wrong kind");
    };
    let expected = rows(MODEL_ROWS);
    assert_eq!(models.len(), 66);
    assert_eq!(expected.len(), 66);
    for (m, row) in models.iter().zip(&expected) {
        assert_eq!(m.index, row[0].parse::<usize>().unwrap());
        assert_eq!(m.set, row[1]);
        assert_eq!(m.name, row[2]);
        assert_eq!(m.avg_gain, num(&row[3]), "row {}", row[0]);
        assert_eq!(m.lp_gain, num(&row[4]), "row {}", row[0]);
    }
}

#[test]
fn predictor_and_names() {
    let FixtureData::LinearPredictor(c) = load_fixture("appE_lp_predictor").unwrap().data else {
        panic!("wrong kind");
    };
    assert_eq!((c.slope, c.intercept), (0.0822, -0.940));
    assert_eq!(fixture_names().count(), 12);
    assert!(load_fixture("table9").is_err());
}
