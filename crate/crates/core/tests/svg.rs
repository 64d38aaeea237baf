use intertrain::gain::{GainMatrix, SignificanceRule};
use intertrain::report::{emit_heatmap, emit_scatter};

fn example() -> GainMatrix {
    GainMatrix::from_dense(
        &["m1", "m2", "m3"],
        &["t1", "t2"],
        &[vec![2.0, 1.0], vec![0.0, 3.0], vec![-1.0, -1.0]],
    )
    .unwrap()
}

fn texts<'a>(doc: &'a roxmltree::Document, class: &str) -> Vec<&'a str> {
    doc.descendants()
        .filter(|n| n.attribute("class") == Some(class))
        .map(|n| n.text().unwrap_or(""))
        .collect()
}

#[test]
fn three_by_two_cells_and_labels() {
    let svg = emit_heatmap(&example(), SignificanceRule::Std);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let cells: Vec<_> = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("cell"))
        .collect();
    assert_eq!(cells.len(), 6);
    let pairs: Vec<(&str, &str)> = cells
        .iter()
        .map(|c| (c.attribute("data-model").unwrap(), c.attribute("data-target").unwrap()))
        .collect();
    assert_eq!(
        pairs,
        [("m1", "t1"), ("m1", "t2"), ("m2", "t1"), ("m2", "t2"), ("m3", "t1"), ("m3", "t2")]
    );
    assert_eq!(texts(&doc, "row-label"), ["m1", "m2", "m3"]);
    assert_eq!(texts(&doc, "col-label"), ["t1", "t2"]);
}

#[test]
fn significance_marker() {
    let g = GainMatrix::from_means(
        &["a", "b"],
        &["x"],
        &[vec![Some(1.5)], vec![None]],
    )
    .unwrap();
    let svg = emit_heatmap(&g, SignificanceRule::Std);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let cells: Vec<_> = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("cell"))
        .collect();
    assert_eq!(cells[0].attribute("data-significant"), Some("true"));
    assert_eq!(cells[1].attribute("data-missing"), Some("true"));
    assert_eq!(texts(&doc, "sig-label").len(), 1);
}

#[test]
fn escaped_ids_stay_well_formed() {
    let g = GainMatrix::from_dense(&["a<b>", "c&d"], &["\"t\""], &[vec![1.0], vec![-1.0]]).unwrap();
    let svg = emit_heatmap(&g, SignificanceRule::Sem);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(texts(&doc, "row-label"), ["a<b>", "c&d"]);

    let points = vec![("p&q".to_string(), 1.0, 2.0), ("r".to_string(), 3.0, 1.0)];
    let svg = emit_scatter(&points, "x < y", "avg", Some(&intertrain::fixtures::LP_PREDICTOR));
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("point")).count(), 2);
    assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("fit")).count(), 1);
}
