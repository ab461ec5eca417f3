//! Hand-rolled SVG output. Rendering goes through fixed-precision number
//! formatting and ordered iteration only, so a given input always produces
//! byte-identical documents.

use crate::error::{CiuError, Result};
use crate::render::{cu_color, ColorSpec};
use crate::types::CiuResult;

fn xml_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn px(v: f64) -> String {
    format!("{v:.1}")
}

/// Bar ordering in the plot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BarSort {
    /// Largest importance first; ties keep input order.
    #[default]
    ByCi,
    /// Exactly the order the results were passed in.
    InputOrder,
}

/// Layout and styling for bar plots. Bar length encodes importance, bar
/// color encodes utility.
#[derive(Clone, Debug, PartialEq)]
pub struct BarPlotSpec {
    pub title: String,
    pub width: u32,
    pub bar_height: u32,
    pub color: ColorSpec,
    pub sort: BarSort,
}

impl Default for BarPlotSpec {
    fn default() -> Self {
        Self {
            title: String::new(),
            width: 640,
            bar_height: 26,
            color: ColorSpec::default(),
            sort: BarSort::default(),
        }
    }
}

impl BarPlotSpec {
    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = title.into();
        self
    }
}

/// Render one horizontal bar per result. The axis spans `[0, 1]`, extended
/// when an importance value overshoots 1.
pub fn render_barplot(
    results: &[CiuResult],
    labels: &[String],
    spec: &BarPlotSpec,
) -> Result<String> {
    if results.is_empty() {
        return Err(CiuError::EmptyResults);
    }
    if labels.len() != results.len() {
        return Err(CiuError::LabelMismatch {
            expected: results.len(),
            actual: labels.len(),
        });
    }
    spec.color.validate()?;

    let ordered: Vec<(&CiuResult, &String)> = match spec.sort {
        BarSort::InputOrder => results.iter().zip(labels).collect(),
        BarSort::ByCi => {
            let mut pairs: Vec<(&CiuResult, &String)> = results.iter().zip(labels).collect();
            pairs.sort_by(|a, b| b.0.ci.partial_cmp(&a.0.ci).expect("finite ci"));
            pairs
        }
    };

    let axis_max = results.iter().map(|r| r.ci).fold(1.0f64, f64::max);
    let label_w = 170.0;
    let value_w = 130.0;
    let gap = 8.0;
    let top = if spec.title.is_empty() { 16.0 } else { 40.0 };
    let bar_h = spec.bar_height as f64;
    let plot_w = spec.width as f64 - label_w - value_w;
    let height = top + ordered.len() as f64 * (bar_h + gap) + 34.0;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = spec.width,
        h = px(height),
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        spec.width,
        px(height)
    ));
    if !spec.title.is_empty() {
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
            px(spec.width as f64 / 2.0),
            xml_escape(&spec.title)
        ));
    }

    for (row, (result, label)) in ordered.iter().enumerate() {
        let y = top + row as f64 * (bar_h + gap);
        let bar_len = (result.ci / axis_max).max(0.0) * plot_w;
        let [r, g, b] = cu_color(result.cu.clamp(0.0, 1.0), &spec.color)?;
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            px(label_w - 8.0),
            px(y + bar_h / 2.0 + 4.0),
            xml_escape(label)
        ));
        svg.push_str(&format!(
            "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"rgb({r},{g},{b})\" stroke=\"black\" stroke-width=\"0.5\"/>\n",
            px(label_w),
            px(y),
            px(bar_len),
            px(bar_h),
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">CI={:.3} CU={:.3}</text>\n",
            px(label_w + bar_len + 6.0),
            px(y + bar_h / 2.0 + 4.0),
            result.ci,
            result.cu,
        ));
    }

    // Axis with five ticks from 0 to the axis maximum.
    let axis_y = top + ordered.len() as f64 * (bar_h + gap) + 6.0;
    svg.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1\"/>\n",
        px(label_w),
        px(axis_y),
        px(label_w + plot_w),
        px(axis_y),
    ));
    for tick in 0..=4 {
        let frac = tick as f64 / 4.0;
        let x = label_w + frac * plot_w;
        svg.push_str(&format!(
            "  <line x1=\"{x}\" y1=\"{y1}\" x2=\"{x}\" y2=\"{y2}\" stroke=\"black\" stroke-width=\"1\"/>\n",
            x = px(x),
            y1 = px(axis_y),
            y2 = px(axis_y + 4.0),
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{:.2}</text>\n",
            px(x),
            px(axis_y + 16.0),
            frac * axis_max,
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Layout for input-output curve plots.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
}

impl Default for CurvePlotSpec {
    fn default() -> Self {
        Self {
            title: String::new(),
            x_label: "x".into(),
            y_label: "y".into(),
            width: 480,
            height: 360,
        }
    }
}

/// Render the sweep as a polyline with the context marked as a red dot.
pub fn render_curve(
    points: &[(f64, f64)],
    context_point: (f64, f64),
    spec: &CurvePlotSpec,
) -> Result<String> {
    if points.len() < 2 {
        return Err(CiuError::CurveTooShort { len: points.len() });
    }

    let margin_l = 56.0;
    let margin_r = 16.0;
    let margin_t = if spec.title.is_empty() { 16.0 } else { 40.0 };
    let margin_b = 44.0;
    let plot_w = spec.width as f64 - margin_l - margin_r;
    let plot_h = spec.height as f64 - margin_t - margin_b;

    let all_x = points.iter().map(|p| p.0).chain([context_point.0]);
    let all_y = points.iter().map(|p| p.1).chain([context_point.1]);
    let x_min = all_x.clone().fold(f64::INFINITY, f64::min);
    let x_max = all_x.fold(f64::NEG_INFINITY, f64::max);
    let y_min = all_y.clone().fold(f64::INFINITY, f64::min);
    let y_max = all_y.fold(f64::NEG_INFINITY, f64::max);
    // Flat series still need a non-empty vertical span.
    let (y_lo, y_hi) = if y_max > y_min {
        let pad = (y_max - y_min) * 0.05;
        (y_min - pad, y_max + pad)
    } else {
        (y_min - 0.5, y_max + 0.5)
    };
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };

    let sx = |x: f64| margin_l + (x - x_min) / x_span * plot_w;
    let sy = |y: f64| margin_t + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = spec.width,
        h = spec.height,
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        spec.width, spec.height
    ));
    if !spec.title.is_empty() {
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
            px(spec.width as f64 / 2.0),
            xml_escape(&spec.title)
        ));
    }

    // Frame.
    svg.push_str(&format!(
        "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n",
        px(margin_l),
        px(margin_t),
        px(plot_w),
        px(plot_h),
    ));

    let path: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{},{}", px(sx(*x)), px(sy(*y))))
        .collect();
    svg.push_str(&format!(
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"rgb(40,90,200)\" stroke-width=\"1.5\"/>\n",
        path.join(" ")
    ));
    svg.push_str(&format!(
        "  <circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"rgb(220,50,32)\"/>\n",
        px(sx(context_point.0)),
        px(sy(context_point.1)),
    ));

    // Extent labels.
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{:.3}</text>\n",
        px(margin_l),
        px(margin_t + plot_h + 14.0),
        x_min,
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{:.3}</text>\n",
        px(margin_l + plot_w),
        px(margin_t + plot_h + 14.0),
        x_max,
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.3}</text>\n",
        px(margin_l - 6.0),
        px(margin_t + plot_h + 3.0),
        y_lo,
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.3}</text>\n",
        px(margin_l - 6.0),
        px(margin_t + 3.0),
        y_hi,
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
        px(margin_l + plot_w / 2.0),
        px(margin_t + plot_h + 30.0),
        xml_escape(&spec.x_label),
    ));
    svg.push_str(&format!(
        "  <text x=\"14\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        px(margin_t + plot_h / 2.0),
        px(margin_t + plot_h / 2.0),
        xml_escape(&spec.y_label),
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Minimal well-formedness check used by tests: every opened tag closes in
/// order and the document carries a viewBox.
#[doc(hidden)]
pub fn check_svg_well_formed(svg: &str) -> std::result::Result<(), String> {
    if !svg.contains("viewBox=\"") {
        return Err("missing viewBox".into());
    }
    let mut stack: Vec<String> = Vec::new();
    let mut rest = svg;
    while let Some(start) = rest.find('<') {
        rest = &rest[start + 1..];
        let end = rest.find('>').ok_or("unterminated tag")?;
        let tag = &rest[..end];
        rest = &rest[end + 1..];
        if tag.starts_with('?') || tag.starts_with('!') {
            continue;
        }
        if let Some(name) = tag.strip_prefix('/') {
            match stack.pop() {
                Some(open) if open == name.trim() => {}
                Some(open) => return Err(format!("mismatched </{}> after <{open}>", name.trim())),
                None => return Err(format!("stray closing tag </{}>", name.trim())),
            }
        } else if !tag.ends_with('/') {
            let name = tag.split_whitespace().next().ok_or("empty tag")?;
            stack.push(name.to_string());
        }
    }
    if stack.is_empty() {
        Ok(())
    } else {
        Err(format!("unclosed tags: {stack:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{IndexSet, Target};

    fn result(label_ci: f64, cu: f64) -> CiuResult {
        CiuResult {
            target: Target::Features(IndexSet::single(0)),
            output_index: 0,
            ci: label_ci,
            cu,
            cmin: 0.0,
            cmax: label_ci,
            y_context: 0.1,
            n: 10,
            seed: 0,
            degenerate_range: false,
            overshoot: false,
        }
    }

    #[test]
    fn barplot_is_deterministic_and_well_formed() {
        let results = vec![result(0.64, 0.99), result(0.31, 0.99), result(0.45, 0.73)];
        let labels = vec![
            "Petal Length".to_string(),
            "Sepal Length".to_string(),
            "Petal Width".to_string(),
        ];
        let spec = BarPlotSpec::default().with_title("virginica");
        let a = render_barplot(&results, &labels, &spec).unwrap();
        let b = render_barplot(&results, &labels, &spec).unwrap();
        assert_eq!(a, b, "same input must give byte-identical SVG");
        check_svg_well_formed(&a).unwrap();
        // Sorted by CI: Petal Length's label comes before the others.
        let pl = a.find("Petal Length").unwrap();
        let sl = a.find("Sepal Length").unwrap();
        assert!(pl < sl);
    }

    #[test]
    fn single_full_bar_is_dark_green() {
        let results = vec![result(1.0, 1.0)];
        let labels = vec!["only".to_string()];
        let svg = render_barplot(&results, &labels, &BarPlotSpec::default()).unwrap();
        assert!(svg.contains("rgb(0,120,40)"), "{svg}");
        check_svg_well_formed(&svg).unwrap();
    }

    #[test]
    fn barplot_requires_results_and_matching_labels() {
        let spec = BarPlotSpec::default();
        assert!(render_barplot(&[], &[], &spec).is_err());
        let results = vec![result(0.5, 0.5)];
        assert!(render_barplot(&results, &[], &spec).is_err());
    }

    #[test]
    fn labels_are_xml_escaped() {
        let results = vec![result(0.5, 0.5)];
        let labels = vec!["a<b&c".to_string()];
        let svg = render_barplot(&results, &labels, &BarPlotSpec::default()).unwrap();
        assert!(svg.contains("a&lt;b&amp;c"));
        check_svg_well_formed(&svg).unwrap();
    }

    #[test]
    fn curve_handles_rising_flat_and_two_point_series() {
        let spec = CurvePlotSpec::default();
        let rising: Vec<(f64, f64)> = (0..11)
            .map(|i| {
                let x = i as f64 / 10.0;
                (x, (x.sqrt() + 0.04) / 2.0)
            })
            .collect();
        let svg = render_curve(&rising, (0.1, 0.178), &spec).unwrap();
        check_svg_well_formed(&svg).unwrap();
        assert!(svg.contains("circle"));

        let flat = vec![(0.0, 0.7), (0.5, 0.7), (1.0, 0.7)];
        let svg = render_curve(&flat, (0.5, 0.7), &spec).unwrap();
        check_svg_well_formed(&svg).unwrap();

        let two = vec![(0.0, 0.0), (1.0, 1.0)];
        let svg = render_curve(&two, (0.5, 0.5), &spec).unwrap();
        check_svg_well_formed(&svg).unwrap();

        assert!(render_curve(&two[..1], (0.0, 0.0), &spec).is_err());
    }
}
